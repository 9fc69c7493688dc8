"""Stiff lossy string struck by a hammer or vibrating against a rigid barrier.

The string obeys ``rho u_tt = T u_xx - E I u_xxxx - 2 sigma0 rho u_t
+ 2 sigma1 rho u_txx`` plus a contact forcing, with clamped ends.  The
discrete clamped condition ``u_0 = delta_x+ u_0 = 0`` pins the two end
nodes on each side when the string is stiff (one node each side when
``E = 0``); the remaining nodes are "free" and updated by the scheme.

Every update has the form ``u^{n+1} = u^{n-1} + k^2 (nu + F / rho) / (1 + sigma0 k)``
where ``nu`` collects the explicit terms and ``F`` is the contact force
density, so the contact problem reduces to scalar equations in
``r = eta^{n+1} - eta^{n-1}``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .contact import ContactLaw
from .energy import EnergyRow
from .exceptions import ConfigError
from .solvers import ScalarContactEquation, solve_scalar, solve_scalar_array

__all__ = [
    "StringSpec",
    "StringGrid",
    "HammerSpec",
    "BarrierSpec",
    "StringState",
    "stable_grid_spacing_string",
    "make_grid",
    "apply_string_operator",
    "hammer_distribution",
    "init_hammer_string",
    "step_hammer_string",
    "step_hammer_string_nonconservative",
    "parabolic_barrier",
    "triangle_shape",
    "init_string_barrier",
    "step_string_barrier",
    "energy_string",
    "penetration_bound",
    "readout",
]


@dataclass(frozen=True)
class StringSpec:
    rho: float
    T: float
    E: float
    r: float
    sigma0: float
    sigma1: float
    L: float
    k: float

    def __post_init__(self):
        for name in ("rho", "T", "L", "k"):
            if not getattr(self, name) > 0:
                raise ConfigError(f"string {name} must be positive, got {getattr(self, name)}")
        for name in ("E", "r", "sigma0", "sigma1"):
            if not getattr(self, name) >= 0:
                raise ConfigError(f"string {name} must be non-negative, got {getattr(self, name)}")

    @property
    def I(self) -> float:
        return math.pi * self.r**4 / 2.0

    @property
    def EI(self) -> float:
        return self.E * self.I

    @property
    def stiff(self) -> bool:
        return self.EI > 0.0


def stable_grid_spacing_string(spec: StringSpec) -> float:
    """Smallest grid spacing for which the string energy is non-negative."""
    k, rho = spec.k, spec.rho
    a = spec.T * k / rho + 4.0 * spec.sigma1
    h2 = spec.T * k * k / (2.0 * rho) + 2.0 * spec.sigma1 * k + 0.5 * k * math.sqrt(a * a + 16.0 * spec.EI / rho)
    return math.sqrt(h2)


def energy_coefficient(spec: StringSpec, h: float) -> float:
    """Lower-bound coefficient of ||delta_t+ u||^2 in the string energy; >= 0 iff h >= h_min."""
    k, rho = spec.k, spec.rho
    return rho / 2.0 - spec.T * k * k / (2.0 * h * h) - 2.0 * spec.EI * k * k / h**4 - 2.0 * spec.sigma1 * rho * k / (h * h)


@dataclass(frozen=True)
class StringGrid:
    N: int
    h: float
    lo: int  # first free node
    hi: int  # last free node

    @property
    def free(self) -> slice:
        return slice(self.lo, self.hi + 1)

    @property
    def x(self) -> np.ndarray:
        return np.arange(self.N + 1) * self.h


def make_grid(spec: StringSpec, N: int | None = None) -> StringGrid:
    """Grid with N = floor(L / h_min) intervals, or the given N if it is stable."""
    h_min = stable_grid_spacing_string(spec)
    N_max = int(math.floor(spec.L / h_min))
    if N is None:
        N = N_max
    h = spec.L / N
    if N > N_max:
        raise ConfigError(f"string grid spacing h = {h:.6g} m is below the stability limit h_min = {h_min:.6g} m")
    pinned = 2 if spec.stiff else 1
    if N - 2 * pinned < 0 or (spec.stiff and N < 4):
        raise ConfigError(f"string grid with N = {N} is too coarse for the stencil")
    return StringGrid(N, h, pinned, N - pinned)


def apply_string_operator(spec: StringSpec, grid: StringGrid, u: np.ndarray, u_prev: np.ndarray) -> np.ndarray:
    """Explicit part nu of the update, per unit density, on free nodes (zero elsewhere).

    nu = (2/k) delta_t- u + (T/rho) delta_xx u - (EI/rho) delta_xxxx u + 2 sigma1 delta_t- delta_xx u;
    the implicit sigma0 term appears only as the divisor (1 + sigma0 k) in the update.
    """
    k, h, rho = spec.k, grid.h, spec.rho
    lo, hi = grid.lo, grid.hi
    nu = np.zeros_like(u)
    du = u - u_prev
    s = slice(lo, hi + 1)
    dxx = (u[lo + 1:hi + 2] - 2.0 * u[s] + u[lo - 1:hi]) / (h * h)
    ddxx = (du[lo + 1:hi + 2] - 2.0 * du[s] + du[lo - 1:hi]) / (h * h)
    out = (2.0 / (k * k)) * du[s] + (spec.T / rho) * dxx + (2.0 * spec.sigma1 / k) * ddxx
    if spec.stiff:
        d4 = (u[lo + 2:hi + 3] - 4.0 * u[lo + 1:hi + 2] + 6.0 * u[s] - 4.0 * u[lo - 1:hi] + u[lo - 2:hi - 1]) / h**4
        out = out - (spec.EI / rho) * d4
    nu[s] = out
    return nu


# -- hammer ------------------------------------------------------------------


@dataclass(frozen=True)
class HammerSpec:
    M: float
    position: float
    v_in: float
    law: ContactLaw
    width: float = 0.0

    def __post_init__(self):
        if not self.M > 0:
            raise ConfigError(f"hammer mass must be positive, got {self.M}")
        if not 0.0 < self.position < 1.0:
            raise ConfigError(f"hammer position must lie in (0, 1), got {self.position}")
        if not self.width >= 0:
            raise ConfigError(f"hammer width must be non-negative, got {self.width}")


def hammer_distribution(grid: StringGrid, L: float, position: float, width: float = 0.0) -> np.ndarray:
    """Contact distribution g with sum h g_l = 1: nearest-node spike or rectangular window."""
    g = np.zeros(grid.N + 1)
    x = grid.x
    x0 = position * L
    if width > 0.0:
        sel = np.abs(x - x0) <= 0.5 * width + 1e-12 * L
    else:
        sel = np.zeros(grid.N + 1, dtype=bool)
    if not sel.any():
        sel[int(round(x0 / grid.h))] = True
    if sel[: grid.lo].any() or sel[grid.hi + 1:].any():
        raise ConfigError("hammer contact region overlaps the clamped end nodes")
    g[sel] = 1.0 / (grid.h * sel.sum())
    return g


@dataclass
class StringState:
    u: np.ndarray
    u_prev: np.ndarray
    step: int = 1
    uh: float = 0.0
    uh_prev: float = 0.0
    force: float | np.ndarray = 0.0
    dissipation: float = 0.0
    r_last: float | np.ndarray | None = None
    eta_max: float = -math.inf


def init_hammer_string(spec: StringSpec, hammer: HammerSpec, grid: StringGrid) -> StringState:
    """String at rest; hammer at eta = 0 moving toward the string with speed v_in."""
    z = np.zeros(grid.N + 1)
    return StringState(z, z.copy(), 1, uh=0.0, uh_prev=-spec.k * hammer.v_in)


def _string_dissipation(spec: StringSpec, grid: StringGrid, u_next, u_prev) -> float:
    if spec.sigma0 == 0.0 and spec.sigma1 == 0.0:
        return 0.0
    h, k = grid.h, spec.k
    vt = (u_next - u_prev) / (2.0 * k)
    vx = np.diff(vt) / h
    return 2.0 * spec.rho * (spec.sigma0 * h * float(vt @ vt) + spec.sigma1 * h * float(vx @ vx))


def step_hammer_string(spec: StringSpec, hammer: HammerSpec, grid: StringGrid, g: np.ndarray,
                       state: StringState) -> StringState:
    k, rho = spec.k, spec.rho
    h = grid.h
    c = k * k / (1.0 + spec.sigma0 * k)
    u, up = state.u, state.u_prev
    nu = apply_string_operator(spec, grid, u, up)
    gnorm2 = h * float(g @ g)
    m = k * k * (gnorm2 / (rho * (1.0 + spec.sigma0 * k)) + 1.0 / hammer.M)
    a = state.uh_prev - h * float(g @ up)
    b = -2.0 * (state.uh - state.uh_prev) + c * h * float(g @ nu)
    out = solve_scalar(ScalarContactEquation(m=m, a=a, b=b, potential=hammer.law.potential), guess=state.r_last)
    f = hammer.law.potential.quotient(a, out.root)
    return _advance_hammer(spec, hammer, grid, g, state, nu, f, out.root)


def step_hammer_string_nonconservative(spec: StringSpec, hammer: HammerSpec, grid: StringGrid, g: np.ndarray,
                                       state: StringState) -> StringState:
    """Explicit force f = phi'(eta^n): not energy conserving, kept for comparison."""
    nu = apply_string_operator(spec, grid, state.u, state.u_prev)
    eta = state.uh - grid.h * float(g @ state.u)
    f = hammer.law.potential.prime(eta)
    return _advance_hammer(spec, hammer, grid, g, state, nu, f, None)


def _advance_hammer(spec, hammer, grid, g, state, nu, f, r):
    k = spec.k
    c = k * k / (1.0 + spec.sigma0 * k)
    u_next = state.u_prev + c * (nu + g * (f / spec.rho))
    s = grid.free
    u_next[: s.start] = 0.0
    u_next[s.stop:] = 0.0
    uh_next = 2.0 * state.uh - state.uh_prev - k * k * f / hammer.M
    q = _string_dissipation(spec, grid, u_next, state.u_prev)
    return StringState(u_next, state.u.copy(), state.step + 1, uh_next, state.uh, f, q, r)


# -- barrier -----------------------------------------------------------------


@dataclass(frozen=True)
class BarrierSpec:
    b: np.ndarray
    law: ContactLaw

    def __post_init__(self):
        if not np.all(np.isfinite(self.b)):
            raise ConfigError("barrier profile must be finite")


def parabolic_barrier(grid: StringGrid, L: float, peak: float, drop: float) -> np.ndarray:
    """Hump b(x) = peak - drop (2x/L - 1)^2: highest at mid-string, ``drop`` lower at the ends."""
    xi = 2.0 * grid.x / L - 1.0
    return peak - drop * xi * xi


def triangle_shape(grid: StringGrid, L: float, position: float, amplitude: float) -> np.ndarray:
    """Triangle through the clamped ends with apex ``amplitude`` at ``position * L``."""
    x = grid.x / L
    u = np.where(x <= position, amplitude * x / position, amplitude * (1.0 - x) / (1.0 - position))
    u[: grid.lo] = 0.0
    u[grid.hi + 1:] = 0.0
    return u


def init_string_barrier(grid: StringGrid, u0: np.ndarray, barrier: BarrierSpec) -> StringState:
    """Zero initial velocity: u^1 = u^0; the initial shape must not touch the barrier."""
    u0 = np.asarray(u0, dtype=np.float64)
    if u0.shape != (grid.N + 1,):
        raise ConfigError("initial shape does not match the grid")
    s = grid.free
    if np.any(barrier.b[s] - u0[s] > 0.0):
        raise ConfigError("initial string shape penetrates the barrier")
    return StringState(u0.copy(), u0.copy(), 1, force=np.zeros(grid.N + 1))


def step_string_barrier(spec: StringSpec, barrier: BarrierSpec, grid: StringGrid, state: StringState) -> StringState:
    """Pointwise contact with eta = b - u; each free node solves its own scalar equation."""
    k, rho = spec.k, spec.rho
    c = k * k / (1.0 + spec.sigma0 * k)
    s = grid.free
    u, up = state.u, state.u_prev
    nu = apply_string_operator(spec, grid, u, up)
    a = barrier.b[s] - up[s]
    b = c * nu[s]
    pot = barrier.law.potential
    guess = None if state.r_last is None else state.r_last
    out = solve_scalar_array(c / rho, a, b, pot, guess=guess)
    r = out.root
    f = np.zeros(grid.N + 1)
    f[s] = pot.quotient_array(a, r)
    u_next = up + c * (nu + f / rho)
    u_next[: s.start] = 0.0
    u_next[s.stop:] = 0.0
    q = _string_dissipation(spec, grid, u_next, up)
    eta_max = max(state.eta_max, float(np.max(barrier.b[s] - u_next[s])))
    return StringState(u_next, u.copy(), state.step + 1, force=f, dissipation=q, r_last=r, eta_max=eta_max)


def penetration_bound(grid: StringGrid, law: ContactLaw, h0: float) -> float:
    """Largest penetration allowed by energy h0 at a single node."""
    pot = law.potential
    return (2.0 * (pot.alpha + 1.0) * h0 / (pot.K * grid.h)) ** (1.0 / (pot.alpha + 1.0))


# -- energy and output --------------------------------------------------------


def string_energy(spec: StringSpec, grid: StringGrid, u_next: np.ndarray, u: np.ndarray) -> float:
    """String energy between levels n (``u``) and n+1 (``u_next``), indefinite cross terms included."""
    h, k, rho = grid.h, spec.k, spec.rho
    vt = (u_next - u) / k
    kin = 0.5 * rho * h * float(vt @ vt)
    dx_n = np.diff(u) / h
    dx_n1 = np.diff(u_next) / h
    ten = 0.5 * spec.T * h * float(dx_n @ dx_n1)
    dvx = np.diff(vt) / h
    cross = -0.5 * spec.sigma1 * k * rho * h * float(dvx @ dvx)
    stiff = 0.0
    if spec.stiff:
        dxx_n = (u[2:] - 2.0 * u[1:-1] + u[:-2]) / (h * h)
        dxx_n1 = (u_next[2:] - 2.0 * u_next[1:-1] + u_next[:-2]) / (h * h)
        stiff = 0.5 * spec.EI * h * float(dxx_n @ dxx_n1)
    return kin + ten + stiff + cross


def energy_string(spec: StringSpec, grid: StringGrid, contact, state: StringState, g: np.ndarray | None = None
                  ) -> EnergyRow:
    """Ledger row at step n: string, contact partner (hammer or barrier) and boundary terms.

    ``contact`` is a :class:`HammerSpec` (then ``g`` is required) or a
    :class:`BarrierSpec`.  Clamped ends make the boundary power vanish.
    """
    hs = string_energy(spec, grid, state.u, state.u_prev)
    comps = {"string": hs}
    if isinstance(contact, HammerSpec):
        pot = contact.law.potential
        vh = (state.uh - state.uh_prev) / spec.k
        eta1 = state.uh - grid.h * float(g @ state.u)
        eta0 = state.uh_prev - grid.h * float(g @ state.u_prev)
        comps["hammer"] = 0.5 * contact.M * vh * vh
        comps["contact"] = 0.5 * (pot.phi(eta1) + pot.phi(eta0))
    elif isinstance(contact, BarrierSpec):
        pot = contact.law.potential
        s = grid.free
        phi1 = pot.phi(contact.b[s] - state.u[s])
        phi0 = pot.phi(contact.b[s] - state.u_prev[s])
        comps["contact"] = grid.h * 0.5 * float(np.sum(phi1 + phi0))
    else:
        raise TypeError("contact must be a HammerSpec or BarrierSpec")
    comps["boundary"] = 0.0
    total = math.fsum(comps.values())
    n = state.step - 1
    return EnergyRow(n, n * spec.k, comps, total, state.dissipation)


def readout(grid: StringGrid, u: np.ndarray, position: float) -> float:
    """String displacement at ``position`` (fraction of length), linearly interpolated."""
    return float(np.interp(position * grid.N * grid.h, grid.x, u))
