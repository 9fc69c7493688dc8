"""Square membrane struck by a mallet, and a string colliding with a membrane.

The membrane obeys ``rho_m w_tt = T_m Lap w - 2 sigma_m0 rho_m w_t`` with
``w = 0`` on the boundary; it is discretized on an (N+1) x (N+1) grid
with the five-point Laplacian.  Updates take the form
``w^{n+1} = w^{n-1} + k^2 (nu + F / rho_m) / (1 + sigma_m0 k)``.

String/membrane coupling uses bilinear sampling ``B`` of the membrane at
the projected string nodes; forces are spread back with
``(h_s / h_m^2) B^T``, the exact adjoint of sampling in the grid inner
products, so the coupling does no net work.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import sparse
from scipy.linalg import cho_solve

from .contact import ContactLaw
from .energy import EnergyRow
from .exceptions import ConfigError
from .solvers import ScalarContactEquation, VectorContactEquation, solve_scalar, solve_vector, spd_factor
from .strings import StringGrid, StringSpec, apply_string_operator, make_grid, string_energy

__all__ = [
    "MembraneSpec",
    "MalletSpec",
    "StringMembraneSpec",
    "MembraneState",
    "MalletMembraneModel",
    "StringMembraneModel",
    "StringMembraneState",
    "stable_grid_spacing_membrane",
    "membrane_grid",
    "mallet_distribution",
    "bilinear_sampling",
    "init_mallet_membrane",
    "step_mallet_membrane",
    "init_string_membrane",
    "step_string_membrane",
    "membrane_energy",
    "energy_2d",
]


@dataclass(frozen=True)
class MembraneSpec:
    rho: float
    T: float
    sigma0: float
    L: float
    k: float

    def __post_init__(self):
        for name in ("rho", "T", "L", "k"):
            if not getattr(self, name) > 0:
                raise ConfigError(f"membrane {name} must be positive, got {getattr(self, name)}")
        if not self.sigma0 >= 0:
            raise ConfigError(f"membrane sigma0 must be non-negative, got {self.sigma0}")


def stable_grid_spacing_membrane(spec: MembraneSpec) -> float:
    return spec.k * math.sqrt(2.0 * spec.T / spec.rho)


def membrane_grid(spec: MembraneSpec, N: int | None = None) -> tuple[int, float]:
    """(N, h) with N = floor(L / h_min) unless a stable N is given."""
    h_min = stable_grid_spacing_membrane(spec)
    N_max = int(math.floor(spec.L / h_min))
    if N is None:
        N = N_max
    if N > N_max:
        raise ConfigError(f"membrane grid spacing h = {spec.L / N:.6g} m is below the stability limit "
                          f"h_min = {h_min:.6g} m")
    if N < 2:
        raise ConfigError("membrane grid needs at least one interior node")
    return N, spec.L / N


def _laplacian(w: np.ndarray, h: float) -> np.ndarray:
    """Five-point Laplacian on interior nodes, zero on the boundary ring."""
    out = np.zeros_like(w)
    out[1:-1, 1:-1] = (w[2:, 1:-1] + w[:-2, 1:-1] + w[1:-1, 2:] + w[1:-1, :-2] - 4.0 * w[1:-1, 1:-1]) / (h * h)
    return out


def membrane_operator(spec: MembraneSpec, h: float, w: np.ndarray, w_prev: np.ndarray) -> np.ndarray:
    """Explicit update part nu = (2/k) delta_t- w + (T/rho) Lap w, zero on the boundary."""
    nu = _laplacian(w, h) * (spec.T / spec.rho)
    nu[1:-1, 1:-1] += (2.0 / (spec.k * spec.k)) * (w[1:-1, 1:-1] - w_prev[1:-1, 1:-1])
    return nu


def membrane_energy(spec: MembraneSpec, h: float, w_next: np.ndarray, w: np.ndarray) -> float:
    """Membrane energy between levels n (``w``) and n+1 (``w_next``)."""
    vt = (w_next - w) / spec.k
    kin = 0.5 * spec.rho * h * h * float(np.sum(vt * vt))
    dx = np.sum(np.diff(w, axis=0) * np.diff(w_next, axis=0))
    dy = np.sum(np.diff(w, axis=1) * np.diff(w_next, axis=1))
    return kin + 0.5 * spec.T * float(dx + dy)


def _membrane_dissipation(spec: MembraneSpec, h: float, w_next, w_prev) -> float:
    if spec.sigma0 == 0.0:
        return 0.0
    vt = (w_next - w_prev) / (2.0 * spec.k)
    return 2.0 * spec.sigma0 * spec.rho * h * h * float(np.sum(vt * vt))


# -- mallet --------------------------------------------------------------------


@dataclass(frozen=True)
class MalletSpec:
    M: float
    x: float  # strike location, fractions of L
    y: float
    v_in: float
    law: ContactLaw
    radius: float = 0.0

    def __post_init__(self):
        if not self.M > 0:
            raise ConfigError(f"mallet mass must be positive, got {self.M}")
        if not (0.0 < self.x < 1.0 and 0.0 < self.y < 1.0):
            raise ConfigError("mallet strike location must lie inside the membrane")
        if not self.radius >= 0:
            raise ConfigError(f"mallet radius must be non-negative, got {self.radius}")


def mallet_distribution(N: int, h: float, x: float, y: float, radius: float = 0.0) -> np.ndarray:
    """g with h^2 sum g = 1: nearest interior node (1/h^2) or a raised-cosine disc of ``radius`` metres."""
    L = N * h
    g = np.zeros((N + 1, N + 1))
    if radius > 0.0:
        X, Y = np.meshgrid(np.arange(N + 1) * h, np.arange(N + 1) * h, indexing="ij")
        d = np.hypot(X - x * L, Y - y * L)
        g = np.where(d < radius, 0.5 * (1.0 + np.cos(np.pi * d / radius)), 0.0)
        if g[[0, -1], :].any() or g[:, [0, -1]].any():
            raise ConfigError("mallet contact region overlaps the fixed boundary")
    if not g.any():
        i, j = int(round(x * N)), int(round(y * N))
        if not (0 < i < N and 0 < j < N):
            raise ConfigError("mallet strike falls on the fixed boundary")
        g[i, j] = 1.0
    return g / (h * h * g.sum())


@dataclass
class MembraneState:
    w: np.ndarray
    w_prev: np.ndarray
    step: int = 1
    wh: float = 0.0
    wh_prev: float = 0.0
    force: float = 0.0
    dissipation: float = 0.0
    r_last: float | None = None


@dataclass(frozen=True)
class MalletMembraneModel:
    membrane: MembraneSpec
    mallet: MalletSpec
    N: int
    h: float
    g: np.ndarray

    @classmethod
    def build(cls, membrane: MembraneSpec, mallet: MalletSpec, N: int | None = None) -> "MalletMembraneModel":
        N, h = membrane_grid(membrane, N)
        return cls(membrane, mallet, N, h, mallet_distribution(N, h, mallet.x, mallet.y, mallet.radius))


def init_mallet_membrane(model: MalletMembraneModel) -> MembraneState:
    """Membrane at rest; mallet at eta = 0 moving down onto it with speed v_in."""
    z = np.zeros((model.N + 1, model.N + 1))
    return MembraneState(z, z.copy(), 1, wh=0.0, wh_prev=model.membrane.k * model.mallet.v_in)


def step_mallet_membrane(model: MalletMembraneModel, state: MembraneState) -> MembraneState:
    mem, mal, h, g = model.membrane, model.mallet, model.h, model.g
    k, rho = mem.k, mem.rho
    c = k * k / (1.0 + mem.sigma0 * k)
    nu = membrane_operator(mem, h, state.w, state.w_prev)
    h2 = h * h
    gnorm2 = h2 * float(np.sum(g * g))
    m = k * k * (gnorm2 / (rho * (1.0 + mem.sigma0 * k)) + 1.0 / mal.M)
    a = h2 * float(np.sum(g * state.w_prev)) - state.wh_prev
    b = 2.0 * (state.wh - state.wh_prev) - c * h2 * float(np.sum(g * nu))
    out = solve_scalar(ScalarContactEquation(m=m, a=a, b=b, potential=mal.law.potential), guess=state.r_last)
    f = mal.law.potential.quotient(a, out.root)
    w_next = state.w_prev + c * (nu - g * (f / rho))
    w_next[0, :] = w_next[-1, :] = w_next[:, 0] = w_next[:, -1] = 0.0
    wh_next = 2.0 * state.wh - state.wh_prev + k * k * f / mal.M
    q = _membrane_dissipation(mem, h, w_next, state.w_prev)
    return MembraneState(w_next, state.w.copy(), state.step + 1, wh_next, state.wh, f, q, out.root)


# -- string / membrane -------------------------------------------------------------


def bilinear_sampling(N: int, h: float, points: np.ndarray) -> sparse.csr_matrix:
    """Matrix B with (B w)_i the bilinear interpolant of w (flattened, row-major) at points[i]."""
    points = np.atleast_2d(np.asarray(points, dtype=np.float64))
    n = points.shape[0]
    fx = points[:, 0] / h
    fy = points[:, 1] / h
    i = np.clip(np.floor(fx).astype(int), 0, N - 1)
    j = np.clip(np.floor(fy).astype(int), 0, N - 1)
    ax = fx - i
    ay = fy - j
    rows = np.repeat(np.arange(n), 4)
    cols = np.stack([i * (N + 1) + j, (i + 1) * (N + 1) + j, i * (N + 1) + j + 1, (i + 1) * (N + 1) + j + 1], axis=1)
    vals = np.stack([(1 - ax) * (1 - ay), ax * (1 - ay), (1 - ax) * ay, ax * ay], axis=1)
    return sparse.csr_matrix((vals.ravel(), (rows, cols.ravel())), shape=(n, (N + 1) ** 2))


@dataclass(frozen=True)
class StringMembraneSpec:
    """String lying along a straight chord parallel to the membrane, ``gap`` below it.

    ``start`` is the membrane position (metres) of the string's first node and
    ``angle`` the chord direction in radians; the string length is
    ``string.L``.  With ``attached`` the string ends follow the membrane
    instead of being clamped (requires a non-stiff string).
    """

    string: StringSpec
    membrane: MembraneSpec
    law: ContactLaw
    start: tuple = (0.15, 0.3)
    angle: float = 0.0
    gap: float = 0.0
    attached: bool = False

    def __post_init__(self):
        if self.string.k != self.membrane.k:
            raise ConfigError("string and membrane must share the time step")
        if self.attached and self.string.stiff:
            raise ConfigError("attached string ends require a non-stiff string (E = 0)")
        if not self.gap >= 0:
            raise ConfigError(f"gap must be non-negative, got {self.gap}")


@dataclass(frozen=True)
class StringMembraneModel:
    spec: StringMembraneSpec
    sgrid: StringGrid
    N: int
    h: float
    B: sparse.csr_matrix       # samples the membrane at every string node
    contact: slice             # string nodes carrying contact
    Bc: np.ndarray             # dense rows of B for the contact nodes
    Bend: np.ndarray | None    # rows for the two string ends (attached mode)
    M: np.ndarray
    chol: tuple = field(repr=False)
    Minv: np.ndarray = field(repr=False)

    @classmethod
    def build(cls, spec: StringMembraneSpec, Ns: int | None = None, Nm: int | None = None) -> "StringMembraneModel":
        sgrid = make_grid(spec.string, Ns)
        N, h = membrane_grid(spec.membrane, Nm)
        lam = sgrid.x
        direction = np.array([math.cos(spec.angle), math.sin(spec.angle)])
        pts = np.asarray(spec.start, dtype=np.float64)[None, :] + lam[:, None] * direction[None, :]
        lo, hi = h, spec.membrane.L - h
        if np.any(pts < lo - 1e-12) or np.any(pts > hi + 1e-12):
            raise ConfigError("string projection must stay at least one membrane cell inside the boundary")
        B = bilinear_sampling(N, h, pts)
        # attached ends move with the membrane, so contact covers the interior nodes
        contact = slice(1, sgrid.N) if spec.attached else sgrid.free
        Bc = B[contact].toarray()
        Bend = B[[0, sgrid.N]].toarray() if spec.attached else None
        k = spec.string.k
        cs = k * k / (spec.string.rho * (1.0 + spec.string.sigma0 * k))
        cm = k * k / (spec.membrane.rho * (1.0 + spec.membrane.sigma0 * k))
        n = Bc.shape[0]
        M = cs * np.eye(n) + cm * (sgrid.h / (h * h)) * (Bc @ Bc.T)
        M = 0.5 * (M + M.T)
        chol = spd_factor(M)
        Minv = cho_solve(chol, np.eye(n))
        return cls(spec, sgrid, N, h, B, contact, Bc, Bend, M, chol, Minv)

    def spread(self, F: np.ndarray) -> np.ndarray:
        """Membrane force density (h_s / h_m^2) B^T F from contact-node forces."""
        return ((self.sgrid.h / (self.h * self.h)) * (self.Bc.T @ F)).reshape(self.N + 1, self.N + 1)


@dataclass
class StringMembraneState:
    u: np.ndarray
    u_prev: np.ndarray
    w: np.ndarray
    w_prev: np.ndarray
    step: int = 1
    force: np.ndarray | None = None
    dissipation: float = 0.0
    r_last: np.ndarray | None = None


def init_string_membrane(model: StringMembraneModel, u0=None, v0=None, w0=None) -> StringMembraneState:
    """Initial string shape/velocity (defaults zero) and static membrane shape ``w0``."""
    k = model.spec.string.k
    Ns, N = model.sgrid.N, model.N
    u0 = np.zeros(Ns + 1) if u0 is None else np.asarray(u0, dtype=np.float64).copy()
    v0 = np.zeros(Ns + 1) if v0 is None else np.asarray(v0, dtype=np.float64)
    w0 = np.zeros((N + 1, N + 1)) if w0 is None else np.asarray(w0, dtype=np.float64).copy()
    u1 = u0 + k * v0
    if not model.spec.attached:
        s = model.sgrid.free
        for arr in (u0, u1):
            arr[: s.start] = 0.0
            arr[s.stop:] = 0.0
    else:
        ends = model.Bend @ w0.ravel()
        for arr in (u0, u1):
            arr[[0, -1]] = ends
    for uu in (u0, u1):
        eta = uu[model.contact] - model.spec.gap - model.Bc @ w0.ravel()
        if np.any(eta > 0.0):
            raise ConfigError("initial string shape penetrates the membrane")
    return StringMembraneState(u1, u0, w0.copy(), w0.copy(), 1, np.zeros(model.Bc.shape[0]))


def _endpoint_forces(model: StringMembraneModel, u: np.ndarray, u_prev: np.ndarray) -> tuple[float, float]:
    """Forces the attached string ends exert on the membrane (upward positive)."""
    s = model.spec.string
    h, k = model.sgrid.h, s.k
    d0 = (u[1] - u[0]) / h
    d0p = (u_prev[1] - u_prev[0]) / h
    dN = (u[-1] - u[-2]) / h
    dNp = (u_prev[-1] - u_prev[-2]) / h
    f0 = s.T * d0 + 2.0 * s.sigma1 * s.rho * (d0 - d0p) / k
    fN = -(s.T * dN + 2.0 * s.sigma1 * s.rho * (dN - dNp) / k)
    return f0, fN


def _string_explicit(model: StringMembraneModel, u: np.ndarray, u_prev: np.ndarray) -> np.ndarray:
    """String nu on the updated nodes; with E = 0 these are all interior nodes in either mode."""
    return apply_string_operator(model.spec.string, model.sgrid, u, u_prev)


def step_string_membrane(model: StringMembraneModel, state: StringMembraneState) -> StringMembraneState:
    spec = model.spec
    s, mem = spec.string, spec.membrane
    k = s.k
    cs = k * k / (1.0 + s.sigma0 * k)
    cm = k * k / (1.0 + mem.sigma0 * k)
    u, up, w, wp = state.u, state.u_prev, state.w, state.w_prev
    c = model.contact

    nu_s = _string_explicit(model, u, up)
    nu_m = membrane_operator(mem, model.h, w, wp)
    if spec.attached:
        f0, fN = _endpoint_forces(model, u, up)
        ends = (model.Bend.T @ np.array([f0, fN])).reshape(model.N + 1, model.N + 1) / (model.h * model.h)
        nu_m = nu_m + ends / mem.rho

    wf = wp.ravel()
    a = up[c] - spec.gap - model.Bc @ wf
    b = -cs * nu_s[c] + cm * (model.Bc @ nu_m.ravel())
    eq = VectorContactEquation(model.M, a, b, spec.law.potential, _chol=model.chol, _inv=model.Minv)
    out = solve_vector(eq, guess=state.r_last)
    F = spec.law.potential.quotient_array(a, out.root)

    w_next = wp + cm * (nu_m + model.spread(F) / mem.rho)
    w_next[0, :] = w_next[-1, :] = w_next[:, 0] = w_next[:, -1] = 0.0
    force_s = np.zeros_like(u)
    force_s[c] = F
    u_next = up + cs * (nu_s - force_s / s.rho)
    if spec.attached:
        u_next[[0, -1]] = model.Bend @ w_next.ravel()
    else:
        fr = model.sgrid.free
        u_next[: fr.start] = 0.0
        u_next[fr.stop:] = 0.0

    q = _membrane_dissipation(mem, model.h, w_next, wp) + _string_membrane_dissipation(model, u_next, up)
    return StringMembraneState(u_next, u.copy(), w_next, w.copy(), state.step + 1, F, q, out.root)


def _string_membrane_dissipation(model, u_next, u_prev) -> float:
    s = model.spec.string
    if s.sigma0 == 0.0 and s.sigma1 == 0.0:
        return 0.0
    h, k = model.sgrid.h, s.k
    vt = (u_next - u_prev) / (2.0 * k)
    vx = np.diff(vt) / h
    inner = vt[1:-1] if model.spec.attached else vt
    return 2.0 * s.rho * (s.sigma0 * h * float(inner @ inner) + s.sigma1 * h * float(vx @ vx))


def _attached_string_energy(s: StringSpec, h: float, u_next: np.ndarray, u: np.ndarray) -> float:
    # end nodes belong to the membrane: their kinetic energy is counted there
    vt = (u_next[1:-1] - u[1:-1]) / s.k
    kin = 0.5 * s.rho * h * float(vt @ vt)
    ten = 0.5 * s.T * h * float((np.diff(u) / h) @ (np.diff(u_next) / h))
    dvx = np.diff((u_next - u) / s.k) / h
    return kin + ten - 0.5 * s.sigma1 * s.k * s.rho * h * float(dvx @ dvx)


def energy_2d(model, state) -> EnergyRow:
    """Ledger row for either 2D model (fixed membrane boundary contributes no power)."""
    if isinstance(model, MalletMembraneModel):
        mem, mal = model.membrane, model.mallet
        pot = mal.law.potential
        h2 = model.h * model.h
        eta1 = h2 * float(np.sum(model.g * state.w)) - state.wh
        eta0 = h2 * float(np.sum(model.g * state.w_prev)) - state.wh_prev
        vh = (state.wh - state.wh_prev) / mem.k
        comps = {
            "membrane": membrane_energy(mem, model.h, state.w, state.w_prev),
            "mallet": 0.5 * mal.M * vh * vh,
            "contact": 0.5 * (pot.phi(eta1) + pot.phi(eta0)),
        }
        k = mem.k
    elif isinstance(model, StringMembraneModel):
        spec = model.spec
        pot = spec.law.potential
        c = model.contact
        eta1 = state.u[c] - spec.gap - model.Bc @ state.w.ravel()
        eta0 = state.u_prev[c] - spec.gap - model.Bc @ state.w_prev.ravel()
        if spec.attached:
            hs = _attached_string_energy(spec.string, model.sgrid.h, state.u, state.u_prev)
        else:
            hs = string_energy(spec.string, model.sgrid, state.u, state.u_prev)
        comps = {
            "membrane": membrane_energy(spec.membrane, model.h, state.w, state.w_prev),
            "string": hs,
            "contact": model.sgrid.h * 0.5 * float(np.sum(pot.phi(eta1) + pot.phi(eta0))),
        }
        k = spec.string.k
    else:
        raise TypeError("unsupported model")
    comps["boundary"] = 0.0
    n = state.step - 1
    return EnergyRow(n, n * k, comps, math.fsum(comps.values()), state.dissipation)
