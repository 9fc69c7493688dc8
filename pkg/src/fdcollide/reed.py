"""Single-reed woodwind: Webster bore, lumped reed, Bernoulli flow and reed/lay collision.

The bore is described by a velocity potential ``Psi`` on ``l = 0..N`` with
``Psi_N = 0`` (no radiation).  The reed displacement ``z`` closes the
channel at ``z = -H``, where it meets the lay; ``eta = -z - H`` is the
penetration into the lay and ``[-eta]_+ = [z + H]_+`` the channel opening.

Each step solves the coupled pair (collision, Bernoulli flow) for
``r = eta^{n+1} - eta^{n-1}`` and the pressure difference across the reed.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .contact import ContactLaw
from .energy import EnergyRow
from .exceptions import ConfigError
from .solvers import ReedPairEquation, solve_reed_pair

__all__ = [
    "BoreProfile",
    "ReedSpec",
    "ReedBoreState",
    "ReedBoreModel",
    "stable_grid_spacing_bore",
    "clarinet_profile",
    "ramped_pressure",
    "init_reed_bore",
    "step_reed_bore",
    "energy_reed_bore",
]


def stable_grid_spacing_bore(c: float, k: float) -> float:
    return c * k


@dataclass(frozen=True)
class BoreProfile:
    """Cross-sections S_l sampled at x_l = l h, l = 0..N."""

    S: np.ndarray
    L: float

    def __post_init__(self):
        S = np.asarray(self.S, dtype=np.float64)
        if S.ndim != 1 or S.size < 3:
            raise ConfigError("bore profile needs at least three samples")
        if not np.all(S > 0):
            raise ConfigError("bore cross-sections must be positive")
        if not self.L > 0:
            raise ConfigError(f"bore length must be positive, got {self.L}")
        object.__setattr__(self, "S", S)

    @property
    def N(self) -> int:
        return self.S.size - 1

    @property
    def h(self) -> float:
        return self.L / self.N

    @classmethod
    def from_radii(cls, x_break, r_break, L: float, N: int) -> "BoreProfile":
        """Sample S = pi r(x)^2 with r piecewise linear through the breakpoints."""
        x = np.linspace(0.0, L, N + 1)
        r = np.interp(x, np.asarray(x_break, dtype=np.float64), np.asarray(r_break, dtype=np.float64))
        return cls(np.pi * r * r, L)


CLARINET_X = (0.0, 0.5, 0.6, 0.66)
CLARINET_R = (0.0075, 0.0075, 0.01, 0.03)


def clarinet_profile(c: float, k: float, x_break=CLARINET_X, r_break=CLARINET_R) -> BoreProfile:
    """Cylinder with a flared end, on the finest grid allowed by h >= c k."""
    L = float(x_break[-1])
    N = int(math.floor(L / stable_grid_spacing_bore(c, k)))
    return BoreProfile.from_radii(x_break, r_break, L, N)


def ramped_pressure(p_max: float, k: float, steps: int, attack: float = 0.01) -> np.ndarray:
    """Mouth pressure rising linearly from 0 to ``p_max`` over ``attack`` seconds."""
    t = np.arange(steps + 1) * k
    if attack <= 0:
        return np.full(t.shape, float(p_max))
    return p_max * np.minimum(t / attack, 1.0)


@dataclass(frozen=True)
class ReedSpec:
    M_r: float
    S_r: float
    sigma_r: float
    omega_r: float
    H: float
    w: float
    law: ContactLaw
    rho: float = 1.2
    c: float = 340.0

    def __post_init__(self):
        for name in ("M_r", "S_r", "sigma_r", "omega_r", "H", "w", "rho", "c"):
            if not getattr(self, name) > 0:
                raise ConfigError(f"reed parameter {name} must be positive, got {getattr(self, name)}")


@dataclass
class ReedBoreState:
    Psi: np.ndarray
    Psi_prev: np.ndarray
    z: float
    z_prev: float
    step: int = 1
    p_in: float = 0.0
    u_in: float = 0.0
    p_delta: float = 0.0
    p_m: float = 0.0
    dissipation: float = 0.0
    source: float = 0.0
    guess: tuple | None = None


@dataclass(frozen=True)
class ReedBoreModel:
    """Time-step-dependent constants shared by every step."""

    reed: ReedSpec
    bore: BoreProfile
    k: float
    S_bar: np.ndarray   # mu_xx S, with S_{-1} = S_0 at the mouthpiece
    S_half: np.ndarray  # mu_x+ S, l = 0..N-1
    D: float
    m: float
    g: float
    c1: float
    v1: float
    v2: float

    @classmethod
    def build(cls, reed: ReedSpec, bore: BoreProfile, k: float) -> "ReedBoreModel":
        h_min = stable_grid_spacing_bore(reed.c, k)
        if bore.h < h_min * (1.0 - 1e-12):
            raise ConfigError(f"bore grid spacing h = {bore.h:.6g} m is below the stability limit c k = {h_min:.6g} m")
        S = bore.S
        S_ext = np.concatenate([[S[0]], S, [S[-1]]])
        S_bar = 0.25 * (S_ext[2:] + 2.0 * S_ext[1:-1] + S_ext[:-2])
        S_half = 0.5 * (S[1:] + S[:-1])
        D = 1.0 + reed.sigma_r * k + 0.5 * (reed.omega_r * k) ** 2
        m = k * k / (reed.M_r * D)
        g = k * k * reed.S_r / (reed.M_r * D)
        c1 = reed.rho * k * reed.c**2 / (2.0 * S_bar[0] * bore.h)
        v1 = 2.0 * k / (c1 * reed.S_r)
        v2 = 2.0 * k * reed.w / reed.S_r * math.sqrt(2.0 / reed.rho)
        return cls(reed, bore, k, S_bar, S_half, D, m, g, c1, v1, v2)


def init_reed_bore(model: ReedBoreModel) -> ReedBoreState:
    """Everything at rest, reed at its equilibrium z = 0."""
    N = model.bore.N
    return ReedBoreState(np.zeros(N + 1), np.zeros(N + 1), 0.0, 0.0, 1)


def step_reed_bore(model: ReedBoreModel, state: ReedBoreState, p_m: float) -> ReedBoreState:
    """Advance one step under mouth pressure ``p_m`` (the value at the current step)."""
    reed, k, h = model.reed, model.k, model.bore.h
    rho, c = reed.rho, reed.c
    Psi, Psi_prev = state.Psi, state.Psi_prev
    z, zp = state.z, state.z_prev

    # mouthpiece row: p_in = c0 + c1 u_in
    c0 = (rho * k * c * c / (2.0 * model.S_bar[0])) * model.S_half[0] * (Psi[1] - Psi[0]) / (h * h) \
        + rho * (Psi[0] - Psi_prev[0]) / k

    eta_now = -z - reed.H
    a = -zp - reed.H
    b = (2.0 * z - 2.0 * zp - (reed.omega_r * k) ** 2 * zp) / model.D
    eq = ReedPairEquation(m=model.m, a=a, b=b, g=model.g, v0=-model.v1 * (p_m - c0), v1=model.v1,
                          v2=model.v2, eta_now=eta_now, potential=reed.law.potential)
    out = solve_reed_pair(eq, guess=state.guess)
    r, pd = out.root

    z_next = zp - r
    u_r = -reed.S_r * r / (2.0 * k)
    u_m = reed.w * max(-eta_now, 0.0) * math.sqrt(2.0 * abs(pd) / rho) * math.copysign(1.0, pd) if pd else 0.0
    u_in = u_m - u_r
    p_in = p_m - pd

    Psi_next = np.empty_like(Psi)
    Psi_next[0] = Psi_prev[0] + 2.0 * k * p_in / rho
    flux = model.S_half * np.diff(Psi) / h  # mu_x+ S delta_x+ Psi, l = 0..N-1
    lap = (flux[1:] - flux[:-1]) / h         # l = 1..N-1
    Psi_next[1:-1] = 2.0 * Psi[1:-1] - Psi_prev[1:-1] + (k * c) ** 2 / model.S_bar[1:-1] * lap
    Psi_next[-1] = 0.0

    vz = (z_next - zp) / (2.0 * k)
    q_r = 2.0 * reed.M_r * reed.sigma_r * vz * vz
    q_m = u_m * pd
    return ReedBoreState(Psi_next, Psi.copy(), z_next, z, state.step + 1, p_in, u_in, pd, p_m,
                         q_r + q_m, p_m * u_in, (r, pd))


def energy_reed_bore(model: ReedBoreModel, state: ReedBoreState) -> EnergyRow:
    """Ledger row between the state's two levels; dissipation and source are those of the last step."""
    reed, k, h = model.reed, model.k, model.bore.h
    rho, c = reed.rho, reed.c
    Psi, Psi_prev = state.Psi, state.Psi_prev
    vt = (Psi - Psi_prev) / k
    bore_kin = rho / (2.0 * c * c) * h * float(np.sum(model.S_bar * vt * vt))
    bore_pot = 0.5 * rho * h * float(np.sum(model.S_half * (np.diff(Psi_prev) / h) * (np.diff(Psi) / h)))
    vz = (state.z - state.z_prev) / k
    pot = reed.law.potential
    comps = {
        "bore_kinetic": bore_kin,
        "bore_potential": bore_pot,
        "reed_kinetic": 0.5 * reed.M_r * vz * vz,
        "reed_spring": 0.25 * reed.M_r * reed.omega_r**2 * (state.z**2 + state.z_prev**2),
        "contact": 0.5 * (pot.phi(-state.z - reed.H) + pot.phi(-state.z_prev - reed.H)),
    }
    n = state.step - 1
    return EnergyRow(n, n * k, comps, math.fsum(comps.values()), state.dissipation, state.source)
