"""Mass colliding with a rigid barrier at u = 0, with optional Hunt-Crossley loss.

The mass obeys ``M u'' = -phi'(u) - u' xi(u)``; the barrier occupies
``u > 0``.  The update solves the scalar equation
``(1 + c) r + m omega(r; u^{n-1}) + b = 0`` for ``r = u^{n+1} - u^{n-1}``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .contact import ContactLaw
from .energy import EnergyLedger, EnergyRow, record
from .exceptions import ConfigError
from .solvers import ScalarContactEquation, solve_scalar

__all__ = ["LumpedSpec", "LumpedState", "LumpedRun", "init_lumped", "step_lumped", "energy_lumped",
           "lumped_bounds", "simulate_lumped"]


@dataclass(frozen=True)
class LumpedSpec:
    M: float
    u0: float
    v0: float
    law: ContactLaw
    k: float
    steps: int

    def __post_init__(self):
        if not self.M > 0:
            raise ConfigError(f"mass M must be positive, got {self.M}")
        if not self.k > 0:
            raise ConfigError(f"time step k must be positive, got {self.k}")
        if self.steps < 0:
            raise ConfigError(f"steps must be non-negative, got {self.steps}")


@dataclass(frozen=True)
class LumpedState:
    u_now: float
    u_prev: float
    step: int = 1
    force: float = 0.0        # discrete force applied in the step that produced this state
    dissipation: float = 0.0  # q^n for that step
    r_last: float | None = None


def init_lumped(spec: LumpedSpec) -> LumpedState:
    """Two-level start u^0 = u0, u^1 = u0 + k v0; contact must be inactive."""
    u1 = spec.u0 + spec.k * spec.v0
    if spec.u0 > 0 or u1 > 0:
        raise ConfigError("the mass must start out of contact (u0 <= 0 and u0 + k v0 <= 0)")
    return LumpedState(u_now=u1, u_prev=spec.u0, step=1)


def step_lumped(spec: LumpedSpec, state: LumpedState) -> LumpedState:
    k, M, law = spec.k, spec.M, spec.law
    u, up = state.u_now, state.u_prev
    c = k * law.xi(u) / (2.0 * M)
    eq = ScalarContactEquation(m=k * k / M, a=up, b=-2.0 * u + 2.0 * up, c=c, potential=law.potential)
    out = solve_scalar(eq, guess=state.r_last)
    r = out.root
    u_next = up + r
    force = law.potential.quotient(up, r)
    vel = r / (2.0 * k)
    return LumpedState(u_next, u, state.step + 1, force, vel * vel * law.xi(u), r)


def energy_lumped(spec: LumpedSpec, state: LumpedState) -> tuple[float, float]:
    """(h, q): energy between the state's two levels and the last step's dissipated power."""
    pot = spec.law.potential
    v = (state.u_now - state.u_prev) / spec.k
    kinetic = 0.5 * spec.M * v * v
    potential = 0.5 * (pot.phi(state.u_now) + pot.phi(state.u_prev))
    return kinetic + potential, state.dissipation


def energy_row(spec: LumpedSpec, state: LumpedState) -> EnergyRow:
    pot = spec.law.potential
    v = (state.u_now - state.u_prev) / spec.k
    comps = {"kinetic": 0.5 * spec.M * v * v, "potential": 0.5 * (pot.phi(state.u_now) + pot.phi(state.u_prev))}
    return EnergyRow(state.step - 1, (state.step - 1) * spec.k, comps, comps["kinetic"] + comps["potential"],
                     state.dissipation)


def lumped_bounds(spec: LumpedSpec, h: float) -> tuple[float, float]:
    """Bounds on |velocity| and on penetration implied by energy h."""
    pot = spec.law.potential
    vmax = math.sqrt(2.0 * h / spec.M)
    umax = (2.0 * (pot.alpha + 1.0) * h / pot.K) ** (1.0 / (pot.alpha + 1.0)) if pot.K > 0 else math.inf
    return vmax, umax


@dataclass
class LumpedRun:
    u: np.ndarray       # u^0 .. u^steps
    force: np.ndarray   # discrete force at steps 1 .. steps-1 (index n-1)
    ledger: EnergyLedger

    @property
    def velocity(self) -> np.ndarray:
        return np.diff(self.u) / self.ledger.k


def simulate_lumped(spec: LumpedSpec) -> LumpedRun:
    """Run ``spec.steps`` steps from the two-level start; returns trajectory, force and ledger."""
    state = init_lumped(spec)
    u = [spec.u0, state.u_now]
    force = []
    ledger = EnergyLedger(spec.k)
    record(ledger, energy_row(spec, state))
    for _ in range(spec.steps - 1):
        state = step_lumped(spec, state)
        u.append(state.u_now)
        force.append(state.force)
        record(ledger, energy_row(spec, state))
    return LumpedRun(np.array(u), np.array(force), ledger)

