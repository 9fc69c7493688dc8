"""One-sided power-law contact potential and Hunt-Crossley damping.

The potential is ``phi(eta) = K [eta]_+^(alpha+1) / (alpha+1)`` where
``eta`` measures penetration (positive in contact).  Conservative schemes
never use ``phi'`` directly; they use the difference quotient

    omega(r; a) = (phi(a + r) - phi(a)) / r,

the discrete force acting between time levels n-1 and n+1 with
``a = eta^{n-1}`` and ``r = eta^{n+1} - eta^{n-1}``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

__all__ = [
    "PowerLawPotential",
    "ContactLaw",
    "phi",
    "phi_prime",
    "xi",
    "discrete_force_scalar",
    "SINGULAR_TOL",
]

# |r| below SINGULAR_TOL * max(1, |eta|) evaluates the quotient by its limit
SINGULAR_TOL = 1e-12

_GL_NODES = (0.5 - 0.5 * math.sqrt(0.6), 0.5, 0.5 + 0.5 * math.sqrt(0.6))
_GL_WEIGHTS = (5.0 / 18.0, 8.0 / 18.0, 5.0 / 18.0)


def _pos(x):
    return x if x > 0.0 else 0.0


@dataclass(frozen=True)
class PowerLawPotential:
    K: float
    alpha: float

    def __post_init__(self):
        if not self.K >= 0:
            raise ValueError(f"stiffness K must be non-negative, got {self.K}")
        # alpha = 1 (linear spring) keeps phi convex and C^1, so it is admitted
        if not self.alpha >= 1:
            raise ValueError(f"exponent alpha must be at least 1, got {self.alpha}")

    # scalar paths use math for speed inside per-step Python loops

    def phi(self, eta):
        if np.ndim(eta) == 0:
            e = _pos(float(eta))
            return self.K * e ** (self.alpha + 1.0) / (self.alpha + 1.0) if e else 0.0
        e = np.maximum(np.asarray(eta, dtype=np.float64), 0.0)
        return self.K * e ** (self.alpha + 1.0) / (self.alpha + 1.0)

    def prime(self, eta):
        if np.ndim(eta) == 0:
            e = _pos(float(eta))
            return self.K * e**self.alpha if e else 0.0
        e = np.maximum(np.asarray(eta, dtype=np.float64), 0.0)
        return self.K * e**self.alpha

    def second(self, eta):
        if np.ndim(eta) == 0:
            e = _pos(float(eta))
            return self.K * self.alpha * e ** (self.alpha - 1.0) if e else 0.0
        e = np.maximum(np.asarray(eta, dtype=np.float64), 0.0)
        return self.K * self.alpha * e ** (self.alpha - 1.0)

    # -- difference quotient and its derivative in r --------------------

    def quotient(self, a: float, r: float) -> float:
        """omega(r; a) for scalar a, r."""
        if a <= 0.0 and a + r <= 0.0:
            return 0.0
        if abs(r) < SINGULAR_TOL * max(1.0, abs(a), abs(a + r)):
            return self.prime(a + 0.5 * r)
        return (self.phi(a + r) - self.phi(a)) / r

    def quotient_slope(self, a: float, r: float) -> float:
        """d omega / d r for scalar a, r; non-negative by convexity."""
        if a <= 0.0 and a + r <= 0.0:
            return 0.0
        if a > 0.0 and abs(r) <= 1e-2 * a:
            # omega' = int_0^1 s phi''(a + s r) ds; smooth here, so Gauss is exact to O((r/a)^6)
            return sum(w * s * self.second(a + s * r) for s, w in zip(_GL_NODES, _GL_WEIGHTS))
        if r == 0.0:
            return 0.5 * self.second(a)
        # divide twice: r * r underflows for tiny steps onto the contact onset
        return (self.prime(a + r) - (self.phi(a + r) - self.phi(a)) / r) / r

    def quotient_array(self, a: np.ndarray, r: np.ndarray) -> np.ndarray:
        a = np.asarray(a, dtype=np.float64)
        r = np.asarray(r, dtype=np.float64)
        out = np.zeros(np.broadcast(a, r).shape)
        a, r = np.broadcast_arrays(a, r)
        active = (a > 0.0) | (a + r > 0.0)
        if not active.any():
            return out
        scale = np.maximum(1.0, np.maximum(np.abs(a), np.abs(a + r)))
        tiny = active & (np.abs(r) < SINGULAR_TOL * scale)
        regular = active & ~tiny
        if tiny.any():
            out[tiny] = self.prime(a[tiny] + 0.5 * r[tiny])
        if regular.any():
            ar, rr = a[regular], r[regular]
            out[regular] = (self.phi(ar + rr) - self.phi(ar)) / rr
        return out

    def quotient_slope_array(self, a: np.ndarray, r: np.ndarray) -> np.ndarray:
        a, r = np.broadcast_arrays(np.asarray(a, dtype=np.float64), np.asarray(r, dtype=np.float64))
        out = np.zeros(a.shape)
        active = (a > 0.0) | (a + r > 0.0)
        smooth = active & (a > 0.0) & (np.abs(r) <= 1e-2 * a)
        general = active & ~smooth
        if smooth.any():
            aa, rr = a[smooth], r[smooth]
            acc = np.zeros(aa.shape)
            for s, w in zip(_GL_NODES, _GL_WEIGHTS):
                acc += w * s * self.second(aa + s * rr)
            out[smooth] = acc
        if general.any():
            aa, rr = a[general], r[general]
            zero = rr == 0.0
            rs = np.where(zero, 1.0, rr)
            val = (self.prime(aa + rr) - (self.phi(aa + rr) - self.phi(aa)) / rs) / rs
            out[general] = np.where(zero, 0.5 * self.second(aa), val)
        return out


@dataclass(frozen=True)
class ContactLaw:
    """Potential plus Hunt-Crossley damping coefficient (beta = 0 is lossless)."""

    potential: PowerLawPotential
    beta: float = 0.0

    def __post_init__(self):
        if not self.beta >= 0:
            raise ValueError(f"damping beta must be non-negative, got {self.beta}")

    @classmethod
    def power_law(cls, K: float, alpha: float, beta: float = 0.0) -> "ContactLaw":
        return cls(PowerLawPotential(K, alpha), beta)

    def xi(self, eta):
        """Damping coefficient K beta [eta]_+^alpha."""
        return self.beta * self.potential.prime(eta)


def phi(p: PowerLawPotential, eta):
    return p.phi(eta)


def phi_prime(p: PowerLawPotential, eta):
    return p.prime(eta)


def xi(law: ContactLaw, eta):
    return law.xi(eta)


def discrete_force_scalar(p: PowerLawPotential, eta_next: float, eta_prev: float, eta_now=None) -> float:
    """Energy-consistent force (phi(eta_next) - phi(eta_prev)) / (eta_next - eta_prev).

    ``eta_now`` is accepted for call-site symmetry with the three-level
    scheme and is not used.
    """
    en, ep = float(eta_next), float(eta_prev)
    if en <= 0.0 and ep <= 0.0:
        return 0.0
    d = en - ep
    if abs(d) < SINGULAR_TOL * max(1.0, abs(en), abs(ep)):
        return p.prime(0.5 * (en + ep))
    return (p.phi(en) - p.phi(ep)) / d
