"""Nonlinear update equations for the collision schemes.

Every conservative collision update reduces to one of three problems:

* scalar:  G(r) = (1 + c) r + m omega(r; a) + b = 0
* reed:    G(r) - g p = 0 together with r = R(p)  (Bernoulli flow + collision)
* vector:  r + M omega(r; a) + b = 0 with M symmetric positive definite

``omega`` is the difference quotient of the contact potential (see
:mod:`fdcollide.contact`).  All three have unique solutions because
``omega`` is non-decreasing in ``r``; the solvers exploit that with
bracketed (safeguarded) Newton iterations.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import LinAlgError, cho_factor, cho_solve

from .contact import PowerLawPotential
from .exceptions import ConfigError, SolverError

__all__ = [
    "NewtonOutcome",
    "ScalarContactEquation",
    "ReedPairEquation",
    "VectorContactEquation",
    "solve_scalar",
    "solve_scalar_array",
    "solve_reed_pair",
    "solve_vector",
    "bisection_oracle",
    "MAX_ITER",
]

MAX_ITER = 50
SCALAR_TOL = 1e-13
SYSTEM_TOL = 1e-12
_EPS = np.finfo(float).eps


@dataclass
class NewtonOutcome:
    root: float | tuple | np.ndarray
    iterations: int
    residual: float
    safeguarded: bool = False


@dataclass(frozen=True)
class ScalarContactEquation:
    m: float
    a: float
    b: float
    potential: PowerLawPotential
    c: float = 0.0

    def __post_init__(self):
        if not self.m > 0:
            raise ValueError(f"m must be positive, got {self.m}")
        if not self.c >= 0:
            raise ValueError(f"loss coefficient c must be non-negative, got {self.c}")

    def G(self, r: float) -> float:
        return (1.0 + self.c) * r + self.m * self.potential.quotient(self.a, r) + self.b

    def dG(self, r: float) -> float:
        return (1.0 + self.c) + self.m * self.potential.quotient_slope(self.a, r)

    def bracket(self) -> tuple[float, float]:
        """Interval known to contain the root, from omega >= 0 and convexity."""
        cp = 1.0 + self.c
        hi = -self.b / cp
        lo = min(0.0, -(self.b + self.m * self.potential.prime(self.a)) / cp)
        return min(lo, hi), hi


def solve_scalar(
    eq: ScalarContactEquation,
    guess: float | None = None,
    *,
    safeguard: bool = True,
    max_iter: int = MAX_ITER,
) -> NewtonOutcome:
    """Newton iteration for the scalar contact equation.

    With ``safeguard`` (the default) iterates stay inside a bracket and a
    step leaving it is replaced by bisection; after ``max_iter`` Newton
    steps the solve finishes by bisection alone.
    """
    lo, hi = eq.bracket()
    r_lin = hi
    if eq.a <= 0.0 and eq.a + r_lin <= 0.0:
        return NewtonOutcome(r_lin, 0, abs(eq.G(r_lin)))

    r = r_lin if guess is None else float(guess)
    if safeguard and not lo <= r <= hi:
        r = min(max(r, lo), hi)
    used_bisection = False
    converged = False
    it = 0
    while it < max_iter:
        it += 1
        g = eq.G(r)
        if g == 0.0:
            converged = True
            break
        if g > 0.0:
            hi = min(hi, r)
        else:
            lo = max(lo, r)
        step = g / eq.dG(r)
        r_new = r - step
        if safeguard and not lo < r_new < hi:
            r_new = 0.5 * (lo + hi)
            used_bisection = True
        if abs(r_new - r) <= 2.0 * _EPS * max(abs(r), abs(r_new)) or hi - lo <= 2.0 * _EPS * max(abs(lo), abs(hi)):
            r = r_new
            converged = True
            break
        r = r_new
    if not converged:
        if not safeguard:
            raise SolverError(f"Newton did not converge in {max_iter} iterations (unsafeguarded)")
        r = _bisect(eq.G, lo, hi)
        used_bisection = True
    residual = abs(eq.G(r))
    if residual > SCALAR_TOL * max(1.0, abs(eq.b)):
        raise SolverError(f"scalar contact solve left residual {residual:.3e}")
    return NewtonOutcome(r, it, residual, used_bisection)


def _bisect(f, lo, hi, max_iter=2000):
    flo = f(lo)
    for _ in range(max_iter):
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:
            break
        fm = f(mid)
        if fm == 0.0:
            return mid
        if (fm > 0.0) == (flo > 0.0):
            lo, flo = mid, fm
        else:
            hi = mid
    return 0.5 * (lo + hi)


def bisection_oracle(G, bracket: tuple[float, float], xtol: float = 0.0) -> float:
    """Root of ``G`` on ``bracket`` by plain bisection (test oracle only).

    Runs until the interval is narrower than ``xtol`` or cannot be split
    further in floating point.
    """
    lo, hi = map(float, bracket)
    glo, ghi = G(lo), G(hi)
    if glo == 0.0:
        return lo
    if ghi == 0.0:
        return hi
    if (glo > 0.0) == (ghi > 0.0):
        raise ValueError("bisection bracket has no sign change")
    while hi - lo > xtol:
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:
            break
        gm = G(mid)
        if gm == 0.0:
            return mid
        if (gm > 0.0) == (glo > 0.0):
            lo, glo = mid, gm
        else:
            hi = mid
    return 0.5 * (lo + hi)


def solve_scalar_array(
    m,
    a: np.ndarray,
    b: np.ndarray,
    potential: PowerLawPotential,
    c=0.0,
    guess: np.ndarray | None = None,
    max_iter: int = MAX_ITER,
) -> NewtonOutcome:
    """Elementwise safeguarded Newton for many uncoupled scalar equations.

    Same algorithm as :func:`solve_scalar`, applied to each entry; used for
    pointwise barrier contact where every grid node carries its own
    equation.  ``root`` is an array, ``residual`` the largest entry residual.
    """
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    m = np.broadcast_to(np.asarray(m, dtype=np.float64), a.shape)
    cp = 1.0 + np.broadcast_to(np.asarray(c, dtype=np.float64), a.shape)
    r = -b / cp
    active = (a > 0.0) | (a + r > 0.0)
    if not active.any():
        return NewtonOutcome(r, 0, 0.0)

    idx = np.flatnonzero(active)
    aa, bb, mm, cc = a[idx], b[idx], m[idx], cp[idx]
    hi = -bb / cc
    lo = np.minimum(0.0, -(bb + mm * potential.prime(aa)) / cc)
    lo = np.minimum(lo, hi)
    x = hi.copy() if guess is None else np.clip(np.asarray(guess, dtype=np.float64)[idx], lo, hi)

    def G(x_, sel=slice(None)):
        return cc[sel] * x_ + mm[sel] * potential.quotient_array(aa[sel], x_) + bb[sel]

    todo = np.ones(idx.size, dtype=bool)
    used_bisection = False
    it = 0
    while todo.any() and it < max_iter:
        it += 1
        t = np.flatnonzero(todo)
        xt = x[t]
        g = G(xt, t)
        pos = g > 0.0
        hi[t] = np.where(pos, np.minimum(hi[t], xt), hi[t])
        lo[t] = np.where(~pos, np.maximum(lo[t], xt), lo[t])
        d = cc[t] + mm[t] * potential.quotient_slope_array(aa[t], xt)
        x_new = xt - g / d
        outside = ~((lo[t] < x_new) & (x_new < hi[t])) & (g != 0.0)
        if outside.any():
            used_bisection = True
            x_new = np.where(outside, 0.5 * (lo[t] + hi[t]), x_new)
        done = (
            (g == 0.0)
            | (np.abs(x_new - xt) <= 2.0 * _EPS * np.maximum(np.abs(xt), np.abs(x_new)))
            | (hi[t] - lo[t] <= 2.0 * _EPS * np.maximum(np.abs(lo[t]), np.abs(hi[t])))
        )
        x[t] = np.where(g == 0.0, xt, x_new)
        todo[t[done]] = False
    if todo.any():
        used_bisection = True
        for j in np.flatnonzero(todo):
            x[j] = _bisect(lambda v, j=j: G(np.array([v]), [j])[0], lo[j], hi[j])
    r = r.copy()
    r[idx] = x
    residual = float(np.max(np.abs(G(x))))
    if residual > SCALAR_TOL * max(1.0, float(np.max(np.abs(bb)))):
        raise SolverError(f"pointwise contact solve left residual {residual:.3e}")
    return NewtonOutcome(r, it, residual, used_bisection)


@dataclass(frozen=True)
class ReedPairEquation:
    """Coupled collision/Bernoulli-flow equations for the beating reed.

    Unknowns are ``r`` (change in lay penetration over two steps) and the
    pressure difference ``p`` across the reed::

        G(r) - g p = 0
        r - R(p)   = 0,   R(p) = -v0 - v1 p - v2 [-eta_now]_+ sqrt|p| sign(p)
    """

    m: float
    a: float
    b: float
    g: float
    v0: float
    v1: float
    v2: float
    eta_now: float
    potential: PowerLawPotential

    def __post_init__(self):
        if not self.m > 0:
            raise ValueError(f"m must be positive, got {self.m}")
        if not self.g > 0:
            raise ValueError(f"coupling g must be positive, got {self.g}")
        if not self.v1 > 0:
            raise ValueError(f"v1 must be positive, got {self.v1}")
        if not self.v2 >= 0:
            raise ValueError(f"v2 must be non-negative, got {self.v2}")

    @property
    def opening_coefficient(self) -> float:
        return self.v2 * max(-self.eta_now, 0.0)

    def G(self, r: float) -> float:
        return r + self.m * self.potential.quotient(self.a, r) + self.b

    def R(self, p: float) -> float:
        return -self.v0 - self.v1 * p - self.opening_coefficient * math.copysign(math.sqrt(abs(p)), p)

    def residuals(self, r: float, p: float) -> tuple[float, float]:
        return self.G(r) - self.g * p, r - self.R(p)


def solve_reed_pair(eq: ReedPairEquation, guess: tuple[float, float] | None = None) -> NewtonOutcome:
    """Solve the reed pair; ``root`` is ``(r, p)``.

    ``r`` is eliminated through the explicit relation ``r = R(p)``, leaving a
    strictly decreasing scalar function of the pressure variable, solved by
    bracketed Newton.  When the reed channel is open the variable is
    ``s = sign(p) sqrt|p|``, which removes the square-root singularity at
    ``p = 0``; when it is closed ``R`` is affine and ``p`` itself is used.
    """
    v2e = eq.opening_coefficient
    pot, a, m, b, g = eq.potential, eq.a, eq.m, eq.b, eq.g
    v0, v1 = eq.v0, eq.v1

    if v2e > 0.0:
        def to_p(s):
            return s * abs(s)

        def from_p(p):
            return math.copysign(math.sqrt(abs(p)), p)

        def R(s):
            return -v0 - v1 * s * abs(s) - v2e * s

        def dR(s):
            return -2.0 * v1 * abs(s) - v2e
    else:
        def to_p(s):
            return s

        def from_p(p):
            return p

        def R(s):
            return -v0 - v1 * s

        def dR(s):
            return -v1

    def H(s):
        r = R(s)
        return r + m * pot.quotient(a, r) + b - g * to_p(s)

    def dH(s):
        r = R(s)
        return (1.0 + m * pot.quotient_slope(a, r)) * dR(s) - g * (2.0 * abs(s) if v2e > 0.0 else 1.0)

    s = from_p(guess[1]) if guess is not None else 0.0
    hs = H(s)
    if hs == 0.0:
        return _reed_outcome(eq, R(s), to_p(s), 0, False)

    # H is strictly decreasing: expand until the sign flips
    step = max(1.0, abs(s))
    if hs > 0.0:
        lo, hi = s, s + step
        while H(hi) > 0.0:
            lo, step = hi, 2.0 * step
            hi = hi + step
    else:
        lo, hi = s - step, s
        while H(lo) < 0.0:
            hi, step = lo, 2.0 * step
            lo = lo - step

    used_bisection = False
    converged = False
    it = 0
    while it < MAX_ITER:
        it += 1
        h = H(s)
        if h == 0.0:
            converged = True
            break
        if h > 0.0:
            lo = max(lo, s)
        else:
            hi = min(hi, s)
        s_new = s - h / dH(s)
        if not lo < s_new < hi:
            s_new = 0.5 * (lo + hi)
            used_bisection = True
        if abs(s_new - s) <= 2.0 * _EPS * max(abs(s), abs(s_new)) or hi - lo <= 2.0 * _EPS * max(abs(lo), abs(hi)):
            s = s_new
            converged = True
            break
        s = s_new
    if not converged:
        # damped retry: halve until H changes sign inside the bracket
        used_bisection = True
        s = _bisect(lambda v: -H(v), lo, hi)
    return _reed_outcome(eq, R(s), to_p(s), it, used_bisection)


def _reed_outcome(eq, r, p, it, safeguarded):
    f1, f2 = eq.residuals(r, p)
    residual = max(abs(f1), abs(f2))
    # r inherits the rounding of R(p), which G amplifies by G'(r)
    r_scale = abs(eq.v0) + abs(eq.v1 * p) + eq.opening_coefficient * math.sqrt(abs(p))
    slope = 1.0 + eq.m * eq.potential.quotient_slope(eq.a, r)
    tol1 = SYSTEM_TOL * max(1.0, abs(eq.b), abs(eq.g * p)) + 8.0 * _EPS * slope * r_scale
    tol2 = SYSTEM_TOL * max(1.0, r_scale)
    if abs(f1) > tol1 or abs(f2) > tol2:
        raise SolverError(f"reed pair solve left residuals {f1:.3e}, {f2:.3e}")
    return NewtonOutcome((r, p), it, residual, safeguarded)


@dataclass
class VectorContactEquation:
    """Coupled contact system r + M omega(r) + b = 0 with M SPD."""

    M: np.ndarray
    a: np.ndarray
    b: np.ndarray
    potential: PowerLawPotential
    _chol: tuple | None = field(default=None, repr=False)
    _inv: np.ndarray | None = field(default=None, repr=False)

    def __post_init__(self):
        self.M = np.asarray(self.M, dtype=np.float64)
        self.a = np.asarray(self.a, dtype=np.float64)
        self.b = np.asarray(self.b, dtype=np.float64)
        n = self.a.size
        if self.M.shape != (n, n) or self.b.shape != (n,):
            raise ValueError("M must be n x n with a, b of length n")

    def factor(self):
        if self._chol is None:
            self._chol = spd_factor(self.M)
        return self._chol

    def inverse(self) -> np.ndarray:
        if self._inv is None:
            self._inv = cho_solve(self.factor(), np.eye(self.a.size))
        return self._inv

    def G(self, r: np.ndarray) -> np.ndarray:
        return r + self.M @ self.potential.quotient_array(self.a, r) + self.b


def spd_factor(M: np.ndarray):
    """Cholesky factor of M, raising ConfigError when M is not SPD."""
    if not np.allclose(M, M.T, rtol=1e-12, atol=0.0):
        raise ConfigError("coupling matrix is not symmetric")
    try:
        return cho_factor(M, lower=True)
    except LinAlgError as exc:
        raise ConfigError(f"coupling matrix is not positive definite: {exc}") from None


def solve_vector(eq: VectorContactEquation, guess: np.ndarray | None = None) -> NewtonOutcome:
    """Damped Newton on M^{-1} r + omega(r) + M^{-1} b = 0.

    The Jacobian ``M^{-1} + diag(omega')`` is SPD, so the Newton direction
    decreases any fixed row-weighted 2-norm of the residual.  Rows are
    weighted by the size of their own terms and steps are halved while that
    norm fails to drop; convergence is judged row by row, so a large row
    never sets the tolerance for a small one.
    """
    a, b, pot = eq.a, eq.b, eq.potential
    r_lin = -b
    if not np.any((a > 0.0) | (a + r_lin > 0.0)):
        return NewtonOutcome(r_lin, 0, 0.0)

    chol = eq.factor()
    n = a.size
    Minv_b = cho_solve(chol, b)
    scale = max(1.0, float(np.max(np.abs(Minv_b))))
    Minv = eq.inverse()
    abs_Minv = np.abs(Minv)

    def Ghat(r):
        w = pot.quotient_array(a, r)
        return Minv @ r + w + Minv_b, abs_Minv @ np.abs(r) + np.abs(w) + np.abs(Minv_b)

    r = r_lin.copy() if guess is None else np.asarray(guess, dtype=np.float64).copy()
    gh, terms = Ghat(r)
    damped = False
    it = 0
    while it < MAX_ITER:
        if np.all(np.abs(gh) <= 4.0 * _EPS * terms):
            break
        it += 1
        J = Minv.copy()
        J[np.diag_indices(n)] += pot.quotient_slope_array(a, r)
        dr = -cho_solve(cho_factor(J, lower=True), gh)
        weight = 1.0 / np.maximum(terms, np.finfo(float).tiny)
        merit = float(np.sum((weight * gh) ** 2))
        t = 1.0
        for _ in range(40):
            r_try = r + t * dr
            gh_try, terms_try = Ghat(r_try)
            if float(np.sum((weight * gh_try) ** 2)) < merit or np.all(np.abs(gh_try) <= 4.0 * _EPS * terms_try):
                break
            t *= 0.5
            damped = True
        else:
            break  # no representable decrease left: round-off floor
        step = np.abs(r_try - r)
        r, gh, terms = r_try, gh_try, terms_try
        if np.all(step <= 2.0 * _EPS * np.abs(r)):
            break
    else:
        raise SolverError(f"vector contact solve did not converge in {MAX_ITER} iterations")
    norm = float(np.max(np.abs(gh)))
    if norm > SYSTEM_TOL * scale:
        raise SolverError(f"vector contact solve left residual {norm:.3e}")
    return NewtonOutcome(r, it, norm, damped)
