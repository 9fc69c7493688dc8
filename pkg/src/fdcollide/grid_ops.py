"""Time and space difference operators on uniform grids.

Spatial operators act on :class:`GridFunction1D` / :class:`GridFunction2D`
and return a grid function of the same shape.  Entries where the stencil is
not fully supported by the stored nodes are set to NaN; boundary conditions
are the business of the model code, which substitutes fixed or ghost values
explicitly.  Inner products take a domain selector naming which nodes are
summed:

======== ==========================================
1D       nodes
======== ==========================================
full     l = 0..N
lower    l = 0..N-1
interior l = 1..N-1
======== ==========================================

In 2D the selectors are ``full``, ``x_lower`` (l = 0..N-1, all m),
``y_lower`` (all l, m = 0..N-1) and ``interior``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = [
    "GridFunction1D",
    "GridFunction2D",
    "TimePair",
    "delta_t_forward",
    "delta_t_backward",
    "delta_t_centered",
    "delta_tt",
    "mu_t_forward",
    "mu_t_backward",
    "mu_t_centered",
    "delta_x_forward",
    "delta_x_backward",
    "delta_x_centered",
    "delta_xx",
    "delta_xxxx",
    "delta_x_forward_2d",
    "delta_y_forward",
    "delta_xx_2d",
    "delta_yy",
    "laplacian_2d",
    "inner_product_1d",
    "norm_1d",
    "inner_product_2d",
    "norm_2d",
    "sbp_residual_1d",
    "sbp_residual_2d",
]


@dataclass(frozen=True)
class GridFunction1D:
    """Values at nodes ``l = 0..N`` of a uniform grid with spacing ``h``."""

    values: np.ndarray
    h: float

    def __post_init__(self):
        values = np.asarray(self.values, dtype=np.float64)
        if values.ndim != 1 or values.size < 2:
            raise ValueError("1D grid function needs at least two nodes")
        if not self.h > 0:
            raise ValueError(f"grid spacing must be positive, got {self.h}")
        object.__setattr__(self, "values", values)

    @property
    def N(self) -> int:
        return self.values.size - 1

    def like(self, values) -> "GridFunction1D":
        return GridFunction1D(values, self.h)


@dataclass(frozen=True)
class GridFunction2D:
    """Values at nodes ``(l, m)`` in ``0..N x 0..N``; axis 0 is x, axis 1 is y."""

    values: np.ndarray
    h: float

    def __post_init__(self):
        values = np.asarray(self.values, dtype=np.float64)
        if values.ndim != 2 or values.shape[0] != values.shape[1]:
            raise ValueError(f"2D grid function must be square, got shape {values.shape}")
        if values.shape[0] < 2:
            raise ValueError("2D grid function needs at least two nodes per axis")
        if not self.h > 0:
            raise ValueError(f"grid spacing must be positive, got {self.h}")
        object.__setattr__(self, "values", values)

    @property
    def N(self) -> int:
        return self.values.shape[0] - 1

    def like(self, values) -> "GridFunction2D":
        return GridFunction2D(values, self.h)


@dataclass(frozen=True)
class TimePair:
    """Two consecutive time levels of a scalar or grid-valued series."""

    current: np.ndarray | float
    previous: np.ndarray | float
    k: float

    def __post_init__(self):
        _check_shapes(self.current, self.previous)
        if not self.k > 0:
            raise ValueError(f"time step must be positive, got {self.k}")


def _check_shapes(*arrays):
    shapes = {np.shape(a) for a in arrays}
    if len(shapes) != 1:
        raise ValueError(f"shape mismatch between time levels: {sorted(shapes)}")


def _asarray(u):
    if isinstance(u, (GridFunction1D, GridFunction2D)):
        return u.values
    return np.asarray(u, dtype=np.float64) if np.ndim(u) else float(u)


# -- time operators ---------------------------------------------------------

def delta_t_forward(u_next, u_now, k):
    _check_shapes(u_next, u_now)
    return (_asarray(u_next) - _asarray(u_now)) / k


def delta_t_backward(u_now, u_prev, k):
    _check_shapes(u_now, u_prev)
    return (_asarray(u_now) - _asarray(u_prev)) / k


def delta_t_centered(u_next, u_prev, k):
    _check_shapes(u_next, u_prev)
    return (_asarray(u_next) - _asarray(u_prev)) / (2.0 * k)


def delta_tt(u_next, u_now, u_prev, k):
    _check_shapes(u_next, u_now, u_prev)
    return (_asarray(u_next) - 2.0 * _asarray(u_now) + _asarray(u_prev)) / (k * k)


def mu_t_forward(u_next, u_now):
    _check_shapes(u_next, u_now)
    return 0.5 * (_asarray(u_next) + _asarray(u_now))


def mu_t_backward(u_now, u_prev):
    _check_shapes(u_now, u_prev)
    return 0.5 * (_asarray(u_now) + _asarray(u_prev))


def mu_t_centered(u_next, u_prev):
    _check_shapes(u_next, u_prev)
    return 0.5 * (_asarray(u_next) + _asarray(u_prev))


# -- 1D spatial operators ---------------------------------------------------

def _require_nodes(g, n):
    if g.N < n:
        raise ValueError(f"operator needs N >= {n}, grid has N = {g.N}")


def delta_x_forward(g: GridFunction1D) -> GridFunction1D:
    _require_nodes(g, 1)
    out = np.full_like(g.values, np.nan)
    out[:-1] = (g.values[1:] - g.values[:-1]) / g.h
    return g.like(out)


def delta_x_backward(g: GridFunction1D) -> GridFunction1D:
    _require_nodes(g, 1)
    out = np.full_like(g.values, np.nan)
    out[1:] = (g.values[1:] - g.values[:-1]) / g.h
    return g.like(out)


def delta_x_centered(g: GridFunction1D) -> GridFunction1D:
    _require_nodes(g, 2)
    out = np.full_like(g.values, np.nan)
    out[1:-1] = (g.values[2:] - g.values[:-2]) / (2.0 * g.h)
    return g.like(out)


def delta_xx(g: GridFunction1D) -> GridFunction1D:
    _require_nodes(g, 2)
    u = g.values
    out = np.full_like(u, np.nan)
    out[1:-1] = (u[2:] - 2.0 * u[1:-1] + u[:-2]) / g.h**2
    return g.like(out)


def delta_xxxx(g: GridFunction1D) -> GridFunction1D:
    _require_nodes(g, 4)
    u = g.values
    out = np.full_like(u, np.nan)
    out[2:-2] = (u[4:] - 4.0 * u[3:-1] + 6.0 * u[2:-2] - 4.0 * u[1:-3] + u[:-4]) / g.h**4
    return g.like(out)


# -- 2D spatial operators ---------------------------------------------------

def delta_x_forward_2d(g: GridFunction2D) -> GridFunction2D:
    out = np.full_like(g.values, np.nan)
    out[:-1, :] = (g.values[1:, :] - g.values[:-1, :]) / g.h
    return g.like(out)


def delta_y_forward(g: GridFunction2D) -> GridFunction2D:
    out = np.full_like(g.values, np.nan)
    out[:, :-1] = (g.values[:, 1:] - g.values[:, :-1]) / g.h
    return g.like(out)


def delta_xx_2d(g: GridFunction2D) -> GridFunction2D:
    u = g.values
    out = np.full_like(u, np.nan)
    out[1:-1, :] = (u[2:, :] - 2.0 * u[1:-1, :] + u[:-2, :]) / g.h**2
    return g.like(out)


def delta_yy(g: GridFunction2D) -> GridFunction2D:
    u = g.values
    out = np.full_like(u, np.nan)
    out[:, 1:-1] = (u[:, 2:] - 2.0 * u[:, 1:-1] + u[:, :-2]) / g.h**2
    return g.like(out)


def laplacian_2d(g: GridFunction2D) -> GridFunction2D:
    """Five-point Laplacian, valid on the interior nodes."""
    u = g.values
    out = np.full_like(u, np.nan)
    out[1:-1, 1:-1] = (
        u[2:, 1:-1] + u[:-2, 1:-1] + u[1:-1, 2:] + u[1:-1, :-2] - 4.0 * u[1:-1, 1:-1]
    ) / g.h**2
    return g.like(out)


# -- inner products ---------------------------------------------------------

_SLICES_1D = {
    "full": slice(None),
    "lower": slice(None, -1),
    "interior": slice(1, -1),
}

_SLICES_2D = {
    "full": (slice(None), slice(None)),
    "x_lower": (slice(None, -1), slice(None)),
    "y_lower": (slice(None), slice(None, -1)),
    "interior": (slice(1, -1), slice(1, -1)),
}


def _domain(table, domain):
    try:
        return table[domain]
    except KeyError:
        raise ValueError(f"unknown domain {domain!r}; expected one of {sorted(table)}") from None


def inner_product_1d(a: GridFunction1D, b: GridFunction1D, domain: str = "full") -> float:
    if a.N != b.N or a.h != b.h:
        raise ValueError("inner product of grid functions on different grids")
    sl = _domain(_SLICES_1D, domain)
    return float(a.h * np.sum(a.values[sl] * b.values[sl]))


def norm_1d(a: GridFunction1D, domain: str = "full") -> float:
    return float(np.sqrt(inner_product_1d(a, a, domain)))


def inner_product_2d(a: GridFunction2D, b: GridFunction2D, domain: str = "full") -> float:
    if a.N != b.N or a.h != b.h:
        raise ValueError("inner product of grid functions on different grids")
    sl = _domain(_SLICES_2D, domain)
    return float(a.h * a.h * np.sum(a.values[sl] * b.values[sl]))


def norm_2d(a: GridFunction2D, domain: str = "full") -> float:
    return float(np.sqrt(inner_product_2d(a, a, domain)))


# -- summation by parts -----------------------------------------------------

def sbp_residual_1d(a, b, h: float) -> tuple[float, float]:
    """Residuals of the two 1D summation-by-parts identities.

    ``a`` holds nodes 0..N.  ``b`` holds nodes -2..N+2, i.e. two ghost values
    at each end, so that ``delta_xx b`` and ``delta_xxxx b`` exist on all of
    0..N and the boundary terms can be formed.  Returns
    ``(|lhs - rhs|)`` for the second- and fourth-difference forms.
    """
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    N = a.size - 1
    if b.size != N + 5:
        raise ValueError("b must carry two ghost nodes at each end (len(a) + 4 values)")

    # b_ext index j corresponds to node l = j - 2
    dxx_b = (b[2:] - 2.0 * b[1:-1] + b[:-2]) / h**2          # nodes -1..N+1
    dxx_b_nodes = dxx_b[1:-1]                                 # nodes 0..N
    dxxxx_b = (dxx_b[2:] - 2.0 * dxx_b[1:-1] + dxx_b[:-2]) / h**2  # nodes 0..N
    bn = b[2:-2]

    ga = GridFunction1D(a, h)
    gb = GridFunction1D(bn, h)

    # <a, dxx b>_{d_N} = -<dx+ a, dx+ b>_{lower} - a_0 dx- b_0 + a_N dx+ b_N
    lhs1 = h * np.sum(a * dxx_b_nodes)
    dxm_b0 = (b[2] - b[1]) / h
    dxp_bN = (b[N + 3] - b[N + 2]) / h
    rhs1 = (
        -inner_product_1d(delta_x_forward(ga), delta_x_forward(gb), "lower")
        - a[0] * dxm_b0
        + a[N] * dxp_bN
    )

    # <a, dxxxx b>_{d_N} = <dxx a, dxx b>_{interior} + boundary terms
    lhs2 = h * np.sum(a * dxxxx_b)
    dxx_a = delta_xx(ga)
    gdxx_b = GridFunction1D(dxx_b_nodes, h)
    dxm_dxx_b0 = (dxx_b[1] - dxx_b[0]) / h
    dxp_dxx_bN = (dxx_b[N + 2] - dxx_b[N + 1]) / h
    dxp_a0 = (a[1] - a[0]) / h
    dxm_aN = (a[N] - a[N - 1]) / h
    rhs2 = (
        inner_product_1d(dxx_a, gdxx_b, "interior")
        - a[0] * dxm_dxx_b0
        + dxp_a0 * dxx_b_nodes[0]
        + a[N] * dxp_dxx_bN
        - dxm_aN * dxx_b_nodes[N]
    )
    return abs(lhs1 - rhs1), abs(lhs2 - rhs2)


def sbp_residual_2d(a, b, h: float) -> tuple[float, float]:
    """Residuals of the x- and y-direction 2D summation-by-parts identities.

    ``a`` has shape (N+1, N+1); ``b`` has shape (N+3, N+3), one ghost layer
    on every side, so that ``delta_xx b`` and ``delta_yy b`` exist on all of
    d_{N,N}.
    """
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    N = a.shape[0] - 1
    if a.shape != (N + 1, N + 1) or b.shape != (N + 3, N + 3):
        raise ValueError("a must be (N+1, N+1) and b (N+3, N+3)")
    h2 = h * h
    bn = b[1:-1, 1:-1]
    ga = GridFunction2D(a, h)
    gb = GridFunction2D(bn, h)

    dxx_b = (b[2:, 1:-1] - 2.0 * bn + b[:-2, 1:-1]) / h2
    lhs_x = h2 * np.sum(a * dxx_b)
    dxp_bN = (b[N + 2, 1:-1] - b[N + 1, 1:-1]) / h
    dxm_b0 = (b[1, 1:-1] - b[0, 1:-1]) / h
    # boundary sums carry a single factor h (one tangential direction)
    rhs_x = -inner_product_2d(delta_x_forward_2d(ga), delta_x_forward_2d(gb), "x_lower") + h * np.sum(
        a[N, :] * dxp_bN - a[0, :] * dxm_b0
    )

    dyy_b = (b[1:-1, 2:] - 2.0 * bn + b[1:-1, :-2]) / h2
    lhs_y = h2 * np.sum(a * dyy_b)
    dyp_bN = (b[1:-1, N + 2] - b[1:-1, N + 1]) / h
    dym_b0 = (b[1:-1, 1] - b[1:-1, 0]) / h
    rhs_y = -inner_product_2d(delta_y_forward(ga), delta_y_forward(gb), "y_lower") + h * np.sum(
        a[:, N] * dyp_bN - a[:, 0] * dym_b0
    )
    return abs(lhs_x - rhs_x), abs(lhs_y - rhs_y)
