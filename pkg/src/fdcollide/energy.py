"""Energy ledgers and the conservation / dissipation checks run on them.

Row ``n`` of a ledger holds the interleaved energy between time steps ``n``
and ``n + 1``.  Dissipated power and source power are accumulated with the
left-endpoint rule ``k * q^n``, which is exactly how the discrete energy
balance of every scheme is indexed, so a correct scheme leaves only
round-off in ``h + Q - S``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

__all__ = ["EnergyRow", "EnergyLedger", "CheckResult", "record", "assert_conservative",
           "assert_dissipative", "assert_balance_with_source"]

SUM_TOL = 1e-14


@dataclass(frozen=True)
class EnergyRow:
    """One ledger entry.

    ``dissipation`` and ``source`` are powers for the step that produced this
    row (zero for the first row); they enter the accumulators multiplied by k.
    """

    step: int
    t: float
    components: dict
    h_total: float
    dissipation: float = 0.0
    source: float = 0.0


@dataclass
class EnergyLedger:
    k: float
    component_names: tuple = ()
    steps: list = field(default_factory=list)
    times: list = field(default_factory=list)
    components: list = field(default_factory=list)
    h_total: list = field(default_factory=list)
    q_accum: list = field(default_factory=list)
    source_accum: list = field(default_factory=list)
    residual: list = field(default_factory=list)

    def __len__(self):
        return len(self.steps)

    @property
    def h0(self) -> float:
        return self.h_total[0] if self.h_total else math.nan

    @property
    def epsilon(self) -> np.ndarray:
        h = np.asarray(self.h_total)
        if not self.h_total or not self.h0 > 0:
            return np.full(h.shape, np.nan)
        return (h - self.h0) / self.h0

    def column(self, name: str) -> np.ndarray:
        j = self.component_names.index(name)
        return np.array([c[j] for c in self.components])

    def as_array(self) -> tuple[list[str], np.ndarray]:
        """Header and table: step, t, components..., h_total, q_accum, source_accum, epsilon."""
        header = ["step", "t", *self.component_names, "h_total", "q_accum", "source_accum", "epsilon"]
        table = np.column_stack([
            np.asarray(self.steps, dtype=np.float64),
            np.asarray(self.times, dtype=np.float64),
            np.asarray(self.components, dtype=np.float64).reshape(len(self), len(self.component_names)),
            np.asarray(self.h_total),
            np.asarray(self.q_accum),
            np.asarray(self.source_accum),
            self.epsilon,
        ]) if len(self) else np.empty((0, len(header)))
        return header, table


def record(ledger: EnergyLedger, row: EnergyRow) -> EnergyLedger:
    """Append ``row`` after checking that its components add up to its total."""
    if not ledger.component_names:
        ledger.component_names = tuple(row.components)
    elif tuple(row.components) != ledger.component_names:
        raise ValueError(f"row components {tuple(row.components)} do not match ledger {ledger.component_names}")
    vals = [float(v) for v in row.components.values()]
    total = math.fsum(vals)
    scale = max(abs(row.h_total), math.fsum(abs(v) for v in vals))
    if abs(total - row.h_total) > SUM_TOL * scale:
        raise ValueError(f"components sum to {total!r} but h_total is {row.h_total!r}")
    if row.dissipation < 0:
        raise ValueError(f"dissipated power must be non-negative, got {row.dissipation}")
    first = not ledger.steps
    q = 0.0 if first else ledger.q_accum[-1] + ledger.k * row.dissipation
    s = 0.0 if first else ledger.source_accum[-1] + ledger.k * row.source
    if first:
        res = 0.0
    else:
        res = (row.h_total - ledger.h_total[-1]) + ledger.k * (row.dissipation - row.source)
    ledger.steps.append(int(row.step))
    ledger.times.append(float(row.t))
    ledger.components.append(vals)
    ledger.h_total.append(float(row.h_total))
    ledger.q_accum.append(q)
    ledger.source_accum.append(s)
    ledger.residual.append(res)
    return ledger


@dataclass(frozen=True)
class CheckResult:
    passed: bool
    first_failure: int | None
    worst: float

    def __bool__(self):
        return self.passed


def _first(mask, steps):
    idx = np.flatnonzero(mask)
    return int(steps[idx[0]]) if idx.size else None


def assert_conservative(ledger: EnergyLedger, tol: float = 1e-12) -> CheckResult:
    """|h^n - h^0| <= tol * h^0 on every row (absolute when h^0 = 0)."""
    h = np.asarray(ledger.h_total)
    scale = ledger.h0 if ledger.h0 > 0 else 1.0
    dev = np.abs(h - ledger.h0) / scale
    bad = dev > tol
    return CheckResult(not bad.any(), _first(bad, ledger.steps), float(dev.max(initial=0.0)))


def assert_dissipative(ledger: EnergyLedger, tol: float = 1e-12) -> CheckResult:
    """h^n <= h^{n-1} on every step, allowing round-off of tol * h^0."""
    h = np.asarray(ledger.h_total)
    scale = ledger.h0 if ledger.h0 > 0 else 1.0
    rise = np.diff(h) / scale
    bad = np.concatenate([[False], rise > tol])
    return CheckResult(not bad.any(), _first(bad, ledger.steps), float(rise.max(initial=0.0)))


def assert_balance_with_source(ledger: EnergyLedger, tol: float = 1e-10, floor: float = 1e-30) -> CheckResult:
    """Per-step balance h^n - h^{n-1} + k q^n - k s^n = 0, relative to max(h^n, floor)."""
    res = np.abs(np.asarray(ledger.residual))
    rel = res / np.maximum(np.asarray(ledger.h_total), floor)
    bad = rel > tol
    return CheckResult(not bad.any(), _first(bad, ledger.steps), float(rel.max(initial=0.0)))
