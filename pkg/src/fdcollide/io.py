"""File writers for run outputs, plus a reader for field snapshots."""

from __future__ import annotations

from pathlib import Path

import numpy as np
from scipy.io import wavfile

from .energy import EnergyLedger

__all__ = ["write_audio", "write_ledger", "write_snapshot", "snapshot_path", "read_snapshot"]


def write_audio(path, samples, sample_rate) -> Path:
    """Mono 32-bit float WAV in raw physical units."""
    path = Path(path)
    rate = int(round(sample_rate))
    if rate != sample_rate:
        raise ValueError(f"WAV needs an integer sample rate, got {sample_rate}")
    data = np.asarray(samples, dtype=np.float32).ravel()
    wavfile.write(path, rate, data)
    return path


def write_ledger(path, ledger: EnergyLedger, comments: dict | None = None) -> Path:
    """CSV with 17-significant-digit floats; ``comments`` become leading ``# key=value`` lines."""
    path = Path(path)
    header, table = ledger.as_array()
    with open(path, "w", newline="\n") as fh:
        for key, value in (comments or {}).items():
            fh.write(f"# {key}={value!r}\n" if isinstance(value, float) else f"# {key}={value}\n")
        fh.write(",".join(header) + "\n")
        for row in table:
            cells = [str(int(row[0]))] + ["%.17g" % v for v in row[1:]]
            fh.write(",".join(cells) + "\n")
    return path


def snapshot_path(template, step: int) -> Path:
    """``template`` with ``{step}`` filled in, or ``_<step>`` inserted before the suffix."""
    template = str(template)
    if "{step}" in template:
        return Path(template.format(step=step))
    p = Path(template)
    return p.with_name(f"{p.stem}_{step:07d}{p.suffix or '.txt'}")


def write_snapshot(path, field, step: int, t: float, h: float) -> Path:
    """Row-major text matrix (a single row for 1D fields) under a ``# step t N h`` header line."""
    path = Path(path)
    arr = np.atleast_2d(np.asarray(field, dtype=np.float64))
    N = arr.shape[1] - 1
    with open(path, "w", newline="\n") as fh:
        fh.write(f"# {step} {t!r} {N} {h!r}\n")
        for row in arr:
            fh.write(" ".join("%.17g" % v for v in row) + "\n")
    return path


def read_snapshot(path) -> tuple[int, float, int, float, np.ndarray]:
    with open(path) as fh:
        head = fh.readline().lstrip("#").split()
    data = np.loadtxt(path, comments="#", ndmin=2)
    return int(head[0]), float(head[1]), int(head[2]), float(head[3]), data
