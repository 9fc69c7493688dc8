"""Flat ``key = value`` run configuration with dotted section prefixes.

Example::

    model = hammer_string
    sample_rate = 44100
    duration = 0.05
    string.T = 670
    hammer.v = 2

Every model kind has a fixed key set with defaults; unknown keys, duplicate
keys and malformed values are errors.  ``render`` writes every key, so
``parse_config(render(cfg)) == cfg``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

from .exceptions import ConfigError

__all__ = ["RunConfig", "OutputSpec", "MODEL_KINDS", "MODEL_KEYS", "parse_config", "render", "with_params"]

_STRING = {
    "string.rho": 0.0063,
    "string.T": 670.0,
    "string.E": 2e11,
    "string.r": 5e-4,
    "string.sigma0": 0.5,
    "string.sigma1": 0.5,
    "string.L": 0.62,
    "string.N": 0,  # 0 selects the finest stable grid
}

_MEMBRANE = {
    "membrane.rho": 0.26,
    "membrane.T": 3325.0,
    "membrane.sigma0": 0.0,
    "membrane.L": 0.6,
    "membrane.N": 0,
}

MODEL_KEYS: dict[str, dict] = {
    "lumped": {
        "mass.M": 0.01,
        "mass.u0": -0.05,
        "mass.v0": 10.0,
        "contact.K": 1e8,
        "contact.alpha": 2.5,
        "contact.beta": 0.0,
    },
    "hammer_string": {
        **_STRING,
        "hammer.M": 0.0029,
        "hammer.position": 0.12,
        "hammer.v": 2.0,
        "hammer.width": 0.0,
        "hammer.scheme": "conservative",  # or "explicit"
        "contact.K": 4.5e9,
        "contact.alpha": 2.5,
        "readout.x": 0.8,
    },
    "string_barrier": {
        **_STRING,
        "string.E": 0.0,
        "string.sigma0": 0.0,
        "string.sigma1": 5e-4,
        "barrier.peak": -1e-3,
        "barrier.drop": 5e-3,
        "init.position": 0.3,
        "init.amplitude": 2e-3,
        "contact.K": 1e13,
        "contact.alpha": 1.3,
        "readout.x": 0.8,
    },
    "reed_bore": {
        "reed.M": 3.37e-6,
        "reed.S": 1.46e-4,
        "reed.sigma": 1500.0,
        "reed.omega": 23250.0,
        "reed.H": 4e-4,
        "reed.w": 0.012,
        "bore.x": (0.0, 0.5, 0.6, 0.66),
        "bore.r": (0.0075, 0.0075, 0.01, 0.03),
        "air.rho": 1.2,
        "air.c": 340.0,
        "mouth.p": 2000.0,
        "mouth.attack": 0.01,
        "contact.K": 1e13,
        "contact.alpha": 1.3,
    },
    "mallet_membrane": {
        **_MEMBRANE,
        "mallet.M": 0.028,
        "mallet.x": 0.1 / math.sqrt(2.0) / 0.6,
        "mallet.y": 0.1 / math.sqrt(2.0) / 0.6,
        "mallet.v": 2.0,
        "mallet.radius": 0.0,
        "contact.K": 1.6e8,
        "contact.alpha": 2.54,
        "readout.x": 0.7,
        "readout.y": 0.6,
    },
    "string_membrane": {
        **_STRING,
        "string.rho": 2e-3,
        "string.T": 60.0,
        "string.E": 0.0,
        "string.r": 2e-4,
        "string.sigma0": 0.0,
        "string.sigma1": 0.0,
        "string.L": 0.3,
        **_MEMBRANE,
        "coupling.x0": 0.15,
        "coupling.y0": 0.3,
        "coupling.angle": 0.3,
        "coupling.gap": 5e-4,
        "coupling.attached": False,
        "init.v": 3.0,  # peak upward speed of a half-sine string velocity
        "contact.K": 1e9,
        "contact.alpha": 1.5,
        "readout.x": 0.7,
        "readout.y": 0.6,
    },
}

MODEL_KINDS = tuple(MODEL_KEYS)

_TOP = ("model", "sample_rate", "duration")
_OUTPUT = {
    "output.audio": "",
    "output.ledger": "",
    "output.snapshot": "",
    "output.snapshot_stride": 0,
    "output.normalize": False,
}


@dataclass(frozen=True)
class OutputSpec:
    audio: str = ""
    ledger: str = ""
    snapshot: str = ""
    snapshot_stride: int = 0
    normalize: bool = False


@dataclass(frozen=True)
class RunConfig:
    model: str
    sample_rate: float
    duration: float
    params: dict = field(default_factory=dict)
    output: OutputSpec = OutputSpec()

    def __post_init__(self):
        if self.model not in MODEL_KEYS:
            raise ConfigError(f"unknown model kind {self.model!r}; expected one of {', '.join(MODEL_KINDS)}")
        if not (self.sample_rate > 0 and math.isfinite(self.sample_rate)):
            raise ConfigError(f"sample_rate must be positive, got {self.sample_rate}")
        if not (self.duration > 0 and math.isfinite(self.duration)):
            raise ConfigError(f"duration must be positive, got {self.duration}")
        defaults = MODEL_KEYS[self.model]
        unknown = sorted(set(self.params) - set(defaults))
        if unknown:
            raise ConfigError(f"unknown keys for model {self.model!r}: {', '.join(unknown)}")
        full = {key: _coerce(key, self.params.get(key, dflt), dflt) for key, dflt in defaults.items()}
        object.__setattr__(self, "params", full)

    @property
    def k(self) -> float:
        return 1.0 / self.sample_rate

    @property
    def steps(self) -> int:
        return int(round(self.duration * self.sample_rate))

    def __getitem__(self, key):
        return self.params[key]


def with_params(cfg: RunConfig, **changes) -> RunConfig:
    """Copy of ``cfg`` with parameters replaced; keys use ``__`` for the dot (``string__T=...``)."""
    params = dict(cfg.params)
    params.update({key.replace("__", "."): v for key, v in changes.items()})
    return replace(cfg, params=params)


def _coerce(key: str, value, default):
    try:
        if isinstance(default, bool):
            if isinstance(value, str):
                low = value.strip().lower()
                if low not in ("true", "false"):
                    raise ValueError(value)
                return low == "true"
            return bool(value)
        if isinstance(default, int):
            v = float(value) if isinstance(value, str) else value
            if v != int(v):
                raise ValueError(value)
            return int(v)
        if isinstance(default, float):
            v = float(value)
            if not math.isfinite(v):
                raise ValueError(value)
            return v
        if isinstance(default, tuple):
            items = value.split(",") if isinstance(value, str) else value
            return tuple(float(x) for x in items)
        return str(value).strip()
    except (TypeError, ValueError):
        raise ConfigError(f"invalid value {value!r} for key {key!r}") from None


def parse_config(text: str) -> RunConfig:
    """Strict parse: blank lines and ``#`` comments are ignored, everything else is ``key = value``."""
    seen: dict[str, str] = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'key = value', got {raw.strip()!r}")
        key, value = (part.strip() for part in line.split("=", 1))
        if not key:
            raise ConfigError(f"line {lineno}: empty key")
        if key in seen:
            raise ConfigError(f"line {lineno}: duplicate key {key!r}")
        seen[key] = value
    for key in _TOP:
        if key not in seen:
            raise ConfigError(f"missing required key {key!r}")
    model = seen.pop("model")
    sr = _coerce("sample_rate", seen.pop("sample_rate"), 0.0)
    dur = _coerce("duration", seen.pop("duration"), 0.0)
    out = {key: _coerce(key, seen.pop(key), dflt) for key, dflt in _OUTPUT.items() if key in seen}
    output = OutputSpec(**{key.split(".", 1)[1]: v for key, v in out.items()})
    if output.snapshot_stride < 0:
        raise ConfigError("output.snapshot_stride must be non-negative")
    return RunConfig(model, sr, dur, seen, output)


def _fmt(value) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(value)
    if isinstance(value, tuple):
        return ", ".join(repr(float(v)) for v in value)
    return str(value)


def render(cfg: RunConfig) -> str:
    lines = [f"model = {cfg.model}", f"sample_rate = {_fmt(float(cfg.sample_rate))}",
             f"duration = {_fmt(float(cfg.duration))}"]
    lines += [f"{key} = {_fmt(cfg.params[key])}" for key in MODEL_KEYS[cfg.model]]
    out = cfg.output
    lines += [f"output.audio = {out.audio}", f"output.ledger = {out.ledger}",
              f"output.snapshot = {out.snapshot}", f"output.snapshot_stride = {out.snapshot_stride}",
              f"output.normalize = {_fmt(out.normalize)}"]
    return "\n".join(lines) + "\n"
