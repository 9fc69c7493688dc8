"""Bundled configurations for the standard test cases."""

from __future__ import annotations

from .config import OutputSpec, RunConfig
from .exceptions import ConfigError

__all__ = ["PRESETS", "preset", "preset_names"]

_C4 = {"string.rho": 0.0063, "string.T": 670.0, "string.E": 2e11, "string.r": 5e-4, "string.L": 0.62}

PRESETS: dict[str, tuple] = {
    # mass hitting a rigid wall, lossless
    "fig1_lumped": ("lumped", 44100.0, 0.02, {"mass.M": 0.01, "mass.v0": 10.0, "contact.K": 1e8,
                                               "contact.alpha": 2.5}),
    # same with Hunt-Crossley loss
    "fig2_lossy": ("lumped", 44100.0, 0.02, {"mass.M": 0.01, "mass.v0": 10.0, "contact.K": 1e8,
                                              "contact.alpha": 2.3, "contact.beta": 1.0}),
    # piano hammer on a C4 string
    "fig3_c4_hammer": ("hammer_string", 44100.0, 0.05, {**_C4, "string.sigma0": 0.5, "string.sigma1": 0.5,
                                                         "hammer.v": 2.0}),
    # explicit force update on a lossless, non-stiff C4 string
    "fig5_instability": ("hammer_string", 44100.0, 0.01, {**_C4, "string.E": 0.0, "string.sigma0": 0.0,
                                                           "string.sigma1": 0.0, "hammer.v": 1.5,
                                                           "hammer.scheme": "explicit"}),
    # plucked string against a hump-shaped barrier
    "fig6_barrier": ("string_barrier", 88200.0, 0.05, {}),
    # clarinet-like reed and bore
    "fig7_reed": ("reed_bore", 88200.0, 0.5, {"mouth.p": 2000.0}),
    # mallet strike near a membrane corner
    "fig10_mallet": ("mallet_membrane", 22050.0, 0.05, {"mallet.v": 2.0}),
    # wire with attached ends rattling against a membrane
    "string_membrane_demo": ("string_membrane", 22050.0, 0.1, {"coupling.attached": True}),
}


def preset_names() -> tuple[str, ...]:
    return tuple(PRESETS)


def preset(name: str) -> RunConfig:
    """Configuration for a bundled preset, writing ``<name>.wav`` and ``<name>_ledger.csv``."""
    if name not in PRESETS:
        raise ConfigError(f"unknown preset {name!r}; available: {', '.join(PRESETS)}")
    model, sr, dur, params = PRESETS[name]
    return RunConfig(model, sr, dur, dict(params), OutputSpec(audio=f"{name}.wav", ledger=f"{name}_ledger.csv"))
