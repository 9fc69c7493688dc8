"""Energy-conserving finite difference schemes for collisions in musical instruments."""

from .config import RunConfig, parse_config, render
from .contact import ContactLaw, PowerLawPotential
from .energy import EnergyLedger, assert_balance_with_source, assert_conservative, assert_dissipative, record
from .exceptions import ConfigError, SolverError
from .presets import preset
from .runner import run

__version__ = "0.1.0"

__all__ = [
    "ConfigError",
    "ContactLaw",
    "EnergyLedger",
    "PowerLawPotential",
    "RunConfig",
    "SolverError",
    "assert_balance_with_source",
    "assert_conservative",
    "assert_dissipative",
    "parse_config",
    "preset",
    "record",
    "render",
    "run",
]
