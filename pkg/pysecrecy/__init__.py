"""Secrecy rates of a massive MIMO downlink with phase noise and AN."""

from .bounds import (
    RateVariant,
    eve_capacity_upper,
    optimize_phi,
    rate_lower_bound,
    secrecy_rate_bound,
    slot_rates,
)
from .config import PilotDesign, SystemConfig, load_config, validate
from .exceptions import ConfigError, NumericalError, SecrecyException
from .montecarlo import (
    estimate_moments,
    mc_rate,
    mc_secrecy,
    run_trials,
    simulate_eve,
)
from .report import SecrecyReport, emit_plotdata
from .training import make_pilots

__all__ = [
    "ConfigError",
    "NumericalError",
    "PilotDesign",
    "RateVariant",
    "SecrecyException",
    "SecrecyReport",
    "SystemConfig",
    "emit_plotdata",
    "estimate_moments",
    "eve_capacity_upper",
    "load_config",
    "make_pilots",
    "mc_rate",
    "mc_secrecy",
    "optimize_phi",
    "rate_lower_bound",
    "run_trials",
    "secrecy_rate_bound",
    "slot_rates",
    "simulate_eve",
    "validate",
]
