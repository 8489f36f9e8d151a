"""Shared test configs."""

import typing

from pysecrecy.config import SystemConfig


def baseline_config(**changes: typing.Any) -> SystemConfig:
    """Get the N=128, K=4, 6 degree, 10 dB setup with overrides."""
    fields: dict[str, typing.Any] = {
        "N": 128,
        "K": 4,
        "N_E": 4,
        "N_o": 1,
        "B": 4,
        "T": 500,
        "P_T_dB": 10.0,
        "phi": 0.5,
        "sigma_psi_deg": 6.0,
        "sigma_phi_deg": 6.0,
        "beta": 1.0,
        "trials": 200,
        "seed": 7,
    }

    fields.update(changes)

    return SystemConfig(**fields)


def small_config(**changes: typing.Any) -> SystemConfig:
    """Get a desk-scale setup for Monte Carlo tests."""
    fields: dict[str, typing.Any] = {
        "N": 16,
        "K": 2,
        "N_E": 2,
        "N_o": 1,
        "B": 2,
        "T": 12,
        "P_T_dB": 10.0,
        "phi": 0.5,
        "sigma_psi_deg": 2.0,
        "sigma_phi_deg": 2.0,
        "beta": 1.0,
        "trials": 40,
        "seed": 11,
        "t_grid": (3, 6, 12),
    }

    fields.update(changes)

    return baseline_config(**fields)
