"""Uplink pilots, training signal and LMMSE channel estimation."""

import dataclasses
import functools
import logging
import typing

import numpy as np
import scipy.linalg

from .config import PilotDesign, ValidatedConfig
from .const import CONDITION_LIMIT
from .exceptions import ConfigError, SingularMatrixError
from .stochastic import (
    ChannelSet,
    PhaseTrajectories,
    complex_gaussian,
    rotate_channels,
)

LOGGER = logging.getLogger(__name__)


@dataclasses.dataclass(frozen=True, eq=False)
class PilotSet:
    """Pilot sequences and the training statistics derived from them."""

    omega: np.ndarray
    """Pilots, shape (K, B); row k is omega_k."""

    W: np.ndarray
    """Phase-decayed pilot outer products W_k, shape (K, B, B)."""

    Sigma: np.ndarray
    """Per-antenna covariance of the training signal, shape (B, B)."""

    beta: np.ndarray
    var_sum: float

    @property
    def K(self) -> int:
        """Get the number of MTs."""
        return self.omega.shape[0]

    @property
    def B(self) -> int:
        """Get the pilot length."""
        return self.omega.shape[1]

    @functools.cached_property
    def _factor(self) -> tuple[np.ndarray, bool]:
        condition = np.linalg.cond(self.Sigma)

        LOGGER.debug(f"Sigma condition number {condition:.3e}.")

        if not np.isfinite(condition) or condition > CONDITION_LIMIT:
            raise SingularMatrixError(
                f"Sigma is ill-conditioned (condition {condition:.3e})."
            )

        try:
            return scipy.linalg.cho_factor(self.Sigma, lower=True)
        except np.linalg.LinAlgError as err:
            raise SingularMatrixError(
                f"Sigma is not positive definite: {err}"
            ) from err

    def solve(self, rhs: np.ndarray) -> np.ndarray:
        """Get Sigma^{-1} rhs."""
        return scipy.linalg.cho_solve(self._factor, rhs)

    def theta_sigma(self, t: int) -> np.ndarray:
        """Get the diagonal of Theta_sigma(t), shape (B,)."""
        b = np.arange(1, self.B + 1)

        return np.exp(-self.var_sum / 2.0 * np.abs(t - b))

    def decayed_pilots(self, t: int) -> np.ndarray:
        """Get Theta_sigma(t) omega_k for every k, shape (K, B)."""
        return self.omega * self.theta_sigma(t)[None, :]


class EstimateQuality(typing.NamedTuple):
    """Per-MT estimate quality at one slot."""

    lambda_: np.ndarray
    err_coeff: np.ndarray


@dataclasses.dataclass(frozen=True, eq=False)
class TrainingOutcome:
    """Training signal and the estimates made from it at t0."""

    y_stack: np.ndarray
    """Received training signal, shape (B, N); row b-1 is y_tr(b)."""

    g_hat: np.ndarray
    """LMMSE estimates at t0, shape (K, N)."""

    lambda_: np.ndarray
    err_coeff: np.ndarray


def _pilot_matrix(cfg: ValidatedConfig) -> np.ndarray:
    K, B = cfg.K, cfg.B
    omega = np.zeros((K, B), dtype=complex)

    match cfg.pilot_design:
        case PilotDesign.TIME_ORTHOGONAL:
            omega[np.arange(K), np.arange(K)] = np.sqrt(B * cfg.p_tau)
        case PilotDesign.UNITARY_OVERLAPPING:
            b = np.arange(B)
            fourier = np.exp(-2j * np.pi * np.outer(b, b) / B)

            omega[:, :] = np.sqrt(cfg.p_tau) * fourier[:, :K].T
        case _:
            raise NotImplementedError(
                f"'{cfg.pilot_design}' is not a valid pilot design."
            )

    return omega


def make_pilots(cfg: ValidatedConfig) -> PilotSet:
    """Build the pilots, W_k and Sigma."""
    if cfg.B < cfg.K:
        raise ConfigError(f"B = {cfg.B} < K = {cfg.K}")

    omega = _pilot_matrix(cfg)

    b = np.arange(cfg.B)
    decay = np.exp(-cfg.var_sum / 2.0 * np.abs(b[:, None] - b[None, :]))

    W = omega[:, :, None] * omega.conj()[:, None, :] * decay[None, :, :]

    beta = cfg.beta_array
    Sigma = np.einsum("k,kij->ij", beta, W) + cfg.xi_UL * np.eye(cfg.B)

    LOGGER.debug(
        f"Built {cfg.pilot_design.value} pilots, K={cfg.K}, B={cfg.B}."
    )

    return PilotSet(
        omega=omega, W=W, Sigma=Sigma, beta=beta, var_sum=cfg.var_sum
    )


def simulate_training(
    cfg: ValidatedConfig,
    pilots: PilotSet,
    channels: ChannelSet,
    traj: PhaseTrajectories,
    rng: np.random.Generator,
) -> np.ndarray:
    """Get the stacked training signal [y_tr(1); ...; y_tr(B)]."""
    rotated = rotate_channels(channels.g, traj, range(1, cfg.B + 1))
    noise = complex_gaussian(rng, (cfg.B, cfg.N), cfg.xi_UL)

    return np.einsum("bkn,kb->bn", rotated, pilots.omega) + noise


def estimator_weights(pilots: PilotSet, t: int) -> np.ndarray:
    """Get c(k, t) = beta_k omega_k^H Theta_sigma(t) Sigma^{-1}, (K, B)."""
    rows = pilots.beta[:, None] * pilots.decayed_pilots(t).conj()

    # Sigma is Hermitian, so (r Sigma^-1)^H = Sigma^-1 r^H
    return pilots.solve(rows.conj().T).conj().T


def lmmse_estimate(
    cfg: ValidatedConfig,
    pilots: PilotSet,
    y_stack: np.ndarray,
    t: int,
) -> np.ndarray:
    """Get the LMMSE estimate of every g_k(t), shape (K, N)."""
    if not 1 <= t <= cfg.T:
        raise IndexError(f"Slot {t} outside 1..{cfg.T}.")

    return estimator_weights(pilots, t) @ y_stack


def error_covariance_coeff(
    cfg: ValidatedConfig, pilots: PilotSet, t: int
) -> EstimateQuality:
    """Get lambda_k(t) and the error covariance coefficient of every MT."""
    decayed = pilots.decayed_pilots(t)
    solved = pilots.solve(decayed.T)

    quad = np.real(np.sum(decayed.T.conj() * solved, axis=0))
    lambda_ = pilots.beta * quad

    if np.any(lambda_ > 1.0 + 1e-12):
        LOGGER.warning(
            f"Estimate quality above one at t={t}: {lambda_.max():.6g}."
        )

    return EstimateQuality(
        lambda_=lambda_, err_coeff=pilots.beta * (1.0 - lambda_)
    )


def train(
    cfg: ValidatedConfig,
    pilots: PilotSet,
    channels: ChannelSet,
    traj: PhaseTrajectories,
    rng: np.random.Generator,
) -> TrainingOutcome:
    """Run the training phase and estimate the channels at t0."""
    y_stack = simulate_training(cfg, pilots, channels, traj, rng)
    quality = error_covariance_coeff(cfg, pilots, cfg.t0)

    return TrainingOutcome(
        y_stack=y_stack,
        g_hat=lmmse_estimate(cfg, pilots, y_stack, cfg.t0),
        lambda_=quality.lambda_,
        err_coeff=quality.err_coeff,
    )
