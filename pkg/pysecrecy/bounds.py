"""Closed-form rate, eavesdropper and secrecy bounds.

MT indices are 0-based throughout; slots are 1-based as in the model.
"""

import dataclasses
import enum
import logging
import typing

import numpy as np

from .config import ValidatedConfig, replace, validate
from .const import DEFAULT_PHI_START, DEFAULT_PHI_STEP, DEFAULT_PHI_STOP
from .exceptions import (
    EveBoundUndefinedError,
    EveCapacityUnboundedError,
    NumericalError,
)
from .training import PilotSet, error_covariance_coeff

LOGGER = logging.getLogger(__name__)


class RateVariant(enum.Enum):
    """Ways of evaluating the per-slot rate lower bound."""

    COMPOSED = "composed"
    """Closed-form moments inserted into the SINR definition."""

    PACKAGED = "packaged"
    """Closed form in a_k, c_k, mu_k, xi_k matching the SINR definition."""

    PRINTED = "printed"
    """Closed form with the AN and noise constants as typeset."""


@dataclasses.dataclass(frozen=True, eq=False)
class RateTerms:
    """Every constant of the closed-form rate for one MT and slot."""

    lambda_: float
    lambda_bar: float
    epsilon: float
    lo_factor: float
    """(1 - epsilon) / N_o + epsilon."""

    X1: np.ndarray
    """X1_{k,l} for every l, zero at l = k."""

    X2: np.ndarray
    """X2_{k,l} for every l, zero at l = k."""

    a: float
    c: float
    mu: float
    xi: float
    beta_ratio: float
    """K / N."""

    an_ratio: float
    """K / L, the AN weight that reproduces the SINR definition."""


class SecondMoment(typing.NamedTuple):
    """Desired-signal second moment and the variance left after the mean."""

    second_moment: float
    variance: float


class PhiOptimum(typing.NamedTuple):
    """Result of the power-allocation grid search."""

    phi_star: float
    secrecy: float
    grid: np.ndarray
    curve: np.ndarray


class SlotMoments(typing.NamedTuple):
    """Closed-form SINR ingredients of one MT over a run of slots."""

    slots: np.ndarray
    gain: np.ndarray
    second_moment: np.ndarray
    interference: np.ndarray
    """Sum over l != k of E[|g_k^H(t) f_l|^2]."""

    leakage: np.ndarray
    lambda_bar: np.ndarray
    a: np.ndarray
    c: np.ndarray
    mu: np.ndarray


def _distance(cfg: ValidatedConfig, t: int | np.ndarray) -> np.ndarray:
    return np.abs(np.asarray(t) - cfg.t0)


def data_slots(cfg: ValidatedConfig) -> np.ndarray:
    """Get every data slot B+1..T."""
    return np.arange(cfg.B + 1, cfg.T + 1)


def estimate_quality(cfg: ValidatedConfig, pilots: PilotSet) -> np.ndarray:
    """Get lambda_k for the estimates made at t0."""
    return error_covariance_coeff(cfg, pilots, cfg.t0).lambda_


def _epsilon(cfg: ValidatedConfig, slots: np.ndarray) -> np.ndarray:
    return np.exp(-cfg.var_psi * _distance(cfg, slots))


def _lo_factor(cfg: ValidatedConfig, slots: np.ndarray) -> np.ndarray:
    eps = _epsilon(cfg, slots)

    return (1.0 - eps) / cfg.N_o + eps


def _gain(
    cfg: ValidatedConfig, beta_k: float, lambda_k: float, slots: np.ndarray
) -> np.ndarray:
    decay = np.exp(-cfg.var_sum / 2.0 * _distance(cfg, slots))

    return np.sqrt(beta_k * cfg.N * lambda_k) * decay


def _second_moment(
    cfg: ValidatedConfig, beta_k: float, lambda_k: float, slots: np.ndarray
) -> np.ndarray:
    factor = _lo_factor(cfg, slots)

    return beta_k + beta_k * (cfg.N - 1) * lambda_k * factor


def _leakage_scale(
    cfg: ValidatedConfig, lambda_k: float, slots: np.ndarray
) -> np.ndarray:
    """(1 - 1/N_o)(1 - epsilon) + 1 - lambda_k."""
    eps = _epsilon(cfg, slots)

    return (1.0 - 1.0 / cfg.N_o) * (1.0 - eps) + 1.0 - lambda_k


def epsilon(cfg: ValidatedConfig, t: int) -> float:
    """Get exp(-sigma_psi^2 |t - t0|)."""
    return float(_epsilon(cfg, t))


def lo_factor(cfg: ValidatedConfig, t: int) -> float:
    """Get (1 - epsilon) / N_o + epsilon."""
    return float(_lo_factor(cfg, t))


def contamination_terms(
    cfg: ValidatedConfig, pilots: PilotSet, k: int
) -> tuple[np.ndarray, np.ndarray]:
    """Get X1_{k,l} and X2_{k,l} for every l (zero at l = k)."""
    decayed = pilots.decayed_pilots(cfg.t0)
    solved = pilots.solve(decayed.T)

    quad = np.real(np.sum(decayed.T.conj() * solved, axis=0))
    beta_k = pilots.beta[k]

    leak = np.real(
        np.einsum("bl,bc,cl->l", solved.conj(), pilots.W[k], solved)
    )
    cross = beta_k * (decayed[k].conj() @ solved)

    X1 = cfg.N / cfg.N_o * beta_k**2 * leak / quad
    X2 = cfg.N * (1.0 - 1.0 / cfg.N_o) * np.abs(cross) ** 2 / quad

    X1[k] = 0.0
    X2[k] = 0.0

    return X1, X2


def signal_gain(
    cfg: ValidatedConfig, pilots: PilotSet, k: int, t: int
) -> float:
    """Get E[g_k^H(t) f_k]."""
    lambda_k = estimate_quality(cfg, pilots)[k]

    return float(_gain(cfg, pilots.beta[k], lambda_k, t))


def interference_power(
    cfg: ValidatedConfig, pilots: PilotSet, k: int, l: int, t: int
) -> float:
    """Get E[|g_k^H(t) f_l|^2] for l != k."""
    if l == k:
        raise ValueError("Interference needs two distinct MTs.")

    X1, X2 = contamination_terms(cfg, pilots, k)

    return float(pilots.beta[k] + (X1[l] + X2[l]) * lo_factor(cfg, t))


def desired_second_moment(
    cfg: ValidatedConfig, pilots: PilotSet, k: int, t: int
) -> SecondMoment:
    """Get E[|g_k^H(t) f_k|^2] and the desired-signal variance."""
    beta_k = pilots.beta[k]
    lambda_k = estimate_quality(cfg, pilots)[k]

    second = float(_second_moment(cfg, beta_k, lambda_k, t))
    gain = signal_gain(cfg, pilots, k, t)

    return SecondMoment(second, second - gain**2)


def an_leakage(
    cfg: ValidatedConfig, pilots: PilotSet, k: int, t: int
) -> float:
    """Get E[g_k^H(t) A A^H g_k(t)]."""
    lambda_k = estimate_quality(cfg, pilots)[k]

    return float(
        pilots.beta[k] * cfg.L * _leakage_scale(cfg, lambda_k, t)
    )


def slot_moments(
    cfg: ValidatedConfig,
    pilots: PilotSet,
    k: int,
    slots: typing.Sequence[int] | np.ndarray | None = None,
) -> SlotMoments:
    """Evaluate the closed-form moments of MT k on many slots at once.

    Defaults to every data slot. Nothing here depends on phi.
    """
    slots = data_slots(cfg) if slots is None else np.asarray(slots)
    beta_k = float(pilots.beta[k])
    lambda_k = float(estimate_quality(cfg, pilots)[k])

    X1, X2 = contamination_terms(cfg, pilots, k)
    others = np.arange(cfg.K) != k
    contamination = float(np.sum(X1[others] + X2[others]))

    eps = _epsilon(cfg, slots)
    factor = _lo_factor(cfg, slots)
    scale = _leakage_scale(cfg, lambda_k, slots)
    lambda_bar = lambda_k * np.exp(-cfg.var_sum * _distance(cfg, slots))

    return SlotMoments(
        slots=slots,
        gain=_gain(cfg, beta_k, lambda_k, slots),
        second_moment=_second_moment(cfg, beta_k, lambda_k, slots),
        interference=(cfg.K - 1) * beta_k + contamination * factor,
        leakage=beta_k * cfg.L * scale,
        lambda_bar=lambda_bar,
        a=(cfg.K - 1) + contamination * factor / beta_k,
        c=(1.0 - 1.0 / cfg.N_o) * (1.0 - eps)
        + ((cfg.N - 1) * lambda_k + 1.0) * factor
        - cfg.N * lambda_bar,
        mu=cfg.L * scale,
    )


def rate_terms(
    cfg: ValidatedConfig, pilots: PilotSet, k: int, t: int
) -> RateTerms:
    """Get the constants of the closed-form rate."""
    moments = slot_moments(cfg, pilots, k, [t])
    X1, X2 = contamination_terms(cfg, pilots, k)

    return RateTerms(
        lambda_=float(estimate_quality(cfg, pilots)[k]),
        lambda_bar=float(moments.lambda_bar[0]),
        epsilon=epsilon(cfg, t),
        lo_factor=lo_factor(cfg, t),
        X1=X1,
        X2=X2,
        a=float(moments.a[0]),
        c=float(moments.c[0]),
        mu=float(moments.mu[0]),
        xi=cfg.K * cfg.xi_DL / (pilots.beta[k] * cfg.P_T),
        beta_ratio=cfg.K / cfg.N,
        an_ratio=cfg.K / cfg.L,
    )


def _sinr_curve(
    cfg: ValidatedConfig,
    moments: SlotMoments,
    beta_k: float,
    variant: RateVariant,
) -> np.ndarray:
    match variant:
        case RateVariant.COMPOSED:
            numerator = cfg.p * moments.gain**2
            denominator = (
                cfg.p * (moments.interference + moments.second_moment)
                - numerator
                + cfg.q * moments.leakage
                + cfg.xi_DL
            )
        case RateVariant.PACKAGED | RateVariant.PRINTED:
            if variant is RateVariant.PRINTED:
                weight = cfg.K / cfg.N
                xi = weight * cfg.xi_DL / (beta_k * cfg.P_T)
            else:
                weight = cfg.K / cfg.L
                xi = cfg.K * cfg.xi_DL / (beta_k * cfg.P_T)

            numerator = moments.lambda_bar * cfg.phi * cfg.N
            denominator = (
                (moments.a + moments.c - weight * moments.mu) * cfg.phi
                + weight * moments.mu
                + xi
            )
        case _:
            raise NotImplementedError(f"'{variant}' is not a rate variant.")

    if not np.all(denominator > 0.0):
        raise NumericalError(
            f"Non-positive SINR denominator {np.min(denominator):.6g}."
        )

    return numerator / denominator


def sinr(
    cfg: ValidatedConfig,
    pilots: PilotSet,
    k: int,
    t: int,
    variant: RateVariant = RateVariant.COMPOSED,
) -> float:
    """Get the SINR lower bound of MT k in slot t."""
    moments = slot_moments(cfg, pilots, k, [t])

    return float(_sinr_curve(cfg, moments, pilots.beta[k], variant)[0])


def rate_lower_bound(
    cfg: ValidatedConfig,
    pilots: PilotSet,
    k: int,
    t: int,
    variant: RateVariant = RateVariant.COMPOSED,
) -> float:
    """Get the achievable-rate lower bound in bits per slot."""
    return float(np.log2(1.0 + sinr(cfg, pilots, k, t, variant)))


def slot_rates(
    cfg: ValidatedConfig,
    pilots: PilotSet,
    k: int,
    variant: RateVariant = RateVariant.COMPOSED,
    slots: typing.Sequence[int] | np.ndarray | None = None,
) -> np.ndarray:
    """Get the rate lower bound on every data slot, or on ``slots``."""
    moments = slot_moments(cfg, pilots, k, slots)

    return np.log2(1.0 + _sinr_curve(cfg, moments, pilots.beta[k], variant))


def eve_capacity_upper(cfg: ValidatedConfig) -> float:
    """Get the closed-form upper bound on the eavesdropper capacity."""
    if not cfg.eve_bound_defined:
        raise EveBoundUndefinedError(
            f"L={cfg.L} ≤ N_E={cfg.N_E}: bound undefined; secrecy cannot"
            " be guaranteed."
        )

    if cfg.q <= 0.0:
        raise EveCapacityUnboundedError(
            "No AN: unbounded eavesdropper capacity; secrecy rate 0."
        )

    return float(
        np.log2(1.0 + cfg.p * cfg.N_E / (cfg.q * (cfg.L - cfg.N_E)))
    )


def _weights(cfg: ValidatedConfig, count: int) -> np.ndarray:
    """Get slot weights for values on every data slot or on the t grid."""
    if count == cfg.data_slots:
        return np.ones(count)

    if count == len(cfg.t_grid):
        return np.asarray(cfg.t_weights, dtype=float)

    raise ValueError(
        f"{count} values match neither the {cfg.data_slots} data slots nor"
        f" the {len(cfg.t_grid)} grid points."
    )


def weighted_secrecy(
    cfg: ValidatedConfig, rates: np.ndarray, eve_capacity: float
) -> float:
    """Get (1/T) sum over data slots of [R(t) - C_E]^+."""
    rates = np.asarray(rates, dtype=float)
    gaps = np.maximum(rates - eve_capacity, 0.0)

    return float(np.dot(_weights(cfg, rates.size), gaps) / cfg.T)


def weighted_average(cfg: ValidatedConfig, values: np.ndarray) -> float:
    """Get the mean over data slots of per-slot or per-grid-point values."""
    values = np.asarray(values, dtype=float)
    weights = _weights(cfg, values.size)

    return float(np.dot(weights, values) / weights.sum())


def _secrecy(
    cfg: ValidatedConfig,
    moments: SlotMoments,
    beta_k: float,
    variant: RateVariant,
) -> float:
    try:
        eve_capacity = eve_capacity_upper(cfg)
    except EveCapacityUnboundedError as err:
        LOGGER.warning(f"{err}")

        return 0.0

    rates = np.log2(1.0 + _sinr_curve(cfg, moments, beta_k, variant))

    return weighted_secrecy(cfg, rates, eve_capacity)


def secrecy_rate_bound(
    cfg: ValidatedConfig,
    pilots: PilotSet,
    k: int,
    variant: RateVariant = RateVariant.COMPOSED,
) -> float:
    """Get the ergodic secrecy-rate lower bound of MT k."""
    moments = slot_moments(cfg, pilots, k)

    return _secrecy(cfg, moments, pilots.beta[k], variant)


def phi_grid(
    start: float = DEFAULT_PHI_START,
    stop: float = DEFAULT_PHI_STOP,
    step: float = DEFAULT_PHI_STEP,
) -> np.ndarray:
    """Get the inclusive grid start, start + step, ..., stop."""
    if step <= 0.0:
        raise ValueError("Grid step must be positive.")

    count = int(np.floor((stop - start) / step + 1e-9)) + 1

    return np.round(start + step * np.arange(count), 12)


def optimize_phi(
    cfg: ValidatedConfig,
    pilots: PilotSet,
    k: int,
    grid: typing.Sequence[float] | np.ndarray,
    variant: RateVariant = RateVariant.COMPOSED,
) -> PhiOptimum:
    """Grid-search the data power fraction maximizing the secrecy bound.

    Ties go to the smaller phi, which spends more power on AN.
    """
    grid = np.asarray(grid, dtype=float)

    if grid.size == 0:
        raise ValueError("Empty phi grid.")

    if np.any(np.diff(grid) <= 0.0):
        raise ValueError("phi grid must be sorted and strictly increasing.")

    # the moments do not depend on phi
    moments = slot_moments(cfg, pilots, k)
    beta_k = pilots.beta[k]

    curve = np.array(
        [
            _secrecy(
                validate(replace(cfg.config, phi=float(phi))),
                moments,
                beta_k,
                variant,
            )
            for phi in grid
        ]
    )

    # argmax keeps the first maximum of the ascending grid
    best = int(np.argmax(curve))

    LOGGER.debug(f"phi* = {grid[best]:.4g}, secrecy {curve[best]:.6g}.")

    return PhiOptimum(
        phi_star=float(grid[best]),
        secrecy=float(curve[best]),
        grid=grid,
        curve=curve,
    )
