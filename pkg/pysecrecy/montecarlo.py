"""Monte Carlo estimation of the rate moments, eavesdropper and secrecy."""

import asyncio
import concurrent.futures
import dataclasses
import logging
import typing

import numpy as np
import scipy.linalg

from .bounds import (
    RateVariant,
    rate_lower_bound,
    weighted_average,
    weighted_secrecy,
)
from .config import ValidatedConfig
from .const import TRIAL_CHUNK_SIZE
from .exceptions import (
    EveCapacityUnboundedError,
    NumericalError,
    SingularMatrixError,
)
from .precoding import Precoders, build_precoders
from .report import SecrecyRow, analytic_columns, make_row
from .stochastic import (
    ChannelSet,
    rotate_channels,
    sample_channels,
    sample_phase_trajectories,
    trial_rng,
)
from .training import PilotSet, train

LOGGER = logging.getLogger(__name__)

# Per-trial samples kept for every (slot, MT)
RE_GAIN, IM_GAIN, DESIRED_POWER, INTERFERENCE, AN_LEAKAGE = range(5)
SAMPLE_COUNT = 5


@dataclasses.dataclass(frozen=True, eq=False)
class TrialRecord:
    """Inner products of one channel and phase-noise realization."""

    trial_index: int
    t_grid: tuple[int, ...]

    cross_gain: np.ndarray
    """g_k^H(t) f_l, shape (len(t_grid), K, K) indexed [t, k, l]."""

    an_leakage: np.ndarray
    """g_k^H(t) A A^H g_k(t), shape (len(t_grid), K)."""

    eve_gamma: np.ndarray | None = None
    """Eavesdropper SINR against each MT's stream, shape (K,)."""

    def samples(self) -> np.ndarray:
        """Get the SINR ingredients, shape (len(t_grid), K, 5)."""
        K = self.cross_gain.shape[1]
        diag = self.cross_gain[:, np.arange(K), np.arange(K)]
        power = np.abs(self.cross_gain) ** 2
        desired = np.abs(diag) ** 2

        return np.stack(
            (
                diag.real,
                diag.imag,
                desired,
                power.sum(axis=2) - desired,
                self.an_leakage,
            ),
            axis=-1,
        )


@dataclasses.dataclass(frozen=True, eq=False)
class MomentEstimates:
    """Trial averages of the SINR ingredients per slot and MT."""

    t_grid: tuple[int, ...]
    mean: np.ndarray
    """Means, shape (len(t_grid), K, 5)."""

    cov: np.ndarray
    """Sample covariance across trials, shape (len(t_grid), K, 5, 5)."""

    M: int
    stderr_valid: bool = True

    @property
    def mean_gain(self) -> np.ndarray:
        """Get the estimate of E[g_k^H(t) f_k]."""
        return self.mean[..., RE_GAIN] + 1j * self.mean[..., IM_GAIN]

    @property
    def second_moment_kk(self) -> np.ndarray:
        """Get the estimate of E[|g_k^H(t) f_k|^2]."""
        return self.mean[..., DESIRED_POWER]

    @property
    def interference_sum(self) -> np.ndarray:
        """Get the estimate of the summed multiuser interference power."""
        return self.mean[..., INTERFERENCE]

    @property
    def an_leakage_mean(self) -> np.ndarray:
        """Get the estimate of E[g_k^H(t) A A^H g_k(t)]."""
        return self.mean[..., AN_LEAKAGE]

    @property
    def stderr(self) -> np.ndarray:
        """Get the standard error of every mean, shape of ``mean``."""
        variances = np.diagonal(self.cov, axis1=-2, axis2=-1)

        return np.sqrt(np.maximum(variances, 0.0) / self.M)

    def slot_index(self, t: int) -> int:
        """Get the position of slot t in the grid."""
        try:
            return self.t_grid.index(t)
        except ValueError:
            raise KeyError(f"Slot {t} is not on the simulated grid.") from None


class MonteCarloRate(typing.NamedTuple):
    """Simulated rate of one MT in one slot."""

    value: float
    stderr: float
    clamped: bool


@dataclasses.dataclass(frozen=True, eq=False)
class EveEstimate:
    """Simulated eavesdropper SINR and capacity."""

    gamma: np.ndarray
    """Samples of gamma_E, shape (M, K)."""

    capacity: np.ndarray
    """Mean of log2(1 + gamma_E) per MT stream, shape (K,)."""

    stderr: np.ndarray
    M: int


def _eve_gamma(
    cfg: ValidatedConfig, precoders: Precoders, channels: ChannelSet
) -> np.ndarray:
    G_E = channels.G_E
    inside = precoders.basis.conj().T @ G_E

    # G_E^H A A^H G_E through the projector identity
    M_E = G_E.conj().T @ G_E - inside.conj().T @ inside
    g_E = precoders.F.conj().T @ G_E

    try:
        factor = scipy.linalg.cho_factor(M_E, lower=True)
    except np.linalg.LinAlgError as err:
        raise SingularMatrixError(
            f"Eavesdropper AN covariance is singular: {err}"
        ) from err

    solved = scipy.linalg.cho_solve(factor, g_E.conj().T)
    quad = np.real(np.sum(g_E.T * solved, axis=0))

    return cfg.p / cfg.q * np.maximum(quad, 0.0)


def run_trial(
    cfg: ValidatedConfig, pilots: PilotSet, trial_index: int
) -> TrialRecord:
    """Simulate one full realization on its own RNG stream."""
    rng = trial_rng(cfg.seed, trial_index)

    channels = sample_channels(cfg, rng)
    slots = max(max(cfg.t_grid), cfg.t0, cfg.B)
    traj = sample_phase_trajectories(cfg, rng, slots)

    outcome = train(cfg, pilots, channels, traj, rng)
    precoders = build_precoders(cfg, outcome.g_hat)

    rotated = rotate_channels(channels.g, traj, cfg.t_grid)

    eve_gamma = None

    if cfg.q > 0.0 and cfg.N_E <= cfg.L:
        eve_gamma = _eve_gamma(cfg, precoders, channels)

    return TrialRecord(
        trial_index=trial_index,
        t_grid=tuple(cfg.t_grid),
        cross_gain=rotated.conj() @ precoders.F,
        an_leakage=precoders.an_leakage(rotated),
        eve_gamma=eve_gamma,
    )


class TrialRunner:
    """Run trials in chunks on a thread pool, keeping trial order."""

    _cfg: ValidatedConfig
    _pilots: PilotSet
    _threads: int | None
    _chunk_size: int

    def __init__(
        self,
        cfg: ValidatedConfig,
        pilots: PilotSet,
        threads: int = 0,
        chunk_size: int = TRIAL_CHUNK_SIZE,
    ):
        """Initialize the runner; threads=0 lets the pool pick."""
        if threads < 0:
            raise ValueError("Thread count must not be negative.")

        if chunk_size < 1:
            raise ValueError("Chunk size must be positive.")

        self._cfg = cfg
        self._pilots = pilots
        self._threads = threads or None
        self._chunk_size = chunk_size

    def _run_chunk(self, start: int, stop: int) -> list[TrialRecord]:
        LOGGER.debug(f"Running trials {start}..{stop - 1}.")

        return [
            run_trial(self._cfg, self._pilots, index)
            for index in range(start, stop)
        ]

    async def run(
        self,
        trials: int | None = None,
        executor: concurrent.futures.Executor | None = None,
    ) -> list[TrialRecord]:
        """Run trials 0..trials-1 and return their records in order."""
        trials = self._cfg.trials if trials is None else trials

        if trials < 1:
            raise ValueError("At least one trial is needed.")

        # factor Sigma before the workers share it
        self._pilots.solve(np.eye(self._pilots.B))

        if executor is None:
            with concurrent.futures.ThreadPoolExecutor(
                max_workers=self._threads
            ) as owned:
                return await self.run(trials, owned)

        loop = asyncio.get_running_loop()
        bounds = [
            (start, min(start + self._chunk_size, trials))
            for start in range(0, trials, self._chunk_size)
        ]

        LOGGER.debug(f"Dispatching {trials} trials in {len(bounds)} chunks.")

        # gather keeps submission order, which is trial order
        chunks = await asyncio.gather(
            *(
                loop.run_in_executor(executor, self._run_chunk, start, stop)
                for start, stop in bounds
            )
        )

        return [record for chunk in chunks for record in chunk]


def run_trials(
    cfg: ValidatedConfig,
    pilots: PilotSet,
    trials: int | None = None,
    threads: int = 0,
) -> list[TrialRecord]:
    """Run trials synchronously."""
    return asyncio.run(TrialRunner(cfg, pilots, threads).run(trials))


def estimate_moments(
    records: typing.Sequence[TrialRecord],
) -> MomentEstimates:
    """Average the SINR ingredients across trials.

    Records are reduced in trial-index order. With a single trial the
    standard errors are reported as zero and flagged invalid.
    """
    if len(records) == 0:
        raise ValueError("No trials to average.")

    ordered = sorted(records, key=lambda record: record.trial_index)
    samples = np.stack([record.samples() for record in ordered])

    M = samples.shape[0]
    mean = samples.mean(axis=0)

    if M < 2:
        LOGGER.warning("Single trial: standard errors are undefined.")

        cov = np.zeros(mean.shape + (SAMPLE_COUNT,))
    else:
        centred = samples - mean
        cov = np.einsum("mgki,mgkj->gkij", centred, centred) / (M - 1)

    return MomentEstimates(
        t_grid=ordered[0].t_grid,
        mean=mean,
        cov=cov,
        M=M,
        stderr_valid=M >= 2,
    )

def mc_rate(
    cfg: ValidatedConfig, moments: MomentEstimates, k: int, t: int
) -> MonteCarloRate:
    """Assemble the SINR lower bound from simulated moments."""
    x = moments.mean[moments.slot_index(t), k]
    cov = moments.cov[moments.slot_index(t), k]
    p, q = cfg.p, cfg.q

    gain2 = x[RE_GAIN] ** 2 + x[IM_GAIN] ** 2
    variance = x[DESIRED_POWER] - gain2
    clamped = variance < 0.0

    if clamped:
        LOGGER.warning(
            f"Negative desired-signal variance {variance:.3e} at k={k},"
            f" t={t}; clamped to zero."
        )

        variance = 0.0

    numerator = p * gain2
    denominator = (
        p * (x[INTERFERENCE] + variance) + q * x[AN_LEAKAGE] + cfg.xi_DL
    )

    if not denominator > 0.0:
        raise NumericalError(
            f"Non-positive SINR denominator {denominator:.6g}."
        )

    gamma = numerator / denominator
    value = float(np.log2(1.0 + gamma))

    if not moments.stderr_valid:
        return MonteCarloRate(value, 0.0, bool(clamped))

    # Delta method on the five trial means
    grad = np.zeros(SAMPLE_COUNT)
    shrink = 0.0 if clamped else p * gain2

    grad[RE_GAIN] = 2.0 * p * x[RE_GAIN] * (denominator + shrink)
    grad[IM_GAIN] = 2.0 * p * x[IM_GAIN] * (denominator + shrink)
    grad[DESIRED_POWER] = 0.0 if clamped else -numerator * p
    grad[INTERFERENCE] = -numerator * p
    grad[AN_LEAKAGE] = -numerator * q
    grad /= denominator**2 * (1.0 + gamma) * np.log(2.0)

    spread = float(grad @ cov @ grad) / moments.M

    stderr = float(np.sqrt(max(spread, 0.0)))

    return MonteCarloRate(value, stderr, bool(clamped))


def simulate_eve(
    cfg: ValidatedConfig, records: typing.Sequence[TrialRecord]
) -> EveEstimate:
    """Estimate the eavesdropper capacity from the trial records."""
    if cfg.q <= 0.0:
        raise EveCapacityUnboundedError(
            "no AN: eavesdropper capacity unbounded"
        )

    if cfg.N_E > cfg.L:
        raise SingularMatrixError(
            f"N_E={cfg.N_E} > L={cfg.L}: eavesdropper AN covariance is"
            " singular."
        )

    if len(records) == 0:
        raise ValueError("No trials to average.")

    ordered = sorted(records, key=lambda record: record.trial_index)

    if any(record.eve_gamma is None for record in ordered):
        raise ValueError("Records carry no eavesdropper samples.")

    gamma = np.stack([record.eve_gamma for record in ordered])
    capacity_samples = np.log2(1.0 + gamma)

    M = gamma.shape[0]

    if M < 2:
        stderr = np.zeros(gamma.shape[1])
    else:
        stderr = capacity_samples.std(axis=0, ddof=1) / np.sqrt(M)

    return EveEstimate(
        gamma=gamma,
        capacity=capacity_samples.mean(axis=0),
        stderr=stderr,
        M=M,
    )


def mc_slot_rates(
    cfg: ValidatedConfig, moments: MomentEstimates, k: int
) -> list[MonteCarloRate]:
    """Get the simulated rate at every point of t_grid."""
    return [mc_rate(cfg, moments, k, t) for t in cfg.t_grid]


def mc_secrecy(
    cfg: ValidatedConfig,
    moments: MomentEstimates,
    eve: EveEstimate | None,
    k: int = 0,
    pilots: PilotSet | None = None,
    variant: RateVariant = RateVariant.COMPOSED,
    **row: typing.Any,
) -> SecrecyRow:
    """Combine simulated rates and eavesdropper capacity into a row.

    Passing ``pilots`` adds the closed-form values beside the simulated
    ones. ``eve`` is None when the eavesdropper was not simulated; with
    no AN power the capacity is unbounded and the secrecy rate is zero.
    """
    rates = mc_slot_rates(cfg, moments, k)
    values = np.array([rate.value for rate in rates])
    errors = np.array([rate.stderr for rate in rates])

    columns: dict[str, typing.Any] = {
        "rate_mc": weighted_average(cfg, values),
        # slot-weighted mean of per-slot stderrs bounds the true stderr
        "stderr_rate": weighted_average(cfg, errors),
        "M": moments.M,
        "seed": cfg.seed,
    }

    if eve is not None:
        columns["Ce_mc"] = float(eve.capacity[k])
        columns["stderr_Ce"] = float(eve.stderr[k])
        columns["secrecy_mc"] = weighted_secrecy(
            cfg, values, float(eve.capacity[k])
        )
    elif cfg.q <= 0.0:
        columns["Ce_mc"] = float("inf")
        columns["secrecy_mc"] = 0.0

    if pilots is not None:
        columns.update(analytic_columns(cfg, pilots, k, variant))

    return make_row(cfg, k, **row, **columns)


def rate_agreement(
    cfg: ValidatedConfig,
    pilots: PilotSet,
    moments: MomentEstimates,
    mts: typing.Iterable[int],
    variant: RateVariant = RateVariant.COMPOSED,
) -> float:
    """Get the largest relative gap between simulated and closed-form rates.

    Every listed MT is compared at every point of t_grid.
    """
    gap = 0.0

    for k in mts:
        for t in cfg.t_grid:
            analytic = rate_lower_bound(cfg, pilots, k, t, variant)
            simulated = mc_rate(cfg, moments, k, t).value

            if analytic > 0.0:
                gap = max(gap, abs(simulated - analytic) / analytic)
            elif simulated > 0.0:
                gap = float("inf")

    LOGGER.debug(f"Largest analytic-vs-MC rate gap {gap:.4g}.")

    return gap
