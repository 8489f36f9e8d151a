"""Random channels, Wiener phase noise and seeding discipline."""

import dataclasses
import logging
import typing

import numpy as np

from .config import ValidatedConfig

LOGGER = logging.getLogger(__name__)


def trial_rng(seed: int, trial_index: int) -> np.random.Generator:
    """Get the RNG stream owned by one Monte Carlo trial.

    Philox is counter-based and the trial index is mixed into the seed
    sequence's spawn key, so each trial replays on its own regardless of
    which worker runs it or in what order.
    """
    sequence = np.random.SeedSequence(seed, spawn_key=(trial_index,))

    return np.random.Generator(np.random.Philox(sequence))


def complex_gaussian(
    rng: np.random.Generator,
    shape: int | tuple[int, ...],
    variance: float | np.ndarray = 1.0,
) -> np.ndarray:
    """Draw circularly symmetric complex Gaussian samples."""
    scale = np.sqrt(np.asarray(variance, dtype=float) / 2.0)
    samples = rng.standard_normal(shape) + 1j * rng.standard_normal(shape)

    return scale * samples


@dataclasses.dataclass(frozen=True, eq=False)
class ChannelSet:
    """Block-fading channels of one coherence block."""

    g: np.ndarray
    """MT channels, shape (K, N); row k is g_k."""

    G_E: np.ndarray
    """Eavesdropper channel, shape (N, N_E)."""


@dataclasses.dataclass(frozen=True, eq=False)
class PhaseTrajectories:
    """Wiener phase processes in radians; column t-1 holds slot t."""

    psi: np.ndarray
    """BS LO phases, shape (N_o, slots)."""

    phi_mt: np.ndarray
    """MT phases, shape (K, slots)."""

    @property
    def slots(self) -> int:
        """Get the number of slots covered."""
        return self.psi.shape[1]


@dataclasses.dataclass(frozen=True, eq=False)
class PhaseRotation:
    """Diagonal of Theta_k(t) stored as N_o LO angles plus one MT angle."""

    lo_angles: np.ndarray
    mt_angle: float

    def angles(self, N: int) -> np.ndarray:
        """Expand to the N per-antenna angles."""
        group = N // len(self.lo_angles)

        return np.repeat(self.lo_angles, group) + self.mt_angle

    def diagonal(self, N: int) -> np.ndarray:
        """Expand to the N unit-modulus diagonal entries."""
        return np.exp(1j * self.angles(N))

    def apply(self, vec: np.ndarray) -> np.ndarray:
        """Rotate an N-vector."""
        return self.diagonal(len(vec)) * vec


def sample_channels(
    cfg: ValidatedConfig, rng: np.random.Generator
) -> ChannelSet:
    """Draw the Rayleigh MT channels and the eavesdropper channel."""
    variances = cfg.beta_array[:, None]

    g = complex_gaussian(rng, (cfg.K, cfg.N), variances)
    G_E = complex_gaussian(rng, (cfg.N, cfg.N_E), cfg.beta_E)

    return ChannelSet(g=g, G_E=G_E)


def _wiener(
    rng: np.random.Generator, streams: int, slots: int, sigma: float
) -> np.ndarray:
    increments = rng.normal(0.0, sigma, (streams, slots - 1))
    walk = np.zeros((streams, slots))

    np.cumsum(increments, axis=1, out=walk[:, 1:])

    return walk


def sample_phase_trajectories(
    cfg: ValidatedConfig,
    rng: np.random.Generator,
    slots: int | None = None,
) -> PhaseTrajectories:
    """Draw the BS LO and MT phase walks, starting at zero in slot 1."""
    slots = cfg.T if slots is None else slots

    psi = _wiener(rng, cfg.N_o, slots, cfg.sigma_psi)
    phi_mt = _wiener(rng, cfg.K, slots, cfg.sigma_phi)

    return PhaseTrajectories(psi=psi, phi_mt=phi_mt)


def theta_matrix(traj: PhaseTrajectories, k: int, t: int) -> PhaseRotation:
    """Get the phase rotation of MT k (0-based) in slot t (1-based)."""
    if not 1 <= t <= traj.slots:
        raise IndexError(f"Slot {t} outside 1..{traj.slots}.")

    return PhaseRotation(
        lo_angles=traj.psi[:, t - 1].copy(),
        mt_angle=float(traj.phi_mt[k, t - 1]),
    )


def rotate_channels(
    g: np.ndarray, traj: PhaseTrajectories, slots: typing.Sequence[int]
) -> np.ndarray:
    """Get Theta_k(t) g_k for every slot, shape (len(slots), K, N)."""
    index = np.asarray(slots) - 1
    group = g.shape[1] // traj.psi.shape[0]

    bs_angles = np.repeat(traj.psi[:, index], group, axis=0).T
    mt_angles = traj.phi_mt[:, index].T

    angles = bs_angles[:, None, :] + mt_angles[:, :, None]

    return np.exp(1j * angles) * g[None, :, :]
