"""Matched-filter data precoder and null-space AN precoder."""

import dataclasses
import functools
import logging

import numpy as np
import scipy.linalg

from .config import ValidatedConfig
from .const import RANK_TOLERANCE
from .exceptions import RankDeficientError

LOGGER = logging.getLogger(__name__)


def _decompose(g_hat: np.ndarray, mode: str) -> np.ndarray:
    """QR of the N x K estimate matrix with a full-rank check."""
    Q, R = scipy.linalg.qr(g_hat.T, mode=mode)

    diag = np.abs(np.diag(R))

    if diag.size == 0 or diag.min() <= RANK_TOLERANCE * diag.max():
        raise RankDeficientError(
            "Estimated channel matrix does not have full column rank."
        )

    return Q


def mf_precoder(g_hat: np.ndarray) -> np.ndarray:
    """Get F with columns g_hat_k / ||g_hat_k||, shape (N, K)."""
    norms = np.linalg.norm(g_hat, axis=1)

    if np.any(norms == 0.0):
        raise RankDeficientError("Zero-norm channel estimate.")

    return (g_hat / norms[:, None]).T


def signal_basis(g_hat: np.ndarray) -> np.ndarray:
    """Get an orthonormal basis of span(G_hat), shape (N, K)."""
    return _decompose(g_hat, "economic")


def ns_an_precoder(g_hat: np.ndarray) -> np.ndarray:
    """Get an orthonormal basis A of the complement of span(G_hat).

    Any such basis serves, since the AN vector is isotropic.
    """
    K = g_hat.shape[0]

    return _decompose(g_hat, "full")[:, K:]


def an_leakage_power(basis: np.ndarray, vectors: np.ndarray) -> np.ndarray:
    """Get v^H A A^H v through the projector identity.

    A A^H = I - Q Q^H with Q = ``basis``, so the cost is O(N K) per vector.
    ``vectors`` has shape (..., N).
    """
    total = np.sum(np.abs(vectors) ** 2, axis=-1)
    inside = np.sum(np.abs(vectors @ basis.conj()) ** 2, axis=-1)

    return total - inside


@dataclasses.dataclass(frozen=True, eq=False)
class Precoders:
    """Precoders designed at t0 and used for the whole data phase."""

    F: np.ndarray
    """MF data precoder, shape (N, K)."""

    basis: np.ndarray
    """Orthonormal basis of span(G_hat), shape (N, K)."""

    g_hat: np.ndarray
    p: float
    q: float

    @functools.cached_property
    def A(self) -> np.ndarray:
        """Get the NS AN precoder, shape (N, N - K)."""
        return ns_an_precoder(self.g_hat)

    @property
    def L(self) -> int:
        """Get the number of AN streams."""
        return self.F.shape[0] - self.F.shape[1]

    def an_leakage(self, vectors: np.ndarray) -> np.ndarray:
        """Get the AN leakage power v^H A A^H v for each vector."""
        return an_leakage_power(self.basis, vectors)


def build_precoders(cfg: ValidatedConfig, g_hat: np.ndarray) -> Precoders:
    """Design both precoders from the estimates at t0."""
    return Precoders(
        F=mf_precoder(g_hat),
        basis=signal_basis(g_hat),
        g_hat=g_hat,
        p=cfg.p,
        q=cfg.q,
    )


def transmit_signal(
    precoders: Precoders, s: np.ndarray, z: np.ndarray
) -> np.ndarray:
    """Get x = sqrt(p) F s + sqrt(q) A z.

    ``s`` and ``z`` may carry extra trailing columns, one per draw.
    """
    x = np.sqrt(precoders.p) * (precoders.F @ s)

    if precoders.q > 0.0:
        x = x + np.sqrt(precoders.q) * (precoders.A @ z)

    return x


def received_signal(
    channel: np.ndarray, x: np.ndarray, noise: complex | np.ndarray = 0.0
) -> complex | np.ndarray:
    """Get the downlink sample g_k^H(t) x + noise at one MT."""
    return channel.conj() @ x + noise
