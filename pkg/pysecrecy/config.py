"""System parameters, validation and config file ingestion."""

import dataclasses
import enum
import logging
import pathlib
import typing

import numpy as np

from .const import DEFAULT_GRID_POINTS, DEFAULT_NOISE_POWER, DEFAULT_TRIALS
from .converters import (
    AutoConverter,
    ChoiceConverter,
    TextConverter,
    decibel_converter,
    degree_converter,
    float_converter,
    float_list_converter,
    int_converter,
    int_list_converter,
)
from .exceptions import ConfigError

LOGGER = logging.getLogger(__name__)

MAX_SEED = 2**64


class PilotDesign(enum.Enum):
    """Uplink pilot families."""

    TIME_ORTHOGONAL = "time_orthogonal"
    UNITARY_OVERLAPPING = "unitary_overlapping"


@dataclasses.dataclass(frozen=True, kw_only=True)
class SystemConfig:
    """Every scalar parameter of the downlink model.

    Field names are the config file keys. ``p_tau``, ``t0`` and ``t_grid``
    set to None mean "auto" and are resolved by :func:`validate`.
    """

    N: int
    K: int
    N_E: int
    N_o: int
    B: int
    T: int
    P_T_dB: float
    phi: float
    sigma_psi_deg: float
    sigma_phi_deg: float
    beta: tuple[float, ...]
    beta_E: float = 1.0
    p_tau: float | None = None
    xi_UL: float = DEFAULT_NOISE_POWER
    xi_DL: float = DEFAULT_NOISE_POWER
    t0: int | None = None
    pilot_design: PilotDesign = PilotDesign.TIME_ORTHOGONAL
    trials: int = DEFAULT_TRIALS
    seed: int = 0
    t_grid: tuple[int, ...] | None = None

    def __post_init__(self):
        """Normalize sequence fields to tuples."""
        beta = self.beta

        if np.isscalar(beta):
            beta = (float(beta),) * self.K

        object.__setattr__(self, "beta", tuple(float(b) for b in beta))

        if self.t_grid is not None:
            object.__setattr__(
                self, "t_grid", tuple(int(t) for t in self.t_grid)
            )

        if isinstance(self.pilot_design, str):
            object.__setattr__(
                self, "pilot_design", PilotDesign(self.pilot_design)
            )


@dataclasses.dataclass(frozen=True)
class ValidatedConfig:
    """A checked config with every derived quantity cached.

    Unknown attributes are looked up on the raw config, so ``cfg.N`` works
    on both types.
    """

    config: SystemConfig
    P_T: float
    p_tau: float
    sigma_psi: float
    sigma_phi: float
    L: int
    t0: int
    t_grid: tuple[int, ...]
    t_weights: tuple[int, ...]
    p: float
    q: float
    warnings: tuple[str, ...] = ()

    def __getattr__(self, name: str) -> typing.Any:
        """Get a raw config field, or pass up the chain."""
        if name == "config" or "config" not in self.__dict__:
            raise AttributeError(name)

        return getattr(self.__dict__["config"], name)

    @property
    def var_psi(self) -> float:
        """Get the BS phase increment variance in rad^2."""
        return self.sigma_psi**2

    @property
    def var_phi(self) -> float:
        """Get the MT phase increment variance in rad^2."""
        return self.sigma_phi**2

    @property
    def var_sum(self) -> float:
        """Get the combined phase increment variance in rad^2."""
        return self.var_psi + self.var_phi

    @property
    def beta_array(self) -> np.ndarray:
        """Get the MT path losses as an array."""
        return np.asarray(self.config.beta, dtype=float)

    @property
    def data_slots(self) -> int:
        """Get the number of data slots T - B."""
        return self.config.T - self.config.B

    @property
    def antennas_per_lo(self) -> int:
        """Get the size of each LO antenna group."""
        return self.config.N // self.config.N_o

    @property
    def eve_bound_defined(self) -> bool:
        """Determine if L > N_E so the eavesdropper bound applies."""
        return self.L > self.config.N_E


def auto_t_grid(
    B: int, T: int, points: int = DEFAULT_GRID_POINTS
) -> tuple[int, ...]:
    """Centre slots of ``points`` near-equal blocks of B+1..T."""
    slots = np.arange(B + 1, T + 1)
    blocks = np.array_split(slots, min(points, len(slots)))

    return tuple(int(block[(len(block) - 1) // 2]) for block in blocks)


def slot_weights(
    t_grid: typing.Sequence[int], B: int, T: int
) -> tuple[int, ...]:
    """Count the data slots nearest to each grid point."""
    grid = np.asarray(t_grid)
    slots = np.arange(B + 1, T + 1)

    # argmin keeps the first minimum, so ties go to the earlier point
    nearest = np.abs(slots[:, None] - grid[None, :]).argmin(axis=1)

    return tuple(
        int(c) for c in np.bincount(nearest, minlength=len(grid))
    )


def _check(cfg: SystemConfig) -> list[str]:
    violations = []

    for name in ("N", "K", "N_E", "N_o", "B", "T", "trials"):
        if getattr(cfg, name) < 1:
            violations.append(f"{name} must be a positive integer")

    if cfg.N_o >= 1 and cfg.N % cfg.N_o != 0:
        violations.append("N mod N_o ≠ 0")

    if cfg.N - cfg.K <= 0:
        violations.append(f"L = N - K = {cfg.N - cfg.K} must be positive")

    if cfg.B < cfg.K:
        violations.append(f"B = {cfg.B} < K = {cfg.K}")

    if cfg.T <= cfg.B:
        violations.append(f"T = {cfg.T} must exceed B = {cfg.B}")

    if not 0.0 < cfg.phi <= 1.0:
        violations.append(f"phi = {cfg.phi} outside (0, 1]")

    if cfg.p_tau is not None and cfg.p_tau <= 0.0:
        violations.append(f"p_tau = {cfg.p_tau} must be positive")

    for name in ("sigma_psi_deg", "sigma_phi_deg", "xi_UL", "xi_DL"):
        if getattr(cfg, name) < 0.0:
            violations.append(f"{name} must be non-negative")

    if len(cfg.beta) != cfg.K:
        violations.append(
            f"beta has {len(cfg.beta)} entries, expected K = {cfg.K}"
        )

    if any(b < 0.0 for b in cfg.beta):
        violations.append("beta entries must be non-negative")

    if cfg.beta_E <= 0.0:
        violations.append("beta_E must be positive")

    if cfg.t0 is not None and not cfg.B + 1 <= cfg.t0 <= cfg.T:
        violations.append(f"t0 = {cfg.t0} outside [B+1, T]")

    if cfg.t_grid is not None:
        if len(cfg.t_grid) == 0:
            violations.append("t_grid is empty")
        elif any(not cfg.B + 1 <= t <= cfg.T for t in cfg.t_grid):
            violations.append("t_grid not a subset of {B+1..T}")

    if not 0 <= cfg.seed < MAX_SEED:
        violations.append("seed must be a 64-bit unsigned integer")

    return violations


def validate(
    cfg: SystemConfig | ValidatedConfig, require_eve_bound: bool = False
) -> ValidatedConfig:
    """Check every invariant and cache the derived quantities."""
    if isinstance(cfg, ValidatedConfig):
        cfg = cfg.config

    violations = _check(cfg)

    L = cfg.N - cfg.K
    warnings = []

    if L <= cfg.N_E:
        message = f"L={L} ≤ N_E, eve upper bound undefined"

        if require_eve_bound:
            violations.append(message)
        else:
            warnings.append(message)

    if violations:
        raise ConfigError(violations)

    for message in warnings:
        LOGGER.warning(message)

    P_T = decibel_converter.from_unit(cfg.P_T_dB)
    p_tau = cfg.p_tau if cfg.p_tau is not None else P_T / cfg.K
    t0 = cfg.t0 if cfg.t0 is not None else cfg.B + 1

    if cfg.t_grid is None:
        t_grid = auto_t_grid(cfg.B, cfg.T)
    else:
        t_grid = tuple(sorted(set(cfg.t_grid)))

    p = cfg.phi * P_T / cfg.K
    q = (1.0 - cfg.phi) * P_T / L if cfg.phi < 1.0 else 0.0

    return ValidatedConfig(
        config=cfg,
        P_T=P_T,
        p_tau=p_tau,
        sigma_psi=degree_converter.from_unit(cfg.sigma_psi_deg),
        sigma_phi=degree_converter.from_unit(cfg.sigma_phi_deg),
        L=L,
        t0=t0,
        t_grid=t_grid,
        t_weights=slot_weights(t_grid, cfg.B, cfg.T),
        p=p,
        q=q,
        warnings=tuple(warnings),
    )


def power_split(cfg: SystemConfig | ValidatedConfig) -> tuple[float, float]:
    """Get the per-MT data power p and per-column AN power q."""
    if not isinstance(cfg, ValidatedConfig):
        cfg = validate(cfg)

    return cfg.p, cfg.q


def replace(cfg: SystemConfig, **changes: typing.Any) -> SystemConfig:
    """Copy a config with some fields changed."""
    return dataclasses.replace(cfg, **changes)


FIELDS: dict[str, TextConverter] = {
    "N": int_converter,
    "K": int_converter,
    "N_E": int_converter,
    "N_o": int_converter,
    "B": int_converter,
    "T": int_converter,
    "P_T_dB": float_converter,
    "phi": float_converter,
    "p_tau": AutoConverter(float_converter),
    "sigma_psi_deg": float_converter,
    "sigma_phi_deg": float_converter,
    "beta": float_list_converter,
    "beta_E": float_converter,
    "xi_UL": float_converter,
    "xi_DL": float_converter,
    "pilot_design": ChoiceConverter(PilotDesign),
    "trials": int_converter,
    "seed": int_converter,
    "t0": AutoConverter(int_converter),
    "t_grid": AutoConverter(int_list_converter),
}

OPTIONAL_FIELDS = frozenset({"xi_UL", "xi_DL"})


def parse_config(text: str) -> SystemConfig:
    """Parse flat ``key = value`` config text."""
    values: dict[str, typing.Any] = {}
    errors = []

    for number, raw_line in enumerate(text.splitlines(), start=1):
        line = raw_line.split("#", 1)[0].strip()

        if line == "":
            continue

        if "=" not in line:
            errors.append(f"line {number}: expected 'key = value'")
            continue

        key, _, value = (part.strip() for part in line.partition("="))

        if key not in FIELDS:
            errors.append(f"line {number}: unknown key '{key}'")
            continue

        if key in values:
            errors.append(f"line {number}: duplicate key '{key}'")
            continue

        try:
            values[key] = FIELDS[key].from_text(value)
        except ValueError as err:
            errors.append(f"line {number}: {key}: {err}")

    missing = [
        key
        for key in FIELDS
        if key not in values and key not in OPTIONAL_FIELDS
    ]

    if missing:
        errors.append(f"missing required keys: {', '.join(missing)}")

    if errors:
        raise ConfigError(errors)

    return SystemConfig(**values)


def load_config(path: str | pathlib.Path) -> SystemConfig:
    """Load a config file."""
    path = pathlib.Path(path)

    try:
        text = path.read_text(encoding="utf-8")
    except OSError as err:
        raise ConfigError(f"cannot read config '{path}': {err}") from err

    LOGGER.debug(f"Parsing config '{path}'.")

    return parse_config(text)


def format_config(cfg: SystemConfig) -> str:
    """Render a config as ``key = value`` text."""
    return "".join(
        f"{key} = {converter.to_text(getattr(cfg, key))}\n"
        for key, converter in FIELDS.items()
    )
