"""Secrecy reports, CSV serialization and plot data."""

import collections
import csv
import dataclasses
import io
import logging
import math
import os
import pathlib
import tempfile
import typing

from .bounds import (
    RateVariant,
    eve_capacity_upper,
    slot_rates,
    weighted_average,
    weighted_secrecy,
)
from .config import ValidatedConfig
from .converters import format_float
from .exceptions import (
    EveBoundUndefinedError,
    EveCapacityUnboundedError,
    OutputError,
)
from .training import PilotSet

LOGGER = logging.getLogger(__name__)

CONFIG_COLUMNS: tuple[str, ...] = (
    "sweep_variable",
    "sweep_value",
    "mt",
    "N",
    "K",
    "N_E",
    "N_o",
    "B",
    "T",
    "t0",
    "P_T_dB",
    "phi",
    "p_tau",
    "sigma_psi_deg",
    "sigma_phi_deg",
    "beta_k",
    "beta_E",
    "xi_UL",
    "xi_DL",
    "pilot_design",
)

RESULT_COLUMNS: tuple[str, ...] = (
    "rate_analytic",
    "Ce_bound",
    "secrecy_analytic",
    "rate_mc",
    "Ce_mc",
    "secrecy_mc",
    "stderr_rate",
    "stderr_Ce",
    "phi_star",
    "M",
    "seed",
)

COLUMNS: tuple[str, ...] = CONFIG_COLUMNS + RESULT_COLUMNS


@dataclasses.dataclass(frozen=True)
class SecrecyRow:
    """One (sweep value, MT) result with the full config echoed."""

    sweep_variable: str
    sweep_value: float | None
    mt: int
    N: int
    K: int
    N_E: int
    N_o: int
    B: int
    T: int
    t0: int
    P_T_dB: float
    phi: float
    p_tau: float
    sigma_psi_deg: float
    sigma_phi_deg: float
    beta_k: float
    beta_E: float
    xi_UL: float
    xi_DL: float
    pilot_design: str
    rate_analytic: float | None = None
    Ce_bound: float | None = None
    secrecy_analytic: float | None = None
    rate_mc: float | None = None
    Ce_mc: float | None = None
    secrecy_mc: float | None = None
    stderr_rate: float | None = None
    stderr_Ce: float | None = None
    phi_star: float | None = None
    M: int | None = None
    seed: int | None = None

    def secrecy_band(self) -> float | None:
        """Get the standard error used for the MC secrecy band.

        Combines the rate and eavesdropper stderrs, scaled by the share of
        data slots in the block.
        """
        if self.stderr_rate is None or self.stderr_Ce is None:
            return None

        return (
            math.hypot(self.stderr_rate, self.stderr_Ce)
            * (self.T - self.B)
            / self.T
        )


def make_row(
    cfg: ValidatedConfig,
    k: int,
    sweep_variable: str = "",
    sweep_value: float | None = None,
    **results: typing.Any,
) -> SecrecyRow:
    """Build a row for MT k (0-based) echoing every config scalar."""
    return SecrecyRow(
        sweep_variable=sweep_variable,
        sweep_value=sweep_value,
        mt=k + 1,
        N=cfg.N,
        K=cfg.K,
        N_E=cfg.N_E,
        N_o=cfg.N_o,
        B=cfg.B,
        T=cfg.T,
        t0=cfg.t0,
        P_T_dB=cfg.P_T_dB,
        phi=cfg.phi,
        p_tau=cfg.p_tau,
        sigma_psi_deg=cfg.sigma_psi_deg,
        sigma_phi_deg=cfg.sigma_phi_deg,
        beta_k=cfg.config.beta[k],
        beta_E=cfg.beta_E,
        xi_UL=cfg.xi_UL,
        xi_DL=cfg.xi_DL,
        pilot_design=cfg.pilot_design.value,
        **results,
    )


def analytic_columns(
    cfg: ValidatedConfig,
    pilots: PilotSet,
    k: int,
    variant: RateVariant = RateVariant.COMPOSED,
) -> dict[str, float | None]:
    """Get the closed-form rate, eavesdropper and secrecy cells of MT k.

    The eavesdropper and secrecy cells stay empty when L <= N_E.
    """
    rates = slot_rates(cfg, pilots, k, variant)
    columns: dict[str, float | None] = {
        "rate_analytic": weighted_average(cfg, rates)
    }

    try:
        eve_capacity = eve_capacity_upper(cfg)
    except EveBoundUndefinedError as err:
        LOGGER.warning(f"{err}")

        return columns
    except EveCapacityUnboundedError as err:
        LOGGER.warning(f"{err}")

        columns["Ce_bound"] = float("inf")
        columns["secrecy_analytic"] = 0.0

        return columns

    columns["Ce_bound"] = eve_capacity
    columns["secrecy_analytic"] = weighted_secrecy(cfg, rates, eve_capacity)

    return columns


def _cell(val: typing.Any) -> str:
    if val is None:
        return ""

    if isinstance(val, bool):
        return str(int(val))

    if isinstance(val, int):
        return str(val)

    if isinstance(val, float):
        return format_float(val)

    return str(val)


class SecrecyReport:
    """Ordered collection of secrecy rows."""

    _rows: list[SecrecyRow]

    def __init__(self, rows: typing.Iterable[SecrecyRow] = ()):
        """Initialize the report."""
        self._rows = list(rows)

    def __iter__(self) -> typing.Iterator[SecrecyRow]:
        """Iterate over rows in insertion order."""
        return iter(self._rows)

    def __len__(self) -> int:
        """Get the number of rows."""
        return len(self._rows)

    def __getitem__(self, index: int) -> SecrecyRow:
        """Get a row."""
        return self._rows[index]

    def append(self, row: SecrecyRow) -> None:
        """Add a row."""
        self._rows.append(row)

    def extend(self, rows: typing.Iterable[SecrecyRow]) -> None:
        """Add several rows."""
        self._rows.extend(rows)

    @property
    def rows(self) -> list[SecrecyRow]:
        """Get a copy of the rows."""
        return list(self._rows)

    def to_csv(self) -> str:
        """Render the report as CSV text with the fixed column order."""
        buffer = io.StringIO()
        writer = csv.writer(buffer, lineterminator="\n")

        writer.writerow(COLUMNS)

        for row in self._rows:
            writer.writerow(_cell(getattr(row, col)) for col in COLUMNS)

        return buffer.getvalue()

    def write_csv(self, path: str | pathlib.Path) -> pathlib.Path:
        """Write the report to a CSV file."""
        return write_atomic(path, self.to_csv())


def read_csv(path: str | pathlib.Path) -> list[dict[str, str]]:
    """Read a report CSV back as raw string cells."""
    with open(path, newline="", encoding="utf-8") as handle:
        return list(csv.DictReader(handle))


def write_atomic(path: str | pathlib.Path, text: str) -> pathlib.Path:
    """Write text through a temp file renamed into place."""
    path = pathlib.Path(path)

    try:
        path.parent.mkdir(parents=True, exist_ok=True)

        with tempfile.NamedTemporaryFile(
            "w",
            encoding="utf-8",
            dir=path.parent,
            prefix=f".{path.name}.",
            delete=False,
        ) as handle:
            handle.write(text)

        os.replace(handle.name, path)
    except OSError as err:
        raise OutputError(f"cannot write '{path}': {err}") from err

    LOGGER.debug(f"Wrote '{path}'.")

    return path


def _plot_value(val: float | None) -> str:
    return "nan" if val is None else format_float(val)


def emit_plotdata(
    report: SecrecyReport, directory: str | pathlib.Path
) -> list[pathlib.Path]:
    """Write whitespace-delimited secrecy curves, one file per (N_o, K).

    Reports holding MTs other than MT 1 get one extra file per MT.
    """
    if len(report) == 0:
        raise ValueError("Empty report.")

    directory = pathlib.Path(directory)
    curves: dict[tuple[int, int, int], list[SecrecyRow]] = (
        collections.defaultdict(list)
    )

    for row in report:
        curves[(row.N_o, row.K, row.mt)].append(row)

    paths = []

    for (N_o, K, mt), rows in curves.items():
        name = f"plot_No{N_o}_K{K}"

        if mt != 1:
            name += f"_mt{mt}"

        variable = rows[0].sweep_variable or "phi"
        lines = [
            f"# N_o={N_o} K={K} mt={mt} x={variable}",
            "# x secrecy_analytic secrecy_mc mc_minus_2se mc_plus_2se",
        ]

        for row in rows:
            x = row.sweep_value if row.sweep_value is not None else row.phi
            band = row.secrecy_band()

            if row.secrecy_mc is None or band is None:
                low = high = None
            else:
                low = max(row.secrecy_mc - 2.0 * band, 0.0)
                high = row.secrecy_mc + 2.0 * band

            lines.append(
                " ".join(
                    _plot_value(val)
                    for val in (
                        x,
                        row.secrecy_analytic,
                        row.secrecy_mc,
                        low,
                        high,
                    )
                )
            )

        text = "\n".join(lines) + "\n"

        paths.append(write_atomic(directory / f"{name}.dat", text))

    LOGGER.info(f"Wrote {len(paths)} plot data files to '{directory}'.")

    return paths
