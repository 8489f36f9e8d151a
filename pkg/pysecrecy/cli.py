"""Command line experiment runner."""

import argparse
import asyncio
import concurrent.futures
import dataclasses
import enum
import logging
import pathlib
import sys
import typing

import numpy as np

from .bounds import RateVariant, optimize_phi, phi_grid
from .config import (
    SystemConfig,
    ValidatedConfig,
    load_config,
    replace,
    validate,
)
from .const import (
    DEFAULT_AGREEMENT_TOLERANCE,
    DEFAULT_PHI_START,
    DEFAULT_PHI_STEP,
    DEFAULT_PHI_STOP,
    EXIT_AGREEMENT_FAILED,
    EXIT_CONFIG_ERROR,
    EXIT_NUMERICAL_ERROR,
    EXIT_OK,
    EXIT_OUTPUT_ERROR,
)
from .converters import float_converter, float_list_converter, format_float
from .exceptions import (
    ConfigError,
    NumericalError,
    OutputError,
    SecrecyException,
)
from .montecarlo import (
    EveEstimate,
    TrialRecord,
    TrialRunner,
    estimate_moments,
    mc_secrecy,
    rate_agreement,
    simulate_eve,
)
from .report import (
    SecrecyReport,
    SecrecyRow,
    analytic_columns,
    emit_plotdata,
    make_row,
)
from .training import make_pilots

LOGGER = logging.getLogger(__name__)

LOG_FORMAT = "%(asctime)s.%(msecs)03d [%(threadName)s][%(name)s] %(message)s"

SWEEP_VARIABLES: tuple[str, ...] = ("phi", "sigma_deg", "N_E", "N_o", "K")


class Mode(enum.Enum):
    """Which evaluations a run performs."""

    ANALYTIC = "analytic"
    MC = "mc"
    BOTH = "both"

    @property
    def analytic(self) -> bool:
        """Determine if the closed forms are evaluated."""
        return self is not Mode.MC

    @property
    def simulated(self) -> bool:
        """Determine if Monte Carlo trials are run."""
        return self is not Mode.ANALYTIC


COMMAND_MODES: dict[str, Mode] = {
    "analyze": Mode.ANALYTIC,
    "simulate": Mode.MC,
    "validate": Mode.BOTH,
    "sweep": Mode.ANALYTIC,
    "optimize-phi": Mode.ANALYTIC,
}


@dataclasses.dataclass(frozen=True)
class SweepSpec:
    """One-dimensional sweep over a config parameter."""

    variable: str
    values: tuple[float, ...]
    fixed: dict[str, typing.Any] = dataclasses.field(default_factory=dict)
    outputs: pathlib.Path = pathlib.Path(".")
    """Directory receiving the sweep CSV and plot curves."""

    mode: Mode = Mode.ANALYTIC
    optimize_phi: bool = False

    def __post_init__(self):
        """Check the sweep variable and values."""
        if self.variable not in SWEEP_VARIABLES:
            raise ConfigError(
                f"cannot sweep '{self.variable}'; choose one of"
                f" {', '.join(SWEEP_VARIABLES)}"
            )

        if len(self.values) == 0:
            raise ConfigError("sweep needs at least one value")

        if self.optimize_phi and self.variable == "phi":
            raise ConfigError("cannot optimize phi while sweeping phi")

    def configs(self, base: SystemConfig) -> list[SystemConfig]:
        """Get the config of every sweep point."""
        base = replace(base, **self.fixed) if self.fixed else base

        return [apply_sweep_value(base, self.variable, v) for v in self.values]


class PointResult(typing.NamedTuple):
    """Rows of one sweep point and its agreement gap, if checked."""

    rows: list[SecrecyRow]
    gap: float | None


def _as_int(variable: str, value: float) -> int:
    if value != int(value):
        raise ConfigError(f"{variable} sweep value {value} is not an integer")

    return int(value)


def apply_sweep_value(
    base: SystemConfig, variable: str, value: float
) -> SystemConfig:
    """Get the config of one sweep point.

    A K sweep keeps B equal to K when the base config does, and needs a
    uniform beta, which is resized to the new K.
    """
    match variable:
        case "phi":
            return replace(base, phi=float(value))
        case "sigma_deg":
            return replace(
                base, sigma_psi_deg=float(value), sigma_phi_deg=float(value)
            )
        case "N_E":
            return replace(base, N_E=_as_int(variable, value))
        case "N_o":
            return replace(base, N_o=_as_int(variable, value))
        case "K":
            K = _as_int(variable, value)

            if len(set(base.beta)) > 1:
                raise ConfigError("sweeping K needs a uniform beta")

            return replace(
                base,
                K=K,
                B=K if base.B == base.K else base.B,
                beta=(base.beta[0],) * K,
            )
        case _:
            raise ConfigError(f"cannot sweep '{variable}'")


def parse_sweep(text: str) -> tuple[str, tuple[float, ...]]:
    """Parse ``VAR=v1,v2,...``."""
    variable, sep, values = text.partition("=")

    if sep == "":
        raise ConfigError(f"sweep '{text}' is not of the form VAR=v1,v2")

    try:
        return variable.strip(), float_list_converter.from_text(values)
    except ValueError as err:
        raise ConfigError(f"sweep values: {err}") from err


def parse_phi_grid(text: str) -> np.ndarray:
    """Parse ``start:stop:step`` into an inclusive phi grid."""
    parts = text.split(":")

    if len(parts) != 3:
        raise ConfigError(f"phi grid '{text}' is not start:stop:step")

    try:
        start, stop, step = (float_converter.from_text(p) for p in parts)
        grid = phi_grid(start, stop, step)
    except ValueError as err:
        raise ConfigError(f"phi grid: {err}") from err

    if grid.size == 0 or grid[0] <= 0.0 or grid[-1] > 1.0:
        raise ConfigError(f"phi grid '{text}' must lie in (0, 1]")

    return grid


class Experiment:
    """Evaluate config points concurrently on a shared thread pool."""

    _mode: Mode
    _threads: int | None
    _grid: np.ndarray
    _all_mts: bool
    _variant: RateVariant

    def __init__(
        self,
        mode: Mode = Mode.ANALYTIC,
        threads: int = 0,
        grid: np.ndarray | None = None,
        all_mts: bool = False,
        variant: RateVariant = RateVariant.COMPOSED,
    ):
        """Initialize the experiment."""
        self._mode = mode
        self._threads = threads or None
        self._grid = phi_grid() if grid is None else grid
        self._all_mts = all_mts
        self._variant = variant

    def _mts(self, K: int) -> range:
        return range(K) if self._all_mts else range(1)

    def _eve(
        self,
        cfg: ValidatedConfig,
        records: typing.Sequence[TrialRecord],
    ) -> EveEstimate | None:
        if cfg.q <= 0.0:
            LOGGER.warning("No AN: eavesdropper capacity unbounded.")

            return None

        if cfg.N_E > cfg.L:
            LOGGER.warning(
                f"N_E={cfg.N_E} > L={cfg.L}: eavesdropper not simulated."
            )

            return None

        return simulate_eve(cfg, records)

    async def evaluate(
        self,
        raw: SystemConfig,
        executor: concurrent.futures.Executor,
        sweep_variable: str = "",
        sweep_value: float | None = None,
        optimize: bool = False,
    ) -> PointResult:
        """Evaluate one config point."""
        loop = asyncio.get_running_loop()
        cfg = validate(raw)
        pilots = make_pilots(cfg)
        phi_star = None

        if optimize:
            optimum = await loop.run_in_executor(
                executor,
                optimize_phi,
                cfg,
                pilots,
                0,
                self._grid,
                self._variant,
            )
            phi_star = optimum.phi_star
            cfg = validate(replace(raw, phi=phi_star))

        LOGGER.info(
            f"Evaluating {sweep_variable or 'point'}"
            f"{'' if sweep_value is None else f'={sweep_value:g}'}"
            f" at phi={cfg.phi:g}."
        )

        extra = {
            "sweep_variable": sweep_variable,
            "sweep_value": sweep_value,
            "phi_star": phi_star,
        }

        if not self._mode.simulated:
            rows = []

            for k in self._mts(cfg.K):
                columns = await loop.run_in_executor(
                    executor,
                    analytic_columns,
                    cfg,
                    pilots,
                    k,
                    self._variant,
                )
                rows.append(make_row(cfg, k, **extra, **columns))

            return PointResult(rows, None)

        records = await TrialRunner(cfg, pilots).run(executor=executor)
        moments = estimate_moments(records)
        eve = self._eve(cfg, records)

        rows = [
            mc_secrecy(
                cfg,
                moments,
                eve,
                k,
                pilots if self._mode.analytic else None,
                self._variant,
                **extra,
            )
            for k in self._mts(cfg.K)
        ]

        gap = None

        if self._mode.analytic:
            gap = rate_agreement(
                cfg, pilots, moments, self._mts(cfg.K), self._variant
            )

        return PointResult(rows, gap)

    async def run_points(
        self,
        points: typing.Sequence[tuple[SystemConfig, str, float | None]],
        optimize: bool = False,
    ) -> tuple[SecrecyReport, float | None]:
        """Evaluate every point and collect the rows in point order."""
        with concurrent.futures.ThreadPoolExecutor(
            max_workers=self._threads
        ) as executor:
            results = await asyncio.gather(
                *(
                    self.evaluate(raw, executor, variable, value, optimize)
                    for raw, variable, value in points
                )
            )

        report = SecrecyReport()
        gaps = [result.gap for result in results if result.gap is not None]

        for result in results:
            report.extend(result.rows)

        return report, max(gaps) if gaps else None

    def run(
        self,
        points: typing.Sequence[tuple[SystemConfig, str, float | None]],
        optimize: bool = False,
    ) -> tuple[SecrecyReport, float | None]:
        """Evaluate every point synchronously."""
        return asyncio.run(self.run_points(points, optimize))


def phi_curve(
    raw: SystemConfig,
    grid: np.ndarray,
    all_mts: bool = False,
    variant: RateVariant = RateVariant.COMPOSED,
) -> SecrecyReport:
    """Get the closed-form secrecy curve over the phi grid with phi*."""
    cfg = validate(raw)
    pilots = make_pilots(cfg)
    report = SecrecyReport()

    for k in range(cfg.K) if all_mts else range(1):
        optimum = optimize_phi(cfg, pilots, k, grid, variant)

        LOGGER.info(
            f"MT {k + 1}: phi* = {optimum.phi_star:g},"
            f" secrecy {optimum.secrecy:.6g}."
        )

        for phi in optimum.grid:
            point = validate(replace(raw, phi=float(phi)))

            report.append(
                make_row(
                    point,
                    k,
                    sweep_variable="phi",
                    sweep_value=float(phi),
                    phi_star=optimum.phi_star,
                    **analytic_columns(point, pilots, k, variant),
                )
            )

    return report


def summarize(report: SecrecyReport) -> str:
    """Render a short human-readable summary of a report."""
    names = (
        ("rate_analytic", "R"),
        ("rate_mc", "R_mc"),
        ("Ce_bound", "C_E"),
        ("Ce_mc", "C_E_mc"),
        ("secrecy_analytic", "secrecy"),
        ("secrecy_mc", "secrecy_mc"),
        ("phi_star", "phi*"),
    )
    lines = []

    for row in report:
        head = f"mt={row.mt} phi={format_float(row.phi)}"

        if row.sweep_variable:
            head = (
                f"{row.sweep_variable}={format_float(row.sweep_value)} "
                + head
            )

        cells = [
            f"{label}={format_float(getattr(row, name))}"
            for name, label in names
            if getattr(row, name) is not None
        ]
        lines.append(f"{head}: {' '.join(cells)}")

    return "\n".join(lines)


def _parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument(
        "--config", required=True, type=pathlib.Path, help="config file"
    )
    common.add_argument(
        "--out",
        default=pathlib.Path("."),
        type=pathlib.Path,
        help="output directory",
    )
    common.add_argument(
        "--threads", default=0, type=int, help="worker threads, 0 = auto"
    )
    common.add_argument(
        "--variant",
        default=RateVariant.COMPOSED.value,
        choices=[variant.value for variant in RateVariant],
        help="closed-form rate evaluation",
    )
    common.add_argument(
        "--phi-grid",
        default=f"{DEFAULT_PHI_START}:{DEFAULT_PHI_STOP}:{DEFAULT_PHI_STEP}",
        help="phi search grid start:stop:step",
    )
    common.add_argument(
        "--mode",
        choices=[mode.value for mode in Mode],
        help="evaluations to run, defaults to what the command implies",
    )
    common.add_argument(
        "--all-mts", action="store_true", help="report every MT"
    )
    common.add_argument(
        "--verbose", "-v", action="store_true", help="debug logging"
    )

    parser = argparse.ArgumentParser(
        prog="pysecrecy",
        description="Secrecy rates of a massive MIMO downlink with phase"
        " noise and artificial noise.",
    )
    commands = parser.add_subparsers(dest="command", required=True)

    commands.add_parser(
        "analyze", parents=[common], help="closed-form bounds only"
    )
    commands.add_parser(
        "simulate", parents=[common], help="Monte Carlo only"
    )

    check = commands.add_parser(
        "validate",
        parents=[common],
        help="closed forms and Monte Carlo with an agreement check",
    )
    check.add_argument(
        "--tolerance",
        default=DEFAULT_AGREEMENT_TOLERANCE,
        type=float,
        help="largest accepted relative rate gap",
    )

    sweep = commands.add_parser(
        "sweep", parents=[common], help="sweep one parameter"
    )
    sweep.add_argument(
        "--sweep",
        required=True,
        help=f"VAR=v1,v2,... with VAR one of {', '.join(SWEEP_VARIABLES)}",
    )
    sweep.add_argument(
        "--optimize-phi",
        action="store_true",
        help="evaluate each point at its own phi*",
    )

    commands.add_parser(
        "optimize-phi", parents=[common], help="grid-search phi*"
    )

    return parser


def _execute(args: argparse.Namespace) -> int:
    base = load_config(args.config)
    grid = parse_phi_grid(args.phi_grid)
    variant = RateVariant(args.variant)

    if args.threads < 0:
        raise ConfigError("--threads must not be negative")

    validate(base)

    mode = COMMAND_MODES[args.command]

    if args.mode is not None:
        mode = Mode(args.mode)

    if args.command == "validate" and mode is not Mode.BOTH:
        raise ConfigError("validate needs --mode both")

    if args.command == "optimize-phi" and mode is not Mode.ANALYTIC:
        raise ConfigError("optimize-phi needs --mode analytic")

    out = args.out

    match args.command:
        case "analyze" | "simulate" | "validate":
            experiment = Experiment(
                mode, args.threads, grid, args.all_mts, variant
            )
            report, gap = experiment.run([(base, "", None)])
        case "sweep":
            variable, values = parse_sweep(args.sweep)
            spec = SweepSpec(
                variable=variable,
                values=values,
                outputs=args.out,
                mode=mode,
                optimize_phi=args.optimize_phi,
            )
            points = [
                (raw, variable, value)
                for raw, value in zip(spec.configs(base), spec.values)
            ]

            for raw, _, _ in points:
                validate(raw)

            experiment = Experiment(
                spec.mode, args.threads, grid, args.all_mts, variant
            )
            report, gap = experiment.run(points, spec.optimize_phi)
            out = spec.outputs
        case "optimize-phi":
            report, gap = phi_curve(base, grid, args.all_mts, variant), None
        case _:
            raise NotImplementedError(f"'{args.command}' is not a command.")

    path = report.write_csv(out / f"{args.command}.csv")

    LOGGER.info(f"Wrote {len(report)} rows to '{path}'.")

    if args.command in ("sweep", "optimize-phi"):
        emit_plotdata(report, out)

    print(summarize(report))

    if gap is not None:
        print(f"max relative rate gap: {format_float(gap)}")

        if args.command == "validate" and gap > args.tolerance:
            LOGGER.warning(
                f"Rate gap {gap:.4g} exceeds tolerance {args.tolerance:g}."
            )

            return EXIT_AGREEMENT_FAILED

    return EXIT_OK


def main(argv: typing.Sequence[str] | None = None) -> int:
    """Run the command line interface and return the exit code."""
    args = _parser().parse_args(argv)

    logging.basicConfig(
        datefmt="%H:%M:%S",
        format=LOG_FORMAT,
        level=logging.DEBUG if args.verbose else logging.INFO,
    )

    try:
        return _execute(args)
    except ConfigError as err:
        LOGGER.error(f"Config error: {err}")

        return EXIT_CONFIG_ERROR
    except NumericalError as err:
        LOGGER.error(f"Numerical error: {err}")

        return EXIT_NUMERICAL_ERROR
    except OutputError as err:
        LOGGER.error(f"Output error: {err}")

        return EXIT_OUTPUT_ERROR
    except SecrecyException as err:
        LOGGER.error(f"{err}")

        return EXIT_NUMERICAL_ERROR


if __name__ == "__main__":
    sys.exit(main())
