import logging
import math
import sys
from dataclasses import dataclass
from functools import wraps
from pathlib import Path
from typing import Any, Callable, Dict, List, Optional, Sequence, Tuple, TypeVar, Union, cast

import rich_click as click
from rich.console import Console
from rich.logging import RichHandler

from supercurves import __version__ as version
from supercurves.bubbling import BubbleReport, LadderSettings, PointAnalysis, analyze_family, neck_energy_ladder
from supercurves.config import RunConfig, load_config
from supercurves.energy import super_energy
from supercurves.exceptions import InvalidInputError, NoBubbleError, QuadratureError
from supercurves.families import FamilyKind, make_family, nu_ladder
from supercurves.fields import Connection, InstanceKind, make_instance, residual_global
from supercurves.geometry import MoebiusTransform
from supercurves.inequalities import ISOPERIMETRIC_CONSTANT
from supercurves.moduli import (
    Axiom,
    StableSupercurve,
    bubbling_case,
    epsilon_auto,
    gromov_convergence_check,
    planted_defect,
    rho_search,
    validate_stable,
)
from supercurves.quadrature import Annulus, Disc, Region, Sphere
from supercurves.records import (
    REGION_FORMS,
    curve_to_record,
    dump_json,
    load_curve,
    load_sequence,
    load_stable,
    parse_region,
    write_csv,
)
from supercurves.report import render
from supercurves.suites import SuiteName, run_suite

CONTEXT_SETTINGS = {"help_option_names": ["-h", "--help"]}

EXIT_FAILURE = 1
EXIT_USAGE = 2

Command = TypeVar("Command", bound=Callable[..., Any])

INPUT_FILE = click.Path(exists=True, file_okay=True, dir_okay=False, readable=True, path_type=Path)
OUTPUT_FILE = click.Path(file_okay=True, dir_okay=False, writable=True, allow_dash=False, path_type=Path)


@dataclass
class CliState:
    config_path: Optional[Path]
    flags: Dict[str, Any]

    def config(self, **overrides: Any) -> RunConfig:
        return load_config(self.config_path, {**self.flags, **overrides})


class RegionType(click.ParamType):
    name = "region"

    def convert(
        self, value: Any, param: Optional[click.Parameter], ctx: Optional[click.Context]
    ) -> Region:
        if isinstance(value, (Sphere, Disc, Annulus)):
            return value
        try:
            return parse_region(value)
        except InvalidInputError as error:
            forms = "\n    ".join(REGION_FORMS)
            self.fail(f"Invalid region: {value} ({error}). Region can be only one of:\n    {forms}", param, ctx)


class EpsilonType(click.ParamType):
    name = "eps"

    def convert(
        self, value: Any, param: Optional[click.Parameter], ctx: Optional[click.Context]
    ) -> Union[str, float]:
        if value == "auto" or isinstance(value, float):
            return value
        try:
            epsilon = float(value)
        except ValueError:
            self.fail(f"Invalid epsilon: {value}. Use a positive number or 'auto'", param, ctx)
        if not epsilon > 0:
            self.fail(f"Epsilon must be positive, got {value}", param, ctx)
        return epsilon


class ParameterType(click.ParamType):
    name = "key=value"

    def convert(
        self, value: Any, param: Optional[click.Parameter], ctx: Optional[click.Context]
    ) -> Tuple[str, Union[int, float, str]]:
        if isinstance(value, tuple):
            return value
        key, separator, raw = value.partition("=")
        if not separator or not key:
            self.fail(f"Invalid parameter: {value}. Use KEY=VALUE", param, ctx)
        for converter in (int, float):
            try:
                return key, converter(raw)
            except ValueError:
                continue
        return key, raw


def configure_logging(verbosity: int) -> None:
    level = {0: logging.WARNING, 1: logging.INFO}.get(verbosity, logging.DEBUG)
    logging.basicConfig(
        level=level,
        format="%(message)s",
        handlers=[RichHandler(console=Console(stderr=True), show_path=False)],
        force=True,
    )


def handle_errors(command: Command) -> Command:
    """Map library errors to the exit codes: 1 for numerical failures, 2 for bad input."""

    @wraps(command)
    def wrapper(*args: Any, **kwargs: Any) -> Any:
        try:
            return command(*args, **kwargs)
        except InvalidInputError as error:
            click.echo(f"Error: {error}", err=True)
            sys.exit(EXIT_USAGE)
        except (QuadratureError, NoBubbleError) as error:
            click.echo(f"Numerical failure: {error}", err=True)
            sys.exit(EXIT_FAILURE)

    return cast(Command, wrapper)


def emit(text: str, output: Optional[Path]) -> None:
    if output is None:
        click.echo(text, nl=False)
        return
    output.parent.mkdir(parents=True, exist_ok=True)
    output.write_text(text, encoding="utf-8")


def csv_target(config: RunConfig, default_name: str) -> Optional[Path]:
    if config.csv_path is not None:
        return config.csv_path
    if config.output_dir is not None:
        return config.output_dir / default_name
    return None


@click.group(invoke_without_command=True, context_settings=CONTEXT_SETTINGS)
@click.version_option(version=version, prog_name="supercurves")
@click.option("-v", "--verbose", count=True, help="Log INFO with -v and DEBUG with -vv to stderr")
@click.option(
    "-c",
    "--config",
    "config_path",
    type=INPUT_FILE,
    metavar="CONFIG",
    help="TOML file with a [tool.supercurves] table or top-level settings",
)
@click.option("--threads", type=int, metavar="N", help="Maximum number of worker threads")
@click.option(
    "-o",
    "--output-dir",
    type=click.Path(file_okay=False, dir_okay=True, writable=True, path_type=Path),
    metavar="OUTPUT_DIR",
    help="Directory for CSV ladders and tables",
)
@click.pass_context
def cli(ctx, verbose: int, config_path: Optional[Path], threads: Optional[int], output_dir: Optional[Path]):
    """
    Numerical toolkit for holomorphic supercurves on the Riemann sphere: super
    energies, PDE residuals, bubbling analysis, the distance between stable
    supercurves and Gromov convergence.
    """
    configure_logging(verbose)
    ctx.obj = CliState(config_path, {"threads": threads, "output_dir": output_dir})


@cli.command()
@click.argument("curve_file", type=INPUT_FILE, metavar="CURVE_FILE")
@click.option(
    "-r",
    "--region",
    type=RegionType(),
    default="sphere",
    show_default=True,
    help="sphere, disc:CHART:RE:IM:R, exterior:CHART:RE:IM:R or annulus:CHART:RE:IM:R:R_OUTER",
)
@click.option("--rel-tol", type=float, help="Relative quadrature tolerance")
@click.option("--output", type=OUTPUT_FILE, help="Write the report to this file")
@click.pass_obj
@handle_errors
def energy(state: CliState, curve_file: Path, region: Region, rel_tol: Optional[float], output: Optional[Path]):
    """Print E(phi, U), E(psi, U) and E(phi, psi, U) with quadrature error estimates."""
    config = state.config(rel_tol=rel_tol)
    curve, section = load_curve(curve_file)
    breakdown = super_energy(curve, section, region, config.rel_tol)
    text = render(
        "energy",
        source=curve_file.name,
        region=region,
        target=curve.target.value,
        degree=curve.degree,
        bundle_degree=section.bundle.degree,
        breakdown=breakdown,
    )
    emit(text, output)


@cli.command()
@click.argument("curve_file", type=INPUT_FILE, metavar="CURVE_FILE")
@click.option(
    "--connection",
    type=click.Choice([item.value for item in Connection]),
    default=Connection.LEVI_CIVITA.value,
    show_default=True,
)
@click.option("--h", "step", type=float, help="Central-difference step; closed-form derivatives when omitted")
@click.option("--resolution", type=int, default=41, show_default=True, help="Grid points per axis and chart")
@click.option("--tolerance", type=float, help="Exit with 1 when a residual exceeds this bound")
@click.pass_obj
@handle_errors
def residual(
    state: CliState,
    curve_file: Path,
    connection: str,
    step: Optional[float],
    resolution: int,
    tolerance: Optional[float],
):
    """Sup residuals of both defining equations over the two source charts."""
    state.config()
    curve, section = load_curve(curve_file)
    report = residual_global(curve, section, Connection(connection), resolution, step)
    click.echo(render("residual", source=curve_file.name, report=report, connection=connection), nl=False)
    if tolerance is not None and max(report.curve, report.section) > tolerance:
        sys.exit(EXIT_FAILURE)


@cli.command()
@click.argument("curve_file", type=INPUT_FILE, metavar="CURVE_FILE")
@click.option(
    "-m",
    "--moebius",
    type=float,
    nargs=8,
    required=True,
    metavar="A_RE A_IM B_RE B_IM C_RE C_IM D_RE D_IM",
    help="Matrix entries of the Moebius transform",
)
@click.option("--output", type=OUTPUT_FILE, help="Write the record to this file")
@click.pass_obj
@handle_errors
def pullback(state: CliState, curve_file: Path, moebius: Tuple[float, ...], output: Optional[Path]):
    """Write the record of (phi o m, pullback of psi) as JSON."""
    state.config()
    curve, section = load_curve(curve_file)
    transform = MoebiusTransform.from_reals(list(moebius))
    record = curve_to_record(curve.pullback(transform), section.pullback(transform))
    if output is None:
        dump_json(record, sys.stdout)
        return
    output.parent.mkdir(parents=True, exist_ok=True)
    with open(output, "w", encoding="utf-8") as file:
        dump_json(record, file)


def _flatten(analyses: Sequence[PointAnalysis]) -> List[PointAnalysis]:
    flat: List[PointAnalysis] = []
    for analysis in analyses:
        flat.append(analysis)
        flat.extend(_flatten(analysis.secondary))
    return flat


def _conservation_passed(report: BubbleReport, tolerance: float) -> bool:
    for analysis in _flatten(report.points):
        conservation = analysis.conservation
        if conservation is None:
            continue
        if conservation.residual_iii > tolerance:
            return False
        if conservation.residual_v is not None and conservation.residual_v > tolerance:
            return False
    return True


def _write_bubble_tables(report: BubbleReport, family: Any, directory: Path) -> None:
    analyses = _flatten(report.points)
    write_csv(
        directory / f"{report.family}-mass.csv",
        ["center", "depth", "epsilon", "nu", "energy_phi", "energy_psi"],
        [(str(item.center), item.depth, *row) for item in analyses for row in item.profile.rows()],
    )
    write_csv(
        directory / f"{report.family}-rescaling.csv",
        ["center", "depth", "nu", "delta", "sup_dphi"],
        [
            (str(item.center), item.depth, nu, delta, sup)
            for item in analyses
            if item.rescaling is not None
            for nu, delta, sup in zip(item.rescaling.nus, item.rescaling.deltas, item.rescaling.sups)
        ],
    )
    if family.last()[1].is_zero():
        return
    write_csv(
        directory / f"{report.family}-neck.csv",
        ["center", "nu", "delta", "neck_energy_psi"],
        [
            (str(item.center), *row)
            for item in report.points
            if item.rescaling is not None
            for row in neck_energy_ladder(family, item.rescaling)
        ],
    )


@cli.command()
@click.option(
    "-f",
    "--family",
    "family_kind",
    type=click.Choice([item.value for item in FamilyKind]),
    required=True,
    help="Catalog family",
)
@click.option(
    "-p",
    "--param",
    "params",
    type=ParameterType(),
    multiple=True,
    help="Family parameter: bundle_degree, base (identity or square) or scale",
)
@click.option("--nu0", type=float, help="First ladder value")
@click.option("--ladder-count", type=int, help="Number of ladder values (doubling from nu0)")
@click.option("--eps0", type=float, help="Largest ball radius of the mass profile")
@click.option("--hbar", type=float, default=math.pi, show_default="pi", help="Energy quantum")
@click.option("--tolerance", type=float, default=1e-2, show_default=True, help="Bound on conservation residuals")
@click.pass_obj
@handle_errors
def bubble(
    state: CliState,
    family_kind: str,
    params: Tuple[Tuple[str, Any], ...],
    nu0: Optional[float],
    ladder_count: Optional[int],
    eps0: Optional[float],
    hbar: float,
    tolerance: float,
):
    """
    Detect concentration points, select rescalings, fit bubbles and check energy
    conservation along a nu ladder.

    With an output directory three CSV files are written:
    FAMILY-mass.csv (center, depth, epsilon, nu, energy_phi, energy_psi),
    FAMILY-rescaling.csv (center, depth, nu, delta, sup_dphi) and, for nonzero
    sections, FAMILY-neck.csv (center, nu, delta, neck_energy_psi).
    """
    config = state.config(nu0=nu0, ladder_count=ladder_count, eps0=eps0)
    options = dict(params)
    unknown = set(options) - {"bundle_degree", "base", "scale"}
    if unknown:
        raise InvalidInputError(f"unknown family parameters {sorted(unknown)}", "--param")
    bundle_degree = int(options.get("bundle_degree", -1))
    base = str(options.get("base", "square" if bundle_degree == -2 else "identity"))
    family = make_family(
        family_kind,
        nu_ladder(config.nu0, config.ladder_count),
        bundle_degree=bundle_degree,
        base=base,
        scale=float(options.get("scale", 0.1)),
    )
    settings = LadderSettings(config.eps0, config.ladder_count, config.rel_tol, config.threads)
    report = analyze_family(family, hbar, settings)
    click.echo(
        render("bubble", report=report, analyses=_flatten(report.points), bundle_degree=bundle_degree),
        nl=False,
    )
    if config.output_dir is not None:
        _write_bubble_tables(report, family, config.output_dir)
    if not _conservation_passed(report, tolerance):
        sys.exit(EXIT_FAILURE)


def _validated(path: Path) -> StableSupercurve:
    x = load_stable(path)
    diagnostics = validate_stable(x)
    if diagnostics:
        raise InvalidInputError("; ".join(diagnostics), path.name)
    return x


@cli.command()
@click.argument("x_file", type=INPUT_FILE, metavar="X_FILE")
@click.argument("other_file", type=INPUT_FILE, metavar="X_PRIME_FILE")
@click.option("--eps", "epsilon", type=EpsilonType(), default="auto", show_default=True)
@click.option("--search-tol", type=float, help="Target of the Moebius search")
@click.option("--samples", type=int, default=4000, show_default=True, help="Sphere samples per supremum")
@click.pass_obj
@handle_errors
def rho(
    state: CliState,
    x_file: Path,
    other_file: Path,
    epsilon: Any,
    search_tol: Optional[float],
    samples: int,
):
    """Print the terms of rho_eps(x, x') for the best tree map and Moebius tuple found."""
    config = state.config(search_tol=search_tol)
    x = _validated(x_file)
    other = _validated(other_file)
    if epsilon == "auto":
        epsilon = epsilon_auto(x, rel_tol=config.rel_tol)
    breakdown = rho_search(
        x, other, epsilon, config.search_tol, samples, threads=config.threads, rel_tol=config.rel_tol
    )
    click.echo(render("rho", epsilon=epsilon, breakdown=breakdown), nl=False)


@cli.command()
@click.option("-l", "--limit", "limit_file", type=INPUT_FILE, help="Stable supercurve file of the limit")
@click.option(
    "-s",
    "--sequence",
    "sequence_dir",
    type=click.Path(exists=True, file_okay=False, dir_okay=True, path_type=Path),
    help="Directory of sequence members, read in file name order",
)
@click.option(
    "--catalog",
    type=click.Choice(["bubbling"] + [axiom.name.lower() for axiom in Axiom]),
    help="Constructed sequence: bubbling, or the bubbling case with a defect for one axiom",
)
@click.option("--eps", "epsilon", type=float, default=0.5, show_default=True)
@click.option("--tolerance", type=float, default=1e-2, show_default=True)
@click.option("--samples", type=int, default=4000, show_default=True)
@click.option("--csv", "csv_path", type=OUTPUT_FILE, help="CSV of residual ladders (nu, one column per axiom)")
@click.pass_obj
@handle_errors
def convergence(
    state: CliState,
    limit_file: Optional[Path],
    sequence_dir: Optional[Path],
    catalog: Optional[str],
    epsilon: float,
    tolerance: float,
    samples: int,
    csv_path: Optional[Path],
):
    """Check the five axioms of Gromov convergence; exit 1 when one fails."""
    config = state.config(csv_path=csv_path)
    if catalog is not None:
        if limit_file is not None or sequence_dir is not None:
            raise InvalidInputError("use either --catalog or --limit with --sequence", "--catalog")
        nus = nu_ladder(config.nu0, config.ladder_count)
        case = bubbling_case(nus) if catalog == "bubbling" else planted_defect(Axiom[catalog.upper()], nus)
        limit, sequence, witnesses, ladder = case.limit, case.sequence, case.witnesses, case.nus
    elif limit_file is not None and sequence_dir is not None:
        limit = _validated(limit_file)
        sequence, ladder, witnesses = load_sequence(sequence_dir)
    else:
        raise InvalidInputError("give --catalog, or both --limit and --sequence", "--limit")
    report = gromov_convergence_check(sequence, limit, epsilon, witnesses, tolerance, ladder, samples)
    click.echo(render("convergence", report=report), nl=False)
    target = csv_target(config, "convergence.csv")
    if target is not None:
        write_csv(target, ["nu", *(axiom.value for axiom in Axiom)], report.rows())
    if not report.passed:
        sys.exit(EXIT_FAILURE)


@cli.command()
@click.argument("suite", type=click.Choice([item.value for item in SuiteName]))
@click.option("-n", "--count", type=int, default=100, show_default=True, help="Number of random instances")
@click.option("--seed", type=int, help="Base seed of the instance generators")
@click.option(
    "--constant",
    type=float,
    default=ISOPERIMETRIC_CONSTANT,
    show_default="1/(4 pi)",
    help="Isoperimetric constant c",
)
@click.option("--csv", "csv_path", type=OUTPUT_FILE, help="CSV of per-instance results")
@click.pass_obj
@handle_errors
def verify(
    state: CliState,
    suite: str,
    count: int,
    seed: Optional[int],
    constant: float,
    csv_path: Optional[Path],
):
    """
    Run a property suite; exit 0 iff there are no failures.

    The CSV has one row per check, ending with the columns applicable and passed.
    """
    config = state.config(seed=seed, csv_path=csv_path)
    result = run_suite(suite, count, config.seed, config.threads, config.rel_tol, constant)
    click.echo(render("verify", result=result), nl=False)
    target = csv_target(config, f"{suite}.csv")
    if target is not None:
        write_csv(target, result.header, result.rows)
    if not result.passed:
        sys.exit(EXIT_FAILURE)


@cli.command()
@click.option(
    "-i",
    "--instance",
    type=click.Choice([item.value for item in InstanceKind]),
    help="Write the record of one catalog instance",
)
@click.option(
    "-p",
    "--param",
    "params",
    type=ParameterType(),
    multiple=True,
    help="Instance parameter: degree, eps, bundle_degree, section, scale or seed",
)
@click.option("--output", type=OUTPUT_FILE, help="Write the record to this file")
@handle_errors
def catalog(instance: Optional[str], params: Tuple[Tuple[str, Any], ...], output: Optional[Path]):
    """List the instance kinds, families and suites, or write one instance record."""
    if instance is None:
        click.echo(
            render(
                "catalog",
                instances=[item.value for item in InstanceKind],
                families=[item.value for item in FamilyKind],
                suites=[item.value for item in SuiteName],
            ),
            nl=False,
        )
        return
    curve, section = make_instance(instance, **dict(params))
    record = curve_to_record(curve, section)
    if output is None:
        dump_json(record, sys.stdout)
        return
    output.parent.mkdir(parents=True, exist_ok=True)
    with open(output, "w", encoding="utf-8") as file:
        dump_json(record, file)
