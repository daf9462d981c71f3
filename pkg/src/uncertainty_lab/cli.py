"""CLI argument parsing and command implementations."""

import argparse
import math
from collections.abc import Callable, Mapping
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, TypeVar

import numpy as np
from tabulate import tabulate

from . import __version__
from .errors import InvalidArgumentError, NumericalError
from .export import export_csv, export_json, export_plot_data, sequence_from_json
from .finite import FiniteCase, QConvention, Variant, build_case
from .lattice import EQUALITY_TOL, LatticeSeq
from .logging import get_logger, setup_logging
from .minimizer import MinimizerSpec, NormMode, minimizer_main
from .service import LabService, report_record
from .utils import (
    parse_complex_list,
    parse_float_list,
    parse_int_list,
    parse_range,
    validate_output_path,
    validate_positive,
)

logger = get_logger()

T = TypeVar("T")

EXIT_OK = 0
EXIT_INVALID = 2
EXIT_NUMERICAL = 3

DEFAULT_TIMES = "0:2:9"
DEFAULT_GAUSSIAN_J = "8,16,32,64"
DEFAULT_PROFILE_J = "16,32,64"
DEFAULT_GAUSSIAN_GRID = "0:3:13"
DEFAULT_PROFILE_X = "0.5,1,2"
DEFAULT_CF_N = "10,20,30"

# Flags that configure the run itself rather than a subcommand
_RUN_FLAGS = ("command", "func", "verbose", "quiet")


@dataclass
class RunConfig:
    """A subcommand with its validated-at-use parameters."""

    command: str
    params: dict[str, Any] = field(default_factory=dict)

    @classmethod
    def from_namespace(cls, args: argparse.Namespace) -> "RunConfig":
        params = {k: v for k, v in vars(args).items() if k not in _RUN_FLAGS}
        return cls(command=args.command, params=params)


@dataclass
class CommandOutput:
    """Table rows plus summary and plot series produced by one command."""

    kind: str
    columns: list[str]
    rows: list[Mapping[str, Any]]
    summary: dict[str, Any] = field(default_factory=dict)
    payload: dict[str, Any] = field(default_factory=dict)
    plots: dict[str, list[tuple[float, float]]] = field(default_factory=dict)


# -----------------------------------------------------------------------------
# Parameter helpers
# -----------------------------------------------------------------------------


def _parsed(result: tuple[T | None, str | None], flag: str) -> T:
    value, error = result
    if error or value is None:
        raise InvalidArgumentError(f"Invalid {flag} value: {error}")
    return value


def _positive(params: Mapping[str, Any], *names: str) -> None:
    for name in names:
        is_valid, error = validate_positive(f"--{name}", float(params[name]))
        if not is_valid:
            raise InvalidArgumentError(error)


def _spec(params: Mapping[str, Any]) -> MinimizerSpec:
    _positive(params, "alpha", "h")
    return MinimizerSpec(
        alpha=params["alpha"],
        h=params["h"],
        d=params["d"],
        norm_mode=NormMode(params.get("norm") or NormMode.CENTER_ONE),
    )


def _read_sequence(path: str) -> LatticeSeq:
    try:
        text = Path(path).read_text()
    except OSError as e:
        raise InvalidArgumentError(f"Cannot read {path}: {e}") from e
    return sequence_from_json(text)


def _sequence_from_list(value: str, h: float) -> LatticeSeq:
    values = _parsed(parse_complex_list(value), "--u0")
    if len(values) % 2 == 0:
        raise InvalidArgumentError(f"--u0 needs an odd number of values (2N+1), got {len(values)}")
    return LatticeSeq.from_values(values, h)


def _initial_datum(params: Mapping[str, Any], service: LabService) -> LatticeSeq:
    """u0 for evolve and virial from --init."""
    init = params["init"]
    _positive(params, "h")
    if init == "minimizer":
        return minimizer_main(_spec(params))
    if init == "delta":
        return LatticeSeq.delta(params["d"], 0, params["h"])
    if init == "random":
        return service.random_sequences(1, params["seed"], params["d"], params["N"], params["h"])[0]
    if init == "list":
        if not params.get("u0"):
            raise InvalidArgumentError("--init list needs --u0")
        return _sequence_from_list(params["u0"], params["h"])
    if not params.get("input"):
        raise InvalidArgumentError("--init file needs --input")
    return _read_sequence(params["input"])


# -----------------------------------------------------------------------------
# Commands
# -----------------------------------------------------------------------------


def cmd_verify(params: Mapping[str, Any], service: LabService) -> CommandOutput:
    """Verify command: uncertainty ratios for given or random sequences."""
    _positive(params, "h")
    if params["random"]:
        if params["count"] < 1:
            raise InvalidArgumentError(f"--count must be at least 1, got {params['count']}")
        sequences = service.random_sequences(
            params["count"], params["seed"], params["d"], params["N"], params["h"]
        )
    elif params.get("input"):
        sequences = [_read_sequence(params["input"])]
    elif params.get("u0"):
        sequences = [_sequence_from_list(params["u0"], params["h"])]
    else:
        raise InvalidArgumentError("Give --u0, --input or --random")

    rows = service.verify_sequences(sequences, params["relation"])
    ratios = [r["ratio"] for r in rows]
    return CommandOutput(
        kind="verify",
        columns=["index", "lhs", "pos_factor", "mom_factor", "ratio", "equality", "degenerate"],
        rows=rows,
        summary={
            "relation": params["relation"],
            "sequences": len(rows),
            "max_ratio": max(ratios),
            "all_within_bound": all(r <= 1 + EQUALITY_TOL for r in ratios),
        },
    )


def cmd_minimizer(params: Mapping[str, Any], service: LabService) -> CommandOutput:
    """Minimizer command: dump a minimizer and check equality."""
    spec = _spec(params)
    result = service.build_minimizer(spec, params["relation"], params.get("N"))
    u = result.sequence

    index_columns = [f"k{j}" for j in range(u.d)]
    rows: list[Mapping[str, Any]] = []
    for position in np.ndindex(u.values.shape):
        value = u.values[position]
        row: dict[str, Any] = {c: p - u.N for c, p in zip(index_columns, position)}
        row.update(re=float(value.real), im=float(value.imag))
        rows.append(row)

    plots = {}
    if u.d == 1:
        plots["minimizer"] = [(float(k), float(v.real)) for k, v in zip(u.axis(), u.values)]
    return CommandOutput(
        kind="minimizer",
        columns=index_columns + ["re", "im"],
        rows=rows,
        summary={
            "relation": params["relation"],
            "N": u.N,
            "ratio": result.report.ratio,
            "equality": result.report.equality,
            "recurrence_residual": result.residual,
        },
        payload={"sequence": u.to_dict(), "report": report_record(0, result.report)},
        plots=plots,
    )


def cmd_evolve(params: Mapping[str, Any], service: LabService) -> CommandOutput:
    """Evolve command: sample the Schrodinger evolution of a datum."""
    u0 = _initial_datum(params, service)
    times = _parsed(parse_range(params["t"]), "--t")
    closed_form = _spec(params) if params["init"] == "minimizer" else None
    rows = service.sample_evolution(u0, times, params["method"], closed_form)

    summary: dict[str, Any] = {"init": params["init"], "method": params["method"]}
    gaps = [r["closed_form_gap"] for r in rows if r["closed_form_gap"] is not None]
    if gaps:
        summary["max_closed_form_gap"] = max(gaps)
    return CommandOutput(
        kind="evolve",
        columns=["t", "norm", "F", "normalization", "closed_form_gap"],
        rows=rows,
        summary=summary,
        plots={"evolve_F": [(r["t"], r["F"]) for r in rows]},
    )


def cmd_virial(params: Mapping[str, Any], service: LabService) -> CommandOutput:
    """Virial command: sample F(t) and fit the exact parabola."""
    u0 = _initial_datum(params, service)
    times = _parsed(parse_range(params["t"]), "--t")
    trace = service.virial(u0, params["system"], times, params["method"])
    return CommandOutput(
        kind="virial",
        columns=["t", "F", "Fdot", "Fddot", "fit_residual"],
        rows=trace.rows(),
        summary={
            "system": params["system"],
            "a_fit": trace.a_fit,
            "b_fit": trace.b_fit,
            "a_b": trace.product,
            "fit_residual": trace.residual,
            "max_third_derivative": trace.third_derivative_max,
            "time_shift": trace.shift,
            "scale": trace.scale,
            "hypothesis_drift": trace.hypothesis_drift,
            "norm_drift": trace.norm_drift,
        },
        plots={
            "virial_F": list(zip(trace.times.tolist(), trace.F.tolist())),
            "virial_fit": list(zip(trace.times.tolist(), trace.parabola(trace.times).tolist())),
        },
    )


def _case(params: Mapping[str, Any]) -> FiniteCase:
    if not params.get("variant"):
        raise InvalidArgumentError("--variant is required with --u0 or --minimizer")
    _positive(params, "h", "alpha")
    return build_case(
        params["variant"], params["N"], params["h"], params["alpha"], params["q_convention"]
    )


def cmd_finite(params: Mapping[str, Any], service: LabService) -> CommandOutput:
    """Finite command: counterexamples, Virial rows or minimizers of finite cases."""
    columns = [
        "variant", "N", "h", "u0", "t", "F", "Fddot", "Fddot_closed", "Fddot_expected", "Fdddot"
    ]
    if params["minimizer"]:
        case = _case(params)
        result = service.finite_minimizer(case)
        rows = [
            {"k": int(k), "linear_solve": float(a), "continued_fraction": float(b)}
            for k, a, b in zip(case.indices(), result.linear.values, result.continued.values)
        ]
        return CommandOutput(
            kind="finite-minimizer",
            columns=["k", "linear_solve", "continued_fraction"],
            rows=rows,
            summary={
                "variant": case.variant.value,
                "ratio": result.report.ratio,
                "equality": result.report.equality,
                "agreement": result.agreement,
                "residual_linear_solve": result.linear.residual,
                "residual_continued_fraction": result.continued.residual,
            },
            payload={"case": case.to_dict()},
            plots={"finite_minimizer": [(float(r["k"]), r["continued_fraction"]) for r in rows]},
        )

    if params.get("u0"):
        case = _case(params)
        u0 = _parsed(parse_complex_list(params["u0"]), "--u0")
        times = _parsed(parse_range(params["t"]), "--t")
        rows = service.finite_rows(case, u0, times)
        return CommandOutput(
            kind="finite", columns=columns, rows=rows, payload={"case": case.to_dict()}
        )

    variant = Variant(params["variant"]) if params.get("variant") else None
    return CommandOutput(
        kind="finite-counterexamples",
        columns=columns,
        rows=service.finite_counterexamples(variant),
    )


def cmd_converge(params: Mapping[str, Any], service: LabService) -> CommandOutput:
    """Converge command: Gaussian, limit-profile and continued-fraction tables."""
    kind = params["kind"]
    if kind == "gaussian":
        j_list = _parsed(parse_int_list(params["j"] or DEFAULT_GAUSSIAN_J), "--j")
        grid = _parsed(parse_range(params["grid"]), "--grid")
        rows = service.gaussian_table(j_list, grid, params["d"])
        return CommandOutput(
            kind="converge-gaussian",
            columns=["j", "sup_error", "worst_x"],
            rows=rows,
            plots={"gaussian_error": [(float(r["j"]), r["sup_error"]) for r in rows]},
        )

    if kind == "profile":
        _positive(params, "L", "alpha")
        j_list = _parsed(parse_int_list(params["j"] or DEFAULT_PROFILE_J), "--j")
        x_list = _parsed(parse_float_list(params["x"]), "--x")
        rows = service.profile_table(x_list, params["L"], j_list, params["alpha"])
        plots = {
            f"profile_x{x:g}": [(float(r["j"]), r["error"]) for r in rows if r["x"] == x]
            for x in x_list
        }
        return CommandOutput(
            kind="converge-profile",
            columns=["x", "j", "value", "limit", "error"],
            rows=rows,
            plots=plots,
        )

    _positive(params, "alpha", "h")
    N_list = _parsed(parse_int_list(params["N_list"]), "--N-list")
    rows = service.cf_limit_table(params["k"], params["alpha"], params["h"], N_list)
    return CommandOutput(
        kind="converge-cf",
        columns=["N", "value", "limit", "error", "closed_form"],
        rows=rows,
        plots={"cf_error": [(float(r["N"]), r["error"]) for r in rows]},
    )


COMMANDS: dict[str, Callable[[Mapping[str, Any], LabService], CommandOutput]] = {
    "verify": cmd_verify,
    "minimizer": cmd_minimizer,
    "evolve": cmd_evolve,
    "virial": cmd_virial,
    "finite": cmd_finite,
    "converge": cmd_converge,
}


# -----------------------------------------------------------------------------
# Output
# -----------------------------------------------------------------------------


def _output_format(params: Mapping[str, Any]) -> str:
    if params.get("format"):
        return str(params["format"])
    output = params.get("output")
    if output and Path(output).suffix.lower() == ".json":
        return "json"
    return "csv" if output else "table"


def _render(output: CommandOutput, fmt: str) -> str:
    if fmt == "csv":
        return export_csv(output.rows, output.columns)
    if fmt == "json":
        return export_json(
            output.kind, {"summary": output.summary, "rows": output.rows, **output.payload}
        )
    table = [[_cell(row.get(c)) for c in output.columns] for row in output.rows]
    text = tabulate(table, headers=output.columns, tablefmt="simple")
    if output.summary:
        summary = [[k, _cell(v)] for k, v in output.summary.items()]
        text += "\n\n" + tabulate(summary, tablefmt="simple")
    return text


def _cell(value: Any) -> Any:
    if value is None:
        return ""
    if isinstance(value, float) and math.isfinite(value) and value != 0:
        return f"{value:.10g}"
    return value


def _write(path: str, text: str, extensions: list[str] | None) -> None:
    is_valid, error = validate_output_path(path, allowed_extensions=extensions)
    if not is_valid:
        raise InvalidArgumentError(error)
    with open(path, "w", newline="") as f:
        f.write(text)
    logger.info("Wrote %s", path)


def _emit(output: CommandOutput, params: Mapping[str, Any]) -> None:
    fmt = _output_format(params)
    text = _render(output, fmt)
    if params.get("output"):
        _write(params["output"], text, [f".{fmt}"] if fmt != "table" else None)
    else:
        print(text)

    plot_dir = params.get("plot_dir")
    if plot_dir:
        for name, pairs in output.plots.items():
            path = str(Path(plot_dir) / f"{name}.dat")
            _write(path, export_plot_data(pairs, header=name), [".dat"])


def run(config: RunConfig, service: LabService | None = None) -> int:
    """Run one subcommand and map errors to exit codes.

    Returns:
        0 on success, 2 for invalid arguments, 3 for numerical failures.
    """
    command = COMMANDS.get(config.command)
    if command is None:
        logger.error("Unknown command: %s", config.command)
        return EXIT_INVALID

    service = service or LabService(config.params.get("threads"))
    try:
        output = command(config.params, service)
        _emit(output, config.params)
    except InvalidArgumentError as e:
        logger.error("%s", e)
        return EXIT_INVALID
    except NumericalError as e:
        logger.error("Numerical failure: %s", e)
        return EXIT_NUMERICAL
    except ValueError as e:
        logger.error("%s", e)
        return EXIT_INVALID
    return EXIT_OK


# -----------------------------------------------------------------------------
# Parser
# -----------------------------------------------------------------------------


def _output_parent() -> argparse.ArgumentParser:
    parent = argparse.ArgumentParser(add_help=False)
    parent.add_argument("-o", "--output", help="Write the table to this file")
    parent.add_argument(
        "--format",
        choices=["csv", "json"],
        help="Output format (default: table on stdout, or from the --output extension)",
    )
    parent.add_argument("--plot-dir", help="Directory for two-column .dat plot files")
    parent.add_argument(
        "--threads",
        type=int,
        help="Worker pool size (default: UNCERTAINTY_LAB_THREADS or 4)",
    )
    return parent


def _lattice_parent() -> argparse.ArgumentParser:
    parent = argparse.ArgumentParser(add_help=False)
    parent.add_argument("--alpha", type=float, default=1.0, help="alpha > 0 (default: 1)")
    parent.add_argument("--h", type=float, default=1.0, help="Mesh size h > 0 (default: 1)")
    parent.add_argument(
        "--d", type=int, default=1, choices=[1, 2, 3], help="Lattice dimension (default: 1)"
    )
    return parent


def _datum_arguments(parser: argparse.ArgumentParser, default_init: str) -> None:
    parser.add_argument(
        "--init",
        choices=["minimizer", "delta", "random", "list", "file"],
        default=default_init,
        help=f"Initial datum (default: {default_init})",
    )
    parser.add_argument("--u0", help="Comma-separated 1-D values for --init list")
    parser.add_argument("--input", help="Sequence JSON file for --init file")
    parser.add_argument("--seed", type=int, default=0, help="Seed for --init random")
    parser.add_argument("--N", type=int, default=8, help="Box radius for --init random")
    parser.add_argument(
        "--norm",
        choices=[m.value for m in NormMode],
        default=NormMode.CENTER_ONE.value,
        help="Minimizer normalization for --init minimizer",
    )
    parser.add_argument(
        "--t", default=DEFAULT_TIMES, help=f"Times as start:stop:count or a list (default: {DEFAULT_TIMES})"
    )
    parser.add_argument(
        "--method", choices=["spectral", "kernel"], default="spectral", help="Propagator"
    )


def create_parser() -> argparse.ArgumentParser:
    """Create and configure the argument parser."""
    parser = argparse.ArgumentParser(
        prog="uncertainty-lab",
        description="Verify discrete uncertainty principles, minimizers and Virial identities.",
        formatter_class=argparse.RawDescriptionHelpFormatter,
    )
    parser.add_argument("--version", action="version", version=f"uncertainty-lab {__version__}")
    parser.add_argument(
        "-v",
        "--verbose",
        action="store_true",
        help="Enable verbose output (show debug messages)",
    )
    parser.add_argument(
        "-q",
        "--quiet",
        action="store_true",
        help="Suppress informational output (only show warnings/errors)",
    )

    subparsers = parser.add_subparsers(dest="command", help="Available commands")
    output = _output_parent()
    lattice = _lattice_parent()

    # verify command
    verify_parser = subparsers.add_parser(
        "verify",
        parents=[output, lattice],
        help="Check an uncertainty inequality for given or random sequences",
    )
    verify_parser.add_argument("--u0", help="Comma-separated 1-D values (odd count)")
    verify_parser.add_argument("--input", help="Sequence JSON file")
    verify_parser.add_argument("--random", action="store_true", help="Use seeded random data")
    verify_parser.add_argument("--count", type=int, default=100, help="Random sequences (default: 100)")
    verify_parser.add_argument("--seed", type=int, default=0, help="Random seed (default: 0)")
    verify_parser.add_argument("--N", type=int, default=8, help="Random box radius (default: 8)")
    verify_parser.add_argument(
        "--relation", choices=["main", "second"], default="main", help="Inequality to check"
    )
    verify_parser.set_defaults(func=cmd_verify)

    # minimizer command
    minimizer_parser = subparsers.add_parser(
        "minimizer",
        parents=[output, lattice],
        help="Build a minimizer and check that it attains equality",
    )
    minimizer_parser.add_argument("--N", type=int, help="Box radius (default: from the tail bound)")
    minimizer_parser.add_argument(
        "--relation", choices=["main", "second"], default="main", help="Inequality to minimize"
    )
    minimizer_parser.add_argument(
        "--norm",
        choices=[m.value for m in NormMode],
        default=NormMode.CENTER_ONE.value,
        help="Normalization (default: center-one)",
    )
    minimizer_parser.set_defaults(func=cmd_minimizer)

    # evolve command
    evolve_parser = subparsers.add_parser(
        "evolve",
        parents=[output, lattice],
        help="Sample the discrete Schrodinger evolution",
    )
    _datum_arguments(evolve_parser, default_init="minimizer")
    evolve_parser.set_defaults(func=cmd_evolve)

    # virial command
    virial_parser = subparsers.add_parser(
        "virial",
        parents=[output, lattice],
        help="Virial trace F(t) with its exact parabola fit",
    )
    _datum_arguments(virial_parser, default_init="minimizer")
    virial_parser.add_argument(
        "--system",
        choices=["schrodinger", "conjugate", "alternating"],
        default="schrodinger",
        help="Evolution: Schrodinger or a coupled-system partner (default: schrodinger)",
    )
    virial_parser.set_defaults(func=cmd_virial)

    # finite command
    finite_parser = subparsers.add_parser(
        "finite",
        parents=[output],
        help="Finite-sequence variants: counterexamples, Virial rows, minimizers",
    )
    finite_parser.add_argument(
        "--variant", choices=[v.value for v in Variant], help="Finite variant"
    )
    finite_parser.add_argument("--N", type=int, default=3, help="Indices -N..N (default: 3)")
    finite_parser.add_argument("--h", type=float, default=1.0, help="Mesh size (default: 1)")
    finite_parser.add_argument("--alpha", type=float, default=1.0, help="alpha (default: 1)")
    finite_parser.add_argument(
        "--q-convention",
        dest="q_convention",
        choices=[q.value for q in QConvention],
        default=QConvention.UNCERTAINTY.value,
        help="DFT position weights (default: uncertainty)",
    )
    finite_parser.add_argument("--u0", help="Comma-separated initial datum of length 2N+1")
    finite_parser.add_argument("--t", default="0", help="Times (default: 0)")
    finite_parser.add_argument(
        "--minimizer", action="store_true", help="Solve for the minimizer by both methods"
    )
    finite_parser.set_defaults(func=cmd_finite)

    # converge command
    converge_parser = subparsers.add_parser(
        "converge",
        parents=[output],
        help="Convergence tables: Gaussian limit, limit profile, continued fractions",
    )
    converge_parser.add_argument(
        "--kind", choices=["gaussian", "profile", "cf"], default="gaussian", help="Table"
    )
    converge_parser.add_argument("--j", help="Refinement levels (comma-separated)")
    converge_parser.add_argument(
        "--grid", default=DEFAULT_GAUSSIAN_GRID, help=f"Gaussian grid (default: {DEFAULT_GAUSSIAN_GRID})"
    )
    converge_parser.add_argument("--d", type=int, default=1, choices=[1, 2, 3], help="Dimension")
    converge_parser.add_argument("--x", default=DEFAULT_PROFILE_X, help="Profile points")
    converge_parser.add_argument("--L", type=float, default=math.pi, help="Profile half-period")
    converge_parser.add_argument("--k", type=int, default=1, help="Continued fraction start index")
    converge_parser.add_argument(
        "--N-list", dest="N_list", default=DEFAULT_CF_N, help=f"Fraction lengths (default: {DEFAULT_CF_N})"
    )
    converge_parser.add_argument("--alpha", type=float, default=1.0, help="alpha (default: 1)")
    converge_parser.add_argument("--h", type=float, default=1.0, help="Mesh size (default: 1)")
    converge_parser.set_defaults(func=cmd_converge)

    return parser


def main(argv: list[str] | None = None) -> int:
    """Main entry point for the CLI."""
    parser = create_parser()
    args = parser.parse_args(argv)

    setup_logging(
        verbose=getattr(args, "verbose", False),
        quiet=getattr(args, "quiet", False),
    )

    if args.command is None:
        parser.print_help()
        return EXIT_OK

    return run(RunConfig.from_namespace(args))
