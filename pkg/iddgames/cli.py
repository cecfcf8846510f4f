"""Command-line front end.

Machine-readable output goes to standard output or to the files named with ``-o``;
diagnostics go to standard error through logging. Exit codes: 0 success, 1 usage
error or unreadable file, 2 malformed input, failed precondition or failed
verification, 3 size cap exceeded.
"""

import argparse
import logging
import sys
from collections.abc import Callable, Sequence
from pathlib import Path
from typing import NoReturn, Optional

from . import __version__
from .brgd import run
from .data.classes import (
    BrgdConfig,
    Centroid,
    Explicit,
    FamilyValue,
    FloatArray,
    GeneratorSpec,
    GraphKind,
    RandomPoint,
    RegretMode,
    Selector,
    StepSchedule,
    Vertex,
)
from .exact import attack_support_bound, sample, solve_all
from .exceptions.custom_exceptions import (
    IddError,
    InvalidConfigError,
    InvalidGeneratorParamsError,
    SelectorRangeError,
    SizeCapExceededError,
)
from .experiments import (
    REFERENCE_FITS,
    fit_power_law,
    report_equilibrium,
    sweep,
    write_attack_profile_csv,
    write_degree_csv,
    write_histogram_csv,
    write_sweep_csv,
)
from .gen import generate, synth_graph
from .graph import dump_edge_list, graph_stats, load_edge_list
from .model import DefenseGame
from .oracle import psne_search, verify_msne
from .payoff import check_strategies, regret
from .serialization import (
    brgd_result_to_dict,
    eqset_from_dict,
    eqset_to_dict,
    game_to_dict,
    generator_spec_from_dict,
    load_game,
    read_json,
    regret_to_dict,
    stats_to_dict,
    strategies_from_dict,
    strategies_to_dict,
    validation_to_dict,
    verification_to_dict,
    write_json,
)
from .utils import entropy_seed

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_INVALID = 2
EXIT_SIZE_CAP = 3

# Raised for bad flag values rather than bad input files.
USAGE_ERRORS = (InvalidConfigError, InvalidGeneratorParamsError, SelectorRangeError)


class _Parser(argparse.ArgumentParser):
    def error(self, message: str) -> NoReturn:
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def __emit(document: object, output: Optional[str]) -> None:
    text = write_json(document, output)
    if output is None:
        sys.stdout.write(text)


def __seed(args: argparse.Namespace) -> int:
    return int(args.seed) if args.seed is not None else entropy_seed()


def __cmd_stats(args: argparse.Namespace) -> int:
    loaded = load_edge_list(Path(args.graph))
    stats = graph_stats(loaded.graph, None if args.diameter_threshold < 0 else args.diameter_threshold)
    logger.info(
        "Read %d line(s): %d duplicate edge(s) and %d self-loop(s) dropped",
        loaded.report.lines,
        loaded.report.duplicate_edges,
        loaded.report.self_loops,
    )
    __emit(stats_to_dict(stats), args.output)
    return EXIT_OK


def __cmd_synth(args: argparse.Namespace) -> int:
    params = {"n": args.n, "p": args.p, "m": args.m}
    graph = synth_graph(args.kind, {k: v for k, v in params.items() if v is not None}, __seed(args))
    text = dump_edge_list(graph)
    if args.output is None:
        sys.stdout.write(text)
    else:
        Path(args.output).write_text(text, encoding="utf-8")
    return EXIT_OK


def __generator_spec(args: argparse.Namespace) -> GeneratorSpec:
    document = read_json(args.spec) if args.spec else {}
    if args.mode is not None:
        document["mode"] = args.mode
    if args.seed is not None or "seed" not in document:
        document["seed"] = __seed(args)
    return generator_spec_from_dict(document)


def __cmd_gen(args: argparse.Namespace) -> int:
    loaded = load_edge_list(Path(args.graph))
    game = generate(loaded.graph, __generator_spec(args), loaded.node_ids)
    __emit(game_to_dict(game), args.output)
    return EXIT_OK


def __cmd_validate(args: argparse.Namespace) -> int:
    report = load_game(args.game).validate()
    __emit(validation_to_dict(report), args.output)
    if not report.is_valid:
        logger.error("Game has %d violation(s)", len(report))
        return EXIT_INVALID
    return EXIT_OK


def __cmd_solve(args: argparse.Namespace) -> int:
    game = load_game(args.game)
    eqset = solve_all(game)
    logger.info(
        "Case %s, support %d, tied %d, unique=%s, y0=%.6g (support bound %.3g)",
        eqset.case.value,
        len(eqset.support),
        len(eqset.tied),
        eqset.unique,
        eqset.y0,
        attack_support_bound(game),
    )
    __emit(eqset_to_dict(eqset), args.output)
    return EXIT_OK


def __selector(args: argparse.Namespace) -> Selector:
    if args.selector == "value":
        if args.v is None:
            raise SelectorRangeError("--v is required with --selector value")
        return FamilyValue(args.v)
    if args.selector == "vertex":
        return Vertex(tuple(args.priority or ()))
    if args.selector == "explicit":
        return Explicit(tuple(args.y or ()))
    if args.selector == "random":
        return RandomPoint(__seed(args))
    return Centroid()


def __cmd_sample(args: argparse.Namespace) -> int:
    eqset = eqset_from_dict(read_json(args.eqset))
    x, y = sample(eqset, __selector(args))
    __emit(strategies_to_dict(x, y), args.output)
    return EXIT_OK


def __cmd_brgd(args: argparse.Namespace) -> int:
    game = load_game(args.game)
    init = strategies_from_dict(read_json(args.init)) if args.init else None
    config = BrgdConfig(
        epsilon=args.eps,
        max_iterations=args.max_iter,
        step_size=args.eta,
        regret_mode=args.regret_mode,
        seed=__seed(args),
        snapshot_every=args.snapshot_every,
        init=init,
        schedule=args.schedule,
    )
    result = run(game, config)
    __emit(brgd_result_to_dict(result), args.output)
    return EXIT_OK


def __load_profile(args: argparse.Namespace) -> tuple[DefenseGame, FloatArray, FloatArray]:
    game = load_game(args.game)
    x, y = strategies_from_dict(read_json(args.strategies))
    check_strategies(game, x, y)
    return game, x, y


def __cmd_verify(args: argparse.Namespace) -> int:
    game, x, y = __load_profile(args)
    report = verify_msne(game, x, y, args.tol)
    __emit(verification_to_dict(report), args.output)
    if not report.ok:
        logger.error("Profile is not an equilibrium: %d violated condition(s)", len(report.violations))
        return EXIT_INVALID
    return EXIT_OK


def __cmd_regret(args: argparse.Namespace) -> int:
    game, x, y = __load_profile(args)
    __emit(regret_to_dict(regret(game, x, y, args.mode)), args.output)
    return EXIT_OK


def __cmd_sweep(args: argparse.Namespace) -> int:
    loaded = load_edge_list(Path(args.graph))
    spec = __generator_spec(args)
    config = BrgdConfig(
        max_iterations=args.max_iter,
        step_size=args.eta,
        regret_mode=args.regret_mode,
        seed=spec.seed,
        schedule=args.schedule,
    )
    result = sweep(
        loaded.graph,
        spec,
        args.eps,
        args.seeds,
        config,
        fresh_instance_per_epsilon=args.fresh_instance,
        workers=args.workers,
    )
    write_sweep_csv(result, args.output if args.output is not None else sys.stdout)
    if result.fit is not None:
        reference = REFERENCE_FITS[spec.mode.value]
        logger.info(
            "Fit N = %.4g * eps^%.4f (R^2 = %.5f); published %s-parameter fit: exponent %.3f, R^2 %.5f",
            result.fit.coef,
            result.fit.exponent,
            result.fit.r_squared,
            spec.mode.value,
            reference.exponent,
            reference.r_squared,
        )
    return EXIT_OK


def __cmd_fit(args: argparse.Namespace) -> int:
    fit = fit_power_law(zip(args.eps, args.iterations))
    __emit({"coef": fit.coef, "exponent": fit.exponent, "r_squared": fit.r_squared}, args.output)
    return EXIT_OK


def __cmd_report(args: argparse.Namespace) -> int:
    game, x, y = __load_profile(args)
    report = report_equilibrium(game, x, y, args.threshold)
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    files = {name: out_dir / f"{name}.csv" for name in ("attack_profile", "histogram", "degree_stats")}
    write_attack_profile_csv(report, files["attack_profile"])
    write_histogram_csv(report, files["histogram"])
    write_degree_csv(report, files["degree_stats"])
    logger.info("Support size %d, y0=%.6g; CSV files in %s", report.support_size, report.y0, out_dir)
    summary = {"support_size": report.support_size, "y0": report.y0, "files": {k: str(v) for k, v in files.items()}}
    __emit(summary, args.output)
    return EXIT_OK


def __cmd_psne(args: argparse.Namespace) -> int:
    profile = psne_search(load_game(args.game))
    document = {"found": profile is not None}
    if profile is not None:
        document.update({"a": list(profile.a), "target": profile.target})
    __emit(document, args.output)
    return EXIT_OK


def __add_dynamics_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--eta", type=float, default=0.1, help="step size in (0, 1]")
    p.add_argument("--max-iter", type=int, default=2000)
    p.add_argument("--regret-mode", choices=[m.value for m in RegretMode], default=RegretMode.PER_PLAYER_RANGE.value)
    p.add_argument("--schedule", choices=[s.value for s in StepSchedule], default=StepSchedule.ADAPTIVE.value)


def __add_generator_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("graph", help="edge list")
    p.add_argument("spec", nargs="?", default=None, help="generator spec JSON (defaults when absent)")
    p.add_argument("--mode", choices=["fixed", "random"], default=None)


def __build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--seed", type=int, default=None, help="RNG seed; drawn from OS entropy and logged if absent")
    common.add_argument("-o", "--output", default=None, help="output file (default: standard output)")
    verbosity = common.add_mutually_exclusive_group()
    verbosity.add_argument("-v", "--verbose", action="store_true", help="log debug messages")
    verbosity.add_argument("-q", "--quiet", action="store_true", help="log warnings and errors only")

    parser = _Parser(prog="iddgames", description="Equilibria of interdependent defense games")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def command(name: str, handler: Callable[[argparse.Namespace], int], help_text: str) -> argparse.ArgumentParser:
        p = sub.add_parser(name, parents=[common], help=help_text)
        p.set_defaults(handler=handler)
        return p

    stats = command("stats", __cmd_stats, "summary statistics of an edge list")
    stats.add_argument("graph")
    stats.add_argument("--diameter-threshold", type=int, default=5000, help="skip the diameter above this many nodes")

    synth = command("synth", __cmd_synth, "write a synthetic edge list")
    synth.add_argument("kind", choices=[k.value for k in GraphKind])
    synth.add_argument("--n", type=int, required=True)
    synth.add_argument("--p", type=float, default=None, help="edge probability (Erdos-Renyi)")
    synth.add_argument("--m", type=int, default=None, help="links per new node (preferential attachment)")

    gen = command("gen", __cmd_gen, "parameterize an edge list as a game")
    __add_generator_args(gen)

    validate = command("validate", __cmd_validate, "check a game against the model assumptions")
    validate.add_argument("game")

    solve = command("solve", __cmd_solve, "exact equilibrium set of a transfer-vulnerable game")
    solve.add_argument("game")

    sample_ = command("sample", __cmd_sample, "materialize one point of an equilibrium set")
    sample_.add_argument("eqset")
    sample_.add_argument(
        "--selector", choices=["centroid", "value", "vertex", "explicit", "random"], default="centroid"
    )
    sample_.add_argument("--v", type=float, default=None, help="family parameter for --selector value")
    sample_.add_argument("--priority", type=int, nargs="+", default=None, help="fill order for --selector vertex")
    sample_.add_argument("--y", type=float, nargs="+", default=None, help="tied attack mass for --selector explicit")

    brgd = command("brgd", __cmd_brgd, "best-response-gradient dynamics")
    brgd.add_argument("game")
    brgd.add_argument("--eps", type=float, default=0.005)
    brgd.add_argument("--init", default=None, help="strategies JSON to start from")
    brgd.add_argument("--snapshot-every", type=int, default=None)
    __add_dynamics_flags(brgd)

    verify = command("verify", __cmd_verify, "check a profile against every best-response condition")
    verify.add_argument("game")
    verify.add_argument("strategies")
    verify.add_argument("--tol", type=float, default=1e-9)

    regret_ = command("regret", __cmd_regret, "regret of a profile")
    regret_.add_argument("game")
    regret_.add_argument("strategies")
    regret_.add_argument("--mode", choices=[m.value for m in RegretMode], default=RegretMode.PER_PLAYER_RANGE.value)

    sweep_ = command("sweep", __cmd_sweep, "BRGD iterations against epsilon")
    __add_generator_args(sweep_)
    sweep_.add_argument("--eps", type=float, nargs="+", required=True)
    sweep_.add_argument("--seeds", type=int, default=10, help="runs per epsilon")
    sweep_.add_argument("--workers", type=int, default=1)
    sweep_.add_argument("--fresh-instance", action="store_true", help="draw a new game per epsilon")
    __add_dynamics_flags(sweep_)

    fit = command("fit", __cmd_fit, "power-law fit of iteration counts")
    fit.add_argument("--eps", type=float, nargs="+", required=True)
    fit.add_argument("--iterations", type=float, nargs="+", required=True)

    report = command("report", __cmd_report, "attack profile, investment histogram and degree CSVs")
    report.add_argument("game")
    report.add_argument("strategies")
    report.add_argument("--threshold", type=float, default=1e-6, help="attack probability counted as attacked")
    report.add_argument("--out-dir", default=".", help="directory for the CSV files")

    psne = command("psne", __cmd_psne, "exhaustive pure-equilibrium search (n <= 20)")
    psne.add_argument("game")
    return parser


def __configure_logging(args: argparse.Namespace) -> None:
    level = logging.DEBUG if args.verbose else logging.WARNING if args.quiet else logging.INFO
    logging.basicConfig(stream=sys.stderr, format="%(levelname)s %(name)s: %(message)s")
    logging.getLogger().setLevel(level)


def main(argv: Optional[Sequence[str]] = None) -> int:
    """Run one subcommand.

    Args:
        argv (Sequence[str], optional): arguments without the program name. Defaults to sys.argv[1:].

    Returns:
        int: the exit code.
    """
    args = __build_parser().parse_args(argv)
    __configure_logging(args)
    try:
        return int(args.handler(args))
    except SizeCapExceededError as e:
        logger.error("%s", e)
        return EXIT_SIZE_CAP
    except USAGE_ERRORS as e:
        logger.error("%s", e)
        return EXIT_USAGE
    except IddError as e:
        logger.error("%s", e)
        return EXIT_INVALID
    except OSError as e:
        logger.error("Cannot read or write %s: %s", e.filename, e.strerror)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
