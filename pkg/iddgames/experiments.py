import csv
import logging
import time
from collections.abc import Iterable, Sequence
from concurrent.futures import ProcessPoolExecutor
from dataclasses import replace
from pathlib import Path
from typing import IO, Optional, Union

import numpy as np
from scipy import stats

from .brgd import run
from .data.classes import (
    AttackEntry,
    BrgdConfig,
    DegreeStats,
    EquilibriumReport,
    FloatArray,
    GeneratorSpec,
    HistogramBin,
    PowerLawFit,
    SweepResult,
    SweepRow,
)
from .exceptions.custom_exceptions import PowerLawFitError
from .gen import generate
from .graph import DirectedGraph
from .model import DefenseGame
from .payoff import check_strategies
from .utils import no_attack_mass

logger = logging.getLogger(__name__)

# Fits published for the 27K-node Internet instance; for side-by-side reporting only.
REFERENCE_FITS = {
    "fixed": PowerLawFit(coef=0.00003, exponent=-2.547, r_squared=0.90415),
    "random": PowerLawFit(coef=0.0291, exponent=-1.589, r_squared=0.9395),
}
MIN_FIT_EPSILONS = 3
DEFAULT_ATTACK_THRESHOLD = 1e-6
HISTOGRAM_BINS = 10

SWEEP_COLUMNS = ("epsilon", "seed", "converged", "iterations", "wall_ms")
ATTACK_PROFILE_COLUMNS = ("rank", "node_id", "y")
HISTOGRAM_COLUMNS = ("bin_low", "bin_high", "count")
DEGREE_COLUMNS = ("threshold", "n_attacked", "avg_indeg", "avg_outdeg")

Destination = Union[str, Path, IO[str]]


def fit_power_law(points: Iterable[tuple[float, float]]) -> PowerLawFit:
    """Least-squares fit of N = a * eps^b on (log eps, log N).

    Args:
        points (Iterable[tuple[float, float]]): (eps, N) pairs, all coordinates > 0.

    Raises:
        PowerLawFitError: with fewer than 2 points, a non-positive coordinate, or a
            single distinct eps.

    Returns:
        PowerLawFit: coef a, exponent b and the coefficient of determination in log space.
    """
    data = np.asarray(list(points), dtype=np.float64)
    if data.ndim != 2 or len(data) < 2:
        raise PowerLawFitError("A power-law fit needs at least 2 points")
    if np.any(data <= 0.0):
        raise PowerLawFitError("Power-law fit coordinates must be positive")
    log_eps, log_n = np.log(data[:, 0]), np.log(data[:, 1])
    if np.ptp(log_eps) == 0.0:
        raise PowerLawFitError("Power-law fit needs at least 2 distinct x values")
    fit = stats.linregress(log_eps, log_n)
    return PowerLawFit(coef=float(np.exp(fit.intercept)), exponent=float(fit.slope), r_squared=float(fit.rvalue**2))


def __run_one(task: tuple[DefenseGame, BrgdConfig]) -> SweepRow:
    game, config = task
    start = time.perf_counter()
    result = run(game, config)
    wall_ms = (time.perf_counter() - start) * 1000.0
    return SweepRow(config.epsilon, config.seed, result.converged, result.iterations, wall_ms)


def __sweep_fit(rows: list[SweepRow]) -> Optional[PowerLawFit]:
    points = [(row.epsilon, float(row.iterations)) for row in rows if row.converged and row.iterations > 0]
    if len({eps for eps, _ in points}) < MIN_FIT_EPSILONS:
        logger.info("Fewer than %d converged epsilon values; no fit", MIN_FIT_EPSILONS)
        return None
    try:
        return fit_power_law(points)
    except PowerLawFitError as e:
        logger.warning("Power-law fit failed: %s", e)
        return None


def sweep(
    graph: DirectedGraph,
    spec: GeneratorSpec,
    epsilons: Sequence[float],
    seeds_per_epsilon: int,
    config: BrgdConfig,
    fresh_instance_per_epsilon: bool = False,
    workers: int = 1,
) -> SweepResult:
    """Run BRGD once per (epsilon, seed) and fit iterations against epsilon.

    Seeds are config.seed, config.seed + 1, ... With fresh_instance_per_epsilon the k-th
    epsilon gets its own game drawn with spec.seed + k, otherwise every run shares one game.

    Args:
        graph (DirectedGraph): interaction graph.
        spec (GeneratorSpec): instance generator settings.
        epsilons (Sequence[float]): target regrets.
        seeds_per_epsilon (int): runs per epsilon.
        config (BrgdConfig): template run settings; epsilon and seed are overridden.
        fresh_instance_per_epsilon (bool, optional): draw a new game per epsilon. Defaults to False.
        workers (int, optional): worker processes; 1 runs in-process. Defaults to 1.

    Returns:
        SweepResult: rows sorted by (epsilon, seed) and the fit over converged rows, if any.
    """
    shared = None if fresh_instance_per_epsilon else generate(graph, spec)
    tasks: list[tuple[DefenseGame, BrgdConfig]] = []
    for k, eps in enumerate(epsilons):
        game = shared if shared is not None else generate(graph, replace(spec, seed=spec.seed + k))
        for s in range(seeds_per_epsilon):
            tasks.append((game, replace(config, epsilon=float(eps), seed=config.seed + s)))
    logger.info("Sweeping %d run(s) over %d epsilon value(s) with %d worker(s)", len(tasks), len(epsilons), workers)

    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            rows = list(pool.map(__run_one, tasks))
    else:
        rows = [__run_one(task) for task in tasks]
    rows.sort(key=lambda row: (row.epsilon, row.seed))
    return SweepResult(rows=rows, fit=__sweep_fit(rows))


def report_equilibrium(
    game: DefenseGame, x: FloatArray, y: FloatArray, threshold: float = DEFAULT_ATTACK_THRESHOLD
) -> EquilibriumReport:
    """Summarize a profile the way equilibrium plots need it.

    Args:
        game (DefenseGame): the game; node ids label the attack profile.
        x (FloatArray): investment probabilities.
        y (FloatArray): attack probabilities.
        threshold (float, optional): y_i above this counts as potentially attacked
            for the degree statistics. Defaults to 1e-6.

    Returns:
        EquilibriumReport: attack profile, investment histogram, degree stats, support size and y0.
    """
    check_strategies(game, x, y)
    order = [int(i) for i in np.argsort(-y, kind="stable") if y[i] > 0.0]
    profile = [AttackEntry(rank, game.node_ids[i], float(y[i])) for rank, i in enumerate(order, start=1)]

    upper = np.arange(1, HISTOGRAM_BINS + 1) / HISTOGRAM_BINS
    bins = np.minimum(np.searchsorted(upper, x, side="left"), HISTOGRAM_BINS - 1)
    counts = np.bincount(bins, minlength=HISTOGRAM_BINS)
    lower = np.concatenate(([0.0], upper[:-1]))
    histogram = [HistogramBin(float(lo), float(hi), int(c)) for lo, hi, c in zip(lower, upper, counts)]

    attacked = y > threshold
    n_attacked = int(np.count_nonzero(attacked))
    degree_stats = DegreeStats(
        threshold=threshold,
        n_attacked=n_attacked,
        avg_indeg=float(game.graph.in_degree[attacked].mean()) if n_attacked else None,
        avg_outdeg=float(game.graph.out_degree[attacked].mean()) if n_attacked else None,
    )
    return EquilibriumReport(
        attack_profile=profile,
        histogram=histogram,
        degree_stats=degree_stats,
        support_size=len(order),
        y0=no_attack_mass(y),
    )


def __write_rows(destination: Destination, header: Sequence[str], rows: Iterable[Sequence[object]]) -> None:
    if isinstance(destination, (str, Path)):
        with open(destination, "w", encoding="utf-8", newline="") as f:
            __write_rows(f, header, rows)
        return
    writer = csv.writer(destination, lineterminator="\n")
    writer.writerow(header)
    writer.writerows(rows)


def __cell(value: Optional[float]) -> str:
    return "" if value is None else repr(float(value))


def write_sweep_csv(result: SweepResult, destination: Destination) -> None:
    rows = ((__cell(r.epsilon), r.seed, str(r.converged).lower(), r.iterations, __cell(r.wall_ms)) for r in result.rows)
    __write_rows(destination, SWEEP_COLUMNS, rows)


def write_attack_profile_csv(report: EquilibriumReport, destination: Destination) -> None:
    rows = ((e.rank, e.node_id, __cell(e.y)) for e in report.attack_profile)
    __write_rows(destination, ATTACK_PROFILE_COLUMNS, rows)


def write_histogram_csv(report: EquilibriumReport, destination: Destination) -> None:
    rows = ((__cell(b.low), __cell(b.high), b.count) for b in report.histogram)
    __write_rows(destination, HISTOGRAM_COLUMNS, rows)


def write_degree_csv(report: EquilibriumReport, destination: Destination) -> None:
    d = report.degree_stats
    __write_rows(
        destination, DEGREE_COLUMNS, [(__cell(d.threshold), d.n_attacked, __cell(d.avg_indeg), __cell(d.avg_outdeg))]
    )
