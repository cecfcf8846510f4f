"""All mixed-strategy Nash equilibria of transfer-vulnerable single-attack games.

The equilibrium set is determined by the investment thresholds delta_hat_i and the
attacker's net margins margin_bar_i = loss_bar_i - C0_i:

* sum(delta_hat) < 1: a unique point with y_i = delta_hat_i, x_i = 1 - eta_i and
  positive no-attack mass.
* sum(delta_hat) == 1: y_i = delta_hat_i and a one-parameter family of investment
  profiles x_i(v) = 1 - (v + C0_i) / loss_bar_i, v in [0, min margin_bar].
* sum(delta_hat) > 1: nodes are sorted by decreasing margin; a prefix I of the list
  is attacked, the tied block J at its end is left unprotected and shares the
  remaining attack mass on a capped simplex.
"""

import logging
from typing import Optional

import numpy as np

from .data.classes import (
    Centroid,
    EquilibriumCase,
    EquilibriumSet,
    Explicit,
    FamilyRange,
    FamilyValue,
    FloatArray,
    RandomPoint,
    Selector,
    TiedSimplex,
    Vertex,
)
from .exceptions.custom_exceptions import (
    AssumptionViolatedError,
    NotTransferVulnerableError,
    SelectorRangeError,
)
from .model import DefenseGame
from .utils import clamp_probabilities, make_rng, no_attack_mass

logger = logging.getLogger(__name__)

# |sum(delta_hat) - 1| at or below this selects the EQUAL_ONE case.
EQUAL_ONE_TOLERANCE = 1e-12
# Margins within this fraction of max |margin_bar| of each other are tied.
TIE_TOLERANCE = 1e-9
DEFAULT_CONTAINS_TOLERANCE = 1e-9


def solve_all(game: DefenseGame) -> EquilibriumSet:
    """Compute the complete equilibrium set of a transfer-vulnerable game.

    Runs in O(n log n), dominated by sorting the margins. Ties are broken by node
    index, so the result is deterministic.

    Args:
        game (DefenseGame): a valid game with unblocked_transfer == 1 everywhere.

    Raises:
        NotTransferVulnerableError: if some alpha_i != 1.
        AssumptionViolatedError: if the game fails validation; the report is attached.

    Returns:
        EquilibriumSet: the set, tagged with its case.
    """
    if not game.is_transfer_vulnerable():
        blocked = int(np.count_nonzero(game.unblocked_transfer != 1.0))
        raise NotTransferVulnerableError(
            f"Exact solving needs alpha_i = 1 for every node, {blocked} node(s) differ; use BRGD instead"
        )
    report = game.validate()
    if not report.is_valid:
        raise AssumptionViolatedError(f"Game fails validation with {len(report)} violation(s)", report=report)

    derived = game.derived()
    total = derived.sum_delta
    if abs(total - 1.0) <= EQUAL_ONE_TOLERANCE and game.n > 0:
        logger.warning("Thresholds sum to 1 within %g; solving the knife-edge EQUAL_ONE case", EQUAL_ONE_TOLERANCE)
        return __solve_equal_one(game)
    if total < 1.0:
        logger.info("Thresholds sum to %.12g < 1: BELOW_ONE", total)
        return __solve_below_one(game)
    logger.info("Thresholds sum to %.12g > 1: ABOVE_ONE", total)
    return __solve_above_one(game)


def __solve_below_one(game: DefenseGame) -> EquilibriumSet:
    derived = game.derived()
    x = clamp_probabilities(1.0 - derived.eta, "investment probabilities")
    y = np.array(derived.delta_hat, dtype=np.float64)
    return EquilibriumSet(
        case=EquilibriumCase.BELOW_ONE,
        y0=1.0 - derived.sum_delta,
        x=x,
        y=y,
        support=tuple(range(game.n)),
        value=0.0,
    )


def __solve_equal_one(game: DefenseGame) -> EquilibriumSet:
    derived = game.derived()
    family = FamilyRange(
        v_min=0.0,
        v_max=float(derived.margin_bar.min()),
        loss_bar=derived.loss_bar,
        attack_cost=game.attack_cost,
    )
    return EquilibriumSet(
        case=EquilibriumCase.EQUAL_ONE,
        y0=0.0,
        x=np.full(game.n, np.nan),
        y=np.array(derived.delta_hat, dtype=np.float64),
        support=tuple(range(game.n)),
        family=family,
        unique=family.v_max - family.v_min <= 0.0,
    )


def __tied_block(margins: FloatArray, t: int) -> tuple[int, int]:
    """First and last sorted positions whose margin equals margins[t] within tolerance."""
    band = TIE_TOLERANCE * float(np.max(np.abs(margins)))
    value = margins[t]
    start, stop = t, t
    while start > 0 and abs(margins[start - 1] - value) <= band:
        start -= 1
    while stop + 1 < len(margins) and abs(margins[stop + 1] - value) <= band:
        stop += 1
    return start, stop


def threshold_crossing(running_total: FloatArray) -> int:
    """Position of the first running total that reaches 1.

    The last position is returned when rounding leaves the whole total just below 1,
    as summing the thresholds in sorted order can.
    """
    return min(int(np.searchsorted(running_total, 1.0, side="left")), len(running_total) - 1)


def __solve_above_one(game: DefenseGame) -> EquilibriumSet:
    derived = game.derived()
    delta_hat, margin_bar = derived.delta_hat, derived.margin_bar
    order = np.argsort(-margin_bar, kind="stable")
    sorted_delta = delta_hat[order]
    sorted_margin = margin_bar[order]

    prefix = np.concatenate(([0.0], np.cumsum(sorted_delta)))
    t = threshold_crossing(prefix[1:])
    start, stop = __tied_block(sorted_margin, t)
    value = float(sorted_margin[t])

    attacked = order[:start]
    tied = order[start : stop + 1]
    x = np.zeros(game.n)
    y = np.zeros(game.n)
    x[attacked] = clamp_probabilities(
        1.0 - (value + game.attack_cost[attacked]) / derived.loss_bar[attacked], "investment probabilities"
    )
    y[attacked] = delta_hat[attacked]
    y[tied] = np.nan

    upper = np.array(delta_hat[tied], dtype=np.float64)
    simplex = TiedSimplex(indices=tuple(int(i) for i in tied), upper_bounds=upper, total=1.0 - float(prefix[start]))
    degenerate = float(upper.sum()) - simplex.total <= TIE_TOLERANCE * max(1.0, simplex.total)
    logger.info(
        "Support of %d node(s), tied block of %d at value %.6g (support bound %.3g)",
        stop + 1,
        len(tied),
        value,
        attack_support_bound(game),
    )
    return EquilibriumSet(
        case=EquilibriumCase.ABOVE_ONE,
        y0=0.0,
        x=x,
        y=y,
        support=tuple(int(i) for i in order[: stop + 1]),
        tied=simplex.indices,
        value=value,
        simplex=simplex,
        unique=len(tied) == 1 or degenerate,
    )


def attack_support_bound(game: DefenseGame) -> float:
    """Upper bound 1 / min(delta_hat) on the number of attacked nodes when sum(delta_hat) > 1."""
    if game.n == 0:
        return 0.0
    return float(1.0 / game.derived().delta_hat.min())


def is_unique(eqset: EquilibriumSet) -> bool:
    return eqset.unique


def __water_fill(upper: FloatArray, total: float) -> FloatArray:
    """Equal split of total over the coordinates, capped by upper."""
    y = np.zeros_like(upper)
    remaining, left = total, len(upper)
    for pos in np.argsort(upper, kind="stable"):
        share = remaining / left
        y[pos] = min(float(upper[pos]), share)
        remaining -= y[pos]
        left -= 1
    return y


def __greedy_vertex(simplex: TiedSimplex, priority: list[int]) -> FloatArray:
    """Vertex of the capped simplex filling coordinates in priority order."""
    position = {node: pos for pos, node in enumerate(simplex.indices)}
    y = np.zeros(len(simplex.indices))
    remaining = simplex.total
    for node in priority:
        pos = position[node]
        y[pos] = min(float(simplex.upper_bounds[pos]), max(remaining, 0.0))
        remaining -= y[pos]
    return y


def __full_priority(simplex: TiedSimplex, priority: tuple[int, ...]) -> list[int]:
    members, listed = set(simplex.indices), set(priority)
    if not listed <= members or len(listed) != len(priority):
        raise SelectorRangeError(f"Vertex priority must list distinct nodes of the tied group {simplex.indices}")
    return list(priority) + [node for node in simplex.indices if node not in listed]


def __check_tied_point(simplex: TiedSimplex, y_tied: FloatArray, tol: float) -> None:
    if y_tied.shape != (len(simplex.indices),):
        raise SelectorRangeError(f"Expected {len(simplex.indices)} attack probabilities for the tied group")
    if np.any(y_tied < -tol) or np.any(y_tied > simplex.upper_bounds + tol):
        raise SelectorRangeError("Tied attack probabilities must lie in [0, delta_hat_i]")
    if abs(float(y_tied.sum()) - simplex.total) > tol:
        raise SelectorRangeError(f"Tied attack probabilities must sum to {simplex.total!r}, got {y_tied.sum()!r}")


def __tied_point(simplex: TiedSimplex, selector: Selector) -> FloatArray:
    if isinstance(selector, Centroid):
        return __water_fill(simplex.upper_bounds, simplex.total)
    if isinstance(selector, Vertex):
        return __greedy_vertex(simplex, __full_priority(simplex, selector.priority))
    if isinstance(selector, Explicit):
        y_tied = np.asarray(selector.y, dtype=np.float64)
        __check_tied_point(simplex, y_tied, DEFAULT_CONTAINS_TOLERANCE)
        return np.clip(y_tied, 0.0, simplex.upper_bounds)
    if isinstance(selector, RandomPoint):
        rng = make_rng(selector.seed)
        vertices = np.array(
            [__greedy_vertex(simplex, list(rng.permutation(simplex.indices))) for _ in simplex.indices]
        )
        weights = rng.dirichlet(np.ones(len(vertices)))
        point: FloatArray = weights @ vertices
        return point
    raise SelectorRangeError(f"Selector {selector!r} does not apply to a tied attack simplex")


def __family_value(family: FamilyRange, selector: Selector) -> float:
    span_tol = DEFAULT_CONTAINS_TOLERANCE * max(1.0, abs(family.v_max))
    if isinstance(selector, FamilyValue):
        if not family.v_min - span_tol <= selector.v <= family.v_max + span_tol:
            raise SelectorRangeError(f"v={selector.v!r} outside [{family.v_min!r}, {family.v_max!r}]")
        return min(max(selector.v, family.v_min), family.v_max)
    if isinstance(selector, Centroid):
        return 0.5 * (family.v_min + family.v_max)
    if isinstance(selector, RandomPoint):
        return float(make_rng(selector.seed).uniform(family.v_min, family.v_max))
    raise SelectorRangeError(f"Selector {selector!r} does not apply to an equilibrium family")


def sample(eqset: EquilibriumSet, selector: Optional[Selector] = None) -> tuple[FloatArray, FloatArray]:
    """Materialize one point of an equilibrium set.

    Args:
        eqset (EquilibriumSet): a set returned by solve_all.
        selector (Selector, optional): which point. FamilyValue, Centroid and RandomPoint
            apply to EQUAL_ONE families; Centroid, Vertex, Explicit and RandomPoint apply to
            tied ABOVE_ONE simplices. A BELOW_ONE set ignores the selector. Defaults to Centroid.

    Raises:
        SelectorRangeError: if the selector is out of range or does not apply to the set.

    Returns:
        tuple[FloatArray, FloatArray]: (x, y), a point of the set.
    """
    selector = selector if selector is not None else Centroid()
    x, y = eqset.x.copy(), eqset.y.copy()

    if eqset.family is not None:
        v = __family_value(eqset.family, selector)
        x = clamp_probabilities(eqset.family.x_at(v), "investment probabilities")
    elif eqset.simplex is not None and eqset.simplex.indices:
        simplex = eqset.simplex
        if eqset.unique and not isinstance(selector, Explicit):
            y_tied = __water_fill(simplex.upper_bounds, simplex.total)
        else:
            y_tied = __tied_point(simplex, selector)
        y[list(simplex.indices)] = y_tied
    return x, y


def __close(actual: FloatArray, expected: FloatArray, tol: float) -> bool:
    fixed = ~np.isnan(expected)
    return bool(np.all(np.abs(actual[fixed] - expected[fixed]) <= tol))


def __family_contains(family: FamilyRange, x: FloatArray, tol: float) -> bool:
    # each x_i pins v to an interval of half-width tol * loss_bar_i
    v_hat = family.loss_bar * (1.0 - x) - family.attack_cost
    lo = max(family.v_min, float(np.max(v_hat - tol * family.loss_bar)))
    hi = min(family.v_max, float(np.min(v_hat + tol * family.loss_bar)))
    return lo <= hi + tol * max(1.0, abs(family.v_max))


def contains(eqset: EquilibriumSet, x: FloatArray, y: FloatArray, tol: float = DEFAULT_CONTAINS_TOLERANCE) -> bool:
    """Whether (x, y) lies in the set within tol (L-infinity).

    Points on the boundary of the tied simplex (some y_i = 0) count as members.
    """
    x, y = np.asarray(x, dtype=np.float64), np.asarray(y, dtype=np.float64)
    if x.shape != (eqset.n,) or y.shape != (eqset.n,):
        return False
    if abs(no_attack_mass(y) - eqset.y0) > tol:
        return False
    if not (__close(x, eqset.x, tol) and __close(y, eqset.y, tol)):
        return False
    if eqset.family is not None and not __family_contains(eqset.family, x, tol):
        return False
    if eqset.simplex is not None and eqset.simplex.indices:
        simplex = eqset.simplex
        y_tied = y[list(simplex.indices)]
        if np.any(y_tied < -tol) or np.any(y_tied > simplex.upper_bounds + tol):
            return False
        if abs(float(y_tied.sum()) - simplex.total) > tol:
            return False
    return True
