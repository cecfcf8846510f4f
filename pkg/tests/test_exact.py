import itertools
import math

import numpy as np
import pytest

from iddgames.data.classes import (
    Centroid,
    EquilibriumCase,
    EquilibriumSet,
    Explicit,
    FamilyValue,
    RandomPoint,
    Selector,
    Vertex,
)
from iddgames.exact import attack_support_bound, contains, is_unique, sample, solve_all, threshold_crossing
from iddgames.exceptions.custom_exceptions import (
    AssumptionViolatedError,
    NotTransferVulnerableError,
    SelectorRangeError,
)
from iddgames.model import DefenseGame, build_game
from iddgames.oracle import verify_msne
from iddgames.payoff import attack_gains, regret
from tests.factories import circulant_graph, grid_game, homogeneous_game, random_game, random_graph


def grid_equilibria(game: DefenseGame, steps: int, tol: float = 1e-6) -> list[tuple[np.ndarray, np.ndarray]]:
    """Every grid profile (counts / steps) of a transfer-vulnerable game with normalized regret <= tol.

    With alpha = 1 defender i's regret is linear in x_i with end values fixed by y alone, and
    gain_i depends on x_i alone, so only near-indifferent defenders need their x_i scanned.
    """
    n = game.n
    grid = np.arange(steps + 1) / steps
    gain_table = np.stack([attack_gains(game, np.full(n, value)) for value in grid])
    attacker_scale = float(game.derived().loss_bar.max())
    found = []
    for counts in itertools.product(range(steps + 1), repeat=n):
        if sum(counts) > steps:
            continue
        y = np.array(counts) / steps
        at_zero = regret(game, np.zeros(n), y).defender
        at_one = regret(game, np.ones(n), y).defender
        options = [np.flatnonzero((1.0 - grid) * at_zero[i] + grid * at_one[i] <= tol) for i in range(n)]
        rows = np.stack([axis.ravel() for axis in np.meshgrid(*options, indexing="ij")], axis=1)
        gains = gain_table[rows, np.arange(n)]
        attacker = (np.maximum(gains.max(axis=1), 0.0) - gains @ y) / attacker_scale
        for row in rows[attacker <= tol]:
            x = grid[row]
            if regret(game, x, y).epsilon <= tol:
                found.append((x, y))
    return found


def selectors_for(eqset: EquilibriumSet, seed: int) -> list[Selector]:
    """Centroid, a random point and every extreme point the set has: v-range ends or simplex vertices."""
    selectors: list[Selector] = [Centroid(), RandomPoint(seed=seed)]
    if eqset.family is not None:
        selectors += [FamilyValue(eqset.family.v_min), FamilyValue(eqset.family.v_max)]
    if eqset.simplex is not None:
        selectors += [Vertex(priority=(i,)) for i in eqset.simplex.indices]
    return selectors


def test_ring_above_one(ring_game):
    eqset = solve_all(ring_game)
    assert eqset.case is EquilibriumCase.ABOVE_ONE
    assert is_unique(eqset)
    assert eqset.support == (0, 1, 2)
    assert eqset.tied == (2,)
    assert eqset.value == pytest.approx(3.0)
    assert eqset.y0 == 0.0
    x, y = sample(eqset)
    np.testing.assert_allclose(x, [2 / 9, 1 / 9, 0.0], atol=1e-12)
    np.testing.assert_allclose(y, [0.4, 0.4, 0.2], atol=1e-12)
    assert contains(eqset, x, y)


def test_two_node_below_one(two_node_game):
    eqset = solve_all(two_node_game)
    assert eqset.case is EquilibriumCase.BELOW_ONE
    assert is_unique(eqset)
    assert eqset.value == 0.0
    assert eqset.y0 == pytest.approx(0.6)
    np.testing.assert_allclose(eqset.x, [0.5, 0.5])
    np.testing.assert_allclose(eqset.y, [0.2, 0.2])
    x, y = sample(eqset, Vertex(priority=(1,)))
    np.testing.assert_array_equal(x, eqset.x)
    assert verify_msne(two_node_game, x, y).ok


def test_equal_one_family(equal_one_game):
    eqset = solve_all(equal_one_game)
    assert eqset.case is EquilibriumCase.EQUAL_ONE
    assert not is_unique(eqset)
    assert eqset.family is not None
    assert (eqset.family.v_min, eqset.family.v_max) == (0.0, pytest.approx(2.0))
    np.testing.assert_allclose(eqset.y, [0.5, 0.5])

    x, y = sample(eqset, FamilyValue(2.0))
    np.testing.assert_allclose(x, [0.0, 0.0], atol=1e-12)
    assert contains(eqset, x, y)
    x, _ = sample(eqset, FamilyValue(0.0))
    np.testing.assert_allclose(x, [2 / 3, 2 / 3])
    x, _ = sample(eqset)
    np.testing.assert_allclose(x, [1 / 3, 1 / 3])
    assert verify_msne(equal_one_game, x, y).ok


def test_equal_one_contains_only_family_points(equal_one_game):
    eqset = solve_all(equal_one_game)
    y = np.array([0.5, 0.5])
    assert contains(eqset, np.array([0.5, 0.5]), y)
    assert not contains(eqset, np.array([0.0, 1 / 3]), y)
    assert not contains(eqset, np.array([0.9, 0.9]), y)
    assert not contains(eqset, np.array([0.5, 0.5]), np.array([0.4, 0.5]))


def test_equal_one_selectors(equal_one_game):
    eqset = solve_all(equal_one_game)
    with pytest.raises(SelectorRangeError):
        sample(eqset, FamilyValue(2.5))
    with pytest.raises(SelectorRangeError):
        sample(eqset, Vertex(priority=(0,)))
    x, y = sample(eqset, RandomPoint(seed=4))
    assert contains(eqset, x, y)


def test_tied_simplex(tied_game):
    eqset = solve_all(tied_game)
    assert eqset.case is EquilibriumCase.ABOVE_ONE
    assert not is_unique(eqset)
    assert eqset.tied == (0, 1, 2)
    assert eqset.value == pytest.approx(1.5)
    assert eqset.simplex is not None
    assert eqset.simplex.total == pytest.approx(1.0)

    x, y = sample(eqset)
    np.testing.assert_array_equal(x, [0.0, 0.0, 0.0])
    np.testing.assert_allclose(y, [1 / 3, 1 / 3, 1 / 3])
    assert verify_msne(tied_game, x, y).ok
    assert contains(eqset, x, np.array([0.4, 0.4, 0.2]))
    assert not contains(eqset, x, np.array([1 / 3, 1 / 3, 0.21]))
    assert not contains(eqset, x, np.array([0.45, 0.35, 0.2]))


def test_tied_simplex_selectors(tied_game):
    eqset = solve_all(tied_game)
    _, y = sample(eqset, Vertex(priority=(2, 0)))
    np.testing.assert_allclose(y, [0.4, 0.2, 0.4])
    _, y = sample(eqset, Explicit(y=(0.4, 0.3, 0.3)))
    np.testing.assert_allclose(y, [0.4, 0.3, 0.3])
    x, y = sample(eqset, RandomPoint(seed=9))
    assert contains(eqset, x, y)
    assert verify_msne(tied_game, x, y).ok


@pytest.mark.parametrize(
    "selector",
    [
        Vertex(priority=(5,)),
        Vertex(priority=(0, 0)),
        Explicit(y=(0.5, 0.3, 0.2)),
        Explicit(y=(0.3, 0.3, 0.3)),
        Explicit(y=(0.5, 0.5)),
        FamilyValue(1.0),
    ],
)
def test_tied_simplex_selector_errors(tied_game, selector):
    with pytest.raises(SelectorRangeError):
        sample(solve_all(tied_game), selector)


def test_contains_shape_mismatch(ring_game):
    assert not contains(solve_all(ring_game), np.zeros(2), np.zeros(2))


def test_not_transfer_vulnerable():
    game = build_game(
        2, {(0, 1): 0.1}, invest_cost=1.0, loss=10.0, direct_success=0.5, attack_cost=1.0, unblocked_transfer=[1, 0.5]
    )
    with pytest.raises(NotTransferVulnerableError):
        solve_all(game)


def test_assumption_violation_carries_report():
    game = build_game(2, {(0, 1): 0.1}, invest_cost=[6.0, 1.0], loss=10.0, direct_success=0.5, attack_cost=1.0)
    with pytest.raises(AssumptionViolatedError) as e:
        solve_all(game)
    assert e.value.report is not None
    assert not e.value.report.is_valid


def test_empty_game():
    eqset = solve_all(build_game(0, {}, invest_cost=1.0, loss=1.0, direct_success=0.5, attack_cost=1.0))
    assert eqset.case is EquilibriumCase.BELOW_ONE
    assert eqset.y0 == 1.0
    assert eqset.n == 0
    assert attack_support_bound(build_game(0, {}, invest_cost=1.0, loss=1.0, direct_success=0.5, attack_cost=1.0)) == 0


def test_attack_support_bound(ring_game):
    eqset = solve_all(ring_game)
    assert len(eqset.support) <= math.ceil(attack_support_bound(ring_game))
    assert attack_support_bound(ring_game) == pytest.approx(2.5)


@pytest.mark.parametrize(
    "thresholds, expected",
    [([0.5, 0.6], 1), ([0.25] * 4, 3), ([0.3] * 4, 3), ([0.1] * 10, 9)],
)
def test_threshold_crossing(thresholds, expected):
    # ten 0.1 steps add up to just under 1
    assert threshold_crossing(np.cumsum(thresholds)) == expected


@pytest.mark.parametrize("case", list(EquilibriumCase))
@pytest.mark.parametrize("seed", range(8))
def test_sampled_points_are_equilibria(case, seed):
    game = random_game(seed, 6, case=case)
    eqset = solve_all(game)
    assert eqset.case is case
    for selector in selectors_for(eqset, seed):
        x, y = sample(eqset, selector)
        assert contains(eqset, x, y)
        assert verify_msne(game, x, y).ok


@pytest.mark.parametrize("seed", range(5))
def test_distinct_margins_leave_one_unprotected_target(seed):
    game = random_game(seed, 8, case=EquilibriumCase.ABOVE_ONE)
    eqset = solve_all(game)
    x, _ = sample(eqset)
    assert len(eqset.tied) == 1
    assert eqset.unique
    assert sum(1 for i in eqset.support if x[i] == 0.0) == 1


@pytest.mark.parametrize("n, out_degree", [(5, 1), (8, 2), (12, 3)])
def test_homogeneous_circulant_games_spread_the_attack(n, out_degree):
    game = homogeneous_game(circulant_graph(n, out_degree), seed=n)
    eqset = solve_all(game)
    assert eqset.tied == tuple(range(n))
    x, y = sample(eqset)
    np.testing.assert_allclose(y, np.full(n, 1.0 / n))
    np.testing.assert_array_equal(x, np.zeros(n))


@pytest.mark.parametrize("seed", range(5))
def test_investment_grows_with_children(seed):
    graph = random_graph(seed, 8, 0.3)
    game = homogeneous_game(graph, seed=seed)
    eqset = solve_all(game)
    x, _ = sample(eqset)
    investing = [i for i in eqset.support if x[i] > 0.0]
    by_children = sorted(investing, key=lambda i: graph.out_degree[i])
    values = [x[i] for i in by_children]
    assert all(a <= b + 1e-12 for a, b in zip(values, values[1:]))


def test_grid_scan_two_node_game(two_node_game):
    eqset = solve_all(two_node_game)
    found = grid_equilibria(two_node_game, steps=100)
    assert found
    for x, y in found:
        assert contains(eqset, x, y, tol=0.02)


@pytest.mark.parametrize("case", list(EquilibriumCase))
def test_grid_scan_finds_grid_aligned_equilibria(case):
    game = grid_game(3, 2, case)
    eqset = solve_all(game)
    assert eqset.case is case
    found = grid_equilibria(game, steps=100)
    assert found
    for x, y in found:
        assert contains(eqset, x, y, tol=0.02)
