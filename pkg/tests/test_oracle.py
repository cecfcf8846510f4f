import numpy as np
import pytest

from iddgames.data.classes import PureProfile
from iddgames.exceptions.custom_exceptions import InvalidStrategyError, SizeCapExceededError
from iddgames.model import build_game
from iddgames.oracle import (
    attack_gain_enum,
    expected_utility_enum,
    is_pure_equilibrium,
    psne_search,
    simulate_pure_cost,
    verify_msne,
)
from iddgames.payoff import NO_ATTACK, attack_gains, pure_cost
from iddgames.utils import make_rng
from tests.factories import random_game

RING_X = np.array([2 / 9, 1 / 9, 0.0])
RING_Y = np.array([0.4, 0.4, 0.2])


@pytest.fixture()
def no_assumption_game():
    # investing costs more than the loss, so the attacked defender stays unprotected
    return build_game(1, {}, invest_cost=10.0, loss=1.0, direct_success=1.0, attack_cost=0.5)


def test_psne_outside_assumptions(no_assumption_game):
    profile = psne_search(no_assumption_game)
    assert profile == PureProfile(a=(0,), target=0)
    assert is_pure_equilibrium(no_assumption_game, profile)


def test_no_psne_on_fixtures(two_node_game, ring_game):
    assert psne_search(two_node_game) is None
    assert psne_search(ring_game) is None


@pytest.mark.parametrize("seed", range(10))
def test_no_psne_on_valid_random_games(seed):
    game = random_game(seed, 4, mixed_alpha=True)
    assert game.validate().is_valid
    assert psne_search(game) is None


def test_is_pure_equilibrium_rejects_idle_attacker(ring_game):
    assert not is_pure_equilibrium(ring_game, PureProfile(a=(0, 0, 0), target=NO_ATTACK))


def test_psne_size_cap():
    game = build_game(21, {}, invest_cost=1.0, loss=10.0, direct_success=0.5, attack_cost=1.0)
    with pytest.raises(SizeCapExceededError):
        psne_search(game)
    with pytest.raises(SizeCapExceededError):
        expected_utility_enum(game, np.zeros(21), np.zeros(21))


def test_parent_cap():
    edges = {(j, 21): 0.01 for j in range(21)}
    game = build_game(22, edges, invest_cost=1.0, loss=10.0, direct_success=0.5, attack_cost=1.0)
    with pytest.raises(SizeCapExceededError, match="parents"):
        attack_gain_enum(game, np.zeros(22), 0)


@pytest.mark.parametrize("seed", range(10))
def test_attack_gain_enumeration(seed):
    game = random_game(seed, 5, mixed_alpha=True)
    x = make_rng(seed).random(5)
    enumerated = [attack_gain_enum(game, x, i) for i in range(5)]
    np.testing.assert_allclose(attack_gains(game, x), enumerated, rtol=1e-10, atol=1e-12)


def test_verify_ring_equilibrium(ring_game):
    report = verify_msne(ring_game, RING_X, RING_Y)
    assert report.ok
    assert report.violations == []


def test_verify_flags_attacker(ring_game):
    x = RING_X.copy()
    x[1] = 0.5
    report = verify_msne(ring_game, x, RING_Y)
    assert not report.ok
    (violation,) = report.violations
    assert violation.player is None
    assert "node 1" in violation.condition


def test_verify_flags_defenders(ring_game):
    report = verify_msne(ring_game, RING_X, np.array([0.5, 0.3, 0.2]))
    assert not report.ok
    assert {v.player for v in report.violations} == {0, 1}


def test_verify_flags_withheld_attack(two_node_game):
    report = verify_msne(two_node_game, np.zeros(2), np.zeros(2))
    assert not report.ok
    assert any("withholds" in v.condition for v in report.violations)


def test_verify_rejects_malformed_strategies(ring_game):
    with pytest.raises(InvalidStrategyError):
        verify_msne(ring_game, RING_X, np.array([0.6, 0.6, 0.0]))


def test_simulated_cost_matches_pure_cost(ring_game):
    expected = pure_cost(ring_game, (0, 0, 0), 1, 2)
    mean, stderr = simulate_pure_cost(ring_game, (0, 0, 0), 1, 2, samples=100_000, seed=7)
    assert stderr > 0.0
    assert abs(mean - expected) < 4.0 * stderr


def test_simulated_cost_with_partial_blocking():
    game = build_game(
        2,
        {(0, 1): 0.4},
        invest_cost=1.0,
        loss=10.0,
        direct_success=0.5,
        attack_cost=1.0,
        unblocked_transfer=[1.0, 0.5],
    )
    expected = pure_cost(game, (0, 1), 0, 1)
    assert expected == pytest.approx(1.0 + 0.5 * 0.4 * 10.0)
    mean, stderr = simulate_pure_cost(game, (0, 1), 0, 1, samples=100_000, seed=3)
    assert abs(mean - expected) < 4.0 * stderr


def test_simulated_cost_without_attack(ring_game):
    assert simulate_pure_cost(ring_game, (1, 0, 0), NO_ATTACK, 0, samples=100) == (1.0, 0.0)
