import logging
import statistics

import numpy as np
import pytest

from iddgames.brgd import run
from iddgames.data.classes import BrgdConfig, EquilibriumCase, GeneratorMode, GeneratorSpec, GraphKind
from iddgames.exact import contains, sample, solve_all
from iddgames.experiments import sweep
from iddgames.gen import synth_graph
from iddgames.oracle import expected_cost_enum, expected_utility_enum, psne_search, verify_msne
from iddgames.payoff import mixed_attacker_utility, mixed_costs
from iddgames.utils import make_rng
from tests.factories import circulant_graph, grid_game, homogeneous_game, random_game, random_graph
from tests.test_benchmark import perform_speed_test
from tests.test_exact import grid_equilibria, selectors_for

logger = logging.getLogger(__name__)

SWEEP_EPSILONS = [0.002, 0.003, 0.004, 0.005, 0.006, 0.007, 0.008, 0.009]


@pytest.fixture(scope="module")
def synthetic_internet():
    return synth_graph(GraphKind.PREFERENTIAL_ATTACHMENT, {"n": 2000, "m": 2}, seed=5)


@pytest.mark.slow
@pytest.mark.parametrize("seed", range(20))
def test_grid_scan_small_games(seed):
    n = 2 + seed % 2
    case = list(EquilibriumCase)[seed % 3]
    game = grid_game(seed, n, case)
    eqset = solve_all(game)
    assert eqset.case is case
    found = grid_equilibria(game, steps=100)
    assert found
    for x, y in found:
        assert contains(eqset, x, y, tol=0.02)


@pytest.mark.slow
def test_sampled_points_pass_verification_many_games():
    for seed in range(500):
        case = list(EquilibriumCase)[seed % 3]
        n = 1 + seed % 8 if case is EquilibriumCase.BELOW_ONE else 2 + seed % 7
        game = random_game(seed, n, case=case)
        eqset = solve_all(game)
        assert eqset.case is case
        for selector in selectors_for(eqset, seed):
            x, y = sample(eqset, selector)
            assert verify_msne(game, x, y, tol=1e-9).ok, (seed, selector)


@pytest.mark.slow
def test_tied_vertices_pass_verification():
    for seed in range(50):
        game = homogeneous_game(circulant_graph(3 + seed % 6, 1 + seed % 2), seed=seed)
        eqset = solve_all(game)
        for selector in selectors_for(eqset, seed):
            x, y = sample(eqset, selector)
            assert verify_msne(game, x, y, tol=1e-9).ok, (seed, selector)


@pytest.mark.slow
def test_identical_degree_games_spread_the_attack_evenly():
    for seed in range(50):
        n = 4 + seed % 9
        game = homogeneous_game(circulant_graph(n, 1 + seed % 3), seed=seed)
        _, y = sample(solve_all(game))
        attacked = y[y > 0.0]
        assert float(attacked.max() - attacked.min()) <= 1e-12


@pytest.mark.slow
def test_investment_grows_with_children_many_games():
    for seed in range(50):
        graph = random_graph(seed, 6 + seed % 7, 0.3)
        game = homogeneous_game(graph, seed=seed)
        eqset = solve_all(game)
        x, _ = sample(eqset)
        investing = sorted((i for i in eqset.support if x[i] > 0.0), key=lambda i: graph.out_degree[i])
        values = [x[i] for i in investing]
        assert all(a <= b + 1e-12 for a, b in zip(values, values[1:])), seed


@pytest.mark.slow
def test_one_unprotected_target_many_games():
    for seed in range(100):
        game = random_game(seed, 3 + seed % 8, case=EquilibriumCase.ABOVE_ONE)
        eqset = solve_all(game)
        x, _ = sample(eqset)
        assert sum(1 for i in eqset.support if x[i] == 0.0) == 1, seed


@pytest.mark.slow
def test_oracle_equivalence_many_games():
    rng = make_rng(99)
    for seed in range(200):
        n = int(rng.integers(1, 7))
        game = random_game(seed, n, mixed_alpha=True)
        for _ in range(50):
            x = rng.random(n)
            y = rng.dirichlet(np.ones(n + 1))[1:]
            enumerated = [expected_cost_enum(game, x, y, i) for i in range(n)]
            np.testing.assert_allclose(mixed_costs(game, x, y), enumerated, rtol=1e-10, atol=1e-12)
            assert mixed_attacker_utility(game, x, y) == pytest.approx(
                expected_utility_enum(game, x, y), rel=1e-10, abs=1e-12
            )


@pytest.mark.slow
def test_no_psne_on_valid_games():
    for seed in range(100):
        game = random_game(seed, 2 + seed % 7, mixed_alpha=seed % 2 == 1)
        assert psne_search(game) is None


@pytest.mark.slow
@pytest.mark.parametrize("mode", list(GeneratorMode))
def test_sweep_on_synthetic_internet(synthetic_internet, mode):
    def run_sweep():
        spec = GeneratorSpec(mode=mode, seed=5)
        result = sweep(synthetic_internet, spec, SWEEP_EPSILONS, 10, BrgdConfig(), workers=4)
        assert len(result.rows) == 80
        medians = []
        for eps in SWEEP_EPSILONS:
            rows = [row for row in result.rows if row.epsilon == eps]
            assert sum(row.converged for row in rows) >= 9, eps
            medians.append(statistics.median(row.iterations for row in rows))
        assert all(a >= b for a, b in zip(medians, medians[1:])), medians
        assert result.fit is not None
        assert result.fit.exponent < 0.0

    perform_speed_test(run_sweep, 1800)


@pytest.mark.slow
def test_dynamics_land_near_exact_point():
    landed, converged = 0, 0
    for seed in range(30):
        game = random_game(seed, 2 + seed % 49)
        x_star, y_star = sample(solve_all(game))
        result = run(game, BrgdConfig(epsilon=1e-4, max_iterations=20_000, seed=seed))
        if not result.converged:
            logger.warning("Game %d: regret %.3g after %d iterations", seed, result.report.epsilon, result.iterations)
            continue
        converged += 1
        distance = max(float(np.max(np.abs(result.x - x_star))), float(np.max(np.abs(result.y - y_star))))
        if distance <= 0.02:
            landed += 1
        else:
            logger.warning("Game %d: converged %.3g away from the exact point", seed, distance)
        assert result.report.epsilon <= 1e-4
    logger.info("%d of %d converged runs landed within 0.02 of the exact point", landed, converged)
