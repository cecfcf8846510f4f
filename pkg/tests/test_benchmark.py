import math
import time
import tracemalloc

import pytest

from iddgames.brgd import init_random, step
from iddgames.data.classes import GeneratorSpec, GraphKind, HomogeneousParams
from iddgames.exact import sample, solve_all
from iddgames.gen import generate, synth_graph
from iddgames.payoff import regret

INTERNET_SIZE = 27_000


@pytest.fixture(scope="module")
def large_game():
    graph = synth_graph(GraphKind.PREFERENTIAL_ATTACHMENT, {"n": INTERNET_SIZE, "m": 2}, seed=1)
    params = HomogeneousParams(invest_cost=1.0, loss=10.0, direct_success=0.3, attack_cost=1.0, transfer=0.001)
    return generate(graph, GeneratorSpec(homogeneous=params))


def perform_speed_test(action, expected_processing_seconds):
    start_time = time.perf_counter()
    action()
    elapsed = time.perf_counter() - start_time
    assert math.floor(elapsed) < expected_processing_seconds, "Benchmark time exceeded!"


def perform_memory_test(action, expected_peak_memory):
    tracemalloc.start()
    action()
    peak_memory = tracemalloc.get_traced_memory()[1] / (1024 * 1024)
    tracemalloc.stop()
    assert math.floor(peak_memory) <= expected_peak_memory, "Benchmark memory usage exceeded!"


def test_speed_solve_all(large_game):
    perform_speed_test(lambda: sample(solve_all(large_game)), 3)


def test_memory_solve_all(large_game):
    perform_memory_test(lambda: solve_all(large_game), 64)


def test_speed_brgd_steps(large_game):
    x, y = init_random(0, INTERNET_SIZE)

    def ten_steps():
        nonlocal x, y
        for _ in range(10):
            regret(large_game, x, y)
            x, y = step(large_game, x, y, 0.1)

    perform_speed_test(ten_steps, 3)
