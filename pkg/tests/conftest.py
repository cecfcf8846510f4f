import pytest

from iddgames.model import build_game


def pytest_addoption(parser):
    parser.addoption("--runslow", action="store_true", default=False, help="run the long acceptance tests")


def pytest_collection_modifyitems(config, items):
    if config.getoption("--runslow"):
        return
    skip_slow = pytest.mark.skip(reason="needs --runslow")
    for item in items:
        if "slow" in item.keywords:
            item.add_marker(skip_slow)


@pytest.fixture()
def ring_edge_list_file_name():
    return "tests/resources/ring.txt"


@pytest.fixture()
def ring_game_file_name():
    return "tests/resources/ring_game.json"


@pytest.fixture()
def empty_file_name():
    return "tests/resources/empty.txt"


@pytest.fixture()
def malformed_edge_list_file_name():
    return "tests/resources/malformed.txt"


@pytest.fixture()
def two_node_game():
    # sum(delta_hat) = 0.4: BELOW_ONE, x* = (0.5, 0.5), y* = (0.2, 0.2)
    return build_game(
        2,
        {(0, 1): 0.1, (1, 0): 0.1},
        invest_cost=1.0,
        loss=10.0,
        direct_success=0.5,
        attack_cost=3.0,
    )


@pytest.fixture()
def ring_game():
    # 0 -> 1 -> 2 -> 0; sum(delta_hat) = 1.2: ABOVE_ONE, x* = (2/9, 1/9, 0), y* = (0.4, 0.4, 0.2)
    return build_game(
        3,
        {(0, 1): 0.2, (1, 2): 0.2, (2, 0): 0.2},
        invest_cost=1.0,
        loss=10.0,
        direct_success=0.25,
        attack_cost=[0.5, 1.0, 1.5],
    )


@pytest.fixture()
def equal_one_game():
    # delta_hat = 0.5 each; loss_bar = 3, margin_bar = 2, x_i(v) = 1 - (v + 1) / 3 on [0, 2]
    return build_game(
        2,
        {(0, 1): 0.1, (1, 0): 0.1},
        invest_cost=1.0,
        loss=10.0,
        direct_success=0.2,
        attack_cost=1.0,
    )


@pytest.fixture()
def tied_game():
    # three isolated identical nodes: every margin ties, the attack mass 1 is shared on the capped simplex
    return build_game(3, {}, invest_cost=1.0, loss=10.0, direct_success=0.25, attack_cost=1.0)
