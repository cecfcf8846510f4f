import numpy as np
import pytest

from iddgames.data.classes import BrgdConfig, GeneratorSpec, HomogeneousParams
from iddgames.exact import contains, sample, solve_all
from iddgames.exceptions.custom_exceptions import GameFormatError, InvalidConfigError
from iddgames.serialization import (
    eqset_from_dict,
    eqset_to_dict,
    game_from_dict,
    game_to_dict,
    generator_spec_from_dict,
    generator_spec_to_dict,
    load_game,
    read_json,
    strategies_from_dict,
    write_json,
)

NODE = {"C": 1.0, "L": 2.0, "p_hat": 0.5, "alpha": 1.0, "C0": 0.5}
EDGE = {"src": "a", "dst": "b", "q_hat": 0.1}


def test_load_ring_game(ring_game_file_name, ring_game):
    game = load_game(ring_game_file_name)
    assert game.node_ids == ["AS1", "AS2", "AS3"]
    assert game.graph == ring_game.graph
    np.testing.assert_array_equal(game.attack_cost, ring_game.attack_cost)
    np.testing.assert_array_equal(game.transfer_success, ring_game.transfer_success)


def test_game_document_uses_identifiers(ring_game_file_name):
    document = game_to_dict(load_game(ring_game_file_name))
    assert document["edges"][0] == {"src": "AS1", "dst": "AS2", "q_hat": 0.2}
    assert game_to_dict(game_from_dict(document)) == document


@pytest.mark.parametrize(
    "document, message",
    [
        ({"nodes": []}, "edges"),
        ({"nodes": [{"id": "a"}], "edges": []}, "nodes.0.C"),
        ({"nodes": [{"id": "a", "C": "x", "L": 1, "p_hat": 1, "alpha": 1, "C0": 1}], "edges": []}, "valid number"),
        ({"nodes": [{"id": "a", **NODE}, {"id": "a", **NODE}], "edges": []}, "Duplicate"),
        ({"nodes": [{"id": "a", **NODE}], "edges": [{"src": "a", "dst": "b", "q_hat": 0.1}]}, "unknown"),
        ({"nodes": [{"id": "a", **NODE}, {"id": "b", **NODE}], "edges": [EDGE, EDGE]}, "Duplicate edge"),
    ],
)
def test_malformed_game(document, message):
    with pytest.raises(GameFormatError, match=message):
        game_from_dict(document)


def test_read_json_rejects_garbage(tmp_path):
    path = tmp_path / "bad.json"
    path.write_text("{not json", encoding="utf-8")
    with pytest.raises(GameFormatError):
        read_json(path)


def test_write_json_rejects_nan():
    with pytest.raises(ValueError):
        write_json({"x": float("nan")})


@pytest.mark.parametrize("fixture", ["ring_game", "tied_game", "equal_one_game", "two_node_game"])
def test_eqset_document(fixture, request):
    eqset = solve_all(request.getfixturevalue(fixture))
    document = eqset_to_dict(eqset)
    write_json(document)
    restored = eqset_from_dict(document)
    assert restored.case is eqset.case
    assert restored.unique == eqset.unique
    x, y = sample(eqset)
    assert contains(restored, x, y)
    np.testing.assert_array_equal(sample(restored)[1], y)


def test_malformed_eqset():
    with pytest.raises(GameFormatError):
        eqset_from_dict({"case": "SIDEWAYS", "y0": 0.0, "fixed": [], "unique": True})


def test_strategies_from_dict():
    x, y = strategies_from_dict({"x": [0.5, 1], "y": [0.1, 0.2]})
    np.testing.assert_array_equal(x, [0.5, 1.0])
    with pytest.raises(GameFormatError):
        strategies_from_dict({"x": [[0.5]], "y": [0.1]})
    with pytest.raises(GameFormatError):
        strategies_from_dict({"x": [0.5]})


def test_generator_spec_round_trip():
    spec = GeneratorSpec(
        mode="random",
        seed=12,
        homogeneous=HomogeneousParams(invest_cost=1.0, loss=2.0, direct_success=0.5, attack_cost=0.5, transfer=0.1),
    )
    assert generator_spec_from_dict(generator_spec_to_dict(spec)) == spec
    assert generator_spec_from_dict({}) == GeneratorSpec()


def test_generator_spec_unknown_field():
    with pytest.raises(InvalidConfigError):
        generator_spec_from_dict({"constants": {"gamma": 1.0}})


def test_brgd_config_is_immutable():
    config = BrgdConfig()
    with pytest.raises(AttributeError):
        config.epsilon = 0.1  # type: ignore[misc]


def test_numeric_identifiers_are_read_as_text():
    document = {"nodes": [{"id": 1, **NODE}, {"id": 2, **NODE}], "edges": [{"src": 1, "dst": 2, "q_hat": 0.1}]}
    game = game_from_dict(document)
    assert game.node_ids == ["1", "2"]
    assert game_to_dict(game)["edges"] == [{"src": "1", "dst": "2", "q_hat": 0.1}]


def test_generator_spec_rejects_wrong_types():
    with pytest.raises(InvalidConfigError):
        generator_spec_from_dict({"seed": "many"})
    with pytest.raises(InvalidConfigError):
        generator_spec_from_dict({"mode": "sideways"})
    with pytest.raises(InvalidConfigError):
        generator_spec_from_dict({"homogeneous": {"loss": 1.0}})
