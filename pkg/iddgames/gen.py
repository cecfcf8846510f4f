import logging
from collections.abc import Mapping, Sequence
from typing import Any, Optional, Union

import numpy as np

from .data.classes import FloatArray, GeneratorMode, GeneratorSpec, GraphKind
from .exceptions.custom_exceptions import InternalConsistencyError, InvalidGeneratorParamsError
from .graph import DirectedGraph
from .model import DefenseGame
from .serialization import generator_spec_to_dict
from .utils import graph_fingerprint, make_rng

logger = logging.getLogger(__name__)

DRAW_SCHEME = "per-parameter-independent"
# Columns of the per-node uniform draw matrix.
ALPHA, LOSS, COST, Z, P_TILDE = range(5)


def __uniform_draws(n: int, spec: GeneratorSpec) -> FloatArray:
    if spec.mode is GeneratorMode.FIXED:
        return np.full((n, 5), spec.constants.fixed_draw)
    draws: FloatArray = make_rng(spec.seed).random((n, 5))
    return draws


def __provenance(graph: DirectedGraph, spec: GeneratorSpec) -> dict[str, Any]:
    return {
        "spec": generator_spec_to_dict(spec),
        "seed": spec.seed,
        "draws": DRAW_SCHEME,
        "graph": {
            "edges": graph.edge_count,
            "fingerprint": graph_fingerprint(graph.node_count, graph.src, graph.dst),
        },
    }


def __homogeneous_game(graph: DirectedGraph, spec: GeneratorSpec, node_ids: Optional[Sequence[str]]) -> DefenseGame:
    params = spec.homogeneous
    assert params is not None
    return DefenseGame(
        graph,
        invest_cost=params.invest_cost,
        loss=params.loss,
        direct_success=params.direct_success,
        attack_cost=params.attack_cost,
        transfer_success=params.transfer,
        unblocked_transfer=params.unblocked_transfer,
        node_ids=node_ids,
        provenance=__provenance(graph, spec),
    )


def __internet_game(graph: DirectedGraph, spec: GeneratorSpec, node_ids: Optional[Sequence[str]]) -> DefenseGame:
    k = spec.constants
    n, src, dst = graph.node_count, graph.src, graph.dst
    u = __uniform_draws(n, spec)

    alpha = u[:, ALPHA] / k.alpha_divisor
    loss = k.loss_base + k.loss_span * u[:, LOSS]
    cost = k.cost_base + k.cost_span * u[:, COST]
    z = k.z_base + u[:, Z] / k.z_divisor
    p_tilde = k.p_tilde_base + u[:, P_TILDE] / k.p_tilde_divisor

    # transfer weight of each child is its total degree
    degree = (graph.in_degree + graph.out_degree).astype(np.float64)
    child_degree = np.bincount(src, weights=degree[dst], minlength=n)
    has_children = graph.out_degree > 0
    if np.any(child_degree[has_children] < graph.out_degree[has_children]):
        raise InternalConsistencyError("Children degree sum below the child count")
    q_tilde = z[src] * degree[dst] / child_degree[src] if graph.edge_count else np.zeros(0)

    risk = p_tilde + np.bincount(src, weights=q_tilde, minlength=n)
    p_hat = k.risk_total * p_tilde / risk
    p_hat[~has_children] = k.risk_total
    q_hat = k.risk_total * q_tilde / risk[src] if graph.edge_count else np.zeros(0)

    return DefenseGame(
        graph,
        invest_cost=cost,
        loss=loss,
        direct_success=p_hat,
        attack_cost=k.attack_cost,
        transfer_success=q_hat,
        unblocked_transfer=alpha,
        node_ids=node_ids,
        provenance=__provenance(graph, spec),
    )


def generate(graph: DirectedGraph, spec: GeneratorSpec, node_ids: Optional[Sequence[str]] = None) -> DefenseGame:
    """Parameterize a graph as an Internet defense game.

    Per node, with a draw U (0.5 in fixed mode, an independent Uniform[0, 1] per parameter
    and node in random mode): alpha = U/20, L = 1e8 + 1e9 U, C = 1e5 + 1e6 U,
    z = 0.2 + U/5, p_tilde = 0.8 + U/10 and C0 = 1e6. Child j of i receives the raw
    transfer weight z_i deg(j) / sum over children k of deg(k), deg being the total degree,
    then p_tilde_i and the weights are rescaled so that p_hat_i + sum_j q_hat_ij = 0.9.
    With ``spec.homogeneous`` set, every node and edge shares the given constants instead.

    Args:
        graph (DirectedGraph): interaction graph.
        spec (GeneratorSpec): mode, seed and constants.
        node_ids (Sequence[str], optional): identifiers carried into the game.

    Returns:
        DefenseGame: the game, with a provenance block. Validation failures are logged, not raised.
    """
    if spec.homogeneous is not None:
        game = __homogeneous_game(graph, spec, node_ids)
    else:
        game = __internet_game(graph, spec, node_ids)
    logger.info(
        "Generated %s game on %d nodes, %d edges (seed %d, fingerprint %s)",
        "homogeneous" if spec.homogeneous is not None else spec.mode.value,
        graph.node_count,
        graph.edge_count,
        spec.seed,
        game.provenance["graph"]["fingerprint"] if game.provenance else "",
    )
    for violation in game.validate().violations:
        logger.warning("Generated game violates %s: %s", violation.rule.value, violation)
    return game


def __require(params: Mapping[str, Any], name: str) -> Any:
    if name not in params:
        raise InvalidGeneratorParamsError(f"Missing generator parameter {name!r}")
    return params[name]


def __erdos_renyi_directed(n: int, p: float, rng: np.random.Generator) -> list[tuple[int, int]]:
    if not 0.0 <= p <= 1.0:
        raise InvalidGeneratorParamsError(f"Edge probability must lie in [0, 1], got {p!r}")
    edges: list[tuple[int, int]] = []
    for i in range(n):
        row = rng.random(n) < p
        row[i] = False
        edges.extend((i, int(j)) for j in np.flatnonzero(row))
    return edges


def __preferential_attachment(n: int, m: int, rng: np.random.Generator) -> list[tuple[int, int]]:
    """Each new node links to m distinct older nodes picked proportionally to their degree."""
    if m < 1 or m >= n:
        raise InvalidGeneratorParamsError(f"Preferential attachment needs 1 <= m < n, got m={m}, n={n}")
    repeated: list[int] = list(range(m))
    edges: list[tuple[int, int]] = []
    for new_node in range(m, n):
        targets: set[int] = set()
        while len(targets) < m:
            targets.add(repeated[int(rng.integers(len(repeated)))])
        chosen = sorted(targets)
        edges.extend((new_node, t) for t in chosen)
        repeated.extend(chosen)
        repeated.extend([new_node] * m)
    return edges


def synth_graph(
    kind: Union[GraphKind, str], params: Mapping[str, Any], seed: int = 0
) -> DirectedGraph:
    """Synthesize a directed graph.

    Args:
        kind (GraphKind | str): "erdos_renyi_directed" (params n, p: every ordered pair is
            an edge independently with probability p) or "preferential_attachment" (params n, m:
            each new node points to m older nodes chosen by degree).
        params (Mapping[str, Any]): generator parameters.
        seed (int, optional): RNG seed. Defaults to 0.

    Raises:
        InvalidGeneratorParamsError: on an unknown kind or invalid parameters.

    Returns:
        DirectedGraph: the graph, deterministic per seed.
    """
    try:
        kind = GraphKind(kind)
    except ValueError as e:
        raise InvalidGeneratorParamsError(f"Unknown graph kind {kind!r}") from e
    n = int(__require(params, "n"))
    if n < 0:
        raise InvalidGeneratorParamsError("n must be non-negative")
    rng = make_rng(seed)
    if kind is GraphKind.ERDOS_RENYI_DIRECTED:
        edges = __erdos_renyi_directed(n, float(__require(params, "p")), rng)
    else:
        edges = __preferential_attachment(n, int(__require(params, "m")), rng)
    logger.info("Synthesized %s graph: %d nodes, %d edges", kind.value, n, len(edges))
    return DirectedGraph(n, edges)
