import logging
import warnings
from collections.abc import Mapping, Sequence
from typing import Any, Optional, Union

import numpy as np

from .data.classes import DerivedQuantities, FloatArray, Rule, ValidationReport, Violation
from .graph import DirectedGraph

logger = logging.getLogger(__name__)

# Slack above 1 allowed on p_hat_i + sum_j q_hat_ij to absorb generator round-off.
RISK_BUDGET_TOLERANCE = 1e-12

Numbers = Union[float, Sequence[float], FloatArray]


class DefenseGame:
    """An interdependent defense game: a directed graph with per-node and per-edge economics.

    Per node i: invest_cost C_i, loss L_i, direct_success p_hat_i, unblocked_transfer alpha_i
    and attack_cost C0_i. Per edge (i, j), in the graph's sorted edge order: transfer_success
    q_hat_ij. Arrays are copied and made read-only; range checks are left to ``validate``.
    """

    def __init__(
        self,
        graph: DirectedGraph,
        invest_cost: Numbers,
        loss: Numbers,
        direct_success: Numbers,
        attack_cost: Numbers,
        transfer_success: Numbers = (),
        unblocked_transfer: Numbers = 1.0,
        node_ids: Optional[Sequence[str]] = None,
        provenance: Optional[dict[str, Any]] = None,
    ) -> None:
        """Initialize the game.

        Args:
            graph (DirectedGraph): interaction graph; edge (i, j) means i can transfer risk to j.
            invest_cost (float | Sequence[float]): C_i, scalar values broadcast to every node.
            loss (float | Sequence[float]): L_i.
            direct_success (float | Sequence[float]): p_hat_i.
            attack_cost (float | Sequence[float]): C0_i.
            transfer_success (float | Sequence[float]): q_hat per edge in ``graph.edges`` order.
            unblocked_transfer (float | Sequence[float], optional): alpha_i. Defaults to 1.
            node_ids (Sequence[str], optional): display identifiers. Defaults to the indices.
            provenance (dict, optional): free-form origin metadata, kept on serialization.

        Raises:
            ValueError: if an array does not match the node or edge count.
        """
        self.graph = graph
        n, m = graph.node_count, graph.edge_count
        self.invest_cost = self.__as_array(invest_cost, n, "invest_cost")
        self.loss = self.__as_array(loss, n, "loss")
        self.direct_success = self.__as_array(direct_success, n, "direct_success")
        self.attack_cost = self.__as_array(attack_cost, n, "attack_cost")
        self.unblocked_transfer = self.__as_array(unblocked_transfer, n, "unblocked_transfer")
        self.transfer_success = self.__as_array(transfer_success, m, "transfer_success")
        self.node_ids: list[str] = list(node_ids) if node_ids is not None else [str(i) for i in range(n)]
        if len(self.node_ids) != n:
            raise ValueError(f"node_ids has {len(self.node_ids)} entries, expected {n}")
        self.provenance: Optional[dict[str, Any]] = provenance
        self.__derived: Optional[DerivedQuantities] = None

    @staticmethod
    def __as_array(values: Numbers, size: int, name: str) -> FloatArray:
        array = np.array(values, dtype=np.float64)
        if array.ndim == 0:
            array = np.full(size, float(array))
        if array.shape != (size,):
            raise ValueError(f"{name} has shape {array.shape}, expected ({size},)")
        array.setflags(write=False)
        return array

    @property
    def n(self) -> int:
        return self.graph.node_count

    def transfer(self, src: int, dst: int) -> float:
        """q_hat for the edge (src, dst), 0.0 when there is no such edge."""
        if not self.graph.has_edge(src, dst):
            return 0.0
        return float(self.transfer_success[self.graph.edge_position(src, dst)])

    def derived(self) -> DerivedQuantities:
        if self.__derived is None:
            self.__derived = derived(self)
        return self.__derived

    def validate(self) -> ValidationReport:
        return validate(self)

    def is_transfer_vulnerable(self) -> bool:
        return is_transfer_vulnerable(self)

    def __repr__(self) -> str:
        return f"DefenseGame(n={self.n}, edges={self.graph.edge_count})"


def build_game(
    node_count: int,
    transfers: Mapping[tuple[int, int], float],
    *,
    invest_cost: Numbers,
    loss: Numbers,
    direct_success: Numbers,
    attack_cost: Numbers,
    unblocked_transfer: Numbers = 1.0,
    node_ids: Optional[Sequence[str]] = None,
) -> DefenseGame:
    """Build a game from a {(src, dst): q_hat} mapping.

    Args:
        node_count (int): number of defenders.
        transfers (Mapping[tuple[int, int], float]): transfer probability per directed edge.
        invest_cost, loss, direct_success, attack_cost, unblocked_transfer: scalars or per-node sequences.
        node_ids (Sequence[str], optional): display identifiers.

    Returns:
        DefenseGame: the game, edges in sorted order.
    """
    graph = DirectedGraph(node_count, transfers.keys())
    q_hat = [transfers[edge] for edge in graph.edges]
    return DefenseGame(
        graph,
        invest_cost=invest_cost,
        loss=loss,
        direct_success=direct_success,
        attack_cost=attack_cost,
        transfer_success=q_hat,
        unblocked_transfer=unblocked_transfer,
        node_ids=node_ids,
    )


def outgoing_risk(game: DefenseGame) -> FloatArray:
    """sum over children j of q_hat_ij, per source node i."""
    total: FloatArray = np.bincount(game.graph.src, weights=game.transfer_success, minlength=game.n).astype(
        np.float64
    )
    return total


def __range_violations(game: DefenseGame) -> list[Violation]:
    checks = (
        ("invest_cost", game.invest_cost, lambda v: v > 0, 0.0),
        ("loss", game.loss, lambda v: v > 0, 0.0),
        ("attack_cost", game.attack_cost, lambda v: v > 0, 0.0),
        ("direct_success", game.direct_success, lambda v: (v > 0) & (v <= 1), 1.0),
        ("unblocked_transfer", game.unblocked_transfer, lambda v: (v >= 0) & (v <= 1), 1.0),
    )
    violations: list[Violation] = []
    for name, values, accept, bound in checks:
        for i in np.flatnonzero(~accept(values)):
            violations.append(Violation(Rule.RANGE, float(values[i]), bound, node=int(i), parameter=name))
    q_hat = game.transfer_success
    for pos in np.flatnonzero(~((q_hat > 0) & (q_hat <= 1))):
        edge = game.graph.edges[pos]
        violations.append(Violation(Rule.RANGE, float(q_hat[pos]), 1.0, edge=edge, parameter="transfer_success"))
    return violations


def validate(game: DefenseGame) -> ValidationReport:
    """Check a game against the model's assumptions without raising.

    Reports every out-of-range parameter, every node with C_i >= p_hat_i L_i (rule "A2"), every node
    with C0_i >= p_hat_i L_i + sum_j q_hat_ij alpha_j L_j (rule "A3") and every node whose risk budget
    p_hat_i + sum_j q_hat_ij exceeds 1 by more than RISK_BUDGET_TOLERANCE.

    Args:
        game (DefenseGame): game to check; not modified.

    Returns:
        ValidationReport: empty violation list iff the game is valid.
    """
    report = ValidationReport(violations=__range_violations(game))
    src, dst = game.graph.src, game.graph.dst
    direct_loss = game.direct_success * game.loss

    for i in np.flatnonzero(~(game.invest_cost < direct_loss)):
        violation = Violation(Rule.INVEST_COST, float(game.invest_cost[i]), float(direct_loss[i]), node=int(i))
        report.violations.append(violation)

    weighted = game.transfer_success * game.unblocked_transfer[dst] * game.loss[dst]
    attack_bound = direct_loss + np.bincount(src, weights=weighted, minlength=game.n)
    for i in np.flatnonzero(~(game.attack_cost < attack_bound)):
        violation = Violation(Rule.ATTACK_COST, float(game.attack_cost[i]), float(attack_bound[i]), node=int(i))
        report.violations.append(violation)

    budget = game.direct_success + outgoing_risk(game)
    for i in np.flatnonzero(~(budget <= 1.0 + RISK_BUDGET_TOLERANCE)):
        report.violations.append(Violation(Rule.RISK_BUDGET, float(budget[i]), 1.0, node=int(i)))
    absorbed = np.flatnonzero((budget > 1.0) & (budget <= 1.0 + RISK_BUDGET_TOLERANCE))
    if absorbed.size:
        report.tolerance_absorbed = [int(i) for i in absorbed]
        warnings.warn(
            f"Risk budget above 1 by round-off only on {absorbed.size} node(s); accepted", stacklevel=2
        )
    return report


def derived(game: DefenseGame) -> DerivedQuantities:
    """Compute rho, delta_hat, loss_bar, margin_bar, eta and sum_delta for every node.

    Args:
        game (DefenseGame): a game whose parameters pass the range checks.

    Returns:
        DerivedQuantities: read-only per-node arrays.
    """
    dst = game.graph.dst
    rho = game.invest_cost / game.loss
    delta_hat = game.invest_cost / (game.loss * game.direct_success)
    child_loss = np.bincount(game.graph.src, weights=game.transfer_success * game.loss[dst], minlength=game.n)
    loss_bar = game.direct_success * game.loss + child_loss
    margin_bar = loss_bar - game.attack_cost
    eta = game.attack_cost / loss_bar
    for array in (rho, delta_hat, loss_bar, margin_bar, eta):
        array.setflags(write=False)
    return DerivedQuantities(
        rho=rho,
        delta_hat=delta_hat,
        loss_bar=loss_bar,
        margin_bar=margin_bar,
        eta=eta,
        sum_delta=float(np.sum(delta_hat)),
    )


def is_transfer_vulnerable(game: DefenseGame) -> bool:
    """True iff alpha_i == 1 for every node (vacuously true for an empty game)."""
    return bool(np.all(game.unblocked_transfer == 1.0))
