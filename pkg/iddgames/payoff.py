"""Cost, utility, best-response and regret evaluation under the single-attack assumption.

A defender profile is an array x with x_i the probability node i invests. An attacker
strategy is an array y with y_i the probability node i is the (only) target; the
no-attack probability y_0 = 1 - sum(y) is implicit. Pure attack vectors are encoded
by their target index, or None for no attack.
"""

import logging
from collections.abc import Sequence
from typing import Union

import numpy as np

from .data.classes import DefenderResponse, FloatArray, IntArray, RegretMode, RegretReport, Target
from .exceptions.custom_exceptions import InvalidStrategyError, UnknownRegretModeError
from .model import DefenseGame
from .utils import no_attack_mass

logger = logging.getLogger(__name__)

SIMPLEX_TOLERANCE = 1e-12
# Relative width of the indifference band of both best-response correspondences.
INDIFFERENCE_TOLERANCE = 1e-9

NO_ATTACK: Target = None


def as_profile(values: Union[Sequence[float], FloatArray]) -> FloatArray:
    return np.asarray(values, dtype=np.float64)


def check_strategies(game: DefenseGame, x: FloatArray, y: FloatArray) -> None:
    """Check shapes, the unit box for x and the simplex for (y_0, y).

    Raises:
        InvalidStrategyError: if either strategy is malformed.
    """
    if x.shape != (game.n,) or y.shape != (game.n,):
        raise InvalidStrategyError(f"Strategies must have shape ({game.n},), got {x.shape} and {y.shape}")
    if game.n == 0:
        return
    if not (np.all(x >= 0.0) and np.all(x <= 1.0)):
        raise InvalidStrategyError("Investment probabilities must lie in [0, 1]")
    if np.any(y < 0.0) or not np.all(np.isfinite(y)):
        raise InvalidStrategyError("Attack probabilities must be non-negative")
    if float(np.sum(y)) > 1.0 + SIMPLEX_TOLERANCE:
        raise InvalidStrategyError(f"Attack probabilities sum to {float(np.sum(y))!r} > 1")


def attack_vector_from_bits(bits: Sequence[int]) -> Target:
    """Convert an explicit attack vector b in {0, 1}^n to its target encoding.

    Raises:
        InvalidStrategyError: if more than one node is targeted.
    """
    targets = [i for i, bit in enumerate(bits) if bit]
    if len(targets) > 1:
        raise InvalidStrategyError(f"At most one simultaneous attack is allowed, got targets {targets}")
    return targets[0] if targets else NO_ATTACK


def __transfer_risk_pure(game: DefenseGame, a: Sequence[int], target: Target, i: int) -> float:
    safety = 1.0
    for j in game.graph.parents(i):
        b_j = 1 if target == j else 0
        safety *= (1.0 - game.transfer(j, i)) ** (b_j * (1 - a[j]))
    return 1.0 - safety


def pure_cost(game: DefenseGame, a: Sequence[int], target: Target, i: int) -> float:
    """Cost M_i of defender i at a pure profile.

    M_i = a_i [C_i + alpha_i r_i L_i] + (1 - a_i) [b_i p_hat_i + (1 - b_i p_hat_i) r_i] L_i,
    with r_i = 1 - prod over parents j of (1 - q_hat_ji)^(b_j (1 - a_j)).

    Args:
        game (DefenseGame): the game.
        a (Sequence[int]): investment bits of every defender.
        target (int | None): attacked node, or None.
        i (int): defender whose cost is returned.

    Returns:
        float: the cost.
    """
    if len(a) != game.n:
        raise InvalidStrategyError(f"Pure profile has length {len(a)}, expected {game.n}")
    game.graph.check_node(i)
    r = __transfer_risk_pure(game, a, target, i)
    b_i = 1 if target == i else 0
    p_hat, loss = float(game.direct_success[i]), float(game.loss[i])
    if a[i]:
        return float(game.invest_cost[i]) + float(game.unblocked_transfer[i]) * r * loss
    return (b_i * p_hat + (1.0 - b_i * p_hat) * r) * loss


def pure_attacker_utility(game: DefenseGame, a: Sequence[int], target: Target) -> float:
    """U(a, b) = sum_i [M_i - a_i C_i - b_i C0_i]."""
    total = 0.0
    for i in range(game.n):
        total += pure_cost(game, a, target, i) - a[i] * float(game.invest_cost[i])
    if target is not None:
        total -= float(game.attack_cost[target])
    return total


def ids_cost(game: DefenseGame, a: Sequence[int], i: int) -> float:
    """Cost of defender i in the classic interdependent-security game on the same parameters.

    Every node carries its direct risk p_hat_i and transfers with q_hat_ij; with alpha_i = 1
    this is the cost the attack model reduces to when the attack is always present.
    """
    safety = 1.0
    for j in game.graph.parents(i):
        safety *= (1.0 - game.transfer(j, i)) ** (1 - a[j])
    r = 1.0 - safety
    p, loss = float(game.direct_success[i]), float(game.loss[i])
    if a[i]:
        return float(game.invest_cost[i]) + r * loss
    return (p + (1.0 - p) * r) * loss


def transfer_risk(game: DefenseGame, x: FloatArray, y: FloatArray) -> FloatArray:
    """r_bar_i = sum over parents j of y_j (1 - x_j) q_hat_ji, for every node."""
    src, dst = game.graph.src, game.graph.dst
    weights = y[src] * (1.0 - x[src]) * game.transfer_success
    risk: FloatArray = np.bincount(dst, weights=weights, minlength=game.n).astype(np.float64)
    return risk


def __cost_by_action(game: DefenseGame, y: FloatArray, risk: FloatArray) -> tuple[FloatArray, FloatArray]:
    invest = game.invest_cost + game.unblocked_transfer * risk * game.loss
    abstain = (game.direct_success * y + risk) * game.loss
    return invest, abstain


def mixed_costs(game: DefenseGame, x: FloatArray, y: FloatArray) -> FloatArray:
    """Expected cost of every defender under (x, y).

    M_i = x_i [C_i + alpha_i r_bar_i L_i] + (1 - x_i) [p_hat_i y_i + r_bar_i] L_i.
    """
    invest, abstain = __cost_by_action(game, y, transfer_risk(game, x, y))
    costs: FloatArray = x * invest + (1.0 - x) * abstain
    return costs


def mixed_cost(game: DefenseGame, x: FloatArray, y: FloatArray, i: int) -> float:
    game.graph.check_node(i)
    return float(mixed_costs(game, x, y)[i])


def attack_gains(game: DefenseGame, x: FloatArray) -> FloatArray:
    """Attacker's gain from targeting each node instead of not attacking.

    gain_i = (1 - x_i) [p_hat_i L_i + sum_j q_hat_ij (alpha_j x_j + 1 - x_j) L_j] - C0_i.
    """
    src, dst = game.graph.src, game.graph.dst
    unblocked = game.unblocked_transfer[dst] * x[dst] + 1.0 - x[dst]
    child_loss = np.bincount(src, weights=game.transfer_success * unblocked * game.loss[dst], minlength=game.n)
    gains: FloatArray = (1.0 - x) * (game.direct_success * game.loss + child_loss) - game.attack_cost
    return gains


def attack_gain(game: DefenseGame, x: FloatArray, i: int) -> float:
    game.graph.check_node(i)
    return float(attack_gains(game, x)[i])


def mixed_attacker_utility(game: DefenseGame, x: FloatArray, y: FloatArray) -> float:
    """U(x, y) = sum_i y_i gain_i(x); linear in y."""
    return float(np.dot(y, attack_gains(game, x)))


def s_hats(game: DefenseGame, x: FloatArray, y: FloatArray) -> FloatArray:
    """Effective attack exposure s_hat_i = y_i + ((1 - alpha_i) / p_hat_i) r_bar_i."""
    exposure: FloatArray = y + (1.0 - game.unblocked_transfer) / game.direct_success * transfer_risk(game, x, y)
    return exposure


def s_hat(game: DefenseGame, x: FloatArray, y: FloatArray, i: int) -> float:
    game.graph.check_node(i)
    return float(s_hats(game, x, y)[i])


def defender_best_responses(game: DefenseGame, x: FloatArray, y: FloatArray) -> IntArray:
    """Best-response codes (DefenderResponse values) of every defender.

    INVEST when s_hat_i > delta_hat_i, ABSTAIN when below, INDIFFERENT within
    INDIFFERENCE_TOLERANCE * delta_hat_i.
    """
    delta_hat = game.derived().delta_hat
    gap = s_hats(game, x, y) - delta_hat
    band = INDIFFERENCE_TOLERANCE * delta_hat
    codes = np.where(gap > band, DefenderResponse.INVEST, DefenderResponse.ABSTAIN).astype(np.int64)
    codes[np.abs(gap) <= band] = DefenderResponse.INDIFFERENT
    return codes


def defender_best_response(game: DefenseGame, x: FloatArray, y: FloatArray, i: int) -> DefenderResponse:
    game.graph.check_node(i)
    return DefenderResponse(int(defender_best_responses(game, x, y)[i]))


def best_attack_gain(gains: FloatArray) -> float:
    """g* = max(0, max_i gain_i); 0 for a game without nodes."""
    return max(0.0, float(gains.max())) if gains.size else 0.0


def attacker_best_response(game: DefenseGame, x: FloatArray) -> frozenset[Target]:
    """Pure attacker best responses: targets with maximal gain, None for no attack.

    Target i belongs to the set when gain_i is within INDIFFERENCE_TOLERANCE * (|g*| + C0_i)
    of g*; no attack belongs to it when g* is that close to 0. Any mixture over the
    returned set is a best response.
    """
    gains = attack_gains(game, x)
    return best_response_targets(game, gains)


def best_response_targets(game: DefenseGame, gains: FloatArray, slack: float = 0.0) -> frozenset[Target]:
    """Best-response set for precomputed gains (see attacker_best_response).

    A positive slack (in gain units) widens the set to every target within slack of g*,
    which makes it the set of slack-best responses.
    """
    if gains.size == 0:
        return frozenset({NO_ATTACK})
    g_star = best_attack_gain(gains)
    band = INDIFFERENCE_TOLERANCE * (abs(g_star) + game.attack_cost) + slack
    responses: set[Target] = {int(i) for i in np.flatnonzero(gains >= g_star - band)}
    top = int(np.argmax(gains))
    if gains[top] <= INDIFFERENCE_TOLERANCE * (abs(g_star) + float(game.attack_cost[top])) + slack:
        responses.add(NO_ATTACK)
    return frozenset(responses)


def __normalizers(game: DefenseGame, mode: RegretMode) -> tuple[FloatArray, float]:
    if mode is RegretMode.ABSOLUTE or game.n == 0:
        return np.ones(game.n), 1.0
    return np.asarray(game.loss, dtype=np.float64), float(game.derived().loss_bar.max())


def regret(
    game: DefenseGame,
    x: FloatArray,
    y: FloatArray,
    mode: Union[RegretMode, str] = RegretMode.PER_PLAYER_RANGE,
) -> RegretReport:
    """Normalized gains from unilateral deviation.

    Defender i: (M_i(x) - min over x_i' in {0, 1} of M_i) / N_i. Attacker:
    (max(0, max_i gain_i) - sum_i y_i gain_i) / N_0. In "per-player-range" mode N_i = L_i and
    N_0 = max_i loss_bar_i; in "absolute" mode both are 1.

    Args:
        game (DefenseGame): the game.
        x (FloatArray): investment probabilities.
        y (FloatArray): attack probabilities.
        mode (RegretMode | str, optional): normalization. Defaults to "per-player-range".

    Raises:
        UnknownRegretModeError: if mode is not a known normalization.

    Returns:
        RegretReport: per-player regrets and their maximum epsilon.
    """
    try:
        mode = RegretMode(mode)
    except ValueError as e:
        raise UnknownRegretModeError(f"Unknown regret mode {mode!r}") from e
    defender_scale, attacker_scale = __normalizers(game, mode)

    invest, abstain = __cost_by_action(game, y, transfer_risk(game, x, y))
    current = x * invest + (1.0 - x) * abstain
    defender = np.maximum(current - np.minimum(invest, abstain), 0.0) / defender_scale

    gains = attack_gains(game, x)
    attacker = max(best_attack_gain(gains) - float(np.dot(y, gains)), 0.0) / attacker_scale

    epsilon = max(float(defender.max()) if defender.size else 0.0, attacker)
    return RegretReport(mode=mode, defender=defender, attacker=attacker, epsilon=epsilon)


def current_is_attacker_best_response(y: FloatArray, responses: frozenset[Target]) -> bool:
    """Whether every event with positive mass under (y_0, y) is in the best-response set."""
    if NO_ATTACK not in responses and no_attack_mass(y) > SIMPLEX_TOLERANCE:
        return False
    return all(int(i) in responses for i in np.flatnonzero(y > 0.0))
