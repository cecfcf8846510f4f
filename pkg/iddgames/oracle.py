"""Brute-force ground truth for small games.

Everything here is computed from the pure-strategy cost function by explicit
enumeration over attack targets and investment outcomes, never from the closed
forms in ``payoff``, so the two can be checked against each other.
"""

import itertools
import logging
from typing import Optional

import numpy as np

from .data.classes import FloatArray, MsneViolation, PureProfile, Target, VerificationReport
from .exceptions.custom_exceptions import SizeCapExceededError
from .model import DefenseGame
from .payoff import NO_ATTACK, check_strategies, pure_attacker_utility, pure_cost
from .utils import make_rng, no_attack_mass

logger = logging.getLogger(__name__)

MAX_ENUMERATED_PARENTS = 20
MAX_PSNE_PLAYERS = 20
MAX_UTILITY_PLAYERS = 16
DEFAULT_VERIFY_TOLERANCE = 1e-9
# Positive probabilities below this are treated as zero when reading supports.
SUPPORT_THRESHOLD = 1e-12


def __check_parent_cap(game: DefenseGame, i: int) -> tuple[int, ...]:
    parents = game.graph.parents(i)
    if len(parents) > MAX_ENUMERATED_PARENTS:
        raise SizeCapExceededError(
            f"Node {i} has {len(parents)} parents, enumeration is capped at {MAX_ENUMERATED_PARENTS}"
        )
    return parents


def __expected_cost_given_target(game: DefenseGame, x: FloatArray, target: Target, i: int) -> float:
    """E[M_i | target] over independent investments of i and its parents."""
    family = (i, *__check_parent_cap(game, i))
    a = [0] * game.n
    expected = 0.0
    for outcome in itertools.product((0, 1), repeat=len(family)):
        weight = 1.0
        for node, bit in zip(family, outcome):
            a[node] = bit
            weight *= float(x[node]) if bit else 1.0 - float(x[node])
        if weight == 0.0:
            continue
        expected += weight * pure_cost(game, a, target, i)
    return expected


def __attack_events(y: FloatArray) -> list[tuple[Target, float]]:
    events: list[tuple[Target, float]] = [(NO_ATTACK, no_attack_mass(y))]
    events.extend((int(j), float(y[j])) for j in range(len(y)))
    return [(target, p) for target, p in events if p > 0.0]


def expected_cost_enum(game: DefenseGame, x: FloatArray, y: FloatArray, i: int) -> float:
    """Expected cost of defender i by enumeration over attack events and family investments.

    Args:
        game (DefenseGame): the game.
        x (FloatArray): investment probabilities.
        y (FloatArray): attack probabilities (no attack implicit).
        i (int): defender.

    Raises:
        SizeCapExceededError: if i has more than MAX_ENUMERATED_PARENTS parents.

    Returns:
        float: the exact expectation of pure_cost.
    """
    game.graph.check_node(i)
    return sum(p * __expected_cost_given_target(game, x, target, i) for target, p in __attack_events(y))


def attack_gain_enum(game: DefenseGame, x: FloatArray, i: int) -> float:
    """E[U | target i] - E[U | no attack], enumerating only the nodes the attack can reach."""
    game.graph.check_node(i)
    gain = -float(game.attack_cost[i])
    for j in (i, *game.graph.children(i)):
        gain += __expected_cost_given_target(game, x, i, j) - __expected_cost_given_target(game, x, NO_ATTACK, j)
    return gain


def expected_utility_enum(game: DefenseGame, x: FloatArray, y: FloatArray) -> float:
    """Attacker's expected utility sum_i [M_i - x_i C_i - y_i C0_i] by full enumeration.

    Raises:
        SizeCapExceededError: above MAX_UTILITY_PLAYERS defenders.
    """
    if game.n > MAX_UTILITY_PLAYERS:
        raise SizeCapExceededError(f"Utility enumeration is capped at {MAX_UTILITY_PLAYERS} defenders")
    total = 0.0
    for target, p in __attack_events(y):
        for i in range(game.n):
            total += p * __expected_cost_given_target(game, x, target, i)
    return total - float(np.dot(x, game.invest_cost)) - float(np.dot(y, game.attack_cost))


def __attacker_can_improve(game: DefenseGame, a: tuple[int, ...], target: Target, tol: float) -> bool:
    current = pure_attacker_utility(game, a, target)
    alternatives: list[Target] = [NO_ATTACK, *range(game.n)]
    return any(pure_attacker_utility(game, a, other) > current + tol for other in alternatives if other != target)


def __defender_can_improve(game: DefenseGame, a: tuple[int, ...], target: Target, tol: float) -> bool:
    flipped = list(a)
    for i in range(game.n):
        flipped[i] = 1 - a[i]
        better = pure_cost(game, flipped, target, i) < pure_cost(game, a, target, i) - tol
        flipped[i] = a[i]
        if better:
            return True
    return False


def psne_search(game: DefenseGame, tol: float = 1e-12) -> Optional[PureProfile]:
    """Exhaustive search for a pure-strategy Nash equilibrium.

    For every investment profile a, only the attacker's pure best responses are
    considered, then defenders are checked for a strictly profitable flip.

    Args:
        game (DefenseGame): game with at most MAX_PSNE_PLAYERS defenders.
        tol (float, optional): relative slack before a gain counts as strict.

    Raises:
        SizeCapExceededError: above MAX_PSNE_PLAYERS defenders.

    Returns:
        PureProfile | None: the first equilibrium found, in lexicographic order of a.
    """
    if game.n > MAX_PSNE_PLAYERS:
        raise SizeCapExceededError(f"PSNE search is capped at {MAX_PSNE_PLAYERS} defenders, got {game.n}")
    scale = tol * max(1.0, float(np.max(game.loss, initial=0.0)) * max(1, game.n))
    targets: list[Target] = [NO_ATTACK, *range(game.n)]
    for a in itertools.product((0, 1), repeat=game.n):
        utilities = [pure_attacker_utility(game, a, target) for target in targets]
        best = max(utilities)
        for target, utility in zip(targets, utilities):
            if utility < best - scale:
                continue
            if not __defender_can_improve(game, a, target, scale):
                logger.info("Pure equilibrium found: a=%s, target=%s", a, target)
                return PureProfile(a=tuple(a), target=target)
    return None


def is_pure_equilibrium(game: DefenseGame, profile: PureProfile, tol: float = 1e-12) -> bool:
    """Whether no player strictly gains by deviating from a pure profile."""
    scale = tol * max(1.0, float(np.max(game.loss, initial=0.0)) * max(1, game.n))
    return not (
        __attacker_can_improve(game, profile.a, profile.target, scale)
        or __defender_can_improve(game, profile.a, profile.target, scale)
    )


def __defender_violations(game: DefenseGame, x: FloatArray, y: FloatArray, tol: float) -> list[MsneViolation]:
    violations: list[MsneViolation] = []
    x_invest, x_abstain = x.copy(), x.copy()
    for i in range(game.n):
        x_invest[i], x_abstain[i] = 1.0, 0.0
        cost_invest = expected_cost_enum(game, x_invest, y, i)
        cost_abstain = expected_cost_enum(game, x_abstain, y, i)
        x_invest[i] = x_abstain[i] = x[i]
        # s_hat_i - delta_hat_i, recovered from the two pure-action costs
        gap = (cost_abstain - cost_invest) / float(game.direct_success[i] * game.loss[i])
        if x[i] == 1.0 and gap < -tol:
            violations.append(MsneViolation(i, "invests but s_hat < delta_hat", gap, -tol))
        elif x[i] == 0.0 and gap > tol:
            violations.append(MsneViolation(i, "abstains but s_hat > delta_hat", gap, tol))
        elif 0.0 < x[i] < 1.0 and abs(gap) > tol:
            violations.append(MsneViolation(i, "mixes but is not indifferent", gap, tol))
    return violations


def __attacker_violations(game: DefenseGame, x: FloatArray, y: FloatArray, tol: float) -> list[MsneViolation]:
    violations: list[MsneViolation] = []
    if game.n == 0:
        return violations
    gains = np.array([attack_gain_enum(game, x, i) for i in range(game.n)])
    g_star = max(0.0, float(gains.max()))
    slack = tol * float(np.max(game.derived().loss_bar))
    for i in np.flatnonzero(y > SUPPORT_THRESHOLD):
        if gains[i] < g_star - slack:
            condition = f"attacks node {int(i)} below the best gain"
            violations.append(MsneViolation(None, condition, float(gains[i]), g_star))
    if no_attack_mass(y) > SUPPORT_THRESHOLD and g_star > slack:
        violations.append(MsneViolation(None, "withholds attack with a positive gain available", g_star, slack))
    return violations


def verify_msne(
    game: DefenseGame, x: FloatArray, y: FloatArray, tol: float = DEFAULT_VERIFY_TOLERANCE
) -> VerificationReport:
    """Check every best-response condition of a mixed profile from first principles.

    Defenders: interior x_i must be indifferent (|s_hat_i - delta_hat_i| <= tol), x_i = 1 needs
    s_hat_i >= delta_hat_i - tol and x_i = 0 needs s_hat_i <= delta_hat_i + tol. Attacker: each
    target with y_i > 0 must reach the best gain within tol * max_i loss_bar_i, and y_0 > 0
    requires that gain to be non-positive within the same slack.

    Args:
        game (DefenseGame): the game.
        x (FloatArray): investment probabilities.
        y (FloatArray): attack probabilities.
        tol (float, optional): normalized tolerance. Defaults to 1e-9.

    Returns:
        VerificationReport: ok and the list of violated conditions.
    """
    check_strategies(game, x, y)
    violations = __defender_violations(game, x, y, tol) + __attacker_violations(game, x, y, tol)
    return VerificationReport(ok=not violations, violations=violations)


def simulate_pure_cost(
    game: DefenseGame, a: tuple[int, ...], target: Target, i: int, samples: int = 100_000, seed: int = 0
) -> tuple[float, float]:
    """Monte Carlo estimate of pure_cost by simulating the attack event process.

    An attack on an unprotected target t succeeds there with probability p_hat_t, or is
    transferred to exactly one child j with probability q_hat_tj; a transfer into an
    investing child goes through with probability alpha_j.

    Returns:
        tuple[float, float]: sample mean and its standard error.
    """
    game.graph.check_node(i)
    base = float(game.invest_cost[i]) if a[i] else 0.0
    losses = np.zeros(samples)
    if target is not None and not a[target]:
        rng = make_rng(seed)
        children = game.graph.children(target)
        outcomes = [float(game.direct_success[target])] + [game.transfer(target, j) for j in children]
        probabilities = np.array([*outcomes, 1.0 - sum(outcomes)])
        events = rng.choice(len(probabilities), size=samples, p=probabilities / probabilities.sum())
        if i == target:
            losses[events == 0] = float(game.loss[i])
        elif i in children:
            hit = events == 1 + children.index(i)
            if a[i]:
                hit &= rng.random(samples) < float(game.unblocked_transfer[i])
            losses[hit] = float(game.loss[i])
    return base + float(losses.mean()), float(losses.std(ddof=1) / np.sqrt(samples)) if samples > 1 else 0.0
