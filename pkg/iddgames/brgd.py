import logging

import numpy as np

from .data.classes import (
    BrgdConfig,
    BrgdResult,
    DefenderResponse,
    FloatArray,
    RegretMode,
    Snapshot,
    StepSchedule,
    TracePoint,
)
from .exceptions.custom_exceptions import AssumptionViolatedError
from .model import DefenseGame
from .payoff import (
    SIMPLEX_TOLERANCE,
    as_profile,
    attack_gains,
    best_response_targets,
    check_strategies,
    current_is_attacker_best_response,
    defender_best_responses,
    regret,
)
from .utils import make_rng, no_attack_mass

logger = logging.getLogger(__name__)

PROGRESS_EVERY = 100
# share of the current normalized regret the attacker tolerates when picking best responses
ATTACKER_SLACK = 0.5


def init_random(seed: int, n: int) -> tuple[FloatArray, FloatArray]:
    """Random initial profile: x_i ~ U[0, 1] i.i.d. and (y_0, y) uniform on the (n+1)-simplex.

    Args:
        seed (int): RNG seed.
        n (int): number of defenders, >= 1.

    Raises:
        ValueError: if n < 1.

    Returns:
        tuple[FloatArray, FloatArray]: (x, y), y without the no-attack coordinate.
    """
    if n < 1:
        raise ValueError("init_random needs at least one defender")
    rng = make_rng(seed)
    x = rng.random(n)
    full = rng.dirichlet(np.ones(n + 1))
    return x, full[1:]


def step(
    game: DefenseGame,
    x: FloatArray,
    y: FloatArray,
    eta: float,
    slack: float = 0.0,
) -> tuple[FloatArray, FloatArray]:
    """One synchronous move of every player a fraction eta toward a current best response.

    Defenders move toward 1 or 0, indifferent defenders keep x_i. The attacker's target is
    the best response closest to its current mixture: mass already on a best response stays
    put, and the mass on every other event (no attack included) is spread uniformly over
    the best-response set. With a positive slack every target whose gain is within slack of
    the best counts as a best response.

    Args:
        game (DefenseGame): the game.
        x (FloatArray): investment probabilities.
        y (FloatArray): attack probabilities.
        eta (float): step size in (0, 1].
        slack (float, optional): attacker tolerance in gain units. Defaults to 0.

    Returns:
        tuple[FloatArray, FloatArray]: the next (x, y); both are convex combinations of feasible points.
    """
    responses = defender_best_responses(game, x, y)
    target_x = np.where(responses == DefenderResponse.INVEST, 1.0, 0.0)
    indifferent = responses == DefenderResponse.INDIFFERENT
    target_x[indifferent] = x[indifferent]
    next_x: FloatArray = (1.0 - eta) * x + eta * target_x

    targets = best_response_targets(game, attack_gains(game, x), slack)
    if current_is_attacker_best_response(y, targets):
        return next_x, y.copy()
    y0 = no_attack_mass(y)
    events = np.concatenate(([y0 if y0 > SIMPLEX_TOLERANCE else 0.0], y))
    members = np.zeros(game.n + 1, dtype=bool)
    members[[0 if t is None else t + 1 for t in targets]] = True
    target_y = np.where(members, events, 0.0)
    target_y[members] += events[~members].sum() / len(targets)
    next_y: FloatArray = ((1.0 - eta) * events + eta * target_y)[1:]
    return next_x, next_y


def __step_size(config: BrgdConfig, iteration: int, progress: float) -> float:
    if config.schedule is StepSchedule.HARMONIC:
        return config.step_size / (1.0 + config.step_size * iteration)
    if config.schedule is StepSchedule.ADAPTIVE:
        return min(config.step_size, progress)
    return config.step_size


def __initial_profile(game: DefenseGame, config: BrgdConfig) -> tuple[FloatArray, FloatArray]:
    if config.init is not None:
        x, y = as_profile(config.init[0]), as_profile(config.init[1])
        check_strategies(game, x, y)
        return x.copy(), y.copy()
    if game.n == 0:
        return np.zeros(0), np.zeros(0)
    return init_random(config.seed, game.n)


def run(game: DefenseGame, config: BrgdConfig) -> BrgdResult:
    """Iterate step() until the regret drops to config.epsilon or the iteration cap is reached.

    The regret is evaluated before every step, so a converged result reports the regret
    of the returned profile. Non-convergence is a result state, not an error. The attacker
    treats targets within half the current normalized regret of its best gain as best
    responses, and the default adaptive schedule steps by min(step_size, that regret). Neither
    depends on config.epsilon, so runs that differ only in epsilon follow the same path.

    Args:
        game (DefenseGame): a valid game; any alpha.
        config (BrgdConfig): run settings.

    Raises:
        AssumptionViolatedError: if the game fails validation.

    Returns:
        BrgdResult: final profile, its regret report and the per-iteration trace.
    """
    report = game.validate()
    if not report.is_valid:
        raise AssumptionViolatedError(f"Game fails validation with {len(report)} violation(s)", report=report)

    x, y = __initial_profile(game, config)
    attacker_scale = float(game.derived().loss_bar.max()) if game.n else 1.0
    trace: list[TracePoint] = []
    snapshots: list[Snapshot] = []
    iteration = 0
    while True:
        current = regret(game, x, y, config.regret_mode)
        trace.append(TracePoint(iteration, current.epsilon))
        if config.snapshot_every is not None and iteration % config.snapshot_every == 0:
            snapshots.append(Snapshot(iteration, x.copy(), y.copy()))
        if iteration % PROGRESS_EVERY == 0:
            logger.debug("Iteration %d: epsilon=%.6g", iteration, current.epsilon)
        converged = current.epsilon <= config.epsilon
        if converged or iteration >= config.max_iterations:
            break
        progress = current.epsilon if config.regret_mode is RegretMode.PER_PLAYER_RANGE else regret(game, x, y).epsilon
        slack = ATTACKER_SLACK * progress * attacker_scale
        x, y = step(game, x, y, __step_size(config, iteration, progress), slack)
        iteration += 1

    if converged:
        logger.info("BRGD converged after %d iteration(s), epsilon=%.6g", iteration, current.epsilon)
    else:
        logger.info("BRGD stopped at the %d-iteration cap, epsilon=%.6g", iteration, current.epsilon)
    return BrgdResult(
        config=config,
        converged=converged,
        iterations=iteration,
        x=x,
        y=y,
        report=current,
        trace=trace,
        snapshots=snapshots,
    )
