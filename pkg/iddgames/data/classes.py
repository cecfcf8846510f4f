from collections.abc import Sequence
from dataclasses import dataclass, field
from enum import Enum, IntEnum
from typing import Optional, Union

import numpy as np
import numpy.typing as npt

from iddgames.exceptions.custom_exceptions import InvalidConfigError

FloatArray = npt.NDArray[np.float64]
IntArray = npt.NDArray[np.int64]

# Single-attack encoding of a pure attack vector b: the index of the one
# targeted node, or None for the no-attack vector.
Target = Optional[int]


@dataclass(frozen=True)
class IngestionReport:
    """Counters collected while reading an edge list.

    Attributes:
        lines (int): number of non-blank, non-comment lines read.
        duplicate_edges (int): repeated (src, dst) pairs that were collapsed.
        self_loops (int): lines with src == dst that were dropped.
    """

    lines: int = 0
    duplicate_edges: int = 0
    self_loops: int = 0


@dataclass(frozen=True)
class Neighborhoods:
    """Neighborhood of one node.

    Attributes:
        parents (frozenset[int]): Pa(i), the in-neighbors (sources of transfer risk).
        children (frozenset[int]): Ch(i), the out-neighbors.
        parent_family (frozenset[int]): PF(i) = Pa(i) plus i.
        child_family (frozenset[int]): CF(i) = Ch(i) plus i.
        k (int): size of the parent family.
    """

    parents: frozenset[int]
    children: frozenset[int]
    parent_family: frozenset[int]
    child_family: frozenset[int]
    k: int


@dataclass(frozen=True)
class GraphStats:
    nodes: int
    edges: int
    isolated_nodes: int
    density: Optional[float]
    diameter: Optional[int]
    avg_total_degree: Optional[float]
    frac_zero_indegree: Optional[float]
    frac_zero_outdegree: Optional[float]
    max_in_degree: int = 0
    max_out_degree: int = 0


class Rule(str, Enum):
    INVEST_COST = "A2"
    ATTACK_COST = "A3"
    RISK_BUDGET = "risk-budget"
    RANGE = "range"


@dataclass(frozen=True)
class Violation:
    """One broken parameter constraint.

    Attributes:
        rule (Rule): which constraint failed.
        observed (float): the offending value (a sum for the risk budget).
        bound (float): the bound it had to respect.
        node (int, Optional): node the violation belongs to.
        edge (tuple[int, int], Optional): edge the violation belongs to.
        parameter (str): parameter name for range violations.
    """

    rule: Rule
    observed: float
    bound: float
    node: Optional[int] = None
    edge: Optional[tuple[int, int]] = None
    parameter: str = ""


@dataclass
class ValidationReport:
    violations: list[Violation] = field(default_factory=list)
    # nodes whose risk budget exceeded 1 by no more than the round-off tolerance
    tolerance_absorbed: list[int] = field(default_factory=list)

    @property
    def is_valid(self) -> bool:
        return not self.violations

    def __len__(self) -> int:
        return len(self.violations)


@dataclass(frozen=True)
class DerivedQuantities:
    """Per-node quantities the equilibrium analysis is phrased in.

    Attributes:
        rho (FloatArray): cost-to-loss ratio C_i / L_i.
        delta_hat (FloatArray): investment threshold C_i / (L_i p_hat_i).
        loss_bar (FloatArray): attacker's gross gain from an unprotected target,
            p_hat_i L_i + sum over children of q_hat_ij L_j.
        margin_bar (FloatArray): loss_bar minus the attack cost.
        eta (FloatArray): attack cost over loss_bar.
        sum_delta (float): sum of delta_hat over all nodes.
    """

    rho: FloatArray
    delta_hat: FloatArray
    loss_bar: FloatArray
    margin_bar: FloatArray
    eta: FloatArray
    sum_delta: float


class DefenderResponse(IntEnum):
    ABSTAIN = 0
    INVEST = 1
    INDIFFERENT = 2


class RegretMode(str, Enum):
    PER_PLAYER_RANGE = "per-player-range"
    ABSOLUTE = "absolute"


@dataclass(frozen=True)
class RegretReport:
    mode: RegretMode
    defender: FloatArray
    attacker: float
    epsilon: float


@dataclass(frozen=True)
class PureProfile:
    a: tuple[int, ...]
    target: Target


class EquilibriumCase(str, Enum):
    BELOW_ONE = "BELOW_ONE"
    EQUAL_ONE = "EQUAL_ONE"
    ABOVE_ONE = "ABOVE_ONE"


@dataclass(frozen=True)
class FamilyRange:
    """Scalar family of equilibria when the thresholds sum to exactly one.

    Every v in [v_min, v_max] yields x_i(v) = 1 - (v + C0_i) / loss_bar_i.
    """

    v_min: float
    v_max: float
    loss_bar: FloatArray
    attack_cost: FloatArray

    def x_at(self, v: float) -> FloatArray:
        x: FloatArray = 1.0 - (v + self.attack_cost) / self.loss_bar
        return x


@dataclass(frozen=True)
class TiedSimplex:
    """Attack mass shared by the tied group J: 0 <= y_i <= upper_i, sum y_i = total."""

    indices: tuple[int, ...]
    upper_bounds: FloatArray
    total: float


@dataclass(frozen=True)
class EquilibriumSet:
    """All MSNE of a single-attack transfer-vulnerable game.

    Attributes:
        case (EquilibriumCase): which side of one the thresholds sum to.
        y0 (float): probability of no attack.
        x (FloatArray): fixed investment probabilities, NaN where they vary with the family parameter.
        y (FloatArray): fixed attack probabilities, NaN on the tied group.
        support (tuple[int, ...]): I, the nodes that may be attacked.
        tied (tuple[int, ...]): J, the tied minimal-margin group inside the support.
        value (float, Optional): common attacker gain over the support, Val(t).
        family (FamilyRange, Optional): parameter range of the EQUAL_ONE case.
        simplex (TiedSimplex, Optional): attack polytope of the ABOVE_ONE case.
        unique (bool): whether the set is a single point.
    """

    case: EquilibriumCase
    y0: float
    x: FloatArray
    y: FloatArray
    support: tuple[int, ...] = ()
    tied: tuple[int, ...] = ()
    value: Optional[float] = None
    family: Optional[FamilyRange] = None
    simplex: Optional[TiedSimplex] = None
    unique: bool = True

    @property
    def n(self) -> int:
        return len(self.x)


@dataclass(frozen=True)
class FamilyValue:
    v: float


@dataclass(frozen=True)
class Centroid:
    pass


@dataclass(frozen=True)
class Vertex:
    priority: tuple[int, ...]


@dataclass(frozen=True)
class Explicit:
    y: tuple[float, ...]


@dataclass(frozen=True)
class RandomPoint:
    seed: int = 0


Selector = Union[FamilyValue, Centroid, Vertex, Explicit, RandomPoint]


@dataclass(frozen=True)
class MsneViolation:
    """A best-response condition that does not hold.

    Attributes:
        player (int, Optional): defender index, or None for the attacker.
        condition (str): short name of the failed condition.
        observed (float): measured quantity.
        bound (float): what it was compared against.
    """

    player: Optional[int]
    condition: str
    observed: float
    bound: float


@dataclass
class VerificationReport:
    ok: bool
    violations: list[MsneViolation] = field(default_factory=list)


class StepSchedule(str, Enum):
    CONSTANT = "constant"
    HARMONIC = "harmonic"
    ADAPTIVE = "adaptive"


@dataclass(frozen=True)
class BrgdConfig:
    """Settings of a best-response-gradient run.

    Attributes:
        epsilon (float): target regret, > 0.
        max_iterations (int): iteration cap. Defaults to 2000.
        step_size (float): eta in (0, 1]. Defaults to 0.1.
        regret_mode (RegretMode): normalization of the convergence test.
        seed (int): seed of the random initial profile.
        snapshot_every (int, Optional): keep (x, y) every that many iterations.
        init (tuple, Optional): supplied initial (x, y); random when None.
        schedule (StepSchedule): step sizes over time. Defaults to "adaptive": eta_t =
            min(step_size, current normalized regret), so steps shrink as the run converges.
    """

    epsilon: float = 0.005
    max_iterations: int = 2000
    step_size: float = 0.1
    regret_mode: RegretMode = RegretMode.PER_PLAYER_RANGE
    seed: int = 0
    snapshot_every: Optional[int] = None
    init: Optional[tuple[Sequence[float], Sequence[float]]] = None
    schedule: StepSchedule = StepSchedule.ADAPTIVE

    def __post_init__(self) -> None:
        if not self.epsilon > 0:
            raise InvalidConfigError("epsilon must be positive")
        if not 0 < self.step_size <= 1:
            raise InvalidConfigError("step_size must lie in (0, 1]")
        if self.max_iterations < 0:
            raise InvalidConfigError("max_iterations must be non-negative")
        if self.snapshot_every is not None and self.snapshot_every < 1:
            raise InvalidConfigError("snapshot_every must be at least 1")
        object.__setattr__(self, "regret_mode", RegretMode(self.regret_mode))
        object.__setattr__(self, "schedule", StepSchedule(self.schedule))


@dataclass(frozen=True)
class TracePoint:
    iteration: int
    epsilon: float


@dataclass(frozen=True)
class Snapshot:
    iteration: int
    x: FloatArray
    y: FloatArray


@dataclass
class BrgdResult:
    config: BrgdConfig
    converged: bool
    iterations: int
    x: FloatArray
    y: FloatArray
    report: RegretReport
    trace: list[TracePoint] = field(default_factory=list)
    snapshots: list[Snapshot] = field(default_factory=list)


class GeneratorMode(str, Enum):
    FIXED = "fixed"
    RANDOM = "random"


@dataclass(frozen=True)
class InternetConstants:
    """Constants of the Internet-game parameterization.

    With a draw U in [0, 1]: alpha = U / alpha_divisor, L = loss_base + loss_span * U,
    C = cost_base + cost_span * U, z = z_base + U / z_divisor,
    p_tilde = p_tilde_base + U / p_tilde_divisor. The risk of every node is rescaled so
    that p_hat + sum of q_hat equals risk_total.
    """

    alpha_divisor: float = 20.0
    loss_base: float = 1e8
    loss_span: float = 1e9
    cost_base: float = 1e5
    cost_span: float = 1e6
    z_base: float = 0.2
    z_divisor: float = 5.0
    p_tilde_base: float = 0.8
    p_tilde_divisor: float = 10.0
    attack_cost: float = 1e6
    risk_total: float = 0.9
    fixed_draw: float = 0.5


@dataclass(frozen=True)
class HomogeneousParams:
    invest_cost: float
    loss: float
    direct_success: float
    attack_cost: float
    transfer: float
    unblocked_transfer: float = 1.0


@dataclass(frozen=True)
class GeneratorSpec:
    mode: GeneratorMode = GeneratorMode.FIXED
    seed: int = 0
    constants: InternetConstants = field(default_factory=InternetConstants)
    homogeneous: Optional[HomogeneousParams] = None

    def __post_init__(self) -> None:
        object.__setattr__(self, "mode", GeneratorMode(self.mode))


class GraphKind(str, Enum):
    ERDOS_RENYI_DIRECTED = "erdos_renyi_directed"
    PREFERENTIAL_ATTACHMENT = "preferential_attachment"


@dataclass(frozen=True)
class PowerLawFit:
    coef: float
    exponent: float
    r_squared: float


@dataclass(frozen=True)
class SweepRow:
    epsilon: float
    seed: int
    converged: bool
    iterations: int
    wall_ms: float


@dataclass
class SweepResult:
    rows: list[SweepRow] = field(default_factory=list)
    fit: Optional[PowerLawFit] = None


@dataclass(frozen=True)
class AttackEntry:
    rank: int
    node_id: str
    y: float


@dataclass(frozen=True)
class HistogramBin:
    low: float
    high: float
    count: int


@dataclass(frozen=True)
class DegreeStats:
    threshold: float
    n_attacked: int
    avg_indeg: Optional[float]
    avg_outdeg: Optional[float]


@dataclass
class EquilibriumReport:
    """Summary of an equilibrium for plotting.

    Attributes:
        attack_profile (list[AttackEntry]): nodes with y_i > 0, by decreasing y_i.
        histogram (list[HistogramBin]): investment counts over [0, 0.1], (0.1, 0.2], ..., (0.9, 1].
        degree_stats (DegreeStats): mean degrees of the nodes attacked above the threshold.
        support_size (int): number of nodes with y_i > 0.
        y0 (float): probability of no attack.
    """

    attack_profile: list[AttackEntry]
    histogram: list[HistogramBin]
    degree_stats: DegreeStats
    support_size: int
    y0: float
