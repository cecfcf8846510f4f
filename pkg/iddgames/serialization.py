"""JSON forms of games, strategies and every result record.

Node references in game files are by identifier, never by index. Incoming documents are
checked against the pydantic models in iddgames.data.schemas; every ``*_from_dict`` raises
GameFormatError (InvalidConfigError for generator specs) on malformed input.
"""

import json
import logging
import math
from dataclasses import asdict
from pathlib import Path
from typing import Any, Optional, TypeVar, Union

import numpy as np
from pydantic import BaseModel, ValidationError

from .data.classes import (
    BrgdConfig,
    BrgdResult,
    EquilibriumSet,
    FamilyRange,
    FloatArray,
    GeneratorSpec,
    GraphStats,
    HomogeneousParams,
    InternetConstants,
    RegretReport,
    TiedSimplex,
    ValidationReport,
    VerificationReport,
)
from .data.schemas import (
    EdgeDocument,
    EquilibriumSetDocument,
    FamilyDocument,
    FixedEntry,
    GameDocument,
    GeneratorSpecDocument,
    NodeDocument,
    SimplexDocument,
    StrategiesDocument,
)
from .exceptions.custom_exceptions import GameFormatError, InvalidConfigError, InvalidGraphError
from .graph import DirectedGraph
from .model import DefenseGame

logger = logging.getLogger(__name__)

PathLike = Union[str, Path]
DocumentT = TypeVar("DocumentT", bound=BaseModel)


def read_json(path: PathLike) -> Any:
    """Load a JSON document.

    Raises:
        OSError: if the file cannot be read.
        GameFormatError: if the content is not JSON.
    """
    with open(path, encoding="utf-8") as f:
        try:
            return json.load(f)
        except json.JSONDecodeError as e:
            raise GameFormatError(f"{path}: not valid JSON ({e})") from e


def write_json(document: Any, path: Optional[PathLike] = None) -> str:
    """Serialize a document; also write it to path when one is given."""
    text = json.dumps(document, indent=2, allow_nan=False) + "\n"
    if path is not None:
        Path(path).write_text(text, encoding="utf-8")
        logger.debug("Wrote %s", path)
    return text


def __parse(
    schema: type[DocumentT],
    document: Any,
    what: str,
    error: type[Exception] = GameFormatError,
) -> DocumentT:
    try:
        return schema.model_validate(document)
    except ValidationError as e:
        raise error(f"Malformed {what}: {e}") from e


def __floats(values: FloatArray) -> list[Optional[float]]:
    return [None if math.isnan(v) else float(v) for v in values]


def __nan_array(values: list[Optional[float]]) -> FloatArray:
    return np.array([math.nan if v is None else float(v) for v in values], dtype=np.float64)


def game_to_dict(game: DefenseGame) -> dict[str, Any]:
    ids = game.node_ids
    document = GameDocument(
        nodes=[
            NodeDocument(
                id=ids[i],
                C=float(game.invest_cost[i]),
                L=float(game.loss[i]),
                p_hat=float(game.direct_success[i]),
                alpha=float(game.unblocked_transfer[i]),
                C0=float(game.attack_cost[i]),
            )
            for i in range(game.n)
        ],
        edges=[
            EdgeDocument(src=ids[s], dst=ids[d], q_hat=float(q))
            for (s, d), q in zip(game.graph.edges, game.transfer_success)
        ],
        provenance=game.provenance,
    )
    return document.model_dump(exclude={"provenance"} if game.provenance is None else None)


def game_from_dict(document: Any) -> DefenseGame:
    """Rebuild a game from its JSON form.

    Raises:
        GameFormatError: on missing fields, non-numeric values, duplicate or unknown ids,
            self-loops or duplicate edges.
    """
    parsed = __parse(GameDocument, document, "game")
    ids = [node.id for node in parsed.nodes]
    index = {node_id: i for i, node_id in enumerate(ids)}
    transfers = {(index[edge.src], index[edge.dst]): edge.q_hat for edge in parsed.edges}
    try:
        graph = DirectedGraph(len(ids), transfers.keys())
    except InvalidGraphError as e:
        raise GameFormatError(str(e)) from e
    return DefenseGame(
        graph,
        invest_cost=[node.C for node in parsed.nodes],
        loss=[node.L for node in parsed.nodes],
        direct_success=[node.p_hat for node in parsed.nodes],
        attack_cost=[node.C0 for node in parsed.nodes],
        transfer_success=[transfers[edge] for edge in graph.edges],
        unblocked_transfer=[node.alpha for node in parsed.nodes],
        node_ids=ids,
        provenance=parsed.provenance,
    )


def load_game(path: PathLike) -> DefenseGame:
    return game_from_dict(read_json(path))


def strategies_to_dict(x: FloatArray, y: FloatArray) -> dict[str, Any]:
    return StrategiesDocument(x=[float(v) for v in x], y=[float(v) for v in y]).model_dump()


def strategies_from_dict(document: Any) -> tuple[FloatArray, FloatArray]:
    parsed = __parse(StrategiesDocument, document, "strategies")
    return np.asarray(parsed.x, dtype=np.float64), np.asarray(parsed.y, dtype=np.float64)


def eqset_to_dict(eqset: EquilibriumSet) -> dict[str, Any]:
    xs, ys = __floats(eqset.x), __floats(eqset.y)
    family = None
    if eqset.family is not None:
        family = FamilyDocument(
            v_min=eqset.family.v_min,
            v_max=eqset.family.v_max,
            loss_bar=__floats(eqset.family.loss_bar),
            attack_cost=__floats(eqset.family.attack_cost),
        )
    simplex = None
    if eqset.simplex is not None:
        simplex = SimplexDocument(
            indices=list(eqset.simplex.indices),
            upper_bounds=__floats(eqset.simplex.upper_bounds),
            total=eqset.simplex.total,
        )
    document = EquilibriumSetDocument(
        case=eqset.case,
        y0=eqset.y0,
        fixed=[FixedEntry(i=i, x=xs[i], y=ys[i]) for i in range(eqset.n)],
        family=family,
        simplex=simplex,
        unique=eqset.unique,
        support=list(eqset.support),
        tied=list(eqset.tied),
        value=eqset.value,
    )
    return document.model_dump(mode="json", by_alias=True)


def eqset_from_dict(document: Any) -> EquilibriumSet:
    parsed = __parse(EquilibriumSetDocument, document, "equilibrium set")
    fixed = sorted(parsed.fixed, key=lambda entry: entry.i)
    family = None
    if parsed.family is not None:
        family = FamilyRange(
            v_min=parsed.family.v_min,
            v_max=parsed.family.v_max,
            loss_bar=__nan_array(parsed.family.loss_bar),
            attack_cost=__nan_array(parsed.family.attack_cost),
        )
    simplex = None
    if parsed.simplex is not None:
        simplex = TiedSimplex(
            indices=tuple(parsed.simplex.indices),
            upper_bounds=__nan_array(parsed.simplex.upper_bounds),
            total=parsed.simplex.total,
        )
    return EquilibriumSet(
        case=parsed.case,
        y0=parsed.y0,
        x=__nan_array([entry.x for entry in fixed]),
        y=__nan_array([entry.y for entry in fixed]),
        support=tuple(parsed.support),
        tied=tuple(parsed.tied),
        value=parsed.value,
        family=family,
        simplex=simplex,
        unique=parsed.unique,
    )


def regret_to_dict(report: RegretReport) -> dict[str, Any]:
    return {
        "mode": report.mode.value,
        "defender": [float(v) for v in report.defender],
        "attacker": report.attacker,
        "eps": report.epsilon,
    }


def brgd_config_to_dict(config: BrgdConfig) -> dict[str, Any]:
    document = asdict(config)
    document["regret_mode"] = config.regret_mode.value
    document["schedule"] = config.schedule.value
    if config.init is not None:
        document["init"] = {"x": [float(v) for v in config.init[0]], "y": [float(v) for v in config.init[1]]}
    return document


def brgd_result_to_dict(result: BrgdResult) -> dict[str, Any]:
    document: dict[str, Any] = {
        "config": brgd_config_to_dict(result.config),
        "converged": result.converged,
        "iterations": result.iterations,
        **strategies_to_dict(result.x, result.y),
        "regret": regret_to_dict(result.report),
        "trace": [[point.iteration, point.epsilon] for point in result.trace],
    }
    if result.snapshots:
        document["snapshots"] = [
            {"iteration": s.iteration, **strategies_to_dict(s.x, s.y)} for s in result.snapshots
        ]
    return document


def stats_to_dict(stats: GraphStats) -> dict[str, Any]:
    return asdict(stats)


def validation_to_dict(report: ValidationReport) -> dict[str, Any]:
    violations = []
    for v in report.violations:
        entry = asdict(v)
        entry["rule"] = v.rule.value
        entry["edge"] = list(v.edge) if v.edge is not None else None
        violations.append(entry)
    return {"valid": report.is_valid, "violations": violations, "tolerance_absorbed": report.tolerance_absorbed}


def verification_to_dict(report: VerificationReport) -> dict[str, Any]:
    return {"ok": report.ok, "violations": [asdict(v) for v in report.violations]}


def generator_spec_to_dict(spec: GeneratorSpec) -> dict[str, Any]:
    return {
        "mode": spec.mode.value,
        "seed": spec.seed,
        "constants": asdict(spec.constants),
        "homogeneous": asdict(spec.homogeneous) if spec.homogeneous is not None else None,
    }


def generator_spec_from_dict(document: Any) -> GeneratorSpec:
    """Read a generator spec; absent fields keep their defaults.

    Raises:
        InvalidConfigError: on unknown fields or values of the wrong type.
    """
    parsed = __parse(GeneratorSpecDocument, document, "generator spec", InvalidConfigError)
    try:
        homogeneous = HomogeneousParams(**parsed.homogeneous) if parsed.homogeneous is not None else None
    except TypeError as e:
        raise InvalidConfigError(f"Malformed generator spec: {e}") from e
    return GeneratorSpec(
        mode=parsed.mode,
        seed=parsed.seed,
        constants=InternetConstants(**(parsed.constants or {})),
        homogeneous=homogeneous,
    )
