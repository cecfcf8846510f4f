"""Pydantic models of the JSON documents read and written by iddgames.serialization."""

from dataclasses import fields
from typing import Any, Optional

from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from .classes import EquilibriumCase, GeneratorMode, HomogeneousParams, InternetConstants


class NodeDocument(BaseModel):
    id: str
    C: float
    L: float
    p_hat: float
    alpha: float
    C0: float

    @field_validator("id", mode="before")
    @classmethod
    def identifier_as_text(cls, value: Any) -> Any:
        return str(value) if isinstance(value, (int, float)) else value


class EdgeDocument(BaseModel):
    src: str
    dst: str
    q_hat: float

    @field_validator("src", "dst", mode="before")
    @classmethod
    def identifier_as_text(cls, value: Any) -> Any:
        return str(value) if isinstance(value, (int, float)) else value


class GameDocument(BaseModel):
    """A game: nodes by identifier, edges between identifiers, optional provenance."""

    nodes: list[NodeDocument]
    edges: list[EdgeDocument]
    provenance: Optional[dict[str, Any]] = None

    @model_validator(mode="after")
    def check_references(self) -> "GameDocument":
        ids = [node.id for node in self.nodes]
        if len(set(ids)) != len(ids):
            raise ValueError("Duplicate node identifiers")
        known = set(ids)
        pairs = set()
        for k, edge in enumerate(self.edges):
            if edge.src not in known or edge.dst not in known:
                raise ValueError(f"Edge {k} references an unknown node")
            if (edge.src, edge.dst) in pairs:
                raise ValueError(f"Duplicate edge {edge.src} -> {edge.dst}")
            pairs.add((edge.src, edge.dst))
        return self


class StrategiesDocument(BaseModel):
    x: list[float]
    y: list[float]


class FixedEntry(BaseModel):
    i: int
    x: Optional[float]
    y: Optional[float]


class FamilyDocument(BaseModel):
    v_min: float
    v_max: float
    loss_bar: list[Optional[float]]
    attack_cost: list[Optional[float]]


class SimplexDocument(BaseModel):
    model_config = ConfigDict(populate_by_name=True)

    indices: list[int]
    upper_bounds: list[Optional[float]]
    total: float = Field(alias="sum")


class EquilibriumSetDocument(BaseModel):
    """An equilibrium set; null coordinates are the ones a family or the tied simplex decides."""

    case: EquilibriumCase
    y0: float
    fixed: list[FixedEntry]
    family: Optional[FamilyDocument] = None
    simplex: Optional[SimplexDocument] = None
    unique: bool
    support: list[int] = []
    tied: list[int] = []
    value: Optional[float] = None


def _known_keys(cls: Any, document: Optional[dict[str, float]]) -> Optional[dict[str, float]]:
    if document is not None:
        unknown = set(document) - {f.name for f in fields(cls)}
        if unknown:
            raise ValueError(f"Unknown {cls.__name__} field(s): {sorted(unknown)}")
    return document


class GeneratorSpecDocument(BaseModel):
    """A generator spec; absent fields keep their defaults."""

    model_config = ConfigDict(extra="forbid")

    mode: GeneratorMode = GeneratorMode.FIXED
    seed: int = 0
    constants: Optional[dict[str, float]] = None
    homogeneous: Optional[dict[str, float]] = None

    @field_validator("constants")
    @classmethod
    def known_constants(cls, value: Optional[dict[str, float]]) -> Optional[dict[str, float]]:
        return _known_keys(InternetConstants, value)

    @field_validator("homogeneous")
    @classmethod
    def known_homogeneous(cls, value: Optional[dict[str, float]]) -> Optional[dict[str, float]]:
        return _known_keys(HomogeneousParams, value)
