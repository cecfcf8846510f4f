import logging
from collections.abc import Iterable, Iterator
from dataclasses import dataclass, field
from io import IOBase
from pathlib import PurePath
from typing import Optional, Union

import networkx as nx
import numpy as np

from .data.classes import GraphStats, IngestionReport, IntArray, Neighborhoods
from .exceptions.custom_exceptions import EdgeListParseError, InvalidGraphError, NodeIndexError

logger = logging.getLogger(__name__)

# Graphs above this many nodes skip the all-pairs BFS for the diameter.
DIAMETER_NODE_THRESHOLD = 5_000


class DirectedGraph:
    """Immutable directed graph over nodes 0..node_count-1.

    Edges are kept sorted by (src, dst); the arrays returned by ``src`` and ``dst``
    are read-only and indexed consistently with every per-edge parameter array
    of a game built on the graph.
    """

    def __init__(self, node_count: int, edges: Iterable[tuple[int, int]] = ()) -> None:
        """Initialize the graph.

        Args:
            node_count (int): number of nodes, >= 0.
            edges (Iterable[tuple[int, int]]): ordered (src, dst) pairs.

        Raises:
            InvalidGraphError: on a negative node count, self-loop, duplicate edge or
                endpoint outside [0, node_count).
        """
        if node_count < 0:
            raise InvalidGraphError("node_count must be non-negative")
        self.__node_count = int(node_count)
        edge_list = sorted((int(s), int(d)) for s, d in edges)
        self.__check_edges(edge_list)

        self.__edges: tuple[tuple[int, int], ...] = tuple(edge_list)
        self.__positions: dict[tuple[int, int], int] = {edge: pos for pos, edge in enumerate(self.__edges)}
        children: list[list[int]] = [[] for _ in range(self.__node_count)]
        parents: list[list[int]] = [[] for _ in range(self.__node_count)]
        for s, d in self.__edges:
            children[s].append(d)
            parents[d].append(s)
        self.__children = tuple(tuple(c) for c in children)
        self.__parents = tuple(tuple(sorted(p)) for p in parents)

        self.__src = self.__frozen_array([s for s, _ in self.__edges])
        self.__dst = self.__frozen_array([d for _, d in self.__edges])
        self.__out_degree = self.__frozen_array([len(c) for c in self.__children])
        self.__in_degree = self.__frozen_array([len(p) for p in self.__parents])

    def __check_edges(self, edges: list[tuple[int, int]]) -> None:
        previous: Optional[tuple[int, int]] = None
        for s, d in edges:
            if s == d:
                raise InvalidGraphError(f"Self-loop on node {s}")
            if not (0 <= s < self.__node_count and 0 <= d < self.__node_count):
                raise InvalidGraphError(f"Edge ({s}, {d}) has an endpoint outside [0, {self.__node_count})")
            if previous == (s, d):
                raise InvalidGraphError(f"Duplicate edge ({s}, {d})")
            previous = (s, d)

    @staticmethod
    def __frozen_array(values: list[int]) -> IntArray:
        array = np.asarray(values, dtype=np.int64)
        array.setflags(write=False)
        return array

    def check_node(self, i: int) -> None:
        if not 0 <= i < self.__node_count:
            raise NodeIndexError(f"Node index {i} out of range [0, {self.__node_count})")

    @property
    def node_count(self) -> int:
        return self.__node_count

    @property
    def edge_count(self) -> int:
        return len(self.__edges)

    @property
    def edges(self) -> tuple[tuple[int, int], ...]:
        return self.__edges

    @property
    def src(self) -> IntArray:
        return self.__src

    @property
    def dst(self) -> IntArray:
        return self.__dst

    @property
    def out_degree(self) -> IntArray:
        return self.__out_degree

    @property
    def in_degree(self) -> IntArray:
        return self.__in_degree

    def children(self, i: int) -> tuple[int, ...]:
        self.check_node(i)
        return self.__children[i]

    def parents(self, i: int) -> tuple[int, ...]:
        self.check_node(i)
        return self.__parents[i]

    def has_edge(self, src: int, dst: int) -> bool:
        return (src, dst) in self.__positions

    def edge_position(self, src: int, dst: int) -> int:
        """Position of (src, dst) in the sorted edge order.

        Raises:
            KeyError: if the edge does not exist.
        """
        return self.__positions[(src, dst)]

    def __len__(self) -> int:
        return self.__node_count

    def __iter__(self) -> Iterator[tuple[int, int]]:
        yield from self.__edges

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, DirectedGraph):
            return NotImplemented
        return self.__node_count == other.node_count and self.__edges == other.edges

    def __hash__(self) -> int:
        return hash((self.__node_count, self.__edges))

    def __repr__(self) -> str:
        return f"DirectedGraph(node_count={self.__node_count}, edge_count={self.edge_count})"

    def to_networkx(self) -> "nx.DiGraph":
        g = nx.DiGraph()
        g.add_nodes_from(range(self.__node_count))
        g.add_edges_from(self.__edges)
        return g


@dataclass
class LoadedGraph:
    """Result of reading an edge list: the graph, its node identifiers and the ingestion counters."""

    graph: DirectedGraph
    node_ids: list[str] = field(default_factory=list)
    report: IngestionReport = field(default_factory=IngestionReport)

    def index_of(self) -> dict[str, int]:
        return {node_id: i for i, node_id in enumerate(self.node_ids)}


def __read_lines(source: Union[PurePath, str, IOBase, Iterable[str]]) -> Iterable[str]:
    if isinstance(source, PurePath):
        with open(source, encoding="utf-8") as f:
            return f.read().splitlines()
    if isinstance(source, str):
        return source.splitlines()
    if isinstance(source, IOBase):
        text = source.read()
        if isinstance(text, bytes):
            text = text.decode("utf-8")
        return str(text).splitlines()
    return source


def load_edge_list(source: Union[PurePath, str, IOBase, Iterable[str]]) -> LoadedGraph:
    """Read a whitespace-separated edge list.

    Each non-blank line not starting with '#' must hold exactly two node identifiers.
    Identifiers are interned to indices 0..n-1 in order of first appearance (including
    the identifiers of dropped self-loop lines); duplicate edges are collapsed and
    self-loops dropped, both counted in the report.

    Args:
        source (PurePath | str | IOBase | Iterable[str]): a path, the edge-list text itself,
            an open stream, or an iterable of lines.

    Raises:
        EdgeListParseError: if a line does not hold exactly two tokens.

    Returns:
        LoadedGraph: graph, identifiers and ingestion report.
    """
    index: dict[str, int] = {}
    edges: set[tuple[int, int]] = set()
    lines = duplicates = self_loops = 0

    for line_number, raw in enumerate(__read_lines(source), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        tokens = line.split()
        if len(tokens) != 2:
            raise EdgeListParseError(line_number, raw)
        lines += 1
        s = index.setdefault(tokens[0], len(index))
        d = index.setdefault(tokens[1], len(index))
        if s == d:
            self_loops += 1
        elif (s, d) in edges:
            duplicates += 1
        else:
            edges.add((s, d))

    report = IngestionReport(lines=lines, duplicate_edges=duplicates, self_loops=self_loops)
    logger.info(
        "Edge list read: %d nodes, %d edges (%d duplicates collapsed, %d self-loops dropped)",
        len(index),
        len(edges),
        duplicates,
        self_loops,
    )
    return LoadedGraph(graph=DirectedGraph(len(index), edges), node_ids=list(index), report=report)


def dump_edge_list(g: DirectedGraph, node_ids: Optional[list[str]] = None) -> str:
    """Serialize a graph so that load_edge_list gives back the same indices.

    Edges are grouped by their larger endpoint k; the first line of group k
    introduces node k. Nodes with an empty group are introduced by an "id id" line,
    which the loader drops as a self-loop.

    Args:
        g (DirectedGraph): graph to write.
        node_ids (list[str], optional): identifiers; defaults to the decimal indices.

    Returns:
        str: edge-list text ending with a newline (empty for an empty graph).
    """
    ids = node_ids if node_ids is not None else [str(i) for i in range(g.node_count)]
    if len(ids) != g.node_count:
        raise ValueError("node_ids must name every node")
    groups: list[list[tuple[int, int]]] = [[] for _ in range(g.node_count)]
    for s, d in g.edges:
        groups[max(s, d)].append((s, d))

    lines: list[str] = []
    for k, group in enumerate(groups):
        if not group:
            lines.append(f"{ids[k]} {ids[k]}")
        lines.extend(f"{ids[s]} {ids[d]}" for s, d in group)
    return "".join(line + "\n" for line in lines)


def neighborhoods(g: DirectedGraph, i: int) -> Neighborhoods:
    """Parents, children and families of node i.

    Raises:
        NodeIndexError: if i is not a node of g.
    """
    parents = frozenset(g.parents(i))
    children = frozenset(g.children(i))
    return Neighborhoods(
        parents=parents,
        children=children,
        parent_family=parents | {i},
        child_family=children | {i},
        k=len(parents) + 1,
    )


def __diameter(g: DirectedGraph) -> int:
    nx_graph = g.to_networkx()
    longest = 0
    for _, lengths in nx.all_pairs_shortest_path_length(nx_graph):
        longest = max(longest, max(lengths.values()))
    return longest


def graph_stats(g: DirectedGraph, diameter_threshold: Optional[int] = DIAMETER_NODE_THRESHOLD) -> GraphStats:
    """Summary statistics of a graph.

    Args:
        g (DirectedGraph): the graph.
        diameter_threshold (int, optional): largest node count for which the diameter
            (longest finite shortest path) is computed; None always computes it.

    Returns:
        GraphStats: counts, density edges / (n (n - 1)), average degree edges / n and
            zero-degree fractions; ratios are None on graphs too small to define them.
    """
    n, m = g.node_count, g.edge_count
    isolated = int(np.count_nonzero((g.in_degree == 0) & (g.out_degree == 0)))
    compute_diameter = n > 0 and (diameter_threshold is None or n <= diameter_threshold)
    if n > 0 and not compute_diameter:
        logger.info("Skipping diameter for %d nodes (threshold %s)", n, diameter_threshold)
    return GraphStats(
        nodes=n,
        edges=m,
        isolated_nodes=isolated,
        density=m / (n * (n - 1)) if n > 1 else None,
        diameter=__diameter(g) if compute_diameter else None,
        avg_total_degree=m / n if n else None,
        frac_zero_indegree=float(np.count_nonzero(g.in_degree == 0)) / n if n else None,
        frac_zero_outdegree=float(np.count_nonzero(g.out_degree == 0)) / n if n else None,
        max_in_degree=int(g.in_degree.max()) if n else 0,
        max_out_degree=int(g.out_degree.max()) if n else 0,
    )
