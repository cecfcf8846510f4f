from iddgames.brgd import init_random, run, step
from iddgames.data.classes import BrgdConfig, EquilibriumSet, GeneratorSpec, RegretMode
from iddgames.exact import contains, is_unique, sample, solve_all
from iddgames.gen import generate, synth_graph
from iddgames.graph import DirectedGraph, dump_edge_list, graph_stats, load_edge_list, neighborhoods
from iddgames.model import DefenseGame, build_game, validate
from iddgames.oracle import psne_search, verify_msne
from iddgames.payoff import attack_gains, mixed_costs, regret

__version__ = "0.1.0"
__all__ = [
    "BrgdConfig",
    "DefenseGame",
    "DirectedGraph",
    "EquilibriumSet",
    "GeneratorSpec",
    "RegretMode",
    "attack_gains",
    "build_game",
    "contains",
    "dump_edge_list",
    "generate",
    "graph_stats",
    "init_random",
    "is_unique",
    "load_edge_list",
    "mixed_costs",
    "neighborhoods",
    "psne_search",
    "regret",
    "run",
    "sample",
    "solve_all",
    "step",
    "synth_graph",
    "validate",
    "verify_msne",
]
