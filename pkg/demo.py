from iddgames import BrgdConfig, GeneratorSpec, generate, run, sample, solve_all, synth_graph, verify_msne
from iddgames.data.classes import HomogeneousParams, Vertex

# Synthesize a small preferential-attachment graph
graph = synth_graph("preferential_attachment", {"n": 12, "m": 2}, seed=3)

# Homogeneous transfer-vulnerable game: exact solving applies
params = HomogeneousParams(invest_cost=1.0, loss=10.0, direct_success=0.3, attack_cost=1.0, transfer=0.05)
game = generate(graph, GeneratorSpec(homogeneous=params))

eqset = solve_all(game)
print(eqset.case, "unique" if eqset.unique else "set", "support:", eqset.support)

# Centroid of the set, then a vertex that fills the last tied node first
x, y = sample(eqset)
print(verify_msne(game, x, y).ok)
if not eqset.unique:
    x, y = sample(eqset, Vertex(priority=(eqset.tied[-1],)))

# Internet-style parameters with partial blocking: use the dynamics
internet_game = generate(graph, GeneratorSpec(mode="random", seed=3))
result = run(internet_game, BrgdConfig(epsilon=0.01, seed=3))
print(result.converged, result.iterations, result.report.epsilon)
