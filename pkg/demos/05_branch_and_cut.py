"""
Branch-and-cut on mean-risk portfolios
======================================

Choosing at most k assets to minimize ``-lambda x + Omega sqrt(a x)`` is a
concave minimization over a cardinality set. The epigraph of the square root
is approximated by cuts: lazy ones at integer points, and user cuts every ten
nodes from the lifted families or from approximate lifting.
"""
from concavecuts.bench import GenConfig, format_table, gen_instance, grid_configs, run_benchmark
from concavecuts.bnc import Limits, Strategy, enumerate_optimum, solve

###############################################################################
# With q = 8 the light items are cheap enough that a full portfolio pays off.
# At q = 4 and small k the empty portfolio is often optimal, and the solver
# only has to prove it.
#
# One generated instance, three strategies, and brute force for reference.

inst, obj = gen_instance(GenConfig(n=14, q=8, k=5, seed=0))
best, support = enumerate_optimum(inst, obj)
print(f"enumeration: {best:.6f} on items {[i + 1 for i in support]}")
for strategy in Strategy:
    rep = solve(inst, obj, strategy)
    print(f"{strategy.value:>9}: {rep.objective:.6f}  nodes {rep.nodes:4d}  cuts {rep.cuts}")

###############################################################################
# A small grid. Stronger cuts mean fewer nodes.

rows, _ = run_benchmark(grid_configs({"n": [30], "k": [3], "q": [4.0, 8.0]}), list(Strategy), Limits(time_limit=30),
                        trials=3)
print(format_table(rows))
