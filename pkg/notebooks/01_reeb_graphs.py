# %% [markdown]
# # Reeb graphs of a few solids
#
# Sweep a height function through generated surfaces, build the weighted
# indexed Reeb graph (WIRG) of the solid and read off the classification.

# %%
from bdomain import HeightFunction, generate, perturb_to_morse
from bdomain.classify import classify
from bdomain.reeb import analyze
from bdomain.rewrite import simplify
from bdomain.fixtures import torus_with_survivor


def sweep(spec, direction=(0, 0, 1)):
    s = generate(spec)
    return analyze(s, perturb_to_morse(s, HeightFunction(direction)))


# %% [markdown]
# A torus lying flat: min, two saddles, max.  The solid graph is a circle
# with a whisker at each end and every level set is a disk (weight 0).

# %%
a = sweep({"kind": "torus-horizontal"})
print([c.index for c in a.crit])
for e in a.wirg.canonical().edges:
    print(e.lower, "->", e.upper, "weight", e.weight)

# %% [markdown]
# Stand the torus up and tilt it a little.  Now the middle slab is an
# annulus, so the path picks up a weight-1 edge.

# %%
t = sweep({"kind": "torus-vertical-tilted"})
print([e.weight for e in t.wirg.canonical().edges], "b1(surface graph) =", t.surface_graph.betti1())
print(classify(t.wirg, t.crit, t.surface_graph.betti1()).to_text())

# %% [markdown]
# Knot tubes in bridge position: 4k critical points for a k-bridge knot.

# %%
for knot in ("trefoil", "figure-eight"):
    k = sweep({"kind": "knot-tube", "knot": knot})
    rep = classify(k.wirg, k.crit, k.surface_graph.betti1())
    print(knot, len(k.crit), "critical points;", " ".join(rep.rules))

# %% [markdown]
# A hand-built torus-boundary graph whose weight-2 segment cannot be
# rewritten away.  The rule table only gives the conditional verdict.

# %%
g, ann = torus_with_survivor()
res = simplify(g, ann)
print(res.verdicts)
for step in res.trace:
    print(step)
print(classify(res.graph, annotations=ann).to_text())
