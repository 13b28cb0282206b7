# %% [markdown]
# # Visibility and diagram words
#
# Ray sampling on convex, knotted and pocketed surfaces, the basin
# automaton on a 2-bridge knot exterior, and planar normalisation of
# diagram words.

# %%
import math
import random

import numpy as np

from bdomain import generate
from bdomain.diagram import normalize, parse, random_word, render
from bdomain.fixtures import two_bridge_events, two_bridge_exterior
from bdomain.visibility import basin_analysis, sample_visibility

# %% [markdown]
# Convex shapes need only the normal ray.  A thin trefoil tube is still
# visible everywhere, it just needs more directions at some points.

# %%
ell = sample_visibility(generate({"kind": "ellipsoid"}), samples=500, rays=1, seed=0)
print("ellipsoid", ell.fraction_visible)
tube = sample_visibility(generate({"kind": "knot-tube", "knot": "trefoil", "rho": 0.05}), samples=300, rays=256, seed=0)
print("trefoil tube", tube.fraction_visible, "rays cast", tube.rays_used)

# %% [markdown]
# The floor of the mug's chamber sits under a narrow neck: off-centre floor
# points never see out, while the centre looks straight up the neck.

# %%
R = 2.0
pts = np.array([[r * R * math.cos(0.4), r * R * math.sin(0.4), 0.6 * R] for r in (0.0, 0.25, 0.5, 0.6)])
mug = sample_visibility(generate({"kind": "mug"}), rays=2048, seed=0, points=pts)
for p, st in zip(pts, mug.status):
    print(f"floor x={p[0]:.2f}: {st}")

# %% [markdown]
# Basin automaton on a 2-bridge knot exterior with 4k = 8 critical points.

# %%
for b in basin_analysis(two_bridge_exterior(), two_bridge_events()):
    print(b.to_document())

# %% [markdown]
# Diagram words.  The first one is a single twist that unwinds; the second
# needs a Whitehead move.

# %%
for text in ("cup Y1 s1 L1 cap", "cup Y1 Y2 s2 s1 L1 Y1 s2 s1^-1 L2 L1 cap"):
    res = normalize(parse(text))
    print(res.status, res.states, "states:", render(res.word), [m for m, _ in res.trace])

rng = random.Random(0)
print(sorted(normalize(random_word(rng)).states for _ in range(20)))
