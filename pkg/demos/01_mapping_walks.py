# Random mappings as walks
#
# A mapping of [n] into itself is a forest of trees hung on cycles. Writing each tree as
# a contour walk and concatenating them gives a walk that returns to zero between trees.
# Ordering components cycles-first or basins-first changes the walk, and at scale
# sqrt(n) the cycles-first walk looks like a reflected bridge.

import numpy as np

from bridgecut import mappings as mp

rng = np.random.default_rng(5)

# draw until there are two components, so the orderings can differ

while True:
    m = mp.sample_uniform_mapping(12, rng)
    d = mp.analyze_digraph(m)
    if len(mp.order_components(d, "cycles-first")) > 1:
        break
print("image:", m.image.tolist())
print("cyclic points:", sorted(d.cyclic_points))

for mode in mp.OrderingMode:
    w = mp.build_mapping_walk(d, m, mode)
    print(f"{mode.value:13s} levels {w.levels.tolist()}")

# With n large the number of cyclic points is about sqrt(n) times a Rayleigh variable,
# whose mean is sqrt(pi/2) ~ 1.2533.

n = 20_000
cyc = [mp.fast_statistics(rng.integers(0, n, n)).num_cyclic / np.sqrt(n) for _ in range(1000)]
print(f"mean |C_n|/sqrt(n) over 1000 mappings: {np.mean(cyc):.3f}")

w = mp.build_mapping_walk(mp.analyze_digraph(m := mp.sample_uniform_mapping(n, rng)), m, "cycles-first")
print(f"one walk of length {w.steps.size}: max level / sqrt(n) = {w.max_level / np.sqrt(n):.3f}")
