# Exact enumeration
#
# Small cases can be done exactly with rationals. The number of blocks of the discrete
# D- and T-cuts has the law of cycles of a uniform permutation, whatever the lengths.
# For mappings, the cycle-size sequence has the same law in both orderings, while the
# first basin does not.

from fractions import Fraction

import numpy as np

from bridgecut import mappings as mp
from bridgecut import partitions as pt

n = 5
print("cycles of a uniform permutation:", pt.stirling_cycle_dist(n).probabilities)

# rational lengths keep the dynamic programme exact
w = np.random.default_rng(1).integers(1, 100, n)
lengths = [Fraction(int(v), int(w.sum())) for v in w]
print("J^D law matches:", pt.jd_law(lengths) == pt.stirling_cycle_dist(n))
print("J^T law matches:", pt.jt_law(n) == pt.stirling_cycle_dist(n))

blocks = ((1, 2), (3,), (4, 5))
print(f"PT form for {blocks}: {pt.pt_form(blocks, n)}")

tab = mp.enumerate_exact(4)
for mode in mp.OrderingMode:
    print(f"{mode.value:13s} E|B_1| = {tab.mean_first_basin(mode)}")
same = tab.cycle_sequence["cycles-first"] == tab.cycle_sequence["basins-first"]
print("cycle-size sequence law identical:", same)
print("P(one cycle), n = 4:", tab.num_cycles.get(1, Fraction(0)))
