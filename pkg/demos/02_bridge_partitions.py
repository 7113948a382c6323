# Cutting a Brownian bridge at zeros
#
# Two ways of splitting [0, 1] at zeros of a bridge. The D-cut picks a uniform time and
# cuts at the next zero after it; the T-cut picks a uniform fraction of local time. Both
# are repeated on what is left. The resulting interval partitions have the same ranked
# lengths, even though the first pieces behave differently.

import numpy as np

from bridgecut import bridge as br

rng = np.random.default_rng(7)
m = 2 ** 14

path = br.simulate_bridge(m, rng)
prof = br.local_time_profile(path)
print(f"grid {m}, zeros on grid: {br.grid_zeros(path).size}, local time at 0: {prof.total:.3f}")

d = br.d_partition(path, rng, prof)
t = br.t_partition(path, prof, rng)
print("D pieces:", [round(f.length, 4) for f in d][:6])
print("T pieces:", [round(f.length, 4) for f in t][:6])

# each piece rescaled by its length is again a bridge; the piece ends on a zero

f = d[0]
z = f.standardized.values
print(f"first D piece: [{f.G:.4f}, {f.D:.4f}], standardized ends {z[0]:.1f}, {z[-1]:.1f}, "
      f"max |value| {np.abs(z).max():.3f}")

# first D piece has mean length 2/3, first T piece has mean length 1/2

first_d, first_t = [], []
for _ in range(200):
    x = br.simulate_bridge(2 ** 12, rng)
    p = br.local_time_profile(x)
    first_d.append(br.d_partition(x, rng, p)[0].length)
    first_t.append(br.t_partition(x, p, rng)[0].length)
print(f"E first D piece ~ {np.mean(first_d):.3f}, E first T piece ~ {np.mean(first_t):.3f}")
