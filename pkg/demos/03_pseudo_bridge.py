# The pseudo-bridge and its maximum
#
# Run Brownian motion until its local time at zero reaches 1, then rescale to unit
# length. Relative to the bridge the law is tilted by 1/L. Its maximum absolute value
# is distributed as 1/(2 sqrt H), where H is the hitting time of 1 by a 3-d Bessel process.

import numpy as np

from bridgecut import bridge as br

rng = np.random.default_rng(11)
m = 2 ** 12

x = br.simulate_pseudo_bridge(m, rng)
print(f"pseudo-bridge with {x.m} steps, local time {br.local_time_profile(x).total:.3f}")

# swapping the excursion around a time u with the tail leaves occupation times alone

y = br.path_swap(x, 0.4)
bins = np.linspace(-3, 3, 61)
same = np.array_equal(br.occupation_histogram(x, bins), br.occupation_histogram(y, bins))
print("occupation histogram unchanged by swap:", same)

reps = 400
mx = np.array([np.abs(br.simulate_pseudo_bridge(m, rng).values).max() for _ in range(reps)])
H = br.sample_bessel3_hitting_series(20_000, rng)
print(f"E max |pseudo-bridge| ~ {mx.mean():.3f}, E 1/(2 sqrt H) ~ {(1 / (2 * np.sqrt(H))).mean():.3f}")
