# Marked Poisson points and the ordering paradox
#
# Points (X, Y) where the X are jumps of a gamma-type process and Y given X is a stable
# variable. Order them by picking proportionally to X, or proportionally to Y. The first
# point in Y-biased order has E[X_1 / Sigma_X] = 1/2, not the 2/3 one might guess.

import numpy as np

from bridgecut import pointproc as pp

rng = np.random.default_rng(3)

ps = pp.construct_points_D(1.0, rng)
print(f"{len(ps)} points, Sigma_X = {ps.sum_x:.4f}, Sigma_Y = {ps.sum_y:.4f}")

ratio = []
for _ in range(5000):
    s = pp.reorder_biased(pp.construct_points_D(1.0, rng), "Y", rng)
    ratio.append(s.x[0] / s.sum_x)
ratio = np.array(ratio)
print(f"E[X_1 / Sigma_X] under Y-biased order ~ {ratio.mean():.4f} +- {ratio.std() / np.sqrt(ratio.size):.4f}")

# the first mark of a marked subordinator is exponential with rate sqrt(2 xi)

for r in pp.verify_lemma_gp(1.0, 2000, rng):
    print(r.line())
