"""The residual-support partition behind the convergence analysis.

After k iterations some true-support indices are still unselected. Rank
them by magnitude, cut nested prefix subsets of doubling size, and find
the level L where the tail energy stops shrinking by the factor sigma.
Fast-decaying signals give L = 1; flat signals push L higher. The
milestone counts say how many extra iterations the analysis budgets to
clear each level.
"""

import numpy as np

from gomp import partition
from gomp.theory import SIGMA

print(f"sigma = {SIGMA:.6f}, eta = {1 / (2 * SIGMA):.6f} (sigma * eta = 1/2)\n")


def show(title, x, selected, S):
    rep = partition(x, selected, S)
    print(title)
    print(f"  remaining (ranked): {rep.gamma.tolist()}")
    print(f"  subset sizes:       {rep.sizes}")
    print(f"  tail energies:      {[round(t, 6) for t in rep.tail_energies]}")
    print(f"  L = {rep.L}, milestones k_i = "
          f"{list(rep.milestones) if rep.milestones else None}\n")


n = 24
# A flat signal: every remaining coefficient carries similar energy, so
# the tail shrinks slowly and L lands high.
flat = np.zeros(n)
flat[:10] = 1.0
show("flat magnitudes, S = 2:", flat, [], 2)

# A geometric signal: the first block holds nearly all energy, L = 1.
geo = np.zeros(n)
geo[:10] = 0.1 ** np.arange(10)
show("geometric magnitudes (ratio 0.1), S = 2:", geo, [], 2)

# Partway through a solve: part of the support is already selected.
show("after selecting {0, 1}, S = 2:", geo, [0, 1], 2)

# Nothing left: flagged rather than an error.
rep = partition(geo, np.flatnonzero(geo), 2)
print(f"fully selected support: subsets = {rep.sizes}, L = {rep.L}")
