# Vanishing-condition tableaux on a single plane.
#
# A tableau hands out the C(lam+k, k) independent derivative conditions of
# degree-lam polynomials on a k-plane to the points on it, greedily, in
# handicap priority order.  Run from the repo root: python demos/01_tableaux.py

import numpy as np

from multijoint.geometry import canonicalize_plane
from multijoint.tableau import build_tableau

line = canonicalize_plane((0, 0), [(1, 0)], 5)  # y = 0 in F_5^2
p1, p2 = (0, 0), (1, 0)

# equal handicaps: the earlier point wins ties and takes 3 of the 5 conditions
print(build_tableau(line, [p1, p2], {p1: 0, p2: 0}, 4).counts)

# raising p2's handicap by one hands it the extra condition
print(build_tableau(line, [p1, p2], {p1: 0, p2: 1}, 4).counts)

# only relative handicaps matter
print(build_tableau(line, [p1, p2], {p1: 10, p2: 11}, 4).counts)

# a point lam+1 below another gets nothing at all
print(build_tableau(line, [p1, p2], {p1: 0, p2: -5}, 4).counts)

# the whole plane F_3^2 at lam = 1: the three conditions (1, x, y) go to the first
# three points in order, and once they are spent every later point gets nothing
plane = canonicalize_plane((0, 0), [(1, 0), (0, 1)], 3)
pts = plane.points()
tab = build_tableau(plane, pts, {pt: 0 for pt in pts}, 1)
grid = np.zeros((3, 3), dtype=int)
for (x, y), c in tab.counts.items():
    grid[x, y] = c
print(grid)

# which derivative orders each point received at lam = 3
tab = build_tableau(plane, pts, {pt: 0 for pt in pts}, 3)
for pt in pts:
    if tab.accepted(pt):
        print(pt, tab.accepted(pt))
