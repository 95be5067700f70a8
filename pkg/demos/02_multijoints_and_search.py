# Multijoints of a configuration and the search for a balanced handicap.

from fractions import Fraction

from multijoint.configs import axis_grid, joints_on_line
from multijoint.geometry import connected_components
from multijoint.handicap_search import Instance, WeightFunction, brute_force_handicap_oracle, search_good_handicap

# every axis-parallel line of F_3^3, one family per axis: all 27 points are joints
grid = Instance(axis_grid())
print(len(grid.J), "multijoints,", len(connected_components(grid.J)), "component")
print("witness tuples at the origin:", grid.J.witnesses[(0, 0, 0)])

# three vertical lines crossing y = 0 in F_5^2
cfg = joints_on_line(3)
inst = Instance(cfg, WeightFunction({(0, 0): 1, (1, 0): 2, (2, 0): 1}))

for lam in (2, 4, 8):
    quick = search_good_handicap(inst, lam)
    full = search_good_handicap(inst, lam, early_stop=False)
    print(f"lam={lam}: early stop gap {float(quick.gap):.3f} (target {float(quick.target):.1f}),"
          f" full descent gap {float(full.gap):.3f} after {full.iterations} moves")
    print("   handicap", {pt: a for pt, a in full.alpha.items()})
    print("   weights ", [str(w) for w in full.profile.sorted])

# the exhaustive minimiser over a handicap box agrees with the descent
alpha, prof = brute_force_handicap_oracle(inst, 3, 12)
print("oracle:", [str(w) for w in prof.sorted])
print("search:", [str(w) for w in search_good_handicap(inst, 3, early_stop=False).profile.sorted])

# the largest normalised weight never drops below C(lam+n, n) / prod C(lam+k_j, k_j)
print(max(prof.normalised.values()) >= Fraction(10, 16))
