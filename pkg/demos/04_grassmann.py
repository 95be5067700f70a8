# From a plane-indexed factorisation to one indexed by (point, direction) over a finite field.

from multijoint.configs import all_lines
from multijoint.factorization import extend_to_grassmannian
from multijoint.geometry import enumerate_subspaces
from multijoint.handicap_search import Instance, WeightFunction

for p in (2, 3):
    cfg = all_lines(p)
    J = Instance(cfg).J.points
    inst = Instance(cfg, WeightFunction({pt: 1 for pt in J}))
    for lam in (1, 4, 16):
        g = extend_to_grassmannian(inst, lam)
        print(f"F_{p}^2 lam={lam:2d}: passed={g.passed} C_emp={g.c_emp}")

# s(p, V) at one point, for each of the p + 1 line directions of F_3^2
g = extend_to_grassmannian(inst, 16)
for V in enumerate_subspaces(1, 2, 3):
    print(V.basis[0], [str(g.value(j, (0, 0), V)) for j in range(2)])
