# Factorising functions s = S~ / C(lam+k, k), their empirical constant, and a lam sweep.

from fractions import Fraction

from multijoint.configs import axis_grid, joints_on_line
from multijoint.factorization import (
    corollary4_certificate,
    lambda_sweep,
    vanishing_certificate,
    verify_multijoint_inequality,
)
from multijoint.handicap_search import Instance

two = Instance(joints_on_line(2))
sw = lambda_sweep(two, [4, 8, 16])
for st in sw.stages:
    row = st.table.rows[0][0]  # the shared line y = 0
    print(f"lam={st.lam:2d}  s on the shared line {[str(v) for v in row.values()]}  C_emp={st.report.c_emp}")
print("successive change in s:", sw.cauchy_diagnostic())

# the grid: C_emp is 1 exactly when lam + 1 splits evenly over the 3 points per line
grid = Instance(axis_grid())
gsw = lambda_sweep(grid, [2, 4, 8, 16])
print("grid C_emp:", [f"{float(c):.3f}" for c in gsw.c_emp])

# the polynomial-method certificates behind the construction
alpha = gsw.stages[0].search.alpha
c4 = corollary4_certificate(alpha, grid, 2)
vc = vanishing_certificate(alpha, grid, 2)
print(f"sum of prod S~ = {c4.lhs} >= {c4.rhs};  composed functionals have rank {vc.rank} of {vc.dim}")

# multijoint inequality chain with random plane weights
st = gsw.stages[-1]
f = [[Fraction(i % 4, 3) for i in range(len(fam))] for fam in grid.cfg.families]
chain = verify_multijoint_inequality(grid, st.table, st.report.c_emp, f)
print(f"{chain.lhs:.4f} <= {chain.middle:.4f} <= {chain.bound:.4f} <= {chain.rhs:.4f}", chain.passed)
