"""Factorising functions s_{k_j}, their verification, and the polynomial-method certificates."""

from __future__ import annotations

import itertools
import math
from concurrent.futures import Executor
from dataclasses import dataclass, field
from fractions import Fraction
from math import comb, prod
from typing import Mapping, Sequence

from .geometry import (
    DEFAULT_PLANE_CAP,
    AffinePlane,
    Configuration,
    GrassmannElement,
    Point,
    enumerate_planes,
    enumerate_subspaces,
    plane_through,
    wedge,
)
from .handicap_search import Instance, SearchResult, WeightFunction, compute_w, search_good_handicap
from .linalg import IncrementalBasis
from .poly_dual import lift_and_compose, substitution_functionals
from .tableau import Handicap


class FactorisationError(ValueError):
    pass


def _map(executor: Executor | None, fn, items):
    items = list(items)
    if executor is None:
        return [fn(x) for x in items]
    return list(executor.map(fn, items))


@dataclass
class FactorisationTable:
    """s-values per family: ``rows[j][i]`` maps each point of J on plane i of family j to s."""

    lam: int
    alpha: dict[Point, int]
    rows: list[list[dict[Point, Fraction]]]
    counts: list[list[dict[Point, int]]]
    gap: Fraction | None = None

    def s(self, j: int, i: int, pt: Point) -> Fraction:
        """s(pt, plane) with the convention s = 0 when pt is not on the plane."""
        return self.rows[j][i].get(pt, Fraction(0))

    def row_sums(self) -> list[list[Fraction]]:
        return [[sum(row.values(), Fraction(0)) for row in fam] for fam in self.rows]


def build_s(alpha: Handicap, inst: Instance, lam: int, executor: Executor | None = None) -> FactorisationTable:
    cfg = inst.cfg
    planes = sorted(set(pl for fam in cfg.families for pl in fam))
    # tableaux for distinct planes are independent; results are keyed, so order is fixed
    computed = dict(zip(planes, _map(executor, lambda pl: inst.counts(pl, alpha, lam), planes)))
    rows, counts = [], []
    for k, fam in zip(cfg.k_list, cfg.families):
        denom = comb(lam + k, k)
        rows.append([{pt: Fraction(c, denom) for pt, c in computed[pl].items()} for pl in fam])
        counts.append([dict(computed[pl]) for pl in fam])
    return FactorisationTable(lam, dict(alpha), rows, counts)


@dataclass
class VerificationReport:
    lam: int
    c_emp: Fraction | None  # None stands for infinity (a zero factor at a support witness)
    margins: list[tuple[Point, tuple[int, ...], Fraction | None]]
    zero_factors: list[tuple[Point, tuple[int, ...]]]
    row_sums_exact: bool
    max_normalised_w: Fraction
    w_lower_bound: Fraction
    gap: Fraction | None = None
    slack: Fraction | None = None  # h / lam
    threshold: Fraction | None = None

    @property
    def finite(self) -> bool:
        return self.c_emp is not None

    @property
    def lower_bound_ok(self) -> bool:
        return self.max_normalised_w >= self.w_lower_bound

    @property
    def threshold_ok(self) -> bool:
        if self.threshold is None:
            return True
        return self.finite and self.c_emp <= self.threshold


def verify_theorem_2b(
    table: FactorisationTable,
    inst: Instance,
    search: SearchResult | None = None,
    threshold: Fraction | None = None,
) -> VerificationReport:
    """Empirical constant C_emp = max sigma_p / prod_j s(p, pi_j) over support witnesses."""
    lam = table.lam
    margins, zeros = [], []
    c_emp: Fraction | None = Fraction(0)
    for pt in inst.support:
        sig = inst.weights[pt]
        for tup in inst.J.witnesses[pt]:
            denom = prod(table.s(j, i, pt) for j, i in enumerate(tup))
            if denom == 0:
                zeros.append((pt, tup))
                margins.append((pt, tup, None))
                c_emp = None
                continue
            ratio = sig / denom
            margins.append((pt, tup, ratio))
            if c_emp is not None:
                c_emp = max(c_emp, ratio)
    exact = all(
        sum(row.values(), Fraction(0)) == 1
        for fam in table.rows for row in fam if row
    )
    prof = compute_w(table.alpha, inst, lam)
    max_w = max((prof.normalised[pt] for pt in inst.support), default=Fraction(0))
    bound = Fraction(comb(lam + inst.cfg.n, inst.cfg.n), inst.normaliser(lam))
    return VerificationReport(
        lam, c_emp, margins, zeros, exact, max_w, bound,
        gap=search.gap if search else table.gap,
        slack=search.h / lam if search else None,
        threshold=threshold,
    )


def default_tuple_choice(alpha: Handicap, inst: Instance, lam: int) -> dict[Point, tuple[int, ...]]:
    return compute_w(alpha, inst, lam).argmin


@dataclass
class Certificate:
    lhs: int
    rhs: int

    @property
    def passed(self) -> bool:
        return self.lhs >= self.rhs


def corollary4_certificate(alpha: Handicap, inst: Instance, lam: int,
                           tuple_choice: Mapping[Point, tuple[int, ...]] | None = None) -> Certificate:
    """sum over p in J of prod_j S~(p, pi_j(p)) against dim F_lam[x_1..x_n]."""
    choice = tuple_choice or default_tuple_choice(alpha, inst, lam)
    lhs = 0
    for pt in inst.J.points:
        tup = choice[pt]
        lhs += prod(inst.counts(pl, alpha, lam)[pt] for pl in inst.tuple_planes(tup))
    return Certificate(lhs, comb(lam + inst.cfg.n, inst.cfg.n))


@dataclass
class RankCertificate:
    rank: int
    dim: int
    functionals: int

    @property
    def passed(self) -> bool:
        return self.rank == self.dim


def vanishing_certificate(alpha: Handicap, inst: Instance, lam: int,
                          tuple_choice: Mapping[Point, tuple[int, ...]] | None = None,
                          stop_when_full: bool = True) -> RankCertificate:
    """Joint rank of the composed functionals D_1...D_d f(p), D_j from the greedy bases.

    Full rank C(lam+n, n) means no non-zero f of degree <= lam is killed by
    every chosen vanishing condition.
    """
    cfg = inst.cfg
    p = cfg.p
    choice = tuple_choice or default_tuple_choice(alpha, inst, lam)
    dim = comb(lam + cfg.n, cfg.n)
    acc = IncrementalBasis(p, dim)
    count = 0
    for pt in inst.J.points:
        planes = inst.tuple_planes(choice[pt])
        if not wedge(*(pl.direction for pl in planes)):
            raise FactorisationError(f"tuple chosen at {pt} does not form a multijoint")
        gens = [[beta for _, beta in inst.tableau(pl, alpha, lam).accepted(pt)] for pl in planes]
        if not all(gens):
            continue
        U = [u for pl in planes for u in pl.direction.basis]
        sub = substitution_functionals(pt, U, lam, p)
        for betas in itertools.product(*gens):
            row = lift_and_compose(pt, planes, betas, lam, p, table=sub)
            count += 1
            acc.try_extend(row, (pt, betas))
            if stop_when_full and acc.full:
                return RankCertificate(acc.rank, dim, count)
    return RankCertificate(acc.rank, dim, count)


@dataclass
class SweepStage:
    lam: int
    search: SearchResult
    table: FactorisationTable
    report: VerificationReport


@dataclass
class SweepReport:
    stages: list[SweepStage]

    @property
    def gaps(self) -> list[Fraction]:
        return [st.search.gap for st in self.stages]

    @property
    def c_emp(self) -> list[Fraction | None]:
        return [st.report.c_emp for st in self.stages]

    def s_series(self) -> dict[tuple[int, int, Point], list[Fraction]]:
        out: dict = {}
        for st in self.stages:
            for j, fam in enumerate(st.table.rows):
                for i, row in enumerate(fam):
                    for pt, v in row.items():
                        out.setdefault((j, i, pt), []).append(v)
        return out

    def cauchy_diagnostic(self) -> Fraction | None:
        """max |s_last - s_previous| over all (family, plane, point) entries."""
        if len(self.stages) < 2:
            return None
        return max((abs(v[-1] - v[-2]) for v in self.s_series().values() if len(v) >= 2),
                   default=Fraction(0))


def lambda_sweep(inst: Instance, lams: Sequence[int], budget: int = 1000,
                 executor: Executor | None = None, **search_kw) -> SweepReport:
    if list(lams) != sorted(lams):
        raise ValueError("lambda list must be ascending")
    stages = []
    for lam in lams:
        try:
            res = search_good_handicap(inst, lam, budget=budget, **search_kw)
            table = build_s(res.alpha, inst, lam, executor)
            table.gap = res.gap
            report = verify_theorem_2b(table, inst, res)
        except ValueError as exc:
            raise type(exc)(f"lambda={lam}: {exc}") from exc
        stages.append(SweepStage(lam, res, table, report))
    return SweepReport(stages)


@dataclass
class GrassmannFactorisation:
    lam: int
    k_list: tuple[int, ...]
    support: list[Point]
    sigma: dict[Point, Fraction]
    s: list[dict[tuple[Point, GrassmannElement], Fraction]]
    traces: list[dict[tuple[GrassmannElement, frozenset], AffinePlane]]  # (direction, trace) -> representative
    c_emp: Fraction | None
    row_sum_violations: list[tuple[int, AffinePlane, Fraction]]
    display_violations: list[tuple[Point, tuple[GrassmannElement, ...]]]
    restriction_mismatches: list[tuple[int, int, Point]]
    base: FactorisationTable
    instance: Instance
    search: SearchResult | None = None

    def value(self, j: int, pt: Point, V: GrassmannElement) -> Fraction:
        return self.s[j].get((pt, V), Fraction(0))

    @property
    def passed(self) -> bool:
        return (self.c_emp is not None and not self.row_sum_violations
                and not self.display_violations and not self.restriction_mismatches)


def all_planes_instance(cfg_like: Configuration, weights: WeightFunction,
                        cap: int = DEFAULT_PLANE_CAP) -> Instance:
    """Every affine k_j-plane of F_p^n in family j."""
    fams = [enumerate_planes(k, cfg_like.n, cfg_like.p, cap) for k in cfg_like.k_list]
    cfg = Configuration(cfg_like.field, cfg_like.n, cfg_like.k_list, fams)
    return Instance(cfg, weights)


def extend_to_grassmannian(
    inst: Instance,
    lam: int,
    alpha: Handicap | None = None,
    mode: str = "finite",
    cap: int = DEFAULT_PLANE_CAP,
    budget: int = 1000,
    executor: Executor | None = None,
    early_stop: bool = True,
) -> GrassmannFactorisation:
    """Extend a plane-indexed factorisation to points x Gr(k_j, F^n).

    ``mode="finite"`` replaces the families by all affine k_j-planes and
    factorises that instance.  ``mode="representatives"`` keeps the given
    families and requires, for every support point p and subspace V, a
    plane in family j whose trace on Supp S equals that of p + V.  Either
    way s(p, V) is read off the representative plane's row, and both
    displays (row sums <= 1 over every affine plane, sigma_p <= C_emp prod
    s(p, V_j) for every spanning V-tuple) are checked exhaustively.
    """
    cfg = inst.cfg
    if mode == "finite":
        inst = all_planes_instance(cfg, inst.weights, cap)
        cfg = inst.cfg
    elif mode != "representatives":
        raise ValueError(f"unknown mode {mode!r}")
    search = None
    if alpha is None:
        search = search_good_handicap(inst, lam, budget=budget, early_stop=early_stop)
        alpha = search.alpha
    table = build_s(alpha, inst, lam, executor)
    support = inst.support
    supset = frozenset(support)
    sigma = inst.weights.sigma

    traces: list[dict] = []
    by_trace: list[dict] = []
    for j, fam in enumerate(cfg.families):
        reps, any_dir = {}, {}
        for i, pl in enumerate(fam):
            tr = frozenset(pt for pt in inst.plane_points[pl] if pt in supset)
            if tr:
                reps.setdefault((pl.direction, tr), i)
                any_dir.setdefault(tr, i)
        traces.append(reps)
        by_trace.append(any_dir)

    s_maps: list[dict] = []
    grass = [enumerate_subspaces(k, cfg.n, cfg.p) for k in cfg.k_list]
    missing = []
    for j, Vs in enumerate(grass):
        sm = {}
        for pt in support:
            for V in Vs:
                tr = frozenset(q for q in support if plane_through(pt, V).contains(q))
                i = traces[j].get((V, tr), by_trace[j].get(tr))
                if i is None:
                    missing.append((j, pt, V, sorted(tr)))
                    continue
                sm[(pt, V)] = table.s(j, i, pt)
        s_maps.append(sm)
    if missing:
        j, pt, V, tr = missing[0]
        raise FactorisationError(
            f"{len(missing)} trace classes have no representative; first: family {j}, "
            f"point {pt}, direction {V.basis}, trace {tr}")

    # first display: sigma_p <= C prod_j s(p, V_j) whenever the V_j span
    c_emp: Fraction | None = Fraction(0)
    ratios = []
    for pt in support:
        for Vt in itertools.product(*grass):
            if not wedge(*Vt):
                continue
            den = prod(s_maps[j][(pt, V)] for j, V in enumerate(Vt))
            ratios.append((pt, Vt, None if den == 0 else sigma[pt] / den))
    if any(r is None for _, _, r in ratios):
        c_emp = None
    elif ratios:
        c_emp = max(r for _, _, r in ratios)
    display_viol = [(pt, Vt) for pt, Vt, r in ratios if r is None or (c_emp is not None and r > c_emp)]

    # second display over every affine k_j-plane
    row_viol = []
    for j, k in enumerate(cfg.k_list):
        for pl in enumerate_planes(k, cfg.n, cfg.p, cap):
            tot = sum((s_maps[j].get((pt, pl.direction), Fraction(0)) for pt in support if pl.contains(pt)),
                      Fraction(0))
            meets = any(pl.contains(pt) for pt in support)
            if tot > 1 or (meets and tot != 1):
                row_viol.append((j, pl, tot))

    # restriction to the instance's own families reproduces the table
    mism = []
    for j, fam in enumerate(cfg.families):
        for i, pl in enumerate(fam):
            for pt in inst.plane_points[pl]:
                if pt in supset and s_maps[j][(pt, pl.direction)] != table.s(j, i, pt):
                    mism.append((j, i, pt))
    trace_reps = [{key: cfg.families[j][i] for key, i in traces[j].items()} for j in range(cfg.d)]
    return GrassmannFactorisation(lam, cfg.k_list, list(support), dict(sigma), s_maps, trace_reps,
                                  c_emp, row_viol, display_viol, mism, table, inst, search)


@dataclass
class HolderChain:
    lhs: float  # sum_p S(p) T[f](p)^(1/d)
    middle: float  # C^(1/d) sum_p prod_j T_j[f_j](p)^(1/d)
    bound: float  # C^(1/d) prod_j ||T_j f_j||_1^(1/d)
    rhs: float  # C^(1/d) prod_j ||f_j||_1^(1/d)
    link_pointwise: bool  # sigma_p T(p) <= C prod_j T_j(p), exact
    link_holder: bool  # sum_p prod_j T_j^(1/d) <= prod_j ||T_j||^(1/d), relative tol
    link_norms: bool  # ||T_j f_j||_1 <= ||f_j||_1, exact
    pointwise_values: list[tuple[Point, Fraction, Fraction]] = field(default_factory=list)
    norms: list[tuple[Fraction, Fraction]] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return self.link_pointwise and self.link_holder and self.link_norms and self.lhs <= self.rhs * (1 + 1e-9)


def verify_multijoint_inequality(inst: Instance, table: FactorisationTable, c_emp: Fraction,
                                 f: Sequence[Sequence[Fraction | int]], rtol: float = 1e-9) -> HolderChain:
    """Check the operator chain behind the multijoint inequality link by link.

    ``f[j][i]`` is the weight of plane i in family j.
    """
    cfg = inst.cfg
    d = cfg.d
    if c_emp is None:
        raise FactorisationError("C_emp is infinite; the factorisation has a zero factor")
    fj = [[Fraction(x) for x in fam] for fam in f]
    if any(len(a) != len(b) for a, b in zip(fj, cfg.families)) or len(fj) != d:
        raise ValueError("one weight per plane of each family is required")
    if any(x < 0 for fam in fj for x in fam):
        raise ValueError("plane weights must be non-negative")
    J = inst.J
    # T_j[f_j](p) = sum_i s(p, pi_i) f_j(pi_i)
    Tj = {pt: [sum((table.s(j, i, pt) * fj[j][i] for i in range(len(fj[j]))), Fraction(0)) for j in range(d)]
          for pt in J.points}
    T = {pt: sum((prod(fj[j][i] for j, i in enumerate(tup)) for tup in J.witnesses[pt]), Fraction(0))
         for pt in J.points}
    pointwise, ok1 = [], True
    for pt in J.points:
        lhs = inst.weights[pt] * T[pt]
        rhs = c_emp * prod(Tj[pt])
        pointwise.append((pt, lhs, rhs))
        ok1 &= lhs <= rhs
    normsT = [sum((Tj[pt][j] for pt in J.points), Fraction(0)) for j in range(d)]
    normsf = [sum(fam, Fraction(0)) for fam in fj]
    ok3 = all(a <= b for a, b in zip(normsT, normsf))
    root = 1.0 / d
    mid_sum = math.fsum(math.prod(float(x) ** root for x in Tj[pt]) for pt in J.points)
    holder_rhs = math.prod(float(x) ** root for x in normsT)
    ok2 = mid_sum <= holder_rhs * (1 + rtol) + 1e-300
    C = float(c_emp) ** root
    lhs = math.fsum(float(inst.weights[pt]) ** root * float(T[pt]) ** root for pt in J.points)
    return HolderChain(
        lhs=lhs, middle=C * mid_sum, bound=C * holder_rhs,
        rhs=C * math.prod(float(x) ** root for x in normsf),
        link_pointwise=ok1, link_holder=ok2, link_norms=ok3,
        pointwise_values=pointwise, norms=list(zip(normsT, normsf)),
    )
