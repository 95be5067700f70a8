"""Per-point weights w_p(alpha) and the search for a good handicap.

All weight arithmetic is exact (:class:`fractions.Fraction`).  Profiles are
compared through their descending normalised values, lexicographically.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction
from math import comb, prod
from typing import Mapping, Sequence

from .geometry import AffinePlane, Configuration, MultijointSet, Point, connected_components, detect_multijoints
from .tableau import Handicap, TableauCache


class SearchError(ValueError):
    pass


@dataclass
class WeightFunction:
    """sigma_p = S(p)^d, normalised to sum to 1."""

    sigma: dict[Point, Fraction]

    def __post_init__(self):
        sigma = {pt: Fraction(v) for pt, v in self.sigma.items()}
        if any(v < 0 for v in sigma.values()):
            raise ValueError("weights must be non-negative")
        total = sum(sigma.values())
        if sigma and total <= 0:
            raise ValueError("weights must have positive total")
        self.sigma = {pt: v / total for pt, v in sorted(sigma.items())}

    @classmethod
    def uniform(cls, points: Sequence[Point]) -> "WeightFunction":
        return cls({pt: Fraction(1) for pt in points})

    @property
    def support(self) -> list[Point]:
        return [pt for pt, v in self.sigma.items() if v > 0]

    def __getitem__(self, pt: Point) -> Fraction:
        return self.sigma.get(pt, Fraction(0))


class Instance:
    """A configuration with its multijoints, weights and a shared tableau cache."""

    def __init__(self, cfg: Configuration, weights: WeightFunction | None = None,
                 J: MultijointSet | None = None, cache: TableauCache | None = None):
        self.cfg = cfg
        self.J = detect_multijoints(cfg) if J is None else J
        self.weights = WeightFunction.uniform(self.J.points) if weights is None else weights
        self.cache = cache or TableauCache()
        extra = [pt for pt in self.weights.support if pt not in self.J]
        if extra:
            raise SearchError(f"weight support contains non-multijoints: {extra}")
        on = {}
        for fam in cfg.families:
            for pl in fam:
                if pl not in on:
                    on[pl] = [pt for pt in self.J.points if pl.contains(pt)]
        self.plane_points: dict[AffinePlane, list[Point]] = on
        support = set(self.support)
        self.meets_support = {pl: any(pt in support for pt in pts) for pl, pts in on.items()}

    @property
    def support(self) -> list[Point]:
        return self.weights.support

    def plane(self, j: int, i: int) -> AffinePlane:
        return self.cfg.families[j][i]

    def tuple_planes(self, tup: Sequence[int]) -> list[AffinePlane]:
        return [self.cfg.families[j][i] for j, i in enumerate(tup)]

    def counts(self, plane: AffinePlane, alpha: Handicap, lam: int) -> dict[Point, int]:
        return self.cache.counts(plane, self.plane_points[plane], alpha, lam)

    def tableau(self, plane: AffinePlane, alpha: Handicap, lam: int):
        return self.cache.get(plane, self.plane_points[plane], alpha, lam)

    def normaliser(self, lam: int) -> int:
        return prod(comb(lam + k, k) for k in self.cfg.k_list)


@dataclass
class WeightProfile:
    raw: dict[Point, Fraction]
    normalised: dict[Point, Fraction]
    order: list[Point]  # descending normalised w, ties by point order
    argmin: dict[Point, tuple[int, ...]]  # a w-minimising witness tuple per point
    off_support_violations: list[tuple[Point, AffinePlane]] = field(default_factory=list)

    @property
    def sorted(self) -> list[Fraction]:
        return [self.normalised[pt] for pt in self.order]

    @property
    def in_A(self) -> bool:
        return not self.off_support_violations

    def gap(self, support: Sequence[Point]) -> Fraction:
        vals = [self.normalised[pt] for pt in support]
        return max(vals) - min(vals) if vals else Fraction(0)


def compute_w(alpha: Handicap, inst: Instance, lam: int) -> WeightProfile:
    """w_p(alpha) = min over witness tuples of prod_j S~(p, pi_j) / sigma_p.

    Off-support points get w = 0; any off-support point that still receives
    vanishing conditions on a plane meeting the support is reported in
    ``off_support_violations`` (alpha is then outside A).
    """
    J, sigma = inst.J, inst.weights
    norm = inst.normaliser(lam)
    raw, argmin, violations = {}, {}, []
    for pt in J.points:
        best, best_tup = None, None
        for tup in J.witnesses[pt]:
            val = prod(inst.counts(pl, alpha, lam)[pt] for pl in inst.tuple_planes(tup))
            if best is None or val < best:
                best, best_tup = val, tup
        if best_tup is None:
            raise SearchError(f"multijoint {pt} has no witness tuple")
        argmin[pt] = best_tup
        s = sigma[pt]
        if s > 0:
            raw[pt] = Fraction(best) / s
        else:
            raw[pt] = Fraction(0)
            for j, i in sorted(J.contributing(pt)):
                pl = inst.plane(j, i)
                if inst.meets_support[pl] and inst.counts(pl, alpha, lam)[pt]:
                    violations.append((pt, pl))
    normalised = {pt: v / norm for pt, v in raw.items()}
    order = sorted(J.points, key=lambda pt: (-normalised[pt], pt))
    return WeightProfile(raw, normalised, order, argmin, violations)


def perturbation_step(alpha: Handicap, t: int, profile: WeightProfile, support: Sequence[Point], c: int = 1) -> dict[Point, int]:
    """alpha - c v: lower the top-t support points (current w order) and every off-support point by c."""
    sup = set(support)
    ranked = [pt for pt in profile.order if pt in sup]
    if not 1 <= t <= len(ranked):
        raise ValueError(f"t={t} outside 1..{len(ranked)}")
    return lower_subset(alpha, ranked[:t], support, c)


def lower_subset(alpha: Handicap, lowered: Sequence[Point], support: Sequence[Point], c: int = 1) -> dict[Point, int]:
    """Lower the given support points and every off-support point by c."""
    sup = set(support)
    low = set(lowered)
    return {pt: a - c if (pt in low or pt not in sup) else a for pt, a in alpha.items()}


def continuity_radius(weights: WeightFunction, J_size: int, k_list: Sequence[int], lam: int) -> Fraction:
    """An explicit h with |w_i(alpha) - w_i(alpha - v)| <= h/(2 lam) for the normalised profile."""
    sup = weights.support
    if not sup:
        raise SearchError("empty support")
    if lam < 1:
        raise ValueError("lam must be positive")
    d = len(k_list)
    full = [comb(lam + k, k) for k in k_list]
    slope = [comb(lam + k - 1, k - 1) * J_size for k in k_list]
    total = 0
    for mask in range(1, 2 ** d):
        total += prod(slope[j] if mask >> j & 1 else full[j] for j in range(d))
    inv_sigma = max(1 / weights[pt] for pt in sup)
    return 2 * lam * inv_sigma * Fraction(total, prod(full))


def initial_handicap(inst: Instance, lam: int, margin: int | None = None) -> dict[Point, int]:
    """0 on the support; off-support points pushed far enough down to receive nothing."""
    sup = set(inst.support)
    if margin is None:
        margin = (lam + 1) * (1 + len(sup))
    return {pt: 0 if pt in sup else -margin for pt in inst.J.points}


@dataclass
class Move:
    t: int | None  # prefix length, or None for a general subset move
    c: int
    forced: bool  # prefix move at the least gap index with gap > h/lam
    lowered: frozenset
    top_after: frozenset  # the len(lowered) largest support points afterwards
    sorted_before: list[Fraction]
    sorted_after: list[Fraction]


@dataclass
class SearchResult:
    alpha: dict[Point, int]
    profile: WeightProfile
    gap: Fraction
    h: Fraction
    target: Fraction  # |J| h / lam
    support_target: Fraction  # |Supp S| h / lam
    status: str  # "ok", "budget" or "stuck"
    iterations: int
    moves: list[Move]

    @property
    def within_target(self) -> bool:
        return self.gap <= self.target


def _escalation(lam: int, mode: str) -> list[int]:
    top = lam + 1
    if mode == "linear":
        return list(range(1, top + 1))
    cs, c = [], 1
    while c < top:
        cs.append(c)
        c *= 2
    cs.append(top)
    return cs


def _neighbourhood(ranked: list[Point], ts: list[int], subset_moves: bool):
    seen = set()
    for t in ts:
        seen.add(frozenset(ranked[:t]))
        yield ranked[:t], t
    if not subset_moves:
        return
    N = len(ranked)
    if N <= 8:
        cands = [list(s) for r in range(1, N) for s in itertools.combinations(ranked, r)]
    else:
        cands = [[pt] for pt in ranked] + [[q for q in ranked if q != pt] for pt in ranked]
    for sub in cands:
        key = frozenset(sub)
        if key not in seen:
            seen.add(key)
            yield sub, None


def _compound_moves(ranked: list[Point], lam: int, cap: int):
    """Lowering vectors delta in {0..C}^N with min 0, as (point -> amount) maps.

    Any such delta is a composition of nested subset moves.  C is the
    largest value <= lam + 1 with (C + 1)^N <= cap; vectors come smallest
    total first, then lexicographically.
    """
    N = len(ranked)
    C = 0
    while C < lam + 1 and (C + 2) ** N <= cap:
        C += 1
    if C == 0:
        return []
    deltas = [d for d in itertools.product(range(C + 1), repeat=N) if min(d) == 0 and max(d) > 0]
    deltas.sort(key=lambda d: (sum(d), d))
    return [dict(zip(ranked, d)) for d in deltas]


def search_good_handicap(
    inst: Instance,
    lam: int,
    budget: int = 1000,
    alpha0: Mapping[Point, int] | None = None,
    early_stop: bool = True,
    escalation: str = "geometric",
    subset_moves: bool = True,
    compound_cap: int = 4096,
) -> SearchResult:
    """Lexicographic descent on the sorted weight profile using perturbation moves.

    Each move lowers the handicap of the t largest-weight support points
    (and of every off-support point) by c.  Moves at the least index t
    whose consecutive gap exceeds h/lam are tried first, then every other t;
    for each t the repetition count c runs through ``escalation``.  When no
    prefix move helps and ``subset_moves`` is set, lowering other subsets
    of the support is tried (all proper subsets when the support has at
    most 8 points, otherwise single points and their complements), and
    after that compound moves lowering support points by different amounts
    (see ``_compound_moves``; at most ``compound_cap`` of them).  The
    first move giving a strictly smaller sorted profile is taken.  The loop
    ends as soon as the gap is within |J| h / lam ("ok"), or with
    ``early_stop=False`` only at a local minimum of the sorted profile
    ("ok"), or after ``budget`` moves ("budget").  Full descent is what the
    exhaustive oracle is compared against; at small lam its optimum may
    starve some support points, which early stopping avoids.
    """
    sup = inst.support
    if not sup:
        raise SearchError("empty support")
    comps = connected_components(inst.J, sup)
    if len(comps) != 1:
        raise SearchError(f"support is disconnected ({len(comps)} components)")
    h = continuity_radius(inst.weights, len(inst.J), inst.cfg.k_list, lam)
    target = len(inst.J) * h / lam
    alpha = dict(initial_handicap(inst, lam) if alpha0 is None else alpha0)
    profile = compute_w(alpha, inst, lam)
    if not profile.in_A:
        raise SearchError("starting handicap is outside A (off-support points receive conditions)")
    cs = _escalation(lam, escalation)
    N = len(sup)
    moves: list[Move] = []
    status = "ok"
    supset = set(sup)
    while True:
        if early_stop and profile.gap(sup) <= target:
            break
        if len(moves) >= budget:
            status = "budget"
            break
        ranked_pts = [pt for pt in profile.order if pt in supset]
        ranked = [profile.normalised[pt] for pt in ranked_pts]
        forced = [t for t in range(1, N) if ranked[t - 1] - ranked[t] > h / lam]
        ts = forced[:1] + [t for t in range(1, N) if t not in forced[:1]]
        current = profile.sorted
        taken = None
        for subset, t in _neighbourhood(ranked_pts, ts, subset_moves):
            for c in cs:
                cand = lower_subset(alpha, subset, sup, c)
                prof = compute_w(cand, inst, lam)
                if prof.sorted < current:
                    taken = (t, c, cand, prof, subset)
                    break
            if taken:
                break
        if taken is None and subset_moves:
            for delta in _compound_moves(ranked_pts, lam, compound_cap):
                cand = {pt: a - (delta[pt] if pt in supset else max(delta.values()))
                        for pt, a in alpha.items()}
                prof = compute_w(cand, inst, lam)
                if prof.sorted < current:
                    lowered = [pt for pt in ranked_pts if delta[pt]]
                    taken = (None, max(delta.values()), cand, prof, lowered)
                    break
        if taken is None:
            break
        t, c, cand, prof, subset = taken
        top_a = frozenset([pt for pt in prof.order if pt in supset][:len(subset)])
        moves.append(Move(t, c, bool(forced) and t == forced[0], frozenset(subset), top_a, current, prof.sorted))
        alpha, profile = cand, prof
    return SearchResult(alpha, profile, profile.gap(sup), h, target, N * h / lam, status, len(moves), moves)


def brute_force_handicap_oracle(inst: Instance, lam: int, box: int, max_evals: int = 10**6):
    """Exhaustive lexicographic minimiser of the sorted profile over a handicap box.

    The first support point is pinned to 0, the others range over
    [-box, box]; off-support points sit below every support value by more
    than lam.  Ties keep the first minimiser in enumeration order.
    """
    sup = inst.support
    if not sup:
        raise SearchError("empty support")
    if len(sup) > 4 or (2 * box + 1) ** (len(sup) - 1) > max_evals:
        raise SearchError(f"oracle guard: |Supp S|={len(sup)}, box={box} is too large")
    low = -(box + lam + 1)
    base = {pt: low for pt in inst.J.points}
    best = None
    for vals in itertools.product(range(-box, box + 1), repeat=len(sup) - 1):
        alpha = dict(base)
        alpha[sup[0]] = 0
        alpha.update(zip(sup[1:], vals))
        prof = compute_w(alpha, inst, lam)
        if best is None or prof.sorted < best[1].sorted:
            best = (alpha, prof)
    return best
