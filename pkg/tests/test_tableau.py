import itertools
import random
from math import comb

import pytest
from hypothesis import given, strategies as st

from multijoint.geometry import GeometryError, canonicalize_plane, enumerate_planes
from multijoint.poly_dual import PlaneChart
from multijoint.tableau import TableauCache, build_tableau, priority_compare, priority_key
from oracles import tableau_counts

LINE = canonicalize_plane((0, 0), [(1, 0)], 5)
P1, P2 = (0, 0), (1, 0)


def counts(plane, pts, alpha, lam, **kw):
    return build_tableau(plane, pts, alpha, lam, **kw).counts


def test_priority_examples():
    a0 = {P1: 0, P2: 0}
    assert priority_compare((P1, 0), (P2, 0), a0) == -1
    assert priority_compare((P1, 1), (P2, 0), {P1: 1, P2: 0}) == -1
    assert priority_compare((P2, 0), (P1, 1), {P1: 1, P2: 0}) == 1
    a5 = {P1: 5, P2: 0}
    assert all(priority_compare((P1, 0), (P2, r), a5) == -1 for r in range(5))
    assert priority_compare((P1, 3), (P1, 3), a0) == 0
    with pytest.raises(KeyError):
        priority_key((4, 4), 0, a0)


@given(st.lists(st.tuples(st.integers(0, 4), st.integers(0, 4)), min_size=1, max_size=4, unique=True),
       st.integers(0, 3), st.data())
def test_priority_is_total_order(pts, rmax, data):
    alpha = {pt: data.draw(st.integers(-3, 3)) for pt in pts}
    pairs = [(pt, r) for pt in pts for r in range(rmax + 1)]
    for a, b in itertools.combinations(pairs, 2):
        c = priority_compare(a, b, alpha)
        assert c != 0 and c == -priority_compare(b, a, alpha)


def test_single_point_line():
    for alpha in (-3, 0, 7):
        assert counts(LINE, [P1], {P1: alpha}, 4) == {P1: 5}


def test_two_point_line_examples():
    assert counts(LINE, [P1, P2], {P1: 0, P2: 0}, 4) == {P1: 3, P2: 2}
    assert counts(LINE, [P1, P2], {P1: 0, P2: 1}, 4) == {P1: 2, P2: 3}
    for alpha in ({P1: 0, P2: 0}, {P1: 0, P2: 1}):
        assert counts(LINE, [P1, P2], alpha, 4) == tableau_counts([P1, P2], {P1: (0,), P2: (1,)}, alpha, 4, 1, 5)


def test_f3_plane_collinear_skip():
    plane = canonicalize_plane((0, 0), [(1, 0), (0, 1)], 3)
    pts = plane.points()
    c = counts(plane, pts, {pt: 0 for pt in pts}, 1)
    assert [c[pt] for pt in pts] == [1, 1, 0, 1, 0, 0, 0, 0, 0]
    assert c == tableau_counts(pts, {pt: plane.coordinates_of(pt) for pt in pts}, {pt: 0 for pt in pts}, 1, 2, 3)


def test_off_plane_point_rejected():
    with pytest.raises(GeometryError):
        build_tableau(LINE, [(0, 1)], {(0, 1): 0}, 2)


def test_empty_point_set():
    assert counts(LINE, [], {}, 3) == {}


def random_instance(draw_seed, max_lam=6):
    rnd = random.Random(draw_seed)
    p = rnd.choice([2, 3, 5])
    n = rnd.randint(1, 3)
    k = rnd.randint(1, min(2, n))
    plane = rnd.choice(enumerate_planes(k, n, p))
    pts = rnd.sample(plane.points(), rnd.randint(1, min(4, p ** k)))
    lam = rnd.randint(0, max_lam)
    alpha = {pt: rnd.randint(-lam - 2, lam + 2) for pt in pts}
    return rnd, p, plane, sorted(pts), lam, alpha


@given(st.integers(0, 10**9))
def test_sum_identity_and_oracle(seed):
    rnd, p, plane, pts, lam, alpha = random_instance(seed, max_lam=4)
    tab = build_tableau(plane, pts, alpha, lam)
    assert sum(tab.counts.values()) == comb(lam + plane.k, plane.k) == tab.basis.rank
    assert all(v >= 0 for v in tab.counts.values())
    coords = {pt: plane.coordinates_of(pt) for pt in pts}
    assert tab.counts == tableau_counts(pts, coords, alpha, lam, plane.k, p)


@given(st.integers(0, 10**9), st.integers(-20, 20))
def test_translation_invariance(seed, c):
    _, _, plane, pts, lam, alpha = random_instance(seed)
    shifted = {pt: a + c for pt, a in alpha.items()}
    assert counts(plane, pts, alpha, lam) == counts(plane, pts, shifted, lam)


@given(st.integers(0, 10**9))
def test_choice_and_chart_independence(seed):
    rnd, p, plane, pts, lam, alpha = random_instance(seed)
    base = counts(plane, pts, alpha, lam)
    assert counts(plane, pts, alpha, lam, rng=random.Random(seed)) == base
    if plane.k == 2:
        u, v = plane.direction.basis
        a = rnd.randrange(1, p)
        chart = PlaneChart(plane, directions=[[(x + a * y) % p for x, y in zip(u, v)], v],
                           origin=rnd.choice(plane.points()))
    else:
        a = rnd.randrange(1, p)
        chart = PlaneChart(plane, directions=[[(a * x) % p for x in plane.direction.basis[0]]],
                           origin=rnd.choice(plane.points()))
    assert counts(plane, pts, alpha, lam, chart=chart) == base


def test_trace_dependence():
    # parallel lines in F_5^2 carrying points with the same intrinsic coordinates
    a = canonicalize_plane((0, 0), [(1, 0)], 5)
    b = canonicalize_plane((0, 3), [(1, 0)], 5)
    pa, pb = [(0, 0), (2, 0), (4, 0)], [(0, 3), (2, 3), (4, 3)]
    for lam in range(6):
        for vals in itertools.product(range(-2, 3), repeat=3):
            ca = counts(a, pa, dict(zip(pa, vals)), lam)
            cb = counts(b, pb, dict(zip(pb, vals)), lam)
            assert [ca[x] for x in pa] == [cb[x] for x in pb]


@given(st.integers(0, 10**9))
def test_uniform_boundedness(seed):
    rnd, p, plane, pts, lam, alpha = random_instance(seed)
    if len(pts) < 2:
        return
    q = rnd.choice(pts)
    target = rnd.choice([x for x in pts if x != q])
    alpha = dict(alpha)
    alpha[target] = alpha[q] - lam - 1 - rnd.randint(0, 3)
    assert counts(plane, pts, alpha, lam)[target] == 0


@given(st.integers(0, 10**9))
def test_monotonicity(seed):
    rnd, p, plane, pts, lam, a1 = random_instance(seed)
    x = rnd.choice(pts)
    # a2 - a1 is maximal at x: raising x relative to every other point
    a2 = {pt: a1[pt] - (0 if pt == x else rnd.randint(0, 3)) + 5 for pt in pts}
    assert all(a1[x] - a1[q] <= a2[x] - a2[q] for q in pts)
    assert counts(plane, pts, a1, lam)[x] <= counts(plane, pts, a2, lam)[x]


@given(st.integers(0, 10**9))
def test_continuity(seed):
    rnd, p, plane, pts, lam, a1 = random_instance(seed)
    a2 = {pt: a + rnd.randint(-2, 2) for pt, a in a1.items()}
    c1, c2 = counts(plane, pts, a1, lam), counts(plane, pts, a2, lam)
    slope = comb(lam + plane.k - 1, plane.k - 1)
    for x in pts:
        dist = sum(abs((a1[x] - a1[q]) - (a2[x] - a2[q])) for q in pts)
        assert abs(c1[x] - c2[x]) <= slope * dist


def test_cache_uses_relative_handicap():
    cache = TableauCache()
    c1 = cache.counts(LINE, [P1, P2], {P1: 0, P2: 1}, 4)
    c2 = cache.counts(LINE, [P1, P2], {P1: 10, P2: 11}, 4)
    assert c1 == c2 and cache.hits == 1 and cache.misses == 1
