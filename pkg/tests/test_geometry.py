import itertools
import random

import pytest
import sympy
from hypothesis import given, strategies as st

from multijoint.configs import axis_grid, disjoint_joints, single_joint, unit
from multijoint.geometry import (
    Configuration,
    GeometryError,
    GrassmannElement,
    canonicalize_plane,
    connected_components,
    count_affine_planes,
    delta_kernel,
    detect_multijoints,
    enumerate_planes,
    enumerate_subspaces,
    wedge,
)
from oracles import rank_gf


def span(vs, p):
    return GrassmannElement.span(vs, p)


def test_canonical_examples():
    a = canonicalize_plane((1, 0), [(0, 1)], 3)
    assert a.base == (1, 0) and a.direction.basis == ((0, 1),)
    assert canonicalize_plane((1, 1), [(0, 2)], 3) == a


def test_canonicalize_rejects_dependent_directions():
    with pytest.raises(GeometryError):
        canonicalize_plane((0, 0, 0), [(1, 2, 0), (2, 4, 0)], 5)


def _random_plane_two_ways(rnd, p, n, k):
    while True:
        dirs = [[rnd.randrange(p) for _ in range(n)] for _ in range(k)]
        if rank_gf(dirs, p, n) == k:
            break
    base = [rnd.randrange(p) for _ in range(n)]
    # another basis (invertible combination) and another base point on the plane
    while True:
        M = [[rnd.randrange(p) for _ in range(k)] for _ in range(k)]
        if rank_gf(M, p, k) == k:
            break
    dirs2 = [[sum(M[i][a] * dirs[a][c] for a in range(k)) % p for c in range(n)] for i in range(k)]
    shift = [rnd.randrange(p) for _ in range(k)]
    base2 = [(base[c] + sum(s * dirs[a][c] for a, s in enumerate(shift))) % p for c in range(n)]
    return (base, dirs), (base2, dirs2)


@given(st.sampled_from([2, 3, 5]), st.integers(2, 4), st.data())
def test_canonical_form_is_set_invariant(p, n, data):
    k = data.draw(st.integers(1, n))
    rnd = random.Random(data.draw(st.integers(0, 10**6)))
    (b1, d1), (b2, d2) = _random_plane_two_ways(rnd, p, n, k)
    A, B = canonicalize_plane(b1, d1, p), canonicalize_plane(b2, d2, p)
    assert A == B
    # oracle: compare point sets by enumeration from the raw description
    raw = {tuple((b1[c] + sum(t[a] * d1[a][c] for a in range(k))) % p for c in range(n))
           for t in itertools.product(range(p), repeat=k)}
    assert set(A.points()) == raw
    assert A.base == min(raw) and A.contains(A.base)
    assert canonicalize_plane(A.base, A.direction.basis, p) == A


def test_wedge_examples():
    e = [unit(4, i) for i in range(4)]
    assert wedge(span([e[0], e[1]], 5), span([e[2], e[3]], 5)) == 1
    assert wedge(span([e[0], e[1]], 5), span([e[1], e[2]], 5)) == 0
    with pytest.raises(GeometryError):
        wedge(span([e[0]], 5), span([e[1]], 5))


@given(st.data())
def test_wedge_matches_determinant(data):
    p, n = 3, 4
    k1 = data.draw(st.integers(1, 3))
    vecs = st.lists(st.integers(0, p - 1), min_size=n, max_size=n)
    rows = data.draw(st.lists(vecs, min_size=n, max_size=n))
    if rank_gf(rows[:k1], p, n) < k1 or rank_gf(rows[k1:], p, n) < n - k1:
        return
    det = int(sympy.Matrix(rows).det(method="berkowitz")) % p
    assert wedge(span(rows[:k1], p), span(rows[k1:], p)) == int(det != 0)
    # basis invariance: replace the first block by a sheared basis
    sheared = [rows[0]] + [[(a + b) % p for a, b in zip(r, rows[0])] for r in rows[1:k1]]
    assert wedge(span(sheared, p), span(rows[k1:], p)) == int(det != 0)


def test_delta_examples():
    axes = [canonicalize_plane((0, 0, 0), [unit(3, i)], 3) for i in range(3)]
    assert delta_kernel((0, 0, 0), axes) == 1
    assert delta_kernel((1, 0, 0), axes) == 0
    degenerate = [axes[0], axes[0], axes[2]]
    assert delta_kernel((0, 0, 0), degenerate) == 0


@given(st.permutations([0, 1, 2]), st.integers(0, 10**6))
def test_delta_symmetric_under_family_permutation(perm, seed):
    rnd = random.Random(seed)
    planes = [canonicalize_plane([rnd.randrange(3) for _ in range(3)],
                                 [[rnd.randrange(3) for _ in range(3)] or [1, 0, 0]], 3)
              if False else enumerate_planes(1, 3, 3)[rnd.randrange(13 * 9)] for _ in range(3)]
    pt = tuple(rnd.randrange(3) for _ in range(3))
    assert delta_kernel(pt, planes) == delta_kernel(pt, [planes[i] for i in perm])


def test_detect_examples():
    J = detect_multijoints(single_joint(3, 3))
    assert J.points == [(0, 0, 0)] and J.witnesses[(0, 0, 0)] == [(0, 0, 0)]
    grid = detect_multijoints(axis_grid(3, 3))
    assert len(grid) == 27
    p = 5
    fams = [[canonicalize_plane((0, 0), [(1, 0)], p), canonicalize_plane((0, 2), [(1, 0)], p)],
            [canonicalize_plane((3, 0), [(1, 1)], p)]]
    J2 = detect_multijoints(Configuration(p, 2, (1, 1), fams))
    assert J2.points == [(0, 2), (3, 0)]


def test_detect_against_exhaustive_delta():
    cfg = axis_grid(3, 3)
    J = detect_multijoints(cfg)
    for pt in itertools.product(range(3), repeat=3):
        tups = [t for t in itertools.product(*(range(len(f)) for f in cfg.families))
                if delta_kernel(pt, [cfg.families[j][i] for j, i in enumerate(t)])]
        assert J.witnesses.get(pt, []) == tups
        for t in tups:
            assert all(cfg.families[j][i].contains(pt) for j, i in enumerate(t))


def test_configuration_validation():
    ax = canonicalize_plane((0, 0, 0), [unit(3, 0)], 3)
    with pytest.raises(GeometryError):
        Configuration(3, 3, (1, 1), [[ax], [ax]])
    with pytest.raises(GeometryError):
        Configuration(3, 3, (3,), [[ax]])
    with pytest.raises(GeometryError):
        Configuration(3, 3, (2, 1), [[ax], [ax]])


@pytest.mark.parametrize("p", [2, 3])
@pytest.mark.parametrize("n", [1, 2, 3, 4])
def test_plane_counts(p, n):
    for k in range(1, n + 1):
        planes = enumerate_planes(k, n, p)
        assert len(planes) == len(set(planes)) == count_affine_planes(n, k, p)
        assert len(enumerate_subspaces(k, n, p)) == count_affine_planes(n, k, p) // p ** (n - k)


@pytest.mark.parametrize("n", [1, 2, 3])
def test_plane_counts_brute_force_p2(n):
    pts = list(itertools.product(range(2), repeat=n))
    for k in range(1, n + 1):
        sets = set()
        for base in pts:
            for dirs in itertools.combinations([v for v in pts if any(v)], k):
                if rank_gf(dirs, 2, n) == k:
                    sets.add(frozenset(tuple((b + sum(t[a] * dirs[a][c] for a in range(k))) % 2
                                             for c, b in enumerate(base))
                                       for t in itertools.product(range(2), repeat=k)))
        assert len(sets) == len(enumerate_planes(k, n, 2))


def test_plane_count_examples_and_cap():
    assert len(enumerate_planes(1, 2, 2)) == 6
    assert len(enumerate_planes(1, 2, 3)) == 12
    assert len(enumerate_planes(3, 3, 5)) == 1
    with pytest.raises(GeometryError):
        enumerate_planes(1, 3, 5, cap=10)


def test_components():
    assert connected_components(detect_multijoints(single_joint())) == [[(0, 0, 0)]]
    J = detect_multijoints(axis_grid(3, 3))
    assert len(connected_components(J)) == 1
    assert len(connected_components(detect_multijoints(disjoint_joints()))) == 2


def test_components_match_bfs_oracle():
    J = detect_multijoints(axis_grid(3, 3))
    adj = {a: {b for b in J.points if J.contributing(a) & J.contributing(b)} for a in J.points}
    seen, comps = set(), []
    for s in J.points:
        if s in seen:
            continue
        comp, todo = set(), [s]
        while todo:
            x = todo.pop()
            if x not in comp:
                comp.add(x)
                todo += adj[x] - comp
        seen |= comp
        comps.append(sorted(comp))
    assert sorted(comps) == connected_components(J)
