"""Points, affine k-planes, the discrete wedge product and multijoints over F_p^n.

Points are tuples of canonical representatives in [0, p).  Planes are
stored in a canonical form (reduced row-echelon direction basis, base
point with zero pivot coordinates) so that set-equal planes compare equal.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from math import prod
from typing import Iterable, Sequence

from .finite_field import PrimeField
from .linalg import MatrixFp, rank_mod_p, rref_rank

Point = tuple[int, ...]

DEFAULT_PLANE_CAP = 10**6


class GeometryError(ValueError):
    pass


@dataclass(frozen=True, order=True)
class GrassmannElement:
    """A k-dimensional linear subspace of F_p^n in canonical RREF form."""

    p: int
    n: int
    basis: tuple[tuple[int, ...], ...]

    @classmethod
    def span(cls, vectors: Sequence[Sequence[int]], p: int, n: int | None = None) -> "GrassmannElement":
        if n is None:
            if not vectors:
                raise GeometryError("ambient dimension needed for an empty spanning set")
            n = len(vectors[0])
        ech, r = rref_rank(MatrixFp([list(v) for v in vectors], p, n))
        if r != len(vectors):
            raise GeometryError("spanning directions are linearly dependent")
        return cls(p, n, tuple(tuple(row) for row in ech.rows))

    @property
    def k(self) -> int:
        return len(self.basis)

    @property
    def pivots(self) -> tuple[int, ...]:
        return tuple(next(i for i, x in enumerate(row) if x) for row in self.basis)

    def contains_vector(self, v: Sequence[int]) -> bool:
        rows = [list(b) for b in self.basis] + [list(v)]
        return rank_mod_p(rows, self.p, self.n) == self.k


@dataclass(frozen=True, order=True)
class AffinePlane:
    """An affine plane ``base + direction``; ``base`` has zero pivot coordinates."""

    base: Point
    direction: GrassmannElement

    @property
    def k(self) -> int:
        return self.direction.k

    @property
    def p(self) -> int:
        return self.direction.p

    @property
    def n(self) -> int:
        return self.direction.n

    def point_at(self, t: Sequence[int]) -> Point:
        p = self.p
        x = list(self.base)
        for ti, u in zip(t, self.direction.basis):
            if ti:
                x = [(a + ti * b) % p for a, b in zip(x, u)]
        return tuple(x)

    def coordinates_of(self, point: Sequence[int]) -> tuple[int, ...]:
        """Intrinsic coordinates t with ``point_at(t) == point``; raises if off the plane."""
        p = self.p
        t = tuple(int(point[c]) % p for c in self.direction.pivots)
        if self.point_at(t) != tuple(int(x) % p for x in point):
            raise GeometryError(f"point {tuple(point)} is not on plane {self}")
        return t

    def contains(self, point: Sequence[int]) -> bool:
        p = self.p
        t = tuple(int(point[c]) % p for c in self.direction.pivots)
        return self.point_at(t) == tuple(int(x) % p for x in point)

    def points(self) -> list[Point]:
        return sorted(self.point_at(t) for t in itertools.product(range(self.p), repeat=self.k))

    def __str__(self):
        dirs = ";".join(",".join(map(str, u)) for u in self.direction.basis)
        return f"{','.join(map(str, self.base))}+<{dirs}>"


def canonicalize_plane(base: Sequence[int], directions: Sequence[Sequence[int]], p: int) -> AffinePlane:
    n = len(base)
    if any(len(u) != n for u in directions):
        raise GeometryError("direction vectors must have the same length as the base point")
    V = GrassmannElement.span(directions, p, n)
    b = [int(x) % p for x in base]
    for row, c in zip(V.basis, V.pivots):
        f = b[c]
        if f:
            b = [(x - f * y) % p for x, y in zip(b, row)]
    return AffinePlane(tuple(b), V)


def plane_through(point: Sequence[int], V: GrassmannElement) -> AffinePlane:
    return canonicalize_plane(point, V.basis, V.p)


def wedge(*spaces: GrassmannElement) -> int:
    """Discrete wedge product: 1 iff the subspaces jointly span F^n (dimensions must sum to n)."""
    if not spaces:
        raise GeometryError("wedge of no subspaces")
    n, p = spaces[0].n, spaces[0].p
    if any(V.n != n or V.p != p for V in spaces):
        raise GeometryError("subspaces live in different ambient spaces")
    if sum(V.k for V in spaces) != n:
        raise GeometryError(f"dimensions {[V.k for V in spaces]} do not sum to n={n}")
    rows = [list(u) for V in spaces for u in V.basis]
    return int(rank_mod_p(rows, p, n) == n)


def delta_kernel(point: Sequence[int], planes: Sequence[AffinePlane]) -> int:
    if not all(pl.contains(point) for pl in planes):
        return 0
    return wedge(*(pl.direction for pl in planes))


@dataclass
class Configuration:
    """d families of planes in F_p^n, family j consisting of k_j-planes."""

    field: PrimeField
    n: int
    k_list: tuple[int, ...]
    families: list[list[AffinePlane]]

    def __post_init__(self):
        if isinstance(self.field, int):
            self.field = PrimeField(self.field)
        self.k_list = tuple(self.k_list)
        if len(self.k_list) < 2:
            raise GeometryError("need at least two families (d >= 2)")
        if sum(self.k_list) != self.n:
            raise GeometryError(f"sum of k_j = {sum(self.k_list)} differs from n = {self.n}")
        if len(self.families) != len(self.k_list):
            raise GeometryError("one plane family per k_j is required")
        for j, (k, fam) in enumerate(zip(self.k_list, self.families)):
            for pl in fam:
                if pl.k != k or pl.n != self.n or pl.p != self.field.p:
                    raise GeometryError(f"plane {pl} does not belong in family {j} (k={k})")

    @property
    def p(self) -> int:
        return self.field.p

    @property
    def d(self) -> int:
        return len(self.k_list)


@dataclass
class MultijointSet:
    """Multijoints J (lexicographically sorted) and their witness tuples.

    ``witnesses[pt]`` lists every tuple of plane indices ``(i_1, .., i_d)``
    (``i_j`` indexes ``cfg.families[j]``) with delta = 1 at ``pt``.
    """

    points: list[Point]
    witnesses: dict[Point, list[tuple[int, ...]]]
    index: dict[Point, int] = field(init=False)

    def __post_init__(self):
        self.index = {pt: i for i, pt in enumerate(self.points)}

    def __len__(self):
        return len(self.points)

    def __iter__(self):
        return iter(self.points)

    def __contains__(self, pt):
        return pt in self.index

    def contributing(self, pt: Point) -> set[tuple[int, int]]:
        """(family, plane index) pairs contributing to a multijoint at ``pt``."""
        return {(j, i) for tup in self.witnesses[pt] for j, i in enumerate(tup)}


def detect_multijoints(cfg: Configuration) -> MultijointSet:
    on_plane: list[dict[Point, list[int]]] = []
    for fam in cfg.families:
        hits: dict[Point, list[int]] = {}
        for i, pl in enumerate(fam):
            for pt in pl.points():
                hits.setdefault(pt, []).append(i)
        on_plane.append(hits)
    if not on_plane:
        return MultijointSet([], {})
    candidates = set(on_plane[0])
    for hits in on_plane[1:]:
        candidates &= set(hits)
    witnesses = {}
    for pt in sorted(candidates):
        tuples = []
        for tup in itertools.product(*(hits[pt] for hits in on_plane)):
            if wedge(*(cfg.families[j][i].direction for j, i in enumerate(tup))):
                tuples.append(tup)
        if tuples:
            witnesses[pt] = tuples
    return MultijointSet(sorted(witnesses), witnesses)


def gaussian_binomial(n: int, k: int, q: int) -> int:
    if k < 0 or k > n:
        return 0
    num = prod(q ** (n - i) - 1 for i in range(k))
    den = prod(q ** (i + 1) - 1 for i in range(k))
    return num // den


def count_affine_planes(n: int, k: int, p: int) -> int:
    return gaussian_binomial(n, k, p) * p ** (n - k)


def enumerate_subspaces(k: int, n: int, p: int) -> list[GrassmannElement]:
    """All of Gr(k, F_p^n), one RREF representative each."""
    out = []
    for pivots in itertools.combinations(range(n), k):
        # free slots: row i, column c > pivots[i] with c not a pivot
        slots = [(i, c) for i in range(k) for c in range(pivots[i] + 1, n) if c not in pivots]
        for vals in itertools.product(range(p), repeat=len(slots)):
            rows = [[0] * n for _ in range(k)]
            for i, c in enumerate(pivots):
                rows[i][c] = 1
            for (i, c), v in zip(slots, vals):
                rows[i][c] = v
            out.append(GrassmannElement(p, n, tuple(tuple(r) for r in rows)))
    return sorted(out)


def enumerate_planes(k: int, n: int, p: int, cap: int = DEFAULT_PLANE_CAP) -> list[AffinePlane]:
    if not 1 <= k <= n:
        raise GeometryError(f"need 1 <= k <= n, got k={k}, n={n}")
    total = count_affine_planes(n, k, p)
    if total > cap:
        raise GeometryError(f"{total} affine {k}-planes in F_{p}^{n} exceeds the cap {cap}")
    planes = []
    for V in enumerate_subspaces(k, n, p):
        free = [c for c in range(n) if c not in V.pivots]
        for vals in itertools.product(range(p), repeat=len(free)):
            base = [0] * n
            for c, v in zip(free, vals):
                base[c] = v
            planes.append(AffinePlane(tuple(base), V))
    return sorted(planes)


def connected_components(J: MultijointSet, points: Iterable[Point] | None = None) -> list[list[Point]]:
    """Classes of the adjacency "some plane contributes to both", optionally within a subset."""
    pts = sorted(J.points if points is None else points)
    parent = {pt: pt for pt in pts}

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    owner: dict[tuple[int, int], Point] = {}
    for pt in pts:
        for plane in sorted(J.contributing(pt)):
            if plane in owner:
                a, b = find(owner[plane]), find(pt)
                if a != b:
                    parent[max(a, b)] = min(a, b)
            else:
                owner[plane] = pt
    comps: dict[Point, list[Point]] = {}
    for pt in pts:
        comps.setdefault(find(pt), []).append(pt)
    return sorted(comps.values())
