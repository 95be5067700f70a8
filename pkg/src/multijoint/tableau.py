"""Handicap priority order and the greedy vanishing-condition tableau on one plane."""

from __future__ import annotations

import random
from dataclasses import dataclass
from math import comb
from typing import Mapping, Sequence

from .geometry import AffinePlane, GeometryError, Point
from .linalg import IncrementalBasis
from .poly_dual import PlaneChart, multi_indices, plane_functional_space

Handicap = Mapping[Point, int]


def priority_key(pt: Point, r: int, alpha: Handicap) -> tuple[int, Point]:
    """Sort key of (pt, r) under the priority order: r - alpha_pt, then point order."""
    try:
        return (r - alpha[pt], pt)
    except KeyError:
        raise KeyError(f"point {pt} is outside the handicap's domain") from None


def priority_compare(a: tuple[Point, int], b: tuple[Point, int], alpha: Handicap) -> int:
    """-1, 0 or 1 as ``a`` precedes, equals or follows ``b``."""
    ka = priority_key(a[0], a[1], alpha) + (a[1],)
    kb = priority_key(b[0], b[1], alpha) + (b[1],)
    return (ka > kb) - (ka < kb)


@dataclass
class Tableau:
    plane: AffinePlane
    alpha: dict[Point, int]
    lam: int
    counts: dict[Point, int]
    basis: IncrementalBasis

    @property
    def dimension(self) -> int:
        return comb(self.lam + self.plane.k, self.plane.k)

    def accepted(self, pt: Point) -> list[tuple[int, tuple[int, ...]]]:
        """(r, beta) of every generator accepted for ``pt``, in acceptance order."""
        return [tag[1:] for tag in self.basis.tags if tag[0] == pt]


def build_tableau(
    plane: AffinePlane,
    points: Sequence[Point],
    alpha: Handicap,
    lam: int,
    chart: PlaneChart | None = None,
    rng: random.Random | None = None,
) -> Tableau:
    """Greedy basis of the dual of F_lam[t_1..t_k] along the priority order.

    Each (pt, r) pair, taken in priority order, offers the order-r Hasse
    generators at ``pt``; a generator is kept iff it is independent of
    everything kept so far, and is attributed to ``pt``.  ``rng`` shuffles
    the generators inside each (pt, r) block (the counts do not depend on it).
    """
    if lam < 0:
        raise ValueError("lam must be non-negative")
    chart = chart or PlaneChart(plane)
    pts = sorted(set(points))
    for pt in pts:
        if not plane.contains(pt):
            raise GeometryError(f"point {pt} is not on plane {plane}")
    dim = comb(lam + plane.k, plane.k)
    basis = IncrementalBasis(plane.p, dim)
    counts = {pt: 0 for pt in pts}
    pairs = sorted(((pt, r) for pt in pts for r in range(lam + 1)),
                   key=lambda pr: priority_key(pr[0], pr[1], alpha))
    for pt, r in pairs:
        if basis.full:
            break
        betas = multi_indices(plane.k, r)
        gens = plane_functional_space(chart, pt, r, lam)
        block = list(zip(betas, gens))
        if rng is not None:
            rng.shuffle(block)
        for beta, g in block:
            if basis.try_extend(g, (pt, r, beta)):
                counts[pt] += 1
    if pts:
        assert basis.rank == dim, "derivatives up to order lam at one point span the dual"
    return Tableau(plane, {pt: alpha[pt] for pt in pts}, lam, counts, basis)


class TableauCache:
    """Memoised tableau counts keyed on (plane, lam, relative handicap on the plane).

    Counts are translation invariant in the handicap, so the key stores
    alpha shifted to have minimum 0 on the plane's points.
    """

    def __init__(self):
        self._store: dict = {}
        self.hits = 0
        self.misses = 0

    def get(self, plane: AffinePlane, points: Sequence[Point], alpha: Handicap, lam: int) -> Tableau:
        pts = tuple(sorted(points))
        lo = min(alpha[pt] for pt in pts) if pts else 0
        key = (plane, lam, tuple((pt, alpha[pt] - lo) for pt in pts))
        tab = self._store.get(key)
        if tab is None:
            self.misses += 1
            tab = build_tableau(plane, pts, alpha, lam)
            self._store[key] = tab
        else:
            self.hits += 1
        return tab

    def counts(self, plane, points, alpha, lam) -> dict[Point, int]:
        return self.get(plane, points, alpha, lam).counts
