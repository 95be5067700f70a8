"""Small reference configurations used by the tests, demos and CLI."""

from __future__ import annotations

import itertools

from .finite_field import PrimeField
from .geometry import Configuration, canonicalize_plane, enumerate_planes


def unit(n: int, i: int) -> tuple[int, ...]:
    return tuple(1 if m == i else 0 for m in range(n))


def single_joint(p: int = 5, n: int = 3) -> Configuration:
    """The n coordinate axes through the origin of F_p^n."""
    fams = [[canonicalize_plane((0,) * n, [unit(n, j)], p)] for j in range(n)]
    return Configuration(PrimeField(p), n, (1,) * n, fams)


def axis_grid(p: int = 3, n: int = 3) -> Configuration:
    """Every axis-parallel line of F_p^n, family j holding the lines along e_j."""
    fams = []
    for j in range(n):
        lines = {canonicalize_plane(pt, [unit(n, j)], p)
                 for pt in itertools.product(range(p), repeat=n)}
        fams.append(sorted(lines))
    return Configuration(PrimeField(p), n, (1,) * n, fams)


def joints_on_line(m: int = 2, p: int = 5) -> Configuration:
    """The line y = 0 crossed by the m vertical lines x = 0..m-1 in F_p^2."""
    horiz = [canonicalize_plane((0, 0), [(1, 0)], p)]
    vert = [canonicalize_plane((x, 0), [(0, 1)], p) for x in range(m)]
    return Configuration(PrimeField(p), 2, (1, 1), [horiz, vert])


def plane_and_line(p: int = 3) -> Configuration:
    """2-planes z = c and the vertical lines through a few points of F_p^3 (k = (2, 1))."""
    planes = [canonicalize_plane((0, 0, c), [(1, 0, 0), (0, 1, 0)], p) for c in range(2)]
    lines = [canonicalize_plane((x, y, 0), [(0, 0, 1)], p) for x, y in [(0, 0), (1, 0), (1, 1)]]
    return Configuration(PrimeField(p), 3, (2, 1), [planes, lines])


def all_lines(p: int, n: int = 2) -> Configuration:
    """n families, each the full set of affine lines of F_p^n."""
    lines = enumerate_planes(1, n, p)
    return Configuration(PrimeField(p), n, (1,) * n, [list(lines) for _ in range(n)])


def disjoint_joints(p: int = 5) -> Configuration:
    """Two single-joint configurations in F_p^3 that share no plane."""
    fams = [[canonicalize_plane((0, 0, 0), [unit(3, j)], p),
             canonicalize_plane((1, 2, 3), [unit(3, j)], p)] for j in range(3)]
    return Configuration(PrimeField(p), 3, (1, 1, 1), fams)
