"""Monomial bases, Hasse-derivative functionals and their lifts to F_p[x_1..x_n].

A functional on F_lam[x_1..x_k] is stored as its list of values on the
monomial basis, so pairing with a polynomial is a dot product with the
polynomial's coefficient vector.  Monomials are ordered by total degree,
then by descending exponent tuple: 1, x, y, x^2, xy, y^2, ...
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from math import comb
from typing import Mapping, Sequence

from .finite_field import binomial_mod_p
from .geometry import AffinePlane, GeometryError, Point
from .linalg import MatrixFp, rref_rank

MultiIndex = tuple[int, ...]


def multi_indices(k: int, order: int) -> list[MultiIndex]:
    """All k-variate multi-indices of total degree ``order``, descending lex."""
    if k == 0:
        return [()] if order == 0 else []
    out = []
    for first in range(order, -1, -1):
        for rest in multi_indices(k - 1, order - first):
            out.append((first,) + rest)
    return out


@dataclass(frozen=True)
class MonomialBasis:
    k: int
    lam: int
    monomials: tuple[MultiIndex, ...]
    index: dict = field(compare=False, hash=False, repr=False, default=None)

    def __post_init__(self):
        object.__setattr__(self, "index", {m: i for i, m in enumerate(self.monomials)})

    def __len__(self):
        return len(self.monomials)


_BASES: dict[tuple[int, int], MonomialBasis] = {}


def monomial_basis(k: int, lam: int) -> MonomialBasis:
    key = (k, lam)
    if key not in _BASES:
        if k < 1 or lam < 0:
            raise ValueError(f"need k >= 1 and lam >= 0, got k={k}, lam={lam}")
        mons = tuple(m for r in range(lam + 1) for m in multi_indices(k, r))
        assert len(mons) == comb(lam + k, k)
        _BASES[key] = MonomialBasis(k, lam, mons)
    return _BASES[key]


def hasse_functional(u: Sequence[int], beta: MultiIndex, basis: MonomialBasis, p: int) -> list[int]:
    """The functional f -> (D^beta f)(u) on ``basis``.

    Its value on x^gamma is prod_i C(gamma_i, beta_i) u_i^(gamma_i - beta_i),
    the coefficient of z^beta in (u + z)^gamma.
    """
    out = []
    for gamma in basis.monomials:
        v = 1
        for g, b, ui in zip(gamma, beta, u):
            if b > g:
                v = 0
                break
            v = v * binomial_mod_p(g, b, p) * pow(ui, g - b, p) % p
        out.append(v)
    return out


def _solve_coordinates(origin: Sequence[int], dirs: Sequence[Sequence[int]], x: Sequence[int], p: int):
    n = len(origin)
    k = len(dirs)
    # columns are the direction vectors, augmented with x - origin
    rows = [[dirs[j][i] for j in range(k)] + [(x[i] - origin[i]) % p] for i in range(n)]
    ech, _ = rref_rank(MatrixFp(rows, p, k + 1))
    t = [0] * k
    for row in ech.rows:
        c = next(i for i, v in enumerate(row) if v)
        if c == k:
            return None
        t[c] = row[k]
    return tuple(t)


class PlaneChart:
    """Affine chart t -> origin + sum_i t_i u_i of a plane.

    By default ``origin`` is the plane's canonical base and ``u`` its RREF
    direction basis; any other base point and basis of the same plane may
    be supplied.
    """

    def __init__(self, plane: AffinePlane, directions=None, origin=None):
        self.plane = plane
        self.p = plane.p
        self.directions = tuple(tuple(int(x) % self.p for x in u)
                                for u in (plane.direction.basis if directions is None else directions))
        self.origin = tuple(plane.base if origin is None else (int(x) % self.p for x in origin))
        if len(self.directions) != plane.k or not plane.contains(self.origin):
            raise GeometryError("chart origin/directions do not describe the plane")
        for u in self.directions:
            if not plane.direction.contains_vector(u):
                raise GeometryError("chart direction is not parallel to the plane")
        if rref_rank(MatrixFp([list(u) for u in self.directions], self.p, plane.n))[1] != plane.k:
            raise GeometryError("chart directions are linearly dependent")
        self._canonical = directions is None and origin is None

    @property
    def k(self) -> int:
        return self.plane.k

    def __call__(self, t: Sequence[int]) -> Point:
        p = self.p
        x = list(self.origin)
        for ti, u in zip(t, self.directions):
            x = [(a + ti * b) % p for a, b in zip(x, u)]
        return tuple(x)

    def inverse(self, point: Sequence[int]) -> tuple[int, ...]:
        if self._canonical:
            return self.plane.coordinates_of(point)
        t = _solve_coordinates(self.origin, self.directions, point, self.p)
        if t is None or self(t) != tuple(int(x) % self.p for x in point):
            raise GeometryError(f"point {tuple(point)} is not on plane {self.plane}")
        return t


def plane_functional_space(chart: PlaneChart, point: Sequence[int], r: int, lam: int) -> list[list[int]]:
    """Generators of B_r(point, plane, lam): order-r Hasse functionals at ``point`` in chart coordinates."""
    t = chart.inverse(point)
    basis = monomial_basis(chart.k, lam)
    return [hasse_functional(t, beta, basis, chart.p) for beta in multi_indices(chart.k, r)]


def _poly_mul(a: dict, b: dict, p: int, cap: int) -> dict:
    out: dict = {}
    for ea, ca in a.items():
        da = sum(ea)
        for eb, cb in b.items():
            if da + sum(eb) > cap:
                continue
            e = tuple(x + y for x, y in zip(ea, eb))
            out[e] = (out.get(e, 0) + ca * cb) % p
    return {e: c for e, c in out.items() if c}


def substitution_functionals(point: Sequence[int], U: Sequence[Sequence[int]], lam: int, p: int):
    """Mixed Hasse functionals of g(t) = f(point + t U) at t = 0.

    Returns a map beta -> functional on the n-variate degree-<=lam basis,
    where the functional sends f to the coefficient of t^beta in g.
    Rows of U are the substituted directions; U must be square and invertible.
    """
    n = len(point)
    if len(U) != n or any(len(u) != n for u in U):
        raise GeometryError("stacked direction matrix must be n x n")
    if rref_rank(MatrixFp([list(u) for u in U], p, n))[1] != n:
        raise GeometryError("stacked direction matrix is singular")
    basis = monomial_basis(n, lam)
    zero = (0,) * n
    linear = []
    for i in range(n):
        L = {zero: point[i] % p} if point[i] % p else {}
        for j in range(n):
            if U[j][i] % p:
                e = tuple(1 if m == j else 0 for m in range(n))
                L[e] = U[j][i] % p
        linear.append(L)
    powers = [[{zero: 1}] for _ in range(n)]
    for i in range(n):
        for _ in range(lam):
            powers[i].append(_poly_mul(powers[i][-1], linear[i], p, lam))
    table: dict[MultiIndex, list[int]] = {beta: [0] * len(basis) for beta in basis.monomials}
    for col, gamma in enumerate(basis.monomials):
        g = {zero: 1}
        for i, e in enumerate(gamma):
            if e:
                g = _poly_mul(g, powers[i][e], p, lam)
        for beta, c in g.items():
            table[beta][col] = c
    return table


def lift_and_compose(
    point: Sequence[int],
    planes: Sequence[AffinePlane],
    operators: Sequence[Mapping[MultiIndex, int] | MultiIndex],
    lam: int,
    p: int,
    table=None,
) -> list[int]:
    """The functional f -> D_1 ... D_d f(point) on F_lam[x_1..x_n].

    ``operators[j]`` is either a multi-index beta_j (the single Hasse
    generator D^beta_j along plane j's canonical directions) or a mapping
    beta_j -> coefficient for a linear combination of such generators.
    Derivatives along different planes act on disjoint chart variables, so
    the composite is the block Hasse derivative of f(point + t U) at t = 0.
    """
    U = [u for pl in planes for u in pl.direction.basis]
    if table is None:
        table = substitution_functionals(point, U, lam, p)
    nb = len(next(iter(table.values())))
    combos = [op if isinstance(op, Mapping) else {tuple(op): 1} for op in operators]
    out = [0] * nb
    for parts in itertools.product(*(c.items() for c in combos)):
        coef = 1
        beta: tuple[int, ...] = ()
        for b, c in parts:
            beta += tuple(b)
            coef = coef * c % p
        row = table.get(beta)
        if row is None or not coef:
            continue  # |beta| > lam: the zero functional
        out = [(x + coef * y) % p for x, y in zip(out, row)]
    return out
