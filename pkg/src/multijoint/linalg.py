"""Exact linear algebra over F_p and exact rationals.

Vectors are plain lists of ints holding canonical representatives in
[0, p).  Rationals are :class:`fractions.Fraction`.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Hashable, Sequence

Rational = Fraction


def parse_rational(text: str) -> Fraction:
    """Parse ``"num/den"`` or ``"num"``; raises ValueError on junk or a zero denominator."""
    text = text.strip()
    if "/" in text:
        num, den = text.split("/", 1)
        num, den = int(num), int(den)
        if den == 0:
            raise ValueError(f"zero denominator in {text!r}")
        return Fraction(num, den)
    return Fraction(int(text))


def format_rational(q: Fraction) -> str:
    q = Fraction(q)
    return f"{q.numerator}/{q.denominator}"


@dataclass
class MatrixFp:
    rows: list[list[int]]
    p: int
    ncols: int

    def __post_init__(self):
        rows = []
        for r in self.rows:
            if len(r) != self.ncols:
                raise ValueError(f"row of length {len(r)} in a matrix with {self.ncols} columns")
            rows.append([int(x) % self.p for x in r])
        self.rows = rows

    @property
    def nrows(self) -> int:
        return len(self.rows)

    def __eq__(self, other):
        return (
            isinstance(other, MatrixFp)
            and self.p == other.p
            and self.ncols == other.ncols
            and self.rows == other.rows
        )


def rref_rank(m: MatrixFp) -> tuple[MatrixFp, int]:
    """Reduced row-echelon form of ``m`` and its rank.

    Zero rows are dropped, so the echelon matrix has exactly ``rank`` rows.
    """
    p = m.p
    A = [list(r) for r in m.rows]
    ncols = m.ncols
    r = 0
    for c in range(ncols):
        piv = next((i for i in range(r, len(A)) if A[i][c]), None)
        if piv is None:
            continue
        A[r], A[piv] = A[piv], A[r]
        inv = pow(A[r][c], -1, p)
        A[r] = [x * inv % p for x in A[r]]
        for i in range(len(A)):
            if i != r and A[i][c]:
                f = A[i][c]
                A[i] = [(x - f * y) % p for x, y in zip(A[i], A[r])]
        r += 1
        if r == len(A):
            break
    return MatrixFp(A[:r], p, ncols), r


def rank_mod_p(rows: Sequence[Sequence[int]], p: int, ncols: int | None = None) -> int:
    if ncols is None:
        ncols = len(rows[0]) if rows else 0
    return rref_rank(MatrixFp([list(r) for r in rows], p, ncols))[1]


@dataclass
class IncrementalBasis:
    """Reduced row-echelon accumulator with per-row attribution tags.

    ``rows[i]`` has its leading 1 in column ``pivots[i]`` and every other
    row is zero in that column.  ``tags[i]`` records who contributed the
    i-th accepted vector (in acceptance order, which is also row order).
    """

    p: int
    ncols: int
    rows: list[list[int]] = field(default_factory=list)
    pivots: list[int] = field(default_factory=list)
    tags: list[Hashable] = field(default_factory=list)
    accepted: list[list[int]] = field(default_factory=list)

    @property
    def rank(self) -> int:
        return len(self.pivots)

    @property
    def full(self) -> bool:
        return len(self.pivots) == self.ncols

    def reduce(self, v: Sequence[int]) -> list[int]:
        """Residue of ``v`` after elimination against the current rows."""
        p = self.p
        w = [x % p for x in v]
        for row, c in zip(self.rows, self.pivots):
            f = w[c]
            if f:
                w = [(x - f * y) % p for x, y in zip(w, row)]
        return w

    def contains(self, v: Sequence[int]) -> bool:
        return not any(self.reduce(v))

    def try_extend(self, candidate: Sequence[int], tag: Any = None) -> bool:
        if len(candidate) != self.ncols:
            raise ValueError(
                f"candidate has length {len(candidate)}, basis ambient dimension is {self.ncols}"
            )
        if self.full:
            return False
        p = self.p
        w = self.reduce(candidate)
        c = next((i for i, x in enumerate(w) if x), None)
        if c is None:
            return False
        inv = pow(w[c], -1, p)
        w = [x * inv % p for x in w]
        for i, row in enumerate(self.rows):
            f = row[c]
            if f:
                self.rows[i] = [(x - f * y) % p for x, y in zip(row, w)]
        self.rows.append(w)
        self.pivots.append(c)
        self.tags.append(tag)
        self.accepted.append([x % p for x in candidate])
        return True

    def echelon(self) -> MatrixFp:
        """Canonical RREF of the span (rows sorted by pivot)."""
        order = sorted(range(len(self.pivots)), key=self.pivots.__getitem__)
        return MatrixFp([self.rows[i] for i in order], self.p, self.ncols)
