"""Exact arithmetic in prime fields F_p."""

from __future__ import annotations

from functools import lru_cache
from math import comb


def is_prime(n: int) -> bool:
    if n < 2:
        return False
    if n % 2 == 0:
        return n == 2
    f = 3
    while f * f <= n:
        if n % f == 0:
            return False
        f += 2
    return True


class FieldError(ValueError):
    """Raised on invalid field construction or illegal field operations."""


class PrimeField:
    """The prime field F_p."""

    __slots__ = ("p",)

    def __init__(self, p: int):
        if not isinstance(p, int) or isinstance(p, bool):
            raise TypeError("p must be an integer")
        if not is_prime(p):
            raise FieldError(f"modulus {p} is not prime")
        self.p = p

    def __repr__(self):
        return f"PrimeField({self.p})"

    def __eq__(self, other):
        return isinstance(other, PrimeField) and other.p == self.p

    def __hash__(self):
        return hash(("PrimeField", self.p))

    def __call__(self, value: int) -> "FieldElement":
        return FieldElement(value, self)

    def elements(self):
        return [FieldElement(v, self) for v in range(self.p)]

    def inv(self, a: int) -> int:
        """Inverse of a raw representative; raises on zero."""
        a %= self.p
        if a == 0:
            raise ZeroDivisionError(f"0 has no inverse in F_{self.p}")
        return pow(a, -1, self.p)


class FieldElement:
    """An element of F_p, stored as its canonical representative in [0, p)."""

    __slots__ = ("value", "field")

    def __init__(self, value: int, field: PrimeField):
        self.field = field
        self.value = int(value) % field.p

    def _coerce(self, other) -> int:
        if isinstance(other, FieldElement):
            if other.field != self.field:
                raise FieldError(f"mixed fields: F_{self.field.p} and F_{other.field.p}")
            return other.value
        if isinstance(other, int):
            return other % self.field.p
        return NotImplemented

    def __add__(self, other):
        b = self._coerce(other)
        if b is NotImplemented:
            return b
        return FieldElement(self.value + b, self.field)

    __radd__ = __add__

    def __sub__(self, other):
        b = self._coerce(other)
        if b is NotImplemented:
            return b
        return FieldElement(self.value - b, self.field)

    def __rsub__(self, other):
        b = self._coerce(other)
        if b is NotImplemented:
            return b
        return FieldElement(b - self.value, self.field)

    def __mul__(self, other):
        b = self._coerce(other)
        if b is NotImplemented:
            return b
        return FieldElement(self.value * b, self.field)

    __rmul__ = __mul__

    def __neg__(self):
        return FieldElement(-self.value, self.field)

    def inv(self) -> "FieldElement":
        return FieldElement(self.field.inv(self.value), self.field)

    def __truediv__(self, other):
        b = self._coerce(other)
        if b is NotImplemented:
            return b
        return self * FieldElement(b, self.field).inv()

    def __pow__(self, e: int):
        if e < 0:
            return self.inv() ** (-e)
        return FieldElement(pow(self.value, e, self.field.p), self.field)

    def __eq__(self, other):
        if isinstance(other, FieldElement):
            return self.field == other.field and self.value == other.value
        if isinstance(other, int):
            return self.value == other % self.field.p
        return NotImplemented

    def __hash__(self):
        return hash((self.value, self.field.p))

    def __int__(self):
        return self.value

    def __repr__(self):
        return f"{self.value} (mod {self.field.p})"


@lru_cache(maxsize=None)
def _binom_small(n: int, k: int, p: int) -> int:
    return comb(n, k) % p


def binomial_mod_p(n: int, k: int, field: PrimeField | int) -> int:
    """C(n, k) mod p via Lucas' theorem; 0 when k > n.

    Returns the raw representative so it can be used directly in vector
    arithmetic; wrap with ``field(...)`` when a FieldElement is wanted.
    """
    p = field.p if isinstance(field, PrimeField) else field
    if n < 0 or k < 0:
        raise ValueError("binomial arguments must be non-negative")
    if k > n:
        return 0
    result = 1
    while n or k:
        ni, ki = n % p, k % p
        if ki > ni:
            return 0
        result = result * _binom_small(ni, ki, p) % p
        n //= p
        k //= p
    return result
