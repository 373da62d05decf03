"""Finite-field arithmetic and rank over GF(p).

Elements of GF(2^m) are stored in polynomial basis: bit ``i`` of the value is
the coefficient of ``x^i``.  Fields with ``m <= 8`` multiply through
log/antilog tables; larger fields fall back to shift-and-add.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

__all__ = [
    "FieldContextError",
    "GF2m",
    "PrimeField",
    "FieldElement",
    "field_for_order",
    "gf_mul",
    "gf_inverse",
    "is_prime",
    "p_rank",
    "gf2_rank",
    "rows_to_bits",
]

# x^m + ... ; low terms only, as bit masks including the leading term
DEFAULT_MODULI = {
    1: 0b11,
    2: 0b111,
    3: 0b1011,
    4: 0b10011,
    5: 0b100101,
    6: 0b1000011,
    7: 0b10000011,
    8: 0b100011101,
}


class FieldContextError(ValueError):
    """Raised when elements from different fields are combined."""


def is_prime(n: int) -> bool:
    if n < 2:
        return False
    if n % 2 == 0:
        return n == 2
    d = 3
    while d * d <= n:
        if n % d == 0:
            return False
        d += 2
    return True


def _poly_mulmod(a: int, b: int, modulus: int, m: int) -> int:
    result = 0
    top = 1 << m
    while b:
        if b & 1:
            result ^= a
        b >>= 1
        a <<= 1
        if a & top:
            a ^= modulus
    return result


def _is_irreducible(modulus: int, m: int) -> bool:
    # trial division by every polynomial of degree 1..m//2
    for d in range(1, m // 2 + 1):
        for f in range(1 << d, 1 << (d + 1)):
            r = modulus
            while r.bit_length() >= f.bit_length():
                r ^= f << (r.bit_length() - f.bit_length())
            if r == 0:
                return False
    return True


class GF2m:
    """The field GF(2^m) with a fixed irreducible modulus."""

    characteristic = 2

    def __init__(self, m: int, modulus: int | None = None):
        if m < 1:
            raise ValueError(f"field degree must be positive, got {m}")
        if modulus is None:
            if m not in DEFAULT_MODULI:
                raise ValueError(f"no default modulus for m={m}; pass one explicitly")
            modulus = DEFAULT_MODULI[m]
        if modulus.bit_length() != m + 1:
            raise ValueError(f"modulus {modulus:#b} does not have degree {m}")
        if not _is_irreducible(modulus, m):
            raise ValueError(f"modulus {modulus:#b} is reducible over GF(2)")
        self.m = m
        self.modulus = modulus
        self.order = 1 << m
        self._exp: list[int] | None = None
        self._log: list[int] | None = None
        if m <= 8:
            self._build_tables()

    def _build_tables(self) -> None:
        q = self.order
        # find a generator of the multiplicative group
        for g in range(2, q) if q > 2 else [1]:
            exp = [1] * (2 * (q - 1))
            seen = {1}
            x = 1
            ok = True
            for i in range(1, q - 1):
                x = _poly_mulmod(x, g, self.modulus, self.m)
                if x in seen:
                    ok = False
                    break
                seen.add(x)
                exp[i] = x
            if ok:
                break
        for i in range(q - 1, 2 * (q - 1)):
            exp[i] = exp[i - (q - 1)]
        log = [0] * q
        for i in range(q - 1):
            log[exp[i]] = i
        self._exp = exp
        self._log = log

    def __repr__(self) -> str:
        return f"GF2m(m={self.m}, modulus={self.modulus:#b})"

    def __eq__(self, other: object) -> bool:
        return isinstance(other, GF2m) and (self.m, self.modulus) == (other.m, other.modulus)

    def __hash__(self) -> int:
        return hash((GF2m, self.m, self.modulus))

    def elements(self) -> range:
        return range(self.order)

    def add(self, a: int, b: int) -> int:
        return a ^ b

    def sub(self, a: int, b: int) -> int:
        return a ^ b

    def neg(self, a: int) -> int:
        return a

    def mul(self, a: int, b: int) -> int:
        if a == 0 or b == 0:
            return 0
        if self._exp is not None:
            return self._exp[self._log[a] + self._log[b]]
        return _poly_mulmod(a, b, self.modulus, self.m)

    def inv(self, a: int) -> int:
        if a == 0:
            raise ZeroDivisionError("inverse of zero in GF(2^m)")
        if self._exp is not None:
            return self._exp[(self.order - 1 - self._log[a]) % (self.order - 1)]
        return self.pow(a, self.order - 2)

    def pow(self, a: int, e: int) -> int:
        result = 1
        while e:
            if e & 1:
                result = self.mul(result, a)
            a = self.mul(a, a)
            e >>= 1
        return result

    def element(self, value: int) -> FieldElement:
        return FieldElement(self, value)


class PrimeField:
    """GF(p) for a prime p, with the same integer interface as :class:`GF2m`."""

    def __init__(self, p: int):
        if not is_prime(p):
            raise ValueError(f"{p} is not prime")
        self.characteristic = p
        self.order = p

    def __repr__(self) -> str:
        return f"PrimeField({self.order})"

    def __eq__(self, other: object) -> bool:
        return isinstance(other, PrimeField) and other.order == self.order

    def __hash__(self) -> int:
        return hash((PrimeField, self.order))

    def elements(self) -> range:
        return range(self.order)

    def add(self, a: int, b: int) -> int:
        return (a + b) % self.order

    def sub(self, a: int, b: int) -> int:
        return (a - b) % self.order

    def neg(self, a: int) -> int:
        return (-a) % self.order

    def mul(self, a: int, b: int) -> int:
        return (a * b) % self.order

    def inv(self, a: int) -> int:
        if a % self.order == 0:
            raise ZeroDivisionError(f"inverse of zero in GF({self.order})")
        return pow(a, -1, self.order)

    def element(self, value: int) -> FieldElement:
        return FieldElement(self, value % self.order)


def field_for_order(q: int) -> GF2m | PrimeField:
    """Return a field of order ``q``; primes and powers of two are supported."""
    if q >= 2 and q & (q - 1) == 0:
        return GF2m(q.bit_length() - 1)
    if is_prime(q):
        return PrimeField(q)
    raise ValueError(f"unsupported field order {q}: need a prime or a power of two")


@dataclass(frozen=True)
class FieldElement:
    field: GF2m | PrimeField
    value: int

    def __post_init__(self):
        if not 0 <= self.value < self.field.order:
            raise ValueError(f"{self.value} is not an element of {self.field!r}")

    def _check(self, other: FieldElement) -> None:
        if not isinstance(other, FieldElement) or other.field != self.field:
            raise FieldContextError("operands belong to different fields")

    def __add__(self, other: FieldElement) -> FieldElement:
        self._check(other)
        return FieldElement(self.field, self.field.add(self.value, other.value))

    def __mul__(self, other: FieldElement) -> FieldElement:
        return gf_mul(self, other)

    def __pow__(self, e: int) -> FieldElement:
        if e < 0:
            return gf_inverse(self) ** (-e)
        v = 1
        for _ in range(e):
            v = self.field.mul(v, self.value)
        return FieldElement(self.field, v)

    def __bool__(self) -> bool:
        return self.value != 0

    def __int__(self) -> int:
        return self.value


def gf_mul(a: FieldElement, b: FieldElement) -> FieldElement:
    a._check(b)
    return FieldElement(a.field, a.field.mul(a.value, b.value))


def gf_inverse(a: FieldElement) -> FieldElement:
    return FieldElement(a.field, a.field.inv(a.value))


def rows_to_bits(rows: Iterable[Sequence[int]]) -> list[int]:
    """Pack 0/1 rows into integers, column ``j`` at bit ``j``."""
    packed = []
    for row in rows:
        word = 0
        for j, x in enumerate(row):
            if x & 1:
                word |= 1 << j
        packed.append(word)
    return packed


def gf2_rank(rows: Iterable[int]) -> int:
    """Rank over GF(2) of a matrix given as bit-packed rows."""
    pivots: dict[int, int] = {}
    rank = 0
    for row in rows:
        while row:
            top = row.bit_length() - 1
            pivot = pivots.get(top)
            if pivot is None:
                pivots[top] = row
                rank += 1
                break
            row ^= pivot
    return rank


def p_rank(matrix, p: int = 2) -> int:
    """Rank of an integer matrix over GF(p).

    ``matrix`` is anything indexable as rows of integers (lists, tuples,
    a numpy array).  For p = 2 the rows are bit-packed and reduced with XOR.
    """
    if not is_prime(p):
        raise ValueError(f"p must be prime, got {p}")
    rows = [[int(x) % p for x in row] for row in matrix]
    if p == 2:
        return gf2_rank(rows_to_bits(rows))
    rank = 0
    ncols = len(rows[0]) if rows else 0
    for col in range(ncols):
        pivot = next((i for i in range(rank, len(rows)) if rows[i][col]), None)
        if pivot is None:
            continue
        rows[rank], rows[pivot] = rows[pivot], rows[rank]
        inv = pow(rows[rank][col], -1, p)
        prow = [(x * inv) % p for x in rows[rank]]
        rows[rank] = prow
        for i in range(len(rows)):
            if i != rank and rows[i][col]:
                f = rows[i][col]
                rows[i] = [(x - f * y) % p for x, y in zip(rows[i], prow)]
        rank += 1
    return rank
