"""Prime fields, quadratic characters and exact sums of roots of unity.

A :class:`CyclotomicSum` stores ``scale * sum_j counts[j] * zeta_n**j`` with
integer counts.  Zero tests never touch floating point: the histogram is read
as a polynomial and reduced modulo the n-th cyclotomic polynomial.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Iterable, Sequence, Union

Rational = Union[int, Fraction]


def is_odd_prime(p: int) -> bool:
    if p < 3 or p % 2 == 0:
        return False
    return all(p % k for k in range(3, math.isqrt(p) + 1, 2))


def check_odd_prime(p: int) -> None:
    if not is_odd_prime(p):
        raise ValueError(f"{p} is not an odd prime")


def legendre(a: int, p: int) -> int:
    """Quadratic character of F_p: 1, -1, or 0 for a = 0."""
    a %= p
    if a == 0:
        return 0
    return 1 if pow(a, (p - 1) // 2, p) == 1 else -1


def smallest_nonsquare(p: int) -> int:
    return next(a for a in range(2, p) if legendre(a, p) == -1)


def prime_power_split(n: int) -> tuple[int, int] | None:
    """Return (p, M) with n = p**M, or None if n is not a prime power."""
    if n < 2:
        return None
    p = next(k for k in range(2, n + 1) if n % k == 0)
    M = 0
    while n % p == 0:
        n //= p
        M += 1
    return (p, M) if n == 1 else None


@dataclass(frozen=True)
class FqElem:
    value: int
    p: int

    def __post_init__(self):
        object.__setattr__(self, "value", self.value % self.p)

    def _coerce(self, other) -> int:
        if isinstance(other, FqElem):
            if other.p != self.p:
                raise ValueError("elements of different fields")
            return other.value
        return int(other)

    def __add__(self, other):
        return FqElem(self.value + self._coerce(other), self.p)

    __radd__ = __add__

    def __sub__(self, other):
        return FqElem(self.value - self._coerce(other), self.p)

    def __rsub__(self, other):
        return FqElem(self._coerce(other) - self.value, self.p)

    def __mul__(self, other):
        return FqElem(self.value * self._coerce(other), self.p)

    __rmul__ = __mul__

    def __neg__(self):
        return FqElem(-self.value, self.p)

    def inverse(self) -> FqElem:
        if self.value == 0:
            raise ZeroDivisionError("0 has no inverse in F_p")
        return FqElem(pow(self.value, -1, self.p), self.p)

    def __truediv__(self, other):
        return self * FqElem(self._coerce(other), self.p).inverse()

    def __pow__(self, k: int):
        if k < 0:
            return self.inverse() ** (-k)
        return FqElem(pow(self.value, k, self.p), self.p)

    def __int__(self):
        return self.value

    def is_zero(self) -> bool:
        return self.value == 0

    def is_square(self) -> bool:
        return legendre(self.value, self.p) >= 0


class QuadChar:
    """The quadratic character sgn of F_p^x, extended by sgn(0) = 0."""

    def __init__(self, p: int):
        check_odd_prime(p)
        self.p = p

    def __call__(self, a) -> int:
        return legendre(int(a), self.p)

    def __repr__(self):
        return f"QuadChar({self.p})"


@lru_cache(maxsize=None)
def cyclotomic_polynomial(n: int) -> tuple[int, ...]:
    """Integer coefficients of Phi_n, lowest degree first."""
    if n < 1:
        raise ValueError("order must be positive")
    pm = prime_power_split(n)
    if pm is not None:
        p, M = pm
        step = p ** (M - 1)
        coeffs = [0] * ((p - 1) * step + 1)
        for k in range(p):
            coeffs[k * step] = 1
        return tuple(coeffs)
    # x^n - 1 divided by every Phi_d with d a proper divisor of n
    num = [-1] + [0] * (n - 1) + [1]
    for d in range(1, n):
        if n % d == 0:
            num, rem = _poly_divmod(num, cyclotomic_polynomial(d))
            assert not any(rem)
    return tuple(num)


def _poly_divmod(num: Sequence[int], den: Sequence[int]) -> tuple[list[int], list[int]]:
    # den is monic, so the division stays in the integers
    num = list(num)
    dd = len(den) - 1
    if len(num) <= dd:
        return [0], num + [0] * (dd - len(num))
    quot = [0] * (len(num) - dd)
    for i in range(len(num) - 1, dd - 1, -1):
        c = num[i]
        if c:
            quot[i - dd] = c
            for j, dj in enumerate(den):
                if dj:
                    num[i - dd + j] -= c * dj
    return quot, num[:dd]


def reduce_mod_cyclotomic(counts: Sequence[int], n: int) -> list[int]:
    """Remainder of sum counts[j] x^j modulo Phi_n, padded to length phi(n)."""
    if len(counts) != n:
        raise ValueError("histogram length must equal the order")
    return _poly_divmod(counts, cyclotomic_polynomial(n))[1]


def _as_fraction(x: Rational) -> Fraction:
    if isinstance(x, Fraction):
        return x
    if isinstance(x, int):
        return Fraction(x)
    raise TypeError(f"expected an exact rational, got {type(x).__name__}")


class CyclotomicSum:
    """Exact value ``scale * sum_j counts[j] * zeta**j`` with zeta = exp(2 pi i / order).

    >>> s = CyclotomicSum(3, [4, 1, 1])
    >>> s.to_rational()
    Fraction(3, 1)
    >>> (CyclotomicSum.root(1, 4) * CyclotomicSum.root(1, 4)).to_rational()
    Fraction(-1, 1)
    """

    __slots__ = ("order", "counts", "scale")

    def __init__(self, order: int, counts: Iterable[int], scale: Rational = 1):
        counts = tuple(int(c) for c in counts)
        if order < 1 or len(counts) != order:
            raise ValueError(f"histogram of length {len(counts)} for order {order}")
        self.order = order
        self.counts = counts
        self.scale = _as_fraction(scale)

    # constructors

    @classmethod
    def zero(cls, order: int = 1) -> CyclotomicSum:
        return cls(order, [0] * order)

    @classmethod
    def rational(cls, x: Rational, order: int = 1) -> CyclotomicSum:
        x = _as_fraction(x)
        counts = [0] * order
        counts[0] = x.numerator
        return cls(order, counts, Fraction(1, x.denominator))

    @classmethod
    def root(cls, j: int, order: int) -> CyclotomicSum:
        counts = [0] * order
        counts[j % order] = 1
        return cls(order, counts)

    @classmethod
    def from_exponents(cls, exponents: Iterable[int], order: int, scale: Rational = 1) -> CyclotomicSum:
        counts = [0] * order
        for j in exponents:
            counts[j % order] += 1
        return cls(order, counts, scale)

    # structure

    def lift(self, order: int) -> CyclotomicSum:
        """Same number written over a multiple of the current order."""
        if order % self.order:
            raise ValueError(f"{order} is not a multiple of {self.order}")
        step = order // self.order
        counts = [0] * order
        for j, c in enumerate(self.counts):
            counts[j * step] = c
        return CyclotomicSum(order, counts, self.scale)

    def _common(self, other) -> tuple[CyclotomicSum, CyclotomicSum]:
        if not isinstance(other, CyclotomicSum):
            other = CyclotomicSum.rational(_as_fraction(other))
        n = math.lcm(self.order, other.order)
        return self.lift(n), other.lift(n)

    def normalized(self) -> CyclotomicSum:
        g = math.gcd(*self.counts)
        if g in (0, 1):
            return self if g == 1 else CyclotomicSum(self.order, self.counts, 1)
        return CyclotomicSum(self.order, [c // g for c in self.counts], self.scale * g)

    # arithmetic

    def __add__(self, other) -> CyclotomicSum:
        a, b = self._common(other)
        den = math.lcm(a.scale.denominator, b.scale.denominator)
        fa = a.scale.numerator * (den // a.scale.denominator)
        fb = b.scale.numerator * (den // b.scale.denominator)
        counts = [fa * x + fb * y for x, y in zip(a.counts, b.counts)]
        return CyclotomicSum(a.order, counts, Fraction(1, den)).normalized()

    __radd__ = __add__

    def __neg__(self) -> CyclotomicSum:
        return CyclotomicSum(self.order, self.counts, -self.scale)

    def __sub__(self, other) -> CyclotomicSum:
        return self + (-other)

    def __rsub__(self, other) -> CyclotomicSum:
        return (-self) + other

    def __mul__(self, other) -> CyclotomicSum:
        if not isinstance(other, CyclotomicSum):
            return CyclotomicSum(self.order, self.counts, self.scale * _as_fraction(other))
        a, b = self._common(other)
        n = a.order
        out = [0] * n
        nz = [(j, c) for j, c in enumerate(b.counts) if c]
        for i, x in enumerate(a.counts):
            if x:
                for j, y in nz:
                    out[(i + j) % n] += x * y
        return CyclotomicSum(n, out, a.scale * b.scale)

    __rmul__ = __mul__

    def __pow__(self, k: int) -> CyclotomicSum:
        if k < 0:
            raise ValueError("negative powers are not supported")
        result = CyclotomicSum.rational(1, self.order)
        for _ in range(k):
            result = result * self
        return result

    def conjugate(self) -> CyclotomicSum:
        n = self.order
        return CyclotomicSum(n, [self.counts[-j % n] for j in range(n)], self.scale)

    # exact predicates

    def is_zero(self) -> bool:
        if self.scale == 0:
            return True
        return not any(reduce_mod_cyclotomic(self.counts, self.order))

    def to_rational(self) -> Fraction | None:
        """The value as a Fraction if it is rational, else None."""
        if self.scale == 0:
            return Fraction(0)
        rem = reduce_mod_cyclotomic(self.counts, self.order)
        if any(rem[1:]):
            return None
        return self.scale * rem[0]

    def __eq__(self, other) -> bool:
        if isinstance(other, (int, Fraction, CyclotomicSum)):
            return (self - other).is_zero()
        return NotImplemented

    __hash__ = None

    # display only

    def __complex__(self) -> complex:
        n = self.order
        total = sum(c * cmath.exp(2j * cmath.pi * k / n) for k, c in enumerate(self.counts) if c)
        return complex(total) * float(self.scale)

    def to_json(self) -> dict:
        return {"order": self.order, "counts": list(self.counts), "scale": str(self.scale)}

    def __repr__(self):
        return f"CyclotomicSum(order={self.order}, counts={list(self.counts)}, scale={self.scale})"


def cyclo_is_zero(s: CyclotomicSum) -> bool:
    return s.is_zero()


def cyclo_equals_integer(s: CyclotomicSum, n: Rational) -> bool:
    return (s - _as_fraction(n)).is_zero()


def psi_sum(p: int, coefficients: Iterable[int]) -> CyclotomicSum:
    """Sum of psi(x) = zeta_p**x over the given field elements."""
    return CyclotomicSum.from_exponents(coefficients, p)


def gauss_sum(p: int, a: int = 1) -> CyclotomicSum:
    """G(psi_a, sgn) = sum over x != 0 of sgn(x) psi(a x)."""
    check_odd_prime(p)
    counts = [0] * p
    for x in range(1, p):
        counts[(a * x) % p] += legendre(x, p)
    return CyclotomicSum(p, counts)
