"""Regular semisimple classes of SL(2, F) and the depth domains they live in.

A class is described by its torus type, the sign s in {+1, -1} for which
s*y is topologically unipotent, and m = val(1 - s*alpha) where alpha is an
eigenvalue (valued in the quadratic extension for elliptic tori, so m is a
half-integer in the ramified case).  Strongly regular classes have m = 0, and
non-compact split classes remember the valuation of alpha instead.

Canonical strings::

    split:+1:m=2        ram:-1:m=3/2        unram:sr:u=2
    split:+1:m=1:u=6    split:sr:u=2        split:nc:v=1
"""

from __future__ import annotations

import enum
import math
import re
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterator, Optional, Union

from .qfield import check_odd_prime, legendre


class ConvergenceError(ValueError):
    """The exponential series does not converge at the requested depth."""


@dataclass(frozen=True, order=True)
class Depth:
    """A depth d in (1/2)N, stored as the integer 2d."""

    twice: int

    def __post_init__(self):
        if self.twice < 0:
            raise ValueError("depth must be non-negative")

    @classmethod
    def of(cls, d: Union[int, Fraction, str, "Depth"]) -> Depth:
        if isinstance(d, Depth):
            return d
        x = Fraction(d)
        if (2 * x).denominator != 1:
            raise ValueError(f"depth {d} is not a half-integer")
        return cls(int(2 * x))

    @property
    def value(self) -> Fraction:
        return Fraction(self.twice, 2)

    @property
    def is_integral(self) -> bool:
        return self.twice % 2 == 0

    def __str__(self):
        return str(self.value)


def depths_upto(d_max) -> list[Depth]:
    return [Depth(t) for t in range(Depth.of(d_max).twice + 1)]


class TorusType(enum.Enum):
    SPLIT = "split"
    UNRAMIFIED = "unram"
    RAMIFIED = "ram"

    @property
    def rank(self) -> int:
        return ("split", "unram", "ram").index(self.value)


class CompactPart(enum.Enum):
    TOP_UNIPOTENT = "top-unipotent"
    MINUS_TOP_UNIPOTENT = "minus-top-unipotent"
    STRONGLY_REGULAR = "strongly-regular"
    NON_COMPACT = "non-compact"


@dataclass(frozen=True)
class QPower:
    """coefficient * q**exponent with a half-integral exponent, kept exact.

    The integral part of the exponent is folded into the coefficient, so equal
    numbers have equal fields.

    >>> QPower(3, 2, Fraction(3, 2))
    QPower(q=3, coefficient=Fraction(6, 1), exponent=Fraction(1, 2))
    """

    q: int
    coefficient: Fraction
    exponent: Fraction

    def __post_init__(self):
        e = Fraction(self.exponent)
        if (2 * e).denominator != 1:
            raise ValueError("exponent must be a half-integer")
        whole = math.floor(e)
        object.__setattr__(self, "coefficient", Fraction(self.coefficient) * Fraction(self.q) ** whole)
        object.__setattr__(self, "exponent", e - whole)

    def __mul__(self, other) -> QPower:
        if isinstance(other, QPower):
            return QPower(self.q, self.coefficient * other.coefficient, self.exponent + other.exponent)
        return QPower(self.q, self.coefficient * Fraction(other), self.exponent)

    __rmul__ = __mul__

    def is_rational(self) -> bool:
        return self.exponent == 0 or self.coefficient == 0

    def to_fraction(self) -> Fraction:
        if not self.is_rational():
            raise ValueError(f"{self} is irrational")
        return self.coefficient

    def __float__(self):
        return float(self.coefficient) * self.q ** float(self.exponent)

    def __str__(self):
        if self.is_rational():
            return str(self.coefficient)
        # print with exponent -1/2, which is the natural form for norms
        c = self.coefficient * self.q
        return f"{self.q}^(-1/2)" if c == 1 else f"{c}*{self.q}^(-1/2)"


@dataclass(frozen=True)
class RegSSClass:
    torus: TorusType
    sign: int  # +1 or -1; 0 for strongly regular and non-compact classes
    m: Fraction = Fraction(0)
    residue: Optional[int] = None
    eig_valuation: int = 0  # val(alpha) for non-compact split classes

    def __post_init__(self):
        object.__setattr__(self, "m", Fraction(self.m))
        m = self.m
        if self.eig_valuation:
            if self.torus is not TorusType.SPLIT or self.sign != 0 or m != 0:
                raise ValueError("only split classes can be non-compact")
            if self.eig_valuation < 0:
                object.__setattr__(self, "eig_valuation", -self.eig_valuation)
            return
        if self.sign == 0:
            if m != 0 or self.torus is TorusType.RAMIFIED:
                raise ValueError("strongly regular classes have m = 0 and are not ramified")
            return
        if self.sign not in (1, -1):
            raise ValueError("sign must be +1, -1 or 0")
        if self.torus is TorusType.RAMIFIED:
            if m <= 0 or m.denominator != 2:
                raise ValueError("ramified m must lie in Z + 1/2 and be positive")
        elif m <= 0 or m.denominator != 1:
            raise ValueError("split and unramified m must be a positive integer")

    # constructors

    @classmethod
    def top(cls, torus: Union[TorusType, str], m, sign: int = 1, residue: Optional[int] = None) -> RegSSClass:
        return cls(TorusType(torus), sign, Fraction(m), residue)

    @classmethod
    def strongly_regular(cls, torus: Union[TorusType, str], residue: Optional[int] = None) -> RegSSClass:
        return cls(TorusType(torus), 0, Fraction(0), residue)

    @classmethod
    def non_compact(cls, valuation: int = 1) -> RegSSClass:
        if valuation == 0:
            raise ValueError("a non-compact class has an eigenvalue of nonzero valuation")
        return cls(TorusType.SPLIT, 0, Fraction(0), None, valuation)

    # derived data

    @property
    def compact(self) -> bool:
        return self.eig_valuation == 0

    @property
    def strongly_regular_flag(self) -> bool:
        return self.compact and self.m == 0

    @property
    def elliptic(self) -> bool:
        return self.torus is not TorusType.SPLIT

    def with_m(self, m) -> RegSSClass:
        return RegSSClass(self.torus, self.sign, Fraction(m), None)

    def canonical(self) -> str:
        t = self.torus.value
        if not self.compact:
            return f"{t}:nc:v={self.eig_valuation}"
        if self.sign == 0:
            return f"{t}:sr" + ("" if self.residue is None else f":u={self.residue}")
        s = f"{t}:{'+1' if self.sign == 1 else '-1'}:m={self.m}"
        return s if self.residue is None else s + f":u={self.residue}"

    def __str__(self):
        return self.canonical()

    def sort_key(self):
        if not self.compact:
            return (self.torus.rank, 3, Fraction(self.eig_valuation), -1)
        sign_rank = {1: 0, -1: 1, 0: 2}[self.sign]
        return (self.torus.rank, sign_rank, self.m, -1 if self.residue is None else self.residue)


_CLASS_RE = re.compile(
    r"^(split|unram|ram):(?:([+-]1):m=(\d+(?:/2)?)|sr|nc:v=(\d+))(?::u=(\d+))?$"
)


def parse_class(text: str) -> RegSSClass:
    """Inverse of RegSSClass.canonical."""
    match = _CLASS_RE.match(text.strip())
    if not match:
        raise ValueError(f"cannot parse class descriptor {text!r}")
    torus, sign, m, v, u = match.groups()
    residue = None if u is None else int(u)
    if v is not None:
        if residue is not None or torus != "split":
            raise ValueError("non-compact classes are split and carry no residue")
        return RegSSClass.non_compact(int(v))
    if sign is None:
        return RegSSClass.strongly_regular(torus, residue)
    return RegSSClass.top(torus, Fraction(m), int(sign), residue)


def compact_partition(c: RegSSClass) -> CompactPart:
    if not c.compact:
        return CompactPart.NON_COMPACT
    if c.m == 0:
        return CompactPart.STRONGLY_REGULAR
    return CompactPart.TOP_UNIPOTENT if c.sign == 1 else CompactPart.MINUS_TOP_UNIPOTENT


def is_top_unipotent(c: RegSSClass) -> bool:
    return compact_partition(c) is CompactPart.TOP_UNIPOTENT


def norm_alpha_diff(c: RegSSClass, q: int) -> QPower:
    """|alpha - alpha^{-1}| = q^{-m}; 1 for strongly regular classes."""
    if not c.compact:
        raise ValueError("norm_alpha_diff is only defined on compact classes")
    return QPower(q, Fraction(1), -c.m)


def utop_threshold(torus: TorusType, d: Depth) -> Fraction:
    """Smallest m with val(1 - alpha) = m landing in U^top_{d+}."""
    x = d.value
    if torus is TorusType.RAMIFIED:
        return Fraction(math.floor(x - Fraction(1, 2)) + 1) + Fraction(1, 2)
    return Fraction(math.floor(x) + 1)


def in_utop_domain(c: RegSSClass, d) -> bool:
    d = Depth.of(d)
    return is_top_unipotent(c) and c.m >= utop_threshold(c.torus, d)


# Lie algebra side

SQUARE_UNIT = "square-unit"
NONSQUARE_UNIT = "nonsquare-unit"
ODD_VALUATION = "odd-valuation"


def lie_class_of(det_valuation, square_class: str, p: int) -> RegSSClass:
    """Class of exp(Y) for a regular topologically nilpotent Y in sl(2, F).

    ``det_valuation`` is val(det Y) and ``square_class`` describes -det(Y).
    """
    check_odd_prime(p)
    m = Fraction(det_valuation) / 2
    if m <= 0:
        raise ConvergenceError("Y is not topologically nilpotent")
    # exp converges for eigenvalue valuation > 1/(p - 1)
    if m <= Fraction(1, p - 1):
        raise ConvergenceError(f"exp does not converge at depth {m} for p={p}")
    if square_class == ODD_VALUATION:
        if m.denominator != 2:
            raise ValueError("odd-valuation square class with even valuation")
        return RegSSClass.top(TorusType.RAMIFIED, m)
    if m.denominator != 1:
        raise ValueError("odd valuation must use the odd-valuation square class")
    if square_class == SQUARE_UNIT:
        return RegSSClass.top(TorusType.SPLIT, m)
    if square_class == NONSQUARE_UNIT:
        return RegSSClass.top(TorusType.UNRAMIFIED, m)
    raise ValueError(f"unknown square class {square_class!r}")


def valuation(x: Fraction, p: int) -> int:
    if x == 0:
        raise ValueError("valuation of 0")
    x = Fraction(x)
    v, num, den = 0, x.numerator, x.denominator
    while num % p == 0:
        num //= p
        v += 1
    while den % p == 0:
        den //= p
        v -= 1
    return v


def square_class_of(x: Fraction, p: int) -> tuple[int, str]:
    """(val(x), square class) of a nonzero rational read in Q_p."""
    v = valuation(x, p)
    if v % 2:
        return v, ODD_VALUATION
    unit = Fraction(x) / Fraction(p) ** v
    residue = unit.numerator * pow(unit.denominator, -1, p)
    return v, SQUARE_UNIT if legendre(residue, p) == 1 else NONSQUARE_UNIT


# grids


def split_sr_residues(q: int) -> list[int]:
    """One residue per split strongly regular class (alpha ~ alpha^{-1})."""
    return [u for u in range(2, q - 1) if u <= pow(u, -1, q)]


def unram_sr_exponents(q: int) -> list[int]:
    """Torus exponents k with beta^k regular, one per pair {k, -k}."""
    return list(range(1, (q + 1) // 2))


def class_grid(q: int, d_max, include_sentinels: bool = True) -> list[RegSSClass]:
    """Verification grid, sorted canonically.

    Split and unramified m run over 1..floor(d_max)+3, ramified m over
    1/2..d_max+5/2, both signs; sentinels add strongly regular and
    non-compact classes.
    """
    d = Depth.of(d_max).value
    out = []
    for torus in (TorusType.SPLIT, TorusType.UNRAMIFIED):
        for m in range(1, math.floor(d) + 4):
            for sign in (1, -1):
                out.append(RegSSClass(torus, sign, Fraction(m)))
    m = Fraction(1, 2)
    while m <= d + Fraction(5, 2):
        for sign in (1, -1):
            out.append(RegSSClass(TorusType.RAMIFIED, sign, m))
        m += 1
    if include_sentinels:
        out += [RegSSClass.strongly_regular(TorusType.SPLIT, u) for u in split_sr_residues(q)]
        out += [RegSSClass.strongly_regular(TorusType.UNRAMIFIED, k) for k in unram_sr_exponents(q)]
        out += [RegSSClass.non_compact(1), RegSSClass.non_compact(2)]
    return sorted(out, key=RegSSClass.sort_key)


def iter_top_unipotent(grid) -> Iterator[RegSSClass]:
    return (c for c in grid if is_top_unipotent(c))
