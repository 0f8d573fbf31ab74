"""Exact truncated-lattice Fourier transforms on sl(2, F), F = Q_p.

The principal value integral

    FT(1_{g_r})(Y) = lim_l  integral over T_l of psi(tr(X Y)) 1_{g_r}(X) dX,
    T_l = {X = [[a, b], [c, -a]] : a, b, c in p^-l Z_p},

is computed at each level l by summing over T_l modulo p^s.  Coordinates are
stored as integers alpha = p^l a mod p^(l+s), each cell has Haar measure
p^(-3s) (meas(Z_p) = 1 per coordinate), and psi has conductor pZ_p:
psi(x) = exp(2 pi i frac(x / p)).  For s large enough both the indicator
val(det X) >= 2r and the phase are constant on cells, so the sum is the exact
integral, accumulated as an integer histogram of phases.
"""

from __future__ import annotations

import math
import os
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional, Sequence

import numpy as np

from .classes import ConvergenceError, Depth, RegSSClass, lie_class_of, square_class_of, valuation
from .projectors import sigma
from .qfield import CyclotomicSum, check_odd_prime

DEFAULT_BUDGET = 10**8
BUDGET_ENV = "BERNSTEIN_BUDGET"


class BudgetExceeded(RuntimeError):
    def __init__(self, required: int, budget: int):
        super().__init__(f"evaluation needs {required} lattice points, budget is {budget}")
        self.required = required
        self.budget = budget


class PrecisionError(ValueError):
    """The residual precision s is too small for a coset-stable answer."""


def point_budget(budget: Optional[int] = None) -> int:
    if budget is not None:
        return int(budget)
    env = os.environ.get(BUDGET_ENV)
    return int(env) if env else DEFAULT_BUDGET


def _to_residue(x: Fraction, modulus: int) -> int:
    """A p-integral rational reduced modulo a power of p."""
    x = Fraction(x)
    return x.numerator * pow(x.denominator, -1, modulus) % modulus


@dataclass(frozen=True)
class LieTarget:
    """Y = [[A, B], [C, -A]] with rational entries, read p-adically."""

    p: int
    A: Fraction
    B: Fraction
    C: Fraction

    def __post_init__(self):
        check_odd_prime(self.p)
        for name in "ABC":
            object.__setattr__(self, name, Fraction(getattr(self, name)))

    @classmethod
    def anti_diagonal(cls, p: int, B, C) -> LieTarget:
        return cls(p, Fraction(0), Fraction(B), Fraction(C))

    @classmethod
    def from_entries(cls, p: int, a, b, c, d) -> LieTarget:
        if Fraction(a) + Fraction(d) != 0:
            raise ValueError("Y must have trace zero")
        return cls(p, Fraction(a), Fraction(b), Fraction(c))

    @property
    def entries(self) -> tuple[Fraction, Fraction, Fraction, Fraction]:
        return (self.A, self.B, self.C, -self.A)

    @property
    def det(self) -> Fraction:
        return -(self.A * self.A + self.B * self.C)

    @property
    def v(self) -> int:
        """max(-val) over the nonzero entries."""
        vals = [-valuation(x, self.p) for x in (self.A, self.B, self.C) if x != 0]
        if not vals:
            raise ValueError("Y = 0")
        return max(vals)

    def is_regular(self) -> bool:
        return self.det != 0

    def scaled(self, factor) -> LieTarget:
        f = Fraction(factor)
        return LieTarget(self.p, self.A * f, self.B * f, self.C * f)

    def conjugate(self, g: Sequence[Sequence[int]]) -> LieTarget:
        """g Y g^-1 for an integer matrix g of determinant 1."""
        (w, x), (y, z) = g
        if w * z - x * y != 1:
            raise ValueError("g must have determinant 1")
        A, B, C = self.A, self.B, self.C
        # g Y
        a, b, c, d = w * A + x * C, w * B - x * A, y * A + z * C, y * B - z * A
        # (g Y) g^-1 with g^-1 = [[z, -x], [-y, w]]
        return LieTarget(self.p, a * z - b * y, -a * x + b * w, c * z - d * y)

    def class_of_exp(self) -> RegSSClass:
        if not self.is_regular():
            raise ValueError("Y is not regular")
        v, square_class = square_class_of(-self.det, self.p)
        return lie_class_of(v, square_class, self.p)

    def __str__(self):
        return f"[[{self.A}, {self.B}], [{self.C}, {-self.A}]]"


def _twice(r) -> int:
    t = Fraction(r) * 2
    if t.denominator != 1:
        raise ValueError(f"r = {r} is not a half-integer")
    return int(t)


def required_precision(Y: LieTarget, ell: int, r=0) -> int:
    """Smallest s making the indicator and the phase constant on p^s-cells."""
    return max(ell + _twice(r), Y.v + 1, -ell)


def indicator_g_r(X: LieTarget, r, ell: Optional[int] = None, s: Optional[int] = None) -> bool:
    """val(det X) >= 2r.

    If X is only known modulo p^s with entries in p^-ell Z_p, the answer is
    refused unless it is the same for every point of the cell.
    """
    two_r = _twice(r)
    if s is not None:
        ell = 0 if ell is None else ell
        if min(s - ell, 2 * s) < two_r:
            raise PrecisionError(f"precision s={s} at level {ell} cannot decide val(det) >= {two_r}")
    if X.det == 0:
        return True
    return valuation(X.det, X.p) >= two_r


@dataclass(frozen=True)
class TruncatedLattice:
    p: int
    ell: int
    s: int

    @property
    def side(self) -> int:
        return self.p ** (self.ell + self.s)

    @property
    def point_count(self) -> int:
        return self.side**3

    @property
    def weight(self) -> Fraction:
        return Fraction(self.p) ** (-3 * self.s)


def lattice_integral(
    Y: LieTarget,
    ell: int,
    r=0,
    s: Optional[int] = None,
    method: str = "auto",
    budget: Optional[int] = None,
) -> CyclotomicSum:
    """Exact integral of psi(tr(XY)) over {X in T_ell : val(det X) >= 2r}.

    ``method`` is "full" (sum over all three coordinates), "marginal" (for
    anti-diagonal Y: sums out the diagonal coordinate with a square-root
    count table) or "auto" (marginal when available).
    """
    p = Y.p
    if not Y.is_regular():
        raise ValueError("Y must be regular semisimple")
    if ell < 0:
        raise ValueError("truncation level must be non-negative")
    need = required_precision(Y, ell, r)
    s = need if s is None else s
    if s < need:
        raise PrecisionError(f"s={s} is below the required precision {need}")
    if method == "auto":
        method = "marginal" if Y.A == 0 else "full"
    if method == "marginal" and Y.A != 0:
        raise ValueError("the marginal path needs an anti-diagonal Y")
    if method not in ("full", "marginal"):
        raise ValueError(f"unknown method {method!r}")

    lattice = TruncatedLattice(p, ell, s)
    n = lattice.side
    required = n**3 if method == "full" else n * n
    cap = point_budget(budget)
    if required > cap:
        raise BudgetExceeded(required, cap)

    K = 2 * ell + _twice(r)  # X in g_r  <=>  alpha^2 + beta gamma = 0 mod p^K
    pK = p ** max(K, 0)
    M = max(ell + Y.v + 1, 1)
    pm = p**M
    # tr(XY) p^(M-1) = (2 A alpha + C beta + B gamma) p^(M-1-ell)
    shift = Fraction(p) ** (M - 1 - ell)
    cA = _to_residue(2 * Y.A * shift, pm)
    cB = _to_residue(Y.B * shift, pm)
    cC = _to_residue(Y.C * shift, pm)

    hist = np.zeros(pm, dtype=np.int64)
    idx = np.arange(n, dtype=np.int64)
    if method == "full":
        bg = np.multiply.outer(idx, idx) % pK
        phase0 = (np.multiply.outer(idx * cC, np.ones(n, dtype=np.int64)) + idx * cB) % pm
        for alpha in range(n):
            mask = (bg + alpha * alpha) % pK == 0
            ph = (phase0[mask] + alpha * cA) % pm
            hist += np.bincount(ph, minlength=pm)
    else:
        roots = np.bincount(idx[: pK] ** 2 % pK, minlength=pK) if K > 0 else np.array([1])
        mult = p ** (ell + s - max(K, 0))
        rows = max(1, (1 << 20) // n)
        for start in range(0, n, rows):
            beta = idx[start : start + rows]
            bg = np.multiply.outer(beta, idx) % pK
            w = roots[(-bg) % pK]
            ph = (np.multiply.outer(beta * cC, np.ones(n, dtype=np.int64)) + idx * cB) % pm
            for value in np.unique(w):
                if value:
                    hist += int(value) * np.bincount(ph[w == value], minlength=pm)
        hist *= mult
    return CyclotomicSum(pm, hist.tolist(), lattice.weight)


def ft_g0(Y: LieTarget, ell: int, s: Optional[int] = None, method: str = "auto", budget: Optional[int] = None) -> CyclotomicSum:
    return lattice_integral(Y, ell, 0, s, method, budget)


def _ell_floor(Y: LieTarget) -> int:
    return max(0, math.ceil(Fraction(valuation(Y.det, Y.p), 2)))


@dataclass
class Stabilization:
    values: list[tuple[int, CyclotomicSum]] = field(default_factory=list)
    value: Optional[CyclotomicSum] = None
    ell_at_stability: Optional[int] = None
    stop_reason: str = ""
    budget_refusal: Optional[BudgetExceeded] = None

    @property
    def stabilized(self) -> bool:
        return self.value is not None


def ft_stabilize(
    Y: LieTarget,
    ell_max: int,
    r=0,
    ell_min: Optional[int] = None,
    method: str = "auto",
    budget: Optional[int] = None,
) -> Stabilization:
    """Sweep truncation levels until two consecutive exact values agree.

    The sweep starts at ceil(val(det Y) / 2) unless ell_min is given.  A
    budget refusal at a level ends the sweep; without two equal consecutive
    values the result is inconclusive (value None).
    """
    result = Stabilization()
    start = _ell_floor(Y) if ell_min is None else ell_min
    for ell in range(start, max(ell_max, start + 1) + 1):
        try:
            v = lattice_integral(Y, ell, r, None, method, budget)
        except BudgetExceeded as exc:
            result.stop_reason = str(exc)
            result.budget_refusal = exc
            if not result.values:
                raise
            break
        if result.values and result.values[-1][1] == v:
            result.value = v
            result.ell_at_stability = result.values[-1][0]
            result.values.append((ell, v))
            return result
        result.values.append((ell, v))
    if not result.stop_reason:
        result.stop_reason = "no two consecutive levels agree"
    return result


def _scaling(k) -> tuple[int, Fraction]:
    """g_{-k} = p^-j g_r with j = ceil(k), r = j - k in {0, 1/2}."""
    k = Depth.of(k).value
    j = math.ceil(k)
    return j, j - k


def ft_g_minus_k(
    k,
    Y: LieTarget,
    ell: int,
    s: Optional[int] = None,
    method: str = "auto",
    budget: Optional[int] = None,
) -> CyclotomicSum:
    """FT(1_{g_-k})(Y) at level ell via FT(1_{g_-k})(Y) = p^(3j) FT(1_{g_r})(p^-j Y).

    Level ell here is the truncation level of the rescaled integral.
    """
    j, r = _scaling(k)
    return lattice_integral(Y.scaled(Fraction(1, Y.p**j)), ell, r, s, method, budget) * Fraction(Y.p) ** (3 * j)


def ft_g_minus_k_direct(
    k,
    Y: LieTarget,
    ell: int,
    s: Optional[int] = None,
    method: str = "auto",
    budget: Optional[int] = None,
) -> CyclotomicSum:
    """Direct truncation of {X : val(det X) >= -2k} at level ell."""
    return lattice_integral(Y, ell, -Depth.of(k).value, s, method, budget)


@dataclass
class KimCase:
    p: int
    d: Depth
    Y: LieTarget
    exp_class: RegSSClass
    sigma_value: Fraction
    ft_value: Optional[Fraction]
    stabilization: Stabilization
    ratio: Optional[Fraction] = None

    @property
    def both_zero(self) -> bool:
        return self.sigma_value == 0 and self.ft_value == 0

    def to_json(self) -> dict:
        return {
            "p": self.p,
            "d": str(self.d),
            "Y": str(self.Y),
            "class": self.exp_class.canonical(),
            "sigma": str(self.sigma_value),
            "ft": None if self.ft_value is None else str(self.ft_value),
            "ft_stabilized_at": self.stabilization.ell_at_stability,
            "ratio": None if self.ratio is None else str(self.ratio),
        }


def kim_check(d, Y: LieTarget, ell_max: int, budget: Optional[int] = None) -> KimCase:
    """Compare sigma_d(exp Y) with the stabilized FT(1_{g_-d})(Y)."""
    d = Depth.of(d)
    p = Y.p
    cls = Y.class_of_exp()  # raises ConvergenceError outside the exp domain
    j, r = _scaling(d)
    Z = Y.scaled(Fraction(1, p**j))
    stab = ft_stabilize(Z, ell_max, r, budget=budget)
    ft_value = None
    if stab.stabilized:
        value = (stab.value * Fraction(p) ** (3 * j)).to_rational()
        ft_value = value
    s_value = sigma(d, cls, p)
    case = KimCase(p, d, Y, cls, s_value, ft_value, stab)
    if ft_value not in (None, 0) and s_value != 0:
        case.ratio = s_value / ft_value
    return case


@dataclass
class KimSummary:
    cases: list[KimCase]
    constant: Optional[Fraction]
    passed: bool
    detail: str
    inconclusive: list[KimCase] = field(default_factory=list)


def kim_constant(cases: Sequence[KimCase]) -> KimSummary:
    """sigma = c * FT with one constant c for every case; vanishing cases must vanish on both sides.

    Cases whose FT did not stabilize within budget are set aside as
    inconclusive; they neither confirm nor refute the constant.
    """
    constant = None
    pending = [c for c in cases if c.ft_value is None]
    for case in cases:
        if case.ft_value is None or case.both_zero:
            continue
        if case.ratio is None:
            return KimSummary(list(cases), constant, False, f"one side vanishes alone at Y={case.Y}", pending)
        if constant is None:
            constant = case.ratio
        elif case.ratio != constant:
            return KimSummary(list(cases), constant, False, f"constant {case.ratio} != {constant} at Y={case.Y}", pending)
    detail = "ok" if not pending else f"{len(pending)} inconclusive"
    return KimSummary(list(cases), constant, True, detail, pending)


__all__ = [
    "BudgetExceeded",
    "ConvergenceError",
    "KimCase",
    "LieTarget",
    "PrecisionError",
    "Stabilization",
    "TruncatedLattice",
    "ft_g0",
    "ft_g_minus_k",
    "ft_g_minus_k_direct",
    "ft_stabilize",
    "indicator_g_r",
    "kim_check",
    "kim_constant",
    "lattice_integral",
    "point_budget",
    "required_precision",
]
