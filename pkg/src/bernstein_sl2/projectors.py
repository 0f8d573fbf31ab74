"""Values of Bernstein projectors of SL(2, F) on regular semisimple classes.

Everything is normalized by meas(SL(2, R_F)) = 1, and every value returned
here is an exact Fraction, except single-character principal series values,
which are CyclotomicSums.  All projectors vanish on non-compact classes.

Depth sums are built from three sources and checked against each other:

* closed forms for e_d (principal series, cuspidal, half-integral depth);
* brute-force sums over characters of (Z/p^f)^x and over the cuspidal
  characters of SL(2, F_q);
* the closed form for the cumulative projector sigma_d.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import Optional, Sequence, Union

from .classes import (
    CompactPart,
    Depth,
    QPower,
    RegSSClass,
    TorusType,
    class_grid,
    compact_partition,
    depths_upto,
    in_utop_domain,
    is_top_unipotent,
)
from .qfield import CyclotomicSum, check_odd_prime, legendre
from .sl2fq import cuspidal_char, cuspidal_sum_on_torus, elliptic_psi_sums, ramified_psi_sum

Value = Union[Fraction, CyclotomicSum]


def _q_pow(q: int, e: Fraction) -> Fraction:
    e = Fraction(e)
    if e.denominator != 1:
        raise ValueError(f"q-exponent {e} is not integral")
    return Fraction(q) ** int(e)


def _inv_norm(c: RegSSClass, q: int) -> Fraction:
    """1 / |alpha - alpha^{-1}| = q^m."""
    return _q_pow(q, c.m)


# characters of R^x trivial on 1 + p^f


@lru_cache(maxsize=None)
def primitive_root(p: int) -> int:
    """Smallest g generating (Z/p^f)^x for every f >= 1."""
    check_odd_prime(p)
    prime_factors = [r for r in range(2, p) if (p - 1) % r == 0 and all(r % s for s in range(2, r))]
    for g in range(2, p * p):
        if g % p == 0:
            continue
        if all(pow(g, (p - 1) // r, p) != 1 for r in prime_factors) and pow(g, p - 1, p * p) != 1:
            return g
    raise AssertionError("unreachable")


@lru_cache(maxsize=None)
def _discrete_log(p: int, f: int) -> dict[int, int]:
    g, mod = primitive_root(p), p**f
    table, x = {}, 1
    for k in range(p ** (f - 1) * (p - 1)):
        table[x] = k
        x = x * g % mod
    return table


@dataclass(frozen=True)
class ResidueCharacter:
    """chi(g^k) = zeta_n^(e k) on (Z/p^f)^x, n = p^(f-1) (p-1)."""

    p: int
    f: int
    e: int

    def __post_init__(self):
        if self.f < 1:
            raise ValueError("conductor exponent must be at least 1")
        object.__setattr__(self, "e", self.e % self.order)

    @property
    def order(self) -> int:
        return self.p ** (self.f - 1) * (self.p - 1)

    @property
    def generator(self) -> int:
        return primitive_root(self.p)

    def exponent_at(self, r: int) -> int:
        r %= self.p**self.f
        if r % self.p == 0:
            raise ValueError(f"{r} is not a unit mod {self.p}^{self.f}")
        return self.e * _discrete_log(self.p, self.f)[r] % self.order

    def __call__(self, r: int) -> CyclotomicSum:
        return CyclotomicSum.root(self.exponent_at(r), self.order)

    def inverse(self) -> ResidueCharacter:
        return ResidueCharacter(self.p, self.f, -self.e)

    def has_exact_conductor(self) -> bool:
        if self.f == 1:
            return self.e != 0
        # 1 + p^(f-1) is generated by g^(n/p)
        return self.e % self.p != 0

    def is_regular(self) -> bool:
        return (2 * self.e) % self.order != 0


def regular_pairs(p: int, f: int) -> list[ResidueCharacter]:
    """One character from each pair {chi, chi^-1} of regular characters of exact conductor p^f."""
    n = p ** (f - 1) * (p - 1)
    out = []
    for e in range(n):
        chi = ResidueCharacter(p, f, e)
        if chi.has_exact_conductor() and chi.is_regular() and e < (-e) % n:
            out.append(chi)
    return out


def sgn_character(p: int) -> ResidueCharacter:
    return ResidueCharacter(p, 1, (p - 1) // 2)


def residue_consistent(c: RegSSClass, r: int, p: int, f: int) -> bool:
    """Is r mod p^f the residue of an eigenvalue of a split compact class c?"""
    mod = p**f
    r %= mod
    if r % p == 0:
        return False
    if c.sign == 0:
        return r % p not in (1, p - 1)
    t = (c.sign * r - 1) % mod
    if c.m >= f:
        return t == 0
    return t % p ** int(c.m) == 0 and t % p ** (int(c.m) + 1) != 0


def residue_representatives(c: RegSSClass, p: int, f: int) -> list[int]:
    """All residues mod p^f compatible with c (and with c.residue if it is set)."""
    out = [r for r in range(1, p**f) if residue_consistent(c, r, p, f)]
    if c.residue is not None:
        out = [r for r in out if (r - c.residue) % p == 0]
    return out


def _split_residue(c: RegSSClass, p: int, f: int) -> int:
    if c.residue is not None:
        if not residue_consistent(c, c.residue, p, f):
            raise ValueError(f"residue {c.residue} does not match class {c}")
        return c.residue % p**f
    if c.sign == 0:
        raise ValueError(f"split class {c} needs residue data")
    reps = residue_representatives(c, p, f)
    return reps[0]


def _split_compact(c: RegSSClass) -> bool:
    return c.compact and c.torus is TorusType.SPLIT


# principal series


def ps_regular(chi: ResidueCharacter, c: RegSSClass, q: Optional[int] = None) -> CyclotomicSum:
    """(q+1) q^d (chi(alpha) + chi(alpha^-1)) / |alpha - alpha^-1| with d = f - 1."""
    q = chi.p if q is None else q
    if not chi.is_regular():
        raise ValueError("ps_regular needs a regular character")
    if not _split_compact(c):
        return CyclotomicSum.zero(chi.order)
    if c.residue is None and len(residue_representatives(c, chi.p, chi.f)) != 1:
        raise ValueError(f"split class {c} needs residue data mod {chi.p}^{chi.f}")
    r = _split_residue(c, chi.p, chi.f)
    j = chi.exponent_at(r)
    scale = (q + 1) * Fraction(q) ** (chi.f - 1) * _inv_norm(c, q)
    return CyclotomicSum.from_exponents([j, -j], chi.order, scale)


def ps_sgn(c: RegSSClass, q: int) -> Fraction:
    if not _split_compact(c):
        return Fraction(0)
    if c.sign == 0:
        if c.residue is None:
            raise ValueError(f"split class {c} needs residue data")
        s = legendre(c.residue, q)
    else:
        s = legendre(c.sign, q)
    return (q + 1) * s * _inv_norm(c, q)


def ps_unramified(c: RegSSClass, q: int) -> Fraction:
    if not c.compact:
        return Fraction(0)
    if c.torus is TorusType.SPLIT:
        return 2 * q * _inv_norm(c, q) - (q - 1)
    return Fraction(-(q - 1))


def ps_depth_sum(d, c: RegSSClass, q: int) -> Fraction:
    """e^PS_d: sum of the principal series projectors of depth d."""
    d = Depth.of(d)
    if not d.is_integral:
        raise ValueError("principal series components have integral depth")
    part = compact_partition(c)
    if part is CompactPart.NON_COMPACT:
        return Fraction(0)
    if d.twice == 0:
        if c.torus is not TorusType.SPLIT:
            return Fraction(-(q - 1))
        if part is CompactPart.TOP_UNIPOTENT:
            return (q - 1) * ((q + 2) * _inv_norm(c, q) - 1)
        if part is CompactPart.MINUS_TOP_UNIPOTENT:
            return (q - 1) * (_inv_norm(c, q) - 1)
        return Fraction(0)
    k = d.twice // 2
    if c.torus is not TorusType.SPLIT or part is not CompactPart.TOP_UNIPOTENT:
        return Fraction(0)
    base = (q + 1) * Fraction(q) ** k * (q - 1) * Fraction(q) ** (k - 1)
    if c.m >= k + 1:
        return base * (q - 1) * _inv_norm(c, q)
    if c.m == k:
        return base * -Fraction(q) ** k
    return Fraction(0)


def ps_depth_sum_oracle(d, c: RegSSClass, q: int, residue: Optional[int] = None) -> Fraction:
    """e^PS_d as an explicit sum over principal series components.

    Depth d >= 1 sums ps_regular over the regular pairs of conductor p^(d+1);
    depth 0 adds the unramified and sgn components to the conductor-p pairs.
    ``residue`` (mod p^(d+1)) picks the eigenvalue residue for split classes.
    """
    d = Depth.of(d)
    if not d.is_integral:
        raise ValueError("principal series components have integral depth")
    f = d.twice // 2 + 1
    n = q ** (f - 1) * (q - 1)
    total = Fraction(0)
    if _split_compact(c):
        r = _split_residue(c, q, f) if residue is None else residue % q**f
        if not residue_consistent(c, r, q, f):
            raise ValueError(f"residue {r} does not match class {c}")
        # every ps_regular term at this class shares the scale (q+1) q^d q^m,
        # so the sum is one histogram of the exponents +-j
        counts = [0] * n
        for chi in regular_pairs(q, f):
            j = chi.exponent_at(r)
            counts[j] += 1
            counts[-j % n] += 1
        value = CyclotomicSum(n, counts, (q + 1) * Fraction(q) ** (f - 1) * _inv_norm(c, q)).to_rational()
        if value is None:
            raise AssertionError(f"character sum at {c} is not rational")
        total += value
        if f == 1:
            total += ps_sgn(RegSSClass(c.torus, c.sign, c.m, r), q)
    if f == 1:
        total += ps_unramified(c, q)
    return total


# depth-zero cuspidal part


@dataclass(frozen=True)
class CuspidalPairSums:
    """Theta_i + Theta_i' at a class, for i = 1..q."""

    q: int
    pair_sums: tuple[Value, ...]
    source: str = ""

    def weighted_total(self) -> Fraction:
        """e_K + e_K' = (q-1)/2 * sum_i (Theta_i + Theta_i')."""
        total = CyclotomicSum.zero()
        for v in self.pair_sums:
            total = total + v
        value = total.to_rational()
        if value is None:
            raise AssertionError("cuspidal character sum is not rational")
        return Fraction(self.q - 1, 2) * value


def theta_cuspidal_padic(c: RegSSClass, q: int) -> CuspidalPairSums:
    """Depth-zero supercuspidal character data, per induced representation pi_i."""
    part = compact_partition(c)
    signs = [(-1) ** i for i in range(1, q + 1)]
    if part is CompactPart.NON_COMPACT:
        return CuspidalPairSums(q, tuple(Fraction(0) for _ in signs), "non-compact")
    if c.torus is TorusType.SPLIT:
        if part is CompactPart.STRONGLY_REGULAR:
            return CuspidalPairSums(q, tuple(Fraction(0) for _ in signs), "split, alpha != +-1 mod p")
        theta = _inv_norm(c, q) - 1  # Theta_i(+-y) = Theta_i'(+-y), up to the central sign
        central = [1] * q if c.sign == 1 else signs
        return CuspidalPairSums(q, tuple(2 * theta * s for s in central), "split")
    if c.torus is TorusType.RAMIFIED:
        central = [1] * q if c.sign == 1 else signs
        return CuspidalPairSums(q, tuple(Fraction(-2 * s) for s in central), "ramified")
    if part is CompactPart.STRONGLY_REGULAR:
        # y reduces to beta^k in SL(2, F_q): Theta_i(y) = chi_i(beta^k), Theta_i'(y) = 0
        k = 1 if c.residue is None else c.residue
        if k % (q + 1) in (0, (q + 1) // 2):
            raise ValueError(f"torus exponent {k} is not regular")
        return CuspidalPairSums(q, tuple(cuspidal_char(i, "beta", k, q) for i in range(1, q + 1)), "unram, beta^k")
    central = [1] * q if c.sign == 1 else signs
    return CuspidalPairSums(q, tuple(Fraction(-2 * s) for s in central), "unram")


def e_cusp_zero(c: RegSSClass, q: int) -> Fraction:
    return theta_cuspidal_padic(c, q).weighted_total()


def e0(c: RegSSClass, q: int) -> Fraction:
    """Sum of all depth-zero Bernstein projectors."""
    Q = q * q - 1
    if not is_top_unipotent(c):
        return Fraction(0)
    if c.torus is TorusType.SPLIT:
        return Q * (2 * _inv_norm(c, q) - 1)
    return Fraction(-Q)


def e0_from_components(c: RegSSClass, q: int) -> Fraction:
    return ps_depth_sum(0, c, q) + e_cusp_zero(c, q)


# positive depth


def cusp_d_integral(d, c: RegSSClass, q: int) -> Fraction:
    """e^cusp_d for integral d >= 1."""
    d = Depth.of(d)
    if not d.is_integral or d.twice == 0:
        raise ValueError("cusp_d_integral needs an integral depth d >= 1")
    k = d.twice // 2
    Q = q * q - 1
    if not is_top_unipotent(c):
        return Fraction(0)
    m, qk = c.m, Fraction(q) ** k
    lead = (q - 1) * q * Fraction(q) ** (2 * (k - 1))
    if c.torus is TorusType.SPLIT:
        return Q * lead * (_inv_norm(c, q) - qk) if m >= k + 1 else Fraction(0)
    if c.torus is TorusType.RAMIFIED:
        return Q * lead * -qk if m >= k + Fraction(1, 2) else Fraction(0)
    if m == k:
        return Q * Fraction(q) ** (3 * k - 1)
    if m >= k + 1:
        return -Q * (q - 1) * Fraction(q) ** (3 * k - 1)
    return Fraction(0)


def e_d_halfintegral(d, c: RegSSClass, q: int) -> Fraction:
    d = Depth.of(d)
    if d.is_integral:
        raise ValueError("e_d_halfintegral needs a half-integral depth")
    Q = q * q - 1
    if not is_top_unipotent(c):
        return Fraction(0)
    j = (d.twice - 1) // 2  # d - 1/2
    m, x = c.m, d.value
    tail = Q * Fraction(q) ** (3 * j)
    if c.torus is TorusType.SPLIT:
        if m >= x + Fraction(1, 2):
            return Q * (2 * (q - 1) * Fraction(q) ** (2 * j) * _inv_norm(c, q) - tail)
        return Fraction(0)
    if c.torus is TorusType.RAMIFIED:
        if m == x:
            return Q * Fraction(q) ** (3 * j)
        return -Q * tail if m > x else Fraction(0)
    return -Q * tail if m >= x + Fraction(1, 2) else Fraction(0)


def e_depth(d, c: RegSSClass, q: int) -> Fraction:
    """e_d, the sum of all Bernstein projectors of depth exactly d."""
    d = Depth.of(d)
    if d.twice == 0:
        return e0(c, q)
    if d.is_integral:
        return ps_depth_sum(d, c, q) + cusp_d_integral(d, c, q)
    return e_d_halfintegral(d, c, q)


def sigma(d, c: RegSSClass, q: int) -> Fraction:
    """sigma_d, the sum of all Bernstein projectors of depth at most d (closed form)."""
    d = Depth.of(d)
    if not in_utop_domain(c, d):
        return Fraction(0)
    Q = q * q - 1
    x = d.value
    shift = 0 if d.is_integral else Fraction(1, 2)
    scale = Q * _q_pow(q, 3 * x + shift)
    if c.torus is TorusType.SPLIT:
        return scale * (2 * _q_pow(q, c.m - x - shift) - 1)
    return -scale


def sigma_q_exponent(d) -> Fraction:
    d = Depth.of(d)
    return 3 * d.value + (0 if d.is_integral else Fraction(1, 2))


# verification helpers


@dataclass
class CaseRecord:
    inputs: dict
    expected: str
    got: str
    passed: bool
    note: str = ""

    def to_json(self) -> dict:
        out = {"inputs": self.inputs, "expected": self.expected, "got": self.got, "pass": self.passed}
        if self.note:
            out["note"] = self.note
        return out


@dataclass
class InductionReport:
    q: int
    d_max: Depth
    cases: list[CaseRecord] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.cases)

    @property
    def first_failure(self) -> Optional[CaseRecord]:
        return next((c for c in self.cases if not c.passed), None)


def verify_sigma_induction(q: int, d_max, grid: Optional[Sequence[RegSSClass]] = None) -> InductionReport:
    """Check sigma_d = sum_{k <= d} e_k at every grid class and every d <= d_max."""
    d_max = Depth.of(d_max)
    grid = class_grid(q, d_max) if grid is None else grid
    report = InductionReport(q, d_max)
    for c in grid:
        running = Fraction(0)
        terms = []
        for d in depths_upto(d_max):
            e = e_depth(d, c, q)
            running += e
            terms.append(str(e))
            s = sigma(d, c, q)
            note = "" if c.compact else "zero off the compact classes"
            report.cases.append(
                CaseRecord(
                    {"q": q, "d": str(d), "class": c.canonical(), "e_k": list(terms)},
                    str(s),
                    str(running),
                    s == running,
                    note,
                )
            )
    return report


@dataclass(frozen=True)
class CensusRecord:
    q: int
    depth: Depth
    per_vertex_count: Optional[int]
    total_count: Optional[int]
    formal_degree: QPower
    multiplicity: QPower
    classes_per_orbit: Optional[int] = None
    orbit_count: Optional[int] = None
    nondegenerate_characters: Optional[int] = None


def supercuspidal_census(d, q: int) -> CensusRecord:
    """Counts and formal degrees of supercuspidals of positive depth d (meas(K) = 1)."""
    d = Depth.of(d)
    if d.twice == 0:
        raise ValueError("depth-zero supercuspidals are the q cuspidal characters per vertex")
    if d.is_integral:
        k = d.twice // 2
        per_vertex = (q - 1) // 2 * (q + 1) * q ** (k - 1)
        return CensusRecord(
            q,
            d,
            per_vertex,
            2 * per_vertex,
            QPower(q, Fraction((q - 1) * q), k - 1),
            QPower(q, Fraction(1), k - 1),
        )
    e = d.value - Fraction(1, 2)
    return CensusRecord(
        q,
        d,
        None,
        None,
        QPower(q, Fraction((q + 1) * (q - 1), 2), e),
        QPower(q, Fraction(1), e),
        classes_per_orbit=2 * q ** int(e),
        orbit_count=2 * (q - 1),
        nondegenerate_characters=(q - 1) ** 2,
    )


UNRAMIFIED_INTEGRAL = "unramified-integral"
RAMIFIED_HALFINTEGRAL = "ramified-halfintegral"


def tau_values(kind: str, q: int) -> int:
    """Brute-force value of the elliptic character sum tau at a shell element.

    Every choice of the underlying elliptic data (z, or units u, v) must give
    the same integer, otherwise AssertionError is raised.
    """
    check_odd_prime(q)
    if kind == UNRAMIFIED_INTEGRAL:
        sums = [s for _, s in elliptic_psi_sums(q)]
    elif kind == RAMIFIED_HALFINTEGRAL:
        sums = [ramified_psi_sum(u, v, q) for u in range(1, q) for v in range(1, q)]
    else:
        raise ValueError(f"unknown kind {kind!r}")
    values = {s.to_rational() for s in sums}
    if len(values) != 1 or None in values:
        raise AssertionError(f"tau is not constant: {values}")
    value = values.pop()
    assert value.denominator == 1
    return int(value)


def cusp_unramified_shell_from_tau(d, q: int) -> Fraction:
    """e^cusp_d on the unramified m = d shell as [ZK : ZK_d] * tau."""
    k = Depth.of(d).twice // 2
    return Fraction((q + 1) * (q - 1) * q * q ** (3 * (k - 1)) * tau_values(UNRAMIFIED_INTEGRAL, q))


def unram_sr_e_cusp_zero(k: int, q: int) -> Fraction:
    """(q-1)/2 * sum_i chi_i(beta^k) from the finite-field character table."""
    s = cuspidal_sum_on_torus(k, q).to_rational()
    return Fraction(q - 1, 2) * s
