"""SL(2, F_q) and sl(2, F_q) by brute force, for small odd primes q.

Matrices are stored as integer rows (a, b, c, d) reduced mod q.  Whole-group
computations run on numpy arrays of shape (N, 4).
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

import numpy as np

from .qfield import CyclotomicSum, check_odd_prime, legendre, smallest_nonsquare

CONJUGACY_CAP = 13
ELLIPTIC_CAP = 19


class BudgetError(RuntimeError):
    """Raised when a brute-force enumeration is above its size cap."""


@dataclass(frozen=True)
class Mat2q:
    a: int
    b: int
    c: int
    d: int
    q: int

    def __post_init__(self):
        for name in "abcd":
            object.__setattr__(self, name, getattr(self, name) % self.q)

    @classmethod
    def of(cls, rows, q: int) -> Mat2q:
        (a, b), (c, d) = rows
        return cls(a, b, c, d, q)

    def __matmul__(self, other: Mat2q) -> Mat2q:
        a, b, c, d = self.entries
        e, f, g, h = other.entries
        return Mat2q(a * e + b * g, a * f + b * h, c * e + d * g, c * f + d * h, self.q)

    def __neg__(self) -> Mat2q:
        return Mat2q(-self.a, -self.b, -self.c, -self.d, self.q)

    @property
    def entries(self) -> tuple[int, int, int, int]:
        return (self.a, self.b, self.c, self.d)

    def det(self) -> int:
        return (self.a * self.d - self.b * self.c) % self.q

    def trace(self) -> int:
        return (self.a + self.d) % self.q

    def inverse(self) -> Mat2q:
        inv = pow(self.det(), -1, self.q)
        return Mat2q(self.d * inv, -self.b * inv, -self.c * inv, self.a * inv, self.q)

    def conjugate_by(self, g: Mat2q) -> Mat2q:
        return g @ self @ g.inverse()

    def power(self, k: int) -> Mat2q:
        result = identity(self.q)
        base = self if k >= 0 else self.inverse()
        for _ in range(abs(k)):
            result = result @ base
        return result

    def order(self) -> int:
        one = identity(self.q)
        x, n = self, 1
        while x != one:
            x, n = x @ self, n + 1
        return n


def identity(q: int) -> Mat2q:
    return Mat2q(1, 0, 0, 1, q)


class LieType(enum.Enum):
    ZERO = "zero"
    NILPOTENT = "nilpotent"
    SPLIT_REGULAR = "split-regular"
    ELLIPTIC = "elliptic"


def classify_lie(X: Mat2q) -> LieType:
    if X.trace() != 0:
        raise ValueError("not a trace-zero matrix")
    if X.entries == (0, 0, 0, 0):
        return LieType.ZERO
    disc = (-X.det()) % X.q  # eigenvalues are the square roots of -det
    if disc == 0:
        return LieType.NILPOTENT
    return LieType.SPLIT_REGULAR if legendre(disc, X.q) == 1 else LieType.ELLIPTIC


def enumerate_elliptic(q: int) -> list[Mat2q]:
    check_odd_prime(q)
    if q > ELLIPTIC_CAP:
        raise BudgetError(f"elliptic enumeration is capped at q <= {ELLIPTIC_CAP}")
    out = []
    for a in range(q):
        for b in range(q):
            for c in range(q):
                if legendre(a * a + b * c, q) == -1:
                    out.append(Mat2q(a, b, c, -a, q))
    return out


@lru_cache(maxsize=None)
def group_elements(q: int) -> np.ndarray:
    """All of SL(2, F_q) as an (N, 4) array, in lexicographic order."""
    r = np.arange(q)
    a, b, c, d = (x.ravel() for x in np.meshgrid(r, r, r, r, indexing="ij"))
    keep = (a * d - b * c) % q == 1
    return np.stack([a[keep], b[keep], c[keep], d[keep]], axis=1)


def _conjugates(x: tuple[int, int, int, int], G: np.ndarray, q: int) -> np.ndarray:
    """Rows g x g^{-1} for every row g of G (det g = 1, so g^{-1} = adj g)."""
    a, b, c, d = (G[:, i] for i in range(4))
    xa, xb, xc, xd = x
    # g x
    ta, tb = a * xa + b * xc, a * xb + b * xd
    tc, td = c * xa + d * xc, c * xb + d * xd
    # (g x) adj(g), adj(g) = [[d, -b], [-c, a]]
    return np.stack([ta * d - tb * c, -ta * b + tb * a, tc * d - td * c, -tc * b + td * a], axis=1) % q


def _keys(rows: np.ndarray, q: int) -> np.ndarray:
    rows = rows.astype(np.int64)
    return ((rows[:, 0] * q + rows[:, 1]) * q + rows[:, 2]) * q + rows[:, 3]


def adjoint_orbits(elements: list[Mat2q], q: int) -> list[list[Mat2q]]:
    """Partition the given Lie algebra elements into Ad(SL(2, F_q))-orbits."""
    G = group_elements(q)
    remaining = {x.entries: x for x in elements}
    orbits = []
    for key in sorted(remaining):
        if key not in remaining:
            continue
        orbit_keys = set(map(tuple, np.unique(_conjugates(key, G, q), axis=0).tolist()))
        if not orbit_keys <= remaining.keys():
            raise ValueError("element set is not closed under conjugation")
        orbits.append([remaining.pop(k) for k in sorted(orbit_keys)])
    return orbits


def parametrized_elliptic(q: int) -> set[tuple[int, int, int, int]]:
    """Ad([[a, b], [0, 1]]) [[0, 1], [u, 0]] over u non-square, a != 0, all b."""
    out = set()
    for u in range(1, q):
        if legendre(u, q) != -1:
            continue
        Z = Mat2q(0, 1, u, 0, q)
        for a in range(1, q):
            for b in range(q):
                out.add(Z.conjugate_by(Mat2q(a, b, 0, 1, q)).entries)
    return out


def elliptic_psi_sum(z: Mat2q, q: int, elliptic: list[Mat2q] | None = None) -> CyclotomicSum:
    """Sum over all elliptic e of psi(trace(z e)), exactly."""
    if classify_lie(z) is not LieType.ELLIPTIC:
        raise ValueError("z must be elliptic")
    if elliptic is None:
        elliptic = enumerate_elliptic(q)
    E = np.array([e.entries for e in elliptic], dtype=np.int64)
    traces = (z.a * E[:, 0] + z.b * E[:, 2] + z.c * E[:, 1] + z.d * E[:, 3]) % q
    return CyclotomicSum(q, np.bincount(traces, minlength=q).tolist())


def elliptic_psi_sums(q: int) -> list[tuple[Mat2q, CyclotomicSum]]:
    """elliptic_psi_sum for every elliptic z at once."""
    elliptic = enumerate_elliptic(q)
    E = np.array([e.entries for e in elliptic], dtype=np.int64)
    # trace(z e) for traceless z = [[a, b], [c, -a]]: 2 a a' + b c' + c b'
    T = (2 * np.outer(E[:, 0], E[:, 0]) + np.outer(E[:, 1], E[:, 2]) + np.outer(E[:, 2], E[:, 1])) % q
    return [(z, CyclotomicSum(q, np.bincount(T[i], minlength=q).tolist())) for i, z in enumerate(elliptic)]


def ramified_psi_sum(u: int, v: int, q: int) -> CyclotomicSum:
    """Sum over a, b in F_q^x of psi(u a) psi(v b)."""
    return CyclotomicSum.from_exponents(
        ((u * a + v * b) for a in range(1, q) for b in range(1, q)), q
    )


# the cuspidal part of the character table


@lru_cache(maxsize=None)
def find_beta(q: int) -> Mat2q:
    """First companion matrix [[0, -1], [1, t]] of multiplicative order q + 1."""
    check_odd_prime(q)
    for t in range(q):
        if legendre(t * t - 4, q) != -1:
            continue
        m = Mat2q(0, -1, 1, t, q)
        if m.order() == q + 1:
            return m
    raise AssertionError("no generator of the anisotropic torus found")


LABELS = ("Id", "-Id", "beta", "u1", "ueps", "-u1", "-ueps", "split")


def cuspidal_char(i: int, label: str, k: int, q: int) -> CyclotomicSum:
    """chi_i on the class named by label; k is the torus exponent for label 'beta'."""
    if not 1 <= i <= q:
        raise ValueError(f"cuspidal index {i} outside 1..{q}")
    sign = -1 if i % 2 else 1
    n = q + 1
    if label == "Id":
        return CyclotomicSum.rational(q - 1, n)
    if label == "-Id":
        return CyclotomicSum.rational(sign * (q - 1), n)
    if label == "beta":
        return CyclotomicSum.from_exponents([i * k, -i * k], n, -1)
    if label in ("u1", "ueps"):
        return CyclotomicSum.rational(-1, n)
    if label in ("-u1", "-ueps"):
        return CyclotomicSum.rational(-sign, n)
    if label in LABELS:
        return CyclotomicSum.zero(n)
    raise ValueError(f"unknown class label {label!r}")


@dataclass(frozen=True)
class ConjClass:
    representative: Mat2q
    size: int
    label: str
    k: int = 0  # torus exponent when label == "beta"


@dataclass(frozen=True)
class CuspidalTable:
    q: int
    beta: Mat2q
    epsilon: int
    classes: tuple[ConjClass, ...]

    @property
    def zeta_order(self) -> int:
        return self.q + 1

    def row(self, i: int) -> list[CyclotomicSum]:
        return [cuspidal_char(i, c.label, c.k, self.q) for c in self.classes]


@lru_cache(maxsize=None)
def conjugacy_classes(q: int) -> tuple[ConjClass, ...]:
    check_odd_prime(q)
    if q > CONJUGACY_CAP:
        raise BudgetError(f"conjugacy enumeration is capped at q <= {CONJUGACY_CAP}")
    G = group_elements(q)
    keys = _keys(G, q)
    unseen = np.ones(len(G), dtype=bool)
    index = {int(k): n for n, k in enumerate(keys)}
    beta = find_beta(q)
    beta_traces = {}
    x = identity(q)
    for k in range(1, q + 1):
        x = x @ beta
        beta_traces.setdefault(x.trace(), k)
    u1 = (1, 1, 0, 1)

    classes = []
    for n in range(len(G)):
        if not unseen[n]:
            continue
        rep = tuple(int(v) for v in G[n])
        members = np.unique(_keys(_conjugates(rep, G, q), q))
        for m in members.tolist():
            unseen[index[m]] = False
        member_set = set(members.tolist())
        R = Mat2q(*rep, q)
        t, k = R.trace(), 0
        if rep == (1, 0, 0, 1):
            label = "Id"
        elif rep == (q - 1, 0, 0, q - 1):
            label = "-Id"
        elif t in (2, q - 2):
            u = u1 if t == 2 else tuple((-v) % q for v in u1)
            base = "u1" if _key(u, q) in member_set else "ueps"
            label = base if t == 2 else "-" + base
        elif legendre(t * t - 4, q) == -1:
            label, k = "beta", beta_traces[t]
        else:
            label = "split"
        classes.append(ConjClass(R, len(members), label, k))
    assert sum(c.size for c in classes) == q * (q - 1) * (q + 1)
    assert sum(c.label == "ueps" for c in classes) == 1
    return tuple(classes)


def _key(x, q: int) -> int:
    return ((x[0] * q + x[1]) * q + x[2]) * q + x[3]


def cuspidal_table(q: int) -> CuspidalTable:
    return CuspidalTable(q, find_beta(q), smallest_nonsquare(q), conjugacy_classes(q))


def char_inner_product(i: int, j: int, q: int) -> Fraction:
    classes = conjugacy_classes(q)
    total = CyclotomicSum.zero(q + 1)
    for c in classes:
        total = total + cuspidal_char(i, c.label, c.k, q) * cuspidal_char(j, c.label, c.k, q).conjugate() * c.size
    value = total.to_rational()
    if value is None:
        raise AssertionError("inner product of class functions is not rational")
    return value / (q * (q - 1) * (q + 1))


def cuspidal_sum_on_torus(k: int, q: int) -> CyclotomicSum:
    """Sum over i = 1..q of chi_i(beta^k)."""
    total = CyclotomicSum.zero(q + 1)
    for i in range(1, q + 1):
        total = total + cuspidal_char(i, "beta", k, q)
    return total
