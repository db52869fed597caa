"""Character sums evaluated exactly through orthogonality.

Nothing here sums roots of unity.  Every sum over nonzero auxiliary variables
collapses by

    sum_{s != 0} chi(s t) = q [t = 0] - 1,

so each quantity becomes an integer combination of chain counts.  Bounds with
half-integer powers of p are held as ``HalfPower`` values and compared by
squaring, so pass/fail never depends on floating point.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import Sequence

import numpy as np

from dotchains.algebra import AlgebraicStructure, Point
from dotchains.chains import ChainSpec, Policy, count_segment, neighbor_counts, pair_count
from dotchains.errors import DotChainsError
from dotchains.pointsets import PointSet, whole_space

MAX_DECOMPOSE_K = 16


@dataclass(frozen=True)
class HalfPower:
    """The nonnegative real a * p^(b/2)."""

    a: int
    b: int
    p: int

    def __post_init__(self):
        if self.a < 0 or self.b < 0:
            raise DotChainsError("HalfPower needs a >= 0 and b >= 0")

    def square(self) -> int:
        return self.a * self.a * self.p**self.b

    def __mul__(self, other: HalfPower) -> HalfPower:
        if other.p != self.p:
            raise DotChainsError("HalfPower bases differ")
        return HalfPower(self.a * other.a, self.b + other.b, self.p)

    def times(self, c: int) -> HalfPower:
        return HalfPower(self.a * c, self.b, self.p)

    def __float__(self) -> float:
        return self.a * self.p ** (self.b / 2)

    def bounds(self, x: int | Fraction) -> bool:
        """Exactly decide 0 <= x <= a p^(b/2)."""
        if x < 0:
            raise DotChainsError("HalfPower comparisons take nonnegative values")
        return x * x <= self.square()

    def ratio(self, x: int | Fraction) -> float:
        v = float(self)
        return float(x) / v if v else (0.0 if x == 0 else math.inf)

    def to_dict(self) -> dict:
        return {"a": self.a, "b": self.b, "p": self.p, "squared": str(self.square()), "approx_value": float(self)}


def lambda_factor(S: AlgebraicStructure, gamma: int) -> HalfPower:
    """1 for gamma != 0 and sqrt(q) for gamma = 0 (fields only)."""
    if not S.is_field:
        raise DotChainsError("the lambda factor is defined over fields only")
    S.check(gamma)
    return HalfPower(1, S.e if gamma == 0 else 0, S.p)


# -- one- and two-constraint sums --------------------------------------------


def s_sum(E: PointSet, x: Point, alpha: int) -> int:
    """S_{E,alpha}(x) = sum_{s != 0} sum_{y in E} chi(s(x.y - alpha)) = q n_alpha(x) - |E|."""
    n = neighbor_counts(E, alpha, [tuple(x)])[tuple(x)]
    return E.q * n - len(E)


def s_values(E: PointSet, alpha: int, points: Sequence[Point] | PointSet) -> np.ndarray:
    """Vector of S_{E,alpha}(x) over the given points."""
    pts = points.points if isinstance(points, PointSet) else [tuple(p) for p in points]
    if not pts:
        return np.zeros(0, dtype=np.int64)
    if not len(E):
        return np.zeros(len(pts), dtype=np.int64)
    E.structure.check(alpha)
    G = E.structure.gram(np.array(pts, dtype=np.int64), E.array())
    return E.q * np.count_nonzero(G == alpha, axis=1).astype(np.int64) - len(E)


def s_l2(E: PointSet, alpha: int, domain: str = "space") -> int:
    """sum over x in the domain (E or the whole space) of S_{E,alpha}(x)^2."""
    if domain in ("E", "set"):
        pts = E
    elif domain in ("space", "whole-space"):
        pts = whole_space(E.structure, E.d)
    else:
        raise DotChainsError(f"unknown domain {domain!r}")
    v = s_values(E, alpha, pts)
    return int(sum(int(t) * int(t) for t in v))


def t_sum(E: PointSet, alpha_i: int, alpha_j: int) -> int:
    """T(E) for two consecutive links: q^2 C_2 - q|E|(N_a + N_b) + |E|^3."""
    n, q = len(E), E.q
    c2 = count_segment(E, (alpha_i, alpha_j))
    return q * q * c2 - q * n * (pair_count(E, alpha_i) + pair_count(E, alpha_j)) + n**3


# -- decomposition by support of the auxiliary variables ---------------------


@dataclass
class DecompositionReport:
    k: int
    q: int
    n: int
    scaled_terms: dict[int, int]
    scaled_total: int

    @property
    def main_term_scaled(self) -> int:
        return self.n ** (self.k + 1)

    @property
    def count(self) -> Fraction:
        return Fraction(self.scaled_total, self.q**self.k)

    def term(self, support: Sequence[int]) -> Fraction:
        """R_J for J given as 1-based link indices."""
        mask = 0
        for i in support:
            mask |= 1 << (i - 1)
        return Fraction(self.scaled_terms[mask], self.q**self.k)

    @property
    def grouped(self) -> dict[int, Fraction]:
        out = {n: Fraction(0) for n in range(self.k + 1)}
        for mask, v in self.scaled_terms.items():
            out[bin(mask).count("1")] += v
        return {n: v / self.q**self.k for n, v in out.items()}

    def to_dict(self) -> dict:
        return {
            "k": self.k,
            "q": self.q,
            "n": self.n,
            "scaled_total": self.scaled_total,
            "main_term_scaled": self.main_term_scaled,
            "scaled_terms": {str(m): v for m, v in sorted(self.scaled_terms.items())},
            "grouped": {str(n): str(v) for n, v in self.grouped.items()},
            "count": str(self.count),
        }


def _runs(mask: int, k: int) -> list[tuple[int, int]]:
    """Maximal runs [a, b] (0-based, inclusive) of set bits."""
    runs, i = [], 0
    while i < k:
        if mask >> i & 1:
            j = i
            while j + 1 < k and mask >> (j + 1) & 1:
                j += 1
            runs.append((i, j))
            i = j + 1
        else:
            i += 1
    return runs


def decompose(E: PointSet, spec: ChainSpec | Sequence[int]) -> DecompositionReport:
    """q^k R_J for every support J of the auxiliary variables (bit i-1 = link i).

    With N(J) the number of tuples in E^{k+1} meeting the constraints in J,
    q^k R_J = sum_{J' subset J} (-1)^{|J - J'|} q^{|J'|} N(J').
    """
    if not isinstance(spec, ChainSpec):
        spec = ChainSpec(spec)
    if spec.policy is not Policy.ALL:
        raise DotChainsError("the decomposition counts all tuples; use policy 'all'")
    spec.validate(E)
    k, q, n = spec.k, E.q, len(E)
    if k > MAX_DECOMPOSE_K:
        raise DotChainsError(f"k = {k} exceeds the decomposition cap {MAX_DECOMPOSE_K}")

    @lru_cache(maxsize=None)
    def segment(a: int, b: int) -> int:
        return count_segment(E, spec.alphas[a : b + 1])

    g = [0] * (1 << k)
    for mask in range(1 << k):
        touched, prod = 0, 1
        for a, b in _runs(mask, k):
            prod *= segment(a, b)
            touched += b - a + 2
        g[mask] = q ** bin(mask).count("1") * prod * n ** (k + 1 - touched)
    # subset Moebius transform
    terms = list(g)
    for i in range(k):
        bit = 1 << i
        for mask in range(1 << k):
            if mask & bit:
                terms[mask] -= terms[mask ^ bit]
    return DecompositionReport(k, q, n, dict(enumerate(terms)), sum(terms))


# -- lemma checkers -----------------------------------------------------------


@dataclass
class LemmaCheck:
    lemma: str
    lhs_signed: int | Fraction | None
    lhs_squared: int | Fraction
    bound: HalfPower | None
    constant: Fraction
    passed: bool
    detail: dict = field(default_factory=dict)

    @property
    def ratio(self) -> float:
        """lhs / bound (floating point; informational only)."""
        if self.bound is None:
            return float("nan")
        v = float(self.bound)
        lhs = math.sqrt(float(self.lhs_squared))
        return lhs / v if v else (0.0 if lhs == 0 else math.inf)

    def to_dict(self) -> dict:
        return {
            "lemma": self.lemma,
            "lhs_signed": None if self.lhs_signed is None else str(self.lhs_signed),
            "lhs_squared": str(self.lhs_squared),
            "bound": None if self.bound is None else self.bound.to_dict(),
            "constant": str(self.constant),
            "pass": self.passed,
            "approx_ratio": self.ratio,
            **{k: v for k, v in self.detail.items()},
        }


def check_pair_lemma(E: PointSet, gamma: int) -> LemmaCheck:
    """Pair-sum bound.

    Field: |q N_gamma - |E|^2| <= |E| q^((d+1)/2) lambda(gamma).
    Ring Z_{p^l} (gamma a unit): |sum_{x in E} S_{E,gamma}(x)| <= 2|E| q^((d-1)(2 - 1/l)/2 + 1),
    i.e. 2|E| p^((d-1)(2l-1)/2) q.
    """
    S = E.structure
    S.check(gamma)
    n, d, q = len(E), E.d, E.q
    signed = q * pair_count(E, gamma) - n * n
    if S.is_field:
        bound = HalfPower(n, S.e * (d + 1), S.p) * lambda_factor(S, gamma)
        name = "1dp"
    else:
        if not S.is_unit(gamma):
            raise DotChainsError(f"the ring pair lemma needs a unit; {gamma} is not a unit in {S}")
        ell = S.e
        bound = HalfPower(2 * n, (d - 1) * (2 * ell - 1) + 2 * ell, S.p)
        name = "1dpR"
    return LemmaCheck(name, signed, signed * signed, bound, Fraction(1), bound.bounds(abs(signed)), {"gamma": gamma})


def check_tsum_lemma(E: PointSet, alpha_i: int, alpha_j: int, C: Fraction | int = 2) -> LemmaCheck:
    """Two-link bound.

    Field: |T(E)| <~ q^(d+1) |E| lambda(a) lambda(b); the implied constant is
    unstated, so ``passed`` means |T| <= C * bound for the given C.
    Ring (units): (sum_x S_a(x)^2)^(1/2) (sum_x S_b(x)^2)^(1/2) <= 2|E| q^((d(2l-1)+1)/l),
    sums over the whole space, constant 2 explicit.
    """
    S = E.structure
    n, d = len(E), E.d
    C = Fraction(C)
    if S.is_field:
        T = t_sum(E, alpha_i, alpha_j)
        bound = HalfPower(n, 2 * S.e * (d + 1), S.p) * lambda_factor(S, alpha_i) * lambda_factor(S, alpha_j)
        passed = T * T <= C * C * bound.square()
        return LemmaCheck("2dp", T, T * T, bound, C, passed, {"alphas": [alpha_i, alpha_j]})
    for a in (alpha_i, alpha_j):
        S.check(a)
        if not S.is_unit(a):
            raise DotChainsError(f"the ring two-link lemma needs units; {a} is not a unit in {S}")
    ell = S.e
    lhs_sq = s_l2(E, alpha_i) * s_l2(E, alpha_j)
    bound = HalfPower(2 * n, 2 * (d * (2 * ell - 1) + 1), S.p)
    return LemmaCheck(
        "2dpR", None, lhs_sq, bound, Fraction(1), lhs_sq <= bound.square(), {"alphas": [alpha_i, alpha_j]}
    )


# -- row/column bound for bilinear forms -------------------------------------


def _as_complex(v) -> tuple[Fraction, Fraction]:
    if isinstance(v, tuple):
        re, im = v
        return Fraction(re), Fraction(im)
    if isinstance(v, complex):
        return Fraction(v.real), Fraction(v.imag)
    return Fraction(v), Fraction(0)


def _sqrt_bracket(r: Fraction, bits: int) -> tuple[Fraction, Fraction]:
    """Rational lo <= sqrt(r) <= hi, exact when r is a rational square."""
    num, den = r.numerator, r.denominator
    scale = 1 << bits
    t = num * den * scale * scale
    s = math.isqrt(t)
    lo = Fraction(s, den * scale)
    hi = lo if s * s == t else Fraction(s + 1, den * scale)
    return lo, hi


def _squarefree_split(n: int) -> tuple[int, int]:
    """n = s^2 f with f squarefree.

    Trial division up to the cube root of what is left; the cofactor then has
    at most two prime factors, so it is either a square or squarefree.
    """
    s, f, p = 1, 1, 2
    while p * p * p <= n:
        e = 0
        while n % p == 0:
            n //= p
            e += 1
        s *= p ** (e // 2)
        f *= p ** (e % 2)
        p += 1 if p == 2 else 2
    r = math.isqrt(n)
    if r * r == n:
        return s * r, f
    return s, f * n


class _SqrtSum:
    """Exact sum of c_f sqrt(f) over squarefree f; distinct sqrt(f) are linearly independent."""

    def __init__(self, terms: dict[int, Fraction] | None = None):
        self.terms = {f: c for f, c in (terms or {}).items() if c}

    @classmethod
    def sqrt_of(cls, r: Fraction) -> _SqrtSum:
        if r == 0:
            return cls()
        s, f = _squarefree_split(r.numerator * r.denominator)
        return cls({f: Fraction(s, r.denominator)})

    def __add__(self, other: _SqrtSum) -> _SqrtSum:
        out = dict(self.terms)
        for f, c in other.terms.items():
            out[f] = out.get(f, 0) + c
        return _SqrtSum(out)

    def __sub__(self, other: _SqrtSum) -> _SqrtSum:
        return self + _SqrtSum({f: -c for f, c in other.terms.items()})

    def __mul__(self, other: _SqrtSum) -> _SqrtSum:
        out: dict[int, Fraction] = {}
        for f, a in self.terms.items():
            for g, b in other.terms.items():
                h = math.gcd(f, g)
                key = (f // h) * (g // h)
                out[key] = out.get(key, 0) + a * b * h
        return _SqrtSum(out)

    def sign(self) -> int:
        if not self.terms:
            return 0
        bits = 64
        while True:
            lo = hi = Fraction(0)
            for f, c in self.terms.items():
                a, b = _sqrt_bracket(Fraction(f), bits)
                lo += c * (a if c > 0 else b)
                hi += c * (b if c > 0 else a)
            if lo > 0:
                return 1
            if hi < 0:
                return -1
            bits *= 2


def _exact_max(values: list[_SqrtSum]) -> _SqrtSum:
    best = values[0]
    for v in values[1:]:
        if (v - best).sign() > 0:
            best = v
    return best


def check_rc(c, z, y) -> LemmaCheck:
    """|sum_jk c_jk z_j y_k| <= sqrt(R C) ||z|| ||y|| in exact arithmetic.

    Entries may be ints, Fractions, complex numbers or (re, im) pairs.  R and C
    are sums of moduli, i.e. sums of square roots.  A rational bracket settles
    most instances; ties (e.g. 1 x 1 matrices, where the bound is attained) go
    to an exact computation over sums of square roots of squarefree integers.
    """
    cm = [[_as_complex(v) for v in row] for row in c]
    zv = [_as_complex(v) for v in z]
    yv = [_as_complex(v) for v in y]
    m = len(cm)
    if m < 1 or len(zv) != m:
        raise DotChainsError(f"matrix has {m} rows but z has length {len(zv)}")
    ncols = len(cm[0])
    if ncols < 1 or any(len(row) != ncols for row in cm) or len(yv) != ncols:
        raise DotChainsError("matrix columns do not match the length of y")

    sre = sim = Fraction(0)
    for j in range(m):
        zr, zi = zv[j]
        for k in range(ncols):
            cr, ci = cm[j][k]
            yr, yi = yv[k]
            # c * z * y
            ar, ai = cr * zr - ci * zi, cr * zi + ci * zr
            sre += ar * yr - ai * yi
            sim += ar * yi + ai * yr
    lhs_sq = sre * sre + sim * sim
    norms = sum(a * a + b * b for a, b in zv) * sum(a * a + b * b for a, b in yv)
    mod_sq = [[a * a + b * b for a, b in row] for row in cm]

    br = [[_sqrt_bracket(v, 64) for v in row] for row in mod_sq]
    R_lo = max(sum(b[0] for b in row) for row in br)
    R_hi = max(sum(b[1] for b in row) for row in br)
    C_lo = max(sum(br[j][k][0] for j in range(m)) for k in range(ncols))
    C_hi = max(sum(br[j][k][1] for j in range(m)) for k in range(ncols))
    detail = {
        "rhs_squared_lower": str(R_lo * C_lo * norms),
        "rhs_squared_upper": str(R_hi * C_hi * norms),
    }
    if lhs_sq <= R_lo * C_lo * norms:
        passed, method = True, "bracket"
    elif lhs_sq > R_hi * C_hi * norms:
        passed, method = False, "bracket"
    else:
        roots = [[_SqrtSum.sqrt_of(v) for v in row] for row in mod_sq]
        R = _exact_max([sum(row, _SqrtSum()) for row in roots])
        C = _exact_max([sum((roots[j][k] for j in range(m)), _SqrtSum()) for k in range(ncols)])
        gap = R * C * _SqrtSum({1: norms}) - _SqrtSum({1: lhs_sq})
        passed, method = gap.sign() >= 0, "exact"
        detail["equality"] = gap.sign() == 0
    detail["method"] = method
    return LemmaCheck("rc", None, lhs_sq, None, Fraction(1), passed, detail)


# -- term structure of a support pattern -------------------------------------


@dataclass(frozen=True)
class TermStructure:
    j: tuple[int, ...]
    n: int
    m: int
    z: int
    z_prime: int
    a: int

    @property
    def k(self) -> int:
        return len(self.j)

    @property
    def bound_holds(self) -> bool:
        return self.z <= self.k - self.m + 1

    def to_dict(self) -> dict:
        return {"j": list(self.j), "n": self.n, "m": self.m, "z": self.z, "z_prime": self.z_prime,
                "a": self.a, "bound": self.k - self.m + 1, "holds": self.bound_holds}


def term_structure(j: Sequence[int]) -> TermStructure:
    """n, m, z for a binary support tuple, with the convention s_0 = 0.

    m is computed twice: as n + a (a = number of runs of ones) and by listing
    the x indices touched by the constrained factors; the two must agree.
    """
    j = tuple(int(b) for b in j)
    if not j or any(b not in (0, 1) for b in j):
        raise DotChainsError("support must be a nonempty binary tuple")
    padded = (0,) + j
    k = len(j)
    n = sum(j)
    a = sum(1 for i in range(1, k + 1) if padded[i] == 1 and padded[i - 1] == 0)
    z = sum(1 for i in range(1, k + 1) if padded[i] == 0 and padded[i - 1] == 0)
    z_prime = sum(1 for i in range(1, k + 1) if padded[i] == 0 and padded[i - 1] == 1)
    touched = set()
    for i in range(1, k + 1):
        if padded[i]:
            touched.update((i, i + 1))
    m = n + a
    if m != len(touched):
        raise AssertionError(f"closed form m = {m} disagrees with simulation {len(touched)} for {j}")
    return TermStructure(j, n, m, z, z_prime, a)
