"""Scalar arithmetic over F_p, F_{p^m} and Z_{p^l}.

Every element is a plain ``int`` in ``[0, q)``.  For the prime field and the
ring that integer is the residue itself; for an extension field it is the
base-p little-endian packing of the coefficient vector of a polynomial of
degree < m, reduced modulo a fixed monic irreducible polynomial.

Extension field multiplication goes through exp/log tables built once per
structure, so both the scalar path and the vectorized path (``gram``) are
table lookups.
"""

from __future__ import annotations

import functools
import re
from dataclasses import dataclass, field
from enum import Enum
from typing import Sequence

import numpy as np

from dotchains.errors import DotChainsError

DEFAULT_MAX_Q = 10_000
MAX_IRREDUCIBLE_SEARCH = 10**6

Point = tuple[int, ...]


class Kind(str, Enum):
    PRIME_FIELD = "prime-field"
    EXTENSION_FIELD = "extension-field"
    INTEGER_RING = "integer-ring"


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


def _prime_factors(n: int) -> list[int]:
    out = []
    f = 2
    while f * f <= n:
        if n % f == 0:
            out.append(f)
            while n % f == 0:
                n //= f
        f += 1
    if n > 1:
        out.append(n)
    return out


# -- polynomials over F_p as little-endian coefficient lists ---------------


def _trim(a: list[int]) -> list[int]:
    while a and a[-1] == 0:
        a.pop()
    return a


def _poly_mod(a: Sequence[int], m: Sequence[int], p: int) -> list[int]:
    """Remainder of a modulo the monic polynomial m over F_p."""
    r = [c % p for c in a]
    dm = len(m) - 1
    for i in range(len(r) - 1, dm - 1, -1):
        c = r[i]
        if c:
            shift = i - dm
            for j in range(dm + 1):
                r[shift + j] = (r[shift + j] - c * m[j]) % p
    return _trim(r[:dm])


def _monic_polys(degree: int, p: int):
    """All monic polynomials of the given degree, in packed-integer order."""
    for t in range(p**degree):
        coeffs = []
        for _ in range(degree):
            t, c = divmod(t, p)
            coeffs.append(c)
        yield coeffs + [1]


def is_irreducible(poly: Sequence[int], p: int) -> bool:
    """Trial division by every monic polynomial of degree 1..deg/2."""
    n = len(poly) - 1
    if n < 1:
        return False
    if n == 1:
        return True
    for deg in range(1, n // 2 + 1):
        for f in _monic_polys(deg, p):
            if not _poly_mod(poly, f, p):
                return False
    return True


def smallest_irreducible(m: int, p: int) -> tuple[int, ...]:
    """Lex-smallest monic irreducible of degree m.

    Candidates x^m + c_{m-1}x^{m-1} + ... + c_0 are visited in increasing order
    of the packed integer c_0 + c_1 p + ... + c_{m-1} p^{m-1}.
    """
    if p**m > MAX_IRREDUCIBLE_SEARCH:
        raise DotChainsError(f"extension field too large for exhaustive search: {p}^{m}")
    for f in _monic_polys(m, p):
        if is_irreducible(f, p):
            return tuple(f)
    raise RuntimeError(f"no irreducible polynomial of degree {m} over F_{p}")  # pragma: no cover


# -- the structure ---------------------------------------------------------


@dataclass(frozen=True)
class AlgebraicStructure:
    """Coefficient ring: F_p, F_{p^m} (with fixed modulus) or Z_{p^l}."""

    kind: Kind
    p: int
    e: int
    modulus: tuple[int, ...] | None = None
    _tables: dict = field(default_factory=dict, init=False, repr=False, compare=False, hash=False)

    @property
    def q(self) -> int:
        return self.p**self.e

    @property
    def is_field(self) -> bool:
        return self.kind is not Kind.INTEGER_RING

    @property
    def char_modulus(self) -> int:
        """Order Q of the root of unity used by ``character_index``."""
        return self.p if self.kind is Kind.EXTENSION_FIELD else self.q

    @property
    def literal(self) -> str:
        if self.kind is Kind.PRIME_FIELD:
            return f"Fp:{self.p}"
        if self.kind is Kind.EXTENSION_FIELD:
            return f"F:{self.p}^{self.e}"
        return f"Z:{self.p}^{self.e}"

    def __str__(self) -> str:
        return self.literal

    def elements(self) -> range:
        return range(self.q)

    def check(self, a: int) -> int:
        if not isinstance(a, (int, np.integer)) or not 0 <= a < self.q:
            raise DotChainsError(f"{a!r} is not an element of {self.literal}")
        return int(a)

    # -- scalar arithmetic -------------------------------------------------

    def add(self, a: int, b: int) -> int:
        if self.kind is not Kind.EXTENSION_FIELD:
            return (a + b) % self.q
        p, out, w = self.p, 0, 1
        for _ in range(self.e):
            a, da = divmod(a, p)
            b, db = divmod(b, p)
            out += ((da + db) % p) * w
            w *= p
        return out

    def neg(self, a: int) -> int:
        if self.kind is not Kind.EXTENSION_FIELD:
            return -a % self.q
        p, out, w = self.p, 0, 1
        for _ in range(self.e):
            a, da = divmod(a, p)
            out += (-da % p) * w
            w *= p
        return out

    def sub(self, a: int, b: int) -> int:
        return self.add(a, self.neg(b))

    def mul(self, a: int, b: int) -> int:
        if self.kind is not Kind.EXTENSION_FIELD:
            return a * b % self.q
        if a == 0 or b == 0:
            return 0
        exp, log = self._exp_log()
        return int(exp[(log[a] + log[b]) % (self.q - 1)])

    def is_unit(self, a: int) -> bool:
        if self.kind is Kind.INTEGER_RING:
            return a % self.p != 0
        return a != 0

    def inv(self, a: int) -> int:
        if not self.is_unit(a):
            raise DotChainsError(f"{a} is not a unit in {self.literal}")
        if self.kind is not Kind.EXTENSION_FIELD:
            return pow(a, -1, self.q)
        exp, log = self._exp_log()
        return int(exp[-log[a] % (self.q - 1)])

    def power(self, a: int, n: int) -> int:
        result, base = 1, a
        while n:
            if n & 1:
                result = self.mul(result, base)
            base = self.mul(base, base)
            n >>= 1
        return result

    def units(self) -> list[int]:
        return [a for a in self.elements() if self.is_unit(a)]

    def scale(self, c: int, x: Point) -> Point:
        return tuple(self.mul(c, xi) for xi in x)

    def dot(self, x: Sequence[int], y: Sequence[int]) -> int:
        if len(x) != len(y):
            raise DotChainsError(f"dimension mismatch: {len(x)} vs {len(y)}")
        acc = 0
        for a, b in zip(x, y):
            acc = self.add(acc, self.mul(a, b))
        return acc

    def trace(self, a: int) -> int:
        """Absolute trace a + a^p + ... + a^{p^{m-1}}; an element of the prime subfield."""
        t, f = 0, a
        for _ in range(self.e if self.kind is Kind.EXTENSION_FIELD else 1):
            t = self.add(t, f)
            f = self.power(f, self.p)
        return t

    def character_index(self, a: int) -> int:
        """t with chi(a) = exp(2 pi i t / Q), Q = ``char_modulus``."""
        if self.kind is Kind.EXTENSION_FIELD:
            return self.trace(a)
        return a

    # -- tables and vectorized helpers ---------------------------------------

    def _poly_of(self, a: int) -> list[int]:
        out = []
        for _ in range(self.e):
            a, c = divmod(a, self.p)
            out.append(c)
        return out

    def _pack(self, coeffs: Sequence[int]) -> int:
        out = 0
        for c in reversed(list(coeffs) + [0] * (self.e - len(coeffs))):
            out = out * self.p + c
        return out

    def _polymul(self, a: int, b: int) -> int:
        pa, pb = self._poly_of(a), self._poly_of(b)
        prod = [0] * (2 * self.e - 1)
        for i, ca in enumerate(pa):
            if ca:
                for j, cb in enumerate(pb):
                    prod[i + j] += ca * cb
        return self._pack(_poly_mod(prod, self.modulus, self.p))

    def _polypow(self, a: int, n: int) -> int:
        result = 1
        while n:
            if n & 1:
                result = self._polymul(result, a)
            a = self._polymul(a, a)
            n >>= 1
        return result

    def _exp_log(self) -> tuple[np.ndarray, np.ndarray]:
        if "exp" not in self._tables:
            order = self.q - 1
            factors = _prime_factors(order) if order > 1 else []
            gen = next(
                g for g in range(1, self.q)
                if all(self._polypow(g, order // r) != 1 for r in factors)
            )
            exp = np.zeros(order, dtype=np.int64)
            log = np.zeros(self.q, dtype=np.int64)
            x = 1
            for i in range(order):
                exp[i] = x
                log[x] = i
                x = self._polymul(x, gen)
            self._tables["exp"] = exp
            self._tables["log"] = log
        return self._tables["exp"], self._tables["log"]

    def _digit_table(self) -> np.ndarray:
        if "digits" not in self._tables:
            q, p = self.q, self.p
            idx = np.arange(q, dtype=np.int64)
            self._tables["digits"] = np.stack([(idx // p**i) % p for i in range(self.e)], axis=-1)
        return self._tables["digits"]

    def gram(self, xs: np.ndarray, ys: np.ndarray) -> np.ndarray:
        """Matrix of dot products xs[i] . ys[j] for integer arrays of shape (n, d), (n', d)."""
        xs = np.asarray(xs, dtype=np.int64)
        ys = np.asarray(ys, dtype=np.int64)
        if xs.shape[1] != ys.shape[1]:
            raise DotChainsError(f"dimension mismatch: {xs.shape[1]} vs {ys.shape[1]}")
        n, m = xs.shape[0], ys.shape[0]
        if self.kind is not Kind.EXTENSION_FIELD:
            q = self.q
            out = np.zeros((n, m), dtype=np.int64)
            for i in range(xs.shape[1]):
                out = (out + np.multiply.outer(xs[:, i], ys[:, i])) % q
            return out
        exp, log = self._exp_log()
        digits = self._digit_table()
        acc = np.zeros((n, m, self.e), dtype=np.int64)
        for i in range(xs.shape[1]):
            a, b = xs[:, i], ys[:, i]
            prod = exp[np.add.outer(log[a], log[b]) % (self.q - 1)]
            prod[a == 0, :] = 0
            prod[:, b == 0] = 0
            acc = (acc + digits[prod]) % self.p
        weights = self.p ** np.arange(self.e, dtype=np.int64)
        return acc @ weights


_LITERAL = re.compile(r"^\s*(Fp|F|Z)\s*:\s*(\d+)\s*(?:\^\s*(\d+))?\s*$")


@functools.lru_cache(maxsize=None)
def make_structure(kind: Kind | str, p: int, e: int = 1, *, max_q: int = DEFAULT_MAX_Q) -> AlgebraicStructure:
    """Build (and cache) F_p, F_{p^e} or Z_{p^e}.

    Raises DotChainsError on a non-prime or even p, e < 1, or q above ``max_q``.
    """
    kind = Kind(kind)
    if not isinstance(p, int) or not isinstance(e, int):
        raise DotChainsError("p and e must be integers")
    if p > 10**6:
        raise DotChainsError(f"p = {p} exceeds the supported range")
    if p == 2:
        raise DotChainsError("characteristic 2 is not supported; p must be odd")
    if not is_prime(p):
        raise DotChainsError(f"{p} is not a prime")
    if e < 1:
        raise DotChainsError(f"exponent must be >= 1, got {e}")
    if kind is Kind.PRIME_FIELD and e != 1:
        raise DotChainsError("a prime field has exponent 1")
    if p**e > max_q:
        raise DotChainsError(f"q = {p}^{e} exceeds the configured bound {max_q}")
    modulus = smallest_irreducible(e, p) if kind is Kind.EXTENSION_FIELD else None
    return AlgebraicStructure(kind, p, e, modulus)


def parse_structure(literal: str, *, max_q: int = DEFAULT_MAX_Q) -> AlgebraicStructure:
    """Parse ``Fp:<p>``, ``F:<p>^<m>`` or ``Z:<p>^<l>``."""
    m = _LITERAL.match(literal)
    if not m:
        raise DotChainsError(f"malformed structure literal {literal!r}")
    tag, p, e = m.group(1), int(m.group(2)), m.group(3)
    if tag == "Fp":
        if e is not None:
            raise DotChainsError(f"malformed structure literal {literal!r}")
        return make_structure(Kind.PRIME_FIELD, p, 1, max_q=max_q)
    if e is None:
        raise DotChainsError(f"structure literal {literal!r} needs an exponent")
    kind = Kind.EXTENSION_FIELD if tag == "F" else Kind.INTEGER_RING
    return make_structure(kind, p, int(e), max_q=max_q)
