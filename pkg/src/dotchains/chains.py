"""Exact dot-product chain counting.

A k-chain of type alpha = (a_1, ..., a_k) in E is a tuple (x_1, ..., x_{k+1})
of points of E with x_j . x_{j+1} = a_j.  Three readings of "distinct" are
supported:

* ``all``       every tuple in E^{k+1} (what the character-sum identities count)
* ``adjacent``  x_j != x_{j+1}
* ``pairwise``  all k+1 points distinct (brute force only)

The DP path multiplies a count vector by the 0/1 adjacency matrix of each
link; the brute-force path walks tuples with scalar ``dot`` calls and shares
no code with it, so the two can check each other.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction
from typing import Sequence

import numpy as np

from dotchains.algebra import Point
from dotchains.errors import BudgetExceeded, DotChainsError
from dotchains.pointsets import PointSet

DEFAULT_BRUTE_BUDGET = 10**8
_INT64_SAFE = 2**62


class Policy(str, Enum):
    ALL = "all"
    ADJACENT = "adjacent"
    PAIRWISE = "pairwise"

    @classmethod
    def parse(cls, value) -> Policy:
        aliases = {
            "all-tuples": cls.ALL,
            "adjacent-distinct": cls.ADJACENT,
            "pairwise-distinct": cls.PAIRWISE,
        }
        if isinstance(value, cls):
            return value
        if value in aliases:
            return aliases[value]
        try:
            return cls(value)
        except ValueError:
            raise DotChainsError(f"unknown distinctness policy {value!r}") from None


@dataclass(frozen=True)
class ChainSpec:
    alphas: tuple[int, ...]
    policy: Policy = Policy.ALL

    def __init__(self, alphas: Sequence[int], policy: Policy | str = Policy.ALL):
        alphas = tuple(int(a) for a in alphas)
        if not alphas:
            raise DotChainsError("a chain needs k >= 1 dot-product constraints")
        object.__setattr__(self, "alphas", alphas)
        object.__setattr__(self, "policy", Policy.parse(policy))

    @property
    def k(self) -> int:
        return len(self.alphas)

    def validate(self, E: PointSet) -> None:
        for a in self.alphas:
            E.structure.check(a)


@dataclass
class CountReport:
    count: int
    main_term: Fraction
    relative_error: Fraction
    policy: Policy
    provenance: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "count": self.count,
            "main_term": str(self.main_term),
            "relative_error": str(self.relative_error),
            "approx_relative_error": float(self.relative_error),
            "policy": self.policy.value,
            "provenance": self.provenance,
        }


def main_term(n: int, q: int, k: int) -> Fraction:
    """|E|^{k+1} / q^k."""
    return Fraction(n ** (k + 1), q**k)


def make_report(E: PointSet, spec: ChainSpec, count: int, **provenance) -> CountReport:
    mt = main_term(len(E), E.q, spec.k)
    rel = (count - mt) / mt if mt else Fraction(0)
    prov = {"structure": E.structure.literal, "d": E.d, "n": len(E), "alphas": list(spec.alphas)}
    prov.update(provenance)
    return CountReport(count, mt, rel, spec.policy, prov)


# -- pair and neighbour counts ---------------------------------------------


def gram(E: PointSet) -> np.ndarray:
    """|E| x |E| matrix of dot products, cached on the point set."""
    G = E.__dict__.get("_gram_cache")
    if G is None:
        G = E.structure.gram(E.array(), E.array()) if len(E) else np.zeros((0, 0), dtype=np.int64)
        object.__setattr__(E, "_gram_cache", G)
    return G


def pair_count(E: PointSet, gamma: int) -> int:
    """Ordered pairs (x, y) in E^2, x = y allowed, with x . y = gamma."""
    E.structure.check(gamma)
    return int(np.count_nonzero(gram(E) == gamma))


def pair_counts(E: PointSet) -> np.ndarray:
    """N_gamma for every gamma in the structure, as an array of length q."""
    return np.bincount(gram(E).ravel(), minlength=E.q).astype(np.int64)


def neighbor_counts(E: PointSet, gamma: int, eval_set: PointSet | Sequence[Point] | None = None) -> dict[Point, int]:
    """n_gamma(x) = #{y in E : x . y = gamma} for every x in eval_set (default E)."""
    E.structure.check(gamma)
    if eval_set is None:
        eval_set = E
    if isinstance(eval_set, PointSet):
        E.same_space(eval_set)
        pts = eval_set.points
    else:
        pts = [tuple(p) for p in eval_set]
        for p in pts:
            if len(p) != E.d:
                raise DotChainsError(f"point {p} has dimension {len(p)}, expected {E.d}")
    if not pts:
        return {}
    if not len(E):
        return {p: 0 for p in pts}
    G = E.structure.gram(np.array(pts, dtype=np.int64), E.array())
    counts = np.count_nonzero(G == gamma, axis=1)
    return {p: int(c) for p, c in zip(pts, counts)}


# -- transfer-matrix DP --------------------------------------------------------


def _count_dtype(n: int, k: int):
    # exact int64 whenever the total tuple count cannot overflow
    return np.int64 if n ** (k + 1) < _INT64_SAFE else object


def chain_count_vectors(E: PointSet, alphas: Sequence[int], policy: Policy = Policy.ALL) -> np.ndarray:
    """c_{k+1}: for each y in E, the number of chains ending at y."""
    n = len(E)
    dtype = _count_dtype(n, len(alphas))
    c = np.ones(n, dtype=dtype)
    if n == 0:
        return c
    G = gram(E)
    for a in alphas:
        A = G == a
        if policy is Policy.ADJACENT:
            A = A.copy()
            np.fill_diagonal(A, False)
        c = A.T.astype(dtype) @ c
    return c


def count_chains_dp(E: PointSet, spec: ChainSpec) -> CountReport:
    """Exact count for the ``all`` and ``adjacent`` policies in O(k |E|^2)."""
    if spec.policy is Policy.PAIRWISE:
        raise DotChainsError("pairwise distinctness is only available through count_chains_brute")
    spec.validate(E)
    count = int(sum(int(v) for v in chain_count_vectors(E, spec.alphas, spec.policy)))
    return make_report(E, spec, count, method="dp")


def count_segment(E: PointSet, alphas: Sequence[int]) -> int:
    """All-tuples count of the chain with the given constraints (empty -> |E|)."""
    return int(sum(int(v) for v in chain_count_vectors(E, alphas)))


# -- brute force --------------------------------------------------------------


def count_chains_brute(E: PointSet, spec: ChainSpec, budget: int = DEFAULT_BRUTE_BUDGET) -> CountReport:
    """Depth-first enumeration of tuples, pruning at the first failed link."""
    spec.validate(E)
    n, k = len(E), spec.k
    required = n ** (k + 1)
    if required > budget:
        raise BudgetExceeded(required, budget)
    S = E.structure
    pts = E.points
    alphas = spec.alphas
    policy = spec.policy

    def extend(prefix: list[int], depth: int) -> int:
        if depth == k:
            return 1
        last = pts[prefix[-1]]
        target = alphas[depth]
        total = 0
        for j, y in enumerate(pts):
            if policy is Policy.ADJACENT and j == prefix[-1]:
                continue
            if policy is Policy.PAIRWISE and j in prefix:
                continue
            if S.dot(last, y) != target:
                continue
            prefix.append(j)
            total += extend(prefix, depth + 1)
            prefix.pop()
        return total

    count = sum(extend([i], 0) for i in range(n))
    return make_report(E, spec, count, method="brute")


def count_chains(E: PointSet, spec: ChainSpec, budget: int = DEFAULT_BRUTE_BUDGET) -> CountReport:
    """DP when the policy allows it, brute force otherwise."""
    if spec.policy is Policy.PAIRWISE:
        return count_chains_brute(E, spec, budget)
    return count_chains_dp(E, spec)
