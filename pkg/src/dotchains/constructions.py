"""Structured point sets: extremal families, lines L_alpha(v), the Z_9^2 counterexample."""

from __future__ import annotations

from dataclasses import dataclass
from itertools import product

from dotchains.algebra import AlgebraicStructure, Kind, Point, make_structure
from dotchains.chains import ChainSpec, Policy, count_chains_brute
from dotchains.errors import DotChainsError
from dotchains.pointsets import PointSet


def axes_set(S: AlgebraicStructure, d: int = 2) -> PointSet:
    """Union of the first two coordinate axes in S^d; 2q - 1 points (shared origin)."""
    if d < 2:
        raise DotChainsError("the axes construction needs d >= 2")
    pad = (0,) * (d - 2)
    pts = [(x, 0) + pad for x in S.elements()] + [(0, y) + pad for y in S.elements()]
    return PointSet.build(S, d, pts)


def shifted_lines_set(S: AlgebraicStructure, alpha: int) -> PointSet:
    """{(x, 0, alpha)} u {(0, y, 1)} in S^3.

    Every cross pair has dot product alpha.  The families are disjoint unless
    alpha = 1, when (0, 0, 1) is shared and |E| = 2q - 1.
    """
    S.check(alpha)
    pts = [(x, 0, alpha) for x in S.elements()] + [(0, y, 1) for y in S.elements()]
    return PointSet.build(S, 3, pts)


@dataclass(frozen=True)
class ErratumFamily:
    E: PointSet
    X: tuple[Point, ...]
    Y: tuple[Point, ...]
    Z: tuple[Point, ...]
    alpha: int
    beta: int


def erratum_family(p: int, ell: int, alpha: int, beta: int) -> ErratumFamily:
    """X = {(ap, alpha)}, Y = {(b p^(l-1), 1)}, Z = {(cp, beta)} in Z_{p^l}^2, a, b, c in [0, p)."""
    if ell < 2:
        raise DotChainsError("the construction needs l >= 2")
    S = make_structure(Kind.INTEGER_RING, p, ell)
    for name, v in (("alpha", alpha), ("beta", beta)):
        S.check(v)
        if not S.is_unit(v):
            raise DotChainsError(f"{name} = {v} must be a unit in {S}")
        if v == 1:
            raise DotChainsError(f"{name} must differ from 1")
    if alpha == beta:
        raise DotChainsError("alpha and beta must be distinct")
    q = S.q
    X = tuple(((a * p) % q, alpha) for a in range(p))
    Y = tuple(((b * p ** (ell - 1)) % q, 1) for b in range(p))
    Z = tuple(((c * p) % q, beta) for c in range(p))
    E = PointSet.build(S, 2, X + Y + Z)
    return ErratumFamily(E, X, Y, Z, alpha, beta)


def erratum_family_set(p: int, ell: int, alpha: int, beta: int) -> PointSet:
    return erratum_family(p, ell, alpha, beta).E


def restricted_family_count(fam: ErratumFamily) -> int:
    """Number of (x, y, z) in X x Y x Z with x.y = alpha and y.z = beta."""
    S = fam.E.structure
    return sum(
        1
        for x, y, z in product(fam.X, fam.Y, fam.Z)
        if S.dot(x, y) == fam.alpha and S.dot(y, z) == fam.beta
    )


@dataclass(frozen=True)
class LineSet:
    v: Point
    alpha: int
    points: frozenset[Point]

    def __len__(self) -> int:
        return len(self.points)

    def sorted(self) -> list[Point]:
        return sorted(self.points)


def line_points(S: AlgebraicStructure, v: Point, alpha: int) -> LineSet:
    """L_alpha(v) = {y in S^2 : v . y = alpha}."""
    v = tuple(v)
    if len(v) != 2:
        raise DotChainsError("lines are defined in dimension 2")
    for c in v:
        S.check(c)
    S.check(alpha)
    v1, v2 = v
    pts = []
    if S.is_unit(v2):
        # y2 = (alpha - v1 y1) / v2
        inv = S.inv(v2)
        pts = [(y1, S.mul(inv, S.sub(alpha, S.mul(v1, y1)))) for y1 in S.elements()]
    elif S.is_unit(v1):
        inv = S.inv(v1)
        pts = [(S.mul(inv, S.sub(alpha, S.mul(v2, y2))), y2) for y2 in S.elements()]
    else:
        pts = [y for y in product(S.elements(), repeat=2) if S.dot(v, y) == alpha]
    return LineSet(v, alpha, frozenset(pts))


# the two lists as printed for v = (3, 2), w = (3, 4) in Z_9^2
PUBLISHED_L2_V = ((0, 1), (1, 4), (2, 7), (3, 1), (4, 4), (5, 7), (6, 1), (7, 4), (8, 7))
PUBLISHED_L4_W = ((0, 1), (1, 7), (2, 4), (3, 1), (4, 7), (5, 4), (6, 1), (7, 7), (8, 4))
PUBLISHED_INTERSECTION = ((0, 1), (3, 1), (6, 1))


def max_line_intersection(S: AlgebraicStructure) -> int:
    """Largest |L_a(v) n L_b(w)| over distinct nonempty lines with v, w != 0."""
    lines = {}
    for v in product(S.elements(), repeat=2):
        if v == (0, 0):
            continue
        for a in S.elements():
            L = line_points(S, v, a).points
            if L:
                lines.setdefault(L, (v, a))
    distinct = list(lines)
    best = 0
    for i, L in enumerate(distinct):
        for M in distinct[i + 1 :]:
            best = max(best, len(L & M))
    return best


def erratum_counterexample() -> dict:
    """Recompute the Z_9^2 lines and compare them with the published lists."""
    S = make_structure(Kind.INTEGER_RING, 3, 2)
    v, w = (3, 2), (3, 4)
    L2v = line_points(S, v, 2)
    L4w = line_points(S, w, 4)
    inter = L2v.points & L4w.points
    checks = {
        "L2_v_matches_published": L2v.sorted() == list(PUBLISHED_L2_V),
        "L4_w_matches_published": L4w.sorted() == list(PUBLISHED_L4_W),
        "intersection_matches_published": sorted(inter) == list(PUBLISHED_INTERSECTION),
        "intersection_size_is_3": len(inter) == 3,
        "lines_differ": L2v.points != L4w.points,
        "membership_by_dot": all(S.dot(v, y) == 2 for y in L2v.points)
        and all(S.dot(w, y) == 4 for y in L4w.points),
    }
    return {
        "structure": S.literal,
        "v": list(v),
        "w": list(w),
        "L2_v": [list(pt) for pt in L2v.sorted()],
        "L4_w": [list(pt) for pt in L4w.sorted()],
        "intersection": [list(pt) for pt in sorted(inter)],
        "intersection_size": len(inter),
        "only_in_L2_v": [list(pt) for pt in sorted(L2v.points - L4w.points)],
        "checks": checks,
        "pass": all(checks.values()),
    }


def erratum_family_report(p: int, ell: int, alpha: int, beta: int, budget: int = 10**8) -> dict:
    fam = erratum_family(p, ell, alpha, beta)
    spec = ChainSpec((alpha, beta), Policy.PAIRWISE)
    pairwise = count_chains_brute(fam.E, spec, budget).count
    all_tuples = count_chains_brute(fam.E, ChainSpec((alpha, beta)), budget).count
    restricted = restricted_family_count(fam)
    return {
        "structure": fam.E.structure.literal,
        "size": len(fam.E),
        "restricted_count": restricted,
        "pairwise_count": pairwise,
        "all_tuples_count": all_tuples,
        "p_cubed": p**3,
        "size_cubed": len(fam.E) ** 3,
        "pass": len(fam.E) == 3 * p and restricted == p**3 and pairwise >= p**3,
    }
