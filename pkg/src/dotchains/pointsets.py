"""Point sets over a structure: container, text format and seeded sampling.

File format::

    <structure-literal> <d>
    x_1 x_2 ... x_d        # one point per line, integer reprs in [0, q)

``#`` starts a comment; blank lines are ignored.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable

import numpy as np

from dotchains.algebra import AlgebraicStructure, Point, parse_structure
from dotchains.errors import DotChainsError
from dotchains.rng import SplitMix64

DEFAULT_MAX_SPACE = 10**6


@dataclass(frozen=True)
class PointSet:
    """Duplicate-free set of d-dimensional points, kept in sorted order."""

    structure: AlgebraicStructure
    d: int
    points: tuple[Point, ...]
    had_duplicates: bool = False

    @classmethod
    def build(cls, structure: AlgebraicStructure, d: int, points: Iterable[Iterable[int]]) -> PointSet:
        if d < 1:
            raise DotChainsError(f"dimension must be >= 1, got {d}")
        raw = []
        for pt in points:
            pt = tuple(int(c) for c in pt)
            if len(pt) != d:
                raise DotChainsError(f"point {pt} has dimension {len(pt)}, expected {d}")
            for c in pt:
                structure.check(c)
            raw.append(pt)
        unique = sorted(set(raw))
        return cls(structure, d, tuple(unique), had_duplicates=len(unique) != len(raw))

    def __len__(self) -> int:
        return len(self.points)

    def __iter__(self):
        return iter(self.points)

    def __contains__(self, pt) -> bool:
        return tuple(pt) in self._index

    @property
    def q(self) -> int:
        return self.structure.q

    @property
    def _index(self) -> frozenset:
        # cached lazily; frozen dataclass so go through __dict__
        idx = self.__dict__.get("_index_cache")
        if idx is None:
            idx = frozenset(self.points)
            object.__setattr__(self, "_index_cache", idx)
        return idx

    def array(self) -> np.ndarray:
        arr = self.__dict__.get("_array_cache")
        if arr is None:
            arr = np.array(self.points, dtype=np.int64).reshape(len(self.points), self.d)
            object.__setattr__(self, "_array_cache", arr)
        return arr

    def same_space(self, other: PointSet) -> None:
        if self.structure != other.structure or self.d != other.d:
            raise DotChainsError(
                f"point sets live in different spaces: {self.structure}^{self.d} vs {other.structure}^{other.d}"
            )

    def union(self, other: PointSet) -> PointSet:
        self.same_space(other)
        return PointSet.build(self.structure, self.d, self.points + other.points)


def point_of_index(index: int, q: int, d: int) -> Point:
    """Big-endian base-q digits; index order equals lexicographic point order."""
    out = []
    for _ in range(d):
        index, c = divmod(index, q)
        out.append(c)
    return tuple(reversed(out))


def whole_space(structure: AlgebraicStructure, d: int, *, max_space: int = DEFAULT_MAX_SPACE) -> PointSet:
    n = structure.q**d
    if n > max_space:
        raise DotChainsError(f"q^d = {n} exceeds the enumeration bound {max_space}")
    pts = tuple(point_of_index(i, structure.q, d) for i in range(n))
    return PointSet(structure, d, pts)


def sample_uniform(
    structure: AlgebraicStructure, d: int, n: int, seed: int = 0, *, max_space: int = DEFAULT_MAX_SPACE
) -> PointSet:
    """Uniform n-subset of structure^d via a partial Fisher-Yates shuffle on SplitMix64."""
    total = structure.q**d
    if total > max_space:
        raise DotChainsError(f"q^d = {total} exceeds the enumeration bound {max_space}")
    if not 0 <= n <= total:
        raise DotChainsError(f"cannot draw {n} distinct points from {total}")
    rng = SplitMix64(seed)
    swapped: dict[int, int] = {}
    chosen = []
    for i in range(n):
        j = i + rng.below(total - i)
        chosen.append(swapped.get(j, j))
        swapped[j] = swapped.get(i, i)
    pts = sorted(point_of_index(c, structure.q, d) for c in chosen)
    return PointSet(structure, d, tuple(pts))


def parse_pointset(text: str, *, max_q: int | None = None) -> PointSet:
    header = None
    rows = []
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if header is None:
            parts = line.rsplit(None, 1)
            if len(parts) != 2:
                raise DotChainsError(f"line {lineno}: malformed header {line!r}")
            try:
                structure = parse_structure(parts[0]) if max_q is None else parse_structure(parts[0], max_q=max_q)
                d = int(parts[1])
            except ValueError as exc:
                raise DotChainsError(f"line {lineno}: malformed header {line!r}: {exc}") from None
            if d < 1:
                raise DotChainsError(f"line {lineno}: dimension must be >= 1")
            header = (structure, d)
            continue
        try:
            pt = tuple(int(tok) for tok in line.split())
        except ValueError:
            raise DotChainsError(f"line {lineno}: non-integer coordinate in {line!r}") from None
        if len(pt) != header[1]:
            raise DotChainsError(f"line {lineno}: expected {header[1]} coordinates, got {len(pt)}")
        for c in pt:
            if not 0 <= c < header[0].q:
                raise DotChainsError(f"line {lineno}: coordinate {c} out of range [0, {header[0].q})")
        rows.append(pt)
    if header is None:
        raise DotChainsError("missing header line")
    return PointSet.build(header[0], header[1], rows)


def serialize_pointset(E: PointSet) -> str:
    lines = [f"{E.structure.literal} {E.d}"]
    lines.extend(" ".join(str(c) for c in pt) for pt in E.points)
    return "\n".join(lines) + "\n"


def read_pointset(path) -> PointSet:
    with open(path, encoding="utf-8") as fh:
        return parse_pointset(fh.read())


def write_pointset(E: PointSet, path) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(serialize_pointset(E))
