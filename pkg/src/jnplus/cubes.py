"""Dyadic cube geometry on the normalized extended domain.

The ambient domain is [0,1)^{n-1} x [0,3): a unit box in the first n-1
axes, stretched to three unit lengths along the last axis, which plays
the role of time.  A :class:`DyadicCube` at level k has side 2^{-k};
its spatial indices lie in [0, 2^k) and its time index in [0, 3*2^k).
The type therefore covers both the dyadic subcubes of the unit cube
Q0 = [0,1)^n (those with time index < 2^k) and their forward time
translates, which the one-sided operators consume.

All boxes are half-open, so "non-overlapping" means literal set
disjointness.  Because every instance is aligned to the 2^{-level} grid
on every axis, two valid cubes are always nested or disjoint; the
PARTIAL_OVERLAP relation value exists for completeness but is not
reachable from aligned inputs.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterator

from .errors import OutOfDomainError, RefinementBelowGridError

__all__ = [
    "DyadicCube",
    "CubeRelation",
    "root_cube",
    "forward",
    "children",
    "parent",
    "relation",
    "contains",
    "volume",
    "subcubes",
]


@dataclass(frozen=True, order=True)
class DyadicCube:
    """Half-open dyadic box: side 2^{-level}, integer corner indices.

    ``spatial`` holds the n-1 spatial indices (empty tuple when n = 1);
    ``time`` is the index along the last axis.  Ordering is lexicographic
    in (level, spatial, time), which is the canonical report order.
    """

    level: int
    spatial: tuple[int, ...]
    time: int

    def __post_init__(self) -> None:
        if self.level < 0:
            raise OutOfDomainError(f"negative level {self.level}")
        side = 1 << self.level
        for s in self.spatial:
            if not 0 <= s < side:
                raise OutOfDomainError(
                    f"spatial index {s} outside [0, {side}) at level {self.level}"
                )
        if not 0 <= self.time < 3 * side:
            raise OutOfDomainError(
                f"time index {self.time} outside [0, {3 * side}) at level {self.level}"
            )

    @property
    def n(self) -> int:
        return len(self.spatial) + 1

    @property
    def in_unit_cube(self) -> bool:
        """True when the cube lies inside Q0 = [0,1)^n (not a translate)."""
        return self.time < (1 << self.level)

    def time_interval(self) -> tuple[Fraction, Fraction]:
        w = Fraction(1, 1 << self.level)
        return (self.time * w, (self.time + 1) * w)

    def __repr__(self) -> str:  # compact, index-based
        return f"DyadicCube(level={self.level}, spatial={self.spatial}, time={self.time})"


class CubeRelation(enum.Enum):
    DISJOINT = "disjoint"
    EQUAL = "equal"
    A_CONTAINS_B = "a-contains-b"
    B_CONTAINS_A = "b-contains-a"
    PARTIAL_OVERLAP = "partial-overlap"


def root_cube(n: int) -> DyadicCube:
    """The unit cube Q0 = [0,1)^n as a level-0 cube."""
    if n < 1:
        raise OutOfDomainError(f"dimension must be >= 1, got {n}")
    return DyadicCube(0, (0,) * (n - 1), 0)


def forward(cube: DyadicCube, steps: int = 1) -> DyadicCube:
    """Translate forward in time by ``steps`` side lengths.

    forward(Q) is the one-step translate Q+; forward(Q, 2) is Q++ used as
    the reference cube for one-sided oscillation.  Raises OutOfDomainError
    when the translate leaves the extended domain.
    """
    if steps < 0:
        raise OutOfDomainError("forward translation must be non-negative")
    t = cube.time + steps
    if t >= 3 * (1 << cube.level):
        raise OutOfDomainError(
            f"forward({cube}, {steps}) leaves the extended time range"
        )
    return DyadicCube(cube.level, cube.spatial, t)


def children(cube: DyadicCube, max_level: int) -> list[DyadicCube]:
    """The 2^n half-side subcubes, in index order (time fastest).

    ``max_level`` is the grid resolution; refining past it raises
    RefinementBelowGridError.
    """
    if cube.level >= max_level:
        raise RefinementBelowGridError(
            f"cube at level {cube.level} cannot be refined below max level {max_level}"
        )
    out = []
    base = tuple(2 * s for s in cube.spatial)
    for bits in range(1 << (cube.n - 1)):
        sp = tuple(base[i] + ((bits >> (cube.n - 2 - i)) & 1) for i in range(cube.n - 1))
        for dt in (0, 1):
            out.append(DyadicCube(cube.level + 1, sp, 2 * cube.time + dt))
    return out


def parent(cube: DyadicCube) -> DyadicCube:
    """Tree parent inside Q0.  Defined only for non-root cubes of Q0."""
    if cube.level == 0:
        raise OutOfDomainError("level-0 cube has no parent")
    if not cube.in_unit_cube:
        raise OutOfDomainError("parent is defined only inside the unit cube")
    return DyadicCube(
        cube.level - 1, tuple(s // 2 for s in cube.spatial), cube.time // 2
    )


def _scaled_intervals(cube: DyadicCube, level: int) -> list[tuple[int, int]]:
    # Integer endpoints of each axis interval at resolution 2^{-level}.
    shift = level - cube.level
    lo = [s << shift for s in cube.spatial] + [cube.time << shift]
    return [(a, a + (1 << shift)) for a in lo]


def relation(a: DyadicCube, b: DyadicCube) -> CubeRelation:
    """Set relation between two half-open boxes."""
    if a.n != b.n:
        raise OutOfDomainError(f"dimension mismatch: {a.n} vs {b.n}")
    m = max(a.level, b.level)
    ia, ib = _scaled_intervals(a, m), _scaled_intervals(b, m)
    if any(ha <= lb or hb <= la for (la, ha), (lb, hb) in zip(ia, ib)):
        return CubeRelation.DISJOINT
    a_in_b = all(lb <= la and ha <= hb for (la, ha), (lb, hb) in zip(ia, ib))
    b_in_a = all(la <= lb and hb <= ha for (la, ha), (lb, hb) in zip(ia, ib))
    if a_in_b and b_in_a:
        return CubeRelation.EQUAL
    if b_in_a:
        return CubeRelation.A_CONTAINS_B
    if a_in_b:
        return CubeRelation.B_CONTAINS_A
    return CubeRelation.PARTIAL_OVERLAP


def contains(outer: DyadicCube, inner: DyadicCube) -> bool:
    """True when inner is a subset of outer (equality counts)."""
    r = relation(outer, inner)
    return r in (CubeRelation.EQUAL, CubeRelation.A_CONTAINS_B)


def volume(cube: DyadicCube) -> Fraction:
    return Fraction(1, 1 << (cube.level * cube.n))


def subcubes(root: DyadicCube, max_level: int) -> Iterator[DyadicCube]:
    """All dyadic subcubes of ``root`` down to ``max_level``, root included.

    Yields level by level, index order within a level.
    """
    if root.level > max_level:
        raise OutOfDomainError("root is below the grid resolution")
    level_cubes = [root]
    yield root
    for _ in range(max_level - root.level):
        nxt: list[DyadicCube] = []
        for c in level_cubes:
            nxt.extend(children(c, max_level))
        nxt.sort()
        yield from nxt
        level_cubes = nxt
