"""Grid functions on the extended dyadic domain, with exact arithmetic.

A :class:`GridFunction` is piecewise constant on the level-L cells of
[0,1)^{n-1} x [0,3), stored time-fastest (the last axis is the time
axis, matching C order).  Two value modes:

* ``"fixed"`` — every cell value is an integer numerator over one global
  ``denom``; averages, positive-part averages and measure counts are
  exact rationals, and strict comparisons against rational thresholds
  are decided exactly.
* ``"f64"`` — plain float64 cells; the same operations run in floating
  point and exactness claims are off.

Fixed-mode arrays live in int64 while a bit-length guard proves that no
internal intermediate (cell numerators scaled by up to 2^{Ln}, block
sums over up to 2*2^{Ln} cells) can overflow; past the guard they fall
back to object dtype holding Python ints, which is exact at any
magnitude.  Instances are immutable: the value buffer is write-locked
and per-level block sums and the prefix table are memoized (idempotent,
so concurrent readers are fine).
"""

from __future__ import annotations

import itertools
from fractions import Fraction
from typing import Iterable, Literal

import numpy as np

from .cubes import DyadicCube, forward, root_cube
from .errors import GridFormatError, OutOfDomainError

__all__ = [
    "GridFunction",
    "PrefixTable",
    "resolve_root",
    "average",
    "pos_part_average",
    "distribution_measure",
    "offset_positive_part",
    "scale_values",
    "shift_values",
    "refine",
]

Mode = Literal["fixed", "f64"]

# int64 is safe while |value| * 2^{2Ln} * 4 provably fits below 2^62.
_GUARD_BITS = 62


def _int64_safe(max_abs: int, L: int, n: int) -> bool:
    return max_abs.bit_length() + 2 * L * n + 3 <= _GUARD_BITS


class GridFunction:
    """Cell values of a function on the extended domain at resolution L."""

    def __init__(
        self,
        n: int,
        L: int,
        values: Iterable | np.ndarray,
        mode: Mode = "fixed",
        denom: int | None = None,
    ) -> None:
        if n < 1:
            raise GridFormatError(f"dimension must be >= 1, got {n}")
        if L < 0:
            raise GridFormatError(f"resolution level must be >= 0, got {L}")
        if mode not in ("fixed", "f64"):
            raise GridFormatError(f"unknown mode {mode!r}")
        self.n = int(n)
        self.L = int(L)
        self.mode: Mode = mode
        side = 1 << self.L
        shape = (side,) * (self.n - 1) + (3 * side,)

        arr = np.asarray(values)
        if arr.size != int(np.prod(shape)):
            raise GridFormatError(
                f"expected {int(np.prod(shape))} cells for n={n}, L={L}, got {arr.size}"
            )
        if mode == "fixed":
            if denom is None or int(denom) <= 0:
                raise GridFormatError("fixed mode requires a positive denominator")
            self.denom = int(denom)
            if arr.dtype.kind == "f":
                if not np.all(arr == np.trunc(arr)):
                    raise GridFormatError("fixed mode requires integer numerators")
                arr = arr.astype(np.int64)
            ints = [int(v) for v in arr.ravel().tolist()]
            max_abs = max((abs(v) for v in ints), default=0)
            if _int64_safe(max_abs, self.L, self.n):
                buf = np.array(ints, dtype=np.int64)
            else:
                buf = np.empty(len(ints), dtype=object)
                buf[:] = ints
            self.values = buf.reshape(shape)
        else:
            if denom is not None:
                raise GridFormatError("f64 mode takes no denominator")
            self.denom = None
            buf = arr.astype(np.float64).reshape(shape)
            if not np.all(np.isfinite(buf)):
                raise GridFormatError("f64 values must be finite")
            self.values = buf.copy()
        self.values.setflags(write=False)
        self._block_sums_cache: dict[int, np.ndarray] = {}
        self._prefix: PrefixTable | None = None

    # -- basic geometry -------------------------------------------------

    @property
    def is_fixed(self) -> bool:
        return self.mode == "fixed"

    @property
    def side(self) -> int:
        return 1 << self.L

    @property
    def shape(self) -> tuple[int, ...]:
        return self.values.shape

    @property
    def cell_volume(self) -> Fraction:
        return Fraction(1, 1 << (self.L * self.n))

    @property
    def root(self) -> DyadicCube:
        return root_cube(self.n)

    def cube_slices(self, cube: DyadicCube) -> tuple[slice, ...]:
        if cube.n != self.n:
            raise OutOfDomainError(f"cube dimension {cube.n} != grid dimension {self.n}")
        if cube.level > self.L:
            raise OutOfDomainError(
                f"cube level {cube.level} is below grid resolution {self.L}"
            )
        w = 1 << (self.L - cube.level)
        sl = [slice(s * w, (s + 1) * w) for s in cube.spatial]
        sl.append(slice(cube.time * w, (cube.time + 1) * w))
        return tuple(sl)

    def region(self, cube: DyadicCube) -> np.ndarray:
        return self.values[self.cube_slices(cube)]

    def cells_in(self, cube: DyadicCube) -> int:
        return 1 << ((self.L - cube.level) * self.n)

    # -- exact/float scalar helpers --------------------------------------

    def ratio(self, numer, count: int):
        """Value of (sum of cell entries)/count as Fraction or float."""
        if self.is_fixed:
            return Fraction(int(numer), count * self.denom)
        return float(numer) / count

    def value_at(self, index: tuple[int, ...]):
        v = self.values[index]
        return Fraction(int(v), self.denom) if self.is_fixed else float(v)

    def min_value(self):
        m = self.values.min()
        return Fraction(int(m), self.denom) if self.is_fixed else float(m)

    def max_value(self):
        m = self.values.max()
        return Fraction(int(m), self.denom) if self.is_fixed else float(m)

    def min_over(self, cube: DyadicCube):
        m = self.region(cube).min()
        return Fraction(int(m), self.denom) if self.is_fixed else float(m)

    # -- memoized aggregates ----------------------------------------------

    def block_sums(self, k: int) -> np.ndarray:
        """Sums over all level-k blocks of the extended domain.

        Result shape (2^k,)*(n-1) + (3*2^k,); entry [s, t] is the sum of
        cell values inside the level-k box with those indices.
        """
        if not 0 <= k <= self.L:
            raise OutOfDomainError(f"level {k} outside [0, {self.L}]")
        cached = self._block_sums_cache.get(k)
        if cached is not None:
            return cached
        w = self.side >> k
        shape: list[int] = []
        for _ in range(self.n - 1):
            shape += [1 << k, w]
        shape += [3 << k, w]
        inter = self.values.reshape(shape)
        within = tuple(range(1, 2 * self.n, 2))
        sums = inter.sum(axis=within)
        sums.setflags(write=False)
        self._block_sums_cache[k] = sums
        return sums

    def prefix(self) -> "PrefixTable":
        if self._prefix is None:
            self._prefix = PrefixTable(self)
        return self._prefix

    def equals(self, other: "GridFunction") -> bool:
        return (
            self.n == other.n
            and self.L == other.L
            and self.mode == other.mode
            and self.denom == other.denom
            and bool(np.array_equal(self.values, other.values))
        )


class PrefixTable:
    """Inclusive n-dimensional prefix sums with a zero pad row per axis.

    Any axis-aligned box sum costs 2^n table lookups (inclusion-exclusion);
    in fixed mode the lookups are integers, so cube averages are exact.
    """

    def __init__(self, gf: GridFunction) -> None:
        self.gf = gf
        t = gf.values
        for ax in range(gf.n):
            t = np.cumsum(t, axis=ax)
        padded = np.zeros(tuple(s + 1 for s in t.shape), dtype=t.dtype)
        padded[tuple(slice(1, None) for _ in range(gf.n))] = t
        padded.setflags(write=False)
        self.table = padded

    def box_sum(self, lo: tuple[int, ...], hi: tuple[int, ...]):
        """Sum of cells with lo[i] <= index_i < hi[i]."""
        total = 0
        for corner in itertools.product((0, 1), repeat=self.gf.n):
            idx = tuple(hi[i] if corner[i] else lo[i] for i in range(self.gf.n))
            term = self.table[idx]
            if sum(corner) % 2 == self.gf.n % 2:
                total += term
            else:
                total -= term
        return float(total) if self.gf.mode == "f64" else int(total)

    def cube_sum(self, cube: DyadicCube):
        sl = self.gf.cube_slices(cube)
        lo = tuple(s.start for s in sl)
        hi = tuple(s.stop for s in sl)
        return self.box_sum(lo, hi)


# -- averaging operations ---------------------------------------------------


def resolve_root(f: GridFunction, root: DyadicCube | None) -> DyadicCube:
    """Default ``root`` to the unit cube and validate it against the grid."""
    if root is None:
        root = f.root
    if root.n != f.n:
        raise OutOfDomainError(f"root dimension {root.n} != grid dimension {f.n}")
    if root.level > f.L:
        raise OutOfDomainError("root level is below the grid resolution")
    if not root.in_unit_cube:
        raise OutOfDomainError("root must be a dyadic subcube of the unit cube")
    return root


def average(f: GridFunction, cube: DyadicCube):
    """Mean of f over a cube (exact Fraction in fixed mode)."""
    s = f.prefix().cube_sum(cube)
    return f.ratio(s, f.cells_in(cube))


def _domain_regions(f: GridFunction, domain: str, base: DyadicCube) -> list[np.ndarray]:
    if domain == "cube":
        return [f.region(base)]
    if domain == "union":
        return [f.region(base), f.region(forward(base))]
    raise OutOfDomainError(f"unknown domain token {domain!r} (use 'cube' or 'union')")


def pos_part_average(f: GridFunction, domain: str, base: DyadicCube, ref: DyadicCube):
    """Mean over the domain of (f - mean(f over ref))^+.

    ``domain`` is ``"cube"`` (the base cube alone) or ``"union"`` (base
    together with its forward translate).  The subtraction is nonlinear,
    so this iterates cells rather than using the prefix table.
    """
    ravg = average(f, ref)
    regions = _domain_regions(f, domain, base)
    count = sum(r.size for r in regions)
    if f.is_fixed:
        rn, rd = ravg.numerator, ravg.denominator
        d = f.denom
        total = 0
        for r in regions:
            for a in r.ravel().tolist():
                x = a * rd - rn * d
                if x > 0:
                    total += x
        return Fraction(total, count * d * rd)
    total = 0.0
    for r in regions:
        total += float(np.maximum(r - ravg, 0.0).sum())
    return total / count


def _count_above(f: GridFunction, arr: np.ndarray, ref_avg, lam) -> int:
    """Exact count of cells with (value - ref_avg) > lam (fixed mode)."""
    lam = Fraction(lam)
    rn, rd = ref_avg.numerator, ref_avg.denominator
    d = f.denom
    # value - ref = (a*rd - rn*d)/(d*rd) > lam  iff  a*rd > lam*d*rd + rn*d,
    # and for integer a*rd that holds iff a*rd > floor of the right side
    thr_num = lam.numerator * d * rd + rn * d * lam.denominator
    thr = thr_num // lam.denominator  # a*rd > thr  <=>  strict inequality
    max_abs = 0
    if arr.dtype == np.int64:
        max_abs = int(np.abs(arr).max()) if arr.size else 0
    if arr.dtype == np.int64 and (max_abs * rd).bit_length() < 62 and abs(thr) < 2**62:
        return int((arr.astype(np.int64) * rd > thr).sum())
    return sum(1 for a in arr.ravel().tolist() if a * rd > thr)


def distribution_measure(f: GridFunction, root: DyadicCube | None, lam) -> Fraction:
    """|{x in root : (f(x) - mean(f over root++))^+ > lam}| for lam >= 0.

    The count of qualifying cells is exact in fixed mode; the returned
    measure is count * 2^{-Ln} as a Fraction in either mode.
    """
    if root is None:
        root = f.root
    if not root.in_unit_cube:
        raise OutOfDomainError("distribution root must lie inside the unit cube")
    ref = forward(root, 2)
    ravg = average(f, ref)
    arr = f.region(root)
    if f.is_fixed:
        if Fraction(lam) < 0:
            raise OutOfDomainError("distribution threshold must be >= 0")
        count = _count_above(f, arr, ravg, lam)
    else:
        if float(lam) < 0:
            raise OutOfDomainError("distribution threshold must be >= 0")
        count = int((arr - ravg > float(lam)).sum())
    return Fraction(count, 1 << (f.L * f.n))


# -- derived grids ------------------------------------------------------------


def offset_positive_part(f: GridFunction, ref: DyadicCube) -> GridFunction:
    """The grid function (f - mean(f over ref))^+, exact in fixed mode."""
    ravg = average(f, ref)
    if f.is_fixed:
        rn, rd = ravg.numerator, ravg.denominator
        d = f.denom
        new_denom = d * rd
        arr = f.values
        max_abs = 0
        if arr.dtype == np.int64:
            max_abs = int(np.abs(arr).max()) if arr.size else 0
        if arr.dtype == np.int64 and (max_abs * rd + abs(rn) * d).bit_length() < 62:
            vals = np.maximum(arr.astype(np.int64) * rd - rn * d, 0)
        else:
            vals = [max(a * rd - rn * d, 0) for a in arr.ravel().tolist()]
        return GridFunction(f.n, f.L, vals, "fixed", new_denom)
    return GridFunction(f.n, f.L, np.maximum(f.values - ravg, 0.0), "f64")


def scale_values(f: GridFunction, c) -> GridFunction:
    """c*f for a rational (fixed) or float (f64) factor c >= 0."""
    if f.is_fixed:
        c = Fraction(c)
        if c < 0:
            raise OutOfDomainError("scaling factor must be >= 0")
        vals = [int(a) * c.numerator for a in f.values.ravel().tolist()]
        return GridFunction(f.n, f.L, vals, "fixed", f.denom * c.denominator)
    return GridFunction(f.n, f.L, f.values * float(c), "f64")


def shift_values(f: GridFunction, s) -> GridFunction:
    """f + s for a rational (fixed) or float (f64) constant s."""
    if f.is_fixed:
        s = Fraction(s)
        vals = [
            int(a) * s.denominator + s.numerator * f.denom
            for a in f.values.ravel().tolist()
        ]
        return GridFunction(f.n, f.L, vals, "fixed", f.denom * s.denominator)
    return GridFunction(f.n, f.L, f.values + float(s), "f64")


def refine(f: GridFunction) -> GridFunction:
    """The same function at resolution L+1 (each cell split into 2^n)."""
    vals = f.values
    for ax in range(f.n):
        vals = np.repeat(vals, 2, axis=ax)
    return GridFunction(f.n, f.L + 1, vals, f.mode, f.denom)
