"""Oscillation seminorms over families of dyadic subcubes.

Per-cube weights, for a dyadic cube Q of the unit cube with forward
translates Q+ and Q++:

    phi_plus(Q)      = |Q| * ( mean over Q ∪ Q+ of (f - mean(f over Q++))^+ )^p
    phi_classical(Q) = |Q| * ( mean over Q of |f - mean(f over Q)| )^p

The two family functionals take suprema of summed weights over families
of pairwise non-overlapping dyadic subcubes of the root:

    jnp_plus_dyadic      sup of sum of phi_plus over such families
    jnp_classical_dyadic sup of sum of phi_classical over such families

(the results report the p-th root).  Because the weights are nonnegative
and dyadic cubes nest, the supremum over families equals the maximum
over antichains of the subcube tree, which a bottom-up pass computes
exactly: best(Q) = max(phi(Q), sum of best over children), ties resolved
toward the children so the extracted witness is a full partition.

Two cube-wise suprema with no exponent:

    bmo_plus_dyadic      sup over Q of mean over Q of (f - mean(f over Q+))^+
    bmo_plus_limit_form  sup over Q of mean over Q ∪ Q+ of (f - mean(f over Q++))^+

``antichain_oracle`` recomputes the jnp_plus objective by enumerating
every antichain explicitly with per-cube weights from the cell-iteration
route — an independent cross-check for the batched pass, feasible only
on tiny grids.

In fixed mode with integer p everything here is exact integer
arithmetic: at level k the weight numerators sit on the common
denominators (2*denom)^p * 2^{2Lnp} (plus) and denom^p * 2^{2Lnp}
(classical), with numerators T^p * 2^{kn(2p-1)} where T is the clamped
(resp. absolute) deviation sum of the level-k block engine.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction
from math import lcm

import numpy as np

from ._blocks import absdev_sums, block_count, clamped_sums, root_box, _shift_time
from .cubes import DyadicCube, children, contains, forward, volume
from .errors import InstanceTooLargeError, InvalidExponentError, InvalidParamsError
from .grid import GridFunction, average, pos_part_average, resolve_root
from .reports import jsonify, scalar_json

__all__ = [
    "CubeFamily",
    "SeminormResult",
    "phi_plus",
    "phi_classical",
    "jnp_plus_dyadic",
    "jnp_classical_dyadic",
    "bmo_plus_dyadic",
    "bmo_plus_limit_form",
    "antichain_oracle",
]


def _norm_exponent(p) -> tuple[Fraction, int | None]:
    """Validate p > 1; return (p as Fraction, integer value or None)."""
    try:
        q = Fraction(p)
    except (TypeError, ValueError) as exc:
        raise InvalidExponentError(f"exponent {p!r} is not a number") from exc
    if q <= 1:
        raise InvalidExponentError(f"exponent must be > 1, got {p!r}")
    return q, (q.numerator if q.denominator == 1 else None)


def _pth_root(power, p: Fraction) -> float:
    """float(power) ** (1/p), surviving powers outside the float range."""
    try:
        base = float(power)
    except OverflowError:
        ln = math.log(power.numerator) - math.log(power.denominator)
        return math.exp(ln / float(p))
    return base ** (1.0 / float(p))


def phi_plus(f: GridFunction, cube: DyadicCube, p):
    """|Q| * (mean over Q ∪ Q+ of (f - mean(f over Q++))^+)^p, one cube.

    Exact Fraction for fixed mode with integer p, float otherwise.
    Cell-by-cell route, independent of the block engine.
    """
    q, p_int = _norm_exponent(p)
    ppa = pos_part_average(f, "union", cube, forward(cube, 2))
    if f.is_fixed and p_int is not None:
        return volume(cube) * ppa**p_int
    return float(volume(cube)) * float(ppa) ** float(q)


def phi_classical(f: GridFunction, cube: DyadicCube, p):
    """|Q| * (mean over Q of |f - mean(f over Q)|)^p, one cube."""
    q, p_int = _norm_exponent(p)
    avg = average(f, cube)
    region = f.region(cube)
    cells = region.size
    if f.is_fixed:
        an, ad = avg.numerator, avg.denominator
        d = f.denom
        total = sum(abs(a * ad - an * d) for a in region.ravel().tolist())
        dev = Fraction(total, cells * d * ad)
        if p_int is not None:
            return volume(cube) * dev**p_int
        return float(volume(cube)) * float(dev) ** float(q)
    dev = float(np.abs(region - avg).sum()) / cells
    return float(volume(cube)) * dev ** float(q)


@dataclass
class CubeFamily:
    """A family of dyadic subcubes meant to be pairwise non-overlapping."""

    cubes: list[DyadicCube]

    def validate(self) -> None:
        """Raise unless the cubes are pairwise non-overlapping.

        Aligned dyadic cubes overlap only by nesting, so it suffices to
        check that no cube has another family member as an ancestor —
        one shifted-index lookup per (cube, coarser level) pair.
        """
        by_level: dict[int, set[tuple]] = {}
        for c in self.cubes:
            key = (c.spatial, c.time)
            seen = by_level.setdefault(c.level, set())
            if key in seen:
                raise InvalidParamsError(f"duplicate cube {c!r} in family")
            seen.add(key)
        for c in self.cubes:
            for lvl in by_level:
                if lvl >= c.level:
                    continue
                sh = c.level - lvl
                anc = (tuple(s >> sh for s in c.spatial), c.time >> sh)
                if anc in by_level[lvl]:
                    raise InvalidParamsError(
                        f"overlapping cubes in family: {c!r} has an ancestor present"
                    )

    def total_volume(self) -> Fraction:
        return sum((volume(c) for c in self.cubes), Fraction(0))

    def is_partition_of(self, root: DyadicCube) -> bool:
        """True when the family tiles ``root`` exactly."""
        self.validate()
        if not all(contains(root, c) for c in self.cubes):
            return False
        return self.total_volume() == volume(root)

    def weight(self, f: GridFunction, p, variant: str = "plus"):
        """Sum of per-cube weights (exact when the per-cube weights are)."""
        if variant == "plus":
            terms = [phi_plus(f, c, p) for c in self.cubes]
        elif variant == "classical":
            terms = [phi_classical(f, c, p) for c in self.cubes]
        else:
            raise InvalidParamsError(f"unknown weight variant {variant!r}")
        zero = Fraction(0) if terms and isinstance(terms[0], Fraction) else 0.0
        return sum(terms, zero)


@dataclass
class SeminormResult:
    """Outcome of a seminorm computation.

    ``weight`` is the optimized objective: the p-th power of the
    seminorm for the jnp functionals, the supremum itself for the bmo
    functionals.  ``value`` is always the seminorm as a float.
    ``witness`` attains ``weight`` (for the jnp functionals a full
    partition of the root; for the bmo functionals a single cube), with
    per-cube weights alongside.
    """

    functional: str
    p: Fraction | None
    weight: Fraction | float
    value: float
    exact: bool
    mode: str
    root: DyadicCube
    witness: list[DyadicCube]
    witness_weights: list
    details: dict = field(default_factory=dict)

    def to_json_dict(self) -> dict:
        return {
            "functional": self.functional,
            "p": scalar_json(self.p) if self.p is not None else None,
            "value": scalar_json(self.value),
            "weight": scalar_json(self.weight),
            "exact": self.exact,
            "mode": self.mode,
            "root": jsonify(self.root),
            "witness": jsonify(self.witness),
            "witness-weights": [scalar_json(w) for w in self.witness_weights],
            "details": jsonify(self.details),
        }


def _children_sum(arr: np.ndarray, n: int) -> np.ndarray:
    shape: list[int] = []
    for s in arr.shape:
        shape += [s // 2, 2]
    return arr.reshape(shape).sum(axis=tuple(range(1, 2 * n, 2)))


def _tree_dp(
    phi: dict[int, np.ndarray], root: DyadicCube, n: int
) -> tuple[object, list[DyadicCube], list]:
    """Maximize the summed weight over antichains of the subcube tree.

    ``phi[k]`` holds the level-k weights over the root box, all on one
    common scale.  Returns the root optimum (same scale), the witness
    family, and the witness cubes' raw weights; ties prefer the
    children, so the witness tiles the root.
    """
    ks = sorted(phi)
    take: dict[int, np.ndarray] = {}
    best = phi[ks[-1]]
    for k in reversed(ks[:-1]):
        child = _children_sum(best, n)
        t = phi[k] > child
        take[k] = t
        best = np.where(t, phi[k], child)

    picked: list[tuple[DyadicCube, object]] = []

    def walk(k: int, idx: tuple[int, ...]) -> None:
        if k == ks[-1] or take[k][idx]:
            sh = k - root.level
            sp = tuple(root.spatial[i] * (1 << sh) + idx[i] for i in range(n - 1))
            cube = DyadicCube(k, sp, root.time * (1 << sh) + idx[-1])
            picked.append((cube, phi[k][idx]))
            return
        for off in itertools.product((0, 1), repeat=n):
            walk(k + 1, tuple(2 * idx[i] + off[i] for i in range(n)))

    walk(ks[0], (0,) * n)
    picked.sort(key=lambda cw: (cw[0].level, cw[0].spatial, cw[0].time))
    witness = [c for c, _ in picked]
    raw = [w for _, w in picked]
    return best[(0,) * n], witness, raw


def _as_objects(arr: np.ndarray) -> np.ndarray:
    # Python-int elements so powering cannot overflow
    out = np.empty(arr.shape, dtype=object)
    out[...] = arr.tolist()
    return out


def _plus_numerators(f: GridFunction, k: int) -> np.ndarray:
    # per block Q: sum over Q ∪ Q+ of max(value*N - sum over Q++, 0)
    return clamped_sums(f, k, 2) + _shift_time(clamped_sums(f, k, 1), 1)


def _family_seminorm(f: GridFunction, p, root: DyadicCube | None, variant: str):
    root = resolve_root(f, root)
    q, p_int = _norm_exponent(p)
    exact = f.is_fixed and p_int is not None
    phi: dict[int, np.ndarray] = {}
    for k in range(root.level, f.L + 1):
        if variant == "plus":
            T = _plus_numerators(f, k)[root_box(root, k)]
            half = 2
        else:
            T = absdev_sums(f, k)[root_box(root, k)]
            half = 1
        if exact:
            phi[k] = _as_objects(T) ** p_int * (1 << (k * f.n * (2 * p_int - 1)))
        else:
            N = block_count(f, k)
            scale = float(half * N * N * (f.denom if f.is_fixed else 1))
            phi[k] = (T.astype(np.float64) / scale) ** float(q) * 2.0 ** (-k * f.n)
    num, witness, raw = _tree_dp(phi, root, f.n)
    if exact:
        base = (2 * f.denom) if variant == "plus" else f.denom
        D = base**p_int * (1 << (2 * f.L * f.n * p_int))
        power = Fraction(int(num), D)
        if sum(int(w) for w in raw) != int(num):
            raise AssertionError("witness weights do not add up to the optimum")
        weights = [Fraction(int(w), D) for w in raw]
    else:
        power = float(num)
        weights = [float(w) for w in raw]
    functional = "jnp-plus" if variant == "plus" else "jnp-classical"
    value = _pth_root(power, q)
    return SeminormResult(
        functional=functional,
        p=q,
        weight=power,
        value=value,
        exact=exact,
        mode=f.mode,
        root=root,
        witness=witness,
        witness_weights=weights,
        details={"levels": f.L - root.level + 1, "witness-size": len(witness)},
    )


def jnp_plus_dyadic(f: GridFunction, p, root: DyadicCube | None = None) -> SeminormResult:
    """Forward-oscillation family seminorm; ``value`` is the p-th root.

    power_value = sup over non-overlapping dyadic families {Q_j} of
    sum |Q_j| * (mean over Q_j ∪ Q_j+ of (f - mean(f over Q_j++))^+)^p.
    """
    return _family_seminorm(f, p, root, "plus")


def jnp_classical_dyadic(
    f: GridFunction, p, root: DyadicCube | None = None
) -> SeminormResult:
    """Two-sided family seminorm: weights |Q|*(mean |f - f_Q| over Q)^p."""
    return _family_seminorm(f, p, root, "classical")


def _cube_sweep(f: GridFunction, root: DyadicCube | None, kind: str):
    """Shared sweep for the two cube-wise suprema."""
    root = resolve_root(f, root)
    best_num: object | None = None
    best_den = 1
    best_at: tuple[int, tuple[int, ...]] | None = None
    for k in range(root.level, f.L + 1):
        if kind == "bmo-plus":
            arr = clamped_sums(f, k, 1)[root_box(root, k)]
            half = 1
        else:
            arr = _plus_numerators(f, k)[root_box(root, k)]
            half = 2
        N = block_count(f, k)
        if f.is_fixed:
            m = int(arr.max())
            num, den = m * (1 << (2 * k * f.n)), half * f.denom * (1 << (2 * f.L * f.n))
        else:
            m = float(arr.max())
            num, den = m / (half * N * N), 1
        if best_num is None or num * best_den > best_num * den:
            best_num, best_den = num, den
            loc = np.argwhere(arr == arr.max())[0]
            best_at = (k, tuple(int(i) for i in loc))
    assert best_at is not None
    k, idx = best_at
    sh = k - root.level
    sp = tuple(root.spatial[i] * (1 << sh) + idx[i] for i in range(f.n - 1))
    cube = DyadicCube(k, sp, root.time * (1 << sh) + idx[-1])
    val = Fraction(best_num, best_den) if f.is_fixed else float(best_num)
    return SeminormResult(
        functional=kind,
        p=None,
        weight=val,
        value=float(val),
        exact=f.is_fixed,
        mode=f.mode,
        root=root,
        witness=[cube],
        witness_weights=[val],
    )


def bmo_plus_dyadic(f: GridFunction, root: DyadicCube | None = None) -> SeminormResult:
    """sup over dyadic Q of the mean over Q of (f - mean(f over Q+))^+."""
    return _cube_sweep(f, root, "bmo-plus")


def bmo_plus_limit_form(f: GridFunction, root: DyadicCube | None = None) -> SeminormResult:
    """sup over dyadic Q of the mean over Q ∪ Q+ of (f - mean(f over Q++))^+.

    This is the large-p comparison point for jnp_plus_dyadic: as p grows,
    the p-th root of the family optimum approaches this supremum.
    """
    return _cube_sweep(f, root, "bmo-limit")


def _antichain_count(root: DyadicCube, L: int) -> int:
    if root.level == L:
        return 2  # {root} and the empty family
    prod = 1
    for c in children(root, L):
        prod *= _antichain_count(c, L)
    return 1 + prod


def antichain_oracle(
    f: GridFunction,
    p,
    root: DyadicCube | None = None,
    functional: str = "jnp-plus",
    max_cubes: int = 64,
    max_antichains: int = 1 << 20,
) -> SeminormResult:
    """Brute-force family objective: enumerate every antichain.

    Weights come from :func:`phi_plus` / :func:`phi_classical` cell
    iteration, and every antichain of the subcube tree is generated
    through the recursion lists(Q) = [{Q}] + (one list entry per
    combination of child antichains, the all-empty combination giving
    the empty family).  Exact integer totals in fixed mode with integer
    p (weights are put on their lcm denominator), floats otherwise.

    The cube-count bound caps the tree size, not the running time; deep
    one-dimensional trees near the bound have astronomically many
    antichains, which the antichain bound refuses up front.
    """
    root = resolve_root(f, root)
    if functional == "jnp-plus":
        weigh = phi_plus
    elif functional == "jnp-classical":
        weigh = phi_classical
    else:
        raise InvalidParamsError(f"unknown functional {functional!r}")
    q, p_int = _norm_exponent(p)
    nodes: list[DyadicCube] = []
    level_nodes = [root]
    while True:
        nodes.extend(level_nodes)
        if level_nodes[0].level == f.L:
            break
        level_nodes = [c for par in level_nodes for c in children(par, f.L)]
    if len(nodes) > max_cubes:
        raise InstanceTooLargeError(
            f"{len(nodes)} subtree cubes exceed the oracle bound {max_cubes}"
        )
    count = _antichain_count(root, f.L)
    if count > max_antichains:
        raise InstanceTooLargeError(
            f"{count} antichains exceed the enumeration bound {max_antichains}"
        )

    raw = {c: weigh(f, c, p) for c in nodes}
    exact = f.is_fixed and p_int is not None
    if exact:
        den = lcm(*(w.denominator for w in raw.values()))
        wt = {c: w.numerator * (den // w.denominator) for c, w in raw.items()}
        zero: object = 0
    else:
        den = None
        wt = {c: float(w) for c, w in raw.items()}
        zero = 0.0

    def lists(c: DyadicCube) -> list[tuple[object, tuple[DyadicCube, ...]]]:
        # all antichains of the subtree at c (empty included), materialized
        out: list[tuple[object, tuple[DyadicCube, ...]]] = [(wt[c], (c,))]
        if c.level == f.L:
            out.append((zero, ()))
            return out
        for parts in itertools.product(*(lists(ch) for ch in children(c, f.L))):
            w = sum(q2[0] for q2 in parts)
            cs = tuple(itertools.chain.from_iterable(q2[1] for q2 in parts))
            out.append((w, cs))
        return out

    best_w: object = wt[root]
    best_cubes: tuple[DyadicCube, ...] = (root,)
    if root.level < f.L:
        kid_lists = [lists(c) for c in children(root, f.L)]
        kid_weights = [[w for w, _ in kl] for kl in kid_lists]
        sizes = [len(kl) for kl in kid_lists]
        totals = [zero]
        for ws in kid_weights:
            totals = [t + w for t in totals for w in ws]
        flat = max(range(len(totals)), key=totals.__getitem__)
        if totals[flat] > best_w:
            best_w = totals[flat]
            sel = []
            for size in reversed(sizes):
                sel.append(flat % size)
                flat //= size
            sel.reverse()
            best_cubes = tuple(
                itertools.chain.from_iterable(
                    kid_lists[i][j][1] for i, j in enumerate(sel)
                )
            )
    power = Fraction(best_w, den) if exact else float(best_w)
    witness = sorted(best_cubes, key=lambda c: (c.level, c.spatial, c.time))
    return SeminormResult(
        functional=functional + "-oracle",
        p=q,
        weight=power,
        value=_pth_root(power, q),
        exact=exact,
        mode=f.mode,
        root=root,
        witness=witness,
        witness_weights=[raw[c] for c in witness],
        details={"antichains": count, "tree-cubes": len(nodes)},
    )
