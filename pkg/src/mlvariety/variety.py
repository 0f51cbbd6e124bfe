"""Multilinear varieties, explicit point sets, and the directional
convolution calculus with parallelepiped witnesses.

A variety is the common zero set of a finite list of forms, each allowed to
depend on its own subset of factors.  Representation codimension counts the
deduplicated defining forms; it upper-bounds the minimal codimension, which
is the direction the guarantees downstream need.  The canonical empty
variety is a dedicated marker, not a fake nonzero "form": slicing a
partial-support form at a point where it does not vanish has to produce a
representable empty set.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Iterator

import numpy as np

from . import budget
from .errors import PreconditionError
from .field import rref, shift_permutation, vector_from_index
from .forms import MultilinearForm, Shape, coerce_point, eval_form, eval_grid, slice_form


class Variety:
    """Common zero set of support-annotated multilinear forms."""

    __slots__ = ("shape", "forms", "is_empty")

    def __init__(self, shape: Shape, forms: Iterable[MultilinearForm] = (), *, is_empty: bool = False):
        forms = tuple(forms)
        for f in forms:
            if f.shape != shape:
                raise PreconditionError("all defining forms must share the shape")
        if is_empty and forms:
            raise PreconditionError("the canonical empty variety carries no forms")
        object.__setattr__(self, "shape", shape)
        object.__setattr__(self, "forms", forms)
        object.__setattr__(self, "is_empty", bool(is_empty))

    def __setattr__(self, name, value):
        raise AttributeError("Variety is immutable")

    @classmethod
    def full(cls, shape: Shape) -> "Variety":
        return cls(shape, ())

    @classmethod
    def empty(cls, shape: Shape) -> "Variety":
        return cls(shape, (), is_empty=True)

    def canonical(self) -> "Variety":
        """Deduplicated defining list: zero forms dropped, and each
        same-support family replaced by the reduced echelon basis of its
        span (same zero set, possibly fewer forms)."""
        if self.is_empty:
            return self
        groups: dict[tuple[int, ...], list[MultilinearForm]] = {}
        for f in self.forms:
            if f.is_zero():
                continue
            groups.setdefault(f.support, []).append(f)
        out = []
        for support in sorted(groups):
            family = groups[support]
            flat = [f.coeffs.reshape(-1).tolist() for f in family]
            reduced = rref(flat, self.shape.p, width=len(flat[0]))
            for row in reduced:
                out.append(MultilinearForm(self.shape, support, row))
        return Variety(self.shape, out)

    @property
    def codim(self) -> int:
        """Representation codimension: deduplicated defining form count."""
        if self.is_empty:
            raise PreconditionError("the empty variety has no representation codimension")
        return len(self.canonical().forms)

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, Variety)
            and self.shape == other.shape
            and self.is_empty == other.is_empty
            and self.forms == other.forms
        )

    def __hash__(self) -> int:
        return hash((self.shape, self.is_empty, self.forms))

    def __repr__(self) -> str:
        if self.is_empty:
            return f"Variety.empty(p={self.shape.p}, dims={self.shape.dims})"
        return f"Variety(p={self.shape.p}, dims={self.shape.dims}, forms={len(self.forms)})"


def membership(v: Variety, point) -> bool:
    """True iff every defining form vanishes at the point."""
    pt = coerce_point(v.shape, point)
    if v.is_empty:
        return False
    return all(eval_form(f, pt) == 0 for f in v.forms)


def variety_bitmap(v: Variety) -> np.ndarray:
    """Boolean membership array with one axis per factor, indexed by vector
    rank in enumeration order."""
    sizes = v.shape.group_sizes
    budget.charge(v.shape.total_points, "variety bitmap")
    if v.is_empty:
        return np.zeros(sizes, dtype=bool)
    out = np.ones(sizes, dtype=bool)
    for f in v.forms:
        g = eval_grid(f) == 0
        grown = [1] * v.shape.k
        for pos, j in enumerate(f.support):
            grown[j] = g.shape[pos]
        out &= g.reshape(grown)
    return out


def density(v: Variety) -> Fraction:
    """|V| / |G| by full enumeration, exactly."""
    if v.is_empty:
        return Fraction(0)
    count = int(np.count_nonzero(variety_bitmap(v)))
    return Fraction(count, v.shape.total_points)


def variety_points(v: Variety) -> Iterator[tuple[tuple[int, ...], ...]]:
    """Points of the variety in enumeration order."""
    if v.is_empty:
        return
    mask = variety_bitmap(v)
    p = v.shape.p
    for idx in np.argwhere(mask):
        yield tuple(
            vector_from_index(p, v.shape.dims[i], int(t)) for i, t in enumerate(idx)
        )


def slice_variety(v: Variety, factors: Iterable[int], coords) -> Variety:
    """Fiber over a fixed partial point, as a variety on the other factors.

    Forms are partially evaluated.  A form supported entirely inside the
    fixed factors becomes a constant: zero constants are dropped, a nonzero
    constant makes the slice the canonical empty variety.
    """
    factors = tuple(sorted({int(j) for j in factors}))
    coords = tuple(coords)
    if len(coords) != len(factors):
        raise PreconditionError("one coordinate vector per sliced factor")
    if any(j < 0 or j >= v.shape.k for j in factors):
        raise PreconditionError("slice factors outside the shape")
    if len(factors) >= v.shape.k:
        raise PreconditionError("slicing away every factor leaves no ambient group")
    fixed = {j: x for j, x in zip(factors, coords)}
    remaining = [j for j in range(v.shape.k) if j not in fixed]
    reduced = Shape(v.shape.p, tuple(v.shape.dims[j] for j in remaining))
    if v.is_empty:
        return Variety.empty(reduced)
    position = {j: t for t, j in enumerate(remaining)}
    out = []
    for f in v.forms:
        hit = [j for j in factors if j in f.support]
        if set(f.support) <= set(factors):
            point = [
                fixed[j] if j in fixed else (0,) * v.shape.dims[j]
                for j in range(v.shape.k)
            ]
            if eval_form(f, point) != 0:
                return Variety.empty(reduced)
            continue
        g = slice_form(f, hit, tuple(fixed[j] for j in hit)) if hit else f
        out.append(
            MultilinearForm(reduced, tuple(position[j] for j in g.support), g.coeffs)
        )
    return Variety(reduced, out)


def intersect(v1: Variety, v2: Variety) -> Variety:
    """Common zero set: concatenated form lists, deduplicated."""
    if v1.shape != v2.shape:
        raise PreconditionError("intersection needs a common shape")
    if v1.is_empty or v2.is_empty:
        return Variety.empty(v1.shape)
    return Variety(v1.shape, v1.forms + v2.forms).canonical()


# ---------------------------------------------------------------------------
# Point sets
# ---------------------------------------------------------------------------

class PointSet:
    """Explicit membership bitmap over the full product group."""

    __slots__ = ("shape", "mask")

    def __init__(self, shape: Shape, mask: np.ndarray):
        mask = np.asarray(mask, dtype=bool)
        if mask.shape != shape.group_sizes:
            raise PreconditionError(
                f"bitmap shape {mask.shape} does not match group sizes {shape.group_sizes}"
            )
        mask = mask.copy()
        mask.setflags(write=False)
        object.__setattr__(self, "shape", shape)
        object.__setattr__(self, "mask", mask)

    def __setattr__(self, name, value):
        raise AttributeError("PointSet is immutable")

    @classmethod
    def empty(cls, shape: Shape) -> "PointSet":
        return cls(shape, np.zeros(shape.group_sizes, dtype=bool))

    @classmethod
    def from_points(cls, shape: Shape, points) -> "PointSet":
        mask = np.zeros(shape.group_sizes, dtype=bool)
        for pt in points:
            mask[_point_index(shape, pt)] = True
        return cls(shape, mask)

    @property
    def size(self) -> int:
        return int(np.count_nonzero(self.mask))

    def contains(self, point) -> bool:
        return bool(self.mask[_point_index(self.shape, point)])

    def points(self) -> Iterator[tuple[tuple[int, ...], ...]]:
        p = self.shape.p
        for idx in np.argwhere(self.mask):
            yield tuple(
                vector_from_index(p, self.shape.dims[i], int(t))
                for i, t in enumerate(idx)
            )


def _point_index(shape: Shape, point) -> tuple[int, ...]:
    pt = coerce_point(shape, point)
    idx = []
    for x in pt:
        r = 0
        for c in x:
            r = r * shape.p + c
        idx.append(r)
    return tuple(idx)


# ---------------------------------------------------------------------------
# Directional convolutions and parallelepiped witnesses
# ---------------------------------------------------------------------------

def directional_convolution(s: PointSet, direction: int, point) -> Fraction:
    """Exact value of the direction-i convolution of the set indicator:
    the fraction of y in that factor with both translated points inside."""
    shape = s.shape
    pt = coerce_point(shape, point)
    if not 0 <= direction < shape.k:
        raise PreconditionError("direction outside the shape")
    n = shape.dims[direction]
    perm = shift_permutation(shape.p, n, pt[direction])
    budget.charge(shape.total_points, "directional convolution")
    both = s.mask & np.take(s.mask, perm, axis=direction)
    idx = _point_index(shape, pt)
    sel = tuple(
        slice(None) if i == direction else idx[i] for i in range(shape.k)
    )
    return Fraction(int(np.count_nonzero(both[sel])), shape.p**n)


def _box_offset_mask(shape: Shape, mask: np.ndarray, point) -> np.ndarray:
    """Offsets y whose full parallelepiped at the given base lies in the set.

    One shift-and-intersect round per direction: after processing direction
    i the surviving offsets have both the plain and the shifted corner in
    the set for every combination of processed directions.
    """
    pt = coerce_point(shape, point)
    out = mask
    for i in range(shape.k):
        perm = shift_permutation(shape.p, shape.dims[i], pt[i])
        out = out & np.take(out, perm, axis=i)
    return out


@dataclass(frozen=True)
class Parallelepiped:
    """Base point plus one offset per direction; the corner for a subset T
    of directions takes coordinate i to offset_i + base_i when i is in T and
    to offset_i otherwise."""

    shape: Shape
    base: tuple[tuple[int, ...], ...]
    offsets: tuple[tuple[int, ...], ...]

    def corners(self) -> list[tuple[tuple[int, ...], ...]]:
        """All 2**k corners, listed by the subset bitmask (bit i set means
        direction i is shifted)."""
        p = self.shape.p
        out = []
        for mask in range(2**self.shape.k):
            corner = []
            for i in range(self.shape.k):
                if mask >> i & 1:
                    corner.append(
                        tuple((a + b) % p for a, b in zip(self.offsets[i], self.base[i]))
                    )
                else:
                    corner.append(self.offsets[i])
            out.append(tuple(corner))
        return out


def iterated_conv_witness(v: Variety, bad: PointSet, point) -> Parallelepiped | None:
    """Search for a parallelepiped based at the point with every corner in
    the variety and outside the bad set.

    The first witness in depth-first order over offsets (last direction
    outermost) is returned; equivalently, the offset tuple minimizing the
    reversed lexicographic order over the surviving offset mask.
    """
    shape = v.shape
    if bad.shape != shape:
        raise PreconditionError("bad set must live on the variety's shape")
    wmask = variety_bitmap(v)
    if bool(np.any(bad.mask & ~wmask)):
        raise PreconditionError("bad set must be a subset of the variety")
    return _witness_from_masks(shape, wmask & ~bad.mask, point)


def _witness_from_masks(shape: Shape, allowed: np.ndarray, point) -> Parallelepiped | None:
    pt = coerce_point(shape, point)
    offsets = _box_offset_mask(shape, allowed, pt)
    if not offsets.any():
        return None
    reversed_axes = tuple(reversed(range(shape.k)))
    flat = int(np.argmax(np.transpose(offsets, reversed_axes)))
    rev_idx = np.unravel_index(flat, tuple(offsets.shape[i] for i in reversed_axes))
    idx = tuple(reversed(rev_idx))
    off = tuple(
        vector_from_index(shape.p, shape.dims[i], int(t)) for i, t in enumerate(idx)
    )
    return Parallelepiped(shape, pt, off)


@dataclass(frozen=True)
class ConvFillReport:
    """Outcome of checking the filling property at every variety point."""

    codim: int
    bad_size: int
    bad_cap: Fraction
    checked: int
    corners_checked: int
    failures: tuple
    success: bool


def conv_fill_check(v: Variety, bad: PointSet) -> ConvFillReport:
    """Demand a parallelepiped witness at every point of the variety.

    Preconditions (rejected with a diagnostic when violated): the bad set
    lies inside the variety and |bad| <= 2**(-2k) p**(-k r) |G| where r is
    the representation codimension.  Each witness's corners are re-checked
    against the bad set before it counts.
    """
    shape = v.shape
    if bad.shape != shape:
        raise PreconditionError("bad set must live on the variety's shape")
    wmask = variety_bitmap(v)
    if bool(np.any(bad.mask & ~wmask)):
        raise PreconditionError("bad set must be a subset of the variety")
    k = shape.k
    r = v.codim
    cap = Fraction(shape.total_points, 2 ** (2 * k) * shape.p ** (k * r))
    if bad.size > cap:
        raise PreconditionError(
            f"bad set of size {bad.size} exceeds the allowed {cap} "
            f"(k={k}, codim={r}, |G|={shape.total_points})"
        )
    allowed = wmask & ~bad.mask
    p = shape.p
    failures = []
    checked = 0
    corners_checked = 0
    budget.charge(int(np.count_nonzero(wmask)) * k, "filling check")
    for idx in np.argwhere(wmask):
        pt = tuple(
            vector_from_index(p, shape.dims[i], int(t)) for i, t in enumerate(idx)
        )
        checked += 1
        witness = _witness_from_masks(shape, allowed, pt)
        if witness is None:
            failures.append(pt)
            continue
        for corner in witness.corners():
            if not allowed[_point_index(shape, corner)]:
                raise PreconditionError("witness corner escaped the allowed set")
            corners_checked += 1
    return ConvFillReport(
        codim=r,
        bad_size=bad.size,
        bad_cap=cap,
        checked=checked,
        corners_checked=corners_checked,
        failures=tuple(failures),
        success=not failures,
    )
