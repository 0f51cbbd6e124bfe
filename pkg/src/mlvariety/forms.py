"""Multilinear forms and maps as dense coefficient tensors over F_p.

A form carries a support: the subset of factors it actually depends on.  It
is multilinear as a function of those factors and ignores the rest.  Bias,
analytic rank and the partition-rank oracles all work with exact rational
arithmetic; floating point appears only in the reported log value of the
analytic rank, never in a decision.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, NamedTuple, Sequence

import numpy as np

from . import budget
from .errors import ConstructionError, PreconditionError, ZeroBiasError
from .field import all_vectors, as_coords, rref, validate_prime


@dataclass(frozen=True)
class Shape:
    """The ambient product group: k factors F_p^{n_1} x ... x F_p^{n_k}."""

    p: int
    dims: tuple[int, ...]

    def __post_init__(self):
        validate_prime(self.p)
        object.__setattr__(self, "dims", tuple(int(n) for n in self.dims))
        if len(self.dims) < 1:
            raise PreconditionError("a shape needs at least one factor")
        if any(n < 0 for n in self.dims):
            raise PreconditionError("factor dimensions must be non-negative")

    @property
    def k(self) -> int:
        return len(self.dims)

    @property
    def group_sizes(self) -> tuple[int, ...]:
        return tuple(self.p**n for n in self.dims)

    @property
    def total_points(self) -> int:
        return self.p ** sum(self.dims)


def coerce_point(shape: Shape, point) -> tuple[tuple[int, ...], ...]:
    """Validate and reduce a full point, one coordinate tuple per factor."""
    pt = tuple(point)
    if len(pt) != shape.k:
        raise PreconditionError(f"point has {len(pt)} factors, shape has {shape.k}")
    return tuple(as_coords(x, shape.p, n) for x, n in zip(pt, shape.dims))


class MultilinearForm:
    """A coefficient tensor with one axis per support factor.

    Entries are reduced mod p.  Empty support is allowed only for the
    canonical zero form; a form in zero variables is identically zero by
    convention.
    """

    __slots__ = ("shape", "support", "coeffs")

    def __init__(self, shape: Shape, support: Iterable[int], coeffs):
        support = tuple(sorted({int(j) for j in support}))
        if any(j < 0 or j >= shape.k for j in support):
            raise PreconditionError(f"support {support} outside factors of {shape}")
        expected = tuple(shape.dims[j] for j in support)
        arr = np.asarray(coeffs, dtype=np.int64)
        if arr.shape != expected:
            if arr.size != math.prod(expected):
                raise PreconditionError(
                    f"coefficient tensor has {arr.size} entries, expected "
                    f"{math.prod(expected)} for support {support}"
                )
            arr = arr.reshape(expected)
        arr = (arr % shape.p).astype(np.uint8)
        if not support and arr.any():
            raise PreconditionError("empty-support forms must be identically zero")
        arr.setflags(write=False)
        object.__setattr__(self, "shape", shape)
        object.__setattr__(self, "support", support)
        object.__setattr__(self, "coeffs", arr)

    def __setattr__(self, name, value):
        raise AttributeError("MultilinearForm is immutable")

    def is_zero(self) -> bool:
        return not self.coeffs.any()

    def key(self) -> tuple:
        return (self.support, self.coeffs.tobytes())

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, MultilinearForm)
            and self.shape == other.shape
            and self.key() == other.key()
        )

    def __hash__(self) -> int:
        return hash((self.shape, self.key()))

    def __repr__(self) -> str:
        return (
            f"MultilinearForm(p={self.shape.p}, dims={self.shape.dims}, "
            f"support={self.support}, coeffs={self.coeffs.tolist()})"
        )


def zero_form(shape: Shape) -> MultilinearForm:
    return MultilinearForm(shape, (), np.zeros((), dtype=np.uint8))


def product_form(
    shape: Shape,
    left_support: Iterable[int],
    left_coeffs,
    right_support: Iterable[int],
    right_coeffs,
) -> MultilinearForm:
    """The form beta(x_I) * gamma(x_J) for disjoint supports I and J."""
    left_support = tuple(sorted({int(j) for j in left_support}))
    right_support = tuple(sorted({int(j) for j in right_support}))
    if set(left_support) & set(right_support):
        raise PreconditionError("product factors must use disjoint supports")
    if not left_support or not right_support:
        raise PreconditionError("both factors of a product form need variables")
    beta = np.asarray(left_coeffs, dtype=np.int64).reshape(
        tuple(shape.dims[j] for j in left_support)
    )
    gamma = np.asarray(right_coeffs, dtype=np.int64).reshape(
        tuple(shape.dims[j] for j in right_support)
    )
    outer = np.multiply.outer(beta, gamma) % shape.p
    combined = left_support + right_support
    order = np.argsort(combined, kind="stable")
    return MultilinearForm(shape, sorted(combined), np.transpose(outer, order))


class MultilinearMap:
    """A stack of forms sharing shape and support; codomain F_p^m."""

    __slots__ = ("shape", "support", "components")

    def __init__(self, shape: Shape, support: Iterable[int], components):
        support = tuple(sorted({int(j) for j in support}))
        components = tuple(components)
        for f in components:
            if f.shape != shape or f.support != support:
                raise PreconditionError("map components must share shape and support")
        object.__setattr__(self, "shape", shape)
        object.__setattr__(self, "support", support)
        object.__setattr__(self, "components", components)

    def __setattr__(self, name, value):
        raise AttributeError("MultilinearMap is immutable")

    @property
    def codomain_dim(self) -> int:
        return len(self.components)

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, MultilinearMap)
            and self.shape == other.shape
            and self.support == other.support
            and self.components == other.components
        )

    def __hash__(self) -> int:
        return hash((self.shape, self.support, self.components))


# ---------------------------------------------------------------------------
# Evaluation
# ---------------------------------------------------------------------------

def eval_form(form: MultilinearForm, point) -> int:
    """Contract the coefficient tensor with the point's support coordinates."""
    pt = coerce_point(form.shape, point)
    t = form.coeffs.astype(np.int64)
    for j in form.support:
        x = np.asarray(pt[j], dtype=np.int64)
        t = np.tensordot(t, x, axes=([0], [0])) % form.shape.p
    return int(t)


def eval_map(m: MultilinearMap, point) -> tuple[int, ...]:
    return tuple(eval_form(f, point) for f in m.components)


def _value_grid(p: int, axis_dims: Sequence[int], coeffs) -> np.ndarray:
    """Values over the product of the given factors, one axis per factor.

    Axis t has size p**axis_dims[t] and is indexed by vector rank in
    enumeration order.
    """
    total = 1
    for n in axis_dims:
        total *= p**n
    budget.charge(total, "evaluation grid")
    t = np.asarray(coeffs, dtype=np.int64) % p
    for n in axis_dims:
        table = all_vectors(p, n).astype(np.int64)
        t = np.tensordot(t, table, axes=([0], [1])) % p
    return t.astype(np.uint8)


def eval_grid(form: MultilinearForm) -> np.ndarray:
    """Values of the form at every point of its support product group."""
    dims = [form.shape.dims[j] for j in form.support]
    return _value_grid(form.shape.p, dims, form.coeffs)


def slice_form(form: MultilinearForm, factors: Iterable[int], coords) -> MultilinearForm:
    """Partial evaluation: fix the given support factors at the given vectors.

    The result keeps the ambient shape with support shrunk to the remaining
    factors.  Slicing away the whole support is rejected; use eval_form.
    """
    factors = tuple(sorted({int(j) for j in factors}))
    if not set(factors) <= set(form.support):
        raise PreconditionError(
            f"slice factors {factors} must lie inside the support {form.support}"
        )
    remaining = tuple(j for j in form.support if j not in factors)
    if not remaining:
        raise PreconditionError("slicing away the whole support; use eval_form")
    coords = tuple(coords)
    if len(coords) != len(factors):
        raise PreconditionError("one coordinate vector per sliced factor")
    fixed = {
        j: as_coords(x, form.shape.p, form.shape.dims[j])
        for j, x in zip(factors, coords)
    }
    t = form.coeffs.astype(np.int64)
    for j in sorted(factors, reverse=True):
        axis = form.support.index(j)
        vec = np.asarray(fixed[j], dtype=np.int64)
        t = np.tensordot(t, vec, axes=([axis], [0])) % form.shape.p
    return MultilinearForm(form.shape, remaining, t)


# ---------------------------------------------------------------------------
# Bias and analytic rank
# ---------------------------------------------------------------------------

def bias(form: MultilinearForm) -> Fraction:
    """Exact bias of a multilinear form, as a rational in [0, 1].

    For each assignment of the support variables except the last support
    factor, the inner average of the root-of-unity phase over that factor is
    1 when the induced linear form vanishes identically and 0 otherwise.  So
    the bias equals the fraction of outer assignments whose induced linear
    form is zero, which we count exactly, one coefficient slice at a time.
    """
    if form.is_zero():
        return Fraction(1)
    p = form.shape.p
    last_axis = len(form.support) - 1
    outer_dims = [form.shape.dims[j] for j in form.support[:-1]]
    outer_total = p ** sum(outer_dims)
    kernel = None
    for i in range(form.shape.dims[form.support[-1]]):
        component = np.take(form.coeffs, i, axis=last_axis)
        g = _value_grid(p, outer_dims, component) == 0
        kernel = g if kernel is None else (kernel & g)
    count = int(np.count_nonzero(kernel))
    return Fraction(count, outer_total)


class AnalyticRank(NamedTuple):
    value: float
    bias: Fraction


def analytic_rank(form: MultilinearForm) -> AnalyticRank:
    """log_p of the reciprocal bias, carrying the exact bias alongside."""
    b = bias(form)
    if b == 0:
        raise ZeroBiasError(
            "bias is zero (support is a single factor and the form is nonzero); "
            "the analytic rank is infinite"
        )
    value = (math.log(b.denominator) - math.log(b.numerator)) / math.log(form.shape.p)
    return AnalyticRank(value, b)


def ceil_log(p: int, value: Fraction | int) -> int:
    """Least t >= 0 with p**t >= value, by exact comparison."""
    value = Fraction(value)
    t, power = 0, 1
    while power < value:
        power *= p
        t += 1
    return t


def prank_lower_bound(form: MultilinearForm) -> int:
    """ceil(log_p 1/bias): no decomposition into fewer factorizable summands
    can exist, because r summands force bias >= p**-r."""
    b = bias(form)
    if b == 0:
        raise ZeroBiasError("bias is zero; no finite partition rank bound applies")
    return ceil_log(form.shape.p, 1 / b)


@dataclass(frozen=True)
class ZeroFiberReport:
    """Outcome of the zero-fiber counting identity."""

    factor: int
    zero_fiber_count: int
    outer_points: int
    expected: Fraction
    holds: bool


def zero_fiber_identity_check(form: MultilinearForm) -> ZeroFiberReport:
    """Check |{x : induced linear form at x is 0}| == bias * |outer group|.

    The outer group is the product of all factors except the last support
    factor.  The left side is counted from the full value grid (a fiber is
    zero iff the form vanishes at every point of that factor), the right
    side comes from the kernel-counting bias; exact equality is required.
    """
    if form.shape.k < 2:
        raise PreconditionError("the identity needs at least two factors")
    p = form.shape.p
    sizes = form.shape.group_sizes
    if form.is_zero():
        j = form.shape.k - 1
        outer = math.prod(sizes[:j] + sizes[j + 1 :])
        return ZeroFiberReport(j, outer, outer, Fraction(outer), True)
    j = form.support[-1]
    outer = math.prod(sizes[l] for l in range(form.shape.k) if l != j)
    grid = eval_grid(form)
    fiber_zero = (grid == 0).all(axis=len(form.support) - 1)
    support_outer = math.prod(p ** form.shape.dims[l] for l in form.support[:-1])
    count = int(np.count_nonzero(fiber_zero)) * (outer // support_outer)
    expected = bias(form) * outer
    return ZeroFiberReport(j, count, outer, expected, expected == count)


# ---------------------------------------------------------------------------
# Partition rank
# ---------------------------------------------------------------------------

def partition_rank_bilinear(form: MultilinearForm) -> int:
    """Exact partition rank of a form in two variables: its matrix rank.

    Every factorizable summand of a two-variable form is a rank-one matrix,
    and any rank-r matrix splits into r rank-one terms, so the two notions
    coincide.
    """
    if form.is_zero():
        return 0
    if len(form.support) != 2:
        raise PreconditionError("matrix-rank partition rank needs exactly two variables")
    return rref(form.coeffs.tolist(), form.shape.p).shape[0]


def matricization_rank_bound(form: MultilinearForm) -> int:
    """Upper bound: min over support factors of the flattening matrix rank.

    Expanding along the factor achieving the minimum writes the form as that
    many factorizable summands.
    """
    if form.is_zero():
        return 0
    best = None
    p = form.shape.p
    for axis in range(len(form.support)):
        mat = np.moveaxis(form.coeffs, axis, 0).reshape(form.coeffs.shape[axis], -1)
        r = rref(mat.tolist(), p).shape[0]
        best = r if best is None else min(best, r)
    return int(best)


def _factorizable_tensors(shape: Shape, support: tuple[int, ...]) -> np.ndarray:
    """All distinct nonzero product tensors on the support, as flat digit rows.

    Symmetry reductions: the split I ranges over subsets containing the first
    support factor (swapping I with its complement swaps the two factors of
    the product), and beta's first nonzero coefficient is pinned to 1 (other
    scalars are absorbed into gamma).
    """
    p = shape.p
    dims = {j: shape.dims[j] for j in support}
    seen = set()
    rows = []
    others = support[1:]
    for mask in range(2 ** len(others)):
        left = (support[0],) + tuple(
            j for t, j in enumerate(others) if mask >> t & 1
        )
        right = tuple(j for j in support if j not in left)
        if not right:
            continue
        ldim = math.prod(dims[j] for j in left)
        rdim = math.prod(dims[j] for j in right)
        for bcode in range(1, p**ldim):
            beta = vector_digits(p, ldim, bcode)
            first = next(c for c in beta if c)
            if first != 1:
                continue
            for gcode in range(1, p**rdim):
                gamma = vector_digits(p, rdim, gcode)
                f = product_form(shape, left, beta, right, gamma)
                key = f.coeffs.tobytes()
                if key not in seen:
                    seen.add(key)
                    rows.append(f.coeffs.reshape(-1))
    return np.array(rows, dtype=np.int64)


def vector_digits(p: int, length: int, code: int) -> list[int]:
    out = []
    for _ in range(length):
        out.append(code % p)
        code //= p
    return list(reversed(out))


def partition_rank_search(form: MultilinearForm) -> int | tuple[int, int]:
    """Least number of factorizable summands equal to the form.

    Breadth-first search over the whole coefficient-tensor space: sums of r
    factorizable tensors are exactly the points at distance r from zero in
    the Cayley graph generated by the factorizable tensors, so the graph
    distance of the target is its partition rank.  Exhaustive and exact on
    tiny shapes; when the space exceeds the point budget, returns the honest
    interval (bias lower bound, flattening-rank upper bound) instead.
    """
    if form.is_zero():
        return 0
    support = form.support
    if len(support) < 2:
        raise PreconditionError("partition rank needs at least two support factors")
    p = form.shape.p
    entry_count = math.prod(form.shape.dims[j] for j in support)
    space = p**entry_count
    gen_estimate = _generator_count_estimate(form.shape, support)
    if space * max(gen_estimate, 1) > budget.point_budget():
        return (prank_lower_bound(form), matricization_rank_bound(form))
    gens = _factorizable_tensors(form.shape, support)
    budget.charge(space * max(len(gens), 1), "partition rank search")
    powers = np.array([p ** (entry_count - 1 - t) for t in range(entry_count)],
                      dtype=np.int64)
    target = int(form.coeffs.reshape(-1).astype(np.int64) @ powers)
    gen_codes = gens @ powers
    visited = np.zeros(space, dtype=bool)
    visited[0] = True
    frontier = np.array([0], dtype=np.int64)
    dist = 0
    while True:
        dist += 1
        if p == 2:
            images = frontier[:, None] ^ gen_codes[None, :]
        else:
            digits = (frontier[:, None] // powers[None, :]) % p
            summed = (digits[:, None, :] + gens[None, :, :]) % p
            images = summed.reshape(-1, entry_count) @ powers
        images = np.unique(images.reshape(-1))
        fresh = images[~visited[images]]
        if target in fresh:
            return dist
        if fresh.size == 0:
            # expanding along any support factor writes every tensor as a sum
            # of factorizable ones, so the generators span the space
            raise ConstructionError("factorizable generators failed to span the space")
        visited[fresh] = True
        frontier = fresh


def _generator_count_estimate(shape: Shape, support: tuple[int, ...]) -> int:
    p = shape.p
    total = 0
    others = support[1:]
    for mask in range(2 ** len(others)):
        left = [support[0]] + [j for t, j in enumerate(others) if mask >> t & 1]
        right = [j for j in support if j not in left]
        if not right:
            continue
        ldim = math.prod(shape.dims[j] for j in left)
        rdim = math.prod(shape.dims[j] for j in right)
        total += (p**ldim - 1) * (p**rdim - 1) // (p - 1)
    return total
