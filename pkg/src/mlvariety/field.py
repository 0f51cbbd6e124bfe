"""Prime-field substrate: residue vectors, echelon-form subspaces, and fast
lexicographic enumeration of F_p^n at desk scale.

Enumeration order is part of the contract: vectors stream in lexicographic
order with the last coordinate varying fastest, and every "first point found"
tie-break downstream relies on it.  All values are immutable after
construction and all operations are pure functions.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Iterable, Iterator, Sequence

import numpy as np

from . import budget
from .errors import PreconditionError

MAX_PRIME = 17


def validate_prime(p: int) -> int:
    """Check that p is a prime in [2, 17] (the desk-scale guard)."""
    if not isinstance(p, int) or isinstance(p, bool):
        raise PreconditionError(f"modulus must be an int, got {type(p).__name__}")
    if p < 2 or p > MAX_PRIME:
        raise PreconditionError(f"modulus must lie in [2, {MAX_PRIME}], got {p}")
    for d in range(2, math.isqrt(p) + 1):
        if p % d == 0:
            raise PreconditionError(f"modulus {p} is not prime")
    return p


@dataclass(frozen=True)
class FieldVec:
    """A vector over F_p; coordinates are reduced mod p at construction."""

    p: int
    coords: tuple[int, ...]

    def __post_init__(self):
        validate_prime(self.p)
        object.__setattr__(
            self, "coords", tuple(int(c) % self.p for c in self.coords)
        )

    @property
    def dim(self) -> int:
        return len(self.coords)

    def __len__(self) -> int:
        return len(self.coords)

    def __iter__(self):
        return iter(self.coords)

    def is_zero(self) -> bool:
        return not any(self.coords)


def zero_vec(p: int, dim: int) -> FieldVec:
    return FieldVec(p, (0,) * dim)


def _check_pair(a: FieldVec, b: FieldVec) -> None:
    if a.p != b.p:
        raise PreconditionError(f"modulus mismatch: {a.p} vs {b.p}")
    if a.dim != b.dim:
        raise PreconditionError(f"dimension mismatch: {a.dim} vs {b.dim}")


def vec_add(a: FieldVec, b: FieldVec) -> FieldVec:
    """Coordinate-wise sum mod p."""
    _check_pair(a, b)
    return FieldVec(a.p, tuple((x + y) % a.p for x, y in zip(a.coords, b.coords)))


def vec_neg(a: FieldVec) -> FieldVec:
    return FieldVec(a.p, tuple((-x) % a.p for x in a.coords))


def vec_scale(a: FieldVec, s: int) -> FieldVec:
    return FieldVec(a.p, tuple((s * x) % a.p for x in a.coords))


def vec_dot(a: FieldVec, b: FieldVec) -> int:
    _check_pair(a, b)
    return sum(x * y for x, y in zip(a.coords, b.coords)) % a.p


def as_coords(v, p: int, dim: int) -> tuple[int, ...]:
    """Coerce a FieldVec or plain coordinate sequence to reduced coordinates."""
    if isinstance(v, FieldVec):
        if v.p != p:
            raise PreconditionError(f"modulus mismatch: {v.p} vs {p}")
        coords = v.coords
    else:
        coords = tuple(int(c) % p for c in v)
    if len(coords) != dim:
        raise PreconditionError(f"dimension mismatch: {len(coords)} vs {dim}")
    return coords


# ---------------------------------------------------------------------------
# Enumeration and index arithmetic
# ---------------------------------------------------------------------------

def enumerate_vectors(p: int, dim: int) -> Iterator[FieldVec]:
    """Yield all p**dim vectors once, lexicographically, last coordinate fastest."""
    validate_prime(p)
    if dim < 0:
        raise PreconditionError("dimension must be non-negative")
    budget.charge(p**dim, "vector enumeration")
    for coords in itertools.product(range(p), repeat=dim):
        yield FieldVec(p, coords)


def vector_index(p: int, coords: Sequence[int]) -> int:
    """Rank of a vector in enumeration order."""
    idx = 0
    for c in coords:
        idx = idx * p + (int(c) % p)
    return idx


def vector_from_index(p: int, dim: int, idx: int) -> tuple[int, ...]:
    """Inverse of vector_index."""
    out = []
    for _ in range(dim):
        out.append(idx % p)
        idx //= p
    return tuple(reversed(out))


@lru_cache(maxsize=None)
def all_vectors(p: int, n: int) -> np.ndarray:
    """(p**n, n) table of all vectors of F_p^n, rows in enumeration order."""
    validate_prime(p)
    budget.ensure(p**n, "vector table")
    if n == 0:
        arr = np.zeros((1, 0), dtype=np.uint8)
    else:
        r = np.arange(p**n, dtype=np.int64)
        cols = [(r // p ** (n - 1 - t)) % p for t in range(n)]
        arr = np.stack(cols, axis=1).astype(np.uint8)
    arr.setflags(write=False)
    return arr


@lru_cache(maxsize=None)
def shift_permutation(p: int, n: int, shift: tuple[int, ...]) -> np.ndarray:
    """Index permutation of F_p^n realizing v -> v + shift."""
    table = all_vectors(p, n).astype(np.int64)
    moved = (table + np.asarray(shift, dtype=np.int64)) % p
    powers = np.array([p ** (n - 1 - t) for t in range(n)], dtype=np.int64)
    perm = moved @ powers if n else np.zeros(1, dtype=np.int64)
    perm.setflags(write=False)
    return perm


# ---------------------------------------------------------------------------
# Gaussian elimination and subspaces
# ---------------------------------------------------------------------------

def rref(rows, p: int, width: int | None = None) -> np.ndarray:
    """Reduced row echelon form over F_p, zero rows dropped."""
    mat = [list(r) for r in rows]
    if not mat:
        return np.zeros((0, width or 0), dtype=np.uint8)
    a = np.array(mat, dtype=np.int64) % p
    nrows, ncols = a.shape
    if width is not None and width != ncols:
        raise PreconditionError(f"row width mismatch: {ncols} vs {width}")
    pivot_row = 0
    for col in range(ncols):
        sel = None
        for r in range(pivot_row, nrows):
            if a[r, col]:
                sel = r
                break
        if sel is None:
            continue
        if sel != pivot_row:
            a[[pivot_row, sel]] = a[[sel, pivot_row]]
        inv = pow(int(a[pivot_row, col]), -1, p)
        a[pivot_row] = (a[pivot_row] * inv) % p
        for r in range(nrows):
            if r != pivot_row and a[r, col]:
                a[r] = (a[r] - a[r, col] * a[pivot_row]) % p
        pivot_row += 1
        if pivot_row == nrows:
            break
    return a[:pivot_row].astype(np.uint8)


@dataclass(frozen=True)
class Subspace:
    """Row space in reduced echelon form: nonzero rows, pivots strictly
    increasing, pivot columns cleared above and below."""

    p: int
    ambient_dim: int
    basis: tuple[FieldVec, ...]

    def __post_init__(self):
        validate_prime(self.p)
        pivots = []
        for row in self.basis:
            if row.p != self.p or row.dim != self.ambient_dim:
                raise PreconditionError("basis rows do not match the subspace")
            pivot = next((i for i, c in enumerate(row.coords) if c), None)
            if pivot is None or (pivots and pivot <= pivots[-1]):
                raise PreconditionError("basis is not in reduced echelon form")
            if row.coords[pivot] != 1:
                raise PreconditionError("pivot entries must be 1")
            pivots.append(pivot)
        for r, row in enumerate(self.basis):
            for rr, col in enumerate(pivots):
                if rr != r and row.coords[col] != 0:
                    raise PreconditionError("pivot columns must be cleared")

    @property
    def rank(self) -> int:
        return len(self.basis)

    @property
    def codim(self) -> int:
        return self.ambient_dim - self.rank

    def pivots(self) -> tuple[int, ...]:
        return tuple(
            next(i for i, c in enumerate(row.coords) if c) for row in self.basis
        )

    def matrix(self) -> np.ndarray:
        return np.array([row.coords for row in self.basis], dtype=np.uint8).reshape(
            self.rank, self.ambient_dim
        )


def echelonize(vectors: Iterable, *, p: int | None = None, ambient_dim: int | None = None) -> Subspace:
    """Span of the given vectors, as a reduced-echelon Subspace.

    p and ambient_dim are only required for an empty input.
    """
    vecs = list(vectors)
    if vecs:
        first = vecs[0]
        if isinstance(first, FieldVec):
            p = first.p if p is None else p
            ambient_dim = first.dim if ambient_dim is None else ambient_dim
        if p is None or ambient_dim is None:
            raise PreconditionError("p and ambient_dim are required for raw rows")
        rows = [as_coords(v, p, ambient_dim) for v in vecs]
    else:
        if p is None or ambient_dim is None:
            raise PreconditionError("empty input needs explicit p and ambient_dim")
        rows = []
    validate_prime(p)
    reduced = rref(rows, p, width=ambient_dim)
    basis = tuple(FieldVec(p, tuple(int(c) for c in row)) for row in reduced)
    return Subspace(p, ambient_dim, basis)


def subspace_contains(s: Subspace, v) -> bool:
    """True iff v reduces to zero against the echelon basis."""
    coords = list(as_coords(v, s.p, s.ambient_dim))
    for row, pivot in zip(s.basis, s.pivots()):
        coeff = coords[pivot]
        if coeff:
            for i, c in enumerate(row.coords):
                coords[i] = (coords[i] - coeff * c) % s.p
    return not any(coords)


def subspace_points(s: Subspace) -> Iterator[FieldVec]:
    """All p**rank points of the subspace, in combination-lexicographic order."""
    budget.charge(s.p**s.rank, "subspace enumeration")
    for combo in itertools.product(range(s.p), repeat=s.rank):
        acc = [0] * s.ambient_dim
        for coeff, row in zip(combo, s.basis):
            if coeff:
                for i, c in enumerate(row.coords):
                    acc[i] = (acc[i] + coeff * c) % s.p
        yield FieldVec(s.p, tuple(acc))


def annihilator(s: Subspace) -> Subspace:
    """Vectors w with w . v = 0 for every v in s; rank = ambient_dim - rank(s)."""
    n, p = s.ambient_dim, s.p
    piv = set(s.pivots())
    rows = s.matrix().astype(np.int64)
    out = []
    pivot_list = s.pivots()
    for free in range(n):
        if free in piv:
            continue
        w = [0] * n
        w[free] = 1
        for r, pcol in enumerate(pivot_list):
            w[pcol] = (-int(rows[r, free])) % p
        out.append(w)
    return echelonize(out, p=p, ambient_dim=n)
