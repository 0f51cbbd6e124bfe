import random
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from mlvariety import budget
from mlvariety.errors import PreconditionError, ZeroBiasError
from mlvariety.forms import (
    MultilinearForm,
    MultilinearMap,
    Shape,
    analytic_rank,
    bias,
    eval_form,
    eval_grid,
    matricization_rank_bound,
    partition_rank_bilinear,
    partition_rank_search,
    prank_lower_bound,
    product_form,
    slice_form,
    zero_fiber_identity_check,
    zero_form,
)
from mlvariety.generators import planted_low_prank_form, random_form, random_support

from helpers import brute_bias, brute_eval, brute_rank_mod, enumerate_points, small_dims


def rand_shape(rng, max_k=3, max_total=6) -> Shape:
    p = rng.choice([2, 3])
    k = rng.randrange(1, max_k + 1)
    return Shape(p, small_dims(rng, k, max_total))


# ---------------------------------------------------------------------------
# Construction and evaluation
# ---------------------------------------------------------------------------

def test_empty_support_must_be_zero():
    sh = Shape(2, (1, 1))
    assert zero_form(sh).is_zero()
    with pytest.raises(PreconditionError):
        MultilinearForm(sh, (), np.ones(()))


def test_eval_zero_form_anywhere():
    sh = Shape(3, (2, 1))
    assert eval_form(zero_form(sh), ((1, 2), (2,))) == 0


def test_eval_single_monomial():
    sh = Shape(2, (1, 1))
    f = MultilinearForm(sh, (0, 1), [[1]])
    assert eval_form(f, ((1,), (1,))) == 1
    assert eval_form(f, ((1,), (0,))) == 0


def test_eval_dot_product_mod3():
    sh = Shape(3, (2, 2))
    f = MultilinearForm(sh, (0, 1), np.eye(2, dtype=int))
    assert eval_form(f, ((1, 2), (2, 2))) == 0  # 1*2 + 2*2 = 6 = 0 mod 3


@given(st.integers(0, 2**32 - 1))
@settings(max_examples=50, deadline=None)
def test_eval_matches_bruteforce(seed):
    rng = random.Random(seed)
    sh = rand_shape(rng)
    f = random_form(rng, sh, random_support(rng, sh.k))
    point = tuple(
        tuple(rng.randrange(sh.p) for _ in range(n)) for n in sh.dims
    )
    assert eval_form(f, point) == brute_eval(f, point)


@given(st.integers(0, 2**32 - 1))
@settings(max_examples=30, deadline=None)
def test_multilinearity_in_each_slot(seed):
    rng = random.Random(seed)
    sh = rand_shape(rng)
    f = random_form(rng, sh, random_support(rng, sh.k))
    slot = rng.choice(f.support) if f.support else 0
    base = [tuple(rng.randrange(sh.p) for _ in range(n)) for n in sh.dims]
    a = tuple(rng.randrange(sh.p) for _ in range(sh.dims[slot]))
    b = tuple(rng.randrange(sh.p) for _ in range(sh.dims[slot]))
    lam = rng.randrange(sh.p)

    def at(vec):
        pt = list(base)
        pt[slot] = vec
        return eval_form(f, pt)

    summed = tuple((x + y) % sh.p for x, y in zip(a, b))
    assert at(summed) == (at(a) + at(b)) % sh.p
    scaled = tuple((lam * x) % sh.p for x in a)
    assert at(scaled) == (lam * at(a)) % sh.p


def test_eval_grid_matches_pointwise():
    rng = random.Random(11)
    sh = Shape(2, (2, 2))
    f = random_form(rng, sh)
    grid = eval_grid(f)
    for point in enumerate_points(sh):
        idx = tuple(
            sum(c * sh.p**(len(x) - 1 - t) for t, c in enumerate(x)) for x in point
        )
        assert int(grid[idx]) == brute_eval(f, point)


# ---------------------------------------------------------------------------
# Slicing
# ---------------------------------------------------------------------------

def test_slice_to_empty_support_rejected():
    sh = Shape(2, (1, 1))
    f = MultilinearForm(sh, (0, 1), [[1]])
    with pytest.raises(PreconditionError):
        slice_form(f, (0, 1), ((1,), (1,)))


def test_slice_fix_zero_kills_product():
    sh = Shape(2, (1, 1))
    f = MultilinearForm(sh, (0, 1), [[1]])
    g = slice_form(f, (0,), ((0,),))
    assert g.support == (1,) and g.is_zero()


def test_slice_dot_product():
    sh = Shape(2, (2, 2))
    f = MultilinearForm(sh, (0, 1), np.eye(2, dtype=int))
    g = slice_form(f, (0,), ((1, 0),))
    assert g.support == (1,)
    assert g.coeffs.tolist() == [1, 0]


def test_slice_outside_support_rejected():
    sh = Shape(2, (1, 1, 1))
    f = MultilinearForm(sh, (0, 1), [[1]])
    with pytest.raises(PreconditionError):
        slice_form(f, (2,), ((1,),))


@given(st.integers(0, 2**32 - 1))
@settings(max_examples=25, deadline=None)
def test_slice_eval_coherence_exhaustive(seed):
    rng = random.Random(seed)
    sh = rand_shape(rng, max_k=3, max_total=5)
    support = random_support(rng, sh.k)
    f = random_form(rng, sh, support)
    if len(f.support) < 2:
        return
    fix = (f.support[0],)
    x = tuple(rng.randrange(sh.p) for _ in range(sh.dims[fix[0]]))
    g = slice_form(f, fix, (x,))
    for point in enumerate_points(sh):
        pt = list(point)
        pt[fix[0]] = x
        assert eval_form(g, pt) == eval_form(f, pt)


# ---------------------------------------------------------------------------
# Bias, analytic rank, zero fibers
# ---------------------------------------------------------------------------

def test_bias_examples():
    assert bias(zero_form(Shape(2, (1, 1)))) == 1
    f = MultilinearForm(Shape(2, (1, 1)), (0, 1), [[1]])
    assert bias(f) == Fraction(1, 2)
    g = MultilinearForm(Shape(2, (2, 2)), (0, 1), np.eye(2, dtype=int))
    assert bias(g) == Fraction(1, 4)


def test_bias_single_factor_support_can_vanish():
    f = MultilinearForm(Shape(2, (2, 2)), (0,), [1, 0])
    assert bias(f) == 0
    with pytest.raises(ZeroBiasError):
        analytic_rank(f)


@given(st.integers(0, 2**32 - 1))
@settings(max_examples=30, deadline=None)
def test_bias_matches_value_distribution(seed):
    rng = random.Random(seed)
    sh = rand_shape(rng, max_k=3, max_total=5)
    f = random_form(rng, sh, random_support(rng, sh.k))
    b = bias(f)
    assert 0 <= b <= 1
    assert b == brute_bias(f)


def test_analytic_rank_examples():
    assert analytic_rank(zero_form(Shape(2, (1, 1)))).value == 0.0
    f = MultilinearForm(Shape(2, (1, 1)), (0, 1), [[1]])
    assert analytic_rank(f) == (1.0, Fraction(1, 2))
    g = MultilinearForm(Shape(2, (2, 2)), (0, 1), np.eye(2, dtype=int))
    assert analytic_rank(g).value == 2.0


def test_zero_fiber_identity_examples():
    rep = zero_fiber_identity_check(zero_form(Shape(2, (1, 1))))
    assert rep.holds and rep.zero_fiber_count == 2 and rep.expected == 2
    f = MultilinearForm(Shape(2, (1, 1)), (0, 1), [[1]])
    rep = zero_fiber_identity_check(f)
    assert rep.holds and rep.zero_fiber_count == 1 and rep.expected == 1
    g = MultilinearForm(Shape(2, (2, 2)), (0, 1), np.eye(2, dtype=int))
    rep = zero_fiber_identity_check(g)
    assert rep.holds and rep.zero_fiber_count == 1 and rep.expected == 1


def test_zero_fiber_identity_partial_support_inside_k3():
    # support {0, 1} inside three factors: the identity curries factor 1 and
    # counts over factors 0 and 2
    sh = Shape(2, (1, 1, 2))
    f = MultilinearForm(sh, (0, 1), [[1]])
    rep = zero_fiber_identity_check(f)
    assert rep.factor == 1
    assert rep.outer_points == 8  # |G_0| * |G_2|
    assert rep.zero_fiber_count == 4  # x_0 = 0, any x_2
    assert rep.holds


@given(st.integers(0, 2**32 - 1))
@settings(max_examples=40, deadline=None)
def test_zero_fiber_identity_always_holds(seed):
    rng = random.Random(seed)
    p = rng.choice([2, 3])
    k = rng.choice([2, 3])
    sh = Shape(p, small_dims(rng, k, 6))
    f = random_form(rng, sh, random_support(rng, k))
    assert zero_fiber_identity_check(f).holds


# ---------------------------------------------------------------------------
# Partition rank
# ---------------------------------------------------------------------------

def test_prank_lower_bound_examples():
    assert prank_lower_bound(zero_form(Shape(2, (1, 1)))) == 0
    g = MultilinearForm(Shape(2, (2, 2)), (0, 1), np.eye(2, dtype=int))
    assert prank_lower_bound(g) == 2
    h = MultilinearForm(Shape(3, (1, 1)), (0, 1), [[1]])
    assert bias(h) == Fraction(1, 3)
    assert prank_lower_bound(h) == 1


def test_bilinear_rank_examples():
    sh = Shape(2, (2, 2))
    assert partition_rank_bilinear(MultilinearForm(sh, (0, 1), np.zeros((2, 2)))) == 0
    assert partition_rank_bilinear(MultilinearForm(sh, (0, 1), np.eye(2, dtype=int))) == 2
    outer = np.outer([1, 1], [1, 0])
    assert partition_rank_bilinear(MultilinearForm(sh, (0, 1), outer)) == 1


@given(st.integers(0, 2**32 - 1))
@settings(max_examples=40, deadline=None)
def test_bilinear_rank_matches_elimination_oracle(seed):
    rng = random.Random(seed)
    p = rng.choice([2, 3])
    n1, n2 = rng.randrange(1, 4), rng.randrange(1, 4)
    sh = Shape(p, (n1, n2))
    f = random_form(rng, sh)
    assert partition_rank_bilinear(f) == brute_rank_mod(f.coeffs.tolist(), p)


def test_search_rank_examples():
    sh = Shape(2, (1, 1, 1))
    single = MultilinearForm(sh, (0, 1, 2), [1])
    assert partition_rank_search(single) == 1
    sh2 = Shape(2, (2, 2, 2))
    t = np.zeros((2, 2, 2), dtype=int)
    t[0, 0, 0] = 1
    t[1, 1, 1] = 1
    diag = MultilinearForm(sh2, (0, 1, 2), t)
    assert partition_rank_search(diag) == 2
    assert prank_lower_bound(diag) <= 2


def test_search_rank_zero():
    assert partition_rank_search(zero_form(Shape(2, (1, 1, 1)))) == 0


@given(st.integers(0, 2**32 - 1))
@settings(max_examples=30, deadline=None)
def test_search_agrees_with_matrix_rank_on_bilinear(seed):
    rng = random.Random(seed)
    sh = Shape(2, (rng.randrange(1, 3), rng.randrange(1, 3)))
    f = random_form(rng, sh)
    if f.is_zero():
        return
    assert partition_rank_search(f) == partition_rank_bilinear(f)


@given(st.integers(0, 2**32 - 1))
@settings(max_examples=15, deadline=None)
def test_search_agrees_with_matrix_rank_mod3(seed):
    # exercises the general digit-arithmetic path of the search (p != 2)
    rng = random.Random(seed)
    sh = Shape(3, (rng.randrange(1, 3), rng.randrange(1, 3)))
    f = random_form(rng, sh)
    assert partition_rank_search(f) == partition_rank_bilinear(f)


def test_search_rank_interval_over_budget():
    budget.set_point_budget(64)
    sh = Shape(2, (2, 2, 2))
    t = np.zeros((2, 2, 2), dtype=int)
    t[0, 0, 0] = 1
    f = MultilinearForm(sh, (0, 1, 2), t)
    got = partition_rank_search(f)
    assert isinstance(got, tuple)
    lo, hi = got
    assert lo <= hi
    assert hi == matricization_rank_bound(f) == 1


@given(st.integers(0, 2**32 - 1))
@settings(max_examples=25, deadline=None)
def test_product_form_bias_at_least_one_over_p(seed):
    rng = random.Random(seed)
    p = rng.choice([2, 3])
    k = rng.choice([2, 3])
    sh = Shape(p, small_dims(rng, k, 5))
    f = planted_low_prank_form(rng, sh, 1)
    if f.is_zero():
        return
    assert bias(f) >= Fraction(1, p)


@given(st.integers(0, 2**32 - 1))
@settings(max_examples=20, deadline=None)
def test_bias_respects_exact_prank(seed):
    rng = random.Random(seed)
    sh = Shape(2, (2, 2))
    f = random_form(rng, sh)
    if f.is_zero():
        return
    r = partition_rank_bilinear(f)
    assert bias(f) >= Fraction(1, 2**r)
    assert prank_lower_bound(f) <= r


def test_map_requires_shared_support():
    sh = Shape(2, (1, 1))
    a = MultilinearForm(sh, (0, 1), [[1]])
    b = MultilinearForm(sh, (0,), [1])
    with pytest.raises(PreconditionError):
        MultilinearMap(sh, (0, 1), (a, b))


def test_product_form_matches_manual_outer():
    sh = Shape(3, (2, 1, 2))
    f = product_form(sh, (0, 2), np.arange(4), (1,), [2])
    assert f.support == (0, 1, 2)
    beta = np.arange(4).reshape(2, 2) % 3
    for point in enumerate_points(sh):
        b_val = sum(
            int(beta[i, j]) * point[0][i] * point[2][j]
            for i in range(2)
            for j in range(2)
        ) % 3
        g_val = (2 * point[1][0]) % 3
        assert eval_form(f, point) == (b_val * g_val) % 3
