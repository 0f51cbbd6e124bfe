import random
from fractions import Fraction

import numpy as np
import pytest

from mlvariety.errors import PreconditionError
from mlvariety.forms import Shape, bias, prank_lower_bound
from mlvariety.generators import (
    planted_low_prank_form,
    planted_product_variety,
    random_form,
    random_point_subset,
    random_subspace,
    random_variety,
)
from mlvariety.variety import density, variety_bitmap

from helpers import small_dims


def test_random_subspace_exact_dimension():
    rng = random.Random(0)
    for _ in range(20):
        p = rng.choice([2, 3])
        n = rng.randrange(1, 6)
        d = rng.randrange(0, n + 1)
        assert random_subspace(rng, p, n, d).rank == d


def test_planted_product_density_is_exact():
    rng = random.Random(1)
    for _ in range(15):
        p = rng.choice([2, 3])
        dims = small_dims(rng, rng.randrange(1, 4), 6)
        sh = Shape(p, dims)
        codims = tuple(rng.randrange(n + 1) for n in dims)
        v, claimed = planted_product_variety(rng, sh, codims)
        assert claimed == Fraction(1, p ** sum(codims))
        assert density(v) == claimed


def test_planted_low_prank_respects_bias_bound():
    rng = random.Random(2)
    for _ in range(20):
        p = rng.choice([2, 3])
        k = rng.choice([2, 3])
        sh = Shape(p, small_dims(rng, k, 6))
        r = rng.randrange(1, 4)
        f = planted_low_prank_form(rng, sh, r)
        assert bias(f) >= Fraction(1, p**r)
        if not f.is_zero():
            assert prank_lower_bound(f) <= r


def test_streams_are_reproducible():
    sh = Shape(2, (2, 2))
    a = random_form(random.Random(7), sh)
    b = random_form(random.Random(7), sh)
    assert a == b
    va = random_variety(random.Random(8), sh, 3)
    vb = random_variety(random.Random(8), sh, 3)
    assert va == vb


def test_random_point_subset_counts_and_containment():
    sh = Shape(2, (2, 2))
    rng = random.Random(9)
    v = random_variety(rng, sh, 1)
    mask = variety_bitmap(v)
    want = min(3, int(np.count_nonzero(mask)))
    got = random_point_subset(rng, sh, mask, want)
    assert got.size == want
    assert not np.any(got.mask & ~mask)
    with pytest.raises(PreconditionError):
        random_point_subset(rng, sh, mask, int(np.count_nonzero(mask)) + 1)
