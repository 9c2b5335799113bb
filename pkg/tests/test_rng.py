from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from qkernel.rng import MASK64, SplitMix64, derive_seed, probability_threshold

# Reference outputs of SplitMix64 as published with the original C code.
REFERENCE = {
    0: [0xE220A8397B1DCDAF, 0x6E789E6AA1B965F4, 0x06C45D188009454F],
    1234567: [6457827717110365317, 3203168211198807973, 9817491932198370423],
}


@pytest.mark.parametrize("seed", sorted(REFERENCE))
def test_reference_stream(seed):
    rng = SplitMix64(seed)
    assert [rng.next() for _ in range(3)] == REFERENCE[seed]


@given(st.integers(0, MASK64), st.integers(0, 40), st.integers(0, 5))
def test_block_matches_scalar(seed, count, tail):
    a, b = SplitMix64(seed), SplitMix64(seed)
    scalar = [a.next() for _ in range(count + tail)]
    vector = b.block(count).tolist() + [b.next() for _ in range(tail)]
    assert vector == scalar


def test_block_dtype():
    assert SplitMix64(1).block(4).dtype == np.uint64


def test_derive_seed_is_parent_output():
    rng = SplitMix64(99)
    outputs = [rng.next() for _ in range(4)]
    assert [derive_seed(99, i) for i in range(4)] == outputs


def test_threshold():
    assert probability_threshold(0) == 0
    assert probability_threshold(1) == 1 << 64
    assert probability_threshold(Fraction(1, 2)) == 1 << 63
    with pytest.raises(ValueError):
        probability_threshold(1.5)


def test_below_range():
    rng = SplitMix64(5)
    assert all(0 <= rng.below(7) < 7 for _ in range(200))
