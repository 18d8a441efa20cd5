"""Counter-based stream determinism and distributional sanity."""

import math

import pytest
from hypothesis import given
from hypothesis import strategies as st

from cantorjump import SplitStream
from cantorjump.streams import child_key, draw_u64, mix64

U64 = st.integers(min_value=0, max_value=(1 << 64) - 1)


class TestPrimitives:
    def test_mix64_reference_values(self):
        # Pinned outputs of the SplitMix64 finalizer; any change invalidates
        # recorded seeds.  The third value is the published first output of
        # the generator seeded with 0 (finalizer applied to the increment).
        assert mix64(0) == 0
        assert mix64(1) == 0x5692161D100B05E5
        assert mix64(0x9E3779B97F4A7C15) == 0xE220A8397B1DCDAF
        assert draw_u64(0, 1) == 0xE220A8397B1DCDAF

    @given(U64)
    def test_mix64_stays_in_64_bits(self, z):
        assert 0 <= mix64(z) < 1 << 64

    @given(U64, st.integers(min_value=0, max_value=1 << 20))
    def test_draws_are_pure_functions(self, key, counter):
        assert draw_u64(key, counter) == draw_u64(key, counter)

    @given(U64, st.integers(min_value=0, max_value=1000))
    def test_child_keys_are_pure_functions(self, key, index):
        assert child_key(key, index) == child_key(key, index)

    def test_children_and_draws_do_not_collide(self):
        key = mix64(12345)
        draws = {draw_u64(key, j) for j in range(1, 2000)}
        children = {child_key(key, i) for i in range(2000)}
        assert not draws & children


class TestSplitStream:
    def test_sequence_reproducible(self):
        a = SplitStream.from_seed(99)
        b = SplitStream.from_seed(99)
        assert [a.u64() for _ in range(50)] == [b.u64() for _ in range(50)]

    def test_child_does_not_consume_counter(self):
        a = SplitStream.from_seed(3)
        first = a.child(0).u64()
        b = SplitStream.from_seed(3)
        b.u64()  # advancing the parent must not change child streams
        assert b.child(0).u64() == first

    def test_child_index_validation(self):
        with pytest.raises(ValueError):
            SplitStream.from_seed(0).child(-1)

    def test_random_in_half_open_unit_interval(self):
        rng = SplitStream.from_seed(4)
        for _ in range(10000):
            u = rng.random()
            assert 0.0 < u <= 1.0

    def test_random_mean(self):
        rng = SplitStream.from_seed(8)
        n = 20000
        mean = math.fsum(rng.random() for _ in range(n)) / n
        assert abs(mean - 0.5) <= 4 * math.sqrt(1.0 / 12.0 / n)

    def test_exponential_zero_rate_is_infinite(self):
        assert SplitStream.from_seed(0).exponential(0.0) == math.inf
        assert SplitStream.from_seed(0).exponential(-1.0) == math.inf

    def test_exponential_mean(self):
        rng = SplitStream.from_seed(21)
        n, rate = 20000, 3.0
        mean = math.fsum(rng.exponential(rate) for _ in range(n)) / n
        assert abs(mean - 1 / rate) <= 4 / (rate * math.sqrt(n))

    def test_bits_layout(self):
        # bits() must expose the most significant bits of each draw in order.
        a = SplitStream.from_seed(77)
        b = SplitStream.from_seed(77)
        word = a.u64()
        got = b.bits(64)
        assert got == tuple((word >> (63 - i)) & 1 for i in range(64))

    def test_bit_balance(self):
        rng = SplitStream.from_seed(13)
        n = 20000
        ones = sum(rng.bit() for _ in range(n))
        assert abs(ones / n - 0.5) <= 4 * 0.5 / math.sqrt(n)

    def test_integer_bounds_and_uniformity(self):
        rng = SplitStream.from_seed(15)
        counts = [0] * 7
        n = 14000
        for _ in range(n):
            v = rng.integer(7)
            assert 0 <= v < 7
            counts[v] += 1
        p = 1 / 7
        sigma = math.sqrt(p * (1 - p) / n)
        for c in counts:
            assert abs(c / n - p) <= 4.5 * sigma
        with pytest.raises(ValueError):
            rng.integer(0)

    def test_distinct_children_diverge(self):
        rng = SplitStream.from_seed(1)
        seqs = {tuple(rng.child(i).u64() for _ in range(4)) for i in range(64)}
        assert len(seqs) == 64
