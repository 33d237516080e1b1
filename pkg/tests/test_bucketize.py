"""Aliasing-filter encoder: alias-sum equivalence and sample accounting."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from aliasfft import (
    SampleLedger,
    SparseSpectrum,
    bucketize,
    bucketize_set,
    dense_dft,
    downsample,
    inverse_dft,
    shift,
)
from oracles import alias_bucket_sum

complex_elements = st.complex_numbers(
    max_magnitude=5.0, allow_nan=False, allow_infinity=False
)


class TestShift:
    def test_zero_shift_is_identity(self, rng):
        x = rng.normal(size=9)
        assert np.array_equal(shift(x, 0), x)

    def test_unit_shift_rotates(self):
        assert np.array_equal(shift(np.array([1, 2, 3, 4]), 1), np.array([4, 1, 2, 3]))

    def test_full_period_wraps(self, rng):
        x = rng.normal(size=12)
        assert np.array_equal(shift(x, 12), x)
        assert np.array_equal(shift(x, -12), x)


class TestDownsample:
    def test_unit_step_is_identity(self, rng):
        x = rng.normal(size=8)
        assert np.array_equal(downsample(x, 1), x)

    def test_selects_every_step(self):
        x = np.array(["a", "b", "c", "d", "e", "f"], dtype=object)
        assert list(downsample(x, 3)) == ["a", "d"]

    def test_length_20_step_5(self, rng):
        x = rng.normal(size=20)
        out = downsample(x, 5)
        assert np.array_equal(out, x[[0, 5, 10, 15]])

    def test_nondivisor_rejected(self):
        with pytest.raises(ValueError):
            downsample(np.zeros(10), 3)

    def test_ledger_counts_reads(self):
        ledger = SampleLedger(12)
        downsample(np.zeros(12), 4, ledger)
        assert ledger.count == 3
        assert ledger.touched == {0, 4, 8}


class TestBucketize:
    def test_full_width_equals_dense_transform(self, rng):
        x = rng.normal(size=16) + 1j * rng.normal(size=16)
        out = bucketize(x, 16, 0)
        assert np.allclose(out.values, dense_dft(x), atol=1e-12)

    def test_single_tone_lands_in_residue_bucket(self):
        n = 24
        for f in (0, 5, 17):
            x = inverse_dft(SparseSpectrum(n, {f: 1.0}))
            for b in (4, 6, 8):
                for tau in (0, 1, 7, -3):
                    out = bucketize(x, b, tau)
                    expected = np.exp(-2j * np.pi * ((tau * f) % n) / n)
                    assert abs(out.values[f % b] - expected) < 1e-9
                    others = np.delete(out.values, f % b)
                    assert np.max(np.abs(others)) < 1e-9

    def test_alias_sum_oracle_exhaustive_small(self, rng):
        for n in (8, 12, 20):
            x = rng.normal(size=n) + 1j * rng.normal(size=n)
            dense = dense_dft(x)
            for b in [d for d in range(1, n + 1) if n % d == 0]:
                for tau in range(n):
                    out = bucketize(x, b, tau)
                    assert np.allclose(out.values, alias_bucket_sum(dense, b, tau), atol=1e-9)

    def test_five_tone_n20_bucket_values(self, five_tone_n20):
        out = bucketize(five_tone_n20.signal, 4, 0)
        truth = five_tone_n20.truth.entries
        assert abs(out.values[0]) < 1e-9  # empty residue class
        assert abs(out.values[2] - truth[10]) < 1e-9  # lone tone at 10

    def test_nondivisor_bucket_count_rejected(self):
        with pytest.raises(ValueError):
            bucketize(np.zeros(10), 4, 0)

    def test_composes_shift_downsample_small_dft(self, rng):
        x = rng.normal(size=24) + 1j * rng.normal(size=24)
        for b, tau in ((4, 0), (6, 5), (8, -2), (24, 11)):
            via_ops = np.fft.fft(downsample(shift(x, tau), 24 // b)) / b
            assert np.allclose(bucketize(x, b, tau).values, via_ops, atol=1e-12)

    @settings(max_examples=40, deadline=None)
    @given(
        arrays(np.complex128, 24, elements=complex_elements),
        st.sampled_from([1, 2, 3, 4, 6, 8, 12, 24]),
        st.integers(min_value=-24, max_value=48),
    )
    def test_alias_sum_oracle_randomized(self, x, b, tau):
        out = bucketize(x, b, tau)
        expected = alias_bucket_sum(dense_dft(x), b, tau % 24)
        assert np.allclose(out.values, expected, atol=1e-9)

    @settings(max_examples=30, deadline=None)
    @given(
        arrays(np.complex128, 20, elements=complex_elements),
        arrays(np.complex128, 20, elements=complex_elements),
    )
    def test_linearity(self, x, y):
        alpha, beta = 2.0 - 1j, -0.5 + 3j
        combined = bucketize(alpha * x + beta * y, 5, 3).values
        separate = alpha * bucketize(x, 5, 3).values + beta * bucketize(y, 5, 3).values
        scale = max(1.0, np.linalg.norm(separate))
        assert np.linalg.norm(combined - separate) <= 1e-9 * scale

    def test_ledger_touched_indices_exact(self):
        n, b = 20, 4
        step = n // b
        for tau in (0, 1, 5, -3, 19):
            ledger = SampleLedger(n)
            bucketize(np.zeros(n, dtype=complex), b, tau, ledger)
            expected = {(j * step - tau) % n for j in range(b)}
            assert ledger.touched == expected
            assert ledger.count == b


class TestBucketizeSet:
    def test_singleton_set_matches_single_call(self, rng):
        x = rng.normal(size=12) + 1j * rng.normal(size=12)
        [only] = bucketize_set(x, 4, [0])
        assert np.array_equal(only.values, bucketize(x, 4, 0).values)

    def test_three_round_measurements(self, five_tone_n20):
        rounds = bucketize_set(five_tone_n20.signal, 4, [0, 1, 2])
        truth = five_tone_n20.truth.entries
        n = 20
        for tau, sp in zip([0, 1, 2], rounds):
            expected = sum(
                truth[f] * np.exp(-2j * np.pi * ((tau * f) % n) / n) for f in (1, 5, 13)
            )
            assert abs(sp.values[1] - expected) < 1e-9

    def test_ledger_accounting_is_r_times_b(self, rng):
        x = rng.normal(size=24)
        ledger = SampleLedger(24)
        bucketize_set(x, 6, [0, 1, 2, 3, 10], ledger)
        assert ledger.count == 5 * 6
        assert ledger.unique_count <= 24
