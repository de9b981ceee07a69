import math

import numpy as np
import pytest

from latticefold.analysis import (
    THICK,
    THIN,
    SodHistogram,
    classify_barriers,
    estimate_p_ground,
    overlap_histogram,
    scaling_report,
    spin_overlap_values,
    tts,
    wilson_interval,
)
from latticefold.core import InputError


class TestSpinOverlap:
    def test_identical_states(self):
        states = np.array([[1, 0, 1, 1], [0, 0, 1, 0]], dtype=np.uint8)
        q = spin_overlap_values(states, states)
        assert np.all(q == 1.0)

    def test_antipodal_states(self):
        a = np.zeros((3, 6), dtype=np.uint8)
        b = np.ones((3, 6), dtype=np.uint8)
        assert np.all(spin_overlap_values(a, b) == -1.0)

    def test_symmetric_and_global_flip_invariant(self, rng):
        a = rng.integers(0, 2, size=(40, 9)).astype(np.uint8)
        b = rng.integers(0, 2, size=(40, 9)).astype(np.uint8)
        assert np.array_equal(spin_overlap_values(a, b), spin_overlap_values(b, a))
        assert np.array_equal(
            spin_overlap_values(a, b), spin_overlap_values(1 - a, 1 - b)
        )

    def test_window_mismatch_rejected(self):
        with pytest.raises(InputError):
            spin_overlap_values(np.zeros((3, 4)), np.zeros((2, 4)))

    def test_one_hot_block_support_is_combinatorial(self):
        # two one-hot blocks of width 4: overlaps take exactly the values
        # 1 - (mismatched blocks)/2 for 0..2 mismatches
        states = []
        for first in range(4):
            for second in range(4):
                bits = np.zeros(8, dtype=np.uint8)
                bits[first] = 1
                bits[4 + second] = 1
                states.append(bits)
        states = np.array(states)
        qs = set()
        for a in states:
            for b in states:
                qs.add(float(spin_overlap_values(a[None, :], b[None, :])[0]))
        assert qs == {1.0, 0.5, 0.0}

    def test_histogram_counts_sum(self, rng):
        q = rng.uniform(-1, 1, size=500)
        hist = overlap_histogram(q)
        assert hist.counts.sum() == hist.sample_count == 500

    def test_out_of_range_rejected(self):
        with pytest.raises(InputError):
            overlap_histogram(np.array([1.5]))


class TestClassifier:
    def test_mass_at_plus_minus_one_thin(self):
        q = np.array([1.0] * 30 + [-1.0] * 30)
        assert classify_barriers(overlap_histogram(q)) == THIN

    def test_single_peak_at_zero_thick(self):
        q = np.zeros(50)
        assert classify_barriers(overlap_histogram(q)) == THICK

    def test_mixed_peaks_thick(self):
        q = np.array([1.0] * 40 + [0.1] * 35)
        assert classify_barriers(overlap_histogram(q)) == THICK

    def test_mass_strictly_above_half_thin(self, rng):
        q = rng.uniform(0.6, 0.95, size=400)
        assert classify_barriers(overlap_histogram(q)) == THIN

    def test_empty_rejected(self):
        hist = overlap_histogram(np.array([]))
        with pytest.raises(InputError):
            classify_barriers(hist)


class TestTts:
    def test_p_at_confidence_target(self):
        assert tts(2.0, 0.99).tts_seconds == 2.0
        assert tts(2.0, 0.999).tts_seconds == 2.0

    def test_half_probability(self):
        expected = math.log(0.01) / math.log(0.5)
        assert tts(1.0, 0.5).tts_seconds == pytest.approx(expected, rel=1e-12)
        assert expected == pytest.approx(6.643856189774724, rel=1e-12)

    def test_never_succeeds(self):
        assert tts(1.0, 0.0).tts_seconds == float("inf")

    def test_monotone_nonincreasing(self):
        ps = np.linspace(0.01, 0.99, 60)
        values = [tts(1.0, float(p)).tts_seconds for p in ps]
        assert all(a >= b - 1e-12 for a, b in zip(values, values[1:]))

    def test_input_validation(self):
        with pytest.raises(InputError):
            tts(0.0, 0.5)
        with pytest.raises(InputError):
            tts(1.0, 1.5)


class TestPGround:
    def test_all_hit(self):
        p, interval = estimate_p_ground(np.array([-1.0, -1.0, -1.0]), -1.0)
        assert p == 1.0
        assert interval[1] == 1.0

    def test_none_hit(self):
        p, _ = estimate_p_ground(np.array([0.0, 0.0]), -1.0)
        assert p == 0.0

    def test_wilson_50_of_100(self):
        p, interval = estimate_p_ground(
            np.array([-1.0] * 50 + [0.0] * 50), -1.0
        )
        assert p == 0.5
        assert interval[0] == pytest.approx(0.404, abs=1e-3)
        assert interval[1] == pytest.approx(0.596, abs=1e-3)

    def test_tolerance_absolute(self):
        p, _ = estimate_p_ground(np.array([-0.9999995]), -1.0, tol=1e-6)
        assert p == 1.0

    def test_empty_rejected(self):
        with pytest.raises(InputError):
            estimate_p_ground(np.array([]), 0.0)

    def test_wilson_bounds(self):
        lo, hi = wilson_interval(0, 10)
        assert lo == 0.0 and hi < 0.35


class TestScalingReport:
    def test_coordinate_rows_match_layout_counts(self):
        rep = scaling_report(["coord-cart"], [10])
        row = rep.rows[0]
        assert row.qubits == 320 and row.L == 4

    def test_resolution_constant_for_coordinate_models(self):
        rep = scaling_report(["coord-tet"], range(4, 11))
        res = {round(r.resolution, 9) for r in rep.rows}
        assert len(res) == 1

    def test_turn_models_quadratized(self):
        rep = scaling_report(["turn-tet"], [6])
        assert rep.rows[0].qubits > 12  # auxiliaries included

    def test_csv_rows_schema(self):
        header, rows = scaling_report(["coord-cart"], [8]).to_csv_rows()
        assert header == ("model", "N", "L", "qubits", "density", "couplers_per_qubit", "resolution")
        assert len(rows) == 1
