"""Unit tests for state encoding and phase decoding."""

import math
import statistics

import numpy as np
import pytest

from qamnet.tools.encoder import (
    ConstantPatternError,
    EncodingError,
    EncodingKind,
    PatternStats,
    PhaseSaturationError,
    StatePattern,
    ZeroNormError,
    amplitude_encode,
    bipolar_encode,
    decode_phase,
    encode,
    pattern_stats,
    phase_encode,
    phase_state,
    sigmoid_phase_map,
    state_from_output,
    unit_phasors,
    weighted_phase_encode,
)
from qamnet.tools.patterns import RawPattern
from qamnet.validation import validate_state


class TestPatternStats:
    """Tests for per-pattern mean and population std."""

    def test_constant_pattern(self):
        """Test a constant pattern has zero spread."""
        stats = pattern_stats(RawPattern([1, 1, 1]))

        assert stats == PatternStats(mean=1.0, std=0.0)

    def test_constant_unrepresentable_value(self):
        """Test a constant pattern of 0.1 is exactly zero spread despite mean rounding."""
        stats = pattern_stats(RawPattern([0.1, 0.1, 0.1]))

        assert stats.std == 0.0
        assert stats.mean == 0.1

    def test_hand_computed(self):
        """Test (0, 2) gives mean 1 and std 1."""
        stats = pattern_stats(RawPattern([0, 2]))

        assert stats.mean == 1.0
        assert stats.std == 1.0

    def test_matches_two_pass_reference(self):
        """Test against the statistics module's population formulas."""
        values = [0.1, 0.4, 0.7, 1.0]

        stats = pattern_stats(RawPattern(values))

        assert stats.mean == pytest.approx(statistics.fmean(values), abs=1e-15)
        assert stats.std == pytest.approx(statistics.pstdev(values), abs=1e-15)

    def test_negative_std_rejected(self):
        """Test PatternStats refuses a negative std."""
        with pytest.raises(EncodingError):
            PatternStats(mean=0.0, std=-1.0)


class TestSigmoidPhaseMap:
    """Tests for the sigmoid value-to-phase map."""

    def test_midpoint_is_pi(self):
        """Test the mean maps to pi."""
        stats = PatternStats(mean=0.37, std=2.5)

        assert sigmoid_phase_map(0.37, stats) == pytest.approx(math.pi, abs=1e-12)

    def test_quarter_turn(self):
        """Test (mean - v)/std = ln 3 gives pi/2."""
        stats = PatternStats(mean=0.0, std=1.0)

        assert sigmoid_phase_map(-math.log(3.0), stats) == pytest.approx(math.pi / 2, abs=1e-12)

    def test_upper_limit(self):
        """Test large values approach 2 pi from below without overflow errors."""
        stats = PatternStats(mean=0.0, std=1.0)

        assert sigmoid_phase_map(50.0, stats) == pytest.approx(2 * math.pi, abs=1e-12)
        assert sigmoid_phase_map(-1e6, stats) == 0.0

    def test_strictly_increasing(self):
        """Test strict monotonicity on random ordered pairs."""
        rng = np.random.default_rng(7)
        stats = PatternStats(mean=0.0, std=1.0)
        a = rng.uniform(-5, 5, 100_000)
        b = a + rng.uniform(1e-6, 1.0, a.size)

        assert np.all(sigmoid_phase_map(b, stats) > sigmoid_phase_map(a, stats))

    def test_constant_pattern_error(self):
        """Test std = 0 raises with uniform-pi guidance."""
        with pytest.raises(ConstantPatternError, match="uniform phase of pi"):
            sigmoid_phase_map(1.0, PatternStats(mean=1.0, std=0.0))


class TestUnitPhasors:
    """Tests for exact axis phasors."""

    def test_axis_phases_are_exact(self):
        """Test 0, pi/2, pi and 3pi/2 give exactly 1, i, -1 and -i."""
        z = unit_phasors(np.array([0.0, math.pi / 2, math.pi, 3 * math.pi / 2]))

        assert z.tolist() == [1 + 0j, 1j, -1 + 0j, -1j]

    def test_general_phase(self):
        """Test other phases match exp(i phi)."""
        phases = np.array([0.3, 1.7, 4.0])

        np.testing.assert_allclose(unit_phasors(phases), np.exp(1j * phases), atol=1e-15)


class TestPhaseEncode:
    """Tests for sigmoid phase encoding."""

    def test_closed_form(self):
        """Test (0, 2) against the closed form at mean 1, std 1."""
        s = phase_encode(RawPattern([0, 2]))

        phi = np.array([2 * math.pi / (1 + math.e), 2 * math.pi / (1 + math.exp(-1))])
        np.testing.assert_allclose(s.amplitudes, np.exp(1j * phi) / math.sqrt(2), atol=1e-15)
        assert s.kind is EncodingKind.PHASE

    def test_unit_norm_and_modulus(self):
        """Test every component has modulus 1/sqrt(N) and the norm is 1."""
        rng = np.random.default_rng(3)
        for n in (1, 2, 7, 64):
            values = rng.normal(size=n) if n > 1 else np.array([0.0])
            s = phase_state(rng.uniform(0, 2 * math.pi, n)) if n == 1 else phase_encode(RawPattern(values))

            assert not validate_state(s).is_critical()
            assert s.norm() == pytest.approx(1.0, abs=1e-12)

    def test_constant_pattern_propagates(self):
        """Test a constant pattern cannot be phase encoded."""
        with pytest.raises(ConstantPatternError):
            phase_encode(RawPattern([2.0, 2.0]))

    @pytest.mark.parametrize("value", [0.1, 0.3, 1e-7, 123.456])
    def test_constant_inexact_pattern_propagates(self, value):
        """Test constant rows whose mean rounds are still rejected."""
        with pytest.raises(ConstantPatternError):
            phase_encode(RawPattern([value] * 3))

    def test_label_carried(self):
        """Test the label follows the pattern into the state."""
        assert phase_encode(RawPattern([0, 1], label="p")).label == "p"


class TestAmplitudeEncode:
    """Tests for real amplitude encoding."""

    def test_three_four(self):
        """Test (3, 4) normalizes to (0.6, 0.8)."""
        s = amplitude_encode(RawPattern([3, 4]))

        np.testing.assert_allclose(s.amplitudes, [0.6, 0.8], atol=1e-15)
        assert s.kind is EncodingKind.AMPLITUDE

    def test_alternating(self):
        """Test (1, -1, 1, -1) normalizes to halves exactly."""
        s = amplitude_encode(RawPattern([1, -1, 1, -1]))

        assert s.amplitudes.tolist() == [0.5, -0.5, 0.5, -0.5]

    def test_zero_norm(self):
        """Test the zero pattern is rejected."""
        with pytest.raises(ZeroNormError):
            amplitude_encode(RawPattern([0, 0]))


class TestBipolarEncode:
    """Tests for threshold bipolar encoding."""

    def test_threshold(self):
        """Test values above and below the threshold."""
        s = bipolar_encode(RawPattern([0.9, 0.1]), 0.5)

        assert s.amplitudes.tolist() == [1 / math.sqrt(2) + 0j, -1 / math.sqrt(2) + 0j]
        assert s.kind is EncodingKind.BIPOLAR

    def test_all_above(self):
        """Test all values above the threshold give all +1/sqrt(N)."""
        s = bipolar_encode(RawPattern([3.0, 4.0, 5.0]), 0.5)

        assert np.all(s.amplitudes == 1 / math.sqrt(3))

    def test_tie_maps_to_plus(self):
        """Test a value equal to the threshold maps to +1."""
        s = bipolar_encode(RawPattern([0.5, 0.0]), 0.5)

        assert s.amplitudes[0].real > 0
        assert s.amplitudes[1].real < 0

    def test_identical_to_phase_encoding_at_zero_and_pi(self):
        """Test bipolar states equal explicit 0/pi phase states bit for bit."""
        rng = np.random.default_rng(11)
        for n in (1, 2, 3, 10, 33):
            values = rng.uniform(0, 1, n)
            bipolar = bipolar_encode(RawPattern(values), 0.5)
            phases = np.where(values >= 0.5, 0.0, math.pi)

            assert bipolar.amplitudes.tobytes() == phase_state(phases).amplitudes.tobytes()

    def test_identical_to_amplitude_encoding_of_signs(self):
        """Test bipolar states equal amplitude-encoded +-1 vectors bit for bit."""
        rng = np.random.default_rng(12)
        for n in (2, 5, 16, 100):
            signs = np.where(rng.integers(0, 2, n) == 1, 1.0, -1.0)
            bipolar = bipolar_encode(RawPattern(signs), 0.0)

            assert bipolar.amplitudes.tobytes() == amplitude_encode(RawPattern(signs)).amplitudes.tobytes()


class TestEncodeDispatch:
    """Tests for the encode dispatcher."""

    def test_each_kind(self):
        """Test each kind goes to its encoder."""
        p = RawPattern([0.2, 0.8])

        assert encode(p, EncodingKind.AMPLITUDE) == amplitude_encode(p)
        assert encode(p, EncodingKind.BIPOLAR, 0.5) == bipolar_encode(p, 0.5)
        assert encode(p, "phase") == phase_encode(p)

    def test_complex_needs_weights(self):
        """Test the weighted encoding cannot be reached without weights."""
        with pytest.raises(EncodingError, match="weights"):
            encode(RawPattern([0.2, 0.8]), EncodingKind.COMPLEX)


class TestWeightedPhaseEncode:
    """Tests for amplitude-and-phase encoding."""

    def test_equal_weights_match_phase_encoding(self):
        """Test uniform weights reproduce the phase encoding."""
        p = RawPattern([0.1, 0.5, 0.9, 0.3])

        s = weighted_phase_encode(p, np.full(4, 2.5))

        np.testing.assert_allclose(s.amplitudes, phase_encode(p).amplitudes, atol=1e-15)
        assert s.kind is EncodingKind.COMPLEX

    def test_weights_set_moduli(self):
        """Test component moduli are proportional to the weights."""
        s = weighted_phase_encode(RawPattern([0.0, 1.0]), np.array([3.0, 4.0]))

        np.testing.assert_allclose(np.abs(s.amplitudes), [0.6, 0.8], atol=1e-15)

    def test_invalid_weights(self):
        """Test wrong length, negative and all-zero weights are rejected."""
        p = RawPattern([0.0, 1.0])
        with pytest.raises(EncodingError):
            weighted_phase_encode(p, np.ones(3))
        with pytest.raises(EncodingError):
            weighted_phase_encode(p, np.array([1.0, -1.0]))
        with pytest.raises(ZeroNormError):
            weighted_phase_encode(p, np.zeros(2))


class TestDecodePhase:
    """Tests for inverting the sigmoid phase map."""

    def test_round_trip(self):
        """Test decode(encode(p)) recovers p within 1e-9."""
        rng = np.random.default_rng(5)
        for _ in range(1000):
            n = int(rng.integers(2, 20))
            p = RawPattern(rng.normal(0, 3, n))

            decoded = decode_phase(phase_encode(p), pattern_stats(p))

            np.testing.assert_allclose(decoded.values, p.values, atol=1e-9)

    def test_midpoint(self):
        """Test phase pi decodes to the mean."""
        s = phase_state(np.array([math.pi, math.pi]))

        decoded = decode_phase(s, PatternStats(mean=4.0, std=2.0))

        np.testing.assert_allclose(decoded.values, [4.0, 4.0], atol=1e-12)

    def test_quarter_turn(self):
        """Test phase pi/2 with mean 0, std 1 decodes to -ln 3."""
        decoded = decode_phase(phase_state(np.array([math.pi / 2])), PatternStats(mean=0.0, std=1.0))

        assert decoded.values[0] == pytest.approx(-math.log(3.0), abs=1e-12)

    def test_negative_angles_folded(self):
        """Test phases reported in (-pi, 0] are folded up by 2 pi."""
        s = phase_state(np.array([3 * math.pi / 2]))

        decoded = decode_phase(s, PatternStats(mean=0.0, std=1.0))

        assert decoded.values[0] == pytest.approx(math.log(3.0), abs=1e-12)

    def test_saturated_phase(self):
        """Test phase 0 is a saturation error."""
        with pytest.raises(PhaseSaturationError, match="component 1"):
            decode_phase(phase_state(np.array([1.0, 0.0])), PatternStats(mean=0.0, std=1.0))

    def test_amplitude_state_rejected(self):
        """Test only phase-encoded states can be decoded."""
        s = amplitude_encode(RawPattern([1.0, 2.0]))

        with pytest.raises(EncodingError, match="phase-encoded"):
            decode_phase(s, PatternStats(mean=0.0, std=1.0))


class TestStateFromOutput:
    """Tests for normalizing raw recall outputs."""

    def test_normalizes(self):
        """Test the output is rescaled to unit norm."""
        s = state_from_output(np.array([3 + 0j, 4j]), EncodingKind.PHASE, "x")

        assert s.norm() == pytest.approx(1.0, abs=1e-15)
        assert s.label == "x"

    def test_zero_output(self):
        """Test a zero output cannot be normalized."""
        with pytest.raises(ZeroNormError):
            state_from_output(np.zeros(3), EncodingKind.PHASE)


class TestStatePattern:
    """Tests for StatePattern behaviour."""

    def test_read_only_and_bitwise_equality(self):
        """Test amplitudes are immutable and equality is bitwise."""
        s = StatePattern([1, 0], EncodingKind.AMPLITUDE)

        with pytest.raises(ValueError):
            s.amplitudes[0] = 0
        assert s == StatePattern(np.array([1.0, 0.0]), "amplitude")
        assert s != StatePattern([1, 0], EncodingKind.PHASE)

    def test_phases_in_zero_two_pi(self):
        """Test phases() folds angles into [0, 2 pi)."""
        s = phase_state(np.array([3 * math.pi / 2, 0.5]))

        np.testing.assert_allclose(s.phases(), [3 * math.pi / 2, 0.5], atol=1e-15)
