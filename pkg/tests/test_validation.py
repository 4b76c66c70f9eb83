"""Unit tests for the validation framework."""

import math

import numpy as np

from qamnet.tools.encoder import EncodingKind, StatePattern, phase_state
from qamnet.tools.memory import Hologram, build
from qamnet.validation import (
    Severity,
    ValidationCheck,
    ValidationResult,
    validate_hologram,
    validate_state,
)


class TestValidationResult:
    """Tests for result aggregation."""

    def test_severity_levels(self):
        """Test only the levels checks can produce exist."""
        assert [s.value for s in Severity] == ["CRITICAL", "WARNING", "PASS"]

    def test_all_passed(self):
        """Test no failures gives PASS."""
        result = ValidationResult.from_checks([ValidationCheck("a", True, Severity.CRITICAL)])

        assert result.status == Severity.PASS
        assert not result.is_critical()
        assert not result.has_warnings()

    def test_warning_only(self):
        """Test a failed warning gives WARNING."""
        result = ValidationResult.from_checks(
            [ValidationCheck("a", True, Severity.CRITICAL), ValidationCheck("b", False, Severity.WARNING)]
        )

        assert result.status == Severity.WARNING
        assert result.has_warnings()

    def test_critical_dominates(self):
        """Test any failed critical check gives CRITICAL."""
        result = ValidationResult.from_checks(
            [ValidationCheck("b", False, Severity.WARNING), ValidationCheck("a", False, Severity.CRITICAL)]
        )

        assert result.is_critical()
        assert [c.name for c in result.get_failed_checks()] == ["b", "a"]

    def test_to_dict(self):
        """Test JSON form carries every check."""
        result = ValidationResult.from_checks([ValidationCheck("a", False, Severity.WARNING, "msg", {"x": 1})])

        data = result.to_dict()

        assert data["status"] == "WARNING"
        assert data["checks"][0] == {
            "name": "a",
            "passed": False,
            "severity": "WARNING",
            "message": "msg",
            "details": {"x": 1},
        }


class TestValidateHologram:
    """Tests for hologram invariant checks."""

    def test_valid_hologram_passes(self):
        """Test a freshly built hologram passes."""
        rng = np.random.default_rng(0)
        h = build([phase_state(rng.uniform(0, 2 * math.pi, 64)) for _ in range(4)])

        result = validate_hologram(h)

        assert result.status == Severity.PASS

    def test_non_hermitian_is_critical(self):
        """Test an asymmetric perturbation fails the Hermitian check."""
        h = build([phase_state(np.array([0.0, 1.0, 2.0]))])
        matrix = np.array(h.matrix)
        matrix[0, 2] += 1e-6j

        result = validate_hologram(Hologram(matrix=matrix, stored=h.stored))

        assert result.is_critical()
        assert "hermitian" in [c.name for c in result.get_failed_checks()]

    def test_wrong_trace_is_critical(self):
        """Test a diagonal shift fails the trace check."""
        h = build([phase_state(np.array([0.0, 1.0]))])
        matrix = np.array(h.matrix) + 0.1 * np.eye(2)

        result = validate_hologram(Hologram(matrix=matrix, stored=h.stored))

        failed = [c.name for c in result.get_failed_checks()]
        assert "trace" in failed
        assert "matrix_matches_stored" in failed

    def test_non_finite_stops_early(self):
        """Test NaN entries fail the finite check and nothing else runs."""
        matrix = np.full((2, 2), np.nan, dtype=complex)

        result = validate_hologram(Hologram(matrix=matrix, stored=np.ones((1, 2)) / math.sqrt(2)))

        assert [c.name for c in result.checks] == ["finite_entries"]
        assert result.is_critical()

    def test_unnormalized_stored_pattern(self):
        """Test stored rows must be unit norm."""
        stored = np.array([[1.0, 1.0]], dtype=complex)

        result = validate_hologram(Hologram(matrix=stored.T @ stored.conj(), stored=stored))

        assert "stored_unit_norm" in [c.name for c in result.get_failed_checks()]

    def test_cross_talk_warning(self):
        """Test strongly overlapping stored patterns produce a warning."""
        h = build([phase_state(np.zeros(8)), phase_state(np.full(8, 0.1))])

        result = validate_hologram(h)

        assert result.status == Severity.WARNING
        check = result.get_failed_checks()[0]
        assert check.name == "cross_talk"
        assert check.details["pair"] == [0, 1]

    def test_load_factor_warning(self):
        """Test more patterns than units produces a warning."""
        h = build([phase_state(np.array([0.0, a])) for a in (0.0, 2.0, 4.0)])

        names = [c.name for c in validate_hologram(h).get_failed_checks()]

        assert "load_factor" in names
        assert not validate_hologram(h).is_critical()


class TestValidateState:
    """Tests for state invariant checks."""

    def test_phase_state_passes(self):
        """Test phase states satisfy norm and unit modulus."""
        assert validate_state(phase_state(np.linspace(0, 6, 50))).status == Severity.PASS

    def test_unnormalized_state(self):
        """Test a state with norm 2 fails."""
        s = StatePattern([2.0, 0.0], EncodingKind.AMPLITUDE)

        assert validate_state(s).is_critical()

    def test_unequal_moduli_for_phase_kind(self):
        """Test a phase-kind state with unequal moduli fails unit modulus."""
        s = StatePattern([0.6, 0.8], EncodingKind.PHASE)

        result = validate_state(s)

        assert [c.name for c in result.get_failed_checks()] == ["unit_modulus"]

    def test_amplitude_kind_skips_modulus(self):
        """Test amplitude states are only checked for norm."""
        result = validate_state(StatePattern([0.6, 0.8], EncodingKind.AMPLITUDE))

        assert [c.name for c in result.checks] == ["unit_norm"]
        assert result.status == Severity.PASS
