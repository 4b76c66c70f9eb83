"""Invariant checks for holograms and encoded states.

Checks are collected into a ValidationResult whose status is the most severe
failed check: CRITICAL means the object is corrupt or unusable, WARNING means
it is valid but recall quality will suffer.
"""

import logging
from dataclasses import dataclass
from enum import Enum
from typing import TYPE_CHECKING, Any, Dict, List, Optional

import numpy as np

if TYPE_CHECKING:
    from qamnet.tools.encoder import StatePattern
    from qamnet.tools.memory import Hologram

logger = logging.getLogger(__name__)

HERMITIAN_TOLERANCE = 1e-12
TRACE_TOLERANCE = 1e-9
NORM_TOLERANCE = 1e-9
CONSISTENCY_TOLERANCE = 1e-9
CROSS_TALK_WARNING = 0.5


class Severity(Enum):
    """Validation severity levels."""

    CRITICAL = "CRITICAL"  # Corrupt or unusable
    WARNING = "WARNING"  # Usable, degraded recall
    PASS = "PASS"


@dataclass
class ValidationCheck:
    """Individual validation check result."""

    name: str
    passed: bool
    severity: Severity
    message: Optional[str] = None
    details: Optional[Dict[str, Any]] = None


@dataclass
class ValidationResult:
    """Aggregated validation result."""

    status: Severity
    checks: List[ValidationCheck]

    @classmethod
    def from_checks(cls, checks: List[ValidationCheck]) -> "ValidationResult":
        """Status is the most severe failed check, PASS if none failed."""
        status = Severity.PASS
        for check in checks:
            if not check.passed:
                if check.severity == Severity.CRITICAL:
                    status = Severity.CRITICAL
                    break
                elif check.severity == Severity.WARNING and status == Severity.PASS:
                    status = Severity.WARNING
        return cls(status=status, checks=checks)

    def is_critical(self) -> bool:
        return self.status == Severity.CRITICAL

    def has_warnings(self) -> bool:
        return any(not c.passed and c.severity == Severity.WARNING for c in self.checks)

    def get_failed_checks(self) -> List[ValidationCheck]:
        return [c for c in self.checks if not c.passed]

    def to_dict(self) -> Dict[str, Any]:
        """Convert to dictionary for JSON serialization."""
        return {
            "status": self.status.value,
            "checks": [
                {
                    "name": c.name,
                    "passed": c.passed,
                    "severity": c.severity.value,
                    "message": c.message,
                    "details": c.details,
                }
                for c in self.checks
            ],
        }


def validate_hologram(h: "Hologram") -> ValidationResult:
    """Check the structural invariants of a hologram.

    Critical: finite entries, Hermiticity, trace = P, unit-norm stored
    patterns, matrix consistent with the stored patterns.
    Warning: strongly correlated stored patterns, more patterns than units.
    """
    checks = []
    matrix, stored = h.matrix, h.stored
    p, n = stored.shape

    finite = bool(np.all(np.isfinite(matrix)) and np.all(np.isfinite(stored)))
    checks.append(
        ValidationCheck(
            name="finite_entries",
            passed=finite,
            severity=Severity.CRITICAL,
            message="matrix or stored patterns contain NaN/Inf" if not finite else None,
        )
    )
    if not finite:
        return ValidationResult.from_checks(checks)

    residual = h.hermitian_residual()
    checks.append(
        ValidationCheck(
            name="hermitian",
            passed=residual <= HERMITIAN_TOLERANCE,
            severity=Severity.CRITICAL,
            message=f"matrix is not Hermitian (residual {residual:.3e})" if residual > HERMITIAN_TOLERANCE else None,
            details={"residual": residual, "tolerance": HERMITIAN_TOLERANCE},
        )
    )

    trace = h.trace()
    trace_error = abs(trace - p)
    checks.append(
        ValidationCheck(
            name="trace",
            passed=trace_error <= TRACE_TOLERANCE,
            severity=Severity.CRITICAL,
            message=f"trace {trace:.12g} differs from P={p}" if trace_error > TRACE_TOLERANCE else None,
            details={"trace": trace, "patterns": p},
        )
    )

    norms = np.linalg.norm(stored, axis=1)
    worst_norm = float(np.max(np.abs(norms - 1.0)))
    checks.append(
        ValidationCheck(
            name="stored_unit_norm",
            passed=worst_norm <= NORM_TOLERANCE,
            severity=Severity.CRITICAL,
            message=f"stored pattern norms deviate from 1 by {worst_norm:.3e}" if worst_norm > NORM_TOLERANCE else None,
            details={"max_deviation": worst_norm},
        )
    )

    rebuilt = stored.T @ stored.conj()
    mismatch = float(np.max(np.abs(rebuilt - matrix)))
    checks.append(
        ValidationCheck(
            name="matrix_matches_stored",
            passed=mismatch <= CONSISTENCY_TOLERANCE,
            severity=Severity.CRITICAL,
            message=f"matrix differs from the stored patterns' outer products by {mismatch:.3e}"
            if mismatch > CONSISTENCY_TOLERANCE
            else None,
            details={"max_difference": mismatch},
        )
    )

    if p > 1:
        gram = np.abs(stored.conj() @ stored.T)
        np.fill_diagonal(gram, 0.0)
        worst_overlap = float(np.max(gram))
        a, b = np.unravel_index(int(np.argmax(gram)), gram.shape)
        if worst_overlap > CROSS_TALK_WARNING:
            checks.append(
                ValidationCheck(
                    name="cross_talk",
                    passed=False,
                    severity=Severity.WARNING,
                    message=f"patterns {a} and {b} overlap by {worst_overlap:.3f}; recall may be mixed",
                    details={"max_overlap": worst_overlap, "pair": [int(a), int(b)]},
                )
            )

    if p > n:
        checks.append(
            ValidationCheck(
                name="load_factor",
                passed=False,
                severity=Severity.WARNING,
                message=f"{p} patterns stored in {n} units; stored patterns cannot all be orthogonal",
                details={"patterns": p, "units": n},
            )
        )

    result = ValidationResult.from_checks(checks)
    if result.is_critical():
        logger.warning(f"Hologram failed validation: {[c.name for c in result.get_failed_checks()]}")
    return result


def validate_state(s: "StatePattern", tolerance: float = 1e-12) -> ValidationResult:
    """Check normalization and, for phase/bipolar states, unit modulus."""
    checks = []
    n = s.dimension
    norm_error = abs(float(np.sum(np.abs(s.amplitudes) ** 2)) - 1.0)
    checks.append(
        ValidationCheck(
            name="unit_norm",
            passed=norm_error <= tolerance,
            severity=Severity.CRITICAL,
            message=f"squared norm deviates from 1 by {norm_error:.3e}" if norm_error > tolerance else None,
            details={"deviation": norm_error},
        )
    )

    if s.kind.unit_modulus:
        modulus_error = float(np.max(np.abs(np.abs(s.amplitudes) * np.sqrt(n) - 1.0)))
        checks.append(
            ValidationCheck(
                name="unit_modulus",
                passed=modulus_error <= tolerance,
                severity=Severity.CRITICAL,
                message=f"component moduli deviate from 1/sqrt(N) by {modulus_error:.3e}"
                if modulus_error > tolerance
                else None,
                details={"deviation": modulus_error},
            )
        )

    return ValidationResult.from_checks(checks)
