"""Hebbian hologram construction, recall and recognition.

The hologram is the N×N propagator J_hj = Σ_k ψ^k_h conj(ψ^k_j). Recall is a
single application of J to an input state. It runs either densely (J·x, O(N²))
or lazily through the overlap coefficients c^k = ⟨ψ^k, x⟩ as Σ_k c^k ψ^k
(O(PN)). Recognition ranks the stored patterns by |c^k|.
"""

import logging
from dataclasses import dataclass, field
from typing import List, Optional, Sequence, Tuple, Union

import numpy as np

from qamnet.tools.encoder import EncodingKind, StatePattern
from qamnet.validation import NORM_TOLERANCE

logger = logging.getLogger(__name__)

PATH_TOLERANCE = 1e-10
ZERO_OVERLAP = 1e-12
DEFAULT_MIN_CONFIDENCE = 0.8


class HologramError(ValueError):
    """Raised on invalid hologram construction or query."""

    pass


def _readonly(array: np.ndarray) -> np.ndarray:
    array = np.ascontiguousarray(array, dtype=np.complex128)
    array.flags.writeable = False
    return array


@dataclass(frozen=True, eq=False)
class Hologram:
    """Immutable Hebbian memory.

    Attributes:
        matrix: N×N complex propagator J
        stored: P×N array whose rows are the stored states ψ^k
        labels: one optional label per stored pattern
    """

    matrix: np.ndarray
    stored: np.ndarray
    labels: Tuple[Optional[str], ...] = field(default_factory=tuple)

    def __post_init__(self) -> None:
        matrix = _readonly(self.matrix)
        stored = _readonly(np.atleast_2d(self.stored))
        n = stored.shape[1]
        if matrix.shape != (n, n):
            raise HologramError(f"matrix shape {matrix.shape} does not match stored dimension {n}")
        labels = tuple(self.labels) if self.labels else (None,) * stored.shape[0]
        if len(labels) != stored.shape[0]:
            raise HologramError(f"expected {stored.shape[0]} labels, got {len(labels)}")
        object.__setattr__(self, "matrix", matrix)
        object.__setattr__(self, "stored", stored)
        object.__setattr__(self, "labels", labels)

    @property
    def dimension(self) -> int:
        return int(self.stored.shape[1])

    @property
    def pattern_count(self) -> int:
        return int(self.stored.shape[0])

    def trace(self) -> float:
        return float(np.trace(self.matrix).real)

    def hermitian_residual(self) -> float:
        """max |J_hj - conj(J_jh)|."""
        return float(np.max(np.abs(self.matrix - self.matrix.conj().T)))

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Hologram):
            return NotImplemented
        return (
            self.labels == other.labels
            and self.matrix.tobytes() == other.matrix.tobytes()
            and self.stored.tobytes() == other.stored.tobytes()
        )

    __hash__ = None  # type: ignore[assignment]


@dataclass(frozen=True, eq=False)
class OverlapReport:
    """Overlap coefficients c^k of an input against every stored pattern."""

    coefficients: np.ndarray
    winner: Optional[int]
    confidence: float
    margin: float
    labels: Tuple[Optional[str], ...] = ()

    @property
    def moduli(self) -> np.ndarray:
        return np.abs(self.coefficients)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, OverlapReport):
            return NotImplemented
        return (
            self.winner == other.winner
            and self.confidence == other.confidence
            and self.margin == other.margin
            and self.coefficients.tobytes() == other.coefficients.tobytes()
        )

    __hash__ = None  # type: ignore[assignment]

    def to_dict(self) -> dict:
        """Convert to dictionary for JSON serialization."""
        labels = self.labels or (None,) * len(self.coefficients)
        return {
            "winner": self.winner,
            "winner_label": labels[self.winner] if self.winner is not None else None,
            "confidence": float(self.confidence),
            "margin": float(self.margin),
            "coefficients": [
                {
                    "index": k,
                    "label": labels[k],
                    "real": float(c.real),
                    "imag": float(c.imag),
                    "modulus": float(abs(c)),
                }
                for k, c in enumerate(self.coefficients)
            ],
        }


@dataclass(frozen=True)
class Recognized:
    """The input matched stored pattern `index` with enough confidence."""

    index: int
    report: OverlapReport

    @property
    def recognized(self) -> bool:
        return True

    def to_dict(self) -> dict:
        return {"decision": "recognized", "index": self.index, **self.report.to_dict()}


@dataclass(frozen=True)
class Ambiguous:
    """No stored pattern reached the confidence threshold: a mixed output."""

    report: OverlapReport

    @property
    def recognized(self) -> bool:
        return False

    def to_dict(self) -> dict:
        return {"decision": "ambiguous", "index": None, **self.report.to_dict()}


Decision = Union[Recognized, Ambiguous]


def _as_vector(state: Union[StatePattern, np.ndarray]) -> np.ndarray:
    if isinstance(state, StatePattern):
        return state.amplitudes
    return np.asarray(state, dtype=np.complex128).reshape(-1)


def _check_dimension(h: Hologram, x: np.ndarray) -> None:
    if x.size != h.dimension:
        raise HologramError(f"dimension mismatch: input has {x.size} components, hologram has {h.dimension}")


def _check_unit_norm(x: np.ndarray, what: str) -> None:
    norm = float(np.linalg.norm(x))
    if abs(norm - 1.0) > NORM_TOLERANCE:
        raise HologramError(f"{what} is not normalized (norm {norm:.12g})")


def build(patterns: Sequence[StatePattern]) -> Hologram:
    """Store patterns by Hebbian outer-product summation.

    Args:
        patterns: P ≥ 1 unit-norm states of equal dimension

    Returns:
        Hologram with J = Σ_k ψ^k (ψ^k)†

    Raises:
        HologramError: On an empty list, mismatched dimensions or non-normalized states
    """
    if not patterns:
        raise HologramError("cannot build a hologram from an empty pattern list")

    n = patterns[0].dimension
    for k, pattern in enumerate(patterns):
        if pattern.dimension != n:
            raise HologramError(f"dimension mismatch: pattern {k} has {pattern.dimension} components, expected {n}")
        _check_unit_norm(pattern.amplitudes, f"pattern {k}")

    stored = np.stack([p.amplitudes for p in patterns])
    matrix = stored.T @ stored.conj()

    logger.info(f"Built hologram: N={n}, P={len(patterns)}")
    return Hologram(matrix=matrix, stored=stored, labels=tuple(p.label for p in patterns))


def recall_dense(h: Hologram, x: Union[StatePattern, np.ndarray]) -> np.ndarray:
    """One application of the propagator: output_h = Σ_j J_hj x_j.

    The output is the raw superposition and is not renormalized.
    """
    x = _as_vector(x)
    _check_dimension(h, x)
    return h.matrix @ x


def recall_lazy(h: Hologram, x: Union[StatePattern, np.ndarray]) -> np.ndarray:
    """Recall through the overlaps: output = Σ_k c^k ψ^k without touching J."""
    x = _as_vector(x)
    _check_dimension(h, x)
    coefficients = h.stored.conj() @ x
    return coefficients @ h.stored


def relative_disagreement(a: np.ndarray, b: np.ndarray) -> float:
    """max |a - b| scaled by max(1, max |a|)."""
    a = np.asarray(a)
    b = np.asarray(b)
    scale = max(1.0, float(np.max(np.abs(a))))
    return float(np.max(np.abs(a - b))) / scale


def overlaps(h: Hologram, x: Union[StatePattern, np.ndarray]) -> OverlapReport:
    """Compute c^k = Σ_j conj(ψ^k_j) x_j and pick the winner by modulus.

    Ties go to the lowest index. The winner is None only when every overlap
    is below 1e-12; with a single stored pattern the margin is the confidence.

    Raises:
        HologramError: On dimension mismatch or a non-normalized input
    """
    x = _as_vector(x)
    _check_dimension(h, x)
    _check_unit_norm(x, "input")

    coefficients = h.stored.conj() @ x
    moduli = np.abs(coefficients)
    best = int(np.argmax(moduli))
    confidence = float(moduli[best])

    if confidence < ZERO_OVERLAP:
        return OverlapReport(coefficients, None, confidence, 0.0, h.labels)

    others = np.delete(moduli, best)
    runner_up = float(np.max(others)) if others.size else 0.0
    return OverlapReport(coefficients, best, confidence, confidence - runner_up, h.labels)


def recognize(
    h: Hologram, x: Union[StatePattern, np.ndarray], min_confidence: float = DEFAULT_MIN_CONFIDENCE
) -> Decision:
    """Recognize the input when its best overlap reaches min_confidence."""
    if not 0.0 <= min_confidence <= 1.0:
        raise HologramError(f"min_confidence must be within [0, 1], got {min_confidence}")

    report = overlaps(h, x)
    if report.winner is not None and report.confidence >= min_confidence:
        return Recognized(report.winner, report)
    return Ambiguous(report)


def orthonormalize(states: Sequence[StatePattern]) -> List[StatePattern]:
    """Orthonormal states spanning the same space, via reduced QR.

    Raises:
        HologramError: If the states are linearly dependent
    """
    matrix = np.stack([s.amplitudes for s in states]).T
    q, r = np.linalg.qr(matrix)
    if np.min(np.abs(np.diag(r))) < 1e-10:
        raise HologramError("states are linearly dependent")
    return [StatePattern(q[:, k], EncodingKind.COMPLEX, s.label) for k, s in enumerate(states)]


def integer_couplings(h: Hologram, atol: float = 1e-9) -> np.ndarray:
    """N·J as integers for a hologram of bipolar patterns.

    Entry (h, j) counts stored patterns whose bits h and j agree minus those
    where they differ, i.e. a sum of XNOR truth-table values.

    Raises:
        HologramError: If N·J is not integral within atol
    """
    scaled = h.dimension * h.matrix
    rounded = np.rint(scaled.real)
    if np.max(np.abs(scaled - rounded)) > atol:
        raise HologramError("couplings are not integral; the stored patterns are not bipolar")
    return rounded.astype(np.int64)
