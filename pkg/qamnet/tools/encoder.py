"""Map raw data into normalized complex state vectors and back.

Three encodings are supported:

- amplitude: ψ_j = v_j / ‖v‖, real-valued
- bipolar:   ψ_j = ±1/√N by thresholding (phase 0 or π)
- phase:     ψ_j = e^{iφ_j}/√N with φ_j from the sigmoid phase map

plus a weighted phase encoding that carries data in phases and per-unit
confidence in amplitudes. Every state is unit-norm so overlaps live in [0, 1].
"""

import logging
import math
from dataclasses import dataclass
from enum import Enum
from typing import Optional, Union

import numpy as np

from qamnet.tools.patterns import RawPattern

logger = logging.getLogger(__name__)

TWO_PI = 2.0 * math.pi
SATURATION_TOLERANCE = 1e-12
# Phasor components this close to zero are snapped to exactly zero
AXIS_SNAP = 4.0 * np.finfo(np.float64).eps


class EncodingKind(str, Enum):
    """How data was mapped into a state vector."""

    AMPLITUDE = "amplitude"
    BIPOLAR = "bipolar"
    PHASE = "phase"
    COMPLEX = "complex"

    @property
    def unit_modulus(self) -> bool:
        return self in (EncodingKind.BIPOLAR, EncodingKind.PHASE)


class EncodingError(ValueError):
    """Raised when data cannot be encoded or decoded."""

    pass


class ConstantPatternError(EncodingError):
    """Raised by the sigmoid map when a pattern has zero spread."""

    pass


class ZeroNormError(EncodingError):
    """Raised when a vector with zero norm would have to be normalized."""

    pass


class PhaseSaturationError(EncodingError):
    """Raised when a decoded phase sits on the 0/2π boundary."""

    pass


@dataclass(frozen=True)
class PatternStats:
    """Per-pattern mean and population standard deviation."""

    mean: float
    std: float

    def __post_init__(self) -> None:
        if not (math.isfinite(self.mean) and math.isfinite(self.std)):
            raise EncodingError("pattern statistics must be finite")
        if self.std < 0:
            raise EncodingError(f"standard deviation must be non-negative, got {self.std}")


@dataclass(frozen=True, eq=False)
class StatePattern:
    """A complex state vector ψ of dimension N with its encoding kind."""

    amplitudes: np.ndarray
    kind: EncodingKind
    label: Optional[str] = None

    def __post_init__(self) -> None:
        amplitudes = np.array(self.amplitudes, dtype=np.complex128).reshape(-1)
        if amplitudes.size < 1:
            raise EncodingError("state must have at least one component")
        amplitudes.flags.writeable = False
        object.__setattr__(self, "amplitudes", amplitudes)
        object.__setattr__(self, "kind", EncodingKind(self.kind))

    @property
    def dimension(self) -> int:
        return int(self.amplitudes.size)

    def __len__(self) -> int:
        return self.dimension

    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))

    def phases(self) -> np.ndarray:
        """Component phases folded into [0, 2π)."""
        return np.mod(np.angle(self.amplitudes), TWO_PI)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, StatePattern):
            return NotImplemented
        return (
            self.kind == other.kind
            and self.label == other.label
            and self.amplitudes.tobytes() == other.amplitudes.tobytes()
        )

    __hash__ = None  # type: ignore[assignment]


def pattern_stats(p: RawPattern) -> PatternStats:
    """Mean and population standard deviation of a pattern's values.

    A pattern whose values are all equal gets std exactly 0; np.std can leave
    a residue of a few ulps when the mean is not representable.
    """
    if np.ptp(p.values) == 0:
        return PatternStats(mean=float(p.values[0]), std=0.0)
    return PatternStats(mean=float(np.mean(p.values)), std=float(np.std(p.values)))


def sigmoid_phase_map(v: Union[float, np.ndarray], stats: PatternStats) -> Union[float, np.ndarray]:
    """Map data values into phases in (0, 2π).

    φ = 2π / (1 + exp((mean - v) / std)); strictly increasing in v with
    φ(mean) = π.

    Raises:
        ConstantPatternError: If stats.std is 0
    """
    if stats.std == 0:
        raise ConstantPatternError(
            "pattern is constant (std = 0); the sigmoid phase map is undefined, "
            "use a uniform phase of pi for every unit instead"
        )
    with np.errstate(over="ignore"):
        phase = TWO_PI / (1.0 + np.exp((stats.mean - np.asarray(v, dtype=np.float64)) / stats.std))
    if np.ndim(phase) == 0:
        return float(phase)
    return phase


def unit_phasors(phases: np.ndarray) -> np.ndarray:
    """e^{iφ} for each phase, exact on the axes.

    cos/sin leave residues like sin(π) ≈ 1.2e-16; those are snapped to zero so
    phase 0 gives exactly 1 and phase π exactly -1.
    """
    phases = np.asarray(phases, dtype=np.float64)
    real = np.cos(phases)
    imag = np.sin(phases)
    real = np.where(np.abs(real) <= AXIS_SNAP, 0.0, real)
    imag = np.where(np.abs(imag) <= AXIS_SNAP, 0.0, imag)
    return real + 1j * imag


def phase_state(phases: np.ndarray, label: Optional[str] = None) -> StatePattern:
    """State with constant amplitude 1/√N and the given phases."""
    phases = np.asarray(phases, dtype=np.float64).reshape(-1)
    return StatePattern(unit_phasors(phases) / np.sqrt(phases.size), EncodingKind.PHASE, label)


def phase_encode(p: RawPattern) -> StatePattern:
    """Sigmoid-map every value into a phase and build the unit-modulus state.

    Raises:
        ConstantPatternError: If the pattern has zero spread
    """
    phases = sigmoid_phase_map(p.values, pattern_stats(p))
    return phase_state(phases, label=p.label)


def weighted_phase_encode(p: RawPattern, weights: np.ndarray) -> StatePattern:
    """Phase encoding with non-uniform amplitudes.

    ψ_j = w_j e^{iφ_j} / ‖w‖, where w carries a per-unit weight (for example a
    confidence) and φ_j comes from the sigmoid phase map.
    """
    weights = np.asarray(weights, dtype=np.float64).reshape(-1)
    if weights.size != p.dimension:
        raise EncodingError(f"expected {p.dimension} weights, got {weights.size}")
    if not np.all(np.isfinite(weights)) or np.any(weights < 0):
        raise EncodingError("weights must be finite and non-negative")
    norm = np.linalg.norm(weights)
    if norm == 0:
        raise ZeroNormError("weights are all zero")

    phases = sigmoid_phase_map(p.values, pattern_stats(p))
    return StatePattern(weights * unit_phasors(phases) / norm, EncodingKind.COMPLEX, p.label)


def amplitude_encode(p: RawPattern) -> StatePattern:
    """Normalize the raw values into a real-valued unit vector.

    Raises:
        ZeroNormError: If every value is zero
    """
    norm = np.linalg.norm(p.values)
    if norm == 0:
        raise ZeroNormError("cannot amplitude-encode a zero-norm pattern")
    return StatePattern(p.values / norm, EncodingKind.AMPLITUDE, p.label)


def bipolar_encode(p: RawPattern, threshold: float = 0.5) -> StatePattern:
    """Threshold into ±1/√N; values equal to the threshold map to +1.

    Built through the phase path (phase 0 or π), so the result is bit-for-bit
    the phase encoding with φ ∈ {0, π}.
    """
    phases = np.where(p.values >= threshold, 0.0, math.pi)
    state = phase_state(phases, label=p.label)
    return StatePattern(state.amplitudes, EncodingKind.BIPOLAR, p.label)


def encode(p: RawPattern, kind: EncodingKind, threshold: float = 0.5) -> StatePattern:
    """Encode with the named scheme (weighted phase needs explicit weights)."""
    kind = EncodingKind(kind)
    if kind is EncodingKind.AMPLITUDE:
        return amplitude_encode(p)
    if kind is EncodingKind.BIPOLAR:
        return bipolar_encode(p, threshold)
    if kind is EncodingKind.PHASE:
        return phase_encode(p)
    raise EncodingError(f"encoding {kind.value!r} requires weights; use weighted_phase_encode")


def state_from_output(vector: np.ndarray, kind: EncodingKind, label: Optional[str] = None) -> StatePattern:
    """Normalize a raw recall output so it can be decoded."""
    vector = np.asarray(vector, dtype=np.complex128).reshape(-1)
    norm = np.linalg.norm(vector)
    if norm == 0:
        raise ZeroNormError("recall output is zero; nothing to decode")
    return StatePattern(vector / norm, kind, label)


def decode_phase(s: StatePattern, stats: PatternStats) -> RawPattern:
    """Invert the sigmoid phase map: v = mean - std·ln(2π/φ - 1).

    Phases from arg() in (-π, π] are folded into (0, 2π] by adding 2π to
    non-positive values.

    Raises:
        EncodingError: If the state is not phase-encoded
        PhaseSaturationError: If any phase is 0 or 2π within 1e-12
    """
    if s.kind not in (EncodingKind.PHASE, EncodingKind.COMPLEX):
        raise EncodingError(f"decode_phase needs a phase-encoded state, got {s.kind.value}")

    phases = np.angle(s.amplitudes)
    phases = np.where(phases <= 0, phases + TWO_PI, phases)

    saturated = (phases <= SATURATION_TOLERANCE) | (phases >= TWO_PI - SATURATION_TOLERANCE)
    if np.any(saturated):
        index = int(np.flatnonzero(saturated)[0])
        raise PhaseSaturationError(
            f"phase at component {index} is saturated at the 0/2π boundary; the value is unbounded"
        )

    values = stats.mean - stats.std * np.log(TWO_PI / phases - 1.0)
    return RawPattern(values, label=s.label)
