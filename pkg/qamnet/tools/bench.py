"""Seeded experiment harness.

Experiments:

- capacity / noise sweeps: recognition accuracy, confidence and margin over a
  grid of pattern counts P and noise levels
- equivalence: amplitude- versus phase-encoded memories on bipolar corpora
  (must be bit-identical) and on general real-valued corpora (agreement rate)
- timing: dense versus lazy recall wall time and memory footprint

Every trial draws from its own (seed, stream) generator, so trials can run in
any order or in parallel and still reproduce exactly. Timings are kept out of
the data payloads that the determinism contract covers.
"""

import json
import logging
import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Any, Callable, Dict, List, Optional, Sequence, TypeVar

import numpy as np
from scipy.stats import binomtest

from qamnet.config import ExperimentConfig
from qamnet.tools.encoder import (
    EncodingError,
    StatePattern,
    amplitude_encode,
    phase_encode,
    phase_state,
)
from qamnet.tools.hologram_file import to_bytes
from qamnet.tools.memory import (
    PATH_TOLERANCE,
    Recognized,
    build,
    overlaps,
    recall_dense,
    recall_lazy,
    recognize,
    relative_disagreement,
)
from qamnet.tools.patterns import RawPattern, format_csv
from qamnet.tools.rng import SeededRNG

logger = logging.getLogger(__name__)

T = TypeVar("T")

TRIAL_COLUMNS = ["experiment", "P", "noise", "trial", "target", "winner", "correct", "confidence", "margin"]
TIMING_COLUMNS = ["dense_ns", "lazy_ns"]
CONFIDENCE_LEVEL = 0.95


class RecallMismatchError(RuntimeError):
    """Raised when dense and lazy recall disagree beyond tolerance."""

    pass


# ---------------------------------------------------------------------------
# Pattern generation and noise
# ---------------------------------------------------------------------------


def _random_phase_states(rng: SeededRNG, n: int, p: int) -> List[StatePattern]:
    phases = rng.phases((p, n))
    return [phase_state(row) for row in phases]


def gen_random_phase_patterns(seed: int, N: int, P: int) -> List[StatePattern]:
    """P phase patterns with i.i.d. uniform phases and amplitudes 1/√N."""
    if N < 1 or P < 1:
        raise ValueError(f"N and P must be positive, got N={N}, P={P}")
    return _random_phase_states(SeededRNG(seed), N, P)


def _require_unit_modulus(p: StatePattern) -> None:
    if not p.kind.unit_modulus:
        raise EncodingError(f"phase noise needs a phase or bipolar state, got {p.kind.value}")


def _jitter(p: StatePattern, jitter: float, rng: SeededRNG) -> StatePattern:
    if jitter == 0:
        return p
    noise = rng.uniform(-jitter, jitter, p.dimension)
    return phase_state(np.angle(p.amplitudes) + noise, label=p.label)


def _redraw(p: StatePattern, fraction: float, rng: SeededRNG) -> StatePattern:
    count = int(math.floor(fraction * p.dimension + 0.5))
    if count == 0:
        return p
    phases = np.angle(p.amplitudes)
    phases[rng.choice(p.dimension, count)] = rng.phases(count)
    return phase_state(phases, label=p.label)


def perturb_phases(p: StatePattern, jitter_radians: float, seed: int) -> StatePattern:
    """Add i.i.d. uniform noise on [-jitter, +jitter] to every phase.

    Raises:
        EncodingError: If the state is amplitude-encoded
        ValueError: If the jitter is negative or not finite
    """
    if not math.isfinite(jitter_radians) or jitter_radians < 0:
        raise ValueError(f"jitter must be finite and non-negative, got {jitter_radians}")
    _require_unit_modulus(p)
    return _jitter(p, jitter_radians, SeededRNG(seed))


def flip_units(p: StatePattern, fraction: float, seed: int) -> StatePattern:
    """Give round(fraction·N) distinct units fresh uniform phases."""
    if not 0.0 <= fraction <= 1.0:
        raise ValueError(f"fraction must lie within [0, 1], got {fraction}")
    _require_unit_modulus(p)
    return _redraw(p, fraction, SeededRNG(seed))


def _apply_noise(p: StatePattern, kind: str, level: float, rng: SeededRNG) -> StatePattern:
    if kind == "fraction":
        return _redraw(p, level, rng)
    return _jitter(p, level, rng)


def _trial_stream(cfg: ExperimentConfig, outer: int, inner: int, inner_count: int, trial: int) -> int:
    """Stream id of one trial; stream 0 is reserved for the bare seed."""
    return 1 + trial + cfg.trials * (inner + inner_count * outer)


def _map(cfg: ExperimentConfig, fn: Callable[..., T], tasks: Sequence[tuple]) -> List[T]:
    """Run tasks in order, in parallel when cfg.workers > 1."""
    if cfg.workers == 1:
        return [fn(*task) for task in tasks]
    with ThreadPoolExecutor(max_workers=cfg.workers) as pool:
        return list(pool.map(lambda task: fn(*task), tasks))


def _elapsed_ns(fn: Callable[[], Any]) -> int:
    start = time.perf_counter_ns()
    fn()
    return time.perf_counter_ns() - start


# ---------------------------------------------------------------------------
# Capacity and noise sweeps
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class TrialRecord:
    """Outcome of probing one hologram with one noisy stored pattern."""

    experiment: str
    P: int
    noise: float
    trial: int
    target: int
    winner: Optional[int]
    correct: bool
    confidence: float
    margin: float
    dense_ns: int = 0
    lazy_ns: int = 0

    def to_dict(self, include_timings: bool = True) -> Dict[str, Any]:
        row = {name: getattr(self, name) for name in TRIAL_COLUMNS}
        if include_timings:
            row.update(dense_ns=self.dense_ns, lazy_ns=self.lazy_ns)
        return row


@dataclass(frozen=True)
class CellSummary:
    """Aggregates of all trials in one (P, noise) cell."""

    P: int
    noise: float
    trials: int
    correct: int
    accuracy: float
    accuracy_low: float
    accuracy_high: float
    mean_confidence: float
    mean_margin: float
    margin_stderr: float
    median_dense_ns: int
    median_lazy_ns: int

    def to_dict(self, include_timings: bool = True) -> Dict[str, Any]:
        row = {
            "P": self.P,
            "noise": self.noise,
            "trials": self.trials,
            "correct": self.correct,
            "accuracy": self.accuracy,
            "accuracy_ci": [self.accuracy_low, self.accuracy_high],
            "mean_confidence": self.mean_confidence,
            "mean_margin": self.mean_margin,
            "margin_stderr": self.margin_stderr,
        }
        if include_timings:
            row.update(median_dense_ns=self.median_dense_ns, median_lazy_ns=self.median_lazy_ns)
        return row


def summarize_cell(records: Sequence[TrialRecord]) -> CellSummary:
    """Accuracy with a Wilson interval, plus mean confidence and margin."""
    n = len(records)
    correct = sum(r.correct for r in records)
    interval = binomtest(correct, n).proportion_ci(confidence_level=CONFIDENCE_LEVEL, method="wilson")
    margins = np.array([r.margin for r in records])
    stderr = float(np.std(margins, ddof=1) / math.sqrt(n)) if n > 1 else 0.0
    return CellSummary(
        P=records[0].P,
        noise=records[0].noise,
        trials=n,
        correct=correct,
        accuracy=correct / n,
        accuracy_low=float(interval.low),
        accuracy_high=float(interval.high),
        mean_confidence=float(np.mean([r.confidence for r in records])),
        mean_margin=float(np.mean(margins)),
        margin_stderr=stderr,
        median_dense_ns=int(np.median([r.dense_ns for r in records])),
        median_lazy_ns=int(np.median([r.lazy_ns for r in records])),
    )


@dataclass
class ExperimentResult:
    """Per-trial records of a sweep, in (P, noise, trial) order."""

    experiment: str
    config: ExperimentConfig
    records: List[TrialRecord] = field(default_factory=list)

    def cells(self) -> List[List[TrialRecord]]:
        grouped: Dict[tuple, List[TrialRecord]] = {}
        for record in self.records:
            grouped.setdefault((record.P, record.noise), []).append(record)
        return list(grouped.values())

    def summaries(self) -> List[CellSummary]:
        return [summarize_cell(cell) for cell in self.cells()]

    def check(self) -> None:
        """Verify the record count and accuracy bounds."""
        cfg = self.config
        expected = len(cfg.P_values) * len(cfg.noise_levels) * cfg.trials
        if len(self.records) != expected:
            raise ValueError(f"expected {expected} records, found {len(self.records)}")
        for summary in self.summaries():
            if not 0.0 <= summary.accuracy <= 1.0:
                raise ValueError(f"accuracy {summary.accuracy} out of bounds for P={summary.P}")

    def to_dict(self, include_timings: bool = True) -> Dict[str, Any]:
        return {
            "experiment": self.experiment,
            "config": self.config.model_dump(),
            "records": [r.to_dict(include_timings) for r in self.records],
            "summary": [s.to_dict(include_timings) for s in self.summaries()],
        }

    def data_payload(self) -> Dict[str, Any]:
        """Everything except timings; identical for identical configs."""
        return self.to_dict(include_timings=False)

    def to_json(self, include_timings: bool = True) -> str:
        return json.dumps(self.to_dict(include_timings), indent=2)

    def to_csv(self, include_timings: bool = True) -> str:
        columns = TRIAL_COLUMNS + (TIMING_COLUMNS if include_timings else [])
        rows = [columns]
        for record in self.records:
            values = record.to_dict(include_timings)
            rows.append(["" if values[c] is None else values[c] for c in columns])
        return format_csv(rows)


def _sweep_trial(cfg: ExperimentConfig, experiment: str, p_index: int, noise_index: int, trial: int) -> TrialRecord:
    p = cfg.P_values[p_index]
    noise = cfg.noise_levels[noise_index]
    rng = SeededRNG(cfg.seed, _trial_stream(cfg, p_index, noise_index, len(cfg.noise_levels), trial))

    states = _random_phase_states(rng, cfg.N, p)
    target = rng.integers(p)
    probe = _apply_noise(states[target], cfg.noise_kind, noise, rng)

    hologram = build(states)
    dense_ns = _elapsed_ns(lambda: recall_dense(hologram, probe))
    lazy_ns = _elapsed_ns(lambda: recall_lazy(hologram, probe))

    decision = recognize(hologram, probe, cfg.min_confidence)
    report = decision.report
    return TrialRecord(
        experiment=experiment,
        P=p,
        noise=noise,
        trial=trial,
        target=target,
        winner=report.winner,
        correct=isinstance(decision, Recognized) and decision.index == target,
        confidence=report.confidence,
        margin=report.margin,
        dense_ns=dense_ns,
        lazy_ns=lazy_ns,
    )


def _run_sweep(cfg: ExperimentConfig, experiment: str) -> ExperimentResult:
    tasks = [
        (cfg, experiment, p_index, noise_index, trial)
        for p_index in range(len(cfg.P_values))
        for noise_index in range(len(cfg.noise_levels))
        for trial in range(cfg.trials)
    ]
    logger.info(f"Running {experiment} sweep: {len(tasks)} trials, N={cfg.N}, workers={cfg.workers}")
    result = ExperimentResult(experiment=experiment, config=cfg, records=_map(cfg, _sweep_trial, tasks))
    result.check()
    return result


def run_capacity_sweep(cfg: ExperimentConfig) -> ExperimentResult:
    """Recognition of noisy stored patterns as P grows (cross-talk regime).

    Each trial stores P fresh random patterns and probes one of them, drawn
    uniformly, so every (P, noise) cell holds exactly `trials` records
    whatever P is. Probing every stored pattern would multiply the cost of a
    cell by P and give records that share one hologram, hence not independent;
    across trials each stored index is still probed about trials/P times.
    """
    return _run_sweep(cfg, "capacity")


def run_noise_sweep(cfg: ExperimentConfig) -> ExperimentResult:
    """The same grid as the capacity sweep, reported as a noise-robustness run."""
    return _run_sweep(cfg, "noise")


# ---------------------------------------------------------------------------
# Amplitude / phase model equivalence
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class EquivalenceTrial:
    P: int
    noise: float
    trial: int
    bipolar_identical: bool
    general_checked: bool
    general_agree: bool
    amplitude_correct: bool
    phase_correct: bool
    max_amplitude_overlap: float


@dataclass
class EquivalenceReport:
    """Outcome of both equivalence sub-checks.

    The bipolar sub-check must be 100% identical; the general sub-check is
    reported as an agreement rate with no pass/fail threshold.
    """

    config: ExperimentConfig
    trials: List[EquivalenceTrial] = field(default_factory=list)

    @property
    def bipolar_cases(self) -> int:
        return len(self.trials)

    @property
    def bipolar_identical(self) -> int:
        return sum(t.bipolar_identical for t in self.trials)

    @property
    def bipolar_passed(self) -> bool:
        return self.bipolar_identical == self.bipolar_cases

    @property
    def general_cases(self) -> int:
        return sum(t.general_checked for t in self.trials)

    @property
    def general_agreements(self) -> int:
        return sum(t.general_agree for t in self.trials if t.general_checked)

    @property
    def agreement_rate(self) -> Optional[float]:
        return self.general_agreements / self.general_cases if self.general_cases else None

    def _group(self, trials: Sequence[EquivalenceTrial]) -> Dict[str, Any]:
        general = [t for t in trials if t.general_checked]
        return {
            "bipolar_cases": len(trials),
            "bipolar_identical": sum(t.bipolar_identical for t in trials),
            "general_cases": len(general),
            "general_agreements": sum(t.general_agree for t in general),
            "agreement_rate": sum(t.general_agree for t in general) / len(general) if general else None,
            "amplitude_accuracy": sum(t.amplitude_correct for t in general) / len(general) if general else None,
            "phase_accuracy": sum(t.phase_correct for t in general) / len(general) if general else None,
            "max_amplitude_overlap": max((t.max_amplitude_overlap for t in general), default=None),
        }

    def to_dict(self) -> Dict[str, Any]:
        per_cell = []
        for p in self.config.P_values:
            for noise in self.config.noise_levels:
                cell = [t for t in self.trials if t.P == p and t.noise == noise]
                per_cell.append({"P": p, "noise": noise, **self._group(cell)})
        return {
            "experiment": "equivalence",
            "config": self.config.model_dump(),
            "bipolar_passed": self.bipolar_passed,
            "summary": self._group(self.trials),
            "cells": per_cell,
        }

    def data_payload(self) -> Dict[str, Any]:
        return self.to_dict()

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)


def _flip_bits(bits: np.ndarray, level: float, rng: SeededRNG) -> np.ndarray:
    count = int(math.floor(min(level, 1.0) * bits.size + 0.5))
    flipped = bits.copy()
    if count:
        flipped[rng.choice(bits.size, count)] *= -1.0
    return flipped


def _bipolar_identity(cfg: ExperimentConfig, p: int, level: float, rng: SeededRNG) -> bool:
    bits = rng.signs((p, cfg.N))
    target = rng.integers(p)
    probe_bits = _flip_bits(bits[target], level, rng)

    amplitude_states = [amplitude_encode(RawPattern(row)) for row in bits]
    phase_states = [phase_state(np.where(row > 0, 0.0, math.pi)) for row in bits]
    amplitude_memory = build(amplitude_states)
    phase_memory = build(phase_states)

    amplitude_decision = recognize(amplitude_memory, amplitude_encode(RawPattern(probe_bits)), cfg.min_confidence)
    phase_decision = recognize(phase_memory, phase_state(np.where(probe_bits > 0, 0.0, math.pi)), cfg.min_confidence)

    return (
        to_bytes(amplitude_memory) == to_bytes(phase_memory)
        and type(amplitude_decision) is type(phase_decision)
        and amplitude_decision.report == phase_decision.report
    )


def _general_agreement(cfg: ExperimentConfig, p: int, level: float, rng: SeededRNG) -> tuple:
    values = rng.normal((p, cfg.N))
    target = rng.integers(p)
    probe = RawPattern(values[target] + level * rng.normal(cfg.N))

    amplitude_states = [amplitude_encode(RawPattern(row)) for row in values]
    phase_states = [phase_encode(RawPattern(row)) for row in values]
    amplitude_winner = overlaps(build(amplitude_states), amplitude_encode(probe)).winner
    phase_winner = overlaps(build(phase_states), phase_encode(probe)).winner

    stacked = np.stack([s.amplitudes for s in amplitude_states])
    gram = np.abs(stacked.conj() @ stacked.T)
    np.fill_diagonal(gram, 0.0)

    return amplitude_winner == phase_winner, amplitude_winner == target, phase_winner == target, float(np.max(gram))


def _equivalence_trial(cfg: ExperimentConfig, p_index: int, noise_index: int, trial: int) -> EquivalenceTrial:
    p = cfg.P_values[p_index]
    level = cfg.noise_levels[noise_index]
    rng = SeededRNG(cfg.seed, _trial_stream(cfg, p_index, noise_index, len(cfg.noise_levels), trial))

    identical = _bipolar_identity(cfg, p, level, rng)

    # A single unit has zero spread, so the sigmoid phase model is undefined
    if cfg.N < 2:
        return EquivalenceTrial(p, level, trial, identical, False, False, False, False, 0.0)

    agree, amplitude_correct, phase_correct, max_overlap = _general_agreement(cfg, p, level, rng)
    return EquivalenceTrial(p, level, trial, identical, True, agree, amplitude_correct, phase_correct, max_overlap)


def run_equivalence_check(cfg: ExperimentConfig) -> EquivalenceReport:
    """Compare the amplitude model with the phase model.

    Bipolar corpora (±1) are stored both as amplitudes ±1/√N and as phases
    0/π; memory bytes and recognition decisions must be identical. General
    corpora (standard normal values) go through amplitude encoding and the
    sigmoid phase encoding; the fraction of trials whose winners agree is
    reported. Probes flip (bipolar) or perturb (general) the target, with
    noise levels read as flip fractions and as noise standard deviations.
    """
    tasks = [
        (cfg, p_index, noise_index, trial)
        for p_index in range(len(cfg.P_values))
        for noise_index in range(len(cfg.noise_levels))
        for trial in range(cfg.trials)
    ]
    logger.info(f"Running equivalence check: {len(tasks)} trials, N={cfg.N}")
    report = EquivalenceReport(config=cfg, trials=_map(cfg, _equivalence_trial, tasks))
    if not report.bipolar_passed:
        logger.warning(
            f"Bipolar equivalence failed in {report.bipolar_cases - report.bipolar_identical} of {report.bipolar_cases} trials"
        )
    return report


# ---------------------------------------------------------------------------
# Dense versus lazy timing
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class TimingRow:
    """Median recall times and memory footprint for one (N, P) cell."""

    N: int
    P: int
    trials: int
    median_dense_ns: int
    median_lazy_ns: int
    max_disagreement: float
    dense_numbers: int
    lazy_numbers: int
    dense_bytes: int
    lazy_bytes: int

    def to_dict(self, include_timings: bool = True) -> Dict[str, Any]:
        row = {
            "N": self.N,
            "P": self.P,
            "trials": self.trials,
            "max_disagreement": self.max_disagreement,
            "dense_numbers": self.dense_numbers,
            "lazy_numbers": self.lazy_numbers,
            "dense_bytes": self.dense_bytes,
            "lazy_bytes": self.lazy_bytes,
        }
        if include_timings:
            row.update(median_dense_ns=self.median_dense_ns, median_lazy_ns=self.median_lazy_ns)
        return row


@dataclass
class TimingReport:
    config: ExperimentConfig
    rows: List[TimingRow] = field(default_factory=list)

    def to_dict(self, include_timings: bool = True) -> Dict[str, Any]:
        return {
            "experiment": "timing",
            "config": self.config.model_dump(),
            "rows": [row.to_dict(include_timings) for row in self.rows],
        }

    def data_payload(self) -> Dict[str, Any]:
        return self.to_dict(include_timings=False)

    def to_json(self, include_timings: bool = True) -> str:
        return json.dumps(self.to_dict(include_timings), indent=2)

    def to_csv(self, include_timings: bool = True) -> str:
        dicts = [row.to_dict(include_timings) for row in self.rows]
        columns = list(dicts[0]) if dicts else ["N", "P"]
        return format_csv([columns] + [[d[c] for c in columns] for d in dicts])


def _timing_trial(cfg: ExperimentConfig, n: int, p: int, stream: int) -> tuple:
    rng = SeededRNG(cfg.seed, stream)
    hologram = build(_random_phase_states(rng, n, p))
    probe = phase_state(rng.phases(n))

    outputs = {}
    dense_ns = _elapsed_ns(lambda: outputs.__setitem__("dense", recall_dense(hologram, probe)))
    lazy_ns = _elapsed_ns(lambda: outputs.__setitem__("lazy", recall_lazy(hologram, probe)))

    disagreement = relative_disagreement(outputs["dense"], outputs["lazy"])
    if disagreement > PATH_TOLERANCE:
        raise RecallMismatchError(
            f"dense and lazy recall disagree by {disagreement:.3e} at N={n}, P={p} (stream {stream})"
        )
    footprint = (hologram.matrix.size, hologram.stored.size, hologram.matrix.nbytes, hologram.stored.nbytes)
    return dense_ns, lazy_ns, disagreement, footprint


def run_timing(cfg: ExperimentConfig) -> TimingReport:
    """Median wall time of both recall paths at each (N, P).

    Only the agreement of the two outputs is enforced; timing ratios are data.
    """
    dimensions = cfg.timing_dimensions
    report = TimingReport(config=cfg)
    for n_index, n in enumerate(dimensions):
        for p_index, p in enumerate(cfg.P_values):
            tasks = [
                (cfg, n, p, _trial_stream(cfg, n_index, p_index, len(cfg.P_values), trial))
                for trial in range(cfg.trials)
            ]
            results = _map(cfg, _timing_trial, tasks)
            dense_numbers, lazy_numbers, dense_bytes, lazy_bytes = results[0][3]
            report.rows.append(
                TimingRow(
                    N=n,
                    P=p,
                    trials=cfg.trials,
                    median_dense_ns=int(np.median([r[0] for r in results])),
                    median_lazy_ns=int(np.median([r[1] for r in results])),
                    max_disagreement=max(r[2] for r in results),
                    dense_numbers=int(dense_numbers),
                    lazy_numbers=int(lazy_numbers),
                    dense_bytes=int(dense_bytes),
                    lazy_bytes=int(lazy_bytes),
                )
            )
            logger.info(f"Timed N={n}, P={p} over {cfg.trials} trials")
    return report
