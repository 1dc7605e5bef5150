"""Exact maximum-likelihood sequence decoding from finite-shot histograms.

The decoder enumerates the full table of exact laws (feasible for
3^k <= 20000, i.e. depth <= 9), scores each candidate sequence by
sum_b C(b) log P_g(b), and breaks ties lexicographically. A sequence whose
law assigns zero probability to an observed outcome is eliminated outright;
exact laws are exact, so such outcomes are genuinely excluding.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import TYPE_CHECKING, Sequence

import numpy as np

from .errors import CapacityError, InputError, InternalConsistencyError
from .laws import (
    DEFAULT_ORDER,
    GateSequence,
    ObservationLaw,
    ShotHistogram,
    StepOrder,
    _finalize_probs,
    _kraus_weights,
    _depolarize_batch,
    _sample_counts,
    index_to_seq,
)
from .qcore import GateLabel
from .seeding import derive_seed

if TYPE_CHECKING:  # pragma: no cover
    from .analysis import ClassMeans

TABLE_CAP = 20000  # max number of enumerated sequences (3^9 = 19683)

WILSON_Z = 1.959963984540054  # 97.5% normal quantile, for 95% intervals


@dataclass(frozen=True)
class LawTable:
    """Exact laws for every depth-k sequence, in lexicographic order."""

    depth: int
    theta: float
    lam: float
    order: StepOrder
    probs: np.ndarray  # (3^depth, 2^depth)

    def __len__(self) -> int:
        return self.probs.shape[0]

    def sequence(self, index: int) -> GateSequence:
        return index_to_seq(index, self.depth)

    def law(self, index: int) -> ObservationLaw:
        return ObservationLaw(self.depth, self.probs[index])


@dataclass(frozen=True)
class DecodeResult:
    predicted: GateSequence
    log_likelihood: float
    runner_up_margin: float

    def to_dict(self) -> dict:
        # infinite margins (all competitors eliminated) serialize as null
        margin = self.runner_up_margin if math.isfinite(self.runner_up_margin) else None
        return {
            "sequence": str(self.predicted),
            "log_likelihood": self.log_likelihood,
            "runner_up_margin": margin,
        }


@dataclass(frozen=True)
class AccuracyReport:
    strict_accuracy: float
    per_position_accuracy: tuple[float, ...]
    trials: int
    wilson_halfwidth: float

    def to_dict(self) -> dict:
        return {
            "strict_accuracy": self.strict_accuracy,
            "per_position_accuracy": list(self.per_position_accuracy),
            "trials": self.trials,
            "wilson_halfwidth": self.wilson_halfwidth,
        }


def check_table_capacity(depth: int):
    if 3**depth > TABLE_CAP:
        raise CapacityError(
            f"3^{depth} sequences exceed the exact-decoding cap of {TABLE_CAP}"
        )


def law_table(
    depth: int,
    theta: float,
    lam: float,
    order: StepOrder = DEFAULT_ORDER,
) -> LawTable:
    """Exact laws for all 3^depth sequences, vectorized over the sequence axis."""
    if depth < 1:
        raise InputError(f"depth must be >= 1, got {depth}")
    check_table_capacity(depth)
    if not 0.0 <= lam <= 1.0:
        raise InputError(f"depolarizing rate must be in [0, 1], got {lam}")
    if not math.isfinite(theta):
        raise InputError(f"coupling angle must be finite, got {theta}")

    n_seq = 3**depth
    W0, W1 = _kraus_weights(theta)
    gate_stack = np.stack([g.matrix for g in GateLabel])
    indices = np.arange(n_seq)
    # digits[t, s]: gate at position t+1 of sequence s (lexicographic rank s)
    digits = np.stack([(indices // 3 ** (depth - 1 - t)) % 3 for t in range(depth)])

    out = np.empty((n_seq, 2**depth))
    chunk = max(1, (1 << 21) // (1 << depth))  # keep branch states ~ tens of MB
    for lo in range(0, n_seq, chunk):
        hi = min(lo + chunk, n_seq)
        states = np.zeros((hi - lo, 1, 2, 2), dtype=complex)
        states[:, 0, 0, 0] = 1.0
        for t in range(depth):
            U = gate_stack[digits[t, lo:hi]][:, None]
            states = U @ states @ U.conj().transpose(0, 1, 3, 2)
            if order is StepOrder.GATE_NOISE_COUPLE_MEASURE:
                states = _depolarize_batch(states, lam)
                states = _branch(states, W0, W1)
            else:
                states = _branch(states, W0, W1)
                states = _depolarize_batch(states, lam)
        out[lo:hi] = np.einsum("sbii->sb", states).real
    return LawTable(depth, theta, lam, order, _finalize_probs(out))


def _branch(states: np.ndarray, W0: np.ndarray, W1: np.ndarray) -> np.ndarray:
    s, b = states.shape[:2]
    return np.stack((states * W0, states * W1), axis=2).reshape(s, 2 * b, 2, 2)


def _log_scores(counts: np.ndarray, probs: np.ndarray, smoothing: float) -> np.ndarray:
    """Score candidates by sum_b C(b) log P(b); -inf for eliminated candidates."""
    if smoothing > 0.0:
        return np.log(probs + smoothing) @ counts
    support = probs > 0.0
    logp = np.where(support, np.log(np.where(support, probs, 1.0)), 0.0)
    scores = logp @ counts
    eliminated = (~support[:, counts > 0]).any(axis=1)
    scores[eliminated] = -np.inf
    return scores


def _argmax_with_margin(scores: np.ndarray) -> tuple[int, float, float]:
    best = int(np.argmax(scores))  # first occurrence = lexicographic winner
    top = scores[best]
    if np.isneginf(top):
        raise InternalConsistencyError("every candidate sequence was eliminated")
    rest = np.delete(scores, best)
    second = rest.max() if rest.size else -np.inf
    margin = math.inf if np.isneginf(second) else float(top - second)
    return best, float(top), margin


def ml_decode(hist: ShotHistogram, table: LawTable, smoothing: float = 0.0) -> DecodeResult:
    """Maximum-likelihood sequence decoding against a full law table.

    With the default uniform prior over sequences this is also the MAP
    decision. `smoothing` > 0 adds pseudo-mass to every outcome instead of
    eliminating zero-probability candidates (robustness experiments only).
    """
    if hist.depth != table.depth:
        raise InputError(
            f"histogram depth {hist.depth} does not match table depth {table.depth}"
        )
    counts = hist.counts.astype(float)
    scores = _log_scores(counts, table.probs, smoothing)
    best, top, margin = _argmax_with_margin(scores)
    return DecodeResult(table.sequence(best), top, margin)


def position_mean_matrix(table: LawTable) -> np.ndarray:
    """Class-conditional mean laws: out[t, a] averages laws with gate a at t+1."""
    k = table.depth
    indices = np.arange(len(table))
    out = np.empty((k, 3, table.probs.shape[1]))
    for t in range(k):
        dig = (indices // 3 ** (k - 1 - t)) % 3
        for a in range(3):
            out[t, a] = table.probs[dig == a].mean(axis=0)
    return out


def _decode_positions(counts: np.ndarray, mean_matrix: np.ndarray) -> np.ndarray:
    preds = np.empty(mean_matrix.shape[0], dtype=np.int64)
    for t in range(mean_matrix.shape[0]):
        scores = _log_scores(counts, mean_matrix[t], 0.0)
        if np.isneginf(scores).all():
            raise InternalConsistencyError("every gate class was eliminated")
        preds[t] = int(np.argmax(scores))
    return preds


def per_position_decode(hist: ShotHistogram, means: Sequence["ClassMeans"]) -> GateSequence:
    """Decode each position independently against its class-conditional means."""
    k = hist.depth
    if len(means) != k:
        raise InputError(f"expected {k} per-position means, got {len(means)}")
    matrix = np.empty((k, 3, 2**k))
    for cm in means:
        if cm.depth != k:
            raise InputError("class-mean depth does not match histogram depth")
        matrix[cm.position - 1] = [cm.mean_laws[a].probs for a in GateLabel]
    preds = _decode_positions(hist.counts.astype(float), matrix)
    return GateSequence.from_indices(preds)


def wilson_interval(successes: int, trials: int, z: float = WILSON_Z) -> tuple[float, float]:
    """95% Wilson score interval for a binomial proportion."""
    if trials < 1:
        raise InputError("trials must be >= 1")
    phat = successes / trials
    denom = 1.0 + z * z / trials
    center = (phat + z * z / (2 * trials)) / denom
    hw = z * math.sqrt(phat * (1 - phat) / trials + z * z / (4 * trials * trials)) / denom
    return center - hw, center + hw


def evaluate_accuracy(
    depth: int,
    theta: float,
    lam: float,
    shots: int,
    trials: int,
    seed: int,
    decoder: str = "ml",
    order: StepOrder = DEFAULT_ORDER,
    table: LawTable | None = None,
) -> AccuracyReport:
    """Strict and per-position accuracy over seeded random hidden sequences.

    Each trial draws a uniform hidden sequence, samples `shots` outcomes from
    its exact law, and decodes. Trial i uses the derived seed
    derive_seed(seed, i), so reports are bit-identical for identical inputs
    and trials can be distributed without changing results.
    """
    if trials < 1:
        raise InputError(f"trials must be >= 1, got {trials}")
    if shots < 1:
        raise InputError(f"shots must be >= 1, got {shots}")
    if decoder not in ("ml", "perpos"):
        raise InputError(f"unknown decoder {decoder!r}; expected 'ml' or 'perpos'")
    if table is None:
        table = law_table(depth, theta, lam, order)
    elif (table.depth, table.theta, table.lam, table.order) != (depth, theta, lam, order):
        raise InputError("supplied law table does not match the requested cell")

    mean_matrix = position_mean_matrix(table) if decoder == "perpos" else None
    support = table.probs > 0.0
    logp = np.where(support, np.log(np.where(support, table.probs, 1.0)), 0.0)

    powers = 3 ** np.arange(depth - 1, -1, -1)
    strict = 0
    position_hits = np.zeros(depth, dtype=np.int64)
    for i in range(trials):
        rng = np.random.default_rng(derive_seed(seed, i))
        hidden = rng.integers(0, 3, depth)
        hidx = int(hidden @ powers)
        counts = _sample_counts(table.probs[hidx], shots, rng).astype(float)
        if decoder == "ml":
            scores = logp @ counts
            scores[(~support[:, counts > 0]).any(axis=1)] = -np.inf
            best, _, _ = _argmax_with_margin(scores)
            pred = np.asarray(index_to_seq(best, depth).indices)
        else:
            pred = _decode_positions(counts, mean_matrix)
        hits = pred == hidden
        position_hits += hits
        strict += bool(hits.all())

    lo, hi = wilson_interval(strict, trials)
    return AccuracyReport(
        strict_accuracy=strict / trials,
        per_position_accuracy=tuple(float(h) / trials for h in position_hits),
        trials=trials,
        wilson_halfwidth=0.5 * (hi - lo),
    )
