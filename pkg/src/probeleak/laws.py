"""Exact observation laws for hidden gate sequences and finite-shot sampling.

A length-k sequence induces a probability law over the 2^k probe bit-strings
b = (y1, ..., yk). Bit-string indexing is fixed package-wide: y1 is the most
significant bit, so b maps to index sum_t y_t 2^(k-t).

Sampling is reproducible by contract: histograms are drawn with numpy's
PCG64 generator, and the multinomial draw is sequential binomial
conditioning in increasing index order (numpy's Generator.multinomial).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .errors import CapacityError, InputError, InternalConsistencyError
from .qcore import (
    ATOL_ACCUMULATED,
    ATOL_ALGEBRAIC,
    GateLabel,
    I2,
    QubitState,
    joint_step_oracle,
)

DEPTH_CAP = 20  # 2^20 doubles per law; hard stop before memory blowup

INDEX_CONVENTION = "y1-msb"


class StepOrder(Enum):
    """Placement of the depolarizing channel within one timestep."""

    GATE_NOISE_COUPLE_MEASURE = "gncm"
    GATE_COUPLE_MEASURE_NOISE = "gcmn"


DEFAULT_ORDER = StepOrder.GATE_NOISE_COUPLE_MEASURE


@dataclass(frozen=True)
class GateSequence:
    """An ordered word over the gate alphabet, position 1 first."""

    gates: tuple[GateLabel, ...]

    def __post_init__(self):
        gates = tuple(self.gates)
        if len(gates) < 1:
            raise InputError("sequence must contain at least one gate")
        if len(gates) > DEPTH_CAP:
            raise CapacityError(f"depth {len(gates)} exceeds cap {DEPTH_CAP}")
        if not all(isinstance(g, GateLabel) for g in gates):
            raise InputError("sequence entries must be GateLabel values")
        object.__setattr__(self, "gates", gates)

    @property
    def depth(self) -> int:
        return len(self.gates)

    @property
    def indices(self) -> tuple[int, ...]:
        return tuple(g.value for g in self.gates)

    def __str__(self) -> str:
        return ",".join(g.name for g in self.gates)

    @staticmethod
    def from_string(text: str) -> "GateSequence":
        names = [t.strip().upper() for t in text.split(",") if t.strip()]
        try:
            return GateSequence(tuple(GateLabel[n] for n in names))
        except KeyError as exc:
            raise InputError(f"unknown gate label {exc.args[0]!r}; expected G1/G2/G3") from None

    @staticmethod
    def from_indices(indices) -> "GateSequence":
        try:
            return GateSequence(tuple(GateLabel(int(i)) for i in indices))
        except ValueError:
            raise InputError(f"gate indices must be 0, 1, or 2; got {list(indices)}") from None


def seq_to_index(seq: GateSequence) -> int:
    """Rank of a sequence in lexicographic (G1 < G2 < G3) order."""
    idx = 0
    for g in seq.gates:
        idx = idx * 3 + g.value
    return idx


def index_to_seq(index: int, depth: int) -> GateSequence:
    if not 0 <= index < 3**depth:
        raise InputError(f"sequence index {index} out of range for depth {depth}")
    digits = []
    for _ in range(depth):
        digits.append(index % 3)
        index //= 3
    return GateSequence.from_indices(reversed(digits))


@dataclass(frozen=True)
class ObservationLaw:
    """Exact probability vector over 2^depth probe bit-strings."""

    depth: int
    probs: np.ndarray

    def __post_init__(self):
        p = np.ascontiguousarray(self.probs, dtype=float)
        if self.depth < 1 or p.shape != (2**self.depth,):
            raise InputError(f"law length {p.shape} does not match depth {self.depth}")
        if not np.isfinite(p).all() or (p < 0).any():
            raise InputError("law entries must be finite and non-negative")
        if abs(p.sum() - 1.0) >= ATOL_ACCUMULATED:
            raise InputError(f"law sums to {p.sum()!r}, expected 1")
        object.__setattr__(self, "probs", p)

    def to_dict(self) -> dict:
        return {
            "schema_version": 1,
            "kind": "law",
            "depth": self.depth,
            "convention": INDEX_CONVENTION,
            "probs": self.probs.tolist(),
        }

    @staticmethod
    def from_dict(data: dict) -> "ObservationLaw":
        _check_record(data, "law", {"probs"})
        return ObservationLaw(int(data["depth"]), np.asarray(data["probs"], dtype=float))


@dataclass(frozen=True)
class ShotHistogram:
    """Integer counts over 2^depth bit-strings from `shots` repetitions."""

    depth: int
    counts: np.ndarray
    shots: int

    def __post_init__(self):
        c = np.ascontiguousarray(self.counts, dtype=np.int64)
        if self.depth < 1 or c.shape != (2**self.depth,):
            raise InputError(f"histogram length {c.shape} does not match depth {self.depth}")
        if (c < 0).any() or c.sum() != self.shots:
            raise InputError("histogram counts must be non-negative and sum to shots")
        object.__setattr__(self, "counts", c)

    def to_dict(self, seed: int | None = None) -> dict:
        return {
            "schema_version": 1,
            "kind": "histogram",
            "depth": self.depth,
            "convention": INDEX_CONVENTION,
            "counts": self.counts.tolist(),
            "shots": int(self.shots),
            "seed": seed,
        }

    @staticmethod
    def from_dict(data: dict) -> "ShotHistogram":
        _check_record(data, "histogram", {"counts", "shots"})
        return ShotHistogram(
            int(data["depth"]),
            np.asarray(data["counts"], dtype=np.int64),
            int(data["shots"]),
        )


def _check_record(data: dict, kind: str, required: set):
    if not isinstance(data, dict):
        raise InputError(f"{kind} record must be a JSON object")
    missing = ({"depth"} | required) - set(data)
    if missing:
        raise InputError(f"{kind} record missing fields: {sorted(missing)}")
    if data.get("kind", kind) != kind:
        raise InputError(f"expected a {kind} record, got kind={data.get('kind')!r}")
    if data.get("convention", INDEX_CONVENTION) != INDEX_CONVENTION:
        raise InputError(f"unsupported index convention {data.get('convention')!r}")


def _kraus_weights(theta: float) -> tuple[np.ndarray, np.ndarray]:
    """Elementwise weights implementing K_y rho K_y+ for the diagonal pair."""
    c, s = math.cos(theta / 2), math.sin(theta / 2)
    k0 = np.array([1.0, c], dtype=complex)
    k1 = np.array([0.0, -1j * s])
    return np.outer(k0, k0.conj()), np.outer(k1, k1.conj())


def _depolarize_batch(states: np.ndarray, lam: float) -> np.ndarray:
    traces = np.einsum("...ii->...", states).real
    out = (1.0 - lam) * states
    out[..., 0, 0] += 0.5 * lam * traces
    out[..., 1, 1] += 0.5 * lam * traces
    return out


def _finalize_probs(traces: np.ndarray) -> np.ndarray:
    """Clip roundoff negatives and renormalize along the last axis."""
    if traces.min() < -ATOL_ALGEBRAIC:
        raise InternalConsistencyError(
            f"branch probability {traces.min():g} is negative beyond roundoff"
        )
    probs = np.clip(traces, 0.0, None)
    totals = probs.sum(axis=-1, keepdims=True)
    if np.abs(totals - 1.0).max() >= ATOL_ACCUMULATED:
        raise InternalConsistencyError("law does not sum to 1 before normalization")
    return probs / totals


def exact_law(
    seq: GateSequence,
    theta: float,
    lam: float,
    order: StepOrder = DEFAULT_ORDER,
) -> ObservationLaw:
    """Infinite-shot law for one hidden sequence by exact branch-tree evolution.

    Starts the target in |0><0| and, per step, applies the gate, the
    depolarizing channel (per `order`), and both instrument branches. Leaf
    traces are the outcome probabilities; cost is O(k 2^k) small products.
    """
    if not 0.0 <= lam <= 1.0:
        raise InputError(f"depolarizing rate must be in [0, 1], got {lam}")
    if not math.isfinite(theta):
        raise InputError(f"coupling angle must be finite, got {theta}")
    W0, W1 = _kraus_weights(theta)
    gate_mats = {g: g.matrix for g in GateLabel}

    states = np.zeros((1, 2, 2), dtype=complex)
    states[0, 0, 0] = 1.0
    for g in seq.gates:
        U = gate_mats[g]
        states = U @ states @ U.conj().T
        if order is StepOrder.GATE_NOISE_COUPLE_MEASURE:
            states = _depolarize_batch(states, lam)
            states = np.stack((states * W0, states * W1), axis=1).reshape(-1, 2, 2)
        else:
            states = np.stack((states * W0, states * W1), axis=1).reshape(-1, 2, 2)
            states = _depolarize_batch(states, lam)
    traces = np.einsum("bii->b", states).real
    return ObservationLaw(seq.depth, _finalize_probs(traces))


def exact_law_joint(
    seq: GateSequence,
    theta: float,
    lam: float,
    V: np.ndarray | None = None,
    projectors: tuple[np.ndarray, np.ndarray] | None = None,
    probe_state: np.ndarray | None = None,
) -> ObservationLaw:
    """Law computed recursively through the explicit joint-space step oracle.

    Exponentially slower than `exact_law`; exists as an independent
    verification path and to evaluate laws under a conjugated coupling,
    readout, and fresh-probe state.
    """
    probs = np.empty(2**seq.depth)

    def recurse(state: QubitState, step: int, prefix: int):
        if step == seq.depth:
            probs[prefix] = state.trace
            return
        (p0, s0), (p1, s1) = joint_step_oracle(
            state, seq.gates[step], theta, lam,
            V=V, projectors=projectors, probe_state=probe_state,
        )
        del p0, p1  # traces of the sub-normalized states already carry them
        recurse(s0, step + 1, prefix * 2)
        recurse(s1, step + 1, prefix * 2 + 1)

    recurse(QubitState.ket0(), 0, 0)
    return ObservationLaw(seq.depth, _finalize_probs(probs))


def sample_histogram(law: ObservationLaw, shots: int, seed: int) -> ShotHistogram:
    """Draw a multinomial histogram of `shots` outcomes from an exact law.

    Identical (law, shots, seed) give bit-identical counts: the generator is
    PCG64 and the draw is sequential binomial conditioning in index order.
    """
    if shots < 1:
        raise InputError(f"shots must be >= 1, got {shots}")
    if seed < 0:
        raise InputError("seed must be a non-negative integer")
    rng = np.random.default_rng(seed)
    counts = _sample_counts(law.probs, shots, rng)
    return ShotHistogram(law.depth, counts, shots)


def _sample_counts(probs: np.ndarray, shots: int, rng: np.random.Generator) -> np.ndarray:
    return rng.multinomial(shots, probs / probs.sum())


def empirical_dist(hist: ShotHistogram) -> ObservationLaw:
    """Empirical distribution counts/shots."""
    return ObservationLaw(hist.depth, hist.counts / hist.shots)
