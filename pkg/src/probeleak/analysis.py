"""Distinguishability metrics, class means, blind-spot scanning, and the
coupling-band predictor.

Divergences operate on exact observation laws. The blind-spot scanner looks
for couplings where every pair of same-depth sequences induces the same law;
because the scanned objective is a max of total-variation distances it
touches zero rather than crossing it, so candidate minima are refined by
golden-section minimization instead of sign bisection.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .decode import check_table_capacity, law_table
from .errors import InputError
from .laws import DEFAULT_ORDER, GateSequence, ObservationLaw, StepOrder, exact_law
from .qcore import GateLabel
from .seeding import derive_seed

BLIND_SPOT_EPS = 0.05  # scan windows must exclude the trivial decoupling roots

_METRICS = ("tv", "kl", "js")


def _check_pair(P: ObservationLaw, Q: ObservationLaw):
    if P.depth != Q.depth:
        raise InputError(f"law depths differ: {P.depth} vs {Q.depth}")


def tv(P: ObservationLaw, Q: ObservationLaw) -> float:
    """Total variation distance, half the L1 difference."""
    _check_pair(P, Q)
    return 0.5 * float(np.abs(P.probs - Q.probs).sum())


def kl(P: ObservationLaw, Q: ObservationLaw) -> float:
    """Kullback-Leibler divergence; +inf if P has mass where Q has none."""
    _check_pair(P, Q)
    return _kl(P.probs, Q.probs)


def _kl(p: np.ndarray, q: np.ndarray) -> float:
    mass = p > 0
    if (q[mass] == 0).any():
        return math.inf
    pm = p[mass]
    return float(np.sum(pm * np.log(pm / q[mass])))


def js(P: ObservationLaw, Q: ObservationLaw) -> float:
    """Jensen-Shannon divergence (natural log); bounded by log 2."""
    _check_pair(P, Q)
    m = 0.5 * (P.probs + Q.probs)
    return 0.5 * _kl(P.probs, m) + 0.5 * _kl(Q.probs, m)


def pairwise_separation(
    u: GateSequence,
    v: GateSequence,
    theta: float,
    lam: float,
    metric: str = "tv",
    order: StepOrder = DEFAULT_ORDER,
) -> float:
    """Divergence between the exact laws of two equal-depth sequences."""
    if u.depth != v.depth:
        raise InputError(f"sequence depths differ: {u.depth} vs {v.depth}")
    if metric not in _METRICS:
        raise InputError(f"unknown metric {metric!r}; expected one of {_METRICS}")
    P = exact_law(u, theta, lam, order)
    Q = exact_law(v, theta, lam, order)
    return {"tv": tv, "kl": kl, "js": js}[metric](P, Q)


@dataclass(frozen=True)
class ClassMeans:
    """Mean observation laws conditioned on the gate at one position.

    `std_errors` holds per-bin standard errors of the mean and is populated
    only in Monte Carlo mode.
    """

    position: int
    depth: int
    mean_laws: dict[GateLabel, ObservationLaw]
    samples: int | None = None
    std_errors: dict[GateLabel, np.ndarray] | None = None


def class_means(
    position: int,
    depth: int,
    theta: float,
    lam: float,
    mode: str = "exact",
    samples: int = 0,
    seed: int = 0,
    order: StepOrder = DEFAULT_ORDER,
) -> ClassMeans:
    """Class-conditional mean laws for one sequence position.

    Exact mode averages the laws of all 3^(depth-1) completions and is capped
    at 3^depth <= 20000; Monte Carlo mode averages `samples` seeded uniform
    completions per gate and reports standard errors.
    """
    if not 1 <= position <= depth:
        raise InputError(f"position {position} outside 1..{depth}")
    if mode == "exact":
        check_table_capacity(depth)
        table = law_table(depth, theta, lam, order)
        dig = (np.arange(len(table)) // 3 ** (depth - position)) % 3
        means = {
            g: ObservationLaw(depth, table.probs[dig == g.value].mean(axis=0))
            for g in GateLabel
        }
        return ClassMeans(position, depth, means)
    if mode != "mc":
        raise InputError(f"unknown mode {mode!r}; expected 'exact' or 'mc'")
    if samples < 2:
        raise InputError("Monte Carlo mode needs samples >= 2")
    rng = np.random.default_rng(derive_seed(seed, position))
    means, errs = {}, {}
    for g in GateLabel:
        draws = np.empty((samples, 2**depth))
        for i in range(samples):
            gates = rng.integers(0, 3, depth)
            gates[position - 1] = g.value
            draws[i] = exact_law(GateSequence.from_indices(gates), theta, lam, order).probs
        means[g] = ObservationLaw(depth, draws.mean(axis=0) / draws.mean(axis=0).sum())
        errs[g] = draws.std(axis=0, ddof=1) / math.sqrt(samples)
    return ClassMeans(position, depth, means, samples=samples, std_errors=errs)


@dataclass(frozen=True)
class EnvelopeCurve:
    """Pointwise values of the leakage proxy sin^2(t/2) cos^depth(t/2)."""

    depth: int
    thetas: np.ndarray
    values: np.ndarray


def envelope(depth: int, thetas) -> EnvelopeCurve:
    """Evaluate the unnormalized depth-dependent leakage proxy on a grid."""
    if depth < 1:
        raise InputError(f"depth must be >= 1, got {depth}")
    t = np.ascontiguousarray(thetas, dtype=float)
    values = np.sin(t / 2) ** 2 * np.cos(t / 2) ** depth
    return EnvelopeCurve(depth, t, values)


def theta_star(depth: int) -> float:
    """Coupling angle maximizing the leakage proxy: 2 arcsin sqrt(2/(depth+2)).

    Evaluated as 2 atan2(sqrt(2), sqrt(depth)), which is the same angle and
    numerically exact at depth 2 (pi/2). Strictly decreasing in depth.
    """
    if not isinstance(depth, (int, np.integer)) or depth < 1:
        raise InputError(f"depth must be an integer >= 1, got {depth!r}")
    return 2.0 * math.atan2(math.sqrt(2.0), math.sqrt(float(depth)))


_INV_PHI = (math.sqrt(5.0) - 1.0) / 2.0


def golden_section_min(f, a: float, b: float, tol: float) -> float:
    """Locate the minimizer of a unimodal scalar function on [a, b]."""
    if not a < b:
        raise InputError(f"invalid bracket [{a}, {b}]")
    c = b - _INV_PHI * (b - a)
    d = a + _INV_PHI * (b - a)
    fc, fd = f(c), f(d)
    while (b - a) > tol:
        if fc < fd:
            b, d, fd = d, c, fc
            c = b - _INV_PHI * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + _INV_PHI * (b - a)
            fd = f(d)
    return 0.5 * (a + b)


@dataclass(frozen=True)
class BlindSpotScan:
    """Scan trace and the refined angles (if any) where all laws coincide."""

    angles: tuple[float, ...]
    thetas: np.ndarray
    values: np.ndarray  # max pairwise TV at each scanned theta


def max_pairwise_tv(depth: int, theta: float, lam: float, order: StepOrder = DEFAULT_ORDER) -> float:
    """Largest TV distance over all unordered pairs of depth-k sequence laws."""
    probs = law_table(depth, theta, lam, order).probs
    diffs = 0.5 * np.abs(probs[:, None, :] - probs[None, :, :]).sum(axis=2)
    return float(diffs.max())


def find_touching_zeros(
    objective,
    thetas: np.ndarray,
    values: np.ndarray,
    coarse_threshold: float,
    refine_tol: float,
    report_threshold: float,
) -> list[float]:
    """Locate points where a non-negative objective touches zero.

    Grid values below `coarse_threshold` that are interior local minima get
    refined by golden-section minimization on their bracketing interval; a
    refined point is reported only if the objective there falls below
    `report_threshold`. Touching zeros cannot be bisected by sign, hence the
    minimization approach.
    """
    found = []
    for i in range(1, len(thetas) - 1):
        if values[i] >= coarse_threshold:
            continue
        if values[i] <= values[i - 1] and values[i] <= values[i + 1]:
            t0 = golden_section_min(objective, thetas[i - 1], thetas[i + 1], refine_tol)
            if objective(t0) < report_threshold:
                found.append(t0)
    return found


def blind_spot_scan(
    window: tuple[float, float],
    grid_points: int = 4096,
    depth: int = 2,
    lam: float = 0.0,
    coarse_threshold: float = 1e-3,
    refine_tol: float = 1e-8,
    report_threshold: float = 1e-8,
    order: StepOrder = DEFAULT_ORDER,
) -> BlindSpotScan:
    """Scan a coupling window for angles where every sequence pair is blind.

    Evaluates s(theta) = max pairwise TV between all depth-k laws on a grid
    and reports refined touching zeros of s; an angle qualifies only if every
    pairwise separation vanishes there, making sequences indistinguishable at
    any shot count. The full scan trace is kept for export.
    """
    lo, hi = float(window[0]), float(window[1])
    if not lo < hi:
        raise InputError(f"empty scan window ({lo}, {hi})")
    if lo < BLIND_SPOT_EPS - 1e-12 or hi > 2 * math.pi - BLIND_SPOT_EPS + 1e-12:
        raise InputError(
            f"scan window must lie within ({BLIND_SPOT_EPS}, 2pi - {BLIND_SPOT_EPS})"
        )
    if grid_points < 3:
        raise InputError("grid must have at least 3 points")
    check_table_capacity(depth)

    thetas = np.linspace(lo, hi, grid_points)
    values = np.array([max_pairwise_tv(depth, t, lam, order) for t in thetas])
    angles = find_touching_zeros(
        lambda t: max_pairwise_tv(depth, t, lam, order),
        thetas, values, coarse_threshold, refine_tol, report_threshold,
    )
    return BlindSpotScan(tuple(angles), thetas, values)


def wht(x) -> np.ndarray:
    """Unnormalized fast Walsh-Hadamard transform (in the natural ordering).

    Integer-exact on integer input; wht(wht(x)) == len(x) * x.
    """
    out = np.array(x)
    n = out.shape[-1]
    if n < 1 or n & (n - 1):
        raise InputError(f"transform length must be a power of two, got {n}")
    h = 1
    while h < n:
        blocks = out.reshape(-1, n // (2 * h), 2, h)
        a = blocks[..., 0, :] + blocks[..., 1, :]
        b = blocks[..., 0, :] - blocks[..., 1, :]
        out = np.stack((a, b), axis=-2).reshape(out.shape)
        h *= 2
    return out


def gray_permutation(bits: int) -> np.ndarray:
    """Source index for each output slot: position i reads input gray(i)."""
    i = np.arange(1 << bits)
    return i ^ (i >> 1)


def gray_reorder(x) -> np.ndarray:
    """Reorder a length-2^k vector so adjacent slots differ by one source bit."""
    arr = np.asarray(x)
    n = arr.shape[-1]
    if n < 1 or n & (n - 1):
        raise InputError(f"input length must be a power of two, got {n}")
    return arr[..., gray_permutation(n.bit_length() - 1)]
