import math

import numpy as np
import pytest

from probeleak import (
    GateSequence,
    InputError,
    ObservationLaw,
    blind_spot_scan,
    class_means,
    envelope,
    exact_law,
    gray_reorder,
    js,
    kl,
    pairwise_separation,
    theta_star,
    tv,
    wht,
)
from probeleak.analysis import find_touching_zeros, golden_section_min
from probeleak.errors import CapacityError
from probeleak.qcore import GateLabel

TWO_PI = 2 * math.pi


def law(*probs):
    return ObservationLaw(int(math.log2(len(probs))), np.array(probs, dtype=float))


def random_law(rng, k):
    p = rng.uniform(0.01, 1.0, 2**k)
    return ObservationLaw(k, p / p.sum())


# ----------------------------------------------------------------- metrics

def test_tv_basic():
    assert tv(law(0.5, 0.5), law(0.5, 0.5)) == 0.0
    assert tv(law(1.0, 0.0), law(0.0, 1.0)) == 1.0
    assert abs(tv(law(0.5, 0.5), law(1.0, 0.0)) - 0.5) < 1e-15


def test_kl_basic():
    assert kl(law(0.3, 0.7), law(0.3, 0.7)) == 0.0
    assert abs(kl(law(1.0, 0.0), law(0.5, 0.5)) - math.log(2)) < 1e-15
    assert kl(law(0.5, 0.5), law(1.0, 0.0)) == math.inf


def test_js_basic():
    assert js(law(0.4, 0.6), law(0.4, 0.6)) == 0.0
    assert abs(js(law(1.0, 0.0), law(0.0, 1.0)) - math.log(2)) < 1e-15


def test_metric_depth_mismatch():
    for metric in (tv, kl, js):
        with pytest.raises(InputError):
            metric(law(1.0, 0.0), law(0.25, 0.25, 0.25, 0.25))


def test_metric_axioms_random(rng):
    for _ in range(50):
        k = int(rng.integers(1, 5))
        P, Q = random_law(rng, k), random_law(rng, k)
        assert abs(tv(P, Q) - tv(Q, P)) < 1e-14
        assert 0.0 <= tv(P, Q) <= 1.0
        assert kl(P, Q) >= 0.0
        assert abs(js(P, Q) - js(Q, P)) < 1e-14
        assert 0.0 <= js(P, Q) <= math.log(2) + 1e-14


# ------------------------------------------------------------- class means

def test_class_means_k1_are_the_laws():
    cm = class_means(1, 1, 1.7, 0.1)
    for g in GateLabel:
        ref = exact_law(GateSequence((g,)), 1.7, 0.1)
        assert tv(cm.mean_laws[g], ref) < 1e-14


def test_class_means_decoupled_coincide():
    cm = class_means(1, 3, 0.0, 0.2)
    gs = list(GateLabel)
    for a, b in ((0, 1), (0, 2), (1, 2)):
        assert tv(cm.mean_laws[gs[a]], cm.mean_laws[gs[b]]) < 1e-12


def test_class_means_match_direct_enumeration():
    theta, lam = 1.3, 0.05
    cm = class_means(1, 2, theta, lam)
    for g in GateLabel:
        laws = [exact_law(GateSequence((g, h)), theta, lam).probs for h in GateLabel]
        direct = np.mean(laws, axis=0)
        assert np.abs(cm.mean_laws[g].probs - direct).max() < 1e-14


def test_class_means_position_two():
    theta, lam = 2.1, 0.0
    cm = class_means(2, 2, theta, lam)
    for g in GateLabel:
        laws = [exact_law(GateSequence((h, g)), theta, lam).probs for h in GateLabel]
        assert np.abs(cm.mean_laws[g].probs - np.mean(laws, axis=0)).max() < 1e-14


def test_class_means_monte_carlo_agrees_with_exact():
    theta, lam = 1.1, 0.1
    exact = class_means(2, 4, theta, lam)
    mc = class_means(2, 4, theta, lam, mode="mc", samples=300, seed=11)
    assert mc.samples == 300
    for g in GateLabel:
        gap = np.abs(mc.mean_laws[g].probs - exact.mean_laws[g].probs)
        allowance = 3.0 * mc.std_errors[g] + 1e-9
        assert (gap <= allowance).all()


def test_class_means_validation():
    with pytest.raises(InputError):
        class_means(0, 2, 1.0, 0.0)
    with pytest.raises(InputError):
        class_means(3, 2, 1.0, 0.0)
    with pytest.raises(CapacityError):
        class_means(1, 10, 1.0, 0.0)
    with pytest.raises(InputError):
        class_means(1, 2, 1.0, 0.0, mode="mc", samples=1)


# ---------------------------------------------------- pairwise separation

def test_pairwise_separation_self_is_zero():
    u = GateSequence.from_string("G1,G3")
    assert pairwise_separation(u, u, 1.9, 0.1) == 0.0


def test_pairwise_separation_decoupled():
    u = GateSequence.from_string("G1,G3")
    v = GateSequence.from_string("G2,G2")
    assert pairwise_separation(u, v, 0.0, 0.0) < 1e-12


def test_pairwise_separation_k1_oracle():
    # laws at theta=pi: G3 -> [0, 1], G2 -> [0.5, 0.5]; TV = 0.5
    u = GateSequence.from_string("G3")
    v = GateSequence.from_string("G2")
    got = pairwise_separation(u, v, math.pi, 0.0, metric="tv")
    assert abs(got - 0.5) < 1e-12


def test_pairwise_separation_validation():
    u = GateSequence.from_string("G1")
    v = GateSequence.from_string("G1,G2")
    with pytest.raises(InputError):
        pairwise_separation(u, v, 1.0, 0.0)
    with pytest.raises(InputError):
        pairwise_separation(u, u, 1.0, 0.0, metric="wasserstein")


# ------------------------------------------------------ envelope/predictor

def test_envelope_zeros():
    curve = envelope(3, np.array([0.0, math.pi]))
    assert abs(curve.values[0]) < 1e-15
    assert abs(curve.values[1]) < 1e-15


def test_envelope_value_k2():
    curve = envelope(2, np.array([math.pi / 2]))
    assert abs(curve.values[0] - 0.25) < 1e-12


def test_envelope_argmax_matches_theta_star():
    # restrict to [0, pi]: for even depth the proxy is mirror-symmetric and
    # has an equal maximum at 2pi - theta_star
    grid = np.linspace(0, math.pi, 10001)
    step = grid[1] - grid[0]
    for k in range(1, 16):
        curve = envelope(k, grid)
        peak = grid[int(np.argmax(curve.values))]
        assert abs(peak - theta_star(k)) <= step


def test_envelope_even_depth_mirror_symmetry():
    for k in (2, 10):
        star = theta_star(k)
        curve = envelope(k, np.array([star, TWO_PI - star]))
        assert abs(curve.values[0] - curve.values[1]) < 1e-15


def test_envelope_rejects_bad_depth():
    with pytest.raises(InputError):
        envelope(0, np.array([1.0]))


def test_theta_star_k2_exact():
    assert abs(theta_star(2) - math.pi / 2) < 1e-12


def test_theta_star_k7_independent_form():
    assert abs(theta_star(7) - 2 * math.asin(math.sqrt(2 / 9))) < 1e-9


def test_theta_star_monotone():
    values = [theta_star(k) for k in range(1, 51)]
    assert all(b < a for a, b in zip(values, values[1:]))


def test_theta_star_validation():
    with pytest.raises(InputError):
        theta_star(0)
    with pytest.raises(InputError):
        theta_star(2.5)


# ------------------------------------------------------------ scan engine

def test_golden_section_quadratic():
    assert abs(golden_section_min(lambda x: (x - 1.3) ** 2, 0.0, 3.0, 1e-10) - 1.3) < 1e-9


def test_golden_section_cosine():
    # location accuracy at a smooth minimum is limited to ~sqrt(eps)
    assert abs(golden_section_min(math.cos, 2.0, 4.5, 1e-10) - math.pi) < 1e-6


def test_find_touching_zeros_synthetic():
    # sin^2(3(t - 0.7)) touches zero at 0.7 + m pi/3 without sign changes
    f = lambda t: math.sin(3 * (t - 0.7)) ** 2
    thetas = np.linspace(0.2, 3.0, 1500)
    values = np.array([f(t) for t in thetas])
    roots = find_touching_zeros(f, thetas, values, 1e-3, 1e-10, 1e-8)
    expected = [0.7, 0.7 + math.pi / 3, 0.7 + 2 * math.pi / 3]
    assert len(roots) == len(expected)
    for got, want in zip(roots, expected):
        assert abs(got - want) < 1e-6


def test_find_touching_zeros_ignores_positive_minima():
    f = lambda t: 0.5 + math.sin(3 * t) ** 2
    thetas = np.linspace(0.2, 3.0, 600)
    values = np.array([f(t) for t in thetas])
    assert find_touching_zeros(f, thetas, values, 1e-3, 1e-10, 1e-8) == []


def test_blind_spot_scan_window_validation():
    with pytest.raises(InputError):
        blind_spot_scan((1.0, 1.0), grid_points=16)
    with pytest.raises(InputError):
        blind_spot_scan((0.0, 1.0), grid_points=16)
    with pytest.raises(InputError):
        blind_spot_scan((1.0, TWO_PI), grid_points=16)
    with pytest.raises(InputError):
        blind_spot_scan((1.0, 2.0), grid_points=2)


def test_blind_spot_scan_midrange_separations_stay_large():
    # the depth-2 landscape is bounded below by the first-step marginal
    # separation sin^2(theta/2) (sin^2(pi/4) - sin^2(pi/16)); no minima here
    scan = blind_spot_scan((0.8, 5.2), grid_points=160)
    assert scan.angles == ()
    floor = np.sin(scan.thetas / 2) ** 2 * (
        math.sin(math.pi / 4) ** 2 - math.sin(math.pi / 16) ** 2
    )
    assert (scan.values >= floor - 1e-12).all()
    assert scan.values.min() > 0.1


# ------------------------------------------------------------- transforms

def test_wht_point_mass_gives_ones():
    x = np.zeros(8)
    x[0] = 1.0
    assert np.abs(wht(x) - np.ones(8)).max() == 0.0


def test_wht_two_point():
    assert wht([1, 1]).tolist() == [2, 0]


def test_wht_involution_and_parseval(rng):
    for k in (1, 3, 6):
        x = rng.normal(size=2**k)
        y = wht(x)
        assert np.abs(wht(y) - 2**k * x).max() < 1e-10
        assert abs((y**2).sum() - 2**k * (x**2).sum()) < 1e-10


def test_wht_integer_exact():
    x = np.array([3, -1, 4, 1, -5, 9, 2, 6])
    y = wht(x)
    assert y.dtype == x.dtype
    assert np.abs(wht(y) - 8 * x).max() == 0


def test_wht_rejects_bad_length():
    with pytest.raises(InputError):
        wht([1.0, 2.0, 3.0])


def test_gray_reorder_k2():
    assert gray_reorder([0, 1, 2, 3]).tolist() == [0, 1, 3, 2]


def test_gray_reorder_inverse_restores(rng):
    x = rng.normal(size=16)
    perm = gray_reorder(np.arange(16))
    inverse = np.argsort(perm)
    assert (gray_reorder(x)[inverse] == x).all()


def test_gray_adjacent_sources_differ_by_one_bit():
    for k in range(1, 13):
        perm = gray_reorder(np.arange(2**k))
        diffs = perm[1:] ^ perm[:-1]
        assert all(int(d).bit_count() == 1 for d in diffs)


def test_gray_rejects_bad_length():
    with pytest.raises(InputError):
        gray_reorder([1, 2, 3])
