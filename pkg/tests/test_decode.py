import math

import numpy as np
import pytest

from probeleak import (
    CapacityError,
    GateSequence,
    InputError,
    InternalConsistencyError,
    ObservationLaw,
    ShotHistogram,
    evaluate_accuracy,
    exact_law,
    law_table,
    ml_decode,
    per_position_decode,
    wilson_interval,
)
from probeleak.analysis import ClassMeans
from probeleak.decode import position_mean_matrix
from probeleak.laws import index_to_seq
from probeleak.qcore import GateLabel


def hist(depth, counts):
    counts = np.asarray(counts)
    return ShotHistogram(depth, counts, int(counts.sum()))


# ---------------------------------------------------------------- law table

def test_law_table_k1_matches_examples():
    t = law_table(1, math.pi, 0.0)
    assert np.abs(t.probs[0] - [1 - math.sin(math.pi / 16) ** 2,
                                math.sin(math.pi / 16) ** 2]).max() < 1e-12
    assert np.abs(t.probs[1] - [0.5, 0.5]).max() < 1e-12
    assert np.abs(t.probs[2] - [0.0, 1.0]).max() < 1e-12


def test_law_table_size_and_order():
    t = law_table(3, 1.2, 0.1)
    assert t.probs.shape == (27, 8)
    assert str(t.sequence(0)) == "G1,G1,G1"
    assert str(t.sequence(26)) == "G3,G3,G3"
    assert str(t.sequence(5)) == "G1,G2,G3"


def test_law_table_decoupled_rows_identical():
    t = law_table(2, 0.0, 0.3)
    assert np.abs(t.probs - t.probs[0]).max() < 1e-12


def test_law_table_matches_exact_law(rng):
    for _ in range(3):
        theta = float(rng.uniform(0, 2 * math.pi))
        lam = float(rng.uniform(0, 1))
        t = law_table(3, theta, lam)
        for i in map(int, rng.integers(0, 27, 6)):
            ref = exact_law(t.sequence(i), theta, lam)
            assert np.abs(t.probs[i] - ref.probs).max() < 1e-12


def test_law_table_capacity():
    with pytest.raises(CapacityError):
        law_table(10, 1.0, 0.0)


# ---------------------------------------------------------------- ml_decode

def test_ml_decode_no_information_breaks_ties_lexicographically():
    t = law_table(2, 0.0, 0.0)
    res = ml_decode(hist(2, [64, 0, 0, 0]), t)
    assert str(res.predicted) == "G1,G1"
    assert res.runner_up_margin == 0.0


def test_ml_decode_certain_flip_predicts_g3():
    t = law_table(1, math.pi, 0.0)
    res = ml_decode(hist(1, [0, 64]), t)
    assert str(res.predicted) == "G3"
    assert res.log_likelihood == pytest.approx(64 * math.log(1.0), abs=1e-9)
    # runner-up is G2 with p(1) = 0.5
    assert res.runner_up_margin == pytest.approx(-64 * math.log(0.5), rel=1e-12)


def test_ml_decode_elimination_and_smoothing():
    # at theta=0 every law is exactly the point mass on index 0, so a count
    # on any other outcome eliminates all candidates
    t = law_table(1, 0.0, 0.0)
    with pytest.raises(InternalConsistencyError):
        ml_decode(hist(1, [3, 1]), t)
    res = ml_decode(hist(1, [3, 1]), t, smoothing=1e-12)
    assert str(res.predicted) == "G1"


def test_ml_decode_depth_mismatch():
    t = law_table(2, 1.0, 0.0)
    with pytest.raises(InputError):
        ml_decode(hist(1, [3, 1]), t)


def _brute_force_posterior_argmax(counts, table):
    """Uniform-prior MAP by direct probability products, ties lexicographic."""
    best_idx, best_post = 0, -1.0
    for g in range(len(table)):
        post = 1.0
        for b, c in enumerate(counts):
            post *= table.probs[g, b] ** c
        if post > best_post:
            best_idx, best_post = g, post
    return best_idx


@pytest.mark.parametrize("theta,lam", [(math.pi / 2, 0.1), (0.0, 0.0), (2.8, 0.35)])
def test_ml_decode_matches_posterior_oracle_exhaustive(theta, lam):
    table = law_table(1, theta, lam)
    for n in (1, 2, 3):
        for c1 in range(n + 1):
            counts = [n - c1, c1]
            want = _brute_force_posterior_argmax(counts, table)
            got = ml_decode(hist(1, counts), table)
            assert got.predicted == table.sequence(want)


# ------------------------------------------------------------ per-position

def _means_from_table(table):
    matrix = position_mean_matrix(table)
    return [
        ClassMeans(t + 1, table.depth,
                   {g: ObservationLaw(table.depth, matrix[t, g.value]) for g in GateLabel})
        for t in range(table.depth)
    ]


def test_position_means_rows_are_laws_at_k1():
    t = law_table(1, 2.2, 0.05)
    matrix = position_mean_matrix(t)
    assert np.abs(matrix[0] - t.probs).max() < 1e-15


def test_per_position_matches_ml_at_k1(rng):
    t = law_table(1, 1.9, 0.2)
    means = _means_from_table(t)
    for _ in range(20):
        counts = rng.multinomial(50, t.probs[int(rng.integers(3))])
        h = hist(1, counts)
        assert per_position_decode(h, means) == ml_decode(h, t).predicted


def test_per_position_no_information_all_g1():
    t = law_table(3, 0.0, 0.0)
    got = per_position_decode(hist(3, [9] + [0] * 7), _means_from_table(t))
    assert str(got) == "G1,G1,G1"


def test_per_position_validates_means():
    t = law_table(2, 1.0, 0.0)
    with pytest.raises(InputError):
        per_position_decode(hist(2, [4, 0, 0, 0]), _means_from_table(t)[:1])


# -------------------------------------------------------- evaluate_accuracy

def test_accuracy_deterministic():
    a = evaluate_accuracy(2, 1.8, 0.1, 128, 40, seed=77)
    b = evaluate_accuracy(2, 1.8, 0.1, 128, 40, seed=77)
    assert a == b
    c = evaluate_accuracy(2, 1.8, 0.1, 128, 40, seed=78)
    assert a != c


def test_accuracy_strict_below_positions():
    rep = evaluate_accuracy(3, 1.2, 0.2, 64, 60, seed=3)
    assert rep.strict_accuracy <= min(rep.per_position_accuracy) + 1e-12


def test_accuracy_chance_level_when_decoupled():
    rep = evaluate_accuracy(2, 0.0, 0.0, 256, 150, seed=5)
    lo, hi = wilson_interval(round(rep.strict_accuracy * rep.trials), rep.trials)
    assert lo <= 1 / 9 <= hi


def test_accuracy_easy_case_is_high():
    rep = evaluate_accuracy(1, math.pi, 0.0, 256, 100, seed=6)
    assert rep.strict_accuracy > 0.99


def test_accuracy_perpos_decoder_runs():
    rep = evaluate_accuracy(2, 2.0, 0.05, 256, 40, seed=9, decoder="perpos")
    assert 0.0 <= rep.strict_accuracy <= 1.0


def test_accuracy_validation():
    with pytest.raises(InputError):
        evaluate_accuracy(2, 1.0, 0.0, 64, 0, seed=1)
    with pytest.raises(InputError):
        evaluate_accuracy(2, 1.0, 0.0, 0, 10, seed=1)
    with pytest.raises(InputError):
        evaluate_accuracy(2, 1.0, 0.0, 64, 10, seed=1, decoder="neural")
    table = law_table(2, 1.0, 0.0)
    with pytest.raises(InputError):
        evaluate_accuracy(2, 1.5, 0.0, 64, 10, seed=1, table=table)


def test_accuracy_reuses_supplied_table():
    table = law_table(2, 1.8, 0.1)
    a = evaluate_accuracy(2, 1.8, 0.1, 128, 30, seed=77, table=table)
    b = evaluate_accuracy(2, 1.8, 0.1, 128, 30, seed=77)
    assert a == b


# ------------------------------------------------------------------ wilson

def test_wilson_endpoints_satisfy_score_equation():
    # interval ends are exactly where |phat - p| = z sqrt(p(1-p)/n)
    for successes, trials in ((50, 100), (3, 200), (0, 50), (17, 17)):
        lo, hi = wilson_interval(successes, trials)
        phat = successes / trials
        z = 1.959963984540054
        for p in (lo, hi):
            if 0.0 < p < 1.0:
                assert abs(abs(phat - p) - z * math.sqrt(p * (1 - p) / trials)) < 1e-9
        assert 0.0 <= lo <= phat <= hi <= 1.0


def test_wilson_zero_successes_starts_at_zero():
    lo, hi = wilson_interval(0, 200)
    assert lo == pytest.approx(0.0, abs=1e-12)
    assert hi > 0.0
