import math

import numpy as np
import pytest

from qsmote.errors import InvalidInputError
from qsmote.metrics import (
    ConfusionMatrix,
    accuracy,
    auc_roc,
    average_ranks,
    confusion,
    f1,
    f1_from_pr,
    format_wilcoxon_report,
    g_mean,
    improvement_pct,
    precision,
    recall,
    wilcoxon_signed_rank,
    zero_division_flags,
)

# the ten paired fold scores exercised throughout (differences all positive,
# with a four-way tie among the smallest |d|)
FOLD_A = np.array([0.782, 0.776, 0.783, 0.792, 0.775, 0.775, 0.793, 0.785, 0.772, 0.782])
FOLD_B = np.array([0.763, 0.763, 0.770, 0.749, 0.751, 0.762, 0.758, 0.771, 0.759, 0.754])


# ------------------------------------------------------------- confusion


def test_confusion_all_correct():
    c = confusion([1, 0, 1, 0], [1, 0, 1, 0])
    assert (c.tp, c.fp, c.tn, c.fn) == (2, 0, 2, 0)


def test_confusion_all_predicted_positive():
    c = confusion([1, 0, 1, 0], [1, 1, 1, 1])
    assert c.tn == 0 and c.fn == 0 and c.fp == 2 and c.tp == 2


def test_confusion_hand_fixture():
    y_true = [1, 1, 1, 1, 0, 0, 0, 0, 0, 0]
    y_pred = [1, 1, 0, 0, 1, 0, 0, 0, 1, 1]
    c = confusion(y_true, y_pred)
    assert (c.tp, c.fn, c.fp, c.tn) == (2, 2, 3, 3)
    assert c.total == 10


def test_confusion_length_mismatch():
    with pytest.raises(InvalidInputError):
        confusion([1, 0], [1])


# ------------------------------------------------------------- metrics


def test_f1_consistency_with_published_rows():
    assert f1_from_pr(0.748, 0.770) == pytest.approx(0.759, abs=0.002)
    assert f1_from_pr(0.737, 0.659) == pytest.approx(0.696, abs=0.002)
    assert f1_from_pr(0.672, 0.705) == pytest.approx(0.688, abs=0.002)
    assert f1_from_pr(1.0, 1.0) == 1.0


def test_f1_matches_harmonic_identity():
    c = ConfusionMatrix(tp=7, fp=3, tn=5, fn=2)
    p, r = precision(c), recall(c)
    assert f1(c) == pytest.approx(2.0 / (1.0 / p + 1.0 / r), abs=1e-12)


def test_g_mean_examples():
    perfect = ConfusionMatrix(tp=5, fp=0, tn=5, fn=0)
    assert g_mean(perfect) == 1.0
    no_spec = ConfusionMatrix(tp=5, fp=5, tn=0, fn=0)
    assert g_mean(no_spec) == 0.0
    # sensitivity 0.9, specificity 0.4
    c = ConfusionMatrix(tp=9, fn=1, tn=4, fp=6)
    assert g_mean(c) == pytest.approx(0.6)


def test_zero_denominator_metrics_report_zero_with_flags():
    c = ConfusionMatrix(tp=0, fp=0, tn=4, fn=2)
    assert precision(c) == 0.0
    assert "precision" in zero_division_flags(c)
    c2 = ConfusionMatrix(tp=0, fp=0, tn=4, fn=0)
    assert recall(c2) == 0.0 and f1(c2) == 0.0
    assert {"precision", "recall", "f1"} <= set(zero_division_flags(c2))
    assert accuracy(ConfusionMatrix(2, 0, 2, 0)) == 1.0


# ------------------------------------------------------------- auc


def auc_pair_counting_oracle(y_true, scores):
    wins = ties = 0
    pos = [s for y, s in zip(y_true, scores) if y == 1]
    neg = [s for y, s in zip(y_true, scores) if y == 0]
    for sp in pos:
        for sn in neg:
            if sp > sn:
                wins += 1
            elif sp == sn:
                ties += 1
    return (wins + 0.5 * ties) / (len(pos) * len(neg))


def test_auc_separated_and_tied():
    assert auc_roc([0, 0, 1, 1], [0.1, 0.2, 0.8, 0.9]) == 1.0
    assert auc_roc([0, 1, 0, 1], [0.5, 0.5, 0.5, 0.5]) == 0.5


def test_auc_matches_pair_counting_oracle():
    gen = np.random.default_rng(12)
    for _ in range(50):
        n = int(gen.integers(4, 30))
        y = gen.integers(0, 2, size=n)
        if y.sum() in (0, n):
            y[0], y[-1] = 0, 1
        scores = np.round(gen.random(n), 2)  # rounding forces ties
        assert auc_roc(y, scores) == pytest.approx(
            auc_pair_counting_oracle(y, scores), abs=1e-12
        )


def test_auc_complement_symmetry_without_ties():
    gen = np.random.default_rng(3)
    y = np.array([0, 1] * 8)
    scores = gen.permutation(len(y)) / len(y)  # all distinct
    assert auc_roc(y, scores) + auc_roc(y, -scores) == pytest.approx(1.0)


def test_auc_single_class_rejected():
    with pytest.raises(InvalidInputError):
        auc_roc([1, 1], [0.5, 0.6])


# ------------------------------------------------------------- improvement


def test_improvement_published_values():
    assert improvement_pct(0.759, 0.677) == pytest.approx(12.11, abs=0.05)
    assert improvement_pct(0.711, 0.572) == pytest.approx(24.30, abs=0.05)
    assert improvement_pct(0.5, 0.5) == 0.0
    assert improvement_pct(0.7, 0.0) is None


# ------------------------------------------------------------- wilcoxon


def recursive_exact_p(ranks, w_obs):
    """Independent recursive enumerator over sign assignments (n <= 12)."""
    n = len(ranks)
    assert n <= 12
    count = 0

    def rec(i, acc):
        nonlocal count
        if i == n:
            if acc <= w_obs + 1e-12:
                count += 1
            return
        rec(i + 1, acc)  # negative sign contributes nothing to W+
        rec(i + 1, acc + ranks[i])

    rec(0, 0.0)
    return min(1.0, 2.0 * count / 2**n)


def test_average_ranks_with_ties():
    ranks = average_ranks(np.array([0.013, 0.013, 0.014, 0.013, 0.013]))
    assert np.allclose(ranks, [2.5, 2.5, 5.0, 2.5, 2.5])


def test_wilcoxon_fold_fixture_reproduces_rank_table():
    res = wilcoxon_signed_rank(FOLD_A, FOLD_B)
    assert res.n_pairs == 10 and res.n_zeros_dropped == 0
    expected_d = [0.019, 0.013, 0.013, 0.043, 0.024, 0.013, 0.035, 0.014, 0.013, 0.028]
    assert np.allclose(res.differences, expected_d, atol=1e-12)
    expected_ranks = [6.0, 2.5, 2.5, 10.0, 7.0, 2.5, 9.0, 5.0, 2.5, 8.0]
    assert np.allclose(res.ranks, expected_ranks)
    assert res.w_plus == 55.0
    assert res.w_minus == 0.0
    assert res.w == 0.0
    assert res.p_exact == pytest.approx(2.0 / 1024.0, abs=0.0)
    assert res.p_exact == pytest.approx(0.001953125, abs=0.0)
    # tie-corrected variance: 10*11*21/24 - (4^3-4)/48 = 95.0
    assert res.z_approx == pytest.approx(27.5 / math.sqrt(95.0), abs=1e-12)
    assert res.effect_size_r == pytest.approx(abs(res.z_approx) / math.sqrt(10), abs=1e-12)


def test_wilcoxon_single_pair():
    res = wilcoxon_signed_rank(np.array([0.5]), np.array([0.0]))
    assert res.w == 0.0
    assert res.p_exact == 1.0


def test_wilcoxon_all_zero_differences_is_undefined():
    res = wilcoxon_signed_rank(np.array([1.0, 2.0]), np.array([1.0, 2.0]))
    assert res.undefined
    assert res.n_zeros_dropped == 2
    assert res.n_pairs == 0


def test_wilcoxon_drops_and_counts_zero_differences():
    a = np.array([1.0, 2.0, 3.0, 4.0])
    b = np.array([1.0, 1.5, 3.0, 3.0])
    res = wilcoxon_signed_rank(a, b)
    assert res.n_zeros_dropped == 2
    assert res.n_pairs == 2
    assert res.w_plus + res.w_minus == pytest.approx(2 * 3 / 2)


def test_wilcoxon_rank_sum_identity_and_swap_symmetry():
    gen = np.random.default_rng(5)
    for _ in range(20):
        n = int(gen.integers(2, 15))
        a = np.round(gen.random(n), 2)
        b = np.round(gen.random(n), 2)
        if np.all(a == b):
            continue
        res = wilcoxon_signed_rank(a, b)
        assert res.w_plus + res.w_minus == pytest.approx(
            res.n_pairs * (res.n_pairs + 1) / 2
        )
        swapped = wilcoxon_signed_rank(b, a)
        assert swapped.w_plus == pytest.approx(res.w_minus)
        assert swapped.w_minus == pytest.approx(res.w_plus)
        if res.p_exact is not None:
            assert swapped.p_exact == pytest.approx(res.p_exact, abs=0.0)


def test_wilcoxon_exact_p_matches_recursive_enumerator():
    gen = np.random.default_rng(8)
    for _ in range(25):
        n = int(gen.integers(1, 13))
        a = np.round(gen.random(n), 1)  # coarse rounding creates ties and zeros
        b = np.round(gen.random(n), 1)
        res = wilcoxon_signed_rank(a, b)
        if res.undefined:
            continue
        oracle = recursive_exact_p(list(res.ranks), res.w)
        assert res.p_exact == pytest.approx(oracle, abs=0.0)


def test_wilcoxon_normal_approx_against_known_formula():
    res = wilcoxon_signed_rank(FOLD_A, FOLD_B)
    sigma = math.sqrt(95.0)
    z = (55.0 - 27.5) / sigma
    assert res.p_approx == pytest.approx(math.erfc(z / math.sqrt(2.0)), abs=1e-15)


def test_wilcoxon_above_cap_skips_exact():
    gen = np.random.default_rng(4)
    a = gen.random(25)
    b = gen.random(25)
    res = wilcoxon_signed_rank(a, b)
    assert res.p_exact is None
    assert np.isfinite(res.z_approx)


def test_wilcoxon_report_renders_three_tables():
    res = wilcoxon_signed_rank(FOLD_A, FOLD_B)
    text = format_wilcoxon_report(res, "method_a", "method_b", FOLD_A, FOLD_B)
    assert "Paired differences" in text
    assert "Ranks of |difference|" in text
    assert "Summary" in text
    assert "w_plus 55" in text
    assert "p_exact_two_sided 0.001953125" in text
