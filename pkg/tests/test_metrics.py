"""ROC staircase, AUROC, threshold automation, and confusion reports."""

import numpy as np
import pytest

from rnad import ANOMALY, INLINE, auroc, optimal_threshold, report, roc_points


def _mann_whitney(scores, labels):
    """Tie-corrected rank statistic, enumerated pairwise."""
    scores = np.asarray(scores, dtype=float)
    labels = np.asarray(labels)
    anom = scores[labels == ANOMALY]
    inl = scores[labels == INLINE]
    wins = sum(1.0 for a in anom for i in inl if a > i)
    ties = sum(1.0 for a in anom for i in inl if a == i)
    return (wins + 0.5 * ties) / (anom.size * inl.size)


def _exhaustive_best_threshold(scores, labels):
    """Brute-force TPR - FPR maximization in exact rational arithmetic;
    ties go to the smallest threshold."""
    from fractions import Fraction

    scores = np.asarray(scores, dtype=float)
    labels = np.asarray(labels)
    n_anom = int(np.sum(labels == ANOMALY))
    n_inl = int(np.sum(labels == INLINE))
    best_t, best_j = None, Fraction(-2)
    for t in sorted(set(scores.tolist())):
        pred = scores >= t
        tp = int(np.sum(pred[labels == ANOMALY]))
        fp = int(np.sum(pred[labels == INLINE]))
        j = Fraction(tp, n_anom) - Fraction(fp, n_inl)
        if j > best_j:
            best_j, best_t = j, t
    return best_t


def _random_instance(rng):
    n = int(rng.integers(4, 50))
    # coarse score grid injects ties
    scores = rng.choice(np.linspace(0, 1, 7), size=n)
    labels = rng.integers(0, 2, size=n)
    if len(np.unique(labels)) < 2:
        labels[0], labels[1] = INLINE, ANOMALY
    return scores, labels


class TestRocPoints:
    def test_perfect_separation_hits_corner(self):
        curve = roc_points([0.9, 0.8, 0.3, 0.2],
                           [ANOMALY, ANOMALY, INLINE, INLINE])
        pts = set(zip(curve.fpr.tolist(), curve.tpr.tolist()))
        assert (0.0, 1.0) in pts

    def test_all_tied_scores(self):
        curve = roc_points([0.4, 0.4, 0.4], [ANOMALY, INLINE, ANOMALY])
        assert curve.fpr.tolist() == [0.0, 1.0]
        assert curve.tpr.tolist() == [0.0, 1.0]

    def test_endpoints_and_sentinel(self):
        curve = roc_points([0.9, 0.3, 0.8, 0.2],
                           [ANOMALY, INLINE, ANOMALY, INLINE])
        assert (curve.fpr[0], curve.tpr[0]) == (0.0, 0.0)
        assert (curve.fpr[-1], curve.tpr[-1]) == (1.0, 1.0)
        assert curve.thresholds[0] == np.inf

    def test_staircase_matches_brute_force(self):
        scores = np.array([0.9, 0.3, 0.8, 0.2])
        labels = np.array([ANOMALY, INLINE, ANOMALY, INLINE])
        curve = roc_points(scores, labels)
        for fpr, tpr, t in zip(curve.fpr[1:], curve.tpr[1:],
                               curve.thresholds[1:]):
            pred = scores >= t
            assert tpr == np.mean(pred[labels == ANOMALY])
            assert fpr == np.mean(pred[labels == INLINE])

    def test_monotone_staircase_random(self):
        rng = np.random.default_rng(0)
        for _ in range(100):
            scores, labels = _random_instance(rng)
            curve = roc_points(scores, labels)
            assert np.all(np.diff(curve.fpr) >= 0)
            assert np.all(np.diff(curve.tpr) >= 0)

    def test_single_class_is_error(self):
        with pytest.raises(ValueError, match="both classes"):
            roc_points([0.1, 0.2], [INLINE, INLINE])


class TestAuroc:
    def test_perfect(self):
        assert auroc([0.9, 0.8, 0.1, 0.2],
                     [ANOMALY, ANOMALY, INLINE, INLINE]) == 1.0

    def test_all_ties_half(self):
        assert auroc([0.5, 0.5, 0.5, 0.5],
                     [ANOMALY, INLINE, ANOMALY, INLINE]) == 0.5

    def test_hand_enumerated_pairs(self):
        got = auroc([0.9, 0.2, 0.8, 0.1], [ANOMALY, ANOMALY, INLINE, INLINE])
        assert got == 0.75

    def test_equals_mann_whitney_on_random_instances(self):
        rng = np.random.default_rng(1)
        for _ in range(500):
            scores, labels = _random_instance(rng)
            np.testing.assert_allclose(auroc(scores, labels),
                                       _mann_whitney(scores, labels),
                                       rtol=0, atol=1e-12)


class TestOptimalThreshold:
    def test_separable_example(self):
        got = optimal_threshold([0.1, 0.2, 0.8, 0.9],
                                [INLINE, INLINE, ANOMALY, ANOMALY])
        assert got == 0.8

    def test_perfect_separation_perfect_report(self):
        scores = [0.7, 0.9, 0.1, 0.3]
        labels = [ANOMALY, ANOMALY, INLINE, INLINE]
        t = optimal_threshold(scores, labels)
        rep = report(scores, labels, t)
        assert rep.precision == 1.0 and rep.recall == 1.0

    def test_all_equal_returns_single_candidate(self):
        assert optimal_threshold([0.4, 0.4, 0.4],
                                 [ANOMALY, INLINE, ANOMALY]) == 0.4

    def test_equals_exhaustive_search(self):
        rng = np.random.default_rng(2)
        for _ in range(500):
            scores, labels = _random_instance(rng)
            assert optimal_threshold(scores, labels) == \
                _exhaustive_best_threshold(scores, labels)

    def test_candidate_range_clips_probability_scores(self):
        scores = np.array([1e-6, 0.4, 0.6, 1 - 1e-6])
        labels = np.array([INLINE, INLINE, ANOMALY, ANOMALY])
        t = optimal_threshold(scores, labels, candidate_range=(0.001, 0.999))
        assert 0.001 <= t <= 0.999

    def test_monotone_transform_invariance(self):
        rng = np.random.default_rng(3)
        for _ in range(50):
            scores, labels = _random_instance(rng)
            scores = scores + rng.normal(0, 1e-3, size=scores.size)
            transformed = np.exp(3.0 * scores) + 1.0
            np.testing.assert_allclose(auroc(scores, labels),
                                       auroc(transformed, labels), atol=1e-12)
            t1 = optimal_threshold(scores, labels)
            t2 = optimal_threshold(transformed, labels)
            np.testing.assert_array_equal(scores >= t1, transformed >= t2)


class TestReport:
    def test_perfect_classifier(self):
        rep = report([0.9, 0.1], [ANOMALY, INLINE], 0.5)
        assert (rep.precision, rep.recall, rep.f1, rep.balanced_risk) == \
            (1.0, 1.0, 1.0, 0.0)

    def test_predict_all_inline(self):
        rep = report([0.3, 0.2, 0.4], [ANOMALY, INLINE, INLINE], 0.9)
        assert rep.recall == 0.0
        assert rep.balanced_risk == 0.5

    def test_balanced_confusion(self):
        rep = report([0.9, 0.9, 0.1, 0.1],
                     [ANOMALY, INLINE, ANOMALY, INLINE], 0.5)
        assert (rep.tp, rep.fp, rep.fn, rep.tn) == (1, 1, 1, 1)
        assert (rep.precision, rep.recall, rep.f1, rep.balanced_risk) == \
            (0.5, 0.5, 0.5, 0.5)

    def test_counts_sum_to_n(self):
        rng = np.random.default_rng(4)
        for _ in range(50):
            scores, labels = _random_instance(rng)
            rep = report(scores, labels, float(rng.uniform(0, 1)))
            assert rep.tp + rep.fp + rep.tn + rep.fn == scores.size

    def test_constant_classifiers_risk_half(self):
        labels = [ANOMALY, INLINE, ANOMALY, INLINE]
        scores = [0.2, 0.8, 0.5, 0.6]
        assert report(scores, labels, np.inf).balanced_risk == 0.5
        assert report(scores, labels, -np.inf).balanced_risk == 0.5

    def test_single_class_omits_auroc(self):
        rep = report([0.2, 0.6], [INLINE, INLINE], 0.5)
        assert rep.auroc is None
        assert "auroc" not in rep.to_dict()

    def test_degenerate_denominators_zero(self):
        rep = report([0.1, 0.2], [INLINE, INLINE], 0.9)
        assert rep.precision == 0.0 and rep.recall == 0.0 and rep.f1 == 0.0
