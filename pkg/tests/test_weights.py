"""Contamination estimation, the class-weight pair, the analytic density
ratio, and the weighted cross-entropy with its gradient."""

import math

import numpy as np
import pytest

from rnad import (
    ANOMALY,
    INLINE,
    RNDerivativeSpec,
    estimate_contamination,
    preset,
    rn_derivative,
    rn_weights,
    rn_weights_unnormalized,
    unit_weights,
    weighted_bce,
    weighted_bce_grad,
)
from rnad.weights import DensityRatioError


class TestEstimateContamination:
    def test_direct_count(self):
        labels = [INLINE, INLINE, INLINE, ANOMALY]
        assert estimate_contamination(labels) == 0.25

    def test_clamp_floor(self):
        assert estimate_contamination([INLINE] * 10) == 1e-6

    def test_clamp_ceiling(self):
        assert estimate_contamination([ANOMALY] * 10) == 1 - 1e-6

    def test_empty_rejected(self):
        with pytest.raises(ValueError, match="empty"):
            estimate_contamination([])


class TestClassWeights:
    def test_quarter(self):
        w = rn_weights(0.25)
        assert w.w_anomaly == 1.0
        np.testing.assert_allclose(w.w_inline, 1.0 / 3.0, rtol=1e-15)

    def test_half_is_unweighted(self):
        w = rn_weights(0.5)
        assert (w.w_inline, w.w_anomaly) == (1.0, 1.0)

    def test_tenth(self):
        w = rn_weights(0.1)
        np.testing.assert_allclose(w.w_inline, 1.0 / 9.0, rtol=1e-15)

    def test_ratio_law_on_grid(self):
        for a in (0.01, 0.05, 0.1, 0.25, 0.5, 0.9):
            for w in (rn_weights(a), rn_weights_unnormalized(a)):
                np.testing.assert_allclose(w.w_inline / w.w_anomaly,
                                           a / (1 - a), rtol=1e-12)

    def test_unnormalized_values(self):
        w = rn_weights_unnormalized(0.2)
        np.testing.assert_allclose(w.w_inline, 0.5 / 0.8, rtol=1e-15)
        np.testing.assert_allclose(w.w_anomaly, 0.5 / 0.2, rtol=1e-15)

    def test_bounds_enforced(self):
        for bad in (0.0, 1.0, -0.2, 1.7):
            with pytest.raises(ValueError):
                rn_weights(bad)


def _gauss_pdf(x, mean):
    return np.exp(-0.5 * (x - mean) ** 2) / math.sqrt(2 * math.pi)


def _two_gauss_spec(alpha):
    """Unit-variance components at -2 (inline) and +2 (anomaly) over the
    labeled joint: each component lives on its own label."""

    def p_inline(x, y):
        base = _gauss_pdf(x[:, 0], -2.0)
        return base if y == INLINE else np.zeros_like(base)

    def p_anomaly(x, y):
        base = _gauss_pdf(x[:, 0], 2.0)
        return base if y == ANOMALY else np.zeros_like(base)

    return RNDerivativeSpec(contamination=alpha, p_inline=p_inline,
                            p_anomaly=p_anomaly)


class TestDensityRatio:
    def test_equal_densities_give_one(self):
        spec = RNDerivativeSpec(
            contamination=0.3,
            p_inline=lambda x, y: np.full(x.shape[0], 0.7),
            p_anomaly=lambda x, y: np.full(x.shape[0], 0.7))
        assert rn_derivative(spec, np.array([1.0, 2.0]), INLINE) == 1.0

    def test_single_live_density_matches_class_weight(self):
        spec = _two_gauss_spec(0.2)
        # on the inline label only the inline density is live: 0.5/(1-a)
        got = rn_derivative(spec, np.array([0.3]), INLINE)
        np.testing.assert_allclose(got, 0.625, rtol=1e-12)

    def test_gaussian_oracle_at_point(self):
        # independent evaluation of the ratio formula with closed-form pdfs
        spec = _two_gauss_spec(0.1)
        x = np.array([[0.7]])
        for y in (INLINE, ANOMALY):
            pi = _gauss_pdf(x[:, 0], -2.0) if y == INLINE else np.zeros(1)
            pa = _gauss_pdf(x[:, 0], 2.0) if y == ANOMALY else np.zeros(1)
            want = (0.5 * pi + 0.5 * pa) / (0.9 * pi + 0.1 * pa)
            np.testing.assert_allclose(rn_derivative(spec, x, y), want,
                                       rtol=1e-12)

    def test_mixture_form_oracle_unlabeled(self):
        # x-only densities (unsupervised style): ratio computed both ways
        alpha = 0.1
        spec = RNDerivativeSpec(
            contamination=alpha,
            p_inline=lambda x, y: _gauss_pdf(x[:, 0], -2.0),
            p_anomaly=lambda x, y: _gauss_pdf(x[:, 0], 2.0))
        x = np.array([[0.0]])
        pi, pa = _gauss_pdf(0.0, -2.0), _gauss_pdf(0.0, 2.0)
        want = (0.5 * pi + 0.5 * pa) / ((1 - alpha) * pi + alpha * pa)
        np.testing.assert_allclose(rn_derivative(spec, x, INLINE), want,
                                   rtol=1e-12)
        np.testing.assert_allclose(want, 1.0, rtol=1e-12)  # symmetric point

    def test_zero_denominator_reported(self):
        spec = RNDerivativeSpec(
            contamination=0.5,
            p_inline=lambda x, y: np.zeros(x.shape[0]),
            p_anomaly=lambda x, y: np.zeros(x.shape[0]))
        with pytest.raises(DensityRatioError, match="denominator"):
            rn_derivative(spec, np.array([0.0]), INLINE)

    def test_bounded_on_compact_grid(self):
        # empirical face of the boundedness assumption: finite and positive
        # wherever both densities are appreciable; min/max is the bound proxy
        spec = preset("gauss-easy", 0.1).derivative_spec()
        grid = np.linspace(-6, 6, 241)[:, None]
        values = []
        for y in (INLINE, ANOMALY):
            vals = rn_derivative(spec, grid, y)
            live = vals[np.isfinite(vals)]
            values.append(live)
        allv = np.concatenate(values)
        assert np.all(allv > 0)
        assert np.all(np.isfinite(allv))
        lo, hi = allv.min(), allv.max()
        assert 0 < lo <= hi < math.inf
        print(f"density-ratio range on grid: [{lo:.6f}, {hi:.6f}]")


class TestWeightedBce:
    def test_single_inline_at_half(self):
        got = weighted_bce([0.5], [INLINE], unit_weights())
        np.testing.assert_allclose(got, math.log(2), rtol=1e-12)

    def test_mixed_weighted_value(self):
        got = weighted_bce([0.5, 0.5], [INLINE, ANOMALY], rn_weights(0.25))
        want = 0.5 * (1.0 / 3.0 + 1.0) * math.log(2)
        np.testing.assert_allclose(got, want, rtol=1e-12)
        np.testing.assert_allclose(got, 0.462098, rtol=1e-5)

    def test_unit_weights_reduce_to_plain_bce_exactly(self):
        rng = np.random.default_rng(0)
        for _ in range(200):
            n = int(rng.integers(1, 40))
            probs = rng.uniform(1e-4, 1 - 1e-4, size=n)
            labels = rng.integers(0, 2, size=n)
            plain = float(np.mean(np.where(labels == INLINE, -np.log(probs),
                                           -np.log1p(-probs))))
            assert weighted_bce(probs, labels, unit_weights()) == plain

    def test_homogeneity_in_weights(self):
        from rnad.weights import RNWeights
        rng = np.random.default_rng(1)
        probs = rng.uniform(0.01, 0.99, size=25)
        labels = rng.integers(0, 2, size=25)
        base = RNWeights(w_inline=0.4, w_anomaly=1.3, contamination=0.3)
        for c in (2.0, 7.5, 0.25):
            scaled = RNWeights(w_inline=c * 0.4, w_anomaly=c * 1.3,
                               contamination=0.3)
            np.testing.assert_allclose(
                weighted_bce(probs, labels, scaled),
                c * weighted_bce(probs, labels, base), rtol=1e-12)
            np.testing.assert_allclose(
                weighted_bce_grad(probs, labels, scaled),
                c * weighted_bce_grad(probs, labels, base), rtol=1e-12)

    def test_clipping_keeps_loss_finite(self):
        val = weighted_bce([1e-12, 1.0 - 1e-12], [INLINE, ANOMALY],
                           unit_weights())
        assert math.isfinite(val)

    def test_length_mismatch(self):
        with pytest.raises(ValueError, match="mismatch"):
            weighted_bce([0.5, 0.5], [INLINE], unit_weights())

    def test_empty(self):
        with pytest.raises(ValueError, match="empty"):
            weighted_bce([], [], unit_weights())


class TestWeightedBceGrad:
    def test_inline_at_half(self):
        got = weighted_bce_grad([0.5], [INLINE], unit_weights())
        np.testing.assert_allclose(got, [-2.0], rtol=1e-12)

    def test_anomaly_at_half(self):
        got = weighted_bce_grad([0.5], [ANOMALY], unit_weights())
        np.testing.assert_allclose(got, [2.0], rtol=1e-12)

    def test_matches_finite_differences(self):
        rng = np.random.default_rng(7)
        step = 1e-5
        for trial in range(100):
            n = int(rng.integers(1, 11))
            probs = rng.uniform(0.05, 0.95, size=n)
            labels = rng.integers(0, 2, size=n)
            w = rn_weights(float(rng.uniform(0.02, 0.6)))
            grad = weighted_bce_grad(probs, labels, w)
            for i in range(n):
                up = probs.copy()
                up[i] += step
                down = probs.copy()
                down[i] -= step
                fd = (weighted_bce(up, labels, w)
                      - weighted_bce(down, labels, w)) / (2 * step)
                np.testing.assert_allclose(grad[i], fd, rtol=1e-6)

    def test_zero_outside_clip_window(self):
        grad = weighted_bce_grad([1e-9, 1 - 1e-9], [INLINE, ANOMALY],
                                 unit_weights())
        np.testing.assert_array_equal(grad, [0.0, 0.0])
