"""Acceptance suite: one test per criterion, each printing a PASS/FAIL line.

Run with `pytest tests/test_acceptance.py -v -s` to see the per-criterion
lines as they execute. Every tolerance is pinned here, not configurable.
"""

import math

import numpy as np

from rnad import (
    ANOMALY,
    INLINE,
    Dataset,
    auroc,
    bayes_classifier,
    contamination_split,
    empirical_risk_ratio,
    excess_risk_curve,
    gradient_check,
    importance_weighted_balanced_risk,
    init_model,
    kmeans_fit,
    optimal_threshold,
    preset,
    rn_weights,
    score_dataset,
    stratified_balanced_risk,
    unit_weights,
    weighted_bce,
    weighted_bce_grad,
)
from rnad.scores import cblof_score, ecblof_score
from rnad.study import recall_comparison


def _criterion(num, name, ok, detail=""):
    status = "PASS" if ok else "FAIL"
    print(f"criterion {num:02d} [{status}] {name}" + (f" - {detail}" if detail else ""))
    assert ok, f"criterion {num}: {name} ({detail})"


def test_c01_rn_weight_law():
    ok = True
    for a in (0.01, 0.05, 0.1, 0.25, 0.5, 0.9):
        w = rn_weights(a)
        ok = ok and abs(w.w_inline / w.w_anomaly - a / (1 - a)) <= 1e-12 * (a / (1 - a))
    rng = np.random.default_rng(11)
    exact = 0
    for _ in range(1000):
        n = int(rng.integers(1, 30))
        probs = rng.uniform(1e-4, 1 - 1e-4, size=n)
        labels = rng.integers(0, 2, size=n)
        plain = float(np.mean(np.where(labels == INLINE, -np.log(probs),
                                       -np.log1p(-probs))))
        exact += weighted_bce(probs, labels, rn_weights(0.5)) == plain
    ok = ok and exact == 1000
    _criterion(1, "weight ratio law and exact reduction at alpha=0.5", ok,
               f"{exact}/1000 exact reductions")


def test_c02_gradient_fidelity():
    rng = np.random.default_rng(22)
    worst_loss = 0.0
    step = 1e-5
    for _ in range(100):
        n = int(rng.integers(2, 12))
        probs = rng.uniform(0.05, 0.95, size=n)
        labels = rng.integers(0, 2, size=n)
        w = rn_weights(float(rng.uniform(0.02, 0.6)))
        grad = weighted_bce_grad(probs, labels, w)
        for i in range(n):
            up, down = probs.copy(), probs.copy()
            up[i] += step
            down[i] -= step
            fd = (weighted_bce(up, labels, w)
                  - weighted_bce(down, labels, w)) / (2 * step)
            rel = abs(grad[i] - fd) / max(abs(grad[i]) + abs(fd), 1e-6)
            worst_loss = max(worst_loss, rel)
    worst_net = 0.0
    for trial in range(100):
        d = int(rng.integers(1, 5))
        model = init_model(d, seed=int(rng.integers(1 << 30)))
        x = rng.normal(size=(int(rng.integers(2, 10)), d))
        y = rng.integers(0, 2, size=x.shape[0])
        w = rn_weights(float(rng.uniform(0.02, 0.6))) if trial % 2 else unit_weights()
        worst_net = max(worst_net, gradient_check(model, x, y, w))
    ok = worst_loss < 1e-4 and worst_net < 1e-4
    _criterion(2, "gradient fidelity (loss-level and full-network)", ok,
               f"worst rel err: loss {worst_loss:.2e}, net {worst_net:.2e}")


def _brute_cblof(model, x):
    dists = [math.dist(x, c) for c in model.centroids]
    own = int(np.argmin(dists))
    if own in model.large_ids:
        term = dists[own]
    else:
        term = min(dists[j] for j in sorted(model.large_ids))
    return own, float(model.sizes[own]) * term, term


def test_c03_cblof_oracle():
    rng = np.random.default_rng(33)
    checked = 0
    worst = 0.0
    identity_exact = True
    for _ in range(200):
        n = int(rng.integers(8, 201))
        d = int(rng.integers(1, 6))
        m = int(rng.integers(1, 9))
        m = min(m, n)
        x = rng.normal(size=(n, d)) * float(rng.uniform(0.5, 4.0))
        model = kmeans_fit(x, m=m, seed=int(rng.integers(1 << 30)))
        queries = np.vstack([x[rng.integers(0, n, size=5)],
                             rng.normal(size=(5, d)) * 3.0])
        for q in queries:
            own, want_cblof, want_ecblof = _brute_cblof(model, q)
            got_c = cblof_score(model, q)
            got_e = ecblof_score(model, q)
            denom_c = max(abs(want_cblof), 1.0)
            denom_e = max(abs(want_ecblof), 1.0)
            worst = max(worst, abs(got_c - want_cblof) / denom_c,
                        abs(got_e - want_ecblof) / denom_e)
            identity_exact = identity_exact and \
                got_c == model.sizes[own] * got_e
            checked += 1
    ok = worst < 1e-9 and identity_exact and checked >= 2000
    _criterion(3, "cluster scoring matches brute force; size identity exact",
               ok, f"{checked} points, worst rel err {worst:.2e}")


def _mann_whitney(scores, labels):
    anom = scores[labels == ANOMALY]
    inl = scores[labels == INLINE]
    wins = sum(1.0 for a in anom for i in inl if a > i)
    ties = sum(1.0 for a in anom for i in inl if a == i)
    return (wins + 0.5 * ties) / (anom.size * inl.size)


def _exhaustive_threshold(scores, labels):
    from fractions import Fraction
    n_anom = int(np.sum(labels == ANOMALY))
    n_inl = int(np.sum(labels == INLINE))
    best_t, best_j = None, Fraction(-2)
    for t in sorted(set(scores.tolist())):
        pred = scores >= t
        j = (Fraction(int(np.sum(pred[labels == ANOMALY])), n_anom)
             - Fraction(int(np.sum(pred[labels == INLINE])), n_inl))
        if j > best_j:
            best_j, best_t = j, t
    return best_t


def test_c04_auroc_and_threshold_oracles():
    rng = np.random.default_rng(44)
    worst = 0.0
    thresholds_equal = True
    for _ in range(500):
        n = int(rng.integers(4, 50))
        scores = rng.choice(np.linspace(0, 1, 9), size=n)  # tie-bearing
        labels = rng.integers(0, 2, size=n)
        if len(np.unique(labels)) < 2:
            labels[0], labels[1] = INLINE, ANOMALY
        worst = max(worst, abs(auroc(scores, labels)
                               - _mann_whitney(scores, labels)))
        thresholds_equal = thresholds_equal and (
            optimal_threshold(scores, labels)
            == _exhaustive_threshold(scores, labels))
    ok = worst <= 1e-12 and thresholds_equal
    _criterion(4, "AUROC equals rank statistic; threshold equals exhaustive "
               "search", ok, f"worst AUROC gap {worst:.2e}")


def test_c05_importance_weighting_identity():
    spec = preset("gauss-easy", 0.1)

    def always_inline(x):
        return np.full(x.shape[0], INLINE)

    def mid_threshold(x):
        return np.where(x[:, 0] >= 1.0, ANOMALY, INLINE)

    rules = [("always-inline", always_inline),
             ("mid-threshold", mid_threshold),
             ("bayes", bayes_classifier(spec))]
    ok = True
    gaps = []
    for idx, (name, h) in enumerate(rules):
        iw, iw_se = importance_weighted_balanced_risk(spec, h, 100000,
                                                      seed=50 + idx)
        st, st_se = stratified_balanced_risk(spec, h, 100000, seed=60 + idx)
        gap = abs(iw - st)
        bound = 3 * math.sqrt(iw_se ** 2 + st_se ** 2)
        # constant rules have zero stratified variance; keep a tiny floor
        ok = ok and gap <= max(bound, 1e-12)
        gaps.append(f"{name} gap {gap:.4f} (3se {bound:.4f})")
    _criterion(5, "importance-weighted risk equals stratified balanced risk",
               ok, "; ".join(gaps))


def test_c06_risk_ratio_face():
    def always_inline(x):
        return np.full(x.shape[0], INLINE)

    ok = True
    details = []
    for idx, alpha in enumerate((0.05, 0.1, 0.25)):
        spec = preset("gauss-easy", alpha)
        rr = empirical_risk_ratio(spec, always_inline, n_eval=200000,
                                  seed=70 + idx)
        want = 0.5 / alpha
        ok = ok and math.isfinite(rr.ratio) \
            and abs(rr.ratio - want) <= 3 * rr.se_ratio
        details.append(f"a={alpha}: ratio {rr.ratio:.3f} vs {want:.1f}")
    _criterion(6, "balanced/contaminated risk ratio stays at its closed form",
               ok, "; ".join(details))


def test_c07_learnability_decay():
    spec = preset("gauss-easy", 0.02)
    curve = excess_risk_curve(spec, [200, 1000, 5000], seeds_per_point=5,
                              trainer="rn_net_weighted", n_eval=20000, seed=0)
    non_increasing = all(
        curve.mean_excess_risk[i + 1] <= curve.mean_excess_risk[i]
        + math.sqrt(curve.stderr[i] ** 2 + curve.stderr[i + 1] ** 2)
        for i in range(len(curve.sample_sizes) - 1))
    final_small = curve.mean_excess_risk[-1] < 0.02
    ok = non_increasing and final_small
    _criterion(7, "excess balanced risk decays with sample size",
               ok, f"means {[round(v, 4) for v in curve.mean_excess_risk]}")


def test_c08_weighted_loss_recall_benefit():
    spec = preset("gauss-easy", 0.02)
    rc = recall_comparison(spec, n=5000, n_seeds=5, seed=0)
    mean_w = float(np.mean(rc["weighted"]))
    mean_u = float(np.mean(rc["unit"]))
    ok = mean_w >= mean_u
    _criterion(8, "weighted trainer recall >= unit trainer recall",
               ok, f"weighted {mean_w:.4f} vs unit {mean_u:.4f}")


def test_c09_unsupervised_separation():
    rng = np.random.default_rng(104)
    inliers = rng.normal(0, 1, size=(490, 2))
    direction = np.array([1.0, 1.0]) / np.sqrt(2)
    outliers = direction * 12.0 + rng.normal(0, 0.05, size=(10, 2))
    x = np.vstack([inliers, outliers])
    labels = np.array([INLINE] * 490 + [ANOMALY] * 10)
    model = kmeans_fit(x, m=16, seed=4)
    scores = score_dataset(model, "cblof", x)
    area = auroc(scores, labels)
    strict = scores[490:].min() > scores[:490].max()
    ok = area >= 0.95 and strict
    _criterion(9, "far outliers outrank every inline point",
               ok, f"auroc {area:.4f}, margin "
               f"{scores[490:].min() - scores[:490].max():.1f}")


def test_c10_split_exactness():
    rng = np.random.default_rng(10)
    ok = True
    for _ in range(100):
        n_inline = int(rng.integers(1, 400))
        n_anomaly = int(rng.integers(0, 200))
        n = n_inline + n_anomaly
        labels = rng.permutation(np.array([INLINE] * n_inline
                                          + [ANOMALY] * n_anomaly))
        ds = Dataset(features=rng.normal(size=(n, 2)), labels=labels,
                     name="synth")
        seed = int(rng.integers(1 << 30))
        split = contamination_split(ds, seed)
        again = contamination_split(ds, seed)
        tl = ds.labels[split.train]
        ok = ok and (tl == INLINE).sum() == math.floor(0.70 * n_inline)
        ok = ok and (tl == ANOMALY).sum() == math.floor(0.15 * n_anomaly)
        merged = np.sort(np.concatenate([split.train, split.test]))
        ok = ok and np.array_equal(merged, np.arange(n))
        ok = ok and np.array_equal(split.train, again.train)
    _criterion(10, "split emits exact floored counts, partitions, reproduces",
               ok)
