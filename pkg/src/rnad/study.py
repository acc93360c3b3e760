"""Empirical learnability study on synthetic contaminated mixtures.

Training samples come from the contaminated mixture while risk is always
evaluated under the balanced 50/50 mixture (0.5 * FNR + 0.5 * FPR). The
module measures: the ratio between balanced and contaminated risk of a fixed
classifier (checking that it stays pinned near its closed form), the
importance-weighted balanced-risk estimator driven by the analytic density
ratio (which must agree with direct stratified measurement), and the decay of
excess balanced risk as the training sample grows.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, replace

import numpy as np

from .data import ANOMALY, INLINE, contamination_split
from .metrics import PROB_THRESHOLD_RANGE, optimal_threshold, report
from .mixtures import MixtureSpec, bayes_balanced_risk, sample_component, sample_mixture
from .neural import TrainConfig, predict_scores, train
from .weights import estimate_contamination, rn_derivative, rn_weights, unit_weights

TRAINERS = ("rn_net_weighted", "rn_net_unweighted")


@dataclass(frozen=True)
class RiskRatioResult:
    """Balanced vs contaminated empirical risks of one fixed classifier."""

    r_alpha: float
    r_half: float
    ratio: float
    se_alpha: float
    se_half: float
    se_ratio: float


@dataclass(frozen=True)
class RiskCurve:
    """Mean excess balanced risk (with standard errors) per training size."""

    sample_sizes: tuple[int, ...]
    mean_excess_risk: tuple[float, ...]
    stderr: tuple[float, ...]
    seeds_per_point: int
    reference_risk: float
    cells: tuple[dict, ...]

    def to_csv(self, path) -> None:
        with open(path, "w") as fh:
            fh.write("n,mean_excess,stderr\n")
            for n, m, s in zip(self.sample_sizes, self.mean_excess_risk,
                               self.stderr):
                fh.write(f"{n},{m!r},{s!r}\n")

    def cells_to_jsonl(self, path) -> None:
        with open(path, "w") as fh:
            for cell in self.cells:
                fh.write(json.dumps(cell) + "\n")


def _binom_se(rate: float, n: int) -> float:
    return math.sqrt(max(rate * (1.0 - rate), 0.0) / n)


def _cell_seeds(master: int, *key: int) -> list[int]:
    ss = np.random.SeedSequence([int(master), *[int(k) for k in key]])
    return [int(c.generate_state(1)[0]) for c in ss.spawn(4)]


def stratified_balanced_risk(spec: MixtureSpec, h, n_per_class: int,
                             seed: int) -> tuple[float, float]:
    """Balanced risk of classifier h from equal fresh component draws.

    Returns (estimate, standard error). Lower-variance realization of the
    balanced mixture than reweighting a contaminated sample.
    """
    s_inl, s_anom, _, _ = _cell_seeds(seed, 1)
    x_inl = sample_component(spec, n_per_class, s_inl, INLINE)
    x_anom = sample_component(spec, n_per_class, s_anom, ANOMALY)
    err_inl = float(np.mean(h(x_inl) != INLINE))
    err_anom = float(np.mean(h(x_anom) != ANOMALY))
    se = 0.5 * math.sqrt(_binom_se(err_inl, n_per_class) ** 2
                         + _binom_se(err_anom, n_per_class) ** 2)
    return 0.5 * err_inl + 0.5 * err_anom, se


def empirical_risk_ratio(spec: MixtureSpec, h, n_eval: int,
                         seed: int) -> RiskRatioResult:
    """Empirical balanced-to-contaminated risk ratio of a fixed classifier.

    r_alpha comes from a fresh contaminated sample, r_half from fresh
    stratified component samples. A zero contaminated risk flags the ratio as
    +inf rather than dividing by zero.
    """
    s_mix, _, _, _ = _cell_seeds(seed, 0)
    mix = sample_mixture(spec, n_eval, s_mix)
    errs = h(mix.features) != mix.labels
    r_alpha = float(np.mean(errs))
    se_alpha = _binom_se(r_alpha, n_eval)
    r_half, se_half = stratified_balanced_risk(spec, h, n_eval, seed)
    if r_alpha == 0.0:
        return RiskRatioResult(r_alpha, r_half, math.inf, se_alpha, se_half,
                               math.inf)
    ratio = r_half / r_alpha
    if r_half > 0.0:
        se_ratio = ratio * math.sqrt((se_half / r_half) ** 2
                                     + (se_alpha / r_alpha) ** 2)
    else:
        se_ratio = se_half / r_alpha
    return RiskRatioResult(r_alpha, r_half, ratio, se_alpha, se_half, se_ratio)


def importance_weighted_balanced_risk(spec: MixtureSpec, h, n_eval: int,
                                      seed: int) -> tuple[float, float]:
    """Balanced risk estimated from a contaminated sample via the analytic
    density ratio: mean of loss * ratio over the sample.

    Cross-check for stratified_balanced_risk; the two must agree within
    sampling error whenever the spec's densities are correct.
    """
    s_mix, _, _, _ = _cell_seeds(seed, 2)
    mix = sample_mixture(spec, n_eval, s_mix)
    dspec = spec.derivative_spec()
    losses = (h(mix.features) != mix.labels).astype(np.float64)
    ratio = np.empty(n_eval, dtype=np.float64)
    inl = mix.labels == INLINE
    if inl.any():
        ratio[inl] = rn_derivative(dspec, mix.features[inl], INLINE)
    if (~inl).any():
        ratio[~inl] = rn_derivative(dspec, mix.features[~inl], ANOMALY)
    weighted = losses * ratio
    est = float(np.mean(weighted))
    se = float(np.std(weighted, ddof=1) / math.sqrt(n_eval))
    return est, se


def _fit_detector(features: np.ndarray, labels: np.ndarray, trainer: str,
                  config: TrainConfig):
    if trainer == "rn_net_weighted":
        w = rn_weights(estimate_contamination(labels))
    elif trainer == "rn_net_unweighted":
        w = unit_weights()
    else:
        raise ValueError(f"trainer must be one of {TRAINERS}, got {trainer!r}")
    return train(features, labels, config, w)


def model_classifier(model, threshold: float = 0.5):
    """Decision rule of a trained detector: anomaly iff score >= threshold."""

    def h(x: np.ndarray) -> np.ndarray:
        return np.where(predict_scores(model, x) >= threshold, ANOMALY, INLINE)

    return h


def _auto_threshold(model, features: np.ndarray, labels: np.ndarray) -> float:
    """Threshold maximizing TPR - FPR over the given rows; 0.5 when the rows
    are single-class and no threshold is selectable."""
    if len(np.unique(labels)) < 2:
        return 0.5
    scores = predict_scores(model, features)
    return optimal_threshold(scores, labels, candidate_range=PROB_THRESHOLD_RANGE)


def selection_rows(labels: np.ndarray, val_indices: np.ndarray,
                   fit_indices: np.ndarray) -> np.ndarray:
    """Rows a threshold should be selected on.

    The validation carve-out when it can support a rate estimate for every
    class present (at least two rows each); otherwise the fitted rows. With a
    single carve row of a class, the TPR - FPR maximizer degenerates to that
    row's score and the resulting recall is a lottery over its quantile.
    """
    carve = labels[val_indices]
    counts = [np.sum(carve == cls) for cls in np.unique(labels)]
    if val_indices.size > 0 and min(counts, default=0) >= 2:
        return val_indices
    return fit_indices


def excess_risk_curve(spec: MixtureSpec, train_sizes, seeds_per_point: int,
                      trainer: str, config: TrainConfig | None = None,
                      n_eval: int = 20000, seed: int = 0) -> RiskCurve:
    """Excess balanced risk of trained detectors vs training-sample size.

    Per (size, seed) cell: draw a fresh contaminated training sample, fit the
    detector (net plus the threshold maximizing TPR - FPR over that same
    sample; evaluation on fresh draws keeps the estimate unbiased), and
    measure balanced risk on a large fresh stratified evaluation set. Excess
    is relative to the closed-form balanced Bayes risk when the spec admits
    one, else to the best risk observed at the largest size. Cells are keyed
    by their coordinates, so assembly order is irrelevant.
    """
    train_sizes = [int(n) for n in train_sizes]
    if not train_sizes:
        raise ValueError("train_sizes must be nonempty")
    if any(b <= a for a, b in zip(train_sizes, train_sizes[1:])):
        raise ValueError("train_sizes must be strictly increasing")
    if seeds_per_point < 3:
        raise ValueError("seeds_per_point must be >= 3")
    if trainer not in TRAINERS:
        raise ValueError(f"trainer must be one of {TRAINERS}, got {trainer!r}")
    if config is None:
        config = TrainConfig()

    risks: dict[tuple[int, int], float] = {}
    for n in train_sizes:
        for k in range(seeds_per_point):
            s_train, s_cfg, s_eval, _ = _cell_seeds(seed, n, k)
            sample = sample_mixture(spec, n, s_train)
            try:
                result = _fit_detector(sample.features, sample.labels, trainer,
                                       replace(config, seed=s_cfg))
            except Exception as exc:
                raise RuntimeError(
                    f"training failed at cell (n={n}, seed_index={k})") from exc
            threshold = _auto_threshold(result.model, sample.features,
                                        sample.labels)
            h = model_classifier(result.model, threshold)
            risk, _ = stratified_balanced_risk(spec, h, n_eval // 2, s_eval)
            risks[(n, k)] = risk

    reference = bayes_balanced_risk(spec)
    if reference is None:
        reference = min(risks[(train_sizes[-1], k)]
                        for k in range(seeds_per_point))

    means, stderrs, cells = [], [], []
    for n in train_sizes:
        vals = np.array([risks[(n, k)] for k in range(seeds_per_point)])
        excess = vals - reference
        means.append(float(np.mean(excess)))
        stderrs.append(float(np.std(excess, ddof=1) / math.sqrt(seeds_per_point)))
        for k in range(seeds_per_point):
            cells.append({"n": n, "seed_index": k, "risk": risks[(n, k)],
                          "excess": float(risks[(n, k)] - reference)})

    return RiskCurve(
        sample_sizes=tuple(train_sizes),
        mean_excess_risk=tuple(means),
        stderr=tuple(stderrs),
        seeds_per_point=seeds_per_point,
        reference_risk=float(reference),
        cells=tuple(cells),
    )


def recall_comparison(spec: MixtureSpec, n: int = 5000, n_seeds: int = 5,
                      config: TrainConfig | None = None,
                      seed: int = 0) -> dict[str, list[float]]:
    """Paired weighted-vs-unit recall under the full split protocol.

    Per seed: sample a contaminated dataset, apply the 70/15 split, train one
    detector with the contamination-derived weights and one with unit weights
    (sharing the training seed, so the arms differ only in the loss), select
    each threshold per selection_rows (the carve when it supports both rate
    estimates, else the fitted rows; 0.5 if even those are single-class), and
    record anomaly recall on the held-out test split.
    """
    if config is None:
        config = TrainConfig()
    out: dict[str, list[float]] = {"weighted": [], "unit": []}
    for k in range(n_seeds):
        s_sample, s_split, s_train, _ = _cell_seeds(seed, 8, k)
        ds = sample_mixture(spec, n, s_sample)
        split = contamination_split(ds, s_split)
        train_labels = ds.labels[split.train]
        alpha = estimate_contamination(train_labels)
        for arm, w in (("weighted", rn_weights(alpha)), ("unit", unit_weights())):
            result = train(ds.features[split.train], train_labels,
                           replace(config, seed=s_train), w)
            selection = split.train[selection_rows(
                train_labels, result.val_indices, result.train_indices)]
            threshold = _auto_threshold(result.model, ds.features[selection],
                                        ds.labels[selection])
            rep = report(predict_scores(result.model, ds.features[split.test]),
                         ds.labels[split.test], threshold)
            out[arm].append(rep.recall)
    return out
