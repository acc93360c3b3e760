"""Synthetic contaminated mixtures with closed-form densities.

A mixture spec pairs an inline and an anomaly distribution over the same
d-dimensional space (independent per-dimension marginals from the gaussian /
weibull / lognormal families) with a contamination level. Closed-form pdfs
make the specs usable as analytic oracles: the exact density ratio, the Bayes
classifier, and (for the equal-variance 1-D Gaussian pair) the balanced Bayes
risk.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .data import ANOMALY, INLINE, Dataset
from .weights import RNDerivativeSpec

FAMILIES = ("gaussian", "weibull", "lognormal")
_SQRT2PI = math.sqrt(2.0 * math.pi)


@dataclass(frozen=True)
class Marginal:
    """One-dimensional marginal: gaussian(mean, std), weibull(shape, scale),
    or lognormal(mu, sigma) with mu/sigma on the log scale."""

    family: str
    a: float
    b: float

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise ValueError(f"family must be one of {FAMILIES}, got {self.family!r}")
        if self.family == "gaussian" and self.b <= 0:
            raise ValueError("gaussian std must be positive")
        if self.family == "weibull" and (self.a <= 0 or self.b <= 0):
            raise ValueError("weibull shape and scale must be positive")
        if self.family == "lognormal" and self.b <= 0:
            raise ValueError("lognormal sigma must be positive")

    def sample(self, rng: np.random.Generator, n: int) -> np.ndarray:
        if self.family == "gaussian":
            return rng.normal(self.a, self.b, size=n)
        if self.family == "weibull":
            return self.b * rng.weibull(self.a, size=n)
        return rng.lognormal(self.a, self.b, size=n)

    def pdf(self, x: np.ndarray) -> np.ndarray:
        x = np.asarray(x, dtype=np.float64)
        if self.family == "gaussian":
            z = (x - self.a) / self.b
            return np.exp(-0.5 * z * z) / (self.b * _SQRT2PI)
        if self.family == "weibull":
            k, lam = self.a, self.b
            out = np.zeros_like(x)
            pos = x > 0
            xp = x[pos] / lam
            out[pos] = (k / lam) * xp ** (k - 1) * np.exp(-(xp ** k))
            return out
        mu, sigma = self.a, self.b
        out = np.zeros_like(x)
        pos = x > 0
        z = (np.log(x[pos]) - mu) / sigma
        out[pos] = np.exp(-0.5 * z * z) / (x[pos] * sigma * _SQRT2PI)
        return out

    def to_dict(self) -> dict:
        return {"family": self.family, "a": self.a, "b": self.b}


@dataclass(frozen=True)
class MixtureSpec:
    """Contaminated mixture (1 - contamination) * inline + contamination * anomaly."""

    inline: tuple[Marginal, ...]
    anomaly: tuple[Marginal, ...]
    contamination: float

    def __post_init__(self):
        if len(self.inline) != len(self.anomaly) or not self.inline:
            raise ValueError("inline and anomaly need equal, nonzero dimension")
        if not (0.0 <= self.contamination < 1.0):
            raise ValueError(
                f"contamination must lie in [0, 1), got {self.contamination}")

    @property
    def d(self) -> int:
        return len(self.inline)

    def inline_pdf(self, x: np.ndarray) -> np.ndarray:
        x = np.atleast_2d(np.asarray(x, dtype=np.float64))
        out = np.ones(x.shape[0])
        for j, marg in enumerate(self.inline):
            out *= marg.pdf(x[:, j])
        return out

    def anomaly_pdf(self, x: np.ndarray) -> np.ndarray:
        x = np.atleast_2d(np.asarray(x, dtype=np.float64))
        out = np.ones(x.shape[0])
        for j, marg in enumerate(self.anomaly):
            out *= marg.pdf(x[:, j])
        return out

    def derivative_spec(self) -> RNDerivativeSpec:
        """Analytic density-ratio spec over the labeled joint.

        The inline joint density is supported on y = inline only (and the
        anomaly joint on y = anomaly), so the handles vanish off-label.
        """

        def p_inline(x, y):
            base = self.inline_pdf(x)
            return base if y == INLINE else np.zeros_like(base)

        def p_anomaly(x, y):
            base = self.anomaly_pdf(x)
            return base if y == ANOMALY else np.zeros_like(base)

        return RNDerivativeSpec(contamination=self.contamination,
                                p_inline=p_inline, p_anomaly=p_anomaly)

    def to_dict(self) -> dict:
        return {
            "inline": [m.to_dict() for m in self.inline],
            "anomaly": [m.to_dict() for m in self.anomaly],
            "contamination": self.contamination,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "MixtureSpec":
        return cls(
            inline=tuple(Marginal(**m) for m in d["inline"]),
            anomaly=tuple(Marginal(**m) for m in d["anomaly"]),
            contamination=float(d["contamination"]),
        )


def preset(name: str, contamination: float, d: int = 1) -> MixtureSpec:
    """Named scenarios.

    gauss-easy: unit-variance Gaussians at -2 (inline) and +2 (anomaly).
    gauss-hard: the same at -0.5 / +0.5.
    weibull-vs-lognormal: Weibull(1.5, 1) inline vs Lognormal(1, 0.5) anomaly.

    d > 1 repeats the marginal pair independently per dimension.
    """
    if name == "gauss-easy":
        pair = (Marginal("gaussian", -2.0, 1.0), Marginal("gaussian", 2.0, 1.0))
    elif name == "gauss-hard":
        pair = (Marginal("gaussian", -0.5, 1.0), Marginal("gaussian", 0.5, 1.0))
    elif name == "weibull-vs-lognormal":
        pair = (Marginal("weibull", 1.5, 1.0), Marginal("lognormal", 1.0, 0.5))
    else:
        raise ValueError(f"unknown preset {name!r}")
    return MixtureSpec(inline=(pair[0],) * d, anomaly=(pair[1],) * d,
                       contamination=contamination)


def sample_mixture(spec: MixtureSpec, n: int, seed: int,
                   name: str = "mixture") -> Dataset:
    """n labeled rows: each is an anomaly with probability `contamination`,
    drawn from the corresponding distribution. Deterministic per seed."""
    if n < 1:
        raise ValueError(f"need n >= 1, got {n}")
    rng = np.random.default_rng(seed)
    is_anomaly = rng.random(n) < spec.contamination
    inline_draw = np.column_stack([m.sample(rng, n) for m in spec.inline])
    anomaly_draw = np.column_stack([m.sample(rng, n) for m in spec.anomaly])
    features = np.where(is_anomaly[:, None], anomaly_draw, inline_draw)
    labels = np.where(is_anomaly, ANOMALY, INLINE).astype(np.int64)
    return Dataset(features=features, labels=labels, name=name)


def sample_component(spec: MixtureSpec, n: int, seed: int,
                     component: int) -> np.ndarray:
    """n feature rows from a single component (INLINE or ANOMALY)."""
    if n < 1:
        raise ValueError(f"need n >= 1, got {n}")
    rng = np.random.default_rng(seed)
    margs = spec.inline if component == INLINE else spec.anomaly
    return np.column_stack([m.sample(rng, n) for m in margs])


def bayes_classifier(spec: MixtureSpec):
    """Balanced-mixture Bayes rule: anomaly wherever its density dominates."""

    def h(x: np.ndarray) -> np.ndarray:
        return np.where(spec.anomaly_pdf(x) > spec.inline_pdf(x),
                        ANOMALY, INLINE).astype(np.int64)

    return h


def normal_cdf(x: float) -> float:
    return 0.5 * (1.0 + math.erf(x / math.sqrt(2.0)))


def bayes_balanced_risk(spec: MixtureSpec) -> float | None:
    """Closed-form balanced risk of the Bayes rule, where one exists.

    Available for the 1-D equal-variance Gaussian pair: Phi(-|mu_A - mu_I| /
    (2 sigma)). Returns None otherwise (callers fall back to a plug-in).
    """
    if spec.d != 1:
        return None
    mi, ma = spec.inline[0], spec.anomaly[0]
    if mi.family != "gaussian" or ma.family != "gaussian":
        return None
    if not math.isclose(mi.b, ma.b):
        return None
    gap = abs(ma.a - mi.a)
    return normal_cdf(-gap / (2.0 * mi.b))
