"""Single-hidden-layer ReLU detector trained with Adam on the class-weighted
binary cross-entropy.

The network maps standardized features to an inline probability through 64
hidden units; anomaly scores are 1 - p(inline). Training follows a fixed
recipe: mini-batch Adam, learning rate halved every 5 epochs down to a 1e-6
floor, early stopping on validation balanced risk with best-checkpoint
restoration, inverted dropout on the hidden activations (post-ReLU), L2 decay
on the weight matrices, and optional batch normalization (default off). All
arithmetic is float64 so gradient checks are meaningful.
"""

from __future__ import annotations

import hashlib
import json
import math
from dataclasses import dataclass, field, asdict

import numpy as np

from .data import Standardizer, fit_standardizer
from .metrics import report
from .weights import PROB_CLIP, RNWeights

HIDDEN_UNITS = 64
BN_EPS = 1e-5
BN_MOMENTUM = 0.1


@dataclass
class TrainConfig:
    epochs: int = 50
    lr0: float = 1e-3
    lr_halving_every: int = 5
    lr_floor: float = 1e-6
    patience: int = 10
    dropout_p: float = 0.2
    l2_lambda: float = 1e-4
    batch_size: int = 256
    adam_beta1: float = 0.9
    adam_beta2: float = 0.999
    adam_eps: float = 1e-8
    seed: int = 0
    val_fraction: float = 0.1
    batch_norm: bool = False

    def __post_init__(self):
        if self.epochs < 1:
            raise ValueError("epochs must be >= 1")
        if self.batch_size < 1:
            raise ValueError("batch_size must be >= 1")
        if not (0.0 < self.lr_floor <= self.lr0):
            raise ValueError("need 0 < lr_floor <= lr0")
        if not (0.0 <= self.dropout_p < 1.0):
            raise ValueError("dropout_p must lie in [0, 1)")

    def digest(self) -> str:
        return hashlib.sha256(
            json.dumps(asdict(self), sort_keys=True).encode()).hexdigest()[:16]

    def learning_rate(self, epoch: int) -> float:
        """lr0 halved every lr_halving_every epochs, floored."""
        return max(self.lr0 * 0.5 ** (epoch // self.lr_halving_every),
                   self.lr_floor)


@dataclass
class MlpModel:
    """Affine -> (BN) -> ReLU -> dropout -> affine -> sigmoid, d inputs."""

    w1: np.ndarray
    b1: np.ndarray
    w2: np.ndarray
    b2: float
    standardizer: Standardizer
    batch_norm: bool = False
    gamma: np.ndarray | None = None
    beta: np.ndarray | None = None
    running_mean: np.ndarray | None = None
    running_var: np.ndarray | None = None
    config_digest: str = ""

    @property
    def d(self) -> int:
        return self.w1.shape[0]

    @property
    def hidden(self) -> int:
        return self.w1.shape[1]

    def params(self) -> dict[str, np.ndarray]:
        p = {"w1": self.w1, "b1": self.b1, "w2": self.w2,
             "b2": np.asarray(self.b2, dtype=np.float64)}
        if self.batch_norm:
            p["gamma"] = self.gamma
            p["beta"] = self.beta
        return p

    def set_params(self, p: dict[str, np.ndarray]) -> None:
        self.w1 = p["w1"]
        self.b1 = p["b1"]
        self.w2 = p["w2"]
        self.b2 = float(np.asarray(p["b2"]).ravel()[0])
        if self.batch_norm:
            self.gamma = p["gamma"]
            self.beta = p["beta"]

    def to_dict(self) -> dict:
        d = {
            "d": self.d,
            "w1": self.w1.tolist(),
            "b1": self.b1.tolist(),
            "w2": self.w2.tolist(),
            "b2": self.b2,
            "standardizer": self.standardizer.to_dict(),
            "config_digest": self.config_digest,
        }
        if self.batch_norm:
            d["batch_norm"] = {
                "gamma": self.gamma.tolist(),
                "beta": self.beta.tolist(),
                "running_mean": self.running_mean.tolist(),
                "running_var": self.running_var.tolist(),
            }
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "MlpModel":
        bn = d.get("batch_norm")
        return cls(
            w1=np.asarray(d["w1"], dtype=np.float64),
            b1=np.asarray(d["b1"], dtype=np.float64),
            w2=np.asarray(d["w2"], dtype=np.float64),
            b2=float(d["b2"]),
            standardizer=Standardizer.from_dict(d["standardizer"]),
            batch_norm=bn is not None,
            gamma=None if bn is None else np.asarray(bn["gamma"]),
            beta=None if bn is None else np.asarray(bn["beta"]),
            running_mean=None if bn is None else np.asarray(bn["running_mean"]),
            running_var=None if bn is None else np.asarray(bn["running_var"]),
            config_digest=d.get("config_digest", ""),
        )


@dataclass
class TrainingTrace:
    """Per-epoch record: learning rate, train loss, validation balanced risk."""

    epochs: list[int] = field(default_factory=list)
    lrs: list[float] = field(default_factory=list)
    train_losses: list[float] = field(default_factory=list)
    val_balanced_risks: list[float] = field(default_factory=list)
    best_epoch: int = 0

    def append(self, epoch: int, lr: float, train_loss: float,
               val_risk: float) -> None:
        self.epochs.append(epoch)
        self.lrs.append(lr)
        self.train_losses.append(train_loss)
        self.val_balanced_risks.append(val_risk)

    def __len__(self) -> int:
        return len(self.epochs)

    def to_csv(self, path) -> None:
        with open(path, "w") as fh:
            fh.write("epoch,lr,train_loss,val_balanced_risk\n")
            for row in zip(self.epochs, self.lrs, self.train_losses,
                           self.val_balanced_risks):
                fh.write(",".join(repr(v) for v in row) + "\n")


@dataclass
class TrainResult:
    model: MlpModel
    trace: TrainingTrace
    val_indices: np.ndarray  # positions within the rows passed to train()
    train_indices: np.ndarray


def init_model(d: int, seed: int, hidden: int = HIDDEN_UNITS,
               batch_norm: bool = False) -> MlpModel:
    """Fan-scaled uniform weights (limit sqrt(6/(fan_in+fan_out))), zero
    biases; deterministic per seed."""
    if d < 1:
        raise ValueError(f"input dimension must be >= 1, got {d}")
    rng = np.random.default_rng(seed)
    lim1 = math.sqrt(6.0 / (d + hidden))
    lim2 = math.sqrt(6.0 / (hidden + 1))
    model = MlpModel(
        w1=rng.uniform(-lim1, lim1, size=(d, hidden)),
        b1=np.zeros(hidden),
        w2=rng.uniform(-lim2, lim2, size=hidden),
        b2=0.0,
        standardizer=Standardizer.identity(d),
        batch_norm=batch_norm,
    )
    if batch_norm:
        model.gamma = np.ones(hidden)
        model.beta = np.zeros(hidden)
        model.running_mean = np.zeros(hidden)
        model.running_var = np.ones(hidden)
    return model


def _sigmoid(s: np.ndarray) -> np.ndarray:
    out = np.empty_like(s)
    pos = s >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-s[pos]))
    es = np.exp(s[~pos])
    out[~pos] = es / (1.0 + es)
    return out


def _forward_train(params: dict, z: np.ndarray, batch_norm: bool,
                   mask: np.ndarray | None):
    """Training-mode forward on standardized inputs; returns probs + cache."""
    a1 = z @ params["w1"] + params["b1"]
    if batch_norm:
        mu = a1.mean(axis=0)
        var = a1.var(axis=0)
        xhat = (a1 - mu) / np.sqrt(var + BN_EPS)
        zbn = params["gamma"] * xhat + params["beta"]
    else:
        mu = var = xhat = None
        zbn = a1
    h = np.maximum(zbn, 0.0)
    hm = h if mask is None else h * mask
    s = hm @ params["w2"] + float(np.asarray(params["b2"]).ravel()[0])
    p = _sigmoid(s)
    cache = {"z": z, "a1": a1, "mu": mu, "var": var, "xhat": xhat,
             "zbn": zbn, "hm": hm, "mask": mask, "p": p}
    return p, cache


def _forward_eval(model: MlpModel, z: np.ndarray,
                  mask: np.ndarray | None = None) -> np.ndarray:
    """Inference-mode forward on standardized inputs (BN uses running
    statistics); an optional mask scales the hidden activations."""
    a1 = z @ model.w1 + model.b1
    if model.batch_norm:
        xhat = (a1 - model.running_mean) / np.sqrt(model.running_var + BN_EPS)
        a1 = model.gamma * xhat + model.beta
    h = np.maximum(a1, 0.0)
    if mask is not None:
        h = h * mask
    return _sigmoid(h @ model.w2 + model.b2)


def _loss_and_grads(params: dict, cache: dict, labels: np.ndarray,
                    weights: RNWeights, l2_lambda: float, batch_norm: bool):
    """Weighted BCE (+ L2 on weight matrices) and gradients for every param.

    Differentiates the clipped-probability loss literally, so gradients match
    finite differences of the computed loss even at saturation.
    """
    p = cache["p"]
    n = p.size
    w = weights.per_sample(labels)
    pc = np.clip(p, PROB_CLIP, 1.0 - PROB_CLIP)
    losses = np.where(labels == 1, -np.log(pc), -np.log1p(-pc))
    loss = float(np.mean(w * losses))
    if l2_lambda:
        loss += l2_lambda * (float(np.sum(params["w1"] ** 2))
                             + float(np.sum(params["w2"] ** 2)))

    dldpc = np.where(labels == 1, -1.0 / pc, 1.0 / (1.0 - pc)) * w / n
    inside = (p > PROB_CLIP) & (p < 1.0 - PROB_CLIP)
    ds = np.where(inside, dldpc * p * (1.0 - p), 0.0)

    hm = cache["hm"]
    grads = {"w2": hm.T @ ds, "b2": np.asarray(ds.sum())}
    dhm = np.outer(ds, params["w2"])
    dh = dhm if cache["mask"] is None else dhm * cache["mask"]
    dzbn = dh * (cache["zbn"] > 0)
    if batch_norm:
        xhat = cache["xhat"]
        grads["gamma"] = (dzbn * xhat).sum(axis=0)
        grads["beta"] = dzbn.sum(axis=0)
        inv_std = 1.0 / np.sqrt(cache["var"] + BN_EPS)
        da1 = (params["gamma"] * inv_std) * (
            dzbn - dzbn.mean(axis=0) - xhat * (dzbn * xhat).mean(axis=0))
    else:
        da1 = dzbn
    grads["w1"] = cache["z"].T @ da1
    grads["b1"] = da1.sum(axis=0)
    if l2_lambda:
        grads["w1"] = grads["w1"] + 2.0 * l2_lambda * params["w1"]
        grads["w2"] = grads["w2"] + 2.0 * l2_lambda * params["w2"]
    return loss, grads


def forward(model: MlpModel, x: np.ndarray,
            dropout_mask: np.ndarray | None = None) -> float:
    """Inline probability for a single feature vector.

    Standardization happens internally via the embedded standardizer. With no
    mask this is deterministic inference; a mask (already scaled by
    1/(1 - p)) reproduces a training-time stochastic pass.
    """
    x = np.asarray(x, dtype=np.float64)
    if x.shape != (model.d,):
        raise ValueError(f"expected shape ({model.d},), got {x.shape}")
    z = model.standardizer.apply(x[None, :])
    mask = None if dropout_mask is None else np.asarray(dropout_mask)[None, :]
    return float(_forward_eval(model, z, mask)[0])


def predict_scores(model: MlpModel, features: np.ndarray) -> np.ndarray:
    """Anomaly score per row: 1 - p(inline), so larger means more anomalous."""
    features = np.asarray(features, dtype=np.float64)
    if features.ndim != 2 or features.shape[1] != model.d:
        raise ValueError(
            f"expected (n, {model.d}) features, got shape {features.shape}")
    z = model.standardizer.apply(features)
    return 1.0 - _forward_eval(model, z)


def _balanced_risk_at_half(model: MlpModel, z: np.ndarray,
                           labels: np.ndarray) -> float:
    scores = 1.0 - _forward_eval(model, z)
    return report(scores, labels, 0.5).balanced_risk


def train(features: np.ndarray, labels: np.ndarray, config: TrainConfig,
          weights: RNWeights) -> TrainResult:
    """Mini-batch Adam on the weighted BCE with L2 decay.

    A val_fraction carve-out (never trained on, stratified per class so rare
    anomalies keep their share) drives early stopping on balanced risk at
    threshold 0.5, with best-checkpoint restoration. The carve is only
    trusted as the monitor when it holds at least two rows of every class
    present in the data; below that a class rate degenerates to a 0/1
    indicator (a blind or jumpy monitor locks in arbitrary checkpoints), so
    the monitor falls back to the fitted rows. Deterministic given (data,
    config, weights): all randomness flows from config.seed.
    """
    features = np.asarray(features, dtype=np.float64)
    labels = np.asarray(labels, dtype=np.int64)
    n = features.shape[0]
    if n < 2:
        raise ValueError(f"training needs at least 2 rows, got {n}")
    if labels.shape != (n,):
        raise ValueError("labels length does not match feature rows")

    seed_init, seed_val, seed_shuffle, seed_dropout = [
        int(s.generate_state(1)[0])
        for s in np.random.SeedSequence(config.seed).spawn(4)]

    std = fit_standardizer(features)
    z_all = std.apply(features)

    rng_val = np.random.default_rng(seed_val)
    val_parts, fit_parts = [], []
    for cls in np.unique(labels):
        cls_idx = rng_val.permutation(np.flatnonzero(labels == cls))
        k = int(math.floor(config.val_fraction * cls_idx.size))
        val_parts.append(cls_idx[:k])
        fit_parts.append(cls_idx[k:])
    val_idx = np.sort(np.concatenate(val_parts))
    fit_idx = np.sort(np.concatenate(fit_parts))
    carve_counts = [np.sum(labels[val_idx] == cls) for cls in np.unique(labels)]
    monitor_idx = val_idx if min(carve_counts, default=0) >= 2 else fit_idx

    model = init_model(features.shape[1], seed_init,
                       batch_norm=config.batch_norm)
    model.standardizer = std
    model.config_digest = config.digest()
    params = {k: np.array(v, dtype=np.float64) for k, v in model.params().items()}

    adam_m = {k: np.zeros_like(v) for k, v in params.items()}
    adam_v = {k: np.zeros_like(v) for k, v in params.items()}
    step = 0

    rng_shuffle = np.random.default_rng(seed_shuffle)
    rng_dropout = np.random.default_rng(seed_dropout)

    trace = TrainingTrace()
    best_risk = math.inf
    best_params = None
    best_bn_stats = None
    best_epoch = 0
    epochs_since_best = 0

    z_fit = z_all[fit_idx]
    y_fit = labels[fit_idx]

    for epoch in range(config.epochs):
        lr = config.learning_rate(epoch)
        order = rng_shuffle.permutation(fit_idx.size)
        loss_acc = 0.0
        for start in range(0, order.size, config.batch_size):
            batch = order[start:start + config.batch_size]
            zb, yb = z_fit[batch], y_fit[batch]
            mask = None
            if config.dropout_p > 0.0:
                keep = rng_dropout.random((batch.size, model.hidden)) >= config.dropout_p
                mask = keep / (1.0 - config.dropout_p)
            p, cache = _forward_train(params, zb, config.batch_norm, mask)
            loss, grads = _loss_and_grads(params, cache, yb, weights,
                                          config.l2_lambda, config.batch_norm)
            if config.batch_norm:
                model.running_mean = ((1.0 - BN_MOMENTUM) * model.running_mean
                                      + BN_MOMENTUM * cache["mu"])
                model.running_var = ((1.0 - BN_MOMENTUM) * model.running_var
                                     + BN_MOMENTUM * cache["var"])
            step += 1
            for k in params:
                adam_m[k] = config.adam_beta1 * adam_m[k] + (1 - config.adam_beta1) * grads[k]
                adam_v[k] = config.adam_beta2 * adam_v[k] + (1 - config.adam_beta2) * grads[k] ** 2
                m_hat = adam_m[k] / (1 - config.adam_beta1 ** step)
                v_hat = adam_v[k] / (1 - config.adam_beta2 ** step)
                params[k] = params[k] - lr * m_hat / (np.sqrt(v_hat) + config.adam_eps)
            loss_acc += loss * batch.size
        train_loss = loss_acc / order.size

        if not all(np.isfinite(v).all() for v in params.values()):
            raise FloatingPointError(f"non-finite parameters at epoch {epoch}")
        if not math.isfinite(train_loss):
            raise FloatingPointError(f"non-finite loss at epoch {epoch}")

        model.set_params({k: v.copy() for k, v in params.items()})
        val_risk = _balanced_risk_at_half(model, z_all[monitor_idx],
                                          labels[monitor_idx])
        trace.append(epoch, lr, train_loss, val_risk)

        if val_risk < best_risk:
            best_risk = val_risk
            best_params = {k: v.copy() for k, v in params.items()}
            if config.batch_norm:
                best_bn_stats = (model.running_mean.copy(),
                                 model.running_var.copy())
            best_epoch = epoch
            epochs_since_best = 0
        else:
            epochs_since_best += 1
            if epochs_since_best >= config.patience:
                break

    model.set_params(best_params)
    if config.batch_norm and best_bn_stats is not None:
        model.running_mean, model.running_var = best_bn_stats
    trace.best_epoch = best_epoch
    return TrainResult(model=model, trace=trace, val_indices=val_idx,
                       train_indices=fit_idx)


def gradient_check(model: MlpModel, features: np.ndarray, labels: np.ndarray,
                   weights: RNWeights, step: float = 1e-5) -> float:
    """Max relative disagreement between analytic parameter gradients and
    central finite differences of the weighted BCE (dropout off, no L2).

    Components whose +/-step evaluations land on different sides of a ReLU
    kink or the probability clip boundary are skipped: the loss is not
    differentiable there, so the central difference is meaningless.
    """
    features = np.asarray(features, dtype=np.float64)
    labels = np.asarray(labels, dtype=np.int64)
    if features.shape[0] == 0:
        raise ValueError("gradient check needs a nonempty batch")
    z = model.standardizer.apply(features)
    # b2 is 0-d in params(); promote so in-place FD perturbation works
    params = {k: np.array(np.atleast_1d(v), dtype=np.float64)
              for k, v in model.params().items()}

    def loss_and_regions(p):
        probs, cache = _forward_train(p, z, model.batch_norm, None)
        loss, _ = _loss_and_grads(p, cache, labels, weights, 0.0,
                                  model.batch_norm)
        regions = (cache["zbn"] > 0,
                   (probs > PROB_CLIP) & (probs < 1.0 - PROB_CLIP))
        return loss, regions

    _, cache = _forward_train(params, z, model.batch_norm, None)
    _, grads = _loss_and_grads(params, cache, labels, weights, 0.0,
                               model.batch_norm)

    worst = 0.0
    for key, value in params.items():
        flat = value.reshape(-1)
        gflat = np.asarray(grads[key], dtype=np.float64).reshape(-1)
        for i in range(flat.size):
            orig = flat[i]
            flat[i] = orig + step
            up, regions_up = loss_and_regions(params)
            flat[i] = orig - step
            down, regions_down = loss_and_regions(params)
            flat[i] = orig
            if not all(np.array_equal(a, b)
                       for a, b in zip(regions_up, regions_down)):
                continue
            fd = (up - down) / (2 * step)
            denom = max(abs(gflat[i]) + abs(fd), 1e-6)
            worst = max(worst, abs(gflat[i] - fd) / denom)
    return worst
