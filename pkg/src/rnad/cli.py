"""Command-line harness: supervised and unsupervised runs, config validation,
and the synthetic learnability study, all driven by a JSON config.

    rnad run config.json [--out DIR] [--seed N]
    rnad validate config.json

One seed reproduces an entire run: every stage (split, training, study cells)
draws from named sub-seeds derived from it. Artifacts are deterministic given
the config; reports carry digests of the train/test index sets so the
train/test separation is auditable.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from .cluster import (
    DEFAULT_CLUSTERS,
    DEFAULT_COVERAGE,
    DEFAULT_MAX_ITERS,
    DEFAULT_SIZE_RATIO,
    DEFAULT_TOL,
    kmeans_fit,
    repartition,
)
from .data import apply_standardizer, contamination_split, fit_standardizer, load_csv
from .metrics import PROB_THRESHOLD_RANGE, optimal_threshold, report
from .mixtures import Marginal, MixtureSpec, preset
from .neural import TrainConfig, predict_scores, train
from .scores import kde_fit, mod_weights, write_scores_csv
from .study import TRAINERS, excess_risk_curve, selection_rows
from .weights import ALPHA_CLAMP, estimate_contamination, rn_weights

MODES = ("supervised", "unsupervised-cblof", "unsupervised-ecblof",
         "unsupervised-cblof-mod", "pac-study")

_CONVENTIONS = ("one_is_anomaly", "one_is_inline")

_TRAIN_FIELDS = {f for f in TrainConfig.__dataclass_fields__} - {"seed"}


def _sub_seeds(seed: int) -> dict[str, int]:
    children = np.random.SeedSequence(seed).spawn(3)
    names = ("split", "train", "study")
    return {name: int(c.generate_state(1)[0]) for name, c in zip(names, children)}


def validate_config(config: dict) -> list[str]:
    """Structural diagnostics; an empty list means the config is runnable."""
    diags: list[str] = []
    mode = config.get("mode")
    if mode not in MODES:
        diags.append(f"mode: must be one of {list(MODES)}, got {mode!r}")
        return diags
    seed = config.get("seed", 0)
    if not isinstance(seed, int):
        diags.append("seed: must be an integer")

    if mode == "pac-study":
        study = config.get("study")
        if not isinstance(study, dict):
            diags.append("study: required for pac-study mode")
            return diags
        try:
            _build_spec(study)
        except (KeyError, ValueError) as exc:
            diags.append(f"study: {exc}")
        sizes = study.get("train_sizes")
        if (not isinstance(sizes, list) or not sizes
                or any(not isinstance(n, int) or n < 2 for n in sizes)
                or any(b <= a for a, b in zip(sizes, sizes[1:]))):
            diags.append("study.train_sizes: need a strictly increasing list "
                         "of integers >= 2")
        spp = study.get("seeds_per_point", 5)
        if not isinstance(spp, int) or spp < 3:
            diags.append("study.seeds_per_point: must be an integer >= 3")
        trainer = study.get("trainer", "rn_net_weighted")
        if trainer not in TRAINERS:
            diags.append(f"study.trainer: must be one of {list(TRAINERS)}")
        return diags

    dataset = config.get("dataset")
    if not isinstance(dataset, dict):
        diags.append("dataset: required for this mode")
        return diags
    path = dataset.get("path")
    if not path:
        diags.append("dataset.path: required")
    elif not Path(path).exists():
        diags.append(f"dataset.path: {path} does not exist")
    if not dataset.get("label_column"):
        diags.append("dataset.label_column: required")
    convention = dataset.get("label_convention")
    if convention not in _CONVENTIONS:
        diags.append(
            f"dataset.label_convention: must be one of {list(_CONVENTIONS)} "
            f"(no default is assumed)")

    if mode == "supervised":
        extra = set(config.get("train", {})) - _TRAIN_FIELDS
        if extra:
            diags.append(f"train: unknown fields {sorted(extra)}")
        try:
            TrainConfig(**{k: v for k, v in config.get("train", {}).items()
                           if k in _TRAIN_FIELDS})
        except (TypeError, ValueError) as exc:
            diags.append(f"train: {exc}")
    else:
        clustering = config.get("clustering", {})
        m = clustering.get("m", DEFAULT_CLUSTERS)
        if not isinstance(m, int) or m < 1:
            diags.append("clustering.m: must be an integer >= 1")
    return diags


def _build_spec(study: dict) -> MixtureSpec:
    contamination = study.get("contamination")
    if contamination is None:
        raise KeyError("missing 'contamination'")
    if "preset" in study:
        return preset(study["preset"], float(contamination),
                      d=int(study.get("d", 1)))
    if "inline" in study and "anomaly" in study:
        return MixtureSpec(
            inline=tuple(Marginal(**m) for m in study["inline"]),
            anomaly=tuple(Marginal(**m) for m in study["anomaly"]),
            contamination=float(contamination),
        )
    raise KeyError("need either 'preset' or explicit 'inline'/'anomaly' marginals")


def _write_json(path: Path, payload: dict) -> None:
    path.write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n")


def _append_result_line(out: Path, payload: dict) -> None:
    # accumulating log: one compact line per run against this output dir
    with open(out / "results.jsonl", "a") as fh:
        fh.write(json.dumps(payload, sort_keys=True) + "\n")


def _run_supervised(config: dict, out: Path, seed: int, seeds: dict) -> dict:
    ds_cfg = config["dataset"]
    dataset, load_report = load_csv(ds_cfg["path"], ds_cfg["label_column"],
                                    ds_cfg["label_convention"],
                                    name=ds_cfg.get("name"))
    _write_json(out / "load_report.json", load_report.to_dict())

    split = contamination_split(dataset, seeds["split"])
    train_labels = dataset.labels[split.train]
    warnings: list[str] = []
    alpha = estimate_contamination(train_labels)
    if alpha <= ALPHA_CLAMP or alpha >= 1.0 - ALPHA_CLAMP:
        warnings.append(
            "contamination estimate clamped (single-class training split); "
            "the weighted loss degenerates toward ignoring inline error")
    weights = rn_weights(alpha)

    overrides = {k: v for k, v in config.get("train", {}).items()
                 if k in _TRAIN_FIELDS}
    train_config = TrainConfig(seed=seeds["train"], **overrides)
    result = train(dataset.features[split.train], train_labels, train_config,
                   weights)

    selection = selection_rows(train_labels, result.val_indices,
                               result.train_indices)
    selection_idx = split.train[selection]
    if not np.array_equal(selection, result.val_indices):
        warnings.append("validation carve-out too thin for rate estimates; "
                        "threshold selected on the fitted rows")
    sel_scores = predict_scores(result.model, dataset.features[selection_idx])
    sel_labels = dataset.labels[selection_idx]
    if len(np.unique(sel_labels)) == 2:
        threshold = optimal_threshold(sel_scores, sel_labels,
                                      candidate_range=PROB_THRESHOLD_RANGE)
    else:
        threshold = 0.5
        warnings.append("threshold selection set is single-class; "
                        "fell back to 0.5")

    test_scores = predict_scores(result.model, dataset.features[split.test])
    rep = report(test_scores, dataset.labels[split.test], threshold)

    digests = split.digest()
    payload = rep.to_dict()
    payload.update({
        "dataset": dataset.name,
        "mode": "supervised",
        "seed": seed,
        "contamination_estimate": alpha,
        "train_digest": digests["train"],
        "test_digest": digests["test"],
        "warnings": warnings,
    })
    _write_json(out / "report.json", payload)
    (out / "thresholds.csv").write_text(
        f"dataset,optimal_threshold\n{dataset.name},{threshold!r}\n")
    _write_json(out / "model.json", result.model.to_dict())
    result.trace.to_csv(out / "trace.csv")
    _write_json(out / "audit.json", {
        "seed": seed,
        "sub_seeds": seeds,
        "train_indices": split.train.tolist(),
        "test_indices": split.test.tolist(),
        "validation_indices": selection_idx.tolist(),
        "digests": digests,
    })
    return payload


def _run_unsupervised(config: dict, out: Path, seed: int, seeds: dict,
                      variant: str) -> dict:
    ds_cfg = config["dataset"]
    dataset, load_report = load_csv(ds_cfg["path"], ds_cfg["label_column"],
                                    ds_cfg["label_convention"],
                                    name=ds_cfg.get("name"))
    _write_json(out / "load_report.json", load_report.to_dict())

    clustering = config.get("clustering", {})
    std = fit_standardizer(dataset.features)
    z = apply_standardizer(std, dataset.features)
    model = kmeans_fit(
        z,
        m=clustering.get("m", DEFAULT_CLUSTERS),
        seed=seeds["train"],
        max_iters=clustering.get("max_iters", DEFAULT_MAX_ITERS),
        tol=clustering.get("tol", DEFAULT_TOL),
        coverage=clustering.get("coverage", DEFAULT_COVERAGE),
        ratio=clustering.get("ratio", DEFAULT_SIZE_RATIO),
    )
    if clustering.get("pin_large") is not None:
        model = repartition(model, pin=int(clustering["pin_large"]))

    kde = kde_fit(z) if variant == "cblof_mod" else None
    scores = write_scores_csv(out / "scores.csv", model, variant, z, kde=kde)

    warnings: list[str] = []
    if len(np.unique(dataset.labels)) == 2:
        threshold = optimal_threshold(scores, dataset.labels)
    else:
        threshold = float("inf")
        warnings.append("labels are single-class; no threshold is selectable, "
                        "reporting the predict-nothing rule")
    rep = report(scores, dataset.labels, threshold)

    payload = rep.to_dict()
    payload.update({
        "dataset": dataset.name,
        "mode": f"unsupervised-{variant.replace('_', '-')}",
        "variant": variant,
        "seed": seed,
        "warnings": warnings,
    })
    _write_json(out / "report.json", payload)
    (out / "thresholds.csv").write_text(
        f"dataset,optimal_threshold\n{dataset.name},{threshold!r}\n")
    model_payload = {
        "cluster_model": model.to_dict(),
        "standardizer": std.to_dict(),
        "features": "standardized",
        "variant": variant,
    }
    if kde is not None:
        model_payload["kde"] = kde.to_dict()
        model_payload["mod_weights"] = mod_weights(model, kde).tolist()
    _write_json(out / "model.json", model_payload)
    _write_json(out / "audit.json", {
        "seed": seed,
        "sub_seeds": seeds,
        "train_indices": list(range(dataset.features.shape[0])),
        "test_indices": [],
        "note": "unsupervised protocol fits and scores every row",
    })
    return payload


def _run_study(config: dict, out: Path, seed: int, seeds: dict) -> dict:
    study = config["study"]
    spec = _build_spec(study)
    overrides = {k: v for k, v in study.get("train", {}).items()
                 if k in _TRAIN_FIELDS}
    curve = excess_risk_curve(
        spec,
        train_sizes=study["train_sizes"],
        seeds_per_point=study.get("seeds_per_point", 5),
        trainer=study.get("trainer", "rn_net_weighted"),
        config=TrainConfig(**overrides) if overrides else None,
        n_eval=study.get("n_eval", 20000),
        seed=seeds["study"],
    )
    curve.to_csv(out / "curve.csv")
    curve.cells_to_jsonl(out / "cells.jsonl")
    _write_json(out / "audit.json", {"seed": seed, "sub_seeds": seeds,
                                     "spec": spec.to_dict()})
    payload = {
        "mode": "pac-study",
        "seed": seed,
        "spec": spec.to_dict(),
        "trainer": study.get("trainer", "rn_net_weighted"),
        "sample_sizes": list(curve.sample_sizes),
        "mean_excess_risk": list(curve.mean_excess_risk),
        "stderr": list(curve.stderr),
        "reference_risk": curve.reference_risk,
    }
    _write_json(out / "report.json", payload)
    return payload


def cmd_validate(config_path: str) -> list[str]:
    """Diagnostics for a config file; empty means runnable."""
    try:
        config = json.loads(Path(config_path).read_text())
    except FileNotFoundError:
        return [f"config: {config_path} does not exist"]
    except json.JSONDecodeError as exc:
        return [f"config: invalid JSON ({exc})"]
    if not isinstance(config, dict):
        return ["config: top level must be a JSON object"]
    return validate_config(config)


def cmd_run(config_path: str, out_dir: str | None = None,
            seed_override: int | None = None) -> int:
    """Execute a run; exit status 0 on success, 2 on config problems, 1 on
    runtime failure (with a machine-readable error JSON on stdout)."""
    diags = cmd_validate(config_path)
    if diags:
        print(json.dumps({"error": "invalid config", "diagnostics": diags}))
        return 2
    config = json.loads(Path(config_path).read_text())
    seed = seed_override if seed_override is not None else config.get("seed", 0)
    out = Path(out_dir or config.get("output_dir", "rnad_out"))
    out.mkdir(parents=True, exist_ok=True)
    seeds = _sub_seeds(seed)
    mode = config["mode"]
    try:
        if mode == "supervised":
            payload = _run_supervised(config, out, seed, seeds)
        elif mode == "pac-study":
            payload = _run_study(config, out, seed, seeds)
        else:
            variant = mode.removeprefix("unsupervised-").replace("-", "_")
            payload = _run_unsupervised(config, out, seed, seeds, variant)
    except Exception as exc:
        print(json.dumps({"error": str(exc), "context": {"mode": mode,
                                                         "seed": seed}}))
        return 1
    _append_result_line(out, payload)
    print(json.dumps({"status": "ok", "mode": mode,
                      "output_dir": str(out),
                      "report": payload}))
    return 0


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="rnad",
        description="Density-ratio corrected anomaly detection runs")
    sub = parser.add_subparsers(dest="command", required=True)
    run_p = sub.add_parser("run", help="execute a run from a JSON config")
    run_p.add_argument("config")
    run_p.add_argument("--out", default=None, help="output directory")
    run_p.add_argument("--seed", type=int, default=None,
                       help="override the config seed")
    val_p = sub.add_parser("validate", help="check a config without running")
    val_p.add_argument("config")
    args = parser.parse_args(argv)
    if args.command == "validate":
        diags = cmd_validate(args.config)
        for d in diags:
            print(d)
        return 0 if not diags else 2
    return cmd_run(args.config, out_dir=args.out, seed_override=args.seed)


if __name__ == "__main__":
    sys.exit(main())
