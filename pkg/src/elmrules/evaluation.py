"""Cross-validation driver, parameter sweeps and comparison tables."""

from __future__ import annotations

import csv
import io
import json
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from elmrules.dataset import Dataset, stratified_kfold
from elmrules.metrics import DegenerateROC, Metrics, evaluate_predictions, roc_auc
from elmrules.pipeline import PipelineConfig, fit_pipeline
from elmrules.seeding import derive_seed

FIELDS = ("acc", "prec", "auc", "n_rules", "terms_per_rule", "eta")
HEADERS = ("Method", "Acc (%)", "Prec (%)", "AUC", "#R", "#T/R", "eta")


class MalformedCSV(ValueError):
    pass


@dataclass(frozen=True)
class Aggregate:
    """Mean and sample standard deviation per metric field over folds."""

    mean: dict
    std: dict
    n_folds: int

    @classmethod
    def of(cls, metrics: list[Metrics]) -> "Aggregate":
        mean, std = {}, {}
        for f in FIELDS:
            vals = [getattr(m, f) for m in metrics if getattr(m, f) is not None]
            mean[f] = float(np.mean(vals)) if vals else None
            std[f] = float(np.std(vals, ddof=1)) if len(vals) > 1 else (0.0 if vals else None)
        return cls(mean, std, len(metrics))

    def to_dict(self) -> dict:
        return {"mean": self.mean, "std": self.std, "n_folds": self.n_folds}


@dataclass
class CVReport:
    methods: dict  # name -> Aggregate
    folds: list  # per-fold dicts
    positive_class: int
    k: int
    seed: int
    roc: list = field(default_factory=list)  # pooled out-of-fold points for the rule list

    def to_dict(self) -> dict:
        return {
            "positive_class": self.positive_class,
            "k": self.k,
            "seed": self.seed,
            "columns": list(FIELDS),
            "methods": {name: agg.to_dict() for name, agg in self.methods.items()},
            "folds": self.folds,
        }

    def table(self) -> list[dict]:
        return [table_row(name, agg) for name, agg in self.methods.items()]


def _fold_job(args):
    ds, cfg, train_idx, val_idx, fold_seed, fold = args
    fitted = fit_pipeline(ds.subset(train_idx), cfg, fold_seed)
    val_rows, val_labels = ds.rows[val_idx], ds.labels[val_idx]
    pc = cfg.positive_class
    r_pred = fitted.predict_rules(val_rows)
    r_score = fitted.score_rules(val_rows)
    out = {"fold": fold, "seed": fold_seed, "n_train": int(len(train_idx)), "n_val": int(len(val_idx)),
           "dropped_features": fitted.dropped}
    rules_m = evaluate_predictions(r_pred, r_score, val_labels, pc, fitted.rules.n_rules, fitted.rules.terms_per_rule)
    out["degenerate_roc"] = rules_m.auc is None
    metrics = {"ELM-rules" if fitted.model is not None else "Ant-Miner": rules_m}
    if fitted.model is not None:
        e_pred = fitted.predict_elm(val_rows)
        metrics["ELM"] = evaluate_predictions(e_pred, fitted.score_elm(val_rows), val_labels, pc)
        out["fidelity_val"] = float(np.mean(e_pred == r_pred))
        out["fidelity_probe"] = fitted.extraction.fidelity
    out["metrics"] = {k: v.to_dict() for k, v in metrics.items()}
    return out, metrics, r_score


def _map(fn, jobs, n_jobs: int):
    if n_jobs <= 1 or len(jobs) <= 1:
        return [fn(j) for j in jobs]
    with ProcessPoolExecutor(max_workers=n_jobs) as pool:
        return list(pool.map(fn, jobs))


def cross_validate(ds: Dataset, cfg: PipelineConfig | None = None, k: int = 5, seed: int = 0, jobs: int = 1) -> CVReport:
    """Stratified k-fold: everything is fitted on the training part of each fold."""
    cfg = cfg or PipelineConfig()
    folds = stratified_kfold(ds.labels, k, seed)
    tasks = [(ds, cfg, tr, va, derive_seed(seed, "fold", i), i) for i, (tr, va) in enumerate(folds)]
    results = _map(_fold_job, tasks, jobs)
    per_method: dict[str, list[Metrics]] = {}
    for _, metrics, _ in results:
        for name, m in metrics.items():
            per_method.setdefault(name, []).append(m)
    # pooled out-of-fold ROC for the rule list
    scores = np.concatenate([r[2] for r in results])
    labels = np.concatenate([ds.labels[va] for _, va in folds])
    sign = 1.0 if cfg.positive_class == 1 else -1.0
    try:
        roc, _ = roc_auc(sign * scores, labels, cfg.positive_class)
    except DegenerateROC:
        roc = []
    methods = {name: Aggregate.of(ms) for name, ms in per_method.items()}
    return CVReport(methods, [r[0] for r in results], cfg.positive_class, k, seed, roc)


def _sweep_job(args):
    ds, cfg, k, seed = args
    return cross_validate(ds, cfg, k, seed).methods


def parameter_sweep(ds: Dataset, rho_grid, ants_grid, cfg: PipelineConfig | None = None, k: int = 5,
                    seed: int = 0, jobs: int = 1) -> list[tuple[float, int, float]]:
    """CV accuracy of the rule list for each (rho, n_ants) cell.

    Every cell uses the same folds and seed, so cells differ only in the
    two swept parameters.
    """
    rho_grid, ants_grid = list(rho_grid), list(ants_grid)
    if not rho_grid or not ants_grid:
        raise ValueError("sweep grids must be non-empty")
    cfg = cfg or PipelineConfig()
    cells = [(float(r), int(a)) for r in rho_grid for a in ants_grid]
    tasks = []
    for rho, ants in cells:
        miner = replace(cfg.miner, n_ants=ants, evaporation=replace(cfg.miner.evaporation, rho=rho))
        tasks.append((ds, replace(cfg, miner=miner), k, seed))
    reports = _map(_sweep_job, tasks, jobs)
    name = "ELM-rules" if cfg.method == "elm-rules" else "Ant-Miner"
    return [(rho, ants, rep[name].mean["acc"]) for (rho, ants), rep in zip(cells, reports)]


# ---- tables -------------------------------------------------------------

def _fmt(value, std, kind: str) -> str:
    if value is None:
        return "—"
    if kind == "pct":
        return f"{100 * value:.2f}±{std:.4f}"
    if kind == "count":
        return f"{value:.1f}±{std:.2f}"
    return f"{value:.4f}±{std:.4f}"


def table_row(name: str, agg: Aggregate) -> dict:
    kinds = {"acc": "pct", "prec": "pct", "auc": "frac", "n_rules": "count", "terms_per_rule": "count", "eta": "frac"}
    row = {"Method": name}
    for f, h in zip(FIELDS, HEADERS[1:]):
        row[h] = _fmt(agg.mean[f], agg.std[f] or 0.0, kinds[f])
    return row


def load_external(path, threshold: float = 0.0) -> tuple[np.ndarray, np.ndarray]:
    """Read a ``score,label`` CSV; predictions are +1 when score > threshold."""
    text = Path(path).read_text(encoding="utf-8")
    reader = csv.DictReader(io.StringIO(text))
    fields = reader.fieldnames or []
    if "score" not in fields or "label" not in fields:
        raise MalformedCSV(f"{path}: need columns score,label (got {fields})")
    scores, labels = [], []
    for i, rec in enumerate(reader, start=2):
        try:
            scores.append(float(rec["score"]))
            lab = int(float(rec["label"]))
        except (TypeError, ValueError) as exc:
            raise MalformedCSV(f"{path}:{i}: {exc}") from None
        if lab not in (-1, 1):
            raise MalformedCSV(f"{path}:{i}: label must be -1 or +1")
        labels.append(lab)
    if not scores:
        raise MalformedCSV(f"{path}: no rows")
    return np.asarray(scores), np.asarray(labels)


def external_metrics(path, positive_class: int = -1, threshold: float = 0.0) -> Metrics:
    scores, labels = load_external(path, threshold)
    pred = np.where(scores > threshold, 1, -1)
    return evaluate_predictions(pred, scores, labels, positive_class)


def comparison_table(ours: dict, external: dict | None = None, positive_class: int = -1,
                     threshold: float = 0.0) -> list[dict]:
    """Rows for our aggregated methods followed by external baselines.

    ``ours`` maps method names to :class:`Aggregate`; ``external`` maps
    names to ``score,label`` CSV paths.
    """
    rows = [table_row(name, agg) for name, agg in ours.items()]
    for name, path in (external or {}).items():
        rows.append(table_row(name, Aggregate.of([external_metrics(path, positive_class, threshold)])))
    return rows


def render_text(rows: list[dict], positive_class: int = -1) -> str:
    widths = [max(len(h), *(len(r[h]) for r in rows)) for h in HEADERS] if rows else [len(h) for h in HEADERS]
    lines = ["  ".join(h.ljust(w) for h, w in zip(HEADERS, widths))]
    lines += ["  ".join(r[h].ljust(w) for h, w in zip(HEADERS, widths)) for r in rows]
    lines.append(f"positive class for Prec: {positive_class:+d}")
    return "\n".join(line.rstrip() for line in lines) + "\n"


def render_csv(rows: list[dict]) -> str:
    buf = io.StringIO()
    w = csv.DictWriter(buf, fieldnames=list(HEADERS), lineterminator="\n")
    w.writeheader()
    w.writerows(rows)
    return buf.getvalue()


# ---- writers ------------------------------------------------------------

def roc_csv(points) -> str:
    lines = ["threshold,fpr,tpr"]
    lines += [f"{'inf' if math.isinf(t) else repr(t)},{f!r},{r!r}" for t, f, r in points]
    return "\n".join(lines) + "\n"


def surface_csv(cells) -> str:
    lines = ["rho,n_ants,acc"] + [f"{r!r},{a},{acc!r}" for r, a, acc in cells]
    return "\n".join(lines) + "\n"


def metrics_json(report: CVReport) -> str:
    return json.dumps(report.to_dict(), indent=2, sort_keys=True) + "\n"
