"""Pedagogical rule extraction: the trained ELM is used purely as a labeling oracle.

Random inputs drawn uniformly over the training ranges are labeled by the
ELM, binned, and handed to the ant miner.  Every rule the miner proposes
must keep the list's agreement with the ELM on a freshly drawn probe set
within ``fidelity_threshold`` of the last accepted list's agreement on the
same rows, otherwise the rule is discarded and its cases stay available.
"""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from elmrules import elm
from elmrules.dataset import Dataset, DiscretizedDataset, Discretizer, discretize, fit_discretizer
from elmrules.metrics import Metrics, evaluate_predictions
from elmrules.miner import MinerConfig, RuleList, SearchStats, mine, pure_group_rules
from elmrules.seeding import derive_seed, rng_for


@dataclass(frozen=True)
class SamplingConfig:
    n_examples: int | None = None  # None -> 10 x |train|, capped at max_examples
    max_examples: int = 20000
    probe_size: int | None = None  # None -> |train|
    fidelity_threshold: float = 0.95
    bins_per_feature: int = 6
    strategy: str = "equal_frequency"
    exact_match_prepass: bool = False
    seed: int = 0

    def __post_init__(self):
        if not 0.0 <= self.fidelity_threshold <= 1.0:
            raise ValueError("fidelity_threshold must lie in [0, 1]")
        if self.n_examples is not None and self.n_examples < 0:
            raise ValueError("n_examples must be >= 0")

    def resolved_sizes(self, n_train: int) -> tuple[int, int]:
        n_ex = self.n_examples if self.n_examples is not None else min(10 * n_train, self.max_examples)
        probe = self.probe_size if self.probe_size is not None else n_train
        return int(n_ex), max(1, int(probe))


@dataclass
class ExtractionResult:
    rules: RuleList
    fidelity: float
    discretizer: Discretizer  # fitted on the example set, model input space
    train_metrics: Metrics
    probe_metrics: Metrics
    feature_names: list[str]
    n_examples: int
    stats: dict = field(default_factory=dict)

    @property
    def n_rules(self) -> int:
        return self.rules.n_rules

    @property
    def terms_per_rule(self) -> float:
        return self.rules.terms_per_rule

    def to_dict(self) -> dict:
        return {
            "fidelity": self.fidelity,
            "n_rules": self.n_rules,
            "terms_per_rule": self.terms_per_rule,
            "n_examples": self.n_examples,
            "train_metrics": asdict(self.train_metrics),
            "probe_metrics": asdict(self.probe_metrics),
            "stats": self.stats,
            "rule_list": self.rules.to_dict(),
        }

    def save(self, path) -> None:
        Path(path).write_text(json.dumps(self.to_dict(), indent=2) + "\n", encoding="utf-8")


def feature_ranges(rows) -> np.ndarray:
    rows = np.atleast_2d(np.asarray(rows, float))
    return np.column_stack([rows.min(axis=0), rows.max(axis=0)])


def generate_inputs(ranges, n_examples: int, seed: int) -> np.ndarray:
    """``n_examples`` rows, each feature uniform on its [min, max]."""
    ranges = np.asarray(ranges, dtype=float)
    if not np.isfinite(ranges).all() or (ranges[:, 0] > ranges[:, 1]).any():
        raise ValueError("ranges must be finite with min <= max")
    rng = rng_for(seed, "inputs")
    u = rng.random((int(n_examples), ranges.shape[0]))
    return ranges[:, 0] + u * (ranges[:, 1] - ranges[:, 0])


def label_with_model(model: elm.ElmModel, rows, names=None) -> Dataset:
    """Join generated inputs with the model's outputs."""
    rows = np.atleast_2d(np.asarray(rows, float))
    return Dataset.from_arrays(rows, elm.predict(model, rows), names)


def fidelity(rules: RuleList, model: elm.ElmModel, probe_rows, discretizer: Discretizer) -> float:
    """Fraction of probe rows on which rules and model agree."""
    probe_rows = np.atleast_2d(np.asarray(probe_rows, float))
    if probe_rows.shape[0] == 0:
        raise ValueError("probe set is empty")
    return float(np.mean(rules.predict(discretizer.apply(probe_rows)) == elm.predict(model, probe_rows)))


def extract(
    model: elm.ElmModel,
    train: Dataset,
    cfg: SamplingConfig | None = None,
    miner_cfg: MinerConfig | None = None,
    positive_class: int = -1,
) -> ExtractionResult:
    """Distill ``model`` into an ordered rule list.

    ``train`` must be in the model's input space (standardized); only its
    feature ranges are used, never its labels.
    """
    cfg = cfg or SamplingConfig()
    miner_cfg = miner_cfg or MinerConfig()
    n_ex, n_probe = cfg.resolved_sizes(train.n_samples)
    ranges = feature_ranges(train.rows)

    B_rows = generate_inputs(ranges, n_ex, derive_seed(cfg.seed, "examples"))
    probe_rows = generate_inputs(ranges, n_probe, derive_seed(cfg.seed, "probe"))

    if n_ex == 0:
        gate_rows = generate_inputs(ranges, n_probe, derive_seed(cfg.seed, "gate", 0))
        disc = fit_discretizer(gate_rows, cfg.bins_per_feature, cfg.strategy)
        rules = RuleList((), _majority(elm.predict(model, gate_rows)), (0, 0))
        return _finish(rules, model, disc, None, probe_rows, train.names, 0, {}, positive_class)

    B = label_with_model(model, B_rows, train.names)
    binned, disc = discretize(B, cfg.bins_per_feature, cfg.strategy)
    state = {"list": RuleList((), _majority(B.labels), (0, 0)), "checks": 0}

    def accept(candidate: RuleList, covered) -> bool:
        # fresh probe set per check; candidate and last accepted list are scored on the same rows
        state["checks"] += 1
        rows = generate_inputs(ranges, n_probe, derive_seed(cfg.seed, "gate", state["checks"]))
        bins, target = disc.apply(rows), elm.predict(model, rows)
        fid = float(np.mean(candidate.predict(bins) == target))
        prev = float(np.mean(state["list"].predict(bins) == target))
        if fid >= cfg.fidelity_threshold * prev or fid > prev:
            state["list"] = candidate
            return True
        return False

    seeds = pure_group_rules(binned, miner_cfg.min_cases_per_rule) if cfg.exact_match_prepass else ()
    stats = SearchStats()
    rules = mine(binned, miner_cfg, accept=accept if cfg.fidelity_threshold > 0 else None, stats=stats, seed_rules=seeds)
    return _finish(rules, model, disc, binned, probe_rows, train.names, n_ex, asdict(stats), positive_class)


def _majority(labels) -> int:
    labels = np.asarray(labels)
    return 1 if np.sum(labels == 1) > np.sum(labels == -1) else -1


def _finish(rules, model, disc, binned: DiscretizedDataset | None, probe_rows, names, n_ex, stats, positive_class):
    probe_bins = disc.apply(probe_rows)
    probe_target = elm.predict(model, probe_rows)
    probe_metrics = evaluate_predictions(
        rules.predict(probe_bins), rules.scores(probe_bins), probe_target, positive_class,
        rules.n_rules, rules.terms_per_rule,
    )
    if binned is not None:
        train_metrics = evaluate_predictions(
            rules.predict(binned.bins), rules.scores(binned.bins), binned.labels, positive_class,
            rules.n_rules, rules.terms_per_rule,
        )
    else:
        train_metrics = probe_metrics
    fid = float(np.mean(rules.predict(probe_bins) == probe_target))
    return ExtractionResult(rules, fid, disc, train_metrics, probe_metrics, list(names), n_ex, stats)
