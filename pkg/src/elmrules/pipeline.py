"""Fit-on-train glue: feature screening, z-score, ELM, rule extraction."""

from __future__ import annotations

from dataclasses import asdict, dataclass, field, replace

import numpy as np

from elmrules import elm
from elmrules.dataset import Dataset, DatasetError, Discretizer, Standardizer, discretize, zscore_fit_apply
from elmrules.extraction import ExtractionResult, SamplingConfig, extract
from elmrules.miner import MinerConfig, RuleList, SearchStats, mine
from elmrules.seeding import derive_seed

METHODS = ("elm-rules", "rules")


@dataclass(frozen=True)
class ElmConfig:
    L: int = 50
    activation: str = "sigmoid"
    rank_tol: float = 1e-10


@dataclass(frozen=True)
class PipelineConfig:
    """Everything a fold needs.

    ``method="elm-rules"`` distills a trained ELM; ``method="rules"`` mines
    the (binned) training data directly, which is the plain Ant-Miner
    baseline.
    """

    elm: ElmConfig = field(default_factory=ElmConfig)
    sampling: SamplingConfig = field(default_factory=SamplingConfig)
    miner: MinerConfig = field(default_factory=MinerConfig)
    method: str = "elm-rules"
    positive_class: int = -1

    def __post_init__(self):
        for name, cls in (("elm", ElmConfig), ("sampling", SamplingConfig), ("miner", MinerConfig)):
            val = getattr(self, name)
            if isinstance(val, dict):
                object.__setattr__(self, name, cls(**val))
        if self.method not in METHODS:
            raise ValueError(f"method must be one of {METHODS}")
        if self.positive_class not in (-1, 1):
            raise ValueError("positive_class must be -1 or +1")

    def to_dict(self) -> dict:
        return asdict(self)

    def seeded(self, seed: int) -> "PipelineConfig":
        """Copy with every module seed derived from ``seed``."""
        return replace(
            self,
            sampling=replace(self.sampling, seed=derive_seed(seed, "sampling")),
            miner=replace(self.miner, seed=derive_seed(seed, "miner")),
        )


@dataclass
class FittedPipeline:
    config: PipelineConfig
    kept: list[int]
    names: list[str]
    dropped: list[str]
    scaler: Standardizer
    model: elm.ElmModel | None
    rules: RuleList
    discretizer: Discretizer  # standardized space
    extraction: ExtractionResult | None = None
    stats: dict = field(default_factory=dict)

    def standardize(self, raw_rows) -> np.ndarray:
        raw = np.atleast_2d(np.asarray(raw_rows, float))
        return self.scaler.apply(raw[:, self.kept])

    def bins(self, raw_rows) -> np.ndarray:
        return self.discretizer.apply(self.standardize(raw_rows))

    def predict_rules(self, raw_rows) -> np.ndarray:
        return self.rules.predict(self.bins(raw_rows))

    def score_rules(self, raw_rows) -> np.ndarray:
        return self.rules.scores(self.bins(raw_rows))

    def predict_elm(self, raw_rows) -> np.ndarray:
        return elm.predict(self.model, self.standardize(raw_rows))

    def score_elm(self, raw_rows) -> np.ndarray:
        return elm.decision(self.model, self.standardize(raw_rows))

    def unit_discretizer(self) -> Discretizer:
        """Bin edges in original feature units, for rendering."""
        return self.discretizer.to_units(self.scaler)

    def render_rules(self) -> str:
        return self.rules.render(self.names, self.unit_discretizer())


def fit_elm(train: Dataset, cfg: ElmConfig | None = None, seed: int = 0) -> tuple[elm.ElmModel, Dataset, Standardizer]:
    """Drop constant columns, z-score, train. The model records its preprocessing."""
    cfg = cfg or ElmConfig()
    const = set(train.constant_features())
    kept = [i for i in range(train.n_features) if i not in const]
    if not kept:
        raise DatasetError("every feature is constant on the training data")
    std, scaler = zscore_fit_apply(train.select_features(kept))
    pre = {"columns": train.names, "kept": kept, "features": std.names, **scaler.to_dict()}
    model = elm.train(std.rows, std.labels, L=cfg.L, activation=cfg.activation, seed=seed,
                      rank_tol=cfg.rank_tol, preprocessing=pre)
    return model, std, scaler


def model_inputs(model: elm.ElmModel, ds: Dataset) -> Dataset:
    """Raw dataset -> the model's (screened, standardized) input space."""
    pre = model.preprocessing or {}
    columns = pre.get("columns", ds.names)
    if ds.n_features != len(columns):
        raise elm.DimensionMismatch(f"model expects {len(columns)} input columns, data has {ds.n_features}")
    kept = pre.get("kept", list(range(ds.n_features)))
    if len(kept) != model.n:
        raise elm.DimensionMismatch(f"model has {model.n} inputs but preprocessing keeps {len(kept)}")
    sub = ds.select_features(kept)
    rows = Standardizer.from_dict(pre).apply(sub.rows) if "means" in pre else sub.rows
    return Dataset.from_arrays(rows, ds.labels, sub.names)


def fit_pipeline(train: Dataset, cfg: PipelineConfig | None = None, seed: int = 0) -> FittedPipeline:
    """Fit preprocessing, ELM and rules on ``train`` only."""
    cfg = (cfg or PipelineConfig()).seeded(seed)
    if cfg.method == "rules":
        const = set(train.constant_features())
        kept = [i for i in range(train.n_features) if i not in const]
        if not kept:
            raise DatasetError("every feature is constant on the training data")
        std, scaler = zscore_fit_apply(train.select_features(kept))
        binned, disc = discretize(std, cfg.sampling.bins_per_feature, cfg.sampling.strategy)
        stats = SearchStats()
        rules = mine(binned, cfg.miner, stats=stats)
        dropped = [n for i, n in enumerate(train.names) if i in const]
        return FittedPipeline(cfg, kept, std.names, dropped, scaler, None, rules, disc, None, asdict(stats))
    model, std, scaler = fit_elm(train, cfg.elm, derive_seed(seed, "elm"))
    kept = model.preprocessing["kept"]
    dropped = [n for i, n in enumerate(train.names) if i not in kept]
    result = extract(model, std, cfg.sampling, cfg.miner, cfg.positive_class)
    return FittedPipeline(cfg, kept, std.names, dropped, scaler, model, result.rules, result.discretizer, result, result.stats)
