"""ELM-based transient stability rule extraction with an improved Ant-Miner."""

from elmrules.dataset import Dataset, DiscretizedDataset, Discretizer, FeatureSpec, Standardizer
from elmrules.elm import ElmModel
from elmrules.miner import MinerConfig, Rule, RuleList

__all__ = [
    "Dataset",
    "DiscretizedDataset",
    "Discretizer",
    "ElmModel",
    "FeatureSpec",
    "MinerConfig",
    "Rule",
    "RuleList",
    "Standardizer",
]

__version__ = "0.1.0"
