"""Datasets with a known generating rule, used as oracles in tests and scripts."""

from __future__ import annotations

import numpy as np

from elmrules.dataset import Dataset, DiscretizedDataset, Discretizer, discretize
from elmrules.seeding import rng_for


def planted_benchmark(n: int = 200, n_attributes: int = 4, n_bins: int = 3, seed: int = 0,
                      planted=((0, 0), (1, 2))) -> DiscretizedDataset:
    """Uniform categorical attributes; label -1 iff every planted term holds."""
    rng = rng_for(seed, "planted")
    bins = rng.integers(0, n_bins, size=(n, n_attributes))
    hit = np.ones(n, dtype=bool)
    for attr, val in planted:
        hit &= bins[:, attr] == val
    labels = np.where(hit, -1, 1)
    names = [f"x{i}" for i in range(n_attributes)]
    cuts = tuple(v + 0.5 for v in range(n_bins - 1))
    disc = Discretizer((cuts,) * n_attributes)
    return discretize(Dataset.from_arrays(bins, labels, names), discretizer=disc)[0]


def planted_continuous(n: int = 200, n_attributes: int = 4, n_bins: int = 3, seed: int = 0,
                       planted=((0, 0), (1, 2))) -> Dataset:
    """Continuous twin of :func:`planted_benchmark`: feature j lies in [v, v+1) when its bin is v."""
    disc = planted_benchmark(n, n_attributes, n_bins, seed, planted)
    jitter = rng_for(seed, "jitter").random(disc.bins.shape)
    return Dataset.from_arrays(disc.bins + jitter, disc.labels, [s.name for s in disc.specs])


# ordered rule list over 6 equal-width bins of [0, 1); first match wins
RULE_LIST = (
    (((0, (4, 5)), (1, (0, 1))), -1),
    (((2, (0,)),), -1),
    (((3, (5,)), (0, (0, 1, 2))), -1),
)


def rule_label(rows, n_bins: int = 6, rules=RULE_LIST, default: int = 1) -> np.ndarray:
    """Labels from :data:`RULE_LIST` applied to rows in [0, 1)."""
    bins = np.clip(np.floor(np.asarray(rows, float) * n_bins).astype(int), 0, n_bins - 1)
    out = np.full(bins.shape[0], default)
    done = np.zeros(bins.shape[0], dtype=bool)
    for terms, cls in rules:
        hit = ~done
        for attr, allowed in terms:
            hit &= np.isin(bins[:, attr], allowed)
        out[hit] = cls
        done |= hit
    return out


def rule_dataset(n: int = 2000, n_features: int = 4, seed: int = 0) -> Dataset:
    rows = rng_for(seed, "rule-data").random((n, n_features))
    return Dataset.from_arrays(rows, rule_label(rows), [f"f{i}" for i in range(n_features)])


# two single-attribute rules whose cuts fall on the 6-bin edges
EDGE_RULES = (
    (((0, (4, 5)),), -1),
    (((1, (0, 1)),), -1),
)


def edge_rule_dataset(n: int = 2000, n_features: int = 2, seed: int = 0) -> Dataset:
    rows = rng_for(seed, "edge-data").random((n, n_features))
    return Dataset.from_arrays(rows, rule_label(rows, rules=EDGE_RULES), [f"f{i}" for i in range(n_features)])


STEP_RULE = ((((0, (3, 4, 5)),), -1),)


def step_dataset(n: int = 2000, n_features: int = 2, seed: int = 0) -> Dataset:
    """Label -1 iff f0 lies in the upper half of [0, 1): a 1-term step on one binned feature."""
    rows = rng_for(seed, "step-data").random((n, n_features))
    return Dataset.from_arrays(rows, rule_label(rows, rules=STEP_RULE), [f"f{i}" for i in range(n_features)])
