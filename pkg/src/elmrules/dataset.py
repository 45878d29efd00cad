"""Labeled tabular data, z-score scaling, binning and fold splitting.

Labels are always -1 (unstable) / +1 (stable).  Everything here is a pure
function of its inputs plus an explicit seed.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Sequence

import numpy as np

from elmrules.seeding import rng_for

LABELS = (-1, 1)


class DatasetError(ValueError):
    """Base class for data ingestion / preprocessing errors."""


class EmptyFile(DatasetError):
    pass


class RaggedRow(DatasetError):
    def __init__(self, line: int, expected: int, got: int):
        super().__init__(f"line {line}: expected {expected} columns, got {got}")
        self.line = line


class NonNumericCell(DatasetError):
    pass


class InvalidLabel(DatasetError):
    pass


class ConstantFeature(DatasetError):
    def __init__(self, names: Sequence[str]):
        super().__init__(f"zero-variance feature(s): {', '.join(names)}")
        self.names = list(names)


class BadFoldSpec(DatasetError):
    pass


@dataclass(frozen=True)
class FeatureSpec:
    name: str
    index: int
    min: float
    max: float
    mean: float
    std: float
    bin_edges: tuple[float, ...] = ()


def _frozen(a, dtype) -> np.ndarray:
    a = np.array(a, dtype=dtype, copy=True)
    a.setflags(write=False)
    return a


def _specs_from_rows(names: Sequence[str], rows: np.ndarray) -> list[FeatureSpec]:
    return [
        FeatureSpec(
            name=str(name),
            index=i,
            min=float(rows[:, i].min()),
            max=float(rows[:, i].max()),
            mean=float(rows[:, i].mean()),
            std=float(rows[:, i].std()),
        )
        for i, name in enumerate(names)
    ]


@dataclass(frozen=True)
class Dataset:
    """N x n real matrix with one +/-1 label per row."""

    specs: tuple[FeatureSpec, ...]
    rows: np.ndarray
    labels: np.ndarray

    def __post_init__(self):
        rows = _frozen(self.rows, float)
        labels = _frozen(self.labels, int)
        if rows.ndim != 2 or rows.shape[0] < 1:
            raise DatasetError("dataset needs a non-empty 2-D row matrix")
        if rows.shape[1] != len(self.specs):
            raise DatasetError(f"{rows.shape[1]} columns but {len(self.specs)} feature specs")
        if labels.shape != (rows.shape[0],):
            raise DatasetError("one label per row required")
        bad = ~np.isin(labels, LABELS)
        if bad.any():
            raise InvalidLabel(f"labels must be -1 or +1, got {labels[bad][0]}")
        object.__setattr__(self, "rows", rows)
        object.__setattr__(self, "labels", labels)
        object.__setattr__(self, "specs", tuple(self.specs))

    @classmethod
    def from_arrays(cls, rows, labels, names: Sequence[str] | None = None) -> "Dataset":
        rows = np.asarray(rows, dtype=float)
        if rows.ndim == 1:
            rows = rows[:, None]
        if names is None:
            names = [f"x{i}" for i in range(rows.shape[1])]
        if len(rows) == 0:
            raise DatasetError("dataset needs at least one row")
        return cls(tuple(_specs_from_rows(names, rows)), rows, np.asarray(labels, dtype=int))

    @property
    def names(self) -> list[str]:
        return [s.name for s in self.specs]

    @property
    def n_samples(self) -> int:
        return self.rows.shape[0]

    @property
    def n_features(self) -> int:
        return self.rows.shape[1]

    def subset(self, idx) -> "Dataset":
        """Rows ``idx``; feature statistics are recomputed on the subset."""
        idx = np.asarray(idx)
        return Dataset.from_arrays(self.rows[idx], self.labels[idx], self.names)

    def select_features(self, cols: Sequence[int]) -> "Dataset":
        cols = list(cols)
        return Dataset.from_arrays(self.rows[:, cols], self.labels, [self.names[c] for c in cols])

    def with_labels(self, labels) -> "Dataset":
        return Dataset(self.specs, self.rows, np.asarray(labels, dtype=int))

    def constant_features(self) -> list[int]:
        return [i for i, s in enumerate(self.specs) if s.std == 0.0]


def load_csv(path) -> Dataset:
    """Read a header + rows CSV whose final column is ``label``."""
    path = Path(path)
    with path.open(newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise EmptyFile(f"{path}: empty file") from None
        header = [h.strip() for h in header]
        if not header or header[-1] != "label":
            raise DatasetError(f"{path}: final column must be named 'label'")
        width = len(header)
        rows, labels = [], []
        for line_no, rec in enumerate(reader, start=2):
            if not rec or all(not c.strip() for c in rec):
                continue
            if len(rec) != width:
                raise RaggedRow(line_no, width, len(rec))
            try:
                values = [float(c) for c in rec[:-1]]
                raw_label = float(rec[-1])
            except ValueError as exc:
                raise NonNumericCell(f"line {line_no}: {exc}") from None
            if raw_label not in (-1.0, 1.0):
                raise InvalidLabel(f"line {line_no}: label {rec[-1].strip()!r} not in {{-1, 1}}")
            rows.append(values)
            labels.append(int(raw_label))
    if not rows:
        raise EmptyFile(f"{path}: no data rows")
    return Dataset.from_arrays(np.array(rows, dtype=float).reshape(len(rows), width - 1), labels, header[:-1])


def write_csv(ds: Dataset, path) -> None:
    with Path(path).open("w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow([*ds.names, "label"])
        for row, lab in zip(ds.rows, ds.labels):
            w.writerow([repr(float(v)) for v in row] + [int(lab)])


# --------------------------------------------------------------------------
# z-score
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class Standardizer:
    means: np.ndarray
    stds: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "means", _frozen(self.means, float))
        object.__setattr__(self, "stds", _frozen(self.stds, float))

    def apply(self, rows) -> np.ndarray:
        return (np.asarray(rows, dtype=float) - self.means) / self.stds

    def inverse(self, rows) -> np.ndarray:
        return np.asarray(rows, dtype=float) * self.stds + self.means

    def transform(self, ds: Dataset) -> Dataset:
        return Dataset.from_arrays(self.apply(ds.rows), ds.labels, ds.names)

    def to_dict(self) -> dict:
        return {"means": self.means.tolist(), "stds": self.stds.tolist()}

    @classmethod
    def from_dict(cls, d: dict) -> "Standardizer":
        return cls(np.asarray(d["means"], float), np.asarray(d["stds"], float))


def zscore_fit(ds: Dataset) -> Standardizer:
    const = ds.constant_features()
    if const:
        raise ConstantFeature([ds.names[i] for i in const])
    return Standardizer(ds.rows.mean(axis=0), ds.rows.std(axis=0))


def zscore_fit_apply(ds: Dataset) -> tuple[Dataset, Standardizer]:
    """Standardize every feature to zero mean / unit (population) std."""
    scaler = zscore_fit(ds)
    return scaler.transform(ds), scaler


# --------------------------------------------------------------------------
# discretization
# --------------------------------------------------------------------------


def _equal_frequency_edges(col: np.ndarray, n_bins: int) -> np.ndarray:
    # cut between consecutive order statistics so bin populations differ by <= 1
    v = np.sort(col)
    n = len(v)
    cuts = [(k * n) // n_bins for k in range(1, n_bins)]
    edges = [(v[c - 1] + v[c]) / 2.0 for c in cuts if 0 < c < n and v[c - 1] < v[c]]
    return np.array(edges, dtype=float)


def _equal_width_edges(col: np.ndarray, n_bins: int) -> np.ndarray:
    lo, hi = float(col.min()), float(col.max())
    return np.linspace(lo, hi, n_bins + 1)[1:-1]


def _clean_edges(edges: np.ndarray, col: np.ndarray) -> np.ndarray:
    lo = col.min()
    edges = np.unique(edges)
    # an edge at or below the minimum would leave bin 0 empty
    return edges[edges > lo]


@dataclass(frozen=True)
class Discretizer:
    """Per-feature interior cut points; bin j of feature i is [e[j-1], e[j])."""

    bin_edges: tuple[tuple[float, ...], ...]

    @property
    def b(self) -> list[int]:
        return [len(e) + 1 for e in self.bin_edges]

    def apply(self, rows) -> np.ndarray:
        rows = np.atleast_2d(np.asarray(rows, dtype=float))
        if rows.shape[1] != len(self.bin_edges):
            raise DatasetError(f"expected {len(self.bin_edges)} columns, got {rows.shape[1]}")
        out = np.empty(rows.shape, dtype=np.int64)
        for i, edges in enumerate(self.bin_edges):
            # side="right" clamps out-of-range values into the boundary bins
            out[:, i] = np.searchsorted(np.asarray(edges, float), rows[:, i], side="right")
        return out

    def interval(self, feature: int, bin_index: int) -> tuple[float, float]:
        edges = self.bin_edges[feature]
        lo = -np.inf if bin_index == 0 else edges[bin_index - 1]
        hi = np.inf if bin_index == len(edges) else edges[bin_index]
        return float(lo), float(hi)

    def to_units(self, scaler: Standardizer) -> "Discretizer":
        """Map edges fitted in standardized space back to feature units."""
        return Discretizer(
            tuple(
                tuple(float(e * scaler.stds[i] + scaler.means[i]) for e in edges)
                for i, edges in enumerate(self.bin_edges)
            )
        )

    def to_dict(self) -> dict:
        return {"bin_edges": [list(e) for e in self.bin_edges]}

    @classmethod
    def from_dict(cls, d: dict) -> "Discretizer":
        return cls(tuple(tuple(float(x) for x in e) for e in d["bin_edges"]))


def fit_discretizer(rows, bins_per_feature: int = 6, strategy: str = "equal_frequency") -> Discretizer:
    if bins_per_feature < 2:
        raise DatasetError("bins_per_feature must be >= 2")
    rows = np.atleast_2d(np.asarray(rows, dtype=float))
    if strategy == "equal_frequency":
        make = _equal_frequency_edges
    elif strategy == "equal_width":
        make = _equal_width_edges
    else:
        raise DatasetError(f"unknown discretization strategy {strategy!r}")
    edges = []
    for i in range(rows.shape[1]):
        col = rows[:, i]
        edges.append(tuple(float(e) for e in _clean_edges(make(col, bins_per_feature), col)))
    return Discretizer(tuple(edges))


@dataclass(frozen=True)
class DiscretizedDataset:
    specs: tuple[FeatureSpec, ...]
    bins: np.ndarray
    b: tuple[int, ...]
    labels: np.ndarray = field(default=None)

    def __post_init__(self):
        bins = _frozen(self.bins, np.int64)
        if bins.ndim != 2 or bins.shape[1] != len(self.b):
            raise DatasetError("bins must be N x n with one bin count per feature")
        if bins.size and ((bins < 0).any() or (bins >= np.asarray(self.b)).any()):
            raise DatasetError("bin index out of range")
        object.__setattr__(self, "bins", bins)
        object.__setattr__(self, "b", tuple(int(x) for x in self.b))
        if self.labels is not None:
            object.__setattr__(self, "labels", _frozen(self.labels, int))

    @property
    def n_samples(self) -> int:
        return self.bins.shape[0]

    def subset(self, idx) -> "DiscretizedDataset":
        idx = np.asarray(idx)
        return replace(self, bins=self.bins[idx], labels=None if self.labels is None else self.labels[idx])


def discretize(
    ds: Dataset,
    bins_per_feature: int = 6,
    strategy: str = "equal_frequency",
    discretizer: Discretizer | None = None,
) -> tuple[DiscretizedDataset, Discretizer]:
    """Bin ``ds``; fits a new discretizer unless one is supplied."""
    if discretizer is None:
        discretizer = fit_discretizer(ds.rows, bins_per_feature, strategy)
    specs = tuple(replace(s, bin_edges=e) for s, e in zip(ds.specs, discretizer.bin_edges))
    return DiscretizedDataset(specs, discretizer.apply(ds.rows), tuple(discretizer.b), ds.labels), discretizer


def save_preprocessing(path, scaler: Standardizer | None, disc: Discretizer | None) -> None:
    payload = {
        "means": None if scaler is None else scaler.means.tolist(),
        "stds": None if scaler is None else scaler.stds.tolist(),
        "bin_edges": None if disc is None else [list(e) for e in disc.bin_edges],
    }
    Path(path).write_text(json.dumps(payload, indent=2) + "\n", encoding="utf-8")


def load_preprocessing(path) -> tuple[Standardizer | None, Discretizer | None]:
    d = json.loads(Path(path).read_text(encoding="utf-8"))
    scaler = None if d.get("means") is None else Standardizer.from_dict(d)
    disc = None if d.get("bin_edges") is None else Discretizer.from_dict(d)
    return scaler, disc


# --------------------------------------------------------------------------
# folds
# --------------------------------------------------------------------------


def stratified_kfold(labels, k: int, seed: int) -> list[tuple[np.ndarray, np.ndarray]]:
    """Split indices into ``k`` stratified (train, validation) pairs.

    Each class is shuffled and dealt round-robin; the dealing offset carries
    over between classes so fold sizes also differ by at most one.
    """
    labels = np.asarray(labels.labels if isinstance(labels, Dataset) else labels)
    if k < 2:
        raise BadFoldSpec(f"k must be >= 2, got {k}")
    rng = rng_for(seed, "kfold")
    fold_of = np.empty(len(labels), dtype=int)
    offset = 0
    for cls in sorted(np.unique(labels)):
        members = np.flatnonzero(labels == cls)
        if len(members) < k:
            raise BadFoldSpec(f"class {cls} has {len(members)} members, fewer than k={k}")
        members = rng.permutation(members)
        fold_of[members] = (np.arange(len(members)) + offset) % k
        offset = (offset + len(members)) % k
    all_idx = np.arange(len(labels))
    return [(all_idx[fold_of != f], all_idx[fold_of == f]) for f in range(k)]
