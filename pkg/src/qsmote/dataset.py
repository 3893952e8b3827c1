"""Dataset value type, imbalance bookkeeping, and stratified splitting.

Labels are stored as {0, 1} with 1 = the configured positive class. The
minority class is whichever label has fewer rows; a tie goes to the positive
class. All operations return new Dataset values and never mutate inputs.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import InvalidInputError
from .seeding import SeedSpec


@dataclass(frozen=True)
class Dataset:
    """Immutable feature matrix with binary labels and column names."""

    features: np.ndarray
    labels: np.ndarray
    feature_names: tuple[str, ...]

    def __post_init__(self):
        feats = np.array(self.features, dtype=float, copy=True)
        labels = np.array(self.labels, dtype=np.uint8, copy=True)
        if feats.ndim != 2:
            raise InvalidInputError("features must be a 2-D matrix")
        if labels.ndim != 1 or labels.shape[0] != feats.shape[0]:
            raise InvalidInputError("labels must be one per feature row")
        if not np.all(np.isfinite(feats)):
            raise InvalidInputError("feature values must all be finite")
        if labels.size and not np.all((labels == 0) | (labels == 1)):
            raise InvalidInputError("labels must be 0 or 1")
        names = tuple(str(n) for n in self.feature_names)
        if len(names) != feats.shape[1]:
            raise InvalidInputError("feature_names must match the column count")
        feats.setflags(write=False)
        labels.setflags(write=False)
        object.__setattr__(self, "features", feats)
        object.__setattr__(self, "labels", labels)
        object.__setattr__(self, "feature_names", names)

    @property
    def n_samples(self) -> int:
        return self.features.shape[0]

    @property
    def n_features(self) -> int:
        return self.features.shape[1]

    def class_counts(self) -> dict[int, int]:
        return {0: int(np.sum(self.labels == 0)), 1: int(np.sum(self.labels == 1))}

    def minority_label(self) -> int:
        """The rarer label; ties go to the positive class (1)."""
        counts = self.class_counts()
        return 1 if counts[1] <= counts[0] else 0

    def majority_label(self) -> int:
        return 1 - self.minority_label()

    def rows(self, indices) -> "Dataset":
        idx = np.asarray(indices, dtype=int)
        return Dataset(self.features[idx], self.labels[idx], self.feature_names)

    def equals(self, other: "Dataset") -> bool:
        return (
            self.feature_names == other.feature_names
            and np.array_equal(self.labels, other.labels)
            and np.array_equal(self.features, other.features)
        )


@dataclass(frozen=True)
class ImbalanceReport:
    majority_count: int
    minority_count: int
    ir: Optional[float]  # None marks the undefined (empty minority) case


@dataclass(frozen=True)
class SplitSpec:
    """Either a holdout split (test_fraction) or k folds (n_folds)."""

    test_fraction: Optional[float] = None
    n_folds: Optional[int] = None
    stratified: bool = True

    def __post_init__(self):
        if (self.test_fraction is None) == (self.n_folds is None):
            raise InvalidInputError("set exactly one of test_fraction or n_folds")
        if self.test_fraction is not None and not 0.0 < self.test_fraction < 1.0:
            raise InvalidInputError("test_fraction must lie in (0, 1)")
        if self.n_folds is not None and self.n_folds < 2:
            raise InvalidInputError("n_folds must be at least 2")


def imbalance_report(d: Dataset) -> ImbalanceReport:
    """Majority/minority counts and their ratio (always >= 1; ties give 1)."""
    if d.n_samples == 0:
        raise InvalidInputError("empty dataset")
    counts = d.class_counts()
    majority = max(counts.values())
    minority = min(counts.values())
    ir = None if minority == 0 else majority / minority
    return ImbalanceReport(majority_count=majority, minority_count=minority, ir=ir)


def make_imbalanced(d: Dataset, target_ir: float, seed: SeedSpec) -> Dataset:
    """Raise the imbalance ratio by removing minority rows uniformly at random.

    floor(majority / target_ir) minority rows are kept (ties resolved with a
    small epsilon so target == current is an exact no-op); majority rows are
    untouched and row order is preserved.
    """
    report = imbalance_report(d)
    if report.ir is None:
        raise InvalidInputError("minority class is empty")
    if target_ir < report.ir - 1e-9:
        raise InvalidInputError(
            f"target ir {target_ir} is below the current ir {report.ir:.6g}; "
            "this operation only removes minority samples"
        )
    minority = d.minority_label()
    min_idx = np.flatnonzero(d.labels == minority)
    keep = int(np.floor(report.majority_count / target_ir + 1e-9))
    if keep >= min_idx.size:
        return d.rows(np.arange(d.n_samples))
    if keep < 1:
        raise InvalidInputError("target ir would remove the entire minority class")
    gen = seed.generator()
    kept = np.sort(gen.permutation(min_idx)[:keep])
    mask = np.ones(d.n_samples, dtype=bool)
    mask[min_idx] = False
    mask[kept] = True
    return d.rows(np.flatnonzero(mask))


def _per_class_indices(d: Dataset) -> list[np.ndarray]:
    return [np.flatnonzero(d.labels == lab) for lab in (0, 1)]


def train_test_split(
    d: Dataset, test_fraction: float, seed: SeedSpec, stratified: bool = True
) -> tuple[Dataset, Dataset]:
    """Single holdout split; stratified keeps class proportions within one row."""
    gen = seed.generator()
    if stratified:
        test_parts = []
        for idx in _per_class_indices(d):
            if idx.size == 0:
                continue
            n_test = int(np.floor(test_fraction * idx.size + 0.5))
            n_test = min(max(n_test, 1), idx.size - 1) if idx.size > 1 else n_test
            test_parts.append(gen.permutation(idx)[:n_test])
        test_idx = np.sort(np.concatenate(test_parts)) if test_parts else np.empty(0, int)
    else:
        n_test = int(np.floor(test_fraction * d.n_samples + 0.5))
        test_idx = np.sort(gen.permutation(d.n_samples)[:n_test])
    mask = np.zeros(d.n_samples, dtype=bool)
    mask[test_idx] = True
    return d.rows(np.flatnonzero(~mask)), d.rows(np.flatnonzero(mask))


def stratified_folds(
    d: Dataset, n_folds: int, seed: SeedSpec, stratified: bool = True
) -> list[tuple[Dataset, Dataset]]:
    """k cross-validation folds whose test parts partition the dataset."""
    gen = seed.generator()
    if stratified:
        for lab, idx in zip((0, 1), _per_class_indices(d)):
            if 0 < idx.size < n_folds:
                raise InvalidInputError(
                    f"class {lab} has {idx.size} samples, fewer than {n_folds} folds"
                )
        chunks: list[list[np.ndarray]] = [[] for _ in range(n_folds)]
        for idx in _per_class_indices(d):
            if idx.size == 0:
                continue
            shuffled = gen.permutation(idx)
            for fold, part in enumerate(np.array_split(shuffled, n_folds)):
                chunks[fold].append(part)
        test_sets = [np.sort(np.concatenate(parts)) for parts in chunks]
    else:
        if d.n_samples < n_folds:
            raise InvalidInputError("fewer samples than folds")
        shuffled = gen.permutation(d.n_samples)
        test_sets = [np.sort(part) for part in np.array_split(shuffled, n_folds)]
    folds = []
    for test_idx in test_sets:
        mask = np.zeros(d.n_samples, dtype=bool)
        mask[test_idx] = True
        folds.append((d.rows(np.flatnonzero(~mask)), d.rows(np.flatnonzero(mask))))
    return folds


def stratified_split(d: Dataset, spec: SplitSpec, seed: SeedSpec):
    """Dispatch on SplitSpec: holdout pair or list of (train, test) folds."""
    if spec.test_fraction is not None:
        return train_test_split(d, spec.test_fraction, seed, spec.stratified)
    return stratified_folds(d, spec.n_folds, seed, spec.stratified)
