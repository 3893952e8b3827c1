"""Cross-validated experiment driver.

Protocol: split, resample ONLY the training part (or leave it alone for the
baseline condition), fit the classifier on the (possibly resampled) training
part, and evaluate on the untouched test part. The minority class of the
full input dataset is the positive class for every metric.
"""
from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Optional

import numpy as np

from .classify import ClassifierSpec, fit_classifier
from .dataset import Dataset, SplitSpec, stratified_split
from .metrics import (
    accuracy,
    auc_roc,
    confusion,
    f1,
    g_mean,
    precision,
    recall,
    zero_division_flags,
)
from .resample import ResamplePlan, resample
from .seeding import SeedSpec

METRIC_NAMES = ("accuracy", "precision", "recall", "f1", "g_mean", "auc")

# stream tags for per-fold derivations
_TAG_RESAMPLE = 11
_TAG_CLASSIFIER = 12


@dataclass(frozen=True)
class ExperimentResult:
    mode: str  # "holdout" | "cross_validation"
    n_folds: int
    fold_metrics: dict[str, tuple[float, ...]]
    means: dict[str, float]
    stds: dict[str, float]  # sample standard deviation (ddof=1; 0 for one fold)
    flags: tuple[str, ...] = ()

    def to_dict(self) -> dict:
        return {
            "mode": self.mode,
            "n_folds": self.n_folds,
            "fold_metrics": {k: list(v) for k, v in self.fold_metrics.items()},
            "means": dict(self.means),
            "stds": dict(self.stds),
            "flags": list(self.flags),
        }


def _evaluate_fold(
    train: Dataset,
    test: Dataset,
    plan: Optional[ResamplePlan],
    clf: ClassifierSpec,
    positive: int,
    fold_seed: SeedSpec,
) -> tuple[dict[str, float], tuple[str, ...]]:
    flags: tuple[str, ...] = ()
    if plan is not None:
        fold_plan = replace(plan, seed=plan.seed.derive(_TAG_RESAMPLE, fold_seed.stream_id))
        train, report = resample(train, fold_plan)
        flags = report.flags
    y_train = (train.labels == positive).astype(int)
    model = fit_classifier(train.features, y_train, clf, fold_seed.derive(_TAG_CLASSIFIER))
    flags = flags + getattr(model, "flags", ())
    y_true = (test.labels == positive).astype(int)
    scores = model.scores(test.features)
    y_pred = model.predict(test.features)
    c = confusion(y_true, y_pred)
    values = {
        "accuracy": accuracy(c),
        "precision": precision(c),
        "recall": recall(c),
        "f1": f1(c),
        "g_mean": g_mean(c),
        "auc": auc_roc(y_true, scores),
    }
    flags = flags + tuple(f"zero_division:{name}" for name in zero_division_flags(c))
    return values, flags


def run_experiment(
    d: Dataset,
    plan: Optional[ResamplePlan],
    clf: ClassifierSpec,
    split: SplitSpec,
    seed: SeedSpec,
) -> ExperimentResult:
    """Evaluate one (resampler, classifier) pair under the split protocol.

    plan=None is the baseline condition (no resampling). Per-fold seed
    streams are derived from the fold index so fold work is
    scheduling-independent and the whole run is reproducible.
    """
    positive = d.minority_label()
    split_result = stratified_split(d, split, seed)
    if split.test_fraction is not None:
        folds = [split_result]
        mode = "holdout"
    else:
        folds = split_result
        mode = "cross_validation"

    per_fold: dict[str, list[float]] = {name: [] for name in METRIC_NAMES}
    all_flags: list[str] = []
    for fold_index, (train, test) in enumerate(folds):
        values, flags = _evaluate_fold(
            train, test, plan, clf, positive, seed.derive(fold_index)
        )
        for name in METRIC_NAMES:
            per_fold[name].append(values[name])
        all_flags.extend(f"fold{fold_index}:{f}" for f in flags)

    means = {name: float(np.mean(v)) for name, v in per_fold.items()}
    stds = {
        name: float(np.std(v, ddof=1)) if len(v) > 1 else 0.0
        for name, v in per_fold.items()
    }
    return ExperimentResult(
        mode=mode,
        n_folds=len(folds),
        fold_metrics={name: tuple(v) for name, v in per_fold.items()},
        means=means,
        stds=stds,
        flags=tuple(all_flags),
    )
