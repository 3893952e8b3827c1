"""Array-in/array-out bridge to the qsmote core.

Two functions, zero numerics: marshal numpy arrays and flat config mappings
into the core's value types, delegate, and unmarshal the results. Identical
(data, config, seed) triples therefore produce byte-for-byte the same rows
as the command-line interface, which runs the same code path.
"""
from __future__ import annotations

from typing import Mapping, Optional

import numpy as np

from qsmote import (
    ClassifierSpec,
    Dataset,
    ResamplePlan,
    SeedSpec,
    SplitSpec,
    VqeConfig,
    run_experiment,
    resample,
)

__all__ = ["bridge_resample", "bridge_evaluate"]
__version__ = "0.1.0"

_RESAMPLE_KEYS = {
    "method": None,
    "k_neighbors": 5,
    "target": None,
    "master_seed": 0,
    "stream_id": 0,
    "vqe_max_iterations": 100,
    "vqe_tolerance": 1e-6,
    "vqe_initial_params": "zeros",
    "vqe_optimizer": "cobyla_like",
    "hamiltonian_mode": "outer_product",
}

_CLASSIFIER_KEYS = {
    "kind": "knn",
    "k": 5,
    "learning_rate": 0.1,
    "epochs": 200,
    "l2": 1e-4,
    "standardize": True,
    "init_scale": 0.0,
}


def _reject_unknown(cfg: Mapping, allowed: Mapping, what: str) -> None:
    unknown = sorted(set(cfg) - set(allowed))
    if unknown:
        raise ValueError(f"unknown {what} keys: {', '.join(unknown)}")


def _plan_from_config(cfg: Mapping) -> ResamplePlan:
    _reject_unknown(cfg, _RESAMPLE_KEYS, "config")
    merged = {**_RESAMPLE_KEYS, **cfg}
    if merged["method"] is None:
        raise ValueError("config needs a 'method'")
    return ResamplePlan(
        method=merged["method"],
        k_neighbors=int(merged["k_neighbors"]),
        target=None if merged["target"] is None else int(merged["target"]),
        seed=SeedSpec(int(merged["master_seed"]), int(merged["stream_id"])),
        vqe=VqeConfig(
            max_iterations=int(merged["vqe_max_iterations"]),
            tolerance=float(merged["vqe_tolerance"]),
            initial_params=merged["vqe_initial_params"],
            optimizer=merged["vqe_optimizer"],
        ),
        hamiltonian_mode=merged["hamiltonian_mode"],
    )


def _dataset_from_arrays(features, labels, feature_names=None) -> Dataset:
    feats = np.asarray(features, dtype=float)
    labs = np.asarray(labels)
    if feats.ndim != 2:
        raise ValueError("features must be a 2-D array")
    if labs.ndim != 1 or labs.shape[0] != feats.shape[0]:
        raise ValueError("labels must be 1-D with one entry per feature row")
    if labs.size and not np.all(np.isin(labs, (0, 1))):
        raise ValueError("labels must be binary (0/1)")
    names = feature_names or tuple(f"f{i}" for i in range(feats.shape[1]))
    return Dataset(feats, labs, names)


def bridge_resample(features, labels, cfg: Mapping, feature_names=None):
    """Resample (features, labels) under a flat config mapping.

    Returns (features', labels', report) where the arrays are row-aligned
    with the report's provenance (original rows first, generated rows in
    generation order) and the report is a plain JSON-ready mapping.
    """
    d = _dataset_from_arrays(features, labels, feature_names)
    out, report = resample(d, _plan_from_config(cfg))
    return out.features.copy(), out.labels.copy(), report.to_dict()


def bridge_evaluate(
    features,
    labels,
    cfg: Optional[Mapping],
    classifier_cfg: Optional[Mapping] = None,
    folds: int = 10,
    master_seed: Optional[int] = None,
):
    """Cross-validated evaluation; cfg=None is the no-resampling baseline.

    The split/classifier seed defaults to the config's master_seed (0 for
    the baseline) so one seed drives the whole run, exactly as in the CLI.
    """
    d = _dataset_from_arrays(features, labels)
    plan = None if cfg is None else _plan_from_config(cfg)
    classifier_cfg = dict(classifier_cfg or {})
    _reject_unknown(classifier_cfg, _CLASSIFIER_KEYS, "classifier config")
    spec = ClassifierSpec(**{**_CLASSIFIER_KEYS, **classifier_cfg})
    if master_seed is None:
        master_seed = int(cfg.get("master_seed", 0)) if cfg else 0
    result = run_experiment(
        d, plan, spec, SplitSpec(n_folds=int(folds)), SeedSpec(master_seed)
    )
    return result.to_dict()
