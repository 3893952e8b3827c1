"""Resampling methods behind one uniform (Dataset, plan) -> (Dataset, report)
contract: quantum-evolved oversampling, the classical SMOTE family, random
over/under-sampling, and the two cleaner combinations.

Determinism rules shared by every method:
- neighbor searches use squared Euclidean distance with ties broken by the
  lower row index;
- every random draw comes from the plan's seed (sub-streams are derived for
  per-sample work), so identical (dataset, plan) pairs give bit-identical
  outputs;
- inputs are never mutated and original rows are never reordered.
"""
from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Optional

import numpy as np

from .dataset import Dataset
from .errors import CapacityError, DegenerateStateError, InvalidInputError
from .seeding import SeedSpec
from .statevector import (
    DEFAULT_QUBIT_CAP,
    NormBounds,
    StateVector,
    decode_state_to_features,
    encode_sample,
    real_part_renormalized,
)
from .vqe import (
    ISING,
    OUTER_PRODUCT,
    VqeConfig,
    build_ising_hamiltonian,
    build_outer_product_hamiltonian,
    minimize,
)

QI_SMOTE = "qi_smote"
SMOTE = "smote"
BORDERLINE_SMOTE = "borderline_smote"
ADASYN = "adasyn"
ROS = "ros"
RUS = "rus"
SMOTE_ENN = "smote_enn"
SMOTE_TOMEK = "smote_tomek"

METHODS = (QI_SMOTE, SMOTE, BORDERLINE_SMOTE, ADASYN, ROS, RUS, SMOTE_ENN, SMOTE_TOMEK)

# stream tags for derived seeds inside qi_smote
_TAG_QUANTUM = 1
_TAG_SMOTE_PHASE = 2


@dataclass(frozen=True)
class ResamplePlan:
    method: str
    k_neighbors: int = 5
    target: Optional[int] = None  # None = equalize class counts
    seed: SeedSpec = SeedSpec(0)
    vqe: VqeConfig = field(default_factory=VqeConfig)
    hamiltonian_mode: str = OUTER_PRODUCT

    def __post_init__(self):
        if self.method not in METHODS:
            raise InvalidInputError(f"unknown method {self.method!r}")
        if self.k_neighbors < 1:
            raise InvalidInputError("k_neighbors must be at least 1")
        if self.target is not None and self.target < 0:
            raise InvalidInputError("target must be non-negative")
        if self.hamiltonian_mode not in (OUTER_PRODUCT, ISING):
            raise InvalidInputError(f"unknown hamiltonian mode {self.hamiltonian_mode!r}")


@dataclass(frozen=True)
class Provenance:
    """Origin of one synthetic row.

    `parent` and `neighbor` index rows of the dataset the generating phase
    ran on (the input dataset, or for the interpolation phase of qi_smote
    the combined originals+quantum prefix of the output). `row` is the
    position in the returned dataset, or None when a cleaner removed it.
    """

    kind: str  # "interpolation" | "duplicate" | "quantum"
    row: Optional[int]
    parent: int
    neighbor: int
    lam: Optional[float]

    def to_dict(self) -> dict:
        return {
            "kind": self.kind,
            "row": self.row,
            "parent": self.parent,
            "neighbor": self.neighbor,
            "lam": self.lam,
        }


@dataclass(frozen=True)
class QuantumSampleAudit:
    source_row: int
    initial_energy: float
    final_energy: float
    evaluations: int
    degenerate_fallback: bool

    def to_dict(self) -> dict:
        return {
            "source_row": self.source_row,
            "initial_energy": self.initial_energy,
            "final_energy": self.final_energy,
            "evaluations": self.evaluations,
            "degenerate_fallback": self.degenerate_fallback,
        }


@dataclass(frozen=True)
class ResampleReport:
    method: str
    n_synthetic: int  # synthetic rows present in the returned dataset
    n_removed: int
    class_counts_before: dict[int, int]
    class_counts_after: dict[int, int]
    provenance: tuple[Provenance, ...]
    quantum_audit: Optional[tuple[QuantumSampleAudit, ...]] = None
    flags: tuple[str, ...] = ()
    phase_counts: Optional[dict] = None

    def to_dict(self) -> dict:
        return {
            "method": self.method,
            "n_synthetic": self.n_synthetic,
            "n_removed": self.n_removed,
            "class_counts_before": {str(k): v for k, v in self.class_counts_before.items()},
            "class_counts_after": {str(k): v for k, v in self.class_counts_after.items()},
            "provenance": [p.to_dict() for p in self.provenance],
            "quantum_audit": None
            if self.quantum_audit is None
            else [q.to_dict() for q in self.quantum_audit],
            "flags": list(self.flags),
            "phase_counts": self.phase_counts,
        }


def _neighbor_table(
    X: np.ndarray, queries: np.ndarray, candidates: np.ndarray, k: int
) -> dict[int, np.ndarray]:
    """k nearest candidate rows per query row (self excluded).

    `candidates` must be ascending so that stable sorting of equal squared
    distances resolves ties toward the lower row index.
    """
    d2 = ((X[queries][:, None, :] - X[candidates][None, :, :]) ** 2).sum(axis=2)
    table: dict[int, np.ndarray] = {}
    for row, dists in zip(queries, d2):
        order = np.argsort(dists, kind="stable")
        picked = candidates[order]
        picked = picked[picked != row][:k]
        table[int(row)] = picked
    return table


def _class_indices(d: Dataset, label: int) -> np.ndarray:
    return np.flatnonzero(d.labels == label)


def _clamped_k(k: int, pool: int) -> tuple[int, bool]:
    if pool < 1:
        raise InvalidInputError("no neighbors available for interpolation")
    return (pool, True) if k > pool else (k, False)


def _append_rows(d: Dataset, rows: list[np.ndarray], labels: list[int]) -> Dataset:
    if not rows:
        return d.rows(np.arange(d.n_samples))
    feats = np.vstack([d.features, np.array(rows)])
    labs = np.concatenate([d.labels, np.array(labels, dtype=np.uint8)])
    return Dataset(feats, labs, d.feature_names)


def _interpolate(
    d: Dataset,
    parents: list[int],
    tables: dict[int, np.ndarray],
    gen: np.random.Generator,
    synth_label: int,
) -> tuple[Dataset, list[Provenance]]:
    """Emit one row per parent: x + lam*(z - x), z uniform among neighbors.

    RNG consumption per row is one integer (neighbor pick) then one uniform
    (lam), in parent order.
    """
    X = d.features
    rows, prov = [], []
    base = d.n_samples
    for offset, parent in enumerate(parents):
        nbrs = tables[int(parent)]
        z = int(nbrs[int(gen.integers(len(nbrs)))])
        lam = float(gen.random())
        rows.append(X[parent] + lam * (X[z] - X[parent]))
        prov.append(
            Provenance(
                kind="interpolation",
                row=base + offset,
                parent=int(parent),
                neighbor=z,
                lam=lam,
            )
        )
    return _append_rows(d, rows, [synth_label] * len(rows)), prov


def _require_min_minority(n_min: int) -> None:
    if n_min < 2:
        raise InvalidInputError("need at least 2 minority samples")


def smote(d: Dataset, plan: ResamplePlan) -> tuple[Dataset, ResampleReport]:
    """Classic minority interpolation toward k nearest minority neighbors.

    Parents cycle round-robin over a seeded shuffle of the minority rows, so
    per-parent synthetic counts differ by at most one.
    """
    counts = d.class_counts()
    minority = d.minority_label()
    min_idx = _class_indices(d, minority)
    _require_min_minority(min_idx.size)
    gap = counts[1 - minority] - counts[minority]
    n_new = gap if plan.target is None else plan.target
    k, clamped = _clamped_k(plan.k_neighbors, min_idx.size - 1)
    flags = ("k_clamped",) if clamped else ()

    gen = plan.seed.generator()
    order = gen.permutation(min_idx)
    parents = [int(order[t % min_idx.size]) for t in range(n_new)]
    tables = _neighbor_table(d.features, min_idx, min_idx, k) if n_new else {}
    out, prov = _interpolate(d, parents, tables, gen, minority)
    report = ResampleReport(
        method=plan.method,
        n_synthetic=n_new,
        n_removed=0,
        class_counts_before=counts,
        class_counts_after=out.class_counts(),
        provenance=tuple(prov),
        flags=flags,
    )
    return out, report


def _difficulty(d: Dataset, plan: ResamplePlan) -> tuple[np.ndarray, np.ndarray, int]:
    """Per-minority-row majority-neighbor counts over the whole dataset."""
    minority = d.minority_label()
    min_idx = _class_indices(d, minority)
    _require_min_minority(min_idx.size)
    k_all, _ = _clamped_k(plan.k_neighbors, d.n_samples - 1)
    all_idx = np.arange(d.n_samples)
    tables = _neighbor_table(d.features, min_idx, all_idx, k_all)
    m_prime = np.array(
        [int(np.sum(d.labels[tables[int(i)]] != minority)) for i in min_idx]
    )
    return min_idx, m_prime, k_all


def borderline_smote(d: Dataset, plan: ResamplePlan) -> tuple[Dataset, ResampleReport]:
    """Interpolation seeded only from danger-zone minority rows.

    A minority row with m' majority neighbors among its k nearest (over all
    rows) is DANGER when k/2 <= m' < k, NOISE when m' = k, SAFE otherwise;
    only DANGER rows seed synthesis. An empty danger set falls back to plain
    interpolation, flagged in the report.
    """
    counts = d.class_counts()
    minority = d.minority_label()
    min_idx, m_prime, k_all = _difficulty(d, plan)
    danger = min_idx[(m_prime >= k_all / 2.0) & (m_prime < k_all)]
    if danger.size == 0:
        out, report = smote(d, plan)
        return out, replace(
            report, method=plan.method, flags=report.flags + ("fallback_smote",)
        )
    gap = counts[1 - minority] - counts[minority]
    n_new = gap if plan.target is None else plan.target
    k, clamped = _clamped_k(plan.k_neighbors, min_idx.size - 1)
    flags = ("k_clamped",) if clamped else ()

    gen = plan.seed.generator()
    order = gen.permutation(danger)
    parents = [int(order[t % danger.size]) for t in range(n_new)]
    tables = _neighbor_table(d.features, danger, min_idx, k) if n_new else {}
    out, prov = _interpolate(d, parents, tables, gen, minority)
    report = ResampleReport(
        method=plan.method,
        n_synthetic=n_new,
        n_removed=0,
        class_counts_before=counts,
        class_counts_after=out.class_counts(),
        provenance=tuple(prov),
        flags=flags,
        phase_counts={"danger_seeds": int(danger.size)},
    )
    return out, report


def _adasyn_allocation(r_hat: np.ndarray, n_new: int) -> tuple[np.ndarray, bool]:
    """Round-half-up allocation of n_new across seeds, corrected so the
    total is exact (largest shares first, lower index on ties)."""
    raw = r_hat * n_new
    alloc = np.floor(raw + 0.5).astype(int)
    residual = n_new - int(alloc.sum())
    if residual == 0:
        return alloc, False
    order = np.lexsort((np.arange(r_hat.size), -r_hat))
    step = 1 if residual > 0 else -1
    remaining = abs(residual)
    pos = 0
    while remaining > 0:
        i = order[pos % order.size]
        if step > 0 or alloc[i] > 0:
            alloc[i] += step
            remaining -= 1
        pos += 1
    return alloc, True


def adasyn(d: Dataset, plan: ResamplePlan) -> tuple[Dataset, ResampleReport]:
    """Density-adaptive interpolation: harder minority rows seed more rows.

    r_i is the fraction of majority rows among the k nearest neighbors of
    minority row i over the whole dataset; seeds receive round(r_i/sum(r) * G)
    synthetic rows (corrected to sum exactly). All-zero difficulty falls
    back to plain interpolation, flagged.
    """
    counts = d.class_counts()
    minority = d.minority_label()
    min_idx, m_prime, k_all = _difficulty(d, plan)
    r = m_prime / k_all
    if r.sum() == 0:
        out, report = smote(d, plan)
        return out, replace(
            report, method=plan.method, flags=report.flags + ("fallback_smote",)
        )
    gap = counts[1 - minority] - counts[minority]
    n_new = gap if plan.target is None else plan.target
    r_hat = r / r.sum()
    alloc, adjusted = _adasyn_allocation(r_hat, n_new)
    k, clamped = _clamped_k(plan.k_neighbors, min_idx.size - 1)
    flags = ("k_clamped",) if clamped else ()
    if adjusted:
        flags = flags + ("allocation_adjusted",)

    gen = plan.seed.generator()
    parents = [int(i) for i, g in zip(min_idx, alloc) for _ in range(g)]
    seeds_used = np.array(sorted({p for p in parents}), dtype=int)
    tables = _neighbor_table(d.features, seeds_used, min_idx, k) if parents else {}
    out, prov = _interpolate(d, parents, tables, gen, minority)
    report = ResampleReport(
        method=plan.method,
        n_synthetic=n_new,
        n_removed=0,
        class_counts_before=counts,
        class_counts_after=out.class_counts(),
        provenance=tuple(prov),
        flags=flags,
        phase_counts={"allocation": {int(i): int(g) for i, g in zip(min_idx, alloc)}},
    )
    return out, report


def random_oversample(d: Dataset, plan: ResamplePlan) -> tuple[Dataset, ResampleReport]:
    """Duplicate seeded-random minority rows until the classes are equal."""
    counts = d.class_counts()
    minority = d.minority_label()
    min_idx = _class_indices(d, minority)
    if min_idx.size < 1:
        raise InvalidInputError("no minority samples to duplicate")
    gap = counts[1 - minority] - counts[minority]
    n_new = gap if plan.target is None else plan.target
    gen = plan.seed.generator()
    sources = gen.choice(min_idx, size=n_new, replace=True) if n_new else np.empty(0, int)
    rows = [d.features[int(s)] for s in sources]
    out = _append_rows(d, rows, [minority] * len(rows))
    prov = tuple(
        Provenance(
            kind="duplicate",
            row=d.n_samples + t,
            parent=int(s),
            neighbor=int(s),
            lam=0.0,
        )
        for t, s in enumerate(sources)
    )
    report = ResampleReport(
        method=plan.method,
        n_synthetic=n_new,
        n_removed=0,
        class_counts_before=counts,
        class_counts_after=out.class_counts(),
        provenance=prov,
    )
    return out, report


def random_undersample(d: Dataset, plan: ResamplePlan) -> tuple[Dataset, ResampleReport]:
    """Remove seeded-random majority rows until the classes are equal."""
    if plan.target is not None:
        raise InvalidInputError("rus supports only the equalize target")
    counts = d.class_counts()
    minority = d.minority_label()
    maj_idx = _class_indices(d, 1 - minority)
    if maj_idx.size < 1:
        raise InvalidInputError("no majority samples to remove")
    gap = counts[1 - minority] - counts[minority]
    gen = plan.seed.generator()
    removed = np.sort(gen.permutation(maj_idx)[:gap])
    mask = np.ones(d.n_samples, dtype=bool)
    mask[removed] = False
    out = d.rows(np.flatnonzero(mask))
    report = ResampleReport(
        method=plan.method,
        n_synthetic=0,
        n_removed=int(gap),
        class_counts_before=counts,
        class_counts_after=out.class_counts(),
        provenance=(),
    )
    return out, report


def enn_clean(d: Dataset) -> tuple[Dataset, tuple[int, ...]]:
    """Drop every row whose 3 nearest neighbors out-vote its label.

    Votes are computed on the unmodified input and removals applied
    atomically, so removal of one row never changes another's vote.
    """
    if d.n_samples < 4:
        raise InvalidInputError("need at least 4 samples for the 3-neighbor vote")
    all_idx = np.arange(d.n_samples)
    tables = _neighbor_table(d.features, all_idx, all_idx, 3)
    removed = []
    for i in all_idx:
        vote = 1 if int(d.labels[tables[int(i)]].sum()) >= 2 else 0
        if vote != int(d.labels[i]):
            removed.append(int(i))
    mask = np.ones(d.n_samples, dtype=bool)
    mask[removed] = False
    return d.rows(np.flatnonzero(mask)), tuple(removed)


def tomek_clean(d: Dataset) -> tuple[Dataset, tuple[int, ...]]:
    """Drop the majority member of every opposite-label mutual-NN pair."""
    if d.n_samples < 2:
        raise InvalidInputError("need at least 2 samples")
    all_idx = np.arange(d.n_samples)
    tables = _neighbor_table(d.features, all_idx, all_idx, 1)
    nn = np.array([tables[int(i)][0] for i in all_idx])
    majority = d.majority_label()
    removed = set()
    for a in all_idx:
        b = int(nn[a])
        if a < b and nn[b] == a and d.labels[a] != d.labels[b]:
            removed.add(a if d.labels[a] == majority else b)
    removed_sorted = tuple(sorted(removed))
    mask = np.ones(d.n_samples, dtype=bool)
    mask[list(removed_sorted)] = False
    return d.rows(np.flatnonzero(mask)), removed_sorted


def _smote_then_clean(
    d: Dataset, plan: ResamplePlan, cleaner
) -> tuple[Dataset, ResampleReport]:
    oversampled, report = smote(d, plan)
    cleaned, removed = cleaner(oversampled)
    removed_set = set(removed)
    # remap surviving rows to their post-cleaning positions
    new_pos = {}
    pos = 0
    for old in range(oversampled.n_samples):
        if old not in removed_set:
            new_pos[old] = pos
            pos += 1
    prov = tuple(
        replace(p, row=new_pos.get(p.row)) for p in report.provenance
    )
    surviving_synth = sum(1 for p in prov if p.row is not None)
    combined = ResampleReport(
        method=plan.method,
        n_synthetic=surviving_synth,
        n_removed=len(removed),
        class_counts_before=report.class_counts_before,
        class_counts_after=cleaned.class_counts(),
        provenance=prov,
        flags=report.flags,
        phase_counts={
            "generated_by_oversampler": report.n_synthetic,
            "after_oversampling": {str(k): v for k, v in report.class_counts_after.items()},
            "removed_by_cleaner": len(removed),
        },
    )
    return cleaned, combined


def smote_enn(d: Dataset, plan: ResamplePlan) -> tuple[Dataset, ResampleReport]:
    """Interpolate to balance, then apply the 3-neighbor vote cleaner."""
    return _smote_then_clean(d, plan, enn_clean)


def smote_tomek(d: Dataset, plan: ResamplePlan) -> tuple[Dataset, ResampleReport]:
    """Interpolate to balance, then drop mutual-NN overlap pairs."""
    return _smote_then_clean(d, plan, tomek_clean)


def qi_smote(
    d: Dataset, plan: ResamplePlan, qubit_cap: int = DEFAULT_QUBIT_CAP
) -> tuple[Dataset, ResampleReport]:
    """Quantum-evolved oversampling followed by classical interpolation.

    Phase 1 derives exactly one new minority row per existing minority row:
    encode the row's features into an entangled statevector, evolve it by
    minimizing the configured Hamiltonian's energy over the layered ansatz,
    take the real part (falling back to amplitude magnitudes when it
    vanishes, audited), and decode back through the feature bounds. Phase 2
    appends those rows and runs classical interpolation on the combined
    dataset until the class counts meet the target (default: exact
    equality, topping up whichever class is lighter). Rows are only ever
    appended; every derived row stays inside the fitted feature bounds.
    """
    if d.n_features > qubit_cap:
        raise CapacityError(
            f"{d.n_features} features exceed the {qubit_cap}-qubit cap"
        )
    counts = d.class_counts()
    minority = d.minority_label()
    min_idx = _class_indices(d, minority)
    _require_min_minority(min_idx.size)

    bounds = NormBounds.from_features(d.features)
    shared_h = (
        build_ising_hamiltonian(d.rows(min_idx), bounds)
        if plan.hamiltonian_mode == ISING
        else None
    )

    audits: list[QuantumSampleAudit] = []
    qrows: list[np.ndarray] = []
    prov: list[Provenance] = []
    for offset, i in enumerate(int(j) for j in min_idx):
        psi = encode_sample(d.features[i], bounds, cap=qubit_cap)
        h = shared_h if shared_h is not None else build_outer_product_hamiltonian(psi)
        outcome = minimize(h, d.n_features, plan.vqe, plan.seed.derive(_TAG_QUANTUM, i))
        degenerate = False
        try:
            evolved = real_part_renormalized(outcome.evolved_state)
        except DegenerateStateError:
            mags = np.abs(outcome.evolved_state.amplitudes)
            evolved = StateVector(d.n_features, (mags / np.linalg.norm(mags)).astype(complex))
            degenerate = True
        qrows.append(decode_state_to_features(evolved, bounds))
        prov.append(
            Provenance(
                kind="quantum",
                row=d.n_samples + offset,
                parent=i,
                neighbor=i,
                lam=None,
            )
        )
        audits.append(
            QuantumSampleAudit(
                source_row=i,
                initial_energy=outcome.energy_trace[0],
                final_energy=outcome.best_energy,
                evaluations=outcome.evaluations,
                degenerate_fallback=degenerate,
            )
        )

    combined = _append_rows(d, qrows, [minority] * len(qrows))
    mid_counts = combined.class_counts()
    flags: tuple[str, ...] = ()
    if mid_counts[minority] > mid_counts[1 - minority]:
        flags = ("quantum_overshoot",)

    gap = abs(mid_counts[0] - mid_counts[1])
    n_new = gap if plan.target is None else plan.target
    if n_new > 0:
        phase_plan = ResamplePlan(
            method=SMOTE,
            k_neighbors=plan.k_neighbors,
            target=n_new,
            seed=plan.seed.derive(_TAG_SMOTE_PHASE),
        )
        out, phase_report = smote(combined, phase_plan)
        prov.extend(phase_report.provenance)
        flags = flags + phase_report.flags
    else:
        out = combined

    report = ResampleReport(
        method=plan.method,
        n_synthetic=len(qrows) + n_new,
        n_removed=0,
        class_counts_before=counts,
        class_counts_after=out.class_counts(),
        provenance=tuple(prov),
        quantum_audit=tuple(audits),
        flags=flags,
        phase_counts={
            "quantum_derived": len(qrows),
            "after_quantum": {str(k): v for k, v in mid_counts.items()},
            "interpolated": n_new,
        },
    )
    return out, report


_DISPATCH = {
    QI_SMOTE: qi_smote,
    SMOTE: smote,
    BORDERLINE_SMOTE: borderline_smote,
    ADASYN: adasyn,
    ROS: random_oversample,
    RUS: random_undersample,
    SMOTE_ENN: smote_enn,
    SMOTE_TOMEK: smote_tomek,
}


def resample(d: Dataset, plan: ResamplePlan) -> tuple[Dataset, ResampleReport]:
    """Run the plan's method on the dataset."""
    return _DISPATCH[plan.method](d, plan)
