import numpy as np
import pytest

from qsmote.dataset import Dataset
from qsmote.dataio import SynthSpec, gen_gaussian_binary
from qsmote.errors import CapacityError, InvalidInputError
from qsmote.resample import (
    METHODS,
    ResamplePlan,
    adasyn,
    borderline_smote,
    enn_clean,
    qi_smote,
    random_oversample,
    random_undersample,
    resample,
    smote,
    smote_enn,
    smote_tomek,
    tomek_clean,
    _adasyn_allocation,
)
from qsmote.seeding import SeedSpec
from qsmote.statevector import NormBounds
from qsmote.vqe import VqeConfig


def one_d(points, labels):
    return Dataset(np.array(points, dtype=float).reshape(-1, 1), labels, ("x",))


def gaussian(n_majority, n_minority, n_features=3, seed=0):
    return gen_gaussian_binary(
        SynthSpec(
            n_majority=n_majority,
            n_minority=n_minority,
            n_features=n_features,
            seed=SeedSpec(seed),
        )
    )


def plan(method, **kw):
    kw.setdefault("seed", SeedSpec(7))
    return ResamplePlan(method=method, **kw)


def check_segment_property(d_in, d_out, report, atol=1e-9):
    """Every interpolation row must sit on the recorded parent segment."""
    for p in report.provenance:
        if p.kind != "interpolation" or p.row is None:
            continue
        x = d_out.features[p.parent]  # phase input is a prefix of the output
        z = d_out.features[p.neighbor]
        want = x + p.lam * (z - x)
        assert np.allclose(d_out.features[p.row], want, atol=atol)


# ------------------------------------------------------------------ smote


def test_smote_balances_exactly_and_keeps_originals():
    d = gaussian(40, 9, seed=3)
    out, report = smote(d, plan("smote"))
    assert out.class_counts() == {0: 40, 1: 40}
    assert report.n_synthetic == 31
    assert np.array_equal(out.features[: d.n_samples], d.features)
    assert np.array_equal(out.labels[: d.n_samples], d.labels)
    check_segment_property(d, out, report)


def test_smote_synthetic_count_override():
    d = gaussian(670, 30, seed=1)
    out, report = smote(d, plan("smote", target=100))
    assert report.n_synthetic == 100
    assert out.n_samples == 800
    assert out.class_counts() == {0: 670, 1: 130}


def test_smote_requires_two_minority():
    with pytest.raises(InvalidInputError):
        smote(one_d([0.0, 1.0, 2.0], [0, 0, 1]), plan("smote"))


def test_smote_coincident_parents_make_exact_copies():
    # x == z collapses the segment to a point for any lambda
    d = one_d([5.0, 5.0, 0.0, 1.0, 2.0], [1, 1, 0, 0, 0])
    out, report = smote(d, plan("smote", k_neighbors=1))
    assert report.n_synthetic == 1
    assert out.features[-1, 0] == 5.0


def test_smote_round_robin_spreads_parents():
    d = gaussian(26, 6, seed=5)
    out, report = smote(d, plan("smote"))
    parents = [p.parent for p in report.provenance]
    counts = {p: parents.count(p) for p in set(parents)}
    assert max(counts.values()) - min(counts.values()) <= 1


def test_smote_k_clamped_flag():
    d = one_d([0.0, 1.0, 10.0, 11.0, 12.0, 13.0], [1, 1, 0, 0, 0, 0])
    out, report = smote(d, plan("smote", k_neighbors=5))
    assert "k_clamped" in report.flags
    assert out.class_counts() == {0: 4, 1: 4}


def test_smote_determinism():
    d = gaussian(30, 8, seed=2)
    p = plan("smote", seed=SeedSpec(42))
    a, ra = smote(d, p)
    b, rb = smote(d, p)
    assert a.equals(b)
    assert ra == rb


def test_smote_does_not_mutate_input():
    d = gaussian(20, 5, seed=9)
    before = d.features.copy()
    smote(d, plan("smote"))
    assert np.array_equal(d.features, before)


# -------------------------------------------------------------- borderline


def test_borderline_single_danger_point_is_sole_parent():
    # minority: two deep points and one near the majority cluster (DANGER);
    # hand-checked 3-NN table puts m'=2 for the near point, m'=1 for the rest
    d = one_d(
        [0.0, 0.2, 5.0, 5.4, 5.6, 20.0, 21.0, 22.0, 23.0],
        [1, 1, 1, 0, 0, 0, 0, 0, 0],
    )
    out, report = borderline_smote(d, plan("borderline_smote", k_neighbors=3))
    parents = {p.parent for p in report.provenance}
    assert parents == {2}
    assert report.phase_counts["danger_seeds"] == 1
    assert out.class_counts() == {0: 6, 1: 6}
    check_segment_property(d, out, report)


def test_borderline_noise_point_never_seeds():
    d = one_d(
        [0.0, 0.2, 5.0, 50.0, 5.4, 5.6, 49.0, 50.5, 51.0, 52.0],
        [1, 1, 1, 1, 0, 0, 0, 0, 0, 0],
    )
    out, report = borderline_smote(d, plan("borderline_smote", k_neighbors=3))
    parents = {p.parent for p in report.provenance}
    assert 3 not in parents  # the isolated all-majority-neighborhood point
    assert parents == {2}


def test_borderline_empty_danger_falls_back_to_smote():
    d = one_d([0.0, 0.1, 0.2, 10.0, 10.1, 10.2, 10.3], [1, 1, 1, 0, 0, 0, 0])
    out, report = borderline_smote(d, plan("borderline_smote", k_neighbors=2))
    assert "fallback_smote" in report.flags
    assert report.method == "borderline_smote"
    assert out.class_counts() == {0: 4, 1: 4}


# ----------------------------------------------------------------- adasyn


def test_adasyn_allocation_matches_hand_arithmetic():
    alloc, adjusted = _adasyn_allocation(np.array([0.6, 0.2, 0.2]), 10)
    assert list(alloc) == [6, 2, 2]
    assert not adjusted


def test_adasyn_allocation_corrects_rounding_total():
    alloc, adjusted = _adasyn_allocation(np.array([0.5, 0.5]), 3)
    assert alloc.sum() == 3
    assert adjusted
    # half-up rounds both shares to 2; the correction walks the seeds in
    # (share desc, index asc) order, so the first seed gives one back
    assert list(alloc) == [1, 2]


def test_adasyn_all_difficulty_on_one_seed():
    # k=2: clustered minority rows have all-minority neighborhoods (r=0);
    # the isolated minority row is surrounded by majority (r=1)
    d = one_d(
        [0.0, 0.1, 0.2, 50.0, 49.5, 50.5, 51.0, 52.0, 53.0, 54.0],
        [1, 1, 1, 1, 0, 0, 0, 0, 0, 0],
    )
    out, report = adasyn(d, plan("adasyn", k_neighbors=2))
    parents = [p.parent for p in report.provenance]
    assert parents == [3, 3]  # G = 2, both from the hard row
    assert out.class_counts() == {0: 6, 1: 6}
    check_segment_property(d, out, report)


def test_adasyn_uniform_difficulty_splits_evenly():
    d = one_d([0.0, 10.0, 1.0, 11.0, 100.0, 101.0], [1, 1, 0, 0, 0, 0])
    out, report = adasyn(d, plan("adasyn", k_neighbors=1))
    alloc = report.phase_counts["allocation"]
    assert alloc == {0: 1, 1: 1}
    assert out.class_counts() == {0: 4, 1: 4}


def test_adasyn_zero_difficulty_falls_back():
    d = one_d([0.0, 0.1, 0.2, 10.0, 10.1, 10.2, 10.3], [1, 1, 1, 0, 0, 0, 0])
    out, report = adasyn(d, plan("adasyn", k_neighbors=2))
    assert "fallback_smote" in report.flags
    assert out.class_counts() == {0: 4, 1: 4}


# ------------------------------------------------------------------- ros


def test_ros_balanced_input_adds_nothing():
    d = one_d([0.0, 1.0, 2.0, 3.0], [1, 1, 0, 0])
    out, report = random_oversample(d, plan("ros"))
    assert out.equals(d)
    assert report.n_synthetic == 0


def test_ros_single_minority_forced_copies():
    d = one_d([7.0, 0.0, 1.0, 2.0, 3.0, 4.0], [1, 0, 0, 0, 0, 0])
    out, report = random_oversample(d, plan("ros"))
    assert report.n_synthetic == 4
    assert np.all(out.features[6:] == 7.0)
    assert all(p.kind == "duplicate" and p.lam == 0.0 for p in report.provenance)


def test_ros_deterministic_multiset():
    d = gaussian(25, 10, seed=4)
    p = plan("ros", seed=SeedSpec(5))
    a, ra = random_oversample(d, p)
    b, rb = random_oversample(d, p)
    assert a.equals(b)
    assert [x.parent for x in ra.provenance] == [x.parent for x in rb.provenance]


# ------------------------------------------------------------------- rus


def test_rus_balances_and_never_touches_minority():
    d = gaussian(100, 30, seed=6)
    out, report = random_undersample(d, plan("rus"))
    assert out.class_counts() == {0: 30, 1: 30}
    assert report.n_removed == 70
    kept_minority = out.features[out.labels == 1]
    assert np.array_equal(kept_minority, d.features[d.labels == 1])


def test_rus_balanced_input_removes_nothing():
    d = one_d([0.0, 1.0, 2.0, 3.0], [1, 1, 0, 0])
    out, report = random_undersample(d, plan("rus"))
    assert out.equals(d)
    assert report.n_removed == 0


def test_rus_rejects_target_override():
    with pytest.raises(InvalidInputError):
        random_undersample(gaussian(10, 4), plan("rus", target=3))


# ---------------------------------------------------------------- cleaners


def test_enn_removes_only_the_mislabeled_point():
    d = one_d(
        [0.0, 0.1, 0.2, 10.05, 10.0, 10.1, 10.2],
        [1, 1, 1, 1, 0, 0, 0],
    )
    cleaned, removed = enn_clean(d)
    assert removed == (3,)
    assert cleaned.n_samples == 6


def test_enn_single_class_untouched():
    d = one_d([0.0, 1.0, 2.0, 3.0, 4.0], [0, 0, 0, 0, 0])
    cleaned, removed = enn_clean(d)
    assert removed == ()
    assert cleaned.equals(d)


def test_enn_needs_four_samples():
    with pytest.raises(InvalidInputError):
        enn_clean(one_d([0.0, 1.0, 2.0], [0, 0, 1]))


def test_tomek_single_interleaved_pair():
    d = one_d([0.0, 0.4, 1.0, 5.0], [0, 1, 0, 1])
    cleaned, removed = tomek_clean(d)
    assert removed == (0,)  # the majority member of the mutual pair
    assert cleaned.n_samples == 3


def test_tomek_separated_clusters_have_no_links():
    d = one_d([0.0, 0.1, 10.0, 10.1], [1, 1, 0, 0])
    cleaned, removed = tomek_clean(d)
    assert removed == ()
    assert cleaned.equals(d)


def test_tomek_single_class_no_links():
    d = one_d([0.0, 1.0, 2.0], [0, 0, 0])
    _, removed = tomek_clean(d)
    assert removed == ()


# ------------------------------------------------------------ combinations


def test_smote_enn_equals_smote_when_cleaner_removes_nothing():
    # far-separated clusters: ENN finds nothing to remove after balancing
    d = one_d([0.0, 0.1, 0.2, 10.0, 10.1, 10.2, 10.3, 10.4], [1, 1, 1, 0, 0, 0, 0, 0])
    combo, report = smote_enn(d, plan("smote_enn", seed=SeedSpec(3)))
    plain, _ = smote(d, plan("smote", seed=SeedSpec(3)))
    assert combo.equals(plain)
    assert report.n_removed == 0


def test_smote_enn_removes_overlapping_synthetic():
    # one minority row sits inside the majority cluster, so interpolation
    # from it lands in majority territory and the vote removes rows
    d = one_d(
        [0.0, 0.1, 10.05, 10.0, 10.1, 10.2, 10.3, 10.4],
        [1, 1, 1, 0, 0, 0, 0, 0],
    )
    combo, report = smote_enn(d, plan("smote_enn", seed=SeedSpec(1)))
    assert report.n_removed > 0
    assert report.phase_counts["removed_by_cleaner"] == report.n_removed
    assert combo.n_samples == 8 + report.phase_counts["generated_by_oversampler"] - report.n_removed
    # surviving synthetic rows keep valid positions
    for p in report.provenance:
        if p.row is not None:
            assert p.row < combo.n_samples


def test_smote_tomek_bookkeeping():
    d = gaussian(30, 10, seed=8)
    combo, report = smote_tomek(d, plan("smote_tomek", seed=SeedSpec(2)))
    assert report.phase_counts["generated_by_oversampler"] == 20
    assert report.n_removed == report.phase_counts["removed_by_cleaner"]
    assert combo.n_samples == 40 + 20 - report.n_removed
    counts = report.phase_counts["after_oversampling"]
    assert counts == {"0": 30, "1": 30}  # balanced before cleaning


# ---------------------------------------------------------------- qi_smote


def test_qi_smote_desk_benchmark_shape():
    d = gaussian(670, 30, seed=11)
    out, report = qi_smote(d, plan("qi_smote", target=100, seed=SeedSpec(13)))
    assert out.n_samples == 700 + 30 + 100
    assert report.n_synthetic == 130
    assert report.phase_counts == {
        "quantum_derived": 30,
        "after_quantum": {"0": 670, "1": 60},
        "interpolated": 100,
    }
    # majority untouched, minority-labeled non-original rows = 130
    assert np.array_equal(out.features[:700], d.features)
    assert int(np.sum(out.labels[700:] == 1)) == 130
    check_segment_property(d, out, report)


def test_qi_smote_quantum_rows_stay_inside_bounds():
    d = gaussian(50, 6, seed=14)
    bounds = NormBounds.from_features(d.features)
    out, report = qi_smote(d, plan("qi_smote"))
    for p in report.provenance:
        if p.kind == "quantum":
            row = out.features[p.row]
            assert np.all(row >= bounds.mins - 1e-12)
            assert np.all(row <= bounds.maxs + 1e-12)


def test_qi_smote_audit_energy_never_increases():
    d = gaussian(40, 5, seed=15)
    _, report = qi_smote(d, plan("qi_smote"))
    assert len(report.quantum_audit) == 5
    for audit in report.quantum_audit:
        assert audit.final_energy <= audit.initial_energy + 1e-15
        assert audit.evaluations <= 100


def test_qi_smote_balanced_input_ends_equal():
    d = gaussian(12, 12, seed=16)
    out, report = qi_smote(d, plan("qi_smote"))
    counts = out.class_counts()
    assert counts[0] == counts[1]
    assert "quantum_overshoot" in report.flags
    assert report.phase_counts["quantum_derived"] == 12
    assert report.n_removed == 0


def test_qi_smote_default_target_balances_exactly():
    d = gaussian(60, 11, seed=17)
    out, _ = qi_smote(d, plan("qi_smote"))
    counts = out.class_counts()
    assert counts[0] == counts[1] == 60


def test_qi_smote_ising_mode_runs():
    d = gaussian(25, 6, seed=18)
    out, report = qi_smote(
        d, plan("qi_smote", hamiltonian_mode="ising", vqe=VqeConfig(max_iterations=40))
    )
    assert out.class_counts()[0] == out.class_counts()[1]
    assert len(report.quantum_audit) == 6


def test_qi_smote_feature_cap():
    d = gaussian(10, 4, n_features=5, seed=19)
    with pytest.raises(CapacityError):
        qi_smote(d, plan("qi_smote"), qubit_cap=4)


def test_qi_smote_determinism():
    d = gaussian(30, 6, seed=20)
    p = plan("qi_smote", seed=SeedSpec(77))
    a, ra = qi_smote(d, p)
    b, rb = qi_smote(d, p)
    assert a.equals(b)
    assert ra == rb


# ------------------------------------------------------------- dispatcher


def test_dispatcher_covers_all_methods_and_balances():
    d = gaussian(40, 10, seed=21)
    for method in METHODS:
        out, report = resample(d, plan(method))
        counts = out.class_counts()
        assert report.class_counts_after == counts
        if method in ("smote", "borderline_smote", "adasyn", "ros", "rus", "qi_smote"):
            assert counts[0] == counts[1]
        if method in ("smote", "borderline_smote", "adasyn", "ros", "qi_smote"):
            # pure oversamplers keep every original row unchanged, in order
            assert np.array_equal(out.features[: d.n_samples], d.features)
            assert np.array_equal(out.labels[: d.n_samples], d.labels)
        if method in ("smote_enn", "smote_tomek"):
            mid = report.phase_counts["after_oversampling"]
            assert mid["0"] == mid["1"]


def test_plan_validation():
    with pytest.raises(InvalidInputError):
        ResamplePlan(method="nope")
    with pytest.raises(InvalidInputError):
        ResamplePlan(method="smote", k_neighbors=0)
    with pytest.raises(InvalidInputError):
        ResamplePlan(method="smote", target=-1)


def test_neighbor_ties_break_toward_lower_row_index():
    # rows 1 and 2 are equidistant minority neighbors of row 0; with k=1
    # every synthetic from parent 0 must use the lower-indexed row 1
    d = one_d([0.0, 1.0, -1.0, 9.0, 9.5, 10.0, 10.5, 11.0], [1, 1, 1, 0, 0, 0, 0, 0])
    out, report = smote(d, plan("smote", k_neighbors=1))
    for p in report.provenance:
        if p.parent == 0:
            assert p.neighbor == 1


def test_interleaved_labels_are_handled():
    # labels not grouped: indices must be tracked, not assumed contiguous
    gen = SeedSpec(22).generator()
    X = gen.random((20, 2))
    y = np.array([0, 1] * 4 + [0] * 12)
    d = Dataset(X, y, ("a", "b"))
    out, report = smote(d, plan("smote"))
    assert out.class_counts() == {0: 16, 1: 16}
    for p in report.provenance:
        assert d.labels[p.parent] == 1
        assert d.labels[p.neighbor] == 1
