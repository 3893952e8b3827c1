"""Quantum-inspired oversampling toolkit for imbalanced binary datasets.

Provides the quantum-evolved oversampler (statevector feature encoding,
layered entanglement, variational energy minimization, classical
interpolation), the classical SMOTE-family baselines, minimal evaluation
classifiers, confusion-matrix metrics with an exact Wilcoxon signed-rank
test, seeded synthetic data generation, and a reproducible batch CLI.
"""

from .classify import ClassifierSpec, KnnClassifier, LogisticClassifier, knn_predict
from .dataset import (
    Dataset,
    ImbalanceReport,
    SplitSpec,
    imbalance_report,
    make_imbalanced,
    stratified_folds,
    stratified_split,
    train_test_split,
)
from .dataio import CsvSchema, SynthSpec, emit_scatter, gen_gaussian_binary, load_csv, save_csv
from .errors import CapacityError, DegenerateStateError, InvalidInputError
from .experiment import ExperimentResult, run_experiment
from .metrics import (
    ConfusionMatrix,
    WilcoxonResult,
    accuracy,
    auc_roc,
    confusion,
    f1,
    f1_from_pr,
    g_mean,
    improvement_pct,
    precision,
    recall,
    wilcoxon_signed_rank,
)
from .resample import (
    METHODS,
    ResamplePlan,
    ResampleReport,
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
)
from .seeding import SeedSpec
from .statevector import (
    EncodingAngles,
    NormBounds,
    StateVector,
    apply_cnot,
    apply_cz,
    apply_hadamard,
    apply_ry,
    apply_toffoli,
    decode_state_to_features,
    encode_sample,
    new_zero_state,
    normalize_features,
    qubit_marginals,
    real_part_renormalized,
)
from .vqe import (
    AnsatzParams,
    HamiltonianSpec,
    VqeConfig,
    VqeOutcome,
    ansatz_state,
    build_ising_hamiltonian,
    build_outer_product_hamiltonian,
    expectation,
    minimize,
)

__version__ = "0.1.0"
