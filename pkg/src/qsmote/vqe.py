"""Hamiltonian construction, the layered RY+CZ ansatz, and the
derivative-free energy minimizer that evolves encoded states.

Two Hamiltonian forms are supported: the projector onto a reference state
(energy = squared overlap with it) and a diagonal Ising form built from
feature statistics (energy = sum of pairwise couplings and per-qubit biases
in Pauli-Z expectations). Both are evaluated directly from amplitudes; no
dense operator is ever formed.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .dataset import Dataset
from .errors import InvalidInputError
from .seeding import SeedSpec
from .statevector import NormBounds, StateVector, apply_cz, apply_ry, new_zero_state

OUTER_PRODUCT = "outer_product"
ISING = "ising"


@dataclass(frozen=True)
class HamiltonianSpec:
    mode: str
    reference_state: Optional[StateVector] = None
    couplings: Optional[np.ndarray] = None  # symmetric, zero diagonal
    biases: Optional[np.ndarray] = None

    def __post_init__(self):
        if self.mode == OUTER_PRODUCT:
            if self.reference_state is None:
                raise InvalidInputError("outer_product mode needs a reference state")
        elif self.mode == ISING:
            w, b = self.couplings, self.biases
            if w is None or b is None:
                raise InvalidInputError("ising mode needs couplings and biases")
            w = np.array(w, dtype=float, copy=True)
            b = np.array(b, dtype=float, copy=True)
            if w.ndim != 2 or w.shape[0] != w.shape[1] or w.shape[0] != b.shape[0]:
                raise InvalidInputError("couplings must be square and match biases")
            if not np.allclose(w, w.T, atol=1e-12):
                raise InvalidInputError("couplings must be symmetric")
            if np.any(np.abs(np.diag(w)) > 1e-12):
                raise InvalidInputError("couplings must have a zero diagonal")
            w.setflags(write=False)
            b.setflags(write=False)
            object.__setattr__(self, "couplings", w)
            object.__setattr__(self, "biases", b)
        else:
            raise InvalidInputError(f"unknown hamiltonian mode {self.mode!r}")

    @property
    def n_qubits(self) -> int:
        if self.mode == OUTER_PRODUCT:
            return self.reference_state.n_qubits
        return self.biases.shape[0]


@dataclass(frozen=True)
class AnsatzParams:
    """Rotation angles, one block of n_qubits per layer."""

    theta: np.ndarray

    def __post_init__(self):
        theta = np.array(self.theta, dtype=float, copy=True)
        if theta.ndim != 1 or theta.size == 0:
            raise InvalidInputError("params must be a non-empty 1-D vector")
        theta.setflags(write=False)
        object.__setattr__(self, "theta", theta)


@dataclass(frozen=True)
class VqeConfig:
    max_iterations: int = 100  # total objective evaluations allowed
    tolerance: float = 1e-6
    initial_params: str = "zeros"  # "zeros" | "seeded_uniform"
    optimizer: str = "cobyla_like"  # "cobyla_like" | "nelder_mead"
    n_layers: int = 2
    step_begin: float = 0.5  # initial trust radius / simplex edge

    def __post_init__(self):
        if self.max_iterations < 1:
            raise InvalidInputError("max_iterations must be at least 1")
        if self.tolerance <= 0:
            raise InvalidInputError("tolerance must be positive")
        if self.initial_params not in ("zeros", "seeded_uniform"):
            raise InvalidInputError(f"unknown initial_params {self.initial_params!r}")
        if self.optimizer not in ("cobyla_like", "nelder_mead"):
            raise InvalidInputError(f"unknown optimizer {self.optimizer!r}")
        if self.n_layers < 1:
            raise InvalidInputError("n_layers must be at least 1")


@dataclass(frozen=True)
class VqeOutcome:
    best_params: AnsatzParams
    best_energy: float
    evolved_state: StateVector
    evaluations: int
    energy_trace: tuple[float, ...]  # best-so-far after each evaluation


def build_outer_product_hamiltonian(psi: StateVector) -> HamiltonianSpec:
    """Projector Hamiltonian; expectation is the squared overlap with psi."""
    if abs(psi.norm_squared() - 1.0) > 1e-8:
        raise InvalidInputError("reference state must be unit-norm")
    return HamiltonianSpec(mode=OUTER_PRODUCT, reference_state=psi)


def build_ising_hamiltonian(minority_block: Dataset, bounds: NormBounds) -> HamiltonianSpec:
    """Ising form learned from the minority block.

    Features are min-max mapped to [-1, 1] (degenerate features map to 0);
    couplings are the sample covariances of the mapped features with the
    diagonal zeroed, and biases are their means.
    """
    if minority_block.n_samples < 2:
        raise InvalidInputError("need at least 2 samples to estimate couplings")
    if minority_block.n_features != bounds.n_features:
        raise InvalidInputError("bounds must match the feature count")
    span = bounds.maxs - bounds.mins
    mapped = np.zeros_like(minority_block.features)
    ok = span > 0.0
    mapped[:, ok] = 2.0 * (minority_block.features[:, ok] - bounds.mins[ok]) / span[ok] - 1.0
    biases = mapped.mean(axis=0)
    if minority_block.n_features == 1:
        couplings = np.zeros((1, 1))
    else:
        couplings = np.cov(mapped, rowvar=False)
        np.fill_diagonal(couplings, 0.0)
    return HamiltonianSpec(mode=ISING, couplings=couplings, biases=biases)


def ansatz_state(params: AnsatzParams, n_qubits: int) -> StateVector:
    """State prepared by layered RY rotations with CZ chains in between.

    Each layer applies RY(theta) per qubit followed by a CZ chain (i, i+1);
    the chain is skipped for a single qubit. Parameter length must be a
    multiple of n_qubits; each block of n_qubits is one layer.
    """
    theta = params.theta
    if n_qubits < 1 or theta.size % n_qubits != 0:
        raise InvalidInputError(
            f"parameter length {theta.size} is not a multiple of {n_qubits} qubits"
        )
    n_layers = theta.size // n_qubits
    s = new_zero_state(n_qubits)
    for layer in range(n_layers):
        block = theta[layer * n_qubits : (layer + 1) * n_qubits]
        for q, angle in enumerate(block):
            s = apply_ry(s, q, float(angle))
        for q in range(n_qubits - 1):
            s = apply_cz(s, q, q + 1)
    return s


def expectation(h: HamiltonianSpec, s: StateVector) -> float:
    """<s|H|s> evaluated directly from amplitudes."""
    if h.mode == OUTER_PRODUCT:
        ref = h.reference_state
        if ref.n_qubits != s.n_qubits:
            raise InvalidInputError("state dimension does not match the reference")
        return float(np.abs(np.vdot(ref.amplitudes, s.amplitudes)) ** 2)
    if h.n_qubits != s.n_qubits:
        raise InvalidInputError("state dimension does not match the hamiltonian")
    probs = np.abs(s.amplitudes) ** 2
    idx = np.arange(s.dim)
    # one uint8 bit vector per qubit keeps memory at n*2^n bytes even at
    # the qubit cap; <Z_i> = 1 - 2 P(bit_i = 1), <Z_i Z_j> via xor parity
    bits = [((idx >> q) & 1).astype(np.uint8) for q in range(s.n_qubits)]
    energy = 0.0
    for i in range(s.n_qubits):
        energy += h.biases[i] * (1.0 - 2.0 * float(probs @ bits[i]))
        for j in range(i + 1, s.n_qubits):
            parity = np.bitwise_xor(bits[i], bits[j])
            energy += h.couplings[i, j] * (1.0 - 2.0 * float(probs @ parity))
    return float(energy)


def ising_energy_bound(h: HamiltonianSpec) -> float:
    """Largest possible |energy| for an ising spec (triangle inequality)."""
    if h.mode != ISING:
        raise InvalidInputError("bound applies to ising mode only")
    upper = np.sum(np.abs(np.triu(h.couplings, k=1))) + np.sum(np.abs(h.biases))
    return float(upper)


def _lstsq_gradient(points: list[np.ndarray], values: list[float], ib: int) -> np.ndarray:
    rows = [points[j] - points[ib] for j in range(len(points)) if j != ib]
    rhs = [values[j] - values[ib] for j in range(len(values)) if j != ib]
    if not rows:
        return np.zeros_like(points[ib])
    g, *_ = np.linalg.lstsq(np.array(rows), np.array(rhs), rcond=None)
    return g


def _cobyla_like(
    objective: Callable[[np.ndarray], float],
    x0: np.ndarray,
    max_evals: int,
    tol: float,
    step_begin: float,
):
    """Linear-interpolation trust-region search with a compass safeguard.

    One objective evaluation per trial point. A simplex of dim+1 points
    anchors the linear model; the trial step moves the best point against
    the model gradient by the trust radius. When neither the model step nor
    a coordinate poll improves the best value, the radius shrinks. Stops at
    the evaluation budget, or once the radius is below the tolerance floor
    and an iteration brings less than `tol` improvement.
    """
    dim = x0.size
    trace: list[float] = []
    best = {"x": x0.copy(), "f": np.inf}
    evals = 0

    def f(x: np.ndarray) -> float:
        nonlocal evals
        value = float(objective(x))
        evals += 1
        if value < best["f"]:
            best["f"] = value
            best["x"] = x.copy()
        trace.append(best["f"])
        return value

    points = [x0.copy()]
    values = [f(x0)]
    for i in range(dim):
        if evals >= max_evals:
            break
        xi = x0.copy()
        xi[i] += step_begin
        points.append(xi)
        values.append(f(xi))

    rho = step_begin
    rho_floor = max(tol, 1e-12)
    poll_coord = 0
    poll_sign = 1.0

    def replace_worst(x: np.ndarray, value: float) -> None:
        worst = int(np.argmax(values))
        if value < values[worst]:
            points[worst] = x.copy()
            values[worst] = value

    while evals < max_evals:
        f_start = best["f"]
        improved = False

        ib = int(np.argmin(values))
        g = _lstsq_gradient(points, values, ib)
        gnorm = float(np.linalg.norm(g))
        if gnorm > 1e-14 and evals < max_evals:
            xt = best["x"] - rho * g / gnorm
            ft = f(xt)
            if ft < f_start:
                improved = True
            replace_worst(xt, ft)

        if not improved and evals < max_evals:
            xp = best["x"].copy()
            xp[poll_coord] += poll_sign * rho
            fp = f(xp)
            if fp < f_start:
                improved = True
            replace_worst(xp, fp)
            poll_sign = -poll_sign
            if poll_sign > 0:
                poll_coord = (poll_coord + 1) % dim

        if not improved:
            rho *= 0.5
        if rho < rho_floor and f_start - best["f"] < tol:
            break

    return best["x"], best["f"], evals, trace


def _nelder_mead(
    objective: Callable[[np.ndarray], float],
    x0: np.ndarray,
    max_evals: int,
    tol: float,
    step_begin: float,
):
    """Budgeted Nelder-Mead behind the same contract as the trust-region search."""
    dim = x0.size
    trace: list[float] = []
    best = {"x": x0.copy(), "f": np.inf}
    evals = 0

    def f(x: np.ndarray) -> float:
        nonlocal evals
        value = float(objective(x))
        evals += 1
        if value < best["f"]:
            best["f"] = value
            best["x"] = x.copy()
        trace.append(best["f"])
        return value

    simplex = [x0.copy()]
    values = [f(x0)]
    for i in range(dim):
        if evals >= max_evals:
            break
        xi = x0.copy()
        xi[i] += step_begin
        simplex.append(xi)
        values.append(f(xi))

    while evals < max_evals and len(simplex) == dim + 1:
        f_start = best["f"]
        order = np.argsort(values, kind="stable")
        simplex = [simplex[i] for i in order]
        values = [values[i] for i in order]
        centroid = np.mean(simplex[:-1], axis=0)
        xr = centroid + (centroid - simplex[-1])
        fr = f(xr)
        if fr < values[0] and evals < max_evals:
            xe = centroid + 2.0 * (centroid - simplex[-1])
            fe = f(xe)
            simplex[-1], values[-1] = (xe, fe) if fe < fr else (xr, fr)
        elif fr < values[-2]:
            simplex[-1], values[-1] = xr, fr
        elif evals < max_evals:
            xc = centroid + 0.5 * (simplex[-1] - centroid)
            fc = f(xc)
            if fc < values[-1]:
                simplex[-1], values[-1] = xc, fc
            else:
                for i in range(1, dim + 1):
                    if evals >= max_evals:
                        break
                    simplex[i] = simplex[0] + 0.5 * (simplex[i] - simplex[0])
                    values[i] = f(simplex[i])
        spread = max(values) - min(values)
        if spread < tol and f_start - best["f"] < tol:
            break

    return best["x"], best["f"], evals, trace


def minimize(
    h: HamiltonianSpec, n_qubits: int, cfg: VqeConfig, seed: SeedSpec
) -> VqeOutcome:
    """Search the ansatz family for the lowest-energy state.

    Deterministic for a given SeedSpec; the seed matters only when
    initial_params is "seeded_uniform". The evaluation budget
    (cfg.max_iterations) covers every objective evaluation including the
    initial simplex, and the returned trace is best-so-far per evaluation.
    """
    if h.n_qubits != n_qubits:
        raise InvalidInputError("hamiltonian does not match the qubit count")
    dim = cfg.n_layers * n_qubits
    if cfg.initial_params == "zeros":
        x0 = np.zeros(dim)
    else:
        x0 = seed.generator().uniform(-0.1, 0.1, size=dim)

    def objective(x: np.ndarray) -> float:
        return expectation(h, ansatz_state(AnsatzParams(x), n_qubits))

    search = _cobyla_like if cfg.optimizer == "cobyla_like" else _nelder_mead
    x_best, f_best, evals, trace = search(
        objective, x0, cfg.max_iterations, cfg.tolerance, cfg.step_begin
    )
    params = AnsatzParams(x_best)
    return VqeOutcome(
        best_params=params,
        best_energy=f_best,
        evolved_state=ansatz_state(params, n_qubits),
        evaluations=evals,
        energy_trace=tuple(trace),
    )


def format_energy_trace(outcome: VqeOutcome) -> str:
    """Two-column text table (iteration, best_energy) for convergence plots."""
    lines = ["iteration best_energy"]
    for i, e in enumerate(outcome.energy_trace):
        lines.append(f"{i} {e!r}")
    return "\n".join(lines)
