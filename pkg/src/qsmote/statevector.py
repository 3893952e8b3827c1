"""Dense statevector register, its gate set, and the feature encoding circuit.

Basis convention: amplitude index j encodes qubit b as bit b of j, with
qubit 0 the least significant bit. Gate kernels sweep index pairs over the
amplitude array; no 2^n x 2^n matrix is ever materialized.
"""
from __future__ import annotations

from dataclasses import dataclass
from math import cos, pi, sin, sqrt

import numpy as np

from .errors import CapacityError, DegenerateStateError, InvalidInputError

DEFAULT_QUBIT_CAP = 20

_SQRT1_2 = 1.0 / sqrt(2.0)


@dataclass(frozen=True)
class StateVector:
    """Unit-norm register of 2^n_qubits complex amplitudes."""

    n_qubits: int
    amplitudes: np.ndarray

    def __post_init__(self):
        amps = np.array(self.amplitudes, dtype=complex, copy=True)
        if self.n_qubits < 1:
            raise InvalidInputError("n_qubits must be at least 1")
        if amps.shape != (1 << self.n_qubits,):
            raise InvalidInputError("amplitude count must be 2^n_qubits")
        amps.setflags(write=False)
        object.__setattr__(self, "amplitudes", amps)

    @property
    def dim(self) -> int:
        return 1 << self.n_qubits

    def norm_squared(self) -> float:
        return float(np.sum(np.abs(self.amplitudes) ** 2))


@dataclass(frozen=True)
class NormBounds:
    """Per-feature (min, max) pairs, fitted on training data only."""

    mins: np.ndarray
    maxs: np.ndarray

    def __post_init__(self):
        mins = np.array(self.mins, dtype=float, copy=True)
        maxs = np.array(self.maxs, dtype=float, copy=True)
        if mins.shape != maxs.shape or mins.ndim != 1:
            raise InvalidInputError("bounds must be matching 1-D vectors")
        if np.any(mins > maxs):
            raise InvalidInputError("every min must not exceed its max")
        mins.setflags(write=False)
        maxs.setflags(write=False)
        object.__setattr__(self, "mins", mins)
        object.__setattr__(self, "maxs", maxs)

    @classmethod
    def from_features(cls, features: np.ndarray) -> "NormBounds":
        feats = np.asarray(features, dtype=float)
        if feats.ndim != 2 or feats.shape[0] == 0:
            raise InvalidInputError("need a non-empty feature matrix")
        return cls(feats.min(axis=0), feats.max(axis=0))

    @property
    def n_features(self) -> int:
        return self.mins.shape[0]


@dataclass(frozen=True)
class EncodingAngles:
    """Rotation angles in [0, pi], one per feature."""

    theta: np.ndarray

    def __post_init__(self):
        theta = np.array(self.theta, dtype=float, copy=True)
        if theta.ndim != 1:
            raise InvalidInputError("theta must be a 1-D vector")
        if np.any(theta < 0.0) or np.any(theta > pi):
            raise InvalidInputError("angles must lie in [0, pi]")
        theta.setflags(write=False)
        object.__setattr__(self, "theta", theta)


def new_zero_state(n: int, cap: int = DEFAULT_QUBIT_CAP) -> StateVector:
    """|0...0> on n qubits; n above the cap raises a capacity error."""
    if n < 1 or n > cap:
        raise CapacityError(f"n_qubits must lie in [1, {cap}], got {n}")
    amps = np.zeros(1 << n, dtype=complex)
    amps[0] = 1.0
    return StateVector(n, amps)


def _check_qubit(s: StateVector, q: int, name: str = "qubit") -> None:
    if not 0 <= q < s.n_qubits:
        raise IndexError(f"{name} index {q} out of range for {s.n_qubits} qubits")


def _apply_1q(s: StateVector, q: int, m00, m01, m10, m11) -> StateVector:
    # reshape(-1, 2, 2**q) puts bit q on the middle axis
    view = s.amplitudes.reshape(-1, 2, 1 << q)
    a0, a1 = view[:, 0, :], view[:, 1, :]
    out = np.empty_like(view)
    out[:, 0, :] = m00 * a0 + m01 * a1
    out[:, 1, :] = m10 * a0 + m11 * a1
    return StateVector(s.n_qubits, out.reshape(-1))


def apply_hadamard(s: StateVector, q: int) -> StateVector:
    """Equal-superposition gate on qubit q."""
    _check_qubit(s, q)
    return _apply_1q(s, q, _SQRT1_2, _SQRT1_2, _SQRT1_2, -_SQRT1_2)


def apply_ry(s: StateVector, q: int, angle: float) -> StateVector:
    """Y-axis rotation by `angle` on qubit q."""
    _check_qubit(s, q)
    if not np.isfinite(angle):
        raise InvalidInputError("rotation angle must be finite")
    c, sn = cos(angle / 2.0), sin(angle / 2.0)
    return _apply_1q(s, q, c, -sn, sn, c)


def apply_cnot(s: StateVector, control: int, target: int) -> StateVector:
    """Flip the target bit on every basis state whose control bit is 1."""
    _check_qubit(s, control, "control")
    _check_qubit(s, target, "target")
    if control == target:
        raise InvalidInputError("control and target must differ")
    idx = np.arange(s.dim)
    hot = idx[(idx >> control) & 1 == 1]
    out = s.amplitudes.copy()
    out[hot] = s.amplitudes[hot ^ (1 << target)]
    return StateVector(s.n_qubits, out)


def apply_cz(s: StateVector, control: int, target: int) -> StateVector:
    """Negate the amplitude of every basis state with both bits 1."""
    _check_qubit(s, control, "control")
    _check_qubit(s, target, "target")
    if control == target:
        raise InvalidInputError("control and target must differ")
    idx = np.arange(s.dim)
    both = ((idx >> control) & 1 == 1) & ((idx >> target) & 1 == 1)
    out = s.amplitudes.copy()
    out[both] = -out[both]
    return StateVector(s.n_qubits, out)


def apply_toffoli(s: StateVector, c1: int, c2: int, target: int) -> StateVector:
    """Flip the target bit where both control bits are 1."""
    for q, name in ((c1, "c1"), (c2, "c2"), (target, "target")):
        _check_qubit(s, q, name)
    if len({c1, c2, target}) != 3:
        raise InvalidInputError("toffoli qubits must be pairwise distinct")
    idx = np.arange(s.dim)
    hot = idx[((idx >> c1) & 1 == 1) & ((idx >> c2) & 1 == 1)]
    out = s.amplitudes.copy()
    out[hot] = s.amplitudes[hot ^ (1 << target)]
    return StateVector(s.n_qubits, out)


def normalize_features(f: np.ndarray, b: NormBounds) -> EncodingAngles:
    """Min-max map of raw features into rotation angles in [0, pi].

    Values outside the fitted bounds clamp to the range ends; a degenerate
    feature (max == min) maps to 0.
    """
    vec = np.asarray(f, dtype=float)
    if vec.shape != (b.n_features,):
        raise InvalidInputError("feature vector length must match the bounds")
    span = b.maxs - b.mins
    theta = np.zeros_like(vec)
    ok = span > 0.0
    theta[ok] = pi * (vec[ok] - b.mins[ok]) / span[ok]
    return EncodingAngles(np.clip(theta, 0.0, pi))


def encode_sample(
    f: np.ndarray,
    b: NormBounds,
    cap: int = DEFAULT_QUBIT_CAP,
    ring: bool = False,
) -> StateVector:
    """Feature vector -> entangled statevector.

    Circuit: Hadamard on every qubit, then RY(theta_i) on qubit i, then a
    CNOT chain (i, i+1), a CZ chain (i, i+1), and a sliding Toffoli window
    (i, i+1, i+2). Chains are skipped when too few qubits exist. With
    ring=True the two-qubit chains close (last -> first, three or more
    qubits) and the Toffoli windows wrap around (four or more qubits).
    """
    angles = normalize_features(f, b)
    n = b.n_features
    s = new_zero_state(n, cap)
    for q in range(n):
        s = apply_hadamard(s, q)
    for q, theta in enumerate(angles.theta):
        s = apply_ry(s, q, float(theta))
    if n >= 2:
        pairs = [(i, i + 1) for i in range(n - 1)]
        if ring and n > 2:
            pairs.append((n - 1, 0))
        for a, t in pairs:
            s = apply_cnot(s, a, t)
        for a, t in pairs:
            s = apply_cz(s, a, t)
    if n >= 3:
        triples = [(i, i + 1, i + 2) for i in range(n - 2)]
        if ring and n > 3:
            triples += [(n - 2, n - 1, 0), (n - 1, 0, 1)]
        for a, b2, t in triples:
            s = apply_toffoli(s, a, b2, t)
    return s


def qubit_marginals(s: StateVector) -> np.ndarray:
    """Per-qubit probability of measuring 1."""
    probs = np.abs(s.amplitudes) ** 2
    idx = np.arange(s.dim)
    return np.array(
        [float(probs[(idx >> q) & 1 == 1].sum()) for q in range(s.n_qubits)]
    )


def real_part_renormalized(s: StateVector) -> StateVector:
    """Drop imaginary parts and rescale to unit norm.

    Raises DegenerateStateError when the real part is numerically zero;
    callers are expected to fall back (see the resampling pipeline).
    """
    real = s.amplitudes.real.copy()
    norm = float(np.linalg.norm(real))
    if norm < 1e-12:
        raise DegenerateStateError("real part of the state has zero norm")
    return StateVector(s.n_qubits, (real / norm).astype(complex))


def decode_state_to_features(s: StateVector, b: NormBounds) -> np.ndarray:
    """Statevector -> feature vector via per-qubit marginals.

    Inverts the RY amplitude map qubit by qubit: theta_i = 2*asin(sqrt(p_i)),
    then denormalizes through the bounds. Clamping absorbs numerical drift.
    """
    if s.n_qubits != b.n_features:
        raise InvalidInputError("qubit count must match the bounds")
    p = np.clip(qubit_marginals(s), 0.0, 1.0)
    theta = np.clip(2.0 * np.arcsin(np.sqrt(p)), 0.0, pi)
    return b.mins + (theta / pi) * (b.maxs - b.mins)


def format_state_table(s: StateVector) -> str:
    """Debug dump: one line per basis state (index, bitstring, re, im)."""
    lines = ["index bitstring re im"]
    for j, amp in enumerate(s.amplitudes):
        bits = format(j, f"0{s.n_qubits}b")
        lines.append(f"{j} {bits} {float(amp.real)!r} {float(amp.imag)!r}")
    return "\n".join(lines)
