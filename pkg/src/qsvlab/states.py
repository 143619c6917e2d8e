"""Qubit states, Pauli algebra, and fidelities.

Conventions, fixed once for the whole package:

* qubit 0 is the leftmost tensor factor and the most significant bit of a
  computational-basis index;
* basis states are written as bit tuples ``(b0, b1, ...)`` or as the
  integer they spell in that order;
* ``|0>`` is the +1 eigenvector of Z.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

from .linalg import is_hermitian, kron_all

TRACE_ATOL = 1e-10
EIGENVALUE_FLOOR = -1e-10
NORM_ATOL = 1e-12

I2 = np.eye(2, dtype=complex)
X = np.array([[0, 1], [1, 0]], dtype=complex)
Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
Z = np.array([[1, 0], [0, -1]], dtype=complex)
PAULIS = {"I": I2, "X": X, "Y": Y, "Z": Z}

KET0 = np.array([1, 0], dtype=complex)
KET1 = np.array([0, 1], dtype=complex)


def _freeze(a: np.ndarray) -> np.ndarray:
    a = np.array(a, dtype=complex)
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class PureState:
    """Unit-norm amplitude vector over ``n_qubits`` qubits."""

    n_qubits: int
    amplitudes: np.ndarray

    def __post_init__(self):
        amps = _freeze(self.amplitudes)
        if self.n_qubits < 1:
            raise ValueError("n_qubits must be positive")
        if amps.shape != (2**self.n_qubits,):
            raise ValueError(
                f"amplitude vector of shape {amps.shape} does not match "
                f"{self.n_qubits} qubits"
            )
        norm = float(np.sum(np.abs(amps) ** 2))
        if abs(norm - 1.0) > NORM_ATOL:
            raise ValueError(f"squared amplitudes sum to {norm!r}, not 1")
        object.__setattr__(self, "amplitudes", amps)

    @property
    def dim(self) -> int:
        return 2**self.n_qubits

    def projector(self) -> np.ndarray:
        return np.outer(self.amplitudes, self.amplitudes.conj())

    def density(self) -> "DensityMatrix":
        return DensityMatrix(self.n_qubits, self.projector())

    def overlap(self, other: "PureState") -> complex:
        return complex(np.vdot(self.amplitudes, other.amplitudes))


@dataclass(frozen=True)
class DensityMatrix:
    """Trace-one positive-semidefinite operator over ``n_qubits`` qubits."""

    n_qubits: int
    matrix: np.ndarray

    def __post_init__(self):
        m = _freeze(self.matrix)
        d = 2**self.n_qubits
        if m.shape != (d, d):
            raise ValueError(f"matrix shape {m.shape} does not match {self.n_qubits} qubits")
        tr = complex(np.trace(m))
        if abs(tr - 1.0) > TRACE_ATOL:
            raise ValueError(f"trace is {tr!r}, not 1")
        if not is_hermitian(m, atol=1e-10):
            raise ValueError("matrix is not Hermitian")
        wmin = float(np.linalg.eigvalsh(m)[0])
        if wmin < EIGENVALUE_FLOOR:
            raise ValueError(f"matrix has eigenvalue {wmin:.3e} below {EIGENVALUE_FLOOR}")
        object.__setattr__(self, "matrix", m)

    @property
    def dim(self) -> int:
        return 2**self.n_qubits


def basis_index(bits: tuple[int, ...]) -> int:
    idx = 0
    for b in bits:
        idx = (idx << 1) | int(b)
    return idx


def basis_ket(bits: tuple[int, ...]) -> np.ndarray:
    v = np.zeros(2 ** len(bits), dtype=complex)
    v[basis_index(bits)] = 1.0
    return v


def make_w_state(n: int) -> PureState:
    """Uniform superposition of all single-excitation basis states."""
    if not 2 <= n <= 10:
        raise ValueError(f"W state size must be in [2, 10], got {n}")
    amps = np.zeros(2**n, dtype=complex)
    for q in range(n):
        amps[1 << (n - 1 - q)] = 1.0 / np.sqrt(n)
    return PureState(n, amps)


def make_theta_state(theta: float) -> PureState:
    """Two-qubit state ``sin(theta)|01> + cos(theta)|10>`` for theta in [0, pi/2]."""
    return PureState(2, np.array([0.0, np.sin(theta), np.cos(theta), 0.0], dtype=complex))


def fidelity(rho: DensityMatrix, psi: PureState) -> float:
    """Overlap ``<psi|rho|psi>``, clamped to [0, 1] only near the boundary."""
    if rho.n_qubits != psi.n_qubits:
        raise ValueError(
            f"dimension mismatch: state on {psi.n_qubits} qubits, "
            f"density matrix on {rho.n_qubits}"
        )
    v = psi.amplitudes
    f = float(np.real(v.conj() @ rho.matrix @ v))
    if -1e-10 <= f < 0.0:
        return 0.0
    if 1.0 < f <= 1.0 + 1e-10:
        return 1.0
    return f


def pure_state_fidelity(a: PureState, b: PureState) -> float:
    return float(abs(np.vdot(a.amplitudes, b.amplitudes)) ** 2)


def pauli_string_matrix(label: str) -> np.ndarray:
    """Dense matrix of a Pauli string such as ``"XZY"``."""
    try:
        ops = [PAULIS[ch] for ch in label]
    except KeyError as exc:
        raise ValueError(f"unknown Pauli letter in {label!r}") from exc
    return kron_all(*ops)


def pauli_eigenspace_projector(op: np.ndarray, sign: int) -> np.ndarray:
    """Projector onto the +1 or -1 eigenspace of an involution (P^2 = 1)."""
    d = op.shape[0]
    return 0.5 * (np.eye(d, dtype=complex) + sign * op)


def embed_operator(op: np.ndarray, qubits: tuple[int, ...], n: int) -> np.ndarray:
    """Embed an operator acting on ``qubits`` (ascending) into ``n`` qubits."""
    qubits = tuple(qubits)
    if any(q < 0 or q >= n for q in qubits):
        raise ValueError(f"qubit indices {qubits} out of range for n={n}")
    if list(qubits) != sorted(set(qubits)):
        raise ValueError(f"qubit indices must be strictly ascending, got {qubits}")
    k = len(qubits)
    if op.shape != (2**k, 2**k):
        raise ValueError("operator shape does not match the number of target qubits")
    rest = [q for q in range(n) if q not in qubits]
    d = 2**n
    full = np.zeros((d, d), dtype=complex)
    opt = np.asarray(op, dtype=complex)
    for rest_bits in itertools.product((0, 1), repeat=len(rest)):
        rows = []
        for sub in range(2**k):
            bits = [0] * n
            for pos, q in enumerate(qubits):
                bits[q] = (sub >> (k - 1 - pos)) & 1
            for pos, q in enumerate(rest):
                bits[q] = rest_bits[pos]
            rows.append(basis_index(tuple(bits)))
        full[np.ix_(rows, rows)] += opt
    return full


def subset_index_table(n: int, qubits: tuple[int, ...]) -> tuple[list[tuple[int, ...]], np.ndarray]:
    """Group the 2^n basis indices by the bit pattern on ``qubits``.

    Returns (list of bit patterns, array of shape (2^k, 2^(n-k))) where row j
    holds the full-space indices whose ``qubits`` bits spell pattern j and the
    remaining qubits run over all values in ascending bit order.
    """
    qubits = tuple(qubits)
    rest = [q for q in range(n) if q not in qubits]
    k = len(qubits)
    patterns = list(itertools.product((0, 1), repeat=k))
    table = np.zeros((2**k, 2 ** len(rest)), dtype=np.int64)
    for j, pat in enumerate(patterns):
        for r, rest_bits in enumerate(itertools.product((0, 1), repeat=len(rest))):
            bits = [0] * n
            for pos, q in enumerate(qubits):
                bits[q] = pat[pos]
            for pos, q in enumerate(rest):
                bits[q] = rest_bits[pos]
            table[j, r] = basis_index(tuple(bits))
    return patterns, table
