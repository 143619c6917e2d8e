"""Shared fixtures and independent oracle helpers.

The oracles here deliberately avoid the library's own code paths: brute
force operator assembly uses plain numpy primitives, eigenvalues come
from numpy.linalg, and statistical tolerances are computed from first
principles.
"""

import itertools
import math

import numpy as np
import pytest

I2 = np.eye(2, dtype=complex)
PX = np.array([[0, 1], [1, 0]], dtype=complex)
PY = np.array([[0, -1j], [1j, 0]], dtype=complex)
PZ = np.array([[1, 0], [0, -1]], dtype=complex)


def kron_chain(*ops):
    out = np.array([1.0], dtype=complex) if ops[0].ndim == 1 else np.array([[1.0]], dtype=complex)
    for op in ops:
        out = np.kron(out, op)
    return out


def embed_oracle(op, qubits, n):
    """Independent tensor embedding, building the full matrix elementwise."""
    qubits = list(qubits)
    rest = [q for q in range(n) if q not in qubits]
    k = len(qubits)
    d = 2**n
    full = np.zeros((d, d), dtype=complex)
    for rest_bits in itertools.product((0, 1), repeat=len(rest)):
        idx = []
        for sub in range(2**k):
            bits = [0] * n
            for pos, q in enumerate(qubits):
                bits[q] = (sub >> (k - 1 - pos)) & 1
            for pos, q in enumerate(rest):
                bits[q] = rest_bits[pos]
            idx.append(int("".join(map(str, bits)), 2))
        full[np.ix_(idx, idx)] += op
    return full


def omega_hom_w3_oracle():
    """Strategy operator for the homogeneous W3 protocol, assembled directly
    from its defining formula with numpy primitives."""
    p_xx = 0.5 * (np.eye(4) + np.kron(PX, PX))
    p_yy = 0.5 * (np.eye(4) + np.kron(PY, PY))
    p_00 = np.zeros((4, 4), dtype=complex)
    p_00[0, 0] = 1.0
    p0 = np.array([[1, 0], [0, 0]], dtype=complex)
    p1 = np.array([[0, 0], [0, 1]], dtype=complex)
    total = np.zeros((8, 8), dtype=complex)
    for c in range(3):
        rest = tuple(q for q in range(3) if q != c)
        plus = 0.5 * p_xx + 0.5 * p_yy
        minus = 0.5 * np.eye(4) + 0.5 * p_00
        om = embed_oracle(p0, (c,), 3) @ embed_oracle(plus, rest, 3)
        om += embed_oracle(p1, (c,), 3) @ embed_oracle(minus, rest, 3)
        total += om / 3.0
    return total


def omega_adaptive_wn_oracle(n):
    p_xx = 0.5 * (np.eye(4) + np.kron(PX, PX))
    p_00 = np.zeros((4, 4), dtype=complex)
    p_00[0, 0] = 1.0
    p0 = np.array([[1, 0], [0, 0]], dtype=complex)
    p1 = np.array([[0, 0], [0, 1]], dtype=complex)
    d = 2**n
    total = np.zeros((d, d), dtype=complex)
    pairs = list(itertools.combinations(range(n), 2))
    for i, j in pairs:
        others = [q for q in range(n) if q not in (i, j)]
        om = np.zeros((d, d), dtype=complex)
        for bits in itertools.product((0, 1), repeat=len(others)):
            k = sum(bits)
            proj = np.eye(d, dtype=complex)
            for q, b in zip(others, bits):
                proj = proj @ embed_oracle(p0 if b == 0 else p1, (q,), n)
            if k == 1:
                om += proj @ embed_oracle(p_00, (i, j), n)
            elif k == 0:
                om += proj @ embed_oracle(p_xx, (i, j), n)
        total += om / len(pairs)
    return total


def w_state_vector(n):
    v = np.zeros(2**n, dtype=complex)
    for q in range(n):
        v[1 << (n - 1 - q)] = 1.0 / math.sqrt(n)
    return v


def random_density(rng, n):
    d = 2**n
    a = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
    m = a @ a.conj().T
    return m / np.real(np.trace(m))


def random_hermitian(rng, d):
    a = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
    return a + a.conj().T


def binomial_sigma(p, n):
    return math.sqrt(max(p * (1.0 - p), 1e-12) / n)


def two_proportion_z(k1, n1, k2, n2):
    """z statistic for equality of two binomial rates (pooled variance)."""
    p1, p2 = k1 / n1, k2 / n2
    pool = (k1 + k2) / (n1 + n2)
    var = pool * (1.0 - pool) * (1.0 / n1 + 1.0 / n2)
    if var == 0.0:
        return 0.0
    return (p1 - p2) / math.sqrt(var)


@pytest.fixture(scope="session")
def hom_w3():
    from qsvlab import build_homogeneous_w3

    return build_homogeneous_w3()


@pytest.fixture(scope="session")
def opt_bell():
    from qsvlab import build_optimal_two_qubit

    return build_optimal_two_qubit(math.pi / 4)
