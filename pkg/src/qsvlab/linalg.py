"""Dense complex linear algebra for operators on up to ten qubits.

The eigensolver is a cyclic Jacobi iteration specialised to Hermitian
matrices: every matrix in this package is small (dimension at most 1024)
and dense, and Jacobi delivers eigenvectors that are orthonormal to
machine precision, which the verification operators rely on.  The sweep
kernel is JIT-compiled.
"""

from __future__ import annotations

import numba
import numpy as np

HERMITIAN_ATOL = 1e-12
PROJECTOR_TOL = 1e-10


def kron(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Tensor product of two operators (or vectors)."""
    return np.kron(np.asarray(a, dtype=complex), np.asarray(b, dtype=complex))


def kron_all(*ops: np.ndarray) -> np.ndarray:
    out = np.asarray(ops[0], dtype=complex)
    for op in ops[1:]:
        out = np.kron(out, np.asarray(op, dtype=complex))
    return out


def frobenius(m: np.ndarray) -> float:
    return float(np.linalg.norm(m))


def is_hermitian(m: np.ndarray, atol: float = HERMITIAN_ATOL) -> bool:
    """Entrywise check ``m == m^H`` within ``atol``."""
    m = np.asarray(m)
    return bool(np.max(np.abs(m - m.conj().T)) <= atol)


def is_projector(p: np.ndarray, tol: float = PROJECTOR_TOL) -> bool:
    """Check ``P = P^H`` and ``P^2 = P`` within Frobenius norm ``tol``."""
    p = np.asarray(p, dtype=complex)
    return (
        frobenius(p - p.conj().T) <= tol
        and frobenius(p @ p - p) <= tol
    )


@numba.njit(cache=True)
def _jacobi_sweeps(a, v, tol, max_sweeps):  # pragma: no cover - jitted
    n = a.shape[0]
    for sweep in range(max_sweeps):
        off = 0.0
        for p in range(n - 1):
            for q in range(p + 1, n):
                off += abs(a[p, q]) ** 2
        if np.sqrt(2.0 * off) <= tol:
            return sweep
        skip = tol / (n * n)
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[p, q]
                if abs(apq) <= skip:
                    continue
                # Unitary 2x2 rotation annihilating a[p, q]:
                # J[p,p]=c, J[q,q]=c, J[p,q]=s*phase, J[q,p]=-conj(s*phase)
                # with tan(2*theta) driven by |a[p,q]| and the phase of a[p,q].
                amod = abs(apq)
                phase = apq / amod
                tau = (a[q, q].real - a[p, p].real) / (2.0 * amod)
                if tau >= 0.0:
                    t = 1.0 / (tau + np.sqrt(1.0 + tau * tau))
                else:
                    t = -1.0 / (-tau + np.sqrt(1.0 + tau * tau))
                c = 1.0 / np.sqrt(1.0 + t * t)
                sp = (t * c) * phase
                spc = np.conj(sp)
                for k in range(n):
                    akp = a[k, p]
                    akq = a[k, q]
                    a[k, p] = c * akp - spc * akq
                    a[k, q] = sp * akp + c * akq
                for k in range(n):
                    apk = a[p, k]
                    aqk = a[q, k]
                    a[p, k] = c * apk - sp * aqk
                    a[q, k] = spc * apk + c * aqk
                for k in range(n):
                    vkp = v[k, p]
                    vkq = v[k, q]
                    v[k, p] = c * vkp - spc * vkq
                    v[k, q] = sp * vkp + c * vkq
    return max_sweeps


def hermitian_eigensystem(
    m: np.ndarray,
    atol: float = HERMITIAN_ATOL,
    max_sweeps: int = 60,
) -> tuple[np.ndarray, np.ndarray]:
    """Diagonalise a Hermitian matrix by cyclic Jacobi rotations.

    Returns ``(eigenvalues, eigenvectors)`` with eigenvalues sorted in
    descending order and eigenvectors as the corresponding columns.
    Convergence: off-diagonal Frobenius norm below ``1e-12 * ||m||_F``.

    Within a degenerate cluster (eigenvalue gap below ~1e-9) the returned
    vectors form an orthonormal basis of the cluster with no canonical
    order; callers must not rely on intra-cluster ordering.
    """
    m = np.asarray(m, dtype=complex)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {m.shape}")
    dev = float(np.max(np.abs(m - m.conj().T))) if m.size else 0.0
    if dev > atol:
        raise ValueError(
            f"matrix is not Hermitian: max |m - m^H| = {dev:.3e} exceeds {atol:.0e}"
        )
    n = m.shape[0]
    if n == 1:
        return np.array([m[0, 0].real]), np.eye(1, dtype=complex)

    a = 0.5 * (m + m.conj().T)  # symmetrise away the tolerated deviation
    v = np.eye(n, dtype=complex)
    tol = 1e-12 * max(frobenius(a), np.finfo(float).tiny)
    used = _jacobi_sweeps(a, v, tol, max_sweeps)
    if used >= max_sweeps:
        raise RuntimeError(f"Jacobi iteration did not converge in {max_sweeps} sweeps")
    w = np.diag(a).real.copy()
    order = np.argsort(w, kind="stable")[::-1]
    return w[order], np.ascontiguousarray(v[:, order])
