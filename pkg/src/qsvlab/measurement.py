"""Born-rule projective measurement with state collapse."""

from __future__ import annotations

import numpy as np

from .linalg import frobenius, is_hermitian
from .states import DensityMatrix

COMPLETENESS_TOL = 1e-9


def born_probabilities(rho: np.ndarray, projectors: list[np.ndarray]) -> np.ndarray:
    return np.array([float(np.real(np.trace(p @ rho))) for p in projectors])


def validate_projective_set(projectors: list[np.ndarray], dim: int) -> None:
    """Reject sets that are not complete orthogonal projective measurements."""
    total = np.zeros((dim, dim), dtype=complex)
    for k, p in enumerate(projectors):
        if p.shape != (dim, dim):
            raise ValueError(f"projector {k} has shape {p.shape}, expected {(dim, dim)}")
        if not is_hermitian(p, atol=1e-10):
            raise ValueError(f"projector {k} is not Hermitian")
        if frobenius(p @ p - p) > 1e-9:
            raise ValueError(f"projector {k} is not idempotent")
        total += p
    for a in range(len(projectors)):
        for b in range(a + 1, len(projectors)):
            if frobenius(projectors[a] @ projectors[b]) > 1e-9:
                raise ValueError(f"projectors {a} and {b} are not orthogonal")
    if frobenius(total - np.eye(dim)) > COMPLETENESS_TOL:
        raise ValueError("projectors do not sum to the identity: set is not complete")


def measure_projective(
    state: DensityMatrix,
    projectors: list[np.ndarray],
    rng: np.random.Generator,
    validate: bool = True,
) -> tuple[int, DensityMatrix]:
    """Sample an outcome with probability Tr(P_k rho) and collapse.

    The collapsed state is ``P_k rho P_k / Tr(P_k rho)``.  Callers looping
    over a set they have already validated may pass ``validate=False``.
    """
    projectors = [np.asarray(p, dtype=complex) for p in projectors]
    if validate:
        validate_projective_set(projectors, state.dim)
    probs = born_probabilities(state.matrix, projectors)
    probs = np.clip(probs, 0.0, None)
    cdf = np.cumsum(probs / probs.sum())
    k = int(np.searchsorted(cdf, rng.random(), side="right"))
    k = min(k, len(projectors) - 1)
    p = projectors[k]
    collapsed = p @ state.matrix @ p
    collapsed /= np.real(np.trace(collapsed))
    return k, DensityMatrix(state.n_qubits, 0.5 * (collapsed + collapsed.conj().T))
