"""Parametrized noise channels applied to density matrices.

Channels are CPTP maps: dephasing and amplitude damping act as explicit
per-qubit Kraus sums, coherent rotations as single-qubit unitaries
``exp(-i*angle*P/2)``, depolarizing as the exact convex combination with
the maximally mixed state, and ``mixture`` as a convex combination of
other channels.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .states import DensityMatrix, PAULIS, embed_operator

KINDS = ("depolarizing", "dephasing", "amplitude_damping", "coherent_rotation", "mixture")


@dataclass(frozen=True)
class NoiseModel:
    kind: str
    strength: float = 0.0
    qubits: tuple[int, ...] | None = None  # None = every qubit
    axis: str = "Z"
    parts: tuple[tuple[float, "NoiseModel"], ...] = field(default_factory=tuple)

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown noise kind {self.kind!r}")
        if self.kind in ("depolarizing", "dephasing"):
            if not 0.0 <= self.strength <= 1.0:
                raise ValueError(f"{self.kind} probability {self.strength} outside [0, 1]")
        if self.kind == "amplitude_damping":
            if not 0.0 <= self.strength <= 1.0:
                raise ValueError(f"damping rate {self.strength} outside [0, 1]")
        if self.kind == "coherent_rotation":
            if self.axis not in ("X", "Y", "Z"):
                raise ValueError(f"rotation axis must be X, Y or Z, got {self.axis!r}")
        if self.kind == "mixture":
            w = [p for p, _ in self.parts]
            if not self.parts or any(p < 0 for p in w) or abs(sum(w) - 1.0) > 1e-12:
                raise ValueError("mixture weights must be nonnegative and sum to 1")

    @staticmethod
    def depolarizing(p: float) -> "NoiseModel":
        return NoiseModel("depolarizing", strength=p)

    @staticmethod
    def dephasing(p: float, qubits: tuple[int, ...] | None = None) -> "NoiseModel":
        return NoiseModel("dephasing", strength=p, qubits=qubits)

    @staticmethod
    def amplitude_damping(gamma: float, qubits: tuple[int, ...] | None = None) -> "NoiseModel":
        return NoiseModel("amplitude_damping", strength=gamma, qubits=qubits)

    @staticmethod
    def coherent_rotation(axis: str, angle: float, qubit: int) -> "NoiseModel":
        return NoiseModel("coherent_rotation", strength=angle, qubits=(qubit,), axis=axis)

    @staticmethod
    def mixture(parts: list[tuple[float, "NoiseModel"]]) -> "NoiseModel":
        return NoiseModel("mixture", parts=tuple(parts))


def _kraus_on_qubits(m: np.ndarray, kraus: list[np.ndarray], qubits, n: int) -> np.ndarray:
    for q in qubits:
        ops = [embed_operator(k, (q,), n) for k in kraus]
        m = sum(op @ m @ op.conj().T for op in ops)
    return m


def _apply(m: np.ndarray, model: NoiseModel, n: int) -> np.ndarray:
    qubits = model.qubits if model.qubits is not None else tuple(range(n))
    if model.kind == "depolarizing":
        p = model.strength
        d = m.shape[0]
        return (1.0 - p) * m + p * np.trace(m) * np.eye(d, dtype=complex) / d
    if model.kind == "dephasing":
        p = model.strength
        kraus = [np.sqrt(1.0 - p) * PAULIS["I"], np.sqrt(p) * PAULIS["Z"]]
        return _kraus_on_qubits(m, kraus, qubits, n)
    if model.kind == "amplitude_damping":
        g = model.strength
        k0 = np.array([[1.0, 0.0], [0.0, np.sqrt(1.0 - g)]], dtype=complex)
        k1 = np.array([[0.0, np.sqrt(g)], [0.0, 0.0]], dtype=complex)
        return _kraus_on_qubits(m, [k0, k1], qubits, n)
    if model.kind == "coherent_rotation":
        half = 0.5 * model.strength
        u = np.cos(half) * PAULIS["I"] - 1j * np.sin(half) * PAULIS[model.axis]
        for q in qubits:
            uf = embed_operator(u, (q,), n)
            m = uf @ m @ uf.conj().T
        return m
    if model.kind == "mixture":
        return sum(w * _apply(m, part, n) for w, part in model.parts)
    raise AssertionError(model.kind)


def apply_noise(rho: DensityMatrix, model: NoiseModel) -> DensityMatrix:
    """Apply a noise channel; the output is validated as a density matrix."""
    out = _apply(np.array(rho.matrix), model, rho.n_qubits)
    return DensityMatrix(rho.n_qubits, out)
