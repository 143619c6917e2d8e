"""Verification strategies: measurement settings, strategy operators, gaps.

A strategy is a finite set of two-outcome measurement settings with
selection probabilities.  Each setting either tests a single accept
projector ("static") or runs a two-step adaptive tree: a projective
first-stage measurement on a subset of qubits, then a per-outcome leaf
that accepts, rejects, tests a projector on the remaining qubits, or
flips a classical coin between such leaves.

The strategy operator is the probability-weighted sum of the settings'
effective operators; its spectrum (computed at build time) fixes the
spectral gap and with it the sample complexity and every statistic the
analysis layer derives.
"""

from __future__ import annotations

import itertools
import json
import math
from dataclasses import dataclass, field

import numpy as np

from .linalg import hermitian_eigensystem, kron
from .states import (
    DensityMatrix,
    PureState,
    X,
    Y,
    Z,
    make_theta_state,
    make_w_state,
    pauli_eigenspace_projector,
    subset_index_table,
)

PROB_ATOL = 1e-12
SETTING_PASS_ATOL = 1e-10
TOP_EIGENVALUE_ATOL = 1e-9


# ---------------------------------------------------------------------------
# measurement trees

@dataclass(frozen=True)
class Accept:
    """Unconditional accept leaf."""


@dataclass(frozen=True)
class Reject:
    """Unconditional reject leaf."""


@dataclass(frozen=True)
class TestLeaf:
    """Two-outcome test {P, 1-P} on the free qubits; accept on P."""

    projector: np.ndarray

    def __post_init__(self):
        p = np.array(self.projector, dtype=complex)
        p.setflags(write=False)
        object.__setattr__(self, "projector", p)


@dataclass(frozen=True)
class CoinLeaf:
    """Classical coin over non-coin leaves."""

    arms: tuple[tuple[float, object], ...]

    def __post_init__(self):
        w = [a for a, _ in self.arms]
        if any(x < 0 for x in w) or abs(sum(w) - 1.0) > PROB_ATOL:
            raise ValueError("coin weights must be nonnegative and sum to 1")
        if any(isinstance(node, CoinLeaf) for _, node in self.arms):
            raise ValueError("coins must not nest")


def _leaf_effect(node, dim_free: int) -> np.ndarray:
    if isinstance(node, Accept):
        return np.eye(dim_free, dtype=complex)
    if isinstance(node, Reject):
        return np.zeros((dim_free, dim_free), dtype=complex)
    if isinstance(node, TestLeaf):
        return np.asarray(node.projector, dtype=complex)
    if isinstance(node, CoinLeaf):
        return sum(w * _leaf_effect(arm, dim_free) for w, arm in node.arms)
    raise TypeError(f"unknown tree node {node!r}")


@dataclass(frozen=True)
class MeasurementSetting:
    """One two-outcome setting, static or adaptive.

    ``first_stage_qubits`` empty means a static setting whose single branch
    carries the accept projector on the full space.  For adaptive settings
    ``branches`` maps every first-stage outcome bit pattern to a leaf.
    """

    label: str
    n_qubits: int
    first_stage_qubits: tuple[int, ...]
    branches: tuple[tuple[tuple[int, ...], object], ...]

    @staticmethod
    def static(label: str, n_qubits: int, accept_projector: np.ndarray) -> "MeasurementSetting":
        return MeasurementSetting(label, n_qubits, (), (((), TestLeaf(accept_projector)),))

    @staticmethod
    def adaptive(
        label: str,
        n_qubits: int,
        first_stage_qubits: tuple[int, ...],
        branches: dict[tuple[int, ...], object],
    ) -> "MeasurementSetting":
        if not first_stage_qubits:
            raise ValueError("adaptive setting needs a nonempty first-stage subset")
        want = set(itertools.product((0, 1), repeat=len(first_stage_qubits)))
        if set(branches) != want:
            raise ValueError("branches must cover every first-stage outcome pattern")
        ordered = tuple(sorted(branches.items()))
        return MeasurementSetting(label, n_qubits, tuple(first_stage_qubits), ordered)

    @property
    def kind(self) -> str:
        return "adaptive" if self.first_stage_qubits else "static"

    @property
    def free_qubits(self) -> tuple[int, ...]:
        return tuple(q for q in range(self.n_qubits) if q not in self.first_stage_qubits)

    def branch_map(self) -> dict[tuple[int, ...], object]:
        return dict(self.branches)

    def effective_operator(self) -> np.ndarray:
        """Operator this setting implements: sum over tree paths of the
        path projector products weighted by their accept probability."""
        d = 2**self.n_qubits
        if self.kind == "static":
            return np.array(self.branches[0][1].projector, dtype=complex)
        patterns, table = subset_index_table(self.n_qubits, self.first_stage_qubits)
        branch = self.branch_map()
        dim_free = table.shape[1]
        omega = np.zeros((d, d), dtype=complex)
        for j, pat in enumerate(patterns):
            idx = table[j]
            omega[np.ix_(idx, idx)] += _leaf_effect(branch[pat], dim_free)
        return omega

    def target_pass_probability(self, target: PureState) -> float:
        """<psi|Omega_l|psi> computed blockwise (no full operator needed)."""
        if self.kind == "static":
            p = self.branches[0][1].projector
            v = target.amplitudes
            return float(np.real(v.conj() @ p @ v))
        patterns, table = subset_index_table(self.n_qubits, self.first_stage_qubits)
        branch = self.branch_map()
        total = 0.0
        for j, pat in enumerate(patterns):
            block = target.amplitudes[table[j]]
            eff = _leaf_effect(branch[pat], table.shape[1])
            total += float(np.real(block.conj() @ eff @ block))
        return total


# ---------------------------------------------------------------------------
# strategies

@dataclass(frozen=True)
class VerificationStrategy:
    label: str
    target: PureState
    settings: tuple[MeasurementSetting, ...]
    probabilities: np.ndarray
    operator: np.ndarray
    eigenvalues: np.ndarray
    eigenvectors: np.ndarray = field(repr=False)

    @property
    def second_eigenvalue(self) -> float:
        return float(self.eigenvalues[1])

    @property
    def spectral_gap(self) -> float:
        return 1.0 - self.second_eigenvalue

    @property
    def n_qubits(self) -> int:
        return self.target.n_qubits


def assemble_strategy(
    label: str,
    target: PureState,
    settings: list[MeasurementSetting],
    probabilities: list[float],
) -> VerificationStrategy:
    """Combine settings into a strategy and diagonalise its operator.

    Enforces: probabilities sum to 1, every setting passes the target with
    certainty, and the strategy operator has top eigenvalue 1 with the
    target as eigenvector.
    """
    probs = np.asarray(probabilities, dtype=float)
    if len(probs) != len(settings):
        raise ValueError("one probability per setting required")
    if abs(probs.sum() - 1.0) > PROB_ATOL:
        raise ValueError(f"setting probabilities sum to {probs.sum()!r}, not 1")
    for s in settings:
        p_pass = s.target_pass_probability(target)
        if abs(p_pass - 1.0) > SETTING_PASS_ATOL:
            raise ValueError(
                f"setting {s.label!r} passes the target with probability "
                f"{p_pass!r}; strategies must always pass the target"
            )
    d = target.dim
    omega = np.zeros((d, d), dtype=complex)
    for p, s in zip(probs, settings):
        omega += p * s.effective_operator()
    omega = 0.5 * (omega + omega.conj().T)
    eigenvalues, eigenvectors = hermitian_eigensystem(omega)
    if abs(eigenvalues[0] - 1.0) > TOP_EIGENVALUE_ATOL:
        raise ValueError(f"top eigenvalue is {eigenvalues[0]!r}, expected 1")
    # the target must span (or lie inside, if degenerate) the top eigenspace
    residual = np.linalg.norm(omega @ target.amplitudes - target.amplitudes)
    if residual > 1e-7:
        raise ValueError("target state is not a unit eigenvector of the operator")
    probs.setflags(write=False)
    eigenvalues.setflags(write=False)
    return VerificationStrategy(
        label=label,
        target=target,
        settings=tuple(settings),
        probabilities=probs,
        operator=omega,
        eigenvalues=eigenvalues,
        eigenvectors=eigenvectors,
    )


_P_XX_PLUS = pauli_eigenspace_projector(kron(X, X), +1)
_P_YY_PLUS = pauli_eigenspace_projector(kron(Y, Y), +1)
_P_00 = np.zeros((4, 4), dtype=complex)
_P_00[0, 0] = 1.0


def build_homogeneous_w3() -> VerificationStrategy:
    """Nine-setting homogeneous strategy for the three-qubit W state.

    For each control qubit c the first stage measures Z on c.  The "+"
    outcome (control reads 0) routes to an XX test, a YY test, or a fair
    coin between the two, depending on the setting; the "-" outcome routes
    in every setting to a fair coin between unconditional accept and a
    Z+Z+ test on the remaining pair.  With uniform probability 1/9 the
    nine effective operators sum exactly to the homogeneous strategy
    operator, and each setting alone passes the target with certainty.
    (Enumerations whose settings carry pure branches only cannot satisfy
    both constraints at once; the shared minus-branch coin is forced.)
    """
    target = make_w_state(3)
    minus_coin = CoinLeaf(((0.5, Accept()), (0.5, TestLeaf(_P_00))))
    plus_mix = CoinLeaf(((0.5, TestLeaf(_P_XX_PLUS)), (0.5, TestLeaf(_P_YY_PLUS))))
    settings = []
    for c in range(3):
        for tag, plus_node in (
            ("xx", TestLeaf(_P_XX_PLUS)),
            ("yy", TestLeaf(_P_YY_PLUS)),
            ("mix", plus_mix),
        ):
            settings.append(
                MeasurementSetting.adaptive(
                    f"z{c + 1}-{tag}",
                    3,
                    (c,),
                    {(0,): plus_node, (1,): minus_coin},
                )
            )
    probs = [1.0 / 9.0] * 9
    return assemble_strategy("hom-w3", target, settings, probs)


def build_adaptive_w(n: int) -> VerificationStrategy:
    """One-way adaptive strategy for the n-qubit W state.

    One setting per qubit pair i<j: measure Z on all other qubits and
    count excitations k; on k=1 test Z+Z+ on (i, j), on k=0 test the
    positive XX eigenspace on (i, j), on k>=2 reject.
    """
    if not 3 <= n <= 10:
        raise ValueError(f"adaptive W strategy needs n in [3, 10], got {n}")
    target = make_w_state(n)
    settings = []
    for i, j in itertools.combinations(range(n), 2):
        others = tuple(q for q in range(n) if q not in (i, j))
        branches = {}
        for pat in itertools.product((0, 1), repeat=len(others)):
            k = sum(pat)
            if k == 0:
                branches[pat] = TestLeaf(_P_XX_PLUS)
            elif k == 1:
                branches[pat] = TestLeaf(_P_00)
            else:
                branches[pat] = Reject()
        settings.append(
            MeasurementSetting.adaptive(f"pair{i + 1}{j + 1}", n, others, branches)
        )
    m = len(settings)
    return assemble_strategy(f"adaptive-w{n}", target, settings, [1.0 / m] * m)


def theta_basis_states(theta: float) -> list[np.ndarray]:
    """The three product states whose complements verify sin(t)|01>+cos(t)|10>.

    Single-qubit coefficients are sqrt(cos/( cos+sin)) and
    sqrt(sin/(cos+sin)), the stable closed form of 1/sqrt(1+tan) and
    1/sqrt(1+cot) valid at both endpoints.
    """
    s, c = np.sin(theta), np.cos(theta)
    a = np.sqrt(c / (c + s))
    b = np.sqrt(s / (c + s))
    w = np.exp(2j * np.pi / 3)
    out = []
    for pa, pb in ((w, np.exp(-1j * np.pi / 3)), (w**2, np.exp(-5j * np.pi / 3)), (1.0, -1.0)):
        va = np.array([a, pa * b], dtype=complex)
        vb = np.array([b, pb * a], dtype=complex)
        out.append(kron(va, vb))
    return out


def build_optimal_two_qubit(theta: float) -> VerificationStrategy:
    """Optimal non-adaptive strategy for sin(theta)|01> + cos(theta)|10>.

    Four static settings: the negative ZZ eigenspace with weight
    (2 - sin 2t)/(4 + sin 2t), and the complements of three product states
    with the remaining weight split evenly.  Spectral gap:
    1/(2 + sin(t)cos(t)).
    """
    if not 0.0 <= theta <= np.pi / 2:
        raise ValueError(f"theta must lie in [0, pi/2], got {theta}")
    target = make_theta_state(theta)
    alpha = (2.0 - np.sin(2 * theta)) / (4.0 + np.sin(2 * theta))
    p_zz_minus = pauli_eigenspace_projector(kron(Z, Z), -1)
    settings = [MeasurementSetting.static("zz-minus", 2, p_zz_minus)]
    probs = [alpha]
    for k, phi in enumerate(theta_basis_states(theta)):
        comp = np.eye(4, dtype=complex) - np.outer(phi, phi.conj())
        settings.append(MeasurementSetting.static(f"comp{k + 1}", 2, comp))
        probs.append((1.0 - alpha) / 3.0)
    return assemble_strategy(f"opt-2q(theta={theta:.6g})", target, settings, probs)


def sample_complexity(spectral_gap: float, epsilon: float, delta: float) -> int:
    """Number of tests needed: ceil(ln(1/delta) / ln(1/(1 - eps*gap)))."""
    if not 0.0 < spectral_gap <= 1.0:
        raise ValueError(f"spectral gap must be in (0, 1], got {spectral_gap}")
    if not 0.0 < epsilon < 1.0:
        raise ValueError(f"epsilon must be in (0, 1), got {epsilon}")
    if not 0.0 < delta < 1.0:
        raise ValueError(f"delta must be in (0, 1), got {delta}")
    x = epsilon * spectral_gap
    if x >= 1.0:
        raise ValueError("epsilon * spectral_gap must be below 1")
    return math.ceil(math.log(1.0 / delta) / math.log(1.0 / (1.0 - x)))


def worst_case_state(strategy: VerificationStrategy, epsilon: float) -> DensityMatrix:
    """State of infidelity epsilon with the largest pass probability.

    Mixes the target with an eigenvector of the second-largest eigenvalue,
    giving pass probability exactly ``1 - epsilon * spectral_gap``.  When
    the second eigenvalue is degenerate any cluster member is an equally
    valid witness; the one returned is whichever the eigensolver listed
    first.
    """
    if not 0.0 <= epsilon < 1.0:
        raise ValueError(f"epsilon must be in [0, 1), got {epsilon}")
    if strategy.spectral_gap <= 1e-9:
        raise ValueError("strategy has zero spectral gap: every state passes maximally")
    psi = strategy.target.amplitudes
    v2 = strategy.eigenvectors[:, 1]
    # with a simple top eigenvalue v2 is orthogonal to the target already;
    # remove any residual component to machine precision
    v2 = v2 - np.vdot(psi, v2) * psi
    v2 /= np.linalg.norm(v2)
    mat = (1.0 - epsilon) * np.outer(psi, psi.conj()) + epsilon * np.outer(v2, v2.conj())
    return DensityMatrix(strategy.n_qubits, mat)


# ---------------------------------------------------------------------------
# serialization (audit documents, golden tests)

def _matrix_dict(m: np.ndarray) -> dict:
    return {"re": np.real(m).tolist(), "im": np.imag(m).tolist()}


def _node_dict(node) -> dict:
    if isinstance(node, Accept):
        return {"type": "accept"}
    if isinstance(node, Reject):
        return {"type": "reject"}
    if isinstance(node, TestLeaf):
        return {"type": "test", "projector": _matrix_dict(node.projector)}
    if isinstance(node, CoinLeaf):
        return {
            "type": "coin",
            "arms": [{"weight": w, "node": _node_dict(a)} for w, a in node.arms],
        }
    raise TypeError(f"unknown tree node {node!r}")


def strategy_description(strategy: VerificationStrategy) -> dict:
    """Structured description with projectors as real/imaginary arrays."""
    settings = []
    for p, s in zip(strategy.probabilities, strategy.settings):
        entry = {"label": s.label, "kind": s.kind, "probability": float(p)}
        if s.kind == "static":
            entry["accept_projector"] = _matrix_dict(s.branches[0][1].projector)
        else:
            entry["first_stage_qubits"] = list(s.first_stage_qubits)
            entry["branches"] = [
                {"outcome": list(pat), "node": _node_dict(node)}
                for pat, node in s.branches
            ]
        settings.append(entry)
    return {
        "label": strategy.label,
        "n_qubits": strategy.n_qubits,
        "target": _matrix_dict(strategy.target.amplitudes.reshape(1, -1)),
        "spectral_gap": strategy.spectral_gap,
        "second_eigenvalue": strategy.second_eigenvalue,
        "settings": settings,
    }


def strategy_to_json(strategy: VerificationStrategy, indent: int | None = 2) -> str:
    return json.dumps(strategy_description(strategy), indent=indent, sort_keys=True)
