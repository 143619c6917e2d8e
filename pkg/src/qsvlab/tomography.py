"""Full state tomography baseline: Pauli-basis data and MLE reconstruction.

The setting set is the 3^n Pauli strings with all 2^n outcomes recorded
per setting (informationally complete).  Reconstruction is the iterative
multiplicative update rho <- R rho R / tr (R the likelihood gradient
operator), started from the maximally mixed state, with step damping 0.5
whenever a full step would decrease the log-likelihood.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

from .states import DensityMatrix, PureState, fidelity

LOGLIK_GAIN_TOL = 1e-10
MAX_ITERATIONS = 5000

_EIGENBASES = {
    "X": np.array([[1, 1], [1, -1]], dtype=complex) / np.sqrt(2),
    "Y": np.array([[1, 1], [1j, -1j]], dtype=complex) / np.sqrt(2),
    "Z": np.eye(2, dtype=complex),
}


def pauli_settings(n: int) -> list[str]:
    """All 3^n measurement settings in lexicographic order (X < Y < Z)."""
    return ["".join(p) for p in itertools.product("XYZ", repeat=n)]


def setting_basis(setting: str) -> np.ndarray:
    """Unitary whose columns are the joint eigenbasis of the Pauli string.

    Column b (bits of the outcome string) is the joint eigenvector with
    per-qubit eigenvalue +1 for bit 0 and -1 for bit 1.
    """
    u = np.array([[1.0]], dtype=complex)
    for ch in setting:
        try:
            u = np.kron(u, _EIGENBASES[ch])
        except KeyError:
            raise ValueError(f"unknown Pauli letter in setting {setting!r}") from None
    return u


@dataclass(frozen=True)
class TomographySettingData:
    """Outcome counts of one Pauli-string setting.

    Counts may be fractional: injecting exact Born probabilities with a
    budget of 1.0 per setting represents the infinite-shot limit.
    """

    setting: str
    counts: dict[str, float]

    def __post_init__(self):
        n = len(self.setting)
        for bits in self.counts:
            if len(bits) != n or any(ch not in "01" for ch in bits):
                raise ValueError(f"outcome {bits!r} does not match setting {self.setting!r}")
        if any(v < 0 for v in self.counts.values()):
            raise ValueError("counts must be nonnegative")

    @property
    def total(self) -> float:
        return float(sum(self.counts.values()))


@dataclass(frozen=True)
class TomographyResult:
    state: DensityMatrix
    fidelity_to_target: float | None
    total_samples: float
    iterations: int
    log_likelihood: float
    log_likelihood_history: tuple[float, ...] | None = None


def born_outcome_probabilities(rho: np.ndarray, setting: str) -> np.ndarray:
    u = setting_basis(setting)
    return np.clip(np.real(np.diag(u.conj().T @ rho @ u)), 0.0, None)


def simulate_tomography_data(
    state: DensityMatrix,
    shots_per_setting: int,
    rng: np.random.Generator,
) -> list[TomographySettingData]:
    """Multinomial outcome counts for every Pauli setting."""
    n = state.n_qubits
    if n > 5:
        raise ValueError("tomography simulation is limited to 5 qubits")
    data = []
    for setting in pauli_settings(n):
        p = born_outcome_probabilities(state.matrix, setting)
        p = p / p.sum()
        draws = rng.multinomial(shots_per_setting, p)
        counts = {
            format(k, f"0{n}b"): int(c) for k, c in enumerate(draws) if c > 0
        }
        data.append(TomographySettingData(setting, counts))
    return data


def exact_probability_data(
    state: DensityMatrix,
    budget_per_setting: float = 1e9,
) -> list[TomographySettingData]:
    """Infinite-shot limit: exact Born probabilities injected as counts.

    The virtual budget only sets the likelihood scale; a large value makes
    the absolute stopping rule of the reconstruction effectively relative,
    so the fixed point is resolved sharply.
    """
    n = state.n_qubits
    data = []
    for setting in pauli_settings(n):
        p = born_outcome_probabilities(state.matrix, setting)
        p = p / p.sum()
        counts = {
            format(k, f"0{n}b"): float(v) * budget_per_setting
            for k, v in enumerate(p)
            if v > 1e-15
        }
        data.append(TomographySettingData(setting, counts))
    return data


def _measurement_vectors(data: list[TomographySettingData], n: int):
    """Stack rank-1 projector vectors and their counts across all data."""
    vecs = []
    counts = []
    for d in data:
        u = setting_basis(d.setting)
        for bits, c in sorted(d.counts.items()):
            vecs.append(u[:, int(bits, 2)])
            counts.append(c)
    return np.array(vecs), np.array(counts, dtype=float)


def _completeness_check(data: list[TomographySettingData], n: int) -> None:
    """Reject informationally incomplete data, naming a missing direction.

    A Pauli-string setting spans exactly the operators diagonal in its
    joint eigenbasis, i.e. every string obtained by replacing letters with
    I.  The set is informationally complete iff every non-identity Pauli
    string is covered by some performed setting.
    """
    performed = {d.setting for d in data}
    for label in itertools.product("IXYZ", repeat=n):
        name = "".join(label)
        if set(name) == {"I"}:
            continue
        covered = any(
            all(t == "I" or t == s[q] for q, t in enumerate(name))
            for s in performed
        )
        if not covered:
            raise ValueError(
                f"measurement data is informationally incomplete: Pauli "
                f"direction {name} is not covered by any measured setting"
            )


def _log_likelihood(counts: np.ndarray, probs: np.ndarray) -> float:
    mask = counts > 0
    return float(np.sum(counts[mask] * np.log(np.clip(probs[mask], 1e-300, None))))


def reconstruct_mle(
    data: list[TomographySettingData],
    target: PureState | None = None,
    return_history: bool = False,
) -> TomographyResult:
    """Maximum-likelihood reconstruction by damped RrhoR fixed-point ascent.

    Stops when the log-likelihood gain drops below 1e-10 or after 5000
    iterations.  The output is a valid density matrix; the log-likelihood
    never decreases across accepted steps.
    """
    if not data:
        raise ValueError("no tomography data")
    n = len(data[0].setting)
    if any(len(d.setting) != n for d in data):
        raise ValueError("settings act on differing qubit counts")
    _completeness_check(data, n)
    vecs, counts = _measurement_vectors(data, n)
    total = float(counts.sum())
    d = 2**n
    weights = counts / total

    rho = np.eye(d, dtype=complex) / d
    probs = _outcome_probs(vecs, rho)
    ll = _log_likelihood(counts, probs)
    history = [ll] if return_history else None
    identity = np.eye(d, dtype=complex)
    iterations = 0
    for iterations in range(1, MAX_ITERATIONS + 1):
        r = _r_operator(vecs, weights, probs, d)
        # full multiplicative step, halved toward the identity whenever it
        # would lower the likelihood (keeps every accepted step an ascent)
        alpha = 1.0
        while True:
            step = (1.0 - alpha) * identity + alpha * r
            cand = step @ rho @ step
            cand /= np.real(np.trace(cand))
            cand_probs = _outcome_probs(vecs, cand)
            cand_ll = _log_likelihood(counts, cand_probs)
            if cand_ll >= ll or alpha < 1e-8:
                break
            alpha *= 0.5
        gain = cand_ll - ll
        if gain < 0.0:
            break  # no ascent direction left: fixed point reached
        rho, probs, ll = cand, cand_probs, cand_ll
        if history is not None:
            history.append(ll)
        if gain < LOGLIK_GAIN_TOL:
            break

    rho = 0.5 * (rho + rho.conj().T)
    w = np.linalg.eigvalsh(rho)
    if w[0] < 0:  # clip tiny negative ripple from the fixed point
        w2, v2 = np.linalg.eigh(rho)
        w2 = np.clip(w2, 0.0, None)
        rho = (v2 * w2) @ v2.conj().T
        rho /= np.real(np.trace(rho))
    dm = DensityMatrix(n, rho)
    fid = fidelity(dm, target) if target is not None else None
    return TomographyResult(
        dm, fid, total, iterations, ll,
        tuple(history) if history is not None else None,
    )


def _outcome_probs(vecs: np.ndarray, rho: np.ndarray) -> np.ndarray:
    return np.clip(np.real(np.einsum("ki,ij,kj->k", vecs.conj(), rho, vecs)), 0.0, None)


def _r_operator(vecs: np.ndarray, weights: np.ndarray, probs: np.ndarray, d: int) -> np.ndarray:
    w = np.where(probs > 1e-15, weights / np.clip(probs, 1e-15, None), 0.0)
    r = (vecs.T * w) @ vecs.conj()  # sum_k w_k |psi_k><psi_k|
    return 0.5 * (r + r.conj().T)


def fidelity_convergence_study(
    state: DensityMatrix,
    target: PureState,
    photon_grid: list[int],
    repetitions: int,
    rng: np.random.Generator,
) -> list[tuple[int, float, float]]:
    """Mean and spread of reconstructed fidelity versus total sample budget.

    Each budget is split evenly across the 3^n settings (remainder going
    to the lexicographically first settings); ``repetitions`` independent
    datasets are simulated and reconstructed per budget.
    """
    if repetitions < 2:
        raise ValueError("repetitions must be at least 2")
    settings = pauli_settings(state.n_qubits)
    rows = []
    for budget in photon_grid:
        base, extra = divmod(int(budget), len(settings))
        fids = []
        for _ in range(repetitions):
            data = []
            for k, setting in enumerate(settings):
                shots = base + (1 if k < extra else 0)
                p = born_outcome_probabilities(state.matrix, setting)
                p = p / p.sum()
                draws = rng.multinomial(shots, p)
                counts = {
                    format(i, f"0{state.n_qubits}b"): int(c)
                    for i, c in enumerate(draws)
                    if c > 0
                }
                data.append(TomographySettingData(setting, counts))
            fids.append(reconstruct_mle(data, target).fidelity_to_target)
        rows.append((int(budget), float(np.mean(fids)), float(np.std(fids, ddof=1))))
    return rows


# ---------------------------------------------------------------------------
# text round-trip: "setting outcome count" per line

def tomography_data_to_text(data: list[TomographySettingData]) -> str:
    lines = ["setting\toutcome\tcount"]
    for d in data:
        for bits, c in sorted(d.counts.items()):
            val = repr(int(c)) if float(c).is_integer() else repr(float(c))
            lines.append(f"{d.setting}\t{bits}\t{val}")
    return "\n".join(lines) + "\n"


def tomography_data_from_text(text: str) -> list[TomographySettingData]:
    lines = [ln for ln in text.splitlines() if ln.strip()]
    if not lines or lines[0].split("\t") != ["setting", "outcome", "count"]:
        raise ValueError("missing 'setting outcome count' header line")
    grouped: dict[str, dict[str, float]] = {}
    for k, ln in enumerate(lines[1:], start=2):
        parts = ln.split("\t")
        if len(parts) != 3:
            raise ValueError(f"line {k}: expected 3 tab-separated fields, got {len(parts)}")
        setting, bits, count = parts
        try:
            value = float(count)
        except ValueError:
            raise ValueError(f"line {k}: count {count!r} is not a number") from None
        grouped.setdefault(setting, {})[bits] = value
    return [TomographySettingData(s, c) for s, c in sorted(grouped.items())]
