"""Closed-loop source tuning: estimate fidelity, nudge knobs, repeat.

A hidden-parameter device model stands in for the physical source: knob
values plus unknown offsets determine the emitted pure state, followed by
an intrinsic noise channel.  A derivative-free optimizer (SPSA) adjusts
the knobs using only fidelity estimates — either from verification runs
or from tomography —, never the hidden offsets or the oracle fidelity.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

from .analysis import estimate_fidelity
from .channels import NoiseModel, apply_noise
from .rng import stream
from .sampler import run_operator_level
from .states import DensityMatrix, PureState, fidelity, make_theta_state, make_w_state
from .strategies import VerificationStrategy
from .tomography import pauli_settings, reconstruct_mle, simulate_tomography_data


@dataclass(frozen=True)
class DeviceModel:
    """Simulated source: emitted state = family(knobs + hidden offsets) + noise.

    ``family`` is "two-qubit" (knobs theta, phi) or "w3" (knobs theta, phi,
    split).  The emitted state is deterministic in the knob values; with
    offsets exactly cancelled and no intrinsic noise it equals the target.
    """

    family: str
    target: PureState
    knobs: dict[str, float]
    hidden_offsets: dict[str, float] = field(repr=False)
    noise: NoiseModel | None = None

    def __post_init__(self):
        if self.family not in ("two-qubit", "w3"):
            raise ValueError(f"unknown device family {self.family!r}")
        if set(self.knobs) != set(self.hidden_offsets):
            raise ValueError("knobs and hidden offsets must use the same names")

    def with_knobs(self, knobs: dict[str, float]) -> "DeviceModel":
        if set(knobs) != set(self.knobs):
            raise ValueError("knob names must not change")
        return replace(self, knobs=dict(knobs))

    def emit(self) -> DensityMatrix:
        eff = {k: self.knobs[k] + self.hidden_offsets[k] for k in self.knobs}
        if self.family == "two-qubit":
            amps = np.zeros(4, dtype=complex)
            amps[1] = math.sin(eff["theta"])
            amps[2] = np.exp(1j * eff["phi"]) * math.cos(eff["theta"])
            state = PureState(2, amps)
        else:
            s, c = math.sin(eff["theta"]), math.cos(eff["theta"])
            cs, ss = math.cos(eff["split"]), math.sin(eff["split"])
            amps = np.zeros(8, dtype=complex)
            amps[0b001] = s
            amps[0b100] = np.exp(1j * eff["phi"]) * c * cs
            amps[0b010] = np.exp(1j * eff["phi"]) * c * ss
            state = PureState(3, amps)
        rho = state.density()
        if self.noise is not None:
            rho = apply_noise(rho, self.noise)
        return rho

    def oracle_fidelity(self) -> float:
        """Trace-oracle fidelity of the emitted state (test harness only)."""
        return fidelity(self.emit(), self.target)


def two_qubit_device(
    theta_target: float,
    hidden_offsets: dict[str, float],
    noise: NoiseModel | None = None,
) -> DeviceModel:
    """Device emitting sin(theta')|01> + e^{i phi'}cos(theta')|10>."""
    return DeviceModel(
        family="two-qubit",
        target=make_theta_state(theta_target),
        knobs={"theta": theta_target, "phi": 0.0},
        hidden_offsets=dict(hidden_offsets),
        noise=noise,
    )


def w3_device(hidden_offsets: dict[str, float], noise: NoiseModel | None = None) -> DeviceModel:
    """Device emitting the path-encoded three-qubit W state at exact settings."""
    return DeviceModel(
        family="w3",
        target=make_w_state(3),
        knobs={"theta": math.asin(1.0 / math.sqrt(3.0)), "phi": 0.0, "split": math.pi / 4},
        hidden_offsets=dict(hidden_offsets),
        noise=noise,
    )


@dataclass(frozen=True)
class TunePoint:
    iteration: int
    knobs: dict[str, float]
    batch_size: int
    f_estimate: float
    std: float
    cumulative_samples: int


@dataclass(frozen=True)
class TuneTrace:
    points: tuple[TunePoint, ...]
    final_knobs: dict[str, float]
    termination: str
    objective: str

    @property
    def cumulative_samples(self) -> int:
        return self.points[-1].cumulative_samples if self.points else 0


@dataclass(frozen=True)
class SpsaConfig:
    """Gain schedule a_k = a/(k+A)^alpha, c_k = c/k^gamma (ascent)."""

    a: float = 0.15
    c: float = 0.1
    big_a: float = 10.0
    alpha: float = 0.602
    gamma: float = 0.101
    max_iterations: int = 10_000


def _spsa_loop(objective, knobs0, sample_budget, config, rng, objective_name):
    """Generic SPSA ascent over a noisy objective.

    ``objective(knobs) -> (estimate, std, samples)``.  The loop sees only
    these outputs; nothing else about the system under tune is reachable
    from here.
    """
    names = sorted(knobs0)
    knobs = dict(knobs0)
    points = []

    est, std, per_eval = objective(knobs)
    cumulative = per_eval
    points.append(TunePoint(0, dict(knobs), per_eval, est, std, cumulative))
    if cumulative > sample_budget:
        raise ValueError("sample budget does not cover even the initial evaluation")

    termination = "max_iterations"
    for k in range(1, config.max_iterations + 1):
        if cumulative + 2 * per_eval > sample_budget:
            termination = "budget"
            break
        ck = config.c / k**config.gamma
        ak = config.a / (k + config.big_a) ** config.alpha
        delta = np.where(rng.random(len(names)) < 0.5, -1.0, 1.0)
        plus = {n: knobs[n] + ck * d for n, d in zip(names, delta)}
        minus = {n: knobs[n] - ck * d for n, d in zip(names, delta)}
        f_plus, std_p, _ = objective(plus)
        f_minus, std_m, _ = objective(minus)
        cumulative += 2 * per_eval
        grad = (f_plus - f_minus) / (2.0 * ck)
        for n, d in zip(names, delta):
            knobs[n] += ak * grad * d
        # log the pair mean (unbiased at the iterate to O(ck^2)) rather than
        # spending a third batch on a dedicated record evaluation
        est = 0.5 * (f_plus + f_minus)
        std = 0.5 * math.hypot(std_p, std_m) if std_p == std_p and std_m == std_m else float("nan")
        points.append(TunePoint(k, dict(knobs), 2 * per_eval, est, std, cumulative))

    return TuneTrace(tuple(points), dict(knobs), termination, objective_name)


def tune_with_qsv(
    device: DeviceModel,
    strategy: VerificationStrategy,
    batch_size: int,
    sample_budget: int,
    config: SpsaConfig,
    master_seed: int,
) -> TuneTrace:
    """SPSA over the device knobs, objective = direct fidelity estimate.

    Each objective evaluation runs a fresh batch of verification tests on
    the current device output and inverts the pass frequency.  Total
    samples never exceed ``sample_budget``.
    """
    if sample_budget < batch_size:
        raise ValueError("budget must cover at least one batch")
    rng = stream(master_seed, 0x5A5A)
    eval_counter = [0]
    gap = strategy.spectral_gap

    def objective(knobs):
        eval_counter[0] += 1
        rho = device.with_knobs(knobs).emit()
        summary = run_operator_level(
            strategy, rho, batch_size, master_seed, stream_fields=(0xE7A1, eval_counter[0])
        )
        est = estimate_fidelity(summary.frequency, batch_size, gap, homogeneous=True)
        return est.point, est.std, batch_size

    return _spsa_loop(objective, device.knobs, sample_budget, config, rng, "qsv")


def tune_with_qst(
    device: DeviceModel,
    shots_per_setting: int,
    sample_budget: int,
    config: SpsaConfig,
    master_seed: int,
) -> TuneTrace:
    """SPSA with the objective evaluated by MLE tomography fidelity."""
    n_settings = len(pauli_settings(device.target.n_qubits))
    per_eval = shots_per_setting * n_settings
    if sample_budget < per_eval:
        raise ValueError("budget must cover at least one tomography evaluation")
    rng = stream(master_seed, 0x5A5A)
    eval_counter = [0]

    def objective(knobs):
        eval_counter[0] += 1
        rho = device.with_knobs(knobs).emit()
        data = simulate_tomography_data(
            rho, shots_per_setting, stream(master_seed, 0x70D0, eval_counter[0])
        )
        result = reconstruct_mle(data, target=device.target)
        return result.fidelity_to_target, float("nan"), per_eval

    return _spsa_loop(objective, device.knobs, sample_budget, config, rng, "qst")


def trace_to_text(
    trace: TuneTrace,
    oracle_fidelities: list[float] | None = None,
) -> str:
    """Delimiter-separated trace; the oracle column only when provided."""
    names = sorted(trace.final_knobs)
    header = ["iteration", *names, "f_est", "std", "cumulative_samples"]
    if oracle_fidelities is not None:
        header.append("f_true_oracle")
    lines = ["\t".join(header)]
    for i, p in enumerate(trace.points):
        row = [str(p.iteration)]
        row += [repr(p.knobs[n]) for n in names]
        row += [repr(p.f_estimate), repr(p.std), str(p.cumulative_samples)]
        if oracle_fidelities is not None:
            row.append(repr(oracle_fidelities[i]))
        lines.append("\t".join(row))
    return "\n".join(lines) + "\n"


def oracle_fidelity_trace(trace: TuneTrace, device: DeviceModel) -> list[float]:
    """Trace-oracle fidelity at each recorded knob setting (test harness)."""
    return [device.with_knobs(p.knobs).oracle_fidelity() for p in trace.points]
