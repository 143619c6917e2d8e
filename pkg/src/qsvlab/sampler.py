"""Monte Carlo execution of verification runs against simulated sources.

Two levels of realism:

* operator level: each trial draws a setting and passes with probability
  ``Tr(Omega_l sigma)`` — the pass statistics, directly;
* circuit level: each trial physically walks the measurement tree —
  first-stage projective collapse, branch selection, classical coins,
  second-stage two-outcome test.

Both levels give every trial its own slice of a counter-based stream:
trial ``i`` of a run owns a fixed-width block of uniforms, so results are
reproducible bit-for-bit and independent of aggregation order.  Runs on a
source that yields one fixed state are evaluated vectorized; sources that
vary per trial fall back to an equivalent per-trial loop.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .rng import uniform_blocks
from .states import DensityMatrix, PureState, subset_index_table
from .strategies import (
    Accept,
    CoinLeaf,
    MeasurementSetting,
    Reject,
    TestLeaf,
    VerificationStrategy,
)

_OPERATOR_TAG = 0x09A1
_CIRCUIT_TAG = 0xC14C

_PROB_SNAP = 1e-12


class SourceError(RuntimeError):
    """Raised when a source yields an invalid density matrix."""

    def __init__(self, trial: int, reason: str):
        super().__init__(f"source produced an invalid state at trial {trial}: {reason}")
        self.trial = trial


@dataclass(frozen=True)
class TestRecord:
    trial: int
    setting: str
    passed: bool
    stream_offset: int


@dataclass(frozen=True)
class TestRunSummary:
    n_tests: int
    passes: int
    strategy_label: str
    master_seed: int

    @property
    def frequency(self) -> float:
        return self.passes / self.n_tests


@dataclass(frozen=True)
class SweepPoint:
    n_tests: int
    mean_frequency: float
    frequencies: tuple[float, ...]


def constant_source(state: DensityMatrix | PureState):
    """Source that emits the same state every trial (enables vectorization)."""
    rho = state.density() if isinstance(state, PureState) else state

    def src(_trial: int) -> DensityMatrix:
        return rho

    src.constant = rho
    return src


def _as_source(source):
    if isinstance(source, (DensityMatrix, PureState)):
        return constant_source(source)
    return source


def _check_sigma(sigma: DensityMatrix, strategy: VerificationStrategy, trial: int) -> np.ndarray:
    if not isinstance(sigma, DensityMatrix):
        raise SourceError(trial, f"expected a DensityMatrix, got {type(sigma).__name__}")
    if sigma.n_qubits != strategy.n_qubits:
        raise SourceError(
            trial,
            f"state on {sigma.n_qubits} qubits, strategy on {strategy.n_qubits}",
        )
    return np.asarray(sigma.matrix)


def _snap(p: np.ndarray) -> np.ndarray:
    p = np.clip(p, 0.0, 1.0)
    p[p > 1.0 - _PROB_SNAP] = 1.0
    p[p < _PROB_SNAP] = 0.0
    return p


# ---------------------------------------------------------------------------
# per-setting tables

@lru_cache(maxsize=None)
def _cached_subset_table(n_qubits: int, qubits: tuple[int, ...]):
    return subset_index_table(n_qubits, qubits)


def _subset_cache(setting: MeasurementSetting):
    if setting.kind == "static":
        return None
    return _cached_subset_table(setting.n_qubits, setting.first_stage_qubits)


def setting_pass_probability(setting: MeasurementSetting, sigma: np.ndarray) -> float:
    """Tr(Omega_l sigma), evaluated blockwise."""
    if setting.kind == "static":
        p = setting.branches[0][1].projector
        return float(np.real(np.sum(p.T * sigma)))
    patterns, table = _subset_cache(setting)
    branch = setting.branch_map()
    total = 0.0
    for j, pat in enumerate(patterns):
        idx = table[j]
        block = sigma[np.ix_(idx, idx)]
        node = branch[pat]
        if isinstance(node, Reject):
            continue
        if isinstance(node, Accept):
            total += float(np.real(np.trace(block)))
        else:
            eff = _node_effect_matrix(node, table.shape[1])
            total += float(np.real(np.sum(eff.T * block)))
    return total


def _node_effect_matrix(node, dim_free: int) -> np.ndarray:
    if isinstance(node, TestLeaf):
        return np.asarray(node.projector)
    if isinstance(node, CoinLeaf):
        return sum(w * _node_effect_matrix(a, dim_free) for w, a in node.arms)
    if isinstance(node, Accept):
        return np.eye(dim_free, dtype=complex)
    if isinstance(node, Reject):
        return np.zeros((dim_free, dim_free), dtype=complex)
    raise TypeError(node)


def _leaf_arms(node) -> tuple[np.ndarray, list]:
    """Flatten a leaf into (cumulative arm weights, arm list)."""
    if isinstance(node, CoinLeaf):
        w = np.cumsum([a for a, _ in node.arms])
        return w, [arm for _, arm in node.arms]
    return np.array([1.0]), [node]


def _arm_pass_probability(arm, block: np.ndarray, block_prob: float) -> float:
    if isinstance(arm, Accept):
        return 1.0
    if isinstance(arm, Reject):
        return 0.0
    if isinstance(arm, TestLeaf):
        if block_prob <= 0.0:
            return 0.0
        t = float(np.real(np.sum(np.asarray(arm.projector).T * block))) / block_prob
        return float(_snap(np.array([t]))[0])
    raise TypeError(arm)


class _CircuitTables:
    """Branch distributions of every setting for one fixed source state.

    For setting l and first-stage outcome pattern b the trial needs: the
    outcome probability, the coin arm weights, and each arm's accept
    probability on the collapsed state.  All are padded into rectangular
    arrays so a whole run vectorizes.
    """

    def __init__(self, strategy: VerificationStrategy, sigma: np.ndarray):
        n_set = len(strategy.settings)
        max_out = 1
        max_arms = 1
        for s in strategy.settings:
            if s.kind == "adaptive":
                max_out = max(max_out, 2 ** len(s.first_stage_qubits))
            for _, node in s.branches:
                if isinstance(node, CoinLeaf):
                    max_arms = max(max_arms, len(node.arms))
        self.outcome_cdf = np.ones((n_set, max_out))
        self.arm_cdf = np.ones((n_set, max_out, max_arms))
        self.arm_pass = np.zeros((n_set, max_out, max_arms))
        for li, s in enumerate(strategy.settings):
            if s.kind == "static":
                proj = s.branches[0][1].projector
                t = float(np.real(np.sum(np.asarray(proj).T * sigma)))
                self.outcome_cdf[li, :] = 1.0
                self.arm_pass[li, 0, :] = _snap(np.array([t]))[0]
                continue
            patterns, table = _subset_cache(s)
            branch = s.branch_map()
            probs = np.zeros(max_out)
            for j, pat in enumerate(patterns):
                idx = table[j]
                block = sigma[np.ix_(idx, idx)]
                pb = float(np.real(np.trace(block)))
                probs[j] = max(pb, 0.0)
                arm_w, arms = _leaf_arms(branch[pat])
                self.arm_cdf[li, j, : len(arm_w)] = arm_w
                self.arm_cdf[li, j, len(arm_w):] = 1.0
                for ai, arm in enumerate(arms):
                    self.arm_pass[li, j, ai] = _arm_pass_probability(arm, block, probs[j])
                self.arm_pass[li, j, len(arms):] = self.arm_pass[li, j, len(arms) - 1]
            total = probs.sum()
            self.outcome_cdf[li] = np.cumsum(probs / total)

    def evaluate(self, settings: np.ndarray, u_out: np.ndarray, u_coin: np.ndarray, u_test: np.ndarray) -> np.ndarray:
        rows = self.outcome_cdf[settings]
        outcomes = (u_out[:, None] > rows).sum(axis=1)
        outcomes = np.minimum(outcomes, rows.shape[1] - 1)
        arm_rows = self.arm_cdf[settings, outcomes]
        arms = (u_coin[:, None] > arm_rows).sum(axis=1)
        arms = np.minimum(arms, arm_rows.shape[1] - 1)
        pass_prob = self.arm_pass[settings, outcomes, arms]
        return u_test < pass_prob


# ---------------------------------------------------------------------------
# runs

def _draw_settings(strategy: VerificationStrategy, u: np.ndarray) -> np.ndarray:
    cdf = np.cumsum(strategy.probabilities)
    idx = (u[:, None] > cdf).sum(axis=1)
    return np.minimum(idx, len(cdf) - 1)


def _make_records(strategy, settings_idx, passed, width) -> list[TestRecord]:
    labels = [s.label for s in strategy.settings]
    return [
        TestRecord(i, labels[settings_idx[i]], bool(passed[i]), i * width)
        for i in range(len(passed))
    ]


def setting_counts(strategy, settings_idx, passed) -> dict[str, tuple[int, int]]:
    """Per-setting (draws, passes) aggregation of one run."""
    n_set = len(strategy.settings)
    draws = np.bincount(settings_idx, minlength=n_set)
    hits = np.bincount(settings_idx, weights=passed.astype(float), minlength=n_set)
    return {
        s.label: (int(draws[i]), int(round(hits[i])))
        for i, s in enumerate(strategy.settings)
    }


def run_operator_level(
    strategy: VerificationStrategy,
    source,
    n_tests: int,
    master_seed: int,
    stream_fields: tuple[int, ...] = (),
    keep_records: bool = False,
    keep_setting_counts: bool = False,
) -> TestRunSummary | tuple:
    """Run n_tests trials; trial i passes with probability Tr(Omega_l sigma_i)."""
    if n_tests < 1:
        raise ValueError("n_tests must be at least 1")
    source = _as_source(source)
    u = uniform_blocks(master_seed, n_tests, 2, _OPERATOR_TAG, *stream_fields)
    settings_idx = _draw_settings(strategy, u[:, 0])

    if hasattr(source, "constant"):
        sigma = _check_sigma(source.constant, strategy, 0)
        q = _snap(np.array([
            setting_pass_probability(s, sigma) for s in strategy.settings
        ]))
        passed = u[:, 1] < q[settings_idx]
    else:
        cache: dict[int, np.ndarray] = {}
        passed = np.zeros(n_tests, dtype=bool)
        for i in range(n_tests):
            sigma_dm = source(i)
            key = id(sigma_dm)
            if key not in cache:
                sigma = _check_sigma(sigma_dm, strategy, i)
                cache[key] = _snap(np.array([
                    setting_pass_probability(s, sigma) for s in strategy.settings
                ]))
            passed[i] = u[i, 1] < cache[key][settings_idx[i]]

    summary = TestRunSummary(n_tests, int(passed.sum()), strategy.label, master_seed)
    if keep_records:
        return summary, _make_records(strategy, settings_idx, passed, 2)
    if keep_setting_counts:
        return summary, setting_counts(strategy, settings_idx, passed)
    return summary


def run_circuit_level(
    strategy: VerificationStrategy,
    source,
    n_tests: int,
    master_seed: int,
    stream_fields: tuple[int, ...] = (),
    keep_records: bool = False,
    keep_setting_counts: bool = False,
) -> TestRunSummary | tuple:
    """Run n_tests trials through the full measurement trees.

    Per trial: sample a setting, measure the first-stage subset projectively
    (with collapse), follow the observed branch, flip its classical coin if
    present, and apply the second-stage two-outcome test.
    """
    if n_tests < 1:
        raise ValueError("n_tests must be at least 1")
    source = _as_source(source)
    u = uniform_blocks(master_seed, n_tests, 4, _CIRCUIT_TAG, *stream_fields)
    settings_idx = _draw_settings(strategy, u[:, 0])

    if hasattr(source, "constant"):
        sigma = _check_sigma(source.constant, strategy, 0)
        tables = _CircuitTables(strategy, sigma)
        passed = tables.evaluate(settings_idx, u[:, 1], u[:, 2], u[:, 3])
    else:
        cache: dict[int, _CircuitTables] = {}
        passed = np.zeros(n_tests, dtype=bool)
        for i in range(n_tests):
            sigma_dm = source(i)
            key = id(sigma_dm)
            if key not in cache:
                cache[key] = _CircuitTables(strategy, _check_sigma(sigma_dm, strategy, i))
            passed[i] = cache[key].evaluate(
                settings_idx[i : i + 1], u[i : i + 1, 1], u[i : i + 1, 2], u[i : i + 1, 3]
            )[0]

    summary = TestRunSummary(n_tests, int(passed.sum()), strategy.label, master_seed)
    if keep_records:
        return summary, _make_records(strategy, settings_idx, passed, 4)
    if keep_setting_counts:
        return summary, setting_counts(strategy, settings_idx, passed)
    return summary


def run_scaling_sweep(
    strategy: VerificationStrategy,
    source,
    n_grid: list[int],
    trials_per_point: int,
    master_seed: int,
    level: str = "operator",
) -> list[SweepPoint]:
    """Repeat runs over a grid of test counts, keeping every per-trial f.

    Each (grid point, trial) pair owns an independent substream keyed by
    the grid value and the trial index.
    """
    if trials_per_point < 1:
        raise ValueError("trials_per_point must be at least 1")
    if any(b <= a for a, b in zip(n_grid, n_grid[1:])):
        raise ValueError("n_grid must be strictly ascending")
    runner = {"operator": run_operator_level, "circuit": run_circuit_level}[level]
    points = []
    for n_tests in n_grid:
        fs = []
        for trial in range(trials_per_point):
            summary = runner(
                strategy, source, n_tests, master_seed, stream_fields=(n_tests, trial)
            )
            fs.append(summary.frequency)
        points.append(SweepPoint(n_tests, float(np.mean(fs)), tuple(fs)))
    return points


def records_to_text(records: list[TestRecord]) -> str:
    lines = ["trial\tsetting\tpassed"]
    lines += [f"{r.trial}\t{r.setting}\t{int(r.passed)}" for r in records]
    return "\n".join(lines) + "\n"
