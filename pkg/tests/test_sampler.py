import math

import numpy as np
import pytest

from qsvlab.channels import NoiseModel, apply_noise
from qsvlab.sampler import (
    SourceError,
    constant_source,
    records_to_text,
    run_circuit_level,
    run_operator_level,
    run_scaling_sweep,
    setting_pass_probability,
)
from qsvlab.sampler import _CircuitTables
from qsvlab.states import DensityMatrix, make_theta_state, make_w_state
from qsvlab.strategies import assemble_strategy, worst_case_state

from conftest import binomial_sigma, omega_hom_w3_oracle, two_proportion_z


def test_exact_target_always_passes_both_levels(hom_w3):
    w3 = make_w_state(3)
    for runner in (run_operator_level, run_circuit_level):
        summary = runner(hom_w3, w3, 20_000, 11)
        assert summary.passes == summary.n_tests


def test_worst_case_pass_rate_matches_trace_oracle(hom_w3):
    sigma = worst_case_state(hom_w3, 0.1)
    expected = 1.0 - 0.1 * 0.5
    n = 100_000
    summary = run_operator_level(hom_w3, sigma, n, 21)
    assert abs(summary.frequency - expected) < 5 * binomial_sigma(expected, n)


def test_maximally_mixed_pass_rate(hom_w3):
    mixed = DensityMatrix(3, np.eye(8) / 8)
    expected = float(np.real(np.trace(omega_hom_w3_oracle()))) / 8.0
    n = 100_000
    summary = run_operator_level(hom_w3, mixed, n, 31)
    assert abs(summary.frequency - expected) < 5 * binomial_sigma(expected, n)


def test_first_stage_branch_distribution_is_amplitude_counting(hom_w3):
    # Z on the control of exact W3 collapses to "+" with probability 2/3
    w3 = make_w_state(3)
    tables = _CircuitTables(hom_w3, w3.projector())
    for row in tables.outcome_cdf:
        assert row[0] == pytest.approx(2 / 3, abs=1e-12)


def test_circuit_and_operator_levels_agree_per_setting(hom_w3, opt_bell):
    """Two-sided test of equal pass rates per setting at significance 1e-3
    (critical |z| = 3.29), single-setting strategies isolate each setting."""
    rng = np.random.default_rng(5)
    cases = [
        (hom_w3, apply_noise(make_w_state(3).density(), NoiseModel.depolarizing(0.2))),
        (opt_bell, apply_noise(make_theta_state(np.pi / 4).density(), NoiseModel.dephasing(0.15))),
    ]
    n = 100_000
    for strat, sigma in cases:
        for idx, setting in enumerate(strat.settings):
            single = assemble_strategy(
                f"single-{setting.label}", strat.target, [setting], [1.0]
            )
            s_op = run_operator_level(single, sigma, n, 1000 + idx)
            s_ci = run_circuit_level(single, sigma, n, 2000 + idx)
            z = two_proportion_z(s_op.passes, n, s_ci.passes, n)
            assert abs(z) < 3.29, f"{setting.label}: z={z:.2f}"
            expected = setting_pass_probability(setting, np.asarray(sigma.matrix))
            assert abs(s_op.frequency - expected) < 5 * binomial_sigma(expected, n)


def test_determinism_bit_for_bit(hom_w3):
    sigma = worst_case_state(hom_w3, 0.15)
    a, rec_a = run_circuit_level(hom_w3, sigma, 3000, 77, keep_records=True)
    b, rec_b = run_circuit_level(hom_w3, sigma, 3000, 77, keep_records=True)
    assert a == b
    assert rec_a == rec_b
    c = run_circuit_level(hom_w3, sigma, 3000, 78)
    assert c != a


def test_loop_path_equals_vectorized_path(hom_w3):
    # a source without the constant marker forces the per-trial loop; the
    # outcomes must be identical bit-for-bit
    sigma = worst_case_state(hom_w3, 0.2)

    def looping_source(_trial):
        return sigma

    for runner in (run_operator_level, run_circuit_level):
        fast, rec_fast = runner(hom_w3, sigma, 2000, 13, keep_records=True)
        slow, rec_slow = runner(hom_w3, looping_source, 2000, 13, keep_records=True)
        assert fast == slow
        assert rec_fast == rec_slow


def test_pass_count_invariant_under_aggregation_order(hom_w3):
    sigma = worst_case_state(hom_w3, 0.1)
    summary, records = run_operator_level(hom_w3, sigma, 5000, 3, keep_records=True)
    rng = np.random.default_rng(0)
    order = rng.permutation(len(records))
    assert sum(records[i].passed for i in order) == summary.passes


def test_time_varying_source(hom_w3):
    # alternating perfect / orthogonal-excitation source: pass rate levels
    # at the average of the two trace values
    strat_w3 = hom_w3
    w3 = make_w_state(3).density()
    vac = np.zeros((8, 8), dtype=complex)
    vac[7, 7] = 1.0  # |111>
    bad = DensityMatrix(3, vac)
    p_bad = setting_pass_probability(strat_w3.settings[0], np.asarray(bad.matrix))

    def source(i):
        return w3 if i % 2 == 0 else bad

    n = 40_000
    expected = 0.5 * (1.0 + float(np.real(np.trace(strat_w3.operator @ vac))))
    summary = run_operator_level(strat_w3, source, n, 17)
    assert abs(summary.frequency - expected) < 5 * binomial_sigma(expected, n)


def test_source_validation_aborts_with_trial_index(hom_w3):
    w3 = make_w_state(3).density()

    def source(i):
        if i == 5:
            return "not a state"
        return w3

    with pytest.raises(SourceError, match="trial 5"):
        run_operator_level(hom_w3, source, 10, 1)


def test_scaling_sweep_exact_target(hom_w3):
    points = run_scaling_sweep(hom_w3, make_w_state(3), [20, 50, 100], 5, 9)
    for pt in points:
        assert pt.mean_frequency == 1.0
        assert all(f == 1.0 for f in pt.frequencies)


def test_scaling_sweep_fixed_infidelity_asymptote(hom_w3):
    # worst-case state at eps=0.03 has trace-oracle fidelity 0.97 and pass
    # probability 1 - 0.03 * 0.5 at every N
    sigma = worst_case_state(hom_w3, 0.03)
    expected = 1.0 - 0.5 * 0.03
    points = run_scaling_sweep(hom_w3, sigma, [100, 1000, 10_000], 20, 23)
    for pt in points:
        se = binomial_sigma(expected, pt.n_tests * 20)
        assert abs(pt.mean_frequency - expected) < 5 * se


def test_scaling_sweep_trial_spread_is_binomial(hom_w3):
    sigma = worst_case_state(hom_w3, 0.1)
    p = 0.95
    points = run_scaling_sweep(hom_w3, sigma, [100], 100, 57)
    spread = np.std(points[0].frequencies, ddof=1)
    assert spread < 3 * math.sqrt(p * (1 - p) / 100)


def test_scaling_sweep_validates_grid(hom_w3):
    with pytest.raises(ValueError, match="ascending"):
        run_scaling_sweep(hom_w3, make_w_state(3), [100, 50], 2, 1)
    with pytest.raises(ValueError, match="trials"):
        run_scaling_sweep(hom_w3, make_w_state(3), [10], 0, 1)


def test_records_export_format(hom_w3):
    _, records = run_operator_level(hom_w3, make_w_state(3), 3, 2, keep_records=True)
    text = records_to_text(records)
    lines = text.strip().split("\n")
    assert lines[0] == "trial\tsetting\tpassed"
    assert len(lines) == 4
    assert lines[1].endswith("\t1")
