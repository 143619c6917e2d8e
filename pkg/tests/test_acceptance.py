"""Acceptance suite: one test per criterion, with a printed pass/fail line.

Run ``pytest -s tests/test_acceptance.py`` to see the per-criterion lines.
Every tolerance is fixed here; nothing is calibrated at run time except
where a criterion explicitly freezes a pre-calibrated budget (criterion 10,
whose budget was frozen after a one-off oracle calibration run).
"""

import math
import time
from importlib import resources

import numpy as np
import pytest

from qsvlab.analysis import certified_epsilon, chsh_s, estimate_fidelity, fit_scaling_exponent
from qsvlab.channels import NoiseModel, apply_noise
from qsvlab.feedback import SpsaConfig, oracle_fidelity_trace, tune_with_qst, tune_with_qsv, two_qubit_device
from qsvlab.io import ingest_count_table
from qsvlab.sampler import run_circuit_level, run_operator_level, run_scaling_sweep
from qsvlab.states import fidelity, make_theta_state, make_w_state
from qsvlab.strategies import (
    build_adaptive_w,
    build_homogeneous_w3,
    build_optimal_two_qubit,
    sample_complexity,
    worst_case_state,
)
from qsvlab.tomography import fidelity_convergence_study, reconstruct_mle, simulate_tomography_data
from qsvlab.rng import stream

from conftest import binomial_sigma, two_proportion_z

DELTA = 0.05


def _line(num: int, ok: bool, detail: str) -> None:
    print(f"\n[{'PASS' if ok else 'FAIL'}] criterion {num}: {detail}")
    assert ok, detail


def test_criterion_01_chsh_reproduction():
    t0 = time.perf_counter()
    table = ingest_count_table(str(resources.files("qsvlab").joinpath("data/chsh_counts.csv")))
    s, err = chsh_s(table)
    elapsed = time.perf_counter() - t0
    ok = abs(s - 2.8088) <= 5e-4 and 1e-3 < err < 1e-2 and elapsed < 1.0
    _line(1, ok, f"S = {s:.5f} (ref 2.8088 +- 5e-4), se = {err:.4f}, {elapsed:.2f}s")


def test_criterion_02_spectral_gaps():
    t0 = time.perf_counter()
    checks = [
        ("hom-w3", build_homogeneous_w3().spectral_gap, 0.5),
        ("adaptive-w3", build_adaptive_w(3).spectral_gap, 1 / 3),
        ("adaptive-w4", build_adaptive_w(4).spectral_gap, 1 / 3),
        ("adaptive-w5", build_adaptive_w(5).spectral_gap, 1 / 4),
    ]
    for k in range(9):
        theta = k * (math.pi / 2) / 8
        checks.append(
            (
                f"opt-2q({theta:.3f})",
                build_optimal_two_qubit(theta).spectral_gap,
                1.0 / (2.0 + math.sin(theta) * math.cos(theta)),
            )
        )
    worst = max(abs(gap - want) for _, gap, want in checks)
    elapsed = time.perf_counter() - t0
    ok = worst < 1e-9 and elapsed < 10.0
    _line(2, ok, f"{len(checks)} gaps, worst |error| = {worst:.2e}, {elapsed:.1f}s")


def test_criterion_03_sample_complexity_and_inversion():
    n = sample_complexity(0.5, 0.1, DELTA)
    eps = certified_epsilon(1.0, 59, 0.5, DELTA)
    ok = n == 59 and eps is not None and eps <= 0.1
    _line(3, ok, f"N(nu=0.5, eps=0.1, delta=0.05) = {n}, certified eps(f=1, N=59) = {eps:.6f}")


def test_criterion_04_ideal_source_soundness():
    strat = build_homogeneous_w3()
    summary = run_circuit_level(strat, make_w_state(3), 100_000, 20_240)
    ok = summary.passes == summary.n_tests == 100_000
    _line(4, ok, f"t = {summary.passes} of N = {summary.n_tests} circuit-level tests")


def test_criterion_05_worst_case_calibration():
    strat = build_homogeneous_w3()
    n = 100_000
    details = []
    ok = True
    for k, eps in enumerate((0.05, 0.1, 0.2)):
        sigma = worst_case_state(strat, eps)
        summary = run_operator_level(strat, sigma, n, 555, stream_fields=(k,))
        expected = 1.0 - eps * strat.spectral_gap
        dev = abs(summary.frequency - expected) / binomial_sigma(expected, n)
        ok = ok and dev < 5.0
        details.append(f"eps={eps}: f={summary.frequency:.5f} ({dev:.1f} sigma)")
    _line(5, ok, "; ".join(details))


def test_criterion_06_estimator_accuracy():
    t0 = time.perf_counter()
    strat = build_homogeneous_w3()
    sigma = worst_case_state(strat, 0.03)
    oracle_f = fidelity(sigma, make_w_state(3))
    n = 10_000
    estimates, stds = [], []
    for trial in range(100):
        summary = run_operator_level(strat, sigma, n, 606, stream_fields=(trial,))
        est = estimate_fidelity(summary.frequency, n, strat.spectral_gap)
        estimates.append(est.point)
        stds.append(est.std)
    mean_f = float(np.mean(estimates))
    elapsed = time.perf_counter() - t0
    ok = (
        abs(oracle_f - 0.97) < 1e-12
        and abs(mean_f - 0.97) <= 0.003
        and all(s <= 1.0 / (2 * strat.spectral_gap * math.sqrt(n)) + 1e-12 for s in stds)
        and elapsed < 60.0
    )
    _line(
        6,
        ok,
        f"oracle F = {oracle_f:.4f}, mean estimate = {mean_f:.5f} "
        f"(tol 0.003), max std = {max(stds):.5f} <= 0.01, {elapsed:.1f}s",
    )


def test_criterion_07_scaling_behaviour():
    t0 = time.perf_counter()
    strat = build_homogeneous_w3()

    # all-pass ideal sweep: every trial passes, certified eps is closed-form
    ideal_grid = [100, 316, 1000, 3162, 10_000, 31_623, 100_000]
    ideal = run_scaling_sweep(strat, make_w_state(3), ideal_grid, 5, 707)
    assert all(pt.mean_frequency == 1.0 for pt in ideal)
    ideal_points = [
        (pt.n_tests, certified_epsilon(1.0, pt.n_tests, strat.spectral_gap, DELTA))
        for pt in ideal
    ]
    slope_ideal, _, _ = fit_scaling_exponent(ideal_points)

    # fixed-infidelity sweep (trace-oracle fidelity 0.97), 100 trials per point
    sigma = worst_case_state(strat, 0.03)
    grid = [10, 15, 20, 30, 50, 75, 100, 150, 200, 300, 500, 1000, 2000, 5000, 10_000]
    points = run_scaling_sweep(strat, sigma, grid, 100, 808)
    mean_eps = []
    for pt in points:
        certs = [
            certified_epsilon(f, pt.n_tests, strat.spectral_gap, DELTA)
            for f in pt.frequencies
        ]
        certs = [c for c in certs if c is not None]
        mean_eps.append((pt.n_tests, float(np.mean(certs))))
    # the power-law regime is the low-sample region (the certified infidelity
    # flattens onto the device floor at large N); fit window frozen a priori
    low = [(n, e) for n, e in mean_eps if n <= 500]
    slope_low, _, _ = fit_scaling_exponent(low)
    elapsed = time.perf_counter() - t0
    ok = abs(slope_ideal + 1.0) <= 0.05 and -2.0 < slope_low < -1.0 and elapsed < 300.0
    _line(
        7,
        ok,
        f"ideal slope = {slope_ideal:.4f} (want -1 +- 0.05), fixed-infidelity "
        f"low-sample slope = {slope_low:.3f} (want inside (-2, -1)), {elapsed:.1f}s",
    )


def test_criterion_08_sampler_equivalence():
    t0 = time.perf_counter()
    n = 100_000
    noise_kinds = [
        lambda p: NoiseModel.depolarizing(0.4 * p),
        lambda p: NoiseModel.dephasing(0.3 * p),
        lambda p: NoiseModel.amplitude_damping(0.25 * p),
        lambda p: NoiseModel.coherent_rotation("Y", 0.5 * p, 0),
    ]
    cases = []
    rng = np.random.default_rng(99)
    for strat, base in (
        (build_homogeneous_w3(), make_w_state(3)),
        (build_optimal_two_qubit(math.pi / 4), make_theta_state(math.pi / 4)),
    ):
        for k in range(10):
            noise = noise_kinds[k % len(noise_kinds)](rng.random())
            cases.append((strat, apply_noise(base.density(), noise)))

    worst_z = 0.0
    for idx, (strat, sigma) in enumerate(cases):
        _, op_counts = run_operator_level(
            strat, sigma, n, 9000 + idx, keep_setting_counts=True
        )
        _, ci_counts = run_circuit_level(
            strat, sigma, n, 9500 + idx, keep_setting_counts=True
        )
        for label in op_counts:
            n1, k1 = op_counts[label]
            n2, k2 = ci_counts[label]
            z = abs(two_proportion_z(k1, n1, k2, n2))
            worst_z = max(worst_z, z)
    elapsed = time.perf_counter() - t0
    ok = worst_z < 5.0
    _line(
        8,
        ok,
        f"{len(cases)} sources x per-setting rates: worst |z| = {worst_z:.2f} "
        f"(limit 5), {elapsed:.1f}s",
    )


def test_criterion_09_tomography_study():
    t0 = time.perf_counter()
    bell = make_theta_state(math.pi / 4)
    noisy = apply_noise(bell.density(), NoiseModel.depolarizing(0.02))
    rows = fidelity_convergence_study(noisy, bell, [1_000_000], 50, stream(909, 1))
    std_at_1e6 = rows[0][2]

    w3 = make_w_state(3)
    w3_noisy = apply_noise(w3.density(), NoiseModel.depolarizing(0.04))
    data = simulate_tomography_data(w3_noisy, 37_037, stream(909, 2))  # 27 x 37037 ~ 1e6
    result = reconstruct_mle(data, target=w3)
    w3_err = abs(result.fidelity_to_target - fidelity(w3_noisy, w3))
    elapsed = time.perf_counter() - t0
    ok = std_at_1e6 <= 5e-4 and w3_err <= 0.01 and elapsed < 600.0
    _line(
        9,
        ok,
        f"two-qubit std at 1e6 photons = {std_at_1e6:.2e} (limit 5e-4), "
        f"W3 reconstruction error = {w3_err:.4f} (limit 0.01), {elapsed:.0f}s",
    )


def test_criterion_10_closed_loop_tuning():
    t0 = time.perf_counter()
    # frozen after a one-off calibration run: gain a=0.5, QSV batch 250 with
    # budget 150k (worst observed hit ~49k), QST 2000 shots/setting with
    # budget 4.5M (worst observed hit ~2.6M)
    spsa = SpsaConfig(a=0.5)
    device = two_qubit_device(math.pi / 4, {"theta": 0.55, "phi": 1.5})
    start = device.oracle_fidelity()
    strat = build_optimal_two_qubit(math.pi / 4)
    details = []
    ok = 0.45 < start < 0.55
    for seed in (101, 202, 303):
        qsv = tune_with_qsv(device, strat, 250, 150_000, spsa, seed)
        qsv_fids = oracle_fidelity_trace(qsv, device)
        qsv_hit = next(
            (p.cumulative_samples for p, f in zip(qsv.points, qsv_fids) if f >= 0.95), None
        )
        qsv_final = device.with_knobs(qsv.final_knobs).oracle_fidelity()

        qst = tune_with_qst(device, 2000, 4_500_000, spsa, seed)
        qst_fids = oracle_fidelity_trace(qst, device)
        qst_hit = next(
            (p.cumulative_samples for p, f in zip(qst.points, qst_fids) if f >= 0.95), None
        )
        ok = ok and qsv_final >= 0.95 and qsv_hit is not None
        ok = ok and qst_hit is not None and qsv_hit < qst_hit
        details.append(f"seed {seed}: qsv {qsv_hit} vs qst {qst_hit} samples")
    elapsed = time.perf_counter() - t0
    _line(
        10,
        ok,
        f"start F = {start:.3f}; " + "; ".join(details) + f"; {elapsed:.0f}s",
    )


def test_criterion_11_reference_fidelities_respect_all_pass_bound():
    # certified fidelities reported for the five two-qubit states at four
    # test counts never exceed the all-pass certified bound 1-(1-0.05^(1/N))/nu
    sines = [0.0, 1 / math.sqrt(3), 1 / math.sqrt(2), math.sqrt(2 / 3), 1.0]
    reported = {
        20: [0.646, 0.589, 0.606, 0.603, 0.629],
        50: [0.842, 0.783, 0.805, 0.794, 0.825],
        100: [0.910, 0.849, 0.878, 0.870, 0.893],
        10_000: [0.990, 0.964, 0.971, 0.969, 0.983],
    }
    ok = True
    margin = []
    for n, row in reported.items():
        for s, f_reported in zip(sines, row):
            theta = math.asin(s)
            gap = 1.0 / (2.0 + math.sin(theta) * math.cos(theta))
            bound = 1.0 - (1.0 - DELTA ** (1.0 / n)) / gap
            ok = ok and f_reported <= bound + 1e-12
            margin.append(bound - f_reported)
    _line(
        11,
        ok,
        f"20 table cells within the all-pass bound; min margin = {min(margin):.4f}",
    )
