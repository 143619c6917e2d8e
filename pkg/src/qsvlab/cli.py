"""Command-line front end: reproducible experiment recipes.

Every subcommand reads one JSON config (seed included), derives all
randomness from that seed, and writes a report plus, for sweep-style
commands, a data table suitable for external plotting.
"""

from __future__ import annotations

import argparse
import math
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .analysis import (
    certified_epsilon,
    chsh_s,
    estimate_fidelity,
    fit_scaling_exponent,
)
from .channels import NoiseModel, apply_noise
from .feedback import (
    SpsaConfig,
    oracle_fidelity_trace,
    trace_to_text,
    tune_with_qst,
    tune_with_qsv,
    two_qubit_device,
    w3_device,
)
from .io import (
    ConfigError,
    config_hash,
    ingest_count_table,
    load_config,
    write_report,
    write_table,
)
from .sampler import run_circuit_level, run_operator_level, run_scaling_sweep
from .states import DensityMatrix, make_theta_state, make_w_state
from .strategies import (
    build_adaptive_w,
    build_homogeneous_w3,
    build_optimal_two_qubit,
    worst_case_state,
)
from .tomography import (
    fidelity_convergence_study,
    pauli_settings,
    reconstruct_mle,
    simulate_tomography_data,
)
from .rng import stream

LOW_SAMPLE_FIT_MAX = 500  # scaling fits use the low-sample region of the sweep


def _build_noise(spec: dict | None) -> NoiseModel | None:
    if spec is None:
        return None
    kind = spec.get("kind")
    if kind == "depolarizing":
        return NoiseModel.depolarizing(spec["strength"])
    if kind == "dephasing":
        return NoiseModel.dephasing(spec["strength"])
    if kind == "amplitude_damping":
        return NoiseModel.amplitude_damping(spec["strength"])
    if kind == "coherent_rotation":
        return NoiseModel.coherent_rotation(spec.get("axis", "Z"), spec["strength"], spec.get("qubit", 0))
    raise ConfigError(f"source.noise.kind: unknown noise kind {kind!r}")


def _build_strategy(spec: dict):
    name = spec.get("name")
    if name == "hom-w3":
        return build_homogeneous_w3()
    if name == "adaptive-w":
        return build_adaptive_w(int(spec.get("n", 3)))
    if name == "opt-2q":
        return build_optimal_two_qubit(float(spec.get("theta", math.pi / 4)))
    raise ConfigError(f"strategy.name: unknown strategy {name!r}")


def _target_state(spec: dict):
    family = spec.get("family")
    if family == "w3":
        return make_w_state(3)
    if family == "theta":
        return make_theta_state(float(spec.get("theta", math.pi / 4)))
    if family == "bell":
        return make_theta_state(math.pi / 4)
    raise ConfigError(f"source.family: unknown family {family!r}")


def _build_source(spec: dict, strategy) -> DensityMatrix:
    family = spec.get("family")
    if family == "worst-case":
        if strategy is None:
            raise ConfigError("source.family: worst-case source needs a strategy")
        return worst_case_state(strategy, float(spec["epsilon"]))
    if family == "mixed":
        n = int(spec.get("n", strategy.n_qubits if strategy else 2))
        d = 2**n
        return DensityMatrix(n, np.eye(d, dtype=complex) / d)
    state = _target_state(spec).density()
    noise = _build_noise(spec.get("noise"))
    if noise is not None:
        state = apply_noise(state, noise)
    return state


def _build_device(spec: dict):
    family = spec.get("family")
    offsets = {k: float(v) for k, v in spec.get("offsets", {}).items()}
    noise = _build_noise(spec.get("noise"))
    if family == "two-qubit":
        return two_qubit_device(float(spec.get("theta_target", math.pi / 4)), offsets, noise)
    if family == "w3":
        return w3_device(offsets, noise)
    raise ConfigError(f"device.family: unknown device family {family!r}")


def _runner(config: dict):
    return {"operator": run_operator_level, "circuit": run_circuit_level}[
        config.get("sampler", "circuit")
    ]


def _cmd_verify(config, outdir, cfg_hash):
    strategy = _build_strategy(config["strategy"])
    source = _build_source(config["source"], strategy)
    n_tests = config["n_tests"]
    delta = float(config.get("delta", 0.05))
    summary = _runner(config)(strategy, source, n_tests, config["seed"])
    eps = certified_epsilon(summary.frequency, n_tests, strategy.spectral_gap, delta)
    fields = {
        "strategy": strategy.label,
        "n_tests": n_tests,
        "passes": summary.passes,
        "f": summary.frequency,
        "delta_target": delta,
        "spectral_gap": strategy.spectral_gap,
        "n_settings": len(strategy.settings),
        "epsilon_certified": float("nan") if eps is None else eps,
        "fidelity_certified": float("nan") if eps is None else 1.0 - eps,
    }
    path = outdir / "verify_report.txt"
    write_report(path, "verify", cfg_hash, config["seed"], fields)
    return [path]


def _cmd_estimate(config, outdir, cfg_hash):
    strategy = _build_strategy(config["strategy"])
    source = _build_source(config["source"], strategy)
    n_tests = config["n_tests"]
    summary = _runner(config)(strategy, source, n_tests, config["seed"])
    homogeneous = bool(config.get("homogeneous", config["strategy"].get("name") == "hom-w3"))
    est = estimate_fidelity(summary.frequency, n_tests, strategy.spectral_gap, homogeneous)
    fields = {
        "strategy": strategy.label,
        "n_tests": n_tests,
        "f": summary.frequency,
        "homogeneous": homogeneous,
        "F_lower": est.lower,
        "F_upper": est.upper,
        "F": float("nan") if est.point is None else est.point,
        "std": float("nan") if est.std is None else est.std,
    }
    path = outdir / "estimate_report.txt"
    write_report(path, "estimate", cfg_hash, config["seed"], fields)
    return [path]


def _cmd_scaling(config, outdir, cfg_hash):
    strategy = _build_strategy(config["strategy"])
    source = _build_source(config["source"], strategy)
    delta = float(config.get("delta", 0.05))
    points = run_scaling_sweep(
        strategy,
        source,
        config["n_grid"],
        config["trials"],
        config["seed"],
        level=config.get("sampler", "operator"),
    )
    gap = strategy.spectral_gap
    rows = []
    fit_points = []
    for pt in points:
        certs = [
            certified_epsilon(f, pt.n_tests, gap, delta) for f in pt.frequencies
        ]
        certs = [c for c in certs if c is not None]
        mean_eps = float(np.mean(certs)) if certs else float("nan")
        est_eps = float(np.mean([(1.0 - f) / gap for f in pt.frequencies]))
        rows.append((pt.n_tests, pt.mean_frequency, len(certs), mean_eps, est_eps))
        if certs:
            fit_points.append((pt.n_tests, mean_eps))
    table_path = outdir / "scaling_table.csv"
    write_table(
        table_path,
        "scaling",
        cfg_hash,
        config["seed"],
        ["n_tests", "mean_f", "n_certified", "mean_epsilon_certified", "mean_epsilon_estimated"],
        rows,
    )
    low = [(n, e) for n, e in fit_points if n <= LOW_SAMPLE_FIT_MAX]
    fields = {
        "strategy": strategy.label,
        "delta_target": delta,
        "trials": config["trials"],
        "low_sample_fit_max": LOW_SAMPLE_FIT_MAX,
    }
    if len(low) >= 3:
        slope, intercept, ssr = fit_scaling_exponent(low)
        fields.update(slope_low_sample=slope, intercept_low_sample=intercept, ssr_low_sample=ssr)
    if len(fit_points) >= 3:
        slope_full, _, _ = fit_scaling_exponent(fit_points)
        fields["slope_full_range"] = slope_full
    report_path = outdir / "scaling_report.txt"
    write_report(report_path, "scaling", cfg_hash, config["seed"], fields)
    return [table_path, report_path]


def _cmd_chsh(config, outdir, cfg_hash):
    table = ingest_count_table(config["table"])
    s, err = chsh_s(table)
    fields = {
        "S": s,
        "standard_error": err,
        "violation_sigma": (abs(s) - 2.0) / err,
        "total_counts": int(table.counts.sum()),
    }
    path = outdir / "chsh_report.txt"
    write_report(path, "chsh", cfg_hash, config["seed"], fields)
    return [path]


def _cmd_tomography(config, outdir, cfg_hash):
    target = _target_state(config["source"])
    source = _build_source(config["source"], None)
    seed = config["seed"]
    out = []
    if "photon_grid" in config:
        reps = int(config.get("repetitions", 50))
        rows = fidelity_convergence_study(
            source, target, config["photon_grid"], reps, stream(seed, 0x706)
        )
        table_path = outdir / "tomography_table.csv"
        write_table(
            table_path,
            "tomography",
            cfg_hash,
            seed,
            ["total_photons", "mean_fidelity", "std_fidelity"],
            rows,
        )
        out.append(table_path)
        fields = {"repetitions": reps, "grid_points": len(rows)}
    else:
        shots = int(config.get("shots_per_setting", 1000))
        data = simulate_tomography_data(source, shots, stream(seed, 0x706))
        result = reconstruct_mle(data, target=target)
        fields = {
            "shots_per_setting": shots,
            "n_settings": len(data),
            "total_samples": result.total_samples,
            "fidelity": result.fidelity_to_target,
            "iterations": result.iterations,
        }
    report_path = outdir / "tomography_report.txt"
    write_report(report_path, "tomography", cfg_hash, seed, fields)
    out.append(report_path)
    return out


def _cmd_tune(config, outdir, cfg_hash):
    device = _build_device(config["device"])
    seed = config["seed"]
    spsa = SpsaConfig(**config.get("spsa", {}))
    if config["method"] == "qsv":
        strategy = _build_strategy(config.get("strategy", {"name": "opt-2q"}))
        trace = tune_with_qsv(
            device, strategy, int(config.get("batch_size", 500)),
            config["sample_budget"], spsa, seed,
        )
    else:
        trace = tune_with_qst(
            device, int(config.get("shots_per_setting", 1000)),
            config["sample_budget"], spsa, seed,
        )
    oracle = None
    if config.get("oracle_columns"):
        oracle = oracle_fidelity_trace(trace, device)
    trace_path = outdir / "tune_trace.tsv"
    header = trace_to_text(trace, oracle)
    trace_path.write_text(header)
    last = trace.points[-1]
    fields = {
        "method": trace.objective,
        "iterations": last.iteration,
        "termination": trace.termination,
        "cumulative_samples": trace.cumulative_samples,
        "f_estimate_final": last.f_estimate,
    }
    report_path = outdir / "tune_report.txt"
    write_report(report_path, "tune", cfg_hash, seed, fields)
    return [trace_path, report_path]


def _cmd_compare(config, outdir, cfg_hash):
    """Head-to-head resource accounting on the same source state."""
    seed = config["seed"]
    strategy = build_homogeneous_w3()
    source = _build_source(config["source"], strategy)
    target = _target_state(config["source"])
    qsv_tests = int(config.get("qsv_tests", 10_000))
    qst_shots = int(config.get("qst_shots_per_setting", math.ceil(1e6 / 27)))

    summary = run_circuit_level(strategy, source, qsv_tests, seed)
    est = estimate_fidelity(summary.frequency, qsv_tests, strategy.spectral_gap, True)

    data = simulate_tomography_data(source, qst_shots, stream(seed, 0x706))
    result = reconstruct_mle(data, target=target)

    n_settings_qst = len(pauli_settings(source.n_qubits))
    fields = {
        "qsv_settings": len(strategy.settings),
        "qsv_samples": qsv_tests,
        "qsv_F": est.point,
        "qsv_std": est.std,
        "qst_settings": n_settings_qst,
        "qst_samples": int(result.total_samples),
        "qst_F": result.fidelity_to_target,
        "sample_ratio": result.total_samples / qsv_tests,
    }
    path = outdir / "compare_report.txt"
    write_report(path, "compare", cfg_hash, seed, fields)
    return [path]


_DISPATCH = {
    "verify": _cmd_verify,
    "estimate": _cmd_estimate,
    "scaling": _cmd_scaling,
    "chsh": _cmd_chsh,
    "tomography": _cmd_tomography,
    "tune": _cmd_tune,
    "compare": _cmd_compare,
}


def run_command(config: dict, outdir: Path | None = None) -> list[Path]:
    """Dispatch a validated config to its pipeline; returns written files."""
    from .io import validate_config

    validate_config(config)
    out = Path(outdir) if outdir is not None else Path(config.get("output", "."))
    out.mkdir(parents=True, exist_ok=True)
    return _DISPATCH[config["command"]](config, out, config_hash(config))


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(
        prog="qsvlab",
        description="Quantum state verification laboratory: verification, "
        "estimation, scaling sweeps, CHSH analysis, tomography, closed-loop tuning.",
    )
    parser.add_argument("--version", action="version", version=f"qsvlab {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in _DISPATCH:
        p = sub.add_parser(name)
        p.add_argument("--config", required=True, help="experiment config (JSON)")
        p.add_argument("--seed", type=int, default=None, help="override the config seed")
        p.add_argument("--outdir", default=None, help="override the output directory")
        p.add_argument("--trials", type=int, default=None, help="override sweep trial counts")
        p.add_argument(
            "--oracle",
            action="store_true",
            help="emit trace-oracle columns (test mode only)",
        )
        if name == "chsh":
            p.add_argument("--table", default=None, help="override the count-table path")

    args = parser.parse_args(argv)
    try:
        config = load_config(args.config)
        if config["command"] != args.command:
            raise ConfigError(
                f"config is for command {config['command']!r}, invoked as {args.command!r}"
            )
        if args.seed is not None:
            config["seed"] = args.seed
        if args.trials is not None:
            if "trials" in config:
                config["trials"] = args.trials
            if "repetitions" in config:
                config["repetitions"] = args.trials
        if getattr(args, "table", None):
            config["table"] = args.table
        if args.oracle:
            if not config.get("test_mode"):
                raise ConfigError(
                    "--oracle: oracle output is only available in test mode "
                    "(set 'test_mode': true in the config)"
                )
            config["oracle_columns"] = True
        written = run_command(config, Path(args.outdir) if args.outdir else None)
    except (ConfigError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    for path in written:
        print(path)
    return 0


if __name__ == "__main__":
    sys.exit(main())
