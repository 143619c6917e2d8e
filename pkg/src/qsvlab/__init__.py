"""qsvlab: quantum state verification of W states, at desk scale.

Library layout:

* :mod:`qsvlab.linalg`, :mod:`qsvlab.states`, :mod:`qsvlab.channels`,
  :mod:`qsvlab.measurement` — complex linear algebra, states, noise,
  Born-rule measurement;
* :mod:`qsvlab.strategies` — verification strategies and spectral gaps;
* :mod:`qsvlab.sampler` — Monte Carlo verification runs;
* :mod:`qsvlab.analysis` — hypothesis tests, fidelity estimation,
  scaling fits, CHSH;
* :mod:`qsvlab.tomography` — MLE tomography baseline;
* :mod:`qsvlab.feedback` — closed-loop source tuning;
* :mod:`qsvlab.io`, :mod:`qsvlab.cli` — configs, data files, reports.
"""

__version__ = "0.1.0"

from .analysis import (
    CountTable,
    FidelityEstimate,
    HypothesisResult,
    certified_epsilon,
    certify,
    chsh_s,
    estimate_fidelity,
    fit_scaling_exponent,
    significance,
    simulate_polarization_counts,
)
from .channels import NoiseModel, apply_noise
from .feedback import (
    DeviceModel,
    SpsaConfig,
    TuneTrace,
    tune_with_qst,
    tune_with_qsv,
    two_qubit_device,
    w3_device,
)
from .linalg import hermitian_eigensystem, is_hermitian, is_projector, kron
from .measurement import measure_projective
from .sampler import (
    TestRecord,
    TestRunSummary,
    constant_source,
    run_circuit_level,
    run_operator_level,
    run_scaling_sweep,
)
from .states import (
    DensityMatrix,
    PureState,
    fidelity,
    make_theta_state,
    make_w_state,
)
from .strategies import (
    MeasurementSetting,
    VerificationStrategy,
    build_adaptive_w,
    build_homogeneous_w3,
    build_optimal_two_qubit,
    sample_complexity,
    strategy_description,
    strategy_to_json,
    worst_case_state,
)
from .tomography import (
    TomographyResult,
    TomographySettingData,
    fidelity_convergence_study,
    reconstruct_mle,
    simulate_tomography_data,
)

__all__ = [
    "CountTable",
    "DensityMatrix",
    "DeviceModel",
    "FidelityEstimate",
    "HypothesisResult",
    "MeasurementSetting",
    "NoiseModel",
    "PureState",
    "SpsaConfig",
    "TestRecord",
    "TestRunSummary",
    "TomographyResult",
    "TomographySettingData",
    "TuneTrace",
    "VerificationStrategy",
    "apply_noise",
    "build_adaptive_w",
    "build_homogeneous_w3",
    "build_optimal_two_qubit",
    "certified_epsilon",
    "certify",
    "chsh_s",
    "constant_source",
    "estimate_fidelity",
    "fidelity",
    "fidelity_convergence_study",
    "fit_scaling_exponent",
    "hermitian_eigensystem",
    "is_hermitian",
    "is_projector",
    "kron",
    "make_theta_state",
    "make_w_state",
    "measure_projective",
    "reconstruct_mle",
    "run_circuit_level",
    "run_operator_level",
    "run_scaling_sweep",
    "sample_complexity",
    "significance",
    "simulate_polarization_counts",
    "simulate_tomography_data",
    "strategy_description",
    "strategy_to_json",
    "tune_with_qst",
    "tune_with_qsv",
    "two_qubit_device",
    "w3_device",
    "worst_case_state",
]
