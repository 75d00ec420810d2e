"""Dissipative structure and decay-rate experiments for an inviscid
radiation hydrodynamics system with non-equilibrium diffusion.

The package is organized bottom-up: equations of state (`eos`), frozen
linearizations and entropy symmetrization (`linearize`), the genuine
coupling test and compensating matrices (`kawashima`), Fourier-symbol
spectra and linear semigroup evolution (`spectrum`), a one-dimensional
periodic finite-volume solver (`solver1d`), and decay-rate experiment
drivers (`harness`).
"""

from .eos import (
    AnalyticEos,
    EosModel,
    IdealGas,
    ThermoPoint,
    WeylReport,
    check_weyl_hypotheses,
    eos_from_dict,
    eos_from_json,
    eos_to_dict,
    eos_to_json,
    eval_eos,
    identity_residuals,
    theta_from_energy,
)
from .errors import (
    CFLViolation,
    ConfigError,
    ContinuationError,
    DimensionError,
    DomainError,
    HypothesisViolation,
    InsufficientData,
    NerhdError,
    NewtonDivergence,
    NumericalError,
    PositivityLoss,
    SearchFailure,
    SymmetryError,
)
from .kawashima import (
    CompensatingMatrix,
    CouplingVerdict,
    MultiDWitness,
    Witness,
    compensating_matrix,
    coupling_decision,
    genuine_coupling,
    kernel_intersection_basis,
    multi_d_witness,
)
from .linearize import (
    EquilibriumState,
    MatrixBundle,
    ZState,
    assemble_primitive,
    build_bundle,
    entropy_frame,
    entropy_gradient,
    entropy_value,
    equilibrium_state,
    symmetrize,
    symmetrizer,
    z_transform,
)
from .spectrum import (
    SpectralCurve,
    SymbolEvaluation,
    h_seminorm,
    l2_norm,
    linear_evolve,
    semigroup_action,
    spectral_curve,
    symbol,
)
from .solver1d import (
    SimConfig,
    StateField1D,
    Trajectory,
    diagnostics,
    hyperbolic_step,
    init_perturbation,
    load_checkpoint,
    max_wave_speed,
    run,
    save_checkpoint,
    strang_step,
    validate_field,
)
from .harness import (
    DecayReport,
    ExperimentConfig,
    coupling_sweep_experiment,
    decay_csv,
    experiment_from_dict,
    experiment_to_dict,
    fit_decay,
    full_report,
    linear_decay_experiment,
    nonlinear_decay_experiment,
    render_markdown,
    run_experiment,
    spectrum_scan_experiment,
)

__version__ = "0.1.0"
