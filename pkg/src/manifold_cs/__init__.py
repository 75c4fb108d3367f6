"""Multiscale manifold models, random linear measurements, and recovery."""

from .bounds import (
    BoundParams,
    center_count_bound,
    cover_bound,
    m_nonuniform,
    m_uniform,
    scales_for_precision,
)
from .geometry import (
    CoverResult,
    PointCloud,
    add_noise,
    epsilon_net_ball,
    gen_sphere,
    gen_swiss_roll,
    greedy_delta_cover,
    load_csv,
    save_csv,
)
from .gmra import (
    AffineProjector,
    MultiscaleDictionary,
    StructureReport,
    apply_projector,
    build_dictionary,
    load_dictionary,
    nearest_center,
    save_dictionary,
    validate_structure,
)
from .harness import (
    ExperimentConfig,
    ExperimentResult,
    emit_plot,
    rel_mse,
    rel_mse_baseline,
    run_experiment,
)
from .measurement import (
    DistortionReport,
    MeasurementMatrix,
    e_m_bound,
    gaussian_matrix,
    load_matrix,
    orthoprojection_matrix,
    rip_check_bruteforce,
    save_matrix,
    verify_assumption_set,
    verify_distortion,
)
from .recovery import (
    CertificateBundle,
    RecoveryOutcome,
    certify,
    least_squares,
    nearest_point_oracle,
    recover,
    recover_batch,
)

__version__ = "0.1.0"

__all__ = [
    "AffineProjector",
    "BoundParams",
    "CertificateBundle",
    "CoverResult",
    "DistortionReport",
    "ExperimentConfig",
    "ExperimentResult",
    "MeasurementMatrix",
    "MultiscaleDictionary",
    "PointCloud",
    "RecoveryOutcome",
    "StructureReport",
    "add_noise",
    "apply_projector",
    "build_dictionary",
    "center_count_bound",
    "certify",
    "cover_bound",
    "e_m_bound",
    "emit_plot",
    "epsilon_net_ball",
    "gaussian_matrix",
    "gen_sphere",
    "gen_swiss_roll",
    "greedy_delta_cover",
    "least_squares",
    "load_csv",
    "load_dictionary",
    "load_matrix",
    "m_nonuniform",
    "m_uniform",
    "nearest_center",
    "nearest_point_oracle",
    "orthoprojection_matrix",
    "recover",
    "recover_batch",
    "rel_mse",
    "rel_mse_baseline",
    "rip_check_bruteforce",
    "run_experiment",
    "save_csv",
    "save_dictionary",
    "save_matrix",
    "scales_for_precision",
    "validate_structure",
    "verify_assumption_set",
    "verify_distortion",
]
