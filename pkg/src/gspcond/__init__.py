"""Structured condition numbers for generalized saddle point systems."""

from .condnum import (
    CnPair,
    CnReport,
    CnTriple,
    DegenerateSolutionError,
    WrongCaseError,
    cn_individual_bc,
    cn_joint_bc,
    cn_report,
    structured_cn_joint,
    structured_cn_x1,
    structured_cn_x2,
    unstructured_cn_joint,
)
from .gsp import (
    GspSystem,
    InverseBlocks,
    ValidationError,
    assemble,
    inverse_blocks,
    sensitivity_h,
    sensitivity_r,
)
from .lsq import DefinitenessError, WlsProblem, build_wls_augmented, sls_cn, wls_cn_x2
from .matkit import (
    ConvergenceError,
    SingularMatrixError,
    SizeCapError,
    comp_divide,
    inverse,
    kron,
    norms,
    solve_linear,
    spectral_norm,
    unvec,
    vec,
)
from .structure import (
    LinearStructure,
    MembershipError,
    build_structure,
    general_structure,
    generator,
    reconstruct,
    symmetric_structure,
    toeplitz_structure,
    zero_structure,
)
from .verify import (
    AuditReport,
    DecayReport,
    DerivativeCheckError,
    PerturbationSample,
    ResampleAdvised,
    apply_perturbation,
    bound_audit,
    fd_derivative_check,
    relative_errors,
    sample_perturbation,
)
from .cli import generate_example, load_manifest, run_report

__version__ = "0.1.0"

__all__ = [
    "AuditReport", "CnPair", "CnReport", "CnTriple", "ConvergenceError",
    "DecayReport", "DefinitenessError", "DegenerateSolutionError",
    "DerivativeCheckError", "GspSystem", "InverseBlocks", "LinearStructure",
    "MembershipError", "PerturbationSample", "ResampleAdvised",
    "SingularMatrixError", "SizeCapError", "ValidationError", "WlsProblem",
    "WrongCaseError", "apply_perturbation", "assemble", "bound_audit",
    "build_structure", "build_wls_augmented", "cn_individual_bc",
    "cn_joint_bc", "cn_report", "comp_divide", "fd_derivative_check",
    "general_structure",
    "generate_example", "generator", "inverse", "inverse_blocks", "kron",
    "load_manifest", "norms", "reconstruct", "relative_errors", "run_report",
    "sample_perturbation", "sensitivity_h", "sensitivity_r", "sls_cn",
    "solve_linear", "spectral_norm", "structured_cn_joint",
    "structured_cn_x1", "structured_cn_x2", "symmetric_structure",
    "toeplitz_structure", "unstructured_cn_joint", "unvec", "vec",
    "wls_cn_x2", "zero_structure",
]
