"""Finite element laboratory for heat semigroups with generalized Robin
boundary operators."""

from .mesh import (
    Mesh,
    MeshError,
    build_box_mesh,
    build_lshape_mesh,
    dump_mesh,
)
from .coefficients import (
    CoefficientField,
    BoundaryOperatorSpec,
    AdmissibilityReport,
    check_admissibility,
    coefficient_field_from_config,
    build_boundary_operator,
)
from .assembly import (
    AssembledSystem,
    assemble_system,
    assemble_stiffness,
    assemble_lumped_mass,
    assemble_consistent_mass,
    assemble_boundary_mass,
    assemble_boundary_term,
    trace_matrix,
    compute_trace_norm,
    check_accretivity,
    check_continuity,
    export_coordinate_format,
)
from .semigroup import (
    SemigroupEvaluator,
    build_evaluator,
    geometric_times,
    semigroup_law_defect,
)
from .verify import (
    check_nash,
    check_ouhabaz_contractivity_criterion,
    check_sup_contraction,
    check_positivity,
    check_domination,
    fit_ultracontractivity,
    check_eventual_positivity,
    check_duality,
    check_energy_dissipation,
    check_smoothing_decay,
    write_document,
    write_norms_csv,
)

__version__ = "0.1.0"

__all__ = [
    "Mesh",
    "MeshError",
    "build_box_mesh",
    "build_lshape_mesh",
    "dump_mesh",
    "CoefficientField",
    "BoundaryOperatorSpec",
    "AdmissibilityReport",
    "check_admissibility",
    "coefficient_field_from_config",
    "build_boundary_operator",
    "AssembledSystem",
    "assemble_system",
    "assemble_stiffness",
    "assemble_lumped_mass",
    "assemble_consistent_mass",
    "assemble_boundary_mass",
    "assemble_boundary_term",
    "trace_matrix",
    "compute_trace_norm",
    "check_accretivity",
    "check_continuity",
    "export_coordinate_format",
    "SemigroupEvaluator",
    "build_evaluator",
    "geometric_times",
    "semigroup_law_defect",
    "check_nash",
    "check_ouhabaz_contractivity_criterion",
    "check_sup_contraction",
    "check_positivity",
    "check_domination",
    "fit_ultracontractivity",
    "check_eventual_positivity",
    "check_duality",
    "check_energy_dissipation",
    "check_smoothing_decay",
    "write_document",
    "write_norms_csv",
    "__version__",
]
