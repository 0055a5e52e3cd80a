"""Scalar Hencky plasticity toolkit: solve, segment, trace characteristics."""

from .mesh import (
    TriMesh,
    BoundaryData,
    MeshError,
    build_domain,
    gradient,
    divergence_adjoint,
    operator_norm,
    save_mesh,
    load_mesh,
)
from .energy import (
    eval_W,
    split_infconv,
    project_ball,
    primal_energy,
    triple_energy,
    flow_rule_residual,
    verify_safe_load,
)
from .solver import SolverConfig, SolveReport, PlasticStrain, solve, kkt_residuals, uniqueness_probe
from .classify import RegionMap, classify_regions, convexity_check, characteristic_boundary, elastic_diagnostics
from .characteristics import (
    SigmaInterpolant,
    AnalyticField,
    Characteristic,
    reconstruct_sigma,
    trace,
    straightness_and_constancy,
    detect_fans,
    level_set_alignment,
    crossing_analysis,
    no_loop_audit,
    seed_grid,
)
from .analytic import AnalyticSolution, macclintock, annulus, monotone_fan, triangle_sigma, compare

__version__ = "0.1.0"
