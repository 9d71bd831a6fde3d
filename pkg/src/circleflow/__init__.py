"""circleflow: circle patterns with prescribed exterior intersection angles
and vertex curvatures on triangulated surfaces with boundary, computed by
combinatorial Ricci flow or Newton descent on a convex energy, with a
combinatorial attainability pre-checker and a layout/SVG engine."""

from .circlegeom import (
    Geometry,
    ThreeCircleConfig,
    TriangleAngles,
    angle_derivatives,
    asymptotic_probe,
    check_triangle_inequality,
    edge_length,
    inner_angles,
)
from .conditions import (
    AttainabilityReport,
    CurvatureTarget,
    attainability,
    boundary_phi_target,
    check_c1,
    check_target,
    explicit_target,
    mean_target,
    zero_target,
)
from .curvature import (
    CurvatureEvaluator,
    CurvatureVector,
    curvature_map,
    jacobian,
    r_to_u,
    u_to_r,
)
from .layout import EmbeddedPattern, SvgOptions, develop, measured_intersection_angle, render_svg
from .mesh import (
    SubsetAnalysis,
    TriangulatedSurface,
    analyze_subset,
    build_surface,
    open_arc_count,
)
from .solver import (
    FlowSpec,
    SolveReport,
    energy_difference,
    exponential_fit,
    fit_rate,
    flow_rhs,
    integrate_flow,
    newton_solve,
)

__all__ = [
    "Geometry",
    "ThreeCircleConfig",
    "TriangleAngles",
    "angle_derivatives",
    "asymptotic_probe",
    "check_triangle_inequality",
    "edge_length",
    "inner_angles",
    "AttainabilityReport",
    "CurvatureTarget",
    "attainability",
    "boundary_phi_target",
    "check_c1",
    "check_target",
    "explicit_target",
    "mean_target",
    "zero_target",
    "CurvatureEvaluator",
    "CurvatureVector",
    "curvature_map",
    "jacobian",
    "r_to_u",
    "u_to_r",
    "EmbeddedPattern",
    "SvgOptions",
    "develop",
    "measured_intersection_angle",
    "render_svg",
    "SubsetAnalysis",
    "TriangulatedSurface",
    "analyze_subset",
    "build_surface",
    "open_arc_count",
    "FlowSpec",
    "SolveReport",
    "energy_difference",
    "exponential_fit",
    "fit_rate",
    "flow_rhs",
    "integrate_flow",
    "newton_solve",
]

__version__ = "0.1.0"
