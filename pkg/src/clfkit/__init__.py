"""clfkit: numerical verification harness for Cauchy-Leray integral operators
on strongly convex domains in C^n."""

from .domains import (
    Ball,
    CJet,
    Domain,
    Ellipsoid,
    PerturbedBall,
    TangentFrame,
    boundary_distance,
    leray_pairing,
    make_domain,
    project_to_boundary,
    quasimetric,
    radial_boundary_point,
    strong_convexity_margin,
    tangent_decompose,
    tangent_frame,
)
from .charts import (
    NormalFormChart,
    chart_lipschitz_probe,
    normal_form_chart,
    standard_form_residual,
)
from .measures import (
    Quasiball,
    RegionGrid,
    SurfaceGrid,
    build_adapted_surface_grid,
    build_adapted_volume_grid,
    build_cap_grid,
    build_region_grid,
    build_shell_grid,
    build_surface_grid,
    build_volume_grid,
    convergence_order,
    fubini_rule_check,
    leray_levy_density,
    nu_weights,
    quasiball_measure,
    region_integral,
    region_radial_rule_check,
    surface_integral,
    volume_density,
)
from .clf import (
    PRODUCTION_RESOLUTION,
    SEPARATION,
    HoloTestFunction,
    clf_apply,
    clf_kernel,
    exterior_pole,
    holomorphy_defect,
    monomial,
    random_poly,
    reproduction_report,
    rough,
    standard_suite,
    stokes_identity_check,
)
from .area import (
    BoundaryFunction,
    VertexAreaEvaluator,
    area_integrand,
    area_integral_Il,
    bmo_ball_family,
    bmo_inequality_report,
    bmo_seminorm,
    boundary_family,
    constant_function,
    halton_surface_design,
    indicator_smoothed,
    log_singular,
    lp_inequality_report,
    lp_norm,
    rough_random,
    smooth_member,
)
from .regions import (
    RegionSpec,
    in_external_region,
    in_internal_region,
    in_model_region,
    qm_comparability_probe,
    region_inclusion_probe,
    sample_external_region,
    sample_internal_region,
    sample_model_region,
)
from . import errors

__version__ = "0.1.0"
