"""Discrete gauge fields, Kahler-fibration 2-forms, and moduli metrics on
triangulated closed surfaces (SU(2)/SL(2,C)).

Modules: mesh (surfaces, refinement, OFF I/O), dec (cochain calculus and
per-face geometry), lie (su(2)/sl(2,C)), fields (configurations, curvature,
equation residuals, the circle correspondence), kahler (complex structures,
2-forms, potentials, Ehresmann connections), moment (moment maps, actions,
adjoints, the operator L), solve (nonlinear solvers, continuation, gauge
fixing, moduli metrics), checks/fixtures (verification suites), cli
(experiment runner).
"""

from .dec import (
    apply_J,
    coboundary,
    hamiltonian_field,
    lie_derivative_J,
    pair_integral,
    reference_J,
    scalar_curvature,
    unwhitney,
    whitney,
)
from .fields import (
    Configuration,
    TangentVector,
    codifferential,
    covariant_d,
    curvature,
    gauge_transform,
    residual,
    residual_norms,
    to_complex,
    to_unitary,
)
from .kahler import apply_structure, eval_form, horizontal_project, signature_probe
from .mesh import SurfaceMesh, build_surface, read_off, refine, write_off
from .moment import (
    GaugeParameter,
    adjoint_action,
    equivariance_check,
    hamiltonian_check,
    infinitesimal_action,
    moment_eval,
    operator_script_L,
)
from .solve import (
    ModuliReport,
    SolverConfig,
    continue_alpha,
    gauge_fix,
    moduli_basis,
    moduli_metric,
    solve_cc_metric,
    solve_harmonic,
    solve_hitchin,
)

__all__ = [name for name in dir() if not name.startswith("_")]
__version__ = "0.1.0"
