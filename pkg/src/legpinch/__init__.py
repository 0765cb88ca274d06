"""Numerical verification toolkit for the pinching geometry of minimal
Legendrian submanifolds in the unit sphere: symmetric cubic tensor algebra,
sphere-constrained cubic-form maximization, pinching inequality gaps,
finite-difference immersion geometry, and the octonionic almost complex
structure on the six-sphere."""

__version__ = "0.1.0"

from .catalog import CatalogEntry, calabi_torus, control_non_legendrian, totally_geodesic
from .cubic_spectrum import (
    AdaptedSpectrum,
    Canonical3,
    canonical3,
    cubic_form,
    multiplicity_one,
    theta,
    theta_bruteforce,
)
from .errors import (
    ConsistencyError,
    ConvergenceError,
    DegenerateChartError,
    DimensionError,
    DomainError,
    LegendrianViolation,
    LegpinchError,
    TraceError,
)
from .g2 import almost_complex, appendix_constants, cross
from .immersion import (
    Immersion,
    ImmersionJet,
    codazzi_residual,
    field_scan,
    gauss_residual,
    jet,
    legendrian_residual,
    sigma_at,
)
from .pinching import (
    PinchReport,
    beta_chain_check,
    kappa_inequality_gap,
    laplacian_lower_bound,
    newton_gap,
    pinching_report,
)
from .tensor_core import (
    AlgCurvature,
    SymCubic,
    algebraic_curvature,
    invariants,
    load_tensor,
    random_traceless,
    save_tensor,
    simons_gap,
    simons_rhs,
    sym3_from_entries,
    weyl_decomposition,
)

__all__ = [
    "__version__",
    "AdaptedSpectrum", "AlgCurvature", "Canonical3", "CatalogEntry",
    "Immersion", "ImmersionJet", "PinchReport", "SymCubic",
    "algebraic_curvature", "almost_complex", "appendix_constants",
    "beta_chain_check", "calabi_torus", "canonical3", "codazzi_residual",
    "control_non_legendrian", "cross", "cubic_form", "field_scan",
    "gauss_residual", "invariants", "jet", "kappa_inequality_gap",
    "laplacian_lower_bound", "legendrian_residual", "load_tensor",
    "multiplicity_one", "newton_gap", "pinching_report", "random_traceless",
    "save_tensor", "sigma_at", "simons_gap", "simons_rhs",
    "sym3_from_entries", "theta", "theta_bruteforce", "totally_geodesic",
    "weyl_decomposition",
    "ConsistencyError", "ConvergenceError", "DegenerateChartError",
    "DimensionError", "DomainError", "LegendrianViolation", "LegpinchError",
    "TraceError",
]
