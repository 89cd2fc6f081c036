"""Coordinate-chart differential geometry with exact derivative towers.

Metrics, frames and maps are closed-form expressions; every derivative the
tensor calculus needs comes from truncated Taylor jets, so curvature, tension
and bitension are exact up to floating-point rounding.
"""

__version__ = "0.1.0"

from .expr import DomainError, ParseError, eval_jet, parse  # noqa: E402
from .geometry import (ChartedManifold, FrameField, christoffel, frame_bracket,  # noqa: E402
                       frame_components, frame_connection, frame_curvature, gauss_curvature,
                       metric_at, ricci, riemann_lowered)
from .mapcalc import (SmoothMap, bitension, differential, is_riemannian_submersion,  # noqa: E402
                      tension)
from .submersion import (biharmonic_residual, check_curvature_identities, check_jacobi,  # noqa: E402
                         check_thb2, gauss_curvature_base, integrability_data, is_harmonic,
                         probe_rch_infeasibility)

__all__ = [
    "ChartedManifold", "DomainError", "FrameField", "ParseError", "SmoothMap", "biharmonic_residual",
    "bitension", "check_curvature_identities", "check_jacobi", "check_thb2", "christoffel",
    "differential", "eval_jet", "frame_bracket", "frame_components", "frame_connection",
    "frame_curvature", "gauss_curvature", "gauss_curvature_base", "integrability_data", "is_harmonic",
    "is_riemannian_submersion", "metric_at", "parse", "probe_rch_infeasibility", "ricci",
    "riemann_lowered", "tension",
]
