"""Conformal preimages of lines and circles: geometry kernels, maps, harmonic measure and experiments."""

__version__ = "0.1.0"

from .moebius import Circline, MoebiusMap, RSPoint, circline_image, disc_automorphism, normalizing_map, reflection_fixing
from .hyperbolic import HyperbolicPolygon, geodesic_between, hyperbolic_distance, klein_inverse, klein_map
from .spherical import sigma_distance, spherical_bound_check, spherical_curve_length
from .curves import SampledCurve, adaptive_sample
from .conformal import (
    MapPipeline,
    conformal_reflection_across,
    double_slit_map,
    halfplane_slit_map,
    perturbed_slit_map,
    rho_omega,
    schwarz_reflect_extend,
    two_slit_map,
)
from .harmonic import conjecture_bound, omega_halfplane, omega_pipeline, omega_wos, trace_level_curve
from .preimage import hypothesis_check, preimage_components, theorem1_verdict, trace_implicit

__all__ = [
    "Circline",
    "MoebiusMap",
    "RSPoint",
    "circline_image",
    "disc_automorphism",
    "normalizing_map",
    "reflection_fixing",
    "HyperbolicPolygon",
    "geodesic_between",
    "hyperbolic_distance",
    "klein_inverse",
    "klein_map",
    "sigma_distance",
    "spherical_bound_check",
    "spherical_curve_length",
    "SampledCurve",
    "adaptive_sample",
    "MapPipeline",
    "conformal_reflection_across",
    "double_slit_map",
    "halfplane_slit_map",
    "perturbed_slit_map",
    "rho_omega",
    "schwarz_reflect_extend",
    "two_slit_map",
    "conjecture_bound",
    "omega_halfplane",
    "omega_pipeline",
    "omega_wos",
    "trace_level_curve",
    "hypothesis_check",
    "preimage_components",
    "theorem1_verdict",
    "trace_implicit",
]
