"""Mode and ridge estimation on Euclidean/spherical product spaces.

Kernel density estimation with per-factor Gaussian/von Mises kernels, two
mean-shift variants for mode seeking, and a bandwidth-prewhitened subspace
constrained mean shift for density ridges, plus the bandwidth selectors,
error metrics, and simulation scenarios used to validate them.
"""

from .bandwidth import normal_reference_linear, rot_directional, select_bandwidths, silverman_linear
from .datagen import GeneratedData, GroundTruth, Scenario, generate, sample_vmf
from .density import DensityJet, KdeModel
from .geometry import (
    Factor,
    ProductSpace,
    euclidean,
    exp_map,
    geodesic_distance,
    geodesic_pairwise,
    parse_space,
    sphere,
    tangent_projector,
)
from .kernels import (
    Bandwidths,
    KernelProfile,
    bessel_i,
    gaussian_profile,
    kde_normalizing_constant,
    vmf_normalizer,
    von_mises_profile,
)
from .metrics import PointSet, hausdorff_distance, manifold_recovering_error, radial_embedding
from .modeseek import MeanShiftConfig, ModeSet, RunReport, find_modes, mean_shift_step, mean_shift_vector
from .ridgefind import (
    ScmsConfig,
    TangentSpectrum,
    default_step_size,
    find_ridge,
    scms_step,
    tangent_eigendecomposition,
)

__version__ = "0.1.0"

__all__ = [
    "Bandwidths",
    "DensityJet",
    "Factor",
    "GeneratedData",
    "GroundTruth",
    "KdeModel",
    "KernelProfile",
    "MeanShiftConfig",
    "ModeSet",
    "PointSet",
    "ProductSpace",
    "RunReport",
    "Scenario",
    "ScmsConfig",
    "TangentSpectrum",
    "bessel_i",
    "default_step_size",
    "euclidean",
    "exp_map",
    "find_modes",
    "find_ridge",
    "gaussian_profile",
    "generate",
    "geodesic_distance",
    "geodesic_pairwise",
    "hausdorff_distance",
    "kde_normalizing_constant",
    "manifold_recovering_error",
    "mean_shift_step",
    "mean_shift_vector",
    "normal_reference_linear",
    "parse_space",
    "radial_embedding",
    "rot_directional",
    "sample_vmf",
    "scms_step",
    "select_bandwidths",
    "silverman_linear",
    "sphere",
    "tangent_eigendecomposition",
    "tangent_projector",
    "vmf_normalizer",
    "von_mises_profile",
]
