"""Clutter suppression for co-pulsing frequency diverse array radar in the
difference-coarray domain."""

__version__ = "0.1.0"

from .coprime import CoprimePair, CoprimeSet, coprime_set, count_distinct_sums, lag_structure
from .covariance import coarray_steer, direct_coarray_covariance, lift, recover_coarray_cov, spatial_smooth, virtualize
from .errors import ConfigError, FdaStapError, NumericalError
from .hermitian import Domain, HermitianCov
from .rank import clutter_rank, empirical_rank, rank_Rr
from .rejection import build_projector, reject
from .scene import CCubeConfig, ClutterScene, TargetSpec, reference_config, uniform_ring_scene
from .slepian import dpss, fast_inverse, slepian_clutter_basis
from .stap import Method, mvdr_spectrum, output_sinr, sinr_curve, weight

__all__ = [
    "CCubeConfig", "ClutterScene", "ConfigError", "CoprimePair", "CoprimeSet", "Domain",
    "FdaStapError", "HermitianCov", "Method", "NumericalError", "TargetSpec",
    "build_projector", "clutter_rank", "coarray_steer", "coprime_set", "count_distinct_sums",
    "direct_coarray_covariance", "dpss", "empirical_rank", "fast_inverse", "lag_structure",
    "lift", "mvdr_spectrum", "output_sinr", "rank_Rr", "recover_coarray_cov", "reference_config",
    "reject", "sinr_curve", "slepian_clutter_basis", "spatial_smooth", "uniform_ring_scene",
    "virtualize", "weight",
]
