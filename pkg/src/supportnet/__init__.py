"""Relu networks with bilinear pooling that implement their support exactly."""

__version__ = "0.1.0"

from .adjust import AdjustmentCertificate, adjust_support
from .baselines import PolynomialRegressor, RandomFeaturesRegressor, separation_report, tail_mass
from .exceptions import BudgetExceededError, DocumentError, NonReluError, NotPowerOfTwoError, StructuralError
from .geometry import Box, estimate_lipschitz, estimate_support_box, metric_capacity
from .interpolation import LipschitzApproximator, approximate_lipschitz, build_tent_interpolant, jung_normalize
from .masks import MaskSpec, build_cube_mask, build_univariate_mask, delta_for_epsilon
from .network import (
    Activation,
    ActivationKind,
    Affine,
    Network,
    Pool,
    compose,
    deserialize,
    parallel_pair,
    serialize,
    stats,
)
from .pipeline import PipelineConfig, load_config, run_pipeline, verify_network, write_report
from .targets import FunctionSpec, get_target

__all__ = [
    "AdjustmentCertificate", "adjust_support", "PolynomialRegressor", "RandomFeaturesRegressor",
    "separation_report", "tail_mass", "BudgetExceededError", "DocumentError", "NonReluError",
    "NotPowerOfTwoError", "StructuralError", "Box", "estimate_lipschitz", "estimate_support_box",
    "metric_capacity", "LipschitzApproximator", "approximate_lipschitz", "build_tent_interpolant",
    "jung_normalize", "MaskSpec", "build_cube_mask", "build_univariate_mask", "delta_for_epsilon",
    "Activation", "ActivationKind", "Affine", "Network", "Pool", "compose", "deserialize",
    "parallel_pair", "serialize", "stats", "PipelineConfig", "load_config", "run_pipeline",
    "verify_network", "write_report", "FunctionSpec", "get_target",
]
