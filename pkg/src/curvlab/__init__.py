"""Jet-based curvature laboratory: metrics, curvature hierarchy, identity checks, quadrature."""

__version__ = "0.1.0"

from .checks import CheckReport, run_checks
from .curvature import CurvatureBundle, curvature_bundle
from .expr import eval_jet, parse_expr
from .jets import Jet
from .zoo import MetricSpec, sample_points, zoo

__all__ = [
    "CheckReport",
    "CurvatureBundle",
    "Jet",
    "MetricSpec",
    "__version__",
    "curvature_bundle",
    "eval_jet",
    "parse_expr",
    "run_checks",
    "sample_points",
    "zoo",
]
