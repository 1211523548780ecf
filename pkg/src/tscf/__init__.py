"""Counterfactual explanations for multivariate time-series classifiers.

Combines offline shapelet mining, a residual adversarial generator with a
dual-ReLU sparsity head, and a triplet-distance regularizer, plus the
evaluation metrics and experiment harness around them.
"""

from . import baselines, cfgen, data, harness, metrics, neural, shapelets

__version__ = "0.1.0"

__all__ = [
    "data",
    "shapelets",
    "neural",
    "cfgen",
    "metrics",
    "baselines",
    "harness",
    "__version__",
]
