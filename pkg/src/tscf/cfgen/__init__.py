from .config import (
    QUERIED_LABEL,
    VARIANTS,
    ConfigError,
    LofConfig,
    LossWeights,
    MarginConfig,
    RunConfig,
    VariantSwitches,
    resolve_variant,
)
from .losses import (
    adversarial_losses,
    batch_triplet_loss,
    central_margin,
    classifier_loss,
    composite_loss,
    generator_adversarial_loss,
    regularization_losses,
    triplet_loss,
)
from .results import CfResult, read_results, write_results
from .training import (
    TrainingDiverged,
    TrainResult,
    generate_batch,
    generate_cf,
    pretrain_classifier,
    train,
)
from .triplets import TripletBatch, TripletSampler, sample_triplets

__all__ = [
    "QUERIED_LABEL",
    "VARIANTS",
    "ConfigError",
    "LofConfig",
    "LossWeights",
    "MarginConfig",
    "RunConfig",
    "VariantSwitches",
    "resolve_variant",
    "triplet_loss",
    "batch_triplet_loss",
    "central_margin",
    "adversarial_losses",
    "generator_adversarial_loss",
    "classifier_loss",
    "regularization_losses",
    "composite_loss",
    "CfResult",
    "write_results",
    "read_results",
    "TrainingDiverged",
    "TrainResult",
    "pretrain_classifier",
    "train",
    "generate_cf",
    "generate_batch",
    "TripletBatch",
    "TripletSampler",
    "sample_triplets",
]
