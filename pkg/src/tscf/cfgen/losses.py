"""Generator and discriminator loss terms, and margin selection.

All terms accept autodiff Tensors where a gradient is needed and plain
arrays where it is not; each returns a scalar Tensor.
"""

from __future__ import annotations

import math

import numpy as np

from ..neural.autodiff import Tensor, tensor
from ..neural.networks import PROB_EPS, bce
from .config import LossWeights

__all__ = [
    "triplet_loss",
    "batch_triplet_loss",
    "central_margin",
    "adversarial_losses",
    "generator_adversarial_loss",
    "classifier_loss",
    "regularization_losses",
    "composite_loss",
]


def _set_distance(anchor: Tensor, examples: np.ndarray) -> Tensor:
    """Mean over the example set of the summed absolute difference.

    anchor: (V, T); examples: (n, V, T). Returns a scalar Tensor.
    """
    diff = anchor.reshape(1, *anchor.shape) - examples
    return diff.abs().sum(axis=(1, 2)).mean()


def triplet_loss(anchor_cf, factuals, counterfactuals, gamma: float) -> Tensor:
    """Hinge on (distance to factuals) - (distance to counterfactuals) + gamma.

    Distances are unnormalized Manhattan sums averaged over each example
    set. Differentiable w.r.t. ``anchor_cf`` almost everywhere.
    """
    anchor = tensor(anchor_cf)
    factuals = np.asarray(factuals, dtype=np.float64)
    counterfactuals = np.asarray(counterfactuals, dtype=np.float64)
    if factuals.size == 0 or counterfactuals.size == 0:
        raise ValueError("factual and counterfactual sets must be nonempty")
    d_pos = _set_distance(anchor, factuals)
    d_neg = _set_distance(anchor, counterfactuals)
    return (d_pos - d_neg + gamma).relu()


def batch_triplet_loss(anchors: Tensor, factuals, counterfactuals, gamma: float) -> Tensor:
    """Mean triplet loss over a batch of anchors.

    anchors: (B, V, T); factuals / counterfactuals: (B, n, V, T).
    """
    factuals = np.asarray(factuals, dtype=np.float64)
    counterfactuals = np.asarray(counterfactuals, dtype=np.float64)
    b, v, t = anchors.shape
    a = anchors.reshape(b, 1, v, t)
    d_pos = (a - factuals).abs().sum(axis=(2, 3)).mean(axis=1)
    d_neg = (a - counterfactuals).abs().sum(axis=(2, 3)).mean(axis=1)
    return (d_pos - d_neg + gamma).relu().mean()


def central_margin(
    anchors: np.ndarray, factuals: np.ndarray, counterfactuals: np.ndarray
) -> tuple[float, list[float]]:
    """Data-driven margin seed and its candidate sweep set.

    The central value is half the absolute gap between the mean
    counterfactual and mean factual distances over the sample; candidates
    space one decade step around it. Degenerate (near-zero) gaps fall back
    to gamma = 1 with a single candidate.
    """
    anchors = np.asarray(anchors, dtype=np.float64)
    factuals = np.asarray(factuals, dtype=np.float64)
    counterfactuals = np.asarray(counterfactuals, dtype=np.float64)
    if anchors.size == 0:
        raise ValueError("empty margin sample")
    a = anchors[:, None, :, :]
    d_pos = np.abs(a - factuals).sum(axis=(2, 3)).mean(axis=1)
    d_neg = np.abs(a - counterfactuals).sum(axis=(2, 3)).mean(axis=1)
    gamma_central = 0.5 * abs(float(d_neg.mean()) - float(d_pos.mean()))
    if gamma_central < 1e-9:
        return 1.0, [1.0]
    delta = 10.0 ** math.floor(math.log10(gamma_central))
    candidates = [
        gamma_central - delta,
        gamma_central,
        gamma_central + delta,
        gamma_central + 2 * delta,
    ]
    return gamma_central, candidates


def generator_adversarial_loss(d_fake) -> Tensor:
    """Non-saturating surrogate -E[log D(fake)]: same fixed point as the
    minimax form but keeps gradients alive early in training."""
    d_fake = tensor(d_fake).clip(PROB_EPS, 1.0 - PROB_EPS)
    return -d_fake.log().mean()


def adversarial_losses(d_real, d_fake) -> tuple[Tensor, Tensor]:
    """(discriminator loss, generator adversarial loss).

    The discriminator minimizes -E[log D(real) + log(1 - D(fake))].
    """
    d_real = tensor(d_real).clip(PROB_EPS, 1.0 - PROB_EPS)
    d_fake_c = tensor(d_fake).clip(PROB_EPS, 1.0 - PROB_EPS)
    loss_d = -(d_real.log() + (1.0 - d_fake_c).log()).mean()
    return loss_d, generator_adversarial_loss(d_fake)


def classifier_loss(p_cf, desired: int) -> Tensor:
    """Mean BCE pushing counterfactual probabilities toward the desired class."""
    p_cf = tensor(p_cf)
    target = np.full(p_cf.shape, float(desired))
    return bce(p_cf, target)


def regularization_losses(residual, eps_l0: float = 0.01) -> tuple[Tensor, Tensor]:
    """(smooth L0 surrogate, normalized L1) of a residual batch.

    The L0 surrogate is mean tanh(|r| / eps_l0): differentiable, and
    saturating to the cell-count fraction for |r| >> eps_l0. Exact L0 is
    only used in evaluation metrics.
    """
    r = tensor(residual)
    magnitude = r.abs()
    l1 = magnitude.mean()
    l0 = (magnitude / eps_l0).tanh().mean()
    return l0, l1


def composite_loss(parts: dict[str, Tensor], weights: LossWeights) -> Tensor:
    """Weighted sum of the generator loss terms; a zero weight removes the
    term exactly (missing parts count as absent)."""
    total: Tensor | None = None
    for key, lam in (
        ("triplet", weights.triplet),
        ("adversarial", weights.adversarial),
        ("classifier", weights.classifier),
        ("l0", weights.l0),
        ("l1", weights.l1),
    ):
        if lam == 0.0 or key not in parts:
            continue
        term = parts[key] * lam
        total = term if total is None else total + term
    if total is None:
        return Tensor(0.0)
    return total
