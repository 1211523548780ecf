"""Classifier pretraining, the adversarial training loop, and generation.

One training run is strictly sequential and fully determined by the config
seed: parameter init, batch order, reference sampling, counterfactual
draws, and margin estimation all derive from it.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np

from ..data import MtsDataset, MtsInstance, split_by_label
from ..neural.autodiff import Tensor, no_grad
from ..neural.bundle import ModelBundle
from ..neural.networks import Classifier, Discriminator, Generator, NetworkSpec, bce, build_network
from ..neural.optim import Adam
from ..shapelets import ShapeletPool, extract_discriminative, mask_series
from .config import QUERIED_LABEL, RunConfig, resolve_variant
from .losses import (
    adversarial_losses,
    batch_triplet_loss,
    central_margin,
    classifier_loss,
    composite_loss,
    generator_adversarial_loss,
    regularization_losses,
)
from .results import CfResult
from .triplets import TripletSampler

__all__ = [
    "TrainingDiverged",
    "TrainResult",
    "pretrain_classifier",
    "train",
    "generate_cf",
    "generate_batch",
]

logger = logging.getLogger(__name__)

_EVAL_CHUNK = 256


class TrainingDiverged(RuntimeError):
    """A loss became non-finite during training."""


@dataclass
class TrainResult:
    bundle: ModelBundle
    tcv_curve: list[tuple[int, float]]
    gamma: float
    margin_candidates: list[float] = field(default_factory=list)


def pretrain_classifier(
    train_ds: MtsDataset,
    hidden_size: int = 32,
    seed: int = 0,
    epochs: int = 40,
    lr: float = 1e-3,
    batch_size: int = 64,
) -> Classifier:
    """Fit the frozen classifier with BCE before adversarial training."""
    meta = train_ds.meta
    spec = NetworkSpec("classifier", meta.n_signals, meta.length, hidden_size, "sigmoid", seed)
    clf = build_network(spec)
    opt = Adam(clf.params(), lr=lr)
    values = train_ds.values_array()
    labels = train_ds.labels.astype(np.float64)
    rng = np.random.default_rng([seed, 7])
    for epoch in range(epochs):
        order = rng.permutation(len(values))
        for lo in range(0, len(order), batch_size):
            idx = order[lo : lo + batch_size]
            probs = clf.forward(Tensor(values[idx]))
            loss = bce(probs.reshape(len(idx)), labels[idx])
            if not np.isfinite(loss.data):
                raise TrainingDiverged(f"classifier loss non-finite at epoch {epoch}")
            clf.zero_grad()
            loss.backward()
            opt.step()
    return clf


def _prepare_masks(
    instances: list[MtsInstance], pool: ShapeletPool | None, label: int, use_shapelet: bool
) -> tuple[np.ndarray, np.ndarray]:
    """(masked inputs, region indicators) for a list of instances."""
    values = np.stack([inst.values for inst in instances])
    if not use_shapelet:
        return values, np.ones_like(values)
    if pool is None:
        raise ValueError("use_shapelet=True requires a mined shapelet pool")
    masked = np.empty_like(values)
    indicator = np.empty_like(values)
    for i, inst in enumerate(instances):
        regions = extract_discriminative(inst, pool, label)
        ms = mask_series(inst, regions)
        masked[i] = ms.values
        indicator[i] = ms.indicator()
    return masked, indicator


def _batched_probs(net, batch: np.ndarray) -> np.ndarray:
    out = np.empty(len(batch))
    for lo in range(0, len(batch), _EVAL_CHUNK):
        out[lo : lo + _EVAL_CHUNK] = net.predict_proba(batch[lo : lo + _EVAL_CHUNK])
    return out


def _forward_counterfactuals(
    generator: Generator,
    originals: np.ndarray,
    gen_inputs: np.ndarray,
    indicator: np.ndarray,
    mask_residuals: bool,
) -> np.ndarray:
    """Residuals for a batch, applying residual masking when configured."""
    residuals = np.empty_like(originals)
    with no_grad():
        for lo in range(0, len(originals), _EVAL_CHUNK):
            hi = lo + _EVAL_CHUNK
            out = generator.forward(Tensor(gen_inputs[lo:hi])).data
            if generator.full_output:
                res = out - originals[lo:hi]
            else:
                res = out
            if mask_residuals and not generator.full_output:
                res = res * indicator[lo:hi]
            residuals[lo:hi] = res
    return residuals


def _resolve_margin(cfg: RunConfig, sampler, queries, preds, rng) -> tuple[float, list[float]]:
    """Fixed mode uses the configured gamma; auto mode estimates the central
    margin from an initial sample (anchors start as the queries)."""
    if cfg.margin.mode == "fixed":
        return cfg.margin.gamma, [cfg.margin.gamma]
    take = min(64, len(queries))
    batch = sampler.sample(queries[:take], preds[:take], [str(i) for i in range(take)], rng)
    gamma, candidates = central_margin(queries[:take], batch.factuals, batch.counterfactuals)
    return gamma, candidates


def train(
    train_ds: MtsDataset,
    pool: ShapeletPool | None,
    classifier: Classifier,
    cfg: RunConfig,
) -> TrainResult:
    """Adversarial training of the residual generator (one seeded run)."""
    switches = resolve_variant(cfg)
    meta = train_ds.meta
    queried_ds, reference_ds = split_by_label(train_ds, QUERIED_LABEL)
    x_q = queried_ds.values_array()
    x_r = reference_ds.values_array()
    desired = 1 - QUERIED_LABEL

    gen_spec = NetworkSpec("generator", meta.n_signals, meta.length, cfg.hidden_size,
                           switches.head, cfg.seed)
    disc_spec = NetworkSpec("discriminator", meta.n_signals, meta.length, cfg.hidden_size,
                            "sigmoid", cfg.seed)
    generator = build_network(gen_spec)
    discriminator = build_network(disc_spec)
    adam_g = Adam(generator.params(), lr=cfg.lr)
    adam_d = Adam(discriminator.params(), lr=cfg.lr)

    masked, indicator = _prepare_masks(
        queried_ds.instances, pool, QUERIED_LABEL, switches.use_shapelet
    )
    p_orig = _batched_probs(classifier, x_q)
    pred_orig = (p_orig > 0.5).astype(np.int64)

    rng_shuffle = np.random.default_rng([cfg.seed, 1])
    rng_ref = np.random.default_rng([cfg.seed, 2])
    rng_cf = np.random.default_rng([cfg.seed, 3])
    rng_margin = np.random.default_rng([cfg.seed, 4])

    sampler = None
    factual_values = None
    gamma = cfg.margin.gamma
    candidates = [gamma]
    if switches.use_triplet:
        sampler = TripletSampler(train_ds, classifier, cfg.triplet_n)
        factual_values = np.stack(
            [sampler.values[sampler.nearest_factuals(x, int(p))]
             for x, p in zip(x_q, pred_orig)]
        )
        gamma, candidates = _resolve_margin(cfg, sampler, x_q, pred_orig, rng_margin)
        logger.info("margin resolved: gamma=%.6g candidates=%s", gamma, candidates)

    apply_res_mask = cfg.mask_residuals and switches.use_shapelet and not switches.full_output
    tcv_curve: list[tuple[int, float]] = []

    for epoch in range(cfg.epochs):
        order = rng_shuffle.permutation(len(x_q))
        for lo in range(0, len(order), cfg.batch_size):
            idx = order[lo : lo + cfg.batch_size]
            xb = x_q[idx]
            gen_in = masked[idx]

            g_out = generator.forward(Tensor(gen_in))
            if switches.full_output:
                x_cf_t = g_out
                residual_t = g_out - xb
            else:
                residual_t = g_out * indicator[idx] if apply_res_mask else g_out
                x_cf_t = residual_t + xb

            # Discriminator update: real references vs generated (detached).
            ref_idx = rng_ref.integers(0, len(x_r), size=len(idx))
            d_real = discriminator.forward(Tensor(x_r[ref_idx]))
            d_fake = discriminator.forward(x_cf_t.detach())
            loss_d, _ = adversarial_losses(d_real, d_fake)
            if not np.isfinite(loss_d.data):
                raise TrainingDiverged(f"discriminator loss non-finite at epoch {epoch}")
            discriminator.zero_grad()
            loss_d.backward()
            adam_d.step()

            # Generator update on the weighted composite.
            d_fake2 = discriminator.forward(x_cf_t)
            parts = {"adversarial": generator_adversarial_loss(d_fake2)}
            if cfg.use_classifier_loss:
                p_cf = classifier.forward(x_cf_t)
                parts["classifier"] = classifier_loss(p_cf, desired)
            if switches.use_triplet and cfg.lambdas.triplet > 0:
                cf_sets = sampler.draw_counterfactuals(pred_orig[idx], rng_cf)
                parts["triplet"] = batch_triplet_loss(
                    x_cf_t, factual_values[idx], cf_sets, gamma
                )
            parts["l0"], parts["l1"] = regularization_losses(residual_t, cfg.eps_l0)
            loss_g = composite_loss(parts, cfg.lambdas)
            if not np.isfinite(loss_g.data):
                raise TrainingDiverged(f"generator loss non-finite at epoch {epoch}")
            if logger.isEnabledFor(logging.DEBUG):
                logger.debug(
                    "epoch %d parts: %s", epoch,
                    {k: round(float(v.data), 4) for k, v in parts.items()},
                )
            generator.zero_grad()
            discriminator.zero_grad()
            classifier.zero_grad()
            loss_g.backward()
            adam_g.step()

        residuals = _forward_counterfactuals(
            generator, x_q, masked, indicator, cfg.mask_residuals
        )
        p_cf_all = _batched_probs(classifier, x_q + residuals)
        flipped = (p_cf_all > 0.5) != (p_orig > 0.5)
        tcv = 100.0 * float(flipped.mean())
        tcv_curve.append((epoch, tcv))
        logger.debug("epoch %d: train TCV %.2f%%", epoch, tcv)

    bundle = ModelBundle(
        generator=generator,
        discriminator=discriminator,
        classifier=classifier,
        seed=cfg.seed,
        gen_optimizer=adam_g,
        disc_optimizer=adam_d,
    )
    return TrainResult(bundle=bundle, tcv_curve=tcv_curve, gamma=gamma,
                       margin_candidates=candidates)


def _single_residual(
    generator: Generator,
    query: MtsInstance,
    pool: ShapeletPool | None,
    cfg: RunConfig,
    noise: np.ndarray | None = None,
) -> np.ndarray:
    switches = resolve_variant(cfg)
    if switches.use_shapelet:
        regions = extract_discriminative(query, pool, query.label)
        ms = mask_series(query, regions)
        gen_in, ind = ms.values, ms.indicator()
    else:
        gen_in, ind = query.values, np.ones_like(query.values)
    if noise is not None:
        gen_in = gen_in + noise
    with no_grad():
        out = generator.forward(Tensor(gen_in[None, :, :])).data[0]
    if switches.full_output:
        return out - query.values
    if cfg.mask_residuals and switches.use_shapelet:
        return out * ind
    return out


def generate_cf(
    query: MtsInstance,
    bundle: ModelBundle,
    pool: ShapeletPool | None,
    classifier: Classifier,
    cfg: RunConfig,
    noise: np.ndarray | None = None,
) -> CfResult:
    """Mask, run the generator once, add the residual, classify both sides."""
    residual = _single_residual(bundle.generator, query, pool, cfg, noise)
    p_orig = float(classifier.predict_proba(query.values[None])[0])
    x_cf = query.values + residual
    p_cf = float(classifier.predict_proba(x_cf[None])[0])
    return CfResult.from_query(query.values, residual, p_orig, p_cf, query.id)


def generate_batch(
    queries: list[MtsInstance],
    bundle: ModelBundle,
    pool: ShapeletPool | None,
    classifier: Classifier,
    cfg: RunConfig,
    noise_scale: float = 0.0,
    noise_seed: int = 0,
) -> list[CfResult]:
    """Counterfactuals for a list of queries; optional seeded input noise."""
    rng = np.random.default_rng([noise_seed, 9]) if noise_scale > 0 else None
    out = []
    for query in queries:
        noise = None
        if rng is not None:
            noise = rng.normal(0.0, noise_scale, size=query.values.shape)
        out.append(generate_cf(query, bundle, pool, classifier, cfg, noise))
    return out
