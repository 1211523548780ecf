"""End-to-end experiment orchestration: mine, pretrain, train, explain,
evaluate, aggregate. Runs are seeded and artifacts deterministic, so two
executions of the same plan produce byte-identical reports.

Artifact layout under the plan's output directory (per arm):

    pool.json                      mined shapelets (when the variant uses them)
    seed{k}/classifier.json        frozen classifier
    seed{k}/bundle/*.json          generator, discriminator, classifier copies
    seed{k}/results.jsonl          one counterfactual per queried test instance
    seed{k}/tcv_curve.csv          per-epoch training flip rate
    seed{k}/metrics.json           per-run metric values
    report.csv / report.json       aggregated table
"""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass, replace
from pathlib import Path

from ..cfgen.config import QUERIED_LABEL, RunConfig, resolve_variant
from ..cfgen.results import write_results
from ..cfgen.training import generate_batch, pretrain_classifier, train
from ..data import MtsDataset, load_dataset, z_normalize
from ..metrics import MetricsReport, aggregate, evaluate_run
from ..neural.bundle import save_network
from ..shapelets import ShapeletPool, discover_pool
from .report import render_report

__all__ = ["ExperimentPlan", "run_pipeline", "run_ablation", "run_sweep", "run_arm"]

logger = logging.getLogger(__name__)

DEFAULT_SEEDS = (0, 1, 2, 3, 4)
SWEEP_TRIPLET_SIZES = (2, 4, 6, 8)


class StageError(RuntimeError):
    """A pipeline stage failed; carries the stage name for diagnostics."""

    def __init__(self, stage: str, cause: Exception):
        super().__init__(f"[{stage}] {cause}")
        self.stage = stage
        self.cause = cause


@dataclass
class ExperimentPlan:
    data_dir: Path
    out_dir: Path
    config: RunConfig
    seeds: tuple[int, ...] = DEFAULT_SEEDS
    pips: int = 5
    shapelets_per_class: int = 3
    max_len: int | None = None
    z_norm: bool = False
    cls_epochs: int = 40
    cls_lr: float = 1e-3
    label: str | None = None  # report row label; defaults to the variant name

    def __post_init__(self) -> None:
        self.data_dir = Path(self.data_dir)
        self.out_dir = Path(self.out_dir)
        self.seeds = tuple(self.seeds)
        if not self.seeds:
            raise ValueError("plan needs at least one seed")


def _load_splits(plan: ExperimentPlan) -> tuple[MtsDataset, MtsDataset]:
    train_ds = load_dataset(plan.data_dir, "train")
    test_ds = load_dataset(plan.data_dir, "test")
    if plan.z_norm:
        train_ds, test_ds = z_normalize(train_ds), z_normalize(test_ds)
    return train_ds, test_ds


def _queried_test(test_ds: MtsDataset):
    queries = [inst for inst in test_ds if inst.label == QUERIED_LABEL]
    if not queries:
        raise ValueError(f"test split has no instances with label {QUERIED_LABEL}")
    return queries


def run_arm(
    plan: ExperimentPlan,
    cfg: RunConfig,
    arm_dir: Path,
    train_ds: MtsDataset,
    test_ds: MtsDataset,
    pool: ShapeletPool | None,
) -> MetricsReport:
    """Execute train-classifier -> train -> explain -> eval for every seed."""
    arm_dir.mkdir(parents=True, exist_ok=True)
    switches = resolve_variant(cfg)
    if switches.use_shapelet:
        if pool is None:
            raise ValueError("variant requires a shapelet pool")
        pool.save(arm_dir / "pool.json")
    queries = _queried_test(test_ds)
    query_values = {inst.id: inst.values for inst in queries}
    run_metrics = []
    for seed in plan.seeds:
        seed_dir = arm_dir / f"seed{seed}"
        seed_dir.mkdir(parents=True, exist_ok=True)
        cfg_seed = cfg.with_overrides(seed=seed)

        try:
            classifier = pretrain_classifier(
                train_ds,
                hidden_size=cfg.hidden_size,
                seed=seed,
                epochs=plan.cls_epochs,
                lr=plan.cls_lr,
                batch_size=cfg.batch_size,
            )
        except Exception as exc:
            raise StageError("train-classifier", exc) from exc
        save_network(classifier, seed_dir / "classifier.json")

        try:
            outcome = train(train_ds, pool if switches.use_shapelet else None,
                            classifier, cfg_seed)
        except Exception as exc:
            raise StageError("train", exc) from exc
        outcome.bundle.save(seed_dir / "bundle")
        curve_lines = ["epoch,tcv"] + [f"{e},{v!r}" for e, v in outcome.tcv_curve]
        (seed_dir / "tcv_curve.csv").write_text("\n".join(curve_lines) + "\n")
        (seed_dir / "margin.json").write_text(
            json.dumps({"gamma": outcome.gamma, "candidates": outcome.margin_candidates}) + "\n"
        )

        try:
            results = generate_batch(
                queries, outcome.bundle, pool if switches.use_shapelet else None,
                classifier, cfg_seed,
            )
        except Exception as exc:
            raise StageError("explain", exc) from exc
        write_results(results, seed_dir / "results.jsonl")

        try:
            metrics = evaluate_run(results, query_values, test_ds, cfg_seed)
        except Exception as exc:
            raise StageError("eval", exc) from exc
        (seed_dir / "metrics.json").write_text(json.dumps(metrics, indent=1) + "\n")
        run_metrics.append(metrics)
        logger.info("seed %d done: %s", seed, {k: round(v, 4) for k, v in metrics.items()})
    return aggregate(run_metrics)


def _mine_if_needed(
    plan: ExperimentPlan, train_ds: MtsDataset, configs: list[RunConfig]
) -> ShapeletPool | None:
    if not any(resolve_variant(c).use_shapelet for c in configs):
        return None
    try:
        return discover_pool(train_ds, plan.pips, plan.shapelets_per_class, plan.max_len)
    except Exception as exc:
        raise StageError("mine", exc) from exc


def run_pipeline(plan: ExperimentPlan) -> list[tuple[str, MetricsReport]]:
    """Single-configuration end-to-end run; writes report.csv / report.json."""
    train_ds, test_ds = _load_splits(plan)
    pool = _mine_if_needed(plan, train_ds, [plan.config])
    label = plan.label or plan.config.variant
    report = run_arm(plan, plan.config, plan.out_dir, train_ds, test_ds, pool)
    rows = [(label, report)]
    render_report(rows, plan.out_dir / "report")
    return rows


def run_ablation(plan: ExperimentPlan, axis: str) -> list[tuple[str, MetricsReport]]:
    """Paired runs flipping one ingredient; identical seeds in both arms.

    The triplet axis follows the deactivated-classifier protocol, so the
    metric-learning effect is measured without label-flip pressure.
    """
    base = plan.config
    if axis == "shapelet":
        arms = [
            ("with_shapelet", base.with_overrides(use_shapelet=True)),
            ("without_shapelet", base.with_overrides(use_shapelet=False)),
        ]
    elif axis == "triplet":
        arms = [
            ("with_triplet", base.with_overrides(use_triplet=True, use_classifier_loss=False)),
            ("without_triplet", base.with_overrides(use_triplet=False, use_classifier_loss=False)),
        ]
    elif axis == "none":
        arms = [(plan.label or base.variant, base)]
    else:
        raise ValueError(f"unknown ablation axis {axis!r}")

    train_ds, test_ds = _load_splits(plan)
    pool = _mine_if_needed(plan, train_ds, [cfg for _, cfg in arms])
    rows = []
    for arm_label, cfg in arms:
        arm_dir = plan.out_dir / arm_label if len(arms) > 1 else plan.out_dir
        report = run_arm(plan, cfg, arm_dir, train_ds, test_ds, pool)
        rows.append((arm_label, report))
    render_report(rows, plan.out_dir / "report")
    return rows


def run_sweep(
    plan: ExperimentPlan,
    margins: list[float] | None = None,
    triplet_sizes: tuple[int, ...] = SWEEP_TRIPLET_SIZES,
) -> list[tuple[str, MetricsReport]]:
    """Margin x triplet-size grid; one aggregated report row per cell.

    Without explicit margins the candidate set is derived from the data:
    the central margin plus one decade step around it.
    """
    train_ds, test_ds = _load_splits(plan)
    pool = _mine_if_needed(plan, train_ds, [plan.config])

    if margins is None:
        margins = _derive_margin_candidates(plan, train_ds)
        logger.info("sweep margin candidates: %s", margins)

    rows = []
    for gamma in margins:
        for n in triplet_sizes:
            cfg = plan.config.with_overrides(
                margin=replace(plan.config.margin, mode="fixed", gamma=float(gamma)),
                triplet_n=int(n),
            )
            cell = f"gamma={gamma:g},n={n}"
            arm_dir = plan.out_dir / f"gamma_{gamma:g}_n_{n}"
            report = run_arm(plan, cfg, arm_dir, train_ds, test_ds, pool)
            rows.append((cell, report))
    render_report(rows, plan.out_dir / "report")
    return rows


def _derive_margin_candidates(plan: ExperimentPlan, train_ds: MtsDataset) -> list[float]:
    """Estimate the sweep margins from the first seed's classifier."""
    import numpy as np

    from ..cfgen.losses import central_margin
    from ..cfgen.triplets import TripletSampler
    from ..data import split_by_label

    classifier = pretrain_classifier(
        train_ds,
        hidden_size=plan.config.hidden_size,
        seed=plan.seeds[0],
        epochs=plan.cls_epochs,
        lr=plan.cls_lr,
        batch_size=plan.config.batch_size,
    )
    queried, _ = split_by_label(train_ds, QUERIED_LABEL)
    sampler = TripletSampler(train_ds, classifier, plan.config.triplet_n)
    x_q = queried.values_array()[:64]
    preds = (classifier.predict_proba(x_q) > 0.5).astype(int)
    rng = np.random.default_rng([plan.seeds[0], 4])
    batch = sampler.sample(x_q, preds, [str(i) for i in range(len(x_q))], rng)
    _, candidates = central_margin(x_q, batch.factuals, batch.counterfactuals)
    return candidates
