"""Command-line interface.

Commands: synth, mine, train-classifier, train, explain, eval, ablate,
sweep, report. Every command validates its config before doing work and
exits nonzero with a stage-tagged message on failure.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

import numpy as np

from ..cfgen.config import QUERIED_LABEL, ConfigError, RunConfig
from ..cfgen.results import read_results, write_results
from ..cfgen.training import generate_batch, pretrain_classifier, train
from ..data import SynthConfig, load_dataset, save_dataset, synth_dataset, z_normalize
from ..metrics import aggregate, evaluate_run
from ..neural.bundle import ModelBundle, load_network, save_network
from ..shapelets import ShapeletPool, discover_pool
from . import pipeline as pl
from .heatmap import render_heatmap
from .report import render_report

logger = logging.getLogger(__name__)


def _load_config(args) -> RunConfig:
    cfg = RunConfig.from_file(args.config) if args.config else RunConfig()
    if getattr(args, "seed", None) is not None:
        cfg = cfg.with_overrides(seed=args.seed)
    return cfg


def _load_split(args, split: str):
    ds = load_dataset(args.data, split)
    return z_normalize(ds) if getattr(args, "z_normalize", False) else ds


def _seeds(args) -> tuple[int, ...]:
    if args.seeds:
        return tuple(int(s) for s in args.seeds.split(","))
    return pl.DEFAULT_SEEDS


def _make_plan(args, cfg: RunConfig) -> pl.ExperimentPlan:
    return pl.ExperimentPlan(
        data_dir=Path(args.data),
        out_dir=Path(args.out),
        config=cfg,
        seeds=_seeds(args),
        pips=args.pips,
        shapelets_per_class=args.per_class,
        max_len=args.max_len,
        z_norm=getattr(args, "z_normalize", False),
        cls_epochs=args.cls_epochs,
        cls_lr=args.cls_lr,
    )


def cmd_synth(args) -> None:
    cfg = SynthConfig(
        n_train=args.n_train,
        n_test=args.n_test,
        v=args.v,
        t=args.t,
        bump_signal=args.bump_signal,
        bump_span=(args.bump_start, args.bump_len),
        bump_amplitude=args.amplitude,
        noise_sigma=args.sigma,
        seed=args.seed if args.seed is not None else 0,
        name=args.name,
    )
    train_ds, test_ds = synth_dataset(cfg)
    save_dataset(train_ds, args.out, "train")
    save_dataset(test_ds, args.out, "test")
    print(f"wrote {train_ds.n} train / {test_ds.n} test instances to {args.out}")


def cmd_mine(args) -> None:
    train_ds = _load_split(args, "train")
    pool = discover_pool(train_ds, args.pips, args.per_class, args.max_len)
    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    pool.save(out)
    counts = {c: len(s) for c, s in pool.per_class.items()}
    print(f"mined shapelets per class {counts} -> {out}")


def cmd_train_classifier(args) -> None:
    cfg = _load_config(args)
    train_ds = _load_split(args, "train")
    clf = pretrain_classifier(
        train_ds,
        hidden_size=cfg.hidden_size,
        seed=cfg.seed,
        epochs=args.epochs,
        lr=args.lr,
        batch_size=cfg.batch_size,
    )
    probs = clf.predict_proba(train_ds.values_array())
    acc = float(((probs > 0.5).astype(int) == train_ds.labels).mean())
    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    save_network(clf, out)
    print(f"classifier train accuracy {acc:.3f} -> {out}")


def cmd_train(args) -> None:
    cfg = _load_config(args)
    train_ds = _load_split(args, "train")
    pool = ShapeletPool.load(args.pool) if args.pool else None
    classifier, _ = load_network(args.classifier)
    outcome = train(train_ds, pool, classifier, cfg)
    out = Path(args.out)
    outcome.bundle.save(out)
    curve = ["epoch,tcv"] + [f"{e},{v!r}" for e, v in outcome.tcv_curve]
    (out / "tcv_curve.csv").write_text("\n".join(curve) + "\n")
    (out / "margin.json").write_text(
        json.dumps({"gamma": outcome.gamma, "candidates": outcome.margin_candidates}) + "\n"
    )
    final = outcome.tcv_curve[-1][1] if outcome.tcv_curve else float("nan")
    print(f"trained {cfg.epochs} epochs, final train TCV {final:.1f}% -> {out}")


def cmd_explain(args) -> None:
    cfg = _load_config(args)
    test_ds = _load_split(args, args.split)
    queries = [inst for inst in test_ds if inst.label == QUERIED_LABEL]
    if not queries:
        raise ValueError(f"no instances with label {QUERIED_LABEL} in split {args.split!r}")

    if args.method == "generator":
        if not args.bundle:
            raise ValueError("--bundle is required for the generator method")
        bundle = ModelBundle.load(args.bundle)
        pool = ShapeletPool.load(args.pool) if args.pool else None
        results = generate_batch(queries, bundle, pool, bundle.classifier, cfg)
    else:  # nun
        from ..baselines import find_nun, nun_substitute_cf

        if not args.classifier:
            raise ValueError("--classifier is required for the nun method")
        classifier, _ = load_network(args.classifier)
        train_ds = _load_split(args, "train")
        results = []
        for query in queries:
            nun, _ = find_nun(query, train_ds, classifier)
            results.append(
                nun_substitute_cf(query, nun, classifier, args.window_len, args.max_segments)
            )

    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    write_results(results, out)
    flipped = sum(r.flipped for r in results)
    print(f"explained {len(results)} queries ({flipped} flipped) -> {out}")
    if args.heatmap_dir:
        hm = Path(args.heatmap_dir)
        hm.mkdir(parents=True, exist_ok=True)
        for r in results:
            render_heatmap(r, hm / f"{r.id}.svg")
        print(f"wrote {len(results)} heatmaps -> {hm}")


def cmd_eval(args) -> None:
    cfg = _load_config(args)
    test_ds = _load_split(args, "test")
    queries = {inst.id: inst.values for inst in test_ds if inst.label == QUERIED_LABEL}
    runs = []
    for res_path in args.results:
        results = read_results(res_path, queries)
        runs.append(evaluate_run(results, queries, test_ds, cfg))
    report = aggregate(runs)
    render_report([(args.label, report)], Path(args.out))
    if args.per_run_out:
        Path(args.per_run_out).write_text(json.dumps(runs, indent=1) + "\n")
    print(f"evaluated {len(runs)} run(s) -> {args.out}.csv / .json")


def cmd_ablate(args) -> None:
    cfg = _load_config(args)
    plan = _make_plan(args, cfg)
    rows = pl.run_ablation(plan, args.axis)
    for label, report in rows:
        print(f"{label}: " + ", ".join(f"{m}={report.mean(m):.4f}" for m in report.stats))
    print(f"report -> {plan.out_dir / 'report.csv'}")


def cmd_sweep(args) -> None:
    cfg = _load_config(args)
    plan = _make_plan(args, cfg)
    margins = [float(x) for x in args.margins.split(",")] if args.margins else None
    sizes = tuple(int(x) for x in args.ns.split(","))
    rows = pl.run_sweep(plan, margins, sizes)
    print(f"{len(rows)} sweep cells -> {plan.out_dir / 'report.csv'}")


def cmd_report(args) -> None:
    rows = []
    for spec in args.runs:
        label, paths = spec.split("=", 1)
        metrics = [json.loads(Path(p).read_text()) for p in paths.split(",")]
        rows.append((label, aggregate(metrics)))
    render_report(rows, Path(args.out))
    print(f"{len(rows)} row(s) -> {args.out}.csv / .json")


def _add_common(p: argparse.ArgumentParser, config=True, out=True, seed=True) -> None:
    if config:
        p.add_argument("--config", help="JSON run-config file")
    if out:
        p.add_argument("--out", required=True, help="output path")
    if seed:
        p.add_argument("--seed", type=int, default=None, help="override the config seed")


def _add_mining_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--pips", type=int, default=5, help="salient points per signal")
    p.add_argument("--per-class", type=int, default=3, dest="per_class",
                   help="shapelets kept per class")
    p.add_argument("--max-len", type=int, default=None, dest="max_len",
                   help="maximum candidate length")


def _add_plan_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--data", required=True, help="dataset directory")
    p.add_argument("--seeds", default=None, help="comma list, default 0,1,2,3,4")
    p.add_argument("--cls-epochs", type=int, default=40, dest="cls_epochs")
    p.add_argument("--cls-lr", type=float, default=1e-3, dest="cls_lr")
    p.add_argument("--z-normalize", action="store_true", dest="z_normalize")
    _add_mining_flags(p)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="tscf",
        description="Counterfactual explanations for multivariate time-series classifiers",
    )
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("synth", help="generate the synthetic bump dataset")
    _add_common(p, config=False)
    p.add_argument("--n-train", type=int, default=200)
    p.add_argument("--n-test", type=int, default=100)
    p.add_argument("--v", type=int, default=3)
    p.add_argument("--t", type=int, default=50)
    p.add_argument("--bump-signal", type=int, default=0)
    p.add_argument("--bump-start", type=int, default=20)
    p.add_argument("--bump-len", type=int, default=10)
    p.add_argument("--amplitude", type=float, default=5.0)
    p.add_argument("--sigma", type=float, default=0.5)
    p.add_argument("--name", default="synth")
    p.set_defaults(func=cmd_synth, stage="synth")

    p = sub.add_parser("mine", help="discover the shapelet pool")
    _add_common(p, config=False, seed=False)
    p.add_argument("--data", required=True)
    p.add_argument("--z-normalize", action="store_true", dest="z_normalize")
    _add_mining_flags(p)
    p.set_defaults(func=cmd_mine, stage="mine")

    p = sub.add_parser("train-classifier", help="pretrain the frozen classifier")
    _add_common(p)
    p.add_argument("--data", required=True)
    p.add_argument("--epochs", type=int, default=40)
    p.add_argument("--lr", type=float, default=1e-3)
    p.add_argument("--z-normalize", action="store_true", dest="z_normalize")
    p.set_defaults(func=cmd_train_classifier, stage="train-classifier")

    p = sub.add_parser("train", help="adversarial training of the generator")
    _add_common(p)
    p.add_argument("--data", required=True)
    p.add_argument("--pool", default=None, help="pool.json from mine")
    p.add_argument("--classifier", required=True, help="classifier.json")
    p.add_argument("--z-normalize", action="store_true", dest="z_normalize")
    p.set_defaults(func=cmd_train, stage="train")

    p = sub.add_parser("explain", help="generate counterfactuals for a split")
    _add_common(p)
    p.add_argument("--data", required=True)
    p.add_argument("--split", default="test")
    p.add_argument("--method", choices=("generator", "nun"), default="generator")
    p.add_argument("--bundle", default=None, help="bundle directory from train")
    p.add_argument("--pool", default=None)
    p.add_argument("--classifier", default=None, help="classifier.json (nun method)")
    p.add_argument("--window-len", type=int, default=10, dest="window_len")
    p.add_argument("--max-segments", type=int, default=8, dest="max_segments")
    p.add_argument("--heatmap-dir", default=None, dest="heatmap_dir")
    p.add_argument("--z-normalize", action="store_true", dest="z_normalize")
    p.set_defaults(func=cmd_explain, stage="explain")

    p = sub.add_parser("eval", help="compute metrics for result files")
    _add_common(p)
    p.add_argument("--data", required=True)
    p.add_argument("--results", nargs="+", required=True, help="results.jsonl per run")
    p.add_argument("--label", default="full")
    p.add_argument("--per-run-out", default=None, dest="per_run_out",
                   help="also write raw per-run metrics JSON")
    p.add_argument("--z-normalize", action="store_true", dest="z_normalize")
    p.set_defaults(func=cmd_eval, stage="eval")

    p = sub.add_parser("ablate", help="paired runs flipping one ingredient")
    _add_common(p)
    _add_plan_flags(p)
    p.add_argument("--axis", choices=("shapelet", "triplet", "none"), required=True)
    p.set_defaults(func=cmd_ablate, stage="ablate")

    p = sub.add_parser("sweep", help="margin x triplet-size grid")
    _add_common(p)
    _add_plan_flags(p)
    p.add_argument("--margins", default=None, help="comma list; default: derived")
    p.add_argument("--ns", default="2,4,6,8", help="triplet sizes, comma list")
    p.set_defaults(func=cmd_sweep, stage="sweep")

    p = sub.add_parser("report", help="aggregate per-run metrics into a table")
    _add_common(p, config=False, seed=False)
    p.add_argument("--runs", nargs="+", required=True,
                   help="label=metrics.json[,metrics.json...] per row")
    p.set_defaults(func=cmd_report, stage="report")

    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.DEBUG if args.verbose else logging.INFO,
        format="%(levelname)s %(name)s: %(message)s",
    )
    try:
        args.func(args)
    except pl.StageError as exc:
        print(f"error {exc}", file=sys.stderr)
        return 2
    except (ConfigError, ValueError, OSError) as exc:
        print(f"[{args.stage}] error: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
