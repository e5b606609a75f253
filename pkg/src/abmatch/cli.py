"""Command-line entry points.

Exit codes: 0 success, 1 runtime or data failure, 2 usage error.  Every
command writes a manifest next to its primary artifact so runs can be
audited and reproduced; identical flags and inputs give byte-identical
artifacts.
"""

import argparse
import hashlib
import json
import sys

import numpy as np

from . import abm as _abm
from . import ssvm as _ssvm
from .active import LoopConfig, curve_csv, evaluate_hamming, run_curves
from .data import gen_synthetic, ingest_mot, load_dataset, save_dataset
from .errors import AbmatchError
from .game import GameConfig


def _sha256(path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 20), b""):
            h.update(chunk)
    return h.hexdigest()


def write_manifest(command: str, config: dict, artifacts, dataset_path=None,
                   seed=None, extras=None):
    manifest = {
        "command": command,
        "config": config,
        "dataset_hash": _sha256(dataset_path) if dataset_path else None,
        "seed": seed,
        "artifacts": [str(a) for a in artifacts],
    }
    if extras:
        manifest.update(extras)
    path = f"{artifacts[0]}.manifest.json"
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return path


def _loop_config(args) -> LoopConfig:
    return LoopConfig(
        fractions=tuple(args.fractions),
        initial_epochs=args.initial_epochs,
        round_epochs=args.round_epochs,
        learning_rate=args.lr,
        lr_decay_steps=args.lr_decay,
        reg_lambda=args.reg,
    )


def cmd_gen_synth(args):
    margin = tuple(args.margin) if len(args.margin) == 2 else args.margin[0]
    ds = gen_synthetic(args.n, args.d, args.count, args.seed, args.noise, margin)
    save_dataset(ds, args.out)
    write_manifest("gen-synth", {
        "n": args.n, "d": args.d, "count": args.count, "noise": args.noise,
        "margin": list(args.margin),
    }, [args.out], dataset_path=args.out, seed=args.seed,
        extras={"theta_star": ds.meta["theta_star"]})
    print(f"wrote {len(ds)} instances to {args.out}")
    return 0


def cmd_train(args):
    ds = load_dataset(args.data)
    cfg = _abm.TrainConfig(epochs=args.epochs, learning_rate=args.lr,
                           lr_decay_steps=args.lr_decay, reg_lambda=args.reg,
                           seed=args.seed)
    if args.model == "abm":
        model = _abm.train(ds.instances, cfg)
    else:
        model = _ssvm.ssvm_train(ds.instances, cfg)
    _abm.save_model(model, args.out)
    write_manifest("train", {
        "model": args.model, "epochs": args.epochs, "lr": args.lr,
        "lr_decay": args.lr_decay, "reg": args.reg,
    }, [args.out], dataset_path=args.data, seed=args.seed)
    print(f"trained {args.model} on {len(ds)} instances -> {args.out}")
    return 0


def cmd_eval(args):
    ds = load_dataset(args.data)
    model = _abm.load_model(args.model)
    if model.kind == "abm":
        supports = []
        total = 0.0
        for x in ds.instances:
            perm, eq = _abm.predict(model, x)
            from .matching import hamming_distance
            total += hamming_distance(perm, x.truth) / x.n
            supports.append(eq.support_size)
        rate = total / len(ds)
        mean_support = float(np.mean(supports))
    else:
        rate = evaluate_hamming(model, ds.instances)
        mean_support = 1.0
    print(f"hamming_rate={rate:.10g} mean_support_size={mean_support:.10g}")
    return 0


def cmd_active_sim(args):
    ds = load_dataset(args.data)
    cfg = _loop_config(args)
    strategies = args.strategy
    records = run_curves(ds, strategies, args.rounds, args.splits, args.seed, cfg)
    rounds_seen = {}
    for r in records:
        rounds_seen.setdefault((r.strategy, r.split_seed), 0)
        rounds_seen[(r.strategy, r.split_seed)] += 1
    expected = args.rounds + 1
    truncated = [k for k, v in rounds_seen.items() if v < expected]
    with open(args.out, "w", encoding="utf-8") as fh:
        fh.write(curve_csv(records))
    write_manifest("active-sim", {
        "strategy": strategies, "rounds": args.rounds, "splits": args.splits,
        "fractions": list(args.fractions), "initial_epochs": args.initial_epochs,
        "round_epochs": args.round_epochs, "lr": args.lr, "lr_decay": args.lr_decay,
        "reg": args.reg,
    }, [args.out], dataset_path=args.data, seed=args.seed)
    if truncated:
        print(f"warning: pool exhausted early for {len(truncated)} run(s); "
              "curves truncated", file=sys.stderr)
    print(f"wrote {len(records)} curve records to {args.out}")
    return 0


def cmd_ingest_mot(args):
    ds = ingest_mot(args.gt, max_frames=args.max_frames)
    save_dataset(ds, args.out)
    write_manifest("ingest-mot", {
        "gt": str(args.gt), "max_frames": args.max_frames,
        "n_star": ds.meta["n_star"], "skipped_pairs": ds.meta["skipped_pairs"],
    }, [args.out], dataset_path=args.gt, seed=None)
    print(f"ingested {len(ds)} frame pairs (n_star={ds.meta['n_star']}) to {args.out}")
    return 0


def cmd_serve(args):
    from .serve import serve_forever

    ds = load_dataset(args.data)
    cfg = _loop_config(args)
    return serve_forever(ds, args.strategy[0], args.rounds, args.seed, cfg,
                         port=args.port)


def _add_loop_flags(p):
    defaults = LoopConfig()
    p.add_argument("--fractions", type=float, nargs=3, default=list(defaults.fractions),
                   help="initial-labeled / pool / test fractions")
    p.add_argument("--initial-epochs", type=int, default=defaults.initial_epochs)
    p.add_argument("--round-epochs", type=int, default=defaults.round_epochs)
    p.add_argument("--lr", type=float, default=defaults.learning_rate)
    p.add_argument("--lr-decay", type=float, default=defaults.lr_decay_steps)
    p.add_argument("--reg", type=float, default=defaults.reg_lambda)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="abmatch",
        description="Active learning for bipartite matching (adversarial vs SSVM)")
    sub = parser.add_subparsers(dest="cmd", required=True)

    p = sub.add_parser("gen-synth", help="generate a planted synthetic dataset")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--d", type=int, required=True)
    p.add_argument("--count", type=int, required=True)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--noise", type=float, default=0.0)
    p.add_argument("--margin", type=float, nargs="+", default=[1.0],
                   help="truth-edge boost; two values draw per-instance margins")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_gen_synth)

    p = sub.add_parser("train", help="train a model on a labeled dataset")
    p.add_argument("--data", required=True)
    p.add_argument("--model", choices=["abm", "ssvm"], default="abm")
    p.add_argument("--epochs", type=int, default=10)
    p.add_argument("--lr", type=float, default=0.4)
    p.add_argument("--lr-decay", type=float, default=300.0)
    p.add_argument("--reg", type=float, default=0.0)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("eval", help="evaluate a trained model")
    p.add_argument("--model", required=True)
    p.add_argument("--data", required=True)
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("active-sim", help="simulated active-learning curves")
    p.add_argument("--data", required=True)
    p.add_argument("--strategy", nargs="+", required=True,
                   choices=["abm-mi", "ssvm-entropy", "random"])
    p.add_argument("--rounds", type=int, default=100)
    p.add_argument("--splits", type=int, default=30)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--out", required=True)
    _add_loop_flags(p)
    p.set_defaults(func=cmd_active_sim)

    p = sub.add_parser("ingest-mot", help="build a dataset from MOT ground truth")
    p.add_argument("--gt", required=True)
    p.add_argument("--max-frames", type=int, default=None)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_ingest_mot)

    p = sub.add_parser("serve", help="live annotation session over HTTP")
    p.add_argument("--data", required=True)
    p.add_argument("--strategy", nargs=1, default=["abm-mi"],
                   choices=["abm-mi", "ssvm-entropy", "random"])
    p.add_argument("--rounds", type=int, default=100)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--port", type=int, default=8008)
    _add_loop_flags(p)
    p.set_defaults(func=cmd_serve)

    return parser


def validate_args(args) -> None:
    positives = {"rounds": 1, "splits": 1, "epochs": 1,
                 "initial_epochs": 1, "round_epochs": 1}
    for name, low in positives.items():
        if getattr(args, name, low) < low:
            raise SystemExit(2)
    if getattr(args, "count", 1) < 1 or getattr(args, "n", 2) < 2:
        raise SystemExit(2)
    if getattr(args, "lr", 1.0) <= 0:
        raise SystemExit(2)
    margin = getattr(args, "margin", [1.0])
    if len(margin) > 2 or any(m < 0 for m in margin):
        raise SystemExit(2)


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    validate_args(args)
    try:
        return args.func(args)
    except AbmatchError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
