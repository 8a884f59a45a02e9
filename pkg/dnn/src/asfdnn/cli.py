"""asfdnn: generate datasets, train the network, run batch inference, and
evaluate predictions against labels."""

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from .data import generate_dataset, load_dataset, save_dataset
from .infer import infer_to_csv, predict
from .metrics import connected_components, normalized_l1
from .model import NetworkSpec, load_model
from .train import TrainConfig, train


def build_parser():
    parser = argparse.ArgumentParser(prog="asfdnn", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("generate", help="write a labeled dataset directory")
    p.add_argument("--count", type=int, required=True)
    p.add_argument("--m", type=int, default=64)
    p.add_argument("--t", type=int, help="snapshots per sample; omit for exact moments")
    p.add_argument("--snr-db", type=float, default=20.0)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--k", type=int, nargs="+", default=[1, 2, 3, 4])
    p.add_argument("--out-dir", required=True)

    p = sub.add_parser("train", help="train on a dataset directory")
    p.add_argument("--dataset", required=True)
    p.add_argument("--epochs", type=int, default=150)
    p.add_argument("--batch", type=int, default=256)
    p.add_argument("--lr", type=float, default=1e-3)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--model-out", required=True)
    p.add_argument("--log-out", help="training log JSON path")

    p = sub.add_parser("infer", help="predict grid densities for sigma rows")
    p.add_argument("--model", required=True)
    p.add_argument("--sigma", required=True, help="moment CSV (+ sidecar)")
    p.add_argument("--out-dir", required=True)

    p = sub.add_parser("eval", help="score a model on a labeled dataset")
    p.add_argument("--model", required=True)
    p.add_argument("--dataset", required=True)
    p.add_argument("--out", help="metrics JSON path")
    return parser


def _cmd_generate(args):
    ds = generate_dataset(
        args.count, args.m, snapshot_count=args.t, snr_db=args.snr_db,
        seed=args.seed, k_choices=tuple(args.k),
    )
    save_dataset(ds, args.out_dir)
    print(f"wrote {args.count} samples to {args.out_dir}")
    return 0


def _cmd_train(args):
    ds = load_dataset(args.dataset)
    cfg = TrainConfig(epochs=args.epochs, batch_size=args.batch,
                      learning_rate=args.lr, seed=args.seed)
    _, log = train(ds, NetworkSpec(), cfg, artifact_path=args.model_out, verbose=True)
    if args.log_out:
        Path(args.log_out).write_text(json.dumps(log, indent=2) + "\n")
    print(f"final train loss {log[-1]['train_loss']:.4f}, "
          f"val loss {log[-1]['val_loss']:.4f} -> {args.model_out}")
    return 0


def _cmd_infer(args):
    model, spec = load_model(args.model)
    gammas = infer_to_csv(model, args.sigma, args.out_dir, spec.input_dim)
    print(f"wrote {gammas.shape[0]} estimates to {args.out_dir}")
    return 0


def _cmd_eval(args):
    model, spec = load_model(args.model)
    ds = load_dataset(args.dataset)
    gammas = predict(model, ds.sigma, spec.input_dim)
    l1 = [normalized_l1(g, t) for g, t in zip(gammas, ds.labels)]
    count_hits = [
        connected_components(g) == connected_components(t)
        for g, t in zip(gammas, ds.labels)
    ]
    doc = {
        "count": len(ds),
        "median_l1": float(np.median(l1)),
        "mean_l1": float(np.mean(l1)),
        "cluster_count_accuracy": float(np.mean(count_hits)),
    }
    print(json.dumps(doc, indent=2))
    if args.out:
        Path(args.out).write_text(json.dumps(doc, indent=2) + "\n")
    return 0


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    handlers = {
        "generate": _cmd_generate,
        "train": _cmd_train,
        "infer": _cmd_infer,
        "eval": _cmd_eval,
    }
    try:
        return handlers[args.command](args)
    except (OSError, ValueError, RuntimeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
