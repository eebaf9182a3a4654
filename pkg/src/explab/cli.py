"""Command-line front end.

Subcommands: ``expressivity``, ``sweep``, ``metrics``, ``synth``,
``balance``. Every run writes JSON with an embedded manifest (resolved
configuration, input digests, seed, timestamp) sufficient to reproduce it;
output is byte-identical across reruns except for the timestamp.

Exit codes: 0 success, 1 usage/input error, 2 numeric failure. The
EXPLAB_THREADS environment variable caps the worker count (0 = one per
CPU; unset = 1).
"""

from __future__ import annotations

import argparse
import hashlib
import json
import sys
from datetime import datetime, timezone
from pathlib import Path

from . import __version__
from .data import (
    SyntheticSpec,
    balance_classes,
    gen_synthetic,
    read_attribute,
    read_features,
    read_metadata,
    write_attribute,
    write_features,
)
from .errors import ExplabError, NumericError, ParseError
from .expressivity import compute_expressivity, resolve_workers, sweep
from .metrics import bootstrap_ci, pr_points, roc_points
from .mine import MineConfig
from .svg import sweep_chart

SCHEMA_VERSION = 1


class _Parser(argparse.ArgumentParser):
    """argparse exits 2 on usage errors; the CLI contract reserves 2 for
    numeric failures, so usage errors are remapped to 1."""

    def error(self, message):
        self.print_usage(sys.stderr)
        sys.stderr.write(f"{self.prog}: error: {message}\n")
        raise SystemExit(1)


def _sha256(path) -> str:
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


def _manifest(subcommand: str, config: dict, inputs: dict, base_seed: int) -> dict:
    return {
        "tool": "explab",
        "version": __version__,
        "schema_version": SCHEMA_VERSION,
        "subcommand": subcommand,
        "config": config,
        "inputs": {name: {"path": str(p), "sha256": _sha256(p)} for name, p in inputs.items()},
        "base_seed": base_seed,
        "timestamp": datetime.now(timezone.utc).strftime("%Y-%m-%dT%H:%M:%SZ"),
    }


def _write_json(path, payload: dict) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")


def _parse_hidden(text: str) -> tuple[int, int]:
    parts = text.split(",")
    if len(parts) != 2:
        raise ValueError(f"--hidden expects two comma-separated sizes, got {text!r}")
    return int(parts[0]), int(parts[1])


def _mine_config(args) -> MineConfig:
    return MineConfig(
        hidden_dims=_parse_hidden(args.hidden),
        lr=args.lr,
        batch_size=args.batch,
        train_steps=args.steps,
        estimate_window=args.estimate_window,
        ema_rate=args.ema_rate,
        use_ema_correction=not args.no_ema_correction,
        rng_seed=args.seed,
        standardize_inputs=not args.no_standardize,
    )


def _add_mine_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--seeds", type=int, default=10, metavar="M",
                   help="number of estimator repeats (default 10)")
    p.add_argument("--steps", type=int, default=MineConfig.train_steps,
                   help=f"training steps per run (default {MineConfig.train_steps})")
    p.add_argument("--batch", type=int, default=MineConfig.batch_size,
                   help=f"minibatch size (default {MineConfig.batch_size})")
    p.add_argument("--lr", type=float, default=MineConfig.lr,
                   help=f"Adam learning rate (default {MineConfig.lr})")
    p.add_argument("--hidden", default="256,64",
                   help="hidden layer sizes as H1,H2 (default 256,64)")
    p.add_argument("--estimate-window", type=float, default=MineConfig.estimate_window,
                   help="trailing fraction of steps averaged into the estimate (default 0.1)")
    p.add_argument("--ema-rate", type=float, default=MineConfig.ema_rate,
                   help="moving-average rate for the marginal-term gradient (default 0.01)")
    p.add_argument("--no-ema-correction", action="store_true",
                   help="use the raw minibatch gradient for the marginal term")
    p.add_argument("--no-standardize", action="store_true",
                   help="skip z-scoring of inputs")
    p.add_argument("--seed", type=int, default=0, help="base RNG seed (default 0)")


def cmd_expressivity(args) -> int:
    features = read_features(args.features)
    attribute = read_attribute(args.attribute)
    cfg = _mine_config(args)
    res = compute_expressivity(
        features,
        attribute,
        m_repeats=args.seeds,
        config=cfg,
        layer_name=args.layer_name or Path(args.features).stem,
        attribute_name=args.attribute_name or Path(args.attribute).stem,
        n_jobs=None,
    )
    manifest = _manifest(
        "expressivity",
        {**_config_dict(cfg), "seeds": args.seeds},
        {"features": args.features, "attribute": args.attribute},
        args.seed,
    )
    payload = {"manifest": manifest, **res.to_dict()}
    _write_json(args.out, payload)
    return 0


def _config_dict(cfg: MineConfig) -> dict:
    return {
        "hidden_dims": list(cfg.hidden_dims),
        "lr": cfg.lr,
        "batch_size": cfg.batch_size,
        "train_steps": cfg.train_steps,
        "estimate_window": cfg.estimate_window,
        "ema_rate": cfg.ema_rate,
        "use_ema_correction": cfg.use_ema_correction,
        "rng_seed": cfg.rng_seed,
        "standardize_inputs": cfg.standardize_inputs,
    }


def _split_names(flag_value: str | None, paths: list[str]) -> list[str]:
    if flag_value:
        names = [n.strip() for n in flag_value.split(",")]
        if len(names) != len(paths):
            raise ValueError(
                f"got {len(names)} names for {len(paths)} files"
            )
        return names
    return [Path(p).stem for p in paths]


def cmd_sweep(args) -> int:
    layer_paths = [p for p in args.layers.split(",") if p]
    attr_paths = [p for p in args.attributes.split(",") if p]
    layer_names = _split_names(args.layer_names, layer_paths)
    attr_names = _split_names(args.attribute_names, attr_paths)
    layers = [(name, read_features(p)) for name, p in zip(layer_names, layer_paths)]
    attrs = [(name, read_attribute(p)) for name, p in zip(attr_names, attr_paths)]
    cfg = _mine_config(args)
    res = sweep(layers, attrs, m_repeats=args.seeds, config=cfg, n_jobs=None)
    inputs = {f"layer:{n}": p for n, p in zip(layer_names, layer_paths)}
    inputs.update({f"attribute:{n}": p for n, p in zip(attr_names, attr_paths)})
    manifest = _manifest(
        "sweep", {**_config_dict(cfg), "seeds": args.seeds}, inputs, args.seed
    )
    payload = {"manifest": manifest, **res.to_dict()}
    _write_json(args.out, payload)
    if args.svg:
        Path(args.svg).write_text(sweep_chart(res), encoding="utf-8")
    return 0


def cmd_metrics(args) -> int:
    scores = read_attribute(args.scores)
    labels_raw = read_attribute(args.labels)
    auroc_ci = bootstrap_ci(labels_raw, scores, metric="auroc",
                            n_boot=args.bootstrap, level=args.level, seed=args.seed)
    auprc_ci = bootstrap_ci(labels_raw, scores, metric="auprc",
                            n_boot=args.bootstrap, level=args.level, seed=args.seed)
    n = len(scores)
    n_pos = int(sum(1 for v in labels_raw if v == 1))
    manifest = _manifest(
        "metrics",
        {"bootstrap": args.bootstrap, "level": args.level, "resampling": "sample-level"},
        {"scores": args.scores, "labels": args.labels},
        args.seed,
    )
    payload = {
        "manifest": manifest,
        "n": n,
        "n_pos": n_pos,
        "auroc": _ci_dict(auroc_ci),
        "auprc": _ci_dict(auprc_ci),
    }
    if args.curves_out:
        out_dir = Path(args.curves_out)
        out_dir.mkdir(parents=True, exist_ok=True)
        roc = roc_points(labels_raw, scores)
        pr = pr_points(labels_raw, scores)
        _write_points_csv(out_dir / "roc.csv", ("fpr", "tpr"), roc)
        _write_points_csv(out_dir / "pr.csv", ("recall", "precision"), pr)
        payload["curves"] = {"roc": str(out_dir / "roc.csv"), "pr": str(out_dir / "pr.csv")}
    _write_json(args.out, payload)
    return 0


def _ci_dict(ci) -> dict:
    return {
        "point": ci.point,
        "ci_low": ci.ci_low,
        "ci_high": ci.ci_high,
        "n_boot": ci.n_boot,
        "ci_level": ci.ci_level,
        "n_redrawn": ci.n_redrawn,
    }


def _write_points_csv(path, header, points) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(",".join(header) + "\n")
        for x, y in points:
            fh.write(f"{x!r},{y!r}\n")


def cmd_synth(args) -> int:
    spec = SyntheticSpec(
        kind={"gaussian": "gaussian_pair", "independent": "independent",
              "embedded": "embedded_attribute"}[args.kind],
        n=args.n,
        dim=args.dim,
        rho=args.rho,
        snr=args.snr,
        attribute_type=args.attribute_type,
        seed=args.seed,
    )
    features, attribute, true_mi = gen_synthetic(spec)
    write_features(args.out_features, features, fmt=args.format)
    write_attribute(args.out_attribute, attribute, fmt=args.format)
    manifest = _manifest(
        "synth",
        {"kind": spec.kind, "n": spec.n, "dim": spec.dim, "rho": spec.rho,
         "snr": spec.snr, "attribute_type": spec.attribute_type, "format": args.format},
        {"features": args.out_features, "attribute": args.out_attribute},
        args.seed,
    )
    sidecar = args.out_meta or (str(args.out_features) + ".json")
    _write_json(sidecar, {"manifest": manifest, "true_mi_nats": true_mi})
    return 0


def cmd_balance(args) -> int:
    rows = read_metadata(args.metadata)
    res = balance_classes(rows, seed=args.seed)
    manifest = _manifest("balance", {}, {"metadata": args.metadata}, args.seed)
    payload = {
        "manifest": manifest,
        "splits": {
            split: {"selected_ids": ids, "counts": res.counts[split]}
            for split, ids in res.selected.items()
        },
    }
    _write_json(args.out, payload)
    for split in sorted(res.counts):
        counts = ", ".join(f"{lab}: {c}" for lab, c in sorted(res.counts[split].items()))
        print(f"{split}: {counts}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="explab", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"explab {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("expressivity", help="estimate expressivity of one attribute")
    p.add_argument("--features", required=True)
    p.add_argument("--attribute", required=True)
    p.add_argument("--layer-name", default=None)
    p.add_argument("--attribute-name", default=None)
    _add_mine_flags(p)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_expressivity)

    p = sub.add_parser("sweep", help="expressivity over a layer x attribute grid")
    p.add_argument("--layers", required=True, help="comma-separated feature files, depth order")
    p.add_argument("--layer-names", default=None)
    p.add_argument("--attributes", required=True, help="comma-separated attribute files")
    p.add_argument("--attribute-names", default=None)
    _add_mine_flags(p)
    p.add_argument("--out", required=True)
    p.add_argument("--svg", default=None, help="also write a chart to this path")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("metrics", help="AUROC/AUPRC with bootstrap CIs")
    p.add_argument("--scores", required=True)
    p.add_argument("--labels", required=True)
    p.add_argument("--bootstrap", type=int, default=1000)
    p.add_argument("--level", type=float, default=0.95)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.add_argument("--curves-out", default=None, help="directory for ROC/PR point CSVs")
    p.set_defaults(func=cmd_metrics)

    p = sub.add_parser("synth", help="generate synthetic data with known MI")
    p.add_argument("kind", choices=("gaussian", "independent", "embedded"))
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--dim", type=int, default=1)
    p.add_argument("--rho", type=float, default=None)
    p.add_argument("--snr", type=float, default=None)
    p.add_argument("--attribute-type", choices=("continuous", "binary"), default="continuous")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--format", choices=("csv", "fam1"), default="csv")
    p.add_argument("--out-features", required=True)
    p.add_argument("--out-attribute", required=True)
    p.add_argument("--out-meta", default=None,
                   help="sidecar JSON path (default: <out-features>.json)")
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("balance", help="class-balance dataset splits by downsampling")
    p.add_argument("--metadata", required=True, help="CSV with id,split,label[,group]")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_balance)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        resolve_workers(None)  # fail fast on a malformed EXPLAB_THREADS
        return args.func(args)
    except NumericError as exc:
        print(f"explab: numeric failure: {exc}", file=sys.stderr)
        return 2
    except (ValueError, ParseError, ExplabError, OSError) as exc:
        print(f"explab: error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
