"""Benchmark command line: cost, train, equivalence, reproduce, bench-kernels.

Experiment configs are JSON files (schema in README). Every emitted
summary embeds the fully resolved config so runs are self-describing.
CSV output is deterministic: identical config and seeds give identical
bytes (timing is reported only in the JSON summary).
"""

import argparse
import json
import os
import sys
import time
from pathlib import Path

import numpy as np

from . import costing, reference
from . import tensor as T
from .data import Dataset, RegressionSpec, gen_regression, load_idx
from .modelspec import ModelSpec, SpecError
from .presets import get_model_spec
from .spinal import build_equivalent_spinal, shallow_forward
from .train import fit, make_optimizer, seed_streams

DATA_DIR_ENV = "SPINALNET_DATA_DIR"

CSV_HEADER = "seed,epoch,train_loss,eval_metric,best_so_far"

CONFIG_DEFAULTS = {
    "optimizer": {"kind": "adam", "lr": 0.01, "momentum": 0.0},
    "epochs": 200,
    "batch_size": None,  # null = full batch
    "seeds": [0],
    "output": {},
}


class CliError(Exception):
    pass


# ---------------------------------------------------------------------------
# configs and datasets


def resolve_config(raw):
    cfg = dict(CONFIG_DEFAULTS)
    cfg.update(raw)
    cfg["optimizer"] = {**CONFIG_DEFAULTS["optimizer"], **raw.get("optimizer", {})}
    if "model" not in cfg or "dataset" not in cfg:
        raise CliError("config must define 'model' and 'dataset'")
    cfg.setdefault("name", "experiment")
    return cfg


def load_model_spec(model_field):
    if isinstance(model_field, str):
        return get_model_spec(model_field)
    return ModelSpec.from_lines(model_field)


def find_idx_pair(data_dir, stem):
    for suffix in ("", ".gz"):
        path = Path(data_dir) / (stem + suffix)
        if path.exists():
            return str(path)
    raise CliError("dataset file %s(.gz) not found in %s" % (stem, data_dir))


def load_mnist(data_dir, limit_train=None):
    train = load_idx(
        find_idx_pair(data_dir, "train-images-idx3-ubyte"),
        find_idx_pair(data_dir, "train-labels-idx1-ubyte"),
    )
    test = load_idx(
        find_idx_pair(data_dir, "t10k-images-idx3-ubyte"),
        find_idx_pair(data_dir, "t10k-labels-idx1-ubyte"),
    )
    if limit_train:
        train = Dataset(train.inputs[:limit_train], train.targets[:limit_train])
    return train, test


def load_dataset(ds_cfg):
    kind = ds_cfg.get("kind")
    if kind == "regression":
        spec = RegressionSpec(
            target_fn=ds_cfg["target_fn"],
            noise_sigma=ds_cfg.get("noise_sigma", 0.2),
            num_vars=ds_cfg.get("num_vars", 8),
            train_samples=ds_cfg.get("train_samples", 1000),
            test_samples=ds_cfg.get("test_samples", 1000),
            seed=ds_cfg.get("seed", 0),
        )
        return gen_regression(spec)
    if kind == "idx":
        train = load_idx(ds_cfg["train_images"], ds_cfg["train_labels"])
        test = load_idx(ds_cfg["test_images"], ds_cfg["test_labels"])
        limit = ds_cfg.get("limit_train")
        if limit:
            train = Dataset(train.inputs[:limit], train.targets[:limit])
        return train, test
    raise CliError("unknown dataset kind %r" % (kind,))


# ---------------------------------------------------------------------------
# training runs


def csv_rows(records):
    for r in records:
        yield "%d,%d,%r,%r,%r" % (r.seed, r.epoch, r.train_loss, r.eval_metric,
                                  r.best_so_far)


def run_experiment(cfg, verbose=False):
    """Train per seed; return (csv_text, summary_dict)."""
    model_spec = load_model_spec(cfg["model"])
    train_set, test_set = load_dataset(cfg["dataset"])
    classification = train_set.is_classification

    epochs = cfg["epochs"]
    if classification:
        checkpoints = [epochs] if epochs else []
    else:
        checkpoints = [e for e in (100, 200) if e <= epochs] or ([epochs] if epochs else [])

    lines = [CSV_HEADER]
    per_seed = {}
    for seed in cfg["seeds"]:
        start = time.perf_counter()
        model = model_spec.build(rng=seed_streams(seed)["init"])
        opt = make_optimizer(
            cfg["optimizer"]["kind"], model.parameters(), cfg["optimizer"]["lr"],
            momentum=cfg["optimizer"].get("momentum", 0.0),
        )
        log = (lambda rec: print("  seed %d epoch %d: train %.5f eval %.5f"
                                 % (rec.seed, rec.epoch, rec.train_loss, rec.eval_metric),
                                 file=sys.stderr)) if verbose else None
        records = fit(model, train_set, test_set, opt, epochs, seed,
                      batch_size=cfg["batch_size"], log=log)
        lines.extend(csv_rows(records))
        per_seed[str(seed)] = {
            "best_at": {str(e): records[e - 1].best_so_far for e in checkpoints},
            "final_metric": records[-1].eval_metric if records else None,
            "final_best": records[-1].best_so_far if records else None,
            "wall_time_s": time.perf_counter() - start,
        }

    aggregate = {}
    for e in checkpoints:
        vals = [s["best_at"][str(e)] for s in per_seed.values()]
        aggregate[str(e)] = {
            "mean": float(np.mean(vals)), "min": float(np.min(vals)),
            "max": float(np.max(vals)),
        }
    summary = {
        "config": {**cfg, "model": load_model_spec(cfg["model"]).to_lines()},
        "metric": "accuracy" if classification else "mse",
        "per_seed": per_seed,
        "best_so_far_at_checkpoint": aggregate,
    }
    return "\n".join(lines) + "\n", summary


# ---------------------------------------------------------------------------
# subcommands


def cmd_cost(args):
    if os.path.exists(args.config):
        with open(args.config) as fh:
            raw = json.load(fh)
        spec = load_model_spec(raw["model"] if isinstance(raw, dict) else raw)
    else:
        spec = load_model_spec(args.config)  # preset name
    report = costing.cost_report(spec)
    text = report.to_json()
    if args.output:
        Path(args.output).write_text(text + "\n")
    print(text)
    return 0


def cmd_train(args):
    with open(args.config) as fh:
        cfg = resolve_config(json.load(fh))
    csv_text, summary = run_experiment(cfg, verbose=args.verbose)
    out = cfg.get("output", {})
    csv_path = args.csv or out.get("csv")
    summary_path = args.summary or out.get("summary")
    if csv_path:
        Path(csv_path).write_text(csv_text)
    else:
        sys.stdout.write(csv_text)
    summary_text = json.dumps(summary, indent=2)
    if summary_path:
        Path(summary_path).write_text(summary_text + "\n")
    else:
        print(summary_text)
    return 0


def cmd_equivalence(args):
    if args.hidden % args.block_width:
        print("error: hidden width %d not divisible by block width %d"
              % (args.hidden, args.block_width), file=sys.stderr)
        return 2
    rng = np.random.default_rng(args.seed)
    worst = 0.0
    for _ in range(args.trials):
        W = rng.standard_normal((args.hidden, args.input))
        b = rng.standard_normal(args.hidden)
        V = rng.standard_normal((args.outputs, args.hidden))
        c = rng.standard_normal(args.outputs)
        layer = build_equivalent_spinal(W, b, args.act, V, c,
                                        block_width=args.block_width)
        x = rng.standard_normal((args.inputs_per_trial, args.input))
        got = layer.forward(T.Tensor(x)).data
        want = shallow_forward(W, b, args.act, V, c, x)
        worst = max(worst, float(np.abs(got - want).max()))
    ok = worst < args.tolerance
    print("equivalence: hidden=%d input=%d act=%s trials=%d "
          "max|spinal - shallow| = %.3e (%s)"
          % (args.hidden, args.input, args.act, args.trials, worst,
             "PASS" if ok else "FAIL"))
    return 0 if ok else 1


def _check_counts(spec_name, expected):
    spec = get_model_spec(spec_name)
    report = costing.cost_report(spec)
    got = {
        "params": report.total_params,
        "mults": report.total_mults,
        "activations": report.fc_activations,
        "fc_mults": report.fc_mults,
        "fc_activations": report.fc_activations,
    }
    failures = []
    for key, want in expected.items():
        if got[key] != want:
            failures.append("%s %s: expected %d, got %d" % (spec_name, key, want, got[key]))
    return got, failures


def cmd_reproduce(args):
    if args.table == "t1":
        return _reproduce_t1(args)
    if args.table == "t2-mnist":
        return _reproduce_t2(args)
    print("error: unknown table %r (choose t1 or t2-mnist)" % (args.table,),
          file=sys.stderr)
    return 2


def _reproduce_t1(args):
    failures = []
    for name, expected in reference.T1_COUNTS.items():
        got, fails = _check_counts(name, expected)
        failures += fails
        print("%-12s params %6d  mults %6d  hidden activations %4d"
              % (name, got["params"], got["mults"], got["activations"]))
    red = 1 - reference.T1_COUNTS["t1-spinal"]["mults"] / reference.T1_COUNTS["t1-baseline"]["mults"]
    print("multiplication reduction: %.2f%% (reference %.2f%%)"
          % (red * 100, reference.T1_MULT_REDUCTION * 100))
    if failures:
        for f in failures:
            print("COUNT MISMATCH:", f, file=sys.stderr)
        return 1
    if args.counts_only:
        return 0

    seeds = list(range(args.seeds))
    targets = ["sum", "sin_sum", "prod", "sin_prod"]
    print("\ntraining %d seeds x 2 models x 4 targets, %d epochs (adam lr %.3g)"
          % (len(seeds), args.epochs, args.lr))
    rows = []
    for model_name in ("t1-baseline", "t1-spinal"):
        for target in targets:
            cfg = resolve_config({
                "name": "%s-%s" % (model_name, target),
                "model": model_name,
                "dataset": {"kind": "regression", "target_fn": target,
                            "noise_sigma": args.noise_sigma,
                            "train_samples": args.train_samples,
                            "test_samples": args.test_samples, "seed": 0},
                "optimizer": {"kind": "adam", "lr": args.lr},
                "epochs": args.epochs,
                "seeds": seeds,
            })
            _, summary = run_experiment(cfg)
            agg = summary["best_so_far_at_checkpoint"]
            ref = reference.T1_MSE_1E3[model_name][target]
            rows.append((model_name, target, agg, ref))
            ck = sorted(agg, key=int)
            measured = " / ".join("%.3f" % (agg[e]["mean"] * 1e3) for e in ck)
            print("%-12s %-9s best MSE x1e3 @ %s epochs: %s  (reference: %s)"
                  % (model_name, target, "/".join(ck), measured,
                     " / ".join("%.3f" % v for v in ref)))
    print("\nreference MSEs are single runs at an unstated noise level; "
          "measured values are %d-seed means at noise sigma %g."
          % (len(seeds), args.noise_sigma))
    return 0


def _reproduce_t2(args):
    failures = []
    for name, expected in reference.T2_COUNTS.items():
        got, fails = _check_counts(name, expected)
        failures += fails
        print("%-12s params %6d  fc mults %6d  fc activations %3d"
              % (name, got["params"], got["fc_mults"], got["fc_activations"]))
    print("FC multiplication reduction (cnn -> spinal8): %.1f%% (reference %.1f%%)"
          % (reference.T2_FC_MULT_REDUCTION * 100, 48.6))
    print("FC activation reduction: %.0f%%" % (reference.T2_FC_ACT_REDUCTION * 100))
    if failures:
        for f in failures:
            print("COUNT MISMATCH:", f, file=sys.stderr)
        return 1
    if args.counts_only:
        return 0

    data_dir = args.data_dir or os.environ.get(DATA_DIR_ENV)
    if not data_dir:
        print("error: MNIST training needs --data-dir or $%s "
              "(use --counts-only for the structural check)" % DATA_DIR_ENV,
              file=sys.stderr)
        return 2
    train_set, test_set = load_mnist(data_dir, limit_train=args.limit_train)
    print("\nMNIST: %d train / %d test samples, %d epochs, batch %d"
          % (len(train_set), len(test_set), args.epochs, args.batch_size))
    for name in ("t2-cnn", "t2-spinal8", "t2-spinal10"):
        accs = []
        for seed in range(args.seeds):
            model = get_model_spec(name).build(rng=seed_streams(seed)["init"])
            opt = make_optimizer("adam", model.parameters(), args.lr)
            records = fit(model, train_set, test_set, opt, args.epochs, seed,
                          batch_size=args.batch_size)
            accs.append(records[-1].best_so_far)
        print("%-12s best accuracy %s  (reference %.2f%%)"
              % (name, " / ".join("%.2f%%" % (a * 100) for a in accs),
                 reference.T2_ACCURACY[name] * 100))
    return 0


def cmd_bench_kernels(args):
    from .benchmarks import bench_kernels

    return bench_kernels(args.batch, args.repeats)


# ---------------------------------------------------------------------------


def build_parser():
    parser = argparse.ArgumentParser(
        prog="spinalnet",
        description="Gradual-input layer benchmarks: cost accounting, "
                    "training runs, and the single-hidden-layer equivalence check.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("cost", help="emit a JSON cost report for a model")
    p.add_argument("config", help="experiment config JSON, model-lines JSON, or preset name")
    p.add_argument("--output", help="also write the report to this file")
    p.set_defaults(func=cmd_cost)

    p = sub.add_parser("train", help="run a training experiment from a config file")
    p.add_argument("config")
    p.add_argument("--csv", help="CSV output path (default: config output.csv or stdout)")
    p.add_argument("--summary", help="summary JSON path (default: config output.summary or stdout)")
    p.add_argument("--verbose", action="store_true")
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("equivalence",
                       help="check the constructive single-hidden-layer equivalence")
    p.add_argument("--hidden", type=int, required=True)
    p.add_argument("--input", type=int, required=True)
    p.add_argument("--act", choices=["relu", "tanh"], default="tanh")
    p.add_argument("--trials", type=int, default=100)
    p.add_argument("--outputs", type=int, default=3)
    p.add_argument("--block-width", type=int, default=2)
    p.add_argument("--inputs-per-trial", type=int, default=100)
    p.add_argument("--tolerance", type=float, default=1e-9)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_equivalence)

    p = sub.add_parser("reproduce", help="rerun a published benchmark recipe")
    p.add_argument("table", help="t1 (regression) or t2-mnist")
    p.add_argument("--counts-only", action="store_true",
                   help="assert structural counts and stop")
    p.add_argument("--seeds", type=int, default=3)
    p.add_argument("--epochs", type=int, default=None)
    p.add_argument("--lr", type=float, default=0.01)
    p.add_argument("--noise-sigma", type=float, default=0.2)
    p.add_argument("--train-samples", type=int, default=1000)
    p.add_argument("--test-samples", type=int, default=1000)
    p.add_argument("--data-dir", help="directory with MNIST IDX files (or $%s)" % DATA_DIR_ENV)
    p.add_argument("--limit-train", type=int, default=None,
                   help="train on only the first N MNIST samples")
    p.add_argument("--batch-size", type=int, default=64)
    p.set_defaults(func=cmd_reproduce)

    p = sub.add_parser("bench-kernels",
                       help="compare compiled vs numpy conv/pool kernels")
    p.add_argument("--batch", type=int, default=64)
    p.add_argument("--repeats", type=int, default=5)
    p.set_defaults(func=cmd_bench_kernels)

    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    if getattr(args, "command", None) == "reproduce" and args.epochs is None:
        args.epochs = 200 if args.table == "t1" else 8
    try:
        return args.func(args)
    except (CliError, SpecError, FileNotFoundError) as exc:
        print("error: %s" % exc, file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
