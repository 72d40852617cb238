"""Command-line entry point: ``speckle-nlos {generate,train,eval,stats,render}``.

Exit status is 0 on success. Failures print a single line
``error: <kind>: <message>`` to stderr and exit 1 (2 for usage errors).
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
import time
from collections import Counter
from pathlib import Path

import numpy as np

from . import __version__, imageio
from .classifier import TrainConfig, evaluate, init_params, load_params, save_params, train
from .config import load_config, override
from .dataset import (
    Dataset,
    generate_dataset,
    load_idx,
    read_dataset,
    split_train_test,
    write_dataset,
)
from .errors import SpeckleError
from .optics import GridSpec, IntensityImage, ks_exponential, speckle_statistics
from .scenario import ScenarioKind

log = logging.getLogger("speckle_nlos")


class CLIError(Exception):
    pass


def _global_flags(suppress):
    # sub-command copies use SUPPRESS so they do not reset values given before the command
    kw = {"default": argparse.SUPPRESS} if suppress else {}
    p = argparse.ArgumentParser(add_help=False)
    p.add_argument("--config", type=Path, help="INI run configuration", **kw)
    p.add_argument("--seed", type=int, help="master seed (overrides every seed in the config)", **kw)
    p.add_argument("--out", type=Path, help="output path", **kw)
    p.add_argument("-v", "--verbose", action="count", **({"default": argparse.SUPPRESS} if suppress else {"default": 0}))
    return p


def _build_parser():
    common = _global_flags(suppress=True)
    parser = argparse.ArgumentParser(
        prog="speckle-nlos", parents=[_global_flags(suppress=False)], description=__doc__.splitlines()[0]
    )
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    g = sub.add_parser("generate", parents=[common], help="simulate a speckle dataset (SPKL1)")
    g.add_argument("--scenario", choices=[k.value for k in ScenarioKind])
    g.add_argument("--count", type=int)
    g.add_argument("--workers", type=int)
    g.add_argument("--mnist-images")
    g.add_argument("--mnist-labels")

    t = sub.add_parser("train", parents=[common], help="train SimpleNet on a dataset")
    t.add_argument("dataset", type=Path)
    t.add_argument("--epochs", type=int)
    t.add_argument("--batch-size", type=int)
    t.add_argument("--lr", type=float)
    t.add_argument("--log", type=Path, help="JSON-lines training log (default: <out>.log.jsonl)")

    e = sub.add_parser("eval", parents=[common], help="evaluate a checkpoint on a dataset's test split")
    e.add_argument("checkpoint", type=Path)
    e.add_argument("dataset", type=Path)
    e.add_argument("--split-seed", type=int)
    e.add_argument("--all", action="store_true", help="evaluate on every record instead of the test split")

    s = sub.add_parser("stats", parents=[common], help="speckle statistics of a dataset or image")
    s.add_argument("source", type=Path, help="SPKL1 dataset, PGM/PNG image or .npy array")
    s.add_argument("--record", type=int, help="restrict to one record of a dataset")
    s.add_argument("--csv", type=Path, help="write the I/mean histogram as CSV")

    r = sub.add_parser("render", parents=[common], help="write an 8-bit grayscale image")
    r.add_argument("source", type=Path, help="SPKL1 dataset or .npy array")
    r.add_argument("--record", type=int, default=None)
    return parser


def _run_config(args):
    cfg = load_config(args.config)
    grid, scenario, preprocess, train_, data = {}, {}, {}, {}, {}
    if getattr(args, "scenario", None):
        scenario["kind"] = args.scenario
    if getattr(args, "count", None) is not None:
        data["count"] = args.count
    if getattr(args, "workers", None) is not None:
        data["workers"] = args.workers
    if getattr(args, "mnist_images", None):
        data["mnist_images"] = args.mnist_images
    if getattr(args, "mnist_labels", None):
        data["mnist_labels"] = args.mnist_labels
    if getattr(args, "epochs", None) is not None:
        train_["epochs"] = args.epochs
    if getattr(args, "batch_size", None) is not None:
        train_["batch_size"] = args.batch_size
    if getattr(args, "lr", None) is not None:
        train_["learning_rate"] = args.lr
    if getattr(args, "split_seed", None) is not None:
        train_["split_seed"] = args.split_seed
    if args.seed is not None:
        data["seed_stream"] = args.seed
        for k in ("init_seed", "shuffle_seed"):
            train_[k] = args.seed
        train_.setdefault("split_seed", args.seed)
    return override(cfg, grid=grid, scenario=scenario, preprocess=preprocess, train=train_, data=data)


def cmd_generate(args):
    cfg = _run_config(args)
    out = args.out or Path("speckles.spkl")
    start = time.perf_counter()
    images = load_idx(cfg.data.mnist_images, cfg.data.mnist_labels, limit=cfg.data.count)
    if len(images) < cfg.data.count:
        raise CLIError(f"requested {cfg.data.count} digits but the IDX files hold {len(images)}")

    def progress(done):
        if done % 100 == 0:
            log.info("generated %d/%d", done, len(images))

    records = generate_dataset(
        cfg.scenario, images, cfg.data.seed_stream, cfg.preprocess, workers=cfg.data.workers, progress=progress
    )
    write_dataset(out, Dataset(records, cfg.scenario, cfg.preprocess, cfg.data.seed_stream))
    counts = Counter(r.label for r in records)
    print(f"records: {len(records)}")
    print("per-class: " + " ".join(f"{k}:{counts.get(k, 0)}" for k in range(10)))
    print(f"elapsed: {time.perf_counter() - start:.1f} s")
    print(f"wrote: {out}")
    return 0


def _split_arrays(ds, cfg):
    split = split_train_test(len(ds), cfg.split.split_ratio, cfg.split.split_seed)
    x, y = ds.images, ds.labels
    return split, (x[split.train], y[split.train]), (x[split.test], y[split.test])


def cmd_train(args):
    cfg = _run_config(args)
    ds = read_dataset(args.dataset)
    out = args.out or Path("simplenet.snet")
    log_path = args.log or out.with_name(out.name + ".log.jsonl")
    _, (xtr, ytr), (xte, yte) = _split_arrays(ds, cfg)
    params = init_params(xtr.shape[-1], cfg.train.init_seed)

    with open(log_path, "w", encoding="utf-8") as logf:

        def on_epoch(entry):
            logf.write(json.dumps(entry, sort_keys=True) + "\n")
            logf.flush()
            log.info("epoch %(epoch)d loss %(loss).4f train %(train_acc).3f test %(test_acc).3f", entry)

        params, history = train(params, xtr, ytr, cfg.train, xte, yte, on_epoch=on_epoch)
    save_params(params, out)
    final = history[-1] if history else {}
    print(f"train records: {len(ytr)}  test records: {len(yte)}")
    if history:
        print(f"final loss: {final['loss']:.4f}")
        print(f"test accuracy: {final.get('test_acc', float('nan')):.4f}")
    print(f"wrote: {out}")
    return 0


def cmd_eval(args):
    cfg = _run_config(args)
    params = load_params(args.checkpoint)
    ds = read_dataset(args.dataset)
    if args.all:
        x, y = ds.images, ds.labels
    else:
        _, _, (x, y) = _split_arrays(ds, cfg)
    report = evaluate(params, x, y)
    out = args.out or Path("report.json")
    with open(out, "w", encoding="utf-8") as f:
        json.dump(report.to_dict(), f, sort_keys=True, indent=1)
        f.write("\n")
    print(f"accuracy: {report.accuracy:.4f} ({np.trace(report.confusion)}/{report.total})")
    print("confusion (rows = true, cols = predicted):")
    for k, row in enumerate(report.confusion):
        print(f"  {k}: " + " ".join(f"{v:4d}" for v in row))
    print(f"wrote: {out}")
    return 0


def _load_images(source, record):
    if source.suffix in (".spkl", "") or imageio.is_dataset(source):
        ds = read_dataset(source)
        if record is not None:
            if not 0 <= record < len(ds):
                raise CLIError(f"record {record} out of range (dataset has {len(ds)})")
            return [ds.records[record].image]
        return [r.image for r in ds.records]
    arr = imageio.read_array(source)
    return [IntensityImage(GridSpec(*arr.shape, 1.0, 1.0), arr)]


def cmd_stats(args):
    images = _load_images(args.source, args.record)
    if not images:
        raise CLIError("no images to analyse")
    stats = [speckle_statistics(im) for im in images]
    contrasts = np.array([s.contrast for s in stats])
    print(f"images: {len(images)}")
    print(f"mean intensity: {np.mean([s.mean_intensity for s in stats]):.6g}")
    print(f"std intensity: {np.mean([s.std_intensity for s in stats]):.6g}")
    print(f"contrast: {np.nanmean(contrasts) if np.any(np.isfinite(contrasts)) else float('nan'):.4f}")
    if len(images) > 1:
        print(f"contrast range: {np.nanmin(contrasts):.4f} .. {np.nanmax(contrasts):.4f}")
    if all(s.mean_intensity > 0 for s in stats):
        print(f"KS vs exp(-x): {np.mean([ks_exponential(im) for im in images]):.4f}")
    if args.csv:
        hist = np.sum([s.histogram for s in stats], axis=0)
        ref = stats[0]
        total = hist.sum()
        widths = np.diff(ref.bin_edges)
        with open(args.csv, "w", encoding="utf-8") as f:
            f.write("bin_center,count,density\n")
            for c, n, w in zip(ref.bin_centers, hist, widths):
                dens = n / (total * w) if total else 0.0
                f.write(f"{c:.6g},{int(n)},{dens:.6g}\n")
        print(f"wrote: {args.csv}")
    return 0


def cmd_render(args):
    if args.out is None:
        raise CLIError("render needs --out")
    if args.source.suffix == ".npy":
        arr = imageio.read_array(args.source)
    else:
        ds = read_dataset(args.source)
        idx = 0 if args.record is None else args.record
        if not 0 <= idx < len(ds):
            raise CLIError(f"record {idx} out of range (dataset has {len(ds)})")
        arr = ds.records[idx].image.intensity
    imageio.write_image(args.out, arr)
    print(f"wrote: {args.out}")
    return 0


COMMANDS = {
    "generate": cmd_generate,
    "train": cmd_train,
    "eval": cmd_eval,
    "stats": cmd_stats,
    "render": cmd_render,
}


def main(argv=None):
    parser = _build_parser()
    args = parser.parse_args(argv)
    level = logging.WARNING - 10 * min(args.verbose, 2)
    logging.basicConfig(level=level, format="%(message)s", stream=sys.stderr)
    try:
        return COMMANDS[args.command](args)
    except (SpeckleError, CLIError) as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
    except FileNotFoundError as exc:
        print(f"error: FileNotFoundError: {exc.filename}: {exc.strerror}", file=sys.stderr)
    except OSError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
    return 1


if __name__ == "__main__":
    sys.exit(main())
