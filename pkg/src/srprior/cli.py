"""Command-line interface: ``srprior {synth,train,infer,eval,blur-sweep,verify}``.

Exit status is 0 on success, 1 on runtime or verification failure and 2 on
usage or configuration errors.
"""

import argparse
import csv
import logging
import math
import sys
from pathlib import Path

import numpy as np

from . import imaging, metrics, network, training, verify
from .config import load_config_file, resolve_config
from .exceptions import ConfigurationError, SRPriorError, TrainingDivergedError
from .priors import sharpness

logger = logging.getLogger("srprior")

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2


class UsageError(Exception):
    pass


def _write_resolved(out_dir, cfg_text):
    Path(out_dir).mkdir(parents=True, exist_ok=True)
    (Path(out_dir) / "config.txt").write_text(cfg_text, encoding="utf-8")


def _list_images(directory):
    return sorted(Path(directory).glob("*.pgm"))


def cmd_synth(args, cfg):
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    for i in range(args.count):
        img = imaging.synth_phantom(cfg.seed + i, args.size)
        imaging.write_pgm(out / f"phantom_{i:04d}.pgm", img, maxval=args.maxval)
    _write_resolved(out, cfg.to_text() + f"count = {args.count}\nsize = {args.size}\n")
    if not args.quiet:
        print(f"wrote {args.count} phantom(s) to {out}")
    return EXIT_OK


def _load_pairs(directory, cfg):
    paths = _list_images(directory)
    if not paths:
        raise ConfigurationError(f"no .pgm images found in {directory}")
    images = [imaging.read_pgm(p) for p in paths]
    return imaging.make_training_pairs(images, cfg.degradation(), cfg.patch, cfg.stride)


def cmd_train(args, cfg):
    if not cfg.data_dir or not cfg.out_dir:
        raise UsageError("train needs --data-dir and --out-dir (or config keys)")
    pairs = _load_pairs(cfg.data_dir, cfg)
    if not len(pairs):
        raise ConfigurationError("dataset produced no training patches")
    if cfg.fraction < 1:
        pairs = training.subsample_pairs(pairs, cfg.fraction, cfg.seed)
    val = _load_pairs(cfg.val_dir, cfg) if cfg.val_dir else None
    out = Path(cfg.out_dir)
    _write_resolved(out, cfg.to_text())
    logger.info("training on %d patch pairs", len(pairs))
    params, report = training.train(
        pairs, cfg.layer_spec(), cfg.hyperparams(), priors=cfg.priors, val_pairs=val
    )
    ckpt = out / "checkpoint.bin"
    network.save_params(params, ckpt)
    report.checkpoint_path = str(ckpt)
    report.to_csv(out / "report.csv")
    if not args.quiet:
        print(f"trained {len(report.epochs)} epoch(s) on {len(pairs)} pairs; checkpoint {ckpt}")
    return EXIT_OK


def cmd_infer(args, cfg):
    params = network.load_params(args.checkpoint)
    low = imaging.read_pgm(args.input)
    out = training.infer(low, params, args.scale)
    imaging.write_pgm(args.output, out, maxval=args.maxval)
    _write_resolved(Path(args.output).parent, cfg.to_text())
    print(f"{out.shape[1]}x{out.shape[0]}")
    return EXIT_OK


def _fmt(v):
    return "inf" if v == math.inf else f"{v:.6f}"


def cmd_eval(args, cfg):
    if len(args.images) % 2:
        raise UsageError("eval expects pairs of paths: SR GT [SR GT ...]")
    writer = csv.writer(sys.stdout, lineterminator="\n")
    writer.writerow(["sr", "gt", "psnr", "ssim", "error"])
    scores = []
    failed = False
    for sr_path, gt_path in zip(args.images[::2], args.images[1::2]):
        try:
            sr, gt = imaging.read_pgm(sr_path), imaging.read_pgm(gt_path)
            p, s = metrics.psnr(sr, gt), metrics.ssim(sr, gt)
        except (SRPriorError, OSError) as exc:
            failed = True
            writer.writerow([sr_path, gt_path, "", "", str(exc)])
            continue
        scores.append((p, s))
        writer.writerow([sr_path, gt_path, _fmt(p), _fmt(s), ""])
    if scores:
        mean_p = float(np.mean([p for p, _ in scores]))
        mean_s = float(np.mean([s for _, s in scores]))
        writer.writerow(["mean", "", _fmt(mean_p), _fmt(mean_s), ""])
    return EXIT_FAIL if failed else EXIT_OK


def _parse_sigmas(text):
    try:
        values = [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise UsageError(f"bad sigma list {text!r}") from None
    if not values or min(values) <= 0:
        raise UsageError("sigmas must be positive")
    return values


def svg_line_plot(xs, ys, xlabel, ylabel, width=480, height=320):
    """Minimal standalone SVG line chart."""
    left, right, top, bottom = 70, 20, 20, 50
    x0, x1 = min(xs), max(xs)
    y0, y1 = min(ys), max(ys)
    x1 = x1 if x1 > x0 else x0 + 1
    y1 = y1 if y1 > y0 else y0 + 1

    def px(x):
        return left + (x - x0) / (x1 - x0) * (width - left - right)

    def py(y):
        return height - bottom - (y - y0) / (y1 - y0) * (height - top - bottom)

    pts = " ".join(f"{px(x):.1f},{py(y):.1f}" for x, y in zip(xs, ys))
    dots = "".join(f'<circle cx="{px(x):.1f}" cy="{py(y):.1f}" r="3"/>' for x, y in zip(xs, ys))
    return (
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}">'
        f'<rect width="100%" height="100%" fill="white"/>'
        f'<line x1="{left}" y1="{height - bottom}" x2="{width - right}" y2="{height - bottom}" stroke="black"/>'
        f'<line x1="{left}" y1="{top}" x2="{left}" y2="{height - bottom}" stroke="black"/>'
        f'<polyline fill="none" stroke="steelblue" stroke-width="2" points="{pts}"/>'
        f'<g fill="steelblue">{dots}</g>'
        f'<text x="{width / 2}" y="{height - 12}" text-anchor="middle" font-size="13">{xlabel}</text>'
        f'<text x="16" y="{height / 2}" text-anchor="middle" font-size="13" '
        f'transform="rotate(-90 16 {height / 2})">{ylabel}</text>'
        f'<text x="{left - 6}" y="{py(y1) + 4:.1f}" text-anchor="end" font-size="11">{y1:.3g}</text>'
        f'<text x="{left - 6}" y="{py(y0) + 4:.1f}" text-anchor="end" font-size="11">{y0:.3g}</text>'
        f'<text x="{px(x0):.1f}" y="{height - bottom + 16}" text-anchor="middle" font-size="11">{x0:.3g}</text>'
        f'<text x="{px(x1):.1f}" y="{height - bottom + 16}" text-anchor="middle" font-size="11">{x1:.3g}</text>'
        "</svg>\n"
    )


def cmd_blur_sweep(args, cfg):
    sigmas = _parse_sigmas(args.sigmas)
    if args.image:
        img = imaging.read_pgm(args.image)
    else:
        img = imaging.synth_phantom(cfg.seed, 128)
    values = [sharpness(imaging.gaussian_blur(img, s)) for s in sigmas]
    writer = csv.writer(sys.stdout, lineterminator="\n")
    writer.writerow(["sigma", "variance_of_laplacian"])
    for s, v in zip(sigmas, values):
        writer.writerow([repr(s), repr(v)])
    if args.svg:
        Path(args.svg).write_text(
            svg_line_plot(sigmas, values, "blur sigma", "variance of Laplacian"), encoding="utf-8"
        )
        _write_resolved(Path(args.svg).parent, cfg.to_text())
    return EXIT_OK


def cmd_verify(args, cfg):
    checks = verify.run_suites(args.suite, seed=cfg.seed)
    for c in checks:
        print(c.row())
    failed = [c for c in checks if not c.passed]
    if failed:
        for c in failed:
            print(f"violated: {c.suite}/{c.name} worst residual {c.worst:.3e} >= {c.tolerance:.0e}")
        return EXIT_FAIL
    print(f"all {len(checks)} checks passed")
    return EXIT_OK


_TRAIN_FLAGS = [
    ("--alpha", float), ("--beta", float), ("--delta", float), ("--eta", float),
    ("--batch-size", int), ("--epochs", int), ("--eta-last-layer-ratio", float),
    ("--init-std", float), ("--sharpness-ceiling", str), ("--blur-sigma", float),
    ("--scale", int), ("--patch", int), ("--stride", int), ("--fraction", float),
    ("--profile", str), ("--data-dir", str), ("--val-dir", str), ("--out-dir", str),
]


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", default=argparse.SUPPRESS, help="key = value config file")
    common.add_argument("--seed", type=int, default=argparse.SUPPRESS)
    common.add_argument("--quiet", action="store_true", default=argparse.SUPPRESS)

    parser = argparse.ArgumentParser(prog="srprior", parents=[common], description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("synth", parents=[common], help="write synthetic phantom PGMs")
    p.add_argument("--count", type=int, default=10)
    p.add_argument("--size", type=int, default=128)
    p.add_argument("--out-dir", required=True)
    p.add_argument("--maxval", type=int, choices=(255, 65535), default=65535)
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("train", parents=[common], help="train on a directory of PGM images")
    for flag, kind in _TRAIN_FLAGS:
        p.add_argument(flag, type=kind, default=None)
    p.add_argument("--no-priors", dest="priors", action="store_const", const=False, default=None,
                   help="train on the plain MSE objective")
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("infer", parents=[common], help="super-resolve a PGM image")
    p.add_argument("--checkpoint", required=True)
    p.add_argument("--input", required=True)
    p.add_argument("--scale", type=int, default=2)
    p.add_argument("--output", required=True)
    p.add_argument("--maxval", type=int, choices=(255, 65535), default=65535)
    p.set_defaults(func=cmd_infer)

    p = sub.add_parser("eval", parents=[common], help="PSNR/SSIM of SR GT path pairs")
    p.add_argument("images", nargs="+", metavar="PATH")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("blur-sweep", parents=[common], help="variance of Laplacian vs blur sigma")
    p.add_argument("--image", help="PGM image (default: synthetic phantom from --seed)")
    p.add_argument("--sigmas", default="0.5,1.0,1.5,2.0,2.5")
    p.add_argument("--svg", help="also write a line plot")
    p.set_defaults(func=cmd_blur_sweep)

    p = sub.add_parser("verify", parents=[common], help="run oracle and gradient-check suites")
    p.add_argument("suite", choices=("gradients", "svd", "priors", "all"))
    p.set_defaults(func=cmd_verify)
    return parser


def _overrides(args):
    out = {"seed": getattr(args, "seed", None)}
    for flag, _ in _TRAIN_FLAGS:
        key = flag[2:].replace("-", "_")
        out[key] = getattr(args, key, None)
    out["priors"] = getattr(args, "priors", None)
    return out


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    args.quiet = getattr(args, "quiet", False)
    logging.basicConfig(
        level=logging.WARNING if args.quiet else logging.INFO,
        format="%(levelname)s %(name)s: %(message)s",
    )
    try:
        file_values = load_config_file(args.config) if getattr(args, "config", None) else {}
        cfg = resolve_config(file_values, _overrides(args))
        return args.func(args, cfg)
    except UsageError as exc:
        parser.print_usage(sys.stderr)
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except ConfigurationError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except TrainingDivergedError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_FAIL
    except (SRPriorError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())
