"""Command-line entry point wiring all subsystems.

Every subcommand writes a ``config.json`` echo (arguments, seed, version)
next to its artifacts so any run can be reproduced byte for byte.
"""

from __future__ import annotations

import argparse
import csv
import json
import os
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .augment import AugmentConfig
from .baselines import reward_curve
from .bench import BenchConfig, run_gridworld_bench
from .demos import downsample, filter_demos
from .fileio import load_demo_set, read_pgm, save_demo_set, write_pgm
from .gridworld import gridworld_demos, random_gridworld
from .models import GPSRReward, ImageVAE, MIGPSRReward, PTRReward, load_model, save_model
from .navigation import (
    PoseGrid,
    build_reward_volume,
    coarse_pose,
    export_reward_volume_csv,
    fine_tune,
    navigation_summary,
    smooth,
    write_summary,
)
from .phantom_demos import scripted_demo_set
from .ranking import PairSampler, build_distance_table, dump_pairs_csv, spatial_pairs, temporal_pairs
from .volume import PhantomSpec, ProbeSpec, load_volume, save_volume, synth_volume

DEFAULT_OUT_ENV = "PLANESEEK_OUT"


def _out_dir(args, default_name):
    base = getattr(args, "out", None) or os.environ.get(DEFAULT_OUT_ENV, ".")
    path = Path(base)
    if path.suffix:  # a file path: artifacts sit next to it
        path.parent.mkdir(parents=True, exist_ok=True)
        return path.parent
    path = path / default_name if path == Path(".") else path
    path.mkdir(parents=True, exist_ok=True)
    return path


def _echo_config(directory, args):
    payload = {k: v for k, v in sorted(vars(args).items()) if k != "func"}
    payload["toolkit_version"] = __version__
    with open(Path(directory) / "config.json", "w") as fh:
        json.dump(payload, fh, sort_keys=True, indent=1, default=str)


def _probe_from_args(args):
    return ProbeSpec(
        width_mm=args.probe_width,
        depth_mm=args.probe_depth,
        width_px=args.probe_px,
        depth_px=args.probe_px,
    )


def cmd_volume(args):
    if args.kind == "tube":
        spec = PhantomSpec(
            kind="tube",
            p0=tuple(args.p0),
            p1=tuple(args.p1),
            radius=args.radius,
            texture_seed=args.seed,
            base_brightness=args.brightness,
            noise_level=args.noise,
            speckle_density=args.speckle,
            contrast=args.contrast,
        )
    else:
        spec = PhantomSpec(
            kind="blob",
            center=tuple(args.center),
            semi_axes=tuple(args.semi_axes),
            yaw_deg=args.yaw,
            texture_seed=args.seed,
            base_brightness=args.brightness,
            noise_level=args.noise,
            speckle_density=args.speckle,
            contrast=args.contrast,
        )
    volume = synth_volume(spec, dims=tuple(args.dims), pad=args.pad)
    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    save_volume(out, volume)
    _echo_config(out.parent, args)
    print(f"wrote volume {out} dims={volume.dims}")
    return 0


def cmd_gen_demos(args):
    rng = np.random.default_rng(args.seed)
    out = _out_dir(args, "demos")
    if args.env == "grid":
        grid = random_gridworld(args.target, rng)
        demos = gridworld_demos(grid, args.n, rng=rng)
        meta = {"env": "grid", "target_cells": [list(c) for c in grid.target_cells]}
    else:
        volume = load_volume(args.volume)
        probe = _probe_from_args(args)
        demos = scripted_demo_set(volume, probe, n_demos=args.n, seed=args.seed)
        if args.downsample:
            demos = [downsample(d, args.downsample) for d in demos]
        meta = {"env": "phantom", "volume": str(args.volume)}
    save_demo_set(demos, out)
    with open(out / "env.json", "w") as fh:
        json.dump(meta, fh, sort_keys=True, indent=1)
    _echo_config(out, args)
    print(f"wrote {len(demos)} demonstrations to {out}")
    return 0


def cmd_filter(args):
    demos = load_demo_set(args.demos)
    kept, rejected = filter_demos(demos, p_ci=args.pci)
    out = _out_dir(args, "filtered")
    save_demo_set(kept, out)
    report = {
        "kept": [d.source_id for d in kept],
        "rejected": [
            {"source_id": d.source_id, "mahalanobis": d.mahalanobis, "confidence": d.confidence}
            for d in rejected
        ],
        "p_ci": args.pci,
    }
    with open(out / "filter_report.json", "w") as fh:
        json.dump(report, fh, sort_keys=True, indent=1)
    _echo_config(out, args)
    print(f"kept {len(kept)} / {len(demos)} demonstrations (p_ci={args.pci})")
    return 0


def cmd_pairs(args):
    demos = load_demo_set(args.demos)
    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    table = None
    if args.mode == "spatial":
        table = build_distance_table(demos, k_t=args.kt, k_r=1.0 - args.kt)
        pairs = spatial_pairs(demos, table)
    else:
        pairs = [p for i, d in enumerate(demos) for p in temporal_pairs(d, i)]
    dump_pairs_csv(out, pairs, table)
    _echo_config(out.parent, args)
    print(f"wrote {len(pairs)} {args.mode} pairs to {out}")
    return 0


def cmd_train(args):
    demos = load_demo_set(args.demos)
    if args.downsample:
        demos = [downsample(d, args.downsample) for d in demos]
    if args.filter:
        demos, _ = filter_demos(demos, p_ci=args.pci)
    aug = AugmentConfig() if args.augment else None
    common = dict(
        lr=args.lr,
        epochs=args.epochs,
        batch=args.batch,
        pairs_per_epoch=args.pairs_per_epoch,
        augment_config=aug,
        optimizer=args.optimizer,
        seed=args.seed,
    )
    if args.variant == "vae":
        model = ImageVAE(latent=args.latent, lr=args.lr, epochs=args.epochs,
                         batch=args.batch, optimizer=args.optimizer, seed=args.seed)
        model.fit(np.concatenate([d.images() for d in demos]))
    elif args.variant == "ptr":
        model = PTRReward(latent=args.latent, **common)
        model.fit(demos)
    elif args.variant == "gpsr":
        if not args.vae:
            raise ValueError(
                "GPSR training requires a pretrained VAE checkpoint (--vae path/to/vae.ckpt)"
            )
        vae = load_model(args.vae)
        model = GPSRReward(vae=vae, k_re=args.kre, **common)
        model.fit(demos)
    else:
        model = MIGPSRReward(latent=args.latent, k_re=args.kre, **common)
        model.fit(demos)
    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    save_model(model, out, extra={"trained_on": str(args.demos)})
    _echo_config(out.parent, args)
    print(f"wrote {args.variant} checkpoint to {out}")
    return 0


def cmd_infer(args):
    model = load_model(args.model)
    img = read_pgm(args.image)
    reward = model.predict(img)
    print(f"{reward:.6f}")
    return 0


def cmd_curves(args):
    model = load_model(args.model)
    demos = load_demo_set(args.demo) if (Path(args.demo) / "set.json").exists() else None
    if demos is None:
        from .fileio import load_demonstration

        demos = [load_demonstration(args.demo)]
    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    with open(out, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["demo", "frame", "reward", "reference", "pearson_r", "degenerate"])
        for i, demo in enumerate(demos):
            curve = reward_curve(model, demo)
            for f, r, ref in zip(curve["frame"], curve["reward"], curve["reference"]):
                writer.writerow(
                    [i, int(f), repr(float(r)), repr(float(ref)),
                     repr(float(curve["pearson_r"])), int(curve["degenerate"])]
                )
    _echo_config(out.parent, args)
    print(f"wrote reward curves to {out}")
    return 0


def cmd_navigate(args):
    volume = load_volume(args.volume)
    model = load_model(args.model)
    probe = _probe_from_args(args)
    grid = PoseGrid.for_volume(
        volume, x_step=args.xy_step, y_step=args.xy_step, rz_step=args.angle_step, rx_step=args.angle_step
    )
    min_content = args.min_content if args.min_content > 0 else None
    rv = build_reward_volume(model, volume, grid, probe, min_content=min_content)
    smoothed = smooth(rv, window=args.smooth_window)
    coarse, coarse_r = coarse_pose(smoothed)
    fine, fine_r = fine_tune(
        model, volume, coarse, probe,
        span_mm=args.fine_span_mm, span_deg=args.fine_span_deg,
        step_mm=args.fine_step_mm, step_deg=args.fine_step_deg,
        min_content=min_content,
    )
    out = _out_dir(args, "navigation")
    export_reward_volume_csv(rv, out / "reward_volume.csv")
    summary = navigation_summary(coarse, coarse_r, fine, fine_r, spec=volume.spec)
    write_summary(out / "summary.json", summary)
    _echo_config(out, args)
    print(json.dumps(summary, sort_keys=True, indent=1))
    return 0


def cmd_bench(args):
    cfg = BenchConfig(n_repeats=args.repeats, n_starts=args.starts)
    out = _out_dir(args, "bench")
    results = {}
    targets = ["point", "line"] if args.target == "both" else [args.target]
    for kind in targets:
        reports, maps = run_gridworld_bench(kind, seed=args.seed, config=cfg)
        results[kind] = {m: r.to_dict() for m, r in reports.items()}
        for method, reward_map in maps.items():
            path = out / f"map_{kind}_{method}.csv"
            with open(path, "w", newline="") as fh:
                writer = csv.writer(fh)
                for row in reward_map:
                    writer.writerow([repr(float(v)) for v in row])
        for m, r in reports.items():
            print(f"{kind} {m}: {r.successes}/{r.trials} = {r.success_rate * 100:.1f}%")
    with open(out / "report.json", "w") as fh:
        json.dump(results, fh, sort_keys=True, indent=1)
    _echo_config(out, args)
    return 0


def build_parser():
    parser = argparse.ArgumentParser(
        prog="planeseek",
        description="Reward learning from few demonstrations and standard-plane search",
    )
    parser.add_argument("--version", action="version", version=f"planeseek {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("volume", help="synthesize a phantom volume file")
    p.add_argument("--kind", choices=["tube", "blob"], required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--dims", type=int, nargs=3, default=[64, 64, 40])
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--p0", type=float, nargs=3, default=[14, 32, 20])
    p.add_argument("--p1", type=float, nargs=3, default=[50, 32, 20])
    p.add_argument("--radius", type=float, default=5.0)
    p.add_argument("--center", type=float, nargs=3, default=[32, 32, 20])
    p.add_argument("--semi-axes", dest="semi_axes", type=float, nargs=3, default=[14, 7, 5])
    p.add_argument("--yaw", type=float, default=0.0)
    p.add_argument("--brightness", type=float, default=0.55)
    p.add_argument("--noise", type=float, default=0.05)
    p.add_argument("--speckle", type=float, default=0.02)
    p.add_argument("--contrast", type=float, default=0.45)
    p.add_argument("--pad", type=int, default=0)
    p.set_defaults(func=cmd_volume)

    p = sub.add_parser("gen-demos", help="generate demonstrations (grid or phantom)")
    p.add_argument("--env", choices=["grid", "phantom"], required=True)
    p.add_argument("--target", choices=["point", "line"], default="point")
    p.add_argument("--volume")
    p.add_argument("--n", type=int, default=6)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--downsample", type=int, default=100)
    p.add_argument("--probe-width", type=float, default=30.0)
    p.add_argument("--probe-depth", type=float, default=30.0)
    p.add_argument("--probe-px", type=int, default=32)
    p.add_argument("--out")
    p.set_defaults(func=cmd_gen_demos)

    p = sub.add_parser("filter", help="reject abnormal demonstrations")
    p.add_argument("--demos", required=True)
    p.add_argument("--pci", type=float, default=0.95)
    p.add_argument("--out")
    p.set_defaults(func=cmd_filter)

    p = sub.add_parser("pairs", help="dump labeled pairwise comparisons")
    p.add_argument("--demos", required=True)
    p.add_argument("--mode", choices=["temporal", "spatial"], required=True)
    p.add_argument("--kt", type=float, default=0.5)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_pairs)

    p = sub.add_parser("train", help="train a reward model")
    p.add_argument("--variant", choices=["vae", "ptr", "gpsr", "migpsr"], required=True)
    p.add_argument("--demos", required=True)
    p.add_argument("--pairs", choices=["temporal", "spatial"], default=None,
                   help="informational; the variant fixes its pair mode")
    p.add_argument("--vae", help="pretrained VAE checkpoint (required for gpsr)")
    p.add_argument("--epochs", type=int, default=5)
    p.add_argument("--batch", type=int, default=8)
    p.add_argument("--lr", type=float, default=1e-5)
    p.add_argument("--kre", type=float, default=10.0)
    p.add_argument("--latent", type=int, default=32)
    p.add_argument("--pairs-per-epoch", type=int, default=None)
    p.add_argument("--optimizer", choices=["adam", "sgd"], default="adam")
    p.add_argument("--augment", action="store_true")
    p.add_argument("--filter", action="store_true")
    p.add_argument("--pci", type=float, default=0.95)
    p.add_argument("--downsample", type=int, default=0)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("infer", help="reward for one PGM image")
    p.add_argument("--model", required=True)
    p.add_argument("--image", required=True)
    p.set_defaults(func=cmd_infer)

    p = sub.add_parser("curves", help="per-frame reward vs inverse-distance reference")
    p.add_argument("--model", required=True)
    p.add_argument("--demo", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_curves)

    p = sub.add_parser("navigate", help="coarse-to-fine plane search over a volume")
    p.add_argument("--volume", required=True)
    p.add_argument("--model", required=True)
    p.add_argument("--probe-width", type=float, default=30.0)
    p.add_argument("--probe-depth", type=float, default=30.0)
    p.add_argument("--probe-px", type=int, default=32)
    p.add_argument("--xy-step", type=float, default=3.0)
    p.add_argument("--angle-step", type=float, default=5.0)
    p.add_argument("--smooth-window", type=int, default=3)
    p.add_argument("--min-content", type=float, default=0.85,
                   help="drop poses whose slice has less than this in-volume fraction (0 disables)")
    p.add_argument("--fine-span-mm", type=float, default=10.0)
    p.add_argument("--fine-span-deg", type=float, default=10.0)
    p.add_argument("--fine-step-mm", type=float, default=5.0)
    p.add_argument("--fine-step-deg", type=float, default=5.0)
    p.add_argument("--out")
    p.set_defaults(func=cmd_navigate)

    p = sub.add_parser("bench", help="grid-world benchmark (Table-style report)")
    p.add_argument("env", choices=["gridworld"])
    p.add_argument("--target", choices=["point", "line", "both"], default="both")
    p.add_argument("--seed", type=int, default=1234)
    p.add_argument("--repeats", type=int, default=20)
    p.add_argument("--starts", type=int, default=20)
    p.add_argument("--out")
    p.set_defaults(func=cmd_bench)

    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except Exception as err:  # noqa: BLE001 - single CLI boundary
        print(f"planeseek {args.command}: error: {err}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
