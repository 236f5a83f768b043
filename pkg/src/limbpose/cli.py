"""Command-line interface: prepare, train, evaluate, infer, synth, serve."""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .data import FrameSpec
from .pipeline import (
    PipelineError,
    cmd_evaluate,
    cmd_infer,
    cmd_prepare,
    cmd_train,
    load_config,
)


def _add_config_arg(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", required=True, type=Path, help="pipeline YAML file")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="limbpose",
        description="Limb-pose estimation from depth-video clips: data "
        "preparation, two-stage training, evaluation, and annotation serving.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("prepare", help="split the dataset and materialize clips/targets")
    _add_config_arg(p)

    p = sub.add_parser("train", help="train one network stage")
    _add_config_arg(p)
    p.add_argument("--stage", choices=["detect", "regress"], required=True)
    p.add_argument("--progress", action="store_true", help="print per-epoch lines")

    p = sub.add_parser("evaluate", help="run the test split and write reports")
    _add_config_arg(p)
    p.add_argument(
        "--variant",
        choices=["full", "detection-only", "regression-only"],
        default="full",
    )
    p.add_argument("--report", choices=["table4"], default=None, help="extra report layout")
    p.add_argument(
        "--baseline",
        type=Path,
        default=None,
        help="summary JSON of an earlier run for a paired t-test on pooled RMSD",
    )
    p.add_argument(
        "--mask-limb",
        default=None,
        help="zero this limb's channels before linking (sensitivity check)",
    )

    p = sub.add_parser("infer", help="estimate poses for one video, write JSON")
    _add_config_arg(p)
    p.add_argument("--video", required=True)
    p.add_argument("--out", required=True, type=Path)
    p.add_argument(
        "--variant",
        choices=["full", "detection-only", "regression-only"],
        default="full",
    )

    p = sub.add_parser("synth", help="generate a synthetic puppet dataset")
    p.add_argument("--out", required=True, type=Path)
    p.add_argument("--videos", type=int, default=2)
    p.add_argument("--frames", type=int, default=40, help="annotated frames per video")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--noise", type=float, default=6.0)
    p.add_argument(
        "--challenge",
        choices=["self-occlusion", "external-occlusion", "noise-burst"],
        default=None,
        help="also emit one sequence with this difficulty injected",
    )

    p = sub.add_parser("serve", help="run the annotation HTTP service")
    p.add_argument("--manifest", required=True, type=Path)
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8008)
    p.add_argument("--cadence", type=int, default=5)

    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return _dispatch(args)
    except (PipelineError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


def _dispatch(args: argparse.Namespace) -> int:
    if args.command == "prepare":
        cfg = load_config(args.config)
        index = cmd_prepare(cfg)
        counts = {k: len(v) for k, v in index["clips"].items()}
        print(f"prepared clips: {counts}")
        if index["rejected"]:
            for vid, reason in index["rejected"].items():
                print(f"rejected {vid}: {reason}")
        return 0

    if args.command == "train":
        cfg = load_config(args.config)
        ckpt = cmd_train(cfg, args.stage, progress=args.progress)
        print(f"checkpoint written: {ckpt}")
        return 0

    if args.command == "evaluate":
        cfg = load_config(args.config)
        outcome = cmd_evaluate(
            cfg,
            variant=args.variant,
            baseline_rmsd=args.baseline,
            table4=args.report == "table4",
            limb_mask=args.mask_limb,
        )
        print(f"reports written: {outcome.rmsd_report.parent}")
        print(f"seconds per image: {outcome.seconds_per_image:.4f}")
        return 0

    if args.command == "infer":
        cfg = load_config(args.config)
        out = cmd_infer(cfg, args.video, args.out, variant=args.variant)
        print(f"poses written: {out}")
        return 0

    if args.command == "synth":
        from .synth import PuppetConfig, challenge_variants, generate_sequence, write_dataset

        spec = FrameSpec()
        sequences = []
        for i in range(args.videos):
            cfg = PuppetConfig(
                spec=spec, n_frames=args.frames, noise_amp=args.noise, seed=args.seed + i
            )
            sequences.append(generate_sequence(cfg, video_id=f"synth{i:02d}"))
        if args.challenge:
            cfg = PuppetConfig(
                spec=spec,
                n_frames=args.frames,
                noise_amp=args.noise,
                seed=args.seed + args.videos,
            )
            sequences.append(
                challenge_variants(cfg, args.challenge, video_id=f"challenge-{args.challenge}")
            )
        manifest = write_dataset(args.out, sequences, spec)
        print(f"dataset written: {manifest}")
        return 0

    if args.command == "serve":
        from .service import serve

        serve(args.manifest, host=args.host, port=args.port, cadence=args.cadence)
        return 0

    raise AssertionError(f"unhandled command {args.command!r}")


if __name__ == "__main__":
    sys.exit(main())
