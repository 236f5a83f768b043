"""End-to-end orchestration: configuration, data preparation, the two
training stages, and evaluation with report generation.

A single YAML file declares every setting; each step validates its full
configuration before touching disk, and checkpoints embed the configs so
inference and evaluation are reproducible from the artifact alone.
"""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path

import numpy as np
import yaml

from . import clips as clips_mod
from . import nets
from .clips import ClipConfig, window_starts
from .data import (
    AnnotationRecord,
    DatasetSplit,
    FrameSpec,
    SchemaError,
    frame_path,
    load_annotations,
    load_depth_frame,
    load_manifest,
    make_split,
)
from .linker import LinkerConfig, estimate_pose, poses_to_json
from .maps import MapGenConfig, build_target_stack
from .metrics import (
    StatTestConfig,
    aggregate_report,
    dsc,
    paired_ttest,
    recall,
    rmsd,
    write_report_csv,
    write_report_json,
)
from .skeleton import DEFAULT_SKELETON, LIMB_COLORS, Skeleton


class PipelineError(RuntimeError):
    """A pipeline step failed; the message carries per-video diagnostics."""


class DependencyError(PipelineError):
    """A required earlier artifact (prepared data, checkpoint) is missing."""


@dataclass(frozen=True)
class SplitConfig:
    seed: int = 0
    test_fraction: float = 0.25
    validation_fraction: float = 0.20

    def __post_init__(self):
        if not 0 < self.test_fraction < 1 or not 0 <= self.validation_fraction < 1:
            raise ValueError("split fractions must lie in (0, 1)")


@dataclass
class PipelineConfig:
    """Every setting of the pipeline, loadable from one YAML file."""

    manifest: Path = Path("manifest.csv")
    output_dir: Path = Path("runs/default")
    frame: FrameSpec = field(default_factory=FrameSpec)
    clip: ClipConfig = field(default_factory=ClipConfig)
    eval_overlap: int = 0
    maps: MapGenConfig = field(default_factory=MapGenConfig)
    split: SplitConfig = field(default_factory=SplitConfig)
    detection: nets.DetectionNetSpec = field(default_factory=nets.DetectionNetSpec)
    regression: nets.RegressionNetSpec = field(default_factory=nets.RegressionNetSpec)
    train_detection: nets.TrainConfig = field(
        default_factory=lambda: nets.TrainConfig(optimizer="adam", selection="pixel_accuracy")
    )
    train_regression: nets.TrainConfig = field(
        default_factory=lambda: nets.TrainConfig(optimizer="sgd", selection="mae")
    )
    linker: LinkerConfig = field(default_factory=LinkerConfig)
    depth_scale: float = 0.01
    use_gt_affinity: bool = False
    overlays: bool = False
    interpolation: str = "bilinear"

    def __post_init__(self):
        self.manifest = Path(self.manifest)
        self.output_dir = Path(self.output_dir)
        if not 0 <= self.eval_overlap < self.clip.window:
            raise ValueError("eval_overlap must satisfy 0 <= eval_overlap < window")
        if self.depth_scale <= 0:
            raise ValueError("depth_scale must be positive")
        if self.frame.width % self.detection.spatial_divisor or (
            self.frame.height % self.detection.spatial_divisor
        ):
            raise ValueError(
                f"frame {self.frame.width}x{self.frame.height} is not divisible by "
                f"{self.detection.spatial_divisor} as the detection encoder requires"
            )

    @property
    def prepared_dir(self) -> Path:
        return self.output_dir / "prepared"

    @property
    def checkpoints_dir(self) -> Path:
        return self.output_dir / "checkpoints"

    @property
    def eval_clip(self) -> ClipConfig:
        return ClipConfig(self.clip.window, self.eval_overlap, self.clip.cadence)


_SECTION_TYPES = {
    "frame": FrameSpec,
    "clip": ClipConfig,
    "maps": MapGenConfig,
    "split": SplitConfig,
    "detection": nets.DetectionNetSpec,
    "regression": nets.RegressionNetSpec,
    "train_detection": nets.TrainConfig,
    "train_regression": nets.TrainConfig,
    "linker": LinkerConfig,
}


def config_from_dict(raw: dict) -> PipelineConfig:
    """Build a validated PipelineConfig from plain nested dicts."""
    known = {f.name for f in fields(PipelineConfig)}
    unknown = set(raw) - known
    if unknown:
        raise SchemaError(f"unknown config keys: {sorted(unknown)}")
    kwargs = {}
    for key, value in raw.items():
        if key in _SECTION_TYPES:
            if not isinstance(value, dict):
                raise SchemaError(f"config section {key!r} must be a mapping")
            section_type = _SECTION_TYPES[key]
            valid = {f.name for f in fields(section_type)}
            bad = set(value) - valid
            if bad:
                raise SchemaError(f"unknown keys in config section {key!r}: {sorted(bad)}")
            kwargs[key] = section_type(**value)
        else:
            kwargs[key] = value
    return PipelineConfig(**kwargs)


def load_config(path: Path | str) -> PipelineConfig:
    path = Path(path)
    raw = yaml.safe_load(path.read_text(encoding="utf-8")) or {}
    if not isinstance(raw, dict):
        raise SchemaError(f"{path}: config root must be a mapping")
    cfg = config_from_dict(raw)
    if not cfg.manifest.is_absolute():
        cfg.manifest = (path.parent / cfg.manifest).resolve()
    if not cfg.output_dir.is_absolute():
        cfg.output_dir = (path.parent / cfg.output_dir).resolve()
    return cfg


def save_config(cfg: PipelineConfig, path: Path | str) -> None:
    data = asdict(cfg)
    data["manifest"] = str(cfg.manifest)
    data["output_dir"] = str(cfg.output_dir)
    Path(path).parent.mkdir(parents=True, exist_ok=True)
    Path(path).write_text(yaml.safe_dump(data, sort_keys=True), encoding="utf-8")


def _clip_rel(portion: str, video_id: str, start: int) -> str:
    return f"{portion}/{video_id}_{start:05d}"


def cmd_prepare(cfg: PipelineConfig, skeleton: Skeleton = DEFAULT_SKELETON) -> dict:
    """Split the dataset, extract clips, and write inputs/targets to disk.

    Re-running with identical inputs rewrites byte-identical artifacts.
    Returns the clip index structure.
    """
    entries = load_manifest(cfg.manifest)
    if not entries:
        raise PipelineError(f"manifest {cfg.manifest} lists no videos")
    diagnostics: list[str] = []
    all_records: list[AnnotationRecord] = []
    by_video: dict[str, list[AnnotationRecord]] = {}
    frames_dirs: dict[str, Path] = {}
    for entry in entries:
        try:
            records = load_annotations(entry.annotations_csv, cfg.frame, skeleton)
        except (SchemaError, ValueError) as exc:
            diagnostics.append(f"{entry.video_id}: {exc}")
            continue
        missing = [
            rec.frame_index
            for rec in records
            if not frame_path(entry.frames_dir, rec.frame_index).is_file()
        ]
        if missing:
            diagnostics.append(
                f"{entry.video_id}: missing frame files for indices {missing[:5]}"
                + ("..." if len(missing) > 5 else "")
            )
            continue
        all_records.extend(records)
        by_video[entry.video_id] = records
        frames_dirs[entry.video_id] = entry.frames_dir
    if diagnostics:
        raise PipelineError("data preparation failed:\n" + "\n".join(diagnostics))

    split = make_split(
        all_records,
        seed=cfg.split.seed,
        min_frames=cfg.clip.window,
        cadence=cfg.clip.cadence,
        test_fraction=cfg.split.test_fraction,
        validation_fraction=cfg.split.validation_fraction,
    )

    index: dict = {
        "config": {
            "frame": asdict(cfg.frame),
            "clip": asdict(cfg.clip),
            "eval_overlap": cfg.eval_overlap,
            "maps": asdict(cfg.maps),
            "split": asdict(cfg.split),
            "depth_scale": cfg.depth_scale,
            "skeleton": skeleton.describe(),
        },
        "split_frames": {
            "train": split.train,
            "validation": split.validation,
            "test": split.test,
        },
        "rejected": split.rejected,
        "clips": {"train": [], "validation": [], "test": []},
    }

    portions = {
        "train": (split.train, cfg.clip),
        "validation": (split.validation, cfg.eval_clip),
        "test": (split.test, cfg.eval_clip),
    }
    for portion, (frame_map, clip_cfg) in portions.items():
        out_base = cfg.prepared_dir / portion
        out_base.mkdir(parents=True, exist_ok=True)
        for video_id in sorted(frame_map):
            records = [
                rec for rec in by_video[video_id] if rec.frame_index in set(frame_map[video_id])
            ]
            if len(records) < clip_cfg.window:
                continue
            video_clips = clips_mod.build_clips(
                records, frames_dirs[video_id], cfg.frame, clip_cfg, cfg.interpolation
            )
            starts = window_starts(len(records), clip_cfg)
            for start, clip in zip(starts, video_clips):
                rel = _clip_rel(portion, video_id, start)
                affinity = build_target_stack(clip.records, "affinity", cfg.maps, cfg.frame, skeleton)
                confidence = build_target_stack(
                    clip.records, "confidence", cfg.maps, cfg.frame, skeleton
                )
                np.save(cfg.prepared_dir / f"{rel}_depth.npy", clip.frames.astype(np.float32))
                np.save(
                    cfg.prepared_dir / f"{rel}_affinity.npy",
                    affinity.values.astype(np.uint8),
                )
                np.save(
                    cfg.prepared_dir / f"{rel}_confidence.npy",
                    confidence.values.astype(np.float16),
                )
                index["clips"][portion].append(
                    {"video": video_id, "start": start, "frames": clip.frame_indices}
                )

    index_path = cfg.prepared_dir / "clip_index.json"
    index_path.parent.mkdir(parents=True, exist_ok=True)
    index_path.write_text(json.dumps(index, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    return index


def load_clip_index(cfg: PipelineConfig) -> dict:
    index_path = cfg.prepared_dir / "clip_index.json"
    if not index_path.is_file():
        raise DependencyError(f"no prepared data at {index_path}; run prepare first")
    return json.loads(index_path.read_text(encoding="utf-8"))


def _load_portion(cfg: PipelineConfig, index: dict, portion: str, what: str) -> np.ndarray:
    """Stack one artifact kind for every clip of a portion, in index order."""
    arrays = []
    for item in index["clips"][portion]:
        rel = _clip_rel(portion, item["video"], item["start"])
        path = cfg.prepared_dir / f"{rel}_{what}.npy"
        if not path.is_file():
            raise DependencyError(f"prepared file missing: {path}")
        arrays.append(np.load(path))
    if not arrays:
        return np.empty((0,))
    return np.stack(arrays)


def _depth_tensor(cfg: PipelineConfig, raw: np.ndarray):
    """(N, T, H, W) raw depth to a scaled (N, 1, T, H, W) float tensor."""
    import torch

    return torch.from_numpy(raw[:, None] * cfg.depth_scale).float()


def _maps_tensor(raw: np.ndarray):
    """(N, H, W, T, 20) stacks to (N, 20, T, H, W) tensors, preserving dtype size."""
    import torch

    return torch.from_numpy(np.ascontiguousarray(raw.transpose(0, 4, 3, 1, 2)))


def cmd_train(
    cfg: PipelineConfig,
    stage: str,
    skeleton: Skeleton = DEFAULT_SKELETON,
    progress: bool = False,
) -> Path:
    """Train one stage ("detect" or "regress"); writes checkpoint + log.

    The regression stage of the full variant consumes affinity maps
    predicted by the detection checkpoint (ground-truth affinity maps
    instead when ``use_gt_affinity`` is set).
    """
    import torch

    if stage not in ("detect", "regress"):
        raise ValueError(f"unknown training stage {stage!r}")
    index = load_clip_index(cfg)
    if not index["clips"]["train"]:
        raise PipelineError("prepared data contains no training clips")
    if not index["clips"]["validation"]:
        raise PipelineError("prepared data contains no validation clips")

    train_depth = _load_portion(cfg, index, "train", "depth")
    val_depth = _load_portion(cfg, index, "validation", "depth")
    cfg.checkpoints_dir.mkdir(parents=True, exist_ok=True)

    if stage == "detect":
        train_cfg = cfg.train_detection
        torch.manual_seed(train_cfg.seed)
        model = nets.build_detection_net(cfg.detection)
        inputs = _depth_tensor(cfg, train_depth)
        val_inputs = _depth_tensor(cfg, val_depth)
        targets = _maps_tensor(_load_portion(cfg, index, "train", "affinity"))
        val_targets = _maps_tensor(_load_portion(cfg, index, "validation", "affinity"))
        name = "detection"
        net_spec = cfg.detection
    else:
        train_cfg = cfg.train_regression
        torch.manual_seed(train_cfg.seed)
        model = nets.build_regression_net(cfg.regression)
        targets = _maps_tensor(_load_portion(cfg, index, "train", "confidence"))
        val_targets = _maps_tensor(_load_portion(cfg, index, "validation", "confidence"))
        name = "regression"
        net_spec = cfg.regression
        if cfg.regression.in_channels == 1:
            inputs = _depth_tensor(cfg, train_depth)
            val_inputs = _depth_tensor(cfg, val_depth)
        else:
            affinity_train, affinity_val = _affinity_inputs(cfg, index)
            inputs = torch.cat([_depth_tensor(cfg, train_depth), affinity_train], dim=1)
            val_inputs = torch.cat([_depth_tensor(cfg, val_depth), affinity_val], dim=1)

    result = nets.train_model(
        model, inputs, targets, val_inputs, val_targets, train_cfg, progress=progress
    )
    ckpt_path = cfg.checkpoints_dir / f"{name}.pt"
    nets.save_checkpoint(
        ckpt_path,
        model,
        name,
        {
            "net_spec": net_spec,
            "frame_spec": cfg.frame,
            "clip_config": cfg.clip,
            "map_config": cfg.maps,
            "train_config": train_cfg,
            "linker_config": cfg.linker,
            "depth_scale": cfg.depth_scale,
            "skeleton": skeleton.describe(),
            "best_epoch": result.best_epoch,
            "best_metric": result.best_metric,
        },
    )
    nets.write_training_log(result.log, cfg.checkpoints_dir / f"{name}_log.csv")
    return ckpt_path


def _affinity_inputs(cfg: PipelineConfig, index: dict):
    """Affinity channels for regression training: predicted or ground truth."""
    import torch

    if cfg.use_gt_affinity:
        train = _maps_tensor(_load_portion(cfg, index, "train", "affinity")).float()
        val = _maps_tensor(_load_portion(cfg, index, "validation", "affinity")).float()
        return train, val
    det_path = cfg.checkpoints_dir / "detection.pt"
    if not det_path.is_file():
        raise DependencyError(
            f"regression training needs the detection checkpoint at {det_path} "
            f"(or set use_gt_affinity)"
        )
    det_model, _ = nets.load_checkpoint(det_path)
    outputs = []
    for portion in ("train", "validation"):
        depth = _depth_tensor(cfg, _load_portion(cfg, index, portion, "depth"))
        preds = []
        with torch.no_grad():
            for i in range(0, len(depth), cfg.train_detection.batch_size):
                preds.append(det_model(depth[i : i + cfg.train_detection.batch_size]))
        outputs.append(torch.cat(preds) if preds else torch.empty(0))
    return outputs[0], outputs[1]


def _check_checkpoint_compat(cfg: PipelineConfig, payload: dict, path) -> None:
    saved_frame = payload.get("frame_spec", {})
    saved_clip = payload.get("clip_config", {})
    if (
        saved_frame.get("width") != cfg.frame.width
        or saved_frame.get("height") != cfg.frame.height
    ):
        raise PipelineError(
            f"checkpoint {path} was trained at "
            f"{saved_frame.get('width')}x{saved_frame.get('height')}, "
            f"but the config wants {cfg.frame.width}x{cfg.frame.height}"
        )
    if saved_clip.get("window") != cfg.clip.window:
        raise PipelineError(
            f"checkpoint {path} expects clip window {saved_clip.get('window')}, "
            f"config wants {cfg.clip.window}"
        )


@dataclass
class EvalOutcome:
    """Paths of the written reports plus the headline aggregates."""

    rmsd_report: Path
    dsc_report: Path
    recall_report: Path
    summary: Path
    per_limb_rmsd: dict[str, list[float]]
    seconds_per_image: float


def cmd_evaluate(
    cfg: PipelineConfig,
    variant: str = "full",
    skeleton: Skeleton = DEFAULT_SKELETON,
    baseline_rmsd: Path | None = None,
    table4: bool = False,
    limb_mask: str | None = None,
) -> EvalOutcome:
    """Run inference on the test split and write metric reports.

    ``variant`` selects which maps feed the linker: "full" (detection then
    regression), "detection-only" (affinity maps straight to the linker),
    or "regression-only" (regression net fed raw depth).  ``limb_mask``
    zeroes the named limb's channels before linking, for sensitivity
    checks.  ``baseline_rmsd`` is a JSON file of per-frame pooled RMSDs
    from an earlier run; when given, a paired t-test against it lands in
    the summary.
    """
    import torch

    index = load_clip_index(cfg)
    if not index["clips"]["test"]:
        raise PipelineError("prepared data contains no test clips")

    det_model = reg_model = None
    if variant in ("full", "detection-only"):
        det_path = cfg.checkpoints_dir / "detection.pt"
        if not det_path.is_file():
            raise DependencyError(f"missing detection checkpoint {det_path}")
        det_model, det_payload = nets.load_checkpoint(det_path)
        _check_checkpoint_compat(cfg, det_payload, det_path)
    if variant in ("full", "regression-only"):
        reg_path = cfg.checkpoints_dir / "regression.pt"
        if not reg_path.is_file():
            raise DependencyError(f"missing regression checkpoint {reg_path}")
        reg_model, reg_payload = nets.load_checkpoint(reg_path)
        _check_checkpoint_compat(cfg, reg_payload, reg_path)
        expected = 21 if variant == "full" else 1
        if reg_model.spec.in_channels != expected:
            raise PipelineError(
                f"regression checkpoint takes {reg_model.spec.in_channels} channels "
                f"but variant {variant!r} supplies {expected}"
            )
    if variant not in ("full", "detection-only", "regression-only"):
        raise ValueError(f"unknown variant {variant!r}")

    depth = _load_portion(cfg, index, "test", "depth")
    gt_affinity = _load_portion(cfg, index, "test", "affinity")
    inputs = _depth_tensor(cfg, depth)

    records_by_video = _test_records(cfg, index, skeleton)

    per_limb: dict[str, list[float]] = {limb: [] for limb in skeleton.limbs}
    undefined: dict[str, int] = {limb: 0 for limb in skeleton.limbs}
    channel_dsc: dict[str, list[float]] = {}
    channel_recall: dict[str, list[float]] = {}
    pooled_rmsd: list[float] = []
    total_seconds = 0.0
    total_frames = 0

    for ci, item in enumerate(index["clips"]["test"]):
        clip_input = inputs[ci : ci + 1]
        elapsed = 0.0
        if det_model is not None:
            affinity_pred, secs = nets.infer(det_model, clip_input)
            elapsed += secs * clip_input.shape[2]
        if variant == "full":
            reg_in = torch.cat([clip_input, affinity_pred], dim=1)
            conf_pred, secs = nets.infer(reg_model, reg_in)
            elapsed += secs * clip_input.shape[2]
            link_maps = nets.tensor_to_stack(conf_pred)
        elif variant == "detection-only":
            link_maps = nets.tensor_to_stack(affinity_pred)
        else:
            conf_pred, secs = nets.infer(reg_model, clip_input)
            elapsed += secs * clip_input.shape[2]
            link_maps = nets.tensor_to_stack(conf_pred)
        total_seconds += elapsed
        total_frames += clip_input.shape[2]

        if limb_mask is not None:
            link_maps = link_maps.copy()
            for jid in skeleton.limb_joint_indices(limb_mask):
                link_maps[:, :, :, skeleton.joint_channel(jid)] = 0.0
            for cid in skeleton.limb_connection_ids(limb_mask):
                link_maps[:, :, :, skeleton.connection_channel(cid)] = 0.0

        poses = estimate_pose(link_maps, cfg.linker, skeleton)

        if det_model is not None:
            pred_masks = nets.tensor_to_stack(affinity_pred) >= 0.5
            _accumulate_overlap(
                pred_masks, gt_affinity[ci], skeleton, channel_dsc, channel_recall
            )

        frame_ids = item["frames"]
        for t, pose in enumerate(poses):
            rec = records_by_video[item["video"]].get(frame_ids[t])
            if rec is None:
                continue
            gt_joints = [rec.joint_point(j) for j in range(skeleton.num_joints)]
            frame_sq = []
            for limb in skeleton.limbs:
                res = rmsd(pose.joints, gt_joints, limb, skeleton)
                if res.defined:
                    per_limb[limb].append(res.value)
                    frame_sq.append(res.value**2 * res.matched)
                else:
                    undefined[limb] += 1
            if frame_sq:
                matched_total = sum(
                    rmsd(pose.joints, gt_joints, limb, skeleton).matched
                    for limb in skeleton.limbs
                )
                pooled_rmsd.append(float(np.sqrt(sum(frame_sq) / matched_total)))

    seconds_per_image = total_seconds / max(total_frames, 1)
    report = aggregate_report(
        per_limb,
        undefined_counts=undefined,
        seconds_per_image=seconds_per_image,
        resolution=(cfg.frame.width, cfg.frame.height),
    )
    out = cfg.output_dir / "reports"
    out.mkdir(parents=True, exist_ok=True)
    rmsd_path = out / f"rmsd_{variant}.csv"
    write_report_csv(report, rmsd_path)
    dsc_report = aggregate_report(channel_dsc)
    rec_report = aggregate_report(channel_recall)
    dsc_path = out / f"dsc_{variant}.csv"
    recall_path = out / f"recall_{variant}.csv"
    write_report_csv(dsc_report, dsc_path)
    write_report_csv(rec_report, recall_path)

    extra: dict = {"variant": variant, "pooled_rmsd": pooled_rmsd}
    if baseline_rmsd is not None:
        baseline = json.loads(Path(baseline_rmsd).read_text(encoding="utf-8"))
        base_values = baseline.get("pooled_rmsd", baseline)
        n = min(len(base_values), len(pooled_rmsd))
        if n >= 2:
            test = paired_ttest(pooled_rmsd[:n], base_values[:n], StatTestConfig())
            extra["ttest_vs_baseline"] = {
                "t": test.t,
                "p": test.p,
                "significant": test.significant,
                "marker": test.marker,
                "pairs": n,
            }
    summary_path = out / f"summary_{variant}.json"
    write_report_json(report, summary_path, extra=extra)

    if table4:
        _write_table4(report, out / f"table4_{variant}.csv", skeleton)
    if cfg.overlays:
        _write_overlays(cfg, index, records_by_video, skeleton)

    return EvalOutcome(
        rmsd_path, dsc_path, recall_path, summary_path, per_limb, seconds_per_image
    )


def _test_records(
    cfg: PipelineConfig, index: dict, skeleton: Skeleton
) -> dict[str, dict[int, AnnotationRecord]]:
    entries = {e.video_id: e for e in load_manifest(cfg.manifest)}
    out: dict[str, dict[int, AnnotationRecord]] = {}
    for video_id, frame_ids in index["split_frames"]["test"].items():
        records = load_annotations(entries[video_id].annotations_csv, cfg.frame, skeleton)
        wanted = set(frame_ids)
        out[video_id] = {
            rec.frame_index: rec for rec in records if rec.frame_index in wanted
        }
    return out


def _accumulate_overlap(pred_masks, gt_stack, skeleton, channel_dsc, channel_recall):
    gt = gt_stack.astype(bool)
    names = list(skeleton.joints) + [f"{a}-{b}" for a, b in skeleton.connections]
    for t in range(gt.shape[2]):
        for ch, name in enumerate(names):
            channel_dsc.setdefault(name, []).append(dsc(pred_masks[:, :, t, ch], gt[:, :, t, ch]))
            channel_recall.setdefault(name, []).append(
                recall(pred_masks[:, :, t, ch], gt[:, :, t, ch])
            )


def _write_table4(report, path: Path, skeleton: Skeleton) -> None:
    """Per-limb median (IQR) RMSD in a compact two-column layout."""
    import csv

    with path.open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["limb", "median_rmsd_px", "iqr_px"])
        for limb in skeleton.limbs:
            entry = report.categories.get(limb)
            if entry is None:
                writer.writerow([limb, "n/a", "n/a"])
            else:
                writer.writerow([limb, f"{entry['median']:.2f}", f"{entry['iqr']:.2f}"])


def _write_overlays(cfg, index, records_by_video, skeleton) -> None:
    import cv2

    entries = {e.video_id: e for e in load_manifest(cfg.manifest)}
    out_dir = cfg.output_dir / "overlays"
    out_dir.mkdir(parents=True, exist_ok=True)
    for video_id, by_frame in records_by_video.items():
        for frame_index, rec in sorted(by_frame.items()):
            img = load_depth_frame(
                frame_path(entries[video_id].frames_dir, frame_index), cfg.frame
            )
            lo, hi = np.percentile(img, [2, 98])
            span = max(hi - lo, 1e-9)
            vis = np.clip((img - lo) / span * 255.0, 0, 255).astype(np.uint8)
            vis = cv2.cvtColor(vis, cv2.COLOR_GRAY2BGR)
            for limb in skeleton.limbs:
                color = LIMB_COLORS[limb]
                pts = [rec.joint_point(j) for j in skeleton.limb_joint_indices(limb)]
                for a, b in zip(pts, pts[1:]):
                    if a is not None and b is not None:
                        cv2.line(
                            vis,
                            (int(round(a[0])), int(round(a[1]))),
                            (int(round(b[0])), int(round(b[1]))),
                            color,
                            1,
                        )
                for p in pts:
                    if p is not None:
                        cv2.circle(vis, (int(round(p[0])), int(round(p[1]))), 2, color, -1)
            cv2.imwrite(str(out_dir / f"{video_id}_{frame_index:06d}.png"), vis)


def cmd_infer(
    cfg: PipelineConfig,
    video_id: str,
    out_path: Path | str,
    variant: str = "full",
    skeleton: Skeleton = DEFAULT_SKELETON,
) -> Path:
    """Estimate poses for every full clip window of one video; write JSON."""
    import torch

    entries = {e.video_id: e for e in load_manifest(cfg.manifest)}
    if video_id not in entries:
        raise PipelineError(f"video {video_id!r} not in manifest")
    entry = entries[video_id]
    records = load_annotations(entry.annotations_csv, cfg.frame, skeleton)
    video_clips = clips_mod.build_clips(
        records, entry.frames_dir, cfg.frame, cfg.eval_clip, cfg.interpolation
    )
    det_model = reg_model = None
    if variant in ("full", "detection-only"):
        det_model, det_payload = nets.load_checkpoint(cfg.checkpoints_dir / "detection.pt")
        _check_checkpoint_compat(cfg, det_payload, "detection checkpoint")
    if variant in ("full", "regression-only"):
        reg_model, reg_payload = nets.load_checkpoint(cfg.checkpoints_dir / "regression.pt")
        _check_checkpoint_compat(cfg, reg_payload, "regression checkpoint")

    poses = []
    frame_ids = []
    for clip in video_clips:
        x = torch.from_numpy(clip.frames[None, None] * cfg.depth_scale).float()
        if det_model is not None:
            affinity, _ = nets.infer(det_model, x)
        if variant == "full":
            conf, _ = nets.infer(reg_model, torch.cat([x, affinity], dim=1))
            maps = nets.tensor_to_stack(conf)
        elif variant == "detection-only":
            maps = nets.tensor_to_stack(affinity)
        else:
            conf, _ = nets.infer(reg_model, x)
            maps = nets.tensor_to_stack(conf)
        for t, pose in enumerate(estimate_pose(maps, cfg.linker, skeleton)):
            if clip.frame_indices[t] not in frame_ids:
                frame_ids.append(clip.frame_indices[t])
                poses.append(pose)
    payload = poses_to_json(poses, frame_ids, video_id)
    out_path = Path(out_path)
    out_path.parent.mkdir(parents=True, exist_ok=True)
    out_path.write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    return out_path
