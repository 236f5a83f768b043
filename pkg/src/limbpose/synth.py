"""Synthetic depth sequences of a jointed puppet with exact annotations.

A torso ellipse plus four limbs (two segments each, rendered as capsules
at per-limb depths) moves by a bounded random walk on joint angles.
Compositing keeps the nearest surface per pixel, so limbs can genuinely
occlude each other, and a joint is flagged not-visible whenever a closer
surface covers it.  Output uses the canonical dataset layout (16-bit PNG
frames, annotation CSV, manifest), making synthetic and recorded data
interchangeable.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import kernels
from .data import (
    AnnotationRecord,
    FrameSpec,
    VideoEntry,
    frame_path,
    save_annotations,
    save_depth_frame,
    write_manifest,
)
from .skeleton import DEFAULT_SKELETON, Skeleton

CHALLENGE_KINDS = ("self-occlusion", "external-occlusion", "noise-burst")

# Angle conventions: radians, x to the right, y downward.
_LIMB_MOTION = {
    # limb: (anchor joint, base angle, angle span, relative base, relative span)
    "right-arm": ("RS", math.pi, 0.5, 0.4, 0.8),
    "left-arm": ("LS", 0.0, 0.5, -0.4, 0.8),
    "right-leg": ("RH", math.pi / 2 + 0.35, 0.4, 0.0, 0.7),
    "left-leg": ("LH", math.pi / 2 - 0.35, 0.4, 0.0, 0.7),
}


@dataclass(frozen=True)
class PuppetConfig:
    """Geometry, depth levels, motion and noise of the synthetic puppet."""

    spec: FrameSpec = FrameSpec()
    n_frames: int = 40
    cadence: int = 5
    upper_arm: float = 70.0
    forearm: float = 60.0
    thigh: float = 70.0
    shin: float = 60.0
    torso_width: float = 170.0
    torso_height: float = 240.0
    limb_radius: float = 16.0
    angle_step: float = 0.12
    background_depth: int = 1800
    body_depth: int = 1100
    depth_gap: int = 60
    noise_amp: float = 6.0
    occlusion_prob: float = 0.0
    seed: int = 0

    def __post_init__(self):
        if self.n_frames < 1:
            raise ValueError("n_frames must be >= 1")
        if self.cadence < 1:
            raise ValueError("cadence must be >= 1")
        for name in ("upper_arm", "forearm", "thigh", "shin", "limb_radius"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be positive")
        if self.torso_width <= 0 or self.torso_height <= 0:
            raise ValueError("torso axes must be positive")
        if not 0.0 <= self.occlusion_prob <= 1.0:
            raise ValueError("occlusion_prob must be in [0, 1]")
        if self.noise_amp < 0:
            raise ValueError("noise_amp must be non-negative")
        if not 0 < self.body_depth < self.background_depth <= 60000:
            raise ValueError("need 0 < body_depth < background_depth <= 60000")
        if self.depth_gap < 1 or self.body_depth - 5 * self.depth_gap <= 0:
            raise ValueError("depth_gap must be >= 1 and leave body depths positive")
        self._validate_reach()

    def _validate_reach(self):
        w, h = self.spec.native_width, self.spec.native_height
        margin = self.limb_radius + 2.0
        cx, cy = w / 2.0, h / 2.0
        sx, sy = self.torso_width / 2.0, self.torso_height / 2.0
        if cx - sx < 2 or cx + sx > w - 2 or cy - sy < 2 or cy + sy > h - 2:
            raise ValueError("torso ellipse does not fit inside the frame")
        for limb, (anchor_joint, *_rest) in _LIMB_MOTION.items():
            ax, ay = _anchor(anchor_joint, cx, cy, sx, sy)
            reach = self.limb_lengths(limb)[0] + self.limb_lengths(limb)[1] + margin
            if ax - reach < 0 or ax + reach >= w or ay - reach < 0 or ay + reach >= h:
                raise ValueError(
                    f"{limb} segment lengths reach outside the frame from its anchor; "
                    f"shorten the segments or enlarge the frame"
                )

    def limb_lengths(self, limb: str) -> tuple[float, float]:
        if limb.endswith("arm"):
            return self.upper_arm, self.forearm
        return self.thigh, self.shin

    def limb_depth(self, limb: str, skeleton: Skeleton = DEFAULT_SKELETON) -> int:
        """Surface depth of a limb; later limbs sit closer to the camera."""
        order = skeleton.limbs.index(limb)
        return self.body_depth - self.depth_gap * (order + 1)


@dataclass
class PuppetSequence:
    """Generated frames (native resolution, uint16) plus exact annotations."""

    video_id: str
    frames: np.ndarray  # (n_frames, native_height, native_width) uint16
    records: list[AnnotationRecord]
    kind: str | None = None
    affected_frames: list[int] = field(default_factory=list)


def _anchor(joint: str, cx: float, cy: float, sx: float, sy: float) -> tuple[float, float]:
    offsets = {
        "RS": (-0.75, -0.55),
        "LS": (0.75, -0.55),
        "RH": (-0.65, 0.65),
        "LH": (0.65, 0.65),
    }
    ox, oy = offsets[joint]
    return cx + ox * sx, cy + oy * sy


def _walk_angles(
    rng: np.random.Generator, cfg: PuppetConfig, overrides: dict[str, float]
) -> list[dict[str, tuple[float, float]]]:
    """Bounded random walk: per frame, per limb (absolute, relative) angles."""
    state: dict[str, list[float]] = {}
    bounds: dict[str, tuple[float, float, float, float]] = {}
    for limb, (_anchor_joint, base, span, rel_base, rel_span) in _LIMB_MOTION.items():
        base = overrides.get(limb, base)
        state[limb] = [base, rel_base]
        bounds[limb] = (base - span, base + span, rel_base - rel_span, rel_base + rel_span)
    out = []
    for i in range(cfg.n_frames):
        frame_angles = {}
        for limb in _LIMB_MOTION:
            lo1, hi1, lo2, hi2 = bounds[limb]
            if i > 0:
                s1, s2 = state[limb]
                s1 = min(hi1, max(lo1, s1 + rng.uniform(-cfg.angle_step, cfg.angle_step)))
                s2 = min(hi2, max(lo2, s2 + rng.uniform(-cfg.angle_step, cfg.angle_step)))
                state[limb] = [s1, s2]
            frame_angles[limb] = tuple(state[limb])
        out.append(frame_angles)
    return out


def pose_from_angles(
    cfg: PuppetConfig, angles: dict[str, tuple[float, float]], skeleton: Skeleton = DEFAULT_SKELETON
) -> dict[str, tuple[float, float]]:
    """Joint name -> native (x, y) for one frame of limb angles."""
    w, h = cfg.spec.native_width, cfg.spec.native_height
    cx, cy = w / 2.0, h / 2.0
    sx, sy = cfg.torso_width / 2.0, cfg.torso_height / 2.0
    joints: dict[str, tuple[float, float]] = {}
    for limb, (anchor_joint, *_rest) in _LIMB_MOTION.items():
        distal, middle, proximal = skeleton.limb_joints[limb]
        ax, ay = _anchor(anchor_joint, cx, cy, sx, sy)
        l1, l2 = cfg.limb_lengths(limb)
        theta, rel = angles[limb]
        mx = ax + l1 * math.cos(theta)
        my = ay + l1 * math.sin(theta)
        dx = mx + l2 * math.cos(theta + rel)
        dy = my + l2 * math.sin(theta + rel)
        joints[proximal] = (ax, ay)
        joints[middle] = (mx, my)
        joints[distal] = (dx, dy)
    return joints


def render_pose(
    cfg: PuppetConfig,
    joints: dict[str, tuple[float, float]],
    skeleton: Skeleton = DEFAULT_SKELETON,
    occluder: tuple[float, float, float] | None = None,
) -> np.ndarray:
    """Noiseless native-resolution depth composite of one pose.

    Surfaces are flat: background, torso ellipse, one capsule pair per
    limb, optionally an external occluder disk.  The nearest (smallest)
    depth wins per pixel.
    """
    w, h = cfg.spec.native_width, cfg.spec.native_height
    depth = np.full((h, w), float(cfg.background_depth))
    ys, xs = np.mgrid[0:h, 0:w]
    cx, cy = w / 2.0, h / 2.0
    sx, sy = cfg.torso_width / 2.0, cfg.torso_height / 2.0
    torso = ((xs - cx) / sx) ** 2 + ((ys - cy) / sy) ** 2 <= 1.0
    depth[torso] = np.minimum(depth[torso], float(cfg.body_depth))
    for limb in skeleton.limbs:
        surface = float(cfg.limb_depth(limb, skeleton))
        chain = [joints[name] for name in reversed(skeleton.limb_joints[limb])]
        for (ax, ay), (bx, by) in zip(chain, chain[1:]):
            mask = _capsule_mask(h, w, ax, ay, bx, by, cfg.limb_radius)
            depth[mask] = np.minimum(depth[mask], surface)
    if occluder is not None:
        ox, oy, radius = occluder
        mask = kernels.disk_mask(h, w, ox, oy, radius).astype(bool)
        depth[mask] = np.minimum(depth[mask], float(cfg.body_depth - 5 * cfg.depth_gap))
    return depth


def _capsule_mask(h, w, ax, ay, bx, by, radius) -> np.ndarray:
    mask = kernels.segment_mask(h, w, ax, ay, bx, by, 2.0 * radius).astype(bool)
    mask |= kernels.disk_mask(h, w, ax, ay, radius).astype(bool)
    mask |= kernels.disk_mask(h, w, bx, by, radius).astype(bool)
    return mask


def _visibility(
    cfg: PuppetConfig,
    depth: np.ndarray,
    joints: dict[str, tuple[float, float]],
    skeleton: Skeleton,
) -> dict[str, bool]:
    """A joint is visible unless a closer surface covers its pixel."""
    h, w = depth.shape
    visible = {}
    for name, (x, y) in joints.items():
        limb = skeleton.limb_of(skeleton.joint_index(name))
        own = float(cfg.limb_depth(limb, skeleton))
        px = min(w - 1, max(0, int(round(x))))
        py = min(h - 1, max(0, int(round(y))))
        visible[name] = depth[py, px] >= own - 0.5
    return visible


def generate_sequence(
    cfg: PuppetConfig,
    video_id: str = "synth",
    skeleton: Skeleton = DEFAULT_SKELETON,
    _kind: str | None = None,
) -> PuppetSequence:
    """Render a seeded puppet sequence with exact per-frame annotations.

    Frame i of the sequence is annotated at source index ``i * cadence``.
    """
    if _kind is not None and _kind not in CHALLENGE_KINDS:
        raise ValueError(f"unknown challenge kind {_kind!r}; choose from {CHALLENGE_KINDS}")
    rng = np.random.default_rng(cfg.seed)
    overrides: dict[str, float] = {}
    if _kind == "self-occlusion":
        # Point both arms inward so their capsules cross over the chest.
        overrides = {"right-arm": -0.1, "left-arm": math.pi + 0.1}
    angle_track = _walk_angles(rng, cfg, overrides)
    n = cfg.n_frames
    lo, hi = n // 3, max(n // 3 + 1, (2 * n) // 3)
    affected = list(range(lo, hi)) if _kind in ("external-occlusion", "noise-burst") else []

    h, w = cfg.spec.native_height, cfg.spec.native_width
    frames = np.zeros((n, h, w), dtype=np.uint16)
    records: list[AnnotationRecord] = []
    for i in range(n):
        joints = pose_from_angles(cfg, angle_track[i], skeleton)
        occluder = None
        if _kind == "external-occlusion" and i in affected:
            tx, ty = joints["RW"]
            occluder = (tx, ty, 2.5 * cfg.limb_radius)
        depth = render_pose(cfg, joints, skeleton, occluder)
        visible = _visibility(cfg, depth, joints, skeleton)
        amp = cfg.noise_amp * (3.0 if _kind == "noise-burst" and i in affected else 1.0)
        noisy = depth + rng.normal(0.0, 1.0, depth.shape) * amp
        frames[i] = np.clip(np.rint(noisy), 0, 65535).astype(np.uint16)

        rec = AnnotationRecord.empty(video_id, i * cfg.cadence, skeleton)
        for name, (x, y) in joints.items():
            jid = skeleton.joint_index(name)
            rec.xy[jid] = cfg.spec.to_working(x, y)
            occluded_by_chance = cfg.occlusion_prob > 0 and rng.random() < cfg.occlusion_prob
            rec.visible[jid] = visible[name] and not occluded_by_chance
        records.append(rec)
    return PuppetSequence(video_id, frames, records, _kind, affected)


def challenge_variants(cfg: PuppetConfig, kind: str, video_id: str = "synth-challenge") -> PuppetSequence:
    """Sequence with one named difficulty injected.

    ``self-occlusion`` crosses the arms over the chest; ``external-occlusion``
    parks a closer disk over the right wrist for the middle third of the
    sequence; ``noise-burst`` triples the noise amplitude there.
    """
    if kind not in CHALLENGE_KINDS:
        raise ValueError(f"unknown challenge kind {kind!r}; choose from {CHALLENGE_KINDS}")
    return generate_sequence(cfg, video_id, _kind=kind)


def write_dataset(
    out_dir: Path | str,
    sequences: list[PuppetSequence],
    spec: FrameSpec,
    skeleton: Skeleton = DEFAULT_SKELETON,
) -> Path:
    """Write sequences in the canonical layout; returns the manifest path."""
    out_dir = Path(out_dir)
    entries = []
    for seq in sequences:
        frames_dir = out_dir / "frames" / seq.video_id
        csv_path = out_dir / "annotations" / f"{seq.video_id}.csv"
        for frame, rec in zip(seq.frames, seq.records):
            save_depth_frame(frame_path(frames_dir, rec.frame_index), frame)
        save_annotations(seq.records, csv_path, spec, skeleton)
        entries.append(VideoEntry(seq.video_id, frames_dir, csv_path))
    manifest = out_dir / "manifest.csv"
    write_manifest(entries, manifest)
    return manifest
