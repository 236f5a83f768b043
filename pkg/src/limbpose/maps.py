"""Ground-truth map generation for the detection and regression stages.

Two map families share one geometric vocabulary: a joint occupies the disk
of a given radius around its annotated centre, a connection occupies the
rectangle of a given thickness centred on the segment between its two
joints.  Affinity maps are the binary masks of those regions (detection
targets); confidence maps fill the same regions with a truncated Gaussian
profile peaking at 1 (regression targets).
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np

from . import kernels
from .data import AnnotationRecord, FrameSpec
from .skeleton import DEFAULT_SKELETON, Skeleton

AFFINITY = "affinity"
CONFIDENCE = "confidence"


@dataclass(frozen=True)
class MapGenConfig:
    """Radii (pixels, at working resolution) and Gaussian width for targets.

    ``sigma`` defaults to three times the confidence radius; it can be
    overridden, e.g. to sharpen the confidence peaks.
    """

    affinity_radius: float = 6.0
    confidence_radius: float = 6.0
    sigma_override: float | None = None

    def __post_init__(self):
        if self.affinity_radius <= 0 or self.confidence_radius <= 0:
            raise ValueError("radii must be positive")
        if self.sigma_override is not None and self.sigma_override <= 0:
            raise ValueError("sigma override must be positive")

    @property
    def sigma(self) -> float:
        if self.sigma_override is not None:
            return self.sigma_override
        return 3.0 * self.confidence_radius


@dataclass
class MapStack:
    """Per-clip stack of 20 per-frame maps, shape (H, W, W_d, 20).

    Channels follow the skeleton convention: joints 0-11, connections 12-19.
    ``kind`` is ``"affinity"`` (binary values) or ``"confidence"`` (values
    in [0, 1]).
    """

    values: np.ndarray
    kind: str
    skeleton: Skeleton = field(default_factory=lambda: DEFAULT_SKELETON)

    def __post_init__(self):
        if self.kind not in (AFFINITY, CONFIDENCE):
            raise ValueError(f"unknown map kind {self.kind!r}")
        if self.values.ndim != 4 or self.values.shape[3] != self.skeleton.num_channels:
            raise ValueError(
                f"map stack must have shape (H, W, frames, {self.skeleton.num_channels}), "
                f"got {self.values.shape}"
            )

    @property
    def num_frames(self) -> int:
        return self.values.shape[2]

    def frame_channel(self, t: int, channel: int) -> np.ndarray:
        return self.values[:, :, t, channel]

    def joint_map(self, t: int, jid: int) -> np.ndarray:
        return self.frame_channel(t, self.skeleton.joint_channel(jid))

    def connection_map(self, t: int, cid: int) -> np.ndarray:
        return self.frame_channel(t, self.skeleton.connection_channel(cid))


def affinity_joint_map(
    center: tuple[float, float] | None, cfg: MapGenConfig, spec: FrameSpec
) -> np.ndarray:
    """Binary disk of radius ``affinity_radius`` around a joint centre.

    ``center`` may be None (joint not visible), producing an all-zero map.
    Off-frame portions are clipped.
    """
    if center is None:
        return np.zeros((spec.height, spec.width), dtype=np.uint8)
    cx, cy = center
    return kernels.disk_mask(spec.height, spec.width, cx, cy, cfg.affinity_radius)


def affinity_connection_map(
    p1: tuple[float, float] | None,
    p2: tuple[float, float] | None,
    cfg: MapGenConfig,
    spec: FrameSpec,
) -> np.ndarray:
    """Binary rectangle of thickness ``affinity_radius`` along segment p1-p2.

    Either endpoint missing (not visible) yields an all-zero map; so does a
    degenerate segment p1 == p2, with a warning.
    """
    if p1 is None or p2 is None:
        return np.zeros((spec.height, spec.width), dtype=np.uint8)
    if p1 == p2:
        warnings.warn("degenerate connection segment (p1 == p2); emitting empty map")
        return np.zeros((spec.height, spec.width), dtype=np.uint8)
    return kernels.segment_mask(
        spec.height, spec.width, p1[0], p1[1], p2[0], p2[1], cfg.affinity_radius
    )


def confidence_joint_map(
    center: tuple[float, float] | None, cfg: MapGenConfig, spec: FrameSpec
) -> np.ndarray:
    """Gaussian peak over the joint disk: exp(-d^2/(2 sigma^2)), 0 outside.

    The peak value is 1 at the centre; support is the disk of radius
    ``confidence_radius``.
    """
    if center is None:
        return np.zeros((spec.height, spec.width), dtype=np.float64)
    cx, cy = center
    return kernels.gaussian_disk(
        spec.height, spec.width, cx, cy, cfg.confidence_radius, cfg.sigma
    )


def confidence_connection_map(
    p1: tuple[float, float] | None,
    p2: tuple[float, float] | None,
    cfg: MapGenConfig,
    spec: FrameSpec,
) -> np.ndarray:
    """1-D Gaussian along the connection axis inside its thickness rectangle.

    The profile is centred at the segment midpoint and constant across the
    thickness (``confidence_radius``).
    """
    if p1 is None or p2 is None:
        return np.zeros((spec.height, spec.width), dtype=np.float64)
    if p1 == p2:
        warnings.warn("degenerate connection segment (p1 == p2); emitting empty map")
        return np.zeros((spec.height, spec.width), dtype=np.float64)
    return kernels.gaussian_segment(
        spec.height, spec.width, p1[0], p1[1], p2[0], p2[1],
        cfg.confidence_radius, cfg.sigma,
    )


def build_target_stack(
    records: list[AnnotationRecord],
    kind: str,
    cfg: MapGenConfig,
    spec: FrameSpec,
    skeleton: Skeleton = DEFAULT_SKELETON,
    source_indices: tuple[int, ...] | None = None,
) -> MapStack:
    """Assemble the (H, W, frames, 20) target stack for one clip.

    ``records`` must be one annotation record per clip frame, in clip
    order; when ``source_indices`` is given, the record frame indices are
    checked against it (mismatch raises).
    """
    if kind not in (AFFINITY, CONFIDENCE):
        raise ValueError(f"unknown map kind {kind!r}")
    if source_indices is not None:
        got = tuple(r.frame_index for r in records)
        if got != tuple(source_indices):
            raise ValueError(
                f"annotation records {got} do not align with clip frames {tuple(source_indices)}"
            )
    dtype = np.uint8 if kind == AFFINITY else np.float64
    out = np.zeros((spec.height, spec.width, len(records), skeleton.num_channels), dtype=dtype)
    joint_fn = affinity_joint_map if kind == AFFINITY else confidence_joint_map
    conn_fn = affinity_connection_map if kind == AFFINITY else confidence_connection_map
    for t, rec in enumerate(records):
        for jid in range(skeleton.num_joints):
            out[:, :, t, skeleton.joint_channel(jid)] = joint_fn(
                rec.joint_point(jid), cfg, spec
            )
        for cid in range(skeleton.num_connections):
            a, b = skeleton.connection_endpoints(cid)
            out[:, :, t, skeleton.connection_channel(cid)] = conn_fn(
                rec.joint_point(a), rec.joint_point(b), cfg, spec
            )
    return MapStack(values=out, kind=kind, skeleton=skeleton)


def export_debug_pngs(stack: MapStack, out_dir, prefix: str = "map") -> list:
    """Dump each channel of each frame as an 8-bit grayscale PNG for inspection."""
    import cv2
    from pathlib import Path

    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    written = []
    for t in range(stack.num_frames):
        for c in range(stack.skeleton.num_channels):
            img = np.asarray(stack.values[:, :, t, c], dtype=np.float64)
            img_u8 = np.clip(img * 255.0, 0, 255).astype(np.uint8)
            path = out_dir / f"{prefix}_t{t}_c{c:02d}.png"
            cv2.imwrite(str(path), img_u8)
            written.append(path)
    return written
