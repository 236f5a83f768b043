"""Sliding-window extraction of fixed-length depth clips from frame sequences.

A clip is a stack of ``window`` consecutive annotated frames.  Consecutive
clips share ``overlap`` frames, so the window start advances by
``window - overlap`` annotated frames each step.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .data import AnnotationRecord, FrameSpec, frame_path, load_depth_frame


class InsufficientFramesError(ValueError):
    """A sequence is shorter than one clip window."""


@dataclass(frozen=True)
class ClipConfig:
    """Clip window geometry: frames per clip and frames shared between clips."""

    window: int = 3
    overlap: int = 2
    cadence: int = 5

    def __post_init__(self):
        if self.window < 1:
            raise ValueError("window must be at least 1")
        if not 0 <= self.overlap < self.window:
            raise ValueError("overlap must satisfy 0 <= overlap < window")
        if self.cadence < 1:
            raise ValueError("cadence must be at least 1")

    @property
    def stride(self) -> int:
        return self.window - self.overlap

    def clip_duration(self, fps: float) -> float:
        """Wall-clock seconds spanned by one clip's worth of source video."""
        return self.window * self.cadence / fps


@dataclass
class DepthClip:
    """One extracted clip: frames (window, H, W) and the records they came from."""

    video_id: str
    frames: np.ndarray
    records: list[AnnotationRecord]

    def __post_init__(self):
        if self.frames.ndim != 3:
            raise ValueError("frames must be a (window, H, W) stack")
        if self.frames.shape[0] != len(self.records):
            raise ValueError(
                f"{self.frames.shape[0]} frames but {len(self.records)} records"
            )

    @property
    def frame_indices(self) -> list[int]:
        return [rec.frame_index for rec in self.records]

    def to_input(self) -> np.ndarray:
        """Network input layout (1, T, H, W): a single depth channel."""
        return self.frames[np.newaxis].astype(np.float32)


def window_starts(n_frames: int, config: ClipConfig) -> list[int]:
    """Positions (into the frame list) where a full clip window fits.

    The count is ``floor((n - window) / stride) + 1``; a sequence shorter
    than one window raises :class:`InsufficientFramesError`.
    """
    if n_frames < config.window:
        raise InsufficientFramesError(
            f"{n_frames} frames cannot fill a clip window of {config.window}"
        )
    count = (n_frames - config.window) // config.stride + 1
    return [i * config.stride for i in range(count)]


def build_clips(
    records: list[AnnotationRecord],
    frames_dir: Path | str,
    spec: FrameSpec,
    config: ClipConfig,
    interpolation: str = "bilinear",
) -> list[DepthClip]:
    """Slide the clip window over one video's annotated frames, in index order.

    Windows are positional over the given record list, so a list with gaps
    (for example the training portion of a split) still yields
    ``floor((n - window) / stride) + 1`` clips.
    """
    records = sorted(records, key=lambda r: r.frame_index)
    video_ids = {rec.video_id for rec in records}
    if len(video_ids) > 1:
        raise ValueError(f"records span multiple videos: {sorted(video_ids)}")
    cache: dict[int, np.ndarray] = {}

    def frame(rec: AnnotationRecord) -> np.ndarray:
        if rec.frame_index not in cache:
            cache[rec.frame_index] = load_depth_frame(
                frame_path(frames_dir, rec.frame_index), spec, interpolation
            )
        return cache[rec.frame_index]

    try:
        starts = window_starts(len(records), config)
    except InsufficientFramesError as exc:
        video = records[0].video_id if records else "<empty>"
        raise InsufficientFramesError(f"video {video!r}: {exc}") from None

    clips = []
    for start in starts:
        chunk = records[start : start + config.window]
        stack = np.stack([frame(rec) for rec in chunk])
        clips.append(DepthClip(chunk[0].video_id, stack, chunk))
    return clips


def count_clips(n_frames: int, config: ClipConfig) -> int:
    """Number of clips a sequence of ``n_frames`` frames yields (0 if too short)."""
    if n_frames < config.window:
        return 0
    return (n_frames - config.window) // config.stride + 1
