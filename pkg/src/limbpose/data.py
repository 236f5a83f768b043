"""Depth-frame and annotation I/O, preprocessing, and dataset splitting.

On-disk layout: one 16-bit grayscale PNG per frame (``frame_%06d.png``)
inside a per-video directory, one annotation CSV per video, and a manifest
CSV tying them together.  Annotation coordinates are stored at the native
camera resolution and scaled to the working resolution at load time, so
changing the working frame size never requires re-annotation.
"""

from __future__ import annotations

import csv
import io
import json
import zlib
from dataclasses import dataclass, field
from pathlib import Path

import cv2
import numpy as np

from .skeleton import DEFAULT_SKELETON, Skeleton

ANNOTATION_HEADER = ["video_id", "frame_index", "joint", "x", "y", "visible"]
MANIFEST_HEADER = ["video_id", "frames_dir", "annotations_csv"]

_INTERPOLATIONS = {
    "bilinear": cv2.INTER_LINEAR,
    "nearest": cv2.INTER_NEAREST,
    "area": cv2.INTER_AREA,
    "cubic": cv2.INTER_CUBIC,
}


class DepthFormatError(ValueError):
    """The depth image on disk is not a single-channel image."""


class SchemaError(ValueError):
    """An annotation/manifest file violates the canonical schema."""


class AnnotationValidationError(ValueError):
    """An annotation row carries out-of-bounds coordinates."""


class CadenceError(ValueError):
    """Annotated frame indices of a video are not evenly spaced."""


@dataclass(frozen=True)
class FrameSpec:
    """Working and native frame geometry plus the capture frame rate."""

    width: int = 128
    height: int = 96
    native_width: int = 640
    native_height: int = 480
    fps: float = 30.0

    def __post_init__(self):
        if self.width <= 0 or self.height <= 0:
            raise ValueError("frame dimensions must be positive")
        if self.native_width <= 0 or self.native_height <= 0:
            raise ValueError("native dimensions must be positive")
        # Aspect ratio must be preserved within rounding of one pixel.
        expected_w = self.height * self.native_width / self.native_height
        if abs(self.width - expected_w) > 1.0:
            raise ValueError(
                f"working size {self.width}x{self.height} does not preserve the "
                f"native {self.native_width}x{self.native_height} aspect ratio"
            )
        if self.fps <= 0:
            raise ValueError("fps must be positive")

    def to_working(self, x: float, y: float) -> tuple[float, float]:
        """Scale native-resolution coordinates to the working resolution."""
        return x * self.width / self.native_width, y * self.height / self.native_height

    def to_native(self, x: float, y: float) -> tuple[float, float]:
        """Inverse of :meth:`to_working` (exact to within 0.5 native pixels)."""
        return x * self.native_width / self.width, y * self.native_height / self.height


@dataclass
class AnnotationRecord:
    """Per-frame 2-D joint coordinates (working resolution) with visibility flags."""

    video_id: str
    frame_index: int
    xy: np.ndarray  # (12, 2) float64, NaN where not visible
    visible: np.ndarray  # (12,) bool

    def joint_point(self, jid: int) -> tuple[float, float] | None:
        if not self.visible[jid]:
            return None
        return float(self.xy[jid, 0]), float(self.xy[jid, 1])

    @classmethod
    def empty(cls, video_id: str, frame_index: int, skeleton: Skeleton = DEFAULT_SKELETON):
        return cls(
            video_id=video_id,
            frame_index=frame_index,
            xy=np.full((skeleton.num_joints, 2), np.nan),
            visible=np.zeros(skeleton.num_joints, dtype=bool),
        )


@dataclass
class DatasetSplit:
    """Per-video annotated frame indices assigned to train / validation / test."""

    train: dict[str, list[int]] = field(default_factory=dict)
    validation: dict[str, list[int]] = field(default_factory=dict)
    test: dict[str, list[int]] = field(default_factory=dict)
    rejected: dict[str, str] = field(default_factory=dict)

    def videos(self) -> list[str]:
        return sorted(self.train)


@dataclass(frozen=True)
class VideoEntry:
    """One manifest row: a video id, its frame directory and annotation CSV."""

    video_id: str
    frames_dir: Path
    annotations_csv: Path


def frame_path(frames_dir: Path | str, frame_index: int) -> Path:
    return Path(frames_dir) / f"frame_{frame_index:06d}.png"


def load_depth_frame(
    path: Path | str, spec: FrameSpec, interpolation: str = "bilinear"
) -> np.ndarray:
    """Load one depth frame, resize to the working resolution, zero its mean.

    Returns a float64 array of shape (height, width) whose mean is 0.
    Raises ``OSError`` for unreadable files and :class:`DepthFormatError`
    for multi-channel images.
    """
    img = cv2.imread(str(path), cv2.IMREAD_UNCHANGED)
    if img is None:
        raise OSError(f"cannot read depth frame {path}")
    if img.ndim != 2:
        raise DepthFormatError(
            f"{path}: expected a single-channel depth image, got shape {img.shape}"
        )
    resized = cv2.resize(
        img.astype(np.float32),
        (spec.width, spec.height),
        interpolation=_INTERPOLATIONS[interpolation],
    ).astype(np.float64)
    return resized - resized.mean()


def save_depth_frame(path: Path | str, frame: np.ndarray) -> None:
    """Write a uint16 depth frame as a 16-bit grayscale PNG."""
    frame = np.asarray(frame)
    if frame.dtype != np.uint16:
        raise DepthFormatError(f"expected uint16 depth values, got {frame.dtype}")
    Path(path).parent.mkdir(parents=True, exist_ok=True)
    if not cv2.imwrite(str(path), frame):
        raise OSError(f"cannot write depth frame {path}")


def _parse_visible(raw: str, row_num: int) -> bool:
    if raw not in ("0", "1"):
        raise SchemaError(f"row {row_num}: visible flag must be 0 or 1, got {raw!r}")
    return raw == "1"


def load_annotations(
    path: Path | str, spec: FrameSpec, skeleton: Skeleton = DEFAULT_SKELETON
) -> list[AnnotationRecord]:
    """Read an annotation CSV, scaling coordinates to the working resolution.

    Rows are grouped into one record per (video_id, frame_index); joints
    with no row are treated as not visible.  Records come back sorted by
    (video_id, frame_index).
    """
    path = Path(path)
    records: dict[tuple[str, int], AnnotationRecord] = {}
    seen_rows: set[tuple[str, int, str]] = set()
    with path.open(newline="", encoding="utf-8") as fh:
        lines = [ln for ln in fh if not ln.startswith("#")]
    reader = csv.reader(io.StringIO("".join(lines)))
    try:
        header = next(reader)
    except StopIteration:
        raise SchemaError(f"{path}: empty annotation file") from None
    if header != ANNOTATION_HEADER:
        raise SchemaError(f"{path}: bad header {header!r}, expected {ANNOTATION_HEADER!r}")
    for row_num, row in enumerate(reader, start=2):
        if not row:
            continue
        if len(row) != 6:
            raise SchemaError(f"row {row_num}: expected 6 fields, got {len(row)}")
        video_id, frame_raw, joint, x_raw, y_raw, vis_raw = row
        try:
            frame_index = int(frame_raw)
        except ValueError:
            raise SchemaError(f"row {row_num}: bad frame index {frame_raw!r}") from None
        if frame_index < 0:
            raise SchemaError(f"row {row_num}: negative frame index {frame_index}")
        if joint not in skeleton.joints:
            raise SchemaError(f"row {row_num}: unknown joint name {joint!r}")
        dup_key = (video_id, frame_index, joint)
        if dup_key in seen_rows:
            raise SchemaError(f"row {row_num}: duplicate annotation for {dup_key}")
        seen_rows.add(dup_key)
        visible = _parse_visible(vis_raw, row_num)
        key = (video_id, frame_index)
        if key not in records:
            records[key] = AnnotationRecord.empty(video_id, frame_index, skeleton)
        rec = records[key]
        jid = skeleton.joint_index(joint)
        if not visible:
            if x_raw.strip() or y_raw.strip():
                # Coordinates on occluded joints are kept (they may encode a
                # best guess) but still validated against the native bounds.
                pass
            else:
                continue
        elif not x_raw.strip() or not y_raw.strip():
            raise SchemaError(f"row {row_num}: visible joint {joint} with empty coordinates")
        try:
            x = float(x_raw)
            y = float(y_raw)
        except ValueError:
            raise SchemaError(f"row {row_num}: bad coordinates ({x_raw!r}, {y_raw!r})") from None
        if not (0 <= x < spec.native_width and 0 <= y < spec.native_height):
            raise AnnotationValidationError(
                f"row {row_num}: ({x}, {y}) outside native bounds "
                f"{spec.native_width}x{spec.native_height}"
            )
        rec.xy[jid] = spec.to_working(x, y)
        rec.visible[jid] = visible
    return sorted(records.values(), key=lambda r: (r.video_id, r.frame_index))


def save_annotations(
    records: list[AnnotationRecord],
    path: Path | str,
    spec: FrameSpec,
    skeleton: Skeleton = DEFAULT_SKELETON,
) -> None:
    """Write records back to the canonical CSV, converting to native coordinates.

    A machine-readable skeleton description is embedded as a comment line so
    the file is self-describing.
    """
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="", encoding="utf-8") as fh:
        fh.write("# skeleton: " + json.dumps(skeleton.describe(), sort_keys=True) + "\n")
        writer = csv.writer(fh)
        writer.writerow(ANNOTATION_HEADER)
        for rec in sorted(records, key=lambda r: (r.video_id, r.frame_index)):
            for jid, joint in enumerate(skeleton.joints):
                if rec.visible[jid]:
                    x, y = spec.to_native(rec.xy[jid, 0], rec.xy[jid, 1])
                    writer.writerow(
                        [rec.video_id, rec.frame_index, joint,
                         repr(float(x)), repr(float(y)), 1]
                    )
                else:
                    writer.writerow([rec.video_id, rec.frame_index, joint, "", "", 0])


def validate_cadence(records: list[AnnotationRecord], cadence: int) -> None:
    """Check that each video's annotated frames are spaced ``cadence`` apart."""
    by_video: dict[str, list[int]] = {}
    for rec in records:
        by_video.setdefault(rec.video_id, []).append(rec.frame_index)
    for video_id, indices in by_video.items():
        indices = sorted(indices)
        gaps = {b - a for a, b in zip(indices, indices[1:])}
        if gaps - {cadence}:
            raise CadenceError(
                f"video {video_id!r}: frame spacing {sorted(gaps)} != cadence {cadence}"
            )


def make_split(
    records: list[AnnotationRecord],
    seed: int,
    min_frames: int = 3,
    cadence: int | None = 5,
    test_fraction: float = 0.25,
    validation_fraction: float = 0.20,
) -> DatasetSplit:
    """Split annotated frames per video into train / validation / test.

    The test portion is the chronologically last ``test_fraction`` of each
    video's annotated frames (so it never depends on the seed); the
    validation portion is sampled uniformly (seeded) from the remaining
    frames.  With 1000 annotated frames this yields 550/200/250.  Videos
    with fewer than ``min_frames`` annotated frames are rejected with a
    diagnostic instead of being split.
    """
    if cadence is not None:
        validate_cadence(records, cadence)
    by_video: dict[str, list[int]] = {}
    for rec in records:
        by_video.setdefault(rec.video_id, []).append(rec.frame_index)
    split = DatasetSplit()
    for video_id in sorted(by_video):
        indices = sorted(by_video[video_id])
        n = len(indices)
        if n < min_frames:
            split.rejected[video_id] = (
                f"only {n} annotated frames; at least {min_frames} needed to form one clip"
            )
            continue
        n_test = int(round(n * test_fraction))
        n_val = int(round(n * validation_fraction))
        if n_test + n_val >= n:
            split.rejected[video_id] = (
                f"{n} annotated frames leave no training frames after "
                f"{n_test} test + {n_val} validation"
            )
            continue
        test = indices[n - n_test:]
        pool = indices[: n - n_test]
        rng = np.random.default_rng([seed, zlib.crc32(video_id.encode("utf-8"))])
        val_pos = rng.choice(len(pool), size=n_val, replace=False)
        val_set = {pool[i] for i in val_pos}
        split.test[video_id] = test
        split.validation[video_id] = sorted(val_set)
        split.train[video_id] = [i for i in pool if i not in val_set]
    return split


def load_manifest(path: Path | str, check: bool = True) -> list[VideoEntry]:
    """Read the dataset manifest; paths are resolved relative to the manifest."""
    path = Path(path)
    base = path.parent
    entries: list[VideoEntry] = []
    with path.open(newline="", encoding="utf-8") as fh:
        lines = [ln for ln in fh if not ln.startswith("#")]
    reader = csv.reader(io.StringIO("".join(lines)))
    try:
        header = next(reader)
    except StopIteration:
        raise SchemaError(f"{path}: empty manifest") from None
    if header != MANIFEST_HEADER:
        raise SchemaError(f"{path}: bad manifest header {header!r}")
    for row_num, row in enumerate(reader, start=2):
        if not row:
            continue
        if len(row) != 3:
            raise SchemaError(f"{path} row {row_num}: expected 3 fields")
        video_id, frames_dir, csv_path = row
        entry = VideoEntry(video_id, base / frames_dir, base / csv_path)
        if check:
            if not entry.frames_dir.is_dir():
                raise FileNotFoundError(f"{path} row {row_num}: missing frames dir {entry.frames_dir}")
            if not entry.annotations_csv.is_file():
                raise FileNotFoundError(
                    f"{path} row {row_num}: missing annotations {entry.annotations_csv}"
                )
        entries.append(entry)
    return entries


def write_manifest(entries: list[VideoEntry], path: Path | str) -> None:
    """Write a manifest; entry paths are stored relative to the manifest."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    base = path.parent
    with path.open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(MANIFEST_HEADER)
        for entry in entries:
            writer.writerow(
                [
                    entry.video_id,
                    entry.frames_dir.relative_to(base).as_posix(),
                    entry.annotations_csv.relative_to(base).as_posix(),
                ]
            )
