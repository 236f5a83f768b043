"""Clip windowing over annotated depth videos."""

import numpy as np
import pytest

from limbpose.clips import (
    ClipConfig,
    DepthClip,
    InsufficientFramesError,
    build_clips,
    count_clips,
    window_starts,
)
from limbpose.data import FrameSpec, save_depth_frame
from tests.test_data import _make_records


def oracle_starts(n_frames: int, window: int, stride: int) -> list[int]:
    """Walk the sequence and collect every start whose window fits."""
    starts = []
    s = 0
    while s + window <= n_frames:
        starts.append(s)
        s += stride
    return starts


class TestClipConfig:
    def test_defaults(self):
        cfg = ClipConfig()
        assert (cfg.window, cfg.overlap, cfg.cadence) == (3, 2, 5)
        assert cfg.stride == 1

    def test_stride_is_window_minus_overlap(self):
        assert ClipConfig(window=5, overlap=2).stride == 3
        assert ClipConfig(window=4, overlap=0).stride == 4

    def test_validation(self):
        with pytest.raises(ValueError):
            ClipConfig(window=0)
        with pytest.raises(ValueError):
            ClipConfig(window=3, overlap=3)
        with pytest.raises(ValueError):
            ClipConfig(window=3, overlap=-1)
        with pytest.raises(ValueError):
            ClipConfig(cadence=0)

    def test_clip_duration_half_second(self):
        # 3 annotated frames spaced 5 apart at 30 fps span 0.5 s.
        spec = FrameSpec()
        assert ClipConfig().clip_duration(spec.fps) == pytest.approx(0.5)


class TestWindowStarts:
    def test_matches_walk_oracle(self):
        for n in range(1, 21):
            for window in range(1, 6):
                for overlap in range(0, window):
                    stride = window - overlap
                    if n < window:
                        with pytest.raises(InsufficientFramesError):
                            window_starts(n, ClipConfig(window=window, overlap=overlap))
                        continue
                    got = window_starts(n, ClipConfig(window=window, overlap=overlap))
                    assert got == oracle_starts(n, window, stride), (n, window, overlap)

    def test_default_config_count_for_550_frames(self):
        assert len(window_starts(550, ClipConfig())) == 548
        assert count_clips(550, ClipConfig()) == 548

    def test_non_overlapping_eval_windows(self):
        cfg = ClipConfig(window=3, overlap=0)
        assert window_starts(152, cfg) == list(range(0, 150, 3))
        assert count_clips(152, cfg) == 50


class TestBuildClips:
    def _video_on_disk(self, tmp_path, n=6):
        frames_dir = tmp_path / "frames"
        frames_dir.mkdir()
        rng = np.random.default_rng(7)
        records = _make_records("v0", n=n)
        pixels = {}
        for rec in records:
            frame = rng.integers(400, 2200, size=(480, 640)).astype(np.uint16)
            save_depth_frame(frames_dir / f"frame_{rec.frame_index:06d}.png", frame)
            pixels[rec.frame_index] = frame
        return frames_dir, records, pixels

    def test_positional_windows_over_annotated_frames(self, tmp_path):
        frames_dir, records, pixels = self._video_on_disk(tmp_path, n=6)
        spec = FrameSpec(width=640, height=480)
        clips = build_clips(records, frames_dir, spec, ClipConfig())
        assert len(clips) == 4
        for ci, clip in enumerate(clips):
            assert clip.video_id == "v0"
            assert clip.frame_indices == [r.frame_index for r in records[ci : ci + 3]]
            for t, rec in enumerate(clip.records):
                assert rec.frame_index == records[ci + t].frame_index
                src = pixels[rec.frame_index]
                np.testing.assert_allclose(
                    clip.frames[t], src - src.mean(), atol=1e-6
                )

    def test_eval_overlap_zero(self, tmp_path):
        frames_dir, records, _ = self._video_on_disk(tmp_path, n=9)
        spec = FrameSpec(width=640, height=480)
        clips = build_clips(records, frames_dir, spec, ClipConfig(overlap=0))
        assert [c.frame_indices[0] for c in clips] == [0, 15, 30]

    def test_too_few_frames(self, tmp_path):
        frames_dir, records, _ = self._video_on_disk(tmp_path, n=2)
        spec = FrameSpec(width=640, height=480)
        with pytest.raises(InsufficientFramesError, match="v0"):
            build_clips(records, frames_dir, spec, ClipConfig())

    def test_mixed_videos_rejected(self, tmp_path):
        frames_dir, records, _ = self._video_on_disk(tmp_path, n=4)
        records[1] = type(records[1])(
            video_id="other",
            frame_index=records[1].frame_index,
            xy=records[1].xy,
            visible=records[1].visible,
        )
        with pytest.raises(ValueError, match="multiple videos"):
            build_clips(records, frames_dir, FrameSpec(width=640, height=480), ClipConfig())

    def test_records_sorted_before_windowing(self, tmp_path):
        frames_dir, records, _ = self._video_on_disk(tmp_path, n=4)
        spec = FrameSpec(width=640, height=480)
        forward = build_clips(records, frames_dir, spec, ClipConfig())
        shuffled = build_clips(records[::-1], frames_dir, spec, ClipConfig())
        assert [c.frame_indices for c in forward] == [c.frame_indices for c in shuffled]

    def test_to_input_layout(self, tmp_path):
        frames_dir, records, _ = self._video_on_disk(tmp_path, n=3)
        spec = FrameSpec()
        (clip,) = build_clips(records, frames_dir, spec, ClipConfig())
        x = clip.to_input()
        assert x.shape == (1, 3, 96, 128)
        assert x.dtype == np.float32
        np.testing.assert_allclose(x[0], clip.frames.astype(np.float32), atol=1e-6)

    def test_depth_clip_requires_matching_lengths(self):
        records = _make_records("v0", n=3)
        with pytest.raises(ValueError, match="record"):
            DepthClip("v0", np.zeros((2, 4, 4)), records)
