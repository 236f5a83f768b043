"""Synthetic puppet sequences: geometry, occlusion, noise, dataset layout."""

import math

import numpy as np
import pytest

from limbpose.clips import ClipConfig, build_clips
from limbpose.data import FrameSpec, load_annotations, load_manifest, make_split
from limbpose.skeleton import DEFAULT_SKELETON
from limbpose.synth import (
    CHALLENGE_KINDS,
    PuppetConfig,
    challenge_variants,
    generate_sequence,
    pose_from_angles,
    render_pose,
    write_dataset,
)

SK = DEFAULT_SKELETON
FAST = PuppetConfig(n_frames=6, seed=3)


def _native_joints(record, spec):
    out = {}
    for jid, name in enumerate(SK.joints):
        x, y = record.xy[jid]
        out[name] = spec.to_native(x, y)
    return out


class TestPuppetConfig:
    def test_defaults_validate(self):
        cfg = PuppetConfig()
        assert cfg.spec.native_width == 640
        assert cfg.limb_lengths("right-arm") == (70.0, 60.0)
        assert cfg.limb_lengths("left-leg") == (70.0, 60.0)

    def test_limb_depths_are_distinct_and_in_front_of_torso(self):
        cfg = PuppetConfig()
        depths = [cfg.limb_depth(limb) for limb in SK.limbs]
        assert len(set(depths)) == 4
        assert all(d < cfg.body_depth for d in depths)
        assert depths == [1040, 980, 920, 860]

    def test_reach_validation(self):
        with pytest.raises(ValueError, match="reach"):
            PuppetConfig(upper_arm=300.0)
        with pytest.raises(ValueError, match="torso"):
            PuppetConfig(torso_width=700.0)

    def test_parameter_validation(self):
        with pytest.raises(ValueError):
            PuppetConfig(n_frames=0)
        with pytest.raises(ValueError):
            PuppetConfig(occlusion_prob=1.5)
        with pytest.raises(ValueError):
            PuppetConfig(noise_amp=-1.0)
        with pytest.raises(ValueError):
            PuppetConfig(body_depth=2000, background_depth=1800)
        with pytest.raises(ValueError):
            PuppetConfig(depth_gap=300)


class TestGeometry:
    def test_segment_lengths_match_config(self):
        cfg = FAST
        seq = generate_sequence(cfg)
        for rec in seq.records:
            joints = _native_joints(rec, cfg.spec)
            for limb in SK.limbs:
                distal, middle, proximal = SK.limb_joints[limb]
                l1, l2 = cfg.limb_lengths(limb)
                assert math.dist(joints[proximal], joints[middle]) == pytest.approx(
                    l1, abs=0.5
                )
                assert math.dist(joints[middle], joints[distal]) == pytest.approx(
                    l2, abs=0.5
                )

    def test_pose_from_angles_inline_arm(self):
        cfg = PuppetConfig()
        angles = {limb: (math.pi / 2, 0.0) for limb in SK.limbs}
        joints = pose_from_angles(cfg, angles)
        # A zero relative angle puts all three joints on one straight line.
        rs, re, rw = joints["RS"], joints["RE"], joints["RW"]
        assert re[0] == pytest.approx(rs[0])
        assert rw[0] == pytest.approx(rs[0])
        assert re[1] - rs[1] == pytest.approx(cfg.upper_arm)
        assert rw[1] - re[1] == pytest.approx(cfg.forearm)

    def test_frames_are_native_uint16(self):
        seq = generate_sequence(FAST)
        assert seq.frames.shape == (6, 480, 640)
        assert seq.frames.dtype == np.uint16

    def test_frame_indices_follow_cadence(self):
        seq = generate_sequence(PuppetConfig(n_frames=4, cadence=5))
        assert [r.frame_index for r in seq.records] == [0, 5, 10, 15]

    def test_motion_stays_within_angle_bounds(self):
        cfg = PuppetConfig(n_frames=30, angle_step=0.5, seed=9)
        seq = generate_sequence(cfg)
        for rec in seq.records:
            joints = _native_joints(rec, cfg.spec)
            x, y = joints["RW"]
            assert 0 <= x < 640 and 0 <= y < 480


class TestRendering:
    def test_depth_levels_present(self):
        cfg = FAST
        seq = generate_sequence(PuppetConfig(n_frames=1, noise_amp=0.0, seed=3))
        frame = seq.frames[0]
        present = set(np.unique(frame))
        assert cfg.background_depth in present
        assert cfg.body_depth in present
        for limb in SK.limbs:
            assert cfg.limb_depth(limb) in present

    def test_nearest_surface_wins(self):
        cfg = PuppetConfig(n_frames=1, noise_amp=0.0)
        seq = generate_sequence(cfg)
        rec = seq.records[0]
        joints = _native_joints(rec, cfg.spec)
        rendered = render_pose(cfg, joints)
        np.testing.assert_array_equal(seq.frames[0], rendered.astype(np.uint16))
        # Every pixel equals one of the five surface depths or background.
        allowed = {cfg.background_depth, cfg.body_depth} | {
            cfg.limb_depth(limb) for limb in SK.limbs
        }
        assert set(np.unique(rendered)) <= set(float(v) for v in allowed)

    def test_joint_pixels_carry_their_limb_depth(self):
        cfg = PuppetConfig(n_frames=1, noise_amp=0.0)
        seq = generate_sequence(cfg)
        joints = _native_joints(seq.records[0], cfg.spec)
        frame = seq.frames[0]
        for limb in SK.limbs:
            for name in SK.limb_joints[limb]:
                x, y = joints[name]
                assert frame[int(round(y)), int(round(x))] <= cfg.limb_depth(limb)


class TestDeterminismAndVisibility:
    def test_bitwise_deterministic(self):
        a = generate_sequence(PuppetConfig(n_frames=5, seed=17))
        b = generate_sequence(PuppetConfig(n_frames=5, seed=17))
        np.testing.assert_array_equal(a.frames, b.frames)
        for ra, rb in zip(a.records, b.records):
            np.testing.assert_array_equal(ra.xy, rb.xy)
            np.testing.assert_array_equal(ra.visible, rb.visible)
        c = generate_sequence(PuppetConfig(n_frames=5, seed=18))
        assert not np.array_equal(a.frames, c.frames)

    def test_default_pose_fully_visible(self):
        seq = generate_sequence(PuppetConfig(n_frames=8, seed=1))
        for rec in seq.records:
            assert rec.visible.all()

    def test_occlusion_probability_one_hides_everything(self):
        seq = generate_sequence(PuppetConfig(n_frames=3, occlusion_prob=1.0))
        for rec in seq.records:
            assert not rec.visible.any()


class TestChallenges:
    def test_kinds_catalogue(self):
        assert CHALLENGE_KINDS == ("self-occlusion", "external-occlusion", "noise-burst")
        with pytest.raises(ValueError, match="unknown challenge"):
            challenge_variants(FAST, "motion-blur")

    def test_self_occlusion_crosses_arms_and_hides_joints(self):
        cfg = PuppetConfig(n_frames=8, seed=2)
        seq = challenge_variants(cfg, "self-occlusion")
        assert seq.kind == "self-occlusion"
        crossed = 0
        hidden_arm_joints = 0
        arm_ids = [SK.joint_index(n) for n in ("RS", "RE", "RW", "LS", "LE", "LW")]
        for rec in seq.records:
            joints = _native_joints(rec, cfg.spec)
            if joints["RW"][0] > joints["LW"][0]:
                crossed += 1
            hidden_arm_joints += sum(1 for j in arm_ids if not rec.visible[j])
        assert crossed > 0
        assert hidden_arm_joints > 0

    def test_external_occlusion_hides_right_wrist_in_middle_third(self):
        cfg = PuppetConfig(n_frames=9, seed=4)
        seq = challenge_variants(cfg, "external-occlusion")
        assert seq.affected_frames == [3, 4, 5]
        rw = SK.joint_index("RW")
        for i, rec in enumerate(seq.records):
            if i in seq.affected_frames:
                assert not rec.visible[rw]
            else:
                assert rec.visible[rw]

    def test_external_occluder_is_nearer_than_every_limb(self):
        cfg = PuppetConfig(n_frames=9, seed=4, noise_amp=0.0)
        seq = challenge_variants(cfg, "external-occlusion")
        i = seq.affected_frames[0]
        joints = _native_joints(seq.records[i], cfg.spec)
        x, y = joints["RW"]
        depth = seq.frames[i][int(round(y)), int(round(x))]
        assert depth == cfg.body_depth - 5 * cfg.depth_gap

    def test_noise_burst_variance_ratio(self):
        cfg = PuppetConfig(n_frames=9, seed=5)
        seq = challenge_variants(cfg, "noise-burst")
        assert seq.affected_frames == [3, 4, 5]
        ratios = {}
        for group in ("affected", "calm"):
            variances = []
            for i, rec in enumerate(seq.records):
                if (i in seq.affected_frames) != (group == "affected"):
                    continue
                clean = render_pose(cfg, _native_joints(rec, cfg.spec))
                residual = seq.frames[i].astype(np.float64) - clean
                variances.append(residual.var())
            ratios[group] = np.mean(variances)
        assert ratios["affected"] > 4.0 * ratios["calm"]

    def test_plain_sequence_has_no_affected_frames(self):
        seq = generate_sequence(FAST)
        assert seq.kind is None
        assert seq.affected_frames == []


class TestDatasetOutput:
    def test_written_dataset_round_trips(self, tmp_path):
        spec = FrameSpec()
        sequences = [
            generate_sequence(PuppetConfig(n_frames=6, seed=31), video_id="synth-000"),
            challenge_variants(
                PuppetConfig(n_frames=6, seed=32), "noise-burst", video_id="synth-001"
            ),
        ]
        manifest = write_dataset(tmp_path, sequences, spec)
        assert manifest == tmp_path / "manifest.csv"
        entries = load_manifest(manifest)
        assert [e.video_id for e in entries] == ["synth-000", "synth-001"]
        records = load_annotations(entries[0].annotations_csv, spec)
        assert len(records) == 6
        orig = sequences[0].records
        for loaded, src in zip(records, orig):
            np.testing.assert_array_equal(loaded.visible, src.visible)
            vis = src.visible
            np.testing.assert_allclose(loaded.xy[vis], src.xy[vis], atol=1e-9)
        clips = build_clips(records, entries[0].frames_dir, spec, ClipConfig())
        assert len(clips) == 4
        split = make_split(records, seed=0, min_frames=3)
        assert len(split.test["synth-000"]) == 2  # round(6 * 0.25)
