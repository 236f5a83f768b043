"""Assembling limb poses from predicted confidence maps.

Per frame: non-maximum suppression on each joint channel yields a short
candidate list per joint; each connection then picks the candidate pair
maximizing the line integral of its connection channel; the two
connections of a limb share the middle joint, with disagreements settled
in favor of the higher integral.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import kernels
from .skeleton import DEFAULT_SKELETON, Skeleton


@dataclass(frozen=True)
class LinkerConfig:
    """Candidate extraction and matching parameters."""

    window: int = 5
    threshold: float = 0.3
    top_k: int = 4
    n_samples: int = 32

    def __post_init__(self):
        if self.window < 1 or self.window % 2 == 0:
            raise ValueError("NMS window must be an odd integer >= 1")
        if not 0.0 <= self.threshold <= 1.0:
            raise ValueError("threshold must be in [0, 1]")
        if self.top_k < 1:
            raise ValueError("top_k must be >= 1")
        if self.n_samples < 2:
            raise ValueError("n_samples must be >= 2")


@dataclass(frozen=True)
class JointCandidate:
    """One local maximum of a joint confidence map."""

    joint: int
    x: float
    y: float
    score: float


@dataclass(frozen=True)
class ConnectionLink:
    """A matched candidate pair for one connection with its integral score."""

    connection: int
    a: JointCandidate
    b: JointCandidate
    score: float


@dataclass
class PoseEstimate:
    """Linked pose for one frame: positions (or None) for the 12 joints."""

    joints: list[tuple[float, float] | None]
    joint_scores: list[float | None]
    links: list[ConnectionLink | None]
    skeleton: Skeleton = field(default=DEFAULT_SKELETON, repr=False)

    def limb_triple(self, limb: str) -> list[tuple[float, float] | None]:
        """Positions of a limb's (distal, middle, proximal) joints."""
        return [self.joints[j] for j in self.skeleton.limb_joint_indices(limb)]

    def describe(self) -> dict:
        """JSON-ready form: per joint {x, y, score} or null, plus limb triples."""
        joints = {}
        for jid, name in enumerate(self.skeleton.joints):
            if self.joints[jid] is None:
                joints[name] = None
            else:
                x, y = self.joints[jid]
                joints[name] = {"x": x, "y": y, "score": self.joint_scores[jid]}
        limbs = {
            limb: [
                None if p is None else [p[0], p[1]]
                for p in self.limb_triple(limb)
            ]
            for limb in self.skeleton.limbs
        }
        return {"joints": joints, "limbs": limbs}


def nms(values: np.ndarray, window: int = 5, threshold: float = 0.3, joint: int = 0) -> list[JointCandidate]:
    """Strict local maxima of a 2-D map, sorted by descending score.

    A pixel survives when no neighbor in its window is larger and no equal
    neighbor precedes it in row-major order; equal-scoring survivors keep
    row-major order among themselves.
    """
    if window < 1 or window % 2 == 0:
        raise ValueError("NMS window must be an odd integer >= 1")
    if not 0.0 <= threshold <= 1.0:
        raise ValueError("threshold must be in [0, 1]")
    values = np.asarray(values, dtype=np.float64)
    mask = kernels.local_maxima_mask(values, window, threshold)
    rows, cols = np.nonzero(mask)
    if len(rows) == 0:
        return []
    scores = values[rows, cols]
    order = np.lexsort((cols, rows, -scores))
    return [
        JointCandidate(joint, float(cols[i]), float(rows[i]), float(scores[i]))
        for i in order
    ]


def line_integral(
    conn_map: np.ndarray, a: tuple[float, float], b: tuple[float, float], n_samples: int = 32
) -> float:
    """Mean of bilinear samples of the map along segment ab.

    The mean (not the sum) keeps the score independent of segment length.
    Coincident endpoints degrade to the map value at that point.
    """
    if n_samples < 2:
        raise ValueError("n_samples must be >= 2")
    return float(
        kernels.line_integral(
            np.asarray(conn_map, dtype=np.float64), a[0], a[1], b[0], b[1], n_samples
        )
    )


def bipartite_match(
    cands_a: list[JointCandidate],
    cands_b: list[JointCandidate],
    conn_map: np.ndarray,
    n_samples: int = 32,
) -> tuple[JointCandidate, JointCandidate, float] | None:
    """Candidate pair maximizing the connection-map line integral.

    Ties go to the pair with the higher combined candidate score, then to
    the lowest (a, b) index pair.  Returns None when either list is empty.
    """
    if not cands_a or not cands_b:
        return None
    conn_map = np.asarray(conn_map, dtype=np.float64)
    best = None
    best_key = None
    for ia, ca in enumerate(cands_a):
        for ib, cb in enumerate(cands_b):
            score = line_integral(conn_map, (ca.x, ca.y), (cb.x, cb.y), n_samples)
            key = (score, ca.score + cb.score, -ia, -ib)
            if best_key is None or key > best_key:
                best_key = key
                best = (ca, cb, score)
    return best


def estimate_pose(
    conf_stack,
    config: LinkerConfig = LinkerConfig(),
    skeleton: Skeleton = DEFAULT_SKELETON,
) -> list[PoseEstimate]:
    """Link one pose per frame of a confidence-map stack.

    ``conf_stack`` is a map stack or a raw (H, W, T, 20) array.  Frames
    are processed independently.  Joints with no NMS candidates are
    missing; joints whose connections could not be matched fall back to
    their top-scoring candidate.
    """
    values = getattr(conf_stack, "values", conf_stack)
    values = np.asarray(values, dtype=np.float64)
    if values.ndim != 4 or values.shape[3] != skeleton.num_channels:
        raise ValueError(
            f"expected (H, W, T, {skeleton.num_channels}) confidence values, "
            f"got shape {values.shape}"
        )
    return [
        _estimate_frame(values[:, :, t, :], config, skeleton)
        for t in range(values.shape[2])
    ]


def _estimate_frame(frame: np.ndarray, config: LinkerConfig, skeleton: Skeleton) -> PoseEstimate:
    candidates: list[list[JointCandidate]] = []
    for jid in range(skeleton.num_joints):
        cands = nms(
            frame[:, :, skeleton.joint_channel(jid)],
            config.window,
            config.threshold,
            joint=jid,
        )
        candidates.append(cands[: config.top_k])

    chosen: list[JointCandidate | None] = [None] * skeleton.num_joints
    links: list[ConnectionLink | None] = [None] * skeleton.num_connections

    for limb in skeleton.limbs:
        cid_distal, cid_proximal = skeleton.limb_connection_ids(limb)
        link_d = _match_connection(frame, candidates, cid_distal, config, skeleton)
        link_p = _match_connection(frame, candidates, cid_proximal, config, skeleton)
        _, middle, _ = skeleton.limb_joint_indices(limb)
        if link_d is not None and link_p is not None:
            mid_d = _endpoint_of(link_d, middle, skeleton)
            mid_p = _endpoint_of(link_p, middle, skeleton)
            if (mid_d.x, mid_d.y) != (mid_p.x, mid_p.y):
                # The two connections disagree on the shared middle joint;
                # the higher integral wins and the loser is rematched with
                # the middle pinned to the winner's choice.
                if link_d.score >= link_p.score:
                    link_p = _match_connection(
                        frame, candidates, cid_proximal, config, skeleton, pin={middle: mid_d}
                    )
                else:
                    link_d = _match_connection(
                        frame, candidates, cid_distal, config, skeleton, pin={middle: mid_p}
                    )
        for link, cid in ((link_d, cid_distal), (link_p, cid_proximal)):
            links[cid] = link
            if link is not None:
                for cand in (link.a, link.b):
                    chosen[cand.joint] = cand

    for jid, cands in enumerate(candidates):
        if chosen[jid] is None and cands:
            chosen[jid] = cands[0]

    return PoseEstimate(
        joints=[None if c is None else (c.x, c.y) for c in chosen],
        joint_scores=[None if c is None else c.score for c in chosen],
        links=links,
        skeleton=skeleton,
    )


def _endpoint_of(link: ConnectionLink, joint: int, skeleton: Skeleton) -> JointCandidate:
    return link.a if link.a.joint == joint else link.b


def _match_connection(
    frame: np.ndarray,
    candidates: list[list[JointCandidate]],
    cid: int,
    config: LinkerConfig,
    skeleton: Skeleton,
    pin: dict[int, JointCandidate] | None = None,
) -> ConnectionLink | None:
    ja, jb = skeleton.connection_endpoints(cid)
    cands_a = [pin[ja]] if pin and ja in pin else candidates[ja]
    cands_b = [pin[jb]] if pin and jb in pin else candidates[jb]
    conn_map = frame[:, :, skeleton.connection_channel(cid)]
    match = bipartite_match(cands_a, cands_b, conn_map, config.n_samples)
    if match is None or match[2] <= 0.0:
        # A non-positive integral means the map carries no evidence for any
        # candidate pair; report the connection as unmatched.
        return None
    return ConnectionLink(cid, match[0], match[1], match[2])


def poses_to_json(
    poses: list[PoseEstimate], frame_indices: list[int], video_id: str
) -> dict:
    """Pose list as a JSON-ready dict keyed by frame index."""
    if len(poses) != len(frame_indices):
        raise ValueError("one frame index per pose is required")
    return {
        "video_id": video_id,
        "frames": {
            str(idx): pose.describe() for idx, pose in zip(frame_indices, poses)
        },
    }
