"""Fixed joint/connection topology of the 12-joint limb model.

Four limbs, each a chain of 3 joints (distal - middle - proximal) tied by
2 connections, for a total of 12 joints and 8 connections.  Every module
that produces or consumes per-joint map channels relies on the channel
order defined here: joint channels 0-11 in declared joint order, then
connection channels 12-19 in declared connection order.
"""

from __future__ import annotations

from dataclasses import dataclass, field

JOINT_NAMES: tuple[str, ...] = (
    "RS", "RE", "RW",  # right shoulder, elbow, wrist
    "LS", "LE", "LW",  # left shoulder, elbow, wrist
    "RH", "RK", "RA",  # right hip, knee, ankle
    "LH", "LK", "LA",  # left hip, knee, ankle
)

CONNECTION_NAMES: tuple[tuple[str, str], ...] = (
    ("RW", "RE"),
    ("RE", "RS"),
    ("LS", "LE"),
    ("LE", "LW"),
    ("RA", "RK"),
    ("RK", "RH"),
    ("LH", "LK"),
    ("LK", "LA"),
)

# limb -> joints ordered distal, middle, proximal
LIMB_JOINTS: dict[str, tuple[str, str, str]] = {
    "right-arm": ("RW", "RE", "RS"),
    "left-arm": ("LW", "LE", "LS"),
    "right-leg": ("RA", "RK", "RH"),
    "left-leg": ("LA", "LK", "LH"),
}

LIMB_NAMES: tuple[str, ...] = tuple(LIMB_JOINTS)


@dataclass(frozen=True)
class Skeleton:
    """Immutable 12-joint / 8-connection limb topology.

    Safe for unrestricted concurrent reads.  ``joints`` and ``connections``
    fix the channel-order convention for all 20-channel map stacks.
    """

    joints: tuple[str, ...] = JOINT_NAMES
    connections: tuple[tuple[str, str], ...] = CONNECTION_NAMES
    limb_joints: dict[str, tuple[str, str, str]] = field(
        default_factory=lambda: dict(LIMB_JOINTS)
    )

    def __post_init__(self):
        if len(self.joints) != len(set(self.joints)):
            raise ValueError("duplicate joint names")
        seen: set[str] = set()
        for limb, names in self.limb_joints.items():
            if len(names) != 3:
                raise ValueError(f"limb {limb!r} must have exactly 3 joints")
            seen.update(names)
        if seen != set(self.joints):
            raise ValueError("limbs must partition the joint set")
        for a, b in self.connections:
            if self.limb_of(self.joint_index(a)) != self.limb_of(self.joint_index(b)):
                raise ValueError(f"connection {a}-{b} crosses limbs")

    @property
    def num_joints(self) -> int:
        return len(self.joints)

    @property
    def num_connections(self) -> int:
        return len(self.connections)

    @property
    def num_channels(self) -> int:
        """Total map channels per frame: one per joint plus one per connection."""
        return self.num_joints + self.num_connections

    @property
    def limbs(self) -> tuple[str, ...]:
        return tuple(self.limb_joints)

    def joint_index(self, name: str) -> int:
        """Channel index of a joint name; stable across runs."""
        try:
            return self.joints.index(name)
        except ValueError:
            raise ValueError(f"unknown joint name {name!r}") from None

    def connection_endpoints(self, cid: int) -> tuple[int, int]:
        """Ordered (joint index, joint index) endpoints of connection ``cid``."""
        if not 0 <= cid < self.num_connections:
            raise IndexError(f"connection index {cid} out of range [0, {self.num_connections})")
        a, b = self.connections[cid]
        return self.joint_index(a), self.joint_index(b)

    def limb_of(self, jid: int) -> str:
        """Name of the unique limb that joint ``jid`` belongs to."""
        if not 0 <= jid < self.num_joints:
            raise IndexError(f"joint index {jid} out of range [0, {self.num_joints})")
        name = self.joints[jid]
        for limb, names in self.limb_joints.items():
            if name in names:
                return limb
        raise AssertionError("unreachable: limbs partition the joints")

    def limb_joint_indices(self, limb: str) -> tuple[int, int, int]:
        """Joint indices of a limb, ordered distal, middle, proximal."""
        if limb not in self.limb_joints:
            raise ValueError(f"unknown limb {limb!r}")
        return tuple(self.joint_index(n) for n in self.limb_joints[limb])

    def limb_connection_ids(self, limb: str) -> tuple[int, int]:
        """Connection ids of a limb, ordered distal-first."""
        distal, middle, proximal = self.limb_joint_indices(limb)
        dist_conn = prox_conn = None
        for cid in range(self.num_connections):
            ends = set(self.connection_endpoints(cid))
            if ends == {distal, middle}:
                dist_conn = cid
            elif ends == {middle, proximal}:
                prox_conn = cid
        assert dist_conn is not None and prox_conn is not None
        return dist_conn, prox_conn

    def joint_channel(self, jid: int) -> int:
        if not 0 <= jid < self.num_joints:
            raise IndexError(f"joint index {jid} out of range")
        return jid

    def connection_channel(self, cid: int) -> int:
        if not 0 <= cid < self.num_connections:
            raise IndexError(f"connection index {cid} out of range")
        return self.num_joints + cid

    def describe(self) -> dict:
        """Machine-readable topology, embedded in checkpoints and annotation files."""
        return {
            "joints": list(self.joints),
            "connections": [list(pair) for pair in self.connections],
            "limbs": {limb: list(names) for limb, names in self.limb_joints.items()},
        }


DEFAULT_SKELETON = Skeleton()

# Overlay colours (BGR), one per limb, used when drawing estimated poses.
LIMB_COLORS: dict[str, tuple[int, int, int]] = {
    "right-arm": (0, 0, 255),
    "left-arm": (0, 200, 255),
    "right-leg": (0, 200, 0),
    "left-leg": (255, 80, 0),
}
