"""Kinematic tree, poses, motion clips, and forward kinematics.

Conventions: meters and seconds internally, y-up, quaternions w-first.
A pose is a root translation plus one local rotation per joint; forward
kinematics chains them into global joint positions and orientations.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import rotations as rot


class SkeletonError(ValueError):
    """Structural problem with a skeleton, pose, or clip."""


@dataclass
class Skeleton:
    """Topologically sorted joint tree.

    Attributes
    ----------
    joint_names : list[str]
        One identifier per joint.
    parents : np.ndarray
        (J,) int; parents[0] == -1 marks the single root, parents[i] < i.
    rest_offsets : np.ndarray
        (J, 3) float, meters, each joint's offset in its parent's frame.
        The root offset is the zero vector.
    """

    joint_names: list[str]
    parents: np.ndarray
    rest_offsets: np.ndarray

    def __post_init__(self):
        self.parents = np.asarray(self.parents, dtype=int)
        self.rest_offsets = np.asarray(self.rest_offsets, dtype=float)
        j = len(self.joint_names)
        if j < 1:
            raise SkeletonError("skeleton needs at least one joint")
        if self.parents.shape != (j,) or self.rest_offsets.shape != (j, 3):
            raise SkeletonError("joint_names, parents, and rest_offsets disagree in length")
        if self.parents[0] != -1 or np.count_nonzero(self.parents == -1) != 1:
            raise SkeletonError("exactly one root expected at index 0")
        if j > 1 and not np.all(self.parents[1:] < np.arange(1, j)):
            raise SkeletonError("parents must be topologically sorted (parent index < joint index)")
        if not np.all(self.rest_offsets[0] == 0.0):
            raise SkeletonError("root rest offset must be zero")
        if not np.all(np.isfinite(self.rest_offsets)):
            raise SkeletonError("non-finite rest offset")
        if len(set(self.joint_names)) != j:
            raise SkeletonError("duplicate joint names")

    @property
    def n_joints(self) -> int:
        return len(self.joint_names)

    def index(self, name: str) -> int:
        try:
            return self.joint_names.index(name)
        except ValueError:
            raise SkeletonError(f"no joint named {name!r}") from None

    def children(self, j: int) -> list[int]:
        return [int(c) for c in np.nonzero(self.parents == j)[0]]

    def chain_to_root(self, j: int) -> list[int]:
        """Joint indices from j up to and including the root."""
        chain = [j]
        while self.parents[chain[-1]] >= 0:
            chain.append(int(self.parents[chain[-1]]))
        return chain

    def strict_ancestor_mask(self) -> np.ndarray:
        """(J, J) bool: mask[a, j] is True when a is a strict ancestor of j."""
        j = self.n_joints
        mask = np.zeros((j, j), dtype=bool)
        for k in range(1, j):
            p = self.parents[k]
            mask[p, k] = True
            mask[:, k] |= mask[:, p]
        return mask


@dataclass
class Pose:
    """Root translation (m) plus one unit quaternion per joint (w-first)."""

    root_translation: np.ndarray
    local_rotations: np.ndarray

    def __post_init__(self):
        self.root_translation = np.asarray(self.root_translation, dtype=float).reshape(3)
        q = np.asarray(self.local_rotations, dtype=float)
        if q.ndim != 2 or q.shape[1] != 4:
            raise SkeletonError("local_rotations must have shape (J, 4)")
        if not (np.all(np.isfinite(q)) and np.all(np.isfinite(self.root_translation))):
            raise SkeletonError("non-finite pose")
        self.local_rotations = rot.check_unit(q)

    @property
    def n_joints(self) -> int:
        return self.local_rotations.shape[0]

    @classmethod
    def identity(cls, n_joints: int) -> "Pose":
        return cls(np.zeros(3), rot.identity((n_joints,)))


@dataclass
class MotionClip:
    """Fixed-rate pose sequence over one skeleton.

    root_translations: (T, 3) m; local_rotations: (T, J, 4) unit w-first.
    """

    skeleton: Skeleton
    framerate: float
    root_translations: np.ndarray
    local_rotations: np.ndarray
    name: str = "clip"

    def __post_init__(self):
        self.root_translations = np.asarray(self.root_translations, dtype=float)
        q = np.asarray(self.local_rotations, dtype=float)
        j = self.skeleton.n_joints
        if self.framerate <= 0:
            raise SkeletonError("framerate must be positive")
        if self.root_translations.ndim != 2 or self.root_translations.shape[1] != 3:
            raise SkeletonError("root_translations must have shape (T, 3)")
        t = self.root_translations.shape[0]
        if t < 1:
            raise SkeletonError("clip must contain at least one frame")
        if q.shape != (t, j, 4):
            raise SkeletonError(f"local_rotations must have shape ({t}, {j}, 4)")
        if not (np.all(np.isfinite(q)) and np.all(np.isfinite(self.root_translations))):
            raise SkeletonError("non-finite clip data")
        self.local_rotations = rot.check_unit(q)

    def __len__(self) -> int:
        return self.root_translations.shape[0]

    @property
    def duration(self) -> float:
        return len(self) / self.framerate

    @property
    def timestamps(self) -> np.ndarray:
        return np.arange(len(self)) / self.framerate

    def pose(self, t: int) -> Pose:
        return Pose(self.root_translations[t].copy(), self.local_rotations[t].copy())

    @classmethod
    def from_poses(cls, skeleton: Skeleton, framerate: float, poses, name: str = "clip") -> "MotionClip":
        poses = list(poses)
        return cls(
            skeleton,
            framerate,
            np.stack([p.root_translation for p in poses]),
            np.stack([p.local_rotations for p in poses]),
            name=name,
        )


# Canonical 22-joint full-body tree in SMPL body order (pelvis root; legs,
# spine, neck/head, collars/arms). Left is +x, y is up.
SMPL_JOINT_NAMES = (
    "pelvis",
    "left_hip",
    "right_hip",
    "spine1",
    "left_knee",
    "right_knee",
    "spine2",
    "left_ankle",
    "right_ankle",
    "spine3",
    "left_foot",
    "right_foot",
    "neck",
    "left_collar",
    "right_collar",
    "head",
    "left_shoulder",
    "right_shoulder",
    "left_elbow",
    "right_elbow",
    "left_wrist",
    "right_wrist",
)

SMPL_PARENTS = (-1, 0, 0, 0, 1, 2, 3, 4, 5, 6, 7, 8, 9, 9, 9, 12, 13, 14, 16, 17, 18, 19)

_DEFAULT_OFFSETS = np.array(
    [
        [0.00, 0.00, 0.00],   # pelvis
        [0.09, -0.06, 0.00],  # left_hip
        [-0.09, -0.06, 0.00],  # right_hip
        [0.00, 0.11, 0.00],   # spine1
        [0.00, -0.38, 0.00],  # left_knee
        [0.00, -0.38, 0.00],  # right_knee
        [0.00, 0.13, 0.00],   # spine2
        [0.00, -0.40, 0.00],  # left_ankle
        [0.00, -0.40, 0.00],  # right_ankle
        [0.00, 0.05, 0.00],   # spine3
        [0.00, -0.06, 0.13],  # left_foot
        [0.00, -0.06, 0.13],  # right_foot
        [0.00, 0.21, 0.00],   # neck
        [0.07, 0.12, 0.00],   # left_collar
        [-0.07, 0.12, 0.00],  # right_collar
        [0.00, 0.09, 0.00],   # head
        [0.10, 0.02, 0.00],   # left_shoulder
        [-0.10, 0.02, 0.00],  # right_shoulder
        [0.26, 0.00, 0.00],   # left_elbow
        [-0.26, 0.00, 0.00],  # right_elbow
        [0.25, 0.00, 0.00],   # left_wrist
        [-0.25, 0.00, 0.00],  # right_wrist
    ]
)


def smpl_body_skeleton(rest_offsets: np.ndarray | None = None) -> Skeleton:
    """The canonical 22-joint body skeleton, optionally with custom offsets."""
    offsets = _DEFAULT_OFFSETS if rest_offsets is None else np.asarray(rest_offsets, dtype=float)
    return Skeleton(list(SMPL_JOINT_NAMES), np.array(SMPL_PARENTS), offsets.copy())


def _fk_arrays(parents: np.ndarray, offsets: np.ndarray, root_t: np.ndarray, locals_q: np.ndarray):
    """FK over raw arrays; root_t (..., 3), locals_q (..., J, 4) -> same-layout outputs."""
    j = len(parents)
    positions = np.empty(locals_q.shape[:-1] + (3,))
    globals_q = np.empty_like(locals_q)
    positions[..., 0, :] = root_t
    globals_q[..., 0, :] = locals_q[..., 0, :]
    for k in range(1, j):
        p = parents[k]
        gq = rot.multiply(globals_q[..., p, :], locals_q[..., k, :])
        globals_q[..., k, :] = gq / np.linalg.norm(gq, axis=-1, keepdims=True)
        positions[..., k, :] = positions[..., p, :] + rot.rotate(globals_q[..., p, :], offsets[k])
    return positions, globals_q


def forward_kinematics(skeleton: Skeleton, pose: Pose):
    """Global joint positions (J, 3) and orientations (J, 4) for one pose."""
    if pose.n_joints != skeleton.n_joints:
        raise SkeletonError(
            f"pose has {pose.n_joints} joints, skeleton has {skeleton.n_joints}"
        )
    return _fk_arrays(skeleton.parents, skeleton.rest_offsets, pose.root_translation, pose.local_rotations)


def forward_kinematics_clip(clip: MotionClip):
    """Global joint positions (T, J, 3) and orientations (T, J, 4) for a clip."""
    return _fk_arrays(
        clip.skeleton.parents, clip.skeleton.rest_offsets, clip.root_translations, clip.local_rotations
    )


def joint_velocities(clip: MotionClip) -> np.ndarray:
    """Per-frame global joint velocities (T, J, 3), m/s.

    Backward differences scaled by the framerate; the first frame is zero.
    """
    positions, _ = forward_kinematics_clip(clip)
    v = np.zeros_like(positions)
    v[1:] = (positions[1:] - positions[:-1]) * clip.framerate
    return v
