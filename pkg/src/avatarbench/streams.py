"""Timestamped sensor streams derived from ground-truth motion.

Two modalities feed reconstruction: the sparse head/hand tracking signal
(positions, orientations, linear and angular velocities) and a per-joint 3D
Cartesian stream with a validity mask. Invalid Cartesian joints carry the
zero position, mirroring how occluded detections are zeroed downstream.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import rotations as rot
from .skeleton import MotionClip, SkeletonError, forward_kinematics_clip

TRACKED_JOINTS = ("head", "left_wrist", "right_wrist")


class StreamError(ValueError):
    """Structural problem with a stream (lengths, rates, or timestamps)."""


def _uniform_timestamps(timestamps, framerate: float) -> np.ndarray:
    timestamps = np.asarray(timestamps, dtype=float)
    if timestamps.ndim != 1:
        raise StreamError("timestamps must be one-dimensional")
    if len(timestamps) > 1:
        spacing = np.diff(timestamps)
        if np.any(spacing <= 0):
            raise StreamError("timestamps must be strictly increasing")
        if not np.allclose(spacing, 1.0 / framerate, rtol=1e-9, atol=1e-9):
            raise StreamError("timestamps must be uniformly spaced at 1/framerate")
    return timestamps


@dataclass
class SparseSample:
    """One tracked-joint sample; arrays are indexed by TRACKED_JOINTS order."""

    timestamp: float
    positions: np.ndarray          # (3, 3) m
    orientations: np.ndarray       # (3, 4) unit, w-first, global
    linear_velocities: np.ndarray  # (3, 3) m/s
    angular_velocities: np.ndarray  # (3, 3) rad/s, global frame


@dataclass
class SparseStream:
    """Fixed-rate head + hands tracking stream."""

    timestamps: np.ndarray
    positions: np.ndarray           # (T, 3, 3)
    orientations: np.ndarray        # (T, 3, 4)
    linear_velocities: np.ndarray   # (T, 3, 3)
    angular_velocities: np.ndarray  # (T, 3, 3)
    framerate: float

    def __post_init__(self):
        self.timestamps = _uniform_timestamps(self.timestamps, self.framerate)
        t = len(self.timestamps)
        k = len(TRACKED_JOINTS)
        for field_name, shape in (
            ("positions", (t, k, 3)),
            ("orientations", (t, k, 4)),
            ("linear_velocities", (t, k, 3)),
            ("angular_velocities", (t, k, 3)),
        ):
            arr = np.asarray(getattr(self, field_name), dtype=float)
            if arr.shape != shape:
                raise StreamError(f"{field_name} must have shape {shape}, got {arr.shape}")
            setattr(self, field_name, arr)
        self.orientations = rot.check_unit(self.orientations)

    def __len__(self) -> int:
        return len(self.timestamps)

    def sample(self, t: int) -> SparseSample:
        return SparseSample(
            float(self.timestamps[t]),
            self.positions[t],
            self.orientations[t],
            self.linear_velocities[t],
            self.angular_velocities[t],
        )


@dataclass
class CartesianStream:
    """Fixed-rate per-joint 3D positions with a validity mask.

    Invalid joints always carry the zero position; the constructor enforces
    the convention.
    """

    timestamps: np.ndarray
    positions: np.ndarray  # (T, J, 3) m
    valid: np.ndarray      # (T, J) bool
    framerate: float

    def __post_init__(self):
        self.timestamps = _uniform_timestamps(self.timestamps, self.framerate)
        self.positions = np.asarray(self.positions, dtype=float)
        self.valid = np.asarray(self.valid, dtype=bool)
        t = len(self.timestamps)
        if self.positions.ndim != 3 or self.positions.shape[0] != t or self.positions.shape[2] != 3:
            raise StreamError(f"positions must have shape (T, J, 3), got {self.positions.shape}")
        if self.valid.shape != self.positions.shape[:2]:
            raise StreamError("valid mask shape must match positions")
        if self.positions.size and not np.all(np.isfinite(self.positions[self.valid])):
            raise StreamError("non-finite valid position")
        if not np.all(self.valid):
            self.positions = np.where(self.valid[..., None], self.positions, 0.0)

    def __len__(self) -> int:
        return len(self.timestamps)

    @property
    def n_joints(self) -> int:
        return self.positions.shape[1]

    def replace(self, positions=None, valid=None) -> "CartesianStream":
        return CartesianStream(
            self.timestamps.copy(),
            self.positions.copy() if positions is None else positions,
            self.valid.copy() if valid is None else valid,
            self.framerate,
        )


def derive_sparse_stream(clip: MotionClip) -> SparseStream:
    """Head/hands tracking signal from ground truth.

    Positions and global orientations come straight from forward kinematics.
    Linear velocity is the backward difference times the framerate; angular
    velocity is the frame-to-frame relative rotation as an axis-angle rate,
    expressed in the global frame. First-frame velocities are zero.
    """
    try:
        idx = [clip.skeleton.index(name) for name in TRACKED_JOINTS]
    except SkeletonError as exc:
        raise SkeletonError(f"sparse stream needs joints {TRACKED_JOINTS}: {exc}") from exc
    positions_all, orientations_all = forward_kinematics_clip(clip)
    positions = positions_all[:, idx]
    orientations = rot.canonicalize(orientations_all[:, idx])

    lin = np.zeros_like(positions)
    lin[1:] = (positions[1:] - positions[:-1]) * clip.framerate

    ang = np.zeros_like(positions)
    if len(clip) > 1:
        # q_t * conj(q_{t-1}) is the global-frame relative rotation; its
        # rotation vector over dt is the angular velocity.
        relative = rot.multiply(orientations[1:], rot.conjugate(orientations[:-1]))
        ang[1:] = rot.to_rotvec(relative) * clip.framerate

    return SparseStream(clip.timestamps, positions, orientations, lin, ang, clip.framerate)


def ground_truth_cartesian(clip: MotionClip) -> CartesianStream:
    """All-joint Cartesian stream taken directly from forward kinematics."""
    positions, _ = forward_kinematics_clip(clip)
    valid = np.ones(positions.shape[:2], dtype=bool)
    return CartesianStream(clip.timestamps, positions, valid, clip.framerate)
