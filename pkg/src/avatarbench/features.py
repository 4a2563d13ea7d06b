"""Window feature encoding shared by the learned reconstructors.

Per frame, the feature row concatenates, in this fixed order:

  1. for each tracked sparse joint (head, left wrist, right wrist):
     position (3), 6D orientation (6), linear velocity (3), angular
     velocity (3) -- 15 values per joint, 45 total;
  2. Cartesian positions for all joints, row-major (J * 3);
  3. optionally one 0/1 validity flag per joint (J).

A window feature vector is the row-wise concatenation of its frames, oldest
first, so its length is window_length * frame_dim.
"""

from __future__ import annotations

import numpy as np

from . import rotations as rot
from .skeleton import MotionClip
from .sync import FusedSequence

SPARSE_JOINT_DIM = 15


def frame_feature_dim(n_joints: int, n_tracked: int = 3, use_validity_flags: bool = True) -> int:
    return n_tracked * SPARSE_JOINT_DIM + n_joints * 3 + (n_joints if use_validity_flags else 0)


def feature_dim(window_length: int, n_joints: int, n_tracked: int = 3, use_validity_flags: bool = True) -> int:
    return window_length * frame_feature_dim(n_joints, n_tracked, use_validity_flags)


def frame_features(seq: FusedSequence, use_validity_flags: bool = True) -> np.ndarray:
    """(T, frame_dim) feature rows for an aligned sequence."""
    t = len(seq)
    k = seq.sparse_positions.shape[1]
    orient6d = rot.to_6d(seq.sparse_orientations)
    sparse = np.concatenate(
        [seq.sparse_positions, orient6d, seq.sparse_linear_velocities, seq.sparse_angular_velocities],
        axis=-1,
    ).reshape(t, k * SPARSE_JOINT_DIM)
    blocks = [sparse, seq.cartesian_positions.reshape(t, -1)]
    if use_validity_flags:
        blocks.append(seq.cartesian_valid.astype(float))
    return np.concatenate(blocks, axis=-1)


def window_features(seq: FusedSequence, window_length: int, use_validity_flags: bool = True) -> np.ndarray:
    """(T, window_length * frame_dim) features, one window ending at each frame.

    Windows are left-clamped by repeating frame 0, matching `sync.window`.
    """
    rows = frame_features(seq, use_validity_flags)
    t, d = rows.shape
    pad = np.repeat(rows[:1], window_length - 1, axis=0)
    padded = np.concatenate([pad, rows], axis=0)
    view = np.lib.stride_tricks.sliding_window_view(padded, window_length, axis=0)
    # view has shape (T, d, window_length); frames must vary slowest
    return view.transpose(0, 2, 1).reshape(t, window_length * d)


def pose_targets(clip: MotionClip) -> np.ndarray:
    """(T, 3 + 6J) regression targets: root translation plus per-joint 6D."""
    t = len(clip)
    r6 = rot.to_6d(clip.local_rotations).reshape(t, -1)
    return np.concatenate([clip.root_translations, r6], axis=-1)


def decode_pose_targets(y: np.ndarray, n_joints: int):
    """Invert `pose_targets` rows into (root translations, local quaternions).

    Degenerate 6D blocks (for example the all-zero output of an untrained
    model) decode to the identity rotation.
    """
    y = np.atleast_2d(np.asarray(y, dtype=float))
    t = y.shape[0]
    if y.shape[1] != 3 + 6 * n_joints:
        raise ValueError(f"expected {3 + 6 * n_joints} target columns, got {y.shape[1]}")
    roots = y[:, :3]
    r6 = y[:, 3:].reshape(t, n_joints, 6)
    try:
        quats = rot.from_6d(r6)
    except rot.DegenerateRotationError:
        flat = r6.reshape(-1, 6)
        quats = np.empty((flat.shape[0], 4))
        for i, block in enumerate(flat):
            try:
                quats[i] = rot.from_6d(block)
            except rot.DegenerateRotationError:
                quats[i] = rot.identity()
        quats = quats.reshape(t, n_joints, 4)
    return roots, quats
