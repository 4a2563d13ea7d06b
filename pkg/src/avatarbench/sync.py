"""Fusion of the two tracking modalities onto the sparse (HMD) clock.

The sparse stream is the master clock: for every sparse sample, `align`
attaches the most recent Cartesian sample whose timestamp does not exceed it
(zero-order hold). Sparse frames that precede the first Cartesian sample get
that first sample and are flagged `clamped`, since causality cannot be
satisfied there. Staleness (timestamp - source timestamp) is reported per
frame and is nonnegative on every non-clamped frame.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .streams import CartesianStream, SparseSample, SparseStream, StreamError


@dataclass
class FusedFrame:
    """One sparse sample paired with its held Cartesian payload."""

    timestamp: float
    sparse: SparseSample
    cartesian_positions: np.ndarray  # (J, 3)
    cartesian_valid: np.ndarray      # (J,)
    source_timestamp: float
    clamped: bool

    @property
    def staleness(self) -> float:
        return self.timestamp - self.source_timestamp


@dataclass
class FusedSequence:
    """Aligned frames as flat arrays, indexable into FusedFrame views."""

    timestamps: np.ndarray            # (T,)
    sparse_positions: np.ndarray      # (T, K, 3)
    sparse_orientations: np.ndarray   # (T, K, 4)
    sparse_linear_velocities: np.ndarray
    sparse_angular_velocities: np.ndarray
    cartesian_positions: np.ndarray   # (T, J, 3)
    cartesian_valid: np.ndarray       # (T, J)
    source_timestamps: np.ndarray     # (T,)
    clamped: np.ndarray               # (T,) bool
    framerate: float

    def __len__(self) -> int:
        return len(self.timestamps)

    @property
    def n_joints(self) -> int:
        return self.cartesian_positions.shape[1]

    @property
    def staleness(self) -> np.ndarray:
        return self.timestamps - self.source_timestamps

    def __getitem__(self, t: int) -> FusedFrame:
        sample = SparseSample(
            float(self.timestamps[t]),
            self.sparse_positions[t],
            self.sparse_orientations[t],
            self.sparse_linear_velocities[t],
            self.sparse_angular_velocities[t],
        )
        return FusedFrame(
            float(self.timestamps[t]),
            sample,
            self.cartesian_positions[t],
            self.cartesian_valid[t],
            float(self.source_timestamps[t]),
            bool(self.clamped[t]),
        )

    def take(self, indices) -> "FusedWindow":
        indices = np.asarray(indices, dtype=int)
        return FusedWindow(
            self.timestamps[indices],
            self.sparse_positions[indices],
            self.sparse_orientations[indices],
            self.sparse_linear_velocities[indices],
            self.sparse_angular_velocities[indices],
            self.cartesian_positions[indices],
            self.cartesian_valid[indices],
            self.source_timestamps[indices],
            self.clamped[indices],
            self.framerate,
        )


class FusedWindow(FusedSequence):
    """A fixed-length reconstruction window; the last frame is current."""

    @property
    def current(self) -> FusedFrame:
        return self[len(self) - 1]


def align(sparse: SparseStream, cartesian: CartesianStream) -> FusedSequence:
    """Pair every sparse sample with the latest available Cartesian sample."""
    if len(sparse) == 0:
        raise StreamError("sparse stream is empty")
    if len(cartesian) == 0:
        raise StreamError("cartesian stream is empty")
    # latest cartesian index with timestamp <= sparse timestamp (plus slack
    # for float rounding of nominally equal clocks)
    idx = np.searchsorted(cartesian.timestamps, sparse.timestamps + 1e-12, side="right") - 1
    clamped = idx < 0
    idx = np.maximum(idx, 0)
    return FusedSequence(
        sparse.timestamps.copy(),
        sparse.positions,
        sparse.orientations,
        sparse.linear_velocities,
        sparse.angular_velocities,
        cartesian.positions[idx],
        cartesian.valid[idx],
        cartesian.timestamps[idx],
        clamped,
        sparse.framerate,
    )


def window(frames: FusedSequence, t: int, length: int = 41) -> FusedWindow:
    """Frames [t - length + 1, t], left-clamped by repeating frame 0."""
    if length < 1:
        raise ValueError("window length must be >= 1")
    if not 0 <= t < len(frames):
        raise IndexError(f"frame index {t} outside sequence of length {len(frames)}")
    indices = np.maximum(np.arange(t - length + 1, t + 1), 0)
    return frames.take(indices)
