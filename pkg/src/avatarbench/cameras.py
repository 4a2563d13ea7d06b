"""Pinhole cameras, synthetic keypoint detection, and two-view triangulation.

The synthetic detector stands in for an image-space keypoint network: it
projects ground-truth joints into each virtual view, adds isotropic Gaussian
pixel noise, and drops joints at a configurable miss probability. Two views
are then fused by homogeneous DLT triangulation (SVD of the stacked 4x4
system), which recovers noiseless projections exactly.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import rotations as rot
from .skeleton import MotionClip, forward_kinematics_clip
from .streams import CartesianStream, StreamError

_MIN_DEPTH = 1e-6
_MIN_BASELINE = 1e-6
_RANK_RATIO = 1e-10


class DegenerateGeometryError(ValueError):
    """Triangulation geometry does not determine a single finite point."""


@dataclass
class CameraModel:
    """Pinhole camera: intrinsics in pixels, pose as camera-to-world."""

    fx: float
    fy: float
    cx: float
    cy: float
    width: int = 640
    height: int = 480
    rotation: np.ndarray = field(default_factory=rot.identity)  # camera-to-world quat
    center: np.ndarray = field(default_factory=lambda: np.zeros(3))  # world, m

    def __post_init__(self):
        if self.fx <= 0 or self.fy <= 0:
            raise ValueError("focal lengths must be positive")
        if not (0 <= self.cx < self.width and 0 <= self.cy < self.height):
            raise ValueError("principal point must lie inside the image")
        self.rotation = rot.check_unit(np.asarray(self.rotation, dtype=float).reshape(4))
        self.center = np.asarray(self.center, dtype=float).reshape(3)

    @classmethod
    def look_at(
        cls,
        position,
        target,
        up=(0.0, 1.0, 0.0),
        fx: float = 500.0,
        fy: float = 500.0,
        cx: float = 320.0,
        cy: float = 240.0,
        width: int = 640,
        height: int = 480,
    ) -> "CameraModel":
        """Camera at `position` with its +z axis pointed at `target`."""
        position = np.asarray(position, dtype=float)
        z = np.asarray(target, dtype=float) - position
        nz = np.linalg.norm(z)
        if nz < 1e-9:
            raise ValueError("camera position coincides with its target")
        z = z / nz
        x = np.cross(np.asarray(up, dtype=float), z)
        nx = np.linalg.norm(x)
        if nx < 1e-9:
            raise ValueError("view direction parallel to the up vector")
        x = x / nx
        y = np.cross(z, x)
        quat = rot.from_matrix(np.stack([x, y, z], axis=-1))
        return cls(fx, fy, cx, cy, width, height, quat, position)

    def world_to_camera(self, points) -> np.ndarray:
        points = np.asarray(points, dtype=float)
        return rot.rotate(rot.conjugate(self.rotation), points - self.center)

    def projection_matrix(self) -> np.ndarray:
        """3x4 matrix mapping homogeneous world points to pixel rays."""
        k = np.array([[self.fx, 0.0, self.cx], [0.0, self.fy, self.cy], [0.0, 0.0, 1.0]])
        r_t = rot.to_matrix(self.rotation).T
        return k @ np.hstack([r_t, (-r_t @ self.center)[:, None]])


def project_points(camera: CameraModel, points) -> tuple[np.ndarray, np.ndarray]:
    """Project world points (..., 3) to pixels (..., 2) plus a visibility mask.

    Points at or behind the camera plane (depth <= 1e-6 m) are not visible
    and get pixel (0, 0). Pixels may land outside the image bounds; they are
    kept and stay visible.
    """
    cam = camera.world_to_camera(points)
    z = cam[..., 2]
    visible = z > _MIN_DEPTH
    safe_z = np.where(visible, z, 1.0)
    u = camera.fx * cam[..., 0] / safe_z + camera.cx
    v = camera.fy * cam[..., 1] / safe_z + camera.cy
    pixels = np.where(visible[..., None], np.stack([u, v], axis=-1), 0.0)
    return pixels, visible


def project_point(camera: CameraModel, point) -> tuple[np.ndarray, bool]:
    pixels, visible = project_points(camera, np.asarray(point, dtype=float))
    return pixels, bool(visible)


def _dlt_rows(p: np.ndarray, pixels: np.ndarray) -> np.ndarray:
    """Two DLT rows per observation: u*p3 - p1 and v*p3 - p2."""
    u = pixels[..., 0:1]
    v = pixels[..., 1:2]
    return np.stack([u * p[2] - p[0], v * p[2] - p[1]], axis=-2)


def triangulate_points(
    cam_a: CameraModel, cam_b: CameraModel, px_a, px_b
) -> tuple[np.ndarray, np.ndarray]:
    """Batched DLT triangulation of pixel pairs (..., 2).

    Returns (points (..., 3), ok mask). Entries are not ok when the stacked
    system is rank-deficient (ambiguous solution direction) or the solution
    lies at infinity; `triangulate_point` raises for those instead.
    """
    if np.linalg.norm(cam_a.center - cam_b.center) < _MIN_BASELINE:
        raise DegenerateGeometryError("camera centers coincide (baseline below 1e-6 m)")
    px_a = np.asarray(px_a, dtype=float)
    px_b = np.asarray(px_b, dtype=float)
    a = np.concatenate(
        [_dlt_rows(cam_a.projection_matrix(), px_a), _dlt_rows(cam_b.projection_matrix(), px_b)],
        axis=-2,
    )
    _, s, vt = np.linalg.svd(a)
    x = vt[..., -1, :]
    # a one-dimensional nullspace needs the third singular value well above zero
    rank_ok = s[..., 2] > _RANK_RATIO * np.maximum(s[..., 0], 1e-300)
    w = x[..., 3]
    finite = np.abs(w) > 1e-12 * np.linalg.norm(x, axis=-1)
    ok = rank_ok & finite
    safe_w = np.where(ok, w, 1.0)
    return x[..., :3] / safe_w[..., None], ok


def triangulate_point(cam_a: CameraModel, cam_b: CameraModel, px_a, px_b) -> np.ndarray:
    point, ok = triangulate_points(cam_a, cam_b, px_a, px_b)
    if not np.all(ok):
        raise DegenerateGeometryError("rays are near-parallel or the point lies at infinity")
    return point


@dataclass
class Detection2D:
    """Per-joint pixel keypoints for one frame."""

    timestamp: float
    pixels: np.ndarray   # (J, 2)
    visible: np.ndarray  # (J,)


@dataclass
class DetectionStream:
    """Fixed-rate 2D keypoint detections from one camera."""

    timestamps: np.ndarray
    pixels: np.ndarray   # (T, J, 2)
    visible: np.ndarray  # (T, J) bool
    framerate: float

    def __len__(self) -> int:
        return len(self.timestamps)

    def frame(self, t: int) -> Detection2D:
        return Detection2D(float(self.timestamps[t]), self.pixels[t], self.visible[t])


def synthesize_detections(
    clip: MotionClip,
    camera: CameraModel,
    pixel_noise_std: float = 0.0,
    miss_prob: float = 0.0,
    seed: int = 0,
) -> DetectionStream:
    """Project ground-truth joints into one view with noise and dropouts.

    Randomness is drawn from a per-frame child of SeedSequence(seed), so the
    stream for any frame depends only on (seed, frame index) and parallel
    per-frame evaluation matches serial output bit-exactly.
    """
    if not 0.0 <= miss_prob <= 1.0:
        raise ValueError("miss_prob must lie in [0, 1]")
    if pixel_noise_std < 0.0:
        raise ValueError("pixel_noise_std must be nonnegative")
    positions, _ = forward_kinematics_clip(clip)
    pixels, visible = project_points(camera, positions)
    n, j = visible.shape
    if pixel_noise_std > 0.0 or miss_prob > 0.0:
        for t in range(n):
            g = np.random.default_rng(np.random.SeedSequence(entropy=seed, spawn_key=(t,)))
            if pixel_noise_std > 0.0:
                pixels[t] += np.where(
                    visible[t, :, None], g.normal(0.0, pixel_noise_std, size=(j, 2)), 0.0
                )
            if miss_prob > 0.0:
                visible[t] &= g.random(j) >= miss_prob
    pixels = np.where(visible[..., None], pixels, 0.0)
    return DetectionStream(clip.timestamps, pixels, visible, clip.framerate)


def reconstruct_cartesian_stream(
    det_a: DetectionStream,
    det_b: DetectionStream,
    cam_a: CameraModel,
    cam_b: CameraModel,
) -> CartesianStream:
    """Triangulate joints seen in both views; others become invalid zeros."""
    if len(det_a) != len(det_b):
        raise StreamError(f"detection streams differ in length: {len(det_a)} vs {len(det_b)}")
    if det_a.framerate != det_b.framerate:
        raise StreamError("detection streams differ in framerate")
    if len(det_a) and not np.allclose(det_a.timestamps, det_b.timestamps, atol=1e-9):
        raise StreamError("detection streams are not time-aligned")
    both = det_a.visible & det_b.visible
    positions = np.zeros(both.shape + (3,))
    valid = np.zeros_like(both)
    if np.any(both):
        points, ok = triangulate_points(cam_a, cam_b, det_a.pixels[both], det_b.pixels[both])
        positions[both] = np.where(ok[:, None], points, 0.0)
        valid[both] = ok
    return CartesianStream(det_a.timestamps.copy(), positions, valid, det_a.framerate)


def default_rig(center=(0.0, 1.0, 0.0), distance: float = 3.0, height: float = 2.5):
    """Two 640x480 cameras, 90 degrees apart, converging on the volume center.

    The published experiments never state their rig, so this default is a
    documented, fully configurable choice rather than a reproduction.
    """
    center = np.asarray(center, dtype=float)
    cam_a = CameraModel.look_at(center + np.array([distance, height - center[1], 0.0]), center)
    cam_b = CameraModel.look_at(center + np.array([0.0, height - center[1], distance]), center)
    return cam_a, cam_b
