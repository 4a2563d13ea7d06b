"""Quaternion algebra and rotation representation conversions.

Quaternions are float64 arrays of shape (..., 4), stored w-first, with the
canonical sign convention w >= 0. All functions broadcast over leading axes.
The 6D representation is the first two columns of the rotation matrix,
flattened column-major: (m00, m10, m20, m01, m11, m21).
"""

from __future__ import annotations

import numpy as np

_UNIT_TOL = 1e-6


class DegenerateRotationError(ValueError):
    """Raised when an input cannot be interpreted as a rotation."""


def identity(shape: tuple = ()) -> np.ndarray:
    q = np.zeros(shape + (4,))
    q[..., 0] = 1.0
    return q


def normalize(q) -> np.ndarray:
    q = np.asarray(q, dtype=float)
    norm = np.linalg.norm(q, axis=-1, keepdims=True)
    if np.any(norm < 1e-12):
        raise DegenerateRotationError("zero-norm quaternion")
    return q / norm


def canonicalize(q) -> np.ndarray:
    """Flip signs so w >= 0; q and -q denote the same rotation."""
    q = np.asarray(q, dtype=float)
    return np.where(q[..., :1] < 0.0, -q, q)


def check_unit(q, tol: float = _UNIT_TOL) -> np.ndarray:
    """Validate near-unit norm (within `tol`) and renormalize.

    Entries already unit to within 1e-12 pass through bit-unchanged, so the
    check is idempotent and round-trip safe.
    """
    q = np.asarray(q, dtype=float)
    norm = np.linalg.norm(q, axis=-1)
    deviation = np.abs(norm - 1.0)
    if np.any(deviation > tol):
        raise DegenerateRotationError(
            f"quaternion norm deviates from 1 by {float(np.max(deviation)):g}"
        )
    if np.all(deviation <= 1e-12):
        return q
    return np.where(deviation[..., None] > 1e-12, q / norm[..., None], q)


def multiply(a, b) -> np.ndarray:
    """Hamilton product a * b (apply b first, then a)."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    aw, ax, ay, az = (a[..., i] for i in range(4))
    bw, bx, by, bz = (b[..., i] for i in range(4))
    return np.stack(
        [
            aw * bw - ax * bx - ay * by - az * bz,
            aw * bx + ax * bw + ay * bz - az * by,
            aw * by - ax * bz + ay * bw + az * bx,
            aw * bz + ax * by - ay * bx + az * bw,
        ],
        axis=-1,
    )


def conjugate(q) -> np.ndarray:
    q = np.asarray(q, dtype=float)
    out = q.copy()
    out[..., 1:] = -out[..., 1:]
    return out


def rotate(q, v) -> np.ndarray:
    """Rotate vectors v (..., 3) by quaternions q (..., 4)."""
    q = np.asarray(q, dtype=float)
    v = np.asarray(v, dtype=float)
    u = q[..., 1:]
    w = q[..., :1]
    uv = np.cross(u, v)
    return v + 2.0 * (w * uv + np.cross(u, uv))


def from_rotvec(v) -> np.ndarray:
    """Exponential map: rotation vector (axis * angle, radians) to quaternion."""
    v = np.asarray(v, dtype=float)
    angle = np.linalg.norm(v, axis=-1, keepdims=True)
    half = 0.5 * angle
    # sinc form is stable near zero angle
    small = angle < 1e-8
    scale = np.where(small, 0.5 - angle**2 / 48.0, np.sin(half) / np.where(small, 1.0, angle))
    q = np.concatenate([np.cos(half), scale * v], axis=-1)
    return q


def to_rotvec(q) -> np.ndarray:
    """Logarithmic map: quaternion to rotation vector, angle in [0, pi]."""
    q = canonicalize(np.asarray(q, dtype=float))
    w = np.clip(q[..., :1], -1.0, 1.0)
    xyz = q[..., 1:]
    norm = np.linalg.norm(xyz, axis=-1, keepdims=True)
    angle = 2.0 * np.arctan2(norm, w)
    small = norm < 1e-12
    scale = np.where(small, 2.0, angle / np.where(small, 1.0, norm))
    return scale * xyz


def to_matrix(q) -> np.ndarray:
    q = np.asarray(q, dtype=float)
    w, x, y, z = (q[..., i] for i in range(4))
    xx, yy, zz = x * x, y * y, z * z
    xy, xz, yz = x * y, x * z, y * z
    wx, wy, wz = w * x, w * y, w * z
    m = np.empty(q.shape[:-1] + (3, 3))
    m[..., 0, 0] = 1.0 - 2.0 * (yy + zz)
    m[..., 0, 1] = 2.0 * (xy - wz)
    m[..., 0, 2] = 2.0 * (xz + wy)
    m[..., 1, 0] = 2.0 * (xy + wz)
    m[..., 1, 1] = 1.0 - 2.0 * (xx + zz)
    m[..., 1, 2] = 2.0 * (yz - wx)
    m[..., 2, 0] = 2.0 * (xz - wy)
    m[..., 2, 1] = 2.0 * (yz + wx)
    m[..., 2, 2] = 1.0 - 2.0 * (xx + yy)
    return m


def from_matrix(m) -> np.ndarray:
    """Convert rotation matrices (..., 3, 3) to canonical quaternions.

    Uses the branch on the largest of the four squared components, which is
    numerically stable for all rotations.
    """
    m = np.asarray(m, dtype=float)
    m00, m11, m22 = m[..., 0, 0], m[..., 1, 1], m[..., 2, 2]
    sq = np.stack(
        [
            1.0 + m00 + m11 + m22,
            1.0 + m00 - m11 - m22,
            1.0 - m00 + m11 - m22,
            1.0 - m00 - m11 + m22,
        ],
        axis=-1,
    )
    best = np.argmax(sq, axis=-1)
    # r = 2 * |largest quaternion component|; off-diagonal terms divide by 4q = 2r
    r = np.sqrt(np.maximum(np.take_along_axis(sq, best[..., None], axis=-1), 0.0))[..., 0]
    inv = 0.5 / np.where(r < 1e-12, 1.0, r)

    a01 = m[..., 2, 1] - m[..., 1, 2]
    a02 = m[..., 0, 2] - m[..., 2, 0]
    a03 = m[..., 1, 0] - m[..., 0, 1]
    s12 = m[..., 1, 0] + m[..., 0, 1]
    s13 = m[..., 0, 2] + m[..., 2, 0]
    s23 = m[..., 2, 1] + m[..., 1, 2]

    half = 0.5 * r
    cand = np.empty(m.shape[:-2] + (4, 4))
    cand[..., 0, 0] = half
    cand[..., 0, 1] = a01 * inv
    cand[..., 0, 2] = a02 * inv
    cand[..., 0, 3] = a03 * inv
    cand[..., 1, 0] = a01 * inv
    cand[..., 1, 1] = half
    cand[..., 1, 2] = s12 * inv
    cand[..., 1, 3] = s13 * inv
    cand[..., 2, 0] = a02 * inv
    cand[..., 2, 1] = s12 * inv
    cand[..., 2, 2] = half
    cand[..., 2, 3] = s23 * inv
    cand[..., 3, 0] = a03 * inv
    cand[..., 3, 1] = s13 * inv
    cand[..., 3, 2] = s23 * inv
    cand[..., 3, 3] = half

    idx = best[..., None, None]
    q = np.take_along_axis(cand, np.broadcast_to(idx, idx.shape[:-2] + (1, 4)), axis=-2)[..., 0, :]
    return canonicalize(normalize(q))


def to_6d(q) -> np.ndarray:
    """First two rotation-matrix columns, flattened as (m00,m10,m20,m01,m11,m21)."""
    m = to_matrix(q)
    return np.concatenate([m[..., :, 0], m[..., :, 1]], axis=-1)


def from_6d(r6) -> np.ndarray:
    """Gram-Schmidt two 3-vectors back into a quaternion.

    Raises DegenerateRotationError when the columns are (near) parallel or a
    column is (near) zero.
    """
    r6 = np.asarray(r6, dtype=float)
    a = r6[..., :3]
    b = r6[..., 3:]
    na = np.linalg.norm(a, axis=-1, keepdims=True)
    if np.any(na < 1e-8):
        raise DegenerateRotationError("degenerate 6D rotation: first column near zero")
    x = a / na
    b_perp = b - np.sum(x * b, axis=-1, keepdims=True) * x
    nb = np.linalg.norm(b_perp, axis=-1, keepdims=True)
    if np.any(nb < 1e-8):
        raise DegenerateRotationError("degenerate 6D rotation: columns near parallel")
    y = b_perp / nb
    z = np.cross(x, y)
    m = np.stack([x, y, z], axis=-1)
    return from_matrix(m)


def geodesic_deg(a, b) -> np.ndarray | float:
    """Geodesic angle between rotations in degrees, in [0, 180].

    Evaluates 2*acos(|<a, b>|) in its atan2 form, which stays accurate for
    near-identical rotations. Inputs whose norm deviates from 1 by less than
    1e-6 are renormalized; larger deviations raise DegenerateRotationError.
    """
    a = check_unit(a)
    b = check_unit(b)
    rel = multiply(conjugate(a), b)
    sin_half = np.linalg.norm(rel[..., 1:], axis=-1)
    cos_half = np.abs(rel[..., 0])
    angle = 2.0 * np.arctan2(sin_half, cos_half)
    out = np.degrees(angle)
    return float(out) if out.ndim == 0 else out


def random_unit(rng: np.random.Generator, shape: tuple = ()) -> np.ndarray:
    """Uniform random rotations (normalized 4D Gaussians)."""
    q = rng.standard_normal(shape + (4,))
    return canonicalize(normalize(q))
