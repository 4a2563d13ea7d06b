"""Procedural motion generator for tests, demos, and benchmark corpora.

Produces smooth, band-limited full-body motion: each joint swings through a
seeded sum of sinusoids while the root follows a closed loop inside the
default camera rig's view. No capture data is required or redistributed.
"""

from __future__ import annotations

import numpy as np

from . import rotations as rot
from .skeleton import MotionClip, Skeleton, smpl_body_skeleton

# Per-joint swing amplitude caps (radians) for the canonical 22-joint body.
# Limbs move a lot, the spine a little.
_AMPLITUDE = {
    "pelvis": 0.25,
    "left_hip": 0.55,
    "right_hip": 0.55,
    "spine1": 0.12,
    "left_knee": 0.7,
    "right_knee": 0.7,
    "spine2": 0.12,
    "left_ankle": 0.35,
    "right_ankle": 0.35,
    "spine3": 0.1,
    "left_foot": 0.25,
    "right_foot": 0.25,
    "neck": 0.2,
    "left_collar": 0.12,
    "right_collar": 0.12,
    "head": 0.3,
    "left_shoulder": 0.6,
    "right_shoulder": 0.6,
    "left_elbow": 0.7,
    "right_elbow": 0.7,
    "left_wrist": 0.4,
    "right_wrist": 0.4,
}
_DEFAULT_AMPLITUDE = 0.4
_HARMONICS = 3


def synthetic_clip(
    name: str = "synthetic",
    duration: float = 10.0,
    framerate: float = 60.0,
    seed: int = 0,
    skeleton: Skeleton | None = None,
    travel_radius: float = 0.5,
    pelvis_height: float = 0.95,
) -> MotionClip:
    """Deterministic synthetic motion clip.

    The root circles the capture-volume center at `travel_radius` with a
    gentle vertical bob and yaw sway; every joint oscillates about a random
    axis mix with joint-specific amplitude. Identical arguments always give
    a bit-identical clip.
    """
    skeleton = skeleton if skeleton is not None else smpl_body_skeleton()
    rng = np.random.default_rng(seed)
    n = max(2, int(round(duration * framerate)))
    t = np.arange(n) / framerate

    j = skeleton.n_joints
    amp_cap = np.array([_AMPLITUDE.get(nm, _DEFAULT_AMPLITUDE) for nm in skeleton.joint_names])
    amps = rng.uniform(0.3, 1.0, size=(j, 3, _HARMONICS)) * amp_cap[:, None, None]
    amps /= _HARMONICS
    freqs = rng.uniform(0.2, 1.3, size=(j, 3, _HARMONICS))
    phases = rng.uniform(0.0, 2.0 * np.pi, size=(j, 3, _HARMONICS))

    # angles: (T, J, 3) rotation-vector components
    arg = 2.0 * np.pi * freqs[None] * t[:, None, None, None] + phases[None]
    angles = np.sum(amps[None] * np.sin(arg), axis=-1)
    quats = rot.from_rotvec(angles.reshape(n * j, 3)).reshape(n, j, 4)

    loop_period = max(duration, 8.0)
    phi = 2.0 * np.pi * t / loop_period + rng.uniform(0.0, 2.0 * np.pi)
    roots = np.stack(
        [
            travel_radius * np.cos(phi),
            pelvis_height + 0.03 * np.sin(2.0 * np.pi * 0.9 * t),
            travel_radius * np.sin(phi),
        ],
        axis=-1,
    )

    return MotionClip(skeleton, framerate, roots, quats, name=name)


def synthetic_corpus(
    n_clips: int, duration: float, framerate: float = 60.0, seed: int = 0
) -> list[MotionClip]:
    """A list of independent synthetic clips sharing the canonical skeleton."""
    return [
        synthetic_clip(name=f"synthetic_{k:02d}", duration=duration, framerate=framerate, seed=seed + k)
        for k in range(n_clips)
    ]
