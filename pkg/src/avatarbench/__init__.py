"""Benchmark harness for full-body avatar pose reconstruction.

Simulates the two tracking modalities of a VR rig (sparse head/hand signals
and camera-derived 3D joint positions), corrupts the camera stream with
seeded latency / framerate / occlusion / noise artifacts, reconstructs
full-body poses with pluggable estimators, and scores the damage with
MPJPE / MPJRE / MPJVE sweeps.
"""

__version__ = "0.1.0"

from .skeleton import (  # noqa: F401
    MotionClip,
    Pose,
    Skeleton,
    SkeletonError,
    forward_kinematics,
    forward_kinematics_clip,
    joint_velocities,
    smpl_body_skeleton,
)
