import numpy as np
import pytest

from avatarbench import rotations as rot
from avatarbench.skeleton import MotionClip, Skeleton, smpl_body_skeleton


@pytest.fixture
def rng():
    return np.random.default_rng(20240917)


@pytest.fixture(scope="session")
def body():
    return smpl_body_skeleton()


def random_clip(skeleton, n_frames, framerate=60.0, seed=0, name="random"):
    """Unconstrained random clip: i.i.d. uniform rotations, small random root path."""
    g = np.random.default_rng(seed)
    quats = rot.random_unit(g, (n_frames, skeleton.n_joints))
    roots = g.normal(scale=0.3, size=(n_frames, 3))
    return MotionClip(skeleton, framerate, roots, quats, name=name)


@pytest.fixture
def chain2():
    return Skeleton(["root", "child"], np.array([-1, 0]), np.array([[0.0, 0.0, 0.0], [0.0, 0.5, 0.0]]))
