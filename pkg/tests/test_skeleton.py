import numpy as np
import pytest
from scipy.spatial.transform import Rotation as R

from avatarbench import rotations as rot
from avatarbench.skeleton import (
    MotionClip,
    Pose,
    Skeleton,
    SkeletonError,
    forward_kinematics,
    forward_kinematics_clip,
    joint_velocities,
    smpl_body_skeleton,
)
from conftest import random_clip


def fk_matrix_oracle(skeleton, pose):
    """Independent FK via chained 4x4 homogeneous matrices (scipy rotations)."""
    j = skeleton.n_joints
    transforms = np.zeros((j, 4, 4))
    positions = np.zeros((j, 3))
    quats = np.zeros((j, 4))
    for k in range(j):
        local = np.eye(4)
        local[:3, :3] = R.from_quat(pose.local_rotations[k][[1, 2, 3, 0]]).as_matrix()
        local[:3, 3] = skeleton.rest_offsets[k] if k > 0 else pose.root_translation
        p = skeleton.parents[k]
        transforms[k] = local if p < 0 else transforms[p] @ local
        positions[k] = transforms[k][:3, 3]
        q = R.from_matrix(transforms[k][:3, :3]).as_quat()
        quats[k] = rot.canonicalize(q[[3, 0, 1, 2]])
    return positions, quats


class TestOracleItself:
    """Validate the matrix-chain oracle on cases forced by geometry."""

    def test_identity_chain(self, chain2):
        pose = Pose.identity(2)
        positions, _ = fk_matrix_oracle(chain2, pose)
        assert np.allclose(positions, [[0, 0, 0], [0, 0.5, 0]])

    def test_quarter_turn(self):
        chain = Skeleton(["root", "child"], np.array([-1, 0]), np.array([[0.0, 0.0, 0.0], [1.0, 0.0, 0.0]]))
        quats = np.stack([rot.from_rotvec([0, 0, np.pi / 2]), rot.identity()])
        positions, _ = fk_matrix_oracle(chain, Pose(np.zeros(3), quats))
        assert np.allclose(positions[1], [0.0, 1.0, 0.0], atol=1e-12)


class TestForwardKinematics:
    def test_identity_chain(self, chain2):
        positions, quats = forward_kinematics(chain2, Pose.identity(2))
        assert np.allclose(positions, [[0, 0, 0], [0, 0.5, 0]])
        assert np.allclose(quats, rot.identity((2,)))

    def test_quarter_turn(self):
        chain = Skeleton(["root", "child"], np.array([-1, 0]), np.array([[0.0, 0.0, 0.0], [1.0, 0.0, 0.0]]))
        quats = np.stack([rot.from_rotvec([0, 0, np.pi / 2]), rot.identity()])
        positions, _ = forward_kinematics(chain, Pose(np.zeros(3), quats))
        assert np.allclose(positions[1], [0.0, 1.0, 0.0], atol=1e-12)

    def test_agrees_with_matrix_oracle(self, body, rng):
        for _ in range(100):
            pose = Pose(rng.normal(size=3), rot.random_unit(rng, (body.n_joints,)))
            positions, quats = forward_kinematics(body, pose)
            ref_positions, ref_quats = fk_matrix_oracle(body, pose)
            assert np.max(np.abs(positions - ref_positions)) <= 1e-9
            assert np.max(rot.geodesic_deg(quats, ref_quats)) <= 1e-6

    def test_identity_pose_accumulates_offsets(self, body):
        positions, _ = forward_kinematics(body, Pose.identity(body.n_joints))
        for j in range(body.n_joints):
            expected = sum(body.rest_offsets[k] for k in body.chain_to_root(j))
            assert np.allclose(positions[j], expected, atol=1e-12)

    def test_rigid_transform_equivariance(self, body, rng):
        pose = Pose(rng.normal(size=3), rot.random_unit(rng, (body.n_joints,)))
        base, _ = forward_kinematics(body, pose)
        q = rot.random_unit(rng)
        t = rng.normal(size=3)
        moved_quats = pose.local_rotations.copy()
        moved_quats[0] = rot.multiply(q, moved_quats[0])
        moved = Pose(rot.rotate(q, pose.root_translation) + t, moved_quats)
        moved_positions, _ = forward_kinematics(body, moved)
        assert np.max(np.abs(moved_positions - (rot.rotate(q, base) + t))) <= 1e-9

    def test_clip_fk_matches_per_pose(self, body):
        clip = random_clip(body, 7, seed=3)
        positions, quats = forward_kinematics_clip(clip)
        for t in range(len(clip)):
            p_t, q_t = forward_kinematics(body, clip.pose(t))
            assert np.allclose(positions[t], p_t)
            assert np.allclose(quats[t], q_t)

    def test_joint_count_mismatch(self, body):
        with pytest.raises(SkeletonError):
            forward_kinematics(body, Pose.identity(5))


class TestVelocities:
    def test_static_clip_zero(self, body):
        pose = Pose.identity(body.n_joints)
        clip = MotionClip.from_poses(body, 60.0, [pose] * 5)
        assert np.all(joint_velocities(clip) == 0.0)

    def test_uniform_ramp(self, chain2):
        n = 4
        roots = np.stack([[0.01 * t, 0.0, 0.0] for t in range(n)])
        clip = MotionClip(chain2, 60.0, roots, rot.identity((n, 2)))
        v = joint_velocities(clip)
        assert np.all(v[0] == 0.0)
        assert np.allclose(v[1:], [0.6, 0.0, 0.0])

    def test_matches_bruteforce_difference(self, body):
        clip = random_clip(body, 12, framerate=50.0, seed=9)
        positions, _ = forward_kinematics_clip(clip)
        v = joint_velocities(clip)
        for t in range(1, len(clip)):
            for j in range(body.n_joints):
                expected = (positions[t, j] - positions[t - 1, j]) * clip.framerate
                assert np.array_equal(v[t, j], expected)


class TestStructures:
    def test_canonical_body(self, body):
        assert body.n_joints == 22
        assert body.joint_names[0] == "pelvis"
        assert {"head", "left_wrist", "right_wrist"} <= set(body.joint_names)
        assert body.index("head") == 15

    def test_two_roots_rejected(self):
        with pytest.raises(SkeletonError):
            Skeleton(["a", "b"], np.array([-1, -1]), np.zeros((2, 3)))

    def test_unsorted_parents_rejected(self):
        with pytest.raises(SkeletonError):
            Skeleton(["a", "b", "c"], np.array([-1, 2, 0]), np.zeros((3, 3)))

    def test_nonzero_root_offset_rejected(self):
        with pytest.raises(SkeletonError):
            Skeleton(["a", "b"], np.array([-1, 0]), np.array([[0.1, 0, 0], [0, 1, 0]]))

    def test_non_unit_clip_rejected(self, chain2):
        quats = rot.identity((3, 2))
        quats[1, 1] *= 1.5
        with pytest.raises(Exception):
            MotionClip(chain2, 60.0, np.zeros((3, 3)), quats)

    def test_empty_clip_rejected(self, chain2):
        with pytest.raises(SkeletonError):
            MotionClip(chain2, 60.0, np.zeros((0, 3)), rot.identity((0, 2)))

    def test_ancestor_mask(self, body):
        mask = body.strict_ancestor_mask()
        assert mask[0, 21] and mask[19, 21] and not mask[21, 19]
        assert not mask.diagonal().any()
        assert not mask[1, 2]
