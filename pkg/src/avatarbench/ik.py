"""Damped least-squares inverse kinematics over a joint tree.

The solver fits all local joint rotations plus the root translation to a set
of global position targets (one per joint, maskable) and optional global
orientation soft constraints on selected joints. Each Levenberg-style
iteration solves (J^T J + lambda I) dq = J^T r with an adaptive damping
retry, so the objective never increases across accepted iterations.

Rotational degrees of freedom are parameterized as global-frame rotation
increments per joint: a step omega_j pre-rotates joint j's subtree about its
own origin, which gives the classic geometric Jacobian
d p_k / d omega_j = -[p_k - p_j]_x for strict ancestors j of k.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import rotations as rot
from .skeleton import Pose, Skeleton, _fk_arrays


@dataclass
class IkResult:
    pose: Pose
    residual_rms: float       # RMS distance to the valid position targets, m
    iterations: int
    converged: bool           # residual reached `tolerance`
    held: bool                # no valid targets: the initial pose was returned
    objectives: list          # objective value after each accepted iteration


def _skew_blocks(d: np.ndarray) -> np.ndarray:
    """(..., 3, 3) cross-product matrices for difference vectors (..., 3)."""
    out = np.zeros(d.shape[:-1] + (3, 3))
    x, y, z = d[..., 0], d[..., 1], d[..., 2]
    out[..., 0, 1] = -z
    out[..., 0, 2] = y
    out[..., 1, 0] = z
    out[..., 1, 2] = -x
    out[..., 2, 0] = -y
    out[..., 2, 1] = x
    return out


class DampedLeastSquaresIk:
    """Reusable IK solver bound to one skeleton.

    Parameters
    ----------
    skeleton : Skeleton
    damping : float
        Base Levenberg damping added to the normal equations. Raised
        temporarily whenever a step would increase the objective.
    rotation_weight : float
        Weight of the orientation soft constraints relative to the position
        residuals.
    max_iterations : int
    tolerance : float
        Target RMS position residual in meters.
    """

    def __init__(
        self,
        skeleton: Skeleton,
        damping: float = 0.01,
        rotation_weight: float = 0.5,
        max_iterations: int = 100,
        tolerance: float = 1e-4,
        stall_tolerance: float = 1e-10,
    ):
        self.skeleton = skeleton
        self.damping = float(damping)
        self.rotation_weight = float(rotation_weight)
        self.max_iterations = int(max_iterations)
        self.tolerance = float(tolerance)
        self.stall_tolerance = float(stall_tolerance)

        j = skeleton.n_joints
        self._n_dof = 3 + 3 * j
        strict = skeleton.strict_ancestor_mask()
        self._strict_ancestor = strict
        self._ancestor_or_self = strict | np.eye(j, dtype=bool)
        self._parents = skeleton.parents
        self._offsets = skeleton.rest_offsets

    def solve(
        self,
        targets: np.ndarray,
        valid: np.ndarray | None = None,
        orientation_targets: np.ndarray | None = None,
        orientation_joints: np.ndarray | None = None,
        initial: Pose | None = None,
    ) -> IkResult:
        """Fit the pose to per-joint global position targets.

        targets: (J, 3) goal positions; invalid entries are ignored.
        valid: (J,) bool mask; None means every target counts.
        orientation_targets: (M, 4) global orientation goals for the joints
        listed in orientation_joints (M,).
        initial: warm-start pose (identity when omitted).
        """
        skel = self.skeleton
        j = skel.n_joints
        targets = np.asarray(targets, dtype=float).reshape(j, 3)
        valid = np.ones(j, dtype=bool) if valid is None else np.asarray(valid, dtype=bool).reshape(j)
        if orientation_joints is None:
            orientation_joints = np.zeros(0, dtype=int)
            orientation_targets = np.zeros((0, 4))
        else:
            orientation_joints = np.asarray(orientation_joints, dtype=int)
            orientation_targets = np.asarray(orientation_targets, dtype=float).reshape(-1, 4)

        pose = initial if initial is not None else Pose.identity(j)
        root_t = pose.root_translation.copy()
        locals_q = pose.local_rotations.copy()

        if not valid.any():
            positions, _ = _fk_arrays(self._parents, self._offsets, root_t, locals_q)
            return IkResult(Pose(root_t, locals_q), float("nan"), 0, False, True, [])

        n_valid = int(valid.sum())
        w_rot = self.rotation_weight
        m = len(orientation_joints)

        positions, globals_q = _fk_arrays(self._parents, self._offsets, root_t, locals_q)

        def residual(positions, globals_q):
            r_pos = (targets[valid] - positions[valid]).ravel()
            if m:
                rel = rot.multiply(orientation_targets, rot.conjugate(globals_q[orientation_joints]))
                r_rot = w_rot * rot.to_rotvec(rel).ravel()
                return np.concatenate([r_pos, r_rot])
            return r_pos

        r = residual(positions, globals_q)
        objective = 0.5 * float(r @ r)
        objectives: list[float] = []
        lam = self.damping
        iterations = 0
        converged = _rms(r[: 3 * n_valid]) < self.tolerance

        while not converged and iterations < self.max_iterations:
            jac = self._jacobian(positions, valid, orientation_joints)
            jtj = jac.T @ jac
            jtr = jac.T @ r

            accepted = False
            trial_lam = max(lam, self.damping)
            for _ in range(8):
                h = jtj + (trial_lam**2) * np.eye(self._n_dof)
                try:
                    delta = np.linalg.solve(h, jtr)
                except np.linalg.LinAlgError:
                    trial_lam *= 10.0
                    continue
                new_root = root_t + delta[:3]
                new_locals = self._apply_rotation_step(locals_q, globals_q, delta[3:].reshape(j, 3))
                new_positions, new_globals = _fk_arrays(self._parents, self._offsets, new_root, new_locals)
                new_r = residual(new_positions, new_globals)
                new_objective = 0.5 * float(new_r @ new_r)
                if new_objective <= objective:
                    accepted = True
                    break
                trial_lam *= 10.0
            if not accepted:
                break

            improvement = objective - new_objective
            root_t, locals_q = new_root, new_locals
            positions, globals_q = new_positions, new_globals
            r, objective = new_r, new_objective
            objectives.append(objective)
            lam = max(trial_lam / 3.0, self.damping)
            iterations += 1
            converged = _rms(r[: 3 * n_valid]) < self.tolerance
            if not converged and improvement <= self.stall_tolerance * max(objective, 1.0):
                break

        return IkResult(
            Pose(root_t, rot.canonicalize(locals_q / np.linalg.norm(locals_q, axis=-1, keepdims=True))),
            _rms(r[: 3 * n_valid]),
            iterations,
            bool(converged),
            False,
            objectives,
        )

    def _jacobian(self, positions, valid, orientation_joints):
        j = self.skeleton.n_joints
        n_valid = int(valid.sum())
        m = len(orientation_joints)
        jac = np.zeros((3 * n_valid + 3 * m, self._n_dof))

        # root translation moves every target equally
        jac[: 3 * n_valid, :3] = np.tile(np.eye(3), (n_valid, 1))

        # d p_k / d omega_a = -skew(p_k - p_a) for strict ancestors a of k
        diff = positions[valid][:, None, :] - positions[None, :, :]   # (V, J, 3)
        blocks = -_skew_blocks(diff)                                   # (V, J, 3, 3)
        blocks *= self._strict_ancestor.T[valid][:, :, None, None]
        jac[: 3 * n_valid, 3:] = blocks.transpose(0, 2, 1, 3).reshape(3 * n_valid, 3 * j)

        if m:
            # orientation error changes by -omega_a for each ancestor-or-self a
            rows = 3 * n_valid
            for i, e in enumerate(orientation_joints):
                cols = np.nonzero(self._ancestor_or_self[:, e])[0]
                for a in cols:
                    jac[rows + 3 * i : rows + 3 * i + 3, 3 + 3 * a : 6 + 3 * a] = (
                        -self.rotation_weight * np.eye(3)
                    )
        return jac

    def _apply_rotation_step(self, locals_q, globals_q, omega):
        """Pre-rotate each joint by exp(omega_j), conjugated into parent frames."""
        step = rot.from_rotvec(omega)
        parent_g = np.empty_like(globals_q)
        parent_g[0] = rot.identity()
        parent_g[1:] = globals_q[self._parents[1:]]
        new_locals = rot.multiply(
            rot.conjugate(parent_g), rot.multiply(step, rot.multiply(parent_g, locals_q))
        )
        return new_locals / np.linalg.norm(new_locals, axis=-1, keepdims=True)


def _rms(x: np.ndarray) -> float:
    return float(np.sqrt(np.mean(x**2))) if x.size else float("nan")
