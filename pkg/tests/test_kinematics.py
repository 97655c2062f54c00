import json
import math

import numpy as np
import pytest

from hotbox import kinematics as kin
from hotbox.kinematics import (
    ArmState,
    ChainError,
    DHRow,
    DimensionError,
    KinematicChain,
    SolveError,
    builtin_chain,
    dls,
    fk,
    jacobian,
    load_chain,
    save_chain,
    step,
)
from hotbox.messages import Pose, TwistCommand, UnitQuaternion, Vec3


@pytest.fixture(scope="module")
def planar2():
    return builtin_chain("planar2")


@pytest.fixture(scope="module")
def hotbox7():
    return builtin_chain("hotbox7")


# ---------------------------------------------------------------------------
# Finite-difference Jacobian oracle (independent of the analytic path)
# ---------------------------------------------------------------------------

FD_STEP = 1e-6


def fd_jacobian(chain, q):
    q = np.asarray(q, dtype=float)
    n = q.size
    J = np.zeros((6, n))
    for i in range(n):
        dq = np.zeros(n)
        dq[i] = FD_STEP
        hi = fk(chain, q + dq)
        lo = fk(chain, q - dq)
        J[0, i] = (hi.position.x - lo.position.x) / (2 * FD_STEP)
        J[1, i] = (hi.position.y - lo.position.y) / (2 * FD_STEP)
        J[2, i] = (hi.position.z - lo.position.z) / (2 * FD_STEP)
        r_hi = np.array(hi.orientation.to_matrix())
        r_lo = np.array(lo.orientation.to_matrix())
        dr = r_hi @ r_lo.T
        # For the infinitesimal rotation I + theta*K the skew part recovers
        # theta*axis directly.
        w = 0.5 * np.array([dr[2, 1] - dr[1, 2], dr[0, 2] - dr[2, 0], dr[1, 0] - dr[0, 1]])
        J[3:, i] = w / (2 * FD_STEP)
    return J


def sample_q(chain, rng):
    return rng.uniform(chain.q_min, chain.q_max)


class TestForwardKinematics:
    def test_planar2_straight(self, planar2):
        pose = fk(planar2, (0.0, 0.0))
        assert abs(pose.position.x - 2.0) < 1e-12
        assert abs(pose.position.y) < 1e-12
        assert abs(pose.position.z) < 1e-12
        assert abs(pose.orientation.w - 1.0) < 1e-12

    def test_planar2_quarter_turn(self, planar2):
        pose = fk(planar2, (math.pi / 2, 0.0))
        assert abs(pose.position.x) < 1e-12
        assert abs(pose.position.y - 2.0) < 1e-12

    def test_planar2_elbow(self, planar2):
        pose = fk(planar2, (math.pi / 2, -math.pi / 2))
        assert abs(pose.position.x - 1.0) < 1e-12
        assert abs(pose.position.y - 1.0) < 1e-12

    def test_base_pose_composition(self):
        base = Pose(Vec3(0.5, -0.25, 1.0), UnitQuaternion(0.0, 1.0, 0.0, 0.0))
        chain = KinematicChain("mounted", [DHRow(a=1.0, alpha=0.0, d=0.0, limits=(-10, 10))], base)
        pose = fk(chain, (0.0,))
        # 180 deg about x maps +x to +x, so tip sits one unit along world +x.
        assert abs(pose.position.x - 1.5) < 1e-12
        assert abs(pose.position.y + 0.25) < 1e-12
        assert abs(pose.position.z - 1.0) < 1e-12

    def test_determinism(self, hotbox7):
        q = (0.1, -0.4, 0.9, 1.1, -0.2, 0.5, 0.3)
        a = fk(hotbox7, q)
        b = fk(hotbox7, q)
        assert a == b

    def test_dimension_mismatch(self, planar2):
        with pytest.raises(DimensionError):
            fk(planar2, (0.0,))


class TestJacobian:
    def test_single_link_column(self):
        chain = KinematicChain("one", [DHRow(a=1.0, alpha=0.0, d=0.0, limits=(-10, 10))])
        J = jacobian(chain, (0.0,))
        np.testing.assert_allclose(J[:, 0], [0, 1, 0, 0, 0, 1], atol=1e-12)

    def test_planar2_known_block(self, planar2):
        J = jacobian(planar2, (0.0, math.pi / 2))
        np.testing.assert_allclose(J[0:2, :], [[-1.0, -1.0], [1.0, 0.0]], atol=1e-12)
        np.testing.assert_allclose(J, fd_jacobian(planar2, (0.0, math.pi / 2)), atol=1e-5)

    @pytest.mark.parametrize("name", ["planar2", "hotbox7"])
    def test_matches_finite_differences(self, name):
        chain = builtin_chain(name)
        rng = np.random.default_rng(42)
        for _ in range(100):
            q = sample_q(chain, rng)
            np.testing.assert_allclose(jacobian(chain, q), fd_jacobian(chain, q), atol=1e-5)

    def test_dimension_mismatch(self, planar2):
        with pytest.raises(DimensionError):
            jacobian(planar2, (0.0, 0.0, 0.0))


class TestDLS:
    def test_zero_twist(self, hotbox7):
        J = jacobian(hotbox7, kin.HOME_Q["hotbox7"])
        qdot = dls(J, np.zeros(6), lam=0.05)
        np.testing.assert_allclose(qdot, np.zeros(7), atol=1e-15)

    def test_planar_block_exact(self, planar2):
        # 2x2 xy block at q=(0, pi/2); the independent oracle is a hand
        # matrix inverse: inv([[-1,-1],[1,0]]) = [[0,1],[-1,-1]].
        J2 = jacobian(planar2, (0.0, math.pi / 2))[0:2, :]
        v = np.array([0.0, 1.0])
        qdot = dls(J2, v, lam=0.0)
        oracle = np.array([[0.0, 1.0], [-1.0, -1.0]]) @ v
        np.testing.assert_allclose(qdot, oracle, atol=1e-12)
        np.testing.assert_allclose(qdot, [1.0, -1.0], atol=1e-12)
        np.testing.assert_allclose(J2 @ qdot, v, atol=1e-12)

    def test_residual_bound_and_damping_monotonicity(self):
        rng = np.random.default_rng(7)
        for _ in range(100):
            J = rng.normal(size=(6, 7))
            v = rng.normal(size=6)
            qd_hi = dls(J, v, lam=0.1)
            qd_lo = dls(J, v, lam=0.01)
            assert np.linalg.norm(J @ qd_hi - v) <= np.linalg.norm(v) + 1e-12
            assert np.linalg.norm(J @ qd_lo - v) <= np.linalg.norm(v) + 1e-12
            assert np.linalg.norm(qd_hi) <= np.linalg.norm(qd_lo) + 1e-12
            # dense-inverse oracle
            A = J @ J.T + 0.01 * np.eye(6)
            np.testing.assert_allclose(qd_hi, J.T @ np.linalg.inv(A) @ v, atol=1e-9)

    def test_singular_raises(self, planar2):
        # Straight-out arm: the full 6x2 system is rank deficient at lam=0.
        J = jacobian(planar2, (0.0, 0.0))
        with pytest.raises(SolveError):
            dls(J, np.zeros(6), lam=0.0)

    def test_velocity_limit_uniform_scaling(self):
        J = np.eye(3)  # identity map: qdot equals the commanded rates
        v = np.array([1.0, 2.0, 0.0])
        qdot = dls(J, v, lam=0.0, vel_limits=[0.5, 0.5, 0.5])
        # Largest component scaled to its limit; direction preserved.
        assert abs(qdot[1] - 0.5) < 1e-12
        assert abs(qdot[0] / qdot[1] - 0.5) < 1e-12

    def test_twist_command_input(self, planar2):
        J = jacobian(planar2, (0.0, math.pi / 2))
        cmd = TwistCommand(Vec3(0.0, 0.1, 0.0), Vec3())
        qdot = dls(J, cmd, lam=0.05)
        assert qdot.shape == (2,)

    def test_negative_damping_rejected(self):
        with pytest.raises(ValueError):
            dls(np.eye(6), np.zeros(6), lam=-1.0)


class TestStep:
    def test_fixed_point(self, planar2):
        state = ArmState.at(planar2, (0.3, 0.6))
        after = step(planar2, state, np.zeros(2), dt=0.01)
        assert np.array_equal(after.q, state.q)
        assert after.ee == state.ee

    def test_clamp_exact(self, planar2):
        state = ArmState.at(planar2, (10.0, 0.0))
        after = step(planar2, state, np.array([5.0, 0.0]), dt=0.01)
        assert after.q[0] == 10.0
        assert after.qdot[0] == 0.0

    def test_euler_accumulation(self, planar2):
        state = ArmState.at(planar2, (0.0, 0.0))
        qdot = np.array([0.1, -0.05])
        for _ in range(1000):
            state = step(planar2, state, qdot, dt=0.01)
        np.testing.assert_allclose(state.q, [1.0, -0.5], atol=1e-12)

    def test_limits_hold_under_random_commands(self, hotbox7):
        rng = np.random.default_rng(3)
        state = ArmState.at(hotbox7, kin.HOME_Q["hotbox7"])
        for _ in range(200):
            qdot = rng.normal(scale=3.0, size=7)
            state = step(hotbox7, state, qdot, dt=0.05)
            assert np.all(state.q >= hotbox7.q_min) and np.all(state.q <= hotbox7.q_max)

    def test_ee_cache_coherence(self, hotbox7):
        state = ArmState.at(hotbox7, kin.HOME_Q["hotbox7"])
        state = step(hotbox7, state, np.full(7, 0.2), dt=0.01)
        assert state.ee == fk(hotbox7, state.q)

    def test_bad_dt(self, planar2):
        state = ArmState.at(planar2, (0.0, 0.0))
        with pytest.raises(ValueError):
            step(planar2, state, np.zeros(2), dt=0.0)


class TestChainIO:
    def test_round_trip(self, tmp_path, hotbox7):
        path = tmp_path / "chain.json"
        save_chain(hotbox7, path)
        loaded = load_chain(path)
        assert loaded.name == hotbox7.name
        assert loaded.rows == hotbox7.rows
        np.testing.assert_array_equal(loaded.base, hotbox7.base)

    def test_bad_file(self, tmp_path):
        path = tmp_path / "bad.json"
        path.write_text("{not json")
        with pytest.raises(ChainError):
            load_chain(path)
        path.write_text(json.dumps({"name": "x", "rows": []}))
        with pytest.raises(ChainError):
            load_chain(path)

    def test_bad_limits(self):
        with pytest.raises(ChainError):
            DHRow(a=1.0, alpha=0.0, d=0.0, limits=(1.0, -1.0))

    def test_unknown_builtin(self):
        with pytest.raises(ChainError):
            builtin_chain("gigantor")

    def test_hotbox7_mount(self, hotbox7):
        # Top-down mount: at home the tool hangs below the mount plate.
        pose = fk(hotbox7, kin.HOME_Q["hotbox7"])
        assert pose.position.z < 0.8
        assert 0.0 < pose.position.z < 0.8


@pytest.mark.skipif(kin.BACKEND != "numba", reason="numba backend not active")
def test_kernel_backends_agree():
    from hotbox.kinematics import _kernels

    rng = np.random.default_rng(11)
    chain = builtin_chain("hotbox7")
    for _ in range(20):
        q = rng.uniform(chain.q_min, chain.q_max)
        frames_jit = _kernels.dh_frames(chain.dh, q, chain.base)
        frames_py = _kernels.dh_frames.py_func(chain.dh, q, chain.base)
        np.testing.assert_array_equal(frames_jit, frames_py)
        J_jit = _kernels.jacobian_from_frames(frames_jit)
        J_py = _kernels.jacobian_from_frames.py_func(frames_py)
        np.testing.assert_array_equal(J_jit, J_py)
        v = rng.normal(size=6)
        np.testing.assert_allclose(
            _kernels.dls_qdot(J_jit, v, 0.05),
            _kernels.dls_qdot.py_func(J_py, v, 0.05),
            rtol=0,
            atol=1e-15,
        )
