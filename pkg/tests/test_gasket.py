import math

import numpy as np
import pytest
from scipy.optimize import brentq

from fractalstiff import gasket as g
from fractalstiff.errors import ArgumentError, SingularMatrix
from fractalstiff.framelab import DRILLING_VECTORS, HOMOGENEOUS_EXTENSION, check_equilibrium, static_matrix
from fractalstiff.matrixcore import min_sym_eigenvalue, numerical_rank

SQRT3 = math.sqrt(3.0)

# printed values of the two mechanisms (six significant digits)
AXIAL_ALPHA = [[1, 0, 0], [0, 0.333333, 0], [0, 0, 0]]
AXIAL_BETA = [[0.5, 0.2886725, 0], [-0.2886725, -0.166666, 0], [0, 0, 0]]
BENDING_ALPHA = [[1, 0, 0], [0, 1.45714, -0.593846], [0, -0.593846, 0.376471]]
BENDING_BETA = [
    [-0.5, 0.866025, -0.285714],
    [-0.866025, -0.0428571, -0.0989743],
    [0.285714, -0.0989743, 0.0403361],
]
AXIAL_PRINTED = g.NondimBlocks(0.333333, 0.0, 0.0, 0.5)
BENDING_PRINTED = g.NondimBlocks(1.45714, 0.376471, -0.593846, -0.5)


def random_params(seed, n, d_range=(0.3, 3.0)):
    rng = np.random.default_rng(seed)
    for _ in range(n):
        a1 = rng.uniform(0.2, 4.0)
        d = rng.uniform(*d_range)
        a2, a3, a4, b1 = rng.uniform(-2, 2, 4)
        yield g.StiffnessParams(a1, a1 * a2, a1 * a3 * d**2, a1 * a4 * d, a1 * b1, d)


def equilibrium_oracle(p: g.StiffnessParams) -> np.ndarray:
    """b2..b6 from a least-squares solve of S K = 0, independent of the closed form."""
    base = g.tile_blocks(
        np.array([[p.a1, 0, 0], [0, p.a2, p.a4], [0, p.a4, p.a3]]),
        np.array([[p.b1, 0, 0], [0, 0, 0], [0, 0, 0]]),
    )
    S = static_matrix(p.d)
    cols = []
    for k in range(5):
        unit = np.zeros(5)
        unit[k] = 1.0
        b2, b3, b4, b5, b6 = unit
        B = np.array([[0, b2, b3], [-b2, b4, b5], [-b3, b5, b6]])
        cols.append((S @ g.tile_blocks(np.zeros((3, 3)), B)).ravel())
    sol, *_ = np.linalg.lstsq(np.array(cols).T, -(S @ base).ravel(), rcond=None)
    return sol


def rigid_modes_local() -> np.ndarray:
    """Global rigid translations and the rotation about the centroid, in local corner components."""
    verts = np.array([[0.0, SQRT3 / 2], [-0.5, 0.0], [0.5, 0.0]])
    c = verts.mean(axis=0)
    modes = []
    for v in ((1.0, 0.0), (0.0, 1.0)):
        modes.append(np.tile([v[0], v[1], 0.0], 3))
    rot = []
    for p in verts:
        r = p - c
        rot += [-r[1], r[0], 1.0]
    modes.append(np.array(rot))
    R = g.corner_rotation()
    return R.T @ np.array(modes).T


class TestCompletion:
    def test_b2_vanishes(self):
        B = g.complete_params(g.StiffnessParams(1, 0, 0, 0, 1, 1)).B
        assert B[0, 1] == 0.0

    def test_substitution(self):
        B = g.complete_params(g.StiffnessParams(1, 0, 0, 0, 0, 1)).B
        assert B[0, 1] == pytest.approx(SQRT3 / 3, abs=1e-15)
        assert B[1, 1] == pytest.approx(-1.0, abs=1e-15)

    def test_axial_beta2(self):
        x = g.NondimBlocks(1 / 3, 0.0, 0.0, 0.5)
        assert x.betas[1] == pytest.approx(SQRT3 / 6, abs=1e-15)
        # the printed decimal carries a last-digit slip; it agrees to five places
        assert x.betas[1] == pytest.approx(0.2886725, abs=1e-5)

    def test_routes_agree_with_oracle(self):
        for p in random_params(0, 50):
            dim = g.complete_params(p)
            nd = g.complete_params_nondim(p)
            scale = np.abs(dim.A).max() + np.abs(dim.B).max()
            assert np.abs(dim.A - nd.A).max() <= 1e-12 * scale
            assert np.abs(dim.B - nd.B).max() <= 1e-12 * scale
            B = dim.B
            got = [B[0, 1], B[0, 2], B[1, 1], B[1, 2], B[2, 2]]
            np.testing.assert_allclose(got, equilibrium_oracle(p), rtol=0, atol=1e-10 * scale)

    def test_invalid(self):
        with pytest.raises(ArgumentError):
            g.StiffnessParams(0, 1, 1, 1, 1)
        with pytest.raises(ArgumentError):
            g.StiffnessParams(1, 1, 1, 1, 1, d=-1)


class TestBuild:
    def test_equilibrium_any_params(self):
        for p in random_params(1, 50):
            assert check_equilibrium(g.build_gasket_stiffness(p), p.d) <= 1e-12

    def test_axial_mode_entries(self):
        K = g.axial_mode().stiffness()
        assert K[0, 0] == 1.0
        assert numerical_rank(K, 1e-9) == 3

    def test_bending_alpha4(self):
        K = g.bending_mode().stiffness()
        assert K[1, 2] == pytest.approx(-0.593846, abs=1e-6)


class TestRotation:
    def test_zero(self):
        assert np.array_equal(g.rotation_matrix(0.0), np.eye(3))

    def test_quarter_turn(self):
        np.testing.assert_array_equal(
            g.rotation_matrix(90, degrees=True), [[0, 1, 0], [-1, 0, 0], [0, 0, 1]]
        )

    @pytest.mark.parametrize("phi", [0.3, 1.7, -2.2, 5.0])
    def test_inverse_and_det(self, phi):
        R = g.rotation_matrix(phi)
        np.testing.assert_allclose(R @ g.rotation_matrix(-phi), np.eye(3), atol=1e-15)
        assert np.linalg.det(R) == pytest.approx(1.0)
        assert R[2, 2] == 1.0 and not R[2, :2].any() and not R[:2, 2].any()

    def test_corner_rotation_matches_node_frames(self):
        from fractalstiff.framelab import node_frames, upright_vertices

        np.testing.assert_allclose(g.corner_rotation(), node_frames(upright_vertices(1.0)), atol=1e-15)


class TestCondensation:
    def test_axial_scaling(self):
        res = g.assemble_and_condense(g.axial_mode().blocks.to_params())
        assert res.K_hat[0, 0] == pytest.approx(0.5, abs=1e-9)
        assert res.deflated == 3  # mid-side drilling DOFs carry no stiffness

    def test_bending_scaling(self):
        res = g.assemble_and_condense(g.bending_mode().blocks.to_params())
        assert res.K_hat[0, 0] == pytest.approx(0.15, abs=1e-9)

    def test_closure_random_params(self):
        checked = 0
        for p in random_params(2, 120):
            try:
                res = g.assemble_and_condense(p)
            except SingularMatrix:
                continue
            checked += 1
            K = res.K_hat
            s = np.abs(K).max()
            assert check_equilibrium(K, 2 * p.d) <= 1e-10
            assert np.abs(K - K.T).max() <= 1e-10 * s
            A, B = K[:3, :3], K[:3, 3:6]
            assert np.abs(K - g.tile_blocks(A, B)).max() <= 1e-10 * s
            assert abs(A[0, 1]) <= 1e-10 * s and abs(A[0, 2]) <= 1e-10 * s
            assert abs(B[1, 0] + B[0, 1]) <= 1e-10 * s
            assert abs(B[2, 0] + B[0, 2]) <= 1e-10 * s
            assert abs(B[2, 1] - B[1, 2]) <= 1e-10 * s
        assert checked >= 100

    def test_recovery_reproduces_interior_solution(self):
        p = g.bending_mode().blocks.to_params(2.0, 1.5)
        res = g.assemble_and_condense(p)
        u = np.random.default_rng(4).normal(size=9)
        # interior equilibrium: N u_mid + M^T u_corner = 0
        u_mid = res.recovery @ u
        M, N = res.full[:9, 9:], res.full[9:, 9:]
        assert np.abs(M.T @ u + N @ u_mid).max() <= 1e-12 * np.abs(res.full).max() * np.abs(u).max()


class TestResidual:
    def test_axial_printed(self):
        assert np.abs(g.fixed_point_residual(AXIAL_PRINTED)).max() <= 1e-6

    def test_bending_printed(self):
        assert np.abs(g.fixed_point_residual(BENDING_PRINTED)).max() <= 1e-5

    def test_far_point(self):
        assert np.abs(g.fixed_point_residual(g.NondimBlocks(0.9, 0.9, 0.9, 0.9))).max() > 1e-3


def _singular_start() -> g.NondimBlocks:
    def det_n(a3):
        full = g.assemble_doubled(g.build_gasket_stiffness(g.NondimBlocks(1.0, a3, 0.0, 0.0).to_params()))
        return np.linalg.det(full[9:, 9:])

    return g.NondimBlocks(1.0, brentq(det_n, -0.4, -0.2, xtol=1e-15), 0.0, 0.0)


class TestNewton:
    def test_axial_from_perturbed(self):
        start = g.NondimBlocks.from_vector(AXIAL_PRINTED.vector() + 1e-2)
        sol = g.newton_solve(start)
        assert np.abs(sol.blocks.vector() - [1 / 3, 0, 0, 0.5]).max() <= 1e-6
        assert sol.mode is g.Mode.AXIAL
        assert sol.residual <= 1e-10

    def test_bending_from_perturbed(self):
        start = g.NondimBlocks.from_vector(BENDING_PRINTED.vector() + 1e-2)
        sol = g.newton_solve(start)
        assert np.abs(sol.blocks.vector() - BENDING_PRINTED.vector()).max() <= 1e-4
        assert sol.mode is g.Mode.BENDING
        assert sol.residual <= 1e-10

    def test_singular_interior(self):
        with pytest.raises(SingularMatrix):
            g.newton_solve(_singular_start())

    def test_constrained_bending(self):
        sol = g.constrained_bending_solve(g.NondimBlocks(1.0, 1.0, 1.0, -0.5))
        free = g.newton_solve(g.NondimBlocks.from_vector(BENDING_PRINTED.vector() + 1e-2))
        assert sol.blocks.beta1 == -0.5
        assert np.abs(sol.blocks.vector() - free.blocks.vector()).max() <= 1e-8
        np.testing.assert_allclose(sol.blocks.vector(), BENDING_PRINTED.vector(), atol=1e-5)

    def test_constrained_needs_beta1(self):
        with pytest.raises(ArgumentError):
            g.constrained_bending_solve(g.NondimBlocks(1.0, 1.0, 1.0, 0.0))

    def test_constrained_not_slower(self):
        start = g.NondimBlocks(1.0, 1.0, 1.0, -0.5)
        con = g.constrained_bending_solve(start)
        free = g.newton_solve(start)
        assert free.mode is g.Mode.BENDING
        assert con.iterations <= free.iterations

    def test_homogeneous_extension_global(self):
        # homogeneous extension written in global components, mapped to local corners
        verts = np.array([[0.0, SQRT3 / 2], [-0.5, 0.0], [0.5, 0.0]])
        c = verts.mean(axis=0)
        v_glob = np.concatenate([np.append((p - c) / np.linalg.norm(p - c), 0.0) for p in verts])
        v_loc = g.corner_rotation().T @ v_glob
        np.testing.assert_allclose(v_loc, HOMOGENEOUS_EXTENSION, atol=1e-15)
        K = g.bending_mode().stiffness()
        assert np.abs(K @ v_loc).max() <= 1e-10 * np.abs(K).max()


class TestModes:
    def test_classification(self):
        assert g.classify_mode(g.NondimBlocks(1 / 3, 0.0, 0.0, 0.5)) is g.Mode.AXIAL
        assert g.classify_mode(g.bending_mode().blocks) is g.Mode.BENDING
        assert g.classify_mode(g.NondimBlocks(0.9, 0.9, 0.9, 0.9)) is g.Mode.UNCLASSIFIED

    @pytest.mark.parametrize("which", ["axial", "bending"])
    def test_solution_invariants(self, which):
        sol = g.axial_mode() if which == "axial" else g.bending_mode()
        assert sol.residual <= 1e-10
        assert 0 < sol.scaling < 1
        assert sol.rank == (3 if which == "axial" else 5)
        K = sol.stiffness()
        assert min_sym_eigenvalue(K) >= -1e-8 * np.abs(K).max()

    def test_printed_values(self):
        ax, bd = g.axial_mode(), g.bending_mode()
        np.testing.assert_allclose(ax.blocks.alpha_matrix(), AXIAL_ALPHA, atol=1e-5)
        np.testing.assert_allclose(ax.blocks.beta_matrix(), AXIAL_BETA, atol=1e-5)
        np.testing.assert_allclose(bd.blocks.alpha_matrix(), BENDING_ALPHA, atol=1e-5)
        np.testing.assert_allclose(bd.blocks.beta_matrix(), BENDING_BETA, atol=1e-5)
        assert ax.scaling == pytest.approx(0.5, abs=1e-9)
        assert bd.scaling == pytest.approx(0.15, abs=1e-4)

    def test_translational_subblocks(self):
        ax = g.axial_mode().blocks
        np.testing.assert_allclose(ax.alpha_matrix()[:2, :2], [[1, 0], [0, 1 / 3]], atol=1e-5)
        np.testing.assert_allclose(
            ax.beta_matrix()[:2, :2], [[0.5, SQRT3 / 6], [-SQRT3 / 6, -1 / 6]], atol=1e-5
        )

    def test_null_spaces(self):
        Ka, Kb = g.axial_mode().stiffness(), g.bending_mode().stiffness()
        rigid = rigid_modes_local()
        for K in (Ka, Kb):
            assert np.abs(K @ rigid).max() <= 1e-10 * np.abs(K).max()
        assert np.abs(Ka @ DRILLING_VECTORS).max() <= 1e-10 * np.abs(Ka).max()
        assert np.abs(Kb @ HOMOGENEOUS_EXTENSION).max() <= 1e-10 * np.abs(Kb).max()

    @pytest.mark.parametrize("which", ["axial", "bending"])
    def test_idempotence(self, which):
        sol = g.axial_mode() if which == "axial" else g.bending_mode()
        res = g.assemble_and_condense(sol.blocks.to_params())
        again = g.NondimBlocks.from_stiffness(res.K_hat, res.d_hat)
        assert np.abs(again.vector() - sol.blocks.vector()).max() <= 1e-8
        res2 = g.condense_stiffness(res.K_hat, res.d_hat)
        assert res2.K_hat[0, 0] / res.K_hat[0, 0] == pytest.approx(sol.scaling, rel=1e-8)


class TestRestartSearch:
    def test_single_start_near_axial(self, monkeypatch):
        rng_start = np.array([[1 / 3 + 0.01, 0.01, -0.01, 0.49]])

        class FixedRng:
            def uniform(self, lo, hi, size):
                return rng_start

        monkeypatch.setattr(g.np.random, "default_rng", lambda seed: FixedRng())
        rep = g.random_restart_search(0, 1)
        assert len(rep.solutions) == 1
        direct = g.newton_solve(g.NondimBlocks.from_vector(rng_start[0]))
        np.testing.assert_array_equal(rep.solutions[0].blocks.vector(), direct.blocks.vector())
        assert rep.solutions[0].mode is g.Mode.AXIAL

    def test_deterministic_small(self):
        a = g.random_restart_search(7, 5)
        b = g.random_restart_search(7, 5)
        assert [s.blocks for s in a.solutions] == [s.blocks for s in b.solutions]
        assert a.n_failed == b.n_failed

    def test_bad_count(self):
        with pytest.raises(ArgumentError):
            g.random_restart_search(1, 0)


class TestScalingLaw:
    def test_doubling(self):
        assert g.scaling_law(0.5, 2.0) == 0.5

    def test_unit_ratio(self):
        assert g.scaling_law(0.37, 1.0) == 1.0

    def test_quadrupling_against_double_condensation(self):
        sol = g.bending_mode()
        res = g.assemble_and_condense(sol.blocks.to_params())
        res2 = g.condense_stiffness(res.K_hat, res.d_hat)
        assert res2.K_hat[0, 0] == pytest.approx(g.scaling_law(sol.scaling, 4.0), abs=1e-6)
        assert g.scaling_law(0.15, 4.0) == pytest.approx(0.0225, abs=1e-15)

    @pytest.mark.parametrize("kappa,rho", [(0.0, 2.0), (0.5, 0.0), (-1.0, 2.0)])
    def test_domain(self, kappa, rho):
        with pytest.raises(ArgumentError):
            g.scaling_law(kappa, rho)
