import numpy as np
import pytest

from fractalstiff.framelab import (
    DRILLING_VECTORS,
    HOMOGENEOUS_EXTENSION,
    FrameSpec,
    assemble_frame,
    beam_element_stiffness,
    check_equilibrium,
    closed_form_blocks,
    frame_split,
    mode_rank_report,
    split_blocks,
    tile_blocks,
)
from fractalstiff.gasket import equilibrium_completion
from fractalstiff.matrixcore import min_sym_eigenvalue, numerical_rank

SQRT3 = np.sqrt(3.0)


def random_specs(seed, n):
    rng = np.random.default_rng(seed)
    for _ in range(n):
        yield FrameSpec(*rng.uniform(0.2, 5.0, size=4))


class TestBeamElement:
    def test_axial_entry(self):
        assert beam_element_stiffness(1, 1, 1, 1)["axial"][0, 0] == 1.0

    def test_bend_entries(self):
        kb = beam_element_stiffness(1, 1, 1, 1)["bend"]
        assert kb[1, 1] == 12.0 and kb[2, 2] == 4.0

    def test_ranks(self):
        k = beam_element_stiffness(1, 1, 1, 1)
        assert numerical_rank(k["axial"]) == 1
        assert numerical_rank(k["bend"]) == 2
        assert numerical_rank(k["axial"] + k["bend"]) == 3


class TestAssembly:
    def test_axial_block(self):
        K = assemble_frame(FrameSpec(1.0, 1.0, 0.0, 1.0))
        np.testing.assert_allclose(split_blocks(K).A, np.diag([1.5, 0.5, 0.0]), atol=1e-14)

    def test_bending_block_entry(self):
        K = assemble_frame(FrameSpec(1.0, 0.0, 1.0, 1.0))
        assert K[1, 2] == pytest.approx(-6 * SQRT3, abs=1e-12)

    def test_axial_b_entry(self):
        k_axial, _ = frame_split(FrameSpec(1.0, 1.0, 1.0, 1.0))
        assert k_axial[0, 3] == pytest.approx(0.75, abs=1e-14)

    def test_matches_closed_form(self):
        for spec in random_specs(1, 20):
            k_axial, k_bend = frame_split(spec)
            ref = closed_form_blocks(spec)
            for K, key in ((k_axial, "axial"), (k_bend, "bend")):
                blocks = split_blocks(K)
                scale = np.abs(K).max()
                assert np.abs(blocks.A - ref[key].A).max() <= 1e-12 * scale
                assert np.abs(blocks.B - ref[key].B).max() <= 1e-12 * scale

    def test_block_tiling(self):
        for spec in random_specs(2, 50):
            K = assemble_frame(spec)
            b = split_blocks(K)
            assert np.abs(K - tile_blocks(b.A, b.B)).max() <= 1e-12 * np.abs(K).max()
            # block patterns
            assert b.A[0, 1] == pytest.approx(0, abs=1e-12 * np.abs(K).max())
            assert b.A[0, 2] == pytest.approx(0, abs=1e-12 * np.abs(K).max())
            np.testing.assert_allclose(b.B[1, 0], -b.B[0, 1], atol=1e-12 * np.abs(K).max())
            np.testing.assert_allclose(b.B[2, 0], -b.B[0, 2], atol=1e-12 * np.abs(K).max())
            np.testing.assert_allclose(b.B[2, 1], b.B[1, 2], atol=1e-12 * np.abs(K).max())

    def test_equilibrium_elimination_identities(self):
        for spec in random_specs(3, 50):
            K = assemble_frame(spec)
            b = split_blocks(K)
            a1, a2, a3, a4, b1 = b.A[0, 0], b.A[1, 1], b.A[2, 2], b.A[1, 2], b.B[0, 0]
            got = (b.B[0, 1], b.B[0, 2], b.B[1, 1], b.B[1, 2], b.B[2, 2])
            want = equilibrium_completion(a1, a2, a3, a4, b1, spec.d)
            np.testing.assert_allclose(got, want, rtol=0, atol=1e-12 * np.abs(K).max())

    def test_psd(self):
        for spec in random_specs(4, 20):
            for K in frame_split(spec):
                assert min_sym_eigenvalue(K) >= -1e-12 * np.abs(K).max()


class TestEquilibrium:
    def test_assembled_frame(self):
        for spec in random_specs(5, 20):
            assert check_equilibrium(assemble_frame(spec), spec.d) <= 1e-12

    def test_identity_not_equilibrated(self):
        assert check_equilibrium(np.eye(9), 1.0) > 0

    def test_perturbation(self):
        spec = FrameSpec(1.0, 1.0, 1.0, 1.0)
        K = assemble_frame(spec)
        Kp = K.copy()
        Kp[4, 6] += 1.0
        # column 6 of S K picks up S[:, 4] times the perturbation
        from fractalstiff.framelab import static_matrix

        expected = np.abs(static_matrix(spec.d)[:, 4]).max() / np.abs(Kp).max()
        assert check_equilibrium(Kp, spec.d) == pytest.approx(expected, rel=1e-9)


class TestModeRanks:
    def test_ranks(self):
        for spec in random_specs(6, 10):
            rep = mode_rank_report(spec)
            assert rep.rank_axial == 3
            assert rep.rank_bend == 5

    def test_null_vectors(self):
        for spec in random_specs(7, 10):
            k_axial, k_bend = frame_split(spec)
            v = HOMOGENEOUS_EXTENSION
            assert abs(v @ k_bend @ v) <= 1e-12 * np.abs(k_bend).max()
            assert np.abs(k_bend @ v).max() <= 1e-12 * np.abs(k_bend).max()
            assert np.abs(k_axial @ DRILLING_VECTORS).max() <= 1e-12 * np.abs(k_axial).max()

    def test_scaling_differentiation(self):
        spec = FrameSpec(2.0, 0.3, 0.05, 1.2)
        big = FrameSpec(spec.E, spec.A_s, spec.I, 2 * spec.d)
        ax1, bd1 = (split_blocks(k).A for k in frame_split(spec))
        ax2, bd2 = (split_blocks(k).A for k in frame_split(big))
        np.testing.assert_allclose(ax2, ax1 / 2, atol=1e-14)
        assert bd2[0, 0] == pytest.approx(bd1[0, 0] / 8, rel=1e-12)
