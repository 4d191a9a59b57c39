import numpy as np
import pytest

from prbh.channel_model import cloner_probability
from prbh.state_sim import (
    PAULI_X,
    PAULI_Y,
    BlochVector,
    channel_apply,
    cloner_output,
    mixed_input_outputs,
    qubit_state,
    sturm_count,
    su2_generators,
    xi_block,
)

from conftest import random_unit_vectors

Z_HAT = BlochVector(0.0, 0.0, 1.0)


def normalized_spectrum(k):
    return 2.0 * np.arange(k + 2) / ((k + 1) * (k + 2))


class TestBlochVector:
    def test_unit_and_zero(self):
        assert BlochVector(1, 0, 0).as_array().tolist() == [1.0, 0.0, 0.0]
        assert BlochVector.mixed().is_mixed

    def test_rejects_non_unit(self):
        with pytest.raises(ValueError):
            BlochVector(0.5, 0.0, 0.0)

    def test_normalized(self):
        n = BlochVector.normalized([1, 2, 2])
        assert np.allclose(n.as_array(), [1 / 3, 2 / 3, 2 / 3])


class TestGenerators:
    def test_spin_half(self):
        g = su2_generators(2)
        assert np.allclose(g.jz, np.diag([0.5, -0.5]))
        assert np.allclose(g.jx, PAULI_X / 2)
        assert np.allclose(g.jy, PAULI_Y / 2)

    def test_spin_one(self):
        assert np.allclose(su2_generators(3).jz, np.diag([1, 0, -1]))

    def test_dim_five_commutator(self):
        g = su2_generators(5)
        assert np.abs(g.jx @ g.jy - g.jy @ g.jx - 1j * g.jz).max() < 1e-10

    @pytest.mark.parametrize("dim", [1, 0, 2.5])
    def test_rejects_small_dim(self, dim):
        with pytest.raises(ValueError):
            su2_generators(dim)

    @pytest.mark.parametrize("dim", list(range(2, 65)))
    def test_algebra(self, dim):
        g = su2_generators(dim)
        j = (dim - 1) / 2
        for a, b, c in ((g.jx, g.jy, g.jz), (g.jy, g.jz, g.jx), (g.jz, g.jx, g.jy)):
            assert np.abs(a @ b - b @ a - 1j * c).max() < 1e-10
        for m in (g.jx, g.jy, g.jz):
            assert np.abs(m - m.conj().T).max() < 1e-12
        assert np.allclose(np.diag(g.jz), j - np.arange(dim), atol=0)
        assert np.abs(g.casimir() - j * (j + 1) * np.eye(dim)).max() < 1e-10

    def test_matrices_read_only(self):
        with pytest.raises(ValueError):
            su2_generators(4).jx[0, 0] = 1.0


class TestXiBlock:
    def test_k0_z_hat(self):
        assert np.allclose(xi_block(0, Z_HAT), np.diag([1, 0]))

    @pytest.mark.parametrize("n", random_unit_vectors(10, seed=1))
    def test_k0_is_input_state(self, n):
        b = BlochVector.from_array(n)
        assert np.abs(xi_block(0, b) - qubit_state(b)).max() < 1e-15

    def test_k1_z_hat(self):
        xi = xi_block(1, Z_HAT)
        assert np.allclose(xi, np.diag([2, 1, 0]))
        assert np.trace(xi).real == pytest.approx(3)

    @pytest.mark.parametrize("k", range(0, 9))
    def test_trace_hermitian_psd(self, k):
        for n in random_unit_vectors(5, seed=k):
            xi = xi_block(k, BlochVector.from_array(n))
            assert abs(np.trace(xi) - (k + 1) * (k + 2) / 2) < 1e-10
            assert np.abs(xi - xi.conj().T).max() < 1e-12
            assert np.linalg.eigvalsh(xi).min() >= -1e-10

    def test_rejects_negative_k(self):
        with pytest.raises(ValueError):
            xi_block(-1, Z_HAT)


class TestClonerOutput:
    def test_small(self):
        assert np.allclose(cloner_output(1), np.diag([0, 1]))
        assert np.allclose(cloner_output(2), np.diag([0, 1 / 3, 2 / 3]))

    @pytest.mark.parametrize("N", [1, 2, 7, 50])
    def test_unit_trace(self, N):
        assert abs(np.trace(cloner_output(N)) - 1) < 1e-12

    def test_rejects_zero(self):
        with pytest.raises(ValueError):
            cloner_output(0)


class TestEigenRoutes:
    def test_sturm_count_matches_dense(self):
        rng = np.random.default_rng(3)
        d, e = rng.normal(size=30), rng.normal(size=29)
        t = np.diag(d) + np.diag(e, 1) + np.diag(e, -1)
        w = np.linalg.eigvalsh(t)
        for sigma in (-2.0, -0.1, 0.0, 0.7, 3.0):
            assert sturm_count(d, e, sigma) == int(np.sum(w < sigma))

    def test_block_eigenvalues_match_dense(self):
        n = BlochVector.normalized([0.3, -0.4, 0.5])
        for b in channel_apply(n, 0.5, 1e-6):
            assert np.allclose(b.eigenvalues(), np.linalg.eigvalsh(b.matrix), atol=1e-13)


class TestChannelApply:
    @pytest.mark.parametrize("n", random_unit_vectors(10, seed=4))
    def test_zero_mass_identity(self, n):
        b = BlochVector.from_array(n)
        out = channel_apply(b, 0.0)
        assert len(out) == 1 and out[0].weight == 1.0 and out.tail_mass == 0.0
        assert np.abs(out[0].matrix - qubit_state(b)).max() <= 1e-12

    def test_z_half_k1_block(self):
        out = channel_apply(Z_HAT, 0.5, 1e-9)
        assert out[1].weight == 0.1875
        assert np.allclose(out[1].eigenvalues(), [0, 1 / 3, 2 / 3], atol=1e-12)
        assert np.allclose(np.diag(out[1].matrix)[::-1], np.diag(cloner_output(2)))

    def test_banded_equals_dense_generator_route(self):
        n = BlochVector.normalized([1.0, -2.0, 0.5])
        for b in channel_apply(n, 0.6, 1e-8):
            k = b.k
            ref = xi_block(k, n) / ((k + 1) * (k + 2) / 2)
            assert np.abs(b.matrix - ref).max() < 1e-14

    def test_mixed_input_blocks_proportional_to_identity(self):
        for b in channel_apply(BlochVector.mixed(), 0.7, 1e-6):
            assert np.allclose(b.matrix, np.eye(b.dim) / b.dim, atol=1e-15)

    @pytest.mark.parametrize("z", [0.1, 0.5, 0.9])
    def test_trace_psd_weights_spectrum(self, z):
        for n in random_unit_vectors(20, seed=int(z * 10)):
            out = channel_apply(BlochVector.from_array(n), z, 1e-12)
            assert abs(out.total_trace() - 1) <= 1e-10
            assert abs(out.total_weight() + out.tail_mass - 1) <= 1e-10
            assert out.is_psd(1e-10)
            for b in out:
                assert abs(b.weight - cloner_probability(z, b.k + 1)) <= 1e-12
                assert np.abs(b.matrix - b.matrix.conj().T).max() == 0.0
            for b in out.blocks[:9]:
                assert np.abs(b.eigenvalues() - normalized_spectrum(b.k)).max() <= 1e-10

    def test_to_dense_trace(self):
        out = channel_apply(Z_HAT, 0.3, 1e-6)
        dense = out.to_dense()
        assert dense.shape[0] == sum(b.dim for b in out)
        assert np.trace(dense).real == pytest.approx(1 - out.tail_mass, abs=1e-12)

    def test_truncation_cap_propagates(self):
        from prbh.channel_model import TruncationCapExceeded

        with pytest.raises(TruncationCapExceeded):
            channel_apply(Z_HAT, 0.9999999, 1e-12)


class TestMixedInputOutputs:
    def test_zero_mass(self):
        bob, env = mixed_input_outputs(0.0)
        assert len(bob) == 1 and np.allclose(bob[0].matrix, np.eye(2) / 2)
        assert env[0].dim == 1 and env[0].weight == 1.0

    def test_traces_and_dims(self):
        bob, env = mixed_input_outputs(0.5, 1e-12)
        for state in (bob, env):
            assert abs(state.total_trace() + state.tail_mass - 1) <= 1e-10
            assert abs(state.total_trace() - 1) <= 1e-10
        assert all(b.dim == b.k + 2 for b in bob)
        assert all(e.dim == e.k + 1 for e in env)

    def test_weights_are_tk_times_sk_and_dim(self):
        z = 0.4
        bob, env = mixed_input_outputs(z, 1e-9)
        for b, e in zip(bob, env):
            t = (1 - z) ** 3 * z**b.k
            assert b.weight == pytest.approx(t * (b.k + 1) / 2 * (b.k + 2), rel=1e-14)
            assert e.weight == pytest.approx(t * (e.k + 2) / 2 * (e.k + 1), rel=1e-14)

    def test_sigma_b_equals_channel_of_mixed_input(self):
        bob, _ = mixed_input_outputs(0.8, 1e-9)
        via = channel_apply(BlochVector.mixed(), 0.8, 1e-9)
        assert len(bob) == len(via)
        for a, b in zip(bob, via):
            assert a.weight == b.weight
            assert np.abs(a.matrix - b.matrix).max() <= 1e-15
