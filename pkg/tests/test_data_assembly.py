import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from parsim.data_assembly import (
    build_hankels,
    build_regressor_bank,
    empirical_covariance,
)
from parsim.errors import DataLengthError
from parsim.system_model import (
    Trajectory,
    extended_controllability,
    extended_observability,
    random_model,
    s1,
    simulate,
    toeplitz_markov,
)


def _scalar_traj(u):
    u = np.asarray(u, float)[None, :]
    z = np.zeros_like(u)
    return Trajectory(u, z.copy(), z.copy(), z.copy())


def test_hankel_small_example():
    h = build_hankels(_scalar_traj([1, 2, 3, 4, 5, 6]), 2, 2, 3)
    np.testing.assert_array_equal(h.U_p, [[1, 2, 3], [2, 3, 4]])
    np.testing.assert_array_equal(h.U_f, [[3, 4, 5], [4, 5, 6]])


def test_hankel_single_sample():
    h = build_hankels(_scalar_traj([7, 8]), 1, 1, 1)
    assert h.U_p.shape == h.U_f.shape == (1, 1)
    assert h.U_p[0, 0] == 7 and h.U_f[0, 0] == 8


def test_hankel_too_short():
    with pytest.raises(DataLengthError):
        build_hankels(_scalar_traj([1, 2, 3]), 2, 2, 3)


@settings(max_examples=40, deadline=None)
@given(p=st.integers(1, 4), f=st.integers(1, 4), N=st.integers(1, 30), seed=st.integers(0, 999))
def test_hankel_shift_property(p, f, N, seed):
    m = random_model(2, 2, 1, rng=seed)
    t = simulate(m, p + f + N - 1, seed=seed)
    h = build_hankels(t, p, f, N)
    for M, n, rows in ((h.U_p, 2, p), (h.U_f, 2, f), (h.Y_p, 1, p), (h.Y_f, 1, f)):
        for r in range(rows - 1):
            for c in range(1, N):
                np.testing.assert_array_equal(M[(r + 1) * n:(r + 2) * n, c - 1],
                                              M[r * n:(r + 1) * n, c])
    # future blocks continue the past blocks
    np.testing.assert_array_equal(h.U_f[:2, :], t.u[:, p:p + N])
    np.testing.assert_array_equal(h.Y_p[-1:, :], t.y[:, p - 1:p - 1 + N])


def test_regressor_bank_boundaries():
    h = build_hankels(_scalar_traj([1, 2, 3, 4, 5, 6]), 2, 2, 3)
    bank = build_regressor_bank(h)
    np.testing.assert_array_equal(bank.regressor(2), np.vstack([h.Z_p, h.U_f]))
    assert bank.regressor(1).shape[0] == bank.d(1) == 5
    assert bank.d(2) - bank.d(1) == 1


def test_regressor_columns_by_hand():
    m = random_model(2, 2, 2, rng=3)
    p, f, N = 3, 4, 25
    t = simulate(m, p + f + N - 1, seed=5)
    bank = build_regressor_bank(build_hankels(t, p, f, N))
    for i in range(1, f + 1):
        Z = bank.regressor(i)
        for j in range(N):
            yp = np.concatenate([t.y[:, j + q] for q in range(p)])
            up = np.concatenate([t.u[:, j + q] for q in range(p)])
            ui = np.concatenate([t.u[:, j + p + q] for q in range(i)])
            np.testing.assert_array_equal(Z[:, j], np.concatenate([yp, up, ui]))
        np.testing.assert_array_equal(bank.target(i)[:, 5], t.y[:, 5 + p + i - 1])
        assert Z.shape[0] == bank.d(i) == p * 2 + (p + i) * 2


def test_empirical_covariance_basis_vector():
    u = np.zeros((1, 12))
    traj = Trajectory(u, np.ones_like(u), u.copy(), u.copy())
    bank = build_regressor_bank(build_hankels(traj, 1, 1, 10))
    S = empirical_covariance(bank, 1)
    expected = np.zeros((3, 3))
    expected[0, 0] = 1
    np.testing.assert_array_equal(S, expected)


def test_empirical_covariance_single_column():
    t = simulate(s1(), 3, seed=1)
    bank = build_regressor_bank(build_hankels(t, 1, 1, 1))
    z = bank.regressor(1)[:, 0]
    np.testing.assert_allclose(empirical_covariance(bank, 1), np.outer(z, z))


@pytest.mark.parametrize("seed", range(5))
def test_extended_model_identity(seed):
    m = random_model(3, 2, 2, rng=seed, sigma_e=0.3)
    p, f, N = 4, 5, 200
    t = simulate(m, p + f + N - 1, seed=seed)
    h = build_hankels(t, p, f, N)
    res = (h.Y_f - extended_observability(m, f) @ h.X_k
           - toeplitz_markov(m, f, "input") @ h.U_f - toeplitz_markov(m, f, "noise") @ h.E_f)
    assert np.linalg.norm(res) <= 1e-10 * np.linalg.norm(h.Y_f)


@pytest.mark.parametrize("seed", range(5))
def test_state_reconstruction_identity(seed):
    m = random_model(3, 2, 2, rng=seed, sigma_e=0.3)
    p, f, N = 3, 2, 150
    t = simulate(m, p + f + N - 1, seed=seed)
    h = build_hankels(t, p, f, N)
    Acp = np.linalg.matrix_power(m.A_c, p)
    res = h.X_k - extended_controllability(m, p) @ h.Z_p - Acp @ h.X_kp
    assert np.linalg.norm(res) <= 1e-10 * np.linalg.norm(h.X_k)


def test_state_reconstruction_nilpotent():
    m = s1()
    p, N = 2, 100
    h = build_hankels(simulate(m, p + 2 + N - 1, seed=2), p, 2, N)
    assert not (np.linalg.matrix_power(m.A_c, p) @ h.X_kp).any()
    np.testing.assert_allclose(h.X_k, extended_controllability(m, p) @ h.Z_p, atol=1e-13)


def test_rowwise_identity():
    m = random_model(2, 1, 2, rng=9, sigma_e=0.2)
    p, f, N = 3, 4, 120
    t = simulate(m, p + f + N - 1, seed=1)
    h = build_hankels(t, p, f, N)
    bank = build_regressor_bank(h)
    L = extended_controllability(m, p)
    Acp = np.linalg.matrix_power(m.A_c, p)
    H = toeplitz_markov(m, f, "noise")
    G = toeplitz_markov(m, f, "input")
    for i in range(1, f + 1):
        Gam_i = m.C @ np.linalg.matrix_power(m.A, i - 1)
        rows = slice((i - 1) * 2, i * 2)
        res = (bank.target(i) - Gam_i @ L @ h.Z_p - G[rows, :i] @ h.U_f[:i]
               - H[rows, :2 * i] @ bank.innovation_block(i) - Gam_i @ Acp @ h.X_kp)
        assert np.abs(res).max() <= 1e-10 * np.abs(bank.target(i)).max()
