import numpy as np
import pytest

from parsim.data_assembly import build_hankels, build_regressor_bank
from parsim.errors import PersistenceOfExcitationError
from parsim.estimators import (
    dump_thetas_csv,
    estimate_classical_projection,
    estimate_parsim_bank,
    true_gamma_lp,
    true_theta,
)
from parsim.system_model import markov_parameter, random_model, s1, simulate


def _bank(m, p, f, N, seed=0, noiseless=False):
    t = simulate(m, p + f + N - 1, seed=seed, noiseless=noiseless)
    h = build_hankels(t, p, f, N)
    return h, build_regressor_bank(h)


def test_exact_recovery_noiseless_p1():
    # with p = n_x the noiseless regressors are full rank and A - KC = 0 leaves no bias
    m = s1(sigma_e=0.0)
    h, bank = _bank(m, 1, 3, 500, noiseless=True)
    est = estimate_parsim_bank(bank)
    for i in range(1, 4):
        np.testing.assert_allclose(est.thetas[i - 1], true_theta(m, 1, i), atol=1e-6)
    np.testing.assert_allclose(est.gamma_lp, true_gamma_lp(m, 1, 3), atol=1e-6)
    np.testing.assert_allclose(estimate_classical_projection(h), true_gamma_lp(m, 1, 3),
                               atol=1e-6)


def test_noiseless_p2_is_not_excited():
    # y[k+1] - 0.5 y[k] - u[k] = 0 without innovations: Z_p loses rank for p > n_x
    m = s1(sigma_e=0.0)
    h, bank = _bank(m, 2, 3, 500, noiseless=True)
    with pytest.raises(PersistenceOfExcitationError) as info:
        estimate_parsim_bank(bank)
    assert info.value.i == 1
    with pytest.raises(PersistenceOfExcitationError):
        estimate_classical_projection(h)


def test_too_few_columns():
    _, bank = _bank(s1(), 2, 3, 6)
    with pytest.raises(PersistenceOfExcitationError) as info:
        estimate_parsim_bank(bank)
    # d_1 = 5 fits, d_2 = 6 fits, d_3 = 7 > 6
    assert info.value.i == 3


@pytest.mark.parametrize("seed", range(5))
def test_normal_equations_oracle(seed):
    m = random_model(2, 2, 2, rng=seed, sigma_e=0.5)
    _, bank = _bank(m, 3, 3, 400, seed=seed)
    est = estimate_parsim_bank(bank)
    for i in range(1, 4):
        Z, Y = bank.regressor(i), bank.target(i)
        oracle = np.linalg.solve(Z @ Z.T, Z @ Y.T).T
        assert np.linalg.norm(est.thetas[i - 1] - oracle) <= 1e-8 * np.linalg.norm(oracle)


def test_stacking_and_markov_layout():
    m = random_model(2, 2, 1, rng=4, sigma_e=0.1)
    p, f = 2, 4
    _, bank = _bank(m, p, f, 3000, seed=8)
    est = estimate_parsim_bank(bank)
    past = p * 3
    for i in range(1, f + 1):
        np.testing.assert_array_equal(est.gamma_lp[i - 1:i], est.thetas[i - 1][:, :past])
        np.testing.assert_array_equal(est.gamma_lp_row(i), est.thetas[i - 1][:, :past])
    assert sorted(est.markov_per_row) == [0, 1, 2, 3]
    assert [i for i, _ in est.markov_per_row[1]] == [2, 3, 4]
    assert [i for i, _ in est.markov_per_row[0]] == [1, 2, 3, 4]
    # Markov lag j sits at block i-1-j of row i
    G4 = est.input_markov_row(4)
    np.testing.assert_array_equal(est.markov_per_row[3][0][1], G4[:, 0:2])
    np.testing.assert_allclose(est.markov_mean[1],
                               np.mean([G for _, G in est.markov_per_row[1]], axis=0))
    # with N = 3000 the estimate is close to the truth
    np.testing.assert_allclose(est.markov_mean[1], markov_parameter(m, 1), atol=0.1)
    assert len(est.gram_min_singular_values) == f


def test_parallel_rows_match_serial():
    m = random_model(2, 1, 2, rng=1, sigma_e=0.3)
    _, bank = _bank(m, 3, 5, 800, seed=2)
    a = estimate_parsim_bank(bank)
    b = estimate_parsim_bank(bank, workers=3)
    for x, y in zip(a.thetas, b.thetas):
        np.testing.assert_array_equal(x, y)


def test_classical_too_short():
    h, _ = _bank(s1(), 1, 4, 3)
    with pytest.raises(PersistenceOfExcitationError):
        estimate_classical_projection(h)


def test_classical_matches_dense_projection():
    m = random_model(2, 1, 1, rng=5, sigma_e=0.4)
    h, _ = _bank(m, 3, 4, 300, seed=1)
    U, Z, Y = h.U_f, h.Z_p, h.Y_f
    P = np.eye(h.N) - U.T @ np.linalg.solve(U @ U.T, U)
    dense = Y @ P @ Z.T @ np.linalg.inv(Z @ P @ Z.T)
    np.testing.assert_allclose(estimate_classical_projection(h), dense, rtol=1e-8, atol=1e-10)


def test_true_theta_layout():
    m = s1()
    np.testing.assert_allclose(true_theta(m, 2, 1), [[0, 0.5, 0, 1, 0]])
    np.testing.assert_allclose(true_theta(m, 2, 2), [[0, 0.25, 0, 0.5, 1, 0]])


def test_dump_thetas(tmp_path):
    _, bank = _bank(s1(), 1, 2, 50)
    dump_thetas_csv(estimate_parsim_bank(bank), tmp_path)
    assert sorted(p.name for p in tmp_path.iterdir()) == ["theta_1.csv", "theta_2.csv"]
