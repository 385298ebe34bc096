"""Least-squares estimators of Gamma_f L_p: the PARSIM ARX bank and the
classical projection estimator used as a baseline."""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np
from scipy.linalg import qr, solve_triangular

from .data_assembly import HankelBundle, RegressorBank
from .errors import PersistenceOfExcitationError
from .system_model import (
    StateSpaceModel,
    extended_controllability,
    extended_observability,
    markov_parameter,
)

_EPS = np.finfo(float).eps


@dataclass(frozen=True)
class ArxBankEstimate:
    """Result of the f row-wise OLS fits.

    Attributes:
        thetas: ``thetas[i-1]`` is [Gamma_fi L_p | G_fi] for row i, shape
            n_y x d_i.
        gamma_lp: the f row estimates of Gamma_fi L_p stacked vertically.
        markov_per_row: lag j -> list of (i, G_j estimate) over all rows
            that contain lag j. Lag 0 is estimated freely and reported too.
        markov_mean: lag j -> unweighted mean over ``markov_per_row[j]``.
        gram_min_singular_values: smallest singular value of Z Z' per row.
    """

    thetas: list
    gamma_lp: np.ndarray
    markov_per_row: dict
    markov_mean: dict
    gram_min_singular_values: list
    p: int
    f: int
    n_u: int
    n_y: int

    def gamma_lp_row(self, i: int) -> np.ndarray:
        return self.thetas[i - 1][:, :self.p * (self.n_u + self.n_y)]

    def input_markov_row(self, i: int) -> np.ndarray:
        """Estimated G_fi = [G_(i-1) ... G_1 G_0]."""
        return self.thetas[i - 1][:, self.p * (self.n_u + self.n_y):]


def _ols_row(Z: np.ndarray, Y: np.ndarray, i=None):
    """Solve theta Z = Y in the least-squares sense by QR of Z'.

    Returns (theta, smallest singular value of Z Z').
    """
    d, N = Z.shape
    if N < d:
        raise PersistenceOfExcitationError(
            f"row {i}: N = {N} columns for d = {d} regressors", i=i, singular_value=0.0
        )
    Q, R = qr(Z.T, mode="economic")
    s = np.linalg.svd(R, compute_uv=False)
    if s[0] == 0 or s[-1] <= max(d, N) * _EPS * s[0]:
        raise PersistenceOfExcitationError(
            f"row {i}: regressor Gram is singular (sigma_min = {s[-1] ** 2:.3e})",
            i=i, singular_value=float(s[-1] ** 2),
        )
    theta_t = solve_triangular(R, Q.T @ Y.T)
    return theta_t.T, float(s[-1] ** 2)


def estimate_parsim_bank(bank: RegressorBank, workers: int | None = None) -> ArxBankEstimate:
    """Fit the f causal ARX models of PARSIM by ordinary least squares.

    Rows are independent; with ``workers > 1`` they are solved in a thread
    pool and merged by row index, so the result does not depend on
    scheduling.

    Raises:
        PersistenceOfExcitationError: if some regressor Gram is singular
            to working precision (carries the row index).
    """
    rows = range(1, bank.f + 1)
    solve = lambda i: _ols_row(bank.regressor(i), bank.target(i), i)  # noqa: E731
    if workers and workers > 1:
        with ThreadPoolExecutor(workers) as pool:
            results = list(pool.map(solve, rows))
    else:
        results = [solve(i) for i in rows]
    thetas = [r[0] for r in results]
    gram_sv = [r[1] for r in results]

    n_u, n_y, p = bank.n_u, bank.n_y, bank.p
    past = p * (n_u + n_y)
    gamma_lp = np.vstack([th[:, :past] for th in thetas])
    per_row: dict[int, list] = {}
    for i, th in zip(rows, thetas):
        G = th[:, past:]
        for q in range(i):
            lag = i - 1 - q
            per_row.setdefault(lag, []).append((i, G[:, q * n_u:(q + 1) * n_u]))
    mean = {j: np.mean([G for _, G in v], axis=0) for j, v in sorted(per_row.items())}
    return ArxBankEstimate(thetas, gamma_lp, dict(sorted(per_row.items())), mean,
                           gram_sv, p, bank.f, n_u, n_y)


def estimate_classical_projection(h: HankelBundle) -> np.ndarray:
    """Projection estimate Y_f P Z_p' (Z_p P Z_p')^-1 with P = I - U_f'(U_f U_f')^-1 U_f.

    The projector is applied through an orthonormal basis of range(U_f')
    instead of forming the N x N matrix.
    """
    U = h.U_f
    Z = h.Z_p
    N = h.N
    if N < U.shape[0]:
        raise PersistenceOfExcitationError(
            f"U_f U_f' singular: N = {N} < f*n_u = {U.shape[0]}", singular_value=0.0
        )
    Q, R = qr(U.T, mode="economic")
    s = np.linalg.svd(R, compute_uv=False)
    if s[0] == 0 or s[-1] <= max(U.shape) * _EPS * s[0]:
        raise PersistenceOfExcitationError(
            "U_f U_f' is singular", singular_value=float(s[-1] ** 2)
        )

    def project(M):
        return M - (M @ Q) @ Q.T

    Zp, Yp = project(Z), project(h.Y_f)
    theta, _ = _ols_row(Zp, Yp)
    return theta


# ---------------------------------------------------------------------------
# ground truth for the quantities above

def true_gamma_lp(m: StateSpaceModel, p: int, f: int) -> np.ndarray:
    return extended_observability(m, f) @ extended_controllability(m, p)


def true_theta(m: StateSpaceModel, p: int, i: int) -> np.ndarray:
    """[C A^(i-1) L_p | C A^(i-2) B ... CB 0] for row i."""
    row = m.C @ np.linalg.matrix_power(m.A, i - 1) @ extended_controllability(m, p)
    G = [markov_parameter(m, i - 1 - q, "input") for q in range(i)]
    return np.hstack([row] + G)


def dump_thetas_csv(est: ArxBankEstimate, directory) -> None:
    """Write one ``theta_<i>.csv`` per row into ``directory``."""
    from pathlib import Path

    out = Path(directory)
    out.mkdir(parents=True, exist_ok=True)
    for i, th in enumerate(est.thetas, start=1):
        np.savetxt(out / f"theta_{i}.csv", th, delimiter=",")
