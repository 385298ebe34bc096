"""Balanced SVD realization of an estimated Gamma_f L_p and recovery of
(A, B, C, K), plus the similarity bookkeeping needed to compare a
realization with the system that generated the data."""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import NamedTuple

import numpy as np
from scipy.linalg import orthogonal_procrustes

from .errors import AlignmentError, ExtractionError, RankDeficiencyError
from .system_model import (
    StateSpaceModel,
    extended_controllability,
    extended_observability,
    numerical_rank,
    save_model,
)

_EPS = np.finfo(float).eps


class SystemMatrices(NamedTuple):
    A: np.ndarray
    B: np.ndarray
    C: np.ndarray
    K: np.ndarray


@dataclass(frozen=True)
class RealizationResult:
    """Rank-n_x balanced factorization Gamma_hat @ L_hat of an input matrix.

    ``singular_values`` holds every singular value of the input, and
    ``sigma_gap`` is sigma_(n_x) - sigma_(n_x+1) (sigma_(n_x) when the input
    has exactly n_x of them). System matrices are filled in by :func:`realize`.
    """

    gamma: np.ndarray
    lp: np.ndarray
    singular_values: np.ndarray
    sigma_gap: float
    A: np.ndarray | None = None
    B: np.ndarray | None = None
    C: np.ndarray | None = None
    K: np.ndarray | None = None

    @property
    def n_x(self) -> int:
        return self.gamma.shape[1]

    @property
    def system(self) -> SystemMatrices | None:
        if self.A is None:
            return None
        return SystemMatrices(self.A, self.B, self.C, self.K)


@dataclass(frozen=True)
class AlignmentResult:
    """Realization errors after the change of basis T = pinv(Gamma_f) Gamma_hat."""

    T: np.ndarray
    cond_T: float
    err_A: float
    err_B: float
    err_C: float
    err_K: float
    err_gamma: float
    err_L: float


@dataclass(frozen=True)
class SvdConditionReport:
    delta: float
    sigma_n: float
    holds: bool


def _sign_fix(U, Vt):
    # flip so that each left singular vector has a positive largest-magnitude entry
    idx = np.argmax(np.abs(U), axis=0)
    signs = np.sign(U[idx, np.arange(U.shape[1])])
    signs[signs == 0] = 1.0
    return U * signs, Vt * signs[:, None]


def svd_realize(gamma_lp: np.ndarray, n_x: int) -> RealizationResult:
    """Split ``gamma_lp`` into U1 S1^(1/2) and S1^(1/2) V1' from its top-n_x SVD."""
    M = np.asarray(gamma_lp, dtype=float)
    if not 1 <= n_x <= min(M.shape):
        raise RankDeficiencyError(f"order {n_x} incompatible with matrix shape {M.shape}")
    U, s, Vt = np.linalg.svd(M, full_matrices=False)
    if s[0] == 0 or s[n_x - 1] <= max(M.shape) * _EPS * s[0]:
        raise RankDeficiencyError(
            f"sigma_{n_x} = {s[n_x - 1]:.3e} is numerically zero; order not supported by data"
        )
    U1, V1t = _sign_fix(U[:, :n_x], Vt[:n_x])
    root = np.sqrt(s[:n_x])
    gap = s[n_x - 1] - (s[n_x] if s.size > n_x else 0.0)
    return RealizationResult(U1 * root, root[:, None] * V1t, s, float(gap))


def extract_system(r: RealizationResult, p: int, f: int, n_x: int, n_u: int,
                   n_y: int) -> SystemMatrices:
    """Read (A, B, C, K) off the factors.

    C is the first block row of Gamma_hat, A solves the shift equation
    between Gamma_hat without its last and without its first block row, K
    is the last n_y-wide block of the past-output columns of L_hat and B the
    last n_u columns.
    """
    G, L = r.gamma, r.lp
    if f * n_y < n_x + n_y:
        raise ExtractionError(
            f"f*n_y = {f * n_y} rows leave fewer than n_x = {n_x} rows for the shift"
        )
    if G.shape != (f * n_y, n_x) or L.shape != (n_x, p * (n_y + n_u)):
        raise ExtractionError("factor shapes do not match (p, f, n_x, n_u, n_y)")
    upper, lower = G[:-n_y], G[n_y:]
    if numerical_rank(upper) < n_x:
        raise ExtractionError("shifted observability block is rank deficient")
    A = np.linalg.lstsq(upper, lower, rcond=None)[0]
    C = G[:n_y].copy()
    K = L[:, (p - 1) * n_y:p * n_y].copy()
    B = L[:, p * n_y + (p - 1) * n_u:p * n_y + p * n_u].copy()
    return SystemMatrices(A, B, C, K)


def realize(gamma_lp: np.ndarray, n_x: int, p: int, f: int, n_u: int, n_y: int) -> RealizationResult:
    """SVD realization followed by system extraction."""
    r = svd_realize(gamma_lp, n_x)
    return replace(r, **extract_system(r, p, f, n_x, n_u, n_y)._asdict())


def realization_from_factors(gamma, lp, p, f, n_u, n_y) -> RealizationResult:
    """Wrap arbitrary factors (e.g. a transformed truth) as a realization."""
    gamma, lp = np.asarray(gamma, float), np.asarray(lp, float)
    s = np.linalg.svd(gamma @ lp, compute_uv=False)
    n_x = gamma.shape[1]
    gap = s[n_x - 1] - (s[n_x] if s.size > n_x else 0.0)
    r = RealizationResult(gamma, lp, s, float(gap))
    return replace(r, **extract_system(r, p, f, n_x, n_u, n_y)._asdict())


def align_similarity(truth: StateSpaceModel, f: int, r: RealizationResult) -> AlignmentResult:
    """Compare a realization with ``truth`` after fitting T = pinv(Gamma_f) Gamma_hat.

    Errors are spectral norms of A_hat - T^-1 A T, B_hat - T^-1 B,
    C_hat - C T, K_hat - T^-1 K, Gamma_hat - Gamma_f T and L_hat - T^-1 L_p.
    """
    n_u, n_y, n_x = truth.n_u, truth.n_y, truth.n_x
    p, rem = divmod(r.lp.shape[1], n_u + n_y)
    if rem:
        raise AlignmentError("L_hat width is not a multiple of n_u + n_y")
    if r.system is None:
        r = replace(r, **extract_system(r, p, f, n_x, n_u, n_y)._asdict())
    Gamma = extended_observability(truth, f)
    if numerical_rank(Gamma) < n_x:
        raise AlignmentError("true extended observability matrix is rank deficient")
    T = np.linalg.pinv(Gamma) @ r.gamma
    cond = float(np.linalg.cond(T))
    if not np.isfinite(cond) or cond > 1e12:
        raise AlignmentError(f"similarity transform is singular (cond = {cond:.3e})")
    Ti = np.linalg.inv(T)
    L = extended_controllability(truth, p)
    norm = lambda M: float(np.linalg.norm(M, 2))  # noqa: E731
    return AlignmentResult(
        T=T,
        cond_T=cond,
        err_A=norm(r.A - Ti @ truth.A @ T),
        err_B=norm(r.B - Ti @ truth.B),
        err_C=norm(r.C - truth.C @ T),
        err_K=norm(r.K - Ti @ truth.K),
        err_gamma=norm(r.gamma - Gamma @ T),
        err_L=norm(r.lp - Ti @ L),
    )


def check_svd_condition(true_gamma_lp, est_gamma_lp, n_x: int) -> SvdConditionReport:
    """Is the estimation error at most a quarter of sigma_(n_x) of the truth?"""
    true_gamma_lp = np.asarray(true_gamma_lp, float)
    delta = float(np.linalg.norm(np.asarray(est_gamma_lp, float) - true_gamma_lp, 2))
    sigma_n = float(np.linalg.svd(true_gamma_lp, compute_uv=False)[n_x - 1])
    return SvdConditionReport(delta, sigma_n, delta <= sigma_n / 4)


# ---------------------------------------------------------------------------
# orthogonal alignment used by the robustness bound

def procrustes_transform(est: RealizationResult, ref: RealizationResult) -> np.ndarray:
    """Orthogonal T minimising ||Gamma_hat - Gamma_ref T||_F^2 + ||L_hat - T' L_ref||_F^2."""
    stacked_ref = np.vstack([ref.gamma, ref.lp.T])
    stacked_est = np.vstack([est.gamma, est.lp.T])
    T, _ = orthogonal_procrustes(stacked_ref, stacked_est)
    return T


def procrustes_errors(est: RealizationResult, ref: RealizationResult, T: np.ndarray) -> dict:
    """Factor and system-matrix errors of ``est`` against ``ref`` under orthogonal T."""
    norm = lambda M: float(np.linalg.norm(M, 2))  # noqa: E731
    out = {
        "gamma": norm(est.gamma - ref.gamma @ T),
        "lp": norm(est.lp - T.T @ ref.lp),
    }
    if est.system is not None and ref.system is not None:
        out.update(
            A=norm(est.A - T.T @ ref.A @ T),
            B=norm(est.B - T.T @ ref.B),
            C=norm(est.C - ref.C @ T),
            K=norm(est.K - T.T @ ref.K),
        )
    return out


def shift_sigma(est: RealizationResult, ref: RealizationResult, n_y: int) -> float:
    """min of sigma_(n_x) over both observability factors with the last block row removed."""
    n_x = est.n_x
    s_est = np.linalg.svd(est.gamma[:-n_y], compute_uv=False)
    s_ref = np.linalg.svd(ref.gamma[:-n_y], compute_uv=False)
    return float(min(s_est[n_x - 1], s_ref[n_x - 1]))


def save_realization(path, r: RealizationResult, sigma_e=1.0, sigma_u=1.0, **metadata) -> None:
    """Store the realized system in the model JSON schema plus metadata keys."""
    m = StateSpaceModel(r.A, r.B, r.C, r.K, sigma_e, sigma_u)
    meta = {"singular_values": r.singular_values.tolist(), "sigma_gap": r.sigma_gap}
    meta.update(metadata)
    save_model(m, path, realization=meta)
