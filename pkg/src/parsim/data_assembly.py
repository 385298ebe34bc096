"""Block-Hankel data matrices and the per-row regressor banks built from them."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ConfigurationError, DataLengthError
from .system_model import Trajectory


def block_hankel(signal: np.ndarray, start: int, rows: int, cols: int) -> np.ndarray:
    """Block Hankel matrix whose (r, c) block is ``signal[:, start + r + c]``."""
    n = signal.shape[0]
    H = np.empty((rows * n, cols))
    for r in range(rows):
        H[r * n:(r + 1) * n] = signal[:, start + r:start + r + cols]
    return H


@dataclass(frozen=True)
class HankelBundle:
    """Past/future data matrices for the split point k = p + 1.

    ``E_p``, ``E_f``, ``X_k`` and ``X_kp`` (the state sequence starting at
    k - p) come from the simulated innovations and states and exist only
    for structural checks; estimators never touch them.
    """

    U_p: np.ndarray
    U_f: np.ndarray
    Y_p: np.ndarray
    Y_f: np.ndarray
    p: int
    f: int
    N: int
    n_u: int
    n_y: int
    E_p: np.ndarray | None = None
    E_f: np.ndarray | None = None
    X_k: np.ndarray | None = None
    X_kp: np.ndarray | None = None

    @property
    def Z_p(self) -> np.ndarray:
        return np.vstack([self.Y_p, self.U_p])


def build_hankels(t: Trajectory, p: int, f: int, N: int) -> HankelBundle:
    """Arrange a trajectory of at least p + f + N - 1 samples into Hankel form."""
    if min(p, f, N) < 1:
        raise ConfigurationError("p, f and N must all be at least 1")
    need = p + f + N - 1
    if t.length < need:
        raise DataLengthError(
            f"trajectory has {t.length} samples, need p+f+N-1 = {need}"
        )
    return HankelBundle(
        U_p=block_hankel(t.u, 0, p, N),
        U_f=block_hankel(t.u, p, f, N),
        Y_p=block_hankel(t.y, 0, p, N),
        Y_f=block_hankel(t.y, p, f, N),
        p=p, f=f, N=N, n_u=t.u.shape[0], n_y=t.y.shape[0],
        E_p=block_hankel(t.e, 0, p, N),
        E_f=block_hankel(t.e, p, f, N),
        X_k=t.x[:, p:p + N].copy(),
        X_kp=t.x[:, :N].copy(),
    )


@dataclass(frozen=True)
class RegressorBank:
    """Regressor/target pairs of the f causal ARX problems.

    Lists are indexed from 0, row ``i`` (1-based) lives at position ``i-1``:
    ``regressors[i-1]`` is [Z_p; U_i] with U_i the first i block rows of
    U_f, ``targets[i-1]`` is block row i of Y_f.
    """

    regressors: list
    targets: list
    innovations: list
    p: int
    f: int
    N: int
    n_u: int
    n_y: int

    def regressor(self, i: int) -> np.ndarray:
        return self.regressors[self._index(i)]

    def target(self, i: int) -> np.ndarray:
        return self.targets[self._index(i)]

    def innovation_block(self, i: int) -> np.ndarray | None:
        return self.innovations[self._index(i)]

    def d(self, i: int) -> int:
        """Regressor dimension p*n_y + (p+i)*n_u."""
        return self.p * self.n_y + (self.p + i) * self.n_u

    def _index(self, i):
        if not 1 <= i <= self.f:
            raise IndexError(f"row index {i} outside 1..{self.f}")
        return i - 1


def build_regressor_bank(h: HankelBundle) -> RegressorBank:
    Z_p = h.Z_p
    regs, targets, innov = [], [], []
    for i in range(1, h.f + 1):
        regs.append(np.vstack([Z_p, h.U_f[:i * h.n_u]]))
        targets.append(h.Y_f[(i - 1) * h.n_y:i * h.n_y])
        innov.append(None if h.E_f is None else h.E_f[:i * h.n_y])
    return RegressorBank(regs, targets, innov, h.p, h.f, h.N, h.n_u, h.n_y)


def empirical_covariance(bank: RegressorBank, i: int) -> np.ndarray:
    """(1/N) sum_j z(j) z(j)' for the row-``i`` covariates."""
    Z = bank.regressor(i)
    S = Z @ Z.T / Z.shape[1]
    return (S + S.T) / 2


def dump_csv(matrix: np.ndarray, path) -> None:
    """Write a matrix to CSV for debugging."""
    np.savetxt(path, np.atleast_2d(matrix), delimiter=",")
