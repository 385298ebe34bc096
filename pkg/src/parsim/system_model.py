"""Innovations-form LTI systems: validation, simulation and structural matrices.

The model is

    x[k+1] = A x[k] + B u[k] + K e[k]
    y[k]   = C x[k] + e[k]

with x[1] = 0, u ~ N(0, sigma_u^2 I) and e ~ N(0, sigma_e^2 I), all i.i.d.
Time is 1-based in docstrings and 0-based in arrays (column 0 holds k = 1).
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Literal

import numpy as np

from .errors import ConfigurationError, EmptyHorizonError, EmptyTrajectoryError

Channel = Literal["input", "noise"]

#: tolerance on spectral radii in :func:`validate_model`
RHO_TOL = 1e-9


def _as_matrix(name, value):
    arr = np.array(value, dtype=float, ndmin=2)
    if arr.ndim != 2:
        raise ConfigurationError(f"{name} must be a matrix, got shape {arr.shape}")
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class StateSpaceModel:
    """Innovations-form system (A, B, C, K) with Gaussian input/noise scales.

    Matrices are copied and frozen on construction, so instances can be
    shared freely between threads.
    """

    A: np.ndarray
    B: np.ndarray
    C: np.ndarray
    K: np.ndarray
    sigma_e: float = 1.0
    sigma_u: float = 1.0

    def __post_init__(self):
        for name in ("A", "B", "C", "K"):
            object.__setattr__(self, name, _as_matrix(name, getattr(self, name)))
        n_x = self.A.shape[0]
        if self.A.shape != (n_x, n_x):
            raise ConfigurationError(f"A must be square, got {self.A.shape}")
        if self.B.shape[0] != n_x:
            raise ConfigurationError(f"B has {self.B.shape[0]} rows, expected {n_x}")
        if self.C.shape[1] != n_x:
            raise ConfigurationError(f"C has {self.C.shape[1]} columns, expected {n_x}")
        if self.K.shape != (n_x, self.C.shape[0]):
            raise ConfigurationError(
                f"K must be {(n_x, self.C.shape[0])}, got {self.K.shape}"
            )
        if not self.sigma_e >= 0:
            raise ConfigurationError("sigma_e must be nonnegative")
        if not self.sigma_u > 0:
            raise ConfigurationError("sigma_u must be positive")
        object.__setattr__(self, "sigma_e", float(self.sigma_e))
        object.__setattr__(self, "sigma_u", float(self.sigma_u))

    @property
    def n_x(self) -> int:
        return self.A.shape[0]

    @property
    def n_u(self) -> int:
        return self.B.shape[1]

    @property
    def n_y(self) -> int:
        return self.C.shape[0]

    @property
    def A_c(self) -> np.ndarray:
        """Predictor-form state matrix A - K C."""
        return self.A - self.K @ self.C

    def with_noise(self, sigma_e: float) -> "StateSpaceModel":
        return StateSpaceModel(self.A, self.B, self.C, self.K, sigma_e, self.sigma_u)

    def to_dict(self) -> dict:
        return {
            "A": self.A.tolist(),
            "B": self.B.tolist(),
            "C": self.C.tolist(),
            "K": self.K.tolist(),
            "sigma_e": self.sigma_e,
            "sigma_u": self.sigma_u,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "StateSpaceModel":
        try:
            return cls(d["A"], d["B"], d["C"], d["K"],
                       d.get("sigma_e", 1.0), d.get("sigma_u", 1.0))
        except KeyError as exc:
            raise ConfigurationError(f"model document lacks key {exc}") from None


def save_model(m: StateSpaceModel, path, **extra) -> None:
    """Write ``m`` as JSON; ``extra`` keys are stored alongside the matrices."""
    doc = m.to_dict()
    doc.update(extra)
    Path(path).write_text(json.dumps(doc, indent=2))


def load_model(path) -> StateSpaceModel:
    try:
        doc = json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigurationError(f"cannot read model {path}: {exc}") from None
    if not isinstance(doc, dict):
        raise ConfigurationError(f"model file {path} must hold a JSON object")
    return StateSpaceModel.from_dict(doc)


def s1(sigma_e: float = 0.1, sigma_u: float = 1.0) -> StateSpaceModel:
    """Scalar test system with A=0.5, B=C=1, K=0.5, so that A - KC = 0."""
    return StateSpaceModel([[0.5]], [[1.0]], [[1.0]], [[0.5]], sigma_e, sigma_u)


FIXTURES = {"S1": s1}


# ---------------------------------------------------------------------------
# validation

def spectral_radius(M: np.ndarray) -> float:
    if M.size == 0:
        return 0.0
    return float(np.max(np.abs(np.linalg.eigvals(M))))


def numerical_rank(M: np.ndarray, n: int | None = None) -> int:
    """Rank with threshold ``n * eps * sigma_max`` (``n`` defaults to min(M.shape))."""
    s = np.linalg.svd(M, compute_uv=False)
    if s.size == 0 or s[0] == 0:
        return 0
    if n is None:
        n = min(M.shape)
    return int(np.sum(s > n * np.finfo(float).eps * s[0]))


def observability_matrix(A, C, n=None):
    n = A.shape[0] if n is None else n
    blocks, Ak = [], np.eye(A.shape[0])
    for _ in range(n):
        blocks.append(C @ Ak)
        Ak = A @ Ak
    return np.vstack(blocks)


def controllability_matrix(A, B, n=None):
    n = A.shape[0] if n is None else n
    blocks, Ak = [], np.eye(A.shape[0])
    for _ in range(n):
        blocks.append(Ak @ B)
        Ak = A @ Ak
    return np.hstack(blocks)


@dataclass(frozen=True)
class ValidationReport:
    passed: bool
    rho_A: float
    rho_Ac: float
    observability_rank: int
    controllability_rank: int
    n_x: int
    failures: tuple[str, ...] = field(default_factory=tuple)

    def to_dict(self) -> dict:
        return {
            "passed": self.passed,
            "rho_A": self.rho_A,
            "rho_Ac": self.rho_Ac,
            "observability_rank": self.observability_rank,
            "controllability_rank": self.controllability_rank,
            "n_x": self.n_x,
            "failures": list(self.failures),
        }


def validate_model(m: StateSpaceModel, noiseless: bool = False) -> ValidationReport:
    """Check stability, minimality and noise scale of ``m``.

    The check on A allows marginal stability (rho(A) <= 1 + RHO_TOL); the
    predictor matrix A - KC must be strictly stable with margin RHO_TOL.
    A zero ``sigma_e`` is only accepted when ``noiseless`` is set.
    """
    n = m.n_x
    rho_A = spectral_radius(m.A)
    rho_Ac = spectral_radius(m.A_c)
    obs = numerical_rank(observability_matrix(m.A, m.C), n)
    ctrl = numerical_rank(controllability_matrix(m.A, np.hstack([m.B, m.K])), n)
    failures = []
    if rho_A > 1 + RHO_TOL:
        failures.append(f"rho(A) = {rho_A:.6g} exceeds 1")
    if rho_Ac >= 1 - RHO_TOL:
        failures.append(f"rho(A-KC) = {rho_Ac:.6g} is not below 1")
    if obs < n:
        failures.append(f"(A, C) not observable: rank {obs} < {n}")
    if ctrl < n:
        failures.append(f"(A, [B K]) not controllable: rank {ctrl} < {n}")
    if m.sigma_e == 0 and not noiseless:
        failures.append("sigma_e = 0 requires the noiseless flag")
    return ValidationReport(not failures, rho_A, rho_Ac, obs, ctrl, n, tuple(failures))


def random_model(n_x, n_u, n_y, rng=None, rho=0.8, sigma_e=0.1, sigma_u=1.0,
                 max_tries=1000) -> StateSpaceModel:
    """Draw a random minimal system with rho(A) = ``rho`` and stable A - KC."""
    rng = np.random.default_rng(rng)
    for _ in range(max_tries):
        A = rng.standard_normal((n_x, n_x))
        A *= rho / max(spectral_radius(A), 1e-12)
        B = rng.standard_normal((n_x, n_u))
        C = rng.standard_normal((n_y, n_x))
        K = 0.3 * rng.standard_normal((n_x, n_y))
        m = StateSpaceModel(A, B, C, K, sigma_e, sigma_u)
        rep = validate_model(m)
        # keep some margin so horizons of a few steps are meaningful
        if rep.passed and rep.rho_Ac < 0.95:
            return m
    raise RuntimeError("could not draw a valid random model")


# ---------------------------------------------------------------------------
# simulation

@dataclass(frozen=True)
class Trajectory:
    """Sampled sequences, one column per time step (column 0 is k = 1)."""

    u: np.ndarray
    y: np.ndarray
    x: np.ndarray
    e: np.ndarray

    @property
    def length(self) -> int:
        return self.u.shape[1]

    def save(self, path) -> None:
        np.savez(path, u=self.u, y=self.y, x=self.x, e=self.e)

    @classmethod
    def load(cls, path) -> "Trajectory":
        with np.load(path) as data:
            return cls(data["u"], data["y"], data["x"], data["e"])


def propagate(m: StateSpaceModel, u: np.ndarray, e: np.ndarray):
    """Run the state recursion from x[1] = 0; returns (x, y)."""
    length = u.shape[1]
    x = np.zeros((m.n_x, length))
    drive = m.B @ u + m.K @ e
    A = m.A
    xk = np.zeros(m.n_x)
    for k in range(length - 1):
        xk = A @ xk + drive[:, k]
        x[:, k + 1] = xk
    y = m.C @ x + e
    return x, y


def simulate(m: StateSpaceModel, length: int, seed=None, noiseless: bool = False,
             u: np.ndarray | None = None) -> Trajectory:
    """Simulate ``length`` samples of ``m``.

    Inputs and innovations come from ``numpy.random.default_rng(seed)``
    (PCG64): first the input block, then the innovation block, so the input
    sequence for a given seed does not depend on the noise setting. An
    explicit ``u`` (n_u x length) overrides the random input.
    """
    if length < 1:
        raise EmptyTrajectoryError("trajectory length must be at least 1")
    rng = np.random.default_rng(seed)
    draw_u = rng.standard_normal((m.n_u, length)) * m.sigma_u
    draw_e = rng.standard_normal((m.n_y, length)) * m.sigma_e
    if u is None:
        u = draw_u
    else:
        u = np.array(u, dtype=float, ndmin=2)
        if u.shape != (m.n_u, length):
            raise ConfigurationError(f"u must be {(m.n_u, length)}, got {u.shape}")
    e = np.zeros((m.n_y, length)) if noiseless or m.sigma_e == 0 else draw_e
    x, y = propagate(m, u, e)
    for arr in (u, y, x, e):
        arr.setflags(write=False)
    return Trajectory(u, y, x, e)


# ---------------------------------------------------------------------------
# structural matrices

def _check_horizon(h, name="horizon"):
    if h < 1:
        raise EmptyHorizonError(f"{name} must be at least 1, got {h}")


def markov_parameter(m: StateSpaceModel, j: int, channel: Channel = "input") -> np.ndarray:
    """Impulse-response coefficient at lag ``j``.

    ``input``: 0 at lag 0, C A^(j-1) B afterwards. ``noise``: I at lag 0,
    C A^(j-1) K afterwards.
    """
    if j < 0:
        raise ValueError("lag must be nonnegative")
    G = m.B if channel == "input" else m.K
    if channel not in ("input", "noise"):
        raise ValueError(f"unknown channel {channel!r}")
    if j == 0:
        return np.zeros((m.n_y, m.n_u)) if channel == "input" else np.eye(m.n_y)
    return m.C @ np.linalg.matrix_power(m.A, j - 1) @ G


def extended_observability(m: StateSpaceModel, f: int) -> np.ndarray:
    """Stack C, CA, ..., CA^(f-1) (shape f*n_y x n_x)."""
    _check_horizon(f, "f")
    return observability_matrix(m.A, m.C, f)


def toeplitz_markov(m: StateSpaceModel, f: int, channel: Channel = "input") -> np.ndarray:
    """Block lower-triangular Toeplitz matrix of Markov parameters."""
    _check_horizon(f, "f")
    blocks = [markov_parameter(m, j, channel) for j in range(f)]
    r, c = blocks[0].shape
    T = np.zeros((f * r, f * c))
    for row in range(f):
        for col in range(row + 1):
            T[row * r:(row + 1) * r, col * c:(col + 1) * c] = blocks[row - col]
    return T


def extended_controllability(m: StateSpaceModel, p: int) -> np.ndarray:
    """Predictor-form controllability matrix mapping past data to the state.

    Columns are [A_c^(p-1)K ... A_c K  K | A_c^(p-1)B ... A_c B  B].
    """
    _check_horizon(p, "p")
    Ac = m.A_c
    Kb, Bb, P = [], [], np.eye(m.n_x)
    for _ in range(p):
        Kb.append(P @ m.K)
        Bb.append(P @ m.B)
        P = Ac @ P
    return np.hstack(Kb[::-1] + Bb[::-1])


def _gramian_sum(A: np.ndarray, Q: np.ndarray, steps: int) -> np.ndarray:
    """sum_{j=0}^{steps-1} A^j Q A^j' by binary splitting, O(log steps) products."""
    n = A.shape[0]
    total = np.zeros((n, n))
    lead = np.eye(n)           # A^(number of terms already in total)
    chunk, chunk_pow = Q.copy(), A.copy()  # sum of 2^t terms and A^(2^t)
    while steps:
        if steps & 1:
            total = total + lead @ chunk @ lead.T
            lead = lead @ chunk_pow
        steps >>= 1
        if steps:
            chunk = chunk + chunk_pow @ chunk @ chunk_pow.T
            chunk_pow = chunk_pow @ chunk_pow
    return (total + total.T) / 2


def state_covariance(m: StateSpaceModel, k: int) -> np.ndarray:
    """E[x_k x_k'] for the zero-initialised system.

    Equals the recursion S_1 = 0, S_{k+1} = A S_k A' + sigma_u^2 BB' +
    sigma_e^2 KK', evaluated in closed form so that very large ``k`` is cheap.
    """
    if k < 1:
        raise ValueError("time index must be at least 1")
    Q = m.sigma_u ** 2 * m.B @ m.B.T + m.sigma_e ** 2 * m.K @ m.K.T
    return _gramian_sum(m.A, Q, k - 1)
