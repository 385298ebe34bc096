"""Finite-sample quantities for the PARSIM ARX bank.

Exact covariate covariances, signal-to-noise ratio, past-horizon selection,
burn-in time, the persistence-of-excitation test and the high-probability
error radii for a single ARX row, the stacked Gamma_f L_p estimate and the
realized system matrices. The universal constants ``c`` and ``c0`` are
unknown; they default to 1 and every report records the values used.
"""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field

import numpy as np

from .errors import (
    BurnInNotFoundError,
    ConditionViolatedError,
    ConfigurationError,
    HorizonInfeasibleError,
    NumericalCovarianceError,
)
from .realization import svd_realize
from .system_model import (
    StateSpaceModel,
    extended_controllability,
    extended_observability,
    spectral_radius,
    state_covariance,
    toeplitz_markov,
)


def covariate_dim(m: StateSpaceModel, p: int, i: int) -> int:
    return p * m.n_y + (p + i) * m.n_u


def covariate_covariance(m: StateSpaceModel, p: int, i: int, k: int) -> np.ndarray:
    """Exact E[z z'] for z = (y_k..y_(k+p-1), u_k..u_(k+p-1), u_(k+p)..u_(k+p+i-1)).

    The past outputs are the linear image Gamma_p x_k + G_p u_p + H_p e_p of
    the state at time k and the window inputs/innovations, which are
    mutually independent; the covariance follows without sampling.
    """
    if k < 1:
        raise ValueError("time index must be at least 1")
    Gam = extended_observability(m, p)
    Gp = toeplitz_markov(m, p, "input")
    Hp = toeplitz_markov(m, p, "noise")
    Sx = state_covariance(m, k)
    su2, se2 = m.sigma_u ** 2, m.sigma_e ** 2
    ny, nu = p * m.n_y, p * m.n_u
    d = covariate_dim(m, p, i)
    S = np.zeros((d, d))
    S[:ny, :ny] = Gam @ Sx @ Gam.T + su2 * Gp @ Gp.T + se2 * Hp @ Hp.T
    S[:ny, ny:ny + nu] = su2 * Gp
    S[ny:ny + nu, :ny] = su2 * Gp.T
    S[ny:, ny:] = su2 * np.eye(d - ny)
    return (S + S.T) / 2


def _lambda_min(S):
    return float(np.linalg.eigvalsh(S)[0])


def snr(m: StateSpaceModel, p: int, i: int, k: int) -> float:
    """lambda_min of the covariate covariance over sigma_e^2 (inf when noiseless)."""
    if m.sigma_e == 0:
        return math.inf
    return _lambda_min(covariate_covariance(m, p, i, k)) / m.sigma_e ** 2


@dataclass(frozen=True)
class HorizonChoice:
    p: int
    beta: float
    lhs: float
    target: float


def choose_past_horizon(m: StateSpaceModel, N: int, beta_grid) -> HorizonChoice:
    """Smallest p = max(n_x, ceil(beta ln N)) over ``beta_grid`` with
    ||C A_c^p|| ||Sigma_x,N|| <= N^-3."""
    if spectral_radius(m.A_c) >= 1:
        raise ConfigurationError("A - KC must be stable to choose a past horizon")
    Sx_norm = float(np.linalg.norm(state_covariance(m, N), 2))
    target = float(N) ** -3
    tried = []
    for beta in sorted(beta_grid):
        p = max(m.n_x, math.ceil(beta * math.log(N)))
        lhs = float(np.linalg.norm(m.C @ np.linalg.matrix_power(m.A_c, p), 2)) * Sx_norm
        tried.append((beta, p, lhs))
        if lhs <= target:
            return HorizonChoice(p, float(beta), lhs, target)
    raise HorizonInfeasibleError(
        f"no beta in grid meets the bias target {target:.3e} at N={N}; "
        f"tried (beta, p, lhs) = {tried}"
    )


def burn_in_threshold(m: StateSpaceModel, p: int, i: int, N: int, delta: float,
                      c0: float = 1.0) -> float:
    """N_0(N) = c0 tau max(sigma_e^2, 1) (log(1/delta) + d log C_sys(N))."""
    tau = i + p
    d = covariate_dim(m, p, i)
    lam = _lambda_min(covariate_covariance(m, p, i, tau))
    if lam <= 0:
        raise NumericalCovarianceError(
            f"covariance at tau={tau} is singular (lambda_min = {lam:.3e})"
        )
    big = float(np.linalg.norm(covariate_covariance(m, p, i, N), 2))
    c_sys = N / (3 * tau) * big ** 2 / lam ** 2
    return c0 * tau * max(m.sigma_e ** 2, 1.0) * (math.log(1 / delta) + d * math.log(c_sys))


def burn_in_time(m: StateSpaceModel, p: int, i: int, delta: float, c0: float = 1.0,
                 cap: int = 10 ** 8) -> int:
    """Smallest N with N >= N_0(N), by doubling then bisection up to ``cap``."""
    if not 0 < delta < 1:
        raise ValueError("delta must lie in (0, 1)")
    ok = lambda n: n >= burn_in_threshold(m, p, i, n, delta, c0)  # noqa: E731
    if ok(1):
        return 1
    lo, hi = 1, 2
    while not ok(hi):
        lo, hi = hi, hi * 2
        if lo >= cap:
            raise BurnInNotFoundError(f"no burn-in time below cap {cap}")
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if ok(mid):
            hi = mid
        else:
            lo = mid
    return hi


@dataclass(frozen=True)
class PEReport:
    margin: float
    holds: bool
    lambda_min_empirical: float


def pe_check(empirical: np.ndarray, theoretical: np.ndarray) -> PEReport:
    """Test empirical >= theoretical / 16 in the Loewner order."""
    empirical = np.asarray(empirical, float)
    theoretical = np.asarray(theoretical, float)
    if empirical.shape != theoretical.shape:
        raise ValueError("covariances differ in shape")
    D = empirical - theoretical / 16
    margin = _lambda_min((D + D.T) / 2)
    return PEReport(margin, margin >= 0, _lambda_min((empirical + empirical.T) / 2))


def noise_row(m: StateSpaceModel, i: int) -> np.ndarray:
    """[C A^(i-2) K ... CK I], the i-th block row of the noise Toeplitz matrix."""
    H = toeplitz_markov(m, i, "noise")
    return H[(i - 1) * m.n_y:, :]


@dataclass(frozen=True)
class ThetaBound:
    stochastic_sq: float
    bias_sq: float
    theta_sq: float
    snr: float
    log_det: float


def theta_error_bound(m: StateSpaceModel, p: int, f: int, i: int, N: int, delta: float,
                      c: float = 1.0) -> ThetaBound:
    """Squared error radii for row i of the ARX bank.

    stochastic = c ||H_fi||^2 / (SNR N) (d log(d/delta) + log det(S_N S_tau^-1)),
    bias = 16 c n_x log(1/delta) / (N^2 SNR); the combined radius has the
    stochastic form with the bias absorbed into the constant. SNR and the
    covariances S are taken at start times tau = i + p and N.
    """
    if not 1 <= i <= f:
        raise ValueError(f"row index {i} outside 1..{f}")
    if N < 1 or not 0 < delta < 1:
        raise ValueError("need N >= 1 and 0 < delta < 1")
    tau = i + p
    d = covariate_dim(m, p, i)
    s = snr(m, p, i, tau)
    if math.isinf(s):
        return ThetaBound(0.0, 0.0, 0.0, s, float("nan"))
    if s <= 0:
        raise NumericalCovarianceError("covariate covariance is not positive definite")
    sign_n, ld_n = np.linalg.slogdet(covariate_covariance(m, p, i, N))
    sign_t, ld_t = np.linalg.slogdet(covariate_covariance(m, p, i, tau))
    if sign_n <= 0 or sign_t <= 0:
        raise NumericalCovarianceError("covariate covariance is not positive definite")
    log_det = float(ld_n - ld_t)
    h2 = float(np.linalg.norm(noise_row(m, i), 2)) ** 2
    stochastic = c * h2 / (s * N) * (d * math.log(d / delta) + log_det)
    bias = 16 * c * m.n_x / (N ** 2 * s) * math.log(1 / delta)
    return ThetaBound(stochastic, bias, stochastic, s, log_det)


def stacked_bound(per_i_radii) -> float:
    """sqrt(f) times the largest row radius."""
    radii = list(per_i_radii)
    if not radii:
        raise ValueError("need at least one radius")
    return math.sqrt(len(radii)) * max(radii)


@dataclass(frozen=True)
class RealizationRadii:
    factor: float
    C: float
    K: float
    B: float
    A: float


def realization_bound(delta_norm: float, true_gamma_lp, n_x: int, sigma_o: float,
                      gamma_lp_norm: float | None = None) -> RealizationRadii:
    """Error radii for the balanced factors and the extracted system matrices.

    Requires ``delta_norm <= sigma_(n_x)(Gamma_f L_p) / 4``.
    """
    M = np.asarray(true_gamma_lp, float)
    s = np.linalg.svd(M, compute_uv=False)
    sigma_n = float(s[n_x - 1])
    if delta_norm > sigma_n / 4:
        raise ConditionViolatedError(
            f"perturbation {delta_norm:.3e} exceeds sigma_n/4 = {sigma_n / 4:.3e}"
        )
    if gamma_lp_norm is None:
        gamma_lp_norm = float(s[0])
    factor = 2 * math.sqrt(10 * n_x / sigma_n) * delta_norm
    a = (math.sqrt(gamma_lp_norm) + sigma_o) / sigma_o ** 2 * factor
    return RealizationRadii(factor, factor, factor, factor, a)


# ---------------------------------------------------------------------------
# reports

@dataclass
class BoundReport:
    i: int
    p: int
    f: int
    N: int
    delta: float
    tau: int
    d: int
    snr: float
    N_pe: int | None
    stochastic_radius_sq: float
    bias_radius_sq: float
    theta_radius_sq: float
    stacked_radius: float | None = None
    realization_radii: dict | None = None
    constants_used: dict = field(default_factory=dict)
    delta_split: dict = field(default_factory=dict)
    notes: list = field(default_factory=list)

    def to_dict(self) -> dict:
        return asdict(self)

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), allow_nan=True)


def bound_reports(m: StateSpaceModel, p: int, f: int, N: int, delta: float,
                  c: float = 1.0, c0: float = 1.0, sigma_o: float | None = None,
                  burn_in_cap: int = 10 ** 8) -> list[BoundReport]:
    """One report per row i = 1..f.

    The failure budget is split Bonferroni-style: each row radius uses
    delta/f so that all f events hold together with probability 1 - 2 delta,
    and the burn-in time uses delta/(3f). ``sigma_o`` defaults to
    sigma_(n_x) of the true balanced observability factor without its last
    block row.
    """
    split = {"theta_radius": "delta/f", "burn_in": "delta/(3f)"}
    reports = []
    for i in range(1, f + 1):
        tb = theta_error_bound(m, p, f, i, N, delta / f, c)
        notes = []
        try:
            n_pe = burn_in_time(m, p, i, delta / (3 * f), c0, cap=burn_in_cap)
        except (NumericalCovarianceError, BurnInNotFoundError) as exc:
            n_pe = None
            notes.append(f"burn-in unavailable: {exc}")
        if n_pe is not None and N < n_pe:
            notes.append(f"N = {N} is below the burn-in time {n_pe}")
        reports.append(BoundReport(
            i=i, p=p, f=f, N=N, delta=delta, tau=i + p, d=covariate_dim(m, p, i),
            snr=tb.snr, N_pe=n_pe, stochastic_radius_sq=tb.stochastic_sq,
            bias_radius_sq=tb.bias_sq, theta_radius_sq=tb.theta_sq,
            constants_used={"c": c, "c0": c0}, delta_split=split, notes=notes,
        ))

    stacked = stacked_bound([math.sqrt(r.theta_radius_sq) for r in reports])
    true_glp = extended_observability(m, f) @ extended_controllability(m, p)
    radii = None
    note = None
    try:
        if sigma_o is None:
            bar = svd_realize(true_glp, m.n_x).gamma[:-m.n_y]
            sigma_o = float(np.linalg.svd(bar, compute_uv=False)[m.n_x - 1])
        radii = asdict(realization_bound(stacked, true_glp, m.n_x, sigma_o))
    except ConditionViolatedError as exc:
        note = f"realization radii unavailable: {exc}"
    for r in reports:
        r.stacked_radius = stacked
        r.realization_radii = radii
        if note:
            r.notes.append(note)
    return reports

