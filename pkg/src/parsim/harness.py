"""Monte Carlo sweeps over the sample size N.

Each trial simulates the configured system, runs the estimator(s), realizes
the system, aligns it with the truth and records the errors together with
the persistence-of-excitation margin. Sweeps aggregate trials per N, fit
log-log slopes of the median errors and measure how often the row error
radii cover the observed errors.
"""

from __future__ import annotations

import csv
import hashlib
import json
import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, fields
from functools import lru_cache
from pathlib import Path
from typing import NamedTuple

import numpy as np

from .bounds import bound_reports, choose_past_horizon, covariate_covariance, pe_check
from .data_assembly import build_hankels, build_regressor_bank, empirical_covariance
from .errors import (
    ConfigurationError,
    FitError,
    ParsimError,
    PersistenceOfExcitationError,
    SweepError,
)
from .estimators import (
    estimate_classical_projection,
    estimate_parsim_bank,
    true_gamma_lp,
    true_theta,
)
from .realization import align_similarity, realize
from .system_model import FIXTURES, StateSpaceModel, simulate, validate_model

log = logging.getLogger(__name__)

ESTIMATORS = ("parsim", "classical", "both")
DEFAULT_BETA_GRID = tuple(0.25 * k for k in range(1, 81))

ROW_COLUMNS = (
    "N", "trial", "seed", "err_theta_max", "err_gammalp", "err_A", "err_B",
    "err_C", "err_K", "pe_margin", "sigma_gap", "status",
)
# trailing columns: horizon used, coverage flag and the paired baseline errors
EXTRA_COLUMNS = (
    "p", "covered", "err_gammalp_classical", "err_A_classical", "err_B_classical",
    "err_C_classical", "err_K_classical",
)
METRICS = ("err_theta_max", "err_gammalp", "err_A", "err_B", "err_C", "err_K")


@dataclass(frozen=True)
class ExperimentConfig:
    """Sweep description; round-trips through JSON.

    ``model`` is a fixture name (e.g. ``"S1"``) or a model document with keys
    A, B, C, K, sigma_e, sigma_u. ``sigma_e`` optionally overrides the noise
    level of the model. ``p_rule`` is an integer or ``"assumption2"``, in
    which case p is recomputed for each N from ``beta_grid``.
    """

    model: str | dict = "S1"
    f: int | None = None
    p_rule: int | str = 2
    N_grid: tuple = (250, 500, 1000, 2000, 4000, 8000)
    trials: int = 50
    delta: float = 0.05
    base_seed: int = 0
    c: float = 1.0
    c0: float = 1.0
    estimator: str = "parsim"
    output_dir: str = "sweep_out"
    beta_grid: tuple = DEFAULT_BETA_GRID
    sigma_e: float | None = None

    def __post_init__(self):
        object.__setattr__(self, "N_grid", tuple(int(n) for n in self.N_grid))
        object.__setattr__(self, "beta_grid", tuple(float(b) for b in self.beta_grid))
        if isinstance(self.model, dict):
            # freeze the mapping so configs stay hashable
            object.__setattr__(self, "model", json.dumps(self.model, sort_keys=True))

    # -- construction ---------------------------------------------------------

    @classmethod
    def from_dict(cls, d: dict) -> "ExperimentConfig":
        known = {f.name for f in fields(cls)}
        unknown = set(d) - known
        if unknown:
            raise ConfigurationError(f"unknown config keys: {sorted(unknown)}")
        try:
            cfg = cls(**d)
        except (TypeError, ValueError) as exc:
            raise ConfigurationError(str(exc)) from None
        cfg.validate()
        return cfg

    @classmethod
    def load(cls, path) -> "ExperimentConfig":
        try:
            doc = json.loads(Path(path).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigurationError(f"cannot read config {path}: {exc}") from None
        return cls.from_dict(doc)

    def to_dict(self) -> dict:
        d = asdict(self)
        d["N_grid"] = list(self.N_grid)
        d["beta_grid"] = list(self.beta_grid)
        if isinstance(self.model, str) and self.model.lstrip().startswith("{"):
            d["model"] = json.loads(self.model)
        return d

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)

    # -- derived ----------------------------------------------------------------

    def system(self) -> StateSpaceModel:
        return _resolve_model(self.model, self.sigma_e)

    @property
    def future_horizon(self) -> int:
        return self.f if self.f is not None else 2 * self.system().n_x + 1

    def past_horizon(self, N: int) -> int:
        if self.p_rule == "assumption2":
            return choose_past_horizon(self.system(), N, self.beta_grid).p
        return int(self.p_rule)

    def validate(self) -> None:
        if not self.N_grid or any(b <= a for a, b in zip(self.N_grid, self.N_grid[1:])):
            raise ConfigurationError("N_grid must be nonempty and strictly increasing")
        if self.N_grid[0] < 1:
            raise ConfigurationError("N_grid entries must be positive")
        if self.trials < 1:
            raise ConfigurationError("trials must be at least 1")
        if not 0 < self.delta < 1:
            raise ConfigurationError("delta must lie in (0, 1)")
        if self.estimator not in ESTIMATORS:
            raise ConfigurationError(f"estimator must be one of {ESTIMATORS}")
        if self.p_rule != "assumption2":
            try:
                p = int(self.p_rule)
            except (TypeError, ValueError):
                raise ConfigurationError(f"bad p_rule {self.p_rule!r}") from None
            if p < 1:
                raise ConfigurationError("fixed p must be at least 1")
        m = self.system()
        if self.future_horizon * m.n_y < m.n_x + m.n_y:
            raise ConfigurationError("f*n_y must be at least n_x + n_y")
        rep = validate_model(m, noiseless=m.sigma_e == 0)
        if not rep.passed:
            raise ConfigurationError("model fails validation: " + "; ".join(rep.failures))


def _resolve_model(source, sigma_e=None) -> StateSpaceModel:
    if isinstance(source, str) and source.lstrip().startswith("{"):
        source = json.loads(source)
    if isinstance(source, dict):
        m = StateSpaceModel.from_dict(source)
    elif source in FIXTURES:
        m = FIXTURES[source]()
    else:
        raise ConfigurationError(f"unknown model fixture {source!r}")
    return m if sigma_e is None else m.with_noise(sigma_e)


def trial_seed(base_seed: int, N: int, trial_index: int) -> int:
    """base_seed XOR a 64-bit BLAKE2b hash of (N, trial_index)."""
    digest = hashlib.blake2b(f"{N}:{trial_index}".encode(), digest_size=8).digest()
    return (int(base_seed) ^ int.from_bytes(digest, "big")) & (2 ** 64 - 1)


@dataclass
class TrialRow:
    N: int
    trial: int
    seed: int
    err_theta_max: float = math.nan
    err_gammalp: float = math.nan
    err_A: float = math.nan
    err_B: float = math.nan
    err_C: float = math.nan
    err_K: float = math.nan
    pe_margin: float = math.nan
    sigma_gap: float = math.nan
    status: str = "ok"
    p: int = 0
    covered: int = -1
    err_gammalp_classical: float = math.nan
    err_A_classical: float = math.nan
    err_B_classical: float = math.nan
    err_C_classical: float = math.nan
    err_K_classical: float = math.nan
    theta_errors: tuple = field(default=(), repr=False)

    @property
    def ok(self) -> bool:
        return self.status == "ok"

    def csv_values(self) -> list:
        return [_fmt(getattr(self, c)) for c in ROW_COLUMNS + EXTRA_COLUMNS]


def _fmt(v):
    if isinstance(v, float):
        return repr(v)
    return str(v)


@lru_cache(maxsize=256)
def _reports_for(cfg: ExperimentConfig, N: int, p: int):
    m = cfg.system()
    try:
        return tuple(bound_reports(m, p, cfg.future_horizon, N, cfg.delta, cfg.c, cfg.c0))
    except ParsimError as exc:
        log.warning("bound reports unavailable for N=%d: %s", N, exc)
        return None


@lru_cache(maxsize=256)
def _pe_reference(cfg: ExperimentConfig, p: int):
    f = cfg.future_horizon
    return covariate_covariance(cfg.system(), p, f, p + f)


def _realize_and_align(m, est_glp, p, f):
    r = realize(est_glp, m.n_x, p, f, m.n_u, m.n_y)
    return r, align_similarity(m, f, r)


def run_trial(cfg: ExperimentConfig, N: int, trial_index: int) -> TrialRow:
    """One deterministic replicate at sample size N.

    Estimation failures (lack of excitation, rank loss) do not raise; they
    are recorded in ``status`` so that the sweep can continue.
    """
    m = cfg.system()
    f = cfg.future_horizon
    p = cfg.past_horizon(N)
    seed = trial_seed(cfg.base_seed, N, trial_index)
    row = TrialRow(N=N, trial=trial_index, seed=seed, p=p)
    traj = simulate(m, p + f + N - 1, seed=seed, noiseless=m.sigma_e == 0)
    h = build_hankels(traj, p, f, N)
    truth = true_gamma_lp(m, p, f)
    try:
        if cfg.estimator in ("parsim", "both"):
            bank = build_regressor_bank(h)
            est = estimate_parsim_bank(bank)
            errs = tuple(
                float(np.linalg.norm(th - true_theta(m, p, i), 2))
                for i, th in enumerate(est.thetas, start=1)
            )
            row.theta_errors = errs
            row.err_theta_max = max(errs)
            row.err_gammalp = float(np.linalg.norm(est.gamma_lp - truth, 2))
            row.pe_margin = pe_check(empirical_covariance(bank, f), _pe_reference(cfg, p)).margin
            r, al = _realize_and_align(m, est.gamma_lp, p, f)
            row.sigma_gap = r.sigma_gap
            row.err_A, row.err_B, row.err_C, row.err_K = al.err_A, al.err_B, al.err_C, al.err_K
            reports = _reports_for(cfg, N, p)
            if reports is not None:
                row.covered = int(all(
                    e ** 2 <= rep.theta_radius_sq for e, rep in zip(errs, reports)
                ))
        if cfg.estimator in ("classical", "both"):
            glp = estimate_classical_projection(h)
            rc, alc = _realize_and_align(m, glp, p, f)
            err_c = float(np.linalg.norm(glp - truth, 2))
            if cfg.estimator == "classical":
                row.err_gammalp = err_c
                row.sigma_gap = rc.sigma_gap
                row.err_A, row.err_B, row.err_C, row.err_K = (
                    alc.err_A, alc.err_B, alc.err_C, alc.err_K)
            else:
                row.err_gammalp_classical = err_c
                row.err_A_classical, row.err_B_classical = alc.err_A, alc.err_B
                row.err_C_classical, row.err_K_classical = alc.err_C, alc.err_K
    except PersistenceOfExcitationError as exc:
        row.status = "pe_failure"
        log.info("N=%d trial=%d row=%s: %s", N, trial_index, exc.i, exc)
    except ParsimError as exc:
        row.status = "realization_failure"
        log.info("N=%d trial=%d: %s", N, trial_index, exc)
    return row


# ---------------------------------------------------------------------------
# aggregation

class LogLogFit(NamedTuple):
    slope: float
    intercept: float
    residual: float


def fit_loglog_slope(points) -> LogLogFit:
    """Least-squares line through (ln N, ln error).

    ``residual`` is the root-mean-square deviation in log space.
    """
    pts = [(float(n), float(e)) for n, e in points]
    if any(not e > 0 for _, e in pts):
        raise FitError("errors must be positive for a log-log fit")
    if len({n for n, _ in pts}) < 2:
        raise FitError("need at least two distinct N values")
    x = np.log([n for n, _ in pts])
    y = np.log([e for _, e in pts])
    X = np.column_stack([x, np.ones_like(x)])
    coef, *_ = np.linalg.lstsq(X, y, rcond=None)
    res = float(np.sqrt(np.mean((X @ coef - y) ** 2)))
    return LogLogFit(float(coef[0]), float(coef[1]), res)


def coverage_check(rows, bound_reports) -> dict:
    """Fraction of successful trials per N whose row errors lie inside the radii.

    ``bound_reports`` is aligned with ``rows``: entry j holds the f row
    reports used for ``rows[j]``. A trial is covered when every row error
    satisfies ||theta_hat_i - theta_i||^2 <= theta_radius_sq of row i.
    """
    rows = list(rows)
    bound_reports = list(bound_reports)
    if len(rows) != len(bound_reports):
        raise ValueError("rows and bound reports are not aligned")
    hits: dict[int, list] = {}
    for row, reps in zip(rows, bound_reports):
        if any(rep.N != row.N for rep in reps):
            raise ValueError(f"bound report N does not match row N={row.N}")
        if len(reps) != len(row.theta_errors) and row.ok:
            raise ValueError("number of reports differs from number of rows i")
        bucket = hits.setdefault(row.N, [])
        if not row.ok:
            continue
        bucket.append(all(e ** 2 <= rep.theta_radius_sq
                          for e, rep in zip(row.theta_errors, reps)))
    return {N: (float(np.mean(v)) if v else math.nan) for N, v in sorted(hits.items())}


@dataclass
class SweepResult:
    config: ExperimentConfig
    rows: list
    aggregates: dict
    slopes: dict
    coverage: dict
    failures: dict

    def summary(self) -> dict:
        return {
            "config": self.config.to_dict(),
            "aggregates": {str(k): v for k, v in self.aggregates.items()},
            "slopes": self.slopes,
            "coverage": {str(k): v for k, v in self.coverage.items()},
            "nominal_coverage": 1 - 2 * self.config.delta,
            "failures": {str(k): v for k, v in self.failures.items()},
        }


def _aggregate(rows, metrics):
    out = {}
    for name in metrics:
        vals = np.array([getattr(r, name) for r in rows], dtype=float)
        vals = vals[np.isfinite(vals)]
        if vals.size == 0:
            continue
        q10, med, q90 = np.quantile(vals, [0.1, 0.5, 0.9])
        out[name] = {"median": float(med), "q10": float(q10), "q90": float(q90)}
    return out


def _run_one(args):
    cfg, N, t = args
    return run_trial(cfg, N, t)


def run_sweep(cfg: ExperimentConfig, workers: int = 1) -> SweepResult:
    """Run every (N, trial) pair and aggregate.

    Rows are ordered by (N, trial) regardless of ``workers``, so serial and
    parallel runs give identical results.

    Raises:
        SweepError: if all trials at some N failed.
    """
    cfg.validate()
    jobs = [(cfg, N, t) for N in cfg.N_grid for t in range(cfg.trials)]
    if workers > 1:
        with ProcessPoolExecutor(workers) as pool:
            rows = list(pool.map(_run_one, jobs, chunksize=max(1, len(jobs) // (4 * workers))))
    else:
        rows = [_run_one(j) for j in jobs]

    metrics = list(METRICS)
    if cfg.estimator == "both":
        metrics += [f"{m}_classical" for m in METRICS[1:]]
    aggregates, failures = {}, {}
    for N in cfg.N_grid:
        at_n = [r for r in rows if r.N == N]
        good = [r for r in at_n if r.ok]
        failures[N] = len(at_n) - len(good)
        if not good:
            raise SweepError(f"all {len(at_n)} trials failed at N={N}")
        aggregates[N] = _aggregate(good, metrics)
        aggregates[N]["trials_ok"] = len(good)
        if cfg.estimator == "both":
            ratio = [r.err_gammalp / r.err_gammalp_classical for r in good
                     if r.err_gammalp_classical > 0]
            if ratio:
                aggregates[N]["parsim_classical_ratio_median"] = float(np.median(ratio))

    slopes = {}
    for name in metrics:
        pts = [(N, aggregates[N][name]["median"]) for N in cfg.N_grid
               if name in aggregates[N] and aggregates[N][name]["median"] > 0]
        try:
            slopes[name] = LogLogFit(*fit_loglog_slope(pts))._asdict()
        except FitError:
            continue

    coverage = {}
    if cfg.estimator in ("parsim", "both"):
        reports = [_reports_for(cfg, r.N, r.p) for r in rows]
        usable = [(r, rep) for r, rep in zip(rows, reports) if rep is not None]
        if usable:
            coverage = coverage_check([u[0] for u in usable], [u[1] for u in usable])
    return SweepResult(cfg, rows, aggregates, slopes, coverage, failures)


# ---------------------------------------------------------------------------
# files

def write_rows_csv(rows, path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(ROW_COLUMNS + EXTRA_COLUMNS)
        for r in rows:
            w.writerow(r.csv_values())


def read_rows_csv(path) -> list[dict]:
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


def write_sweep(result: SweepResult, out_dir=None) -> Path:
    """Write rows.csv, summary.json and config.json; returns the directory."""
    out = Path(out_dir or result.config.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    write_rows_csv(result.rows, out / "rows.csv")
    (out / "summary.json").write_text(json.dumps(result.summary(), indent=2, sort_keys=True))
    (out / "config.json").write_text(json.dumps(result.config.to_dict(), indent=2, sort_keys=True))
    return out


def replay_row(sweep_dir, N: int, trial_index: int) -> TrialRow:
    """Recompute one row from the config stored in a sweep directory."""
    cfg = ExperimentConfig.load(Path(sweep_dir) / "config.json")
    return run_trial(cfg, N, trial_index)
