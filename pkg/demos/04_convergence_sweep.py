"""Monte Carlo sweep over N, the 1/sqrt(N) rate fit and bound coverage.

Writes rows.csv, summary.json and config.json into ./sweep_demo. Each row
carries its seed, so `parsim report sweep_demo` or `replay_row` can
regenerate any trial.
"""

from parsim import ExperimentConfig, replay_row, run_sweep, write_sweep

cfg = ExperimentConfig(model="S1", sigma_e=0.3, f=5, p_rule=2,
                       N_grid=(250, 500, 1000, 2000, 4000, 8000), trials=50,
                       estimator="both", output_dir="sweep_demo")
res = run_sweep(cfg)

print(f"{'N':>6} {'theta':>10} {'A':>10} {'C':>10} {'bank/classical':>15} {'coverage':>9}")
for N, agg in res.aggregates.items():
    print(f"{N:>6} {agg['err_theta_max']['median']:>10.3e} {agg['err_A']['median']:>10.3e}"
          f" {agg['err_C']['median']:>10.3e} {agg['parsim_classical_ratio_median']:>15.3f}"
          f" {res.coverage[N]:>9.2f}")

for name in ("err_theta_max", "err_A", "err_C"):
    print(f"slope of median {name}: {res.slopes[name]['slope']:+.3f}")

out = write_sweep(res)
row = replay_row(out, 1000, 7)
print(f"\nreplayed N=1000 trial 7: err_A={row.err_A:.6e} (seed {row.seed})")
