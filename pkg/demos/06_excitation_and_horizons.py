"""Persistence of excitation and the choice of the past horizon.

Without innovations S1 obeys y[k+1] = 0.5 y[k] + u[k] exactly, so a past
window longer than the state dimension contains a linear dependency and the
regressor is singular. Noise restores excitation; the burn-in time says how
many samples make the empirical covariance dominate 1/16 of its population
counterpart.
"""

from parsim import (
    PersistenceOfExcitationError,
    StateSpaceModel,
    build_hankels,
    build_regressor_bank,
    burn_in_time,
    choose_past_horizon,
    covariate_covariance,
    empirical_covariance,
    estimate_parsim_bank,
    pe_check,
    s1,
    simulate,
)

quiet = s1(sigma_e=0.0)
for p in (1, 2):
    bank = build_regressor_bank(build_hankels(simulate(quiet, p + 3 + 499, seed=0), p, 3, 500))
    try:
        estimate_parsim_bank(bank)
        print(f"noiseless, p={p}: regressors full rank")
    except PersistenceOfExcitationError as exc:
        print(f"noiseless, p={p}: {exc}")

m = s1(sigma_e=0.1)
p, f = 2, 3
N = burn_in_time(m, p, f, 0.05)
ref = covariate_covariance(m, p, f, p + f)
holds = 0
for seed in range(100):
    bank = build_regressor_bank(build_hankels(simulate(m, p + f + N - 1, seed=seed), p, f, N))
    holds += pe_check(empirical_covariance(bank, f), ref).holds
print(f"\nburn-in N_pe = {N}; excitation held in {holds}/100 trials")

# the horizon rule picks the smallest p whose truncation term falls below N^-3
slow = StateSpaceModel([[0.9]], [[1.0]], [[1.0]], [[0.2]], 0.1)
for N in (100, 1000, 10_000):
    h = choose_past_horizon(slow, N, [0.25 * k for k in range(1, 200)])
    print(f"A - KC = 0.7, N={N:>6}: p = {h.p} (beta = {h.beta})")
