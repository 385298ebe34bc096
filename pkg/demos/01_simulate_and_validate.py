"""Build a model, check it, simulate it and look at its structural matrices.

S1 is the scalar fixture x' = 0.5 x + u + 0.5 e, y = x + e. Its predictor
matrix A - KC is zero, so the state is an exact function of one past sample.
"""

import numpy as np

from parsim import (
    StateSpaceModel,
    extended_controllability,
    extended_observability,
    random_model,
    s1,
    simulate,
    state_covariance,
    validate_model,
)

np.set_printoptions(precision=4, suppress=True)

m = s1()
print("S1:", m.to_dict())
rep = validate_model(m)
print(f"validation passed={rep.passed}  rho(A)={rep.rho_A:.2f}  rho(A-KC)={rep.rho_Ac:.2f}")

t = simulate(m, 2000, seed=1)
print(f"\nsimulated {t.length} samples; sample var(y) = {t.y.var():.4f}")
print(f"stationary state variance from the Gramian sum: {state_covariance(m, 10_000)[0, 0]:.4f}")

print("\nGamma_3 =", extended_observability(m, 3).ravel())
print("L_2     =", extended_controllability(m, 2).ravel(), " (noise blocks first, then input)")

# a random stable MIMO model with a well-conditioned predictor
big = random_model(3, 2, 2, rng=7)
r = validate_model(big)
print(f"\nrandom 3-state model: passed={r.passed}, observability rank {r.observability_rank}")

# an unstable model is rejected with a reason
bad = StateSpaceModel([[1.1]], m.B, m.C, m.K)
print("unstable model failures:", validate_model(bad).failures)
