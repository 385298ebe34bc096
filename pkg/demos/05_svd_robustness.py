"""Perturb the true Gamma_f L_p and compare realization errors with the radii.

With ||Delta|| = sigma_n / 8 the perturbation satisfies the gap condition
||Delta|| <= sigma_n / 4, and the orthogonally aligned factor and system
errors should stay inside the corresponding radii.
"""

import numpy as np

from parsim import (
    procrustes_errors,
    procrustes_transform,
    random_model,
    realization_bound,
    realize,
    shift_sigma,
    true_gamma_lp,
)

rng = np.random.default_rng(3)
print(f"{'case':>4} {'factor err':>11} {'radius':>9} {'A err':>9} {'A radius':>9}")
for case in range(8):
    m = random_model(2, 1, 2, rng=rng)
    p, f = 3, 5
    M = true_gamma_lp(m, p, f)
    ref = realize(M, 2, p, f, 1, 2)
    sigma_n = ref.singular_values[1]
    E = rng.standard_normal(M.shape)
    E *= sigma_n / 8 / np.linalg.norm(E, 2)
    est = realize(M + E, 2, p, f, 1, 2)
    err = procrustes_errors(est, ref, procrustes_transform(est, ref))
    rad = realization_bound(sigma_n / 8, M, 2, sigma_o=shift_sigma(est, ref, 2))
    print(f"{case:>4} {max(err['gamma'], err['lp']):>11.3e} {rad.factor:>9.3e}"
          f" {err['A']:>9.3e} {rad.A:>9.3e}")
