"""Identify S1 from one trajectory with the ARX bank and the SVD realization.

Each row i of the bank regresses y at lead i on the past window Z_p and the
first i future inputs. Stacking the past coefficients gives an estimate of
Gamma_f L_p; its rank-n SVD yields (A, B, C, K) up to a similarity transform,
which is removed by aligning with the true observability matrix.
"""

import numpy as np

from parsim import (
    align_similarity,
    build_hankels,
    build_regressor_bank,
    estimate_classical_projection,
    estimate_parsim_bank,
    realize,
    s1,
    simulate,
    true_gamma_lp,
)

np.set_printoptions(precision=4, suppress=True)

m = s1(sigma_e=0.3)
p, f, N = 2, 3, 5000
t = simulate(m, p + f + N - 1, seed=11)
h = build_hankels(t, p, f, N)
bank = build_regressor_bank(h)

est = estimate_parsim_bank(bank)
print("estimated Gamma_f L_p:\n", est.gamma_lp)
print("true Gamma_f L_p:\n", true_gamma_lp(m, p, f))
print("min regressor singular value^2 per row:", np.round(est.gram_min_singular_values, 1))

r = realize(est.gamma_lp, 1, p, f, 1, 1)
print(f"\nsingular values {r.singular_values}  (gap {r.sigma_gap:.3f})")
al = align_similarity(m, f, r)
print(f"A={r.A.item():.4f} B={r.B.item():.4f} C={r.C.item():.4f} K={r.K.item():.4f}")
print(f"aligned errors: A {al.err_A:.2e}  B {al.err_B:.2e}  C {al.err_C:.2e}  K {al.err_K:.2e}")

# the classical projection estimator on the same data
glp_c = estimate_classical_projection(h)
truth = true_gamma_lp(m, p, f)
print(f"\n||error|| bank {np.linalg.norm(est.gamma_lp - truth, 2):.3e}"
      f"  classical {np.linalg.norm(glp_c - truth, 2):.3e}")
