"""Evaluate the finite-sample quantities for S1: SNR, burn-in and error radii.

The radii use the universal constants c = c0 = 1, so they describe the shape
of the bound (rate in N, dependence on delta) rather than a certified level.
"""

import numpy as np

from parsim import bound_reports, burn_in_time, covariate_covariance, s1, snr, theta_error_bound

m = s1(sigma_e=0.1)
p, f, delta = 2, 3, 0.05

for i in range(1, f + 1):
    tau = p + i
    print(f"row {i}: SNR = {snr(m, p, i, tau):8.2f}   burn-in N_pe = {burn_in_time(m, p, i, delta)}")

print("\ncovariance of z for row 2 at k = tau:")
print(np.round(covariate_covariance(m, p, 2, p + 2), 4))

print("\nradius^2 of row 2 versus N:")
for N in (1_000, 4_000, 16_000, 64_000):
    tb = theta_error_bound(m, p, f, 2, N, delta)
    print(f"  N={N:>6}  theta^2={tb.theta_sq:.3e}  bias^2={tb.bias_sq:.1e}")

print("\nfull report at N = 10^6 (delta split across rows):")
for rep in bound_reports(m, p, f, 10 ** 6, delta):
    print(f"  i={rep.i}  theta radius={np.sqrt(rep.theta_radius_sq):.3e}"
          f"  stacked={rep.stacked_radius:.3e}  realization={rep.realization_radii}")
