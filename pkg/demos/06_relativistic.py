"""
Relativistic decay and time dilation
====================================

A scalar of mass M decays into two scalars of mass m.  The renormalized
self-energy vanishes in its real part on shell, and a moving particle
decays slower by E_p / M.
"""
import math

import numpy as np

from decaykit.evolution import TimeGrid
from decaykit.relativistic import (
    RelParams,
    correlation_amplitude,
    correlation_sum_rule,
    gamma_rel,
    lifetime_dilated,
    sigma2_rel_boundary,
    sigma2_rel_closed,
    sigma2_rel_dispersion,
    vanhove_limit_rel,
)

rest = RelParams(M=1.0, m=0.25, mu=1.0, lam=0.1)
moving = RelParams(M=1.0, m=0.25, mu=1.0, lam=0.1, p=math.sqrt(3.0))

print("Sigma(M^2 + i0) =", sigma2_rel_boundary(rest, 1.0))
for s in (0.5 + 0.3j, 3 - 1j):
    print(s, sigma2_rel_closed(rest, s), "dispersion", sigma2_rel_dispersion(rest, s))

tt = TimeGrid.linear(0, 50, 6)
for params in (rest, moving):
    lim = vanhove_limit_rel(params, tt)
    print(f"p={params.p:.4f}: |2E_p A~|^2 =", np.round(np.abs(2 * params.E_p * lim.amplitude) ** 2, 6))

for params in (rest, moving):
    tau = lifetime_dilated(params)
    grid = TimeGrid.linear(2 * tau, 5 * tau, 101)
    amp = correlation_amplitude(params, grid)
    rate = -np.polyfit(grid.nodes, np.log(amp.probability), 1)[0]
    expected = params.M / params.E_p * params.lam**2 * gamma_rel(params, params.M**2)
    print(f"p={params.p:.4f}: tau_p={tau:.1f}, fitted rate {rate:.6e}, dilated golden rule {expected:.6e}")

a0 = correlation_amplitude(rest, TimeGrid(np.array([0.0]))).amplitude[0]
print(f"A(0) = {a0.real:.12f}; sum rule {correlation_sum_rule(rest):.12f}; 1/2E_p = {0.5 / rest.E_p}")
