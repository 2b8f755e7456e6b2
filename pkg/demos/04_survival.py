"""
Survival amplitude three ways
=============================

The same amplitude is obtained from a Fourier line integral above the real
axis, from the pole plus branch-cut decomposition, and from exact
diagonalization of a discretized continuum.  Their agreement is the main
correctness check of the library.
"""
import numpy as np

from decaykit.evolution import (
    TimeGrid,
    fit_features,
    lifetime,
    survival_decomposed,
    survival_line,
    survival_oracle,
    zeno_time,
)
from decaykit.spectral import FlatCutoff

flat, E_a, lam = FlatCutoff(1.0, 10.0), 1.0, 0.1
grid = TimeGrid.linear(0.0, 10 * lifetime(flat, E_a, lam), 201)

line = survival_line(flat, E_a, lam, grid)
dec = survival_decomposed(flat, E_a, lam, grid)
orc = survival_oracle(flat, E_a, lam, 2048, grid)
early = grid.nodes <= 8 * lifetime(flat, E_a, lam)  # 2048 modes recur later on
print("line vs decomposed   ", np.max(np.abs(line.amplitude - dec.amplitude)))
print("decomposed vs oracle ", np.max(np.abs(dec.amplitude - orc.amplitude)[early]))

# multi-scale picture on a log grid: Zeno onset, exponential, power-law tail;
# the grid runs far past the crossover so that its last decade is pure tail
grid = TimeGrid.logarithmic(1e-4 * zeno_time(flat, lam), 1e4 * lifetime(flat, E_a, lam), 900)
series = survival_decomposed(flat, E_a, lam, grid)
f = fit_features(series, flat, E_a, lam)
print(f"tau_Z fitted {f.tau_Z_fitted:.5f} vs {zeno_time(flat, lam):.5f}")
print(f"decay rate   {f.decay_rate_fitted:.6f} vs golden rule {1 / lifetime(flat, E_a, lam):.6f}")
print(f"tail exponent {f.tail_exponent:.3f}, crossover at t = {f.crossover_time:.4g}")
