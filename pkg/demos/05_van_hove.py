"""
Weak-coupling limit
===================

Measured in the rescaled time t~ = lam**2 t the survival probability tends
to the golden-rule exponential as lam -> 0.  The departures (Zeno width,
normalization, oscillations, late tail) all vanish at definite rates.
"""
import numpy as np

from decaykit.spectral import FlatCutoff, PowerLawExp
from decaykit.vanhove import convergence_scan

lams = [0.4, 0.2, 0.1, 0.05]

scan = convergence_scan(FlatCutoff(1.0, 10.0), 1.0, lams, features=False)
for rec in scan.records():
    print(f"lam={rec['lambda']:<5} max |P~ - exp(-Gamma t~)| = {rec['deviation_max']:.3e}")
print("shrink per halving:", np.round(scan.shrink_factors, 2))

# scaling of the fitted features for a threshold exponent eta = 0.5
scan = convergence_scan(PowerLawExp(1.0, 0.5, 1.0), 2.0, lams, features=True)
fs = scan.fitted_scalings
print(f"rescaled Zeno width ~ lam^{fs['zeno_width_exponent']:.3f}")
print(f"oscillation amplitude ~ lam^{fs['oscillation_exponent']:.3f} (expected {fs['oscillation_expected']:g})")
c = fs["crossover_vs_log"]
print(f"rescaled crossover = {c['slope']:.2f} log(1/lam) + {c['intercept']:.2f}, correlation {c['correlation']:.4f}")
