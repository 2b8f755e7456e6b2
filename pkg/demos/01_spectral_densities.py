"""
Spectral densities
==================

Every calculation starts from a rate density Gamma(E).  Three families are
built in; each has a threshold exponent eta (Gamma ~ E**(eta - 1) near
threshold) and, except for the relativistic phase space, a finite weight.
"""
import math

import numpy as np

from decaykit.errors import NonIntegrable
from decaykit.spectral import FlatCutoff, PowerLawExp, TwoBodyPhaseSpace, gamma_of, threshold_exponent, total_weight

models = [FlatCutoff(gamma=1.0, Lambda=10.0), PowerLawExp(g2=1.0, eta=0.5, Lambda=1.0),
          TwoBodyPhaseSpace(mu=1.0, m=0.25, M=1.0)]

# a few samples, including points below threshold where Gamma vanishes
E = np.array([-1.0, 0.1, 1.0, 5.0, 20.0])
for model in models:
    print(model.family, "Gamma:", np.round(gamma_of(model, E), 6), "eta =", threshold_exponent(model))

# the weight int Gamma / 2pi sets the Zeno time; the phase space is not summable
for model in models:
    try:
        print(model.family, "weight:", total_weight(model))
    except NonIntegrable as exc:
        print(model.family, "weight: not integrable", f"({exc})")

# near threshold the local log-log slope approaches eta - 1
pl = models[1]
for e in (1e-2, 1e-4, 1e-6):
    slope = math.log(gamma_of(pl, 2 * e) / gamma_of(pl, e)) / math.log(2)
    print(f"E={e:g}: local slope {slope:.5f}")
