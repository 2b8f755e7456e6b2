"""
Self-energy on both sheets
==========================

Sigma(z) is analytic off the real cut.  Its upper-lip value gives the level
shift Delta and the width Gamma; just below the cut it continues smoothly
onto the second sheet, where the decay pole lives.
"""
import cmath
import math

from decaykit.selfenergy import delta_pv, sigma2_boundary, sigma2_complex, sigma2_quadrature
from decaykit.spectral import FlatCutoff, PowerLawExp

flat = FlatCutoff(1.0, 10.0)

# the flat band has a logarithmic closed form
for E in (1.0, 5.0, 9.0):
    print(f"Delta({E}) = {delta_pv(flat, E):+.10f}   analytic {math.log(E / (10 - E)) / (2 * math.pi):+.10f}")

# upper lip, lower lip on the second sheet, and the first sheet below the cut
E, d = 3.0, 1e-9
print("boundary value      ", sigma2_boundary(flat, E).value)
print("first sheet, above  ", sigma2_complex(flat, E + 1j * d))
print("second sheet, below ", sigma2_complex(flat, E - 1j * d, "second"))
print("first sheet, below  ", sigma2_complex(flat, E - 1j * d), "(jump of -i Gamma)")

# power law closed form against direct quadrature of the spectral integral
pl = PowerLawExp(1.0, 0.5, 1.0)
for z in (0.5 + 0.2j, 3 - 1j, -2 + 0.01j):
    print(z, sigma2_complex(pl, z), "quadrature", sigma2_quadrature(pl, z))

print("flat check:", sigma2_complex(flat, 5 + 0.001j), cmath.log((5 + 0.001j) / (-5 + 0.001j)) / (2 * math.pi))
