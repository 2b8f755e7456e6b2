"""
Decay poles and stable states
=============================

The decay pole solves E = lam**2 Sigma_II(E + E_a).  Its imaginary part
approaches the golden-rule value -lam**2 Gamma(E_a)/2 with an O(lam**4) gap.
Densities that diverge at threshold (eta < 1) also bind a stable state
just below it, on the physical sheet.
"""
from decaykit.poles import bound_states_nonrel, find_pole_nonrel, find_pole_rel
from decaykit.selfenergy import sigma2_boundary
from decaykit.spectral import FlatCutoff, PowerLawExp

flat = FlatCutoff(1.0, 10.0)
gamma = sigma2_boundary(flat, 1.0).gamma
prev = None
for lam in (0.4, 0.2, 0.1, 0.05):
    pole = find_pole_nonrel(flat, 1.0, lam)
    gap = abs(pole.location.imag + 0.5 * lam**2 * gamma)
    ratio = f"{prev / gap:5.2f}" if prev else "  -  "
    print(f"lam={lam:<5} pole={pole.location:.8f}  residue={pole.residue:.6f}  gap={gap:.3e}  ratio={ratio}")
    prev = gap

pl = PowerLawExp(1.0, 0.5, 1.0)
for lam in (0.1, 0.4):
    for state in bound_states_nonrel(pl, 2.0, lam):
        print(f"eta=0.5, lam={lam}: stable state at E={state.location.real:.8f}, weight {state.residue.real:.3e}")

rel = find_pole_rel(mu=1.0, m=0.25, M=1.0, lam=0.1)
print("relativistic s_pole", rel.location, "Z", rel.residue)
