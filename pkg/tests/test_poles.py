import math

import numpy as np
import pytest
from scipy import integrate, optimize

from decaykit.errors import ClosedChannel, DegeneratePole, NoConvergence, WrongSheet
from decaykit.evolution import oracle_spectrum
from decaykit.poles import (
    bound_states_nonrel,
    find_pole_nonrel,
    find_pole_rel,
    polish_root,
    residue_at,
)
from decaykit.selfenergy import sigma2_boundary, sigma2_complex, sigma2_derivative
from decaykit.spectral import FlatCutoff, PowerLawExp, gamma_of

FLAT = FlatCutoff(1.0, 10.0)
PL = PowerLawExp(1.0, 0.5, 1.0)


def test_flat_pole_near_seed():
    pole = find_pole_nonrel(FLAT, 1.0, 0.1)
    expected = 0.01 * complex(math.log(1 / 9) / (2 * math.pi), -0.5)
    assert abs(pole.location - expected) < 0.1**4
    assert pole.location.imag < 0
    assert pole.final_residual <= 1e-12 * max(1.0, abs(pole.location))


@pytest.mark.parametrize("model,E_a", [(FLAT, 1.0), (PL, 2.0), (PowerLawExp(1.0, 1.5, 1.0), 1.0)])
def test_seed_gap_is_fourth_order(model, E_a):
    gaps = []
    for lam in (0.2, 0.1, 0.05):
        pole = find_pole_nonrel(model, E_a, lam)
        gaps.append(abs(pole.location - pole.seed))
    ratios = np.array(gaps[:-1]) / np.array(gaps[1:])
    assert np.all((ratios > 12) & (ratios < 20))


@pytest.mark.parametrize("model,E_a", [(FLAT, 1.0), (PL, 2.0)])
def test_residual_reevaluated(model, E_a):
    lam = 0.2
    pole = find_pole_nonrel(model, E_a, lam)
    D = pole.location - lam**2 * sigma2_complex(model, pole.location + E_a, "second")
    assert abs(D) <= 1e-12 * max(1.0, abs(pole.location))


def test_residue_first_order():
    # Z = 1 + lam^2 Sigma'(E_a + i0) + O(lam^4)
    d = sigma2_derivative(FLAT, 1.0 + 1e-12j, "first")
    gaps, dev = [], []
    for lam in (0.2, 0.1, 0.05):
        Z = find_pole_nonrel(FLAT, 1.0, lam).residue
        gaps.append(abs(Z - (1 + lam**2 * d)))
        dev.append(abs(Z - 1))
    assert all(12 < a / b < 20 for a, b in zip(gaps, gaps[1:]))
    assert all(3.5 < a / b < 4.5 for a, b in zip(dev, dev[1:]))


def test_below_threshold_rejected():
    with pytest.raises(WrongSheet):
        find_pole_nonrel(FLAT, -1.0, 0.1)


def test_no_pole_on_first_sheet():
    with pytest.raises((WrongSheet, NoConvergence)):
        find_pole_nonrel(FLAT, 1.0, 0.1, sheet="first")


def test_coupling_validation():
    with pytest.raises(ValueError):
        find_pole_nonrel(FLAT, 1.0, 0.0)


def test_residue_free_propagator():
    assert residue_at(lambda E: E, 0.0) == pytest.approx(1.0, rel=1e-12)
    assert residue_at(lambda E: E, 0.0, lambda E: 1.0) == 1.0


def test_residue_finite_difference_matches_analytic():
    f = lambda z: np.sin(z) - 0.3  # noqa: E731
    z0 = math.asin(0.3)
    assert residue_at(f, z0) == pytest.approx(1 / math.cos(z0), rel=1e-10)


def test_degenerate_pole():
    with pytest.raises(DegeneratePole):
        residue_at(lambda E: (E - 1.0) ** 2, 1.0)


def test_polish_root_secant_only():
    root, its, res = polish_root(lambda z: z**3 - 2, None, 1.0 + 0.1j)
    assert abs(root - 2 ** (1 / 3)) < 1e-11
    assert res <= 1e-12 * abs(root)


def test_polish_root_gives_up():
    with pytest.raises(NoConvergence):
        # Newton stays on the real line, where z**2 + 1 has no root
        polish_root(lambda z: z * z + 1, lambda z: 2 * z, 0.5 + 0j)


def _bound_oracle(model, E_a, lam):
    """Root and residue of u - E_a - lam^2 Sigma(u) below threshold by direct quadrature."""
    def sigma(u, power=1):
        # x = y**2 removes the threshold singularity; the kernel peaks at y ~ sqrt(-u)
        f = lambda y: gamma_of(model, y * y) * 2 * y / (2 * math.pi * (u - y * y) ** power)  # noqa: E731
        r = math.sqrt(-u)
        a, _ = integrate.quad(f, 0, 4 * r, points=[r], epsabs=0, epsrel=1e-13, limit=400)
        b, _ = integrate.quad(f, 4 * r, np.inf, epsabs=0, epsrel=1e-13, limit=400)
        return a + b

    u = optimize.brentq(lambda u: u - E_a - lam**2 * sigma(u), -1e-7, -1.0, xtol=1e-16, rtol=1e-15)
    return u - E_a, 1.0 / (1.0 + lam**2 * sigma(u, 2))


@pytest.mark.parametrize("lam", [0.1, 0.4])
def test_powerlaw_bound_state_against_quadrature(lam):
    states = bound_states_nonrel(PL, 2.0, lam)
    assert len(states) == 1
    E, Z = _bound_oracle(PL, 2.0, lam)
    assert states[0].location.real == pytest.approx(E, rel=1e-12)
    assert states[0].residue.real == pytest.approx(Z, rel=1e-8)


def test_powerlaw_bound_state_against_diagonalization():
    # coarse: the discretized threshold singularity converges slowly
    state = bound_states_nonrel(PL, 2.0, 0.4)[0]
    energies, overlap = oracle_spectrum(PL, 2.0, 0.4, 2048)
    assert energies[0] == pytest.approx(state.location.real, abs=1e-3)
    assert overlap[0] == pytest.approx(state.residue.real, rel=1e-2)


def test_no_bound_state_for_smooth_threshold():
    assert bound_states_nonrel(PowerLawExp(1.0, 1.5, 1.0), 1.0, 0.3) == []


def test_flat_bound_state_exponentially_small():
    states = bound_states_nonrel(FLAT, 1.0, 0.3)
    assert states and all(s.location.imag == 0 for s in states)
    assert all(0 <= s.residue.real < 1e-20 for s in states)


# ------------------------------------------------------------------ relativistic

def test_rel_pole_weak_coupling_limit():
    width = math.sqrt(0.75) / (32 * math.pi)
    assert width == pytest.approx(0.0086145, abs=1e-7)
    for lam in (0.05, 0.02):
        pole = find_pole_rel(1.0, 0.25, 1.0, lam)
        assert pole.location.imag / lam**2 == pytest.approx(-1.0 * width, rel=5 * lam**2)
        assert pole.location.imag < 0


def test_rel_residue_second_order():
    dev = [abs(find_pole_rel(1.0, 0.25, 1.0, lam).residue - 1) for lam in (0.4, 0.2, 0.1)]
    assert all(3.5 < a / b < 4.5 for a, b in zip(dev, dev[1:]))


def test_rel_closed_channel():
    with pytest.raises(ClosedChannel):
        find_pole_rel(1.0, 0.6, 1.0, 0.1)


def test_golden_rule_gap_scaling_flat():
    gamma = sigma2_boundary(FLAT, 1.0).gamma
    gaps = [abs(find_pole_nonrel(FLAT, 1.0, lam).location.imag + 0.5 * lam**2 * gamma)
            for lam in (0.4, 0.2, 0.1, 0.05)]
    assert all(12 <= a / b <= 20 for a, b in zip(gaps, gaps[1:]))
