import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra import numpy as hnp

from decaykit.errors import ClosedChannel, InsufficientRange, UnsupportedModel
from decaykit.evolution import (
    AmplitudeSeries,
    TimeGrid,
    default_grid,
    fit_features,
    lifetime,
    survival_decomposed,
    survival_line,
    survival_oracle,
    zeno_time,
)
from decaykit.spectral import FlatCutoff, PowerLawExp, TwoBodyPhaseSpace

from conftest import FLAT, FLAT_EA, max_abs

PL_HALF = PowerLawExp(1.0, 0.5, 1.0)


# ------------------------------------------------------------------ TimeGrid

def test_grid_validation():
    for bad in ([], [[0.0, 1.0]], [0.0, 0.0, 1.0], [1.0, 0.5], [-1.0, 0.0], [0.0, np.inf]):
        with pytest.raises(ValueError):
            TimeGrid(np.array(bad, dtype=float))
    with pytest.raises(ValueError):
        TimeGrid(np.array([0.0, 1.0]), "cubic")


def test_grid_read_only():
    g = TimeGrid.linear(0, 1, 5)
    with pytest.raises(ValueError):
        g.nodes[0] = 3.0


@settings(max_examples=60, deadline=None)
@given(steps=hnp.arrays(float, st.integers(1, 40), elements=st.floats(1e-6, 1e3)),
       start=st.floats(0, 10))
def test_grid_accepts_increasing(steps, start):
    nodes = start + np.cumsum(steps)
    g = TimeGrid(nodes)
    np.testing.assert_array_equal(g.nodes, nodes)
    assert len(g) == nodes.size


def test_grid_from_spec():
    g = TimeGrid.from_spec({"t_min": 0, "t_max": 2, "nodes": 5})
    np.testing.assert_allclose(g.nodes, [0, 0.5, 1, 1.5, 2])
    g = TimeGrid.from_spec({"t_min": 0, "t_max": 100, "nodes": 11, "spacing": "logarithmic"})
    assert g.nodes[0] == 0 and g.nodes[1] == pytest.approx(1e-4) and g.nodes[-1] == pytest.approx(100)
    with pytest.raises(ValueError):
        TimeGrid.from_spec({"t_min": 0, "t_max": 1, "nodes": 4, "spacing": "cubic"})


@settings(max_examples=60, deadline=None)
@given(amp=hnp.arrays(complex, st.integers(1, 30),
                      elements=st.complex_numbers(max_magnitude=10, allow_nan=False, allow_infinity=False)))
def test_probability_is_modulus_squared(amp):
    grid = TimeGrid(np.arange(amp.size, dtype=float))
    s = AmplitudeSeries(grid, amp, "test")
    np.testing.assert_array_equal(s.probability, np.abs(amp) ** 2)


def test_series_shape_mismatch():
    with pytest.raises(ValueError):
        AmplitudeSeries(TimeGrid.linear(0, 1, 3), np.ones(4), "test")


# ------------------------------------------------------------------ timescales

def test_zeno_time_examples():
    assert zeno_time(FLAT, 1.0) == pytest.approx((10 / (2 * math.pi)) ** -0.5, rel=1e-14)
    assert zeno_time(FLAT, 1.0) == pytest.approx(0.79267, abs=1e-5)
    assert zeno_time(FLAT, 0.05) == pytest.approx(2 * zeno_time(FLAT, 0.1), rel=1e-14)
    assert zeno_time(PowerLawExp(1.0, 1.0, 1.0), 1.0) == pytest.approx(1.0, rel=1e-14)


def test_lifetime_examples():
    assert lifetime(FLAT, 1.0, 0.1) == pytest.approx(100.0, rel=1e-14)
    assert lifetime(FLAT, 1.0, 0.05) == pytest.approx(4 * lifetime(FLAT, 1.0, 0.1), rel=1e-14)
    with pytest.raises(ClosedChannel):
        lifetime(FLAT, -1.0, 0.1)


def test_default_grid_span():
    g = default_grid(FLAT, 1.0, 0.1)
    assert len(g) == 600 and g.spacing == "logarithmic"
    assert g.nodes[0] == pytest.approx(1e-4 * zeno_time(FLAT, 0.1))
    assert g.nodes[-1] == pytest.approx(30 * lifetime(FLAT, 1.0, 0.1))


# ------------------------------------------------------------------ methods

@pytest.mark.parametrize("method", [survival_line, survival_decomposed])
def test_free_evolution(method):
    s = method(FLAT, 1.0, 0.0, TimeGrid.linear(0, 50, 11))
    np.testing.assert_array_equal(s.amplitude, np.ones(11))


def test_free_evolution_oracle():
    s = survival_oracle(FLAT, 1.0, 0.0, 128, TimeGrid.linear(0, 50, 11))
    np.testing.assert_allclose(s.amplitude, 1.0, atol=1e-15)


def test_triangle_flat_normalization(flat_triangle):
    for name in ("line", "decomposed"):
        assert abs(flat_triangle[name].amplitude[0] - 1) <= 1e-6
    assert abs(flat_triangle["oracle"].amplitude[0] - 1) <= 1e-14


def test_decomposed_matches_line(flat_triangle):
    assert max_abs(flat_triangle["decomposed"].amplitude, flat_triangle["line"].amplitude) <= 1e-6


def test_decomposed_matches_oracle_at_lifetime(flat_triangle):
    grid = flat_triangle["grid"]
    k = int(np.argmin(np.abs(grid.nodes - lifetime(FLAT, FLAT_EA, 0.1))))
    P_d = flat_triangle["decomposed"].probability[k]
    P_o = flat_triangle["oracle"].probability[k]
    assert abs(P_d - P_o) <= 1e-6
    assert P_d == pytest.approx(math.exp(-1), rel=2e-2)


def test_oracle_unitarity(flat_triangle):
    assert np.all(np.abs(flat_triangle["oracle"].amplitude) <= 1 + 1e-14)


def test_pole_part_is_exponential(flat_triangle):
    s = flat_triangle["decomposed"]
    t = s.t
    k = int(np.argmin(np.abs(t - 300.0)))
    expected = abs(s.pole.residue) ** 2 * math.exp(2 * s.pole.location.imag * t[k])
    assert abs(abs(s.pole_part[k]) ** 2 - expected) <= 1e-10
    rate = -np.polyfit(t, np.log(np.abs(s.pole_part) ** 2), 1)[0]
    assert rate == pytest.approx(-2 * s.pole.location.imag, rel=1e-12)


def test_oracle_self_convergence(flat_triangle):
    # N=2048 recurs near t ~ 850 on this band, so it is compared on t <= 8 tau_E only
    grid = flat_triangle["grid"]
    ref = flat_triangle["oracle"].amplitude
    a3072 = survival_oracle(FLAT, FLAT_EA, 0.1, 3072, grid).amplitude
    assert max_abs(a3072, ref) <= 1e-7
    early = grid.nodes <= 8 * lifetime(FLAT, FLAT_EA, 0.1)
    a2048 = survival_oracle(FLAT, FLAT_EA, 0.1, 2048, grid).amplitude
    assert max_abs(a2048[early], ref[early]) <= 1e-7


@pytest.mark.parametrize("model,E_a,lam,E_max", [
    (PowerLawExp(1.0, 1.0, 1.0), 2.0, 0.3, None),
    (PowerLawExp(1.0, 1.5, 1.0), 2.0, 0.2, 20.0),
])
def test_triangle_powerlaw(model, E_a, lam, E_max):
    grid = TimeGrid.linear(0, 10 * lifetime(model, E_a, lam), 301)
    a = survival_line(model, E_a, lam, grid).amplitude
    b = survival_decomposed(model, E_a, lam, grid).amplitude
    c = survival_oracle(model, E_a, lam, 4096, grid, E_max=E_max).amplitude
    assert max(max_abs(a, b), max_abs(b, c), max_abs(a, c)) <= 1e-5


def test_line_matches_decomposed_threshold_half():
    # eta = 0.5 includes a stable bound state below threshold
    grid = TimeGrid.linear(0, 10 * lifetime(PL_HALF, 2.0, 0.3), 201)
    line = survival_line(PL_HALF, 2.0, 0.3, grid)
    dec = survival_decomposed(PL_HALF, 2.0, 0.3, grid)
    assert max_abs(line.amplitude, dec.amplitude) <= 1e-6
    assert np.max(np.abs(dec.bound_part)) > 1e-4


def test_contour_angle_independence():
    grid = TimeGrid.linear(0, 500, 51)
    for model, E_a, angles in [(FLAT, 1.0, (np.pi / 3, np.pi / 2)), (PL_HALF, 2.0, (np.pi / 6, np.pi / 4))]:
        a, b = (survival_decomposed(model, E_a, 0.2, grid, theta=th).amplitude for th in angles)
        assert max_abs(a, b) <= 1e-9


def test_decomposed_rejects_bad_angle():
    with pytest.raises(ValueError):
        survival_decomposed(FLAT, 1.0, 0.1, TimeGrid.linear(0, 1, 3), theta=np.pi)


def test_oracle_validation():
    with pytest.raises(UnsupportedModel):
        survival_oracle(TwoBodyPhaseSpace(1, 0.25, 1), 1.0, 0.1, 128, TimeGrid.linear(0, 1, 3))
    with pytest.raises(ValueError):
        survival_oracle(FLAT, 1.0, 0.1, 16, TimeGrid.linear(0, 1, 3))


@pytest.mark.parametrize("method", ["decomposed", "oracle"])
def test_short_time_quadratic(method):
    lam = 0.1
    tz = zeno_time(FLAT, lam)
    grid = TimeGrid(np.array([1e-4, 1e-3]) * tz)
    if method == "decomposed":
        s = survival_decomposed(FLAT, 1.0, lam, grid)
    else:
        s = survival_oracle(FLAT, 1.0, lam, 1024, grid)
    curvature = (1 - s.probability) / grid.nodes**2
    np.testing.assert_allclose(curvature, 1 / tz**2, rtol=1e-3)


# ------------------------------------------------------------------ features

def test_fit_features_flat():
    lam = 0.1
    s = survival_decomposed(FLAT, 1.0, lam, default_grid(FLAT, 1.0, lam, 800))
    f = fit_features(s, FLAT, 1.0, lam)
    assert f.tau_Z_fitted == pytest.approx(zeno_time(FLAT, lam), rel=1e-2)
    assert f.decay_rate_fitted == pytest.approx(1 / lifetime(FLAT, 1.0, lam), rel=2e-2)
    assert f.zeno_linear_ratio <= 1e-3
    assert set(f.as_dict()) == {"tau_Z_fitted", "zeno_linear_ratio", "decay_rate_fitted",
                                "normalization_fitted", "tail_exponent", "tail_prefactor", "crossover_time"}


def test_fit_features_tail_half():
    model, E_a, lam = PowerLawExp(1e-6, 0.5, 1.0), 2.0, 0.1
    te = lifetime(model, E_a, lam)
    grid = TimeGrid.logarithmic(1e-4 * zeno_time(model, lam), 1e3 * te, 900)
    s = survival_decomposed(model, E_a, lam, grid)
    f = fit_features(s, model, E_a, lam)
    assert f.tail_exponent == pytest.approx(-1.0, abs=0.1)
    assert math.isfinite(f.crossover_time) and te < f.crossover_time < 1e3 * te


def test_fit_features_insufficient_range():
    lam = 0.1
    s = survival_decomposed(FLAT, 1.0, lam, TimeGrid.linear(1.0, 50.0, 20))
    with pytest.raises(InsufficientRange):
        fit_features(s, FLAT, 1.0, lam)
