import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from decaykit.errors import ClosedChannel
from decaykit.evolution import TimeGrid, lifetime, survival_decomposed, zeno_time
from decaykit.selfenergy import sigma2_boundary
from decaykit.spectral import FlatCutoff, PowerLawExp, total_weight
from decaykit.vanhove import (
    convergence_scan,
    limit_amplitude,
    oscillation_amplitude,
    oscillation_grid,
    rescaled_survival,
)

FLAT = FlatCutoff(1.0, 10.0)


def test_limit_examples():
    g = TimeGrid(np.array([0.0, 1.0]))
    a = limit_amplitude(FLAT, 1.0, g)
    assert a.amplitude[0] == 1.0
    assert a.probability[1] == pytest.approx(math.exp(-1), rel=1e-14)
    assert a.probability[1] == pytest.approx(0.367879, abs=1e-6)


@settings(max_examples=80, deadline=None)
@given(t1=st.floats(0, 20), t2=st.floats(0, 20), E_a=st.floats(0.1, 9.9))
def test_limit_semigroup(t1, t2, E_a):
    a1, a2, a12 = (limit_amplitude(FLAT, E_a, TimeGrid(np.array([t]))).amplitude[0] for t in (t1, t2, t1 + t2))
    assert a12 == pytest.approx(a1 * a2, rel=1e-12, abs=1e-300)


@settings(max_examples=40, deadline=None)
@given(t=st.floats(0, 30))
def test_limit_is_golden_rule_exponential(t):
    gamma = sigma2_boundary(FLAT, 2.0).gamma
    P = limit_amplitude(FLAT, 2.0, TimeGrid(np.array([t]))).probability[0]
    assert P == pytest.approx(math.exp(-gamma * t), rel=1e-12)


def test_limit_closed_channel():
    with pytest.raises(ClosedChannel):
        limit_amplitude(FLAT, 12.0, TimeGrid.linear(0, 1, 3))


def test_rescaled_is_reindexing():
    lam = 0.2
    tt = TimeGrid.linear(0, 5, 41)
    r = rescaled_survival(FLAT, 1.0, lam, tt)
    direct = survival_decomposed(FLAT, 1.0, lam, TimeGrid(tt.nodes / lam**2))
    np.testing.assert_array_equal(r.amplitude, direct.amplitude)
    np.testing.assert_array_equal(r.t, tt.nodes)
    assert r.amplitude[0] == pytest.approx(1.0, abs=1e-9)


def test_rescaled_line_method_agrees():
    tt = TimeGrid.linear(0.1, 5, 30)
    a = rescaled_survival(FLAT, 1.0, 0.2, tt, method="line")
    b = rescaled_survival(FLAT, 1.0, 0.2, tt)
    assert np.max(np.abs(a.amplitude - b.amplitude)) <= 1e-6
    with pytest.raises(ValueError):
        rescaled_survival(FLAT, 1.0, 0.2, tt, method="oracle")


@pytest.mark.parametrize("model,E_a", [(FLAT, 1.0), (PowerLawExp(1.0, 0.5, 1.0), 2.0)])
@pytest.mark.parametrize("lam", [0.4, 0.05])
def test_rescaled_timescales(model, E_a, lam):
    assert lam**2 * zeno_time(model, lam) == pytest.approx(lam / math.sqrt(total_weight(model)), rel=1e-14)
    assert lam**2 * lifetime(model, E_a, lam) == pytest.approx(1 / sigma2_boundary(model, E_a).gamma, rel=1e-14)


def test_normalization_gap_second_order():
    # |P~(1/Gamma) - e^{-1}| shrinks like lam^2
    tt = TimeGrid(np.array([1.0]))
    gaps = [abs(rescaled_survival(FLAT, 1.0, lam, tt).probability[0] - math.exp(-1)) for lam in (0.1, 0.05)]
    assert gaps[1] < 0.01
    assert 3 < gaps[0] / gaps[1] < 5


def test_oscillation_amplitude_of_exponential_is_zero():
    t = np.linspace(0, 3, 50)
    assert oscillation_amplitude(t, 0.9 * np.exp(-0.7 * t)) <= 1e-14


def test_oscillation_grid_shapes():
    dense = oscillation_grid(0.0, 10.0, 1.0)
    assert dense.spacing == "linear" and dense.nodes[-1] == 10.0
    bursts = oscillation_grid(0.0, 1000.0, 1.0, anchors=8, periods=2.0, per_period=4)
    assert len(bursts) == 8 * 9
    assert bursts.nodes[0] == 0.0 and bursts.nodes[-1] == pytest.approx(1000.0)


def test_scan_without_features():
    scan = convergence_scan(FLAT, 1.0, [0.4, 0.2, 0.1], features=False)
    assert scan.strictly_decreasing
    assert scan.deviation.shape == (3, len(scan.t_tilde_grid))
    assert scan.zeno_width.size == 0 and scan.fitted_scalings == {}
    assert [r["lambda"] for r in scan.records()] == [0.4, 0.2, 0.1]
    np.testing.assert_allclose(scan.shrink_factors, scan.deviation_max[:-1] / scan.deviation_max[1:])


@pytest.mark.parametrize("lams", [[0.4, 0.2], [0.1, 0.2, 0.4], [0.4, 0.2, -0.1]])
def test_scan_validation(lams):
    with pytest.raises(ValueError):
        convergence_scan(FLAT, 1.0, lams, features=False)


def test_scan_closed_channel():
    with pytest.raises(ClosedChannel):
        convergence_scan(FLAT, 11.0, [0.4, 0.2, 0.1], features=False)
