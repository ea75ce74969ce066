import math

import numpy as np
import pytest

import gwdpy


def line(cells=16):
    return gwdpy.Reference.lebesgue(gwdpy.Grid.uniform(1, 0.0, 1.0, cells))


def test_mobility_and_action():
    h = gwdpy.Mobility.quadratic()
    assert h(0.5) == pytest.approx(0.25)
    assert h.lower == 0.0 and h.upper == 1.0
    phi = gwdpy.ActionDensity(2.0, h)
    assert phi.q == pytest.approx(2.0)
    assert gwdpy.eval_action(phi, 0.5, [0.5]) == pytest.approx(1.0)
    assert gwdpy.eval_conjugate(phi, 0.5, [2.0]) == pytest.approx(1.0)
    assert math.isinf(gwdpy.eval_action(phi, 1.5, [0.0]))


def test_measures():
    ref = line(10)
    mu = gwdpy.Measure(ref, [0.3] * 10)
    assert mu.mass() == pytest.approx(0.3)
    assert np.allclose(mu.density, 0.3)
    smooth = gwdpy.mollify(gwdpy.Measure(ref, [0.1] * 5 + [0.9] * 5), 0.2)
    assert smooth.mass() == pytest.approx(0.5)


def test_distance_and_mass_trace():
    ref = line(12)
    x = (np.arange(12) + 0.5) / 12
    mu0 = gwdpy.Measure(ref, list(0.5 + 0.2 * np.cos(np.pi * x)))
    mu1 = gwdpy.Measure(ref, list(0.5 - 0.2 * np.cos(np.pi * x)))
    phi = gwdpy.ActionDensity(2.0, gwdpy.Mobility.quadratic())
    r = gwdpy.distance(mu0, mu1, phi, time_steps=8, tolerance=1e-8)
    assert r["status"] == "converged"
    assert 0.0 < r["distance"] < math.inf
    trace = np.array(r["mass_trace"])
    assert np.max(np.abs(trace - trace[0])) < 1e-10

    bad = gwdpy.distance(mu0, gwdpy.Measure(ref, [0.6] * 12), phi, time_steps=8)
    assert bad["status"] == "infeasible"


def test_two_cell_and_constants():
    assert gwdpy.two_cell_exact((0.3, 0.5), (0.3, 0.5)) == pytest.approx(0.0, abs=1e-12)
    assert gwdpy.c_pd_constant(2.0, 1) == pytest.approx(16.0 / 3.0, abs=1e-10)
    assert gwdpy.dilation_exponent(2.0, 3) == pytest.approx(-1.0)


def test_heat_decay_rate():
    ref = line(64)
    x = (np.arange(64) + 0.5) / 64
    r = gwdpy.heat_decay(gwdpy.Measure(ref, list(0.5 + 0.25 * np.cos(np.pi * x))), 2.5, 1e-3)
    assert r["l2_rate"] == pytest.approx(math.pi**2, rel=0.02)
    assert r["gradient_ratio"] <= 1.0


def test_errors_raise():
    with pytest.raises(ValueError):
        gwdpy.Mobility.quadratic(1.0, 0.0)
