import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy import integrate, optimize

from llquench import bethe2
from llquench.observables import CorrelationRow


def brentq_gas(gamma, m):
    # delta/(2 gamma) = cot(delta/4) bracketed on the branch interval
    f = lambda d: d / (2 * gamma) - 1 / math.tan(d / 4)  # noqa: E731
    if gamma > 0:
        lo, hi = 4 * math.pi * m, 2 * math.pi * (2 * m + 1)
    else:
        lo, hi = 2 * math.pi * (2 * m + 1), 4 * math.pi * (m + 1)
    eps = 1e-12
    return optimize.brentq(f, lo + eps, hi - eps, xtol=1e-14)


def brentq_bound(gamma):
    return optimize.brentq(lambda dt: dt * math.tanh(dt / 4) + 2 * gamma, 1e-9, 10 - 4 * gamma, xtol=1e-14)


@pytest.mark.parametrize("gamma", [-89.0355, -20.0, -3.0, -0.2, 0.3, 5.0, 40.0])
def test_gas_roots_match_bracketed_solver(gamma):
    d = bethe2.gas_deltas(gamma, 6)
    ref = [brentq_gas(gamma, m) for m in range(6)]
    np.testing.assert_allclose(d, ref, rtol=1e-12)
    for root in bethe2.solve_gas_roots(gamma, 6):
        assert bethe2.bethe_residual(root) < 1e-9


@pytest.mark.parametrize("gamma", [-0.05, -1.0, -10.0, -89.0355, -1e4])
def test_bound_root_matches_bracketed_solver(gamma):
    root = bethe2.solve_bound_root(gamma)
    assert root.delta_tilde == pytest.approx(brentq_bound(gamma), rel=1e-12)
    assert bethe2.bethe_residual(root) < 1e-10
    assert root.energy == pytest.approx(-root.delta_tilde**2 / 4)


def test_frozen_bound_root():
    root = bethe2.solve_bound_root(-10.0)
    assert root.delta_tilde == pytest.approx(20.0018144327356, rel=1e-12)
    assert root.energy == pytest.approx(-100.018145150398, rel=1e-12)


def test_frozen_gas_roots():
    np.testing.assert_allclose(bethe2.gas_deltas(5.0, 3), [4.56890742, 14.92735234, 26.57248301], rtol=1e-8)
    np.testing.assert_allclose(bethe2.gas_deltas(-5.0, 3), [9.27422914, 23.52498787, 36.63317541], rtol=1e-8)


def test_limits():
    np.testing.assert_allclose(bethe2.gas_deltas(math.inf, 3), 2 * np.pi * np.array([1, 3, 5]))
    np.testing.assert_allclose(bethe2.gas_deltas(0.0, 3), 4 * np.pi * np.arange(3))
    with pytest.raises(ValueError):
        bethe2.solve_bound_root(1.0)
    with pytest.raises(ValueError):
        bethe2.solve_bound_root(-math.inf)
    with pytest.raises(ValueError):
        bethe2.gas_deltas(1.0, 0)


@pytest.mark.parametrize("gamma", [-50.0, -2.0, 3.0])
def test_normalization_by_quadrature(gamma):
    roots = bethe2.solve_gas_roots(gamma, 3)
    if gamma < 0:
        roots.append(bethe2.solve_bound_root(gamma))
    for r in roots:
        val = integrate.quad(lambda y: abs(bethe2.wavefunction(r, y)) ** 2, 0, 1, epsabs=1e-13)[0]
        assert val == pytest.approx(1.0, abs=1e-10)


def test_orthogonality_by_quadrature():
    roots = [bethe2.solve_bound_root(-7.0)] + bethe2.solve_gas_roots(-7.0, 4)
    for i, a in enumerate(roots):
        for b in roots[i + 1 :]:
            assert abs(bethe2.inner_product(a, b)) < 1e-9


@pytest.mark.parametrize("gamma", [-89.0355, -5.0, 2.0])
def test_closed_form_tg_overlap_matches_quadrature(gamma):
    roots = bethe2.solve_gas_roots(gamma, 3)
    if gamma < 0:
        roots.append(bethe2.solve_bound_root(gamma))
    for r in roots:
        assert bethe2.tg_overlap(r) == pytest.approx(bethe2.inner_product(r), abs=1e-10)


def test_bound_overlap_scaling_and_phase():
    eps = bethe2.overlap_tg_bound(-200.0)
    assert eps.real == pytest.approx(0.0, abs=1e-15)
    assert eps.imag < 0
    assert abs(eps) * 200**1.5 == pytest.approx(2 * math.sqrt(2) * math.pi, rel=0.05)


def test_bound_state_contact():
    st100 = bethe2.two_particle_state(bethe2.solve_bound_root(-100.0))
    assert bethe2.g2_of_state(st100.contact_amp) == pytest.approx(50.0, rel=0.02)


def test_tg_state_has_no_contact():
    tg = bethe2.solve_gas_roots(math.inf, 1)[0]
    assert abs(bethe2.contact_amplitude(tg)) < 1e-15


def test_quench_completeness_and_initial_value():
    exp = bethe2.quench_expansion(-89.0355, 1000)
    assert exp.completeness == pytest.approx(1.0, abs=1e-9)
    assert bethe2.g2_exact_quench(-89.0355, [0.0])[0] == 0.0


def test_frozen_quench_series():
    g2 = bethe2.g2_exact_quench(-89.0355, [0.001, 0.01])
    np.testing.assert_allclose(g2, [0.00784285, 0.01067572], rtol=1e-5)


def test_incomplete_expansion_raises():
    with pytest.raises(bethe2.CompletenessError):
        bethe2.g2_exact_quench(-89.0355, [0.1], n_branches=3)


def test_quench_g2_by_direct_summation():
    # independent route: sum c_n phi_n(0) exp(-i E_n t) with quad-computed overlaps
    gamma, t = -12.0, 0.004
    roots = [bethe2.solve_bound_root(gamma)] + bethe2.solve_gas_roots(gamma, 60)
    amp = sum(bethe2.inner_product(r) * bethe2.contact_amplitude(r) * np.exp(-1j * r.energy * t) for r in roots)
    assert bethe2.g2_exact_quench(gamma, [t], n_branches=1000)[0] == pytest.approx(0.5 * abs(amp) ** 2, rel=2e-3)


@given(t=st.floats(0, 1))
def test_approximations_are_bounded(t):
    g = -30.0
    assert 0 <= bethe2.g2_single_mode(g, t) <= 16 * math.pi**2 / g**2 + 1e-15
    assert math.pi**2 / g**2 - 1e-15 <= bethe2.g2_two_state(g, t) <= 9 * math.pi**2 / g**2 + 1e-15


def test_spectrum_points():
    pts = bethe2.spectrum([-1e4, 1e4, math.inf, -2.0], 2)
    assert pts[0].energies[0] - pts[1].energies[0] == pytest.approx(0.0, abs=1e-3 * math.pi**2)
    assert pts[2].inv_gamma == 0.0 and math.isnan(pts[2].bound_energy)
    assert pts[3].bound_energy < 0


def test_hs_reference_shifts_and_scales():
    xs = np.linspace(-2, 2, 41)
    row = CorrelationRow(anchor_x=0.0, xs=xs, g2=1.0 - np.sinc(xs) ** 2)
    ref = bethe2.hs_reference(row, a_1d=0.2, rho=1.0)
    # a point at separation s maps to s + a and its value scales by 1 - a rho
    k = 25  # separation 0.5
    assert ref.xs[k] == pytest.approx(0.7)
    assert ref.g2[k] == pytest.approx(0.8 * row.g2[k])
    assert not ref.valid[np.abs(ref.xs) > 1.0].any()
    with pytest.raises(ValueError):
        bethe2.hs_reference(row, a_1d=1.5, rho=1.0)


def test_hs_reference_separation_scaling():
    xs = np.linspace(-2, 2, 41)
    row = CorrelationRow(anchor_x=0.0, xs=xs, g2=1.0 - np.sinc(xs) ** 2)
    ref = bethe2.hs_reference(row, a_1d=0.2, rho=1.0, scale="separations")
    k = 25  # separation 0.5 -> 0.5 * 0.8 + 0.2, value unchanged
    assert ref.xs[k] == pytest.approx(0.6)
    assert ref.g2[k] == row.g2[k]
    assert ref.xs[15] == pytest.approx(-0.6)
    with pytest.raises(ValueError):
        bethe2.hs_reference(row, a_1d=0.2, rho=1.0, scale="density")


def test_hs_reference_zero_radius_is_identity():
    xs = np.linspace(-1, 1, 21)
    row = CorrelationRow(anchor_x=0.0, xs=xs, g2=xs**2)
    for scale in ("values", "separations"):
        ref = bethe2.hs_reference(row, a_1d=0.0, rho=1.0, scale=scale)
        np.testing.assert_allclose(ref.xs, xs)
        np.testing.assert_allclose(ref.g2, row.g2)
