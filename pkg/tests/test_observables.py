import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from llquench import ed, model, mps, observables


def lattice(m, n_max, dx=0.5):
    return model.LatticeParams(n_sites=m, dx=dx, hopping=1.0, onsite_u=0.0, potential=np.zeros(m), n_max=n_max)


def test_fock_state_correlations():
    lp = lattice(6, 3)
    s = mps.init_fock([0, 1, 0, 2, 0, 1], 3)
    row, dens, vals = observables.measure(s, lp, anchor_site=3)
    np.testing.assert_allclose(dens, np.array([0, 1, 0, 2, 0, 1]) / lp.dx)
    np.testing.assert_allclose(row.masked()[[1, 3, 5]], [1.0, 0.5, 1.0])
    assert np.isnan(row.masked()[0])
    assert vals["g2_local"] == pytest.approx(0.5)
    assert vals["g3_local"] == pytest.approx(0.0)
    assert vals["sum_rule"] == pytest.approx(3.0)


@given(st.integers(0, 2**32 - 1))
def test_sum_rule_is_n_minus_one(seed):
    rng = np.random.default_rng(seed)
    b = ed.FockBasis(6, 3, 3)
    a = rng.normal(size=b.dim) + 1j * rng.normal(size=b.dim)
    a /= np.linalg.norm(a)
    s = mps.from_amplitudes(b.states, a, 3)
    lp = lattice(6, 3)
    row, dens, vals = observables.measure(s, lp)
    assert vals["sum_rule"] == pytest.approx(2.0, abs=1e-10)
    ref = ed.expectation(ed.DenseState(b, a), ("g2_row", row_anchor(row, lp)))
    np.testing.assert_allclose(row.masked(), ref, atol=1e-10)


def row_anchor(row, lp):
    return int(np.argmin(np.abs(lp.positions - row.anchor_x)))


def test_local_helpers_match_ed():
    rng = np.random.default_rng(5)
    b = ed.FockBasis(5, 4, 3)
    a = rng.normal(size=b.dim) + 0j
    a /= np.linalg.norm(a)
    s = mps.from_amplitudes(b.states, a, 3)
    lp = lattice(5, 3)
    dense = ed.DenseState(b, a)
    for i in range(5):
        assert observables.g2_local(s, lp, i) == pytest.approx(ed.expectation(dense, ("g2_local", i)))
        assert observables.g3_local(s, lp, i) == pytest.approx(ed.expectation(dense, ("g3_local", i)))
    c = observables.local_correlations(s, lp)
    assert c["site"] == observables.center_site(c["occupations"])


def test_g3_needs_three_bosons_per_site():
    s = mps.init_fock([1, 1], 2)
    with pytest.raises(ValueError, match="n_max"):
        observables.g3_local(s, lattice(2, 2), 0)
    with pytest.raises(IndexError):
        observables.g2_local(s, lattice(2, 2), 5)
    with pytest.raises(IndexError):
        observables.g2_row(s, lattice(2, 2), anchor_site=9)


def test_empty_anchor_gives_invalid_row():
    s = mps.init_fock([0, 1, 1], 2)
    row = observables.g2_row(s, lattice(3, 2), anchor_site=0)
    assert not row.valid.any()


def test_resample_does_not_bridge_the_anchor():
    xs = np.arange(-5, 6, dtype=float)
    g2 = np.where(xs == 0, np.nan, 1.0 + 0.1 * xs)
    row = observables.CorrelationRow(anchor_x=0.0, xs=xs, g2=g2, valid=xs != 0)
    out = row.resample([-0.5, 0.5, 2.5, 7.0])
    assert np.isnan(out.g2[0]) and np.isnan(out.g2[1]) and np.isnan(out.g2[3])
    assert out.g2[2] == pytest.approx(1.25)
    with pytest.raises(ValueError):
        observables.CorrelationRow(anchor_x=0.0, xs=[0, 1], g2=[1.0])


def test_power_law_fit_recovers_exponent():
    t = np.geomspace(1e-3, 1e-1, 40)
    series = observables.LocalSeries(t, 3.0 * t ** (4 / 3), np.zeros_like(t), np.ones_like(t))
    assert observables.fit_power_law(series, (2e-3, 5e-2)) == pytest.approx(4 / 3)
    with pytest.raises(ValueError):
        observables.fit_power_law(series, (1.0, 2.0))
    with pytest.raises(ValueError):
        observables.LocalSeries([0.0, 1.0], [0.0], [0.0], [0.0])


@given(st.floats(50.0, 400.0), st.floats(0.0, 6.0))
def test_oscillation_fit_recovers_frequency(omega, phase):
    t = np.linspace(0, 6 * 2 * np.pi / omega, 120)
    y = 0.2 + 0.1 * np.cos(omega * t + phase)
    w, popt = observables.fit_oscillation(t, y, omega * 1.04)
    assert w == pytest.approx(omega, rel=1e-6)
    assert popt[1] == pytest.approx(0.1, rel=1e-6)
