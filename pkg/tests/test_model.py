import math

import numpy as np
import pytest

from llquench import model


def test_discretize_maps_continuum_couplings():
    cp = model.ContinuumParams(n_particles=4, g=-3.0, rho=1.0, omega=0.5, box_length=8.0)
    lp = model.discretize(cp, 64, 4)
    dx = 8.0 / 64
    assert lp.dx == pytest.approx(dx)
    assert lp.hopping == pytest.approx(1.0 / (2 * dx * dx))
    assert lp.onsite_u == pytest.approx(-3.0 / dx)
    assert lp.potential[0] == pytest.approx(0.5 * 0.25 * (-4.0 + dx / 2) ** 2)
    # symmetric grid centred on the trap minimum
    np.testing.assert_allclose(lp.positions, -lp.positions[::-1])


@pytest.mark.parametrize("n_sites", [7, 26])
def test_discretize_rejects_dense_lattice(n_sites):
    cp = model.ContinuumParams(n_particles=4, g=1.0, rho=1.0, box_length=4.0)
    with pytest.raises(ValueError):
        model.discretize(cp, n_sites)


def test_discretize_rejects_small_cutoff():
    cp = model.ContinuumParams(n_particles=2, g=1.0, rho=1.0, box_length=4.0)
    with pytest.raises(ValueError, match="n_max"):
        model.discretize(cp, 64, n_max=1)


def test_invalid_continuum_params():
    with pytest.raises(ValueError):
        model.ContinuumParams(n_particles=0, g=1.0, rho=1.0)
    with pytest.raises(ValueError):
        model.ContinuumParams(n_particles=2, g=1.0, rho=-1.0)
    with pytest.raises(ValueError):
        model.ContinuumParams(n_particles=2, g=math.nan, rho=1.0)


def test_trapped_gas_center_density_matches_rho():
    cp = model.trapped_gas(6, -18.7931, rho=1.3)
    assert model.tg_central_density(6, cp.omega) == pytest.approx(1.3)
    assert cp.gamma == pytest.approx(-18.7931)
    radius = model.tg_cloud_radius(6, cp.omega)
    assert cp.box_length == pytest.approx(2 * radius * 1.5)


def test_desk_scale_lattice_numbers():
    lp = model.discretize(model.trapped_gas(6, -18.7931), 256, 4)
    # frozen values for the default desk-scale lattice
    assert lp.dx == pytest.approx(0.0447623, rel=1e-5)
    assert lp.hopping == pytest.approx(249.5426, rel=1e-5)
    assert lp.filling == pytest.approx(6 / 256)


def test_hardcore_drops_interaction():
    lp = model.discretize(model.trapped_gas(4, -5.0), 64, 3)
    hc = model.hardcore(lp)
    assert hc.n_max == 1 and hc.onsite_u == 0.0
    np.testing.assert_array_equal(hc.potential, lp.potential)


def test_units_and_frequencies():
    u = model.UnitSystem.for_density(2.0)
    assert u.time_unit == 1.0
    assert u.to_units(3.0) == pytest.approx(3.0)
    # in time units 4/rho^2 the beat frequency is gamma^2
    w = model.beat_frequency_si(-10.0, 1.0, 1.0)
    assert w * model.UnitSystem.for_density(1.0).time_unit == pytest.approx(100.0)
    assert model.scattering_length(-4.0) == pytest.approx(0.5)
    with pytest.raises(ValueError):
        model.scattering_length(0.0)


def test_beat_frequency_trap_consistent_with_density():
    n, omega = 6, 0.8
    rho0 = model.tg_central_density(n, omega)
    gamma = -5.0
    # rho0^2 / 4 = 2 N omega / (4 pi^2) differs from N omega / 4 by 2/pi^2
    ratio = model.beat_frequency_si(gamma, rho0, 1.0) / model.beat_frequency_trap(gamma, n, omega)
    assert ratio == pytest.approx(2 / math.pi**2)


def test_lattice_params_validates_potential():
    with pytest.raises(ValueError):
        model.LatticeParams(n_sites=4, dx=1.0, hopping=1.0, onsite_u=0.0, potential=np.zeros(3), n_max=2)
