import math

import numpy as np
import pytest

from llquench import ed, model, mps, observables, tebd

EXACT = mps.TruncationPolicy(chi_max=1000, svd_cutoff=0.0)


def small_lattice(m=6, n_max=2, u=-2.0, j=1.0, trap=0.1):
    return model.LatticeParams(
        n_sites=m, dx=1.0, hopping=j, onsite_u=u, potential=trap * (np.arange(m) - (m - 1) / 2) ** 2, n_max=n_max, n_particles=2
    )


def free_fermion_single(lp):
    return np.diag(lp.potential) - lp.hopping * (np.eye(lp.n_sites, k=1) + np.eye(lp.n_sites, k=-1))


def test_bond_hamiltonians_sum_to_ed_hamiltonian():
    lp = small_lattice(5, 2)
    b = ed.FockBasis(5, 3, 2)
    h = ed.build_hamiltonian(lp, b).toarray()
    rng = np.random.default_rng(0)
    for _ in range(3):
        a = rng.normal(size=b.dim) + 1j * rng.normal(size=b.dim)
        a /= np.linalg.norm(a)
        s = mps.from_amplitudes(b.states, a, 2)
        assert tebd.energy(s, lp) == pytest.approx(np.vdot(a, h @ a).real, abs=1e-10)


def test_gate_is_unitary_and_conserving():
    lp = small_lattice(4, 3)
    g = tebd.build_bond_gate(lp, 1, 0.3).reshape(16, 16)
    np.testing.assert_allclose(g.conj().T @ g, np.eye(16), atol=1e-12)
    n = np.arange(4)
    tot = (n[:, None] + n[None, :]).ravel()
    assert np.all(g[tot[:, None] != tot[None, :]] == 0)
    with pytest.raises(ValueError):
        tebd.build_bond_gate(lp, 1, 0.0)


@pytest.mark.parametrize("order", [2, 4])
def test_schedule_fractions_sum_to_dt(order):
    steps = tebd.trotter_steps(0.1, order)
    for layer in (0, 1):
        assert sum(s for l_, s in steps if l_ == layer) == pytest.approx(0.1)
    with pytest.raises(ValueError):
        tebd.TrotterScheme.of_order(3)


def test_suzuki_coefficient():
    s = tebd.SUZUKI_S
    assert 4 * s**3 + (1 - 4 * s) ** 3 == pytest.approx(0.0, abs=1e-14)


@pytest.mark.parametrize("order,expected", [(2, 2.0), (4, 4.0)])
def test_global_error_scaling_against_ed(order, expected):
    lp = small_lattice()
    b = ed.FockBasis(6, 2, 2)
    h = ed.build_hamiltonian(lp, b)
    psi0 = ed.DenseState.fock(b, [0, 1, 0, 0, 1, 0]).amplitudes
    exact, _ = ed.evolve(h, psi0, 1.0)
    errs = []
    dts = [0.25, 0.125, 0.0625]
    for dt in dts:
        s = mps.from_amplitudes(b.states, psi0, 2)
        n = int(round(1.0 / dt))
        tebd.evolve(s, lp, tebd.EvolutionConfig(dt=dt, n_steps=n, policy=EXACT, measure_every=n, order=order))
        errs.append(np.linalg.norm(mps.to_amplitudes(s, b.states) - exact))
    slope = np.polyfit(np.log(dts), np.log(errs), 1)[0]
    assert slope == pytest.approx(expected, abs=0.3)


def test_real_time_matches_ed_observables():
    lp = small_lattice(8, 3, u=-3.0)
    b = ed.FockBasis(8, 3, 3)
    h = ed.build_hamiltonian(lp, b)
    psi0 = ed.DenseState.fock(b, [0, 0, 1, 1, 0, 1, 0, 0]).amplitudes
    ev = ed.Evolver(h)
    s = mps.from_amplitudes(b.states, psi0, 3)

    def obs(state, t):
        return {"g2": observables.g2_local(state, lp, 3), "n": float(observables.occupations(state).sum())}

    traj = tebd.evolve(s, lp, tebd.EvolutionConfig(dt=0.02, n_steps=50, policy=EXACT, measure_every=10), obs)
    for t, g2, n in zip(traj.times, traj.column("g2"), traj.column("n")):
        ref = ed.DenseState(b, ev(psi0, t))
        assert g2 == pytest.approx(ed.expectation(ref, ("g2_local", 3)), abs=1e-6)
        assert n == pytest.approx(3.0, abs=1e-12)
    assert max(traj.norm_drift) < 1e-10


def test_hardcore_real_time_matches_free_fermions():
    m, occ = 16, [0, 0, 0, 1, 0, 1, 1, 0, 0, 0, 1, 0, 0, 0, 0, 0]
    lp = model.LatticeParams(n_sites=m, dx=1.0, hopping=1.0, onsite_u=0.0, potential=0.05 * (np.arange(m) - 7.5) ** 2, n_max=1)
    s = mps.init_fock(occ, 1)
    t_final = 1.5
    tebd.evolve(s, lp, tebd.EvolutionConfig(dt=0.01, n_steps=150, policy=mps.TruncationPolicy(chi_max=200, svd_cutoff=1e-14)))
    w, u = np.linalg.eigh(free_fermion_single(lp))
    prop = (u * np.exp(-1j * w * t_final)) @ u.conj().T
    cols = prop[:, np.flatnonzero(occ)]
    np.testing.assert_allclose(observables.occupations(s), (np.abs(cols) ** 2).sum(axis=1), atol=1e-7)


def test_imaginary_time_hardcore_ground_state_matches_free_fermions():
    m, n = 32, 3
    lp = model.LatticeParams(n_sites=m, dx=1.0, hopping=1.0, onsite_u=0.0, potential=0.01 * (np.arange(m) - 15.5) ** 2, n_max=1)
    cfg = tebd.EvolutionConfig(dt=0.2, n_steps=1, policy=mps.TruncationPolicy(chi_max=32), measure_every=10, order=2, imaginary=True)
    s = tebd.prepare_ground_state(lp, n, cfg, stages=3, tol=1e-10, coarse_levels=0)
    w, u = np.linalg.eigh(free_fermion_single(lp))
    # the Strang splitting biases the fixed point by O(dt^2) with the last stage at dt/16
    assert tebd.energy(s, lp) == pytest.approx(w[:n].sum(), abs=1e-4)
    np.testing.assert_allclose(observables.occupations(s), (np.abs(u[:, :n]) ** 2).sum(axis=1), atol=2e-4)


def test_multigrid_preparation_close_to_free_fermions():
    cp = model.trapped_gas(3, 10.0)
    lp = model.hardcore(model.discretize(cp, 96, 2))
    cfg = tebd.EvolutionConfig(dt=1.0 / lp.hopping, n_steps=1, policy=mps.TruncationPolicy(chi_max=32), measure_every=10, order=2, imaginary=True)
    s = tebd.prepare_ground_state(lp, 3, cfg, coarse_levels=1, n_max_out=2)
    assert s.n_max == 2
    dens = observables.occupations(s)
    w, u = np.linalg.eigh(free_fermion_single(lp))
    ref = (np.abs(u[:, :3]) ** 2).sum(axis=1)
    assert dens.sum() == pytest.approx(3.0, abs=1e-10)
    assert np.abs(dens - ref).max() / ref.max() < 0.03


def test_preparation_rejects_attractive_soft_core():
    lp = small_lattice(8, 2, u=-1.0)
    cfg = tebd.EvolutionConfig(dt=0.1, n_steps=1, imaginary=True)
    with pytest.raises(ValueError):
        tebd.prepare_ground_state(lp, 2, cfg)


def test_truncation_abort_carries_diagnostics():
    lp = small_lattice(8, 2, u=-3.0)
    s = mps.init_fock([1, 0, 1, 0, 1, 0, 1, 0], 2)
    cfg = tebd.EvolutionConfig(dt=0.3, n_steps=20, policy=mps.TruncationPolicy(chi_max=1, svd_cutoff=0.0), abort_weight=1e-6)
    with pytest.raises(tebd.TruncationAbort) as info:
        tebd.evolve(s, lp, cfg)
    assert info.value.weight > 1e-6 and info.value.step >= 1


def test_trajectory_and_config_validation():
    with pytest.raises(ValueError):
        tebd.EvolutionConfig(dt=0.0, n_steps=1)
    with pytest.raises(ValueError):
        tebd.EvolutionConfig(dt=0.1, n_steps=0)
    with pytest.raises(ValueError):
        tebd.QuenchProtocol(math.inf, -5.0, t_quench=1.0)
    assert tebd.QuenchProtocol(math.inf, -5.0).hardcore_initial
    s = mps.init_fock([1, 0, 0], 2)
    with pytest.raises(ValueError):
        tebd.evolve(s, small_lattice(3, 3), tebd.EvolutionConfig(dt=0.1, n_steps=1))
    with pytest.raises(ValueError):
        tebd.evolve_real(s, small_lattice(3, 2), tebd.EvolutionConfig(dt=0.1, n_steps=1, imaginary=True))


def test_fock_seed_and_coarsening():
    lp = model.hardcore(model.discretize(model.trapped_gas(6, 1.0), 256, 2))
    occ = tebd.fock_seed(lp, 6)
    assert occ.sum() == 6 and occ.max() == 1
    coarse = tebd.coarsen_lattice(lp, 4)
    assert coarse.n_sites == 64 and coarse.dx == pytest.approx(4 * lp.dx)
    assert coarse.hopping == pytest.approx(lp.hopping / 16)
    with pytest.raises(ValueError):
        tebd.coarsen_lattice(lp, 3)


def test_refine_preserves_norm_and_number():
    lp = model.hardcore(model.discretize(model.trapped_gas(2, 1.0), 32, 2))
    coarse = tebd.coarsen_lattice(lp, 2)
    s = mps.init_fock(tebd.fock_seed(coarse, 2), 1)
    fine = tebd.refine_hardcore(s, 2)
    assert fine.n_sites == 32
    assert observables.occupations(fine).sum() == pytest.approx(2.0)
    assert abs(mps.overlap(fine, fine)) == pytest.approx(1.0)
