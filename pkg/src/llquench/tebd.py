"""Trotterized two-site evolution of the Bose-Hubbard chain.

Bonds are split into two layers (layer 0: bonds 0, 2, 4, ...; layer 1: bonds
1, 3, ...). One second-order step is ``L0(dt/2) L1(dt) L0(dt/2)``; the
fourth-order step is Suzuki's fractal composition of five such steps with
weights ``[s, s, 1 - 4s, s, s]``, ``s = 1 / (4 - 4**(1/3))``. Adjacent
half-layers of the same type are merged.

Single-site terms are shared between the two bonds touching a site (weight
1/2 each) except at the chain ends, where the only bond carries them fully,
so the bond Hamiltonians sum to the full lattice Hamiltonian.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field, replace
from functools import lru_cache
from typing import Callable

import numpy as np

from .model import MAX_FILLING, LatticeParams
from .mps import (
    SymmetricMPS,
    TruncationPolicy,
    annihilation_op,
    _conserving_mask,
    apply_two_site,
    creation_op,
    embed,
    init_fock,
)

__all__ = [
    "SUZUKI_S",
    "TrotterScheme",
    "EvolutionConfig",
    "QuenchProtocol",
    "Trajectory",
    "TruncationAbort",
    "ConvergenceError",
    "bond_hamiltonian",
    "build_bond_gate",
    "fourth_order_steps",
    "second_order_steps",
    "trotter_steps",
    "Propagator",
    "energy",
    "fock_seed",
    "prepare_ground_state",
    "coarsen_lattice",
    "refine_hardcore",
    "compress",
    "evolve",
    "evolve_real",
]

log = logging.getLogger(__name__)

SUZUKI_S = 1.0 / (4.0 - 4.0 ** (1.0 / 3.0))


class TruncationAbort(RuntimeError):
    """Discarded weight in one step exceeded the configured threshold."""

    def __init__(self, step: int, weight: float, threshold: float, max_bond_dim: int):
        super().__init__(
            f"step {step}: truncated weight {weight:.3e} > {threshold:.3e} "
            f"(max bond dimension {max_bond_dim}); increase chi_max or reduce dt"
        )
        self.step = step
        self.weight = weight
        self.threshold = threshold
        self.max_bond_dim = max_bond_dim


class ConvergenceError(RuntimeError):
    pass


@dataclass(frozen=True)
class TrotterScheme:
    order: int
    substep_fractions: tuple

    @classmethod
    def of_order(cls, order: int) -> "TrotterScheme":
        if order == 2:
            return cls(order=2, substep_fractions=tuple(_merge(_strang(1.0))))
        if order == 4:
            return cls(order=4, substep_fractions=tuple(_suzuki4(1.0)))
        raise ValueError(f"unsupported Trotter order {order}")

    def steps(self, dt: float) -> list[tuple[int, float]]:
        return [(layer, frac * dt) for layer, frac in self.substep_fractions]


@dataclass(frozen=True)
class EvolutionConfig:
    dt: float
    n_steps: int
    policy: TruncationPolicy = TruncationPolicy()
    measure_every: int = 1
    imaginary: bool = False
    order: int = 4
    abort_weight: float | None = None

    def __post_init__(self):
        if not self.dt > 0:
            raise ValueError("dt must be positive")
        if self.n_steps < 1:
            raise ValueError("n_steps must be >= 1")
        if self.measure_every < 1:
            raise ValueError("measure_every must be >= 1")


@dataclass(frozen=True)
class QuenchProtocol:
    """Instantaneous switch of the Tonks parameter at ``t = 0``."""

    gamma_initial: float
    gamma_final: float
    t_quench: float = 0.0

    def __post_init__(self):
        if self.t_quench != 0.0:
            raise ValueError("only instantaneous quenches at t = 0 are supported")

    @property
    def hardcore_initial(self) -> bool:
        return math.isinf(self.gamma_initial) and self.gamma_initial > 0


@dataclass
class Trajectory:
    """Time series recorded during an evolution. ``times`` are in units of ``time_unit``."""

    time_unit: float = 1.0
    times: list = field(default_factory=list)
    columns: dict = field(default_factory=dict)
    truncation_weight: list = field(default_factory=list)
    max_entropy: list = field(default_factory=list)
    norm_drift: list = field(default_factory=list)
    snapshots: list = field(default_factory=list)

    def record(self, t: float, weight: float, entropy: float, drift: float, values: dict | None) -> None:
        self.times.append(t / self.time_unit)
        self.truncation_weight.append(weight)
        self.max_entropy.append(entropy)
        self.norm_drift.append(drift)
        for key, val in (values or {}).items():
            self.columns.setdefault(key, []).append(val)

    def column(self, key: str) -> np.ndarray:
        return np.asarray(self.columns[key])


# --- Hamiltonian pieces ----------------------------------------------------------


def _site_weight(site: int, n_sites: int) -> float:
    return 1.0 if site in (0, n_sites - 1) else 0.5


def bond_hamiltonian(lp: LatticeParams, bond: int) -> np.ndarray:
    """Two-site Hamiltonian as a ``(d*d, d*d)`` matrix in the ``(n1, n2)`` basis."""
    if not 0 <= bond < lp.n_sites - 1:
        raise IndexError(f"bond {bond} out of range")
    d = lp.n_max + 1
    n = np.arange(d, dtype=float)
    eye = np.eye(d)
    b, bd = annihilation_op(d), creation_op(d)
    hop = -lp.hopping * (np.kron(bd, b) + np.kron(b, bd))
    onsite = []
    for site in (bond, bond + 1):
        w = _site_weight(site, lp.n_sites)
        onsite.append(w * np.diag(0.5 * lp.onsite_u * n * (n - 1) + lp.potential[site] * n))
    return hop + np.kron(onsite[0], eye) + np.kron(eye, onsite[1])


@lru_cache(maxsize=None)
def _number_blocks(d: int) -> tuple:
    tot = (np.arange(d)[:, None] + np.arange(d)[None, :]).ravel()
    return tuple(np.flatnonzero(tot == k) for k in range(2 * d - 1))


def _block_expm(h: np.ndarray, tau: complex) -> np.ndarray:
    d = int(round(math.sqrt(h.shape[0])))
    out = np.zeros(h.shape, dtype=complex)
    for idx in _number_blocks(d):
        w, v = np.linalg.eigh(h[np.ix_(idx, idx)])
        out[np.ix_(idx, idx)] = (v * np.exp(-1j * tau * w)[None, :]) @ v.conj().T
    return out


def build_bond_gate(lp: LatticeParams, bond: int, tau: complex) -> np.ndarray:
    """``exp(-i tau h_bond)`` as a ``(d, d, d, d)`` array ``[n1', n2', n1, n2]``.

    Real ``tau`` is a real-time step; ``tau = -1j * dt`` gives ``exp(-dt h)``.
    The exponential is taken block by block in the total occupation, so
    entries connecting different particle numbers are exactly zero.
    """
    if not abs(tau) > 0:
        raise ValueError("tau must be nonzero")
    d = lp.n_max + 1
    return _block_expm(bond_hamiltonian(lp, bond), tau).reshape(d, d, d, d)


# --- product formulas ----------------------------------------------------------


def _strang(a: float) -> list[tuple[int, float]]:
    return [(0, 0.5 * a), (1, a), (0, 0.5 * a)]


def _merge(steps):
    out: list[list] = []
    for layer, frac in steps:
        if out and out[-1][0] == layer:
            out[-1][1] += frac
        else:
            out.append([layer, frac])
    return [(layer, frac) for layer, frac in out]


def _suzuki4(dt: float) -> list[tuple[int, float]]:
    s = SUZUKI_S
    steps = []
    for w in (s, s, 1.0 - 4.0 * s, s, s):
        steps.extend(_strang(w * dt))
    return _merge(steps)


def fourth_order_steps(dt: float) -> list[tuple[int, float]]:
    """Ordered ``(layer, step)`` list of one fourth-order step of size ``dt``."""
    if not dt > 0:
        raise ValueError("dt must be positive")
    return _suzuki4(dt)


def second_order_steps(dt: float) -> list[tuple[int, float]]:
    if not dt > 0:
        raise ValueError("dt must be positive")
    return _merge(_strang(dt))


def trotter_steps(dt: float, order: int) -> list[tuple[int, float]]:
    return TrotterScheme.of_order(order).steps(dt)


# --- driver ---------------------------------------------------------------------


class Propagator:
    """Caches bond gates for one lattice and applies Trotter layers to a state."""

    def __init__(self, lp: LatticeParams, policy: TruncationPolicy = TruncationPolicy(), imaginary: bool = False):
        self.lp = lp
        self.policy = policy
        self.imaginary = imaginary
        self._gates: dict = {}
        self._direction = 1

    def gate(self, bond: int, step: float) -> np.ndarray:
        key = (bond, round(step, 15))
        g = self._gates.get(key)
        if g is None:
            tau = -1j * step if self.imaginary else step
            g = self._gates[key] = build_bond_gate(self.lp, bond, tau)
            if np.any(g[~_conserving_mask(g.shape[0])] != 0):
                raise RuntimeError("bond gate does not conserve particle number")
        return g

    def apply_layer(self, state: SymmetricMPS, layer: int, step: float) -> float:
        bonds = [b for b in range(layer, state.n_sites - 1, 2) if state.is_active(b)]
        if not bonds:
            return 0.0
        weight = 0.0
        if self._direction > 0:
            for b in bonds:
                if state.center not in (b, b + 1):
                    state.move_center(b)
                weight += apply_two_site(state, b, self.gate(b, step), self.policy, "right", check_gate=False)[1]
        else:
            for b in reversed(bonds):
                if state.center not in (b, b + 1):
                    state.move_center(b + 1)
                weight += apply_two_site(state, b, self.gate(b, step), self.policy, "left", check_gate=False)[1]
        self._direction = -self._direction
        return weight

    def step(self, state: SymmetricMPS, dt: float, order: int = 4) -> tuple[float, float]:
        """One Trotter step. Returns (discarded weight, max norm deviation before renormalization)."""
        return self.run(state, dt, 1, order)

    def run(self, state: SymmetricMPS, dt: float, n_steps: int, order: int = 4) -> tuple[float, float]:
        """``n_steps`` consecutive steps, merging the boundary half-layers between them."""
        weight = 0.0
        drift = 0.0
        for layer, sub in _merge(trotter_steps(dt, order) * n_steps):
            weight += self.apply_layer(state, layer, sub)
            drift = max(drift, abs(state.last_norm - 1.0))
        return weight, drift


def energy(state: SymmetricMPS, lp: LatticeParams) -> float:
    """``<H>`` as the sum of two-site bond energies (moves the center)."""
    d = state.d
    if lp.n_max != state.n_max:
        raise ValueError("lattice cutoff does not match the state")
    total = 0.0
    for b in range(state.n_sites - 1):
        if not state.is_active(b):
            continue
        state.move_center(b)
        theta = np.tensordot(state.tensors[b], state.tensors[b + 1], axes=(2, 0))
        chil, chir = theta.shape[0], theta.shape[3]
        vec = theta.transpose(1, 2, 0, 3).reshape(d * d, chil * chir)
        h = bond_hamiltonian(lp, b)
        total += float(np.real(np.vdot(vec, h @ vec)))
    return total


def _trap_frequency(lp: LatticeParams) -> float:
    x = lp.positions
    i = int(np.argmax(np.abs(x)))
    return math.sqrt(2.0 * lp.potential[i]) / abs(x[i]) if lp.potential[i] > 0 else 0.0


def fock_seed(lp: LatticeParams, n_particles: int) -> np.ndarray:
    """Evenly spaced single occupations over the central cloud region.

    The region is the Thomas-Fermi diameter ``2 sqrt(2N/omega)`` of the TG
    cloud if the lattice carries a harmonic trap, else the whole lattice.
    """
    m = lp.n_sites
    if n_particles > m:
        raise ValueError("more particles than sites")
    omega = _trap_frequency(lp)
    width = m if omega == 0 else min(m, 2.0 * math.sqrt(2.0 * n_particles / omega) / lp.dx)
    spacing = width / n_particles
    centre = 0.5 * (m - 1)
    pos = np.rint(centre + (np.arange(n_particles) - 0.5 * (n_particles - 1)) * spacing).astype(int)
    pos = np.clip(pos, 0, m - 1)
    occ = np.zeros(m, dtype=np.int64)
    for p in pos:
        while occ[p]:
            p += 1
        occ[p] = 1
    return occ


def coarsen_lattice(lp: LatticeParams, factor: int) -> LatticeParams:
    """Same continuum problem on ``n_sites / factor`` sites (block-averaged potential)."""
    if factor < 1 or lp.n_sites % factor:
        raise ValueError(f"cannot coarsen {lp.n_sites} sites by {factor}")
    return replace(
        lp,
        n_sites=lp.n_sites // factor,
        dx=lp.dx * factor,
        hopping=lp.hopping / factor**2,
        onsite_u=lp.onsite_u / factor,
        potential=lp.potential.reshape(-1, factor).mean(axis=1),
    )


def refine_hardcore(state: SymmetricMPS, factor: int, policy: TruncationPolicy = TruncationPolicy()) -> SymmetricMPS:
    """Split every hard-core site into ``factor`` sites sharing its particle equally.

    ``|0> -> |0...0>`` and ``|1> -> (|10..0> + |01..0> + ... + |0..01>) / sqrt(factor)``,
    an isometry into the finer lattice. The result is compressed with ``policy``.
    """
    if state.n_max != 1:
        raise ValueError("refinement is defined for hard-core states only")
    if factor == 1:
        return state.copy()
    amp = 1.0 / math.sqrt(factor)
    tensors, charges = [], [state.charges[0].copy()]
    for i, a in enumerate(state.tensors):
        qb = state.charges[i + 1]
        chil, _, chir = a.shape
        inner = np.concatenate([qb, qb - 1])  # (b, still to place) = (b, 0) then (b, 1)
        first = np.zeros((chil, 2, 2 * chir), dtype=complex)
        first[:, 0, :chir] = a[:, 0, :]
        first[:, 0, chir:] = a[:, 1, :]
        first[:, 1, :chir] = amp * a[:, 1, :]
        eye = np.eye(chir)
        mid = np.zeros((2 * chir, 2, 2 * chir), dtype=complex)
        mid[:chir, 0, :chir] = eye
        mid[chir:, 0, chir:] = eye
        mid[chir:, 1, :chir] = amp * eye
        last = np.zeros((2 * chir, 2, chir), dtype=complex)
        last[:chir, 0, :] = eye
        last[chir:, 1, :] = amp * eye
        tensors.append(first)
        charges.append(inner)
        for _ in range(factor - 2):
            tensors.append(mid.copy())
            charges.append(inner.copy())
        tensors.append(last)
        charges.append(qb.copy())
    out = SymmetricMPS(tensors=tensors, charges=charges, n_max=1, center=None)
    return compress(out, policy)


def compress(state: SymmetricMPS, policy: TruncationPolicy) -> SymmetricMPS:
    """Canonicalize and truncate every bond once with ``policy`` (in place)."""
    state.canonicalize(0)
    d = state.d
    ident = np.eye(d * d).reshape(d, d, d, d)
    for b in range(state.n_sites - 1):
        apply_two_site(state, b, ident, policy, "right", check_gate=False)
    return state


def _relax(state, lp, dt, config, tol, max_steps, n_particles):
    prop = Propagator(lp, config.policy, imaginary=True)
    offset = 2.0 * lp.hopping * n_particles
    e_old = energy(state, lp)
    steps = 0
    while steps < max_steps:
        prop.run(state, dt, config.measure_every, config.order)
        steps += config.measure_every
        e_new = energy(state, lp)
        change = abs(e_new - e_old) / config.measure_every
        e_old = e_new
        if change < tol * max(abs(e_new + offset), 1e-300):
            return e_new, steps, True
    return e_old, steps, False


def prepare_ground_state(
    lp: LatticeParams,
    n_particles: int,
    config: EvolutionConfig,
    *,
    stages: int = 3,
    tol: float = 1e-7,
    max_steps: int = 20000,
    n_max_out: int | None = None,
    coarse_levels: int = 2,
) -> SymmetricMPS:
    """Imaginary-time TEBD from a Fock seed, with a ``dt, dt/4, dt/16, ...`` ladder.

    Each stage runs until the energy change per step, sampled every
    ``config.measure_every`` steps, is below ``tol`` times the energy measured
    from the bottom of the lattice band (``E + 2 J N``). ``lp.n_max == 1``
    selects hard-core bosons (the TG limit); ``n_max_out`` zero-pads the
    result into a larger local space for a subsequent quench.

    Hard-core preparation first converges on a lattice coarsened up to
    ``coarse_levels`` times by 2 (while the filling stays below the sparse
    limit), then refines level by level, skipping the largest ``dt`` stage on
    the finer levels. ``config.dt`` refers to the target lattice and is scaled
    with ``dx**2`` on the coarse ones. ``coarse_levels=0`` relaxes on the target
    lattice only.
    """
    if lp.onsite_u < 0 and lp.n_max > 1 and n_particles > 1:
        raise ValueError("ground-state preparation expects repulsive or hard-core bosons")
    factor = 1
    if lp.n_max == 1:
        for _ in range(coarse_levels):
            f = 2 * factor
            if lp.n_sites % f or n_particles * f / lp.n_sites >= MAX_FILLING or lp.n_sites // f < 2 * n_particles:
                break
            factor = f
    dts = [config.dt / 4.0**k for k in range(stages)]
    state = None
    while True:
        level = coarsen_lattice(lp, factor)
        if state is None:
            state = init_fock(fock_seed(level, n_particles), lp.n_max)
            ladder = dts
        else:
            state = refine_hardcore(state, 2, config.policy)
            ladder = dts[1:] or dts
        for k, dt in enumerate(ladder):
            e, steps, ok = _relax(state, level, dt * factor**2, config, tol, max_steps, n_particles)
            log.info("imaginary time: %d sites, dt=%.3g, %d steps, E=%.10g, converged=%s", level.n_sites, dt * factor**2, steps, e, ok)
            if not ok and factor == 1 and k == len(ladder) - 1:
                raise ConvergenceError(f"ground state not converged after {max_steps} steps at dt={dt:g}")
        if factor == 1:
            break
        factor //= 2
    state.normalize()
    if n_max_out is not None and n_max_out != state.n_max:
        state = embed(state, n_max_out)
    return state


def evolve(
    state: SymmetricMPS,
    lp: LatticeParams,
    config: EvolutionConfig,
    observer: Callable | None = None,
    time_unit: float = 1.0,
    t0: float = 0.0,
) -> Trajectory:
    """Advance ``state`` in place by ``config.n_steps`` Trotter steps.

    ``observer(state, t)`` is called at ``t0`` and after every
    ``config.measure_every`` steps; it returns a dict of scalars, or a tuple
    ``(dict, snapshot)`` whose snapshot is stored in ``Trajectory.snapshots``.
    """
    if state.n_max != lp.n_max:
        raise ValueError(f"state cutoff {state.n_max} != lattice cutoff {lp.n_max}")
    prop = Propagator(lp, config.policy, imaginary=config.imaginary)
    traj = Trajectory(time_unit=time_unit)

    def measure(t, weight, drift):
        values = None
        if observer is not None:
            values = observer(state, t)
            if isinstance(values, tuple):
                values, snap = values
                traj.snapshots.append((t / time_unit, snap))
        entropy = max((s.entropy for s in state.spectra.values()), default=0.0)
        traj.record(t, weight, entropy, drift, values)

    measure(t0, 0.0, 0.0)
    report_every = max(config.n_steps // 10, 1)
    done = 0
    while done < config.n_steps:
        chunk = min(config.measure_every, config.n_steps - done)
        if config.abort_weight is None:
            weight, drift = prop.run(state, config.dt, chunk, config.order)
        else:
            # per-step abort check
            weight, drift = 0.0, 0.0
            for k in range(chunk):
                w, dr = prop.step(state, config.dt, config.order)
                if w > config.abort_weight:
                    raise TruncationAbort(done + k + 1, w, config.abort_weight, max(state.bond_dims, default=1))
                weight += w
                drift = max(drift, dr)
        done += chunk
        if drift > 1e-8 and not config.imaginary:
            log.warning("steps %d-%d: norm drift %.2e before renormalization", done - chunk + 1, done, drift)
        measure(t0 + done * config.dt, weight, drift)
        if done % report_every < chunk or done == config.n_steps:
            log.info("step %d/%d, max bond dimension %d", done, config.n_steps, max(state.bond_dims, default=1))
    return traj


def evolve_real(
    state: SymmetricMPS,
    lp_after_quench: LatticeParams,
    config: EvolutionConfig,
    observer: Callable | None = None,
    time_unit: float = 1.0,
) -> Trajectory:
    """Real-time evolution with the post-quench gates, built once at ``t = 0``."""
    if config.imaginary:
        raise ValueError("evolve_real needs a real-time config")
    return evolve(state, lp_after_quench, config, observer, time_unit)
