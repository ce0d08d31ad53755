"""Continuum Lieb-Liniger parameters and their Bose-Hubbard discretization.

Units are hbar = m = 1 throughout. The continuum Hamiltonian

    H = int dx psi^+ [ -1/2 d^2 + g/2 psi^+ psi + V(x) ] psi,   V = omega^2 x^2 / 2

is mapped onto a sparsely filled Bose-Hubbard chain with

    J = 1 / (2 dx^2),   U = g / dx,   V_i = V(x_i),

which reproduces the continuum dispersion and the contact interaction to O(dx^2).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

__all__ = [
    "MAX_FILLING",
    "HBAR_SI",
    "ContinuumParams",
    "LatticeParams",
    "UnitSystem",
    "discretize",
    "tonks_parameter",
    "scattering_length",
    "beat_frequency_si",
    "beat_frequency_trap",
    "tg_central_density",
    "tg_cloud_radius",
    "trapped_gas",
    "hardcore",
]

MAX_FILLING = 0.15
HBAR_SI = 1.054571817e-34


@dataclass(frozen=True)
class ContinuumParams:
    """Physical description of the trapped gas.

    ``rho`` is the reference (cloud-center) density that defines the Tonks
    parameter and the time unit ``4 / rho**2``.
    """

    n_particles: int
    g: float
    rho: float
    omega: float = 0.0
    box_length: float = 1.0

    def __post_init__(self):
        if int(self.n_particles) != self.n_particles or self.n_particles < 1:
            raise ValueError(f"n_particles must be a positive integer, got {self.n_particles}")
        if not self.rho > 0:
            raise ValueError(f"rho must be positive, got {self.rho}")
        if not self.box_length > 0:
            raise ValueError(f"box_length must be positive, got {self.box_length}")
        if self.omega < 0:
            raise ValueError(f"omega must be >= 0, got {self.omega}")
        if not math.isfinite(self.g):
            raise ValueError("g must be finite")

    @property
    def gamma(self) -> float:
        return tonks_parameter(self.g, self.rho)

    @property
    def units(self) -> "UnitSystem":
        return UnitSystem.for_density(self.rho)

    def with_gamma(self, gamma: float) -> "ContinuumParams":
        """Same gas with the interaction set to ``gamma * rho``."""
        return replace(self, g=gamma * self.rho)


@dataclass(frozen=True, eq=False)
class LatticeParams:
    n_sites: int
    dx: float
    hopping: float
    onsite_u: float
    potential: np.ndarray
    n_max: int
    n_particles: int = 0

    def __post_init__(self):
        pot = np.asarray(self.potential, dtype=float)
        if pot.shape != (self.n_sites,):
            raise ValueError(f"potential must have length n_sites={self.n_sites}, got shape {pot.shape}")
        pot.setflags(write=False)
        object.__setattr__(self, "potential", pot)
        if self.n_max < 1:
            raise ValueError("n_max must be >= 1")

    @property
    def box_length(self) -> float:
        return self.n_sites * self.dx

    @property
    def positions(self) -> np.ndarray:
        """Site centers measured from the middle of the box."""
        return (np.arange(self.n_sites) + 0.5) * self.dx - 0.5 * self.box_length

    @property
    def filling(self) -> float:
        return self.n_particles / self.n_sites

    def with_interaction(self, g: float) -> "LatticeParams":
        """Copy with the on-site coupling rebuilt from a continuum ``g``."""
        return replace(self, onsite_u=g / self.dx)

    def with_n_max(self, n_max: int) -> "LatticeParams":
        return replace(self, n_max=n_max)


@dataclass(frozen=True)
class UnitSystem:
    hbar: float = 1.0
    mass: float = 1.0
    time_unit: float = 4.0

    @classmethod
    def for_density(cls, rho: float) -> "UnitSystem":
        if not rho > 0:
            raise ValueError("rho must be positive")
        return cls(time_unit=4.0 / rho**2)

    def to_units(self, t):
        """Program time -> multiples of ``4 / rho**2``."""
        return np.asarray(t) / self.time_unit

    def from_units(self, t):
        return np.asarray(t) * self.time_unit


def tonks_parameter(g: float, rho: float) -> float:
    if not rho > 0:
        raise ValueError("rho must be positive")
    return g / rho


def scattering_length(g: float) -> float:
    """1D scattering length ``a_1D`` from ``g = -2 / a_1D``."""
    if g == 0:
        raise ValueError("scattering length is undefined for g = 0")
    return -2.0 / g


def beat_frequency_si(gamma: float, rho: float, mass: float, hbar: float = 1.0) -> float:
    """Asymptotic pair-binding beat frequency ``gamma^2 hbar rho^2 / (4 m)``.

    With the defaults (hbar = 1) this is in program units; pass ``hbar=HBAR_SI``
    with SI density and mass to get rad/s.
    """
    if not rho > 0 or not mass > 0:
        raise ValueError("rho and mass must be positive")
    return gamma**2 * hbar * rho**2 / (4.0 * mass)


def beat_frequency_trap(gamma: float, n_particles: int, omega_par: float) -> float:
    """Same frequency for a harmonically trapped TG cloud: ``gamma^2 N omega / 4``."""
    return gamma**2 * n_particles * omega_par / 4.0


def tg_central_density(n_particles: int, omega: float) -> float:
    """Peak density of a trapped Tonks-Girardeau gas (local density approximation)."""
    return math.sqrt(2.0 * n_particles * omega) / math.pi


def tg_cloud_radius(n_particles: int, omega: float) -> float:
    """Thomas-Fermi radius ``sqrt(2N / omega)`` of the fermionized cloud."""
    return math.sqrt(2.0 * n_particles / omega)


def trapped_gas(n_particles: int, gamma: float, rho: float = 1.0, margin: float = 0.25) -> ContinuumParams:
    """Harmonically trapped gas whose TG center density equals ``rho``.

    The box holds the cloud diameter plus ``margin`` of it on either side.
    """
    omega = (math.pi * rho) ** 2 / (2.0 * n_particles)
    radius = tg_cloud_radius(n_particles, omega)
    return ContinuumParams(
        n_particles=n_particles,
        g=gamma * rho,
        rho=rho,
        omega=omega,
        box_length=2.0 * radius * (1.0 + 2.0 * margin),
    )


def discretize(cp: ContinuumParams, n_sites: int, n_max: int = 4) -> LatticeParams:
    if n_sites < 2 * cp.n_particles:
        raise ValueError(f"n_sites={n_sites} must be at least 2*n_particles={2 * cp.n_particles}")
    if n_max < 2:
        raise ValueError(f"n_max must be >= 2, got {n_max}")
    filling = cp.n_particles / n_sites
    if filling >= MAX_FILLING:
        raise ValueError(
            f"mean occupation {filling:.3f} >= {MAX_FILLING}: lattice too coarse for the continuum limit"
        )
    dx = cp.box_length / n_sites
    x = (np.arange(n_sites) + 0.5) * dx - 0.5 * cp.box_length
    return LatticeParams(
        n_sites=n_sites,
        dx=dx,
        hopping=1.0 / (2.0 * dx * dx),
        onsite_u=cp.g / dx,
        potential=0.5 * cp.omega**2 * x**2,
        n_max=n_max,
        n_particles=cp.n_particles,
    )


def hardcore(lp: LatticeParams) -> LatticeParams:
    """Hard-core (gamma = +inf) version of ``lp``: one boson per site at most."""
    return replace(lp, n_max=1, onsite_u=0.0)
