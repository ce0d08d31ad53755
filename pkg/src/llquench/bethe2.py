"""Two bosons on a unit ring with contact interaction, solved exactly.

With zero center-of-mass momentum the relative wavefunction on ``0 <= y <= 1``
(``y = x2 - x1``) is

    phi(y) = 2 A exp(i delta/4) cos(delta/2 * (y - 1/2)),

and the contact condition at ``y = 0`` gives the Bethe equation
``delta / (2 gamma) = cot(delta / 4)`` with ``gamma = g / rho`` and ``rho = 2``.
Energies are ``E = Re(delta^2) / 4``.

Real roots are gas states. For ``gamma < 0`` there is one more root on the
imaginary axis, ``delta = i*dt``; substituting turns the Bethe equation into

    i dt / (2 gamma) = cot(i dt / 4) = -i coth(dt / 4)
    =>  dt * tanh(dt / 4) = -2 gamma,

a monotone real equation with a single positive root (the bound pair).

Time is measured in units of ``4 / rho^2``, which equals 1 on the ring, so
energies double as angular frequencies.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy import integrate

from . import _kernels
from .observables import CorrelationRow

__all__ = [
    "BetheRoot",
    "TwoParticleState",
    "SpectrumPoint",
    "QuenchExpansion",
    "CompletenessError",
    "bethe_residual",
    "solve_bound_root",
    "solve_gas_roots",
    "gas_deltas",
    "normalization",
    "wavefunction",
    "contact_amplitude",
    "g2_of_state",
    "two_particle_state",
    "tg_overlap",
    "overlap_tg_bound",
    "inner_product",
    "quench_expansion",
    "g2_exact_quench",
    "g2_single_mode",
    "g2_two_state",
    "spectrum",
    "hs_reference",
]

RING_DENSITY = 2.0
TG_ENERGY = math.pi**2


class CompletenessError(ValueError):
    """The truncated eigenbasis does not resolve the initial state."""

    def __init__(self, achieved: float, required: float):
        super().__init__(f"eigenbasis completeness {achieved:.12f} below required {required:.12f}")
        self.achieved = achieved
        self.required = required


@dataclass(frozen=True)
class BetheRoot:
    delta: complex
    branch: int
    energy: float
    gamma: float
    free: bool = False

    @property
    def is_bound(self) -> bool:
        return self.branch == -1

    @property
    def delta_tilde(self) -> float:
        """Imaginary part of ``delta``; the bound-state decay constant."""
        return float(self.delta.imag)


@dataclass(frozen=True)
class TwoParticleState:
    root: BetheRoot
    norm_a: float
    contact_amp: complex


@dataclass(frozen=True)
class SpectrumPoint:
    inv_gamma: float
    energies: np.ndarray
    bound_energy: float = math.nan


# --- root finding -------------------------------------------------------------


def _safeguarded_newton(f, df, lo, hi, *, xtol=4e-16, maxiter=200):
    """Vectorized Newton iteration that falls back to bisection.

    ``f(lo)`` and ``f(hi)`` must have opposite signs elementwise. Newton steps
    leaving the current bracket are replaced by the midpoint.
    """
    lo = np.array(lo, dtype=float, copy=True)
    hi = np.array(hi, dtype=float, copy=True)
    flo = f(lo)
    fhi = f(hi)
    if np.any(np.sign(flo) * np.sign(fhi) > 0):
        raise ValueError("root not bracketed")
    # orient so that f(lo) <= 0 <= f(hi)
    swap = flo > 0
    lo[swap], hi[swap] = hi[swap], lo[swap]
    x = 0.5 * (lo + hi)
    for _ in range(maxiter):
        fx = f(x)
        neg = fx < 0
        lo = np.where(neg, x, lo)
        hi = np.where(neg, hi, x)
        dfx = df(x)
        with np.errstate(divide="ignore", invalid="ignore"):
            xn = x - fx / dfx
        inside = np.isfinite(xn) & ((xn - lo) * (xn - hi) < 0)
        xn = np.where(inside, xn, 0.5 * (lo + hi))
        step = np.abs(xn - x)
        x = xn
        if np.all(step <= xtol * np.maximum(1.0, np.abs(x))):
            break
    return x


def bethe_residual(root: BetheRoot) -> float:
    """``|delta/(2 gamma) - cot(delta/4)|``, continued to imaginary ``delta``."""
    if root.free or math.isinf(root.gamma):
        return 0.0
    if root.is_bound:
        dt = root.delta_tilde
        # i * (dt/(2 gamma) + coth(dt/4))
        return abs(dt / (2.0 * root.gamma) + 1.0 / math.tanh(dt / 4.0))
    d = root.delta.real
    return abs(d / (2.0 * root.gamma) - 1.0 / math.tan(d / 4.0))


def solve_bound_root(gamma: float) -> BetheRoot:
    """Bound pair for attractive coupling: ``dt tanh(dt/4) = -2 gamma``."""
    if not gamma < 0:
        raise ValueError(f"bound state requires gamma < 0, got {gamma}")
    if math.isinf(gamma):
        raise ValueError("bound state diverges at gamma = -inf")
    c = -0.5 * gamma  # v tanh v = c with v = dt / 4
    v = _safeguarded_newton(
        lambda v: v * np.tanh(v) - c,
        lambda v: np.tanh(v) + v / np.cosh(np.minimum(v, 350.0)) ** 2,
        np.array([0.0]),
        np.array([c + math.sqrt(c) + 1.0]),
    )[0]
    dt = 4.0 * v
    return BetheRoot(delta=complex(0.0, dt), branch=-1, energy=-dt * dt / 4.0, gamma=gamma)


def gas_deltas(gamma: float, n_branches: int) -> np.ndarray:
    """Real Bethe roots of the lowest ``n_branches`` gas states, ascending.

    Branch ``m`` sits between a zero and a pole of ``tan(delta/4)``: in
    ``(4 pi m, 2 pi (2m+1))`` for ``gamma > 0`` and in ``(2 pi (2m+1), 4 pi (m+1))``
    for ``gamma < 0``. ``|gamma| = inf`` gives the fermionized values
    ``2 pi (2m+1)``; ``gamma = 0`` the free values ``4 pi m``.
    """
    if n_branches < 1:
        raise ValueError("n_branches must be >= 1")
    m = np.arange(n_branches, dtype=float)
    if math.isinf(gamma):
        return 2.0 * np.pi * (2.0 * m + 1.0)
    if gamma == 0:
        return 4.0 * np.pi * m
    c = 0.5 * gamma  # u tan u = c with u = delta / 4
    if gamma > 0:
        lo, hi = m * np.pi, m * np.pi + 0.5 * np.pi
    else:
        lo, hi = m * np.pi + 0.5 * np.pi, (m + 1.0) * np.pi
    u = _safeguarded_newton(
        lambda u: u * np.sin(u) - c * np.cos(u),
        lambda u: (1.0 + c) * np.sin(u) + u * np.cos(u),
        lo,
        hi,
    )
    return 4.0 * u


def solve_gas_roots(gamma: float, n_branches: int) -> list[BetheRoot]:
    deltas = gas_deltas(gamma, n_branches)
    free = gamma == 0
    return [
        BetheRoot(delta=complex(d, 0.0), branch=m, energy=d * d / 4.0, gamma=gamma, free=free)
        for m, d in enumerate(deltas)
    ]


# --- wavefunctions ------------------------------------------------------------


def _gas_norm(delta):
    k = 0.5 * np.asarray(delta, dtype=float)
    return 1.0 / np.sqrt(2.0 + 2.0 * np.sinc(k / np.pi))


def _bound_log_norm(dt: float) -> float:
    # int_0^1 |phi|^2 = 4 A^2 e^{-dt/2} (1/2 + sinh(kappa)/(2 kappa)) = 1, kappa = dt/2
    kappa = 0.5 * dt
    log_x = kappa + math.log(-math.expm1(-2.0 * kappa)) - math.log(kappa) - math.log(2.0)
    return dt / 4.0 - 0.5 * np.logaddexp(math.log(2.0), log_x + math.log(2.0))


def normalization(root: BetheRoot) -> float:
    """Normalization ``A`` making ``int_0^1 |phi(y)|^2 dy = 1``.

    Gas: ``A = 1 / sqrt(2 + 2 sin(k)/k)`` with ``k = delta/2``.
    Bound: ``A = exp(dt/4) / sqrt(2 + 2 sinh(kappa)/kappa)`` with ``kappa = dt/2``,
    evaluated in log space; it tends to ``sqrt(dt/2)``.
    """
    if root.is_bound:
        return float(math.exp(_bound_log_norm(root.delta_tilde)))
    return float(_gas_norm(root.delta.real))


def wavefunction(root: BetheRoot, y, norm_a: float | None = None) -> np.ndarray:
    y = np.asarray(y, dtype=float)
    a = normalization(root) if norm_a is None else norm_a
    if root.is_bound:
        kappa = 0.5 * root.delta_tilde
        # 2 A e^{-dt/4} cosh(kappa (y - 1/2)) without overflow
        return (a * (np.exp(kappa * (y - 1.0)) + np.exp(-kappa * y))).astype(complex)
    d = root.delta.real
    return 2.0 * a * np.exp(0.25j * d) * np.cos(0.5 * d * (y - 0.5))


def contact_amplitude(root: BetheRoot, norm_a: float | None = None) -> complex:
    """``phi(0) = 2 A exp(i delta/4) cos(delta/4)``."""
    a = normalization(root) if norm_a is None else norm_a
    if root.is_bound:
        return complex(a * (1.0 + math.exp(-0.5 * root.delta_tilde)))
    d = root.delta.real
    return complex(2.0 * a * np.exp(0.25j * d) * math.cos(0.25 * d))


def g2_of_state(contact_amp: complex) -> float:
    """Local pair correlation on the ring: ``2 |phi(0)|^2 / rho^2`` with ``rho = 2``."""
    return 2.0 * abs(contact_amp) ** 2 / RING_DENSITY**2


def two_particle_state(root: BetheRoot) -> TwoParticleState:
    a = normalization(root)
    return TwoParticleState(root=root, norm_a=a, contact_amp=contact_amplitude(root, a))


def _tg_wavefunction(y):
    return 1j * math.sqrt(2.0) * np.sin(np.pi * np.asarray(y, dtype=float))


def tg_overlap(root: BetheRoot) -> complex:
    """``<phi_root | phi_TG>`` with ``phi_TG(y) = i sqrt(2) sin(pi y)`` (the ``delta = 2 pi`` state)."""
    a = normalization(root)
    if root.is_bound:
        kappa = 0.5 * root.delta_tilde
        integral = 2.0 * math.pi * (1.0 + math.exp(-kappa)) / (kappa**2 + math.pi**2)
        return complex(1j * math.sqrt(2.0) * a * integral)
    d = root.delta.real
    k = 0.5 * d
    integral = 0.5 * (np.sinc((k - np.pi) / (2 * np.pi)) + np.sinc((k + np.pi) / (2 * np.pi)))
    return complex(np.conj(2.0 * a * np.exp(0.25j * d)) * 1j * math.sqrt(2.0) * integral)


def overlap_tg_bound(gamma: float) -> complex:
    """``eps = <phi_TG | phi_b>``.

    With ``A > 0`` the phase is ``-i``, i.e. ``eps -> -2 sqrt(2) pi gamma^(-3/2)``
    on the principal branch of the fractional power.
    """
    return complex(np.conj(tg_overlap(solve_bound_root(gamma))))


def inner_product(a: BetheRoot, b: BetheRoot | None = None) -> complex:
    """``<phi_a | phi_b>`` by adaptive quadrature; ``b=None`` means the TG state."""
    pa = lambda y: wavefunction(a, y)  # noqa: E731
    pb = _tg_wavefunction if b is None else (lambda y: wavefunction(b, y))
    re = integrate.quad(lambda y: (np.conj(pa(y)) * pb(y)).real, 0.0, 1.0, epsabs=1e-13, epsrel=1e-12, limit=400)[0]
    im = integrate.quad(lambda y: (np.conj(pa(y)) * pb(y)).imag, 0.0, 1.0, epsabs=1e-13, epsrel=1e-12, limit=400)[0]
    return complex(re, im)


# --- quench from the TG state -------------------------------------------------


@dataclass(frozen=True)
class QuenchExpansion:
    """Eigenbasis expansion of the TG state at coupling ``gamma``.

    Index 0 is the bound state when ``gamma < 0``; gas branches follow.
    """

    gamma: float
    coefficients: np.ndarray
    contacts: np.ndarray
    energies: np.ndarray

    @property
    def completeness(self) -> float:
        return float(np.sum(np.abs(self.coefficients) ** 2))

    def contact_at(self, times) -> np.ndarray:
        """``phi(0, t)``; the TG contact value is zero, so the series is
        ``sum_n c_n phi_n(0) (exp(-i E_n t) - 1)``, exact at ``t = 0``."""
        return _kernels.quench_series(self.coefficients * self.contacts, self.energies, times)


def quench_expansion(gamma: float, n_branches: int = 1000) -> QuenchExpansion:
    deltas = gas_deltas(gamma, n_branches)
    a = _gas_norm(deltas)
    pref = 2.0 * a * np.exp(0.25j * deltas)
    k = 0.5 * deltas
    integral = 0.5 * (np.sinc((k - np.pi) / (2 * np.pi)) + np.sinc((k + np.pi) / (2 * np.pi)))
    coeffs = np.conj(pref) * 1j * math.sqrt(2.0) * integral
    contacts = pref * np.cos(0.25 * deltas)
    energies = deltas**2 / 4.0
    if gamma < 0:
        b = two_particle_state(solve_bound_root(gamma))
        coeffs = np.concatenate([[tg_overlap(b.root)], coeffs])
        contacts = np.concatenate([[b.contact_amp], contacts])
        energies = np.concatenate([[b.root.energy], energies])
    return QuenchExpansion(gamma=gamma, coefficients=coeffs, contacts=contacts, energies=energies)


def g2_exact_quench(gamma: float, times, n_branches: int = 1000, tol: float = 1e-8) -> np.ndarray:
    """Local ``g2(t)`` after quenching the TG state to ``gamma``."""
    exp = quench_expansion(gamma, n_branches)
    if exp.completeness < 1.0 - tol:
        raise CompletenessError(exp.completeness, 1.0 - tol)
    return 0.5 * np.abs(exp.contact_at(times)) ** 2


def g2_single_mode(gamma: float, t):
    """Bound-state interference with a frozen gas part: ``8 pi^2/gamma^2 (1 - cos(gamma^2 t))``."""
    t = np.asarray(t, dtype=float)
    return 8.0 * math.pi**2 / gamma**2 * (1.0 - np.cos(gamma**2 * t))


def g2_two_state(gamma: float, t):
    """Beating between bound pair and sTG state: ``(5 - 4 cos((gamma^2 + pi^2) t)) pi^2/gamma^2``."""
    t = np.asarray(t, dtype=float)
    return (5.0 - 4.0 * np.cos((gamma**2 + TG_ENERGY) * t)) * math.pi**2 / gamma**2


# --- spectrum -----------------------------------------------------------------


def spectrum(gammas: Sequence[float], n_branches: int = 4) -> list[SpectrumPoint]:
    """Lowest gas energies (and the bound energy for ``gamma < 0``) per coupling."""
    out = []
    for gamma in gammas:
        d = gas_deltas(gamma, n_branches)
        bound = solve_bound_root(gamma).energy if (gamma < 0 and math.isfinite(gamma)) else math.nan
        inv = 0.0 if math.isinf(gamma) else (math.copysign(math.inf, gamma) if gamma == 0 else 1.0 / gamma)
        out.append(SpectrumPoint(inv_gamma=inv, energies=d**2 / 4.0, bound_energy=bound))
    return out


# --- hard-sphere reference ----------------------------------------------------


def hs_reference(row: CorrelationRow, a_1d: float, rho: float, scale: str = "values") -> CorrelationRow:
    """TG correlation on the volume left after excluding hard spheres of size ``a_1d``.

    Separations from the anchor grow by ``a_1d``. With ``scale="values"`` the
    g2 values are multiplied by ``1 - a_1d * rho``; with ``scale="separations"``
    the separations are compressed by that factor before the shift, which is the
    excluded-volume map of hard rods and keeps ``g2 -> 1`` at large distance.
    Only separations up to ``1/rho`` are meaningful; entries beyond are marked
    invalid. Positions in the result stay absolute.
    """
    if scale not in ("values", "separations"):
        raise ValueError(f"unknown scale {scale!r}")
    if a_1d < 0:
        raise ValueError("a_1d must be non-negative")
    if a_1d * rho >= 1:
        raise ValueError(f"a_1d * rho = {a_1d * rho:.3f} >= 1 leaves no free volume")
    free = 1.0 - a_1d * rho
    sep = row.xs - row.anchor_x
    if scale == "separations":
        sep = sep * free
    sep = np.where(sep >= 0, sep + a_1d, sep - a_1d)
    g2 = row.g2 * free if scale == "values" else row.g2.copy()
    valid = row.valid & (np.abs(sep) <= 1.0 / rho)
    return CorrelationRow(anchor_x=row.anchor_x, xs=row.anchor_x + sep, g2=g2, time=row.time, valid=valid)
