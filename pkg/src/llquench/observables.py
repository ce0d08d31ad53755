"""Continuum-normalized correlation functions measured on a lattice MPS.

Densities are ``rho_i = <n_i> / dx``. In the correlation ratios the ``dx``
factors cancel, so lattice ratios are already the continuum ``g2``/``g3``.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import curve_fit

from .model import LatticeParams
from .mps import SymmetricMPS, number_op, site_distributions, two_point_row

__all__ = [
    "DENSITY_GUARD",
    "CorrelationRow",
    "LocalSeries",
    "density_profile",
    "occupations",
    "center_site",
    "g2_row",
    "g2_local",
    "g3_local",
    "local_correlations",
    "sum_rule",
    "fit_power_law",
    "fit_oscillation",
    "measure",
]

DENSITY_GUARD = 1e-12


@dataclass
class CorrelationRow:
    """``g2(x_a, x_j)`` for a fixed anchor ``x_a``; ``valid`` masks guarded entries."""

    anchor_x: float
    xs: np.ndarray
    g2: np.ndarray
    time: float = 0.0
    valid: np.ndarray | None = None

    def __post_init__(self):
        self.xs = np.asarray(self.xs, dtype=float)
        self.g2 = np.asarray(self.g2, dtype=float)
        if self.xs.shape != self.g2.shape:
            raise ValueError("xs and g2 must have the same shape")
        if self.valid is None:
            self.valid = np.isfinite(self.g2)
        self.valid = np.asarray(self.valid, dtype=bool)

    def masked(self) -> np.ndarray:
        """``g2`` with invalid entries set to NaN."""
        return np.where(self.valid, self.g2, np.nan)

    @property
    def separations(self) -> np.ndarray:
        return self.xs - self.anchor_x

    def resample(self, xs) -> "CorrelationRow":
        """Linear interpolation onto ``xs``; points outside the valid span are invalid.

        Positive and negative separations are interpolated separately so a
        gap around the anchor is not bridged.
        """
        xs = np.asarray(xs, dtype=float)
        out = np.full(xs.shape, np.nan)
        sep = xs - self.anchor_x
        own = self.separations
        for side in (own >= 0, own < 0):
            m = self.valid & side
            if m.sum() < 2:
                continue
            lo, hi = own[m].min(), own[m].max()
            pick = (sep >= lo) & (sep <= hi)
            order = np.argsort(own[m])
            out[pick] = np.interp(sep[pick], own[m][order], self.g2[m][order])
        return CorrelationRow(anchor_x=self.anchor_x, xs=xs, g2=out, time=self.time, valid=np.isfinite(out))


@dataclass
class LocalSeries:
    times: np.ndarray = field(default_factory=lambda: np.zeros(0))
    g2_local: np.ndarray = field(default_factory=lambda: np.zeros(0))
    g3_local: np.ndarray = field(default_factory=lambda: np.zeros(0))
    density_center: np.ndarray = field(default_factory=lambda: np.zeros(0))

    def __post_init__(self):
        self.times = np.asarray(self.times, dtype=float)
        self.g2_local = np.asarray(self.g2_local, dtype=float)
        self.g3_local = np.asarray(self.g3_local, dtype=float)
        self.density_center = np.asarray(self.density_center, dtype=float)
        n = len(self.times)
        if not (len(self.g2_local) == len(self.g3_local) == len(self.density_center) == n):
            raise ValueError("LocalSeries arrays must have equal length")


def occupations(state: SymmetricMPS) -> np.ndarray:
    p = site_distributions(state)
    return p @ np.arange(state.d)


def density_profile(state: SymmetricMPS, lp: LatticeParams) -> np.ndarray:
    """``rho_i = <n_i> / dx``."""
    return occupations(state) / lp.dx


def center_site(density: np.ndarray) -> int:
    """Index of the density maximum; ties go to the smaller index."""
    return int(np.argmax(np.asarray(density)))


def _falling_moment(p: np.ndarray, k: int) -> np.ndarray:
    n = np.arange(p.shape[-1], dtype=float)
    f = np.ones_like(n)
    for j in range(k):
        f = f * (n - j)
    return p @ f


def g2_row(state: SymmetricMPS, lp: LatticeParams, anchor_site: int | None = None, time: float = 0.0) -> CorrelationRow:
    """Normal-ordered ``<n_a n_j> / (<n_a><n_j>)`` for all ``j``, anchor at the cloud center by default."""
    if anchor_site is not None and not 0 <= anchor_site < state.n_sites:
        raise IndexError(f"anchor {anchor_site} outside lattice")
    return measure(state, lp, anchor_site, time)[0]


def _local(state: SymmetricMPS, site: int, k: int) -> float:
    if not 0 <= site < state.n_sites:
        raise IndexError(f"site {site} outside lattice")
    state.move_center(site)
    c = state.tensors[site]
    p = np.einsum("anc,anc->n", c.conj(), c).real
    mean = float(p @ np.arange(state.d))
    if mean <= DENSITY_GUARD:
        return float("nan")
    return float(_falling_moment(p, k)) / mean**k


def g2_local(state: SymmetricMPS, lp: LatticeParams, site: int) -> float:
    """``<n(n-1)> / <n>^2``; NaN below the density guard."""
    return _local(state, site, 2)


def g3_local(state: SymmetricMPS, lp: LatticeParams, site: int) -> float:
    """``<n(n-1)(n-2)> / <n>^3``; needs at least three bosons per site."""
    if state.n_max < 3:
        raise ValueError(f"n_max={state.n_max} cannot resolve three-body coincidences (need >= 3)")
    return _local(state, site, 3)


def local_correlations(state: SymmetricMPS, lp: LatticeParams, site: int | None = None) -> dict:
    """Density, g2 and g3 at ``site`` (default: density maximum) from one sweep."""
    p = site_distributions(state)
    occ = p @ np.arange(state.d)
    s = center_site(occ) if site is None else site
    mean = occ[s]
    ok = mean > DENSITY_GUARD
    g3 = _falling_moment(p[s], 3) / mean**3 if ok and state.n_max >= 3 else float("nan")
    return {
        "site": s,
        "density": mean / lp.dx,
        "g2_local": _falling_moment(p[s], 2) / mean**2 if ok else float("nan"),
        "g3_local": g3,
        "occupations": occ,
    }


def sum_rule(row: CorrelationRow, density) -> float:
    """``int dx rho(x) g2(x_a, x)`` over the valid entries.

    With local-density normalization this equals ``sum_j <n_a n_j> / <n_a>``
    (normal ordered at the anchor), i.e. ``N - 1`` for any state of fixed ``N``.
    """
    density = np.asarray(density, dtype=float)
    if density.shape != row.xs.shape:
        raise ValueError("row and density must be on the same grid")
    dx = float(row.xs[1] - row.xs[0]) if row.xs.size > 1 else 1.0
    m = row.valid
    return float(np.sum(density[m] * row.g2[m]) * dx)


def fit_power_law(series: LocalSeries, window: tuple[float, float]) -> float:
    """Least-squares slope of ``log g2`` against ``log t`` for ``t`` in ``window``."""
    lo, hi = window
    t = series.times
    sel = (t >= lo) & (t <= hi)
    if sel.sum() < 2:
        raise ValueError(f"fewer than two samples in window {window}")
    y = series.g2_local[sel]
    if np.any(~(y > 0)) or np.any(t[sel] <= 0):
        raise ValueError("power-law fit needs positive times and values")
    slope, _ = np.polyfit(np.log(t[sel]), np.log(y), 1)
    return float(slope)


def _cosine(t, a, b, w, phi):
    return a + b * np.cos(w * t + phi)


def fit_oscillation(times, values, omega_guess: float) -> tuple[float, np.ndarray]:
    """Fit ``A + B cos(w t + phi)`` and return ``(w, [A, B, w, phi])``.

    The starting frequency is refined from the periodogram peak near
    ``omega_guess`` before the nonlinear fit.
    """
    t = np.asarray(times, dtype=float)
    y = np.asarray(values, dtype=float)
    if t.size < 5:
        raise ValueError("need at least five samples")
    ws = np.linspace(0.5 * omega_guess, 1.5 * omega_guess, 2001)
    yc = y - y.mean()
    power = np.abs(np.exp(-1j * np.outer(ws, t)) @ yc)
    w0 = ws[int(np.argmax(power))]
    c, s = np.cos(w0 * t), np.sin(w0 * t)
    coef, *_ = np.linalg.lstsq(np.column_stack([np.ones_like(t), c, s]), y, rcond=None)
    b0 = float(np.hypot(coef[1], coef[2]))
    phi0 = float(np.arctan2(-coef[2], coef[1]))
    popt, _ = curve_fit(_cosine, t, y, p0=[coef[0], b0, w0, phi0], maxfev=20000)
    if popt[1] < 0:
        popt[1] = -popt[1]
        popt[3] += np.pi
    return float(abs(popt[2])), popt


def measure(state: SymmetricMPS, lp: LatticeParams, anchor_site: int | None = None, time: float = 0.0):
    """Row, density profile and local correlators from a single pass.

    Returns ``(row, density, values)`` where ``values`` holds ``g2_local``,
    ``g3_local`` (NaN if ``n_max < 3``), ``sum_rule`` and ``density_center``
    at the anchor.
    """
    p = site_distributions(state)
    occ = p @ np.arange(state.d)
    a = center_site(occ) if anchor_site is None else int(anchor_site)
    nop = number_op(state.d)
    corr = two_point_row(state, a, nop, nop).real
    corr[a] = _falling_moment(p[a], 2)
    valid = occ > DENSITY_GUARD
    if not valid[a]:
        valid[:] = False
    with np.errstate(divide="ignore", invalid="ignore"):
        g2 = np.where(valid, corr / (occ[a] * occ), np.nan)
    row = CorrelationRow(anchor_x=float(lp.positions[a]), xs=lp.positions, g2=g2, time=time, valid=valid)
    density = occ / lp.dx
    ok = bool(valid[a])
    values = {
        "g2_local": float(g2[a]) if ok else float("nan"),
        "g3_local": float(_falling_moment(p[a], 3) / occ[a] ** 3) if ok and state.n_max >= 3 else float("nan"),
        "sum_rule": sum_rule(row, density),
        "density_center": float(density[a]),
    }
    return row, density, values
