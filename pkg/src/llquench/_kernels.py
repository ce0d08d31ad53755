"""Hot loops with a numba path and a pure-numpy fallback.

Set ``LLQ_DISABLE_NUMBA=1`` (or numba's own ``NUMBA_DISABLE_JIT=1``) to route
every dispatcher below through the numpy implementations. Both variants are
importable under ``*_numba`` / ``*_numpy`` names so tests and the benchmark
can compare them directly.
"""

from __future__ import annotations

import os

import numpy as np

_DISABLED = os.getenv("LLQ_DISABLE_NUMBA", "0") not in ("", "0", "false", "False")

try:
    import numba as nb
except ImportError:  # pragma: no cover - numba is a hard dependency in practice
    nb = None

HAVE_NUMBA = nb is not None
USE_NUMBA = HAVE_NUMBA and not _DISABLED

NUMBA_OPTS = {"cache": True, "nogil": True}


def _njit(fn):
    if not HAVE_NUMBA:
        return fn
    return nb.njit(**NUMBA_OPTS)(fn)


# --- Fock-space ranking ------------------------------------------------------


def composition_counts(n_sites: int, n_particles: int, n_max: int) -> np.ndarray:
    """``counts[i, r]`` = number of ways to put ``r`` bosons on sites ``i..M-1``."""
    counts = np.zeros((n_sites + 1, n_particles + 1), dtype=np.int64)
    counts[n_sites, 0] = 1
    for i in range(n_sites - 1, -1, -1):
        for r in range(n_particles + 1):
            top = min(r, n_max)
            counts[i, r] = counts[i + 1, r - top : r + 1].sum()
    return counts


def _rank_loop(states, counts, n_particles):
    n_states, n_sites = states.shape
    out = np.empty(n_states, dtype=np.int64)
    for s in range(n_states):
        rem = n_particles
        idx = 0
        for i in range(n_sites):
            occ = states[s, i]
            for v in range(occ):
                if rem - v >= 0:
                    idx += counts[i + 1, rem - v]
            rem -= occ
        out[s] = idx
    return out


rank_states_numba = _njit(_rank_loop)


def rank_states_numpy(states, counts, n_particles):
    states = np.asarray(states, dtype=np.int64)
    n_sites = states.shape[1]
    rem = n_particles - np.concatenate(
        [np.zeros((states.shape[0], 1), dtype=np.int64), np.cumsum(states, axis=1)[:, :-1]], axis=1
    )
    n_max = int(states.max(initial=0))
    idx = np.zeros(states.shape[0], dtype=np.int64)
    for v in range(n_max):
        take = states > v
        r = rem - v
        ok = take & (r >= 0)
        cols = np.where(ok, r, 0)
        vals = counts[np.arange(1, n_sites + 1)[None, :], cols]
        idx += np.where(ok, vals, 0).sum(axis=1)
    return idx


def rank_states(states, counts, n_particles):
    if USE_NUMBA:
        return rank_states_numba(np.ascontiguousarray(states, dtype=np.int64), counts, n_particles)
    return rank_states_numpy(states, counts, n_particles)


# --- Bose-Hubbard hopping matrix elements -----------------------------------


def _hop_loop(states, counts, n_particles, n_max, hopping):
    n_states, n_sites = states.shape
    cap = 2 * n_states * max(n_sites - 1, 1)
    rows = np.empty(cap, dtype=np.int64)
    cols = np.empty(cap, dtype=np.int64)
    vals = np.empty(cap, dtype=np.float64)
    k = 0
    work = np.empty(n_sites, dtype=np.int64)
    for s in range(n_states):
        for i in range(n_sites - 1):
            a = states[s, i]
            b = states[s, i + 1]
            # b_i^+ b_{i+1} and b_{i+1}^+ b_i
            for direction in range(2):
                if direction == 0:
                    src, dst = i + 1, i
                    n_src, n_dst = b, a
                else:
                    src, dst = i, i + 1
                    n_src, n_dst = a, b
                if n_src == 0 or n_dst == n_max:
                    continue
                for j in range(n_sites):
                    work[j] = states[s, j]
                work[src] -= 1
                work[dst] += 1
                rem = n_particles
                idx = 0
                for j in range(n_sites):
                    occ = work[j]
                    for v in range(occ):
                        if rem - v >= 0:
                            idx += counts[j + 1, rem - v]
                    rem -= occ
                rows[k] = idx
                cols[k] = s
                vals[k] = -hopping * np.sqrt(n_src * (n_dst + 1.0))
                k += 1
    return rows[:k], cols[:k], vals[:k]


hopping_elements_numba = _njit(_hop_loop)


def hopping_elements_numpy(states, counts, n_particles, n_max, hopping):
    states = np.asarray(states, dtype=np.int64)
    n_states, n_sites = states.shape
    rows, cols, vals = [], [], []
    for i in range(n_sites - 1):
        for src, dst in ((i + 1, i), (i, i + 1)):
            mask = (states[:, src] > 0) & (states[:, dst] < n_max)
            if not mask.any():
                continue
            moved = states[mask].copy()
            amp = -hopping * np.sqrt(moved[:, src] * (moved[:, dst] + 1.0))
            moved[:, src] -= 1
            moved[:, dst] += 1
            rows.append(rank_states_numpy(moved, counts, n_particles))
            cols.append(np.nonzero(mask)[0])
            vals.append(amp)
    if not rows:
        empty = np.zeros(0, dtype=np.int64)
        return empty, empty, np.zeros(0)
    return np.concatenate(rows), np.concatenate(cols), np.concatenate(vals)


def hopping_elements(states, counts, n_particles, n_max, hopping):
    if USE_NUMBA:
        return hopping_elements_numba(
            np.ascontiguousarray(states, dtype=np.int64), counts, n_particles, n_max, float(hopping)
        )
    return hopping_elements_numpy(states, counts, n_particles, n_max, hopping)


# --- two-particle quench series ---------------------------------------------


def _series_loop(amps, energies, times):
    out = np.zeros(times.shape[0], dtype=np.complex128)
    for it in range(times.shape[0]):
        t = times[it]
        acc = 0.0 + 0.0j
        for n in range(amps.shape[0]):
            ph = -energies[n] * t
            h = np.sin(0.5 * ph)
            acc += amps[n] * complex(-2.0 * h * h, np.sin(ph))
        out[it] = acc
    return out


quench_series_numba = _njit(_series_loop)


def quench_series_numpy(amps, energies, times, chunk: int = 256):
    times = np.asarray(times, dtype=float)
    out = np.empty(times.shape[0], dtype=np.complex128)
    for start in range(0, times.shape[0], chunk):
        t = times[start : start + chunk]
        out[start : start + chunk] = np.expm1(-1j * np.outer(t, energies)) @ amps
    return out


def quench_series(amps, energies, times):
    """``sum_n amps[n] * (exp(-i E_n t) - 1)`` for every ``t`` in ``times``."""
    amps = np.ascontiguousarray(amps, dtype=np.complex128)
    energies = np.ascontiguousarray(energies, dtype=np.float64)
    times = np.ascontiguousarray(np.atleast_1d(times), dtype=np.float64)
    if USE_NUMBA:
        return quench_series_numba(amps, energies, times)
    return quench_series_numpy(amps, energies, times)
