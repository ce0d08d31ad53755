"""Exact diagonalization of the number-conserving Bose-Hubbard chain.

Small instances only; used as ground truth for the MPS code. The Fock basis
is enumerated in lexicographic order (site 0 most significant) and indexed by
its combinatorial rank, so no lookup table is needed.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg as sla
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from . import _kernels
from .model import LatticeParams

__all__ = [
    "MEMORY_BUDGET",
    "DENSE_LIMIT",
    "BudgetExceeded",
    "FockBasis",
    "DenseState",
    "build_hamiltonian",
    "ground_state",
    "evolve",
    "Evolver",
    "expectation",
]

MEMORY_BUDGET = 200_000
DENSE_LIMIT = 3000


class BudgetExceeded(MemoryError):
    pass


def _enumerate(n_sites: int, n_particles: int, n_max: int) -> np.ndarray:
    out = []
    occ = [0] * n_sites

    def rec(i, rem):
        if i == n_sites - 1:
            if rem <= n_max:
                occ[i] = rem
                out.append(tuple(occ))
            return
        for v in range(min(rem, n_max) + 1):
            occ[i] = v
            rec(i + 1, rem - v)

    if n_sites == 0:
        return np.zeros((1 if n_particles == 0 else 0, 0), dtype=np.int64)
    rec(0, n_particles)
    return np.array(out, dtype=np.int64).reshape(-1, n_sites)


@dataclass(eq=False)
class FockBasis:
    n_sites: int
    n_particles: int
    n_max: int
    budget: int = MEMORY_BUDGET

    def __post_init__(self):
        if self.n_sites < 1 or self.n_particles < 0 or self.n_max < 1:
            raise ValueError("invalid basis parameters")
        if self.n_particles > self.n_sites * self.n_max:
            raise ValueError("too many particles for the local cutoff")
        self.counts = _kernels.composition_counts(self.n_sites, self.n_particles, self.n_max)
        dim = int(self.counts[0, self.n_particles])
        if dim > self.budget:
            raise BudgetExceeded(f"basis dimension {dim} exceeds budget {self.budget}")
        self.states = _enumerate(self.n_sites, self.n_particles, self.n_max)
        self.states.setflags(write=False)

    @property
    def dim(self) -> int:
        return self.states.shape[0]

    def index(self, occupations) -> np.ndarray:
        occ = np.atleast_2d(np.asarray(occupations, dtype=np.int64))
        if occ.shape[1] != self.n_sites:
            raise ValueError("wrong number of sites")
        if np.any(occ.sum(axis=1) != self.n_particles) or np.any(occ < 0) or np.any(occ > self.n_max):
            raise KeyError("occupation vector not in basis")
        return _kernels.rank_states(occ, self.counts, self.n_particles)


@dataclass(eq=False)
class DenseState:
    basis: FockBasis
    amplitudes: np.ndarray

    def __post_init__(self):
        self.amplitudes = np.asarray(self.amplitudes, dtype=complex)
        if self.amplitudes.shape != (self.basis.dim,):
            raise ValueError("amplitude vector does not match basis")

    @property
    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))

    @classmethod
    def fock(cls, basis: FockBasis, occupations) -> "DenseState":
        amps = np.zeros(basis.dim, dtype=complex)
        amps[basis.index(occupations)[0]] = 1.0
        return cls(basis, amps)


def build_hamiltonian(lp: LatticeParams, basis: FockBasis) -> sp.csr_matrix:
    """Sparse Bose-Hubbard Hamiltonian on ``basis``, matching the TEBD bond sum."""
    if basis.n_sites != lp.n_sites or basis.n_max != lp.n_max:
        raise ValueError("basis does not match lattice")
    n = basis.states.astype(float)
    diag = (0.5 * lp.onsite_u * n * (n - 1.0) + n * lp.potential[None, :]).sum(axis=1)
    rows, cols, vals = _kernels.hopping_elements(basis.states, basis.counts, basis.n_particles, basis.n_max, lp.hopping)
    idx = np.arange(basis.dim)
    h = sp.coo_matrix(
        (np.concatenate([diag, vals]), (np.concatenate([idx, rows]), np.concatenate([idx, cols]))),
        shape=(basis.dim, basis.dim),
    )
    return h.tocsr()


def ground_state(h: sp.spmatrix, basis: FockBasis | None = None) -> tuple[float, np.ndarray | DenseState]:
    """Lowest eigenpair; dense ``eigh`` for small matrices, Lanczos otherwise."""
    dim = h.shape[0]
    if dim <= DENSE_LIMIT:
        w, v = sla.eigh(h.toarray(), subset_by_index=[0, 0])
        e, vec = float(w[0]), v[:, 0]
    else:
        w, v = spla.eigsh(h, k=1, which="SA", tol=1e-13, maxiter=20 * dim)
        e, vec = float(w[0]), v[:, 0]
    k = int(np.argmax(np.abs(vec)))
    vec = vec * (np.abs(vec[k]) / vec[k])
    vec = vec.astype(complex) / np.linalg.norm(vec)
    return e, (DenseState(basis, vec) if basis is not None else vec)


class Evolver:
    """``exp(-i H t)`` by full eigendecomposition (small) or Krylov ``expm_multiply``."""

    def __init__(self, h: sp.spmatrix, method: str = "auto"):
        if method == "auto":
            method = "eigh" if h.shape[0] <= DENSE_LIMIT else "krylov"
        if method not in ("eigh", "krylov"):
            raise ValueError(f"unknown method {method!r}")
        self.method = method
        self.h = h.tocsc()
        if method == "eigh":
            self.w, self.v = np.linalg.eigh(h.toarray())

    def __call__(self, psi: np.ndarray, t: float) -> np.ndarray:
        psi = np.asarray(psi, dtype=complex)
        if self.method == "eigh":
            return self.v @ (np.exp(-1j * self.w * t) * (self.v.conj().T @ psi))
        return spla.expm_multiply(-1j * t * self.h, psi)


def evolve(h: sp.spmatrix, state, t: float, method: str = "auto"):
    """Returns ``(exp(-iHt) psi, method)``; accepts a ``DenseState`` or a vector."""
    ev = Evolver(h, method)
    if isinstance(state, DenseState):
        return DenseState(state.basis, ev(state.amplitudes, t)), ev.method
    return ev(state, t), ev.method


def _falling(n: np.ndarray, k: int) -> np.ndarray:
    out = np.ones_like(n, dtype=float)
    for j in range(k):
        out = out * (n - j)
    return out


def expectation(state: DenseState, spec):
    """Expectation values mirroring the lattice observables.

    ``spec`` is one of ``("n", i)``, ``("nn", i, j)`` (``i != j``),
    ``("g2_local", i)``, ``("g3_local", i)``, ``("g2_row", anchor)``,
    ``("n_total",)``, ``("density",)`` (occupations per site).
    """
    p = np.abs(state.amplitudes) ** 2
    occ = state.basis.states.astype(float)
    kind = spec[0]
    if kind == "n":
        return float(p @ occ[:, spec[1]])
    if kind == "n_total":
        return float(p @ occ.sum(axis=1))
    if kind == "density":
        return p @ occ
    if kind == "nn":
        i, j = spec[1], spec[2]
        if i == j:
            raise ValueError("use g2_local for coincident sites")
        return float(p @ (occ[:, i] * occ[:, j]))
    if kind in ("g2_local", "g3_local"):
        k = 2 if kind == "g2_local" else 3
        i = spec[1]
        mean = p @ occ[:, i]
        return float(p @ _falling(occ[:, i], k)) / mean**k if mean > 1e-12 else float("nan")
    if kind == "g2_row":
        a = spec[1]
        mean = p @ occ
        corr = p @ (occ[:, [a]] * occ)
        corr[a] = p @ _falling(occ[:, a], 2)
        with np.errstate(divide="ignore", invalid="ignore"):
            return np.where(mean > 1e-12, corr / (mean[a] * mean), np.nan)
    raise ValueError(f"unknown operator spec {spec!r}")
