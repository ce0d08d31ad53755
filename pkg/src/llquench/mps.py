"""Particle-number conserving matrix product states.

Site tensors are stored densely with shape ``(chi_left, d, chi_right)`` and every
bond index carries an integer charge: the number of particles to its left. An
entry ``A[a, n, c]`` may only be nonzero if ``q_right[c] == q_left[a] + n``. All
factorizations (QR, LQ, SVD) are carried out sector by sector, so the selection
rule holds exactly, not just up to round-off, and the total particle number is
a structural property of the state.
"""

from __future__ import annotations

import logging
import struct
from dataclasses import dataclass, field
from functools import lru_cache
from pathlib import Path

import numpy as np
import scipy.linalg

__all__ = [
    "TruncationPolicy",
    "BondSpectrum",
    "SymmetricMPS",
    "ChargeError",
    "init_fock",
    "from_amplitudes",
    "apply_two_site",
    "entanglement_entropy",
    "bond_spectrum",
    "overlap",
    "expectation_onsite",
    "expectation_two_point",
    "two_point_row",
    "site_distributions",
    "to_amplitudes",
    "embed",
    "save",
    "load",
    "number_op",
    "creation_op",
    "annihilation_op",
]

log = logging.getLogger(__name__)

SNAPSHOT_MAGIC = b"LLQMPS\x00"
SNAPSHOT_VERSION = 1


class ChargeError(ValueError):
    """An operation would violate particle-number conservation."""


@dataclass(frozen=True)
class TruncationPolicy:
    chi_max: int = 100
    svd_cutoff: float = 1e-10
    degeneracy_tol: float = 1e-12

    def __post_init__(self):
        if self.chi_max < 1:
            raise ValueError("chi_max must be >= 1")
        if not 0 <= self.svd_cutoff < 1:
            raise ValueError("svd_cutoff must be in [0, 1)")


@dataclass(frozen=True)
class BondSpectrum:
    values: np.ndarray
    charges: np.ndarray

    @property
    def entropy(self) -> float:
        p = self.values**2
        p = p[p > 0]
        return float(-np.sum(p * np.log(p)))


def number_op(d: int) -> np.ndarray:
    return np.diag(np.arange(d, dtype=float))


def annihilation_op(d: int) -> np.ndarray:
    return np.diag(np.sqrt(np.arange(1, d, dtype=float)), 1)


def creation_op(d: int) -> np.ndarray:
    return annihilation_op(d).T.copy()


@dataclass(eq=False)
class SymmetricMPS:
    tensors: list
    charges: list
    n_max: int
    center: int | None = 0
    spectra: dict = field(default_factory=dict)
    last_norm: float = 1.0

    @property
    def n_sites(self) -> int:
        return len(self.tensors)

    @property
    def d(self) -> int:
        return self.n_max + 1

    @property
    def total_charge(self) -> int:
        return int(self.charges[-1][0])

    @property
    def bond_dims(self) -> list[int]:
        return [t.shape[2] for t in self.tensors[:-1]]

    def copy(self) -> "SymmetricMPS":
        return SymmetricMPS(
            tensors=[t.copy() for t in self.tensors],
            charges=[q.copy() for q in self.charges],
            n_max=self.n_max,
            center=self.center,
            spectra=dict(self.spectra),
            last_norm=self.last_norm,
        )

    # -- structure ------------------------------------------------------------

    def selection_mask(self, site: int) -> np.ndarray:
        ql = self.charges[site]
        qr = self.charges[site + 1]
        n = np.arange(self.d)
        return qr[None, None, :] == ql[:, None, None] + n[None, :, None]

    def check(self) -> None:
        """Raise ``ChargeError`` if any block violates the selection rule."""
        if self.charges[0].tolist() != [0]:
            raise ChargeError("left boundary charge must be 0")
        if len(self.charges[-1]) != 1:
            raise ChargeError("right boundary must be one-dimensional")
        for i, t in enumerate(self.tensors):
            if t.shape != (len(self.charges[i]), self.d, len(self.charges[i + 1])):
                raise ChargeError(f"site {i}: shape {t.shape} inconsistent with charge labels")
            bad = ~self.selection_mask(i)
            if np.any(t[bad] != 0):
                raise ChargeError(f"site {i}: nonzero entry outside the charge selection rule")

    def is_active(self, bond: int) -> bool:
        """False if both sites of ``bond`` are certainly empty in every component."""
        ql = self.charges[bond]
        qr = self.charges[bond + 2]
        return not (ql.min() == ql.max() == qr.min() == qr.max())

    # -- gauge ----------------------------------------------------------------

    def move_center(self, site: int) -> None:
        if not 0 <= site < self.n_sites:
            raise IndexError(f"site {site} out of range")
        if self.center is None:
            self.canonicalize(site)
            return
        while self.center < site:
            self._shift_right(self.center)
        while self.center > site:
            self._shift_left(self.center)

    def canonicalize(self, site: int = 0) -> None:
        """Bring an arbitrary-gauge state into mixed canonical form about ``site``."""
        self.center = self.n_sites - 1
        for i in range(self.n_sites - 1, 0, -1):
            self._shift_left(i)
        self.center = 0
        nrm = np.linalg.norm(self.tensors[0])
        self.tensors[0] /= nrm
        self.move_center(site)

    def normalize(self) -> float:
        """Rescale to unit norm (center tensor only); returns the old norm."""
        if self.center is None:
            self.canonicalize(0)
        nrm = float(np.linalg.norm(self.tensors[self.center]))
        if nrm == 0:
            raise ValueError("state has zero norm")
        self.tensors[self.center] /= nrm
        return nrm

    def _shift_right(self, i: int) -> None:
        t = self.tensors[i]
        chil, d, chir = t.shape
        m = t.reshape(chil * d, chir)
        rq = (self.charges[i][:, None] + np.arange(d)[None, :]).ravel()
        cq = self.charges[i + 1]
        q_mat, r_mat, labels = _sector_qr(m, rq, cq)
        self.tensors[i] = q_mat.reshape(chil, d, -1)
        nxt = self.tensors[i + 1]
        ncq = (self.charges[i + 2][None, :] - np.arange(d)[:, None]).ravel()
        self.tensors[i + 1] = _block_matmul(r_mat, nxt.reshape(chir, -1), labels, cq, ncq).reshape(
            r_mat.shape[0], d, -1
        )
        self.charges[i + 1] = labels
        self.center = i + 1

    def _shift_left(self, i: int) -> None:
        t = self.tensors[i]
        chil, d, chir = t.shape
        m = t.reshape(chil, d * chir)
        rq = self.charges[i]
        cq = (self.charges[i + 1][None, :] - np.arange(d)[:, None]).ravel()
        # LQ via QR of the conjugate transpose
        q_mat, r_mat, labels = _sector_qr(m.conj().T, cq, rq)
        self.tensors[i] = q_mat.conj().T.reshape(-1, d, chir)
        prv = self.tensors[i - 1]
        prq = (self.charges[i - 1][:, None] + np.arange(d)[None, :]).ravel()
        self.tensors[i - 1] = _block_matmul(prv.reshape(-1, chil), r_mat.conj().T, prq, rq, labels).reshape(
            prv.shape[0], d, -1
        )
        self.charges[i] = labels
        self.center = i - 1


# --- sector linear algebra ----------------------------------------------------


def _groups(q):
    perm = np.argsort(q, kind="stable")
    sq = q[perm]
    cuts = np.flatnonzero(sq[1:] != sq[:-1]) + 1
    starts = np.concatenate(([0], cuts))
    stops = np.concatenate((cuts, [sq.size]))
    return perm, sq[starts].tolist(), starts.tolist(), stops.tolist()


def _sector_indices(row_q, col_q):
    """Yield ``(q, rows, cols)`` for every charge present on both sides."""
    if row_q.size == 0 or col_q.size == 0:
        return
    rp, rv, ra, rb = _groups(row_q)
    cp, cv, ca, cb = _groups(col_q)
    cols = {q: (a, b) for q, a, b in zip(cv, ca, cb)}
    for q, a, b in zip(rv, ra, rb):
        hit = cols.get(q)
        if hit is not None:
            yield q, rp[a:b], cp[hit[0] : hit[1]]


def _block_matmul(x, y, x_row_q, mid_q, y_col_q):
    """``x @ y`` for charge-block-diagonal factors (entries vanish unless labels agree)."""
    out = np.zeros((x.shape[0], y.shape[1]), dtype=np.result_type(x, y))
    if x.shape[0] == 0 or y.shape[1] == 0:
        return out
    cp, cv, ca, cb = _groups(y_col_q)
    cols = {q: cp[a:b] for q, a, b in zip(cv, ca, cb)}
    for q, rows, mids in _sector_indices(x_row_q, mid_q):
        c = cols.get(q)
        if c is not None:
            out[np.ix_(rows, c)] = x[rows][:, mids] @ y[mids][:, c]
    return out


def _sector_qr(m, row_q, col_q):
    """Block QR: ``m = Q R`` with ``Q`` isometric and new labels on the inner index."""
    blocks = []
    k = 0
    for q, rows, cols in _sector_indices(row_q, col_q):
        qs, rs = np.linalg.qr(m[rows][:, cols])
        blocks.append((q, rows, cols, qs, rs))
        k += qs.shape[1]
    if k == 0:
        raise ValueError("state has no weight in any charge sector")
    q_mat = np.zeros((m.shape[0], k), dtype=complex)
    r_mat = np.zeros((k, m.shape[1]), dtype=complex)
    labels = np.empty(k, dtype=np.int64)
    off = 0
    for q, rows, cols, qs, rs in blocks:
        w = qs.shape[1]
        q_mat[rows, off : off + w] = qs
        r_mat[off : off + w, cols] = rs
        labels[off : off + w] = q
        off += w
    return q_mat, r_mat, labels


def _svd(a):
    try:
        return np.linalg.svd(a, full_matrices=False)
    except np.linalg.LinAlgError:
        log.warning("gesdd failed on a %s block, retrying with gesvd", a.shape)
        return scipy.linalg.svd(a, full_matrices=False, lapack_driver="gesvd")


def _sector_svd(m, row_q, col_q):
    blocks = []
    for q, rows, cols in _sector_indices(row_q, col_q):
        u, s, vh = _svd(m[rows][:, cols])
        blocks.append((q, rows, cols, u, s, vh))
    return blocks


def _select(values: np.ndarray, policy: TruncationPolicy) -> np.ndarray:
    """Indices of kept singular values (any order in, sorted-descending selection out)."""
    order = np.argsort(-values, kind="stable")
    s = values[order]
    if s.size == 0 or s[0] == 0:
        return order[:0]
    n_keep = min(policy.chi_max, s.size)
    # keep degenerate multiplets whole
    while n_keep < s.size and s[n_keep - 1] - s[n_keep] <= policy.degeneracy_tol * s[0]:
        n_keep += 1
    kept = s[:n_keep]
    n_keep = int(np.count_nonzero((kept > policy.svd_cutoff * s[0]) & (kept > 0)))
    return order[: max(n_keep, 1)]


def _truncated_split(m, row_q, col_q, policy: TruncationPolicy):
    """Sector SVD + joint truncation. Returns (U, S, Vh, labels, weight, norm, spectrum)."""
    blocks = _sector_svd(m, row_q, col_q)
    all_s = np.concatenate([b[4] for b in blocks]) if blocks else np.zeros(0)
    norm2 = float(np.sum(all_s**2))
    if norm2 == 0:
        raise ValueError("two-site wavefunction vanished")
    keep = np.sort(_select(all_s, policy))
    weight = float(1.0 - np.sum(all_s[keep] ** 2) / norm2)
    weight = max(weight, 0.0)
    k = keep.size
    u_full = np.zeros((m.shape[0], k), dtype=complex)
    vh_full = np.zeros((k, m.shape[1]), dtype=complex)
    s_kept = np.empty(k)
    labels = np.empty(k, dtype=np.int64)
    # keep is sorted, so blocks are visited in ascending charge order
    offset = 0
    col = 0
    for q, rows, cols, u, s, vh in blocks:
        sel = keep[(keep >= offset) & (keep < offset + s.size)] - offset
        w = sel.size
        if w:
            u_full[rows, col : col + w] = u[:, sel]
            vh_full[col : col + w, cols] = vh[sel, :]
            s_kept[col : col + w] = s[sel]
            labels[col : col + w] = q
            col += w
        offset += s.size
    norm = np.sqrt(norm2)
    s_kept /= np.sqrt(np.sum(s_kept**2))
    order = np.argsort(-s_kept, kind="stable")
    spectrum = BondSpectrum(values=s_kept[order], charges=labels[order])
    return u_full, s_kept, vh_full, labels, weight, norm, spectrum


# --- construction ---------------------------------------------------------------


def init_fock(occupations, n_max: int) -> SymmetricMPS:
    occ = np.asarray(occupations, dtype=np.int64)
    if occ.ndim != 1 or occ.size < 1:
        raise ValueError("occupations must be a non-empty 1D sequence")
    if np.any(occ < 0) or np.any(occ > n_max):
        raise ChargeError(f"occupations must lie in [0, {n_max}]")
    d = n_max + 1
    tensors = []
    charges = [np.array([0], dtype=np.int64)]
    for n in occ:
        t = np.zeros((1, d, 1), dtype=complex)
        t[0, n, 0] = 1.0
        tensors.append(t)
        charges.append(np.array([charges[-1][0] + n], dtype=np.int64))
    return SymmetricMPS(tensors=tensors, charges=charges, n_max=n_max, center=0)


def from_amplitudes(configs, amps, n_max: int, cutoff: float = 1e-14) -> SymmetricMPS:
    """Exact MPS of a state given by Fock configurations and amplitudes.

    Successive sector SVDs over the distinct suffixes of ``configs``; only
    singular values below ``cutoff`` times the largest are dropped.
    """
    configs = np.asarray(configs, dtype=np.int64)
    amps = np.asarray(amps, dtype=complex)
    totals = configs.sum(axis=1)
    if np.any(totals != totals[0]):
        raise ChargeError("configurations carry different particle numbers")
    if configs.max(initial=0) > n_max:
        raise ChargeError("occupation exceeds n_max")
    n_total = int(totals[0])
    n_sites = configs.shape[1]
    d = n_max + 1
    policy = TruncationPolicy(chi_max=10**9, svd_cutoff=cutoff)
    suffixes, inverse = np.unique(configs, axis=0, return_inverse=True)
    r = np.zeros((1, suffixes.shape[0]), dtype=complex)
    r[0, inverse.ravel()] = amps
    labels = np.array([0], dtype=np.int64)
    tensors, charges = [], [labels]
    for i in range(n_sites):
        first = suffixes[:, 0]
        if i == n_sites - 1:
            t = np.zeros((r.shape[0], d, 1), dtype=complex)
            t[:, first, 0] = r
            tensors.append(t)
            charges.append(np.array([n_total], dtype=np.int64))
            break
        rest, rinv = np.unique(suffixes[:, 1:], axis=0, return_inverse=True)
        rinv = rinv.ravel()
        mx = np.zeros((r.shape[0], d, rest.shape[0]), dtype=complex)
        mx[:, first, rinv] = r
        rq = (labels[:, None] + np.arange(d)[None, :]).ravel()
        cq = n_total - rest.sum(axis=1)
        u, s, vh, labels, _, _, _ = _truncated_split(mx.reshape(-1, rest.shape[0]), rq, cq, policy)
        tensors.append(u.reshape(r.shape[0], d, -1))
        charges.append(labels)
        r = s[:, None] * vh
        suffixes = rest
    state = SymmetricMPS(tensors=tensors, charges=charges, n_max=n_max, center=n_sites - 1)
    state.normalize()
    return state


# --- two-site update --------------------------------------------------------------


@lru_cache(maxsize=None)
def _conserving_mask(d: int) -> np.ndarray:
    n = np.arange(d)
    tot = n[:, None] + n[None, :]
    return tot[:, :, None, None] == tot[None, None, :, :]


def apply_two_site(
    state: SymmetricMPS,
    bond: int,
    gate: np.ndarray,
    policy: TruncationPolicy = TruncationPolicy(),
    absorb: str = "right",
    check_gate: bool = True,
) -> tuple[SymmetricMPS, float]:
    """Apply a two-site gate on sites ``(bond, bond+1)`` in place.

    ``gate`` has shape ``(d, d, d, d)`` indexed ``[n1', n2', n1, n2]`` (a
    ``(d*d, d*d)`` matrix is reshaped). The orthogonality center must sit on
    one of the two sites; afterwards it is on ``bond + 1`` (``absorb='right'``)
    or ``bond`` (``absorb='left'``). Returns the state and the discarded weight.
    ``check_gate=False`` skips the number-conservation check for trusted gates.
    """
    if not 0 <= bond < state.n_sites - 1:
        raise IndexError(f"bond {bond} out of range for {state.n_sites} sites")
    if state.center not in (bond, bond + 1):
        raise ValueError(f"orthogonality center {state.center} not adjacent to bond {bond}")
    d = state.d
    gate = np.asarray(gate).reshape(d, d, d, d)
    if check_gate and np.any(gate[~_conserving_mask(d)] != 0):
        raise ChargeError("gate does not conserve particle number")
    a, b = state.tensors[bond], state.tensors[bond + 1]
    chil, chir = a.shape[0], b.shape[2]
    ql, qm, qr = state.charges[bond], state.charges[bond + 1], state.charges[bond + 2]
    rq = (ql[:, None] + np.arange(d)[None, :]).ravel()
    cq = (qr[None, :] - np.arange(d)[:, None]).ravel()
    theta = _block_matmul(a.reshape(chil * d, -1), b.reshape(-1, d * chir), rq, qm, cq)
    # a number-conserving gate maps the zero entries of theta to exact zeros
    theta = np.matmul(gate.reshape(d * d, d * d), theta.reshape(chil, d * d, chir)).reshape(chil * d, d * chir)
    u, s, vh, labels, weight, norm, spectrum = _truncated_split(theta, rq, cq, policy)
    if absorb == "right":
        state.tensors[bond] = u.reshape(chil, d, -1)
        state.tensors[bond + 1] = (s[:, None] * vh).reshape(-1, d, chir)
        state.center = bond + 1
    elif absorb == "left":
        state.tensors[bond] = (u * s[None, :]).reshape(chil, d, -1)
        state.tensors[bond + 1] = vh.reshape(-1, d, chir)
        state.center = bond
    else:
        raise ValueError("absorb must be 'left' or 'right'")
    state.charges[bond + 1] = labels
    state.spectra[bond] = spectrum
    state.last_norm = norm
    return state, weight


# --- measurements ----------------------------------------------------------------


def bond_spectrum(state: SymmetricMPS, bond: int) -> BondSpectrum:
    """Schmidt spectrum across ``bond`` (moves the center to site ``bond``)."""
    if not 0 <= bond < state.n_sites - 1:
        raise IndexError(f"bond {bond} out of range")
    state.move_center(bond)
    t = state.tensors[bond]
    chil, d, chir = t.shape
    rq = (state.charges[bond][:, None] + np.arange(d)[None, :]).ravel()
    blocks = _sector_svd(t.reshape(chil * d, chir), rq, state.charges[bond + 1])
    s = np.concatenate([b[4] for b in blocks])
    q = np.concatenate([np.full(b[4].size, b[0]) for b in blocks])
    order = np.argsort(-s, kind="stable")
    s, q = s[order], q[order]
    s = s / np.sqrt(np.sum(s**2))
    return BondSpectrum(values=s, charges=q)


def entanglement_entropy(state: SymmetricMPS, bond: int) -> float:
    return bond_spectrum(state, bond).entropy


def overlap(a: SymmetricMPS, b: SymmetricMPS) -> complex:
    """``<a|b>`` by a full transfer-matrix contraction."""
    if a.n_sites != b.n_sites:
        raise ValueError("states have different lengths")
    if a.total_charge != b.total_charge:
        raise ChargeError("states carry different particle numbers")
    if a.d != b.d:
        raise ValueError("states have different local dimensions")
    env = np.ones((1, 1), dtype=complex)
    for ta, tb in zip(a.tensors, b.tensors):
        env = np.tensordot(env, tb, axes=(1, 0))  # (a', d, c)
        env = np.tensordot(ta.conj(), env, axes=([0, 1], [0, 1]))  # (a'', c)
    return complex(env[0, 0])


def _check_op(state, op):
    op = np.asarray(op)
    if op.shape != (state.d, state.d):
        raise ValueError(f"operator shape {op.shape} does not match local dimension {state.d}")
    return op


def expectation_onsite(state: SymmetricMPS, site: int, op) -> complex:
    op = _check_op(state, op)
    state.move_center(site)
    c = state.tensors[site]
    return complex(np.einsum("amc,mn,anc->", c.conj(), op, c, optimize=True))


def site_distributions(state: SymmetricMPS) -> np.ndarray:
    """Occupation probabilities ``p[i, n]`` for every site (one sweep)."""
    state.move_center(0)
    out = np.empty((state.n_sites, state.d))
    for i in range(state.n_sites):
        state.move_center(i)
        c = state.tensors[i]
        out[i] = np.einsum("anc,anc->n", c.conj(), c).real
    return out


def expectation_two_point(state: SymmetricMPS, i: int, j: int, op_i, op_j) -> complex:
    if i == j:
        raise ValueError("sites must differ; use expectation_onsite with the product operator")
    op_i, op_j = _check_op(state, op_i), _check_op(state, op_j)
    if i > j:
        i, j, op_i, op_j = j, i, op_j, op_i
    state.move_center(i)
    c = state.tensors[i]
    env = np.einsum("amc,mn,ane->ce", c.conj(), op_i, c, optimize=True)
    for k in range(i + 1, j):
        t = state.tensors[k]
        env = np.einsum("ce,cnf,eng->fg", env, t.conj(), t, optimize=True)
    t = state.tensors[j]
    return complex(np.einsum("ce,cmf,mn,enf->", env, t.conj(), op_j, t, optimize=True))


def two_point_row(state: SymmetricMPS, anchor: int, op_anchor, op_other) -> np.ndarray:
    """``<O_anchor O_j>`` for all ``j != anchor`` in two sweeps; entry ``anchor`` is NaN."""
    op_a, op_o = _check_op(state, op_anchor), _check_op(state, op_other)
    m = state.n_sites
    out = np.full(m, np.nan, dtype=complex)
    state.move_center(anchor)
    c = state.tensors[anchor]
    env = np.einsum("amc,mn,ane->ce", c.conj(), op_a, c, optimize=True)
    for j in range(anchor + 1, m):
        t = state.tensors[j]
        out[j] = np.einsum("ce,cmf,mn,enf->", env, t.conj(), op_o, t, optimize=True)
        env = np.einsum("ce,cnf,eng->fg", env, t.conj(), t, optimize=True)
    env = np.einsum("amc,mn,bnc->ab", c.conj(), op_a, c, optimize=True)
    for j in range(anchor - 1, -1, -1):
        t = state.tensors[j]
        out[j] = np.einsum("ab,cma,mn,cnb->", env, t.conj(), op_o, t, optimize=True)
        env = np.einsum("ab,cna,enb->ce", env, t.conj(), t, optimize=True)
    return out


def to_amplitudes(state: SymmetricMPS, configs, chunk: int = 512) -> np.ndarray:
    """Amplitudes ``<n_0 ... n_{M-1}|psi>`` for each row of ``configs``."""
    configs = np.asarray(configs, dtype=np.int64)
    out = np.empty(configs.shape[0], dtype=complex)
    for start in range(0, configs.shape[0], chunk):
        occ = configs[start : start + chunk]
        v = np.ones((occ.shape[0], 1), dtype=complex)
        for i, t in enumerate(state.tensors):
            v = np.einsum("sa,asb->sb", v, t[:, occ[:, i], :])
        out[start : start + chunk] = v[:, 0]
    return out


def embed(state: SymmetricMPS, n_max: int) -> SymmetricMPS:
    """Copy of ``state`` in a larger local space (zero-padded occupations)."""
    if n_max < state.n_max:
        raise ValueError("can only enlarge the local cutoff")
    pad = n_max - state.n_max
    out = state.copy()
    out.tensors = [np.pad(t, ((0, 0), (0, pad), (0, 0))) for t in state.tensors]
    out.n_max = n_max
    return out


# --- snapshots -------------------------------------------------------------------


def save(state: SymmetricMPS, path) -> None:
    """Binary checkpoint: versioned header, then per-site shapes, labels and data."""
    center = -1 if state.center is None else state.center
    with open(Path(path), "wb") as fh:
        fh.write(SNAPSHOT_MAGIC)
        fh.write(struct.pack("<IiiiI", SNAPSHOT_VERSION, state.n_sites, state.n_max, state.total_charge, center + 1))
        for i, t in enumerate(state.tensors):
            fh.write(struct.pack("<ii", t.shape[0], t.shape[2]))
            fh.write(np.ascontiguousarray(state.charges[i], dtype="<i8").tobytes())
            fh.write(np.ascontiguousarray(t, dtype="<c16").tobytes())
        fh.write(np.ascontiguousarray(state.charges[-1], dtype="<i8").tobytes())


def load(path) -> SymmetricMPS:
    with open(Path(path), "rb") as fh:
        if fh.read(len(SNAPSHOT_MAGIC)) != SNAPSHOT_MAGIC:
            raise ValueError(f"{path}: not an MPS snapshot")
        version, n_sites, n_max, total, center1 = struct.unpack("<IiiiI", fh.read(20))
        if version != SNAPSHOT_VERSION:
            raise ValueError(f"{path}: unsupported snapshot version {version}")
        d = n_max + 1
        tensors, charges = [], []
        for _ in range(n_sites):
            chil, chir = struct.unpack("<ii", fh.read(8))
            charges.append(np.frombuffer(fh.read(8 * chil), dtype="<i8").astype(np.int64))
            data = np.frombuffer(fh.read(16 * chil * d * chir), dtype="<c16")
            tensors.append(data.reshape(chil, d, chir).astype(complex))
        charges.append(np.frombuffer(fh.read(8), dtype="<i8").astype(np.int64))
    state = SymmetricMPS(tensors=tensors, charges=charges, n_max=n_max, center=None if center1 == 0 else center1 - 1)
    if state.total_charge != total:
        raise ValueError(f"{path}: corrupt snapshot (charge {state.total_charge} != {total})")
    state.check()
    return state
