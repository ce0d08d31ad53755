import itertools
import os
import subprocess
import sys

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from llquench import _kernels, ed

BACKENDS = {
    "numba": (_kernels.rank_states_numba, _kernels.hopping_elements_numba, _kernels.quench_series_numba),
    "numpy": (_kernels.rank_states_numpy, _kernels.hopping_elements_numpy, _kernels.quench_series_numpy),
}


def brute_force_states(m, n, n_max):
    return [s for s in itertools.product(range(n_max + 1), repeat=m) if sum(s) == n]


@pytest.mark.parametrize("backend", BACKENDS)
@pytest.mark.parametrize("m,n,n_max", [(1, 2, 2), (4, 3, 3), (5, 4, 2), (6, 2, 1)])
def test_rank_is_lexicographic_position(backend, m, n, n_max):
    rank, _, _ = BACKENDS[backend]
    states = np.array(brute_force_states(m, n, n_max), dtype=np.int64)
    counts = _kernels.composition_counts(m, n, n_max)
    assert counts[0, n] == len(states)
    np.testing.assert_array_equal(rank(states, counts, n), np.arange(len(states)))


@pytest.mark.parametrize("backend", BACKENDS)
def test_hopping_elements_match_dense_construction(backend):
    _, hop, _ = BACKENDS[backend]
    m, n, n_max, j = 4, 3, 2, 0.7
    states = np.array(brute_force_states(m, n, n_max), dtype=np.int64)
    index = {tuple(s): k for k, s in enumerate(states)}
    dense = np.zeros((len(states), len(states)))
    for k, s in enumerate(states):
        for i in range(m - 1):
            for src, dst in ((i, i + 1), (i + 1, i)):
                if s[src] > 0 and s[dst] < n_max:
                    t = s.copy()
                    t[src] -= 1
                    t[dst] += 1
                    dense[index[tuple(t)], k] -= j * np.sqrt(s[src] * (s[dst] + 1))
    counts = _kernels.composition_counts(m, n, n_max)
    rows, cols, vals = hop(states, counts, n, n_max, j)
    built = np.zeros_like(dense)
    np.add.at(built, (rows, cols), vals)
    np.testing.assert_allclose(built, dense, atol=1e-14)
    np.testing.assert_allclose(built, built.T)


@given(
    amps=st.lists(st.complex_numbers(max_magnitude=10, allow_nan=False, allow_infinity=False), min_size=1, max_size=12),
    t=st.floats(0, 5),
)
def test_quench_series_backends_agree(amps, t):
    a = np.array(amps, dtype=complex)
    e = np.linspace(-3.0, 40.0, a.size)
    times = np.array([0.0, t, 2 * t])
    ref = np.array([np.sum(a * (np.exp(-1j * e * tt) - 1.0)) for tt in times])
    for _, _, series in BACKENDS.values():
        np.testing.assert_allclose(series(a, e, times), ref, atol=1e-9)


def test_basis_hamiltonian_same_for_both_backends():
    basis = ed.FockBasis(7, 3, 3)
    counts = basis.counts
    r1 = _kernels.hopping_elements_numba(np.ascontiguousarray(basis.states), counts, 3, 3, 1.3)
    r2 = _kernels.hopping_elements_numpy(basis.states, counts, 3, 3, 1.3)
    key1 = np.lexsort((r1[1], r1[0]))
    key2 = np.lexsort((r2[1], r2[0]))
    for x, y in zip(r1, r2):
        np.testing.assert_allclose(x[key1], y[key2])


def test_env_flag_selects_numpy_fallback():
    env = dict(os.environ, LLQ_DISABLE_NUMBA="1")
    code = (
        "from llquench import _kernels, ed, model;"
        "assert not _kernels.USE_NUMBA;"
        "import numpy as np;"
        "b = ed.FockBasis(5, 2, 2);"
        "print(ed.build_hamiltonian(model.LatticeParams(5, 1.0, 1.0, 2.0, np.zeros(5), 2), b).sum())"
    )
    out = subprocess.run([sys.executable, "-c", code], env=env, capture_output=True, text=True, check=True)
    assert float(out.stdout) == pytest.approx(float(_fast_sum()))


def _fast_sum():
    b = ed.FockBasis(5, 2, 2)
    from llquench import model

    return ed.build_hamiltonian(model.LatticeParams(5, 1.0, 1.0, 2.0, np.zeros(5), 2), b).sum()
