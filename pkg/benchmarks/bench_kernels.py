"""Numba vs numpy timings for the hot loops, plus one TEBD step for scale.

    python3 benchmarks/bench_kernels.py [--repeat 5]

The first numba call compiles (or loads the on-disk cache); it is excluded
from the timings. The TEBD step is dominated by LAPACK SVDs and BLAS products
and is shown only to put the kernel numbers in context.
"""

from __future__ import annotations

import argparse
import time

import numpy as np

from llquench import _kernels, bethe2, ed, model, mps, tebd


def best_of(fn, repeat):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return min(times)


def bench_pair(name, fast, slow, repeat, check):
    fast()  # compile
    t_fast = best_of(fast, repeat)
    t_slow = best_of(slow, repeat)
    ok = check(fast(), slow())
    print(f"{name:<22} numba {t_fast * 1e3:9.2f} ms   numpy {t_slow * 1e3:9.2f} ms   x{t_slow / t_fast:6.1f}   match={ok}")


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()
    if not _kernels.HAVE_NUMBA:
        raise SystemExit("numba is not installed")

    basis = ed.FockBasis(16, 4, 4)
    states, counts = np.ascontiguousarray(basis.states), basis.counts
    print(f"Fock basis: 16 sites, 4 bosons, dim {basis.dim}")
    bench_pair(
        "rank_states",
        lambda: _kernels.rank_states_numba(states, counts, 4),
        lambda: _kernels.rank_states_numpy(states, counts, 4),
        args.repeat,
        np.array_equal,
    )

    def same_elements(a, b):
        ka = np.lexsort((a[1], a[0]))
        kb = np.lexsort((b[1], b[0]))
        return all(np.allclose(x[ka], y[kb]) for x, y in zip(a, b))

    bench_pair(
        "hopping_elements",
        lambda: _kernels.hopping_elements_numba(states, counts, 4, 4, 1.0),
        lambda: _kernels.hopping_elements_numpy(states, counts, 4, 4, 1.0),
        args.repeat,
        same_elements,
    )

    exp = bethe2.quench_expansion(-89.0355, 1000)
    amps = np.ascontiguousarray(exp.coefficients * exp.contacts)
    energies = np.ascontiguousarray(exp.energies, dtype=float)
    times = np.linspace(0.0, 0.01, 4000)
    bench_pair(
        "quench_series",
        lambda: _kernels.quench_series_numba(amps, energies, times),
        lambda: _kernels.quench_series_numpy(amps, energies, times),
        args.repeat,
        lambda a, b: np.allclose(a, b, atol=1e-10),
    )

    cp = model.trapped_gas(6, -18.7931)
    lp = model.discretize(cp, 256, 4)
    occ = tebd.fock_seed(lp, 6)
    state = mps.init_fock(occ, lp.n_max)
    prop = tebd.Propagator(lp, mps.TruncationPolicy(chi_max=64))
    for _ in range(5):
        prop.step(state, 1.0 / lp.hopping)
    t = best_of(lambda: prop.step(state, 1.0 / lp.hopping), 1)
    print(f"{'TEBD step (M=256)':<22} {t * 1e3:9.2f} ms   max bond dim {max(state.bond_dims)}   (BLAS/LAPACK bound)")


if __name__ == "__main__":
    main()
