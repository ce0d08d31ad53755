"""Quench dynamics of a 1D Bose gas from hard-core repulsion to strong attraction.

Number-conserving TEBD on a discretized Lieb-Liniger lattice, cross-checked
against the exact two-particle Bethe-ansatz solution and exact diagonalization.
"""

import os

# LLQ_THREADS caps BLAS and numba worker threads; it only takes effect if set
# before numpy is first imported in the process.
if os.environ.get("LLQ_THREADS"):
    for _var in ("OMP_NUM_THREADS", "OPENBLAS_NUM_THREADS", "MKL_NUM_THREADS", "NUMBA_NUM_THREADS"):
        os.environ.setdefault(_var, os.environ["LLQ_THREADS"])

from . import bethe2, ed, model, mps, observables, tebd  # noqa: E402

__version__ = "0.1.0"

__all__ = ["bethe2", "ed", "model", "mps", "observables", "tebd", "__version__"]
