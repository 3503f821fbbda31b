"""Python front end for the phikrylov library.

Matrices may be given as scipy.sparse matrices, dense numpy arrays or
(n, indptr, indices, data) CSR tuples.
"""

import json

import numpy as np

from ._phikrylov import (
    PhiKrylovError,
    advdiff2d,
    laplacian2d,
    lesp,
    load_matrix_market,
    phi_dense,
    rhs_poly,
)
from . import _phikrylov

__all__ = [
    "PhiKrylovError",
    "advdiff2d",
    "compare",
    "laplacian2d",
    "lesp",
    "load_matrix_market",
    "phi",
    "phi_dense",
    "rhs_poly",
    "run",
    "to_scipy",
]


def _as_csr(A):
    if isinstance(A, tuple) and len(A) == 4:
        n, indptr, indices, data = A
        return int(n), list(indptr), list(indices), list(data)
    if hasattr(A, "tocsr"):
        A = A.tocsr()
        A.sort_indices()
        return A.shape[0], A.indptr.tolist(), A.indices.tolist(), A.data.astype(float).tolist()
    A = np.asarray(A, dtype=float)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise ValueError("expected a square matrix")
    rows, cols = np.nonzero(A)
    indptr = np.zeros(A.shape[0] + 1, dtype=np.int64)
    np.add.at(indptr, rows + 1, 1)
    return A.shape[0], np.cumsum(indptr).tolist(), cols.tolist(), A[rows, cols].tolist()


def to_scipy(csr):
    """Convert an (n, indptr, indices, data) tuple to scipy.sparse.csr_matrix."""
    import scipy.sparse as sp

    n, indptr, indices, data = csr
    return sp.csr_matrix((data, indices, indptr), shape=(n, n))


def phi(A, v, t=1.0, ells=(0,), method="trha", k=30, q=5, tol=1e-8, gamma=None,
        max_cycles=100, exact_correction=False):
    """phi_l(-t A) v for each l in ells. Returns a dict with solutions and counters."""
    n, indptr, indices, data = _as_csr(A)
    out = _phikrylov.solve(n, indptr, indices, data, np.asarray(v, dtype=float), t, list(ells), method,
                           k, q, tol, gamma, max_cycles, exact_correction)
    out["solutions"] = [np.asarray(s) for s in out["solutions"]]
    return out


def run(config):
    """Run one experiment; config is a dict of RunConfig fields. Returns the parsed record."""
    return json.loads(_phikrylov.run_json(json.dumps(config)))


def compare(configs):
    """Run several configurations on one problem; returns (records, table text)."""
    text, table = _phikrylov.compare_json([json.dumps(c) for c in configs])
    return json.loads(text), table
