"""Separable NMF by conical-hull anchor selection (XRAY).

Matrices go in as dense numpy arrays, scipy.sparse matrices or
``SparseMatrix`` objects; column indices are 0-based.
"""

import numpy as np

from ._xray import (
    GramCache,
    SparseMatrix,
    XrayError,
    build_docterm,
    gen_separable,
    normalize_columns,
    num_threads,
    read_matrix_market,
    recovery_fraction,
    set_num_threads,
    write_matrix_market,
)
from . import _xray

__all__ = [
    "GramCache",
    "SparseMatrix",
    "XrayError",
    "as_sparse",
    "build_docterm",
    "gen_separable",
    "gram",
    "nnls_solve",
    "normalize_columns",
    "num_threads",
    "read_matrix_market",
    "recovery_fraction",
    "set_num_threads",
    "write_matrix_market",
    "xray",
]


def as_sparse(X):
    if isinstance(X, SparseMatrix):
        return X
    if hasattr(X, "tocsc"):
        X = X.tocsc()
        rows, cols = X.shape
        return SparseMatrix.from_csc(rows, cols, X.indptr, X.indices, X.data)
    return SparseMatrix.from_dense(np.asarray(X, dtype=np.float64))


def gram(X, dense_threshold=0.25):
    return _xray.gram(as_sparse(X), dense_threshold)


def nnls_solve(X, anchors, warm_start=None, **kw):
    """Returns (B, objective, cycles) for min ||X - X[:, anchors] B||_F^2, B >= 0."""
    C = X if isinstance(X, GramCache) else gram(X)
    return _xray.nnls_solve(C, list(anchors), warm_start, **kw)


def xray(X, rank, criterion="greedy", seed=0, refine_iters=0, improvement_threshold=None):
    """Selects up to `rank` anchor columns. Returns a dict with anchors, H and
    residual_history (plus W, refined_H and refine_history when refining)."""
    return _xray.xray(as_sparse(X), rank, criterion, seed, refine_iters, improvement_threshold)
