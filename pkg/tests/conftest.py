"""Shared test helpers: independent dense oracles for the Poisson
kernels and construction of the same matrix in every storage kind."""

import numpy as np
from scipy import sparse

from sympeig import SpdOperator

KINDS = ("dense", "csr", "slr")


def dense_j(k):
    # independent J_k, assembled blockwise (oracle for the kernels)
    z = np.zeros((k, k))
    eye = np.eye(k)
    return np.block([[z, eye], [-eye, z]])


def random_spd(rng, dim, cond=50.0):
    q, _ = np.linalg.qr(rng.standard_normal((dim, dim)))
    w = np.linspace(1.0, cond, dim)
    return (q * w) @ q.T


def make_operator(kind, a):
    """Wrap a dense symmetric array as the requested operator kind.

    The "slr" wrapping splits a = (a - c c^T) + c c^T with a small
    fixed factor c, so all kinds represent the same matrix up to
    round-off.
    """
    a = np.asarray(a, dtype=float)
    if kind == "dense":
        return SpdOperator.from_dense(a)
    if kind == "csr":
        return SpdOperator.from_csr(sparse.csr_array(a))
    dim = a.shape[0]
    rng = np.random.default_rng(dim)
    c = rng.standard_normal((dim, 3)) / np.sqrt(dim)
    b = sparse.csr_array(a - c @ c.T)
    return SpdOperator.from_low_rank(b, c)
