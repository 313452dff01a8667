"""Matrix-free SPD operators and Poisson-matrix kernels.

The operator A is a symmetric positive definite 2n-by-2n real matrix
held in one of three forms: dense, sparse CSR, or sparse-plus-low-rank
B + C C^T.  The Poisson matrix

    J_k = [[ 0,  I_k],
           [-I_k, 0 ]]

is never materialized on the large side; products with it are computed
by block permutation and negation in O(k * cols).
"""

import os

import numpy as np
from scipy import sparse
from scipy.io import mmread, mmwrite

from .flops import add_flops

DENSE = "dense"
SPARSE_CSR = "csr"
SPARSE_LOW_RANK = "slr"

_LOW_RANK_SUFFIX_B = ".B.mtx"
_LOW_RANK_SUFFIX_C = ".C.mtx"


def _check_square_even(shape, what="matrix"):
    if len(shape) != 2 or shape[0] != shape[1]:
        raise ValueError(f"{what} must be square, got shape {shape}")
    if shape[0] % 2:
        raise ValueError(f"{what} must have even dimension, got {shape[0]}")


class SpdOperator:
    """Symmetric positive definite operator on R^(2n).

    Instances are immutable after construction and safe to share across
    threads.  Use one of the ``from_*`` constructors.

    Attributes
    ----------
    kind : {"dense", "csr", "slr"}
        Storage form.  "slr" holds A = B + C C^T with sparse B and a
        thin dense factor C.
    n : int
        Half-dimension; the operator acts on R^(2n).
    """

    def __init__(self, kind, n, dense=None, sparse_part=None, factor=None):
        self.kind = kind
        self.n = int(n)
        self._dense = dense
        self._sp = sparse_part
        self._c = factor

    @classmethod
    def from_dense(cls, a):
        a = np.asarray(a, dtype=float)
        _check_square_even(a.shape)
        return cls(DENSE, a.shape[0] // 2, dense=a)

    @classmethod
    def from_csr(cls, b):
        b = sparse.csr_array(b).astype(float)
        _check_square_even(b.shape)
        return cls(SPARSE_CSR, b.shape[0] // 2, sparse_part=b)

    @classmethod
    def from_low_rank(cls, b, c):
        b = sparse.csr_array(b).astype(float)
        c = np.asarray(c, dtype=float)
        _check_square_even(b.shape, what="sparse part")
        if c.ndim != 2:
            raise ValueError(f"low-rank factor must be 2-D, got shape {c.shape}")
        if c.shape[0] != b.shape[0]:
            raise ValueError(
                f"factor rows {c.shape[0]} do not match sparse part {b.shape[0]}"
            )
        return cls(SPARSE_LOW_RANK, b.shape[0] // 2, sparse_part=b, factor=c)

    @property
    def shape(self):
        return (2 * self.n, 2 * self.n)

    @property
    def nnz(self):
        """Stored entry count (dense storage counts every entry)."""
        if self.kind == DENSE:
            return 4 * self.n * self.n
        if self.kind == SPARSE_CSR:
            return self._sp.nnz
        return self._sp.nnz + self._c.size

    def apply(self, x):
        """Return A x for a vector or a block of column vectors.

        Parameters
        ----------
        x : array_like
            Shape (2n,) or (2n, cols) with cols <= 2n.

        Returns
        -------
        ndarray
            A x, same shape as `x`.
        """
        x = np.asarray(x, dtype=float)
        if x.shape[0] != 2 * self.n:
            raise ValueError(
                f"operand has {x.shape[0]} rows, operator needs {2 * self.n}"
            )
        cols = 1 if x.ndim == 1 else x.shape[1]
        if x.ndim > 2 or cols > 2 * self.n:
            raise ValueError(f"operand shape {x.shape} not supported")
        if self.kind == DENSE:
            add_flops(4 * self.n * self.n * cols)
            return self._dense @ x
        if self.kind == SPARSE_CSR:
            add_flops(self._sp.nnz * cols)
            return self._sp @ x
        # B x + C (C^T x), never materializing C C^T
        add_flops((self._sp.nnz + 4 * self.n * self._c.shape[1]) * cols)
        return self._sp @ x + self._c @ (self._c.T @ x)

    def trace(self):
        """tr(A), from stored diagonals (plus row norms of C for "slr")."""
        if self.kind == DENSE:
            return float(np.trace(self._dense))
        diag = float(self._sp.diagonal().sum())
        if self.kind == SPARSE_CSR:
            return diag
        return diag + float((self._c ** 2).sum())

    def densify(self, max_dim=4000):
        """Materialize A as a dense array.

        Refuses when 2n exceeds `max_dim`; reduce n or raise the budget
        explicitly for one-off use.
        """
        if 2 * self.n > max_dim:
            raise ValueError(
                f"2n = {2 * self.n} exceeds the dense budget {max_dim}; reduce n"
            )
        if self.kind == DENSE:
            return self._dense.copy()
        if self.kind == SPARSE_CSR:
            return self._sp.toarray()
        return self._sp.toarray() + self._c @ self._c.T

    def is_symmetric(self, rng=None, probes=8, rtol=1e-12):
        """Probe |<u, Av> - <v, Au>| <= rtol * ||Au|| * ||v|| on random pairs."""
        rng = np.random.default_rng(0) if rng is None else rng
        m = 2 * self.n
        for _ in range(probes):
            u = rng.standard_normal(m)
            v = rng.standard_normal(m)
            au = self.apply(u)
            av = self.apply(v)
            gap = abs(float(u @ av) - float(v @ au))
            if gap > rtol * np.linalg.norm(au) * np.linalg.norm(v):
                return False
        return True

    def is_spd(self, rng=None, probes=8):
        """Check positive definiteness.

        Dense instances are checked by a Cholesky factorization; the
        matrix-free kinds by <u, Au> > 0 on random probe vectors.
        """
        if self.kind == DENSE:
            try:
                np.linalg.cholesky(0.5 * (self._dense + self._dense.T))
            except np.linalg.LinAlgError:
                return False
            return True
        rng = np.random.default_rng(0) if rng is None else rng
        for _ in range(probes):
            u = rng.standard_normal(2 * self.n)
            if float(u @ self.apply(u)) <= 0.0:
                return False
        return True


def j_left(x):
    """Return J_k x for an array x with 2k rows.

    Computed by block row permutation and negation; no 2k-by-2k matrix
    is formed.
    """
    x = np.asarray(x)
    if x.shape[0] % 2:
        raise ValueError(f"J product needs an even row count, got {x.shape[0]}")
    k = x.shape[0] // 2
    return np.concatenate((x[k:], -x[:k]), axis=0)


def j_right(x):
    """Return x J_p for a matrix x with 2p columns."""
    x = np.asarray(x)
    if x.ndim != 2 or x.shape[1] % 2:
        raise ValueError(f"x J_p needs an even column count, got shape {x.shape}")
    p = x.shape[1] // 2
    return np.concatenate((-x[:, p:], x[:, :p]), axis=1)


def symplectic_gram(x, jx=None):
    """Return the skew part of X^T J_n X.

    Parameters
    ----------
    x : ndarray, shape (2n, 2p)
    jx : ndarray, optional
        Precomputed ``j_left(x)``, reused when the caller already has it.

    Notes
    -----
    The product is explicitly skew-symmetrized as (G - G^T)/2 to
    suppress round-off; the exact value is skew-symmetric.
    """
    x = np.asarray(x, dtype=float)
    if jx is None:
        jx = j_left(x)
    g = x.T @ jx
    add_flops(g.shape[0] * g.shape[1] * x.shape[0])
    return 0.5 * (g - g.T)


def poisson(k):
    """Dense Poisson matrix J_k; intended for small (2p-sized) algebra only."""
    eye = np.eye(k)
    zero = np.zeros((k, k))
    return np.block([[zero, eye], [-eye, zero]])


def canonical_frame(n, p):
    """Columns 1..p and n+1..n+p of I_(2n): the canonical symplectic frame."""
    if not 1 <= p <= n:
        raise ValueError(f"need 1 <= p <= n, got p={p}, n={n}")
    x = np.zeros((2 * n, 2 * p))
    idx = np.arange(p)
    x[idx, idx] = 1.0
    x[n + idx, p + idx] = 1.0
    return x


def _read_mm(path):
    try:
        return mmread(path)
    except OSError:
        raise
    except Exception as exc:
        raise OSError(f"{path}: not a readable Matrix Market file ({exc})") from exc


def load_matrix(path):
    """Load an operator from Matrix Market storage.

    A single ``.mtx`` file yields a dense or CSR operator depending on
    the file's array/coordinate format; the ``symmetric`` qualifier is
    honored (mirrored on read).  A sparse-plus-low-rank instance is a
    two-file pair ``<base>.B.mtx`` (sparse part) and ``<base>.C.mtx``
    (dense factor); pass the ``.B.mtx`` path.
    """
    path = os.fspath(path)
    if path.endswith(_LOW_RANK_SUFFIX_C):
        raise OSError(
            f"{path}: pass the sparse part (.B.mtx) of the low-rank pair instead"
        )
    if path.endswith(_LOW_RANK_SUFFIX_B):
        cpath = path[: -len(_LOW_RANK_SUFFIX_B)] + _LOW_RANK_SUFFIX_C
        if not os.path.exists(cpath):
            raise OSError(f"{cpath}: missing dense factor of the low-rank pair")
        b = _read_mm(path)
        c = _read_mm(cpath)
        if sparse.issparse(c):
            c = c.toarray()
        try:
            return SpdOperator.from_low_rank(b, np.asarray(c, dtype=float))
        except ValueError as exc:
            raise OSError(f"{path}: {exc}") from exc
    m = _read_mm(path)
    try:
        if sparse.issparse(m):
            return SpdOperator.from_csr(m)
        return SpdOperator.from_dense(np.asarray(m, dtype=float))
    except ValueError as exc:
        raise OSError(f"{path}: {exc}") from exc


def store_matrix(op, path):
    """Write an operator to Matrix Market files; returns the written paths.

    Dense operators use array format, CSR uses coordinate format, and
    "slr" operators are written as the ``<base>.B.mtx`` /
    ``<base>.C.mtx`` pair (`path` may be the base name or either
    spelled-out file name).
    """
    path = os.fspath(path)
    if op.kind == SPARSE_LOW_RANK:
        for suffix in (_LOW_RANK_SUFFIX_B, _LOW_RANK_SUFFIX_C, ".mtx"):
            if path.endswith(suffix):
                path = path[: -len(suffix)]
                break
        bpath = path + _LOW_RANK_SUFFIX_B
        cpath = path + _LOW_RANK_SUFFIX_C
        mmwrite(bpath, op._sp, precision=17)
        mmwrite(cpath, op._c, precision=17)
        return (bpath, cpath)
    payload = op._dense if op.kind == DENSE else op._sp
    mmwrite(path, payload, precision=17)
    return (path,)
