"""Subspace and eigen-residual error measures."""

from dataclasses import dataclass

import numpy as np

from .operators import j_left, j_right, poisson, symplectic_gram


@dataclass
class MetricsReport:
    """Aggregated error measures of a computed basis."""

    golub_werman: float
    residue: float
    feasibility: float
    objective: float
    eig_abs_err: np.ndarray
    eig_rel_err: np.ndarray


def _orthonormal(x):
    q, r = np.linalg.qr(x)
    diag = np.abs(np.diagonal(r))
    if diag.size == 0 or diag.min() <= max(x.shape) * np.finfo(float).eps * diag.max():
        raise ValueError("rank-deficient basis in subspace error")
    return q


def golub_werman(x, x_ref, dense_cutoff=1000):
    """Frobenius distance between the orthogonal projectors onto
    span(x) and span(x_ref).

    For row counts up to `dense_cutoff` the projector difference is
    formed explicitly; above it the identity
    ||P - Q||_F^2 = c_1 + c_2 - 2 ||Q_1^T Q_2||_F^2 avoids any
    2n-by-2n intermediate.  Symmetric in its arguments and invariant
    under right-multiplication of either one by an invertible matrix.
    """
    x = np.asarray(x, dtype=float)
    x_ref = np.asarray(x_ref, dtype=float)
    if x.shape[0] != x_ref.shape[0]:
        raise ValueError(f"row counts differ: {x.shape[0]} vs {x_ref.shape[0]}")
    q1 = _orthonormal(x)
    q2 = _orthonormal(x_ref)
    if x.shape[0] <= dense_cutoff:
        return float(np.linalg.norm(q1 @ q1.T - q2 @ q2.T))
    cross = q1.T @ q2
    e2 = q1.shape[1] + q2.shape[1] - 2.0 * float(np.vdot(cross, cross))
    return float(np.sqrt(max(e2, 0.0)))


def residue(op, x, d):
    """Relative eigen-residual ||A X - J_n X J_p^T D||_F / ||A X||_F
    with D = diag(d, d)."""
    x = np.asarray(x, dtype=float)
    d = np.atleast_1d(np.asarray(d, dtype=float))
    if x.ndim != 2 or x.shape[1] != 2 * d.size:
        raise ValueError(f"basis shape {x.shape} does not match {d.size} eigenvalues")
    if d.min() <= 0:
        raise ValueError("eigenvalues must be positive")
    if not np.linalg.norm(x):
        raise ValueError("residue of a zero basis is undefined")
    ax = op.apply(x)
    doubled = np.concatenate([d, d])
    target = j_left(-j_right(x) * doubled)
    return float(np.linalg.norm(ax - target) / np.linalg.norm(ax))


def report(op, x, result, reference=None, beta=None, dense_cutoff=1000):
    """Aggregate the error measures for a computed basis.

    Parameters
    ----------
    op : SpdOperator
    x : ndarray, shape (2n, 2p)
        Computed basis (eigenbasis or final iterate).
    result : SympEigResult or array_like
        Solver result, or just the computed eigenvalues (length p).
    reference : ReferenceSpectrum, optional
        When given, the subspace error and per-eigenvalue errors
        against the reference are included.
    beta : float, optional
        When given, the penalty objective at `x` is included; taken
        from `result` when that is a solver result.
    """
    from .penalty import objective  # local import keeps module load light

    if hasattr(result, "eigenvalues"):
        d = result.eigenvalues
        if beta is None:
            beta = result.beta_final
    else:
        d = result
    d = np.atleast_1d(np.asarray(d, dtype=float))
    p = d.size
    feasibility = float(np.linalg.norm(symplectic_gram(x) - poisson(p)))
    gw = abs_err = rel_err = None
    if reference is not None:
        x_ref = reference.x_ref if reference.x_ref is not None else reference.frame(p)
        gw = golub_werman(x, x_ref, dense_cutoff=dense_cutoff)
        d_ref = reference.d[:p]
        abs_err = np.abs(d - d_ref)
        rel_err = abs_err / d_ref
    return MetricsReport(
        golub_werman=gw,
        residue=residue(op, x, d),
        feasibility=feasibility,
        objective=None if beta is None else objective(op, x, beta),
        eig_abs_err=abs_err,
        eig_rel_err=rel_err,
    )
