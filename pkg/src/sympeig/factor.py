"""Symplectic SVD, small dense Williamson diagonalization, and the
symplectic Rayleigh-Ritz refinement.

The common engine is the real Schur form of a skew-symmetric matrix K,
whose 2x2 blocks [[0, d], [-d, 0]] are sign-normalized (d > 0 by
swapping the block's column pair), stably sorted ascending in d, and
re-interleaved so that Q^T K Q = [[0, D], [-D, 0]] with D = diag(d).
"""

from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .errors import NumericalFailure, RankDeficientError
from .operators import j_left, symplectic_gram


@dataclass
class SsvdFactors:
    """X = S Sigma T^T with S symplectic, T orthogonal, and Sigma the
    doubled diagonal (sigma_1..sigma_p, sigma_1..sigma_p)."""

    s: np.ndarray
    sigma: np.ndarray
    t: np.ndarray


@dataclass
class WilliamsonForm:
    """S^T M S = diag(d, d) with S symplectic and d ascending."""

    s: np.ndarray
    d: np.ndarray


def _skew_schur_pairs(k, dtol):
    """Normalized, sorted Schur pairing of a skew-symmetric matrix.

    Returns (q, d, deficient): q orthogonal with columns arranged as
    [u_1..u_m, v_1..v_m] so that u_i^T k v_j = d_i delta_ij, d ascending;
    `deficient` counts pairs missing or at/below `dtol`.
    """
    t, q = scipy.linalg.schur(k)
    dim = k.shape[0]
    detect = np.finfo(float).eps * max(1.0, float(np.linalg.norm(k, "fro")))
    pairs = []
    singles = 0
    i = 0
    while i < dim:
        if i + 1 < dim and abs(t[i + 1, i]) > detect:
            d = float(t[i, i + 1])
            if d >= 0.0:
                pairs.append((d, i, i + 1))
            else:
                pairs.append((-d, i + 1, i))
            i += 2
        else:
            singles += 1
            i += 1
    pairs.sort(key=lambda item: item[0])
    d = np.array([item[0] for item in pairs])
    deficient = singles // 2 + int(np.count_nonzero(d <= dtol))
    cols = [item[1] for item in pairs] + [item[2] for item in pairs]
    return q[:, cols], d, deficient


def ssvd(x, tol=None):
    """Symplectic singular value decomposition of a full-rank basis.

    Parameters
    ----------
    x : ndarray, shape (2n, 2p)
    tol : float, optional
        Smallest acceptable symplectic singular value; defaults to
        1e-10 * ||X||_2.

    Returns
    -------
    SsvdFactors

    Raises
    ------
    RankDeficientError
        If any symplectic singular value falls at or below `tol`; the
        exception carries the deficient pair count.
    """
    x = np.asarray(x, dtype=float)
    if x.ndim != 2 or x.shape[1] % 2:
        raise ValueError(f"basis must be 2n-by-2p, got shape {x.shape}")
    p = x.shape[1] // 2
    if tol is None:
        tol = 1e-10 * (np.linalg.norm(x, 2) if x.size else 0.0)
    gram = symplectic_gram(x)
    q, d, deficient = _skew_schur_pairs(gram, dtol=tol * tol)
    if deficient or d.size != p:
        deficient = max(deficient, p - d.size)
        raise RankDeficientError(
            f"basis numerically rank-deficient in {deficient} symplectic "
            f"direction(s) at tolerance {tol:g}",
            deficient=deficient,
        )
    sigma = np.sqrt(np.concatenate([d, d]))
    s = (x @ q) / sigma
    return SsvdFactors(s=s, sigma=sigma, t=q)


def williamson_small(m):
    """Williamson normal form of a dense SPD matrix.

    Parameters
    ----------
    m : ndarray, shape (2k, 2k)
        Symmetric positive definite input (dense path; meant for
        moderate k).

    Returns
    -------
    WilliamsonForm
        S with S^T M S = diag(d, d), S^T J_k S = J_k, d ascending.

    Notes
    -----
    Uses R = M^(1/2) from a symmetric eigendecomposition, the Schur
    pairing of the skew matrix K = R J_k R, and S = R^(-1) Q diag(d, d)^(1/2).
    """
    m = np.asarray(m, dtype=float)
    if m.ndim != 2 or m.shape[0] != m.shape[1] or m.shape[0] % 2:
        raise ValueError(f"need a square even-dimensional matrix, got {m.shape}")
    sym = 0.5 * (m + m.T)
    try:
        w, u = np.linalg.eigh(sym)
    except np.linalg.LinAlgError as exc:
        raise NumericalFailure(f"eigendecomposition failed: {exc}") from exc
    if w[0] <= 0.0:
        raise NumericalFailure(
            f"matrix is not positive definite (smallest eigenvalue {w[0]:g})"
        )
    root_w = np.sqrt(w)
    r = (u * root_w) @ u.T
    r_inv = (u / root_w) @ u.T
    k_skew = r @ j_left(r)
    k_skew = 0.5 * (k_skew - k_skew.T)
    dtol = np.finfo(float).eps * float(np.linalg.norm(k_skew, "fro"))
    q, d, deficient = _skew_schur_pairs(k_skew, dtol=dtol)
    if deficient or d.size != m.shape[0] // 2:
        raise NumericalFailure(
            "symplectic spectrum collapsed; input is numerically singular"
        )
    scale = np.sqrt(np.concatenate([d, d]))
    s = (r_inv @ q) * scale
    return WilliamsonForm(s=s, d=d)


def srr(op, x):
    """Symplectic Rayleigh-Ritz refinement of span(X).

    Runs ssvd to get a symplectic basis S of the span, Williamson-
    diagonalizes the projected matrix S^T (A S), and rotates S into the
    refined eigenbasis.

    Returns
    -------
    (s_fin, d_fin) : ndarray pair
        s_fin in Sp(2p, 2n) with s_fin^T A s_fin = diag(d_fin, d_fin)
        up to round-off; d_fin ascending (the Ritz values).
    """
    fac = ssvd(x)
    s = fac.s
    projected = s.T @ op.apply(s)
    projected = 0.5 * (projected + projected.T)
    wf = williamson_small(projected)
    return s @ wf.s, wf.d


def restart_point(s_fin, d_fin, beta):
    """Scale a refined eigenbasis into the penalty minimizer
    S (I - D/beta)^(1/2); negative diagonal entries are clamped at 1e-12."""
    if beta <= 0:
        raise ValueError(f"penalty weight must be positive, got {beta}")
    d_fin = np.asarray(d_fin, dtype=float)
    w = np.sqrt(np.maximum(1.0 - d_fin / beta, 1e-12))
    return np.asarray(s_fin, dtype=float) * np.concatenate([w, w])


def random_orthosymplectic(p, rng):
    """Random 2p x 2p matrix in the intersection of O(2p) and Sp(2p).

    Built from a Haar-distributed p x p unitary U = A + iB as
    [[A, B], [-B, A]].
    """
    z = rng.standard_normal((p, p)) + 1j * rng.standard_normal((p, p))
    q, r = np.linalg.qr(z)
    diag = np.diagonal(r)
    q = q * (diag / np.abs(diag))
    return np.block([[q.real, q.imag], [-q.imag, q.real]])
