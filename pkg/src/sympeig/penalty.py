"""Zero-, first-, and second-order oracles of the trace-penalty objective.

For an SPD operator A on R^(2n), a basis X in R^(2n x 2p), and a
penalty weight beta > 0,

    f_beta(X) = 1/2 <X, A X> + (beta/4) ||X^T J_n X - J_p||_F^2 ,

with gradient

    grad f_beta(X) = A X - beta J_n X (X^T J_n X - J_p) .

Evaluations cache A X, J_n X, and the constraint violation so a
follow-up gradient costs one extra matrix product.
"""

from dataclasses import dataclass, field

import numpy as np

from .flops import add_flops
from .operators import j_left, symplectic_gram


@dataclass
class PenaltyEval:
    """One evaluation of f_beta with its cached building blocks.

    Attributes
    ----------
    beta : float
    value : float
        f_beta(X).
    trace_term : float
        1/2 <X, A X>.
    feasibility : float
        ||X^T J_n X - J_p||_F.
    ax : ndarray
        Cached A X.
    jx : ndarray
        Cached J_n X.
    violation : ndarray
        Cached skew matrix X^T J_n X - J_p.
    gradient : ndarray or None
        Filled by :meth:`ensure_gradient`.
    """

    beta: float
    value: float
    trace_term: float
    feasibility: float
    ax: np.ndarray
    jx: np.ndarray = field(repr=False)
    violation: np.ndarray = field(repr=False)
    gradient: np.ndarray = field(default=None, repr=False)

    def ensure_gradient(self):
        """Complete A X - beta J_n X (X^T J_n X - J_p) from the cache."""
        if self.gradient is None:
            rows, inner = self.jx.shape
            add_flops(rows * inner * self.violation.shape[1] + self.ax.size)
            self.gradient = self.ax - self.beta * (self.jx @ self.violation)
        return self.gradient


def _subtract_poisson(g):
    # g <- g - J_p in place, touching only the two identity blocks
    p = g.shape[0] // 2
    idx = np.arange(p)
    g[idx, p + idx] -= 1.0
    g[p + idx, idx] += 1.0
    return g


def evaluate(op, x, beta, want_gradient=False):
    """Evaluate f_beta at X, optionally with its gradient.

    Parameters
    ----------
    op : SpdOperator
    x : array_like, shape (2n, 2p)
    beta : float
        Penalty weight, > 0.
    want_gradient : bool
        When true the gradient is computed immediately; otherwise it can
        be completed later via :meth:`PenaltyEval.ensure_gradient`.

    Returns
    -------
    PenaltyEval
    """
    if beta <= 0:
        raise ValueError(f"penalty weight must be positive, got {beta}")
    x = np.asarray(x, dtype=float)
    if x.ndim != 2 or x.shape[1] % 2:
        raise ValueError(f"basis must be 2n-by-2p, got shape {x.shape}")
    ax = op.apply(x)
    add_flops(x.size)
    trace_term = 0.5 * float(np.vdot(x, ax))
    jx = j_left(x)
    violation = _subtract_poisson(symplectic_gram(x, jx=jx))
    add_flops(violation.size)
    feasibility = float(np.linalg.norm(violation))
    value = trace_term + 0.25 * beta * feasibility * feasibility
    ev = PenaltyEval(float(beta), value, trace_term, feasibility, ax, jx, violation)
    if want_gradient:
        ev.ensure_gradient()
    return ev


def objective(op, x, beta):
    """f_beta(X); one operator application plus one Gram product."""
    return evaluate(op, x, beta).value


def grad(op, x, beta):
    """Evaluate f_beta and its gradient; shares the code path of
    :func:`objective`, so the value matches it bit for bit."""
    return evaluate(op, x, beta, want_gradient=True)


def hess_quadform(op, x, y, beta):
    """Second directional derivative of f_beta at X along Y.

    Returns
    -------
    float
        tr(Y^T A Y) - beta tr((Y^T J_n Y)(X^T J_n X - J_p))
        + (beta/2) ||Y^T J_n X + X^T J_n Y||_F^2.
    """
    if beta <= 0:
        raise ValueError(f"penalty weight must be positive, got {beta}")
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.shape != y.shape:
        raise ValueError(f"direction shape {y.shape} does not match X {x.shape}")
    ay = op.apply(y)
    term_a = float(np.vdot(y, ay))
    jx = j_left(x)
    jy = j_left(y)
    gram_y = symplectic_gram(y, jx=jy)
    violation = _subtract_poisson(symplectic_gram(x, jx=jx))
    # tr(M N) for the two skew factors
    term_b = -beta * float(np.sum(gram_y * violation.T))
    cross = y.T @ jx
    sym_cross = cross - cross.T  # Y^T J X + X^T J Y
    term_c = 0.5 * beta * float(np.vdot(sym_cross, sym_cross))
    return term_a + term_b + term_c


def construct_stationary_point(shat, dhat, p, t, beta):
    """Assemble a first-order stationary point of f_beta from symplectic
    eigenpairs.

    Parameters
    ----------
    shat : ndarray, shape (2n, 2q)
        Symplectic eigenvector pairs, Shat^T A Shat = diag(dhat, dhat).
    dhat : array_like, length q
        Their symplectic eigenvalues, each < beta.
    p : int
        Column pair count of the output (q <= p; missing pairs are
        zero-padded).
    t : ndarray or None
        Optional 2p-by-2p orthosymplectic right factor.
    beta : float

    Returns
    -------
    ndarray, shape (2n, 2p)
        [Shat_1 W, 0, Shat_2 W, 0] T^T with W = (I - diag(dhat)/beta)^(1/2).
    """
    shat = np.asarray(shat, dtype=float)
    dhat = np.atleast_1d(np.asarray(dhat, dtype=float))
    q = dhat.size
    if shat.ndim != 2 or shat.shape[1] != 2 * q:
        raise ValueError(f"eigenpair block has shape {shat.shape}, need 2n x {2 * q}")
    if q > p:
        raise ValueError(f"got q={q} eigenpairs for p={p} output pairs")
    if dhat.min() <= 0:
        raise ValueError("symplectic eigenvalues must be positive")
    if beta <= dhat.max():
        raise ValueError(
            f"beta={beta} must exceed every prescribed eigenvalue (max {dhat.max()})"
        )
    w = np.sqrt(1.0 - dhat / beta)
    x = np.zeros((shat.shape[0], 2 * p))
    x[:, :q] = shat[:, :q] * w
    x[:, p : p + q] = shat[:, q:] * w
    if t is None:
        return x
    t = np.asarray(t, dtype=float)
    if t.shape != (2 * p, 2 * p):
        raise ValueError(f"right factor must be {2 * p} x {2 * p}, got {t.shape}")
    return x @ t.T
