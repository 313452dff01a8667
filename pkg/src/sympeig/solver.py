"""Penalty-based solvers for the p smallest symplectic eigenvalues.

`solve_basic` is a fixed-penalty BB gradient iteration with the
nonmonotone line search.  `solve` wraps it in an outer loop that
randomizes the step, refines the iterate by symplectic Rayleigh-Ritz,
adapts the penalty weight from the Ritz values, restarts from the
scaled eigenbasis, and tightens the inner tolerance geometrically.
"""

import time
from collections import deque
from dataclasses import dataclass, field, fields
from enum import Enum

import numpy as np

from .errors import NumericalFailure, RankDeficientError
from .factor import restart_point, srr
from .metrics import residue
from .operators import canonical_frame, poisson, symplectic_gram
from .penalty import evaluate
from .stepper import StepState, bb_step, clamp_randomize, gll_search

# reference penalty weight as a multiple of the target eigenvalue
BETA_BEST_FACTOR = (3.0 + np.sqrt(5.0)) / 2.0

_EPS_FLOOR = 1e-14


class SolveStatus(Enum):
    CONVERGED = "converged"
    MAX_ITERATIONS = "max_iterations"
    NUMERICAL_FAILURE = "numerical_failure"


@dataclass
class SolverParams:
    """Tuning knobs of both solver variants.

    `beta0=None` resolves to the trace heuristic :func:`beta_suggest`.
    `eps0` is the first inner gradient tolerance; the enhanced solver
    uses it relative to max(1, ||A X||_F) and shrinks it by `delta_eps`
    per outer stage, while the basic solver reads it as an absolute
    target.  `window` is the nonmonotone memory L, `lam` and `delta`
    the line-search weights, and `tol` the final residual target of the
    enhanced solver.
    """

    beta0: float = None
    gamma0: float = 1e-4
    gamma_lo: float = 1e-8
    gamma_hi: float = 1e5
    xi_lo: float = 0.99
    xi_hi: float = 1.0
    k_max: int = 5000
    eps0: float = 0.1
    delta_eps: float = 0.1
    delta: float = 0.5
    lam: float = 1e-8
    window: int = 50
    eta: float = 1.1
    outer_max: int = 20
    tol: float = 1e-8
    seed: int = 0
    rank_safeguard: bool = False

    def validate(self):
        if not 0 < self.gamma_lo <= self.gamma0 <= self.gamma_hi:
            raise ValueError(
                f"need 0 < gamma_lo <= gamma0 <= gamma_hi, got "
                f"({self.gamma_lo}, {self.gamma0}, {self.gamma_hi})"
            )
        if not (0 < self.delta < 1 and 0 < self.lam < 1):
            raise ValueError("delta and lam must lie in (0, 1)")
        if not 0 < self.delta_eps < 1:
            raise ValueError(f"delta_eps must lie in (0, 1), got {self.delta_eps}")
        if not 0 < self.xi_lo <= self.xi_hi:
            raise ValueError(f"invalid xi bounds ({self.xi_lo}, {self.xi_hi})")
        if self.eta <= 1:
            raise ValueError(f"eta must exceed 1, got {self.eta}")
        if self.eps0 <= 0 or self.tol <= 0:
            raise ValueError("tolerances must be positive")
        if self.k_max < 1 or self.outer_max < 1 or self.window < 0:
            raise ValueError("iteration limits must be positive")
        if self.beta0 is not None and self.beta0 <= 0:
            raise ValueError(f"beta0 must be positive, got {self.beta0}")
        return self

    @classmethod
    def from_dict(cls, mapping):
        known = {f.name for f in fields(cls)}
        unknown = set(mapping) - known
        if unknown:
            raise ValueError(f"unknown solver parameter(s): {sorted(unknown)}")
        return cls(**mapping).validate()


@dataclass
class InnerStep:
    """One accepted descent step (one row of the iteration trace)."""

    k: int
    stage: int
    f: float
    gnorm: float
    gamma: float
    t: int
    beta: float
    window_max: float
    capped: bool
    safeguarded: bool = False


@dataclass
class OuterStage:
    """One outer stage: the beta/eps used, Ritz values found, and the
    rank margin sigma_min/sigma_max of the restart it produced."""

    stage: int
    beta: float
    eps: float
    theta: np.ndarray
    reached: bool
    inner_iters: int
    residue: float
    sigma_ratio: float
    elapsed: float


@dataclass
class SolveTrace:
    inner: list = field(default_factory=list)
    outer: list = field(default_factory=list)


@dataclass
class SympEigResult:
    """Solver output: eigenvalues ascending, eigenbasis columns paired
    as [first halves | second halves], and the full iteration trace."""

    eigenvalues: np.ndarray
    eigenbasis: np.ndarray
    x_final: np.ndarray
    status: SolveStatus
    trace: SolveTrace
    beta_final: float
    residue: float
    feasibility: float
    inner_iterations: int
    outer_iterations: int
    elapsed: float


def beta_suggest(op, p):
    """Penalty weight heuristic tr(A)/(n - p + 1).

    Always at least twice the p-th symplectic eigenvalue, so the
    penalty is exact without knowing the spectrum.
    """
    n = op.n
    if not 1 <= p < n:
        raise ValueError(f"need 1 <= p < n, got p={p}, n={n}")
    return op.trace() / (n - p + 1)


def beta_best(d_p):
    """Reference penalty weight (3 + sqrt(5))/2 * d_p; needs the target
    eigenvalue d_p, so it is a diagnostic rather than a default."""
    return BETA_BEST_FACTOR * float(d_p)


def rank_safeguard(x, g, gamma):
    """Optionally cap the step so the next iterate keeps full column rank.

    Returns min(gamma, 0.9 * sigma_min(X) / ||G||_2).  Off by default in
    the solvers; the randomized step already preserves rank almost surely.
    """
    w = np.linalg.eigvalsh(x.T @ x)
    sigma_min = np.sqrt(max(float(w[0]), 0.0))
    gnorm2 = float(np.linalg.norm(g, 2))
    if gnorm2 == 0.0:
        return gamma
    return min(gamma, 0.9 * sigma_min / gnorm2)


def _run_inner(op, x, beta, eps, params, rng, trace, stage, relative_stop, randomize):
    """BB/GLL descent until the gradient test or k_max; returns the last
    iterate with its evaluation and whether the tolerance was reached."""

    def f_eval(xt):
        ev_t = evaluate(op, xt, beta)
        return ev_t.value, ev_t

    ev = evaluate(op, x, beta)
    g = ev.ensure_gradient()
    gnorm = float(np.linalg.norm(g))
    window = deque([ev.value], maxlen=params.window + 1)
    s_prev = None
    z_prev = None
    k_base = len(trace.inner)
    reached = False
    iters = 0
    for k in range(params.k_max):
        limit = eps * max(1.0, float(np.linalg.norm(ev.ax))) if relative_stop else eps
        if gnorm < limit:
            reached = True
            break
        if k == 0:
            gamma = params.gamma0
        else:
            gamma = bb_step(StepState(s_prev, z_prev, k, window, rng), params.gamma_hi)
            if randomize:
                gamma = clamp_randomize(
                    gamma, params.gamma_lo, params.gamma_hi,
                    params.xi_lo, params.xi_hi, rng,
                )
            else:
                gamma = min(max(gamma, params.gamma_lo), params.gamma_hi)
        safeguarded = False
        if params.rank_safeguard:
            capped_gamma = rank_safeguard(x, g, gamma)
            safeguarded = capped_gamma < gamma
            gamma = capped_gamma
        ls = gll_search(f_eval, x, g, gamma, params.delta, params.lam, window)
        ev_new = ls.aux
        g_new = ev_new.ensure_gradient()
        s_prev = ls.x - x
        z_prev = g_new - g
        x, ev, g = ls.x, ev_new, g_new
        gnorm = float(np.linalg.norm(g))
        window.append(ev.value)
        trace.inner.append(
            InnerStep(k_base + iters, stage, ev.value, gnorm, gamma, ls.t,
                      beta, max(window), ls.capped, safeguarded)
        )
        iters += 1
    return x, ev, gnorm, reached, iters


def solve_basic(op, x0, beta, params=None):
    """Fixed-penalty descent (basic variant).

    Iterates X <- X - delta^t gamma G with the alternating BB step,
    clamped but not randomized, until ||G||_F < eps0 (absolute) or
    k_max steps.

    Returns
    -------
    (x, trace) : final iterate and the iteration trace.

    Raises
    ------
    NumericalFailure
        If the objective turns non-finite during the line search.
    """
    params = (params or SolverParams()).validate()
    if beta <= 0:
        raise ValueError(f"penalty weight must be positive, got {beta}")
    x0 = np.array(x0, dtype=float)
    rng = np.random.default_rng(params.seed)
    trace = SolveTrace()
    start = time.perf_counter()
    x, ev, gnorm, reached, iters = _run_inner(
        op, x0, beta, params.eps0, params, rng, trace,
        stage=0, relative_stop=False, randomize=False,
    )
    trace.outer.append(
        OuterStage(0, float(beta), params.eps0, None, reached, iters,
                   float("nan"), None, time.perf_counter() - start)
    )
    return x, trace


def solve(op, p, params=None):
    """Compute the p smallest symplectic eigenvalues and eigenbasis of A.

    Enhanced variant: randomized clamped BB steps inside a stage,
    symplectic Rayleigh-Ritz extraction at the end of each stage,
    penalty update beta <- eta * theta_p (floored at
    (3+sqrt(5))/2 * theta_p whenever the update would fall below a
    tenth of the previous beta), restart from S (I - D/beta)^(1/2), and
    a geometric inner-tolerance schedule.  Stops once the relative
    eigen-residual of the refined basis drops to `params.tol`.

    Returns
    -------
    SympEigResult
        Status CONVERGED, MAX_ITERATIONS (outer budget exhausted), or
        NUMERICAL_FAILURE (non-finite objective, or rank-deficient
        iterate that a re-randomized retry could not repair).
    """
    params = (params or SolverParams()).validate()
    n = op.n
    if not 1 <= p < n:
        raise ValueError(f"need 1 <= p < n, got p={p}, n={n}")
    rng = np.random.default_rng(params.seed)
    beta = params.beta0 if params.beta0 is not None else beta_suggest(op, p)
    trace = SolveTrace()
    x = canonical_frame(n, p)
    eps = params.eps0
    status = SolveStatus.MAX_ITERATIONS
    s_fin = None
    d_fin = None
    resid = float("nan")
    start = time.perf_counter()
    try:
        for stage in range(params.outer_max):
            stage_start = time.perf_counter()
            stage_beta = beta
            x, ev, gnorm, reached, iters = _run_inner(
                op, x, beta, eps, params, rng, trace,
                stage=stage, relative_stop=True, randomize=True,
            )
            try:
                s_fin, d_fin = srr(op, x)
            except RankDeficientError:
                # one retry from a re-randomized perturbation
                scale = 1e-8 * max(float(np.linalg.norm(x)), 1e-30)
                x = x + scale / np.sqrt(x.size) * rng.standard_normal(x.shape)
                s_fin, d_fin = srr(op, x)
            resid = residue(op, s_fin, d_fin)
            elapsed = time.perf_counter() - stage_start
            if resid <= params.tol:
                x = restart_point(s_fin, d_fin, beta)
                trace.outer.append(
                    OuterStage(stage, stage_beta, eps, d_fin.copy(), reached,
                               iters, resid, None, elapsed)
                )
                status = SolveStatus.CONVERGED
                break
            theta_p = float(d_fin[-1])
            new_beta = params.eta * theta_p
            if new_beta < beta / 10.0:
                new_beta = BETA_BEST_FACTOR * theta_p
            beta = new_beta
            x = restart_point(s_fin, d_fin, beta)
            sv = np.linalg.svd(x, compute_uv=False)
            trace.outer.append(
                OuterStage(stage, stage_beta, eps, d_fin.copy(), reached, iters,
                           resid, float(sv[-1] / sv[0]), elapsed)
            )
            eps = max(eps * params.delta_eps, _EPS_FLOOR)
    except (NumericalFailure, RankDeficientError):
        status = SolveStatus.NUMERICAL_FAILURE
    # feasibility of the returned eigenbasis, not of the penalty iterate
    # (the latter sits at the minimizer with violation -D/beta by design)
    basis = s_fin if s_fin is not None else x
    if basis is not None and basis.size:
        gram = symplectic_gram(basis)
        feasibility = float(np.linalg.norm(gram - poisson(basis.shape[1] // 2)))
    else:
        feasibility = float("nan")
    return SympEigResult(
        eigenvalues=None if d_fin is None else d_fin.copy(),
        eigenbasis=s_fin,
        x_final=x,
        status=status,
        trace=trace,
        beta_final=float(beta),
        residue=float(resid),
        feasibility=feasibility,
        inner_iterations=len(trace.inner),
        outer_iterations=len(trace.outer),
        elapsed=time.perf_counter() - start,
    )
