"""Self-expressive and neighborhood clustering backends.

Every solver takes a D x N matrix whose columns are the data points and
returns an N x N representation or affinity matrix. SSC and LRR are
iterative convex programs (ADMM / inexact ALM); NSN and RTSC are greedy
neighborhood constructions. All are deterministic.
"""

from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import cho_factor, cho_solve

from .errors import ConvergenceError, DegenerateDataError, ParameterError

_REQUIRED_PARAMS = {
    "SSC": ("alpha",),
    "LRR": ("lambda",),
    "NSN": ("k", "d_max"),
    "RTSC": ("q",),
}

_DEFAULT_MAX_ITER = {"SSC": 200, "LRR": 500, "NSN": 0, "RTSC": 0}


@dataclass(frozen=True)
class SolverSpec:
    """Declarative solver choice: kind, parameters, and stopping rule."""

    kind: str
    params: dict = field(default_factory=dict)
    tol: float = 1e-6
    max_iter: int | None = None

    def __post_init__(self):
        if self.kind not in _REQUIRED_PARAMS:
            raise ParameterError(f"unknown solver kind {self.kind!r}")
        for key in _REQUIRED_PARAMS[self.kind]:
            if key not in self.params:
                raise ParameterError(f"{self.kind} requires parameter {key!r}")
            if key in ("alpha", "lambda", "k", "d_max", "q") and self.params[key] <= 0:
                raise ParameterError(f"{self.kind} parameter {key!r} must be positive")
        if self.kind == "NSN" and self.params["d_max"] > self.params["k"]:
            raise ParameterError("NSN needs d_max <= k")
        if self.tol <= 0:
            raise ParameterError("tol must be positive")
        if self.max_iter is None:
            object.__setattr__(self, "max_iter", _DEFAULT_MAX_ITER[self.kind])

    def solve(self, X):
        """Run the configured solver on a column-data matrix."""
        p = self.params
        if self.kind == "SSC":
            return solve_ssc(X, p["alpha"], mode=p.get("mode", "noise"),
                             affine=bool(p.get("affine", False)),
                             tol=self.tol, max_iter=self.max_iter)
        if self.kind == "LRR":
            return solve_lrr(X, p["lambda"], tol=self.tol, max_iter=self.max_iter)
        if self.kind == "NSN":
            return solve_nsn(X, int(p["k"]), int(p["d_max"]))
        return solve_rtsc(X, int(p["q"]))


def _soft(M, tau):
    return np.sign(M) * np.maximum(np.abs(M) - tau, 0.0)


def _coherence_floor(X):
    """mu_e = min_i max_{j != i} |x_i' x_j|, the SSC lambda scale."""
    G = np.abs(X.T @ X)
    np.fill_diagonal(G, -np.inf)
    return float(G.max(axis=1).min())


def solve_ssc(X, alpha, mode="noise", affine=False, tol=1e-6, max_iter=200,
              objective_trace=None):
    """Sparse subspace clustering by ADMM.

    Solves min ||C||_1 + (lam/2) ||X - XC||_F^2 s.t. diag(C) = 0, with
    lam = alpha / mu_e and mu_e = min_i max_{j!=i} |x_i' x_j|. The ADMM
    penalty is held fixed at lam. ``affine`` adds the constraint
    1'C = 1'; ``mode='outlier'`` adds an l1 error term E (threshold
    alpha / min_i max_{j!=i} ||x_j||_1) so that X ~ XC + E.

    Parameters
    ----------
    X : (D, N) array with unit-norm columns.
    alpha : float, regularization strength relative to the coherence floor.
    mode : 'noise' or 'outlier'.
    affine : bool, add the affine-combination constraint.
    tol : float, stop when the primal residual inf-norm drops below this.
    max_iter : int.
    objective_trace : optional list; per-iteration objective values
        evaluated at the sparse iterate are appended to it.

    Returns
    -------
    (N, N) representation matrix with an exactly zero diagonal.
    """
    X = np.asarray(X, dtype=np.float64)
    N = X.shape[1]
    if N < 2:
        raise ParameterError("SSC needs at least two columns")
    if mode not in ("noise", "outlier"):
        raise ParameterError(f"unknown SSC mode {mode!r}")
    mu_e = _coherence_floor(X)
    if mu_e == 0.0:
        raise DegenerateDataError(
            "all columns mutually orthogonal; self-expression is degenerate"
        )
    lam = alpha / mu_e
    rho = lam
    XtX = X.T @ X
    M = lam * XtX + rho * np.eye(N)
    if affine:
        M += rho * np.ones((N, N))
    factor = cho_factor(M)

    lam_err = None
    if mode == "outlier":
        norms1 = np.sort(np.abs(X).sum(axis=0))[::-1]
        mu_err = norms1[1] if N > 1 else norms1[0]
        if mu_err == 0.0:
            raise DegenerateDataError("data has no mass for the outlier term")
        lam_err = alpha / mu_err

    C = np.zeros((N, N))
    E = np.zeros_like(X)
    Lam = np.zeros((N, N))
    delta = np.zeros(N)
    ones = np.ones((N, N))
    for _ in range(max_iter):
        rhs = lam * (X.T @ (X - E)) + rho * C - Lam
        if affine:
            rhs += rho * ones - np.outer(np.ones(N), delta)
        A = cho_solve(factor, rhs)
        C = _soft(A + Lam / rho, 1.0 / rho)
        np.fill_diagonal(C, 0.0)
        if mode == "outlier":
            E = _soft(X - X @ A, lam_err / lam)
        Lam += rho * (A - C)
        res = np.abs(A - C).max()
        if affine:
            aff_res = np.abs(A.sum(axis=0) - 1.0).max()
            delta += rho * (A.sum(axis=0) - 1.0)
            res = max(res, aff_res)
        if objective_trace is not None:
            obj = np.abs(C).sum() + 0.5 * lam * np.sum((X - X @ C - E) ** 2)
            if mode == "outlier":
                obj += lam_err * np.abs(E).sum()
            objective_trace.append(float(obj))
        if res < tol:
            break
    np.fill_diagonal(C, 0.0)
    return C


def _svt(M, tau):
    U, s, Vt = np.linalg.svd(M, full_matrices=False)
    keep = s > tau
    if not np.any(keep):
        return np.zeros_like(M)
    return (U[:, keep] * (s[keep] - tau)) @ Vt[keep]


def _shrink_columns(M, tau):
    norms = np.linalg.norm(M, axis=0)
    scale = np.maximum(0.0, 1.0 - tau / np.where(norms > 0, norms, 1.0))
    return M * scale


def solve_lrr(X, lam, tol=1e-6, max_iter=500, objective_trace=None):
    """Low-rank representation by inexact ALM.

    Solves min ||Z||_* + lam ||E||_{2,1} s.t. X = XZ + E (column-wise
    l2,1 norm: corrupted samples). Returns the singular-value-thresholded
    iterate, so trailing singular values of the result are exactly zero.
    Raises ConvergenceError (with residuals) if max_iter is exhausted.

    If ``objective_trace`` is a list, the original objective evaluated at
    the feasible point induced by the low-rank iterate (E := X - XJ) is
    appended each iteration.
    """
    X = np.asarray(X, dtype=np.float64)
    N = X.shape[1]
    if N < 2:
        raise ParameterError("LRR needs at least two columns")
    if lam <= 0:
        raise ParameterError("lambda must be positive")
    if max_iter < 1:
        raise ParameterError("max_iter must be >= 1")
    mu, rho, mu_max = 1e-3, 1.1, 1e10
    XtX = X.T @ X
    factor = cho_factor(XtX + np.eye(N))
    Z = np.zeros((N, N))
    J = np.zeros((N, N))
    E = np.zeros_like(X)
    Y1 = np.zeros_like(X)
    Y2 = np.zeros((N, N))
    for _ in range(max_iter):
        J = _svt(Z + Y2 / mu, 1.0 / mu)
        Z = cho_solve(factor, XtX - X.T @ E + J + (X.T @ Y1 - Y2) / mu)
        E = _shrink_columns(X - X @ Z + Y1 / mu, lam / mu)
        res_data = X - X @ Z - E
        Y1 += mu * res_data
        Y2 += mu * (Z - J)
        mu = min(mu * rho, mu_max)
        if objective_trace is not None:
            nuc = float(np.linalg.svd(J, compute_uv=False).sum())
            feas = X - X @ J
            objective_trace.append(nuc + lam * float(np.linalg.norm(feas, axis=0).sum()))
        r1 = np.abs(X - X @ J - E).max()
        r2 = np.abs(Z - J).max()
        if max(r1, r2) < tol:
            return J
    raise ConvergenceError(
        f"LRR did not converge in {max_iter} iterations",
        residuals={"data": r1, "coupling": r2},
    )


def solve_nsn(X, k, d_max):
    """Nearest subspace neighbor affinity.

    For each point, greedily grows an orthonormal basis starting from the
    point itself: each step adds the point with the largest projection
    norm onto the current span, extending the span until it reaches d_max
    dimensions. The k selected neighbors per point give a binary affinity,
    OR-symmetrized, zero diagonal.
    """
    X = np.asarray(X, dtype=np.float64)
    N = X.shape[1]
    if not 1 <= d_max <= k < N:
        raise ParameterError("need 1 <= d_max <= k < N")
    W = np.zeros((N, N))
    for i in range(N):
        xi = X[:, i]
        nrm = np.linalg.norm(xi)
        if nrm == 0.0:
            raise DegenerateDataError(f"zero column {i}")
        Q = (xi / nrm)[:, None]
        taken = np.zeros(N, dtype=bool)
        taken[i] = True
        for _ in range(k):
            proj = np.linalg.norm(Q.T @ X, axis=0)
            proj[taken] = -np.inf
            j = int(np.argmax(proj))
            taken[j] = True
            W[i, j] = 1.0
            if Q.shape[1] < d_max:
                r = X[:, j] - Q @ (Q.T @ X[:, j])
                rn = np.linalg.norm(r)
                if rn > 1e-10:
                    Q = np.hstack([Q, (r / rn)[:, None]])
    W = np.maximum(W, W.T)
    np.fill_diagonal(W, 0.0)
    return W


def solve_rtsc(X, q):
    """Robust thresholding affinity on the angular q-nearest-neighbor graph.

    Distances are s(x_i, x_j) = arccos(|<x_i, x_j>|) on unit-norm columns;
    the q nearest neighbors of each point get edge weight |<x_i, x_j>|,
    max-symmetrized, zero diagonal.
    """
    X = np.asarray(X, dtype=np.float64)
    N = X.shape[1]
    if not 1 <= q < N:
        raise ParameterError("need 1 <= q < N")
    S = np.clip(np.abs(X.T @ X), 0.0, 1.0)
    angle = np.arccos(S)
    np.fill_diagonal(angle, np.inf)
    W = np.zeros((N, N))
    # stable sort: ties resolved toward smaller index
    order = np.argsort(angle, axis=1, kind="stable")[:, :q]
    rows = np.repeat(np.arange(N), q)
    W[rows, order.ravel()] = S[rows, order.ravel()]
    W = np.maximum(W, W.T)
    np.fill_diagonal(W, 0.0)
    return W
