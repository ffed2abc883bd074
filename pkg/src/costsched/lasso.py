"""L1-penalized logistic regression over a decreasing lambda grid.

Each class is fit one-vs-rest by cyclic coordinate descent on internally
standardized features, minimizing mean negative log-likelihood plus an L1
penalty (intercept unpenalized).  Each coordinate step uses the global
curvature bound 1/4 of the logistic loss, so every sweep is a
majorize-minimize step and the penalized objective never increases.
Solutions are warm-started along the grid and checked against the KKT
conditions before being stored.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass

import numpy as np
from numba import njit

from .errors import (
    ConvergenceFailure,
    DegenerateLabels,
    DimensionMismatch,
)

KKT_TOL = 1e-4
ZERO_TOL = 1e-8
MAX_UPDATES = 2_000_000


@dataclass(frozen=True)
class LambdaGrid:
    lambdas: np.ndarray

    def __post_init__(self):
        lam = np.asarray(self.lambdas, dtype=float)
        if lam.ndim != 1 or lam.size == 0:
            raise ValueError("lambda grid must be a non-empty 1-D sequence")
        if np.any(lam <= 0) or np.any(np.diff(lam) >= 0):
            raise ValueError("lambda grid must be strictly decreasing and positive")
        object.__setattr__(self, "lambdas", lam)

    @property
    def n_lambda(self) -> int:
        return len(self.lambdas)


def _standardize(X):
    X = np.asarray(X, dtype=float)
    mean = X.mean(axis=0)
    scale = X.std(axis=0)
    scale = np.where(scale == 0.0, 1.0, scale)
    return (X - mean) / scale, mean, scale


def _class_indicators(y):
    y = np.asarray(y)
    if y.ndim != 1:
        raise DimensionMismatch("y must be 1-D")
    if y.min() < 1:
        raise ValueError("labels must be 1-based positive integers")
    n_classes = int(y.max())
    if len(np.unique(y)) < 2:
        raise DegenerateLabels("labels are constant")
    return [(y == j + 1).astype(float) for j in range(n_classes)]


def make_lambda_grid(X, y, n_lambda=100, eps_ratio=1e-3) -> LambdaGrid:
    """Geometric grid from lambda_max down to eps_ratio * lambda_max.

    lambda_max is the smallest penalty at which every one-vs-rest problem
    has the all-zero coefficient vector as its solution, read off the KKT
    conditions at the intercept-only fit.
    """
    Xs, _, _ = _standardize(X)
    n = Xs.shape[0]
    lam_max = 0.0
    for yb in _class_indicators(y):
        g = np.abs(Xs.T @ (yb - yb.mean())) / n
        lam_max = max(lam_max, float(g.max()))
    if lam_max <= 0:
        raise DegenerateLabels("all features are uninformative at zero")
    if n_lambda == 1:
        return LambdaGrid(np.array([lam_max]))
    return LambdaGrid(np.geomspace(lam_max, eps_ratio * lam_max, n_lambda))


@njit(cache=True)
def _cd_solve(XsT, yb, lam, beta, b0_init, kkt_tol, max_updates, max_sweeps):
    """Cyclic coordinate descent at one lambda; mutates beta in place.

    Returns (b0, n_updates, converged, kkt_residual)."""
    p, n = XsT.shape
    b0 = b0_init
    eta = np.empty(n)
    for i in range(n):
        s = b0
        for j in range(p):
            s += XsT[j, i] * beta[j]
        eta[i] = s
    mu = np.empty(n)
    for i in range(n):
        mu[i] = 1.0 / (1.0 + np.exp(-eta[i]))
    updates = 0
    sweeps = 0
    while True:
        # intercept step (unpenalized)
        g0 = 0.0
        for i in range(n):
            g0 += mu[i] - yb[i]
        g0 /= n
        d0 = -g0 / 0.25
        if d0 != 0.0:
            b0 += d0
            for i in range(n):
                eta[i] += d0
                mu[i] = 1.0 / (1.0 + np.exp(-eta[i]))
        updates += 1
        for j in range(p):
            gj = 0.0
            for i in range(n):
                gj += XsT[j, i] * (mu[i] - yb[i])
            gj /= n
            z = beta[j] - gj / 0.25
            t = lam / 0.25
            if z > t:
                new = z - t
            elif z < -t:
                new = z + t
            else:
                new = 0.0
            d = new - beta[j]
            if d != 0.0:
                beta[j] = new
                for i in range(n):
                    eta[i] += XsT[j, i] * d
                    mu[i] = 1.0 / (1.0 + np.exp(-eta[i]))
            updates += 1
        sweeps += 1
        # KKT residual of the current iterate
        resid = 0.0
        g0 = 0.0
        for i in range(n):
            g0 += mu[i] - yb[i]
        g0 = abs(g0) / n
        if g0 > resid:
            resid = g0
        for j in range(p):
            gj = 0.0
            for i in range(n):
                gj += XsT[j, i] * (mu[i] - yb[i])
            gj /= n
            if beta[j] > 0.0:
                r = abs(gj + lam)
            elif beta[j] < 0.0:
                r = abs(gj - lam)
            else:
                r = abs(gj) - lam
                if r < 0.0:
                    r = 0.0
            if r > resid:
                resid = r
        if resid <= 0.5 * kkt_tol:
            return b0, updates, True, resid
        if updates >= max_updates or sweeps >= max_sweeps:
            return b0, updates, False, resid


@dataclass(frozen=True)
class PathCoefficients:
    """Coefficient tensor (J, p, n_lambda) on the original feature scale,
    with the standardized-scale copy kept for active-set queries."""

    theta: np.ndarray
    intercepts: np.ndarray
    theta_std: np.ndarray
    intercepts_std: np.ndarray
    lambdas: np.ndarray
    feature_mean: np.ndarray
    feature_scale: np.ndarray
    zero_tol: float = ZERO_TOL

    @property
    def n_classes(self) -> int:
        return self.theta.shape[0]

    @property
    def p(self) -> int:
        return self.theta.shape[1]

    @property
    def n_lambda(self) -> int:
        return self.theta.shape[2]


def fit_l1_logistic_path(X, y, grid: LambdaGrid, kkt_tol=KKT_TOL,
                         max_iters=MAX_UPDATES,
                         zero_tol=ZERO_TOL) -> PathCoefficients:
    Xs, mean, scale = _standardize(X)
    XsT = np.ascontiguousarray(Xs.T)
    n, p = Xs.shape
    lambdas = grid.lambdas
    r = len(lambdas)
    indicators = _class_indicators(y)
    J = len(indicators)

    theta_std = np.zeros((J, p, r))
    b0_std = np.zeros((J, r))
    for j, yb in enumerate(indicators):
        ybar = min(max(yb.mean(), 1e-12), 1 - 1e-12)
        beta = np.zeros(p)
        b0 = float(np.log(ybar / (1 - ybar)))
        # the first grid point is lambda_max: the intercept-only fit is the
        # exact solution there, keep coefficients identically zero
        theta_std[j, :, 0] = beta
        b0_std[j, 0] = b0
        for k in range(1, r):
            b0, updates, ok, resid = _cd_solve(
                XsT, yb, lambdas[k], beta, b0, kkt_tol, max_iters,
                np.int64(2**62))
            if not ok:
                raise ConvergenceFailure(
                    j + 1, lambdas[k],
                    f"KKT residual {resid:.3g} after {updates} updates")
            theta_std[j, :, k] = beta
            b0_std[j, k] = b0

    theta = theta_std / scale[None, :, None]
    intercepts = b0_std - np.einsum("jkr,k->jr", theta_std, mean / scale)
    return PathCoefficients(theta, intercepts, theta_std, b0_std,
                            lambdas.copy(), mean, scale, zero_tol)


def active_variables(path: PathCoefficients, step: int) -> frozenset[int]:
    """Union over classes of variables with a nonzero coefficient at the
    (1-based) grid step; nonzero is judged on the standardized scale."""
    if not 1 <= step <= path.n_lambda:
        raise IndexError(f"step {step} outside 1..{path.n_lambda}")
    mask = np.any(np.abs(path.theta_std[:, :, step - 1]) > path.zero_tol,
                  axis=0)
    return frozenset(int(i) + 1 for i in np.nonzero(mask)[0])


def predict_logistic(path: PathCoefficients, step: int, x) -> int | np.ndarray:
    """One-vs-rest argmax of the class linear scores; ties toward the
    smaller label."""
    if not 1 <= step <= path.n_lambda:
        raise IndexError(f"step {step} outside 1..{path.n_lambda}")
    x = np.asarray(x, dtype=float)
    single = x.ndim == 1
    X = np.atleast_2d(x)
    if X.shape[1] != path.p:
        raise DimensionMismatch(f"expected {path.p} features, got {X.shape[1]}")
    s = step - 1
    scores = path.intercepts[:, s][None, :] + X @ path.theta[:, :, s].T
    pred = np.argmax(scores, axis=1) + 1  # argmax takes the first (smaller) tie
    return int(pred[0]) if single else pred


def nll_and_gradient(Xs, yb, b0, beta):
    """Mean logistic negative log-likelihood and its gradient
    (d/db0, d/dbeta) at the given parameters."""
    Xs = np.asarray(Xs, dtype=float)
    yb = np.asarray(yb, dtype=float)
    n = Xs.shape[0]
    eta = b0 + Xs @ beta
    nll = float(np.mean(np.logaddexp(0.0, eta) - yb * eta))
    mu = 1.0 / (1.0 + np.exp(-eta))
    g0 = float(np.mean(mu - yb))
    g = Xs.T @ (mu - yb) / n
    return nll, g0, g


def penalized_objective(Xs, yb, b0, beta, lam):
    nll, _, _ = nll_and_gradient(Xs, yb, b0, beta)
    return nll + lam * float(np.sum(np.abs(beta)))


def kkt_residuals(path: PathCoefficients, X, y) -> np.ndarray:
    """Max KKT residual per (class, lambda) slice on the training data."""
    Xs = (np.asarray(X, dtype=float) - path.feature_mean) / path.feature_scale
    indicators = _class_indicators(y)
    out = np.zeros((path.n_classes, path.n_lambda))
    for j, yb in enumerate(indicators):
        for k in range(path.n_lambda):
            beta = path.theta_std[j, :, k]
            b0 = path.intercepts_std[j, k]
            _, g0, g = nll_and_gradient(Xs, yb, b0, beta)
            lam = path.lambdas[k]
            active = np.abs(beta) > 0
            r = np.where(active, np.abs(g + lam * np.sign(beta)),
                         np.maximum(np.abs(g) - lam, 0.0))
            out[j, k] = max(float(np.max(r)), abs(g0))
    return out


def dump_path(path: PathCoefficients, path_or_file) -> None:
    """Delimited dump: step, lambda, class, variable, coefficient
    (original scale)."""
    own = isinstance(path_or_file, (str, bytes)) or hasattr(path_or_file, "__fspath__")
    f = open(path_or_file, "w", newline="") if own else path_or_file
    try:
        w = csv.writer(f, lineterminator="\n")
        w.writerow(["step", "lambda", "class", "variable", "coefficient"])
        for k in range(path.n_lambda):
            for j in range(path.n_classes):
                for i in range(path.p):
                    w.writerow([k + 1, repr(float(path.lambdas[k])), j + 1,
                                i + 1, repr(float(path.theta[j, i, k]))])
    finally:
        if own:
            f.close()
