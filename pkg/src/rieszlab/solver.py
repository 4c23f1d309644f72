"""Cone-constrained quadratic programs over kernel Gram matrices.

Both entry points minimize  q(w) = w'Kw - 2 b'w  for a symmetric positive
definite Gram matrix K, either over the nonnegative orthant or over the
scaled simplex {w >= 0, sum w = total}.  The primary algorithms are
finite active-set methods driven by Cholesky solves; a projected-gradient
fallback takes over when the Gram matrix is too ill-conditioned to
factor reliably.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.linalg import LinAlgError, cho_factor, cho_solve

from .core import GramMatrix
from .errors import IllConditioned

# Condition-number estimate above which Cholesky pivots are no longer
# trusted and the solver switches to projected gradients.
CONDITION_LIMIT = 1e14

TINY = np.finfo(float).tiny


@dataclass(frozen=True)
class QPSolution:
    """Outcome of a cone-constrained quadratic minimization."""

    weights: np.ndarray
    objective: float
    kkt_residual: float
    iterations: int
    converged: bool
    method: str


def _objective(K: np.ndarray, b: np.ndarray, w: np.ndarray) -> float:
    return float(w @ (K @ w) - 2.0 * (b @ w))


def _check_condition(gram: GramMatrix) -> None:
    try:
        cond = gram.condition_estimate()
    except (LinAlgError, np.linalg.LinAlgError) as exc:
        raise IllConditioned("Gram matrix is not positive definite to rounding") from exc
    if cond > CONDITION_LIMIT:
        raise IllConditioned(
            f"Gram matrix condition estimate {cond:.3e} exceeds {CONDITION_LIMIT:.0e}"
        )


def _sub_solve(gram: GramMatrix, mask: np.ndarray, rhs: np.ndarray) -> np.ndarray:
    """Solve K[mask, mask] x = rhs, reusing the cached factor when mask is full."""
    if mask.all():
        return gram.solve(rhs)
    K_sub = gram.entries[np.ix_(mask, mask)]
    try:
        factor = cho_factor(K_sub, lower=True)
    except (LinAlgError, np.linalg.LinAlgError) as exc:
        raise IllConditioned("active-set subproblem lost positive definiteness") from exc
    return cho_solve(factor, rhs)


def _nonneg_kkt_residual(K, b, w) -> float:
    g = 2.0 * (K @ w - b)
    dual = float(np.max(-g, initial=0.0))
    comp = float(np.max(np.abs(w * g) / (1.0 + np.abs(w)), initial=0.0))
    return max(dual, comp, 0.0)


def solve_nonneg(
    gram: GramMatrix,
    b,
    tol: float = 1e-10,
    max_iter: int | None = None,
    allow_fallback: bool = True,
) -> QPSolution:
    """Minimize w'Kw - 2 b'w over w >= 0.

    Uses block principal pivoting: the full free set is tried first, so the
    common case where the unconstrained solution is already nonnegative
    costs a single (cached) Cholesky solve.  When blocks stop making
    progress the exchange degrades to single least-index swaps, which
    terminates finitely.  Convergence is declared when the KKT residual
    drops below ``tol * max(|b|_inf, tiny)``.
    """
    K = gram.entries
    b = np.asarray(b, dtype=float)
    n = len(b)
    if K.shape != (n, n):
        raise ValueError("b length must match the Gram matrix size")
    if max_iter is None:
        max_iter = 50 * n
    tol_eff = tol * max(float(np.max(np.abs(b), initial=0.0)), TINY)

    if n == 1:
        w = np.array([max(b[0] / K[0, 0], 0.0)])
        return QPSolution(
            weights=w,
            objective=_objective(K, b, w),
            kkt_residual=_nonneg_kkt_residual(K, b, w),
            iterations=1,
            converged=True,
            method="block-pivot",
        )

    try:
        _check_condition(gram)
        return _nonneg_block_pivot(gram, K, b, tol_eff, max_iter)
    except IllConditioned:
        if not allow_fallback:
            raise
        return _nonneg_projected_gradient(K, b, tol_eff, max_iter * 40)


def _nonneg_block_pivot(gram, K, b, tol_eff, max_iter) -> QPSolution:
    n = len(b)
    free = np.ones(n, dtype=bool)
    stalls = 0
    best_infeas = np.inf
    single_swap = False
    w = np.zeros(n)

    for it in range(1, max_iter + 1):
        w = np.zeros(n)
        if free.any():
            w[free] = _sub_solve(gram, free, b[free])
        g = 2.0 * (K @ w - b)

        neg_w = free & (w < -tol_eff)
        neg_g = (~free) & (g < -tol_eff)
        infeas = int(neg_w.sum() + neg_g.sum())
        if infeas == 0:
            w = np.maximum(w, 0.0)
            return QPSolution(
                weights=w,
                objective=_objective(K, b, w),
                kkt_residual=_nonneg_kkt_residual(K, b, w),
                iterations=it,
                converged=True,
                method="block-pivot",
            )

        if infeas < best_infeas:
            best_infeas = infeas
            stalls = 0
            single_swap = False
        else:
            stalls += 1
            if stalls >= 3:
                single_swap = True

        if single_swap:
            idx = int(np.flatnonzero(neg_w | neg_g)[0])
            free[idx] = ~free[idx]
        else:
            free[neg_w] = False
            free[neg_g] = True

    w = np.maximum(w, 0.0)
    return QPSolution(
        weights=w,
        objective=_objective(K, b, w),
        kkt_residual=_nonneg_kkt_residual(K, b, w),
        iterations=max_iter,
        converged=False,
        method="block-pivot",
    )


def _nonneg_projected_gradient(K, b, tol_eff, max_iter) -> QPSolution:
    n = len(b)
    w = np.zeros(n)
    residual = np.inf
    it = 0
    for it in range(1, max_iter + 1):
        g = 2.0 * (K @ w - b)
        # Exact minimizer along -g for the unconstrained ray, then project.
        curvature = float(g @ (K @ g))
        if curvature <= 0.0:
            break
        step = float(g @ g) / (2.0 * curvature)
        w = np.maximum(w - step * g, 0.0)
        if it % 16 == 0:
            residual = _nonneg_kkt_residual(K, b, w)
            if residual <= tol_eff:
                break
    residual = _nonneg_kkt_residual(K, b, w)
    return QPSolution(
        weights=w,
        objective=_objective(K, b, w),
        kkt_residual=residual,
        iterations=it,
        converged=bool(residual <= tol_eff),
        method="projected-gradient",
    )


def _simplex_kkt_residual(K, b, w, lam) -> float:
    g = 2.0 * (K @ w - b)
    on = w > 0.0
    stat = float(np.max(np.abs(g[on] - lam), initial=0.0))
    dual = float(np.max(lam - g[~on], initial=0.0))
    return max(stat, dual, 0.0)


def solve_simplex(
    gram: GramMatrix,
    b=None,
    total: float = 1.0,
    tol: float = 1e-10,
    max_iter: int | None = None,
    allow_fallback: bool = True,
) -> QPSolution:
    """Minimize w'Kw - 2 b'w over {w >= 0, sum w = total}.

    Primal active-set iteration starting from the uniform point.  Each
    subproblem restricts to the current support, solves the
    equality-constrained KKT system by two Cholesky solves, and either
    moves there, hits a bound (dropping the blocking coordinate, lowest
    index first), or releases the active coordinate with the most negative
    reduced gradient.  Tolerances scale with max(|lambda|, |b|_inf).
    """
    K = gram.entries
    n = K.shape[0]
    if b is None:
        b = np.zeros(n)
    b = np.atleast_1d(np.asarray(b, dtype=float))
    if b.shape != (n,):
        raise ValueError("b must have one entry per Gram matrix row")
    if not total > 0:
        raise ValueError("total mass must be positive")
    if max_iter is None:
        max_iter = 50 * n

    if n == 1:
        w = np.array([total])
        return QPSolution(
            weights=w,
            objective=_objective(K, b, w),
            kkt_residual=0.0,
            iterations=1,
            converged=True,
            method="active-set",
        )

    try:
        _check_condition(gram)
        return _simplex_active_set(gram, K, b, total, tol, max_iter)
    except IllConditioned:
        if not allow_fallback:
            raise
        return _simplex_projected_gradient(K, b, total, tol, max_iter * 40)


def _simplex_subproblem(gram, mask, b, total):
    """Minimizer on the support ``mask`` with only the mass constraint."""
    ones = np.ones(int(mask.sum()))
    x_b = _sub_solve(gram, mask, b[mask])
    x_1 = _sub_solve(gram, mask, ones)
    denom = float(ones @ x_1)
    lam = 2.0 * (total - float(ones @ x_b)) / denom
    return x_b + 0.5 * lam * x_1, lam


def _simplex_active_set(gram, K, b, total, tol, max_iter) -> QPSolution:
    n = len(b)
    w = np.full(n, total / n)
    support = np.ones(n, dtype=bool)
    lam = 0.0

    for it in range(1, max_iter + 1):
        target_sub, lam = _simplex_subproblem(gram, support, b, total)
        target = np.zeros(n)
        target[support] = target_sub

        if np.all(target_sub >= 0.0):
            w = target
            g = 2.0 * (K @ w - b)
            reduced = lam - g
            reduced[support] = 0.0
            worst = int(np.argmax(reduced))
            scale = max(abs(lam), float(np.max(np.abs(b), initial=0.0)), TINY)
            if reduced[worst] <= tol * scale:
                w = np.maximum(w, 0.0)
                w *= total / w.sum()
                return QPSolution(
                    weights=w,
                    objective=_objective(K, b, w),
                    kkt_residual=_simplex_kkt_residual(K, b, w, lam),
                    iterations=it,
                    converged=True,
                    method="active-set",
                )
            support[worst] = True
            continue

        # Step toward the subproblem minimizer until a coordinate hits zero.
        direction = target - w
        shrinking = support & (direction < 0.0)
        ratios = np.full(n, np.inf)
        ratios[shrinking] = w[shrinking] / -direction[shrinking]
        theta = min(1.0, float(ratios.min()))
        w = w + theta * direction
        blocker = int(np.argmin(ratios))
        w[blocker] = 0.0
        support[blocker] = False
        if not support.any():
            raise RuntimeError("active-set iteration emptied the support")

    w = np.maximum(w, 0.0)
    w *= total / w.sum()
    return QPSolution(
        weights=w,
        objective=_objective(K, b, w),
        kkt_residual=_simplex_kkt_residual(K, b, w, lam),
        iterations=max_iter,
        converged=False,
        method="active-set",
    )


def project_to_simplex(v: np.ndarray, total: float) -> np.ndarray:
    """Euclidean projection onto {w >= 0, sum w = total} (sort-based)."""
    u = np.sort(v)[::-1]
    css = np.cumsum(u) - total
    k = np.arange(1, len(v) + 1)
    valid = u - css / k > 0
    rho = int(np.max(np.flatnonzero(valid))) + 1
    theta = css[rho - 1] / rho
    return np.maximum(v - theta, 0.0)


def _simplex_projected_gradient(K, b, total, tol, max_iter) -> QPSolution:
    n = len(b)
    w = np.full(n, total / n)
    diag = float(np.max(np.diag(K)))
    step = 0.5 / diag
    lam = 0.0
    it = 0
    for it in range(1, max_iter + 1):
        g = 2.0 * (K @ w - b)
        w_new = project_to_simplex(w - step * g, total)
        if float(np.max(np.abs(w_new - w))) <= 1e-16 * total:
            w = w_new
            break
        w = w_new
    g = 2.0 * (K @ w - b)
    on = w > 0
    lam = float(np.mean(g[on])) if on.any() else 0.0
    residual = _simplex_kkt_residual(K, b, w, lam)
    scale = max(abs(lam), float(np.max(np.abs(b), initial=0.0)), TINY)
    return QPSolution(
        weights=w,
        objective=_objective(K, b, w),
        kkt_residual=residual,
        iterations=it,
        converged=bool(residual <= tol * scale),
        method="projected-gradient",
    )
