"""Epsilon-insensitive support vector regression solved by SMO.

The dual is written over ``2m`` variables ``beta = [alpha; alpha*]`` with labels
``s = [+1; -1]``::

    min  1/2 beta' Q beta + p' beta
    s.t. s' beta = 0,  0 <= beta <= C

where ``Q[t, u] = s_t s_u K(x_t, x_u)`` and ``p = [eps - y; eps + y]``. Each
iteration updates the maximal-violating pair chosen with second-order
information and stops once the KKT gap ``max_up(-s G) - min_low(-s G)`` drops
below ``tol``. The fitted function is ``f(x) = sum_i (alpha_i - alpha*_i)
K(x_i, x) + bias``.
"""

from __future__ import annotations

import logging
import warnings
from dataclasses import dataclass

import numpy as np

from ..errors import ParameterError
from .kernels import KernelSpec, kernel_matrix

log = logging.getLogger(__name__)

TAU = 1e-12


class ConvergenceWarning(UserWarning):
    pass


@dataclass(frozen=True)
class SvrModel:
    kernel: KernelSpec
    C: float
    epsilon: float
    dual_coefs: np.ndarray
    bias: float
    support_inputs: np.ndarray
    support_indices: np.ndarray
    converged: bool = True
    n_iter: int = 0
    gap: float = 0.0
    objective_trace: tuple[float, ...] = ()

    @property
    def n_features(self) -> int:
        return self.support_inputs.shape[1]


def _check_xy(X, y):
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=float).ravel()
    if X.ndim != 2 or X.shape[0] != len(y):
        raise ParameterError("X must be (m, d) with one label per row")
    if len(y) < 2:
        raise ParameterError("SVR needs at least two samples")
    if not (np.all(np.isfinite(X)) and np.all(np.isfinite(y))):
        raise ParameterError("NaN or infinite value in training data")
    return X, y


def dual_objective(beta, G, p) -> float:
    """Dual objective in maximisation form, ``-(1/2 beta'Qbeta + p'beta)``."""
    return -0.5 * float(beta @ (G + p))


def train_svr(X, y, kernel: KernelSpec = KernelSpec(), C: float = 1.0, epsilon: float = 0.1,
              tol: float = 1e-3, max_iter: int | None = None) -> SvrModel:
    """Fit an epsilon-SVR.

    ``max_iter`` counts sweeps of ``m`` pair updates each (default ``10 m``).
    Hitting the limit returns the current solution with ``converged=False`` and
    emits a :class:`ConvergenceWarning`.
    """
    X, y = _check_xy(X, y)
    if not C > 0 or epsilon < 0 or not tol > 0:
        raise ParameterError("need C > 0, epsilon >= 0, tol > 0")
    m = len(y)
    sweeps = 10 * m if max_iter is None else int(max_iter)
    K = kernel_matrix(kernel, X)

    idx = np.concatenate([np.arange(m), np.arange(m)])
    sign = np.concatenate([np.ones(m), -np.ones(m)])
    QD = np.diag(K)[idx]
    p = np.concatenate([epsilon - y, epsilon + y])
    beta = np.zeros(2 * m)
    G = p.copy()
    pos = sign > 0

    def q_col(t):
        return sign * sign[t] * K[idx, idx[t]]

    trace = [dual_objective(beta, G, p)]
    converged = False
    it = 0
    gap = np.inf
    limit = sweeps * m
    while it < limit:
        below_c = beta < C
        above_0 = beta > 0
        up = np.where(pos, below_c, above_0)
        low = np.where(pos, above_0, below_c)
        mg = -sign * G
        mg_up = np.where(up, mg, -np.inf)
        i = int(np.argmax(mg_up))
        g_max = mg_up[i]
        mg_low = np.where(low, mg, np.inf)
        g_min = mg_low.min()
        gap = g_max - g_min
        if gap < tol:
            converged = True
            break

        Qi = q_col(i)
        grad_diff = g_max - mg
        cand = low & (grad_diff > 0)
        quad = QD[i] + QD - 2.0 * sign[i] * sign * Qi
        quad = np.where(quad > 0, quad, TAU)
        score = np.where(cand, -(grad_diff ** 2) / quad, np.inf)
        j = int(np.argmin(score))
        Qj = q_col(j)

        old_i, old_j = beta[i], beta[j]
        ai, aj = old_i, old_j
        if sign[i] != sign[j]:
            q = QD[i] + QD[j] + 2.0 * Qi[j]
            delta = (-G[i] - G[j]) / (q if q > 0 else TAU)
            diff = ai - aj
            ai += delta
            aj += delta
            if diff > 0:
                if aj < 0:
                    aj, ai = 0.0, diff
            elif ai < 0:
                ai, aj = 0.0, -diff
            if diff > 0:
                if ai > C:
                    ai, aj = C, C - diff
            elif aj > C:
                aj, ai = C, C + diff
        else:
            q = QD[i] + QD[j] - 2.0 * Qi[j]
            delta = (G[i] - G[j]) / (q if q > 0 else TAU)
            total = ai + aj
            ai -= delta
            aj += delta
            if total > C:
                if ai > C:
                    ai, aj = C, total - C
            elif aj < 0:
                aj, ai = 0.0, total
            if total > C:
                if aj > C:
                    aj, ai = C, total - C
            elif ai < 0:
                ai, aj = 0.0, total
        beta[i], beta[j] = ai, aj
        G += Qi * (ai - old_i) + Qj * (aj - old_j)
        it += 1
        if it % m == 0:
            trace.append(dual_objective(beta, G, p))

    if not converged:
        warnings.warn(f"SVR stopped after {it} updates with KKT gap {gap:.3g} > tol {tol}",
                      ConvergenceWarning, stacklevel=2)
    if it % m:
        trace.append(dual_objective(beta, G, p))

    bias = -_rho(beta, G, sign, C)
    coefs = beta[:m] - beta[m:]
    keep = np.flatnonzero(coefs != 0.0)
    log.debug("svr: %d updates, %d support vectors, gap %.3g", it, len(keep), gap)
    return SvrModel(kernel, float(C), float(epsilon), coefs[keep].copy(), float(bias),
                    X[keep].copy(), keep, converged, it, float(gap), tuple(trace))


def _rho(beta, G, sign, C) -> float:
    yG = sign * G
    at_upper = beta >= C
    at_lower = beta <= 0
    free = ~(at_upper | at_lower)
    if free.any():
        return float(yG[free].mean())
    ub_mask = (at_upper & (sign < 0)) | (at_lower & (sign > 0))
    lb_mask = (at_upper & (sign > 0)) | (at_lower & (sign < 0))
    ub = yG[ub_mask].min() if ub_mask.any() else np.inf
    lb = yG[lb_mask].max() if lb_mask.any() else -np.inf
    return float((ub + lb) / 2)


def predict_svr(model: SvrModel, X) -> np.ndarray:
    X = np.atleast_2d(np.asarray(X, dtype=float))
    if X.shape[1] != model.n_features:
        raise ParameterError(f"model expects {model.n_features} features, got {X.shape[1]}")
    if len(model.dual_coefs) == 0:
        return np.full(X.shape[0], model.bias)
    return kernel_matrix(model.kernel, X, model.support_inputs) @ model.dual_coefs + model.bias


def kkt_violations(model: SvrModel, X, y, full_coefs=None) -> np.ndarray:
    """Per-sample violation of the SVR optimality conditions.

    With residual ``r = y - f(x)`` and coefficient ``a = alpha - alpha*``:
    ``a = 0`` needs ``|r| <= eps``; ``0 < |a| < C`` needs ``r = sign(a) eps``;
    ``|a| = C`` needs ``sign(a) r >= eps``.
    """
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=float)
    if full_coefs is None:
        full_coefs = np.zeros(len(y))
        full_coefs[model.support_indices] = model.dual_coefs
    r = y - predict_svr(model, X)
    eps, C = model.epsilon, model.C
    a = full_coefs
    sgn = np.sign(a)
    at_c = np.abs(a) >= C * (1 - 1e-12)
    viol = np.where(
        a == 0,
        np.maximum(0.0, np.abs(r) - eps),
        np.where(at_c, np.maximum(0.0, eps - sgn * r), np.abs(sgn * r - eps)),
    )
    return viol
