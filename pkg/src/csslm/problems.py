"""Assembly of the regime-specific QP/LP problems in minimization form.

Variable layouts:

* main dual / degenerate dual: one multiplier per example (all l, or the n
  negatives only).
* primal QP: ``[a (D), s, t, xi (l)]``.
* LP: ``[a (D), z, xi (n)]``.
"""

from __future__ import annotations

import numpy as np

from .data import Dataset
from .kernels import KernelSpec, explicit_features
from .qp import QpProblem
from .regime import HyperParams, RegimeKind, classify_regime


class RegimeMismatch(ValueError):
    pass


def _require(p: HyperParams, d: Dataset, *kinds):
    regime = classify_regime(p, d.m, d.n)
    if regime.kind not in kinds:
        want = " or ".join(k.value for k in kinds)
        raise RegimeMismatch(f"problem needs regime {want}, hyperparameters give {regime}")
    return regime


def _labels(d: Dataset) -> np.ndarray:
    return d.labels.astype(float)


def assemble_main_dual(K: np.ndarray, d: Dataset, p: HyperParams) -> QpProblem:
    """Main dual in minimization form.

    The optimum of the returned problem is the negated optimum of the primal
    QP: ``opt(primal) = -solution.objective``.
    """
    _require(p, d, RegimeKind.MAIN_QP)
    ell, m = d.size, d.m
    y = _labels(d)
    Q = np.outer(y, y) * K / (ell * p.nu)
    c = -0.5 * y * np.diag(K)
    hi = np.where(y > 0, 1.0, p.b)
    G = h = None
    if d.n > 0:
        G = np.zeros((1, ell))
        G[0, m:] = -1.0
        h = np.array([-ell * p.mu])
    return QpProblem(Q, c, A_eq=y[None, :], b_eq=[ell * p.nu], G=G, h=h,
                     lo=np.zeros(ell), hi=hi)


def assemble_primal_qp(features: np.ndarray, d: Dataset, p: HyperParams) -> QpProblem:
    """Explicit-feature primal QP over ``(a, s, t, xi)``; objective is h."""
    _require(p, d, RegimeKind.MAIN_QP)
    F = np.asarray(features, dtype=float)
    ell, m = d.size, d.m
    D = F.shape[1]
    kd = np.einsum("ij,ij->i", F, F)
    nv = D + 2 + ell
    Q = np.zeros((nv, nv))
    Q[np.arange(D), np.arange(D)] = ell * p.nu
    c = np.zeros(nv)
    c[D] = -0.5 * ell * p.nu
    c[D + 1] = -0.5 * ell * p.mu
    c[D + 2:] = np.where(np.arange(ell) < m, 1.0, p.b)
    G = np.zeros((ell, nv))
    h = np.empty(ell)
    G[:m, :D] = -F[:m]
    G[:m, D] = 0.5
    h[:m] = -0.5 * kd[:m]
    G[m:, :D] = F[m:]
    G[m:, D] = -0.5
    G[m:, D + 1] = 0.5
    h[m:] = 0.5 * kd[m:]
    G[np.arange(ell), D + 2 + np.arange(ell)] = -1.0
    lo = np.full(nv, -np.inf)
    lo[D + 1:] = 0.0
    return QpProblem(Q, c, G=G, h=h, lo=lo)


def primal_features(spec: KernelSpec, d: Dataset) -> np.ndarray:
    """Explicit features, or a clear error for kernels without a finite map."""
    try:
        return explicit_features(spec, d.points)
    except ValueError as exc:
        raise type(exc)(f"primal form unavailable, use dual ({exc})") from None


def split_primal(x: np.ndarray, dim: int):
    """``(a, s, t, xi)`` from a primal QP solution vector."""
    return x[:dim], float(x[dim]), float(x[dim + 1]), x[dim + 2:]


def assemble_degenerate_dual(K: np.ndarray, d: Dataset, p: HyperParams) -> QpProblem:
    """Degenerate dual over the negatives' multipliers, minimization form.

    ``-solution.objective`` is the optimum of the degenerate primal QP over
    ``(a, z, xi)``.  With no negatives and mu > 0 the equality row reads
    ``0 = l*mu`` and the solver reports the problem infeasible.
    """
    regime = _require(p, d, RegimeKind.DEGENERATE_QP, RegimeKind.UNBOUNDED)
    ell, m = d.size, d.m
    if regime.kind is RegimeKind.UNBOUNDED:
        # only reachable with n = 0, mu > 0; the equality cannot hold
        if d.n:
            raise RegimeMismatch(f"problem needs regime DegenerateQP, hyperparameters give {regime}")
    lam = m / ell - p.mu
    Knn = K[m:, m:]
    cross = K[:m, m:].sum(axis=0)
    c = 0.5 * (np.diag(K)[m:] - (2.0 / (ell * lam)) * cross)
    const = K[:m, :m].sum() / (2.0 * ell * lam)
    n = d.n
    return QpProblem(Knn / (ell * lam), c, A_eq=np.ones((1, n)), b_eq=[ell * p.mu],
                     lo=np.zeros(n), hi=np.full(n, p.b), constant=const)


def assemble_lp(features: np.ndarray, d: Dataset, p: HyperParams) -> QpProblem:
    """Degenerate LP over ``(a, z, xi_neg)``; requires explicit features."""
    _require(p, d, RegimeKind.DEGENERATE_LP)
    F = np.asarray(features, dtype=float)
    ell, m, n = d.size, d.m, d.n
    D = F.shape[1]
    kd = np.einsum("ij,ij->i", F, F)
    nv = D + 1 + n
    c = np.zeros(nv)
    c[:D] = -F[:m].sum(axis=0)
    c[D] = 0.5 * ell * p.mu
    c[D + 1:] = p.b
    G = np.zeros((n, nv))
    G[:, :D] = F[m:]
    G[:, D] = -0.5
    G[np.arange(n), D + 1 + np.arange(n)] = -1.0
    h = 0.5 * kd[m:]
    lo = np.full(nv, -np.inf)
    lo[D + 1:] = 0.0
    return QpProblem(np.zeros((nv, nv)), c, G=G, h=h, lo=lo)
