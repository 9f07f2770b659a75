"""Regime-dispatched training and recovery of (a, r, t) from dual solutions."""

from __future__ import annotations

import logging
import math
from dataclasses import asdict, dataclass

import numpy as np

from .data import Dataset
from .kernels import FeatureMapUnavailable, KernelSpec, explicit_features, gram
from .model import Model, objective_g
from .problems import (RegimeMismatch, assemble_degenerate_dual, assemble_lp,
                       assemble_main_dual)
from .qp import QpSolution, Status, solve_qp
from .regime import HyperParams, Regime, RegimeKind, classify_regime

log = logging.getLogger(__name__)

# multipliers this close to a bound (relative) are snapped onto it
_SNAP = 1e-9


class TrainingError(RuntimeError):
    """Base class for training failures."""


class UnboundedRegimeError(TrainingError):
    def __init__(self, regime: Regime):
        self.regime = regime
        super().__init__(f"Unbounded regime: {regime.reason}")


class SolverFailure(TrainingError):
    def __init__(self, msg: str, status: Status | None = None):
        self.status = status
        super().__init__(msg)


@dataclass
class UniquenessReport:
    r_l: float
    r_u: float
    q_l: float
    q_u: float
    center_unique: bool
    radius_unique: bool
    margin_unique: bool
    free_positive_sv: int | None
    free_negative_sv: int | None
    r_interval: tuple[float, float]
    t_interval: tuple[float, float]
    margin_slack: float
    clipped_at_zero: bool = False
    gamma_star_description: str = ""

    @property
    def r_width(self) -> float:
        lo, hi = self.r_interval
        return abs(hi - lo)

    @property
    def t_width(self) -> float:
        lo, hi = self.t_interval
        return abs(hi - lo)

    def to_dict(self) -> dict:
        d = asdict(self)
        d["r_interval"] = list(self.r_interval)
        d["t_interval"] = list(self.t_interval)
        return d


def free_tolerance(solver_tol: float) -> float:
    """Interior test margin for multipliers."""
    return max(1e-6, 10.0 * solver_tol)


def _snap(alpha: np.ndarray, upper: np.ndarray) -> np.ndarray:
    a = np.clip(alpha, 0.0, upper)
    a[a <= _SNAP * upper] = 0.0
    a[a >= upper * (1.0 - _SNAP)] = upper[a >= upper * (1.0 - _SNAP)]
    return a


def _dist2(K: np.ndarray, beta: np.ndarray):
    Kb = K @ beta
    bkb = float(beta @ Kb)
    return np.diag(K) - 2.0 * Kb + bkb, bkb


def _max(v):
    return float(np.max(v)) if v.size else -math.inf


def _min(v):
    return float(np.min(v)) if v.size else math.inf


def _pick(lo: float, hi: float) -> float:
    if math.isinf(hi):
        return lo
    return 0.5 * (lo + hi)


def recover_main(alpha: np.ndarray, K: np.ndarray, d: Dataset, p: HyperParams, tol: float = 1e-9):
    """Center coefficients, (r, t) and the optimal-set report for the main dual.

    Returns ``(beta, r, t, report, dist2)``.  When (r, t) is not unique the
    value pinned by a free support vector is used, otherwise the midpoint of
    the optimal interval.
    """
    ell, m = d.size, d.m
    y = d.labels.astype(float)
    bound = np.where(y > 0, 1.0, p.b)
    tf = free_tolerance(tol)
    beta = y * alpha / (ell * p.nu)
    dist, _ = _dist2(K, beta)
    pos = np.arange(ell) < m
    sv = alpha > tf
    below = alpha < bound - tf
    if not np.any(sv & pos):
        raise SolverFailure("no positive support vector although sum(y*alpha) = l*nu > 0; "
                            "the dual solution is not optimal")
    r_l, r_u = _max(dist[below & pos]), _min(dist[sv & pos])
    q_l, q_u = _max(dist[sv & ~pos]), _min(dist[below & ~pos])
    free_p = np.flatnonzero(sv & below & pos)
    free_n = np.flatnonzero(sv & below & ~pos)
    slack = float(alpha[m:].sum() - ell * p.mu)
    clipped = False
    width_tol = tf * (1.0 + max(abs(x) for x in (r_u, 1.0)))

    if slack > tf:
        t = 0.0
        lo, hi = max(r_l, q_l), min(r_u, q_u)
        if lo == -math.inf:
            lo, clipped = 0.0, True
        free = np.concatenate([free_p, free_n])
        r = float(np.mean(dist[free])) if free.size else _pick(lo, hi)
        r_int, t_int = (lo, hi), (0.0, 0.0)
        radius_unique = bool(free.size) or hi - lo <= width_tol
        margin_unique = True
        desc = f"t = 0 (sum of negative multipliers exceeds l*mu by {slack:.3g}); r in [{lo:.9g}, {hi:.9g}]"
    else:
        lo_r, hi_r = r_l, r_u
        if lo_r == -math.inf:
            lo_r, clipped = 0.0, True
        r = float(np.mean(dist[free_p])) if free_p.size else _pick(lo_r, hi_r)
        lo_q, hi_q = max(q_l, r), q_u
        if free_n.size:
            q = max(float(np.mean(dist[free_n])), r)
        elif hi_q < lo_q:
            q = r
        else:
            q = _pick(lo_q, hi_q)
        t = max(q - r, 0.0)
        r_int = (lo_r, hi_r)
        t_int = (max(lo_q - r, 0.0), hi_q - r)
        radius_unique = bool(free_p.size) or hi_r - lo_r <= width_tol
        margin_unique = radius_unique and (bool(free_n.size) or hi_q - lo_q <= width_tol)
        desc = (f"r in [{lo_r:.9g}, {hi_r:.9g}], r+t in [{q_l:.9g}, {q_u:.9g}], t >= 0")
    report = UniquenessReport(
        r_l=r_l, r_u=r_u, q_l=q_l, q_u=q_u, center_unique=d.m / ell > p.mu,
        radius_unique=bool(radius_unique), margin_unique=bool(margin_unique),
        free_positive_sv=int(free_p[0]) if free_p.size else None,
        free_negative_sv=int(free_n[0]) if free_n.size else None,
        r_interval=r_int, t_interval=t_int, margin_slack=slack,
        clipped_at_zero=clipped, gamma_star_description=desc)
    return beta, float(r), float(t), report, dist


def recover_degenerate(alpha: np.ndarray, K: np.ndarray, d: Dataset, p: HyperParams,
                       tol: float = 1e-9):
    """Center coefficients and margin for the degenerate dual; r is 0.

    Returns ``(beta, 0.0, t, report, dist2)``.
    """
    ell, m = d.size, d.m
    lam = m / ell - p.mu
    tf = free_tolerance(tol)
    beta = np.concatenate([np.full(m, 1.0 / (ell * lam)), -alpha / (ell * lam)])
    dist, _ = _dist2(K, beta)
    dn = dist[m:]
    sv = alpha > tf
    below = alpha < p.b - tf
    q_l, q_u = _max(dn[sv]), _min(dn[below])
    free_n = np.flatnonzero(sv & below)
    slack = float(alpha.sum() - ell * p.mu)
    clipped = False
    if slack > tf:
        # cannot happen with the equality constraint; kept as a guard
        t, t_int = 0.0, (0.0, 0.0)
        margin_unique = True
    else:
        lo = q_l
        if lo < 0:
            lo, clipped = 0.0, True
        t = float(np.mean(dn[free_n])) if free_n.size else _pick(lo, q_u)
        t = max(t, 0.0)
        t_int = (lo, q_u)
        margin_unique = bool(free_n.size) or q_u - lo <= tf * (1.0 + abs(t))
    report = UniquenessReport(
        r_l=0.0, r_u=0.0, q_l=q_l, q_u=q_u, center_unique=lam > 0,
        radius_unique=True, margin_unique=bool(margin_unique), free_positive_sv=None,
        free_negative_sv=int(m + free_n[0]) if free_n.size else None,
        r_interval=(0.0, 0.0), t_interval=t_int, margin_slack=slack, clipped_at_zero=clipped,
        gamma_star_description=f"r = 0; t in [{t_int[0]:.9g}, {t_int[1]:.9g}]")
    return beta, 0.0, float(t), report, dist


def _xi(dist: np.ndarray, m: int, r: float, t: float) -> np.ndarray:
    xi = np.empty_like(dist)
    xi[:m] = np.maximum(0.0, 0.5 * (dist[:m] - r))
    xi[m:] = np.maximum(0.0, 0.5 * (r + t - dist[m:]))
    return xi


def _support(d: Dataset, beta: np.ndarray):
    idx = np.flatnonzero(beta != 0.0)
    return dict(support_index=idx, support_points=d.points[idx].copy(),
                support_labels=d.labels[idx].copy(), support_beta=beta[idx].copy())


def _finish(model: Model, d: Dataset, K: np.ndarray | None) -> Model:
    from .certify import check_kkt, nu_property

    kkt = check_kkt(model, d, K=K)
    nu = nu_property(model)
    model.diagnostics["kkt_max_residual"] = kkt.max_residual
    model.diagnostics["kkt"] = kkt.groups
    model.diagnostics["nu_report"] = nu.to_dict()
    return model


def closed_form_mu0(K: np.ndarray, d: Dataset, p: HyperParams, kernel: KernelSpec,
                    threshold: str = "mid") -> Model:
    """Explicit optimum for mu = 0 and nu >= m/l: center = mean of positives, r = 0."""
    regime = classify_regime(p, d.m, d.n)
    if regime.kind is not RegimeKind.TRIVIAL:
        raise RegimeMismatch(f"closed form needs TrivialClosedForm, hyperparameters give {regime}")
    m, ell = d.m, d.size
    beta = np.zeros(ell)
    beta[:m] = 1.0 / m
    kd = np.diag(K)
    mean_pp = K[:m, :m].sum() / m**2
    dist = kd - (2.0 / m) * K[:, :m].sum(axis=1) + mean_pp
    t = float(np.min(dist[m:])) if d.n else 0.0
    t = max(t, 0.0)
    xi = _xi(dist, m, 0.0, t)
    model = Model(kernel=kernel, hyper=p, regime=regime, r=0.0, t=t, s=mean_pp,
                  beta_k_beta=mean_pp, n_train=ell, m=m, xi=xi, threshold_mode=threshold,
                  diagnostics={"input_dim": d.dim, "solver": "closed_form",
                               "objective": ell * objective_g(dist, m, p, 0.0, t)},
                  **_support(d, beta))
    return _finish(model, d, K)


def _check_status(sol: QpSolution, regime: Regime):
    if sol.status is not Status.OPTIMAL:
        raise SolverFailure(f"{regime} solve ended with status {sol.status.value}"
                            f" after {sol.iterations} iterations"
                            f" (residual {sol.kkt_residual:.3e}; {sol.message or 'no detail'})",
                            sol.status)


def train(d: Dataset, spec: KernelSpec, p: HyperParams, tol: float = 1e-9,
          max_iter: int = 200, threshold: str = "mid", K: np.ndarray | None = None,
          verbose: bool = False) -> Model:
    """Train the globally optimal sphere for the regime implied by ``p``."""
    regime = classify_regime(p, d.m, d.n)
    log.info("regime: %s (%s)", regime, regime.reason)
    if regime.kind is RegimeKind.UNBOUNDED:
        raise UnboundedRegimeError(regime)
    ell, m = d.size, d.m
    diag = {"input_dim": d.dim, "tol": tol}

    if regime.kind is RegimeKind.DEGENERATE_LP:
        try:
            F = explicit_features(spec, d.points)
        except FeatureMapUnavailable as exc:
            detail = str(exc).split(": ", 1)[-1]
            raise FeatureMapUnavailable(f"explicit features required for LP regime ({detail})") from None
        prob = assemble_lp(F, d, p)
        sol = solve_qp(prob, tol=tol, max_iter=max_iter, verbose=verbose)
        _check_status(sol, regime)
        D = F.shape[1]
        a, z = sol.x[:D], float(sol.x[D])
        alpha = _snap(sol.z.copy(), np.full(d.n, p.b))
        a2 = float(a @ a)
        dist = np.einsum("ij,ij->i", F, F) - 2.0 * F @ a + a2
        t = a2 - z
        if t < 0:
            raise SolverFailure(f"LP solution violates ||a||^2 >= z (t = {t:.3e})")
        diag.update(solver="ipm-lp", iterations=sol.iterations,
                    dual_objective=sol.objective + 0.5 * np.einsum("ij,ij->i", F[:m], F[:m]).sum(),
                    objective=ell * objective_g(dist, m, p, 0.0, t), z=z)
        model = Model(kernel=spec, hyper=p, regime=regime, r=0.0, t=t, s=a2, beta_k_beta=a2,
                      n_train=ell, m=m, support_points=np.zeros((0, d.dim)), center=a.copy(),
                      alpha=alpha, xi=_xi(dist, m, 0.0, t), threshold_mode=threshold,
                      diagnostics=diag)
        return _finish(model, d, None)

    if K is None:
        K = gram(spec, d)
    if regime.kind is RegimeKind.TRIVIAL:
        return closed_form_mu0(K, d, p, spec, threshold)

    if regime.kind is RegimeKind.MAIN_QP:
        prob = assemble_main_dual(K, d, p)
        sol = solve_qp(prob, tol=tol, max_iter=max_iter, verbose=verbose)
        _check_status(sol, regime)
        bound = np.where(d.labels > 0, 1.0, p.b)
        alpha = _snap(sol.x, bound)
        beta, r, t, report, dist = recover_main(alpha, K, d, p, tol)
        dual_obj = -sol.objective
    else:
        prob = assemble_degenerate_dual(K, d, p)
        sol = solve_qp(prob, tol=tol, max_iter=max_iter, verbose=verbose)
        _check_status(sol, regime)
        alpha = _snap(sol.x, np.full(d.n, p.b))
        beta, r, t, report, dist = recover_degenerate(alpha, K, d, p, tol)
        dual_obj = -sol.objective + 0.5 * np.trace(K[:m, :m])

    bkb = float(beta @ K @ beta)
    diag.update(solver="ipm-dual", iterations=sol.iterations, dual_objective=dual_obj,
                objective=ell * objective_g(dist, m, p, r, t),
                uniqueness=report.to_dict())
    model = Model(kernel=spec, hyper=p, regime=regime, r=r, t=t, s=bkb - r, beta_k_beta=bkb,
                  n_train=ell, m=m, alpha=alpha, xi=_xi(dist, m, r, t),
                  threshold_mode=threshold, diagnostics=diag, **_support(d, beta))
    return _finish(model, d, K)


def uniqueness_report(model: Model) -> dict | None:
    return model.diagnostics.get("uniqueness")
