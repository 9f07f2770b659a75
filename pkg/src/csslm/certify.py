"""Optimality certificates: KKT residuals and the nu-property counts."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .data import Dataset
from .kernels import explicit_features, gram
from .model import Model
from .regime import RegimeKind


@dataclass
class KktReport:
    regime: str
    groups: dict
    xi: np.ndarray
    partial: bool = False  # no multipliers available, primal checks only
    notes: list = field(default_factory=list)

    @property
    def max_residual(self) -> float:
        return max(self.groups.values(), default=0.0)

    def ok(self, tol: float) -> bool:
        return self.max_residual <= tol

    def to_dict(self) -> dict:
        return {"regime": self.regime, "groups": dict(self.groups),
                "max_residual": self.max_residual, "partial": self.partial,
                "notes": list(self.notes)}

    def format(self) -> str:
        lines = [f"KKT report ({self.regime}{', primal only' if self.partial else ''})"]
        for k, v in self.groups.items():
            lines.append(f"  {k:<20s} {v:#.9g}")
        lines.append(f"  {'max_residual':<20s} {self.max_residual:#.9g}")
        lines += [f"  note: {n}" for n in self.notes]
        return "\n".join(lines)


@dataclass
class NuReport:
    applicable: bool
    case: str
    m_plus: int = 0
    n_plus: int = 0
    s_plus: int = 0
    s_minus: int = 0
    inequalities: list = field(default_factory=list)  # (name, lhs, rhs, holds)

    @property
    def all_hold(self) -> bool:
        return all(row[3] for row in self.inequalities)

    def to_dict(self) -> dict:
        return {"applicable": self.applicable, "case": self.case,
                "m_plus": self.m_plus, "n_plus": self.n_plus,
                "s_plus": self.s_plus, "s_minus": self.s_minus,
                "inequalities": [list(r) for r in self.inequalities],
                "all_hold": self.all_hold}

    def format(self) -> str:
        if not self.applicable:
            return f"nu-property: not applicable ({self.case})"
        lines = [f"nu-property ({self.case}): m+={self.m_plus} n+={self.n_plus} "
                 f"s+={self.s_plus} s-={self.s_minus}"]
        for name, lhs, rhs, holds in self.inequalities:
            lines.append(f"  {name:<28s} {lhs:#.9g} <= {rhs:#.9g}  {'holds' if holds else 'FAILS'}")
        return "\n".join(lines)


def recover_xi(dist2: np.ndarray, m: int, r: float, t: float) -> np.ndarray:
    xi = np.empty_like(dist2)
    xi[:m] = np.maximum(0.0, 0.5 * (dist2[:m] - r))
    xi[m:] = np.maximum(0.0, 0.5 * (r + t - dist2[m:]))
    return xi


def _check_shape(model: Model, d: Dataset):
    if d.size != model.n_train or d.m != model.m:
        raise ValueError(f"dataset (l={d.size}, m={d.m}) does not match the model's training set "
                         f"(l={model.n_train}, m={model.m})")


def _train_dist(model: Model, d: Dataset, K):
    """Squared distances of training points plus ||a||^2 computed from scratch."""
    if model.center is not None:
        F = explicit_features(model.kernel, d.points)
        diff = F - model.center
        return np.einsum("ij,ij->i", diff, diff), float(model.center @ model.center), None
    if K is None:
        K = gram(model.kernel, d)
    beta = model.beta_full()
    Kb = K @ beta
    bkb = float(beta @ Kb)
    return np.diag(K) - 2.0 * Kb + bkb, bkb, K


def check_kkt(model: Model, d: Dataset, K: np.ndarray | None = None) -> KktReport:
    """Residuals of the optimality system for the model's regime.

    Feasibility, stationarity and dual feasibility are scaled by one plus the
    size of the quantities involved; complementarity products are absolute.
    """
    _check_shape(model, d)
    p, m, ell = model.hyper, model.m, model.n_train
    kind = model.regime.kind
    dist, a2, K = _train_dist(model, d, K)
    r, t = model.r, model.t
    xi = recover_xi(dist, m, r, t)
    pos = np.arange(ell) < m
    scale = 1.0 + max(abs(r), abs(t), a2)
    notes = []

    viol = max(0.0, -r, -t)
    viol = max(viol, abs(model.s - (a2 - r)) / scale)
    if kind in (RegimeKind.DEGENERATE_QP, RegimeKind.DEGENERATE_LP, RegimeKind.TRIVIAL):
        viol = max(viol, abs(r))
    groups = {"primal_feasibility": viol}
    alpha = model.alpha

    if kind is RegimeKind.TRIVIAL:
        beta = model.beta_full()
        want = np.where(pos, 1.0 / m, 0.0)
        t_star = max(float(np.min(dist[m:])), 0.0) if d.n else 0.0
        groups["stationarity"] = max(float(np.max(np.abs(beta - want))) if ell else 0.0,
                                     abs(t - t_star) / scale)
        notes.append("closed form: center = mean of positives, r = 0, t = min negative distance")
        return KktReport(kind.value, groups, xi, notes=notes)

    if alpha is None:
        notes.append("model carries no multipliers; only primal feasibility checked")
        return KktReport(kind.value, groups, xi, partial=True, notes=notes)

    if kind is RegimeKind.MAIN_QP:
        y = np.where(pos, 1.0, -1.0)
        bound = np.where(pos, 1.0, p.b)
        if model.center is None:
            delta = model.beta_full() - y * alpha / (ell * p.nu)
            stat = np.sqrt(max(float(delta @ K @ delta), 0.0)) / (1.0 + np.sqrt(a2))
        else:
            F = explicit_features(model.kernel, d.points)
            stat = np.linalg.norm(model.center - (y * alpha) @ F / (ell * p.nu)) / (1.0 + np.sqrt(a2))
        stat = max(stat, abs(float(y @ alpha) - ell * p.nu) / (1.0 + ell * p.nu))
        groups["stationarity"] = float(stat)
        neg_sum = float(alpha[~pos].sum())
        groups["dual_feasibility"] = max(
            float(np.max(np.maximum(-alpha, alpha - bound))) if ell else 0.0,
            max(0.0, ell * p.mu - neg_sum) / (1.0 + ell * p.mu), 0.0)
        slack = np.where(pos, dist - r - 2 * xi, r + t - dist - 2 * xi)
        comp = max(float(np.max(np.abs(slack * alpha))),
                   float(np.max(np.abs((bound - alpha) * xi))),
                   abs(t * (neg_sum - ell * p.mu)) if d.n else 0.0)
        groups["complementarity"] = comp
        return KktReport(kind.value, groups, xi, notes=notes)

    # degenerate QP and LP share the optimality system over the negatives
    neg = ~pos
    if kind is RegimeKind.DEGENERATE_QP:
        lam = m / ell - p.mu
        if model.center is None:
            want = np.concatenate([np.full(m, 1.0 / (ell * lam)), -alpha / (ell * lam)])
            delta = model.beta_full() - want
            stat = np.sqrt(max(float(delta @ K @ delta), 0.0)) / (1.0 + np.sqrt(a2))
        else:
            F = explicit_features(model.kernel, d.points)
            want = (F[pos].sum(axis=0) - alpha @ F[neg]) / (ell * lam)
            stat = np.linalg.norm(model.center - want) / (1.0 + np.sqrt(a2))
    else:
        F = explicit_features(model.kernel, d.points)
        lhs = F[pos].sum(axis=0)
        stat = np.linalg.norm(lhs - alpha @ F[neg]) / (1.0 + np.linalg.norm(lhs))
    groups["stationarity"] = float(stat)
    groups["dual_feasibility"] = max(
        float(np.max(np.maximum(-alpha, alpha - p.b))) if alpha.size else 0.0,
        abs(float(alpha.sum()) - ell * p.mu) / (1.0 + ell * p.mu))
    xn = xi[neg]
    slack = t - dist[neg] - 2 * xn
    groups["complementarity"] = max(float(np.max(np.abs(slack * alpha))) if alpha.size else 0.0,
                                    float(np.max(np.abs((p.b - alpha) * xn))) if alpha.size else 0.0)
    return KktReport(kind.value, groups, xi, notes=notes)


def nu_property(model: Model, tol: float = 1e-6, slack: float = 1e-6) -> NuReport:
    """Counts of margin errors / support vectors and the applicable inequalities."""
    kind = model.regime.kind
    if kind not in (RegimeKind.MAIN_QP, RegimeKind.DEGENERATE_QP):
        return NuReport(False, f"no nu-property for {kind.value}")
    if model.alpha is None or model.xi is None:
        return NuReport(False, "model carries no multipliers")
    p, m, ell, n = model.hyper, model.m, model.n_train, model.n
    xi, alpha = model.xi, model.alpha
    m_plus = int(np.sum(xi[:m] > tol))
    n_plus = int(np.sum(xi[m:] > tol))
    if kind is RegimeKind.MAIN_QP:
        s_plus = int(np.sum(alpha[:m] > tol))
        s_minus = int(np.sum(alpha[m:] > tol))
    else:
        s_plus = 0
        s_minus = int(np.sum(alpha > tol))
    rows = []

    def chain(name, lhs, rhs):
        rows.append((name, float(lhs), float(rhs), bool(lhs <= rhs + slack)))

    if kind is RegimeKind.DEGENERATE_QP:
        case = "degenerate"
        chain("n+/l <= mu/b", n_plus / ell, p.mu / p.b)
        chain("mu/b <= s-/l", p.mu / p.b, s_minus / ell)
    elif n == 0:
        case = "one-class"
        chain("m+/m <= nu", m_plus / m, p.nu)
        chain("nu <= s+/m", p.nu, s_plus / m)
    elif model.t > tol:
        case = "t > 0"
        chain("m+/l <= nu+mu", m_plus / ell, p.nu + p.mu)
        chain("nu+mu <= s+/l", p.nu + p.mu, s_plus / ell)
        chain("n+/l <= mu/b", n_plus / ell, p.mu / p.b)
        chain("mu/b <= s-/l", p.mu / p.b, s_minus / ell)
    else:
        case = "t = 0"
        chain("m+/l <= nu + b*s-/l", m_plus / ell, p.nu + p.b * s_minus / ell)
        chain("nu + b*n+/l <= s+/l", p.nu + p.b * n_plus / ell, s_plus / ell)
        chain("mu/b <= s-/l", p.mu / p.b, s_minus / ell)
    return NuReport(True, case, m_plus, n_plus, s_plus, s_minus, rows)
