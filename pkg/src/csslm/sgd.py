"""Pegasos-style stochastic subgradient training for the linear primal."""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np
from numba import njit

from .data import Dataset
from .kernels import KernelSpec
from .model import Model, objective_g
from .regime import HyperParams, RegimeKind, classify_regime

log = logging.getLogger(__name__)

VARIANTS = ("plain", "revisit")


@dataclass(frozen=True)
class SgdConfig:
    iterations: int = 200_000
    variant: str = "plain"
    seed: int = 0
    averaging: bool = True  # average the last K/2 iterates
    log_every: int = 0  # 0 disables the progress log
    eval_data: Dataset | None = None  # held-out set for the progress log

    def __post_init__(self):
        if self.iterations < 1:
            raise ValueError(f"iterations must be >= 1, got {self.iterations}")
        if self.variant not in VARIANTS:
            raise ValueError(f"variant must be one of {VARIANTS}, got {self.variant!r}")


@dataclass
class SgdState:
    a: np.ndarray
    s: float = 0.0
    t: float = 0.0
    k: int = 1

    @classmethod
    def zeros(cls, dim: int) -> "SgdState":
        return cls(np.zeros(dim))

    def copy(self) -> "SgdState":
        return SgdState(self.a.copy(), self.s, self.t, self.k)


def sgd_step(state: SgdState, x, y: int, p: HyperParams, variant: str = "plain") -> SgdState:
    """One iteration; returns a new state. Loss tests use the incoming state."""
    x = np.asarray(x, dtype=float)
    a0, s0, t0 = state.a, state.s, state.t
    eta = 1.0 / (p.nu * state.k)
    dot, xx = float(a0 @ x), float(x @ x)
    decay = 1.0 - eta * p.nu
    a = decay * a0
    if variant == "revisit":
        s, t = decay * s0, decay * t0
    else:
        s, t = s0, t0
    s += 0.5 * eta * p.nu
    t += 0.5 * eta * p.mu
    if y > 0 and dot < 0.5 * (xx + s0):
        a = a + eta * x
        s -= 0.5 * eta
    elif y < 0 and dot > 0.5 * (xx + s0 - t0):
        a = a - p.b * eta * x
        s += 0.5 * p.b * eta
        t -= 0.5 * p.b * eta
    return SgdState(a, s, max(t, 0.0), state.k + 1)


@njit(cache=True)
def _run(X, y, idx, a, st, nu, mu, b, revisit, avg_from, acc):
    """Advance ``len(idx)`` steps in place; st = [s, t, k]; acc = [sum a, sum s, sum t, count]."""
    dim = X.shape[1]
    s, t, k = st[0], st[1], st[2]
    for j in range(idx.shape[0]):
        i = idx[j]
        eta = 1.0 / (nu * k)
        dot = 0.0
        xx = 0.0
        for c in range(dim):
            dot += a[c] * X[i, c]
            xx += X[i, c] * X[i, c]
        decay = 1.0 - eta * nu
        for c in range(dim):
            a[c] *= decay
        s0, t0 = s, t
        if revisit:
            s *= decay
            t *= decay
        s += 0.5 * eta * nu
        t += 0.5 * eta * mu
        if y[i] > 0:
            if dot < 0.5 * (xx + s0):
                for c in range(dim):
                    a[c] += eta * X[i, c]
                s -= 0.5 * eta
        elif dot > 0.5 * (xx + s0 - t0):
            for c in range(dim):
                a[c] -= b * eta * X[i, c]
            s += 0.5 * b * eta
            t -= 0.5 * b * eta
        if t < 0.0:
            t = 0.0
        if k >= avg_from:
            for c in range(dim):
                acc[c] += a[c]
            acc[dim] += s
            acc[dim + 1] += t
            acc[dim + 2] += 1.0
        k += 1.0
    st[0], st[1], st[2] = s, t, k


def _eval_g(points, labels, a, s, t, p):
    m = int(np.sum(labels > 0))
    order = np.argsort(-labels, kind="stable")
    X = points[order]
    dist = np.einsum("ij,ij->i", X, X) - 2.0 * X @ a + a @ a
    r = max(float(a @ a) - s, 0.0)
    return objective_g(dist, m, p, r, max(t, 0.0))


def pegasos_train(d: Dataset, p: HyperParams, cfg: SgdConfig = SgdConfig(),
                  kernel: KernelSpec | None = None) -> Model:
    """Run ``cfg.iterations`` steps and wrap the (averaged) iterate as a model.

    Indices are drawn uniformly from ``numpy.random.default_rng(cfg.seed)``
    (PCG64).  Averaging uses the iterates after steps K//2+1 .. K.
    """
    if kernel is not None and kernel.kind != "linear":
        raise ValueError(f"pegasos training supports the linear kernel only, got {kernel.kind}")
    regime = classify_regime(p, d.m, d.n)
    if regime.kind is not RegimeKind.MAIN_QP:
        log.warning("pegasos on regime %s: the primal it solves assumes nu+mu < m/l", regime)
    X = np.ascontiguousarray(d.points, dtype=float)
    y = d.labels.astype(np.int64)
    ell, dim = X.shape
    K = cfg.iterations
    idx = np.random.default_rng(cfg.seed).integers(0, ell, size=K)
    a = np.zeros(dim)
    st = np.array([0.0, 0.0, 1.0])
    acc = np.zeros(dim + 3)
    avg_from = float(K // 2 + 1) if cfg.averaging else float(K)
    history = []
    chunk = cfg.log_every if cfg.log_every > 0 else K
    ev = cfg.eval_data or d
    for start in range(0, K, chunk):
        _run(X, y, idx[start: start + chunk], a, st, p.nu, p.mu, p.b,
             cfg.variant == "revisit", avg_from, acc)
        if cfg.log_every > 0:
            g = _eval_g(ev.points, ev.labels, a, st[0], st[1], p)
            history.append((int(st[2]) - 1, g))
            log.info("pegasos k=%d  g=%.9g", int(st[2]) - 1, g)
    if cfg.averaging and acc[dim + 2] > 0:
        cnt = acc[dim + 2]
        a_out, s_out, t_out = acc[:dim] / cnt, acc[dim] / cnt, acc[dim + 1] / cnt
    else:
        a_out, s_out, t_out = a.copy(), st[0], st[1]
    a2 = float(a_out @ a_out)
    r = max(a2 - s_out, 0.0)
    t_out = max(float(t_out), 0.0)
    dist = np.einsum("ij,ij->i", X, X) - 2.0 * X @ a_out + a2
    xi = np.empty(ell)
    xi[: d.m] = np.maximum(0.0, 0.5 * (dist[: d.m] - r))
    xi[d.m:] = np.maximum(0.0, 0.5 * (r + t_out - dist[d.m:]))
    diag = {"input_dim": dim, "solver": "pegasos", "variant": cfg.variant, "seed": cfg.seed,
            "iterations": K, "averaging": cfg.averaging, "raw_s": float(s_out),
            "objective": ell * objective_g(dist, d.m, p, r, t_out), "history": history}
    return Model(kernel=kernel or KernelSpec.linear(), hyper=p, regime=regime, r=r, t=t_out,
                 s=a2 - r, beta_k_beta=a2, n_train=ell, m=d.m,
                 support_points=np.zeros((0, dim)), center=a_out, xi=xi,
                 diagnostics=diag)
