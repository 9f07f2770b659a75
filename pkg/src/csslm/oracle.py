"""Brute-force reference solver for tiny explicit-feature instances.

Minimizes F(a) = min over (r, t) of g(a, r, t), which is strongly convex in
the center.  The inner minimization over (r, t) is piecewise linear and is
solved exactly by sorting the squared distances, so the outer loop is a plain
subgradient method on the center alone.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np
from numba import njit

from .data import Dataset
from .kernels import KernelSpec, explicit_features
from .regime import HyperParams, RegimeKind, classify_regime

MAX_DIM = 10
MAX_POINTS = 60


class OracleFailure(RuntimeError):
    pass


@dataclass(frozen=True)
class OracleConfig:
    restarts: int = 4
    iterations: int = 1_000_000
    seed: int = 12345
    tolerance: float = 1e-4  # allowed spread of restart objectives (g scale)
    perturbation: float = 1.0

    def __post_init__(self):
        if self.restarts < 4:
            raise ValueError("oracle needs at least 4 restarts")
        if self.iterations < 1:
            raise ValueError("iterations must be >= 1")


class OracleResult(NamedTuple):
    a: np.ndarray
    r: float
    t: float
    objective: float  # g scale
    spread: float  # max - min objective over restarts


@njit(cache=True, nogil=True)
def _inner(F, m, a, nu, mu, b, main, grad, dist, wpos, dp, dn):
    """Exact inner minimum over (r, t); writes a subgradient of F into grad.

    ``dist``, ``wpos``, ``dp``, ``dn`` are scratch buffers.  Returns (F(a), r, t).
    """
    ell, dim = F.shape
    n = ell - m
    for i in range(ell):
        acc = 0.0
        for c in range(dim):
            diff = F[i, c] - a[c]
            acc += diff * diff
        dist[i] = acc
    dp[:] = dist[:m]
    dp.sort()
    dn[:] = dist[m:]
    dn.sort()
    wpos[:] = 0.0  # per-point weights: alpha_i for positives, alpha_i / b for negatives
    spos = 0.0
    for i in range(m):
        spos += dist[i]

    if not main:
        # r = 0, t free: q* = largest minimizer of -mu q/2 + b/(2l) sum (q - dn)_+
        j2 = int(math.floor(ell * mu / b * (1.0 + 1e-15)))
        if n == 0:
            q = 0.0
        elif j2 < n:
            q = dn[j2]
        else:
            q = dn[n - 1]
        val = -0.5 * mu * q + spos / (2.0 * ell)
        below = 0.0
        ties = 0.0
        for i in range(m, ell):
            if dist[i] < q:
                val += b * (q - dist[i]) / (2.0 * ell)
                wpos[i] = 1.0
                below += 1.0
            elif dist[i] == q:
                ties += 1.0
        need = ell * mu / b - below
        if ties > 0:
            frac = min(max(need / ties, 0.0), 1.0)
            for i in range(m, ell):
                if dist[i] == q:
                    wpos[i] = frac
        lam = m / ell - mu
        for c in range(dim):
            g = lam * a[c]
            for i in range(m):
                g -= F[i, c] / ell
            for i in range(m, ell):
                g += b * wpos[i] * F[i, c] / ell
            grad[c] = g
        return val, 0.0, q

    # main case: smallest r-minimizer and largest q-minimizer, coupled by q >= r
    j1 = int(math.floor(ell * (nu + mu) * (1.0 + 1e-15)))
    r = dp[m - 1 - j1]
    if n == 0:
        q = r
    else:
        j2 = int(math.floor(ell * mu / b * (1.0 + 1e-15)))
        if j2 < n:
            q = dn[j2]
        else:
            q = max(dn[n - 1], r)
    if q < r:
        # t = 0: minimize nu r/2 + 1/(2l) sum (dp - r)_+ + b/(2l) sum (r - dn)_+
        ip = 0
        jn = 0
        r = dp[m - 1]
        while ip < m or jn < n:
            if jn >= n or (ip < m and dp[ip] <= dn[jn]):
                v = dp[ip]
            else:
                v = dn[jn]
            while ip < m and dp[ip] <= v:
                ip += 1
            while jn < n and dn[jn] <= v:
                jn += 1
            slope = 0.5 * nu - 0.5 * (m - ip) / ell + 0.5 * b * jn / ell
            if slope >= 0.0:
                r = v
                break
        q = r
    t = q - r
    val = 0.5 * (nu * r - mu * t)
    above = 0.0
    tie_p = 0.0
    below = 0.0
    tie_n = 0.0
    for i in range(m):
        if dist[i] > r:
            val += (dist[i] - r) / (2.0 * ell)
            wpos[i] = 1.0
            above += 1.0
        elif dist[i] == r:
            tie_p += 1.0
    for i in range(m, ell):
        if dist[i] < q:
            val += b * (q - dist[i]) / (2.0 * ell)
            wpos[i] = 1.0
            below += 1.0
        elif dist[i] == q:
            tie_n += 1.0
    # tie weights restoring inner stationarity: sum_pos w - b sum_neg v = l nu,
    # and b sum_neg v = l mu whenever t > 0
    if t > 0.0:
        wn = ell * mu / b - below
        wp = ell * (nu + mu) - above
    else:
        wn = 0.0
        wp = ell * nu - above + b * below
        if wp > tie_p:
            wn = (wp - tie_p) / b
            wp = tie_p
        elif wp < 0.0:
            wn = 0.0
            wp = 0.0
    if tie_p > 0:
        fp = min(max(wp / tie_p, 0.0), 1.0)
        for i in range(m):
            if dist[i] == r:
                wpos[i] = fp
    if tie_n > 0:
        fn = min(max(wn / tie_n, 0.0), 1.0)
        for i in range(m, ell):
            if dist[i] == q:
                wpos[i] = fn
    for c in range(dim):
        g = nu * a[c]
        for i in range(m):
            g -= wpos[i] * F[i, c] / ell
        for i in range(m, ell):
            g += b * wpos[i] * F[i, c] / ell
        grad[c] = g
    return val, r, t


@njit(cache=True, nogil=True)
def _descend(F, m, a0, nu, mu, b, main, modulus, iters):
    """Subgradient steps 1/(modulus k) with k-weighted averaging; best point returned."""
    dim = F.shape[1]
    a = a0.copy()
    avg = a0.copy()
    wsum = 0.0
    ell = F.shape[0]
    grad = np.empty(dim)
    dist, wpos = np.empty(ell), np.empty(ell)
    dp, dn = np.empty(m), np.empty(ell - m)
    best = a0.copy()
    best_val, _, _ = _inner(F, m, a, nu, mu, b, main, grad, dist, wpos, dp, dn)
    for k in range(1, iters + 1):
        val, _, _ = _inner(F, m, a, nu, mu, b, main, grad, dist, wpos, dp, dn)
        if val < best_val:
            best_val = val
            best[:] = a
        step = 1.0 / (modulus * k)
        for c in range(dim):
            a[c] -= step * grad[c]
        wsum += k
        for c in range(dim):
            avg[c] += (a[c] - avg[c]) * k / wsum
    val, _, _ = _inner(F, m, avg, nu, mu, b, main, grad, dist, wpos, dp, dn)
    if val < best_val:
        best_val = val
        best[:] = avg
    return best, best_val


def objective_at(F: np.ndarray, m: int, p: HyperParams, a, main: bool = True):
    """(F(a), r, t) with the exact inner minimization."""
    ell = F.shape[0]
    return _inner(np.ascontiguousarray(F, dtype=float), m, np.asarray(a, dtype=float),
                  p.nu, p.mu, p.b, main, np.empty(F.shape[1]), np.empty(ell), np.empty(ell),
                  np.empty(m), np.empty(ell - m))


def brute_force_primal(d: Dataset, p: HyperParams, cfg: OracleConfig = OracleConfig(),
                       spec: KernelSpec | None = None) -> OracleResult:
    """Multi-start subgradient minimization; restarts must agree within cfg.tolerance."""
    spec = spec or KernelSpec.linear()
    F = np.ascontiguousarray(explicit_features(spec, d.points), dtype=float)
    ell, dim = F.shape
    if dim > MAX_DIM or ell > MAX_POINTS:
        raise OracleFailure(f"oracle limited to {MAX_DIM} features and {MAX_POINTS} points, "
                            f"got {dim} and {ell}")
    regime = classify_regime(p, d.m, d.n)
    if regime.kind is RegimeKind.MAIN_QP:
        main, modulus = True, p.nu
    elif regime.kind in (RegimeKind.DEGENERATE_QP, RegimeKind.TRIVIAL):
        main, modulus = False, d.m / ell - p.mu
    else:
        raise OracleFailure(f"oracle does not handle regime {regime}")
    m = d.m
    center = F[:m].mean(axis=0)
    rng = np.random.default_rng(cfg.seed)
    scale = cfg.perturbation * (1.0 + float(np.abs(F).max()))
    starts = [np.zeros(dim), center]
    while len(starts) < cfg.restarts:
        starts.append(center + scale * rng.standard_normal(dim))
    def run(a0):
        a, val = _descend(F, m, a0, p.nu, p.mu, p.b, main, modulus, cfg.iterations)
        return val, a

    # kernels release the GIL; order of results follows the restart index
    with ThreadPoolExecutor(max_workers=min(len(starts), os.cpu_count() or 1)) as pool:
        results = list(pool.map(run, starts))
    vals = np.array([v for v, _ in results])
    spread = float(vals.max() - vals.min())
    if spread > cfg.tolerance:
        raise OracleFailure(f"restarts disagree by {spread:.3e} > {cfg.tolerance:.1e}: {vals}")
    best = int(np.argmin(vals))  # first index wins ties
    a = results[best][1]
    val, r, t = objective_at(F, m, p, a, main)
    return OracleResult(a, float(r), float(t), float(val), spread)
