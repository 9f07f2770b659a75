"""Dense primal-dual interior-point solver for convex QPs and LPs.

Solves::

    minimize    0.5 x'Qx + c'x + constant
    subject to  A_eq x = b_eq,  G x <= h,  lo <= x <= hi

with Mehrotra predictor-corrector steps.  Infinite bounds are dropped.
The reduced KKT system is factored with a symmetric indefinite (Bunch-Kaufman
LDL') factorization and a static diagonal regularization.
"""

from __future__ import annotations

import enum
import logging
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import lapack

log = logging.getLogger(__name__)

_REG = 1e-10
_DIVERGE = 1e10


class QpError(ValueError):
    pass


class Status(enum.Enum):
    OPTIMAL = "Optimal"
    INFEASIBLE = "Infeasible"
    UNBOUNDED = "Unbounded"
    MAX_ITER = "MaxIter"


@dataclass
class QpProblem:
    Q: np.ndarray
    c: np.ndarray
    A_eq: np.ndarray | None = None
    b_eq: np.ndarray | None = None
    G: np.ndarray | None = None
    h: np.ndarray | None = None
    lo: np.ndarray | None = None
    hi: np.ndarray | None = None
    constant: float = 0.0

    def __post_init__(self):
        self.c = np.asarray(self.c, dtype=float).reshape(-1)
        nv = self.c.size
        self.Q = np.asarray(self.Q, dtype=float).reshape(nv, nv) if nv else np.zeros((0, 0))
        self.A_eq = _block(self.A_eq, nv)
        self.b_eq = np.zeros(0) if self.b_eq is None else np.asarray(self.b_eq, float).reshape(-1)
        self.G = _block(self.G, nv)
        self.h = np.zeros(0) if self.h is None else np.asarray(self.h, float).reshape(-1)
        self.lo = np.full(nv, -np.inf) if self.lo is None else np.asarray(self.lo, float).reshape(-1)
        self.hi = np.full(nv, np.inf) if self.hi is None else np.asarray(self.hi, float).reshape(-1)
        if self.A_eq.shape[0] != self.b_eq.size:
            raise QpError("A_eq and b_eq row counts differ")
        if self.G.shape[0] != self.h.size:
            raise QpError("G and h row counts differ")
        if self.lo.size != nv or self.hi.size != nv:
            raise QpError("bound vectors must match the number of variables")
        if np.any(self.lo > self.hi):
            raise QpError("lo > hi for some variable")

    @property
    def n_vars(self) -> int:
        return self.c.size

    def check_convex(self, tol: float = 1e-8) -> None:
        if self.n_vars == 0:
            return
        Q = self.Q
        scale = max(1.0, float(np.max(np.abs(Q))))
        if np.max(np.abs(Q - Q.T)) > 1e-12 * scale:
            raise QpError("Q is not symmetric")
        if np.any(Q):
            lmin = float(np.linalg.eigvalsh(0.5 * (Q + Q.T))[0])
            if lmin < -tol * np.linalg.norm(Q, 2):
                raise QpError(f"Q is not positive semidefinite (smallest eigenvalue {lmin:.3e})")

    def objective(self, x) -> float:
        x = np.asarray(x, dtype=float)
        return float(0.5 * x @ self.Q @ x + self.c @ x + self.constant)


def _block(M, nv):
    if M is None:
        return np.zeros((0, nv))
    M = np.asarray(M, dtype=float)
    if M.size == 0:
        # keep rows of an empty-variable system such as "0 = b"
        return np.zeros((M.shape[0] if M.ndim == 2 else 0, nv))
    return M.reshape(-1, nv)


@dataclass
class QpSolution:
    status: Status
    x: np.ndarray
    objective: float
    y: np.ndarray = field(default_factory=lambda: np.zeros(0))  # equality multipliers
    z: np.ndarray = field(default_factory=lambda: np.zeros(0))  # G-row multipliers (>= 0)
    z_hi: np.ndarray = field(default_factory=lambda: np.zeros(0))  # upper-bound multipliers
    z_lo: np.ndarray = field(default_factory=lambda: np.zeros(0))  # lower-bound multipliers
    iterations: int = 0
    kkt_residual: float = np.inf
    dual_objective: float = np.nan
    message: str = ""

    @property
    def ok(self) -> bool:
        return self.status is Status.OPTIMAL


class _Ineq:
    """Stacked inequality operator C x <= d built from G rows and finite bounds."""

    def __init__(self, p: QpProblem):
        self.G = p.G
        self.U = np.flatnonzero(np.isfinite(p.hi))
        self.L = np.flatnonzero(np.isfinite(p.lo))
        self.mg = p.G.shape[0]
        self.nu = self.U.size
        self.d = np.concatenate([p.h, p.hi[self.U], -p.lo[self.L]])
        self.nv = p.n_vars

    @property
    def size(self):
        return self.d.size

    def mul(self, v):
        return np.concatenate([self.G @ v, v[self.U], -v[self.L]])

    def rmul(self, z):
        out = self.G.T @ z[: self.mg]
        out[self.U] += z[self.mg: self.mg + self.nu]
        out[self.L] -= z[self.mg + self.nu:]
        return out


def _max_step(v, dv):
    neg = dv < 0
    if not np.any(neg):
        return np.inf
    return float(np.min(-v[neg] / dv[neg]))


def _ldl_solver(M, M0=None, refine: int = 3):
    """Factor the regularized matrix ``M``; refine solves against ``M0``."""
    lu, piv, info = lapack.dsytrf(M, lower=1)
    if info != 0:
        raise QpError(f"singular Newton system (dsytrf info={info})")

    def base(rhs):
        x, info2 = lapack.dsytrs(lu, piv, rhs, lower=1)
        if info2 != 0:
            raise QpError(f"dsytrs failed (info={info2})")
        return x

    def solve(rhs):
        x = base(rhs)
        if M0 is None:
            return x
        res = rhs - M0 @ x
        err = np.linalg.norm(res)
        for _ in range(refine):
            cand = x + base(res)
            r2 = rhs - M0 @ cand
            e2 = np.linalg.norm(r2)
            if not e2 < err:
                break
            x, res, err = cand, r2, e2
        return x

    return solve


def _residuals(p, C, x, y, z, w, d_scale, c_scale):
    r_d = p.Q @ x + p.c + p.A_eq.T @ y + C.rmul(z)
    r_p = p.A_eq @ x - p.b_eq
    r_i = C.mul(x) + w - C.d
    pobj = 0.5 * x @ p.Q @ x + p.c @ x
    pres = max(np.max(np.abs(r_p), initial=0.0), np.max(np.abs(r_i), initial=0.0)) / d_scale
    # dual residual relative to the largest term that enters it
    terms = (p.Q @ x, p.A_eq.T @ y, C.rmul(z))
    d_size = max((np.max(np.abs(v), initial=0.0) for v in terms), default=0.0)
    dres = np.max(np.abs(r_d), initial=0.0) / (c_scale + d_size)
    comp = float(w @ z) / (1.0 + abs(pobj)) if z.size else 0.0
    return pres, dres, comp, r_d, r_p, r_i, pobj


def _polish(p, C, x, y, z, w, d_scale, c_scale):
    """Re-solve the KKT equations on the active set guessed from (w, z).

    Returns ``(x, y, z, w, residual)`` or None when the active-set system
    cannot be formed.
    """
    nv, me, mg = p.n_vars, p.A_eq.shape[0], C.mg
    active = z > w
    act_g = np.flatnonzero(active[:mg])
    up = C.U[active[mg: mg + C.nu]]
    low = C.L[active[mg + C.nu:]]
    low = np.setdiff1d(low, up)
    xb = np.zeros(nv)
    fixed = np.zeros(nv, dtype=bool)
    xb[up], fixed[up] = p.hi[up], True
    xb[low], fixed[low] = p.lo[low], True
    F = np.flatnonzero(~fixed)
    Ga = p.G[act_g]
    nf, na = F.size, act_g.size
    K = np.zeros((nf + me + na, nf + me + na))
    K[:nf, :nf] = p.Q[np.ix_(F, F)]
    K[:nf, nf: nf + me] = p.A_eq[:, F].T
    K[:nf, nf + me:] = Ga[:, F].T
    K[nf: nf + me, :nf] = p.A_eq[:, F]
    K[nf + me:, :nf] = Ga[:, F]
    rhs = np.concatenate([-p.c[F] - p.Q[np.ix_(F, fixed)] @ xb[fixed],
                          p.b_eq - p.A_eq[:, fixed] @ xb[fixed],
                          p.h[act_g] - Ga[:, fixed] @ xb[fixed]])
    try:
        sol = np.linalg.lstsq(K, rhs, rcond=None)[0]
    except np.linalg.LinAlgError:
        return None
    xn = xb.copy()
    xn[F] = sol[:nf]
    yn = sol[nf: nf + me]
    zg = np.zeros(mg)
    zg[act_g] = sol[nf + me:]
    g = p.Q @ xn + p.c + p.A_eq.T @ yn + p.G.T @ zg
    zu = np.zeros(C.nu)
    zl = np.zeros(C.L.size)
    pos_u = {j: k for k, j in enumerate(C.U)}
    pos_l = {j: k for k, j in enumerate(C.L)}
    for j in up:
        zu[pos_u[j]] = -g[j]
    for j in low:
        zl[pos_l[j]] = g[j]
    zn = np.maximum(np.concatenate([zg, zu, zl]), 0.0)
    wn = np.maximum(C.d - C.mul(xn), 0.0)
    if not (np.all(np.isfinite(xn)) and np.all(np.isfinite(zn))):
        return None
    pres, dres, comp, *_ = _residuals(p, C, xn, yn, zn, wn, d_scale, c_scale)
    return xn, yn, zn, wn, max(pres, dres, comp)


def solve_qp(p: QpProblem, tol: float = 1e-9, max_iter: int = 200,
             verbose: bool = False, check: bool = True) -> QpSolution:
    """Solve ``p``; returns a :class:`QpSolution` whose status says what happened.

    Infeasibility and unboundedness are detected heuristically from iterate
    divergence (norms beyond 1e10) or from a primal recession ray.
    """
    if check:
        p.check_convex()
    nv = p.n_vars
    C = _Ineq(p)
    ni, me = C.size, p.A_eq.shape[0]

    if nv == 0:
        viol = max(np.max(np.abs(p.b_eq), initial=0.0), np.max(-p.h, initial=0.0))
        status = Status.OPTIMAL if viol <= tol else Status.INFEASIBLE
        return QpSolution(status, np.zeros(0), p.constant, y=np.zeros(me), z=np.zeros(p.G.shape[0]),
                          z_hi=np.zeros(0), z_lo=np.zeros(0), kkt_residual=viol,
                          message="empty problem" + ("" if status is Status.OPTIMAL else
                                                     f"; constant constraint violated by {viol:.3e}"))

    lo, hi = p.lo, p.hi
    x = np.zeros(nv)
    both = np.isfinite(lo) & np.isfinite(hi)
    x[both] = 0.5 * (lo[both] + hi[both])
    only_lo = np.isfinite(lo) & ~np.isfinite(hi)
    only_hi = ~np.isfinite(lo) & np.isfinite(hi)
    x[only_lo] = lo[only_lo] + 1.0
    x[only_hi] = hi[only_hi] - 1.0
    w = np.maximum(1.0, C.d - C.mul(x))
    z = np.ones(ni)
    y = np.zeros(me)

    d_scale = 1.0 + max(np.max(np.abs(p.b_eq), initial=0.0),
                        np.max(np.abs(C.d), initial=0.0))
    c_scale = 1.0 + max(np.max(np.abs(p.c), initial=0.0), np.max(np.abs(p.Q), initial=0.0))

    status = Status.MAX_ITER
    message = ""
    res = np.inf
    it = 0
    prev = (x, y, w, z, res)
    for it in range(1, max_iter + 1):
        pres, dres, comp, r_d, r_p, r_i, pobj = _residuals(p, C, x, y, z, w, d_scale, c_scale)
        mu = float(w @ z) / ni if ni else 0.0
        res = max(pres, dres, comp)
        if not np.isfinite(res):
            x, y, w, z, res = prev
            message = "numerical breakdown in the Newton system"
            break
        prev = (x, y, w, z, res)
        if verbose:
            log.info("ipm %3d  pobj=% .10e  pres=%.2e  dres=%.2e  comp=%.2e", it, pobj, pres, dres, comp)
        if res <= tol:
            status = Status.OPTIMAL
            break

        # G rows stay in augmented form (entries -w/z); only bound rows are
        # condensed into the diagonal, which keeps the matrix well scaled
        Dw = z / w
        mg = C.mg
        H0 = p.Q.copy()
        H0[C.U, C.U] += Dw[mg: mg + C.nu]
        H0[C.L, C.L] += Dw[mg + C.nu:]
        H = H0.copy()
        H[np.diag_indices(nv)] += _REG * np.maximum(1.0, np.abs(np.diag(H0)))
        E = p.A_eq
        W = w[:mg] / z[:mg]
        M0 = np.block([[H0, E.T, p.G.T],
                       [E, np.zeros((me, me)), np.zeros((me, mg))],
                       [p.G, np.zeros((mg, me)), -np.diag(W)]])
        M = M0.copy()
        M[:nv, :nv] = H
        k = np.arange(nv, nv + me + mg)
        M[k, k] -= _REG
        try:
            solve = _ldl_solver(M, M0)
        except QpError as exc:
            message = str(exc)
            break

        def direction(r_c):
            tmp = (r_c + z * r_i) / w
            tb = tmp.copy()
            tb[:mg] = 0.0
            rhs = np.concatenate([-r_d - C.rmul(tb), -r_p, -r_i[:mg] - r_c[:mg] / z[:mg]])
            sol = solve(rhs)
            dx, dy = sol[:nv], sol[nv: nv + me]
            dw = -r_i - C.mul(dx)
            dz = tmp + Dw * C.mul(dx)
            dz[:mg] = sol[nv + me:]
            return dx, dy, dw, dz

        if ni == 0:
            dx, dy, _, _ = direction(np.zeros(0))
            x = x + dx
            y = y + dy
            if np.max(np.abs(x)) > _DIVERGE:
                status, message = Status.UNBOUNDED, "primal iterates diverged"
                break
            if np.max(np.abs(y), initial=0.0) > _DIVERGE:
                status, message = Status.INFEASIBLE, "dual iterates diverged"
                break
            continue

        dx, dy, dw, dz = direction(-w * z)
        a_aff = min(1.0, _max_step(w, dw), _max_step(z, dz))
        mu_aff = float((w + a_aff * dw) @ (z + a_aff * dz)) / ni
        sigma = (mu_aff / mu) ** 3 if mu > 0 else 0.0
        if comp < 0.1 * max(pres, dres):
            # keep the barrier from collapsing ahead of feasibility
            sigma = max(sigma, 0.5)
        dx, dy, dw, dz = direction(sigma * mu - w * z - dw * dz)

        a_p = _max_step(w, dw)
        if (not np.isfinite(a_p) and pres <= tol and p.c @ dx + x @ p.Q @ dx < 0
                and np.max(np.abs(p.Q @ dx), initial=0.0) <= 1e-9 * (1 + np.max(np.abs(dx)))
                and np.max(np.abs(p.A_eq @ dx), initial=0.0) <= 1e-9 * (1 + np.max(np.abs(dx)))):
            status = Status.UNBOUNDED
            message = "primal recession ray with decreasing objective"
            break
        step = min(1.0, 0.99 * min(a_p, _max_step(z, dz)))
        x = x + step * dx
        y = y + step * dy
        w = w + step * dw
        z = z + step * dz

        if np.max(np.abs(x)) > _DIVERGE:
            status = Status.UNBOUNDED
            message = "primal iterates diverged"
            break
        if max(np.max(np.abs(y), initial=0.0), np.max(np.abs(z), initial=0.0)) > _DIVERGE:
            status = Status.INFEASIBLE
            message = "dual iterates diverged"
            break

    if status is Status.OPTIMAL and ni:
        polished = _polish(p, C, x, y, z, w, d_scale, c_scale)
        if polished is not None and polished[-1] < res:
            x, y, z, w, res = polished
            message = "polished"

    mg, nu_ = C.mg, C.nu
    z_hi = np.zeros(nv)
    z_lo = np.zeros(nv)
    z_hi[C.U] = z[mg: mg + nu_]
    z_lo[C.L] = z[mg + nu_:]
    dobj = float(-0.5 * x @ p.Q @ x - p.b_eq @ y - C.d @ z) + p.constant
    sol = QpSolution(status, x, p.objective(x), y=y, z=z[:mg].copy(), z_hi=z_hi, z_lo=z_lo,
                     iterations=it, kkt_residual=float(res), dual_objective=dobj, message=message)
    if verbose:
        log.info("ipm finished: %s after %d iterations (%s)", status.value, it, message or "ok")
    return sol


def dump_problem(p: QpProblem, path) -> None:
    """Write dimensions and dense blocks as plain text for external cross-checks."""
    with open(path, "w") as fh:
        fh.write(f"n_vars {p.n_vars}\nn_eq {p.A_eq.shape[0]}\nn_ineq {p.G.shape[0]}\n")
        fh.write(f"constant {p.constant!r}\n")
        for name in ("Q", "c", "A_eq", "b_eq", "G", "h", "lo", "hi"):
            arr = np.atleast_2d(getattr(p, name))
            fh.write(f"{name} {arr.shape[0]} {arr.shape[1]}\n")
            for row in arr:
                fh.write(" ".join(repr(float(v)) for v in row) + "\n")
