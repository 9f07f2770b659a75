"""Hyperparameter validation and regime classification."""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from fractions import Fraction


class HyperParamError(ValueError):
    pass


@dataclass(frozen=True)
class HyperParams:
    nu: float
    mu: float
    b: float = 1.0

    def __post_init__(self):
        if not self.nu > 0:
            raise HyperParamError(f"nu must be > 0, got {self.nu}")
        if not self.mu >= 0:
            raise HyperParamError(f"mu must be >= 0, got {self.mu}")
        if not self.b >= 1:
            raise HyperParamError(f"b must be >= 1, got {self.b}")

    def to_dict(self):
        return {"nu": self.nu, "mu": self.mu, "b": self.b}


class RegimeKind(enum.Enum):
    UNBOUNDED = "Unbounded"
    MAIN_QP = "MainQP"
    DEGENERATE_QP = "DegenerateQP"
    DEGENERATE_LP = "DegenerateLP"
    TRIVIAL = "TrivialClosedForm"


@dataclass(frozen=True)
class Regime:
    kind: RegimeKind
    lam: float | None = None  # m/l - mu, DegenerateQP only
    reason: str = field(default="", compare=False)

    @property
    def name(self) -> str:
        return self.kind.value

    def __str__(self):
        if self.kind is RegimeKind.DEGENERATE_QP:
            return f"DegenerateQP(lambda={self.lam:.9g})"
        return self.kind.value


_TOL = Fraction(1, 10**12)


def _exact(v) -> tuple[Fraction, bool]:
    """Rational value and whether it counts as exact.

    A float whose shortest decimal form has at most 12 significant digits is
    taken to be the decimal the user typed; longer forms (0.3333333333333333)
    are rounded results, and comparisons involving them get a 1e-12 tolerance.
    """
    if isinstance(v, (Fraction, int)):
        return Fraction(v), True
    s = repr(float(v))
    digits = s.lower().split("e")[0].replace("-", "").replace(".", "").strip("0")
    return Fraction(s), len(digits) <= 12


def classify_regime(p: HyperParams, m: int, n: int) -> Regime:
    """Decide which convex problem (if any) yields the global optimum.

    Comparisons are carried out in rational arithmetic on the decimal values
    of (nu, mu, b) and the integer class counts; see :func:`_exact` for when
    a tolerance applies.
    """
    if m < 1 or n < 0:
        raise HyperParamError(f"need m >= 1 and n >= 0, got m={m}, n={n}")
    (nu, e1), (mu, e2), (b, e3) = _exact(p.nu), _exact(p.mu), _exact(p.b)
    tol = Fraction(0) if e1 and e2 and e3 else _TOL
    ell = m + n
    pos_frac = Fraction(m, ell)
    neg_cap = b * Fraction(n, ell)
    bound = min(pos_frac, neg_cap)
    if mu > bound + tol:
        which = "m/l" if pos_frac <= neg_cap else "b*n/l"
        reason = (f"mu={float(mu):.9g} > min{{m/l, b*n/l}} = {float(bound):.9g} "
                  f"(binding: {which}); the objective is unbounded below")
        return Regime(RegimeKind.UNBOUNDED, reason=reason)
    if mu + nu < pos_frac - tol:
        return Regime(RegimeKind.MAIN_QP, reason=f"nu+mu={float(nu + mu):.9g} < m/l={float(pos_frac):.9g}")
    if mu <= tol:
        return Regime(RegimeKind.TRIVIAL, reason="mu=0 and nu >= m/l")
    if mu < pos_frac - tol:
        lam = pos_frac - mu
        return Regime(RegimeKind.DEGENERATE_QP, lam=float(lam),
                      reason=f"nu+mu >= m/l and 0 < mu < m/l (lambda={float(lam):.9g})")
    return Regime(RegimeKind.DEGENERATE_LP, reason="mu = m/l")
