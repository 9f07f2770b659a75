"""Trained hypersphere model: prediction and JSON persistence."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field, replace

import numpy as np

from .kernels import KernelSpec, cross_kernel, explicit_features, kernel_diag
from .regime import HyperParams, Regime, RegimeKind

FORMAT_VERSION = 1
THRESHOLDS = ("inner", "mid", "outer")


class ModelError(ValueError):
    pass


def objective_g(dist2: np.ndarray, m: int, p: HyperParams, r: float, t: float) -> float:
    """Regularized empirical risk g(a, r, t) given squared distances to ``a``."""
    ell = dist2.size
    pos = np.maximum(dist2[:m] - r, 0.0).sum()
    neg = np.maximum(r + t - dist2[m:], 0.0).sum()
    return 0.5 * (p.nu * r - p.mu * t) + (pos + p.b * neg) / (2.0 * ell)


@dataclass(frozen=True)
class Model:
    kernel: KernelSpec
    hyper: HyperParams
    regime: Regime
    r: float
    t: float
    s: float
    beta_k_beta: float
    n_train: int
    m: int
    support_index: np.ndarray = field(default_factory=lambda: np.zeros(0, dtype=int))
    support_points: np.ndarray | None = None
    support_labels: np.ndarray = field(default_factory=lambda: np.zeros(0, dtype=int))
    support_beta: np.ndarray = field(default_factory=lambda: np.zeros(0))
    center: np.ndarray | None = None  # explicit feature-space center
    alpha: np.ndarray | None = None
    xi: np.ndarray | None = None
    threshold_mode: str = "mid"
    diagnostics: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        if self.threshold_mode not in THRESHOLDS:
            raise ModelError(f"threshold mode must be one of {THRESHOLDS}")

    @property
    def n(self) -> int:
        return self.n_train - self.m

    @property
    def dim(self) -> int:
        if self.support_points is not None and self.support_points.size:
            return self.support_points.shape[1]
        return int(self.diagnostics.get("input_dim", 0))

    def beta_full(self) -> np.ndarray:
        beta = np.zeros(self.n_train)
        beta[self.support_index] = self.support_beta
        return beta

    def with_threshold(self, mode: str) -> "Model":
        return replace(self, threshold_mode=mode)

    def threshold(self, mode: str | None = None) -> float:
        mode = mode or self.threshold_mode
        if mode == "inner":
            return self.r
        if mode == "outer":
            return self.r + self.t
        if mode == "mid":
            return self.r + 0.5 * self.t
        raise ModelError(f"unknown threshold mode {mode!r}")

    def dist2(self, X) -> np.ndarray:
        """Squared feature-space distance of each row of ``X`` to the center."""
        X = np.atleast_2d(np.asarray(X, dtype=float))
        if self.kernel.kind == "precomputed":
            raise ModelError("models trained on a precomputed kernel cannot score new points")
        if self.dim and X.shape[1] != self.dim:
            raise ModelError(f"dimension mismatch: model expects {self.dim} features, got {X.shape[1]}")
        kxx = kernel_diag(self.kernel, X)
        if self.center is not None:
            F = explicit_features(self.kernel, X)
            return kxx - 2.0 * (F @ self.center) + self.beta_k_beta
        Kx = cross_kernel(self.kernel, X, self.support_points)
        return kxx - 2.0 * (Kx @ self.support_beta) + self.beta_k_beta

    def decision(self, X, mode: str | None = None):
        """``(labels, scores)``; score = threshold - d^2, ties go to -1."""
        d2 = self.dist2(X)
        score = self.threshold(mode) - d2
        return np.where(score > 0, 1, -1), score

    def predict(self, X, mode: str | None = None) -> np.ndarray:
        return self.decision(X, mode)[0]

    @property
    def objective(self) -> float:
        """Optimal value on the primal QP scale (l * g)."""
        return self.diagnostics.get("objective", math.nan)

    @property
    def g_objective(self) -> float:
        return self.objective / self.n_train


def predict(model: Model, x, mode: str | None = None):
    """Label and score for a single point."""
    lab, score = model.decision(np.asarray(x, dtype=float)[None, :], mode)
    return int(lab[0]), float(score[0])


def _num(v):
    if v is None:
        return None
    v = float(v)
    if math.isfinite(v):
        return v
    if math.isnan(v):
        return "nan"
    return "inf" if v > 0 else "-inf"


def _unnum(v):
    if isinstance(v, str):
        return float(v)
    return v


def _clean(obj):
    """JSON-safe copy: numpy scalars/arrays to lists, non-finite floats to strings."""
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _clean(obj.tolist())
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        return _num(obj)
    return obj


def model_to_dict(model: Model) -> dict:
    sp = []
    if model.support_points is not None:
        for i, x, y, b in zip(model.support_index, model.support_points,
                              model.support_labels, model.support_beta):
            sp.append({"index": int(i), "features": [float(v) for v in x],
                       "label": int(y), "beta": float(b)})
    return {
        "version": FORMAT_VERSION,
        "kernel": model.kernel.to_dict(),
        "hyper": model.hyper.to_dict(),
        "regime": {"kind": model.regime.name, "lambda": model.regime.lam},
        "training": {"n_train": model.n_train, "m": model.m, "n": model.n},
        "support_points": sp,
        "center": None if model.center is None else [float(v) for v in model.center],
        "r": model.r,
        "t": model.t,
        "s": model.s,
        "beta_k_beta": model.beta_k_beta,
        "threshold_mode": model.threshold_mode,
        "dual": {
            "alpha": None if model.alpha is None else [float(v) for v in model.alpha],
            "xi": None if model.xi is None else [float(v) for v in model.xi],
        },
        "diagnostics": _clean(model.diagnostics),
    }


def model_from_dict(doc: dict) -> Model:
    if doc.get("version") != FORMAT_VERSION:
        raise ModelError(f"unsupported model format version {doc.get('version')!r}")
    sp = doc["support_points"]
    center = doc.get("center")
    dual = doc.get("dual") or {}
    diagnostics = doc.get("diagnostics") or {}
    dim = len(sp[0]["features"]) if sp else int(diagnostics.get("input_dim", 0))
    reg = doc["regime"]
    return Model(
        kernel=KernelSpec.from_dict(doc["kernel"]),
        hyper=HyperParams(**doc["hyper"]),
        regime=Regime(RegimeKind(reg["kind"]), lam=reg.get("lambda")),
        r=_unnum(doc["r"]), t=_unnum(doc["t"]), s=_unnum(doc["s"]),
        beta_k_beta=_unnum(doc["beta_k_beta"]),
        n_train=int(doc["training"]["n_train"]), m=int(doc["training"]["m"]),
        support_index=np.array([e["index"] for e in sp], dtype=int),
        support_points=np.array([e["features"] for e in sp], dtype=float).reshape(len(sp), dim),
        support_labels=np.array([e["label"] for e in sp], dtype=int),
        support_beta=np.array([e["beta"] for e in sp], dtype=float),
        center=None if center is None else np.array(center, dtype=float),
        alpha=None if dual.get("alpha") is None else np.array(dual["alpha"], dtype=float),
        xi=None if dual.get("xi") is None else np.array(dual["xi"], dtype=float),
        threshold_mode=doc.get("threshold_mode", "mid"),
        diagnostics=diagnostics,
    )


def save_model(model: Model, path) -> None:
    with open(path, "w") as fh:
        json.dump(model_to_dict(model), fh, indent=1, allow_nan=False)
        fh.write("\n")


def load_model(path) -> Model:
    with open(path) as fh:
        return model_from_dict(json.load(fh))
