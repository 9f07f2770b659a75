"""Kernel functions, Gram matrices and explicit feature maps."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

_SQRT3 = np.sqrt(3.0)
_SQRT6 = np.sqrt(6.0)


class KernelError(ValueError):
    pass


class FeatureMapUnavailable(KernelError):
    """The kernel has no finite explicit feature map in this package."""


@dataclass(frozen=True)
class KernelSpec:
    kind: str = "linear"
    gamma: float | None = None
    degree: int | None = None
    coef0: float = 0.0
    matrix: np.ndarray | None = field(default=None, repr=False, compare=False)

    def __post_init__(self):
        if self.kind not in ("linear", "rbf", "polynomial", "precomputed"):
            raise KernelError(f"unknown kernel {self.kind!r}")
        if self.kind == "rbf" and not (self.gamma is not None and self.gamma > 0):
            raise KernelError("rbf kernel requires gamma > 0")
        if self.kind == "polynomial":
            if self.degree is None or int(self.degree) != self.degree or self.degree < 1:
                raise KernelError("polynomial kernel requires a positive integer degree")
        if self.kind == "precomputed" and self.matrix is not None:
            K = np.asarray(self.matrix, dtype=float)
            if K.ndim != 2 or K.shape[0] != K.shape[1]:
                raise KernelError("precomputed Gram matrix must be square")
            scale = max(1.0, float(np.max(np.abs(K))) if K.size else 1.0)
            if np.max(np.abs(K - K.T), initial=0.0) > 1e-10 * scale:
                raise KernelError("precomputed Gram matrix is not symmetric")
            object.__setattr__(self, "matrix", K)

    @classmethod
    def linear(cls):
        return cls("linear")

    @classmethod
    def rbf(cls, gamma):
        return cls("rbf", gamma=float(gamma))

    @classmethod
    def polynomial(cls, degree=3, coef0=1.0):
        return cls("polynomial", degree=int(degree), coef0=float(coef0))

    @classmethod
    def precomputed(cls, matrix):
        return cls("precomputed", matrix=matrix)

    def to_dict(self) -> dict:
        out = {"type": self.kind}
        if self.kind == "rbf":
            out["gamma"] = self.gamma
        elif self.kind == "polynomial":
            out["degree"] = self.degree
            out["coef0"] = self.coef0
        return out

    @classmethod
    def from_dict(cls, d: dict) -> "KernelSpec":
        kind = d["type"]
        if kind == "rbf":
            return cls.rbf(d["gamma"])
        if kind == "polynomial":
            return cls.polynomial(d["degree"], d.get("coef0", 0.0))
        return cls(kind)

    @property
    def has_explicit_features(self) -> bool:
        return self.kind == "linear" or (
            self.kind == "polynomial" and self.degree == 3 and self.coef0 == 1.0)


def _check_pair(x, y):
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.shape != y.shape:
        raise KernelError(f"dimension mismatch: {x.shape} vs {y.shape}")
    return x, y


def eval_kernel(spec: KernelSpec, x, y) -> float:
    """k(x, y) for a single pair of points."""
    if spec.kind == "precomputed":
        raise KernelError("a precomputed kernel cannot be evaluated on raw points")
    x, y = _check_pair(x, y)
    if spec.kind == "linear":
        return float(x @ y)
    if spec.kind == "rbf":
        diff = x - y
        return float(np.exp(-spec.gamma * (diff @ diff)))
    return float((spec.coef0 + x @ y) ** spec.degree)


def cross_kernel(spec: KernelSpec, X, Y) -> np.ndarray:
    """Matrix of k(X[i], Y[j])."""
    if spec.kind == "precomputed":
        raise KernelError("a precomputed kernel cannot be evaluated on raw points")
    X = np.atleast_2d(np.asarray(X, dtype=float))
    Y = np.atleast_2d(np.asarray(Y, dtype=float))
    if X.shape[1] != Y.shape[1]:
        raise KernelError(f"dimension mismatch: {X.shape[1]} vs {Y.shape[1]}")
    G = X @ Y.T
    if spec.kind == "linear":
        return G
    if spec.kind == "polynomial":
        return (spec.coef0 + G) ** spec.degree
    sq = np.einsum("ij,ij->i", X, X)[:, None] + np.einsum("ij,ij->i", Y, Y)[None, :] - 2.0 * G
    return np.exp(-spec.gamma * np.maximum(sq, 0.0))


def kernel_diag(spec: KernelSpec, X) -> np.ndarray:
    """k(x, x) for each row of ``X``."""
    X = np.atleast_2d(np.asarray(X, dtype=float))
    if spec.kind == "rbf":
        return np.ones(X.shape[0])
    sq = np.einsum("ij,ij->i", X, X)
    if spec.kind == "linear":
        return sq
    if spec.kind == "polynomial":
        return (spec.coef0 + sq) ** spec.degree
    raise KernelError("a precomputed kernel cannot be evaluated on raw points")


def gram(spec: KernelSpec, points) -> np.ndarray:
    """Dense Gram matrix; the upper triangle is computed and mirrored.

    ``points`` may be a :class:`~csslm.data.Dataset` or an array.
    """
    X = getattr(points, "points", points)
    if spec.kind == "precomputed":
        K = spec.matrix
        n = np.asarray(X).shape[0]
        if K is None or K.shape != (n, n):
            got = None if K is None else K.shape
            raise KernelError(f"precomputed Gram matrix has shape {got}, expected {(n, n)}")
        return K.copy()
    K = cross_kernel(spec, X, X)
    iu = np.triu_indices(K.shape[0], 1)
    K[(iu[1], iu[0])] = K[iu]
    np.fill_diagonal(K, kernel_diag(spec, X))
    return K


def cubic_feature_map(x) -> np.ndarray:
    """10-dimensional map whose inner products give ``(1 + <x, y>)**3`` in 2-D."""
    X = np.asarray(x, dtype=float)
    single = X.ndim == 1
    X = np.atleast_2d(X)
    if X.shape[1] != 2:
        raise KernelError(f"cubic feature map needs 2-D input, got dimension {X.shape[1]}")
    x1, x2 = X[:, 0], X[:, 1]
    F = np.column_stack([
        np.ones_like(x1),
        _SQRT3 * x1, _SQRT3 * x2,
        _SQRT3 * x1**2, _SQRT3 * x2**2, _SQRT6 * x1 * x2,
        x1**3, x2**3,
        _SQRT3 * x1 * x2**2, _SQRT3 * x1**2 * x2,
    ])
    return F[0] if single else F


def explicit_features(spec: KernelSpec, X) -> np.ndarray:
    """Feature matrix Phi(X) for kernels with a finite map (linear, cubic 2-D)."""
    X = np.atleast_2d(np.asarray(X, dtype=float))
    if spec.kind == "linear":
        return X.copy()
    if spec.has_explicit_features and X.shape[1] == 2:
        return cubic_feature_map(X)
    raise FeatureMapUnavailable(
        f"explicit features required: no finite feature map for kernel {spec.to_dict()}"
        + ("" if spec.kind != "polynomial" else f" on {X.shape[1]}-D input"))


def load_gram_csv(path) -> np.ndarray:
    return np.loadtxt(path, delimiter=",", ndmin=2)
