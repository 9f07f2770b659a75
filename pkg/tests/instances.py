"""Reference datasets and random instance generators shared by the tests."""

import numpy as np

from csslm import HyperParams, KernelSpec, make_dataset

SYMMETRIC_POINTS = [[1, 0], [-1, 0], [0, 2], [0, -2]]
SYMMETRIC_LABELS = [1, 1, -1, -1]
SYMMETRIC_HP = HyperParams(0.25, 0.2, 1.0)

CUBIC = KernelSpec.polynomial(3, 1.0)


def symmetric():
    return make_dataset(SYMMETRIC_POINTS, SYMMETRIC_LABELS)


def two_point():
    return make_dataset([[0, 0], [2, 0]], [1, -1])


def one_class_pair():
    return make_dataset([[1, 0], [-1, 0]], [1, 1])


def random_main_instance(rng, kernel="linear"):
    """Random dataset and hyperparameters with nu + mu < m/l (strictly)."""
    dim = 2 if kernel == "cubic" else int(rng.integers(1, 4))
    ell = int(rng.integers(8, 41))
    m = int(rng.integers(max(2, ell // 4), ell - 1))
    n = ell - m
    scale = 0.8 if kernel == "cubic" else 1.0
    pos = scale * rng.normal(size=(m, dim))
    neg = scale * (rng.normal(size=(n, dim)) * 1.5 + rng.normal(size=dim))
    b = float(rng.choice([1.0, 1.5, 3.0]))
    frac = m / ell
    nu = float(rng.uniform(0.05, 0.7)) * frac
    mu = float(rng.uniform(0.0, 0.9)) * min(frac - nu, b * n / ell)
    d = make_dataset(np.vstack([pos, neg]), [1] * m + [-1] * n)
    spec = CUBIC if kernel == "cubic" else KernelSpec.linear()
    return d, spec, HyperParams(nu, mu, b)


def random_degenerate_instance(rng, kernel="linear"):
    """Random dataset with nu + mu >= m/l and 0 < mu < min(m/l, b n/l)."""
    dim = 2 if kernel in ("cubic", "rbf") else int(rng.integers(1, 4))
    ell = int(rng.integers(6, 31))
    m = int(rng.integers(2, ell - 1))
    n = ell - m
    scale = 0.8 if kernel == "cubic" else 1.0
    pts = scale * rng.normal(size=(ell, dim))
    pts[m:] = pts[m:] * 1.5 + scale * rng.normal(size=dim)
    b = float(rng.choice([1.0, 2.0]))
    frac = m / ell
    mu = float(rng.uniform(0.05, 0.95)) * min(frac, b * n / ell)
    nu = frac - mu + float(rng.uniform(0.0, 0.5))
    d = make_dataset(pts, [1] * m + [-1] * n)
    spec = {"linear": KernelSpec.linear(), "cubic": CUBIC,
            "rbf": KernelSpec.rbf(float(rng.uniform(0.2, 2.0)))}[kernel]
    return d, spec, HyperParams(nu, mu, b)


def random_one_class(rng, dim=2, ell=None):
    ell = ell or int(rng.integers(5, 31))
    pts = rng.normal(size=(ell, dim))
    nu = float(rng.uniform(0.1, 0.9))
    return make_dataset(pts, [1] * ell), HyperParams(nu, 0.0, 1.0)
