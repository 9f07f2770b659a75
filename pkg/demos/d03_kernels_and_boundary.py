"""Nonlinear boundaries with the Gaussian and cubic kernels on a banana-like set."""

import numpy as np

from csslm import HyperParams, KernelSpec, make_dataset, relabel_banana, train
from csslm.cli import boundary_grid

rng = np.random.default_rng(0)
theta = rng.uniform(0, np.pi, 120)
pts = np.c_[4 * np.cos(theta), 3 * np.sin(theta)] + rng.normal(scale=0.5, size=(120, 2))
d = relabel_banana(make_dataset(pts, np.ones(120, dtype=int)))
print(f"{d.m} positives, {d.n} negatives after relabelling")

# %% Gaussian kernel, trained through the dual
rbf = train(d, KernelSpec.rbf(0.5), HyperParams(0.1, 0.05, 1.0))
print("rbf:", rbf.regime, "support points:", rbf.support_index.size)

# %% cubic kernel trained the same way
cubic = train(d, KernelSpec.polynomial(3, 1.0), HyperParams(0.1, 0.05, 1.0))
print("cubic:", cubic.regime, "r =", round(cubic.r, 4), "t =", round(cubic.t, 4))

# %% a coarse text rendering of the rbf decision region
_, _, score = boundary_grid(rbf, -6, 6, -2, 5, 25)
grid = score.reshape(25, 25).T  # rows follow x2
for line in grid[::-1]:
    print("".join("#" if s >= 0 else "." for s in line))
