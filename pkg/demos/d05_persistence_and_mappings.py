"""Save and reload a model, and express it as SSLM and SVDD parameters."""

import tempfile
from pathlib import Path

import numpy as np

from csslm import HyperParams, KernelSpec, load_model, make_dataset, save_model, to_sslm, to_svdd, train

rng = np.random.default_rng(2)
pts = np.vstack([rng.normal(size=(30, 2)), rng.normal(size=(10, 2)) + [3, 3]])
d = make_dataset(pts, [1] * 30 + [-1] * 10)
model = train(d, KernelSpec.rbf(0.7), HyperParams(0.2, 0.1, 2.0))

# %% JSON round trip gives identical scores
with tempfile.TemporaryDirectory() as tmp:
    path = Path(tmp) / "model.json"
    save_model(model, path)
    again = load_model(path)
q = rng.normal(size=(500, 2)) * 3
print("identical scores after reload:",
      np.array_equal(model.decision(q)[1], again.decision(q)[1]))

# %% parameter maps
s = to_sslm(model)
print(f"SSLM: nu_bar={s.nu_bar:.3f} nu1={s.nu1:.3f} nu2={s.nu2:.3f} R={s.R:.4f} rho={s.rho:.4f}")
svdd_model = train(d, KernelSpec.rbf(0.7), HyperParams(0.2, 0.0, 2.0))
v = to_svdd(svdd_model)
print(f"SVDD: C={v.C:.4f} D={v.D:.4f} R={v.R:.4f}")
