"""Stochastic training of the linear primal, compared with the exact solver and the oracle."""

import numpy as np

from csslm import HyperParams, KernelSpec, make_dataset, train
from csslm.oracle import brute_force_primal
from csslm.sgd import SgdConfig, pegasos_train

rng = np.random.default_rng(1)
pts = np.vstack([rng.normal(size=(40, 2)), rng.normal(size=(15, 2)) * 2 + [3, 0]])
d = make_dataset(pts, [1] * 40 + [-1] * 15)
hp = HyperParams(0.3, 0.1, 1.0)

exact = train(d, KernelSpec.linear(), hp)
print("interior point g =", exact.g_objective)

# %% the gap closes as iterations grow, but slowly here
# s and t carry no regularizer, so with steps 1/(nu k) they move only about
# log(K)/nu in total; the optimal margin t is far from the starting value 0
for K in (10**3, 10**4, 10**5, 10**6):
    m = pegasos_train(d, hp, SgdConfig(iterations=K, seed=42))
    print(f"K={K:>8}  g={m.g_objective:.6f}  gap={m.g_objective - exact.g_objective:.2e}"
          f"  t={m.t:.3f} (optimal {exact.t:.3f})")

# %% the small symmetric set starts close to its optimum and converges quickly
sym = make_dataset([[1, 0], [-1, 0], [0, 2], [0, -2]], [1, 1, -1, -1])
m = pegasos_train(sym, HyperParams(0.25, 0.2, 1.0), SgdConfig(iterations=200_000, seed=42))
print("symmetric set: g =", round(m.g_objective, 6), "(optimum -0.175)")

# %% independent check by multi-start subgradient descent
orc = brute_force_primal(d, hp)
print("oracle g =", orc.objective, "restart spread =", orc.spread)
