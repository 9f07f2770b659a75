"""Which problem gets solved for a given (nu, mu, b) and class balance."""

import numpy as np

from csslm import HyperParams, classify_regime

# %% a handful of settings with two positives and two negatives
m, n = 2, 2
for nu, mu in [(0.2, 0.2), (0.3, 0.3), (0.1, 0.5), (0.1, 0.6), (0.6, 0.0)]:
    reg = classify_regime(HyperParams(nu, mu, 1.0), m, n)
    print(f"nu={nu:<4} mu={mu:<4} -> {reg}")

# %% a coarse regime map over the (nu, mu) plane, m = 30, n = 10
symbols = {"MainQP": "M", "DegenerateQP": "q", "DegenerateLP": "L",
           "Unbounded": ".", "TrivialClosedForm": "0"}
mus = np.linspace(0.0, 0.4, 9)
print("\nrows: mu from 0.4 down to 0, columns: nu from 0.05 to 1.0")
for mu in mus[::-1]:
    row = "".join(symbols[classify_regime(HyperParams(nu, float(mu), 1.0), 30, 10).kind.value]
                  for nu in np.linspace(0.05, 1.0, 40))
    print(f"mu={mu:.2f} {row}")
