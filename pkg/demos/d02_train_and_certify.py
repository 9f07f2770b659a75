"""Train on a toy set, check optimality and read off the fitted sphere."""

from csslm import HyperParams, KernelSpec, check_kkt, make_dataset, nu_property, predict, train

d = make_dataset([[1, 0], [-1, 0], [0, 2], [0, -2]], [1, 1, -1, -1])
model = train(d, KernelSpec.linear(), HyperParams(0.25, 0.2, 1.0))

# %% solution: inner radius r, margin t, objective
print(model.regime, "r =", round(model.r, 9), "t =", round(model.t, 9),
      "g =", round(model.g_objective, 9))

# %% optimality certificate and the nu-property chain
print(check_kkt(model, d).format())
print(nu_property(model).format())
print("uniqueness:", model.diagnostics["uniqueness"]["gamma_star_description"])

# %% scoring: positive scores fall inside the decision sphere
for x in ([0, 0], [0, 2], [0.5, 0.5]):
    print(x, predict(model, x))
