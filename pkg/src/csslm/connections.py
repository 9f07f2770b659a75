"""Parameter and solution maps to the classical SSLM and SVDD formulations."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .model import Model


class MappingError(ValueError):
    pass


@dataclass(frozen=True)
class SslmSolution:
    nu_bar: float
    nu1: float
    nu2: float
    beta: np.ndarray | None
    center: np.ndarray | None
    R: float
    rho: float


@dataclass(frozen=True)
class SvddSolution:
    C: float
    D: float | None  # None for one-class
    beta: np.ndarray | None
    center: np.ndarray | None
    R: float


def sslm_parameters(nu: float, mu: float, b: float, ell: int, m: int, n: int):
    if n == 0:
        raise MappingError("SSLM mapping needs at least one negative (nu2 = l*nu/(n*b))")
    return mu / nu, ell * nu / m, ell * nu / (n * b)


def to_sslm(model: Model) -> SslmSolution:
    p = model.hyper
    nb, n1, n2 = sslm_parameters(p.nu, p.mu, p.b, model.n_train, model.m, model.n)
    return SslmSolution(nb, n1, n2, model.beta_full() if model.center is None else None,
                        model.center, math.sqrt(max(model.r, 0.0)), math.sqrt(max(model.t, 0.0)))


def svdd_parameters(nu: float, b: float, ell: int):
    return 1.0 / (nu * ell), b / (nu * ell)


def to_svdd(model: Model) -> SvddSolution:
    p = model.hyper
    if p.mu != 0:
        raise MappingError(f"SVDD mapping requires mu=0 (got mu={p.mu})")
    C, D = svdd_parameters(p.nu, p.b, model.n_train)
    return SvddSolution(C, D if model.n else None,
                        model.beta_full() if model.center is None else None,
                        model.center, math.sqrt(max(model.r, 0.0)))
