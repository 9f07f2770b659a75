"""Convex small-sphere large-margin hypersphere models."""

from .certify import KktReport, NuReport, check_kkt, nu_property
from .connections import to_sslm, to_svdd
from .data import Dataset, DataError, load_dataset, make_dataset, relabel_banana, save_dataset
from .kernels import KernelSpec, cubic_feature_map, eval_kernel, gram
from .model import Model, load_model, predict, save_model
from .problems import (assemble_degenerate_dual, assemble_lp, assemble_main_dual,
                       assemble_primal_qp)
from .qp import QpProblem, QpSolution, Status, solve_qp
from .regime import HyperParams, Regime, RegimeKind, classify_regime
from .train import (SolverFailure, UnboundedRegimeError, UniquenessReport, closed_form_mu0,
                    recover_degenerate, recover_main, train)

__version__ = "0.1.0"
