"""Command-line interface: train, predict, verify, regime, export-boundary."""

from __future__ import annotations

import argparse
import csv
import logging
import sys
from pathlib import Path

import numpy as np

from .certify import check_kkt, nu_property
from .data import DataError, Dataset, load_dataset, make_dataset, read_csv_rows, relabel_banana
from .kernels import FeatureMapUnavailable, KernelError, KernelSpec, gram, load_gram_csv
from .model import Model, ModelError, load_model, save_model
from .oracle import OracleConfig, OracleFailure, brute_force_primal
from .problems import RegimeMismatch
from .regime import HyperParamError, HyperParams, RegimeKind, classify_regime
from .sgd import SgdConfig, pegasos_train
from .train import (SolverFailure, UnboundedRegimeError, recover_degenerate, recover_main,
                    train)

EXIT_OK, EXIT_FAIL, EXIT_UNBOUNDED, EXIT_SOLVER = 0, 1, 2, 3

log = logging.getLogger("csslm")


def fmt(v) -> str:
    return f"{float(v):#.9g}"


class _Parser(argparse.ArgumentParser):
    """Usage errors exit with status 1 like every other failure."""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_FAIL, f"{self.prog}: error: {message}\n")


def _add_kernel(p):
    p.add_argument("--kernel", choices=["linear", "rbf", "poly", "polynomial", "precomputed"])
    p.add_argument("--gamma", type=float)
    p.add_argument("--degree", type=int)
    p.add_argument("--coef0", type=float)
    p.add_argument("--gram", help="precomputed Gram matrix (CSV)")


def _add_hyper(p):
    p.add_argument("--nu", type=float)
    p.add_argument("--mu", type=float)
    p.add_argument("--b", type=float)


def _add_data(p):
    p.add_argument("--data")
    p.add_argument("--format", choices=["csv", "libsvm"])


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="csslm", description="Convex small-sphere large-margin models.")
    parser.add_argument("--verbose", "-v", action="store_true", help="log solver progress")
    parser.add_argument("--config", help="key=value file; command-line flags win")
    sub = parser.add_subparsers(dest="command", parser_class=_Parser, metavar="COMMAND")

    t = sub.add_parser("train", help="train a model")
    _add_data(t)
    _add_kernel(t)
    _add_hyper(t)
    t.add_argument("--solver", choices=["qp", "sgd"])
    t.add_argument("--tol", type=float)
    t.add_argument("--max-iter", type=int)
    t.add_argument("--threshold", choices=["inner", "mid", "outer"])
    t.add_argument("--iterations", type=int, help="sgd iterations")
    t.add_argument("--variant", choices=["plain", "revisit"])
    t.add_argument("--seed", type=int)
    t.add_argument("--no-averaging", action="store_true")
    t.add_argument("--relabel-banana", action="store_true")
    t.add_argument("--cv", help="grid file with nu,mu[,b] rows")
    t.add_argument("--folds", type=int)
    t.add_argument("--out")

    p = sub.add_parser("predict", help="score points with a trained model")
    p.add_argument("--model")
    _add_data(p)
    p.add_argument("--threshold", choices=["inner", "mid", "outer"])
    p.add_argument("--out")

    v = sub.add_parser("verify", help="check optimality certificates of a model")
    v.add_argument("--model")
    _add_data(v)
    v.add_argument("--gram")
    v.add_argument("--relabel-banana", action="store_true")
    v.add_argument("--tol", type=float)

    r = sub.add_parser("regime", help="classify hyperparameters")
    _add_hyper(r)
    _add_data(r)
    r.add_argument("--m", type=int)
    r.add_argument("--n", type=int)

    e = sub.add_parser("export-boundary", help="write a grid of squared distances")
    e.add_argument("--model")
    for k in ("xmin", "xmax", "ymin", "ymax"):
        e.add_argument(f"--{k}", type=float)
    e.add_argument("--resolution", type=int)
    e.add_argument("--threshold", choices=["inner", "mid", "outer"])
    e.add_argument("--out")

    o = sub.add_parser("oracle")  # hidden; regenerates reference values
    _add_data(o)
    _add_kernel(o)
    _add_hyper(o)
    o.add_argument("--iterations", type=int)
    o.add_argument("--restarts", type=int)
    sub._choices_actions = [a for a in sub._choices_actions if a.dest != "oracle"]
    return parser


DEFAULTS = {
    "format": "csv", "kernel": "linear", "b": 1.0, "solver": "qp", "tol": None,
    "max_iter": 200, "threshold": None, "iterations": 200_000, "variant": "plain", "seed": 0,
    "folds": 5, "resolution": 50, "coef0": None, "degree": None,
}
BOOL_KEYS = {"no_averaging", "relabel_banana", "verbose"}


def read_config(path) -> dict:
    out = {}
    for lineno, raw in enumerate(Path(path).read_text().splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise DataError(f"{path}:{lineno}: expected key=value")
        k, v = (s.strip() for s in line.split("=", 1))
        out[k.lstrip("-").replace("-", "_")] = v
    return out


def parse_args(argv):
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.command is None:
        parser.error("a subcommand is required")
    explicit = vars(args)
    cfg = read_config(args.config) if args.config else {}
    # flags win over the config file, which wins over defaults
    sub = parser._subparsers._group_actions[0].choices[args.command]
    known = {a.dest: a for a in sub._actions}
    for k, v in cfg.items():
        if k not in known and k not in BOOL_KEYS:
            parser.error(f"unknown config key {k!r}")
        if k in BOOL_KEYS:
            flag = v.lower() in ("1", "true", "yes", "on")
            if not explicit.get(k):
                setattr(args, k, flag)
        elif explicit.get(k) is None:
            act = known[k]
            try:
                val = act.type(v) if act.type else v
            except ValueError:
                parser.error(f"config key {k}: invalid value {v!r}")
            if act.choices and val not in act.choices:
                parser.error(f"config key {k}: {v!r} not in {list(act.choices)}")
            setattr(args, k, val)
    for k, v in DEFAULTS.items():
        if getattr(args, k, "absent") is None:
            setattr(args, k, v)
    return parser, args


def _need(parser, args, *names):
    missing = [f"--{n.replace('_', '-')}" for n in names if getattr(args, n, None) is None]
    if missing:
        parser.error(f"{args.command}: missing required option(s) {', '.join(missing)}")


def kernel_from_args(args, d: Dataset | None = None) -> KernelSpec:
    kind = args.kernel
    if kind == "linear":
        return KernelSpec.linear()
    if kind == "rbf":
        if args.gamma is None:
            raise KernelError("rbf kernel needs --gamma")
        return KernelSpec.rbf(args.gamma)
    if kind in ("poly", "polynomial"):
        return KernelSpec.polynomial(args.degree if args.degree is not None else 3,
                                     args.coef0 if args.coef0 is not None else 1.0)
    if args.gram is None:
        raise KernelError("precomputed kernel needs --gram")
    K = load_gram_csv(args.gram)
    if d is not None:
        if K.shape != (d.size, d.size):
            raise KernelError(f"Gram matrix is {K.shape[0]}x{K.shape[1]}, data has {d.size} points")
        K = K[np.ix_(d.order, d.order)]
    return KernelSpec.precomputed(K)


def _load(args) -> Dataset:
    d = load_dataset(args.data, args.format)
    if getattr(args, "relabel_banana", False):
        d = relabel_banana(d)
    return d


def _hyper(args) -> HyperParams:
    return HyperParams(args.nu, args.mu, args.b)


def uniqueness_of(model: Model, d: Dataset, K=None):
    """Fresh optimal-set report from the stored multipliers, or None."""
    if model.alpha is None or model.center is not None:
        return None
    if K is None:
        K = gram(model.kernel, d)
    tol = model.diagnostics.get("tol", 1e-9)
    if model.regime.kind is RegimeKind.MAIN_QP:
        return recover_main(model.alpha, K, d, model.hyper, tol)[3]
    if model.regime.kind is RegimeKind.DEGENERATE_QP:
        return recover_degenerate(model.alpha, K, d, model.hyper, tol)[3]
    return None


def print_summary(model: Model, out=None):
    out = out or sys.stdout
    p = model.hyper
    print(f"regime: {model.regime}  ({model.regime.reason})" if model.regime.reason
          else f"regime: {model.regime}", file=out)
    print(f"hyper: nu={fmt(p.nu)} mu={fmt(p.mu)} b={fmt(p.b)}  l={model.n_train} m={model.m} "
          f"n={model.n}", file=out)
    print(f"objective (l*g)={fmt(model.objective)}  g={fmt(model.g_objective)}", file=out)
    print(f"r={fmt(model.r)}  t={fmt(model.t)}  s={fmt(model.s)}  ||a||^2={fmt(model.beta_k_beta)}",
          file=out)
    if model.center is not None:
        print("center: " + " ".join(fmt(v) for v in model.center), file=out)
    else:
        print(f"support vectors: {len(model.support_beta)} of {model.n_train}", file=out)
    if "kkt_max_residual" in model.diagnostics:
        print(f"KKT max residual: {fmt(model.diagnostics['kkt_max_residual'])}", file=out)


def print_uniqueness(u, out=None):
    if u is None:
        return
    out = out or sys.stdout
    yn = {True: "yes", False: "no"}
    print(f"uniqueness: center {yn[bool(u.center_unique)]}, radius {yn[bool(u.radius_unique)]}, "
          f"margin {yn[bool(u.margin_unique)]}", file=out)
    print(f"  r_l={fmt(u.r_l)} r_u={fmt(u.r_u)} q_l={fmt(u.q_l)} q_u={fmt(u.q_u)}", file=out)
    print(f"  free positive SV: {u.free_positive_sv}  free negative SV: {u.free_negative_sv}",
          file=out)
    print(f"  optimal (r, t) set: {u.gamma_star_description}", file=out)
    if u.clipped_at_zero:
        print("  note: lower end of the radius interval was empty and clipped at 0", file=out)


def error_rates(labels, pred):
    pos, neg = labels > 0, labels < 0
    e_pos = float(np.mean(pred[pos] != 1)) if pos.any() else float("nan")
    e_neg = float(np.mean(pred[neg] != -1)) if neg.any() else float("nan")
    return e_pos, e_neg


def _read_grid(path):
    rows = read_csv_rows(path)
    if rows.shape[1] not in (2, 3):
        raise DataError(f"{path}: grid rows must be nu,mu or nu,mu,b")
    return [(float(r[0]), float(r[1]), float(r[2]) if rows.shape[1] == 3 else None) for r in rows]


def _fit(d, spec, hp, args):
    if args.solver == "sgd":
        cfg = SgdConfig(iterations=args.iterations, variant=args.variant, seed=args.seed,
                        averaging=not args.no_averaging, log_every=args.iterations // 10
                        if args.verbose else 0)
        model = pegasos_train(d, hp, cfg, spec)
        return model.with_threshold(args.threshold or "mid")
    return train(d, spec, hp, tol=args.tol or 1e-9, max_iter=args.max_iter,
                 threshold=args.threshold or "mid", verbose=args.verbose)


def cross_validate(d: Dataset, spec: KernelSpec, args):
    """Balanced held-out error for each grid row; returns (best HyperParams, table)."""
    grid = _read_grid(args.cv)
    k = max(2, min(args.folds, d.size))
    perm = np.random.default_rng(args.seed).permutation(d.size)
    folds = np.array_split(perm, k)
    pts, lab = d.points, d.labels
    table = []
    for nu, mu, b in grid:
        hp = HyperParams(nu, mu, b if b is not None else args.b)
        errs = []
        for f in folds:
            tr = np.setdiff1d(perm, f)
            try:
                dtr = make_dataset(pts[tr], lab[tr])
                model = _fit(dtr, spec, hp, args)
            except (UnboundedRegimeError, SolverFailure, DataError, FeatureMapUnavailable,
                    RegimeMismatch) as exc:
                log.info("cv nu=%g mu=%g: %s", nu, mu, exc)
                errs = []
                break
            e_pos, e_neg = error_rates(lab[f], model.predict(pts[f]))
            errs.append(np.nanmean([e_pos, e_neg]))
        table.append((hp, float(np.mean(errs)) if errs else float("nan")))
    ok = [(e, i) for i, (_, e) in enumerate(table) if np.isfinite(e)]
    if not ok:
        raise SolverFailure("no grid point could be trained on every fold")
    return table[min(ok)[1]][0], table


def print_nu(rep, out=None):
    print(rep.format(), file=out or sys.stdout)


def cmd_train(parser, args) -> int:
    _need(parser, args, "data")
    d = _load(args)
    spec = kernel_from_args(args, d)
    if args.cv:
        if args.kernel == "precomputed":
            raise KernelError("--cv is not available with a precomputed kernel")
        hp, table = cross_validate(d, spec, args)
        print("cross-validation (balanced error):")
        for h, e in table:
            print(f"  nu={fmt(h.nu)} mu={fmt(h.mu)} b={fmt(h.b)}  error={fmt(e)}")
        print(f"selected nu={fmt(hp.nu)} mu={fmt(hp.mu)} b={fmt(hp.b)}")
    else:
        _need(parser, args, "nu", "mu")
        hp = _hyper(args)
    if args.solver == "sgd" and spec.kind != "linear":
        raise KernelError("--solver sgd supports the linear kernel only")
    model = _fit(d, spec, hp, args)
    print_summary(model)
    if args.solver == "qp":
        print_uniqueness(uniqueness_of(model, d, spec.matrix if spec.kind == "precomputed"
                                       else None))
    print_nu(nu_property(model))
    if args.out:
        save_model(model, args.out)
        print(f"model written to {args.out}")
    return EXIT_OK


def _read_points(path, fmt_, dim):
    """Points and optional labels; a CSV with dim+1 columns carries labels."""
    if fmt_ == "libsvm":
        d = load_dataset(path, "libsvm")
        pts, lab = d.original_order()
        if pts.shape[1] < dim:
            pts = np.hstack([pts, np.zeros((pts.shape[0], dim - pts.shape[1]))])
        return pts, lab
    arr = read_csv_rows(path)
    if arr.shape[1] == dim:
        return arr, None
    if arr.shape[1] == dim + 1:
        lab = arr[:, -1]
        for i, v in enumerate(lab):
            if v not in (1.0, -1.0):
                raise DataError(f"row {i + 1}: last column {v:g} is not a label in {{+1,-1}} "
                                f"(dimension mismatch? model expects {dim} features)")
        return arr[:, :-1], lab.astype(int)
    raise ModelError(f"dimension mismatch: model expects {dim} features (plus an optional label), "
                     f"file has {arr.shape[1]} columns")


def cmd_predict(parser, args) -> int:
    _need(parser, args, "model", "data")
    model = load_model(args.model)
    pts, lab = _read_points(args.data, args.format, model.dim)
    pred, score = model.decision(pts, args.threshold)
    out = open(args.out, "w", newline="") if args.out else sys.stdout
    try:
        w = csv.writer(out)
        w.writerow(["index", "score", "label"])
        for i, (s, y) in enumerate(zip(score, pred)):
            w.writerow([i, repr(float(s)), int(y)])
    finally:
        if args.out:
            out.close()
    if lab is not None:
        e_pos, e_neg = error_rates(lab, pred)
        stream = sys.stdout if args.out else sys.stderr
        print(f"e+={fmt(100 * e_pos)}%  e-={fmt(100 * e_neg)}%  "
              f"(positives {int(np.sum(lab > 0))}, negatives {int(np.sum(lab < 0))})", file=stream)
    return EXIT_OK


def cmd_verify(parser, args) -> int:
    _need(parser, args, "model", "data")
    model = load_model(args.model)
    d = _load(args)
    K = None
    if model.kernel.kind == "precomputed":
        args.kernel = "precomputed"
        K = kernel_from_args(args, d).matrix
    tol = args.tol if args.tol is not None else 1e-6
    kkt = check_kkt(model, d, K=K)
    nu = nu_property(model)
    print_summary(model)
    print(kkt.format())
    print_uniqueness(uniqueness_of(model, d, K))
    print_nu(nu)
    ok = kkt.ok(tol) and nu.all_hold
    print(f"verify: {'PASS' if ok else 'FAIL'} (tolerance {fmt(tol)})")
    return EXIT_OK if ok else EXIT_FAIL


def cmd_regime(parser, args) -> int:
    _need(parser, args, "nu", "mu")
    if args.data:
        d = load_dataset(args.data, args.format)
        m, n = d.m, d.n
    else:
        _need(parser, args, "m", "n")
        m, n = args.m, args.n
    reg = classify_regime(_hyper(args), m, n)
    print(f"regime: {reg}")
    print(f"reason: {reg.reason}")
    return EXIT_UNBOUNDED if reg.kind is RegimeKind.UNBOUNDED else EXIT_OK


def boundary_grid(model: Model, xmin, xmax, ymin, ymax, resolution, mode=None):
    if model.dim != 2:
        raise ModelError(f"2-D input required, model has dimension {model.dim}")
    if resolution < 1:
        raise ValueError("resolution must be >= 1")

    def axis(lo, hi):
        return np.array([0.5 * (lo + hi)]) if resolution == 1 else np.linspace(lo, hi, resolution)

    gx, gy = np.meshgrid(axis(xmin, xmax), axis(ymin, ymax), indexing="ij")
    pts = np.column_stack([gx.ravel(), gy.ravel()])
    d2 = model.dist2(pts)
    return pts, d2, model.threshold(mode) - d2


def cmd_export_boundary(parser, args) -> int:
    _need(parser, args, "model", "xmin", "xmax", "ymin", "ymax")
    model = load_model(args.model)
    pts, d2, score = boundary_grid(model, args.xmin, args.xmax, args.ymin, args.ymax,
                                   args.resolution, args.threshold)
    out = open(args.out, "w", newline="") if args.out else sys.stdout
    try:
        w = csv.writer(out)
        w.writerow(["x1", "x2", "d2", "score"])
        for (x1, x2), a, s in zip(pts, d2, score):
            w.writerow([repr(float(x1)), repr(float(x2)), repr(float(a)), repr(float(s))])
    finally:
        if args.out:
            out.close()
    if args.out:
        print(f"{len(pts)} grid points written to {args.out}; "
              f"contour levels d2 = {fmt(model.r)} (r) and {fmt(model.r + model.t)} (r+t)")
    return EXIT_OK


def cmd_oracle(parser, args) -> int:
    _need(parser, args, "data", "nu", "mu")
    d = _load(args)
    spec = kernel_from_args(args, d)
    cfg = OracleConfig(restarts=args.restarts or 4,
                       iterations=args.iterations or OracleConfig().iterations)
    res = brute_force_primal(d, _hyper(args), cfg, spec)
    print("a=" + " ".join(fmt(v) for v in res.a))
    print(f"r={fmt(res.r)}  t={fmt(res.t)}  g={fmt(res.objective)}  "
          f"l*g={fmt(d.size * res.objective)}  spread={fmt(res.spread)}")
    return EXIT_OK


COMMANDS = {"train": cmd_train, "predict": cmd_predict, "verify": cmd_verify,
            "regime": cmd_regime, "export-boundary": cmd_export_boundary, "oracle": cmd_oracle}


def main(argv=None) -> int:
    try:
        parser, args = parse_args(argv)
    except SystemExit as exc:
        return exc.code
    except DataError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_FAIL
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(name)s: %(message)s")
    try:
        return COMMANDS[args.command](parser, args)
    except SystemExit as exc:  # usage errors raised by parser.error
        return exc.code
    except UnboundedRegimeError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_UNBOUNDED
    except (SolverFailure, FeatureMapUnavailable, OracleFailure) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_SOLVER
    except (DataError, KernelError, ModelError, HyperParamError, RegimeMismatch,
            OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())
