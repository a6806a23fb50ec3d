"""Command-line interface: ``mqgm synth | fit | sample | eval``.

Exit codes: 0 on success (possibly with warnings), 2 for usage or
validation errors (including missing input files), 3 for runtime
failures.
"""

import argparse
import json
import logging
import os
import sys
from dataclasses import replace

import numpy as np

from . import io
from .features import fit_basis
from .gibbs import GibbsConfig, gibbs_sample
from .model import extract_edges, load_model
from .proxops import QuantileGrid
from .solver import SolverConfig, fit_mqgm, lambda_max
from .synthdata import gen_autoregressive_ring, gen_ring, gen_sparse_gaussian, gen_sparse_t

EXIT_OK, EXIT_USAGE, EXIT_RUNTIME = 0, 2, 3
TIDY_LEVELS = np.round(np.arange(1, 100) / 100.0, 2)


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(message)


def _ensure_dir(path):
    if path:
        os.makedirs(path, exist_ok=True)


def _out_path(args, name):
    return os.path.join(args.out, name)


# ----------------------------------------------------------------- synth

def _generate(args, seed=None):
    seed = args.seed if seed is None else seed
    kind = args.generator
    ring = dict(angle_max=args.angle_max, radius_mean=args.radius_mean, radius_var=args.radius_var)
    if kind == "ring":
        return gen_ring(args.n, seed, **ring)
    if kind == "autoregressive":
        return gen_autoregressive_ring(args.n, args.d, seed, **ring)
    if kind == "gaussian":
        return gen_sparse_gaussian(args.n, args.d, args.edge_prob, seed)
    return gen_sparse_t(args.n, args.d, args.edge_prob, seed, dof=args.dof)


def cmd_synth(args):
    inst = _generate(args)
    _ensure_dir(args.out)
    io.write_dataset_csv(_out_path(args, "data.csv"), inst.data)
    io.write_json(_out_path(args, "truth.json"), io.edges_to_json(inst.truth, inst.data.names))
    io.write_json(_out_path(args, "descriptor.json"), inst.descriptor)
    return {"rows": inst.data.n, "columns": inst.data.d, "edges": len(inst.truth)}


# ------------------------------------------------------------------- fit

def _solver_config(args, lambda1):
    return SolverConfig(lambda1=lambda1, lambda2=args.lambda2, rho=args.rho, max_iters=args.max_iters,
                        tol_abs=args.tol_abs, tol_rel=args.tol_rel, noncrossing=args.noncrossing,
                        adaptive_rho=args.adaptive_rho, relaxation=args.relaxation)


def _exo(args):
    return [c for c in (args.exo or "").split(",") if c]


def cmd_fit(args):
    data = io.read_csv(args.data, _exo(args))
    spec = fit_basis(data, args.m)
    grid = QuantileGrid.uniform(args.r)
    lmax = lambda_max(data, spec, grid)
    lam = args.lambda1 if args.lambda1 is not None else args.lambda_frac * lmax
    cfg = _solver_config(args, lam)
    model = fit_mqgm(data, spec, grid, cfg, threads=args.threads)
    model.save(args.out)
    edges = extract_edges(model, args.threshold)
    diag = {
        "lambda1": lam, "lambda_max": lmax, "n": data.n, "d": data.d, "p": data.p,
        "edges": io.edges_to_json(edges, data.names)["edge_names"],
        "fits": [{"k": f.k, "variable": data.names[f.k], "iterations": f.iterations,
                  "primal_residual": f.primal_residual, "dual_residual": f.dual_residual,
                  "objective": f.objective, "converged": f.converged} for f in model.fits],
    }
    bad = [data.names[f.k] for f in model.fits if not f.converged]
    diag["warning"] = f"not converged: {', '.join(bad)}" if bad else None
    if args.diagnostics:
        io.write_json(args.diagnostics, diag)
    if args.strengths_csv:
        io.write_matrix(args.strengths_csv, data.names, edges.strengths)
    if args.adjacency_csv:
        io.write_matrix(args.adjacency_csv, data.names, edges.adjacency.astype(float))
    if bad:
        print(f"warning: {diag['warning']}", file=sys.stderr)
    return {"edges": len(edges), "converged": not bad}


# ---------------------------------------------------------------- sample

def _vector(text, size, what):
    vals = [float(v) for v in text.split(",")]
    if len(vals) != size:
        raise ValueError(f"{what} has {len(vals)} entries, model expects {size}")
    return np.array(vals)


def cmd_sample(args):
    model = load_model(args.model)
    init = _vector(args.init, model.d, "--init") if args.init else None
    x = _vector(args.x, model.p, "--x") if args.x else None
    cfg = GibbsConfig(n_samples=args.n, burn_in=args.burn_in, thin=args.thin, seed=args.seed)
    S = gibbs_sample(model, init, x, cfg)
    io.write_matrix(args.out, model.names, S)
    return {"samples": S.shape[0]}


# ------------------------------------------------------------------ eval

def _methods(args):
    from .evalsuite import METHODS

    out = [m for m in args.methods.split(",") if m]
    bad = [m for m in out if m not in METHODS]
    if bad or not out:
        raise ValueError(f"unknown method(s) {bad}; choose from {', '.join(METHODS)}")
    return out


def _settings(args):
    from .evalsuite import SWEEP_SOLVER, MqgmSettings, PathSpec

    solver = replace(SWEEP_SOLVER, rho=args.rho, max_iters=args.max_iters, tol_abs=args.tol_abs,
                     tol_rel=args.tol_rel, noncrossing=args.noncrossing)
    return PathSpec(args.path, args.ratio), MqgmSettings(m=args.m, r=args.r, solver=solver)


def _check_dims(model, data):
    if model.d != data.d or model.p != data.p:
        raise ValueError(f"model/data mismatch: model has d={model.d}, p={model.p}; "
                         f"data has d={data.d}, p={data.p}")


def _eval_auc(args):
    from .evalsuite import path_auc, roc_auc, run_path

    truth = io.edges_from_json(io.read_json(args.truth))
    report = {"mode": "auc", "methods": {}}
    rows = []
    if args.model:
        model = load_model(args.model)
        if model.d != truth.d:
            raise ValueError(f"model/truth mismatch: model has d={model.d}, truth has d={truth.d}")
        roc = roc_auc(model.strengths(), truth)
        report["methods"]["mqgm"] = {"auc": roc.auc, "protocol": "threshold", "points": roc.points}
        rows.append(["mqgm", roc.auc])
    else:
        data = io.read_csv(args.data, _exo(args))
        if data.d != truth.d:
            raise ValueError(f"data/truth mismatch: data has d={data.d}, truth has d={truth.d}")
        path, settings = _settings(args)
        for m in _methods(args):
            res = run_path(m, data, path, settings)
            roc = path_auc(res, truth, args.auc_mode)
            report["methods"][m] = {"auc": roc.auc, "protocol": args.auc_mode, "points": roc.points}
            rows.append([m, roc.auc])
    if args.table:
        io.write_csv(args.table, ["method", "auc"], rows)
    return report


def _tidy_rows(method, sampler, data, seed, bins):
    from .evalsuite import equal_count_bins

    rng = np.random.default_rng(seed)
    out = []
    for k in range(data.d):
        draws = data.Y[:, k] if sampler is None else sampler.sample(k, data.Y, rng)
        for j in range(data.d):
            if j == k:
                continue
            for b, idx in enumerate(equal_count_bins(data.Y[:, j], bins)):
                q = np.quantile(draws[idx], TIDY_LEVELS)
                out.extend([method, data.names[k], data.names[j], b, float(a), float(v)]
                           for a, v in zip(TIDY_LEVELS, q))
    return out


def _eval_calibration(args):
    from .evalsuite import (MqgmSampler, best_calibration, calibration_path, cdf_calibration,
                            run_path, sampler_for)

    data = io.read_csv(args.data, _exo(args))
    if data.p:
        raise ValueError("calibration is defined for models without exogenous features")
    report = {"mode": "calibration", "bins": args.bins, "n_points": args.points, "methods": {}}
    tidy = [] if args.tidy_csv else None
    if args.model:
        model = load_model(args.model)
        _check_dims(model, data)
        rep = cdf_calibration(MqgmSampler(model), data, args.bins, args.points, args.seed)
        report["methods"]["mqgm"] = rep.to_dict()
        if tidy is not None:
            tidy += _tidy_rows("mqgm", MqgmSampler(model), data, args.seed, args.bins)
    else:
        path, settings = _settings(args)
        for m in _methods(args):
            res = run_path(m, data, path, settings)
            reps = calibration_path(m, res, data, args.bins, args.points, args.seed)
            best = best_calibration(reps)
            best["lambda_tv"] = float(res.lambdas[best["tv_index"]])
            best["lambda_ks"] = float(res.lambdas[best["ks_index"]])
            best["path"] = [{"lambda": float(lam), **r.to_dict()} for lam, r in zip(res.lambdas, reps)]
            report["methods"][m] = best
            if tidy is not None:
                fit = res.fits[best["tv_index"]]
                tidy += _tidy_rows(m, sampler_for(m, fit, data), data, args.seed, args.bins)
    if tidy is not None:
        tidy += _tidy_rows("observed", None, data, args.seed, args.bins)
        io.write_csv(args.tidy_csv, ["method", "target", "given", "bin", "quantile_level", "value"], tidy)
    if args.table:
        io.write_csv(args.table, ["method", "tv", "tv_normalized", "ks"],
                     [[m, v["tv"], v["tv_normalized"], v["ks"]] for m, v in report["methods"].items()])
    return report


def _eval_recovery(args):
    from .evalsuite import recovery_rate

    path, settings = _settings(args)
    report = {"mode": "recovery", "generator": args.generator, "trials": args.trials,
              "seed0": args.seed, "methods": {}}
    for m in _methods(args):
        res = recovery_rate(args.trials, lambda s: _generate(args, s), m, args.seed, path, settings)
        report["methods"][m] = {"rate": res.rate, "hits": list(res.hits),
                                "first_hit": [-1 if i is None else i for i in res.first_hit]}
    if args.table:
        io.write_csv(args.table, ["method", "rate"],
                     [[m, v["rate"]] for m, v in report["methods"].items()])
    return report


def cmd_eval(args):
    if args.eval_mode == "auc":
        if not args.model and not args.data:
            raise ValueError("eval auc needs --data (path protocol) or --model")
        report = _eval_auc(args)
    elif args.eval_mode == "calibration":
        if not args.data:
            raise ValueError("eval calibration needs --data")
        report = _eval_calibration(args)
    else:
        report = _eval_recovery(args)
    io.write_json(args.out, report)
    return {m: {k: v for k, v in r.items() if k in ("auc", "tv", "ks", "rate")}
            for m, r in report["methods"].items()}


# ---------------------------------------------------------------- parser

def _add_synth_args(p, with_generator=True):
    if with_generator:
        p.add_argument("generator", choices=["ring", "gaussian", "t", "autoregressive"])
    p.add_argument("--n", type=int, default=400, help="number of samples")
    p.add_argument("--d", type=int, default=4, help="dimension (gaussian, t, autoregressive)")
    p.add_argument("--edge-prob", type=float, default=0.1)
    p.add_argument("--dof", type=float, default=3.0)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--angle-max", type=float, default=2 * np.pi)
    p.add_argument("--radius-mean", type=float, default=1.0)
    p.add_argument("--radius-var", type=float, default=0.1, help="variance of the radius noise")


def _add_solver_args(p, sweep=False):
    d = SolverConfig()
    p.add_argument("--rho", type=float, default=d.rho)
    p.add_argument("--max-iters", type=int, default=300 if sweep else d.max_iters)
    p.add_argument("--tol-abs", type=float, default=1e-3 if sweep else d.tol_abs)
    p.add_argument("--tol-rel", type=float, default=1e-2 if sweep else d.tol_rel)
    p.add_argument("--no-noncrossing", dest="noncrossing", action="store_false")
    p.add_argument("--m", type=int, default=10, help="basis functions per variable")
    p.add_argument("--r", type=int, default=20, help="number of quantile levels")


def build_parser():
    parser = _Parser(prog="mqgm", description="Graphs and conditional distributions from penalized quantile regressions.")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("synth", help="generate a synthetic dataset with known edges")
    _add_synth_args(p)
    p.add_argument("--out", default=".", help="output directory")

    p = sub.add_parser("fit", help="fit an MQGM to a CSV dataset")
    p.add_argument("--data", required=True)
    p.add_argument("--out", required=True, help="model JSON path")
    p.add_argument("--exo", default="", help="comma-separated exogenous column names")
    p.add_argument("--lambda1", type=float, default=None)
    p.add_argument("--lambda-frac", type=float, default=0.85,
                   help="lambda1 as a fraction of lambda_max (when --lambda1 is absent)")
    p.add_argument("--lambda2", type=float, default=0.0)
    p.add_argument("--relaxation", type=float, default=SolverConfig().relaxation)
    p.add_argument("--adaptive-rho", action="store_true")
    p.add_argument("--threshold", type=float, default=1e-6, help="edge threshold on group norms")
    p.add_argument("--threads", type=int, default=1)
    p.add_argument("--diagnostics", default=None, help="diagnostics JSON path")
    p.add_argument("--strengths-csv", default=None)
    p.add_argument("--adjacency-csv", default=None)
    _add_solver_args(p)

    p = sub.add_parser("sample", help="Gibbs-sample from a fitted model")
    p.add_argument("--model", required=True)
    p.add_argument("--out", required=True, help="samples CSV path")
    p.add_argument("--n", type=int, default=1000)
    p.add_argument("--burn-in", type=int, default=100)
    p.add_argument("--thin", type=int, default=5)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--init", default=None, help="comma-separated starting point")
    p.add_argument("--x", default=None, help="comma-separated exogenous values")

    p = sub.add_parser("eval", help="structure recovery and calibration experiments")
    p.add_argument("eval_mode", choices=["auc", "calibration", "recovery"])
    p.add_argument("--out", required=True, help="report JSON path")
    p.add_argument("--data", default=None)
    p.add_argument("--exo", default="")
    p.add_argument("--model", default=None, help="evaluate this fitted model instead of a path")
    p.add_argument("--truth", default=None)
    p.add_argument("--methods", default="mqgm,mb,laplace")
    p.add_argument("--path", type=int, default=20, help="number of lambda values")
    p.add_argument("--ratio", type=float, default=None,
                   help="smallest lambda as a fraction of lambda_max")
    p.add_argument("--auc-mode", choices=["refit", "threshold"], default="refit")
    p.add_argument("--bins", type=int, default=5)
    p.add_argument("--points", type=int, default=200)
    p.add_argument("--trials", type=int, default=20)
    p.add_argument("--table", default=None, help="summary table CSV path")
    p.add_argument("--tidy-csv", default=None, help="tidy conditional-quantile CSV for plotting")
    _add_synth_args(p, with_generator=False)
    p.add_argument("--generator", choices=["ring", "gaussian", "t", "autoregressive"], default="ring")
    _add_solver_args(p, sweep=True)

    for sp in sub.choices.values():
        sp.add_argument("--config", default=None, help="JSON file of option defaults")
    return parser, sub


def _apply_config(parser, sub, argv):
    args = parser.parse_args(argv)
    if not args.config:
        return args
    cfg = io.read_json(args.config)
    if not isinstance(cfg, dict):
        raise ValueError("--config must hold a JSON object")
    sp = sub.choices[args.command]
    known = {a.dest for a in sp._actions} - {"help", "config"}
    unknown = sorted(k for k in cfg if k.replace("-", "_") not in known)
    if unknown:
        raise ValueError(f"unknown config key(s): {', '.join(unknown)}")
    sp.set_defaults(**{k.replace("-", "_"): v for k, v in cfg.items()})
    return parser.parse_args(argv)


def _finalize(args):
    if args.command == "eval":
        if args.ratio is None:
            args.ratio = 0.1 if args.eval_mode == "recovery" else 1e-3
        if args.eval_mode == "auc" and not args.truth:
            raise ValueError("eval auc needs --truth")
    if args.command == "synth" and args.generator == "autoregressive" and args.d % 2:
        raise ValueError(f"autoregressive data needs an even --d, got {args.d}")
    return args


COMMANDS = {"synth": cmd_synth, "fit": cmd_fit, "sample": cmd_sample, "eval": cmd_eval}


def main(argv=None):
    parser, sub = build_parser()
    try:
        args = _finalize(_apply_config(parser, sub, argv))
    except UsageError as exc:
        print(f"mqgm: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (ValueError, OSError) as exc:
        print(f"mqgm: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    logging.basicConfig(level=logging.INFO if args.verbose else logging.ERROR,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        summary = COMMANDS[args.command](args)
    except (ValueError, FileNotFoundError, KeyError, json.JSONDecodeError) as exc:
        print(f"mqgm {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except Exception as exc:  # noqa: BLE001 - report any runtime failure as exit 3
        print(f"mqgm {args.command}: runtime failure: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    if args.verbose:
        print(json.dumps(summary, sort_keys=True, default=str))
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
