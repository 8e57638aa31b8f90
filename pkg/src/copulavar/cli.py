"""Command line front end.

Subcommands: estimate, dag, irf, cv, aic, simulate.  Every subcommand
writes a ``manifest.json`` into the output directory recording the
effective parameters and seeds; rerunning with the same inputs
reproduces every output byte for byte.  Exit codes: 0 success, 2 usage
or IO error, 3 numerical failure, 4 identification failure.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .errors import CopulaVarError, IdentificationError, NumericalError
from .irf import EmpiricalMarginal, IrfRequest, irf_linearized, irf_mc
from .pcdag import PcConfig, discover_cpdag, fixed_gaps_from_support
from .precision import estimate_precision, var_params
from .scaling import build_lagged, load_panel_csv, psd_repair, scaling_matrix
from .simulate import METRIC_KEYS, SimDesign, run_benchmark
from .svar import model_from_json_dict, structural_coefficients
from .tuning import CvPlan, aic_lag_order, cross_validate

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_NUMERICAL = 3
EXIT_IDENTIFICATION = 4


class UsageError(CopulaVarError):
    pass


def _float_fmt(value) -> str:
    return "" if value is None or (isinstance(value, float) and np.isnan(value)) else f"{value:.17g}"


def _write_matrix_csv(path: Path, matrix: np.ndarray, header) -> None:
    lines = [",".join(header)]
    for row in np.atleast_2d(matrix):
        lines.append(",".join(f"{v:.17g}" for v in row))
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")


def _write_json(path: Path, doc: dict) -> None:
    path.write_text(json.dumps(doc, indent=2, sort_keys=True) + "\n", encoding="utf-8")


def _write_manifest(out: Path, command: str, params: dict) -> None:
    _write_json(
        out / "manifest.json",
        {"command": command, "package_version": __version__, "parameters": params},
    )


def _out_dir(args) -> Path:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _load_panel(args):
    path = Path(args.input)
    if not path.exists():
        raise FileNotFoundError(f"input file not found: {path}")
    panel = load_panel_csv(path)
    if args.diff:
        panel = panel.difference([c.strip() for c in args.diff.split(",") if c.strip()])
    return panel


def _effective_penalty(args, panel, p):
    """Returns (lambda, tau, cv_doc): cross-validated when --cv is set."""
    if args.cv:
        result = cross_validate(
            panel, method=args.method, plan=CvPlan(n_folds=args.folds), p=p
        )
        doc = {
            "lambda_zero": result.lambda_zero,
            "grid": list(result.grid),
            "mean_scores": list(result.mean_scores),
            "fold_scores": result.fold_scores.tolist(),
            "lambda_star": result.lambda_star,
            "tau_star": result.tau_star,
        }
        return result.lambda_star, result.tau_star, doc
    if args.lam is None:
        raise UsageError("either --lambda or --cv is required")
    if args.lam <= 0:
        raise UsageError("--lambda must be positive (use --cv to select it)")
    tau = args.tau if args.tau is not None else 2.0 * args.lam
    if tau < args.lam:
        raise UsageError("--tau must be at least --lambda")
    return args.lam, tau, None


def _fit(panel, args, p):
    lam, tau, cv_doc = _effective_penalty(args, panel, p)
    lagged = build_lagged(panel, p)
    sigma = scaling_matrix(lagged)
    if args.method == "lasso":
        sigma = psd_repair(sigma)
    theta = estimate_precision(sigma, method=args.method, lam=lam, tau=tau)
    params = var_params(theta)
    return lagged, sigma, theta, params, lam, tau, cv_doc


def cmd_estimate(args) -> int:
    panel = _load_panel(args)
    if args.lags < 1:
        raise UsageError("--lags must be at least 1")
    out = _out_dir(args)
    lagged, sigma, theta, params, lam, tau, cv_doc = _fit(panel, args, args.lags)

    _write_matrix_csv(out / "sigma.csv", sigma.sigma, lagged.names)
    _write_matrix_csv(out / "theta.csv", theta.theta, lagged.names)
    regressors = lagged.names[panel.k :]
    _write_matrix_csv(out / "a_hat.csv", params.a, regressors)
    _write_matrix_csv(out / "sigma_eps.csv", params.sigma_eps, panel.names)
    _write_json(
        out / "estimate.json",
        {
            "names": list(panel.names),
            "lagged_names": list(lagged.names),
            "theta": theta.theta.tolist(),
            "a": params.a.tolist(),
            "sigma_eps": params.sigma_eps.tolist(),
            "spectral_radius": params.spectral_radius,
        },
    )
    _write_manifest(
        out,
        "estimate",
        {
            "input": str(args.input),
            "diff": args.diff or "",
            "lags": args.lags,
            "method": args.method,
            "lambda": lam,
            "tau": tau,
            "cv": cv_doc,
        },
    )
    return EXIT_OK


def cmd_dag(args) -> int:
    panel = _load_panel(args)
    if args.lags < 1:
        raise UsageError("--lags must be at least 1")
    if not 0.0 < args.alpha < 1.0:
        raise UsageError("--alpha must be in (0, 1)")
    out = _out_dir(args)
    lagged, sigma, theta, params, lam, tau, cv_doc = _fit(panel, args, args.lags)

    gaps = None
    if args.restricted_pc:
        gaps = fixed_gaps_from_support(theta.support.mask[: panel.k, : panel.k])
    config = PcConfig(alpha=args.alpha, fixed_gaps=gaps)
    graph = discover_cpdag(
        params.sigma_eps, lagged.values.shape[0], config, panel.names
    )
    (out / "graph.dot").write_text(graph.to_dot(), encoding="utf-8")
    (out / "graph.json").write_text(graph.to_json(), encoding="utf-8")

    identified = graph.is_fully_directed()
    if identified:
        model = structural_coefficients(params.sigma_eps, graph, params.a)
        (out / "model.json").write_text(model.to_json(), encoding="utf-8")
        for stem, matrix in (
            ("pi", model.pi),
            ("delta", model.delta),
            ("d", model.d),
            ("h", model.h),
            ("sigma_xi", model.sigma_xi[None, :]),
        ):
            _write_matrix_csv(out / f"{stem}.csv", matrix, panel.names)
    else:
        undirected = [
            f"{graph.names[i]} - {graph.names[j]}" for i, j in sorted(graph.undirected)
        ]
        print(
            "warning: CPDAG has undirected edges "
            f"({', '.join(undirected)}); structural model not identified",
            file=sys.stderr,
        )
    _write_manifest(
        out,
        "dag",
        {
            "input": str(args.input),
            "diff": args.diff or "",
            "lags": args.lags,
            "method": args.method,
            "lambda": lam,
            "tau": tau,
            "cv": cv_doc,
            "alpha": args.alpha,
            "restricted_pc": bool(args.restricted_pc),
            "identified": identified,
            "warnings": graph.warnings,
        },
    )
    return EXIT_OK


def _resolve_column(token: str, names) -> int:
    if token in names:
        return names.index(token)
    try:
        idx = int(token)
    except ValueError:
        raise UsageError(f"unknown column {token!r}") from None
    if not 0 <= idx < len(names):
        raise UsageError(f"column index {idx} out of range")
    return idx


def cmd_irf(args) -> int:
    panel = _load_panel(args)
    model_path = Path(args.model)
    if not model_path.exists():
        print(f"structural model not found: {model_path}; run dag first", file=sys.stderr)
        return EXIT_USAGE
    doc = json.loads(model_path.read_text(encoding="utf-8"))
    if "h" not in doc:
        raise IdentificationError("model file lacks structural matrices; run dag first")
    model = model_from_json_dict(doc)

    shock = _resolve_column(args.shock, list(panel.names))
    response = _resolve_column(args.response, list(panel.names))
    horizons = tuple(range(args.horizons + 1))
    mode = args.mode
    x = None
    if mode == "conditional":
        if args.condition_row is None:
            raise UsageError("conditional mode requires --condition-row")
        t = args.condition_row
        p = max(model.n_lags, 1)
        if t < p - 1 or t >= panel.n:
            raise UsageError("--condition-row leaves too few lagged rows")
        x = np.concatenate([panel.values[t - d] for d in range(p)])

    request = IrfRequest(
        shock_index=shock,
        response_index=response,
        delta=args.delta,
        horizons=horizons,
        mc_draws=args.draws,
        seed=args.seed,
        mode=mode if mode != "linearized" else "linearized",
        x=x,
        unit_variance=args.unit_variance,
    )
    if mode == "linearized":
        values = irf_linearized(model, request)
        stderrs = [None] * len(values)
    else:
        if args.seed is None:
            raise UsageError("--seed is required for Monte Carlo impulse responses")
        marginals = [EmpiricalMarginal(panel.values[:, j]) for j in range(panel.k)]
        values, stderrs = irf_mc(model, marginals, request)

    out = _out_dir(args)
    lines = ["horizon,shock,response,value,mc_stderr"]
    for h, v, se in zip(horizons, values, stderrs):
        lines.append(
            f"{h},{panel.names[shock]},{panel.names[response]},"
            f"{v:.17g},{_float_fmt(se)}"
        )
    (out / "irf.csv").write_text("\n".join(lines) + "\n", encoding="utf-8")
    _write_manifest(
        out,
        "irf",
        {
            "input": str(args.input),
            "diff": args.diff or "",
            "model": str(args.model),
            "shock": panel.names[shock],
            "response": panel.names[response],
            "delta": args.delta,
            "horizons": args.horizons,
            "draws": args.draws,
            "mode": mode,
            "condition_row": args.condition_row,
            "unit_variance": bool(args.unit_variance),
            "seed": args.seed,
        },
    )
    return EXIT_OK


def cmd_cv(args) -> int:
    panel = _load_panel(args)
    result = cross_validate(
        panel, method=args.method, plan=CvPlan(n_folds=args.folds), p=args.lags
    )
    doc = {
        "method": args.method,
        "lags": args.lags,
        "folds": args.folds,
        "lambda_zero": result.lambda_zero,
        "grid": list(result.grid),
        "fold_scores": result.fold_scores.tolist(),
        "mean_scores": list(result.mean_scores),
        "lambda_star": result.lambda_star,
        "tau_star": result.tau_star,
    }
    print(json.dumps(doc, indent=2, sort_keys=True))
    out = _out_dir(args)
    _write_json(out / "cv.json", doc)
    _write_manifest(
        out,
        "cv",
        {
            "input": str(args.input),
            "diff": args.diff or "",
            "lags": args.lags,
            "method": args.method,
            "folds": args.folds,
        },
    )
    return EXIT_OK


def cmd_aic(args) -> int:
    panel = _load_panel(args)
    result = aic_lag_order(panel, args.pmax, method=args.method, lam=args.lam)
    doc = {
        "selected_p": result.p,
        "table": [
            {"p": p, "log_det": ld, "nonzeros": nz, "aic": aic}
            for (p, ld, nz, aic) in result.table
        ],
    }
    print(json.dumps(doc, indent=2, sort_keys=True))
    out = _out_dir(args)
    _write_json(out / "aic.json", doc)
    _write_manifest(
        out,
        "aic",
        {
            "input": str(args.input),
            "diff": args.diff or "",
            "pmax": args.pmax,
            "method": args.method,
            "lambda": args.lam,
        },
    )
    return EXIT_OK


def cmd_simulate(args) -> int:
    design = SimDesign(args.structure, args.a, args.clusters, args.n, args.seed)
    alpha = args.alpha if args.alpha is not None else (0.01 if design.k <= 30 else 0.001)
    rows = []
    for policy in args.policy or ["cv"]:
        parsed: object = policy
        if policy.startswith("fixed:"):
            parsed = float(policy.split(":", 1)[1])
        rows.append(
            run_benchmark(
                design,
                method=args.method,
                reps=args.reps,
                policy=parsed,
                restricted=not args.unrestricted_pc,
                alpha=alpha,
                cv_presample=args.cv_presample,
            )
        )
    out = _out_dir(args)
    header = ["structure", "a", "clusters", "n", "reps", "method", "policy", "restricted"]
    for key in METRIC_KEYS:
        header += [f"{key}_mean", f"{key}_se"]
    lines = [",".join(header)]
    for row in rows:
        cells = [
            design.structure,
            f"{design.a:g}",
            str(design.n_clusters),
            str(design.n),
            str(row.reps),
            row.method,
            row.policy,
            str(row.restricted).lower(),
        ]
        for key in METRIC_KEYS:
            cells += [_float_fmt(row.means[key]), _float_fmt(row.stderrs[key])]
        lines.append(",".join(cells))
    (out / "benchmark.csv").write_text("\n".join(lines) + "\n", encoding="utf-8")
    _write_manifest(
        out,
        "simulate",
        {
            "structure": design.structure,
            "a": design.a,
            "clusters": design.n_clusters,
            "n": design.n,
            "reps": args.reps,
            "seed": args.seed,
            "rep_seeds": [design.seed + r for r in range(args.reps)],
            "method": args.method,
            "policies": list(args.policy or ["cv"]),
            "alpha": alpha,
            "restricted_pc": not args.unrestricted_pc,
            "cv_presample": bool(args.cv_presample),
        },
    )
    return EXIT_OK


def _add_common_io(parser, with_input=True):
    if with_input:
        parser.add_argument("--input", required=True, help="panel CSV (header row)")
        parser.add_argument(
            "--diff",
            default="",
            help="comma separated columns to first-difference before estimation",
        )
    parser.add_argument("--out", required=True, help="output directory")


def _add_fit_options(parser):
    parser.add_argument("--lags", type=int, default=1, help="lag order p (default 1)")
    parser.add_argument(
        "--method", choices=("lasso", "clime"), default="lasso", help="column selector"
    )
    parser.add_argument(
        "--lambda", dest="lam", type=float, default=None, help="penalty level"
    )
    parser.add_argument(
        "--tau", type=float, default=None, help="support threshold (default 2*lambda)"
    )
    parser.add_argument(
        "--cv", action="store_true", help="cross-validate the penalty instead"
    )
    parser.add_argument(
        "--folds", type=int, default=5, help="cross-validation folds (default 5)"
    )


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="copulavar",
        description="Latent Gaussian-copula VAR estimation and causal discovery",
    )
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    est = sub.add_parser("estimate", help="scaling matrix, precision, VAR parameters")
    _add_common_io(est)
    _add_fit_options(est)
    est.set_defaults(func=cmd_estimate)

    dag = sub.add_parser("dag", help="estimate plus causal graph and structural model")
    _add_common_io(dag)
    _add_fit_options(dag)
    dag.add_argument("--alpha", type=float, default=0.01, help="PC test level")
    dag.add_argument(
        "--restricted-pc",
        action="store_true",
        help="exclude edges where the contemporaneous precision block is zero",
    )
    dag.set_defaults(func=cmd_dag)

    irf = sub.add_parser("irf", help="impulse responses from a fitted model")
    _add_common_io(irf)
    irf.add_argument("--model", required=True, help="model.json produced by dag")
    irf.add_argument("--shock", required=True, help="shocked variable (name or index)")
    irf.add_argument("--response", required=True, help="response variable")
    irf.add_argument("--delta", type=float, default=1.0, help="shock size")
    irf.add_argument("--horizons", type=int, default=10, help="maximum horizon")
    irf.add_argument("--draws", type=int, default=10_000, help="Monte Carlo draws")
    irf.add_argument(
        "--mode",
        choices=("unconditional", "conditional", "linearized"),
        default="unconditional",
    )
    irf.add_argument(
        "--condition-row",
        type=int,
        default=None,
        help="panel row supplying the conditioning state (conditional mode)",
    )
    irf.add_argument("--unit-variance", action="store_true")
    irf.add_argument("--seed", type=int, default=None, help="Monte Carlo seed")
    irf.set_defaults(func=cmd_irf)

    cv = sub.add_parser("cv", help="cross-validated penalty selection")
    _add_common_io(cv)
    cv.add_argument("--lags", type=int, default=1)
    cv.add_argument("--method", choices=("lasso", "clime"), default="lasso")
    cv.add_argument("--folds", type=int, default=5)
    cv.set_defaults(func=cmd_cv)

    aic = sub.add_parser("aic", help="lag order selection")
    _add_common_io(aic)
    aic.add_argument("--pmax", type=int, default=4)
    aic.add_argument("--method", choices=("lasso", "clime"), default="lasso")
    aic.add_argument("--lambda", dest="lam", type=float, default=None)
    aic.set_defaults(func=cmd_aic)

    sim = sub.add_parser("simulate", help="benchmark table on simulated designs")
    _add_common_io(sim, with_input=False)
    sim.add_argument(
        "--structure",
        choices=("chain", "common_cause", "v_structure", "diamond1", "diamond2"),
        default="v_structure",
    )
    sim.add_argument("--a", type=float, default=0.25, help="persistence")
    sim.add_argument("--clusters", type=int, default=3)
    sim.add_argument("--n", type=int, default=5000)
    sim.add_argument("--reps", type=int, default=50)
    sim.add_argument("--seed", type=int, required=True)
    sim.add_argument("--method", choices=("lasso", "clime"), default="lasso")
    sim.add_argument(
        "--policy",
        action="append",
        help="cv, cv/2, cv/4, lambda=0, A=0, or fixed:<value>; repeatable",
    )
    sim.add_argument(
        "--alpha",
        type=float,
        default=None,
        help="PC test level (default: 0.01 up to 30 variables, 0.001 above)",
    )
    sim.add_argument("--unrestricted-pc", action="store_true")
    sim.add_argument("--cv-presample", action="store_true")
    sim.set_defaults(func=cmd_simulate)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (FileNotFoundError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except IdentificationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IDENTIFICATION
    except NumericalError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except CopulaVarError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
