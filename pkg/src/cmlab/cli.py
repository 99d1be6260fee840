"""Command-line front end.

Exit codes: 0 when every check passes, 1 when a check fails, 2 for
configuration errors (bad flags, unreadable or malformed files), 3 when an
enumeration or lattice would exceed its cap. Set ``CMLAB_WORKERS`` to run
optimizer restarts and oracle chunks in parallel; reports are always written
in a fixed order from the main process.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import shlex
import sys

import numpy as np

from . import __version__
from .objectives import ObjectiveParams, Problem, assemble, load_problem
from .optim import (
    DEFAULT_ALPHAS,
    OptBudget,
    alpha_scan,
    embed_point,
    grid_baseline,
    optimize_full,
)
from .oracles import (
    CODE_KINDS,
    ENUM_CAP,
    ORACLE_ALPHAS,
    SweepSpec,
    default_sweeps,
    ir_single_letter,
    lossless_single_letter,
    run_sweep,
)
from .prob_core import JointPmf, dsbs, entropy, kl_div, mutual_info
from .reports import SCHEMA_VERSION, to_csv, to_json
from .suites import ROW_HEADER, identity_suite, prop1_suite, standard_problems, theorem_suite
from .validation import CapExceededError

EXIT_OK, EXIT_FAIL, EXIT_CONFIG, EXIT_CAP = 0, 1, 2, 3
EXACT_TOLERANCE = 1e-9
OPTIMIZER_TOLERANCE = 1e-3


class ConfigError(Exception):
    pass


def _floats(text: str) -> tuple[float, ...]:
    try:
        vals = tuple(float(v) for v in text.split(",") if v.strip())
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers: {text!r}") from exc
    if not vals:
        raise argparse.ArgumentTypeError("empty list")
    return vals


def _write(text: str, path: str | None):
    if path is None:
        sys.stdout.write(text)
        return
    d = os.path.dirname(path)
    if d:
        os.makedirs(d, exist_ok=True)
    with open(path, "w", newline="") as fh:
        fh.write(text)


def _problem(args) -> tuple[Problem, ObjectiveParams | None]:
    if args.problem is None:
        raise ConfigError("--problem is required")
    try:
        problem, params = load_problem(args.problem)
    except FileNotFoundError as exc:
        raise ConfigError(f"problem file not found: {args.problem}") from exc
    except (json.JSONDecodeError, KeyError, TypeError, ValueError) as exc:
        raise ConfigError(f"malformed problem file {args.problem}: {exc}") from exc
    mu = params.mu if params is not None else 0.0
    alpha = params.alpha if params is not None else 1.0
    if getattr(args, "mu", None) is not None:
        mu = args.mu
    if getattr(args, "alpha", None) is not None:
        alpha = args.alpha
    explicit = params is not None or getattr(args, "mu", None) is not None or (
        getattr(args, "alpha", None) is not None)
    return problem, ObjectiveParams(mu, alpha) if explicit else None


def _budget(args) -> OptBudget:
    return OptBudget(restarts=args.restarts, max_iters=args.max_iters, seed=args.seed)


# ---------------------------------------------------------------------------
# subcommands

def cmd_rate(args) -> int:
    problem, params = _problem(args)
    params = params or ObjectiveParams(0.0, 1.0)
    grid = grid_baseline(problem, params, resolution=args.resolution)
    inits = ()
    if grid.point is not None:
        # warm start from the lattice point so the search covers a feasible start
        inits = (embed_point(problem, assemble(problem, grid.point), problem.default_sizes()),)
    res = optimize_full(problem, params, _budget(args), inits=inits)
    tol = OPTIMIZER_TOLERANCE if args.tolerance is None else args.tolerance
    if problem.is_min:
        ok = res.value <= grid.value + grid.slack + tol
    else:
        ok = res.value >= grid.value - grid.slack - tol
    payload = {
        "command": "rate", "kind": problem.kind, "mu": params.mu, "alpha": params.alpha,
        "seed": args.seed, "sense": problem.sense,
        "constrained": {"value": grid.value, "slack": grid.slack,
                        "resolution": grid.resolution, "lattice_size": grid.size},
        "penalized": {"value": res.value, "restart_values": list(res.restart_values),
                      "best_restart": res.best_restart},
        "penalized_within_constrained": bool(ok), "tolerance": tol,
    }
    _write(to_json(payload), args.out)
    return EXIT_OK if ok else EXIT_FAIL


def cmd_scan(args) -> int:
    problem, params = _problem(args)
    mu = params.mu if params is not None else 0.0
    grid = tuple(sorted(args.alphas)) if args.alphas else DEFAULT_ALPHAS
    scan = alpha_scan(problem, mu, grid, _budget(args), resolution=args.resolution)
    rows = scan.rows(problem.is_min)
    _write(to_csv(("alpha", "value", "gap", "penalty_norm"), rows), args.out)
    tol = OPTIMIZER_TOLERANCE if args.tolerance is None else args.tolerance
    vals = scan.values
    if problem.is_min:
        monotone = all(b >= a - tol for a, b in zip(vals, vals[1:]))
    else:
        monotone = all(b <= a + tol for a, b in zip(vals, vals[1:]))
    return EXIT_OK if monotone else EXIT_FAIL


def cmd_check(args) -> int:
    tol = EXACT_TOLERANCE if args.tolerance is None else args.tolerance
    if args.suite == "identity":
        rows = identity_suite(args.samples, args.seed)
    elif args.suite == "prop1":
        rows = prop1_suite(args.samples, args.seed)
    else:
        if args.problem is not None:
            problem, params = _problem(args)
        elif args.kind is not None:
            problem, params = standard_problems()[args.kind], None
        else:
            raise ConfigError("theorem checks need --problem or --kind")
        if args.n < 2 or args.n > 3:
            raise ConfigError("--n must be 2 or 3")
        rows = theorem_suite(problem.kind, args.n, args.samples, args.seed, problem, params,
                             components=args.components)
    out_rows, failed = [], 0
    for r in rows:
        row = list(r.as_row())
        row[-1] = bool(r.report.margin >= -tol)
        failed += not row[-1]
        out_rows.append(row)
    _write(to_csv(ROW_HEADER, out_rows), args.out)
    return EXIT_FAIL if failed else EXIT_OK


def _oracle_spec(args) -> SweepSpec:
    kind = args.kind
    sizes = {"n": args.n}
    options = {}
    if kind in ("lossless", "IR"):
        pmf = args.pmf or (0.7, 0.3)
        if abs(sum(pmf) - 1) > 1e-9 or min(pmf) < 0:
            raise ConfigError("--pmf must be a probability vector")
        target = JointPmf.from_array(["Z"], np.asarray(pmf))
        sizes["z"] = len(pmf)
        if kind == "lossless":
            sizes["m"] = _need(args.m, "--m")
        else:
            sizes["k"] = _need(args.k, "--k")
    else:
        if args.problem is not None:
            target, params = _problem(args)
            if params is not None:
                options["mu"] = params.mu
        else:
            target = standard_problems()[kind]
        if target.kind != kind:
            raise ConfigError(f"problem file holds a {target.kind} problem, not {kind}")
        if args.mu is not None:
            options["mu"] = args.mu
        if kind in ("CR", "SK", "WZ"):
            options.setdefault("mu", 0.0)
        if kind == "WT":
            sizes.update(x=target.x_size, y=target.y_size, m=_need(args.m, "--m"))
            if args.resolution_encoder is not None:
                sizes["resolution"] = args.resolution_encoder
        else:
            sizes.update(x=target.x_size, y=target.y_size)
            if kind == "WZ":
                sizes.update(z=target.z_size, m=_need(args.m, "--m"))
                options["d_level"] = _need(args.d_level, "--d-level")
            else:
                sizes.update(l1=args.l1, l2=args.l2, k=target.f_size ** args.n
                             if kind == "FC" else _need(args.k, "--k"))
    label = f"{kind} " + " ".join(f"{k}={v}" for k, v in sorted(sizes.items()))
    return SweepSpec(label, kind, tuple(sorted(sizes.items())), target,
                     tuple(sorted(options.items())))


def _need(value, flag):
    if value is None:
        raise ConfigError(f"{flag} is required for this code family")
    return value


def cmd_oracle(args) -> int:
    spec = _oracle_spec(args)
    alphas = tuple(args.alphas) if args.alphas else ORACLE_ALPHAS
    tol = EXACT_TOLERANCE if args.tolerance is None else args.tolerance
    summary = run_sweep(spec, alphas, tol=tol, cap=args.cap)
    os.makedirs(args.out, exist_ok=True)
    rec = summary.records
    with open(os.path.join(args.out, "codes.jsonl"), "w") as fh:
        for r in rec:
            fh.write(json.dumps({
                "schema_version": SCHEMA_VERSION, "code_id": int(r["code_id"]),
                "eps": _num(r["eps"]), "delta": _num(r["delta"]),
                "worst_margin": _num(r["worst_margin"]), "pass": bool(r["passed"]),
                "skipped": bool(r["skipped"])}, sort_keys=True) + "\n")
    rows = [(int(r["code_id"]), float(r["eps"]), float(r["delta"]),
             float(r["worst_margin"]), bool(r["passed"])) for r in rec]
    _write(to_csv(("code_id", "eps", "delta", "worst_margin", "pass"), rows),
           os.path.join(args.out, "summary.csv"))
    payload = {
        "command": "oracle", "label": spec.label, "kind": spec.kind,
        "sizes": spec.size_map, "options": spec.option_map, "alphas": list(alphas),
        "n_codes": summary.n_codes, "n_skipped": summary.n_skipped,
        "n_checks": summary.n_checks, "n_violations": summary.n_violations,
        "worst_margin": summary.worst_margin, "digest": summary.digest,
        "checks": [dict(zip(("name", "count", "violations", "worst_margin", "worst_code"), g))
                   for g in summary.group_rows()],
        "diagnostics": [dict(zip(("name", "count", "misses", "worst_margin", "worst_code"), g))
                        for g in summary.group_rows(True)],
        "failures": [list(f) for f in summary.failures],
    }
    _write(to_json(payload), os.path.join(args.out, "sweep.json"))
    return EXIT_FAIL if summary.n_violations else EXIT_OK


def _num(x):
    x = float(x)
    if math.isnan(x):
        return "nan"
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    return x


def golden_values(full: bool = False, resolution: int = 64, max_codes: int = 20_000) -> dict:
    """Every derived reference value, computed from scratch.

    Sweeps with more than ``max_codes`` codes are included only with ``full``.
    """
    h = JointPmf.from_array(["A"], [0.25, 0.75])
    p = JointPmf.from_array(["A"], [0.5, 0.5])
    src = dsbs(0.1)
    out = {
        "entropy_0.25_0.75": entropy(h, "A"),
        "kl_uniform_vs_0.25_0.75": kl_div(p, h),
        "dsbs_0.1_mutual_information": mutual_info(src, "X", "Y"),
    }
    probs = standard_problems()
    grids = {}
    for label, kind, mu in (("WZ_dsbs0.1_hamming_mu2", "WZ", 2.0),
                            ("FC_and_dsbs0.1", "FC", 0.0),
                            ("CR_dsbs0.1_mu1", "CR", 1.0),
                            ("SK_dsbs0.1_mu0", "SK", 0.0),
                            ("WT_bsc0.1_bsc0.3", "WT", 0.0)):
        g = grid_baseline(probs[kind], ObjectiveParams(mu, 1.0), resolution=resolution)
        grids[label] = {"value": g.value, "slack": g.slack, "resolution": g.resolution}
    out["grid_baselines"] = grids
    bern = [0.7, 0.3]
    out["lossless_single_letter"] = {f"{a:g}": lossless_single_letter(bern, a)
                                     for a in ORACLE_ALPHAS}
    out["intrinsic_randomness_single_letter"] = {f"{a:g}": ir_single_letter(bern, a)
                                                 for a in ORACLE_ALPHAS}
    sweeps = {}
    for spec in default_sweeps():
        if not full and spec.count() > max_codes:
            continue
        s = run_sweep(spec)
        sweeps[spec.label] = {"codes": s.n_codes, "skipped": s.n_skipped,
                              "checks": s.n_checks, "violations": s.n_violations,
                              "digest": s.digest}
    out["sweeps"] = sweeps
    return out


def cmd_golden(args) -> int:
    argv = args.argv if args.argv is not None else sys.argv[1:]
    texts = []
    for _ in range(2):
        payload = {"command": "cmlab " + shlex.join(argv), "version": __version__,
                   "values": golden_values(args.full, args.resolution, args.max_codes)}
        texts.append(to_json(payload))
    if texts[0] != texts[1]:
        sys.stderr.write("golden values differ between two runs\n")
        return EXIT_FAIL
    _write(texts[0], args.out)
    return EXIT_OK


# ---------------------------------------------------------------------------
# parser

def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="cmlab", description=__doc__.splitlines()[0])
    ap.add_argument("--version", action="version", version=__version__)
    sub = ap.add_subparsers(dest="command", required=True)

    def common(p, seed_required=True):
        p.add_argument("--tolerance", type=float, default=None,
                       help="pass threshold on margins (default 1e-9 for exact checks, "
                            "1e-3 for optimizer comparisons)")
        p.add_argument("--out", default=None, help="output path (default stdout)")
        if seed_required:
            p.add_argument("--seed", type=int, required=True)

    def opt(p):
        p.add_argument("--problem", required=True, help="problem JSON file")
        p.add_argument("--mu", type=float, default=None)
        p.add_argument("--restarts", type=int, default=32)
        p.add_argument("--max-iters", type=int, default=400)
        p.add_argument("--resolution", type=int, default=64, help="lattice resolution")

    p = sub.add_parser("rate", help="constrained and penalized values of one problem")
    common(p)
    opt(p)
    p.add_argument("--alpha", type=float, default=None)
    p.set_defaults(func=cmd_rate)

    p = sub.add_parser("scan", help="alpha scan as CSV (alpha, value, gap, penalty_norm)")
    common(p)
    opt(p)
    p.add_argument("--alphas", type=_floats, default=None)
    p.set_defaults(func=cmd_scan)

    p = sub.add_parser("check", help="randomized identity and single-letterization suites")
    common(p)
    p.add_argument("--suite", choices=("theorem", "identity", "prop1"), default="theorem")
    p.add_argument("--problem", default=None, help="problem JSON file")
    p.add_argument("--kind", choices=("WZ", "FC", "CR", "SK", "WT"), default=None,
                   help="use the built-in binary instance of this kind")
    p.add_argument("--mu", type=float, default=None)
    p.add_argument("--alpha", type=float, default=None)
    p.add_argument("--n", type=int, default=2)
    p.add_argument("--samples", type=int, default=500)
    p.add_argument("--components", action="store_true",
                   help="also emit the component inequalities of each instance")
    p.set_defaults(func=cmd_check)

    p = sub.add_parser("oracle", help="exhaustive sweep of small codes")
    p.add_argument("--kind", choices=CODE_KINDS, required=True)
    p.add_argument("--n", type=int, default=1)
    p.add_argument("--problem", default=None, help="problem JSON (default: built-in instance)")
    p.add_argument("--pmf", type=_floats, default=None, help="source pmf for lossless/IR")
    p.add_argument("--m", type=int, default=None, help="message set size")
    p.add_argument("--k", type=int, default=None, help="key or output range")
    p.add_argument("--l1", type=int, default=1)
    p.add_argument("--l2", type=int, default=1)
    p.add_argument("--d-level", type=float, default=None)
    p.add_argument("--mu", type=float, default=None)
    p.add_argument("--alphas", type=_floats, default=None)
    p.add_argument("--resolution-encoder", type=int, default=None,
                   help="lattice resolution for randomized wiretap encoders")
    p.add_argument("--cap", type=int, default=ENUM_CAP)
    p.add_argument("--tolerance", type=float, default=None)
    p.add_argument("--out", required=True, help="output directory")
    p.set_defaults(func=cmd_oracle)

    p = sub.add_parser("golden", help="recompute the derived reference values")
    p.add_argument("--out", default=None)
    p.add_argument("--full", action="store_true", help="include the large sweeps")
    p.add_argument("--resolution", type=int, default=64)
    p.add_argument("--max-codes", type=int, default=20_000,
                   help="largest sweep included without --full")
    p.set_defaults(func=cmd_golden, argv=None)
    return ap


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_CONFIG
    if args.command == "golden":
        args.argv = argv
    try:
        return args.func(args)
    except ConfigError as exc:
        sys.stderr.write(f"cmlab: {exc}\n")
        return EXIT_CONFIG
    except CapExceededError as exc:
        sys.stderr.write(f"cmlab: {exc}\n")
        return EXIT_CAP
    except ValueError as exc:
        sys.stderr.write(f"cmlab: invalid configuration: {exc}\n")
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
