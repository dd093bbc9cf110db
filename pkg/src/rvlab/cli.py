"""Command-line front end: ``rvlab {finiteness,eval,group,orbit,check}``.

Every command writes a JSON-lines report (one header line, then one line per
result) and a summary table.  Exit status: 0 when nothing failed, 1 when any
result is FAIL, 2 on input errors.
"""
from __future__ import annotations

import argparse
import csv
import json
import platform
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from datetime import datetime, timezone
from fractions import Fraction
from importlib import metadata

import numpy as np
import scipy

from . import checks as ck
from . import exponents as ex
from . import groups as gr
from . import isomorphism as iso
from . import quadrature as qd
from . import series_eval as se
from .checks import FAIL, INADMISSIBLE, PASS, UNPROVEN, CheckConfig, CheckResult

DEFAULT_MODELS = {"L": lambda n: "V2_SEMI", "K": lambda n: "V2_SEMI",
                  "E": lambda n: {2: "S5", 3: "H_S5"}.get(n, "S3S3_SEMI")}
EXPECTED_ORDERS = {"L": lambda n: 32, "K": lambda n: 32,
                   "E": lambda n: {2: 120, 3: 1920}.get(n, 72)}


class InputError(Exception):
    pass


def versions() -> str:
    try:
        own = metadata.version("artifact")
    except metadata.PackageNotFoundError:
        own = "unknown"
    return f"rvlab {own}; python {platform.python_version()}; numpy {np.__version__}; scipy {scipy.__version__}"


def _jsonable(x):
    if isinstance(x, Fraction):
        return f"{x.numerator}/{x.denominator}"
    if isinstance(x, (np.integer,)):
        return int(x)
    if isinstance(x, (np.floating,)):
        return float(x)
    if isinstance(x, np.bool_):
        return bool(x)
    if isinstance(x, np.ndarray):
        return x.tolist()
    raise TypeError(f"not serializable: {type(x)}")


def _dumps(obj) -> str:
    return json.dumps(obj, default=_jsonable, sort_keys=False)


# Input ----------------------------------------------------------------------------

def load_vector(path: str):
    try:
        with open(path) as fh:
            data = json.load(fh)
        return ex.parse_vector(data)
    except (OSError, json.JSONDecodeError, ValueError, TypeError, KeyError) as exc:
        raise InputError(f"{path}: {exc}") from None


def _vector_for_family(path: str, family: str):
    v = load_vector(path)
    is_k = isinstance(v, ex.ExponentVectorK)
    if (family == "K") != is_k:
        want = "A, B, C" if family == "K" else "a, b, c"
        raise InputError(f"{path}: family {family} expects keys {want}")
    return v


def config_from(args) -> CheckConfig:
    if args.points < 2 or args.points & (args.points - 1):
        raise InputError("--points must be a power of two")
    return CheckConfig(seed=args.seed, points=args.points, shifts=args.shifts,
                       rel_tol=args.rel_tol, cap=args.cap, time_budget=args.time_budget)


# Commands -------------------------------------------------------------------------

def cmd_finiteness(args, cfg) -> list[CheckResult]:
    family = args.family
    v = _vector_for_family(args.params, family)
    if family == "K":
        details = {"finite": ex.is_finite_K(v), "budget": ex.k_budget(v), "B1": v.B[0]}
    elif family == "L":
        finite, rho = ex.is_finite_L(v)
        details = {"finite": finite, "rho": list(rho)}
    else:
        P = ex.theorem1_map(v)
        details = {"finite": ex.is_finite_J(v), "criterion": "derived criterion",
                   "K_image": P.to_dict(), "budget": ex.k_budget(P)}
    return [CheckResult(f"finiteness_{family}", PASS, details)]


def _series_for(family, v, cfg):
    if family == "K":
        return se.k_series_value(v, rel_tol=cfg.rel_tol)
    if family == "J":
        return se.k_series_value(ex.theorem1_map(v), rel_tol=cfg.rel_tol)
    raise InputError("no series is available for the L family; use --method qmc")


def cmd_eval(args, cfg) -> list[CheckResult]:
    family, method = args.family, args.method
    v = _vector_for_family(args.params, family)
    out = []
    s = q = None
    if method in ("series", "both"):
        try:
            s = _series_for(family, v, cfg)
        except se.NotFinite as exc:
            raise InputError(f"NOT_FINITE: {exc}") from None
        except se.NoConvergence as exc:
            return [CheckResult("series", FAIL, {"error": "NO_CONVERGENCE", "message": str(exc)})]
        out.append(CheckResult("series", PASS, s.to_dict()))
    if method in ("qmc", "both"):
        try:
            q = qd.estimate_family_value(family, v, cfg.points, cfg.shifts, cfg.seed, force=args.force)
        except qd.InfiniteByCriterion as exc:
            raise InputError(f"NOT_FINITE: {exc}") from None
        out.append(CheckResult("qmc", PASS if q.reliable else FAIL, q.to_dict()))
    if s is not None and q is not None:
        agree = qd.agree(q.mean, q.stderr, s.midpoint, s.radius)
        out.append(CheckResult("agreement", PASS if agree else FAIL,
                               {"difference": q.mean - s.midpoint,
                                "combined_error": qd.combined_error(q.stderr, s.radius),
                                "sigmas": 3}))
    return out


def _build_group(family: str, n: int, cfg) -> gr.Group:
    if family == "L":
        return gr.group_L(n, cfg.cap)
    if family == "E":
        return gr.group_E(n, cfg.cap)
    return gr.closure(gr.make_generators_K(n, seed=cfg.seed), cfg.cap, "K", n)


def cmd_group(args, cfg) -> list[CheckResult]:
    family, n = args.family, args.n
    wanted = [c.strip() for c in args.checks.split(",") if c.strip()]
    unknown = set(wanted) - {"order", "spectrum", "isomorphism", "theta"}
    if unknown:
        raise InputError(f"unknown group checks {sorted(unknown)}")
    try:
        G = _build_group(family, n, cfg)
    except ValueError as exc:
        raise InputError(str(exc)) from None
    except gr.CapExceeded as exc:
        return [CheckResult("group", FAIL, {"error": "CAP_EXCEEDED", "message": str(exc)})]
    except gr.DerivationIncomplete as exc:
        return [CheckResult("group", UNPROVEN, {"error": "DERIVATION_INCOMPLETE", "message": str(exc)})]
    out = []
    if "order" in wanted:
        expected = EXPECTED_ORDERS[family](n)
        out.append(CheckResult("order", PASS if G.order == expected else FAIL,
                               {"family": family, "n": n, "order": G.order, "expected": expected}))
    model = args.model or DEFAULT_MODELS[family](n)
    verdict = None
    if "isomorphism" in wanted:
        res = iso.find_isomorphism(iso.perm_group_from_matrices(G), iso.model_group(model),
                                   cfg.time_budget, seed=cfg.seed)
        verdict = res.status
        status = {"ISOMORPHIC": PASS, "UNPROVEN": UNPROVEN}.get(res.status, FAIL)
        out.append(CheckResult("isomorphism", status,
                               {"model": model, "verdict": res.status,
                                "profile": ck._jsonable_profile(res.target_profile),
                                "model_profile": ck._jsonable_profile(res.model_profile)}))
    if "spectrum" in wanted:
        out.append(CheckResult("report", PASS,
                               gr.group_report(G, model if verdict == "ISOMORPHIC" else None)))
    if "theta" in wanted:
        if family == "E" and n == 3:
            t = gr.theta_matrix(G)
            holds = gr.theta_relation_check(G)
            out.append(CheckResult("theta", PASS if holds else FAIL,
                                   {"relation_holds": holds, "theta_order": gr.element_order(t)}))
        elif args.checks != DEFAULT_GROUP_CHECKS:
            raise InputError("the theta relation is defined for family E, n = 3")
    return out


def cmd_orbit(args, cfg) -> list[CheckResult]:
    family = args.family
    v = _vector_for_family(args.params, family)
    if family == "E" and not ex.is_in_E(v):
        raise InputError("vector is not in the sublattice E")
    try:
        G = _build_group(family, v.n, cfg)
    except ValueError as exc:
        raise InputError(str(exc)) from None
    flat = v.flat()
    out = []
    rng = np.random.default_rng(qd.derive_seed(cfg.seed, "orbit", flat))
    entries = gr.orbit(G, flat)
    spot = set(rng.choice(len(entries), min(args.spot_checks, len(entries)), replace=False).tolist()) \
        if args.spot_checks else set()
    base = None
    for i, e in enumerate(entries):
        details = {"vector": list(e.vector), "word": ".".join(e.word) or "e",
                   "cofactor": None if e.cofactor is None else e.cofactor}
        status = PASS
        if e.cofactor is None:
            status = INADMISSIBLE
        elif family == "E":
            try:
                ok = e.cofactor * gr.invariant_denominator(v.n, e.vector) == gr.invariant_denominator(v.n, flat)
                details["invariant"] = ok
                status = PASS if ok else FAIL
            except gr.Inadmissible:
                details["invariant"] = None
                status = INADMISSIBLE
        if i in spot and e.cofactor is not None:
            fam = "K" if family == "K" else "L"
            cls = ex.ExponentVectorK if family == "K" else ex.ExponentVector
            image = cls.from_flat(v.n, e.vector)
            try:
                if base is None:
                    base = qd.estimate_family_value(fam, v, cfg.points, cfg.shifts, cfg.seed)
                img = qd.estimate_family_value(fam, image, cfg.points, cfg.shifts, cfg.seed)
                r, err = qd.ratio_with_error(base, img)
                agree = abs(r - float(e.cofactor)) <= 3 * err
                details["spot_check"] = {"ratio": r, "error": err, "agree": agree}
                if not agree:
                    status = FAIL
            except qd.InfiniteByCriterion:
                details["spot_check"] = "infinite by criterion"
        out.append(CheckResult(f"orbit[{i}]", status, details))
    return out


def _run_one(args):
    number, cfg, kw = args
    return ck.run_criterion_with(number, cfg, **kw)


def cmd_check(args, cfg) -> list[CheckResult]:
    numbers = ck.SUITES[args.suite]
    kw = {}
    if args.n_range:
        try:
            lo, _, hi = args.n_range.partition("-")
            ns = tuple(range(int(lo), int(hi or lo) + 1))
        except ValueError:
            raise InputError(f"bad --n-range {args.n_range!r}") from None
        kw = {"ns": ns}
    jobs = [(k, cfg, kw if k in ck.N_RANGE_CRITERIA else {}) for k in numbers]
    if args.jobs > 1:
        with ProcessPoolExecutor(args.jobs) as pool:
            return list(pool.map(_run_one, jobs))
    return [_run_one(j) for j in jobs]


# Output ---------------------------------------------------------------------------

def summary_table(results: list[CheckResult], total: float, per_row: bool) -> str:
    width = max([len(r.name) for r in results] + [5])
    rule = "-" * (width + 24)
    lines = [f"{'check':<{width}}  {'status':<12}  {'seconds' if per_row else ''}", rule]
    for r in results:
        secs = f"{r.elapsed:7.2f}" if per_row else ""
        lines.append(f"{r.name:<{width}}  {r.status:<12}  {secs}".rstrip())
    counts = {s: sum(r.status == s for r in results) for s in (PASS, FAIL, INADMISSIBLE, UNPROVEN)}
    lines.append(rule)
    lines.append("  ".join(f"{k}={v}" for k, v in counts.items()) + f"  ({total:.2f} s)")
    return "\n".join(lines)


def write_report(args, results, inputs, total=0.0, out=None):
    out = out or sys.stdout
    header = {"record": "run", "command": args.command, "inputs": inputs, "seed": args.seed,
              "versions": versions(), "timestamp": datetime.now(timezone.utc).isoformat()}
    lines = [_dumps(header)] + [_dumps({"record": "result", **r.to_dict()}) for r in results]
    if args.json_out:
        with open(args.json_out, "w") as fh:
            fh.write("\n".join(lines) + "\n")
    else:
        out.write("\n".join(lines) + "\n")
    if args.csv:
        with open(args.csv, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["name", "status", "details"])
            for r in results:
                w.writerow([r.name, r.status, _dumps(r.details)])
    out.write(summary_table(results, total, args.command == "check") + "\n")


DEFAULT_GROUP_CHECKS = "order,spectrum,isomorphism,theta"


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--points", type=int, default=1 << 16, help="QMC points per shift (power of 2)")
    common.add_argument("--shifts", type=int, default=16)
    common.add_argument("--rel-tol", type=float, default=1e-10)
    common.add_argument("--cap", type=int, default=10 ** 6, help="group closure size limit")
    common.add_argument("--time-budget", type=float, default=60.0, help="isomorphism search seconds")
    common.add_argument("--force", action="store_true", help="integrate even if infinite by criterion")
    common.add_argument("--csv", metavar="PATH")
    common.add_argument("--json-out", metavar="PATH")
    common.add_argument("--jobs", type=int, default=1)

    p = argparse.ArgumentParser(prog="rvlab", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("finiteness", parents=[common], help="finiteness verdict of an exponent vector")
    s.add_argument("family", choices=["J", "K", "L"])
    s.add_argument("params")

    s = sub.add_parser("eval", parents=[common], help="evaluate an integral")
    s.add_argument("family", choices=["J", "K", "L"])
    s.add_argument("params")
    s.add_argument("--method", choices=["series", "qmc", "both"], default="both")

    s = sub.add_parser("group", parents=[common], help="closure, spectrum, isomorphism, theta")
    s.add_argument("family", choices=["L", "E", "K"])
    s.add_argument("n", type=int)
    s.add_argument("--checks", default=DEFAULT_GROUP_CHECKS)
    s.add_argument("--model", choices=sorted(iso.MODEL_ORDERS))

    s = sub.add_parser("orbit", parents=[common], help="orbit table with cofactors")
    s.add_argument("params")
    s.add_argument("--family", choices=["L", "E", "K"], default="E")
    s.add_argument("--spot-checks", type=int, default=0, help="QMC ratio checks on random orbit rows")

    s = sub.add_parser("check", parents=[common], help="acceptance suites")
    s.add_argument("suite", choices=sorted(ck.SUITES))
    s.add_argument("--n-range", help="e.g. 2-4; applies to series-identities and the K group")
    return p


COMMANDS = {"finiteness": cmd_finiteness, "eval": cmd_eval, "group": cmd_group,
            "orbit": cmd_orbit, "check": cmd_check}


def _inputs(args) -> dict:
    skip = {"command", "csv", "json_out", "jobs"}
    return {k: v for k, v in sorted(vars(args).items()) if k not in skip}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = config_from(args)
        t0 = time.monotonic()
        results = COMMANDS[args.command](args, cfg)
        total = time.monotonic() - t0
    except InputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    write_report(args, results, _inputs(args), total)
    return 1 if any(r.status == FAIL for r in results) else 0


if __name__ == "__main__":
    sys.exit(main())
