"""Command-line entry point.

Exit status: 0 when every check passes, 1 when a check fails, 2 on usage
errors (bad flags, unreadable or malformed JSON).
"""

from __future__ import annotations

import argparse
import json
import sys
import time
from pathlib import Path

from .algebra import polynomial_from_json
from .checks import SUITES, SuiteConfig, run_suite
from .dpoly import op_to_json
from .formality.assembly import linf_residual
from .formality.graphs import AdmissibleGraph
from .formality.weights import WeightCache, weight_mc
from .hkr_cyclic import cyclic_hkr
from .quantize import associativity_residual, cyclicity_residual, mc_series, trace_residual
from .tpoly import UPolyElement, VolumeForm, check_poisson, polyvector_from_json

CONVENTIONS = {
    "hochschild_last_term": "(-1)^(n+1) psi(a_0..a_{n-1}) a_n",
    "insertion_sign": "(-1)^((k1 - i) k2), i counted from 0",
    "schouten": "sum_j (P d<theta_j)(d_j Q) - (d_j P)(d>theta_j Q)",
    "divergence": "left theta-derivative: sum_j (d_j + d_j phi)(d>theta_j P)",
    "cyclic_shift": "int psi(f_1..f_n) f_{n+1} = (-1)^n int (C psi)(f_2..f_{n+1}) f_1",
    "sigma_defect_prefactor": "(-1)^n",
    "line_graphs": "every maximal free run has even length",
    "phi_bar_divergence_ratio": "(-1)^ell",
    "defect_phi_bar_ratio": "k + 1",
    "weights_orientation": "frame (translation, dilation, gauge coordinates) positive",
}


class UsageError(Exception):
    pass


def _load_json(text_or_path: str):
    p = Path(text_or_path)
    try:
        raw = p.read_text() if p.exists() else text_or_path
        return json.loads(raw)
    except (OSError, json.JSONDecodeError) as exc:
        raise UsageError(f"cannot read JSON from {text_or_path!r}: {exc}") from exc


def _volume(arg: str, dim: int) -> VolumeForm:
    if arg in (None, "zero"):
        return VolumeForm.standard(dim)
    try:
        poly = polynomial_from_json(_load_json(arg))
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    if poly.dim != dim:
        raise UsageError(f"log-density has dimension {poly.dim}, expected {dim}")
    return VolumeForm(dim, poly)


def _emit(report: dict, out: str | None):
    text = json.dumps(report, indent=2, sort_keys=True) + "\n"
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def _finish(report: dict, args, started: float) -> int:
    checks = report.get("checks", [])
    report["ok"] = all(c["ok"] for c in checks)
    if args.timing:
        report["wall_time"] = round(time.perf_counter() - started, 3)
    _emit(report, args.out)
    return 0 if report["ok"] else 1


def cmd_verify(args) -> int:
    started = time.perf_counter()
    cfg = SuiteConfig(args.suite, dim=args.dim, max_poly_degree=args.max_poly_degree,
                      max_arity=args.max_arity, trials=args.trials, seed=args.seed,
                      vol=_volume(args.log_density, args.dim), samples=args.samples,
                      workers=args.workers)
    report = {"suite": args.suite, "config": cfg.echo(), "conventions": CONVENTIONS,
              "checks": run_suite(cfg)}
    return _finish(report, args, started)


def cmd_hkr_cycl(args) -> int:
    started = time.perf_counter()
    try:
        gamma = polyvector_from_json(_load_json(args.input))
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    vol = _volume(args.log_density, gamma.dim)
    ops = cyclic_hkr(UPolyElement.single(gamma, args.u_power), vol)
    report = {"operators": {str(a): op_to_json(op) for a, op in ops.items()}}
    if args.timing:
        report["wall_time"] = round(time.perf_counter() - started, 3)
    _emit(report, args.out)
    return 0


def cmd_weights(args) -> int:
    started = time.perf_counter()
    try:
        graph = AdmissibleGraph.from_json(_load_json(args.graph))
    except (ValueError, KeyError, TypeError) as exc:
        raise UsageError(f"malformed graph: {exc}") from exc
    try:
        w = weight_mc(graph, args.samples, args.seed, args.workers)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    report = {"graph": graph.to_json(), **w.to_json(), "workers": args.workers}
    if args.timing:
        report["wall_time"] = round(time.perf_counter() - started, 3)
    _emit(report, args.out)
    return 0


def _mc_records(name, residuals):
    out = []
    for n, r in enumerate(residuals):
        out.append({"name": f"{name} order {n}", "ok": r.consistent_with_zero(),
                    "exact": not r.pieces, "max_z": r.max_z()})
    return out


def cmd_star(args) -> int:
    started = time.perf_counter()
    try:
        gamma = polyvector_from_json(_load_json(args.poisson))
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    vol = _volume(args.log_density, gamma.dim)
    status = check_poisson(gamma, vol)
    if not all(status.values()):
        report = {"checks": [{"name": "Poisson and divergence free", "ok": False, "counterexample": status}]}
        return _finish(report, args, started)
    s = mc_series(gamma, vol, args.order, args.samples, args.seed, args.workers)
    checks = []
    wanted = args.checks.split(",") if args.checks else ["associativity", "cyclicity", "trace"]
    for name in wanted:
        if name == "associativity":
            checks += _mc_records("associativity", associativity_residual(s))
        elif name == "cyclicity":
            checks += _mc_records("cyclicity", cyclicity_residual(s, vol))
        elif name == "trace":
            checks += _mc_records("trace", trace_residual(s, vol))
        else:
            raise UsageError(f"unknown check {name!r}")
    report = {"star_product": s.to_json(), "checks": checks, "seed": args.seed,
              "samples": args.samples, "conventions": CONVENTIONS}
    return _finish(report, args, started)


def cmd_linf(args) -> int:
    started = time.perf_counter()
    try:
        gamma = polyvector_from_json(_load_json(args.input))
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    vol = _volume(args.log_density, gamma.dim)
    eta = UPolyElement.single(gamma, args.u_power)
    cache = WeightCache(args.samples, args.seed, args.workers)
    res = linf_residual([eta] * args.n, args.m, vol, mode=args.mode, cache=cache)
    terms = [{"key": [list(k) for k in key], "value": v, "std_error": s}
             for key, (v, s) in sorted(res.value().items())]
    report = {"n": args.n, "m": args.m, "mode": args.mode, "residual": terms,
              "checks": [{"name": "residual consistent with zero", "ok": res.consistent_with_zero(),
                          "max_z": res.max_z()}],
              "seed": args.seed, "samples": args.samples}
    return _finish(report, args, started)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="cyclic-formality",
                                     description="Cyclic formality computations and checks.")
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--samples", type=int, default=200_000)
    common.add_argument("--workers", type=int, default=1)
    common.add_argument("--log-density", default="zero",
                        help="'zero' for the standard volume, or polynomial JSON (inline or a file)")
    common.add_argument("--out", default=None)
    common.add_argument("--timing", action="store_true", help="add wall time to the report")
    sub = parser.add_subparsers(dest="command", required=True)

    v = sub.add_parser("verify", parents=[common], help="run a verification suite")
    v.add_argument("--suite", required=True, choices=SUITES)
    v.add_argument("--dim", type=int, default=2)
    v.add_argument("--trials", type=int, default=10)
    v.add_argument("--max-poly-degree", type=int, default=2)
    v.add_argument("--max-arity", type=int, default=3)
    v.set_defaults(func=cmd_verify)

    h = sub.add_parser("hkr-cycl", parents=[common], help="cyclic HKR image of a polyvector")
    h.add_argument("--input", required=True, help="polyvector JSON")
    h.add_argument("--u-power", type=int, default=0)
    h.set_defaults(func=cmd_hkr_cycl)

    w = sub.add_parser("weights", parents=[common], help="Monte Carlo weight of a graph")
    w.add_argument("--graph", required=True, help="graph JSON")
    w.set_defaults(func=cmd_weights)

    s = sub.add_parser("star", parents=[common], help="star product from a Poisson bivector")
    s.add_argument("--poisson", required=True, help="bivector JSON")
    s.add_argument("--order", type=int, default=2, choices=(0, 1, 2))
    s.add_argument("--checks", default=None, help="comma list of associativity,cyclicity,trace")
    s.set_defaults(func=cmd_star)

    li = sub.add_parser("linf", parents=[common], help="L-infinity residual on a repeated argument")
    li.add_argument("--input", required=True, help="polyvector JSON")
    li.add_argument("--u-power", type=int, default=0)
    li.add_argument("--n", type=int, default=2, choices=(1, 2))
    li.add_argument("--m", type=int, default=3)
    li.add_argument("--mode", default="cyclic", choices=("cyclic", "classical"))
    li.set_defaults(func=cmd_linf)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0) and 2
    try:
        if getattr(args, "samples", 2) < 2 or getattr(args, "workers", 1) < 1:
            raise UsageError("--samples must be >= 2 and --workers >= 1")
        return args.func(args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
