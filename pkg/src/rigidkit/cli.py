"""Command-line front end.

Subcommands: analyze, order, growth, energy, critpoint, corpus-verify.
Exit codes: 0 success, 1 usage or input error, 2 verdict mismatch
(corpus-verify), 3 numerical failure.  JSON output prints floats with 17
significant digits so reports round-trip byte-for-byte; every command is
deterministic given --seed.  RIGIDKIT_THREADS caps corpus-verify concurrency.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import os
import sys
import time
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from . import corpus as corpus_mod
from .critpoint import (
    fourth_derivative_test,
    order2k_family_test,
    polynomial_from_monomial_list,
    second_order_rigidity_test,
)
from .energy import FAMILIES, EnergySpec, energy_along_trajectory
from .errors import RigidkitError
from .framework import (
    Framework,
    framework_to_dict,
    load_framework,
    pin_with_permutation,
)
from .growth import fit_growth_order
from .ladder import DEFAULT_LADDER_TOL, DEFAULT_MAX_K, OrderReport, PolyTrajectory, rigidity_order, solve_ladder
from .linear import kernel_decomposition, rigidity_matrix

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_MISMATCH = 2
EXIT_NUMERICAL = 3


# ---------------------------------------------------------------------------
# canonical JSON rendering (17 significant digits, sorted keys)
# ---------------------------------------------------------------------------

def render_json(obj, indent: int = 0) -> str:
    pad = " " * indent
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = []
        for key in sorted(obj):
            items.append(f'{pad} "{key}": {render_json(obj[key], indent + 1).lstrip()}')
        return "{\n" + ",\n".join(items) + "\n" + pad + "}"
    if isinstance(obj, (list, tuple)):
        if not len(obj):
            return "[]"
        items = [f"{pad} {render_json(v, indent + 1).lstrip()}" for v in obj]
        return "[\n" + ",\n".join(items) + "\n" + pad + "]"
    if isinstance(obj, bool):
        return "true" if obj else "false"
    if obj is None:
        return "null"
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        return format(float(obj), ".17g")
    if isinstance(obj, str):
        return json.dumps(obj)
    if isinstance(obj, np.ndarray):
        return render_json(obj.tolist(), indent)
    raise TypeError(f"cannot render {type(obj)}")


def _emit_json(obj) -> None:
    print(render_json(obj))


def _framework_hash(fw: Framework) -> str:
    canon = render_json(framework_to_dict(fw))
    return hashlib.sha256(canon.encode("utf-8")).hexdigest()


def _order_report_dict(rep: OrderReport) -> dict:
    out = {
        "verdict": rep.verdict,
        "order": rep.order,
        "max_k": rep.max_k,
        "method": rep.method,
        "reason": rep.reason,
        "dim_K": rep.dim_K,
        "residuals": [
            {
                "level": r.level,
                "residual": r.residual,
                "threshold": r.threshold,
                "rhs_norm": r.rhs_norm,
            }
            for r in rep.residuals
        ],
    }
    if rep.witness is not None:
        out["witness"] = {"coeffs": rep.witness.coeffs.tolist()}
    return out


def _crit_report_dict(rep) -> dict:
    def arr(a):
        return None if a is None else a.tolist()

    return {
        "classification": rep.classification,
        "resolved_by": rep.resolved_by,
        "order": rep.order,
        "nullity": rep.nullity,
        "a_min": rep.a_min,
        "a_max": rep.a_max,
        "arg_min_velocity": arr(rep.arg_min_velocity),
        "arg_min_curvature": arr(rep.arg_min_curvature),
        "arg_max_velocity": arr(rep.arg_max_velocity),
        "arg_max_curvature": arr(rep.arg_max_curvature),
        "a3_witness": arr(rep.a3_witness),
        "scale": rep.scale,
        "notes": list(rep.notes),
    }


def _print_residuals(rep: OrderReport) -> None:
    for r in rep.residuals:
        mark = "rejected" if rep.verdict == "order" and r.level == rep.order else "solved"
        print(
            f"  level {r.level:>2}: residual {r.residual:.6e}  threshold {r.threshold:.6e}  [{mark}]"
        )


def _load_and_pin(path: str, auto_permute: bool = True):
    fw = load_framework(path)
    pf, iso, perm = pin_with_permutation(fw, auto_permute=auto_permute)
    return fw, pf, perm


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------

def cmd_analyze(args) -> int:
    t_start = time.perf_counter()
    fw, pf, perm = _load_and_pin(args.path, auto_permute=not args.no_permute)
    kd = kernel_decomposition(rigidity_matrix(pf))
    t_pin = time.perf_counter()
    rep = rigidity_order(
        pf, max_k=args.max_k, tol=args.tol, energy_family=args.family, seed=args.seed
    )
    t_order = time.perf_counter()
    growth = None
    if args.growth:
        spec = EnergySpec.for_framework(pf.base, args.family)
        try:
            growth = fit_growth_order(spec, pf, seed=args.seed)
        except RigidkitError as exc:
            growth = exc
    t_end = time.perf_counter()

    report = {
        "path": args.path,
        "hash": _framework_hash(fw),
        "n_vertices": fw.n_vertices,
        "n_edges": fw.n_edges,
        "n_free": pf.n_free,
        "dim_K": kd.dim_K,
        "pinning_permutation": [v + 1 for v in perm],
        "verdict": _order_report_dict(rep),
        "timings_s": {
            "pin": t_pin - t_start,
            "order": t_order - t_pin,
            "growth": t_end - t_order,
            "total": t_end - t_start,
        },
    }
    if growth is not None:
        if isinstance(growth, Exception):
            report["growth"] = {"error": str(growth)}
        else:
            report["growth"] = {
                "family": growth.family,
                "fitted_s": growth.fitted_s,
                "nu_hat": growth.nu_hat,
                "r2": growth.r2,
                "monotone": growth.monotone,
                "notes": list(growth.notes),
            }
    # witness coefficients are bulky; analyze keeps a summary only
    if "witness" in report["verdict"]:
        coeffs = np.asarray(report["verdict"].pop("witness")["coeffs"])
        report["verdict"]["witness_degree"] = int(coeffs.shape[0])
        report["verdict"]["witness_coeff_norms"] = np.linalg.norm(coeffs, axis=1).tolist()

    if args.json:
        _emit_json(report)
    else:
        print(f"framework: {args.path} (n={fw.n_vertices}, |G|={fw.n_edges}, N={pf.n_free})")
        if perm != list(range(fw.n_vertices)):
            print(f"pinning permutation: {[v + 1 for v in perm]}")
        print(f"dim K = {kd.dim_K}")
        print(f"verdict: {rep.summary()}")
        _print_residuals(rep)
        if growth is not None:
            if isinstance(growth, Exception):
                print(f"growth fit: failed ({growth})")
            else:
                print(
                    f"growth fit [{growth.family}]: s = {growth.fitted_s:.3f} "
                    f"(nu = {growth.nu_hat:.3f}, r2 = {growth.r2:.5f})"
                )
                for note in growth.notes:
                    print(f"  note: {note}")
    return EXIT_OK


def cmd_order(args) -> int:
    fw, pf, perm = _load_and_pin(args.path)
    kd = kernel_decomposition(rigidity_matrix(pf))
    rep = rigidity_order(pf, max_k=args.max_k, tol=args.tol)
    if args.json:
        out = _order_report_dict(rep)
        out["pinning_permutation"] = [v + 1 for v in perm]
        _emit_json(out)
    else:
        print(rep.summary())
        _print_residuals(rep)
        if rep.witness is not None:
            print("witness coefficients (rows = t^1, t^2, ...):")
            for l, row in enumerate(rep.witness.coeffs, start=1):
                print(f"  t^{l}: " + " ".join(f"{v: .12e}" for v in row))
    return EXIT_OK


def cmd_growth(args) -> int:
    fw, pf, _ = _load_and_pin(args.path)
    spec = EnergySpec.for_framework(pf.base, args.family)
    fit = fit_growth_order(
        spec, pf, r_min=args.rmin, r_max=args.rmax,
        n_radii=args.n, n_starts=args.starts, seed=args.seed,
    )
    rows = [
        {"r": r, "m_r": m, "log_r": float(np.log(r)), "log_m": float(np.log(m))}
        for r, m in zip(fit.radii, fit.m_values)
    ]
    if args.csv:
        with open(args.csv, "w", encoding="utf-8") as fh:
            fh.write("r,m_r,log_r,log_m\n")
            for row in rows:
                fh.write(
                    f"{row['r']:.17g},{row['m_r']:.17g},{row['log_r']:.17g},{row['log_m']:.17g}\n"
                )
    for row in rows:
        print(f"r = {row['r']:.6e}   m(r) = {row['m_r']:.6e}")
    print(
        f"fit [{fit.family}]: s = {fit.fitted_s:.4f}, nu = {fit.nu_hat:.4f}, r2 = {fit.r2:.6f}"
    )
    for note in fit.notes:
        print(f"note: {note}")
    return EXIT_OK


def _load_trajectory(path: str) -> PolyTrajectory:
    with open(path, "r", encoding="utf-8") as fh:
        data = json.load(fh)
    if "witness" in data:
        data = data["witness"]
    return PolyTrajectory(np.asarray(data["coeffs"], dtype=float))


def cmd_energy(args) -> int:
    fw, pf, _ = _load_and_pin(args.path)
    spec = EnergySpec.for_framework(pf.base, args.family)
    traj = _load_trajectory(args.traj)
    if traj.n_free != pf.n_free:
        raise RigidkitError(
            f"trajectory has {traj.n_free} coordinates, framework has {pf.n_free} free"
        )
    jet = energy_along_trajectory(spec, pf, traj, args.order)
    cond = jet.condition()
    lines = ["order,coefficient,condition"]
    for i, (c, q) in enumerate(zip(jet.c, cond)):
        lines.append(f"{i},{c:.17g},{q:.6g}")
    text = "\n".join(lines)
    if args.csv:
        with open(args.csv, "w", encoding="utf-8") as fh:
            fh.write(text + "\n")
    print(text)
    return EXIT_OK


def cmd_critpoint(args) -> int:
    if args.poly:
        with open(args.poly, "r", encoding="utf-8") as fh:
            target = polynomial_from_monomial_list(json.load(fh))
        rep = fourth_derivative_test(target, n_starts=args.starts, seed=args.seed)
        _emit_json(_crit_report_dict(rep))
        return EXIT_OK
    if not args.path:
        raise _UsageError("critpoint needs --poly or a framework file")
    fw, pf, _ = _load_and_pin(args.path)
    spec = EnergySpec.for_framework(pf.base, args.family)
    kd = kernel_decomposition(rigidity_matrix(pf))
    if args.order is None:
        rep = second_order_rigidity_test(pf, spec, kd, n_starts=args.starts, seed=args.seed)
        _emit_json(_crit_report_dict(rep))
        return EXIT_OK
    k = args.order
    ladder = solve_ladder(pf, kd, max_k=max(k, 2))
    if ladder.verdict == "order" and ladder.order is not None and ladder.order < k:
        _emit_json({
            "classification": "inapplicable",
            "reason": f"no (1,{k - 1})-flex exists: ladder certifies order {ladder.order}",
        })
        return EXIT_OK
    rep = order2k_family_test(pf, spec, ladder.witness, k, kd=kd)
    _emit_json(_crit_report_dict(rep))
    return EXIT_OK


def _verify_one(name: str):
    fw = corpus_mod.load_corpus(name)
    pf, _, perm = pin_with_permutation(fw)
    rep = rigidity_order(pf)
    got = rep.order if rep.verdict == "order" else None
    return name, got, corpus_mod.EXPECTED_ORDERS[name], rep


def cmd_corpus_verify(args) -> int:
    threads = int(os.environ.get("RIGIDKIT_THREADS", "1"))
    names = list(corpus_mod.CORPUS_NAMES)
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(_verify_one, names))
    else:
        results = [_verify_one(n) for n in names]
    failures = 0
    for name, got, expected, rep in results:
        ok = got == expected
        failures += 0 if ok else 1
        status = "ok" if ok else "MISMATCH"
        print(f"{name:>20}: computed {got}  expected {expected}  [{status}]")
    print(f"{len(names) - failures}/{len(names)} match")
    return EXIT_OK if failures == 0 else EXIT_MISMATCH


# ---------------------------------------------------------------------------
# parser
# ---------------------------------------------------------------------------

class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise _UsageError(message)


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="rigidkit", description="Rigidity orders of bar-and-joint frameworks")
    sub = p.add_subparsers(dest="command", required=True)

    def add_common(sp):
        sp.add_argument("--seed", type=int, default=0)

    a = sub.add_parser("analyze", help="full analysis: pin, dim K, rigidity order")
    a.add_argument("path")
    a.add_argument("--max-k", type=int, default=DEFAULT_MAX_K)
    a.add_argument("--tol", type=float, default=DEFAULT_LADDER_TOL)
    a.add_argument("--family", choices=FAMILIES, default="harmonic")
    a.add_argument("--growth", action="store_true", help="also fit the energy growth order")
    a.add_argument("--json", action="store_true")
    a.add_argument("--no-permute", action="store_true",
                   help="fail instead of permuting vertices when the leading set is degenerate")
    add_common(a)
    a.set_defaults(func=cmd_analyze)

    o = sub.add_parser("order", help="rigidity order with ladder residuals and witness")
    o.add_argument("path")
    o.add_argument("--max-k", type=int, default=DEFAULT_MAX_K)
    o.add_argument("--tol", type=float, default=DEFAULT_LADDER_TOL)
    o.add_argument("--json", action="store_true")
    o.set_defaults(func=cmd_order)

    g = sub.add_parser("growth", help="minimal energy gap on spheres and log-log fit")
    g.add_argument("path")
    g.add_argument("--family", choices=FAMILIES, default="harmonic")
    g.add_argument("--rmin", type=float, default=1e-3)
    g.add_argument("--rmax", type=float, default=1e-1)
    g.add_argument("--n", type=int, default=12)
    g.add_argument("--starts", type=int, default=64)
    g.add_argument("--csv")
    add_common(g)
    g.set_defaults(func=cmd_growth)

    e = sub.add_parser("energy", help="energy jet coefficients along a trajectory (CSV)")
    e.add_argument("path")
    e.add_argument("--family", choices=FAMILIES, required=True)
    e.add_argument("--traj", required=True, help="JSON with witness coefficients")
    e.add_argument("--order", type=int, required=True)
    e.add_argument("--csv")
    e.set_defaults(func=cmd_energy)

    c = sub.add_parser("critpoint", help="derivative tests at a degenerate critical point")
    c.add_argument("path", nargs="?")
    c.add_argument("--poly", help='polynomial target JSON: [{"exps": [..], "coef": r}, ...]')
    c.add_argument("--family", choices=FAMILIES, default="harmonic")
    c.add_argument("--order", type=int, help="run the order-2k family test at k=ORDER")
    c.add_argument("--starts", type=int, default=64)
    add_common(c)
    c.set_defaults(func=cmd_critpoint)

    v = sub.add_parser("corpus-verify", help="recompute the bundled corpus orders")
    v.set_defaults(func=cmd_corpus_verify)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        return args.func(args)
    except _UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (OSError, json.JSONDecodeError) as exc:
        print(f"input error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except RigidkitError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
