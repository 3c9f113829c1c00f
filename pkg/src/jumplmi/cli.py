"""Command-line front end: certify, bisect, simulate, verify, sweep, sag-probe.

Machine outputs are JSON (plus CSV for tabular sweeps and traces), humans get
fixed-width tables on stdout. Every command writes a manifest.json next to
its outputs and every output references it. Exit codes: 0 ok, 2 bad input or
violated precondition, 3 unsupported request, 4 verification failed.
"""

import argparse
import csv
import json
import os
import sys
from datetime import datetime, timezone
from itertools import product

import numpy as np

from . import __version__
from . import certificates as certs
from . import models, search, simulate

EXIT_OK = 0
EXIT_INPUT = 2
EXIT_UNSUPPORTED = 3
EXIT_VERIFY = 4

SAG_MESSAGE = "no LMI certificate for SAG via this condition; see sag-probe"

CONTRACTION_TOL = 1e-9


def default_stepsize(method, a, m, L, n):
    """Stepsize used when a command does not receive --alpha."""
    from .functions import CONVEX_SMOOTH, SMOOTH_ONLY
    if method == models.SAGA:
        if a.tag == SMOOTH_ONLY:
            return m / (8.0 * L**2)
        return 1.0 / (3.0 * L)
    if method == models.SAG:
        return 1.0 / (16.0 * L)
    if method == models.FINITO:
        return certs.finito_stepsize(a.tag, m, L, n)
    if a.tag == CONVEX_SMOOTH:
        return 2.0 / (L + 2.0 * m * n)
    return m / (L**2 + m**2 * n)


def _resolve_seed(args):
    if getattr(args, "seed", None) is not None:
        return int(args.seed)
    return int(os.environ.get("JUMPLMI_SEED", "0"))


def _ensure_out(path):
    out = str(path)
    os.makedirs(out, exist_ok=True)
    return out


def _jsonable(value):
    if isinstance(value, dict):
        return {str(k): _jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_jsonable(v) for v in value]
    if isinstance(value, np.ndarray):
        return [_jsonable(v) for v in value.tolist()]
    if isinstance(value, (np.floating, np.integer, np.bool_)):
        return value.item()
    return value


def _write_json(path, doc):
    with open(path, "w") as fh:
        json.dump(_jsonable(doc), fh, indent=2, sort_keys=True)
        fh.write("\n")


def _write_csv(path, header, rows):
    with open(path, "w", newline="") as fh:
        fh.write("# manifest: manifest.json\n")
        writer = csv.writer(fh)
        writer.writerow(header)
        for row in rows:
            writer.writerow(row)


def _write_manifest(out, command, parameters, seed, outputs):
    doc = {"command": command, "parameters": _jsonable(parameters),
           "seed": seed, "tool_version": __version__,
           "timestamp": datetime.now(timezone.utc).isoformat(timespec="seconds"),
           "outputs": list(outputs)}
    _write_json(os.path.join(out, "manifest.json"), doc)


def _print_table(pairs):
    width = max(len(k) for k, _ in pairs)
    for key, value in pairs:
        print("%-*s  %s" % (width, key, value))


def _fmt(x):
    return "%.12g" % x


def cmd_certify(args):
    method = models.normalize_method(args.method)
    if method == models.SAG:
        print(SAG_MESSAGE, file=sys.stderr)
        return EXIT_UNSUPPORTED
    m, L, n = float(args.m), float(args.L), int(args.n)
    a = simulate.assumption_from_tag(args.assumption, m, L)
    if args.statement == "remark":
        if method != models.SAGA:
            raise ValueError("--statement remark applies to saga only")
        cert = certs.saga_remark1_certificate(a, m, L, n)
        if args.alpha is not None and not np.isclose(args.alpha, cert.alpha,
                                                     rtol=1e-9):
            raise certs.StepsizeOutOfRange(
                "the recovered-rate construction fixes alpha = %.6g"
                % cert.alpha)
    else:
        if args.alpha is None and method != models.FINITO:
            raise ValueError("--alpha is required (or use --statement remark)")
        cert = certs.certificate_for(method, a, m, L, n, alpha=args.alpha,
                                     b=args.b)
    complexity = certs.iterations_to_eps(cert.rho2, eps=args.eps)
    out = _ensure_out(args.out)
    doc = certs.certificate_to_json(cert)
    doc["manifest"] = "manifest.json"
    _write_json(os.path.join(out, "certificate.json"), doc)
    _write_manifest(out, "certify",
                    {"method": method, "assumption": a.tag, "m": m, "L": L,
                     "n": n, "alpha": cert.alpha, "b": cert.free_param_b,
                     "statement": args.statement, "eps": args.eps},
                    _resolve_seed(args), ["certificate.json"])
    _print_table([
        ("method", method),
        ("assumption", a.tag),
        ("m", _fmt(m)),
        ("L", _fmt(L)),
        ("n", str(n)),
        ("alpha", _fmt(cert.alpha)),
        ("rho2", _fmt(cert.rho2)),
        ("iterations to %g" % args.eps, str(complexity)),
        ("provenance", cert.provenance),
    ])
    print("wrote %s" % os.path.join(out, "certificate.json"))
    return EXIT_OK


def cmd_verify(args):
    with open(args.certificate) as fh:
        doc = json.load(fh)
    cert = certs.certificate_from_json(doc)
    if cert.method == models.SAG:
        print(SAG_MESSAGE, file=sys.stderr)
        return EXIT_UNSUPPORTED
    seed = _resolve_seed(args)
    reduced = certs.verify_certificate(cert)
    checks = {"reduced": reduced}
    ok = bool(reduced["feasible"])
    if cert.n <= args.full_max_n:
        full = certs.verify_certificate_full(cert)
        checks["full"] = full
        ok = ok and bool(full["feasible"])
    else:
        checks["full"] = None
    problem = simulate.generate_problem(cert.method, cert.assumption, cert.m,
                                        cert.L, cert.n, args.p, seed)
    states = simulate.sample_reachable_states(cert.method, problem, cert.alpha,
                                              args.states, seed)
    worst = simulate.check_onestep_contraction(cert, problem, states)
    contraction_ok = worst <= CONTRACTION_TOL
    checks["contraction"] = {"worst_normalized_violation": worst,
                             "states": len(states), "feasible": contraction_ok}
    ok = ok and contraction_ok
    out = _ensure_out(args.out)
    result = {"certificate": str(args.certificate), "method": cert.method,
              "assumption": cert.assumption.tag, "rho2": cert.rho2,
              "checks": checks, "ok": ok, "manifest": "manifest.json"}
    _write_json(os.path.join(out, "result.json"), result)
    _write_manifest(out, "verify",
                    {"certificate": str(args.certificate),
                     "full_max_n": args.full_max_n, "states": args.states,
                     "p": args.p},
                    seed, ["result.json"])
    _print_table([
        ("reduced LMI", "pass" if reduced["feasible"] else "FAIL"),
        ("full LMI", "skipped (n > %d)" % args.full_max_n
         if checks["full"] is None
         else ("pass" if checks["full"]["feasible"] else "FAIL")),
        ("one-step contraction", "pass (worst %.3g)" % worst
         if contraction_ok else "FAIL (worst %.3g)" % worst),
    ])
    return EXIT_OK if ok else EXIT_VERIFY


def cmd_bisect(args):
    method = models.normalize_method(args.method)
    m, L, n = float(args.m), float(args.L), int(args.n)
    a = simulate.assumption_from_tag(args.assumption, m, L)
    alpha = float(args.alpha) if args.alpha is not None \
        else default_stepsize(method, a, m, L, n)
    seed = _resolve_seed(args)
    config = search.SearchConfig(rho2_tol=args.rho2_tol, restarts=args.restarts,
                                 max_evals=args.max_evals, seed=seed)
    reference = search.reference_certificate(method, a, m, L, n, alpha)
    result = search.bisect_rate(method, a, m, L, n, alpha, config=config,
                                reference=reference)
    feasible = result.status == "feasible"
    out = _ensure_out(args.out)
    doc = {"method": method, "assumption": a.tag, "m": m, "L": L, "n": n,
           "alpha": alpha,
           "rho2_best": result.rho2_best if feasible else None,
           "status": result.status, "evals": result.evals,
           "reference_rho2": None if reference is None else reference.rho2,
           "witness": result.witness, "history": result.history,
           "manifest": "manifest.json"}
    _write_json(os.path.join(out, "result.json"), doc)
    _write_manifest(out, "bisect",
                    {"method": method, "assumption": a.tag, "m": m, "L": L,
                     "n": n, "alpha": alpha, "rho2_tol": args.rho2_tol,
                     "restarts": args.restarts, "max_evals": args.max_evals},
                    seed, ["result.json"])
    _print_table([
        ("status", result.status),
        ("rho2_best", _fmt(result.rho2_best) if feasible else "none"),
        ("reference rho2", "none" if reference is None else _fmt(reference.rho2)),
        ("evaluations", str(result.evals)),
    ])
    return EXIT_OK


def cmd_simulate(args):
    method = models.normalize_method(args.method)
    m, L, n, p = float(args.m), float(args.L), int(args.n), int(args.p)
    a = simulate.assumption_from_tag(args.assumption, m, L)
    alpha = float(args.alpha) if args.alpha is not None \
        else default_stepsize(method, a, m, L, n)
    seed = _resolve_seed(args)
    config = {}
    if args.config is not None:
        with open(args.config) as fh:
            config = json.load(fh)
        if not isinstance(config, dict):
            raise ValueError("config file must hold a JSON object")
    y0_mode = str(config.get("y0_mode", args.y0))
    trial_offset = int(config.get("trial_offset", 0))
    problem = simulate.generate_problem(method, a, m, L, n, p, seed)
    cert = None
    cert_note = None
    if args.no_certificate:
        cert_note = "certificate disabled by flag"
    elif method == models.SAG:
        cert_note = SAG_MESSAGE
    else:
        try:
            cert = certs.certificate_for(method, a, m, L, n, alpha=alpha,
                                         b=args.b)
        except ValueError as exc:
            cert_note = str(exc)
    trace = simulate.run_method(method, problem, alpha, args.iters, seed,
                                args.trials, certificate=cert,
                                y0_mode=y0_mode, trial_offset=trial_offset)
    rows = trace.to_rows()
    out = _ensure_out(args.out)
    _write_csv(os.path.join(out, "result.csv"),
               ["k", "mean_V", "stderr_V", "envelope", "mean_dist2"],
               [(k, _fmt(mv), _fmt(se), env, _fmt(md))
                for k, mv, se, env, md in rows])
    _write_manifest(out, "simulate",
                    {"method": method, "assumption": a.tag, "m": m, "L": L,
                     "n": n, "p": p, "alpha": alpha, "iters": args.iters,
                     "trials": args.trials, "y0_mode": y0_mode,
                     "trial_offset": trial_offset,
                     "certificate_rho2": None if cert is None else cert.rho2,
                     "certificate_note": cert_note},
                    seed, ["result.csv"])
    table = [
        ("method", method),
        ("assumption", a.tag),
        ("alpha", _fmt(alpha)),
        ("trials", str(args.trials)),
        ("iterations", str(args.iters)),
        ("V0", _fmt(trace.V0)),
        ("final mean V", _fmt(float(trace.lyapunov[-1]))),
    ]
    if cert is not None:
        n_ok = sum(1 for row in rows if row[3] == "ok")
        table.append(("certified rho2", _fmt(cert.rho2)))
        table.append(("envelope", "%d/%d ok" % (n_ok, len(rows))))
    else:
        table.append(("certificate", "none (%s)" % cert_note))
    try:
        fit = simulate.empirical_rate(trace)
        table.append(("fitted decay", "%.6g per iteration" % fit["decay"]))
        if fit["log_rho2"] is not None:
            table.append(("certified decay", "%.6g per iteration"
                          % fit["log_rho2"]))
    except ValueError:
        pass
    _print_table(table)
    print("wrote %s" % os.path.join(out, "result.csv"))
    return EXIT_OK


def _aslist(value):
    if isinstance(value, (list, tuple)):
        return list(value)
    return [value]


def cmd_sweep(args):
    with open(args.grid) as fh:
        grid = json.load(fh)
    if not isinstance(grid, dict):
        raise ValueError("grid file must hold a JSON object")
    if "n" not in grid:
        raise ValueError("grid needs an 'n' list")
    methods = [models.normalize_method(v) for v in _aslist(grid.get("method", "saga"))]
    assumptions = [str(v) for v in _aslist(grid.get("assumption", "sc"))]
    Ls = [float(v) for v in _aslist(grid.get("L", 1.0))]
    ns = [int(v) for v in _aslist(grid["n"])]
    alpha0 = grid.get("alpha")
    scfg = grid.get("search", {})
    seed = _resolve_seed(args)
    config = search.SearchConfig(
        rho2_tol=float(scfg.get("rho2_tol", 1e-6)),
        restarts=int(scfg.get("restarts", 6)),
        max_evals=int(scfg.get("max_evals", 600)),
        seed=seed)
    rows = []
    for method, tag, L in product(methods, assumptions, Ls):
        if "m" in grid:
            ms = [float(v) for v in _aslist(grid["m"])]
        else:
            ms = [float(v) * L for v in _aslist(grid.get("ratio", 0.1))]
        for m, n in product(ms, ns):
            try:
                a = simulate.assumption_from_tag(tag, m, L)
                alpha = float(alpha0) if alpha0 is not None \
                    else default_stepsize(method, a, m, L, n)
                result = search.bisect_rate(method, a, m, L, n, alpha,
                                            config=config)
                best = result.rho2_best if result.status == "feasible" else ""
                rows.append((method, a.tag, _fmt(m), _fmt(L), n, _fmt(alpha),
                             _fmt(best) if best != "" else "", result.status))
            except ValueError:
                rows.append((method, tag, _fmt(m), _fmt(L), n, "", "",
                             "unsupported"))
    out = _ensure_out(args.out)
    _write_csv(os.path.join(out, "result.csv"),
               ["method", "assumption", "m", "L", "n", "alpha", "rho2_best",
                "status"], rows)
    _write_manifest(out, "sweep",
                    {"grid": str(args.grid), "cells": len(rows),
                     "rho2_tol": config.rho2_tol, "restarts": config.restarts,
                     "max_evals": config.max_evals},
                    seed, ["result.csv"])
    print("wrote %d rows to %s" % (len(rows), os.path.join(out, "result.csv")))
    return EXIT_OK


def cmd_sag_probe(args):
    m, L, n = float(args.m), float(args.L), int(args.n)
    seed = _resolve_seed(args)
    config = search.SearchConfig(restarts=args.restarts,
                                 max_evals=args.max_evals, seed=seed)
    probe = search.sag_probe(m, L, n, alpha=args.alpha, config=config)
    out = _ensure_out(args.out)
    doc = dict(probe)
    doc["one_sided"] = ("absence of a witness is evidence of infeasibility, "
                        "not proof; a witness, if found, would be conclusive")
    doc["manifest"] = "manifest.json"
    _write_json(os.path.join(out, "result.json"), doc)
    _write_manifest(out, "sag-probe",
                    {"m": m, "L": L, "n": n, "alpha": probe["alpha"],
                     "restarts": args.restarts, "max_evals": args.max_evals},
                    seed, ["result.json"])
    print("published rho2 %s at alpha %s (one-sided probe)"
          % (_fmt(probe["published_rho2"]), _fmt(probe["alpha"])))
    print("%-14s %-14s %s" % ("rho2", "witness", "objective"))
    for row in probe["rows"]:
        print("%-14.8g %-14s %.6g" % (row["rho2"],
                                      "found" if row["witness_found"] else "none",
                                      row["objective"]))
    if probe["rows"] and probe["rows"][0]["witness_found"]:
        print("note: a witness appeared at the published rate; "
              "this contradicts the expected infeasibility")
    return EXIT_OK


def build_parser():
    ap = argparse.ArgumentParser(
        prog="jumplmi",
        description="Certified linear rates for variance-reduced methods "
                    "via jump-system LMIs.")
    sub = ap.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--out", default=".", help="output directory")
        p.add_argument("--seed", type=int, default=None,
                       help="RNG seed (default: JUMPLMI_SEED or 0)")

    def problem_flags(p, need_alpha):
        p.add_argument("--method", required=True,
                       choices=["saga", "sag", "finito", "sdca"])
        p.add_argument("--assumption", required=True,
                       choices=["sc", "cvx", "smooth"])
        p.add_argument("--m", type=float, required=True,
                       help="strong convexity of the averaged objective")
        p.add_argument("--L", type=float, required=True, help="smoothness")
        p.add_argument("--n", type=int, required=True,
                       help="number of components")
        p.add_argument("--alpha", type=float, default=None, required=need_alpha,
                       help="stepsize" if need_alpha
                       else "stepsize (default: the method's statement value)")
        p.add_argument("--b", type=float, default=None,
                       help="free certificate parameter where one exists")

    cert = sub.add_parser("certify", help="construct and verify a rate certificate")
    problem_flags(cert, need_alpha=False)
    cert.add_argument("--statement", choices=["auto", "remark"], default="auto",
                      help="'remark' uses the fixed-stepsize recovered rate")
    cert.add_argument("--eps", type=float, default=1e-6,
                      help="accuracy for the complexity estimate")
    common(cert)
    cert.set_defaults(func=cmd_certify)

    ver = sub.add_parser("verify", help="re-check a certificate file")
    ver.add_argument("--certificate", required=True, help="certificate JSON path")
    ver.add_argument("--full-max-n", type=int, default=300,
                     help="largest n for the full-dimension LMI cross-check")
    ver.add_argument("--states", type=int, default=500,
                     help="reachable states for the contraction check")
    ver.add_argument("--p", type=int, default=3,
                     help="problem dimension for the contraction check")
    common(ver)
    ver.set_defaults(func=cmd_verify)

    bis = sub.add_parser("bisect", help="smallest certified rho2 by bisection")
    problem_flags(bis, need_alpha=False)
    bis.add_argument("--rho2-tol", type=float, default=1e-6)
    bis.add_argument("--restarts", type=int, default=8)
    bis.add_argument("--max-evals", type=int, default=800)
    common(bis)
    bis.set_defaults(func=cmd_bisect)

    sim = sub.add_parser("simulate", help="Monte Carlo run against a certified rate")
    problem_flags(sim, need_alpha=False)
    sim.add_argument("--p", type=int, default=3, help="problem dimension")
    sim.add_argument("--iters", type=int, default=300)
    sim.add_argument("--trials", type=int, default=200)
    sim.add_argument("--y0", choices=["zeros", "gradients"], default="zeros",
                     help="table initialization")
    sim.add_argument("--config", default=None,
                     help="JSON file overriding y0_mode / trial_offset")
    sim.add_argument("--no-certificate", action="store_true",
                     help="record plain squared norms instead of certified weights")
    common(sim)
    sim.set_defaults(func=cmd_simulate)

    sw = sub.add_parser("sweep", help="bisect over a JSON grid, emit CSV")
    sw.add_argument("--grid", required=True, help="JSON grid file")
    common(sw)
    sw.set_defaults(func=cmd_sweep)

    probe = sub.add_parser("sag-probe",
                           help="one-sided witness search at SAG's published rate")
    probe.add_argument("--m", type=float, required=True)
    probe.add_argument("--L", type=float, required=True)
    probe.add_argument("--n", type=int, required=True)
    probe.add_argument("--alpha", type=float, default=None)
    probe.add_argument("--restarts", type=int, default=6)
    probe.add_argument("--max-evals", type=int, default=600)
    common(probe)
    probe.set_defaults(func=cmd_sag_probe)
    return ap


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ValueError, OSError) as exc:
        print("error: %s" % exc, file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
