"""Command-line interface: ``qbridge {solve,intermediate,weak,simulate,verify}``.

Exit codes: 0 when every verification passes, 2 when a verification or a
numerical step fails, 1 for invalid input.
"""

from __future__ import annotations

import argparse
import io
import json
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import numpy as np

from ._checks import Check
from .bridge import solve_bridge, solve_coupling
from .config import dumps, load_config, parse_matrix, parse_spec
from .ensemble import sample_from_coupling, sanov_decay_check
from .errors import InfeasibleMarginals, InputError, PriorDegenerate, QBridgeError, TooLarge, ZeroOverlap
from .experiment import Weak, prior_intermediate_state, prior_joint
from .inference import (
    finite_delta_weak_average,
    generalized_distribution,
    most_likely_projective_distribution,
    most_likely_weak_value,
    weak_value,
)
from .reversal import check_equivalence, solve_reverse_bridge
from .tolerances import (
    QUADRATURE_NODES,
    SINKHORN_MAX_ITER,
    SINKHORN_TOL,
    TAU_EDGE,
)

EXIT_OK, EXIT_INPUT, EXIT_VERIFY = 0, 1, 2
DEFAULT_TAU_GRID = 101
DEFAULT_DELTA_LADDER = (0.2, 0.1, 0.05, 0.025, 0.0125)
DEFAULT_SANOV_LADDER = (20, 60, 100, 300)
# errors at rounding level make halving ratios meaningless
RATIO_FLOOR = 1e-12


def _options(args):
    """Command-line overrides that change results (worker count does not)."""
    keys = ("tol", "max_iter", "seed", "tau_grid", "quad_nodes")
    return {k: getattr(args, k) for k in keys if getattr(args, k, None) is not None}


def _solver(doc, opts):
    solver = doc.get("solver", {})
    return (float(opts.get("tol", solver.get("tol", SINKHORN_TOL))),
            int(opts.get("max_iter", solver.get("max_iter", SINKHORN_MAX_ITER))))


def _labels(ch):
    return [str(lab) for lab in (ch.labels or range(len(ch)))]


# ------------------------------------------------------------------ runners

def run_solve(doc, opts):
    spec = parse_spec(doc)
    tol, max_iter = _solver(doc, opts)
    sol = solve_bridge(spec, tol=tol, max_iter=max_iter, verify=False)
    rev = solve_reverse_bridge(sol.prior, sol, spec, cross_check=True, verify=False)
    eq = check_equivalence(sol, rev, raise_on_failure=False)
    checks = sol.checks + rev.checks + eq
    result = {
        "prior_joint": sol.prior.joint,
        "coupling": sol.coupling,
        "potentials": {"a": sol.potentials.a, "b": sol.potentials.b, "gauge": sol.potentials.gauge},
        "kl": sol.kl,
        "n_iter": sol.n_iter,
        "marginal_residual": sol.residual,
        "updated_channel": {"labels": _labels(sol.updated), "operators": sol.updated.operators},
        "reversed_coefficients": {"c": rev.c, "d": rev.d},
    }
    return result, list(checks)


def _tau_row(spec, t, tol, max_iter):
    s = spec.at_tau(t)
    prior = prior_intermediate_state(s).probs
    bridge = solve_bridge(s, tol=tol, max_iter=max_iter, verify=False)
    dist = most_likely_projective_distribution(s, bridge, verify=False)
    return prior, dist


def run_intermediate(doc, opts, workers=1):
    spec = parse_spec(doc)
    if prior_intermediate_state(spec).probs is None:
        raise InputError("intermediate needs a projective measurement in the split")
    tol, max_iter = _solver(doc, opts)
    n_grid = int(opts.get("tau_grid", doc.get("inference", {}).get("tau_grid", DEFAULT_TAU_GRID)))
    if n_grid < 2:
        raise InputError("tau grid needs at least 2 points")
    taus = np.linspace(TAU_EDGE, 1.0 - TAU_EDGE, n_grid)
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            rows = list(pool.map(lambda t: _tau_row(spec, t, tol, max_iter), taus))
    else:
        rows = [_tau_row(spec, t, tol, max_iter) for t in taus]

    n = spec.dim
    buf = io.StringIO(newline="")
    header = ["tau"] + [f"prior_p{z}" for z in range(n)] + [f"bridge_p{z}" for z in range(n)]
    buf.write(",".join(header) + "\n")
    worst, tols = {}, {}
    for t, (prior, dist) in zip(taus, rows):
        vals = [t, *prior, *dist.probs]
        buf.write(",".join("%.16e" % v for v in vals) + "\n")
        for c in dist.checks:
            prev = worst.get(c.name, 0.0)
            worst[c.name] = max(prev, c.value)
            tols[c.name] = c.tol
    checks = [Check("max_" + name, v, tols[name]) for name, v in sorted(worst.items())]
    return buf.getvalue(), checks


def run_weak(doc, opts):
    inf = doc.get("inference", {})
    spec = parse_spec(doc, tau=inf.get("tau"))
    meas = spec.split.measurement
    nodes = int(opts.get("quad_nodes", inf.get("quadrature_nodes", QUADRATURE_NODES)))
    observable = None
    if "observable" in inf:
        observable = parse_matrix(inf["observable"])
    n = spec.dim
    pairs = {}
    for i in range(n):
        for j in range(n):
            try:
                pairs[f"{i},{j}"] = weak_value(spec, i, j, observable=observable)
            except ZeroOverlap:
                pairs[f"{i},{j}"] = None
    checks = []
    result = {"tau": spec.tau, "weak_values": pairs}

    try:
        ml = most_likely_weak_value(spec, observable=observable, verify=False)
        result["most_likely"] = {"forward": ml.forward, "reversed": ml.reversed,
                                 "disintegration": ml.disintegration}
        checks.extend(ml.checks)
    except PriorDegenerate as exc:
        result["most_likely"] = {"skipped": str(exc)}

    i, j = (int(k) for k in inf.get("pair", (0, 0)))
    ladder = [float(d) for d in inf.get("delta_ladder", DEFAULT_DELTA_LADDER)]
    table = []
    if pairs.get(f"{i},{j}") is not None:
        zw = pairs[f"{i},{j}"]
        prev = None
        for d in ladder:
            avg = finite_delta_weak_average(spec, i, j, delta=d, nodes=nodes)
            err = abs(avg - zw)
            ratio = prev / err if prev is not None and min(prev, err) > RATIO_FLOOR else None
            table.append({"delta": d, "average": avg, "error": err, "ratio": ratio})
            prev = err
    result["convergence"] = {"pair": [i, j], "table": table}

    if isinstance(meas, Weak):
        try:
            gen = generalized_distribution(spec, nodes=nodes, verify=False)
            result["generalized"] = {"delta": meas.delta, "mass": gen.mass, "mean": gen.mean()}
            checks.extend(gen.checks)
        except PriorDegenerate as exc:
            result["generalized"] = {"skipped": str(exc)}
    return result, checks


def run_simulate(doc, opts, workers=1):
    sim = doc.get("simulate")
    if not isinstance(sim, dict):
        raise InputError("config has no 'simulate' block")
    trials = int(sim.get("trials", 0))
    seed = int(opts.get("seed", sim.get("seed", 0)))
    if "experiment" in doc:
        spec = parse_spec(doc)
        p = prior_joint(spec).joint
        alpha_t, beta_t = spec.alpha_tilde, spec.beta_tilde
    else:
        try:
            p = np.asarray(sim["prior_joint"], dtype=float)
        except KeyError as exc:
            raise InputError("simulate needs an experiment or a 'prior_joint'") from exc
        alpha_t, beta_t = sim.get("alpha_tilde"), sim.get("beta_tilde")

    counts = sample_from_coupling(p, trials, seed, workers=workers)
    result = {"prior_joint": p, "prior_sample": counts.to_dict(),
              "empirical_row_marginal": counts.row_marginal,
              "empirical_col_marginal": counts.col_marginal}
    checks = [Check("counts_total", abs(int(counts.counts.sum()) - trials), 0.0)]
    if alpha_t is not None and beta_t is not None:
        tol, max_iter = _solver(doc, opts)
        q = solve_coupling(p, alpha_t, beta_t, tol=tol, max_iter=max_iter).coupling
        bridged = sample_from_coupling(q, trials, seed, workers=workers)
        result["coupling"] = q
        result["bridge_sample"] = bridged.to_dict()
        if p.shape == (2, 2):
            ladder = sim.get("sanov_ladder", DEFAULT_SANOV_LADDER)
            try:
                result["sanov"] = sanov_decay_check(p, alpha_t, beta_t, ladder).to_dict()
            except (InfeasibleMarginals, TooLarge) as exc:
                result["sanov"] = {"skipped": str(exc)}
    return result, checks


RUNNERS = {"solve": run_solve, "weak": run_weak}


def _document(command, doc, opts, result, checks):
    return {
        "command": command,
        "config": doc,
        "options": opts,
        "result": result,
        "checks": [c.as_dict() for c in checks],
        "passed": all(c.passed for c in checks),
    }


def _rerun(command, doc, opts):
    if command == "intermediate":
        return run_intermediate(doc, opts)
    if command == "simulate":
        return run_simulate(doc, opts)
    return RUNNERS[command](doc, opts)


def verify_result(result_doc):
    """Re-run the echoed config and compare every pass flag.

    Returns a list of ``(check name, recorded flag, recomputed flag)`` for
    each disagreement, including checks present on only one side.
    """
    command = result_doc["command"]
    _, checks = _rerun(command, result_doc["config"], result_doc.get("options", {}))
    recorded = {c["name"]: c["pass"] for c in result_doc["checks"]}
    # the stored value must also reproduce its own flag
    for c in result_doc["checks"]:
        if (c["value"] <= c["tol"]) != c["pass"]:
            recorded[c["name"]] = None
    fresh = {c.name: c.passed for c in checks}
    return [(k, recorded.get(k), fresh.get(k)) for k in sorted(set(recorded) | set(fresh))
            if recorded.get(k) != fresh.get(k)]


# --------------------------------------------------------------------- main

def _report_failures(checks):
    for c in checks:
        if not c.passed:
            print(f"verification failed: {c.name} = {c.value:.3e} > {c.tol:.0e}", file=sys.stderr)


def _write(path, text):
    Path(path).write_bytes(text.encode("ascii"))


def _build_parser():
    parser = argparse.ArgumentParser(prog="qbridge", description="Most likely evolution of pre/post-selected quantum experiments.")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, help_ in (("solve", "solve the bridge and report the updated channel"),
                        ("intermediate", "tabulate prior and bridged intermediate distributions over tau"),
                        ("weak", "weak values, most likely weak value, finite-strength convergence"),
                        ("simulate", "sample the experiment and run the exact decay check")):
        p = sub.add_parser(name, help=help_)
        p.add_argument("--config", required=True)
        p.add_argument("--out", required=True)
        p.add_argument("--tol", type=float)
        p.add_argument("--max-iter", type=int)
        p.add_argument("--seed", type=int)
        p.add_argument("--tau-grid", type=int)
        p.add_argument("--quad-nodes", type=int)
        p.add_argument("--workers", type=int, default=1)
    v = sub.add_parser("verify", help="re-run a result document and compare its pass flags")
    v.add_argument("--result", required=True)
    return parser


def main(argv=None):
    try:
        args = _build_parser().parse_args(argv)
    except SystemExit as exc:
        # argparse exits with 2 on usage errors; those are input errors here
        return EXIT_INPUT if exc.code else EXIT_OK
    try:
        if args.command == "verify":
            try:
                doc = json.loads(Path(args.result).read_text())
            except (OSError, json.JSONDecodeError) as exc:
                raise InputError(f"cannot read result {args.result}: {exc}") from exc
            diffs = verify_result(doc)
            for name, old, new in diffs:
                print(f"flag mismatch: {name}: recorded {old}, recomputed {new}", file=sys.stderr)
            return EXIT_VERIFY if diffs else EXIT_OK

        doc = load_config(args.config)
        opts = _options(args)
        workers = max(1, int(args.workers))
        if args.command == "intermediate":
            text, checks = run_intermediate(doc, opts, workers)
            _write(args.out, text)
        else:
            if args.command == "simulate":
                result, checks = run_simulate(doc, opts, workers)
            else:
                result, checks = RUNNERS[args.command](doc, opts)
            _write(args.out, dumps(_document(args.command, doc, opts, result, checks)))
    except InputError as exc:
        print(f"input error ({type(exc).__name__}): {exc}", file=sys.stderr)
        return EXIT_INPUT
    except QBridgeError as exc:
        print(f"failure ({type(exc).__name__}): {exc}", file=sys.stderr)
        return EXIT_VERIFY
    _report_failures(checks)
    return EXIT_OK if all(c.passed for c in checks) else EXIT_VERIFY


if __name__ == "__main__":
    sys.exit(main())
