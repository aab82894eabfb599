"""Command-line interface: ``entropic-sdot <command> SCENARIO [options]``.

Exit codes: 0 success, 1 invalid input, 2 solver failure, 3 identity check failure.
"""

import argparse
import csv
import io
import json
import logging
import sys

import numpy as np

from . import __version__
from .asymptotics import SweepError, case_study_subopt, predict, run_sweep
from .entropic import DiagnosticsRow, cost, dual_gap, kl_and_entropic_cost, sinkhorn_solve
from .exceptions import ConsistencyError, ConvergenceError, QuadratureError, ScenarioError
from .identities import identity_suite
from .oracle import DiscreteProblem, dense_sinkhorn, discretize
from .powercell import facet_weights
from .scenario import bundled_scenarios, load_scenario
from .sdot import solve_unregularized

EXIT_OK = 0
EXIT_INVALID = 1
EXIT_SOLVER = 2
EXIT_IDENTITY = 3

log = logging.getLogger("entropic_sdot")


def format_value(v):
    """17 significant digits, enough for an exact float round trip."""
    return format(float(v), ".17g")


def write_csv(header, rows, out):
    w = csv.writer(out, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([format_value(v) for v in row])


def rows_to_csv(rows):
    buf = io.StringIO()
    write_csv(DiagnosticsRow.columns(), [r.values() for r in rows], buf)
    return buf.getvalue()


def read_csv(text):
    """Parse CSV written by this module back to a header and float rows."""
    reader = csv.reader(io.StringIO(text))
    header = next(reader)
    return header, [[float(v) for v in row] for row in reader]


def _emit(text, path):
    if path in (None, "-"):
        sys.stdout.write(text)
    else:
        with open(path, "w", encoding="utf-8", newline="") as f:
            f.write(text)
        log.info("wrote %s", path)


def _parse_etas(text):
    try:
        etas = [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"invalid eta list {text!r}")
    if not etas or any(not np.isfinite(e) or e <= 0 for e in etas):
        raise argparse.ArgumentTypeError("eta values must be positive")
    return sorted(set(etas))


def _settings(args):
    scenario = load_scenario(args.scenario)
    spec = scenario.quadrature
    if args.quad_rel_tol is not None:
        spec = spec.replace(rel_tol=args.quad_rel_tol)
    etas = args.eta if args.eta is not None else scenario.etas
    tol = args.tol if args.tol is not None else scenario.entropic_tol
    method = args.method or scenario.method
    return scenario, spec, etas, tol, method


def _solve_dual(scenario, spec):
    return solve_unregularized(scenario.density, scenario.atoms, tol=scenario.unregularized_tol, spec=spec)


def _json(obj):
    return json.dumps(obj, indent=2, sort_keys=False) + "\n"


def cmd_solve(args):
    scenario, spec, etas, tol, method = _settings(args)
    dual = _solve_dual(scenario, spec)
    w = facet_weights(dual.diagram, spec)
    report = {
        "scenario": scenario.name,
        "unregularized": {
            "g_star": dual.g_star.tolist(),
            "w2_squared": dual.w2_squared,
            "mass_residual": dual.residual,
            "newton_iterations": dual.iterations,
            "cell_masses": np.asarray(dual.masses).tolist(),
            "facet_weights": {f"{i},{j}": w[i, j] for (i, j) in sorted(dual.diagram.facets)},
        },
    }
    if dual.exact_gap is not None:
        report["unregularized"]["quantile_gap"] = dual.exact_gap
    if args.eta is not None:
        out = []
        g0 = None
        for eta in etas:
            sol = sinkhorn_solve(dual, eta, tol=tol, spec=spec, g0=g0, method=method)
            g0 = sol.g_eta
            kl_rho, kl_nu, ent = kl_and_entropic_cost(sol)
            out.append({
                "eta": eta,
                "g_eta": sol.g_eta.tolist(),
                "marginal_residual": sol.marginal_residual,
                "iterations": sol.iterations,
                "cost": cost(sol),
                "kl_mu_rho": kl_rho,
                "kl_mu_nu": kl_nu,
                "entropic_cost": ent,
                "d_eta_inf_norm": dual_gap(sol)[1],
            })
        report["entropic"] = out
    _emit(_json(report), args.out)
    return EXIT_OK


def cmd_sweep(args):
    scenario, spec, etas, tol, method = _settings(args)
    try:
        rows = run_sweep(scenario.problem, etas, tol=tol, spec=spec, method=method)
    except SweepError as exc:
        _emit(rows_to_csv(exc.rows), args.out or scenario.output)
        raise
    _emit(rows_to_csv(rows), args.out or scenario.output)
    return EXIT_OK


def cmd_predict(args):
    scenario, spec, *_ = _settings(args)
    pred = predict(_solve_dual(scenario, spec), spec)
    _emit(_json({"scenario": scenario.name, "subopt_constant": pred.subopt_constant,
                 "entropy_nu": pred.entropy_nu, "w2_squared": pred.w2_squared}), args.out)
    return EXIT_OK


def cmd_verify_identities(args):
    checks = identity_suite()
    text = "".join(c.line() + "\n" for c in checks)
    _emit(text, args.out)
    return EXIT_OK if all(c.passed for c in checks) else EXIT_IDENTITY


def cmd_oracle_compare(args):
    scenario, spec, etas, tol, method = _settings(args)
    if scenario.density.dim != 1:
        raise ScenarioError("the dense oracle is one-dimensional", path="density")
    if args.eta is None:
        etas = [e for e in etas if e <= 16] or [8.0]
    n_grid = args.grid_points or scenario.grid_points
    dual = _solve_dual(scenario, spec)
    points, weights = discretize(scenario.density, n_grid, spec)
    header = ["eta", "grid_points", "cost_oracle", "cost_semidiscrete", "cost_rel_diff",
              "g_sup_diff", "kl_mu_rho_oracle", "kl_mu_rho_semidiscrete"]
    rows = []
    g0 = None
    for eta in etas:
        sol = sinkhorn_solve(dual, eta, tol=tol, spec=spec, g0=g0, method=method)
        g0 = sol.g_eta
        ref = dense_sinkhorn(DiscreteProblem(points, weights, scenario.atoms, eta))
        c = cost(sol)
        rows.append([eta, len(points), ref.cost, c, abs(ref.cost - c) / abs(c),
                     float(np.max(np.abs(ref.g - sol.g_eta))), ref.kl_rho, kl_and_entropic_cost(sol)[0]])
    buf = io.StringIO()
    write_csv(header, rows, buf)
    _emit(buf.getvalue(), args.out)
    return EXIT_OK


def cmd_case_study(args):
    scenario, spec, etas, *_ = _settings(args)
    atoms = scenario.atoms
    if atoms.dim != 1 or atoms.n != 2 or sorted(atoms.positions[:, 0]) != [-1.0, 1.0] \
            or not np.allclose(atoms.weights, 0.5):
        raise ScenarioError("case-study needs atoms -1 and +1 with equal weights", path="atoms")
    buf = io.StringIO()
    write_csv(["eta", "suboptimality", "suboptimality_scaled"],
              [[eta, v, eta**2 * v] for eta, v in ((e, case_study_subopt(scenario.density, e, spec)) for e in etas)],
              buf)
    _emit(buf.getvalue(), args.out)
    return EXIT_OK


def build_parser():
    parser = argparse.ArgumentParser(prog="entropic-sdot",
                                     description="Semi-discrete (entropic) optimal transport experiments.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("-v", "--verbose", action="count", default=0)
    sub = parser.add_subparsers(dest="command", required=True)

    def scenario_command(name, func, help_text):
        p = sub.add_parser(name, help=help_text)
        p.add_argument("scenario", help="scenario JSON file or bundled name (" + ", ".join(bundled_scenarios()) + ")")
        p.add_argument("--out", help="output path (default: stdout)")
        p.add_argument("--tol", type=float, help="marginal tolerance for the entropic solver")
        p.add_argument("--eta", type=_parse_etas, help="comma-separated eta values (overrides the scenario)")
        p.add_argument("--quad-rel-tol", type=float, help="relative quadrature tolerance")
        p.add_argument("--method", choices=["newton", "sinkhorn"], help="entropic solver iteration")
        p.add_argument("--seed", type=int, help="accepted for interface stability; all paths are deterministic")
        p.set_defaults(func=func)
        return p

    scenario_command("solve", cmd_solve, "solve the unregularized problem (and entropic ones with --eta)")
    scenario_command("sweep", cmd_sweep, "diagnostics CSV over the eta grid")
    scenario_command("predict", cmd_predict, "predicted large-eta constants")
    p = scenario_command("oracle-compare", cmd_oracle_compare, "compare against dense Sinkhorn on a grid (1D)")
    p.add_argument("--grid-points", type=int, help="number of grid cells (default: scenario or 2000)")
    scenario_command("case-study", cmd_case_study, "closed-form suboptimality for symmetric two-atom problems")
    p = sub.add_parser("verify-identities", help="dilogarithm and quadrature identity checks")
    p.add_argument("--out", help="output path (default: stdout)")
    p.set_defaults(func=cmd_verify_identities)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.WARNING - 10 * min(args.verbose, 2),
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except (ScenarioError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except (ConvergenceError, ConsistencyError, QuadratureError, SweepError) as exc:
        print(f"solver error: {exc}", file=sys.stderr)
        return EXIT_SOLVER
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main())
