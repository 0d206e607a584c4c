"""Command-line front end.

Exit codes: 0 clean run, 2 validation failure, 3 I/O failure, 4 numerical non-convergence.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from pathlib import Path

import numpy as np

from .blowup import AnalysisReport, analyze
from .dynamics import integrate, read_trajectory_csv, trajectory_csv
from .graph import GraphError, parse_graph
from .presets import PRESET_NAMES
from .problem import ProblemError
from .problemfile import load_problem, node_values
from .scenarios import reproduce, run_report
from .spectral import ConvergenceError, principal_eigenpair
from .svgplot import line_chart

EXIT_OK, EXIT_VALIDATION, EXIT_IO, EXIT_NUMERICAL = 0, 2, 3, 4


def _write_all(outputs: dict[Path, str]):
    """Write outputs only after everything has been computed, so failures leave no partial files."""
    for path, text in outputs.items():
        Path(path).parent.mkdir(parents=True, exist_ok=True)
        Path(path).write_text(text)


def _overrides(args) -> dict:
    return {
        "rtol": args.rtol, "atol": args.atol, "t_horizon": args.tmax,
        "u_max": args.umax, "h_min": args.hmin, "ubar": args.ubar,
    }


def cmd_simulate(args) -> int:
    lp = load_problem(args.problem, _overrides(args))
    traj = integrate(lp.spec, lp.options)
    outputs = {Path(args.out): trajectory_csv(traj)}
    report = run_report(traj)
    if args.report:
        outputs[Path(args.report)] = json.dumps(report, indent=2) + "\n"
    _write_all(outputs)
    print(f"status={report['status']} t_detect={report['t_detect']!r} samples={report['n_samples']}")
    return EXIT_OK


def cmd_analyze(args) -> int:
    lp = load_problem(args.problem, {"ubar": args.ubar})
    report = analyze(lp.spec, equilibrium=lp.equilibrium, sigma=args.sigma)
    _write_all({Path(args.out): report.to_json()})
    well = report.well["classification"] if report.well else "n/a"
    print(f"lambda_a={report.eigen['lambda_a']!r} well={well} best_bound={report.best_bound!r}")
    return EXIT_OK


def _parse_potential(g, spec: str):
    candidate = Path(spec)
    try:
        value = float(spec)
        return node_values(g, value, "potential")
    except ValueError:
        pass
    if spec.lstrip().startswith("{"):
        return node_values(g, json.loads(spec), "potential")
    return node_values(g, json.loads(candidate.read_text()), "potential")


def cmd_spectrum(args) -> int:
    g = parse_graph(Path(args.graph).read_text())
    try:
        a = _parse_potential(g, args.potential)
    except json.JSONDecodeError as exc:
        raise ProblemError(f"malformed potential JSON: {exc}") from None
    if np.any(a < 0):
        raise ProblemError("potential a must be nonnegative")
    pair = principal_eigenpair(g, a, tol=args.tol)
    out = {
        "lambda_a": pair.lambda_a,
        "phi": {x: float(v) for x, v in zip(g.nodes, pair.phi)},
        "residual": pair.residual,
    }
    _write_all({Path(args.out): json.dumps(out, indent=2) + "\n"})
    print(f"lambda_a={pair.lambda_a!r} residual={pair.residual:.3e}")
    return EXIT_OK


def cmd_plot(args) -> int:
    header, cols = read_trajectory_csv(Path(args.traj).read_text())
    wanted = [c.strip() for c in args.columns.split(",") if c.strip()] if args.columns else [
        h for h in header if h.startswith("u_")
    ]
    series = {}
    for name in wanted:
        if name == "envelope":
            if not args.report:
                raise ProblemError("column 'envelope' needs --report ANALYSIS_JSON")
            rep = AnalysisReport.from_json(Path(args.report).read_text())
            th = rep.thresholds
            lam = rep.eigen["lambda_a"]
            series[name] = th["l2_norm_u0"] / math.sqrt(th["mu_min"]) * np.exp(-0.5 * lam * cols["t"])
        elif name in cols and name != "t":
            series[name] = cols[name]
        else:
            raise ProblemError(f"unknown column {name!r}; available: {', '.join(header[1:])}")
    svg = line_chart(cols["t"], series, logy=args.logy, title=args.title or Path(args.traj).name)
    _write_all({Path(args.out): svg})
    return EXIT_OK


def cmd_reproduce(args) -> int:
    if args.preset not in PRESET_NAMES:
        raise ProblemError(f"unknown preset {args.preset!r}; choose from {', '.join(PRESET_NAMES)}")
    summary = reproduce(args.preset, Path(args.out_dir))
    for c in summary["checks"]:
        mark = "PASS" if c["passed"] else "FAIL"
        print(f"[{mark}] {c['kind']:<12} {c['name']}: {c['value']!r}"
              + (f" (expected {c['expected']!r})" if c["expected"] is not None else ""))
    print("all checks passed" if summary["all_passed"] else "some checks FAILED")
    return EXIT_OK


def _integrator_flags(p):
    p.add_argument("--rtol", type=float)
    p.add_argument("--atol", type=float)
    p.add_argument("--tmax", type=float, help="integration horizon")
    p.add_argument("--umax", type=float, help="blow-up threshold on max|u|")
    p.add_argument("--hmin", type=float, help="smallest admissible step")
    p.add_argument("--seed", type=int, help="seed for randomized runs (unused by deterministic commands)")
    p.add_argument("--ubar", type=float, help="equilibrium offset in the controller term")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="netblowup", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="integrate a problem file, write a trajectory CSV")
    p.add_argument("problem")
    p.add_argument("--out", required=True)
    p.add_argument("--report", help="run report JSON (status, t_detect, bracket, final norms)")
    _integrator_flags(p)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("analyze", help="spectral thresholds, well classification and blow-up bounds")
    p.add_argument("problem")
    p.add_argument("--out", required=True)
    p.add_argument("--sigma", type=float, help="decay rate for the small-data constants (default lambda_a/2)")
    p.add_argument("--ubar", type=float)
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("spectrum", help="first eigenpair of -Lap + a")
    p.add_argument("graph")
    p.add_argument("--potential", required=True,
                   help='number, JSON like \'{"map": {...}}\', or path to such a JSON file')
    p.add_argument("--out", required=True)
    p.add_argument("--tol", type=float, default=1e-10)
    p.set_defaults(func=cmd_spectrum)

    p = sub.add_parser("plot", help="SVG line chart from a trajectory CSV")
    p.add_argument("traj")
    p.add_argument("--out", required=True)
    p.add_argument("--columns", help="comma-separated CSV columns; 'envelope' needs --report")
    p.add_argument("--report", help="analysis JSON supplying lambda_a and ||u0||_2 for the envelope")
    p.add_argument("--logy", action="store_true")
    p.add_argument("--title")
    p.set_defaults(func=cmd_plot)

    p = sub.add_parser("reproduce", help="run a preset scenario end to end")
    p.add_argument("preset", help=", ".join(PRESET_NAMES))
    p.add_argument("--out-dir", required=True)
    p.set_defaults(func=cmd_reproduce)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (GraphError, ProblemError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except ConvergenceError as exc:
        print(f"numerical error: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION


if __name__ == "__main__":
    sys.exit(main())
