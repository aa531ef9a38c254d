"""Command-line front end.

    weakstab catalog
    weakstab analyze l4_linear
    weakstab analyze cherry --sigma 1
    weakstab integrate l4_linear --initial 1,0,0,0 --t1 20 --format csv
    weakstab probe variation_like --sigma 1 --epsilons 0.5,0.1
    weakstab certify l4_linear --seed 42
    weakstab period-scan --g-coeffs 1,1 --amplitudes 0.1,0.2,0.3
    weakstab plot variation-unbounded --sigma 1 --tmax 200 --out fig2.svg

Exit status: 0 on success, 2 on usage errors, 3 on numerical failure (the
failure is reported as JSON on stdout).
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

import numpy as np

from weakstab import analysis, isochrony, plotting, probe
from weakstab.core import CATALOG, GFunction, catalog_build
from weakstab.errors import NumericalFailure, WeakstabError
from weakstab.integrate import CORRECTOR_FAILURE, METHODS, IntegratorConfig, energy_drift, integrate

log = logging.getLogger("weakstab")

EXIT_OK, EXIT_USAGE, EXIT_NUMERICAL = 0, 2, 3
FIGURES = ("cherry-asymptotic", "variation-unbounded")


class UsageError(Exception):
    pass


def _floats(text: str) -> list[float]:
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None


def _coeffs(text: str) -> list[str]:
    parts = [v.strip() for v in text.split(",") if v.strip()]
    if not parts:
        raise argparse.ArgumentTypeError("empty coefficient list")
    return parts


def _params(args) -> dict:
    params = {}
    if getattr(args, "sigma", None) is not None:
        params["sigma"] = args.sigma
    if getattr(args, "g_coeffs", None) is not None:
        params["g_coeffs"] = args.g_coeffs
    return params


def _system(args):
    return catalog_build(args.system, _params(args))


def _emit(args, payload: dict | str) -> None:
    text = payload if isinstance(payload, str) else json.dumps(payload, indent=2, default=_json_default) + "\n"
    if getattr(args, "out", None):
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)


def _json_default(obj):
    if isinstance(obj, (np.floating, np.integer)):
        return obj.item()
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    return str(obj)


def _config(args, **extra) -> IntegratorConfig:
    return IntegratorConfig(method=args.method, h=args.step, **extra)


def cmd_catalog(args) -> int:
    entries = []
    for name in CATALOG:
        s = catalog_build(name)
        entries.append({"name": name, "n": s.n, "params": dict(s.params), "description": s.description})
    _emit(args, {"systems": entries})
    return EXIT_OK


def cmd_analyze(args) -> int:
    s = _system(args)
    eps = args.epsilons or probe.DEFAULT_EPSILONS
    report = analysis.analyze_system(s, radius=args.radius, epsilons=eps, t_max=args.tmax,
                                     cfg=_config(args), seed=args.seed)
    _emit(args, report)
    return EXIT_OK


def cmd_integrate(args) -> int:
    s = _system(args)
    if args.initial is None:
        x0 = s.equilibrium.as_array().copy()
        x0[0] += 0.1
    else:
        x0 = np.array(args.initial)
    if args.t1 == args.t0:
        raise UsageError("zero-length time span")
    cfg = _config(args, escape_radius=args.radius_opt)
    tr = integrate(s, x0, args.t0, args.t1, cfg)
    status = EXIT_NUMERICAL if tr.terminated_by == CORRECTOR_FAILURE else EXIT_OK
    if args.format == "csv" and status == EXIT_OK:
        _emit(args, tr.to_csv())
    else:
        body = {"error": "CorrectorFailure"} if status == EXIT_NUMERICAL else {}
        _emit(args, body | {
            "system": s.to_record(),
            "method": cfg.method,
            "step": cfg.h,
            "terminated_by": tr.terminated_by,
            "escape_time": tr.escape_time,
            "steps": len(tr) - 1,
            "final_time": float(tr.times[-1]),
            "final_state": tr.final.tolist(),
            "energy_drift": energy_drift(tr),
        })
    return status


def cmd_probe(args) -> int:
    s = _system(args)
    witness = probe.default_witness(s)
    if witness is None:
        raise UsageError(f"no default witness for {s.name} with these parameters")
    eps = args.epsilons or probe.DEFAULT_EPSILONS
    rep = probe.instability_probe(s, R=args.radius, epsilons=eps, t_max=args.tmax, cfg=_config(args), **witness)
    _emit(args, rep.to_dict())
    return EXIT_OK


def cmd_certify(args) -> int:
    s = _system(args)
    cascade = probe.default_cascade(s)
    cert = probe.certify_no_asymptotic(s, cascade, sample_count=args.samples, seed=args.seed)
    _emit(args, cert.to_dict())
    return EXIT_OK


def cmd_period_scan(args) -> int:
    if args.g_coeffs is not None and args.sigma is not None:
        raise UsageError("give either --sigma or --g-coeffs")
    g = GFunction(tuple(args.g_coeffs)) if args.g_coeffs is not None else GFunction.from_sigma(
        1.0 if args.sigma is None else args.sigma)
    amps = args.amplitudes or [0.1, 0.2, 0.3]
    cfg = IntegratorConfig(method=args.method or isochrony.DEFAULT_PERIOD_CONFIG.method,
                           h=args.step or isochrony.DEFAULT_PERIOD_CONFIG.h)
    table = isochrony.period_scan(g, amps, cfg)
    if args.format == "csv":
        _emit(args, table.to_csv())
    else:
        verdict = isochrony.stability_verdict(g, table, args.spread_tol) if table.periods.size else None
        _emit(args, {
            "g_coeffs": g.to_strings(),
            "table": table.to_dict(),
            "verdict": None if verdict is None else verdict.to_dict(),
        })
    return EXIT_OK


def cmd_plot(args) -> int:
    out = Path(args.out or f"{args.figure}.svg")
    if not out.parent.exists():
        raise UsageError(f"output directory {out.parent} does not exist")
    sigma = 1.0 if args.sigma is None else args.sigma
    if args.figure == "cherry-asymptotic":
        t0 = -60.0 if args.t0 is None else args.t0
        t1 = -1.0 if args.t1 is None else args.t1
        if t0 == t1:
            raise UsageError("zero-length time span")
        if not t0 < t1 < 0:
            raise UsageError("need t0 < t1 < 0: the asymptotic motion lives at negative times")
        try:
            plotting.parse_coords(args.coords)
        except ValueError as exc:
            raise UsageError(str(exc)) from None
        summary = plotting.plot_cherry_asymptotic(out, sigma, t0, t1, args.coords)
    else:
        if args.tmax is not None and args.tmax <= 0:
            raise UsageError("zero-length time span")
        summary = plotting.plot_variation_unbounded(out, sigma, 200.0 if args.tmax is None else args.tmax,
                                                    args.step or 1e-2)
    sys.stdout.write(json.dumps(summary, indent=2) + "\n")
    return EXIT_OK


def _system_parser(sub, name, help_text, func):
    p = sub.add_parser(name, help=help_text)
    p.add_argument("system", choices=CATALOG)
    p.add_argument("--sigma", type=float)
    p.add_argument("--g-coeffs", type=_coeffs, help="g coefficients c1,c2,... (fractions like 10/9 allowed)")
    p.set_defaults(func=func)
    return p


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="weakstab", description="Stability laboratory for Hamiltonian equilibria.")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("catalog", help="list the example systems")
    p.add_argument("--out")
    p.set_defaults(func=cmd_catalog)

    def numeric(p, step=1e-2, tmax=probe.DEFAULT_TMAX):
        p.add_argument("--method", choices=METHODS, default="implicit_midpoint")
        p.add_argument("--step", type=float, default=step)
        p.add_argument("--tmax", type=float, default=tmax)
        p.add_argument("--radius", type=float, default=probe.DEFAULT_RADIUS)
        p.add_argument("--epsilons", type=_floats)
        p.add_argument("--seed", type=int, default=probe.DEFAULT_SEED)
        p.add_argument("--out")
        p.add_argument("--format", choices=("json",), default="json")

    numeric(_system_parser(sub, "analyze", "spectrum, witnesses, certificates and composite verdict", cmd_analyze))
    numeric(_system_parser(sub, "probe", "shrinking-initial-condition instability witness", cmd_probe))

    p = _system_parser(sub, "certify", "first-integral cascade check", cmd_certify)
    p.add_argument("--seed", type=int, default=probe.DEFAULT_SEED)
    p.add_argument("--samples", type=int, default=1000)
    p.add_argument("--out")
    p.add_argument("--format", choices=("json",), default="json")

    p = _system_parser(sub, "integrate", "integrate one trajectory", cmd_integrate)
    p.add_argument("--initial", type=_floats, help="q1,...,qn,p1,...,pn")
    p.add_argument("--method", choices=METHODS, default="implicit_midpoint")
    p.add_argument("--step", type=float, default=1e-3)
    p.add_argument("--t0", type=float, default=0.0)
    p.add_argument("--t1", type=float, default=10.0)
    p.add_argument("--radius", dest="radius_opt", type=float, help="escape radius")
    p.add_argument("--seed", type=int, default=probe.DEFAULT_SEED)
    p.add_argument("--out")
    p.add_argument("--format", choices=("json", "csv"), default="csv")

    p = sub.add_parser("period-scan", help="period function of the separating subsystem")
    p.add_argument("--sigma", type=float)
    p.add_argument("--g-coeffs", type=_coeffs)
    p.add_argument("--amplitudes", type=_floats)
    p.add_argument("--method", choices=METHODS)
    p.add_argument("--step", type=float)
    p.add_argument("--spread-tol", type=float, default=isochrony.DEFAULT_SPREAD_TOL)
    p.add_argument("--out")
    p.add_argument("--format", choices=("json", "csv"), default="json")
    p.set_defaults(func=cmd_period_scan)

    p = sub.add_parser("plot", help="render a figure to SVG with a CSV sidecar")
    p.add_argument("figure", choices=FIGURES)
    p.add_argument("--sigma", type=float)
    p.add_argument("--t0", type=float)
    p.add_argument("--t1", type=float)
    p.add_argument("--tmax", type=float)
    p.add_argument("--step", type=float)
    p.add_argument("--coords", default="q1,q2", help="coordinate pair for the Cherry projection")
    p.add_argument("--out", help="SVG path; the CSV is written next to it")
    p.set_defaults(func=cmd_plot)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        return args.func(args)
    except NumericalFailure as exc:
        sys.stdout.write(json.dumps({"error": type(exc).__name__, "message": str(exc)}, indent=2) + "\n")
        return EXIT_NUMERICAL
    except (UsageError, WeakstabError, ValueError) as exc:
        parser.print_usage(sys.stderr)
        sys.stderr.write(f"weakstab: error: {exc}\n")
        return EXIT_USAGE
    except OSError as exc:
        sys.stderr.write(f"weakstab: error: {exc}\n")
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
