"""Acceptance suite: one test per criterion, each printing a PASS/FAIL line.

Run through pytest or directly (``python tests/test_acceptance.py``); in
both cases the criterion lines are repeated in the terminal summary.
"""

import json
import math
from fractions import Fraction

import numpy as np

from weakstab import analysis, cli, isochrony, linalg, probe
from weakstab.core import GFunction, catalog_build
from weakstab.integrate import EXPLICIT_RK4, IMPLICIT_MIDPOINT, IntegratorConfig, first_integral_drift, integrate
from weakstab.plotting import variation_run

RESULTS: dict[int, str] = {}
R2 = math.sqrt(2.0)


def record(n: int, title: str, ok: bool, detail: str) -> None:
    line = f"criterion {n:2d} {'PASS' if ok else 'FAIL'}: {title} [{detail}]"
    RESULTS[n] = line
    print(line)
    assert ok, line


def _spectrum(name, params=None):
    sys = catalog_build(name, params)
    return linalg.eigenstructure(linalg.jacobian_at(sys, sys.equilibrium))


def test_criterion_01_l4_eigenstructure():
    spec = _spectrum("l4_linear")
    vals = sorted(spec.eigenvalues, key=lambda e: e.value.imag)
    err = max(abs(e.value - w) for e, w in zip(vals, (-1j / R2, 1j / R2)))
    structure = [(e.algebraic_multiplicity, e.geometric_multiplicity, e.jordan_block_sizes) for e in vals]
    ok = len(vals) == 2 and err < 1e-9 and structure == [(2, 1, (2,))] * 2
    record(1, "L4 eigenstructure", ok, f"error {err:.2e}, (alg, geo, blocks) {structure}")


def test_criterion_02_cherry_spectrum():
    spec = _spectrum("cherry", {"sigma": 1.0})
    vals = sorted(spec.values(), key=lambda z: z.imag)
    err = max(abs(z - w) for z, w in zip(vals, (-2j, -1j, 1j, 2j))) if len(vals) == 4 else math.inf
    simple = all(e.algebraic_multiplicity == 1 for e in spec.eigenvalues) and len(spec.eigenvalues) == 4
    c = linalg.classify(spec)
    ok = err < 1e-10 and simple and c.verdict == linalg.Verdict.LINEARLY_STABLE and c.nonlinear_inconclusive
    record(2, "Cherry linear spectrum", ok, f"error {err:.2e}, {c.verdict.value}, inconclusive={c.nonlinear_inconclusive}")


def test_criterion_03_closed_form_tracking():
    l4 = catalog_build("l4_linear")
    tr = integrate(l4, [1.0, 0.0, 0.0, 0.0], 0.0, 20.0, IntegratorConfig(IMPLICIT_MIDPOINT, 1e-3))
    exact = probe.l4_motion(1.0)
    err = max(float(np.max(np.abs(s - exact.state(t)))) for t, s in zip(tr.times, tr.states))
    drift = first_integral_drift(tr, lambda x: x[0] ** 2 + x[1] ** 2)
    ok = err < 1e-5 and drift < 1e-10
    record(3, "L4 closed-form tracking (midpoint, h=1e-3)", ok, f"max error {err:.3e}, |q|^2 drift {drift:.1e}")


def test_criterion_04_cherry_asymptotic_motion():
    cherry = catalog_build("cherry", {"sigma": 1.0})
    phi = probe.cherry_motion(1.0)
    residual = probe.asymptotic_residual(cherry, phi, np.linspace(-100.0, -1.0, 1000))
    times = -np.logspace(0, 6, 500)
    profile = probe.decay_profile(phi, times)
    top = probe.past_decay_check(phi, times)
    spread = float(np.max(np.abs(profile - math.sqrt(3.0) / 2.0)))
    ok = residual < 1e-9 and abs(top - math.sqrt(3.0) / 2.0) < 1e-12 and spread < 1e-12
    record(4, "Cherry asymptotic motion", ok, f"residual {residual:.1e}, |t||phi| - sqrt(3)/2 within {spread:.1e}")


def test_criterion_05_escape_time_law():
    worst = 0.0
    for name, direction in (("free_particle", (0.0, 1.0)), ("l4_linear", (1.0, 0.0, 0.0, 0.0))):
        ms = (2, 5, 10, 100)
        rep = probe.instability_probe(catalog_build(name), direction, R=1.0, epsilons=[1 / m for m in ms])
        for m, t in zip(ms, rep.escape_times()):
            worst = max(worst, abs(t - math.sqrt(m * m - 1)) / math.sqrt(m * m - 1))
    record(5, "Escape-time law sqrt(m^2-1)", worst < 0.05, f"worst relative error {worst:.2e}")


def test_criterion_06_isochrony_residual():
    r = [isochrony.isochrony_condition_residual(GFunction(c)) for c in ((1, 1), (1,), (1, 1, "10/9"))]
    ok = r == [Fraction(-20, 3), 0, 0] and all(isinstance(x, Fraction) for x in r)
    record(6, "Isochrony residual", ok, ", ".join(str(x) for x in r))


def test_criterion_07_anisochrony():
    quad = isochrony.period_scan(GFunction((1, 1)), [0.1, 0.2, 0.3])
    lin = isochrony.period_scan(GFunction((1,)), [0.1, 0.2, 0.3])
    lin_err = float(np.max(np.abs(lin.periods - 2 * math.pi)))
    ok = quad.max_oracle_gap < 1e-6 and quad.max_spread > 1e-3 and lin_err < 1e-8
    record(7, "Anisochrony measured", ok,
           f"oracle gap {quad.max_oracle_gap:.1e}, spread {quad.max_spread:.3e}, g=x error {lin_err:.1e}")


def _analyze(argv, capsys):
    assert cli.main(["analyze", *argv]) == 0
    return json.loads(capsys.readouterr().out)


def test_criterion_08_taxonomy(capsys):
    l4 = _analyze(["l4_linear"], capsys)
    var = _analyze(["variation_like", "--sigma", "1"], capsys)
    ch = _analyze(["cherry", "--sigma", "1"], capsys)
    verdicts = [l4["composite_verdict"], var["composite_verdict"], ch["composite_verdict"]]
    certs = [l4["certificate"]["verdict"], var["certificate"]["verdict"], ch["certificate"]["verdict"]]
    ok = (verdicts == ["WEAKLY_UNSTABLE", "WEAKLY_UNSTABLE", "UNSTABLE_WITH_ASYMPTOTIC_MOTION"]
          and certs == [probe.CERTIFIED, probe.CERTIFIED, probe.NOT_CERTIFIED])
    record(8, "Weak-instability taxonomy", ok, f"{verdicts}, {certs}")


def test_criterion_09_unbounded_orbit():
    tr = variation_run(1.0, 200.0)
    transverse = tr.norms((1, 2))
    sub = tr.norms((0, 3))
    growth = float(transverse.max() / transverse[0])
    band = float(sub.max() / sub[0])
    ok = growth > 10.0 and band <= 2.0
    record(9, "Unbounded variation-like orbit", ok, f"(q2,p1) growth {growth:.1f}x, (q1,p2) band {band:.3f}x")


def test_criterion_10_transform_identity():
    chk = isochrony.transform_check(1.0, samples=1000)
    ok = chk.mismatch < 1e-14 and chk.symplectic_exact
    record(10, "Transform identity", ok, f"mismatch {chk.mismatch:.1e}, M^T J M = J exactly: {chk.symplectic_exact}")


def _rates(method):
    l4 = catalog_build("l4_linear")
    exact = probe.l4_motion(1.0)
    errs = []
    for h in (1e-2, 5e-3, 2.5e-3):
        tr = integrate(l4, [1.0, 0.0, 0.0, 0.0], 0.0, 10.0, IntegratorConfig(method, h))
        errs.append(max(float(np.max(np.abs(s - exact.state(t)))) for t, s in zip(tr.times, tr.states)))
    return [math.log2(a / b) for a, b in zip(errs, errs[1:])]


def test_criterion_11_integrator_orders():
    mid, rk4 = _rates(IMPLICIT_MIDPOINT), _rates(EXPLICIT_RK4)
    ok = all(abs(r - 2.0) <= 0.2 for r in mid) and all(abs(r - 4.0) <= 0.3 for r in rk4)
    record(11, "Integrator orders", ok,
           f"midpoint {', '.join(f'{r:.3f}' for r in mid)}; rk4 {', '.join(f'{r:.3f}' for r in rk4)}")


if __name__ == "__main__":
    import sys

    import pytest

    sys.exit(pytest.main([__file__, "-q", "--no-header", "-p", "no:cacheprovider"]))
