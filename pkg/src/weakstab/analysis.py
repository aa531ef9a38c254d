"""Composite stability verdict for a catalog system.

The verdict combines the evidence gathered by the other modules:

* a closed-form motion that solves the equations and decays to the
  equilibrium in the past, or a linearization with an eigenvalue of positive
  real part, gives ``UNSTABLE_WITH_ASYMPTOTIC_MOTION``;
* an observed escape plus a certified first-integral cascade (no asymptotic
  motions) gives ``WEAKLY_UNSTABLE``;
* an observed escape with only a linear secular-growth explanation gives
  ``LINEARLY_UNSTABLE``;
* an escape with none of the above is ``UNSTABLE_UNCLASSIFIED``;
* no escape within the time cap is ``STABLE_SUGGESTED``.

Every report carries the individual checks so the composition can be audited.
"""

from __future__ import annotations

import enum

import numpy as np

from weakstab import isochrony, linalg, probe
from weakstab.core import HamiltonianSystem
from weakstab.integrate import IntegratorConfig

RESIDUAL_PASS = 1e-9
DEFAULT_SCAN_AMPLITUDES = (0.05, 0.1, 0.2)


class Composite(str, enum.Enum):
    STABLE_SUGGESTED = "STABLE_SUGGESTED"
    WEAKLY_UNSTABLE = "WEAKLY_UNSTABLE"
    UNSTABLE_WITH_ASYMPTOTIC_MOTION = "UNSTABLE_WITH_ASYMPTOTIC_MOTION"
    LINEARLY_UNSTABLE = "LINEARLY_UNSTABLE"
    UNSTABLE_UNCLASSIFIED = "UNSTABLE_UNCLASSIFIED"


def _asymptotic_motion_evidence(sys: HamiltonianSystem) -> dict | None:
    if sys.name != "cherry" or sys.params["sigma"] == 0:
        return None
    motion = probe.cherry_motion(sys.params["sigma"])
    grid = np.linspace(-100.0, -1.0, 1000)
    residual = probe.asymptotic_residual(sys, motion, grid)
    far = -np.logspace(0, 6, 200)
    profile = probe.decay_profile(motion, far)
    bounded = bool(np.all(np.isfinite(profile)) and profile.max() <= 10.0 * profile[0])
    return {
        "motion": motion.name,
        "residual": residual,
        "decay_max": float(profile.max()),
        "decay_min": float(profile.min()),
        "decays": bounded,
        "passed": bool(residual < RESIDUAL_PASS and bounded),
    }


def composite_verdict(classification: linalg.SpectralClassification, asymptotic: dict | None,
                      probe_report: probe.ProbeReport | None,
                      certificate: probe.CascadeCertificate | None) -> Composite:
    if asymptotic is not None and asymptotic["passed"]:
        return Composite.UNSTABLE_WITH_ASYMPTOTIC_MOTION
    if classification.has_positive_real_part:
        return Composite.UNSTABLE_WITH_ASYMPTOTIC_MOTION
    escaped = probe_report is not None and probe_report.verdict == probe.UNSTABLE_WITNESSED
    if not escaped:
        return Composite.STABLE_SUGGESTED
    if certificate is not None and certificate.verdict == probe.CERTIFIED:
        return Composite.WEAKLY_UNSTABLE
    if classification.imaginary_with_nontrivial_jordan:
        return Composite.LINEARLY_UNSTABLE
    return Composite.UNSTABLE_UNCLASSIFIED


def analyze_system(
    sys: HamiltonianSystem,
    *,
    radius: float = probe.DEFAULT_RADIUS,
    epsilons=probe.DEFAULT_EPSILONS,
    t_max: float = probe.DEFAULT_TMAX,
    cfg: IntegratorConfig | None = None,
    seed: int = probe.DEFAULT_SEED,
    amplitudes=DEFAULT_SCAN_AMPLITUDES,
) -> dict:
    """Run every applicable check on ``sys`` and return a JSON-ready report."""
    A = linalg.jacobian_at(sys, sys.equilibrium)
    spectrum = linalg.eigenstructure(A)
    classification = linalg.classify(spectrum)

    asymptotic = _asymptotic_motion_evidence(sys)

    witness = probe.default_witness(sys)
    report = None
    if witness is not None:
        report = probe.instability_probe(sys, R=radius, epsilons=epsilons, t_max=t_max, cfg=cfg, **witness)

    cascade = probe.default_cascade(sys)
    certificate = probe.certify_no_asymptotic(sys, cascade, seed=seed) if cascade else None

    out = {
        "system": sys.to_record(),
        "spectrum": spectrum.to_dict(),
        "classification": classification.to_dict(),
        "asymptotic_motion": asymptotic,
        "probe": None if report is None else report.to_dict(),
        "certificate": None if certificate is None else certificate.to_dict(),
    }
    if sys.name == "variation_like":
        rng = isochrony.oscillation_range(sys.g)
        amps = [a for a in amplitudes if rng.contains(sys.g, a)]
        iso = {"residual": str(isochrony.isochrony_condition_residual(sys.g))}
        if amps:
            scan = isochrony.period_scan(sys.g, amps)
            iso["scan"] = scan.to_dict()
            iso["verdict"] = isochrony.stability_verdict(sys.g, scan).to_dict()
        out["isochrony"] = iso
    out["composite_verdict"] = composite_verdict(classification, asymptotic, report, certificate).value
    out["note"] = probe.EVIDENCE_NOTE
    return out
