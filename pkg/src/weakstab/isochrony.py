"""Period function of the planar subsystem ``q1' = p2, p2' = -g(q1)``.

The variation-like equilibrium is stable exactly when this centre is
isochronous. Periods are measured as first-return times to the section
``{p2 = 0, q1 > 0}`` and cross-checked against the period integral

    T(a) = sqrt(2) * integral over [q_-, a] of dq / sqrt(G(a) - G(q)),

where ``q_- < 0`` is the left turning point. Writing
``G(a) - G(q) = (a - q)(q - q_-) R(q)`` and ``q = c + r sin(theta)`` removes
both endpoint singularities, leaving ``sqrt(2) * integral of
dtheta / sqrt(R)`` over ``[-pi/2, pi/2]``. That integrand extends to a smooth
periodic function, so the trapezoid rule with step halving converges
geometrically.
"""

from __future__ import annotations

import enum
import io
import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np
from scipy.optimize import brentq

from weakstab.core import GFunction, subsystem
from weakstab.errors import NumericalFailure, OscillationRangeError
from weakstab.integrate import EXPLICIT_RK4, IntegratorConfig, make_stepper

SCAN_HALF_WIDTH = 2.0
SCAN_RESOLUTION = 1e-3
DEFAULT_SPREAD_TOL = 1e-6
# RK4 at this step resolves a period to ~1e-13; the midpoint rule would need h ~ 1e-5 for 1e-8
DEFAULT_PERIOD_CONFIG = IntegratorConfig(method=EXPLICIT_RK4, h=1e-3)
RETURN_CAP_PERIODS = 10.0


@dataclass(frozen=True)
class OscillationRange:
    """Where closed orbits around the centre at 0 live.

    ``left_critical``/``right_critical`` are the nearest nonzero critical
    points of ``G`` (zeros of ``g``) within the scan window, or ``None``.
    Orbits exist for energies below ``energy_cap``.
    """

    left_critical: float | None
    right_critical: float | None
    energy_cap: float
    left_limit: float
    right_limit: float

    def contains(self, g: GFunction, a: float) -> bool:
        return 0.0 < a < self.right_limit and float(g.antiderivative(a)) < self.energy_cap


def _first_sign_change(g: GFunction, xs: np.ndarray, sign: float) -> float | None:
    vals = g(xs)
    bad = np.flatnonzero(sign * vals <= 0)
    if bad.size == 0:
        return None
    k = int(bad[0])
    if vals[k] == 0 or k == 0:
        return float(xs[k])
    return float(brentq(g, xs[k - 1], xs[k], xtol=1e-15, rtol=4 * np.finfo(float).eps))


def oscillation_range(g: GFunction) -> OscillationRange:
    """Scan ``g`` on ``[-2, 2]`` at resolution ``1e-3`` for the nearest critical points of ``G``."""
    n = int(round(SCAN_HALF_WIDTH / SCAN_RESOLUTION))
    steps = SCAN_RESOLUTION * np.arange(1, n + 1)
    right = _first_sign_change(g, steps, 1.0)
    left = _first_sign_change(g, -steps, -1.0)
    right_limit = SCAN_HALF_WIDTH if right is None else right
    left_limit = -SCAN_HALF_WIDTH if left is None else left
    cap = min(float(g.antiderivative(right_limit)), float(g.antiderivative(left_limit)))
    return OscillationRange(left, right, cap, left_limit, right_limit)


def _check_amplitude(g: GFunction, a: float, rng: OscillationRange | None = None) -> OscillationRange:
    rng = rng or oscillation_range(g)
    if not rng.contains(g, a):
        raise OscillationRangeError(
            f"amplitude {a} is outside the oscillation range (0, {rng.right_limit}) "
            f"with energy cap {rng.energy_cap}"
        )
    return rng


def left_turning_point(g: GFunction, a: float, rng: OscillationRange | None = None) -> float:
    """The ``q < 0`` with ``G(q) = G(a)`` on the orbit through ``(a, 0)``."""
    rng = _check_amplitude(g, a, rng)
    level = float(g.antiderivative(a))

    def F(q):
        return float(g.antiderivative(q)) - level

    q = brentq(F, rng.left_limit, 0.0, xtol=1e-16, rtol=4 * np.finfo(float).eps)
    for _ in range(3):
        d = float(g(q))
        if d == 0:
            break
        q -= F(q) / d
    return float(q)


def period_quadrature(g: GFunction, a: float, rtol: float = 1e-14, max_points: int = 1 << 16) -> float:
    """Period of the orbit through ``(a, 0)`` from the period integral (oracle)."""
    qm = left_turning_point(g, a)
    P = np.polynomial.polynomial
    G = P.polyint(g.power_coefficients)
    level = P.polyval(a, G)
    num = -G
    num[0] += level
    den = np.array([-a * qm, a + qm, -1.0])  # (a - x)(x - qm)
    R, _ = P.polydiv(num, den)
    c, r = 0.5 * (a + qm), 0.5 * (a - qm)

    def mean_over_period(n):
        theta = 2.0 * np.pi * np.arange(n) / n
        vals = P.polyval(c + r * np.sin(theta), R)
        if np.any(vals <= 0):
            raise NumericalFailure("period integrand lost positivity")
        return float(np.mean(1.0 / np.sqrt(vals)))

    n = 16
    prev = mean_over_period(n)
    while n < max_points:
        n *= 2
        cur = mean_over_period(n)
        if abs(cur - prev) <= rtol * abs(cur):
            return math.sqrt(2.0) * math.pi * cur
        prev = cur
    raise NumericalFailure(f"period quadrature did not converge for a={a}")


def _hermite_root(t0, t1, y0, y1, d0, d1) -> float:
    """Root of the cubic Hermite interpolant on ``[t0, t1]``; requires ``y0 > 0 >= y1``."""
    h = t1 - t0

    def H(s):
        s2, s3 = s * s, s * s * s
        return (2 * s3 - 3 * s2 + 1) * y0 + (s3 - 2 * s2 + s) * h * d0 + (-2 * s3 + 3 * s2) * y1 + (s3 - s2) * h * d1

    def dH(s):
        s2 = s * s
        return ((6 * s2 - 6 * s) * y0 + (3 * s2 - 4 * s + 1) * h * d0 + (-6 * s2 + 6 * s) * y1 + (3 * s2 - 2 * s) * h * d1)

    lo, hi = 0.0, 1.0
    for _ in range(30):
        mid = 0.5 * (lo + hi)
        if H(mid) > 0:
            lo = mid
        else:
            hi = mid
    s = 0.5 * (lo + hi)
    for _ in range(4):
        dv = dH(s)
        if dv == 0:
            break
        s_new = s - H(s) / dv
        if not lo - 1e-12 <= s_new <= hi + 1e-12:
            break
        s = s_new
    return t0 + s * h


def return_period(g: GFunction, a: float, cfg: IntegratorConfig | None = None) -> float:
    """First-return time of ``(a, 0)`` to ``{p2 = 0, q1 > 0}``."""
    cfg = cfg or DEFAULT_PERIOD_CONFIG
    _check_amplitude(g, a)
    sub = subsystem(g)
    step = make_stepper(sub, cfg)
    cap = RETURN_CAP_PERIODS * 2.0 * math.pi / math.sqrt(float(g.coefficients[0]))
    x = np.array([a, 0.0])
    t = 0.0
    k = 0
    while t < cap:
        x_new = step(x)
        k += 1
        t_new = k * cfg.h
        if x[1] > 0 >= x_new[1] and x_new[0] > 0:
            return _hermite_root(t, t_new, x[1], x_new[1], -float(g(x[0])), -float(g(x_new[0])))
        x, t = x_new, t_new
    raise NumericalFailure(f"no return to the section within {cap:.6g} for amplitude {a}")


@dataclass(frozen=True)
class PeriodTable:
    amplitudes: np.ndarray
    periods: np.ndarray
    oracle_periods: np.ndarray
    method: str
    failures: dict = field(default_factory=dict)

    @property
    def max_spread(self) -> float:
        return float(np.ptp(self.periods)) if self.periods.size else 0.0

    @property
    def max_oracle_gap(self) -> float:
        return float(np.max(np.abs(self.periods - self.oracle_periods))) if self.periods.size else 0.0

    def to_csv(self) -> str:
        out = io.StringIO()
        out.write("amplitude,period,method\n")
        for a, T, Tq in zip(self.amplitudes, self.periods, self.oracle_periods):
            out.write(f"{a:.17g},{T:.17g},{self.method}\n")
            out.write(f"{a:.17g},{Tq:.17g},quadrature\n")
        return out.getvalue()

    def to_dict(self) -> dict:
        return {
            "amplitudes": self.amplitudes.tolist(),
            "periods": self.periods.tolist(),
            "quadrature_periods": self.oracle_periods.tolist(),
            "method": self.method,
            "max_spread": self.max_spread,
            "max_oracle_gap": self.max_oracle_gap,
            "failures": {str(k): v for k, v in self.failures.items()},
        }


def period_scan(g: GFunction, amplitudes, cfg: IntegratorConfig | None = None) -> PeriodTable:
    """Return-time periods for each amplitude, with the quadrature oracle alongside.

    Amplitudes outside the oscillation range raise; a non-return within ten
    harmonic periods is recorded in ``failures`` and the amplitude dropped.
    """
    cfg = cfg or DEFAULT_PERIOD_CONFIG
    amps = np.asarray(amplitudes, dtype=float).reshape(-1)
    if amps.size == 0:
        raise ValueError("no amplitudes given")
    if np.any(np.diff(amps) <= 0):
        raise ValueError("amplitudes must be strictly increasing")
    rng = oscillation_range(g)
    for a in amps:
        _check_amplitude(g, float(a), rng)
    kept, periods, oracle, failures = [], [], [], {}
    for a in amps:
        try:
            T = return_period(g, float(a), cfg)
        except NumericalFailure as exc:
            failures[float(a)] = str(exc)
            continue
        kept.append(float(a))
        periods.append(T)
        oracle.append(period_quadrature(g, float(a)))
    return PeriodTable(np.array(kept), np.array(periods), np.array(oracle), f"return_time/{cfg.method}", failures)


def isochrony_condition_residual(g: GFunction) -> Fraction:
    """``g'''(0) - 5 g''(0)**2 / (3 g'(0))`` in exact rational arithmetic.

    Zero is necessary for an isochronous centre; a nonzero value rules it out.
    """
    d1, d2, d3 = (g.derivative_at_zero(k) for k in (1, 2, 3))
    return d3 - Fraction(5) * d2 * d2 / (3 * d1)


class IsochronyVerdict(str, enum.Enum):
    UNSTABLE = "UNSTABLE"
    ISOCHRONOUS_WITHIN_TOLERANCE = "ISOCHRONOUS_WITHIN_TOLERANCE"


@dataclass(frozen=True)
class StabilityVerdict:
    verdict: IsochronyVerdict
    residual: Fraction
    max_spread: float
    spread_tol: float
    reason: str

    def to_dict(self) -> dict:
        return {
            "verdict": self.verdict.value,
            "residual": str(self.residual),
            "residual_float": float(self.residual),
            "max_spread": self.max_spread,
            "spread_tol": self.spread_tol,
            "reason": self.reason,
        }


def stability_verdict(g: GFunction, scan: PeriodTable, spread_tol: float = DEFAULT_SPREAD_TOL) -> StabilityVerdict:
    if scan.periods.size == 0:
        raise ValueError("empty period table")
    res = isochrony_condition_residual(g)
    spread = scan.max_spread
    if res != 0:
        return StabilityVerdict(IsochronyVerdict.UNSTABLE, res, spread, spread_tol,
                                "necessary isochrony condition on g'''(0) violated")
    if spread > spread_tol:
        return StabilityVerdict(IsochronyVerdict.UNSTABLE, res, spread, spread_tol,
                                "condition on g'''(0) holds but the measured period varies")
    return StabilityVerdict(IsochronyVerdict.ISOCHRONOUS_WITHIN_TOLERANCE, res, spread, spread_tol,
                            "periods agree within tolerance; stability suggested, not proven")


# canonical change of variables (Q, P) -> (q, p), scaled by sqrt(2)
_K = ((1, 1, 0, 0), (1, -1, 0, 0), (0, 0, 1, 1), (0, 0, 1, -1))
_J = ((0, 0, 1, 0), (0, 0, 0, 1), (-1, 0, 0, 0), (0, -1, 0, 0))


def _int_matmul(A, B):
    return tuple(tuple(sum(A[i][k] * B[k][j] for k in range(4)) for j in range(4)) for i in range(4))


def _transpose(A):
    return tuple(tuple(A[j][i] for j in range(4)) for i in range(4))


def symplectic_defect() -> tuple[tuple[Fraction, ...], ...]:
    """``M^T J M - J`` in exact arithmetic, with ``M = K / sqrt(2)`` so ``M^T J M = K^T J K / 2``."""
    KtJK = _int_matmul(_int_matmul(_transpose(_K), _J), _K)
    return tuple(tuple(Fraction(KtJK[i][j], 2) - _J[i][j] for j in range(4)) for i in range(4))


@dataclass(frozen=True)
class TransformCheck:
    mismatch: float
    symplectic_exact: bool
    samples: int
    seed: int

    def to_dict(self) -> dict:
        return {"mismatch": self.mismatch, "symplectic_exact": self.symplectic_exact,
                "samples": self.samples, "seed": self.seed}


def transform_check(sigma: float, samples: int = 1000, seed: int = 42) -> TransformCheck:
    """Compare ``H(T(Q, P))`` for ``H = p1 p2 + q1 q2 + sigma q1**2 q2`` with the Cherry-like target form."""
    if samples < 100:
        raise ValueError("need at least 100 samples")
    rng = np.random.default_rng(seed)
    v = rng.normal(size=(samples, 4))
    v *= (rng.random(samples) ** 0.25 / np.linalg.norm(v, axis=1))[:, None]
    Q1, Q2, P1, P2 = v.T
    s2 = math.sqrt(2.0)
    q1, q2, p1, p2 = (Q1 + Q2) / s2, (Q1 - Q2) / s2, (P1 + P2) / s2, (P1 - P2) / s2
    lhs = p1 * p2 + q1 * q2 + sigma * q1 * q1 * q2
    rhs = 0.5 * (Q1**2 + P1**2) - 0.5 * (Q2**2 + P2**2) + sigma / (2.0 * s2) * (Q1 + Q2) * (Q1**2 - Q2**2)
    exact = all(x == 0 for row in symplectic_defect() for x in row)
    return TransformCheck(float(np.max(np.abs(lhs - rhs))), exact, samples, seed)
