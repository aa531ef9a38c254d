"""Numerical instability witnesses and asymptotic-motion checks.

Three kinds of evidence:

* :func:`instability_probe` starts at shrinking distances from the
  equilibrium and records whether the motion leaves a ball of fixed radius.
* :func:`asymptotic_residual` and :func:`past_decay_check` verify that a
  closed-form curve solves the equations and tends to the equilibrium as
  ``t -> -inf``.
* :func:`certify_no_asymptotic` checks a cascade of first integrals whose
  successive vanishing forces any past-asymptotic motion to be constant.

All of this is numerical evidence on samples and finite time spans, not
proof.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from weakstab.core import INV_SQRT2, HamiltonianSystem, PhaseState
from weakstab.errors import DimensionError, DomainError
from weakstab.integrate import CORRECTOR_FAILURE, ESCAPE, IntegratorConfig, integrate

DEFAULT_RADIUS = 1.0
DEFAULT_EPSILONS = (1 / 2, 1 / 5, 1 / 10, 1 / 100)
DEFAULT_TMAX = 1e4
DEFAULT_PROBE_CONFIG = IntegratorConfig(h=1e-2)
DEFAULT_SEED = 42

# variation-like witness: (a, eps, 0, 0)
WITNESS_AMPLITUDE = 0.4
WITNESS_SEED = 0.1

UNSTABLE_WITNESSED = "UNSTABLE_WITNESSED"
NO_ESCAPE_OBSERVED = "NO_ESCAPE_OBSERVED"
CERTIFIED = "CERTIFIED_NO_ASYMPTOTIC_MOTION"
NOT_CERTIFIED = "NOT_CERTIFIED"
EVIDENCE_NOTE = "numerical evidence on sampled states; not a proof"


@dataclass(frozen=True)
class EpsilonRecord:
    epsilon: float
    initial: PhaseState
    escaped: bool
    escape_time: float | None
    failed: bool = False
    max_norm: float = 0.0
    max_component_norm: float | None = None

    def to_dict(self) -> dict:
        return {
            "epsilon": self.epsilon,
            "initial": self.initial.as_array().tolist(),
            "escaped": self.escaped,
            "escape_time": self.escape_time,
            "failed": self.failed,
            "max_norm": self.max_norm,
            "max_component_norm": self.max_component_norm,
        }


@dataclass(frozen=True)
class ProbeReport:
    system: str
    radius: float
    epsilons: tuple[float, ...]
    records: tuple[EpsilonRecord, ...]
    verdict: str
    t_max: float
    components: tuple[int, ...] | None = None

    @property
    def conclusive(self) -> bool:
        # a finite-time run that never escapes proves nothing
        return self.verdict == UNSTABLE_WITNESSED

    def escape_times(self) -> np.ndarray:
        return np.array([r.escape_time if r.escaped else np.nan for r in self.records])

    def to_dict(self) -> dict:
        return {
            "system": self.system,
            "radius": self.radius,
            "epsilons": list(self.epsilons),
            "t_max": self.t_max,
            "components": None if self.components is None else list(self.components),
            "verdict": self.verdict,
            "conclusive": self.conclusive,
            "records": [r.to_dict() for r in self.records],
        }


def instability_probe(
    sys: HamiltonianSystem,
    direction: Sequence[float] | None,
    R: float = DEFAULT_RADIUS,
    epsilons: Sequence[float] = DEFAULT_EPSILONS,
    t_max: float = DEFAULT_TMAX,
    cfg: IntegratorConfig | None = None,
    *,
    base: Sequence[float] | None = None,
    start: Callable[[float], np.ndarray] | None = None,
    components: Sequence[int] | None = None,
) -> ProbeReport:
    """Shrinking-initial-condition instability witness.

    For each ``eps`` the run starts at ``equilibrium + base + eps * direction``
    (or at ``start(eps)`` when given) and is integrated up to ``t_max`` or
    until the state norm reaches ``R``.

    Args:
        direction: unit vector in phase space; ignored when ``start`` is given.
        components: indices whose partial norm is tracked alongside the full
            norm, e.g. ``(1, 2)`` for ``(q2, p1)``.

    Returns:
        ``UNSTABLE_WITNESSED`` iff every run that did not fail escaped.
    """
    if not R > 0:
        raise ValueError("escape radius must be positive")
    if not t_max > 0:
        raise ValueError("t_max must be positive")
    eps = tuple(float(e) for e in epsilons)
    if not eps or any(not 0 < e < R for e in eps):
        raise ValueError(f"epsilons must lie in (0, {R})")
    eq = sys.equilibrium.as_array()
    if start is None:
        if direction is None:
            raise ValueError("need a direction or a start map")
        d = sys.coerce(direction)
        if abs(np.linalg.norm(d) - 1.0) > 1e-12:
            raise ValueError("direction must be a unit vector")
        offset = np.zeros_like(eq) if base is None else sys.coerce(base)

        def start(e):
            return eq + offset + e * d

    cfg = cfg or DEFAULT_PROBE_CONFIG
    run_cfg = IntegratorConfig(cfg.method, cfg.h, cfg.tol, cfg.max_iter, escape_radius=R)
    comps = None if components is None else tuple(int(c) for c in components)
    records = []
    for e in eps:
        x0 = sys.coerce(start(e))
        tr = integrate(sys, x0, 0.0, t_max, run_cfg)
        failed = tr.terminated_by == CORRECTOR_FAILURE
        escaped = tr.terminated_by == ESCAPE
        records.append(EpsilonRecord(
            e, PhaseState.from_array(x0), escaped, tr.escape_time if escaped else None, failed,
            float(np.max(tr.norms())),
            None if comps is None else float(np.max(tr.norms(comps))),
        ))
    considered = [r for r in records if not r.failed]
    witnessed = bool(considered) and all(r.escaped for r in considered)
    return ProbeReport(sys.name, float(R), eps, tuple(records),
                       UNSTABLE_WITNESSED if witnessed else NO_ESCAPE_OBSERVED, float(t_max), comps)


# --- closed-form motions ------------------------------------------------------

@dataclass(frozen=True)
class ClosedFormMotion:
    """An explicit curve ``t -> state`` with its analytic time derivative.

    The domain is ``[lo, hi]`` with ``hi`` excluded when ``open_right`` is set.
    """

    name: str
    domain: tuple[float, float]
    state_fn: Callable[[float], np.ndarray] = field(repr=False)
    derivative_fn: Callable[[float], np.ndarray] = field(repr=False)
    open_right: bool = False

    def contains(self, t: float) -> bool:
        lo, hi = self.domain
        return lo <= t and (t < hi if self.open_right else t <= hi)

    def _check(self, t):
        if not self.contains(t):
            raise DomainError(f"t={t} outside the domain {self.domain} of {self.name}")

    def state(self, t: float) -> np.ndarray:
        self._check(t)
        return np.asarray(self.state_fn(t), dtype=float)

    def derivative(self, t: float) -> np.ndarray:
        self._check(t)
        return np.asarray(self.derivative_fn(t), dtype=float)


def cherry_motion(sigma: float = 1.0) -> ClosedFormMotion:
    """Asymptotic motion of the Cherry system, defined for ``t < 0``."""
    s = float(sigma)
    if s == 0:
        raise ValueError("the Cherry asymptotic motion needs sigma != 0")
    a = INV_SQRT2 / s
    b = 0.5 / s

    def state(t):
        return np.array([a * math.sin(t) / t, b * math.sin(2 * t) / t, a * math.cos(t) / t, -b * math.cos(2 * t) / t])

    def deriv(t):
        t2 = t * t
        return np.array([
            a * (t * math.cos(t) - math.sin(t)) / t2,
            b * (2 * t * math.cos(2 * t) - math.sin(2 * t)) / t2,
            a * (-t * math.sin(t) - math.cos(t)) / t2,
            b * (2 * t * math.sin(2 * t) + math.cos(2 * t)) / t2,
        ])

    return ClosedFormMotion(f"cherry_asymptotic(sigma={s})", (-math.inf, 0.0), state, deriv, open_right=True)


def l4_motion(m: float = 1.0) -> ClosedFormMotion:
    """Secularly growing L4 solution starting at ``(1/m, 0, 0, 0)``."""
    k = 1.0 / m

    def state(t):
        c, s = math.cos(t * INV_SQRT2), math.sin(t * INV_SQRT2)
        return np.array([k * c, -k * s, -k * t * c, k * t * s])

    def deriv(t):
        c, s = math.cos(t * INV_SQRT2), math.sin(t * INV_SQRT2)
        w = INV_SQRT2
        return np.array([
            -k * w * s,
            -k * w * c,
            -k * c + k * t * w * s,
            k * s + k * t * w * c,
        ])

    return ClosedFormMotion(f"l4_unstable(m={m})", (-math.inf, math.inf), state, deriv)


def free_particle_motion(q0: float = 0.0, m: float = 1.0) -> ClosedFormMotion:
    k = 1.0 / m
    return ClosedFormMotion(
        f"free_particle(q0={q0}, m={m})", (-math.inf, math.inf),
        lambda t: np.array([q0 + k * t, k]), lambda t: np.array([k, 0.0]),
    )


def equilibrium_motion(sys: HamiltonianSystem) -> ClosedFormMotion:
    x = sys.equilibrium.as_array()
    zero = np.zeros_like(x)
    return ClosedFormMotion(f"{sys.name}_equilibrium", (-math.inf, math.inf), lambda t: x.copy(), lambda t: zero.copy())


def asymptotic_residual(sys: HamiltonianSystem, motion: ClosedFormMotion, grid: Sequence[float]) -> float:
    """Max over ``grid`` of ``|motion'(t) - f(motion(t))|``."""
    worst = 0.0
    for t in np.asarray(grid, dtype=float).reshape(-1):
        diff = motion.derivative(float(t)) - sys.field(sys.coerce(motion.state(float(t))))
        worst = max(worst, float(np.linalg.norm(diff)))
    return worst


def decay_profile(motion: ClosedFormMotion, times: Sequence[float]) -> np.ndarray:
    """``|t| * |motion(t)|`` at each time."""
    return np.array([abs(t) * np.linalg.norm(motion.state(float(t))) for t in np.asarray(times, dtype=float)])


def past_decay_check(motion: ClosedFormMotion, times: Sequence[float]) -> float:
    """Max of ``|t| * |motion(t)|`` over negative ``times``; bounded means ``O(1/|t|)`` decay."""
    t = np.asarray(times, dtype=float)
    if np.any(t >= 0):
        raise DomainError("past decay is checked at negative times only")
    return float(np.max(decay_profile(motion, t)))


# --- first-integral cascades --------------------------------------------------

@dataclass(frozen=True)
class CascadeStage:
    """A function that is conserved on the zero locus of earlier stages.

    ``zero_vars`` are the phase-space indices forced to zero once this
    function takes its equilibrium value along a motion.
    """

    name: str
    function: Callable[[np.ndarray], float] = field(repr=False)
    zero_vars: tuple[int, ...] = ()
    gradient: Callable[[np.ndarray], np.ndarray] | None = field(default=None, repr=False)


@dataclass(frozen=True)
class StageResult:
    name: str
    pinned: tuple[int, ...]
    max_violation: float | None
    validated: bool

    def to_dict(self) -> dict:
        return {"name": self.name, "pinned": list(self.pinned), "max_violation": self.max_violation,
                "validated": self.validated}


@dataclass(frozen=True)
class CascadeCertificate:
    system: str
    stages: tuple[StageResult, ...]
    positivity_validated: bool
    min_sum: float
    verdict: str
    sample_count: int
    tol: float
    seed: int
    radius: float
    note: str = EVIDENCE_NOTE

    def to_dict(self) -> dict:
        return {
            "system": self.system,
            "verdict": self.verdict,
            "stages": [s.to_dict() for s in self.stages],
            "positivity": {"validated": self.positivity_validated, "min_sum": self.min_sum},
            "sample_count": self.sample_count,
            "tol": self.tol,
            "seed": self.seed,
            "radius": self.radius,
            "note": self.note,
        }


def _fd_gradient(F, x, step=1e-5):
    g = np.empty_like(x)
    for i in range(x.size):
        e = np.zeros_like(x)
        e[i] = step
        g[i] = (F(x + e) - F(x - e)) / (2 * step)
    return g


def _ball_samples(rng, count, dim, radius):
    v = rng.normal(size=(count, dim))
    v /= np.linalg.norm(v, axis=1)[:, None]
    return v * (radius * rng.random(count) ** (1.0 / dim))[:, None]


def certify_no_asymptotic(
    sys: HamiltonianSystem,
    cascade: Sequence[CascadeStage],
    sample_count: int = 1000,
    tol: float = 1e-9,
    seed: int = DEFAULT_SEED,
    radius: float = 0.1,
) -> CascadeCertificate:
    """Check a first-integral cascade on random samples near the equilibrium.

    Stage ``j`` must satisfy ``grad F_j . f = 0`` (within ``tol``) at samples
    where the ``zero_vars`` of stages ``1..j-1`` are pinned to zero; a stage
    is only examined if all earlier ones passed. Finally ``sum F_j`` must be
    positive at every nonzero sample of the ball, so that the cascade can only
    vanish at the equilibrium.
    """
    if not cascade:
        raise ValueError("empty cascade")
    if sample_count < 100:
        raise ValueError("sample_count must be at least 100")
    d = sys.dim
    for st in cascade:
        if any(not 0 <= i < d for i in st.zero_vars):
            raise DimensionError(f"stage {st.name!r} pins indices outside 0..{d - 1}")
    eq = sys.equilibrium.as_array()
    rng = np.random.default_rng(seed)

    results = []
    pinned: tuple[int, ...] = ()
    ok = True
    for st in cascade:
        if not ok:
            results.append(StageResult(st.name, pinned, None, False))
            continue
        pts = _ball_samples(rng, sample_count, d, radius)
        pts[:, list(pinned)] = 0.0
        worst = 0.0
        for off in pts:
            x = eq + off
            grad = st.gradient(x) if st.gradient is not None else _fd_gradient(st.function, x)
            worst = max(worst, abs(float(grad @ sys.field(x))))
        ok = worst <= tol
        results.append(StageResult(st.name, pinned, worst, ok))
        pinned = tuple(sorted(set(pinned) | set(st.zero_vars)))

    pts = _ball_samples(rng, sample_count, d, radius)
    base = sum(float(st.function(eq)) for st in cascade)
    sums = np.array([sum(float(st.function(eq + off)) for st in cascade) - base for off in pts
                     if np.any(off != 0)])
    min_sum = float(np.min(sums))
    positive = bool(min_sum > 0)
    verdict = CERTIFIED if ok and positive else NOT_CERTIFIED
    return CascadeCertificate(sys.name, tuple(results), positive, min_sum, verdict, sample_count, tol, seed, radius)


def default_cascade(sys: HamiltonianSystem) -> list[CascadeStage] | None:
    """The restriction argument for each catalog system (Cherry gets ``[H]``, which fails)."""
    if sys.name == "free_particle":
        return [
            CascadeStage("p^2", lambda x: x[1] ** 2, (1,)),
            CascadeStage("q^2 on {p=0}", lambda x: x[0] ** 2, (0,)),
        ]
    if sys.name == "l4_linear":
        return [
            CascadeStage("|q|^2", lambda x: x[0] ** 2 + x[1] ** 2, (0, 1)),
            CascadeStage("|p|^2 on {q=0}", lambda x: x[2] ** 2 + x[3] ** 2, (2, 3)),
        ]
    if sys.name == "variation_like":
        g = sys.g
        c1 = float(g.coefficients[0])
        return [
            CascadeStage("p2^2/2 + G(q1)", lambda x: 0.5 * x[3] ** 2 + float(g.antiderivative(x[0])), (0, 3)),
            CascadeStage("p1^2/2 + g'(0) q2^2/2 on {q1=p2=0}", lambda x: 0.5 * x[2] ** 2 + 0.5 * c1 * x[1] ** 2, (1, 2)),
        ]
    if sys.name == "cherry":
        return [CascadeStage("H", sys.hamiltonian, ())]
    return None


def default_witness(sys: HamiltonianSystem) -> dict | None:
    """Keyword arguments for :func:`instability_probe` for a catalog system.

    Cherry starts on its asymptotic motion at distance ``eps``; variation-like
    starts at ``(a, eps, 0, 0)`` with ``a`` inside the oscillation range, since
    with ``a = 0`` the ``(q2, p1)`` pair is a plain harmonic oscillator.
    """
    if sys.name == "free_particle":
        return {"direction": (0.0, 1.0)}
    if sys.name == "l4_linear":
        return {"direction": (1.0, 0.0, 0.0, 0.0)}
    if sys.name == "cherry":
        sigma = sys.params["sigma"]
        if sigma == 0:
            return None
        motion = cherry_motion(sigma)

        def start(e):
            return motion.state(-math.sqrt(3.0) / (2.0 * abs(sigma) * e))

        return {"direction": None, "start": start}
    if sys.name == "variation_like":
        return {"direction": (0.0, 1.0, 0.0, 0.0), "base": (witness_amplitude(sys), 0.0, 0.0, 0.0),
                "components": (1, 2)}
    return None


def witness_amplitude(sys: HamiltonianSystem) -> float:
    """``q1`` offset of the variation-like witness, kept at 80% of the closed-orbit range."""
    from weakstab.isochrony import oscillation_range

    rng = oscillation_range(sys.g)
    a = WITNESS_AMPLITUDE
    while not (a < 0.8 * rng.right_limit and float(sys.g.antiderivative(a)) < 0.8 * rng.energy_cap):
        a *= 0.9
    return a


def witness_state(sys: HamiltonianSystem) -> np.ndarray:
    """Default variation-like witness state ``(a, 0.1, 0, 0)``."""
    return np.array([witness_amplitude(sys), WITNESS_SEED, 0.0, 0.0])
