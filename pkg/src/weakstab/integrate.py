"""Fixed-step integration of catalog systems.

The primary scheme is the implicit midpoint rule, which is symplectic for any
Hamiltonian (the L4 and Cherry Hamiltonians are not separable) and preserves
quadratic first integrals exactly. Classical RK4 is kept as a cross-check.
"""

from __future__ import annotations

import io
import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from weakstab.core import HamiltonianSystem, PhaseState
from weakstab.errors import NumericalFailure

IMPLICIT_MIDPOINT = "implicit_midpoint"
EXPLICIT_RK4 = "explicit_rk4"
METHODS = (IMPLICIT_MIDPOINT, EXPLICIT_RK4)

TIME_END = "time_end"
ESCAPE = "escape"
CORRECTOR_FAILURE = "corrector_failure"

# switch from fixed-point to Newton when successive corrections shrink slower than this
CONTRACTION_LIMIT = 0.5


@dataclass(frozen=True)
class IntegratorConfig:
    method: str = IMPLICIT_MIDPOINT
    h: float = 1e-3
    tol: float = 1e-13
    max_iter: int = 50
    escape_radius: float | None = None

    def __post_init__(self):
        if self.method not in METHODS:
            raise ValueError(f"unknown method {self.method!r}; expected one of {METHODS}")
        if not self.h > 0:
            raise ValueError("step h must be positive")
        if not self.tol > 0:
            raise ValueError("corrector tolerance must be positive")
        if self.max_iter < 1:
            raise ValueError("max_iter must be at least 1")
        if self.escape_radius is not None and not self.escape_radius > 0:
            raise ValueError("escape_radius must be positive")


@dataclass(frozen=True)
class Trajectory:
    """Sampled integral curve. ``states`` has one row ``(q, p)`` per time."""

    times: np.ndarray
    states: np.ndarray
    energies: np.ndarray
    terminated_by: str = TIME_END
    escape_time: float | None = None

    @property
    def n(self) -> int:
        return self.states.shape[1] // 2

    def __len__(self):
        return self.times.size

    def state(self, k: int) -> PhaseState:
        return PhaseState.from_array(self.states[k])

    @property
    def final(self) -> np.ndarray:
        return self.states[-1]

    def norms(self, components=None) -> np.ndarray:
        x = self.states if components is None else self.states[:, list(components)]
        return np.linalg.norm(x, axis=1)

    def to_csv(self, fh=None) -> str | None:
        """Write ``t,q1..qn,p1..pn,H`` rows at 17 significant digits.

        Returns the text when ``fh`` is None.
        """
        n = self.n
        header = ",".join(["t"] + [f"q{i + 1}" for i in range(n)] + [f"p{i + 1}" for i in range(n)] + ["H"])
        data = np.column_stack([self.times, self.states, self.energies])
        out = io.StringIO() if fh is None else fh
        np.savetxt(out, data, fmt="%.17g", delimiter=",", header=header, comments="")
        return out.getvalue() if fh is None else None


class CorrectorFailure(NumericalFailure):
    """Implicit-midpoint corrector did not converge within ``max_iter``."""


def _midpoint_step(f, jac, x, h, tol, max_iter, guess=None):
    y = x + h * f(x) if guess is None else guess
    prev = None
    it = 0
    while it < max_iter:
        it += 1
        y_new = x + h * f(0.5 * (x + y))
        d = abs(y_new - y).max()
        y = y_new
        if d <= tol * max(1.0, abs(y).max()):
            return y
        if prev is not None and d > CONTRACTION_LIMIT * prev:
            break
        prev = d
    if jac is None:
        raise CorrectorFailure
    eye = np.eye(x.size)
    while it < max_iter:
        it += 1
        mid = 0.5 * (x + y)
        r = y - x - h * f(mid)
        dy = np.linalg.solve(eye - 0.5 * h * jac(mid), r)
        y = y - dy
        if not np.all(np.isfinite(y)):
            break
        if abs(dy).max() <= tol * max(1.0, abs(y).max()):
            return y
    raise CorrectorFailure


def _rk4_step(f, x, h):
    k1 = f(x)
    k2 = f(x + 0.5 * h * k1)
    k3 = f(x + 0.5 * h * k2)
    k4 = f(x + h * k3)
    return x + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)


class Stepper:
    """One-step map of a scheme for a given field; keeps the midpoint predictor state."""

    def __init__(self, f, jac, cfg: IntegratorConfig, h: float):
        self.f, self.jac, self.cfg, self.h = f, jac, cfg, h
        self._increment = None

    def __call__(self, x: np.ndarray) -> np.ndarray:
        """Advance ``x`` by one step. Raises ``CorrectorFailure`` on non-convergence."""
        if self.cfg.method == EXPLICIT_RK4:
            return _rk4_step(self.f, x, self.h)
        # previous increment as predictor
        guess = None if self._increment is None else x + self._increment
        x_new = _midpoint_step(self.f, self.jac, x, self.h, self.cfg.tol, self.cfg.max_iter, guess)
        self._increment = x_new - x
        return x_new


def make_stepper(sys: HamiltonianSystem, cfg: IntegratorConfig, h: float | None = None, backward: bool = False) -> Stepper:
    if not backward:
        return Stepper(sys.field, sys.jacobian, cfg, cfg.h if h is None else h)

    def f(y):
        return -sys.field(y)

    jac = None if sys.jacobian is None else (lambda y: -sys.jacobian(y))
    return Stepper(f, jac, cfg, cfg.h if h is None else h)


def integrate(sys: HamiltonianSystem, s0, t0: float, t1: float, cfg: IntegratorConfig | None = None) -> Trajectory:
    """Integrate ``sys`` from ``s0`` at ``t0`` to ``t1`` with a fixed step.

    The step is shrunk to ``|t1 - t0| / N`` with ``N = ceil(|t1 - t0| / h)`` so
    that the grid lands on ``t1``. ``t1 < t0`` integrates the time-reversed
    field forward. With ``cfg.escape_radius`` set, integration stops at the
    first state whose Euclidean norm reaches the radius, and the crossing time
    is interpolated linearly in the norm.

    A corrector failure does not raise: the partial trajectory is returned with
    ``terminated_by="corrector_failure"``.
    """
    cfg = cfg or IntegratorConfig()
    x = sys.coerce(s0).copy()
    span = float(t1) - float(t0)
    if span == 0 or not math.isfinite(span):
        raise ValueError("t1 must differ from t0")
    direction = 1.0 if span > 0 else -1.0
    nsteps = max(1, math.ceil(abs(span) / cfg.h - 1e-9))
    h = abs(span) / nsteps

    step = make_stepper(sys, cfg, h, backward=direction < 0)

    states = np.empty((nsteps + 1, x.size))
    states[0] = x
    R = cfg.escape_radius
    terminated = TIME_END
    escape_time = None
    last = nsteps
    prev_norm = float(np.linalg.norm(x))
    if R is not None and prev_norm >= R:
        terminated, escape_time, last = ESCAPE, float(t0), 0
    else:
        for k in range(nsteps):
            try:
                x = step(x)
            except CorrectorFailure:
                terminated, last = CORRECTOR_FAILURE, k
                break
            states[k + 1] = x
            if R is not None:
                nrm = float(np.linalg.norm(x))
                if nrm >= R:
                    frac = (R - prev_norm) / (nrm - prev_norm)
                    escape_time = float(t0) + direction * h * (k + frac)
                    terminated, last = ESCAPE, k + 1
                    break
                prev_norm = nrm
    states = states[: last + 1]
    times = float(t0) + direction * h * np.arange(last + 1)
    if terminated == TIME_END:
        times[-1] = float(t1)
    energies = np.array([sys.hamiltonian(row) for row in states], dtype=float)
    return Trajectory(times, states, energies, terminated, escape_time)


def energy_drift(tr: Trajectory) -> float:
    """Largest deviation of ``H`` from its initial value along ``tr``."""
    if len(tr) == 0:
        raise ValueError("empty trajectory")
    return float(np.max(np.abs(tr.energies - tr.energies[0])))


def first_integral_drift(tr: Trajectory, F: Callable[[np.ndarray], float]) -> float:
    """Largest deviation of ``F(state)`` from its initial value along ``tr``."""
    if len(tr) == 0:
        raise ValueError("empty trajectory")
    values = np.array([F(row) for row in tr.states], dtype=float)
    if not np.all(np.isfinite(values)):
        raise ValueError("first integral is not finite along the trajectory")
    return float(np.max(np.abs(values - values[0])))
