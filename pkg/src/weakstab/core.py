"""Phase-space types and the catalog of example Hamiltonian systems.

States are stored as ``x = (q_1, ..., q_n, p_1, ..., p_n)``. Every system in
the catalog carries its Hamiltonian, the gradient, the canonical field
``(dH/dp, -dH/dq)`` written out in closed form, and an analytic Jacobian of
that field.

Catalog families:

* ``free_particle``: ``H = p**2 / 2`` with ``n = 1``. Every point ``(q0, 0)``
  is an equilibrium; the origin is stored as the representative one.
* ``l4_linear``: quadratic part of the planar restricted three-body problem at
  the equilateral point for the critical Routh mass ratio.
* ``cherry``: Cherry's cubic Hamiltonian with coupling ``sigma``.
* ``variation_like``: ``H = p1 p2 + g(q1) q2`` for a polynomial ``g`` with
  ``g(0) = 0`` and ``g'(0) > 0``.
"""

from __future__ import annotations

import math
import dataclasses
from dataclasses import dataclass
from fractions import Fraction
from typing import Any, Callable, Mapping, Sequence

import numpy as np

from weakstab.errors import CatalogError, DimensionError

SQRT2 = math.sqrt(2.0)
INV_SQRT2 = 1.0 / SQRT2

CATALOG = ("free_particle", "l4_linear", "cherry", "variation_like")
DEFAULT_SIGMA = 1.0


@dataclass(frozen=True)
class PhaseState:
    """A point ``(q, p)`` of a ``2n``-dimensional phase space."""

    q: np.ndarray
    p: np.ndarray

    def __post_init__(self):
        q = np.array(self.q, dtype=float).reshape(-1)
        p = np.array(self.p, dtype=float).reshape(-1)
        if q.size == 0 or q.shape != p.shape:
            raise DimensionError(f"q and p must have equal length >= 1, got {q.size} and {p.size}")
        if not (np.all(np.isfinite(q)) and np.all(np.isfinite(p))):
            raise ValueError("phase state components must be finite")
        q.flags.writeable = False
        p.flags.writeable = False
        object.__setattr__(self, "q", q)
        object.__setattr__(self, "p", p)

    @property
    def n(self) -> int:
        return self.q.size

    @classmethod
    def from_array(cls, x: Sequence[float]) -> PhaseState:
        x = np.asarray(x, dtype=float).reshape(-1)
        if x.size % 2:
            raise DimensionError(f"phase vector must have even length, got {x.size}")
        n = x.size // 2
        return cls(x[:n], x[n:])

    @classmethod
    def zeros(cls, n: int) -> PhaseState:
        return cls(np.zeros(n), np.zeros(n))

    def as_array(self) -> np.ndarray:
        return np.concatenate([self.q, self.p])

    def norm(self) -> float:
        return float(np.linalg.norm(self.as_array()))

    def __eq__(self, other):
        if not isinstance(other, PhaseState):
            return NotImplemented
        return np.array_equal(self.q, other.q) and np.array_equal(self.p, other.p)

    def __hash__(self):
        return hash((self.q.tobytes(), self.p.tobytes()))


def _to_fraction(c: Any) -> Fraction:
    if isinstance(c, Fraction):
        return c
    if isinstance(c, (int, np.integer)):
        return Fraction(int(c))
    if isinstance(c, str):
        return Fraction(c.strip())
    # floats are taken at their exact binary value
    return Fraction(float(c))


@dataclass(frozen=True)
class GFunction:
    """Polynomial ``g(x) = c1 x + c2 x**2 + ...`` with ``c1 > 0``.

    Coefficients are kept as exact fractions so that derivatives at zero are
    exact; numerical evaluation uses their float values. Strings such as
    ``"10/9"`` are accepted and parsed exactly.
    """

    coefficients: tuple[Fraction, ...]

    def __post_init__(self):
        coeffs = tuple(_to_fraction(c) for c in self.coefficients)
        if not coeffs:
            raise CatalogError("g needs at least the linear coefficient")
        if coeffs[0] <= 0:
            raise CatalogError(f"g'(0) must be positive, got {coeffs[0]}")
        while len(coeffs) > 1 and coeffs[-1] == 0:
            coeffs = coeffs[:-1]
        object.__setattr__(self, "coefficients", coeffs)
        # ascending float coefficients of g, g', g'', G for fast Horner evaluation
        c = np.array([0.0] + [float(v) for v in coeffs])
        P = np.polynomial.polynomial
        cache = {
            0: tuple(c),
            1: tuple(P.polyder(c, 1)) or (0.0,),
            2: tuple(P.polyder(c, 2)) or (0.0,),
            3: tuple(P.polyder(c, 3)) or (0.0,),
            -1: tuple(P.polyint(c)),
        }
        object.__setattr__(self, "_horner", cache)

    @classmethod
    def from_sigma(cls, sigma: float = DEFAULT_SIGMA) -> GFunction:
        """``g(x) = x + sigma x**2``."""
        return cls((1, sigma))

    @classmethod
    def from_power_coefficients(cls, coeffs: Sequence[Any]) -> GFunction:
        """Build from ``[c0, c1, c2, ...]`` including the constant term, which must be 0."""
        if not coeffs or _to_fraction(coeffs[0]) != 0:
            raise CatalogError("g(0) must be 0")
        return cls(tuple(coeffs[1:]))

    @property
    def degree(self) -> int:
        return len(self.coefficients)

    @property
    def power_coefficients(self) -> np.ndarray:
        """Float coefficients ``[0, c1, c2, ...]`` in ascending powers."""
        return np.array([0.0] + [float(c) for c in self.coefficients])

    def derivative_at_zero(self, order: int) -> Fraction:
        """Exact ``g^(order)(0) = order! * c_order``."""
        if order == 0:
            return Fraction(0)
        if order > self.degree:
            return Fraction(0)
        return math.factorial(order) * self.coefficients[order - 1]

    def _eval(self, key: int, x):
        coeffs = self._horner.get(key)
        if coeffs is None:
            coeffs = tuple(np.polynomial.polynomial.polyder(self.power_coefficients, key)) or (0.0,)
        acc = coeffs[-1] * (x * 0 + 1.0) if isinstance(x, np.ndarray) else coeffs[-1]
        for c in coeffs[-2::-1]:
            acc = acc * x + c
        return acc

    def __call__(self, x):
        return self._eval(0, x)

    def derivative(self, x, order: int = 1):
        return self._eval(order, x)

    def antiderivative(self, x):
        """``G(x) = integral of g from 0 to x``."""
        return self._eval(-1, x)

    def to_strings(self) -> list[str]:
        return [str(c) for c in self.coefficients]


@dataclass(frozen=True)
class HamiltonianSystem:
    """A catalog entry. Use :func:`catalog_build` rather than constructing directly.

    The callables act on flat phase vectors of length ``2n``.
    """

    name: str
    n: int
    params: Mapping[str, Any]
    equilibrium: PhaseState
    hamiltonian: Callable[[np.ndarray], float] = dataclasses.field(repr=False)
    gradient: Callable[[np.ndarray], np.ndarray] = dataclasses.field(repr=False)
    field: Callable[[np.ndarray], np.ndarray] = dataclasses.field(repr=False)
    jacobian: Callable[[np.ndarray], np.ndarray] | None = dataclasses.field(default=None, repr=False)
    g: GFunction | None = None
    description: str = ""

    @property
    def dim(self) -> int:
        return 2 * self.n

    def coerce(self, s) -> np.ndarray:
        """Return ``s`` as a flat float vector, checking its dimension."""
        x = s.as_array() if isinstance(s, PhaseState) else np.asarray(s, dtype=float).reshape(-1)
        if x.size != self.dim:
            raise DimensionError(f"{self.name} expects a state of dimension {self.dim}, got {x.size}")
        return x

    def to_record(self) -> dict:
        return {"name": self.name, "params": dict(self.params)}


def eval_hamiltonian(sys: HamiltonianSystem, s) -> float:
    return float(sys.hamiltonian(sys.coerce(s)))


def vector_field(sys: HamiltonianSystem, s) -> np.ndarray:
    return sys.field(sys.coerce(s))


def gradient(sys: HamiltonianSystem, s) -> np.ndarray:
    """``(dH/dq, dH/dp)`` as a flat vector."""
    return sys.gradient(sys.coerce(s))


# --- free particle -----------------------------------------------------------

def _free_particle() -> HamiltonianSystem:
    def H(x):
        return 0.5 * x[1] ** 2

    def grad(x):
        return np.array([0.0, x[1]])

    def f(x):
        return np.array([x[1], 0.0])

    def jac(x):
        return np.array([[0.0, 1.0], [0.0, 0.0]])

    return HamiltonianSystem(
        "free_particle", 1, {}, PhaseState.zeros(1), H, grad, f, jac,
        description="H = p^2/2; the whole line p = 0 consists of equilibria, the origin is representative",
    )


# --- L4 linearization --------------------------------------------------------

def _l4_linear() -> HamiltonianSystem:
    def H(x):
        q1, q2, p1, p2 = x
        return INV_SQRT2 * (p1 * q2 - p2 * q1) + 0.5 * (q1 * q1 + q2 * q2)

    def grad(x):
        q1, q2, p1, p2 = x
        return np.array([-p2 * INV_SQRT2 + q1, p1 * INV_SQRT2 + q2, q2 * INV_SQRT2, -q1 * INV_SQRT2])

    def f(x):
        q1, q2, p1, p2 = x
        return np.array([q2 * INV_SQRT2, -q1 * INV_SQRT2, -q1 + p2 * INV_SQRT2, -q2 - p1 * INV_SQRT2])

    a = INV_SQRT2
    J = np.array([
        [0.0, a, 0.0, 0.0],
        [-a, 0.0, 0.0, 0.0],
        [-1.0, 0.0, 0.0, a],
        [0.0, -1.0, -a, 0.0],
    ])

    def jac(x):
        return J.copy()

    return HamiltonianSystem(
        "l4_linear", 2, {}, PhaseState.zeros(2), H, grad, f, jac,
        description="H = det(p, q)/sqrt(2) + |q|^2/2",
    )


# --- Cherry ------------------------------------------------------------------

def _cherry(sigma: float) -> HamiltonianSystem:
    s = float(sigma)

    def H(x):
        q1, q2, p1, p2 = x
        return 0.5 * (q1 * q1 + p1 * p1) - (q2 * q2 + p2 * p2) + s * (q2 * (q1 * q1 - p1 * p1) - 2.0 * q1 * p1 * p2)

    def grad(x):
        q1, q2, p1, p2 = x
        return np.array([
            q1 + s * (2.0 * q1 * q2 - 2.0 * p1 * p2),
            -2.0 * q2 + s * (q1 * q1 - p1 * p1),
            p1 + s * (-2.0 * q2 * p1 - 2.0 * q1 * p2),
            -2.0 * p2 - 2.0 * s * q1 * p1,
        ])

    def f(x):
        q1, q2, p1, p2 = x
        return np.array([
            p1 - 2.0 * s * q2 * p1 - 2.0 * s * q1 * p2,
            -2.0 * p2 - 2.0 * s * q1 * p1,
            -q1 - 2.0 * s * q2 * q1 + 2.0 * s * p1 * p2,
            2.0 * q2 + s * p1 * p1 - s * q1 * q1,
        ])

    def jac(x):
        q1, q2, p1, p2 = x
        return np.array([
            [-2 * s * p2, -2 * s * p1, 1 - 2 * s * q2, -2 * s * q1],
            [-2 * s * p1, 0.0, -2 * s * q1, -2.0],
            [-1 - 2 * s * q2, -2 * s * q1, 2 * s * p2, 2 * s * p1],
            [-2 * s * q1, 2.0, 2 * s * p1, 0.0],
        ])

    return HamiltonianSystem(
        "cherry", 2, {"sigma": s}, PhaseState.zeros(2), H, grad, f, jac,
        description="H = (q1^2+p1^2)/2 - (q2^2+p2^2) + sigma*(q2*(q1^2-p1^2) - 2*q1*p1*p2)",
    )


# --- variation-like ----------------------------------------------------------

def _variation_like(g: GFunction, params: dict) -> HamiltonianSystem:
    def H(x):
        q1, q2, p1, p2 = x
        return p1 * p2 + g(q1) * q2

    def grad(x):
        q1, q2, p1, p2 = x
        return np.array([g.derivative(q1) * q2, g(q1), p2, p1])

    def f(x):
        q1, q2, p1, p2 = x
        return np.array([p2, p1, -g.derivative(q1) * q2, -g(q1)])

    def jac(x):
        q1, q2 = x[0], x[1]
        d1 = g.derivative(q1)
        return np.array([
            [0.0, 0.0, 0.0, 1.0],
            [0.0, 0.0, 1.0, 0.0],
            [-g.derivative(q1, 2) * q2, -d1, 0.0, 0.0],
            [-d1, 0.0, 0.0, 0.0],
        ])

    return HamiltonianSystem(
        "variation_like", 2, params, PhaseState.zeros(2), H, grad, f, jac, g=g,
        description="H = p1*p2 + g(q1)*q2 with g(0)=0, g'(0)>0",
    )


def subsystem(g: GFunction) -> HamiltonianSystem:
    """Planar system ``q' = p, p' = -g(q)`` that separates off the variation-like one.

    Its Hamiltonian is ``p**2/2 + G(q)``; coordinates are ``(q1, p2)`` of the
    four-dimensional system.
    """

    def H(x):
        return 0.5 * x[1] ** 2 + g.antiderivative(x[0])

    def grad(x):
        return np.array([g(x[0]), x[1]])

    def f(x):
        return np.array([x[1], -g(x[0])])

    def jac(x):
        return np.array([[0.0, 1.0], [-g.derivative(x[0]), 0.0]])

    return HamiltonianSystem(
        "variation_subsystem", 1, {"g_coeffs": g.to_strings()}, PhaseState.zeros(1), H, grad, f, jac, g=g,
        description="q1' = p2, p2' = -g(q1)",
    )


def catalog_build(name: str, params: Mapping[str, Any] | None = None) -> HamiltonianSystem:
    """Build a catalog system.

    Args:
        name: one of :data:`CATALOG`.
        params: ``{"sigma": s}`` for ``cherry`` and ``variation_like``
            (``g(x) = x + s x**2``), or ``{"g_coeffs": [c1, c2, ...]}`` for a
            general polynomial ``g`` in ``variation_like``. ``sigma`` defaults
            to 1.

    Raises:
        CatalogError: unknown name, unexpected parameters, or an invalid ``g``.
    """
    params = dict(params or {})
    if name == "free_particle" or name == "l4_linear":
        extra = {k: v for k, v in params.items() if v is not None}
        if extra:
            raise CatalogError(f"{name} takes no parameters, got {sorted(extra)}")
        return _free_particle() if name == "free_particle" else _l4_linear()
    if name == "cherry":
        unknown = set(params) - {"sigma"}
        if unknown:
            raise CatalogError(f"cherry: unknown parameters {sorted(unknown)}")
        sigma = params.get("sigma")
        return _cherry(DEFAULT_SIGMA if sigma is None else float(sigma))
    if name == "variation_like":
        unknown = set(params) - {"sigma", "g_coeffs"}
        if unknown:
            raise CatalogError(f"variation_like: unknown parameters {sorted(unknown)}")
        coeffs = params.get("g_coeffs")
        sigma = params.get("sigma")
        if coeffs is not None and sigma is not None:
            raise CatalogError("give either sigma or g_coeffs, not both")
        if coeffs is not None:
            g = coeffs if isinstance(coeffs, GFunction) else GFunction(tuple(coeffs))
            record = {"g_coeffs": g.to_strings()}
        else:
            s = DEFAULT_SIGMA if sigma is None else float(sigma)
            g = GFunction.from_sigma(s)
            record = {"sigma": s}
        return _variation_like(g, record)
    raise CatalogError(f"unknown system {name!r}; expected one of {', '.join(CATALOG)}")


def from_record(record: Mapping[str, Any]) -> HamiltonianSystem:
    """Inverse of :meth:`HamiltonianSystem.to_record`."""
    try:
        return catalog_build(record["name"], record.get("params"))
    except KeyError as exc:
        raise CatalogError(f"system record is missing {exc}") from None


def finite_difference_field(sys: HamiltonianSystem, s, step: float = 1e-5) -> np.ndarray:
    """``(dH/dp, -dH/dq)`` from central differences of the Hamiltonian."""
    x = sys.coerce(s)
    grad = np.empty_like(x)
    for i in range(x.size):
        e = np.zeros_like(x)
        e[i] = step
        grad[i] = (sys.hamiltonian(x + e) - sys.hamiltonian(x - e)) / (2.0 * step)
    n = sys.n
    return np.concatenate([grad[n:], -grad[:n]])
