"""Linearization, eigenvalues and Jordan structure for small real matrices.

Eigenvalues are computed as roots of the characteristic polynomial with a
Durand-Kerner iteration, grouped into clusters, and each cluster of size
``m`` is polished by Newton steps on the ``(m-1)``-th derivative of the
polynomial (where the root is simple). Geometric multiplicities and Jordan
block sizes come from numerical ranks of powers of ``A - lambda I``.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np

from weakstab.core import HamiltonianSystem
from weakstab.errors import DimensionError, RootFindingError

DEFAULT_TOL = 1e-7
FD_STEP = 1e-6


def jacobian_at(sys: HamiltonianSystem, s, method: str = "analytic", step: float = FD_STEP) -> np.ndarray:
    """Derivative matrix of the canonical field at ``s``.

    ``method`` is ``"analytic"`` (the closed form stored with the system) or
    ``"finite_difference"`` (central differences of the field).
    """
    x = sys.coerce(s)
    if method == "analytic":
        if sys.jacobian is None:
            raise ValueError(f"{sys.name} carries no analytic Jacobian")
        return np.array(sys.jacobian(x), dtype=float)
    if method != "finite_difference":
        raise ValueError(f"unknown method {method!r}")
    d = x.size
    A = np.empty((d, d))
    for j in range(d):
        e = np.zeros(d)
        e[j] = step
        A[:, j] = (sys.field(x + e) - sys.field(x - e)) / (2.0 * step)
    return A


def _check_square(A) -> np.ndarray:
    A = np.asarray(A, dtype=float)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise DimensionError(f"expected a square matrix, got shape {A.shape}")
    if not np.all(np.isfinite(A)):
        raise ValueError("matrix entries must be finite")
    return A


def charpoly(A) -> np.ndarray:
    """Coefficients of ``det(lambda I - A)`` in descending powers (monic).

    Faddeev-LeVerrier recursion; adequate for the ``d <= 4`` matrices used here.
    """
    A = _check_square(A)
    d = A.shape[0]
    coeffs = np.zeros(d + 1)
    coeffs[0] = 1.0
    M = np.zeros_like(A)
    I = np.eye(d)
    for k in range(1, d + 1):
        M = A @ M + coeffs[k - 1] * I
        coeffs[k] = -np.trace(A @ M) / k
    return coeffs


def _horner(coeffs, z):
    acc = 0j
    for c in coeffs:
        acc = acc * z + c
    return acc


def polyroots(coeffs, max_iter: int = 500) -> np.ndarray:
    """All complex roots of a polynomial given in descending powers.

    Durand-Kerner simultaneous iteration. Exact zero roots (vanishing trailing
    coefficients) are split off first.

    Raises:
        RootFindingError: if the iteration cap is hit before the corrections
            settle or the residuals reach rounding level.
    """
    c = np.asarray(coeffs, dtype=complex)
    nz = np.flatnonzero(c)
    if nz.size == 0:
        raise ValueError("zero polynomial")
    c = c[nz[0]:] / c[nz[0]]
    zeros = 0
    while c.size > 1 and c[-1] == 0:
        c = c[:-1]
        zeros += 1
    deg = c.size - 1
    if deg == 0:
        return np.zeros(zeros, dtype=complex)

    absc = np.abs(c)
    radius = 1.0 + float(np.max(absc[1:]))
    # standard non-symmetric start avoids stalls on conjugate-symmetric inputs
    z = radius * (0.4 + 0.9j) ** np.arange(deg)
    floor_hits = 0
    best, best_res = z, np.inf
    for _ in range(max_iter):
        delta = np.empty(deg, dtype=complex)
        for i in range(deg):
            denom = np.prod(z[i] - np.delete(z, i))
            if denom == 0:
                denom = 1e-300
            delta[i] = _horner(c, z[i]) / denom
        z = z - delta
        step_small = np.all(np.abs(delta) <= 1e-14 * (1.0 + np.abs(z)))
        scale = np.array([_horner(absc, abs(zi)).real for zi in z])
        resid = np.abs([_horner(c, zi) for zi in z])
        ratio = float(np.max(resid / scale))
        if ratio < best_res:
            best, best_res = z, ratio
        # multiple roots jitter at the rounding floor without the steps shrinking
        floor_hits += ratio <= 4 * np.finfo(float).eps
        if step_small:
            return np.concatenate([z, np.zeros(zeros, dtype=complex)])
        if floor_hits >= 25:
            return np.concatenate([best, np.zeros(zeros, dtype=complex)])
    raise RootFindingError(f"Durand-Kerner did not converge in {max_iter} iterations")


def _cluster(values: np.ndarray, tol: float) -> list[list[int]]:
    """Single-linkage grouping of complex numbers closer than ``tol``."""
    groups: list[list[int]] = []
    for i, v in enumerate(values):
        hits = [g for g in groups if any(abs(v - values[j]) <= tol for j in g)]
        merged = [i]
        for g in hits:
            merged.extend(g)
            groups.remove(g)
        groups.append(sorted(merged))
    return groups


def _refine(coeffs: np.ndarray, z: complex, mult: int, steps: int = 8) -> complex:
    d = np.polyder(coeffs, mult - 1) if mult > 1 else coeffs
    dd = np.polyder(d)
    best, best_res = z, abs(_horner(d, z))
    for _ in range(steps):
        den = _horner(dd, z)
        if den == 0:
            break
        z = z - _horner(d, z) / den
        res = abs(_horner(d, z))
        if res < best_res:
            best, best_res = z, res
        else:
            break
    return best


def _is_multiple_root(coeffs: np.ndarray, z: complex, mult: int) -> bool:
    """True when ``p, p', ..., p^(mult-1)`` all vanish at ``z`` to rounding."""
    eps = np.finfo(float).eps
    d = np.asarray(coeffs, dtype=float)
    for _ in range(mult):
        bound = _horner(np.abs(d), abs(z)).real * d.size
        if abs(_horner(d, z)) > 1e3 * eps * max(bound, eps):
            return False
        d = np.polyder(d)
    return True


def _merge_multiple(coeffs: np.ndarray, centres: list[tuple[complex, int]]) -> list[tuple[complex, int]]:
    # A root of multiplicity m comes back from Durand-Kerner spread over
    # roughly eps**(1/m), wider than the clustering tolerance once m >= 3.
    # Nearby clusters are merged only if the merged centre is a genuine
    # multiple root of the polynomial.
    centres = list(centres)
    merged = True
    while merged:
        merged = False
        for i in range(len(centres)):
            for j in range(i + 1, len(centres)):
                (zi, mi), (zj, mj) = centres[i], centres[j]
                if abs(zi - zj) > 1e-2 * (1.0 + abs(zi)):
                    continue
                m = mi + mj
                z = _refine(coeffs, (mi * zi + mj * zj) / m, m, steps=60)
                if _is_multiple_root(coeffs, z, m):
                    centres[i] = (z, m)
                    del centres[j]
                    merged = True
                    break
            if merged:
                break
    return centres


def numerical_rank(M, tol: float, scale: float | None = None) -> int:
    """Rank by complex row elimination with partial pivoting.

    A pivot counts when it exceeds ``tol * scale``; ``scale`` defaults to the
    max-norm of ``M``.
    """
    M = np.array(M, dtype=complex)
    if scale is None:
        scale = float(np.max(np.abs(M))) if M.size else 0.0
    if scale == 0.0:
        return 0
    threshold = tol * scale
    rows, cols = M.shape
    rank = 0
    for col in range(cols):
        if rank == rows:
            break
        piv = rank + int(np.argmax(np.abs(M[rank:, col])))
        if abs(M[piv, col]) <= threshold:
            continue
        M[[rank, piv]] = M[[piv, rank]]
        M[rank + 1:] -= np.outer(M[rank + 1:, col] / M[rank, col], M[rank])
        rank += 1
    return rank


@dataclass(frozen=True)
class Eigenvalue:
    value: complex
    algebraic_multiplicity: int
    geometric_multiplicity: int
    jordan_block_sizes: tuple[int, ...]

    def to_dict(self) -> dict:
        return {
            "re": float(self.value.real),
            "im": float(self.value.imag),
            "alg": self.algebraic_multiplicity,
            "geo": self.geometric_multiplicity,
            "blocks": list(self.jordan_block_sizes),
        }


@dataclass(frozen=True)
class Spectrum:
    eigenvalues: tuple[Eigenvalue, ...]
    residual_bound: float
    tol: float = DEFAULT_TOL
    dimension: int = 0

    def values(self) -> np.ndarray:
        """Eigenvalues repeated by algebraic multiplicity."""
        return np.array([e.value for e in self.eigenvalues for _ in range(e.algebraic_multiplicity)])

    def to_dict(self) -> dict:
        return {"eigenvalues": [e.to_dict() for e in self.eigenvalues], "residual_bound": self.residual_bound}


def _jordan_blocks(B: np.ndarray, mult: int, tol: float) -> tuple[int, tuple[int, ...]]:
    d = B.shape[0]
    ranks = [d]
    P = np.eye(d, dtype=complex)
    # one reference scale for all powers keeps the sequence comparable
    base = max(1.0, float(np.max(np.abs(B))))
    for k in range(1, mult + 1):
        P = P @ B
        r = numerical_rank(P, tol, base**k)
        ranks.append(max(d - mult, min(ranks[-1] if k > 1 else d - 1, r)))
    geo = d - ranks[1]
    # blocks of size >= k number ranks[k-1] - ranks[k]
    at_least = [ranks[k - 1] - ranks[k] for k in range(1, mult + 1)] + [0]
    sizes = []
    for k in range(1, mult + 1):
        sizes += [k] * (at_least[k - 1] - at_least[k])
    return geo, tuple(sorted(sizes, reverse=True))


def eigenstructure(A, tol: float = DEFAULT_TOL) -> Spectrum:
    """Eigenvalues with multiplicities and Jordan block sizes.

    Args:
        A: real square matrix.
        tol: clustering distance for repeated eigenvalues and relative pivot
            threshold for ranks.
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    A = _check_square(A)
    d = A.shape[0]
    coeffs = charpoly(A)
    roots = polyroots(coeffs)
    groups = _cluster(roots, tol)

    centres = []
    for g in groups:
        z = complex(np.mean(roots[g]))
        centres.append((_refine(coeffs, z, len(g)), len(g)))

    centres = _merge_multiple(coeffs, centres)

    # pair conjugates exactly and snap near-real values onto the axis
    paired: list[tuple[complex, int]] = []
    upper = sorted((c for c in centres if c[0].imag > tol), key=lambda c: -c[0].imag)
    lower = [c for c in centres if c[0].imag < -tol]
    leftover = [c for c in centres if abs(c[0].imag) <= tol]
    for z, m in upper:
        j = min((k for k, c in enumerate(lower) if c[1] == m),
                key=lambda k: abs(lower[k][0] - z.conjugate()), default=None)
        if j is None:
            leftover.append((z, m))
            continue
        w = 0.5 * (z + lower.pop(j)[0].conjugate())
        paired.append((w, m))
        paired.append((w.conjugate(), m))
    for z, m in leftover + lower:
        # an unpaired value of a real polynomial is real up to root-finding noise
        if abs(z.imag) > math.sqrt(tol) * (1.0 + abs(z)):
            raise RootFindingError("complex eigenvalue without conjugate partner for a real matrix")
        paired.append((complex(z.real, 0.0), m))

    records = []
    residual = 0.0
    for z, m in paired:
        residual = max(residual, abs(_horner(coeffs, z)))
        if m == 1:
            records.append(Eigenvalue(z, 1, 1, (1,)))
            continue
        geo, blocks = _jordan_blocks(A - z * np.eye(d), m, tol)
        records.append(Eigenvalue(z, m, geo, blocks))
    records.sort(key=lambda e: (round(e.value.imag, 9), round(e.value.real, 9)))
    return Spectrum(tuple(records), float(residual), tol, d)


class Verdict(str, enum.Enum):
    ASYMPTOTIC_MOTION_EXISTS = "ASYMPTOTIC_MOTION_EXISTS"
    LINEARLY_STABLE = "LINEARLY_STABLE"
    LINEAR_POLYNOMIAL_GROWTH = "LINEAR_POLYNOMIAL_GROWTH"
    INCONCLUSIVE_FOR_NONLINEAR = "INCONCLUSIVE_FOR_NONLINEAR"


@dataclass(frozen=True)
class SpectralClassification:
    verdict: Verdict
    has_positive_real_part: bool
    all_imaginary_semisimple: bool
    imaginary_with_nontrivial_jordan: bool
    nonlinear_inconclusive: bool = field(default=False)

    def to_dict(self) -> dict:
        return {
            "verdict": self.verdict.value,
            "has_positive_real_part": self.has_positive_real_part,
            "all_imaginary_semisimple": self.all_imaginary_semisimple,
            "imaginary_with_nontrivial_jordan": self.imaginary_with_nontrivial_jordan,
            "nonlinear_inconclusive": self.nonlinear_inconclusive,
        }


def classify(spec: Spectrum) -> SpectralClassification:
    """Spectral stability class of the linearization.

    A positive real part guarantees an asymptotic motion. Without one, the
    verdict is flagged ``nonlinear_inconclusive``: linear stability says
    nothing definite about the nonlinear equilibrium.
    """
    tol = spec.tol
    positive = any(e.value.real > tol for e in spec.eigenvalues)
    imaginary = all(abs(e.value.real) <= tol for e in spec.eigenvalues)
    semisimple = all(max(e.jordan_block_sizes) == 1 for e in spec.eigenvalues)
    all_semisimple = imaginary and semisimple
    nontrivial = imaginary and not semisimple
    if positive:
        verdict = Verdict.ASYMPTOTIC_MOTION_EXISTS
    elif all_semisimple:
        verdict = Verdict.LINEARLY_STABLE
    elif nontrivial:
        verdict = Verdict.LINEAR_POLYNOMIAL_GROWTH
    else:
        # only left-half-plane eigenvalues off the axis; impossible for Hamiltonian fields
        verdict = Verdict.INCONCLUSIVE_FOR_NONLINEAR
    return SpectralClassification(verdict, positive, all_semisimple, nontrivial, nonlinear_inconclusive=not positive)


def hamiltonian_symmetry_defect(spec: Spectrum) -> float:
    """Distance between the spectrum and its image under ``lambda -> -lambda``."""
    vals = list(spec.values())
    worst = 0.0
    for v in vals:
        worst = max(worst, min(abs(-v - w) for w in vals))
    return worst


def trace_det_defect(A, spec: Spectrum) -> tuple[float, float]:
    A = _check_square(A)
    vals = spec.values()
    return abs(np.sum(vals) - np.trace(A)), abs(np.prod(vals) - np.linalg.det(A))


def charpoly_residuals(A, spec: Spectrum) -> np.ndarray:
    coeffs = charpoly(A)
    return np.array([abs(_horner(coeffs, e.value)) for e in spec.eigenvalues])

