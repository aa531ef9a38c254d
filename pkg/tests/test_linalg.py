import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from weakstab.core import catalog_build
from weakstab.errors import DimensionError, RootFindingError
from weakstab.linalg import (
    Verdict,
    charpoly,
    charpoly_residuals,
    classify,
    eigenstructure,
    hamiltonian_symmetry_defect,
    jacobian_at,
    numerical_rank,
    polyroots,
    trace_det_defect,
)

R2 = math.sqrt(2.0)


def _by_value(spec):
    return {(round(e.value.real, 9), round(e.value.imag, 9)): e for e in spec.eigenvalues}


class TestJacobian:
    def test_cherry_is_linear_part(self, cherry):
        A = jacobian_at(cherry, cherry.equilibrium)
        expected = np.array([[0, 0, 1, 0], [0, 0, 0, -2], [-1, 0, 0, 0], [0, 2, 0, 0]], dtype=float)
        assert np.array_equal(A, expected)

    def test_variation_linear_part(self):
        sys = catalog_build("variation_like", {"g_coeffs": ["5/2", 3]})
        A = jacobian_at(sys, sys.equilibrium)
        expected = np.array([[0, 0, 0, 1], [0, 0, 1, 0], [0, -2.5, 0, 0], [-2.5, 0, 0, 0]])
        assert np.array_equal(A, expected)

    def test_free_particle(self, free):
        assert np.array_equal(jacobian_at(free, free.equilibrium), [[0, 1], [0, 0]])

    def test_analytic_matches_finite_difference(self, any_system):
        rng = np.random.default_rng(5)
        points = [any_system.equilibrium.as_array()] + list(rng.uniform(-0.5, 0.5, size=(10, any_system.dim)))
        for x in points:
            A = jacobian_at(any_system, x, "analytic")
            B = jacobian_at(any_system, x, "finite_difference")
            assert np.max(np.abs(A - B)) <= 1e-7

    def test_dimension_mismatch(self, l4):
        with pytest.raises(DimensionError):
            jacobian_at(l4, [0.0, 0.0])


class TestEigenstructure:
    def test_l4_double_with_jordan_block(self, l4):
        spec = eigenstructure(jacobian_at(l4, l4.equilibrium))
        assert len(spec.eigenvalues) == 2
        for e in spec.eigenvalues:
            assert abs(abs(e.value.imag) - 1 / R2) < 1e-9 and abs(e.value.real) < 1e-9
            assert (e.algebraic_multiplicity, e.geometric_multiplicity, e.jordan_block_sizes) == (2, 1, (2,))

    def test_cherry_simple(self, cherry):
        spec = eigenstructure(jacobian_at(cherry, cherry.equilibrium))
        got = sorted(spec.values(), key=lambda z: z.imag)
        for z, w in zip(got, [-2j, -1j, 1j, 2j]):
            assert abs(z - w) < 1e-10
        assert all(e.jordan_block_sizes == (1,) for e in spec.eigenvalues)

    def test_free_particle_double_zero(self, free):
        spec = eigenstructure(jacobian_at(free, free.equilibrium))
        (e,) = spec.eigenvalues
        assert e.value == 0
        assert (e.algebraic_multiplicity, e.geometric_multiplicity, e.jordan_block_sizes) == (2, 1, (2,))

    def test_variation_semisimple_double(self, variation):
        spec = eigenstructure(jacobian_at(variation, variation.equilibrium))
        for e in spec.eigenvalues:
            assert abs(abs(e.value) - 1.0) < 1e-12
            assert (e.algebraic_multiplicity, e.geometric_multiplicity, e.jordan_block_sizes) == (2, 2, (1, 1))

    @pytest.mark.parametrize("blocks", [(4,), (3, 1), (2, 2), (2, 1, 1), (1, 1, 1, 1)])
    def test_nilpotent_jordan_recovery(self, blocks):
        N = np.zeros((4, 4))
        i = 0
        for b in blocks:
            for k in range(b - 1):
                N[i + k, i + k + 1] = 1.0
            i += b
        P = np.array([[2, 1, 0, 0], [1, 1, 0, 1], [0, 0, 1, 0], [1, 0, 0, 1]], dtype=float)
        A = P @ N @ np.linalg.inv(P)
        A[np.abs(A) < 1e-15] = 0.0
        spec = eigenstructure(np.round(A, 12))
        (e,) = spec.eigenvalues
        assert e.algebraic_multiplicity == 4
        assert e.geometric_multiplicity == len(blocks)
        assert e.jordan_block_sizes == tuple(sorted(blocks, reverse=True))

    def test_rank_sequence_sanity(self, l4):
        A = jacobian_at(l4, l4.equilibrium)
        lam = 1j / R2
        B = A - lam * np.eye(4)
        ranks = [numerical_rank(np.linalg.matrix_power(B, k), 1e-7) for k in range(1, 4)]
        assert ranks == sorted(ranks, reverse=True)
        assert ranks[-1] == 4 - 2

    def test_catalog_invariants(self, any_system):
        A = jacobian_at(any_system, any_system.equilibrium)
        spec = eigenstructure(A)
        assert sum(e.algebraic_multiplicity for e in spec.eigenvalues) == A.shape[0]
        assert hamiltonian_symmetry_defect(spec) < 1e-9
        assert np.all(charpoly_residuals(A, spec) < 1e-9)

    def test_iteration_cap_raises(self):
        with pytest.raises(RootFindingError):
            polyroots([1.0, 0.3, -2.0, 0.7, 1.1], max_iter=2)

    def test_bad_tol(self, l4):
        with pytest.raises(ValueError):
            eigenstructure(np.eye(2), tol=0.0)

    def test_charpoly_of_cherry(self, cherry):
        # (x^2 + 1)(x^2 + 4)
        assert np.allclose(charpoly(jacobian_at(cherry, cherry.equilibrium)), [1, 0, 5, 0, 4])


matrices = st.integers(2, 4).flatmap(
    lambda d: st.lists(st.lists(st.floats(-2, 2, allow_subnormal=False), min_size=d, max_size=d),
                       min_size=d, max_size=d)
)
int_matrices = st.integers(2, 4).flatmap(
    lambda d: st.lists(st.lists(st.integers(-2, 2), min_size=d, max_size=d), min_size=d, max_size=d)
)


def _check_spectrum_invariants(A):
    spec = eigenstructure(A)
    d = A.shape[0]
    assert sum(e.algebraic_multiplicity for e in spec.eigenvalues) == d
    for e in spec.eigenvalues:
        assert 1 <= e.geometric_multiplicity <= e.algebraic_multiplicity
        assert sum(e.jordan_block_sizes) == e.algebraic_multiplicity
        assert len(e.jordan_block_sizes) == e.geometric_multiplicity
    vals = spec.values()
    # exact conjugate pairing
    assert sorted(map(complex, vals), key=lambda z: (z.real, z.imag)) == sorted(
        (complex(z).conjugate() for z in vals), key=lambda z: (z.real, z.imag))
    dtr, ddet = trace_det_defect(A, spec)
    assert dtr < 1e-9 and ddet < 1e-9
    assert np.all(charpoly_residuals(A, spec) < 1e-9)


@settings(max_examples=200, deadline=None)
@given(matrices)
def test_spectrum_invariants_random(rows):
    _check_spectrum_invariants(np.array(rows, dtype=float))


@settings(max_examples=200, deadline=None)
@given(int_matrices)
def test_spectrum_invariants_integer(rows):
    _check_spectrum_invariants(np.array(rows, dtype=float))


class TestClassify:
    def test_l4_polynomial_growth(self, l4):
        c = classify(eigenstructure(jacobian_at(l4, l4.equilibrium)))
        assert c.verdict == Verdict.LINEAR_POLYNOMIAL_GROWTH
        assert c.imaginary_with_nontrivial_jordan and c.nonlinear_inconclusive

    def test_cherry_linearly_stable(self, cherry):
        c = classify(eigenstructure(jacobian_at(cherry, cherry.equilibrium)))
        assert c.verdict == Verdict.LINEARLY_STABLE
        assert c.nonlinear_inconclusive and c.all_imaginary_semisimple

    def test_saddle(self):
        c = classify(eigenstructure(np.array([[0.0, 1.0], [1.0, 0.0]])))
        assert c.verdict == Verdict.ASYMPTOTIC_MOTION_EXISTS
        assert c.has_positive_real_part and not c.nonlinear_inconclusive

    def test_spectrum_json(self, l4):
        spec = eigenstructure(jacobian_at(l4, l4.equilibrium))
        d = spec.to_dict()
        assert {"re", "im", "alg", "geo", "blocks"} <= set(d["eigenvalues"][0])


@pytest.mark.parametrize(
    "matrix, value, alg, geo, blocks",
    [
        (np.eye(3), 1, 3, 3, (1, 1, 1)),
        (2 * np.eye(4), 2, 4, 4, (1, 1, 1, 1)),
        ([[1, 1, 0], [0, 1, 1], [0, 0, 1]], 1, 3, 1, (3,)),
        ([[2, 1, 0, 0], [0, 2, 0, 0], [0, 0, 2, 1], [0, 0, 0, 2]], 2, 4, 2, (2, 2)),
    ],
)
def test_high_multiplicity_real_eigenvalue(matrix, value, alg, geo, blocks):
    (e,) = eigenstructure(np.array(matrix, dtype=float)).eigenvalues
    assert abs(e.value - value) < 1e-9
    assert (e.algebraic_multiplicity, e.geometric_multiplicity, e.jordan_block_sizes) == (alg, geo, blocks)
