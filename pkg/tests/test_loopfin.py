import cmath

import numpy as np
import pytest

from qdsred.errors import ShapeError
from qdsred.laurent import DEFAULT_Q, LaurentSeries, dilate, inner, qpow
from qdsred.loopfin import (
    DiagMatrix,
    FiniteRMatrixSpec,
    LoopMatrix,
    diag_inner,
    eigenbasis,
    gauge,
    h_tau,
    matrix_bracket_covariant,
    matrix_bracket_finite,
    pairing,
    proj_Un,
    r0_finite,
    random_cross_section,
    reduce_finite,
    tau_n,
    unipotent_inverse,
    z_pair,
)
from qdsred.poisson import coefficient_partials, matrix_gradient, random_companion_us, random_coefficient_functional

q = DEFAULT_Q


def rand_series(rng, exps=range(-3, 4), scale=0.5):
    return LaurentSeries({m: scale * complex(*rng.normal(size=2)) for m in exps})


def rand_diag(rng, n):
    return DiagMatrix(tuple(rand_series(rng) for _ in range(n)))


def rand_unipotent(rng, n):
    return LoopMatrix.from_function(n, lambda i, j: LaurentSeries.constant(1) if i == j else (rand_series(rng, (-1, 0, 1)) if j > i else LaurentSeries.zero()))


class TestGauge:
    def test_identity(self, rng):
        L = random_cross_section(rng, 3)
        assert (gauge(LoopMatrix.identity(3), L) - L).max_abs() == 0

    def test_group_action(self, rng):
        L = random_cross_section(rng, 3)
        T = rand_unipotent(rng, 3)
        back = gauge(unipotent_inverse(T).dilate(0), gauge(T, L))
        assert (back - L).max_abs() < 1e-12

    def test_inverse(self, rng):
        T = rand_unipotent(rng, 4)
        assert (T @ unipotent_inverse(T) - LoopMatrix.identity(4)).max_abs() < 1e-13

    def test_preserves_cross_section_shape(self, rng):
        L2 = gauge(rand_unipotent(rng, 3), random_cross_section(rng, 3))
        for i in range(3):
            for j in range(i):
                want = 1 if i == j + 1 else 0
                assert (L2[i, j] - LaurentSeries.constant(want)).max_abs() < 1e-13


class TestReduceFinite:
    def test_companion_fixed(self, rng):
        us = random_companion_us(rng, 3)
        red = reduce_finite(LoopMatrix.companion(us))
        assert (red.T - LoopMatrix.identity(3)).max_abs() < 1e-13
        assert max((a - b).max_abs() for a, b in zip(red.us, us)) < 1e-13

    def test_shift_matrix(self):
        red = reduce_finite(LoopMatrix.shift_matrix(4))
        assert (red.companion - LoopMatrix.shift_matrix(4)).max_abs() == 0
        assert (red.T - LoopMatrix.identity(4)).max_abs() == 0

    @pytest.mark.parametrize("n", [2, 3, 4])
    def test_random_residual_and_uniqueness(self, rng, n):
        for _ in range(5):
            L = random_cross_section(rng, n)
            red = reduce_finite(L)
            assert red.T.is_unipotent_upper()
            assert red.residual(L) < 1e-10
            again = reduce_finite(red.companion)
            assert (again.T - LoopMatrix.identity(n)).max_abs() < 1e-12

    def test_shape_error(self, rng):
        L = random_cross_section(rng, 3)
        rows = [list(r) for r in L.entries]
        rows[2][1] = LaurentSeries.constant(2.0)
        with pytest.raises(ShapeError):
            reduce_finite(LoopMatrix(tuple(tuple(r) for r in rows)))


class TestDiagonalOperators:
    def test_cyclic_shift(self):
        a, b, c = (LaurentSeries.constant(x) for x in (1, 2, 3))
        out = tau_n(DiagMatrix((a, b, c)))
        assert [d.coeff(0) for d in out.diag] == [2, 3, 1]

    def test_constant_unchanged(self):
        f = DiagMatrix.constant(4, 2.5)
        assert (tau_n(f) - f).max_abs() == 0

    def test_order_n(self, rng):
        f = rand_diag(rng, 5)
        g = f
        for _ in range(5):
            g = tau_n(g)
        assert (g - f).max_abs() == 0

    def test_eigenvectors(self):
        for m, a, E, xi in eigenbasis(3, range(-2, 3)):
            assert (h_tau(E) - E.scale(xi)).max_abs() < 1e-14

    def test_eigen_pairing(self):
        n = 4
        basis = {(m, a): E for m, a, E, _ in eigenbasis(n, range(-2, 3))}
        for (m, a), E in basis.items():
            assert abs(diag_inner(E, basis[(-m, (n - a) % n)]) - n) < 1e-13
        assert abs(diag_inner(basis[(1, 0)], basis[(1, 0)])) == 0

    def test_cayley_on_eigenvector(self):
        E = [E for m, a, E, _ in eigenbasis(3, [1]) if a == 0][0]
        out = r0_finite(E, FiniteRMatrixSpec(3))
        assert (out - E.scale(0.5 * (1 + q) / (1 - q))).max_abs() < 1e-13

    def test_constants_killed(self):
        assert r0_finite(DiagMatrix.constant(3, 1.7), FiniteRMatrixSpec(3, {1: 0.4})).max_abs() < 1e-15

    def test_projection(self, rng):
        n = 3
        F = rand_diag(rng, n)
        P = proj_Un(F)
        assert (proj_Un(P) - P).max_abs() < 1e-13
        u = DiagMatrix.u_element(rand_series(rng), n)
        assert (proj_Un(u) - u).max_abs() < 1e-13
        # F = diag(g, 0, 0) projects to (1/n) g(q^-i z) in slot i
        g = rand_series(rng)
        G = proj_Un(DiagMatrix((g, LaurentSeries.zero(), LaurentSeries.zero())))
        for i in range(n):
            assert (G[i] - dilate(g, -i, q).scale(1 / n)).max_abs() < 1e-13

    def test_orthogonal_decomposition(self, rng):
        n = 3
        F = rand_diag(rng, n)
        c = sum(F[i].coeffs.get(0, 0) for i in range(n)) / n
        const = DiagMatrix.constant(n, c)
        u = proj_Un(F - const)
        rest = F - const - u
        parts = [const, u, rest]
        for i in range(3):
            for j in range(i + 1, 3):
                assert abs(diag_inner(parts[i], parts[j])) < 1e-11
        # the remainder lies in the image of 1 - h tau: it is orthogonal to every U_n element
        probe = DiagMatrix.u_element(rand_series(rng), n)
        assert abs(diag_inner(rest, probe)) < 1e-11

    @pytest.mark.parametrize("delta", [{}, {1: 0.3, 2: -0.1j}])
    def test_constraint_on_vn(self, rng, delta):
        n = 3
        spec = FiniteRMatrixSpec(n, delta)
        # V_n: diagonal matrices with vanishing first slot
        f = DiagMatrix((LaurentSeries.zero(),) + rand_diag(rng, n).diag[1:])
        lhs = r0_finite(f - h_tau(f), spec)
        rhs = (f + h_tau(f)).scale(0.5)
        diff = lhs - rhs
        # equality modulo constant multiples of the identity
        const = [d.coeffs.get(0, 0) for d in diff.diag]
        assert max(abs(c - const[0]) for c in const) < 1e-12
        assert max(max((abs(v) for m, v in d.coeffs.items() if m != 0), default=0) for d in diff.diag) < 1e-12


def brute_sum(n: int, m: int) -> complex:
    w = cmath.exp(2j * cmath.pi / n)
    s = 0j
    for a in range(n):
        x = q**m * w**a
        s += (1 + x) / (1 - x) ** 3 * x / n
    return s


@pytest.mark.parametrize("n", range(2, 7))
@pytest.mark.parametrize("m", [-4, -3, -2, -1, 1, 2, 3, 4])
def test_root_of_unity_sum_closed_form(n, m):
    x = q ** (m * n)
    assert abs(brute_sum(n, m) - n**2 * x * (1 + x) / (1 - x) ** 3) < 1e-12


@pytest.mark.parametrize("n", [2, 3])
def test_bilinear_form_on_un(rng, n):
    spec = FiniteRMatrixSpec(n)
    for _ in range(20):
        f0, g0 = rand_series(rng, range(-5, 6)), rand_series(rng, range(-5, 6))
        f, g = DiagMatrix.u_element(f0, n), DiagMatrix.u_element(g0, n)
        lhs = diag_inner(r0_finite(f, spec), g)
        mult = {m: c * n / 2 * (1 + q ** (n * m)) / (1 - q ** (n * m)) for m, c in f0.coeffs.items() if m != 0}
        rhs = diag_inner(DiagMatrix.u_element(LaurentSeries(mult), n), g)
        assert abs(lhs - rhs) < 1e-10


class TestFiniteBracket:
    def test_skew(self, rng):
        spec = FiniteRMatrixSpec(3, {1: 0.2})
        us = random_companion_us(rng, 3)
        gp = matrix_gradient(coefficient_partials(random_coefficient_functional(rng, 3), 3), us)
        pair = (gp.grad, gp.grad_prime)
        assert abs(matrix_bracket_finite(pair, pair, spec)) < 1e-12

    def test_scalar_gradients_vanish(self):
        spec = FiniteRMatrixSpec(2)
        I = LoopMatrix.identity(2).scale(1.3)
        X = LoopMatrix.from_function(2, lambda i, j: LaurentSeries({0: i + 2 * j + 1, 1: 0.5}))
        assert abs(matrix_bracket_finite((I, I), (X, X.dilate(1)), spec)) < 1e-13

    def test_two_forms_agree(self, rng):
        spec = FiniteRMatrixSpec(3, {1: 0.2, 2: 0.1})
        us = random_companion_us(rng, 3)
        for _ in range(5):
            a = matrix_gradient(coefficient_partials(random_coefficient_functional(rng, 3), 3), us)
            b = matrix_gradient(coefficient_partials(random_coefficient_functional(rng, 3), 3), us)
            z = matrix_bracket_finite((a.grad, a.grad_prime), (b.grad, b.grad_prime), spec)
            blk = matrix_bracket_covariant((a.grad, a.grad_prime), (b.grad, b.grad_prime), spec)
            assert abs(z - blk) < 1e-12

    def test_identity_direction_is_irrelevant(self, rng):
        # a term alpha(X) * 1 added to r0 pairs with Z only through <Z, 1>, which vanishes
        n = 3
        spec = FiniteRMatrixSpec(n)
        us = random_companion_us(rng, n)
        alpha = DiagMatrix.u_element(rand_series(rng), n).to_loop()
        for _ in range(5):
            a = matrix_gradient(coefficient_partials(random_coefficient_functional(rng, n), n), us)
            b = matrix_gradient(coefficient_partials(random_coefficient_functional(rng, n), n), us)
            Za, _ = z_pair(a.grad, a.grad_prime)
            Zb, _ = z_pair(b.grad, b.grad_prime)
            one = LoopMatrix.identity(n)
            assert abs(pairing(Za, one)) < 1e-13
            base = matrix_bracket_finite((a.grad, a.grad_prime), (b.grad, b.grad_prime), spec)
            shifted = base - pairing(Za, one.scale(pairing(alpha, Zb)))
            assert abs(shifted - base) < 1e-12


def test_delta_spec_validation():
    with pytest.raises(ValueError):
        FiniteRMatrixSpec(2, {0: 0.1})
    with pytest.raises(ValueError):
        FiniteRMatrixSpec(2, {1: 0.1, -1: 0.1})
    assert FiniteRMatrixSpec(2, {1: 0.1}).delta(-1) == -0.1


def test_loop_matrix_records_roundtrip(rng):
    L = random_cross_section(rng, 3)
    assert (LoopMatrix.from_records(L.to_records()) - L).max_abs() == 0
