import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from qdsred.a0 import (
    A0Function,
    A0Function2,
    A0Laurent,
    A0Laurent2,
    brute_partial_sum,
    diag_eval,
    interpolate_partial_sum,
    is_zero,
    sampled_zero_check,
)
from qdsred.errors import NonGenericParameter
from qdsred.laurent import DEFAULT_Q, LaurentSeries, qpow

q = DEFAULT_Q
zeta = A0Function.zeta

coef = st.complex_numbers(max_magnitude=2.0, allow_nan=False, allow_infinity=False)
a0f = st.dictionaries(st.tuples(st.integers(0, 4), st.integers(-2, 2)), coef, min_size=1, max_size=4).map(A0Function)
a0f2 = st.dictionaries(st.tuples(st.integers(0, 2), st.integers(-1, 1), st.integers(0, 2), st.integers(-1, 1)), coef, min_size=1, max_size=4).map(A0Function2)


def gap(f: A0Function, g: A0Function) -> float:
    return (f - g).max_abs()


class TestEval:
    def test_linear(self):
        assert zeta(1, 0).eval(7) == 7

    def test_qpower(self):
        assert abs(zeta(0, 1).eval(2) - q**2) < 1e-15

    def test_mixed(self):
        assert abs(zeta(2, -1).eval(3) - 9 * q**-3) < 1e-12

    def test_complex_argument_branch(self):
        w = 2.3 - 0.7j
        assert abs(zeta(0, 1).eval(w) - qpow(q, w)) < 1e-15

    def test_degree(self):
        assert (zeta(3, -2) + zeta(1, 1)).deg == 5
        assert A0Function.zero().deg == 0


class TestInterpolation:
    def test_count(self):
        assert gap(interpolate_partial_sum(A0Function.const(1), 0), zeta(1, 0)) < 1e-14

    def test_geometric(self):
        F = interpolate_partial_sum(A0Function.const(1), 1)
        for N in range(1, 41):
            closed = (1 - q**N) / (1 - q)
            assert abs(F.eval(N) - closed) < 1e-12
            assert abs(F.eval(N) - brute_partial_sum(A0Function.const(1), 1, N)) < 1e-12

    def test_triangular_numbers(self):
        F = interpolate_partial_sum(zeta(1, 0), 0)
        assert gap(F, A0Function.poly([0, -0.5, 0.5])) < 1e-13
        for N in range(1, 41):
            assert abs(F.eval(N) - sum(range(N))) < 1e-9

    @given(a0f, st.integers(-4, 4))
    def test_telescoping(self, f, l):
        F = interpolate_partial_sum(f, l)
        for N in range(1, 41):
            step = F.eval(N + 1) - F.eval(N)
            want = f.eval(N) * qpow(q, N * l)
            assert abs(step - want) <= 1e-10 * max(1.0, abs(want), abs(F.eval(N)))

    @given(a0f, a0f, coef, st.integers(-3, 3))
    def test_linear(self, f, g, s, l):
        lhs = interpolate_partial_sum(f + g.scale(s), l)
        rhs = interpolate_partial_sum(f, l) + interpolate_partial_sum(g, l).scale(s)
        assert gap(lhs, rhs) <= 1e-10 * max(1.0, lhs.max_abs())

    def test_root_of_unity_guard(self):
        f = A0Function.const(1, q=-1.0 + 1e-14)
        with pytest.raises(NonGenericParameter):
            interpolate_partial_sum(f, 2)


class TestZero:
    def test_zero(self):
        assert is_zero(A0Function.zero())

    def test_cancellation(self):
        assert is_zero(zeta(0, 1) - zeta(0, 1))

    def test_random_nonzero_is_detected(self, rng):
        terms = {(int(rng.integers(0, 4)), int(rng.integers(-2, 3))): complex(*rng.normal(size=2)) for _ in range(4)}
        f = A0Function(terms)
        structural, worst = sampled_zero_check(f)
        assert not structural and worst > 1e-9


class TestTwoVariable:
    def test_diag_identity(self):
        assert gap(diag_eval(A0Function2({(0, 0, 1, 0): 1}), 0), zeta(1, 0)) < 1e-15

    def test_diag_shift(self):
        assert gap(diag_eval(A0Function2({(0, 0, 0, 1): 1}), 1), zeta(0, 1, c=q)) < 1e-15

    def test_diag_product(self):
        assert gap(diag_eval(A0Function2({(1, 0, 1, 0): 1}), 2), A0Function.poly([0, 2, 1])) < 1e-14

    @given(a0f2)
    def test_diag_matches_pointwise(self, f):
        g = diag_eval(f, 0)
        pts = np.random.default_rng(5).normal(size=(20, 2)) @ np.array([1, 1j])
        for w in pts:
            assert abs(g.eval(w) - f.eval(w, w)) <= 1e-12 * max(1.0, f.abs_eval(w, w))


class TestProduct:
    def test_basis_product(self):
        assert gap(zeta(1, 0) * zeta(0, 1), zeta(1, 1)) == 0

    def test_square(self):
        s = zeta(1, 0) + zeta(0, 1)
        assert gap(s * s, zeta(2, 0) + zeta(1, 1).scale(2) + zeta(0, 2)) < 1e-15

    def test_times_zero(self):
        assert is_zero(zeta(3, 2) * A0Function.zero())

    @given(a0f, a0f, a0f)
    def test_commutative_associative(self, f, g, h):
        assert gap(f * g, g * f) < 1e-12
        lhs, rhs = (f * g) * h, f * (g * h)
        assert gap(lhs, rhs) <= 1e-12 * max(1.0, lhs.max_abs())


class TestSerialization:
    @given(a0f)
    def test_function_roundtrip(self, f):
        assert gap(A0Function.from_records(f.to_records()), f) == 0

    @given(a0f2)
    def test_two_variable_roundtrip(self, f):
        g = A0Function2.from_records(f.to_records())
        assert (g - f).max_abs() == 0

    def test_laurent_roundtrip(self):
        a = A0Laurent({0: zeta(1, 0), -2: zeta(0, 1, c=2j)}, -3)
        b = A0Laurent.from_records(a.to_records())
        assert b.window == a.window
        assert (a - b).max_abs() == 0
        L2 = A0Laurent2({1: A0Function2({(1, 0, 0, 1): 3})}, -1)
        assert (A0Laurent2.from_records(L2.to_records()) - L2).max_abs() == 0

    def test_laurent_eval(self):
        a = A0Laurent({1: zeta(1, 0), 0: zeta(0, 1)})
        assert abs(a.eval(3).coeff(1) - 3) < 1e-15
        assert isinstance(a.eval(3), LaurentSeries)
