import cmath

import pytest
from hypothesis import given
from hypothesis import strategies as st

from qdsred.errors import EmptyWindow, TruncationError
from qdsred.laurent import (
    DEFAULT_Q,
    LaurentSeries,
    add,
    dilate,
    from_pairs,
    inner,
    max_abs_diff,
    mul,
    qpow,
    res,
    scale,
)

Z = LaurentSeries.monomial
q = DEFAULT_Q

coef = st.complex_numbers(max_magnitude=3.0, allow_nan=False, allow_infinity=False)
series = st.dictionaries(st.integers(-4, 4), coef, max_size=6).map(LaurentSeries)


def close(a: LaurentSeries, b: LaurentSeries, tol=1e-12) -> bool:
    return max_abs_diff(a, b) <= tol * max(1.0, a.max_abs(), b.max_abs())


class TestDilate:
    def test_monomial(self):
        assert close(dilate(Z(2), 1), Z(2, q**2))

    def test_constant_is_fixed(self):
        assert close(dilate(LaurentSeries.constant(5), 0.3 + 2j), LaurentSeries.constant(5))

    def test_two_terms_against_substitution(self):
        a = Z(-1) + Z(1)
        # substitute z -> q^2 z by hand
        expect = from_pairs([(-1, q**-2), (1, q**2)])
        assert close(dilate(a, 2), expect)

    def test_window_unchanged(self):
        a = LaurentSeries({0: 1, -3: 2}, -3)
        assert dilate(a, 1.5).window == a.window

    def test_complex_power_uses_principal_log(self):
        w = 0.5 - 1.2j
        assert abs(qpow(q, w) - cmath.exp(w * cmath.log(q))) < 1e-15
        assert qpow(q, 0) == 1

    @given(series, st.complex_numbers(max_magnitude=2, allow_nan=False), st.complex_numbers(max_magnitude=2, allow_nan=False))
    def test_composition(self, a, w1, w2):
        assert close(dilate(dilate(a, w1), w2), dilate(a, w1 + w2))


class TestResidue:
    def test_constant_term(self):
        assert res(LaurentSeries({0: 3, 1: 2})) == 3

    def test_no_constant(self):
        assert res(Z(-1)) == 0

    @given(series)
    def test_dilation_invariant(self, b):
        assert abs(res(dilate(b, 1)) - res(b)) < 1e-12

    def test_unknown_residue_raises(self):
        with pytest.raises(TruncationError):
            res(LaurentSeries({3: 1}, 2))


class TestInner:
    def test_dual_monomials(self):
        assert inner(Z(1), Z(-1)) == 1

    def test_same_monomials(self):
        assert inner(Z(1), Z(1)) == 0

    def test_hand_expansion(self):
        assert inner(from_pairs([(0, 2), (1, 1)]), from_pairs([(0, 3), (-1, 1)])) == 7

    def test_truncated_partner_raises(self):
        a = Z(3)
        b = LaurentSeries({0: 1}, -2)
        with pytest.raises(TruncationError):
            inner(a, b)

    @given(series, series)
    def test_symmetric(self, a, b):
        assert abs(inner(a, b) - inner(b, a)) < 1e-12

    @given(series, series)
    def test_dilation_invariant(self, a, b):
        lhs = inner(dilate(a, 1), dilate(b, 1))
        assert abs(lhs - inner(a, b)) < 1e-10 * max(1.0, a.max_abs() * b.max_abs())

    @given(series, series)
    def test_residue_of_product(self, a, b):
        assert abs(res(mul(a, b)) - inner(a, b)) < 1e-12 * max(1.0, a.max_abs() * b.max_abs())


class TestArithmetic:
    def test_inverse_monomials(self):
        assert close(mul(Z(1), Z(-1)), LaurentSeries.constant(1))

    def test_add_negation(self):
        a = LaurentSeries({0: 1, -1: 2j, -4: 3}, -4)
        d = add(a, scale(a, -1))
        assert d.max_abs() == 0 and d.lo == -4

    def test_difference_of_squares(self):
        one_plus = from_pairs([(0, 1), (1, 1)])
        one_minus = from_pairs([(0, 1), (1, -1)])
        assert close(mul(one_plus, one_minus), from_pairs([(0, 1), (2, -1)]))

    def test_product_window_shrinks(self):
        a = LaurentSeries({2: 1, 0: 1}, -1)
        b = LaurentSeries({1: 1, -1: 1}, -3)
        p = mul(a, b)
        # unknown a_{-2} meets b's top z^1 at z^-1, so exactness starts at max(-1+1, -3+2) = 0
        assert p.lo == 0
        assert p.coeff(3) == 1 and p.coeff(1) == 2

    def test_add_intersects_windows(self):
        assert (LaurentSeries({0: 1}, -2) + LaurentSeries({0: 1}, -5)).lo == -2

    def test_empty_window_raises(self):
        with pytest.raises(EmptyWindow):
            LaurentSeries({}, 3, 1)

    def test_nonfinite_rejected(self):
        with pytest.raises(ValueError):
            LaurentSeries({0: float("nan")})

    @given(series)
    def test_records_roundtrip(self, a):
        b = LaurentSeries.from_records(a.to_records())
        assert b.window == a.window and close(a, b, 0)
