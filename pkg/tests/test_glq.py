import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from qdsred import glq
from qdsred.a0 import A0Function, A0Function2, A0Laurent, A0Laurent2
from qdsred.errors import ConfigError, NonGenericParameter, ShapeError, ZeroLambda
from qdsred.laurent import DEFAULT_LAMBDA, DEFAULT_Q, LaurentSeries, inner, qpow
from qdsred.loopfin import DiagMatrix, FiniteRMatrixSpec, LoopMatrix, diag_inner, r0_finite

q, lam = DEFAULT_Q, DEFAULT_LAMBDA
WS = (0, 1, 2, 3, lam, 1.5 + 0.5j, -0.7 + 0.3j)
seeds = st.integers(0, 2**32 - 1)
# nonnegative q-exponents keep q^(-w) growth out of the row sums
KW = dict(max_pow=1, max_q=1, nterms=2, min_q=0)


def field_gap(f, g, ws=WS):
    return max((f.f - g.f).eval(w).max_abs() for w in ws)


def rand_field(rng):
    return glq.DiagField(glq.random_a0l(rng, q, (-1, 0, 1), max_pow=1, max_q=1, nterms=2))


def rand_series(rng, exps=(-1, 0, 1)):
    return LaurentSeries({m: complex(*rng.normal(size=2)) * 0.5 for m in exps})


def diag_pattern(f2: A0Function2) -> glq.GlqMatrix:
    return glq.GlqMatrix(0, {0: A0Laurent2({0: f2})}, {(0, 0): A0Laurent({0: f2.eval_w(0)})}, 0, True, q)


class TestEvaluate:
    def test_identity(self):
        E = glq.GlqMatrix.identity(q, reg=1).evaluate(lam, 5)
        assert (E - LoopMatrix.identity(5)).max_abs() == 0

    def test_size_valued_diagonal(self):
        A = diag_pattern(A0Function2({(0, 0, 1, 0): 1}))
        E = A.evaluate(lam, 4)
        assert all(abs(E[i, i].coeff(0) - lam) < 1e-15 for i in range(4))

    @pytest.mark.parametrize("k", [1, 2])
    def test_block_closure_at_integer_size(self, rng, k):
        A = glq.random_graded(rng, k, 1, q, **KW)
        assert glq.check_block_closure(A) < 1e-11
        assert glq.upper_zero_pattern(A, [0.3 + 0.1j, 2.7, -1.2j]) < 1e-11


class TestTrace:
    def test_identity(self):
        T = glq.tr_glq(glq.GlqMatrix.identity(q))
        assert abs(T.eval(7).coeff(0) - 7) < 1e-13
        assert abs(glq.tr_at(glq.GlqMatrix.identity(q), lam).coeff(0) - lam) < 1e-13

    def test_geometric_diagonal(self):
        A = diag_pattern(A0Function2({(0, 1, 0, 0): 1}))
        for t in (1, 2, 5, lam):
            assert abs(glq.tr_at(A, t).coeff(0) - (qpow(q, t) - 1) / (q - 1)) < 1e-12

    def test_integer_size_is_finite_trace(self, rng):
        A = glq.random_graded(rng, 0, 2, q, **KW)
        for m in (3, 4, 5):
            block = glq.restrict_matrix(A, m).trace_series()
            assert (glq.tr_at(A, m) - block).max_abs() < 1e-11

    def test_commutator_traceless(self, rng):
        for k in (1, 2):
            A, B = glq.random_graded(rng, k, 2, q, **KW), glq.random_graded(rng, -k, 2, q, **KW)
            for t in (lam, 1.5 + 0.5j, 3.2):
                d = glq.tr_at(glq.mul_glq(A, B), t) - glq.tr_at(glq.mul_glq(B, A), t)
                assert d.max_abs() < 1e-9


class TestProduct:
    def test_identity_is_neutral(self, rng):
        A = glq.random_graded(rng, 1, 1, q, **KW)
        P = glq.mul_glq(A, glq.GlqMatrix.identity(q))
        for t in (lam, 2.0):
            assert (P.evaluate(t, 6) - A.evaluate(t, 6)).max_abs() < 1e-12

    @pytest.mark.parametrize("ka,kb", [(1, -1), (0, 1), (-1, 2)])
    def test_evaluation_is_multiplicative(self, rng, ka, kb):
        A = glq.random_graded(rng, ka, 2, q, **KW)
        B = glq.random_graded(rng, kb, 2, q, **KW)
        P = glq.mul_glq(A, B)
        for t in (lam, 1.5 + 0.5j, 4.0):
            big = 10
            prod = A.evaluate(t, big) @ B.evaluate(t, big)
            got = P.evaluate(t, big)
            # the corner away from the truncation edge is exact
            worst = max((prod[i, j] - got[i, j]).max_abs() for i in range(6) for j in range(6))
            scale = max(1.0, max(prod[i, j].max_abs() for i in range(6) for j in range(6)))
            assert worst < 1e-10 * scale

    def test_shift_matrix_moves_diagonals(self, rng):
        A = glq.random_graded(rng, 1, 1, q, **KW)
        P = glq.mul_glq(glq.GlqMatrix.shift_down(q), A)
        E, F = P.evaluate(2.5, 8), A.evaluate(2.5, 8)
        for i in range(1, 6):
            for j in range(6):
                assert (E[i, j] - F[i - 1, j]).max_abs() < 1e-12


class TestShiftCalculus:
    def test_shift_of_constant(self):
        f = glq.DiagField(A0Laurent.from_laurent(LaurentSeries({0: 2, 1: 1j}), q))
        assert field_gap(glq.shift_s(f), f) == 0

    def test_A_kills_u(self, rng):
        u = glq.DiagField.u_element(rand_series(rng), q)
        assert field_gap(glq.apply_A(u), glq.DiagField.zero(q)) < 1e-13

    def test_A_of_row_index(self):
        w = glq.DiagField(A0Laurent({0: A0Function.zeta(1, 0, q)}, None, None, q))
        minus_one = glq.DiagField(A0Laurent({0: A0Function.const(-1, q)}, None, None, q))
        assert field_gap(glq.apply_A(w), minus_one) < 1e-14

    def test_inverse_on_u(self, rng):
        F0 = rand_series(rng)
        got = glq.apply_A_inverse(glq.DiagField.u_element(F0, q))
        for w in WS:
            want = LaurentSeries({m: -w * c * qpow(q, -w * m) for m, c in F0.coeffs.items()})
            assert (got.at(w) - want).max_abs() < 1e-12

    def test_inverse_contract(self, rng):
        F = rand_field(rng)
        AF = glq.apply_A_inverse(F)
        assert field_gap(glq.apply_A(AF), F) < 1e-10
        assert AF.at(0).max_abs() < 1e-13
        assert glq.apply_A_inverse(glq.DiagField.zero(q)).max_abs() == 0

    def test_projection(self, rng):
        u = glq.DiagField.u_element(rand_series(rng), q)
        assert field_gap(glq.proj_U(u, lam), u) < 1e-11
        v1 = glq.to_V1(rand_field(rng), lam)
        assert field_gap(glq.proj_U(glq.apply_A(v1), lam), glq.DiagField.zero(q)) < 1e-11
        P = glq.proj_U(rand_field(rng), lam)
        assert field_gap(glq.proj_U(P, lam), P) < 1e-11

    def test_projection_needs_nonzero_size(self, rng):
        with pytest.raises(ZeroLambda):
            glq.proj_U(rand_field(rng), 0)

    def test_splitting_of_v(self, rng):
        # v = v1 + A^-1 u with u the U-part recovered from v(lam, q^lam z)
        v = glq.to_V(rand_field(rng))
        vl = v.at(lam)
        F0 = LaurentSeries({m: -c * qpow(q, lam * m) / lam for m, c in vl.coeffs.items()})
        rest = v - glq.apply_A_inverse(glq.DiagField.u_element(F0, q))
        assert rest.at(0).max_abs() < 1e-11 and rest.at(lam).max_abs() < 1e-11

    def test_orthogonality(self, rng):
        for _ in range(20):
            v1 = glq.to_V1(rand_field(rng), lam)
            u = glq.DiagField.u_element(rand_series(rng), q)
            assert abs(glq.field_inner(glq.apply_A(v1), u, lam)) < 1e-10

    def test_shifted_pairing(self, rng):
        for _ in range(20):
            f, g = glq.to_V(rand_field(rng)), glq.to_V(rand_field(rng))
            lhs = glq.field_inner(f, g, lam) - glq.field_inner(glq.shift_s(f), glq.shift_s(g), lam)
            assert abs(lhs + inner(f.at(lam), g.at(lam))) < 1e-10

    def test_restriction_of_u_is_finite_u(self, rng):
        F0 = rand_series(rng)
        R = glq.restrict_field(glq.DiagField.u_element(F0, q), 3)
        assert (R - DiagMatrix.u_element(F0, 3, q)).max_abs() < 1e-14


class TestUniversalR:
    @given(seeds, st.sampled_from([{}, {1: 0.3}, {1: 0.2, 2: -0.5j}]))
    def test_skew(self, seed, delta):
        rng = np.random.default_rng(seed)
        spec = glq.UniversalRMatrixSpec(lam, delta)
        f, g = rand_field(rng), rand_field(rng)
        r = glq.r0_universal
        d = glq.field_inner(r(f, spec), g, lam) + glq.field_inner(f, r(g, spec), lam)
        assert abs(d) < 1e-10

    def test_nonskew_detected(self, rng):
        spec = glq.UniversalRMatrixSpec(lam, {}, {1: 0.2})
        f, g = rand_field(rng), rand_field(rng)
        r = glq.r0_universal
        assert abs(glq.field_inner(r(f, spec), g, lam) + glq.field_inner(f, r(g, spec), lam)) > 1e-6

    def test_constraint(self, rng):
        spec = glq.UniversalRMatrixSpec(lam, {1: 0.3})
        v1 = glq.to_V1(rand_field(rng), lam)
        lhs = glq.r0_universal(glq.apply_A(v1), spec)
        rhs = (v1 + glq.DiagField(glq.shift_s(v1).f.dilate(1))).scale(0.5)
        assert field_gap(lhs, rhs) < 1e-10

    @pytest.mark.parametrize("m", [2, 3])
    @pytest.mark.parametrize("delta", [{}, {1: 0.25, 3: -0.1}])
    def test_restriction_matches_finite(self, rng, m, delta):
        uni = glq.UniversalRMatrixSpec(m, delta)
        fin = FiniteRMatrixSpec(m, delta)
        for _ in range(10):
            f = DiagMatrix.u_element(rand_series(rng, range(-3, 4)), m, q)
            g = DiagMatrix.u_element(rand_series(rng, range(-3, 4)), m, q)
            a = diag_inner(glq.r0_restricted(f, uni), g)
            b = diag_inner(r0_finite(f, fin), g)
            assert abs(a - b) < 1e-10

    def test_generic_guard(self):
        bad_lam = 2j * np.pi / np.log(q)  # q^lam = 1
        spec = glq.UniversalRMatrixSpec(bad_lam)
        with pytest.raises(NonGenericParameter):
            spec.bbar(1, q)

    def test_restricted_needs_matching_size(self, rng):
        with pytest.raises(ShapeError):
            glq.r0_restricted(DiagMatrix.constant(3, 1.0), glq.UniversalRMatrixSpec(2))


class TestRecords:
    def test_roundtrip(self, rng):
        A = glq.random_graded(rng, 1, 2, q)
        B = glq.GlqMatrix.from_records(A.to_records(), q)
        assert B.reg == A.reg and B.dmax == A.dmax and B.banded == A.banded
        assert (B.evaluate(lam, 5) - A.evaluate(lam, 5)).max_abs() < 1e-13 * A.evaluate(lam, 5).max_abs()

    def test_malformed(self):
        with pytest.raises(ConfigError):
            glq.GlqMatrix.from_records({"reg": 0, "diagonals": [[0]]}, q)

    def test_exceptional_rows_validated(self):
        with pytest.raises(ShapeError):
            glq.GlqMatrix(0, {}, {(3, 3): A0Laurent({0: A0Function.const(1)})})
