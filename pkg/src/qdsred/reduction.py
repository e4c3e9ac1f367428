"""Reduction of ``Lambda + A`` (A upper triangular, complex size) to companion form.

The gauge equation ``T(qz) L = L~ T`` is solved one diagonal at a time.  At
level ``l`` the known lower levels are collected into a right-hand side ``F``
on diagonal ``l``; summing it along the diagonal with weights ``q^(i m)``
yields the companion coefficient and the next diagonal of ``T``.  Rows up to
the regularity degree are summed explicitly; above it the row sums come from
partial-sum interpolation, so every output is again an interpolant in the
row index and the size.

Internally the companion first row holds ``+u~_i``; the reported
coefficients are ``u_i = -u~_i``, which is the convention of the scalar
operator ``D^lam + u_1 D^(lam-1) + ...``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping

import numpy as np

from .a0 import A0Function, A0Function2, A0Laurent, A0Laurent2
from .errors import ConsistencyError, ShapeError
from .glq import GlqMatrix, closure_factor, mul_glq, random_a0l, random_a0l2
from .laurent import DEFAULT_Q, LaurentSeries, qpow
from .loopfin import LoopMatrix
from .psido import QPsiSymbol

ZERO_TOL = 1e-9
# complex rows at which the structural zeros of T are sampled
SAMPLE_ROWS = tuple(complex(x, y) for x, y in [(0.3, 0.1), (-0.7, 0.4), (1.1, -0.5), (2.2, 0.9), (-1.3, -0.8),
                                                 (0.5, 1.7), (3.1, 0.2), (-0.2, -1.4), (1.9, 1.2), (0.8, -0.3)])


def _one_l2(q) -> A0Laurent2:
    return A0Laurent2.const(1, q)


def _one_l(q) -> A0Laurent:
    return A0Laurent({0: A0Function.const(1, q)}, None, 0, q)


def lambda_matrix(reg: int = 1, q: complex = DEFAULT_Q) -> GlqMatrix:
    """Ones on the subdiagonal, rows up to ``reg`` explicit."""
    return GlqMatrix.shift_down(q, max(reg, 1))


@dataclass(frozen=True, eq=False)
class YqElement:
    """``Lambda + A`` with ``A`` supported on diagonals ``0..A.dmax``."""

    A: GlqMatrix

    def __post_init__(self):
        if any(d < 0 for d in self.A.diagonals) or any(j < i for (i, j) in self.A.exceptional):
            raise ShapeError("the upper part must be upper triangular")
        if not self.A.banded:
            raise ShapeError("the upper part must have finitely many diagonals")

    @property
    def q(self) -> complex:
        return self.A.q

    @property
    def reg(self) -> int:
        return max(self.A.reg, 1)

    @property
    def dmax(self) -> int:
        return self.A.dmax

    def upper(self) -> GlqMatrix:
        return self.A.with_reg(self.reg)

    def matrix(self) -> GlqMatrix:
        return lambda_matrix(self.reg, self.q) + self.upper()

    def level(self, d: int) -> GlqMatrix:
        """Diagonal ``d >= 0`` of the upper part as a one-diagonal matrix."""
        return _single_diagonal(self.upper(), d)

    def evaluate(self, lam: complex, block: int) -> LoopMatrix:
        return self.matrix().evaluate(lam, block)

    @classmethod
    def from_matrix(cls, L: GlqMatrix, tol: float = 0.0) -> "YqElement":
        """Split a full matrix into Lambda plus its upper part, checking the shape."""
        reg = max(L.reg, 1)
        L = L.with_reg(reg)
        q = L.q
        sub = L.diagonals.get(-1)
        if sub is None or (sub - _one_l2(q)).max_abs() > tol or not sub.is_exact:
            raise ShapeError("subdiagonal interpolant must be the constant 1")
        if any(d < -1 for d in L.diagonals):
            raise ShapeError("nothing may lie below the subdiagonal")
        exc = {}
        for (i, j), a in L.exceptional.items():
            if j < i - 1:
                raise ShapeError(f"entry ({i},{j}) lies below the subdiagonal")
            if j == i - 1:
                if (a - _one_l(q)).max_abs() > tol:
                    raise ShapeError(f"subdiagonal entry ({i},{j}) must be 1")
                continue
            exc[(i, j)] = a
        for i in range(1, reg + 1):
            if (i, i - 1) not in L.exceptional:
                raise ShapeError(f"subdiagonal entry ({i},{i - 1}) must be 1")
        diags = {d: a for d, a in L.diagonals.items() if d >= 0}
        if not L.banded:
            raise ShapeError("input must have finitely many diagonals")
        return cls(GlqMatrix(reg, diags, exc, L.dmax, True, q))

    @classmethod
    def lambda_only(cls, q: complex = DEFAULT_Q, reg: int = 1) -> "YqElement":
        return cls(GlqMatrix(reg, {}, {}, 0, True, q))

    @classmethod
    def random(cls, rng: np.random.Generator, reg: int = 1, ndiag: int = 2, q: complex = DEFAULT_Q,
               zexps=(-1, 0), **kw) -> "YqElement":
        """Random element whose diagonals ``d >= 1`` carry the closure factor."""
        kw.setdefault("min_q", 0)
        diags, exc = {}, {}
        for d in range(ndiag + 1):
            a = random_a0l2(rng, q, zexps, **kw)
            if d >= 1:
                fac = closure_factor(d, q)
                a = a.map_coeffs(lambda m, f: f * fac)
            diags[d] = a
            for i in range(reg + 1):
                exc[(i, i + d)] = random_a0l(rng, q, zexps, **kw)
        return cls(GlqMatrix(reg, diags, exc, ndiag, True, q))


def _single_diagonal(M: GlqMatrix, d: int) -> GlqMatrix:
    diag = {d: M.diagonals[d]} if d in M.diagonals else {}
    exc = {(i, j): a for (i, j), a in M.exceptional.items() if j - i == d}
    return GlqMatrix(M.reg, diag, exc, max(d, 0), True, M.q)


@dataclass(frozen=True, eq=False)
class CompanionForm:
    """Reported coefficients ``u_1, u_2, ...`` as functions of the size t."""

    us: tuple
    q: complex = DEFAULT_Q

    def __len__(self) -> int:
        return len(self.us)

    def at(self, lam: complex) -> list[LaurentSeries]:
        return [u.eval(lam) for u in self.us]

    def first_row(self) -> list[A0Laurent]:
        """Entries of the companion matrix's first row, ``-u_i``."""
        return [-u for u in self.us]

    def level(self, d: int, reg: int) -> GlqMatrix:
        """The first-row entry on diagonal ``d`` as a one-diagonal matrix."""
        exc = {(0, d): -self.us[d]} if d < len(self.us) else {}
        return GlqMatrix(reg, {}, exc, d, True, self.q)

    def matrix(self, reg: int = 1) -> GlqMatrix:
        """The full companion matrix with the stored first row."""
        reg = max(reg, 1)
        exc = {(0, d): -u for d, u in enumerate(self.us)}
        upper = GlqMatrix(reg, {}, exc, max(len(self.us) - 1, 0), True, self.q)
        return lambda_matrix(reg, self.q) + upper

    def to_records(self) -> list:
        return [u.to_records() for u in self.us]


@dataclass(frozen=True, eq=False)
class GaugeElement:
    """``1 + T^(1) + T^(2) + ...``: diagonal interpolants plus explicit rows."""

    reg: int
    levels: Mapping[int, A0Laurent2] = field(default_factory=dict)
    exceptional: Mapping[tuple[int, int], A0Laurent] = field(default_factory=dict)
    q: complex = DEFAULT_Q

    @property
    def depth(self) -> int:
        return max(self.levels, default=0)

    def level(self, j: int) -> GlqMatrix:
        diag = {j: self.levels[j]} if j in self.levels else {}
        exc = {(i, k): a for (i, k), a in self.exceptional.items() if k - i == j}
        return GlqMatrix(self.reg, diag, exc, j, True, self.q)

    def matrix(self) -> GlqMatrix:
        diags = {0: _one_l2(self.q), **self.levels}
        exc = dict(self.exceptional)
        for i in range(self.reg + 1):
            exc[(i, i)] = _one_l(self.q)
        return GlqMatrix(self.reg, diags, exc, self.depth, False, self.q)

    def regularity(self) -> int:
        """Largest row carrying an explicit entry off the identity."""
        return max((i for (i, _) in self.exceptional), default=0)


@dataclass(frozen=True)
class Reduction:
    companion: CompanionForm
    gauge: GaugeElement
    max_zero: float


def _level_rhs(L: YqElement, comp_raw: list, T: GaugeElement, l: int) -> GlqMatrix:
    """``F^(l) = L^(l) - sum_j (L~^(l-j) T^(j) - T^(j)(qz) L^(l-j))``."""
    R, q = L.reg, L.q
    F = L.level(l) if l <= L.dmax else GlqMatrix(R, {}, {}, l, True, q)
    for j in range(1, l + 1):
        Tj = T.level(j)
        Lt = GlqMatrix(R, {}, {(0, l - j): comp_raw[l - j]}, l - j, True, q)
        F = F - mul_glq(Lt, Tj)
        if l - j <= L.dmax:
            F = F + mul_glq(Tj.dilate(1), L.level(l - j))
    return _single_diagonal(F.with_reg(R), l)


def _solve_level(F: GlqMatrix, l: int, R: int, q: complex):
    """Companion entry ``u~_(l+1)(t)`` and diagonal ``l+1`` of T from the right-hand side on diagonal l."""
    interp = F.diagonals.get(l, A0Laurent2({}, None, 0, q))
    rows = [F.exceptional.get((i, i + l), A0Laurent({}, None, 0, q)) for i in range(R + 1)]
    exps = set(interp.coeffs)
    lo = interp.lo
    for r in rows:
        exps |= set(r.coeffs)
        if r.lo is not None:
            lo = r.lo if lo is None else max(lo, r.lo)
    u_out: dict = {}
    t_out: dict = {}
    t_exc: dict = {i: {} for i in range(R + 1)}
    for m in exps:
        f = interp.coeffs.get(m, A0Function2.zero(q))
        weights = [qpow(q, i * m) for i in range(R + 1)]
        partial = []  # sum_{i<=n} F_{i,i+l}^m(t) q^(i m) for explicit rows n
        acc = A0Function.zero(q)
        for i in range(R + 1):
            if m in rows[i].coeffs:
                acc = acc + rows[i].coeffs[m].scale(weights[i])
            partial.append(acc)
        explicit = partial[-1]
        S = f.ips_w(m)
        S_low = S.eval_w(R + 1)
        u = explicit + S.along_t(l) - S_low
        u_out[m] = u
        # rows above reg: q^(-(w+1) m) [u - explicit - S(w+1, t) + S(reg+1, t)]
        rest = A0Function2.from_t(u - explicit + S_low) - S.shift_w(1)
        t_out[m] = rest.mul_qpow_w(-m).scale(qpow(q, -m))
        for n in range(R + 1):
            t_exc[n][m] = (u - partial[n]).scale(qpow(q, -(n + 1) * m))
    u_l = A0Laurent(u_out, lo, None, q)
    T_l = A0Laurent2(t_out, lo, None, q)
    exc = {(n, n + l + 1): A0Laurent(t_exc[n], lo, None, q) for n in range(R + 1)}
    return u_l, T_l, exc


def structural_zero_defect(Tl: A0Laurent2, level: int, ws=SAMPLE_ROWS) -> tuple[float, int]:
    """Largest ``|T^(level)(w, w + k)|`` over k = 1..level, z-exponents and sample rows.

    Each value is divided by ``max(1, sum of |terms|)`` at the same point, so
    the defect measures cancellation error rather than the size of T.
    """
    worst, worst_k = 0.0, 0
    for k in range(1, level + 1):
        for f in Tl.coeffs.values():
            g = f.diag_eval(k)
            for w in ws:
                v = abs(g.eval(w)) / max(1.0, f.abs_eval(w, w + k))
                if v > worst:
                    worst, worst_k = v, k
    return worst, worst_k


def reduce_universal(L: YqElement, dmax: int = 5, zero_tol: float = ZERO_TOL) -> Reduction:
    """Companion coefficients ``u_1..u_(dmax+1)`` and the gauge element up to diagonal ``dmax + 1``.

    Raises ConsistencyError when a structural zero of T fails by more than
    ``zero_tol`` at a sample row.
    """
    R, q = L.reg, L.q
    comp_raw: list[A0Laurent] = []
    levels: dict[int, A0Laurent2] = {}
    exc: dict = {}
    worst = 0.0
    for l in range(dmax + 1):
        T = GaugeElement(R, levels, exc, q)
        F = _level_rhs(L, comp_raw, T, l)
        u, Tl, Texc = _solve_level(F, l, R, q)
        comp_raw.append(u)
        defect, k = structural_zero_defect(Tl, l + 1)
        if defect > zero_tol:
            raise ConsistencyError(f"T^({l + 1})(w, w+{k}) = {defect:.3e} should vanish")
        worst = max(worst, defect)
        levels[l + 1] = Tl
        exc.update(Texc)
    companion = CompanionForm(tuple(-u for u in comp_raw), q)
    return Reduction(companion, GaugeElement(R, levels, exc, q), worst)


def verify_gauge(T: GaugeElement, L: YqElement, companion: CompanionForm, dmax: int) -> dict[int, float]:
    """Per-diagonal size of ``T(qz) L - L~ T`` for diagonals -1..dmax.

    Diagonal ``d`` needs T up to level ``d + 1`` and the companion up to
    ``u_(d+1)``.
    """
    R, q = max(T.reg, L.reg), L.q
    out: dict[int, float] = {}
    Lam = lambda_matrix(R, q)
    for d in range(-1, dmax + 1):
        acc = GlqMatrix(R + 1, {}, {}, max(d, 0), True, q)
        # T(qz) L: sum over T^(j) L^(d-j) with L^(-1) = Lambda
        for j in range(0, d + 2):
            Tj = GlqMatrix.identity(q, R) if j == 0 else T.level(j)
            Lk = Lam if d - j == -1 else (L.level(d - j) if d - j <= L.dmax else None)
            if Lk is None:
                continue
            acc = acc + _single_diagonal(mul_glq(Tj.dilate(1), Lk), d)
        for j in range(0, d + 2):
            Tj = GlqMatrix.identity(q, R) if j == 0 else T.level(j)
            Ck = Lam if d - j == -1 else companion.level(d - j, R)
            acc = acc - _single_diagonal(mul_glq(Ck, Tj), d)
        acc = acc.with_reg(R + 1)
        vals = [a.max_abs() for a in acc.diagonals.values()] + [a.max_abs() for a in acc.exceptional.values()]
        out[d] = max(vals, default=0.0)
    return out


def reduce_at(L: YqElement, lam: complex, dmax: int = 5) -> QPsiSymbol:
    """The scalar operator ``D^lam + u_1(lam) D^(lam-1) + ...`` of the reduced form."""
    red = reduce_universal(L, dmax)
    return QPsiSymbol.lax(lam, red.companion.at(lam), L.q)


def unipotent_inverse_glq(T: GlqMatrix, dmax: int) -> GlqMatrix:
    """``(1 + N)^-1 = sum (-N)^k`` with every diagonal above ``dmax`` discarded."""
    q = T.q
    one = GlqMatrix.identity(q, T.reg)
    N = (T - one).truncate_diagonals(dmax)
    out, power = one, one
    for _ in range(dmax):
        power = mul_glq(power, -N).truncate_diagonals(dmax)
        out = out + power
    return out


def random_unipotent(rng: np.random.Generator, reg: int, levels: int = 1, q: complex = DEFAULT_Q,
                     zexps=(-1, 0), size: float = 1.0, **kw) -> GlqMatrix:
    """``1 + size * sum_j T^(j)`` with the closure factor on each level."""
    kw.setdefault("min_q", 0)
    T = GlqMatrix.identity(q, reg)
    for j in range(1, levels + 1):
        fac = closure_factor(j, q)
        a = random_a0l2(rng, q, zexps, **kw).map_coeffs(lambda m, f: f * fac)
        exc = {(i, i + j): random_a0l(rng, q, zexps, **kw) for i in range(reg + 1)}
        T = T + GlqMatrix(reg, {j: a}, exc, j, True, q).scale(size)
    return T


def gauge_glq(T: GlqMatrix, L: YqElement, dmax: int) -> YqElement:
    """``T(qz) L T^-1`` with diagonals above ``dmax`` discarded."""
    Tinv = unipotent_inverse_glq(T, dmax)
    M = mul_glq(mul_glq(T.dilate(1), L.matrix()), Tinv)
    upper = {d: a for d, a in M.diagonals.items() if 0 <= d <= dmax}
    exc = {(i, j): a for (i, j), a in M.exceptional.items() if 0 <= j - i <= dmax}
    return YqElement(GlqMatrix(M.reg, upper, exc, dmax, True, L.q))
