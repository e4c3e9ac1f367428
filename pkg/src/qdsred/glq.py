"""Matrices of complex size and the shift-operator calculus on their diagonals.

A :class:`GlqMatrix` is a semi-infinite matrix whose entries depend on a size
parameter ``t`` and on the loop variable ``z``.  Rows above the regularity
degree ``reg`` are governed by per-diagonal interpolants ``A_d(w, t, z)``
(the entry in row ``i``, column ``i + d`` is ``A_d(i, t, z)``); rows
``0..reg`` are stored explicitly.  Evaluating at ``t = lam`` and reading the
top-left corner gives an ordinary loop matrix.

:class:`DiagField` is a diagonal matrix given by one interpolant ``f(w, z)``;
the operators ``s`` (shift), ``A = 1 - h s``, its inverse on fields vanishing
at row zero, the projection onto ``U`` and the universal diagonal r-matrix
act on it.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np

from .a0 import A0Function, A0Function2, A0Laurent, A0Laurent2, interpolate_partial_sum
from .errors import ConfigError, CutoffExceeded, NonGenericParameter, ShapeError, TruncationError, ZeroLambda
from .laurent import DEFAULT_Q, LaurentSeries, inner, qpow
from .loopfin import DiagMatrix, LoopMatrix

GENERIC_EPS = 1e-12


def _a0l_zero(q) -> A0Laurent:
    return A0Laurent({}, None, 0, q)


def _nonzero(x) -> bool:
    return bool(x.coeffs) or not x.is_exact


@dataclass(frozen=True, eq=False)
class GlqMatrix:
    """Semi-infinite matrix with interpolated diagonals and explicit top rows.

    Attributes:
        reg: rows ``0..reg`` are explicit; rows above follow the interpolants.
        diagonals: ``d -> A_d(w, t, z)``.
        exceptional: ``(i, j) -> entry(t, z)`` for ``i <= reg``; missing means zero.
        dmax: highest diagonal that is known.
        banded: when true every diagonal above ``dmax`` is zero; otherwise unknown.
    """

    reg: int
    diagonals: Mapping[int, A0Laurent2] = field(default_factory=dict)
    exceptional: Mapping[tuple[int, int], A0Laurent] = field(default_factory=dict)
    dmax: int = 8
    banded: bool = False
    q: complex = DEFAULT_Q

    def __post_init__(self):
        if self.reg < 0:
            raise ShapeError("regularity degree must be non-negative")
        diags = {int(d): a for d, a in self.diagonals.items() if _nonzero(a)}
        exc = {}
        for (i, j), a in self.exceptional.items():
            if i > self.reg or i < 0 or j < 0:
                raise ShapeError(f"explicit entry ({i},{j}) outside rows 0..reg")
            if j - i > self.dmax:
                continue
            if _nonzero(a):
                exc[(int(i), int(j))] = a
        for d in list(diags):
            if d > self.dmax:
                del diags[d]
        object.__setattr__(self, "diagonals", diags)
        object.__setattr__(self, "exceptional", exc)

    # structure
    @property
    def band(self) -> int:
        """Depth of the lowest nonzero diagonal below the main one."""
        lows = [-d for d in self.diagonals] + [i - j for (i, j) in self.exceptional]
        return max([0] + lows)

    def diag(self, d: int) -> A0Laurent2:
        if d > self.dmax and not self.banded:
            raise CutoffExceeded(f"diagonal {d} is above the cutoff {self.dmax}")
        return self.diagonals.get(d, A0Laurent2({}, None, 0, self.q))

    def entry(self, i: int, j: int) -> A0Laurent:
        """Entry (i, j) as a function of t."""
        d = j - i
        if d > self.dmax:
            if self.banded:
                return _a0l_zero(self.q)
            raise CutoffExceeded(f"entry ({i},{j}) lies above the cutoff {self.dmax}")
        if i <= self.reg:
            return self.exceptional.get((i, j), _a0l_zero(self.q))
        a = self.diagonals.get(d)
        if a is None:
            return _a0l_zero(self.q)
        return a.eval_w(i)

    def rows_span(self, i: int, dmax: int | None = None) -> range:
        dmax = self.dmax if dmax is None else dmax
        return range(max(0, i - self.band), i + dmax + 1)

    # constructors
    @classmethod
    def identity(cls, q: complex = DEFAULT_Q, reg: int = 0) -> "GlqMatrix":
        one = A0Laurent2.const(1, q)
        exc = {(i, i): A0Laurent({0: A0Function.const(1, q)}, None, 0, q) for i in range(reg + 1)}
        return cls(reg, {0: one}, exc, 0, True, q)

    @classmethod
    def shift_down(cls, q: complex = DEFAULT_Q, reg: int = 1) -> "GlqMatrix":
        """Lambda: ones on the subdiagonal."""
        one = A0Laurent2.const(1, q)
        exc = {(i, i - 1): A0Laurent({0: A0Function.const(1, q)}, None, 0, q) for i in range(1, reg + 1)}
        return cls(max(reg, 1), {-1: one}, exc, 0, True, q)

    def with_reg(self, reg: int) -> "GlqMatrix":
        """Same matrix with rows up to ``reg`` stored explicitly."""
        if reg <= self.reg:
            return self
        exc = dict(self.exceptional)
        for i in range(self.reg + 1, reg + 1):
            for j in self.rows_span(i):
                e = self.entry(i, j)
                if _nonzero(e):
                    exc[(i, j)] = e
        return GlqMatrix(reg, self.diagonals, exc, self.dmax, self.banded, self.q)

    # arithmetic
    def __add__(self, other: "GlqMatrix") -> "GlqMatrix":
        reg = max(self.reg, other.reg)
        a, b = self.with_reg(reg), other.with_reg(reg)
        dmax = min(a.dmax if not a.banded else 10**9, b.dmax if not b.banded else 10**9)
        banded = a.banded and b.banded
        if banded:
            dmax = max(a.dmax, b.dmax)
        diags = dict(a.diagonals)
        for d, x in b.diagonals.items():
            diags[d] = diags[d] + x if d in diags else x
        exc = dict(a.exceptional)
        for k, x in b.exceptional.items():
            exc[k] = exc[k] + x if k in exc else x
        return GlqMatrix(reg, diags, exc, dmax, banded, self.q)

    def scale(self, s: complex) -> "GlqMatrix":
        return GlqMatrix(
            self.reg,
            {d: a.scale(s) for d, a in self.diagonals.items()},
            {k: a.scale(s) for k, a in self.exceptional.items()},
            self.dmax,
            self.banded,
            self.q,
        )

    def __neg__(self) -> "GlqMatrix":
        return self.scale(-1)

    def __sub__(self, other: "GlqMatrix") -> "GlqMatrix":
        return self + (-other)

    def dilate(self, s: complex = 1) -> "GlqMatrix":
        """z -> q^s z in every entry."""
        return GlqMatrix(
            self.reg,
            {d: a.dilate(s) for d, a in self.diagonals.items()},
            {k: a.dilate(s) for k, a in self.exceptional.items()},
            self.dmax,
            self.banded,
            self.q,
        )

    def truncate_diagonals(self, dmax: int) -> "GlqMatrix":
        """Forget diagonals above ``dmax``."""
        if dmax >= self.dmax:
            return self
        return GlqMatrix(self.reg, self.diagonals, self.exceptional, dmax, False, self.q)

    # evaluation
    def evaluate(self, lam: complex, block: int) -> LoopMatrix:
        """Top-left ``block x block`` corner at size ``t = lam``."""
        rows = []
        for i in range(block):
            row = []
            for j in range(block):
                if j - i > self.dmax and self.banded:
                    row.append(LaurentSeries.zero())
                else:
                    row.append(self.entry(i, j).eval(lam))
            rows.append(tuple(row))
        return LoopMatrix(tuple(rows), self.q)

    def max_abs(self) -> float:
        vals = [a.max_abs() for a in self.diagonals.values()] + [a.max_abs() for a in self.exceptional.values()]
        return max(vals, default=0.0)

    def to_records(self) -> dict:
        return {
            "reg": self.reg,
            "dmax": self.dmax,
            "banded": self.banded,
            "diagonals": [[d, a.to_records()] for d, a in sorted(self.diagonals.items())],
            "exceptional": [[i, j, a.to_records()] for (i, j), a in sorted(self.exceptional.items())],
        }

    @classmethod
    def from_records(cls, rec: Mapping, q: complex = DEFAULT_Q) -> "GlqMatrix":
        try:
            diags = {int(d): A0Laurent2.from_records(a, q) for d, a in rec.get("diagonals", [])}
            exc = {(int(i), int(j)): A0Laurent.from_records(a, q) for i, j, a in rec.get("exceptional", [])}
            return cls(int(rec["reg"]), diags, exc, int(rec.get("dmax", 8)), bool(rec.get("banded", False)), q)
        except (KeyError, TypeError, ValueError) as exc_info:
            if isinstance(exc_info, ShapeError):
                raise
            raise ConfigError(f"malformed matrix record: {exc_info}") from exc_info


def _product_dmax(A: GlqMatrix, B: GlqMatrix) -> tuple[int, bool]:
    if A.banded and B.banded:
        return A.dmax + B.dmax, True
    cands = []
    if not A.banded:
        cands.append(A.dmax - B.band)
    if not B.banded:
        cands.append(B.dmax - A.band)
    return min(cands), False


def mul_glq(A: GlqMatrix, B: GlqMatrix) -> GlqMatrix:
    """Matrix product; diagonal d of the result is ``sum A_d1(w, t) B_(d-d1)(w + d1, t)``."""
    if A.q != B.q:
        raise ShapeError("factors use different q")
    dmax, banded = _product_dmax(A, B)
    reg = max(A.reg, B.reg + A.band)
    lowA, lowB = -A.band, -B.band
    diags: dict[int, A0Laurent2] = {}
    shifted: dict[tuple[int, int], A0Laurent2] = {}
    for d in range(lowA + lowB, dmax + 1):
        acc = None
        for d1 in range(lowA, d - lowB + 1):
            a = A.diagonals.get(d1)
            if a is None or (d1 > A.dmax):
                continue
            d2 = d - d1
            if d2 > B.dmax and not B.banded:
                raise CutoffExceeded("product needs a diagonal above the cutoff")
            b = B.diagonals.get(d2)
            if b is None:
                continue
            key = (d2, d1)
            if key not in shifted:
                shifted[key] = b.shift_w(d1)
            term = a * shifted[key]
            acc = term if acc is None else acc + term
        if acc is not None:
            diags[d] = acc
    exc: dict[tuple[int, int], A0Laurent] = {}
    for i in range(reg + 1):
        rowA = {k: A.entry(i, k) for k in A.rows_span(i)}
        for j in range(max(0, i - A.band - B.band), i + dmax + 1):
            acc = None
            for k, a in rowA.items():
                if not _nonzero(a):
                    continue
                if j - k > B.dmax and not B.banded:
                    continue
                if k - j > B.band:
                    continue
                b = B.entry(k, j)
                if not _nonzero(b):
                    continue
                term = a * b
                acc = term if acc is None else acc + term
            if acc is not None:
                exc[(i, j)] = acc
    return GlqMatrix(reg, diags, exc, dmax, banded, A.q)


def tr_glq(A: GlqMatrix) -> A0Laurent:
    """Trace as a function of the size t.

    Interpolates ``sum_{i < N} A_ii(N)``: the main-diagonal interpolant is summed
    with partial-sum interpolation in the row variable, the explicit rows
    replace their interpolated values, and finally the row bound is set to t.
    """
    q = A.q
    a0 = A.diagonals.get(0, A0Laurent2({}, None, 0, q))
    out: dict[int, A0Function] = {}
    exps = set(a0.coeffs)
    for i in range(A.reg + 1):
        exps |= set(A.exceptional.get((i, i), _a0l_zero(q)).coeffs)
    for m in exps:
        f = a0.coeffs.get(m, A0Function2.zero(q))
        S = f.ips_w(0)
        # sum_{reg < i < t} A0(i, t) = S(t, t) - S(reg + 1, t)
        g = S.diag_eval(0) - S.eval_w(A.reg + 1)
        for i in range(A.reg + 1):
            e = A.exceptional.get((i, i))
            if e is not None and m in e.coeffs:
                g = g + e.coeffs[m]
        out[m] = g
    lo = a0.lo
    for (i, j), e in A.exceptional.items():
        if i == j and e.lo is not None:
            lo = e.lo if lo is None else max(lo, e.lo)
    return A0Laurent(out, lo, None, q)


def tr_at(A: GlqMatrix, lam: complex) -> LaurentSeries:
    return tr_glq(A).eval(lam)


def restrict_matrix(A: GlqMatrix, m: int) -> LoopMatrix:
    """The gl_m block at t = m."""
    return A.evaluate(m, m)


def check_block_closure(A: GlqMatrix, sizes: Sequence[int] | None = None, tol: float = 1e-11) -> float:
    """Largest entry in rows reg < i < m, columns j >= m at t = m (should vanish)."""
    sizes = sizes or range(A.reg + 1, A.reg + 6)
    worst = 0.0
    for m in sizes:
        for i in range(A.reg + 1, m):
            for j in range(m, i + A.dmax + 1):
                worst = max(worst, A.entry(i, j).eval(m).max_abs())
    return worst


def upper_zero_pattern(A: GlqMatrix, ws: Sequence[complex]) -> float:
    """Largest ``|A_d(w, w + l)|`` over d >= 1, 1 <= l <= d and sample points w."""
    worst = 0.0
    for d, a in A.diagonals.items():
        if d < 1:
            continue
        for l in range(1, d + 1):
            g = a.diag_eval(l)
            for w in ws:
                worst = max(worst, g.eval(w).max_abs())
    return worst


def closure_factor(k: int, q: complex = DEFAULT_Q) -> A0Function2:
    """prod_{l=1..k} (t - w - l), which vanishes where column i + k crosses the size."""
    f = A0Function2.const(1, q)
    for l in range(1, k + 1):
        f = f * A0Function2({(0, 0, 1, 0): 1, (1, 0, 0, 0): -1, (0, 0, 0, 0): -l}, q)
    return f


# random generators used by tests, suites and scripts


def random_a0(
    rng: np.random.Generator, q: complex, max_pow: int = 1, max_q: int = 1, nterms: int = 3, min_q: int | None = None
) -> A0Function:
    lo_q = -max_q if min_q is None else min_q
    terms = {}
    for _ in range(nterms):
        key = (int(rng.integers(0, max_pow + 1)), int(rng.integers(lo_q, max_q + 1)))
        terms[key] = complex(rng.normal(), rng.normal()) * 0.5
    return A0Function(terms, q)


def random_a02(
    rng: np.random.Generator, q: complex, max_pow: int = 1, max_q: int = 1, nterms: int = 3, min_q: int | None = None
) -> A0Function2:
    """Random two-variable function; q-exponents lie in ``[min_q, max_q]`` (default ``min_q = -max_q``)."""
    lo_q = -max_q if min_q is None else min_q
    terms = {}
    for _ in range(nterms):
        key = (
            int(rng.integers(0, max_pow + 1)),
            int(rng.integers(lo_q, max_q + 1)),
            int(rng.integers(0, max_pow + 1)),
            int(rng.integers(lo_q, max_q + 1)),
        )
        terms[key] = complex(rng.normal(), rng.normal()) * 0.5
    return A0Function2(terms, q)


def random_a0l2(rng, q, zexps=(-1, 0, 1), **kw) -> A0Laurent2:
    return A0Laurent2({m: random_a02(rng, q, **kw) for m in zexps}, None, None, q)


def random_a0l(rng, q, zexps=(-1, 0, 1), **kw) -> A0Laurent:
    return A0Laurent({m: random_a0(rng, q, **kw) for m in zexps}, None, None, q)


def random_graded(rng: np.random.Generator, k: int, reg: int, q: complex = DEFAULT_Q, zexps=(-1, 0, 1), **kw) -> GlqMatrix:
    """Random matrix supported on diagonal k.

    For k >= 1 the interpolant carries the closure factor so that every finite
    block is closed; for k < 0 the explicit rows start at row -k.
    """
    if k < 0 and reg < -k:
        raise ShapeError("a matrix on diagonal -k needs reg >= k")
    a = random_a0l2(rng, q, zexps, **kw)
    if k >= 1:
        fac = closure_factor(k, q)
        a = a.map_coeffs(lambda m, f: f * fac)
    exc = {}
    for i in range(reg + 1):
        j = i + k
        if j >= 0:
            exc[(i, j)] = random_a0l(rng, q, zexps, **kw)
    return GlqMatrix(reg, {k: a}, exc, max(k, 0), True, q)


# diagonal fields and the shift calculus


@dataclass(frozen=True, eq=False)
class DiagField:
    """diag(f(0, z), f(1, z), ...) with one interpolant f(w, z)."""

    f: A0Laurent

    @property
    def q(self) -> complex:
        return self.f.q

    def __add__(self, other: "DiagField") -> "DiagField":
        return DiagField(self.f + other.f)

    def __sub__(self, other: "DiagField") -> "DiagField":
        return DiagField(self.f - other.f)

    def __neg__(self) -> "DiagField":
        return DiagField(-self.f)

    def scale(self, s: complex) -> "DiagField":
        return DiagField(self.f.scale(s))

    def at(self, w: complex) -> LaurentSeries:
        return self.f.eval(w)

    def max_abs(self) -> float:
        return self.f.max_abs()

    @classmethod
    def zero(cls, q: complex = DEFAULT_Q) -> "DiagField":
        return cls(_a0l_zero(q))

    @classmethod
    def u_element(cls, f0: LaurentSeries, q: complex = DEFAULT_Q) -> "DiagField":
        """diag(F(z), F(z/q), F(z/q^2), ...): coefficient m carries q^(-w m)."""
        return cls(A0Laurent({m: A0Function.zeta(0, -m, q, c) for m, c in f0.coeffs.items()}, f0.lo, f0.hi, q))

    @classmethod
    def lift(cls, f: DiagMatrix) -> "DiagField":
        """Polynomial interpolant in w through the rows of a finite diagonal matrix."""
        n, q = f.n, f.q
        V = np.vander(np.arange(n, dtype=float), n, increasing=True)
        Vinv = np.linalg.inv(V)
        out = {}
        for m in f.exponents():
            vals = np.array([complex(f[i].coeffs.get(m, 0)) for i in range(n)])
            out[m] = A0Function.poly(Vinv @ vals, q)
        lo = None
        for d in f.diag:
            if d.lo is not None:
                lo = d.lo if lo is None else max(lo, d.lo)
        return cls(A0Laurent(out, lo, None, q))


def shift_s(f: DiagField) -> DiagField:
    """Row shift: f(w, z) -> f(w + 1, z)."""
    return DiagField(f.f.shift(1))


def apply_A(f: DiagField) -> DiagField:
    """``(1 - h s) f = f(w, z) - f(w + 1, qz)``."""
    return DiagField(f.f - f.f.shift(1).dilate(1))


def apply_A_inverse(F: DiagField) -> DiagField:
    """Inverse of A on fields vanishing at row zero: row n is ``-sum_{i<n} F_i(q^(i-n) z)``."""
    q = F.q
    out = {m: interpolate_partial_sum(c, m).mul_qpow(-m).scale(-1) for m, c in F.f.coeffs.items()}
    return DiagField(A0Laurent(out, F.f.lo, F.f.hi, q))


def proj_U(F: DiagField, lam: complex) -> DiagField:
    """Projection onto U along ``A(V_1)``; the 0-th row is ``-(1/lam) (A^-1 F)(lam, q^lam z)``."""
    if lam == 0:
        raise ZeroLambda("the projection onto U needs lambda != 0")
    return DiagField.u_element(u_component(F, lam), F.q)


def u_component(F: DiagField, lam: complex) -> LaurentSeries:
    """Series F_0 of the U-projection of F."""
    if lam == 0:
        raise ZeroLambda("the projection onto U needs lambda != 0")
    q = F.q
    g = apply_A_inverse(F).at(lam)
    return LaurentSeries({m: -c * qpow(q, lam * m) / lam for m, c in g.coeffs.items()}, g.lo, g.hi)


def field_inner(f: DiagField, g: DiagField, lam: complex) -> complex:
    """``int dz/z Tr(f g)`` with the trace interpolated to size lam."""
    for x, y in ((f.f, g.f), (g.f, f.f)):
        if x.lo is not None and -y.hi < x.lo:
            raise TruncationError("inner product needs coefficients below a window")
    total = 0j
    for m, a in f.f.coeffs.items():
        b = g.f.coeffs.get(-m)
        if b is None:
            continue
        total += interpolate_partial_sum(a * b, 0).eval(lam)
    return total


def to_V(f: DiagField) -> DiagField:
    """Subtract the row-zero value so the field vanishes at w = 0."""
    f0 = f.f.eval(0)
    q = f.q
    return DiagField(f.f - A0Laurent.from_laurent(f0, q))


def to_V1(f: DiagField, lam: complex) -> DiagField:
    """Project to fields vanishing at w = 0 and w = lam (linear correction in w)."""
    q = f.q
    f0, fl = f.f.eval(0), f.f.eval(lam)
    corr = {}
    for m in set(f0.coeffs) | set(fl.coeffs):
        a, b = f0.coeffs.get(m, 0), fl.coeffs.get(m, 0)
        # a (1 - w/lam) + b w/lam
        corr[m] = A0Function({(0, 0): a, (1, 0): (b - a) / lam}, q)
    return DiagField(f.f - A0Laurent(corr, None, None, q))


def restrict_field(f: DiagField, m: int) -> DiagMatrix:
    """The first m rows as a finite diagonal matrix."""
    return DiagMatrix(tuple(f.at(i) for i in range(m)), f.q)


@dataclass(frozen=True)
class UniversalRMatrixSpec:
    """Diagonal r-matrix data: size lam and the skew multiplier delta on U."""

    lam: complex
    delta_multipliers: Mapping[int, complex] = field(default_factory=dict)
    extra_multipliers: Mapping[int, complex] = field(default_factory=dict)

    def __post_init__(self):
        d = {int(m): complex(v) for m, v in self.delta_multipliers.items()}
        if abs(d.get(0, 0)) > 0:
            raise ValueError("delta_0 must vanish")
        full = dict(d)
        for m, v in d.items():
            if -m in d and abs(d[-m] + v) > 1e-14:
                raise ValueError("delta must be skew")
            full.setdefault(-m, -v)
        object.__setattr__(self, "delta_multipliers", full)
        object.__setattr__(self, "lam", complex(self.lam))

    def delta(self, m: int) -> complex:
        return self.delta_multipliers.get(m, 0j)

    def bbar(self, m: int, q: complex, eps: float = GENERIC_EPS) -> complex:
        """Multiplier of the skew operator on U at z^m, plus any injected extra."""
        extra = self.extra_multipliers.get(m, 0j)
        if m == 0:
            return extra
        x = qpow(q, self.lam * m)
        if abs(1 - x) < eps:
            raise NonGenericParameter(f"|1 - q^(lam*{m})| < {eps}")
        return self.lam * (0.5 * (1 + x) / (1 - x) + self.delta(m)) + extra


def r0_universal(f: DiagField, spec: UniversalRMatrixSpec, eps: float = GENERIC_EPS) -> DiagField:
    """``-1/2 + A^-1 + (Bbar + lam/2) P_U`` applied to f."""
    lam, q = spec.lam, f.q
    p = u_component(f, lam)
    mult = LaurentSeries({m: c * (spec.bbar(m, q, eps) + lam / 2) for m, c in p.coeffs.items()}, p.lo, p.hi)
    return f.scale(-0.5) + apply_A_inverse(f) + DiagField.u_element(mult, q)


def r0_restricted(f: DiagMatrix, spec: UniversalRMatrixSpec, eps: float = GENERIC_EPS) -> DiagMatrix:
    """The universal r0 at integer size m acting on a finite diagonal of size m."""
    m = f.n
    if abs(spec.lam - m) > 1e-12:
        raise ShapeError("restriction needs lam equal to the block size")
    return restrict_field(r0_universal(DiagField.lift(f), spec, eps), m)
