"""Functions built from w, q^w and q^-w, and their two-variable tensors.

An :class:`A0Function` is a finite sum of basis terms ``w^m q^(n w)`` keyed by
``(m, n)``.  Such a function is determined by its values at large integers,
which is what makes the partial-sum interpolation below well defined.
:class:`A0Function2` holds functions of two variables ``(w, t)`` in the tensor
basis ``w^m1 q^(n1 w) t^m2 q^(n2 t)``.
"""

from __future__ import annotations

import math
from collections import defaultdict
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Iterable, Mapping

import numpy as np

from .errors import NonGenericParameter
from .laurent import DEFAULT_Q, LaurentSeries, WindowedSeries, qpow

CLEAN_TOL = 1e-14
MAX_POWER = 32
GENERIC_EPS = 1e-12


def _clean(terms: Mapping) -> dict:
    # only exact zeros are dropped: a tiny coefficient may multiply a basis
    # function that is huge at the rows where it is evaluated
    return {k: complex(v) for k, v in terms.items() if v != 0}


def _accumulate(pairs: Iterable) -> dict:
    out: dict = defaultdict(complex)
    for k, v in pairs:
        out[k] += v
    return _clean(out)


@dataclass(frozen=True, eq=False)
class A0Function:
    """Finite combination of ``w^m q^(n w)``; terms map ``(m, n)`` to a coefficient."""

    terms: Mapping[tuple[int, int], complex] = field(default_factory=dict)
    q: complex = DEFAULT_Q

    def __post_init__(self):
        for m, _ in self.terms:
            if m < 0:
                raise ValueError("polynomial degree must be non-negative")
        object.__setattr__(self, "terms", _clean({(int(m), int(n)): c for (m, n), c in self.terms.items()}))

    # constructors
    @classmethod
    def zeta(cls, m: int, n: int, q: complex = DEFAULT_Q, c: complex = 1.0) -> "A0Function":
        return cls({(m, n): c}, q)

    @classmethod
    def const(cls, c: complex, q: complex = DEFAULT_Q) -> "A0Function":
        return cls({(0, 0): c}, q)

    @classmethod
    def zero(cls, q: complex = DEFAULT_Q) -> "A0Function":
        return cls({}, q)

    @classmethod
    def poly(cls, coeffs: Iterable[complex], q: complex = DEFAULT_Q) -> "A0Function":
        """Polynomial in w with coefficients listed from the constant term up."""
        return cls({(k, 0): c for k, c in enumerate(coeffs)}, q)

    def _new(self, terms) -> "A0Function":
        return A0Function(terms, self.q)

    # queries
    @property
    def deg(self) -> int:
        return max((m + abs(n) for m, n in self.terms), default=0)

    def is_zero(self, tol: float = CLEAN_TOL) -> bool:
        return all(abs(c) <= tol for c in self.terms.values())

    def max_abs(self) -> float:
        return max((abs(c) for c in self.terms.values()), default=0.0)

    def __call__(self, w: complex) -> complex:
        return self.eval(w)

    def eval(self, w: complex) -> complex:
        total = 0j
        for (m, n), c in self.terms.items():
            total += c * (complex(w) ** m if m else 1.0) * qpow(self.q, n * w)
        return total

    # arithmetic
    def __add__(self, other):
        if isinstance(other, A0Function):
            return self._new(_accumulate(list(self.terms.items()) + list(other.terms.items())))
        if isinstance(other, (int, float, complex)):
            return self + A0Function.const(other, self.q)
        return NotImplemented

    __radd__ = __add__

    def __neg__(self):
        return self._new({k: -c for k, c in self.terms.items()})

    def __sub__(self, other):
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def scale(self, s: complex) -> "A0Function":
        return self._new({k: c * s for k, c in self.terms.items()})

    def __mul__(self, other):
        if isinstance(other, A0Function):
            out: dict = defaultdict(complex)
            for (m1, n1), c1 in self.terms.items():
                for (m2, n2), c2 in other.terms.items():
                    out[(m1 + m2, n1 + n2)] += c1 * c2
            return self._new(_clean(out))
        if isinstance(other, (int, float, complex, np.number)):
            return self.scale(other)
        return NotImplemented

    def __rmul__(self, other):
        if isinstance(other, (int, float, complex, np.number)):
            return self.scale(other)
        return NotImplemented

    def mul_qpow(self, n: int) -> "A0Function":
        """Multiply by q^(n w)."""
        return self._new({(m, k + n): c for (m, k), c in self.terms.items()})

    def shift(self, c: complex) -> "A0Function":
        """Return g(w) = f(w + c), expanded back into the basis."""
        if c == 0:
            return self
        out: dict = defaultdict(complex)
        for (m, n), a in self.terms.items():
            pre = a * qpow(self.q, n * c)
            for k in range(m + 1):
                out[(k, n)] += pre * math.comb(m, k) * complex(c) ** (m - k)
        return self._new(_clean(out))

    def dilate_const(self, s: complex) -> "A0Function":
        return self.scale(s)

    # serialization
    def to_records(self) -> list:
        return [[m, n, c.real, c.imag] for (m, n), c in sorted(self.terms.items())]

    @classmethod
    def from_records(cls, recs: Iterable, q: complex = DEFAULT_Q) -> "A0Function":
        return cls({(int(m), int(n)): complex(re, im) for m, n, re, im in recs}, q)

    def __repr__(self):
        parts = [f"({c:.6g})w^{m}q^({n}w)" for (m, n), c in sorted(self.terms.items())]
        return "A0Function(" + (" + ".join(parts) or "0") + ")"


def eval_a0(f: A0Function, w: complex) -> complex:
    return f.eval(w)


def is_zero(f: A0Function, tol: float = CLEAN_TOL) -> bool:
    return f.is_zero(tol)


def sampled_zero_check(f: A0Function, start: int = 10, tol: float = 1e-9) -> tuple[bool, float]:
    """Structural zero test cross-checked by evaluation at consecutive integers.

    Returns ``(structural, max_sample)``; the number of samples exceeds the
    dimension of the span of the stored basis terms, so a nonzero function
    cannot vanish on all of them.
    """
    count = len(f.terms) + f.deg + 2
    worst = 0.0
    for k in range(count):
        v = f.eval(start + k)
        worst = max(worst, abs(v))
    structural = f.is_zero()
    if structural and worst > tol:
        raise AssertionError("structural zero but nonzero samples")
    return structural, worst


@lru_cache(maxsize=4096)
def _partial_sum_basis(m: int, k: int, q: complex, eps: float) -> tuple:
    """Closed form of sum_{i<N} i^m q^(k i) as ((power, q-exponent), coeff) pairs.

    For c = q^k != 1 we look for a polynomial a(x) of degree m with
    c a(x+1) - a(x) = x^m, so that the sum equals a(N) c^N - a(0).  For
    k = 0 the polynomial has degree m + 1 and solves a(x+1) - a(x) = x^m
    with a(0) = 0.  Both systems are triangular in the monomial basis.
    """
    if m > MAX_POWER:
        raise ValueError(f"polynomial degree {m} exceeds the supported maximum {MAX_POWER}")
    if k == 0:
        a = [0.0] * (m + 2)
        for j in range(m, -1, -1):
            rhs = (1.0 if j == m else 0.0) - sum(a[i] * math.comb(i, j) for i in range(j + 2, m + 2))
            a[j + 1] = rhs / (j + 1)
        return tuple(((i, 0), complex(a[i])) for i in range(1, m + 2) if a[i] != 0)
    c = qpow(q, k)
    if abs(c - 1) < eps:
        raise NonGenericParameter(f"q^{k} is within {eps} of 1")
    a = [0j] * (m + 1)
    for j in range(m, -1, -1):
        rhs = (1.0 if j == m else 0.0) - c * sum(a[i] * math.comb(i, j) for i in range(j + 1, m + 1))
        a[j] = rhs / (c - 1)
    out = [((i, k), a[i]) for i in range(m + 1)]
    out.append(((0, 0), -a[0]))
    return tuple(out)


def interpolate_partial_sum(f: A0Function, l: int, eps: float = GENERIC_EPS) -> A0Function:
    """Return F in the same algebra with F(N) = sum_{i=0}^{N-1} f(i) q^(i l) for all N >= 1."""
    out: dict = defaultdict(complex)
    for (m, n), c in f.terms.items():
        for key, a in _partial_sum_basis(m, n + l, complex(f.q), eps):
            out[key] += c * a
    return A0Function(_clean(out), f.q)


def brute_partial_sum(f: A0Function, l: int, N: int) -> complex:
    """Direct summation, the oracle for :func:`interpolate_partial_sum`."""
    return sum((f.eval(i) * qpow(f.q, i * l) for i in range(N)), 0j)


Key2 = tuple[int, int, int, int]


@dataclass(frozen=True, eq=False)
class A0Function2:
    """Function of (w, t); terms map ``(m1, n1, m2, n2)`` to the coefficient of
    ``w^m1 q^(n1 w) t^m2 q^(n2 t)``."""

    terms: Mapping[Key2, complex] = field(default_factory=dict)
    q: complex = DEFAULT_Q

    def __post_init__(self):
        object.__setattr__(self, "terms", _clean({tuple(int(x) for x in k): c for k, c in self.terms.items()}))

    def _new(self, terms) -> "A0Function2":
        return A0Function2(terms, self.q)

    @classmethod
    def zero(cls, q: complex = DEFAULT_Q) -> "A0Function2":
        return cls({}, q)

    @classmethod
    def const(cls, c: complex, q: complex = DEFAULT_Q) -> "A0Function2":
        return cls({(0, 0, 0, 0): c}, q)

    @classmethod
    def from_w(cls, f: A0Function) -> "A0Function2":
        return cls({(m, n, 0, 0): c for (m, n), c in f.terms.items()}, f.q)

    @classmethod
    def from_t(cls, f: A0Function) -> "A0Function2":
        return cls({(0, 0, m, n): c for (m, n), c in f.terms.items()}, f.q)

    @classmethod
    def outer(cls, f: A0Function, g: A0Function) -> "A0Function2":
        """f(w) g(t)."""
        return cls({(m1, n1, m2, n2): a * b for (m1, n1), a in f.terms.items() for (m2, n2), b in g.terms.items()}, f.q)

    def is_zero(self, tol: float = CLEAN_TOL) -> bool:
        return all(abs(c) <= tol for c in self.terms.values())

    def max_abs(self) -> float:
        return max((abs(c) for c in self.terms.values()), default=0.0)

    def eval(self, w: complex, t: complex) -> complex:
        total = 0j
        for (m1, n1, m2, n2), c in self.terms.items():
            total += c * complex(w) ** m1 * complex(t) ** m2 * qpow(self.q, n1 * w + n2 * t)
        return total

    def abs_eval(self, w: complex, t: complex) -> float:
        """Sum of the absolute values of the terms at (w, t), the scale of a cancellation."""
        q = self.q
        return sum(
            abs(c) * abs(w) ** m1 * abs(qpow(q, n1 * w)) * abs(t) ** m2 * abs(qpow(q, n2 * t))
            for (m1, n1, m2, n2), c in self.terms.items()
        )

    def eval_w(self, w: complex) -> A0Function:
        """Fix w; the result is a function of t."""
        out: dict = defaultdict(complex)
        for (m1, n1, m2, n2), c in self.terms.items():
            out[(m2, n2)] += c * complex(w) ** m1 * qpow(self.q, n1 * w)
        return A0Function(_clean(out), self.q)

    def eval_t(self, t: complex) -> A0Function:
        """Fix t; the result is a function of w."""
        out: dict = defaultdict(complex)
        for (m1, n1, m2, n2), c in self.terms.items():
            out[(m1, n1)] += c * complex(t) ** m2 * qpow(self.q, n2 * t)
        return A0Function(_clean(out), self.q)

    def __add__(self, other):
        if isinstance(other, A0Function2):
            return self._new(_accumulate(list(self.terms.items()) + list(other.terms.items())))
        return NotImplemented

    def __neg__(self):
        return self._new({k: -c for k, c in self.terms.items()})

    def __sub__(self, other):
        return self + (-other)

    def scale(self, s: complex) -> "A0Function2":
        return self._new({k: c * s for k, c in self.terms.items()})

    def __mul__(self, other):
        if isinstance(other, A0Function2):
            out: dict = defaultdict(complex)
            for (a1, b1, a2, b2), c1 in self.terms.items():
                for (m1, n1, m2, n2), c2 in other.terms.items():
                    out[(a1 + m1, b1 + n1, a2 + m2, b2 + n2)] += c1 * c2
            return self._new(_clean(out))
        if isinstance(other, (int, float, complex, np.number)):
            return self.scale(other)
        return NotImplemented

    def __rmul__(self, other):
        if isinstance(other, (int, float, complex, np.number)):
            return self.scale(other)
        return NotImplemented

    def _shift_slot(self, c: complex, slot: int) -> "A0Function2":
        if c == 0:
            return self
        out: dict = defaultdict(complex)
        for key, a in self.terms.items():
            m, n = key[2 * slot], key[2 * slot + 1]
            pre = a * qpow(self.q, n * c)
            for k in range(m + 1):
                new = list(key)
                new[2 * slot] = k
                out[tuple(new)] += pre * math.comb(m, k) * complex(c) ** (m - k)
        return self._new(_clean(out))

    def shift_w(self, c: complex) -> "A0Function2":
        """(w, t) -> f(w + c, t)."""
        return self._shift_slot(c, 0)

    def shift_t(self, c: complex) -> "A0Function2":
        """(w, t) -> f(w, t + c)."""
        return self._shift_slot(c, 1)

    def diag_eval(self, offset: complex = 0) -> A0Function:
        """Substitute t = w + offset; the result is a function of w."""
        out: dict = defaultdict(complex)
        for (m1, n1, m2, n2), a in self.terms.items():
            pre = a * qpow(self.q, n2 * offset)
            for k in range(m2 + 1):
                out[(m1 + k, n1 + n2)] += pre * math.comb(m2, k) * complex(offset) ** (m2 - k)
        return A0Function(_clean(out), self.q)

    def along_t(self, lag: int) -> A0Function:
        """Substitute w = t - lag; the result is a function of t."""
        return self.diag_eval(lag).shift(-lag)

    def ips_w(self, l: int, eps: float = GENERIC_EPS) -> "A0Function2":
        """Partial-sum interpolation in w with weight q^(i l), t held as a parameter."""
        groups: dict = defaultdict(dict)
        for (m1, n1, m2, n2), c in self.terms.items():
            groups[(m2, n2)][(m1, n1)] = c
        out: dict = defaultdict(complex)
        for (m2, n2), part in groups.items():
            F = interpolate_partial_sum(A0Function(part, self.q), l, eps)
            for (m1, n1), c in F.terms.items():
                out[(m1, n1, m2, n2)] += c
        return self._new(_clean(out))

    def mul_qpow_w(self, n: int) -> "A0Function2":
        return self._new({(m1, n1 + n, m2, n2): c for (m1, n1, m2, n2), c in self.terms.items()})

    def to_records(self) -> list:
        return [[*k, c.real, c.imag] for k, c in sorted(self.terms.items())]

    @classmethod
    def from_records(cls, recs: Iterable, q: complex = DEFAULT_Q) -> "A0Function2":
        return cls({tuple(int(x) for x in r[:4]): complex(r[4], r[5]) for r in recs}, q)


def diag_eval(f: A0Function2, offset: complex = 0) -> A0Function:
    return f.diag_eval(offset)


@dataclass(frozen=True, eq=False)
class A0Laurent(WindowedSeries):
    """Laurent series in z whose coefficients are functions of one variable."""

    q: complex = DEFAULT_Q

    def _coerce(self, c):
        if isinstance(c, A0Function):
            return c
        return A0Function.const(c, self.q)

    def _is_zero(self, c) -> bool:
        return not c.terms

    def _zero_coeff(self):
        return A0Function.zero(self.q)

    def _new(self, coeffs, lo, hi):
        return A0Laurent(coeffs, lo, hi, self.q)

    def eval(self, w: complex) -> LaurentSeries:
        return LaurentSeries({m: f.eval(w) for m, f in self.coeffs.items()}, self.lo, self.hi)

    def shift(self, c: complex) -> "A0Laurent":
        return self.map_coeffs(lambda m, f: f.shift(c))

    def dilate(self, s: complex) -> "A0Laurent":
        """z -> q^s z."""
        return self.map_coeffs(lambda m, f: f.scale(qpow(self.q, s * m)))

    def max_abs(self) -> float:
        return max((f.max_abs() for f in self.coeffs.values()), default=0.0)

    @classmethod
    def from_laurent(cls, a: LaurentSeries, q: complex = DEFAULT_Q) -> "A0Laurent":
        return cls({m: A0Function.const(c, q) for m, c in a.coeffs.items()}, a.lo, a.hi, q)

    def to_records(self) -> dict:
        return {"window": [self.lo, self.hi], "coeffs": [[m, f.to_records()] for m, f in sorted(self.coeffs.items())]}

    @classmethod
    def from_records(cls, rec: Mapping, q: complex = DEFAULT_Q) -> "A0Laurent":
        lo, hi = rec.get("window", [None, None])
        return cls({int(m): A0Function.from_records(f, q) for m, f in rec["coeffs"]}, lo, hi, q)


@dataclass(frozen=True, eq=False)
class A0Laurent2(WindowedSeries):
    """Laurent series in z whose coefficients are functions of (w, t)."""

    q: complex = DEFAULT_Q

    def _coerce(self, c):
        if isinstance(c, A0Function2):
            return c
        return A0Function2.const(c, self.q)

    def _is_zero(self, c) -> bool:
        return not c.terms

    def _zero_coeff(self):
        return A0Function2.zero(self.q)

    def _new(self, coeffs, lo, hi):
        return A0Laurent2(coeffs, lo, hi, self.q)

    def eval(self, w: complex, t: complex) -> LaurentSeries:
        return LaurentSeries({m: f.eval(w, t) for m, f in self.coeffs.items()}, self.lo, self.hi)

    def eval_t(self, t: complex) -> A0Laurent:
        return A0Laurent({m: f.eval_t(t) for m, f in self.coeffs.items()}, self.lo, self.hi, self.q)

    def eval_w(self, w: complex) -> A0Laurent:
        return A0Laurent({m: f.eval_w(w) for m, f in self.coeffs.items()}, self.lo, self.hi, self.q)

    def shift_w(self, c: complex) -> "A0Laurent2":
        return self.map_coeffs(lambda m, f: f.shift_w(c))

    def shift_t(self, c: complex) -> "A0Laurent2":
        return self.map_coeffs(lambda m, f: f.shift_t(c))

    def dilate(self, s: complex) -> "A0Laurent2":
        return self.map_coeffs(lambda m, f: f.scale(qpow(self.q, s * m)))

    def diag_eval(self, offset: complex = 0) -> A0Laurent:
        return A0Laurent({m: f.diag_eval(offset) for m, f in self.coeffs.items()}, self.lo, self.hi, self.q)

    def max_abs(self) -> float:
        return max((f.max_abs() for f in self.coeffs.values()), default=0.0)

    def to_records(self) -> dict:
        return {"window": [self.lo, self.hi], "coeffs": [[m, f.to_records()] for m, f in sorted(self.coeffs.items())]}

    @classmethod
    def from_records(cls, rec: Mapping, q: complex = DEFAULT_Q) -> "A0Laurent2":
        lo, hi = rec.get("window", [None, None])
        return cls({int(m): A0Function2.from_records(f, q) for m, f in rec["coeffs"]}, lo, hi, q)

    @classmethod
    def from_w(cls, a: A0Laurent) -> "A0Laurent2":
        return cls({m: A0Function2.from_w(f) for m, f in a.coeffs.items()}, a.lo, a.hi, a.q)

    @classmethod
    def from_t(cls, a: A0Laurent) -> "A0Laurent2":
        return cls({m: A0Function2.from_t(f) for m, f in a.coeffs.items()}, a.lo, a.hi, a.q)

    @classmethod
    def const(cls, c: complex, q: complex = DEFAULT_Q) -> "A0Laurent2":
        return cls({0: A0Function2.const(c, q)}, None, 0, q)
