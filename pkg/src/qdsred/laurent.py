"""Truncated formal Laurent series in z with bounded-above support.

A series is stored sparsely together with a window ``(lo, hi)``:

* every coefficient with exponent ``> hi`` vanishes (series in C((1/z)) are
  bounded above);
* coefficients with exponents in ``[lo, hi]`` are known exactly;
* coefficients below ``lo`` are unknown.  ``lo=None`` marks an exact Laurent
  polynomial with nothing unknown.

Arithmetic shrinks windows to the largest range on which the result is exact,
so a truncated input can never produce a silently wrong residue.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field
from typing import Any, Iterable, Mapping

from .errors import EmptyWindow, TruncationError

DEFAULT_Q = 0.4
DEFAULT_LAMBDA = complex(2.3, -0.7)


def qpow(q: complex, w: complex) -> complex:
    """Return q**w computed as exp(w log q) on the principal branch."""
    if w == 0:
        return 1.0 + 0.0j
    return cmath.exp(complex(w) * cmath.log(q))


def _lo_max(a: int | None, b: int | None) -> int | None:
    if a is None:
        return b
    if b is None:
        return a
    return max(a, b)


def _mul_window(alo, ahi, blo, bhi) -> int | None:
    cands = []
    if alo is not None:
        cands.append(alo + bhi)
    if blo is not None:
        cands.append(ahi + blo)
    return max(cands) if cands else None


@dataclass(frozen=True, eq=False)
class WindowedSeries:
    """Sparse series with window bookkeeping; coefficient type is generic."""

    coeffs: Mapping[int, Any] = field(default_factory=dict)
    lo: int | None = None
    hi: int | None = None

    def __post_init__(self):
        clean = {}
        for m, c in self.coeffs.items():
            m = int(m)
            c = self._coerce(c)
            if self._is_zero(c):
                continue
            if self.lo is not None and m < self.lo:
                continue
            clean[m] = c
        hi = self.hi
        if hi is None:
            hi = max(clean) if clean else (self.lo if self.lo is not None else 0)
        elif clean and max(clean) > hi:
            raise ValueError(f"coefficient at z^{max(clean)} above declared top {hi}")
        if self.lo is not None and self.lo > hi:
            raise EmptyWindow(f"window ({self.lo}, {hi}) is empty")
        object.__setattr__(self, "coeffs", clean)
        object.__setattr__(self, "hi", int(hi))

    # coefficient-type hooks
    def _coerce(self, c):
        return c

    def _is_zero(self, c) -> bool:
        return c == 0

    def _zero_coeff(self):
        return 0

    def _new(self, coeffs, lo, hi):
        return type(self)(coeffs, lo, hi)

    # window queries
    @property
    def window(self) -> tuple[int | None, int]:
        return (self.lo, self.hi)

    @property
    def is_exact(self) -> bool:
        return self.lo is None

    def known(self, m: int) -> bool:
        return m > self.hi or self.lo is None or m >= self.lo

    def coeff(self, m: int):
        if not self.known(m):
            raise TruncationError(f"z^{m} is below the known window {self.window}")
        return self.coeffs.get(m, self._zero_coeff())

    def exponents(self) -> list[int]:
        return sorted(self.coeffs)

    def truncate(self, lo: int) -> "WindowedSeries":
        """Forget every coefficient below ``lo``."""
        new_lo = _lo_max(self.lo, lo)
        hi = max(self.hi, new_lo)
        return self._new({m: c for m, c in self.coeffs.items() if m >= new_lo}, new_lo, hi)

    # arithmetic
    def __add__(self, other):
        if not isinstance(other, WindowedSeries):
            return NotImplemented
        lo = _lo_max(self.lo, other.lo)
        hi = max(self.hi, other.hi)
        out = dict(self.coeffs)
        for m, c in other.coeffs.items():
            out[m] = out[m] + c if m in out else c
        return self._new(out, lo, hi)

    def __neg__(self):
        return self._new({m: -c for m, c in self.coeffs.items()}, self.lo, self.hi)

    def __sub__(self, other):
        if not isinstance(other, WindowedSeries):
            return NotImplemented
        return self + (-other)

    def scale(self, s) -> "WindowedSeries":
        return self._new({m: c * s for m, c in self.coeffs.items()}, self.lo, self.hi)

    def __mul__(self, other):
        if not isinstance(other, WindowedSeries):
            return self.scale(other)
        if self.is_exact and not self.coeffs:
            return self._new({}, None, 0)
        if other.is_exact and not other.coeffs:
            return self._new({}, None, 0)
        lo = _mul_window(self.lo, self.hi, other.lo, other.hi)
        hi = self.hi + other.hi
        if lo is not None and lo > hi:
            raise EmptyWindow("product has no exactly known coefficient")
        out: dict[int, Any] = {}
        for m1, c1 in self.coeffs.items():
            for m2, c2 in other.coeffs.items():
                e = m1 + m2
                if lo is not None and e < lo:
                    continue
                p = c1 * c2
                out[e] = out[e] + p if e in out else p
        return self._new(out, lo, hi)

    def __rmul__(self, s):
        return self.scale(s)

    def map_coeffs(self, fn) -> "WindowedSeries":
        """Apply ``fn(m, c)`` to every stored coefficient."""
        return self._new({m: fn(m, c) for m, c in self.coeffs.items()}, self.lo, self.hi)


class LaurentSeries(WindowedSeries):
    """Series with complex coefficients, the scalar substrate."""

    def _coerce(self, c):
        c = complex(c)
        if not (math.isfinite(c.real) and math.isfinite(c.imag)):
            raise ValueError("non-finite coefficient")
        return c

    def _zero_coeff(self):
        return 0j

    @classmethod
    def monomial(cls, m: int, c: complex = 1.0) -> "LaurentSeries":
        return cls({m: c})

    @classmethod
    def constant(cls, c: complex) -> "LaurentSeries":
        return cls({0: c})

    @classmethod
    def zero(cls) -> "LaurentSeries":
        return cls({})

    def __repr__(self):
        terms = " + ".join(f"({c:.6g})z^{m}" for m, c in sorted(self.coeffs.items(), reverse=True))
        return f"LaurentSeries({terms or '0'}; window={self.window})"

    def max_abs(self) -> float:
        return max((abs(c) for c in self.coeffs.values()), default=0.0)

    def to_records(self) -> dict:
        """Serialize as (exponent, re, im) triples plus the window pair."""
        return {
            "terms": [[m, c.real, c.imag] for m, c in sorted(self.coeffs.items())],
            "window": [self.lo, self.hi],
        }

    @classmethod
    def from_records(cls, rec: Mapping) -> "LaurentSeries":
        lo, hi = rec.get("window", [None, None])
        return cls({int(m): complex(re, im) for m, re, im in rec["terms"]}, lo, hi)


def dilate(a: LaurentSeries, w: complex, q: complex = DEFAULT_Q) -> LaurentSeries:
    """Substitute z -> q^w z: coefficient m is multiplied by q^(w m)."""
    if w == 0:
        return a
    return a.map_coeffs(lambda m, c: c * qpow(q, w * m))


def res(a: LaurentSeries) -> complex:
    """The z^0 coefficient (formal integral against dz/z)."""
    return complex(a.coeff(0))


def inner(a: LaurentSeries, b: LaurentSeries) -> complex:
    """Sum of a_m b_(-m); raises if a contributing pair is not known."""
    if a.lo is not None and -b.hi < a.lo:
        raise TruncationError("inner product needs coefficients of a below its window")
    if b.lo is not None and -a.hi < b.lo:
        raise TruncationError("inner product needs coefficients of b below its window")
    total = 0j
    for m, c in a.coeffs.items():
        d = b.coeffs.get(-m)
        if d is not None:
            total += c * d
    return total


def add(a: LaurentSeries, b: LaurentSeries) -> LaurentSeries:
    return a + b


def mul(a: LaurentSeries, b: LaurentSeries) -> LaurentSeries:
    return a * b


def scale(a: LaurentSeries, s: complex) -> LaurentSeries:
    return a.scale(s)


def max_abs_diff(a: LaurentSeries, b: LaurentSeries) -> float:
    """Largest coefficient of a - b on their common window."""
    return (a - b).max_abs()


def from_pairs(pairs: Iterable[tuple[int, complex]], lo: int | None = None) -> LaurentSeries:
    out: dict[int, complex] = {}
    for m, c in pairs:
        out[m] = out.get(m, 0) + c
    return LaurentSeries(out, lo)
