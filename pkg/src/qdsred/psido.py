"""q-pseudodifference symbols  sum_k a_k(z) D^(base + k)  with D a = a(qz) D.

Symbols of integer base form the algebra where projections and the trace
live; a complex base describes operators of non-integer degree such as
``D^lam + u_1 D^(lam-1) + ...``.  Offsets use the same window discipline as
:mod:`qdsred.laurent`: offsets above ``khi`` vanish, offsets below ``klo`` are
unknown and ``klo=None`` marks an exact (finite) symbol.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping

from .errors import DegreeMismatch, NonGenericParameter, TruncationError
from .laurent import DEFAULT_Q, LaurentSeries, _lo_max, _mul_window, dilate, inner, qpow

GENERIC_EPS = 1e-12
INT_TOL = 1e-12


def integer_part(x: complex) -> int | None:
    """Return x as an int when it is one to within rounding, else None."""
    x = complex(x)
    r = round(x.real)
    if abs(x.imag) < INT_TOL and abs(x.real - r) < INT_TOL:
        return int(r)
    return None


def _exact_zero(a: LaurentSeries) -> bool:
    return a.is_exact and not a.coeffs


@dataclass(frozen=True, eq=False)
class QPsiSymbol:
    """Symbol ``sum_k coeffs[k](z) D^(base + k)``."""

    base: complex = 0.0
    coeffs: Mapping[int, LaurentSeries] = field(default_factory=dict)
    klo: int | None = None
    khi: int | None = None
    q: complex = DEFAULT_Q

    def __post_init__(self):
        clean = {}
        for k, a in self.coeffs.items():
            if not isinstance(a, LaurentSeries):
                a = LaurentSeries.constant(a)
            if self.klo is not None and k < self.klo:
                continue
            if _exact_zero(a):
                continue
            clean[int(k)] = a
        khi = self.khi
        if khi is None:
            khi = max(clean) if clean else (self.klo if self.klo is not None else 0)
        elif clean and max(clean) > khi:
            raise ValueError("coefficient above declared top offset")
        object.__setattr__(self, "coeffs", clean)
        object.__setattr__(self, "khi", int(khi))
        object.__setattr__(self, "base", complex(self.base))

    # constructors
    @classmethod
    def D(cls, power: complex = 1, q: complex = DEFAULT_Q) -> "QPsiSymbol":
        return cls(power, {0: LaurentSeries.constant(1)}, q=q)

    @classmethod
    def function(cls, a: LaurentSeries, q: complex = DEFAULT_Q) -> "QPsiSymbol":
        """Multiplication by a(z), a symbol of degree zero."""
        return cls(0, {0: a}, q=q)

    @classmethod
    def scalar(cls, c: complex, q: complex = DEFAULT_Q) -> "QPsiSymbol":
        return cls(0, {0: LaurentSeries.constant(c)}, q=q)

    @classmethod
    def from_exponents(cls, terms: Mapping[int, LaurentSeries], q: complex = DEFAULT_Q, lo: int | None = None) -> "QPsiSymbol":
        """Integer-graded symbol from a map exponent -> coefficient."""
        return cls(0, dict(terms), lo, None, q)

    @classmethod
    def lax(cls, lam: complex, us: list[LaurentSeries], q: complex = DEFAULT_Q) -> "QPsiSymbol":
        """``D^lam + us[0] D^(lam-1) + us[1] D^(lam-2) + ...`` (exact)."""
        coeffs = {0: LaurentSeries.constant(1)}
        for k, u in enumerate(us, start=1):
            coeffs[-k] = u
        return cls(lam, coeffs, None, 0, q)

    def _new(self, base, coeffs, klo, khi) -> "QPsiSymbol":
        return QPsiSymbol(base, coeffs, klo, khi, self.q)

    # queries
    @property
    def is_exact(self) -> bool:
        return self.klo is None and all(a.is_exact for a in self.coeffs.values())

    def coeff(self, k: int) -> LaurentSeries:
        if k > self.khi:
            return LaurentSeries.zero()
        if self.klo is not None and k < self.klo:
            raise TruncationError(f"offset {k} below known window {self.klo}")
        return self.coeffs.get(k, LaurentSeries.zero())

    def int_base(self) -> int:
        n = integer_part(self.base)
        if n is None:
            raise DegreeMismatch(f"base degree {self.base} is not an integer")
        return n

    def exponent_coeff(self, e: int) -> LaurentSeries:
        """Coefficient of D^e for an integer-graded symbol."""
        return self.coeff(e - self.int_base())

    def regrade(self, base: complex) -> "QPsiSymbol":
        """Same operator written relative to another base differing by an integer."""
        shift = integer_part(self.base - base)
        if shift is None:
            raise DegreeMismatch("bases differ by a non-integer")
        klo = None if self.klo is None else self.klo + shift
        return self._new(base, {k + shift: a for k, a in self.coeffs.items()}, klo, self.khi + shift)

    def max_abs(self) -> float:
        return max((a.max_abs() for a in self.coeffs.values()), default=0.0)

    def truncate(self, klo: int) -> "QPsiSymbol":
        klo = _lo_max(self.klo, klo)
        return self._new(self.base, {k: a for k, a in self.coeffs.items() if k >= klo}, klo, max(self.khi, klo))

    # arithmetic
    def _align(self, other: "QPsiSymbol") -> "QPsiSymbol":
        if other.base == self.base:
            return other
        return other.regrade(self.base)

    def __add__(self, other: "QPsiSymbol") -> "QPsiSymbol":
        other = self._align(other)
        klo = _lo_max(self.klo, other.klo)
        out = dict(self.coeffs)
        for k, a in other.coeffs.items():
            out[k] = out[k] + a if k in out else a
        return self._new(self.base, out, klo, max(self.khi, other.khi))

    def __neg__(self) -> "QPsiSymbol":
        return self.scale(-1)

    def __sub__(self, other: "QPsiSymbol") -> "QPsiSymbol":
        return self + (-other)

    def scale(self, s: complex) -> "QPsiSymbol":
        return self._new(self.base, {k: a.scale(s) for k, a in self.coeffs.items()}, self.klo, self.khi)

    def __mul__(self, other):
        if isinstance(other, QPsiSymbol):
            return mul(self, other)
        return self.scale(other)

    def __rmul__(self, s):
        return self.scale(s)

    def left_mul_function(self, a: LaurentSeries) -> "QPsiSymbol":
        return self._new(self.base, {k: a * c for k, c in self.coeffs.items()}, self.klo, self.khi)

    def dilate_coeffs(self, w: complex) -> "QPsiSymbol":
        """Apply z -> q^w z to every coefficient (conjugation by D^w)."""
        return self._new(self.base, {k: dilate(a, w, self.q) for k, a in self.coeffs.items()}, self.klo, self.khi)

    # text / serialization
    def to_text(self) -> str:
        parts = []
        for k in sorted(self.coeffs, reverse=True):
            a = self.coeffs[k]
            body = " + ".join(f"({c.real:.6g}{c.imag:+.6g}j)z^{m}" for m, c in sorted(a.coeffs.items(), reverse=True))
            e = self.base + k
            es = f"{e.real:.6g}" if e.imag == 0 else f"{e.real:.6g}{e.imag:+.6g}j"
            parts.append(f"[{body}] D^{{{es}}}")
        return " + ".join(parts) or "0"

    def to_records(self) -> dict:
        return {
            "base": [self.base.real, self.base.imag],
            "window": [self.klo, self.khi],
            "coeffs": [[k, self.coeffs[k].to_records()] for k in sorted(self.coeffs)],
        }

    @classmethod
    def from_records(cls, rec: Mapping, q: complex = DEFAULT_Q) -> "QPsiSymbol":
        klo, khi = rec["window"]
        coeffs = {int(k): LaurentSeries.from_records(a) for k, a in rec["coeffs"]}
        return cls(complex(*rec["base"]), coeffs, klo, khi, q)

    def __repr__(self):
        return f"QPsiSymbol({self.to_text()}; offsets>={self.klo})"


def mul(A: QPsiSymbol, B: QPsiSymbol) -> QPsiSymbol:
    """Product using D^s a = a(q^s z) D^s."""
    base = A.base + B.base
    if (A.klo is None and not A.coeffs) or (B.klo is None and not B.coeffs):
        return QPsiSymbol(base, {}, None, 0, A.q)
    klo = _mul_window(A.klo, A.khi, B.klo, B.khi)
    khi = A.khi + B.khi
    out: dict[int, LaurentSeries] = {}
    dil_cache: dict[int, dict[int, LaurentSeries]] = {}
    for k1, a in A.coeffs.items():
        dil = dil_cache.setdefault(k1, {})
        for k2, b in B.coeffs.items():
            k = k1 + k2
            if klo is not None and k < klo:
                continue
            if k2 not in dil:
                dil[k2] = dilate(b, A.base + k1, A.q)
            term = a * dil[k2]
            out[k] = out[k] + term if k in out else term
    return QPsiSymbol(base, out, klo, khi, A.q)


def power(A: QPsiSymbol, m: int) -> QPsiSymbol:
    if m < 0:
        raise ValueError("negative powers need an inverse")
    out = QPsiSymbol.D(0, A.q)
    for _ in range(m):
        out = mul(out, A)
    return out


def commutator(A: QPsiSymbol, B: QPsiSymbol) -> QPsiSymbol:
    return mul(A, B) - mul(B, A)


_PARTS = {
    "plus": lambda e: e > 0,
    "zero": lambda e: e == 0,
    "minus": lambda e: e < 0,
    "plus0": lambda e: e >= 0,
    "minus0": lambda e: e <= 0,
}


def proj(A: QPsiSymbol, part: str) -> QPsiSymbol:
    """Projection of an integer-graded symbol.

    ``part`` is one of ``plus`` (D^e, e > 0), ``zero``, ``minus`` (e < 0),
    ``plus0`` / ``minus0`` (the closed halves) or ``zero_prime`` (the D^0
    part with its constant term removed).
    """
    n = A.int_base()
    if part == "zero_prime":
        a0 = A.coeff(-n)
        a0 = LaurentSeries({m: c for m, c in a0.coeffs.items() if m != 0}, a0.lo, a0.hi)
        return QPsiSymbol(0, {0: a0}, None, 0, A.q)
    keep = _PARTS[part]
    coeffs = {k + n: a for k, a in A.coeffs.items() if keep(k + n)}
    klo = None if A.klo is None else A.klo + n
    if part in ("plus", "zero", "plus0") and klo is not None:
        # everything below the kept range is known to vanish
        floor = {"plus": 1, "zero": 0, "plus0": 0}[part]
        if klo <= floor:
            klo = None
    khi = A.khi + n
    if part in ("zero", "minus", "minus0"):
        khi = min(khi, {"zero": 0, "minus": -1, "minus0": 0}[part])
        if klo is not None and klo > khi:
            raise TruncationError("projection lies entirely below the known window")
    return QPsiSymbol(0, coeffs, klo, khi, A.q)


def tr(A: QPsiSymbol) -> complex:
    """z^0 coefficient of the D^0 coefficient."""
    n = A.int_base()
    return complex(A.coeff(-n).coeff(0))


def tr_product(A: QPsiSymbol, B: QPsiSymbol) -> complex:
    """``tr(A B)`` computed from the D^0 part of the product only."""
    n = integer_part(A.base + B.base)
    if n is None:
        raise DegreeMismatch("product is not integer graded")
    total = 0j
    for k1, a in A.coeffs.items():
        k2 = -n - k1
        if k2 > B.khi:
            continue
        b = B.coeff(k2)
        if not b.coeffs:
            continue
        total += inner(a, dilate(b, A.base + k1, A.q))
    if A.klo is not None:
        # offsets of A below its window pair with B offsets at or below -n - klo
        if -n - A.klo + 1 <= B.khi:
            for k2 in range(-n - A.klo + 1, B.khi + 1):
                if B.coeff(k2).coeffs or not B.coeff(k2).is_exact:
                    raise TruncationError("trace needs offsets of A below its window")
    return total


def inner_psido(A: QPsiSymbol, B: QPsiSymbol) -> complex:
    return tr_product(A, B)


def _is_unit_leading(L: QPsiSymbol) -> bool:
    lead = L.coeff(0)
    return L.khi == 0 and lead.is_exact and set(lead.coeffs) == {0} and abs(lead.coeffs[0] - 1) < 1e-14


def _binomial_series(g: list[complex], a: complex, depth: int) -> list[complex]:
    """Coefficients of (1 + g_1 x + g_2 x^2 + ...)^a up to x^depth."""
    G = [1.0 + 0j] + [g[i] if i < len(g) else 0j for i in range(1, depth + 1)]
    p = [1.0 + 0j] + [0j] * depth
    for n in range(1, depth + 1):
        s = 0j
        for k in range(1, n + 1):
            s += ((a + 1) * k - n) * G[k] * p[n - k]
        p[n] = s / n
    return p


@dataclass(frozen=True)
class Dressing:
    """``L W = W C`` with W = 1 + sum w_s D^-s and C = D^lam (1 + sum gamma_i D^-i).

    The gammas are constants, so every complex power of L with leading term
    D^mu is ``W D^mu (1 + g)^(mu/lam) W^-1``.
    """

    lam: complex
    W: QPsiSymbol
    Winv: QPsiSymbol
    gammas: tuple
    depth: int

    def power(self, mu: complex) -> QPsiSymbol:
        p = _binomial_series(list(self.gammas), mu / self.lam, self.depth)
        q = self.W.q
        C = QPsiSymbol(mu, {-i: LaurentSeries.constant(c) for i, c in enumerate(p)}, -self.depth, 0, q)
        return mul(mul(self.W, C), self.Winv)


def dress(L: QPsiSymbol, depth: int, eps: float = GENERIC_EPS) -> Dressing:
    """Solve ``L W = W C`` offset by offset down to ``-depth``."""
    if not _is_unit_leading(L):
        raise ValueError("leading coefficient must be the constant 1")
    lam = L.base
    q = L.q
    us = [L.coeff(-k) for k in range(depth + 1)]
    ws: list[LaurentSeries] = [LaurentSeries.constant(1)]
    gammas: list[complex] = [1.0 + 0j]
    for s in range(1, depth + 1):
        R = LaurentSeries.zero()
        for k in range(1, s + 1):
            if us[k].coeffs or not us[k].is_exact:
                R = R - us[k] * dilate(ws[s - k], lam - k, q)
        for j in range(1, s):
            R = R + ws[j].scale(gammas[s - j])
        gamma = -complex(R.coeff(0))
        out = {}
        for m, c in R.coeffs.items():
            if m == 0:
                continue
            den = qpow(q, lam * m) - 1
            if abs(den) < eps:
                raise NonGenericParameter(f"1 - q^(lam*{m}) is below epsilon")
            out[m] = c / den
        ws.append(LaurentSeries(out, R.lo))
        gammas.append(gamma)
    W = QPsiSymbol(0, {-s: w for s, w in enumerate(ws)}, -depth, 0, q)
    # right inverse of W, which is also its left inverse
    vs: list[LaurentSeries] = [LaurentSeries.constant(1)]
    for s in range(1, depth + 1):
        acc = LaurentSeries.zero()
        for j in range(1, s + 1):
            if ws[j].coeffs or not ws[j].is_exact:
                acc = acc - ws[j] * dilate(vs[s - j], -j, q)
        vs.append(acc)
    Winv = QPsiSymbol(0, {-s: v for s, v in enumerate(vs)}, -depth, 0, q)
    return Dressing(lam, W, Winv, tuple(gammas), depth)


def root(L: QPsiSymbol, depth: int = 6, eps: float = GENERIC_EPS) -> QPsiSymbol:
    """The unique M = D + v_0 + v_1 D^-1 + ... whose lam-th power is L."""
    return dress(L, depth, eps).power(1)


def spectral_invariant(L: QPsiSymbol, m: int, depth: int | None = None) -> complex:
    """``(lam / m) tr(M^m)`` with M the canonical root of L."""
    if m < 1:
        raise ValueError("m must be positive")
    depth = max(depth or 0, m)
    M = root(L, depth)
    return complex(L.base) / m * tr(power(M, m))


def lax_rhs(L: QPsiSymbol, m: int, depth: int | None = None) -> QPsiSymbol:
    """``[P_(+)(M^m), L]``, the m-th flow of the hierarchy."""
    depth = max(depth or 0, m + 1)
    Mm = power(root(L, depth), m)
    return commutator(proj(Mm, "plus0"), L)


@dataclass(frozen=True)
class FunctionalSpec:
    """Observable on operators ``D^lam + u_1 D^(lam-1) + ...``.

    ``elementary``: ``A -> tr(z^-j A D^-i)`` with args ``(i, j)``.
    ``coefficient``: the z^j coefficient of u_k with args ``(k, j)``.
    ``spectral``: ``H_m`` with args ``(m,)``.
    """

    kind: str
    args: tuple

    def __post_init__(self):
        if self.kind not in ("elementary", "coefficient", "spectral"):
            raise ValueError(f"unknown functional kind {self.kind}")
        if self.kind == "spectral" and (len(self.args) != 1 or self.args[0] < 1):
            raise ValueError("spectral functional needs one positive integer")
        if self.kind != "spectral" and len(self.args) != 2:
            raise ValueError(f"{self.kind} functional needs two integers")

    @classmethod
    def elementary(cls, i: int, j: int) -> "FunctionalSpec":
        return cls("elementary", (int(i), int(j)))

    @classmethod
    def coefficient(cls, k: int, j: int) -> "FunctionalSpec":
        return cls("coefficient", (int(k), int(j)))

    @classmethod
    def spectral(cls, m: int) -> "FunctionalSpec":
        return cls("spectral", (int(m),))

    def label(self) -> str:
        return f"{self.kind}({','.join(str(a) for a in self.args)})"


def evaluate_functional(phi: FunctionalSpec, L: QPsiSymbol) -> complex:
    if phi.kind == "spectral":
        return spectral_invariant(L, phi.args[0])
    if phi.kind == "coefficient":
        k, j = phi.args
        return complex(L.coeff(-k).coeff(j))
    i, j = phi.args
    zj = QPsiSymbol.function(LaurentSeries.monomial(-j), L.q)
    return tr(mul(mul(zj, L), QPsiSymbol.D(-i, L.q)))


def differential(phi: FunctionalSpec, L: QPsiSymbol) -> QPsiSymbol:
    """Gradient dphi with exponents above -lam only, so that the derivative
    of phi along X = sum x_k D^(lam-k) (k >= 1) is ``tr(X dphi)``."""
    lam = L.base
    q = L.q
    if phi.kind == "coefficient":
        k, j = phi.args
        c = qpow(q, (lam - k) * j)
        return QPsiSymbol(k - lam, {0: LaurentSeries.monomial(-j, c)}, None, 0, q)
    if phi.kind == "elementary":
        i, j = phi.args
        n = integer_part(lam)
        if n is None:
            raise DegreeMismatch("elementary functionals need an integer degree")
        if i >= n:
            return QPsiSymbol(-i, {}, None, 0, q)
        return QPsiSymbol(-i, {0: LaurentSeries.monomial(-j, qpow(q, i * j))}, None, 0, q)
    m = phi.args[0]
    G = dress(L, m).power(m - lam)
    # keep D^(m - lam + s) for s > -m, the part seen by tangent vectors
    return QPsiSymbol(m - lam, {s: a for s, a in G.coeffs.items() if s > -m}, None, 0, q)
