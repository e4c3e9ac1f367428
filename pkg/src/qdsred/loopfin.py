"""Finite loop algebras: n x n matrices of Laurent series.

Contains the q-gauge action and the reduction of ``Lambda_n + upper`` to
companion form, the diagonal operators (cyclic shift, projection onto the
dilation-covariant diagonals ``U_n``), the Fourier eigenbasis of
``h tau`` and the finite diagonal r-matrix together with the matrix-side
Poisson bracket.
"""

from __future__ import annotations

import cmath
from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np

from .errors import NonGenericParameter, ShapeError
from .laurent import DEFAULT_Q, LaurentSeries, _lo_max, dilate, inner, qpow

GENERIC_EPS = 1e-12

_ZERO = LaurentSeries.zero()
_ONE = LaurentSeries.constant(1)


def _common_lo(series: Sequence[LaurentSeries]) -> int | None:
    lo = None
    for s in series:
        lo = _lo_max(lo, s.lo)
    return lo


def _normalize(series: Sequence[LaurentSeries]) -> list[LaurentSeries]:
    lo = _common_lo(series)
    if lo is None:
        return list(series)
    return [s.truncate(lo) for s in series]


@dataclass(frozen=True, eq=False)
class LoopMatrix:
    """Square matrix of Laurent series; all entries share one lower window edge."""

    entries: tuple
    q: complex = DEFAULT_Q

    def __post_init__(self):
        rows = [tuple(r) for r in self.entries]
        n = len(rows)
        if n == 0 or any(len(r) != n for r in rows):
            raise ShapeError("loop matrix must be square and non-empty")
        flat = _normalize([e if isinstance(e, LaurentSeries) else LaurentSeries.constant(e) for r in rows for e in r])
        object.__setattr__(self, "entries", tuple(tuple(flat[i * n:(i + 1) * n]) for i in range(n)))

    @property
    def n(self) -> int:
        return len(self.entries)

    def __getitem__(self, ij) -> LaurentSeries:
        i, j = ij
        return self.entries[i][j]

    # constructors
    @classmethod
    def from_function(cls, n: int, fn, q: complex = DEFAULT_Q) -> "LoopMatrix":
        return cls(tuple(tuple(fn(i, j) for j in range(n)) for i in range(n)), q)

    @classmethod
    def zeros(cls, n: int, q: complex = DEFAULT_Q) -> "LoopMatrix":
        return cls.from_function(n, lambda i, j: _ZERO, q)

    @classmethod
    def identity(cls, n: int, q: complex = DEFAULT_Q) -> "LoopMatrix":
        return cls.from_function(n, lambda i, j: _ONE if i == j else _ZERO, q)

    @classmethod
    def shift_matrix(cls, n: int, q: complex = DEFAULT_Q) -> "LoopMatrix":
        """Lambda_n: ones on the subdiagonal."""
        return cls.from_function(n, lambda i, j: _ONE if i == j + 1 else _ZERO, q)

    @classmethod
    def companion(cls, us: Sequence[LaurentSeries], q: complex = DEFAULT_Q) -> "LoopMatrix":
        """First row ``-u_1 ... -u_n`` and ones on the subdiagonal."""
        n = len(us)
        return cls.from_function(n, lambda i, j: -us[j] if i == 0 else (_ONE if i == j + 1 else _ZERO), q)

    # arithmetic
    def _map(self, fn) -> "LoopMatrix":
        return LoopMatrix(tuple(tuple(fn(i, j, self[i, j]) for j in range(self.n)) for i in range(self.n)), self.q)

    def __add__(self, other: "LoopMatrix") -> "LoopMatrix":
        return self._map(lambda i, j, a: a + other[i, j])

    def __sub__(self, other: "LoopMatrix") -> "LoopMatrix":
        return self._map(lambda i, j, a: a - other[i, j])

    def __neg__(self) -> "LoopMatrix":
        return self.scale(-1)

    def scale(self, s: complex) -> "LoopMatrix":
        return self._map(lambda i, j, a: a.scale(s))

    def __matmul__(self, other: "LoopMatrix") -> "LoopMatrix":
        n = self.n
        if other.n != n:
            raise ShapeError("size mismatch")

        def entry(i, j, _):
            acc = _ZERO
            for k in range(n):
                a, b = self[i, k], other[k, j]
                if (a.coeffs or not a.is_exact) and (b.coeffs or not b.is_exact):
                    acc = acc + a * b
            return acc

        return self._map(entry)

    def dilate(self, w: complex = 1) -> "LoopMatrix":
        """Entrywise z -> q^w z."""
        return self._map(lambda i, j, a: dilate(a, w, self.q))

    def max_abs(self) -> float:
        return max(a.max_abs() for r in self.entries for a in r)

    def trace_series(self) -> LaurentSeries:
        acc = _ZERO
        for i in range(self.n):
            acc = acc + self[i, i]
        return acc

    def diagonal(self) -> "DiagMatrix":
        return DiagMatrix(tuple(self[i, i] for i in range(self.n)), self.q)

    def part(self, which: str) -> "LoopMatrix":
        """``upper`` (strict), ``lower`` (strict) or ``diag`` component."""
        keep = {"upper": lambda i, j: j > i, "lower": lambda i, j: j < i, "diag": lambda i, j: i == j}[which]
        return self._map(lambda i, j, a: a if keep(i, j) else _ZERO)

    def is_unipotent_upper(self, tol: float = 0.0) -> bool:
        for i in range(self.n):
            for j in range(self.n):
                a = self[i, j]
                if j < i and a.max_abs() > tol:
                    return False
                if i == j and (a - _ONE).max_abs() > tol:
                    return False
        return True

    def to_records(self) -> list:
        return [[self[i, j].to_records() for j in range(self.n)] for i in range(self.n)]

    @classmethod
    def from_records(cls, rec, q: complex = DEFAULT_Q) -> "LoopMatrix":
        return cls(tuple(tuple(LaurentSeries.from_records(e) for e in row) for row in rec), q)


def pairing(X: LoopMatrix, Y: LoopMatrix) -> complex:
    """Invariant form: residue of tr(X Y)."""
    total = 0j
    for i in range(X.n):
        for j in range(X.n):
            a, b = X[i, j], Y[j, i]
            if a.coeffs and b.coeffs:
                total += inner(a, b)
    return total


def unipotent_inverse(T: LoopMatrix) -> LoopMatrix:
    """Inverse of 1 + N with N strictly upper triangular: sum of (-N)^r for r < n."""
    if not T.is_unipotent_upper(1e-12):
        raise ShapeError("gauge element must be unipotent upper triangular")
    I = LoopMatrix.identity(T.n, T.q)
    N = T - I
    out, term = I, I
    for _ in range(T.n - 1):
        term = term @ (-N)
        out = out + term
    return out


def gauge(T: LoopMatrix, L: LoopMatrix) -> LoopMatrix:
    """``T(qz) L T^-1``."""
    return T.dilate(1) @ L @ unipotent_inverse(T)


def check_cross_section_shape(L: LoopMatrix, tol: float = 0.0) -> None:
    """Raise ShapeError unless L = Lambda_n + upper triangular."""
    for i in range(L.n):
        for j in range(i):
            a = L[i, j]
            target = _ONE if i == j + 1 else _ZERO
            if not a.is_exact or (a - target).max_abs() > tol:
                raise ShapeError(f"entry ({i},{j}) must be {'1' if i == j + 1 else '0'}")


@dataclass(frozen=True, eq=False)
class FiniteReduction:
    """Companion coefficients u_k (first row -u_k) and the gauge element T."""

    us: tuple
    companion: LoopMatrix
    T: LoopMatrix

    def residual(self, L: LoopMatrix) -> float:
        return (gauge(self.T, L) - self.companion).max_abs()


def reduce_finite(L: LoopMatrix) -> FiniteReduction:
    """Bring ``Lambda_n + A`` (A upper triangular) to companion form.

    Works diagonal by diagonal on ``T(qz) L = L~ T`` where ``L~`` has first
    row ``+u~_k``: at level l the diagonal l+1 of T and ``u~_(l+1)`` are read
    off from the sums of the level-l right-hand side along its diagonal.
    """
    check_cross_section_shape(L)
    n, q = L.n, L.q
    Tdiag: dict[int, list[LaurentSeries]] = {}
    ut: list[LaurentSeries] = []

    def Lband(l: int, i: int) -> LaurentSeries:
        return L[i, i + l] if i + l < n else _ZERO

    def Tband(j: int, i: int) -> LaurentSeries:
        if j == 0:
            return _ONE
        if i + j >= n or j not in Tdiag:
            return _ZERO
        return Tdiag[j][i]

    for l in range(n):
        # F on diagonal l: L^(l) + sum_j (hT^(j) L^(l-j) - Lt^(l-j) T^(j))
        F = []
        for i in range(n - l):
            acc = Lband(l, i)
            for j in range(1, l + 1):
                # (hT^(j) L^(l-j))_{i,i+l} = T_{i,i+j}(qz) L_{i+j,i+l}
                if i + j < n:
                    acc = acc + dilate(Tband(j, i), 1, q) * Lband(l - j, i + j)
                # Lt^(l-j) has only the (0, l-j) entry u~_(l-j+1)
                if i == 0:
                    acc = acc - ut[l - j] * Tband(j, l - j)
            F.append(acc)
        u = _ZERO
        for j in range(n - l):
            u = u + dilate(F[j], j, q)
        ut.append(u)
        if l + 1 < n:
            col = []
            for i in range(n - l - 1):
                x = dilate(u, -i - 1, q)
                for j in range(i + 1):
                    x = x - dilate(F[j], j - i - 1, q)
                col.append(x)
            Tdiag[l + 1] = col
    T = LoopMatrix.from_function(n, lambda i, j: Tband(j - i, i) if j >= i else _ZERO, q)
    us = tuple(-u for u in ut)
    return FiniteReduction(us, LoopMatrix.companion(us, q), T)


# diagonal matrices


@dataclass(frozen=True, eq=False)
class DiagMatrix:
    """diag(f_0, ..., f_{n-1})."""

    diag: tuple
    q: complex = DEFAULT_Q

    def __post_init__(self):
        object.__setattr__(self, "diag", tuple(_normalize([LaurentSeries.constant(d) if not isinstance(d, LaurentSeries) else d for d in self.diag])))

    @property
    def n(self) -> int:
        return len(self.diag)

    def __getitem__(self, i: int) -> LaurentSeries:
        return self.diag[i]

    @classmethod
    def constant(cls, n: int, c: complex, q: complex = DEFAULT_Q) -> "DiagMatrix":
        return cls(tuple(LaurentSeries.constant(c) for _ in range(n)), q)

    @classmethod
    def u_element(cls, f0: LaurentSeries, n: int, q: complex = DEFAULT_Q) -> "DiagMatrix":
        """diag(f0(z), f0(z/q), ..., f0(z/q^(n-1)))."""
        return cls(tuple(dilate(f0, -i, q) for i in range(n)), q)

    def _map(self, fn) -> "DiagMatrix":
        return DiagMatrix(tuple(fn(i, d) for i, d in enumerate(self.diag)), self.q)

    def __add__(self, other: "DiagMatrix") -> "DiagMatrix":
        return self._map(lambda i, d: d + other[i])

    def __sub__(self, other: "DiagMatrix") -> "DiagMatrix":
        return self._map(lambda i, d: d - other[i])

    def __neg__(self) -> "DiagMatrix":
        return self.scale(-1)

    def scale(self, s: complex) -> "DiagMatrix":
        return self._map(lambda i, d: d.scale(s))

    def dilate(self, w: complex = 1) -> "DiagMatrix":
        return self._map(lambda i, d: dilate(d, w, self.q))

    def max_abs(self) -> float:
        return max(d.max_abs() for d in self.diag)

    def exponents(self) -> list[int]:
        return sorted({m for d in self.diag for m in d.coeffs})

    def to_loop(self) -> LoopMatrix:
        return LoopMatrix.from_function(self.n, lambda i, j: self[i] if i == j else _ZERO, self.q)


def diag_inner(f: DiagMatrix, g: DiagMatrix) -> complex:
    return sum((inner(a, b) for a, b in zip(f.diag, g.diag)), 0j)


def tau_n(f: DiagMatrix) -> DiagMatrix:
    """Cyclic shift diag(f_0, ..., f_{n-1}) -> diag(f_1, ..., f_{n-1}, f_0)."""
    return DiagMatrix(f.diag[1:] + f.diag[:1], f.q)


def h_tau(f: DiagMatrix) -> DiagMatrix:
    return tau_n(f).dilate(1)


def root_of_unity(n: int) -> complex:
    return cmath.exp(2j * cmath.pi / n)


def eigenbasis(n: int, m_range: Sequence[int], q: complex = DEFAULT_Q) -> list[tuple[int, int, DiagMatrix, complex]]:
    """Eigenvectors ``z^m diag(1, w^a, ..., w^((n-1)a))`` of ``h tau`` with eigenvalues ``q^m w^a``."""
    w = root_of_unity(n)
    out = []
    for m in m_range:
        for a in range(n):
            E = DiagMatrix(tuple(LaurentSeries.monomial(m, w ** (k * a)) for k in range(n)), q)
            out.append((m, a, E, qpow(q, m) * w ** a))
    return out


def fourier_components(f: DiagMatrix) -> dict[tuple[int, int], complex]:
    """Coefficients c with f = sum c[(m, a)] E_(m, a)."""
    n = f.n
    out = {}
    for m in f.exponents():
        vec = np.array([complex(f[k].coeffs.get(m, 0)) for k in range(n)])
        c = np.fft.fft(vec) / n  # (1/n) sum_k f_k w^(-k a)
        for a in range(n):
            if abs(c[a]) > 0:
                out[(m, a)] = complex(c[a])
    return out


def from_fourier(comps: Mapping[tuple[int, int], complex], n: int, lo: int | None, q: complex) -> DiagMatrix:
    by_m: dict[int, np.ndarray] = {}
    for (m, a), c in comps.items():
        by_m.setdefault(m, np.zeros(n, dtype=complex))[a] += c
    entries = [dict() for _ in range(n)]
    for m, vec in by_m.items():
        vals = np.fft.ifft(vec) * n  # sum_a c_a w^(k a)
        for k in range(n):
            entries[k][m] = vals[k]
    return DiagMatrix(tuple(LaurentSeries(e, lo) for e in entries), q)


@dataclass(frozen=True)
class FiniteRMatrixSpec:
    """Skew multiplier Delta on U_n (identified with the series f_0): z^m -> delta_m z^m."""

    n: int
    delta_multipliers: Mapping[int, complex] = field(default_factory=dict)

    def __post_init__(self):
        d = {int(m): complex(v) for m, v in self.delta_multipliers.items()}
        if abs(d.get(0, 0)) > 0:
            raise ValueError("delta_0 must vanish")
        for m, v in d.items():
            if -m in d and abs(d[-m] + v) > 1e-14:
                raise ValueError(f"delta must be skew: delta_{-m} != -delta_{m}")
        full = dict(d)
        for m, v in d.items():
            full.setdefault(-m, -v)
        object.__setattr__(self, "delta_multipliers", full)

    def delta(self, m: int) -> complex:
        return self.delta_multipliers.get(m, 0j)


def cayley(xi: complex, eps: float = GENERIC_EPS) -> complex:
    """1/2 (1 + xi) / (1 - xi)."""
    if abs(1 - xi) < eps:
        raise NonGenericParameter(f"|1 - xi| < {eps} for xi = {xi}")
    return 0.5 * (1 + xi) / (1 - xi)


def proj_Un(F: DiagMatrix) -> DiagMatrix:
    """Orthogonal projection onto U_n: f_0(z) = (1/n) sum_i F_i(q^i z)."""
    n, q = F.n, F.q
    acc = LaurentSeries.zero()
    for i in range(n):
        acc = acc + dilate(F[i], i, q)
    return DiagMatrix.u_element(acc.scale(1.0 / n), n, q)


def un_component(F: DiagMatrix) -> LaurentSeries:
    """The series f_0 of the U_n projection of F."""
    return proj_Un(F)[0]


def r0_finite(f: DiagMatrix, spec: FiniteRMatrixSpec, eps: float = GENERIC_EPS) -> DiagMatrix:
    """``1/2 (1 + h tau)/(1 - h tau) P_0' + n Delta P_U`` on diagonal matrices."""
    n, q = f.n, f.q
    if spec.n != n:
        raise ShapeError("r-matrix size does not match")
    w = root_of_unity(n)
    comps = {}
    for (m, a), c in fourier_components(f).items():
        if m == 0 and a == 0:
            continue
        comps[(m, a)] = c * cayley(qpow(q, m) * w ** a, eps)
    out = from_fourier(comps, n, _common_lo(f.diag), q)
    if any(abs(v) > 0 for v in spec.delta_multipliers.values()):
        p = un_component(f)
        dp = LaurentSeries({m: c * spec.delta(m) * n for m, c in p.coeffs.items()}, p.lo, p.hi)
        out = out + DiagMatrix.u_element(dp, n, q)
    return out


def r_hat(X: LoopMatrix, spec: FiniteRMatrixSpec, eps: float = GENERIC_EPS) -> LoopMatrix:
    """``1/2 (P_+ - P_-) + r0 P_0`` on the full loop algebra."""
    half = (X.part("upper") - X.part("lower")).scale(0.5)
    return half + r0_finite(X.diagonal(), spec, eps).to_loop()


def z_pair(grad: LoopMatrix, grad_prime: LoopMatrix) -> tuple[LoopMatrix, LoopMatrix]:
    """``Z = grad(z/q) - grad'`` and ``Zbar = grad(z/q) + grad'``."""
    g = grad.dilate(-1)
    return g - grad_prime, g + grad_prime


def matrix_bracket_finite(grad_phi, grad_psi, spec: FiniteRMatrixSpec, eps: float = GENERIC_EPS) -> complex:
    """``<Z_phi, 1/2 Zbar_psi - r Z_psi>`` for gradient pairs (grad, grad')."""
    Zp, _ = z_pair(*grad_phi)
    Zq, Zbq = z_pair(*grad_psi)
    return pairing(Zp, Zbq.scale(0.5) - r_hat(Zq, spec, eps))


def matrix_bracket_covariant(grad_phi, grad_psi, spec: FiniteRMatrixSpec, eps: float = GENERIC_EPS) -> complex:
    """The same bracket from the 2x2 block form with ``r_pm = r +- 1/2``."""
    a, ap = grad_phi
    b, bp = grad_psi

    def r(X):
        return r_hat(X, spec, eps)

    first = r(a) - (r(ap) + ap.scale(0.5)).dilate(1)
    second = (r(a.dilate(-1)) - a.dilate(-1).scale(0.5)) - r(ap)
    return pairing(first, b) - pairing(second, bp)


def lift_gradient(gs: Sequence[LaurentSeries], us: Sequence[LaurentSeries], q: complex = DEFAULT_Q) -> LoopMatrix:
    """Lower-triangular gradient at the companion matrix of ``us``.

    ``gs[k-1]`` is the derivative of the functional along u_k.  The first
    column is fixed by the pairing with first-row variations, the rest by
    requiring the strictly lower part of ``Z`` to vanish, which is what
    gauge invariance demands.
    """
    n = len(us)
    G = [[_ZERO] * n for _ in range(n)]
    for j in range(n):
        G[j][0] = -gs[j]
    for i in range(1, n):
        for j in range(i):
            G[i][j + 1] = dilate(G[i - 1][j], -1, q) + G[i][0] * us[j]
    return LoopMatrix(tuple(tuple(r) for r in G), q)


def random_cross_section(rng: np.random.Generator, n: int, exps: Sequence[int] = (-1, 0, 1), scale: float = 0.5, q: complex = DEFAULT_Q) -> LoopMatrix:
    """Lambda_n plus a random upper triangular loop matrix with exact entries."""

    def entry(i, j):
        if i == j + 1:
            return _ONE
        if j < i:
            return _ZERO
        return LaurentSeries({m: scale * complex(*rng.normal(size=2)) for m in exps})

    return LoopMatrix.from_function(n, entry, q)
