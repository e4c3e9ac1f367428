"""Quadratic Poisson brackets on q-pseudodifference symbols and on loop matrices.

Scalar side: brackets of the block form

    {phi, psi} = <(R + a P0) grad phi + b P0 grad' phi, grad psi>
               - <c P0 grad phi + (R + d P0) grad' phi, grad' psi>

with R = 1/2 (P+ - P-), grad phi = L dphi and grad' phi = dphi L.  The
operators a, b, c, d act on J0 = C((1/z)) as z-exponent multipliers, with
an optional rank-one shift whose images are constants.

Matrix side: the covariant bracket <Z_phi, 1/2 Zbar_psi - r Z_psi> on
gl_n loops, with the diagonal part of r supplied as a callable so that the
finite and the restricted universal r-matrices plug in unchanged.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Iterable, Mapping, Sequence

import numpy as np

from .errors import NonGenericParameter, ShapeError
from .glq import UniversalRMatrixSpec, r0_restricted
from .laurent import DEFAULT_Q, LaurentSeries, dilate, inner, qpow
from .loopfin import (
    GENERIC_EPS,
    DiagMatrix,
    FiniteRMatrixSpec,
    LoopMatrix,
    diag_inner,
    lift_gradient,
    pairing,
    proj_Un,
    r0_finite,
)
from .psido import (
    FunctionalSpec,
    QPsiSymbol,
    differential,
    integer_part,
    mul,
    proj,
    tr_product,
)

Multiplier = Callable[[int], complex]
SKEW_TOL = 1e-12


def apply_multiplier(mult: Multiplier, f: LaurentSeries) -> LaurentSeries:
    """z^m -> mult(m) z^m, keeping the window of f."""
    return LaurentSeries({m: c * mult(m) for m, c in f.coeffs.items()}, f.lo, f.hi)


@dataclass(frozen=True)
class RankOneShift:
    """Operators on J0 with images in the constants, x -> <x, v> 1.

    ``f, g, h, k`` are the vectors v of the four rank-one operators in the
    shift [[h - k*, f + k*], [h + g*, f - g*]], which leaves every bracket
    unchanged because tr grad phi = tr grad' phi.
    """

    f: LaurentSeries
    g: LaurentSeries
    h: LaurentSeries
    k: LaurentSeries

    @staticmethod
    def _op(v: LaurentSeries, x: LaurentSeries) -> LaurentSeries:
        return LaurentSeries.constant(inner(x, v))

    @staticmethod
    def _adj(v: LaurentSeries, x: LaurentSeries) -> LaurentSeries:
        # adjoint of x -> <x, v> 1 is x -> (tr x) v
        return v.scale(complex(x.coeff(0)))

    def apply(self, x1: LaurentSeries, x2: LaurentSeries) -> tuple[LaurentSeries, LaurentSeries]:
        op, adj = self._op, self._adj
        top = op(self.h, x1) - adj(self.k, x1) + op(self.f, x2) + adj(self.k, x2)
        bottom = op(self.h, x1) + adj(self.g, x1) - adj(self.g, x2) + op(self.f, x2)
        return top, bottom

    @classmethod
    def random(cls, rng: np.random.Generator, exps: Sequence[int] = (-2, -1, 0, 1, 2)) -> "RankOneShift":
        def vec():
            return LaurentSeries({m: complex(*rng.normal(size=2)) for m in exps})

        return cls(vec(), vec(), vec(), vec())


@dataclass(frozen=True)
class QuadOperatorSpec:
    """Multiplier data (a, b, c, d) of a quadratic bracket.

    Each entry maps a z-exponent m to a complex multiplier.  ``with_R``
    switches the R = 1/2 (P+ - P-) part on; it is off for pure J0 kernels
    such as the Delta contribution.
    """

    a: Multiplier
    b: Multiplier
    c: Multiplier
    d: Multiplier
    name: str = "raw"
    with_R: bool = True
    theta: RankOneShift | None = None

    def validate(self, ms: Iterable[int] = range(-6, 7), tol: float = SKEW_TOL) -> None:
        """Check a = -a*, d = -d* and c* = b on the given exponents."""
        for m in ms:
            for name, op in (("a", self.a), ("d", self.d)):
                if abs(op(m) + op(-m)) > tol * max(1.0, abs(op(m))):
                    raise ShapeError(f"{name} is not skew at m={m}")
            if abs(self.b(m) - self.c(-m)) > tol * max(1.0, abs(self.b(m))):
                raise ShapeError(f"b is not the adjoint of c at m={m}")

    def with_theta(self, theta: RankOneShift) -> "QuadOperatorSpec":
        return QuadOperatorSpec(self.a, self.b, self.c, self.d, self.name + "+theta", self.with_R, theta)

    @classmethod
    def raw(cls, a: Mapping[int, complex], b: Mapping[int, complex], c: Mapping[int, complex], d: Mapping[int, complex], validate: bool = True) -> "QuadOperatorSpec":
        """Finitely supported multipliers given as dicts (missing exponents map to 0)."""
        tabs = [{int(k): complex(v) for k, v in t.items()} for t in (a, b, c, d)]
        spec = cls(*(lambda m, t=t: t.get(m, 0j) for t in tabs), name="raw")
        if validate:
            support = set().union(*(set(t) for t in tabs))
            spec.validate(support | {-m for m in support})
        return spec

    @classmethod
    def standard(cls, lam: complex, q: complex = DEFAULT_Q, delta: Mapping[int, complex] | None = None, eps: float = GENERIC_EPS, name: str | None = None) -> "QuadOperatorSpec":
        """The reduced bracket at degree lam with skew multiplier delta; x = q^(lam m)."""
        dl = _skew_completion(delta or {})

        def x(m):
            v = qpow(q, lam * m)
            if abs(1 - v) < eps:
                raise NonGenericParameter(f"|1 - q^(lam*{m})| < {eps}")
            return v

        def a(m):
            return 0j if m == 0 else 0.5 * (1 + x(m)) / (1 - x(m)) + dl.get(m, 0j)

        def b(m):
            return 0j if m == 0 else -(1 / (1 - x(m)) + dl.get(m, 0j)) * x(m)

        def c(m):
            return 0j if m == 0 else 1 / (1 - x(m)) + dl.get(m, 0j) / x(m)

        def d(m):
            return -a(m)

        return cls(a, b, c, d, name or "standard")

    @classmethod
    def preset_e(cls, n: int, q: complex = DEFAULT_Q) -> "QuadOperatorSpec":
        """The involutive bracket on order-n operators."""
        return cls.standard(n, q, None, name="e")

    @classmethod
    def preset_e161(cls, n: int, delta: Mapping[int, complex], q: complex = DEFAULT_Q) -> "QuadOperatorSpec":
        """The reduced bracket on order-n operators with a skew Delta."""
        return cls.standard(n, q, delta, name="e161")

    @classmethod
    def preset_f48(cls, lam: complex, delta: Mapping[int, complex] | None = None, q: complex = DEFAULT_Q) -> "QuadOperatorSpec":
        """The reduced bracket at complex degree lam."""
        return cls.standard(lam, q, delta, name="f48")

    @classmethod
    def delta_kernel(cls, n: complex, delta: Mapping[int, complex], q: complex = DEFAULT_Q) -> "QuadOperatorSpec":
        """[[Delta P0, -Delta h^n P0], [Delta h^-n P0, -Delta P0]] without R."""
        dl = _skew_completion(delta)

        def dm(m):
            return dl.get(m, 0j)

        return cls(
            dm,
            lambda m: -dm(m) * qpow(q, n * m),
            lambda m: dm(m) * qpow(q, -n * m),
            lambda m: -dm(m),
            name="delta",
            with_R=False,
        )

    @classmethod
    def preset(cls, name: str, lam: complex, q: complex = DEFAULT_Q, delta: Mapping[int, complex] | None = None) -> "QuadOperatorSpec":
        if name == "e":
            n = integer_part(lam)
            if n is None:
                raise ShapeError("preset e needs an integer degree")
            return cls.preset_e(n, q)
        if name == "e161":
            n = integer_part(lam)
            if n is None:
                raise ShapeError("preset e161 needs an integer degree")
            return cls.preset_e161(n, delta or {}, q)
        if name == "f48":
            return cls.preset_f48(lam, delta, q)
        raise ShapeError(f"unknown preset {name!r}")


def _skew_completion(delta: Mapping[int, complex]) -> dict[int, complex]:
    d = {int(m): complex(v) for m, v in delta.items()}
    if abs(d.get(0, 0)) > 0:
        raise ShapeError("delta_0 must vanish")
    out = dict(d)
    for m, v in d.items():
        if -m in d and abs(d[-m] + v) > SKEW_TOL:
            raise ShapeError(f"delta is not skew at m={m}")
        out.setdefault(-m, -v)
    return out


def involutivity_residual(spec: QuadOperatorSpec, ms: Iterable[int] = range(-6, 7)) -> dict[int, float]:
    """|a_m + b_m - c_m - d_m| per exponent."""
    return {m: abs(spec.a(m) + spec.b(m) - spec.c(m) - spec.d(m)) for m in ms}


def well_definedness_residual(spec: QuadOperatorSpec, lam: complex, q: complex = DEFAULT_Q, ms: Iterable[int] = range(-6, 7)) -> dict[int, float]:
    """Deviation from a + 1/2 + b h^-lam = c + (1/2 + d) h^-lam = alpha tr.

    Away from m = 0 both sides must vanish; at m = 0 they must agree.  Each
    entry is scaled by the largest summand.
    """
    out = {}
    for m in ms:
        y = qpow(q, -lam * m)
        terms_l = (spec.a(m), 0.5, spec.b(m) * y)
        terms_r = (spec.c(m), 0.5 * y, spec.d(m) * y)
        left, right = sum(terms_l), sum(terms_r)
        # relative to the size of the summands, which grow like q^(-|lam m|)
        size = max(1.0, *(abs(t) for t in terms_l + terms_r))
        out[m] = (abs(left - right) if m == 0 else max(abs(left), abs(right))) / size
    return out


# scalar side


@dataclass(frozen=True)
class GradientPair:
    """Left and right gradients ``L dphi`` and ``dphi L`` with the differential."""

    grad: object
    grad_prime: object
    dphi: object = None

    def check(self, L, tol: float = 1e-12) -> float:
        """Recompute both gradients from dphi and return the larger discrepancy."""
        if isinstance(L, QPsiSymbol):
            g, gp = _scalar_grads(self.dphi, L)
            return max((g - self.grad).max_abs(), (gp - self.grad_prime).max_abs())
        g, gp = L @ self.dphi, self.dphi @ L
        return max((g - self.grad).max_abs(), (gp - self.grad_prime).max_abs())


def _to_integer_grade(A: QPsiSymbol) -> QPsiSymbol:
    n = integer_part(A.base)
    if n is None:
        raise ShapeError("gradient is not integer graded")
    return A.regrade(n)


def _scalar_grads(dphi: QPsiSymbol, L: QPsiSymbol) -> tuple[QPsiSymbol, QPsiSymbol]:
    return _to_integer_grade(mul(L, dphi)), _to_integer_grade(mul(dphi, L))


def coefficient_differential(partials: Mapping[tuple[int, int], complex], L: QPsiSymbol) -> QPsiSymbol:
    """Differential of sum v * (z^j coefficient of u_k) over ``{(k, j): v}``."""
    acc = QPsiSymbol(-L.base, {}, None, 0, L.q)
    for (k, j), v in sorted(partials.items()):
        if v == 0:
            continue
        acc = acc + differential(FunctionalSpec.coefficient(k, j), L).scale(v)
    return acc


def gradient_from_differential(dphi: QPsiSymbol, L: QPsiSymbol) -> GradientPair:
    g, gp = _scalar_grads(dphi, L)
    return GradientPair(g, gp, dphi)


def gradient_scalar(phi, L: QPsiSymbol) -> GradientPair:
    """Gradients of a functional spec, a partials dict, or a given differential."""
    if isinstance(phi, FunctionalSpec):
        dphi = differential(phi, L)
    elif isinstance(phi, QPsiSymbol):
        dphi = phi
    else:
        dphi = coefficient_differential(phi, L)
    return gradient_from_differential(dphi, L)


def _half_R(A: QPsiSymbol) -> QPsiSymbol:
    return (proj(A, "plus") - proj(A, "minus")).scale(0.5)


def _p0(A: QPsiSymbol) -> LaurentSeries:
    return A.exponent_coeff(0)


def bracket_from_gradients(gp: GradientPair, gq: GradientPair, spec: QuadOperatorSpec) -> float | complex:
    """The block-form bracket for precomputed gradient pairs."""
    X1, X2 = gp.grad, gp.grad_prime
    Y1, Y2 = gq.grad, gq.grad_prime
    total = 0j
    if spec.with_R:
        total += tr_product(_half_R(X1), Y1) - tr_product(_half_R(X2), Y2)
    x1, x2, y1, y2 = _p0(X1), _p0(X2), _p0(Y1), _p0(Y2)
    top = apply_multiplier(spec.a, x1) + apply_multiplier(spec.b, x2)
    bottom = apply_multiplier(spec.c, x1) + apply_multiplier(spec.d, x2)
    total += inner(top, y1) - inner(bottom, y2)
    if spec.theta is not None:
        t, b = spec.theta.apply(x1, x2)
        total += inner(t, y1) - inner(b, y2)
    return total


def bracket_scalar(phi, psi, L: QPsiSymbol, spec: QuadOperatorSpec) -> complex:
    """{phi, psi} at L; phi and psi as accepted by ``gradient_scalar``."""
    return bracket_from_gradients(gradient_scalar(phi, L), gradient_scalar(psi, L), spec)


# matrix side

R0 = Callable[[DiagMatrix], DiagMatrix]


def finite_r0(spec: FiniteRMatrixSpec, eps: float = GENERIC_EPS) -> R0:
    return lambda f: r0_finite(f, spec, eps)


def restricted_r0(spec: UniversalRMatrixSpec, eps: float = GENERIC_EPS) -> R0:
    return lambda f: r0_restricted(f, spec, eps)


def r_full(X: LoopMatrix, r0: R0) -> LoopMatrix:
    """1/2 (P+ - P-) + r0 P0 on gl_n loops."""
    return (X.part("upper") - X.part("lower")).scale(0.5) + r0(X.diagonal()).to_loop()


def z_pair(grad: LoopMatrix, grad_prime: LoopMatrix) -> tuple[LoopMatrix, LoopMatrix]:
    """``Z = grad(z/q) - grad'`` and ``Zbar = grad(z/q) + grad'``."""
    g = grad.dilate(-1)
    return g - grad_prime, g + grad_prime


def bracket_matrix(gp: GradientPair, gq: GradientPair, r0: R0, form: str = "z") -> complex:
    """Covariant bracket on loop matrices.

    ``form="z"`` evaluates <Z_phi, 1/2 Zbar_psi - r Z_psi>; ``form="block"``
    evaluates the 2x2 block form with r_pm = r +- 1/2 and the dilation h.
    """
    if form == "z":
        Zp, _ = z_pair(gp.grad, gp.grad_prime)
        Zq, Zbq = z_pair(gq.grad, gq.grad_prime)
        return pairing(Zp, Zbq.scale(0.5) - r_full(Zq, r0))
    if form == "block":
        a, ap = gp.grad, gp.grad_prime

        def r(X):
            return r_full(X, r0)

        first = r(a) - (r(ap) + ap.scale(0.5)).dilate(1)
        am = a.dilate(-1)
        second = (r(am) - am.scale(0.5)) - r(ap)
        return pairing(first, gq.grad) - pairing(second, gq.grad_prime)
    raise ValueError(f"unknown form {form!r}")


def coefficient_partials(phi: FunctionalSpec, n: int) -> list[LaurentSeries]:
    """``gs[k-1]`` with d phi = sum_k <delta u_k, gs[k-1]> on order-n operators."""
    gs = [LaurentSeries.zero() for _ in range(n)]
    if phi.kind == "coefficient":
        k, j = phi.args
        if 1 <= k <= n:
            gs[k - 1] = LaurentSeries.monomial(-j)
        return gs
    if phi.kind == "elementary":
        i, j = phi.args
        if 0 <= i < n:
            gs[n - i - 1] = LaurentSeries.monomial(-j)
        return gs
    raise ShapeError("matrix gradients are built for coefficient or elementary functionals")


def partials_from_differential(dphi: QPsiSymbol, n: int) -> list[LaurentSeries]:
    """Read ``gs`` off a differential sum f_i D^-i: gs[k-1] = f_(n-k)(q^(n-k) z)."""
    gs = []
    for k in range(1, n + 1):
        i = n - k
        gs.append(dilate(dphi.exponent_coeff(-i), i, dphi.q))
    return gs


def matrix_gradient(gs: Sequence[LaurentSeries], us: Sequence[LaurentSeries], q: complex = DEFAULT_Q) -> GradientPair:
    """Lower-triangular gradient at the companion matrix and its two products."""
    G = lift_gradient(gs, us, q)
    Lm = LoopMatrix.companion(us, q)
    return GradientPair(Lm @ G, G @ Lm, G)


def z_diagonal(gp: GradientPair) -> DiagMatrix:
    """Diagonal part of Z = grad(z/q) - grad'."""
    Z, _ = z_pair(gp.grad, gp.grad_prime)
    return Z.diagonal()


def z_diagonal_from_scalar(gs: GradientPair, n: int) -> DiagMatrix:
    """diag(h^-1 P0 grad, 0, ..., 0, -P0 grad') built from scalar gradients."""
    x1, x2 = _p0(gs.grad), _p0(gs.grad_prime)
    q = gs.grad.q
    z = LaurentSeries.zero()
    if n == 1:
        return DiagMatrix((dilate(x1, -1, q) - x2,), q)
    return DiagMatrix((dilate(x1, -1, q),) + (z,) * (n - 2) + (-x2,), q)


def jdelta_contribution(phi: FunctionalSpec, psi: FunctionalSpec, us: Sequence[LaurentSeries], delta: Mapping[int, complex], q: complex = DEFAULT_Q) -> tuple[complex, complex]:
    """Delta part of the reduced bracket computed on both sides.

    Matrix side: <n Delta P_U Z0_phi, Z0_psi> with Z0 taken from the lifted
    gradients.  Scalar side: the J0 kernel [[Delta, -Delta h^n], [Delta h^-n,
    -Delta]] on the scalar gradients.
    """
    n = len(us)
    dl = _skew_completion(delta)
    if not any(abs(v) > 0 for v in dl.values()):
        return 0j, 0j
    gm_phi = matrix_gradient(coefficient_partials(phi, n), us, q)
    gm_psi = matrix_gradient(coefficient_partials(psi, n), us, q)
    zp, zq = z_diagonal(gm_phi), z_diagonal(gm_psi)
    pu = proj_Un(zp)
    f0 = apply_multiplier(lambda m: n * dl.get(m, 0j), pu[0])
    matrix_side = diag_inner(DiagMatrix.u_element(f0, n, q), zq)
    L = QPsiSymbol.lax(n, list(us), q)
    scalar_side = bracket_scalar(phi, psi, L, QuadOperatorSpec.delta_kernel(n, dl, q))
    return matrix_side, scalar_side


def random_companion_us(rng: np.random.Generator, n: int, exps: Sequence[int] = (-1, 0, 1), scale: float = 0.5) -> list[LaurentSeries]:
    """Random exact Laurent polynomials u_1..u_n."""
    return [LaurentSeries({m: scale * complex(*rng.normal(size=2)) for m in exps}) for _ in range(n)]


def random_coefficient_functional(rng: np.random.Generator, n: int, jrange: int = 2) -> FunctionalSpec:
    k = int(rng.integers(1, n + 1))
    j = int(rng.integers(-jrange, jrange + 1))
    return FunctionalSpec.coefficient(k, j)


@dataclass(frozen=True)
class EquivalenceReport:
    """Largest pairwise discrepancies between the three bracket evaluations."""

    n: int
    trials: int
    finite_vs_scalar: float
    restricted_vs_scalar: float
    finite_vs_restricted: float
    scale: float
    samples: tuple = field(default=(), repr=False)

    @property
    def max_discrepancy(self) -> float:
        return max(self.finite_vs_scalar, self.restricted_vs_scalar, self.finite_vs_restricted)


def quotient_equivalence_check(n: int, delta: Mapping[int, complex] | None, trials: int, rng: np.random.Generator, q: complex = DEFAULT_Q) -> EquivalenceReport:
    """Reduced matrix brackets against the scalar bracket on order-n operators.

    Each trial draws a companion point and two coefficient functionals, then
    evaluates (i) the finite covariant bracket, (ii) the same bracket with the
    universal diagonal r-matrix restricted to size n and (iii) the scalar
    bracket with the matching Delta.
    """
    dl = _skew_completion(delta or {})
    r_fin = finite_r0(FiniteRMatrixSpec(n, dl))
    r_res = restricted_r0(UniversalRMatrixSpec(n, dl))
    sspec = QuadOperatorSpec.preset_e161(n, dl, q)
    d_fs = d_rs = d_fr = 0.0
    scale = 0.0
    samples = []
    for _ in range(trials):
        us = random_companion_us(rng, n)
        phi = random_coefficient_functional(rng, n)
        psi = random_coefficient_functional(rng, n)
        gp = matrix_gradient(coefficient_partials(phi, n), us, q)
        gq = matrix_gradient(coefficient_partials(psi, n), us, q)
        v_fin = bracket_matrix(gp, gq, r_fin)
        v_res = bracket_matrix(gp, gq, r_res)
        v_sc = bracket_scalar(phi, psi, QPsiSymbol.lax(n, us, q), sspec)
        d_fs = max(d_fs, abs(v_fin - v_sc))
        d_rs = max(d_rs, abs(v_res - v_sc))
        d_fr = max(d_fr, abs(v_fin - v_res))
        scale = max(scale, abs(v_sc))
        samples.append((phi.label(), psi.label(), v_fin, v_res, v_sc))
    return EquivalenceReport(n, trials, d_fs, d_rs, d_fr, scale, tuple(samples))


# Jacobi identity


def _perturbed(us: Sequence[LaurentSeries], k: int, j: int, h: complex) -> list[LaurentSeries]:
    out = list(us)
    out[k - 1] = us[k - 1] + LaurentSeries.monomial(j, h)
    return out


def jacobi_residual(
    phis: Sequence[FunctionalSpec],
    us: Sequence[LaurentSeries],
    spec_fn: Callable[[], QuadOperatorSpec],
    window: Sequence[int] = tuple(range(-6, 7)),
    step: float = 1e-5,
    q: complex = DEFAULT_Q,
) -> float:
    """Cyclic sum of {f, {g, h}} on order-n operators.

    The inner bracket is a function of the coefficients u_k^j; its partials
    over ``window`` come from central differences, and the outer bracket is
    the bracket of f with the resulting linear functional.
    """
    n = len(us)
    spec = spec_fn()
    L = QPsiSymbol.lax(n, list(us), q)
    total = 0j
    for s in range(3):
        f, g, h = phis[s], phis[(s + 1) % 3], phis[(s + 2) % 3]
        partials = {}
        for k in range(1, n + 1):
            for j in window:
                plus = bracket_scalar(g, h, QPsiSymbol.lax(n, _perturbed(us, k, j, step), q), spec)
                minus = bracket_scalar(g, h, QPsiSymbol.lax(n, _perturbed(us, k, j, -step), q), spec)
                v = (plus - minus) / (2 * step)
                if v != 0:
                    partials[(k, j)] = v
        total += bracket_scalar(f, partials, L, spec)
    return abs(total)
