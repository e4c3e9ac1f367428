"""Command-line driver: reductions, bracket evaluations and verification suites.

Exit codes: 0 pass, 2 parse or usage error, 3 shape error, 4 tolerance
failure, 5 non-generic parameters.
"""

from __future__ import annotations

import argparse
import sys
import zlib
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from . import a0, glq, loopfin, poisson, psido, reduction
from .config import (
    RunConfig,
    complex_record,
    dump_yaml,
    load_yaml,
    parse_complex,
    parse_tolerance_override,
)
from .errors import (
    ConfigError,
    ConsistencyError,
    DegreeMismatch,
    NonGenericParameter,
    QdsError,
    ShapeError,
    ZeroLambda,
)
from .laurent import LaurentSeries, inner, qpow

EXIT_OK = 0
EXIT_PARSE = 2
EXIT_SHAPE = 3
EXIT_TOLERANCE = 4
EXIT_NONGENERIC = 5

TRACE_POINTS = (1.5 + 0.5j, 0.7 - 0.2j, 3.2 + 0.4j, 2.0 - 1.1j)


@dataclass(frozen=True)
class Check:
    """One verified quantity; ``mode="max"`` passes when value < tol, ``"min"`` when value > tol."""

    name: str
    value: float
    tol: float
    mode: str = "max"

    @property
    def passed(self) -> bool:
        return self.value < self.tol if self.mode == "max" else self.value > self.tol

    def to_records(self) -> dict:
        return {"name": self.name, "value": _fmt(self.value), "tol": self.tol, "mode": self.mode, "passed": self.passed}

    def summary(self) -> str:
        rel = "<" if self.mode == "max" else ">"
        return f"{'PASS' if self.passed else 'FAIL'} {self.name} {_fmt(self.value):.3e} {rel} {self.tol:.0e}"


def _fmt(x: float) -> float:
    # six significant digits keep reports stable under last-bit noise
    return float(f"{float(x):.6e}")


def suite_rng(cfg: RunConfig, name: str) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence([cfg.seed, zlib.crc32(name.encode())]))


# suites


def suite_trace(cfg: RunConfig, rng: np.random.Generator) -> list[Check]:
    """tr(AB) = tr(BA) for A on diagonal k and B on diagonal -k."""
    q, ts = cfg.q, (cfg.lam,) + TRACE_POINTS
    kw = dict(max_pow=1, max_q=1, nterms=2, min_q=0)
    worst = 0.0
    for trial in range(cfg.n_trials("trace", 100)):
        k = trial % 5
        ra = int(rng.integers(0, 3))
        rb = max(k, int(rng.integers(0, 3)))
        A = glq.random_graded(rng, k, ra, q, **kw)
        B = glq.random_graded(rng, -k, rb, q, **kw)
        d = glq.tr_glq(glq.mul_glq(A, B)) - glq.tr_glq(glq.mul_glq(B, A))
        worst = max(worst, max(d.eval(t).max_abs() for t in ts))
    return [Check("trace.commutator", worst, cfg.tol("trace"))]


def random_a0_function(rng: np.random.Generator, q: complex, max_deg: int = 6, max_q: int = 2, nterms: int = 4) -> a0.A0Function:
    terms = {}
    for _ in range(nterms):
        key = (int(rng.integers(0, max_deg + 1)), int(rng.integers(-max_q, max_q + 1)))
        terms[key] = complex(*rng.normal(size=2))
    return a0.A0Function(terms, q)


def suite_interpolation(cfg: RunConfig, rng: np.random.Generator) -> list[Check]:
    """Closed-form partial sums against direct summation for N = 1..40."""
    q = cfg.q
    worst = 0.0
    for _ in range(cfg.n_trials("interpolation", 50)):
        f = random_a0_function(rng, q)
        l = int(rng.integers(-4, 5))
        F = a0.interpolate_partial_sum(f, l, cfg.epsilon_generic)
        acc, scale = 0j, 0.0
        for N in range(1, 41):
            term = f.eval(N - 1) * qpow(q, (N - 1) * l)
            acc += term
            scale += abs(term)
            # relative to the absolute sum of the terms, absolute once that drops below 1
            worst = max(worst, abs(F.eval(N) - acc) / max(scale, 1.0))
    return [Check("interpolation.relative_error", worst, cfg.tol("interpolation"))]


def ll13_lhs(n: int, m: int, q: complex) -> complex:
    w = loopfin.root_of_unity(n)
    total = 0j
    for a in range(n):
        x = qpow(q, m) * w**a
        total += (1 + x) / (1 - x) ** 3 * x / n
    return total


def ll13_rhs(n: int, m: int, q: complex) -> complex:
    x = qpow(q, m * n)
    return n * n * x * (1 + x) / (1 - x) ** 3


def suite_ll13(cfg: RunConfig, rng: np.random.Generator) -> list[Check]:
    """Root-of-unity average of x (1 + x)/(1 - x)^3 against its closed form."""
    worst = 0.0
    for n in range(2, 7):
        for m in (-4, -3, -2, -1, 1, 2, 3, 4):
            worst = max(worst, abs(ll13_lhs(n, m, cfg.q) - ll13_rhs(n, m, cfg.q)))
    return [Check("ll13.closed_form", worst, cfg.tol("ll13"))]


def random_series(rng: np.random.Generator, exps: Sequence[int], scale: float = 1.0) -> LaurentSeries:
    return LaurentSeries({int(m): scale * complex(*rng.normal(size=2)) for m in exps})


def suite_tt13(cfg: RunConfig, rng: np.random.Generator) -> list[Check]:
    """The finite diagonal r-matrix restricted to U_n against (n/2)(1 + h^n)/(1 - h^n)."""
    q = cfg.q
    lo, hi = cfg.z_window
    exps = range(lo, hi + 1)
    worst = 0.0
    for trial in range(cfg.n_trials("tt13", 50)):
        n = 2 + trial % 2
        f, g = random_series(rng, exps), random_series(rng, exps)
        F, G = loopfin.DiagMatrix.u_element(f, n, q), loopfin.DiagMatrix.u_element(g, n, q)
        lhs = loopfin.diag_inner(loopfin.r0_finite(F, loopfin.FiniteRMatrixSpec(n), cfg.epsilon_generic), G)
        rhs = 0j
        for m, c in f.coeffs.items():
            if m != 0 and -m in g.coeffs:
                x = qpow(q, n * m)
                rhs += n * n / 2 * (1 + x) / (1 - x) * c * g.coeffs[-m]
        worst = max(worst, abs(lhs - rhs) / max(1.0, abs(rhs)))
    return [Check("tt13.bilinear_form", worst, cfg.tol("tt13"))]


def _random_field(rng: np.random.Generator, q: complex) -> glq.DiagField:
    return glq.DiagField(glq.random_a0l(rng, q, (-1, 0, 1), max_pow=1, max_q=1, nterms=2))


def _random_u(rng: np.random.Generator, q: complex) -> glq.DiagField:
    return glq.DiagField.u_element(random_series(rng, (-1, 0, 1)), q)


def _field_gap(f: glq.DiagField, g: glq.DiagField, ws: Sequence[complex]) -> float:
    d = f.f - g.f
    return max(d.eval(w).max_abs() for w in ws)


def _sample_rows(lam: complex) -> tuple:
    return (0, 1, 2, 3, lam, 1.5 + 0.5j, -0.7 + 0.3j)


def suite_p31(cfg: RunConfig, rng: np.random.Generator) -> list[Check]:
    """Shift calculus: A^-1, orthogonality of A(V_1) and U, the projection onto U, the shifted pairing."""
    q, lam = cfg.q, cfg.lam
    ws = _sample_rows(lam)
    inv = orth = proj = shift = 0.0
    for _ in range(cfg.n_trials("p31", 50)):
        v, F = glq.to_V(_random_field(rng, q)), _random_field(rng, q)
        inv = max(inv, _field_gap(glq.apply_A_inverse(glq.apply_A(v)), v, ws), _field_gap(glq.apply_A(glq.apply_A_inverse(F)), F, ws))
        v1, u = glq.to_V1(_random_field(rng, q), lam), _random_u(rng, q)
        orth = max(orth, abs(glq.field_inner(glq.apply_A(v1), u, lam)))
        P = glq.proj_U(F, lam)
        proj = max(
            proj,
            _field_gap(glq.proj_U(P, lam), P, ws),
            _field_gap(glq.proj_U(u, lam), u, ws),
            _field_gap(glq.proj_U(glq.apply_A(v1), lam), glq.DiagField.zero(q), ws),
        )
        f, g = glq.to_V(_random_field(rng, q)), glq.to_V(_random_field(rng, q))
        lhs = glq.field_inner(f, g, lam) - glq.field_inner(glq.shift_s(f), glq.shift_s(g), lam)
        shift = max(shift, abs(lhs + inner(f.at(lam), g.at(lam))))
    tol = cfg.tol("p31")
    return [
        Check("p31.inverse", inv, tol),
        Check("p31.orthogonality", orth, tol),
        Check("p31.projection", proj, tol),
        Check("p31.shifted_pairing", shift, tol),
    ]


def _skew_defect(f, g, spec, lam, eps) -> float:
    r = glq.r0_universal
    return abs(glq.field_inner(r(f, spec, eps), g, lam) + glq.field_inner(f, r(g, spec, eps), lam))


def suite_p32(cfg: RunConfig, rng: np.random.Generator) -> list[Check]:
    """Skew-symmetry of the universal diagonal r-matrix, detection of a non-skew B, and its constraint."""
    q, lam, eps = cfg.q, cfg.lam, cfg.epsilon_generic
    spec = glq.UniversalRMatrixSpec(lam, cfg.delta_or_default())
    bad = glq.UniversalRMatrixSpec(lam, cfg.delta_or_default(), {1: 0.2})
    ws = _sample_rows(lam)
    skew, detect, constraint = 0.0, float("inf"), 0.0
    for _ in range(cfg.n_trials("p32", 50)):
        f, g = _random_field(rng, q), _random_field(rng, q)
        skew = max(skew, _skew_defect(f, g, spec, lam, eps))
        detect = min(detect, _skew_defect(f, g, bad, lam, eps))
        v1 = glq.to_V1(_random_field(rng, q), lam)
        lhs = glq.r0_universal(glq.apply_A(v1), spec, eps)
        rhs = (v1 + glq.DiagField(glq.shift_s(v1).f.dilate(1))).scale(0.5)
        constraint = max(constraint, _field_gap(lhs, rhs, ws))
    return [
        Check("p32.skew", skew, cfg.tol("p32")),
        Check("p32.nonskew_detected", detect, cfg.tol("p32_detect"), "min"),
        Check("p32.constraint", constraint, cfg.tol("p32")),
    ]


def suite_l43(cfg: RunConfig, rng: np.random.Generator) -> list[Check]:
    """Universal r0 at integer size m against the finite r0 on U_m pairs."""
    q, eps = cfg.q, cfg.epsilon_generic
    out = []
    for label, delta in (("zero", {}), ("delta", cfg.delta_or_default())):
        worst = 0.0
        for m in (2, 3):
            fin = loopfin.FiniteRMatrixSpec(m, delta)
            uni = glq.UniversalRMatrixSpec(m, delta)
            for _ in range(cfg.n_trials("l43", 50)):
                f = loopfin.DiagMatrix.u_element(random_series(rng, (-2, -1, 0, 1, 2)), m, q)
                g = loopfin.DiagMatrix.u_element(random_series(rng, (-2, -1, 0, 1, 2)), m, q)
                a = loopfin.diag_inner(glq.r0_restricted(f, uni, eps), g)
                b = loopfin.diag_inner(loopfin.r0_finite(f, fin, eps), g)
                worst = max(worst, abs(a - b))
        out.append(Check(f"l43.restriction_{label}", worst, cfg.tol("l43")))
    return out


def suite_reduction(cfg: RunConfig, rng: np.random.Generator) -> list[Check]:
    """Finite and universal cross-section reductions."""
    q = cfg.q
    res = ident = 0.0
    for _ in range(cfg.n_trials("reduction_finite", 30)):
        L = loopfin.random_cross_section(rng, 3, q=q)
        red = loopfin.reduce_finite(L)
        res = max(res, red.residual(L))
        again = loopfin.reduce_finite(red.companion)
        ident = max(ident, (again.T - loopfin.LoopMatrix.identity(3, q)).max_abs())
    ures = uzero = 0.0
    reg_violations = 0
    for k in range(cfg.n_trials("reduction_universal", 20)):
        reg = 1 + k % 2
        L = reduction.YqElement.random(rng, reg=reg, ndiag=2, q=q, nterms=2, max_pow=0)
        red = reduction.reduce_universal(L, cfg.D_max, cfg.tol("structural_zero"))
        resid = reduction.verify_gauge(red.gauge, L, red.companion, cfg.D_max)
        ures = max(ures, max(resid.values()))
        uzero = max(uzero, red.max_zero)
        if red.gauge.regularity() > L.reg:
            reg_violations += 1
    return [
        Check("reduction.finite_residual", res, cfg.tol("reduction")),
        Check("reduction.finite_reidentity", ident, cfg.tol("identity")),
        Check("reduction.universal_residual", ures, cfg.tol("reduction")),
        Check("reduction.structural_zeros", uzero, cfg.tol("structural_zero")),
        Check("reduction.regularity_violations", reg_violations, 0.5),
    ]


def suite_involutivity(cfg: RunConfig, rng: np.random.Generator) -> list[Check]:
    """Spectral invariants commute under the involutive preset; Delta breaks a + b = c + d."""
    q = cfg.q
    F = psido.FunctionalSpec
    worst = 0.0
    for n in (2, 3):
        spec = poisson.QuadOperatorSpec.preset_e(n, q)
        for _ in range(cfg.n_trials("involutivity", 10)):
            L = psido.QPsiSymbol.lax(n, poisson.random_companion_us(rng, n), q)
            for m in (2, 3):
                worst = max(worst, abs(poisson.bracket_scalar(F.spectral(1), F.spectral(m), L, spec)))
    ms = [m for m in range(cfg.z_window[0], cfg.z_window[1] + 1)]
    zero_e = max(max(poisson.involutivity_residual(poisson.QuadOperatorSpec.preset_e(n, q), ms).values()) for n in (2, 3))
    zero_f48 = max(poisson.involutivity_residual(poisson.QuadOperatorSpec.preset_f48(cfg.lam, None, q), ms).values())
    delta = cfg.delta_or_default()
    full = poisson._skew_completion(delta)
    factor_err, smallest = 0.0, float("inf")
    for n in (2, 3):
        res = poisson.involutivity_residual(poisson.QuadOperatorSpec.preset_e161(n, delta, q), ms)
        for m, r in res.items():
            dm = full.get(m, 0j)
            expect = abs(dm * (2 - qpow(q, n * m) - qpow(q, -n * m)))
            factor_err = max(factor_err, abs(r - expect) / max(1.0, expect))
            if dm != 0:
                smallest = min(smallest, r)
    return [
        Check("involutivity.spectral_brackets", worst, cfg.tol("involutivity")),
        Check("involutivity.residual_preset_e", zero_e, cfg.tol("factor")),
        Check("involutivity.residual_f48_no_delta", zero_f48, cfg.tol("factor")),
        Check("involutivity.delta_factor", factor_err, cfg.tol("factor")),
        Check("involutivity.delta_detected", smallest, cfg.tol("involutivity"), "min"),
    ]


def suite_quotient(cfg: RunConfig, rng: np.random.Generator) -> list[Check]:
    """Matrix-side and scalar-side reduced brackets, with and without Delta."""
    q = cfg.q
    out = []
    jd = 0.0
    delta = cfg.delta_or_default()
    for n in (2, 3):
        for label, dl in (("zero", None), ("delta", delta)):
            rep = poisson.quotient_equivalence_check(n, dl, cfg.n_trials("quotient", 30), rng, q)
            out.append(Check(f"quotient.n{n}_{label}", rep.max_discrepancy, cfg.tol("quotient")))
        for _ in range(cfg.n_trials("jdelta", 10)):
            us = poisson.random_companion_us(rng, n)
            phi = poisson.random_coefficient_functional(rng, n)
            psi = poisson.random_coefficient_functional(rng, n)
            a, b = poisson.jdelta_contribution(phi, psi, us, delta, q)
            jd = max(jd, abs(a - b))
    out.append(Check("quotient.jdelta_two_ways", jd, cfg.tol("jdelta")))
    return out


def suite_jacobi(cfg: RunConfig, rng: np.random.Generator) -> list[Check]:
    """Cyclic sum of nested brackets with finite-difference inner gradients at n = 2."""
    q = cfg.q
    worst = 0.0
    for _ in range(cfg.n_trials("jacobi", 5)):
        us = poisson.random_companion_us(rng, 2)
        phis = [poisson.random_coefficient_functional(rng, 2, 1) for _ in range(3)]
        worst = max(worst, poisson.jacobi_residual(phis, us, lambda: poisson.QuadOperatorSpec.preset_e(2, q), q=q))
    return [Check("jacobi.cyclic_sum", worst, cfg.tol("jacobi"))]


SUITES: dict[str, Callable[[RunConfig, np.random.Generator], list[Check]]] = {
    "trace": suite_trace,
    "interpolation": suite_interpolation,
    "ll13": suite_ll13,
    "tt13": suite_tt13,
    "p31": suite_p31,
    "p32": suite_p32,
    "l43": suite_l43,
    "reduction": suite_reduction,
    "involutivity": suite_involutivity,
    "quotient-equivalence": suite_quotient,
    "jacobi": suite_jacobi,
}


def run_suite(name: str, cfg: RunConfig) -> list[Check]:
    return SUITES[name](cfg, suite_rng(cfg, name))


# commands


def _report(command: str, cfg: RunConfig, checks: list[Check], extra: dict | None = None) -> dict:
    rep = {"format": 1, "command": command, "config": cfg.to_records()}
    if extra:
        rep.update(extra)
    rep["checks"] = [c.to_records() for c in checks]
    rep["status"] = "pass" if all(c.passed for c in checks) else "fail"
    rep["summary"] = [c.summary() for c in checks]
    return rep


def cmd_verify(suite: str, cfg: RunConfig) -> tuple[dict, int]:
    names = list(SUITES) if suite == "all" else [suite]
    checks: list[Check] = []
    for name in names:
        checks.extend(run_suite(name, cfg))
    rep = _report("verify", cfg, checks, {"suite": suite})
    return rep, EXIT_OK if rep["status"] == "pass" else EXIT_TOLERANCE


def _read_input(path: str | None) -> dict:
    if path is None:
        return {}
    rec = load_yaml(path)
    if not isinstance(rec, dict) or rec.get("format") != 1:
        raise ConfigError("input must be a mapping with format: 1")
    return rec


def cmd_reduce(path: str | None, cfg: RunConfig) -> tuple[dict, int]:
    """Reduce a finite or universal input; a missing input means a seeded random one."""
    rec = _read_input(path)
    kind = rec.get("kind", "universal")
    q = cfg.q
    rng = suite_rng(cfg, "reduce")
    if kind == "finite":
        if "matrix" in rec:
            try:
                L = loopfin.LoopMatrix.from_records(rec["matrix"], q)
            except (KeyError, TypeError, ValueError) as exc:
                if isinstance(exc, ShapeError):
                    raise
                raise ConfigError(f"malformed loop matrix: {exc}") from exc
        else:
            L = loopfin.random_cross_section(rng, int(rec.get("n", 3)), q=q)
        red = loopfin.reduce_finite(L)
        checks = [Check("reduce.residual", red.residual(L), cfg.tol("reduction"))]
        extra = {
            "kind": "finite",
            "companion": [u.to_records() for u in red.us],
            "gauge": red.T.to_records(),
        }
    elif kind == "universal":
        if "matrix" in rec:
            L = reduction.YqElement.from_matrix(glq.GlqMatrix.from_records(rec["matrix"], q))
        else:
            L = reduction.YqElement.random(rng, reg=int(rec.get("reg", 1)), ndiag=int(rec.get("ndiag", 2)), q=q, nterms=2, max_pow=0)
        red = reduction.reduce_universal(L, cfg.D_max, cfg.tol("structural_zero"))
        resid = reduction.verify_gauge(red.gauge, L, red.companion, cfg.D_max)
        checks = [Check(f"reduce.residual_diagonal_{d}", v, cfg.tol("reduction")) for d, v in sorted(resid.items())]
        checks.append(Check("reduce.structural_zeros", red.max_zero, cfg.tol("structural_zero")))
        extra = {
            "kind": "universal",
            "companion": red.companion.to_records(),
            "gauge": {"depth": red.gauge.depth, "regularity": red.gauge.regularity(), "input_regularity": L.reg},
        }
    else:
        raise ConfigError(f"unknown input kind {kind!r}")
    rep = _report("reduce", cfg, checks, extra)
    return rep, EXIT_OK if rep["status"] == "pass" else EXIT_TOLERANCE


def parse_functional(text: str) -> psido.FunctionalSpec:
    """``coefficient:k,j``, ``elementary:i,j`` or ``spectral:m``."""
    try:
        kind, _, args = text.partition(":")
        vals = tuple(int(a) for a in args.split(",")) if args else ()
        return psido.FunctionalSpec(kind.strip(), vals)
    except ValueError as exc:
        raise ConfigError(f"cannot parse functional {text!r}: {exc}") from exc


def _read_operator(rec: dict, cfg: RunConfig, rng: np.random.Generator) -> psido.QPsiSymbol:
    op = rec.get("operator")
    if op is None:
        lam = cfg.lam
        n = psido.integer_part(lam)
        k = n if n is not None else 3
        return psido.QPsiSymbol.lax(lam, poisson.random_companion_us(rng, k), cfg.q)
    try:
        lam = parse_complex(op["lambda"], "lambda")
        us = [LaurentSeries.from_records(u) for u in op["us"]]
    except (KeyError, TypeError, ValueError) as exc:
        raise ConfigError(f"malformed operator: {exc}") from exc
    return psido.QPsiSymbol.lax(lam, us, cfg.q)


def _read_raw_quadruple(rec: dict) -> poisson.QuadOperatorSpec:
    raw = rec.get("raw")
    if raw is None:
        raise ConfigError("preset raw needs a 'raw' block with a, b, c, d")
    try:
        tabs = [{int(m): parse_complex(v) for m, v in (raw.get(k) or {}).items()} for k in "abcd"]
    except (AttributeError, TypeError, ValueError) as exc:
        raise ConfigError(f"malformed raw quadruple: {exc}") from exc
    return poisson.QuadOperatorSpec.raw(*tabs)


def cmd_bracket(phi: str, psi: str, path: str | None, preset: str, cfg: RunConfig) -> tuple[dict, int]:
    rec = _read_input(path)
    rng = suite_rng(cfg, "bracket")
    L = _read_operator(rec, cfg, rng)
    if preset == "raw":
        spec = _read_raw_quadruple(rec)
    else:
        spec = poisson.QuadOperatorSpec.preset(preset, L.base, cfg.q, dict(cfg.delta))
    f, g = parse_functional(phi), parse_functional(psi)
    v = poisson.bracket_scalar(f, g, L, spec)
    vr = poisson.bracket_scalar(g, f, L, spec)
    checks = [Check("bracket.skew", abs(v + vr), cfg.tol("involutivity"))]
    extra = {"preset": preset, "phi": f.label(), "psi": g.label(), "lambda": complex_record(L.base), "value": [_fmt(v.real), _fmt(v.imag)]}
    rep = _report("bracket", cfg, checks, extra)
    return rep, EXIT_OK if rep["status"] == "pass" else EXIT_TOLERANCE


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="YAML configuration (format: 1)")
    common.add_argument("--seed", type=int, help="override the configured seed")
    common.add_argument("--out", help="write the report here instead of stdout")
    common.add_argument("--tolerance", action="append", default=[], metavar="NAME=VAL", help="override a tolerance")

    p = argparse.ArgumentParser(prog="qdsred", description="q-deformed Drinfeld-Sokolov reduction toolkit")
    sub = p.add_subparsers(dest="command", required=True)
    r = sub.add_parser("reduce", parents=[common], help="reduce an input to companion form")
    r.add_argument("input", nargs="?", help="YAML input; omitted means a seeded random element")
    v = sub.add_parser("verify", parents=[common], help="run a verification suite")
    v.add_argument("--suite", required=True, choices=sorted(SUITES) + ["all"])
    b = sub.add_parser("bracket", parents=[common], help="evaluate a scalar bracket")
    b.add_argument("phi", help="functional, e.g. coefficient:1,0 or spectral:2")
    b.add_argument("psi")
    b.add_argument("--input", help="YAML with the operator (and the raw quadruple)")
    b.add_argument("--preset", default="e", choices=["e", "e161", "f48", "raw"])
    return p


def _emit(rep: dict, out: str | None) -> None:
    text = dump_yaml(rep)
    if out:
        with open(out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    for line in rep.get("summary", []):
        sys.stderr.write(line + "\n")


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = RunConfig.load(args.config) if args.config else RunConfig()
        overrides = dict(parse_tolerance_override(t) for t in args.tolerance)
        cfg = cfg.with_overrides(args.seed, overrides).validate()
        if args.command == "verify":
            rep, code = cmd_verify(args.suite, cfg)
        elif args.command == "reduce":
            rep, code = cmd_reduce(args.input, cfg)
        else:
            rep, code = cmd_bracket(args.phi, args.psi, args.input, args.preset, cfg)
    except ConfigError as exc:
        sys.stderr.write(f"error: {exc}\n")
        return EXIT_PARSE
    except (ShapeError, DegreeMismatch) as exc:
        sys.stderr.write(f"shape error: {exc}\n")
        return EXIT_SHAPE
    except (NonGenericParameter, ZeroLambda) as exc:
        sys.stderr.write(f"non-generic parameters: {exc}\n")
        return EXIT_NONGENERIC
    except (ConsistencyError, QdsError) as exc:
        sys.stderr.write(f"tolerance failure: {exc}\n")
        return EXIT_TOLERANCE
    _emit(rep, args.out)
    return code


if __name__ == "__main__":
    sys.exit(main())
