"""
Moment integrals α_{r,q}, β_{r,q} and the constants (A1, A2).

    α_{r,q} = ∫_{-1}^{1} (t+a)^q t^r p_c(t) dt
    β_{r,q} = ∫_{-1}^{1} κ(t) t^r (t+a)^q dt + (-1)^r (a-1)^q p_c(-1) + (a+1)^q p_c(1)

with κ the curvature density. Exact mode integrates term by term in powers
of (t+a); float mode uses adaptive Gauss–Kronrod quadrature (QUADPACK).
"""

import math
import logging
from dataclasses import dataclass
from fractions import Fraction
from typing import Dict, Tuple

from scipy import integrate

from .core import (AdmissibleSetup, NumericContext, Poly, RationalFn, Scalar, WeightParams,
                   curvature_density, momentum_polynomial)
from .errors import InternalInconsistencyError, LogObstructionError, ModeMismatchError, PreconditionError

logger = logging.getLogger(__name__)

QUAD_EPSREL = 1e-12
QUAD_EPSABS = 1e-14
QUAD_LIMIT = 200


@dataclass(frozen=True)
class MomentKey:
    r: int
    q: Scalar


@dataclass(frozen=True)
class ExtremalConstants:
    """Affine coefficients of the weighted scalar curvature, Scal = A1 z + A2."""

    A1: Scalar
    A2: Scalar
    determinant: Scalar


def _require_same_mode(setup: AdmissibleSetup, w: WeightParams) -> NumericContext:
    if setup.ctx != w.ctx:
        raise ModeMismatchError(
            f"Setup is {setup.ctx.mode.value} but weight is {w.ctx.mode.value}")
    return setup.ctx


def _exact_exponent(q: Scalar) -> int:
    if isinstance(q, float) or Fraction(q).denominator != 1:
        raise PreconditionError(f"Exact moments need an integer exponent, got {q}")
    return int(q)


def integrate_poly_times_power(poly: Poly, a: Scalar, q: Scalar, lo: Scalar, hi: Scalar,
                               ctx: NumericContext) -> Scalar:
    """
    ∫_{lo}^{hi} P(t) (t+a)^q dt for lo, hi ≥ -1 and a > 1.

    Raises:
        LogObstructionError: exact mode, when a term (t+a)^{-1} has nonzero coefficient
    """
    if poly.is_zero():
        return ctx.zero
    if ctx.exact:
        q = _exact_exponent(q)
        shifted = poly.shift(-a)
        total = Fraction(0)
        upper, lower = hi + a, lo + a
        for k, e_k in enumerate(shifted.coeffs):
            if e_k == 0:
                continue
            n = q + k
            if n == -1:
                raise LogObstructionError(n)
            total += e_k * (upper ** (n + 1) - lower ** (n + 1)) / (n + 1)
        return total

    fpoly = poly.to_float()
    af, qf = float(a), float(q)
    value, abserr = integrate.quad(lambda t: fpoly(t) * (t + af) ** qf, float(lo), float(hi),
                                   epsabs=QUAD_EPSABS, epsrel=QUAD_EPSREL, limit=QUAD_LIMIT)
    if abserr > 1e-10 * max(1.0, abs(value)):
        logger.warning(f"⚠️ Quadrature error estimate {abserr:.2e} for q={qf}, a={af}")
    return value


def alpha(setup: AdmissibleSetup, w: WeightParams, r: int, q: Scalar) -> Scalar:
    ctx = _require_same_mode(setup, w)
    integrand = Poly.monomial(r, ctx.one) * momentum_polynomial(setup)
    return integrate_poly_times_power(integrand, w.a, q, -ctx.one, ctx.one, ctx)


def beta(setup: AdmissibleSetup, w: WeightParams, r: int, q: Scalar) -> Scalar:
    ctx = _require_same_mode(setup, w)
    one = ctx.one
    pc = momentum_polynomial(setup)
    integrand = Poly.monomial(r, one) * curvature_density(setup)
    bulk = integrate_poly_times_power(integrand, w.a, q, -one, one, ctx)
    sign = one if r % 2 == 0 else -one
    boundary = sign * ctx.power(w.a - 1, q) * pc(-one) + ctx.power(w.a + 1, q) * pc(one)
    return bulk + boundary


def moment_table(setup: AdmissibleSetup, w: WeightParams) -> Dict[MomentKey, Scalar]:
    """The five moments entering the linear system for (A1, A2)."""
    q_alpha, q_beta = -(w.p + 1), 1 - w.p
    table: Dict[MomentKey, Scalar] = {}
    for r in (0, 1, 2):
        table[MomentKey(r, q_alpha)] = alpha(setup, w, r, q_alpha)
    for r in (0, 1):
        table[MomentKey(r, q_beta)] = beta(setup, w, r, q_beta)
    return table


def solve_extremal_constants(setup: AdmissibleSetup, w: WeightParams) -> ExtremalConstants:
    """
    Solve the 2×2 system for (A1, A2).

        α_{1,-(p+1)} A1 + α_{0,-(p+1)} A2 = 2 β_{0,1-p}
        α_{2,-(p+1)} A1 + α_{1,-(p+1)} A2 = 2 β_{1,1-p}

    Raises:
        InternalInconsistencyError: the determinant α1² - α0 α2 is not negative
    """
    table = moment_table(setup, w)
    q_alpha, q_beta = -(w.p + 1), 1 - w.p
    a0, a1, a2 = (table[MomentKey(r, q_alpha)] for r in (0, 1, 2))
    b0, b1 = (table[MomentKey(r, q_beta)] for r in (0, 1))

    det = a1 * a1 - a0 * a2
    if not det < 0:
        raise InternalInconsistencyError(
            f"Moment determinant α1²-α0α2 = {det} is not negative (Cauchy–Schwarz violated)")
    A1 = (2 * b0 * a1 - 2 * b1 * a0) / det
    A2 = (2 * b1 * a1 - 2 * b0 * a2) / det
    logger.debug(f"Extremal constants A1={A1}, A2={A2} (det={det})")
    return ExtremalConstants(A1=A1, A2=A2, determinant=det)


def partial_moment(poly: Poly, w: WeightParams, q: Scalar, zeta: Scalar) -> Scalar:
    """∫_{-1}^{ζ} (ζ - t) P(t) (t+a)^q dt."""
    ctx = w.ctx
    kernel = Poly([zeta, -ctx.one])
    return integrate_poly_times_power(kernel * poly, w.a, q, -ctx.one, zeta, ctx)


# Moments as exact rational functions of the weight parameter a.

def _binomial_shift_in_a(poly: Poly) -> Dict[int, Poly]:
    """Coefficients e_k(a) with P(t) = Σ_k e_k(a) (t+a)^k, each a polynomial in a."""
    coeffs: Dict[int, Poly] = {}
    for j, p_j in enumerate(poly.coeffs):
        if p_j == 0:
            continue
        for k in range(j + 1):
            term = Poly.monomial(j - k, Fraction(math.comb(j, k)) * p_j * (-1) ** (j - k))
            coeffs[k] = coeffs.get(k, Poly()) + term
    return coeffs


def _power_span_in_a(n: int) -> Tuple[Poly, int]:
    """
    ∫_{-1}^{1} (t+a)^n dt = N(a) / (a²-1)^ℓ; returns (N, ℓ).

    Raises:
        LogObstructionError: n = -1
    """
    one = Fraction(1)
    plus, minus = Poly([one, one]), Poly([-one, one])
    if n == -1:
        raise LogObstructionError(n)
    if n >= 0:
        e = n + 1
        return (plus ** e - minus ** e) / e, 0
    ell = -(n + 1)
    return (plus ** ell - minus ** ell) / ell, ell


def _endpoint_power_in_a(q: int, sign: int) -> Tuple[Poly, int]:
    """(a + sign)^q as N(a) / (a²-1)^ℓ."""
    one = Fraction(1)
    base = Poly([Fraction(sign), one])
    if q >= 0:
        return base ** q, 0
    other = Poly([Fraction(-sign), one])
    return other ** (-q), -q


def _assemble(terms) -> RationalFn:
    """Sum Σ coeff(a) · N(a) / (a²-1)^ℓ over a list of (coeff, N, ℓ)."""
    terms = list(terms)
    if not terms:
        return RationalFn(Poly())
    big = max(ell for _, _, ell in terms)
    base = Poly([Fraction(-1), Fraction(0), Fraction(1)])
    num = Poly()
    for coeff, n_poly, ell in terms:
        num = num + coeff * n_poly * base ** (big - ell)
    return RationalFn(num, base ** big)


def alpha_in_a(setup: AdmissibleSetup, r: int, q: int) -> RationalFn:
    """α_{r,q} as an exact rational function of a."""
    if not setup.ctx.exact:
        raise PreconditionError("Rational functions of a need an exact setup")
    integrand = Poly.monomial(r, Fraction(1)) * momentum_polynomial(setup)
    terms = []
    for k, e_k in _binomial_shift_in_a(integrand).items():
        if e_k.is_zero():
            continue
        n_poly, ell = _power_span_in_a(q + k)
        terms.append((e_k, n_poly, ell))
    return _assemble(terms)


def beta_in_a(setup: AdmissibleSetup, r: int, q: int) -> RationalFn:
    """β_{r,q} as an exact rational function of a."""
    if not setup.ctx.exact:
        raise PreconditionError("Rational functions of a need an exact setup")
    one = Fraction(1)
    pc = momentum_polynomial(setup)
    integrand = Poly.monomial(r, one) * curvature_density(setup)
    terms = []
    for k, e_k in _binomial_shift_in_a(integrand).items():
        if e_k.is_zero():
            continue
        n_poly, ell = _power_span_in_a(q + k)
        terms.append((e_k, n_poly, ell))
    sign = 1 if r % 2 == 0 else -1
    n_minus, ell_minus = _endpoint_power_in_a(q, -1)
    n_plus, ell_plus = _endpoint_power_in_a(q, 1)
    terms.append((Poly([sign * pc(-one)]), n_minus, ell_minus))
    terms.append((Poly([pc(one)]), n_plus, ell_plus))
    return _assemble(terms)


def extremal_constants_in_a(setup: AdmissibleSetup, p: int) -> Tuple[RationalFn, RationalFn]:
    """(A1(a), A2(a)) as exact rational functions; needs integer p ≥ m+2 or p ≤ -1."""
    if not (p >= setup.m + 2 or p <= -1):
        raise PreconditionError(f"Rational A1(a) needs p >= m+2 = {setup.m + 2} or p <= -1, got {p}")
    q_alpha, q_beta = -(p + 1), 1 - p
    a0, a1, a2 = (alpha_in_a(setup, r, q_alpha) for r in (0, 1, 2))
    b0, b1 = (beta_in_a(setup, r, q_beta) for r in (0, 1))
    det = a1 * a1 - a0 * a2
    A1 = ((b0 * a1 - b1 * a0) * 2 / det).cancel_roots([Fraction(1), Fraction(-1)])
    A2 = ((b1 * a1 - b0 * a2) * 2 / det).cancel_roots([Fraction(1), Fraction(-1)])
    return A1, A2
