"""
Fibre profiles F(z) of admissible metrics.

A profile is either exact (a finite sum of polynomial multiples of powers of
z + a) or numeric (a Chebyshev representation of G = F/(z+a)^{p-1}). Both
expose a sampler returning (F, F', F'') and work with numpy arrays in float
mode.
"""

import logging
from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from typing import Any, Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np
import sympy
from numpy.polynomial import Chebyshev
from numpy.polynomial import chebyshev as cheb

from .core import (FLOAT, AdmissibleSetup, NumericContext, Poly, Scalar, WeightParams, curvature_density,
                   momentum_polynomial, parse_fraction, to_sympy)
from .errors import InternalInconsistencyError, ModeMismatchError, PreconditionError
from .moments import ExtremalConstants, solve_extremal_constants
from .rootfinding import RealRoot, isolate_real_roots, refine_minimum, richardson_limit

logger = logging.getLogger(__name__)

POSITIVITY_GRID = 2048
RESIDUAL_GRID = 257
POSITIVITY_RTOL = 1e-10
CHEBYSHEV_DEGREES = (64, 128, 256, 512, 1024, 2048, 4096)


class ProfileKind(str, Enum):
    EXACT_ANSATZ = "exact-ansatz"
    NUMERIC = "numeric"
    REFERENCE = "reference"


class PositivityStatus(str, Enum):
    POSITIVE = "positive"
    NONNEGATIVE_WITH_ZERO = "nonnegative-with-interior-zero"
    NEGATIVE_SOMEWHERE = "negative-somewhere"
    INCONCLUSIVE = "inconclusive"


@dataclass(frozen=True)
class InteriorZero:
    z: float
    multiplicity: int
    rational: bool


@dataclass(frozen=True)
class PositivityVerdict:
    status: PositivityStatus
    witness_z: Optional[Scalar] = None
    witness_F: Optional[Scalar] = None
    interior_zeros: Tuple[InteriorZero, ...] = ()
    method: str = "exact"

    def to_dict(self) -> Dict[str, Any]:
        return {
            "status": self.status.value,
            "witness_z": self.witness_z,
            "witness_F": self.witness_F,
            "interior_zeros": [zero.__dict__ for zero in self.interior_zeros],
            "method": self.method,
        }


class PolyPowerSum:
    """
    Σ_i P_i(z) (z+a)^{e_i}, evaluated with its first two derivatives.

    Exponents are ints in exact mode, floats otherwise.
    """

    def __init__(self, a: Scalar, terms: Sequence[Tuple[Poly, Scalar]]):
        self.a = a
        self.terms = [(poly, poly.derivative(), poly.derivative(2), e) for poly, e in terms
                      if not poly.is_zero()]

    def derivs(self, z) -> Tuple[Any, Any, Any]:
        w = z + self.a
        v = d1 = d2 = 0 * z
        for poly, dpoly, d2poly, e in self.terms:
            pz, dpz, d2pz = poly(z), dpoly(z), d2poly(z)
            we2 = w ** (e - 2)
            we1 = we2 * w
            we = we1 * w
            v = v + pz * we
            d1 = d1 + dpz * we + e * pz * we1
            d2 = d2 + d2pz * we + 2 * e * dpz * we1 + e * (e - 1) * pz * we2
        return v, d1, d2

    def __call__(self, z):
        return self.derivs(z)[0]


@dataclass(frozen=True)
class PolyForm:
    """F(z) = N(z) (z+a)^e with N a polynomial in z and an integer e ≤ 0."""

    numerator: Poly
    exponent: int


@dataclass(frozen=True)
class Profile:
    kind: ProfileKind
    setup: AdmissibleSetup
    w: WeightParams
    sampler: Callable[[Any], Tuple[Any, Any, Any]]
    constants: Optional[ExtremalConstants] = None
    coeffs_in_a_basis: Optional[Dict[Scalar, Scalar]] = None
    poly_form: Optional[PolyForm] = None
    condition_estimate: Optional[float] = None
    description: str = ""

    @property
    def ctx(self) -> NumericContext:
        return self.setup.ctx

    def F(self, z):
        return self.sampler(z)[0]

    def dF(self, z):
        return self.sampler(z)[1]

    def d2F(self, z):
        return self.sampler(z)[2]


def _check_modes(setup: AdmissibleSetup, w: WeightParams) -> NumericContext:
    if setup.ctx != w.ctx:
        raise ModeMismatchError(
            f"Setup is {setup.ctx.mode.value} but weight is {w.ctx.mode.value}")
    return setup.ctx


def _exponent(value: Scalar, ctx: NumericContext) -> Scalar:
    return int(value) if ctx.exact else float(value)


def build_Q(setup: AdmissibleSetup, w: WeightParams, constants: ExtremalConstants) -> PolyPowerSum:
    """
    Q(z) = 2κ(z)(z+a)^{1-p} - (A1 z + A2) p_c(z) (z+a)^{-(p+1)}, the target of G''.
    """
    ctx = _check_modes(setup, w)
    p = _exponent(w.p, ctx)
    kappa = curvature_density(setup)
    pc = momentum_polynomial(setup)
    linear = Poly([constants.A2, constants.A1])
    return PolyPowerSum(w.a, [(kappa * 2, 1 - p), (-(linear * pc), -(p + 1))])


def _w_poly(a: Scalar, one: Scalar) -> Poly:
    return Poly([a, one])


def _poly_form_from_w_terms(coeffs: Dict[int, Scalar], a: Scalar, one: Scalar) -> PolyForm:
    e = min(0, min(coeffs))
    w = _w_poly(a, one)
    numerator = Poly()
    for k, c in coeffs.items():
        numerator = numerator + (w ** (k - e)) * c
    return PolyForm(numerator, e)


def _solve_linear(matrix: List[List[Scalar]], rhs: List[Scalar], ctx: NumericContext) -> List[Scalar]:
    if ctx.exact:
        m = sympy.Matrix([[to_sympy(v) for v in row] for row in matrix])
        b = sympy.Matrix([to_sympy(v) for v in rhs])
        if m.det() == 0:
            raise InternalInconsistencyError("Singular endpoint system in the profile ansatz")
        return [parse_fraction(v) for v in m.LUsolve(b)]
    try:
        return [float(v) for v in np.linalg.solve(np.array(matrix, dtype=float), np.array(rhs, dtype=float))]
    except np.linalg.LinAlgError as e:
        raise InternalInconsistencyError(f"Singular endpoint system in the profile ansatz: {str(e)}")


def build_profile_ansatz(setup: AdmissibleSetup, w: WeightParams) -> Profile:
    """
    Profile from F = c_p (z+a)^p + c_{p-1} (z+a)^{p-1} + Σ_{k=0}^{m} c_k (z+a)^k.

    The operator -(z+a)²F'' + 2(p-1)(z+a)F' - p(p-1)F is diagonal on powers
    of (z+a) with eigenvalue μ_k = -(k-p)(k-p+1); c_k = r_k/μ_k for the
    right-hand side coefficients r_k, and the four endpoint conditions fix
    (A1, A2, c_{p-1}, c_p).

    Args:
        setup: Admissible data
        w: Weight parameters; exact mode needs integer p with p ≥ m+2 or p ≤ -1,
            float mode accepts any real p outside {0, ..., m+1}

    Returns:
        Profile carrying its own (A1, A2)
    """
    ctx = _check_modes(setup, w)
    m = setup.m
    if ctx.exact:
        p = w.require_exact_path(m)
    else:
        p = float(w.p)
        if p.is_integer() and 0 <= p <= m + 1:
            raise PreconditionError(f"Ansatz needs p outside {{0,...,{m + 1}}}, got {p}")
    a, one = w.a, ctx.one
    pc = momentum_polynomial(setup)
    kappa = curvature_density(setup)
    zpoly = Poly([ctx.zero, one])
    wpoly = _w_poly(a, one)

    # right-hand side (A1 z + A2) p_c - 2 (z+a)² κ in the (z+a) basis
    r1 = (zpoly * pc).shift(-a)
    r2 = pc.shift(-a)
    r0 = (wpoly * wpoly * kappa * (-2)).shift(-a)
    mu = [-(k - p) * (k - p + 1) for k in range(m + 1)]

    def particular(r: Poly, wv: Scalar, derivative: bool) -> Scalar:
        total = ctx.zero
        for k in range(m + 1):
            c = r.coeff(k)
            if c == 0:
                continue
            if derivative:
                if k:
                    total += k * c / mu[k] * wv ** (k - 1)
            else:
                total += c / mu[k] * wv ** k
        return total

    matrix, rhs = [], []
    for zv in (one, -one):
        wv = zv + a
        matrix.append([particular(r1, wv, False), particular(r2, wv, False), wv ** (p - 1), wv ** p])
        rhs.append(-particular(r0, wv, False))
        matrix.append([particular(r1, wv, True), particular(r2, wv, True),
                       (p - 1) * wv ** (p - 2), p * wv ** (p - 1)])
        rhs.append(-2 * zv * pc(zv) - particular(r0, wv, True))

    A1, A2, c_pm1, c_p = _solve_linear(matrix, rhs, ctx)
    coeffs: Dict[Scalar, Scalar] = {}
    for k in range(m + 1):
        coeffs[k] = (A1 * r1.coeff(k) + A2 * r2.coeff(k) + r0.coeff(k)) / mu[k]
    coeffs[p - 1] = c_pm1
    coeffs[p] = c_p

    series = PolyPowerSum(a, [(Poly([c]), e) for e, c in coeffs.items()])
    poly_form = None
    if ctx.exact or float(p).is_integer():
        poly_form = _poly_form_from_w_terms({int(e): c for e, c in coeffs.items()}, a, one)
    logger.debug(f"Ansatz profile: A1={A1}, A2={A2}, c_p={c_p}, c_(p-1)={c_pm1}")
    return Profile(
        kind=ProfileKind.EXACT_ANSATZ,
        setup=setup,
        w=w,
        sampler=series.derivs,
        constants=ExtremalConstants(A1=A1, A2=A2, determinant=None),
        coeffs_in_a_basis=coeffs,
        poly_form=poly_form,
        description=f"ansatz a={a} p={p}",
    )


def build_profile_integral(setup: AdmissibleSetup, w: WeightParams,
                           constants: Optional[ExtremalConstants] = None) -> Profile:
    """
    Numeric profile from G(z) = G'(-1)(z+1) + ∫_{-1}^{z} Q(t)(z-t) dt.

    Q is interpolated by a Chebyshev series whose degree grows until the tail
    coefficients are negligible; the series is then integrated twice exactly.
    Exact inputs are converted to float.

    Raises:
        InternalInconsistencyError: F(1) or F'(1) + 2p_c(1) exceeds tolerance
    """
    _check_modes(setup, w)
    if setup.ctx.exact:
        setup = setup.in_mode(FLOAT)
        w = WeightParams(float(w.a), float(w.p), FLOAT)
    if constants is None or isinstance(constants.A1, Fraction):
        constants = solve_extremal_constants(setup, w)
    a, p = float(w.a), float(w.p)
    pc = momentum_polynomial(setup)
    q_fn = build_Q(setup, w, constants)

    coeffs = None
    for deg in CHEBYSHEV_DEGREES:
        coeffs = cheb.chebinterpolate(q_fn, deg)
        head = float(np.max(np.abs(coeffs)))
        tail = float(np.max(np.abs(coeffs[-4:])))
        if head == 0.0 or tail <= 1e-15 * head:
            break
    else:
        logger.warning(f"⚠️ Chebyshev series for Q did not settle by degree {CHEBYSHEV_DEGREES[-1]}")

    g2 = Chebyshev(coeffs)
    gp_minus = 2.0 * pc(-1.0) * (a - 1.0) ** (1.0 - p)
    g1 = g2.integ(1, k=[gp_minus], lbnd=-1)
    g0 = g1.integ(1, k=[0.0], lbnd=-1)

    def sampler(z):
        wz = z + a
        G, G1, G2 = g0(z), g1(z), g2(z)
        wp1 = wz ** (p - 1.0)
        F = wp1 * G
        F1 = (p - 1.0) * wz ** (p - 2.0) * G + wp1 * G1
        F2 = ((p - 1.0) * (p - 2.0) * wz ** (p - 3.0) * G + 2.0 * (p - 1.0) * wz ** (p - 2.0) * G1
              + wp1 * G2)
        return F, F1, F2

    grid = np.linspace(-1.0, 1.0, RESIDUAL_GRID)
    scale = max(1.0, float(np.max(np.abs(sampler(grid)[0]))))
    condition = float(np.max(np.abs(g0(grid)))) * max((a + 1.0) ** (p - 1.0), (a - 1.0) ** (p - 1.0)) / scale
    F1_val, dF1_val, _ = sampler(1.0)
    res_value = abs(F1_val)
    res_slope = abs(dF1_val + 2.0 * pc(1.0))
    slack = max(1.0, condition)
    logger.debug(f"Integral profile residuals F(1)={res_value:.2e}, slope={res_slope:.2e}, cond={condition:.2e}")
    if res_value > 1e-10 * scale * slack or res_slope > 1e-8 * scale * slack:
        raise InternalInconsistencyError(
            f"Compatibility residuals too large: |F(1)|={res_value:.3e}, "
            f"|F'(1)+2p_c(1)|={res_slope:.3e} (condition {condition:.2e})")
    return Profile(
        kind=ProfileKind.NUMERIC,
        setup=setup,
        w=w,
        sampler=sampler,
        constants=constants,
        condition_estimate=condition,
        description=f"integral a={a} p={p} chebyshev-degree={len(coeffs) - 1}",
    )


def build_profile(setup: AdmissibleSetup, w: WeightParams) -> Profile:
    """Exact mode: ansatz. Float mode: ansatz unless p ∈ {0,...,m+1}, then the integral builder."""
    ctx = _check_modes(setup, w)
    if ctx.exact:
        return build_profile_ansatz(setup, w)
    p = float(w.p)
    if p.is_integer() and 0 <= p <= setup.m + 1:
        return build_profile_integral(setup, w)
    return build_profile_ansatz(setup, w)


def profile_from_theta(setup: AdmissibleSetup, w: WeightParams, theta_poly: Poly,
                       description: str = "") -> Profile:
    """Reference profile F = Θ p_c for a polynomial Θ."""
    _check_modes(setup, w)
    numerator = theta_poly * momentum_polynomial(setup)
    series = PolyPowerSum(w.a, [(numerator, 0)])
    return Profile(
        kind=ProfileKind.REFERENCE,
        setup=setup,
        w=w,
        sampler=series.derivs,
        poly_form=PolyForm(numerator, 0),
        description=description or f"theta={theta_poly.coeffs}",
    )


def canonical_profile(setup: AdmissibleSetup, w: WeightParams) -> Profile:
    """F_c = (1 - z²) p_c, i.e. Θ = 1 - z²."""
    one = setup.ctx.one
    return profile_from_theta(setup, w, Poly([one, 0 * one, -one]), description="canonical theta=1-z^2")


def _strip_endpoint(numerator: Poly, denominator: Poly, root: Scalar) -> Tuple[Poly, Poly, int]:
    num_q, k_num = numerator.strip_root(root)
    den_q, k_den = denominator.strip_root(root)
    if k_num < k_den:
        raise PreconditionError(f"Nonremovable zero of p_c at z={root}")
    return num_q * Poly([-root, 1]) ** (k_num - k_den), den_q, 0


def _ratio_derivs(num: Poly, e: int, den: Poly, a: Scalar, z: Scalar) -> Tuple[Scalar, Scalar]:
    """Value and derivative of num(z)(z+a)^e / den(z)."""
    wz = z + a
    n, dn = num(z), num.derivative()(z)
    d, dd = den(z), den.derivative()(z)
    top = n * wz ** e
    dtop = dn * wz ** e + e * n * wz ** (e - 1)
    return top / d, (dtop * d - top * dd) / (d * d)


def theta(prof: Profile, z: Scalar, derivative: int = 0) -> Scalar:
    """
    Θ(z) = F(z)/p_c(z) (derivative=0) or Θ'(z) (derivative=1).

    Zeros of p_c at z = ±1 are cancelled exactly when the profile has a
    polynomial form, and extrapolated otherwise.
    """
    if derivative not in (0, 1):
        raise PreconditionError("theta supports derivative 0 or 1")
    pc = momentum_polynomial(prof.setup)
    if pc(z) != 0:
        F, F1, _ = prof.sampler(z)
        pcz = pc(z)
        if derivative == 0:
            return F / pcz
        return (F1 * pcz - F * pc.derivative()(z)) / (pcz * pcz)
    if z not in (1, -1):
        raise PreconditionError(f"p_c vanishes at interior point {z}")
    if prof.poly_form is not None and prof.ctx.exact:
        num, den, _ = _strip_endpoint(prof.poly_form.numerator, pc, z)
        return _ratio_derivs(num, prof.poly_form.exponent, den, prof.w.a, z)[derivative]
    value, err = richardson_limit(lambda t: theta(prof, t, derivative), float(z))
    logger.debug(f"Extrapolated theta at z={z}: {value} (± {err:.1e})")
    return value


def weighted_scalar_curvature(prof: Profile, z: Scalar) -> Scalar:
    """
    Scal_{z+a,p} = (-(z+a)²F'' + 2(p-1)(z+a)F' - p(p-1)F)/p_c + 2(z+a)²κ/p_c.

    For solver profiles this equals A1 z + A2.
    """
    setup, w = prof.setup, prof.w
    ctx = setup.ctx
    p = _exponent(w.p, ctx)
    pc = momentum_polynomial(setup)
    kappa = curvature_density(setup)
    pcz = pc(z)
    if pcz != 0:
        F, F1, F2 = prof.sampler(z)
        wz = z + w.a
        return (-wz * wz * F2 + 2 * (p - 1) * wz * F1 - p * (p - 1) * F + 2 * wz * wz * kappa(z)) / pcz
    if z not in (1, -1):
        raise PreconditionError(f"p_c vanishes at interior point {z}")
    if prof.poly_form is not None and prof.ctx.exact:
        N, e = prof.poly_form.numerator, prof.poly_form.exponent
        wpoly = _w_poly(w.a, ctx.one)
        dN, d2N = N.derivative(), N.derivative(2)
        M = (-(wpoly * wpoly * d2N + wpoly * dN * (2 * e) + N * (e * (e - 1)))
             + (wpoly * dN + N * e) * (2 * (p - 1)) - N * (p * (p - 1)))
        numerator = M + (wpoly ** (2 - e)) * kappa * 2
        num_q, den_q, _ = _strip_endpoint(numerator, pc, z)
        return num_q(z) / den_q(z) * (z + w.a) ** e
    value, err = richardson_limit(lambda t: weighted_scalar_curvature(prof, t), float(z))
    if err > 1e-6 * max(1.0, abs(value)):
        logger.warning(f"⚠️ Endpoint scalar curvature extrapolation is inaccurate (± {err:.1e})")
    return value


def chebyshev_nodes(n: int = POSITIVITY_GRID) -> np.ndarray:
    """Interior Chebyshev points of the first kind, increasing."""
    return np.sort(np.cos(np.pi * (np.arange(n) + 0.5) / n))


def _exact_positivity(prof: Profile) -> PositivityVerdict:
    N = prof.poly_form.numerator
    one = Fraction(1)
    stripped, _ = N.strip_root(one)
    stripped, _ = stripped.strip_root(-one)
    if stripped.is_zero():
        raise InternalInconsistencyError("Profile numerator vanishes identically")

    roots: List[RealRoot] = isolate_real_roots(stripped, lo=-one, hi=one, include_hi=False)
    # one exact sample strictly between consecutive isolating intervals decides the sign there
    lefts = [-one] + [r.exact if r.exact is not None else r.hi for r in roots]
    rights = [r.exact if r.exact is not None else r.lo for r in roots] + [one]
    for left, right in zip(lefts, rights):
        mid = (left + right) / 2
        value = prof.F(mid)
        if value < 0:
            return PositivityVerdict(PositivityStatus.NEGATIVE_SOMEWHERE, witness_z=mid, witness_F=value)
    for r in roots:
        if r.multiplicity % 2:
            side = min((max(r.lo, -one), min(r.hi, one)), key=lambda z: prof.F(z))
            return PositivityVerdict(PositivityStatus.NEGATIVE_SOMEWHERE, witness_z=side, witness_F=prof.F(side),
                                     interior_zeros=(InteriorZero(r.value, r.multiplicity, r.rational),))
    if not roots:
        return PositivityVerdict(PositivityStatus.POSITIVE)
    zeros = tuple(InteriorZero(r.value, r.multiplicity, r.rational) for r in roots)
    first = roots[0]
    witness = first.exact if first.exact is not None else Fraction(first.value)
    return PositivityVerdict(PositivityStatus.NONNEGATIVE_WITH_ZERO, witness_z=witness,
                             witness_F=prof.F(witness), interior_zeros=zeros)


def _numeric_positivity(prof: Profile) -> PositivityVerdict:
    setup = prof.setup
    pc = momentum_polynomial(setup).to_float()
    nodes = chebyshev_nodes()
    a = float(prof.w.a)

    def psi(z):
        F = prof.F(z if not prof.ctx.exact else Fraction(float(z)))
        return float(F) / ((1.0 - z * z) * pc(z))

    if prof.ctx.exact:
        values = np.array([psi(z) for z in nodes])
    else:
        values = np.asarray(prof.F(nodes), dtype=float) / ((1.0 - nodes * nodes) * pc(nodes))
    scale = float(np.max(np.abs(values)))
    threshold = POSITIVITY_RTOL * scale
    i = int(np.argmin(values))
    if values[i] > threshold and values[i] > 1e-3 * scale:
        return PositivityVerdict(PositivityStatus.POSITIVE, method="numeric")
    lo = nodes[max(i - 1, 0)]
    hi = nodes[min(i + 1, len(nodes) - 1)]
    zmin, vmin = refine_minimum(psi, lo, nodes[i], hi)
    if vmin > values[i]:
        zmin, vmin = float(nodes[i]), float(values[i])
    F_at = float(prof.F(zmin)) if not prof.ctx.exact else float(prof.F(Fraction(zmin)))
    logger.debug(f"Positivity minimum psi({zmin})={vmin:.3e} (scale {scale:.3e}, a={a})")
    if vmin < -threshold:
        return PositivityVerdict(PositivityStatus.NEGATIVE_SOMEWHERE, witness_z=zmin, witness_F=F_at,
                                 method="numeric")
    if vmin <= threshold:
        logger.warning(f"⚠️ Positivity inconclusive: minimum {vmin:.3e} within {threshold:.1e} of zero")
        return PositivityVerdict(PositivityStatus.INCONCLUSIVE, witness_z=zmin, witness_F=F_at,
                                 method="numeric")
    return PositivityVerdict(PositivityStatus.POSITIVE, method="numeric")


def positivity(prof: Profile) -> PositivityVerdict:
    """
    Decide the sign of F on (-1, 1).

    Exact profiles with a polynomial form use root isolation on the numerator
    after dividing out the endpoint factors. Everything else samples
    ψ = F/((1-z²)p_c), which has the sign of F and does not vanish at ±1.
    """
    if prof.ctx.exact and prof.poly_form is not None:
        return _exact_positivity(prof)
    return _numeric_positivity(prof)


def endpoint_residuals(prof: Profile) -> Dict[str, float]:
    """|F(±1)| and |F'(±1) ± 2p_c(±1)| together with the scale max(1, max|F|)."""
    pc = momentum_polynomial(prof.setup)
    one = prof.ctx.one
    grid = np.linspace(-1.0, 1.0, RESIDUAL_GRID)
    if prof.ctx.exact:
        values = [abs(float(prof.F(Fraction(g)))) for g in grid]
    else:
        values = np.abs(np.asarray(prof.F(grid), dtype=float))
    scale = max(1.0, float(np.max(values)))
    out = {"scale": scale}
    for label, zv in (("plus", one), ("minus", -one)):
        F, F1, _ = prof.sampler(zv)
        out[f"F_{label}"] = float(abs(F))
        out[f"slope_{label}"] = float(abs(F1 + 2 * zv * pc(zv)))
    return out


def ode_residual(prof: Profile, constants: Optional[ExtremalConstants] = None) -> float:
    """max |G'' - Q| / max |Q| over the residual grid, G = F/(z+a)^{p-1}."""
    setup, w = prof.setup, prof.w
    if setup.ctx.exact:
        setup = setup.in_mode(FLOAT)
        w = WeightParams(float(w.a), float(w.p), FLOAT)
    constants = constants or prof.constants
    if constants is None:
        raise PreconditionError("ODE residual needs extremal constants")
    constants = ExtremalConstants(float(constants.A1), float(constants.A2), None)
    q_fn = build_Q(setup, w, constants)
    grid = np.linspace(-1.0, 1.0, RESIDUAL_GRID)
    a, p = float(w.a), float(w.p)
    if prof.ctx.exact:
        triples = [prof.sampler(Fraction(g)) for g in grid]
        F = np.array([float(t[0]) for t in triples])
        F1 = np.array([float(t[1]) for t in triples])
        F2 = np.array([float(t[2]) for t in triples])
    else:
        F, F1, F2 = (np.asarray(v, dtype=float) for v in prof.sampler(grid))
    wz = grid + a
    G2 = F2 * wz ** (1 - p) + 2 * (1 - p) * F1 * wz ** (-p) + (1 - p) * (-p) * F * wz ** (-p - 1)
    Q = q_fn(grid)
    return float(np.max(np.abs(G2 - Q)) / max(float(np.max(np.abs(Q))), 1e-300))
