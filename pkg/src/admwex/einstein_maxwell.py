"""
The p = 2m specialization: Einstein–Maxwell parameter searches, the Yamabe
functional of the conformal metrics (z+t)^{-2} g, and closed-form cross-checks.
"""

import math
import logging
from dataclasses import dataclass, replace
from fractions import Fraction
from typing import Any, Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np
from scipy import integrate, special

from .core import (EXACT, FLOAT, AdmissibleSetup, NumericContext, Poly, RationalFn, Scalar, WeightParams,
                   curvature_density, momentum_polynomial, parse_fraction)
from .errors import ConvergenceError, InternalInconsistencyError, PreconditionError
from .moments import QUAD_EPSABS, QUAD_EPSREL, QUAD_LIMIT, alpha, beta, extremal_constants_in_a, \
    solve_extremal_constants
from .profile import PositivityVerdict, Profile, build_profile, build_profile_ansatz, \
    canonical_profile, positivity
from .rootfinding import find_roots_on_grid, isolate_real_roots

logger = logging.getLogger(__name__)

EM_GRID_POINTS = 512
EM_ROOT_XTOL = 1e-12
YAMABE_GRID_POINTS = 512
NEWTON_SEEDS = 16
NEWTON_TOL = 1e-12
NEWTON_MAX_ITER = 60
EINSTEIN_GAP_TOL = 1e-8
EINSTEIN_A1_TOL = 1e-10
PROFILE_COMPARE_POINTS = 199
PROFILE_COMPARE_RTOL = 1e-8


@dataclass(frozen=True)
class EMSolution:
    """A weight parameter |a| > 1 with A1(a) = 0, with its profile and positivity."""

    a_root: Scalar
    A2_at_root: Scalar
    profile: Profile
    positivity: PositivityVerdict
    multiplicity: int = 1
    exact: Optional[Fraction] = None
    mirrored: bool = False

    @property
    def hermitian_scalar_curvature(self) -> Scalar:
        """Scalar curvature of h = (z+a)^{-2} g, which equals A2."""
        return self.A2_at_root

    def to_dict(self) -> Dict[str, Any]:
        return {
            "a": self.a_root,
            "a_exact": self.exact,
            "multiplicity": self.multiplicity,
            "A2": self.A2_at_root,
            "hermitian_scalar_curvature": self.hermitian_scalar_curvature,
            "positivity": self.positivity.to_dict(),
            "mirrored": self.mirrored,
        }


@dataclass(frozen=True)
class YamabeCriticalPoint:
    t: float
    kind: str
    value: float


@dataclass(frozen=True)
class EinsteinBranch:
    a: float
    lambda_plus: float
    lambda_minus: float
    A1: float
    A2: float
    profile: Profile


@dataclass(frozen=True)
class ConformallyEinsteinSolution:
    m: int
    s: float
    x_e: float
    branches: Tuple[EinsteinBranch, ...]
    residual: float
    coincident_a: Tuple[float, ...] = ()

    @property
    def degenerate(self) -> bool:
        """A single validated branch, so a+ = a-."""
        return len(self.branches) == 1

    @property
    def a_plus(self) -> float:
        return max(b.a for b in self.branches)

    @property
    def a_minus(self) -> float:
        return min(b.a for b in self.branches)

    def branch(self, a: float) -> EinsteinBranch:
        return min(self.branches, key=lambda b: abs(b.a - a))

    @property
    def lambda_plus(self) -> float:
        return self.branch(self.a_plus).lambda_plus

    @property
    def lambda_minus(self) -> float:
        return self.branch(self.a_plus).lambda_minus


def _weight_exponent(setup: AdmissibleSetup, p: Optional[Any]) -> Scalar:
    if p is None:
        return setup.ctx.coerce(2 * setup.m)
    return setup.ctx.coerce(p)


def a1_as_function_of_a(setup: AdmissibleSetup, p: Optional[Any] = None
                        ) -> Tuple[Callable[[Any], Scalar], Optional[RationalFn]]:
    """
    A1 as a function of the weight parameter a.

    Returns:
        (callable, rational function); the rational function is only available
        for an exact setup with integer p >= m+2 or p <= -1
    """
    ctx = setup.ctx
    p = _weight_exponent(setup, p)

    def a1(a: Any) -> Scalar:
        return solve_extremal_constants(setup, WeightParams.build(a, p, ctx)).A1

    rational = None
    if ctx.exact and float(p).is_integer() and (p >= setup.m + 2 or p <= -1):
        rational = extremal_constants_in_a(setup, int(p))[0]
    return a1, rational


def _solution_at(setup: AdmissibleSetup, p: Scalar, a: Scalar, multiplicity: int,
                 exact: Optional[Fraction]) -> EMSolution:
    if setup.ctx.exact and exact is None:
        setup = setup.in_mode(FLOAT)
        w = WeightParams(float(a), float(p), FLOAT)
    else:
        w = WeightParams(a, p, setup.ctx)
    prof = build_profile(setup, w)
    A2 = prof.constants.A2 if prof.constants is not None else solve_extremal_constants(setup, w).A2
    return EMSolution(a_root=a, A2_at_root=A2, profile=prof, positivity=positivity(prof),
                      multiplicity=multiplicity, exact=exact)


def _positive_parameters(setup: AdmissibleSetup, p: Scalar, a_max: Any) -> List[EMSolution]:
    ctx = setup.ctx
    a1, rational = a1_as_function_of_a(setup, p)

    solutions: List[EMSolution] = []
    if rational is not None:
        numerator = rational.num
        if numerator.is_zero():
            raise InternalInconsistencyError("A1(a) vanishes identically")
        roots = isolate_real_roots(numerator, lo=Fraction(1), hi=parse_fraction(a_max), include_lo=False)
        for root in roots:
            a = root.exact if root.exact is not None else root.value
            solutions.append(_solution_at(setup, p, a, root.multiplicity, root.exact))
    else:
        if ctx.exact:
            setup, ctx = setup.in_mode(FLOAT), FLOAT
            p = float(p)
            a1, _ = a1_as_function_of_a(setup, p)
        grid = 1.0 + np.geomspace(1e-3, float(a_max) - 1.0, EM_GRID_POINTS)

        def a1_float(a: float) -> float:
            return float(a1(a))

        for a, mult in find_roots_on_grid(a1_float, grid, xtol=EM_ROOT_XTOL):
            solutions.append(_solution_at(setup, p, ctx.coerce(a), mult, None))
    return solutions


def find_em_parameters(setup: AdmissibleSetup, p: Optional[Any] = None, a_max: Any = 1000,
                       both_signs: bool = False) -> List[EMSolution]:
    """
    All a in (1, a_max] with A1(a) = 0, each with its profile and positivity verdict.

    Exact setups with an admissible integer p isolate the real roots of the
    numerator of A1(a) and keep sympy's multiplicities; everything else
    brackets sign changes of A1 on a log-spaced grid and refines with Brent's
    method.

    Args:
        both_signs: Also search a in [-a_max, -1). Those parameters are found
            as a > 1 for the mirrored setup and reported with a negative sign;
            their profiles are written in the coordinate -z.
    """
    p = _weight_exponent(setup, p)
    if p != 2 * setup.m:
        logger.warning(f"⚠️ Searching with p={p}; Einstein–Maxwell metrics correspond to p=2m={2 * setup.m}")

    solutions = _positive_parameters(setup, p, a_max)
    if both_signs:
        mirrored = [
            replace(sol, a_root=-sol.a_root, exact=-sol.exact if sol.exact is not None else None, mirrored=True)
            for sol in _positive_parameters(setup.mirrored(), p, a_max)
        ]
        solutions = sorted(mirrored, key=lambda sol: float(sol.a_root)) + solutions
        logger.info(f"Found {len(solutions)} Einstein–Maxwell parameter(s) with 1 < |a| <= {a_max}")
    else:
        logger.info(f"Found {len(solutions)} Einstein–Maxwell parameter(s) in (1, {a_max}]")
    return solutions


def profile_coincidences(solutions: Sequence[EMSolution], samples: int = PROFILE_COMPARE_POINTS,
                         rtol: float = PROFILE_COMPARE_RTOL) -> List[Dict[str, Any]]:
    """
    Pairwise comparison of the profiles of several Einstein–Maxwell parameters.

    The profiles are sampled on a uniform interior grid; two of them are
    reported as coinciding when their largest difference is within rtol of
    the larger sup norm. This is an observation on samples, not a proof.
    """
    zs = np.linspace(-1.0, 1.0, samples + 2)[1:-1]
    values = [np.array([float(sol.profile.F(-float(z) if sol.mirrored else float(z))) for z in zs])
              for sol in solutions]
    pairs = []
    for i in range(len(solutions)):
        for j in range(i + 1, len(solutions)):
            scale = max(np.max(np.abs(values[i])), np.max(np.abs(values[j])), 1e-300)
            difference = float(np.max(np.abs(values[i] - values[j])) / scale)
            pairs.append({
                "a": [float(solutions[i].a_root), float(solutions[j].a_root)],
                "relative_difference": difference,
                "coincide": difference <= rtol,
            })
    return pairs


def _yamabe_pair(setup: AdmissibleSetup, t: Any, p: Optional[Any]) -> Tuple[AdmissibleSetup, WeightParams]:
    if setup.ctx.exact:
        setup = setup.in_mode(FLOAT)
    t = float(t)
    if not t > 1:
        raise PreconditionError(f"Yamabe functional needs t > 1, got {t}")
    return setup, WeightParams(t, float(_weight_exponent(setup, p)), FLOAT)


def yamabe_functional(setup: AdmissibleSetup, t: Any, p: Optional[Any] = None,
                      profile: Optional[Profile] = None) -> float:
    """
    Normalized total scalar curvature of h_t = (z+t)^{-2} g, up to a class constant.

        ∫ Scal(h_t)(z+t)^{-2m} p_c dz / (∫ (z+t)^{-2m} p_c dz)^{(m-1)/m}

    computed by quadrature with the canonical profile unless another profile
    is supplied; the base-volume constant is left out (see yamabe_scale_constant).
    """
    setup, w = _yamabe_pair(setup, t, p)
    m = setup.m
    tf, pf = float(w.a), float(w.p)
    if profile is None:
        profile = canonical_profile(setup, w)
    kappa = curvature_density(setup)
    pc = momentum_polynomial(setup)

    def scalar_density(z):
        F, F1, F2 = (float(v) for v in profile.sampler(z))
        wz = z + tf
        operator = -wz * wz * F2 + 2 * (pf - 1) * wz * F1 - pf * (pf - 1) * F
        return operator * wz ** (-pf) + 2 * kappa(z) * wz ** (2 - pf)

    numerator, _ = integrate.quad(scalar_density, -1.0, 1.0, epsabs=QUAD_EPSABS, epsrel=QUAD_EPSREL,
                                  limit=QUAD_LIMIT)
    volume, _ = integrate.quad(lambda z: pc(z) * (z + tf) ** (-pf), -1.0, 1.0, epsabs=QUAD_EPSABS,
                               epsrel=QUAD_EPSREL, limit=QUAD_LIMIT)
    return numerator / volume ** ((m - 1) / m)


def yamabe_closed_form(setup: AdmissibleSetup, t: Any) -> float:
    """f(t) = 2 β_{0,2-2m}(t) / α_{0,-2m}(t)^{(m-1)/m}, independent of the profile."""
    setup, w = _yamabe_pair(setup, t, None)
    m = setup.m
    return 2 * beta(setup, w, 0, 2 - 2 * m) / alpha(setup, w, 0, -2 * m) ** ((m - 1) / m)


def yamabe_derivative(setup: AdmissibleSetup, t: Any) -> float:
    """f'(t) from ∂_t β_{0,q} = q β_{0,q-1} and ∂_t α_{0,q} = q α_{0,q-1}."""
    setup, w = _yamabe_pair(setup, t, None)
    m = setup.m
    gamma = (m - 1) / m
    q_beta, q_alpha = 2 - 2 * m, -2 * m
    B = beta(setup, w, 0, q_beta)
    dB = q_beta * beta(setup, w, 0, q_beta - 1)
    A = alpha(setup, w, 0, q_alpha)
    dA = q_alpha * alpha(setup, w, 0, q_alpha - 1)
    return 2 * (dB * A ** (-gamma) - gamma * B * A ** (-gamma - 1) * dA)


def yamabe_critical_points(setup: AdmissibleSetup, t_max: float = 100.0,
                           grid_points: int = YAMABE_GRID_POINTS) -> List[YamabeCriticalPoint]:
    """Zeros of f' on (1, t_max], classified as min/max/degenerate by second differences."""
    grid = 1.0 + np.geomspace(1e-3, t_max - 1.0, grid_points)
    roots = find_roots_on_grid(lambda v: yamabe_derivative(setup, v), grid, xtol=EM_ROOT_XTOL)
    return [classify_critical_point(setup, t) for t, _ in roots]


def classify_critical_point(setup: AdmissibleSetup, t: float) -> YamabeCriticalPoint:
    """Second difference of f at t with step 1e-3 (t-1)."""
    t = float(t)
    h = 1e-3 * (t - 1.0)
    f0 = yamabe_closed_form(setup, t)
    second = yamabe_closed_form(setup, t + h) - 2 * f0 + yamabe_closed_form(setup, t - h)
    if abs(second) <= 1e-10 * abs(f0):
        kind = "degenerate"
    else:
        kind = "min" if second > 0 else "max"
    return YamabeCriticalPoint(t=t, kind=kind, value=f0)


def yamabe_scale_constant(setup: AdmissibleSetup, base_volumes: Optional[Sequence[float]] = None) -> float:
    """
    C = 2π ∏ V_a / |x_a|^{d_a}; the normalized functional is C^{1/m} f(t).

    Curve blocks (d_a = 1) default to V_a = 2π; other blocks need explicit volumes.
    """
    if setup.d0 or setup.dinf:
        raise PreconditionError("Scale constant is only defined without blow-down blocks")
    if base_volumes is None:
        if any(block.d != 1 for block in setup.blocks):
            raise PreconditionError("Base volumes are required for blocks of dimension > 1")
        base_volumes = [2 * math.pi] * len(setup.blocks)
    if len(base_volumes) != len(setup.blocks):
        raise PreconditionError("One base volume per block is required")
    constant = 2 * math.pi
    for block, volume in zip(setup.blocks, base_volumes):
        constant *= float(volume) / abs(float(block.x)) ** block.d
    return constant


def normalized_yamabe(setup: AdmissibleSetup, t: Any, base_volumes: Optional[Sequence[float]] = None) -> float:
    return yamabe_scale_constant(setup, base_volumes) ** (1.0 / setup.m) * yamabe_closed_form(setup, t)


def aubin_schoen_bound(m: int) -> float:
    """2m(2m-1) Vol(S^{2m})^{1/m}; equals 8π√6 for m = 2."""
    sphere = 2 * math.pi ** ((2 * m + 1) / 2) / special.gamma((2 * m + 1) / 2)
    return 2 * m * (2 * m - 1) * sphere ** (1.0 / m)


def _context_for(*values: Any) -> NumericContext:
    return FLOAT if any(isinstance(v, float) for v in values) else EXACT


def hirzebruch_closed_forms(x: Any) -> Tuple[Scalar, Optional[Scalar], Optional[Scalar]]:
    """
    (a0, a_plus, a_minus) for the first Hirzebruch surface at p = 4.

    a0 = (1 + √(1-x²))/x always; a± = (x ± √(x(5x-4)))/(2(1-x)) only when x ≥ 4/5.
    Exact inputs give exact values whenever the square roots are rational.
    """
    ctx = _context_for(x)
    x = ctx.coerce(x)
    if not 0 < x < 1:
        raise PreconditionError(f"Hirzebruch parameter must lie in (0, 1), got {x}")
    one = ctx.one
    a0 = (one + ctx.sqrt(one - x * x)) / x
    radicand = x * (5 * x - 4)
    if radicand < 0:
        return a0, None, None
    root = ctx.sqrt(radicand)
    a_plus = (x + root) / (2 * (one - x))
    a_minus = (x - root) / (2 * (one - x))
    if not 1 < a_minus <= a0 <= a_plus:
        raise InternalInconsistencyError(f"Closed forms out of order: {a_minus}, {a0}, {a_plus}")
    return a0, a_plus, a_minus


def hirzebruch_yamabe(x: float, t: float) -> float:
    """4π√6 (1-2x-2xt+(1+2x)t²)/√(x(1-4xt+3t²)(t²-1))."""
    x, t = float(x), float(t)
    return (4 * math.pi * math.sqrt(6) * (1 - 2 * x - 2 * x * t + (1 + 2 * x) * t * t)
            / math.sqrt(x * (1 - 4 * x * t + 3 * t * t) * (t * t - 1)))


def hirzebruch_f_at_a0(x: float) -> float:
    """Normalized functional at t = a0(x), valid for 4/5 < x < 1."""
    x = float(x)
    r = math.sqrt(1 - x * x)
    return (4 * math.pi * math.sqrt(6) * ((1 + 2 * x) * r + (1 + 2 * x - x * x))
            / math.sqrt(x * (6 - 5 * x * x + (6 - 2 * x * x) * r)))


def double_root_discriminant(s: Any, x: Any) -> Scalar:
    """
    D_s(x) = 12 + 12sx - 19x² - 12sx³ + (7+s²)x⁴ + 6(2 + 2sx - 2x² - sx³)√(1-x²).

    A root x in (0, 1) is where F_{x,a0(x),4} acquires a double root inside (-1, 1).
    """
    ctx = _context_for(s, x)
    s, x = ctx.coerce(s), ctx.coerce(x)
    if not 0 < x < 1:
        raise PreconditionError(f"x must lie in (0, 1), got {x}")
    root = ctx.sqrt(1 - x * x)
    f1 = 12 + 12 * s * x - 19 * x ** 2 - 12 * s * x ** 3 + (7 + s * s) * x ** 4
    f2 = 6 * (2 + 2 * s * x - 2 * x ** 2 - s * x ** 3)
    return f1 + f2 * root


def quadratic_factor_discriminant(prof: Profile) -> Dict[str, float]:
    """
    For a quartic profile F = (1-z²)·(c2 z² + c1 z + c0): the discriminant of the
    quadratic factor, its vertex z* and F(z*).
    """
    if prof.poly_form is None or prof.poly_form.exponent != 0:
        raise PreconditionError("Profile has no polynomial form")
    numerator = prof.poly_form.numerator.to_float()
    quotient, remainder = numerator.divmod(Poly([1.0, 0.0, -1.0]))
    if quotient.degree != 2:
        raise PreconditionError(f"Expected a quartic profile, got degree {numerator.degree}")
    c0, c1, c2 = quotient.coeffs
    vertex = -c1 / (2 * c2)
    grid = np.linspace(-1.0, 1.0, 257)
    return {
        "discriminant": c1 * c1 - 4 * c2 * c0,
        "relative_discriminant": (c1 * c1 - 4 * c2 * c0) / max(c1 * c1, abs(4 * c2 * c0), 1e-300),
        "vertex": vertex,
        "F_at_vertex": float(numerator(vertex)),
        "max_F": float(np.max(np.abs(numerator(grid)))),
        "remainder": float(max((abs(c) for c in remainder.coeffs), default=0.0)),
    }


def _hodge4_q_coeffs(x: Scalar, s: Scalar) -> Tuple[Scalar, ...]:
    return (
        96 * (1 - x) ** 3,
        32 * (1 - x) ** 2 * (12 - 9 * x - s * x),
        8 * (1 - x) * (87 - 120 * x - 16 * s * x + 39 * x ** 2 + 10 * s * x ** 2),
        8 * (1 - x) * (93 - 81 * x - 29 * s * x + 18 * x ** 2 + 3 * s * x ** 2),
        2 * (243 - 315 * x - 104 * s * x + 99 * x ** 2 + 70 * s * x ** 2 - 15 * x ** 3 + 22 * s * x ** 3),
        2 * (90 - 63 * x - 45 * s * x + 14 * s * x ** 2 - 3 * x ** 3 + 15 * s * x ** 3),
        5 * (6 - 2 * s + s * (2 + x) * (1 - x) ** 2),
    )


def hodge4_q(a: Any, x: Any, s: Any) -> Scalar:
    """The degree-6 factor q(a, x) of A1 over a 4-dimensional Hodge base, in powers of (a-1)."""
    ctx = _context_for(a, x, s)
    a, x, s = ctx.coerce(a), ctx.coerce(x), ctx.coerce(s)
    u = a - 1
    return sum(c * u ** k for k, c in enumerate(_hodge4_q_coeffs(x, s)))


def hodge4_a1_identity(a: Any, x: Any, s: Any) -> Scalar:
    """(-x a² + 2a - x) q(a, x), the numerator of A1 up to the constant hodge4_a1_factor(x, s)."""
    ctx = _context_for(a, x, s)
    a, x = ctx.coerce(a), ctx.coerce(x)
    return (-x * a * a + 2 * a - x) * hodge4_q(a, x, s)


def hodge4_a1_factor(x: Any, s: Any) -> Optional[Fraction]:
    """
    The constant c(x, s) with numerator(A1)(a) = c · (-x a² + 2a - x) q(a, x)
    as polynomials in a, or None when the numerator is not such a multiple.

    The denominator of A1 is the monic degree-6 determinant of the α moments,
    not (a²-1)^10, so only the numerator factors. c is negative in this
    package's sign convention for A1, e.g. c(4/5, 3) = -2500/7743 and c(1/2, 1) = -64/219.
    """
    x, s = parse_fraction(x), parse_fraction(s)
    numerator = extremal_constants_in_a(AdmissibleSetup.build([(x, 2, s)]), 6)[0].num
    one = Fraction(1)
    target = Poly([-x, 2 * one, -x]) * Poly(_hodge4_q_coeffs(x, s)).shift(-one)
    if numerator.is_zero() or target.is_zero():
        return None
    c = Fraction(numerator.leading) / Fraction(target.leading)
    return c if numerator == target * c else None


def hodge4_q_at_a0(x: Any, s: Any) -> Scalar:
    """q(a0(x), x) = 6 a0 (a0²-1)^4 (5a0²-1)(a0-s)/(a0²+1)^3."""
    a0 = hirzebruch_closed_forms(x)[0]
    ctx = _context_for(a0, s)
    a0, s = ctx.coerce(a0), ctx.coerce(s)
    return 6 * a0 * (a0 * a0 - 1) ** 4 * (5 * a0 * a0 - 1) * (a0 - s) / (a0 * a0 + 1) ** 3


def koiso_sakane_q(x1: Any, x2: Any, a: Any) -> Scalar:
    """
    The degree-8 polynomial q(x1, x2, a) whose roots are the zeros of A1 on
    P(O ⊕ O(1,-1)) → CP^1 × CP^1.
    """
    ctx = _context_for(x1, x2, a)
    x1, x2, a = ctx.coerce(x1), ctx.coerce(x2), ctx.coerce(a)
    s = x1 + x2
    coeffs = (
        -3 * s * (x1 - x2 + x1 * x2),
        3 * (2 * x1 + 3 * x1 ** 2 - 2 * x2 + 8 * x1 * x2 + 2 * x1 ** 2 * x2 + 3 * x2 ** 2
             - 2 * x1 * x2 ** 2 + 2 * x1 ** 2 * x2 ** 2),
        -3 * s * (15 - 2 * x1 + 2 * x2 + 17 * x1 * x2),
        (60 - 10 * x1 + 45 * x1 ** 2 + 10 * x2 + 240 * x1 * x2 - 18 * x1 ** 2 * x2 + 45 * x2 ** 2
         + 18 * x1 * x2 ** 2 + 90 * x1 ** 2 * x2 ** 2),
        -5 * s * (33 + 4 * x1 - 4 * x2 + 45 * x1 * x2),
        (72 + 34 * x1 + 123 * x1 ** 2 - 34 * x2 + 408 * x1 * x2 + 50 * x1 ** 2 * x2 + 123 * x2 ** 2
         - 50 * x1 * x2 ** 2 + 90 * x1 ** 2 * x2 ** 2),
        -s * (159 - 2 * x1 + 2 * x2 + 105 * x1 * x2),
        (60 - 30 * x1 + 15 * x1 ** 2 + 30 * x2 + 96 * x1 * x2 - 38 * x1 ** 2 * x2 + 15 * x2 ** 2
         + 38 * x1 * x2 ** 2 + 6 * x1 ** 2 * x2 ** 2),
        15 * (-1 + x1 - x2) * s,
    )
    return sum(c * a ** k for k, c in enumerate(coeffs))


# Conformally Einstein profiles: a single block (x, m-1, s) with p = 2m.

def _einstein_basis(m: int, s: float, x: float, a: float) -> Tuple[Poly, Poly, Poly]:
    """E_plus, E_minus and the particular term, all divided by x^{m-1}, as polynomials in z."""
    y = Poly([1.0 / x, 1.0])
    b = a - 1.0 / x
    e_plus, e_minus = Poly(), Poly()
    for j in range(1, m + 1):
        weight = j / m * math.comb(2 * m, m + j)
        e_plus = e_plus + (y ** (m + j)) * (weight * b ** (m - j))
        e_minus = e_minus - (y ** (m - j)) * (weight * b ** (j - 1))
    return e_plus, e_minus, (y ** m) * (2.0 * s / m)


def einstein_profile_poly(m: int, s: float, x: float, a: float) -> Tuple[Poly, float, float]:
    """
    The conformally Einstein profile F for given (x, a), with λ± fixed by F(±1) = 0.

    Returns:
        (F as a polynomial in z, λ+, λ-)
    """
    e_plus, e_minus, base = _einstein_basis(m, s, x, a)
    matrix = np.array([[e_plus(1.0), e_minus(1.0)], [e_plus(-1.0), e_minus(-1.0)]])
    rhs = -np.array([base(1.0), base(-1.0)])
    try:
        lam_plus, lam_minus = np.linalg.solve(matrix, rhs)
    except np.linalg.LinAlgError as e:
        raise PreconditionError(f"Degenerate Einstein family at x={x}, a={a}: {str(e)}")
    scaled = e_plus * float(lam_plus) + e_minus * float(lam_minus) + base
    return scaled * x ** (m - 1), float(lam_plus), float(lam_minus)


def _einstein_residual(m: int, s: float, point: np.ndarray) -> np.ndarray:
    x, a = float(point[0]), float(point[1])
    F, _, _ = einstein_profile_poly(m, s, x, a)
    dF = F.derivative()
    scale = x ** (m - 1)
    return np.array([
        (dF(1.0) + 2.0 * (1.0 + x) ** (m - 1)) / scale,
        (dF(-1.0) - 2.0 * (1.0 - x) ** (m - 1)) / scale,
    ])


def _damped_newton(fn: Callable[[np.ndarray], np.ndarray], start: np.ndarray,
                   inside: Callable[[np.ndarray], bool]) -> Tuple[np.ndarray, float]:
    point = start.astype(float)
    value = fn(point)
    norm = float(np.linalg.norm(value))
    for _ in range(NEWTON_MAX_ITER):
        if norm <= NEWTON_TOL:
            break
        jac = np.empty((2, 2))
        for k in range(2):
            h = 1e-7 * max(1.0, abs(point[k]))
            step = np.zeros(2)
            step[k] = h
            jac[:, k] = (fn(point + step) - fn(point - step)) / (2 * h)
        try:
            delta = np.linalg.solve(jac, -value)
        except np.linalg.LinAlgError:
            break
        damping = 1.0
        while damping > 1e-6:
            trial = point + damping * delta
            if inside(trial):
                try:
                    trial_value = fn(trial)
                except PreconditionError:
                    trial_value = None
                if trial_value is not None and np.linalg.norm(trial_value) < norm:
                    point, value = trial, trial_value
                    norm = float(np.linalg.norm(value))
                    break
            damping /= 2
        else:
            break
    return point, norm


def conformally_einstein_profile(m: int, s: Any, seeds: int = NEWTON_SEEDS,
                                 x_range: Tuple[float, float] = (0.05, 0.95),
                                 a_range: Tuple[float, float] = (1.05, 20.0)) -> ConformallyEinsteinSolution:
    """
    Solve the endpoint conditions of the conformally Einstein family for (x_e, a±).

    λ± enter linearly and are eliminated from F(±1) = 0; damped Newton on the
    two slope conditions runs from a seeds × seeds grid in (x, a). Each
    converged branch is validated against the generic ansatz builder and must
    have A1 = 0. The other A1 roots of the same setup whose profile coincides
    with the Einstein one are recorded in ``coincident_a`` and join the
    branches when they are of Einstein form too. A single surviving branch is
    returned as the degenerate case a+ = a-.

    Raises:
        PreconditionError: s <= 1 or m < 2
        ConvergenceError: no seed converged
        InternalInconsistencyError: a branch fails the ansatz or A1 check
    """
    s = float(parse_fraction(s)) if not isinstance(s, float) else s
    if s <= 1:
        raise PreconditionError(f"Conformally Einstein profiles need s > 1, got {s}")
    if m < 2:
        raise PreconditionError(f"m must be at least 2, got {m}")

    def inside(point: np.ndarray) -> bool:
        return 0.0 < point[0] < 1.0 and point[1] > 1.0

    def fn(point: np.ndarray) -> np.ndarray:
        return _einstein_residual(m, s, point)

    found: List[Tuple[float, float]] = []
    best = math.inf
    for x0 in np.linspace(*x_range, seeds):
        for a0 in np.geomspace(*a_range, seeds):
            try:
                point, norm = _damped_newton(fn, np.array([x0, a0]), inside)
            except PreconditionError:
                continue
            best = min(best, norm)
            if norm > NEWTON_TOL or not inside(point):
                continue
            if not any(abs(point[0] - x) < 1e-8 and abs(point[1] - a) < 1e-6 * point[1] for x, a in found):
                found.append((float(point[0]), float(point[1])))
    if not found:
        raise ConvergenceError(f"No Newton seed converged for m={m}, s={s}", best)

    xs = sorted({round(x, 9) for x, _ in found})
    if len(xs) > 1:
        logger.warning(f"⚠️ Several x_e candidates {xs}; keeping the one with most branches")
    x_key = max(xs, key=lambda v: sum(1 for x, _ in found if round(x, 9) == v))
    branch_as = sorted(a for x, a in found if round(x, 9) == x_key)
    x_e = float(np.mean([x for x, _ in found if round(x, 9) == x_key]))

    setup = AdmissibleSetup.build([(x_e, m - 1, s)], ctx=FLOAT)
    branches = [_einstein_branch(setup, m, s, x_e, a) for a in branch_as]

    # Profiles of the other A1 roots of the same setup that coincide with the Einstein profile.
    reference = find_em_parameters(setup)
    known = [sol for sol in reference if any(abs(float(sol.a_root) - b.a) <= 1e-6 * b.a for b in branches)]
    coincident = []
    for sol in reference:
        if not known or any(sol is k for k in known):
            continue
        if profile_coincidences([known[0], sol])[0]["coincide"]:
            a = float(sol.a_root)
            try:
                branches.append(_einstein_branch(setup, m, s, x_e, a))
            except InternalInconsistencyError as e:
                logger.info(f"Profile at a={a:.10f} coincides but is not of Einstein form: {e}")
            coincident.append(a)
    branches.sort(key=lambda b: b.a)

    residual = max(float(np.linalg.norm(fn(np.array([x_e, b.a])))) for b in branches)
    solution = ConformallyEinsteinSolution(m=m, s=s, x_e=x_e, branches=tuple(branches), residual=residual,
                                           coincident_a=tuple(coincident))
    if solution.degenerate:
        logger.warning(f"⚠️ Only one Einstein branch a={solution.a_plus:.10f} for m={m}, s={s}; reporting a+ = a-")
    logger.info(f"✅ Conformally Einstein: m={m}, s={s}, x_e={x_e:.12f}, "
                f"a±={solution.a_plus:.10f}/{solution.a_minus:.10f}")
    return solution


def _einstein_branch(setup: AdmissibleSetup, m: int, s: float, x_e: float, a: float) -> EinsteinBranch:
    """Validate one Einstein parameter against the ansatz profile and A1 = 0."""
    F, lam_plus, lam_minus = einstein_profile_poly(m, s, x_e, a)
    w = WeightParams(a, float(2 * m), FLOAT)
    prof = build_profile_ansatz(setup, w)
    grid = np.linspace(-1.0, 1.0, 257)
    scale = max(1.0, float(np.max(np.abs(F(grid)))))
    gap = float(np.max(np.abs(F(grid) - prof.F(grid)))) / scale
    if gap > EINSTEIN_GAP_TOL:
        raise InternalInconsistencyError(f"Einstein profile differs from the ansatz profile by {gap:.3e} at a={a}")
    constants = solve_extremal_constants(setup, w)
    if abs(constants.A1) > EINSTEIN_A1_TOL * max(1.0, abs(constants.A2)):
        raise InternalInconsistencyError(f"A1 = {constants.A1:.3e} at the Einstein parameter a = {a}")
    return EinsteinBranch(a=a, lambda_plus=lam_plus, lambda_minus=lam_minus, A1=float(constants.A1),
                          A2=float(prof.constants.A2), profile=prof)
