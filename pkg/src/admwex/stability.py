"""
Donaldson–Futaki invariants of admissible test configurations, stability
verdicts and the relative weighted Mabuchi energy.
"""

import math
import logging
from dataclasses import dataclass
from enum import Enum
from typing import Any, Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np
from scipy import integrate

from .core import (FLOAT, AdmissibleSetup, NumericContext, Poly, Scalar, WeightParams, curvature_density,
                   momentum_polynomial)
from .errors import PositivityViolationError, PreconditionError
from .moments import (QUAD_EPSABS, QUAD_EPSREL, QUAD_LIMIT, ExtremalConstants, alpha, beta,
                      partial_moment, solve_extremal_constants)
from .profile import (PositivityStatus, PositivityVerdict, Profile, build_profile, build_Q, chebyshev_nodes,
                      endpoint_residuals, positivity, theta)
from .rootfinding import richardson_limit

logger = logging.getLogger(__name__)

FUTAKI_RTOL = 1e-9
DF_SAMPLE_POINTS = ("-9/10", "-1/2", "0", "1/2", "9/10")
THETA_ENDPOINT_TOL = 1e-6


class StabilityVerdict(str, Enum):
    ANALYTICALLY_K_STABLE = "analytically-K-stable"
    K_STABLE_ON_RATIONALS = "K-stable-on-rationals"
    K_SEMISTABLE = "K-semistable"
    UNSTABLE = "unstable"
    INCONCLUSIVE = "inconclusive"

    def implies(self) -> Tuple["StabilityVerdict", ...]:
        """Every verdict this one entails, itself included."""
        chain = (StabilityVerdict.ANALYTICALLY_K_STABLE, StabilityVerdict.K_STABLE_ON_RATIONALS,
                 StabilityVerdict.K_SEMISTABLE)
        if self in chain:
            return chain[chain.index(self):]
        return (self,)


@dataclass(frozen=True)
class StabilityReport:
    futaki_vanishes: bool
    verdict: Optional[StabilityVerdict]
    relative_verdict: StabilityVerdict
    df_samples: Tuple[Tuple[Scalar, Scalar], ...]
    constants: ExtremalConstants
    positivity: PositivityVerdict
    df_product: Scalar

    def to_dict(self) -> Dict[str, Any]:
        return {
            "futaki_vanishes": self.futaki_vanishes,
            "verdict": self.verdict.value if self.verdict else None,
            "relative_verdict": self.relative_verdict.value,
            "df_samples": [{"zeta": z, "DF": v} for z, v in self.df_samples],
            "A1": self.constants.A1,
            "A2": self.constants.A2,
            "positivity": self.positivity.to_dict(),
            "df_product": self.df_product,
        }


@dataclass(frozen=True)
class ExtremalReport:
    """Everything the solve command reports about one (setup, weight) pair."""

    constants: ExtremalConstants
    profile: Profile
    positivity: PositivityVerdict
    residuals: Dict[str, float]
    futaki_vanishes: bool


@dataclass(frozen=True)
class MabuchiEvaluation:
    value: float
    reference: str
    test: str
    abserr: float = 0.0


def futaki_vanishes(constants: ExtremalConstants, ctx: NumericContext) -> bool:
    """A1 == 0 exactly, or |A1| ≤ 1e-9·max(1, |A2|) in float mode."""
    if ctx.exact:
        return constants.A1 == 0
    return abs(constants.A1) <= FUTAKI_RTOL * max(1.0, abs(float(constants.A2)))


def _zeta(value: Any, ctx: NumericContext) -> Scalar:
    zeta = ctx.coerce(value)
    if not -1 < zeta < 1:
        raise PreconditionError(f"Test configuration parameter must lie in (-1, 1), got {zeta}")
    return zeta


def _require_futaki(setup: AdmissibleSetup, w: WeightParams) -> None:
    constants = solve_extremal_constants(setup, w)
    if not futaki_vanishes(constants, setup.ctx):
        raise PreconditionError(
            f"Weighted Futaki invariant does not vanish (A1={constants.A1}); use the relative invariant")


def df_admissible(setup: AdmissibleSetup, w: WeightParams, zeta: Any, profile: Optional[Profile] = None,
                  relative: bool = False) -> Scalar:
    """
    Donaldson–Futaki invariant of the admissible test configuration with parameter ζ.

    Args:
        setup: Admissible data
        w: Weight parameters
        zeta: Parameter in (-1, 1)
        profile: Extremal profile, built on demand
        relative: Return the unnormalized F(ζ), whose sign is that of the
            relative invariant, instead of requiring A1 = 0

    Returns:
        (1/4)(ζ+a)^{1-p} F(ζ), or F(ζ) in the relative case

    Raises:
        PreconditionError: A1 does not vanish and relative is False
    """
    ctx = setup.ctx
    zeta = _zeta(zeta, ctx)
    if profile is None:
        profile = build_profile(setup, w)
    constants = profile.constants or solve_extremal_constants(setup, w)
    if not relative and not futaki_vanishes(constants, ctx):
        raise PreconditionError(
            f"Weighted Futaki invariant does not vanish (A1={constants.A1}); use the relative invariant")
    value = profile.F(zeta if profile.ctx == ctx else float(zeta))
    if relative:
        return value
    return ctx.power(zeta + w.a, 1 - w.p) * value / 4


def df_admissible_expansion_oracle(setup: AdmissibleSetup, w: WeightParams, zeta: Any,
                                   require_vanishing_futaki: bool = True) -> Scalar:
    """
    Same invariant assembled from the leading coefficients of the weighted
    trace expansions:

        DF = (b1^{1-p,1} b0^{-(p+1),0} - b0^{-(p+1),1} b1^{1-p,0}) / b0^{-(p+1),0}

    Only moment integrals are used; no profile is built.
    """
    ctx = setup.ctx
    zeta = _zeta(zeta, ctx)
    if require_vanishing_futaki:
        _require_futaki(setup, w)
    one = ctx.one
    p = w.p
    pc = momentum_polynomial(setup)
    kappa = curvature_density(setup)

    b0_0 = alpha(setup, w, 0, -(p + 1))
    b1_0 = beta(setup, w, 0, 1 - p) / 2
    b0_1 = partial_moment(pc, w, -(p + 1), zeta)
    b1_1 = (partial_moment(kappa, w, 1 - p, zeta) + (one + zeta) * ctx.power(w.a - 1, 1 - p) * pc(-one)) / 2
    return (b1_1 * b0_0 - b0_1 * b1_0) / b0_0


def df_product(setup: AdmissibleSetup, w: WeightParams, method: str = "constants") -> Scalar:
    """
    Donaldson–Futaki invariant of the product configuration induced by the circle action.

    ``method="constants"`` uses ((α0α2 - α1²)/(4α0)) A1; ``method="moments"``
    uses (β1 - α1β0/α0)/2 directly. Both are positive multiples of A1.
    """
    q_alpha, q_beta = -(w.p + 1), 1 - w.p
    a0 = alpha(setup, w, 0, q_alpha)
    a1 = alpha(setup, w, 1, q_alpha)
    if method == "moments":
        b0 = beta(setup, w, 0, q_beta)
        b1 = beta(setup, w, 1, q_beta)
        return (b1 - a1 * b0 / a0) / 2
    if method != "constants":
        raise PreconditionError(f"Unknown df_product method {method!r}")
    a2 = alpha(setup, w, 2, q_alpha)
    constants = solve_extremal_constants(setup, w)
    return (a0 * a2 - a1 * a1) / (4 * a0) * constants.A1


def _verdict_from_positivity(verdict: PositivityVerdict) -> StabilityVerdict:
    if verdict.status is PositivityStatus.POSITIVE:
        return StabilityVerdict.ANALYTICALLY_K_STABLE
    if verdict.status is PositivityStatus.NEGATIVE_SOMEWHERE:
        return StabilityVerdict.UNSTABLE
    if verdict.status is PositivityStatus.INCONCLUSIVE:
        return StabilityVerdict.INCONCLUSIVE
    if all(not zero.rational for zero in verdict.interior_zeros):
        return StabilityVerdict.K_STABLE_ON_RATIONALS
    return StabilityVerdict.K_SEMISTABLE


def stability_verdict(setup: AdmissibleSetup, w: WeightParams, zetas: Sequence[Any] = DF_SAMPLE_POINTS,
                      profile: Optional[Profile] = None) -> StabilityReport:
    """
    Combine the extremal constants, the profile and its positivity into a verdict.

    The absolute verdict is None unless the weighted Futaki invariant vanishes;
    the relative verdict is always reported. ``profile`` reuses an extremal
    profile already built for (setup, w).
    """
    ctx = setup.ctx
    constants = solve_extremal_constants(setup, w)
    prof = profile if profile is not None else build_profile(setup, w)
    sign = positivity(prof)
    vanishes = futaki_vanishes(constants, ctx)
    relative = _verdict_from_positivity(sign)

    samples: List[Tuple[Scalar, Scalar]] = []
    for raw in zetas:
        zeta = _zeta(raw, ctx)
        samples.append((zeta, df_admissible(setup, w, zeta, profile=prof, relative=not vanishes)))

    logger.info(f"Stability: A1={constants.A1}, positivity={sign.status.value}, relative verdict={relative.value}")
    return StabilityReport(
        futaki_vanishes=vanishes,
        verdict=relative if vanishes else None,
        relative_verdict=relative,
        df_samples=tuple(samples),
        constants=constants,
        positivity=sign,
        df_product=df_product(setup, w),
    )


def extremal_report(setup: AdmissibleSetup, w: WeightParams) -> ExtremalReport:
    constants = solve_extremal_constants(setup, w)
    prof = build_profile(setup, w)
    return ExtremalReport(
        constants=constants,
        profile=prof,
        positivity=positivity(prof),
        residuals=endpoint_residuals(prof),
        futaki_vanishes=futaki_vanishes(constants, setup.ctx),
    )


def enforce_vanishing_futaki(setup: AdmissibleSetup, w: WeightParams, block: int) -> AdmissibleSetup:
    """
    Replace the curvature s of one base block so that A1 = 0.

    A1 is affine in each s_a (the moments α do not involve s and the moments
    β are affine in it), so two evaluations determine the solution.

    Raises:
        PreconditionError: block index out of range, or A1 does not depend on that block
    """
    if not 0 <= block < len(setup.blocks):
        raise PreconditionError(f"Block index {block} out of range for {len(setup.blocks)} blocks")
    zero, one = setup.ctx.zero, setup.ctx.one
    at0 = solve_extremal_constants(setup.with_block_s(block, zero), w).A1
    at1 = solve_extremal_constants(setup.with_block_s(block, one), w).A1
    slope = at1 - at0
    if slope == 0:
        raise PreconditionError(f"A1 does not depend on the curvature of block {block}")
    s = -at0 / slope
    logger.info(f"✅ Block {block} curvature set to s={s} for vanishing Futaki invariant")
    return setup.with_block_s(block, s)


def _float_pair(setup: AdmissibleSetup, w: WeightParams) -> Tuple[AdmissibleSetup, WeightParams]:
    if setup.ctx.exact:
        return setup.in_mode(FLOAT), WeightParams(float(w.a), float(w.p), FLOAT)
    return setup, w


def _quad(fn: Callable[[float], float]) -> Tuple[float, float]:
    return integrate.quad(fn, -1.0, 1.0, epsabs=QUAD_EPSABS, epsrel=QUAD_EPSREL, limit=QUAD_LIMIT)


def reduced_scalar_curvature(setup: AdmissibleSetup, w: WeightParams, prof: Profile, z: float,
                             extremal_constants: Optional[ExtremalConstants] = None) -> float:
    """
    (z+a)^{p+1}/p_c(z) · (G_Ω - G)'' with G = F/(z+a)^{p-1}.

    G_Ω'' is the right-hand side Q of the extremal equation, so the
    extremal profile never has to be differentiated.
    """
    setup, w = _float_pair(setup, w)
    pc = momentum_polynomial(setup)
    pcz = pc(z)
    if pcz == 0:
        raise PreconditionError(f"p_c vanishes at z={z}")
    constants = extremal_constants or solve_extremal_constants(setup, w)
    constants = ExtremalConstants(float(constants.A1), float(constants.A2), None)
    q_fn = build_Q(setup, w, constants)
    a, p = float(w.a), float(w.p)
    return (z + a) ** (p + 1) * (q_fn(z) - _g_second(prof, z, a, p)) / pcz


def _g_second(prof: Profile, z, a: float, p: float):
    F, F1, F2 = (float(v) for v in prof.sampler(z))
    wz = z + a
    return F2 * wz ** (1 - p) + 2 * (1 - p) * F1 * wz ** (-p) + (1 - p) * (-p) * F * wz ** (-p - 1)


def reduced_scalar_pairing(setup: AdmissibleSetup, w: WeightParams, prof: Profile,
                           weight: Callable[[float], float],
                           extremal_constants: Optional[ExtremalConstants] = None) -> float:
    """∫ Scal^⊥ · weight · (z+a)^{-(p+1)} p_c dz = ∫ (Q - G'') · weight dz."""
    setup, w = _float_pair(setup, w)
    constants = extremal_constants or solve_extremal_constants(setup, w)
    constants = ExtremalConstants(float(constants.A1), float(constants.A2), None)
    q_fn = build_Q(setup, w, constants)
    a, p = float(w.a), float(w.p)
    value, _ = _quad(lambda z: (q_fn(z) - _g_second(prof, z, a, p)) * weight(z))
    return value


def bump_direction(coeffs: Sequence[float]) -> Tuple[Poly, Poly]:
    """v = (1-z²)² Σ b_k z^k and v'', for perturbations vanishing to second order at ±1."""
    base = Poly([1.0, 0.0, -1.0]) ** 2
    v = base * Poly([float(c) for c in coeffs])
    return v, v.derivative(2)


def perturbed_theta(theta_ref: Callable[[float], float], v2: Poly, eps: float) -> Callable[[float], float]:
    """Θ_ε = 1/(1/Θ_ref + ε v''), written as Θ_ref/(1 + ε Θ_ref v'')."""
    def theta_eps(z):
        t = theta_ref(z)
        return t / (1.0 + eps * t * v2(z))
    return theta_eps


def check_test_theta(theta_test: Callable[[float], float]) -> None:
    """
    Θ > 0 inside, Θ(±1) = 0 and Θ'(±1) = ∓2.

    Raises:
        PositivityViolationError: any of the conditions fails
    """
    nodes = chebyshev_nodes(512)
    values = np.array([theta_test(float(z)) for z in nodes])
    i = int(np.argmin(values))
    if not values[i] > 0:
        raise PositivityViolationError(f"Test profile Θ is not positive at z={nodes[i]:.6f} (Θ={values[i]:.3e})")
    for end in (1.0, -1.0):
        at_end = float(theta_test(end))
        if abs(at_end) > THETA_ENDPOINT_TOL:
            raise PositivityViolationError(f"Test profile has Θ({end:+.0f}) = {at_end:.3e}, expected 0")
        slope, _ = richardson_limit(lambda z: theta_test(z) / (z - end), end)
        if abs(slope + 2.0 * end) > THETA_ENDPOINT_TOL:
            raise PositivityViolationError(
                f"Test profile has Θ'({end:+.0f}) = {slope:.6f}, expected {-2.0 * end:+.0f}")


def mabuchi_energy(setup: AdmissibleSetup, w: WeightParams, prof_ref: Profile,
                   theta_test: Callable[[float], float], extremal: Optional[Profile] = None,
                   description: str = "test") -> MabuchiEvaluation:
    """
    Relative weighted Mabuchi energy of the test profile relative to prof_ref.

        ∫ F_Ω (z+a)^{1-p} (1/Θ - 1/Θ_ref) dz - ∫ p_c (z+a)^{1-p} log(Θ_ref/Θ) dz

    Both integrands are bounded near ±1; QUADPACK's open rule never samples
    the endpoints.

    Raises:
        PositivityViolationError: theta_test violates the boundary or positivity conditions
    """
    check_test_theta(theta_test)
    setup, w = _float_pair(setup, w)
    if extremal is None:
        extremal = build_profile(setup, w)
    pc = momentum_polynomial(setup)
    a, p = float(w.a), float(w.p)

    def theta_ref(z):
        return float(theta(prof_ref, z))

    def integrand(z):
        t_ref, t_test = theta_ref(z), float(theta_test(z))
        weight = (z + a) ** (1.0 - p)
        inverse_gap = (t_ref - t_test) / (t_test * t_ref)
        return weight * (float(extremal.F(z)) * inverse_gap - pc(z) * math.log(t_ref / t_test))

    value, abserr = _quad(integrand)
    logger.debug(f"Mabuchi energy of {description}: {value:.12e} (± {abserr:.1e})")
    return MabuchiEvaluation(value=value, reference=prof_ref.description, test=description, abserr=abserr)


def mabuchi_gradient(setup: AdmissibleSetup, w: WeightParams, prof_ref: Profile,
                     coeffs: Sequence[float]) -> float:
    """
    Derivative of the Mabuchi energy at prof_ref along Θ_ε = 1/(1/Θ_ref + ε v'').

    Integrating by parts twice turns it into the pairing of the reduced
    scalar curvature with v.
    """
    v, _ = bump_direction(coeffs)
    return reduced_scalar_pairing(setup, w, prof_ref, v)


def mabuchi_finite_difference(setup: AdmissibleSetup, w: WeightParams, prof_ref: Profile,
                              coeffs: Sequence[float], step: float = 1e-5) -> float:
    """Central difference of the Mabuchi energy along the same direction."""
    _, v2 = bump_direction(coeffs)
    base = lambda z: float(theta(prof_ref, z))
    extremal = build_profile(*_float_pair(setup, w))
    plus = mabuchi_energy(setup, w, prof_ref, perturbed_theta(base, v2, step), extremal=extremal).value
    minus = mabuchi_energy(setup, w, prof_ref, perturbed_theta(base, v2, -step), extremal=extremal).value
    return (plus - minus) / (2 * step)
