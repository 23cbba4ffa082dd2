"""
Identity testing for orthotoric metrics.

Vandermonde identities and (f, p)-extremality residuals are evaluated exactly
at random rational points ξ = (ξ_1, ..., ξ_m). A residual is extremal when it
is an affine function of the elementary symmetric values σ_1, ..., σ_m.
"""

import logging
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np
import sympy

from .core import EXACT, FLOAT, NumericContext, Poly, Scalar, parse_fraction, to_sympy
from .errors import InternalInconsistencyError, PreconditionError

logger = logging.getLogger(__name__)

NUMERATOR_RANGE = 100
DENOMINATOR_RANGE = 20
FLOAT_RTOL = 1e-9
MAX_RESAMPLES = 100
VANDERMONDE_FAMILIES = ("general", "basic", "inverse")


@dataclass(frozen=True)
class EvalPoint:
    """Pairwise distinct, nonzero coordinates ξ_1, ..., ξ_m."""

    xi: Tuple[Scalar, ...]

    def __post_init__(self):
        if len(set(self.xi)) != len(self.xi):
            raise PreconditionError(f"Coordinates must be pairwise distinct: {self.xi}")
        if any(v == 0 for v in self.xi):
            raise PreconditionError(f"Coordinates must be nonzero: {self.xi}")

    @property
    def m(self) -> int:
        return len(self.xi)

    def delta(self, j: int) -> Scalar:
        """Δ_j = ∏_{k≠j} (ξ_j - ξ_k)."""
        result = 1
        for k, v in enumerate(self.xi):
            if k != j:
                result *= self.xi[j] - v
        return result

    def to_list(self) -> List[str]:
        return [str(v) for v in self.xi]


@dataclass(frozen=True)
class OrthotoricSpec:
    """
    Θ_j(z) = P(z) + b1_j z^{p-1} + b2_j z^p and Killing potential f = Σ_k a_k σ_k.

    ``P`` has ascending coefficients; ``singular`` holds one (b1_j, b2_j) pair per
    coordinate, defaulting to zero.
    """

    m: int
    P: Poly
    f_coeffs: Tuple[Scalar, ...]
    p: Scalar
    singular: Tuple[Tuple[Scalar, Scalar], ...] = ()
    name: str = ""

    def __post_init__(self):
        if self.m < 2:
            raise PreconditionError(f"m must be at least 2, got {self.m}")
        if len(self.f_coeffs) != self.m + 1:
            raise PreconditionError(f"Need m+1 = {self.m + 1} Killing potential coefficients")
        if self.singular and len(self.singular) != self.m:
            raise PreconditionError(f"Need one singular pair per coordinate, got {len(self.singular)}")

    @property
    def exact(self) -> bool:
        return not isinstance(self.p, float) and Fraction(self.p).denominator == 1

    @property
    def ctx(self) -> NumericContext:
        return EXACT if self.exact else FLOAT

    def singular_pair(self, j: int) -> Tuple[Scalar, Scalar]:
        return self.singular[j] if self.singular else (0, 0)

    def theta(self, j: int, z: Scalar) -> Tuple[Scalar, Scalar, Scalar]:
        """Θ_j and its first two derivatives at z."""
        b1, b2 = self.singular_pair(j)
        p = int(self.p) if self.exact else float(self.p)
        value = self.P(z)
        d1 = self.P.derivative()(z)
        d2 = self.P.derivative(2)(z)
        if b1:
            value += b1 * z ** (p - 1)
            d1 += b1 * (p - 1) * z ** (p - 2)
            d2 += b1 * (p - 1) * (p - 2) * z ** (p - 3)
        if b2:
            value += b2 * z ** p
            d1 += b2 * p * z ** (p - 1)
            d2 += b2 * p * (p - 1) * z ** (p - 2)
        return value, d1, d2

    def describe(self) -> Dict[str, Any]:
        return {
            "name": self.name,
            "m": self.m,
            "P": [str(c) for c in self.P.coeffs],
            "f_coeffs": [str(c) for c in self.f_coeffs],
            "p": str(self.p),
            "singular": [[str(b1), str(b2)] for b1, b2 in self.singular],
        }


@dataclass(frozen=True)
class VandermondeReport:
    m: int
    family: str
    trials: int
    failures: Tuple[EvalPoint, ...] = ()

    @property
    def passed(self) -> bool:
        return not self.failures

    def to_dict(self) -> Dict[str, Any]:
        return {
            "m": self.m,
            "family": self.family,
            "trials": self.trials,
            "passed": self.passed,
            "failures": [pt.to_list() for pt in self.failures],
        }


@dataclass(frozen=True)
class AffineFit:
    is_affine: bool
    coeffs: Tuple[Scalar, ...]
    trials: int
    failure: Optional[EvalPoint] = None

    def to_dict(self) -> Dict[str, Any]:
        return {
            "is_affine": self.is_affine,
            "coeffs": [str(c) if isinstance(c, Fraction) else c for c in self.coeffs],
            "trials": self.trials,
            "failure": self.failure.to_list() if self.failure is not None else None,
        }


def _elementary(values: Sequence[Scalar], r: int) -> Scalar:
    if r < 0 or r > len(values):
        return 0
    # coefficients of ∏ (1 + v t)
    e = [1] + [0] * len(values)
    for v in values:
        for k in range(len(values), 0, -1):
            e[k] += v * e[k - 1]
    return e[r]


def sigma(xi: EvalPoint, r: int) -> Scalar:
    """σ_r(ξ); σ_0 = 1 and out-of-range indices give 0."""
    return _elementary(xi.xi, r)


def sigma_hat(xi: EvalPoint, r: int, j: int) -> Scalar:
    """σ_r of the coordinates with ξ_j removed."""
    return _elementary(xi.xi[:j] + xi.xi[j + 1:], r)


def random_eval_point(m: int, rng: np.random.Generator, positive: bool = False) -> EvalPoint:
    """
    A random point with numerators in [-100, 100] and denominators in [1, 20].

    Points with a repeated or zero coordinate are redrawn. ``positive`` keeps
    the coordinates positive (needed for real powers in float mode).
    """
    for _ in range(MAX_RESAMPLES):
        lo = 1 if positive else -NUMERATOR_RANGE
        xi = tuple(Fraction(int(rng.integers(lo, NUMERATOR_RANGE + 1)), int(rng.integers(1, DENOMINATOR_RANGE + 1)))
                   for _ in range(m))
        if 0 not in xi and len(set(xi)) == m:
            return EvalPoint(xi)
    raise InternalInconsistencyError(f"Could not draw a regular point for m={m}")


def _as_float(point: EvalPoint) -> EvalPoint:
    return EvalPoint(tuple(float(v) for v in point.xi))


def vandermonde_sides(xi: EvalPoint, family: str, r: int = 1, s: int = 1) -> Tuple[Scalar, Scalar]:
    """(left, right) sides of one Vandermonde identity at ξ."""
    m = xi.m
    deltas = [xi.delta(j) for j in range(m)]
    if family == "general":
        left = sum(Fraction(xi.xi[j]) ** (m - s) * sigma_hat(xi, r - 1, j) / deltas[j] for j in range(m))
        right = (-1) ** (s - 1) if r == s else 0
    elif family == "basic":
        left = sum(Fraction(xi.xi[j]) ** m / deltas[j] for j in range(m))
        right = sigma(xi, 1)
    elif family == "inverse":
        left = sum(Fraction(xi.xi[j]) ** -2 / deltas[j] for j in range(m))
        right = (-1) ** (m - 1) * Fraction(sigma(xi, m - 1)) / Fraction(sigma(xi, m)) ** 2
    else:
        raise PreconditionError(f"Unknown Vandermonde family {family!r}; use one of {VANDERMONDE_FAMILIES}")
    return left, right


def check_vandermonde(m: int, family: str, trials: int, rng: Optional[np.random.Generator] = None
                      ) -> VandermondeReport:
    """
    Check one Vandermonde family by exact evaluation at ``trials`` random points.

    The general family checks every pair (r, s) with 1 ≤ r, s ≤ m at each point.
    """
    if m < 2:
        raise PreconditionError(f"m must be at least 2, got {m}")
    if trials < 1:
        raise PreconditionError(f"trials must be at least 1, got {trials}")
    if family not in VANDERMONDE_FAMILIES:
        raise PreconditionError(f"Unknown Vandermonde family {family!r}; use one of {VANDERMONDE_FAMILIES}")
    rng = rng if rng is not None else np.random.default_rng(0)
    pairs = [(r, s) for r in range(1, m + 1) for s in range(1, m + 1)] if family == "general" else [(1, 1)]
    failures = []
    for _ in range(trials):
        xi = random_eval_point(m, rng)
        for r, s in pairs:
            left, right = vandermonde_sides(xi, family, r, s)
            if left != right:
                logger.error(f"❌ Vandermonde {family} (r={r}, s={s}) fails at {xi.to_list()}: {left} != {right}")
                failures.append(xi)
                break
    logger.info(f"Vandermonde {family} m={m}: {trials - len(failures)}/{trials} trials passed")
    return VandermondeReport(m=m, family=family, trials=trials, failures=tuple(failures))


def fp_ext_residual(spec: OrthotoricSpec, xi: EvalPoint) -> Scalar:
    """
    Left side of the (f, p)-extremality equation at ξ.

        -f² Σ_j Θ_j''/Δ_j + 2(p-1) f Σ_j g_j Θ_j'/Δ_j - p(p-1) Σ_j g_j² Θ_j/Δ_j

    with f = Σ_k a_k σ_k(ξ) and g_j = Σ_k a_k σ_{k-1}(ξ̂_j).
    """
    if xi.m != spec.m:
        raise PreconditionError(f"Point has {xi.m} coordinates, spec needs {spec.m}")
    if not spec.exact:
        xi = _as_float(xi)
        if any(v < 0 for v in xi.xi):
            raise PreconditionError("Non-integer p needs positive coordinates")
    p = spec.p if spec.exact else float(spec.p)
    f = sum(a * sigma(xi, k) for k, a in enumerate(spec.f_coeffs))
    first = second = third = 0
    for j, v in enumerate(xi.xi):
        d = xi.delta(j)
        if d == 0:
            raise PreconditionError(f"Δ_{j} vanishes at {xi.to_list()}")
        g = sum(a * sigma_hat(xi, k - 1, j) for k, a in enumerate(spec.f_coeffs))
        value, d1, d2 = spec.theta(j, v)
        first += d2 / d
        second += g * d1 / d
        third += g * g * value / d
    return -f * f * first + 2 * (p - 1) * f * second - p * (p - 1) * third


def _sigma_row(xi: EvalPoint) -> List[Scalar]:
    return [sigma(xi, k) for k in range(xi.m + 1)]


def _solve_exact(rows: List[List[Scalar]], rhs: List[Scalar]) -> Optional[List[Fraction]]:
    matrix = sympy.Matrix([[to_sympy(Fraction(v)) for v in row] for row in rows])
    if matrix.det() == 0:
        return None
    solution = matrix.LUsolve(sympy.Matrix([to_sympy(Fraction(v)) for v in rhs]))
    return [parse_fraction(sympy.Rational(v)) for v in solution]


def _solve_float(rows: List[List[Scalar]], rhs: List[Scalar]) -> Optional[List[float]]:
    matrix = np.array(rows, dtype=float)
    if np.linalg.cond(matrix) > 1e12:
        return None
    return [float(v) for v in np.linalg.solve(matrix, np.array(rhs, dtype=float))]


def check_affine_in_sigma(evaluator: Callable[[EvalPoint], Scalar], m: int, trials: int,
                          rng: Optional[np.random.Generator] = None, ctx: NumericContext = EXACT) -> AffineFit:
    """
    Fit residual = Σ_k b_k σ_k at m+1 points, then verify at ``trials`` fresh points.

    Exact mode solves the fit with sympy and demands exact equality; float mode
    uses positive coordinates and a relative tolerance of 1e-9. Samples whose
    σ-vectors are affinely dependent are redrawn.
    """
    if trials < 1:
        raise PreconditionError(f"trials must be at least 1, got {trials}")
    rng = rng if rng is not None else np.random.default_rng(0)
    positive = not ctx.exact
    solve = _solve_exact if ctx.exact else _solve_float

    coeffs = None
    for _ in range(MAX_RESAMPLES):
        points = [random_eval_point(m, rng, positive) for _ in range(m + 1)]
        rows = [_sigma_row(pt) for pt in points]
        coeffs = solve(rows, [evaluator(pt) for pt in points])
        if coeffs is not None:
            break
        logger.debug("Degenerate σ sample, redrawing")
    if coeffs is None:
        raise InternalInconsistencyError(f"Could not draw an affinely independent σ sample for m={m}")

    for _ in range(trials):
        pt = random_eval_point(m, rng, positive)
        value = evaluator(pt)
        fitted = sum(b * s for b, s in zip(coeffs, _sigma_row(pt)))
        if ctx.exact:
            ok = value == fitted
        else:
            ok = abs(value - fitted) <= FLOAT_RTOL * max(1.0, abs(value), abs(fitted))
        if not ok:
            logger.info(f"Residual is not affine in σ: {value} != {fitted} at {pt.to_list()}")
            return AffineFit(is_affine=False, coeffs=tuple(coeffs), trials=trials, failure=pt)
    return AffineFit(is_affine=True, coeffs=tuple(coeffs), trials=trials)


def check_spec(spec: OrthotoricSpec, trials: int, rng: Optional[np.random.Generator] = None) -> AffineFit:
    return check_affine_in_sigma(lambda pt: fp_ext_residual(spec, pt), spec.m, trials, rng, spec.ctx)


def flat_case_coefficients(m: int, p: Scalar, a0: Scalar, a1: Scalar, c: Sequence[Scalar]) -> Tuple[Scalar, Scalar]:
    """
    (b0, b1) for Θ_j = P of degree ≤ m and f = a0 + a1 σ_1.

    ``c`` lists P's coefficients from the top: P(z) = c_0 z^m + c_1 z^{m-1} + ...

        b1 = a1² c0 (p-1)(2m-p),   b0 = (p-1)(2m a0 a1 c0 - p a1² c1)
    """
    c0 = c[0]
    c1 = c[1] if len(c) > 1 else 0
    b1 = a1 * a1 * c0 * (p - 1) * (2 * m - p)
    b0 = (p - 1) * (2 * m * a0 * a1 * c0 - p * a1 * a1 * c1)
    return b0, b1


def flat_spec(m: int, p: Any, a0: Any, a1: Any, c: Sequence[Any], name: str = "") -> OrthotoricSpec:
    """Flat case: Θ_j = P with P(z) = Σ_k c_k z^{m-k}, f = a0 + a1 σ_1."""
    if len(c) > m + 1:
        raise PreconditionError(f"Flat case needs deg P ≤ m, got {len(c)} coefficients")
    c = [parse_fraction(v) for v in c]
    P = Poly(c[m - k] if m - k < len(c) else Fraction(0) for k in range(m + 1))
    return OrthotoricSpec(m=m, P=P, f_coeffs=(parse_fraction(a0), parse_fraction(a1)) + (Fraction(0),) * (m - 1),
                          p=parse_fraction(p), name=name or f"flat-m{m}-p{p}")


def flat_case_is_csck(m: int, p: Scalar, a0: Scalar, a1: Scalar, c: Sequence[Scalar]) -> bool:
    """
    Constant (a0 + a1 σ_1, p)-scalar curvature in the flat case: b1 = 0.

    For a1 ≠ 0 this is c0 = 0 or p ∈ {1, 2m}, which is asserted.
    """
    _, b1 = flat_case_coefficients(m, p, a0, a1, c)
    csck = b1 == 0
    if a1 != 0:
        expected = c[0] == 0 or p == 1 or p == 2 * m
        if csck != expected:
            raise InternalInconsistencyError(f"Flat CSCK criterion disagrees: b1={b1}, c0={c[0]}, p={p}")
    return csck


def sigma_m_spec(m: int, p: Any, P: Sequence[Any], singular: Sequence[Tuple[Any, Any]] = (),
                 name: str = "") -> OrthotoricSpec:
    """Θ_j = P + b1_j z^{p-1} + b2_j z^p with f = σ_m; ``P`` ascending, degree ≤ m."""
    p = parse_fraction(p)
    if p.denominator == 1 and 1 <= p <= m + 1:
        raise PreconditionError(f"σ_m case needs p outside {{1,...,{m + 1}}}, got {p}")
    poly = Poly(parse_fraction(v) for v in P)
    if poly.degree > m:
        raise PreconditionError(f"P must have degree ≤ m = {m}, got {poly.degree}")
    pairs = tuple((parse_fraction(b1), parse_fraction(b2)) for b1, b2 in singular)
    return OrthotoricSpec(m=m, P=poly, f_coeffs=(Fraction(0),) * m + (Fraction(1),), p=p, singular=pairs,
                          name=name or f"sigma-m{m}-p{p}")


def sigma_m_csck_check(spec: OrthotoricSpec, trials: int = 25, rng: Optional[np.random.Generator] = None) -> bool:
    """
    True iff the fitted (b_{m-1}, b_m) of a σ_m spec both vanish.

    Also asserts b_k = 0 for k ≤ m-2 and the equivalence with P(0) = P'(0) = 0.

    Raises:
        InternalInconsistencyError: the residual is not affine or the criteria disagree
    """
    m = spec.m
    if tuple(spec.f_coeffs) != (0,) * m + (1,):
        raise PreconditionError("sigma_m_csck_check needs f = σ_m")
    fit = check_spec(spec, trials, rng)
    if not fit.is_affine:
        raise InternalInconsistencyError(f"σ_m residual is not affine in σ at {fit.failure.to_list()}")
    if any(b != 0 for b in fit.coeffs[:m - 1]):
        raise InternalInconsistencyError(f"σ_m residual has lower coefficients {fit.coeffs[:m - 1]}")
    csck = fit.coeffs[m - 1] == 0 and fit.coeffs[m] == 0
    expected = spec.P.coeff(0) == 0 and spec.P.coeff(1) == 0
    if csck != expected:
        raise InternalInconsistencyError(f"CSCK fit {csck} disagrees with P(0)=P'(0)=0 being {expected}")
    return csck


def negative_control_spec() -> OrthotoricSpec:
    """Θ = z^{m+1}, f = σ_1, m = 2, p = 6: not extremal."""
    return OrthotoricSpec(m=2, P=Poly([Fraction(0)] * 3 + [Fraction(1)]),
                          f_coeffs=(Fraction(0), Fraction(1), Fraction(0)), p=Fraction(6), name="negative-control")


def bochner_flat_spec(m: int, rng: Optional[np.random.Generator] = None, name: str = "") -> OrthotoricSpec:
    """Θ_j = P of degree m+2 and p = m+2 with random rational f and P coefficients."""
    rng = rng if rng is not None else np.random.default_rng(0)

    def draw() -> Fraction:
        return Fraction(int(rng.integers(-20, 21)), int(rng.integers(1, 10)))

    P = Poly([draw() for _ in range(m + 2)] + [Fraction(int(rng.integers(1, 21)))])
    return OrthotoricSpec(m=m, P=P, f_coeffs=tuple(draw() for _ in range(m + 1)), p=Fraction(m + 2),
                          name=name or f"bochner-flat-m{m}")


@dataclass(frozen=True)
class BundledSpec:
    spec: OrthotoricSpec
    expect_affine: bool
    expected_coeffs: Optional[Tuple[Scalar, ...]] = None
    csck: Optional[bool] = None
    notes: Dict[str, Any] = field(default_factory=dict)


def _flat_m2_p5() -> BundledSpec:
    c = (Fraction(2), Fraction(-3), Fraction(5))
    a0, a1 = Fraction(1), Fraction(2)
    b0, b1 = flat_case_coefficients(2, Fraction(5), a0, a1, c)
    return BundledSpec(flat_spec(2, 5, a0, a1, c, name="flat-m2-p5"), expect_affine=True,
                       expected_coeffs=(b0, b1, Fraction(0)))


def _perturbed_flat_m2() -> BundledSpec:
    flat = flat_spec(2, 6, 0, 1, (1, 2, 3))
    spec = OrthotoricSpec(m=2, P=flat.P + Poly.monomial(3, Fraction(1)), f_coeffs=flat.f_coeffs, p=flat.p,
                          name="perturbed-flat-m2")
    return BundledSpec(spec, expect_affine=False)


BUNDLED_SPECS: Dict[str, Callable[[], BundledSpec]] = {
    "flat-m2-p5": _flat_m2_p5,
    "sigma-m-csck": lambda: BundledSpec(
        sigma_m_spec(2, 6, (0, 0, 1), singular=((1, 2), (-3, "1/2")), name="sigma-m-csck"),
        expect_affine=True, csck=True),
    "bochner-flat-m3": lambda: BundledSpec(bochner_flat_spec(3, name="bochner-flat-m3"), expect_affine=True),
    "perturbed-flat-m2": _perturbed_flat_m2,
}


def bundled_spec(name: str) -> BundledSpec:
    factory = BUNDLED_SPECS.get(name)
    if factory is None:
        raise PreconditionError(f"Unknown orthotoric spec {name!r}; available: {', '.join(sorted(BUNDLED_SPECS))}")
    return factory()
