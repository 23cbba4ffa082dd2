"""
Scalars, univariate polynomials and the admissible-setup data model.

Every computation runs in one of two modes fixed up front by a
``NumericContext``: exact rationals (``fractions.Fraction``) or IEEE doubles.
"""

import math
import logging
from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction
from numbers import Rational
from typing import Any, Iterable, List, Optional, Sequence, Tuple, Union

import numpy as np
import sympy

from .errors import ModeMismatchError, PoleError, PreconditionError

logger = logging.getLogger(__name__)

Scalar = Union[Fraction, float]


class Mode(str, Enum):
    EXACT = "exact"
    FLOAT = "float"


def parse_fraction(value: Any) -> Fraction:
    """Read an int, Fraction, decimal literal or "p/q" string as an exact rational."""
    if isinstance(value, bool):
        raise PreconditionError(f"Boolean is not a scalar: {value!r}")
    if isinstance(value, Fraction):
        return value
    if isinstance(value, (int, Rational)):
        return Fraction(value)
    if isinstance(value, float):
        if not math.isfinite(value):
            raise PreconditionError(f"Non-finite scalar: {value!r}")
        # decimal reading: 0.9 means 9/10 in a config file
        return Fraction(repr(value))
    if isinstance(value, str):
        try:
            return Fraction(value.strip())
        except ValueError as e:
            raise PreconditionError(f"Cannot read {value!r} as a rational: {str(e)}")
    if isinstance(value, sympy.Rational):
        return Fraction(int(value.p), int(value.q))
    raise PreconditionError(f"Unsupported scalar type {type(value).__name__}")


def exact_sqrt(value: Fraction) -> Optional[Fraction]:
    """Square root of a nonnegative rational when it is rational, else None."""
    if value < 0:
        return None
    num, den = value.numerator, value.denominator
    rn, rd = math.isqrt(num), math.isqrt(den)
    if rn * rn == num and rd * rd == den:
        return Fraction(rn, rd)
    return None


def to_sympy(value: Scalar) -> sympy.Expr:
    if isinstance(value, Rational):
        return sympy.Rational(int(value.numerator), int(value.denominator))
    return sympy.Float(value)


@dataclass(frozen=True)
class NumericContext:
    """The arithmetic mode shared by all values of one computation."""

    mode: Mode = Mode.EXACT

    @property
    def exact(self) -> bool:
        return self.mode is Mode.EXACT

    def coerce(self, value: Any) -> Scalar:
        if self.exact:
            return parse_fraction(value)
        if isinstance(value, str):
            return float(parse_fraction(value))
        if isinstance(value, bool):
            raise PreconditionError(f"Boolean is not a scalar: {value!r}")
        return float(value)

    def check(self, *values: Any) -> None:
        """Reject values that belong to the other mode."""
        for value in values:
            if self.exact:
                if isinstance(value, float) or not isinstance(value, (int, Fraction)):
                    raise ModeMismatchError(
                        f"Float value {value!r} used in an exact computation")
            elif isinstance(value, Fraction):
                raise ModeMismatchError(
                    f"Rational value {value!r} used in a float computation")

    @property
    def zero(self) -> Scalar:
        return Fraction(0) if self.exact else 0.0

    @property
    def one(self) -> Scalar:
        return Fraction(1) if self.exact else 1.0

    def power(self, base: Scalar, exponent: Scalar) -> Scalar:
        if self.exact:
            if isinstance(exponent, Fraction) and exponent.denominator != 1:
                raise PreconditionError(
                    f"Exact mode cannot raise to the non-integer power {exponent}")
            return base ** int(exponent)
        return float(base) ** float(exponent)

    def sqrt(self, value: Scalar) -> Scalar:
        """Exact square root when rational; exact mode falls back to float otherwise."""
        if self.exact:
            root = exact_sqrt(Fraction(value))
            if root is not None:
                return root
            logger.debug(f"sqrt({value}) is irrational, returning a float")
        return math.sqrt(float(value))


FLOAT = NumericContext(Mode.FLOAT)
EXACT = NumericContext(Mode.EXACT)


class Poly:
    """
    Dense univariate polynomial, ``coeffs[k]`` multiplying ``z**k``.

    Trailing zeros are stripped so that equality is structural. Arithmetic is
    exact when the coefficients are Fractions.
    """

    __slots__ = ("coeffs",)

    def __init__(self, coeffs: Iterable[Scalar] = ()):
        cs = list(coeffs)
        while cs and cs[-1] == 0:
            cs.pop()
        self.coeffs: Tuple[Scalar, ...] = tuple(cs)

    @classmethod
    def constant(cls, c: Scalar) -> "Poly":
        return cls([c])

    @classmethod
    def monomial(cls, k: int, c: Scalar = 1) -> "Poly":
        return cls([0] * k + [c])

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1

    def is_zero(self) -> bool:
        return not self.coeffs

    @property
    def leading(self) -> Scalar:
        return self.coeffs[-1] if self.coeffs else 0

    def coeff(self, k: int) -> Scalar:
        return self.coeffs[k] if 0 <= k < len(self.coeffs) else 0

    def __call__(self, z):
        acc = 0 * z
        for c in reversed(self.coeffs):
            acc = acc * z + c
        return acc

    def __add__(self, other) -> "Poly":
        if not isinstance(other, Poly):
            other = Poly.constant(other)
        n = max(len(self.coeffs), len(other.coeffs))
        return Poly(self.coeff(k) + other.coeff(k) for k in range(n))

    __radd__ = __add__

    def __neg__(self) -> "Poly":
        return Poly(-c for c in self.coeffs)

    def __sub__(self, other) -> "Poly":
        if not isinstance(other, Poly):
            other = Poly.constant(other)
        return self + (-other)

    def __rsub__(self, other) -> "Poly":
        return (-self) + other

    def __mul__(self, other) -> "Poly":
        if not isinstance(other, Poly):
            return Poly(c * other for c in self.coeffs)
        if self.is_zero() or other.is_zero():
            return Poly()
        out = [0] * (len(self.coeffs) + len(other.coeffs) - 1)
        for i, ci in enumerate(self.coeffs):
            if ci == 0:
                continue
            for j, cj in enumerate(other.coeffs):
                out[i + j] += ci * cj
        return Poly(out)

    __rmul__ = __mul__

    def __truediv__(self, scalar) -> "Poly":
        return Poly(c / scalar for c in self.coeffs)

    def __pow__(self, n: int) -> "Poly":
        if n < 0:
            raise PreconditionError("Negative polynomial powers are not polynomials")
        result = Poly([1])
        base = self
        while n:
            if n & 1:
                result = result * base
            base = base * base
            n >>= 1
        return result

    def __eq__(self, other) -> bool:
        if not isinstance(other, Poly):
            other = Poly.constant(other)
        return self.coeffs == other.coeffs

    def __hash__(self) -> int:
        return hash(self.coeffs)

    def __repr__(self) -> str:
        return f"Poly({list(self.coeffs)!r})"

    def derivative(self, order: int = 1) -> "Poly":
        p = self
        for _ in range(order):
            p = Poly(k * c for k, c in enumerate(p.coeffs) if k > 0)
        return p

    def antiderivative(self) -> "Poly":
        """Antiderivative vanishing at z = 0."""
        return Poly([0] + [c / (k + 1) for k, c in enumerate(self.coeffs)])

    def integrate(self, lo: Scalar, hi: Scalar) -> Scalar:
        anti = self.antiderivative()
        return anti(hi) - anti(lo)

    def shift(self, c: Scalar) -> "Poly":
        """The polynomial z ↦ P(z + c)."""
        result = Poly()
        step = Poly([c, 1])
        for coef in reversed(self.coeffs):
            result = result * step + coef
        return result

    def divmod(self, other: "Poly") -> Tuple["Poly", "Poly"]:
        if other.is_zero():
            raise PoleError("Polynomial division by zero")
        rem = list(self.coeffs)
        dq = other.degree
        if len(rem) - 1 < dq:
            return Poly(), Poly(rem)
        quot = [0] * (len(rem) - dq)
        lead = other.leading
        for k in range(len(rem) - 1 - dq, -1, -1):
            q = rem[k + dq] / lead
            quot[k] = q
            if q == 0:
                continue
            for j, cj in enumerate(other.coeffs):
                rem[k + j] -= q * cj
        return Poly(quot), Poly(rem[:dq])

    def strip_root(self, root: Scalar) -> Tuple["Poly", int]:
        """Divide out (z - root) as often as it divides exactly; return (quotient, count)."""
        factor = Poly([-root, 1])
        p, count = self, 0
        while not p.is_zero():
            q, r = p.divmod(factor)
            if not r.is_zero():
                break
            p, count = q, count + 1
        return p, count

    def to_float(self) -> "Poly":
        return Poly(float(c) for c in self.coeffs)

    def to_sympy(self, symbol: sympy.Symbol) -> sympy.Poly:
        if self.is_zero():
            return sympy.Poly(0, symbol, domain=sympy.QQ)
        coeffs = [to_sympy(c) for c in reversed(self.coeffs)]
        domain = sympy.QQ if all(isinstance(c, Rational) for c in self.coeffs) else sympy.RR
        return sympy.Poly(coeffs, symbol, domain=domain)

    def numpy_coeffs(self) -> np.ndarray:
        """Ascending float coefficients for numpy.polynomial routines."""
        return np.array([float(c) for c in self.coeffs] or [0.0])


class RationalFn:
    """
    Quotient of two polynomials, kept with a monic denominator.

    Content normalization only; common factors are cancelled on request via
    ``cancel_roots``.
    """

    __slots__ = ("num", "den")

    def __init__(self, num: Poly, den: Optional[Poly] = None):
        den = den if den is not None else Poly([1])
        if den.is_zero():
            raise PoleError("RationalFn with zero denominator")
        lead = den.leading
        if lead != 1:
            num, den = num / lead, den / lead
        self.num = num
        self.den = den

    def __call__(self, x: Scalar) -> Scalar:
        d = self.den(x)
        if d == 0:
            raise PoleError(f"Denominator vanishes at {x}")
        return self.num(x) / d

    def __add__(self, other: "RationalFn") -> "RationalFn":
        if self.den == other.den:
            return RationalFn(self.num + other.num, self.den)
        return RationalFn(self.num * other.den + other.num * self.den, self.den * other.den)

    def __neg__(self) -> "RationalFn":
        return RationalFn(-self.num, self.den)

    def __sub__(self, other: "RationalFn") -> "RationalFn":
        return self + (-other)

    def __mul__(self, other) -> "RationalFn":
        if isinstance(other, RationalFn):
            return RationalFn(self.num * other.num, self.den * other.den)
        return RationalFn(self.num * other, self.den)

    __rmul__ = __mul__

    def __truediv__(self, other: "RationalFn") -> "RationalFn":
        if other.num.is_zero():
            raise PoleError("Division by the zero rational function")
        return RationalFn(self.num * other.den, self.den * other.num)

    def cancel_roots(self, roots: Sequence[Scalar]) -> "RationalFn":
        """Cancel common linear factors (a - r) for the given candidate roots."""
        num, den = self.num, self.den
        for r in roots:
            num_q, k_num = num.strip_root(r)
            den_q, k_den = den.strip_root(r)
            k = min(k_num, k_den)
            if k == 0:
                continue
            factor = Poly([-r, 1]) ** (k_num - k)
            num = num_q * factor
            den = den_q * (Poly([-r, 1]) ** (k_den - k))
        return RationalFn(num, den)

    def __repr__(self) -> str:
        return f"RationalFn(num={self.num!r}, den={self.den!r})"


@dataclass(frozen=True)
class BaseBlock:
    """One base factor: the Kähler-class parameter x, complex dimension d, curvature s."""

    x: Scalar
    d: int
    s: Scalar


@dataclass(frozen=True)
class AdmissibleSetup:
    """
    Admissible data (x_a, d_a, s_a) for a ∈ 𝒜 plus the blow-down dimensions d0, dinf.

    The extended index set adds (1, d0, d0+1) and (-1, dinf, -(dinf+1)) when
    the corresponding dimension is positive.
    """

    blocks: Tuple[BaseBlock, ...]
    d0: int = 0
    dinf: int = 0
    ctx: NumericContext = field(default=EXACT)

    def __post_init__(self):
        if self.d0 < 0 or self.dinf < 0:
            raise PreconditionError("d0 and dinf must be nonnegative")
        for block in self.blocks:
            self.ctx.check(block.x, block.s)
            if block.d < 1:
                raise PreconditionError(f"Block dimension must be positive, got {block.d}")
            if block.x == 0 or abs(block.x) >= 1:
                raise PreconditionError(f"Block parameter must satisfy 0 < |x| < 1, got {block.x}")
        if self.m < 2:
            raise PreconditionError(f"Fibre dimension m = {self.m} must be at least 2")

    @classmethod
    def build(cls, blocks: Sequence[Tuple[Any, int, Any]], d0: int = 0, dinf: int = 0,
              ctx: NumericContext = EXACT) -> "AdmissibleSetup":
        """Create a setup from raw (x, d, s) triples, coercing scalars to the context."""
        return cls(
            blocks=tuple(BaseBlock(ctx.coerce(x), int(d), ctx.coerce(s)) for x, d, s in blocks),
            d0=int(d0),
            dinf=int(dinf),
            ctx=ctx,
        )

    @property
    def extended_blocks(self) -> Tuple[BaseBlock, ...]:
        one = self.ctx.one
        extra: List[BaseBlock] = []
        if self.d0 > 0:
            extra.append(BaseBlock(one, self.d0, one * (self.d0 + 1)))
        if self.dinf > 0:
            extra.append(BaseBlock(-one, self.dinf, -one * (self.dinf + 1)))
        return tuple(self.blocks) + tuple(extra)

    @property
    def m(self) -> int:
        return 1 + sum(b.d for b in self.blocks) + self.d0 + self.dinf

    def with_block_s(self, index: int, s: Scalar) -> "AdmissibleSetup":
        blocks = list(self.blocks)
        blocks[index] = BaseBlock(blocks[index].x, blocks[index].d, s)
        return AdmissibleSetup(tuple(blocks), self.d0, self.dinf, self.ctx)

    def with_block_x(self, index: int, x: Scalar) -> "AdmissibleSetup":
        blocks = list(self.blocks)
        blocks[index] = BaseBlock(x, blocks[index].d, blocks[index].s)
        return AdmissibleSetup(tuple(blocks), self.d0, self.dinf, self.ctx)

    def mirrored(self) -> "AdmissibleSetup":
        """
        The same admissible metrics written in the momentum coordinate -z.

        Swapping the roles of E_0 and E_inf sends (x_a, s_a) to (-x_a, -s_a) and
        exchanges d0 with dinf; a weight z + a becomes a multiple of z - a.
        """
        return AdmissibleSetup(
            tuple(BaseBlock(-b.x, b.d, -b.s) for b in self.blocks),
            self.dinf, self.d0, self.ctx)

    def in_mode(self, ctx: NumericContext) -> "AdmissibleSetup":
        """Same data converted to another mode (float→exact reads floats exactly)."""
        def conv(v):
            if ctx.exact and isinstance(v, float):
                return Fraction(v)
            return ctx.coerce(v)
        return AdmissibleSetup(
            tuple(BaseBlock(conv(b.x), b.d, conv(b.s)) for b in self.blocks),
            self.d0, self.dinf, ctx)

    def describe(self) -> dict:
        return {
            "blocks": [{"x": str(b.x), "d": b.d, "s": str(b.s)} for b in self.blocks],
            "d0": self.d0,
            "dinf": self.dinf,
            "m": self.m,
            "mode": self.ctx.mode.value,
        }


@dataclass(frozen=True)
class WeightParams:
    """The weight f = z + a and exponent p."""

    a: Scalar
    p: Scalar
    ctx: NumericContext = field(default=EXACT)

    def __post_init__(self):
        self.ctx.check(self.a, self.p)
        if not self.a > 1:
            raise PreconditionError(f"Weight parameter a must exceed 1, got {self.a}")

    @classmethod
    def build(cls, a: Any, p: Any, ctx: NumericContext = EXACT) -> "WeightParams":
        return cls(ctx.coerce(a), ctx.coerce(p), ctx)

    @property
    def p_is_integer(self) -> bool:
        return float(self.p).is_integer()

    def require_exact_path(self, m: int) -> int:
        """The integer exponent, or PreconditionError when the exact path is unavailable."""
        if not self.p_is_integer:
            raise PreconditionError(f"Exact path needs an integer p, got {self.p}")
        p = int(self.p)
        if not (p >= m + 2 or p <= -1):
            raise PreconditionError(f"Exact path needs p >= m+2 = {m + 2} or p <= -1, got {p}")
        return p

    def with_a(self, a: Scalar) -> "WeightParams":
        return WeightParams(a, self.p, self.ctx)


def momentum_polynomial(setup: AdmissibleSetup) -> Poly:
    """p_c(z) = ∏_{a∈Â} (1 + x_a z)^{d_a}."""
    one = setup.ctx.one
    result = Poly([one])
    for block in setup.extended_blocks:
        result = result * Poly([one, block.x]) ** block.d
    return result


def curvature_density(setup: AdmissibleSetup) -> Poly:
    """
    Σ_{a∈Â} x_a d_a s_a p_c(z) / (1 + x_a z).

    Each quotient is built as a product of the remaining factors, so it is
    exact in both modes.
    """
    one = setup.ctx.one
    blocks = setup.extended_blocks
    total = Poly()
    for i, block in enumerate(blocks):
        weight = block.x * block.d * block.s
        if weight == 0:
            continue
        term = Poly([one, block.x]) ** (block.d - 1)
        for j, other in enumerate(blocks):
            if j != i:
                term = term * Poly([one, other.x]) ** other.d
        total = total + term * weight
    return total
