"""
Real-root isolation and one-dimensional refinement helpers.

Exact polynomials go through sympy's real-root isolation; float functions are
bracketed on a grid and refined with scipy.
"""

import logging
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, List, Optional, Sequence, Tuple

import numpy as np
import sympy
from scipy import interpolate, optimize

from .core import Poly, parse_fraction

logger = logging.getLogger(__name__)

_Z = sympy.Symbol("z")


@dataclass(frozen=True)
class RealRoot:
    """An isolated real root; ``exact`` is set when the root is rational."""

    value: float
    lo: Fraction
    hi: Fraction
    multiplicity: int
    exact: Optional[Fraction] = None

    @property
    def rational(self) -> bool:
        return self.exact is not None


def isolate_real_roots(poly: Poly, lo: Optional[Fraction] = None, hi: Optional[Fraction] = None,
                       eps: Fraction = Fraction(1, 10 ** 13),
                       include_lo: bool = False, include_hi: bool = True) -> List[RealRoot]:
    """
    Isolate the real roots of an exact polynomial inside (lo, hi].

    Args:
        poly: Polynomial with Fraction coefficients
        lo: Lower bound (None for -inf)
        hi: Upper bound (None for +inf)
        eps: Width to which each isolating interval is refined
        include_lo: Keep a root sitting exactly at lo
        include_hi: Keep a root sitting exactly at hi

    Returns:
        Roots in increasing order with multiplicities
    """
    if poly.is_zero():
        raise ValueError("The zero polynomial has no isolated roots")
    sp = poly.to_sympy(_Z)
    if sp.degree() <= 0:
        return []
    rational_roots = {parse_fraction(r): k for r, k in sp.ground_roots().items()}
    kwargs = {"eps": sympy.Rational(eps.numerator, eps.denominator)}
    if lo is not None:
        kwargs["inf"] = sympy.Rational(lo.numerator, lo.denominator)
    if hi is not None:
        kwargs["sup"] = sympy.Rational(hi.numerator, hi.denominator)

    roots: List[RealRoot] = []
    for (left, right), mult in sp.intervals(**kwargs):
        left_q, right_q = parse_fraction(left), parse_fraction(right)
        exact = next((r for r in rational_roots if left_q <= r <= right_q), None)
        value = float(exact) if exact is not None else float((left_q + right_q) / 2)
        if lo is not None and not include_lo and (exact == lo or right_q <= lo):
            continue
        if hi is not None and not include_hi and (exact == hi or left_q >= hi):
            continue
        roots.append(RealRoot(value, left_q, right_q, int(mult), exact))
    roots.sort(key=lambda r: r.value)
    return roots


def count_real_roots(poly: Poly, lo: Fraction, hi: Fraction) -> int:
    """Number of distinct real roots in the closed interval [lo, hi]."""
    sp = poly.to_sympy(_Z)
    return int(sp.count_roots(sympy.Rational(lo.numerator, lo.denominator),
                              sympy.Rational(hi.numerator, hi.denominator)))


def bracket_sign_changes(values: np.ndarray) -> List[int]:
    """Indices i with values[i] and values[i+1] of opposite sign (or values[i] == 0)."""
    idx = []
    for i in range(len(values) - 1):
        if values[i] == 0 or values[i] * values[i + 1] < 0:
            idx.append(i)
    return idx


def refine_root(fn: Callable[[float], float], lo: float, hi: float, xtol: float = 1e-12) -> float:
    flo, fhi = fn(lo), fn(hi)
    if flo == 0:
        return lo
    if fhi == 0:
        return hi
    return optimize.brentq(fn, lo, hi, xtol=xtol, rtol=4 * np.finfo(float).eps, maxiter=200)


def refine_minimum(fn: Callable[[float], float], lo: float, mid: float, hi: float,
                   xtol: float = 1e-12) -> Tuple[float, float]:
    """Golden-section refinement of a bracketed local minimum; returns (argmin, min)."""
    try:
        res = optimize.minimize_scalar(fn, bracket=(lo, mid, hi), method="golden",
                                       options={"xtol": xtol})
        x = float(res.x)
        if not lo <= x <= hi:
            raise ValueError("left the bracket")
    except ValueError:
        res = optimize.minimize_scalar(fn, bounds=(lo, hi), method="bounded",
                                       options={"xatol": xtol})
        x = float(res.x)
    return x, float(fn(x))


def find_roots_on_grid(fn: Callable[[float], float], grid: Sequence[float], xtol: float = 1e-12,
                       tangency_tol: float = 1e-9) -> List[Tuple[float, int]]:
    """
    Roots of a float function on the span of a grid, with a multiplicity estimate.

    Sign changes are refined by Brent's method. Local minima of |fn| without a
    sign change are refined by golden section and kept as tangential (even)
    roots when |fn| falls below tangency_tol times the larger neighbouring sample.
    Multiplicity estimates: 1 for a transversal crossing, 3 for a crossing
    with vanishing slope, 2 for a tangency.
    """
    grid = np.asarray(grid, dtype=float)
    values = np.array([fn(g) for g in grid])
    found: List[Tuple[float, int]] = []

    for i in bracket_sign_changes(values):
        root = refine_root(fn, grid[i], grid[i + 1], xtol=xtol)
        h = max(1e-6, 1e-6 * abs(root))
        slope = (fn(root + h) - fn(root - h)) / (2 * h)
        width = grid[i + 1] - grid[i]
        flat = abs(slope) * width <= 1e-6 * max(abs(values[i]), abs(values[i + 1]), 1e-300)
        found.append((root, 3 if flat else 1))

    absval = np.abs(values)
    for i in range(1, len(grid) - 1):
        if absval[i] <= absval[i - 1] and absval[i] <= absval[i + 1] and values[i - 1] * values[i + 1] > 0:
            if any(grid[i - 1] <= r <= grid[i + 1] for r, _ in found):
                continue
            x, v = refine_minimum(lambda t: abs(fn(t)), grid[i - 1], grid[i], grid[i + 1], xtol=xtol)
            if v <= tangency_tol * max(absval[i - 1], absval[i + 1]):
                logger.debug(f"Tangential root near {x} (|f| = {v:.3e})")
                found.append((x, 2))

    found.sort()
    deduped: List[Tuple[float, int]] = []
    for root, mult in found:
        if deduped and abs(root - deduped[-1][0]) <= 10 * xtol * max(1.0, abs(root)):
            continue
        deduped.append((root, mult))
    return deduped


def richardson_limit(fn: Callable[[float], float], endpoint: float,
                     kmin: int = 4, kmax: int = 10) -> Tuple[float, float]:
    """
    Extrapolate lim fn(z) as z → endpoint from inside [-1, 1].

    Samples z = endpoint ∓ 2^-k and extrapolates the interpolating polynomial
    in h to h = 0. Returns (value, error estimate).
    """
    direction = -1.0 if endpoint > 0 else 1.0
    hs = np.array([2.0 ** -k for k in range(kmin, kmax + 1)])
    vals = np.array([fn(endpoint + direction * h) for h in hs])
    full = float(interpolate.BarycentricInterpolator(hs, vals)(0.0))
    coarse = float(interpolate.BarycentricInterpolator(hs[1:], vals[1:])(0.0))
    return full, abs(full - coarse)
