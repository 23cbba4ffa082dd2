"""Tests for real root isolation and the float root and limit helpers."""

import math
from fractions import Fraction

import numpy as np
import pytest

from admwex.core import Poly
from admwex.rootfinding import count_real_roots, find_roots_on_grid, isolate_real_roots, richardson_limit

ONE = Fraction(1)


def from_roots(*roots):
    p = Poly([ONE])
    for r in roots:
        p = p * Poly([-Fraction(r), ONE])
    return p


def test_isolate_mixed_roots():
    p = from_roots(Fraction(1, 2), 2) * Poly([-2 * ONE, 0, ONE])
    roots = isolate_real_roots(p, lo=Fraction(0), hi=Fraction(3))

    assert [r.exact for r in roots] == [Fraction(1, 2), None, Fraction(2)]
    assert abs(roots[1].value - math.sqrt(2)) <= 1e-12
    assert all(r.multiplicity == 1 for r in roots)


def test_isolate_multiplicity():
    roots = isolate_real_roots(from_roots(1, 1, 1, -3))
    assert [(r.exact, r.multiplicity) for r in roots] == [(Fraction(-3), 1), (ONE, 3)]


def test_isolate_open_and_closed_ends():
    p = from_roots(1, 2)
    assert [r.exact for r in isolate_real_roots(p, lo=ONE, hi=Fraction(2))] == [Fraction(2)]
    assert [r.exact for r in isolate_real_roots(p, lo=ONE, hi=Fraction(2), include_lo=True)] == [ONE, Fraction(2)]
    assert isolate_real_roots(p, lo=ONE, hi=Fraction(2), include_hi=False) == []
    assert isolate_real_roots(Poly([ONE])) == []

    with pytest.raises(ValueError):
        isolate_real_roots(Poly())


def test_count_real_roots():
    p = from_roots(-1, Fraction(1, 3), 5)
    assert count_real_roots(p, Fraction(-1), ONE) == 2
    assert count_real_roots(Poly([ONE, 0, ONE]), Fraction(-10), Fraction(10)) == 0


class TestGridRoots:
    def test_transversal(self):
        roots = find_roots_on_grid(lambda x: (x - 0.3) * (x - 0.7), np.linspace(0.0, 1.0, 50))
        assert [m for _, m in roots] == [1, 1]
        assert np.allclose([r for r, _ in roots], [0.3, 0.7], atol=1e-12)

    def test_tangential(self):
        roots = find_roots_on_grid(lambda x: (x - 0.5) ** 2, np.linspace(0.0, 1.0, 40))
        assert len(roots) == 1
        root, mult = roots[0]
        assert mult == 2
        assert abs(root - 0.5) <= 1e-6

    def test_flat_crossing(self):
        roots = find_roots_on_grid(lambda x: (x - 0.5) ** 3, np.linspace(0.0, 1.0, 40))
        assert len(roots) == 1
        assert roots[0][1] == 3
        assert abs(roots[0][0] - 0.5) <= 1e-4

    def test_no_roots(self):
        assert find_roots_on_grid(lambda x: 1.0 + x * x, np.linspace(-1.0, 1.0, 20)) == []


def test_richardson_limit():
    value, err = richardson_limit(lambda z: (1.0 - z * z) / (1.0 - z), 1.0)
    assert abs(value - 2.0) <= 1e-10
    assert err <= 1e-8

    value, _ = richardson_limit(lambda z: math.sin(z + 1.0) / (z + 1.0), -1.0)
    assert abs(value - 1.0) <= 1e-9
