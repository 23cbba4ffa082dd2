from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from admwex.core import EXACT, FLOAT, AdmissibleSetup, Poly, WeightParams, momentum_polynomial
from admwex.errors import PreconditionError
from admwex.moments import solve_extremal_constants
from admwex.presets import hirzebruch, negative_scal
from admwex.profile import (PositivityStatus, ProfileKind, build_profile, build_profile_ansatz,
                            build_profile_integral, canonical_profile, endpoint_residuals, ode_residual, positivity,
                            profile_from_theta, theta, weighted_scalar_curvature)

from conftest import em_curvature

HALF = Fraction(1, 2)


def em_profile(s1):
    s1 = Fraction(s1)
    return build_profile_ansatz(negative_scal(s1, em_curvature(s1)), WeightParams.build(5, 6))


def closed_form_F(s1, z):
    """The displayed F for x = (1/2, 1/3), a = 5, p = 6 on the line A1 = 0."""
    quartic = 26078 + 22965 * z + 7553 * z ** 2 + 1095 * z ** 3 + 53 * z ** 4
    return (1 - z * z) * (3 * quartic + s1 * (1 - z * z) * (1181 + 465 * z + 28 * z * z)) / 86616


class TestAnsatz:
    def test_coefficients(self, negative_scal_em):
        setup, w = negative_scal_em
        s1, s2 = Fraction(2), Fraction(-836, 1203)
        prof = build_profile_ansatz(setup, w)
        c = prof.coeffs_in_a_basis
        assert sorted(c) == [0, 1, 2, 3, 5, 6]
        assert c[0] == -12 * (314 + 2978 * s1 + 787 * s2) / Fraction(24073)
        assert c[1] == 2 * (-135 + 1294 * s1 + 279 * s2) / Fraction(1267)
        assert c[2] == (7640 - 14198 * s1 - 2697 * s2) / Fraction(15204)
        assert c[3] == (-98400 + 69093 * s1 + 12043 * s2) / Fraction(433314)
        assert c[5] == (415 - 83 * s1 - 13 * s2) / Fraction(30408)
        assert c[6] == (-21912 + 2862 * s1 + 433 * s2) / Fraction(13866048)
        assert prof.constants.A1 == 0
        assert prof.constants.A2 == Fraction(34320, 401)

    @pytest.mark.parametrize("s1", [0, 2, Fraction(7, 3)])
    def test_closed_form(self, s1):
        prof = em_profile(s1)
        for z in (-HALF, Fraction(0), HALF, Fraction(1, 7)):
            assert prof.F(z) == closed_form_F(Fraction(s1), z)

    def test_closed_form_at_zero_curvature(self):
        prof = em_profile(0)
        quartic = Poly([26078, 22965, 7553, 1095, 53])
        for z in (-HALF, Fraction(0), HALF):
            assert prof.F(z) * 86616 / (1 - z * z) == 3 * quartic(z)
        assert prof.dF(Fraction(1)) == -4
        assert prof.dF(Fraction(-1)) == Fraction(2, 3)

    def test_endpoint_conditions(self, negative_scal_em):
        prof = build_profile_ansatz(*negative_scal_em)
        one = Fraction(1)
        pc = momentum_polynomial(prof.setup)
        assert prof.F(one) == 0
        assert prof.F(-one) == 0
        assert prof.dF(one) == -2 * pc(one)
        assert prof.dF(-one) == 2 * pc(-one)
        assert theta(prof, one, derivative=1) == -2
        assert theta(prof, -one, derivative=1) == 2

    def test_weighted_scalar_curvature_is_affine(self):
        setup = negative_scal(1, 3)
        w = WeightParams.build(Fraction(7, 2), 6)
        prof = build_profile_ansatz(setup, w)
        A1, A2 = prof.constants.A1, prof.constants.A2
        assert (A1, A2) == (solve_extremal_constants(setup, w).A1, solve_extremal_constants(setup, w).A2)
        for z in (Fraction(-1), Fraction(-2, 3), Fraction(0), Fraction(5, 7), Fraction(1)):
            assert weighted_scalar_curvature(prof, z) == A1 * z + A2

    def test_blow_down_endpoint(self):
        setup = AdmissibleSetup.build([(HALF, 1, 1)], d0=1)
        prof = build_profile_ansatz(setup, WeightParams.build(3, 5))
        A1, A2 = prof.constants.A1, prof.constants.A2
        one = Fraction(1)
        assert momentum_polynomial(setup)(-one) == 0
        assert weighted_scalar_curvature(prof, -one) == A2 - A1
        assert theta(prof, -one) == 0

    def test_poly_form(self, negative_scal_em):
        prof = build_profile_ansatz(*negative_scal_em)
        assert prof.poly_form.exponent == 0
        z = Fraction(3, 11)
        assert prof.poly_form.numerator(z) == prof.F(z)

    def test_exact_path_preconditions(self):
        with pytest.raises(PreconditionError):
            build_profile_ansatz(negative_scal(1, 1), WeightParams.build(5, 4))
        with pytest.raises(PreconditionError):
            build_profile_ansatz(negative_scal(1.0, 1.0, ctx=FLOAT), WeightParams(5.0, 3.0, FLOAT))

    @settings(max_examples=25, deadline=None)
    @given(data=st.data())
    def test_property_suite(self, data):
        n_blocks = data.draw(st.integers(1, 2))
        blocks = []
        for _ in range(n_blocks):
            x = data.draw(st.fractions(min_value=Fraction(-9, 10), max_value=Fraction(9, 10), max_denominator=20)
                          .filter(lambda v: v != 0))
            d = data.draw(st.integers(1, 2))
            s = data.draw(st.fractions(min_value=-5, max_value=5, max_denominator=10))
            blocks.append((x, d, s))
        setup = AdmissibleSetup.build(blocks)
        p = data.draw(st.sampled_from(sorted({setup.m + 2, 2 * setup.m})))
        a = data.draw(st.fractions(min_value=Fraction(11, 10), max_value=4, max_denominator=20))
        w = WeightParams(a, Fraction(p), EXACT)
        prof = build_profile_ansatz(setup, w)

        one = Fraction(1)
        pc = momentum_polynomial(setup)
        assert prof.F(one) == 0 and prof.F(-one) == 0
        assert prof.dF(one) == -2 * pc(one)
        assert prof.dF(-one) == 2 * pc(-one)
        assert weighted_scalar_curvature(prof, Fraction(1, 3)) == prof.constants.A1 / 3 + prof.constants.A2
        assert ode_residual(prof) <= 1e-8

        fprof = build_profile_ansatz(setup.in_mode(FLOAT), WeightParams(float(a), float(p), FLOAT))
        grid = np.linspace(-1.0, 1.0, 65)
        exact_values = np.array([float(prof.F(Fraction(g))) for g in grid])
        scale = max(1.0, float(np.max(np.abs(exact_values))))
        assert np.max(np.abs(fprof.F(grid) - exact_values)) <= 1e-8 * scale


class TestProperties:
    @settings(max_examples=200, deadline=None)
    @given(data=st.data())
    def test_endpoint_and_ode_residuals(self, data):
        n_blocks = data.draw(st.integers(1, 2))
        blocks = []
        for _ in range(n_blocks):
            x = data.draw(st.floats(-0.9, 0.9).filter(lambda v: abs(v) >= 1e-3))
            blocks.append((x, data.draw(st.integers(1, 2)), data.draw(st.floats(-5.0, 5.0))))
        setup = AdmissibleSetup.build(blocks, ctx=FLOAT)
        p = data.draw(st.sampled_from([4.0, 6.0, float(setup.m + 2), float(2 * setup.m), 3.5]))
        a = data.draw(st.floats(1.05, 20.0, exclude_min=True))
        prof = build_profile(setup, WeightParams(a, p, FLOAT))

        residuals = endpoint_residuals(prof)
        scale = residuals["scale"]
        assert residuals["F_plus"] <= 1e-10 * scale and residuals["F_minus"] <= 1e-10 * scale
        assert residuals["slope_plus"] <= 1e-8 * scale and residuals["slope_minus"] <= 1e-8 * scale
        assert ode_residual(prof) <= 1e-8

    @settings(max_examples=100, deadline=None)
    @given(data=st.data())
    def test_small_x_profiles_are_positive(self, data):
        n_blocks = data.draw(st.integers(1, 3))
        blocks = []
        for _ in range(n_blocks):
            x = data.draw(st.fractions(min_value=Fraction(-1, 20), max_value=Fraction(1, 20), max_denominator=200)
                          .filter(lambda v: v != 0))
            s = data.draw(st.fractions(min_value=-5, max_value=5, max_denominator=10))
            blocks.append((x, data.draw(st.integers(1, 2)), s))
        setup = AdmissibleSetup.build(blocks)
        p = data.draw(st.sampled_from(sorted({setup.m + 2, 2 * setup.m})))
        a = data.draw(st.fractions(min_value=Fraction(3, 2), max_value=10, max_denominator=4))
        prof = build_profile(setup, WeightParams(a, Fraction(p), EXACT))
        assert positivity(prof).status is PositivityStatus.POSITIVE


class TestIntegralBuilder:
    def test_small_exponent_uses_integral(self):
        setup = hirzebruch(0.5, ctx=FLOAT)
        prof = build_profile(setup, WeightParams(3.0, 2.0, FLOAT))
        assert prof.kind is ProfileKind.NUMERIC
        residuals = endpoint_residuals(prof)
        assert residuals["F_minus"] <= 1e-10 * residuals["scale"]
        assert residuals["F_plus"] <= 1e-8 * residuals["scale"]
        assert residuals["slope_plus"] <= 1e-7 * residuals["scale"]
        A1, A2 = prof.constants.A1, prof.constants.A2
        for z in (-0.7, 0.0, 0.3):
            assert abs(weighted_scalar_curvature(prof, z) - (A1 * z + A2)) <= 1e-7 * max(1.0, abs(A2))

    def test_agrees_with_ansatz(self):
        setup = hirzebruch(0.5, ctx=FLOAT)
        w = WeightParams(3.0, 3.5, FLOAT)
        numeric = build_profile_integral(setup, w)
        ansatz = build_profile_ansatz(setup, w)
        grid = np.linspace(-1.0, 1.0, 129)
        scale = max(1.0, float(np.max(np.abs(ansatz.F(grid)))))
        assert np.max(np.abs(numeric.F(grid) - ansatz.F(grid))) <= 1e-9 * scale
        assert ode_residual(numeric) <= 1e-8

    def test_exact_inputs_are_converted(self):
        w = WeightParams.build(3, 6)
        prof = build_profile_integral(hirzebruch(HALF), w)
        reference = build_profile_ansatz(hirzebruch(HALF), w)
        assert not prof.ctx.exact
        assert abs(prof.F(0.25) - float(reference.F(Fraction(1, 4)))) <= 1e-9


class TestTheta:
    def test_canonical(self):
        setup = negative_scal(1, 1)
        prof = canonical_profile(setup, WeightParams.build(5, 6))
        assert theta(prof, HALF) == Fraction(3, 4)
        assert theta(prof, Fraction(1)) == 0
        assert theta(prof, Fraction(1), derivative=1) == -2

    def test_endpoint_extrapolation(self):
        setup = AdmissibleSetup.build([(0.5, 1, 1.0)], d0=1, ctx=FLOAT)
        prof = build_profile(setup, WeightParams(3.0, 5.0, FLOAT))
        assert abs(theta(prof, -1.0)) <= 1e-6

    def test_derivative_order(self):
        prof = canonical_profile(negative_scal(1, 1), WeightParams.build(5, 6))
        with pytest.raises(PreconditionError):
            theta(prof, HALF, derivative=2)


class TestPositivity:
    def test_positive(self):
        assert positivity(em_profile(2)).status is PositivityStatus.POSITIVE

    def test_negative_with_witness(self):
        verdict = positivity(em_profile(-200))
        assert verdict.status is PositivityStatus.NEGATIVE_SOMEWHERE
        assert verdict.witness_F < 0

    def test_negative_float(self):
        s1 = Fraction(-200)
        setup = negative_scal(float(s1), float(em_curvature(s1)), ctx=FLOAT)
        verdict = positivity(build_profile(setup, WeightParams(5.0, 6.0, FLOAT)))
        assert verdict.status is PositivityStatus.NEGATIVE_SOMEWHERE
        assert verdict.method == "numeric"

    def test_rational_interior_zero(self):
        one = Fraction(1)
        theta_poly = Poly([one, 0, -one]) * Poly([0, 0, one])
        prof = profile_from_theta(negative_scal(1, 1), WeightParams.build(5, 6), theta_poly)
        verdict = positivity(prof)
        assert verdict.status is PositivityStatus.NONNEGATIVE_WITH_ZERO
        assert [(z.z, z.multiplicity, z.rational) for z in verdict.interior_zeros] == [(0.0, 2, True)]

    def test_irrational_interior_zeros(self):
        one = Fraction(1)
        theta_poly = Poly([one, 0, -one]) * Poly([-one, 0, 2 * one]) ** 2
        prof = profile_from_theta(negative_scal(1, 1), WeightParams.build(5, 6), theta_poly)
        verdict = positivity(prof)
        assert verdict.status is PositivityStatus.NONNEGATIVE_WITH_ZERO
        assert len(verdict.interior_zeros) == 2
        assert all(not z.rational and z.multiplicity == 2 for z in verdict.interior_zeros)
        assert abs(verdict.interior_zeros[1].z - 2 ** -0.5) <= 1e-10

    def test_clustered_simple_roots(self):
        one = Fraction(1)
        delta = Fraction(2, 10 ** 22)
        theta_poly = Poly([one, 0, -one]) * Poly([one / 9 - delta, -2 * one / 3, one])
        verdict = positivity(profile_from_theta(negative_scal(1, 1), WeightParams.build(5, 6), theta_poly))
        assert verdict.status is PositivityStatus.NEGATIVE_SOMEWHERE
        assert verdict.witness_F < 0
        assert abs(verdict.witness_z - one / 3) < Fraction(15, 10 ** 12)

    def test_odd_multiplicity_is_negative(self):
        one = Fraction(1)
        theta_poly = Poly([one, 0, -one]) * Poly([-one / 2, one]) ** 3
        verdict = positivity(profile_from_theta(negative_scal(1, 1), WeightParams.build(5, 6), theta_poly))
        assert verdict.status is PositivityStatus.NEGATIVE_SOMEWHERE
        assert verdict.witness_z < one / 2 and verdict.witness_F < 0

    def test_to_dict(self):
        data = positivity(em_profile(-200)).to_dict()
        assert data["status"] == "negative-somewhere"
        assert data["method"] == "exact"
