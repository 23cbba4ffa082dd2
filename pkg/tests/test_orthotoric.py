from fractions import Fraction

import numpy as np
import pytest

from admwex.errors import PreconditionError
from admwex.orthotoric import (BUNDLED_SPECS, EvalPoint, bochner_flat_spec, bundled_spec, check_spec,
                               check_vandermonde, flat_case_coefficients, flat_case_is_csck, flat_spec,
                               fp_ext_residual, negative_control_spec, sigma, sigma_hat, sigma_m_csck_check,
                               sigma_m_spec, vandermonde_sides)


class TestSymmetricFunctions:
    def test_sigma_values(self):
        pt = EvalPoint((1, 2, 3))
        assert [sigma(pt, r) for r in range(5)] == [1, 6, 11, 6, 0]
        assert sigma(pt, -1) == 0
        assert sigma_hat(pt, 1, 0) == 5
        assert sigma_hat(pt, 2, 1) == 3
        assert pt.delta(0) == 2
        assert pt.delta(1) == -1

    def test_eval_point_validation(self):
        with pytest.raises(PreconditionError):
            EvalPoint((1, 1, 2))
        with pytest.raises(PreconditionError):
            EvalPoint((0, 1))

    def test_small_cases(self):
        pt = EvalPoint((Fraction(1), Fraction(2)))
        assert vandermonde_sides(pt, "basic") == (3, 3)
        assert vandermonde_sides(pt, "inverse") == (Fraction(-3, 4), Fraction(-3, 4))
        with pytest.raises(PreconditionError):
            vandermonde_sides(pt, "cauchy")


class TestVandermonde:
    @pytest.mark.parametrize("m", [2, 3, 4, 5])
    @pytest.mark.parametrize("family", ["general", "basic", "inverse"])
    def test_identities_hold(self, m, family):
        report = check_vandermonde(m, family, 25, np.random.default_rng(m))
        assert report.passed
        assert report.to_dict()["trials"] == 25

    def test_preconditions(self):
        with pytest.raises(PreconditionError):
            check_vandermonde(1, "basic", 5)
        with pytest.raises(PreconditionError):
            check_vandermonde(3, "basic", 0)
        with pytest.raises(PreconditionError):
            check_vandermonde(3, "cauchy", 5)


class TestFlatCase:
    @pytest.mark.parametrize("m", [2, 3, 4])
    @pytest.mark.parametrize("p", [3, 5, 7])
    def test_residual_coefficients(self, m, p):
        c = [Fraction(3, 2), Fraction(-2), Fraction(1, 3), Fraction(4)][:m + 1]
        a0, a1 = Fraction(-1, 2), Fraction(3)
        fit = check_spec(flat_spec(m, p, a0, a1, c), 10, np.random.default_rng(p))
        b0, b1 = flat_case_coefficients(m, Fraction(p), a0, a1, c)
        assert fit.is_affine
        assert fit.coeffs == (b0, b1) + (0,) * (m - 1)

    @pytest.mark.parametrize("m", [2, 3])
    def test_csck_criterion(self, m):
        c = [Fraction(1), Fraction(2), Fraction(-1)]
        assert flat_case_is_csck(m, Fraction(2 * m), Fraction(1), Fraction(1), c)
        assert flat_case_is_csck(m, Fraction(1), Fraction(1), Fraction(1), c)
        assert flat_case_is_csck(m, Fraction(5), Fraction(1), Fraction(1), [Fraction(0)] + c[1:])
        assert not flat_case_is_csck(m, Fraction(2 * m + 1), Fraction(1), Fraction(1), c)

    def test_degree_bound(self):
        with pytest.raises(PreconditionError):
            flat_spec(2, 5, 1, 1, (1, 2, 3, 4))


class TestSigmaM:
    @pytest.mark.parametrize("m,P,singular,csck", [
        (2, (0, 0, 1), (), True),
        (2, (0, 0, 3), ((1, 2), (-3, "1/2")), True),
        (2, (1, 0, 1), (), False),
        (2, (0, 2, 1), ((1, 1), (2, -1)), False),
        (2, (5, -1, 0), (), False),
        (3, (0, 0, 1, 2), (), True),
        (3, (0, 0, -2, 1), ((1, 0), (0, 1), (-1, 3)), True),
        (3, (1, 1, 1, 1), (), False),
        (3, (0, 4, 0, 1), ((2, 2), (1, -1), (0, 5)), False),
        (3, ("1/2", 0, 0, 0), (), False),
    ])
    def test_csck_iff_low_coefficients_vanish(self, m, P, singular, csck):
        spec = sigma_m_spec(m, 6, P, singular=singular)
        assert sigma_m_csck_check(spec, trials=10, rng=np.random.default_rng(7)) is csck

    def test_p_range(self):
        with pytest.raises(PreconditionError):
            sigma_m_spec(2, 3, (0, 0, 1))
        with pytest.raises(PreconditionError):
            sigma_m_spec(2, 6, (0, 0, 0, 1))

    def test_requires_sigma_m_potential(self):
        with pytest.raises(PreconditionError):
            sigma_m_csck_check(flat_spec(2, 6, 0, 1, (1, 2, 3)))


class TestSpecs:
    def test_negative_control_is_not_extremal(self):
        fit = check_spec(negative_control_spec(), 10)
        assert not fit.is_affine
        assert fit.to_dict()["failure"] is not None

    @pytest.mark.parametrize("m", [2, 3, 4])
    def test_bochner_flat_is_extremal(self, m):
        assert check_spec(bochner_flat_spec(m, np.random.default_rng(m)), 10).is_affine

    @pytest.mark.parametrize("name", sorted(BUNDLED_SPECS))
    def test_bundled(self, name):
        bundled = bundled_spec(name)
        fit = check_spec(bundled.spec, 10)
        assert fit.is_affine is bundled.expect_affine
        if bundled.expected_coeffs is not None:
            assert fit.coeffs == bundled.expected_coeffs
        if bundled.csck is not None:
            assert sigma_m_csck_check(bundled.spec, trials=10) is bundled.csck

    def test_unknown_bundle(self):
        with pytest.raises(PreconditionError):
            bundled_spec("kerr")

    def test_point_dimension_must_match(self):
        with pytest.raises(PreconditionError):
            fp_ext_residual(negative_control_spec(), EvalPoint((1, 2, 3)))
