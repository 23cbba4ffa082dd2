from fractions import Fraction

import pytest
from hypothesis import settings

from admwex.core import EXACT, WeightParams
from admwex.presets import negative_scal

settings.register_profile("admwex", derandomize=True, deadline=None)
settings.load_profile("admwex")


def em_curvature(s1: Fraction) -> Fraction:
    """s2 making A1 vanish for x = (1/2, 1/3), a = 5, p = 6."""
    return 2 * (2251 * s1 - 4920) / Fraction(1203)


@pytest.fixture
def negative_scal_em():
    """Two curve blocks at the Einstein–Maxwell point s1 = 2, s2 = -836/1203."""
    setup = negative_scal(2, em_curvature(Fraction(2)))
    return setup, WeightParams.build(5, 6, EXACT)


@pytest.fixture
def job_toml():
    def make(body: str) -> str:
        return "schema_version = 1\n" + body
    return make
