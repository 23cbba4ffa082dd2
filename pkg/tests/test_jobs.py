from fractions import Fraction
from pathlib import Path

import pytest

from admwex.core import Mode
from admwex.errors import ConfigError
from admwex.jobs import GridAxis, build_setup, build_weight, load_job, parse_job
from admwex.moments import solve_extremal_constants

EXAMPLES = Path(__file__).resolve().parent.parent / "config" / "examples"

NEGATIVE_SCAL = """
[setup]
preset = "negative-scal"
preset_args = { s1 = 2, s2 = 0 }

[weight]
a = 5
p = 6
solve_s_for_block = 1
"""


class TestParsing:
    def test_defaults(self, job_toml):
        job = parse_job(job_toml(""))
        assert job.mode is Mode.EXACT
        assert job.seed == 0
        assert job.tolerance == 1e-10
        assert job.setup is None
        assert job.orthotoric.m_values == [2, 3, 4, 5]
        assert job.stability.zetas == ["-9/10", "-1/2", "0", "1/2", "9/10"]

    def test_explicit_blocks(self, job_toml):
        job = parse_job(job_toml("""
mode = "float"
[setup]
dinf = 1
blocks = [{ x = "1/2", d = 1, s = 2 }, { x = -0.25, d = 2, s = "-3/2" }]
"""))
        setup = build_setup(job)
        assert setup.m == 5
        assert setup.blocks[1].x == -0.25
        assert not setup.ctx.exact

    @pytest.mark.parametrize("body", [
        "colour = 3",
        "[setup]\npreset = \"hirzebruch\"\npreset_args = { x = \"1/2\" }\nwobble = 1",
        "[weight]\na = 1",
        "[weight]\na = \"1/2\"",
        "[weight]\na = \"three\"",
        "[setup]\npreset = \"hirzebruch\"\nblocks = [{ x = \"1/2\", d = 1, s = 2 }]",
        "[setup]\nd0 = 1",
        "[yamabe]\nt_min = 3.0\nt_max = 2.0",
        "[orthotoric]\ntrials = 0",
        "mode = \"interval\"",
    ])
    def test_invalid_configs(self, job_toml, body):
        with pytest.raises(ConfigError):
            parse_job(job_toml(body))

    def test_schema_version_is_required_to_match(self):
        with pytest.raises(ConfigError):
            parse_job("schema_version = 2\n")

    def test_malformed_toml(self):
        with pytest.raises(ConfigError) as info:
            parse_job("schema_version = = 1")
        assert "Malformed TOML" in str(info.value)

    def test_missing_file(self, tmp_path):
        with pytest.raises(ConfigError):
            load_job(tmp_path / "missing.toml")

    def test_unknown_preset(self, job_toml):
        job = parse_job(job_toml("[setup]\npreset = \"k3\""))
        with pytest.raises(ConfigError):
            build_setup(job)

    def test_bad_preset_arguments(self, job_toml):
        job = parse_job(job_toml("[setup]\npreset = \"hirzebruch\"\npreset_args = { y = 2 }"))
        with pytest.raises(ConfigError):
            build_setup(job)

    @pytest.mark.parametrize("path", sorted(EXAMPLES.glob("*.toml")), ids=lambda p: p.stem)
    def test_bundled_examples_parse(self, path):
        job = load_job(path)
        assert job.schema_version == 1
        if job.setup is not None:
            build_setup(job)


class TestOverridesAndHash:
    def test_hash_is_deterministic(self, job_toml):
        first = parse_job(job_toml(NEGATIVE_SCAL))
        second = parse_job(job_toml(NEGATIVE_SCAL))
        assert first.config_hash() == second.config_hash()
        assert len(first.config_hash()) == 64

    def test_overrides(self, job_toml):
        job = parse_job(job_toml(NEGATIVE_SCAL))
        overridden = job.with_overrides(mode="float", seed=7, tolerance=1e-6)
        assert overridden.mode is Mode.FLOAT
        assert (overridden.seed, overridden.tolerance) == (7, 1e-6)
        assert overridden.config_hash() != job.config_hash()
        assert job.with_overrides().config_hash() == job.config_hash()
        with pytest.raises(ConfigError):
            job.with_overrides(mode="interval")


class TestWeight:
    def test_solve_curvature_for_vanishing_futaki(self, job_toml):
        job = parse_job(job_toml(NEGATIVE_SCAL))
        setup, w = build_weight(job, build_setup(job))
        assert setup.blocks[1].s == Fraction(-836, 1203)
        assert solve_extremal_constants(setup, w).A1 == 0

    def test_p_defaults_to_twice_m(self, job_toml):
        job = parse_job(job_toml("[setup]\npreset = \"hodge4\"\npreset_args = { x = \"1/2\", s = 3 }\n"
                                 "[weight]\na = 4"))
        _, w = build_weight(job, build_setup(job))
        assert w.p == 6

    def test_weight_required(self, job_toml):
        job = parse_job(job_toml("[setup]\npreset = \"hirzebruch\"\npreset_args = { x = \"1/2\" }"))
        with pytest.raises(ConfigError):
            build_weight(job, build_setup(job))

    def test_setup_required(self, job_toml):
        with pytest.raises(ConfigError):
            build_setup(parse_job(job_toml("")))


class TestSweepGrid:
    def test_axis_values(self):
        assert GridAxis(start="1/4", stop="3/4", num=3).values() == [Fraction(1, 4), Fraction(1, 2), Fraction(3, 4)]
        assert GridAxis(start=2, stop=5, num=1).values() == [Fraction(2)]

    def test_bundled_sweep_has_324_cells(self):
        job = load_job(EXAMPLES / "o11-sweep.toml")
        cells = job.sweep.cells()
        assert len(cells) == 324
        assert all(x1 + x2 != 0 and x1 - x2 != 1 for x1, x2 in cells)

    def test_exclusion_lines(self, job_toml):
        job = parse_job(job_toml("""
[setup]
preset = "koiso-sakane"
preset_args = { x1 = "1/2", x2 = "-1/4" }
[sweep]
axes = [{ start = "1/4", stop = "3/4", num = 3 }, { start = "-3/4", stop = "-1/4", num = 3 }]
exclude = [[0, 1, 1], [-1, 1, -1]]
"""))
        assert job.sweep.cells() == [
            (Fraction(1, 4), Fraction(-1, 2)),
            (Fraction(1, 2), Fraction(-3, 4)),
            (Fraction(1, 2), Fraction(-1, 4)),
            (Fraction(3, 4), Fraction(-1, 2)),
        ]
