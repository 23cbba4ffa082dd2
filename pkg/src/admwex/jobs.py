"""
Job configuration: a TOML file validated into pydantic models.

Scalars may be written as integers, floats or "p/q" strings; unknown keys are
rejected at every level.
"""

import hashlib
import json
import logging

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib
from fractions import Fraction
from itertools import product
from pathlib import Path
from typing import Any, Dict, List, Literal, Optional, Tuple, Union

from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator, model_validator

from .core import EXACT, FLOAT, AdmissibleSetup, Mode, NumericContext, WeightParams, parse_fraction
from .errors import AdmwexError, ConfigError
from .presets import build_preset
from .stability import DF_SAMPLE_POINTS, enforce_vanishing_futaki

logger = logging.getLogger(__name__)

SCHEMA_VERSION = 1

ScalarInput = Union[int, float, str]


def _check_scalar(value: ScalarInput) -> ScalarInput:
    try:
        parse_fraction(value)
    except AdmwexError as e:
        raise ValueError(str(e))
    return value


class _Strict(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True)


class BlockConfig(_Strict):
    x: ScalarInput
    d: int = Field(ge=1)
    s: ScalarInput

    @field_validator("x", "s")
    @classmethod
    def _scalars(cls, value: ScalarInput) -> ScalarInput:
        return _check_scalar(value)


class SetupConfig(_Strict):
    """Either a named preset with its arguments, or explicit blocks."""

    preset: Optional[str] = None
    preset_args: Dict[str, ScalarInput] = Field(default_factory=dict)
    d0: int = Field(default=0, ge=0)
    dinf: int = Field(default=0, ge=0)
    blocks: List[BlockConfig] = Field(default_factory=list)

    @model_validator(mode="after")
    def _preset_or_blocks(self) -> "SetupConfig":
        if self.preset is None and not self.blocks:
            raise ValueError("setup needs either 'preset' or at least one block")
        if self.preset is not None and self.blocks:
            raise ValueError("setup takes 'preset' or 'blocks', not both")
        return self


class WeightConfig(_Strict):
    a: Optional[ScalarInput] = None
    p: Optional[ScalarInput] = None
    solve_s_for_block: Optional[int] = Field(default=None, ge=0)

    @field_validator("a")
    @classmethod
    def _a_above_one(cls, value: Optional[ScalarInput]) -> Optional[ScalarInput]:
        if value is not None and not parse_fraction(_check_scalar(value)) > 1:
            raise ValueError(f"weight parameter a must exceed 1, got {value}")
        return value

    @field_validator("p")
    @classmethod
    def _p_scalar(cls, value: Optional[ScalarInput]) -> Optional[ScalarInput]:
        return value if value is None else _check_scalar(value)


class SolveConfig(_Strict):
    theta_samples: int = Field(default=21, ge=2)
    csv_samples: int = Field(default=201, ge=2)


class StabilityConfig(_Strict):
    zetas: List[ScalarInput] = Field(default_factory=lambda: list(DF_SAMPLE_POINTS))
    csv_samples: int = Field(default=199, ge=2)


class EinsteinConfig(_Strict):
    m: int = Field(ge=2)
    s: ScalarInput


class EmSearchConfig(_Strict):
    a_max: ScalarInput = 1000
    p: Optional[ScalarInput] = None
    both_signs: bool = False
    cross_checks: List[Literal["hirzebruch", "hodge4", "koiso-sakane", "discriminant", "yamabe"]] = Field(
        default_factory=list)
    conformally_einstein: Optional[EinsteinConfig] = None


class YamabeConfig(_Strict):
    t_min: float = 1.01
    t_max: float = 20.0
    samples: int = Field(default=200, ge=3)
    base_volumes: Optional[List[float]] = None

    @model_validator(mode="after")
    def _range(self) -> "YamabeConfig":
        if not 1 < self.t_min < self.t_max:
            raise ValueError("yamabe needs 1 < t_min < t_max")
        return self


class OrthotoricConfig(_Strict):
    m_values: List[int] = Field(default_factory=lambda: [2, 3, 4, 5])
    families: List[Literal["general", "basic", "inverse"]] = Field(
        default_factory=lambda: ["general", "basic", "inverse"])
    specs: List[str] = Field(default_factory=lambda: ["flat-m2-p5", "sigma-m-csck", "bochner-flat-m3",
                                                      "perturbed-flat-m2"])
    trials: int = Field(default=25, ge=1)


class MabuchiConfig(_Strict):
    """Perturbations Θ_ε = 1/(1/Θ_ref + ε v'') with v = (1-z²)² Σ b_k z^k."""

    coeffs: List[float] = Field(default_factory=lambda: [1.0])
    eps: List[float] = Field(default_factory=lambda: [-0.02, -0.01, 0.0, 0.01, 0.02])
    gradient_check: bool = True
    step: float = Field(default=1e-5, gt=0)


class GridAxis(_Strict):
    start: ScalarInput
    stop: ScalarInput
    num: int = Field(ge=1)

    def values(self) -> List[Fraction]:
        start, stop = parse_fraction(self.start), parse_fraction(self.stop)
        if self.num == 1:
            return [start]
        return [start + (stop - start) * k / (self.num - 1) for k in range(self.num)]


class SweepConfig(_Strict):
    """
    Grid over the block parameters x_a; each line [c0, c1, ..., c_n] in
    ``exclude`` drops the cells with c0 + Σ c_a x_a = 0.
    """

    axes: List[GridAxis]
    exclude: List[List[ScalarInput]] = Field(default_factory=list)
    a_max: ScalarInput = 1000
    p: Optional[ScalarInput] = None
    both_signs: bool = True

    def cells(self) -> List[Tuple[Fraction, ...]]:
        lines = [[parse_fraction(c) for c in line] for line in self.exclude]
        out = []
        for cell in product(*(axis.values() for axis in self.axes)):
            if any(line[0] + sum(c * x for c, x in zip(line[1:], cell)) == 0 for line in lines):
                continue
            out.append(cell)
        return out


class JobConfig(_Strict):
    schema_version: Literal[1] = SCHEMA_VERSION
    mode: Mode = Mode.EXACT
    seed: int = Field(default=0, ge=0)
    tolerance: float = Field(default=1e-10, gt=0)
    setup: Optional[SetupConfig] = None
    weight: WeightConfig = Field(default_factory=WeightConfig)
    solve: SolveConfig = Field(default_factory=SolveConfig)
    stability: StabilityConfig = Field(default_factory=StabilityConfig)
    em_search: EmSearchConfig = Field(default_factory=EmSearchConfig)
    yamabe: YamabeConfig = Field(default_factory=YamabeConfig)
    orthotoric: OrthotoricConfig = Field(default_factory=OrthotoricConfig)
    mabuchi: MabuchiConfig = Field(default_factory=MabuchiConfig)
    sweep: Optional[SweepConfig] = None

    @property
    def ctx(self) -> NumericContext:
        return EXACT if self.mode is Mode.EXACT else FLOAT

    def with_overrides(self, mode: Optional[str] = None, seed: Optional[int] = None,
                       tolerance: Optional[float] = None) -> "JobConfig":
        """Apply command-line overrides and validate the result again."""
        data = self.model_dump(mode="json")
        if mode is not None:
            data["mode"] = mode
        if seed is not None:
            data["seed"] = seed
        if tolerance is not None:
            data["tolerance"] = tolerance
        return parse_job_dict(data)

    def config_hash(self) -> str:
        """sha256 of the canonical JSON form of the validated config."""
        canonical = json.dumps(self.model_dump(mode="json"), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(canonical.encode("utf-8")).hexdigest()


def _format_validation_error(e: ValidationError) -> str:
    parts = []
    for err in e.errors():
        location = ".".join(str(v) for v in err["loc"]) or "<root>"
        parts.append(f"{location}: {err['msg']}")
    return "; ".join(parts)


def parse_job_dict(data: Dict[str, Any]) -> JobConfig:
    try:
        return JobConfig.model_validate(data)
    except ValidationError as e:
        raise ConfigError(f"Invalid job config: {_format_validation_error(e)}")


def parse_job(text: str) -> JobConfig:
    """
    Parse a TOML job config from a string.

    Raises:
        ConfigError: malformed TOML, unknown keys or invalid values
    """
    try:
        data = tomllib.loads(text)
    except tomllib.TOMLDecodeError as e:
        raise ConfigError(f"Malformed TOML: {str(e)}")
    return parse_job_dict(data)


def load_job(path: Union[str, Path]) -> JobConfig:
    path = Path(path)
    logger.info(f"Loading job config from {path}")
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as e:
        raise ConfigError(f"Cannot read config {path}: {str(e)}")
    return parse_job(text)


def build_setup(job: JobConfig) -> AdmissibleSetup:
    """
    The admissible setup described by the [setup] table, in the job's mode.

    Raises:
        ConfigError: the table is missing or describes an invalid setup
    """
    if job.setup is None:
        raise ConfigError("This command needs a [setup] table")
    ctx = job.ctx
    config = job.setup
    try:
        if config.preset is not None:
            return build_preset(config.preset, dict(config.preset_args), ctx)
        return AdmissibleSetup.build([(b.x, b.d, b.s) for b in config.blocks], d0=config.d0,
                                     dinf=config.dinf, ctx=ctx)
    except ConfigError:
        raise
    except AdmwexError as e:
        raise ConfigError(f"Invalid setup: {str(e)}")


def build_weight(job: JobConfig, setup: AdmissibleSetup) -> Tuple[AdmissibleSetup, WeightParams]:
    """
    Weight parameters from the [weight] table; p defaults to 2m.

    When ``solve_s_for_block`` is set, that block's curvature is replaced so
    that the weighted Futaki invariant vanishes.
    """
    if job.weight.a is None:
        raise ConfigError("This command needs weight.a")
    p = job.weight.p if job.weight.p is not None else 2 * setup.m
    try:
        w = WeightParams.build(job.weight.a, p, job.ctx)
    except AdmwexError as e:
        raise ConfigError(f"Invalid weight: {str(e)}")
    if job.weight.solve_s_for_block is not None:
        setup = enforce_vanishing_futaki(setup, w, job.weight.solve_s_for_block)
    return setup, w
