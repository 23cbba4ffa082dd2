"""
Named admissible setups used by the bundled configs and the tests.
"""

import logging
from typing import Any, Callable, Dict

from .core import EXACT, AdmissibleSetup, NumericContext
from .errors import ConfigError

logger = logging.getLogger(__name__)


def hirzebruch(x: Any, ctx: NumericContext = EXACT) -> AdmissibleSetup:
    """P(O ⊕ O(1)) over CP^1: one block of dimension 1 with s = 2."""
    return AdmissibleSetup.build([(x, 1, 2)], ctx=ctx)


def ruled_surface(x: Any, s: Any, ctx: NumericContext = EXACT) -> AdmissibleSetup:
    """Ruled surface over a curve whose metric has normalized curvature s."""
    return AdmissibleSetup.build([(x, 1, s)], ctx=ctx)


def hodge4(x: Any, s: Any, ctx: NumericContext = EXACT) -> AdmissibleSetup:
    """Bundle over a 4-dimensional Hodge base: one block of dimension 2."""
    return AdmissibleSetup.build([(x, 2, s)], ctx=ctx)


def koiso_sakane(x1: Any, x2: Any, ctx: NumericContext = EXACT) -> AdmissibleSetup:
    """P(O ⊕ O(1, -1)) over CP^1 × CP^1, with 0 < x1 < 1 and -1 < x2 < 0."""
    return AdmissibleSetup.build([(x1, 1, 2), (x2, 1, -2)], ctx=ctx)


def negative_scal(s1: Any, s2: Any, ctx: NumericContext = EXACT) -> AdmissibleSetup:
    """Two curve blocks with x = (1/2, 1/3) and free curvatures (s1, s2)."""
    return AdmissibleSetup.build([("1/2", 1, s1), ("1/3", 1, s2)], ctx=ctx)


PRESETS: Dict[str, Callable[..., AdmissibleSetup]] = {
    "hirzebruch": hirzebruch,
    "ruled-surface": ruled_surface,
    "hodge4": hodge4,
    "koiso-sakane": koiso_sakane,
    "negative-scal": negative_scal,
}


def build_preset(name: str, args: Dict[str, Any], ctx: NumericContext = EXACT) -> AdmissibleSetup:
    """
    Build a named setup from keyword arguments.

    Raises:
        ConfigError: unknown preset name or wrong arguments
    """
    factory = PRESETS.get(name)
    if factory is None:
        raise ConfigError(f"Unknown preset {name!r}; available: {', '.join(sorted(PRESETS))}")
    try:
        setup = factory(ctx=ctx, **args)
    except TypeError as e:
        raise ConfigError(f"Bad arguments for preset {name!r}: {str(e)}")
    logger.debug(f"Preset {name} -> {setup.describe()}")
    return setup
