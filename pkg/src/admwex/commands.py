"""
Command implementations shared by the CLI and the MCP server.

Each command takes a validated JobConfig and returns a CommandResult holding
the report payload, the exit code and any CSV curves.
"""

import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np

from .core import FLOAT, AdmissibleSetup, WeightParams, parse_fraction
from .einstein_maxwell import (a1_as_function_of_a, aubin_schoen_bound, classify_critical_point,
                               conformally_einstein_profile, double_root_discriminant, find_em_parameters,
                               hirzebruch_closed_forms, hodge4_a1_factor, hodge4_a1_identity, hodge4_q_at_a0,
                               koiso_sakane_q, normalized_yamabe, profile_coincidences, yamabe_closed_form,
                               yamabe_critical_points)
from .errors import (EXIT_INCONCLUSIVE, EXIT_NEGATIVE, EXIT_OK, AdmwexError, ConfigError,
                     InternalInconsistencyError)
from .jobs import JobConfig, build_setup, build_weight
from .moments import extremal_constants_in_a
from .orthotoric import bundled_spec, check_spec, check_vandermonde, sigma_m_csck_check
from .profile import (PositivityStatus, build_profile, canonical_profile, ode_residual, positivity, theta,
                      weighted_scalar_curvature)
from .settings import Settings, load_settings
from .stability import (bump_direction, df_admissible, extremal_report, mabuchi_energy, mabuchi_finite_difference,
                        mabuchi_gradient, perturbed_theta, stability_verdict)

logger = logging.getLogger(__name__)

ROOT_MATCH_TOL = 1e-8


@dataclass
class Curve:
    header: Tuple[str, ...]
    rows: List[Tuple[Any, ...]]


@dataclass
class CommandResult:
    command: str
    payload: Dict[str, Any]
    exit_code: int = EXIT_OK
    curves: Dict[str, Curve] = field(default_factory=dict)


def _grid(n: int, exact: bool, interior: bool = False) -> List[Any]:
    """n points on [-1, 1], or strictly inside it when ``interior`` is set."""
    if interior:
        points = [Fraction(2 * k, n + 1) - 1 for k in range(1, n + 1)]
    else:
        points = [Fraction(2 * k, n - 1) - 1 for k in range(n)]
    return points if exact else [float(v) for v in points]


def _weight_dict(w: WeightParams) -> Dict[str, Any]:
    return {"a": w.a, "p": w.p}


def cmd_solve(job: JobConfig) -> CommandResult:
    """
    Build the extremal profile and report constants, residuals, positivity and Θ samples.

    Exit code 0 when F ≥ 0 on (-1, 1), 2 when F is negative somewhere and 3
    when positivity is inconclusive.
    """
    setup = build_setup(job)
    setup, w = build_weight(job, setup)
    rep = extremal_report(setup, w)
    prof = rep.profile
    exact = setup.ctx.exact

    samples = [{"z": z, "Theta": theta(prof, z)} for z in _grid(job.solve.theta_samples, exact)]
    payload: Dict[str, Any] = {
        "setup": setup.describe(),
        "weight": _weight_dict(w),
        "A1": rep.constants.A1,
        "A2": rep.constants.A2,
        "futaki_vanishes": rep.futaki_vanishes,
        "profile": prof.description,
        "endpoint_residuals": rep.residuals,
        "ode_residual": ode_residual(prof, rep.constants),
        "positivity": rep.positivity,
        "theta_samples": samples,
    }
    if prof.condition_estimate is not None:
        payload["condition_estimate"] = prof.condition_estimate
    if prof.poly_form is not None:
        payload["poly_form"] = {"numerator": list(prof.poly_form.numerator.coeffs),
                                "exponent": prof.poly_form.exponent}

    rows = []
    for z in _grid(job.solve.csv_samples, exact):
        F = prof.F(z)
        rows.append((float(z), float(F), float(theta(prof, z)), float(weighted_scalar_curvature(prof, z))))
    status = rep.positivity.status
    exit_code = {
        PositivityStatus.NEGATIVE_SOMEWHERE: EXIT_NEGATIVE,
        PositivityStatus.INCONCLUSIVE: EXIT_INCONCLUSIVE,
    }.get(status, EXIT_OK)
    logger.info(f"solve: A1={rep.constants.A1}, A2={rep.constants.A2}, positivity={status.value}")
    return CommandResult("solve", payload, exit_code, {"profile": Curve(("z", "F", "Theta", "Scal_w"), rows)})


def cmd_stability(job: JobConfig) -> CommandResult:
    setup = build_setup(job)
    setup, w = build_weight(job, setup)
    prof = build_profile(setup, w)
    report = stability_verdict(setup, w, job.stability.zetas, profile=prof)
    rows = [(float(z), float(df_admissible(setup, w, z, profile=prof, relative=not report.futaki_vanishes)))
            for z in _grid(job.stability.csv_samples, setup.ctx.exact, interior=True)]
    payload = {"setup": setup.describe(), "weight": _weight_dict(w), **report.to_dict()}
    return CommandResult("stability", payload, EXIT_OK, {"df": Curve(("zeta", "DF"), rows)})


def _matches(values: Sequence[float], targets: Sequence[float]) -> bool:
    if len(values) != len(targets):
        return False
    return all(abs(v - t) <= ROOT_MATCH_TOL * max(1.0, abs(t)) for v, t in zip(sorted(values), sorted(targets)))


def _a1_limit_vanishes(setup: AdmissibleSetup, p: Any) -> Optional[bool]:
    """Whether A1(a)/a² → 0 as a → ∞, i.e. the unweighted Futaki invariant vanishes."""
    _, rational = a1_as_function_of_a(setup, p)
    if rational is None:
        return None
    return rational.num.is_zero() or rational.num.degree < rational.den.degree + 2


def _cross_checks(job: JobConfig, setup: AdmissibleSetup, p: Any, roots: List[float]) -> Dict[str, Any]:
    checks: Dict[str, Any] = {}
    blocks = setup.blocks
    single_curve = len(blocks) == 1 and blocks[0].d == 1 and not setup.d0 and not setup.dinf
    rng = np.random.default_rng(job.seed)
    for name in job.em_search.cross_checks:
        if name == "hirzebruch":
            if not (single_curve and blocks[0].s == 2 and p == 4):
                raise ConfigError("hirzebruch cross-check needs a single curve block with s = 2 and p = 4")
            a0, a_plus, a_minus = hirzebruch_closed_forms(blocks[0].x)
            expected = sorted({float(v) for v in (a0, a_plus, a_minus) if v is not None})
            checks[name] = {"a0": a0, "a_plus": a_plus, "a_minus": a_minus,
                            "matched": _matches(sorted({r for r in roots if r > 1}), expected)}
        elif name == "hodge4":
            if not (len(blocks) == 1 and blocks[0].d == 2 and p == 6):
                raise ConfigError("hodge4 cross-check needs a single block of dimension 2 and p = 6")
            x, s = blocks[0].x, blocks[0].s
            factorization: Dict[str, Any] = {}
            if setup.ctx.exact:
                c = hodge4_a1_factor(x, s)
                numerator = extremal_constants_in_a(setup, 6)[0].num
                samples = []
                for _ in range(5):
                    a = Fraction(int(rng.integers(11, 400)), int(rng.integers(1, 10)))
                    if a <= 1:
                        continue
                    holds = c is not None and numerator(a) == c * hodge4_a1_identity(a, x, s)
                    samples.append({"a": a, "holds": holds})
                factorization = {"constant": c, "holds": c is not None, "samples": samples}
            a0 = hirzebruch_closed_forms(x)[0]
            checks[name] = {"a0": a0, "q_at_a0": hodge4_q_at_a0(x, s), "factorization": factorization,
                            "a0_is_root": any(abs(r - float(a0)) <= ROOT_MATCH_TOL * float(a0) for r in roots)}
        elif name == "koiso-sakane":
            if len(blocks) != 2:
                raise ConfigError("koiso-sakane cross-check needs two blocks")
            x1, x2 = blocks[0].x, blocks[1].x
            scale = max(abs(float(koiso_sakane_q(x1, x2, 1))), 1.0)
            checks[name] = {
                "q_at_plus_one": koiso_sakane_q(x1, x2, 1),
                "q_at_minus_one": koiso_sakane_q(x1, x2, -1),
                "q_at_roots": [float(koiso_sakane_q(float(x1), float(x2), r)) / scale for r in roots],
            }
        elif name == "discriminant":
            if not single_curve:
                raise ConfigError("discriminant cross-check needs a single curve block")
            checks[name] = {"D": double_root_discriminant(blocks[0].s, blocks[0].x)}
        elif name == "yamabe":
            checks[name] = [classify_critical_point(setup, r).__dict__ for r in roots if r > 1]
    return checks


def _einstein_search(job: JobConfig) -> CommandResult:
    config = job.em_search.conformally_einstein
    solution = conformally_einstein_profile(config.m, float(parse_fraction(config.s)))
    branches = []
    for branch in solution.branches:
        branches.append({
            "a": branch.a,
            "lambda_plus": branch.lambda_plus,
            "lambda_minus": branch.lambda_minus,
            "A1": branch.A1,
            "A2": branch.A2,
            "positivity": positivity(branch.profile),
        })
    payload = {
        "m": solution.m,
        "s": solution.s,
        "x_e": solution.x_e,
        "a_plus": solution.a_plus,
        "a_minus": solution.a_minus,
        "degenerate": solution.degenerate,
        "coincident_a": list(solution.coincident_a),
        "residual": solution.residual,
        "branches": branches,
    }
    return CommandResult("em-search", payload)


def cmd_em_search(job: JobConfig) -> CommandResult:
    """Roots of A1(a) with profiles, optional closed-form cross-checks, or the conformally Einstein solve."""
    if job.em_search.conformally_einstein is not None:
        return _einstein_search(job)
    setup = build_setup(job)
    p = job.em_search.p if job.em_search.p is not None else 2 * setup.m
    p = setup.ctx.coerce(p)
    solutions = find_em_parameters(setup, p, job.em_search.a_max, both_signs=job.em_search.both_signs)
    roots = [float(sol.a_root) for sol in solutions]
    payload: Dict[str, Any] = {
        "setup": setup.describe(),
        "p": p,
        "a_max": job.em_search.a_max,
        "roots": [sol.to_dict() for sol in solutions],
    }
    if not solutions:
        limit = _a1_limit_vanishes(setup, p)
        payload["note"] = "CSCK class" if limit else "no Einstein–Maxwell parameter in range"
    if len(solutions) > 1:
        payload["profile_coincidences"] = profile_coincidences(solutions)
    payload["cross_checks"] = _cross_checks(job, setup, p, roots)
    return CommandResult("em-search", payload)


def cmd_yamabe(job: JobConfig) -> CommandResult:
    """Sample f(t), locate and classify its critical points and compare them with the roots of A1."""
    setup = build_setup(job)
    config = job.yamabe
    m = setup.m
    ts = np.linspace(config.t_min, config.t_max, config.samples)
    rows = [(float(t), yamabe_closed_form(setup, t)) for t in ts]
    critical = yamabe_critical_points(setup, t_max=config.t_max)
    roots = [float(sol.a_root) for sol in find_em_parameters(setup, 2 * m, config.t_max)]
    crit_ts = [pt.t for pt in critical]

    normalized: Optional[List[float]] = None
    try:
        normalized = [normalized_yamabe(setup, t, config.base_volumes) for t in crit_ts]
    except AdmwexError as e:
        logger.warning(f"⚠️ Normalized Yamabe values unavailable: {str(e)}")

    payload: Dict[str, Any] = {
        "setup": setup.describe(),
        "critical_points": [pt.__dict__ for pt in critical],
        "a1_roots": roots,
        "critical_points_match_a1_roots": _matches(crit_ts, roots),
        "normalized_values": normalized,
    }
    if m == 2:
        bound = aubin_schoen_bound(2)
        payload["aubin_schoen_bound"] = bound
        if normalized is not None:
            payload["below_bound"] = [v < bound for v in normalized]
    return CommandResult("yamabe", payload, EXIT_OK, {"yamabe": Curve(("t", "f"), rows)})


def cmd_orthotoric(job: JobConfig) -> CommandResult:
    """
    Vandermonde self-tests and the bundled orthotoric specs.

    Raises:
        InternalInconsistencyError: an identity or an expected verdict fails
    """
    config = job.orthotoric
    rng = np.random.default_rng(job.seed)
    vandermonde = []
    for m in config.m_values:
        for family in config.families:
            report = check_vandermonde(m, family, config.trials, rng)
            vandermonde.append(report.to_dict())
            if not report.passed:
                raise InternalInconsistencyError(f"Vandermonde {family} identity failed for m={m}")

    specs = []
    for name in config.specs:
        bundled = bundled_spec(name)
        fit = check_spec(bundled.spec, config.trials, rng)
        entry: Dict[str, Any] = {"spec": bundled.spec.describe(), "fit": fit.to_dict()}
        if fit.is_affine != bundled.expect_affine:
            raise InternalInconsistencyError(f"Spec {name}: expected is_affine={bundled.expect_affine}")
        if bundled.expected_coeffs is not None and tuple(fit.coeffs) != tuple(bundled.expected_coeffs):
            raise InternalInconsistencyError(
                f"Spec {name}: fitted {fit.coeffs} differ from the closed form {bundled.expected_coeffs}")
        if bundled.csck is not None:
            entry["sigma_m_csck"] = sigma_m_csck_check(bundled.spec, config.trials, rng)
            if entry["sigma_m_csck"] != bundled.csck:
                raise InternalInconsistencyError(f"Spec {name}: expected CSCK={bundled.csck}")
        specs.append(entry)
    logger.info(f"✅ Orthotoric checks passed ({len(vandermonde)} Vandermonde runs, {len(specs)} specs)")
    return CommandResult("orthotoric", {"vandermonde": vandermonde, "specs": specs})


def cmd_mabuchi(job: JobConfig) -> CommandResult:
    """
    Mabuchi energy along Θ_ε = 1/(1/Θ_ref + ε v'') with the canonical reference Θ_ref = 1 - z².

    Raises:
        PositivityViolationError: a perturbation leaves the admissible profiles
    """
    setup = build_setup(job)
    setup, w = build_weight(job, setup)
    config = job.mabuchi
    fsetup = setup.in_mode(FLOAT) if setup.ctx.exact else setup
    fw = WeightParams(float(w.a), float(w.p), FLOAT)
    prof_ref = canonical_profile(fsetup, fw)
    extremal = build_profile(fsetup, fw)
    _, v2 = bump_direction(config.coeffs)

    def base(z):
        return float(theta(prof_ref, z))

    rows = []
    for eps in config.eps:
        value = mabuchi_energy(fsetup, fw, prof_ref, perturbed_theta(base, v2, eps), extremal=extremal,
                               description=f"eps={eps}").value
        rows.append((eps, value))
    payload: Dict[str, Any] = {
        "setup": setup.describe(),
        "weight": _weight_dict(w),
        "reference": prof_ref.description,
        "coeffs": config.coeffs,
        "values": [{"eps": eps, "M": value} for eps, value in rows],
    }
    if config.gradient_check:
        analytic = mabuchi_gradient(fsetup, fw, prof_ref, config.coeffs)
        numeric = mabuchi_finite_difference(fsetup, fw, prof_ref, config.coeffs, config.step)
        payload["gradient"] = {
            "analytic": analytic,
            "finite_difference": numeric,
            "relative_difference": abs(analytic - numeric) / max(abs(analytic), 1e-300),
        }
    return CommandResult("mabuchi", payload, EXIT_OK, {"mabuchi": Curve(("eps", "M"), rows)})


def sweep_cell(setup: AdmissibleSetup, p: Any, a_max: Any, both_signs: bool = True) -> Tuple[int, int]:
    """(number of roots, number of roots with a positive profile) for one cell."""
    solutions = find_em_parameters(setup, p, a_max, both_signs=both_signs)
    positive = sum(1 for sol in solutions if sol.positivity.status is PositivityStatus.POSITIVE)
    return len(solutions), positive


def _sweep_task(args: Tuple[AdmissibleSetup, Any, Any, bool]) -> Tuple[int, int]:
    return sweep_cell(*args)


def cmd_sweep(job: JobConfig, settings: Optional[Settings] = None) -> CommandResult:
    """
    Run the Einstein–Maxwell search on every cell of the [sweep] grid.

    Cells run in a process pool of ADMWEX_THREADS workers; rows keep the grid order.
    """
    if job.sweep is None:
        raise ConfigError("sweep needs a [sweep] table")
    settings = settings or load_settings()
    base = build_setup(job)
    config = job.sweep
    if len(config.axes) != len(base.blocks):
        raise ConfigError(f"sweep has {len(config.axes)} axes for {len(base.blocks)} blocks")
    p = base.ctx.coerce(config.p if config.p is not None else 2 * base.m)

    tasks = []
    cells = config.cells()
    for cell in cells:
        setup = base
        for index, x in enumerate(cell):
            setup = setup.with_block_x(index, base.ctx.coerce(x))
        tasks.append((setup, p, config.a_max, config.both_signs))

    logger.info(f"Sweeping {len(tasks)} cells with {settings.threads} worker(s)")
    if settings.threads > 1:
        with ProcessPoolExecutor(max_workers=settings.threads) as pool:
            results = list(pool.map(_sweep_task, tasks))
    else:
        results = [_sweep_task(task) for task in tasks]

    rows = [tuple(str(x) for x in cell) + result for cell, result in zip(cells, results)]
    header = tuple(f"x{i + 1}" for i in range(len(config.axes))) + ("roots", "positive_roots")
    payload = {
        "cells": len(rows),
        "all_cells_have_positive_root": all(r[-1] >= 1 for r in rows),
        "cells_without_positive_root": [list(r[:-2]) for r in rows if r[-1] < 1],
    }
    return CommandResult("sweep", payload, EXIT_OK, {"sweep": Curve(header, rows)})


COMMANDS: Dict[str, Callable[[JobConfig], CommandResult]] = {
    "solve": cmd_solve,
    "stability": cmd_stability,
    "em-search": cmd_em_search,
    "yamabe": cmd_yamabe,
    "orthotoric": cmd_orthotoric,
    "mabuchi": cmd_mabuchi,
    "sweep": cmd_sweep,
}
