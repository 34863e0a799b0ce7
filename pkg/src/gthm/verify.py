"""Randomized verification of a derivation schedule.

A schedule is executed symbolically-free: parameter nodes take the
sampled values, every other node is computed by its chosen hyperedge
recipe.  Each sample is cross-checked against the coordinate oracle,
and the claim is evaluated from the executed node values alone.  The
verdict aggregates many independent samples:

* PROVED       every sample passes both the cross-check and the claim;
* REFUTED      some sample passes the cross-check yet misses the claim
               by at least ten times the tolerance;
* INCONCLUSIVE anything else (no schedule, numeric failures, or
               disagreement between schedule and coordinates).

Radical-free models run entirely in exact rational arithmetic, so a
passing claim has residual exactly 0 and the repeated agreement yields
a Schwartz-Zippel identity certificate.  Models with circle
intersections produce irrational coordinates; their verdicts are
labeled numerically certified instead.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional

from . import scene as sc
from .exactnum import Scalar, add, as_float, exact_eq, mul, rel_err
from .graph import DerivationGraph, ScheduleStep
from .rules import Dim, NumericFailure, apply_edge, length

STATUS_PROVED = "PROVED"
STATUS_REFUTED = "REFUTED"
STATUS_INCONCLUSIVE = "INCONCLUSIVE"

# a refutation must overshoot the tolerance by this factor
REFUTE_MARGIN = 10.0

# one initial draw plus this many redraws per sample slot
REDRAW_CAP = 10

_SAMPLE_STRIDE = 1_000_003
_REDRAW_STRIDE = 500_009


@dataclass(frozen=True)
class SampleReport:
    """Everything observed while checking one parameter assignment."""

    index: int
    seed: int
    assignment: sc.ParamAssignment
    node_values: dict[Dim, Scalar]
    oracle_values: dict[Dim, Scalar]
    max_node_residual: float
    claim_lhs: Scalar
    claim_rhs: Scalar
    claim_residual: float
    redraws: int = 0


@dataclass(frozen=True)
class Certificate:
    """Identity-testing pedigree attached to a PROVED verdict."""

    kind: str  # "exact-identity" | "numerically-certified"
    degree_bound: int
    sample_space: int
    points: int
    log10_failure_bound: Optional[float]
    certified: bool
    note: str


@dataclass(frozen=True)
class Verdict:
    status: str
    samples: tuple[SampleReport, ...]
    reason: str
    schedule: Optional[tuple[ScheduleStep, ...]] = None
    certificate: Optional[Certificate] = None


def execute_schedule(graph: DerivationGraph,
                     schedule: list[ScheduleStep],
                     assignment: sc.ParamAssignment,
                     scene_: Optional[sc.Scene] = None) -> dict[Dim, Scalar]:
    """Run the schedule under one assignment, without the oracle.

    Parameter steps read their value from the assignment; every other
    step applies its chosen hyperedge recipe to already-computed source
    values.  Raises NumericFailure when a recipe cannot produce a value
    (division by zero, negative leg, no usable intersection root).
    """
    if scene_ is None:
        scene_ = sc.build_scene(graph.model)
    by_name = dict(assignment.items)
    param_value = {length(p, q): by_name[name]
                   for name, (p, q) in scene_.param_dims}
    values: dict[Dim, Scalar] = {}
    for step in schedule:
        if step.edge is None:
            values[step.dim] = param_value[step.dim]
        else:
            values[step.dim] = apply_edge(step.edge, values)
    return values


def cross_check(report: SampleReport, tol: float) -> bool:
    """True when every scheduled node agrees with the oracle within tol."""
    return report.max_node_residual <= tol


def _claim_side(terms, values: dict[Dim, Scalar]) -> Scalar:
    total: Scalar = Fraction(0)
    for term in terms:
        total = add(total, mul(term.coef, values[length(term.p, term.q)]))
    return total


def _claim_residual(lhs: Scalar, rhs: Scalar) -> float:
    """Disagreement of the claim sides, relative to the smaller side.

    Normalizing by the smaller side makes "lhs is half of rhs" read as
    residual 1, not 1/2; exactly equal exact values give exactly 0.0.
    """
    if exact_eq(lhs, rhs):
        return 0.0
    fl, fr = as_float(lhs), as_float(rhs)
    scale = min(abs(fl), abs(fr)) or max(abs(fl), abs(fr))
    if scale == 0.0:
        return 0.0
    return abs(fl - fr) / scale


def _claim_dims(model) -> list[Dim]:
    dims = []
    for stmt in model.claims:
        eq = stmt.payload
        for term in eq.lhs + eq.rhs:
            d = length(term.p, term.q)
            if d not in dims:
                dims.append(d)
    return dims


def _sample_report(model, scene_, graph, schedule, assignment,
                   index: int, seed: int, redraws: int) -> SampleReport:
    values = execute_schedule(graph, schedule, assignment, scene_)
    ev = sc.evaluate(scene_, assignment)
    oracle = {dim: sc._dim_value(ev, dim) for dim in values}
    max_resid = 0.0
    for dim, v in values.items():
        max_resid = max(max_resid, rel_err(v, oracle[dim]))
    # the first claim names the reported sides; the residual covers all
    worst = 0.0
    lhs_val: Scalar = Fraction(0)
    rhs_val: Scalar = Fraction(0)
    for pos, stmt in enumerate(model.claims):
        eq = stmt.payload
        lv = _claim_side(eq.lhs, values)
        rv = _claim_side(eq.rhs, values)
        r = _claim_residual(lv, rv)
        if pos == 0:
            lhs_val, rhs_val = lv, rv
        worst = max(worst, r)
    return SampleReport(index=index, seed=seed, assignment=assignment,
                        node_values=values, oracle_values=oracle,
                        max_node_residual=max_resid,
                        claim_lhs=lhs_val, claim_rhs=rhs_val,
                        claim_residual=worst, redraws=redraws)


# ---------------------------------------------------------------------------
# identity-testing certificate

# squared node values are rational functions of the parameters; these
# table entries bound max(deg num, deg den) through each recipe kind
_DEG_MAX = {"copy", "inv", "add", "sub", "pyth_hyp", "pyth_leg", "dist4"}
_DEG_SUM = {"mul", "div", "solve2", "lc"}


def _degree_bound(model, schedule: list[ScheduleStep]) -> int:
    deg: dict[Dim, int] = {}
    for step in schedule:
        if step.edge is None:
            deg[step.dim] = 2  # squared parameter length
            continue
        srcs = [deg[s] for s in step.edge.sources]
        op = step.edge.recipe[0]
        if op in _DEG_SUM:
            deg[step.dim] = sum(srcs)
        else:
            assert op in _DEG_MAX, f"unknown recipe op {op!r}"
            deg[step.dim] = max(srcs)
    # clearing denominators of a sum of terms multiplies degrees at worst
    return sum(deg[d] for d in _claim_dims(model) if d in deg)


def _sample_space(rng_range: tuple[Fraction, Fraction]) -> int:
    """Count the distinct rationals the sampler can draw for one slot."""
    lo, hi = rng_range
    total = 0
    for d in range(1, 65):
        lo_n = math.ceil(lo * d)
        hi_n = math.floor(hi * d)
        total += sum(1 for n in range(lo_n, hi_n + 1) if math.gcd(n, d) == 1)
    return total


def _dim_points(dim: Dim) -> set[str]:
    if dim.kind == "length":
        return set(dim.points)
    if dim.kind == "composite":
        return set(dim.far) | set(dim.near)
    return _dim_points(dim.num) | _dim_points(dim.den)


def _claim_is_radical(model, scene_, schedule) -> bool:
    pts: set[str] = set()
    for step in schedule:
        pts |= _dim_points(step.dim)
    return any(scene_.radical.get(p, False) for p in pts)


def _certificate(model, scene_, schedule, num_samples: int,
                 rng_range: tuple[Fraction, Fraction]) -> Certificate:
    radical = _claim_is_radical(model, scene_, schedule)
    degree = _degree_bound(model, schedule)
    space = _sample_space(rng_range)
    if radical:
        return Certificate(
            kind="numerically-certified", degree_bound=degree,
            sample_space=space, points=num_samples,
            log10_failure_bound=None, certified=False,
            note=("irrational circle intersections present; agreement is "
                  "numerical, not an exact identity test"))
    certified = num_samples >= degree + 1 and degree < space
    log10_bound = None
    if 0 < degree < space:
        log10_bound = num_samples * (math.log10(degree) - math.log10(space))
    note = (f"exact agreement at {num_samples} rational points; "
            f"squared-claim degree bound {degree}, per-slot sample space "
            f"{space}; Schwartz-Zippel failure bound "
            f"(degree/space)^samples under uniform slot sampling")
    return Certificate(kind="exact-identity", degree_bound=degree,
                       sample_space=space, points=num_samples,
                       log10_failure_bound=log10_bound,
                       certified=certified, note=note)


# ---------------------------------------------------------------------------
# the verdict


def verdict(model, scene_: sc.Scene, graph: Optional[DerivationGraph],
            schedule: Optional[list[ScheduleStep]],
            num_samples: int = 100, seed: int = 42, tol: float = 1e-9,
            rng_range: tuple[Fraction, Fraction] = (Fraction(1), Fraction(10)),
            ) -> Verdict:
    """Judge the claim by executing the schedule at random samples.

    Degenerate models propagate DegenerateModel from the sampler.  A
    sample whose execution hits a NumericFailure is redrawn with a
    fresh seed, at most REDRAW_CAP times per slot.
    """
    if graph is None or schedule is None:
        return Verdict(status=STATUS_INCONCLUSIVE, samples=(),
                       reason="no derivation schedule")
    reports: list[SampleReport] = []
    for i in range(num_samples):
        report = None
        for attempt in range(1 + REDRAW_CAP):
            s_seed = seed * _SAMPLE_STRIDE + i + attempt * _REDRAW_STRIDE
            assignment = sc.sample_params(scene_, s_seed, rng_range)
            try:
                report = _sample_report(model, scene_, graph, schedule,
                                        assignment, i, s_seed, attempt)
            except NumericFailure:
                continue
            break
        if report is None:
            return Verdict(
                status=STATUS_INCONCLUSIVE, samples=tuple(reports),
                reason=(f"sample {i}: numeric failure persisted through "
                        f"{REDRAW_CAP} redraws"),
                schedule=tuple(schedule))
        reports.append(report)

    checked = [cross_check(r, tol) for r in reports]
    claim_ok = [r.claim_residual <= tol for r in reports]
    refuting = [r for r, c in zip(reports, checked)
                if c and r.claim_residual >= REFUTE_MARGIN * tol]

    if all(checked) and all(claim_ok):
        cert = _certificate(model, scene_, schedule, num_samples, rng_range)
        if cert.kind == "exact-identity":
            reason = (f"claim holds exactly at {num_samples} rational "
                      f"samples")
        else:
            reason = (f"claim holds within {tol:g} at {num_samples} "
                      f"samples (numerically certified)")
        return Verdict(status=STATUS_PROVED, samples=tuple(reports),
                       reason=reason, schedule=tuple(schedule),
                       certificate=cert)
    if refuting:
        worst = max(refuting, key=lambda r: r.claim_residual)
        return Verdict(
            status=STATUS_REFUTED, samples=tuple(reports),
            reason=(f"claim fails with relative residual "
                    f"{worst.claim_residual:.6g} at sample {worst.index} "
                    f"(threshold {REFUTE_MARGIN * tol:g})"),
            schedule=tuple(schedule))
    if not all(checked):
        bad = checked.index(False)
        reason = (f"schedule disagrees with coordinates at sample {bad} "
                  f"(max node residual {reports[bad].max_node_residual:.6g})")
    else:
        bad = claim_ok.index(False)
        reason = (f"claim residual {reports[bad].claim_residual:.6g} at "
                  f"sample {bad} exceeds tolerance without reaching the "
                  f"refutation margin")
    return Verdict(status=STATUS_INCONCLUSIVE, samples=tuple(reports),
                   reason=reason, schedule=tuple(schedule))


def oracle_verdict(model, scene_: sc.Scene, num_samples: int = 100,
                   seed: int = 42, tol: float = 1e-9,
                   rng_range: tuple[Fraction, Fraction] = (Fraction(1),
                                                           Fraction(10)),
                   ) -> Verdict:
    """Judge the claim from coordinates alone, with no derivation.

    Samples the same assignments as verdict would and evaluates the
    claim sides straight from the figure, so a claim can be tested even
    when no schedule exists.  There is no cross-check: the oracle is
    the only computation.
    """
    reports: list[SampleReport] = []
    for i in range(num_samples):
        s_seed = seed * _SAMPLE_STRIDE + i
        assignment = sc.sample_params(scene_, s_seed, rng_range)
        ev = sc.evaluate(scene_, assignment)
        values = {}
        for stmt in model.claims:
            eq = stmt.payload
            for term in eq.lhs + eq.rhs:
                d = length(term.p, term.q)
                values[d] = sc._dim_value(ev, d)
        worst = 0.0
        lhs_val: Scalar = Fraction(0)
        rhs_val: Scalar = Fraction(0)
        for pos, stmt in enumerate(model.claims):
            eq = stmt.payload
            lv = _claim_side(eq.lhs, values)
            rv = _claim_side(eq.rhs, values)
            if pos == 0:
                lhs_val, rhs_val = lv, rv
            worst = max(worst, _claim_residual(lv, rv))
        reports.append(SampleReport(
            index=i, seed=s_seed, assignment=assignment,
            node_values=dict(values), oracle_values=dict(values),
            max_node_residual=0.0, claim_lhs=lhs_val, claim_rhs=rhs_val,
            claim_residual=worst))
    claim_ok = [r.claim_residual <= tol for r in reports]
    if all(claim_ok):
        return Verdict(status=STATUS_PROVED, samples=tuple(reports),
                       reason=(f"claim holds at {num_samples} coordinate "
                               f"samples (oracle only, no derivation)"))
    refuting = [r for r in reports
                if r.claim_residual >= REFUTE_MARGIN * tol]
    if refuting:
        worst_r = max(refuting, key=lambda r: r.claim_residual)
        return Verdict(
            status=STATUS_REFUTED, samples=tuple(reports),
            reason=(f"claim fails with relative residual "
                    f"{worst_r.claim_residual:.6g} at sample "
                    f"{worst_r.index} (threshold {REFUTE_MARGIN * tol:g})"))
    bad = claim_ok.index(False)
    return Verdict(
        status=STATUS_INCONCLUSIVE, samples=tuple(reports),
        reason=(f"claim residual {reports[bad].claim_residual:.6g} at "
                f"sample {bad} exceeds tolerance without reaching the "
                f"refutation margin"))


def verdict_summary(v: Verdict) -> dict:
    """Plain-data digest of a verdict, for serialization."""
    out: dict = {"status": v.status, "reason": v.reason}
    if v.samples:
        out["samples"] = {
            "count": len(v.samples),
            "max_claim_residual": max(r.claim_residual for r in v.samples),
            "max_node_residual": max(r.max_node_residual for r in v.samples),
        }
    else:
        out["samples"] = {"count": 0}
    if v.schedule is not None:
        out["schedule"] = [s.dim.display for s in v.schedule]
    if v.certificate is not None:
        c = v.certificate
        out["certificate"] = {
            "kind": c.kind, "degree_bound": c.degree_bound,
            "sample_space": c.sample_space, "points": c.points,
            "log10_failure_bound": c.log10_failure_bound,
            "certified": c.certified, "note": c.note,
        }
    return out
