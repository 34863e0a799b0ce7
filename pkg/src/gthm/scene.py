"""Coordinate oracle: numeric evaluation of a hypothesis model.

A Scene fixes the evaluation plan for a validated model.  Given a
parameter assignment it computes coordinates for every point, keeping
exact rationals wherever the construction never passes through a
line-circle intersection, and it can evaluate any dimension expression
directly from coordinates.  Everything downstream (rule discovery,
schedule execution, the verdict) checks itself against this module.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Union
from weakref import WeakKeyDictionary

from . import dsl
from .exactnum import (Scalar, add, as_float, div, exact_eq, is_exact, mul,
                       sqrt_scalar, sub)

Coord = tuple[Scalar, Scalar]

PRED_TOL = 1e-9  # relative tolerance for float-valued geometric predicates


class GeometryError(Exception):
    """A construction step failed under the current assignment."""


class UnconstructiblePoint(GeometryError):
    pass


class ParallelLines(GeometryError):
    pass


class NoIntersection(GeometryError):
    pass


class AmbiguousPick(GeometryError):
    pass


class DegenerateLine(GeometryError):
    pass


class DivisionByZero(GeometryError):
    pass


class DegenerateModel(Exception):
    """Sampling could not find a non-degenerate assignment."""


@dataclass(frozen=True)
class ParamAssignment:
    items: tuple[tuple[str, Fraction], ...]

    @property
    def values(self) -> dict[str, Fraction]:
        return dict(self.items)

    def __getitem__(self, name: str) -> Fraction:
        for key, val in self.items:
            if key == name:
                return val
        raise KeyError(name)


@dataclass(frozen=True)
class Line:
    anchor: Coord
    direction: Coord


@dataclass(frozen=True)
class PlanStep:
    name: str
    kind: str  # "point" or "line"
    radical: bool
    statement: dsl.Statement


class Scene:
    """Immutable after build; evaluation never mutates it."""

    def __init__(self, model: dsl.HypothesisModel, plan: tuple[PlanStep, ...],
                 radical: dict[str, bool],
                 param_dims: tuple[tuple[str, tuple[str, str]], ...]):
        self.model = model
        self.plan = plan
        self.radical = radical
        self.param_dims = param_dims


class Evaluation:
    """Coordinates and carrier lines under one assignment."""

    def __init__(self) -> None:
        self.points: dict[str, Coord] = {}
        self.named_lines: dict[str, Line] = {}
        self.carriers: list[tuple[str, Line]] = []  # deduplicated, with labels
        self._inline_counter = 0

    def add_carrier(self, label: str, line: Line) -> None:
        for _, have in self.carriers:
            if _same_carrier(have, line):
                return
        self.carriers.append((label, line))

    def next_inline_label(self) -> str:
        self._inline_counter += 1
        return f"_l{self._inline_counter}"


# ---------------------------------------------------------------------------
# scalar/vector helpers shared with rule discovery


def near_zero(value: Scalar, scale: Scalar) -> bool:
    """Is value zero, exactly when exact, else relative to scale."""
    if is_exact(value):
        if isinstance(value, Fraction):
            return value == 0
        return False  # an irrational radical is never zero
    s = abs(as_float(scale))
    return abs(as_float(value)) <= PRED_TOL * max(s, 1.0)


def scalar_positive(value: Scalar) -> bool:
    if is_exact(value):
        return as_float(value) > 0 if not isinstance(value, Fraction) else value > 0
    return as_float(value) > 0


def vsub(a: Coord, b: Coord) -> Coord:
    return (sub(a[0], b[0]), sub(a[1], b[1]))


def vadd(a: Coord, b: Coord) -> Coord:
    return (add(a[0], b[0]), add(a[1], b[1]))


def vscale(t: Scalar, v: Coord) -> Coord:
    return (mul(t, v[0]), mul(t, v[1]))


def dot(a: Coord, b: Coord) -> Scalar:
    return add(mul(a[0], b[0]), mul(a[1], b[1]))


def cross(a: Coord, b: Coord) -> Scalar:
    return sub(mul(a[0], b[1]), mul(a[1], b[0]))


def sq_norm(v: Coord) -> Scalar:
    return add(mul(v[0], v[0]), mul(v[1], v[1]))


def distance(a: Coord, b: Coord) -> Scalar:
    return sqrt_scalar(sq_norm(vsub(a, b)))


def _vec_scale(v: Coord) -> Scalar:
    return max(abs(as_float(v[0])), abs(as_float(v[1])), 1.0)


def points_collinear(a: Coord, b: Coord, c: Coord) -> bool:
    u, v = vsub(b, a), vsub(c, a)
    return near_zero(cross(u, v), mul_float(_vec_scale(u), _vec_scale(v)))


def mul_float(a: float, b: float) -> float:
    return a * b


def strictly_between(a: Coord, m: Coord, b: Coord) -> bool:
    """m strictly inside segment ab; assumes collinearity was checked."""
    u, v = vsub(m, a), vsub(b, a)
    t_num = dot(u, v)
    t_den = sq_norm(v)
    if near_zero(t_den, 1.0):
        return False
    t = as_float(t_num) / as_float(t_den)
    return PRED_TOL < t < 1 - PRED_TOL


def perpendicular(u: Coord, v: Coord) -> bool:
    return near_zero(dot(u, v), mul_float(_vec_scale(u), _vec_scale(v)))


def lines_parallel(l1: Line, l2: Line) -> bool:
    return near_zero(cross(l1.direction, l2.direction),
                     mul_float(_vec_scale(l1.direction), _vec_scale(l2.direction)))


def on_line(p: Coord, l: Line) -> bool:
    u = vsub(p, l.anchor)
    return near_zero(cross(u, l.direction),
                     mul_float(max(_vec_scale(u), 1.0), _vec_scale(l.direction)))


def _same_carrier(l1: Line, l2: Line) -> bool:
    return lines_parallel(l1, l2) and on_line(l2.anchor, l1)


def coincident(a: Coord, b: Coord) -> bool:
    scale = max(_vec_scale(a), _vec_scale(b))
    return near_zero(sub(a[0], b[0]), scale) and near_zero(sub(a[1], b[1]), scale)


def triangle_angles(a: Coord, b: Coord, c: Coord) -> Optional[tuple[float, float, float]]:
    """Interior angles at a, b, c in radians, or None when degenerate."""
    fa = (as_float(a[0]), as_float(a[1]))
    fb = (as_float(b[0]), as_float(b[1]))
    fc = (as_float(c[0]), as_float(c[1]))
    area2 = abs((fb[0] - fa[0]) * (fc[1] - fa[1]) - (fb[1] - fa[1]) * (fc[0] - fa[0]))
    if area2 < 1e-12:
        return None

    def angle(p, q, r):
        ux, uy = q[0] - p[0], q[1] - p[1]
        vx, vy = r[0] - p[0], r[1] - p[1]
        nu, nv = math.hypot(ux, uy), math.hypot(vx, vy)
        cosv = (ux * vx + uy * vy) / (nu * nv)
        return math.acos(max(-1.0, min(1.0, cosv)))

    return (angle(fa, fb, fc), angle(fb, fc, fa), angle(fc, fa, fb))


# ---------------------------------------------------------------------------
# build


def _line_arg_points(arg: dsl.LineArg, model: dsl.HypothesisModel) -> list[str]:
    if isinstance(arg, dsl.LineRef):
        for s in model.constructions:
            if s.kind == "line-construction" and s.name == arg.name:
                return _line_arg_points(s.payload, model)
        return []
    if isinstance(arg, (dsl.ThroughPoints, dsl.ExtendRay)):
        return [arg.p, arg.q]
    if isinstance(arg, dsl.ThroughParallel):
        return [arg.p] + _line_arg_points(arg.base, model)
    raise AssertionError(f"unhandled line argument {arg!r}")


def _expr_points(e: dsl.Expr) -> list[str]:
    if isinstance(e, dsl.LenExpr):
        return [e.p, e.q]
    if isinstance(e, dsl.Neg):
        return _expr_points(e.arg)
    if isinstance(e, dsl.BinOp):
        return _expr_points(e.left) + _expr_points(e.right)
    return []


def _point_expr_deps(pe: dsl.PointExpr, model: dsl.HypothesisModel) -> list[str]:
    if isinstance(pe, dsl.Origin):
        return []
    if isinstance(pe, dsl.Baseline):
        return [pe.p] + _expr_points(pe.dist)
    if isinstance(pe, dsl.OnSegment):
        return [pe.p, pe.q] + _expr_points(pe.dist)
    if isinstance(pe, dsl.OffsetPerp):
        return [pe.p] + _line_arg_points(pe.line, model) + _expr_points(pe.dist)
    if isinstance(pe, dsl.Meet):
        return _line_arg_points(pe.l1, model) + _line_arg_points(pe.l2, model)
    if isinstance(pe, dsl.MeetCircle):
        deps = _line_arg_points(pe.line, model) + [pe.center] + _expr_points(pe.radius)
        if isinstance(pe.pick, dsl.PickWithinSegment):
            deps += [pe.pick.p, pe.pick.q]
        elif isinstance(pe.pick, dsl.PickNearest):
            deps += [pe.pick.p]
        return deps
    if isinstance(pe, dsl.Foot):
        return [pe.p] + _line_arg_points(pe.line, model)
    raise AssertionError(f"unhandled point expression {pe!r}")


def build_scene(model: dsl.HypothesisModel) -> Scene:
    radical: dict[str, bool] = {}
    plan: list[PlanStep] = []
    param_dims: list[tuple[str, tuple[str, str]]] = []
    for s in model.constructions:
        if s.kind == "line-construction":
            pts = _line_arg_points(s.payload, model)
            radical[s.name] = any(radical.get(p, False) for p in pts)
            plan.append(PlanStep(s.name, "line", radical[s.name], s))
            continue
        pe = s.payload
        deps = _point_expr_deps(pe, model)
        for d in deps:
            if d not in radical:
                raise UnconstructiblePoint(
                    f"point {s.name!r} depends on unconstructed {d!r}")
        flag = isinstance(pe, dsl.MeetCircle) or any(radical[d] for d in deps)
        radical[s.name] = flag
        plan.append(PlanStep(s.name, "point", flag, s))
        anchor = _bare_param_anchor(pe)
        if anchor is not None:
            param_name, from_point = anchor
            param_dims.append((param_name, (from_point, s.name)))
    ordered = _order_param_dims(model, param_dims)
    return Scene(model, tuple(plan), radical, ordered)


def _bare_param_anchor(pe: dsl.PointExpr) -> Optional[tuple[str, str]]:
    """(param, anchor point) when the construction measures a bare
    parameter as a segment from a known point."""
    if isinstance(pe, dsl.Baseline) and isinstance(pe.dist, dsl.NameRef):
        return (pe.dist.name, pe.p)
    if isinstance(pe, dsl.OnSegment) and isinstance(pe.dist, dsl.NameRef):
        return (pe.dist.name, pe.p)
    if isinstance(pe, dsl.OffsetPerp) and isinstance(pe.dist, dsl.NameRef):
        return (pe.dist.name, pe.p)
    if isinstance(pe, dsl.MeetCircle) and isinstance(pe.radius, dsl.NameRef):
        return (pe.radius.name, pe.center)
    return None


def _order_param_dims(model: dsl.HypothesisModel,
                      found: list[tuple[str, tuple[str, str]]],
                      ) -> tuple[tuple[str, tuple[str, str]], ...]:
    by_param: dict[str, list[tuple[str, str]]] = {}
    for param, pair in found:
        by_param.setdefault(param, []).append(pair)
    ordered: list[tuple[str, tuple[str, str]]] = []
    for param in model.params:
        for pair in by_param.get(param, []):
            ordered.append((param, pair))
    return tuple(ordered)


# ---------------------------------------------------------------------------
# evaluation


_EVAL_MEMO: "WeakKeyDictionary[Scene, dict[ParamAssignment, Evaluation]]" = WeakKeyDictionary()


def evaluate(scene: Scene, a: ParamAssignment) -> Evaluation:
    per_scene = _EVAL_MEMO.setdefault(scene, {})
    hit = per_scene.get(a)
    if hit is not None:
        return hit
    ev = _evaluate(scene, a)
    if len(per_scene) > 4096:
        per_scene.clear()
    per_scene[a] = ev
    return ev


def _evaluate(scene: Scene, a: ParamAssignment) -> Evaluation:
    ev = Evaluation()
    params = a.values
    model = scene.model
    for step in scene.plan:
        stmt = step.statement
        if step.kind == "line":
            line = _eval_line_arg(stmt.payload, ev, params, label=stmt.name)
            ev.named_lines[stmt.name] = line
        else:
            ev.points[stmt.name] = _eval_point(stmt, ev, params, model)
    # carriers appearing only inside point expressions were collected
    # during evaluation; order is deterministic (plan order, then
    # encounter order within a statement)
    return ev


def _eval_expr(e: dsl.Expr, ev: Evaluation, params: dict[str, Fraction]) -> Scalar:
    if isinstance(e, dsl.NumLit):
        return e.value
    if isinstance(e, dsl.NameRef):
        return params[e.name]
    if isinstance(e, dsl.LenExpr):
        return distance(ev.points[e.p], ev.points[e.q])
    if isinstance(e, dsl.Neg):
        return sub(Fraction(0), _eval_expr(e.arg, ev, params))
    if isinstance(e, dsl.BinOp):
        left = _eval_expr(e.left, ev, params)
        right = _eval_expr(e.right, ev, params)
        if e.op == "+":
            return add(left, right)
        if e.op == "-":
            return sub(left, right)
        if e.op == "*":
            return mul(left, right)
        try:
            return div(left, right)
        except ZeroDivisionError:
            raise DivisionByZero("zero divisor in a distance expression") from None
    raise AssertionError(f"unhandled expression {e!r}")


def _eval_line_arg(arg: dsl.LineArg, ev: Evaluation, params: dict[str, Fraction],
                   label: Optional[str] = None) -> Line:
    if isinstance(arg, dsl.LineRef):
        return ev.named_lines[arg.name]
    if isinstance(arg, (dsl.ThroughPoints, dsl.ExtendRay)):
        p, q = ev.points[arg.p], ev.points[arg.q]
        if coincident(p, q):
            raise DegenerateLine(f"line through coincident points {arg.p}, {arg.q}")
        line = Line(p, vsub(q, p))
    else:
        assert isinstance(arg, dsl.ThroughParallel)
        base = _eval_line_arg(arg.base, ev, params)
        line = Line(ev.points[arg.p], base.direction)
    ev.add_carrier(label if label is not None else ev.next_inline_label(), line)
    return line


def _eval_point(stmt: dsl.Statement, ev: Evaluation, params: dict[str, Fraction],
                model: dsl.HypothesisModel) -> Coord:
    pe = stmt.payload
    zero = Fraction(0)
    if isinstance(pe, dsl.Origin):
        return (zero, zero)
    if isinstance(pe, dsl.Baseline):
        base = ev.points[pe.p]
        if not near_zero(base[1], max(_vec_scale(base), 1.0)):
            raise GeometryError(f"baseline anchor {pe.p!r} is off the reference axis")
        d = _eval_expr(pe.dist, ev, params)
        if near_zero(d, 1.0):
            raise GeometryError("baseline displacement is zero")
        if stmt.name == model.base_point and not scalar_positive(d):
            raise GeometryError("the frame baseline point must sit on the positive axis")
        return (add(base[0], d), zero)
    if isinstance(pe, dsl.OnSegment):
        p, q = ev.points[pe.p], ev.points[pe.q]
        d = _eval_expr(pe.dist, ev, params)
        seg = vsub(q, p)
        length = sqrt_scalar(sq_norm(seg))
        if near_zero(length, 1.0):
            raise DegenerateLine("zero-length segment")
        if not scalar_positive(d) or not scalar_positive(sub(length, d)):
            raise GeometryError("on_segment displacement must fall strictly inside")
        t = div(d, length)
        return vadd(p, vscale(t, seg))
    if isinstance(pe, dsl.OffsetPerp):
        p = ev.points[pe.p]
        line = _eval_line_arg(pe.line, ev, params)
        d = _eval_expr(pe.dist, ev, params)
        if near_zero(d, 1.0):
            raise GeometryError("offset_perp displacement is zero")
        dx, dy = line.direction
        length = sqrt_scalar(sq_norm(line.direction))
        if near_zero(length, 1.0):
            raise DegenerateLine("zero-direction line")
        # counter-clockwise normal: positive d lands on the left of the
        # direction, which is "above" for the frame axis
        t = div(d, length)
        normal = (sub(Fraction(0), dy), dx)
        return vadd(p, vscale(t, normal))
    if isinstance(pe, dsl.Meet):
        l1 = _eval_line_arg(pe.l1, ev, params)
        l2 = _eval_line_arg(pe.l2, ev, params)
        return intersect_lines(l1, l2)
    if isinstance(pe, dsl.MeetCircle):
        line = _eval_line_arg(pe.line, ev, params)
        center = ev.points[pe.center]
        radius = _eval_expr(pe.radius, ev, params)
        pick = _resolve_pick(pe.pick, ev)
        return line_circle_meet(line, center, radius, pick)
    if isinstance(pe, dsl.Foot):
        line = _eval_line_arg(pe.line, ev, params)
        return foot_of_perpendicular(ev.points[pe.p], line)
    raise AssertionError(f"unhandled point expression {pe!r}")


def _resolve_pick(pick: dsl.Pick, ev: Evaluation):
    if isinstance(pick, dsl.PickFirst):
        return ("first",)
    if isinstance(pick, dsl.PickSecond):
        return ("second",)
    if isinstance(pick, dsl.PickWithinSegment):
        return ("within_segment", ev.points[pick.p], ev.points[pick.q])
    assert isinstance(pick, dsl.PickNearest)
    return ("nearest", ev.points[pick.p])


# ---------------------------------------------------------------------------
# geometric primitives


def intersect_lines(l1: Line, l2: Line) -> Coord:
    denom = cross(l1.direction, l2.direction)
    if near_zero(denom, mul_float(_vec_scale(l1.direction), _vec_scale(l2.direction))):
        raise ParallelLines("lines are parallel under this assignment")
    offset = vsub(l2.anchor, l1.anchor)
    t = div(cross(offset, l2.direction), denom)
    return vadd(l1.anchor, vscale(t, l1.direction))


def line_circle_meet(l: Line, center: Coord, radius: Scalar, pick) -> Coord:
    d = l.direction
    rel = vsub(l.anchor, center)
    qa = sq_norm(d)
    qb = mul(Fraction(2), dot(d, rel))
    qc = sub(sq_norm(rel), mul(radius, radius))
    disc = sub(mul(qb, qb), mul(mul(Fraction(4), qa), qc))
    fdisc = as_float(disc)
    if fdisc < 0:
        raise NoIntersection("the line misses the circle")
    root = sqrt_scalar(disc)
    two_a = mul(Fraction(2), qa)
    t1 = div(sub(sub(Fraction(0), qb), root), two_a)
    t2 = div(add(sub(Fraction(0), qb), root), two_a)
    if as_float(t1) > as_float(t2):
        t1, t2 = t2, t1
    t = _pick_root(l, t1, t2, pick)
    return vadd(l.anchor, vscale(t, d))


def _line_param(l: Line, p: Coord) -> Scalar:
    return div(dot(vsub(p, l.anchor), l.direction), sq_norm(l.direction))


def _pick_root(l: Line, t1: Scalar, t2: Scalar, pick) -> Scalar:
    kind = pick[0]
    if kind == "first":
        return t1
    if kind == "second":
        return t2
    if kind == "within_segment":
        ta = as_float(_line_param(l, pick[1]))
        tb = as_float(_line_param(l, pick[2]))
        lo, hi = min(ta, tb), max(ta, tb)
        inside = [t for t in (t1, t2) if lo < as_float(t) < hi]
        if len(inside) != 1:
            raise AmbiguousPick(
                f"{len(inside)} intersection(s) inside the segment, need exactly 1")
        return inside[0]
    assert kind == "nearest"
    tp = as_float(_line_param(l, pick[1]))
    d1, d2 = abs(as_float(t1) - tp), abs(as_float(t2) - tp)
    if math.isclose(d1, d2, rel_tol=1e-12, abs_tol=1e-15):
        raise AmbiguousPick("both intersections are equally near")
    return t1 if d1 < d2 else t2


def foot_of_perpendicular(p: Coord, l: Line) -> Coord:
    if near_zero(sq_norm(l.direction), 1.0):
        raise DegenerateLine("line with zero direction")
    t = _line_param(l, p)
    return vadd(l.anchor, vscale(t, l.direction))


# ---------------------------------------------------------------------------
# sampling and the dimension oracle


def sample_params(scene: Scene, seed: int,
                  rng_range: tuple[Fraction, Fraction] = (Fraction(1), Fraction(10)),
                  retry_cap: int = 100) -> ParamAssignment:
    rng = random.Random(seed)
    lo, hi = rng_range
    last_err: Optional[Exception] = None
    for _ in range(retry_cap):
        items = []
        for name in scene.model.params:
            value = None
            for _denom_try in range(64):
                denom = rng.randint(1, 64)
                lo_n = math.ceil(lo * denom)
                hi_n = math.floor(hi * denom)
                if lo_n > hi_n:
                    continue  # this denominator admits no value in range
                value = Fraction(rng.randint(lo_n, hi_n), denom)
                break
            if value is None:
                raise DegenerateModel(f"sampling range [{lo}, {hi}] is too narrow")
            items.append((name, value))
        a = ParamAssignment(tuple(items))
        try:
            evaluate(scene, a)
        except (GeometryError, ZeroDivisionError) as err:
            last_err = err
            continue
        return a
    raise DegenerateModel(
        f"no valid assignment in {retry_cap} draws; last failure: {last_err}")


def oracle_dimension(scene: Scene, a: ParamAssignment, dim) -> Scalar:
    """Evaluate a dimension expression straight from coordinates.

    Dimensions are dispatched structurally on their `kind` field:
    length (a point pair), ratio (two sub-dimensions), or composite
    (difference of two collinear lengths from a shared endpoint).
    """
    ev = evaluate(scene, a)
    return _dim_value(ev, dim)


def _dim_value(ev: Evaluation, dim) -> Scalar:
    kind = dim.kind
    if kind == "length":
        p, q = dim.points
        return distance(ev.points[p], ev.points[q])
    if kind == "ratio":
        num = _dim_value(ev, dim.num)
        den = _dim_value(ev, dim.den)
        try:
            return div(num, den)
        except ZeroDivisionError:
            raise DivisionByZero(f"zero denominator in {dim.display}") from None
    if kind == "composite":
        far = distance(ev.points[dim.far[0]], ev.points[dim.far[1]])
        near = distance(ev.points[dim.near[0]], ev.points[dim.near[1]])
        return sub(far, near)
    raise AssertionError(f"unhandled dimension kind {kind!r}")


# ---------------------------------------------------------------------------
# JSON debugging view


def scene_json(scene: Scene, a: Optional[ParamAssignment] = None) -> dict:
    steps = []
    for step in scene.plan:
        entry = {"name": step.name, "kind": step.kind, "radical": step.radical}
        steps.append(entry)
    out = {
        "params": list(scene.model.params),
        "plan": steps,
        "parameter_dimensions": [
            {"param": p, "segment": list(pair)} for p, pair in scene.param_dims],
    }
    if a is not None:
        ev = evaluate(scene, a)
        out["assignment"] = {k: str(v) for k, v in a.items}
        out["coordinates"] = {
            name: [_scalar_json(c[0]), _scalar_json(c[1])]
            for name, c in ev.points.items()}
    return out


def _scalar_json(s: Scalar) -> Union[str, float]:
    if isinstance(s, Fraction):
        return str(s)
    if is_exact(s):
        return repr(s)
    return float(s)
