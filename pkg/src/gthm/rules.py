"""Derivation-rule discovery over a numeric witness.

Each rule inspects the witness coordinates for a geometric relation
(collinearity, parallels, right angles, similar triangles, circle
cuts), and emits hyperedges: a set of source dimensions from which one
target dimension can be computed by a fixed formula.  Relations are
detected at a single witness sample; spurious coincidences are culled
later by replaying every edge at fresh samples (validate_edges).

Positions along the reference axis are always measured from the
origin point; feet are declared points, never invented ones.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field, replace
from fractions import Fraction
from typing import Optional

from . import dsl, scene as sc
from .exactnum import Scalar, add, as_float, div, mul, rel_err, sqrt_scalar, sub


class NumericFailure(Exception):
    """Recipe execution hit a numeric dead end; redraw the sample."""


# ---------------------------------------------------------------------------
# dimensions


@dataclass(frozen=True)
class Dim:
    kind: str  # "length" | "ratio" | "composite"
    points: tuple[str, str] = ()
    num: Optional["Dim"] = None
    den: Optional["Dim"] = None
    far: tuple[str, str] = ()
    near: tuple[str, str] = ()

    @property
    def display(self) -> str:
        if self.kind == "length":
            return "".join(self.points)
        if self.kind == "ratio":
            return f"{self.num.display}/{self.den.display}"
        return f"({''.join(self.far)}-{''.join(self.near)})"

    def __repr__(self) -> str:
        return f"Dim({self.display})"


def length(p: str, q: str) -> Dim:
    if p == q:
        raise ValueError(f"length needs two distinct points, got {p!r} twice")
    lo, hi = (p, q) if p < q else (q, p)
    return Dim(kind="length", points=(lo, hi))


def composite(far: tuple[str, str], near: tuple[str, str]) -> Dim:
    f = tuple(sorted(far))
    n = tuple(sorted(near))
    return Dim(kind="composite", far=f, near=n)


def make_ratio(a: Dim, b: Dim) -> tuple[Dim, bool]:
    """Canonical ratio of two dimensions: operands ordered by display
    name, so composites always land in the numerator.  Returns the dim
    and whether the operands were swapped (value inverted)."""
    if a.display == b.display:
        raise ValueError("ratio of a dimension with itself")
    if a.display < b.display:
        return Dim(kind="ratio", num=a, den=b), False
    return Dim(kind="ratio", num=b, den=a), True


# ---------------------------------------------------------------------------
# hyperedges


@dataclass(frozen=True)
class Hyperedge:
    sources: tuple[Dim, ...]  # sorted by display
    target: Dim
    rule: str
    justification: str
    recipe: tuple
    group: int = 0
    subpriority: int = 0
    bond: Optional[str] = field(default=None, compare=False)  # shared-derivation tag

    def key(self):
        return (frozenset(self.sources), self.target, self.rule)


PRIORITY = {
    "parallel-transfer": 0,
    "distance-formula": 1,
    "pythagoras": 2,
    "segment-chain": 3,
    "similar-triangles": 4,
    "ratio-solve": 5,
    "line-circle": 6,
}


@dataclass(frozen=True)
class Caps:
    max_nodes: int = 512
    max_edges: int = 4096
    max_pairs: int = 10000


DEFAULT_CAPS = Caps()


def _edge(sources, target, rule, justification, recipe, subpriority=0, bond=None):
    srcs = tuple(sorted(set(sources), key=lambda d: d.display))
    if target in srcs or not srcs:
        return None
    return Hyperedge(sources=srcs, target=target, rule=rule,
                     justification=justification, recipe=recipe,
                     subpriority=subpriority, bond=bond)


def _recipe_key(recipe: tuple) -> tuple:
    out = []
    for item in recipe:
        out.append(item.display if isinstance(item, Dim) else str(item))
    return tuple(out)


def _sort_key(e: Hyperedge):
    return (PRIORITY[e.rule], e.subpriority, e.target.display,
            tuple(s.display for s in e.sources), _recipe_key(e.recipe))


def finalize(edges: list[Hyperedge]) -> list[Hyperedge]:
    """Deterministic order, dedup by (sources, target, rule), group labels."""
    ordered = sorted((e for e in edges if e is not None), key=_sort_key)
    seen: set = set()
    labeled: list[Hyperedge] = []
    bonds: dict[str, int] = {}
    next_label = 1
    for e in ordered:
        k = e.key()
        if k in seen:
            continue
        seen.add(k)
        if e.bond is not None and e.bond in bonds:
            label = bonds[e.bond]
        else:
            label = next_label
            next_label += 1
            if e.bond is not None:
                bonds[e.bond] = label
        labeled.append(replace(e, group=label))
    return labeled


# ---------------------------------------------------------------------------
# witness context


class _Witness:
    """Everything the rules need to look at one evaluated sample."""

    def __init__(self, model: dsl.HypothesisModel, scene_: sc.Scene,
                 witness: sc.ParamAssignment):
        self.model = model
        self.scene = scene_
        self.ev = sc.evaluate(scene_, witness)
        self.names: list[str] = list(self.ev.points)
        self.coords = self.ev.points
        origin = self.coords[model.origin]
        base = self.coords[model.base_point]
        self.axis = sc.Line(origin, sc.vsub(base, origin))
        self.on_axis = [n for n in self.names if sc.on_line(self.coords[n], self.axis)]
        self.off_axis = [n for n in self.names if n not in set(self.on_axis)]

    def collinear(self, a: str, b: str, c: str) -> bool:
        return sc.points_collinear(self.coords[a], self.coords[b], self.coords[c])

    def between(self, a: str, m: str, b: str) -> bool:
        return sc.strictly_between(self.coords[a], self.coords[m], self.coords[b])

    def distinct(self, a: str, b: str) -> bool:
        return not sc.coincident(self.coords[a], self.coords[b])

    def axis_feet(self, p: str) -> list[str]:
        """Declared points on the axis that are the perpendicular foot
        of p, judged at the witness."""
        pc = self.coords[p]
        out = []
        for v in self.on_axis:
            vc = self.coords[v]
            if sc.coincident(pc, vc):
                continue
            if sc.perpendicular(sc.vsub(pc, vc), self.axis.direction):
                out.append(v)
        return out

    def axis_offset(self, p: str, foot: str) -> Scalar:
        return sc.distance(self.coords[p], self.coords[foot])

    def axis_side(self, p: str) -> int:
        c = sc.cross(self.axis.direction, sc.vsub(self.coords[p], self.axis.anchor))
        return 1 if as_float(c) > 0 else -1

    def axis_pos_sign(self, p: str, ref: str) -> int:
        d = sc.dot(self.axis.direction, sc.vsub(self.coords[p], self.coords[ref]))
        return 1 if as_float(d) > 0 else -1

    def value(self, dim: Dim) -> Scalar:
        return sc._dim_value(self.ev, dim)


def _chain_triples(w: _Witness) -> list[tuple[str, str, str]]:
    """(end, middle, end) for every strictly-between collinear triple."""
    out = []
    for a, b, c in itertools.combinations(w.names, 3):
        if not (w.distinct(a, b) and w.distinct(b, c) and w.distinct(a, c)):
            continue
        if not w.collinear(a, b, c):
            continue
        if w.between(a, b, c):
            out.append((a, b, c))
        elif w.between(b, a, c):
            out.append((b, a, c))
        elif w.between(a, c, b):
            out.append((a, c, b))
    return out


# ---------------------------------------------------------------------------
# the rules


def segment_chain_rule(model: dsl.HypothesisModel, scene_: sc.Scene,
                       witness: sc.ParamAssignment,
                       ratio_dims: tuple[Dim, ...] = ()) -> list[Hyperedge]:
    """Lengths add along a line.  For each strictly-between triple
    (P, M, Q) emit the three add/subtract edges.  When ratio dimensions
    are supplied, also rewrite their numerators as origin-anchored
    differences (AF becomes OA - OF), which prepares ratio solving."""
    w = _Witness(model, scene_, witness)
    edges: list[Optional[Hyperedge]] = []
    for a, m, b in _chain_triples(w):
        am, mb, ab = length(a, m), length(m, b), length(a, b)
        just = f"{m} lies between {a} and {b} on a straight line"
        edges.append(_edge([am, mb], ab, "segment-chain", just, ("add", am, mb)))
        edges.append(_edge([ab, am], mb, "segment-chain", just, ("sub", ab, am)))
        edges.append(_edge([ab, mb], am, "segment-chain", just, ("sub", ab, mb)))
    origin = model.origin
    for r in ratio_dims:
        if r.kind != "ratio" or r.num.kind != "length":
            continue
        p1, p2 = r.num.points
        if origin in (p1, p2):
            continue
        if not (w.distinct(origin, p1) and w.distinct(origin, p2)):
            continue
        if not w.collinear(origin, p1, p2):
            continue
        if w.between(origin, p1, p2):
            near, far = p1, p2
        elif w.between(origin, p2, p1):
            near, far = p2, p1
        else:
            continue  # origin lies inside the segment; no difference form
        comp = composite((origin, far), (origin, near))
        new_ratio, inverted = make_ratio(comp, r.den)
        recipe = ("inv", r) if inverted else ("copy", r)
        just = (f"{r.num.display} equals {''.join(comp.far)} minus "
                f"{''.join(comp.near)} along the reference axis")
        edges.append(_edge([r], new_ratio, "segment-chain", just, recipe,
                           subpriority=1))
    return [e for e in edges if e is not None]


def parallel_transfer_rule(model: dsl.HypothesisModel, scene_: sc.Scene,
                           witness: sc.ParamAssignment) -> list[Hyperedge]:
    """Perpendicular offsets between the same two parallel carriers are
    equal, so either transfers to the other."""
    w = _Witness(model, scene_, witness)
    carriers = w.ev.carriers
    edges: list[Optional[Hyperedge]] = []
    for (la, l1), (lb, l2) in itertools.combinations(carriers, 2):
        if not sc.lines_parallel(l1, l2):
            continue
        offsets = []
        for u in w.names:
            cu = w.coords[u]
            if not sc.on_line(cu, l1):
                continue
            for v in w.names:
                cv = w.coords[v]
                if u == v or not sc.on_line(cv, l2) or sc.coincident(cu, cv):
                    continue
                if sc.perpendicular(sc.vsub(cu, cv), l1.direction):
                    offsets.append((u, v))
        for (u1, v1), (u2, v2) in itertools.combinations(offsets, 2):
            d1, d2 = length(u1, v1), length(u2, v2)
            if d1 == d2:
                continue
            just = (f"{u1}{v1} and {u2}{v2} are perpendicular offsets "
                    f"between the same parallel lines")
            edges.append(_edge([d1], d2, "parallel-transfer", just, ("copy", d1)))
            edges.append(_edge([d2], d1, "parallel-transfer", just, ("copy", d2)))
    return [e for e in edges if e is not None]


def pythagoras_rule(model: dsl.HypothesisModel, scene_: sc.Scene,
                    witness: sc.ParamAssignment) -> list[Hyperedge]:
    """Right angles detected at the witness give the three Pythagoras
    edges per triple; point pairs with declared feet on the reference
    axis additionally give the four-source distance-formula edge."""
    w = _Witness(model, scene_, witness)
    edges: list[Optional[Hyperedge]] = []
    for a, b, c in itertools.combinations(w.names, 3):
        if not (w.distinct(a, b) and w.distinct(b, c) and w.distinct(a, c)):
            continue
        for corner, p, r in ((a, b, c), (b, a, c), (c, a, b)):
            u = sc.vsub(w.coords[p], w.coords[corner])
            v = sc.vsub(w.coords[r], w.coords[corner])
            if not sc.perpendicular(u, v):
                continue
            leg1, leg2 = length(corner, p), length(corner, r)
            hyp = length(p, r)
            just = f"the angle at {corner} in triangle {p}{corner}{r} is a right angle"
            edges.append(_edge([leg1, leg2], hyp, "pythagoras", just,
                               ("pyth_hyp", leg1, leg2)))
            edges.append(_edge([hyp, leg1], leg2, "pythagoras", just,
                               ("pyth_leg", hyp, leg1)))
            edges.append(_edge([hyp, leg2], leg1, "pythagoras", just,
                               ("pyth_leg", hyp, leg2)))
    edges.extend(_distance_formula(w))
    return [e for e in edges if e is not None]


def _distance_formula(w: _Witness) -> list[Optional[Hyperedge]]:
    origin = w.model.origin
    edges: list[Optional[Hyperedge]] = []
    feet = {u: w.axis_feet(u) for u in w.off_axis}
    for u1, u2 in itertools.combinations(w.off_axis, 2):
        if not w.distinct(u1, u2):
            continue
        if w.axis_side(u1) != w.axis_side(u2):
            continue
        for v1 in feet[u1]:
            for v2 in feet[u2]:
                if v1 == v2 or not w.distinct(v1, v2):
                    continue
                if origin in (v1, v2):
                    continue
                if not (w.distinct(origin, v1) and w.distinct(origin, v2)):
                    continue
                if w.axis_pos_sign(v1, origin) != w.axis_pos_sign(v2, origin):
                    continue
                d1, d2 = length(origin, v1), length(origin, v2)
                o1, o2 = length(u1, v1), length(u2, v2)
                target = length(u1, u2)
                just = (f"{u1} and {u2} stand over the reference axis at "
                        f"feet {v1} and {v2} with known offsets")
                edges.append(_edge([d1, d2, o1, o2], target, "distance-formula",
                                   just, ("dist4", d1, d2, o1, o2)))
    return edges


def similar_triangles_rule(model: dsl.HypothesisModel, scene_: sc.Scene,
                           witness: sc.ParamAssignment,
                           caps: Caps = DEFAULT_CAPS,
                           report: Optional[list] = None) -> list[Hyperedge]:
    """Triangle pairs whose angle triples agree at the witness.

    Per corresponding side pair the rule emits the ratio-creating edge
    in each triangle, the cross-triangle fused form (sides of one
    triangle give the other's ratio directly), the equal-ratio
    transfer both ways, and the multiply-through edges that turn a
    ratio plus one side into the other side."""
    w = _Witness(model, scene_, witness)
    tris: list[tuple[tuple[str, str, str], tuple[float, float, float]]] = []
    for a, b, c in itertools.combinations(w.names, 3):
        angles = sc.triangle_angles(w.coords[a], w.coords[b], w.coords[c])
        if angles is not None:
            tris.append(((a, b, c), angles))
    edges: list[Optional[Hyperedge]] = []
    scanned = 0
    for (t1, ang1), (t2, ang2) in itertools.combinations(tris, 2):
        scanned += 1
        if scanned > caps.max_pairs:
            if report is not None:
                report.append(
                    f"similar-triangles scan truncated at {caps.max_pairs} "
                    f"triangle pairs")
            break
        for perm in itertools.permutations(range(3)):
            if all(abs(ang1[i] - ang2[perm[i]]) <= 1e-9 for i in range(3)):
                edges.extend(_similarity_edges(t1, t2, perm))
    return [e for e in edges if e is not None]


def _similarity_edges(t1: tuple[str, str, str], t2: tuple[str, str, str],
                      perm: tuple[int, int, int]) -> list[Optional[Hyperedge]]:
    just = f"triangle {''.join(t1)} is similar to triangle {''.join(t2)}"
    sides1 = {}
    sides2 = {}
    for i, j in itertools.combinations(range(3), 2):
        try:
            sides1[(i, j)] = length(t1[i], t1[j])
            sides2[(i, j)] = length(t2[perm[i]], t2[perm[j]])
        except ValueError:
            return []  # shared construction point collapses a side
    corr12 = {sides1[k]: sides2[k] for k in sides1}
    corr21 = {sides2[k]: sides1[k] for k in sides1}
    out: list[Optional[Hyperedge]] = []
    seen_ratio_targets: set[Dim] = set()
    for ka, kb in itertools.combinations(sorted(sides1), 2):
        s1, u1 = sides1[ka], sides1[kb]
        s2, u2 = sides2[ka], sides2[kb]
        if s1 == u1 or s2 == u2:
            continue
        r1, _ = make_ratio(s1, u1)
        r2, _ = make_ratio(s2, u2)
        # creating a ratio from its own sides
        out.append(_edge([s1, u1], r1, "similar-triangles", just,
                         ("div", r1.num, r1.den), subpriority=1))
        out.append(_edge([s2, u2], r2, "similar-triangles", just,
                         ("div", r2.num, r2.den), subpriority=1))
        if r1 != r2:
            # fused: one triangle's sides give the other's ratio
            out.append(_edge([s1, u1], r2, "similar-triangles", just,
                             ("div", corr21[r2.num], corr21[r2.den]), subpriority=0))
            out.append(_edge([s2, u2], r1, "similar-triangles", just,
                             ("div", corr12[r1.num], corr12[r1.den]), subpriority=0))
            # equal-ratio transfer
            flip = (corr12[r1.num], corr12[r1.den]) != (r2.num, r2.den)
            out.append(_edge([r1], r2, "similar-triangles", just,
                             ("inv", r1) if flip else ("copy", r1), subpriority=2))
            out.append(_edge([r2], r1, "similar-triangles", just,
                             ("inv", r2) if flip else ("copy", r2), subpriority=2))
        for r in (r1, r2):
            if r in seen_ratio_targets:
                continue
            seen_ratio_targets.add(r)
            out.append(_edge([r, r.den], r.num, "similar-triangles",
                             f"the ratio {r.display} and the side "
                             f"{r.den.display} determine {r.num.display}",
                             ("mul", r, r.den), subpriority=3))
            out.append(_edge([r, r.num], r.den, "similar-triangles",
                             f"the ratio {r.display} and the side "
                             f"{r.num.display} determine {r.den.display}",
                             ("div", r.num, r), subpriority=3))
    return out


def line_circle_rule(model: dsl.HypothesisModel, scene_: sc.Scene,
                     witness: sc.ParamAssignment) -> list[Hyperedge]:
    """Points cut from a line by a circle whose center sits on the
    reference axis.  When the line is anchored on the axis and aimed at
    an off-axis point with a declared foot, the intersection parameter
    solves a quadratic whose coefficients are known lengths, which
    prices both the cut point's axis position and its height."""
    w = _Witness(model, scene_, witness)
    edges: list[Optional[Hyperedge]] = []
    on_axis = set(w.on_axis)
    for stmt in model.constructions:
        if stmt.kind != "point-construction" or not isinstance(stmt.payload, dsl.MeetCircle):
            continue
        pe = stmt.payload
        z = stmt.name
        anchor_pair = _line_point_pair(pe.line, model)
        if anchor_pair is None:
            continue
        p, q = anchor_pair
        center = pe.center
        if p not in on_axis or center not in on_axis or q in on_axis or z in on_axis:
            continue
        if not (w.distinct(p, q) and w.distinct(p, center)):
            continue
        radius_dim = _radius_dim(pe.radius, scene_)
        if radius_dim is None:
            continue
        qfeet = w.axis_feet(q)
        zfeet = w.axis_feet(z)
        if not qfeet or not zfeet:
            continue
        mode = _pick_mode(pe.pick, p, q)
        if mode is None:
            continue
        fq = qfeet[0]
        nz = zfeet[0]
        if fq == p or nz == p or not w.distinct(fq, p) or not w.distinct(nz, p):
            continue
        # sign of (Q-P).(P-C): the quadratic's linear coefficient is
        # 2*s*PF*PC with both factors positive lengths
        s = w.axis_pos_sign(q, p) * w.axis_pos_sign(p, center)
        pq, pc = length(p, q), length(p, center)
        pf, qf = length(p, fq), length(q, fq)
        bond = f"lc:{z}"
        just = (f"{z} is cut from the line {p}{q} by the circle about "
                f"{center} with radius {radius_dim.display}")
        foot_target = length(p, nz)
        edges.append(_edge([pq, pc, pf, radius_dim], foot_target, "line-circle",
                           just, ("lc", pq, pc, pf, radius_dim, None, s, mode, "foot"),
                           bond=bond))
        perp_target = length(z, nz)
        edges.append(_edge([pq, pc, pf, radius_dim, qf], perp_target, "line-circle",
                           just, ("lc", pq, pc, pf, radius_dim, qf, s, mode, "perp"),
                           bond=bond))
    checked = []
    for e in edges:
        if e is None:
            continue
        try:
            got = apply_edge(e, {d: w.value(d) for d in e.sources})
        except (NumericFailure, sc.GeometryError):
            continue
        if rel_err(got, w.value(e.target)) <= 1e-9:
            checked.append(e)
    return checked


def _line_point_pair(arg: dsl.LineArg, model: dsl.HypothesisModel
                     ) -> Optional[tuple[str, str]]:
    if isinstance(arg, dsl.LineRef):
        for s in model.constructions:
            if s.kind == "line-construction" and s.name == arg.name:
                return _line_point_pair(s.payload, model)
        return None
    if isinstance(arg, (dsl.ThroughPoints, dsl.ExtendRay)):
        return (arg.p, arg.q)
    return None


def _radius_dim(radius: dsl.Expr, scene_: sc.Scene) -> Optional[Dim]:
    if isinstance(radius, dsl.LenExpr):
        if radius.p == radius.q:
            return None
        return length(radius.p, radius.q)
    if isinstance(radius, dsl.NameRef):
        for param, pair in scene_.param_dims:
            if param == radius.name:
                return length(*pair)
    return None


def _pick_mode(pick: dsl.Pick, p: str, q: str) -> Optional[str]:
    if isinstance(pick, dsl.PickFirst):
        return "first"
    if isinstance(pick, dsl.PickSecond):
        return "second"
    if isinstance(pick, dsl.PickWithinSegment) and {pick.p, pick.q} == {p, q}:
        return "unit"
    return None


def ratio_solve_rule(known_ratios: list[tuple[Dim, Scalar]],
                     known_lengths: list[tuple[Dim, Scalar]]) -> list[Hyperedge]:
    """Linear moves on ratios: a ratio plus one of its sides gives the
    other side, and a plain/composite ratio pair that is linear in two
    unknown lengths solves for both (2x2 elimination)."""
    edges: list[Optional[Hyperedge]] = []
    known_length_dims = {d for d, _ in known_lengths}
    plain = []
    comps = []
    for r, val in known_ratios:
        if r.kind != "ratio":
            continue
        if r.num.kind == "length" and r.den.kind == "length":
            plain.append((r, val))
            edges.append(_edge([r, r.den], r.num, "ratio-solve",
                               f"the ratio {r.display} and the side "
                               f"{r.den.display} determine {r.num.display}",
                               ("mul", r, r.den), subpriority=1))
            edges.append(_edge([r, r.num], r.den, "ratio-solve",
                               f"the ratio {r.display} and the side "
                               f"{r.num.display} determine {r.den.display}",
                               ("div", r.num, r), subpriority=1))
        elif r.num.kind == "composite" and r.den.kind == "length":
            comps.append((r, val))
    for (r2, v2) in comps:
        m_dim = length(*r2.num.far)
        s_dim = length(*r2.num.near)
        z_dim = r2.den
        if m_dim not in known_length_dims:
            continue
        if s_dim == z_dim:
            continue
        for (r1, v1) in plain:
            if {r1.num, r1.den} != {s_dim, z_dim}:
                continue
            r1_num_is_s = r1.num == s_dim
            # unknowns S and Z: S + r2*Z = M, and S = r1*Z or Z = r1*S
            det = add(mul(v1, Fraction(1)), v2) if r1_num_is_s else \
                add(Fraction(1), mul(v1, v2))
            if abs(as_float(det)) < 1e-9:
                continue  # singular at the witness; not solvable
            bond = f"solve2:{r1.display}:{r2.display}"
            just = (f"solve {s_dim.display} and {z_dim.display} from "
                    f"{r1.display} and {r2.display} given {m_dim.display}")
            srcs = [r1, r2, m_dim]
            edges.append(_edge(srcs, s_dim, "ratio-solve", just,
                               ("solve2", r1, r2, m_dim, r1_num_is_s, "S"),
                               subpriority=0, bond=bond))
            edges.append(_edge(srcs, z_dim, "ratio-solve", just,
                               ("solve2", r1, r2, m_dim, r1_num_is_s, "Z"),
                               subpriority=0, bond=bond))
    return [e for e in edges if e is not None]


# ---------------------------------------------------------------------------
# recipe execution


def apply_edge(edge: Hyperedge, values: dict[Dim, Scalar]) -> Scalar:
    """Compute the edge's target from source values by its formula."""
    try:
        return _apply(edge.recipe, values)
    except ZeroDivisionError:
        raise NumericFailure(f"division by zero computing {edge.target.display}") from None
    except ValueError:
        raise NumericFailure(f"negative radicand computing {edge.target.display}") from None


def _apply(recipe: tuple, v: dict[Dim, Scalar]) -> Scalar:
    op = recipe[0]
    if op == "copy":
        return v[recipe[1]]
    if op == "inv":
        return div(Fraction(1), v[recipe[1]])
    if op == "add":
        return add(v[recipe[1]], v[recipe[2]])
    if op == "sub":
        out = sub(v[recipe[1]], v[recipe[2]])
        if as_float(out) < 0:
            raise NumericFailure("length difference came out negative")
        return out
    if op == "mul":
        return mul(v[recipe[1]], v[recipe[2]])
    if op == "div":
        return div(v[recipe[1]], v[recipe[2]])
    if op == "pyth_hyp":
        a, b = v[recipe[1]], v[recipe[2]]
        return sqrt_scalar(add(mul(a, a), mul(b, b)))
    if op == "pyth_leg":
        c, a = v[recipe[1]], v[recipe[2]]
        rad = sub(mul(c, c), mul(a, a))
        if as_float(rad) < 0:
            raise NumericFailure("hypotenuse shorter than a leg")
        return sqrt_scalar(rad)
    if op == "dist4":
        d1, d2 = v[recipe[1]], v[recipe[2]]
        o1, o2 = v[recipe[3]], v[recipe[4]]
        dd, oo = sub(d1, d2), sub(o1, o2)
        return sqrt_scalar(add(mul(dd, dd), mul(oo, oo)))
    if op == "solve2":
        return _apply_solve2(recipe, v)
    if op == "lc":
        return _apply_line_circle(recipe, v)
    raise AssertionError(f"unknown recipe op {op!r}")


def _apply_solve2(recipe: tuple, v: dict[Dim, Scalar]) -> Scalar:
    _, r1d, r2d, md, r1_num_is_s, want = recipe
    r1, r2, m = v[r1d], v[r2d], v[md]
    if r1_num_is_s:
        # S = r1*Z and S + r2*Z = M  =>  Z = M/(r1+r2)
        det = add(r1, r2)
        if as_float(det) == 0:
            raise NumericFailure("singular ratio system")
        z = div(m, det)
        s = mul(r1, z)
    else:
        # Z = r1*S and S + r2*Z = M  =>  S = M/(1+r1*r2)
        det = add(Fraction(1), mul(r1, r2))
        if as_float(det) == 0:
            raise NumericFailure("singular ratio system")
        s = div(m, det)
        z = mul(r1, s)
    out = s if want == "S" else z
    if as_float(out) < 0:
        raise NumericFailure("ratio system solved to a negative length")
    return out


def _apply_line_circle(recipe: tuple, v: dict[Dim, Scalar]) -> Scalar:
    _, pqd, pcd, pfd, rd, qfd, s, mode, which = recipe
    pq, pc, pf, r = v[pqd], v[pcd], v[pfd], v[rd]
    qa = mul(pq, pq)
    qb = mul(Fraction(2 * s), mul(pc, pf))
    qc = sub(mul(pc, pc), mul(r, r))
    disc = sub(mul(qb, qb), mul(mul(Fraction(4), qa), qc))
    if as_float(disc) < 0:
        raise NumericFailure("line misses the circle at this sample")
    root = sqrt_scalar(disc)
    two_a = mul(Fraction(2), qa)
    t1 = div(sub(sub(Fraction(0), qb), root), two_a)
    t2 = div(add(sub(Fraction(0), qb), root), two_a)
    if as_float(t1) > as_float(t2):
        t1, t2 = t2, t1
    if mode == "first":
        t = t1
    elif mode == "second":
        t = t2
    else:
        inside = [t for t in (t1, t2) if 0 < as_float(t) < 1]
        if len(inside) != 1:
            raise NumericFailure("root selection inside the segment is ambiguous")
        t = inside[0]
    if as_float(t) < 0:
        t = sub(Fraction(0), t)
    return mul(t, pf if which == "foot" else v[qfd])


# ---------------------------------------------------------------------------
# discovery and cross-sample validation


def discover(model: dsl.HypothesisModel, scene_: sc.Scene,
             witness: sc.ParamAssignment, caps: Caps = DEFAULT_CAPS,
             report: Optional[list] = None) -> list[Hyperedge]:
    """Union of all rule outputs, deduplicated and deterministically
    ordered, with group labels assigned.  Ratio-dependent rules rerun
    until the edge set stops growing."""
    w = _Witness(model, scene_, witness)
    pool: list[Hyperedge] = []
    pool.extend(segment_chain_rule(model, scene_, witness))
    pool.extend(parallel_transfer_rule(model, scene_, witness))
    pool.extend(pythagoras_rule(model, scene_, witness))
    pool.extend(similar_triangles_rule(model, scene_, witness, caps, report))
    pool.extend(line_circle_rule(model, scene_, witness))

    for _round in range(6):
        dims = _all_dims(pool)
        ratio_dims = sorted((d for d in dims if d.kind == "ratio"),
                            key=lambda d: d.display)
        length_dims = sorted((d for d in dims if d.kind == "length"),
                             key=lambda d: d.display)
        known_ratios = _with_values(w, ratio_dims)
        known_lengths = _with_values(w, length_dims)
        fresh = ratio_solve_rule(known_ratios, known_lengths)
        fresh += segment_chain_rule(model, scene_, witness,
                                    ratio_dims=tuple(r for r, _ in known_ratios))
        before = len({e.key() for e in pool})
        pool.extend(fresh)
        after = len({e.key() for e in pool})
        if after == before:
            break

    ordered = finalize(pool)
    if len(ordered) > caps.max_edges:
        if report is not None:
            report.append(
                f"edge list truncated from {len(ordered)} to {caps.max_edges}")
        ordered = ordered[:caps.max_edges]
    return ordered


def _all_dims(edges: list[Hyperedge]) -> set[Dim]:
    out: set[Dim] = set()
    for e in edges:
        out.add(e.target)
        out.update(e.sources)
    return out


def _with_values(w: _Witness, dims) -> list[tuple[Dim, Scalar]]:
    out = []
    for d in dims:
        try:
            out.append((d, w.value(d)))
        except (sc.DivisionByZero, ZeroDivisionError):
            continue
    return out


def validate_edges(edges: list[Hyperedge], model: dsl.HypothesisModel,
                   scene_: sc.Scene, seed: int, samples: int = 20,
                   tol: float = 1e-9) -> list[Hyperedge]:
    """Replay every edge at fresh samples and drop any whose formula
    fails to reproduce the oracle value of its target; this is what
    catches relations that only held by coincidence at the witness."""
    assignments = [sc.sample_params(scene_, seed * 7919 + j) for j in range(samples)]
    evaluations = [sc.evaluate(scene_, a) for a in assignments]
    kept = []
    for e in edges:
        ok = True
        for ev in evaluations:
            try:
                vals = {d: sc._dim_value(ev, d) for d in e.sources}
                got = apply_edge(e, vals)
                want = sc._dim_value(ev, e.target)
            except (NumericFailure, sc.GeometryError, ZeroDivisionError):
                ok = False
                break
            if rel_err(got, want) > tol:
                ok = False
                break
        if ok:
            kept.append(e)
    return kept
