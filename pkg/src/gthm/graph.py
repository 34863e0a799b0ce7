"""Derivation graph growth and scheduling.

Nodes are dimensions, hyperedges are validated rule instances.  The
graph grows by forward closure from the parameter dimensions; a goal
that closure never reaches is reported as pending.  Scheduling is a
Kahn-style topological sweep generalized to hyperedges: a node becomes
ready once any one of its in-edges has every source scheduled, nodes
pop in (admission index, name) order, and each popped node commits to
the smallest-labeled in-edge that is fully sourced at that moment.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

from . import dsl, scene as sc
from .rules import (Caps, DEFAULT_CAPS, Dim, Hyperedge, discover, length,
                    validate_edges)


@dataclass(frozen=True)
class Node:
    dim: Dim
    index: int  # admission order; parameters first, then goals, then derived
    is_param: bool = False
    is_goal: bool = False


@dataclass(frozen=True)
class ScheduleStep:
    dim: Dim
    edge: Optional[Hyperedge]  # None for parameter seeds


@dataclass
class DerivationGraph:
    model: dsl.HypothesisModel
    nodes: dict[Dim, Node]
    edges: list[Hyperedge]  # admitted, in label order
    goals: tuple[Dim, ...]
    pending: tuple[Dim, ...]  # goals forward closure never reached
    reports: list[str] = field(default_factory=list)

    @property
    def param_dims(self) -> tuple[Dim, ...]:
        return tuple(n.dim for n in sorted(self.nodes.values(), key=lambda n: n.index)
                     if n.is_param)

    def in_edges(self, dim: Dim) -> list[Hyperedge]:
        return [e for e in self.edges if e.target == dim]


def goal_dims(model: dsl.HypothesisModel) -> tuple[Dim, ...]:
    """Claim dimensions in source order, left side before right."""
    out: list[Dim] = []
    for claim in model.claims:
        eq = claim.payload
        for term in (*eq.lhs, *eq.rhs):
            d = length(term.p, term.q)
            if d not in out:
                out.append(d)
    return tuple(out)


def grow_detailed(model: dsl.HypothesisModel, scene_: sc.Scene,
                  witness: sc.ParamAssignment, caps: Caps = DEFAULT_CAPS,
                  seed: int = 42) -> DerivationGraph:
    """Forward closure from the parameters, kept even when a goal is
    unreachable so the partial graph can be inspected."""
    reports: list[str] = []
    pool = discover(model, scene_, witness, caps, report=reports)
    pool = validate_edges(pool, model, scene_, seed)

    params = tuple(length(*pair) for _, pair in scene_.param_dims)
    goals = goal_dims(model)
    goal_set = set(goals)
    nodes: dict[Dim, Node] = {}
    for d in params:
        nodes[d] = Node(dim=d, index=len(nodes), is_param=True,
                        is_goal=d in goal_set)

    param_set = set(params)
    known: set[Dim] = set(params)
    admitted: list[Hyperedge] = []
    admitted_keys: set = set()
    capped = False
    while True:
        # strict BFS ring: only edges sourced entirely in earlier rings
        # fire now, so node indices reflect hop distance from the params
        ring_sources = set(known)
        progress = False
        for e in pool:
            if capped:
                break
            if e.key() in admitted_keys or e.target in param_set:
                continue
            if not all(s in ring_sources for s in e.sources):
                continue
            admitted.append(e)
            admitted_keys.add(e.key())
            progress = True
            if e.target not in known:
                if e.target not in nodes:
                    if len(nodes) >= caps.max_nodes:
                        reports.append(
                            f"node admission stopped at the {caps.max_nodes} cap")
                        capped = True
                        break
                    # index records first reach, so goal nodes sort by
                    # when the closure actually derived them
                    nodes[e.target] = Node(dim=e.target, index=len(nodes),
                                           is_goal=e.target in goal_set)
                known.add(e.target)
        if capped or not progress or all(g in known for g in goals):
            break

    pending = tuple(g for g in goals if g not in known)
    for g in pending:
        if g not in nodes:
            nodes[g] = Node(dim=g, index=len(nodes), is_goal=True)
    return DerivationGraph(model=model, nodes=nodes, edges=admitted,
                           goals=goals, pending=pending, reports=reports)


def grow(model: dsl.HypothesisModel, scene_: sc.Scene,
         witness: sc.ParamAssignment, caps: Caps = DEFAULT_CAPS,
         seed: int = 42) -> Optional[DerivationGraph]:
    """The derivation graph, or None when some goal is underivable."""
    g = grow_detailed(model, scene_, witness, caps, seed)
    return None if g.pending else g


def topo_order(graph: DerivationGraph) -> Optional[list[ScheduleStep]]:
    """Schedule every derivable node, or None when some goal the graph
    claims reachable cannot be covered.  Parameters come first in
    declaration order, then the hyperedge sweep described in the
    module docstring."""
    scheduled: set[Dim] = set()
    steps: list[ScheduleStep] = []
    for d in graph.param_dims:
        steps.append(ScheduleStep(dim=d, edge=None))
        scheduled.add(d)

    in_edges: dict[Dim, list[Hyperedge]] = {}
    for e in graph.edges:
        in_edges.setdefault(e.target, []).append(e)

    remaining = {d for d in in_edges if d not in scheduled}
    while remaining:
        ready = [d for d in remaining
                 if any(all(s in scheduled for s in e.sources) for e in in_edges[d])]
        if not ready:
            break
        nxt = min(ready, key=lambda d: (graph.nodes[d].index, d.display))
        sourced = [e for e in in_edges[nxt]
                   if all(s in scheduled for s in e.sources)]
        chosen = min(sourced, key=lambda e: e.group)
        steps.append(ScheduleStep(dim=nxt, edge=chosen))
        scheduled.add(nxt)
        remaining.discard(nxt)
    if any(g not in scheduled for g in graph.goals if g not in graph.pending):
        return None
    return steps


def focus(graph: DerivationGraph, schedule: list[ScheduleStep]) -> list[ScheduleStep]:
    """Prune the schedule to the goals' ancestors along chosen edges."""
    need: set[Dim] = {g for g in graph.goals if g not in graph.pending}
    for step in reversed(schedule):
        if step.dim in need and step.edge is not None:
            need.update(step.edge.sources)
    return [s for s in schedule if s.dim in need]


def covers(schedule: list[ScheduleStep]) -> set[Dim]:
    return {s.dim for s in schedule}


def validate_schedule(graph: DerivationGraph,
                      schedule: list[ScheduleStep]) -> bool:
    """Every step's edge must be sourced by earlier steps, and every
    derivable goal must appear."""
    seen: set[Dim] = set()
    for step in schedule:
        if step.edge is not None:
            if step.edge.target != step.dim:
                return False
            if not all(s in seen for s in step.edge.sources):
                return False
        if step.dim in seen:
            return False
        seen.add(step.dim)
    return all(g in seen for g in graph.goals if g not in graph.pending)


# ---------------------------------------------------------------------------
# DOT rendering


def _dot_quote(s: str) -> str:
    return '"' + s.replace('"', '\\"') + '"'


def to_dot(graph: DerivationGraph,
           schedule: Optional[list[ScheduleStep]] = None) -> str:
    """Graphviz text.  Hyperedges with several sources meet at a small
    junction vertex carrying the group label; parameter nodes are gray,
    unreachable goals are dashed."""
    order = {step.dim: i for i, step in enumerate(schedule or [])}
    keep = covers(schedule) if schedule is not None else set(graph.nodes)
    lines = ["digraph derivation {", "  rankdir=LR;",
             '  node [shape=box, fontname="Helvetica"];']
    for node in sorted(graph.nodes.values(), key=lambda n: n.index):
        if node.dim not in keep and node.dim not in graph.pending:
            continue
        attrs = []
        label = node.dim.display
        if schedule is not None and node.dim in order:
            label = f"{order[node.dim] + 1}: {label}"
        attrs.append(f"label={_dot_quote(label)}")
        if node.is_param:
            attrs.append("style=filled, fillcolor=gray85")
        if node.dim in graph.pending:
            attrs.append("style=dashed, color=red")
        elif node.is_goal:
            attrs.append("peripheries=2")
        lines.append(f"  {_dot_quote(node.dim.display)} [{', '.join(attrs)}];")
    chosen = None
    if schedule is not None:
        chosen = [s.edge for s in schedule if s.edge is not None]
    for e in (chosen if chosen is not None else graph.edges):
        if e.target not in keep or any(s not in keep for s in e.sources):
            continue
        tgt = _dot_quote(e.target.display)
        if len(e.sources) == 1:
            src = _dot_quote(e.sources[0].display)
            lines.append(f"  {src} -> {tgt} [label=\"{e.group}\"];")
        else:
            j = f"j{e.group}_{e.target.display}"
            lines.append(f"  {_dot_quote(j)} [shape=point, width=0.05, "
                         f"xlabel=\"{e.group}\"];")
            for s in e.sources:
                lines.append(f"  {_dot_quote(s.display)} -> {_dot_quote(j)} "
                             f"[arrowhead=none];")
            lines.append(f"  {_dot_quote(j)} -> {tgt};")
    lines.append("}")
    return "\n".join(lines) + "\n"
