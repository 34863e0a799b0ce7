#!/usr/bin/env python3
"""The three ways a run can end without a proof.

A claim can be wrong (REFUTED), true but underivable by the rule set
(INCONCLUSIVE with no schedule), or posed over a figure that cannot
even be drawn (INCONCLUSIVE, degenerate).  This script shows one
fixture for each ending.

    python demos/endings.py
"""

from pathlib import Path

from gthm import dsl, emit, graph, scene, verify

FIXTURES = Path(__file__).resolve().parent.parent / "fixtures"


def run(name):
    print("=" * 64)
    print(name)
    print("=" * 64)
    source = (FIXTURES / name).read_text()
    model = dsl.validate(dsl.parse(source, name), name)
    scn = scene.build_scene(model)
    try:
        witness = scene.sample_params(scn, seed=42)
    except scene.DegenerateModel as err:
        print(f"cannot draw the figure: {err}")
        print("verdict: INCONCLUSIVE (degenerate hypotheses)")
        print()
        return
    g = graph.grow(model, scn, witness, seed=42)
    if g is None:
        detailed = graph.grow_detailed(model, scn, witness, seed=42)
        print("claim dimensions never reached:",
              ", ".join(d.display for d in detailed.pending))
        ok = verify.oracle_verdict(model, scn, num_samples=50, seed=42)
        print(f"coordinates alone say the claim is {ok.status}, "
              f"but there is no derivation to certify it")
        v = verify.verdict(model, scn, None, None)
        print(f"verdict: {v.status} ({v.reason})")
        print()
        return
    focused = graph.focus(g, graph.topo_order(g))
    v = verify.verdict(model, scn, g, focused, num_samples=100, seed=42)
    worst = max(r.claim_residual for r in v.samples)
    print(f"claim: {emit.claim_text(model)}")
    print(f"verdict: {v.status} ({v.reason})")
    print(f"worst claim residual across samples: {worst:g}")
    print()


# a false claim over a perfectly good figure
run("parallelogram_bad.gthm")

# a true claim whose target segment no rule can price
run("unreachable.gthm")

# a figure that cannot exist at any parameter assignment
run("degenerate.gthm")
