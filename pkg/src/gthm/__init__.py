"""Automated plane-geometry prover over a derivation hypergraph.

A theorem file declares free parameters, a ruler-and-compass style
construction, and one claim about segment lengths.  The prover samples
a random figure, discovers arithmetic rules relating its dimensions,
grows an AND-OR derivation graph from the parameters, schedules it
topologically, and then replays the schedule at many fresh random
figures, cross-checking every value against direct coordinate
computation.  Claims that survive come back PROVED with a proof
script; wrong claims come back REFUTED with the offending samples.

    from gthm import prove_file
    result = prove_file("fixtures/parallelogram.gthm")
    assert result.verdict.status == "PROVED"
    print(result.text)
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path
from typing import Optional

from . import dsl, emit, graph, rules, scene, verify
from .verify import Verdict

__all__ = ["dsl", "scene", "rules", "graph", "verify", "emit",
           "ProofResult", "prove_file", "prove_text", "Verdict"]

__version__ = "0.1.0"


@dataclass(frozen=True)
class ProofResult:
    """Everything the pipeline produced for one theorem file."""

    model: dsl.HypothesisModel
    graph: Optional[graph.DerivationGraph]
    schedule: Optional[tuple]
    verdict: Verdict
    text: str


def prove_text(source: str, name: str = "<input>", seed: int = 42,
               samples: int = 100, tol: float = 1e-9) -> ProofResult:
    """Run the whole pipeline on theorem source text."""
    model = dsl.validate(dsl.parse(source, name), name)
    scene_ = scene.build_scene(model)
    witness = scene.sample_params(scene_, seed)
    g = graph.grow_detailed(model, scene_, witness, seed=seed)
    full = graph.topo_order(g)
    focused = graph.focus(g, full) if full is not None else None
    complete = focused is not None and not g.pending
    v = verify.verdict(model, scene_, g if complete else None,
                       focused if complete else None,
                       num_samples=samples, seed=seed, tol=tol)
    text = emit.render_text(model, focused if complete else None, v,
                            theorem=name)
    return ProofResult(model=model, graph=g,
                       schedule=tuple(focused) if complete else None,
                       verdict=v, text=text)


def prove_file(path, seed: int = 42, samples: int = 100,
               tol: float = 1e-9) -> ProofResult:
    """Run the whole pipeline on a .gthm file."""
    p = Path(path)
    return prove_text(p.read_text(), name=p.stem, seed=seed,
                      samples=samples, tol=tol)
