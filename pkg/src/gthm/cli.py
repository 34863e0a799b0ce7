"""Command-line front door: parse, grow, schedule, verify, render.

Three commands share one pipeline:

* prove  runs it end to end and prints the proof script (or JSON, DOT,
         or the sampled scene);
* graph  prints the grown derivation graph as DOT, schedule-annotated
         when a schedule exists;
* check  skips derivation entirely and judges the claim by coordinate
         sampling alone.

Exit status encodes the verdict: 0 PROVED, 1 REFUTED, 2 INCONCLUSIVE,
3 input or usage error.  Fixed input, flags, and seed give
byte-identical output.
"""

from __future__ import annotations

import argparse
import os
import sys
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path
from typing import Optional

from . import dsl, emit, graph as gr, scene as sc, verify as vf
from .rules import Caps

EXIT_PROVED = 0
EXIT_REFUTED = 1
EXIT_INCONCLUSIVE = 2
EXIT_INPUT_ERROR = 3

_STATUS_EXIT = {vf.STATUS_PROVED: EXIT_PROVED,
                vf.STATUS_REFUTED: EXIT_REFUTED,
                vf.STATUS_INCONCLUSIVE: EXIT_INCONCLUSIVE}

_EMIT_CHOICES = {"prove": ("text", "json", "dot", "scene"),
                 "graph": ("dot",),
                 "check": ("text", "json")}


@dataclass(frozen=True)
class RunConfig:
    input_path: Path
    seed: int = 42
    samples: int = 100
    tol: float = 1e-9
    caps: Caps = Caps()
    emit_format: str = "text"
    rng_range: tuple[Fraction, Fraction] = (Fraction(1), Fraction(10))


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    # argparse exits 2 on bad flags; the contract reserves 2 for
    # INCONCLUSIVE, so route usage problems through exit 3 instead
    def error(self, message):
        raise UsageError(message)


def _parse_range(text: str) -> tuple[Fraction, Fraction]:
    lo_text, sep, hi_text = text.partition(":")
    if not sep:
        raise UsageError(f"--range wants LO:HI, got {text!r}")
    try:
        lo, hi = Fraction(lo_text), Fraction(hi_text)
    except (ValueError, ZeroDivisionError):
        raise UsageError(f"--range bounds must be rational, got {text!r}")
    if not 0 < lo < hi:
        raise UsageError(f"--range wants 0 < LO < HI, got {text!r}")
    return lo, hi


def _env_seed() -> int:
    raw = os.environ.get("GRAATP_SEED")
    if raw is None:
        return 42
    try:
        return int(raw)
    except ValueError:
        raise UsageError(f"GRAATP_SEED must be an integer, got {raw!r}")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="gthm",
                     description="derive and check plane-geometry claims")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, help_text in (("prove", "derive the claim and print a proof"),
                            ("graph", "print the derivation graph as DOT"),
                            ("check", "sample the claim from coordinates")):
        p = sub.add_parser(name, help=help_text)
        p.add_argument("input", help="hypothesis file (.gthm)")
        p.add_argument("--seed", type=int, default=None,
                       help="sampling seed (default: $GRAATP_SEED or 42)")
        p.add_argument("--samples", type=int, default=100)
        p.add_argument("--tol", type=float, default=1e-9)
        p.add_argument("--max-nodes", type=int, default=512)
        p.add_argument("--max-edges", type=int, default=4096)
        p.add_argument("--max-pairs", type=int, default=10000)
        p.add_argument("--emit", default=None,
                       choices=("text", "json", "dot", "scene"))
        p.add_argument("--range", default="1:10", metavar="LO:HI",
                       help="parameter sampling range")
    return parser


def _config(args) -> RunConfig:
    emit_format = args.emit or _EMIT_CHOICES[args.command][0]
    if emit_format not in _EMIT_CHOICES[args.command]:
        raise UsageError(
            f"{args.command} cannot emit {emit_format!r}; choose from "
            f"{', '.join(_EMIT_CHOICES[args.command])}")
    if args.samples < 1:
        raise UsageError("--samples must be at least 1")
    if not args.tol > 0:
        raise UsageError("--tol must be positive")
    if min(args.max_nodes, args.max_edges, args.max_pairs) < 1:
        raise UsageError("caps must be positive")
    seed = args.seed if args.seed is not None else _env_seed()
    return RunConfig(input_path=Path(args.input), seed=seed,
                     samples=args.samples, tol=args.tol,
                     caps=Caps(args.max_nodes, args.max_edges,
                               args.max_pairs),
                     emit_format=emit_format,
                     rng_range=_parse_range(args.range))


def _load_model(cfg: RunConfig):
    text = cfg.input_path.read_text()
    name = str(cfg.input_path)
    return dsl.validate(dsl.parse(text, name), name)


def _derive(cfg: RunConfig, model):
    """Grow the graph and schedule it; None parts where impossible."""
    scene_ = sc.build_scene(model)
    witness = sc.sample_params(scene_, cfg.seed, cfg.rng_range)
    g = gr.grow_detailed(model, scene_, witness, caps=cfg.caps,
                         seed=cfg.seed)
    schedule = gr.topo_order(g)
    focused = gr.focus(g, schedule) if schedule is not None else None
    complete = focused is not None and not g.pending
    return scene_, g, focused, complete


def cmd_prove(cfg: RunConfig) -> int:
    model = _load_model(cfg)
    theorem = cfg.input_path.stem
    try:
        scene_, g, focused, complete = _derive(cfg, model)
        v = vf.verdict(model, scene_, g if complete else None,
                       focused if complete else None,
                       num_samples=cfg.samples, seed=cfg.seed, tol=cfg.tol,
                       rng_range=cfg.rng_range)
    except sc.DegenerateModel as err:
        v = vf.Verdict(status=vf.STATUS_INCONCLUSIVE, samples=(),
                       reason=f"degenerate hypotheses: {err}")
        sys.stdout.write(emit.render_text(model, None, v, theorem))
        return EXIT_INCONCLUSIVE
    if cfg.emit_format == "text":
        out = emit.render_text(model, focused if complete else None, v,
                               theorem)
    elif cfg.emit_format == "json":
        out = emit.render_json(model, focused if complete else None, v,
                               theorem)
    elif cfg.emit_format == "dot":
        out = emit.render_dot(g, focused)
    else:
        witness = sc.sample_params(scene_, cfg.seed, cfg.rng_range)
        out = emit.render_scene(model, scene_, witness, theorem)
    sys.stdout.write(out)
    return _STATUS_EXIT[v.status]


def cmd_graph(cfg: RunConfig) -> int:
    model = _load_model(cfg)
    try:
        scene_, g, focused, complete = _derive(cfg, model)
        v = vf.verdict(model, scene_, g if complete else None,
                       focused if complete else None,
                       num_samples=cfg.samples, seed=cfg.seed, tol=cfg.tol,
                       rng_range=cfg.rng_range)
    except sc.DegenerateModel as err:
        sys.stderr.write(f"gthm: degenerate hypotheses: {err}\n")
        return EXIT_INCONCLUSIVE
    sys.stdout.write(emit.render_dot(g, focused))
    return _STATUS_EXIT[v.status]


def cmd_check(cfg: RunConfig) -> int:
    model = _load_model(cfg)
    theorem = cfg.input_path.stem
    scene_ = sc.build_scene(model)
    try:
        v = vf.oracle_verdict(model, scene_, num_samples=cfg.samples,
                              seed=cfg.seed, tol=cfg.tol,
                              rng_range=cfg.rng_range)
    except sc.DegenerateModel as err:
        v = vf.Verdict(status=vf.STATUS_INCONCLUSIVE, samples=(),
                       reason=f"degenerate hypotheses: {err}")
    if cfg.emit_format == "json":
        out = emit.render_json(model, None, v, theorem)
    else:
        out = emit.render_text(model, None, v, theorem)
    sys.stdout.write(out)
    return _STATUS_EXIT[v.status]


_COMMANDS = {"prove": cmd_prove, "graph": cmd_graph, "check": cmd_check}


def main(argv: Optional[list[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        cfg = _config(args)
        return _COMMANDS[args.command](cfg)
    except UsageError as err:
        sys.stderr.write(f"gthm: {err}\n")
        return EXIT_INPUT_ERROR
    except OSError as err:
        sys.stderr.write(f"gthm: cannot read input: {err}\n")
        return EXIT_INPUT_ERROR
    except dsl.DslError as err:
        sys.stderr.write(f"gthm: {err}\n")
        return EXIT_INPUT_ERROR
    except sc.GeometryError as err:
        sys.stderr.write(f"gthm: bad construction: {err}\n")
        return EXIT_INPUT_ERROR


if __name__ == "__main__":
    raise SystemExit(main())
