"""Command-line interface.  Every command prints one JSON object.

Exit codes: 0 on success, 2 for invalid input, 3 when an internal
invariant fails.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path

from . import picard, ranks, weights
from .curves import StableGraph, WeightAssignment, check, enumerate_stable_graphs, smooth_graph
from .errors import ConfBlocksError, InputError, InvariantError
from .fusion import FusionTable, LevelContext, WeightPartition, default_table, install_table

log = logging.getLogger("confblocks")


@dataclass
class JobSpec:
    command: str
    documents: dict[str, list] = field(default_factory=dict)  # flag name -> raw values
    output: str | None = None
    cache_dir: str | None = None
    verbosity: int = 0

    def validate(self) -> None:
        for name, values in self.documents.items():
            if name != "graph" and len(values) > 1:
                raise InputError(f"--{name} given more than once")
        if self.cache_dir is not None:
            path = Path(self.cache_dir)
            path.mkdir(parents=True, exist_ok=True)
            if not os.access(path, os.W_OK):
                raise InputError(f"cache directory {path} is not writable")


def load_document(value: str):
    """Parse ``value`` as inline JSON, or read it as a path to a JSON file."""
    text = value
    stripped = value.lstrip()
    if not stripped.startswith(("{", "[")):
        try:
            text = Path(value).read_text()
        except OSError as exc:
            raise InputError(f"cannot read {value}: {exc.strerror}") from None
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise InputError(f"invalid JSON in {value[:40]!r}: {exc.msg}") from None


def _stringify(obj):
    if isinstance(obj, bool) or obj is None or isinstance(obj, str):
        return obj
    if isinstance(obj, int):
        return str(obj)
    if isinstance(obj, Fraction):
        return f"{obj.numerator}/{obj.denominator}"
    if isinstance(obj, dict):
        return {str(k): _stringify(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_stringify(x) for x in obj]
    raise InvariantError(f"unserializable value {obj!r}")


# -- fusion cache --------------------------------------------------------------------


def _cache_path(cache_dir: str, ctx: LevelContext) -> Path:
    return Path(cache_dir) / f"fusion-r{ctx.r}-l{ctx.level}.json"


def _load_cache(job: JobSpec, ctx: LevelContext) -> None:
    if job.cache_dir is None:
        return
    path = _cache_path(job.cache_dir, ctx)
    if path.exists():
        install_table(FusionTable.load(path))
        log.info("loaded fusion table %s", path)


def _save_cache(job: JobSpec, ctx: LevelContext) -> None:
    if job.cache_dir is not None:
        default_table(ctx).save(_cache_path(job.cache_dir, ctx))


def _require(args, *names):
    missing = [n for n in names if getattr(args, n) is None]
    if missing:
        raise InputError("missing required option(s): " + ", ".join("--" + m.replace("_", "-") for m in missing))


def _graphs(args) -> list[StableGraph]:
    out = []
    for raw in args.graph or ():
        doc = load_document(raw)
        for item in doc if isinstance(doc, list) else [doc]:
            try:
                out.append(StableGraph.from_json(item))
            except ConfBlocksError:
                raise
            except (TypeError, KeyError, ValueError, AttributeError) as exc:
                raise InputError(f"malformed graph document: {exc}") from None
    return out


def _weight_list(doc, r: int) -> list[WeightPartition]:
    if isinstance(doc, dict):
        doc = doc.get("weights", doc)
    if not isinstance(doc, list):
        raise InputError("weights must be a list of partitions")
    try:
        return [WeightPartition.of(tuple(int(x) for x in w), r) for w in doc]
    except (TypeError, ValueError) as exc:
        if isinstance(exc, ConfBlocksError):
            raise
        raise InputError(f"malformed weights: {exc}") from None


# -- commands ------------------------------------------------------------------------


def cmd_rank(args, job: JobSpec) -> dict:
    _require(args, "rank", "level")
    ctx = LevelContext(args.rank, args.level)
    _load_cache(job, ctx)
    graphs = _graphs(args)
    if len(graphs) > 1:
        raise InputError("rank takes a single graph")
    wdoc = load_document(args.weights) if args.weights else None
    if graphs:
        graph = check(graphs[0])
        if wdoc is not None:
            ws = _weight_list(wdoc, ctx.r)
            if len(ws) != graph.n:
                raise InputError(f"graph has {graph.n} legs but {len(ws)} weights were given")
            assignment = WeightAssignment.from_list(ctx, ws)
        else:
            assignment = WeightAssignment.from_graph(graph, ctx)
    else:
        _require(args, "genus")
        ws = _weight_list(wdoc, ctx.r) if wdoc is not None else []
        n = args.points if args.points is not None else len(ws)
        if not ws:
            ws = [WeightPartition.zero(ctx.r)] * n
        if len(ws) != n:
            raise InputError(f"--points {n} but {len(ws)} weights were given")
        if args.genus == 0 and n < 3:
            value = ranks.genus0_rank(ctx, ws)
            return _rank_result(ctx, smooth_graph(0, n), value, job)
        graph = ranks.canonical_graph(args.genus, n)
        assignment = WeightAssignment.from_list(ctx, ws)
    value = ranks.engine_for(ctx).graph_rank(graph, assignment)
    return _rank_result(ctx, graph, value, job)


def _rank_result(ctx, graph, value, job) -> dict:
    table = default_table(ctx)
    _save_cache(job, ctx)
    return {
        "rank": value,
        "provenance": {
            "r": ctx.r,
            "level": ctx.level,
            "graph_hash": graph.digest(),
            "cache_hits": table.hits,
            "cache_misses": table.misses,
        },
    }


def _parabolic(args, r: int, n: int | None):
    if not args.weights:
        return None
    a = weights.ParabolicWeight.from_json(load_document(args.weights), r=r)
    if n is not None and a.n != n:
        raise InputError(f"--points {n} but the weight has {a.n} points")
    return a


def cmd_walls(args, job: JobSpec) -> dict:
    _require(args, "rank", "points")
    walls = weights.enumerate_walls(args.rank, args.points)
    return {"r": args.rank, "n": args.points, "count": len(walls), "walls": [w.to_json() for w in walls]}


def cmd_chambers(args, job: JobSpec) -> dict:
    _require(args, "rank", "points")
    r, n = args.rank, args.points
    sampled = weights.sample_sign_vectors(r, n, args.samples, args.seed)
    exact = weights.count_chambers(r, n) if n * (r - 1) <= 4 else None
    return {"r": r, "n": n, "chambers": exact if exact is not None else len(sampled),
            "exact": exact, "sampled": len(sampled), "samples": args.samples}


def cmd_dominant(args, job: JobSpec) -> dict:
    _require(args, "genus", "rank")
    r = args.rank
    a = _parabolic(args, r, args.points)
    n = a.n if a is not None else (args.points or 0)
    perturbed = False
    if a is None:
        a = weights.weight_ac(r, n)
        if not weights.is_general(a):
            a = weights.perturb_general(a, Fraction(1, 100 * r))
            perturbed = True
    result = weights.is_dominant(args.genus, r, n, a).to_json()
    result["weight"] = a.to_json()
    result["perturbed_from_central"] = perturbed
    return result


def _divisor(args) -> picard.DivisorClass:
    if args.anticanonical:
        _require(args, "rank", "points")
        return picard.anticanonical_class(args.rank, args.points)
    _require(args, "divisor")
    return picard.DivisorClass.from_json(load_document(args.divisor), r=args.rank)


def cmd_cone(args, job: JobSpec) -> dict:
    D = _divisor(args)
    lw = picard.divisor_to_level_weights(D)
    return {"divisor": D.to_json(), "cone": picard.in_cone_E(D), "descends": picard.descends(D),
            "level": lw.level, "weights": [list(w) for w in lw.weights], "dominant": lw.dominant}


def cmd_model(args, job: JobSpec) -> dict:
    D = _divisor(args)
    if picard.in_cone_E(D) == "boundary":
        try:
            b = picard.projective_model_weight(D)
        except InputError:
            return {"kind": "boundary", "descriptor": picard.boundary_model_descriptor(D)}
    else:
        b = picard.projective_model_weight(D)
    return {"kind": "projective", "weight": b.to_json(),
            "partial_flag": [list(x) for x in b.degeneracies()]}


def cmd_hilbert(args, job: JobSpec) -> dict:
    _require(args, "rank")
    graphs = _graphs(args)
    if not graphs:
        _require(args, "genus", "points")
        graphs = enumerate_stable_graphs(args.genus, args.points, forget_leg_ids=True)
    r = args.rank
    a = _parabolic(args, r, None)
    if a is None:
        a = weights.ParabolicWeight(r, ())
    M = args.max_degree if args.max_degree is not None else 3
    vectors = [picard.hilbert_function(g, a, M, parallel=args.parallel) for g in graphs]
    flat = picard.flatness_check(graphs, a, M) if len({g.type for g in graphs}) == 1 else None
    if flat is None:
        from .errors import MismatchedType

        raise MismatchedType("graphs have different (g, n)")
    gen = picard.ray_generator(a)
    return {"r": r, "ray": gen.to_json(), "graphs": [g.digest() for g in graphs],
            "vectors": vectors, "flat": flat}


COMMANDS = {
    "rank": cmd_rank,
    "walls": cmd_walls,
    "chambers": cmd_chambers,
    "dominant": cmd_dominant,
    "cone": cmd_cone,
    "model": cmd_model,
    "hilbert": cmd_hilbert,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="confblocks", description="Ranks of sl_r conformal blocks and related lattice data.")
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--rank", type=int, help="r for sl_r")
    common.add_argument("--level", type=int)
    common.add_argument("--genus", type=int)
    common.add_argument("--points", type=int, help="number of marked points")
    common.add_argument("--graph", action="append", help="stable graph JSON (file or inline); repeatable")
    common.add_argument("--weights", help="weights JSON (file or inline)")
    common.add_argument("--divisor", help="divisor class JSON {level, d}")
    common.add_argument("--anticanonical", action="store_true", help="use the anticanonical class for --rank/--points")
    common.add_argument("--cache-dir", help="directory for persisted fusion tables")
    common.add_argument("--max-degree", type=int, help="top degree M for hilbert")
    common.add_argument("--samples", type=int, default=10_000)
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--parallel", action="store_true")
    common.add_argument("--output", help="write JSON here instead of stdout")
    common.add_argument("-v", "--verbose", action="count", default=0)
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        sub.add_parser(name, parents=[common])
    return parser


def _emit(payload: dict, output: str | None) -> None:
    text = json.dumps(_stringify(payload), sort_keys=True) + "\n"
    if output:
        Path(output).write_text(text)
    else:
        sys.stdout.write(text)


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.WARNING - 10 * min(args.verbose, 2), stream=sys.stderr)
    documents = {k: v if isinstance(v, list) else [v]
                 for k, v in (("graph", args.graph), ("weights", args.weights), ("divisor", args.divisor)) if v}
    job = JobSpec(args.command, documents, args.output, args.cache_dir, args.verbose)
    try:
        job.validate()
        result = COMMANDS[args.command](args, job)
    except InvariantError as exc:
        _emit({"error": {"type": type(exc).__name__, "message": str(exc)}}, None)
        return 3
    except InputError as exc:
        _emit({"error": {"type": type(exc).__name__, "message": str(exc)}}, None)
        return 2
    except (AssertionError, RecursionError) as exc:
        _emit({"error": {"type": "InvariantError", "message": str(exc) or type(exc).__name__}}, None)
        return 3
    _emit(result, job.output)
    return 0


if __name__ == "__main__":
    sys.exit(main())
