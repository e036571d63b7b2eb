"""Command-line pipeline: index, aggregate, expand, eval, synth.

Stage boundaries are files so the embedding stage (a separate program) can
slot in between ``index`` and ``aggregate``.  Every subcommand is a pure
function of its input files and flags.  Exit codes: 0 success, 1 usage
error, 2 data error.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from . import formats
from .corpus_io import build_catalog, iter_corpus, load_candidates, load_gold, load_seeds
from .engine import run_coexpansion
from .errors import DataError, UsageError
from .evaluation import precision_at_k
from .indexer import MultiPatternMatcher, index_corpus
from .store import VARIANTS, EmbeddingStore, build_store
from .synth import generate_synthetic_fixtures

log = logging.getLogger(__name__)

DEFAULT_VARIANT = "context"
DEFAULT_K = 10
DEFAULT_T = 30


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # argparse exits 2 on usage errors; we use 1
        raise UsageError(message)


def _load_config(path: str | None) -> dict:
    if path is None:
        return {}
    try:
        raw = json.loads(Path(path).read_text(encoding="utf-8"))
    except OSError as exc:
        raise UsageError(f"cannot read config file {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise UsageError(f"config file {path} is not valid JSON: {exc.msg}") from exc
    if not isinstance(raw, dict):
        raise UsageError(f"config file {path} must be a JSON object")
    return raw


class _Options:
    """Flag > config-file value > default, per option."""

    def __init__(self, args: argparse.Namespace):
        self._args = vars(args)
        self._config = _load_config(self._args.get("config"))

    def get(self, name: str, default=None):
        value = self._args.get(name)
        if value is None:
            value = self._config.get(name, default)
        return value

    def require_path(self, name: str) -> Path:
        value = self.get(name)
        if value is None:
            raise UsageError(f"missing required option --{name.replace('_', '-')}")
        return Path(value)


def _load_catalog(opts: _Options):
    seed_spec = load_seeds(opts.require_path("seeds"))
    pool = load_candidates(opts.require_path("candidates"), seed_spec.all_seed_keys())
    return build_catalog(pool, seed_spec)


def _cmd_index(args: argparse.Namespace) -> int:
    opts = _Options(args)
    catalog = _load_catalog(opts)
    out = opts.require_path("out")
    summary = opts.get("summary")
    max_occurrences = opts.get("max_occurrences")
    if max_occurrences is not None:
        max_occurrences = int(max_occurrences)
        if max_occurrences < 1:
            raise UsageError("--max-occurrences must be >= 1")
    jobs = int(opts.get("jobs", 1))
    if jobs < 1:
        raise UsageError("--jobs must be >= 1")

    matcher = MultiPatternMatcher(catalog.entities)
    result = index_corpus(
        iter_corpus(opts.require_path("corpus")),
        matcher,
        dedup_sentences=bool(opts.get("dedup_sentences", False)),
        max_occurrences=max_occurrences,
        jobs=jobs,
    )
    formats.write_occurrences(out, result.records)
    summary_path = Path(summary) if summary else out.with_name(out.name + ".summary.json")
    formats.write_summary(summary_path, result.counts)
    zero = sum(1 for c in result.counts.values() if c == 0)
    print(f"indexed {len(result.records)} occurrences of {len(catalog)} entities "
          f"({zero} with none) -> {out}")
    return 0


def _cmd_aggregate(args: argparse.Namespace) -> int:
    opts = _Options(args)
    catalog = _load_catalog(opts)
    out = opts.require_path("out")
    _, rows = formats.read_occurrence_embeddings(opts.require_path("occurrence_embeddings"))

    known = set(range(len(catalog)))
    for row in rows:
        if row.entity_id not in known:
            raise DataError(f"occurrence embeddings mention entity_id {row.entity_id}, "
                            f"which the candidates/seeds files do not define")
    store, present = build_store(rows)

    seed_ids = [i for _, ids in catalog.seed_ids_by_type for i in ids]
    missing_seeds = [catalog.canonical_of(i) for i in seed_ids if i not in store]
    if missing_seeds:
        raise DataError(f"seeds with no occurrence embeddings: {missing_seeds}")
    missing_pool = [i for i in catalog.pool_ids if i not in store]
    if missing_pool:
        log.warning("aggregate: %d pool entities have no embeddings and are left out", len(missing_pool))

    formats.write_aggregated(out, store.dim, store.entries())
    print(f"aggregated {len(rows)} occurrence embeddings into {len(present)} entities -> {out}")
    return 0


def _cmd_expand(args: argparse.Namespace) -> int:
    opts = _Options(args)
    catalog = _load_catalog(opts)
    out = opts.require_path("out")
    variant = opts.get("variant", DEFAULT_VARIANT)
    if variant not in VARIANTS:
        raise UsageError(f"--variant must be one of {', '.join(VARIANTS)}")
    k = int(opts.get("k", DEFAULT_K))
    t = int(opts.get("t", DEFAULT_T))
    if k < 1:
        raise UsageError("--k must be >= 1")
    if t < 0:
        raise UsageError("--t must be >= 0")

    store = EmbeddingStore.from_file(
        opts.require_path("embeddings"),
        normalize_parts=bool(opts.get("normalize_parts", False)),
    )
    state = run_coexpansion(catalog, store, variant, k=k, t=t)
    formats.write_result(out, state, catalog.canonical_of)
    total = sum(len(s.expanded) for s in state.sets)
    print(f"expanded {total} entities over {state.iterations} iterations -> {out}")
    return 0


def _cmd_eval(args: argparse.Namespace) -> int:
    opts = _Options(args)
    out = opts.require_path("out")
    raw_ks = opts.get("ks", "10,20,30")
    try:
        ks = [int(part) for part in str(raw_ks).split(",") if part.strip()]
    except ValueError as exc:
        raise UsageError(f"--ks must be a comma-separated list of integers: {raw_ks!r}") from exc
    if not ks or any(k <= 0 for k in ks):
        raise UsageError("--ks needs at least one positive integer")

    doc = formats.read_result(opts.require_path("result"))
    gold = load_gold(opts.require_path("gold"))
    ranked = []
    for entry in doc["sets"]:
        ranked.append((entry["name"], [m["entity"] for m in entry.get("expanded", [])]))
    report = precision_at_k(ranked, gold, ks)
    formats.write_report(out, report)
    for k in ks:
        print(f"macro P@{k} = {report.macro[f'P@{k}']:.4f}")
    return 0


def _cmd_synth(args: argparse.Namespace) -> int:
    opts = _Options(args)
    fixtures = generate_synthetic_fixtures(
        opts.require_path("out_dir"),
        num_types=int(opts.get("types", 4)),
        dim=int(opts.get("dim", 16)),
        per_cluster=int(opts.get("per_cluster", 50)),
        noise=float(opts.get("noise", 0.05)),
        seeds_per_cluster=int(opts.get("seeds_per_cluster", 5)),
        rng_seed=int(opts.get("seed", 0)),
    )
    print(f"wrote {fixtures.candidates}, {fixtures.seeds}, {fixtures.gold}, {fixtures.embeddings}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="coexpand", description=__doc__)
    sub = parser.add_subparsers(dest="command", parser_class=_Parser)

    index = sub.add_parser("index", help="find every entity occurrence in the corpus")
    index.add_argument("--corpus", help="JSON-lines corpus: {\"doc_id\": ..., \"text\": ...} per line")
    index.add_argument("--candidates", help="candidate pool, one surface form per line")
    index.add_argument("--seeds", help="seed sets JSON")
    index.add_argument("--out", help="occurrences JSONL output")
    index.add_argument("--summary", help="per-entity occurrence count JSON (default: <out>.summary.json)")
    index.add_argument("--dedup-sentences", action="store_const", const=True, default=None,
                       dest="dedup_sentences", help="skip sentences whose exact text was already seen")
    index.add_argument("--max-occurrences", type=int, dest="max_occurrences",
                       help="keep at most this many records per entity (first in stream order)")
    index.add_argument("--jobs", type=int, help="parallel scanning workers (default 1)")
    index.set_defaults(func=_cmd_index)

    aggregate = sub.add_parser("aggregate", help="average per-occurrence embeddings per entity")
    aggregate.add_argument("--occurrence-embeddings", dest="occurrence_embeddings",
                           help="embedding stage output (header line + JSONL)")
    aggregate.add_argument("--candidates", help="candidate pool used at index time")
    aggregate.add_argument("--seeds", help="seed sets JSON used at index time")
    aggregate.add_argument("--out", help="aggregated embeddings output")
    aggregate.set_defaults(func=_cmd_aggregate)

    expand = sub.add_parser("expand", help="iteratively grow all seed sets")
    expand.add_argument("--embeddings", help="aggregated embeddings file")
    expand.add_argument("--candidates", help="candidate pool")
    expand.add_argument("--seeds", help="seed sets JSON")
    expand.add_argument("--variant", choices=VARIANTS, help=f"embedding variant (default {DEFAULT_VARIANT})")
    expand.add_argument("--k", type=int, help=f"entities admitted per iteration (default {DEFAULT_K})")
    expand.add_argument("--t", type=int, help=f"expanded entities per set at which to stop (default {DEFAULT_T})")
    expand.add_argument("--normalize-parts", action="store_const", const=True, default=None,
                        dest="normalize_parts",
                        help="L2-normalize content and context before concatenating (variant=both)")
    expand.add_argument("--out", help="expansion result JSON")
    expand.set_defaults(func=_cmd_expand)

    evaluate = sub.add_parser("eval", help="precision@K of a result against gold labels")
    evaluate.add_argument("--result", help="expansion result JSON")
    evaluate.add_argument("--gold", help="gold labels JSON (entity -> type name)")
    evaluate.add_argument("--ks", help="comma-separated cutoffs (default 10,20,30)")
    evaluate.add_argument("--out", help="report JSON output")
    evaluate.set_defaults(func=_cmd_eval)

    synth = sub.add_parser("synth", help="generate a synthetic cluster fixture set")
    synth.add_argument("--out-dir", dest="out_dir", help="directory for the fixture files")
    synth.add_argument("--types", type=int, help="number of entity types / clusters (default 4)")
    synth.add_argument("--dim", type=int, help="embedding dimension (default 16)")
    synth.add_argument("--per-cluster", type=int, dest="per_cluster",
                       help="candidates per cluster (default 50)")
    synth.add_argument("--noise", type=float, help="Gaussian noise sigma around each center (default 0.05)")
    synth.add_argument("--seeds-per-cluster", type=int, dest="seeds_per_cluster",
                       help="seed entities per cluster (default 5)")
    synth.add_argument("--seed", type=int, help="RNG seed (default 0)")
    synth.set_defaults(func=_cmd_synth)

    for p in (index, aggregate, expand, evaluate, synth):
        p.add_argument("--config", help="JSON file supplying any of this command's options")
    return parser


def main(argv=None) -> int:
    logging.basicConfig(level=logging.INFO, format="%(levelname)s %(name)s: %(message)s")
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if getattr(args, "func", None) is None:
            parser.print_help(sys.stderr)
            return 1
        return args.func(args)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return 1
    except DataError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
