"""Acceptance gate: eight black-box criteria, one test per criterion.

Each test states its tolerance and (where applicable) its wall-clock
budget inline.  The randomized criteria use fixed seeds so a pass here is
reproducible, and every numeric check runs against an independent oracle
from ``oracles.py`` — naive scans, exhaustive enumeration, compensated
summation — never against the code under test.
"""

import itertools
import json
import math
import time

import numpy as np
import pytest

from coexpand import cli, formats
from coexpand.corpus_io import (
    CandidateEntity,
    Document,
    GoldLabels,
    SeedSet,
    SeedSpec,
    build_catalog,
    canonicalize,
    load_candidates,
    load_gold,
    load_seeds,
)
from coexpand.engine import (
    EntitySet,
    ExpansionState,
    matched_set,
    run_coexpansion,
    select_topk,
    set_similarity,
)
from coexpand.evaluation import precision_at_k
from coexpand.indexer import MultiPatternMatcher, OccurrenceRecord, index_corpus
from coexpand.store import CorpusEmbedding, EmbeddingStore, aggregate, cosine
from coexpand.synth import generate_synthetic_fixtures

from oracles import (
    best_subsets,
    naive_match_sentence,
    naive_set_score,
    pattern_inventory,
    random_sentence,
)

UNIT_TOLERANCE = 1e-6


def make_instance(pool_vectors, seed_vectors_by_type):
    """Catalog + store whose content and context vectors both equal the inputs."""
    pool = [
        CandidateEntity(id=i, surface=f"cand{i:04d}", canonical=f"cand{i:04d}")
        for i in range(len(pool_vectors))
    ]
    types = tuple(
        SeedSet(
            name=name,
            seeds=tuple(f"{name} seed {j}" for j in range(len(vectors))),
            surfaces=tuple(f"{name} seed {j}" for j in range(len(vectors))),
        )
        for name, vectors in seed_vectors_by_type
    )
    catalog = build_catalog(pool, SeedSpec(types=types))
    vectors = list(pool_vectors) + [v for _, vs in seed_vectors_by_type for v in vs]
    entries = [
        CorpusEmbedding(
            entity_id=i,
            content=np.asarray(v, dtype=np.float32),
            context=np.asarray(v, dtype=np.float32),
            occurrence_count=1,
        )
        for i, v in enumerate(vectors)
    ]
    return catalog, EmbeddingStore(entries)


def fresh_state(catalog, k, t, variant="content"):
    return ExpansionState(
        sets=[EntitySet(name=n, seed_ids=ids) for n, ids in catalog.seed_ids_by_type],
        variant=variant,
        k=k,
        t=t,
    )


def occ_row(entity_id, sentence_id, content, context):
    return formats.OccurrenceEmbeddingRow(
        entity_id=entity_id,
        sentence_id=sentence_id,
        content=np.asarray(content, dtype=np.float32),
        context=np.asarray(context, dtype=np.float32),
    )


def test_criterion_01_formula_unit_suite():
    """Every closed-form example for the five core formulas, within 1e-6, under 1 s."""
    started = time.perf_counter()

    # cosine
    assert cosine(np.array([1.0, 0.0]), np.array([1.0, 0.0])) == pytest.approx(1.0, abs=UNIT_TOLERANCE)
    assert cosine(np.array([1.0, 0.0]), np.array([0.0, 1.0])) == pytest.approx(0.0, abs=UNIT_TOLERANCE)
    assert cosine(np.array([1.0, 1.0]), np.array([1.0, 0.0])) == pytest.approx(0.70710678, abs=UNIT_TOLERANCE)

    # aggregate
    two = aggregate([occ_row(0, "a#0", [1.0, 0.0], [0, 0]), occ_row(0, "a#1", [0.0, 1.0], [0, 0])])
    assert two.content.tolist() == pytest.approx([0.5, 0.5], abs=UNIT_TOLERANCE)
    one = aggregate([occ_row(0, "a#0", [0.25, -3.5], [1.5, 2.5])])
    assert one.content.tolist() == pytest.approx([0.25, -3.5], abs=UNIT_TOLERANCE)
    assert one.context.tolist() == pytest.approx([1.5, 2.5], abs=UNIT_TOLERANCE)

    # vector_of under every variant
    store = EmbeddingStore([
        CorpusEmbedding(0, np.float32([1, 0]), np.float32([0, 2]), 1),
    ])
    assert store.vector_of(0, "content").tolist() == pytest.approx([1, 0], abs=UNIT_TOLERANCE)
    assert store.vector_of(0, "context").tolist() == pytest.approx([0, 2], abs=UNIT_TOLERANCE)
    assert store.vector_of(0, "both").tolist() == pytest.approx([1, 0, 0, 2], abs=UNIT_TOLERANCE)

    # set_similarity
    catalog1, store1 = make_instance([[0.3, 0.4]], [("a", [[0.3, 0.4]]), ("b", [[0.0, 1.0]])])
    state1 = fresh_state(catalog1, k=1, t=1)
    assert set_similarity(0, state1.sets[0], store1, "content") == pytest.approx(1.0, abs=UNIT_TOLERANCE)
    catalog2, store2 = make_instance([[1.0, 0.0]], [("a", [[1.0, 0.0], [0.0, 1.0]]), ("b", [[0.0, 1.0]])])
    state2 = fresh_state(catalog2, k=1, t=1)
    assert set_similarity(0, state2.sets[0], store2, "content") == pytest.approx(0.5, abs=UNIT_TOLERANCE)

    # matched_set tie rule: all-equal scores resolve to the lowest index
    same = [0.6, 0.8]
    catalog3, store3 = make_instance([[1.0, 0.0]], [("a", [same]), ("b", [same]), ("c", [same])])
    index, _ = matched_set(0, fresh_state(catalog3, 1, 1).sets, store3, "content")
    assert index == 0

    # precision_at_k
    gold = GoldLabels({"a1": "A", "a2": "A", "b1": "B", "b2": "B"})
    full = precision_at_k([("A", ["a1", "a2"]), ("B", ["b1", "b2"])], gold, [2])
    assert full.macro["P@2"] == pytest.approx(1.0, abs=UNIT_TOLERANCE)
    gold2 = GoldLabels({"a1": "A", "a2": "A", "b1": "B", "b2": "A"})
    partial = precision_at_k([("A", ["a1", "a2"]), ("B", ["b1", "b2"])], gold2, [2])
    assert partial.macro["P@2"] == pytest.approx(0.75, abs=UNIT_TOLERANCE)

    elapsed = time.perf_counter() - started
    assert elapsed < 1.0, f"unit suite took {elapsed:.3f}s, budget is 1s"


def test_criterion_02_topk_matches_subset_enumeration():
    """100 random instances: the fast top-k equals exhaustive enumeration, under 10 s."""
    started = time.perf_counter()
    rng = np.random.default_rng(24601)
    for trial in range(100):
        n_pool = int(rng.integers(4, 13))        # |pool| <= 12
        n_sets = int(rng.integers(2, 4))         # M <= 3
        k = int(rng.integers(1, 4))              # k <= 3
        dim = int(rng.integers(3, 9))
        catalog, store = make_instance(
            [rng.standard_normal(dim) for _ in range(n_pool)],
            [(f"t{m}", [rng.standard_normal(dim) for _ in range(int(rng.integers(1, 4)))])
             for m in range(n_sets)],
        )
        state = fresh_state(catalog, k=k, t=10**6)
        picked = select_topk(list(catalog.pool_ids), state, store, catalog.canonical_of)

        per_candidate = []
        for pid in catalog.pool_ids:
            vec = store.vector_of(pid, "content")
            per_candidate.append(max(
                naive_set_score(vec, [store.vector_of(i, "content") for i in s.seed_ids])
                for s in state.sets
            ))
        best_value, winners = best_subsets(per_candidate, k)
        chosen = frozenset(c.entity_id for c in picked)
        assert chosen in winners, f"trial {trial}: {chosen} not optimal"
        assert math.fsum(per_candidate[i] for i in chosen) == pytest.approx(best_value, abs=1e-9)

    elapsed = time.perf_counter() - started
    assert elapsed < 10.0, f"enumeration check took {elapsed:.3f}s, budget is 10s"


ACCEPTANCE_SYNTH = dict(types="4", dim="16", per_cluster="50", noise="0.05",
                        seeds_per_cluster="5", seed="0")


def synth_via_cli(out_dir):
    args = ["synth", "--out-dir", str(out_dir)]
    for flag, value in ACCEPTANCE_SYNTH.items():
        args += [f"--{flag.replace('_', '-')}", value]
    assert cli.main(args) == 0
    return {
        "candidates": out_dir / "candidates.txt",
        "seeds": out_dir / "seeds.json",
        "gold": out_dir / "gold.json",
        "embeddings": out_dir / "embeddings.jsonl",
    }


def expand_via_cli(fx, result_path, embeddings=None, k="10", t="30"):
    assert cli.main(["expand",
                     "--embeddings", str(embeddings or fx["embeddings"]),
                     "--candidates", str(fx["candidates"]),
                     "--seeds", str(fx["seeds"]),
                     "--k", k, "--t", t,
                     "--out", str(result_path)]) == 0


def test_criterion_03_synthetic_cluster_recovery(tmp_path):
    """Four 16-d clusters, 50 candidates each: per-type P@30 is exactly 1.0, under 5 s."""
    started = time.perf_counter()
    fx = synth_via_cli(tmp_path / "fx")
    result = tmp_path / "result.json"
    expand_via_cli(fx, result)
    report_path = tmp_path / "report.json"
    assert cli.main(["eval", "--result", str(result), "--gold", str(fx["gold"]),
                     "--ks", "30", "--out", str(report_path)]) == 0

    report = json.loads(report_path.read_text())
    assert len(report["per_type"]) == 4
    for type_name, scores in report["per_type"].items():
        assert scores["P@30"] == 1.0, f"{type_name}: P@30 = {scores['P@30']}"
    assert report["macro"]["P@30"] == 1.0
    assert report["unknown_entities"] == 0

    elapsed = time.perf_counter() - started
    assert elapsed < 5.0, f"recovery pipeline took {elapsed:.3f}s, budget is 5s"


def check_invariants(state):
    seen = {}
    for entity_set in state.sets:
        assert len(entity_set.expanded) <= state.t, (
            f"{entity_set.name} holds {len(entity_set.expanded)} > t={state.t}")
        seeds = set(entity_set.seed_ids)
        for member in entity_set.expanded:
            assert member.entity_id not in seeds, "a seed re-entered its own set"
            previous = seen.setdefault(member.entity_id, entity_set.name)
            assert previous == entity_set.name, (
                f"entity {member.entity_id} sits in both {previous} and {entity_set.name}")
    all_seeds = {i for s in state.sets for i in s.seed_ids}
    assert not (set(seen) & all_seeds), "an entity is both a seed and an expansion"


def test_criterion_04_disjointness_and_capacity(tmp_path):
    """No shared members, no overfilled set, no readmitted seed — at every iteration."""
    # the criterion-3 fixture, watched iteration by iteration
    fixtures = generate_synthetic_fixtures(tmp_path / "fx", num_types=4, dim=16,
                                           per_cluster=50, noise=0.05,
                                           seeds_per_cluster=5, rng_seed=0)
    spec = load_seeds(fixtures.seeds)
    catalog = build_catalog(load_candidates(fixtures.candidates, spec.all_seed_keys()), spec)
    store = EmbeddingStore.from_file(fixtures.embeddings)
    iterations = []
    state = run_coexpansion(catalog, store, "context", k=10, t=30,
                            observer=lambda st: (check_invariants(st), iterations.append(st.iterations)))
    check_invariants(state)
    assert iterations, "the observer never fired"

    # twenty random stores with mixed shapes
    rng = np.random.default_rng(31337)
    for trial in range(20):
        n_sets = int(rng.integers(2, 5))
        n_pool = int(rng.integers(10, 41))
        k = int(rng.integers(1, 5))
        t = int(rng.integers(2, 7))
        dim = int(rng.integers(4, 13))
        catalog, store = make_instance(
            [rng.standard_normal(dim) for _ in range(n_pool)],
            [(f"t{m}", [rng.standard_normal(dim) for _ in range(int(rng.integers(1, 4)))])
             for m in range(n_sets)],
        )
        state = run_coexpansion(catalog, store, "content", k=k, t=t,
                                observer=check_invariants)
        check_invariants(state)


def scale_aggregated_file(src, dst, factor):
    dim, rows = formats.read_aggregated(src)
    entries = [
        CorpusEmbedding(
            entity_id=eid,
            content=(content * np.float32(factor)),
            context=(context * np.float32(factor)),
            occurrence_count=count,
        )
        for eid, count, content, context in rows
    ]
    formats.write_aggregated(dst, dim, entries)


def test_criterion_05_scale_invariance(tmp_path):
    """Scaling every embedding by 3.7 changes no membership; scores agree within 1e-6."""
    fx = synth_via_cli(tmp_path / "fx")
    base_result = tmp_path / "base.json"
    expand_via_cli(fx, base_result)

    scaled = tmp_path / "scaled_embeddings.jsonl"
    scale_aggregated_file(fx["embeddings"], scaled, 3.7)
    scaled_result = tmp_path / "scaled.json"
    expand_via_cli(fx, scaled_result, embeddings=scaled)

    base = json.loads(base_result.read_text())
    big = json.loads(scaled_result.read_text())
    assert base["variant"] == big["variant"]
    assert base["k"] == big["k"] and base["t"] == big["t"]
    assert len(base["sets"]) == len(big["sets"])
    for set_a, set_b in zip(base["sets"], big["sets"]):
        assert set_a["name"] == set_b["name"]
        assert set_a["seeds"] == set_b["seeds"]
        assert set_a.get("underfilled") == set_b.get("underfilled")
        assert len(set_a["expanded"]) == len(set_b["expanded"])
        for member_a, member_b in zip(set_a["expanded"], set_b["expanded"]):
            assert member_a["entity"] == member_b["entity"]
            assert member_a["rank"] == member_b["rank"]
            assert member_a["iteration"] == member_b["iteration"]
            assert abs(member_a["score"] - member_b["score"]) <= 1e-6 * (1 + 1e-9), (
                f"{member_a['entity']}: {member_a['score']} vs {member_b['score']}")


TOY_CORPUS = [
    {"doc_id": "doc1", "text": ("We moved from MySQL to Postgres last year. "
                                "Redis caches sit in front. SQLite runs the tests. "
                                "MariaDB mirrors production. Redis again, twice: redis.")},
    {"doc_id": "doc2", "text": ("Python scripts automate the deploy. Java services stay fast. "
                                "Ruby powers the old site. Kotlin and Scala share one build.\n"
                                "Scala compiles slowly. kotlin is fine.")},
    {"doc_id": "doc0", "text": "Nothing relevant here at all.\nStill nothing."},
]


def write_toy_inputs(root):
    (root / "corpus.jsonl").write_text("\n".join(json.dumps(d) for d in TOY_CORPUS) + "\n")
    (root / "candidates.txt").write_text(
        "\n".join(["redis", "sqlite", "mariadb", "ruby", "kotlin", "scala"]) + "\n")
    (root / "seeds.json").write_text(json.dumps({"types": [
        {"name": "db", "seeds": ["mysql", "postgres"]},
        {"name": "lang", "seeds": ["python", "java"]},
    ]}))


def deterministic_occurrence_embeddings(occ_path, out_path, dim=8):
    """A stand-in embedding stage: vectors derived from each record's identity."""
    import zlib

    rows = []
    for record in formats.read_occurrences(occ_path):
        seed = zlib.crc32(f"{record.entity_id}|{record.sentence_id}|{record.start}".encode())
        rng = np.random.default_rng(seed)
        rows.append(occ_row(record.entity_id, record.sentence_id,
                            rng.standard_normal(dim), rng.standard_normal(dim)))
    formats.write_occurrence_embeddings(out_path, dim, "crc-fixture", rows)


def test_criterion_06_byte_determinism(tmp_path):
    """Every output file is byte-identical across reruns, and across jobs=1 vs jobs=8."""
    write_toy_inputs(tmp_path)
    common = ["--candidates", str(tmp_path / "candidates.txt"),
              "--seeds", str(tmp_path / "seeds.json")]

    # index: rerun and parallel variants
    occ = {}
    for label, jobs in (("a", "1"), ("b", "1"), ("par", "8")):
        out = tmp_path / f"occ_{label}.jsonl"
        assert cli.main(["index", "--corpus", str(tmp_path / "corpus.jsonl"),
                         "--jobs", jobs, "--out", str(out),
                         "--summary", str(tmp_path / f"sum_{label}.json")] + common) == 0
        occ[label] = out
    assert occ["a"].read_bytes() == occ["b"].read_bytes()
    assert occ["a"].read_bytes() == occ["par"].read_bytes()
    assert (tmp_path / "sum_a.json").read_bytes() == (tmp_path / "sum_b.json").read_bytes()
    assert (tmp_path / "sum_a.json").read_bytes() == (tmp_path / "sum_par.json").read_bytes()

    # aggregate: rerun on a fixed embedding file
    emb = tmp_path / "emb.jsonl"
    deterministic_occurrence_embeddings(occ["a"], emb)
    for label in ("a", "b"):
        assert cli.main(["aggregate", "--occurrence-embeddings", str(emb),
                         "--out", str(tmp_path / f"agg_{label}.jsonl")] + common) == 0
    assert (tmp_path / "agg_a.jsonl").read_bytes() == (tmp_path / "agg_b.jsonl").read_bytes()

    # synth -> expand -> eval: the whole downstream rerun
    digests = []
    for label in ("a", "b"):
        fx = synth_via_cli(tmp_path / f"fx_{label}")
        result = tmp_path / f"result_{label}.json"
        expand_via_cli(fx, result)
        report = tmp_path / f"report_{label}.json"
        assert cli.main(["eval", "--result", str(result), "--gold", str(fx["gold"]),
                         "--ks", "10,20,30", "--out", str(report)]) == 0
        digests.append((
            fx["embeddings"].read_bytes(), fx["candidates"].read_bytes(),
            fx["seeds"].read_bytes(), fx["gold"].read_bytes(),
            result.read_bytes(), report.read_bytes(),
        ))
    assert digests[0] == digests[1]


def test_criterion_07_indexer_matches_naive_scan():
    """200 random sentences, 50 nested/multi-word patterns: records equal the oracle's."""
    import random as stdlib_random

    rng = stdlib_random.Random(1789)
    keys = pattern_inventory()
    assert len(keys) == 50
    entities = [CandidateEntity(id=i, surface=key, canonical=key) for i, key in enumerate(keys)]
    patterns = [(e.id, e.canonical) for e in entities]

    sentences = [random_sentence(rng, keys) for _ in range(200)]
    documents = [Document(f"d{i:03d}", text) for i, text in enumerate(sentences)]

    expected = []
    for i, text in enumerate(sentences):
        for entity_id, start, end in naive_match_sentence(text, patterns):
            expected.append(OccurrenceRecord(
                entity_id=entity_id, sentence_id=f"d{i:03d}#0",
                start=start, end=end, sentence=text,
            ))

    result = index_corpus(documents, MultiPatternMatcher(entities))
    assert list(result.records) == expected
    assert any(result.counts.values()), "fixture produced no matches at all"


def test_criterion_08_macro_precision_fixture(tmp_path):
    """Two types, K=2, three of four correct: the report reads exactly 0.75."""
    result = {
        "variant": "context", "k": 2, "t": 2,
        "sets": [
            {"name": "A", "seeds": ["seed a"], "expanded": [
                {"entity": "a1", "rank": 1, "score": 0.9, "iteration": 1},
                {"entity": "a2", "rank": 2, "score": 0.8, "iteration": 1},
            ]},
            {"name": "B", "seeds": ["seed b"], "expanded": [
                {"entity": "b1", "rank": 1, "score": 0.7, "iteration": 1},
                {"entity": "b2", "rank": 2, "score": 0.6, "iteration": 1},
            ]},
        ],
    }
    (tmp_path / "result.json").write_text(json.dumps(result))
    (tmp_path / "gold.json").write_text(json.dumps(
        {"a1": "A", "a2": "A", "b1": "B", "b2": "A"}))
    report_path = tmp_path / "report.json"
    assert cli.main(["eval", "--result", str(tmp_path / "result.json"),
                     "--gold", str(tmp_path / "gold.json"),
                     "--ks", "2", "--out", str(report_path)]) == 0
    report = json.loads(report_path.read_text())
    assert report["per_type"]["A"]["P@2"] == 1.0
    assert report["per_type"]["B"]["P@2"] == 0.5
    assert report["macro"]["P@2"] == 0.75
    assert "truncated" not in report
