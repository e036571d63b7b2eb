"""
The pipeline as five file-separated stages
==========================================

index -> (embedding stage) -> aggregate -> expand -> eval, every boundary
a file on disk.  The embedding stage belongs to a separate program in
real deployments (any per-occurrence embedder works); here a tiny
hash-seeded stand-in fills the slot so the whole chain runs offline.

Every stage is a pure function of its input files, so rerunning any
command reproduces its output byte for byte.
"""

import json
import tempfile
import zlib
from pathlib import Path

import numpy as np

from coexpand import build_catalog, cli, load_candidates, load_seeds
from coexpand import formats

workdir = Path(tempfile.mkdtemp(prefix="coexpand-pipeline-"))
DIM = 12

# ---------------------------------------------------------------- inputs
corpus = [
    {"doc_id": "thread-1", "text": ("We moved from MySQL to Postgres last year. "
                                     "Redis caches sit in front. SQLite runs the tests. "
                                     "MariaDB mirrors production.")},
    {"doc_id": "thread-2", "text": ("Python scripts automate the deploy. Java services stay fast. "
                                     "Ruby powers the old site. Kotlin and Scala share one build.")},
]
(workdir / "corpus.jsonl").write_text("\n".join(json.dumps(d) for d in corpus) + "\n")
(workdir / "candidates.txt").write_text(
    "\n".join(["redis", "sqlite", "mariadb", "ruby", "kotlin", "scala"]) + "\n")
(workdir / "seeds.json").write_text(json.dumps({"types": [
    {"name": "database", "seeds": ["mysql", "postgres"]},
    {"name": "language", "seeds": ["python", "java"]},
]}, indent=2))
(workdir / "gold.json").write_text(json.dumps(
    {w: "database" for w in ["mysql", "postgres", "redis", "sqlite", "mariadb"]}
    | {w: "language" for w in ["python", "java", "ruby", "kotlin", "scala"]}))

common = ["--candidates", str(workdir / "candidates.txt"),
          "--seeds", str(workdir / "seeds.json")]

# ---------------------------------------------------------------- stage 1
print("== index ==")
cli.main(["index", "--corpus", str(workdir / "corpus.jsonl"),
          "--out", str(workdir / "occurrences.jsonl")] + common)

# ---------------------------------------------------------------- stage 2
# Stand-in embedding stage: one content/context vector per occurrence
# record, read from occurrences.jsonl, written in the interchange format.
# Cluster structure is faked by giving database-ish and language-ish
# entities different base directions.
print("\n== embed (stand-in) ==")
spec = load_seeds(workdir / "seeds.json")
catalog = build_catalog(load_candidates(workdir / "candidates.txt", spec.all_seed_keys()), spec)
DATABASE_WORDS = {"mysql", "postgres", "redis", "sqlite", "mariadb"}

rows = []
for record in formats.read_occurrences(workdir / "occurrences.jsonl"):
    key = catalog.canonical_of(record.entity_id)
    center = np.zeros(DIM)
    center[0 if key in DATABASE_WORDS else 1] = 1.0
    rng = np.random.default_rng(zlib.crc32(f"{record.entity_id}:{record.sentence_id}".encode()))
    rows.append(formats.OccurrenceEmbeddingRow(
        record.entity_id, record.sentence_id,
        (center + 0.05 * rng.standard_normal(DIM)).astype(np.float32),
        (center + 0.05 * rng.standard_normal(DIM)).astype(np.float32),
    ))
formats.write_occurrence_embeddings(workdir / "occurrence_embeddings.jsonl", DIM, "hash-standin", rows)
print(f"wrote {len(rows)} occurrence embeddings")

# ---------------------------------------------------------------- stage 3
print("\n== aggregate ==")
cli.main(["aggregate", "--occurrence-embeddings", str(workdir / "occurrence_embeddings.jsonl"),
          "--out", str(workdir / "embeddings.jsonl")] + common)

# ---------------------------------------------------------------- stage 4
print("\n== expand ==")
cli.main(["expand", "--embeddings", str(workdir / "embeddings.jsonl"),
          "--k", "2", "--t", "3", "--out", str(workdir / "result.json")] + common)

# ---------------------------------------------------------------- stage 5
print("\n== eval ==")
cli.main(["eval", "--result", str(workdir / "result.json"),
          "--gold", str(workdir / "gold.json"),
          "--ks", "3", "--out", str(workdir / "report.json")])

print("\nexpansion result:")
for entity_set in json.loads((workdir / "result.json").read_text())["sets"]:
    members = ", ".join(m["entity"] for m in entity_set["expanded"])
    print(f"  {entity_set['name']}: {members}")
print(f"\nall files under {workdir}")
