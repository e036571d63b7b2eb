"""Corpus-free synthetic fixtures for self-contained testing.

Generates well-separated embedding clusters (one per entity type) plus the
matching candidates, seeds, and gold files, all reproducible from one RNG
seed.  Cluster membership is the ground truth, so expansion quality can be
scored without a corpus or an embedding model.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .corpus_io import build_catalog, load_candidates, load_seeds
from .formats import write_aggregated
from .store import CorpusEmbedding

__all__ = ["SynthFixtures", "generate_synthetic_fixtures"]


@dataclass(frozen=True)
class SynthFixtures:
    candidates: Path
    seeds: Path
    gold: Path
    embeddings: Path


def generate_synthetic_fixtures(
    out_dir: str | Path,
    *,
    num_types: int = 4,
    dim: int = 16,
    per_cluster: int = 50,
    noise: float = 0.05,
    seeds_per_cluster: int = 5,
    rng_seed: int = 0,
) -> SynthFixtures:
    """Write candidates.txt, seeds.json, gold.json, and embeddings.jsonl.

    Cluster centers are the rows of an orthonormal basis drawn at random;
    every entity's content and context vectors are its center plus
    independent Gaussian noise.  With ``noise=0`` each vector equals its
    center exactly.
    """
    if num_types < 2:
        raise ValueError(f"need at least 2 types, got {num_types}")
    if dim < num_types:
        raise ValueError(f"dim ({dim}) must be >= num_types ({num_types}) for orthonormal centers")
    if per_cluster < 1 or seeds_per_cluster < 1:
        raise ValueError("per_cluster and seeds_per_cluster must be >= 1")
    if noise < 0:
        raise ValueError(f"noise must be >= 0, got {noise}")

    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    rng = np.random.default_rng(rng_seed)

    q, _ = np.linalg.qr(rng.standard_normal((dim, num_types)))
    centers = q.T  # one orthonormal row per type

    type_names = [f"type{t}" for t in range(num_types)]
    candidate_names = [[f"item{t}_{i:03d}" for i in range(per_cluster)] for t in range(num_types)]
    seed_names = [[f"seed{t}_{j}" for j in range(seeds_per_cluster)] for t in range(num_types)]

    fixtures = SynthFixtures(
        candidates=out / "candidates.txt",
        seeds=out / "seeds.json",
        gold=out / "gold.json",
        embeddings=out / "embeddings.jsonl",
    )

    fixtures.candidates.write_text(
        "".join(name + "\n" for names in candidate_names for name in names), encoding="utf-8"
    )

    seeds_doc = {
        "types": [
            {"name": type_names[t], "seeds": seed_names[t]} for t in range(num_types)
        ]
    }
    fixtures.seeds.write_text(json.dumps(seeds_doc, indent=2) + "\n", encoding="utf-8")

    gold = {name: type_names[t] for t in range(num_types) for name in candidate_names[t]}
    gold.update({name: type_names[t] for t in range(num_types) for name in seed_names[t]})
    fixtures.gold.write_text(json.dumps(gold, indent=2) + "\n", encoding="utf-8")

    # Build the catalog through the real loaders so ids line up with what
    # every later stage reconstructs from these same files.
    seed_spec = load_seeds(fixtures.seeds)
    pool = load_candidates(fixtures.candidates, seed_spec.all_seed_keys())
    catalog = build_catalog(pool, seed_spec)
    cluster_of = {name: t for t in range(num_types) for name in candidate_names[t]}
    cluster_of.update({name: t for t in range(num_types) for name in seed_names[t]})

    entries = []
    for entity in catalog.entities:
        center = centers[cluster_of[entity.canonical]]
        content = center + noise * rng.standard_normal(dim)
        context = center + noise * rng.standard_normal(dim)
        entries.append(
            CorpusEmbedding(
                entity_id=entity.id,
                content=content.astype(np.float32),
                context=context.astype(np.float32),
                occurrence_count=1,
            )
        )
    write_aggregated(fixtures.embeddings, dim, entries)
    return fixtures
