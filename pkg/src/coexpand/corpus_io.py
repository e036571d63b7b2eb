"""Input loading and entity identity.

Owns the canonical-key convention used everywhere else: an entity's
canonical key is its surface form lowercased with whitespace runs
collapsed to single spaces and trimmed.  No stemming, no punctuation
stripping, so keys like "c++" or "obj c" survive intact.
"""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Iterator, Mapping

from .errors import DataError

log = logging.getLogger(__name__)

__all__ = [
    "CandidateEntity",
    "Document",
    "EntityCatalog",
    "GoldLabels",
    "SeedSet",
    "SeedSpec",
    "build_catalog",
    "canonicalize",
    "iter_corpus",
    "load_candidates",
    "load_gold",
    "load_seeds",
]


def canonicalize(surface: str) -> str:
    """Return the canonical key for a surface form.

    Lowercases per character, replaces every maximal whitespace run with a
    single space, and trims.  Returns "" for strings that are empty after
    trimming; callers decide whether that is an error.
    """
    return " ".join(surface.lower().split())


@dataclass(frozen=True)
class CandidateEntity:
    """A surface form with its canonical key and a dense integer id."""

    id: int
    surface: str
    canonical: str


@dataclass(frozen=True)
class SeedSet:
    """One entity type with its ordered seed keys (canonicalized)."""

    name: str
    seeds: tuple[str, ...]
    surfaces: tuple[str, ...]


@dataclass(frozen=True)
class SeedSpec:
    """Ordered seed sets for all entity types, as read from the seeds file."""

    types: tuple[SeedSet, ...]

    def all_seed_keys(self) -> set[str]:
        return {key for t in self.types for key in t.seeds}


class GoldLabels:
    """Canonical entity key -> type name.  Entities absent from the map are unknown."""

    def __init__(self, labels: Mapping[str, str]):
        self._labels = dict(labels)

    def type_of(self, canonical_key: str) -> str | None:
        return self._labels.get(canonical_key)

    def __len__(self) -> int:
        return len(self._labels)

    def __contains__(self, canonical_key: str) -> bool:
        return canonical_key in self._labels


@dataclass(frozen=True)
class Document:
    doc_id: str
    text: str


def load_candidates(path: str | Path, reserved_keys: Iterable[str] = ()) -> list[CandidateEntity]:
    """Load the candidate pool: one surface form per line, ``#``-prefixed lines ignored.

    Deduplicates by canonical key (first occurrence keeps its surface form)
    and drops entries whose key is in ``reserved_keys`` (seed keys are never
    re-extracted).  Ids are assigned densely, in file order, over the
    surviving entities.
    """
    reserved = set(reserved_keys)
    try:
        lines = Path(path).read_text(encoding="utf-8").splitlines()
    except OSError as exc:
        raise DataError(f"cannot read candidates file {path}: {exc}") from exc

    entities: list[CandidateEntity] = []
    seen: set[str] = set()
    for lineno, line in enumerate(lines, start=1):
        if line.startswith("#"):
            continue
        key = canonicalize(line)
        if not key:
            if line.strip("\r"):
                log.warning("candidates %s:%d: entity empty after canonicalization, skipped", path, lineno)
            continue
        if key in seen:
            continue
        seen.add(key)
        if key in reserved:
            continue
        entities.append(CandidateEntity(id=len(entities), surface=line, canonical=key))

    if not entities:
        raise DataError(f"candidates file {path} contains no usable entities after filtering")
    return entities


def load_seeds(path: str | Path) -> SeedSpec:
    """Load the typed seed sets from a JSON file.

    Expected shape: ``{"types": [{"name": "OS", "seeds": ["windows", ...]}, ...]}``.
    Seed keys are canonicalized; type order and seed order are preserved.
    At least two types are required, and no key may appear twice, whether
    within one type or across types.
    """
    try:
        raw = json.loads(Path(path).read_text(encoding="utf-8"))
    except OSError as exc:
        raise DataError(f"cannot read seeds file {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise DataError(f"seeds file {path} is not valid JSON (line {exc.lineno}): {exc.msg}") from exc

    if not isinstance(raw, dict) or not isinstance(raw.get("types"), list):
        raise DataError(f'seeds file {path} must be an object with a "types" list')

    sets: list[SeedSet] = []
    names: set[str] = set()
    key_owner: dict[str, str] = {}
    for entry in raw["types"]:
        if not isinstance(entry, dict) or not isinstance(entry.get("name"), str) or not isinstance(entry.get("seeds"), list):
            raise DataError(f'seeds file {path}: each type needs a "name" string and a "seeds" list')
        name = entry["name"]
        if name in names:
            raise DataError(f"seeds file {path}: duplicate type name {name!r}")
        names.add(name)
        keys: list[str] = []
        surfaces: list[str] = []
        for surface in entry["seeds"]:
            if not isinstance(surface, str):
                raise DataError(f"seeds file {path}: type {name!r} has a non-string seed {surface!r}")
            key = canonicalize(surface)
            if not key:
                raise DataError(f"seeds file {path}: type {name!r} has a seed that is empty after canonicalization")
            owner = key_owner.get(key)
            if owner is not None:
                where = "twice in that type" if owner == name else f"in both {owner!r} and {name!r}"
                raise DataError(f"seeds file {path}: seed {key!r} appears {where}")
            key_owner[key] = name
            keys.append(key)
            surfaces.append(surface)
        if not keys:
            raise DataError(f"seeds file {path}: type {name!r} has no seeds")
        sets.append(SeedSet(name=name, seeds=tuple(keys), surfaces=tuple(surfaces)))

    if len(sets) < 2:
        raise DataError(f"seeds file {path} defines {len(sets)} type(s); co-expansion needs at least 2")
    return SeedSpec(types=tuple(sets))


def load_gold(path: str | Path) -> GoldLabels:
    """Load gold labels from a JSON object mapping entity string -> type name.

    Keys are canonicalized.  Entities missing from the map are treated as
    unlabeled (incorrect for any type) at query time.
    """
    try:
        raw = json.loads(Path(path).read_text(encoding="utf-8"))
    except OSError as exc:
        raise DataError(f"cannot read gold file {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise DataError(f"gold file {path} is not valid JSON (line {exc.lineno}): {exc.msg}") from exc

    if not isinstance(raw, dict):
        raise DataError(f"gold file {path} must be a JSON object mapping entity to type name")

    labels: dict[str, str] = {}
    for surface, type_name in raw.items():
        if not isinstance(type_name, str):
            raise DataError(f"gold file {path}: entry {surface!r} has a non-string type {type_name!r}")
        key = canonicalize(surface)
        if not key:
            raise DataError(f"gold file {path}: entry {surface!r} is empty after canonicalization")
        if key in labels:
            log.warning("gold %s: duplicate key %r after canonicalization, keeping first label", path, key)
            continue
        labels[key] = type_name
    return GoldLabels(labels)


def iter_corpus(path: str | Path) -> Iterator[Document]:
    """Stream documents from a JSON-lines corpus file.

    Each line is an object ``{"doc_id": "...", "text": "..."}``.  Duplicate
    doc_ids are fatal.
    """
    seen: set[str] = set()
    try:
        handle = open(path, encoding="utf-8")
    except OSError as exc:
        raise DataError(f"cannot read corpus file {path}: {exc}") from exc
    with handle:
        for lineno, line in enumerate(handle, start=1):
            if not line.strip():
                continue
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as exc:
                raise DataError(f"corpus file {path}:{lineno} is not valid JSON: {exc.msg}") from exc
            if not isinstance(obj, dict) or not isinstance(obj.get("doc_id"), str) or not isinstance(obj.get("text"), str):
                raise DataError(f'corpus file {path}:{lineno} needs string "doc_id" and "text" fields')
            doc_id = obj["doc_id"]
            if doc_id in seen:
                raise DataError(f"corpus file {path}:{lineno} repeats doc_id {doc_id!r}")
            seen.add(doc_id)
            yield Document(doc_id=doc_id, text=obj["text"])


@dataclass(frozen=True)
class EntityCatalog:
    """All entities known to one run: the candidate pool followed by the seeds.

    Pool entities keep the dense ids 0..n-1 assigned at load time; seed
    entities get the ids after the pool, in type order then seed order.
    Canonical keys are unique across the whole catalog because seed keys
    were removed from the pool at load time.
    """

    entities: tuple[CandidateEntity, ...]
    pool_ids: tuple[int, ...]
    seed_ids_by_type: tuple[tuple[str, tuple[int, ...]], ...]
    _by_key: dict[str, int] = field(repr=False, default_factory=dict)

    def __post_init__(self):
        by_key = {e.canonical: e.id for e in self.entities}
        if len(by_key) != len(self.entities):
            raise DataError("catalog has entities with duplicate canonical keys")
        object.__setattr__(self, "_by_key", by_key)

    def entity(self, entity_id: int) -> CandidateEntity:
        return self.entities[entity_id]

    def canonical_of(self, entity_id: int) -> str:
        return self.entities[entity_id].canonical

    def id_of(self, canonical_key: str) -> int:
        return self._by_key[canonical_key]

    def __len__(self) -> int:
        return len(self.entities)


def build_catalog(pool: list[CandidateEntity], seed_spec: SeedSpec) -> EntityCatalog:
    """Assemble the catalog shared by the indexing, aggregation, and expansion stages.

    Rebuilding from the same candidates and seeds files always yields the
    same ids, which is what lets the pipeline stages communicate through
    files keyed by entity_id.
    """
    entities = list(pool)
    seed_ids: list[tuple[str, tuple[int, ...]]] = []
    for seed_set in seed_spec.types:
        ids = []
        for key, surface in zip(seed_set.seeds, seed_set.surfaces):
            entity = CandidateEntity(id=len(entities), surface=surface, canonical=key)
            entities.append(entity)
            ids.append(entity.id)
        seed_ids.append((seed_set.name, tuple(ids)))
    return EntityCatalog(
        entities=tuple(entities),
        pool_ids=tuple(e.id for e in pool),
        seed_ids_by_type=tuple(seed_ids),
    )
