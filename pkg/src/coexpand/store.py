"""Corpus-level entity embeddings and cosine similarity.

Per-occurrence vectors are averaged into one content vector and one
context vector per entity; a third variant concatenates the two.  Vectors
are stored in 32-bit precision, all accumulation (means, dot products,
norms) happens in 64-bit.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Iterable, Mapping, Sequence

import numpy as np

from .errors import DataError
from .formats import OccurrenceEmbeddingRow, read_aggregated

log = logging.getLogger(__name__)

__all__ = [
    "VARIANTS",
    "CorpusEmbedding",
    "EmbeddingStore",
    "aggregate",
    "cosine",
    "zero_norm_warnings",
]

VARIANTS = ("content", "context", "both")

_NORM_FLOOR = 1e-12

# Zero-norm vectors make cosine undefined; we define it as 0 and count a
# warning so pathological stores are visible in logs and tests.
_zero_norm_warnings = 0


def zero_norm_warnings() -> int:
    return _zero_norm_warnings


def _count_zero_norm(n: int = 1) -> None:
    global _zero_norm_warnings
    _zero_norm_warnings += n
    log.warning("cosine over a vector with norm below %.0e, defined as 0 (%d so far)", _NORM_FLOOR, _zero_norm_warnings)


@dataclass(frozen=True)
class CorpusEmbedding:
    """Aggregated vectors for one entity plus how many occurrences fed them."""

    entity_id: int
    content: np.ndarray
    context: np.ndarray
    occurrence_count: int


def aggregate(rows: Sequence[OccurrenceEmbeddingRow]) -> CorpusEmbedding:
    """Average one entity's per-occurrence vectors into its corpus-level vectors.

    Summation runs in 64-bit over rows ordered by ascending sentence_id
    (ties keep input order) so the result does not depend on how the rows
    arrived; the means are stored in 32-bit.
    """
    if not rows:
        raise ValueError("aggregate needs at least one occurrence embedding")
    entity_id = rows[0].entity_id
    if any(r.entity_id != entity_id for r in rows):
        raise ValueError("aggregate got rows for more than one entity")
    ordered = sorted(rows, key=lambda r: r.sentence_id)
    content = np.zeros(ordered[0].content.shape[0], dtype=np.float64)
    context = np.zeros(ordered[0].context.shape[0], dtype=np.float64)
    for r in ordered:
        content += np.asarray(r.content, dtype=np.float64)
        context += np.asarray(r.context, dtype=np.float64)
    n = len(ordered)
    return CorpusEmbedding(
        entity_id=entity_id,
        content=(content / n).astype(np.float32),
        context=(context / n).astype(np.float32),
        occurrence_count=n,
    )


def cosine(u: np.ndarray, v: np.ndarray) -> float:
    """Cosine similarity with 64-bit accumulation; 0 when either norm is ~0."""
    u64 = np.asarray(u, dtype=np.float64)
    v64 = np.asarray(v, dtype=np.float64)
    if u64.shape != v64.shape:
        raise ValueError(f"cosine dimension mismatch: {u64.shape} vs {v64.shape}")
    nu = np.sqrt(np.dot(u64, u64))
    nv = np.sqrt(np.dot(v64, v64))
    if nu < _NORM_FLOOR or nv < _NORM_FLOOR:
        _count_zero_norm()
        return 0.0
    return float(np.dot(u64, v64) / (nu * nv))


class EmbeddingStore:
    """Immutable lookup from entity_id to corpus-level vectors.

    ``normalize_parts`` L2-normalizes the content and context halves before
    concatenating them for the "both" variant (off by default: the plain
    concatenation lets vector magnitude weight the halves).
    """

    def __init__(self, entries: Iterable[CorpusEmbedding], *, normalize_parts: bool = False):
        self._entries: dict[int, CorpusEmbedding] = {}
        self.normalize_parts = normalize_parts
        dim: int | None = None
        for entry in entries:
            if entry.occurrence_count < 1:
                raise DataError(f"entity {entry.entity_id}: occurrence count must be >= 1")
            if entry.content.shape != entry.context.shape:
                raise DataError(f"entity {entry.entity_id}: content/context dimensions differ")
            if dim is None:
                dim = entry.content.shape[0]
            elif entry.content.shape[0] != dim:
                raise DataError(
                    f"entity {entry.entity_id}: dimension {entry.content.shape[0]} != store dimension {dim}"
                )
            if entry.entity_id in self._entries:
                raise DataError(f"entity {entry.entity_id} appears twice in the store")
            self._entries[entry.entity_id] = entry
        if dim is None:
            raise DataError("embedding store is empty")
        self.dim = dim

    @classmethod
    def from_file(cls, path, *, normalize_parts: bool = False) -> "EmbeddingStore":
        dim, raw = read_aggregated(path)
        entries = [
            CorpusEmbedding(entity_id=eid, content=content, context=context, occurrence_count=count)
            for eid, count, content, context in raw
        ]
        store = cls(entries, normalize_parts=normalize_parts)
        if store.dim != dim:
            raise DataError(f"aggregated file {path}: header dim {dim} does not match rows")
        return store

    def __contains__(self, entity_id: int) -> bool:
        return entity_id in self._entries

    def __len__(self) -> int:
        return len(self._entries)

    def entity_ids(self) -> list[int]:
        return list(self._entries)

    def entries(self) -> list[CorpusEmbedding]:
        return list(self._entries.values())

    def entry(self, entity_id: int) -> CorpusEmbedding:
        try:
            return self._entries[entity_id]
        except KeyError:
            raise KeyError(f"entity {entity_id} has no embedding") from None

    def variant_dim(self, variant: str) -> int:
        _check_variant(variant)
        return 2 * self.dim if variant == "both" else self.dim

    def vector_of(self, entity_id: int, variant: str) -> np.ndarray:
        """The entity's vector under the chosen variant; "both" is the concatenation."""
        _check_variant(variant)
        entry = self.entry(entity_id)
        if variant == "content":
            return entry.content
        if variant == "context":
            return entry.context
        content, context = entry.content, entry.context
        if self.normalize_parts:
            content = _unit(content)
            context = _unit(context)
        return np.concatenate([content, context])

    def matrix_of(self, entity_ids: Sequence[int], variant: str) -> np.ndarray:
        """Row-stacked 64-bit vectors for a batch of entities."""
        return np.stack([np.asarray(self.vector_of(e, variant), dtype=np.float64) for e in entity_ids])

    def similarity_matrix(self, row_ids: Sequence[int], col_ids: Sequence[int], variant: str) -> np.ndarray:
        """Cosine similarities between two entity batches, 64-bit throughout.

        Rows or columns whose vector has ~zero norm produce 0 entries, with
        the same warning accounting as the scalar ``cosine``.
        """
        rows = self.matrix_of(row_ids, variant)
        cols = self.matrix_of(col_ids, variant)
        row_norms = np.sqrt(np.einsum("ij,ij->i", rows, rows))
        col_norms = np.sqrt(np.einsum("ij,ij->i", cols, cols))
        row_zero = row_norms < _NORM_FLOOR
        col_zero = col_norms < _NORM_FLOOR
        n_zero = int(row_zero.sum() + col_zero.sum())
        if n_zero:
            _count_zero_norm(n_zero)
        safe_rows = np.where(row_zero, 1.0, row_norms)
        safe_cols = np.where(col_zero, 1.0, col_norms)
        sims = (rows @ cols.T) / np.outer(safe_rows, safe_cols)
        if n_zero:
            sims[row_zero, :] = 0.0
            sims[:, col_zero] = 0.0
        return sims


def _unit(vec: np.ndarray) -> np.ndarray:
    norm = float(np.sqrt(np.dot(vec.astype(np.float64), vec.astype(np.float64))))
    if norm < _NORM_FLOOR:
        _count_zero_norm()
        return vec
    return (vec.astype(np.float64) / norm).astype(np.float32)


def _check_variant(variant: str) -> None:
    if variant not in VARIANTS:
        raise ValueError(f"unknown embedding variant {variant!r}, expected one of {VARIANTS}")


def build_store(
    rows: Iterable[OccurrenceEmbeddingRow],
    *,
    normalize_parts: bool = False,
) -> tuple["EmbeddingStore", list[int]]:
    """Group occurrence rows by entity, aggregate each, and build the store.

    Returns the store plus the entity ids that contributed (useful for
    reporting which expected entities ended up with no embedding).
    """
    grouped: dict[int, list[OccurrenceEmbeddingRow]] = {}
    for row in rows:
        grouped.setdefault(row.entity_id, []).append(row)
    entries = [aggregate(entity_rows) for entity_rows in grouped.values()]
    store = EmbeddingStore(entries, normalize_parts=normalize_parts)
    return store, sorted(grouped)
