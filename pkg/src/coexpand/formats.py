"""Readers and writers for the pipeline's interchange files.

Every stage boundary is a file so stages can run as separate processes
(the embedding stage is a separate program entirely).  All floats are
serialized from 32-bit values through Python's repr, which round-trips
exactly and keeps outputs byte-deterministic.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Iterator

import numpy as np

from .errors import DataError
from .indexer import OccurrenceRecord

__all__ = [
    "OccurrenceEmbeddingRow",
    "read_aggregated",
    "read_occurrence_embeddings",
    "read_occurrences",
    "read_result",
    "write_aggregated",
    "write_occurrence_embeddings",
    "write_occurrences",
    "write_report",
    "write_result",
    "write_summary",
]


def _f32_floats(vector) -> list[float]:
    """Vector components as Python floats carrying exactly 32-bit precision."""
    return [float(x) for x in np.asarray(vector, dtype=np.float32)]


def _check_vector(values, dim: int, where: str) -> np.ndarray:
    if not isinstance(values, list) or len(values) != dim:
        raise DataError(f"{where}: expected a vector of {dim} numbers")
    vec = np.asarray(values, dtype=np.float32)
    if not np.all(np.isfinite(vec)):
        raise DataError(f"{where}: vector has non-finite components")
    return vec


def write_occurrences(path: str | Path, records: Iterable[OccurrenceRecord]) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for r in records:
            row = {
                "entity_id": r.entity_id,
                "sentence_id": r.sentence_id,
                "start": r.start,
                "end": r.end,
                "sentence": r.sentence,
            }
            fh.write(json.dumps(row, ensure_ascii=False, separators=(",", ":")) + "\n")


def read_occurrences(path: str | Path) -> Iterator[OccurrenceRecord]:
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as exc:
                raise DataError(f"occurrences file {path}:{lineno}: {exc.msg}") from exc
            try:
                yield OccurrenceRecord(
                    entity_id=int(obj["entity_id"]),
                    sentence_id=str(obj["sentence_id"]),
                    start=int(obj["start"]),
                    end=int(obj["end"]),
                    sentence=str(obj["sentence"]),
                )
            except (KeyError, TypeError, ValueError) as exc:
                raise DataError(f"occurrences file {path}:{lineno}: bad record ({exc})") from exc


def write_summary(path: str | Path, counts: dict[int, int]) -> None:
    ordered = {str(entity_id): counts[entity_id] for entity_id in sorted(counts)}
    Path(path).write_text(json.dumps(ordered, indent=2) + "\n", encoding="utf-8")


@dataclass(frozen=True)
class OccurrenceEmbeddingRow:
    """One per-occurrence embedding pair from the embedding stage."""

    entity_id: int
    sentence_id: str
    content: np.ndarray
    context: np.ndarray


def write_occurrence_embeddings(
    path: str | Path, dim: int, model: str, rows: Iterable[OccurrenceEmbeddingRow]
) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(json.dumps({"dim": dim, "model": model}, separators=(",", ":")) + "\n")
        for r in rows:
            row = {
                "entity_id": r.entity_id,
                "sentence_id": r.sentence_id,
                "content": _f32_floats(r.content),
                "context": _f32_floats(r.context),
            }
            fh.write(json.dumps(row, ensure_ascii=False, separators=(",", ":")) + "\n")


def read_occurrence_embeddings(path: str | Path) -> tuple[dict, list[OccurrenceEmbeddingRow]]:
    """Read the embedding stage's output: a header line, then one row per occurrence."""
    with open(path, encoding="utf-8") as fh:
        header_line = fh.readline()
        try:
            header = json.loads(header_line)
            dim = int(header["dim"])
        except (json.JSONDecodeError, KeyError, TypeError, ValueError) as exc:
            raise DataError(f'embeddings file {path}: first line must be a header with "dim" ({exc})') from exc
        rows: list[OccurrenceEmbeddingRow] = []
        for lineno, line in enumerate(fh, start=2):
            if not line.strip():
                continue
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as exc:
                raise DataError(f"embeddings file {path}:{lineno}: {exc.msg}") from exc
            where = f"embeddings file {path}:{lineno}"
            try:
                entity_id = int(obj["entity_id"])
                sentence_id = str(obj["sentence_id"])
            except (KeyError, TypeError, ValueError) as exc:
                raise DataError(f"{where}: bad record ({exc})") from exc
            rows.append(
                OccurrenceEmbeddingRow(
                    entity_id=entity_id,
                    sentence_id=sentence_id,
                    content=_check_vector(obj.get("content"), dim, where),
                    context=_check_vector(obj.get("context"), dim, where),
                )
            )
    return header, rows


def write_aggregated(path: str | Path, dim: int, entries: Iterable) -> None:
    """Write corpus-level embeddings: header with the dimension, then one row per entity."""
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(json.dumps({"dim": dim}, separators=(",", ":")) + "\n")
        for e in sorted(entries, key=lambda e: e.entity_id):
            row = {
                "entity_id": e.entity_id,
                "count": e.occurrence_count,
                "content": _f32_floats(e.content),
                "context": _f32_floats(e.context),
            }
            fh.write(json.dumps(row, ensure_ascii=False, separators=(",", ":")) + "\n")


def read_aggregated(path: str | Path) -> tuple[int, list[tuple[int, int, np.ndarray, np.ndarray]]]:
    """Read corpus-level embeddings as (dim, [(entity_id, count, content, context), ...])."""
    with open(path, encoding="utf-8") as fh:
        try:
            header = json.loads(fh.readline())
            dim = int(header["dim"])
        except (json.JSONDecodeError, KeyError, TypeError, ValueError) as exc:
            raise DataError(f'aggregated file {path}: first line must be a header with "dim" ({exc})') from exc
        entries = []
        for lineno, line in enumerate(fh, start=2):
            if not line.strip():
                continue
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as exc:
                raise DataError(f"aggregated file {path}:{lineno}: {exc.msg}") from exc
            where = f"aggregated file {path}:{lineno}"
            try:
                entity_id = int(obj["entity_id"])
                count = int(obj["count"])
            except (KeyError, TypeError, ValueError) as exc:
                raise DataError(f"{where}: bad record ({exc})") from exc
            if count < 1:
                raise DataError(f"{where}: occurrence count must be >= 1")
            entries.append(
                (
                    entity_id,
                    count,
                    _check_vector(obj.get("content"), dim, where),
                    _check_vector(obj.get("context"), dim, where),
                )
            )
    return dim, entries


def _round_score(score: float) -> float:
    return float(f"{score:.6f}")


def write_result(path: str | Path, state, canonical_of) -> None:
    """Write the final expansion result with canonical keys and 6-decimal scores."""
    sets = []
    for entity_set in state.sets:
        entry: dict = {
            "name": entity_set.name,
            "seeds": [canonical_of(i) for i in entity_set.seed_ids],
            "expanded": [
                {
                    "entity": canonical_of(m.entity_id),
                    "rank": m.rank,
                    "score": _round_score(m.score),
                    "iteration": m.iteration,
                }
                for m in entity_set.expanded
            ],
        }
        if entity_set.name in state.underfilled:
            entry["underfilled"] = True
        sets.append(entry)
    doc = {"variant": state.variant, "k": state.k, "t": state.t, "sets": sets}
    Path(path).write_text(json.dumps(doc, ensure_ascii=False, indent=2) + "\n", encoding="utf-8")


def read_result(path: str | Path) -> dict:
    try:
        doc = json.loads(Path(path).read_text(encoding="utf-8"))
    except OSError as exc:
        raise DataError(f"cannot read result file {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise DataError(f"result file {path} is not valid JSON (line {exc.lineno}): {exc.msg}") from exc
    if not isinstance(doc, dict) or not isinstance(doc.get("sets"), list):
        raise DataError(f'result file {path} must be an object with a "sets" list')
    return doc


def write_report(path: str | Path, report) -> None:
    doc = {
        "per_type": report.per_type,
        "macro": report.macro,
        "unknown_entities": report.unknown_entities,
    }
    if report.truncated:
        doc["truncated"] = report.truncated
    Path(path).write_text(json.dumps(doc, ensure_ascii=False, indent=2) + "\n", encoding="utf-8")
