"""Precision@K against gold labels.

For each type, the fraction of its top-K expanded entities whose gold
label matches the type; the headline number is the macro average across
types.  Entities missing from the gold map count as incorrect.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

from .corpus_io import GoldLabels

__all__ = ["EvalReport", "precision_at_k"]


@dataclass
class EvalReport:
    per_type: dict[str, dict[str, float]]
    macro: dict[str, float]
    unknown_entities: int
    truncated: dict[str, list[str]] = field(default_factory=dict)


def precision_at_k(
    ranked_sets: Sequence[tuple[str, Sequence[str]]],
    gold: GoldLabels,
    ks: Sequence[int],
) -> EvalReport:
    """Score expansion output: (type_name, expanded keys in rank order) per set.

    When a set has fewer than K expanded members its actual count becomes
    the denominator and the report flags the truncation; an empty set
    scores 0.  ``unknown_entities`` counts the distinct examined entities
    that have no gold label at all.
    """
    if not ranked_sets:
        raise ValueError("precision_at_k needs at least one ranked set")
    if not ks:
        raise ValueError("precision_at_k needs at least one K")
    for k in ks:
        if k <= 0:
            raise ValueError(f"K must be positive, got {k}")

    per_type: dict[str, dict[str, float]] = {}
    truncated: dict[str, list[str]] = {}
    macro: dict[str, float] = {}
    unknown: set[str] = set()
    max_k = max(ks)

    for type_name, keys in ranked_sets:
        per_type[type_name] = {}
        for key in keys[:max_k]:
            if gold.type_of(key) is None:
                unknown.add(key)
        for k in ks:
            top = keys[:k]
            hits = sum(1 for key in top if gold.type_of(key) == type_name)
            denom = len(top)
            per_type[type_name][f"P@{k}"] = hits / denom if denom else 0.0
            if denom < k:
                truncated.setdefault(type_name, []).append(f"P@{k}")

    n_types = len(ranked_sets)
    for k in ks:
        macro[f"P@{k}"] = sum(per_type[name][f"P@{k}"] for name, _ in ranked_sets) / n_types

    return EvalReport(
        per_type=per_type,
        macro=macro,
        unknown_entities=len(unknown),
        truncated=truncated,
    )
