"""Iterative multi-set co-expansion.

Each iteration scores every remaining candidate against every entity set
(average cosine between the candidate and the set's current members),
assigns each candidate to its best-scoring set, and admits the k highest
scoring candidates overall to their matched sets.  Scores are frozen for
the duration of an iteration; sets compete for candidates, so an entity
joins exactly one set.  The loop stops once every set holds t expanded
members or no eligible candidate remains.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .corpus_io import EntityCatalog
from .errors import DataError
from .store import EmbeddingStore

log = logging.getLogger(__name__)

__all__ = [
    "EntitySet",
    "ExpandedMember",
    "ExpansionState",
    "ScoredCandidate",
    "matched_set",
    "run_coexpansion",
    "score_against_sets",
    "select_topk",
    "set_similarity",
]


@dataclass(frozen=True)
class ExpandedMember:
    entity_id: int
    score: float
    iteration: int
    rank: int


@dataclass
class EntitySet:
    """One growing set: its seeds, then the members admitted during expansion."""

    name: str
    seed_ids: tuple[int, ...]
    expanded: list[ExpandedMember] = field(default_factory=list)

    def member_ids(self) -> list[int]:
        return list(self.seed_ids) + [m.entity_id for m in self.expanded]


@dataclass
class ExpansionState:
    sets: list[EntitySet]
    variant: str
    k: int
    t: int
    iterations: int = 0
    underfilled: list[str] = field(default_factory=list)


@dataclass(frozen=True)
class ScoredCandidate:
    entity_id: int
    matched_set_index: int
    score: float


def score_against_sets(
    candidate_ids: Sequence[int],
    sets: Sequence[EntitySet],
    store: EmbeddingStore,
    variant: str,
) -> np.ndarray:
    """Similarity of every candidate to every set: mean cosine over the set's members.

    Returns an (n_candidates, n_sets) array in 64-bit.  This is the one
    scoring path; the scalar helpers below are thin views over it.
    """
    columns = []
    for entity_set in sets:
        members = entity_set.member_ids()
        if not members:
            raise DataError(f"set {entity_set.name!r} has no members to score against")
        sims = store.similarity_matrix(candidate_ids, members, variant)
        columns.append(sims.mean(axis=1))
    return np.stack(columns, axis=1)


def set_similarity(entity_id: int, entity_set: EntitySet, store: EmbeddingStore, variant: str) -> float:
    """Average cosine between one entity and every current member of one set."""
    return float(score_against_sets([entity_id], [entity_set], store, variant)[0, 0])


def matched_set(
    entity_id: int,
    sets: Sequence[EntitySet],
    store: EmbeddingStore,
    variant: str,
) -> tuple[int, float]:
    """The set this entity is most similar to; ties go to the lowest set index."""
    row = score_against_sets([entity_id], sets, store, variant)[0]
    index = int(np.argmax(row))
    return index, float(row[index])


def select_topk(
    candidate_ids: Sequence[int],
    state: ExpansionState,
    store: EmbeddingStore,
    canonical_of: Callable[[int], str],
) -> list[ScoredCandidate]:
    """The k best-scoring eligible candidates, each tagged with its matched set.

    Candidates whose matched set already holds t expanded members are
    ineligible (they are not rerouted to their second-best set).  Ties on
    score break by canonical key, ascending.  Because each candidate
    contributes its own score independently, taking the k highest equals
    maximizing the summed score over all size-k candidate subsets.
    """
    if not candidate_ids:
        return []
    scores = score_against_sets(candidate_ids, state.sets, store, state.variant)
    matched = np.argmax(scores, axis=1)
    full = [len(s.expanded) >= state.t for s in state.sets]

    eligible: list[ScoredCandidate] = []
    for pos, entity_id in enumerate(candidate_ids):
        set_index = int(matched[pos])
        if full[set_index]:
            continue
        eligible.append(ScoredCandidate(entity_id, set_index, float(scores[pos, set_index])))

    eligible.sort(key=lambda c: (-c.score, canonical_of(c.entity_id)))
    return eligible[: state.k]


def run_coexpansion(
    catalog: EntityCatalog,
    store: EmbeddingStore,
    variant: str,
    k: int = 10,
    t: int = 30,
    observer: Callable[[ExpansionState], None] | None = None,
) -> ExpansionState:
    """Expand all seed sets until each holds t new entities (or candidates run out).

    Within an iteration the selected entities are appended to their matched
    sets in descending score order; a set that fills up mid-iteration stops
    accepting and the leftover selections stay in the pool.  Rank is the
    append order within each set, counted across iterations.

    ``observer``, if given, is called with the state after every iteration;
    it exists so callers can watch invariants or log progress mid-run.
    """
    if k < 1:
        raise ValueError(f"k must be >= 1, got {k}")
    if t < 0:
        raise ValueError(f"t must be >= 0, got {t}")

    missing_seeds = [
        catalog.canonical_of(seed_id)
        for _, seed_ids in catalog.seed_ids_by_type
        for seed_id in seed_ids
        if seed_id not in store
    ]
    if missing_seeds:
        raise DataError(f"seeds with no embedding (similarity to their set is undefined): {missing_seeds}")

    pool = [entity_id for entity_id in catalog.pool_ids if entity_id in store]
    skipped = len(catalog.pool_ids) - len(pool)
    if skipped:
        log.info("expansion: %d pool entities have no embedding and are out of the ranking", skipped)

    state = ExpansionState(
        sets=[EntitySet(name=name, seed_ids=seed_ids) for name, seed_ids in catalog.seed_ids_by_type],
        variant=variant,
        k=k,
        t=t,
    )

    while not all(len(s.expanded) >= t for s in state.sets):
        selected = select_topk(pool, state, store, catalog.canonical_of)
        if not selected:
            state.underfilled = [s.name for s in state.sets if len(s.expanded) < t]
            log.warning("expansion: candidates exhausted; underfilled sets: %s", state.underfilled)
            break
        state.iterations += 1
        admitted: set[int] = set()
        for candidate in selected:
            target = state.sets[candidate.matched_set_index]
            if len(target.expanded) >= t:
                continue
            target.expanded.append(
                ExpandedMember(
                    entity_id=candidate.entity_id,
                    score=candidate.score,
                    iteration=state.iterations,
                    rank=len(target.expanded) + 1,
                )
            )
            admitted.add(candidate.entity_id)
        pool = [entity_id for entity_id in pool if entity_id not in admitted]
        if observer is not None:
            observer(state)
    return state
