"""Sentence splitting and corpus-wide occurrence indexing.

Finds, for every entity, all places its canonical key occurs in the corpus.
Matching is case-insensitive and whitespace-normalized: it runs over a
"shadow" of each sentence (lowercased, whitespace runs collapsed to single
spaces) with an offset map back to original character positions, so a
multi-word key matches across any single run of whitespace.  A match must
not adjoin a letter or digit on the outside; punctuation that is part of
the key (the "+" in "c++") is matched like any other character.

All entities are matched simultaneously with an Aho-Corasick automaton
built once over the canonical keys.  A naive per-entity scan with the same
match predicate lives in the test suite as the correctness oracle.
"""

from __future__ import annotations

import logging
import os
from collections import deque
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import Iterable, Sequence

from .corpus_io import CandidateEntity, Document, canonicalize

log = logging.getLogger(__name__)

__all__ = [
    "IndexResult",
    "MultiPatternMatcher",
    "OccurrenceRecord",
    "Sentence",
    "index_corpus",
    "split_sentences",
]

_TERMINATORS = ".?!"


@dataclass(frozen=True)
class Sentence:
    doc_id: str
    index: int
    text: str

    @property
    def sentence_id(self) -> str:
        return f"{self.doc_id}#{self.index}"


@dataclass(frozen=True)
class OccurrenceRecord:
    """One hit of an entity in a sentence, as an original-text character span."""

    entity_id: int
    sentence_id: str
    start: int
    end: int
    sentence: str


def split_sentences(doc: Document) -> list[Sentence]:
    """Split a document deterministically.

    Breaks at newlines and after each of ``. ? !`` when the next character
    is whitespace; pieces are trimmed and empty pieces dropped.  The rule is
    deliberately crude ("e.g. test" becomes two sentences) in exchange for
    being reproducible byte for byte.
    """
    text = doc.text
    n = len(text)
    pieces: list[str] = []
    buf: list[str] = []
    for i, ch in enumerate(text):
        if ch == "\n":
            pieces.append("".join(buf))
            buf = []
            continue
        buf.append(ch)
        if ch in _TERMINATORS and i + 1 < n and text[i + 1].isspace():
            pieces.append("".join(buf))
            buf = []
    pieces.append("".join(buf))

    sentences: list[Sentence] = []
    for piece in pieces:
        piece = piece.strip()
        if piece:
            sentences.append(Sentence(doc_id=doc.doc_id, index=len(sentences), text=piece))
    return sentences


def _shadow(text: str) -> tuple[str, list[int], list[int]]:
    """Lowercased, whitespace-collapsed copy of ``text`` with an offset map.

    Returns (shadow, starts, ends) where shadow[i] originates from
    text[starts[i]:ends[i]].  A whitespace run becomes one " " covering the
    whole run; a character whose lowercase form expands to several
    characters (rare outside ASCII) contributes one shadow position per
    expanded character, all mapped to the source character.
    """
    chars: list[str] = []
    starts: list[int] = []
    ends: list[int] = []
    i = 0
    n = len(text)
    while i < n:
        ch = text[i]
        if ch.isspace():
            j = i + 1
            while j < n and text[j].isspace():
                j += 1
            chars.append(" ")
            starts.append(i)
            ends.append(j)
            i = j
        else:
            for low in ch.lower():
                chars.append(low)
                starts.append(i)
                ends.append(i + 1)
            i += 1
    return "".join(chars), starts, ends


class MultiPatternMatcher:
    """Aho-Corasick automaton over canonical entity keys.

    Built once and shared read-only by however many workers scan the
    corpus.  ``find_in_text`` reports every (entity_id, start, end) whose
    span satisfies the match predicate, ordered by (start, entity_id).
    """

    def __init__(self, entities: Iterable[CandidateEntity]):
        self._patterns: list[tuple[int, str]] = []
        seen: dict[str, int] = {}
        for entity in entities:
            if entity.canonical in seen:
                raise ValueError(
                    f"duplicate canonical key {entity.canonical!r} "
                    f"(entities {seen[entity.canonical]} and {entity.id})"
                )
            seen[entity.canonical] = entity.id
            self._patterns.append((entity.id, entity.canonical))

        # Trie with goto/fail links; out[node] lists pattern indices ending there.
        self._goto: list[dict[str, int]] = [{}]
        self._out: list[list[int]] = [[]]
        for pidx, (_, key) in enumerate(self._patterns):
            node = 0
            for ch in key:
                nxt = self._goto[node].get(ch)
                if nxt is None:
                    nxt = len(self._goto)
                    self._goto.append({})
                    self._out.append([])
                    self._goto[node][ch] = nxt
                node = nxt
            self._out[node].append(pidx)

        self._fail = [0] * len(self._goto)
        queue: deque[int] = deque()
        for node in self._goto[0].values():
            queue.append(node)
        while queue:
            current = queue.popleft()
            for ch, nxt in self._goto[current].items():
                queue.append(nxt)
                fail = self._fail[current]
                while fail and ch not in self._goto[fail]:
                    fail = self._fail[fail]
                target = self._goto[fail].get(ch, 0)
                self._fail[nxt] = target if target != nxt else 0
                self._out[nxt] = self._out[nxt] + self._out[self._fail[nxt]]

    def __len__(self) -> int:
        return len(self._patterns)

    def entity_ids(self) -> list[int]:
        return [entity_id for entity_id, _ in self._patterns]

    def find_in_text(self, text: str) -> list[tuple[int, int, int]]:
        """All (entity_id, start, end) matches in one sentence's text."""
        shadow, starts, ends = _shadow(text)
        goto = self._goto
        fail = self._fail
        out = self._out
        patterns = self._patterns
        n = len(text)

        hits: list[tuple[int, int, int]] = []
        node = 0
        for i, ch in enumerate(shadow):
            while node and ch not in goto[node]:
                node = fail[node]
            node = goto[node].get(ch, 0)
            for pidx in out[node]:
                entity_id, key = patterns[pidx]
                start = starts[i - len(key) + 1]
                end = ends[i]
                # Word boundary on the original text: the characters just
                # outside the span must not be letters or digits.
                if start > 0 and text[start - 1].isalnum():
                    continue
                if end < n and text[end].isalnum():
                    continue
                # Guard against shadow/original drift on multi-character
                # case foldings: the mapped span must canonicalize back to
                # the key exactly.
                if canonicalize(text[start:end]) != key:
                    continue
                hits.append((entity_id, start, end))
        hits.sort(key=lambda h: (h[1], h[0]))
        return hits


@dataclass(frozen=True)
class IndexResult:
    """Deterministically ordered occurrence stream plus per-entity sentence counts."""

    records: tuple[OccurrenceRecord, ...]
    counts: dict[int, int]


# Shared automaton for forked worker processes; set just before the pool is
# created so children inherit it by fork instead of by pickling.
_WORKER_MATCHER: MultiPatternMatcher | None = None


def _match_batch(batch: Sequence[tuple[str, str]]) -> list[list[tuple[int, int, int]]]:
    assert _WORKER_MATCHER is not None
    return [_WORKER_MATCHER.find_in_text(text) for _, text in batch]


def index_corpus(
    documents: Iterable[Document],
    matcher: MultiPatternMatcher,
    *,
    dedup_sentences: bool = False,
    max_occurrences: int | None = None,
    jobs: int = 1,
) -> IndexResult:
    """Scan the whole corpus and emit every entity occurrence.

    The record stream is ordered by (doc_id, sentence index, start,
    entity_id) regardless of ``jobs``; parallel workers each scan a slice of
    sentences and the slices are reassembled in order.  With
    ``dedup_sentences`` the first sentence with a given exact text (in that
    same order) is kept and later duplicates are skipped.  ``max_occurrences``
    caps each entity's records to the first n in stream order.
    """
    sentence_lists = sorted((split_sentences(doc) for doc in documents), key=lambda sl: sl[0].doc_id if sl else "")
    sentences: list[Sentence] = [s for sl in sentence_lists for s in sl]

    if dedup_sentences:
        seen_texts: set[str] = set()
        kept = []
        for s in sentences:
            if s.text in seen_texts:
                continue
            seen_texts.add(s.text)
            kept.append(s)
        sentences = kept

    per_sentence = _scan_sentences(sentences, matcher, jobs)

    records: list[OccurrenceRecord] = []
    emitted: dict[int, int] = {}
    counted_sentences: dict[int, set[str]] = {}
    for sentence, hits in zip(sentences, per_sentence):
        for entity_id, start, end in hits:
            if max_occurrences is not None:
                if emitted.get(entity_id, 0) >= max_occurrences:
                    continue
                emitted[entity_id] = emitted.get(entity_id, 0) + 1
            records.append(
                OccurrenceRecord(
                    entity_id=entity_id,
                    sentence_id=sentence.sentence_id,
                    start=start,
                    end=end,
                    sentence=sentence.text,
                )
            )
            counted_sentences.setdefault(entity_id, set()).add(sentence.sentence_id)

    counts = {entity_id: len(ids) for entity_id, ids in counted_sentences.items()}
    for entity_id in matcher.entity_ids():
        counts.setdefault(entity_id, 0)
    zero = sum(1 for c in counts.values() if c == 0)
    if zero:
        log.info("indexing: %d of %d entities have no occurrences", zero, len(counts))
    return IndexResult(records=tuple(records), counts=counts)


def _scan_sentences(
    sentences: list[Sentence], matcher: MultiPatternMatcher, jobs: int
) -> list[list[tuple[int, int, int]]]:
    if jobs <= 1 or len(sentences) < 2 or not _fork_available():
        return [matcher.find_in_text(s.text) for s in sentences]

    global _WORKER_MATCHER
    batches: list[list[tuple[str, str]]] = []
    step = max(1, (len(sentences) + jobs * 4 - 1) // (jobs * 4))
    for i in range(0, len(sentences), step):
        batches.append([(s.sentence_id, s.text) for s in sentences[i : i + step]])

    _WORKER_MATCHER = matcher
    try:
        import multiprocessing as mp

        ctx = mp.get_context("fork")
        with ProcessPoolExecutor(max_workers=jobs, mp_context=ctx) as pool:
            chunk_results = list(pool.map(_match_batch, batches))
    finally:
        _WORKER_MATCHER = None
    return [hits for chunk in chunk_results for hits in chunk]


def _fork_available() -> bool:
    return hasattr(os, "fork")
