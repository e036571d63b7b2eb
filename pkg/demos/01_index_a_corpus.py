"""
Finding entity occurrences in raw text
======================================

Feed a few documents and a handful of surface forms to the occurrence
indexer and look at exactly what comes back: character spans into the
original sentences, matched case-insensitively and across whitespace
runs, but never inside a longer word.
"""

from coexpand import MultiPatternMatcher, index_corpus
from coexpand.corpus_io import CandidateEntity, Document, canonicalize

# A corpus is just (doc_id, text) pairs. Sentences split at newlines and
# after . ? ! when whitespace follows.
corpus = [
    Document("post-17", "I switched from Java to Kotlin last spring. No regrets!"),
    Document("post-42", "JavaScript is not Java.\nVisual  Studio handles both fine."),
    Document("post-99", "We still compile c++ with GCC. Visual Studio Code disagrees."),
]

# Candidates and seeds both become patterns; ids are ours to assign.
surfaces = ["Java", "Kotlin", "JavaScript", "Visual Studio", "c++"]
entities = [
    CandidateEntity(id=i, surface=s, canonical=canonicalize(s))
    for i, s in enumerate(surfaces)
]

matcher = MultiPatternMatcher(entities)
result = index_corpus(corpus, matcher)

print(f"{len(result.records)} occurrences found\n")
for record in result.records:
    name = entities[record.entity_id].surface
    span = record.sentence[record.start:record.end]
    print(f"  {record.sentence_id:<10} [{record.start:>2}:{record.end:>2}] "
          f"{name:<14} matched {span!r}")

# Things worth noticing in the output:
#  - "Java" does not fire inside "JavaScript": the span's neighbors must
#    not be alphanumeric.
#  - "Visual  Studio" (two spaces) still matches the key "visual studio",
#    and the span covers the original double space.
#  - "Visual Studio" also fires inside "Visual Studio Code"; nested
#    patterns report independently.
#  - "c++" survives canonicalization (no punctuation stripping).

print("\nper-entity sentence counts:")
for entity_id, count in sorted(result.counts.items()):
    print(f"  {entities[entity_id].surface:<14} {count}")
