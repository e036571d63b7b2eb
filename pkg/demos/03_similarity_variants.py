"""
Content, context, and concatenated similarity
=============================================

Every entity carries two corpus-level vectors: one averaged from the
model outputs at its own tokens (content), one from a mask that replaces
it (context).  Ranking can use either, or the concatenation of both.
This script builds a store by hand where the two disagree, to show why
the choice matters.
"""

import numpy as np

from coexpand import EmbeddingStore, cosine
from coexpand.store import CorpusEmbedding


def entry(entity_id, content, context):
    return CorpusEmbedding(
        entity_id=entity_id,
        content=np.asarray(content, dtype=np.float32),
        context=np.asarray(context, dtype=np.float32),
        occurrence_count=1,
    )


# Entity 0 is the probe. Entity 1 *looks* like it (same content direction)
# but appears in completely different sentences (orthogonal context).
# Entity 2 is the opposite: different name, same habitat.
store = EmbeddingStore([
    entry(0, [1.0, 0.0, 0.0, 0.0], [0.0, 0.0, 1.0, 0.0]),
    entry(1, [0.9, 0.1, 0.0, 0.0], [0.0, 0.0, 0.0, 1.0]),
    entry(2, [0.0, 0.0, 0.9, 0.3], [0.1, 0.0, 0.95, 0.0]),
])

print(f"{'pair':<8} {'content':>9} {'context':>9} {'both':>9}")
for other in (1, 2):
    row = [
        cosine(store.vector_of(0, variant), store.vector_of(other, variant))
        for variant in ("content", "context", "both")
    ]
    print(f"0 vs {other:<3} {row[0]:>9.3f} {row[1]:>9.3f} {row[2]:>9.3f}")

# The concatenation is a compromise: it rewards agreement on either half,
# weighted by vector magnitude. Normalizing each half first gives the two
# halves equal votes regardless of their raw norms.
balanced = EmbeddingStore(store.entries(), normalize_parts=True)
print("\nwith per-half normalization:")
for other in (1, 2):
    value = cosine(balanced.vector_of(0, "both"), balanced.vector_of(other, "both"))
    print(f"0 vs {other}: both = {value:.3f}")

# Batch scoring goes through one matrix path; the scalar calls above are
# views over the same computation, so the numbers agree exactly.
matrix = store.similarity_matrix([0], [1, 2], "both")
print(f"\nsimilarity_matrix row for entity 0: {np.round(matrix[0], 3)}")
