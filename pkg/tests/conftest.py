from __future__ import annotations


def brute_force_top_k(matrix, terms, k):
    """Independent accumulator over raw V rows; the oracle for lossless
    query equivalence. Returns plain (doc, score) tuples."""
    scores: dict[int, int] = {}
    for term in terms:
        tid = matrix.lexicon.id_of(term)
        if tid is None:
            continue
        for d, p in matrix.rows[tid]:
            scores[d] = scores.get(d, 0) + p
    ranked = sorted(scores.items(), key=lambda kv: (-kv[1], kv[0]))
    return ranked[:k]
