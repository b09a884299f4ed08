"""Top-k retrieval over the factored index, plus lossy static pruning.

Scoring is additive integer impact: a document's score for a query is the
sum of the matched terms' payloads. Because term expansion from W.H is exact,
ranked results over the factored index are identical to the same computation
over the raw matrix, with ties broken by ascending doc id so result lists are
canonical. Queries are read-only over an immutable index; accumulator state
is per query.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple, Sequence

from .errors import InvariantError, ValidationError
from .factorize import Factorization
from .matrix import Lexicon, PostingList, TermDocMatrix


@dataclass(frozen=True)
class Query:
    terms: tuple[str, ...]
    k: int

    def __post_init__(self) -> None:
        if self.k < 1:
            raise ValidationError("k must be >= 1")


class ScoredDoc(NamedTuple):
    doc: int
    score: int


def expand_term(f: Factorization, t: int) -> PostingList:
    """Rebuild term t's original posting list from its meta-term memberships."""
    if not 0 <= t < f.num_terms:
        raise KeyError(t)
    pairs: list[tuple[int, int]] = []
    for m, k in f.memberships[t]:
        mt = f.metaterms[m]
        pairs.extend((d, k * u) for d, u in zip(mt.cols, mt.base))
    pairs.sort()
    for (d1, _), (d2, _) in zip(pairs, pairs[1:]):
        if d1 == d2:
            raise InvariantError(f"term {t}: memberships overlap on doc {d1}")
    return PostingList.from_pairs(t, pairs)


def top_k(f: Factorization, q: Query, lexicon: Lexicon) -> list[ScoredDoc]:
    """Documents ranked by summed payload desc, doc id asc; at most k results.

    Unknown query terms are dropped; a query resolving to no terms returns an
    empty list.
    """
    scores: dict[int, int] = {}
    for term in q.terms:
        tid = lexicon.id_of(term)
        if tid is None:
            continue
        for d, p in expand_term(f, tid):
            scores[d] = scores.get(d, 0) + p
    ranked = sorted(scores.items(), key=lambda item: (-item[1], item[0]))
    return [ScoredDoc(d, s) for d, s in ranked[: q.k]]


def resolve_terms(q: Query, lexicon: Lexicon) -> tuple[list[str], list[str]]:
    """(resolved, dropped) term strings, for verbose reporting."""
    resolved, dropped = [], []
    for term in q.terms:
        (resolved if lexicon.id_of(term) is not None else dropped).append(term)
    return resolved, dropped


def prune(matrix: TermDocMatrix, theta: int) -> TermDocMatrix:
    """Keep exactly the postings with payload >= theta (static pruning).

    Rows that become empty are kept as empty rows so the lexicon stays stable.
    theta <= 1 is the identity on any valid matrix.
    """
    if theta < 0:
        raise ValidationError("theta must be >= 0")
    rows = [
        PostingList(row.term, tuple(p for p in row.postings if p.payload >= theta))
        for row in matrix.rows
    ]
    return TermDocMatrix(rows, matrix.num_docs, matrix.lexicon, list(matrix.doc_names))


def overlap_at_k(a: Sequence[ScoredDoc], b: Sequence[ScoredDoc], k: int) -> float:
    """|top-k(a) docs intersect top-k(b) docs| / k."""
    if k < 1:
        raise ValidationError("k must be >= 1")
    docs_a = {sd[0] for sd in a[:k]}
    docs_b = {sd[0] for sd in b[:k]}
    return len(docs_a & docs_b) / k
