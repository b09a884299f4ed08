"""Term-document payload matrix: ingestion, posting-list rows, GCD primitives.

The matrix V is stored row-major as posting lists. Payloads are opaque
positive integers (term frequencies or pre-quantized impact scores); a zero
payload is represented by absence and is never stored. All row arithmetic is
exact integer arithmetic, so "row a is a multiple of row b" is decidable via
GCD normalization with no floating-point tolerance anywhere.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from math import gcd
from pathlib import Path
from typing import IO, Iterable, Iterator, NamedTuple

from .errors import ParseError, ValidationError


class Posting(NamedTuple):
    doc: int
    payload: int


@dataclass(frozen=True)
class PostingList:
    """One row of V: the (doc, payload) pairs of a single term.

    Doc ids are strictly ascending and payloads are >= 1.
    """

    term: int
    postings: tuple[Posting, ...]

    @classmethod
    def from_pairs(cls, term: int, pairs: Iterable[tuple[int, int]]) -> "PostingList":
        postings = tuple(Posting(int(d), int(p)) for d, p in pairs)
        prev = -1
        for d, p in postings:
            if d <= prev:
                raise ValidationError(f"term {term}: doc ids not strictly ascending at {d}")
            if p < 1:
                raise ValidationError(f"term {term}: payload {p} for doc {d} must be >= 1")
            prev = d
        return cls(term, postings)

    def __len__(self) -> int:
        return len(self.postings)

    def __iter__(self) -> Iterator[Posting]:
        return iter(self.postings)

    def support(self) -> tuple[int, ...]:
        return tuple(p.doc for p in self.postings)

    def payloads(self) -> tuple[int, ...]:
        return tuple(p.payload for p in self.postings)


class Lexicon:
    """Bidirectional term-string <-> TermId map; ids assigned in first-seen order."""

    def __init__(self, terms: Iterable[str] = ()):
        self._terms: list[str] = []
        self._ids: dict[str, int] = {}
        for t in terms:
            self.intern(t)

    def intern(self, term: str) -> int:
        tid = self._ids.get(term)
        if tid is None:
            tid = len(self._terms)
            self._terms.append(term)
            self._ids[term] = tid
        return tid

    def id_of(self, term: str) -> int | None:
        return self._ids.get(term)

    def term_of(self, tid: int) -> str:
        return self._terms[tid]

    @property
    def terms(self) -> tuple[str, ...]:
        return tuple(self._terms)

    def __len__(self) -> int:
        return len(self._terms)

    def __iter__(self) -> Iterator[str]:
        return iter(self._terms)

    def __eq__(self, other: object) -> bool:
        return isinstance(other, Lexicon) and self._terms == other._terms

    def __repr__(self) -> str:
        return f"Lexicon({len(self._terms)} terms)"


@dataclass
class TermDocMatrix:
    """Sparse nonnegative-integer matrix; rows indexed by TermId.

    Immutable by convention once constructed: ingestion is single-writer and
    readers may share a matrix freely.
    """

    rows: list[PostingList]
    num_docs: int
    lexicon: Lexicon
    doc_names: list[str] = field(default_factory=list)

    def __post_init__(self) -> None:
        if not self.doc_names:
            self.doc_names = [str(d) for d in range(self.num_docs)]

    @property
    def num_terms(self) -> int:
        return len(self.rows)

    def row(self, term: int) -> PostingList:
        return self.rows[term]

    def validate(self) -> None:
        if len(self.doc_names) != self.num_docs:
            raise ValidationError("doc_names length does not match num_docs")
        if len(self.lexicon) != len(self.rows):
            raise ValidationError("lexicon size does not match row count")
        for t, row in enumerate(self.rows):
            if row.term != t:
                raise ValidationError(f"row {t} carries term id {row.term}")
            for d, p in row:
                if not 0 <= d < self.num_docs:
                    raise ValidationError(f"term {t}: doc {d} out of range")
                if p < 1:
                    raise ValidationError(f"term {t}: payload {p} < 1")

    def same_cells(self, other: "TermDocMatrix") -> bool:
        """Cell-for-cell equality, ignoring lexicon and doc-name strings."""
        return self.num_docs == other.num_docs and [r.postings for r in self.rows] == [
            r.postings for r in other.rows
        ]


@dataclass(frozen=True)
class PrimitiveRow:
    """Canonical witness that a row is `scale` times a GCD-1 base vector."""

    scale: int
    base: tuple[Posting, ...]


@dataclass(frozen=True)
class TokenizerConfig:
    """Case-folding and token charset used by TSV ingestion."""

    lowercase: bool = True
    token_pattern: str = r"[0-9A-Za-z]+"

    def tokenize(self, text: str) -> list[str]:
        if self.lowercase:
            text = text.lower()
        return re.findall(self.token_pattern, text)


def primitive_form(row: PostingList) -> PrimitiveRow:
    """GCD-normalize a row: scale = gcd of payloads, base = row / scale.

    Two non-empty rows are scalar multiples of each other exactly when their
    primitive forms have identical (support, base) sequences.
    """
    if not row.postings:
        raise ValidationError("primitive_form: row is empty")
    g = 0
    for _, p in row.postings:
        g = gcd(g, p)
    base = tuple(Posting(d, p // g) for d, p in row.postings)
    return PrimitiveRow(g, base)


def nnz(matrix: TermDocMatrix) -> int:
    """Total stored postings."""
    return sum(len(r) for r in matrix.rows)


def matrix_from_cells(
    cells: dict[int, dict[int, int]],
    num_terms: int | None = None,
    num_docs: int | None = None,
    lexicon: Lexicon | None = None,
    doc_names: list[str] | None = None,
) -> TermDocMatrix:
    """Build a matrix from {term: {doc: payload}}; terms/docs without cells get
    empty rows / unused columns up to the given counts."""
    max_term = max(cells, default=-1)
    if num_terms is None:
        num_terms = max_term + 1
    elif max_term >= num_terms:
        raise ValidationError(f"term {max_term} outside num_terms={num_terms}")
    max_doc = max((d for by_doc in cells.values() for d in by_doc), default=-1)
    if num_docs is None:
        num_docs = max_doc + 1
    elif max_doc >= num_docs:
        raise ValidationError(f"doc {max_doc} outside num_docs={num_docs}")
    rows = [
        PostingList.from_pairs(t, sorted(cells.get(t, {}).items())) for t in range(num_terms)
    ]
    if lexicon is None:
        lexicon = Lexicon(str(t) for t in range(num_terms))
    return TermDocMatrix(rows, num_docs, lexicon, doc_names or [])


def ingest_tsv(path: str | Path, tokenizer: TokenizerConfig = TokenizerConfig()) -> TermDocMatrix:
    """Read a corpus of "docname<TAB>body" lines into V.

    Payload(t, d) is the frequency of t in d; TermIds are assigned in
    first-seen order and DocIds in line order. An empty file yields an empty
    matrix; a line without a tab raises ParseError with its line number.
    """
    lexicon = Lexicon()
    doc_names: list[str] = []
    cells: dict[int, dict[int, int]] = {}
    with open(path, encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, start=1):
            line = line.rstrip("\n")
            if "\t" not in line:
                raise ParseError("expected 'docname<TAB>body'", line_no)
            name, body = line.split("\t", 1)
            doc = len(doc_names)
            doc_names.append(name)
            for token in tokenizer.tokenize(body):
                tid = lexicon.intern(token)
                by_doc = cells.setdefault(tid, {})
                by_doc[doc] = by_doc.get(doc, 0) + 1
    return matrix_from_cells(
        cells, num_terms=len(lexicon), num_docs=len(doc_names), lexicon=lexicon, doc_names=doc_names
    )


def ingest_triples(path: str | Path) -> TermDocMatrix:
    """Read "term doc payload" lines (space-separated decimal integers) into V.

    The matrix has exactly the listed non-zeros; a zero or negative payload
    and a duplicated (term, doc) cell are validation errors.
    """
    cells: dict[int, dict[int, int]] = {}
    with open(path, encoding="ascii") as fh:
        for line_no, line in enumerate(fh, start=1):
            parts = line.split()
            if not parts:
                continue
            if len(parts) != 3:
                raise ParseError("expected 'term doc payload'", line_no)
            try:
                t, d, p = (int(x) for x in parts)
            except ValueError:
                raise ParseError("non-integer field", line_no) from None
            if t < 0 or d < 0:
                raise ValidationError(f"line {line_no}: negative id in ({t}, {d})")
            if p < 1:
                raise ValidationError(f"line {line_no}: payload {p} must be >= 1")
            by_doc = cells.setdefault(t, {})
            if d in by_doc:
                raise ValidationError(f"line {line_no}: duplicate cell ({t}, {d})")
            by_doc[d] = p
    return matrix_from_cells(cells)


def export_triples(matrix: TermDocMatrix, out: str | Path | IO[str]) -> None:
    """Write V as canonical "term doc payload" lines: rows in TermId order,
    postings in DocId order (bit-exact output for identical matrices)."""

    def _write(fh: IO[str]) -> None:
        for row in matrix.rows:
            for d, p in row:
                fh.write(f"{row.term} {d} {p}\n")

    if isinstance(out, (str, Path)):
        with open(out, "w", encoding="ascii") as fh:
            _write(fh)
    else:
        _write(out)
