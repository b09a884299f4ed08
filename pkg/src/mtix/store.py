"""Binary index persistence and size statistics.

File layout (all multi-byte header integers little-endian fixed-width,
strings length-prefixed with a u32):

    magic "MTIX" | u8 version | u8 x3 codec ids (doc-gap, payload, coeff)
    u64 num_terms | u64 num_docs | u64 num_metaterms
    u64 section offsets x4 (doc-table, lexicon, H-section, W-section)
    doc-table: u64 count; count x (u32 len + UTF-8 doc name)
    lexicon:   u64 count; count x (u32 len + UTF-8 term + u64 W-row bit offset)
    H-section: u64 count; count x vbyte(bit-offset delta); encoded meta-term
               posting lists, bit-packed, zero-padded to a byte
    W-section: u64 count; per-term (meta-term id gap, coefficient) lists,
               bit-packed, zero-padded to a byte

Saving identical inputs yields byte-identical files. Size statistics count
the encoded content of the H/W sections (everything after each section's
count word), so an empty index reports zero bytes.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path
from typing import Sequence

from .codec import (
    CODEC_IDS,
    CODEC_NAMES,
    BitReader,
    BitWriter,
    CodecConfig,
    read_pairs,
    vbyte_decode,
    vbyte_encode,
    write_pairs,
)
from .errors import CorruptionError, FormatError, ValidationError
from .factorize import Factorization, MetaTerm
from .matrix import Lexicon, TermDocMatrix, nnz

MAGIC = b"MTIX"
VERSION = 1
_HEADER = struct.Struct("<4s4B3Q4Q")  # magic, version, 3 codec ids, counts, offsets


def _encode_lists(
    lists: Sequence[Sequence[tuple[int, int]]], gap_codec: str, val_codec: str
) -> tuple[bytes, list[int]]:
    """Bit-pack the given (key, value) lists back to back; returns the padded
    blob and each list's starting bit offset."""
    w = BitWriter()
    offsets = []
    for pairs in lists:
        offsets.append(w.bit_length)
        write_pairs(w, pairs, gap_codec, val_codec)
    return w.getvalue(), offsets


def _encode_offsets(offsets: Sequence[int]) -> bytes:
    out = bytearray()
    prev = 0
    for off in offsets:
        out += vbyte_encode(off - prev)
        prev = off
    return bytes(out)


def _decode_offsets(data: bytes, pos: int, count: int) -> tuple[list[int], int]:
    offsets = []
    prev = 0
    for _ in range(count):
        delta, used = vbyte_decode(data, pos)
        pos += used
        prev += delta
        offsets.append(prev)
    return offsets, pos


def _encode_str_table(strings: Sequence[str]) -> bytes:
    out = bytearray(struct.pack("<Q", len(strings)))
    for s in strings:
        raw = s.encode("utf-8")
        out += struct.pack("<I", len(raw))
        out += raw
    return bytes(out)


def _h_lists(metaterms: Sequence[MetaTerm]) -> list[list[tuple[int, int]]]:
    return [list(zip(mt.cols, mt.base)) for mt in metaterms]


def encoded_section_parts(
    f: Factorization, cfg: CodecConfig
) -> tuple[bytes, bytes, bytes, list[int]]:
    """(H offsets blob, H blob, W blob, W bit offsets) exactly as saved."""
    h_blob, h_offsets = _encode_lists(_h_lists(f.metaterms), cfg.doc_gap, cfg.payload)
    w_blob, w_offsets = _encode_lists(f.memberships, cfg.doc_gap, cfg.coeff)
    return _encode_offsets(h_offsets), h_blob, w_blob, w_offsets


def save_index(
    f: Factorization,
    lexicon: Lexicon,
    cfg: CodecConfig,
    path: str | Path,
    doc_names: Sequence[str] | None = None,
) -> int:
    """Write the factored index to `path`; returns total bytes written."""
    if len(lexicon) != f.num_terms:
        raise ValidationError(f"lexicon has {len(lexicon)} terms, factorization {f.num_terms}")
    if doc_names is None:
        doc_names = [str(d) for d in range(f.num_docs)]
    if len(doc_names) != f.num_docs:
        raise ValidationError(f"{len(doc_names)} doc names for {f.num_docs} docs")

    h_off_blob, h_blob, w_blob, w_offsets = encoded_section_parts(f, cfg)

    doc_table = _encode_str_table(doc_names)
    lex = bytearray(struct.pack("<Q", f.num_terms))
    for t in range(f.num_terms):
        raw = lexicon.term_of(t).encode("utf-8")
        lex += struct.pack("<I", len(raw))
        lex += raw
        lex += struct.pack("<Q", w_offsets[t])
    h_section = struct.pack("<Q", len(f.metaterms)) + h_off_blob + h_blob
    w_section = struct.pack("<Q", f.num_terms) + w_blob

    off_doc = _HEADER.size
    off_lex = off_doc + len(doc_table)
    off_h = off_lex + len(lex)
    off_w = off_h + len(h_section)
    header = _HEADER.pack(
        MAGIC,
        VERSION,
        CODEC_IDS[cfg.doc_gap],
        CODEC_IDS[cfg.payload],
        CODEC_IDS[cfg.coeff],
        f.num_terms,
        f.num_docs,
        len(f.metaterms),
        off_doc,
        off_lex,
        off_h,
        off_w,
    )
    blob = header + doc_table + bytes(lex) + h_section + w_section
    with open(path, "wb") as fh:
        fh.write(blob)
    return len(blob)


@dataclass
class LoadedIndex:
    factorization: Factorization
    lexicon: Lexicon
    doc_names: list[str]
    cfg: CodecConfig


class _Cursor:
    """Bounds-checked byte reader over the index file image."""

    def __init__(self, data: bytes, pos: int):
        self.data = data
        self.pos = pos

    def take(self, n: int) -> bytes:
        if self.pos + n > len(self.data):
            raise CorruptionError("index file truncated")
        out = self.data[self.pos : self.pos + n]
        self.pos += n
        return out

    def u64(self) -> int:
        return struct.unpack("<Q", self.take(8))[0]

    def string(self) -> str:
        (length,) = struct.unpack("<I", self.take(4))
        return self.take(length).decode("utf-8")


def load_index(path: str | Path) -> LoadedIndex:
    """Exact inverse of save_index."""
    data = Path(path).read_bytes()
    if len(data) < _HEADER.size:
        raise FormatError("file too small to hold an index header")
    magic, version, id_gap, id_pay, id_coeff, num_terms, num_docs, num_meta, off_doc, off_lex, off_h, off_w = _HEADER.unpack_from(data)
    if magic != MAGIC:
        raise FormatError(f"bad magic {magic!r}")
    if version != VERSION:
        raise FormatError(f"unsupported version {version}")
    for cid in (id_gap, id_pay, id_coeff):
        if cid >= len(CODEC_NAMES):
            raise FormatError(f"unknown codec id {cid}")
    cfg = CodecConfig(CODEC_NAMES[id_gap], CODEC_NAMES[id_pay], CODEC_NAMES[id_coeff])
    if not _HEADER.size == off_doc <= off_lex <= off_h <= off_w <= len(data):
        raise CorruptionError("section offsets out of bounds")

    cur = _Cursor(data, off_doc)
    if cur.u64() != num_docs:
        raise CorruptionError("doc-table count does not match header")
    doc_names = [cur.string() for _ in range(num_docs)]

    cur = _Cursor(data, off_lex)
    if cur.u64() != num_terms:
        raise CorruptionError("lexicon count does not match header")
    terms = []
    w_offsets = []
    for _ in range(num_terms):
        terms.append(cur.string())
        w_offsets.append(cur.u64())
    lexicon = Lexicon(terms)
    if len(lexicon) != num_terms:
        raise CorruptionError("lexicon contains duplicate terms")

    cur = _Cursor(data, off_h)
    if cur.u64() != num_meta:
        raise CorruptionError("H-section count does not match header")
    h_offsets, blob_start = _decode_offsets(data, cur.pos, num_meta)
    h_reader = BitReader(data[blob_start:off_w])
    metaterms = []
    for mid in range(num_meta):
        if h_reader.pos != h_offsets[mid]:
            raise CorruptionError(f"meta-term {mid} not at its recorded offset")
        pairs = read_pairs(h_reader, cfg.doc_gap, cfg.payload)
        cols = tuple(d for d, _ in pairs)
        if any(d >= num_docs for d in cols):
            raise CorruptionError(f"meta-term {mid} references doc beyond num_docs")
        metaterms.append(MetaTerm(mid, cols, tuple(u for _, u in pairs)))

    cur = _Cursor(data, off_w)
    if cur.u64() != num_terms:
        raise CorruptionError("W-section count does not match header")
    w_reader = BitReader(data[cur.pos :])
    memberships = []
    for t in range(num_terms):
        if w_reader.pos != w_offsets[t]:
            raise CorruptionError(f"W row {t} not at its recorded offset")
        row = tuple(read_pairs(w_reader, cfg.doc_gap, cfg.coeff))
        if any(m >= num_meta for m, _ in row):
            raise CorruptionError(f"W row {t} references meta-term beyond count")
        memberships.append(row)

    f = Factorization(
        metaterms=tuple(metaterms),
        memberships=tuple(memberships),
        num_terms=num_terms,
        num_docs=num_docs,
    )
    return LoadedIndex(f, lexicon, doc_names, cfg)


@dataclass(frozen=True)
class IndexStats:
    """Raw vs factored size accounting under one codec configuration."""

    nnz_v: int
    nnz_w: int
    nnz_h: int
    bytes_direct: int
    bytes_factored: int
    ratio: Fraction | None

    def rows(self) -> list[tuple[str, str]]:
        out = [
            ("nnz_V", str(self.nnz_v)),
            ("nnz_W", str(self.nnz_w)),
            ("nnz_H", str(self.nnz_h)),
            ("bytes_direct", str(self.bytes_direct)),
            ("bytes_factored", str(self.bytes_factored)),
            ("ratio", f"{float(self.ratio):.4f}" if self.ratio is not None else "-"),
        ]
        return out


def stats(matrix: TermDocMatrix, f: Factorization, cfg: CodecConfig) -> IndexStats:
    """Measure V encoded directly vs the factored W + H under `cfg`.

    bytes_factored counts exactly the encoded content the index file carries
    for W and H (meta-term lists, their offset table, and the W rows);
    bytes_direct is the same encoding applied to V's rows. The ratio is
    undefined (None) when there is nothing to encode directly.
    """
    direct_blob, _ = _encode_lists(
        [row.postings for row in matrix.rows], cfg.doc_gap, cfg.payload
    )
    h_off_blob, h_blob, w_blob, _ = encoded_section_parts(f, cfg)
    bytes_direct = len(direct_blob)
    bytes_factored = len(h_off_blob) + len(h_blob) + len(w_blob)
    return IndexStats(
        nnz_v=nnz(matrix),
        nnz_w=f.nnz_w,
        nnz_h=f.nnz_h,
        bytes_direct=bytes_direct,
        bytes_factored=bytes_factored,
        ratio=Fraction(bytes_factored, bytes_direct) if bytes_direct else None,
    )
