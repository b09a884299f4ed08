"""Lossless integer codecs and the d-gap posting-list transform.

Bit conventions (fixed here so independent implementations can match
bit-exactly; see data/codec_vectors.tsv for frozen reference encodings):

* Every code word is emitted MSB-first, and bits are packed into bytes in
  big-endian bit order: the first bit written lands in bit 7 of byte 0.
* vbyte: 7-bit groups, least-significant group first; the high bit of each
  byte is 1 iff more bytes follow. Standalone vbyte values are byte strings;
  inside a bitstream each vbyte byte is written as an 8-bit word (the stream
  itself is not re-aligned to byte boundaries).
* gamma(x), x >= 1: floor(log2 x) zeros, then the binary of x MSB-first.
  Code length is exactly 2*floor(log2 x) + 1 bits.
* delta(x), x >= 1: gamma(floor(log2 x) + 1), then the floor(log2 x)
  low-order bits of x.
* Posting list: gamma(count + 1), then the doc gaps (g0 = doc0 + 1,
  gi = doc_i - doc_{i-1}, all >= 1) under the doc-gap codec, then the
  payloads in posting order under the payload codec. Lists are prefix-free,
  so concatenated lists decode unambiguously.

Values are limited to 64 bits. All functions are pure; writers and readers
hold only local state.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Sequence

from .errors import CorruptionError, TruncationError, ValidationError
from .matrix import Posting, PostingList

MAX_VALUE = (1 << 64) - 1
MAX_VBYTE_LEN = 10  # ceil(64 / 7)

CODEC_NAMES = ("vbyte", "gamma", "delta")
CODEC_IDS = {name: i for i, name in enumerate(CODEC_NAMES)}


@dataclass(frozen=True)
class CodecConfig:
    """Codec selection for the three encoded streams of an index."""

    doc_gap: str = "gamma"
    payload: str = "gamma"
    coeff: str = "gamma"

    def __post_init__(self) -> None:
        for name in (self.doc_gap, self.payload, self.coeff):
            if name not in CODEC_NAMES:
                raise ValidationError(f"unknown codec {name!r}; expected one of {CODEC_NAMES}")


class BitWriter:
    """Append-only bit sequence; first bit written is bit 7 of byte 0."""

    __slots__ = ("_out", "_acc", "_nacc")

    def __init__(self) -> None:
        self._out = bytearray()
        self._acc = 0
        self._nacc = 0

    @property
    def bit_length(self) -> int:
        return len(self._out) * 8 + self._nacc

    def write_bits(self, value: int, nbits: int) -> None:
        if value >> nbits:
            raise ValidationError(f"value {value} does not fit in {nbits} bits")
        acc = (self._acc << nbits) | value
        n = self._nacc + nbits
        out = self._out
        while n >= 8:
            n -= 8
            out.append((acc >> n) & 0xFF)
        self._acc = acc & ((1 << n) - 1)
        self._nacc = n

    def getvalue(self) -> bytes:
        """Contents so far, zero-padded to a whole byte."""
        if self._nacc:
            return bytes(self._out) + bytes([(self._acc << (8 - self._nacc)) & 0xFF])
        return bytes(self._out)


class BitReader:
    """Cursor-based reader over a byte string; never reads past bit_length."""

    __slots__ = ("_data", "_bitlen", "pos")

    def __init__(self, data: bytes, bit_length: int | None = None):
        self._data = data
        self._bitlen = len(data) * 8 if bit_length is None else bit_length
        if self._bitlen > len(data) * 8:
            raise ValidationError("bit_length exceeds buffer size")
        self.pos = 0

    @property
    def bit_length(self) -> int:
        return self._bitlen

    def read_bit(self) -> int:
        pos = self.pos
        if pos >= self._bitlen:
            raise TruncationError("bit stream ended mid-value")
        self.pos = pos + 1
        return (self._data[pos >> 3] >> (7 - (pos & 7))) & 1

    def read_bits(self, nbits: int) -> int:
        pos = self.pos
        end = pos + nbits
        if end > self._bitlen:
            raise TruncationError("bit stream ended mid-value")
        if nbits == 0:
            return 0
        first = pos >> 3
        last = (end - 1) >> 3
        chunk = int.from_bytes(self._data[first : last + 1], "big")
        shift = (last + 1) * 8 - end
        self.pos = end
        return (chunk >> shift) & ((1 << nbits) - 1)

    def read_unary(self) -> int:
        """Count zero bits up to (and consume) the terminating one bit."""
        data = self._data
        bitlen = self._bitlen
        pos = self.pos
        zeros = 0
        while True:
            if pos >= bitlen:
                raise TruncationError("bit stream ended mid-value")
            rem = data[pos >> 3] & (0xFF >> (pos & 7))
            if rem == 0:
                step = 8 - (pos & 7)
                zeros += step
                pos += step
                continue
            lead = (8 - (pos & 7)) - rem.bit_length()
            if pos + lead >= bitlen:
                raise TruncationError("bit stream ended mid-value")
            self.pos = pos + lead + 1
            return zeros + lead


# ---------------------------------------------------------------------------
# Scalar codecs, string/bytes level


def vbyte_encode(x: int) -> bytes:
    if not 0 <= x <= MAX_VALUE:
        raise ValidationError(f"vbyte_encode: {x} outside [0, 2^64)")
    out = bytearray()
    while True:
        group = x & 0x7F
        x >>= 7
        out.append(group | 0x80 if x else group)
        if not x:
            return bytes(out)


def vbyte_decode(data: bytes, offset: int = 0) -> tuple[int, int]:
    """Decode one vbyte value starting at `offset`; returns (value, bytes consumed)."""
    x = 0
    shift = 0
    consumed = 0
    while True:
        if offset + consumed >= len(data):
            raise TruncationError("vbyte value truncated")
        if consumed >= MAX_VBYTE_LEN:
            raise OverflowError("vbyte value longer than 10 bytes")
        byte = data[offset + consumed]
        x |= (byte & 0x7F) << shift
        consumed += 1
        if not byte & 0x80:
            if x > MAX_VALUE:
                raise OverflowError("vbyte value exceeds 64 bits")
            return x, consumed
        shift += 7


def gamma_encode(x: int) -> str:
    if not 1 <= x <= MAX_VALUE:
        raise ValidationError(f"gamma_encode: {x} outside [1, 2^64)")
    n = x.bit_length()
    return "0" * (n - 1) + format(x, "b")


def gamma_decode(bits: str, start: int = 0) -> tuple[int, int]:
    """Decode one gamma code from a '0'/'1' string; returns (value, bits consumed)."""
    n = 0
    i = start
    while i < len(bits) and bits[i] == "0":
        n += 1
        i += 1
    if i >= len(bits):
        raise TruncationError("gamma code truncated")
    if n > 63:
        raise CorruptionError("gamma code exceeds 64-bit range")
    body = bits[i : i + n + 1]
    if len(body) < n + 1:
        raise TruncationError("gamma code truncated")
    return int(body, 2), 2 * n + 1


def delta_encode(x: int) -> str:
    if not 1 <= x <= MAX_VALUE:
        raise ValidationError(f"delta_encode: {x} outside [1, 2^64)")
    n = x.bit_length() - 1
    tail = format(x, "b")[1:]  # low n bits, MSB-first
    return gamma_encode(n + 1) + tail


def delta_decode(bits: str, start: int = 0) -> tuple[int, int]:
    """Decode one delta code from a '0'/'1' string; returns (value, bits consumed)."""
    n_plus_1, used = gamma_decode(bits, start)
    n = n_plus_1 - 1
    if n > 63:
        raise CorruptionError("delta code exceeds 64-bit range")
    tail = bits[start + used : start + used + n]
    if len(tail) < n:
        raise TruncationError("delta code truncated")
    x = (1 << n) | int(tail, 2) if n else 1
    return x, used + n


# ---------------------------------------------------------------------------
# Scalar codecs, bitstream level


def _put_vbyte(w: BitWriter, x: int) -> None:
    if not 0 <= x <= MAX_VALUE:
        raise ValidationError(f"vbyte: {x} outside [0, 2^64)")
    while True:
        group = x & 0x7F
        x >>= 7
        w.write_bits(group | 0x80 if x else group, 8)
        if not x:
            return


def _get_vbyte(r: BitReader) -> int:
    x = 0
    shift = 0
    for consumed in range(MAX_VBYTE_LEN + 1):
        if consumed >= MAX_VBYTE_LEN:
            raise OverflowError("vbyte value longer than 10 bytes")
        byte = r.read_bits(8)
        x |= (byte & 0x7F) << shift
        if not byte & 0x80:
            if x > MAX_VALUE:
                raise OverflowError("vbyte value exceeds 64 bits")
            return x
        shift += 7
    raise AssertionError("unreachable")


def _put_gamma(w: BitWriter, x: int) -> None:
    if not 1 <= x <= MAX_VALUE:
        raise ValidationError(f"gamma: {x} outside [1, 2^64)")
    # Leading zeros of the 2n-1 wide field are exactly the unary prefix.
    w.write_bits(x, 2 * x.bit_length() - 1)


def _get_gamma(r: BitReader) -> int:
    n = r.read_unary()
    if n > 63:
        raise CorruptionError("gamma code exceeds 64-bit range")
    if n == 0:
        return 1
    return (1 << n) | r.read_bits(n)


def _put_delta(w: BitWriter, x: int) -> None:
    if not 1 <= x <= MAX_VALUE:
        raise ValidationError(f"delta: {x} outside [1, 2^64)")
    n = x.bit_length() - 1
    _put_gamma(w, n + 1)
    if n:
        w.write_bits(x & ((1 << n) - 1), n)


def _get_delta(r: BitReader) -> int:
    n = _get_gamma(r) - 1
    if n > 63:
        raise CorruptionError("delta code exceeds 64-bit range")
    if n == 0:
        return 1
    return (1 << n) | r.read_bits(n)


_WRITERS: dict[str, Callable[[BitWriter, int], None]] = {
    "vbyte": _put_vbyte,
    "gamma": _put_gamma,
    "delta": _put_delta,
}
_READERS: dict[str, Callable[[BitReader], int]] = {
    "vbyte": _get_vbyte,
    "gamma": _get_gamma,
    "delta": _get_delta,
}


def put_value(w: BitWriter, x: int, codec: str) -> None:
    _WRITERS[codec](w, x)


def get_value(r: BitReader, codec: str) -> int:
    return _READERS[codec](r)


# ---------------------------------------------------------------------------
# Posting lists


def write_pairs(w: BitWriter, pairs: Sequence[tuple[int, int]], gap_codec: str, val_codec: str) -> None:
    """Write a (key, value) list: gamma(count+1), key gaps, then values.

    Keys must be strictly ascending and values >= 1. Used both for posting
    lists (doc, payload) and for W rows (meta-term id, coefficient).
    """
    _put_gamma(w, len(pairs) + 1)
    put_gap = _WRITERS[gap_codec]
    prev = -1
    for key, _ in pairs:
        if key <= prev:
            raise ValidationError(f"keys not strictly ascending at {key}")
        put_gap(w, key - prev)
        prev = key
    put_val = _WRITERS[val_codec]
    for _, value in pairs:
        if value < 1:
            raise ValidationError(f"value {value} must be >= 1")
        put_val(w, value)


def read_pairs(r: BitReader, gap_codec: str, val_codec: str) -> list[tuple[int, int]]:
    count = _get_gamma(r) - 1
    get_gap = _READERS[gap_codec]
    keys = []
    key = -1
    for _ in range(count):
        gap = get_gap(r)
        if gap < 1:
            raise CorruptionError("decoded a zero gap")
        key += gap
        keys.append(key)
    get_val = _READERS[val_codec]
    pairs = []
    for key in keys:
        value = get_val(r)
        if value < 1:
            raise CorruptionError("decoded a zero payload")
        pairs.append((key, value))
    return pairs


def encode_posting_list(pl: PostingList | Sequence[Posting], cfg: CodecConfig) -> bytes:
    """Encode one posting list to bytes (zero-padded to a whole byte)."""
    postings = pl.postings if isinstance(pl, PostingList) else pl
    w = BitWriter()
    write_pairs(w, postings, cfg.doc_gap, cfg.payload)
    return w.getvalue()


def decode_posting_list(data: bytes, cfg: CodecConfig, term: int = 0) -> PostingList:
    """Exact inverse of encode_posting_list (trailing pad bits are ignored)."""
    r = BitReader(data)
    pairs = read_pairs(r, cfg.doc_gap, cfg.payload)
    return PostingList.from_pairs(term, pairs)
