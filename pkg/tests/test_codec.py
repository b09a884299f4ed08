import importlib.resources
import random

import pytest
from hypothesis import given, strategies as st

from mtix import (
    CodecConfig,
    CorruptionError,
    MtixError,
    PostingList,
    TruncationError,
    ValidationError,
    decode_posting_list,
    delta_decode,
    delta_encode,
    encode_posting_list,
    gamma_decode,
    gamma_encode,
    vbyte_decode,
    vbyte_encode,
)
from mtix.codec import BitReader, BitWriter, get_value, put_value, read_pairs, write_pairs


def load_vectors():
    text = importlib.resources.files("mtix").joinpath("data/codec_vectors.tsv").read_text()
    out = []
    for line in text.splitlines():
        if not line or line.startswith("#"):
            continue
        value, codec, enc = line.split("\t")
        out.append((int(value), codec, enc))
    return out


VECTORS = load_vectors()


def test_vbyte_examples():
    assert vbyte_encode(0) == b"\x00"
    assert vbyte_encode(127) == b"\x7f"
    assert vbyte_encode(128) == b"\x80\x01"
    assert vbyte_encode(300) == b"\xac\x02"  # 300 = 44 + 2*128
    assert vbyte_decode(b"\x00") == (0, 1)
    assert vbyte_decode(b"\xac\x02") == (300, 2)


def test_gamma_examples():
    assert gamma_encode(1) == "1"
    assert gamma_encode(5) == "00101"
    assert gamma_encode(9) == "0001001"
    assert gamma_decode("00101") == (5, 5)


def test_delta_examples():
    assert delta_encode(1) == "1"
    assert delta_encode(5) == "01101"
    assert delta_encode(9) == "00100001"
    assert delta_decode("00100001") == (9, 8)


def test_zero_rejected_by_bit_codecs():
    with pytest.raises(ValidationError):
        gamma_encode(0)
    with pytest.raises(ValidationError):
        delta_encode(0)


@pytest.mark.parametrize("value,codec,encoded", VECTORS)
def test_conformance_vectors(value, codec, encoded):
    if codec == "vbyte":
        assert vbyte_encode(value).hex() == encoded
        assert vbyte_decode(bytes.fromhex(encoded)) == (value, len(encoded) // 2)
    elif codec == "gamma":
        assert gamma_encode(value) == encoded
        assert gamma_decode(encoded) == (value, len(encoded))
    else:
        assert delta_encode(value) == encoded
        assert delta_decode(encoded) == (value, len(encoded))


@pytest.mark.parametrize("value,codec,encoded", VECTORS)
def test_stream_codecs_match_string_codecs(value, codec, encoded):
    # the bitstream writers must agree bit-for-bit with the string-level codes
    w = BitWriter()
    put_value(w, value, codec)
    if codec == "vbyte":
        assert w.getvalue().hex() == encoded
        assert w.bit_length == 4 * len(encoded)
    else:
        bits = "".join(format(b, "08b") for b in w.getvalue())[: w.bit_length]
        assert bits == encoded
    r = BitReader(w.getvalue(), w.bit_length)
    assert get_value(r, codec) == value
    assert r.pos == w.bit_length


def test_small_exhaustive_round_trips():
    for x in range(2048):
        assert vbyte_decode(vbyte_encode(x))[0] == x
    for x in range(1, 2048):
        assert gamma_decode(gamma_encode(x))[0] == x
        assert delta_decode(delta_encode(x))[0] == x


@given(st.integers(0, (1 << 64) - 1))
def test_vbyte_round_trip_random(x):
    data = vbyte_encode(x)
    assert vbyte_decode(data) == (x, len(data))


@given(st.integers(1, (1 << 64) - 1))
def test_gamma_delta_round_trip_random(x):
    assert gamma_decode(gamma_encode(x)) == (x, len(gamma_encode(x)))
    assert delta_decode(delta_encode(x)) == (x, len(delta_encode(x)))


@given(st.integers(1, (1 << 64) - 1))
def test_code_length_laws(x):
    n = x.bit_length() - 1  # floor(log2 x)
    assert len(gamma_encode(x)) == 2 * n + 1
    assert len(delta_encode(x)) == n + 2 * ((n + 1).bit_length() - 1) + 1


def test_vbyte_decode_errors():
    with pytest.raises(TruncationError):
        vbyte_decode(b"\x80\x80")
    with pytest.raises(OverflowError):
        vbyte_decode(b"\xff" * 10 + b"\x01")
    with pytest.raises(OverflowError):
        vbyte_decode(b"\x80" * 9 + b"\x7f")  # 10 bytes but > 2^64


def test_gamma_decode_errors():
    with pytest.raises(TruncationError):
        gamma_decode("000")
    with pytest.raises(TruncationError):
        gamma_decode("0011")  # body shorter than prefix promises
    with pytest.raises(CorruptionError):
        gamma_decode("0" * 80 + "1" + "0" * 80)


def test_encode_posting_list_empty_is_single_gamma_one():
    cfg = CodecConfig("gamma", "gamma", "gamma")
    assert encode_posting_list(PostingList(0, ()), cfg) == b"\x80"  # "1" padded
    assert decode_posting_list(b"\x80", cfg).postings == ()


def test_encode_posting_list_matches_hand_layout():
    # docs [0,3,4] payloads [2,1,5]: gaps are [1,3,1]
    cfg = CodecConfig("gamma", "gamma", "gamma")
    pl = PostingList.from_pairs(7, [(0, 2), (3, 1), (4, 5)])
    expected_bits = (
        gamma_encode(4)  # count+1
        + gamma_encode(1) + gamma_encode(3) + gamma_encode(1)  # gaps
        + gamma_encode(2) + gamma_encode(1) + gamma_encode(5)  # payloads
    )
    blob = encode_posting_list(pl, cfg)
    got_bits = "".join(format(b, "08b") for b in blob)[: len(expected_bits)]
    assert got_bits == expected_bits
    assert decode_posting_list(blob, cfg, term=7) == pl


posting_lists = st.lists(
    st.tuples(st.integers(0, 500), st.integers(1, 1 << 20)), max_size=30, unique_by=lambda p: p[0]
).map(lambda pairs: tuple(sorted(pairs)))
configs = st.builds(
    CodecConfig,
    st.sampled_from(["vbyte", "gamma", "delta"]),
    st.sampled_from(["vbyte", "gamma", "delta"]),
)


@given(posting_lists, configs)
def test_posting_list_round_trip(pairs, cfg):
    pl = PostingList.from_pairs(0, pairs)
    assert decode_posting_list(encode_posting_list(pl, cfg), cfg).postings == pl.postings


@given(st.lists(posting_lists, max_size=6), configs)
def test_concatenated_lists_are_prefix_free(lists, cfg):
    w = BitWriter()
    for pairs in lists:
        write_pairs(w, pairs, cfg.doc_gap, cfg.payload)
    r = BitReader(w.getvalue(), w.bit_length)
    for pairs in lists:
        assert tuple(read_pairs(r, cfg.doc_gap, cfg.payload)) == pairs
    assert r.pos == w.bit_length


def test_bit_flip_fuzz_never_returns_invalid_structure():
    rng = random.Random(2024)
    cfg = CodecConfig("gamma", "vbyte", "gamma")
    pairs = tuple((d * 3, rng.randint(1, 50)) for d in range(12))
    blob = bytearray(encode_posting_list(PostingList.from_pairs(0, pairs), cfg))
    for _ in range(3000):
        i = rng.randrange(len(blob) * 8)
        blob[i // 8] ^= 1 << (7 - i % 8)
        try:
            decoded = decode_posting_list(bytes(blob), cfg)
        except (MtixError, OverflowError):
            pass
        else:
            # success is allowed, but only with a structurally valid list
            # no longer than its declared count
            assert len(decoded.postings) <= len(pairs) * 8
            prev = -1
            for d, p in decoded.postings:
                assert d > prev and p >= 1
                prev = d
        blob[i // 8] ^= 1 << (7 - i % 8)


def test_truncated_posting_list_stream():
    cfg = CodecConfig("gamma", "gamma", "gamma")
    blob = encode_posting_list(PostingList.from_pairs(0, [(0, 2), (9, 13)]), cfg)
    with pytest.raises(TruncationError):
        decode_posting_list(blob[:1], cfg)


def test_zero_gap_is_corruption():
    from mtix.codec import _put_gamma, _put_vbyte

    w = BitWriter()
    _put_gamma(w, 3)  # count = 2
    _put_vbyte(w, 1)  # doc 0
    _put_vbyte(w, 0)  # zero gap: impossible in a valid stream
    _put_vbyte(w, 5)
    _put_vbyte(w, 5)
    with pytest.raises(CorruptionError):
        read_pairs(BitReader(w.getvalue()), "vbyte", "vbyte")


def test_bitwriter_value_width_guard():
    w = BitWriter()
    with pytest.raises(ValidationError):
        w.write_bits(4, 2)
