import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hiertag.data import (PAD_ID, UNK_ID, ConfigError, ConllFormatError, RawSentence, Span,
                          TagSchemeError, batches, bioes_from_spans, bioes_to_iob2,
                          build_vocab, encode_sentence, format_conll, holdout_split,
                          normalize_token, parse_conll, spans_from_bioes, subsample,
                          tag_index, to_bioes, truncate_chars)
from oracles import iob1_from_spans, iob2_from_spans

LABELS = ["PER", "LOC", "ORG"]


@st.composite
def span_sets(draw, max_len=12):
    """Random non-overlapping span sets over a sentence of random length."""
    length = draw(st.integers(1, max_len))
    spans = set()
    t = 0
    while t < length:
        if draw(st.booleans()):
            end = draw(st.integers(t, min(length - 1, t + 3)))
            spans.add(Span(draw(st.sampled_from(LABELS)), t, end))
            t = end + 1
        else:
            t += 1
    return spans, length


# --- parse_conll ----------------------------------------------------------

def test_parse_single_sentence():
    sents = parse_conll("Mike NNP B-PER\n.  . O\n\n", 0, 2)
    assert len(sents) == 1
    assert sents[0].tokens == ["Mike", "."]
    assert sents[0].tags == ["B-PER", "O"]


def test_parse_empty_and_multiple():
    assert parse_conll("", 0, 1) == []
    sents = parse_conll("a O\nb O\n\nc B-X\n", 0, 1)
    assert len(sents) == 2
    assert sents[1].tokens == ["c"]


def test_parse_drops_docstart_and_reports_line():
    text = "-DOCSTART- -X- O\n\nEU NNP B-ORG\nrejects VBZ O\n"
    sents = parse_conll(text, 0, 2)
    assert [s.tokens for s in sents] == [["EU", "rejects"]]
    with pytest.raises(ConllFormatError, match="line 2"):
        parse_conll("a b c\nshort\n", 0, 2)


def test_parse_tokens_only():
    sents = parse_conll("x\ny\n\nz\n", 0, None)
    assert [s.tokens for s in sents] == [["x", "y"], ["z"]]
    assert sents[0].tags is None


@settings(max_examples=50)
@given(st.lists(st.tuples(st.lists(st.text("abcXYZ09-.", min_size=1, max_size=6), min_size=1,
                                   max_size=5),
                          st.data()), min_size=0, max_size=4))
def test_serialization_round_trip(raw):
    sents = []
    for tokens, data in raw:
        tags = data.draw(st.lists(st.sampled_from(["O", "B-PER", "I-PER"]),
                                  min_size=len(tokens), max_size=len(tokens)))
        sents.append(RawSentence(tokens, tags))
    assert parse_conll(format_conll(sents), 0, 1) == sents


# --- normalization --------------------------------------------------------

def test_normalize_examples():
    assert normalize_token("2003") == "0000"
    assert normalize_token("abc") == "abc"
    assert normalize_token("CoNLL-2002") == "CoNLL-0000"


@given(st.text())
def test_normalize_idempotent(s):
    assert normalize_token(normalize_token(s)) == normalize_token(s)


def test_truncate_examples():
    word = "internationalized"
    assert len(word) == 17
    assert truncate_chars(word, 17) == word
    assert truncate_chars("abcdefgh", 4) == "abgh"
    assert truncate_chars("", 17) == ""
    assert truncate_chars("abcdefg", 4) == "abfg"
    assert truncate_chars("abcdefg", 5) == "abcfg"


@given(st.text(max_size=60), st.integers(2, 40))
def test_truncate_properties(s, limit):
    out = truncate_chars(s, limit)
    assert len(out) <= limit
    if len(s) <= limit:
        assert out == s
    else:
        assert s.startswith(out[:(limit + 1) // 2])
        assert s.endswith(out[(limit + 1) // 2:])


# --- tag schemes ----------------------------------------------------------

def test_to_bioes_examples():
    assert to_bioes(["B-PER"]) == ["S-PER"]
    assert to_bioes(["B-PER", "I-PER"]) == ["B-PER", "E-PER"]
    assert to_bioes(["O", "I-ORG", "I-ORG", "O"]) == ["O", "B-ORG", "E-ORG", "O"]
    assert to_bioes(["I-LOC", "B-LOC", "I-LOC", "I-LOC"]) == ["S-LOC", "B-LOC", "I-LOC", "E-LOC"]
    assert to_bioes(["B-PER", "I-LOC"]) == ["S-PER", "S-LOC"]


@pytest.mark.parametrize("bad", [["X-PER"], ["B"], ["O-PER"], ["S-PER"], ["B-"]])
def test_to_bioes_rejects_malformed(bad):
    with pytest.raises(TagSchemeError):
        to_bioes(bad)


def test_spans_examples():
    assert spans_from_bioes(["S-PER", "O"]) == {Span("PER", 0, 0)}
    assert spans_from_bioes(["B-LOC", "E-LOC", "O"]) == {Span("LOC", 0, 1)}
    assert spans_from_bioes([]) == set()


def test_spans_repair_rules():
    # dangling I / E start a new run
    assert spans_from_bioes(["I-PER", "E-PER"]) == {Span("PER", 0, 1)}
    assert spans_from_bioes(["O", "E-PER"]) == {Span("PER", 1, 1)}
    # run closed by O, label change, new B, or end of sentence
    assert spans_from_bioes(["B-PER", "I-PER", "O"]) == {Span("PER", 0, 1)}
    assert spans_from_bioes(["B-PER", "I-LOC", "E-LOC"]) == {Span("PER", 0, 0), Span("LOC", 1, 2)}
    assert spans_from_bioes(["B-PER", "B-PER"]) == {Span("PER", 0, 0), Span("PER", 1, 1)}
    assert spans_from_bioes(["B-PER"]) == {Span("PER", 0, 0)}
    assert spans_from_bioes(["B-PER", "S-LOC"]) == {Span("PER", 0, 0), Span("LOC", 1, 1)}
    # garbage is treated as O
    assert spans_from_bioes(["junk", "S-X"]) == {Span("X", 1, 1)}


@settings(max_examples=1000)
@given(span_sets())
def test_spans_bioes_round_trip(case):
    spans, length = case
    assert spans_from_bioes(bioes_from_spans(spans, length)) == spans


@settings(max_examples=1000)
@given(span_sets())
def test_iob_conversion_preserves_spans(case):
    spans, length = case
    for iob in (iob2_from_spans(spans, length), iob1_from_spans(spans, length)):
        bioes = to_bioes(iob)
        assert spans_from_bioes(bioes) == spans
        assert bioes == bioes_from_spans(spans, length)
    assert bioes_to_iob2(bioes_from_spans(spans, length)) == iob2_from_spans(spans, length)


@given(st.lists(st.sampled_from(["O", "B-A", "I-A", "E-A", "S-A", "B-B", "E-B", "I-B"]),
                max_size=10))
def test_spans_total_and_deterministic(tags):
    spans = spans_from_bioes(tags)
    assert spans == spans_from_bioes(tags)
    for s in spans:
        assert 0 <= s.start <= s.end < len(tags)


# --- sampling -------------------------------------------------------------

def test_subsample_examples():
    items = list(range(100))
    assert subsample(items, 1.0, 0) == items
    ten = subsample(items, 0.1, 7)
    assert len(ten) == 10
    assert ten == sorted(ten)
    assert subsample(items, 0.1, 7) == ten
    assert len(subsample(list(range(7)), 0.3, 0)) == 3
    for bad in (0, -0.1, 1.5):
        with pytest.raises(ConfigError):
            subsample(items, bad, 0)


def test_holdout_split_partitions():
    items = list(range(25))
    train, dev = holdout_split(items, 0.2, 0)
    assert len(dev) == 5
    assert sorted(train + dev) == items


def test_batches_cover_items_once():
    rng = np.random.default_rng(0)
    out = list(batches(list(range(23)), 10, rng))
    assert [len(b) for b in out] == [10, 10, 3]
    assert sorted(x for b in out for x in b) == list(range(23))


# --- vocabulary -----------------------------------------------------------

def test_vocab_empty_corpus():
    v = build_vocab([])
    assert len(v.words) == 2 and len(v.chars) == 2
    assert v.words.itos[PAD_ID] != v.words.itos[UNK_ID]


def test_vocab_counts_and_min_count():
    corpus = [RawSentence(["a", "a", "b"], ["O", "O", "B-X"])]
    assert len(build_vocab(corpus, min_count=1).words) == 2 + 2
    v = build_vocab(corpus, min_count=2)
    assert "a" in v.words and "b" not in v.words
    assert v.word_id("b") == UNK_ID
    assert v.tags["default"].itos == ["O", "B-X"]


def test_vocab_indexes_pretrained_words_from_other_splits():
    train = [RawSentence(["the", "cat"], ["O", "O"])]
    test = [RawSentence(["the", "Zebra", "qux"], ["O", "O", "O"])]
    v = build_vocab(train, pretrained_words={"zebra", "the"}, extra=test)
    assert "zebra" in v.words
    assert "qux" not in v.words
    assert v.word_id("Zebra") == v.words["zebra"]  # lowercase fallback
    assert v.word_id("qux") == UNK_ID


def test_index_maps_are_inverse():
    v = build_vocab([RawSentence(["x", "y", "x1"], ["O", "O", "O"])])
    for idx in (v.words, v.chars):
        for i, tok in enumerate(idx.itos):
            assert idx[tok] == i


def test_tag_index_puts_o_first():
    assert tag_index([["B-X", "O", "A"]]).itos == ["O", "A", "B-X"]


def test_encode_sentence_normalizes_and_truncates():
    raw = RawSentence(["Year2003", "abcdefghij"], ["O", "B-X"])
    v = build_vocab([raw])
    s = encode_sentence(raw, v, truncation=4)
    assert s.word_ids[0] == v.words["Year0000"]
    chars = "".join(v.chars.itos[i] for i in s.char_ids[0])
    assert chars == "Ye00"
    assert len(s.char_ids[1]) == 4
    assert list(s.gold_tags) == [v.tags["default"]["O"], v.tags["default"]["B-X"]]
    assert len(s.tokens) == len(s.char_ids) == len(s.word_ids) == len(s.gold_tags)


def test_unknown_characters_map_to_unk():
    v = build_vocab([RawSentence(["ab"], ["O"])])
    s = encode_sentence(RawSentence(["az"], None), v)
    assert list(s.char_ids[0]) == [v.chars["a"], UNK_ID]
