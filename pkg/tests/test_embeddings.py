import numpy as np
import numpy.testing as npt
import pytest

from hiertag.data import RawSentence, build_vocab
from hiertag.embeddings import (EmbeddingFormatError, EmbeddingTable, load_pretrained,
                                read_embedding_pair, read_embeddings)
from hiertag.model import TrainConfig
from hiertag.training import TaskSpec, train_standalone


@pytest.fixture
def vocab():
    return build_vocab([RawSentence(["the", "cat", "Sat"], ["O", "O", "O"])])


def write(tmp_path, name, text):
    p = tmp_path / name
    p.write_text(text, encoding="utf-8")
    return p


def test_single_word_copied(tmp_path, vocab):
    table = load_pretrained(write(tmp_path, "e.txt", "the 0.1 0.2\n"), vocab)
    npt.assert_array_equal(table.lookup(vocab.words["the"]), [0.1, 0.2])
    assert table.hits == 1
    assert table.coverage == pytest.approx(1 / 3)
    assert table.dim == 2


def test_empty_file_all_random(tmp_path, vocab):
    table = load_pretrained(write(tmp_path, "e.txt", ""), vocab, dim=5)
    assert table.coverage == 0 and table.hits == 0
    assert table.matrix.shape == (len(vocab.words), 5)
    assert np.all(np.abs(table.matrix) <= 0.5 / 5)
    assert np.all(table.matrix != 0)


def test_senna_shaped_file(tmp_path, vocab):
    rng = np.random.default_rng(0)
    lines = [f"{w} " + " ".join(f"{x:.6f}" for x in rng.normal(size=50)) for w in ("the", "dog")]
    table = load_pretrained(write(tmp_path, "senna.txt", "\n".join(lines)), vocab)
    assert table.dim == 50


def test_file_vectors_verbatim(tmp_path, vocab):
    text = "the 0.125 -3.5e-2 7\ncat 1 2 3\nsat 9 9 9\nfish 0 0 0\n"
    table = load_pretrained(write(tmp_path, "e.txt", text), vocab)
    vectors = read_embeddings(tmp_path / "e.txt")
    npt.assert_array_equal(table.lookup(vocab.words["the"]), vectors["the"])
    npt.assert_array_equal(table.lookup(vocab.words["cat"]), vectors["cat"])
    # "Sat" picks up the lowercase vector
    npt.assert_array_equal(table.lookup(vocab.words["Sat"]), vectors["sat"])


def test_inconsistent_dimension(tmp_path, vocab):
    with pytest.raises(EmbeddingFormatError, match=":2:"):
        load_pretrained(write(tmp_path, "e.txt", "the 1 2\ncat 1 2 3\n"), vocab)


def test_missing_file(vocab, tmp_path):
    with pytest.raises(OSError):
        load_pretrained(tmp_path / "nope.txt", vocab)


def test_two_file_variant(tmp_path):
    words = write(tmp_path, "w.lst", "the\ncat\n")
    matrix = write(tmp_path, "m.txt", "1 2\n3 4\n")
    vectors = read_embedding_pair(words, matrix)
    npt.assert_array_equal(vectors["cat"], [3, 4])
    bad = write(tmp_path, "bad.txt", "1 2\n")
    with pytest.raises(EmbeddingFormatError):
        read_embedding_pair(words, bad)


def test_lookup_and_accumulate():
    table = EmbeddingTable(np.arange(6.0).reshape(3, 2))
    npt.assert_array_equal(table.lookup(1), [2, 3])
    table.accumulate_grad(1, np.array([1.0, 1.0]))
    table.accumulate_grad(1, np.array([0.5, -1.0]))
    npt.assert_array_equal(table.grad.rows[1], [1.5, 0.0])
    assert len(table.grad) == 1
    with pytest.raises(IndexError):
        table.lookup(3)
    with pytest.raises(IndexError):
        table.accumulate_grad(-1, np.zeros(2))


def test_frozen_word_embeddings_unchanged_by_training():
    sents = [RawSentence(["a", "b", "c"], ["B-X", "O", "O"]),
             RawSentence(["b", "a"], ["O", "B-X"])]
    cfg = TrainConfig(word_hidden=3, word_dim=4, char_hidden=2, char_dim=3, epochs=3,
                      freeze_word_emb=True, dev_holdout=0)
    from hiertag.training import build_tagger
    before = build_tagger([TaskSpec("t", sents)], "standalone", cfg)[0].tensors["t/word_emb"].copy()
    result = train_standalone(TaskSpec("t", sents), cfg)
    npt.assert_array_equal(result.tagger.tensors["t/word_emb"], before)
    assert not np.array_equal(result.tagger.tensors["t/crf.w"],
                              build_tagger([TaskSpec("t", sents)], "standalone",
                                           cfg)[0].tensors["t/crf.w"])
