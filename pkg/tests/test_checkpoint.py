import numpy as np
import numpy.testing as npt
import pytest

from hiertag import checkpoint
from hiertag.gazetteer import parse_gazetteer
from hiertag.model import TrainConfig
from hiertag.synthetic import suffix_task
from hiertag.training import TaskSpec, build_tagger, train_joint, train_standalone

SMALL = dict(word_hidden=6, char_hidden=4, char_dim=3, word_dim=5)


@pytest.fixture(scope="module")
def trained():
    train, test = suffix_task(12, 4)
    gaz = parse_gazetteer("PER anna\nORG acme corp\n")
    return train_standalone(TaskSpec("A", train, test=test, gazetteer=gaz),
                            TrainConfig(epochs=1, **SMALL)).tagger


def test_save_load_save_is_byte_identical(trained, tmp_path):
    a, b = tmp_path / "a.ckpt", tmp_path / "b.ckpt"
    checkpoint.save(trained, a)
    checkpoint.save(checkpoint.load(a), b)
    assert a.read_bytes() == b.read_bytes()
    assert a.read_bytes().startswith(b"HIERTAG-CHECKPOINT 1\n")


def test_round_trip_contents(trained):
    loaded = checkpoint.from_bytes(checkpoint.to_bytes(trained))
    assert loaded.config == trained.config
    assert loaded.plan == trained.plan
    assert set(loaded.tensors) == set(trained.tensors)
    for name, t in trained.tensors.items():
        assert loaded.tensors[name].dtype == np.float64
        npt.assert_array_equal(loaded.tensors[name], t)
    a, b = trained.tasks["A"], loaded.tasks["A"]
    assert a.vocab.words == b.vocab.words and a.vocab.chars == b.vocab.chars
    assert a.tags == b.tags
    assert b.gazetteer.phrases == a.gazetteer.phrases
    raws = suffix_task(5, 5, seed=3)[1]
    assert loaded.tag(raws, "A") == trained.tag(raws, "A")


def test_shared_structure_survives(tmp_path):
    a = TaskSpec("A", suffix_task(10, 2, seed=0)[0])
    b = TaskSpec("B", suffix_task(10, 2, seed=1, language="xx")[0], language="xx")
    tagger = train_joint([a, b], "cross_lingual", TrainConfig(epochs=1, **SMALL)).tagger
    loaded = checkpoint.from_bytes(checkpoint.to_bytes(tagger))
    assert loaded.tasks["A"].vocab.chars is loaded.tasks["B"].vocab.chars
    assert loaded.params("A")["char_emb"] is loaded.params("B")["char_emb"]
    assert checkpoint.to_bytes(loaded) == checkpoint.to_bytes(tagger)


def test_identical_runs_give_identical_files():
    train, test = suffix_task(12, 4)
    blobs = [checkpoint.to_bytes(train_standalone(TaskSpec("A", train, test=test),
                                                  TrainConfig(epochs=2, **SMALL)).tagger)
             for _ in range(2)]
    assert blobs[0] == blobs[1]


def test_corrupt_files():
    tagger, _ = build_tagger([TaskSpec("A", suffix_task(5, 1)[0])], "standalone",
                             TrainConfig(**SMALL))
    blob = checkpoint.to_bytes(tagger)
    with pytest.raises(checkpoint.CheckpointError):
        checkpoint.from_bytes(b"NOPE 1\n{}\n")
    with pytest.raises(checkpoint.CheckpointError):
        checkpoint.from_bytes(blob[:-8])
    with pytest.raises(checkpoint.CheckpointError):
        checkpoint.from_bytes(blob + b"\0")
    with pytest.raises(checkpoint.CheckpointError):
        checkpoint.from_bytes(blob.replace(b"CHECKPOINT 1", b"CHECKPOINT 9", 1))
