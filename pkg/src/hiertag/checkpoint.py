"""Model checkpoints: a text header followed by raw little-endian float64 data.

Layout::

    HIERTAG-CHECKPOINT 1\\n
    <one line of canonical JSON metadata>\\n
    <tensor bytes, in header order>

The JSON is written with sorted keys and no whitespace, and tensors are
ordered by name, so saving a loaded checkpoint reproduces the file byte for
byte.
"""

import json

import numpy as np

from .data import Index, Vocabulary
from .gazetteer import parse_gazetteer
from .model import TrainConfig
from .training import SharingPlan, TaskInfo, Tagger

MAGIC = b"HIERTAG-CHECKPOINT"
VERSION = 1
_LE = "<f8"


class CheckpointError(ValueError):
    pass


def _index_groups(indices):
    """Deduplicate shared Index objects; return (group lists, object -> group id)."""
    groups, ids = [], {}
    for idx in indices:
        if id(idx) not in ids:
            ids[id(idx)] = len(groups)
            groups.append(idx)
    return groups, ids


def to_bytes(tagger):
    tasks = list(tagger.tasks.values())
    word_groups, word_ids = _index_groups(t.vocab.words for t in tasks)
    char_groups, char_ids = _index_groups(t.vocab.chars for t in tasks)
    names = sorted(tagger.tensors)
    header = {
        "config": tagger.config.to_dict(),
        "plan": {"mode": tagger.plan.mode, "classes": tagger.plan.classes},
        "words": [{"itos": g.itos, "reserved": g.n_reserved} for g in word_groups],
        "chars": [{"itos": g.itos, "reserved": g.n_reserved} for g in char_groups],
        "tasks": [{
            "task_id": t.task_id,
            "language": t.language,
            "metric": t.metric,
            "truncation": t.truncation,
            "words": word_ids[id(t.vocab.words)],
            "chars": char_ids[id(t.vocab.chars)],
            "tags": t.tags.itos,
            "gazetteer": None if t.gazetteer is None else t.gazetteer.to_lines(),
        } for t in tasks],
        "tensors": [[n, list(tagger.tensors[n].shape)] for n in names],
    }
    meta = json.dumps(header, sort_keys=True, separators=(",", ":"), ensure_ascii=True)
    parts = [MAGIC + b" " + str(VERSION).encode() + b"\n", meta.encode("ascii") + b"\n"]
    for n in names:
        parts.append(np.ascontiguousarray(tagger.tensors[n], dtype=_LE).tobytes())
    return b"".join(parts)


def from_bytes(blob):
    try:
        first, meta, body = blob.split(b"\n", 2)
    except ValueError:
        raise CheckpointError("truncated checkpoint header") from None
    magic, _, version = first.partition(b" ")
    if magic != MAGIC:
        raise CheckpointError("not a hiertag checkpoint")
    if int(version) != VERSION:
        raise CheckpointError(f"unsupported checkpoint version {int(version)}")
    header = json.loads(meta)

    config = TrainConfig.from_dict(header["config"])
    plan = SharingPlan(header["plan"]["mode"], dict(header["plan"]["classes"]))
    words = [Index.from_list(g["itos"], g["reserved"]) for g in header["words"]]
    chars = [Index.from_list(g["itos"], g["reserved"]) for g in header["chars"]]
    tasks = {}
    shared_tags = {}
    for t in header["tasks"]:
        tags = Index.from_list(t["tags"])
        key = (t["words"], t["chars"])
        vocab = shared_tags.get(key)
        if vocab is None:
            vocab = shared_tags[key] = Vocabulary(words[t["words"]], chars[t["chars"]], {})
        vocab.tags[t["task_id"]] = tags
        gaz = None
        if t["gazetteer"] is not None:
            gaz = parse_gazetteer("\n".join(t["gazetteer"]))
        tasks[t["task_id"]] = TaskInfo(t["task_id"], t["language"], t["metric"],
                                       t["truncation"], vocab, gaz)

    tensors = {}
    offset = 0
    for name, shape in header["tensors"]:
        count = int(np.prod(shape)) if shape else 1
        nbytes = 8 * count
        if offset + nbytes > len(body):
            raise CheckpointError(f"tensor {name!r} runs past the end of the file")
        arr = np.frombuffer(body, dtype=_LE, count=count, offset=offset)
        tensors[name] = arr.astype(np.float64).reshape(shape)
        offset += nbytes
    if offset != len(body):
        raise CheckpointError("trailing bytes after the last tensor")
    return Tagger(config, plan, tasks, tensors)


def save(tagger, path):
    with open(path, "wb") as fh:
        fh.write(to_bytes(tagger))


def load(path):
    with open(path, "rb") as fh:
        return from_bytes(fh.read())
