"""Parameter sharing, the tagger container and the AdaGrad training loops."""

import logging
import math
import time
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from . import model as net
from .data import (ConfigError, Vocabulary, add_chars, add_words, as_bioes,
                   bioes_to_iob2, encode_sentence, holdout_split, new_char_index,
                   new_word_index, subsample, tag_index)
from .embeddings import SparseGrad, vectors_dim
from .evaluation import evaluate
from .gazetteer import features as gazetteer_features
from .numeric import AdaGradState, adagrad_update, adagrad_update_rows

log = logging.getLogger(__name__)

MODES = ("standalone", "multi_task", "cross_lingual")


# --------------------------------------------------------------------------
# Sharing plan
# --------------------------------------------------------------------------

def _level(name):
    if name == "char_emb" or name.startswith("char_gru."):
        return "char"
    if name == "word_emb" or name.startswith("word_gru."):
        return "word"
    if name in ("crf.w", "crf.A"):
        return "crf"
    raise ValueError(f"unclassifiable parameter {name!r}")


@dataclass
class SharingPlan:
    mode: str
    classes: dict = field(default_factory=dict)  # local name -> "shared" | "specific"

    def is_shared(self, name):
        return self.classes[name] == "shared"

    def global_name(self, task_id, name):
        return name if self.is_shared(name) else f"{task_id}/{name}"

    @property
    def shared(self):
        return sorted(n for n, c in self.classes.items() if c == "shared")

    @property
    def specific(self):
        return sorted(n for n, c in self.classes.items() if c == "specific")


def classify_params(names, mode):
    """Split local parameter names into shared and task-specific sets.

    multi_task shares everything below the CRF; cross_lingual shares the
    character embeddings and character GRU; standalone shares nothing.
    """
    if mode not in MODES:
        raise ConfigError(f"unknown sharing mode {mode!r}")
    shared_levels = {"standalone": set(), "multi_task": {"char", "word"},
                     "cross_lingual": {"char"}}[mode]
    classes = {}
    for name in names:
        classes[name] = "shared" if _level(name) in shared_levels else "specific"
    return SharingPlan(mode, classes)


# --------------------------------------------------------------------------
# Tasks and the tagger container
# --------------------------------------------------------------------------

@dataclass
class TaskSpec:
    """One task (or language): data splits plus per-task options.

    ``metric='f1'`` tasks are chunk tasks whose tags are converted to BIOES;
    ``metric='accuracy'`` tasks keep their tags as given.
    """

    task_id: str
    train: list
    dev: list = field(default_factory=list)
    test: list = field(default_factory=list)
    language: str = "en"
    metric: str = "f1"
    embeddings: Optional[dict] = None
    gazetteer: object = None


@dataclass
class TaskInfo:
    task_id: str
    language: str
    metric: str
    truncation: int
    vocab: Vocabulary
    gazetteer: object = None

    @property
    def tags(self):
        return self.vocab.tags[self.task_id]


class Tagger:
    """Trained (or initialized) tensors for one or more tasks.

    ``tensors`` is keyed by global name: shared tensors under their local
    name, task-specific ones as ``"<task>/<local name>"``. A shared tensor is
    one ndarray object seen by every task.
    """

    def __init__(self, config, plan, tasks, tensors):
        self.config = config
        self.plan = plan
        self.tasks = tasks
        self.tensors = tensors

    def local_names(self, task_id):
        prefix = f"{task_id}/"
        names = [n[len(prefix):] for n in self.tensors if n.startswith(prefix)]
        names += [n for n in self.tensors if "/" not in n]
        return names

    def params(self, task_id):
        if task_id not in self.tasks:
            raise KeyError(f"unknown task {task_id!r}")
        return {n: self.tensors[self.plan.global_name(task_id, n)]
                for n in self.local_names(task_id)}

    def encode(self, raw, task_id, with_tags=True):
        info = self.tasks[task_id]
        if with_tags and raw.tags is not None and info.metric == "f1":
            raw = type(raw)(raw.tokens, as_bioes(raw.tags))
        sent = encode_sentence(raw, info.vocab, task_id, info.truncation, with_tags)
        if info.gazetteer is not None and self.config.use_gazetteer:
            sent.features = gazetteer_features(raw.tokens, info.gazetteer)
        return sent

    def predict_ids(self, sentences, task_id):
        params = self.params(task_id)
        return [net.predict(s, params, self.config) for s in sentences]

    def tag(self, raws, task_id, scheme="bioes"):
        """Predicted tag strings for raw sentences."""
        itos = self.tasks[task_id].tags.itos
        out = []
        for raw in raws:
            ids = net.predict(self.encode(raw, task_id, with_tags=False),
                              self.params(task_id), self.config)
            tags = [itos[i] for i in ids]
            if scheme == "iob2" and self.tasks[task_id].metric == "f1":
                tags = bioes_to_iob2(tags)
            out.append(tags)
        return out

    def score(self, sentences, task_id):
        """Dev/test metric for encoded, gold-tagged sentences."""
        itos = self.tasks[task_id].tags.itos
        gold = [[itos[i] for i in s.gold_tags] for s in sentences]
        pred = [[itos[i] for i in p] for p in self.predict_ids(sentences, task_id)]
        return evaluate(gold, pred, self.tasks[task_id].metric)


# --------------------------------------------------------------------------
# Building a tagger from task specs
# --------------------------------------------------------------------------

@dataclass
class PreparedTask:
    spec: TaskSpec
    train: list
    dev: list


def _prepare_splits(spec, config):
    def to_scheme(sents):
        if spec.metric != "f1":
            return list(sents)
        return [type(s)(s.tokens, as_bioes(s.tags)) for s in sents]

    if not spec.train:
        raise ConfigError(f"task {spec.task_id!r} has no training sentences")
    train, dev = to_scheme(spec.train), to_scheme(spec.dev)
    if not dev and config.dev_holdout > 0 and len(train) > 1:
        train, dev = holdout_split(train, config.dev_holdout, config.seed)
    rate = config.labeling_rates.get(spec.task_id, 1.0)
    train = subsample(train, rate, config.seed)
    return PreparedTask(spec, train, dev)


def build_tagger(tasks, mode, config):
    """Vocabularies, sharing plan and initial tensors for ``tasks``."""
    if mode not in MODES:
        raise ConfigError(f"unknown sharing mode {mode!r}")
    ids = [t.task_id for t in tasks]
    if len(set(ids)) != len(ids) or any("/" in i for i in ids):
        raise ConfigError("task ids must be unique and contain no '/'")
    if mode == "standalone" and len(tasks) != 1:
        raise ConfigError("standalone mode trains exactly one task")
    if mode == "multi_task":
        if len({t.language for t in tasks}) > 1:
            raise ConfigError("multi_task sharing needs one language (one word vocabulary)")
        dims = {vectors_dim(t.embeddings) for t in tasks if t.embeddings}
        if len(dims) > 1:
            raise ConfigError("multi_task tasks use pretrained embeddings of different sizes")

    prepared = [_prepare_splits(t, config) for t in tasks]

    shared_chars = new_char_index() if mode != "standalone" else None
    shared_words = new_word_index() if mode == "multi_task" else None
    shared_vectors = next((t.embeddings for t in tasks if t.embeddings), None)
    infos = {}
    word_sources = {}
    for p in prepared:
        spec = p.spec
        chars = shared_chars if shared_chars is not None else new_char_index()
        add_chars(chars, p.train)
        words = shared_words if shared_words is not None else new_word_index()
        vectors = shared_vectors if mode == "multi_task" else spec.embeddings
        add_words(words, p.train, config.min_count, vectors, extra=p.dev + list(spec.test))
        tags = tag_index([s.tags for s in p.train + p.dev + _test_split(spec.test, spec)])
        vocab = Vocabulary(words, chars, {spec.task_id: tags})
        infos[spec.task_id] = TaskInfo(spec.task_id, spec.language, spec.metric,
                                       config.truncation_for(spec.language), vocab,
                                       spec.gazetteer if config.use_gazetteer else None)
        word_sources[spec.task_id] = vectors

    shapes = {}
    for spec in tasks:
        info = infos[spec.task_id]
        vectors = word_sources[spec.task_id]
        gaz_width = info.gazetteer.width if info.gazetteer is not None else 0
        shapes[spec.task_id] = net.param_shapes(
            config, len(info.vocab.chars), len(info.vocab.words), len(info.tags),
            word_dim=vectors_dim(vectors) if vectors else None, gaz_width=gaz_width)

    names = list(dict.fromkeys(n for s in shapes.values() for n in s))
    plan = classify_params(names, mode)
    rng = np.random.default_rng(config.seed)
    tensors = {}
    for spec in tasks:
        info = infos[spec.task_id]
        for name, shape in shapes[spec.task_id].items():
            gname = plan.global_name(spec.task_id, name)
            if gname in tensors:
                if tensors[gname].shape != tuple(shape):
                    raise ConfigError(f"shared tensor {name!r} has conflicting shapes")
                continue
            tensors[gname] = net.init_param(name, shape, rng, info.vocab.words,
                                            word_sources[spec.task_id])
    tagger = Tagger(config, plan, infos, tensors)
    return tagger, prepared


def _test_split(test, spec):
    if spec.metric != "f1":
        return list(test)
    return [type(s)(s.tokens, as_bioes(s.tags)) for s in test if s.tags is not None]


# --------------------------------------------------------------------------
# Optimization
# --------------------------------------------------------------------------

class Optimizer:
    """Per-tensor AdaGrad states keyed by global tensor name."""

    def __init__(self, tagger):
        self.tagger = tagger
        cfg = tagger.config
        self.states = {name: AdaGradState.like(t, cfg.learning_rate, cfg.adagrad_epsilon)
                       for name, t in tagger.tensors.items()}

    def step(self, task_id, grads):
        tagger = self.tagger
        for name in sorted(grads):
            if name == "word_emb" and tagger.config.freeze_word_emb:
                continue
            gname = tagger.plan.global_name(task_id, name)
            param, state, g = tagger.tensors[gname], self.states[gname], grads[name]
            if isinstance(g, SparseGrad):
                rows, block = g.items()
                adagrad_update_rows(param, rows, block, state)
            else:
                adagrad_update(param, g, state)


def batch_gradient(sentences, params, config):
    """Summed loss and gradients over a mini-batch."""
    total_loss = 0.0
    total = {}
    for s in sentences:
        loss, grads = net.loss_and_grads(s, params, config)
        total_loss += loss
        net.accumulate_grads(total, grads)
    return total_loss, total


def _batch_stream(items, batch_size, rng):
    """Endless shuffled batches; reshuffles after each full pass."""
    while True:
        order = rng.permutation(len(items))
        for i in range(0, len(order), batch_size):
            yield [items[j] for j in order[i:i + batch_size]]


@dataclass
class EpochRecord:
    epoch: int
    task_id: str
    loss: float
    dev: float
    seconds: float

    def line(self):
        return f"{self.epoch}\t{self.task_id}\t{self.loss:.6f}\t{self.dev:.2f}\t{self.seconds:.2f}"


@dataclass
class TrainResult:
    tagger: Tagger
    history: list
    best_epoch: int
    best_dev: dict
    data: list

    def encoded(self, task_id, split):
        for p in self.data:
            if p.spec.task_id == task_id:
                raws = {"train": p.train, "dev": p.dev, "test": _test_split(p.spec.test, p.spec)}[split]
                return [self.tagger.encode(r, task_id) for r in raws]
        raise KeyError(task_id)


def _fit(tasks, mode, config, log_file=None, callback=None):
    tagger, prepared = build_tagger(tasks, mode, config)
    encoded = [[tagger.encode(r, p.spec.task_id) for r in p.train] for p in prepared]
    dev = [[tagger.encode(r, p.spec.task_id) for r in p.dev] for p in prepared]
    task_ids = [p.spec.task_id for p in prepared]
    params = {t: tagger.params(t) for t in task_ids}
    optimizer = Optimizer(tagger)
    rngs = [np.random.default_rng([config.seed, i]) for i in range(len(task_ids))]
    has_dev = any(dev)
    if config.select_task is not None and config.select_task not in task_ids:
        raise ConfigError(f"select_task {config.select_task!r} is not a task")

    history = []
    best_score, best_epoch, best_dev, best_tensors = -math.inf, 0, {}, None
    stale = 0
    last_epoch = 0
    for epoch in range(1, config.epochs + 1):
        start = time.perf_counter()
        streams = [_batch_stream(e, config.batch_size, r) for e, r in zip(encoded, rngs)]
        n_iter = max(math.ceil(len(e) / config.batch_size) for e in encoded)
        losses = [[] for _ in task_ids]
        for _ in range(n_iter):
            for d, task_id in enumerate(task_ids):
                batch = next(streams[d])
                loss, grads = batch_gradient(batch, params[task_id], config)
                if not np.isfinite(loss):
                    raise FloatingPointError(f"non-finite loss on task {task_id!r}")
                optimizer.step(task_id, grads)
                losses[d].append(loss)

        scores = {}
        for d, task_id in enumerate(task_ids):
            scores[task_id] = tagger.score(dev[d], task_id) if dev[d] else float("nan")
            rec = EpochRecord(epoch, task_id, float(np.mean(losses[d])), scores[task_id],
                              time.perf_counter() - start)
            history.append(rec)
            log.info(rec.line())
            if log_file is not None:
                log_file.write(rec.line() + "\n")

        last_epoch = epoch
        stop = False
        if has_dev:
            if config.select_task is not None:
                current = scores[config.select_task]
            else:
                current = float(np.nanmean([scores[t] for t in task_ids]))
            if current > best_score:
                best_score, best_epoch, best_dev = current, epoch, dict(scores)
                best_tensors = {n: t.copy() for n, t in tagger.tensors.items()}
                stale = 0
            else:
                stale += 1
                stop = bool(config.patience) and stale >= config.patience
        if callback is not None and callback(epoch, tagger):
            stop = True
        if stop:
            break

    if best_tensors is not None:
        for name, value in best_tensors.items():
            tagger.tensors[name][...] = value
    else:
        best_epoch = last_epoch
    return TrainResult(tagger, history, best_epoch, best_dev, prepared)


def train_standalone(task, config, log_file=None, callback=None):
    """Train one task on its own and keep the best-dev checkpoint.

    ``callback(epoch, tagger)`` runs after each epoch; a true return value
    stops training after that epoch.
    """
    return _fit([task], "standalone", config, log_file, callback)


def train_joint(tasks, plan, config, log_file=None, callback=None):
    """Alternate mini-batch steps over ``tasks`` with shared parameters.

    ``plan`` is a mode name or a :class:`SharingPlan` (only its mode is used;
    the partition is derived from the parameter registry).
    """
    mode = plan.mode if isinstance(plan, SharingPlan) else plan
    if mode == "standalone":
        raise ConfigError("joint training needs a multi_task or cross_lingual plan")
    if not tasks:
        raise ConfigError("joint training needs at least one task")
    return _fit(list(tasks), mode, config, log_file, callback)
