"""End-to-end network for one task: char GRU -> word GRU -> CRF.

Parameters live in a flat ``{name: ndarray}`` dict using *local* names:

    char_emb, char_gru.<layer>.<fwd|bwd>.<W_..>
    word_emb, word_gru.<layer>.<fwd|bwd>.<W_..>
    crf.w, crf.A

Embedding gradients come back as :class:`~hiertag.embeddings.SparseGrad`,
everything else as dense arrays.
"""

from dataclasses import asdict, dataclass, field, fields
from typing import Optional

import numpy as np

from . import crf
from .data import TRUNCATION_LIMITS, ConfigError
from .embeddings import SparseGrad, random_rows, table_from_vectors
from .recurrent import (bigru_backward, char_encode_batch, char_encode_batch_backward,
                        glorot, stack_from_params, stack_grads_to_params, stack_shapes,
                        word_encode)


@dataclass
class TrainConfig:
    learning_rate: float = 0.01
    batch_size: int = 10
    epochs: int = 20
    seed: int = 0
    cost_scale: float = 1.0
    word_hidden: int = 300
    word_layers: int = 2
    word_dim: int = 50
    char_hidden: int = 50
    char_layers: int = 2
    char_dim: int = 25
    truncation: dict = field(default_factory=lambda: dict(TRUNCATION_LIMITS))
    default_truncation: int = 17
    labeling_rates: dict = field(default_factory=dict)
    patience: int = 0
    dev_holdout: float = 0.2
    select_task: Optional[str] = None
    min_count: int = 1
    adagrad_epsilon: float = 1e-6
    use_char_gru: bool = True
    use_word_emb: bool = True
    use_gazetteer: bool = True
    freeze_word_emb: bool = False

    def __post_init__(self):
        for name in ("batch_size", "word_hidden", "word_layers", "word_dim",
                     "char_hidden", "char_layers", "char_dim"):
            if getattr(self, name) < 1:
                raise ConfigError(f"{name} must be positive")
        if self.learning_rate < 0 or self.cost_scale < 0 or self.epochs < 0:
            raise ConfigError("learning_rate, cost_scale and epochs must be nonnegative")
        for task, rate in self.labeling_rates.items():
            if not 0 < rate <= 1:
                raise ConfigError(f"labeling rate for {task!r} must be in (0, 1]")
        if not (self.use_char_gru or self.use_word_emb):
            raise ConfigError("cannot ablate both the char GRU and the word embeddings")

    def truncation_for(self, language):
        return self.truncation.get(language, self.default_truncation)

    def to_dict(self):
        return asdict(self)

    @classmethod
    def from_dict(cls, d):
        names = {f.name for f in fields(cls)}
        unknown = set(d) - names
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        return cls(**d)


# --------------------------------------------------------------------------
# Parameter layout
# --------------------------------------------------------------------------

def word_rep_dim(config, word_dim):
    return (2 * config.char_hidden if config.use_char_gru else 0) + \
        (word_dim if config.use_word_emb else 0)


def param_shapes(config, n_chars, n_words, n_tags, word_dim=None, gaz_width=0):
    """Ordered ``{local name: shape}`` for one task's network."""
    word_dim = word_dim or config.word_dim
    shapes = {}
    if config.use_char_gru:
        shapes["char_emb"] = (n_chars, config.char_dim)
        shapes.update(stack_shapes("char_gru", config.char_dim, config.char_hidden,
                                   config.char_layers))
    if config.use_word_emb:
        shapes["word_emb"] = (n_words, word_dim)
    shapes.update(stack_shapes("word_gru", word_rep_dim(config, word_dim),
                               config.word_hidden, config.word_layers))
    shapes["crf.w"] = (n_tags, 2 * config.word_hidden + gaz_width)
    shapes["crf.A"] = (n_tags + 1, n_tags)
    return shapes


def init_param(name, shape, rng, words=None, vectors=None):
    """Initial value for one tensor; ``rng`` is consumed identically for a given shape."""
    if name == "word_emb":
        if vectors:
            return table_from_vectors(vectors, words, rng).matrix
        return random_rows(rng, *shape)
    if name == "char_emb":
        return random_rows(rng, *shape)
    if name == "crf.A":
        return np.zeros(shape)
    return glorot(rng, *shape)


# --------------------------------------------------------------------------
# Forward / backward for one sentence
# --------------------------------------------------------------------------

def _length_groups(char_ids):
    groups = {}
    for t, ids in enumerate(char_ids):
        if len(ids) == 0:
            raise ValueError("token with no characters")
        groups.setdefault(len(ids), []).append(t)
    return sorted(groups.items())


def encode_words(sentence, params, config):
    """Word representations (T, D) and a cache for :func:`encode_words_backward`."""
    T = len(sentence)
    blocks = []
    cache = {"T": T}
    if config.use_char_gru:
        stack = stack_from_params(params, "char_gru", config.char_layers)
        char_block = np.empty((T, 2 * config.char_hidden))
        groups = []
        for _, positions in _length_groups(sentence.char_ids):
            ids = np.stack([sentence.char_ids[t] for t in positions])
            rep, gcache = char_encode_batch(ids, params["char_emb"], stack)
            char_block[positions] = rep
            groups.append((positions, ids, gcache))
        blocks.append(char_block)
        cache["char"] = groups
    if config.use_word_emb:
        blocks.append(params["word_emb"][sentence.word_ids])
    reps = np.concatenate(blocks, axis=1) if len(blocks) > 1 else blocks[0]
    return reps, cache


def encode_words_backward(d_reps, sentence, cache, config, grads):
    off = 0
    if config.use_char_gru:
        width = 2 * config.char_hidden
        d_char = d_reps[:, :width]
        off = width
        emb_grad = grads.setdefault("char_emb", SparseGrad(config.char_dim))
        for positions, ids, gcache in cache["char"]:
            d_rows, layer_grads = char_encode_batch_backward(d_char[positions], gcache)
            emb_grad.add_many(ids.reshape(-1), d_rows.reshape(-1, config.char_dim))
            _accumulate(grads, stack_grads_to_params(layer_grads, "char_gru"))
    if config.use_word_emb and not config.freeze_word_emb:
        d_word = d_reps[:, off:]
        emb_grad = grads.setdefault("word_emb", SparseGrad(d_word.shape[1]))
        emb_grad.add_many(sentence.word_ids, d_word)


def crf_features(H, sentence):
    if sentence.features is None:
        return H
    return np.concatenate([H, sentence.features], axis=1)


def forward_loss(sentence, params, config):
    """Cost-augmented CRF loss of one gold-tagged sentence, plus a backward cache."""
    if sentence.gold_tags is None:
        raise ValueError("forward_loss needs gold tags")
    reps, enc_cache = encode_words(sentence, params, config)
    H, word_cache = word_encode(reps, stack_from_params(params, "word_gru", config.word_layers))
    phi = crf_features(H, sentence)
    emissions = crf.emission_scores(phi, params["crf.w"])
    loss, dE, dA = crf.loss_and_grad(emissions, sentence.gold_tags, params["crf.A"],
                                     config.cost_scale)
    cache = (sentence, params, enc_cache, word_cache, phi, dE, dA, H.shape[1])
    return loss, cache


def backward(cache, config):
    """Gradients of :func:`forward_loss` for every parameter of the sentence's task."""
    sentence, params, enc_cache, word_cache, phi, dE, dA, h_dim = cache
    grads = {"crf.w": dE.T @ phi, "crf.A": dA}
    d_phi = dE @ params["crf.w"]
    d_reps, layer_grads = bigru_backward(d_phi[:, :h_dim], word_cache)
    _accumulate(grads, stack_grads_to_params(layer_grads, "word_gru"))
    encode_words_backward(d_reps, sentence, enc_cache, config, grads)
    return grads


def loss_and_grads(sentence, params, config):
    loss, cache = forward_loss(sentence, params, config)
    return loss, backward(cache, config)


def emissions_for(sentence, params, config):
    reps, _ = encode_words(sentence, params, config)
    H, _ = word_encode(reps, stack_from_params(params, "word_gru", config.word_layers))
    return crf.emission_scores(crf_features(H, sentence), params["crf.w"])


def predict(sentence, params, config):
    """Viterbi tag ids for one sentence."""
    return crf.viterbi_decode(emissions_for(sentence, params, config), params["crf.A"])


def _accumulate(total, grads):
    for name, g in grads.items():
        cur = total.get(name)
        if cur is None:
            total[name] = g.copy() if isinstance(g, np.ndarray) else g
        elif isinstance(g, SparseGrad):
            cur.merge(g)
        else:
            cur += g


def accumulate_grads(total, grads):
    """Sum ``grads`` into ``total`` in place (dense add / sparse row merge)."""
    _accumulate(total, grads)
    return total
