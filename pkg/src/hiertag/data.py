"""CoNLL ingestion, token normalization, vocabularies, tag schemes and batching."""

import math
import re
from collections import Counter
from dataclasses import dataclass, field
from typing import NamedTuple, Optional

import numpy as np

PAD = "<pad>"
UNK = "<unk>"
PAD_ID = 0
UNK_ID = 1
DOCSTART = "-DOCSTART-"

# Character truncation thresholds per language.
TRUNCATION_LIMITS = {"en": 17, "nl": 35, "es": 20}

_DIGIT = re.compile(r"\d")
_TAG = re.compile(r"^([BIESO])(?:-(.+))?$")


class ConllFormatError(ValueError):
    pass


class TagSchemeError(ValueError):
    pass


class ConfigError(ValueError):
    """Invalid configuration or incompatible inputs."""


@dataclass
class RawSentence:
    """A sentence as read from disk, before indexing."""

    tokens: list
    tags: Optional[list] = None


@dataclass
class Sentence:
    """An indexed sentence ready for the encoder.

    ``char_ids`` holds one int array per token (normalized and truncated),
    ``features`` the optional T x C gazetteer indicator matrix.
    """

    tokens: list
    char_ids: list
    word_ids: np.ndarray
    gold_tags: Optional[np.ndarray] = None
    task_id: str = "default"
    features: Optional[np.ndarray] = None

    def __len__(self):
        return len(self.tokens)


class Span(NamedTuple):
    label: str
    start: int
    end: int


# --------------------------------------------------------------------------
# Reading and writing column files
# --------------------------------------------------------------------------

def parse_conll(text, token_column=0, tag_column=-1):
    """Split column text into sentences.

    Blank lines separate sentences and ``-DOCSTART-`` lines are dropped.
    ``tag_column=None`` reads tokens only (plain one-token-per-line input).
    """
    sentences = []
    tokens, tags = [], []

    def flush():
        if tokens:
            sentences.append(RawSentence(list(tokens), None if tag_column is None else list(tags)))
        tokens.clear()
        tags.clear()

    for lineno, line in enumerate(text.splitlines(), start=1):
        cols = line.split()
        if not cols:
            flush()
            continue
        if cols[0] == DOCSTART:
            flush()
            continue
        try:
            tokens.append(cols[token_column])
            if tag_column is not None:
                tags.append(cols[tag_column])
        except IndexError:
            raise ConllFormatError(
                f"line {lineno}: expected columns {token_column} and {tag_column}, "
                f"found {len(cols)}") from None
    flush()
    return sentences


def read_conll(path, token_column=0, tag_column=-1, encoding="utf-8"):
    with open(path, encoding=encoding) as fh:
        return parse_conll(fh.read(), token_column, tag_column)


def format_conll(sentences, tags=None):
    """Inverse of :func:`parse_conll` for two-column output."""
    lines = []
    for i, sent in enumerate(sentences):
        sent_tags = tags[i] if tags is not None else sent.tags
        for j, tok in enumerate(sent.tokens):
            lines.append(tok if sent_tags is None else f"{tok} {sent_tags[j]}")
        lines.append("")
    return "\n".join(lines) + ("\n" if lines else "")


# --------------------------------------------------------------------------
# Token normalization
# --------------------------------------------------------------------------

def normalize_token(token):
    """Replace every decimal digit with ``0``."""
    return _DIGIT.sub("0", token)


def truncate_chars(token, limit):
    """Keep the first ceil(limit/2) and last floor(limit/2) characters of long tokens."""
    if limit < 2:
        raise ValueError("truncation limit must be at least 2")
    if len(token) <= limit:
        return token
    head = (limit + 1) // 2
    tail = limit // 2
    return token[:head] + token[len(token) - tail:]


# --------------------------------------------------------------------------
# Tag schemes
# --------------------------------------------------------------------------

def _split_tag(tag):
    m = _TAG.match(tag)
    if m is None:
        raise TagSchemeError(f"malformed tag {tag!r}")
    prefix, label = m.groups()
    if (prefix == "O") != (label is None):
        raise TagSchemeError(f"malformed tag {tag!r}")
    return prefix, label


def to_bioes(tags):
    """Convert IOB1 or IOB2 tags to BIOES.

    A run starts at ``B-X``, or at ``I-X`` when the previous tag is not part
    of an ``X`` run; this reading covers both IOB variants.
    """
    parsed = []
    for tag in tags:
        prefix, label = _split_tag(tag)
        if prefix not in ("B", "I", "O"):
            raise TagSchemeError(f"{tag!r} is not an IOB tag")
        parsed.append((prefix, label))

    out = []
    n = len(parsed)
    for i, (prefix, label) in enumerate(parsed):
        if prefix == "O":
            out.append("O")
            continue
        prev_label = parsed[i - 1][1] if i > 0 else None
        begins = prefix == "B" or prev_label != label
        nxt = parsed[i + 1] if i + 1 < n else ("O", None)
        continues = nxt[0] == "I" and nxt[1] == label
        if begins:
            out.append(("B-" if continues else "S-") + label)
        else:
            out.append(("I-" if continues else "E-") + label)
    return out


def bioes_to_iob2(tags):
    out = []
    for tag in tags:
        prefix, label = _split_tag(tag)
        if prefix == "O":
            out.append("O")
        elif prefix in ("B", "S"):
            out.append("B-" + label)
        else:
            out.append("I-" + label)
    return out


def spans_from_bioes(tags):
    """Extract chunks from (possibly invalid) BIOES tags.

    Repair rules: an ``I``/``E`` that cannot continue the open run starts a
    new one; a run left open by ``O``, a label change, a new ``B``/``S`` or the
    end of the sentence is still emitted. Unparseable tags act like ``O``.
    """
    spans = set()
    open_label, open_start = None, None

    def close(end):
        nonlocal open_label, open_start
        if open_label is not None:
            spans.add(Span(open_label, open_start, end))
        open_label, open_start = None, None

    for i, tag in enumerate(tags):
        try:
            prefix, label = _split_tag(tag)
        except TagSchemeError:
            prefix, label = "O", None
        if prefix == "O":
            close(i - 1)
        elif prefix == "S":
            close(i - 1)
            spans.add(Span(label, i, i))
        elif prefix == "B":
            close(i - 1)
            open_label, open_start = label, i
        else:
            if open_label != label:
                close(i - 1)
                open_label, open_start = label, i
            if prefix == "E":
                close(i)
    close(len(tags) - 1)
    return spans


def bioes_from_spans(spans, length):
    """Render a set of non-overlapping spans as BIOES tags."""
    tags = ["O"] * length
    for label, start, end in spans:
        if start == end:
            tags[start] = "S-" + label
        else:
            tags[start] = "B-" + label
            for k in range(start + 1, end):
                tags[k] = "I-" + label
            tags[end] = "E-" + label
    return tags


def is_bioes(tags):
    return any(t[:2] in ("S-", "E-") for t in tags)


def as_bioes(tags):
    """Pass BIOES tags through; convert IOB tags."""
    return list(tags) if is_bioes(tags) else to_bioes(tags)


# --------------------------------------------------------------------------
# Sampling and batching
# --------------------------------------------------------------------------

def subsample(sentences, rate, seed):
    """Keep ceil(rate * N) sentences, sampled without replacement, in original order."""
    if not 0 < rate <= 1:
        raise ConfigError(f"labeling rate must be in (0, 1], got {rate}")
    n = len(sentences)
    if rate == 1:
        return list(sentences)
    k = math.ceil(rate * n)
    rng = np.random.default_rng(seed)
    keep = np.sort(rng.choice(n, size=k, replace=False))
    return [sentences[i] for i in keep]


def holdout_split(sentences, fraction, seed):
    """Split off ``fraction`` of the sentences (seeded) as a development set."""
    n = len(sentences)
    k = int(round(fraction * n))
    rng = np.random.default_rng(seed)
    held = set(rng.choice(n, size=k, replace=False).tolist())
    train = [s for i, s in enumerate(sentences) if i not in held]
    dev = [s for i, s in enumerate(sentences) if i in held]
    return train, dev


def batches(items, batch_size, rng):
    """Shuffle ``items`` with ``rng`` and yield consecutive chunks."""
    order = rng.permutation(len(items))
    for i in range(0, len(order), batch_size):
        yield [items[j] for j in order[i:i + batch_size]]


# --------------------------------------------------------------------------
# Vocabularies
# --------------------------------------------------------------------------

class Index:
    """Bidirectional string <-> id map with optional reserved entries."""

    def __init__(self, reserved=()):
        self.itos = []
        self.stoi = {}
        for tok in reserved:
            self.add(tok)
        self.n_reserved = len(self.itos)

    def add(self, tok):
        idx = self.stoi.get(tok)
        if idx is None:
            idx = len(self.itos)
            self.stoi[tok] = idx
            self.itos.append(tok)
        return idx

    def get(self, tok, default=None):
        return self.stoi.get(tok, default)

    def __getitem__(self, tok):
        return self.stoi[tok]

    def __contains__(self, tok):
        return tok in self.stoi

    def __len__(self):
        return len(self.itos)

    def __eq__(self, other):
        return isinstance(other, Index) and self.itos == other.itos

    @classmethod
    def from_list(cls, items, n_reserved=0):
        idx = cls()
        for tok in items:
            idx.add(tok)
        idx.n_reserved = n_reserved
        return idx


def new_word_index():
    return Index(reserved=(PAD, UNK))


def new_char_index():
    return Index(reserved=(PAD, UNK))


def tag_index(tag_lists):
    """Tag index with ``O`` (if present) at id 0 and the rest sorted."""
    seen = {t for tags in tag_lists for t in tags}
    ordered = (["O"] if "O" in seen else []) + sorted(seen - {"O"})
    return Index.from_list(ordered)


@dataclass
class Vocabulary:
    words: Index = field(default_factory=new_word_index)
    chars: Index = field(default_factory=new_char_index)
    tags: dict = field(default_factory=dict)

    def word_id(self, token):
        """Case-sensitive lookup, then lowercase, then UNK."""
        idx = self.words.get(token)
        if idx is None:
            idx = self.words.get(token.lower(), UNK_ID)
        return idx

    def char_id(self, ch):
        return self.chars.get(ch, UNK_ID)


def add_words(words, sentences, min_count=1, pretrained_words=None, extra=()):
    """Add training words with count >= min_count, plus pretrained words seen in any split."""
    counts = Counter(normalize_token(t) for s in sentences for t in s.tokens)
    for tok, c in counts.items():
        if c >= min_count:
            words.add(tok)
    if pretrained_words:
        seen = list(counts)
        seen += [normalize_token(t) for s in extra for t in s.tokens]
        for tok in seen:
            for form in (tok, tok.lower()):
                if form in pretrained_words:
                    words.add(form)
    return words


def add_chars(chars, sentences):
    for s in sentences:
        for tok in s.tokens:
            for ch in normalize_token(tok):
                chars.add(ch)
    return chars


def build_vocab(sentences, min_count=1, pretrained_words=None, *, extra=(), task_id="default"):
    """Build a vocabulary from training sentences.

    ``extra`` holds the other splits: their words enter only through the
    pretrained set, but their tags are registered so decoding covers them.
    Characters come from training sentences only.
    """
    vocab = Vocabulary()
    add_words(vocab.words, sentences, min_count, pretrained_words, extra)
    add_chars(vocab.chars, sentences)
    tagged = [s.tags for s in list(sentences) + list(extra) if s.tags is not None]
    if tagged:
        vocab.tags[task_id] = tag_index(tagged)
    return vocab


def encode_sentence(raw, vocab, task_id="default", truncation=17, with_tags=True):
    """Index a :class:`RawSentence` against ``vocab``."""
    if not raw.tokens:
        raise ValueError("cannot encode an empty sentence")
    norm = [normalize_token(t) for t in raw.tokens]
    char_ids = []
    for tok in norm:
        chars = truncate_chars(tok, truncation)
        char_ids.append(np.array([vocab.char_id(c) for c in chars], dtype=np.intp))
    word_ids = np.array([vocab.word_id(t) for t in norm], dtype=np.intp)
    gold = None
    if with_tags and raw.tags is not None:
        tags = vocab.tags[task_id]
        try:
            gold = np.array([tags[t] for t in raw.tags], dtype=np.intp)
        except KeyError as exc:
            raise ConfigError(f"tag {exc.args[0]!r} unknown to task {task_id!r}") from None
    return Sentence(list(raw.tokens), char_ids, word_ids, gold, task_id)
