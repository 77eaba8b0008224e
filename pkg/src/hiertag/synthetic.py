"""Small generated corpora with planted, learnable tagging rules.

Every generator is deterministic given its seed. The rules:

* person names come from a fixed list and are tagged ``PER`` by identity;
* organisations are a name from a fixed list followed by ``corp`` (two-token
  ``ORG`` chunk);
* any word ending in the location suffix is a ``LOC``; location stems are
  random, so held-out locations can only be recognized from their spelling.

Persons and locations appear in the same sentence frames, so context alone
cannot tell a held-out location from an unknown name.
"""

import numpy as np

from .data import RawSentence

CONSONANTS = "bcdfgklmnprstvz"
VOWELS = "aeiou"

FRAMES = [
    ["{e}", "went", "to", "the", "market"],
    ["we", "saw", "{e}", "yesterday"],
    ["the", "report", "about", "{e}", "was", "long"],
    ["{e}", "and", "{f}", "signed", "it"],
    ["they", "met", "{e}", "in", "march"],
    ["a", "letter", "from", "{e}", "arrived"],
]

LANGUAGES = {
    # filler words, person names, org names, location suffix
    "en": (None, ["anna", "bob", "carl", "dina", "ed", "fay", "gus", "hal"],
           ["acme", "globex", "initech", "umbra"], "ville"),
    "xx": ({"went": "fui", "to": "ta", "the": "le", "market": "mercat", "we": "nos",
            "saw": "vimos", "yesterday": "aier", "report": "raport", "about": "sobre",
            "was": "era", "long": "lung", "and": "y", "signed": "firmo", "it": "lo",
            "they": "ellos", "met": "conocio", "in": "en", "march": "marzo", "a": "una",
            "letter": "carta", "from": "de", "arrived": "llego"},
           ["juan", "lucia", "pedro", "rosa", "tomas", "ines", "raul", "eva"],
           ["telco", "banco", "aceros", "vinos"], "ville"),
}


def stem(rng, syllables=2):
    return "".join(rng.choice(list(CONSONANTS)) + rng.choice(list(VOWELS))
                   for _ in range(syllables))


def location_words(n, seed, suffix="ville"):
    """``n`` distinct random location words ending in ``suffix``."""
    rng = np.random.default_rng(seed)
    words = []
    seen = set()
    while len(words) < n:
        w = stem(rng, int(rng.integers(1, 3))) + suffix
        if w not in seen:
            seen.add(w)
            words.append(w)
    return words


def _entity(rng, people, orgs, places):
    kind = rng.choice(["PER", "ORG", "LOC"])
    if kind == "PER":
        return [people[rng.integers(len(people))]], ["B-PER"]
    if kind == "ORG":
        return [orgs[rng.integers(len(orgs))], "corp"], ["B-ORG", "I-ORG"]
    return [places[rng.integers(len(places))]], ["B-LOC"]


def make_corpus(n, seed, places, language="en"):
    """``n`` IOB2-tagged sentences drawing locations from ``places``."""
    lexicon, people, orgs, _ = LANGUAGES[language]
    rng = np.random.default_rng(seed)
    out = []
    for _ in range(n):
        frame = FRAMES[rng.integers(len(FRAMES))]
        tokens, tags = [], []
        for slot in frame:
            if slot in ("{e}", "{f}"):
                toks, tgs = _entity(rng, people, orgs, places)
                tokens += toks
                tags += tgs
            else:
                tokens.append(lexicon.get(slot, slot) if lexicon else slot)
                tags.append("O")
        out.append(RawSentence(tokens, tags))
    return out


def suffix_task(n_train=50, n_test=30, seed=0, language="en", n_places=40):
    """Train and held-out splits; the test split uses unseen location words."""
    suffix = LANGUAGES[language][3]
    places = location_words(2 * n_places, seed + 1000, suffix)
    seen, unseen = places[:n_places], places[n_places:]
    train = make_corpus(n_train, seed, seen, language)
    test = make_corpus(n_test, seed + 1, unseen, language)
    return train, test
