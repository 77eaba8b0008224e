"""Gazetteer membership features appended to the CRF input."""

from dataclasses import dataclass, field

import numpy as np


class GazetteerFormatError(ValueError):
    pass


@dataclass
class Gazetteer:
    categories: list = field(default_factory=list)
    phrases: dict = field(default_factory=dict)  # category -> set of token tuples

    @property
    def width(self):
        return len(self.categories)

    def add(self, category, tokens):
        tokens = tuple(t.lower() for t in tokens)
        if not tokens:
            raise GazetteerFormatError(f"empty phrase for category {category!r}")
        if category not in self.phrases:
            self.categories.append(category)
            self.phrases[category] = set()
        self.phrases[category].add(tokens)

    def max_len(self, category):
        return max((len(p) for p in self.phrases[category]), default=0)

    def to_lines(self):
        """Canonical ``CATEGORY tok ...`` lines (categories in order, phrases sorted)."""
        return [" ".join((c,) + p) for c in self.categories for p in sorted(self.phrases[c])]


def parse_gazetteer(text):
    gaz = Gazetteer()
    for lineno, line in enumerate(text.splitlines(), start=1):
        if not line.strip():
            continue
        if line[0].isspace():
            raise GazetteerFormatError(f"line {lineno}: blank category")
        parts = line.split()
        if len(parts) < 2:
            raise GazetteerFormatError(f"line {lineno}: category without a phrase")
        gaz.add(parts[0], parts[1:])
    return gaz


def load_gazetteer(path, encoding="utf-8"):
    with open(path, encoding=encoding) as fh:
        return parse_gazetteer(fh.read())


def features(tokens, gaz):
    """T x C indicator matrix of tokens covered by a category match.

    Matching is case-insensitive on whole tokens. Scanning left to right, the
    longest phrase starting at a position wins and the scan resumes after it;
    each category is matched independently.
    """
    T = len(tokens)
    out = np.zeros((T, gaz.width))
    lowered = tuple(t.lower() for t in tokens)
    for c, cat in enumerate(gaz.categories):
        phrases = gaz.phrases[cat]
        longest = gaz.max_len(cat)
        t = 0
        while t < T:
            matched = 0
            for n in range(min(longest, T - t), 0, -1):
                if lowered[t:t + n] in phrases:
                    matched = n
                    break
            if matched:
                out[t:t + matched, c] = 1.0
                t += matched
            else:
                t += 1
    return out
