"""Tokenization, phrase normalization and greedy longest-match lookup."""

import re
from functools import lru_cache
from importlib import resources

_TOKEN_RE = re.compile(r"[^\W_]+(?:'[^\W_]+)*")
_WS_RE = re.compile(r"\s+")

STOPWORDS_VERSION = "en-1"


def tokenize(text):
    """Lower-case ``text`` and split it on anything that is not a letter or
    digit. Apostrophes are kept only between two word characters."""
    return _TOKEN_RE.findall(text.lower())


def normalize_phrase(s):
    """Canonical form shared by taxonomy labels and KB strings: lower-case,
    underscores as spaces, trimmed, single internal spaces."""
    return _WS_RE.sub(" ", s.replace("_", " ").lower()).strip()


@lru_cache(maxsize=1)
def stopwords():
    text = resources.files("taxenrich.data").joinpath("stopwords.txt").read_text("utf-8")
    return frozenset(
        w.strip() for w in text.splitlines() if w.strip() and not w.startswith("#")
    )


def content_terms(text):
    stop = stopwords()
    return [tok for tok in tokenize(text) if tok not in stop]


class Lexicon:
    """Phrase dictionary keyed by token tuples, scanned greedily left to right.

    At each position the longest phrase (up to ``max_len`` tokens) wins and the
    scan resumes after it, so matches never overlap.
    """

    def __init__(self, phrases=()):
        self.phrases = {}
        self.max_len = 0
        for phrase in phrases:
            self.add(phrase)

    def add(self, phrase):
        key = tuple(tokenize(phrase))
        if not key:
            return
        # two strings can tokenize identically ("cell-phone" / "cell phone")
        current = self.phrases.get(key)
        if current is None or phrase < current:
            self.phrases[key] = phrase
        self.max_len = max(self.max_len, len(key))

    def __len__(self):
        return len(self.phrases)

    def __contains__(self, phrase):
        return tuple(tokenize(phrase)) in self.phrases

    def __iter__(self):
        return iter(sorted(self.phrases.values()))

    def token_length(self, phrase):
        return len(tokenize(phrase))

    def scan(self, tokens, max_len=None):
        """Return ``(phrase, start, end)`` triples over ``tokens`` (token offsets, end exclusive)."""
        window = self.max_len if max_len is None else min(max_len, self.max_len)
        out = []
        i, n = 0, len(tokens)
        while i < n:
            for size in range(min(window, n - i), 0, -1):
                phrase = self.phrases.get(tuple(tokens[i:i + size]))
                if phrase is not None:
                    out.append((phrase, i, i + size))
                    i += size
                    break
            else:
                i += 1
        return out
