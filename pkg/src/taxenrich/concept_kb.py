"""isA knowledge base of concept-entity co-occurrence counts.

All concept and entity strings pass through :func:`normalize_phrase`, so
``Cellular_Phone`` and ``cellular  phone`` name the same concept.
"""

import math
from collections import defaultdict
from dataclasses import dataclass, field
from functools import cached_property

from taxenrich.errors import DataError
from taxenrich.text import Lexicon, normalize_phrase

SIMILARITY_MODES = ("exact-match", "table", "co-occurrence-cosine")


class ConceptKB:
    def __init__(self, pairs=None):
        self.pairs = {}
        for (concept, entity), count in (pairs or {}).items():
            self.add(concept, entity, count)

    def add(self, concept, entity, count):
        concept, entity = normalize_phrase(concept), normalize_phrase(entity)
        if not concept or not entity:
            raise DataError("concept and entity must be non-empty")
        if isinstance(count, bool) or not isinstance(count, int) or count < 1:
            raise DataError(f"count for ({concept!r}, {entity!r}) must be a positive integer, got {count!r}")
        key = (concept, entity)
        self.pairs[key] = self.pairs.get(key, 0) + count
        for cached in ("_index", "concept_lexicon", "_concept_norms"):
            self.__dict__.pop(cached, None)

    def __len__(self):
        return len(self.pairs)

    def __contains__(self, pair):
        return pair in self.pairs

    def count(self, concept, entity):
        return self.pairs.get((concept, entity), 0)

    @cached_property
    def _index(self):
        entities_of = defaultdict(list)
        concepts_of = defaultdict(list)
        for (c, e), n in sorted(self.pairs.items()):
            entities_of[c].append((e, n))
            concepts_of[e].append((c, n))
        concept_totals = {c: sum(n for _, n in es) for c, es in entities_of.items()}
        entity_totals = {e: sum(n for _, n in cs) for e, cs in concepts_of.items()}
        return dict(entities_of), dict(concepts_of), concept_totals, entity_totals

    @property
    def entities_of(self):
        return self._index[0]

    @property
    def concepts_of(self):
        return self._index[1]

    @property
    def concept_totals(self):
        return self._index[2]

    @property
    def entity_totals(self):
        return self._index[3]

    def concepts(self):
        return sorted(self.entities_of)

    def entities(self):
        return sorted(self.concepts_of)

    @cached_property
    def concept_lexicon(self):
        return Lexicon(self.entities_of)

    @cached_property
    def _concept_norms(self):
        return {c: math.sqrt(sum(n * n for _, n in es)) for c, es in self.entities_of.items()}

    def cooccurrence_cosine(self, c1, c2):
        es1 = self.entities_of.get(c1)
        es2 = self.entities_of.get(c2)
        if not es1 or not es2:
            return 0.0
        if c1 == c2:
            return 1.0
        if len(es2) < len(es1):
            es1, es2 = es2, es1
        counts = dict(es2)
        dot = sum(n * counts.get(e, 0) for e, n in es1)
        return min(1.0, dot / (self._concept_norms[c1] * self._concept_norms[c2]))


def load_kb(pairs_file):
    kb = ConceptKB()
    with open(pairs_file, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.rstrip("\r\n")
            if not line.strip() or line.startswith("#"):
                continue
            parts = line.split("\t")
            if len(parts) != 3:
                raise DataError("expected concept<TAB>entity<TAB>count", pairs_file, lineno)
            try:
                count = int(parts[2])
            except ValueError:
                raise DataError(f"count {parts[2]!r} is not an integer", pairs_file, lineno) from None
            try:
                kb.add(parts[0], parts[1], count)
            except DataError as exc:
                raise DataError(str(exc), pairs_file, lineno) from None
    return kb


def dump_kb(kb, path):
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for (c, e), n in sorted(kb.pairs.items()):
            fh.write(f"{c}\t{e}\t{n}\n")


@dataclass
class ConceptSimilarity:
    mode: str = "exact-match"
    table: dict[tuple[str, str], float] = field(default_factory=dict)

    def __post_init__(self):
        if self.mode not in SIMILARITY_MODES:
            raise ValueError(f"unknown similarity mode {self.mode!r}; expected one of {SIMILARITY_MODES}")
        table = {}
        for (a, b), score in self.table.items():
            a, b = normalize_phrase(a), normalize_phrase(b)
            if not 0.0 <= score <= 1.0:
                raise DataError(f"similarity of ({a!r}, {b!r}) outside [0, 1]: {score}")
            table[(a, b)] = table[(b, a)] = float(score)
        self.table = table


def load_similarity(path, mode="table"):
    table = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.rstrip("\r\n")
            if not line.strip() or line.startswith("#"):
                continue
            parts = line.split("\t")
            if len(parts) != 3:
                raise DataError("expected concept<TAB>concept<TAB>score", path, lineno)
            try:
                score = float(parts[2])
            except ValueError:
                raise DataError(f"score {parts[2]!r} is not a number", path, lineno) from None
            if not 0.0 <= score <= 1.0:
                raise DataError(f"score {score} outside [0, 1]", path, lineno)
            table[(parts[0], parts[1])] = score
    return ConceptSimilarity(mode, table)


def similarity(simtab, kb, c1, c2):
    if simtab.mode == "exact-match":
        return 1.0 if c1 == c2 else 0.0
    if simtab.mode == "table":
        if c1 == c2:
            return 1.0
        return simtab.table.get((c1, c2), 0.0)
    return kb.cooccurrence_cosine(c1, c2)


def build_entity_lexicon(kb, min_total=1):
    """Lexicon of entities whose total count across concepts is at least ``min_total``.

    ``lexicon.max_len`` is the longest entity in tokens.
    """
    if min_total < 1:
        raise ValueError("min_total must be >= 1")
    return Lexicon(e for e, total in sorted(kb.entity_totals.items()) if total >= min_total)
