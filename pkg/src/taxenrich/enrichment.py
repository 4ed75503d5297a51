"""Attach KB entities to the taxonomy categories they are most relevant to."""

import logging
import math
from collections import defaultdict
from dataclasses import dataclass, field

from taxenrich.concept_kb import ConceptSimilarity, similarity

log = logging.getLogger(__name__)

DEFAULT_K = 5


@dataclass(frozen=True)
class EntityAttachment:
    entity: str
    ranked: tuple[tuple[int, float], ...]


@dataclass
class EnrichedTaxonomy:
    n_categories: int
    attachments_by_entity: dict[str, EntityAttachment]
    tax: object = None
    skipped: list[str] = field(default_factory=list)
    attachments_by_category: dict[int, list[tuple[str, float]]] = field(init=False)

    def __post_init__(self):
        by_cat = defaultdict(list)
        for e in sorted(self.attachments_by_entity):
            for cid, p in self.attachments_by_entity[e].ranked:
                by_cat[cid].append((e, p))
        self.attachments_by_category = {
            cid: sorted(by_cat.get(cid, []), key=lambda ep: (-ep[1], ep[0])) for cid in range(self.n_categories)
        }


def relevance(t_vec, e_vec, simtab=None, kb=None):
    """Similarity-weighted bilinear score between a category and an entity vector."""
    if simtab is None or simtab.mode == "exact-match":
        if len(e_vec) > len(t_vec):
            t_vec, e_vec = e_vec, t_vec
        return sum(w * t_vec[c] for c, w in e_vec.items() if c in t_vec)
    total = 0.0
    for c_t, w_t in t_vec.items():
        for c_e, w_e in e_vec.items():
            s = similarity(simtab, kb, c_t, c_e)
            if s:
                total += s * w_t * w_e
    return total


def softmax(scores, temperature=1.0):
    if temperature <= 0:
        raise ValueError("temperature must be positive")
    top = max(scores)
    exps = [math.exp((s - top) / temperature) for s in scores]
    z = math.fsum(exps)
    return [x / z for x in exps]


def rank_categories(scores, k):
    """Top-``k`` category ids by descending score; ties go to the smaller id."""
    order = sorted(range(len(scores)), key=lambda i: (-scores[i], i))
    return order[:k]


def _relevance_row(e_vec, vectors, index, simtab, kb):
    n = len(vectors)
    if index is not None:
        row = [0.0] * n
        for c, w_e in e_vec.items():
            for cid, w_t in index.get(c, ()):
                row[cid] += w_t * w_e
        return row
    return [relevance(vectors[cid], e_vec, simtab, kb) for cid in range(n)]


def attach_entities(vectors, typed, simtab=None, kb=None, k=DEFAULT_K, temperature=1.0, tax=None):
    """Rank every category for every typed entity and keep the top ``k``.

    Probabilities are a softmax over all categories, computed before
    truncation. Entities with zero relevance everywhere are skipped.
    """
    if k < 1:
        raise ValueError("k must be >= 1")
    n = len(vectors)
    if sorted(vectors) != list(range(n)):
        raise ValueError("vectors must be keyed by dense category ids")
    if not any(vectors.values()):
        log.warning("every category concept vector is empty; no entity can be attached")
    simtab = simtab or ConceptSimilarity()
    index = None
    if simtab.mode == "exact-match":
        # inverted index: concept -> [(category, weight)] in id order
        index = defaultdict(list)
        for cid in range(n):
            for c, w in vectors[cid].items():
                index[c].append((cid, w))
    attached = {}
    skipped = []
    for e in sorted(typed):
        row = _relevance_row(typed[e].concepts, vectors, index, simtab, kb)
        if not any(row):
            skipped.append(e)
            continue
        probs = softmax(row, temperature)
        # rank on raw relevance so float ties in exp() cannot reorder categories
        top = rank_categories(row, k)
        attached[e] = EntityAttachment(e, tuple((cid, probs[cid]) for cid in top))
    if skipped:
        log.info("skipped %d entities with zero relevance to every category", len(skipped))
    return EnrichedTaxonomy(n, attached, tax, skipped)


def format_probability(p):
    return f"{p:.12g}"


def dump_attachments(enriched, tax, path):
    """``entity<TAB>category_path<TAB>probability<TAB>rank`` sorted by entity then rank."""
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for e in sorted(enriched.attachments_by_entity):
            for rank, (cid, p) in enumerate(enriched.attachments_by_entity[e].ranked, 1):
                fh.write(f"{e}\t{tax.path_of(cid)}\t{format_probability(p)}\t{rank}\n")


def read_attachments(path, tax):
    rows = defaultdict(list)
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            e, cat, p, rank = line.rstrip("\n").split("\t")
            rows[e].append((int(rank), tax.id_of(cat), float(p)))
    attached = {
        e: EntityAttachment(e, tuple((cid, p) for _, cid, p in sorted(r))) for e, r in sorted(rows.items())
    }
    return EnrichedTaxonomy(len(tax), attached, tax)
