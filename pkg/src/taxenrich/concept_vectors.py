"""Concept vectors for taxonomy categories.

A concept vector is a plain ``dict`` mapping concept string to a positive
weight, with keys in sorted order. Category weights combine taxonomy-side and
KB-side tf-idf scores; :func:`enrich_vectors` then folds child vectors into
their parents bottom-up.
"""

import math
from collections import Counter
from dataclasses import dataclass, field

from taxenrich.text import tokenize

DEFAULT_MAX_LEN = 4


def make_vector(weights):
    """Drop non-positive entries and fix the key order."""
    out = {}
    for c in sorted(weights):
        w = weights[c]
        if not math.isfinite(w):
            raise ValueError(f"non-finite weight for concept {c!r}: {w}")
        if w > 0:
            out[c] = w
    return out


def scale(vec, factor):
    return make_vector({c: factor * w for c, w in vec.items()})


def segment_concepts(text, kb, max_len=DEFAULT_MAX_LEN):
    """KB concepts found in ``text`` by greedy longest match, with multiplicity."""
    if max_len < 1:
        raise ValueError("max_len must be >= 1")
    return [phrase for phrase, _, _ in kb.concept_lexicon.scan(tokenize(text), max_len)]


@dataclass
class ConceptStats:
    tf: dict[int, Counter] = field(default_factory=dict)
    df_odp: Counter = field(default_factory=Counter)
    df_pro: dict[str, int] = field(default_factory=dict)
    n_docs: int = 0


def collect_stats(tax, kb, max_len=DEFAULT_MAX_LEN):
    stats = ConceptStats()
    for cat in tax.categories:
        tf = Counter()
        for doc in tax.docs_by_category[cat.id]:
            found = segment_concepts(doc.text, kb, max_len)
            tf.update(found)
            stats.df_odp.update(set(found))
            stats.n_docs += 1
        stats.tf[cat.id] = tf
    # the KB has no documents; a concept's entity count stands in for its df
    stats.df_pro = {c: len(kb.entities_of[c]) for c in sorted(stats.df_odp)}
    return stats


def concept_weight(tf, df_odp, df_pro):
    """tf-idf product weight from both sources; 0 unless both tf-idf scores exceed 1.

    Each source score is ``tf / ln(1 + df)``; the weight is
    ``s_odp * ln(s_odp) * s_pro * ln(s_pro)``.
    """
    if tf < 1:
        raise ValueError("tf must be >= 1")
    if df_odp < 1 or df_pro < 1:
        raise ValueError("document frequencies must be >= 1")
    cw_odp = tf / math.log1p(df_odp)
    cw_pro = tf / math.log1p(df_pro)
    if cw_odp <= 1.0 or cw_pro <= 1.0:
        return 0.0
    return cw_odp * math.log(cw_odp) * cw_pro * math.log(cw_pro)


def category_concept_weight(stats, t, c):
    return concept_weight(stats.tf[t][c], stats.df_odp[c], stats.df_pro[c])


def base_vectors(stats, tax):
    return {
        cat.id: make_vector({c: category_concept_weight(stats, cat.id, c) for c in stats.tf.get(cat.id, ())})
        for cat in tax.categories
    }


def merge_down(own, tax, alpha):
    """Blend every internal node with the mean of its children's merged vectors.

    ``merged(t) = alpha * own(t) + (1 - alpha) * mean(merged(child))`` for
    internal nodes; leaves keep their own vector. Works for any sparse
    ``dict`` values, so centroids reuse it.
    """
    if not 0.0 <= alpha <= 1.0:
        raise ValueError("alpha must lie in [0, 1]")
    merged = {}
    for cid in tax.bottom_up():
        children = tax.categories[cid].children
        if not children:
            merged[cid] = dict(own[cid])
            continue
        acc = Counter()
        for w_c, w in own[cid].items():
            acc[w_c] += alpha * w
        share = (1.0 - alpha) / len(children)
        for ch in children:
            for w_c, w in merged[ch].items():
                acc[w_c] += share * w
        merged[cid] = acc
    return {cid: make_vector(merged[cid]) for cid in range(len(tax))}


def enrich_vectors(base, tax, alpha):
    return merge_down(base, tax, alpha)


def dump_vectors(vectors, tax, path):
    """Write ``path<TAB>concept<TAB>weight`` rows sorted by path, then by descending weight."""
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for cid in sorted(vectors, key=tax.path_of):
            for c, w in sorted(vectors[cid].items(), key=lambda kv: (-kv[1], kv[0])):
                fh.write(f"{tax.path_of(cid)}\t{c}\t{w!r}\n")


def read_vectors(path, tax):
    vectors = {cid: {} for cid in range(len(tax))}
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            p, c, w = line.rstrip("\n").split("\t")
            vectors[tax.id_of(p)][c] = float(w)
    return {cid: make_vector(v) for cid, v in vectors.items()}
