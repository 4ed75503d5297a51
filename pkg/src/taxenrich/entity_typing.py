"""Typicality-weighted concept vectors for KB entities."""

from dataclasses import dataclass

from taxenrich.concept_vectors import make_vector

DEFAULT_BETA = 0.004


@dataclass(frozen=True)
class TypedEntity:
    entity: str
    concepts: dict[str, float]


def p_entity_given_concept(kb, c, e):
    return kb.pairs[(c, e)] / kb.concept_totals[c]


def p_concept_given_entity(kb, c, e):
    return kb.pairs[(c, e)] / kb.entity_totals[e]


def typicality(kb, c, e):
    """``P(e|c) * P(c|e)``: high for concepts that are neither too general nor too specific."""
    if (c, e) not in kb.pairs:
        raise KeyError(f"pair ({c!r}, {e!r}) not in knowledge base")
    n = kb.pairs[(c, e)]
    return (n / kb.concept_totals[c]) * (n / kb.entity_totals[e])


def type_entities(kb, beta=DEFAULT_BETA):
    """Map each entity to the concepts whose typicality strictly exceeds ``beta``.

    Entities left without any concept are omitted.
    """
    if beta < 0:
        raise ValueError("beta must be >= 0")
    typed = {}
    for e, concepts in sorted(kb.concepts_of.items()):
        scores = {c: typicality(kb, c, e) for c, _ in concepts}
        kept = make_vector({c: s for c, s in scores.items() if s > beta})
        if kept:
            typed[e] = TypedEntity(e, kept)
    return typed


def dump_typed(typed, path):
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for e in sorted(typed):
            for c, w in sorted(typed[e].concepts.items(), key=lambda kv: (-kv[1], kv[0])):
                fh.write(f"{e}\t{c}\t{w!r}\n")


def read_typed(path):
    rows = {}
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            e, c, w = line.rstrip("\n").split("\t")
            rows.setdefault(e, {})[c] = float(w)
    return {e: TypedEntity(e, make_vector(v)) for e, v in sorted(rows.items())}
