import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from taxenrich.concept_kb import ConceptKB, ConceptSimilarity
from taxenrich.entity_typing import TypedEntity
from taxenrich.enrichment import (
    attach_entities,
    dump_attachments,
    rank_categories,
    read_attachments,
    relevance,
    softmax,
)
from taxenrich.taxonomy import build_taxonomy


def dense_relevance(t_vec, e_vec, sim_fn):
    """w_t^T S w_e over the union vocabulary."""
    vocab = sorted(set(t_vec) | set(e_vec))
    wt = np.array([t_vec.get(c, 0.0) for c in vocab])
    we = np.array([e_vec.get(c, 0.0) for c in vocab])
    s = np.array([[sim_fn(a, b) for b in vocab] for a in vocab])
    return float(wt @ s @ we)


def test_disjoint_is_zero():
    assert relevance({"a": 1.0}, {"b": 2.0}) == 0.0


def test_single_term():
    assert relevance({"phone": 2.0}, {"phone": 0.5}) == 1.0


def test_table_against_dense_oracle():
    rng = np.random.default_rng(3)
    concepts = ["a", "b", "c"]
    for _ in range(20):
        m = rng.uniform(0, 1, (3, 3))
        m = (m + m.T) / 2
        np.fill_diagonal(m, 1.0)
        table = {(concepts[i], concepts[j]): m[i, j] for i in range(3) for j in range(3) if i != j}
        sim = ConceptSimilarity("table", table)
        t_vec = dict(zip(concepts, rng.uniform(0.1, 5, 3)))
        e_vec = dict(zip(concepts, rng.uniform(0.01, 1, 3)))
        expected = dense_relevance(t_vec, e_vec, lambda x, y: m[concepts.index(x), concepts.index(y)])
        assert relevance(t_vec, e_vec, sim) == pytest.approx(expected, rel=1e-12)


def test_cosine_mode_uses_kb():
    kb = ConceptKB({("phone", "a"): 1, ("cell phone", "a"): 1})
    sim = ConceptSimilarity("co-occurrence-cosine")
    assert relevance({"phone": 2.0}, {"cell phone": 3.0}, sim, kb) == pytest.approx(6.0)


def test_softmax_two_values():
    p = softmax([1.0, 0.0])
    assert p[0] == pytest.approx(math.e / (math.e + 1), rel=1e-15)
    assert p[1] == pytest.approx(1 / (math.e + 1), rel=1e-15)


def test_softmax_large_values_do_not_overflow():
    p = softmax([1000.0, 999.0])
    assert p[0] == pytest.approx(math.e / (math.e + 1))


def test_softmax_temperature():
    assert softmax([2.0, 0.0], temperature=2.0)[0] == pytest.approx(softmax([1.0, 0.0])[0])
    with pytest.raises(ValueError):
        softmax([1.0], temperature=0)


def _setup(n_cats=2):
    paths = ["/R"] + [f"/R/c{i}" for i in range(1, n_cats)]
    return build_taxonomy(paths)


def test_attach_two_categories():
    tax = _setup(2)
    vectors = {0: {"x": 1.0}, 1: {}}
    typed = {"e": TypedEntity("e", {"x": 1.0})}
    out = attach_entities(vectors, typed, k=5, tax=tax)
    (c0, p0), (c1, p1) = out.attachments_by_entity["e"].ranked
    assert (c0, c1) == (0, 1)
    assert p0 == pytest.approx(0.7310585786300049, rel=1e-12)
    assert p1 == pytest.approx(0.2689414213699951, rel=1e-12)


def test_uniform_ties_use_category_order():
    tax = _setup(4)
    vectors = {i: {"x": 2.0} for i in range(4)}
    typed = {"e": TypedEntity("e", {"x": 1.0})}
    out = attach_entities(vectors, typed, k=2, tax=tax)
    assert out.attachments_by_entity["e"].ranked == ((0, 0.25), (1, 0.25))


def test_k_larger_than_categories():
    tax = _setup(3)
    vectors = {0: {"x": 1.0}, 1: {"x": 2.0}, 2: {}}
    out = attach_entities(vectors, {"e": TypedEntity("e", {"x": 1.0})}, k=10, tax=tax)
    assert [c for c, _ in out.attachments_by_entity["e"].ranked] == [1, 0, 2]


def test_zero_relevance_entities_skipped():
    tax = _setup(2)
    vectors = {0: {"x": 1.0}, 1: {}}
    typed = {"e": TypedEntity("e", {"x": 1.0}), "z": TypedEntity("z", {"q": 1.0})}
    out = attach_entities(vectors, typed, k=1, tax=tax)
    assert list(out.attachments_by_entity) == ["e"]
    assert out.skipped == ["z"]


def test_all_empty_vectors_skip_everything():
    out = attach_entities({0: {}, 1: {}}, {"e": TypedEntity("e", {"x": 1.0})}, k=1)
    assert out.attachments_by_entity == {} and out.skipped == ["e"]


def test_inversion_and_dump_roundtrip(tmp_path):
    tax = _setup(4)
    vectors = {0: {"x": 1.0}, 1: {"x": 0.5, "y": 2.0}, 2: {"y": 1.0}, 3: {}}
    typed = {"e": TypedEntity("e", {"x": 1.0}), "f": TypedEntity("f", {"y": 0.3, "x": 0.1})}
    out = attach_entities(vectors, typed, k=2, tax=tax)
    pairs_e = {(e, c, p) for e, a in out.attachments_by_entity.items() for c, p in a.ranked}
    pairs_c = {(e, c, p) for c, lst in out.attachments_by_category.items() for e, p in lst}
    assert pairs_e == pairs_c
    path = str(tmp_path / "att.tsv")
    dump_attachments(out, tax, path)
    again = read_attachments(path, tax)
    for e, a in out.attachments_by_entity.items():
        assert [c for c, _ in again.attachments_by_entity[e].ranked] == [c for c, _ in a.ranked]
        for (_, p), (_, q) in zip(a.ranked, again.attachments_by_entity[e].ranked):
            assert q == pytest.approx(p, rel=1e-11)


rel_lists = st.lists(st.floats(0, 50, allow_nan=False), min_size=1, max_size=30)


@settings(max_examples=200, deadline=None)
@given(rel_lists, st.floats(-100, 100))
def test_softmax_properties(rels, shift):
    p = softmax(rels)
    assert math.fsum(p) == pytest.approx(1.0, abs=1e-9)
    shifted = softmax([r + shift for r in rels])
    assert shifted == pytest.approx(p, rel=1e-9, abs=1e-15)
    order = rank_categories(rels, len(rels))
    assert all(p[a] >= p[b] for a, b in zip(order, order[1:]))


@settings(max_examples=100, deadline=None)
@given(st.dictionaries(st.sampled_from("abcde"), st.floats(0.01, 10), min_size=1),
       st.dictionaries(st.sampled_from("abcde"), st.floats(0.01, 1), min_size=1),
       st.floats(0.1, 10))
def test_exact_match_is_bilinear(t_vec, e_vec, lam):
    base = relevance(t_vec, e_vec)
    assert relevance({c: lam * w for c, w in t_vec.items()}, e_vec) == pytest.approx(lam * base, rel=1e-12)
    assert base == pytest.approx(dense_relevance(t_vec, e_vec, lambda a, b: float(a == b)), rel=1e-12, abs=1e-300)
