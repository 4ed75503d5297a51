import math

import pytest
from hypothesis import given, settings, strategies as st

from taxenrich.concept_kb import ConceptKB
from taxenrich.concept_vectors import (
    base_vectors,
    category_concept_weight,
    collect_stats,
    concept_weight,
    dump_vectors,
    enrich_vectors,
    read_vectors,
    scale,
    segment_concepts,
)
from taxenrich.taxonomy import build_taxonomy
from taxenrich.text import tokenize

# reference values evaluated with mpmath at 30 digits
W_2_1_1 = 9.34850649218839112
W_2_1_3 = 1.61672050020440033
W_4_1_1 = 102.314549902990288
W_5_2_7 = 14.5492461473218471

KB = ConceptKB({("cellular phone", "x"): 1, ("phone", "y"): 1, ("phone", "z"): 1})


def test_tokenize():
    assert tokenize("Don't STOP-me, it's 4G_LTE!") == ["don't", "stop", "me", "it's", "4g", "lte"]
    assert tokenize("'quoted' rock'n'roll") == ["quoted", "rock'n'roll"]


def test_longest_match_wins():
    assert segment_concepts("I bought a cellular phone", KB) == ["cellular phone"]


def test_no_concept():
    assert segment_concepts("nothing to see here", KB) == []


def test_multiplicity():
    assert segment_concepts("phone phone", KB) == ["phone", "phone"]


def test_window_limits_match_length():
    assert segment_concepts("cellular phone", KB, max_len=1) == ["phone"]
    with pytest.raises(ValueError):
        segment_concepts("phone", KB, max_len=0)


def test_collect_stats_hand_count():
    kb = ConceptKB({("phone", "a"): 1, ("phone", "b"): 2, ("phone", "c"): 1, ("planet", "mars"): 1})
    tax = build_taxonomy(["/A"], [("d", "/A", "phone phone")])
    stats = collect_stats(tax, kb)
    assert stats.tf[0]["phone"] == 2
    assert stats.df_odp["phone"] == 1
    assert stats.df_pro["phone"] == 3
    assert "planet" not in stats.tf[0] and "planet" not in stats.df_odp


def test_collect_stats_two_docs():
    tax = build_taxonomy(["/A"], [("d1", "/A", "a phone"), ("d2", "/A", "phone b")])
    stats = collect_stats(tax, KB)
    assert stats.tf[0]["phone"] == 2
    assert stats.df_odp["phone"] == 2


def test_weight_reference_values():
    assert concept_weight(2, 1, 1) == pytest.approx(W_2_1_1, rel=1e-12)
    assert concept_weight(2, 1, 3) == pytest.approx(W_2_1_3, rel=1e-12)
    assert concept_weight(4, 1, 1) == pytest.approx(W_4_1_1, rel=1e-12)
    assert concept_weight(5, 2, 7) == pytest.approx(W_5_2_7, rel=1e-12)


def test_weight_clamped_at_knee():
    assert concept_weight(1, 50, 1) == 0.0
    assert concept_weight(1, 1, 1) == pytest.approx((1 / math.log(2) * math.log(1 / math.log(2))) ** 2)
    # taxonomy side below the knee, KB side above it
    assert concept_weight(3, 100, 1) == 0.0


def test_weight_monotone_in_tf():
    for df_odp in (1, 2, 5, 20):
        for df_pro in (1, 3, 10):
            for tf in range(1, 40):
                w1, w2 = concept_weight(tf, df_odp, df_pro), concept_weight(2 * tf, df_odp, df_pro)
                if w1 > 0:
                    assert w2 > w1
                assert math.isfinite(w1)


def test_base_vectors_fixture():
    kb = ConceptKB({("phone", "a"): 1})
    tax = build_taxonomy(["/A", "/A/B"], [("d", "/A", "phone phone")])
    stats = collect_stats(tax, kb)
    vecs = base_vectors(stats, tax)
    assert vecs[0] == {"phone": pytest.approx(W_2_1_1, rel=1e-12)}
    assert vecs[1] == {}
    assert category_concept_weight(stats, 0, "phone") == vecs[0]["phone"]


def test_base_vectors_independent_across_categories():
    kb = ConceptKB({("phone", "a"): 1, ("planet", "b"): 1})
    docs = [("d1", "/A/B", "phone phone phone"), ("d2", "/A/C", "planet planet planet")]
    tax = build_taxonomy(["/A", "/A/B", "/A/C"], docs)
    full = base_vectors(collect_stats(tax, kb), tax)
    tax2 = build_taxonomy(["/A", "/A/B", "/A/C"], docs[:1])
    partial = base_vectors(collect_stats(tax2, kb), tax2)
    # no concept is shared, so df_odp is unchanged for /A/B
    assert partial[1] == full[1]
    assert partial[2] == {}


def test_enrich_alpha_one_is_identity():
    tax = build_taxonomy(["/A", "/A/B", "/A/C"])
    base = {0: {"x": 2.0}, 1: {"y": 1.0}, 2: {}}
    assert enrich_vectors(base, tax, 1.0) == base


def test_enrich_chain():
    tax = build_taxonomy(["/A", "/A/B"])
    out = enrich_vectors({0: {}, 1: {"phone": 1.0}}, tax, 0.7)
    assert out[0] == {"phone": pytest.approx(0.3, rel=1e-15)}
    assert out[1] == {"phone": 1.0}


def test_enrich_two_children():
    tax = build_taxonomy(["/A", "/A/B", "/A/C"])
    out = enrich_vectors({0: {}, 1: {"x": 1.0}, 2: {"x": 3.0}}, tax, 0.5)
    assert out[0] == {"x": 1.0}


def test_enrich_rejects_bad_alpha():
    tax = build_taxonomy(["/A"])
    with pytest.raises(ValueError):
        enrich_vectors({0: {}}, tax, 1.5)


def test_dump_roundtrip(tmp_path):
    tax = build_taxonomy(["/A", "/A/B"])
    vecs = {0: {"a": 1.5, "b": 3.25}, 1: {"c": 0.1}}
    path = str(tmp_path / "v.tsv")
    dump_vectors(vecs, tax, path)
    lines = open(path).read().splitlines()
    assert lines == ["/A\tb\t3.25", "/A\ta\t1.5", "/A/B\tc\t0.1"]
    assert read_vectors(path, tax) == vecs


@st.composite
def trees_with_vectors(draw):
    n = draw(st.integers(1, 30))
    paths = ["/r"]
    for i in range(1, n):
        paths.append(f"{paths[draw(st.integers(0, i - 1))]}/n{i}")
    tax = build_taxonomy(paths)
    concepts = st.sampled_from("abcdefg")
    weights = st.floats(0.01, 100, allow_nan=False)
    base = {i: dict(sorted(draw(st.dictionaries(concepts, weights, max_size=4)).items())) for i in range(n)}
    return tax, base


@settings(max_examples=100, deadline=None)
@given(trees_with_vectors(), st.floats(0.0, 1.0), st.floats(0.1, 10.0))
def test_enrich_properties(tree, alpha, lam):
    tax, base = tree
    out = enrich_vectors(base, tax, alpha)
    for cid in range(len(tax)):
        assert all(w > 0 and math.isfinite(w) for w in out[cid].values())
        kids = set().union(*(out[ch].keys() for ch in tax[cid].children)) if tax[cid].children else set()
        assert set(out[cid]) <= set(base[cid]) | kids
        if alpha > 0:
            assert set(base[cid]) <= set(out[cid])
    scaled = enrich_vectors({c: scale(v, lam) for c, v in base.items()}, tax, alpha)
    for cid in range(len(tax)):
        assert scaled[cid].keys() == out[cid].keys()
        for c, w in out[cid].items():
            assert scaled[cid][c] == pytest.approx(lam * w, rel=1e-12)


words = st.sampled_from(["phone", "cellular", "smart", "x", "planet", "red"])


@settings(max_examples=200, deadline=None)
@given(st.lists(words, max_size=12))
def test_segmentation_spans_are_greedy_and_disjoint(toks):
    kb = ConceptKB({("cellular phone", "e"): 1, ("phone", "e"): 1, ("smart phone", "e"): 1,
                    ("red planet", "e"): 1, ("planet", "e"): 1, ("cellular phone x", "e"): 1})
    spans = kb.concept_lexicon.scan(toks, 4)
    end = 0
    for phrase, s, t in spans:
        assert s >= end
        assert tuple(toks[s:t]) == tuple(phrase.split())
        # nothing longer was available at this position
        for size in range(t - s + 1, 5):
            assert " ".join(toks[s:s + size]) not in kb.entities_of or s + size > len(toks)
        # no match was skipped between the previous span and this one
        for i in range(end, s):
            for size in range(1, 5):
                assert " ".join(toks[i:i + size]) not in kb.entities_of or i + size > len(toks)
        end = t
