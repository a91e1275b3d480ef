import math

import pytest
from hypothesis import given, settings

from dgassoc import gbf
from dgassoc.corpus import AnnotatedDocument
from dgassoc.store import MAX_PATH_LENGTH, TripleStore
from helpers import close, corpora, hsp27_document, gbf_oracle, random_corpus


def _edges(*triples):
    store = TripleStore()
    for i, t in enumerate(triples):
        store.add_interactions([t], f"d{i}")
    return store


def test_isolated_gene():
    store = TripleStore.build([AnnotatedDocument("d", ("D",), ("A",))])
    assert gbf.signature_features(store, "A") == []
    c = gbf.connectivity(store, "A")
    assert (c.out_1, c.out_2, c.in_1, c.in_2, c.out_all, c.in_all) == (0.0,) * 6
    assert c.io_ratio is None


def test_hsp27_signatures():
    store = TripleStore.build([hsp27_document()])
    assert {f.signature for f in gbf.signature_features(store, "HSP27")} == {"Reg3", "Reg4"}
    assert {f.signature for f in gbf.signature_features(store, "ActD")} == {"Reg"}
    assert gbf.signature_features(store, "caspase3") == []


def test_io_ratio_values():
    store = _edges(("A", "Reg", "B"), ("A", "Reg", "C"), ("C", "Reg", "A"), ("D", "Binding", "E"),
                   ("E", "Binding", "D"))
    assert gbf.io_ratio(store, "A") == 2.0
    assert gbf.io_ratio(store, "D") == 1.0
    assert gbf.io_ratio(store, "B") == 0.0


def test_max_out_degree_is_one():
    store = _edges(("A", "Reg", "B"), ("A", "Reg", "C"), ("C", "Binding", "B"))
    assert gbf.connectivity(store, "A").out_1 == 1.0
    assert gbf.connectivity(store, "C").out_1 == 0.5


def test_empty_graph():
    c = gbf.connectivity(TripleStore(), "A")
    assert c.out_all == 0.0 and c.io_ratio is None


def test_idf_target():
    store = _edges(("A", "Reg", "C"), ("B", "Reg", "C"), ("A", "Reg", "B"))
    assert gbf.idf_target(store, "C") == pytest.approx(math.log(3 / 2))
    assert gbf.idf_target(store, "A") == 0.0


@pytest.mark.parametrize("seed", range(20))
def test_matches_oracle(seed):
    docs = random_corpus(seed, n_docs=8)
    store = TripleStore.build(docs)
    oracle = gbf_oracle(docs)
    assert sorted(oracle) == store.genes()
    for g, want in oracle.items():
        raw = gbf.raw_signature_values(store, g)
        assert raw.keys() == want["raw"].keys()
        assert all(close(raw[s], want["raw"][s]) for s in raw)
        scaled = gbf.signature_map(store, g)
        assert scaled.keys() == want["scaled"].keys()
        assert all(close(scaled[s], want["scaled"][s]) for s in scaled)
        c = gbf.connectivity(store, g)
        for name in ("out_1", "out_2", "in_1", "in_2", "out_all", "in_all"):
            assert close(getattr(c, name), want[name])
        if want["io_ratio"] is None:
            assert c.io_ratio is None
        else:
            assert close(c.io_ratio, want["io_ratio"])


@settings(max_examples=60, deadline=None)
@given(corpora())
def test_handshake_and_ranges(docs):
    store = TripleStore.build(docs)
    n_edges = sum(t.count for t in store.interaction_edges())
    total_out = total_in = 0
    for length in range(1, MAX_PATH_LENGTH + 1):
        outs = sum(c for g in store.genes() for _, _, c in store.out_edges(g, length))
        ins = sum(c for g in store.genes() for _, _, c in store.in_edges(g, length))
        assert outs == ins
        total_out, total_in = total_out + outs, total_in + ins
    assert total_out + total_in == 2 * n_edges
    for g in store.genes():
        c = gbf.connectivity(store, g)
        assert all(0.0 <= v <= 1.0 for v in (c.out_1, c.out_2, c.in_1, c.in_2, c.out_all, c.in_all))
        assert (c.io_ratio is None) == (not any(store.in_edges(g, l) for l in (1, 2)))
        assert all(0.0 <= f.value <= 1.0 for f in gbf.signature_features(store, g))


def test_independent_of_diseases():
    docs = random_corpus(5, n_docs=10)
    with_d = TripleStore.build(docs)
    without = TripleStore.build([AnnotatedDocument(d.doc_id, (), d.genes, d.events) for d in docs])
    assert without.interaction_genes()
    for g in with_d.genes():
        assert gbf.connectivity(with_d, g) == gbf.connectivity(without, g)
        assert gbf.signature_map(with_d, g) == gbf.signature_map(without, g)
        assert gbf.raw_signature_values(with_d, g) == gbf.raw_signature_values(without, g)


def test_unrelated_edge_leaves_raw_values():
    base = [("A", "Reg", "B"), ("B", "Binding", "C"), ("C", "Reg", "A"), ("X", "Reg", "Y")]
    before = _edges(*base)
    after = _edges(*base, ("X", "Localization", "Y"))
    for g in ("A", "B", "C"):
        assert gbf.raw_signature_values(before, g) == gbf.raw_signature_values(after, g)
