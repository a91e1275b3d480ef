"""Shared fixtures for the test suite: small corpora and brute-force oracles.

The oracles recount everything directly from the documents and never look at
store indexes, so they are independent of the implementation under test.
"""

from __future__ import annotations

import math
from fractions import Fraction
from itertools import groupby

import numpy as np
from hypothesis import strategies as st

from dgassoc.corpus import EVENT_TYPES, AnnotatedDocument, Argument, Event
from dgassoc.postprocess import extract_triples

HSP27_DISEASE = "MESH:D011658"


def hsp27_document(doc_id: str = "d1") -> AnnotatedDocument:
    """HSP27 down-regulation enhances ActD-induced caspase3 activation."""
    return AnnotatedDocument(
        doc_id=doc_id,
        diseases=(HSP27_DISEASE,),
        genes=("HSP27", "ActD", "caspase3"),
        events=(
            Event("E1", "Negative_regulation", (Argument("gene", "HSP27"),)),
            Event("E2", "Positive_regulation", (Argument("event", "E3"),), (Argument("event", "E1"),)),
            Event("E3", "Positive_regulation", (Argument("gene", "caspase3"),), (Argument("gene", "ActD"),)),
        ),
    )


# -- random corpora ---------------------------------------------------------

def random_document(rng: np.random.Generator, doc_id: str, n_diseases: int = 4, n_genes: int = 8,
                    max_events: int = 5) -> AnnotatedDocument:
    """Random valid document; events only reference earlier events, so nests are acyclic."""
    diseases = sorted(f"D{i}" for i in rng.choice(n_diseases, size=rng.integers(1, 4), replace=False))
    genes = sorted(f"G{i}" for i in rng.choice(n_genes, size=rng.integers(1, 6), replace=False))
    events: list[Event] = []
    for i in range(int(rng.integers(0, max_events + 1))):
        pool = [Argument("gene", g) for g in genes] + [Argument("event", e.event_id) for e in events]
        k = int(rng.integers(1, min(3, len(pool)) + 1))
        picked = [pool[j] for j in rng.choice(len(pool), size=k, replace=False)]
        n_theme = int(rng.integers(1, k + 1))
        etype = EVENT_TYPES[int(rng.integers(len(EVENT_TYPES)))]
        events.append(Event(f"E{i + 1}", etype, tuple(picked[:n_theme]), tuple(picked[n_theme:])))
    return AnnotatedDocument(doc_id, tuple(diseases), tuple(genes), tuple(events))


def random_corpus(seed: int, n_docs: int | None = None, **kw) -> list[AnnotatedDocument]:
    rng = np.random.default_rng(seed)
    n = int(rng.integers(1, 12)) if n_docs is None else n_docs
    return [random_document(rng, f"doc{k}", **kw) for k in range(n)]


@st.composite
def documents(draw, doc_id: str = "doc", n_diseases: int = 4, n_genes: int = 7, max_events: int = 5):
    diseases = draw(st.lists(st.sampled_from([f"D{i}" for i in range(n_diseases)]), min_size=1, max_size=3,
                             unique=True))
    genes = draw(st.lists(st.sampled_from([f"G{i}" for i in range(n_genes)]), min_size=1, max_size=5,
                          unique=True))
    events: list[Event] = []
    for i in range(draw(st.integers(0, max_events))):
        pool = [Argument("gene", g) for g in genes] + [Argument("event", e.event_id) for e in events]
        args = draw(st.lists(st.sampled_from(pool), min_size=1, max_size=3, unique=True))
        n_theme = draw(st.integers(1, len(args)))
        etype = draw(st.sampled_from(EVENT_TYPES))
        events.append(Event(f"E{i + 1}", etype, tuple(args[:n_theme]), tuple(args[n_theme:])))
    return AnnotatedDocument(doc_id, tuple(diseases), tuple(genes), tuple(events))


@st.composite
def corpora(draw, min_docs: int = 1, max_docs: int = 6):
    n = draw(st.integers(min_docs, max_docs))
    return [draw(documents(doc_id=f"doc{k}")) for k in range(n)]


# -- co-occurrence oracles --------------------------------------------------

def cooc_counts(docs) -> dict[tuple[str, str], int]:
    counts: dict[tuple[str, str], int] = {}
    for doc in docs:
        for d in set(doc.diseases):
            for g in set(doc.genes):
                counts[d, g] = counts.get((d, g), 0) + 1
    return counts


def cbf_oracle(docs, d: str, g: str, correction: float = 0.5) -> dict[str, float]:
    """Every co-occurrence feature of (d, g), recounted by summation over documents."""
    counts = cooc_counts(docs)
    diseases = sorted({dd for dd, _ in counts})
    genes = sorted({gg for _, gg in counts})
    t_d = {x: sum(c for (dd, _), c in counts.items() if dd == x) for x in diseases}
    t_g = {x: sum(c for (_, gg), c in counts.items() if gg == x) for x in genes}
    total = sum(counts.values())
    tdg = counts.get((d, g), 0)
    td, tg = t_d.get(d, 0), t_g.get(g, 0)
    max_td = max(t_d.values(), default=0)
    max_tg = max(t_g.values(), default=0)
    max_tdg = max(counts.values(), default=0)

    def entropy(cells, n):
        return -sum((c / n) * math.log2(c / n) for c in cells if c) if n else 0.0

    h_g = entropy([counts.get((x, g), 0) for x in diseases], tg)
    h_d = entropy([counts.get((d, x), 0) for x in genes], td)
    if tdg:
        num = Fraction(tdg * (total - tdg))
        den = (abs(Fraction(tdg - td)) + Fraction(correction)) * (abs(Fraction(tdg - tg)) + Fraction(correction))
        odds = float(num / den)
        df = sum(1 for x in diseases if counts.get((x, g), 0) > 0)
        tfidf = tdg * math.log(len(diseases) / df)
    else:
        odds = tfidf = 0.0
    return {
        "h_g": h_g, "h_d": h_d,
        "occ_v1": tdg / max_td if max_td else 0.0,
        "occ_v2": tdg / max_tg if max_tg else 0.0,
        "occ_v3": tdg / max_tdg if max_tdg else 0.0,
        "grade_d": td / max_td if max_td else 0.0,
        "grade_g": tg / max_tg if max_tg else 0.0,
        "odds": odds, "tfidf": tfidf,
        "t_d": td, "t_g": tg, "t_dg": tdg, "total": total,
    }


# -- interaction-graph oracles ----------------------------------------------

def run_length(signature: str) -> str:
    """Independent run-length encoder over fully expanded tokens."""
    tokens = []
    for tok in signature.split(":"):
        name = tok.rstrip("0123456789")
        tokens += [name] * int(tok[len(name):] or 1)
    out = []
    for name, grp in groupby(tokens):
        n = len(list(grp))
        out.append(name if n == 1 else f"{name}{n}")
    return ":".join(out)


def interaction_edges(docs) -> dict[tuple[str, str, str, int], set[str]]:
    """Direct edges per document plus corpus-wide two-edge joins."""
    edges: dict[tuple[str, str, str, int], set[str]] = {}
    for doc in docs:
        for a, s, b in set(extract_triples(doc)):
            edges.setdefault((a, s, b, 1), set()).add(doc.doc_id)
    direct = [(k, v) for k, v in edges.items() if k[3] == 1]
    joined: dict[tuple[str, str, str, int], set[str]] = {}
    for (a, s1, b, _), docs1 in direct:
        for (b2, s2, c, _), docs2 in direct:
            if b2 == b and c != a:
                joined.setdefault((a, run_length(f"{s1}:{s2}"), c, 2), set()).update(docs1 | docs2)
    edges.update(joined)
    return edges


def gbf_oracle(docs) -> dict[str, dict]:
    """Per gene: raw and min-max scaled signature values, connectivity and io ratio."""
    edges = {k: len(v) for k, v in interaction_edges(docs).items()}
    graph_genes = sorted({k[0] for k in edges} | {k[2] for k in edges})
    genes = sorted({g for _, g in cooc_counts(docs)} | set(graph_genes))
    n_genes = len(graph_genes)
    sources = {g: {a for (a, _, b, _) in edges if b == g} for g in genes}
    idf = {g: math.log(n_genes / len(sources[g])) if sources[g] else 0.0 for g in genes}
    raw = {g: {} for g in genes}
    for (a, s, b, _), c in edges.items():
        raw[a][s] = raw[a].get(s, 0.0) + c * idf[b]
    sigs = sorted({k[1] for k in edges})
    scaled = {g: {} for g in genes}
    for s in sigs:
        col = [raw[g].get(s, 0.0) for g in graph_genes]
        lo, hi = min(col), max(col)
        for g in genes:
            if s in raw[g]:
                scaled[g][s] = (raw[g][s] - lo) / (hi - lo) if hi > lo else 0.0
    out = {g: [sum(c for (a, _, _, l), c in edges.items() if a == g and l == L) for L in (1, 2)] for g in genes}
    inc = {g: [sum(c for (_, _, b, l), c in edges.items() if b == g and l == L) for L in (1, 2)] for g in genes}

    def norm(v, m):
        return v / m if m else 0.0

    result = {}
    for g in genes:
        result[g] = {
            "raw": raw[g], "scaled": scaled[g], "idf": idf[g],
            "out_1": norm(out[g][0], max(o[0] for o in out.values())),
            "out_2": norm(out[g][1], max(o[1] for o in out.values())),
            "in_1": norm(inc[g][0], max(i[0] for i in inc.values())),
            "in_2": norm(inc[g][1], max(i[1] for i in inc.values())),
            "out_all": norm(sum(out[g]), max(sum(o) for o in out.values())),
            "in_all": norm(sum(inc[g]), max(sum(i) for i in inc.values())),
            "io_ratio": sum(out[g]) / sum(inc[g]) if sum(inc[g]) else None,
            "out_counts": out[g], "in_counts": inc[g],
        }
    return result


# -- numerical helpers ------------------------------------------------------

def close(a: float, b: float, tol: float = 1e-12) -> bool:
    return abs(a - b) <= tol * max(1.0, abs(a), abs(b))


# -- reference dual QP ------------------------------------------------------

def _project(v: np.ndarray, y: np.ndarray, C: float) -> np.ndarray:
    """Euclidean projection onto {0 <= a <= C, y'a = 0}.

    ``phi(lam) = y'clip(v - lam*y, 0, C)`` is piecewise linear and nonincreasing;
    the root lies between two adjacent breakpoints and is found by interpolation.
    """
    knots = np.unique(np.concatenate([y * v, y * (v - C)]))
    phi = (y * np.clip(v[None, :] - knots[:, None] * y[None, :], 0.0, C)).sum(axis=1)
    hit = np.flatnonzero(phi == 0.0)
    if len(hit):
        lam = knots[hit[0]]
    else:
        k = np.flatnonzero(phi < 0.0)[0]
        lo, hi = knots[k - 1], knots[k]
        lam = lo + (hi - lo) * phi[k - 1] / (phi[k - 1] - phi[k])
    return np.clip(v - lam * y, 0.0, C)


def reference_dual(K: np.ndarray, y: np.ndarray, C: float, max_iter: int = 200_000,
                   window: int = 2000) -> tuple[np.ndarray, float]:
    """Accelerated projected gradient ascent with adaptive restart on the SVM dual.

    Stops when the objective has not improved by more than 1e-15 (relative)
    over ``window`` iterations.  Returns the maximizer and the dual objective
    sum(a) - 1/2 a'Qa.
    """
    Q = np.outer(y, y) * K
    step = 1.0 / np.linalg.eigvalsh(Q).max()

    def f(a):
        return a.sum() - 0.5 * a @ Q @ a

    x = np.zeros(len(y))
    z, t, fx = x.copy(), 1.0, 0.0
    mark, since = 0.0, 0
    for _ in range(max_iter):
        x_new = _project(z + step * (1.0 - Q @ z), y, C)
        f_new = f(x_new)
        if f_new < fx:
            # restart momentum whenever the objective stops improving
            z, t = x.copy(), 1.0
        else:
            t_new = (1 + math.sqrt(1 + 4 * t * t)) / 2
            z = x_new + (t - 1) / t_new * (x_new - x)
            x, t, fx = x_new, t_new, f_new
        since += 1
        if fx > mark + 1e-15 * max(1.0, abs(mark)):
            mark, since = fx, 0
        elif since >= window:
            break
    return x, fx
