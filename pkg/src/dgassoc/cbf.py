"""Co-occurrence based features of a (disease, gene) pair.

Notation: ``t_dg`` is the number of documents in which ``d`` and ``g``
co-occur, ``t_d``/``t_g`` the summed pair counts of a disease/gene and ``total``
the summed count of all co-occurrence triples.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass

from .store import TripleStore

ODDS_CORRECTION = 0.5


@dataclass(frozen=True)
class CbfVector:
    h_g: float
    h_d: float
    occ_v1: float
    occ_v2: float
    occ_v3: float
    grade_d: float
    grade_g: float
    odds: float
    tfidf: float

    def as_dict(self) -> dict[str, float]:
        return asdict(self)


def _entropy(counts) -> float:
    n = sum(counts)
    if n == 0:
        return 0.0
    h = 0.0
    for c in counts:
        if c:
            p = c / n
            h -= p * math.log2(p)
    # -0.0 for a single outcome
    return h + 0.0


def entropy_gene(store: TripleStore, g: str) -> float:
    """Entropy in bits of p(d|g) = t_dg / t_g; 0 for a gene without co-occurrences."""
    return _entropy(store.diseases_of(g).values())


def entropy_disease(store: TripleStore, d: str) -> float:
    return _entropy(store.genes_of(d).values())


def occ(store: TripleStore, d: str, g: str) -> tuple[float, float, float]:
    """Pair count normalized by the max disease count, max gene count and max pair count."""
    tdg = store.t_dg(d, g)
    if tdg == 0:
        return 0.0, 0.0, 0.0
    ix = store.index
    return tdg / ix.max_td, tdg / ix.max_tg, tdg / ix.max_tdg


def grades(store: TripleStore, d: str, g: str) -> tuple[float, float]:
    ix = store.index
    grade_d = store.t_d(d) / ix.max_td if ix.max_td else 0.0
    grade_g = store.t_g(g) / ix.max_tg if ix.max_tg else 0.0
    return grade_d, grade_g


def odds_ratio(tdg: int, td: int, tg: int, total: int, correction: float = ODDS_CORRECTION) -> float:
    """``tdg * (total - tdg) / ((|tdg - td| + c) * (|tdg - tg| + c))``.

    Both denominator factors are nonpositive for any observed pair, so their
    magnitudes are used; the continuity correction ``c`` keeps the ratio finite
    when a pair accounts for all occurrences of its disease or gene.
    """
    if tdg == 0:
        return 0.0
    return tdg * (total - tdg) / ((abs(tdg - td) + correction) * (abs(tdg - tg) + correction))


def odds(store: TripleStore, d: str, g: str, correction: float = ODDS_CORRECTION) -> float:
    return odds_ratio(store.t_dg(d, g), store.t_d(d), store.t_g(g), store.total(), correction)


def idf_gene(store: TripleStore, g: str) -> float:
    """Natural-log inverse document frequency of ``g`` over diseases."""
    df = len(store.diseases_of(g))
    if df == 0:
        return 0.0
    return math.log(len(store.diseases()) / df)


def tfidf_pair(store: TripleStore, d: str, g: str) -> float:
    tdg = store.t_dg(d, g)
    if tdg == 0:
        return 0.0
    return tdg * idf_gene(store, g)


def cbf_vector(store: TripleStore, d: str, g: str, correction: float = ODDS_CORRECTION) -> CbfVector:
    v1, v2, v3 = occ(store, d, g)
    grade_d, grade_g = grades(store, d, g)
    return CbfVector(
        h_g=entropy_gene(store, g),
        h_d=entropy_disease(store, d),
        occ_v1=v1,
        occ_v2=v2,
        occ_v3=v3,
        grade_d=grade_d,
        grade_g=grade_g,
        odds=odds(store, d, g, correction),
        tfidf=tfidf_pair(store, d, g),
    )
