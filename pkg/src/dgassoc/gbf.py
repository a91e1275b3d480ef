"""Graph-based gene features computed from interaction edges only.

None of these depend on diseases: the same gene gets the same values in every
(disease, gene) pair.  The gene universe here is the set of genes with at
least one interaction edge, so co-occurrence data never leaks in.
"""

from __future__ import annotations

import math
import weakref
from dataclasses import dataclass

from .store import MAX_PATH_LENGTH, TripleStore

_tables: "weakref.WeakKeyDictionary" = weakref.WeakKeyDictionary()


@dataclass(frozen=True)
class SignatureFeature:
    signature: str
    value: float


@dataclass(frozen=True)
class ConnectivityVector:
    out_1: float
    out_2: float
    in_1: float
    in_2: float
    out_all: float
    in_all: float
    io_ratio: float | None  # None when the gene has no incoming edge


def idf_target(store: TripleStore, g: str) -> float:
    """log(|G_I| / number of distinct genes with an edge into ``g``); 0 if none.

    ``G_I`` is the set of genes taking part in any interaction edge.
    """
    sources = {src for length in range(1, MAX_PATH_LENGTH + 1) for _, src, _ in store.in_edges(g, length)}
    if not sources:
        return 0.0
    return math.log(len(store.interaction_genes()) / len(sources))


def raw_signature_values(store: TripleStore, g: str) -> dict[str, float]:
    """Sum of ``count * idf(target)`` over outgoing edges, per signature."""
    values: dict[str, float] = {}
    for length in range(1, MAX_PATH_LENGTH + 1):
        for sig, target, count in store.out_edges(g, length):
            values[sig] = values.get(sig, 0.0) + count * idf_target(store, target)
    return values


class _GbfTable:
    def __init__(self, store: TripleStore):
        genes = store.interaction_genes()
        raw = {g: raw_signature_values(store, g) for g in genes}
        self.signature: dict[str, dict[str, float]] = {}
        for sig in store.signatures():
            column = [raw[g].get(sig, 0.0) for g in genes]
            lo, hi = min(column), max(column)
            for g in genes:
                if sig in raw[g]:
                    v = (raw[g][sig] - lo) / (hi - lo) if hi > lo else 0.0
                    self.signature.setdefault(g, {})[sig] = v

        self.counts: dict[str, tuple[list[int], list[int]]] = {}
        for g in genes:
            outs = [sum(c for _, _, c in store.out_edges(g, l)) for l in range(1, MAX_PATH_LENGTH + 1)]
            ins = [sum(c for _, _, c in store.in_edges(g, l)) for l in range(1, MAX_PATH_LENGTH + 1)]
            self.counts[g] = (outs, ins)
        cols = list(self.counts.values())
        self.max_out = [max((o[l] for o, _ in cols), default=0) for l in range(MAX_PATH_LENGTH)]
        self.max_in = [max((i[l] for _, i in cols), default=0) for l in range(MAX_PATH_LENGTH)]
        self.max_out_all = max((sum(o) for o, _ in cols), default=0)
        self.max_in_all = max((sum(i) for _, i in cols), default=0)


def _table(store: TripleStore) -> _GbfTable:
    ix = store.index
    table = _tables.get(ix)
    if table is None:
        table = _tables[ix] = _GbfTable(store)
    return table


def signature_features(store: TripleStore, g: str) -> list[SignatureFeature]:
    """Signature weights of ``g``, min-max scaled per signature over all genes."""
    values = _table(store).signature.get(g, {})
    return [SignatureFeature(s, v) for s, v in sorted(values.items())]


def signature_map(store: TripleStore, g: str) -> dict[str, float]:
    return dict(_table(store).signature.get(g, {}))


def _ratio(num: int, den: int) -> float:
    return num / den if den else 0.0


def connectivity(store: TripleStore, g: str) -> ConnectivityVector:
    t = _table(store)
    outs, ins = t.counts.get(g, ([0] * MAX_PATH_LENGTH, [0] * MAX_PATH_LENGTH))
    return ConnectivityVector(
        out_1=_ratio(outs[0], t.max_out[0]),
        out_2=_ratio(outs[1], t.max_out[1]),
        in_1=_ratio(ins[0], t.max_in[0]),
        in_2=_ratio(ins[1], t.max_in[1]),
        out_all=_ratio(sum(outs), t.max_out_all),
        in_all=_ratio(sum(ins), t.max_in_all),
        io_ratio=io_ratio(store, g),
    )


def io_ratio(store: TripleStore, g: str) -> float | None:
    """Outgoing over incoming edge count across all path lengths; None without incoming edges."""
    outs, ins = _table(store).counts.get(g, ([0], [0]))
    if sum(ins) == 0:
        return None
    return sum(outs) / sum(ins)
