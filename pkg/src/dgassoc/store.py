"""Counted triple store for co-occurrence and interaction edges.

Two kinds of triples live here:

* ``(disease, coocc, gene)``: the pair appears in the same document.  Counting
  is binary per document, so ``count`` is the number of supporting documents.
* ``(gene, signature, gene)``: an interaction edge labeled by a path signature,
  with its path length (1 for edges read off one document, 2 for joined edges).

The store is single-writer while it is built and read-only afterwards.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Iterator

from .corpus import AnnotatedDocument
from .postprocess import extract_triples, join_signatures

logger = logging.getLogger(__name__)

COOCC = "coocc"
MAX_PATH_LENGTH = 2
FORMAT_VERSION = 1
_MAGIC = "#dgassoc-store"
_COLUMNS = ("subject", "predicate", "object", "count", "length", "doc_ids")


class StoreFormatError(ValueError):
    pass


@dataclass(frozen=True)
class StoredTriple:
    subject: str
    predicate: str
    object: str
    count: int
    length: int
    docs: frozenset[str]


@dataclass(frozen=True)
class StoreStats:
    n_diseases: int
    n_genes: int
    total: int
    max_td: int
    max_tg: int
    max_tdg: int
    n_interactions: int
    signature_counts: dict[str, int] = field(default_factory=dict)

    def summary(self) -> str:
        lines = [
            f"diseases\t{self.n_diseases}",
            f"genes\t{self.n_genes}",
            f"cooccurrences\t{self.total}",
            f"max_td\t{self.max_td}",
            f"max_tg\t{self.max_tg}",
            f"max_tdg\t{self.max_tdg}",
            f"interaction_edges\t{self.n_interactions}",
            f"signatures\t{len(self.signature_counts)}",
        ]
        return "\n".join(lines)


class _Index:
    """Aggregates derived from the raw triples, rebuilt after every write."""

    def __init__(self, cooc, edges):
        self.td: dict[str, int] = {}
        self.tg: dict[str, int] = {}
        self.genes_of: dict[str, dict[str, int]] = {}
        self.diseases_of: dict[str, dict[str, int]] = {}
        for (d, g), docs in cooc.items():
            n = len(docs)
            self.td[d] = self.td.get(d, 0) + n
            self.tg[g] = self.tg.get(g, 0) + n
            self.genes_of.setdefault(d, {})[g] = n
            self.diseases_of.setdefault(g, {})[d] = n
        self.total = sum(self.td.values())
        self.max_td = max(self.td.values(), default=0)
        self.max_tg = max(self.tg.values(), default=0)
        self.max_tdg = max((len(v) for v in cooc.values()), default=0)

        self.out: dict[str, list[list[tuple[str, str, int]]]] = {}
        self.inc: dict[str, list[list[tuple[str, str, int]]]] = {}
        self.signature_counts: dict[str, int] = {}
        interaction_genes = set()
        for (a, sig, b, length), docs in sorted(edges.items()):
            n = len(docs)
            self.out.setdefault(a, [[] for _ in range(MAX_PATH_LENGTH)])[length - 1].append((sig, b, n))
            self.inc.setdefault(b, [[] for _ in range(MAX_PATH_LENGTH)])[length - 1].append((sig, a, n))
            self.signature_counts[sig] = self.signature_counts.get(sig, 0) + n
            interaction_genes.update((a, b))
        self.diseases = sorted(self.td)
        self.interaction_genes = sorted(interaction_genes)
        self.gene_set = set(self.tg) | interaction_genes
        self.genes = sorted(self.gene_set)


class TripleStore:
    def __init__(self):
        self._cooc: dict[tuple[str, str], set[str]] = {}
        self._edges: dict[tuple[str, str, str, int], set[str]] = {}
        self._cooc_docs: set[str] = set()
        self._interaction_docs: set[str] = set()
        self._index: _Index | None = None

    # -- building ---------------------------------------------------------

    @classmethod
    def build(cls, docs: Iterable[AnnotatedDocument], join: bool = True) -> "TripleStore":
        store = cls()
        for doc in docs:
            store.add_document(doc)
        if join:
            store.join_paths()
        return store

    def add_document(self, doc: AnnotatedDocument) -> None:
        self.add_cooccurrences(doc)
        self.add_interactions(extract_triples(doc), doc.doc_id)

    def add_cooccurrences(self, doc: AnnotatedDocument) -> None:
        if doc.doc_id in self._cooc_docs:
            raise ValueError(f"document {doc.doc_id!r} already added")
        self._cooc_docs.add(doc.doc_id)
        for d in set(doc.diseases):
            for g in set(doc.genes):
                self._cooc.setdefault((d, g), set()).add(doc.doc_id)
        self._index = None

    def add_interactions(self, triples: Iterable[tuple[str, str, str]], doc_id: str, length: int = 1) -> None:
        if doc_id in self._interaction_docs:
            raise ValueError(f"interactions of document {doc_id!r} already added")
        _check_length(length)
        self._interaction_docs.add(doc_id)
        for a, sig, b in triples:
            if sig == COOCC:
                raise ValueError(f"{COOCC!r} is reserved for co-occurrence triples")
            self._edges.setdefault((a, sig, b, length), set()).add(doc_id)
        self._index = None

    def join_paths(self) -> int:
        """Add length-2 edges composed from two length-1 edges sharing a middle gene.

        Provenance of a joined edge is the union of the documents of both parts.
        Returns the number of distinct joined edges.
        """
        by_subject: dict[str, list[tuple[str, str, set[str]]]] = {}
        direct = [(k, docs) for k, docs in self._edges.items() if k[3] == 1]
        for (a, sig, b, _), docs in direct:
            by_subject.setdefault(a, []).append((sig, b, docs))
        joined: dict[tuple[str, str, str, int], set[str]] = {}
        for (a, s1, b, _), docs1 in direct:
            for s2, c, docs2 in by_subject.get(b, ()):
                if c == a:
                    continue
                key = (a, join_signatures(s1, s2), c, 2)
                joined.setdefault(key, set()).update(docs1, docs2)
        for key, docs in joined.items():
            self._edges.setdefault(key, set()).update(docs)
        self._index = None
        return len(joined)

    def merge(self, other: "TripleStore") -> "TripleStore":
        """Union of two stores; commutative and associative."""
        out = TripleStore()
        for src in (self, other):
            for k, docs in src._cooc.items():
                out._cooc.setdefault(k, set()).update(docs)
            for k, docs in src._edges.items():
                out._edges.setdefault(k, set()).update(docs)
            out._cooc_docs |= src._cooc_docs
            out._interaction_docs |= src._interaction_docs
        return out

    # -- queries ----------------------------------------------------------

    @property
    def index(self) -> _Index:
        if self._index is None:
            self._index = _Index(self._cooc, self._edges)
        return self._index

    def diseases(self) -> list[str]:
        return self.index.diseases

    def genes(self) -> list[str]:
        return self.index.genes

    def interaction_genes(self) -> list[str]:
        """Genes with at least one interaction edge."""
        return self.index.interaction_genes

    def has_disease(self, d: str) -> bool:
        return d in self.index.td

    def has_gene(self, g: str) -> bool:
        return g in self.index.gene_set

    def signatures(self) -> list[str]:
        return sorted(self.index.signature_counts)

    def t_d(self, d: str) -> int:
        return self.index.td.get(d, 0)

    def t_g(self, g: str) -> int:
        return self.index.tg.get(g, 0)

    def t_dg(self, d: str, g: str) -> int:
        return len(self._cooc.get((d, g), ()))

    def total(self) -> int:
        return self.index.total

    def genes_of(self, d: str) -> dict[str, int]:
        """Co-occurring genes of ``d`` with their pair counts."""
        return self.index.genes_of.get(d, {})

    def diseases_of(self, g: str) -> dict[str, int]:
        return self.index.diseases_of.get(g, {})

    def out_edges(self, g: str, length: int) -> list[tuple[str, str, int]]:
        """``(signature, target, count)`` for edges leaving ``g`` with the given path length."""
        _check_length(length)
        lists = self.index.out.get(g)
        return list(lists[length - 1]) if lists else []

    def in_edges(self, g: str, length: int) -> list[tuple[str, str, int]]:
        """``(signature, source, count)`` for edges entering ``g`` with the given path length."""
        _check_length(length)
        lists = self.index.inc.get(g)
        return list(lists[length - 1]) if lists else []

    def triples(self) -> Iterator[StoredTriple]:
        for (d, g), docs in self._cooc.items():
            yield StoredTriple(d, COOCC, g, len(docs), 0, frozenset(docs))
        for (a, sig, b, length), docs in self._edges.items():
            yield StoredTriple(a, sig, b, len(docs), length, frozenset(docs))

    def interaction_edges(self) -> list[StoredTriple]:
        return [t for t in self.triples() if t.predicate != COOCC]

    def stats(self) -> StoreStats:
        ix = self.index
        return StoreStats(
            n_diseases=len(ix.diseases),
            n_genes=len(ix.genes),
            total=ix.total,
            max_td=ix.max_td,
            max_tg=ix.max_tg,
            max_tdg=ix.max_tdg,
            n_interactions=len(self._edges),
            signature_counts=dict(sorted(ix.signature_counts.items())),
        )

    def __eq__(self, other) -> bool:
        if not isinstance(other, TripleStore):
            return NotImplemented
        return self._cooc == other._cooc and self._edges == other._edges

    def __repr__(self) -> str:
        return f"TripleStore(cooccurrences={len(self._cooc)}, interactions={len(self._edges)})"

    # -- persistence ------------------------------------------------------

    def persist(self, path: str | Path) -> None:
        rows = sorted(
            (t.subject, t.predicate, t.object, t.length, t.count, ",".join(sorted(t.docs)))
            for t in self.triples()
        )
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(f"{_MAGIC}\tversion={FORMAT_VERSION}\n")
            fh.write("\t".join(_COLUMNS) + "\n")
            for s, p, o, length, count, docs in rows:
                fh.write(f"{s}\t{p}\t{o}\t{count}\t{length}\t{docs}\n")

    @classmethod
    def load(cls, path: str | Path) -> "TripleStore":
        store = cls()
        with open(path, encoding="utf-8") as fh:
            header = fh.readline().rstrip("\n").split("\t")
            if len(header) != 2 or header[0] != _MAGIC or not header[1].startswith("version="):
                raise StoreFormatError(f"{path}: not a store file")
            if header[1] != f"version={FORMAT_VERSION}":
                raise StoreFormatError(f"{path}: unsupported store {header[1]}, expected version={FORMAT_VERSION}")
            if fh.readline().rstrip("\n").split("\t") != list(_COLUMNS):
                raise StoreFormatError(f"{path}: bad column header")
            for lineno, line in enumerate(fh, start=3):
                cells = line.rstrip("\n").split("\t")
                try:
                    s, p, o, count, length, docs = cells
                    count, length = int(count), int(length)
                except ValueError:
                    raise StoreFormatError(f"{path}:{lineno}: malformed row") from None
                doc_ids = set(docs.split(",")) if docs else set()
                if count != len(doc_ids) or count < 1:
                    raise StoreFormatError(f"{path}:{lineno}: count {count} does not match provenance")
                if p == COOCC:
                    if length != 0:
                        raise StoreFormatError(f"{path}:{lineno}: co-occurrence row with length {length}")
                    store._cooc[(s, o)] = doc_ids
                    store._cooc_docs |= doc_ids
                else:
                    if not 1 <= length <= MAX_PATH_LENGTH:
                        raise StoreFormatError(f"{path}:{lineno}: path length {length} out of range")
                    store._edges[(s, p, o, length)] = doc_ids
                    if length == 1:
                        store._interaction_docs |= doc_ids
        return store


def _check_length(length: int) -> None:
    if not 1 <= length <= MAX_PATH_LENGTH:
        raise ValueError(f"path length must be in 1..{MAX_PATH_LENGTH}, got {length}")
