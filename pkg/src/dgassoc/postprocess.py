"""Turn nested interaction events into gene-gene triples labeled by path signatures.

The pipeline per document is::

    rdfify -> simplify -> generalize -> compress

and afterwards :func:`join_paths` composes two stored edges into one
(corpus-wide, see :meth:`dgassoc.store.TripleStore.join_paths`).

Example (the event nest "HSP27 down-regulation enhances ActD-induced caspase3
activation")::

    HSP27 -- theme:Neg_reg:cause:Pos_reg:theme:Pos_reg:cause -- ActD
          -> Neg_reg:Pos_reg:Pos_reg -> Reg:Reg:Reg -> Reg3
"""

from __future__ import annotations

import re
from collections import deque
from dataclasses import dataclass
from itertools import groupby
from typing import Iterable, NamedTuple

from .corpus import ROLES, AnnotatedDocument

COARSE_RELATIONS = ("Expression", "Catabolism", "Localization", "Binding", "Reg")

GENERALIZATION = {
    "Gene_expression": "Expression",
    "Transcription": "Expression",
    "Protein_catabolism": "Catabolism",
    "Localization": "Localization",
    "Binding": "Binding",
    "Phosphorylation": "Binding",
    "Regulation": "Reg",
    "Positive_regulation": "Reg",
    "Negative_regulation": "Reg",
    # abbreviations used in event-graph drawings
    "Pos_reg": "Reg",
    "Neg_reg": "Reg",
}
# coarse classes map to themselves so that generalize is idempotent
GENERALIZATION.update({c: c for c in COARSE_RELATIONS})

_TOKEN = re.compile(r"^([A-Za-z_]+?)(\d*)$")


@dataclass(frozen=True)
class RawPath:
    """Event-graph path between two genes, in traversal order from subject to object.

    Before :func:`simplify` the elements alternate role labels and event types
    and start and end with a role label.
    """

    elements: tuple[str, ...]

    @classmethod
    def from_string(cls, text: str) -> "RawPath":
        return cls(tuple(text.split(":")))

    def __str__(self) -> str:
        return ":".join(self.elements)

    def has_roles(self) -> bool:
        return any(e in ROLES for e in self.elements)

    def is_well_formed(self) -> bool:
        els = self.elements
        if not els:
            return False
        if not self.has_roles():
            return True
        if len(els) % 2 == 0:
            return False
        return all((e in ROLES) == (i % 2 == 0) for i, e in enumerate(els))


class Triple(NamedTuple):
    subject: str
    predicate: str
    object: str


class _Arc(NamedTuple):
    u: tuple
    v: tuple
    role: str
    parent: tuple


def _event_graph(doc: AnnotatedDocument) -> dict[tuple, list[_Arc]]:
    adj: dict[tuple, list[_Arc]] = {}
    for event in doc.events:
        enode = ("e", event.event_id)
        adj.setdefault(enode, [])
        for role, arg in event.arguments():
            cnode = ("g" if arg.kind == "gene" else "e", arg.target)
            adj.setdefault(cnode, [])
            adj[enode].append(_Arc(enode, cnode, role, enode))
            adj[cnode].append(_Arc(cnode, enode, role, enode))
    return adj


def _shortest_arc_paths(adj, source) -> dict[tuple, list[list[_Arc]]]:
    """All shortest paths from gene ``source`` to every other gene.

    Only events are traversed; other genes terminate a path.
    """
    dist = {source: 0}
    preds: dict[tuple, list[_Arc]] = {}
    queue = deque([source])
    while queue:
        node = queue.popleft()
        if node[0] == "g" and node != source:
            continue
        for arc in adj[node]:
            nxt = arc.v
            if nxt not in dist:
                dist[nxt] = dist[node] + 1
                preds[nxt] = [arc]
                queue.append(nxt)
            elif dist[nxt] == dist[node] + 1:
                preds[nxt].append(arc)

    def unwind(node):
        if node == source:
            return [[]]
        out = []
        for arc in preds[node]:
            for head in unwind(arc.u):
                out.append(head + [arc])
        return out

    return {
        node: unwind(node)
        for node in dist
        if node[0] == "g" and node != source
    }


def _orient(arcs: list[_Arc]) -> bool:
    """True when the path's start gene is the subject.

    At each event where the path turns (both adjacent arcs belong to that event),
    the branch attached through a ``cause`` arc is the subject side.  The first
    turn whose two roles differ decides; otherwise the start gene is kept.
    """
    for left, right in zip(arcs, arcs[1:]):
        node = left.v
        if left.parent == node and right.parent == node and left.role != right.role:
            return left.role == "cause"
    return True


def rdfify(doc: AnnotatedDocument) -> list[tuple[str, RawPath, str]]:
    """Break a document's event nest into binary gene-gene relations.

    One relation per unordered gene pair per distinct shortest connecting path.
    """
    adj = _event_graph(doc)
    event_types = {e.event_id: e.event_type for e in doc.events}
    genes = sorted(node for node in adj if node[0] == "g")
    seen = set()
    out = []
    for a in genes:
        paths = _shortest_arc_paths(adj, a)
        for b in genes:
            if b <= a or b not in paths:
                continue
            for arcs in paths[b]:
                if _orient(arcs):
                    subj, obj = a[1], b[1]
                else:
                    subj, obj = b[1], a[1]
                    arcs = [_Arc(x.v, x.u, x.role, x.parent) for x in reversed(arcs)]
                elements = [arcs[0].role]
                for arc in arcs[1:]:
                    elements.append(event_types[arc.u[1]])
                    elements.append(arc.role)
                triple = (subj, RawPath(tuple(elements)), obj)
                key = (subj, str(triple[1]), obj)
                if key not in seen:
                    seen.add(key)
                    out.append(triple)
    return out


def simplify(path: RawPath) -> RawPath:
    return RawPath(tuple(e for e in path.elements if e not in ROLES))


def generalize(path: RawPath) -> RawPath:
    try:
        return RawPath(tuple(GENERALIZATION[e] for e in path.elements))
    except KeyError as exc:
        raise ValueError(f"cannot generalize unknown relation {exc.args[0]!r}") from None


def _runs(signature: str) -> list[tuple[str, int]]:
    runs = []
    for token in signature.split(":"):
        m = _TOKEN.match(token)
        if m is None:
            raise ValueError(f"malformed signature token {token!r}")
        runs.append((m.group(1), int(m.group(2) or 1)))
    return runs


def compress(signature: str) -> str:
    """Run-length encode consecutive identical relations: ``Reg:Reg:Reg`` -> ``Reg3``.

    Tokens that already carry a run count are expanded first, so joined
    signatures re-compress correctly (``Reg3:Reg`` -> ``Reg4``).
    """
    out = []
    for name, group in groupby(_runs(signature), key=lambda r: r[0]):
        total = sum(n for _, n in group)
        out.append(name if total == 1 else f"{name}{total}")
    return ":".join(out)


def decompress(signature: str) -> str:
    return ":".join(":".join([name] * n) for name, n in _runs(signature))


def signature_of(path: RawPath) -> str:
    return compress(str(generalize(simplify(path))))


def join_signatures(first: str, second: str) -> str:
    return compress(f"{first}:{second}")


def extract_triples(doc: AnnotatedDocument) -> list[Triple]:
    """Per-document extraction: distinct (gene, signature, gene) triples, sorted."""
    found = {Triple(s, signature_of(p), o) for s, p, o in rdfify(doc)}
    return sorted(found)


def join_paths(triples: Iterable[tuple[str, str, str]]) -> list[Triple]:
    """Compose every ``(a, s1, b)``, ``(b, s2, c)`` with ``a != c`` into ``(a, s1:s2, c)``.

    The input triples are kept; the result holds no duplicates.
    """
    base = [Triple(*t) for t in triples]
    by_subject: dict[str, list[Triple]] = {}
    for t in base:
        by_subject.setdefault(t.subject, []).append(t)
    seen = set(base)
    out = list(dict.fromkeys(base))
    joined = set()
    for first in base:
        for second in by_subject.get(first.object, ()):
            if second.object == first.subject:
                continue
            t = Triple(first.subject, join_signatures(first.predicate, second.predicate), second.object)
            if t not in seen:
                joined.add(t)
    out.extend(sorted(joined))
    return out
