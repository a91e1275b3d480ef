"""Annotated-document corpus format.

A corpus is a JSON Lines file with one document per line::

    {"doc_id": "d1", "diseases": ["MESH:D011658"], "genes": ["HSP27"],
     "events": [{"event_id": "E1", "event_type": "Negative_regulation",
                 "themes": [{"kind": "gene", "target": "HSP27"}], "causes": []}]}

Documents are validated on parse; a violation raises :class:`ValidationError`
carrying a machine-readable ``reason`` code.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Iterator

EVENT_TYPES = (
    "Gene_expression",
    "Transcription",
    "Protein_catabolism",
    "Localization",
    "Binding",
    "Phosphorylation",
    "Regulation",
    "Positive_regulation",
    "Negative_regulation",
)

ROLES = ("theme", "cause")
ARGUMENT_KINDS = ("gene", "event")

# ids end up in TSV cells and comma-joined provenance lists
_FORBIDDEN_ID_CHARS = ("\t", "\n", "\r")
_FORBIDDEN_DOC_ID_CHARS = _FORBIDDEN_ID_CHARS + (",",)


class CorpusError(Exception):
    """Base class for corpus problems."""


class ParseError(CorpusError):
    def __init__(self, line: int, message: str):
        super().__init__(f"line {line}: {message}")
        self.line = line


class ValidationError(CorpusError):
    """A document violates an invariant.

    ``reason`` is one of: empty_doc_id, bad_id, duplicate_doc_id,
    duplicate_event_id, unknown_event_type, unknown_argument_kind,
    no_theme, dangling_gene, dangling_event, event_cycle.
    """

    def __init__(self, reason: str, doc_id: str, message: str, line: int | None = None):
        where = f"line {line}: " if line is not None else ""
        super().__init__(f"{where}document {doc_id!r}: {reason}: {message}")
        self.reason = reason
        self.doc_id = doc_id
        self.line = line


@dataclass(frozen=True)
class Argument:
    kind: str
    target: str


@dataclass(frozen=True)
class Event:
    event_id: str
    event_type: str
    themes: tuple[Argument, ...]
    causes: tuple[Argument, ...] = ()

    def arguments(self) -> Iterator[tuple[str, Argument]]:
        """Yield ``(role, argument)`` for every theme and cause."""
        for arg in self.themes:
            yield "theme", arg
        for arg in self.causes:
            yield "cause", arg


@dataclass(frozen=True)
class AnnotatedDocument:
    doc_id: str
    diseases: tuple[str, ...]
    genes: tuple[str, ...]
    events: tuple[Event, ...] = ()

    def validate(self, line: int | None = None) -> None:
        def fail(reason, message):
            raise ValidationError(reason, self.doc_id, message, line)

        if not self.doc_id:
            fail("empty_doc_id", "doc_id must be non-empty")
        if any(c in self.doc_id for c in _FORBIDDEN_DOC_ID_CHARS):
            fail("bad_id", "doc_id contains tab, newline or comma")
        for ident in (*self.diseases, *self.genes):
            if not ident or any(c in ident for c in _FORBIDDEN_ID_CHARS):
                fail("bad_id", f"invalid entity id {ident!r}")

        genes = set(self.genes)
        events = {}
        for event in self.events:
            if event.event_id in events:
                fail("duplicate_event_id", f"event {event.event_id!r} defined twice")
            events[event.event_id] = event

        for event in self.events:
            if event.event_type not in EVENT_TYPES:
                fail("unknown_event_type", f"event {event.event_id!r} has type {event.event_type!r}")
            if not event.themes:
                fail("no_theme", f"event {event.event_id!r} has no theme")
            for _, arg in event.arguments():
                if arg.kind == "gene":
                    if arg.target not in genes:
                        fail("dangling_gene", f"event {event.event_id!r} references unknown gene {arg.target!r}")
                elif arg.kind == "event":
                    if arg.target not in events:
                        fail("dangling_event", f"event {event.event_id!r} references unknown event {arg.target!r}")
                else:
                    fail("unknown_argument_kind", f"event {event.event_id!r} has argument kind {arg.kind!r}")

        # iterative DFS with colors: 1 = on stack, 2 = done
        state: dict[str, int] = {}
        for root in events:
            if state.get(root):
                continue
            stack = [(root, iter(_child_events(events[root])))]
            state[root] = 1
            while stack:
                node, children = stack[-1]
                child = next(children, None)
                if child is None:
                    state[node] = 2
                    stack.pop()
                elif state.get(child) == 1:
                    fail("event_cycle", f"event {child!r} is nested within itself")
                elif not state.get(child):
                    state[child] = 1
                    stack.append((child, iter(_child_events(events[child]))))


def _child_events(event: Event) -> list[str]:
    return [arg.target for _, arg in event.arguments() if arg.kind == "event"]


def document_to_dict(doc: AnnotatedDocument) -> dict:
    return {
        "doc_id": doc.doc_id,
        "diseases": list(doc.diseases),
        "genes": list(doc.genes),
        "events": [
            {
                "event_id": e.event_id,
                "event_type": e.event_type,
                "themes": [{"kind": a.kind, "target": a.target} for a in e.themes],
                "causes": [{"kind": a.kind, "target": a.target} for a in e.causes],
            }
            for e in doc.events
        ],
    }


def document_from_dict(obj: dict) -> AnnotatedDocument:
    """Build a document from its decoded JSON form (no validation)."""
    if not isinstance(obj, dict):
        raise TypeError("document must be a JSON object")

    def args(items):
        return tuple(Argument(str(a["kind"]), str(a["target"])) for a in items)

    events = tuple(
        Event(
            event_id=str(e["event_id"]),
            event_type=str(e["event_type"]),
            themes=args(e.get("themes", ())),
            causes=args(e.get("causes", ())),
        )
        for e in obj.get("events", ())
    )
    return AnnotatedDocument(
        doc_id=str(obj["doc_id"]),
        diseases=tuple(str(d) for d in obj.get("diseases", ())),
        genes=tuple(str(g) for g in obj.get("genes", ())),
        events=events,
    )


def dumps_document(doc: AnnotatedDocument) -> str:
    return json.dumps(document_to_dict(doc), ensure_ascii=False, separators=(",", ":"))


def parse_line(text: str, line: int = 1) -> AnnotatedDocument:
    try:
        obj = json.loads(text)
        doc = document_from_dict(obj)
    except (json.JSONDecodeError, KeyError, TypeError, AttributeError) as exc:
        raise ParseError(line, f"malformed document: {exc}") from exc
    doc.validate(line)
    return doc


def iter_corpus(path: str | Path) -> Iterator[AnnotatedDocument]:
    """Stream documents from a JSON Lines corpus, validating each one."""
    seen: set[str] = set()
    with open(path, encoding="utf-8") as fh:
        for lineno, text in enumerate(fh, start=1):
            if not text.strip():
                continue
            doc = parse_line(text, lineno)
            if doc.doc_id in seen:
                raise ValidationError("duplicate_doc_id", doc.doc_id, "doc_id already used", lineno)
            seen.add(doc.doc_id)
            yield doc


def parse_corpus(path: str | Path) -> list[AnnotatedDocument]:
    return list(iter_corpus(path))


def write_corpus(docs: Iterable[AnnotatedDocument], path: str | Path) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for doc in docs:
            fh.write(dumps_document(doc))
            fh.write("\n")
