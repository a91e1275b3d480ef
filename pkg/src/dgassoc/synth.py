"""Synthetic corpora with planted disease-gene associations.

Each document is about one focus disease (sometimes with a second, unrelated
disease mentioned in passing).  Genes enter a document in two ways:

* background mentions: gene ``g`` appears with probability
  ``noise_rate * popularity[g]``, independent of any association;
* planted mentions: every true gene of the focus disease gets an extra
  ``signal_strength / n_true`` chance, so each document carries on average
  ``signal_strength`` planted mentions.

A planted gene may recruit an interaction partner that shares one of its true
diseases, linked by a regulation-type event nest.  Gene pairs that share a true
disease and meet in a document are linked with probability ``LINK_SHARED``;
any other pair with probability ``interaction_density``, using
binding/localization style events.  Event nests are at most two levels deep.

With ``signal_strength = 0`` no planted mention or partner recruitment happens,
so true and false pairs co-occur at the same expected rate.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass
from pathlib import Path

import numpy as np

from .corpus import AnnotatedDocument, Argument, Event, write_corpus
from .dataset import GoldStandard, Pair

LINK_SHARED = 0.5
RECRUIT_PARTNER = 0.6
SECOND_DISEASE = 0.25
POPULARITY_SIGMA = 1.0

# (name, weight) of event shapes; disease-linked pairs prefer regulation chains
_LINKED_SHAPES = (("regulation", 3), ("expression", 3), ("phosphorylation", 2), ("cascade", 2), ("binding", 1))
_NOISE_SHAPES = (("binding", 3), ("localization", 2), ("catabolism", 2), ("regulation", 1))


@dataclass(frozen=True)
class SynthConfig:
    n_diseases: int = 40
    n_genes: int = 120
    n_docs: int = 300
    assoc_density: float = 0.05
    signal_strength: float = 0.6
    interaction_density: float = 0.02
    noise_rate: float = 0.05
    seed: int = 42

    def __post_init__(self):
        for name in ("assoc_density", "signal_strength", "interaction_density", "noise_rate"):
            v = getattr(self, name)
            if not 0.0 <= v <= 1.0:
                raise ValueError(f"{name} must be a probability, got {v}")
        for name in ("n_diseases", "n_genes", "n_docs"):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be at least 1")


class _DocBuilder:
    def __init__(self):
        self.events: list[Event] = []

    def _event(self, etype, themes, causes=()):
        eid = f"E{len(self.events) + 1}"
        self.events.append(Event(eid, etype, tuple(themes), tuple(causes)))
        return Argument("event", eid)

    def link(self, shape: str, a: str, b: str, rng) -> None:
        """Events expressing that ``a`` acts on ``b``."""
        ga, gb = Argument("gene", a), Argument("gene", b)
        if shape == "regulation":
            etype = ("Positive_regulation", "Negative_regulation", "Regulation")[rng.integers(3)]
            self._event(etype, [gb], [ga])
        elif shape == "expression":
            inner = self._event(("Gene_expression", "Transcription")[rng.integers(2)], [gb])
            self._event("Positive_regulation", [inner], [ga])
        elif shape == "phosphorylation":
            inner = self._event("Phosphorylation", [gb])
            self._event("Positive_regulation", [inner], [ga])
        elif shape == "cascade":
            # "down-regulation of a enhances b expression": a sits two levels up
            down = self._event("Negative_regulation", [ga])
            expr = self._event("Gene_expression", [gb])
            self._event("Positive_regulation", [expr], [down])
        elif shape == "binding":
            self._event("Binding", [ga, gb])
        elif shape == "localization":
            inner = self._event("Localization", [gb])
            self._event("Regulation", [inner], [ga])
        elif shape == "catabolism":
            inner = self._event("Protein_catabolism", [gb])
            self._event("Negative_regulation", [inner], [ga])
        else:
            raise ValueError(shape)


def _pick(shapes, rng) -> str:
    names = [s for s, _ in shapes]
    w = np.array([w for _, w in shapes], dtype=float)
    return names[rng.choice(len(names), p=w / w.sum())]


def generate_corpus(config: SynthConfig) -> tuple[list[AnnotatedDocument], GoldStandard, dict]:
    """Return documents, the evidenced gold standard and a truth report."""
    if config.n_docs < 1:
        raise ValueError("n_docs must be at least 1")
    rng = np.random.default_rng(config.seed)
    diseases = [f"DIS{i:03d}" for i in range(config.n_diseases)]
    genes = [f"GENE{i:04d}" for i in range(config.n_genes)]

    popularity = rng.lognormal(0.0, POPULARITY_SIGMA, config.n_genes)
    popularity /= popularity.mean()
    p_noise = np.minimum(1.0, config.noise_rate * popularity)
    truth = rng.random((config.n_diseases, config.n_genes)) < config.assoc_density
    true_genes = [np.flatnonzero(truth[d]) for d in range(config.n_diseases)]
    shares = (truth.T.astype(int) @ truth.astype(int)) > 0  # gene x gene: share a true disease
    np.fill_diagonal(shares, False)

    docs = []
    for k in range(config.n_docs):
        focus = int(rng.integers(config.n_diseases))
        doc_diseases = [focus]
        if config.n_diseases > 1 and rng.random() < SECOND_DISEASE:
            other = int(rng.integers(config.n_diseases - 1))
            doc_diseases.append(other + (other >= focus))

        present = rng.random(config.n_genes) < p_noise
        planted = []
        n_true = len(true_genes[focus])
        if n_true and config.signal_strength > 0:
            extra = rng.random(n_true) < config.signal_strength / n_true
            for g in true_genes[focus][extra]:
                present[g] = True
                planted.append(int(g))

        builder = _DocBuilder()
        linked = set()
        for g in planted:
            partners = np.flatnonzero(shares[g])
            if len(partners) and rng.random() < RECRUIT_PARTNER:
                h = int(partners[rng.integers(len(partners))])
                present[h] = True
                builder.link(_pick(_LINKED_SHAPES, rng), genes[g], genes[h], rng)
                linked.add((g, h))

        members = np.flatnonzero(present)
        for a in members:
            for b in members:
                if a == b or (a, b) in linked or (b, a) in linked:
                    continue
                if shares[a, b]:
                    if rng.random() < LINK_SHARED / 2:
                        builder.link(_pick(_LINKED_SHAPES, rng), genes[a], genes[b], rng)
                elif rng.random() < config.interaction_density / 2:
                    builder.link(_pick(_NOISE_SHAPES, rng), genes[a], genes[b], rng)

        if not len(members):
            members = np.array([int(rng.choice(config.n_genes, p=popularity / popularity.sum()))])
        docs.append(AnnotatedDocument(
            doc_id=f"doc{k:05d}",
            diseases=tuple(diseases[d] for d in sorted(doc_diseases)),
            genes=tuple(genes[g] for g in members),
            events=tuple(builder.events),
        ))

    seen_d = {d for doc in docs for d in doc.diseases}
    seen_g = {g for doc in docs for g in doc.genes}
    planted_pairs = [Pair(diseases[d], genes[g]) for d, g in zip(*np.nonzero(truth))]
    gold = GoldStandard(frozenset(p for p in planted_pairs if p.disease in seen_d and p.gene in seen_g))
    if not gold.associations:
        raise ValueError("configuration produced an empty gold standard")

    cooc_pairs = {(d, g) for doc in docs for d in doc.diseases for g in doc.genes}
    report = {
        **{f"config.{k}": v for k, v in asdict(config).items()},
        "planted_associations": len(planted_pairs),
        "gold_associations": len(gold),
        "gold_cooccurring": sum(1 for p in gold.associations if p in cooc_pairs),
        "documents": len(docs),
        "events": sum(len(doc.events) for doc in docs),
        "diseases": len(seen_d),
        "genes": len(seen_g),
        "cooccurrence_pairs": len(cooc_pairs),
        "cooccurrence_total": sum(len(doc.diseases) * len(doc.genes) for doc in docs),
    }
    return docs, gold, report


def write_truth(report: dict, path: str | Path) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("key\tvalue\n")
        for k, v in report.items():
            fh.write(f"{k}\t{v}\n")


def read_truth(path: str | Path) -> dict[str, str]:
    with open(path, encoding="utf-8") as fh:
        next(fh)
        return dict(line.rstrip("\n").split("\t", 1) for line in fh)


def generate(config: SynthConfig, out_dir: str | Path) -> tuple[Path, Path, Path]:
    """Write ``corpus.jsonl``, ``gold.tsv`` and ``truth.tsv`` into ``out_dir``."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    docs, gold, report = generate_corpus(config)
    paths = out / "corpus.jsonl", out / "gold.tsv", out / "truth.tsv"
    write_corpus(docs, paths[0])
    gold.persist(paths[1])
    write_truth(report, paths[2])
    return paths
