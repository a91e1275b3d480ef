"""Gold-standard datasets, evaluation, the co-occurrence baseline and per-disease prediction."""

from __future__ import annotations

import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, NamedTuple, Sequence

import numpy as np

from . import cbf
from .features import FeatureSchema, feature_matrix
from .metrics import Metrics, prf
from .store import TripleStore
from .svm import SvmModel

logger = logging.getLogger(__name__)

POLICIES = ("cooccurring", "graph-expanded")


class Pair(NamedTuple):
    disease: str
    gene: str


@dataclass(frozen=True)
class GoldStandard:
    associations: frozenset[Pair]

    def __post_init__(self):
        for d, g in self.associations:
            if not d or not g:
                raise ValueError("gold ids must be non-empty")

    def __contains__(self, pair) -> bool:
        return Pair(*pair) in self.associations

    def __len__(self) -> int:
        return len(self.associations)

    @classmethod
    def load(cls, path: str | Path) -> "GoldStandard":
        """Two-column TSV (disease, gene); lines starting with ``#`` are comments."""
        pairs = set()
        with open(path, encoding="utf-8") as fh:
            for lineno, line in enumerate(fh, start=1):
                line = line.rstrip("\n")
                if not line.strip() or line.startswith("#"):
                    continue
                cells = line.split("\t")
                if len(cells) != 2 or not all(cells):
                    raise ValueError(f"{path}:{lineno}: expected 'disease<TAB>gene'")
                pairs.add(Pair(*cells))
        return cls(frozenset(pairs))

    def persist(self, path: str | Path) -> None:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write("#disease\tgene\n")
            for d, g in sorted(self.associations):
                fh.write(f"{d}\t{g}\n")


@dataclass(frozen=True)
class LabeledDataset:
    examples: tuple[tuple[Pair, int], ...]
    split: str
    seed: int

    @property
    def pairs(self) -> list[Pair]:
        return [p for p, _ in self.examples]

    @property
    def labels(self) -> list[int]:
        return [y for _, y in self.examples]

    def __len__(self) -> int:
        return len(self.examples)


def build_dataset(gold: GoldStandard, store: TripleStore, seed: int = 0,
                  test_fraction: float = 0.2) -> tuple[LabeledDataset, LabeledDataset]:
    """Positives from the gold standard, matched negatives per disease, stratified split.

    Negatives for a disease are drawn without replacement from its co-occurring
    genes that are not gold-associated with it, as many as it has positives.
    """
    rng = np.random.default_rng(seed)
    positives = sorted(p for p in gold.associations if store.has_disease(p.disease) and store.has_gene(p.gene))
    if not positives:
        raise ValueError("no gold association has both its disease and its gene in the store")
    per_disease: dict[str, int] = {}
    for d, _ in positives:
        per_disease[d] = per_disease.get(d, 0) + 1

    negatives = []
    for d in sorted(per_disease):
        want = per_disease[d]
        candidates = sorted(g for g in store.genes_of(d) if Pair(d, g) not in gold.associations)
        if len(candidates) <= want:
            if len(candidates) < want:
                logger.info("disease %s: %d negatives available for %d positives", d, len(candidates), want)
            picked = candidates
        else:
            picked = [candidates[i] for i in sorted(rng.choice(len(candidates), size=want, replace=False))]
        negatives.extend(Pair(d, g) for g in picked)

    train, test = [], []
    for pairs, label in ((positives, 1), (negatives, -1)):
        order = rng.permutation(len(pairs))
        n_test = int(round(test_fraction * len(pairs)))
        for rank, idx in enumerate(order):
            (test if rank < n_test else train).append((pairs[idx], label))
    train.sort()
    test.sort()
    return LabeledDataset(tuple(train), "train", seed), LabeledDataset(tuple(test), "test", seed)


def write_dataset(datasets: Iterable[LabeledDataset], path: str | Path) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("disease\tgene\tlabel\tsplit\n")
        for ds in datasets:
            for (d, g), y in ds.examples:
                fh.write(f"{d}\t{g}\t{y:+d}\t{ds.split}\n")


def read_dataset(path: str | Path, seed: int = 0) -> dict[str, LabeledDataset]:
    splits: dict[str, list] = {}
    with open(path, encoding="utf-8") as fh:
        header = fh.readline()
        if header.rstrip("\n").split("\t") != ["disease", "gene", "label", "split"]:
            raise ValueError(f"{path}: bad dataset header")
        for line in fh:
            d, g, y, split = line.rstrip("\n").split("\t")
            splits.setdefault(split, []).append((Pair(d, g), int(y)))
    return {s: LabeledDataset(tuple(ex), s, seed) for s, ex in splits.items()}


def evaluate(model: SvmModel, schema: FeatureSchema, store: TripleStore, test: LabeledDataset) -> Metrics:
    if not len(test):
        raise ValueError("test set is empty")
    X = feature_matrix(store, test.pairs, schema)
    return prf(test.labels, model.predict(X))


def baseline_score(store: TripleStore, pair: Sequence[str]) -> float:
    return cbf.occ(store, pair[0], pair[1])[0]


def baseline_classify(store: TripleStore, pair: Sequence[str], threshold: float) -> int:
    """Positive iff the normalized co-occurrence count exceeds ``threshold``."""
    return 1 if baseline_score(store, pair) > threshold else -1


def fit_baseline(store: TripleStore, train: LabeledDataset) -> float:
    """Threshold maximizing training F1 over 0 and every observed score (smallest on ties)."""
    scores = [baseline_score(store, p) for p in train.pairs]
    best_t, best_f1 = 0.0, -1.0
    for t in sorted({0.0, *scores}):
        f1 = prf(train.labels, [1 if s > t else -1 for s in scores]).f1
        if f1 > best_f1:
            best_t, best_f1 = t, f1
    return best_t


def evaluate_baseline(store: TripleStore, threshold: float, test: LabeledDataset) -> Metrics:
    return prf(test.labels, [baseline_classify(store, p, threshold) for p in test.pairs])


class Prediction(NamedTuple):
    gene: str
    score: float
    corpus_freq: int


def candidate_genes(store: TripleStore, d: str, policy: str = "cooccurring") -> list[str]:
    if policy not in POLICIES:
        raise ValueError(f"unknown candidate policy {policy!r}")
    genes = set(store.genes_of(d))
    if policy == "graph-expanded":
        frontier = set(genes)
        for _ in range(2):
            nxt = set()
            for g in frontier:
                nxt.update(t for _, t, _ in store.out_edges(g, 1))
                nxt.update(s for _, s, _ in store.in_edges(g, 1))
            frontier = nxt - genes
            genes |= nxt
    return sorted(genes)


def predict_for_disease(store: TripleStore, d: str, model: SvmModel, schema: FeatureSchema,
                        policy: str = "cooccurring") -> list[Prediction]:
    """Positive candidates ordered by corpus frequency, then margin, then gene id."""
    if not store.has_disease(d):
        logger.warning("disease %s is not in the store", d)
        return []
    genes = candidate_genes(store, d, policy)
    if not genes:
        return []
    margins = model.decision_function(feature_matrix(store, [Pair(d, g) for g in genes], schema))
    hits = [Prediction(g, float(m), store.t_g(g)) for g, m in zip(genes, margins) if m >= 0]
    hits.sort(key=lambda p: (-p.corpus_freq, -p.score, p.gene))
    return hits


def write_predictions(predictions: Sequence[Prediction], path: str | Path) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("rank\tgene\tscore\tcorpus_freq\n")
        for rank, p in enumerate(predictions, start=1):
            fh.write(f"{rank}\t{p.gene}\t{p.score!r}\t{p.corpus_freq}\n")
