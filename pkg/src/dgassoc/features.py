"""Feature assembly, signature selection by information gain, and min-max scaling."""

from __future__ import annotations

import hashlib
import logging
import math
import warnings
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from . import cbf, gbf
from .store import TripleStore

logger = logging.getLogger(__name__)

SCHEMA_VERSION = 1
_MAGIC = "#dgassoc-schema"
SIGNATURE_PREFIX = "sig:"

GROUP_FEATURES = {
    "entropy": ("h_g", "h_d"),
    "cooccurrence": ("occ_v1", "occ_v2", "occ_v3"),
    "grade": ("grade_d", "grade_g"),
    "odds": ("odds",),
    "tfidf": ("tfidf",),
    "connectivity": ("out_1", "out_2", "in_1", "in_2", "out_all", "in_all", "io_ratio", "io_defined"),
    "signatures": (),
}
GROUPS = tuple(GROUP_FEATURES)
CBF_GROUPS = ("entropy", "cooccurrence", "grade", "odds", "tfidf")
DEFAULT_GROUPS = CBF_GROUPS + ("connectivity", "signatures")


def parse_groups(spec: str | Iterable[str]) -> tuple[str, ...]:
    """Accept group names or the aliases ``cbf``/``gbf``/``all``; returns canonical order."""
    if isinstance(spec, str):
        spec = [s.strip() for s in spec.split(",") if s.strip()]
    chosen = set()
    for name in spec:
        name = name.lower()
        if name == "cbf":
            chosen.update(CBF_GROUPS)
        elif name == "gbf":
            chosen.update(("connectivity", "signatures"))
        elif name == "all":
            chosen.update(GROUPS)
        elif name in GROUP_FEATURES:
            chosen.add(name)
        else:
            raise ValueError(f"unknown feature group {name!r}; expected one of {', '.join(GROUPS)}")
    if not chosen:
        raise ValueError("no feature groups selected")
    return tuple(g for g in GROUPS if g in chosen)


def raw_features(store: TripleStore, d: str, g: str, groups: Sequence[str],
                 odds_correction: float = cbf.ODDS_CORRECTION) -> dict[str, float]:
    """Unscaled features of one pair; signature features use the ``sig:`` prefix."""
    values: dict[str, float] = {}
    if any(grp in CBF_GROUPS for grp in groups):
        c = cbf.cbf_vector(store, d, g, odds_correction).as_dict()
        for grp in CBF_GROUPS:
            if grp in groups:
                values.update((name, c[name]) for name in GROUP_FEATURES[grp])
    if "connectivity" in groups:
        conn = gbf.connectivity(store, g)
        values.update(
            out_1=conn.out_1, out_2=conn.out_2, in_1=conn.in_1, in_2=conn.in_2,
            out_all=conn.out_all, in_all=conn.in_all,
            io_ratio=conn.io_ratio if conn.io_ratio is not None else 0.0,
            io_defined=float(conn.io_ratio is not None),
        )
    if "signatures" in groups:
        for sig, v in gbf.signature_map(store, g).items():
            values[SIGNATURE_PREFIX + sig] = v
    return values


def _entropy2(*counts: int) -> float:
    n = sum(counts)
    return -sum(c / n * math.log2(c / n) for c in counts if c)


def information_gain(present: Sequence[bool], labels: Sequence[int]) -> float:
    """Label entropy minus entropy conditioned on a binary feature, in bits."""
    n = len(labels)
    if n == 0:
        return 0.0
    pos = sum(1 for y in labels if y > 0)
    pos_on = sum(1 for x, y in zip(present, labels) if x and y > 0)
    on = sum(1 for x in present if x)
    off, pos_off = n - on, pos - pos_on
    cond = 0.0
    if on:
        cond += on / n * _entropy2(pos_on, on - pos_on)
    if off:
        cond += off / n * _entropy2(pos_off, off - pos_off)
    return _entropy2(pos, n - pos) - cond


def rank_signatures(rows: Sequence[dict[str, float]], labels: Sequence[int],
                    signatures: Iterable[str]) -> list[tuple[str, float]]:
    """Rank signatures by information gain of their presence (value > 0).

    Gains are rounded to 12 decimals so that mathematically equal gains tie,
    and ties go to the lexicographically smaller signature.
    """
    ranked = []
    for sig in signatures:
        key = SIGNATURE_PREFIX + sig
        present = [row.get(key, 0.0) > 0 for row in rows]
        ranked.append((sig, information_gain(present, labels)))
    ranked.sort(key=lambda item: (-round(item[1], 12), item[0]))
    return ranked


@dataclass(frozen=True)
class FeatureSchema:
    names: tuple[str, ...]
    mins: tuple[float, ...]
    maxs: tuple[float, ...]
    k: int
    groups: tuple[str, ...]
    odds_correction: float = cbf.ODDS_CORRECTION

    def __post_init__(self):
        if len(set(self.names)) != len(self.names):
            raise ValueError("feature names must be unique")
        if not len(self.names) == len(self.mins) == len(self.maxs):
            raise ValueError("names and bounds differ in length")
        if any(lo > hi for lo, hi in zip(self.mins, self.maxs)):
            raise ValueError("every lower bound must not exceed its upper bound")

    @property
    def signatures(self) -> list[str]:
        return [n[len(SIGNATURE_PREFIX):] for n in self.names if n.startswith(SIGNATURE_PREFIX)]

    def dumps(self) -> str:
        lines = [
            f"{_MAGIC}\tversion={SCHEMA_VERSION}\tk={self.k}\tgroups={','.join(self.groups)}"
            f"\todds_correction={self.odds_correction!r}",
            "feature\tmin\tmax",
        ]
        lines += [f"{n}\t{lo!r}\t{hi!r}" for n, lo, hi in zip(self.names, self.mins, self.maxs)]
        return "\n".join(lines) + "\n"

    def digest(self) -> str:
        return hashlib.sha256(self.dumps().encode("utf-8")).hexdigest()

    def persist(self, path: str | Path) -> None:
        Path(path).write_text(self.dumps(), encoding="utf-8")

    @classmethod
    def loads(cls, text: str) -> "FeatureSchema":
        lines = text.splitlines()
        head = lines[0].split("\t") if lines else []
        if not head or head[0] != _MAGIC:
            raise ValueError("not a feature schema")
        meta = dict(cell.split("=", 1) for cell in head[1:])
        if meta.get("version") != str(SCHEMA_VERSION):
            raise ValueError(f"unsupported schema version {meta.get('version')!r}")
        rows = [line.split("\t") for line in lines[2:] if line]
        return cls(
            names=tuple(r[0] for r in rows),
            mins=tuple(float(r[1]) for r in rows),
            maxs=tuple(float(r[2]) for r in rows),
            k=int(meta["k"]),
            groups=tuple(g for g in meta["groups"].split(",") if g),
            odds_correction=float(meta["odds_correction"]),
        )

    @classmethod
    def load(cls, path: str | Path) -> "FeatureSchema":
        return cls.loads(Path(path).read_text(encoding="utf-8"))


@dataclass
class FeatureVector:
    pair: tuple[str, str]
    values: dict[str, float]
    label: int | None = None
    unknown: bool = False  # disease or gene missing from the store

    def to_array(self, schema: FeatureSchema) -> np.ndarray:
        return np.array([self.values.get(n, 0.0) for n in schema.names], dtype=float)


def fit_schema(store: TripleStore, pairs: Sequence[tuple[str, str]], labels: Sequence[int],
               groups: Sequence[str] = DEFAULT_GROUPS, k: int = 50,
               odds_correction: float = cbf.ODDS_CORRECTION) -> FeatureSchema:
    """Select the ``k`` most informative signatures and record training-set bounds."""
    if k < 0:
        raise ValueError("k must be nonnegative")
    groups = parse_groups(groups)
    rows = [raw_features(store, d, g, groups, odds_correction) for d, g in pairs]
    names = [n for grp in groups for n in GROUP_FEATURES[grp]]
    if "signatures" in groups and k > 0:
        inventory = store.signatures()
        if k > len(inventory):
            warnings.warn(f"k={k} exceeds the {len(inventory)} available signatures; keeping all")
        ranked = rank_signatures(rows, labels, inventory)
        names += [SIGNATURE_PREFIX + sig for sig, _ in ranked[:k]]
    mins, maxs = [], []
    for name in names:
        column = [row.get(name, 0.0) for row in rows] or [0.0]
        mins.append(float(min(column)))
        maxs.append(float(max(column)))
    return FeatureSchema(tuple(names), tuple(mins), tuple(maxs), k, groups, odds_correction)


def scale(value: float, lo: float, hi: float) -> float:
    if hi <= lo:
        return 0.0
    return min(1.0, max(0.0, (value - lo) / (hi - lo)))


def featurize(store: TripleStore, pair: tuple[str, str], schema: FeatureSchema,
              label: int | None = None) -> FeatureVector:
    d, g = pair
    if not store.has_disease(d) or not store.has_gene(g):
        logger.warning("pair %s/%s is not covered by the store; emitting zeros", d, g)
        return FeatureVector(pair, {n: 0.0 for n in schema.names}, label, unknown=True)
    raw = raw_features(store, d, g, schema.groups, schema.odds_correction)
    values = {
        n: scale(raw.get(n, 0.0), lo, hi)
        for n, lo, hi in zip(schema.names, schema.mins, schema.maxs)
    }
    return FeatureVector(pair, values, label)


def feature_matrix(store: TripleStore, pairs: Sequence[tuple[str, str]], schema: FeatureSchema) -> np.ndarray:
    if not pairs:
        return np.zeros((0, len(schema.names)))
    return np.vstack([featurize(store, p, schema).to_array(schema) for p in pairs])


def write_vectors(vectors: Iterable[FeatureVector], schema: FeatureSchema, path: str | Path) -> Path:
    """Write sparse ``label index:value`` lines plus a ``.features`` index map.

    Indices are 1-based; unlabeled vectors get label 0.
    """
    path = Path(path)
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for vec in vectors:
            cells = [f"{vec.label if vec.label is not None else 0:+d}"]
            for i, name in enumerate(schema.names, start=1):
                v = vec.values.get(name, 0.0)
                if v:
                    cells.append(f"{i}:{v!r}")
            fh.write(" ".join(cells) + "\n")
    sidecar = path.with_name(path.name + ".features")
    sidecar.write_text("".join(f"{i}\t{n}\n" for i, n in enumerate(schema.names, start=1)), encoding="utf-8")
    return sidecar
