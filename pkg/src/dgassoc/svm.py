"""RBF-kernel soft-margin SVM trained with SMO, plus cross-validated grid search.

The solver works on the dual in its minimization form::

    min_a  1/2 a'Qa - e'a   s.t.  0 <= a_i <= C,  y'a = 0,   Q_ij = y_i y_j K(x_i, x_j)

Each step updates one pair of variables and stops once the KKT gap
``max_{I_up} -y_t G_t - min_{I_low} -y_t G_t`` drops below ``tol``.  The pair is
either the maximal violating pair (``selection="max-violating"``) or the maximal
violator plus the partner with the largest second-order gain
(``selection="second-order"``, the default; far fewer iterations at large C).
"""

from __future__ import annotations

import logging
from collections import OrderedDict
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numba
import numpy as np
from sklearn.model_selection import StratifiedKFold

from .metrics import prf

logger = logging.getLogger(__name__)

MODEL_VERSION = 1
_MAGIC = "#dgassoc-svm"
TAU = 1e-12
DENSE_LIMIT = 10_000


class ConvergenceError(RuntimeError):
    """SMO hit its iteration cap before the KKT gap fell below ``tol``."""

    def __init__(self, message: str, model: "SvmModel | None" = None):
        super().__init__(message)
        self.model = model


def rbf_kernel(A: np.ndarray, B: np.ndarray, gamma: float) -> np.ndarray:
    sq = (A * A).sum(axis=1)[:, None] + (B * B).sum(axis=1)[None, :] - 2.0 * A @ B.T
    np.maximum(sq, 0.0, out=sq)
    return np.exp(-gamma * sq)


@numba.njit(cache=True, nogil=True)
def _select(alpha, G, y, C):
    n = y.shape[0]
    m = -np.inf
    M = np.inf
    i = -1
    j = -1
    for t in range(n):
        v = -y[t] * G[t]
        if (y[t] > 0 and alpha[t] < C) or (y[t] < 0 and alpha[t] > 0):
            if v > m:
                m = v
                i = t
        if (y[t] < 0 and alpha[t] < C) or (y[t] > 0 and alpha[t] > 0):
            if v < M:
                M = v
                j = t
    return i, j, m, M


@numba.njit(cache=True, nogil=True)
def _select_second_order(alpha, G, y, C, K):
    """Keep the maximal violator i; choose j maximizing the guaranteed objective decrease."""
    n = y.shape[0]
    m = -np.inf
    i = -1
    for t in range(n):
        if (y[t] > 0 and alpha[t] < C) or (y[t] < 0 and alpha[t] > 0):
            v = -y[t] * G[t]
            if v > m:
                m = v
                i = t
    M = np.inf
    j = -1
    best = np.inf
    if i < 0:
        return i, j, m, M
    for t in range(n):
        if (y[t] < 0 and alpha[t] < C) or (y[t] > 0 and alpha[t] > 0):
            v = -y[t] * G[t]
            if v < M:
                M = v
            b = m - v
            if b > 0:
                a = K[i, i] + K[t, t] - 2.0 * K[i, t]
                if a <= 0:
                    a = TAU
                score = -(b * b) / a
                if score < best:
                    best = score
                    j = t
    return i, j, m, M


@numba.njit(cache=True, nogil=True)
def _pair_update(ai, aj, yi, yj, Gi, Gj, Kii, Kjj, Kij, C):
    """Analytic two-variable update clipped to the box, as in LIBSVM."""
    if yi != yj:
        quad = Kii + Kjj - 2.0 * Kij
        if quad <= 0:
            quad = TAU
        delta = (-Gi - Gj) / quad
        diff = ai - aj
        ai += delta
        aj += delta
        if diff > 0:
            if aj < 0:
                aj = 0.0
                ai = diff
        else:
            if ai < 0:
                ai = 0.0
                aj = -diff
        if diff > 0:
            if ai > C:
                ai = C
                aj = C - diff
        else:
            if aj > C:
                aj = C
                ai = C + diff
    else:
        quad = Kii + Kjj - 2.0 * Kij
        if quad <= 0:
            quad = TAU
        delta = (Gi - Gj) / quad
        total = ai + aj
        ai -= delta
        aj += delta
        if total > C:
            if ai > C:
                ai = C
                aj = total - C
        else:
            if aj < 0:
                aj = 0.0
                ai = total
        if total > C:
            if aj > C:
                aj = C
                ai = total - C
        else:
            if ai < 0:
                ai = 0.0
                aj = total
    return ai, aj


@numba.njit(cache=True, nogil=True)
def _smo_dense(K, y, C, tol, max_iter, trace, second_order):
    n = y.shape[0]
    alpha = np.zeros(n)
    G = -np.ones(n)
    objective = np.zeros(max_iter + 1 if trace else 1)
    it = 0
    gap = np.inf
    while True:
        if second_order:
            i, j, m, M = _select_second_order(alpha, G, y, C, K)
        else:
            i, j, m, M = _select(alpha, G, y, C)
        gap = m - M
        if i < 0 or j < 0 or gap < tol or it >= max_iter:
            break
        ai, aj = _pair_update(alpha[i], alpha[j], y[i], y[j], G[i], G[j], K[i, i], K[j, j], K[i, j], C)
        dai = ai - alpha[i]
        daj = aj - alpha[j]
        alpha[i] = ai
        alpha[j] = aj
        for t in range(n):
            G[t] += y[t] * (y[i] * K[t, i] * dai + y[j] * K[t, j] * daj)
        it += 1
        if trace:
            s = 0.0
            for t in range(n):
                s += alpha[t] * (1.0 - G[t])
            objective[it] = 0.5 * s
    return alpha, G, it, gap, objective[: it + 1] if trace else objective[:0]


def _smo_rowcache(X, y, gamma, C, tol, max_iter, trace, second_order, cache_rows=1024):
    """Same algorithm for inputs too large for a dense Gram matrix; rows are LRU-cached."""
    n = len(y)
    sq = (X * X).sum(axis=1)
    cache: OrderedDict[int, np.ndarray] = OrderedDict()

    def row(t):
        r = cache.get(t)
        if r is None:
            d = sq + sq[t] - 2.0 * X @ X[t]
            r = np.exp(-gamma * np.maximum(d, 0.0))
            cache[t] = r
            if len(cache) > cache_rows:
                cache.popitem(last=False)
        else:
            cache.move_to_end(t)
        return r

    alpha = np.zeros(n)
    G = -np.ones(n)
    objective = [0.0]
    it = 0
    while True:
        i, j, m, M = _select(alpha, G, y, C)
        if second_order and i >= 0:
            Ki = row(i)
            low = ((y < 0) & (alpha < C)) | ((y > 0) & (alpha > 0))
            v = -y * G
            b = m - v
            ok = low & (b > 0)
            if ok.any():
                a = 2.0 - 2.0 * Ki  # RBF: K_tt == 1
                a[a <= 0] = TAU
                score = np.where(ok, -(b * b) / a, np.inf)
                j = int(np.argmin(score))
        gap = m - M
        if i < 0 or j < 0 or gap < tol or it >= max_iter:
            break
        Ki, Kj = row(i), row(j)
        ai, aj = _pair_update(alpha[i], alpha[j], y[i], y[j], G[i], G[j], Ki[i], Kj[j], Ki[j], C)
        dai, daj = ai - alpha[i], aj - alpha[j]
        alpha[i], alpha[j] = ai, aj
        G += y * (y[i] * Ki * dai + y[j] * Kj * daj)
        it += 1
        if trace:
            objective.append(0.5 * float(alpha @ (1.0 - G)))
    return alpha, G, it, gap, np.array(objective if trace else [])


@dataclass
class SvmModel:
    support_vectors: np.ndarray
    dual_coef: np.ndarray  # alpha_i * y_i
    bias: float
    C: float
    gamma: float
    schema_hash: str = ""
    n_iter: int = 0
    converged: bool = True
    objective_trace: np.ndarray | None = field(default=None, repr=False)

    @property
    def alphas(self) -> np.ndarray:
        return np.abs(self.dual_coef)

    def decision_function(self, X: np.ndarray) -> np.ndarray:
        X = np.atleast_2d(np.asarray(X, dtype=float))
        if X.shape[1] != self.support_vectors.shape[1]:
            raise ValueError(f"expected {self.support_vectors.shape[1]} features, got {X.shape[1]}")
        return rbf_kernel(X, self.support_vectors, self.gamma) @ self.dual_coef + self.bias

    def predict(self, X: np.ndarray) -> np.ndarray:
        return np.where(self.decision_function(X) >= 0, 1, -1)

    def dumps(self) -> str:
        lines = [
            f"{_MAGIC}\tversion={MODEL_VERSION}",
            f"C\t{self.C!r}",
            f"gamma\t{self.gamma!r}",
            f"bias\t{self.bias!r}",
            f"schema\t{self.schema_hash}",
            f"n_features\t{self.support_vectors.shape[1]}",
            f"support_vectors\t{len(self.dual_coef)}",
        ]
        for coef, sv in zip(self.dual_coef, self.support_vectors):
            cells = [repr(float(coef))]
            cells += [f"{i}:{float(v)!r}" for i, v in enumerate(sv, start=1) if v != 0.0]
            lines.append("\t".join(cells))
        return "\n".join(lines) + "\n"

    def persist(self, path: str | Path) -> None:
        Path(path).write_text(self.dumps(), encoding="utf-8")

    @classmethod
    def loads(cls, text: str) -> "SvmModel":
        lines = text.splitlines()
        if not lines or lines[0] != f"{_MAGIC}\tversion={MODEL_VERSION}":
            raise ValueError("not a model file of a supported version")
        head = dict(line.split("\t", 1) for line in lines[1:7])
        n_features, n_sv = int(head["n_features"]), int(head["support_vectors"])
        coef = np.zeros(n_sv)
        svs = np.zeros((n_sv, n_features))
        for r, line in enumerate(lines[7:7 + n_sv]):
            cells = line.split("\t")
            coef[r] = float(cells[0])
            for cell in cells[1:]:
                idx, val = cell.split(":")
                svs[r, int(idx) - 1] = float(val)
        return cls(svs, coef, float(head["bias"]), float(head["C"]), float(head["gamma"]), head["schema"])

    @classmethod
    def load(cls, path: str | Path) -> "SvmModel":
        return cls.loads(Path(path).read_text(encoding="utf-8"))


def dual_objective(alpha: np.ndarray, y: np.ndarray, K: np.ndarray) -> float:
    """Maximization form: sum(alpha) - 1/2 sum_ij alpha_i alpha_j y_i y_j K_ij."""
    ay = alpha * y
    return float(alpha.sum() - 0.5 * ay @ K @ ay)


def train(X: np.ndarray, y: Sequence[int], C: float = 1.0, gamma: float = 1.0, tol: float = 1e-3,
          max_iter: int | None = None, seed: int = 0, trace: bool = False,
          schema_hash: str = "", dense_limit: int = DENSE_LIMIT, return_alpha: bool = False,
          selection: str = "second-order"):
    """Fit an RBF SVM by SMO.

    Both working-pair rules are deterministic, so ``seed`` does not change
    the result; it is accepted for interface stability.  Raises :class:`ConvergenceError` (carrying the partial model)
    when ``max_iter`` is exhausted.
    """
    X = np.ascontiguousarray(X, dtype=float)
    y = np.asarray(y, dtype=float)
    if X.ndim != 2 or len(X) != len(y):
        raise ValueError("X must be 2-D with one row per label")
    if not np.all(np.isfinite(X)):
        raise ValueError("features must be finite")
    if not set(np.unique(y)) <= {-1.0, 1.0}:
        raise ValueError("labels must be +1/-1")
    if not ((y > 0).any() and (y < 0).any()):
        raise ValueError("training data must contain both classes")
    if selection not in ("second-order", "max-violating"):
        raise ValueError(f"unknown selection rule {selection!r}")
    if C <= 0 or gamma <= 0 or tol <= 0:
        raise ValueError("C, gamma and tol must be positive")
    n = len(y)
    if max_iter is None:
        max_iter = max(10_000_000, 100 * n)

    if n <= dense_limit:
        K = rbf_kernel(X, X, gamma)
        alpha, G, it, gap, obj = _smo_dense(K, y, float(C), float(tol), int(max_iter), trace,
                                            selection == "second-order")
    else:
        alpha, G, it, gap, obj = _smo_rowcache(X, y, gamma, float(C), float(tol), int(max_iter), trace,
                                               selection == "second-order")

    grad = -y * G
    free = (alpha > 0) & (alpha < C)
    if free.any():
        bias = float(grad[free].mean())
    else:
        up = ((y > 0) & (alpha < C)) | ((y < 0) & (alpha > 0))
        low = ((y < 0) & (alpha < C)) | ((y > 0) & (alpha > 0))
        bias = float((grad[up].max() + grad[low].min()) / 2)

    sv = alpha > 0
    model = SvmModel(
        support_vectors=X[sv].copy(),
        dual_coef=(alpha * y)[sv],
        bias=bias,
        C=float(C),
        gamma=float(gamma),
        schema_hash=schema_hash,
        n_iter=int(it),
        converged=bool(gap < tol),
        objective_trace=obj if trace else None,
    )
    if not model.converged:
        raise ConvergenceError(f"SMO did not converge in {max_iter} iterations (gap {gap:.3g})", model)
    if return_alpha:
        return model, alpha
    return model


def default_grid() -> list[tuple[float, float]]:
    Cs = [2.0 ** e for e in range(-5, 16, 2)]
    gammas = [2.0 ** e for e in range(-15, 4, 2)]
    return [(c, g) for c in Cs for g in gammas]


@dataclass
class GridCell:
    C: float
    gamma: float
    mean_f1: float
    fold_f1: list[float]
    converged: bool


@dataclass
class GridSearchReport:
    cells: list[GridCell]
    chosen: tuple[float, float]
    seed: int
    folds: int
    fold_of: list[int]
    model: SvmModel | None = None

    def to_dict(self) -> dict:
        return {
            "seed": self.seed,
            "folds": self.folds,
            "chosen": {"C": self.chosen[0], "gamma": self.chosen[1]},
            "cells": [
                {"C": c.C, "gamma": c.gamma, "mean_f1": c.mean_f1 if c.converged else None, "fold_f1": c.fold_f1, "converged": c.converged}
                for c in self.cells
            ],
            "fold_of": self.fold_of,
        }


def stratified_folds(y: Sequence[int], folds: int, seed: int) -> list[int]:
    """Fold index per sample; every fold holds both classes."""
    y = np.asarray(y)
    if folds < 2:
        raise ValueError("need at least 2 folds")
    for cls in (-1, 1):
        if (y == cls).sum() < folds:
            raise ValueError(f"class {cls:+d} has fewer than {folds} examples; cannot stratify")
    fold_of = np.zeros(len(y), dtype=int)
    splitter = StratifiedKFold(n_splits=folds, shuffle=True, random_state=seed)
    for f, (_, val) in enumerate(splitter.split(np.zeros(len(y)), y)):
        fold_of[val] = f
    return fold_of.tolist()


def _evaluate_cell(X, y, fold_of, folds, C, gamma, tol, max_iter):
    scores = []
    for f in range(folds):
        val = fold_of == f
        try:
            model = train(X[~val], y[~val], C, gamma, tol, max_iter)
        except ConvergenceError:
            return GridCell(C, gamma, float("nan"), scores, False)
        scores.append(prf(y[val], model.predict(X[val])).f1)
    return GridCell(C, gamma, float(np.mean(scores)), scores, True)


def grid_search(X: np.ndarray, y: Sequence[int], grid: Sequence[tuple[float, float]] | None = None,
                folds: int = 5, seed: int = 0, tol: float = 1e-3, max_iter: int | None = None,
                threads: int = 1, schema_hash: str = "") -> GridSearchReport:
    """Pick (C, gamma) by mean cross-validated F1 and refit on all data.

    Ties go to the smaller C, then the smaller gamma, then the earlier cell.
    Cells whose SMO runs do not converge are reported and skipped.
    """
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=float)
    grid = list(grid) if grid is not None else default_grid()
    if not grid:
        raise ValueError("grid must not be empty")
    fold_of = np.asarray(stratified_folds(y, folds, seed))

    def run(cell):
        return _evaluate_cell(X, y, fold_of, folds, cell[0], cell[1], tol, max_iter)

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            cells = list(pool.map(run, grid))
    else:
        cells = [run(cell) for cell in grid]

    ok = [(i, c) for i, c in enumerate(cells) if c.converged]
    for c in cells:
        if not c.converged:
            logger.warning("grid cell C=%g gamma=%g did not converge", c.C, c.gamma)
    if not ok:
        raise ConvergenceError("no grid cell converged")
    _, best = min(ok, key=lambda ic: (-ic[1].mean_f1, ic[1].C, ic[1].gamma, ic[0]))
    model = train(X, y, best.C, best.gamma, tol, max_iter, schema_hash=schema_hash)
    return GridSearchReport(cells, (best.C, best.gamma), seed, folds, fold_of.tolist(), model)
