"""Binary decision tree on flat features, grown with Gini impurity.

Candidate thresholds are midpoints between consecutive distinct sorted
feature values; the best positive Gini gain wins, with ties broken by
lowest feature index then lowest threshold, so training is fully
deterministic.  Descent sends x[f] <= t to the left child.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .errors import CheckpointError, DataError, EmptyInputError

DEFAULT_MAX_DEPTH = 20
DEFAULT_MIN_SAMPLES_SPLIT = 5

# ten integer depths spanning the tuned 5..25 range
GRID_DEPTHS: tuple[int, ...] = (5, 7, 9, 12, 14, 16, 18, 20, 23, 25)

CHECKPOINT_VERSION = "1"


def gini(labels: Sequence[int]) -> float:
    """Gini impurity 1 - p0^2 - p1^2 of binary labels."""
    n = len(labels)
    if n == 0:
        raise EmptyInputError("gini of empty labels")
    ones = sum(1 for v in labels if v == 1)
    p1 = ones / n
    p0 = 1.0 - p1
    return 1.0 - p0 * p0 - p1 * p1


@dataclass
class DTreeParams:
    max_depth: int | None = DEFAULT_MAX_DEPTH  # None = unbounded
    min_samples_split: int = DEFAULT_MIN_SAMPLES_SPLIT

    def to_dict(self) -> dict:
        return {
            "max_depth": self.max_depth,
            "min_samples_split": self.min_samples_split,
        }


@dataclass
class DTreeModel:
    """Nodes in preorder: internal {feature_index, threshold, left, right} or
    leaf {prob_refactor}."""

    nodes: list[dict]
    params: DTreeParams
    n_features: int

    def depth(self) -> int:
        def walk(idx: int) -> int:
            node = self.nodes[idx]
            if "prob_refactor" in node:
                return 0
            return 1 + max(walk(node["left"]), walk(node["right"]))

        return walk(0)


def _best_split(X: np.ndarray, y: np.ndarray) -> tuple[float, int, float] | None:
    """(gain, feature, threshold) of the best candidate, None if no gain > 0."""
    n = len(y)
    parent = gini(list(y))
    best: tuple[float, int, float] | None = None
    for f in range(X.shape[1]):
        col = X[:, f]
        order = np.argsort(col, kind="stable")
        vs = col[order]
        ys = y[order]
        ones_left = np.cumsum(ys)
        total_ones = ones_left[-1]
        for i in range(n - 1):
            if vs[i] == vs[i + 1]:
                continue
            t = (vs[i] + vs[i + 1]) / 2.0
            nl = i + 1
            nr = n - nl
            ol = int(ones_left[i])
            pl = ol / nl
            pr = (total_ones - ol) / nr
            gl = 1.0 - pl * pl - (1 - pl) * (1 - pl)
            gr = 1.0 - pr * pr - (1 - pr) * (1 - pr)
            gain = parent - (nl / n) * gl - (nr / n) * gr
            if gain > 0.0 and (best is None or gain > best[0]):
                best = (gain, f, t)
    return best


def train_dtree(
    X: Sequence[Sequence[float]],
    y: Sequence[int],
    params: DTreeParams | None = None,
    seed: int = 0,
) -> DTreeModel:
    """Grow a tree greedily; deterministic for given inputs (seed unused)."""
    params = params or DTreeParams()
    Xa = np.asarray(X, dtype=np.float64)
    ya = np.asarray(y, dtype=np.int64)
    if Xa.ndim != 2 or len(ya) != Xa.shape[0]:
        raise DataError("X must be n x d with one label per row")
    if Xa.shape[0] == 0:
        raise EmptyInputError("training on empty data")
    if not np.all(np.isfinite(Xa)):
        raise DataError("features must be finite")
    nodes: list[dict] = []

    def build(rows: np.ndarray, depth: int) -> int:
        idx = len(nodes)
        nodes.append({})
        ones = int(ya[rows].sum())
        n = len(rows)
        prob = ones / n
        stop = (
            ones == 0
            or ones == n
            or n < params.min_samples_split
            or (params.max_depth is not None and depth >= params.max_depth)
        )
        split = None if stop else _best_split(Xa[rows], ya[rows])
        if split is None:
            nodes[idx] = {"prob_refactor": prob}
            return idx
        _, f, t = split
        mask = Xa[rows, f] <= t
        left = build(rows[mask], depth + 1)
        right = build(rows[~mask], depth + 1)
        nodes[idx] = {"feature_index": int(f), "threshold": float(t), "left": left, "right": right}
        return idx

    build(np.arange(len(ya)), 0)
    return DTreeModel(nodes=nodes, params=params, n_features=Xa.shape[1])


def predict_dtree(model: DTreeModel, x: Sequence[float]) -> float:
    """Leaf probability reached by threshold descent (x[f] <= t goes left)."""
    if len(x) != model.n_features:
        raise DataError(f"expected {model.n_features} features, got {len(x)}")
    node = model.nodes[0]
    while "prob_refactor" not in node:
        node = model.nodes[node["left"] if x[node["feature_index"]] <= node["threshold"] else node["right"]]
    return float(node["prob_refactor"])


def predict_batch(model: DTreeModel, X: Sequence[Sequence[float]]) -> np.ndarray:
    return np.array([predict_dtree(model, row) for row in X], dtype=np.float64)


# --- checkpoints ------------------------------------------------------------------


def dtree_to_doc(model: DTreeModel) -> dict:
    return {
        "version": CHECKPOINT_VERSION,
        "kind": "dtree",
        "params": model.params.to_dict(),
        "n_features": model.n_features,
        "nodes": model.nodes,
    }


def dtree_from_doc(doc: dict) -> DTreeModel:
    if not isinstance(doc, dict) or doc.get("version") != CHECKPOINT_VERSION:
        raise CheckpointError("bad decision-tree checkpoint version")
    if doc.get("kind") != "dtree":
        raise CheckpointError("checkpoint is not a decision tree")
    try:
        params = DTreeParams(
            max_depth=doc["params"]["max_depth"],
            min_samples_split=doc["params"]["min_samples_split"],
        )
        model = DTreeModel(
            nodes=list(doc["nodes"]), params=params, n_features=int(doc["n_features"])
        )
    except (KeyError, TypeError) as exc:
        raise CheckpointError(f"malformed decision-tree checkpoint: {exc}") from exc
    if model.n_features < 1:
        raise CheckpointError(f"n_features must be >= 1, got {model.n_features}")
    if not model.nodes:
        raise CheckpointError("checkpoint has no nodes")
    count = len(model.nodes)
    for i, node in enumerate(model.nodes):
        if "prob_refactor" in node:
            if not 0.0 <= node["prob_refactor"] <= 1.0:
                raise CheckpointError("leaf probability outside [0,1]")
        elif all(k in node for k in ("feature_index", "threshold", "left", "right")):
            if not 0 <= node["feature_index"] < model.n_features:
                raise CheckpointError(f"node {i} feature index out of range")
            if not math.isfinite(node["threshold"]):
                raise CheckpointError(f"node {i} threshold is not finite")
            for side in ("left", "right"):
                child = node[side]
                if not isinstance(child, int) or not i < child < count:
                    raise CheckpointError(f"node {i} {side} child {child!r} invalid")
        else:
            raise CheckpointError("internal node missing fields")
    return model


def save_dtree(model: DTreeModel, path: str) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(dtree_to_doc(model), fh, indent=2, sort_keys=True)
        fh.write("\n")


def load_dtree(path: str) -> DTreeModel:
    with open(path, encoding="utf-8") as fh:
        return dtree_from_doc(json.load(fh))


# --- depth grid search -----------------------------------------------------------


def _f1(preds: np.ndarray, labels: np.ndarray) -> float:
    tp = int(np.sum((preds == 1) & (labels == 1)))
    fp = int(np.sum((preds == 1) & (labels == 0)))
    fn = int(np.sum((preds == 0) & (labels == 1)))
    denom = 2 * tp + fp + fn
    return 2 * tp / denom if denom else 0.0


def grid_search_dtree(
    X: Sequence[Sequence[float]],
    y: Sequence[int],
    folds: Sequence[int],
    depths: Sequence[int] = GRID_DEPTHS,
) -> tuple[DTreeParams, list[dict]]:
    """Pick max_depth by k-fold mean F1; ties go to the smallest depth.

    ``folds`` assigns each row to a fold id (as produced by the corpus
    k-fold splitter).  Returns the winning params and the score table.
    """
    Xa = np.asarray(X, dtype=np.float64)
    ya = np.asarray(y, dtype=np.int64)
    fa = np.asarray(folds, dtype=np.int64)
    if len(fa) != len(ya):
        raise DataError("fold assignment length mismatch")
    table: list[dict] = []
    best: tuple[float, int] | None = None
    for depth in depths:
        scores = []
        for fold in sorted(set(int(v) for v in fa)):
            test_mask = fa == fold
            if test_mask.all() or not test_mask.any():
                continue
            model = train_dtree(
                Xa[~test_mask], ya[~test_mask], DTreeParams(max_depth=depth)
            )
            preds = (predict_batch(model, Xa[test_mask]) > 0.5).astype(np.int64)
            scores.append(_f1(preds, ya[test_mask]))
        mean_f1 = float(np.mean(scores)) if scores else 0.0
        table.append({"max_depth": depth, "mean_f1": mean_f1})
        if best is None or mean_f1 > best[0]:
            best = (mean_f1, depth)
    assert best is not None
    return DTreeParams(max_depth=best[1]), table
