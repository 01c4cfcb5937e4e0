"""Scoring and the three-way model comparison report.

Confusion counts, accuracy/precision/recall/F1 (undefined values are
reported as None, never silently zeroed), precision-recall curves with
trapezoidal AUC, percentage metric drops, and the comparison of the rule
engine, decision tree, and graph network on one shared test split —
including the complexity/coupling reduction each model's suggested
refactorings would achieve.
"""

from __future__ import annotations

import io
import json
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .corpus import Dataset, LabeledSample
from .dtree import DTreeModel, predict_batch
from .errors import (
    DimensionMismatchError,
    EmptyInputError,
    NonPositiveBaseError,
    NoPositivesError,
)
from .gcn import GcnModel, predict_graphs, suggest_split
from .metrics import coupling, cyclomatic
from .minipy.nodes import AstTree
from .minipy.parser import parse_source
from .minipy.split import extract_split
from .rules import classify_rules_graph

REPORT_VERSION = "1"


# --- confusion and rates -----------------------------------------------------


@dataclass(frozen=True)
class Confusion:
    tp: int
    fp: int
    tn: int
    fn: int

    @property
    def total(self) -> int:
        return self.tp + self.fp + self.tn + self.fn

    def to_dict(self) -> dict:
        return {"tp": self.tp, "fp": self.fp, "tn": self.tn, "fn": self.fn}


def confusion(preds: Sequence[int], labels: Sequence[int]) -> Confusion:
    """Standard counts; predictions and labels must align."""
    if len(preds) != len(labels):
        raise DimensionMismatchError(
            f"{len(preds)} predictions vs {len(labels)} labels"
        )
    tp = fp = tn = fn = 0
    for p, y in zip(preds, labels):
        if p == 1 and y == 1:
            tp += 1
        elif p == 1 and y == 0:
            fp += 1
        elif p == 0 and y == 0:
            tn += 1
        else:
            fn += 1
    return Confusion(tp=tp, fp=fp, tn=tn, fn=fn)


def prf1(c: Confusion) -> dict[str, float | None]:
    """Accuracy, precision, recall, F1; undefined ratios come back None."""
    total = c.total
    accuracy = (c.tp + c.tn) / total if total > 0 else None
    precision = c.tp / (c.tp + c.fp) if (c.tp + c.fp) > 0 else None
    recall = c.tp / (c.tp + c.fn) if (c.tp + c.fn) > 0 else None
    f1: float | None = None
    if precision is not None and recall is not None and (precision + recall) > 0:
        f1 = 2.0 * precision * recall / (precision + recall)
    return {"accuracy": accuracy, "precision": precision, "recall": recall, "f1": f1}


# --- precision-recall curve ----------------------------------------------------


@dataclass(frozen=True)
class PrPoint:
    threshold: float
    precision: float
    recall: float

    def to_dict(self) -> dict:
        return {
            "threshold": self.threshold,
            "precision": self.precision,
            "recall": self.recall,
        }


@dataclass(frozen=True)
class PrCurve:
    points: tuple[PrPoint, ...]
    auc: float


def pr_curve(scores: Sequence[float], labels: Sequence[int]) -> PrCurve:
    """Precision-recall sweep over every distinct score, descending.

    Tied scores collapse into a single threshold.  AUC is the trapezoid
    over recall, anchored at (recall 0, precision of the first point).
    """
    if len(scores) != len(labels):
        raise DimensionMismatchError(f"{len(scores)} scores vs {len(labels)} labels")
    if len(scores) == 0:
        raise EmptyInputError("pr_curve needs at least one sample")
    n_pos = sum(1 for y in labels if y == 1)
    if n_pos == 0:
        raise NoPositivesError("pr_curve needs at least one positive label")

    order = sorted(range(len(scores)), key=lambda i: (-scores[i], i))
    points: list[PrPoint] = []
    tp = fp = 0
    i = 0
    while i < len(order):
        t = scores[order[i]]
        while i < len(order) and scores[order[i]] == t:
            if labels[order[i]] == 1:
                tp += 1
            else:
                fp += 1
            i += 1
        points.append(
            PrPoint(threshold=t, precision=tp / (tp + fp), recall=tp / n_pos)
        )
    auc = 0.0
    prev_r, prev_p = 0.0, points[0].precision
    for pt in points:
        auc += (pt.recall - prev_r) * (pt.precision + prev_p) / 2.0
        prev_r, prev_p = pt.recall, pt.precision
    return PrCurve(points=tuple(points), auc=auc)


def metric_drop(pre: float, post: float) -> float:
    """Percentage reduction from pre to post; pre must be positive."""
    if pre <= 0:
        raise NonPositiveBaseError(f"drop from non-positive base {pre}")
    return 100.0 * (pre - post) / pre


# --- model comparison -----------------------------------------------------------


@dataclass
class ModelEval:
    name: str
    confusion: Confusion
    rates: dict[str, float | None]
    pr: PrCurve
    complexity_drop_pct: float | None
    coupling_drop_pct: float | None
    n_split_applied: int

    def to_dict(self) -> dict:
        return {
            "confusion": self.confusion.to_dict(),
            "accuracy": self.rates["accuracy"],
            "precision": self.rates["precision"],
            "recall": self.rates["recall"],
            "f1": self.rates["f1"],
            "pr_auc": self.pr.auc,
            "complexity_drop_pct": self.complexity_drop_pct,
            "coupling_drop_pct": self.coupling_drop_pct,
            "n_split_applied": self.n_split_applied,
            "pr_points": [p.to_dict() for p in self.pr.points],
        }


@dataclass
class ComparisonReport:
    seed: int
    corpus: dict
    models: dict[str, ModelEval]

    def to_dict(self) -> dict:
        return {
            "version": REPORT_VERSION,
            "seed": self.seed,
            "corpus": self.corpus,
            "models": {name: ev.to_dict() for name, ev in self.models.items()},
        }


def _split_plan(tree: AstTree, node_id: int) -> tuple[str, int] | None:
    """(function name, split index) for a node id, or None if not legal."""
    if not 0 <= node_id < len(tree.nodes):
        return None
    fn_id = tree.enclosing_function(node_id)
    if fn_id < 0:
        return None
    fn = tree.nodes[fn_id]
    k = next((i for i, s in enumerate(fn.body()) if s.id == node_id), None)
    if k is None or k < 1 or fn.name is None:
        return None
    return fn.name, k


def _drop_stats(
    samples: list[LabeledSample],
    preds: np.ndarray,
    split_for: dict[int, int | None],
) -> tuple[float | None, float | None, int]:
    """Mean complexity/coupling drops over predicted-refactor samples.

    ``split_for`` maps sample position to the node id to split at (the
    model's suggestion, or the labeled oracle split).  Samples without
    source text, without a legal split, or with a zero pre-metric are
    skipped; None means no sample could be processed at all.
    """
    pre_cc: list[float] = []
    post_cc: list[float] = []
    pre_cp: list[float] = []
    post_cp: list[float] = []
    applied = 0
    for pos, sample in enumerate(samples):
        if preds[pos] != 1 or sample.source is None:
            continue
        node_id = split_for.get(pos)
        if node_id is None:
            continue
        tree = parse_source(sample.source)
        plan = _split_plan(tree, node_id)
        if plan is None:
            continue
        try:
            after = extract_split(tree, plan[0], plan[1])
        except Exception:
            continue
        pre = max((cyclomatic(f) for f in tree.functions()), default=0)
        post = max((cyclomatic(f) for f in after.functions()), default=0)
        pre_cc.append(float(pre))
        post_cc.append(float(post))
        pre_cp.append(float(coupling(tree)))
        post_cp.append(float(coupling(after)))
        applied += 1
    cc_drop: float | None = None
    cp_drop: float | None = None
    if pre_cc and float(np.mean(pre_cc)) > 0:
        cc_drop = metric_drop(float(np.mean(pre_cc)), float(np.mean(post_cc)))
    if pre_cp and float(np.mean(pre_cp)) > 0:
        cp_drop = metric_drop(float(np.mean(pre_cp)), float(np.mean(post_cp)))
    return cc_drop, cp_drop, applied


def compare(dataset: Dataset, dtree: DTreeModel, gcn: GcnModel) -> ComparisonReport:
    """Evaluate rules, tree, and network on the dataset's test split."""
    test_idx = list(dataset.split["test"])
    samples = [dataset.samples[i] for i in test_idx]
    labels = [s.label for s in samples]

    rules_preds = np.array(
        [classify_rules_graph(s.graph, s.flat) for s in samples], dtype=np.int64
    )
    rules_scores = rules_preds.astype(np.float64)

    X = np.array([s.flat.values for s in samples], dtype=np.float64)
    dtree_scores = predict_batch(dtree, X)
    dtree_preds = (dtree_scores >= 0.5).astype(np.int64)

    gcn_scores = predict_graphs(gcn, [s.graph for s in samples])
    gcn_preds = (gcn_scores >= 0.5).astype(np.int64)

    # labeled splits serve as the oracle for models that cannot localize
    oracle_split = {pos: s.split_node for pos, s in enumerate(samples)}
    gcn_split: dict[int, int | None] = {}
    for pos, s in enumerate(samples):
        if gcn_preds[pos] != 1:
            gcn_split[pos] = None
            continue
        suggestion = suggest_split(gcn, s.graph)
        gcn_split[pos] = suggestion.node_id if suggestion.eligible else None

    models: dict[str, ModelEval] = {}
    for name, preds, scores, split_for in (
        ("rules", rules_preds, rules_scores, oracle_split),
        ("dtree", dtree_preds, dtree_scores, oracle_split),
        ("gnn", gcn_preds, gcn_scores, gcn_split),
    ):
        conf = confusion(list(preds), labels)
        curve = pr_curve(list(float(v) for v in scores), labels)
        cc_drop, cp_drop, applied = _drop_stats(samples, preds, split_for)
        models[name] = ModelEval(
            name=name,
            confusion=conf,
            rates=prf1(conf),
            pr=curve,
            complexity_drop_pct=cc_drop,
            coupling_drop_pct=cp_drop,
            n_split_applied=applied,
        )

    corpus = {
        "n_samples": len(dataset.samples),
        "n_train": len(dataset.split["train"]),
        "n_test": len(test_idx),
        "provenance": dataset.provenance.to_doc(),
    }
    return ComparisonReport(seed=dataset.seed, corpus=corpus, models=models)


# --- serialization ---------------------------------------------------------------


def report_to_json(report: ComparisonReport) -> str:
    """Canonical JSON: fixed key order, trailing newline, byte-stable."""
    return json.dumps(report.to_dict(), indent=2, sort_keys=True) + "\n"


def _fmt(value: float | None, decimals: int) -> str:
    if value is None:
        return ""
    return f"{value:.{decimals}f}"


def report_to_csv(report: ComparisonReport) -> str:
    """Summary table: one row per model, drops at one decimal."""
    out = io.StringIO()
    out.write("model,accuracy,precision,recall,f1,complexity_drop,coupling_drop\n")
    for name in ("rules", "dtree", "gnn"):
        ev = report.models[name]
        out.write(
            ",".join(
                [
                    name,
                    _fmt(ev.rates["accuracy"], 4),
                    _fmt(ev.rates["precision"], 4),
                    _fmt(ev.rates["recall"], 4),
                    _fmt(ev.rates["f1"], 4),
                    _fmt(ev.complexity_drop_pct, 1),
                    _fmt(ev.coupling_drop_pct, 1),
                ]
            )
            + "\n"
        )
    return out.getvalue()


def pr_points_to_csv(report: ComparisonReport, model: str) -> str:
    """Curve points for one model as threshold,precision,recall rows."""
    ev = report.models[model]
    out = io.StringIO()
    out.write("threshold,precision,recall\n")
    for pt in ev.pr.points:
        out.write(f"{pt.threshold:.6f},{pt.precision:.6f},{pt.recall:.6f}\n")
    return out.getvalue()
