"""The decision-tree baseline: Gini splits over the 35 flat features.

Grown from scratch — greedy best-gain splits on midpoint thresholds,
depth and minimum-split stopping, deterministic tie-breaking — and
serialized to a plain-JSON checkpoint.
"""

import numpy as np

from refactorlab.corpus import synth_corpus
from refactorlab.dtree import (
    DTreeParams,
    dtree_from_doc,
    dtree_to_doc,
    predict_batch,
    train_dtree,
)
from refactorlab.metrics import FLAT_FEATURE_NAMES

ds = synth_corpus(400, seed=3)
X = [s.flat.values for s in ds.samples]
y = [s.label for s in ds.samples]
tr, te = ds.split["train"], ds.split["test"]

# --- train on the train split ------------------------------------------------

model = train_dtree([X[i] for i in tr], [y[i] for i in tr], DTreeParams())
print(f"tree has {len(model.nodes)} nodes "
      f"(max_depth {model.params.max_depth}, "
      f"min_samples_split {model.params.min_samples_split})")

root = model.nodes[0]
print(f"root split: {FLAT_FEATURE_NAMES[root['feature_index']]} "
      f"<= {root['threshold']:.2f}")

# --- accuracy on both splits --------------------------------------------------

for name, idx in (("train", tr), ("test", te)):
    preds = predict_batch(model, [X[i] for i in idx]) >= 0.5
    acc = float(np.mean(preds == np.array([y[i] for i in idx], dtype=bool)))
    print(f"{name} accuracy: {acc:.3f}")

# --- checkpoints are plain JSON ------------------------------------------------

doc = dtree_to_doc(model)
clone = dtree_from_doc(doc)
same = np.array_equal(predict_batch(clone, X), predict_batch(model, X))
print("checkpoint round trip preserves every prediction:", same)
