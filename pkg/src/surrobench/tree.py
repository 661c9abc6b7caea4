"""Greedy weighted multi-output regression tree (CART-style) induction.

One induction core serves both the tree-partition interpretable
representation and the tree surrogate model.  Splits minimize the weighted
sum-of-squared-error of the multi-output mean over a finite candidate set:
midpoints between consecutive distinct sorted values for numeric features and
single-category-vs-rest for categorical ones.  Ties break deterministically
to the lowest feature index, then the lowest threshold (category id), so the
same data grows the same tree on every platform.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import SchemaError

_REL_GAIN_TOL = 1e-12


@dataclass
class TreeNode:
    feature: int = -1                # -1 marks a leaf
    threshold: float = 0.0           # numeric routing: x <= threshold -> left
    categories: tuple = ()           # categorical routing: x in categories -> left
    left: "TreeNode | None" = None
    right: "TreeNode | None" = None
    leaf_id: int = -1
    value: np.ndarray = field(default=None, repr=False)
    impurity: float = 0.0
    n_samples: int = 0
    weight: float = 0.0

    @property
    def is_leaf(self):
        return self.feature < 0


def _node_stats(Y, w):
    s0 = float(w.sum())
    s1 = (w[:, None] * Y).sum(axis=0)
    s2 = float((w * (Y * Y).sum(axis=1)).sum())
    sse = max(0.0, s2 - float(s1 @ s1) / s0) if s0 > 0 else 0.0
    return s0, s1, s2, sse


def _best_numeric_split(x, Y, w, rowsq, min_leaf, parent):
    order = np.argsort(x, kind="stable")
    xs = x[order]
    n = xs.shape[0]
    if xs[0] == xs[-1]:
        return None
    ws = w[order]
    cw = np.cumsum(ws)
    cwy = np.cumsum(ws[:, None] * Y[order], axis=0)
    cwy2 = np.cumsum(ws * rowsq[order])
    W, SY, SY2 = cw[-1], cwy[-1], cwy2[-1]

    cuts = np.nonzero(xs[:-1] != xs[1:])[0]  # left = sorted[:t+1]
    counts = cuts + 1
    valid = (counts >= min_leaf) & (n - counts >= min_leaf)
    cuts = cuts[valid]
    if cuts.size == 0:
        return None

    w_left = cw[cuts]
    w_right = W - w_left
    sy_left = cwy[cuts]
    sy_right = SY - sy_left
    sse_left = np.maximum(0.0, cwy2[cuts] - (sy_left * sy_left).sum(axis=1) / w_left)
    sse_right = np.maximum(0.0, (SY2 - cwy2[cuts])
                           - (sy_right * sy_right).sum(axis=1) / w_right)
    gains = parent - (sse_left + sse_right)
    best = int(np.argmax(gains))  # first max = lowest threshold on ties
    t = cuts[best]
    return float(gains[best]), float((xs[t] + xs[t + 1]) / 2.0), None


def _best_categorical_split(x, Y, w, rowsq, min_leaf, parent):
    n = x.shape[0]
    best = None
    for cat in np.unique(x):  # ascending category id = threshold tie order
        mask = x == cat
        count = int(mask.sum())
        if count < min_leaf or n - count < min_leaf:
            continue
        w0 = float(w[mask].sum())
        w1 = float(w.sum()) - w0
        if w0 <= 0 or w1 <= 0:
            continue
        sy0 = (w[mask, None] * Y[mask]).sum(axis=0)
        sy2_0 = float((w[mask] * rowsq[mask]).sum())
        sse0 = max(0.0, sy2_0 - float(sy0 @ sy0) / w0)
        sy_all = (w[:, None] * Y).sum(axis=0)
        sy1 = sy_all - sy0
        sse1 = max(0.0, float((w * rowsq).sum()) - sy2_0 - float(sy1 @ sy1) / w1)
        gain = parent - (sse0 + sse1)
        if best is None or gain > best[0]:
            best = (float(gain), None, (int(cat),))
    return best


def grow_tree(X, Y, weights, feature_kinds, max_depth, min_leaf):
    """Induce a tree; returns (root, leaves in DFS preorder).

    feature_kinds[j] is "numeric" or "categorical"; categorical columns hold
    category ids.  Splits happen only on strict impurity improvement.
    """
    X = np.asarray(X, dtype=np.float64)
    Y = np.asarray(Y, dtype=np.float64)
    if Y.ndim == 1:
        Y = Y[:, None]
    if X.ndim != 2 or X.shape[0] == 0:
        raise SchemaError("tree induction needs a non-empty 2-D matrix")
    if Y.shape[0] != X.shape[0]:
        raise SchemaError("targets must be row-aligned with inputs")
    if weights is None:
        weights = np.ones(X.shape[0])
    weights = np.asarray(weights, dtype=np.float64)
    if weights.shape != (X.shape[0],):
        raise SchemaError("weights must be row-aligned with inputs")
    if (weights < 0).any() or weights.sum() <= 0:
        raise SchemaError("weights must be nonnegative with positive total")
    if max_depth < 0 or min_leaf < 1:
        raise SchemaError("max_depth >= 0 and min_leaf >= 1 required")

    leaves = []

    def build(index, depth):
        Xn, Yn, wn = X[index], Y[index], weights[index]
        s0, s1, _, sse = _node_stats(Yn, wn)
        value = s1 / s0 if s0 > 0 else Yn.mean(axis=0)
        # a weighted mean lies in the columnwise hull; clamp float drift back
        value = np.clip(value, Yn.min(axis=0), Yn.max(axis=0))
        node = TreeNode(value=value, impurity=sse,
                        n_samples=index.shape[0], weight=s0)
        if depth >= max_depth or index.shape[0] < 2 * min_leaf or sse <= 0.0:
            node.leaf_id = len(leaves)
            leaves.append(node)
            return node

        rowsq = (Yn * Yn).sum(axis=1)
        best = None  # (gain, feature, threshold, categories)
        for j in range(X.shape[1]):
            if feature_kinds[j] == "numeric":
                found = _best_numeric_split(Xn[:, j], Yn, wn, rowsq, min_leaf, sse)
            else:
                found = _best_categorical_split(Xn[:, j], Yn, wn, rowsq, min_leaf, sse)
            if found is None:
                continue
            gain = found[0]
            if best is None or gain > best[0]:  # strict: lowest feature wins ties
                best = (gain, j, found[1], found[2])

        if best is None or best[0] <= sse * _REL_GAIN_TOL:
            node.leaf_id = len(leaves)
            leaves.append(node)
            return node

        _, j, threshold, categories = best
        if categories is None:
            go_left = Xn[:, j] <= threshold
            node.threshold = threshold
        else:
            go_left = np.isin(Xn[:, j], categories)
            node.categories = categories
        node.feature = j
        node.left = build(index[go_left], depth + 1)
        node.right = build(index[~go_left], depth + 1)
        return node

    root = build(np.arange(X.shape[0]), 0)
    return root, leaves


def apply_tree(root: TreeNode, X) -> np.ndarray:
    """Route rows to leaf ids; deterministic given (rows, tree)."""
    X = np.asarray(X, dtype=np.float64)
    if X.ndim == 1:
        X = X.reshape(1, -1)
    out = np.empty(X.shape[0], dtype=np.int64)

    def route(node, index):
        if node.is_leaf:
            out[index] = node.leaf_id
            return
        col = X[index, node.feature]
        if node.categories:
            go_left = np.isin(col, node.categories)
        else:
            go_left = col <= node.threshold
        route(node.left, index[go_left])
        route(node.right, index[~go_left])

    route(root, np.arange(X.shape[0]))
    return out


def predict_tree(root: TreeNode, leaves, X) -> np.ndarray:
    values = np.vstack([leaf.value for leaf in leaves])
    return values[apply_tree(root, X)]


def leaf_paths(root: TreeNode) -> dict:
    """leaf id -> list of (feature, op, value) conditions along the root path.

    op is one of "<=", ">" (numeric) or "in", "not_in" (categorical).
    """
    paths = {}

    def walk(node, path):
        if node.is_leaf:
            paths[node.leaf_id] = list(path)
            return
        if node.categories:
            walk(node.left, path + [(node.feature, "in", node.categories)])
            walk(node.right, path + [(node.feature, "not_in", node.categories)])
        else:
            walk(node.left, path + [(node.feature, "<=", node.threshold)])
            walk(node.right, path + [(node.feature, ">", node.threshold)])

    walk(root, [])
    return paths


def tree_to_dict(node: TreeNode) -> dict:
    if node.is_leaf:
        return {"leaf_id": node.leaf_id,
                "value": [float(v) for v in np.atleast_1d(node.value)],
                "n_samples": node.n_samples,
                "weight": float(node.weight)}
    doc = {"feature": node.feature,
           "left": tree_to_dict(node.left),
           "right": tree_to_dict(node.right)}
    if node.categories:
        doc["categories"] = [int(c) for c in node.categories]
    else:
        doc["threshold"] = float(node.threshold)
    return doc


def tree_from_dict(doc: dict):
    """Rebuild (root, leaves) from tree_to_dict output."""
    leaves = {}

    def build(entry):
        if "leaf_id" in entry:
            node = TreeNode(leaf_id=entry["leaf_id"],
                            value=np.asarray(entry["value"], dtype=np.float64),
                            n_samples=entry.get("n_samples", 0),
                            weight=entry.get("weight", 0.0))
            leaves[node.leaf_id] = node
            return node
        node = TreeNode(feature=entry["feature"])
        if "categories" in entry:
            node.categories = tuple(entry["categories"])
        else:
            node.threshold = entry["threshold"]
        node.left = build(entry["left"])
        node.right = build(entry["right"])
        return node

    root = build(doc)
    return root, [leaves[i] for i in sorted(leaves)]
