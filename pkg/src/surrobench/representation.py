"""Interpretable representations: quartile bins and tree partitions.

Both representations re-encode raw rows into binary indicator vectors that a
human can read: "falls in the same quartile bin as the explained instance",
"carries the same category", "lands in the same tree leaf".  The bits form
the design matrix the surrogate model is trained on, and the per-bit
descriptions become the explanation vocabulary.
"""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.exceptions import NotFittedError

from .data import TabularDataset
from .errors import SchemaError
from .tree import apply_tree, grow_tree, leaf_paths, tree_to_dict


def bin_index(value, boundaries):
    """Quartile bin of a scalar: (-inf,b1], (b1,b2], (b2,b3], (b3,inf).

    Values equal to a boundary belong to the lower bin; degenerate equal
    boundaries collapse the lower bins to empty.
    """
    if np.isnan(value):
        raise SchemaError("bin_index: NaN value")
    b1, b2, b3 = boundaries
    if value <= b1:
        return 0
    if value <= b2:
        return 1
    if value <= b3:
        return 2
    return 3


def _bin_column(values, boundaries):
    values = np.asarray(values, dtype=np.float64)
    if np.isnan(values).any():
        raise SchemaError("bin_index: NaN value")
    return np.searchsorted(np.asarray(boundaries), values, side="left")


def _fmt(value: float) -> str:
    return f"{value:.6g}"


class QuartileDiscretiser(BaseEstimator):
    """Per-feature quartile discretisation; categorical features pass through."""

    def __init__(self):
        self.boundaries_ = None

    def fit(self, dataset: TabularDataset):
        boundaries = []
        constant = []
        for spec in dataset.schema:
            if spec.is_numeric:
                stats = dataset.stats[spec.name]
                b = (stats["q25"], stats["q50"], stats["q75"])
                boundaries.append(b)
                constant.append(b[0] == b[2] == stats["min"] == stats["max"])
            else:
                boundaries.append(None)  # pass-through
                constant.append(False)
        self.schema_ = dataset.schema
        self.boundaries_ = boundaries
        self.constant_ = constant
        return self

    def _check_fitted(self):
        if self.boundaries_ is None:
            raise NotFittedError("QuartileDiscretiser is not fitted")

    def transform(self, X) -> np.ndarray:
        """Rows -> per-feature bin ids (categorical columns keep their ids)."""
        self._check_fitted()
        X = np.asarray(X, dtype=np.float64)
        if X.ndim == 1:
            X = X.reshape(1, -1)
        if X.shape[1] != len(self.schema_):
            raise SchemaError("row width does not match the fitted schema")
        out = np.empty_like(X, dtype=np.int64)
        for j, b in enumerate(self.boundaries_):
            out[:, j] = _bin_column(X[:, j], b) if b is not None \
                else X[:, j].astype(np.int64)
        return out

    def encode(self, X, anchor_values) -> np.ndarray:
        """Same-bin binary encoding: bit j = 1 iff row j-th feature shares the
        anchor's quartile bin (numeric) or category (categorical)."""
        bins = self.transform(X)
        anchor_bins = self.transform(np.asarray(anchor_values).reshape(1, -1))[0]
        return (bins == anchor_bins).astype(np.float64)

    def descriptions(self, anchor_values) -> list:
        """Human-readable meaning of each same-bin bit for this anchor."""
        self._check_fitted()
        anchor_bins = self.transform(np.asarray(anchor_values).reshape(1, -1))[0]
        out = []
        for j, spec in enumerate(self.schema_):
            if spec.is_numeric:
                b1, b2, b3 = self.boundaries_[j]
                if self.constant_[j]:
                    out.append(f"{spec.name} = {_fmt(b1)}")
                    continue
                texts = (f"{spec.name} ≤ {_fmt(b1)}",
                         f"{_fmt(b1)} < {spec.name} ≤ {_fmt(b2)}",
                         f"{_fmt(b2)} < {spec.name} ≤ {_fmt(b3)}",
                         f"{spec.name} > {_fmt(b3)}")
                out.append(texts[anchor_bins[j]])
            else:
                category = spec.categories[int(anchor_bins[j])]
                out.append(f"{spec.name} = {category}")
        return out

    def n_bins(self, j) -> int:
        self._check_fitted()
        spec = self.schema_[j]
        return 4 if spec.is_numeric else len(spec.categories)


class TreePartition(BaseEstimator):
    """Supervised partition of the feature space by a multi-output CART tree.

    Fit on sampled rows labelled by the black box, so leaves track local
    black-box behaviour rather than the training distribution.  random_state
    is accepted for interface stability; induction is fully deterministic.
    """

    def __init__(self, max_depth=3, min_leaf=5, random_state=None):
        self.max_depth = max_depth
        self.min_leaf = min_leaf
        self.random_state = random_state

    def fit(self, X, Y, sample_weight=None, feature_kinds=None):
        X = np.asarray(X, dtype=np.float64)
        if X.ndim != 2 or X.shape[0] == 0:
            raise SchemaError("tree partition needs non-empty 2-D rows")
        if feature_kinds is None:
            feature_kinds = ["numeric"] * X.shape[1]
        self.feature_kinds_ = list(feature_kinds)
        self.root_, self.leaves_ = grow_tree(
            X, Y, sample_weight, self.feature_kinds_,
            self.max_depth, self.min_leaf)
        return self

    def _check_fitted(self):
        if not hasattr(self, "root_"):
            raise NotFittedError("TreePartition is not fitted")

    @property
    def n_leaves(self) -> int:
        self._check_fitted()
        return len(self.leaves_)

    def apply(self, X) -> np.ndarray:
        self._check_fitted()
        return apply_tree(self.root_, X)

    def encode(self, X, anchor_values, mode="one_hot") -> np.ndarray:
        """same_leaf: one bit, 1 iff the row lands in the anchor's leaf.
        one_hot: one bit per leaf, exactly one set."""
        self._check_fitted()
        ids = self.apply(X)
        if mode == "same_leaf":
            anchor_leaf = int(self.apply(np.asarray(anchor_values).reshape(1, -1))[0])
            return (ids == anchor_leaf).astype(np.float64).reshape(-1, 1)
        if mode == "one_hot":
            out = np.zeros((ids.shape[0], self.n_leaves))
            out[np.arange(ids.shape[0]), ids] = 1.0
            return out
        raise SchemaError(f"unknown encode mode '{mode}'")

    def leaf_rules(self, schema) -> list:
        """Per-leaf rule text: conjunction of root-path conditions."""
        self._check_fitted()
        paths = leaf_paths(self.root_)
        rules = []
        for leaf in self.leaves_:
            conds = []
            for j, op, value in paths[leaf.leaf_id]:
                spec = schema[j]
                if op == "<=":
                    conds.append(f"{spec.name} ≤ {_fmt(value)}")
                elif op == ">":
                    conds.append(f"{spec.name} > {_fmt(value)}")
                else:
                    names = ", ".join(spec.categories[int(c)] for c in value)
                    symbol = "=" if op == "in" else "≠"
                    conds.append(f"{spec.name} {symbol} {names}")
            rules.append(" ∧ ".join(conds) if conds else "always")
        return rules

    def descriptions(self, schema, anchor_values, mode="one_hot") -> list:
        rules = self.leaf_rules(schema)
        if mode == "same_leaf":
            anchor_leaf = int(self.apply(np.asarray(anchor_values).reshape(1, -1))[0])
            return [f"leaf {anchor_leaf}: {rules[anchor_leaf]}"]
        return [f"leaf {i}: {rule}" for i, rule in enumerate(rules)]

    def to_dict(self) -> dict:
        self._check_fitted()
        return {"max_depth": self.max_depth, "min_leaf": self.min_leaf,
                "tree": tree_to_dict(self.root_)}
