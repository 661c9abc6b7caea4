"""Surrogate models and explanation extraction.

The linear surrogate is a weighted ridge regression on one target class's
probability, solved through the symmetric positive-definite normal equations
with an unpenalized intercept.  The tree surrogate is a weighted multi-output
regression tree over all class probabilities, sharing the CART core with the
representation module.  Explanations are read straight off the fitted model:
sorted signed coefficients, or one rule per leaf.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.linalg
from sklearn.base import BaseEstimator, RegressorMixin
from sklearn.exceptions import NotFittedError

from .errors import SchemaError, SolverError
from .tree import apply_tree, grow_tree, leaf_paths, predict_tree, \
    tree_from_dict, tree_to_dict


class WeightedRidge(BaseEstimator, RegressorMixin):
    """min over (b0, b): sum_i w_i (y_i - b0 - x_i.b)^2 + alpha * ||b||^2.

    The intercept is never penalized, so a constant target yields exactly
    that constant.  alpha = 0 is ordinary weighted least squares; a singular
    system then raises SolverError advising alpha > 0.
    """

    def __init__(self, alpha=0.01):
        self.alpha = alpha

    def fit(self, X, y, sample_weight=None):
        X = np.asarray(X, dtype=np.float64)
        y = np.asarray(y, dtype=np.float64)
        if X.ndim != 2:
            raise SchemaError("X must be 2-D")
        n, p = X.shape
        if n < 1 or y.shape != (n,):
            raise SchemaError("y must align with X rows")
        if self.alpha < 0:
            raise SchemaError("ridge penalty must be >= 0")
        if sample_weight is None:
            sample_weight = np.ones(n)
        w = np.asarray(sample_weight, dtype=np.float64)
        if w.shape != (n,) or (w < 0).any() or not (w > 0).any():
            raise SchemaError("weights must be nonnegative with some positive")

        A = np.hstack([np.ones((n, 1)), X])
        Aw = A * w[:, None]
        M = A.T @ Aw
        M[1:, 1:] += self.alpha * np.eye(p)
        rhs = Aw.T @ y
        try:
            factor = scipy.linalg.cho_factor(M, lower=True)
            beta = scipy.linalg.cho_solve(factor, rhs)
        except scipy.linalg.LinAlgError:
            raise SolverError(
                "ridge normal equations are singular; set the ridge "
                "penalty lambda > 0") from None
        self.intercept_ = float(beta[0])
        self.coef_ = beta[1:]
        return self

    def predict(self, X):
        if not hasattr(self, "coef_"):
            raise NotFittedError("WeightedRidge is not fitted")
        return self.intercept_ + np.asarray(X, dtype=np.float64) @ self.coef_

    def to_dict(self) -> dict:
        return {"kind": "linear", "alpha": float(self.alpha),
                "intercept": self.intercept_,
                "coefficients": [float(c) for c in self.coef_]}

    @classmethod
    def from_dict(cls, doc: dict) -> "WeightedRidge":
        model = cls(alpha=doc.get("alpha", 0.0))
        model.intercept_ = float(doc["intercept"])
        model.coef_ = np.asarray(doc["coefficients"], dtype=np.float64)
        return model


class TreeSurrogateRegressor(BaseEstimator, RegressorMixin):
    """Weighted multi-output regression tree over class probabilities.

    Leaf predictions are the weighted mean probability vectors of the
    training rows routed to them.
    """

    def __init__(self, max_depth=3, min_leaf=5):
        self.max_depth = max_depth
        self.min_leaf = min_leaf

    def fit(self, X, Y, sample_weight=None, feature_kinds=None):
        X = np.asarray(X, dtype=np.float64)
        Y = np.asarray(Y, dtype=np.float64)
        if Y.ndim == 1:
            Y = Y[:, None]
        if feature_kinds is None:
            feature_kinds = ["numeric"] * X.shape[1]
        self.feature_kinds_ = list(feature_kinds)
        self.n_outputs_ = Y.shape[1]
        self.root_, self.leaves_ = grow_tree(
            X, Y, sample_weight, self.feature_kinds_,
            self.max_depth, self.min_leaf)
        return self

    def _check_fitted(self):
        if not hasattr(self, "root_"):
            raise NotFittedError("TreeSurrogateRegressor is not fitted")

    @property
    def n_leaves(self) -> int:
        self._check_fitted()
        return len(self.leaves_)

    def apply(self, X) -> np.ndarray:
        self._check_fitted()
        return apply_tree(self.root_, X)

    def predict(self, X) -> np.ndarray:
        self._check_fitted()
        return predict_tree(self.root_, self.leaves_, X)

    def to_dict(self) -> dict:
        self._check_fitted()
        return {"kind": "tree", "max_depth": self.max_depth,
                "min_leaf": self.min_leaf, "n_outputs": self.n_outputs_,
                "tree": tree_to_dict(self.root_)}

    @classmethod
    def from_dict(cls, doc: dict) -> "TreeSurrogateRegressor":
        model = cls(max_depth=doc.get("max_depth", 0),
                    min_leaf=doc.get("min_leaf", 1))
        model.root_, model.leaves_ = tree_from_dict(doc["tree"])
        model.n_outputs_ = doc.get("n_outputs", len(model.leaves_[0].value))
        model.feature_kinds_ = None
        return model


@dataclass
class Explanation:
    """What the user reads: sorted attributions or per-leaf rules."""

    kind: str                  # "attribution" | "rules"
    target_class: int
    items: list = field(default_factory=list)
    intercept: float | None = None

    def to_dict(self) -> dict:
        doc = {"kind": self.kind, "target_class": self.target_class,
               "items": [dict(item) for item in self.items]}
        if self.intercept is not None:
            doc["intercept"] = float(self.intercept)
        return doc


def extract_linear_explanation(model: WeightedRidge, descriptions,
                               feature_indices, target_class) -> Explanation:
    """Attribution items sorted by |coefficient| desc, ties by feature index."""
    items = []
    for local, feature_ix in enumerate(feature_indices):
        items.append({
            "feature_index": int(feature_ix),
            "description": descriptions[feature_ix],
            "value": float(model.coef_[local]),
        })
    items.sort(key=lambda item: (-abs(item["value"]), item["feature_index"]))
    return Explanation(kind="attribution", target_class=int(target_class),
                       items=items, intercept=model.intercept_)


def extract_tree_explanation(model: TreeSurrogateRegressor, condition_text,
                             anchor_row, target_class) -> Explanation:
    """One rule per leaf (root-path conjunction); the anchor's leaf first.

    condition_text(feature, op, value) renders one path condition; op is
    "<="/">" for numeric splits and "in"/"not_in" for categorical ones.
    """
    paths = leaf_paths(model.root_)
    anchor_leaf = int(model.apply(np.asarray(anchor_row).reshape(1, -1))[0])

    def rule_text(leaf_id):
        conds = [condition_text(j, op, value)
                 for j, op, value in paths[leaf_id]]
        return " ∧ ".join(conds) if conds else "always"

    order = [anchor_leaf] + [leaf.leaf_id for leaf in model.leaves_
                             if leaf.leaf_id != anchor_leaf]
    items = []
    for leaf_id in order:
        leaf = model.leaves_[leaf_id]
        items.append({
            "leaf_id": int(leaf_id),
            "rule": rule_text(leaf_id),
            "value": [float(v) for v in leaf.value],
            "weight": float(leaf.weight),
            "anchor_leaf": leaf_id == anchor_leaf,
        })
    return Explanation(kind="rules", target_class=int(target_class), items=items)
