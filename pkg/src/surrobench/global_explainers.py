"""Dataset-level explainers: permutation importance, ICE and PD curves.

Permutation importance reports the accuracy drop (baseline minus permuted)
per feature over seeded repeats; ICE fixes one numeric feature across a grid
and traces each instance's target-class probability; partial dependence is
the pointwise mean of the ICE matrix and is only ever computed from it.
The input dataset is never mutated: all work happens on copies.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .data import TabularDataset
from .errors import SchemaError
from .rng import CounterRng


@dataclass
class PermutationImportanceResult:
    baseline_score: float
    metric: str
    n_repeats: int
    seed: int
    features: list  # per feature: name, mean_drop, std_drop, drops

    def to_dict(self) -> dict:
        return {
            "baseline_score": float(self.baseline_score),
            "metric": self.metric,
            "n_repeats": int(self.n_repeats),
            "seed": int(self.seed),
            "features": [dict(f) for f in self.features],
        }


def _accuracy(model, values, label_indices) -> float:
    predicted = model.predict_proba(values).argmax(axis=1)
    return float((predicted == label_indices).mean())


def permutation_importance(model, dataset: TabularDataset, labels,
                           metric="accuracy", n_repeats=10,
                           seed=0) -> PermutationImportanceResult:
    """Per-feature mean/std of the score drop over seeded column shuffles.

    labels are class names or indices aligned with dataset rows.  Each
    (feature, repeat) pair draws its permutation from a derived stream, so
    results do not depend on evaluation order.
    """
    if metric != "accuracy":
        raise SchemaError(f"unsupported metric '{metric}'")
    if n_repeats < 1:
        raise SchemaError("n_repeats must be >= 1")
    labels = list(labels)
    if len(labels) != dataset.n_rows:
        raise SchemaError("labels must align with dataset rows")
    label_indices = np.array([model.class_index(l) for l in labels])

    baseline = _accuracy(model, dataset.values, label_indices)
    rng = CounterRng(seed)
    features = []
    for j, spec in enumerate(dataset.schema):
        drops = []
        for repeat in range(n_repeats):
            permutation = rng.derive(j, repeat).permutation(dataset.n_rows)
            shuffled = dataset.values.copy()
            shuffled[:, j] = shuffled[permutation, j]
            drops.append(baseline - _accuracy(model, shuffled, label_indices))
        drops_arr = np.asarray(drops)
        features.append({
            "name": spec.name,
            "baseline_score": baseline,
            "mean_drop": float(drops_arr.mean()),
            "std_drop": float(drops_arr.std()),
            "drops": [float(d) for d in drops],
        })
    return PermutationImportanceResult(
        baseline_score=baseline, metric=metric, n_repeats=int(n_repeats),
        seed=int(seed), features=features)


@dataclass
class IceCurves:
    feature_index: int
    feature_name: str
    grid: np.ndarray
    curves: np.ndarray  # (n_instances, n_grid)
    target_class: int

    def to_dict(self) -> dict:
        return {
            "feature_index": int(self.feature_index),
            "feature_name": self.feature_name,
            "grid": [float(g) for g in self.grid],
            "curves": [[float(v) for v in row] for row in self.curves],
            "target_class": int(self.target_class),
        }


def ice_curves(model, dataset: TabularDataset, feature, grid=None,
               n_points=20, target_class=0) -> IceCurves:
    """curve[i][g]: target-class probability of row i with the feature set
    to grid[g]; numeric features only."""
    j = dataset.feature_index(feature)
    spec = dataset.schema[j]
    if not spec.is_numeric:
        raise SchemaError(
            f"ICE supports numeric features only; '{spec.name}' is categorical")
    if grid is not None:
        grid = np.asarray(grid, dtype=np.float64)
        if grid.ndim != 1 or grid.size < 1:
            raise SchemaError("explicit grid must be a non-empty 1-D list")
        if not np.all(np.diff(grid) > 0):
            raise SchemaError("explicit grid must be strictly ascending")
    else:
        if n_points < 1:
            raise SchemaError("n_points must be >= 1")
        stats = dataset.stats[spec.name]
        if n_points == 1:
            grid = np.array([stats["min"]])
        else:
            grid = np.linspace(stats["min"], stats["max"], n_points)
            grid = np.unique(grid)  # constant features collapse to one point

    target = model.class_index(target_class) \
        if not isinstance(target_class, (int, np.integer)) else int(target_class)
    if not 0 <= target < model.n_classes:
        raise SchemaError(f"target class {target} out of range")

    n = dataset.n_rows
    # one batched prediction: n copies of the dataset, one per grid value
    stacked = np.repeat(dataset.values, len(grid), axis=0)
    stacked[:, j] = np.tile(grid, n)
    proba = model.predict_proba(stacked)[:, target]
    curves = proba.reshape(n, len(grid))
    return IceCurves(feature_index=j, feature_name=spec.name, grid=grid,
                     curves=curves, target_class=target)


@dataclass
class PdCurve:
    feature_index: int
    feature_name: str
    grid: np.ndarray
    values: np.ndarray
    target_class: int

    def to_dict(self) -> dict:
        return {
            "feature_index": int(self.feature_index),
            "feature_name": self.feature_name,
            "grid": [float(g) for g in self.grid],
            "values": [float(v) for v in self.values],
            "target_class": int(self.target_class),
        }


def partial_dependence(ice: IceCurves) -> PdCurve:
    """Pointwise unweighted mean over the ICE curves."""
    if ice.curves.shape[0] < 1:
        raise SchemaError("ICE matrix is empty")
    return PdCurve(feature_index=ice.feature_index,
                   feature_name=ice.feature_name,
                   grid=ice.grid,
                   values=ice.curves.mean(axis=0),
                   target_class=ice.target_class)
