"""Quality metrics for the explainer and its blocks.

local_fidelity measures surrogate/black-box agreement on the weighted
neighbourhood (weighted R^2 and weighted argmax/threshold agreement);
stability measures cross-seed robustness of attributions (per-feature
spread plus mean pairwise top-k Jaccard); representation_diagnostics
measures whether the sampled neighbourhood actually populates the
interpretable bins or leaves the surrogate blind to some of them.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ConfigError, SchemaError
from .representation import QuartileDiscretiser, TreePartition

# relative scale under which weighted variance counts as degenerate
_VARIANCE_TOL = 1e-18


@dataclass
class FidelityScore:
    weighted_r2: float | None     # None when degenerate (zero weighted variance)
    weighted_accuracy: float
    n_samples: int
    target_class: int
    degenerate: bool = False

    def to_dict(self) -> dict:
        return {
            "weighted_r2": None if self.weighted_r2 is None else float(self.weighted_r2),
            "weighted_accuracy": float(self.weighted_accuracy),
            "n_samples": int(self.n_samples),
            "target_class": int(self.target_class),
            "degenerate": bool(self.degenerate),
        }


def local_fidelity(surrogate, X, probabilities, weights, target_class) -> FidelityScore:
    """Weighted R^2 and agreement of a fitted surrogate against black-box outputs.

    Linear surrogates predict the target-class probability (agreement =
    both sides of the 0.5 threshold); tree surrogates predict the full
    vector (agreement = argmax match).  A zero weighted variance with zero
    residuals scores R^2 = 1; with residuals it is flagged degenerate.
    """
    probabilities = np.asarray(probabilities, dtype=np.float64)
    weights = np.asarray(weights, dtype=np.float64)
    if probabilities.ndim != 2:
        raise SchemaError("probabilities must be (n, n_classes)")
    n = probabilities.shape[0]
    if weights.shape != (n,):
        raise SchemaError("weights must align with probabilities")
    total_weight = float(weights.sum())
    if n < 1 or total_weight <= 0:
        raise SchemaError("zero total weight")

    y = probabilities[:, target_class]
    predicted = np.asarray(surrogate.predict(X), dtype=np.float64)
    if predicted.ndim == 2:
        y_hat = predicted[:, target_class]
        agree = predicted.argmax(axis=1) == probabilities.argmax(axis=1)
    else:
        y_hat = predicted
        agree = (y_hat >= 0.5) == (y >= 0.5)

    y_bar = float((weights * y).sum()) / total_weight
    residual_ss = float((weights * (y - y_hat) ** 2).sum())
    total_ss = float((weights * (y - y_bar) ** 2).sum())

    scale = max(1.0, float(np.abs(y).max()) ** 2) * total_weight
    degenerate = total_ss <= _VARIANCE_TOL * scale
    if degenerate:
        r2 = 1.0 if residual_ss <= _VARIANCE_TOL * scale else None
        degenerate = r2 is None
    else:
        r2 = 1.0 - residual_ss / total_ss

    accuracy = float((weights * agree).sum()) / total_weight
    return FidelityScore(weighted_r2=r2, weighted_accuracy=accuracy,
                         n_samples=n, target_class=int(target_class),
                         degenerate=degenerate)


@dataclass
class StabilityReport:
    feature_descriptions: list
    attribution_mean: list
    attribution_std: list
    jaccard_mean: float
    top_k: int
    seeds: list
    n_runs: int

    def to_dict(self) -> dict:
        return {
            "feature_descriptions": list(self.feature_descriptions),
            "attribution_mean": [float(v) for v in self.attribution_mean],
            "attribution_std": [float(v) for v in self.attribution_std],
            "jaccard_mean": float(self.jaccard_mean),
            "top_k": int(self.top_k),
            "seeds": [int(s) for s in self.seeds],
            "n_runs": int(self.n_runs),
        }


def _top_k_set(attributions, k):
    order = sorted(range(len(attributions)),
                   key=lambda j: (-abs(attributions[j]), j))
    return frozenset(order[:k])


def stability(dataset, model, config, anchor, seeds, top_k=None) -> StabilityReport:
    """Run the pipeline once per seed and aggregate attribution robustness.

    Requires a config whose interpretable feature space is seed-independent
    and whose explanation carries per-feature scalars: quartile
    representation with a linear surrogate.
    """
    from .pipeline import run_explain

    seeds = [int(s) for s in seeds]
    if len(seeds) < 2:
        raise ConfigError(["stability needs at least 2 seeds (std is undefined "
                           "for a single run)"])
    if config["representation"]["kind"] != "quartile" \
            or config["surrogate"]["kind"] != "linear":
        raise ConfigError([
            "stability is defined for quartile representation with a linear "
            "surrogate (per-feature attributions must be comparable across seeds)"])
    if top_k is None:
        top_k = config["evaluation"]["stability_k"]
    if top_k < 1:
        raise ConfigError(["stability top_k must be >= 1"])

    runs = {seed: run_explain(dataset, model, config, anchor, seed)
            for seed in sorted(set(seeds))}
    n_features = dataset.n_features
    matrix = np.zeros((len(seeds), n_features))
    descriptions = [""] * n_features
    for i, seed in enumerate(seeds):  # seed list order, duplicates allowed
        result = runs[seed]
        for item in result.explanation.items:
            matrix[i, item["feature_index"]] = item["value"]
            descriptions[item["feature_index"]] = item["description"]

    # identical runs must report std exactly 0; np.std's mean subtraction
    # leaves ulp-level residue on equal values, so force those columns
    stds = matrix.std(axis=0)
    stds[np.all(matrix == matrix[0], axis=0)] = 0.0

    k = min(top_k, n_features)
    top_sets = [_top_k_set(matrix[i], k) for i in range(len(seeds))]
    pair_scores = []
    for i in range(len(seeds)):
        for j in range(i + 1, len(seeds)):
            union = top_sets[i] | top_sets[j]
            inter = top_sets[i] & top_sets[j]
            pair_scores.append(len(inter) / len(union) if union else 1.0)

    return StabilityReport(
        feature_descriptions=descriptions,
        attribution_mean=matrix.mean(axis=0).tolist(),
        attribution_std=stds.tolist(),
        jaccard_mean=float(np.mean(pair_scores)),
        top_k=k,
        seeds=seeds,
        n_runs=len(seeds),
    )


def representation_diagnostics(rows, representation, anchor_values) -> dict:
    """Occupancy of interpretable bins/leaves over a sample set.

    Empty bins are an explainability failure mode: the surrogate cannot
    learn anything about regions the sampler never visits.
    """
    rows = np.asarray(rows, dtype=np.float64)
    if rows.ndim != 2 or rows.shape[0] == 0:
        raise SchemaError("diagnostics need a non-empty sample set")
    n = rows.shape[0]

    if isinstance(representation, QuartileDiscretiser):
        bins = representation.transform(rows)
        anchor_bins = representation.transform(
            np.asarray(anchor_values).reshape(1, -1))[0]
        features = []
        empty_total = 0
        for j, spec in enumerate(representation.schema_):
            n_bins = representation.n_bins(j)
            counts = np.bincount(bins[:, j], minlength=n_bins)
            occupancy = counts / n
            empty = int((counts == 0).sum())
            empty_total += empty
            features.append({
                "name": spec.name,
                "occupancy": [float(v) for v in occupancy],
                "anchor_bin": int(anchor_bins[j]),
                "empty_bins": empty,
            })
        return {"kind": "quartile", "features": features,
                "empty_bin_count": empty_total}

    if isinstance(representation, TreePartition):
        ids = representation.apply(rows)
        counts = np.bincount(ids, minlength=representation.n_leaves)
        anchor_leaf = int(representation.apply(
            np.asarray(anchor_values).reshape(1, -1))[0])
        return {
            "kind": "tree",
            "occupancy": [float(v) for v in counts / n],
            "anchor_leaf": anchor_leaf,
            "empty_leaf_count": int((counts == 0).sum()),
        }

    raise SchemaError("unknown representation type")
