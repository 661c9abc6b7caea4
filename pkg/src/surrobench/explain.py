"""Sample weighting and interpretable feature selection.

Distances are Gower-style means of per-feature dissimilarities (numeric
|a-b|/range clipped at 1, categorical 0/1 mismatch), so one distance
definition serves the kernel, the k-NN builtin and the diagnostics.  Kernel
weights follow exp(-d^2/w^2).  Selection offers none / highest_weight /
forward_selection over the binary design matrix.
"""

from __future__ import annotations

import numpy as np

from .errors import ConfigError, SchemaError


def feature_ranges(dataset) -> np.ndarray:
    return np.array([dataset.numeric_range(j) if spec.is_numeric else 0.0
                     for j, spec in enumerate(dataset.schema)])


def mixed_distance_matrix(schema, ranges, A, B) -> np.ndarray:
    """Pairwise Gower-style distances between row sets A (n) and B (m) -> (n, m)."""
    A = np.asarray(A, dtype=np.float64)
    B = np.asarray(B, dtype=np.float64)
    if A.ndim == 1:
        A = A.reshape(1, -1)
    if B.ndim == 1:
        B = B.reshape(1, -1)
    if A.shape[1] != len(schema) or B.shape[1] != len(schema):
        raise SchemaError("rows do not conform to the schema")
    if np.isnan(A).any() or np.isnan(B).any():
        raise SchemaError("distance input contains NaN")
    total = np.zeros((A.shape[0], B.shape[0]))
    for j, spec in enumerate(schema):
        a, b = A[:, j:j + 1], B[:, j]
        if spec.is_numeric:
            rng = ranges[j]
            if rng > 0:
                # samples may leave the training range; clip keeps d in [0,1]
                total += np.minimum(np.abs(a - b) / rng, 1.0)
        else:
            total += (a != b).astype(np.float64)
    return total / len(schema)


def mixed_distance(schema, ranges, rows, anchor_values) -> np.ndarray:
    """Distance of each row to the anchor, in [0, 1]."""
    return mixed_distance_matrix(schema, ranges, rows,
                                 np.asarray(anchor_values).reshape(1, -1))[:, 0]


def hamming_distance(bits, anchor_bits) -> np.ndarray:
    """Interpretable-domain distance: mean bit disagreement with the anchor."""
    bits = np.asarray(bits, dtype=np.float64)
    anchor_bits = np.asarray(anchor_bits, dtype=np.float64).reshape(1, -1)
    if bits.shape[1] != anchor_bits.shape[1]:
        raise SchemaError("encoding widths disagree")
    return np.abs(bits - anchor_bits).mean(axis=1)


def kernel_weights(distances, width: float) -> np.ndarray:
    """weight_i = exp(-d_i^2 / width^2); strictly positive, 1 at distance 0."""
    if width <= 0:
        raise ConfigError(["kernel.width must be > 0"])
    distances = np.asarray(distances, dtype=np.float64)
    if (distances < 0).any():
        raise SchemaError("distances must be nonnegative")
    return np.exp(-(distances * distances) / (width * width))


def _weighted_rss(X, y, weights, columns, ridge_lambda):
    from .surrogates import WeightedRidge
    model = WeightedRidge(alpha=ridge_lambda).fit(
        X[:, columns], y, sample_weight=weights)
    residual = y - model.predict(X[:, columns])
    return float((weights * residual * residual).sum())


def select_features(X, y, weights, method="none", k=5, ridge_lambda=0.01) -> np.ndarray:
    """Column indices (ascending) of the selected interpretable features.

    highest_weight: weighted ridge on all columns, keep the k largest |coef|.
    forward_selection: k greedy rounds adding the column that minimizes the
    weighted residual sum of squares.  k clamps to the column count.
    """
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    weights = np.asarray(weights, dtype=np.float64)
    n_columns = X.shape[1]
    if k < 1:
        raise ConfigError(["selection.k must be >= 1"])
    if method == "none" or k >= n_columns:
        return np.arange(n_columns)

    if method == "highest_weight":
        from .surrogates import WeightedRidge
        model = WeightedRidge(alpha=ridge_lambda).fit(X, y, sample_weight=weights)
        strength = np.abs(model.coef_)
        # stable sort on -|coef| keeps the lowest index first on ties
        order = np.argsort(-strength, kind="stable")
        return np.sort(order[:k])

    if method == "forward_selection":
        selected: list = []
        remaining = list(range(n_columns))
        for _ in range(k):
            best_rss, best_col = None, None
            for col in remaining:
                rss = _weighted_rss(X, y, weights, selected + [col], ridge_lambda)
                if best_rss is None or rss < best_rss:
                    best_rss, best_col = rss, col
            selected.append(best_col)
            remaining.remove(best_col)
        return np.sort(np.asarray(selected, dtype=np.int64))

    raise ConfigError([f"selection.method '{method}' is not supported"])
