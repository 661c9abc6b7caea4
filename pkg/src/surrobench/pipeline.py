"""The explain pipeline: one implementation shared by CLI and service.

Stage order: sample -> predict -> fit representation -> encode -> distances
-> kernel weights -> resolve target -> select features -> fit surrogate ->
extract explanation -> fidelity -> diagnostics.  The tree-partition
representation is fitted on the sampled, black-box-labelled data (not the
original training data) so it captures local behaviour.  Every stage error
is re-raised annotated with the stage name; results are deterministic given
(dataset, config, model, anchor, seed).
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field

import numpy as np
from sklearn.base import BaseEstimator

from . import evaluation
from .config import fingerprint, validate_or_raise
from .data import ExplainedInstance, TabularDataset
from .errors import ConfigError, PipelineError, WorkbenchError
from .explain import feature_ranges, hamming_distance, kernel_weights, \
    mixed_distance, select_features
from .representation import QuartileDiscretiser, TreePartition
from .sampling import build_sampler
from .rng import CounterRng
from .surrogates import Explanation, TreeSurrogateRegressor, WeightedRidge, \
    extract_linear_explanation, extract_tree_explanation

_SAMPLER_STREAM = 1


@dataclass
class ExplainResult:
    config: dict
    config_fingerprint: str
    seed: int
    anchor: ExplainedInstance
    target_class: int
    rows: np.ndarray
    encodings: np.ndarray
    probabilities: np.ndarray
    anchor_probability: np.ndarray
    distances: np.ndarray
    weights: np.ndarray
    descriptions: list
    selected: np.ndarray
    representation: object
    surrogate: object
    surrogate_input: np.ndarray
    explanation: Explanation
    fidelity: evaluation.FidelityScore
    diagnostics: dict | None = None
    timings: dict = field(default_factory=dict)


class _StageTimer:
    def __init__(self):
        self.timings = {}

    def run(self, stage, fn):
        start = time.perf_counter()
        try:
            result = fn()
        except PipelineError:
            raise
        except (WorkbenchError, ValueError, KeyError, IndexError) as exc:
            raise PipelineError(stage, exc) from exc
        self.timings[stage] = time.perf_counter() - start
        return result


def resolve_target_class(config, model, anchor_probability) -> int:
    ref = config["surrogate"].get("target_class")
    if ref is None:
        return int(np.argmax(anchor_probability))  # lowest index wins ties
    if isinstance(ref, str):
        return model.class_index(ref)
    return model.class_index(int(ref))


def run_explain(dataset: TabularDataset, model, config: dict,
                anchor: ExplainedInstance, seed: int,
                with_diagnostics: bool = True) -> ExplainResult:
    """Run the full pipeline for one anchor; config must be validated."""
    timer = _StageTimer()
    seed = int(seed)
    anchor_values = np.asarray(anchor.values, dtype=np.float64)
    schema = dataset.schema
    kinds = [spec.kind for spec in schema]

    def sample_stage():
        sampler = build_sampler(config["sampler"])
        rng = CounterRng(seed).derive(_SAMPLER_STREAM)
        return sampler.sample(dataset, anchor_values,
                              config["sampler"]["n_samples"], rng)

    rows = timer.run("sample", sample_stage)

    def predict_stage():
        batch = np.vstack([anchor_values.reshape(1, -1), rows])
        return model.predict_proba(batch)

    all_proba = timer.run("predict", predict_stage)
    anchor_probability, probabilities = all_proba[0], all_proba[1:]

    rep_config = config["representation"]

    def representation_stage():
        if rep_config["kind"] == "quartile":
            return QuartileDiscretiser().fit(dataset)
        partition = TreePartition(max_depth=rep_config["max_depth"],
                                  min_leaf=rep_config["min_leaf"])
        # fitted on the sampled, black-box-labelled neighbourhood
        return partition.fit(rows, probabilities, feature_kinds=kinds)

    representation = timer.run("fit_representation", representation_stage)

    def encode_stage():
        if rep_config["kind"] == "quartile":
            bits = representation.encode(rows, anchor_values)
            descriptions = representation.descriptions(anchor_values)
            anchor_bits = representation.encode(
                anchor_values.reshape(1, -1), anchor_values)[0]
        else:
            mode = rep_config["encode_mode"]
            bits = representation.encode(rows, anchor_values, mode=mode)
            descriptions = representation.descriptions(schema, anchor_values,
                                                       mode=mode)
            anchor_bits = representation.encode(
                anchor_values.reshape(1, -1), anchor_values, mode=mode)[0]
        return bits, descriptions, anchor_bits

    encodings, descriptions, anchor_bits = timer.run("encode", encode_stage)

    def distance_stage():
        if config["kernel"]["distance_domain"] == "interpretable":
            return hamming_distance(encodings, anchor_bits)
        return mixed_distance(schema, feature_ranges(dataset), rows,
                              anchor_values)

    distances = timer.run("distances", distance_stage)
    weights = timer.run("weights", lambda: kernel_weights(
        distances, config["kernel"]["width"]))

    target_class = timer.run("resolve_target", lambda: resolve_target_class(
        config, model, anchor_probability))

    surrogate_config = config["surrogate"]
    tree_on_raw = surrogate_config["kind"] == "tree" \
        and surrogate_config.get("input_domain") == "raw"

    def selection_stage():
        if tree_on_raw:
            # selection is defined over interpretable columns only
            return np.arange(dataset.n_features)
        ridge_lambda = surrogate_config.get("ridge_lambda", 0.01) \
            if surrogate_config["kind"] == "linear" else 0.01
        return select_features(encodings, probabilities[:, target_class],
                               weights, method=config["selection"]["method"],
                               k=config["selection"]["k"],
                               ridge_lambda=ridge_lambda)

    selected = timer.run("select_features", selection_stage)

    def surrogate_stage():
        if surrogate_config["kind"] == "linear":
            X = encodings[:, selected]
            model_ = WeightedRidge(alpha=surrogate_config["ridge_lambda"])
            model_.fit(X, probabilities[:, target_class], sample_weight=weights)
            return model_, X
        tree = TreeSurrogateRegressor(max_depth=surrogate_config["max_depth"],
                                      min_leaf=surrogate_config["min_leaf"])
        if tree_on_raw:
            X = rows
            tree.fit(X, probabilities, sample_weight=weights,
                     feature_kinds=kinds)
        else:
            X = encodings[:, selected]
            tree.fit(X, probabilities, sample_weight=weights)
        return tree, X

    surrogate, surrogate_input = timer.run("fit_surrogate", surrogate_stage)

    def extract_stage():
        if surrogate_config["kind"] == "linear":
            return extract_linear_explanation(surrogate, descriptions,
                                              selected, target_class)
        if tree_on_raw:
            condition_text = _raw_condition_renderer(schema)
            anchor_row = anchor_values
        else:
            condition_text = _bit_condition_renderer(
                [descriptions[j] for j in selected])
            anchor_row = anchor_bits[selected]
        return extract_tree_explanation(surrogate, condition_text,
                                        anchor_row, target_class)

    explanation = timer.run("extract", extract_stage)

    fidelity = timer.run("fidelity", lambda: evaluation.local_fidelity(
        surrogate, surrogate_input, probabilities, weights, target_class))

    diagnostics = None
    if with_diagnostics:
        diagnostics = timer.run("diagnostics", lambda:
                                evaluation.representation_diagnostics(
                                    rows, representation, anchor_values))

    return ExplainResult(
        config=config, config_fingerprint=fingerprint(config), seed=seed,
        anchor=anchor, target_class=target_class, rows=rows,
        encodings=encodings, probabilities=probabilities,
        anchor_probability=anchor_probability, distances=distances,
        weights=weights, descriptions=descriptions, selected=selected,
        representation=representation, surrogate=surrogate,
        surrogate_input=surrogate_input, explanation=explanation,
        fidelity=fidelity, diagnostics=diagnostics, timings=timer.timings)


def _bit_condition_renderer(bit_descriptions):
    def render(j, op, value):
        name = f"[{bit_descriptions[j]}]"
        symbol = "≤" if op == "<=" else ">"
        return f"{name} {symbol} {value:.3g}"
    return render


def _raw_condition_renderer(schema):
    def render(j, op, value):
        spec = schema[j]
        if op == "<=":
            return f"{spec.name} ≤ {value:.6g}"
        if op == ">":
            return f"{spec.name} > {value:.6g}"
        names = ", ".join(spec.categories[int(c)] for c in value)
        return f"{spec.name} {'=' if op == 'in' else '≠'} {names}"
    return render


class SurrogateExplainer(BaseEstimator):
    """sklearn-style front door: configure, fit to (dataset, model), explain.

    >>> explainer = SurrogateExplainer(config).fit(dataset, model)
    >>> result = explainer.explain(dataset.instance(0), seed=42)
    """

    def __init__(self, config=None):
        self.config = config

    def fit(self, dataset: TabularDataset, model):
        self.config_ = validate_or_raise(self.config or {})
        self.dataset_ = dataset
        self.model_ = model
        return self

    def _check_fitted(self):
        if not hasattr(self, "dataset_"):
            raise ConfigError(["SurrogateExplainer is not fitted; call "
                               "fit(dataset, model) first"])

    def explain(self, anchor, seed=0, with_diagnostics=True) -> ExplainResult:
        self._check_fitted()
        if not isinstance(anchor, ExplainedInstance):
            anchor = self.dataset_.instance_from_cells(anchor) \
                if not isinstance(anchor, (int, np.integer)) \
                else self.dataset_.instance(int(anchor))
        return run_explain(self.dataset_, self.model_, self.config_, anchor,
                           seed, with_diagnostics=with_diagnostics)

    def stability(self, anchor, seeds, top_k=None):
        self._check_fitted()
        if not isinstance(anchor, ExplainedInstance):
            anchor = self.dataset_.instance(int(anchor))
        return evaluation.stability(self.dataset_, self.model_, self.config_,
                                    anchor, seeds, top_k=top_k)
