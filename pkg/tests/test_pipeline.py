import numpy as np
import pytest

from surrobench import SurrogateExplainer
from surrobench.blackbox import from_spec
from surrobench.config import validate_or_raise
from surrobench.data import ExplainedInstance
from surrobench.errors import ConfigError, PipelineError
from surrobench.evaluation import local_fidelity
from surrobench.pipeline import run_explain
from surrobench.report import build_report, report_bytes, verify_report


def test_repeat_runs_byte_identical(median_mass_dataset, median_rule_model,
                                    positive_anchor):
    config = validate_or_raise({"sampler": {"n_samples": 200}})
    a = run_explain(median_mass_dataset, median_rule_model, config,
                    positive_anchor, seed=5)
    b = run_explain(median_mass_dataset, median_rule_model, config,
                    positive_anchor, seed=5)
    bytes_a = report_bytes(build_report(a, median_mass_dataset,
                                        median_rule_model, full_samples=True))
    bytes_b = report_bytes(build_report(b, median_mass_dataset,
                                        median_rule_model, full_samples=True))
    assert bytes_a == bytes_b


def test_different_seeds_differ(median_mass_dataset, median_rule_model,
                                positive_anchor):
    config = validate_or_raise({"sampler": {"n_samples": 50}})
    a = run_explain(median_mass_dataset, median_rule_model, config,
                    positive_anchor, seed=1)
    b = run_explain(median_mass_dataset, median_rule_model, config,
                    positive_anchor, seed=2)
    assert not np.array_equal(a.rows, b.rows)


def test_rule_blackbox_rank_one_attribution(median_mass_dataset,
                                            median_rule_model,
                                            positive_anchor):
    config = validate_or_raise({"sampler": {"n_samples": 300}})
    hits = 0
    for seed in range(10):
        result = run_explain(median_mass_dataset, median_rule_model, config,
                             positive_anchor, seed=seed)
        top = result.explanation.items[0]
        if top["feature_index"] == 0 and top["value"] > 0:
            hits += 1
    assert hits >= 9


def test_reported_fidelity_matches_recompute(median_mass_dataset,
                                             median_rule_model,
                                             positive_anchor):
    config = validate_or_raise({})
    result = run_explain(median_mass_dataset, median_rule_model, config,
                         positive_anchor, seed=3)
    recomputed = local_fidelity(result.surrogate, result.surrogate_input,
                                result.probabilities, result.weights,
                                result.target_class)
    assert recomputed.to_dict() == result.fidelity.to_dict()


def test_full_report_verifies(median_mass_dataset, median_rule_model,
                              positive_anchor):
    config = validate_or_raise({})
    result = run_explain(median_mass_dataset, median_rule_model, config,
                         positive_anchor, seed=9)
    report = build_report(result, median_mass_dataset, median_rule_model,
                          full_samples=True)
    ok, checks = verify_report(report)
    assert ok, checks
    # digest-only reports verify the fingerprint and skip fidelity
    slim = build_report(result, median_mass_dataset, median_rule_model,
                        full_samples=False)
    ok, checks = verify_report(slim)
    assert ok
    assert any("skipped" in c for c in checks)


def test_tampered_report_fails_verify(median_mass_dataset, median_rule_model,
                                      positive_anchor):
    config = validate_or_raise({})
    result = run_explain(median_mass_dataset, median_rule_model, config,
                         positive_anchor, seed=9)
    report = build_report(result, median_mass_dataset, median_rule_model,
                          full_samples=True)
    report["fidelity"]["weighted_accuracy"] = 0.123
    ok, checks = verify_report(report)
    assert not ok


def test_target_class_resolution(median_mass_dataset, median_rule_model,
                                 positive_anchor):
    by_name = validate_or_raise(
        {"surrogate": {"kind": "linear", "target_class": "below"}})
    result = run_explain(median_mass_dataset, median_rule_model, by_name,
                         positive_anchor, seed=0)
    assert result.target_class == 1
    by_index = validate_or_raise(
        {"surrogate": {"kind": "linear", "target_class": 1}})
    result = run_explain(median_mass_dataset, median_rule_model, by_index,
                         positive_anchor, seed=0)
    assert result.target_class == 1
    # default: argmax at the anchor (anchor is "above" -> class 0)
    default = validate_or_raise({})
    result = run_explain(median_mass_dataset, median_rule_model, default,
                         positive_anchor, seed=0)
    assert result.target_class == 0


def test_stage_error_annotated(median_mass_dataset, median_rule_model):
    config = validate_or_raise({})
    bad_anchor = ExplainedInstance(values=np.array([0.0, 0.0]))  # wrong width
    with pytest.raises(PipelineError) as err:
        run_explain(median_mass_dataset, median_rule_model, config,
                    bad_anchor, seed=0)
    assert err.value.stage == "predict"


def test_tree_surrogate_interpretable(median_mass_dataset, median_rule_model,
                                      positive_anchor):
    config = validate_or_raise({
        "surrogate": {"kind": "tree", "max_depth": 2, "min_leaf": 5}})
    result = run_explain(median_mass_dataset, median_rule_model, config,
                         positive_anchor, seed=4)
    assert result.explanation.kind == "rules"
    assert result.explanation.items[0]["anchor_leaf"] is True
    # leaves carry probability vectors
    for item in result.explanation.items:
        assert len(item["value"]) == 2
        assert all(0.0 <= v <= 1.0 for v in item["value"])
    report = build_report(result, median_mass_dataset, median_rule_model,
                          full_samples=True)
    ok, checks = verify_report(report)
    assert ok, checks


def test_tree_surrogate_raw_domain(median_mass_dataset, median_rule_model,
                                   positive_anchor):
    config = validate_or_raise({
        "surrogate": {"kind": "tree", "max_depth": 2, "min_leaf": 5,
                      "input_domain": "raw"}})
    result = run_explain(median_mass_dataset, median_rule_model, config,
                         positive_anchor, seed=4)
    assert result.explanation.kind == "rules"
    # raw rules reference feature names, not bit brackets
    assert any("x0" in item["rule"] for item in result.explanation.items)
    report = build_report(result, median_mass_dataset, median_rule_model,
                          full_samples=True)
    ok, checks = verify_report(report)
    assert ok, checks


def test_tree_representation_modes(median_mass_dataset, median_rule_model,
                                   positive_anchor):
    for mode in ("one_hot", "same_leaf"):
        config = validate_or_raise({
            "representation": {"kind": "tree", "max_depth": 2, "min_leaf": 10,
                               "encode_mode": mode}})
        result = run_explain(median_mass_dataset, median_rule_model, config,
                             positive_anchor, seed=6)
        if mode == "one_hot":
            assert (result.encodings.sum(axis=1) == 1.0).all()
        else:
            assert result.encodings.shape[1] == 1
        assert result.diagnostics["kind"] == "tree"
        assert abs(sum(result.diagnostics["occupancy"]) - 1.0) <= 1e-9


def test_interpretable_distance_domain(median_mass_dataset, median_rule_model,
                                       positive_anchor):
    config = validate_or_raise({
        "kernel": {"distance_domain": "interpretable"}})
    result = run_explain(median_mass_dataset, median_rule_model, config,
                         positive_anchor, seed=2)
    # distances are bit disagreement fractions
    assert ((result.distances >= 0) & (result.distances <= 1)).all()
    assert ((result.weights > 0) & (result.weights <= 1)).all()


def test_mixup_pipeline(median_mass_dataset, median_rule_model,
                        positive_anchor):
    config = validate_or_raise({
        "sampler": {"kind": "mixup", "alpha": 0.5, "n_samples": 150}})
    result = run_explain(median_mass_dataset, median_rule_model, config,
                         positive_anchor, seed=8)
    assert result.rows.shape == (150, 3)
    assert result.fidelity.n_samples == 150


def test_selection_in_pipeline(median_mass_dataset, median_rule_model,
                               positive_anchor):
    config = validate_or_raise({
        "selection": {"method": "forward_selection", "k": 1},
        "sampler": {"n_samples": 300}})
    result = run_explain(median_mass_dataset, median_rule_model, config,
                         positive_anchor, seed=1)
    assert result.selected.tolist() == [0]
    assert len(result.explanation.items) == 1
    assert result.explanation.items[0]["feature_index"] == 0


def test_explainer_estimator_front_door(median_mass_dataset,
                                        median_rule_model):
    explainer = SurrogateExplainer({"sampler": {"n_samples": 100}})
    explainer.fit(median_mass_dataset, median_rule_model)
    result = explainer.explain(0, seed=1)
    assert result.fidelity.n_samples == 100
    assert explainer.get_params()["config"] == {"sampler": {"n_samples": 100}}
    with pytest.raises(ConfigError):
        SurrogateExplainer({"kernel": {"width": -1}}).fit(
            median_mass_dataset, median_rule_model)


def test_diagnostics_flag_empty_bins(median_mass_dataset, median_rule_model,
                                     positive_anchor):
    # x0 carries a point mass at its median, so q50 == q75 and bin 2
    # (q50, q75] is structurally empty: diagnostics must flag it
    config = validate_or_raise({})
    result = run_explain(median_mass_dataset, median_rule_model, config,
                         positive_anchor, seed=0)
    x0 = result.diagnostics["features"][0]
    assert x0["occupancy"][2] == 0.0
    assert result.diagnostics["empty_bin_count"] >= 1


def test_knn_blackbox_through_pipeline(median_mass_dataset):
    labels = ["above" if v > 0 else "below"
              for v in median_mass_dataset.values[:, 0]]
    model = from_spec({
        "kind": "knn", "classes": ["above", "below"], "k": 5,
        "rows": [median_mass_dataset.decode_row(r)
                 for r in median_mass_dataset.values],
        "labels": labels}, median_mass_dataset.schema)
    config = validate_or_raise({"sampler": {"n_samples": 80}})
    anchor = median_mass_dataset.instance(
        int(np.argmax(median_mass_dataset.values[:, 0])))
    result = run_explain(median_mass_dataset, model, config, anchor, seed=0)
    assert result.fidelity.n_samples == 80
    assert result.explanation.items[0]["feature_index"] == 0


def test_tree_representation_with_mixup_and_hamming(median_mass_dataset,
                                                    median_rule_model,
                                                    positive_anchor):
    config = validate_or_raise({
        "representation": {"kind": "tree", "max_depth": 2, "min_leaf": 5,
                           "encode_mode": "one_hot"},
        "sampler": {"kind": "mixup", "alpha": 1.0, "n_samples": 200},
        "kernel": {"distance_domain": "interpretable"},
        "surrogate": {"kind": "tree", "max_depth": 2, "min_leaf": 5}})
    result = run_explain(median_mass_dataset, median_rule_model, config,
                         positive_anchor, seed=5)
    assert result.explanation.kind == "rules"
    report = build_report(result, median_mass_dataset, median_rule_model,
                          full_samples=True)
    ok, checks = verify_report(report)
    assert ok, checks
