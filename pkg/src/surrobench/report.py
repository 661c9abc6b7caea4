"""Explanation reports: canonical serialization, provenance and verification.

A report is a deterministic canonical-JSON document: identical (dataset
bytes, config, model, instance, seed) produce byte-identical reports whether
they come from the CLI or the service.  Wall-clock timings therefore never
enter the serialized report; they live on the in-memory result and go to the
diagnostics channel.  By default the report embeds a digest of the sample
set; --full-report embeds the samples themselves, which makes the report
self-verifying: `verify` recomputes the fingerprint, the sample digest and
the fidelity score from the embedded data.
"""

from __future__ import annotations

import numpy as np

from . import __version__
from .blackbox import describe, rows_from_wire, schema_from_wire, schema_to_wire
from .config import canonical_bytes, canonical_dumps, digest, fingerprint, \
    jsonify, validate
from .errors import ParseError
from .evaluation import local_fidelity
from .pipeline import ExplainResult
from .surrogates import TreeSurrogateRegressor, WeightedRidge

REPORT_VERSION = 1


def _samples_document(result: ExplainResult, dataset) -> dict:
    return {
        "rows": [dataset.decode_row(r) for r in result.rows],
        "encodings": [[int(b) for b in row] for row in result.encodings],
        "probabilities": [[float(p) for p in row] for row in result.probabilities],
        "distances": [float(d) for d in result.distances],
        "weights": [float(w) for w in result.weights],
    }


def build_report(result: ExplainResult, dataset, model, stability=None,
                 full_samples=False) -> dict:
    samples_doc = _samples_document(result, dataset)
    samples_digest = digest(samples_doc)
    samples = {"digest": samples_digest, "count": int(result.rows.shape[0])}
    if full_samples:
        samples.update(samples_doc)

    surrogate_doc = result.surrogate.to_dict()
    surrogate_doc["feature_indices"] = [int(j) for j in result.selected]
    if result.config["surrogate"]["kind"] == "tree":
        surrogate_doc["input_domain"] = result.config["surrogate"]["input_domain"]

    report = {
        "report_version": REPORT_VERSION,
        "artifact_version": __version__,
        "dataset_digest": dataset.source_digest,
        "schema": schema_to_wire(dataset.schema),
        "config": result.config,
        "config_fingerprint": result.config_fingerprint,
        "seed": int(result.seed),
        "anchor": {
            "values": dataset.decode_row(result.anchor.values),
            "row_ref": None if result.anchor.row_ref is None
                       else int(result.anchor.row_ref),
            "probability": [float(p) for p in result.anchor_probability],
        },
        "blackbox": describe(model),
        "class_names": list(model.class_names),
        "target_class": int(result.target_class),
        "interpretable_features": list(result.descriptions),
        "explanation": result.explanation.to_dict(),
        "surrogate": surrogate_doc,
        "fidelity": result.fidelity.to_dict(),
        "diagnostics": result.diagnostics,
        "stability": stability.to_dict() if stability is not None else None,
        "samples": samples,
    }
    return jsonify(report)


def report_bytes(report: dict) -> bytes:
    return canonical_bytes(report)


def verify_report(report: dict) -> tuple:
    """Recompute fingerprint (always) and sample digest + fidelity (full
    reports); returns (ok, list of check descriptions)."""
    checks = []
    ok = True

    config, violations = validate(report.get("config", {}))
    if violations:
        return False, [f"config: invalid ({'; '.join(violations)})"]
    recomputed = fingerprint(config)
    if recomputed == report.get("config_fingerprint"):
        checks.append("fingerprint: ok")
    else:
        ok = False
        checks.append(f"fingerprint: MISMATCH (stored "
                      f"{report.get('config_fingerprint')}, recomputed {recomputed})")

    samples = report.get("samples", {})
    if "rows" not in samples:
        checks.append("fidelity: skipped (samples not embedded; re-run with "
                      "--full-report to make the report self-verifying)")
        return ok, checks

    samples_doc = {key: samples[key] for key in
                   ("rows", "encodings", "probabilities", "distances", "weights")}
    recomputed_digest = digest(samples_doc)
    if recomputed_digest == samples.get("digest"):
        checks.append("sample digest: ok")
    else:
        ok = False
        checks.append("sample digest: MISMATCH")

    try:
        surrogate_doc = report["surrogate"]
        if surrogate_doc["kind"] == "linear":
            surrogate = WeightedRidge.from_dict(surrogate_doc)
        else:
            surrogate = TreeSurrogateRegressor.from_dict(surrogate_doc)
        selected = surrogate_doc.get("feature_indices", [])
        encodings = np.asarray(samples["encodings"], dtype=np.float64)
        if surrogate_doc.get("input_domain") == "raw":
            schema = schema_from_wire(report["schema"])
            X = rows_from_wire(schema, samples["rows"])
        else:
            X = encodings[:, selected]
        probabilities = np.asarray(samples["probabilities"], dtype=np.float64)
        weights = np.asarray(samples["weights"], dtype=np.float64)
        fidelity = local_fidelity(surrogate, X, probabilities, weights,
                                  report["target_class"])
        if canonical_dumps(fidelity.to_dict()) == canonical_dumps(report["fidelity"]):
            checks.append("fidelity: ok")
        else:
            ok = False
            checks.append(f"fidelity: MISMATCH (stored {report['fidelity']}, "
                          f"recomputed {fidelity.to_dict()})")
    except (KeyError, IndexError, ValueError) as exc:
        ok = False
        checks.append(f"fidelity: cannot recompute ({exc})")

    return ok, checks


def load_report(path) -> dict:
    import json
    with open(path, "r", encoding="utf-8") as fh:
        try:
            return json.load(fh)
        except json.JSONDecodeError as exc:
            raise ParseError(f"invalid report JSON: {exc}") from None
