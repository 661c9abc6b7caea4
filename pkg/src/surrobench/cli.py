"""Command line interface for the workbench.

Subcommands: explain, evaluate (cross-seed stability), global
(perm-importance | ice | pd), serve, verify, model-serve.  Exit codes:
0 success, 1 validation/argument error, 2 runtime error, 3 port busy.
Reports and result files are canonical JSON; human-readable tables go to
stdout, diagnostics and timings to stderr.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

from . import __version__, evaluation, global_explainers, model_server
from . import blackbox as bb
from .config import canonical_bytes, fingerprint, load_config_file, validate
from .data import load_dataset
from .errors import ConfigError, ParseError, PipelineError, SchemaError, \
    WorkbenchError
from .pipeline import run_explain
from .report import build_report, load_report, verify_report
from .service import make_server

EXIT_OK = 0
EXIT_VALIDATION = 1
EXIT_RUNTIME = 2
EXIT_PORT_BUSY = 3


class _Parser(argparse.ArgumentParser):
    """argparse exits 2 on bad arguments; the CLI contract wants 1."""

    def error(self, message):
        self.print_usage(sys.stderr)
        sys.stderr.write(f"error: {message}\n")
        raise SystemExit(EXIT_VALIDATION)


def _add_data_model_flags(parser, with_schema=True):
    parser.add_argument("--data", required=True, help="dataset CSV path")
    if with_schema:
        parser.add_argument("--schema", help="schema override document (JSON)")
    parser.add_argument("--model", required=True,
                        help="model spec JSON path, cmd:<command>, or http(s)://url")
    parser.add_argument("--classes",
                        help="comma-separated class names (cmd:/http: models)")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="surrobench",
                     description="composable surrogate explainer workbench")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    p_explain = sub.add_parser("explain", help="explain one instance")
    _add_data_model_flags(p_explain)
    p_explain.add_argument("--config", help="explainer config (JSON or TOML)")
    p_explain.add_argument("--instance", required=True,
                           help="row index or comma-separated cell values")
    p_explain.add_argument("--seed", type=int, default=0)
    p_explain.add_argument("--out", required=True, help="report output path")
    p_explain.add_argument("--full-report", action="store_true",
                           help="embed the sample set (self-verifying report)")

    p_eval = sub.add_parser("evaluate", help="cross-seed stability")
    _add_data_model_flags(p_eval)
    p_eval.add_argument("--config", help="explainer config (JSON or TOML)")
    p_eval.add_argument("--instance", required=True)
    p_eval.add_argument("--seed", type=int, default=0, help="base seed")
    p_eval.add_argument("--seeds", required=True,
                        help="seed count or explicit comma-separated list")
    p_eval.add_argument("--top-k", type=int, default=None)
    p_eval.add_argument("--out", required=True)

    p_global = sub.add_parser("global", help="dataset-level explainers")
    g_sub = p_global.add_subparsers(dest="global_command", required=True)

    p_perm = g_sub.add_parser("perm-importance")
    _add_data_model_flags(p_perm)
    p_perm.add_argument("--labels", required=True,
                        help="file with one class label per dataset row")
    p_perm.add_argument("--repeats", type=int, default=10)
    p_perm.add_argument("--seed", type=int, default=0)
    p_perm.add_argument("--out", required=True)

    for name in ("ice", "pd"):
        p_curve = g_sub.add_parser(name)
        _add_data_model_flags(p_curve)
        p_curve.add_argument("--feature", required=True)
        p_curve.add_argument("--grid-points", type=int, default=20)
        p_curve.add_argument("--target-class", default="0")
        p_curve.add_argument("--out", required=True)

    p_serve = sub.add_parser("serve", help="run the workbench HTTP service")
    _add_data_model_flags(p_serve)
    p_serve.add_argument("--port", type=int, default=None,
                         help="default: $WORKBENCH_PORT or 8321")
    p_serve.add_argument("--ui-dir", help="built UI assets to serve at /")
    p_serve.add_argument("--labels", help="labels file for /api/global/perm")

    p_verify = sub.add_parser("verify", help="self-check an emitted report")
    p_verify.add_argument("report", help="report JSON path")

    p_model = sub.add_parser("model-serve",
                             help="serve a model spec over the stdio protocol")
    p_model.add_argument("--model", required=True, help="model spec JSON path")

    return parser


# ---------------------------------------------------------------- helpers

def _load_dataset(args):
    override = None
    if getattr(args, "schema", None):
        with open(args.schema, "r", encoding="utf-8") as fh:
            override = json.load(fh)
    with open(args.data, "rb") as fh:
        return load_dataset(fh, schema_override=override)


def _load_model(args, dataset):
    spec_arg = args.model
    if spec_arg.startswith("cmd:") or spec_arg.startswith(("http://", "https://")):
        if not args.classes:
            raise ConfigError(["--classes is required for cmd:/http: models"])
        classes = [c.strip() for c in args.classes.split(",") if c.strip()]
        target = spec_arg[4:] if spec_arg.startswith("cmd:") else spec_arg
        return bb.open_external(target, classes, dataset.schema)
    with open(spec_arg, "r", encoding="utf-8") as fh:
        spec = json.load(fh)
    return bb.from_spec(spec, dataset.schema)


def _load_config(args):
    if getattr(args, "config", None):
        document = load_config_file(args.config)
    else:
        document = {}
    config, violations = validate(document)
    if violations:
        raise ConfigError(violations)
    return config


def _parse_instance(dataset, text):
    try:
        return dataset.instance(int(text))
    except ValueError:
        pass
    cells = [c.strip() for c in text.split(",")]
    return dataset.instance_from_cells(cells)


def _parse_seeds(args):
    text = args.seeds
    if "," in text:
        seeds = [int(s) for s in text.split(",") if s.strip()]
    else:
        count = int(text)
        seeds = [args.seed + i for i in range(count)]
    return seeds


def _load_labels(path):
    labels = []
    with open(path, "r", encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if line:
                labels.append(line)
    return labels


def _write_canonical(path, document):
    Path(path).write_bytes(canonical_bytes(document) + b"\n")


def _print_timings(timings):
    for stage, seconds in timings.items():
        sys.stderr.write(f"[timing] {stage}: {seconds * 1000:.1f} ms\n")


def _print_explanation(report):
    explanation = report["explanation"]
    target = report["class_names"][report["target_class"]]
    fidelity = report["fidelity"]
    r2 = "degenerate" if fidelity["weighted_r2"] is None \
        else f"{fidelity['weighted_r2']:.4f}"
    print(f"target class: {target}")
    print(f"fidelity: weighted R2 = {r2}, "
          f"weighted accuracy = {fidelity['weighted_accuracy']:.4f}")
    if explanation["kind"] == "attribution":
        width = max((len(i["description"]) for i in explanation["items"]),
                    default=10)
        print(f"{'interpretable feature':<{width}}  attribution")
        for item in explanation["items"]:
            print(f"{item['description']:<{width}}  {item['value']:+.6f}")
    else:
        for item in explanation["items"]:
            marker = "*" if item["anchor_leaf"] else " "
            probs = ", ".join(f"{v:.3f}" for v in item["value"])
            print(f"{marker} {item['rule']}  ->  [{probs}]")


# ---------------------------------------------------------------- commands

def _cmd_explain(args):
    config = _load_config(args)
    dataset = _load_dataset(args)
    model = _load_model(args, dataset)
    try:
        anchor = _parse_instance(dataset, args.instance)
        result = run_explain(dataset, model, config, anchor, args.seed)
        report = build_report(result, dataset, model,
                              full_samples=args.full_report)
    finally:
        model.close()
    _write_canonical(args.out, report)
    _print_timings(result.timings)
    _print_explanation(report)
    return EXIT_OK


def _cmd_evaluate(args):
    config = _load_config(args)
    dataset = _load_dataset(args)
    seeds = _parse_seeds(args)
    top_k = args.top_k if args.top_k is not None \
        else config["evaluation"]["stability_k"]
    if top_k > dataset.n_features:
        sys.stderr.write(
            f"warning: top-k {top_k} exceeds the feature count "
            f"{dataset.n_features}; clamping (Jaccard will be 1.0)\n")
    model = _load_model(args, dataset)
    try:
        anchor = _parse_instance(dataset, args.instance)
        report = evaluation.stability(dataset, model, config, anchor, seeds,
                                      top_k=top_k)
    finally:
        model.close()
    doc = {"config": config, "config_fingerprint": fingerprint(config),
           "stability": report.to_dict()}
    _write_canonical(args.out, doc)
    width = max((len(d) for d in report.feature_descriptions), default=10)
    print(f"{'interpretable feature':<{width}}  attribution (mean ± std)")
    for desc, mean, std in zip(report.feature_descriptions,
                               report.attribution_mean,
                               report.attribution_std):
        print(f"{desc:<{width}}  {mean:+.6f} ± {std:.6f}")
    print(f"top-{report.top_k} Jaccard similarity: {report.jaccard_mean:.4f}")
    return EXIT_OK


def _cmd_global(args):
    dataset = _load_dataset(args)
    model = _load_model(args, dataset)
    try:
        if args.global_command == "perm-importance":
            labels = _load_labels(args.labels)
            result = global_explainers.permutation_importance(
                model, dataset, labels, n_repeats=args.repeats, seed=args.seed)
            _write_canonical(args.out, result.to_dict())
            print(f"baseline accuracy: {result.baseline_score:.4f}")
            width = max(len(f["name"]) for f in result.features)
            print(f"{'feature':<{width}}  importance (mean ± std drop)")
            for feature in result.features:
                print(f"{feature['name']:<{width}}  "
                      f"{feature['mean_drop']:+.6f} ± {feature['std_drop']:.6f}")
        else:
            target = args.target_class
            try:
                target = int(target)
            except ValueError:
                pass
            ice = global_explainers.ice_curves(
                model, dataset, args.feature, n_points=args.grid_points,
                target_class=target)
            if args.global_command == "ice":
                _write_canonical(args.out, ice.to_dict())
                print(f"ICE for '{ice.feature_name}': "
                      f"{ice.curves.shape[0]} instances x {len(ice.grid)} grid points")
            else:
                pd = global_explainers.partial_dependence(ice)
                _write_canonical(args.out, {"pd": pd.to_dict(),
                                            "ice": ice.to_dict()})
                print(f"PD for '{pd.feature_name}' over {len(pd.grid)} grid points")
                for g, v in zip(pd.grid, pd.values):
                    print(f"  {g:>12.6g}  {v:.6f}")
    finally:
        model.close()
    return EXIT_OK


def _cmd_serve(args):
    dataset = _load_dataset(args)
    model = _load_model(args, dataset)
    labels = _load_labels(args.labels) if args.labels else None
    port = args.port
    if port is None:
        port = int(os.environ.get("WORKBENCH_PORT", "8321"))
    try:
        server = make_server(dataset, model, port=port, labels=labels,
                             ui_dir=args.ui_dir)
    except OSError as exc:
        sys.stderr.write(f"cannot bind port {port}: {exc}\n")
        return EXIT_PORT_BUSY
    host, bound_port = server.server_address
    sys.stderr.write(f"workbench service on http://{host}:{bound_port}/ "
                     f"(api under /api)\n")
    try:
        server.serve_forever()
    except KeyboardInterrupt:
        pass
    finally:
        server.server_close()
        model.close()
    return EXIT_OK


def _cmd_verify(args):
    report = load_report(args.report)
    ok, checks = verify_report(report)
    for check in checks:
        print(check)
    return EXIT_OK if ok else EXIT_RUNTIME


def _cmd_model_serve(args):
    with open(args.model, "r", encoding="utf-8") as fh:
        spec = json.load(fh)
    return model_server.serve(spec)


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    handlers = {
        "explain": _cmd_explain,
        "evaluate": _cmd_evaluate,
        "global": _cmd_global,
        "serve": _cmd_serve,
        "verify": _cmd_verify,
        "model-serve": _cmd_model_serve,
    }
    try:
        return handlers[args.command](args)
    except ConfigError as exc:
        for violation in exc.violations:
            sys.stderr.write(f"invalid: {violation}\n")
        return EXIT_VALIDATION
    except PipelineError as exc:
        sys.stderr.write(f"error: {exc}\n")
        return EXIT_RUNTIME
    except (ParseError, SchemaError) as exc:
        # bad user inputs (dataset, instance, feature choice) are validation
        sys.stderr.write(f"invalid: {exc}\n")
        return EXIT_VALIDATION
    except (WorkbenchError, OSError) as exc:
        sys.stderr.write(f"error: {exc}\n")
        return EXIT_RUNTIME


if __name__ == "__main__":
    raise SystemExit(main())
