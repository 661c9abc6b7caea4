"""HTTP service exposing the explain pipeline to the browser workbench.

Six JSON endpoints under /api (versioned envelopes), plus static serving of
the built UI.  The dataset and model are loaded once and shared immutably
across requests; every computing endpoint revalidates the posted config and
answers with the fingerprint it computed for.  Responses are canonical JSON,
so identical request bodies produce byte-identical responses.
"""

from __future__ import annotations

import json
import mimetypes
import sys
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer
from pathlib import Path
from urllib.parse import parse_qs, urlparse

import numpy as np

from . import evaluation, global_explainers
from .config import canonical_bytes, default_config, field_table, fingerprint, \
    validate
from .blackbox import schema_to_wire
from .data import summarize
from .errors import ConfigError, PipelineError, WorkbenchError
from .pipeline import run_explain
from .report import build_report

API_VERSION = 1


class WorkbenchState:
    """Immutable shared state: one dataset, one model, optional labels."""

    def __init__(self, dataset, model, labels=None, ui_dir=None):
        self.dataset = dataset
        self.model = model
        self.labels = labels
        self.ui_dir = Path(ui_dir) if ui_dir else None


def _error_body(stage, message, fingerprint_hex=None):
    return {"version": API_VERSION, "fingerprint": fingerprint_hex,
            "error": {"stage": stage, "message": message}}


class WorkbenchHandler(BaseHTTPRequestHandler):
    protocol_version = "HTTP/1.1"
    server_version = "surrobench"

    # -- plumbing ------------------------------------------------------

    @property
    def state(self) -> WorkbenchState:
        return self.server.state

    def log_message(self, fmt, *args):
        sys.stderr.write("[service] %s\n" % (fmt % args))

    def _send_json(self, payload, status=200):
        body = canonical_bytes(payload)
        self.send_response(status)
        self.send_header("Content-Type", "application/json; charset=utf-8")
        self.send_header("Content-Length", str(len(body)))
        self.send_header("Access-Control-Allow-Origin", "*")
        self.end_headers()
        self.wfile.write(body)

    def _read_body(self):
        length = int(self.headers.get("Content-Length", 0))
        raw = self.rfile.read(length) if length else b"{}"
        try:
            body = json.loads(raw)
        except json.JSONDecodeError:
            raise ValueError("request body is not valid JSON") from None
        if not isinstance(body, dict):
            raise ValueError("request body must be a JSON object")
        return body

    def _validated_config(self, body):
        config, violations = validate(body.get("config", {}))
        if violations:
            raise ConfigError(violations)
        return config

    def _anchor(self, body):
        instance = body.get("instance", 0)
        if isinstance(instance, list):
            return self.state.dataset.instance_from_cells(instance)
        return self.state.dataset.instance(int(instance))

    # -- routes ----------------------------------------------------------

    def do_GET(self):
        parsed = urlparse(self.path)
        try:
            if parsed.path == "/api/summary":
                self._send_json({"version": API_VERSION, "fingerprint": None,
                                 "summary": summarize(self.state.dataset)})
            elif parsed.path == "/api/instances":
                query = parse_qs(parsed.query)
                offset = int(query.get("offset", ["0"])[0])
                limit = int(query.get("limit", ["50"])[0])
                offset = max(0, offset)
                limit = max(0, min(limit, 1000))
                dataset = self.state.dataset
                rows = [dataset.decode_row(r)
                        for r in dataset.values[offset:offset + limit]]
                self._send_json({
                    "version": API_VERSION, "fingerprint": None,
                    "offset": offset, "limit": limit,
                    "total": dataset.n_rows,
                    "feature_names": dataset.feature_names,
                    "rows": rows})
            elif parsed.path == "/api/defaults":
                self._send_json({
                    "version": API_VERSION, "fingerprint": None,
                    "defaults": default_config(),
                    "fields": field_table(),
                    "class_names": list(self.state.model.class_names),
                    "schema": schema_to_wire(self.state.dataset.schema),
                    "row_count": self.state.dataset.n_rows})
            else:
                self._serve_static(parsed.path)
        except WorkbenchError as exc:
            self._send_json(_error_body("request", str(exc)), status=400)

    def do_POST(self):
        parsed = urlparse(self.path)
        try:
            body = self._read_body()
        except ValueError as exc:
            self._send_json(_error_body("parse", str(exc)), status=400)
            return
        try:
            if parsed.path == "/api/explain":
                self._handle_explain(body)
            elif parsed.path == "/api/stability":
                self._handle_stability(body)
            elif parsed.path == "/api/global/perm":
                self._handle_perm(body)
            elif parsed.path == "/api/global/ice":
                self._handle_ice(body)
            elif parsed.path == "/api/global/pd":
                self._handle_pd(body)
            else:
                self._send_json(_error_body("route", f"no such endpoint "
                                            f"{parsed.path}"), status=404)
        except ConfigError as exc:
            self._send_json(_error_body("validate", str(exc)), status=400)
        except PipelineError as exc:
            self._send_json(_error_body(exc.stage, str(exc.cause)), status=400)
        except WorkbenchError as exc:
            self._send_json(_error_body("request", str(exc)), status=400)
        except Exception as exc:  # noqa: BLE001 - structured 500 body
            self._send_json(_error_body("internal", repr(exc)), status=500)

    # -- endpoint bodies ---------------------------------------------------

    def _handle_explain(self, body):
        config = self._validated_config(body)
        anchor = self._anchor(body)
        seed = int(body.get("seed", 0))
        result = run_explain(self.state.dataset, self.state.model, config,
                             anchor, seed)
        report = build_report(result, self.state.dataset, self.state.model,
                              full_samples=bool(body.get("full_report", False)))
        timing = " ".join(f"{k}={v * 1000:.1f}ms"
                          for k, v in result.timings.items())
        self.log_message("explain seed=%s %s", seed, timing)
        self._send_json({"version": API_VERSION,
                         "fingerprint": result.config_fingerprint,
                         "report": report})

    def _handle_stability(self, body):
        config = self._validated_config(body)
        anchor = self._anchor(body)
        seeds = body.get("seeds")
        if seeds is None:
            seeds = config["evaluation"]["stability_seeds"]
        if isinstance(seeds, int):
            base = int(body.get("seed", 0))
            seeds = list(range(base, base + seeds))
        if not isinstance(seeds, list):
            raise ConfigError(["stability needs 'seeds': a list or a count"])
        top_k = body.get("top_k")
        report = evaluation.stability(self.state.dataset, self.state.model,
                                      config, anchor, seeds, top_k=top_k)
        self._send_json({"version": API_VERSION,
                         "fingerprint": fingerprint(config),
                         "stability": report.to_dict()})

    def _handle_perm(self, body):
        if self.state.labels is None:
            raise ConfigError(["permutation importance needs labels; start the "
                               "service with --labels <file>"])
        result = global_explainers.permutation_importance(
            self.state.model, self.state.dataset, self.state.labels,
            n_repeats=int(body.get("n_repeats", 10)),
            seed=int(body.get("seed", 0)))
        self._send_json({"version": API_VERSION, "fingerprint": None,
                         "permutation_importance": result.to_dict()})

    def _handle_ice(self, body):
        ice = self._compute_ice(body)
        self._send_json({"version": API_VERSION, "fingerprint": None,
                         "ice": ice.to_dict()})

    def _handle_pd(self, body):
        ice = self._compute_ice(body)
        pd = global_explainers.partial_dependence(ice)
        self._send_json({"version": API_VERSION, "fingerprint": None,
                         "pd": pd.to_dict(), "ice": ice.to_dict()})

    def _compute_ice(self, body):
        if "feature" not in body:
            raise ConfigError(["ice/pd need a 'feature'"])
        grid = body.get("grid")
        if grid is not None:
            grid = np.asarray(grid, dtype=np.float64)
        return global_explainers.ice_curves(
            self.state.model, self.state.dataset, body["feature"],
            grid=grid, n_points=int(body.get("grid_points", 20)),
            target_class=body.get("target_class", 0))

    # -- static UI ----------------------------------------------------------

    def _serve_static(self, path):
        if self.state.ui_dir is None:
            self._send_json(_error_body(
                "route", "no UI assets configured (start with --ui-dir)"),
                status=404)
            return
        rel = path.lstrip("/") or "index.html"
        target = (self.state.ui_dir / rel).resolve()
        root = self.state.ui_dir.resolve()
        if not str(target).startswith(str(root)) or not target.is_file():
            self._send_json(_error_body("route", f"not found: {path}"),
                            status=404)
            return
        content_type = mimetypes.guess_type(str(target))[0] or "application/octet-stream"
        body = target.read_bytes()
        self.send_response(200)
        self.send_header("Content-Type", content_type)
        self.send_header("Content-Length", str(len(body)))
        self.end_headers()
        self.wfile.write(body)


def make_server(dataset, model, port=0, labels=None, ui_dir=None) -> ThreadingHTTPServer:
    """Bind the workbench service; raises OSError when the port is busy."""
    server = ThreadingHTTPServer(("127.0.0.1", port), WorkbenchHandler)
    server.state = WorkbenchState(dataset, model, labels=labels, ui_dir=ui_dir)
    return server
