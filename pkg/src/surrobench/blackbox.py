"""Uniform probabilistic-prediction interface over black-box models.

Built-in reference models (linear softmax, ordered rules, k-NN) are pure
deterministic functions; arbitrary external models attach through a
line-delimited JSON subprocess protocol or an HTTP POST endpoint.  Everything
downstream sees only `predict_proba(rows) -> (n, n_classes)` probabilities.
"""

from __future__ import annotations

import json
import select
import shlex
import subprocess
import threading
import urllib.error
import urllib.request

import numpy as np

from .config import canonical_dumps, digest
from .data import FeatureSpec
from .errors import ProtocolError, SchemaError, TransportError

_ROW_SUM_TOL = 1e-6


def _check_rows(schema, rows) -> np.ndarray:
    rows = np.asarray(rows, dtype=np.float64)
    if rows.ndim == 1:
        rows = rows.reshape(1, -1)
    if rows.ndim != 2 or rows.shape[1] != len(schema):
        raise SchemaError(
            f"rows must be (n, {len(schema)}), got shape {rows.shape}")
    if np.isnan(rows).any():
        raise SchemaError("rows contain NaN")
    for j, spec in enumerate(schema):
        if not spec.is_numeric:
            col = rows[:, j]
            if not np.all((col == np.floor(col)) & (col >= 0)
                          & (col < len(spec.categories))):
                raise SchemaError(
                    f"feature '{spec.name}': category id outside category set")
    return rows


def schema_to_wire(schema) -> list:
    out = []
    for spec in schema:
        entry = {"name": spec.name, "kind": spec.kind}
        if not spec.is_numeric:
            entry["categories"] = list(spec.categories)
        out.append(entry)
    return out


def schema_from_wire(doc) -> tuple:
    return tuple(
        FeatureSpec(name=e["name"], kind=e["kind"],
                    categories=tuple(e.get("categories", ())))
        for e in doc)


def rows_to_wire(schema, rows) -> list:
    wire = []
    for row in np.asarray(rows, dtype=np.float64):
        cells = []
        for j, spec in enumerate(schema):
            cells.append(float(row[j]) if spec.is_numeric
                         else spec.categories[int(row[j])])
        wire.append(cells)
    return wire


def rows_from_wire(schema, rows) -> np.ndarray:
    out = np.empty((len(rows), len(schema)))
    for i, row in enumerate(rows):
        if len(row) != len(schema):
            raise SchemaError(f"wire row {i} has {len(row)} cells, "
                              f"schema has {len(schema)}")
        for j, spec in enumerate(schema):
            if spec.is_numeric:
                out[i, j] = float(row[j])
            else:
                cell = row[j]
                if cell not in spec.categories:
                    raise SchemaError(
                        f"feature '{spec.name}': unknown category '{cell}'")
                out[i, j] = spec.categories.index(cell)
    return out


class BlackBoxModel:
    """Base handle; subclasses implement _predict on validated rows."""

    kind = "abstract"

    def __init__(self, class_names, schema):
        class_names = list(class_names)
        if len(class_names) < 2:
            raise SchemaError("black-box models need at least 2 classes")
        if len(set(class_names)) != len(class_names):
            raise SchemaError("duplicate class names")
        self.class_names = class_names
        self.schema = tuple(schema)

    @property
    def n_classes(self):
        return len(self.class_names)

    def class_index(self, name_or_index):
        if isinstance(name_or_index, int):
            if not 0 <= name_or_index < self.n_classes:
                raise SchemaError(f"class index {name_or_index} out of range")
            return name_or_index
        try:
            return self.class_names.index(name_or_index)
        except ValueError:
            raise SchemaError(f"unknown class '{name_or_index}'") from None

    def predict_proba(self, rows) -> np.ndarray:
        rows = _check_rows(self.schema, rows)
        proba = self._predict(rows)
        proba = np.asarray(proba, dtype=np.float64)
        if proba.shape != (rows.shape[0], self.n_classes):
            raise ProtocolError(
                f"probability matrix shape {proba.shape} != "
                f"({rows.shape[0]}, {self.n_classes})")
        return proba

    def _predict(self, rows):
        raise NotImplementedError

    def descriptor(self) -> dict:
        return {"kind": self.kind, "classes": list(self.class_names)}

    def close(self):
        pass

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self.close()
        return False


class LinearSoftmaxModel(BlackBoxModel):
    """softmax(W x + b) over the numeric encoding of a row.

    The numeric encoding keeps numeric features as-is and one-hot expands
    categorical features, so W has one column per encoded feature.
    """

    kind = "builtin_linear_softmax"

    def __init__(self, class_names, schema, weights, bias):
        super().__init__(class_names, schema)
        self.weights = np.asarray(weights, dtype=np.float64)
        self.bias = np.asarray(bias, dtype=np.float64)
        width = encoded_width(self.schema)
        if self.weights.shape != (self.n_classes, width):
            raise SchemaError(
                f"weight matrix must be ({self.n_classes}, {width}), "
                f"got {self.weights.shape}")
        if self.bias.shape != (self.n_classes,):
            raise SchemaError(f"bias must have {self.n_classes} entries")

    def _predict(self, rows):
        scores = encode_numeric(self.schema, rows) @ self.weights.T + self.bias
        scores -= scores.max(axis=1, keepdims=True)
        exp = np.exp(scores)
        return exp / exp.sum(axis=1, keepdims=True)


def encoded_width(schema) -> int:
    return sum(1 if s.is_numeric else len(s.categories) for s in schema)


def encode_numeric(schema, rows) -> np.ndarray:
    """Rows in internal form -> dense numeric matrix (one-hot categoricals)."""
    rows = np.asarray(rows, dtype=np.float64)
    cols = []
    for j, spec in enumerate(schema):
        if spec.is_numeric:
            cols.append(rows[:, j:j + 1])
        else:
            onehot = np.zeros((rows.shape[0], len(spec.categories)))
            onehot[np.arange(rows.shape[0]), rows[:, j].astype(np.int64)] = 1.0
            cols.append(onehot)
    return np.hstack(cols)


_NUMERIC_OPS = {
    ">": np.greater, ">=": np.greater_equal,
    "<": np.less, "<=": np.less_equal,
    "==": np.equal,
}


class RuleModel(BlackBoxModel):
    """Ordered condition -> class rules with a default class; hard 0/1 output."""

    kind = "builtin_rule"

    def __init__(self, class_names, schema, rules, default_class):
        super().__init__(class_names, schema)
        self.default_index = self.class_index(default_class)
        self.rules = []
        for rule in rules:
            j = self._feature_index(rule["feature"])
            op = rule["op"]
            spec = self.schema[j]
            if spec.is_numeric:
                if op not in _NUMERIC_OPS:
                    raise SchemaError(f"unknown numeric op '{op}'")
                value = float(rule["value"])
            else:
                if op != "==":
                    raise SchemaError("categorical rules support only '=='")
                value = rule["value"]
                if value not in spec.categories:
                    raise SchemaError(
                        f"rule value '{value}' not a category of '{spec.name}'")
                value = float(spec.categories.index(value))
            self.rules.append((j, op, value, self.class_index(rule["class"])))

    def _feature_index(self, ref):
        if isinstance(ref, int):
            if not 0 <= ref < len(self.schema):
                raise SchemaError(f"rule feature index {ref} out of range")
            return ref
        for j, spec in enumerate(self.schema):
            if spec.name == ref:
                return j
        raise SchemaError(f"rule references unknown feature '{ref}'")

    def _predict(self, rows):
        n = rows.shape[0]
        assigned = np.full(n, -1, dtype=np.int64)
        for j, op, value, class_ix in self.rules:
            hit = _NUMERIC_OPS[op](rows[:, j], value) & (assigned < 0)
            assigned[hit] = class_ix
        assigned[assigned < 0] = self.default_index
        proba = np.zeros((n, self.n_classes))
        proba[np.arange(n), assigned] = 1.0
        return proba


class KnnModel(BlackBoxModel):
    """k nearest neighbours under the repo's Gower-style mixed distance.

    Neighbour order is (distance, class index of the label, row index), so
    equidistant ties resolve to the lowest class index deterministically.
    """

    kind = "builtin_knn"

    def __init__(self, class_names, schema, k, train_rows, train_labels):
        super().__init__(class_names, schema)
        self.train_rows = _check_rows(self.schema, train_rows)
        labels = [self.class_index(l) for l in train_labels]
        if len(labels) != self.train_rows.shape[0]:
            raise SchemaError("training labels must align with training rows")
        self.train_labels = np.asarray(labels, dtype=np.int64)
        if not 1 <= k <= self.train_rows.shape[0]:
            raise SchemaError("k must be in [1, #training rows]")
        self.k = int(k)
        self._ranges = np.array([
            (self.train_rows[:, j].max() - self.train_rows[:, j].min())
            if spec.is_numeric else 0.0
            for j, spec in enumerate(self.schema)])

    def _predict(self, rows):
        from .explain import mixed_distance_matrix
        dist = mixed_distance_matrix(self.schema, self._ranges,
                                     rows, self.train_rows)
        n = rows.shape[0]
        proba = np.zeros((n, self.n_classes))
        order_key = np.arange(self.train_rows.shape[0])
        for i in range(n):
            order = sorted(order_key,
                           key=lambda t: (dist[i, t], self.train_labels[t], t))
            votes = np.bincount(self.train_labels[order[:self.k]],
                                minlength=self.n_classes)
            proba[i] = votes / self.k
        return proba


# ------------------------------------------------------------------ external

class _LineChannel:
    """Line-delimited JSON over a child process's standard streams."""

    def __init__(self, command, timeout=30.0):
        self.command = command
        self.timeout = timeout
        try:
            self.proc = subprocess.Popen(
                shlex.split(command), stdin=subprocess.PIPE,
                stdout=subprocess.PIPE, stderr=subprocess.PIPE)
        except OSError as exc:
            raise TransportError(f"cannot start '{command}': {exc}") from None

    def _stderr_excerpt(self):
        try:
            data = self.proc.stderr.read() or b""
        except Exception:
            return ""
        return data.decode("utf-8", "replace").strip()[-2000:]

    def request(self, message: dict) -> dict:
        payload = (canonical_dumps(message) + "\n").encode("utf-8")
        try:
            self.proc.stdin.write(payload)
            self.proc.stdin.flush()
        except (BrokenPipeError, OSError):
            raise TransportError(
                f"model process died: {self._stderr_excerpt()}") from None
        line = self._readline()
        try:
            return json.loads(line)
        except json.JSONDecodeError:
            raise ProtocolError(
                f"model sent invalid JSON: {line[:200]!r}") from None

    def _readline(self) -> bytes:
        out = bytearray()
        fd = self.proc.stdout.fileno()
        while True:
            ready, _, _ = select.select([fd], [], [], self.timeout)
            if not ready:
                self.proc.kill()
                raise TransportError(
                    f"model timed out after {self.timeout}s: "
                    f"{self._stderr_excerpt()}")
            chunk = self.proc.stdout.read1(65536)
            if not chunk:
                raise TransportError(
                    f"model process exited: {self._stderr_excerpt()}")
            out.extend(chunk)
            if b"\n" in chunk:
                break
        return bytes(out.split(b"\n", 1)[0])

    def close(self):
        if self.proc.poll() is None:
            try:
                self.proc.stdin.write(b'{"op":"shutdown"}\n')
                self.proc.stdin.flush()
                self.proc.stdin.close()
                self.proc.wait(timeout=5)
            except (OSError, subprocess.TimeoutExpired):
                self.proc.kill()
        for stream in (self.proc.stdin, self.proc.stdout, self.proc.stderr):
            try:
                if stream:
                    stream.close()
            except OSError:
                pass


def _repair_probabilities(raw, n_rows, n_classes) -> np.ndarray:
    proba = np.asarray(raw, dtype=np.float64)
    if proba.shape != (n_rows, n_classes):
        raise ProtocolError(
            f"expected probabilities of shape ({n_rows}, {n_classes}), "
            f"got {proba.shape}")
    if np.isnan(proba).any():
        raise ProtocolError("probabilities contain NaN")
    if (proba < -1e-9).any():
        raise ProtocolError("negative probability in model response")
    if (proba < 0).any():
        proba = np.clip(proba, 0.0, None)
    sums = proba.sum(axis=1)
    off = np.abs(sums - 1.0)
    bad = off > _ROW_SUM_TOL
    if bad.any():
        raise ProtocolError(
            f"probability row sums off by more than {_ROW_SUM_TOL:g} "
            f"(worst: {sums[bad][0]!r})")
    # renormalize serialization drift, but leave honest float rounding (a few
    # ulps) untouched so wrapping a builtin stays bitwise round-trippable
    needs_fix = off > 1e-12
    if needs_fix.any():
        proba = proba.copy()
        proba[needs_fix] /= sums[needs_fix, None]
    return proba


class ExternalProcessModel(BlackBoxModel):
    kind = "external_process"

    def __init__(self, class_names, schema, command, timeout=30.0):
        super().__init__(class_names, schema)
        self.command = command
        self._lock = threading.Lock()
        self._channel = _LineChannel(command, timeout=timeout)
        reply = self._channel.request({
            "op": "handshake",
            "schema": schema_to_wire(self.schema),
            "classes": list(self.class_names),
        })
        if reply.get("ok") is not True:
            self._channel.close()
            if "error" in reply:
                raise ProtocolError(f"handshake rejected: {reply['error']}")
            raise ProtocolError(f"handshake failed: {reply!r}")

    def _predict(self, rows):
        with self._lock:
            reply = self._channel.request({
                "op": "predict",
                "rows": rows_to_wire(self.schema, rows),
            })
        if "probabilities" not in reply:
            raise ProtocolError(f"predict reply missing probabilities: {reply!r}")
        return _repair_probabilities(reply["probabilities"],
                                     rows.shape[0], self.n_classes)

    def descriptor(self):
        return {"kind": self.kind, "classes": list(self.class_names),
                "command": self.command}

    def close(self):
        self._channel.close()


class ExternalHttpModel(BlackBoxModel):
    kind = "external_http"

    def __init__(self, class_names, schema, url, timeout=30.0):
        super().__init__(class_names, schema)
        if not url.startswith(("http://", "https://")):
            raise TransportError(f"malformed URL '{url}'")
        self.url = url if url.rstrip("/").endswith("/predict") \
            else url.rstrip("/") + "/predict"
        self.timeout = timeout
        self._lock = threading.Lock()

    def _predict(self, rows):
        body = canonical_dumps({"rows": rows_to_wire(self.schema, rows)})
        request = urllib.request.Request(
            self.url, data=body.encode("utf-8"),
            headers={"Content-Type": "application/json"})
        with self._lock:
            try:
                with urllib.request.urlopen(request, timeout=self.timeout) as resp:
                    payload = resp.read()
            except urllib.error.URLError as exc:
                raise TransportError(f"HTTP model unreachable: {exc}") from None
        try:
            reply = json.loads(payload)
        except json.JSONDecodeError:
            raise ProtocolError("HTTP model returned invalid JSON") from None
        if "probabilities" not in reply:
            raise ProtocolError("HTTP reply missing probabilities")
        return _repair_probabilities(reply["probabilities"],
                                     rows.shape[0], self.n_classes)

    def descriptor(self):
        return {"kind": self.kind, "classes": list(self.class_names),
                "url": self.url}


# ------------------------------------------------------------------ builders

_KIND_ALIASES = {
    "linear_softmax": "builtin_linear_softmax",
    "rule": "builtin_rule",
    "knn": "builtin_knn",
}


def from_spec(spec: dict, schema) -> BlackBoxModel:
    """Build a model handle from a model spec document."""
    if "kind" not in spec:
        raise SchemaError("model spec needs a 'kind'")
    kind = _KIND_ALIASES.get(spec["kind"], spec["kind"])
    classes = spec.get("classes")
    if classes is None:
        raise SchemaError("model spec needs a 'classes' list")
    if kind == "builtin_linear_softmax":
        model = LinearSoftmaxModel(classes, schema,
                                   spec["weights"], spec["bias"])
    elif kind == "builtin_rule":
        model = RuleModel(classes, schema, spec.get("rules", ()),
                          spec["default"])
    elif kind == "builtin_knn":
        rows = rows_from_wire(schema, spec["rows"])
        model = KnnModel(classes, schema, spec["k"], rows, spec["labels"])
    elif kind == "external_process":
        model = ExternalProcessModel(classes, schema, spec["command"],
                                     timeout=spec.get("timeout", 30.0))
    elif kind == "external_http":
        model = ExternalHttpModel(classes, schema, spec["url"],
                                  timeout=spec.get("timeout", 30.0))
    else:
        raise SchemaError(f"unknown model kind '{spec['kind']}'")
    model.spec_digest = digest({k: v for k, v in spec.items()})
    return model


def open_external(command_or_url: str, class_names, schema) -> BlackBoxModel:
    """Attach an external model by command line or URL."""
    if command_or_url.startswith(("http://", "https://")):
        return ExternalHttpModel(class_names, schema, command_or_url)
    return ExternalProcessModel(class_names, schema, command_or_url)


def describe(model: BlackBoxModel) -> dict:
    doc = model.descriptor()
    if getattr(model, "spec_digest", None):
        doc["spec_digest"] = model.spec_digest
    return doc
