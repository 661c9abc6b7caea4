"""Explainer configuration: one defaults table, validation, fingerprints.

Every tunable in the workbench is declared once in FIELDS below.  The table
drives validation (ranges, kinds, defaulting), the /api/defaults payload the
browser workbench builds its controls from, and the README documentation.
Defaults are choices, so they all live here and nowhere else.
"""

from __future__ import annotations

import hashlib
import json
import re
from dataclasses import dataclass

import numpy as np

from .errors import ConfigError, ParseError

CONFIG_VERSION = 1


# ---------------------------------------------------------------- canonical

def jsonify(obj):
    """Recursively convert numpy scalars/arrays and normalize floats."""
    if isinstance(obj, dict):
        return {str(k): jsonify(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [jsonify(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [jsonify(v) for v in obj.tolist()]
    if isinstance(obj, (np.floating, float)):
        f = float(obj)
        if not np.isfinite(f):
            raise ValueError("non-finite number in canonical document")
        return 0.0 if f == 0.0 else f  # normalize -0.0
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.bool_,)):
        return bool(obj)
    return obj


def canonical_dumps(obj) -> str:
    """Canonical serialization: UTF-8, sorted keys, shortest float rendering."""
    return json.dumps(jsonify(obj), sort_keys=True, separators=(",", ":"),
                      ensure_ascii=False, allow_nan=False)


def canonical_bytes(obj) -> bytes:
    return canonical_dumps(obj).encode("utf-8")


def digest(obj) -> str:
    return hashlib.sha256(canonical_bytes(obj)).hexdigest()


# ---------------------------------------------------------------- field table

@dataclass(frozen=True)
class Field:
    path: str
    ftype: str           # int | float | enum | class_ref
    default: object
    label: str
    options: tuple = ()
    minimum: float | None = None
    maximum: float | None = None
    exclusive_min: bool = False
    step: float | None = None
    when: tuple | None = None  # (path, value) this field applies under

    def applies(self, config) -> bool:
        if self.when is None:
            return True
        section, key = self.when[0].split(".")
        return config.get(section, {}).get(key) == self.when[1]


FIELDS = (
    Field("representation.kind", "enum", "quartile", "Representation",
          options=("quartile", "tree")),
    Field("representation.max_depth", "int", 3, "Partition tree depth limit",
          minimum=0, maximum=10, when=("representation.kind", "tree")),
    Field("representation.min_leaf", "int", 5, "Partition min samples per leaf",
          minimum=1, maximum=1000, when=("representation.kind", "tree")),
    Field("representation.encode_mode", "enum", "one_hot", "Leaf encoding",
          options=("one_hot", "same_leaf"), when=("representation.kind", "tree")),

    Field("sampler.kind", "enum", "gaussian", "Sampler",
          options=("gaussian", "mixup")),
    Field("sampler.n_samples", "int", 1000, "Neighbourhood size",
          minimum=1, maximum=100000),
    Field("sampler.scale", "float", 1.0, "Gaussian scale multiplier",
          minimum=0.0, maximum=100.0, exclusive_min=True, step=0.05,
          when=("sampler.kind", "gaussian")),
    Field("sampler.center", "enum", "anchor", "Gaussian center",
          options=("anchor", "global_mean"), when=("sampler.kind", "gaussian")),
    Field("sampler.alpha", "float", 1.0, "Mixup Beta concentration",
          minimum=0.0, maximum=100.0, exclusive_min=True, step=0.05,
          when=("sampler.kind", "mixup")),

    Field("kernel.width", "float", 0.25, "Kernel width",
          minimum=0.0, maximum=100.0, exclusive_min=True, step=0.01),
    Field("kernel.metric", "enum", "gower_mixed", "Distance metric",
          options=("gower_mixed",)),
    Field("kernel.distance_domain", "enum", "original", "Distance domain",
          options=("original", "interpretable")),

    Field("selection.method", "enum", "none", "Feature selection",
          options=("none", "highest_weight", "forward_selection")),
    Field("selection.k", "int", 5, "Selected feature count",
          minimum=1, maximum=1000),

    Field("surrogate.kind", "enum", "linear", "Surrogate model",
          options=("linear", "tree")),
    Field("surrogate.ridge_lambda", "float", 0.01, "Ridge penalty",
          minimum=0.0, maximum=1000.0, step=0.001, when=("surrogate.kind", "linear")),
    Field("surrogate.target_class", "class_ref", None, "Target class",
          when=("surrogate.kind", "linear")),
    Field("surrogate.max_depth", "int", 3, "Surrogate tree depth limit",
          minimum=0, maximum=10, when=("surrogate.kind", "tree")),
    Field("surrogate.min_leaf", "int", 5, "Surrogate min samples per leaf",
          minimum=1, maximum=1000, when=("surrogate.kind", "tree")),
    Field("surrogate.input_domain", "enum", "interpretable", "Surrogate tree input",
          options=("interpretable", "raw"), when=("surrogate.kind", "tree")),

    Field("evaluation.stability_k", "int", 3, "Stability top-k",
          minimum=1, maximum=1000),
    Field("evaluation.stability_seeds", "int", 5, "Stability seed count",
          minimum=2, maximum=1000),
)

SECTIONS = ("representation", "sampler", "kernel", "selection", "surrogate",
            "evaluation")

_KIND_FIELDS = {f.path: f for f in FIELDS if f.path.endswith(".kind")}


def default_config() -> dict:
    config, violations = validate({})
    assert not violations
    return config


def field_table() -> list:
    """Field metadata for the /api/defaults payload (schema-driven UI)."""
    out = []
    for f in FIELDS:
        entry = {"path": f.path, "type": f.ftype, "default": f.default,
                 "label": f.label}
        if f.options:
            entry["options"] = list(f.options)
        if f.minimum is not None:
            entry["min"] = f.minimum
            entry["exclusive_min"] = f.exclusive_min
        if f.maximum is not None:
            entry["max"] = f.maximum
        if f.step is not None:
            entry["step"] = f.step
        if f.when is not None:
            entry["when"] = {"path": f.when[0], "equals": f.when[1]}
        out.append(entry)
    return out


# ---------------------------------------------------------------- validation

def _coerce(field: Field, value, violations):
    path = field.path
    if field.ftype == "int":
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            violations.append(f"{path} must be an integer")
            return None
        if isinstance(value, float):
            if not value.is_integer():
                violations.append(f"{path} must be an integer")
                return None
            value = int(value)
    elif field.ftype == "float":
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            violations.append(f"{path} must be a number")
            return None
        value = float(value)
        if not np.isfinite(value):
            violations.append(f"{path} must be finite")
            return None
        if value == 0.0:
            value = 0.0
    elif field.ftype == "enum":
        if value not in field.options:
            violations.append(
                f"{path} must be one of {', '.join(field.options)}")
            return None
        return value
    elif field.ftype == "class_ref":
        if value is not None and not isinstance(value, str) \
                and (isinstance(value, bool) or not isinstance(value, int)):
            violations.append(f"{path} must be null, a class index or a class name")
            return None
        if isinstance(value, int) and value < 0:
            violations.append(f"{path} must be >= 0 when given as an index")
            return None
        return value

    if field.minimum is not None:
        if field.exclusive_min and not value > field.minimum:
            violations.append(f"{path} must be > {field.minimum:g}")
            return None
        if not field.exclusive_min and value < field.minimum:
            violations.append(f"{path} must be >= {field.minimum:g}")
            return None
    if field.maximum is not None and value > field.maximum:
        violations.append(f"{path} must be <= {field.maximum:g}")
        return None
    return value


def validate(document):
    """Validate a config document; returns (config, violations).

    All violations are collected in one pass; config is None when any were
    found.  Absent optional fields are filled from the defaults table, so the
    empty document yields the fully defaulted runnable config.
    """
    violations = []
    if not isinstance(document, dict):
        return None, ["config document must be an object"]

    version = document.get("version", CONFIG_VERSION)
    if version != CONFIG_VERSION:
        violations.append(f"version must be {CONFIG_VERSION}")

    known = set(SECTIONS) | {"version"}
    for key in document:
        if key not in known:
            violations.append(f"unknown config section '{key}'")

    config = {"version": CONFIG_VERSION}
    sections = {}
    for name in SECTIONS:
        raw = document.get(name, {})
        if not isinstance(raw, dict):
            violations.append(f"{name} must be an object")
            raw = {}
        sections[name] = raw
        config[name] = {}

    # resolve kind discriminators first; other fields depend on them
    for path, field in _KIND_FIELDS.items():
        section, key = path.split(".")
        value = sections[section].get(key, field.default)
        coerced = _coerce(field, value, violations)
        config[section][key] = coerced if coerced is not None else field.default

    field_paths = set()
    for field in FIELDS:
        section, key = field.path.split(".")
        field_paths.add(field.path)
        if field.path in _KIND_FIELDS:
            continue
        present = key in sections[section]
        if not field.applies(config):
            if present:
                violations.append(
                    f"{field.path} only applies when {field.when[0]} = {field.when[1]}")
            continue
        value = sections[section][key] if present else field.default
        coerced = _coerce(field, value, violations)
        if coerced is not None or (field.ftype == "class_ref" and value is None):
            config[section][key] = coerced

    for name in SECTIONS:
        for key in sections[name]:
            if f"{name}.{key}" not in field_paths:
                violations.append(f"unknown config field '{name}.{key}'")

    # cross-module consistency: one-hot leaf bits are bounded by 2^max_depth
    rep, sel = config["representation"], config["selection"]
    if rep.get("kind") == "tree" and rep.get("encode_mode") == "one_hot" \
            and sel.get("method") == "highest_weight":
        max_leaves = 2 ** rep.get("max_depth", 0)
        if sel.get("k", 1) > max_leaves:
            violations.append(
                "selection.k exceeds the maximum leaf count "
                f"2^representation.max_depth = {max_leaves} under one_hot encoding")

    if violations:
        return None, violations
    return config, []


def validate_or_raise(document) -> dict:
    config, violations = validate(document)
    if violations:
        raise ConfigError(violations)
    return config


def fingerprint(config) -> str:
    """64-hex digest of the canonical serialization of a validated config."""
    return digest(config)


# ---------------------------------------------------------------- documents

def loads_config_document(text: str, fmt: str = "json") -> dict:
    if fmt == "toml":
        return _parse_toml_min(text)
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"invalid JSON config: {exc}") from None


def load_config_file(path) -> dict:
    fmt = "toml" if str(path).endswith(".toml") else "json"
    with open(path, "r", encoding="utf-8") as fh:
        return loads_config_document(fh.read(), fmt)


_BARE_KEY = re.compile(r"^[A-Za-z0-9_\-]+$")


def _toml_scalar(token: str, lineno: int):
    token = token.strip()
    if token.startswith('"') and token.endswith('"') and len(token) >= 2:
        body = token[1:-1]
        return body.replace('\\"', '"').replace("\\\\", "\\") \
                   .replace("\\n", "\n").replace("\\t", "\t")
    if token == "true":
        return True
    if token == "false":
        return False
    try:
        return int(token)
    except ValueError:
        pass
    try:
        return float(token)
    except ValueError:
        raise ParseError(f"TOML line {lineno}: cannot parse value '{token}'") from None


def _split_commas(body: str):
    parts, depth, quoted, cur = [], 0, False, []
    for ch in body:
        if ch == '"':
            quoted = not quoted
        if not quoted:
            if ch == "[":
                depth += 1
            elif ch == "]":
                depth -= 1
            elif ch == "," and depth == 0:
                parts.append("".join(cur))
                cur = []
                continue
        cur.append(ch)
    tail = "".join(cur).strip()
    if tail:
        parts.append(tail)
    return parts


def _toml_value(token: str, lineno: int):
    token = token.strip()
    if token.startswith("[") and token.endswith("]"):
        return [_toml_value(p, lineno) for p in _split_commas(token[1:-1])]
    return _toml_scalar(token, lineno)


def _parse_toml_min(text: str) -> dict:
    """Minimal TOML subset covering the config grammar.

    Supports [table] / [a.b] headers, key = value with dotted keys, strings,
    integers, floats, booleans and flat arrays.  Full TOML is out of scope: the
    stdlib gained tomllib only in 3.11 and configs never need more than this.
    """
    root: dict = {}
    table = root
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if line.startswith("["):
            if not line.endswith("]"):
                raise ParseError(f"TOML line {lineno}: malformed table header")
            table = root
            for part in line[1:-1].strip().split("."):
                part = part.strip()
                if not _BARE_KEY.match(part):
                    raise ParseError(f"TOML line {lineno}: bad table name '{part}'")
                table = table.setdefault(part, {})
            continue
        if "=" not in line:
            raise ParseError(f"TOML line {lineno}: expected key = value")
        key, _, value = line.partition("=")
        # strip trailing comments outside quotes
        out, quoted = [], False
        for ch in value:
            if ch == '"':
                quoted = not quoted
            if ch == "#" and not quoted:
                break
            out.append(ch)
        value = "".join(out)
        target = table
        key_parts = [p.strip() for p in key.strip().split(".")]
        for part in key_parts[:-1]:
            if not _BARE_KEY.match(part):
                raise ParseError(f"TOML line {lineno}: bad key '{part}'")
            target = target.setdefault(part, {})
        leaf = key_parts[-1]
        if not _BARE_KEY.match(leaf):
            raise ParseError(f"TOML line {lineno}: bad key '{leaf}'")
        target[leaf] = _toml_value(value, lineno)
    return root
