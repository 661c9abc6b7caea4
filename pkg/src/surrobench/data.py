"""Tabular dataset ingestion, schema typing and per-feature statistics.

A loaded dataset is immutable: every downstream block (discretisation,
sampling, distances) reads the same schema and statistics.  Categorical cells
are stored as integer category ids inside one float64 matrix so that all
numeric machinery can operate on a single array; ids are decoded back to
category strings at every external boundary.
"""

from __future__ import annotations

import csv
import hashlib
import io
import re
from dataclasses import dataclass

import numpy as np

from .errors import ParseError, SchemaError

NUMERIC = "numeric"
CATEGORICAL = "categorical"

_DECIMAL_RE = re.compile(r"^[+-]?(\d+\.?\d*|\.\d+)([eE][+-]?\d+)?$")


def _parse_decimal(cell: str):
    """Finite decimal number or None.

    Stricter than float(): rejects 'nan', 'inf', hex forms and underscore
    separators, which should all infer as categorical.
    """
    if not _DECIMAL_RE.match(cell.strip()):
        return None
    return float(cell)


@dataclass(frozen=True)
class FeatureSpec:
    name: str
    kind: str
    categories: tuple = ()

    def __post_init__(self):
        if self.kind not in (NUMERIC, CATEGORICAL):
            raise SchemaError(f"feature '{self.name}': unknown kind '{self.kind}'")
        if self.kind == CATEGORICAL:
            if not self.categories:
                raise SchemaError(f"feature '{self.name}': empty category set")
            if len(set(self.categories)) != len(self.categories):
                raise SchemaError(f"feature '{self.name}': duplicate categories")

    @property
    def is_numeric(self):
        return self.kind == NUMERIC


@dataclass(frozen=True)
class ExplainedInstance:
    """The data point whose black-box prediction is being explained."""

    values: np.ndarray
    row_ref: int | None = None


class TabularDataset:
    """Schema-typed feature matrix with per-feature summary statistics."""

    def __init__(self, schema, values, source_digest=None):
        schema = tuple(schema)
        names = [f.name for f in schema]
        if len(set(names)) != len(names):
            raise SchemaError("duplicate feature names in schema")
        values = np.asarray(values, dtype=np.float64)
        if values.ndim != 2 or values.shape[1] != len(schema):
            raise SchemaError("rows must have exactly one cell per schema feature")
        if values.shape[0] == 0:
            raise ParseError("empty dataset (0 rows)")
        for j, spec in enumerate(schema):
            if not spec.is_numeric:
                col = values[:, j]
                if not np.all((col == np.floor(col)) & (col >= 0) & (col < len(spec.categories))):
                    raise SchemaError(f"feature '{spec.name}': cell outside category set")
        self.schema = schema
        self.values = values
        self.values.setflags(write=False)
        self.source_digest = source_digest
        self.stats = self._compute_stats()

    # -- construction ------------------------------------------------

    def _compute_stats(self):
        stats = {}
        n = self.n_rows
        for j, spec in enumerate(self.schema):
            col = self.values[:, j]
            if spec.is_numeric:
                q25, q50, q75 = (float(np.quantile(col, p, method="linear"))
                                 for p in (0.25, 0.5, 0.75))
                stats[spec.name] = {
                    "mean": float(np.mean(col)),
                    "std": float(np.std(col)),
                    "min": float(np.min(col)),
                    "max": float(np.max(col)),
                    "q25": q25,
                    "q50": q50,
                    "q75": q75,
                }
            else:
                counts = np.bincount(col.astype(np.int64), minlength=len(spec.categories))
                stats[spec.name] = {
                    "frequencies": {cat: float(c) / n
                                    for cat, c in zip(spec.categories, counts)}
                }
        return stats

    # -- basic views -------------------------------------------------

    @property
    def n_rows(self):
        return self.values.shape[0]

    @property
    def n_features(self):
        return len(self.schema)

    @property
    def feature_names(self):
        return [f.name for f in self.schema]

    def feature_index(self, name_or_index):
        if isinstance(name_or_index, int):
            if not 0 <= name_or_index < self.n_features:
                raise SchemaError(f"feature index {name_or_index} out of range")
            return name_or_index
        for j, spec in enumerate(self.schema):
            if spec.name == name_or_index:
                return j
        raise SchemaError(f"unknown feature '{name_or_index}'")

    def numeric_range(self, j):
        s = self.stats[self.schema[j].name]
        return s["max"] - s["min"]

    # -- encoding / decoding at external boundaries -------------------

    def decode_row(self, row):
        """Internal float row -> display cells (floats and category strings)."""
        out = []
        for j, spec in enumerate(self.schema):
            if spec.is_numeric:
                out.append(float(row[j]))
            else:
                out.append(spec.categories[int(row[j])])
        return out

    def decode_rows(self, rows):
        return [self.decode_row(r) for r in np.asarray(rows, dtype=np.float64)]

    def encode_row(self, cells):
        """Display cells -> internal float row, validating against the schema."""
        if len(cells) != self.n_features:
            raise SchemaError(
                f"expected {self.n_features} cells, got {len(cells)}")
        row = np.empty(self.n_features)
        for j, spec in enumerate(self.schema):
            cell = cells[j]
            if spec.is_numeric:
                if isinstance(cell, str):
                    value = _parse_decimal(cell)
                    if value is None:
                        raise SchemaError(
                            f"feature '{spec.name}': '{cell}' is not numeric")
                    cell = value
                if not np.isfinite(cell):
                    raise SchemaError(f"feature '{spec.name}': non-finite value")
                row[j] = float(cell)
            else:
                if isinstance(cell, str):
                    if cell not in spec.categories:
                        raise SchemaError(
                            f"feature '{spec.name}': unknown category '{cell}'")
                    row[j] = spec.categories.index(cell)
                else:
                    ix = int(cell)
                    if not 0 <= ix < len(spec.categories):
                        raise SchemaError(
                            f"feature '{spec.name}': category id {ix} out of range")
                    row[j] = ix
        return row

    def instance(self, row_ref):
        if not 0 <= row_ref < self.n_rows:
            raise SchemaError(f"row index {row_ref} out of range (0..{self.n_rows - 1})")
        return ExplainedInstance(values=self.values[row_ref].copy(), row_ref=row_ref)

    def instance_from_cells(self, cells):
        return ExplainedInstance(values=self.encode_row(cells), row_ref=None)


def load_dataset(csv_source, schema_override=None):
    """Load a UTF-8 CSV (header row required) into a TabularDataset.

    Inference rule: a column is numeric iff every cell parses as a finite
    decimal number, otherwise categorical with categories in first-appearance
    order.  schema_override is a parsed schema document whose names must match
    header names; listed columns take the overridden kind.
    """
    if isinstance(csv_source, (bytes, bytearray)):
        raw = bytes(csv_source)
    else:
        raw = csv_source.read()
        if isinstance(raw, str):
            raw = raw.encode("utf-8")
    digest = hashlib.sha256(raw).hexdigest()

    try:
        text = raw.decode("utf-8")
    except UnicodeDecodeError as exc:
        raise ParseError(f"source is not UTF-8: {exc}") from None

    reader = csv.reader(io.StringIO(text))
    try:
        header = next(reader)
    except StopIteration:
        raise ParseError("empty CSV source") from None
    if len(set(header)) != len(header):
        raise ParseError("duplicate column names in header")

    rows = []
    for lineno, record in enumerate(reader, start=2):
        if not record:
            continue  # tolerate a trailing blank line
        if len(record) != len(header):
            raise ParseError(
                f"row {lineno}: expected {len(header)} cells, got {len(record)}")
        for cell, name in zip(record, header):
            if cell == "":
                raise ParseError(
                    f"row {lineno}: missing value in column '{name}' "
                    "(missing data is not supported)")
        rows.append(record)
    if not rows:
        raise ParseError("empty dataset (0 rows)")

    overrides = {}
    if schema_override is not None:
        for spec in _override_specs(schema_override):
            if spec["name"] not in header:
                raise SchemaError(
                    f"schema override names unknown column '{spec['name']}'")
            overrides[spec["name"]] = spec

    schema = []
    columns = np.empty((len(rows), len(header)))
    for j, name in enumerate(header):
        cells = [r[j] for r in rows]
        override = overrides.get(name)
        kind = override["kind"] if override else None
        parsed = [_parse_decimal(c) for c in cells]
        if kind is None:
            kind = NUMERIC if all(p is not None for p in parsed) else CATEGORICAL
        if kind == NUMERIC:
            bad = next((c for c, p in zip(cells, parsed) if p is None), None)
            if bad is not None:
                raise SchemaError(
                    f"column '{name}' is declared numeric but holds '{bad}'")
            schema.append(FeatureSpec(name=name, kind=NUMERIC))
            columns[:, j] = parsed
        else:
            categories = tuple(override["categories"]) if override and override.get("categories") \
                else tuple(dict.fromkeys(cells))
            spec = FeatureSpec(name=name, kind=CATEGORICAL, categories=categories)
            index = {c: i for i, c in enumerate(categories)}
            try:
                columns[:, j] = [index[c] for c in cells]
            except KeyError as exc:
                raise SchemaError(
                    f"column '{name}': value {exc} outside declared categories") from None
            schema.append(spec)

    return TabularDataset(schema, columns, source_digest=digest)


def _override_specs(schema_override):
    if isinstance(schema_override, dict):
        entries = schema_override.get("features")
        if entries is None:
            raise ParseError("schema override must carry a 'features' list")
    else:
        entries = schema_override
    specs = []
    for entry in entries:
        if "name" not in entry or "kind" not in entry:
            raise ParseError("schema override entries need 'name' and 'kind'")
        if entry["kind"] not in (NUMERIC, CATEGORICAL):
            raise ParseError(f"unknown kind '{entry['kind']}' in schema override")
        specs.append({"name": entry["name"], "kind": entry["kind"],
                      "categories": entry.get("categories")})
    return specs


def summarize(dataset: TabularDataset) -> dict:
    """Serializable summary document: schema, row count, per-feature stats."""
    features = []
    for spec in dataset.schema:
        entry = {"name": spec.name, "kind": spec.kind}
        if spec.is_numeric:
            entry["stats"] = dict(dataset.stats[spec.name])
        else:
            entry["categories"] = list(spec.categories)
            entry["stats"] = {"frequencies": dict(dataset.stats[spec.name]["frequencies"])}
        features.append(entry)
    return {
        "row_count": dataset.n_rows,
        "feature_count": dataset.n_features,
        "features": features,
        "source_digest": dataset.source_digest,
    }
