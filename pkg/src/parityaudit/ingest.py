"""Reading and writing datasets and scenario files.

Dataset CSV layout: a header row, comma delimiter, RFC 4180 quoting, UTF-8.
One row per entity with an id column, a score column, a label column, and
one column per demographic attribute::

    entity_id,score,label_value,ethnicity,age_band
    p001,0.91,1,Malay,40-59
    p002,0.12,0,Chinese,60+

Already-binarized predictions are written as 0/1 scores; the default
threshold of 0.5 reads them back unchanged.
"""

from __future__ import annotations

import csv
import io
import json
import math
import os
from dataclasses import dataclass
from typing import IO, Dict, Optional, Sequence, Tuple, Union

from .crosstab import Dataset, Record
from .disparity import METRIC_NAMES
from .errors import AuditError, ParseError, ScenarioError, SchemaError
from .scenarios import ScenarioSpec, scenario_from_dict, scenario_to_dict

PathLike = Union[str, "os.PathLike[str]"]

_TRUE = {"1", "true"}
_FALSE = {"0", "false"}


@dataclass(frozen=True)
class DatasetSchema:
    id_column: str = "entity_id"
    score_column: str = "score"
    label_column: str = "label_value"
    # None means every column not named above is an attribute.
    attribute_columns: Optional[Tuple[str, ...]] = None

    def __post_init__(self):
        named = [self.id_column, self.score_column, self.label_column]
        if self.attribute_columns is not None:
            object.__setattr__(self, "attribute_columns", tuple(self.attribute_columns))
            named += list(self.attribute_columns)
        if len(set(named)) != len(named):
            raise SchemaError(f"schema column names must be distinct, got {named}")
        if any(not c for c in named):
            raise SchemaError("schema column names must be non-empty")


def _parse_label(text: str, row: int, column: str) -> int:
    t = text.strip().lower()
    if t in _TRUE:
        return 1
    if t in _FALSE:
        return 0
    raise ParseError(f"label must be one of 0, 1, true, false; got {text!r}", row, column)


def _parse_score(text: str, row: int, column: str) -> float:
    try:
        s = float(text)
    except ValueError:
        raise ParseError(f"score is not a number: {text!r}", row, column) from None
    if not math.isfinite(s) or not 0.0 <= s <= 1.0:
        raise ParseError(f"score must lie in [0, 1], got {text!r}", row, column)
    return s


def read_dataset(stream: IO[str], schema: DatasetSchema = DatasetSchema()) -> Dataset:
    reader = csv.reader(stream)
    try:
        header = next(reader)
    except StopIteration:
        raise SchemaError("empty file: a header row is required") from None
    except csv.Error as e:
        raise ParseError(f"malformed CSV: {e}", None) from None
    if len(set(header)) != len(header):
        dupes = sorted({h for h in header if header.count(h) > 1})
        raise SchemaError(f"duplicate column name(s) in header: {dupes}")
    for col in (schema.id_column, schema.score_column, schema.label_column):
        if col not in header:
            raise SchemaError(f"missing required column {col!r}; header is {header}")
    if schema.attribute_columns is None:
        reserved = {schema.id_column, schema.score_column, schema.label_column}
        attrs = tuple(h for h in header if h not in reserved)
    else:
        attrs = schema.attribute_columns
        missing = [a for a in attrs if a not in header]
        if missing:
            raise SchemaError(f"missing attribute column(s) {missing}; header is {header}")
    for a in attrs:
        if not a:
            raise SchemaError("attribute columns need a non-empty header name")

    idx = {h: i for i, h in enumerate(header)}
    i_id, i_score, i_label = idx[schema.id_column], idx[schema.score_column], idx[schema.label_column]
    i_attrs = [(a, idx[a]) for a in attrs]

    records = []
    seen: Dict[str, int] = {}
    row = 0
    try:
        for fields in reader:
            row += 1
            if not fields:
                raise ParseError("blank line inside data", row)
            if len(fields) != len(header):
                raise ParseError(f"expected {len(header)} fields, found {len(fields)}", row)
            eid = fields[i_id]
            if not eid:
                raise ParseError("entity id is empty", row, schema.id_column)
            if eid in seen:
                raise ParseError(f"duplicate entity id {eid!r} (first seen on row {seen[eid]})",
                                 row, schema.id_column)
            seen[eid] = row
            records.append(Record(
                entity_id=eid,
                label=_parse_label(fields[i_label], row, schema.label_column),
                attributes={a: fields[i] for a, i in i_attrs},
                score=_parse_score(fields[i_score], row, schema.score_column),
            ))
    except csv.Error as e:
        raise ParseError(f"malformed CSV: {e}", row + 1) from None
    if not records:
        raise SchemaError("file has a header but no data rows")
    return Dataset(tuple(records), attrs)


def load_dataset(path: PathLike, schema: DatasetSchema = DatasetSchema()) -> Dataset:
    try:
        with open(path, encoding="utf-8", newline="") as f:
            return read_dataset(f, schema)
    except UnicodeDecodeError as e:
        raise ParseError(f"file is not valid UTF-8: {e}") from None


def write_dataset(dataset: Dataset, stream: IO[str], schema: DatasetSchema = DatasetSchema()) -> None:
    attrs = list(schema.attribute_columns or dataset.attribute_names)
    w = csv.writer(stream)
    w.writerow([schema.id_column, schema.score_column, schema.label_column, *attrs])
    for r in dataset.records:
        score = r.score if r.score is not None else float(r.prediction)
        w.writerow([r.entity_id, repr(float(score)), r.label, *(r.attributes[a] for a in attrs)])


def save_dataset(dataset: Dataset, path: PathLike, schema: DatasetSchema = DatasetSchema()) -> None:
    with open(path, "w", encoding="utf-8", newline="") as f:
        write_dataset(dataset, f, schema)


def dataset_to_csv(dataset: Dataset, schema: DatasetSchema = DatasetSchema()) -> str:
    buf = io.StringIO(newline="")
    write_dataset(dataset, buf, schema)
    return buf.getvalue()


def _read_json(path: PathLike, error=ScenarioError):
    try:
        with open(path, encoding="utf-8") as f:
            return json.load(f)
    except json.JSONDecodeError as e:
        raise error(f"invalid JSON at line {e.lineno}, column {e.colno}: {e.msg}") from None


def load_scenario(path: PathLike) -> ScenarioSpec:
    """Read and fully validate a scenario file; effective-rate bounds are checked here."""
    return scenario_from_dict(_read_json(path))


def save_scenario(scenario: ScenarioSpec, path: PathLike) -> None:
    with open(path, "w", encoding="utf-8") as f:
        json.dump(scenario_to_dict(scenario), f, indent=2)
        f.write("\n")


def load_external_benchmark(path: PathLike, metrics: Sequence[str] = ()) -> Dict[str, object]:
    """Benchmark file: ``{"schema_version": "1", "metrics": {"fnr": 0.02, ...}}``.

    Values may be numbers or exact ``"p/q"`` strings. ``equal_parity`` takes a
    flagged count rather than a rate.
    """
    doc = _read_json(path, error=SchemaError)
    if not isinstance(doc, dict) or not isinstance(doc.get("metrics"), dict):
        raise SchemaError("$.metrics: expected an object mapping metric names to values")
    values = doc["metrics"]
    for name in values:
        if name not in METRIC_NAMES:
            raise SchemaError(f"$.metrics.{name}: unknown metric; expected one of {list(METRIC_NAMES)}")
    missing = [m for m in metrics if m not in values]
    if missing:
        raise AuditError(f"$.metrics: benchmark lacks configured metric(s) {missing}")
    return values
