"""Immutable typed tables and dataset ingestion.

Tables are the substrate every pipeline and model runs over: an ordered
schema of typed attributes plus row records. Construction validates and
copies the rows; transforms always build new tables, so a table can be
shared freely once built.
"""

from __future__ import annotations

import csv
import io
import json
import math
import re
from dataclasses import dataclass
from datetime import date, datetime
from enum import Enum
from pathlib import Path
from typing import Any, Iterable, Mapping, Sequence

from .errors import DataError

# Cell values: number | string | boolean | null. Temporal cells are
# ISO-8601 date strings so lexicographic order is chronological order.
Value = Any
Row = dict[str, Value]


class AttributeType(str, Enum):
    NOMINAL = "nominal"
    ORDINAL = "ordinal"
    QUANTITATIVE = "quantitative"
    TEMPORAL = "temporal"


@dataclass(frozen=True)
class Attribute:
    """A named, typed column. ``categories`` gives the declared order for
    ordinal attributes; without it an ordinal column sorts like a nominal
    one."""

    name: str
    attribute_type: AttributeType
    categories: tuple[str, ...] | None = None

    def __post_init__(self) -> None:
        if not self.name:
            raise DataError("attribute name must be non-empty")
        if self.categories is not None and self.attribute_type is not AttributeType.ORDINAL:
            raise DataError(f"attribute {self.name!r}: categories only apply to ordinal attributes")


_NUMBER_RE = re.compile(r"^[+-]?(\d+\.?\d*|\.\d+)([eE][+-]?\d+)?$")
_ISO_DATE_RE = re.compile(r"^\d{4}-\d{2}-\d{2}")
_US_DATE_RE = re.compile(r"^(\d{1,2})/(\d{1,2})/(\d{4})$")


def looks_numeric(token: str) -> bool:
    return bool(_NUMBER_RE.match(token.strip()))


def parse_temporal(token: str) -> str | None:
    """Normalize an ISO-8601 or MM/DD/YYYY date string to ``YYYY-MM-DD``.

    Returns None for anything unparseable.
    """
    token = token.strip()
    m = _US_DATE_RE.match(token)
    if m:
        month, day, year = int(m.group(1)), int(m.group(2)), int(m.group(3))
        try:
            return date(year, month, day).isoformat()
        except ValueError:
            return None
    if _ISO_DATE_RE.match(token):
        try:
            return date.fromisoformat(token[:10]).isoformat()
        except ValueError:
            return None
    return None


def temporal_year(value: str) -> int:
    return datetime.strptime(value[:10], "%Y-%m-%d").year


def _check_cell(attr: Attribute, value: Value) -> Value:
    if value is None:
        return None
    t = attr.attribute_type
    if t is AttributeType.QUANTITATIVE:
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise DataError(f"attribute {attr.name!r}: quantitative cell {value!r} is not a number")
        if not math.isfinite(value):
            raise DataError(f"attribute {attr.name!r}: quantitative cell must be finite, got {value!r}")
        return value
    if t is AttributeType.TEMPORAL:
        if not isinstance(value, str) or parse_temporal(value) != value:
            raise DataError(
                f"attribute {attr.name!r}: temporal cell {value!r} is not an ISO-8601 date"
            )
        return value
    # nominal / ordinal: strings, plus booleans as two-level nominals
    if not isinstance(value, (str, bool)):
        raise DataError(f"attribute {attr.name!r}: {t.value} cell {value!r} is not a string")
    return value


class Table:
    """An immutable named relation: ordered typed schema plus row records.

    Every row holds a value (possibly None) for every schema attribute and
    nothing else. Rows are copied on construction, so tables never alias
    caller-owned or other tables' storage.
    """

    __slots__ = ("name", "schema", "_rows", "_index")

    def __init__(self, name: str, schema: Sequence[Attribute], rows: Iterable[Mapping[str, Value]]):
        if not name:
            raise DataError("table name must be non-empty")
        schema = tuple(schema)
        seen: set[str] = set()
        for attr in schema:
            if attr.name in seen:
                raise DataError(f"duplicate attribute {attr.name!r} in schema of table {name!r}")
            seen.add(attr.name)
        checked: list[Row] = []
        for i, row in enumerate(rows):
            extra = set(row) - seen
            if extra:
                raise DataError(f"table {name!r} row {i}: unknown keys {sorted(extra)}")
            checked.append({a.name: _check_cell(a, row.get(a.name)) for a in schema})
        self.name = name
        self.schema = schema
        self._rows = checked
        self._index = {a.name: a for a in schema}

    @property
    def rows(self) -> list[Row]:
        """Row records. Copies, so callers cannot mutate table storage."""
        return [dict(r) for r in self._rows]

    def iter_rows(self) -> Iterable[Row]:
        for r in self._rows:
            yield dict(r)

    def attribute(self, name: str) -> Attribute:
        try:
            return self._index[name]
        except KeyError:
            raise DataError(f"table {self.name!r} has no attribute {name!r}") from None

    def attribute_names(self) -> list[str]:
        return [a.name for a in self.schema]

    def column(self, name: str) -> list[Value]:
        self.attribute(name)
        return [r[name] for r in self._rows]

    def __len__(self) -> int:
        return len(self._rows)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Table):
            return NotImplemented
        return (
            self.name == other.name
            and self.schema == other.schema
            and self._rows == other._rows
        )

    def __repr__(self) -> str:
        return f"Table({self.name!r}, {len(self.schema)} attrs, {len(self._rows)} rows)"


def cell_count(table: Table) -> int:
    """rows x columns of the table."""
    return len(table) * len(table.schema)


def sort_key(attr: Attribute, value: Value) -> tuple:
    """Total-order key for one cell within its column.

    None is handled by the caller (null placement depends on direction);
    this key only orders non-null values of a single attribute.
    """
    if attr.attribute_type is AttributeType.ORDINAL and attr.categories is not None:
        try:
            return (attr.categories.index(value),)
        except ValueError:
            return (len(attr.categories), str(value))
    if isinstance(value, bool):
        return (str(value),)
    return (value,)


def infer_schema(header: Sequence[str], sample_rows: Sequence[Sequence[str]]) -> list[Attribute]:
    """Infer attribute types from raw string records.

    Per column, ignoring empty cells: all numeric tokens -> quantitative;
    all date tokens (ISO-8601 or MM/DD/YYYY) -> temporal; anything else,
    or no evidence at all, -> nominal. Inference never produces ordinal.
    """
    if not header:
        raise DataError("header must be non-empty")
    dupes = {h for h in header if list(header).count(h) > 1}
    if dupes:
        raise DataError(f"duplicate header names: {sorted(dupes)}")
    attrs = []
    for col, name in enumerate(header):
        tokens = [row[col].strip() for row in sample_rows if col < len(row)]
        tokens = [t for t in tokens if t != ""]
        if not tokens:
            inferred = AttributeType.NOMINAL
        elif all(looks_numeric(t) for t in tokens):
            inferred = AttributeType.QUANTITATIVE
        elif all(parse_temporal(t) is not None for t in tokens):
            inferred = AttributeType.TEMPORAL
        else:
            inferred = AttributeType.NOMINAL
        attrs.append(Attribute(name, inferred))
    return attrs


def _parse_token(attr: Attribute, token: str) -> Value:
    if token == "":
        return None
    t = attr.attribute_type
    if t is AttributeType.QUANTITATIVE:
        if not looks_numeric(token):
            return None
        f = float(token)
        return int(f) if f.is_integer() and "e" not in token.lower() and "." not in token else f
    if t is AttributeType.TEMPORAL:
        return parse_temporal(token)
    return token


def load_csv(path: str | Path, schema: Sequence[Attribute] | None = None, name: str | None = None) -> Table:
    """Load an RFC-4180 CSV (UTF-8, first line is the header) into a Table.

    Without a schema, types are inferred over all data rows. With one, the
    header must match the schema names as a set and cells parse per the
    declared types; failed quantitative/temporal parses become null.
    """
    path = Path(path)
    if not path.is_file():
        raise DataError(f"no such file: {path}")
    with path.open(newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise DataError(f"{path}: empty file, expected a header line") from None
        raw_rows = []
        for i, record in enumerate(reader):
            if len(record) != len(header):
                raise DataError(f"{path}: ragged row {i} has {len(record)} cells, expected {len(header)}")
            raw_rows.append(record)
    if schema is None:
        schema = infer_schema(header, raw_rows)
    else:
        schema = list(schema)
        missing = sorted(set(a.name for a in schema) - set(header))
        extra = sorted(set(header) - set(a.name for a in schema))
        if missing or extra:
            raise DataError(
                f"{path}: header does not match schema"
                + (f"; missing {missing}" if missing else "")
                + (f"; unexpected {extra}" if extra else "")
            )
    by_name = {a.name: a for a in schema}
    ordered = [by_name[h] for h in header]
    rows = [
        {attr.name: _parse_token(attr, token) for attr, token in zip(ordered, record)}
        for record in raw_rows
    ]
    return Table(name or path.stem, list(ordered), rows)


def _format_cell(value: Value) -> str:
    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    return str(value)


def table_to_csv_text(table: Table) -> str:
    """Render a table as RFC-4180 CSV text; nulls become empty cells."""
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    names = table.attribute_names()
    writer.writerow(names)
    for row in table.iter_rows():
        writer.writerow([_format_cell(row[n]) for n in names])
    return buffer.getvalue()


def write_csv(table: Table, path: str | Path) -> None:
    Path(path).write_text(table_to_csv_text(table), encoding="utf-8")


def attribute_to_json(attr: Attribute) -> dict:
    out: dict[str, Any] = {"name": attr.name, "type": attr.attribute_type.value}
    if attr.categories is not None:
        out["categories"] = list(attr.categories)
    return out


def attribute_from_json(obj: Mapping[str, Any]) -> Attribute:
    try:
        kind = AttributeType(obj["type"])
    except (KeyError, ValueError):
        raise DataError(f"bad attribute record: {obj!r}") from None
    cats = obj.get("categories")
    return Attribute(obj["name"], kind, tuple(cats) if cats is not None else None)


def table_to_json(table: Table) -> dict:
    return {
        "name": table.name,
        "schema": [attribute_to_json(a) for a in table.schema],
        "rows": table.rows,
    }


def table_from_json(obj: Mapping[str, Any]) -> Table:
    schema = [attribute_from_json(a) for a in obj.get("schema", [])]
    return Table(obj["name"], schema, obj.get("rows", []))


def dump_table_json(table: Table, path: str | Path) -> None:
    Path(path).write_text(json.dumps(table_to_json(table), indent=2) + "\n", encoding="utf-8")
