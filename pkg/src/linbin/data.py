"""Dataset ingestion and preprocessing for mixed qualitative/quantitative data.

Supports a strict subset of the ARFF format (numeric and nominal attributes,
``?`` for missing values) plus schema-driven CSV.  Cells live in a single
float64 matrix: quantitative cells hold their value, qualitative cells hold
the category index, and NaN marks a missing cell of either kind.
"""
from __future__ import annotations

import csv as _csv
import io
import math
from dataclasses import dataclass, replace

import numpy as np

#: Category appended when missing qualitative values are kept as their own value.
MISSING_CATEGORY = "⟂"


class DataError(ValueError):
    """Malformed input file or schema violation."""


@dataclass(frozen=True)
class Attribute:
    """One column: qualitative (with an ordered category list) or quantitative."""

    name: str
    values: tuple[str, ...] | None = None

    def __post_init__(self):
        if self.values is not None:
            if len(self.values) == 0:
                raise DataError(f"attribute {self.name!r}: empty category list")
            if len(set(self.values)) != len(self.values):
                raise DataError(f"attribute {self.name!r}: duplicate categories")

    @property
    def is_qualitative(self) -> bool:
        return self.values is not None

    @property
    def cardinality(self) -> int:
        if self.values is None:
            raise DataError(f"attribute {self.name!r} is quantitative")
        return len(self.values)


@dataclass(frozen=True)
class Schema:
    attributes: tuple[Attribute, ...]
    class_labels: tuple[str, ...]
    relation: str = "data"
    class_name: str = "class"

    def __post_init__(self):
        if len(self.class_labels) < 2:
            raise DataError("need at least two class labels")
        if len(set(self.class_labels)) != len(self.class_labels):
            raise DataError("duplicate class labels")
        names = [a.name for a in self.attributes]
        if len(set(names)) != len(names):
            raise DataError("duplicate attribute names")

    @property
    def n_attributes(self) -> int:
        return len(self.attributes)

    @property
    def n_classes(self) -> int:
        return len(self.class_labels)

    @property
    def n_qualitative(self) -> int:
        return sum(1 for a in self.attributes if a.is_qualitative)

    @property
    def n_quantitative(self) -> int:
        return sum(1 for a in self.attributes if not a.is_qualitative)

    def qualitative_indices(self) -> tuple[int, ...]:
        return tuple(j for j, a in enumerate(self.attributes) if a.is_qualitative)

    def quantitative_indices(self) -> tuple[int, ...]:
        return tuple(j for j, a in enumerate(self.attributes) if not a.is_qualitative)


@dataclass(frozen=True, eq=False)
class Dataset:
    """Immutable table of N instances over a schema, plus integer class labels."""

    schema: Schema
    x: np.ndarray
    y: np.ndarray

    def __post_init__(self):
        x = np.ascontiguousarray(np.asarray(self.x, dtype=np.float64))
        y = np.ascontiguousarray(np.asarray(self.y, dtype=np.int64))
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "y", y)
        n_attr = self.schema.n_attributes
        if x.ndim != 2 or x.shape[1] != n_attr:
            raise DataError(f"data matrix must be (N, {n_attr}), got {x.shape}")
        if x.shape[0] < 1:
            raise DataError("dataset must contain at least one instance")
        if y.shape != (x.shape[0],):
            raise DataError("label vector length must match instance count")
        if y.min() < 0 or y.max() >= self.schema.n_classes:
            raise DataError("class label index out of range")
        for j in self.schema.qualitative_indices():
            col = x[:, j]
            vals = col[~np.isnan(col)]
            if vals.size and (np.any(vals != np.floor(vals)) or np.any(vals < 0)):
                raise DataError(f"attribute {self.schema.attributes[j].name!r}: "
                                "qualitative cells must be category indices")
            if vals.size and vals.max() >= self.schema.attributes[j].cardinality:
                raise DataError(f"attribute {self.schema.attributes[j].name!r}: "
                                "category index out of range")
        x.setflags(write=False)
        y.setflags(write=False)

    @property
    def n_instances(self) -> int:
        return self.x.shape[0]

    @property
    def has_missing(self) -> bool:
        return bool(np.isnan(self.x).any())

    def class_counts(self) -> np.ndarray:
        return np.bincount(self.y, minlength=self.schema.n_classes)

    def subset(self, indices) -> "Dataset":
        idx = np.asarray(indices)
        return Dataset(self.schema, self.x[idx], self.y[idx])

    def __eq__(self, other) -> bool:
        if not isinstance(other, Dataset):
            return NotImplemented
        return (self.schema == other.schema
                and np.array_equal(self.y, other.y)
                and np.array_equal(self.x, other.x, equal_nan=True))


# ---------------------------------------------------------------------------
# ARFF (strict subset: numeric + nominal, '?' missing, last attribute = class)
# ---------------------------------------------------------------------------

def _strip_comment(line: str) -> str:
    out = []
    quote = None
    for ch in line:
        if quote:
            out.append(ch)
            if ch == quote:
                quote = None
        elif ch in ("'", '"'):
            quote = ch
            out.append(ch)
        elif ch == "%":
            break
        else:
            out.append(ch)
    return "".join(out)


def _unquote(token: str) -> str:
    token = token.strip()
    if len(token) >= 2 and token[0] == token[-1] and token[0] in ("'", '"'):
        return token[1:-1]
    return token


def _split_csvish(line: str, lineno: int) -> list[str]:
    """Split a data row on commas, honoring single- and double-quoted cells."""
    cells, buf, quote = [], [], None
    for ch in line:
        if quote:
            if ch == quote:
                quote = None
            else:
                buf.append(ch)
        elif ch in ("'", '"'):
            quote = ch
        elif ch == ",":
            cells.append("".join(buf).strip())
            buf = []
        else:
            buf.append(ch)
    if quote:
        raise DataError(f"line {lineno}: unterminated quote")
    cells.append("".join(buf).strip())
    return cells


def _parse_attribute_decl(line: str, lineno: int) -> Attribute:
    rest = line[len("@attribute"):].strip()
    if not rest:
        raise DataError(f"line {lineno}: empty @attribute declaration")
    if rest[0] in ("'", '"'):
        quote = rest[0]
        end = rest.find(quote, 1)
        if end < 0:
            raise DataError(f"line {lineno}: unterminated attribute name")
        name, type_part = rest[1:end], rest[end + 1:].strip()
    else:
        parts = rest.split(None, 1)
        if len(parts) != 2:
            raise DataError(f"line {lineno}: attribute declaration needs a type")
        name, type_part = parts
    if not name:
        raise DataError(f"line {lineno}: empty attribute name")
    if type_part.startswith("{"):
        if not type_part.endswith("}"):
            raise DataError(f"line {lineno}: unterminated nominal value list")
        values = [_unquote(v) for v in _split_csvish(type_part[1:-1], lineno)]
        if any(v == "" for v in values):
            raise DataError(f"line {lineno}: empty nominal value")
        return Attribute(name, tuple(values))
    kind = type_part.split()[0].lower() if type_part else ""
    if kind in ("numeric", "real", "integer"):
        return Attribute(name, None)
    raise DataError(f"line {lineno}: unsupported attribute type {type_part!r} "
                    "(only numeric/real/integer and nominal lists are accepted)")


def _parse_cell(cell: str, attr: Attribute, lineno: int) -> float:
    if cell == "?":
        return math.nan
    if attr.is_qualitative:
        cell = _unquote(cell)
        try:
            return float(attr.values.index(cell))
        except ValueError:
            raise DataError(f"line {lineno}: value {cell!r} not among declared "
                            f"categories of attribute {attr.name!r}") from None
    try:
        return float(cell)
    except ValueError:
        raise DataError(f"line {lineno}: cannot parse {cell!r} as a number "
                        f"for attribute {attr.name!r}") from None


def parse_arff(text: str) -> Dataset:
    """Parse ARFF text; the last declared attribute is the (nominal) class."""
    lines = text.splitlines()
    declared: list[Attribute] = []
    relation = "data"
    data_start = None
    for i, raw in enumerate(lines):
        line = _strip_comment(raw).strip()
        if not line:
            continue
        low = line.lower()
        if low.startswith("@relation"):
            relation = _unquote(line[len("@relation"):]) or "data"
        elif low.startswith("@attribute"):
            declared.append(_parse_attribute_decl(line, i + 1))
        elif low.startswith("@data"):
            data_start = i + 1
            break
        else:
            raise DataError(f"line {i + 1}: unexpected header line {line!r}")
    if data_start is None:
        raise DataError("missing @data section")
    if len(declared) < 2:
        raise DataError("need at least one attribute plus the class attribute")
    class_attr = declared[-1]
    if not class_attr.is_qualitative:
        raise DataError("the class attribute (declared last) must be nominal")
    schema = Schema(tuple(declared[:-1]), class_attr.values,
                    relation=relation, class_name=class_attr.name)
    rows, labels = [], []
    for i in range(data_start, len(lines)):
        line = _strip_comment(lines[i]).strip()
        if not line:
            continue
        cells = _split_csvish(line, i + 1)
        if len(cells) != len(declared):
            raise DataError(f"line {i + 1}: expected {len(declared)} values, "
                            f"got {len(cells)}")
        rows.append([_parse_cell(cells[j], declared[j], i + 1)
                     for j in range(len(declared) - 1)])
        if cells[-1] == "?":
            raise DataError(f"line {i + 1}: class value may not be missing")
        labels.append(int(_parse_cell(cells[-1], class_attr, i + 1)))
    if not rows:
        raise DataError("no data rows after @data")
    return Dataset(schema, np.array(rows, dtype=np.float64),
                   np.array(labels, dtype=np.int64))


def _quote_if_needed(token: str) -> str:
    if token and not any(c in token for c in " ,{}%'\""):
        return token
    return "'" + token.replace("'", "\\'") + "'"


def to_arff(data: Dataset) -> str:
    """Serialize a Dataset back to ARFF text (inverse of :func:`parse_arff`)."""
    s = data.schema
    out = [f"@relation {_quote_if_needed(s.relation)}", ""]
    for attr in s.attributes:
        if attr.is_qualitative:
            vals = ",".join(_quote_if_needed(v) for v in attr.values)
            out.append(f"@attribute {_quote_if_needed(attr.name)} {{{vals}}}")
        else:
            out.append(f"@attribute {_quote_if_needed(attr.name)} numeric")
    vals = ",".join(_quote_if_needed(v) for v in s.class_labels)
    out.append(f"@attribute {_quote_if_needed(s.class_name)} {{{vals}}}")
    out.append("")
    out.append("@data")
    for row, label in zip(data.x, data.y):
        cells = []
        for j, attr in enumerate(s.attributes):
            v = row[j]
            if math.isnan(v):
                cells.append("?")
            elif attr.is_qualitative:
                cells.append(_quote_if_needed(attr.values[int(v)]))
            else:
                cells.append(repr(float(v)))
        cells.append(_quote_if_needed(s.class_labels[int(label)]))
        out.append(",".join(cells))
    return "\n".join(out) + "\n"


def parse_csv(text: str, schema: Schema) -> Dataset:
    """Parse CSV under an explicit schema; header must match the schema names."""
    reader = _csv.reader(io.StringIO(text))
    expected = [a.name for a in schema.attributes] + [schema.class_name]
    header = None
    rows, labels = [], []
    for lineno, cells in enumerate(reader, start=1):
        if not cells or all(c.strip() == "" for c in cells):
            continue
        cells = [c.strip() for c in cells]
        if header is None:
            header = cells
            if header != expected:
                raise DataError(f"line {lineno}: header {header!r} does not "
                                f"match schema columns {expected!r}")
            continue
        if len(cells) != len(expected):
            raise DataError(f"line {lineno}: expected {len(expected)} cells, "
                            f"got {len(cells)}")
        row = []
        for j, attr in enumerate(schema.attributes):
            cell = cells[j]
            row.append(math.nan if cell == "" else _parse_cell(cell, attr, lineno))
        label_cell = cells[-1]
        if label_cell in ("", "?"):
            raise DataError(f"line {lineno}: class value may not be missing")
        if label_cell not in schema.class_labels:
            raise DataError(f"line {lineno}: unknown class label {label_cell!r}")
        rows.append(row)
        labels.append(schema.class_labels.index(label_cell))
    if header is None:
        raise DataError("empty CSV input")
    if not rows:
        raise DataError("no data rows")
    return Dataset(schema, np.array(rows, dtype=np.float64),
                   np.array(labels, dtype=np.int64))


# ---------------------------------------------------------------------------
# Imputation / normalization (fit on training data, reapply elsewhere)
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Imputer:
    """Training-fold fill rules: attribute means (quantitative) and fill
    categories (qualitative).  Attributes whose training column had missing
    cells gain an explicit extra category; otherwise the training mode is the
    fallback for cells that turn up missing later."""

    schema: Schema
    quant_fill: tuple[float, ...]
    qual_fill: tuple[int, ...]

    def transform(self, data: Dataset) -> Dataset:
        _check_compatible(data.schema, self.schema)
        x = np.array(data.x)
        for j, attr in enumerate(self.schema.attributes):
            mask = np.isnan(x[:, j])
            if not mask.any():
                continue
            x[mask, j] = self.qual_fill[j] if attr.is_qualitative else self.quant_fill[j]
        return Dataset(self.schema, x, data.y)


def _check_compatible(have: Schema, fitted: Schema) -> None:
    if len(have.attributes) != len(fitted.attributes):
        raise DataError("schema mismatch: attribute count differs")
    for a, b in zip(have.attributes, fitted.attributes):
        if a.name != b.name or a.is_qualitative != b.is_qualitative:
            raise DataError(f"schema mismatch at attribute {a.name!r}")
        if a.is_qualitative and a.values != b.values[:len(a.values)]:
            raise DataError(f"schema mismatch: categories of {a.name!r} differ")


def fit_imputer(train: Dataset) -> Imputer:
    attrs = list(train.schema.attributes)
    quant_fill = [math.nan] * len(attrs)
    qual_fill = [-1] * len(attrs)
    for j, attr in enumerate(attrs):
        col = train.x[:, j]
        observed = col[~np.isnan(col)]
        if not attr.is_qualitative:
            if observed.size == 0:
                raise DataError(f"attribute {attr.name!r} is entirely missing; "
                                "its mean is undefined")
            quant_fill[j] = float(observed.mean())
            continue
        if np.isnan(col).any():
            if MISSING_CATEGORY in attr.values:
                qual_fill[j] = attr.values.index(MISSING_CATEGORY)
            else:
                attrs[j] = Attribute(attr.name, attr.values + (MISSING_CATEGORY,))
                qual_fill[j] = len(attr.values)
        else:
            counts = np.bincount(observed.astype(np.int64),
                                 minlength=attr.cardinality)
            qual_fill[j] = int(counts.argmax())
    schema = replace(train.schema, attributes=tuple(attrs))
    return Imputer(schema, tuple(quant_fill), tuple(qual_fill))


def impute_missing(data: Dataset) -> Dataset:
    """Fill missing cells using statistics of the same dataset."""
    return fit_imputer(data).transform(data)


@dataclass(frozen=True)
class NormalizationModel:
    """Per-quantitative-attribute (min, max) learned from training data."""

    bounds: tuple[tuple[float, float], ...]

    def transform(self, data: Dataset) -> Dataset:
        x = np.array(data.x)
        for j, (mn, mx) in zip(data.schema.quantitative_indices(), self.bounds):
            if mx > mn:
                x[:, j] = np.clip((x[:, j] - mn) / (mx - mn), 0.0, 1.0)
            else:
                x[:, j] = 0.0
        return Dataset(data.schema, x, data.y)


def fit_normalizer(train: Dataset) -> NormalizationModel:
    bounds = []
    for j in train.schema.quantitative_indices():
        col = train.x[:, j]
        if np.isnan(col).any():
            raise DataError("normalization requires imputed data "
                            f"(attribute {train.schema.attributes[j].name!r} "
                            "has missing cells)")
        bounds.append((float(col.min()), float(col.max())))
    return NormalizationModel(tuple(bounds))


def fit_apply_normalization(train: Dataset, test: Dataset):
    """Scale quantitative attributes to [0, 1] using training-fold bounds."""
    model = fit_normalizer(train)
    return model.transform(train), model.transform(test), model


# ---------------------------------------------------------------------------
# Label / encoding transforms
# ---------------------------------------------------------------------------

def binarize_majority(data: Dataset) -> Dataset:
    """Majority class becomes class A, everything else class B.

    Ties between class counts break toward the lowest class index.
    """
    counts = data.class_counts()
    majority = int(counts.argmax())
    y = np.where(data.y == majority, 0, 1).astype(np.int64)
    schema = replace(data.schema, class_labels=("A", "B"))
    return Dataset(schema, data.x, y)


def one_hot_encode(data: Dataset) -> Dataset:
    """Replace each qualitative attribute by one 0/1 indicator per category."""
    attrs: list[Attribute] = []
    cols: list[np.ndarray] = []
    for j, attr in enumerate(data.schema.attributes):
        col = data.x[:, j]
        if not attr.is_qualitative:
            attrs.append(attr)
            cols.append(col)
            continue
        if np.isnan(col).any():
            raise DataError(f"attribute {attr.name!r} has missing cells; "
                            "impute before one-hot encoding")
        idx = col.astype(np.int64)
        for c, cat in enumerate(attr.values):
            attrs.append(Attribute(f"{attr.name}={cat}"))
            cols.append((idx == c).astype(np.float64))
    x = np.column_stack(cols) if cols else np.empty((data.n_instances, 0))
    schema = replace(data.schema, attributes=tuple(attrs))
    return Dataset(schema, x, data.y)
