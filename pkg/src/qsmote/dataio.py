"""CSV ingestion/emission, the synthetic Gaussian generator, scatter plot
data, and canonical JSON run reports.

All emitted files are byte-deterministic for a given input and seed: floats
are written with repr (shortest round-trip form, exact at double precision),
JSON is sorted and fixed-format, and nothing volatile (timestamps, paths)
enters a primary output.
"""
from __future__ import annotations

import csv
import hashlib
import json
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .dataset import Dataset
from .errors import InvalidInputError
from .resample import ResampleReport
from .seeding import SeedSpec, normals

SCHEMA_VERSION = 1


@dataclass(frozen=True)
class CsvSchema:
    label_column: str = "label"
    positive_label: str = "1"
    negative_label: str = "0"
    delimiter: str = ","
    has_header: bool = True

    def __post_init__(self):
        if len(self.delimiter) != 1:
            raise InvalidInputError("delimiter must be a single character")
        if self.positive_label == self.negative_label:
            raise InvalidInputError("positive and negative labels must differ")


@dataclass(frozen=True)
class SynthSpec:
    """Two feature-wise Gaussian clouds; class 0 is the majority."""

    n_majority: int
    n_minority: int
    n_features: int
    class_means: Optional[tuple[Sequence[float], Sequence[float]]] = None
    class_scales: Optional[tuple[Sequence[float], Sequence[float]]] = None
    seed: SeedSpec = SeedSpec(0)

    def __post_init__(self):
        if self.n_majority < 1 or self.n_minority < 1 or self.n_features < 1:
            raise InvalidInputError("counts and feature count must be positive")
        means = self.class_means or (
            tuple([0.0] * self.n_features),
            tuple([2.0] * self.n_features),
        )
        scales = self.class_scales or (
            tuple([1.0] * self.n_features),
            tuple([1.0] * self.n_features),
        )
        for vec in (*means, *scales):
            if len(vec) != self.n_features:
                raise InvalidInputError("means/scales must have one entry per feature")
        if any(s < 0 for vec in scales for s in vec):
            raise InvalidInputError("scales must be non-negative")
        object.__setattr__(self, "class_means", tuple(tuple(float(x) for x in v) for v in means))
        object.__setattr__(self, "class_scales", tuple(tuple(float(x) for x in v) for v in scales))


def load_csv(path, schema: CsvSchema = CsvSchema()) -> Dataset:
    """Read a labeled numeric CSV into a Dataset.

    Every non-label cell must parse as a finite real; parse failures name
    the offending row and column. Label cells must equal the schema's
    positive or negative label.
    """
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh, delimiter=schema.delimiter)
        rows = list(reader)
    if not rows:
        raise InvalidInputError(f"{path}: empty file")
    if schema.has_header:
        header = rows[0]
        body = rows[1:]
        if schema.label_column not in header:
            raise InvalidInputError(
                f"{path}: label column {schema.label_column!r} not in header"
            )
        label_pos = header.index(schema.label_column)
        names = tuple(h for i, h in enumerate(header) if i != label_pos)
    else:
        body = rows
        if not body:
            raise InvalidInputError(f"{path}: no data rows")
        label_pos = len(body[0]) - 1  # headerless: label is the last column
        names = tuple(f"f{i}" for i in range(label_pos))

    feats, labels = [], []
    for r, row in enumerate(body):
        if len(row) != len(names) + 1:
            raise InvalidInputError(f"{path}: row {r + 1} has {len(row)} cells, expected {len(names) + 1}")
        cell = row[label_pos].strip()
        if cell == schema.positive_label:
            labels.append(1)
        elif cell == schema.negative_label:
            labels.append(0)
        else:
            raise InvalidInputError(f"{path}: row {r + 1}: unknown label value {cell!r}")
        values = []
        for c, raw in enumerate(cell2 for i, cell2 in enumerate(row) if i != label_pos):
            try:
                v = float(raw)
            except ValueError:
                raise InvalidInputError(
                    f"{path}: row {r + 1}, column {names[c]!r}: cannot parse {raw!r}"
                ) from None
            if not np.isfinite(v):
                raise InvalidInputError(
                    f"{path}: row {r + 1}, column {names[c]!r}: non-finite value"
                )
            values.append(v)
        feats.append(values)
    return Dataset(np.array(feats, dtype=float).reshape(len(body), len(names)), labels, names)


def save_csv(
    d: Dataset,
    path,
    schema: CsvSchema = CsvSchema(),
    report: Optional[ResampleReport] = None,
) -> None:
    """Write a Dataset as CSV (inverse of load_csv for the same schema).

    Rows keep their dataset order: originals first in input order,
    synthetics in generation order. When a resample report is supplied, a
    JSON provenance sidecar is written next to the file.
    """
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, delimiter=schema.delimiter, lineterminator="\n")
        if schema.has_header:
            writer.writerow(list(d.feature_names) + [schema.label_column])
        for row, label in zip(d.features, d.labels):
            cells = [repr(float(v)) for v in row]
            cells.append(schema.positive_label if label == 1 else schema.negative_label)
            writer.writerow(cells)
    if report is not None:
        sidecar = str(path) + ".provenance.json"
        with open(sidecar, "w", encoding="utf-8") as fh:
            fh.write(canonical_json(report.to_dict()))


def gen_gaussian_binary(spec: SynthSpec) -> Dataset:
    """Seeded two-class Gaussian dataset; majority rows first (label 0).

    Variates come from the pinned Box-Muller transform of the stream's
    uniforms, consumed class by class in row-major order.
    """
    gen = spec.seed.generator()
    blocks, labels = [], []
    for label, count, means, scales in (
        (0, spec.n_majority, spec.class_means[0], spec.class_scales[0]),
        (1, spec.n_minority, spec.class_means[1], spec.class_scales[1]),
    ):
        z = normals(gen, count * spec.n_features).reshape(count, spec.n_features)
        blocks.append(np.array(means) + z * np.array(scales))
        labels.extend([label] * count)
    names = tuple(f"f{i}" for i in range(spec.n_features))
    return Dataset(np.vstack(blocks), labels, names)


def emit_scatter(
    d: Dataset,
    dims: Sequence[int],
    path,
    report: Optional[ResampleReport] = None,
    svg_path=None,
) -> None:
    """Write scatter plot data: selected features, label, and origin.

    dims picks 2 or 3 feature columns. Origin is "synthetic" for rows the
    report's provenance marks as generated, else "original". With two dims
    an SVG rendering can also be written (labels colored, synthetics as
    open markers).
    """
    dims = [int(i) for i in dims]
    if len(dims) not in (2, 3):
        raise InvalidInputError("dims must select 2 or 3 features")
    if any(i < 0 or i >= d.n_features for i in dims):
        raise InvalidInputError("dims out of range for the feature count")
    synthetic_rows = set()
    if report is not None:
        synthetic_rows = {p.row for p in report.provenance if p.row is not None}
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow([d.feature_names[i] for i in dims] + ["label", "origin"])
        for r in range(d.n_samples):
            origin = "synthetic" if r in synthetic_rows else "original"
            writer.writerow(
                [repr(float(d.features[r, i])) for i in dims]
                + [str(int(d.labels[r])), origin]
            )
    if svg_path is not None:
        if len(dims) != 2:
            raise InvalidInputError("svg rendering supports 2-D scatters only")
        _write_scatter_svg(d, dims, synthetic_rows, svg_path)


def _write_scatter_svg(d: Dataset, dims, synthetic_rows, svg_path) -> None:
    width = height = 480.0
    margin = 40.0
    x = d.features[:, dims[0]]
    y = d.features[:, dims[1]]
    span_x = (x.max() - x.min()) or 1.0
    span_y = (y.max() - y.min()) or 1.0

    def sx(v):
        return margin + (v - x.min()) / span_x * (width - 2 * margin)

    def sy(v):
        return height - margin - (v - y.min()) / span_y * (height - 2 * margin)

    colors = {0: "#1f77b4", 1: "#d62728"}
    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width:g}" height="{height:g}" '
        f'viewBox="0 0 {width:g} {height:g}">',
        f'<rect width="{width:g}" height="{height:g}" fill="white"/>',
    ]
    for r in range(d.n_samples):
        fill = colors[int(d.labels[r])]
        if r in synthetic_rows:
            parts.append(
                f'<circle cx="{sx(x[r]):.2f}" cy="{sy(y[r]):.2f}" r="3" '
                f'fill="none" stroke="{fill}" stroke-width="1.2"/>'
            )
        else:
            parts.append(
                f'<circle cx="{sx(x[r]):.2f}" cy="{sy(y[r]):.2f}" r="2.4" fill="{fill}"/>'
            )
    parts.append("</svg>")
    with open(svg_path, "w", encoding="utf-8") as fh:
        fh.write("\n".join(parts) + "\n")


def canonical_json(payload: dict) -> str:
    """Deterministic JSON text (sorted keys, fixed separators, newline end).

    Non-finite floats become null so the output stays strict JSON.
    """
    return json.dumps(_jsonable(payload), sort_keys=True, indent=2, allow_nan=False) + "\n"


def _jsonable(value):
    if isinstance(value, (np.floating, np.integer)):
        return value.item()
    if isinstance(value, np.ndarray):
        return [_jsonable(v) for v in value]
    if isinstance(value, dict):
        return {k: _jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_jsonable(v) for v in value]
    if isinstance(value, float) and not np.isfinite(value):
        return None
    return value


def run_report(command: str, config: dict, payload: dict) -> str:
    """Canonical run report embedding the fully-resolved configuration."""
    doc = {
        "schema_version": SCHEMA_VERSION,
        "command": command,
        "config": _jsonable(config),
        "result": _jsonable(payload),
    }
    return canonical_json(doc)


def file_sha256(path) -> str:
    digest = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(65536), b""):
            digest.update(chunk)
    return digest.hexdigest()
