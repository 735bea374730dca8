"""CSV and JSON writers for traces, histograms, scans and summaries.

Floats in CSV use 12 significant digits.  JSON summaries carry a top-level
``format`` tag, sorted keys and no NaN/Infinity literals (non-finite values
become the strings ``"inf"``, ``"-inf"`` and ``"nan"``), so identical inputs
give byte-identical files.
"""

from __future__ import annotations

import csv
import json
import math
from pathlib import Path

import numpy as np

from .cascade import CascadeResult
from .photometry import CountHistogram
from .solver import InterfaceResult

SUMMARY_FORMAT = "eitcascade.{kind}/1"


def fmt(x) -> str:
    return f"{float(x):.12g}"


def _clean(obj):
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        if math.isfinite(x):
            return x
        return "nan" if math.isnan(x) else ("inf" if x > 0 else "-inf")
    return obj


def dumps_summary(kind: str, payload: dict) -> str:
    doc = {"format": SUMMARY_FORMAT.format(kind=kind), **_clean(payload)}
    return json.dumps(doc, indent=2, sort_keys=True, allow_nan=False) + "\n"


def write_summary(path, kind: str, payload: dict) -> Path:
    path = Path(path)
    path.write_text(dumps_summary(kind, payload), encoding="utf-8")
    return path


def write_csv(path, header: list[str], columns) -> Path:
    path = Path(path)
    columns = [np.asarray(c) for c in columns]
    with path.open("w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in zip(*columns):
            w.writerow([fmt(v) if np.issubdtype(type(v), np.floating) else v for v in row])
    return path


def interface_columns(result: InterfaceResult, control2=None):
    f = result.field
    c2 = np.zeros(f.tgrid.nt) if control2 is None else control2.samples
    header = ["t_us", "re_in", "im_in", "re_out", "im_out", "control1", "control2"]
    cols = [f.tgrid.times, f.input_envelope.real, f.input_envelope.imag,
            f.output.real, f.output.imag, result.control.samples, c2]
    return header, [np.asarray(c, dtype=float) for c in cols]


def write_interface_csv(path, result: InterfaceResult, control2=None) -> Path:
    return write_csv(path, *interface_columns(result, control2))


def write_cascade_csv(path, result: CascadeResult) -> Path:
    header, cols = interface_columns(result.stage1, result.stage2.control)
    out2 = result.stage2.output
    header = header[:5] + ["re_out2", "im_out2"] + header[5:]
    cols = cols[:5] + [out2.real.astype(float), out2.imag.astype(float)] + cols[5:]
    return write_csv(path, header, cols)


def write_histogram_csv(path, signal: CountHistogram, background: CountHistogram) -> Path:
    return write_csv(path, ["bin_start_us", "counts_signal", "counts_background"],
                     [signal.edges[:-1], signal.counts, background.counts])


def write_scan_csv(path, result, power_label: float | None = None) -> Path:
    """One row per grid point: axis values, optional μW label, then metrics."""
    names = [p for p, _ in result.axes]
    metrics = list(result.metrics)
    header = list(names)
    if power_label is not None:
        header += [f"{p}_power_uW" for p in names]
    header += metrics
    rows = []
    for _, params, values in result.points():
        row = [fmt(params[p]) for p in names]
        if power_label is not None:
            row += [fmt(power_label * params[p] ** 2) for p in names]
        row += [fmt(values[m]) for m in metrics]
        rows.append(row)
    path = Path(path)
    with path.open("w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        w.writerows(rows)
    return path
