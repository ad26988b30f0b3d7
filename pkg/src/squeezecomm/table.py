"""Result tables and their CSV / JSON / SVG renderings.

CSV layout: one ``# key=value ...`` metadata line, a header of
``name(unit)`` cells, then rows with 12 significant digits and ``\\n``
line endings.
"""
from __future__ import annotations

import io
import json
import math
import sys
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .errors import ValidationError


@dataclass(frozen=True)
class Column:
    name: str
    unit: str
    source: str = "derived"     # formula the column comes from, or "derived"

    def __post_init__(self):
        if not self.name or not isinstance(self.unit, str) or not self.source:
            raise ValidationError("columns need a name, a unit string and a source tag")

    @property
    def header(self) -> str:
        return f"{self.name}({self.unit})"


def fmt(v) -> str:
    v = float(v)
    if math.isnan(v):
        return "nan"
    if math.isinf(v):
        return "inf" if v > 0 else "-inf"
    return format(v, ".12g")


@dataclass
class ResultTable:
    columns: list
    rows: list
    metadata: dict = field(default_factory=dict)

    def __post_init__(self):
        self.columns = list(self.columns)
        width = len(self.columns)
        clean = []
        for row in self.rows:
            if len(row) != width:
                raise ValidationError(f"row has {len(row)} values, expected {width}")
            try:
                clean.append([float(v) for v in row])
            except (TypeError, ValueError):
                raise ValidationError(f"non-numeric value in row {row!r}") from None
        self.rows = clean

    @classmethod
    def from_arrays(cls, columns: Sequence[Column], arrays: Sequence, metadata=None) -> "ResultTable":
        arrays = [np.asarray(a, dtype=float) for a in arrays]
        if len({a.shape for a in arrays}) > 1:
            raise ValidationError("column arrays differ in length")
        return cls(list(columns), np.column_stack(arrays).tolist() if arrays else [], dict(metadata or {}))

    def column(self, name: str) -> np.ndarray:
        for i, c in enumerate(self.columns):
            if c.name == name:
                return np.array([r[i] for r in self.rows])
        raise KeyError(name)

    def _meta_line(self) -> str:
        return "# " + " ".join(f"{k}={v}" for k, v in self.metadata.items())

    def to_csv(self) -> str:
        lines = [self._meta_line(), ",".join(c.header for c in self.columns)]
        lines += [",".join(fmt(v) for v in r) for r in self.rows]
        return "\n".join(lines) + "\n"

    def to_json(self) -> str:
        def val(v):
            return None if not math.isfinite(v) else float(fmt(v))

        doc = {
            "metadata": self.metadata,
            "columns": [{"name": c.name, "unit": c.unit} for c in self.columns],
            "rows": [[val(v) for v in r] for r in self.rows],
            "provenance": {c.name: c.source for c in self.columns},
        }
        return json.dumps(doc, indent=2, ensure_ascii=False) + "\n"

    def render(self, fmt_name: str) -> str:
        if fmt_name == "csv":
            return self.to_csv()
        if fmt_name == "json":
            return self.to_json()
        raise ValidationError(f"unknown output format {fmt_name!r}")

    def write(self, path, fmt_name: str = "csv") -> None:
        text = self.render(fmt_name)
        if path is None or str(path) == "-":
            sys.stdout.write(text)
            return
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)


def emit_plot(t: ResultTable, path, logx: bool = False, logy: bool = False, title: str | None = None) -> None:
    """SVG line plot: first column on x, one labeled line per other column."""
    if len(t.columns) < 2:
        raise ValidationError("plotting needs at least two columns")
    if not t.rows:
        raise ValidationError("cannot plot an empty table")
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    data = np.array(t.rows)
    x = data[:, 0]
    with matplotlib.rc_context({"svg.hashsalt": "squeezecomm", "svg.fonttype": "none"}):
        fig, ax = plt.subplots(figsize=(6.4, 4.2))
        for i, col in enumerate(t.columns[1:], start=1):
            ax.plot(x, data[:, i], label=col.header)
        ax.set_xlabel(t.columns[0].header)
        units = sorted({c.unit for c in t.columns[1:]})
        ax.set_ylabel(", ".join(units))
        if logx:
            ax.set_xscale("log")
        if logy:
            ax.set_yscale("log")
        if title:
            ax.set_title(title)
        ax.legend(fontsize="small")
        ax.grid(True, alpha=0.3)
        buf = io.StringIO()
        fig.savefig(buf, format="svg", metadata={"Date": None})
        plt.close(fig)
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(buf.getvalue())
