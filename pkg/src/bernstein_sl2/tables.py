"""Projector tables over the class grid, rendered as markdown, CSV or JSON."""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Optional, Sequence

from .classes import Depth, RegSSClass, class_grid, depths_upto
from .projectors import cusp_d_integral, e0, e_d_halfintegral, sigma


@dataclass(frozen=True)
class Row:
    cls: RegSSClass
    value: Fraction
    q: int

    @property
    def q_exponent(self) -> Optional[int]:
        """Exponent of q in the value (None for 0)."""
        if self.value == 0:
            return None
        v, num, den = 0, self.value.numerator, self.value.denominator
        while num % self.q == 0:
            num //= self.q
            v += 1
        while den % self.q == 0:
            den //= self.q
            v -= 1
        return v

    def to_json(self) -> dict:
        return {
            "class": self.cls.canonical(),
            "value_num": self.value.numerator,
            "value_den": self.value.denominator,
            "q_exponent": self.q_exponent,
        }


@dataclass(frozen=True)
class Table:
    name: str
    title: str
    q: int
    depth: Depth
    rows: tuple[Row, ...]

    def to_json(self) -> dict:
        return {
            "table": self.name,
            "q": self.q,
            "depth": str(self.depth),
            "rows": [r.to_json() for r in self.rows],
        }


def _table(name: str, title: str, q: int, d: Depth, fn: Callable, grid: Sequence[RegSSClass]) -> Table:
    rows = tuple(Row(c, fn(d, c, q), q) for c in grid)
    return Table(name, title, q, d, rows)


def build_tables(q: int, depth_max, grid: Optional[Sequence[RegSSClass]] = None) -> list[Table]:
    """Depth-zero table, cuspidal tables at integral depth, half-integral
    depth tables, and sigma_d for every d <= depth_max."""
    depth_max = Depth.of(depth_max)
    grid = class_grid(q, depth_max) if grid is None else list(grid)
    out = [_table("table1", "e_0", q, Depth(0), lambda d, c, q: e0(c, q), grid)]
    for d in depths_upto(depth_max):
        if d.twice == 0:
            continue
        if d.is_integral:
            out.append(_table("table2", f"e^cusp_{d}", q, d, cusp_d_integral, grid))
        else:
            out.append(_table("table3", f"e_{d}", q, d, e_d_halfintegral, grid))
    for d in depths_upto(depth_max):
        out.append(_table("sigma", f"sigma_{d}", q, d, sigma, grid))
    return out


def render_markdown(tables: Sequence[Table]) -> str:
    parts = []
    for t in tables:
        parts.append(f"## {t.title} (q={t.q})\n")
        parts.append("| class | value | q-exponent |")
        parts.append("|---|---:|---:|")
        for r in t.rows:
            e = "" if r.q_exponent is None else str(r.q_exponent)
            parts.append(f"| {r.cls.canonical()} | {r.value} | {e} |")
        parts.append("")
    return "\n".join(parts)


CSV_HEADER = ["table", "q", "depth", "class", "value_num", "value_den", "q_exponent"]


def csv_rows(tables: Sequence[Table]) -> list[list[str]]:
    out = []
    for t in tables:
        for r in t.rows:
            e = "" if r.q_exponent is None else str(r.q_exponent)
            out.append([t.name, str(t.q), str(t.depth), r.cls.canonical(), str(r.value.numerator), str(r.value.denominator), e])
    return out


def write_csv(rows: Sequence[Sequence[str]]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_HEADER)
    writer.writerows(rows)
    return buf.getvalue()


def render_csv(tables: Sequence[Table]) -> str:
    return write_csv(csv_rows(tables))


def render_json(tables: Sequence[Table]) -> str:
    return json.dumps([t.to_json() for t in tables], indent=2) + "\n"


RENDERERS = {"md": render_markdown, "csv": render_csv, "json": render_json}
