"""Measure tables: per-variant aggregation and CSV/text rendering.

Each side of the tournament gets one table with a row per measure and a
column per variant, every cell the median and quartiles across that
variant's replications. The AQD score can be unbounded, which renders
as an infinity sign in text and as `null` in CSV; quartiles touching an
unbounded replication are computed with an infinity-aware interpolation
instead of numpy's (whose linear blend of two infinities is NaN).
"""

from __future__ import annotations

import math

from .measures import MEASURE_NAMES, both_side_measures

_PERCENT = {"Win rate", "ELO Score", "Coverage"}


def _quantile(values, q: float) -> float:
    v = sorted(values)
    pos = q * (len(v) - 1)
    lo = math.floor(pos)
    t = pos - lo
    a = v[lo]
    b = v[min(lo + 1, len(v) - 1)]
    if t == 0.0 or a == b:
        return a
    if math.isinf(b):
        return b
    if math.isinf(a):
        return a
    return a + t * (b - a)


def summarize(values) -> dict:
    return {"median": _quantile(values, 0.5),
            "q1": _quantile(values, 0.25),
            "q3": _quantile(values, 0.75),
            "values": list(values)}


def build_tables(matrix, k: int) -> dict:
    """Aggregate both sides' measures across replications.

    Returns {side: {variant: {measure: {median, q1, q3, values}}}},
    variants in matrix label order, replications in key order."""
    raw = both_side_measures(matrix.per_rep, matrix.row_sets(),
                             matrix.col_sets(), k, matrix.seed)
    tables = {}
    for side in ("red", "blue"):
        per_variant = {}
        for (variant, _rep), ms in raw[side].items():
            per_variant.setdefault(variant, []).append(ms)
        tables[side] = {
            variant: {name: summarize([ms[name] for ms in reps])
                      for name in MEASURE_NAMES}
            for variant, reps in per_variant.items()}
    return tables


def _csv_num(x) -> str:
    if math.isinf(x):
        return "null"
    return repr(float(x))


def tables_to_csv(tables) -> str:
    n_reps = 0
    for side in tables.values():
        for variant in side.values():
            n_reps = max(n_reps, len(variant["Win rate"]["values"]))
    head = ["side", "variant", "measure", "median", "q1", "q3"]
    head += [f"rep{r}" for r in range(n_reps)]
    lines = [",".join(head)]
    for side, variants in tables.items():
        for variant, measures in variants.items():
            for name in MEASURE_NAMES:
                s = measures[name]
                row = [side, variant, name, _csv_num(s["median"]),
                       _csv_num(s["q1"]), _csv_num(s["q3"])]
                row += [_csv_num(v) for v in s["values"]]
                row += [""] * (len(head) - len(row))
                lines.append(",".join(row))
    return "\n".join(lines) + "\n"


def _fmt(name: str, x) -> str:
    if math.isinf(x):
        return "∞"
    if name in _PERCENT:
        return f"{x:.1f}%"
    if name == "AQD-Score":
        return f"{x:g}"
    return f"{x:.3f}"


def _cell(name: str, s: dict) -> str:
    return (f"{_fmt(name, s['median'])} "
            f"[{_fmt(name, s['q1'])}, {_fmt(name, s['q3'])}]")


def tables_to_text(tables) -> str:
    out = []
    for side, variants in tables.items():
        names = list(variants)
        grid = [["measure"] + names]
        for m in MEASURE_NAMES:
            grid.append([m] + [_cell(m, variants[v][m]) for v in names])
        widths = [max(len(row[c]) for row in grid)
                  for c in range(len(grid[0]))]
        out.append(f"side: {side} (median [q1, q3] over "
                   f"{len(next(iter(variants.values()))['Win rate']['values'])}"
                   " replications)")
        for r, row in enumerate(grid):
            out.append("  ".join(c.ljust(w) for c, w in zip(row, widths))
                       .rstrip())
            if r == 0:
                out.append("-" * (sum(widths) + 2 * (len(widths) - 1)))
        out.append("")
    return "\n".join(out)
