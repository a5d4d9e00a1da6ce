"""Known values of coin (table 1) and wcoin (table 2), recomputed from curated γ data.

Rows are produced by the index and calculus code, not typed in; only the Δ^d
row of table 2 is a closed form, since no d-simplex body exists here for d > 2.
"""
from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass

from .bodies import DirectSum, Segment, canonical, cube
from .calculus import coin_direct_sum, direct_sum_gamma
from .config import DEFAULT, RunConfig
from .intervals import Interval
from .index import coin, wcoin

ELL = Segment(1.0)


@dataclass(frozen=True)
class Row:
    body: str
    m: int | None
    m_note: str  # "" for the witness m, "≥" when only a lower bound on the optimal m is known
    gamma: Interval | None
    value: Interval
    provenance: str
    via: str = ""

    def to_dict(self) -> dict:
        return {
            "body": self.body,
            "m": self.m,
            "m_note": self.m_note,
            "gamma": None if self.gamma is None else self.gamma.to_dict(),
            "value": self.value.to_dict(),
            "provenance": self.provenance,
            "via": self.via,
        }


def _fmt(iv: Interval | None, digits: int = 6) -> str:
    if iv is None:
        return "-"
    if math.isclose(iv.lo, iv.hi, rel_tol=1e-9) or iv.exact:
        x = iv.hi
        return str(int(round(x))) if abs(x - round(x)) < 1e-9 else f"{x:.{digits}g}"
    if iv.lo <= 0 or iv.lo_provenance == "trivial":
        return f"≤ {iv.hi:.{digits}g}"
    return f"[{iv.lo:.{digits}g}, {iv.hi:.{digits}g}]"


def _prov(iv: Interval) -> str:
    if iv.lo_provenance == iv.hi_provenance:
        return iv.lo_provenance
    return f"{iv.lo_provenance}/{iv.hi_provenance}"


def _geometric_row(label: str, body, kind: str, config: RunConfig) -> Row:
    fn = coin if kind == "coin" else wcoin
    r = fn(body, config=config, search_enabled=False)
    note = "" if r.value.exact else "≥"
    return Row(label, r.witness_m, note, r.witness_gamma, r.value, _prov(r.value), "index")


def _sum_row(label: str, parts, kind: str, config: RunConfig) -> Row:
    r = coin_direct_sum(parts, kind=kind, config=config)
    g = direct_sum_gamma(parts, r.witness_count, config) if r.witness_count else None
    return Row(label, r.witness_count, "" if r.exact else "≥", g, r.value, _prov(r.value), "direct sum")


def _simplex_row(d: int) -> Row:
    # d+1 homothets of ratio d/(d+1) placed at the vertices cover Δ^d
    lam = d / (d + 1)
    hi = (d + 1) / (1 - lam)
    lo = min(m / (1 - m ** (-1.0 / d)) for m in range(2, int(hi) + 1))
    gamma = Interval((d + 1) ** (-1.0 / d), lam, "volumetric", "formula")
    return Row(f"Δ^{d}", d + 1, "≥", gamma, Interval(lo, hi, "volumetric", "formula"), "volumetric/formula", "closed form")


def table(which: int, config: RunConfig = DEFAULT) -> list[Row]:
    """Rows of table 1 (coin) or table 2 (wcoin)."""
    if which not in (1, 2):
        raise ValueError("table must be 1 or 2")
    kind = "coin" if which == 1 else "wcoin"
    rows = [
        _geometric_row("ℓ", canonical("segment"), kind, config),
        _geometric_row("H", canonical("hexagon"), kind, config),
        _geometric_row("Δ²", canonical("triangle"), kind, config),
        _geometric_row("B²", canonical("disk"), kind, config),
    ]
    if which == 1:
        rows.append(_geometric_row("B³", canonical("ball3"), kind, config))
    rows.append(_geometric_row("C² (square)", canonical("square"), kind, config))
    for d in range(2, 6):
        c = cube(d)
        rows.append(_sum_row(f"C^{d}", c.flat_parts(), kind, config))
    if which == 2:
        rows.extend(_simplex_row(d) for d in range(2, 7))
    for label, base in (("H⊕ℓ", "hexagon"), ("Δ²⊕ℓ", "triangle"), ("B²⊕ℓ", "disk")):
        rows.append(_sum_row(label, [canonical(base), ELL], kind, config))
    return rows


HEADER = ("body", "m", "γ_m", "value", "provenance", "via")


def _cells(row: Row, which: int) -> tuple[str, ...]:
    m = "-" if row.m is None else f"{row.m_note}{row.m}".replace("≥", "≥ ")
    return (row.body, m, _fmt(row.gamma), _fmt(row.value), row.provenance, row.via)


def to_markdown(rows: list[Row], which: int) -> str:
    head = list(HEADER)
    head[3] = "coin" if which == 1 else "wcoin"
    lines = ["| " + " | ".join(head) + " |", "|" + "---|" * len(head)]
    lines += ["| " + " | ".join(_cells(r, which)) + " |" for r in rows]
    return "\n".join(lines) + "\n"


def to_csv(rows: list[Row], which: int) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["body", "m", "m_note", "gamma_lo", "gamma_hi", "value_lo", "value_hi", "provenance", "via"])
    for r in rows:
        g = r.gamma
        w.writerow([r.body, r.m, r.m_note, g.lo if g else "", g.hi if g else "",
                    r.value.lo, r.value.hi, r.provenance, r.via])
    return buf.getvalue()


def to_text(rows: list[Row], which: int) -> str:
    head = list(HEADER)
    head[3] = "coin" if which == 1 else "wcoin"
    cells = [tuple(head)] + [_cells(r, which) for r in rows]
    widths = [max(len(c[i]) for c in cells) for i in range(len(head))]
    return "\n".join("  ".join(c[i].ljust(widths[i]) for i in range(len(head))).rstrip() for c in cells) + "\n"
