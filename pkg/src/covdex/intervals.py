"""Closed intervals with provenance, the answer type for every quantity."""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Any

PROVENANCES = ("paper", "volumetric", "certificate", "formula", "trivial")


@dataclass(frozen=True)
class Interval:
    """``[lo, hi]``; ``lo_strict`` records that the true value is known to exceed ``lo``.

    ``hi`` may be ``inf`` for f_m / g_m values. ``evidence`` optionally carries
    the object backing ``hi`` (for example a certificate) and is ignored by
    equality.
    """

    lo: float
    hi: float
    lo_provenance: str = "trivial"
    hi_provenance: str = "trivial"
    lo_strict: bool = False
    evidence: Any = field(default=None, compare=False, repr=False)

    def __post_init__(self):
        if math.isnan(self.lo) or math.isnan(self.hi):
            raise ValueError("interval endpoints must not be NaN")
        if self.lo > self.hi:
            raise ValueError(f"empty interval [{self.lo}, {self.hi}]")
        for p in (self.lo_provenance, self.hi_provenance):
            if p not in PROVENANCES:
                raise ValueError(f"unknown provenance {p!r}")

    @classmethod
    def point(cls, x: float, provenance: str = "formula") -> "Interval":
        return cls(x, x, provenance, provenance)

    @property
    def width(self) -> float:
        return self.hi - self.lo

    @property
    def exact(self) -> bool:
        return self.lo == self.hi

    def contains(self, x: float, tol: float = 0.0) -> bool:
        return self.lo - tol <= x <= self.hi + tol

    def meet(self, other: "Interval") -> "Interval":
        """Intersection of two rigorous enclosures of the same quantity."""
        if other.lo > self.lo or (other.lo == self.lo and other.lo_strict):
            lo, lp, ls = other.lo, other.lo_provenance, other.lo_strict
        else:
            lo, lp, ls = self.lo, self.lo_provenance, self.lo_strict
        if other.hi < self.hi:
            hi, hp, ev = other.hi, other.hi_provenance, other.evidence
        else:
            hi, hp, ev = self.hi, self.hi_provenance, self.evidence
        if lo > hi:
            raise ValueError(f"inconsistent enclosures {self} and {other}")
        return Interval(lo, hi, lp, hp, ls, ev)

    def with_hi(self, hi: float, provenance: str, evidence=None) -> "Interval":
        return replace(self, hi=hi, hi_provenance=provenance, evidence=evidence)

    def to_dict(self) -> dict:
        return {
            "lo": _num(self.lo),
            "hi": _num(self.hi),
            "lo_provenance": self.lo_provenance,
            "hi_provenance": self.hi_provenance,
            "lo_strict": self.lo_strict,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "Interval":
        return cls(
            _parse(d["lo"]), _parse(d["hi"]), d.get("lo_provenance", "trivial"),
            d.get("hi_provenance", "trivial"), bool(d.get("lo_strict", False)),
        )

    def __str__(self) -> str:
        if self.exact:
            return f"{self.lo:.6g}"
        return f"[{self.lo:.6g}{'+' if self.lo_strict else ''}, {self.hi:.6g}]"


def _num(x: float):
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    return x


def _parse(x) -> float:
    return float(x)


def robust_ceil(x: float, rel: float = 1e-12) -> int:
    """``ceil`` that forgives rounding just above an integer (1/(1/3) -> 3, not 4)."""
    r = round(x)
    if abs(x - r) <= rel * max(1.0, abs(x)):
        return int(r)
    return math.ceil(x)
