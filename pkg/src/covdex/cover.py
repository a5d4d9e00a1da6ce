"""Homothetic cover certificates and their rigorous verification.

A certificate claims ``K ⊆ ∪ (ratio·K + t_i)``. Verification subdivides the
bounding cube of K. A cell is discharged by the 1-Lipschitz depth bound or,
failing that, by an exact corner test against each homothet.
"""
from __future__ import annotations

import enum
import json
import math
from dataclasses import dataclass, field
from itertools import product
from pathlib import Path

import numpy as np
from scipy.stats import qmc

from .bodies import Body, BodyError, body_from_dict, bounding_box, require_geometric

RHO_MIN = 1e-9
DEFAULT_SLACK = 1e-6
DEFAULT_CELL_BUDGET = 10**7
_CHUNK = 1 << 17


class CertificateError(BodyError):
    pass


@dataclass(frozen=True)
class CoverCertificate:
    body: Body
    ratio: float
    centers: tuple[tuple[float, ...], ...]
    label: str = ""

    def __post_init__(self):
        require_geometric(self.body)
        if not (0.0 < self.ratio < 1.0):
            raise CertificateError(f"certificate ratio must lie in (0, 1), got {self.ratio}")
        centers = tuple(tuple(float(x) for x in c) for c in self.centers)
        object.__setattr__(self, "centers", centers)
        if not centers:
            raise CertificateError("certificate needs at least one center")
        if any(len(c) != self.body.dim for c in centers):
            raise CertificateError("every center must match the body dimension")
        if not np.all(np.isfinite(np.array(centers))):
            raise CertificateError("centers must be finite")

    @property
    def m(self) -> int:
        return len(self.centers)

    @property
    def translations(self) -> np.ndarray:
        return np.array(self.centers)

    def to_dict(self) -> dict:
        return {
            "body": self.body.to_dict(),
            "ratio": self.ratio,
            "centers": [list(c) for c in self.centers],
            "label": self.label,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "CoverCertificate":
        try:
            return cls(body_from_dict(d["body"]), float(d["ratio"]), tuple(map(tuple, d["centers"])), d.get("label", ""))
        except KeyError as exc:
            raise CertificateError(f"certificate is missing field {exc}") from None

    def save(self, path: str | Path) -> Path:
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(json.dumps(self.to_dict(), indent=1) + "\n")
        return path

    @classmethod
    def load(cls, path: str | Path) -> "CoverCertificate":
        return cls.from_dict(json.loads(Path(path).read_text()))


class Status(str, enum.Enum):
    VERIFIED = "Verified"
    REFUTED = "Refuted"
    UNKNOWN = "Unknown"


@dataclass(frozen=True)
class VerifyOutcome:
    status: Status
    margin: float
    witness: tuple[float, ...] | None = None
    cells_visited: int = 0
    slack: float = field(default=0.0, compare=False)

    @property
    def verified(self) -> bool:
        return self.status is Status.VERIFIED

    def to_dict(self) -> dict:
        return {
            "status": self.status.value,
            "margin": self.margin,
            "witness": None if self.witness is None else list(self.witness),
            "cells_visited": self.cells_visited,
        }


def inflated_translations(cert: "CoverCertificate", slack: float) -> tuple[float, np.ndarray]:
    """Ratio and translations of the homothets grown by ``1+slack`` about their own reference points.

    Growing ``ratio*K + t`` about ``ratio*c + t`` (c the body's reference
    point) keeps every original homothet inside its inflated copy, so a
    larger slack can only help.
    """
    lam = cert.ratio * (1.0 + slack)
    c = cert.body.center
    return lam, cert.translations + (cert.ratio - lam) * c


def homothet_depth(body: Body, translations: np.ndarray, ratio: float, points: np.ndarray) -> np.ndarray:
    """min_i of ratio·depth_K((p - t_i)/ratio): the depth of p in the union of homothets."""
    best = np.full(len(points), np.inf)
    for t in translations:
        np.minimum(best, ratio * body.depth((points - t) / ratio), out=best)
    return best


def _discharge(body, t, lam, c, half, rho):
    dk = body.depth(c)
    hd = homothet_depth(body, t, lam, c)
    outside = (dk > rho) | body.box_misses(c, half)
    inside = hd <= -rho
    todo = np.flatnonzero(~(outside | inside))
    if len(todo):
        # exact test on the cell corners for cells the Lipschitz bound cannot settle
        sub = c[todo]
        hit = np.zeros(len(sub), dtype=bool)
        for ti in t:
            hit |= body.box_in_homothet(sub, half, lam, ti)
        inside[todo[hit]] = True
    return dk, hd, outside | inside


def verify_cover(cert: CoverCertificate, slack: float = DEFAULT_SLACK, cell_budget: int = DEFAULT_CELL_BUDGET) -> VerifyOutcome:
    """Decide ``K ⊆ ∪ inflated homothets`` by adaptive bisection of the bounding box.

    A cell is discharged when it misses K or when its part inside K lies in
    one inflated homothet. Verified is rigorous up to floating point; Refuted
    carries a witness strictly inside K missed by every inflated homothet;
    Unknown means the cell budget ran out.
    """
    if slack < 0:
        raise ValueError("slack must be non-negative")
    body = cert.body
    require_geometric(body)
    d = body.dim
    lam, t = inflated_translations(cert, slack)
    lo, hi = bounding_box(body)
    half = float(np.max(hi - lo)) / 2
    cells = (lo + half)[None, :]
    offsets = np.array(list(product((-0.5, 0.5), repeat=d)))
    visited = 0
    while len(cells):
        exhausted = visited + len(cells) > cell_budget
        if exhausted:
            cells = cells[: max(cell_budget - visited, 0)]
        visited += len(cells)
        rho = half * math.sqrt(d)
        survivors = []
        for start in range(0, len(cells), _CHUNK):
            c = cells[start : start + _CHUNK]
            dk, hd, done = _discharge(body, t, lam, c, half, rho)
            bad = np.flatnonzero((dk <= -RHO_MIN) & (hd > 0))
            if len(bad):
                i = bad[0]
                return VerifyOutcome(Status.REFUTED, float(hd[i]), tuple(map(float, c[i])), visited, slack)
            survivors.append(c[~done])
        if exhausted:
            return VerifyOutcome(Status.UNKNOWN, 0.0, None, visited, slack)
        cells = np.concatenate(survivors) if survivors else np.empty((0, d))
        half /= 2
        cells = (cells[:, None, :] + offsets[None] * (2 * half)).reshape(-1, d)
    return VerifyOutcome(Status.VERIFIED, lam - cert.ratio, None, visited, slack)


def quasi_random_points(body: Body, samples: int, seed: int) -> np.ndarray:
    """Scrambled Halton points of the bounding box that fall in K."""
    require_geometric(body)
    lo, hi = bounding_box(body)
    sampler = qmc.Halton(d=body.dim, scramble=True, seed=seed)
    pts = lo + (hi - lo) * sampler.random(samples)
    return pts[body.depth(pts) <= 0]


def uncovered_witness(cert: CoverCertificate, samples: int = 20000, seed: int = 0) -> tuple[float, ...] | None:
    """A sampled point of K outside every homothet, or None if none is found."""
    pts = quasi_random_points(cert.body, samples, seed)
    hd = homothet_depth(cert.body, cert.translations, cert.ratio, pts)
    idx = np.flatnonzero(hd > 0)
    if len(idx) == 0:
        return None
    return tuple(map(float, pts[idx[np.argmax(hd[idx])]]))
