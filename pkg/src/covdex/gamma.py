"""Two-sided bounds on γ_m(K) and N_λ(K).

Lower bounds are rigorous only: volume (m λ^d ≥ 1) and curated literature
values. Upper bounds come from curated values or from certificates found by
the optimizer and checked by :func:`covdex.cover.verify_cover`. A failed
search never moves a lower bound.
"""
from __future__ import annotations

import json
import math
import os
from dataclasses import dataclass
from functools import lru_cache
from importlib import resources
from pathlib import Path

from .bodies import Body, DirectSum, MinkowskiSum, Segment, body_key, require_geometric
from .config import DEFAULT, RunConfig
from .cover import CertificateError, CoverCertificate, verify_cover
from .intervals import Interval, robust_ceil
from . import search


def gamma_volumetric_lower(d: int, m: int) -> float:
    """m^(-1/d): m homothets of ratio λ cover K only if m λ^d ≥ 1."""
    if d < 1 or m < 1:
        raise ValueError("d and m must be positive")
    return m ** (-1.0 / d)


# ---------------------------------------------------------------------------
# curated values


@dataclass(frozen=True)
class GammaRecord:
    body_key: str
    m: int
    value: Interval
    citation: str

    def __post_init__(self):
        if self.m < 1:
            raise ValueError("m must be at least 1")
        if "paper" in (self.value.lo_provenance, self.value.hi_provenance) and not self.citation:
            raise ValueError("paper-sourced records need a citation")

    def to_dict(self) -> dict:
        return {"body_key": self.body_key, "m": self.m, **self.value.to_dict(), "citation": self.citation}


@lru_cache(maxsize=1)
def curated_rows() -> tuple[dict, ...]:
    text = resources.files("covdex").joinpath("data/gamma_known.jsonl").read_text(encoding="utf-8")
    return tuple(json.loads(line) for line in text.splitlines() if line.strip())


def _keys_for(body: Body) -> list[str]:
    keys = [body_key(body)]
    if body.dim == 2:
        keys.append("planar")
    return keys


def gamma_known(body: Body, m: int) -> GammaRecord | None:
    """Curated bounds on γ_m(K), closed under monotonicity in m; None when nothing is known.

    Segments use the exact law γ_m = 1/m.
    """
    if m < 1:
        raise ValueError("m must be at least 1")
    if isinstance(body, (DirectSum, MinkowskiSum)):
        return None
    if isinstance(body, Segment):
        return GammaRecord("segment", m, Interval.point(1.0 / m, "formula"), "N_λ(ℓ) = ⌈1/λ⌉, so γ_m(ℓ) = 1/m")
    keys = _keys_for(body)
    rows = [r for r in curated_rows() if r["body_key"] in keys]
    lo, lo_strict, hi = 0.0, False, 1.0
    lo_cite = hi_cite = None
    for r in rows:
        # γ is non-increasing in m: lower bounds pass down to smaller m, upper bounds up
        if r["m"] >= m and (r["lo"] > lo or (r["lo"] == lo and r["lo_strict"] and not lo_strict)):
            lo, lo_strict, lo_cite = r["lo"], r["lo_strict"], (r, r["m"] != m)
        if r["m"] <= m and r["hi"] < hi:
            hi, hi_cite = r["hi"], (r, r["m"] != m)
    if lo_cite is None and hi_cite is None:
        return None
    cites = []
    for c in (lo_cite, hi_cite):
        if c is not None:
            text = c[0]["citation"] + (" (with monotonicity in m)" if c[1] else "")
            if text not in cites:
                cites.append(text)
    value = Interval(
        lo, hi, "paper" if lo_cite else "trivial", "paper" if hi_cite else "trivial", lo_strict,
    )
    return GammaRecord(keys[0], m, value, "; ".join(cites))


# ---------------------------------------------------------------------------
# certificate archive


def package_cert_dir() -> Path:
    return Path(str(resources.files("covdex").joinpath("data/certs")))


def user_cert_dir() -> Path:
    """Writable archive: ``$COVDEX_CERT_DIR`` or ``~/.cache/covdex/certs``."""
    env = os.environ.get("COVDEX_CERT_DIR")
    return Path(env) if env else Path.home() / ".cache" / "covdex" / "certs"


def certificate_path(cert: CoverCertificate, root: Path | None = None) -> Path:
    root = user_cert_dir() if root is None else root
    return root / body_key(cert.body) / f"m{cert.m}_r{cert.ratio:.10f}.json"


def archive_certificate(cert: CoverCertificate, root: Path | None = None) -> Path:
    path = certificate_path(cert, root)
    if not path.exists():
        cert.save(path)
    return path


def archived_certificates(body: Body, m: int | None = None) -> list[tuple[CoverCertificate, Path]]:
    """Archived certificates for exactly this body (any m if ``m`` is None), best ratio first."""
    out = []
    key = body_key(body)
    for root in (package_cert_dir(), user_cert_dir()):
        folder = root / key
        if not folder.is_dir():
            continue
        pattern = f"m{m}_*.json" if m is not None else "m*_*.json"
        for path in sorted(folder.glob(pattern)):
            try:
                cert = CoverCertificate.load(path)
            except (CertificateError, ValueError, KeyError, json.JSONDecodeError):
                continue
            if cert.body == body:
                out.append((cert, path))
    out.sort(key=lambda cp: (cp[0].ratio, cp[0].m, str(cp[1])))
    return out


@lru_cache(maxsize=4096)
def _reverify(cert: CoverCertificate, slack: float, cell_budget: int) -> bool:
    return verify_cover(cert, slack, cell_budget).verified


def best_archived(body: Body, m: int, config: RunConfig = DEFAULT) -> CoverCertificate | None:
    """Lowest-ratio archived m-cover of ``body`` that re-verifies now."""
    for cert, _ in archived_certificates(body, m):
        if _reverify(cert, config.slack, config.cell_budget):
            return cert
    return None


# ---------------------------------------------------------------------------
# γ_m estimates


def gamma_bounds(body: Body, m: int, curated: bool = True) -> tuple[Interval, str]:
    """Search-free enclosure: volumetric and curated bounds only."""
    d = body.dim
    vol = gamma_volumetric_lower(d, m)
    value = Interval(vol, 1.0, "volumetric", "trivial")
    citation = ""
    if m == 1:
        value = Interval(1.0, 1.0, "trivial", "trivial")
    if curated:
        rec = gamma_known(body, m)
        if rec is not None:
            value = value.meet(rec.value)
            citation = rec.citation
    return value, citation


_CACHE: dict = {}


def clear_cache() -> None:
    _CACHE.clear()
    _reverify.cache_clear()


def gamma_estimate(
    body: Body,
    m: int,
    tol: float | None = None,
    config: RunConfig = DEFAULT,
    curated: bool = True,
    search_enabled: bool = True,
    archive: bool = True,
) -> Interval:
    """Rigorous enclosure of γ_m(K).

    ``lo`` is the larger of the volumetric and curated lower bounds. ``hi``
    is the smallest of the curated upper bound and ``ratio·(1+slack)`` of
    the best verified certificate (archived or freshly searched). The
    certificate backing ``hi`` rides along as ``evidence``.
    """
    tol = config.tol if tol is None else tol
    if isinstance(body, (DirectSum, MinkowskiSum)):
        from .calculus import direct_sum_gamma

        if isinstance(body, DirectSum):
            return direct_sum_gamma(body.flat_parts(), m)
        return Interval(gamma_volumetric_lower(body.dim, m), 1.0, "volumetric", "trivial")
    require_geometric(body)
    key = (body, m, tol, config, curated, search_enabled, archive)
    if key in _CACHE:
        return _CACHE[key]
    value, _ = gamma_bounds(body, m, curated)
    done = value.exact or isinstance(body, Segment)
    if not done and archive:
        cert = best_archived(body, m, config)
        if cert is not None:
            value = _improve(value, cert, config.slack)
    if not done and search_enabled and (value.hi_provenance != "certificate" or value.width > tol * value.hi):
        res = search.minimize_ratio(
            body, m, starts=config.starts, seed=config.seed, slack=config.slack,
            cell_budget=config.cell_budget, lower=value.lo, tol=tol,
        )
        if res is not None:
            if archive:
                archive_certificate(res.certificate)
            value = _improve(value, res.certificate, config.slack)
    _CACHE[key] = value
    return value


def _improve(value: Interval, cert: CoverCertificate, slack: float) -> Interval:
    hi = min(1.0, cert.ratio * (1 + slack))
    if hi < value.hi and hi >= value.lo:
        return value.with_hi(hi, "certificate", cert)
    return value


# ---------------------------------------------------------------------------
# N_λ


def n_lambda_bounds(body: Body, lam: float, strict_point: bool = True, curated: bool = True) -> Interval:
    """Search-free enclosure of N_λ(K) from volume, curated γ values and the segment law.

    With ``strict_point`` false the strict curated lower bounds are relaxed
    to non-strict ones, giving the bound valid just to the right of ``lam``.
    """
    if not 0 < lam <= 1:
        raise ValueError("lambda must lie in (0, 1]")
    if isinstance(body, DirectSum):
        from .calculus import direct_sum_n_lambda

        return direct_sum_n_lambda(body.flat_parts(), lam)
    if isinstance(body, Segment):
        n = robust_ceil(1.0 / lam)
        return Interval(n, n, "formula", "formula")
    if lam == 1:
        return Interval(1, 1, "trivial", "trivial")
    d = body.dim
    lo = max(1, robust_ceil(lam ** (-d)))
    lo_prov = "volumetric"
    hi, hi_prov = math.inf, "trivial"
    if curated and not isinstance(body, MinkowskiSum):
        for m in range(1, _curated_span(body) + 1):
            rec = gamma_known(body, m)
            if rec is None:
                continue
            v = rec.value
            if v.lo > lam or (strict_point and v.lo_strict and v.lo == lam):
                if m + 1 > lo:
                    lo, lo_prov = m + 1, "paper"
            if v.hi <= lam and m < hi:
                hi, hi_prov = m, "paper"
    return Interval(lo, hi, lo_prov, hi_prov)


def _curated_span(body: Body) -> int:
    keys = _keys_for(body)
    return max([r["m"] for r in curated_rows() if r["body_key"] in keys] or [0])


def n_lambda(body: Body, lam: float, m_cap: int | None = None, config: RunConfig = DEFAULT, search_enabled: bool = True) -> Interval:
    """Enclosure of N_λ(K); ``hi`` may be tightened by certified covers with m ≤ m_cap.

    A certificate at ratio λ/(1+slack) verified with the slack covers K by
    homothets of ratio exactly λ, so it bounds N_λ without relaxation.
    """
    m_cap = config.m_cap if m_cap is None else m_cap
    value = n_lambda_bounds(body, lam)
    if value.exact or not body.geometric:
        return value
    for cert, _ in archived_certificates(body):
        if cert.ratio * (1 + config.slack) <= lam and cert.m < value.hi and cert.m >= value.lo:
            if _reverify(cert, config.slack, config.cell_budget):
                value = Interval(value.lo, cert.m, value.lo_provenance, "certificate", value.lo_strict, cert)
    if search_enabled:
        m = int(value.lo)
        while m < min(value.hi, m_cap + 1):
            cert = search.feasible_cover_search(
                body, m, lam / (1 + config.slack), starts=config.starts, seed=config.seed,
                slack=config.slack, cell_budget=config.cell_budget,
            )
            if cert is not None:
                archive_certificate(cert)
                value = Interval(value.lo, m, value.lo_provenance, "certificate", value.lo_strict, cert)
                break
            m += 1
    return value


@dataclass(frozen=True)
class StepFunction:
    """Upper-bound step function λ ↦ N_λ(K) as ``(λ, count)`` breakpoints.

    The value at λ is the count of the largest breakpoint ≤ λ; counts strictly
    decrease as λ grows and the last breakpoint is (1, 1).
    """

    breakpoints: tuple[tuple[float, int], ...]
    exact: tuple[bool, ...]

    def __post_init__(self):
        lams = [b[0] for b in self.breakpoints]
        counts = [b[1] for b in self.breakpoints]
        if lams != sorted(lams) or any(a <= b for a, b in zip(counts, counts[1:])):
            raise ValueError("breakpoints must be sorted by λ with strictly decreasing counts")
        if not self.breakpoints or self.breakpoints[-1] != (1.0, 1):
            raise ValueError("the count at λ = 1 must be 1")

    def __call__(self, lam: float) -> float:
        best = math.inf
        for b, c in self.breakpoints:
            if b <= lam:
                best = c
        return best

    def to_dict(self) -> dict:
        return {"breakpoints": [list(b) for b in self.breakpoints], "exact": list(self.exact)}


def step_function(body: Body, lam_grid, m_cap: int | None = None, config: RunConfig = DEFAULT, search_enabled: bool = True) -> StepFunction:
    pts = {1.0: (1, True)}
    for lam in sorted(set(float(x) for x in lam_grid)):
        if not 0 < lam < 1:
            raise ValueError("grid values must lie in (0, 1)")
        v = n_lambda(body, lam, m_cap, config, search_enabled)
        if math.isfinite(v.hi):
            pts[lam] = (int(v.hi), v.exact)
    rows = []
    for lam in sorted(pts):
        c, ex = pts[lam]
        if not rows or c < rows[-1][1]:
            rows.append((lam, c, ex))
    return StepFunction(tuple((lam, c) for lam, c, _ in rows), tuple(ex for _, _, ex in rows))
