"""Covering-index calculus for direct sums, Minkowski sums, cylinders and difference bodies.

Every N_λ(K_i) is a non-increasing step function of λ, so an infimum of
``∏ N_λ(K_i) / (1 - λ)`` over an interval of λ is attained (or approached)
at the left end of a constant piece. Upper bounds use the upper step
functions at their breakpoints; lower bounds use the lower step functions
evaluated just to the right of theirs, plus the exact point λ = 1/2 where
strict curated bounds matter.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass

from .bodies import Body, DirectSum, Disk, Ball, MinkowskiSum, Segment
from .config import DEFAULT, RunConfig
from .intervals import Interval, robust_ceil
from . import gamma as G


class Tight(str, enum.Enum):
    YES = "Yes"
    NO = "No"
    UNKNOWN = "Unknown"


@dataclass(frozen=True)
class TightlyCoveredFlag:
    status: Tight
    citation: str = ""

    def __post_init__(self):
        if self.status is not Tight.UNKNOWN and not self.citation:
            raise ValueError("Yes/No flags need a citation")

    def __bool__(self) -> bool:
        return self.status is Tight.YES


def tightly_covered(body: Body) -> TightlyCoveredFlag:
    if isinstance(body, Segment):
        return TightlyCoveredFlag(Tight.YES, "ℓ is tightly covered")
    if isinstance(body, DirectSum):
        if all(tightly_covered(p) for p in body.flat_parts()):
            return TightlyCoveredFlag(Tight.YES, "direct sums of tightly covered bodies are tightly covered")
        return TightlyCoveredFlag(Tight.UNKNOWN)
    if isinstance(body, Disk) or (isinstance(body, Ball) and body.dim == 2):
        return TightlyCoveredFlag(Tight.NO, "B² is not tightly covered")
    return TightlyCoveredFlag(Tight.UNKNOWN)


@dataclass(frozen=True)
class SumResult:
    value: Interval
    exact: bool
    witness_lambda: float
    rule: str
    witness_count: int | None = None

    def __post_init__(self):
        if self.exact and not math.isclose(self.value.lo, self.value.hi, rel_tol=1e-5):
            raise ValueError("an exact result needs lo = hi up to the slack")

    def to_dict(self) -> dict:
        return {
            "value": self.value.to_dict(), "exact": self.exact, "witness_lambda": self.witness_lambda,
            "witness_count": self.witness_count, "rule": self.rule,
        }


# ---------------------------------------------------------------------------
# per-part step data


class _Profile:
    """Known γ_m enclosures of one geometric part, as N_λ step-function data."""

    def __init__(self, body: Body, config: RunConfig = DEFAULT, archive: bool = True):
        self.body = body
        self.d = body.dim
        self.segment = isinstance(body, Segment)
        self.gammas: dict[int, Interval] = {}
        if not self.segment:
            span = G._curated_span(body)
            if archive:
                span = max([span] + [c.m for c, _ in G.archived_certificates(body)])
            for m in range(1, span + 1):
                v, _ = G.gamma_bounds(body, m)
                if archive:
                    cert = G.best_archived(body, m, config)
                    if cert is not None:
                        v = G._improve(v, cert, config.slack)
                self.gammas[m] = v

    def hi(self, lam: float) -> float:
        if self.segment:
            return robust_ceil(1.0 / lam)
        if lam >= 1:
            return 1
        for m in sorted(self.gammas):
            if self.gammas[m].hi <= lam:
                return m
        return math.inf

    def lo(self, lam: float, at_point: bool = True) -> int:
        """Lower bound on N_λ; with ``at_point`` false, valid on (λ, λ + ε)."""
        if self.segment:
            return robust_ceil(1.0 / lam)  # right-continuous already
        if lam >= 1:
            return 1
        lo = max(1, robust_ceil(lam ** (-self.d)))
        for m, v in self.gammas.items():
            if v.lo > lam or (at_point and v.lo_strict and v.lo == lam):
                lo = max(lo, m + 1)
        return lo

    def hi_breaks(self) -> list[float]:
        if self.segment:
            return []
        return [v.hi for v in self.gammas.values() if v.hi < 1]

    def lo_breaks(self, lam_min: float) -> list[float]:
        out = [v.lo for v in self.gammas.values() if lam_min <= v.lo < 1]
        if self.segment:
            k = 1
            while 1.0 / k >= lam_min:
                out.append(1.0 / k)
                k += 1
        else:
            m = 1
            while m ** (-1.0 / self.d) >= lam_min:
                out.append(m ** (-1.0 / self.d))
                m += 1
        return out


def _profiles(parts, config, archive=True) -> list[_Profile]:
    flat = []
    for p in parts:
        flat.extend(p.flat_parts() if isinstance(p, DirectSum) else [p])
    for p in flat:
        if isinstance(p, MinkowskiSum):
            raise TypeError("Minkowski sums inside direct sums are not supported")
    return [_Profile(p, config, archive) for p in flat]


def _exact_rule(parts) -> tuple[bool, str]:
    flat = []
    for p in parts:
        flat.extend(p.flat_parts() if isinstance(p, DirectSum) else [p])
    yes = sum(1 for p in flat if tightly_covered(p))
    ok = yes >= len(flat) - 1
    rule = f"{yes} of {len(flat)} parts tightly covered"
    return ok, rule + (": product law is exact" if ok else ": product law gives an upper bound only")


def _prod(xs) -> float:
    out = 1
    for x in xs:
        out *= x
    return out


def direct_sum_n_lambda(parts, lam: float, config: RunConfig = DEFAULT) -> Interval:
    """N_λ of a direct sum: the product of the factors, exact when at most one part is not tightly covered."""
    if not 0 < lam < 1:
        raise ValueError("lambda must lie in (0, 1)")
    profs = _profiles(parts, config)
    exact_rule, _ = _exact_rule(parts)
    hi = _prod(p.hi(lam) for p in profs)
    factor_lo = [p.lo(lam) for p in profs]
    D = sum(p.d for p in profs)
    if exact_rule:
        lo, prov = _prod(factor_lo), "formula"
    else:
        # projection onto a factor and volume
        lo, prov = max(max(factor_lo), robust_ceil(lam ** (-D))), "volumetric"
    hi_prov = "formula" if math.isfinite(hi) else "trivial"
    return Interval(lo, hi, prov, hi_prov)


def direct_sum_gamma(parts, m: int, config: RunConfig = DEFAULT) -> Interval:
    """γ_m of a direct sum as inf{λ : N_λ(sum) ≤ m}."""
    profs = _profiles(parts, config)
    D = sum(p.d for p in profs)
    vol = m ** (-1.0 / D)
    cands = sorted({1.0, 0.5} | {b for p in profs for b in p.hi_breaks()} | {b for p in profs for b in p.lo_breaks(vol)})
    hi = 1.0
    for lam in cands:
        if _prod(p.hi(lam) for p in profs) <= m:
            hi = min(hi, lam)
    exact_rule, _ = _exact_rule(parts)
    if not exact_rule:
        lo = max([vol] + [G.gamma_bounds(p.body, m)[0].lo for p in profs if not p.segment] + [1.0 / m for p in profs if p.segment])
        return Interval(min(lo, hi), hi, "volumetric", "formula")
    lo = hi
    for lam in sorted(b for b in cands if b <= hi):
        # N_λ(sum) ≤ m just right of lam, so the infimum is lam
        if _prod(p.lo(lam, at_point=False) for p in profs) <= m:
            lo = lam
            break
    return Interval(lo, hi, "formula", "formula")


def coin_direct_sum(parts, lam_grid=None, kind: str = "coin", config: RunConfig = DEFAULT, archive: bool = True) -> SumResult:
    """inf over λ (≤ 1/2 for coin, < 1 for wcoin) of ∏ N_λ(K_i)/(1 - λ)."""
    if lam_grid is not None and len(lam_grid) == 0:
        raise ValueError("empty λ grid")
    top = 0.5 if kind == "coin" else 1.0
    profs = _profiles(parts, config, archive)
    D = sum(p.d for p in profs)
    cands = {b for p in profs for b in p.hi_breaks()} | {b for p in profs for b in p.lo_breaks(0.5 ** 6)}
    if kind == "coin":
        cands.add(0.5)
    if lam_grid is not None:
        cands |= {float(x) for x in lam_grid}
    cands = sorted(x for x in cands if 0 < x <= top and x < 1)
    best, best_lam, best_n = math.inf, float("nan"), None
    for lam in cands:
        n = _prod(p.hi(lam) for p in profs)
        val = n / (1 - lam)
        if val < best:
            best, best_lam, best_n = val, lam, int(n)
    exact_rule, rule = _exact_rule(parts)
    if kind == "wcoin":
        # the N_λ product law holds for every λ, so the same infimum over λ < 1 is exact
        rule += " (wcoin: infimum over λ < 1)"
    if exact_rule and math.isfinite(best):
        lo = _sum_lower(profs, best, top)
        prov = "formula"
    else:
        lo = float(2 ** (D + 1)) if kind == "coin" else 0.0
        prov = "formula"
        from .index import coin as _coin, wcoin as _wcoin

        fn = _coin if kind == "coin" else _wcoin
        for p in profs:
            r = fn(p.body, config=config, search_enabled=False)
            lo = max(lo, r.value.lo)
        rule += f"; lower bound max {kind}(K_i)"
    hi = best if math.isfinite(best) else math.inf
    lo = min(lo, hi)
    value = Interval(lo, hi, prov, "formula" if math.isfinite(hi) else "trivial")
    exact = exact_rule and math.isfinite(hi) and math.isclose(lo, hi, rel_tol=1e-9)
    return SumResult(value, exact, best_lam, rule + "; infimum over breakpoints", best_n)


def _sum_lower(profs, hi: float, top: float) -> float:
    """Rigorous inf of ∏N_λ/(1-λ) over (0, top] (or (0, top) when top = 1)."""
    D = sum(p.d for p in profs)
    lam_min = hi ** (-1.0 / D)  # below this the volume bound alone exceeds hi
    breaks = {lam_min} | {b for p in profs for b in p.lo_breaks(lam_min)}
    best = math.inf
    for b in sorted(x for x in breaks if lam_min <= x < top):
        best = min(best, _prod(p.lo(b, at_point=False) for p in profs) / (1 - b))
    if top < 1:
        best = min(best, _prod(p.lo(top, at_point=True) for p in profs) / (1 - top))
    return best


def cylinder_coin(base: Body, config: RunConfig = DEFAULT, search_enabled: bool = False) -> SumResult:
    """coin(K ⊕ ℓ) = 4 N_{1/2}(K)."""
    n = G.n_lambda(base, 0.5, config=config, search_enabled=search_enabled)
    value = Interval(4 * n.lo, 4 * n.hi, n.lo_provenance, n.hi_provenance)
    return SumResult(value, value.exact, 0.5, "cylinder: coin(K⊕ℓ) = 4 N_1/2(K)", int(2 * n.hi) if math.isfinite(n.hi) else None)


def minkowski_upper(parts, config: RunConfig = DEFAULT) -> SumResult:
    """Upper bound inf_{λ≤1/2} ∏N_λ(K_i)/(1-λ) for K_1 + ... + K_n; never claimed exact."""
    parts = list(parts)
    if len({p.dim for p in parts}) != 1:
        raise ValueError("Minkowski summands must share one dimension")
    d = parts[0].dim
    profs = _profiles(parts, config)
    best, best_lam, best_n = math.inf, float("nan"), None
    cands = sorted({0.5} | {b for p in profs for b in p.hi_breaks() + p.lo_breaks(0.5 ** 6) if b <= 0.5})
    for lam in cands:
        n = _prod(p.hi(lam) for p in profs)
        if n / (1 - lam) < best:
            best, best_lam, best_n = n / (1 - lam), lam, int(n)
    value = Interval(float(2 ** (d + 1)), max(best, 2.0 ** (d + 1)), "formula", "formula")
    return SumResult(value, False, best_lam, "Minkowski sum: upper bound only", best_n)


def difference_body_upper(body: Body, config: RunConfig = DEFAULT, search_enabled: bool = False) -> SumResult:
    """coin(K - K) ≤ N_γ(K)²/(1-γ) ≤ m²/(1-γ) for the coin witness (m, γ = γ_m(K))."""
    from .index import coin

    r = coin(body, config=config, search_enabled=search_enabled)
    if r.witness_m is None:
        raise ValueError("no coin witness known for this body")
    g = r.witness_gamma.hi
    n = G.n_lambda(body, g, config=config, search_enabled=False).hi
    n = min(n, r.witness_m)
    tiers = (n * n / (1 - g), r.witness_m ** 2 / (1 - g), r.value.hi ** 2)
    d = body.dim
    value = Interval(float(2 ** (d + 1)), tiers[0], "formula", "formula")
    rule = "difference body: N_γ²/(1-γ) = {:.6g} ≤ m²/(1-γ) = {:.6g} < coin(K)² = {:.6g}".format(*tiers)
    return SumResult(value, False, g, rule, int(n * n))
