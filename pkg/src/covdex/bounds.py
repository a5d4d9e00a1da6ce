"""Closed-form Rogers-type upper bounds on coin, wcoin, C(K) and I(K).

Natural logarithms throughout; ln ln d < 0 for d < e is used as is.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from math import comb


def theta(d: int) -> float:
    """Covering-density bound d(ln d + ln ln d + 5) for d ≥ 2; the line tiles, so θ = 1 for d = 1."""
    _check_d(d, allow_one=True)
    if d == 1:
        return 1.0
    return d * (math.log(d) + math.log(math.log(d)) + 5)


def _check_d(d: int, allow_one: bool = False) -> None:
    if not isinstance(d, int) or d < (1 if allow_one else 2):
        raise ValueError(f"dimension must be an integer ≥ {1 if allow_one else 2}, got {d!r}")
    if d > 30:
        raise ValueError("binomial factors are supported for d ≤ 30")


def _binom_root(d: int) -> float:
    return comb(2 * d, d) ** (1.0 / d)


def wcoin_bound(d: int, lam: float, symmetric: bool) -> float:
    """N_λ(K)/(1-λ) bound: (1+λ)^d/(λ^d(1-λ)) θ or (binom(2d,d)^(1/d) - 1 + λ)^d/(λ^d(1-λ)) θ."""
    _check_d(d, allow_one=True)
    if not 0 < lam < 1:
        raise ValueError("lambda must lie in (0, 1)")
    base = (1 + lam) if symmetric else (_binom_root(d) - 1 + lam)
    return (base / lam) ** d / (1 - lam) * theta(d)


def coin_bound(d: int, symmetric: bool) -> float:
    """coin(K) ≤ 2 N_1/2(K): 3^d (2d)(ln d + ln ln d + 5), or 2^(d+1)(binom(2d,d)^(1/d) - 1/2)^d θ."""
    _check_d(d, allow_one=True)
    if symmetric:
        return 2 * 3**d * theta(d)
    return 2 ** (d + 1) * (_binom_root(d) - 0.5) ** d * theta(d)


def search_ceiling_h(d: int) -> int:
    """⌈2^(d+1)(binom(2d,d)^(1/d) - 1/2)^d d(ln d + ln ln d + 5)⌉."""
    _check_d(d)
    return math.ceil(coin_bound(d, symmetric=False))


@dataclass(frozen=True)
class BoundReport:
    d: int
    symmetric: bool
    lam: float | None
    values: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.d >= 2 and not all(math.isfinite(v) and v > 0 for v in self.values.values()):
            raise ValueError("bound values must be finite and positive")

    def to_dict(self) -> dict:
        return {"d": self.d, "symmetric": self.symmetric, "lambda": self.lam, "values": dict(self.values)}


def legacy_bounds(d: int) -> BoundReport:
    """The classical bounds on C(K) and I(K) together with the coin/wcoin corollaries."""
    _check_d(d)
    th = theta(d)
    b = comb(2 * d, d)
    lam = d / (d + 1)
    values = {
        "covering_parameter_symmetric": math.e * 2**d * (d + 1) * th,
        "covering_parameter_general": math.e * b * (d + 1) * th,
        "illumination_general": b * th,
        "illumination_symmetric": 2**d * th,
        "illumination_lassak": float((d + 1) * d ** (d - 1) - (d - 2) * (d - 1) ** (d - 1)),
        "wcoin_symmetric": 2**d * math.sqrt(math.e) * (d + 1) * th,
        "wcoin_general": math.e * (d + 1) * (_binom_root(d) - 1 + lam) ** d * th,
        "coin_symmetric": coin_bound(d, True),
        "coin_general": coin_bound(d, False),
        "search_ceiling_h": float(search_ceiling_h(d)),
    }
    return BoundReport(d, False, lam, values)


def bound_report(d: int, symmetric: bool = False, lam: float | None = None) -> BoundReport:
    """Everything evaluable at (d, symmetric, λ); λ defaults to d/(d+1)."""
    rep = legacy_bounds(d)
    lam = d / (d + 1) if lam is None else lam
    values = dict(rep.values)
    values["theta"] = theta(d)
    values["wcoin_bound"] = wcoin_bound(d, lam, symmetric)
    values["coin_bound"] = coin_bound(d, symmetric)
    return BoundReport(d, symmetric, lam, values)
