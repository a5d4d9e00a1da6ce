"""End-to-end acceptance criteria 1 to 11.

Each test records one ``ACCEPTANCE <n> PASS|FAIL`` line and then asserts; the
lines are repeated in the terminal summary (see conftest.py).
"""
import math
import time

import numpy as np
import pytest

from covdex import bounds as B
from covdex.bodies import Ball, Disk, Segment, canonical, random_polygon
from covdex.calculus import direct_sum_n_lambda
from covdex.config import RunConfig
from covdex.cover import CoverCertificate, verify_cover
from covdex.gamma import best_archived, gamma_estimate
from covdex.index import coin, known_distance, lipschitz_pair_check, sandwich_check
from covdex.search import feasible_cover_search, minimize_ratio
from covdex.tables import table

LINES = []


def report(n: int, ok: bool, detail: str) -> None:
    line = f"ACCEPTANCE {n:>2} {'PASS' if ok else 'FAIL'}  {detail}"
    LINES.append(line)
    print(line)


def _rows(which):
    return {r.body: r for r in table(which, RunConfig(starts=3, tol=1e-2))}


# 1 -----------------------------------------------------------------------


def test_criterion_01_table_one():
    t = time.perf_counter()
    rows = _rows(1)
    want = {"ℓ": 4, "H": 12, "Δ²": 12, "B²": 14, "C² (square)": 8, "H⊕ℓ": 24, "Δ²⊕ℓ": 24, "B²⊕ℓ": 28}
    want.update({f"C^{d}": 2 ** (d + 1) for d in range(2, 6)})
    got = {k: (rows[k].value.lo, rows[k].value.hi) for k in want}
    # C^1 is the segment itself
    got["C^1"] = (rows["ℓ"].value.lo, rows["ℓ"].value.hi)
    want["C^1"] = 4
    bad = {k: got[k] for k in want if got[k] != (want[k], want[k])}
    dt = time.perf_counter() - t
    ok = not bad and dt < 60
    report(1, ok, f"{len(want)} exact rows, mismatches={bad}, {dt:.1f}s")
    assert ok


# 2 -----------------------------------------------------------------------


def _near(iv, x, tol=1e-2):
    return abs(iv.lo - x) <= tol and abs(iv.hi - x) <= tol


def test_criterion_02_table_two():
    rows = _rows(2)
    checks = {
        "ℓ": _near(rows["ℓ"].value, 4),
        "H": _near(rows["H"].value, 9),
        "Δ²": _near(rows["Δ²"].value, 9),
        # the truncated γ_5(B²) ∈ [0.609, 0.610] pins hi only; lo is 12.788
        "B²": 12.79 <= rows["B²"].value.hi <= 12.81 and rows["B²"].value.lo <= 12.81,
        "B² m": rows["B²"].m == 5,
        "H⊕ℓ": rows["H⊕ℓ"].value.hi <= 18 + 1e-2,
        "Δ²⊕ℓ": rows["Δ²⊕ℓ"].value.hi <= 18 + 1e-2,
        "B²⊕ℓ": rows["B²⊕ℓ"].value.hi <= 25.61,
    }
    for d in range(2, 4):
        r = rows[f"C^{d}"]
        checks[f"C^{d}"] = _near(r.value, 2 ** (d + 1))
    checks["square"] = _near(rows["C² (square)"].value, 8)
    for d in range(2, 7):
        r = rows[f"Δ^{d}"]
        checks[f"Δ^{d}"] = r.value.hi <= (d + 1) ** 2 + 1e-9 and r.m == d + 1
    bad = [k for k, v in checks.items() if not v]
    report(2, not bad, f"{len(checks)} checks, failing={bad}, B² wcoin={rows['B²'].value}")
    assert not bad


# 3 -----------------------------------------------------------------------

DISK_PAPER = {3: 0.8660, 4: 0.7071, 5: 0.609, 6: 0.555, 7: 0.5, 8: 0.445, 9: 0.41421}


def test_criterion_03_disk_optimizer():
    t = time.perf_counter()
    disk = Disk(1.0)
    cfg = RunConfig(starts=16, tol=1e-2)
    bad = []
    for m, g in DISK_PAPER.items():
        est = gamma_estimate(disk, m, 1e-2, config=cfg, search_enabled=False)
        # a fresh search, independent of the shipped archive
        res = minimize_ratio(disk, m, starts=16, seed=7, slack=1e-6)
        shipped = best_archived(disk, m, cfg)
        fresh_ok = res is not None and res.ratio <= g + 0.01 and verify_cover(res.certificate, 1e-6).verified
        shipped_ok = shipped is not None and shipped.ratio <= g + 0.01 and verify_cover(shipped, 1e-6).verified
        if not (est.hi <= g + 0.01 and fresh_ok and shipped_ok):
            bad.append((m, est.hi, None if res is None else res.ratio))
    dt = time.perf_counter() - t
    ok = not bad and dt < 600
    report(3, ok, f"m=3..9 certified within 0.01, failures={bad}, {dt:.1f}s")
    assert ok


# 4 -----------------------------------------------------------------------


def test_criterion_04_ball_21_cover():
    t = time.perf_counter()
    ball = Ball(3, 1.0)
    lam = 0.49439 * (1 + 1e-3)
    cert = feasible_cover_search(ball, 21, lam, starts=4, seed=42, slack=1e-6)
    verified = cert is not None and verify_cover(cert, 1e-6).verified
    r = coin(ball, config=RunConfig(starts=3, tol=1e-2), search_enabled=False)
    dt = time.perf_counter() - t
    ok = verified and r.value.hi <= 41.58 and r.witness_m == 21 and dt < 1800
    report(4, ok, f"21-cover at λ={lam:.6f} verified={verified}, coin(B³).hi={r.value.hi:.4f}, {dt:.1f}s")
    assert ok


# 5 -----------------------------------------------------------------------


def test_criterion_05_sandwich():
    cfg = RunConfig(starts=3, tol=1e-2)
    names = ["disk", "square", "triangle", "hexagon", "ball3"]
    held = {n: sandwich_check(canonical(n), config=cfg, search_enabled=False).holds for n in names}
    bad = [n for n, h in held.items() if not h]
    report(5, not bad, f"violations={bad}")
    assert not bad


# 6, 7 --------------------------------------------------------------------


@pytest.fixture(scope="module")
def polygon_coins():
    rng = np.random.default_rng(2024)
    cfg = RunConfig(starts=3, tol=2e-2)
    t = time.perf_counter()
    out = [coin(random_polygon(rng), config=cfg) for _ in range(100)]
    return out, time.perf_counter() - t


def test_criterion_06_minimizer(polygon_coins):
    res, dt = polygon_coins
    bad = [i for i, r in enumerate(res) if r.value.lo < 8]
    ok = not bad and dt < 1200
    report(6, ok, f"100 polygons, coin.lo < 8 at {bad}, {dt:.0f}s")
    assert ok


def test_criterion_07_maximizer(polygon_coins):
    res, _ = polygon_coins
    bad = [(i, r.value.hi) for i, r in enumerate(res) if not r.value.hi <= 14 * (1 + 1e-3)]
    worst = max(r.value.hi for r in res)
    report(7, not bad, f"100 polygons, worst coin.hi={worst:.4f}, violations={bad}")
    assert not bad


# 8 -----------------------------------------------------------------------


def _grid_cover(lam, k):
    xs = [0.0] if k == 1 else [i * (1 - lam) / (k - 1) for i in range(k)]
    return CoverCertificate(canonical("square"), lam, tuple((x, y) for x in xs for y in xs))


def test_criterion_08_product_law():
    ell2 = [Segment(1.0), Segment(1.0)]
    bad = []
    for lam in (0.5, 0.45, 0.34, 0.26):
        k = math.ceil(1 / lam)
        n = direct_sum_n_lambda(ell2, lam)
        exact = n.lo == n.hi == k * k
        covered = verify_cover(_grid_cover(lam, k), 1e-6).verified
        # k² points pairwise more than λ apart in the sup norm: one per homothet
        xs = [i / (k - 1) for i in range(k)]
        pts = np.array([(x, y) for x in xs for y in xs])
        gaps = np.abs(pts[:, None, :] - pts[None, :, :]).max(axis=2)
        sep = gaps[~np.eye(len(pts), dtype=bool)].min() > lam
        vol = math.ceil(lam**-2 - 1e-12) > k * k - 1  # volumetric refutation, where it bites
        if not (exact and covered and sep and len(pts) == k * k):
            bad.append(lam)
        print(f"  λ={lam}: N={n}, grid cover verified={covered}, separated={sep}, volumetric refutes {k * k - 1}: {vol}")
    report(8, not bad, f"N_λ(ℓ⊕ℓ)=⌈1/λ⌉² with certificates and refutations, failures={bad}")
    assert not bad


# 9 -----------------------------------------------------------------------


def test_criterion_09_pruning_equivalence():
    cfg = RunConfig(starts=3, tol=1e-2)
    bad = []
    for name in ("disk", "square", "triangle", "hexagon"):
        a = coin(canonical(name), config=cfg, prune=True, search_enabled=False)
        b = coin(canonical(name), config=cfg, prune=False, search_enabled=False)
        if (a.value.lo, a.value.hi) != (b.value.lo, b.value.hi):
            bad.append((name, a.value, b.value))
    report(9, not bad, f"pruned == unpruned on B², C², Δ², H, differences={bad}")
    assert not bad


# 10 ----------------------------------------------------------------------

LEGACY_D2 = {  # independent 30-digit substitution, frozen
    "illumination_symmetric": 42.613074079826247859,
    "illumination_general": 63.919611119739371789,
    "wcoin_symmetric": 210.77124493598947601,
    "covering_parameter_symmetric": 347.50303477791251872,
    "illumination_lassak": 6.0,
    "coin_general": 323.90285026383987906,
}


def test_criterion_10_bound_domination():
    exact = {1: [4.0], 2: [8.0, 12.0, 14.0], 3: [16.0]}
    bad = [(d, v) for d, vs in exact.items() for v in vs for s in (True, False) if B.coin_bound(d, s) < v]
    vals = B.legacy_bounds(2).values
    bad += [k for k, v in LEGACY_D2.items() if not math.isclose(vals[k], v, rel_tol=1e-12)]
    report(10, not bad, f"coin_bound dominates d=1..3, legacy d=2 matches oracle, failures={bad}")
    assert not bad


# 11 ----------------------------------------------------------------------


def test_criterion_11_lipschitz():
    cfg = RunConfig(starts=3, tol=1e-2)
    sq, dk = canonical("square"), Disk(1.0)
    pair = known_distance(sq, dk)
    results = {"C²,B² m=7": lipschitz_pair_check(pair, 7, config=cfg, search_enabled=True).holds}
    for name, m in (("square", 4), ("disk", 7), ("hexagon", 6), ("triangle", 6)):
        b = canonical(name)
        results[f"{name}={name} m={m}"] = lipschitz_pair_check(known_distance(b, b), m, config=cfg).holds
    bad = [k for k, v in results.items() if v is not True]
    report(11, not bad, f"dbm={pair.dbm}, not holding={bad}")
    assert not bad
