import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from covdex.bodies import Disk, Segment, affine_image, canonical, cube
from covdex.config import RunConfig
from covdex.index import (
    DistancePair, FmValue, InvariantViolation, coin, f_m, fm_from_gamma, g_m, known_distance,
    lipschitz_pair_check, sandwich_check, wcoin,
)
from covdex.intervals import Interval

FAST = RunConfig(starts=3, tol=1e-2)


def test_f_m_examples():
    f7 = f_m(Disk(1.0), 7, config=FAST, search_enabled=False)
    assert f7.value.lo == f7.value.hi == 14
    f9 = f_m(Disk(1.0), 9, config=FAST, search_enabled=False)
    assert f9.value.hi == pytest.approx(9 / (1 - 1 / (1 + math.sqrt(2))))
    assert f9.value.hi == pytest.approx(15.363, abs=1e-3)
    f4 = f_m(Disk(1.0), 4, config=FAST, search_enabled=False)
    assert f4.value.lo == math.inf and not f4.indeterminate


def test_fm_rules():
    straddle = fm_from_gamma(5, Interval(0.4, 0.6))
    assert straddle.indeterminate and straddle.value.hi == math.inf
    assert straddle.value.lo == pytest.approx(5 / 0.6)
    g = fm_from_gamma(3, Interval(2 / 3, 2 / 3), threshold=1.0)
    assert g.value.hi == pytest.approx(9)
    assert fm_from_gamma(3, Interval(1.0, 1.0), threshold=1.0).value.lo == math.inf


def test_fm_slack_relaxed_threshold():
    fv = fm_from_gamma(6, Interval(0.5, 0.5 * (1 + 1e-6)), 0.5, slack=1e-6)
    assert fv.finite and fv.relaxed


def test_g_m_segment():
    assert g_m(Segment(1.0), 2, config=FAST).value.hi == pytest.approx(4)


@pytest.mark.parametrize("name,kind,lo,hi,m", [
    ("square", "coin", 8, 8, 4),
    ("disk", "coin", 14, 14, 7),
    ("hexagon", "coin", 12, 12, 6),
    ("triangle", "coin", 12, 12, 6),
    ("segment", "coin", 4, 4, 2),
    ("square", "wcoin", 8, 8, 4),
    ("triangle", "wcoin", 9, 9, 3),
    ("hexagon", "wcoin", 9, 9, 3),
])
def test_index_table_values(name, kind, lo, hi, m):
    fn = coin if kind == "coin" else wcoin
    r = fn(canonical(name), config=FAST, search_enabled=False)
    assert r.value.lo == pytest.approx(lo, rel=1e-5)
    assert r.value.hi == pytest.approx(hi, rel=1e-5)
    assert r.witness_m == m


def test_ball3_coin_upper():
    r = coin(canonical("ball3"), config=FAST, search_enabled=False)
    assert r.value.hi <= 41.534 and r.witness_m == 21
    assert r.value.lo >= 16


def test_disk_wcoin():
    r = wcoin(Disk(1.0), config=FAST, search_enabled=False)
    assert r.witness_m == 5
    assert 12.79 <= r.value.hi <= 12.81


def test_witness_realizes_hi():
    for name in ("disk", "square", "hexagon"):
        r = coin(canonical(name), config=FAST, search_enabled=False)
        assert r.value.hi == pytest.approx(r.witness_m / (1 - r.witness_gamma.hi))


def test_index_report_json_shape():
    d = coin(canonical("square"), config=FAST, search_enabled=False).to_dict()
    assert (d["kind"], d["lo"], d["hi"], d["witness_m"]) == ("coin", 8, 8, 4)
    assert [5, "volumetric"] in d["pruned"]


@pytest.mark.parametrize("name", ["disk", "square", "triangle", "hexagon"])
def test_pruning_soundness(name):
    body = canonical(name)
    a = coin(body, config=FAST, search_enabled=False, prune=True)
    b = coin(body, config=FAST, search_enabled=False, prune=False)
    assert (a.value.lo, a.value.hi, a.witness_m) == (b.value.lo, b.value.hi, b.witness_m)


def test_minimization_lemma_sweep():
    # sweeping to twice the first finite value never produces a witness at m ≥ f_l
    body = Disk(1.0)
    first = coin(body, config=FAST, search_enabled=False)
    sweep = coin(body, config=FAST, search_enabled=False, prune=False, sweep_to=int(2 * first.search_ceiling))
    assert sweep.witness_m < first.search_ceiling
    assert sweep.value.hi == first.value.hi


@pytest.mark.parametrize("name", ["disk", "square", "triangle", "hexagon", "segment"])
def test_wcoin_below_coin(name):
    c = coin(canonical(name), config=FAST, search_enabled=False)
    w = wcoin(canonical(name), config=FAST, search_enabled=False)
    assert w.value.lo <= c.value.hi + 1e-9


@pytest.mark.parametrize("name,n", [("disk", 7), ("square", 4), ("ball3", 21)])
def test_sandwich(name, n):
    rep = sandwich_check(canonical(name), config=FAST, search_enabled=False)
    assert rep.holds
    assert rep.details["n_half"]["hi"] == n


def test_sandwich_cubes():
    for d in (2, 3, 4):
        rep = sandwich_check(cube(d), config=FAST, search_enabled=False)
        assert rep.holds
        assert rep.details["n_half"]["hi"] == 2**d
        assert rep.details["coin"]["hi"] == pytest.approx(2 ** (d + 1))


def test_distance_pairs():
    pair = known_distance(canonical("square"), Disk(1.0))
    assert pair.dbm.lo == pytest.approx(math.sqrt(2))
    sheared = affine_image(canonical("square"), [[1.0, 0.5], [0.0, 1.0]])
    assert known_distance(canonical("square"), sheared).dbm.hi == 1.0
    with pytest.raises(ValueError):
        DistancePair(Disk(1.0), Disk(1.0), Interval(0.5, 0.5))


def test_lipschitz_square_disk_m7():
    pair = known_distance(canonical("square"), Disk(1.0))
    rep = lipschitz_pair_check(pair, 7, config=FAST, search_enabled=True)
    assert rep.holds is True


@pytest.mark.parametrize("name,m", [("disk", 7), ("hexagon", 6), ("square", 4), ("disk", 9)])
def test_lipschitz_identity(name, m):
    b = canonical(name)
    assert lipschitz_pair_check(known_distance(b, b), m, config=FAST).holds is True


def test_lipschitz_sheared_square():
    sq = canonical("square")
    sh = affine_image(sq, [[1.0, 0.5], [0.0, 1.0]])
    assert lipschitz_pair_check(known_distance(sq, sh), 4, config=FAST).holds is True


def test_lipschitz_detects_a_false_distance():
    # claiming d_BM(B², C²) = 1 contradicts f_9(B²) ≈ 15.36 > f_9(C²) ≈ 13.5
    bogus = DistancePair(Disk(1.0), canonical("square"), Interval.point(1.0, "trivial"))
    with pytest.raises(InvariantViolation):
        lipschitz_pair_check(bogus, 9, config=FAST, search_enabled=True)


def test_sandwich_raises_on_violation(monkeypatch):
    from covdex import gamma as G

    monkeypatch.setattr(G, "n_lambda", lambda *a, **k: Interval(100, 100))
    with pytest.raises(InvariantViolation):
        sandwich_check(canonical("square"), config=FAST, search_enabled=False)


@settings(max_examples=25, deadline=None)
@given(st.integers(1, 40), st.floats(0.01, 1.0))
def test_fm_value_consistency(m, g):
    fv = fm_from_gamma(m, Interval(g, g))
    if g <= 0.5:
        assert fv.value.hi == pytest.approx(m / (1 - g))
    else:
        assert fv.value.lo == math.inf
    gv = fm_from_gamma(m, Interval(g, g), threshold=1.0)
    assert gv.value.lo <= fv.value.lo


@settings(max_examples=30, deadline=None)
@given(st.integers(2, 30), st.floats(2.0, 60.0))
def test_volumetric_pruning_is_sound(m, T):
    # a pruned m has f_m ≥ m/(1 - m^(-1/2)) ≥ T
    from covdex.index import _volumetric_survivor

    if m < T and not _volumetric_survivor(m, T, 2):
        assert m / (1 - m ** -0.5) >= T * (1 - 1e-12)
