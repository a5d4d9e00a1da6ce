"""Search for homothetic covers with a small common ratio.

The homothet ``λ(K - c) + p`` contains ``s`` exactly when ``g(s - p) <= λ``,
where ``g`` is the gauge of ``K - c``. Starting centers come from a smoothed
m-center problem on a sample of K (log-sum-exp over samples of a soft
minimum over centers, annealed under L-BFGS). They are then refined exactly:

* polygons: descent on the uncovered area at a fixed ratio, with the ratio
  bisected downwards;
* disks: sequential quadratic programming on the critical points of the
  nearest-center distance;
* 3-balls: a central ball plus a shell built from an optimized cap covering
  of the sphere.

Found centers become a :class:`CoverCertificate` for the rigorous verifier.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import minimize
from scipy.special import logsumexp, softmax
from scipy.stats import qmc

from .bodies import Ball, Body, Disk, Polygon, Segment, bounding_box, require_geometric
from .cover import DEFAULT_CELL_BUDGET, DEFAULT_SLACK, CoverCertificate, VerifyOutcome, verify_cover
from . import euclid


# ---------------------------------------------------------------------------
# sampling


def sphere_points(n: int, dim: int) -> np.ndarray:
    """Roughly uniform unit vectors (Fibonacci lattice in 3D, equal angles in 2D)."""
    if dim == 2:
        a = 2 * np.pi * (np.arange(n) + 0.5) / n
        return np.column_stack([np.cos(a), np.sin(a)])
    if dim == 3:
        i = np.arange(n) + 0.5
        z = 1 - 2 * i / n
        phi = np.pi * (1 + 5**0.5) * i
        r = np.sqrt(1 - z * z)
        return np.column_stack([r * np.cos(phi), r * np.sin(phi), z])
    x = np.random.default_rng(0).standard_normal((n, dim))
    return x / np.linalg.norm(x, axis=1, keepdims=True)


def body_samples(body: Body, n_boundary: int, n_interior: int, seed: int = 0) -> np.ndarray:
    """Boundary points plus quasi-random interior points of a geometric body."""
    require_geometric(body)
    if isinstance(body, Segment):
        return np.linspace(0.0, body.length, max(n_boundary + n_interior, 2))[:, None]
    if isinstance(body, (Disk, Ball)):
        d = body.dim
        bd = body.radius * sphere_points(n_boundary, d)
    elif isinstance(body, Polygon):
        v = body._v
        e = np.roll(v, -1, axis=0) - v
        lengths = np.linalg.norm(e, axis=1)
        per = np.maximum(2, np.round(n_boundary * lengths / lengths.sum()).astype(int))
        bd = np.concatenate([v[k] + np.linspace(0, 1, per[k], endpoint=False)[:, None] * e[k] for k in range(len(v))])
        d = 2
    else:
        raise TypeError(f"no sampler for {type(body).__name__}")
    lo, hi = bounding_box(body)
    pts = qmc.Halton(d=d, scramble=True, seed=seed).random(max(4 * n_interior, 16))
    pts = lo + (hi - lo) * pts
    inner = pts[body.depth(pts) <= 0][:n_interior]
    extra = [body.center[None, :]]
    if isinstance(body, Polygon):
        v = body._v
        extra += [v, (v + np.roll(v, -1, axis=0)) / 2]
    return np.concatenate([bd, inner, *extra])


# ---------------------------------------------------------------------------
# gauge distance and its smoothed gradient


def gauge_distance(body: Body, S: np.ndarray, P: np.ndarray) -> np.ndarray:
    """Matrix ``G[s, i] = g(S[s] - P[i])``: the least ratio at which homothet i reaches s."""
    Y = S[:, None, :] - P[None, :, :]
    if isinstance(body, (Disk, Ball)):
        return np.linalg.norm(Y, axis=2) / body.radius
    if isinstance(body, Segment):
        return np.abs(Y[..., 0]) / (body.length / 2)
    if isinstance(body, Polygon):
        A = body._gauge_rows
        return np.max(Y @ A.T, axis=2)
    raise TypeError(f"no gauge for {type(body).__name__}")


def _smooth_gauge(body: Body, Y: np.ndarray, T: float):
    """Smoothed gauge values and gradients with respect to ``Y``."""
    if isinstance(body, (Disk, Ball)):
        r = np.sqrt(np.sum(Y * Y, axis=-1) + (1e-3 * T) ** 2)
        return r / body.radius, Y / (r[..., None] * body.radius)
    if isinstance(body, Segment):
        h = body.length / 2
        r = np.sqrt(Y[..., 0] ** 2 + (1e-3 * T) ** 2)
        return r / h, (Y / (r[..., None] * h))
    A = body._gauge_rows
    Z = Y @ A.T / T
    w = softmax(Z, axis=-1)
    return T * logsumexp(Z, axis=-1), w @ A


def _objective(x, body, S, m, T):
    d = S.shape[1]
    P = x.reshape(m, d)
    Y = S[:, None, :] - P[None, :, :]
    u, du = _smooth_gauge(body, Y, T)
    # soft minimum over centers, then soft maximum over samples
    v = -T * logsumexp(-u / T, axis=1)
    F = T * logsumexp(v / T)
    ws = softmax(v / T)
    pi = softmax(-u / T, axis=1)
    coef = ws[:, None] * pi
    grad = -np.einsum("si,sid->id", coef, du)
    return F, grad.ravel()


def coverage_ratio(body: Body, P: np.ndarray, S: np.ndarray) -> float:
    """max over samples of the distance to the nearest center."""
    return float(np.max(np.min(gauge_distance(body, S, P), axis=1)))


def _farthest_first(body: Body, S: np.ndarray, m: int, rng) -> np.ndarray:
    idx = [int(rng.integers(len(S)))]
    dist = gauge_distance(body, S, S[idx]).min(axis=1)
    for _ in range(m - 1):
        j = int(np.argmax(dist + 1e-3 * rng.random(len(S))))
        idx.append(j)
        dist = np.minimum(dist, gauge_distance(body, S, S[[j]])[:, 0])
    return S[idx].copy()


def _anneal(body, S, P, temps, maxiter=200):
    m, d = P.shape
    x = P.ravel()
    for T in temps:
        res = minimize(_objective, x, args=(body, S, m, T), jac=True, method="L-BFGS-B", options={"maxiter": maxiter, "gtol": 1e-12, "ftol": 1e-15})
        x = res.x
    return x.reshape(m, d)


# ---------------------------------------------------------------------------
# polygons: exact uncovered area and its descent


def _shapely_homothets(body: Polygon, P: np.ndarray, lam: float):
    from shapely.geometry import Polygon as ShPolygon

    v = body._v - body.center
    return [ShPolygon(lam * v + p) for p in P]


def _uncovered(body: Polygon, P: np.ndarray, lam: float):
    from shapely import union_all
    from shapely.geometry import Polygon as ShPolygon

    return ShPolygon(body._v).difference(union_all(_shapely_homothets(body, P, lam)))


def polygon_cover_ratio(body: Polygon, P: np.ndarray, lower: float = 0.0, iters: int = 60) -> float:
    """Least ratio at which homothets about ``P`` cover the polygon (floating point bisection)."""
    tiny = 1e-15 * body.area

    def covered(lam):
        return _uncovered(body, P, lam).area <= tiny

    hi = max(lower, 1e-3)
    while not covered(hi):
        hi *= 1.25
        if hi > 64:
            return math.inf
    lo = lower if (0 < lower < hi and not covered(lower)) else 0.0
    for _ in range(iters):
        if hi - lo <= 1e-13 * hi:
            break
        mid = (lo + hi) / 2
        if covered(mid):
            hi = mid
        else:
            lo = mid
    return hi


def _area_and_gradient(body: Polygon, P: np.ndarray, lam: float):
    """Uncovered area of K and its gradient in the homothet positions.

    Translating homothet i by ``dp`` sweeps its edges across the uncovered
    region; to first order the area drops by ``sum_e len_e * n_e . dp`` over
    the edge parts that bound the uncovered region.
    """
    U = _uncovered(body, P, lam)
    area = U.area
    grad = np.zeros_like(P)
    if area <= 0:
        return area, grad
    rings = []
    for poly in getattr(U, "geoms", [U]):
        if poly.geom_type == "Polygon" and not poly.is_empty:
            rings.append(np.asarray(poly.exterior.coords))
            rings.extend(np.asarray(r.coords) for r in poly.interiors)
    if not rings:
        return area, grad
    a = np.concatenate([r[:-1] for r in rings])
    b = np.concatenate([r[1:] for r in rings])
    mid = (a + b) / 2
    length = np.linalg.norm(b - a, axis=1)
    n, off = body.halfplanes
    offsets = lam * (off - n @ body.center)[None, :] + P @ n.T  # edge e of homothet i: n_e.x = offsets[i, e]
    dist = np.abs((mid @ n.T)[:, None, :] - offsets[None, :, :]).reshape(len(mid), -1)
    j = np.argmin(dist, axis=1)
    on_edge = dist[np.arange(len(mid)), j] < 1e-9 * math.sqrt(body.area)
    i, e = np.divmod(j[on_edge], len(off))
    np.add.at(grad, i, -n[e] * length[on_edge, None])
    return area, grad


def area_descent(body: Polygon, P: np.ndarray, lam: float, iters: int = 200, rng=None, kick: float = 0.03) -> tuple[np.ndarray, float]:
    """Normalized gradient descent on the uncovered area at fixed ratio; returns (P, area).

    With ``rng`` a stalled descent is restarted from a random kick of the best
    configuration until the evaluation budget ``iters`` is spent.
    """
    scale = math.sqrt(body.area)
    tiny = 1e-15 * body.area
    area, g = _area_and_gradient(body, P, lam)
    best = (P, area)
    step = 0.02 * scale
    evals = 0
    while evals < iters:
        if area <= tiny:
            return P, 0.0
        gn = float(np.linalg.norm(g))
        stalled = gn == 0
        if not stalled:
            d = -g / gn
            while True:
                Q = P + step * d
                a2, g2 = _area_and_gradient(body, Q, lam)
                evals += 1
                if a2 < area:
                    P, area, g = Q, a2, g2
                    step = min(step * 1.5, 0.1 * scale)
                    break
                step *= 0.5
                if step < 1e-9 * scale:
                    stalled = True
                    break
        if area < best[1]:
            best = (P, area)
        if stalled:
            if rng is None:
                break
            P = best[0] + rng.normal(scale=kick * scale, size=P.shape)
            area, g = _area_and_gradient(body, P, lam)
            evals += 1
            step = 0.02 * scale
    if area <= tiny:
        return P, 0.0
    return best


def _vertex_anchored(body: Polygon, m: int, lam: float, S: np.ndarray, rng) -> np.ndarray | None:
    """Homothets sharing a vertex with K, topped up by farthest-first points."""
    v = body._v
    if len(v) > m:
        return None
    P = (1 - lam) * v + lam * body.center
    if len(P) < m:
        dist = gauge_distance(body, S, P).min(axis=1)
        extra = []
        for _ in range(m - len(P)):
            j = int(np.argmax(dist))
            extra.append(S[j])
            dist = np.minimum(dist, gauge_distance(body, S, S[[j]])[:, 0])
        P = np.vstack([P, extra])
    return P


# ---------------------------------------------------------------------------
# per-body optimizers


@dataclass
class Candidate:
    """Centers ``P`` (reference points of the homothets) and their estimated ratio."""

    centers: np.ndarray
    ratio: float
    exact: bool
    start: int = 0


def _segment_candidate(body: Segment, m: int) -> Candidate:
    L = body.length
    P = ((2 * np.arange(m) + 1) * L / (2 * m))[:, None]
    return Candidate(P, 1.0 / m, True)


def _disk_candidate(body: Body, m: int, rng, S0) -> Candidate:
    P = _farthest_first(body, S0, m, rng)
    P = _anneal(body, S0, P, [0.05, 0.02, 0.01], maxiter=100)
    P, val = euclid.polish_disk(P / body.radius, 1.0)
    return Candidate(P * body.radius, val, True)


def _polygon_start(body: Polygon, m: int, rng, start: int, S0, lam_hint: float) -> np.ndarray:
    if start == 0:
        P = _vertex_anchored(body, m, lam_hint, S0, rng)
        if P is not None:
            return P
    P = _farthest_first(body, S0, m, rng)
    return _anneal(body, S0, P, [0.05, 0.02], maxiter=30)


def _polygon_candidate(body: Polygon, m: int, rng, start: int, S0, lower: float, tol: float) -> Candidate:
    lam_hint = max(lower, m ** -0.5, 0.5 if m >= 4 else 2 / 3)
    P = _polygon_start(body, m, rng, start, S0, lam_hint)
    hi = polygon_cover_ratio(body, P, lower=coverage_ratio(body, P, S0))
    lo = max(lower, m ** -0.5)
    # bisection on the ratio with warm-started area descent
    while hi - lo > tol * hi:
        mid = (lo + hi) / 2
        Q, area = area_descent(body, P, mid, iters=150, rng=rng)
        if area == 0.0:
            P, hi = Q, mid
        else:
            lo = mid
    return Candidate(P, polygon_cover_ratio(body, P, lower=lo), True)


def _ball_candidate(body: Ball, m: int, rng, S0) -> Candidate:
    best = None
    if body.dim == 3 and m >= 5:
        U, theta = euclid.optimize_caps(m - 1, 1, int(rng.integers(2**31)))
        lam = euclid.shell_ratio(theta)
        best = Candidate(euclid.shell_template(U, lam, body.radius), lam, True)
    P = _farthest_first(body, S0, m, rng)
    P = _anneal(body, S0, P, [0.05, 0.02, 0.01, 0.005], maxiter=150)
    X = _local_maxima(body, P, S0, 3 * m, rng, body.radius)
    lam = max(coverage_ratio(body, P, S0), float(_coverage_field(body, P, X).max()))
    if best is None or lam < best.ratio:
        best = Candidate(P, lam, False)
    return best


def _coverage_field(body, P, X):
    return np.min(gauge_distance(body, X, P), axis=1)


def _local_maxima(body: Body, P: np.ndarray, S: np.ndarray, k: int, rng, scale: float, rounds: int = 40) -> np.ndarray:
    """Hill-climb the distance-to-nearest-center field from the ``k`` worst samples."""
    vals = _coverage_field(body, P, S)
    top = np.argsort(vals)[::-1][:k]
    X, fx = S[top].copy(), vals[top]
    r = 0.05 * scale
    J = 24
    d = S.shape[1]
    for _ in range(rounds):
        cand = X[:, None, :] + r * rng.standard_normal((len(X), J, d))
        cand = body.project(cand.reshape(-1, d)).reshape(len(X), J, d)
        fc = _coverage_field(body, P, cand.reshape(-1, d)).reshape(len(X), J)
        j = np.argmax(fc, axis=1)
        better = fc[np.arange(len(X)), j] > fx
        X[better] = cand[better, j[better]]
        fx[better] = fc[better, j[better]]
        r *= 0.85
    return X


def _samples_for(body: Body) -> np.ndarray:
    if isinstance(body, Polygon):
        return body_samples(body, 300, 150, 0)
    if isinstance(body, Ball) and body.dim >= 3:
        return body_samples(body, 1500, 1500, 0)
    return body_samples(body, 300, 200, 0)


def optimize_centers(body: Body, m: int, start: int, seed: int, lower: float = 0.0, tol: float = 1e-4) -> Candidate:
    """One optimizer run; deterministic in ``(seed, m, start)``.

    ``lower`` is a rigorous lower bound on the ratio used to bracket the
    polygon bisection, and ``tol`` its relative width.
    """
    require_geometric(body)
    if m < 1:
        raise ValueError("m must be at least 1")
    rng = np.random.default_rng([seed, m, start])
    if isinstance(body, Segment):
        cand = _segment_candidate(body, m)
    elif m == 1:
        cand = Candidate(body.center[None, :].copy(), 1.0, True)
    elif isinstance(body, Disk) or (isinstance(body, Ball) and body.dim == 2):
        cand = _disk_candidate(body, m, rng, _samples_for(body))
    elif isinstance(body, Polygon):
        cand = _polygon_candidate(body, m, rng, start, _samples_for(body), lower, tol)
    elif isinstance(body, Ball):
        cand = _ball_candidate(body, m, rng, _samples_for(body))
    else:
        raise TypeError(f"no optimizer for {type(body).__name__}")
    cand.start = start
    return cand


# ---------------------------------------------------------------------------
# certification


def make_certificate(body: Body, centers: np.ndarray, ratio: float, label: str = "") -> CoverCertificate:
    """Certificate for homothets ``ratio*(K - c) + p_i``: translations ``p_i - ratio*c``."""
    t = np.asarray(centers) - ratio * body.center
    return CoverCertificate(body, float(ratio), tuple(map(tuple, t)), label)


INFLATIONS = (0.0, 1e-7, 1e-6, 1e-5, 1e-4, 1e-3, 3e-3, 1e-2)


def certify_candidate(
    body: Body,
    cand: Candidate,
    slack: float = DEFAULT_SLACK,
    cell_budget: int = DEFAULT_CELL_BUDGET,
    cap: float | None = None,
    label: str = "",
) -> tuple[CoverCertificate, VerifyOutcome] | None:
    """Verify the candidate at slightly inflated ratios; first Verified wins."""
    for delta in INFLATIONS:
        lam = cand.ratio * (1 + delta)
        if not (0 < lam < 1) or (cap is not None and lam > cap):
            break
        cert = make_certificate(body, cand.centers, lam, label)
        out = verify_cover(cert, slack, cell_budget)
        if out.verified:
            return cert, out
    return None


@dataclass
class SearchResult:
    certificate: CoverCertificate
    outcome: VerifyOutcome
    estimate: float
    starts_used: int

    @property
    def ratio(self) -> float:
        """Rigorous upper bound on the covering ratio (the slack included)."""
        return self.certificate.ratio * (1 + self.outcome.slack)


def minimize_ratio(
    body: Body,
    m: int,
    starts: int = 32,
    seed: int = 42,
    slack: float = DEFAULT_SLACK,
    cell_budget: int = DEFAULT_CELL_BUDGET,
    lower: float = 0.0,
    tol: float = 1e-6,
) -> SearchResult | None:
    """Best certified m-cover found over ``starts`` runs.

    ``tol`` is the relative precision of the polygon ratio bisection; runs
    also stop early once the estimate is within ``tol`` of the rigorous
    ``lower`` bound, since no cover can do better.
    """
    cands = []
    used = 0
    for s in range(max(1, starts)):
        c = optimize_centers(body, m, s, seed, lower=lower, tol=max(tol, 1e-6))
        used += 1
        cands.append(c)
        if c.exact and c.ratio <= lower * (1 + tol):
            break
        if isinstance(body, Segment) or m == 1:
            break
    cands.sort(key=lambda c: (c.ratio, c.start))
    for c in cands[:3]:
        hit = certify_candidate(body, c, slack, cell_budget, label=f"m={m} seed={seed} start={c.start}")
        if hit is not None:
            return SearchResult(hit[0], hit[1], c.ratio, used)
    return None


def _polygon_feasible(body: Polygon, m: int, lam: float, start: int, seed: int) -> Candidate | None:
    rng = np.random.default_rng([seed, m, start])
    S0 = _samples_for(body)
    P = _polygon_start(body, m, rng, start, S0, lam)
    P, area = area_descent(body, P, lam, iters=300, rng=rng)
    if area > 0.0 and start == 0:
        # anchored homothets cannot move without uncovering a vertex; retry unanchored
        P, area = area_descent(body, _polygon_start(body, m, rng, 1, S0, lam), lam, iters=300, rng=rng)
    return Candidate(P, lam, True, start) if area == 0.0 else None


def feasible_cover_search(
    body: Body,
    m: int,
    lam: float,
    starts: int = 32,
    seed: int = 42,
    slack: float = DEFAULT_SLACK,
    cell_budget: int = DEFAULT_CELL_BUDGET,
) -> CoverCertificate | None:
    """A certificate at ratio ``lam`` verified at ``slack``, or None (which proves nothing)."""
    require_geometric(body)
    if not 0 < lam < 1:
        raise ValueError("lam must lie in (0, 1)")
    for s in range(max(1, starts)):
        if isinstance(body, Polygon):
            c = _polygon_feasible(body, m, lam, s, seed)
        else:
            c = optimize_centers(body, m, s, seed)
        if c is not None and c.ratio <= lam * (1 + 0.5 * slack):
            cert = make_certificate(body, c.centers, lam, f"m={m} seed={seed} start={s}")
            if verify_cover(cert, slack, cell_budget).verified:
                return cert
        if isinstance(body, Segment):
            break
    return None
