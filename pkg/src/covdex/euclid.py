"""Exact minimax refinement for covers of Euclidean balls.

For centers ``P`` in the disk of radius r, the largest distance from a point
of the disk to its nearest center is attained at one of finitely many
critical points: Voronoi vertices inside the disk, intersections of
bisectors with the circle, and the circle point opposite a center. Each of
these is a smooth function of the centers involved, so the covering ratio
can be driven down by sequential quadratic programming over the active
critical points.

Covers of the 3-ball use one central homothet and a shell of homothets
whose centers sit on a sphere. The shell problem reduces exactly to
covering the unit sphere by equal caps.
"""
from __future__ import annotations

import itertools
import math

import numpy as np
from scipy.optimize import minimize
from scipy.spatial import ConvexHull
from scipy.special import logsumexp, softmax


# ---------------------------------------------------------------------------
# disk


def _bisector_circle(a, b, r, sgn):
    mid = (a + b) / 2
    u = b - a
    nu = math.hypot(u[0], u[1])
    if nu < 1e-14:
        return None
    v = np.array([-u[1], u[0]]) / nu
    B = 2 * mid @ v
    C = mid @ mid - r * r
    disc = B * B - 4 * C
    if disc < 0:
        return None
    return mid + ((-B + sgn * math.sqrt(disc)) / 2) * v


def _circumcenter(a, b, c):
    A = 2 * np.array([b - a, c - a])
    det = A[0, 0] * A[1, 1] - A[0, 1] * A[1, 0]
    if abs(det) < 1e-14:
        return None
    return np.linalg.solve(A, np.array([b @ b - a @ a, c @ c - a @ a]))


def _feature_point(f, P, r):
    kind, ids, sgn = f
    if kind == "A":
        n = float(np.linalg.norm(P[ids[0]]))
        return -r * P[ids[0]] / n if n > 1e-12 else np.array([r, 0.0])
    if kind == "B":
        return _bisector_circle(P[ids[0]], P[ids[1]], r, sgn)
    return _circumcenter(*P[list(ids)])


def _feature_value(f, P, r):
    x = _feature_point(f, P, r)
    if x is None:
        return np.inf
    return float(np.linalg.norm(x - P[f[1][0]]))


def disk_features(P: np.ndarray, r: float, tol: float = 1e-12) -> list:
    """Critical points of the nearest-center distance that are genuine at ``P``."""
    m = len(P)
    feats = []

    def genuine(x, val, ids):
        d = np.linalg.norm(P - x, axis=1)
        d[list(ids)] = np.inf
        return not np.any(d < val - tol)

    cands = [("A", (i,), 0) for i in range(m)]
    cands += [("B", p, s) for p in itertools.combinations(range(m), 2) for s in (1, -1)]
    cands += [("T", t, 0) for t in itertools.combinations(range(m), 3)]
    for f in cands:
        x = _feature_point(f, P, r)
        if x is None:
            continue
        if f[0] == "T" and x @ x > r * r * (1 + tol):
            continue
        val = float(np.linalg.norm(x - P[f[1][0]]))
        if genuine(x, val, f[1]):
            feats.append(f)
    return feats


def disk_cover_ratio(P: np.ndarray, r: float = 1.0) -> float:
    """Exact least ratio at which disks of radius ratio*r about ``P`` cover the disk."""
    P = np.asarray(P, dtype=float)
    return max(_feature_value(f, P, r) for f in disk_features(P, r)) / r


def polish_disk(P: np.ndarray, r: float = 1.0, iters: int = 80, step: float = 0.05) -> tuple[np.ndarray, float]:
    """Trust-region SQP on the active critical points; returns centers and exact ratio."""
    P = np.asarray(P, dtype=float).copy()
    m = len(P)
    best = disk_cover_ratio(P, r)
    for _ in range(iters):
        fs = disk_features(P, r, 1e-3 * step + 1e-9)
        x0 = np.append(P.ravel(), best * r)

        def cons(x, fs=fs):
            Q = x[:-1].reshape(m, 2)
            return np.array([x[-1] - _feature_value(f, Q, r) for f in fs])

        bounds = [(v - step, v + step) for v in P.ravel()] + [(0, 2 * r)]
        res = minimize(
            lambda x: x[-1], x0, jac=lambda x: np.eye(len(x))[-1], bounds=bounds,
            constraints=[{"type": "ineq", "fun": cons}], method="SLSQP",
            options={"maxiter": 100, "ftol": 1e-15},
        )
        Q = res.x[:-1].reshape(m, 2)
        val = disk_cover_ratio(Q, r)
        if val < best - 1e-13:
            P, best = Q, val
        else:
            step *= 0.5
            if step < 1e-9:
                break
    return P, best


# ---------------------------------------------------------------------------
# sphere caps and the shell template for the 3-ball


def _facets(U):
    F = ConvexHull(U).simplices.copy()
    a, b, c = U[F[:, 0]], U[F[:, 1]], U[F[:, 2]]
    flip = np.einsum("ij,ij->i", np.cross(b - a, c - a), a) < 0
    F[flip] = F[flip][:, [0, 2, 1]]
    return F


def _cap_cos(U, F):
    a, b, c = U[F[:, 0]], U[F[:, 1]], U[F[:, 2]]
    n = np.cross(b - a, c - a)
    n /= np.linalg.norm(n, axis=1, keepdims=True)
    return np.einsum("ij,ij->i", n, a)


def sphere_covering_angle(U: np.ndarray) -> float:
    """Largest angular distance from a sphere point to the nearest of the unit vectors ``U``."""
    U = U / np.linalg.norm(U, axis=1, keepdims=True)
    return float(np.arccos(np.clip(_cap_cos(U, _facets(U)).min(), -1, 1)))


def _smooth_caps(U, S, temps):
    k = len(U)

    def f(x, T):
        V = x.reshape(k, 3)
        n = np.linalg.norm(V, axis=1, keepdims=True)
        W = V / n
        u = 1 - S @ W.T
        v = -T * logsumexp(-u / T, axis=1)
        coef = softmax(v / T)[:, None] * softmax(-u / T, axis=1)
        gW = -(coef.T @ S)
        gV = (gW - np.sum(gW * W, axis=1, keepdims=True) * W) / n
        return T * logsumexp(v / T), gV.ravel()

    x = U.ravel()
    for T in temps:
        x = minimize(f, x, args=(T,), jac=True, method="L-BFGS-B", options={"maxiter": 300}).x
    V = x.reshape(k, 3)
    return V / np.linalg.norm(V, axis=1, keepdims=True)


def _polish_caps(U, iters=80, step=0.05):
    k = len(U)
    best = sphere_covering_angle(U)
    for _ in range(iters):
        F = _facets(U)

        def cons(x, F=F):
            V = x[:-1].reshape(k, 3)
            return _cap_cos(V / np.linalg.norm(V, axis=1, keepdims=True), F) - x[-1]

        x0 = np.append(U.ravel(), _cap_cos(U, F).min())
        bounds = [(v - step, v + step) for v in U.ravel()] + [(-1, 1)]
        res = minimize(
            lambda x: -x[-1], x0, jac=lambda x: -np.eye(len(x))[-1], bounds=bounds,
            constraints=[{"type": "ineq", "fun": cons}], method="SLSQP",
            options={"maxiter": 200, "ftol": 1e-15},
        )
        V = res.x[:-1].reshape(k, 3)
        V /= np.linalg.norm(V, axis=1, keepdims=True)
        a = sphere_covering_angle(V)
        if a < best - 1e-13:
            U, best = V, a
        else:
            step *= 0.5
            if step < 1e-8:
                break
    return U, best


def optimize_caps(k: int, starts: int, seed: int, target: float | None = None) -> tuple[np.ndarray, float]:
    """Directions whose caps of least angular radius cover the sphere (best over starts)."""
    from .search import sphere_points

    S = sphere_points(3000, 3)
    best = (None, np.inf)
    for s in range(starts):
        rng = np.random.default_rng([seed, k, s])
        U = rng.standard_normal((k, 3))
        U /= np.linalg.norm(U, axis=1, keepdims=True)
        U = _smooth_caps(U, S, [0.05, 0.02, 0.01, 0.005, 0.002])
        U, a = _polish_caps(U)
        if a < best[1]:
            best = (U, a)
        if target is not None and best[1] <= target:
            break
    return best


def shell_ratio(theta: float) -> float:
    """Least ratio for which one central ball and a shell of caps of radius ``theta`` cover the unit ball."""
    c2 = 4 * math.cos(theta) ** 2
    if c2 <= 1:
        return 1.0
    return min(1.0, 1.0 / (c2 - 1))


def shell_radius(lam: float) -> float:
    """Shell radius balancing the inner (r = lam) and outer (r = 1) sides of the shell."""
    return math.sqrt(lam * (1 + lam))


def shell_template(dirs: np.ndarray, lam: float, radius: float = 1.0) -> np.ndarray:
    """Centers: the origin plus ``dirs`` scaled to the balanced shell radius."""
    U = dirs / np.linalg.norm(dirs, axis=1, keepdims=True)
    return radius * np.vstack([np.zeros(3), shell_radius(lam) * U])
