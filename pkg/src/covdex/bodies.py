"""Convex bodies: representations, membership depth, support and affine maps.

Geometric bodies (segment, polygon, disk, ball) answer point queries.
Composite bodies (direct sums, Minkowski sums) are symbolic and are handled
by formula in :mod:`covdex.calculus`.
"""
from __future__ import annotations

import hashlib
import json
import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import Sequence

import numpy as np


class BodyError(ValueError):
    """A body violates one of its construction invariants."""


class NotGeometricError(BodyError):
    """A point query was made on a symbolic (composite) body."""


class DimensionError(BodyError):
    """Point or matrix dimension does not match the body."""


class Body:
    kind: str = ""

    @property
    def dim(self) -> int:
        raise NotImplementedError

    @property
    def geometric(self) -> bool:
        return True

    @property
    def center(self) -> np.ndarray:
        """An interior reference point; homothets are scaled about it."""
        raise NotImplementedError

    def depth(self, points: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def gauge(self, y: np.ndarray) -> np.ndarray:
        """Minkowski gauge of ``K - center`` evaluated at rows of ``y``."""
        raise NotImplementedError

    def support(self, u: np.ndarray) -> float:
        raise NotImplementedError

    def project(self, points: np.ndarray) -> np.ndarray:
        """Nearest point of the body (points already inside are kept)."""
        raise NotImplementedError

    def box_misses(self, c: np.ndarray, half: float) -> np.ndarray:
        """Boxes of half-width ``half`` centred at rows of ``c`` that are disjoint from K."""
        return self.depth(c) > half * math.sqrt(self.dim)

    def box_in_homothet(self, c: np.ndarray, half: float, ratio: float, t: np.ndarray) -> np.ndarray:
        """Boxes whose intersection with K lies in ``ratio*K + t``."""
        raise NotImplementedError

    def to_dict(self) -> dict:
        raise NotImplementedError

    def __str__(self) -> str:
        return json.dumps(self.to_dict())


def _as_points(body: Body, p) -> tuple[np.ndarray, bool]:
    arr = np.asarray(p, dtype=float)
    single = arr.ndim == 1
    if single:
        arr = arr[None, :]
    if arr.ndim != 2 or arr.shape[1] != body.dim:
        raise DimensionError(
            f"point dimension {arr.shape[-1]} does not match body dimension {body.dim}"
        )
    return arr, single


@dataclass(frozen=True)
class Segment(Body):
    """The segment [0, length] on the real line."""

    length: float = 1.0
    kind = "segment"

    def __post_init__(self):
        if not (math.isfinite(self.length) and self.length > 0):
            raise BodyError(f"segment length must be positive, got {self.length}")

    @property
    def dim(self) -> int:
        return 1

    @property
    def center(self) -> np.ndarray:
        return np.array([self.length / 2])

    def depth(self, points):
        x = points[:, 0]
        return np.maximum(-x, x - self.length)

    def gauge(self, y):
        return np.abs(y[:, 0]) / (self.length / 2)

    def support(self, u):
        return max(0.0, float(u[0]) * self.length)

    def project(self, points):
        return np.clip(points, 0.0, self.length)

    @property
    def halfplanes(self):
        return np.array([[-1.0], [1.0]]), np.array([0.0, self.length])

    def box_misses(self, c, half):
        return _halfplane_box_misses(self.halfplanes, c, half)

    def box_in_homothet(self, c, half, ratio, t):
        return _halfplane_box_in_homothet(self.halfplanes, c, half, ratio, t)

    def to_dict(self):
        return {"kind": "segment", "length": self.length}


@dataclass(frozen=True)
class Polygon(Body):
    """Strictly convex polygon with counterclockwise vertices."""

    vertices: tuple[tuple[float, float], ...] = field(default=())
    kind = "polygon"

    def __post_init__(self):
        verts = tuple((float(x), float(y)) for x, y in self.vertices)
        object.__setattr__(self, "vertices", verts)
        if len(verts) < 3:
            raise BodyError("polygon needs at least 3 vertices")
        v = np.array(verts)
        if not np.all(np.isfinite(v)):
            raise BodyError("polygon vertices must be finite")
        e = np.roll(v, -1, axis=0) - v
        cross = e[:, 0] * np.roll(e, -1, axis=0)[:, 1] - e[:, 1] * np.roll(e, -1, axis=0)[:, 0]
        scale = max(float(np.max(np.abs(v))), 1.0) ** 2
        if np.any(cross <= 1e-12 * scale):
            raise BodyError(
                "polygon vertices must form a strictly convex counterclockwise cycle "
                "(a consecutive edge cross product is not positive)"
            )
        # winding number 1: total turning of exactly 2*pi
        ang = np.arctan2(e[:, 1], e[:, 0])
        turn = np.mod(np.diff(np.append(ang, ang[0])), 2 * np.pi)
        if abs(turn.sum() - 2 * np.pi) > 1e-6:
            raise BodyError("polygon vertices wind more than once")

    @property
    def dim(self) -> int:
        return 2

    @cached_property
    def _v(self) -> np.ndarray:
        return np.array(self.vertices)

    @cached_property
    def halfplanes(self) -> tuple[np.ndarray, np.ndarray]:
        """Unit outward normals ``n`` and offsets ``b`` with K = {x : n.x <= b}."""
        v = self._v
        e = np.roll(v, -1, axis=0) - v
        n = np.stack([e[:, 1], -e[:, 0]], axis=1)
        n /= np.linalg.norm(n, axis=1, keepdims=True)
        b = np.einsum("ij,ij->i", n, v)
        return n, b

    @property
    def center(self) -> np.ndarray:
        return self._v.mean(axis=0)

    def depth(self, points):
        n, b = self.halfplanes
        return np.max(points @ n.T - b, axis=1)

    @cached_property
    def _gauge_rows(self) -> np.ndarray:
        n, b = self.halfplanes
        h = b - n @ self.center
        return n / h[:, None]

    def gauge(self, y):
        return np.max(y @ self._gauge_rows.T, axis=1)

    def support(self, u):
        return float(np.max(self._v @ np.asarray(u, dtype=float)))

    def box_misses(self, c, half):
        return _halfplane_box_misses(self.halfplanes, c, half)

    def box_in_homothet(self, c, half, ratio, t):
        return _halfplane_box_in_homothet(self.halfplanes, c, half, ratio, t)

    def project(self, points):
        inside = self.depth(points) <= 0
        out = points.copy()
        if np.all(inside):
            return out
        q = points[~inside]
        v = self._v
        a, b = v, np.roll(v, -1, axis=0)
        ab = b - a
        t = np.einsum("qkj,kj->qk", q[:, None, :] - a[None], ab) / np.einsum("kj,kj->k", ab, ab)
        t = np.clip(t, 0.0, 1.0)
        cand = a[None] + t[..., None] * ab[None]
        d2 = np.sum((cand - q[:, None, :]) ** 2, axis=2)
        out[~inside] = cand[np.arange(len(q)), np.argmin(d2, axis=1)]
        return out

    @property
    def area(self) -> float:
        x, y = self._v[:, 0], self._v[:, 1]
        return 0.5 * float(np.sum(x * np.roll(y, -1) - np.roll(x, -1) * y))

    def to_dict(self):
        return {"kind": "polygon", "vertices": [list(p) for p in self.vertices]}


@dataclass(frozen=True)
class Disk(Body):
    radius: float = 1.0
    kind = "disk"

    def __post_init__(self):
        if not (math.isfinite(self.radius) and self.radius > 0):
            raise BodyError(f"disk radius must be positive, got {self.radius}")

    @property
    def dim(self) -> int:
        return 2

    @property
    def center(self):
        return np.zeros(2)

    def depth(self, points):
        return np.linalg.norm(points, axis=1) - self.radius

    def gauge(self, y):
        return np.linalg.norm(y, axis=1) / self.radius

    def support(self, u):
        return self.radius * float(np.linalg.norm(u))

    def project(self, points):
        r = np.linalg.norm(points, axis=1, keepdims=True)
        return np.where(r > self.radius, points * (self.radius / np.maximum(r, 1e-300)), points)

    def box_misses(self, c, half):
        near = np.maximum(np.abs(c) - half, 0.0)
        return np.linalg.norm(near, axis=1) > self.radius

    def box_in_homothet(self, c, half, ratio, t):
        far = np.abs(c - t) + half
        return np.linalg.norm(far, axis=1) <= ratio * self.radius

    def to_dict(self):
        return {"kind": "disk", "radius": self.radius}


@dataclass(frozen=True)
class Ball(Body):
    dimension: int = 3
    radius: float = 1.0
    kind = "ball"

    def __post_init__(self):
        if int(self.dimension) != self.dimension or self.dimension < 2:
            raise BodyError(f"ball dimension must be an integer >= 2, got {self.dimension}")
        if not (math.isfinite(self.radius) and self.radius > 0):
            raise BodyError(f"ball radius must be positive, got {self.radius}")

    @property
    def dim(self) -> int:
        return int(self.dimension)

    @property
    def center(self):
        return np.zeros(self.dim)

    depth = Disk.depth
    gauge = Disk.gauge
    support = Disk.support
    project = Disk.project
    box_misses = Disk.box_misses
    box_in_homothet = Disk.box_in_homothet

    def to_dict(self):
        return {"kind": "ball", "dim": self.dim, "radius": self.radius}


@dataclass(frozen=True)
class DirectSum(Body):
    """K_1 + ... + K_n placed in complementary coordinate subspaces."""

    parts: tuple[Body, ...] = ()
    kind = "direct_sum"

    def __post_init__(self):
        object.__setattr__(self, "parts", tuple(self.parts))
        if not self.parts:
            raise BodyError("direct sum needs at least one part")

    @property
    def dim(self) -> int:
        return sum(p.dim for p in self.parts)

    @property
    def geometric(self) -> bool:
        return False

    def flat_parts(self) -> list[Body]:
        out: list[Body] = []
        for p in self.parts:
            out.extend(p.flat_parts() if isinstance(p, DirectSum) else [p])
        return out

    def to_dict(self):
        return {"kind": "direct_sum", "parts": [p.to_dict() for p in self.parts]}


@dataclass(frozen=True)
class MinkowskiSum(Body):
    parts: tuple[Body, ...] = ()
    kind = "minkowski_sum"

    def __post_init__(self):
        object.__setattr__(self, "parts", tuple(self.parts))
        if not self.parts:
            raise BodyError("Minkowski sum needs at least one part")
        dims = {p.dim for p in self.parts}
        if len(dims) != 1:
            raise DimensionError(f"Minkowski sum parts must share one dimension, got {sorted(dims)}")

    @property
    def dim(self) -> int:
        return self.parts[0].dim

    @property
    def geometric(self) -> bool:
        return False

    def flat_parts(self) -> list[Body]:
        out: list[Body] = []
        for p in self.parts:
            out.extend(p.flat_parts() if isinstance(p, MinkowskiSum) else [p])
        return out

    def to_dict(self):
        return {"kind": "minkowski_sum", "parts": [p.to_dict() for p in self.parts]}


def _halfplane_box_misses(hp, c, half):
    n, b = hp
    lower = c @ n.T - half * np.abs(n).sum(axis=1)
    return np.any(lower > b, axis=1)


def _halfplane_box_in_homothet(hp, c, half, ratio, t):
    # constraint e holds on box ∩ K if the homothet's half-plane contains K's,
    # otherwise it must hold at every box corner
    n, b = hp
    b_h = ratio * b + n @ np.asarray(t, dtype=float)
    implied = b_h >= b
    upper = c @ n.T + half * np.abs(n).sum(axis=1)
    return np.all((upper <= b_h) | implied, axis=1)


# ---------------------------------------------------------------------------
# module-level operations


def require_geometric(body: Body) -> None:
    if not body.geometric:
        raise NotGeometricError(f"{body.kind} body is not geometric; use the calculus module")


def depth(body: Body, p) -> np.ndarray | float:
    """Signed distance-like depth: negative inside, zero on the boundary, 1-Lipschitz."""
    require_geometric(body)
    pts, single = _as_points(body, p)
    d = body.depth(pts)
    return float(d[0]) if single else d


def support(body: Body, u) -> float:
    require_geometric(body)
    u = np.asarray(u, dtype=float)
    if u.shape != (body.dim,):
        raise DimensionError(f"direction dimension {u.shape} does not match body dimension {body.dim}")
    return body.support(u)


def volume_fraction_exponent(body: Body) -> int:
    """Ambient dimension d, so that vol(lambda K) / vol(K) = lambda**d."""
    return body.dim


def bounding_box(body: Body) -> tuple[np.ndarray, np.ndarray]:
    require_geometric(body)
    eye = np.eye(body.dim)
    hi = np.array([body.support(e) for e in eye])
    lo = np.array([-body.support(-e) for e in eye])
    return lo, hi


def affine_image(body: Body, A, b=None) -> Body:
    """Image of a polygon or segment under x -> A x + b."""
    A = np.atleast_2d(np.asarray(A, dtype=float))
    if A.shape != (body.dim, body.dim):
        raise DimensionError(f"matrix shape {A.shape} does not match body dimension {body.dim}")
    det = float(np.linalg.det(A))
    if abs(det) < 1e-12:
        raise BodyError("affine map is singular")
    b = np.zeros(body.dim) if b is None else np.asarray(b, dtype=float).reshape(body.dim)
    if isinstance(body, Segment):
        # a segment carries no position; only its length changes
        return Segment(body.length * abs(det))
    if isinstance(body, Polygon):
        v = body._v @ A.T + b
        if det < 0:
            v = v[::-1]
        return Polygon(tuple(map(tuple, v)))
    raise BodyError(f"affine_image supports polygons and segments, not {body.kind}")


# ---------------------------------------------------------------------------
# JSON and canonical bodies


def body_from_dict(d: dict) -> Body:
    if not isinstance(d, dict) or "kind" not in d:
        raise BodyError("body JSON must be an object with a 'kind' field")
    kind = d["kind"]
    try:
        if kind == "segment":
            return Segment(float(d["length"]))
        if kind == "polygon":
            return Polygon(tuple(tuple(map(float, p)) for p in d["vertices"]))
        if kind == "disk":
            return Disk(float(d["radius"]))
        if kind == "ball":
            return Ball(int(d["dim"]), float(d["radius"]))
        if kind == "direct_sum":
            return DirectSum(tuple(body_from_dict(p) for p in d["parts"]))
        if kind == "minkowski_sum":
            return MinkowskiSum(tuple(body_from_dict(p) for p in d["parts"]))
    except KeyError as exc:
        raise BodyError(f"{kind} body is missing field {exc}") from None
    except (TypeError, ValueError) as exc:
        if isinstance(exc, BodyError):
            raise
        raise BodyError(f"malformed {kind} body: {exc}") from None
    raise BodyError(f"unknown body kind {kind!r}")


def regular_polygon(n: int, radius: float = 1.0) -> Polygon:
    k = np.arange(n)
    return Polygon(tuple((radius * math.cos(2 * math.pi * i / n), radius * math.sin(2 * math.pi * i / n)) for i in k))


SQUARE = Polygon(((0.0, 0.0), (1.0, 0.0), (1.0, 1.0), (0.0, 1.0)))
TRIANGLE = Polygon(((0.0, 0.0), (1.0, 0.0), (0.0, 1.0)))
HEXAGON = regular_polygon(6)


def cube(d: int) -> Body:
    if d == 1:
        return Segment(1.0)
    return DirectSum(tuple(Segment(1.0) for _ in range(d)))


def canonical(name: str) -> Body:
    """Named bodies: disk, ball3, square, triangle, hexagon, segment, cube1..cube6."""
    name = name.lstrip("@").lower()
    table = {
        "disk": Disk(1.0),
        "ball3": Ball(3, 1.0),
        "square": SQUARE,
        "triangle": TRIANGLE,
        "hexagon": HEXAGON,
        "segment": Segment(1.0),
    }
    if name in table:
        return table[name]
    if name.startswith("cube") and name[4:].isdigit() and 1 <= int(name[4:]) <= 6:
        return cube(int(name[4:]))
    raise BodyError(f"unknown canonical body {name!r}")


def affinely_equivalent(p: Polygon, q: Polygon, tol: float = 1e-9) -> bool:
    """True when some affine map sends polygon ``p`` onto polygon ``q``."""
    if len(p.vertices) != len(q.vertices):
        return False
    P, Q = p._v, q._v
    n = len(P)
    src = np.column_stack([P[:3], np.ones(3)])
    scale = max(1.0, float(np.max(np.abs(Q))))
    for shift in range(n):
        tgt = np.roll(Q, -shift, axis=0)
        M = np.linalg.solve(src, tgt[:3])  # rows: affine map on homogeneous coords
        img = np.column_stack([P, np.ones(n)]) @ M
        if np.max(np.abs(img - tgt)) <= tol * scale:
            return True
    return False


_NAMED_POLYGONS = (("triangle", TRIANGLE), ("square", SQUARE), ("hexagon", HEXAGON))


def affine_class(body: Body) -> str | None:
    """Name of the canonical affine class of ``body`` if it has one."""
    if isinstance(body, (Disk,)) or (isinstance(body, Ball) and body.dim == 2):
        return "disk"
    if isinstance(body, Ball):
        return f"ball{body.dim}"
    if isinstance(body, Segment):
        return "segment"
    if isinstance(body, Polygon):
        for name, ref in _NAMED_POLYGONS:
            if affinely_equivalent(ref, body):
                return name
    return None


def normalized_dict(body: Body) -> dict:
    """JSON form with scale removed from round bodies and polygons rotated to a fixed start."""
    if isinstance(body, Segment):
        return {"kind": "segment", "length": 1.0}
    if isinstance(body, Disk) or (isinstance(body, Ball) and body.dim == 2):
        return {"kind": "disk", "radius": 1.0}
    if isinstance(body, Ball):
        return {"kind": "ball", "dim": body.dim, "radius": 1.0}
    if isinstance(body, Polygon):
        v = list(body.vertices)
        k = v.index(min(v))
        return {"kind": "polygon", "vertices": [list(p) for p in v[k:] + v[:k]]}
    if isinstance(body, (DirectSum, MinkowskiSum)):
        parts = body.flat_parts()
        return {"kind": body.kind, "parts": [normalized_dict(p) for p in parts]}
    return body.to_dict()


def body_key(body: Body) -> str:
    """Canonical identifier; affine images of the named polygons share their class key."""
    cls = affine_class(body)
    if cls is not None:
        return cls
    blob = json.dumps(normalized_dict(body), sort_keys=True, separators=(",", ":"))
    return "h" + hashlib.sha256(blob.encode()).hexdigest()[:16]


def is_o_symmetric(body: Body) -> bool:
    if isinstance(body, (Disk, Ball, Segment)):
        return True
    if isinstance(body, Polygon):
        v = body._v - body.center
        if len(v) % 2:
            return False
        h = len(v) // 2
        return bool(np.allclose(v[:h], -v[h:], atol=1e-9))
    if isinstance(body, DirectSum):
        return all(is_o_symmetric(p) for p in body.flat_parts())
    if isinstance(body, MinkowskiSum):
        return all(is_o_symmetric(p) for p in body.flat_parts())
    return False


def random_polygon(rng: np.random.Generator, n_points: int = 12) -> Polygon:
    """Convex hull of uniform points in the unit square (at least a triangle)."""
    from scipy.spatial import ConvexHull

    while True:
        pts = rng.random((n_points, 2))
        hull = ConvexHull(pts)
        v = pts[hull.vertices]  # counterclockwise for 2-D hulls
        try:
            return Polygon(tuple(map(tuple, v)))
        except BodyError:
            continue


def sample_body(body: Body, n: int, rng: np.random.Generator) -> np.ndarray:
    """Uniform points of a geometric body by rejection from its bounding box."""
    require_geometric(body)
    lo, hi = bounding_box(body)
    out = []
    have = 0
    while have < n:
        pts = lo + (hi - lo) * rng.random((2 * n + 16, body.dim))
        pts = pts[body.depth(pts) <= 0]
        out.append(pts)
        have += len(pts)
    return np.concatenate(out)[:n]


def as_body(spec: Body | str | dict | Sequence) -> Body:
    if isinstance(spec, Body):
        return spec
    if isinstance(spec, str):
        return canonical(spec)
    if isinstance(spec, dict):
        return body_from_dict(spec)
    raise BodyError(f"cannot interpret {spec!r} as a body")
