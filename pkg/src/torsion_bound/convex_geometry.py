"""Convex bodies in R^n with the oracles the samplers consume.

Representations: Ball, axis-aligned Ellipsoid, Box, H-polytope, and
Intersection.  Each body answers membership, a certified distance to the
boundary (exact for ball/box/polytope, a safe lower bound for ellipsoids
and intersections — safe means the inscribed sphere used by the
walk-on-spheres step always stays inside the body), bounding box, volume
(exact where a closed form exists, rejection Monte Carlo otherwise), and
surface-measure boundary sampling with per-point importance weights.

All sampling is keyed by (seed, candidate index), so sample lists are
bit-reproducible and independent of batch sizes.

JSON schema (round-trips losslessly):

    {"dimension": n, "shape": {"type": "ball", "center": [...], "radius": r}}
    {"type": "ellipsoid", "center": [...], "semi_axes": [...]}
    {"type": "box", "lower": [...], "upper": [...]}
    {"type": "polytope", "half_spaces": [{"normal": [...], "offset": c}, ...]}
    {"type": "intersection", "members": [<shape>, ...]}

Half-space normals must be unit vectors; the body is {x : a_i . x <= c_i}.
A stand-alone polytope must be bounded (validated by linear programs in
all +-coordinate directions); unbounded half-space collections are only
accepted as members of a bounded intersection.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property

import numpy as np
from scipy.linalg import null_space
from scipy.optimize import linprog, minimize

from . import rng
from .analytic_library import ball_surface_area, ball_volume, unit_sphere_area
from .estimates import Estimate, WosConfig

_TOL = 1e-12
_UNIT_TOL = 1e-12
# operation tags for stream derivation
_OP_BOUNDARY = 101
_OP_VOLUME = 102
_OP_AREA = 103
_OP_INTERIOR = 104
_PILOT_KEY = 0x5EED0F11  # fixed internal key for mixture pilots
_BATCH = 8192


@dataclass(frozen=True)
class BoundaryPoint:
    """A boundary sample: position, inward unit normal, importance weight.

    Weights are d(sigma)/d(sampling law); they are constant for uniformly
    sampled shapes and vary on ellipsoids and intersections.
    """

    position: np.ndarray
    inward_normal: np.ndarray
    weight: float = 1.0


class ConvexBody:
    """Base class; concrete bodies implement the array-valued oracles."""

    dimension: int

    # -- membership and distance ------------------------------------------

    def contains_many(self, points: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def distances_many(self, points: np.ndarray) -> np.ndarray:
        """Distance to the boundary for interior points (certified lower
        bound, exact where the class docstring says so)."""
        raise NotImplementedError

    # -- derived geometry ---------------------------------------------------

    def bounding_box(self) -> tuple[np.ndarray, np.ndarray]:
        raise NotImplementedError

    def volume_exact(self) -> float | None:
        return None

    def surface_area_exact(self) -> float | None:
        return None

    def inradius(self) -> float:
        raise NotImplementedError

    def interior_point(self) -> np.ndarray:
        raise NotImplementedError

    @cached_property
    def diameter(self) -> float:
        """Upper bound on the diameter (exact for ball/ellipsoid/box)."""
        lo, hi = self.bounding_box()
        return float(np.linalg.norm(hi - lo))

    # -- boundary sampling ---------------------------------------------------

    def _boundary_batch(self, key: int, ids: np.ndarray):
        """One boundary candidate per id: (positions, normals, weights, ok).

        ok marks candidates that actually lie on this body's boundary
        (always true except for intersections, which reject member-boundary
        points falling outside the other members).
        """
        raise NotImplementedError

    def boundary_arrays(self, count: int, key: int):
        """Exactly ``count`` accepted boundary samples (pos, normal, weight),
        consuming candidate ids in order so the result is batch-invariant."""
        if count < 1:
            raise ValueError("count must be >= 1")
        pos_parts, nrm_parts, wgt_parts = [], [], []
        collected = 0
        next_id = 0
        while collected < count:
            if next_id > 100_000_000:
                raise RuntimeError("boundary sampling starved (acceptance ~ 0)")
            ids = np.arange(next_id, next_id + _BATCH, dtype=np.uint64)
            next_id += _BATCH
            pos, nrm, wgt, ok = self._boundary_batch(key, ids)
            if not ok.all():
                pos, nrm, wgt = pos[ok], nrm[ok], wgt[ok]
            pos_parts.append(pos)
            nrm_parts.append(nrm)
            wgt_parts.append(wgt)
            collected += len(pos)
        pos = np.concatenate(pos_parts)[:count]
        nrm = np.concatenate(nrm_parts)[:count]
        wgt = np.concatenate(wgt_parts)[:count]
        return pos, nrm, wgt

    # -- serialization ---------------------------------------------------

    def shape_json(self) -> dict:
        raise NotImplementedError

    def __repr__(self):
        return f"{type(self).__name__}(n={self.dimension})"


def _as_vector(x, n: int, name: str = "point") -> np.ndarray:
    v = np.asarray(x, dtype=float)
    if v.shape != (n,):
        raise ValueError(f"{name} must have dimension {n}, got shape {v.shape}")
    return v


class Ball(ConvexBody):
    def __init__(self, center, radius: float):
        center = np.asarray(center, dtype=float)
        if center.ndim != 1 or center.size < 2:
            raise ValueError("ball center must be a vector of dimension >= 2")
        if radius <= 0:
            raise ValueError("ball radius must be positive")
        self.center = center
        self.radius = float(radius)
        self.dimension = center.size

    def contains_many(self, points):
        d = points - self.center
        return np.einsum("ij,ij->i", d, d) <= self.radius * self.radius

    def distances_many(self, points):
        d = points - self.center
        return self.radius - np.sqrt(np.einsum("ij,ij->i", d, d))

    def bounding_box(self):
        return self.center - self.radius, self.center + self.radius

    def volume_exact(self):
        return ball_volume(self.dimension, self.radius)

    def surface_area_exact(self):
        return ball_surface_area(self.dimension, self.radius)

    def inradius(self):
        return self.radius

    def interior_point(self):
        return self.center.copy()

    @cached_property
    def diameter(self):
        return 2.0 * self.radius

    def _boundary_batch(self, key, ids):
        dirs = rng.unit_vectors(key, ids, 0, self.dimension)
        pos = self.center + self.radius * dirs
        wgt = np.full(len(ids), self.surface_area_exact())
        return pos, -dirs, wgt, np.ones(len(ids), dtype=bool)

    def shape_json(self):
        return {"type": "ball", "center": self.center.tolist(),
                "radius": self.radius}


class Ellipsoid(ConvexBody):
    """Axis-aligned ellipsoid {x : sum ((x_i - c_i)/b_i)^2 <= 1}.

    distances_many returns the certified lower bound b_min (1 - sqrt(q)),
    exact at the center and along the shortest axis (the quadratic form q
    has |grad sqrt(q)| <= 1/b_min, so integrating along the segment to the
    nearest boundary point gives the bound).  Construct with
    exact_distance=True to refine by bisection on the nearest-point
    equation instead.
    """

    def __init__(self, center, semi_axes, exact_distance: bool = False):
        center = np.asarray(center, dtype=float)
        semi_axes = np.asarray(semi_axes, dtype=float)
        if center.ndim != 1 or center.size < 2:
            raise ValueError("ellipsoid center must be a vector of dimension >= 2")
        if semi_axes.shape != center.shape or np.any(semi_axes <= 0):
            raise ValueError("semi_axes must be positive and match the center")
        self.center = center
        self.semi_axes = semi_axes
        self.exact_distance = bool(exact_distance)
        self.dimension = center.size

    def _q(self, points):
        z = (points - self.center) / self.semi_axes
        return np.einsum("ij,ij->i", z, z)

    def contains_many(self, points):
        return self._q(points) <= 1.0

    def distances_many(self, points):
        if self.exact_distance:
            return np.array([ellipsoid_exact_distance(self, p) for p in points])
        b_min = self.semi_axes.min()
        return b_min * (1.0 - np.sqrt(self._q(points)))

    def bounding_box(self):
        return self.center - self.semi_axes, self.center + self.semi_axes

    def volume_exact(self):
        return ball_volume(self.dimension, 1.0) * float(np.prod(self.semi_axes))

    def inradius(self):
        return float(self.semi_axes.min())

    def interior_point(self):
        return self.center.copy()

    @cached_property
    def diameter(self):
        return 2.0 * float(self.semi_axes.max())

    def _boundary_batch(self, key, ids):
        z = rng.unit_vectors(key, ids, 0, self.dimension)
        pos = self.center + self.semi_axes * z
        # surface Jacobian of the sphere -> ellipsoid axis scaling
        jac = float(np.prod(self.semi_axes)) * np.linalg.norm(z / self.semi_axes, axis=1)
        wgt = unit_sphere_area(self.dimension) * jac
        grad = (pos - self.center) / self.semi_axes**2
        nrm = -grad / np.linalg.norm(grad, axis=1)[:, None]
        return pos, nrm, wgt, np.ones(len(ids), dtype=bool)

    def shape_json(self):
        return {"type": "ellipsoid", "center": self.center.tolist(),
                "semi_axes": self.semi_axes.tolist()}


def ellipsoid_exact_distance(body: Ellipsoid, x) -> float:
    """Distance from an interior point to the ellipsoid boundary, by
    bisection on the nearest-point parameter t in (-b_min^2, 0]:
    the nearest boundary point is z_i = b_i^2 y_i / (b_i^2 + t) with
    sum (b_i y_i / (b_i^2 + t))^2 = 1 (y = x - center).

    Falls back to the certified lower bound in the degenerate case where
    the query has no component along any shortest axis.
    """
    y = _as_vector(x, body.dimension) - body.center
    b2 = body.semi_axes**2
    q = float(np.sum((y / body.semi_axes) ** 2))
    if q > 1.0:
        raise ValueError("point lies outside the ellipsoid")
    lower = float(body.semi_axes.min()) * (1.0 - math.sqrt(q))

    def f(t):
        return float(np.sum((body.semi_axes * y / (b2 + t)) ** 2)) - 1.0

    lo = -float(b2.min())
    lo_probe = lo * (1.0 - 1e-13) + 0.0
    if f(lo_probe) < 0.0:  # degenerate: nearest point leaves the axis span
        return lower
    hi = 0.0
    for _ in range(200):
        mid = 0.5 * (lo_probe + hi)
        if f(mid) > 0.0:
            lo_probe = mid
        else:
            hi = mid
        if hi - lo_probe < 1e-16 * float(b2.max()):
            break
    t = 0.5 * (lo_probe + hi)
    d = math.sqrt(float(np.sum((y * t / (b2 + t)) ** 2)))
    return max(d, lower)


class Box(ConvexBody):
    def __init__(self, lower, upper):
        lower = np.asarray(lower, dtype=float)
        upper = np.asarray(upper, dtype=float)
        if lower.ndim != 1 or lower.size < 2:
            raise ValueError("box corners must be vectors of dimension >= 2")
        if lower.shape != upper.shape or np.any(upper <= lower):
            raise ValueError("box must satisfy lower < upper componentwise")
        self.lower = lower
        self.upper = upper
        self.dimension = lower.size

    def contains_many(self, points):
        return np.all((points >= self.lower) & (points <= self.upper), axis=1)

    def distances_many(self, points):
        return np.minimum(points - self.lower, self.upper - points).min(axis=1)

    def bounding_box(self):
        return self.lower.copy(), self.upper.copy()

    def volume_exact(self):
        return float(np.prod(self.upper - self.lower))

    def surface_area_exact(self):
        ext = self.upper - self.lower
        vol = float(np.prod(ext))
        return float(2.0 * np.sum(vol / ext))

    def inradius(self):
        return 0.5 * float((self.upper - self.lower).min())

    def interior_point(self):
        return 0.5 * (self.lower + self.upper)

    @cached_property
    def _face_table(self):
        """(axis, side, area, inward normal) per face, plus cumulative areas."""
        ext = self.upper - self.lower
        vol = float(np.prod(ext))
        faces = []
        for k in range(self.dimension):
            for side in (0, 1):
                nrm = np.zeros(self.dimension)
                nrm[k] = 1.0 if side == 0 else -1.0
                faces.append((k, side, vol / ext[k], nrm))
        areas = np.array([f[2] for f in faces])
        return faces, np.cumsum(areas), float(areas.sum())

    def _boundary_batch(self, key, ids):
        faces, cum, total = self._face_table
        n = self.dimension
        u = rng.uniforms(key, ids, 0, n)  # slot 0: face; slots 1..n-1: coords
        face_idx = np.searchsorted(cum, u[:, 0] * total, side="right")
        face_idx = np.minimum(face_idx, len(faces) - 1)
        pos = np.empty((len(ids), n))
        nrm = np.empty((len(ids), n))
        for fi, (k, side, _area, normal) in enumerate(faces):
            sel = np.nonzero(face_idx == fi)[0]
            if sel.size == 0:
                continue
            other = [j for j in range(n) if j != k]
            coords = self.lower[other] + u[np.ix_(sel, range(1, n))] \
                * (self.upper[other] - self.lower[other])
            block = np.empty((sel.size, n))
            block[:, other] = coords
            block[:, k] = self.lower[k] if side == 0 else self.upper[k]
            pos[sel] = block
            nrm[sel] = normal
        wgt = np.full(len(ids), total)
        return pos, nrm, wgt, np.ones(len(ids), dtype=bool)

    def shape_json(self):
        return {"type": "box", "lower": self.lower.tolist(),
                "upper": self.upper.tolist()}


# ---------------------------------------------------------------------------
# H-polytopes


def _chebyshev_center(A: np.ndarray, c: np.ndarray):
    """Chebyshev center and radius of {x : A x <= c} with unit rows.
    Returns (None, 0.0) when infeasible; raises on an unbounded radius."""
    m, d = A.shape
    A_ub = np.hstack([A, np.ones((m, 1))])
    res = linprog(np.concatenate([np.zeros(d), [-1.0]]), A_ub=A_ub, b_ub=c,
                  bounds=[(None, None)] * d + [(0, None)], method="highs")
    if res.status == 2:
        return None, 0.0
    if res.status != 0:
        raise ValueError("polytope admits arbitrarily large inscribed balls "
                         "(unbounded)")
    return res.x[:d], float(res.x[d])


def _coordinate_range(A, c, k: int, sign: float) -> float:
    """sup of sign * x_k over {A x <= c}; +inf when unbounded."""
    d = A.shape[1]
    obj = np.zeros(d)
    obj[k] = -sign
    res = linprog(obj, A_ub=A, b_ub=c, bounds=[(None, None)] * d, method="highs")
    if res.status == 3:
        return math.inf
    if res.status != 0:
        raise ValueError("empty polytope")
    return float(sign * res.x[k])


def _hrep_bbox(A, c):
    d = A.shape[1]
    lo = np.array([-_coordinate_range(A, c, k, -1.0) for k in range(d)])
    hi = np.array([_coordinate_range(A, c, k, 1.0) for k in range(d)])
    return lo, hi


def _hrep_volume(A: np.ndarray, c: np.ndarray, scale: float) -> float:
    """Exact volume of a bounded {A x <= c} by the recursive divergence
    identity vol = (1/d) sum_i (c_i - a_i . x0) |face_i|."""
    d = A.shape[1]
    if d == 1:
        lo, hi = -math.inf, math.inf
        for a, ci in zip(A[:, 0], c):
            if a > _TOL:
                hi = min(hi, ci / a)
            elif a < -_TOL:
                lo = max(lo, ci / a)
            elif ci < -1e-9 * scale:
                return 0.0
        return max(0.0, hi - lo)
    center, radius = _chebyshev_center(A, c)
    if center is None or radius <= 1e-12 * scale:
        return 0.0
    total = 0.0
    for i in range(len(c)):
        fv = _hrep_face_volume(A, c, i, scale)
        if fv > 0.0:
            total += (c[i] - A[i] @ center) * fv
    return total / d


def _face_subsystem(A, c, i):
    """Constraints of face i expressed in an orthonormal chart of its
    hyperplane: returns (basis Q, plane point p, A', c') or None if the
    face is cut away entirely."""
    a = A[i]
    Q = null_space(a[None, :])  # (d, d-1), orthonormal
    p = c[i] * a
    rows = [j for j in range(len(c)) if j != i]
    A2 = A[rows] @ Q
    c2 = c[rows] - A[rows] @ p
    norms = np.linalg.norm(A2, axis=1)
    keep = norms > 1e-9
    for j in np.nonzero(~keep)[0]:
        if c2[j] < -1e-9:
            return None  # a parallel constraint excludes the whole plane
    A2 = A2[keep] / norms[keep, None]
    c2 = c2[keep] / norms[keep]
    return Q, p, A2, c2


def _hrep_face_volume(A, c, i, scale) -> float:
    sub = _face_subsystem(A, c, i)
    if sub is None:
        return 0.0
    _, _, A2, c2 = sub
    if len(c2) == 0:
        return 0.0
    return _hrep_volume(A2, c2, scale)


@dataclass(frozen=True)
class _Face:
    index: int
    normal: np.ndarray      # outward
    offset: float
    plane_point: np.ndarray
    basis: np.ndarray       # (n, n-1) orthonormal chart of the hyperplane
    sub_A: np.ndarray       # face constraints in chart coordinates
    sub_c: np.ndarray
    chart_lo: np.ndarray    # bounding box of the face in the chart
    chart_hi: np.ndarray
    area: float


class Polytope(ConvexBody):
    """Bounded intersection of half-spaces {x : a_i . x <= c_i}.

    Boundedness is validated at construction with linear programs in all
    +-coordinate directions, unless require_bounded=False (used for
    half-space members of a bounded intersection, where faces and exact
    areas are never requested directly).
    """

    def __init__(self, half_spaces, require_bounded: bool = True):
        normals = []
        offsets = []
        for a, ci in half_spaces:
            a = np.asarray(a, dtype=float)
            norm = float(np.linalg.norm(a))
            if norm < _TOL:
                raise ValueError("half-space normal must be nonzero")
            if abs(norm - 1.0) > 1e-6:
                raise ValueError("half-space normals must be unit vectors")
            normals.append(a / norm)
            offsets.append(float(ci) / norm)
        self.A = np.array(normals)
        self.c = np.array(offsets)
        if self.A.ndim != 2 or self.A.shape[1] < 2:
            raise ValueError("polytope dimension must be >= 2")
        self.dimension = self.A.shape[1]
        self.require_bounded = bool(require_bounded)
        if require_bounded:
            lo, hi = _hrep_bbox(self.A, self.c)
            if not (np.all(np.isfinite(lo)) and np.all(np.isfinite(hi))):
                raise ValueError("polytope is unbounded")
            self._bbox = (lo, hi)
            center, radius = _chebyshev_center(self.A, self.c)
            if center is None or radius <= _TOL * max(1.0, float(np.abs(hi).max())):
                raise ValueError("polytope has empty interior")
            self._center = center
            self._inradius = radius

    def contains_many(self, points):
        return np.all(points @ self.A.T <= self.c, axis=1)

    def distances_many(self, points):
        return (self.c - points @ self.A.T).min(axis=1)

    def bounding_box(self):
        if not self.require_bounded:
            lo, hi = _hrep_bbox(self.A, self.c)
            return lo, hi
        return self._bbox[0].copy(), self._bbox[1].copy()

    def inradius(self):
        return self._inradius

    def interior_point(self):
        return self._center.copy()

    @cached_property
    def faces(self) -> list[_Face]:
        if not self.require_bounded:
            raise ValueError("faces of an unbounded half-space collection "
                             "are not available")
        lo, hi = self._bbox
        scale = max(1.0, float(np.linalg.norm(hi - lo)))
        out = []
        for i in range(len(self.c)):
            sub = _face_subsystem(self.A, self.c, i)
            if sub is None:
                continue
            Q, p, A2, c2 = sub
            area = _hrep_volume(A2, c2, scale) if len(c2) else 0.0
            if area <= 1e-12 * scale ** (self.dimension - 1):
                continue
            # center the chart on the face for a tight sampling box
            chart_lo, chart_hi = _hrep_bbox(A2, c2)
            out.append(_Face(index=i, normal=self.A[i], offset=self.c[i],
                             plane_point=p, basis=Q, sub_A=A2, sub_c=c2,
                             chart_lo=chart_lo, chart_hi=chart_hi, area=area))
        if not out:
            raise ValueError("polytope has no positive-area faces")
        return out

    def volume_lasserre(self) -> float:
        """Exact volume via the recursive face decomposition (used as an
        independent cross-check of the rejection Monte Carlo estimate)."""
        faces = self.faces
        x0 = self._center
        total = sum((f.offset - f.normal @ x0) * f.area for f in faces)
        return total / self.dimension

    def surface_area_exact(self):
        return float(sum(f.area for f in self.faces))

    @cached_property
    def _face_cum(self):
        areas = np.array([f.area for f in self.faces])
        return np.cumsum(areas), float(areas.sum())

    def _boundary_batch(self, key, ids):
        cum, total = self._face_cum
        n = self.dimension
        faces = self.faces
        sel_u = rng.uniforms(key, ids, 0, 1)[:, 0]
        face_idx = np.minimum(np.searchsorted(cum, sel_u * total, side="right"),
                              len(faces) - 1)
        pos = np.empty((len(ids), n))
        nrm = np.empty((len(ids), n))
        for fi, face in enumerate(faces):
            sel_idx = np.nonzero(face_idx == fi)[0]
            if sel_idx.size == 0:
                continue
            span = face.chart_hi - face.chart_lo
            pending = ids[sel_idx]
            coords = np.empty((sel_idx.size, n - 1))
            unresolved = np.ones(sel_idx.size, dtype=bool)
            for round_ in range(1, 10_001):
                active = np.nonzero(unresolved)[0]
                if active.size == 0:
                    break
                u = rng.uniforms(key, pending[active], round_, n - 1)
                y = face.chart_lo + u * span
                good = np.all(y @ face.sub_A.T <= face.sub_c, axis=1)
                hit = active[good]
                coords[hit] = y[good]
                unresolved[hit] = False
            else:
                raise RuntimeError("face sampling starved; degenerate face?")
            pos[sel_idx] = face.plane_point + coords @ face.basis.T
            nrm[sel_idx] = -face.normal
        wgt = np.full(len(ids), total)
        return pos, nrm, wgt, np.ones(len(ids), dtype=bool)

    def shape_json(self):
        return {"type": "polytope",
                "half_spaces": [{"normal": a.tolist(), "offset": float(ci)}
                                 for a, ci in zip(self.A, self.c)]}


class Intersection(ConvexBody):
    """Intersection of convex members sharing one dimension.

    Boundary sampling draws from each member's boundary (clipped to the
    intersection's bounding box for unbounded half-space members) with
    mixture probabilities proportional to member boundary areas, then
    rejects points outside the other members; accepted points carry the
    importance weight d(sigma)/d(law).
    """

    def __init__(self, members):
        members = list(members)
        if len(members) < 2:
            raise ValueError("intersection needs at least two members")
        dims = {m.dimension for m in members}
        if len(dims) != 1:
            raise ValueError("intersection members must share one dimension")
        self.members = members
        self.dimension = dims.pop()
        lo, hi = self.members[0].bounding_box()
        for m in self.members[1:]:
            mlo, mhi = m.bounding_box()
            lo = np.maximum(lo, mlo)
            hi = np.minimum(hi, mhi)
        if not (np.all(np.isfinite(lo)) and np.all(np.isfinite(hi))
                and np.all(hi > lo)):
            raise ValueError("intersection is unbounded or empty")
        self._bbox = (lo, hi)
        point, r = self._maximize_depth()
        if r <= _TOL * max(1.0, float(np.abs(hi).max())):
            raise ValueError("intersection has empty interior")
        self._deep_point = point
        self._inradius = r

    def _maximize_depth(self):
        lo, hi = self._bbox
        scale = float(np.linalg.norm(hi - lo))

        def negdepth(x):
            return -float(self.distances_many(x[None, :])[0])

        # coarse deterministic scan for a feasible start, then polish the
        # (concave) depth function
        ids = np.arange(512, dtype=np.uint64)
        probes = lo + rng.uniforms(_PILOT_KEY, ids, 0, self.dimension) * (hi - lo)
        probes = np.vstack([probes, 0.5 * (lo + hi)])
        depths = self.distances_many(probes)
        x0 = probes[int(np.argmax(depths))]
        res = minimize(negdepth, x0, method="Nelder-Mead",
                       options={"xatol": 1e-12 * scale, "fatol": 1e-12 * scale,
                                "maxiter": 20_000})
        best = res.x if -res.fun >= float(np.max(depths)) else x0
        return best, float(self.distances_many(best[None, :])[0])

    def contains_many(self, points):
        ok = self.members[0].contains_many(points)
        for m in self.members[1:]:
            ok &= m.contains_many(points)
        return ok

    def distances_many(self, points):
        d = self.members[0].distances_many(points)
        for m in self.members[1:]:
            d = np.minimum(d, m.distances_many(points))
        return d

    def bounding_box(self):
        return self._bbox[0].copy(), self._bbox[1].copy()

    def inradius(self):
        return self._inradius

    def interior_point(self):
        return self._deep_point.copy()

    @cached_property
    def diameter(self):
        lo, hi = self._bbox
        own = float(np.linalg.norm(hi - lo))
        return min([own] + [m.diameter for m in self.members])

    @cached_property
    def _mixture(self):
        """Per-member clipped boundary samplers and mixture areas."""
        lo, hi = self._bbox
        pad = 1e-9 * max(1.0, float(np.linalg.norm(hi - lo)))
        samplers = []
        areas = []
        for idx, m in enumerate(self.members):
            if isinstance(m, Polytope) and not m.require_bounded:
                clipped = _clip_to_box(m, lo - pad, hi + pad)
                samplers.append(clipped)
                areas.append(clipped.surface_area_exact())
            else:
                samplers.append(m)
                exact = m.surface_area_exact()
                if exact is None:
                    exact = _pilot_area(m)
                areas.append(exact)
        areas = np.array(areas, dtype=float)
        return samplers, areas / areas.sum(), float(areas.sum())

    def _boundary_batch(self, key, ids):
        samplers, fracs, _total = self._mixture
        n = self.dimension
        u = rng.uniforms(rng.derive(key, 7001), ids, 0, 1)[:, 0]
        member_idx = np.minimum(np.searchsorted(np.cumsum(fracs), u, side="right"),
                                len(samplers) - 1)
        pos = np.empty((len(ids), n))
        nrm = np.empty((len(ids), n))
        wgt = np.empty(len(ids))
        for k, sampler in enumerate(samplers):
            sel = member_idx == k
            if not sel.any():
                continue
            p, v, w, ok = sampler._boundary_batch(rng.derive(key, 7100 + k),
                                                  ids[sel])
            assert ok.all()
            pos[sel], nrm[sel], wgt[sel] = p, v, w / fracs[k]
        ok = np.ones(len(ids), dtype=bool)
        for j, m in enumerate(self.members):
            rest = member_idx != j
            inside = m.contains_many(pos)
            ok &= inside | ~rest  # a point need only lie in the *other* members
        return pos, nrm, wgt, ok

    def shape_json(self):
        return {"type": "intersection",
                "members": [m.shape_json() for m in self.members]}


class _ClippedPolytope(Polytope):
    """A half-space member clipped to a box; only the faces arising from
    the original constraints are sampled (the box faces are artifacts)."""

    def __init__(self, half_spaces, n_original: int):
        super().__init__(half_spaces, require_bounded=True)
        self._n_original = n_original

    @cached_property
    def faces(self):
        all_faces = super().faces
        kept = [f for f in all_faces if f.index < self._n_original]
        if not kept:
            raise ValueError("clipped member has no boundary inside the box")
        return kept


def _clip_to_box(poly: Polytope, lo, hi) -> _ClippedPolytope:
    halves = [(a, ci) for a, ci in zip(poly.A, poly.c)]
    n = poly.dimension
    for k in range(n):
        e = np.zeros(n)
        e[k] = 1.0
        halves.append((e.copy(), hi[k]))
        halves.append((-e, -lo[k]))
    return _ClippedPolytope(halves, n_original=len(poly.c))


def _pilot_area(body: ConvexBody, count: int = 8192) -> float:
    """Deterministic pilot estimate of a member's boundary area."""
    ids = np.arange(count, dtype=np.uint64)
    _, _, wgt, ok = body._boundary_batch(rng.derive(_PILOT_KEY, 9), ids)
    return float(np.mean(wgt * ok))


# ---------------------------------------------------------------------------
# Module-level operations


def contains(body: ConvexBody, x) -> bool:
    """True iff x lies in the closed body; exact per representation."""
    v = _as_vector(x, body.dimension)
    return bool(body.contains_many(v[None, :])[0])


def distance_to_boundary(body: ConvexBody, x) -> float:
    """Distance from an interior point to the boundary (certified lower
    bound for ellipsoids and intersections, exact otherwise)."""
    v = _as_vector(x, body.dimension)
    if not body.contains_many(v[None, :])[0]:
        raise ValueError("point lies outside the body")
    return float(max(body.distances_many(v[None, :])[0], 0.0))


def volume(body: ConvexBody, cfg: WosConfig) -> Estimate:
    """Exact for ball/ellipsoid/box; rejection Monte Carlo against the
    tightest bounding box for polytopes and intersections."""
    exact = body.volume_exact()
    if exact is not None:
        return Estimate.exact(exact)
    lo, hi = body.bounding_box()
    box_vol = float(np.prod(hi - lo))
    key = rng.derive(cfg.seed, _OP_VOLUME)
    hits = np.empty(cfg.samples)
    for start in range(0, cfg.samples, _BATCH):
        ids = np.arange(start, min(start + _BATCH, cfg.samples), dtype=np.uint64)
        pts = lo + rng.uniforms(key, ids, 0, body.dimension) * (hi - lo)
        hits[start:start + len(ids)] = body.contains_many(pts)
    return Estimate.from_values(hits * box_vol)


def surface_area(body: ConvexBody, cfg: WosConfig) -> Estimate:
    """Exact for ball/box/polytope; weighted-sample normalization for
    ellipsoids and intersections."""
    exact = body.surface_area_exact()
    if exact is not None:
        return Estimate.exact(exact)
    key = rng.derive(cfg.seed, _OP_AREA)
    vals = np.empty(cfg.samples)
    for start in range(0, cfg.samples, _BATCH):
        ids = np.arange(start, min(start + _BATCH, cfg.samples), dtype=np.uint64)
        _, _, wgt, ok = body._boundary_batch(key, ids)
        vals[start:start + len(ids)] = wgt * ok
    return Estimate.from_values(vals)


def sample_boundary(body: ConvexBody, count: int, seed: int) -> list[BoundaryPoint]:
    """``count`` boundary points distributed by surface measure, carrying
    importance weights; bit-identical lists for identical seeds."""
    pos, nrm, wgt = body.boundary_arrays(count, rng.derive(seed, _OP_BOUNDARY))
    return [BoundaryPoint(position=p, inward_normal=v, weight=float(w))
            for p, v, w in zip(pos, nrm, wgt)]


def interior_points(body: ConvexBody, count: int, key: int) -> np.ndarray:
    """Exactly ``count`` uniform interior samples by bounding-box rejection."""
    if count < 1:
        raise ValueError("count must be >= 1")
    lo, hi = body.bounding_box()
    parts = []
    collected = 0
    next_id = 0
    while collected < count:
        if next_id > 100_000_000:
            raise RuntimeError("interior sampling starved (volume ~ 0?)")
        ids = np.arange(next_id, next_id + _BATCH, dtype=np.uint64)
        next_id += _BATCH
        pts = lo + rng.uniforms(key, ids, 0, body.dimension) * (hi - lo)
        pts = pts[body.contains_many(pts)]
        parts.append(pts)
        collected += len(pts)
    return np.concatenate(parts)[:count]


# ---------------------------------------------------------------------------
# JSON


def body_to_json(body: ConvexBody) -> dict:
    return {"dimension": body.dimension, "shape": body.shape_json()}


def _shape_from_json(doc: dict, n: int, member: bool = False) -> ConvexBody:
    kind = doc.get("type")
    if kind == "ball":
        return Ball(center=doc["center"], radius=doc["radius"])
    if kind == "ellipsoid":
        return Ellipsoid(center=doc["center"], semi_axes=doc["semi_axes"])
    if kind == "box":
        return Box(lower=doc["lower"], upper=doc["upper"])
    if kind == "polytope":
        halves = [(h["normal"], h["offset"]) for h in doc["half_spaces"]]
        return Polytope(halves, require_bounded=not member)
    if kind == "intersection":
        members = [_shape_from_json(m, n, member=True) for m in doc["members"]]
        return Intersection(members)
    raise ValueError(f"unknown shape type {kind!r}")


def body_from_json(doc: dict) -> ConvexBody:
    n = int(doc["dimension"])
    if n < 2:
        raise ValueError("dimension must be >= 2")
    body = _shape_from_json(doc["shape"], n)
    if body.dimension != n:
        raise ValueError("shape dimension does not match the declared dimension")
    return body
