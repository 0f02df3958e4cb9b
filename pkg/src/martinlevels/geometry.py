"""Unbounded planar domains, convex cross-sections, and point-set utilities.

Points are plain sequences/ndarrays ``(t, Y)`` whose first coordinate is the
axial variable; all entries must be finite and the dimension is at least 2.
Every object here is immutable after construction and every operation is
pure, so values can be shared freely between threads.

Domains are built either from the named registry (``strip``,
``sector_minus_slit``, ``halfplane_minus_disk``, ``right_halfplane``,
``cylinder``, ``convex_ring``) or as profile regions
``{(t, Y): t > 0, Y in f(t) * D}`` for a positive profile ``f`` and a bounded
convex body ``D`` containing the origin.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np


class GeometryError(ValueError):
    pass


def as_point(p):
    """Validate and return a point as a 1-d float array (finite, dim >= 2)."""
    q = np.asarray(p, dtype=float)
    if q.ndim != 1 or q.size < 2:
        raise GeometryError(f"point must be a flat sequence of >= 2 coords, got shape {q.shape}")
    if not np.all(np.isfinite(q)):
        raise GeometryError(f"point has non-finite entries: {q}")
    return q


# ---------------------------------------------------------------------------
# Windows
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class WindowBox:
    """Axis-aligned box given by lower/upper corners (nonempty interior)."""

    lower: tuple
    upper: tuple

    def __post_init__(self):
        lo = tuple(float(v) for v in self.lower)
        hi = tuple(float(v) for v in self.upper)
        if len(lo) != len(hi) or len(lo) < 2:
            raise GeometryError("window corners must share a dimension >= 2")
        if not all(a < b for a, b in zip(lo, hi)):
            raise GeometryError(f"window has empty interior: lower={lo}, upper={hi}")
        object.__setattr__(self, "lower", lo)
        object.__setattr__(self, "upper", hi)

    @property
    def dim(self):
        return len(self.lower)

    def extent(self):
        return tuple(b - a for a, b in zip(self.lower, self.upper))

    def contains(self, p, strict=False):
        p = np.asarray(p, dtype=float)
        if strict:
            return bool(np.all(p > self.lower) and np.all(p < self.upper))
        return bool(np.all(p >= self.lower) and np.all(p <= self.upper))

    def lattice(self, h):
        """Node coordinates of a grid of spacing ~h snapped to the corners."""
        axes = []
        for a, b in zip(self.lower, self.upper):
            n = max(1, int(round((b - a) / h)))
            axes.append(a + (b - a) * np.arange(n + 1) / n)
        return axes


# ---------------------------------------------------------------------------
# Convex bodies (bounded convex polytopes containing the origin)
# ---------------------------------------------------------------------------

class ConvexBody:
    """Bounded convex polytope in R^d given by its vertices, origin inside.

    For ``d == 2`` the vertices are reduced to the convex hull and stored in
    counter-clockwise order; for ``d == 1`` the body is the interval spanned
    by the vertex values.  Dimensions above 2 are not supported (smooth
    bodies are approximated by polygons, see :func:`regular_polygon`).
    """

    def __init__(self, vertices, symmetric=None):
        v = np.atleast_2d(np.asarray(vertices, dtype=float))
        if v.shape[1] == 1 or v.ndim == 1:
            v = v.reshape(-1, 1)
        if not np.all(np.isfinite(v)):
            raise GeometryError("body vertices must be finite")
        self.dim = v.shape[1]
        if self.dim == 1:
            lo, hi = float(v.min()), float(v.max())
            if not (lo < 0.0 < hi):
                raise GeometryError(f"origin not strictly inside interval ({lo}, {hi})")
            self.vertices = np.array([[lo], [hi]])
        elif self.dim == 2:
            hull = convex_hull_2d(v)
            if len(hull) < 3:
                raise GeometryError("2-d body is degenerate (collinear vertices)")
            self.vertices = hull
            if not self._contains_2d(np.zeros(2), 1.0, strict=True):
                raise GeometryError("origin not strictly inside body")
        else:
            raise GeometryError("convex bodies are supported in dimensions 1 and 2 only")
        if symmetric is None:
            symmetric = self._detect_symmetry()
        elif symmetric and not self._detect_symmetry():
            raise GeometryError("symmetric flag set but vertex set is not closed under negation")
        self.symmetric = bool(symmetric)

    def _detect_symmetry(self, tol=1e-12):
        v = self.vertices
        scale = 1.0 + np.abs(v).max()
        for w in v:
            if np.min(np.linalg.norm(v + w, axis=1)) > tol * scale:
                return False
        return True

    def support(self, direction):
        """h_D(xi) = max_v <v, xi> for the direction normalized to unit length."""
        xi = np.atleast_1d(np.asarray(direction, dtype=float))
        nrm = np.linalg.norm(xi)
        if nrm == 0.0 or not np.isfinite(nrm):
            raise GeometryError("support direction must be nonzero")
        xi = xi / nrm
        return float(np.max(self.vertices @ xi))

    def _contains_2d(self, w, scale, strict):
        v = self.vertices * scale
        n = len(v)
        x, y = w[..., 0], w[..., 1]
        inside = np.ones(np.shape(x), dtype=bool)
        for k in range(n):
            ax, ay = v[k]
            bx, by = v[(k + 1) % n]
            cross = (bx - ax) * (y - ay) - (by - ay) * (x - ax)
            inside &= (cross > 0.0) if strict else (cross >= 0.0)
        return inside

    def contains(self, w, scale=1.0, strict=True):
        """Membership of ``w`` in ``scale * D`` (open set when strict)."""
        w = np.asarray(w, dtype=float)
        scalar = w.ndim <= 1 and self.dim > 1 or (self.dim == 1 and w.ndim == 0)
        if self.dim == 1:
            lo, hi = self.vertices[0, 0] * scale, self.vertices[1, 0] * scale
            val = w if w.ndim == 0 else w[..., 0] if w.shape[-1:] == (1,) else w
            res = (val > lo) & (val < hi) if strict else (val >= lo) & (val <= hi)
        else:
            res = self._contains_2d(np.atleast_1d(w), scale, strict)
        return bool(res) if scalar else res

    def boundary_distance(self, w, scale=1.0):
        """Euclidean distance from ``w`` to the boundary of ``scale * D``."""
        w = np.asarray(w, dtype=float).reshape(-1)
        if self.dim == 1:
            lo, hi = self.vertices[0, 0] * scale, self.vertices[1, 0] * scale
            val = float(w[0])
            return min(abs(val - lo), abs(hi - val))
        v = self.vertices * scale
        n = len(v)
        best = math.inf
        for k in range(n):
            best = min(best, _point_segment_distance(w, v[k], v[(k + 1) % n]))
        return best

    def boundary_points(self, n, scale=1.0):
        """~n points sampled uniformly by arc length along the boundary."""
        if self.dim == 1:
            lo, hi = self.vertices[:, 0] * scale
            return np.array([[lo], [hi]])
        v = self.vertices * scale
        edges = np.roll(v, -1, axis=0) - v
        lengths = np.linalg.norm(edges, axis=1)
        total = lengths.sum()
        pts = []
        for k in range(len(v)):
            m = max(1, int(round(n * lengths[k] / total)))
            ts = np.arange(m) / m
            pts.append(v[k] + ts[:, None] * edges[k])
        return np.vstack(pts)

    def as_config(self):
        return {"vertices": self.vertices.tolist()}


def convex_hull_2d(points):
    """Convex hull of 2-d points, counter-clockwise, via monotone chain."""
    pts = np.unique(np.asarray(points, dtype=float), axis=0)
    if len(pts) <= 2:
        return pts
    pts = pts[np.lexsort((pts[:, 1], pts[:, 0]))]

    def cross(o, a, b):
        return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])

    def build(seq):
        out = []
        for p in seq:
            while len(out) >= 2 and cross(out[-2], out[-1], p) <= 0:
                out.pop()
            out.append(p)
        return out

    lower = build(pts)
    upper = build(pts[::-1])
    return np.array(lower[:-1] + upper[:-1])


def _point_segment_distance(p, a, b):
    ab = b - a
    denom = float(ab @ ab)
    t = 0.0 if denom == 0.0 else float(np.clip((p - a) @ ab / denom, 0.0, 1.0))
    return float(np.linalg.norm(p - (a + t * ab)))


def regular_polygon(n=64, radius=1.0):
    """Regular n-gon approximation of the disk of the given radius."""
    if n < 3:
        raise GeometryError("polygon needs >= 3 vertices")
    th = 2.0 * np.pi * np.arange(n) / n
    return ConvexBody(np.column_stack([radius * np.cos(th), radius * np.sin(th)]))


def square_body(half=1.0):
    return ConvexBody([[-half, -half], [half, -half], [half, half], [-half, half]])


def interval_body(lo=-1.0, hi=1.0):
    return ConvexBody([[lo], [hi]])


# ---------------------------------------------------------------------------
# Profiles
# ---------------------------------------------------------------------------

#: closed-form (f, f') pairs usable as profile functions
PROFILES = {
    "sqrt": (np.sqrt, lambda t: 0.5 / np.sqrt(t)),
    "log1p": (np.log1p, lambda t: 1.0 / (1.0 + t)),
    "const": (lambda t: np.ones_like(np.asarray(t, dtype=float)), lambda t: np.zeros_like(np.asarray(t, dtype=float))),
    "saturating": (lambda t: t / (1.0 + t), lambda t: 1.0 / (1.0 + t) ** 2),
}

#: geometric sampling grid on which profile hypotheses are checked
_HYPOTHESIS_GRID = 2.0 ** np.arange(-6, 21)


class ProfileDomain:
    """Profile function ``f`` plus convex cross-section ``D``.

    ``profile_kind`` is ``"lipschitz-concave-derivative"`` when f' is
    non-increasing with limit 0 (checked by sampling on a geometric grid,
    tolerance 1e-9) and ``"general"`` otherwise.  When ``fprime`` is omitted
    a centered finite difference of ``f`` is used.
    """

    def __init__(self, f, cross_section, fprime=None, profile_kind="lipschitz-concave-derivative",
                 name=None):
        if isinstance(f, str):
            name = name or f
            f, fp = PROFILES[f]
            fprime = fprime or fp
        if fprime is None:
            def fprime(t, _f=f):
                h = 1e-6 * (1.0 + abs(t))
                return (_f(t + h) - _f(t - h)) / (2.0 * h)
        self.f = f
        self.fprime = fprime
        self.cross_section = cross_section
        self.profile_kind = profile_kind
        self.name = name
        self._validate()

    def _validate(self, tol=1e-9):
        fv = np.asarray([float(self.f(t)) for t in _HYPOTHESIS_GRID])
        if not np.all(fv > 0.0):
            raise GeometryError("profile must be positive on (0, inf)")
        if self.profile_kind == "lipschitz-concave-derivative":
            dv = np.asarray([float(self.fprime(t)) for t in _HYPOTHESIS_GRID])
            if not np.all(np.diff(dv) <= tol):
                k = int(np.argmax(np.diff(dv) > tol))
                raise GeometryError(
                    f"profile derivative increases between t={_HYPOTHESIS_GRID[k]:g} "
                    f"and t={_HYPOTHESIS_GRID[k + 1]:g}")


# ---------------------------------------------------------------------------
# Cross-sections (slices)
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SliceSet:
    """The cross-section of a domain at a fixed axial coordinate.

    One-dimensional cross-sections are stored as a tuple of open intervals
    (possibly unbounded); higher-dimensional profile slices carry the scaled
    body ``scale * body`` instead.
    """

    t: float
    intervals: tuple = ()
    body: ConvexBody = None
    scale: float = 1.0

    def __post_init__(self):
        if not self.intervals and self.body is None:
            raise GeometryError(f"slice at t={self.t} is empty")

    @property
    def bounded(self):
        return all(np.isfinite(a) and np.isfinite(b) for a, b in self.intervals)

    def contains(self, y):
        if self.body is not None:
            return self.body.contains(y, scale=self.scale)
        return any(a < y < b for a, b in self.intervals)

    def sample(self, n, span=None):
        """n points per interval, endpoints excluded; unbounded needs span."""
        out = []
        for a, b in self.intervals:
            if not (np.isfinite(a) and np.isfinite(b)):
                if span is None:
                    raise GeometryError("unbounded slice needs an explicit span")
                a = max(a, -span)
                b = min(b, span)
            ts = (np.arange(n) + 0.5) / n
            out.append(a + ts * (b - a))
        return np.concatenate(out)


# ---------------------------------------------------------------------------
# Domains
# ---------------------------------------------------------------------------

class Domain:
    """Open connected set with containment, boundary, and slice queries."""

    kind = None
    dim = 2

    def contains(self, p):
        raise NotImplementedError

    def contains_closure(self, p):
        raise NotImplementedError

    def boundary_distance(self, p):
        raise NotImplementedError

    def slice_at(self, t):
        raise NotImplementedError

    def boundary_points(self, window, n):
        raise NotImplementedError

    def truncation_window(self, s):
        raise GeometryError(f"domain kind {self.kind!r} has no axial truncation rule")

    def _check_point(self, p):
        q = as_point(p)
        if q.size != self.dim:
            raise GeometryError(f"point dimension {q.size} != domain dimension {self.dim}")
        return q

    def _split(self, p):
        p = np.asarray(p, dtype=float)
        if p.ndim == 1:
            if p.size != self.dim:
                raise GeometryError(f"point dimension {p.size} != domain dimension {self.dim}")
            return p[0], p[1]
        return p[..., 0], p[..., 1]


class Strip(Domain):
    """(0, inf) x (-pi/2, pi/2)."""

    kind = "strip"

    def contains(self, p):
        x, y = self._split(p)
        return np.asarray((x > 0.0) & (np.abs(y) < np.pi / 2))[()]

    def contains_closure(self, p):
        x, y = self._split(p)
        return np.asarray((x >= 0.0) & (np.abs(y) <= np.pi / 2))[()]

    def boundary_distance(self, p):
        x, y = self._split(self._check_point(p))
        if not self.contains(p):
            raise GeometryError(f"point {p} outside domain")
        return float(min(x, np.pi / 2 - abs(y)))

    def slice_at(self, t):
        if t <= 0.0:
            raise GeometryError(f"slice at t={t} is empty")
        return SliceSet(t, ((-np.pi / 2, np.pi / 2),))

    def truncation_window(self, s):
        return WindowBox((0.0, -np.pi / 2), (2.0 * s, np.pi / 2))

    def boundary_points(self, window, n):
        (x0, y0), (x1, y1) = window.lower, window.upper
        xs = np.linspace(max(x0, 0.0), x1, n)
        ys = np.linspace(max(y0, -np.pi / 2), min(y1, np.pi / 2), n)
        walls = [np.column_stack([xs, np.full_like(xs, np.pi / 2)]),
                 np.column_stack([xs, np.full_like(xs, -np.pi / 2)])]
        if x0 <= 0.0:
            walls.append(np.column_stack([np.zeros_like(ys), ys]))
        return np.vstack(walls)


class RightHalfplane(Domain):
    """{x > 0}."""

    kind = "right_halfplane"

    def contains(self, p):
        x, _ = self._split(p)
        return np.asarray(x > 0.0)[()]

    def contains_closure(self, p):
        x, _ = self._split(p)
        return np.asarray(x >= 0.0)[()]

    def boundary_distance(self, p):
        x, _ = self._split(self._check_point(p))
        if not self.contains(p):
            raise GeometryError(f"point {p} outside domain")
        return float(x)

    def slice_at(self, t):
        if t <= 0.0:
            raise GeometryError(f"slice at t={t} is empty")
        return SliceSet(t, ((-np.inf, np.inf),))

    def truncation_window(self, s):
        return WindowBox((0.0, -s), (2.0 * s, s))

    def boundary_points(self, window, n):
        ys = np.linspace(window.lower[1], window.upper[1], n)
        return np.column_stack([np.zeros_like(ys), ys])


class Sector(Domain):
    """{x > 0, |y| < x}."""

    kind = "sector"

    def contains(self, p):
        x, y = self._split(p)
        return np.asarray((x > 0.0) & (np.abs(y) < x))[()]

    def contains_closure(self, p):
        x, y = self._split(p)
        return np.asarray((x >= 0.0) & (np.abs(y) <= x))[()]

    def boundary_distance(self, p):
        x, y = self._split(self._check_point(p))
        if not self.contains(p):
            raise GeometryError(f"point {p} outside domain")
        return float((x - abs(y)) / math.sqrt(2.0))

    def slice_at(self, t):
        if t <= 0.0:
            raise GeometryError(f"slice at t={t} is empty")
        return SliceSet(t, ((-t, t),))

    def boundary_points(self, window, n):
        x1 = window.upper[0]
        xs = np.linspace(0.0, x1, n)
        return np.vstack([np.column_stack([xs, xs]), np.column_stack([xs, -xs])])


class SectorMinusSlit(Sector):
    """{x > 0, |y| < x} minus the segment [0, 1] on the real axis."""

    kind = "sector_minus_slit"

    def contains(self, p):
        x, y = self._split(p)
        on_slit = (y == 0.0) & (x <= 1.0)
        return np.asarray((x > 0.0) & (np.abs(y) < x) & ~on_slit)[()]

    def boundary_distance(self, p):
        x, y = self._split(self._check_point(p))
        if not self.contains(p):
            raise GeometryError(f"point {p} outside domain")
        d_rays = (x - abs(y)) / math.sqrt(2.0)
        d_slit = _point_segment_distance(np.array([x, y]), np.array([0.0, 0.0]), np.array([1.0, 0.0]))
        return float(min(d_rays, d_slit))

    def slice_at(self, t):
        if t <= 0.0:
            raise GeometryError(f"slice at t={t} is empty")
        if t <= 1.0:
            return SliceSet(t, ((-t, 0.0), (0.0, t)))
        return SliceSet(t, ((-t, t),))

    def boundary_points(self, window, n):
        pts = super().boundary_points(window, n)
        xs = np.linspace(0.0, 1.0, n)
        return np.vstack([pts, np.column_stack([xs, np.zeros_like(xs)])])


class HalfplaneMinusDisk(Domain):
    """{x > 0, ||(x, y)|| > 1}."""

    kind = "halfplane_minus_disk"

    def contains(self, p):
        x, y = self._split(p)
        return np.asarray((x > 0.0) & (x * x + y * y > 1.0))[()]

    def contains_closure(self, p):
        x, y = self._split(p)
        return np.asarray((x >= 0.0) & (x * x + y * y >= 1.0))[()]

    def boundary_distance(self, p):
        x, y = self._split(self._check_point(p))
        if not self.contains(p):
            raise GeometryError(f"point {p} outside domain")
        return float(min(x, math.hypot(x, y) - 1.0))

    def slice_at(self, t):
        if t <= 0.0:
            raise GeometryError(f"slice at t={t} is empty")
        if t >= 1.0:
            return SliceSet(t, ((-np.inf, np.inf),))
        yb = math.sqrt(1.0 - t * t)
        return SliceSet(t, ((-np.inf, -yb), (yb, np.inf)))

    def truncation_window(self, s):
        return WindowBox((0.0, -s), (2.0 * s, s))

    def boundary_points(self, window, n):
        th = np.linspace(-np.pi / 2, np.pi / 2, n)
        arc = np.column_stack([np.cos(th), np.sin(th)])
        ys = np.linspace(window.lower[1], window.upper[1], n)
        ys = ys[np.abs(ys) >= 1.0]
        wall = np.column_stack([np.zeros_like(ys), ys])
        return np.vstack([arc, wall]) if len(wall) else arc


class CylinderDomain(Domain):
    """R x B_1(0); one transverse dimension by default."""

    kind = "cylinder"

    def __init__(self, cross_dim=1):
        if cross_dim < 1:
            raise GeometryError("cylinder needs a transverse dimension >= 1")
        self.cross_dim = cross_dim
        self.dim = 1 + cross_dim

    def _norm_y(self, p):
        p = np.asarray(p, dtype=float)
        if p.ndim == 1:
            return np.linalg.norm(p[1:])
        return np.sqrt(np.sum(p[..., 1:] ** 2, axis=-1))

    def contains(self, p):
        return np.asarray(self._norm_y(p) < 1.0)[()]

    def contains_closure(self, p):
        return np.asarray(self._norm_y(p) <= 1.0)[()]

    def boundary_distance(self, p):
        p = self._check_point(p)
        if not self.contains(p):
            raise GeometryError(f"point {p} outside domain")
        return float(1.0 - self._norm_y(p))

    def slice_at(self, t):
        if self.cross_dim == 1:
            return SliceSet(t, ((-1.0, 1.0),))
        return SliceSet(t, body=regular_polygon(64), scale=1.0)

    def boundary_points(self, window, n):
        ts = np.linspace(window.lower[0], window.upper[0], n)
        return np.vstack([np.column_stack([ts, np.ones_like(ts)]),
                          np.column_stack([ts, -np.ones_like(ts)])])


class ConvexRing(Domain):
    """interior(A) minus closure(B) for planar convex bodies B inside A."""

    kind = "convex_ring"

    def __init__(self, outer, inner):
        if outer.dim != 2 or inner.dim != 2:
            raise GeometryError("convex ring needs planar bodies")
        if not np.all(outer._contains_2d(inner.vertices, 1.0, strict=True)):
            raise GeometryError("inner body closure must sit strictly inside the outer body")
        self.outer = outer
        self.inner = inner

    def contains(self, p):
        p = np.asarray(p, dtype=float)
        return np.asarray(self.outer.contains(p, strict=True)
                          & ~self.inner.contains(p, strict=False))[()]

    def contains_closure(self, p):
        p = np.asarray(p, dtype=float)
        return np.asarray(self.outer.contains(p, strict=False)
                          & ~self.inner.contains(p, strict=True))[()]

    def boundary_distance(self, p):
        q = self._check_point(p)
        if not self.contains(p):
            raise GeometryError(f"point {p} outside domain")
        return min(self.outer.boundary_distance(q), self.inner.boundary_distance(q))

    def slice_at(self, t):
        outer = _polygon_vertical_section(self.outer.vertices, t)
        if outer is None:
            raise GeometryError(f"slice at t={t} is empty")
        inner = _polygon_vertical_section(self.inner.vertices, t)
        if inner is None:
            return SliceSet(t, (outer,))
        (a, b), (c, d) = outer, inner
        intervals = tuple(iv for iv in ((a, c), (d, b)) if iv[0] < iv[1])
        if not intervals:
            raise GeometryError(f"slice at t={t} is empty")
        return SliceSet(t, intervals)

    def boundary_points(self, window, n):
        return np.vstack([self.outer.boundary_points(n), self.inner.boundary_points(n)])


def _polygon_vertical_section(vertices, t):
    """(ymin, ymax) of the section of a convex polygon with the line x=t."""
    ys = []
    m = len(vertices)
    for k in range(m):
        (ax, ay), (bx, by) = vertices[k], vertices[(k + 1) % m]
        if (ax - t) * (bx - t) <= 0.0 and ax != bx:
            ys.append(ay + (t - ax) * (by - ay) / (bx - ax))
    if not ys:
        return None
    lo, hi = min(ys), max(ys)
    return (lo, hi) if lo < hi else None


class ProfileRegion(Domain):
    """{(t, Y): t > 0, Y in f(t) * D} for a profile f and cross-section D."""

    kind = "profile"

    def __init__(self, profile: ProfileDomain):
        self.profile = profile
        self.dim = 1 + profile.cross_section.dim

    def contains(self, p):
        p = np.asarray(p, dtype=float)
        t = p[..., 0]
        y = p[..., 1:] if self.dim > 2 else p[..., 1]
        t_arr = np.atleast_1d(t)
        ok = t_arr > 0.0
        res = np.zeros_like(ok)
        if np.any(ok):
            scales = np.asarray([float(self.profile.f(tv)) for tv in t_arr[ok]])
            yy = np.atleast_1d(y)[ok]
            res[ok] = [self.profile.cross_section.contains(yv, scale=s)
                       for yv, s in zip(yy, scales)]
        return res[0] if np.ndim(t) == 0 else res.reshape(np.shape(t))

    def contains_closure(self, p):
        p = np.asarray(p, dtype=float)
        t, y = p[0], p[1:] if self.dim > 2 else p[1]
        if t < 0.0:
            return False
        if t == 0.0:
            return True  # the pinch point / end cap
        return bool(self.profile.cross_section.contains(y, scale=float(self.profile.f(t)), strict=False))

    def radius(self, t):
        return float(self.profile.f(t))

    def boundary_distance(self, p, sampling_h=None):
        """Lower bound on the distance to the lateral boundary.

        Computed from boundary samples at axial spacing ``sampling_h``
        (default: slice_gap/64) with a Lipschitz correction, so the reported
        value is within 2*sampling_h below the exact distance.
        """
        q = self._check_point(p)
        if not self.contains(q):
            raise GeometryError(f"point {p} outside domain")
        if self.dim != 2:
            raise GeometryError("profile boundary distance implemented for 1-d cross-sections")
        t, y = q
        f = self.profile.f
        body = self.profile.cross_section
        d_slice = body.boundary_distance(np.array([y]), scale=float(f(t)))
        h = sampling_h if sampling_h is not None else max(d_slice / 64.0, 1e-6)
        lo_t = max(t - d_slice, h / 2.0)
        ts = np.arange(lo_t, t + d_slice + h, h)
        lo, hi = body.vertices[0, 0], body.vertices[1, 0]
        best = d_slice
        prev = None
        lip = 0.0
        for tv in ts:
            fv = float(f(tv))
            for yb in (fv * lo, fv * hi):
                best = min(best, math.hypot(tv - t, yb - y))
            if prev is not None:
                lip = max(lip, abs(fv - prev) / h)
            prev = fv
        correction = 0.5 * h * math.sqrt(1.0 + (lip * max(abs(lo), abs(hi))) ** 2)
        return max(0.0, best - correction)

    def slice_at(self, t):
        if t <= 0.0:
            raise GeometryError(f"slice at t={t} is empty")
        scale = float(self.profile.f(t))
        body = self.profile.cross_section
        if body.dim == 1:
            lo, hi = body.vertices[:, 0]
            return SliceSet(t, ((scale * lo, scale * hi),))
        return SliceSet(t, body=body, scale=scale)

    def truncation_window(self, s):
        ts = np.linspace(1e-6, 2.0 * s, 257)
        r = max(float(self.profile.f(t)) for t in ts)
        w = max(abs(self.profile.cross_section.vertices).max(), 1.0)
        return WindowBox((0.0, -r * w), (2.0 * s, r * w))

    def boundary_points(self, window, n):
        if self.dim != 2:
            raise GeometryError("boundary sampling implemented for 1-d cross-sections")
        t0 = max(window.lower[0], 1e-9)
        ts = np.linspace(t0, window.upper[0], n)
        fv = np.asarray([float(self.profile.f(t)) for t in ts])
        lo, hi = self.profile.cross_section.vertices[:, 0]
        return np.vstack([np.column_stack([ts, fv * hi]), np.column_stack([ts, fv * lo])])


class RescaledProfile(Domain):
    """Zoomed slab ``{|t| < s/2, Y in r(t) * D}`` with r(t) = f(s + t f(s)) / f(s).

    This is the profile region seen in coordinates centered at (s, 0) and
    scaled by f(s); as the zoom point s grows it converges to the unit
    cylinder on compact windows.
    """

    kind = "rescaled_profile"

    def __init__(self, profile: ProfileDomain, s):
        if s <= 0.0:
            raise GeometryError("rescale parameter must be positive")
        self.profile = profile
        self.s = float(s)
        self.f_s = float(profile.f(s))
        if not self.f_s > 0.0:
            raise GeometryError("profile must be positive at the zoom point")
        self.dim = 1 + profile.cross_section.dim

    def radius(self, t):
        """Transverse scale factor at axial coordinate t (NaN where undefined)."""
        t = np.asarray(t, dtype=float)
        base = self.s + t * self.f_s
        with np.errstate(invalid="ignore"):
            r = np.where(base > 0.0, np.asarray(self.profile.f(np.maximum(base, 1e-300))), np.nan)
        return r / self.f_s

    def contains(self, p):
        p = np.asarray(p, dtype=float)
        t = p[..., 0]
        y = p[..., 1:] if self.dim > 2 else p[..., 1]
        r = self.radius(t)
        ok = (np.abs(t) < self.s / 2.0) & np.isfinite(r)
        t_arr, r_arr, ok_arr = np.atleast_1d(t), np.atleast_1d(r), np.atleast_1d(ok)
        y_arr = np.atleast_1d(y)
        res = np.zeros_like(ok_arr)
        for idx in np.nonzero(ok_arr)[0]:
            res[idx] = self.profile.cross_section.contains(y_arr[idx], scale=float(r_arr[idx]))
        return res[0] if np.ndim(t) == 0 else res.reshape(np.shape(t))

    def contains_closure(self, p):
        return self.contains(p)

    def boundary_points(self, window, n):
        if self.dim != 2:
            raise GeometryError("boundary sampling implemented for 1-d cross-sections")
        t0 = max(window.lower[0], -self.s / 2.0)
        t1 = min(window.upper[0], self.s / 2.0)
        ts = np.linspace(t0, t1, n)
        r = self.radius(ts)
        keep = np.isfinite(r)
        ts, r = ts[keep], r[keep]
        lo, hi = self.profile.cross_section.vertices[:, 0]
        return np.vstack([np.column_stack([ts, r * hi]), np.column_stack([ts, r * lo])])


def rescaled_domain(domain, s):
    """Zoom a profile region (or the strip) at axial coordinate s.

    A constant profile yields exactly the unit cylinder restricted to
    |t| < s/2.
    """
    if s <= 0.0:
        raise GeometryError("rescale parameter must be positive")
    if isinstance(domain, Strip):
        domain = strip_as_profile()
    if isinstance(domain, ProfileRegion):
        return RescaledProfile(domain.profile, s)
    if isinstance(domain, ProfileDomain):
        return RescaledProfile(domain, s)
    raise GeometryError(f"cannot rescale domain kind {getattr(domain, 'kind', None)!r}")


def strip_as_profile():
    """The strip viewed as the constant-profile region (pi/2) * (-1, 1)."""
    prof = ProfileDomain(lambda t: np.full_like(np.asarray(t, dtype=float), np.pi / 2),
                         interval_body(-1.0, 1.0),
                         fprime=lambda t: np.zeros_like(np.asarray(t, dtype=float)),
                         name="const_pi_over_2")
    return ProfileRegion(prof)


# ---------------------------------------------------------------------------
# Hausdorff distance
# ---------------------------------------------------------------------------

def hausdorff_distance(cloud_a, cloud_b, chunk=2048):
    """max of the two directed sup-min distances between point clouds."""
    a = np.atleast_2d(np.asarray(cloud_a, dtype=float))
    b = np.atleast_2d(np.asarray(cloud_b, dtype=float))
    if a.size == 0 or b.size == 0:
        raise GeometryError("hausdorff distance needs nonempty clouds")
    if a.shape[1] != b.shape[1]:
        raise GeometryError("clouds must share a dimension")

    def directed(p, q):
        worst = 0.0
        for k in range(0, len(p), chunk):
            blk = p[k:k + chunk]
            d2 = np.sum((blk[:, None, :] - q[None, :, :]) ** 2, axis=2)
            worst = max(worst, float(np.sqrt(d2.min(axis=1).max())))
        return worst

    return max(directed(a, b), directed(b, a))


# ---------------------------------------------------------------------------
# JSON configuration
# ---------------------------------------------------------------------------

def body_from_config(cfg) -> ConvexBody:
    if "vertices" in cfg:
        return ConvexBody(cfg["vertices"], symmetric=cfg.get("symmetric"))
    if "ngon" in cfg:
        return regular_polygon(int(cfg["ngon"]), float(cfg.get("radius", 1.0)))
    raise GeometryError(f"cannot build a convex body from {cfg!r}")


def domain_from_config(cfg) -> Domain:
    """Build a domain from a JSON-style mapping, e.g. {"kind": "strip"}."""
    if isinstance(cfg, str):
        cfg = {"kind": cfg}
    kind = cfg.get("kind")
    if kind == "strip":
        return Strip()
    if kind == "sector":
        return Sector()
    if kind == "sector_minus_slit":
        return SectorMinusSlit()
    if kind == "halfplane_minus_disk":
        return HalfplaneMinusDisk()
    if kind == "right_halfplane":
        return RightHalfplane()
    if kind == "cylinder":
        return CylinderDomain(int(cfg.get("cross_dim", 1)))
    if kind == "convex_ring":
        return ConvexRing(body_from_config(cfg["A"]), body_from_config(cfg["B"]))
    if kind == "profile":
        body = body_from_config(cfg["D"]) if "D" in cfg else interval_body()
        prof = ProfileDomain(cfg["f"], body, profile_kind=cfg.get("profile_kind",
                                                                  "lipschitz-concave-derivative"))
        return ProfileRegion(prof)
    raise GeometryError(f"unknown domain kind {kind!r}")
