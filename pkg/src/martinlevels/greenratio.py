"""Finite-difference Dirichlet solver, discrete Green functions, and the
Green-ratio construction of positive harmonic limit functions.

The ratio pipeline places a delta source at escaping poles x_n = (s_n, 0),
solves the 5-point Laplace problem with zero boundary data on the domain
truncated at axial coordinate 2 s_n, and normalizes each Green field by its
value at a fixed reference point x_0.  Successive normalized ratios
u_n = G(., x_n)/G(x_0, x_n) converge on a probe window; the Cauchy
diagnostic max |u_{n+1} - u_n| certifies the truncation empirically.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .fields import ScalarField
from .geometry import ConvexRing, Domain, GeometryError, WindowBox

EXTERIOR, INTERIOR, BOUNDARY = 0, 1, 2


class SolverError(RuntimeError):
    pass


@dataclass
class Grid2D:
    """Uniform grid on a window with a per-node domain mask.

    ``mask`` is 0 exterior, 1 interior, 2 boundary (Dirichlet).  Boundary
    nodes are closure points of the domain adjacent to an interior node, so
    walls that align with grid lines carry their data exactly; artificial
    window edges cutting through the domain become zero-Dirichlet caps.

    The per-axis spacings hx, hy equal the requested h up to corner
    snapping (windows keep their exact corners); the Laplacian stencil uses
    them separately, so the snap does not bias the operator.
    """

    domain: Domain
    window: WindowBox
    hx: float
    hy: float
    xs: np.ndarray
    ys: np.ndarray
    mask: np.ndarray

    @property
    def h(self):
        return max(self.hx, self.hy)

    @property
    def shape(self):
        return self.mask.shape

    def node_index(self, p):
        i = int(round((p[0] - self.xs[0]) / self.hx))
        j = int(round((p[1] - self.ys[0]) / self.hy))
        return i, j

    def node_xy(self, i, j):
        return float(self.xs[i]), float(self.ys[j])

    def interior_count(self):
        return int(np.count_nonzero(self.mask == INTERIOR))


def build_grid(domain, window, h):
    """Classify window nodes against the domain at spacing ~h.

    Raises when the interior is empty or disconnected, or when h is too
    coarse for the window (h must be <= extent / 16).
    """
    if h <= 0.0 or h > min(window.extent()) / 16.0:
        raise GeometryError(f"grid spacing h={h} too coarse for window extent {window.extent()}")
    xs, ys = window.lattice(h)[:2]
    hx = float((xs[-1] - xs[0]) / (len(xs) - 1))
    hy = float((ys[-1] - ys[0]) / (len(ys) - 1))
    X, Y = np.meshgrid(xs, ys, indexing="ij")
    pts = np.stack([X, Y], axis=-1)
    in_closure = np.asarray(domain.contains_closure(pts)) \
        if _vectorizable(domain) else _contains_loop(domain.contains_closure, pts)
    in_open = np.asarray(domain.contains(pts)) \
        if _vectorizable(domain) else _contains_loop(domain.contains, pts)

    interior = in_open.copy()
    interior[0, :] = interior[-1, :] = False
    interior[:, 0] = interior[:, -1] = False
    interior[1:-1, 1:-1] &= (in_closure[2:, 1:-1] & in_closure[:-2, 1:-1]
                             & in_closure[1:-1, 2:] & in_closure[1:-1, :-2])
    neighbor_interior = np.zeros_like(interior)
    neighbor_interior[1:, :] |= interior[:-1, :]
    neighbor_interior[:-1, :] |= interior[1:, :]
    neighbor_interior[:, 1:] |= interior[:, :-1]
    neighbor_interior[:, :-1] |= interior[:, 1:]
    boundary = in_closure & ~interior & neighbor_interior

    mask = np.zeros(interior.shape, dtype=np.int8)
    mask[interior] = INTERIOR
    mask[boundary] = BOUNDARY
    n_int = int(np.count_nonzero(interior))
    if n_int == 0:
        raise GeometryError("grid has no interior nodes")
    if not _connected(interior):
        raise GeometryError("grid interior is disconnected")
    return Grid2D(domain=domain, window=window, hx=hx, hy=hy, xs=xs, ys=ys, mask=mask)


def _vectorizable(domain):
    try:
        probe = np.zeros((2, 2, getattr(domain, "dim", 2)))
        res = domain.contains(probe)
        return np.shape(res) == (2, 2)
    except Exception:
        return False


def _contains_loop(fn, pts):
    flat = pts.reshape(-1, pts.shape[-1])
    out = np.fromiter((bool(fn(p)) for p in flat), dtype=bool, count=len(flat))
    return out.reshape(pts.shape[:-1])


def _connected(interior):
    todo = np.argwhere(interior)
    if len(todo) == 0:
        return False
    seen = np.zeros_like(interior)
    stack = [tuple(todo[0])]
    seen[tuple(todo[0])] = True
    nx, ny = interior.shape
    while stack:
        i, j = stack.pop()
        for di, dj in ((1, 0), (-1, 0), (0, 1), (0, -1)):
            a, b = i + di, j + dj
            if 0 <= a < nx and 0 <= b < ny and interior[a, b] and not seen[a, b]:
                seen[a, b] = True
                stack.append((a, b))
    return bool(np.count_nonzero(seen) == np.count_nonzero(interior))


class GridField(ScalarField):
    """Node values on a grid; bilinear interpolation between nodes."""

    derivative_kind = "finite-difference"

    def __init__(self, grid: Grid2D, values, name="grid"):
        self.grid = grid
        self.domain = grid.domain
        self.values = np.asarray(values, dtype=float)
        self.name = name
        self.default_window = grid.window

    def value(self, p, check=True):
        p = np.asarray(p, dtype=float)
        if p.ndim > 1:
            return np.asarray([self.value(q, check=check) for q in p.reshape(-1, 2)]) \
                .reshape(p.shape[:-1])
        g = self.grid
        fx = (float(p[0]) - g.xs[0]) / g.hx
        fy = (float(p[1]) - g.ys[0]) / g.hy
        i = int(np.clip(np.floor(fx), 0, len(g.xs) - 2))
        j = int(np.clip(np.floor(fy), 0, len(g.ys) - 2))
        if check and not (-1e-9 <= fx <= len(g.xs) - 1 + 1e-9
                          and -1e-9 <= fy <= len(g.ys) - 1 + 1e-9):
            raise GeometryError(f"point {p} outside grid window")
        tx, ty = fx - i, fy - j
        v = self.values
        return float((1 - tx) * (1 - ty) * v[i, j] + tx * (1 - ty) * v[i + 1, j]
                     + (1 - tx) * ty * v[i, j + 1] + tx * ty * v[i + 1, j + 1])

    def gradient(self, p):
        h = self.grid.h
        p = np.asarray(p, dtype=float)
        return np.array([
            (self.value(p + [h, 0.0]) - self.value(p - [h, 0.0])) / (2 * h),
            (self.value(p + [0.0, h]) - self.value(p - [0.0, h])) / (2 * h)])

    def hessian(self, p):
        h = self.grid.h
        p = np.asarray(p, dtype=float)
        v0 = self.value(p)
        fxx = (self.value(p + [h, 0]) - 2 * v0 + self.value(p - [h, 0])) / h ** 2
        fyy = (self.value(p + [0, h]) - 2 * v0 + self.value(p - [0, h])) / h ** 2
        fxy = (self.value(p + [h, h]) - self.value(p + [h, -h])
               - self.value(p + [-h, h]) + self.value(p + [-h, -h])) / (4 * h ** 2)
        return np.array([[fxx, fxy], [fxy, fyy]])


def _apply_neg_laplacian(v, interior, hx, hy):
    av = np.zeros_like(v)
    av[1:-1, 1:-1] = ((2.0 * v[1:-1, 1:-1] - v[2:, 1:-1] - v[:-2, 1:-1]) / hx ** 2
                      + (2.0 * v[1:-1, 1:-1] - v[1:-1, 2:] - v[1:-1, :-2]) / hy ** 2)
    av[~interior] = 0.0
    return av


def solve_dirichlet(grid, boundary_values=None, source=None, tol=1e-10, maxiter=10 ** 6):
    """Solve the 5-point Laplace problem -lap u = source with Dirichlet data.

    Conjugate gradients with (constant) diagonal preconditioning on the
    interior unknowns; stops at relative residual <= tol or raises
    :class:`SolverError` with the residual at the iteration cap.  With zero
    source the discrete maximum principle bounds interior values by the
    boundary data.
    """
    interior = grid.mask == INTERIOR
    boundary = grid.mask == BOUNDARY
    hx, hy = grid.hx, grid.hy
    bdata = np.zeros(grid.shape)
    if boundary_values is not None:
        if callable(boundary_values):
            for i, j in zip(*np.nonzero(boundary)):
                bdata[i, j] = float(boundary_values((grid.xs[i], grid.ys[j])))
        else:
            bdata = np.where(boundary, np.asarray(boundary_values, dtype=float), 0.0)
    rhs = np.zeros(grid.shape)
    if source is not None:
        rhs = np.where(interior, np.asarray(source, dtype=float), 0.0)
    # fold Dirichlet neighbors into the right-hand side
    fold = np.zeros(grid.shape)
    bvals = np.where(boundary, bdata, 0.0)
    fold[1:-1, 1:-1] = ((bvals[2:, 1:-1] + bvals[:-2, 1:-1]) / hx ** 2
                        + (bvals[1:-1, 2:] + bvals[1:-1, :-2]) / hy ** 2)
    rhs = np.where(interior, rhs + fold, 0.0)

    u = _cg(lambda v: _apply_neg_laplacian(v, interior, hx, hy), rhs, interior,
            diag=2.0 / hx ** 2 + 2.0 / hy ** 2, tol=tol, maxiter=maxiter)
    u[boundary] = bdata[boundary]
    return GridField(grid, u)


def _cg(apply_A, b, interior, diag, tol, maxiter):
    u = np.zeros_like(b)
    r = b.copy()
    r[~interior] = 0.0
    b_norm = float(np.sqrt(np.sum(r * r)))
    if b_norm == 0.0:
        return u
    z = r / diag
    p = z.copy()
    rz = float(np.sum(r * z))
    for _ in range(maxiter):
        if float(np.sqrt(np.sum(r * r))) <= tol * b_norm:
            return u
        ap = apply_A(p)
        alpha = rz / float(np.sum(p * ap))
        u += alpha * p
        r -= alpha * ap
        z = r / diag
        rz_new = float(np.sum(r * z))
        p = z + (rz_new / rz) * p
        rz = rz_new
    res = float(np.sqrt(np.sum(r * r))) / b_norm
    raise SolverError(f"conjugate gradients hit the iteration cap; relative residual {res:.3e}")


def green_function(grid, pole, tol=1e-12):
    """Discrete Green field: -lap G = delta_pole / h^2, zero Dirichlet data.

    Solved tighter than the generic Dirichlet tolerance so that the
    symmetry G_p(q) = G_q(p) holds to ~1e-12 relative.
    """
    i, j = grid.node_index(pole)
    if not (0 <= i < grid.shape[0] and 0 <= j < grid.shape[1]) or grid.mask[i, j] != INTERIOR:
        raise GeometryError(f"pole {pole} does not snap to an interior node")
    source = np.zeros(grid.shape)
    source[i, j] = 1.0 / (grid.hx * grid.hy)
    fld = solve_dirichlet(grid, boundary_values=None, source=source, tol=tol)
    fld.name = f"green[{pole}]"
    return fld


# ---------------------------------------------------------------------------
# Martin ratio pipeline
# ---------------------------------------------------------------------------

@dataclass
class MartinApproxConfig:
    """Reference point, escaping pole sequence, and probe window.

    Poles sit on the axis at (s, 0) with strictly increasing s; the domain
    is truncated at axial coordinate 2 s per pole (and at +-s transversely
    for domains unbounded in y), with zero data on the artificial caps.
    """

    x0: tuple
    poles: tuple
    probe_window: WindowBox
    solver_tol: float = 1e-12
    probe_shape: tuple = (25, 17)

    def __post_init__(self):
        s = tuple(float(v) for v in self.poles)
        if len(s) < 1 or any(b <= a for a, b in zip(s, s[1:])) or s[0] <= 0.0:
            raise GeometryError("poles must be strictly increasing and positive")
        object.__setattr__(self, "poles", s)


@dataclass
class MartinIterate:
    index: int
    pole: float
    ratio: GridField
    grid: Grid2D


@dataclass
class MartinRatioResult:
    iterates: list
    cauchy: list                       # eps_n = max |u_{n+1} - u_n| on the probe lattice
    final: GridField
    probe_points: np.ndarray
    closed_form_error: float = None


def probe_lattice(window, shape=(25, 17)):
    xs = np.linspace(window.lower[0], window.upper[0], shape[0])
    ys = np.linspace(window.lower[1], window.upper[1], shape[1])
    X, Y = np.meshgrid(xs, ys, indexing="ij")
    return np.stack([X.ravel(), Y.ravel()], axis=-1)


def martin_ratio(domain, cfg: MartinApproxConfig, h):
    """Normalized Green ratios along the pole sequence plus diagnostics.

    Each iterate satisfies u_n(x0) = 1 exactly (normalization by the
    interpolated Green value); the final iterate is the limit approximation
    and the Cauchy diagnostics bound the observed inter-iterate movement.
    """
    if not domain.contains(np.asarray(cfg.x0, dtype=float)):
        raise GeometryError(f"reference point {cfg.x0} not inside the domain")
    probes = probe_lattice(cfg.probe_window, cfg.probe_shape)
    iterates = []
    samples = []
    for n, s in enumerate(cfg.poles):
        window = domain.truncation_window(s)
        if not (window.contains(cfg.probe_window.lower) and window.contains(cfg.probe_window.upper)):
            raise GeometryError(f"probe window not inside truncation window for pole {s}")
        if not window.contains((s, 0.0), strict=True):
            raise GeometryError(f"pole {s} not inside its truncation window")
        grid = build_grid(domain, window, h)
        G = green_function(grid, (s, 0.0), tol=cfg.solver_tol)
        g0 = G.value(np.asarray(cfg.x0, dtype=float))
        if g0 <= 0.0:
            raise SolverError(f"nonpositive Green value at the reference point for pole {s}")
        ratio = GridField(grid, G.values / g0, name=f"ratio[{s}]")
        iterates.append(MartinIterate(index=n, pole=s, ratio=ratio, grid=grid))
        samples.append(np.asarray([ratio.value(p) for p in probes]))
    cauchy = [float(np.max(np.abs(b - a))) for a, b in zip(samples, samples[1:])]
    return MartinRatioResult(iterates=iterates, cauchy=cauchy,
                             final=iterates[-1].ratio, probe_points=probes)


# ---------------------------------------------------------------------------
# Superlevel node clouds
# ---------------------------------------------------------------------------

def superlevel_nodes(fld: GridField, c, window=None):
    """Grid nodes (interior or boundary) where the field exceeds c."""
    g = fld.grid
    member = (g.mask != EXTERIOR) & (fld.values > c)
    return _clip_nodes(g, member, window)


def superlevel_of_iterate(iterate: MartinIterate, c, window=None):
    """Node cloud of {u_n > c} for one normalized ratio iterate.

    Empty levels return an empty cloud (reported, not an error).
    """
    if c <= 0.0:
        raise GeometryError("superlevel threshold must be positive")
    return superlevel_nodes(iterate.ratio, c, window=window)


def superlevel_boundary_nodes(fld: GridField, c, window=None, extra_member=None):
    """Region-boundary nodes of {values > c} (union an extra node mask).

    A member node belongs to the discrete region boundary when one of its
    4-neighbors is not a member; these are the points tested by the hull
    certificate.
    """
    g = fld.grid
    member = (g.mask != EXTERIOR) & (fld.values > c)
    if extra_member is not None:
        member = member | extra_member
    edge = np.zeros_like(member)
    inner = member[1:-1, 1:-1]
    edge[1:-1, 1:-1] = inner & ~(member[2:, 1:-1] & member[:-2, 1:-1]
                                 & member[1:-1, 2:] & member[1:-1, :-2])
    edge[0, :] = member[0, :]
    edge[-1, :] = member[-1, :]
    edge[:, 0] |= member[:, 0]
    edge[:, -1] |= member[:, -1]
    return _clip_nodes(g, edge, window)


def _clip_nodes(grid, member, window):
    ii, jj = np.nonzero(member)
    pts = np.column_stack([grid.xs[ii], grid.ys[jj]])
    if window is not None and len(pts):
        keep = np.array([window.contains(p) for p in pts])
        pts = pts[keep]
    return pts


def ring_dirichlet_data(grid):
    """Boundary data for a convex-ring grid: 1 on the inner wall, 0 outside."""
    if not isinstance(grid.domain, ConvexRing):
        raise GeometryError("ring data needs a convex-ring grid")
    inner = grid.domain.inner
    data = np.zeros(grid.shape)
    for i, j in zip(*np.nonzero(grid.mask == BOUNDARY)):
        p = np.array([grid.xs[i], grid.ys[j]])
        near_inner = inner.contains(p, strict=False)
        if not near_inner:
            for di, dj in ((1, 0), (-1, 0), (0, 1), (0, -1)):
                a, b = i + di, j + dj
                if 0 <= a < grid.shape[0] and 0 <= b < grid.shape[1]:
                    if inner.contains(np.array([grid.xs[a], grid.ys[b]]), strict=True):
                        near_inner = True
                        break
        data[i, j] = 1.0 if near_inner else 0.0
    return data


def inner_body_nodes(grid):
    """Mask of grid nodes lying in the closed inner body of a ring grid."""
    if not isinstance(grid.domain, ConvexRing):
        raise GeometryError("needs a convex-ring grid")
    X, Y = np.meshgrid(grid.xs, grid.ys, indexing="ij")
    pts = np.stack([X, Y], axis=-1)
    return grid.domain.inner.contains(pts, strict=False)
