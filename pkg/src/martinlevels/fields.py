"""Scalar fields: closed-form positive harmonic functions with analytic
derivatives, cylinder modes, and conformal-map constructors.

All closed forms are the real part of an explicit holomorphic function, so
values, gradients, and Hessians come from F, F', F'' via the Cauchy-Riemann
relations:

    u = Re F,  grad u = (Re F', -Im F'),  H_u = [[Re F'', -Im F''],
                                                 [-Im F'', -Re F'']].

Value oracles preserve the floating dtype of their input; passing
``np.longdouble`` points evaluates in extended precision, which the
5-point harmonicity check relies on at small steps.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .geometry import (CylinderDomain, HalfplaneMinusDisk, RightHalfplane,
                       Sector, SectorMinusSlit, Strip, WindowBox)


class FieldError(ValueError):
    pass


class SingularPointError(FieldError):
    """Evaluation requested on or too close to a branch/singular point."""


#: half-width of the excluded tube around the branch segment of sqrt(z^4 - 1)
BRANCH_GUARD = 1e-8


def _complex_of(p, dtype=None):
    p = np.asarray(p)
    if dtype is None:
        dtype = np.clongdouble if p.dtype == np.longdouble else complex
    return p[..., 0].astype(dtype) + 1j * p[..., 1].astype(dtype)


class ScalarField:
    """Evaluation contract: value, gradient, Hessian on a domain."""

    derivative_kind = "analytic"
    name = None
    domain = None
    #: window used by default for boundary sampling and level extraction
    default_window = None

    def value(self, p, check=True):
        raise NotImplementedError

    def boundary_value(self, p):
        """Continuous extension of the value to the boundary (no domain check)."""
        return self.value(p, check=False)

    def gradient(self, p):
        raise NotImplementedError

    def hessian(self, p):
        raise NotImplementedError

    def __call__(self, p):
        return self.value(p)

    def _require_inside(self, p):
        inside = self.domain.contains(np.asarray(p, dtype=float))
        if not np.all(inside):
            raise FieldError(f"point(s) {np.asarray(p, float)} outside domain of {self.name!r}")


class HolomorphicReField(ScalarField):
    """u = Re(F) for holomorphic F with explicit first and second derivatives."""

    def __init__(self, domain, F, dF, d2F, name, default_window=None, guard=None):
        self.domain = domain
        self._F = F
        self._dF = dF
        self._d2F = d2F
        self.name = name
        self.default_window = default_window
        self._guard = guard

    def value(self, p, check=True):
        if check:
            self._require_inside(p)
        z = _complex_of(p)
        return np.real(self._F(z))[()]

    def gradient(self, p):
        self._require_inside(p)
        if self._guard is not None:
            self._guard(_complex_of(np.asarray(p, dtype=float)))
        w = self._dF(_complex_of(p))
        return np.array([np.real(w), -np.imag(w)], dtype=float)

    def hessian(self, p):
        self._require_inside(p)
        if self._guard is not None:
            self._guard(_complex_of(np.asarray(p, dtype=float)))
        w = self._d2F(_complex_of(p))
        a, b = float(np.real(w)), float(-np.imag(w))
        return np.array([[a, b], [b, -a]])


def _slit_guard(z):
    """Reject points whose z^4 lies within BRANCH_GUARD of the segment [0, 1]."""
    w = z ** 4
    x, y = float(np.real(w)), float(np.imag(w))
    if x < 0.0:
        d = math.hypot(x, y)
    elif x > 1.0:
        d = math.hypot(x - 1.0, y)
    else:
        d = abs(y)
    if d < BRANCH_GUARD:
        raise SingularPointError(f"z={complex(z):g} is within the branch guard tube (z^4 near [0, 1])")


def strip_martin():
    """sinh(x) cos(y) on the half-strip (0, inf) x (-pi/2, pi/2)."""
    return HolomorphicReField(Strip(), np.sinh, np.cosh, np.sinh, "strip",
                              default_window=WindowBox((0.0, -np.pi / 2), (3.0, np.pi / 2)))


def exterior_martin():
    """x - x/(x^2 + y^2) on the half-plane minus the closed unit disk."""
    return HolomorphicReField(HalfplaneMinusDisk(),
                              lambda z: z - 1.0 / z,
                              lambda z: 1.0 + z ** -2,
                              lambda z: -2.0 * z ** -3,
                              "exterior",
                              default_window=WindowBox((0.0, -3.0), (6.0, 3.0)))


def slit_sector_martin():
    """Re sqrt(z^4 - 1) on the quarter sector minus the slit [0, 1].

    On the open domain, z^4 - 1 avoids the ray (-inf, 0], so the principal
    square root is the positive branch; derivatives are guarded near the
    slit where 1/sqrt blows up or flips sign.
    """
    def F(z):
        return np.sqrt(z ** 4 - 1.0)

    def dF(z):
        return 2.0 * z ** 3 / np.sqrt(z ** 4 - 1.0)

    def d2F(z):
        w = np.sqrt(z ** 4 - 1.0)
        return 6.0 * z ** 2 / w - 4.0 * z ** 6 / w ** 3

    return HolomorphicReField(SectorMinusSlit(), F, dF, d2F, "slit_sector",
                              default_window=WindowBox((0.0, -4.0), (4.0, 4.0)),
                              guard=_slit_guard)


def halfplane_v():
    """Re(z^2) = x^2 - y^2, the comparison field on the quarter sector."""
    return HolomorphicReField(Sector(),
                              lambda z: z ** 2,
                              lambda z: 2.0 * z,
                              lambda z: 2.0 * np.ones_like(z),
                              "halfplane_v",
                              default_window=WindowBox((0.0, -4.0), (4.0, 4.0)))


def halfplane_coordinate():
    """u = x on the right half-plane (flat level lines, product structure)."""
    return HolomorphicReField(RightHalfplane(),
                              lambda z: z,
                              lambda z: np.ones_like(z),
                              lambda z: np.zeros_like(z),
                              "halfplane_x",
                              default_window=WindowBox((0.0, -2.0), (4.0, 2.0)))


# ---------------------------------------------------------------------------
# Cylinder modes
# ---------------------------------------------------------------------------

def bessel_j0(x, terms=40):
    """J_0 by its power series; accurate for |x| <= ~10 at these term counts."""
    x = np.asarray(x, dtype=float)
    s = np.ones_like(x)
    term = np.ones_like(x)
    for k in range(1, terms):
        term = term * (-(x / 2.0) ** 2) / k ** 2
        s = s + term
    return s[()]


def first_j0_zero(lo=2.0, hi=3.0, iters=80):
    """First zero of J_0 by bisection on the series evaluation."""
    flo = bessel_j0(lo)
    for _ in range(iters):
        mid = 0.5 * (lo + hi)
        if flo * bessel_j0(mid) <= 0.0:
            hi = mid
        else:
            lo, flo = mid, bessel_j0(mid)
    return 0.5 * (lo + hi)


@dataclass(frozen=True)
class CylinderMode:
    """Principal Dirichlet eigenpair of the cross-section plus coefficients.

    Cylinder positive harmonic functions have the separated form
    ``(A e^{sqrt(lam) t} + B e^{-sqrt(lam) t}) phi(Y)`` with A, B >= 0.
    """

    lam: float
    phi: object
    dphi: object
    d2phi: object
    A: float = 1.0
    B: float = 0.0
    cross_dim: int = 1

    def __post_init__(self):
        if self.A < 0.0 or self.B < 0.0 or self.A + self.B <= 0.0:
            raise FieldError("mode coefficients need A, B >= 0 and A + B > 0")

    def axial(self, t, dtype=float):
        rt = np.sqrt(np.asarray(self.lam, dtype=dtype))
        t = np.asarray(t, dtype=dtype)
        return self.A * np.exp(rt * t) + self.B * np.exp(-rt * t)

    def axial_d(self, t):
        rt = math.sqrt(self.lam)
        return rt * (self.A * np.exp(rt * t) - self.B * np.exp(-rt * t))


def interval_mode(A=1.0, B=0.0):
    """d = 1 eigenpair on (-1, 1): lam = pi^2/4, phi = cos(pi y / 2)."""
    lam = (np.pi / 2) ** 2
    return CylinderMode(lam=lam,
                        phi=lambda y: np.cos(np.pi * np.asarray(y) / 2),
                        dphi=lambda y: -(np.pi / 2) * np.sin(np.pi * np.asarray(y) / 2),
                        d2phi=lambda y: -lam * np.cos(np.pi * np.asarray(y) / 2),
                        A=A, B=B, cross_dim=1)


def disk_mode(A=1.0, B=0.0):
    """d = 2 eigenpair on the unit disk: lam = j0^2, phi = J_0(j0 |Y|)."""
    j0 = first_j0_zero()
    lam = j0 * j0

    def phi(y):
        r = np.linalg.norm(np.atleast_1d(np.asarray(y, dtype=float)), axis=-1)
        return bessel_j0(j0 * r)

    return CylinderMode(lam=lam, phi=phi, dphi=None, d2phi=None, A=A, B=B, cross_dim=2)


class CylinderModeField(ScalarField):
    """(A e^{sqrt(lam) t} + B e^{-sqrt(lam) t}) phi(y) on R x (-1, 1)."""

    def __init__(self, mode: CylinderMode = None, A=None, B=None):
        if mode is None:
            mode = interval_mode(A if A is not None else 1.0, B if B is not None else 1.0)
        if mode.cross_dim != 1:
            raise FieldError("field evaluation is implemented for 1-d cross-sections")
        self.mode = mode
        self.domain = CylinderDomain(1)
        self.name = f"cylinder:A={mode.A:g},B={mode.B:g}"
        self.default_window = WindowBox((-2.0, -1.0), (2.0, 1.0))

    def value(self, p, check=True):
        if check:
            self._require_inside(p)
        p = np.asarray(p)
        dtype = np.longdouble if p.dtype == np.longdouble else float
        t = p[..., 0].astype(dtype)
        y = p[..., 1].astype(dtype)
        return (self.mode.axial(t, dtype=dtype) * self.mode.phi(y))[()]

    def gradient(self, p):
        self._require_inside(p)
        t, y = float(p[0]), float(p[1])
        return np.array([self.mode.axial_d(t) * self.mode.phi(y),
                         self.mode.axial(t) * self.mode.dphi(y)], dtype=float)

    def hessian(self, p):
        self._require_inside(p)
        t, y = float(p[0]), float(p[1])
        v = self.mode.axial(t) * self.mode.phi(y)
        vtt = self.mode.lam * v
        vty = self.mode.axial_d(t) * self.mode.dphi(y)
        vyy = self.mode.axial(t) * self.mode.d2phi(y)
        return np.array([[vtt, vty], [vty, vyy]])


def cylinder_martin(A=1.0, B=0.0):
    return CylinderModeField(interval_mode(A, B))


# ---------------------------------------------------------------------------
# Field registry
# ---------------------------------------------------------------------------

def field_from_name(name) -> ScalarField:
    """Resolve a registry name: strip | exterior | slit_sector | halfplane_v
    | halfplane_x | cylinder:A=..,B=.. ."""
    base, _, params = name.partition(":")
    registry = {
        "strip": strip_martin,
        "exterior": exterior_martin,
        "slit_sector": slit_sector_martin,
        "halfplane_v": halfplane_v,
        "halfplane_x": halfplane_coordinate,
    }
    if base in registry:
        return registry[base]()
    if base == "cylinder":
        kw = {"A": 1.0, "B": 0.0}
        if params:
            for item in params.split(","):
                key, _, val = item.partition("=")
                kw[key.strip()] = float(val)
        return cylinder_martin(**kw)
    raise FieldError(f"unknown field name {name!r}")


# ---------------------------------------------------------------------------
# Pointwise checks
# ---------------------------------------------------------------------------

def harmonicity_residual(field, p, h):
    """5-point discrete Laplacian of the value oracle at p, step h.

    The stencil is evaluated in extended precision when available; in plain
    float64 the per-value rounding of ~1e-16/h^2 would swamp the O(h^2)
    truncation term already at h = 1e-4.
    """
    p = np.asarray(p, dtype=float)
    ex = np.array([1.0, 0.0])
    ey = np.array([0.0, 1.0])
    for q in (p + 2 * h * ex, p - 2 * h * ex, p + 2 * h * ey, p - 2 * h * ey):
        if not field.domain.contains(q):
            raise FieldError(f"stencil of radius 2h around {p} leaves the domain")
    dtype = np.longdouble if field.derivative_kind == "analytic" else float
    pl = p.astype(dtype)
    hl = dtype(h)
    exl, eyl = ex.astype(dtype), ey.astype(dtype)
    total = (field.value(pl + hl * exl, check=False) + field.value(pl - hl * exl, check=False)
             + field.value(pl + hl * eyl, check=False) + field.value(pl - hl * eyl, check=False)
             - 4.0 * field.value(pl, check=False))
    return float(total / hl ** 2)


@dataclass
class BoundaryReport:
    max_abs: float
    worst_point: tuple
    n_samples: int
    tol: float

    @property
    def passed(self):
        return self.max_abs <= self.tol


def boundary_vanishing(field, n_samples=200, tol=1e-8, window=None):
    """Max |u| over boundary samples, via the continuous extension of u."""
    window = window or field.default_window
    pts = field.domain.boundary_points(window, n_samples)
    worst, worst_p = -1.0, None
    for q in pts:
        v = abs(float(field.boundary_value(q)))
        if v > worst:
            worst, worst_p = v, tuple(q)
    return BoundaryReport(max_abs=worst, worst_point=worst_p, n_samples=len(pts), tol=tol)


def fd_gradient(field, p, h=None):
    p = np.asarray(p, dtype=float)
    h = h or max(1e-5, 1e-5 * float(np.linalg.norm(p)))
    g = np.zeros(p.size)
    for k in range(p.size):
        e = np.zeros(p.size)
        e[k] = h
        g[k] = (field.value(p + e, check=False) - field.value(p - e, check=False)) / (2 * h)
    return g


def fd_hessian(field, p, h=None):
    p = np.asarray(p, dtype=float)
    h = h or max(1e-4, 1e-4 * float(np.linalg.norm(p)))
    n = p.size
    H = np.zeros((n, n))
    f0 = field.value(p, check=False)
    for i in range(n):
        ei = np.zeros(n); ei[i] = h
        H[i, i] = (field.value(p + ei, check=False) - 2 * f0 + field.value(p - ei, check=False)) / h ** 2
        for j in range(i + 1, n):
            ej = np.zeros(n); ej[j] = h
            H[i, j] = H[j, i] = (field.value(p + ei + ej, check=False)
                                 - field.value(p + ei - ej, check=False)
                                 - field.value(p - ei + ej, check=False)
                                 + field.value(p - ei - ej, check=False)) / (4 * h ** 2)
    return H


# ---------------------------------------------------------------------------
# Conformal maps
# ---------------------------------------------------------------------------

@dataclass
class ConformalMap:
    """Forward/inverse holomorphic oracles with complex derivatives."""

    forward: object
    dforward: object
    inverse: object
    source: str = ""
    target: str = ""
    d2forward: object = None

    def check_roundtrip(self, points, tol=1e-10):
        """max |inverse(forward(z)) - z| over sample points."""
        worst = 0.0
        for z in points:
            z = complex(z)
            worst = max(worst, abs(self.inverse(self.forward(z)) - z))
            if abs(self.dforward(z)) == 0.0:
                raise FieldError(f"map derivative vanishes at {z}")
        if worst > tol:
            raise FieldError(f"inverse o forward deviates from identity by {worst:.3e}")
        return worst


def map_sector_slit_to_halfplane():
    return ConformalMap(forward=lambda z: np.sqrt(z ** 4 - 1.0),
                        dforward=lambda z: 2.0 * z ** 3 / np.sqrt(z ** 4 - 1.0),
                        d2forward=lambda z: (6.0 * z ** 2 / np.sqrt(z ** 4 - 1.0)
                                             - 4.0 * z ** 6 / np.sqrt(z ** 4 - 1.0) ** 3),
                        inverse=lambda w: (w ** 2 + 1.0) ** 0.25,
                        source="sector_minus_slit", target="right_halfplane")


def map_strip_to_halfplane():
    return ConformalMap(forward=np.sinh, dforward=np.cosh, d2forward=np.sinh,
                        inverse=np.arcsinh,
                        source="strip", target="right_halfplane")


def map_halfplane_identity():
    return ConformalMap(forward=lambda z: z,
                        dforward=lambda z: np.ones_like(np.asarray(z)) + 0j,
                        d2forward=lambda z: np.zeros_like(np.asarray(z)) + 0j,
                        inverse=lambda w: w,
                        source="right_halfplane", target="right_halfplane")


def _mobius(z):
    return (1.0 - z) / (1.0 + z)


def map_disc_to_halfplane():
    # (1 - z)/(1 + z) is an involution exchanging the unit disc and Re w > 0
    return ConformalMap(forward=_mobius,
                        dforward=lambda z: -2.0 / (1.0 + z) ** 2,
                        inverse=_mobius,
                        source="disc", target="right_halfplane")


def map_disc_to_strip():
    return ConformalMap(forward=lambda z: np.arcsinh(_mobius(z)),
                        dforward=lambda z: (-2.0 / (1.0 + z) ** 2) / np.sqrt(1.0 + _mobius(z) ** 2),
                        inverse=lambda w: _mobius(np.sinh(w)),
                        source="disc", target="strip")


def map_disc_to_halfplane_minus_disk():
    # Joukowski J(z) = z - 1/z maps the exterior region onto Re w > 0
    def j_inverse(w):
        return 0.5 * (w + np.sqrt(w * w + 4.0))

    return ConformalMap(forward=lambda z: j_inverse(_mobius(z)),
                        dforward=lambda z: (-2.0 / (1.0 + z) ** 2) / (1.0 + j_inverse(_mobius(z)) ** -2),
                        inverse=lambda w: _mobius(w - 1.0 / w),
                        source="disc", target="halfplane_minus_disk")


def conformal_pullback(cmap: ConformalMap, domain=None, name=None) -> ScalarField:
    """Field u = Re(psi) for a map psi onto the right half-plane.

    The half-plane coordinate Re(w) is the reference positive harmonic
    function vanishing on the imaginary axis; composing with psi transports
    it to the map's source domain.  Missing second derivatives fall back to
    a centered difference of psi'.
    """
    if cmap.target != "right_halfplane":
        raise FieldError("pullback needs a map onto the right half-plane")
    from .geometry import domain_from_config
    if domain is None:
        domain = domain_from_config(cmap.source)
    d2 = cmap.d2forward
    kind = "analytic"
    if d2 is None:
        kind = "finite-difference"

        def d2(z, _d=cmap.dforward):
            h = 1e-6 * (1.0 + abs(complex(z)))
            return (_d(z + h) - _d(z - h)) / (2.0 * h)

    fld = HolomorphicReField(domain, cmap.forward, cmap.dforward, d2,
                             name or f"pullback[{cmap.source}]")
    fld.derivative_kind = kind
    return fld


def study_convexity_check(cmap: ConformalMap, center, radius, n_samples=256):
    """Map a disc boundary inside the unit disc and test image convexity."""
    center = complex(center)
    if abs(center) + radius >= 1.0:
        raise FieldError("disc closure must sit inside the unit disc")
    if n_samples < 256:
        n_samples = 256
    th = 2.0 * np.pi * np.arange(n_samples) / n_samples
    zs = center + radius * np.exp(1j * th)
    ws = np.asarray([complex(cmap.forward(z)) for z in zs])
    pts = np.column_stack([ws.real, ws.imag])
    if not np.all(np.isfinite(pts)):
        raise FieldError("disc image leaves the numeric window")
    from .levelset import LevelCurve, convexity_test
    diam = float(np.ptp(pts, axis=0).max())
    curve = LevelCurve(level=float("nan"), vertices=np.vstack([pts, pts[:1]]), closed=True,
                       window=None)
    return convexity_test(curve, tol=1e-8 * max(diam, 1.0))
