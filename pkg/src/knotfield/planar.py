"""Closed-form and semi-analytic potentials for planar loops (section views).

The rectangle potential is a sum of four straight-segment contributions.
Each segment of half-length L at perpendicular distance c from the point,
with the point's along-axis offset s from the segment midpoint, contributes

    asinh((L - s)/|c|) + asinh((L + s)/|c|),

which is the numerically robust form of the log expression (the printed log
form has a denominator that goes negative inside the loop). The stadium adds
two unit-radius semicircular caps handled by quadrature; the ellipse is all
quadrature. Threshold solvers locate the aspect ratio where the on-axis
second derivative at the origin changes sign (the symmetry-breaking
pitchfork), double-checked for the rectangle against the cubic
4 + 8a^2 - 4a^3 = 0.
"""

from dataclasses import dataclass

import numpy as np
from scipy.integrate import quad

from . import curves, fieldkernel as fk
from .errors import ParameterError, SingularityError

BOUNDARY_TOL = 1e-12

# Gauss-Legendre rule reused for the semicircular cap integrals.
_GL_NODES, _GL_WEIGHTS = np.polynomial.legendre.leggauss(400)
_CAP_THETA = 0.5 * np.pi * _GL_NODES        # map [-1,1] -> [-pi/2, pi/2]
_CAP_W = 0.5 * np.pi * _GL_WEIGHTS

_ELLIPSE_T = None
_ELLIPSE_NT = 4096


@dataclass(frozen=True)
class AxisProfile:
    """Potential along the x-axis of a planar shape."""

    shape: str
    a: float
    abscissae: np.ndarray
    phi_values: np.ndarray
    d2phi_origin: float


@dataclass(frozen=True)
class BifurcationResult:
    """Pitchfork threshold of a planar shape.

    threshold is the bisection root of the analytic on-axis second
    derivative at the origin; polynomial_root (rectangle only) is the
    independent cubic cross-check. aspect_ratio is the reported shape
    aspect: a for the rectangle, a+1 for the stadium.
    """

    shape: str
    threshold: float
    bracket: tuple
    polynomial_root: float = None
    aspect_ratio: float = None


# ----------------------------- rectangle ---------------------------------

def _segment_potential(half_length, s, c):
    """Potential of a unit-density segment: offset s along, distance c off."""
    c = np.abs(c)
    if np.any(c < BOUNDARY_TOL):
        # Collinear with the segment line: finite only beyond the endpoints.
        s_ = np.abs(s)
        if np.any(s_ <= half_length + BOUNDARY_TOL):
            raise SingularityError("point lies on a charged segment")
        return np.log((s_ + half_length) / (s_ - half_length))
    return np.arcsinh((half_length - s) / c) + np.arcsinh((half_length + s) / c)


def _on_rectangle(x, y, a):
    on_h = (np.abs(np.abs(y) - 1.0) < BOUNDARY_TOL) & (np.abs(x) <= a + BOUNDARY_TOL)
    on_v = (np.abs(np.abs(x) - a) < BOUNDARY_TOL) & (np.abs(y) <= 1.0 + BOUNDARY_TOL)
    return on_h | on_v


def rectangle_potential(x, y, a):
    """In-plane potential of the charged rectangle with corners (+-a, +-1).

    Valid strictly inside or strictly outside; points on the loop raise
    SingularityError. Accepts scalars or broadcastable arrays.
    """
    if a < 1.0:
        raise ParameterError(f"aspect a must be >= 1, got {a}")
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if np.any(_on_rectangle(x, y, a)):
        raise SingularityError("point lies on the rectangle boundary")
    top = _segment_potential(a, x, 1.0 - y)
    bottom = _segment_potential(a, x, 1.0 + y)
    right = _segment_potential(1.0, y, a - x)
    left = _segment_potential(1.0, y, a + x)
    out = top + bottom + right + left
    return float(out) if out.ndim == 0 else out


def rectangle_axis_dphi(x, a):
    """d(phi)/dx along y = 0, analytic."""
    x = np.asarray(x, dtype=np.float64)
    sm, sp = a - x, a + x
    horiz = 2.0 * (-1.0 / np.sqrt(1.0 + sm**2) + 1.0 / np.sqrt(1.0 + sp**2))
    vert = 2.0 * (1.0 / (sm * np.sqrt(sm**2 + 1.0))
                  - 1.0 / (sp * np.sqrt(sp**2 + 1.0)))
    return horiz + vert


def rectangle_axis_d2phi(x, a):
    """d2(phi)/dx2 along y = 0, analytic."""
    x = np.asarray(x, dtype=np.float64)
    sm, sp = a - x, a + x
    horiz = 2.0 * (-sm * (1.0 + sm**2) ** -1.5 - sp * (1.0 + sp**2) ** -1.5)
    vert = 2.0 * ((2.0 * sm**2 + 1.0) / (sm**2 * (sm**2 + 1.0) ** 1.5)
                  + (2.0 * sp**2 + 1.0) / (sp**2 * (sp**2 + 1.0) ** 1.5))
    return horiz + vert


def rectangle_d2phi_origin(a):
    return float(rectangle_axis_d2phi(0.0, a))


def rectangle_threshold(bisect_tol=1e-6):
    """Pitchfork aspect of the rectangle, by two independent routes.

    Route 1: bisection on the analytic second derivative at the origin.
    Route 2: the unique positive root of 4 + 8a^2 - 4a^3.
    """
    roots = np.roots([-4.0, 8.0, 0.0, 4.0])
    real = roots[np.abs(roots.imag) < 1e-9].real
    poly_root = float(real[real > 0][0])

    lo, hi = 1.5, 3.0
    flo = rectangle_d2phi_origin(lo)
    if flo <= 0 or rectangle_d2phi_origin(hi) >= 0:
        raise ParameterError("threshold bracket [1.5, 3] lost its sign change")
    bracket = (lo, hi)
    while hi - lo > bisect_tol:
        mid = 0.5 * (lo + hi)
        if rectangle_d2phi_origin(mid) > 0:
            lo = mid
        else:
            hi = mid
    threshold = 0.5 * (lo + hi)
    return BifurcationResult(shape="rectangle", threshold=threshold,
                             bracket=bracket, polynomial_root=poly_root,
                             aspect_ratio=threshold)


# ------------------------------ stadium ----------------------------------

def _cap_integrand_phi(theta, s0):
    # unit-radius cap centered at distance s0 along the axis, seen from x=0
    return 1.0 / np.sqrt((s0 + np.cos(theta)) ** 2 + np.sin(theta) ** 2)


def _cap_potential(s0, accurate=False):
    """Potential at the on-axis point of one cap; s0 = cap center offset."""
    if accurate or abs(s0) < 1.25:
        val, _ = quad(_cap_integrand_phi, -0.5 * np.pi, 0.5 * np.pi,
                      args=(s0,), epsabs=1e-13, epsrel=1e-13, limit=200)
        return val
    return float(_CAP_W @ _cap_integrand_phi(_CAP_THETA, s0))


def _on_stadium_axis(x, a):
    return abs(abs(x) - (a + 1.0)) < BOUNDARY_TOL


def stadium_potential_on_axis(x, a):
    """Potential on the x-axis of the stadium (straights |x|<=a at y=+-1,
    unit caps at (+-a, 0)). Exterior |x| > a+1 is allowed; points on the
    curve raise SingularityError."""
    if a <= 0:
        raise ParameterError(f"stadium half-length a must be > 0, got {a}")
    if _on_stadium_axis(x, a):
        raise SingularityError("point lies on the stadium cap apex")
    straights = 2.0 * (np.arcsinh(a - x) + np.arcsinh(a + x))
    caps = _cap_potential(a - x) + _cap_potential(a + x)
    return float(straights + caps)


def _cap_dphi(x, a):
    """d/dx of both cap contributions at on-axis points x (vectorized)."""
    x = np.atleast_1d(np.asarray(x, dtype=np.float64))
    cth, sth = np.cos(_CAP_THETA), np.sin(_CAP_THETA)
    sr = a - x[:, None] + cth       # right cap: (a + cos - x)
    sl = a + x[:, None] + cth       # left cap:  (a + cos + x)
    rr = (sr**2 + sth**2) ** 1.5
    rl = (sl**2 + sth**2) ** 1.5
    return (sr / rr - sl / rl) @ _CAP_W


def _cap_d2phi(x, a):
    x = np.atleast_1d(np.asarray(x, dtype=np.float64))
    cth, sth = np.cos(_CAP_THETA), np.sin(_CAP_THETA)
    out = np.zeros_like(x)
    for sign in (+1.0, -1.0):
        s = a + sign * x[:, None] + cth
        r2 = s**2 + sth**2
        out += ((3.0 * s**2 - r2) / r2**2.5) @ _CAP_W
    return out


def stadium_axis_dphi(x, a):
    x = np.atleast_1d(np.asarray(x, dtype=np.float64))
    straights = 2.0 * (-1.0 / np.sqrt(1.0 + (a - x) ** 2)
                       + 1.0 / np.sqrt(1.0 + (a + x) ** 2))
    return straights + _cap_dphi(x, a)


def stadium_axis_d2phi(x, a):
    x = np.atleast_1d(np.asarray(x, dtype=np.float64))
    sm, sp = a - x, a + x
    straights = 2.0 * (-sm * (1.0 + sm**2) ** -1.5 - sp * (1.0 + sp**2) ** -1.5)
    return straights + _cap_d2phi(x, a)


def stadium_d2phi_origin(a):
    return float(stadium_axis_d2phi(np.zeros(1), a)[0])


def stadium_threshold(bisect_tol=1e-6):
    """Pitchfork half-length of the stadium (reported aspect is a+1)."""
    lo, hi = 1.0, 2.0
    if stadium_d2phi_origin(lo) <= 0 or stadium_d2phi_origin(hi) >= 0:
        raise ParameterError("threshold bracket [1, 2] lost its sign change")
    bracket = (lo, hi)
    while hi - lo > bisect_tol:
        mid = 0.5 * (lo + hi)
        if stadium_d2phi_origin(mid) > 0:
            lo = mid
        else:
            hi = mid
    threshold = 0.5 * (lo + hi)
    return BifurcationResult(shape="stadium", threshold=threshold,
                             bracket=bracket, polynomial_root=None,
                             aspect_ratio=threshold + 1.0)


# ------------------------------ ellipse ----------------------------------

def _ellipse_nodes():
    global _ELLIPSE_T
    if _ELLIPSE_T is None:
        _ELLIPSE_T = 2.0 * np.pi * np.arange(_ELLIPSE_NT) / _ELLIPSE_NT
    return _ELLIPSE_T


def ellipse_potential_on_axis(x, a):
    """Potential on the major axis of the ellipse (a cos t, sin t), |x| < a."""
    if a < 1.0:
        raise ParameterError(f"aspect a must be >= 1, got {a}")
    t = _ellipse_nodes()
    speed = np.sqrt(a**2 * np.sin(t) ** 2 + np.cos(t) ** 2)
    x = np.atleast_1d(np.asarray(x, dtype=np.float64))
    dist = np.sqrt((x[:, None] - a * np.cos(t)) ** 2 + np.sin(t) ** 2)
    if np.any(dist < BOUNDARY_TOL):
        raise SingularityError("point lies on the ellipse")
    vals = (speed / dist) @ np.full(len(t), 2.0 * np.pi / len(t))
    return vals


def ellipse_axis_dphi(x, a):
    t = _ellipse_nodes()
    speed = np.sqrt(a**2 * np.sin(t) ** 2 + np.cos(t) ** 2)
    x = np.atleast_1d(np.asarray(x, dtype=np.float64))
    dx = x[:, None] - a * np.cos(t)
    r2 = dx**2 + np.sin(t) ** 2
    return (-dx / r2**1.5 * speed) @ np.full(len(t), 2.0 * np.pi / len(t))


def ellipse_axis_d2phi(x, a):
    t = _ellipse_nodes()
    speed = np.sqrt(a**2 * np.sin(t) ** 2 + np.cos(t) ** 2)
    x = np.atleast_1d(np.asarray(x, dtype=np.float64))
    dx = x[:, None] - a * np.cos(t)
    r2 = dx**2 + np.sin(t) ** 2
    return ((3.0 * dx**2 - r2) / r2**2.5 * speed) @ np.full(len(t), 2.0 * np.pi / len(t))


def ellipse_d2phi_origin(a):
    """Second x-derivative of the potential at the ellipse center.

    Positive for every aspect ratio: the center stays the only on-axis
    zero, in contrast to the rectangle and stadium.
    """
    return float(ellipse_axis_d2phi(np.zeros(1), a)[0])


# --------------------------- shared analysis ------------------------------

_SHAPE_FUNCS = {
    "rectangle": {
        "xmax": lambda a: a,
        "phi": lambda x, a: rectangle_potential(x, 0.0, a),
        "dphi": rectangle_axis_dphi,
        "d2phi": rectangle_axis_d2phi,
    },
    "stadium": {
        "xmax": lambda a: a + 1.0,
        "phi": lambda x, a: np.array([stadium_potential_on_axis(xx, a)
                                      for xx in np.atleast_1d(x)]),
        "dphi": stadium_axis_dphi,
        "d2phi": stadium_axis_d2phi,
    },
    "ellipse": {
        "xmax": lambda a: a,
        "phi": ellipse_potential_on_axis,
        "dphi": ellipse_axis_dphi,
        "d2phi": ellipse_axis_d2phi,
    },
}


def _shape(shape):
    if shape not in _SHAPE_FUNCS:
        raise ParameterError(f"shape must be one of {sorted(_SHAPE_FUNCS)}")
    return _SHAPE_FUNCS[shape]


def axis_profile(shape, a, num=801, span=0.98):
    """Sampled on-axis potential plus the origin second derivative."""
    f = _shape(shape)
    xm = f["xmax"](a) * span
    xs = np.linspace(-xm, xm, num)
    phi = np.asarray(f["phi"](xs, a), dtype=np.float64)
    d2 = float(f["d2phi"](np.zeros(1), a)[0]) if shape != "rectangle" \
        else rectangle_d2phi_origin(a)
    return AxisProfile(shape=shape, a=float(a), abscissae=xs,
                       phi_values=phi, d2phi_origin=d2)


def planar_critical_points(shape, a, scan_points=4001, margin_frac=1e-4,
                           x_tol=1e-10):
    """All on-axis critical points strictly inside the shape.

    Scans d(phi)/dx for sign changes on a fine grid, refines each bracket
    by bisection to x_tol, classifies by the sign of the second derivative.
    Returns a list of (x, "min" | "max") sorted by x.
    """
    f = _shape(shape)
    xm = f["xmax"](a)
    lim = xm * (1.0 - margin_frac)
    xs = np.linspace(-lim, lim, scan_points)
    der = np.asarray(f["dphi"](xs, a), dtype=np.float64)

    roots = []
    sign = np.sign(der)
    for i in np.flatnonzero(sign[:-1] * sign[1:] < 0):
        lo, hi = xs[i], xs[i + 1]
        flo = der[i]
        while hi - lo > x_tol:
            mid = 0.5 * (lo + hi)
            fm = float(f["dphi"](np.array([mid]), a)[0])
            if fm == 0.0:
                lo = hi = mid
                break
            if (fm > 0) == (flo > 0):
                lo, flo = mid, fm
            else:
                hi = mid
        roots.append(0.5 * (lo + hi))
    # exact zeros on the grid (the origin lands on the grid when scan_points
    # is odd)
    for i in np.flatnonzero(sign == 0):
        roots.append(xs[i])

    out = []
    for r in sorted(roots):
        d2 = float(f["d2phi"](np.array([r]), a)[0])
        out.append((float(r), "min" if d2 > 0 else "max"))
    return out
