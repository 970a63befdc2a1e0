"""Catalog of charged-loop geometries and their point-charge discretizations.

A curve is a closed loop r(t), t in [0, 2*pi], carrying uniform charge per
unit arclength. Discretization replaces the loop by N+1 point charges with
trapezoidal weights w_j = (2*pi/(N+1)) * |r'(t_j)|, so the weighted sum of
1/|x - p_j| converges spectrally to the line-charge potential for smooth
loops. Rectangles and stadiums have corner/junction breaks in r', so they
are discretized piece by piece (midpoint samples, never on a corner).
"""

from dataclasses import dataclass, field

import numpy as np

from .errors import CatalogError, ParameterError

TWO_PI = 2.0 * np.pi

KNOT_NAMES = ("unknot", "trefoil", "trefoil-tableI", "figure-eight",
              "cinquefoil", "three-twist")
PLANAR_NAMES = ("rectangle", "stadium", "ellipse")
CATALOG_NAMES = KNOT_NAMES + PLANAR_NAMES


@dataclass(frozen=True)
class ParamCurve:
    """A named closed curve with analytic position and derivative maps.

    position / derivative accept a scalar or array of parameter values and
    return points with a trailing axis of length 3. ``piece_breaks`` lists
    parameter values where the derivative jumps (corners); it is empty for
    smooth curves. Instances are immutable and safe to share across threads.
    """

    name: str
    position: callable
    derivative: callable
    params: dict = field(default_factory=dict)
    piece_breaks: tuple = ()
    planar: bool = False

    def points(self, t):
        t = np.asarray(t, dtype=np.float64)
        return np.stack(self.position(t), axis=-1)

    def velocities(self, t):
        t = np.asarray(t, dtype=np.float64)
        return np.stack(self.derivative(t), axis=-1)

    def speed(self, t):
        return np.linalg.norm(self.velocities(t), axis=-1)

    def arclength(self, rtol=1e-12):
        """Total arclength by quadrature of |r'| (piecewise-aware)."""
        from scipy.integrate import quad

        breaks = (0.0,) + tuple(self.piece_breaks) + (TWO_PI,)
        total = 0.0
        for lo, hi in zip(breaks[:-1], breaks[1:]):
            if hi - lo < 1e-15:
                continue
            val, _ = quad(lambda s: float(self.speed(s)), lo, hi,
                          epsabs=0.0, epsrel=rtol, limit=400)
            total += val
        return total


@dataclass(frozen=True)
class ChargeDiscretization:
    """N+1 point charges standing in for a uniformly charged loop.

    weights carry dimensionless charge (arclength at unit linear density);
    total_charge therefore approximates the loop's arclength. Arrays are
    read-only so discretizations can be shared freely.
    """

    sample_parameters: np.ndarray
    points: np.ndarray
    weights: np.ndarray
    total_charge: float
    curve_name: str = ""

    def __post_init__(self):
        for arr in (self.sample_parameters, self.points, self.weights):
            arr.setflags(write=False)

    @property
    def n_samples(self):
        return self.points.shape[0]

    def bounding_box(self):
        """(lo, hi) corners of the axis-aligned box containing the samples."""
        return self.points.min(axis=0), self.points.max(axis=0)


@dataclass(frozen=True)
class KnotInfo:
    """Topological bookkeeping for a catalog knot.

    tunnel_number gives the proven lower bound 2t+1 on the zero count;
    crossing_number gives the conjectured upper bound 2c+1.
    """

    knot_name: str
    tunnel_number: int
    crossing_number: int
    conjectured_Z: int

    def __post_init__(self):
        lo, hi = self.lower_bound, self.upper_bound
        if not (lo <= self.conjectured_Z <= hi):
            raise ParameterError(
                f"{self.knot_name}: conjectured Z={self.conjectured_Z} "
                f"outside [{lo}, {hi}]")

    @property
    def lower_bound(self):
        return 2 * self.tunnel_number + 1

    @property
    def upper_bound(self):
        return 2 * self.crossing_number + 1


KNOT_TABLE = {
    "unknot": KnotInfo("unknot", 0, 0, 1),
    "trefoil": KnotInfo("trefoil", 1, 3, 7),
    "trefoil-tableI": KnotInfo("trefoil-tableI", 1, 3, 7),
    "figure-eight": KnotInfo("figure-eight", 1, 4, 5),
    "cinquefoil": KnotInfo("cinquefoil", 1, 5, 11),
    "three-twist": KnotInfo("three-twist", 1, 5, 11),
}


def _knot_curve(name, gamma):
    g = gamma
    if name == "unknot":
        # z identically 0 regardless of gamma
        pos = lambda t: (np.cos(t), np.sin(t), np.zeros_like(t))
        vel = lambda t: (-np.sin(t), np.cos(t), np.zeros_like(t))
        return pos, vel
    if name == "trefoil":
        pos = lambda t: (np.sin(t) + 2 * np.sin(2 * t),
                         np.cos(t) - 2 * np.cos(2 * t),
                         -g * np.sin(3 * t))
        vel = lambda t: (np.cos(t) + 4 * np.cos(2 * t),
                         -np.sin(t) + 4 * np.sin(2 * t),
                         -3 * g * np.cos(3 * t))
        return pos, vel
    if name == "trefoil-tableI":
        pos = lambda t: (np.sin(t) + 2 * np.sin(2 * t),
                         np.cos(t) - 2 * np.sin(2 * t),
                         -g * np.sin(3 * t))
        vel = lambda t: (np.cos(t) + 4 * np.cos(2 * t),
                         -np.sin(t) - 4 * np.cos(2 * t),
                         -3 * g * np.cos(3 * t))
        return pos, vel
    if name == "figure-eight":
        pos = lambda t: ((2 + np.cos(2 * t)) * np.cos(3 * t),
                         (2 + np.cos(2 * t)) * np.sin(3 * t),
                         g * np.sin(4 * t))
        vel = lambda t: (-2 * np.sin(2 * t) * np.cos(3 * t)
                         - 3 * (2 + np.cos(2 * t)) * np.sin(3 * t),
                         -2 * np.sin(2 * t) * np.sin(3 * t)
                         + 3 * (2 + np.cos(2 * t)) * np.cos(3 * t),
                         4 * g * np.cos(4 * t))
        return pos, vel
    if name == "cinquefoil":
        # The x radius uses (3 + cos 5t)/2 while y uses (2 + cos 5t)/2; the
        # asymmetry is intentional and kept verbatim.
        pos = lambda t: (np.cos(2 * t) * (3 + np.cos(5 * t)) / 2,
                         np.sin(2 * t) * (2 + np.cos(5 * t)) / 2,
                         g * np.sin(5 * t) / 2)
        vel = lambda t: (-np.sin(2 * t) * (3 + np.cos(5 * t))
                         - 2.5 * np.cos(2 * t) * np.sin(5 * t),
                         np.cos(2 * t) * (2 + np.cos(5 * t))
                         - 2.5 * np.sin(2 * t) * np.sin(5 * t),
                         2.5 * g * np.cos(5 * t))
        return pos, vel
    if name == "three-twist":
        pos = lambda t: (2 * np.cos(2 * t + 0.2),
                         2 * np.cos(3 * t + 0.7),
                         g * np.cos(7 * t))
        vel = lambda t: (-4 * np.sin(2 * t + 0.2),
                         -6 * np.sin(3 * t + 0.7),
                         -7 * g * np.sin(7 * t))
        return pos, vel
    raise CatalogError(f"unknown knot {name!r}")


def _polyline_curve(name, corners):
    """Constant-speed parametrization of a closed polygon through `corners`."""
    corners = np.asarray(corners, dtype=np.float64)
    legs = np.roll(corners, -1, axis=0) - corners
    lengths = np.linalg.norm(legs, axis=1)
    perimeter = lengths.sum()
    s_breaks = np.concatenate([[0.0], np.cumsum(lengths)])
    t_breaks = TWO_PI * s_breaks / perimeter
    unit = legs / lengths[:, None]
    speed = perimeter / TWO_PI

    def pos(t):
        t = np.asarray(t, dtype=np.float64)
        s = (np.mod(t, TWO_PI)) * perimeter / TWO_PI
        idx = np.clip(np.searchsorted(s_breaks, s, side="right") - 1,
                      0, len(lengths) - 1)
        local = s - s_breaks[idx]
        p = corners[idx] + unit[idx] * local[..., None]
        return p[..., 0], p[..., 1], p[..., 2]

    def vel(t):
        t = np.asarray(t, dtype=np.float64)
        s = (np.mod(t, TWO_PI)) * perimeter / TWO_PI
        idx = np.clip(np.searchsorted(s_breaks, s, side="right") - 1,
                      0, len(lengths) - 1)
        v = unit[idx] * speed
        return v[..., 0], v[..., 1], v[..., 2]

    return pos, vel, tuple(t_breaks[1:-1])


def _stadium_curve(a):
    """Constant-speed stadium: straights y = +-1 over |x| <= a, unit caps."""
    perimeter = 4.0 * a + TWO_PI
    speed = perimeter / TWO_PI
    # Arclength stations: top straight, left cap, bottom straight, right cap.
    s1 = 2.0 * a
    s2 = s1 + np.pi
    s3 = s2 + 2.0 * a

    def pieces(t):
        t = np.asarray(t, dtype=np.float64)
        s = np.mod(t, TWO_PI) * speed
        x = np.empty_like(s)
        y = np.empty_like(s)
        vx = np.empty_like(s)
        vy = np.empty_like(s)

        m = s < s1  # top straight, rightward start (a,1) -> (-a,1)
        x[m] = a - s[m]
        y[m] = 1.0
        vx[m] = -1.0
        vy[m] = 0.0

        m = (s >= s1) & (s < s2)  # left cap around (-a, 0)
        th = np.pi / 2 + (s[m] - s1)
        x[m] = -a + np.cos(th)
        y[m] = np.sin(th)
        vx[m] = -np.sin(th)
        vy[m] = np.cos(th)

        m = (s >= s2) & (s < s3)  # bottom straight (-a,-1) -> (a,-1)
        x[m] = -a + (s[m] - s2)
        y[m] = -1.0
        vx[m] = 1.0
        vy[m] = 0.0

        m = s >= s3  # right cap around (a, 0)
        th = -np.pi / 2 + (s[m] - s3)
        x[m] = a + np.cos(th)
        y[m] = np.sin(th)
        vx[m] = -np.sin(th)
        vy[m] = np.cos(th)
        return x, y, vx, vy

    def pos(t):
        x, y, _, _ = pieces(t)
        return x, y, np.zeros_like(x)

    def vel(t):
        _, _, vx, vy = pieces(t)
        return vx * speed, vy * speed, np.zeros_like(vx)

    breaks = tuple(np.array([s1, s2, s3]) / speed)
    return pos, vel, breaks


def make_curve(name, params=None):
    """Build a catalog curve.

    params may carry "gamma" (height scale, >= 0; knots only) and "a"
    (aspect, >= 1; rectangle/stadium/ellipse only). Unknown names raise
    CatalogError; out-of-range parameters raise ParameterError.
    """
    params = dict(params or {})
    gamma = params.get("gamma", 1.0)
    a = params.get("a", params.get("aspect", 2.0))
    if gamma < 0:
        raise ParameterError(f"gamma must be >= 0, got {gamma}")

    if name in KNOT_NAMES:
        pos, vel = _knot_curve(name, float(gamma))
        planar = (name == "unknot") or gamma == 0.0
        return ParamCurve(name=name, position=pos, derivative=vel,
                          params={"gamma": float(gamma)}, planar=planar)

    if name in PLANAR_NAMES:
        a = float(a)
        if a < 1.0:
            raise ParameterError(f"aspect a must be >= 1, got {a}")
        if name == "ellipse":
            pos = lambda t: (a * np.cos(t), np.sin(t), np.zeros_like(t))
            vel = lambda t: (-a * np.sin(t), np.cos(t), np.zeros_like(t))
            return ParamCurve(name=name, position=pos, derivative=vel,
                              params={"a": a}, planar=True)
        if name == "rectangle":
            corners = [(a, 1, 0), (-a, 1, 0), (-a, -1, 0), (a, -1, 0)]
            pos, vel, breaks = _polyline_curve(name, corners)
            return ParamCurve(name=name, position=pos, derivative=vel,
                              params={"a": a}, piece_breaks=breaks,
                              planar=True)
        # stadium
        pos, vel, breaks = _stadium_curve(a)
        return ParamCurve(name=name, position=pos, derivative=vel,
                          params={"a": a}, piece_breaks=breaks, planar=True)

    raise CatalogError(
        f"unknown curve {name!r}; catalog: {', '.join(CATALOG_NAMES)}")


def _allocate(lengths, total):
    """Largest-remainder split of `total` samples proportional to lengths."""
    lengths = np.asarray(lengths, dtype=np.float64)
    quota = lengths / lengths.sum() * total
    counts = np.floor(quota).astype(int)
    counts = np.maximum(counts, 1)
    while counts.sum() > total:
        counts[np.argmax(counts)] -= 1
    remainder = quota - counts
    order = np.argsort(-remainder)
    for k in range(total - counts.sum()):
        counts[order[k % len(counts)]] += 1
    return counts


def discretize(curve, n):
    """Replace `curve` by N+1 weighted point charges.

    Smooth curves use the uniform samples t_j = 2*pi*j/(N+1) with weights
    (2*pi/(N+1)) * |r'(t_j)|. Piecewise-smooth curves (rectangle, stadium)
    get midpoint samples allocated per piece by arclength, so no sample ever
    lands on a corner where |r'| is undefined.
    """
    n = int(n)
    if n < 8:
        raise ParameterError(f"N must be >= 8, got {n}")

    if not curve.piece_breaks:
        t = TWO_PI * np.arange(n + 1) / (n + 1)
        pts = curve.points(t)
        w = (TWO_PI / (n + 1)) * curve.speed(t)
        if np.any(w <= 0):
            raise ParameterError(
                f"curve {curve.name!r} is irregular (|r'| = 0) at a sample")
        return ChargeDiscretization(sample_parameters=t, points=pts,
                                    weights=w, total_charge=float(w.sum()),
                                    curve_name=curve.name)

    # Piecewise path: constant-speed parametrizations make piece arclength
    # proportional to the t-interval.
    breaks = np.array((0.0,) + tuple(curve.piece_breaks) + (TWO_PI,))
    spans = np.diff(breaks)
    speed = float(curve.speed(breaks[0] + 0.5 * spans[0]))
    lengths = spans * speed
    counts = _allocate(lengths, n + 1)

    ts, ws = [], []
    for lo, span, length, cnt in zip(breaks[:-1], spans, lengths, counts):
        frac = (np.arange(cnt) + 0.5) / cnt
        ts.append(lo + span * frac)
        ws.append(np.full(cnt, length / cnt))
    t = np.concatenate(ts)
    w = np.concatenate(ws)
    pts = curve.points(t)
    return ChargeDiscretization(sample_parameters=t, points=pts, weights=w,
                                total_charge=float(w.sum()),
                                curve_name=curve.name)


def point_charge(charge, location=(0.0, 0.0, 0.0)):
    """A single point charge, handy for isosurface sanity tests."""
    pts = np.asarray([location], dtype=np.float64)
    w = np.asarray([float(charge)])
    return ChargeDiscretization(sample_parameters=np.zeros(1), points=pts,
                                weights=w, total_charge=float(charge),
                                curve_name="point")


def load_curve_csv(path):
    """Load a sampled closed curve from CSV with header t,x,y,z.

    t must be strictly increasing within [0, 2*pi); the final point joins
    back to the first. Uniformly spaced samples get a trigonometric
    (spectral) interpolant; non-uniform samples fall back to a periodic
    cubic spline.
    """
    raw = np.genfromtxt(path, delimiter=",", names=True)
    required = ("t", "x", "y", "z")
    if raw.dtype.names is None or tuple(raw.dtype.names) != required:
        raise ParameterError(
            f"CSV header must be exactly t,x,y,z, got {raw.dtype.names}")
    t = np.atleast_1d(raw["t"])
    xyz = np.stack([np.atleast_1d(raw[k]) for k in "xyz"], axis=1)
    if len(t) < 8:
        raise ParameterError("need at least 8 samples")
    if np.any(np.diff(t) <= 0):
        raise ParameterError("t must be strictly increasing")
    if t[0] < 0 or t[-1] >= TWO_PI:
        raise ParameterError("t must lie in [0, 2*pi)")

    spacing = np.diff(np.concatenate([t, [t[0] + TWO_PI]]))
    if np.allclose(spacing, spacing[0], rtol=0, atol=1e-9):
        # Uniform: exact trig interpolation through the samples.
        m = len(t)
        coeffs = np.fft.rfft(xyz, axis=0)
        freqs = np.arange(coeffs.shape[0], dtype=np.float64)
        scale = np.full(coeffs.shape[0], 2.0)
        scale[0] = 1.0
        if m % 2 == 0:
            scale[-1] = 1.0  # Nyquist mode appears once

        def _series(c, s):
            s = np.asarray(s, dtype=np.float64)
            phase = np.exp(1j * (np.ravel(s)[:, None] - t[0]) * freqs)
            out = ((phase * scale) @ c).real / m
            out = out.reshape(np.shape(s) + (3,))
            return out[..., 0], out[..., 1], out[..., 2]

        dcoeffs = coeffs * (1j * freqs)[:, None]
        pos = lambda s: _series(coeffs, s)
        vel = lambda s: _series(dcoeffs, s)
    else:
        from scipy.interpolate import CubicSpline

        tt = np.concatenate([t, [t[0] + TWO_PI]])
        pp = np.vstack([xyz, xyz[:1]])
        spline = CubicSpline(tt, pp, bc_type="periodic")
        dspline = spline.derivative()

        def pos(s):
            p = spline(np.mod(s, TWO_PI))
            return p[..., 0], p[..., 1], p[..., 2]

        def vel(s):
            v = dspline(np.mod(s, TWO_PI))
            return v[..., 0], v[..., 1], v[..., 2]

    planar = bool(np.all(np.abs(xyz[:, 2]) < 1e-12))
    return ParamCurve(name="csv", position=pos, derivative=vel,
                      params={}, planar=planar)
