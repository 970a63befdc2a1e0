"""Locate and classify every zero of the field around a charge loop.

The search follows the two-stage scheme: a coarse grid of E samples around
the loop proposes cells in which all three field components change sign
(the trilinear interpolants then necessarily pass through zero), and a
multivariable Newton iteration refines each proposed cell center. A dense
variant seeds from every grid point instead and exists to cross-validate
the cell filter. Converged points are deduplicated, classified by the
eigenvalues of the Hessian, and sorted by critical value.

Indices are always 1 or 2 away from bifurcations: the Hessian is traceless,
so its eigenvalues can never share a sign and every zero is a saddle.
"""

from dataclasses import dataclass

import numpy as np

from . import fieldkernel as fk
from .errors import EmptyCriticalSetError, ParameterError, SingularityError

REJECT_DIVERGED = "Diverged"
REJECT_MAX_ITER = "MaxIter"
REJECT_SINGULAR = "SingularHessian"
REJECT_NEAR_CURVE = "NearCurve"


@dataclass(frozen=True)
class CriticalPoint:
    """A zero of E with its Morse data.

    morse_index counts negative Hessian eigenvalues; it is the string
    "degenerate" when an eigenvalue is too small to classify (relative to
    the Hessian norm), which happens exactly at bifurcation parameters.
    """

    position: np.ndarray
    value: float
    hessian_eigenvalues: np.ndarray
    morse_index: object
    residual: float

    def as_dict(self):
        return {
            "position": [float(v) for v in self.position],
            "value": float(self.value),
            "index": self.morse_index,
            "eigenvalues": [float(v) for v in self.hessian_eigenvalues],
            "residual": float(self.residual),
        }


@dataclass(frozen=True)
class NewtonRejection:
    """Why a seed was discarded, with the last iterate for diagnostics."""

    reason: str
    last_point: np.ndarray
    residual: float = np.nan


@dataclass(frozen=True)
class SeedingConfig:
    """Knobs for the seeding grid and the Newton refinement.

    The bounding box defaults to the charge bounding box inflated about its
    center by `inflation` (z_inflation overrides the z axis; flattening
    sweeps raise it because thin boxes under-resolve near-planar zeros).
    Degenerate axes (planar loops) get a floor of 5% of the widest
    half-width so the grid always has volume.
    """

    grid_resolution: int = 30
    inflation: float = 1.5
    z_inflation: float = None
    bounding_box: tuple = None  # ((xlo,ylo,zlo), (xhi,yhi,zhi)) override
    newton_max_iter: int = 50
    divergence_factor: float = 10.0     # x box diagonal
    dedup_factor: float = 1e-6          # x box diagonal
    near_curve_distance: float = 1e-3
    tol_factor: float = 1e-9            # x max |E| on the seeding grid
    cond_limit: float = 1e12
    degenerate_eig_factor: float = 1e-6  # x Hessian norm
    grid_dtype: object = np.float64

    def __post_init__(self):
        if self.grid_resolution < 8:
            raise ParameterError(
                f"grid_resolution must be >= 8, got {self.grid_resolution}")
        if self.bounding_box is None and self.inflation < 1.2:
            raise ParameterError(
                f"inflation must be >= 1.2, got {self.inflation}")

    def box(self, charges):
        if self.bounding_box is not None:
            lo = np.asarray(self.bounding_box[0], dtype=np.float64)
            hi = np.asarray(self.bounding_box[1], dtype=np.float64)
            return lo, hi
        lo, hi = charges.bounding_box()
        center = 0.5 * (lo + hi)
        half = 0.5 * (hi - lo)
        scale = np.full(3, self.inflation)
        if self.z_inflation is not None:
            scale[2] = self.z_inflation
        half = half * scale
        half = np.maximum(half, 0.05 * half.max())
        return center - half, center + half


def _grid_axes(lo, hi, resolution):
    return [np.linspace(lo[c], hi[c], resolution + 1) for c in range(3)]


def _corner_points(charges, config):
    """Corner coordinates, nudged off any coincident charge sample."""
    lo, hi = config.box(charges)
    axes = _grid_axes(lo, hi, config.grid_resolution)
    grid = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1)
    pts = grid.reshape(-1, 3)
    cell = (hi - lo) / config.grid_resolution
    # nudge corners that coincide with a charge sample
    r2 = np.empty(len(pts))
    for lo_i in range(0, len(pts), 2048):
        hi_i = min(lo_i + 2048, len(pts))
        dd = pts[lo_i:hi_i, None, :] - charges.points[None, :, :]
        r2[lo_i:hi_i] = np.einsum("mkc,mkc->mk", dd, dd).min(axis=1)
    coincident = r2 < fk.SINGULAR_DISTANCE**2
    if np.any(coincident):
        pts = pts.copy()
        pts[coincident] += 1e-3 * 0.5 * cell  # half a cell diagonal x 1e-3
    return pts, (lo, hi)


def seed_marching_cubes(charges, config=None):
    """Cell centers where all three E components change sign over the cell.

    E is sampled on the (R+1)^3 grid corners; a cell is proposed when, for
    each component separately, the 8 corner values straddle (or touch)
    zero. This is the zero-level-set variant of the surface-extraction cell
    test applied to all three components at once.
    """
    config = config or SeedingConfig()
    pts, (lo, hi) = _corner_points(charges, config)
    r = config.grid_resolution
    e = fk.field_grid(charges, pts, dtype=config.grid_dtype)
    e = e.reshape(r + 1, r + 1, r + 1, 3)

    mask = np.ones((r, r, r), dtype=bool)
    for c in range(3):
        comp = e[..., c]
        cmin = comp[:-1, :-1, :-1].copy()
        cmax = comp[:-1, :-1, :-1].copy()
        for dx in (0, 1):
            for dy in (0, 1):
                for dz in (0, 1):
                    corner = comp[dx:r + dx, dy:r + dy, dz:r + dz]
                    np.minimum(cmin, corner, out=cmin)
                    np.maximum(cmax, corner, out=cmax)
        mask &= (cmin <= 0.0) & (cmax >= 0.0)

    axes = _grid_axes(lo, hi, r)
    centers = [0.5 * (ax[:-1] + ax[1:]) for ax in axes]
    idx = np.argwhere(mask)
    seeds = np.stack([centers[0][idx[:, 0]],
                      centers[1][idx[:, 1]],
                      centers[2][idx[:, 2]]], axis=1)
    scale = float(np.linalg.norm(e, axis=-1).max())
    return seeds, scale


def strand_clearance(charges, min_param_separation=0.3):
    """Smallest distance between parametrically distant samples.

    Measures how closely distinct strands of the loop approach each other;
    flattening sweeps use it to scale the sample count so pinched zeros
    stay resolvable. Returns inf when no distant pair comes closer than a
    fraction of the loop size (e.g. the round unknot).
    """
    from scipy.spatial import cKDTree

    pts = charges.points
    lo, hi = charges.bounding_box()
    r_query = 0.25 * float(np.linalg.norm(hi - lo))
    pairs = cKDTree(pts).query_pairs(r_query, output_type="ndarray")
    if len(pairs) == 0:
        return np.inf
    t = charges.sample_parameters
    dt = np.abs(t[pairs[:, 0]] - t[pairs[:, 1]])
    dt = np.minimum(dt, 2.0 * np.pi - dt)
    far = dt > min_param_separation
    if not far.any():
        return np.inf
    gaps = np.linalg.norm(pts[pairs[far, 0]] - pts[pairs[far, 1]], axis=1)
    return float(gaps.min())


def _strand_gap_seeds(charges, config, min_param_separation=0.3):
    """Midpoints between close approaches of distinct strands.

    Zeros pinched between two nearby strands (the crossing zeros of nearly
    flattened knots) have Newton basins far smaller than a seeding cell, so
    grid seeding alone cannot reach them. Their location is essentially the
    midpoint of the local strand gap, which this seeder proposes directly.
    """
    from scipy.spatial import cKDTree

    lo, hi = config.box(charges)
    cell = float(np.linalg.norm((hi - lo) / config.grid_resolution))
    pts = charges.points
    pairs = cKDTree(pts).query_pairs(cell, output_type="ndarray")
    if len(pairs) == 0:
        return np.empty((0, 3))
    t = charges.sample_parameters
    dt = np.abs(t[pairs[:, 0]] - t[pairs[:, 1]])
    dt = np.minimum(dt, 2.0 * np.pi - dt)
    pairs = pairs[dt > min_param_separation]
    if len(pairs) == 0:
        return np.empty((0, 3))
    mids = 0.5 * (pts[pairs[:, 0]] + pts[pairs[:, 1]])
    gaps = np.linalg.norm(pts[pairs[:, 0]] - pts[pairs[:, 1]], axis=1)
    # Thin near-duplicate midpoints: keep one (smallest-gap) per rounding bin.
    bins = np.round(mids / (0.25 * cell)).astype(np.int64)
    order = np.lexsort((gaps, bins[:, 2], bins[:, 1], bins[:, 0]))
    bins_sorted = bins[order]
    first = np.ones(len(order), dtype=bool)
    first[1:] = np.any(np.diff(bins_sorted, axis=0) != 0, axis=1)
    return mids[order[first]]


def seed_dense_grid(charges, config=None):
    """Every cell center as a seed: the brute-force cross-check seeder."""
    config = config or SeedingConfig()
    lo, hi = config.box(charges)
    r = config.grid_resolution
    axes = _grid_axes(lo, hi, r)
    centers = [0.5 * (ax[:-1] + ax[1:]) for ax in axes]
    grid = np.stack(np.meshgrid(*centers, indexing="ij"), axis=-1)
    seeds = grid.reshape(-1, 3)
    e = fk.field_grid(charges, seeds, dtype=config.grid_dtype)
    scale = float(np.linalg.norm(e, axis=-1).max())
    return seeds, scale


def _newton_many(charges, seeds, config, field_scale):
    """Lockstep Newton on a batch of seeds.

    Solves H(x) dx = E(x) and steps x += dx (the Jacobian of E is -H), with
    a step cap of half the box diagonal. Returns per-seed outcome arrays.
    """
    lo, hi = config.box(charges)
    center = 0.5 * (lo + hi)
    diag = float(np.linalg.norm(hi - lo))
    r_div = config.divergence_factor * diag
    max_step = 0.5 * diag

    x = np.array(seeds, dtype=np.float64)
    n = len(x)
    active = np.ones(n, dtype=bool)
    reason = np.array([""] * n, dtype=object)

    for _ in range(config.newton_max_iter):
        if not active.any():
            break
        xa = x[active]
        e, h = fk.field_and_hessian_batch(charges, xa,
                                          min_distance=fk.SINGULAR_DISTANCE)

        bad = ~np.isfinite(e).all(axis=1) | ~np.isfinite(h).all(axis=(1, 2))
        far = np.linalg.norm(xa - center, axis=1) > r_div
        cond = np.linalg.cond(h)
        sing = ~bad & ~far & ((cond > config.cond_limit) | ~np.isfinite(cond))

        idx = np.flatnonzero(active)
        reason[idx[bad | far]] = REJECT_DIVERGED
        reason[idx[sing]] = REJECT_SINGULAR
        drop = bad | far | sing
        active[idx[drop]] = False
        keep = ~drop
        if not keep.any():
            continue

        step = np.linalg.solve(h[keep], e[keep][..., None])[..., 0]
        norms = np.linalg.norm(step, axis=1)
        clip = norms > max_step
        if np.any(clip):
            step[clip] *= (max_step / norms[clip])[:, None]
        live = idx[keep]
        x[live] = x[live] + step
        converged = norms < 1e-15 * diag
        active[live[converged]] = False

    reason[active] = REJECT_MAX_ITER
    return x, reason


def _classify(charges, x, config, field_scale):
    """Accept/reject a converged iterate and build its CriticalPoint."""
    tol = config.tol_factor * field_scale
    try:
        e = fk.field(charges, x)
    except SingularityError:
        return NewtonRejection(REJECT_NEAR_CURVE, x, np.inf)
    res = float(np.linalg.norm(e))
    if not np.isfinite(res) or res > tol:
        return NewtonRejection(REJECT_MAX_ITER, x, res)

    d2 = np.einsum("kc,kc->k", charges.points - x, charges.points - x)
    j = int(np.argmin(d2))
    local_spacing = float(charges.weights[j]) if charges.n_samples > 1 else 0.0
    threshold = max(config.near_curve_distance, local_spacing)
    if np.sqrt(d2[j]) < threshold:
        return NewtonRejection(REJECT_NEAR_CURVE, x, res)

    h = fk.hessian(charges, x)
    eig = np.linalg.eigvalsh(h)
    hnorm = float(np.abs(eig).max())
    if np.any(np.abs(eig) < config.degenerate_eig_factor * hnorm):
        index = "degenerate"
    else:
        index = int((eig < 0).sum())
    value = fk.potential(charges, x)
    return CriticalPoint(position=x.copy(), value=value,
                         hessian_eigenvalues=eig, morse_index=index,
                         residual=res)


def newton_refine(charges, seed, config=None, field_scale=None):
    """Refine a single seed; returns a CriticalPoint or a NewtonRejection.

    field_scale defaults to max |E| over the seeding grid (computed here if
    not supplied), which makes the acceptance tolerance scale-free.
    """
    config = config or SeedingConfig()
    if field_scale is None:
        _, field_scale = seed_marching_cubes(charges, config)
    seed = np.asarray(seed, dtype=np.float64)
    xs, reasons = _newton_many(charges, seed[None, :], config, field_scale)
    if reasons[0] in (REJECT_DIVERGED, REJECT_SINGULAR):
        return NewtonRejection(reasons[0], xs[0])
    return _classify(charges, xs[0], config, field_scale)


def _dedup(points, dedup_distance):
    """Keep the lowest-residual representative of each cluster."""
    order = np.argsort([p.residual for p in points], kind="stable")
    kept = []
    for i in order:
        p = points[i]
        if all(np.linalg.norm(p.position - q.position) >= dedup_distance
               for q in kept):
            kept.append(p)
    return kept


def find_critical_set(charges, config=None, seeder="mc"):
    """All zeros of E around the charges, deduplicated and sorted by value.

    seeder is "mc" (sign-change cells) or "dense" (every grid point). The
    result is deterministic for fixed inputs; an empty result raises,
    because a closed charge distribution always has at least one zero.
    """
    config = config or SeedingConfig()
    if seeder == "mc":
        seeds, scale = seed_marching_cubes(charges, config)
    elif seeder == "dense":
        seeds, scale = seed_dense_grid(charges, config)
    else:
        raise ParameterError(f"unknown seeder {seeder!r}")

    # Pinched zeros between nearby strands have basins smaller than a grid
    # cell; target them directly at the strand-gap midpoints.
    gap_seeds = _strand_gap_seeds(charges, config)
    if len(gap_seeds):
        seeds = np.vstack([seeds, gap_seeds]) if len(seeds) else gap_seeds

    accepted = []
    if len(seeds):
        xs, reasons = _newton_many(charges, seeds, config, scale)
        for xi, reason in zip(xs, reasons):
            if reason in (REJECT_DIVERGED, REJECT_SINGULAR):
                continue
            res = _classify(charges, xi, config, scale)
            if isinstance(res, CriticalPoint):
                accepted.append(res)

    lo, hi = config.box(charges)
    diag = float(np.linalg.norm(hi - lo))
    kept = _dedup(accepted, config.dedup_factor * diag)
    kept.sort(key=lambda p: (p.value, tuple(p.position)))
    if not kept:
        raise EmptyCriticalSetError(
            f"no zeros found for {charges.curve_name or 'charges'}: "
            "enlarge the bounding box or raise the grid resolution")
    return kept


def morse_code(critical_set, rel_tol=1e-6):
    """Group the critical set by value: list of (value, index, multiplicity).

    Values within rel_tol (relative) chain into one group; the group value
    is the mean, the index the group majority. Sorted ascending by value.
    """
    if not critical_set:
        raise ParameterError("critical set is empty")
    pts = sorted(critical_set, key=lambda p: p.value)
    groups = [[pts[0]]]
    for p in pts[1:]:
        ref = groups[-1][-1].value
        if abs(p.value - ref) <= rel_tol * abs(ref):
            groups[-1].append(p)
        else:
            groups.append([p])
    code = []
    for g in groups:
        indices = [p.morse_index for p in g]
        index = max(set(indices), key=indices.count)
        code.append((float(np.mean([p.value for p in g])), index, len(g)))
    return code
