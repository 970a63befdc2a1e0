"""Potential, field, and Hessian of a weighted point-charge set.

Everything is an explicit pair sum over the charges: phi = sum w_j/|x-p_j|,
E = -grad phi = sum w_j (x-p_j)/|x-p_j|^3, and the Hessian of phi is
sum w_j (3 d d^T - |d|^2 I)/|d|^5. The derivatives are the analytic ones of
the discrete sum, so Newton iterations on E see a consistent model and the
Hessian is exactly symmetric and traceless (each 1/r term is harmonic).

Batch variants chunk over evaluation points; the per-point summation order
is fixed, so results never depend on chunking or worker count. The separate
grid sampler trades the cancellation-free difference formula for a matmul
factorization (optionally float32), which is what makes dense isosurface
grids affordable.
"""

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from ._util import as_point, as_points, iter_chunks, resolve_threads
from .errors import ParameterError, SingularityError

# Points closer to a sample than this are treated as on the curve.
SINGULAR_DISTANCE = 1e-12

_CHUNK = 2048


@dataclass(frozen=True)
class FieldEval:
    """Potential, field, and Hessian of phi at one point."""

    point: np.ndarray
    phi: float
    E: np.ndarray
    H: np.ndarray


def _diffs(charges, pts):
    """(M, K, 3) displacement vectors and (M, K) squared distances."""
    d = pts[:, None, :] - charges.points[None, :, :]
    r2 = np.einsum("mkc,mkc->mk", d, d)
    return d, r2


def _check_singular(charges, pts, r2):
    bad = r2 < SINGULAR_DISTANCE**2
    if np.any(bad):
        m, k = np.argwhere(bad)[0]
        raise SingularityError(
            f"evaluation point {pts[m]} coincides with charge sample {k} "
            f"of {charges.curve_name or 'charges'}", sample_index=int(k))


def potential(charges, x):
    """Scalar potential at a single point (strictly positive)."""
    return float(potential_batch(charges, as_point(x)[None, :])[0])


def field(charges, x):
    """Electric field E = -grad(phi) at a single point."""
    return field_batch(charges, as_point(x)[None, :])[0]


def hessian(charges, x):
    """Symmetric traceless Hessian of phi at a single point."""
    return hessian_batch(charges, as_point(x)[None, :])[0]


def evaluate(charges, x):
    """phi, E, and H bundled for one point."""
    x = as_point(x)
    return FieldEval(point=x, phi=potential(charges, x),
                     E=field(charges, x), H=hessian(charges, x))


def potential_batch(charges, pts):
    """phi at each row of pts; identical semantics to per-point calls."""
    pts = as_points(pts)
    out = np.empty(len(pts))
    for lo, hi in iter_chunks(len(pts), _CHUNK):
        d, r2 = _diffs(charges, pts[lo:hi])
        _check_singular(charges, pts[lo:hi], r2)
        # einsum reduces each row with the same sequential order regardless
        # of batch shape, so batch results match per-point calls exactly
        out[lo:hi] = np.einsum("mk,k->m", 1.0 / np.sqrt(r2), charges.weights)
    return out


def field_batch(charges, pts):
    """E at each row of pts."""
    pts = as_points(pts)
    out = np.empty((len(pts), 3))
    for lo, hi in iter_chunks(len(pts), _CHUNK):
        d, r2 = _diffs(charges, pts[lo:hi])
        _check_singular(charges, pts[lo:hi], r2)
        inv_r3 = r2 ** -1.5
        out[lo:hi] = np.einsum("mk,mkc->mc", charges.weights * inv_r3, d)
    return out


def hessian_batch(charges, pts):
    """Hessian of phi at each row of pts, shape (M, 3, 3)."""
    pts = as_points(pts)
    out = np.empty((len(pts), 3, 3))
    eye = np.eye(3)
    for lo, hi in iter_chunks(len(pts), _CHUNK):
        d, r2 = _diffs(charges, pts[lo:hi])
        _check_singular(charges, pts[lo:hi], r2)
        w_r5 = charges.weights * r2 ** -2.5
        outer = np.einsum("mk,mkc,mke->mce", w_r5, d, d)
        iso = (w_r5 * r2).sum(axis=1)
        block = 3.0 * outer - iso[:, None, None] * eye
        # enforce exact symmetry against einsum rounding-order asymmetry
        out[lo:hi] = 0.5 * (block + np.swapaxes(block, 1, 2))
    return out


def field_and_hessian_batch(charges, pts, min_distance=None):
    """(E, H) sharing one pass over the pair differences.

    With min_distance set, near-curve distances are floored instead of
    raising, which keeps batched Newton iterations alive when a stray
    iterate lands on the curve (it is rejected later anyway).
    """
    pts = as_points(pts)
    e_out = np.empty((len(pts), 3))
    h_out = np.empty((len(pts), 3, 3))
    eye = np.eye(3)
    for lo, hi in iter_chunks(len(pts), _CHUNK):
        d, r2 = _diffs(charges, pts[lo:hi])
        if min_distance is None:
            _check_singular(charges, pts[lo:hi], r2)
        else:
            np.maximum(r2, min_distance**2, out=r2)
        inv_r3 = r2 ** -1.5
        e_out[lo:hi] = np.einsum("mk,mkc->mc", charges.weights * inv_r3, d)
        # same op sequence as hessian_batch so the two agree bitwise
        w_r5 = charges.weights * r2 ** -2.5
        outer = np.einsum("mk,mkc,mke->mce", w_r5, d, d)
        iso = (w_r5 * r2).sum(axis=1)
        block = 3.0 * outer - iso[:, None, None] * eye
        h_out[lo:hi] = 0.5 * (block + np.swapaxes(block, 1, 2))
    return e_out, h_out


def potential_grid(charges, pts, dtype=np.float64, threads=None,
                   min_distance=SINGULAR_DISTANCE):
    """phi on a large point set via the matmul factorization.

    |x-p|^2 is expanded as |x|^2 - 2 x.p + |p|^2 so the inner loop is a
    BLAS matmul; distances are floored at `min_distance` instead of raising,
    since grid corners may legitimately graze the curve. Accuracy near the
    curve is slightly worse than the difference formula; use the *_batch
    functions when full precision matters.
    """
    pts = as_points(pts)
    p = charges.points.astype(dtype)
    w = charges.weights.astype(dtype)
    pp = np.einsum("kc,kc->k", p, p)
    floor = dtype(max(min_distance, 1e-18) ** 2)
    out = np.empty(len(pts), dtype=dtype)

    def run(lo, hi):
        x = pts[lo:hi].astype(dtype)
        r2 = np.einsum("mc,mc->m", x, x)[:, None] - 2.0 * (x @ p.T) + pp
        np.maximum(r2, floor, out=r2)
        out[lo:hi] = (1.0 / np.sqrt(r2)) @ w

    _parallel_chunks(run, len(pts), threads)
    return out


def field_grid(charges, pts, dtype=np.float64, threads=None,
               min_distance=SINGULAR_DISTANCE):
    """E on a large point set via the matmul factorization.

    E_i = x_i * sum_j u_ij w_j - sum_j u_ij w_j p_j with u = r^-3, so the
    reductions are matmuls as well.
    """
    pts = as_points(pts)
    p = charges.points.astype(dtype)
    w = charges.weights.astype(dtype)
    wp = w[:, None] * p
    pp = np.einsum("kc,kc->k", p, p)
    floor = dtype(max(min_distance, 1e-18) ** 2)
    out = np.empty((len(pts), 3), dtype=dtype)

    def run(lo, hi):
        x = pts[lo:hi].astype(dtype)
        r2 = np.einsum("mc,mc->m", x, x)[:, None] - 2.0 * (x @ p.T) + pp
        np.maximum(r2, floor, out=r2)
        u = r2 ** dtype(-1.5)
        out[lo:hi] = x * (u @ w)[:, None] - u @ wp

    _parallel_chunks(run, len(pts), threads)
    return out


def _parallel_chunks(run, n_total, threads):
    workers = resolve_threads(threads)
    spans = list(iter_chunks(n_total, _CHUNK * 4))
    if workers == 1 or len(spans) == 1:
        for lo, hi in spans:
            run(lo, hi)
        return
    with ThreadPoolExecutor(max_workers=workers) as pool:
        list(pool.map(lambda s: run(*s), spans))


def bounding_radius(charges, center=None):
    """Largest sample distance from `center` (default: sample centroid)."""
    c = np.asarray(center, dtype=np.float64) if center is not None \
        else charges.points.mean(axis=0)
    return float(np.linalg.norm(charges.points - c, axis=1).max()), c


def far_field_check(charges, radius, n_directions=256):
    """Max relative deviation of phi*r from the total charge at `radius`.

    Directions are a deterministic Fibonacci covering of the sphere around
    the charge centroid. Decays like 1/r (dipole) or faster.
    """
    r_max, center = bounding_radius(charges)
    if radius <= 10.0 * r_max:
        raise ParameterError(
            f"radius {radius} must exceed 10x bounding radius {r_max:.3g}")
    k = np.arange(n_directions)
    golden = (1.0 + np.sqrt(5.0)) / 2.0
    z = 1.0 - (2.0 * k + 1.0) / n_directions
    theta = 2.0 * np.pi * k / golden
    rho = np.sqrt(1.0 - z * z)
    dirs = np.stack([rho * np.cos(theta), rho * np.sin(theta), z], axis=1)
    phi = potential_batch(charges, center + radius * dirs)
    q = charges.total_charge
    return float(np.max(np.abs(phi * radius - q)) / q)
