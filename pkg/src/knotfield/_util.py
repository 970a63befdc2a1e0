"""Small shared helpers: worker-count resolution and chunk iteration."""

import os

import numpy as np

_THREADS_ENV = "KNOTFIELD_THREADS"


def resolve_threads(threads=None):
    """Worker count: explicit argument, else KNOTFIELD_THREADS, else cpu count."""
    if threads is not None:
        n = int(threads)
    else:
        env = os.environ.get(_THREADS_ENV, "")
        n = int(env) if env.strip() else (os.cpu_count() or 1)
    if n < 1:
        raise ValueError(f"thread count must be >= 1, got {n}")
    return n


def iter_chunks(n_total, chunk):
    """Yield (start, stop) index pairs covering range(n_total)."""
    for start in range(0, n_total, chunk):
        yield start, min(start + chunk, n_total)


def as_point(x):
    """Coerce to a (3,) float64 vector."""
    p = np.asarray(x, dtype=np.float64).reshape(-1)
    if p.shape != (3,):
        raise ValueError(f"expected a 3-vector, got shape {np.asarray(x).shape}")
    return p


def as_points(x):
    """Coerce to an (M, 3) float64 array."""
    pts = np.atleast_2d(np.asarray(x, dtype=np.float64))
    if pts.ndim != 2 or pts.shape[1] != 3:
        raise ValueError(f"expected an (M, 3) array, got shape {np.asarray(x).shape}")
    return pts
