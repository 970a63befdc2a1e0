import numpy as np
import pytest

from knotfield import curves
from knotfield import fieldkernel as fk
from knotfield.errors import ParameterError, SingularityError

TWO_PI = 2 * np.pi

CURVE_SET = [
    ("unknot", {}),
    ("trefoil", {"gamma": 1.0}),
    ("figure-eight", {"gamma": 1.0}),
    ("rectangle", {"a": 2.0}),
    ("stadium", {"a": 1.5}),
    ("ellipse", {"a": 2.5}),
]


@pytest.fixture(scope="module", params=CURVE_SET, ids=lambda c: c[0])
def charges(request):
    name, params = request.param
    return curves.discretize(curves.make_curve(name, params), 256)


def _random_points(charges, rng, count=100):
    lo, hi = charges.bounding_box()
    center = 0.5 * (lo + hi)
    half = np.maximum(0.5 * (hi - lo), 0.3)
    pts = center + rng.uniform(-1.6, 1.6, (count * 2, 3)) * half
    d = np.stack([np.linalg.norm(charges.points - p, axis=1).min()
                  for p in pts])
    return pts[d > 0.15][:count]


def test_unknot_center_values():
    ch = curves.discretize(curves.make_curve("unknot"), 64)
    assert abs(fk.potential(ch, [0, 0, 0]) - TWO_PI) < 1e-12
    assert abs(fk.potential(ch, [0, 0, 1]) - TWO_PI / np.sqrt(2)) < 1e-12
    e = fk.field(ch, [0, 0, 0])
    assert np.linalg.norm(e) < 1e-12
    e_axis = fk.field(ch, [0, 0, 1])
    assert abs(e_axis[0]) < 1e-12 and abs(e_axis[1]) < 1e-12
    assert e_axis[2] > 0


def test_unknot_center_hessian_axisymmetry():
    ch = curves.discretize(curves.make_curve("unknot"), 64)
    h = fk.hessian(ch, [0, 0, 0])
    off_diag = h - np.diag(np.diag(h))
    assert np.abs(off_diag).max() < 1e-12
    assert abs(h[0, 0] - h[1, 1]) < 1e-12
    assert abs(h[2, 2] + 2 * h[0, 0]) < 1e-10


def test_trefoil_origin_potential_matches_reported_value(trefoil_charges_2048):
    assert abs(fk.potential(trefoil_charges_2048, [0, 0, 0]) - 15.42) < 0.01


def test_field_matches_finite_difference_gradient(charges, rng):
    pts = _random_points(charges, rng)
    e = fk.field_batch(charges, pts)
    h = 1e-5
    for axis in range(3):
        step = np.zeros(3)
        step[axis] = h
        fd = -(fk.potential_batch(charges, pts + step)
               - fk.potential_batch(charges, pts - step)) / (2 * h)
        scale = np.linalg.norm(e, axis=1) + np.abs(fd)
        assert (np.abs(e[:, axis] - fd) / scale).max() < 1e-5


def test_hessian_matches_finite_difference_of_field(charges, rng):
    pts = _random_points(charges, rng, count=40)
    hs = fk.hessian_batch(charges, pts)
    h = 1e-5
    for axis in range(3):
        step = np.zeros(3)
        step[axis] = h
        # columns of the phi Hessian = -d(E)/dx_axis
        fd = -(fk.field_batch(charges, pts + step)
               - fk.field_batch(charges, pts - step)) / (2 * h)
        scale = np.abs(hs).max(axis=(1, 2))
        err = np.abs(hs[:, :, axis] - fd).max(axis=1) / scale
        assert err.max() < 1e-5


def test_hessian_symmetric_and_harmonic(charges, rng):
    pts = _random_points(charges, rng)
    hs = fk.hessian_batch(charges, pts)
    assert np.array_equal(hs, np.swapaxes(hs, 1, 2))
    traces = np.abs(np.trace(hs, axis1=1, axis2=2))
    norms = np.abs(hs).max(axis=(1, 2))
    assert (traces / norms).max() < 1e-10


def test_potential_positive(charges, rng):
    pts = _random_points(charges, rng)
    assert np.all(fk.potential_batch(charges, pts) > 0)


def test_planar_field_z_component(rng):
    ch = curves.discretize(curves.make_curve("rectangle", {"a": 2.0}), 256)
    pts_plane = np.column_stack([rng.uniform(-3, 3, 50),
                                 rng.uniform(-2, 2, 50),
                                 np.zeros(50)])
    ez = fk.field_batch(ch, pts_plane)[:, 2]
    assert np.all(ez == 0.0)  # exact: every source is in the plane
    above = pts_plane + [0, 0, 0.7]
    below = pts_plane - [0, 0, 0.7]
    assert np.all(fk.field_batch(ch, above)[:, 2] > 0)
    assert np.all(fk.field_batch(ch, below)[:, 2] < 0)


def test_batch_matches_single_point(charges, rng):
    pts = _random_points(charges, rng, count=7)
    phis = fk.potential_batch(charges, pts)
    es = fk.field_batch(charges, pts)
    hs = fk.hessian_batch(charges, pts)
    for i, p in enumerate(pts):
        assert phis[i] == fk.potential(charges, p)
        assert np.array_equal(es[i], fk.field(charges, p))
        assert np.array_equal(hs[i], fk.hessian(charges, p))


def test_combined_eval_matches_separate(charges, rng):
    p = _random_points(charges, rng, count=3)
    e, h = fk.field_and_hessian_batch(charges, p)
    assert np.array_equal(e, fk.field_batch(charges, p))
    assert np.array_equal(h, fk.hessian_batch(charges, p))


def test_grid_kernels_match_batch(charges, rng):
    pts = _random_points(charges, rng, count=64)
    phi64 = fk.potential_grid(charges, pts, dtype=np.float64)
    assert np.abs(phi64 - fk.potential_batch(charges, pts)).max() < 1e-10
    phi32 = fk.potential_grid(charges, pts, dtype=np.float32)
    rel = np.abs(phi32 - phi64) / phi64
    assert rel.max() < 1e-4
    e64 = fk.field_grid(charges, pts, dtype=np.float64)
    eb = fk.field_batch(charges, pts)
    scale = np.linalg.norm(eb, axis=1, keepdims=True) + 1e-30
    assert (np.abs(e64 - eb) / scale).max() < 1e-8


def test_singularity_error_names_sample():
    ch = curves.discretize(curves.make_curve("unknot"), 64)
    bad = ch.points[17]
    with pytest.raises(SingularityError) as exc:
        fk.potential(ch, bad)
    assert exc.value.sample_index == 17
    with pytest.raises(SingularityError):
        fk.field(ch, bad)
    with pytest.raises(SingularityError):
        fk.hessian(ch, bad)


def test_far_field_monopole():
    ch = curves.discretize(curves.make_curve("unknot"), 128)
    dev100 = fk.far_field_check(ch, 100.0)
    assert dev100 < 1e-4
    tr = curves.discretize(curves.make_curve("trefoil", {"gamma": 1.0}), 512)
    assert fk.far_field_check(tr, 1000.0) < 1e-5
    # monotone decay over a doubling
    assert fk.far_field_check(ch, 200.0) < dev100
    with pytest.raises(ParameterError):
        fk.far_field_check(ch, 5.0)


def test_evaluate_bundle():
    ch = curves.discretize(curves.make_curve("unknot"), 64)
    ev = fk.evaluate(ch, [0.2, 0.1, 0.3])
    assert ev.phi == fk.potential(ch, ev.point)
    assert np.array_equal(ev.E, fk.field(ch, ev.point))
    assert np.array_equal(ev.H, fk.hessian(ch, ev.point))
