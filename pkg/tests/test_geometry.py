import json

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from waveatom import geometry
from waveatom.geometry import (
    Curve,
    chord,
    circle_distance,
    evaluate,
    load_curve,
    make_ellipse,
    make_kite,
    make_star,
    regularity_constant,
    save_curve,
)

ALL_SHAPES = [make_ellipse(1.0, 0.5), make_kite(), make_star(5, 0.3)]


def test_ellipse_positions():
    e = make_ellipse(1, 0.5)
    assert np.allclose(evaluate(e, 0.0).position, [1, 0], atol=1e-15)
    assert np.allclose(evaluate(e, 0.25).position, [0, 0.5], atol=1e-15)


def test_star_tip():
    assert np.allclose(evaluate(make_star(5, 0.3), 0.0).position, [1.3, 0], atol=1e-14)


def test_star_polar_form():
    t = np.linspace(0, 1, 37, endpoint=False)
    x = make_star(5, 0.3).derivatives(t, order=0)[0]
    th = 2 * np.pi * t
    r = 1 + 0.3 * np.cos(5 * th)
    assert np.allclose(x, np.stack([r * np.cos(th), r * np.sin(th)], axis=-1), atol=1e-14)


def test_unit_circle_curvature():
    c = make_ellipse(1, 1)
    for t in (0.0, 0.13, 0.77):
        assert abs(evaluate(c, t).curvature - 1) < 1e-10


@settings(max_examples=50, deadline=None)
@given(st.floats(-3, 3), st.sampled_from(range(3)))
def test_normal_orthogonal_and_unit(t, i):
    p = evaluate(ALL_SHAPES[i], t)
    assert abs(np.dot(p.unit_normal, p.velocity)) < 1e-12 * p.speed
    assert abs(np.linalg.norm(p.unit_normal) - 1) < 1e-14
    assert abs(p.speed - np.linalg.norm(p.velocity)) < 1e-14


@pytest.mark.parametrize("curve", ALL_SHAPES, ids=lambda c: c.name)
def test_derivatives_match_finite_differences(curve):
    t = np.linspace(0, 1, 23, endpoint=False) + 0.01
    h = 1e-5
    x, dx, ddx = curve.derivatives(t)
    xp, dxp, _ = curve.derivatives(t + h)
    xm, dxm, _ = curve.derivatives(t - h)
    assert np.abs((xp - xm) / (2 * h) - dx).max() <= 1e-6 * np.abs(dx).max()
    assert np.abs((dxp - dxm) / (2 * h) - ddx).max() <= 1e-6 * np.abs(ddx).max()


@pytest.mark.parametrize("curve", ALL_SHAPES, ids=lambda c: c.name)
def test_shape_invariants(curve):
    g = curve.sample(4096)
    assert g["speed"].min() > 0
    assert np.all(np.isfinite(g["curvature"]))
    assert regularity_constant(curve, 1024) > 0


def test_exterior_normal_points_outward():
    # for star-shaped curves about the origin the normal has positive radial part
    for curve in (make_ellipse(1, 0.5), make_star(5, 0.3)):
        g = curve.sample(256)
        assert np.all(np.sum(g["x"] * g["normal"], axis=1) > 0)


def test_periodicity():
    k = make_kite()
    assert np.allclose(evaluate(k, 0.3).position, evaluate(k, 1.3).position, atol=1e-14)


def test_ellipse_regularity_constant():
    assert abs(regularity_constant(make_ellipse(1, 0.5), 2048) - 0.5) < 1e-3


def test_chord_and_circle_distance():
    k = make_kite()
    assert chord(k, 0.2, 0.2) == 0
    assert chord(k, 0.1, 0.6) == chord(k, 0.6, 0.1)
    assert abs(circle_distance(0, 0.5) - 2) < 1e-15


@pytest.mark.parametrize("curve", ALL_SHAPES, ids=lambda c: c.name)
def test_chord_comparable_to_circle_distance(curve):
    n = 256
    x = curve.sample(n)["x"]
    speed_max = curve.sample(n)["speed"].max()
    D = regularity_constant(curve, n)
    s, t = np.meshgrid(np.arange(n) / n, np.arange(n) / n, indexing="ij")
    d = circle_distance(s, t)
    phi = np.hypot(*(x[:, None, :] - x[None, :, :]).transpose(2, 0, 1))
    assert np.all(phi >= D * d - 1e-12)
    # chord <= max speed * |s - t| and d >= 4 |s - t| for |s - t| <= 1/2
    assert np.all(phi <= speed_max * d / 4 + 1e-12)


def test_self_intersection_flagged():
    figure_eight = Curve([0, 0, 0], [0, 0, 1], [0, 0, 0], [0, 1, 0])
    assert regularity_constant(figure_eight, 256) <= 1e-12


@pytest.mark.parametrize("args", [(0, 1), (1, -1)])
def test_ellipse_rejects_bad_axes(args):
    with pytest.raises(ValueError):
        make_ellipse(*args)


@pytest.mark.parametrize("args", [(2, 0.3), (5, 1.0), (4.5, 0.2)])
def test_star_rejects_bad_parameters(args):
    with pytest.raises(ValueError):
        make_star(*args)


def test_regularity_grid_too_small():
    with pytest.raises(ValueError):
        regularity_constant(make_kite(), 32)


def test_json_round_trip(tmp_path):
    path = tmp_path / "kite.json"
    save_curve(make_kite(), path)
    data = json.loads(path.read_text())
    assert set(data) == {"cos1", "sin1", "cos2", "sin2", "H"}
    back = load_curve(path)
    t = np.linspace(0, 1, 11)
    assert np.array_equal(back.derivatives(t, 0)[0], make_kite().derivatives(t, 0)[0])


def test_declared_harmonic_limit_enforced():
    with pytest.raises(ValueError):
        Curve.from_dict({"cos1": [0, 1, 0.5], "sin1": [0], "cos2": [0], "sin2": [0, 1], "H": 1})


def test_shape_registry():
    assert set(geometry.SHAPES) == {"ellipse", "kite", "star"}
