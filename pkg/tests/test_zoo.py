import json
import math

import numpy as np
import pytest

from curvlab.curvature import curvature_bundle
from curvlab.tensors import norm2
from curvlab.zoo import (
    ZooError,
    conformal,
    load_metric,
    perturbation,
    product_spheres,
    product_weyl_norm2,
    sample_points,
    save_metric,
    sphere,
    zoo,
)

import oracles


def test_zoo_dispatch_and_errors():
    assert zoo("sphere", {"n": 4, "r": 2}).params == {"r": 2.0}
    with pytest.raises(ZooError):
        zoo("torus", {})
    with pytest.raises(ZooError):
        zoo("sphere", {"n": 4, "radius": 1})
    with pytest.raises(ZooError):
        product_spheres(2, 1, 2, -1)
    with pytest.raises(ZooError):
        product_spheres(2, 1, 2, 1, n=5)


def test_perturbation_is_seeded_and_definite():
    a, b = perturbation(5, 9), perturbation(5, 9)
    assert a.components == b.components
    assert a.components != perturbation(5, 10).components
    pts = sample_points(a, 200, 3)
    vals = a.values(pts)
    assert np.all(np.linalg.eigvalsh(vals) > 0)
    assert np.all(a.contains(pts))


def test_perturbation_guards():
    with pytest.raises(ZooError):
        perturbation(3, 0)
    with pytest.raises(ZooError):
        perturbation(4, 0, eps=0.5)


def test_zero_perturbation_is_flat():
    m = perturbation(4, 0, eps=0.0)
    b = curvature_bundle(m, sample_points(m, 3, 0), order=2)
    assert np.all(b.riemann == 0)


def test_product_weyl_formula_matches_blocks():
    for p, a, q, bb in [(2, 1.0, 2, 1.0), (2, 1.0, 2, 2.0), (2, 1.0, 3, 1.5), (3, 2.0, 3, 1.0)]:
        g, rm, ric, scal = oracles.block_product_curvature([(p, a), (q, bb)])
        w = oracles.weyl(rm, ric, scal, g)
        assert product_weyl_norm2(p, a, q, bb) == pytest.approx(np.einsum("ijkl,ijkl->", w, w))


def test_product_with_circle_is_conformally_flat():
    m = product_spheres(1, 1.0, 3, 1.0)
    b = curvature_bundle(m, sample_points(m, 3, 0), order=2)
    assert np.abs(b.weyl).max() < 1e-12
    assert m.oracle.conformally_flat


def test_conformal_scalar_formula():
    # R = -e^{-2f}(2(n-1) Lap f + (n-2)(n-1)|df|^2) for g = e^{2f} delta
    m = conformal(4, "0.3*x1 - 0.2*x2^2")
    p = np.array([0.1, 0.3, -0.2, 0.05])
    f = 0.3 * p[0] - 0.2 * p[1] ** 2
    lap = -0.4
    df2 = 0.3**2 + (0.4 * p[1]) ** 2
    expected = -math.exp(-2 * f) * (6 * lap + 6 * df2)
    assert curvature_bundle(m, p, order=2).scalar == pytest.approx(expected, rel=1e-12)


def test_sphere_oracle_record():
    o = sphere(5, 2.0).oracle
    assert o.scalar == pytest.approx(20 / 4)
    assert o.einstein and o.conformally_flat


def test_json_round_trip(tmp_path):
    m = product_spheres(2, 1.0, 2, 2.0)
    path = tmp_path / "m.json"
    save_metric(m, path)
    data = json.loads(path.read_text())
    assert set(data) >= {"name", "dim", "coordinates", "parameters", "components", "sampling_box"}
    back = load_metric(path)
    assert back.to_json() == m.to_json()
    p = sample_points(m, 2, 0)
    assert np.allclose(
        norm2(curvature_bundle(back, p, order=2).weyl, np.linalg.inv(back.values(p))),
        m.oracle.weyl_norm2,
    )


def test_invalid_metric_file(tmp_path):
    path = tmp_path / "bad.json"
    path.write_text(json.dumps({"name": "x", "dim": 3, "coordinates": ["x1", "x2"], "components": []}))
    with pytest.raises(ZooError):
        load_metric(path)
    path.write_text(json.dumps({"name": "x", "coordinates": ["x1"], "components": [["1 + y"]]}))
    with pytest.raises(ValueError):
        load_metric(path)


def test_lower_triangle_is_mirrored():
    m = sphere(2, 1.0)
    data = m.to_json()
    data["components"][1][0] = "garbage that is ignored"
    from curvlab.zoo import MetricSpec

    m2 = MetricSpec.from_json(data)
    assert np.allclose(m2.values([0.1, 0.2]), m.values([0.1, 0.2]))


def test_sample_points_reproducible():
    m = sphere(4, 1.0)
    assert np.array_equal(sample_points(m, 5, 42), sample_points(m, 5, 42))
    assert np.all(m.contains(sample_points(m, 50, 1)))
