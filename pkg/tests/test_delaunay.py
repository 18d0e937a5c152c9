import json

import numpy as np
import pytest

from conftest import CYLINDER, NODOID, OPEN, SPHERE, UNDULOID, expm_oracle
from dpw_delaunay.delaunay import (
    BRANCHED,
    DelaunayParams,
    axis_and_circle,
    check_closing,
    classify,
    closed_form_frame,
    delaunay_geometry,
    diagonalized_frame,
    expm_traceless,
    mu,
    neck_bulge_radii,
    profile_first_integral,
    rotation_normalize,
    xi_minus1,
)
from dpw_delaunay.dpw import adjoint, immerse
from dpw_delaunay.delaunay import delaunay_triple
from dpw_delaunay.loops import circle_points, evaluate


def test_params_validation():
    with pytest.raises(ValueError):
        DelaunayParams(0.3, 0.2, H=0)
    with pytest.raises(ValueError):
        DelaunayParams(0.3, 0.2, lam0=2.0)


def test_params_dict_round_trip(tmp_path):
    p = DelaunayParams(0.3j, -0.2j, 0.1, 2.0, np.exp(0.4j))
    again = DelaunayParams.from_dict(json.loads(json.dumps(p.to_dict())))
    assert again.a == pytest.approx(p.a) and again.b == pytest.approx(p.b)
    assert again.lam0 == pytest.approx(p.lam0)
    f = tmp_path / "p.json"
    f.write_text(json.dumps({"a": 0.25, "b": 0.25}))
    assert DelaunayParams.from_json(f).H == 1.0


def test_residue_is_skew_hermitian_on_circle():
    lam = circle_points(32)
    for p in (UNDULOID, NODOID, DelaunayParams(0.3j, -0.2j, 0.1)):
        x = xi_minus1(p, lam) * 1j
        assert np.abs(x + np.conj(np.swapaxes(x, -1, -2))).max() <= 1e-15


def test_trace_free_exponential_matches_scipy():
    lam = np.exp(1j * np.linspace(0, 6, 17))
    for w in (0.0, 1e-6, 0.7 - 2j, 3.0):
        np.testing.assert_allclose(expm_traceless(w * xi_minus1(NODOID, lam)),
                                   expm_oracle(NODOID, w, lam), atol=1e-12)


@pytest.mark.parametrize("params", [CYLINDER, UNDULOID, NODOID, SPHERE])
def test_mu_at_one_is_one_half(params):
    assert complex(mu(params, 1.0)) == pytest.approx(0.5, abs=1e-12)


def test_diagonalized_frame_agrees():
    lam = np.exp(1j * np.array([0.2, 1.0, 2.5]))
    z = 2 * np.exp(0.7j)
    ref = evaluate(closed_form_frame(UNDULOID, z), lam)
    np.testing.assert_allclose(diagonalized_frame(UNDULOID, z, lam), ref, atol=1e-10)


@pytest.mark.parametrize("params", [CYLINDER, UNDULOID, NODOID, SPHERE])
def test_closing_family(params):
    c = check_closing(params)
    assert c.closes and c.simply_wrapped and c.on_ellipse
    assert c.report.closed and c.report.cond1_sign == -1


def test_open_parameters_do_not_close():
    c = check_closing(OPEN)
    assert not c.half_integer
    assert not c.report.closed


def test_complex_ab_not_real():
    c = check_closing(DelaunayParams(0.3, 0.2j))
    assert not c.ab_real and not c.closes


def test_double_wrapped_detected():
    # mu(1) = 1 when a + b = 1 and c = 0
    c = check_closing(DelaunayParams(0.6, 0.4))
    assert c.half_integer and not c.simply_wrapped


def test_radii_examples():
    assert neck_bulge_radii(CYLINDER) == pytest.approx((0.5, 0.5))
    assert neck_bulge_radii(UNDULOID) == pytest.approx((0.4, 0.6))
    assert neck_bulge_radii(SPHERE) == pytest.approx((0.0, 1.0))
    neck, bulge = neck_bulge_radii(NODOID)
    assert neck < 0 < bulge
    assert neck == pytest.approx((1 - np.sqrt(1.24)) / 2)
    assert neck_bulge_radii(DelaunayParams(0.3, 0.2, H=2.0)) == pytest.approx((0.2, 0.3))


def test_radii_reject_large_ab():
    with pytest.raises(ValueError, match="16ab"):
        neck_bulge_radii(DelaunayParams(0.5, 0.5))


def test_classification():
    assert classify(CYLINDER) == "cylinder"
    assert classify(UNDULOID) == "unduloid"
    assert classify(NODOID) == "nodoid"
    assert classify(SPHERE) == "sphere-limit"
    assert classify(DelaunayParams(0.0, 0.3)) == BRANCHED


def test_rotation_normalize():
    a, b, A = rotation_normalize(0.3j, -0.2j)
    assert a == pytest.approx(0.3) and b == pytest.approx(0.2)
    with pytest.raises(ValueError):
        rotation_normalize(0.3, 0.2j)


def test_rotated_parameters_give_rotated_surface():
    p = DelaunayParams(0.3j, -0.2j)
    _, _, A = rotation_normalize(p.a, p.b)
    A0 = A.coeff(0)
    for w in (0.3 + 1j, -1 + 2.5j):
        x = immerse(delaunay_triple(UNDULOID), w)
        y = immerse(delaunay_triple(p), w)
        np.testing.assert_allclose(y, adjoint(A0, x), atol=1e-9)


@pytest.mark.parametrize("params", [CYLINDER, UNDULOID, NODOID])
def test_unit_circle_image(params):
    axis, center, radius, cos_theta = axis_and_circle(params)
    tri = delaunay_triple(params)
    pts = np.array([immerse(tri, complex(0, t)) for t in np.linspace(0, 2 * np.pi, 9)[:-1]])
    np.testing.assert_allclose(np.linalg.norm(pts - center, axis=1), radius, atol=1e-9)
    assert np.abs((pts - center) @ axis).max() <= 1e-9
    assert cos_theta == pytest.approx(2 * (params.a + params.b))


def test_first_integral():
    assert profile_first_integral(0.5, 0.0) == pytest.approx(0.25)
    assert profile_first_integral(0.4, 0.0) == pytest.approx(0.24)


def test_geometry_serializes():
    d = delaunay_geometry(UNDULOID).to_dict()
    json.dumps(d)
    assert d["classification"] == "unduloid"
