import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from l2ext import hartogs as hg
from l2ext import planar_domain as pd
from l2ext import radial_weights as rw
from l2ext.errors import ConstructionError, UnsupportedError


@pytest.fixture(scope="module")
def flat(disc):
    return hg.build(disc, rw.ParametricWeight("zero", disc))


def test_build_rejects_mismatch(disc):
    with pytest.raises(ConstructionError):
        hg.build(pd.Disc(2.0), rw.ParametricWeight("zero", disc))


def test_flat_lift_is_bidisc(flat):
    rng = np.random.default_rng(0)
    z = rng.uniform(-1.2, 1.2, 2000) + 1j * rng.uniform(-1.2, 1.2, 2000)
    w = rng.uniform(-1.2, 1.2, 2000) + 1j * rng.uniform(-1.2, 1.2, 2000)
    assert np.array_equal(flat.contains(z, w), (np.abs(z) < 1) & (np.abs(w) < 1))


def test_radial_membership_example(power1_hd):
    z = np.exp(-0.5)                  # log|z|² = −1, e^{−u(−1)} = e^{−1}
    w = np.exp(-1.0)                  # |w|² = e^{−2}
    assert bool(power1_hd.contains(z, w))


@pytest.mark.parametrize("hd_name", ["flat", "power1_hd", "quad_hd"])
def test_fiber_over_origin(hd_name, request):
    hd = request.getfixturevalue(hd_name)
    r = np.linspace(0, 1.5, 301)
    assert np.array_equal(hd.contains(np.zeros_like(r), r), r < 1)


@settings(max_examples=50, deadline=None)
@given(x=st.floats(-1, 1), y=st.floats(-1, 1), wr=st.floats(0, 1.2), th=st.floats(0, 6.3))
def test_membership_circle_symmetry(quad_hd, x, y, wr, th):
    z = complex(x, y)
    assert bool(quad_hd.contains(z, wr)) == bool(quad_hd.contains(z, wr * np.exp(1j * th)))


@pytest.mark.parametrize("z, w, kind", [
    (0.0, 1.0, "Graph"),
    (1.0, 0.0, "Vertical"),
    (1.0, 1.0, "Corner"),
    (0.3, 0.2, "NotBoundary"),
])
def test_boundary_kind(flat, z, w, kind):
    assert hg.boundary_kind(flat, z, w) == kind


@pytest.mark.parametrize("weight, expected", [
    (rw.ParametricWeight("quadratic", alpha=1.0, center=0.0), 1.0),
    (rw.ParametricWeight("quadratic", alpha=1.0, center=0.4), 1.0),
    (rw.ParametricWeight("zero"), 0.0),
])
def test_levi_sample(disc, weight, expected):
    rep = hg.levi_sample(hg.build(disc, weight), n=200)
    assert rep.min_eig == pytest.approx(expected, abs=1e-5)
    assert rep.collar == hg.LEVI_COLLAR


def test_levi_exp_harmonic_against_laplacian(disc):
    w = rw.ParametricWeight("exp_harmonic", disc, alpha=0.5, b=1 + 0.5j)
    rep = hg.levi_sample(hg.build(disc, w), n=400)
    x = np.linspace(-1, 1, 801)
    z = (x[None, :] + 1j * x[:, None]).ravel()
    exact_min = np.min(w.laplacian_quarter(z[np.abs(z) < 1 - hg.LEVI_COLLAR]))
    assert rep.min_eig >= exact_min - 1e-5
    assert rep.min_eig > 0


def test_levi_unsupported(power1_hd):
    with pytest.raises(UnsupportedError):
        hg.levi_sample(power1_hd)


def test_radial_certificate_passes(power1_hd):
    rep = hg.verify_certificate(rw.green_type_radial(rw.Power(1)), power1_hd, n=2000)
    assert rep.ok
    assert abs(rep.upper_margin) < 1e-12
    assert abs(rep.lower_margin) < 1e-12


@pytest.mark.parametrize("dom", [pd.UnitDisc(), pd.Disc(2.0), pd.ConformalImage([1.0, 0.3])])
def test_pullback_certificate(dom):
    hd = hg.build(dom, rw.ParametricWeight("zero", dom))
    cert = hg.GreenTypeCertificate.pullback(dom)
    assert hg.verify_certificate(cert, hd, n=1000).ok
    assert hg.certificate_constant(cert) == pytest.approx(dom.optimal_constant(), rel=1e-9)


def test_pullback_unit_disc_b_is_zero(disc):
    cert = hg.GreenTypeCertificate.pullback(disc)
    z = np.array([0, 0.3, 0.5j, -0.7])
    assert np.allclose(cert.b_tilde(z, 0.2), 0.0)


def test_constant_certificate_fails(flat):
    rep = hg.verify_certificate(hg.GreenTypeCertificate.constant(1.0), flat, n=500)
    assert not rep.ok
    assert not rep.negativity_ok


def test_certificate_from_envelope(quad_hd, maxcap32):
    cert = hg.GreenTypeCertificate.from_envelope(maxcap32)
    assert cert.provenance == "MASolution"
    from l2ext.envelope.solution import sharper_constant_ma
    S = hg.certificate_constant(cert)
    assert S == pytest.approx(sharper_constant_ma(maxcap32).value, rel=1e-6)
