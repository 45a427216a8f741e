import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from l2ext import planar_domain as pd
from l2ext.errors import ConstructionError, DomainError

F03 = [1.0, 0.3]


@pytest.mark.parametrize("dom, z, expected", [
    (pd.UnitDisc(), 0.5, True),
    (pd.UnitDisc(), 1.2, False),
    (pd.Disc(2.0), 1.5, True),
    (pd.ConformalImage(F03), 0.4 + 0.3 * 0.16, True),
    (pd.ConformalImage(F03), 1.4, False),
])
def test_contains(dom, z, expected):
    assert bool(pd.contains(dom, z)) is expected


@pytest.mark.parametrize("dom, z, expected", [
    (pd.UnitDisc(), 0.5, np.log(0.25)),
    (pd.Disc(2.0), 1.0, np.log(0.25)),
    (pd.ConformalImage(F03), 0.4 + 0.3 * 0.4 ** 2, np.log(0.16)),
])
def test_green_values(dom, z, expected):
    assert pd.green(dom, z) == pytest.approx(expected, abs=1e-10)


def test_green_pole_and_outside():
    assert pd.green(pd.UnitDisc(), 0.0) == -np.inf
    with pytest.raises(DomainError):
        pd.green(pd.UnitDisc(), 1.5)


@pytest.mark.parametrize("dom, expected", [
    (pd.UnitDisc(), 0.0),
    (pd.Disc(2.0), 2 * np.log(2.0)),
    (pd.ConformalImage(F03), 0.0),
    (pd.ConformalImage([2.0, 0.5]), np.log(4.0)),
])
def test_shift_at_origin(dom, expected):
    assert float(pd.shift(dom, 0.0)) == pytest.approx(expected, abs=1e-12)
    assert dom.shift0 == pytest.approx(expected, abs=1e-12)


def test_shift_limit_oracle():
    # B(0) from the limiting quotient log|z|^2 - G(z) along z -> 0
    dom = pd.ConformalImage(F03)
    z = 1e-6 * np.exp(0.7j)
    lim = np.log(abs(z) ** 2) - pd.green(dom, z)
    assert lim == pytest.approx(dom.shift0, abs=1e-5)


@pytest.mark.parametrize("dom, expected", [
    (pd.UnitDisc(), np.pi),
    (pd.Disc(2.0), 4 * np.pi),
    (pd.ConformalImage(F03), np.pi),
])
def test_optimal_constant(dom, expected):
    assert pd.optimal_constant(dom) == pytest.approx(expected, rel=1e-12)


@pytest.mark.parametrize("R", [0.5, 1.0, 2.0, 5.0])
def test_shift_scaling_law(R):
    assert float(pd.shift(pd.Disc(R), 0.0)) == pytest.approx(2 * np.log(R), abs=1e-14)


def test_boundary_sample():
    pts = pd.boundary_sample(pd.UnitDisc(), 4)
    assert np.allclose(pts, [1, 1j, -1, -1j])
    with pytest.raises(DomainError):
        pd.boundary_sample(pd.Disc(2.0), 2)
    dom = pd.ConformalImage(F03)
    zeta = np.exp(2j * np.pi * np.arange(8) / 8)
    assert np.allclose(pd.boundary_sample(dom, 8), zeta + 0.3 * zeta ** 2)


def test_boundary_sample_gap_ratio():
    pts = pd.boundary_sample(pd.ConformalImage(F03), 200)
    gaps = np.abs(np.diff(np.append(pts, pts[0])))
    ratio = gaps / np.roll(gaps, 1)
    assert np.all(ratio <= 2.0) and np.all(ratio >= 0.5)


def test_non_univalent_map_rejected():
    # f'(ζ) = 1 + 2·0.8ζ vanishes inside the disc
    with pytest.raises(ConstructionError):
        pd.ConformalImage([1.0, 0.8])


@pytest.mark.parametrize("dom", [pd.UnitDisc(), pd.Disc(2.0), pd.ConformalImage(F03)])
def test_negativity(dom):
    rng = np.random.default_rng(0)
    R = dom.bounding_radius
    z = R * (rng.uniform(-1, 1, 20000) + 1j * rng.uniform(-1, 1, 20000))
    z = z[dom.contains(z)][:10000]
    assert np.all(pd.green(dom, z) < 0)


@pytest.mark.parametrize("dom", [pd.Disc(2.0), pd.ConformalImage(F03),
                                 pd.ConformalImage([1.0, 0.2, 0.05])])
def test_shift_is_harmonic(dom):
    rng = np.random.default_rng(3)
    z0 = 0.5 * dom.inradius * np.exp(2j * np.pi * rng.uniform(size=20)) * rng.uniform(size=20)
    circ = 0.05 * dom.inradius * np.exp(2j * np.pi * np.arange(32) / 32)
    avg = pd.shift(dom, z0[:, None] + circ[None, :]).mean(axis=1)
    assert np.max(np.abs(avg - pd.shift(dom, z0))) < 1e-8


@settings(max_examples=60, deadline=None)
@given(r=st.floats(0.01, 0.98), a=st.floats(0, 2 * np.pi))
def test_conformal_consistency(r, a):
    dom = pd.ConformalImage(F03)
    zeta = r * np.exp(1j * a)
    z = zeta + 0.3 * zeta ** 2
    assert float(pd.green(dom, z)) == pytest.approx(np.log(r * r), abs=1e-9)


def test_domain_from_config():
    assert pd.domain_from_config({"kind": "disc", "radius": 2}) == pd.Disc(2.0)
    assert pd.domain_from_config({"kind": "unit_disc"}) == pd.UnitDisc()
    dom = pd.domain_from_config({"kind": "conformal", "coeffs": [1, [0.3, 0]]})
    assert dom == pd.ConformalImage(F03)
