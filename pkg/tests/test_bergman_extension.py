import numpy as np
import pytest
from scipy import integrate

from l2ext import bergman_extension as be
from l2ext import planar_domain as pd
from l2ext import quadrature as qd
from l2ext import radial_weights as rw
from l2ext.errors import NonConvergence


@pytest.fixture(scope="module")
def quad_weight(disc):
    return rw.ParametricWeight("quadratic", disc, alpha=1.0, center=0.4)


def test_gram_flat(disc):
    M = be.gram(disc, rw.ParametricWeight("zero", disc), 1)
    assert np.allclose(M, np.diag([np.pi, np.pi / 2]), atol=1e-12)


def test_gram_radial_diagonal(disc):
    M = be.gram(disc, rw.RadialWeight(rw.Power(1)), 2)
    assert np.max(np.abs(M - np.diag(np.diag(M)))) <= 1e-12


def test_gram_quadratic_offdiagonal(disc, quad_weight):
    M = be.gram(disc, quad_weight, 2)

    # oracle: direct polar quadrature of conj(z) e^{-phi} by scipy
    def f(r, th, part):
        z = r * np.exp(1j * th)
        val = np.conj(z) * np.exp(-quad_weight.phi(z)) * r
        return val.real if part == 0 else val.imag
    re = integrate.dblquad(lambda r, th: f(r, th, 0), 0, 2 * np.pi, 0, 1, epsabs=1e-11)[0]
    im = integrate.dblquad(lambda r, th: f(r, th, 1), 0, 2 * np.pi, 0, 1, epsabs=1e-11)[0]
    assert abs(M[0, 1]) > 0.1
    assert M[0, 1] == pytest.approx(re + 1j * im, abs=1e-8)
    assert np.allclose(M, M.conj().T)


def test_min_extension_flat(disc):
    ext = be.min_extension(disc, rw.ParametricWeight("zero", disc), 8)
    e0 = np.eye(9)[0]
    assert np.linalg.norm(ext.coefficients - e0) <= 1e-8
    assert ext.norm_sq == pytest.approx(np.pi, rel=1e-10)


@pytest.mark.parametrize("p", [0.5, 1.0, 2.0])
def test_min_extension_radial_collapse(disc, p):
    prof = rw.Power(p)
    w = rw.RadialWeight(prof)
    ext = be.min_extension(disc, w, 8)
    assert np.linalg.norm(ext.coefficients - np.eye(9)[0]) <= 1e-8
    lhs, _, _ = rw.prop31_check(prof)
    assert ext.norm_sq == pytest.approx(lhs, abs=1e-6)
    assert ext.coefficients[0] == 1.0


def test_min_extension_monotone_in_degree(disc, quad_weight):
    m = [be.min_extension(disc, quad_weight, N).norm_sq for N in (1, 2, 4, 8, 16)]
    assert m[0] > m[1] > m[2] > m[3]
    # by N = 16 the ladder has saturated to round-off
    assert m[4] <= m[3] * (1 + 1e-13)


@pytest.mark.parametrize("N", [2, 8, 16])
def test_quadrature_duality(disc, quad_weight, N):
    ext = be.min_extension(disc, quad_weight, N)
    assert abs(ext.norm_sq - ext.norm_sq_dual) <= 1e-10 * ext.norm_sq


@pytest.mark.parametrize("weight", [rw.ParametricWeight("quadratic", alpha=1.0, center=0.4),
                                    rw.ParametricWeight("exp_harmonic", alpha=0.5, b=1 + 0.5j)])
def test_orthonormalized_branch_agrees(disc, weight, monkeypatch):
    chol = be.min_extension(disc, weight, 16)
    monkeypatch.setattr(be, "COND_SWITCH", 0.0)
    qr = be.min_extension(disc, weight, 16)
    assert (chol.method, qr.method) == ("cholesky", "qr")
    assert qr.norm_sq == pytest.approx(chol.norm_sq, rel=1e-12)
    assert np.allclose(qr.coefficients, chol.coefficients, atol=1e-8)


def test_ill_conditioned_radial_uses_qr(disc):
    ext = be.min_extension(disc, rw.RadialWeight(rw.Power(2)), 32)
    assert ext.method == "qr" and ext.conditioning > be.COND_SWITCH
    assert np.linalg.norm(ext.coefficients - np.eye(33)[0]) <= 1e-8


def test_min_extension_auto_ladder(disc, quad_weight):
    ext = be.min_extension_auto(disc, quad_weight)
    (N1, m1), (N2, m2) = ext.ladder[-2:]
    assert N2 == 2 * N1
    assert abs(m2 - m1) <= 1e-3 * m1


def test_min_extension_auto_refuses(disc, quad_weight):
    with pytest.raises(NonConvergence):
        be.min_extension_auto(disc, quad_weight, N0=1, N_max=2, tol=1e-14)


def test_conformal_flat_matches_optimal():
    dom = pd.ConformalImage([1.0, 0.3])
    # the minimizer is f'(0)/f'(ζ), a geometric series in 0.6ζ
    ext = be.min_extension(dom, rw.ParametricWeight("zero", dom), 32)
    assert ext.norm_sq == pytest.approx(dom.optimal_constant(), rel=1e-9)


def test_polar_tensor_scheme(disc, quad_weight):
    a = be.min_extension(disc, quad_weight, 8, qd.PolarTensor(80, 96)).norm_sq
    b = be.min_extension(disc, quad_weight, 8).norm_sq
    assert a == pytest.approx(b, rel=1e-9)
