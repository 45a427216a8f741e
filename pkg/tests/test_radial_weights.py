import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import integrate, special

from l2ext import planar_domain as pd
from l2ext import quadrature as qd
from l2ext import radial_weights as rw
from l2ext.errors import ConstructionError, DomainError, PreconditionError, UnsupportedError

# 2πK₁(2), frozen from scipy.special.k1 and checked again below
K1_ORACLE = 0.8788032536052903


def test_oracle_value():
    assert 2 * np.pi * special.k1(2.0) == pytest.approx(K1_ORACLE, rel=1e-14)
    val, _ = integrate.quad(lambda s: np.exp(-s - 1 / s), 0, np.inf, epsabs=1e-13)
    assert np.pi * val == pytest.approx(K1_ORACLE, rel=1e-10)


@pytest.mark.parametrize("prof, t, expected", [
    (rw.Power(1), -1.0, 1.0),
    (rw.Power(1), -2.0, 0.5),
    (rw.Power(2), -0.5, 4.0),
    (rw.Scaled(3.0, 1), -1.5, 2.0),
])
def test_eval_u(prof, t, expected):
    assert rw.eval_u(prof, t) == pytest.approx(expected, rel=1e-14)


@pytest.mark.parametrize("t", [0.0, 0.5])
def test_eval_u_domain(t):
    with pytest.raises(DomainError):
        rw.eval_u(rw.Power(1), t)


@pytest.mark.parametrize("prof, s, expected", [
    (rw.Power(1), 1.0, -1.0),
    (rw.Power(1), 4.0, -0.25),
])
def test_eval_u_inverse(prof, s, expected):
    assert rw.eval_u_inverse(prof, s) == pytest.approx(expected, rel=1e-14)


def test_sampled_inverse_matches_generator():
    # dyadic knots, so u = 2 sits on the knot t = -1/2
    ts = -(2.0 ** np.arange(4, -7, -1))
    samp = rw.Sampled.from_profile(rw.Power(1), ts)
    assert rw.eval_u_inverse(samp, 2.0) == pytest.approx(-0.5, abs=1e-9)
    # between knots the inverse follows the interpolant, which lies above u
    assert rw.eval_u_inverse(samp, 3.0) < -1 / 3


@pytest.mark.parametrize("s", [0.0, -1.0])
def test_eval_u_inverse_domain(s):
    with pytest.raises(DomainError):
        rw.eval_u_inverse(rw.Power(1), s)


@pytest.mark.parametrize("knots", [
    [(-2.0, 1.0), (-1.0, 0.5)],                 # decreasing
    [(-3.0, 1.0), (-2.0, 3.0), (-1.0, 4.0)],    # concave
    [(-1.0, 1.0)],                              # too few knots
])
def test_sampled_rejects_bad_knots(knots):
    with pytest.raises(ConstructionError):
        rw.Sampled(knots)


@pytest.mark.parametrize("prof, w, expected", [
    (rw.Power(1), np.exp(-0.5), 1.0),
    (rw.Power(1), 0.0, 0.0),
    (rw.Power(2), np.exp(-2.0), 0.5),
])
def test_psi(prof, w, expected):
    assert rw.psi(prof, w) == pytest.approx(expected, abs=1e-14)


def test_psi_outside():
    with pytest.raises(DomainError):
        rw.psi(rw.Power(1), 1.0)


@pytest.mark.parametrize("prof", [rw.Power(0.5), rw.Power(1), rw.Power(2), rw.Scaled(2.0, 1.5),
                                  rw.Regularized(rw.Power(1), 0.1),
                                  rw.Sampled([(-4, 0.25), (-2, 0.5), (-1, 1.0), (-0.5, 2.5)])])
def test_inverse_consistency(prof):
    s = np.geomspace(1e-6, 1e6, 400)
    assert np.max(np.abs(prof.u(prof.u_inv(s)) - s) / s) <= 1e-10


@pytest.mark.parametrize("prof", [rw.Power(0.5), rw.Power(1), rw.Power(2)])
def test_psi_positive_monotone(prof):
    r = np.linspace(1e-3, 0.999, 500)
    v = rw.psi(prof, r)
    assert np.all(v > 0)
    assert np.all(np.diff(v) >= 0)


def test_green_type_radial_values():
    cert = rw.green_type_radial(rw.Power(1))
    z = np.exp(-1.0)                   # log|z|² = −2
    w = np.exp(-0.5)                   # ψ(w) = 1
    assert float(cert.g_tilde(z, w)) == pytest.approx(-1.0, abs=1e-14)
    rng = np.random.default_rng(1)
    z = rng.uniform(0.05, 0.95, 50) * np.exp(2j * np.pi * rng.uniform(size=50))
    w = rng.uniform(0, 0.99, 50)
    assert np.allclose(cert.g_tilde(z, w) - np.log(np.abs(z) ** 2) - cert.a_tilde(z, w), 0)


def test_g_tilde_negative(power1_hd):
    from l2ext.hartogs import sample_lift
    cert = rw.green_type_radial(rw.Power(1))
    z, w = sample_lift(power1_hd, 100000, np.random.default_rng(7))
    assert z.size > 90000
    assert np.all(cert.g_tilde(z, w) < 0)


@pytest.mark.parametrize("p", [0.5, 1.0, 2.0])
def test_prop31_identity(p):
    lhs, rhs, rel = rw.prop31_check(rw.Power(p), qd.AdaptiveRadial(1e-10))
    assert rel <= 1e-8
    assert lhs > 0


def test_prop31_value_p1():
    lhs, rhs, _ = rw.prop31_check(rw.Power(1))
    assert lhs == pytest.approx(K1_ORACLE, abs=1e-9)
    assert rhs == pytest.approx(K1_ORACLE, abs=1e-9)
    assert lhs == pytest.approx(0.878803, abs=1e-6)


@settings(max_examples=12, deadline=None)
@given(a=st.floats(0.2, 5.0), p=st.floats(0.3, 3.0))
def test_prop31_identity_scaled(a, p):
    _, _, rel = rw.prop31_check(rw.Scaled(a, p))
    assert rel <= 1e-8


def test_prop31_identity_sampled():
    prof = rw.Sampled([(-6, 0.2), (-3, 0.4), (-1, 1.0), (-0.4, 3.0), (-0.1, 14.0)])
    _, _, rel = rw.prop31_check(prof)
    assert rel <= 1e-8


def test_regularize_zero_weight(disc):
    w = rw.regularize(rw.ParametricWeight("zero", disc), 1.0)
    assert float(w.phi(0.0)) == 0.0
    z = np.sqrt(1 - np.exp(-1.0))
    assert float(w.phi(z)) == pytest.approx(1.0, rel=1e-13)


def test_regularize_radial_stays_convex(disc):
    w = rw.regularize(rw.RadialWeight(rw.Power(1)), 0.1)
    assert w.is_radial
    rw.check_profile(w.profile)


def test_regularize_needs_unit_disc():
    with pytest.raises(UnsupportedError):
        rw.regularize(rw.ParametricWeight("zero", pd.Disc(2.0)), 0.1)


def test_check_profile_flags_violation():
    class Bad(rw.Power):
        def _u(self, t):
            return super()._u(t) + 0.3 * np.sin(4 * t)
    with pytest.raises(PreconditionError):
        rw.check_profile(Bad(1.0))


def test_sharper_constant_radial():
    S, info = rw.sharper_constant_radial(rw.Power(1), return_info=True)
    _, rhs, _ = rw.prop31_check(rw.Power(1))
    assert S == pytest.approx(rhs, rel=1e-9)
    assert S < np.pi
    assert info["tail_bound"] < 1e-12


def test_regularization_limit():
    eps = [0.4, 0.2, 0.1, 0.05]
    S = [rw.sharper_constant_radial(rw.Regularized(rw.Power(1), e)) for e in eps]
    S0 = rw.sharper_constant_radial(rw.Power(1))
    # adding −ε log(1 − |z|²) ≥ 0 shrinks the integrand, so S(ε) ≤ S(0) and
    # S increases toward S(0) as ε decreases
    assert all(a <= b for a, b in zip(S, S[1:]))
    assert all(s <= S0 for s in S)
    # the gap is first order in ε (about 0.28 ε), so one Richardson step closes it
    assert abs(S[-1] - S0) <= 2e-2
    assert abs(2 * S[-1] - S[-2] - S0) <= 1e-3


def test_regularized_zero_tends_to_pi():
    S = [rw.sharper_constant_radial(rw.Regularized(None, e)) for e in (0.1, 0.01, 0.001)]
    assert all(a < b for a, b in zip(S, S[1:]))
    assert np.pi - S[-1] < 1e-2


@pytest.mark.parametrize("weight", [
    rw.RadialWeight(rw.Power(1)),
    rw.ParametricWeight("quadratic", alpha=1.0, center=0.4),
    rw.ParametricWeight("exp_harmonic", alpha=0.5, b=1 + 0.5j),
])
def test_weights_subharmonic_and_normalized(weight):
    assert float(weight.phi(0.0)) == pytest.approx(0.0, abs=1e-12)
    worst, ok = rw.check_subharmonic(weight)
    assert ok, worst


def test_weight_from_config(disc):
    w = rw.weight_from_config({"kind": "parametric", "family": "quadratic",
                               "params": {"alpha": 1.0, "center": [0.4, 0.0]}}, disc)
    assert float(w.phi(0.4)) == pytest.approx(-0.16)
    with pytest.raises(ConstructionError):
        rw.ParametricWeight("quadratic", disc, alpha=-1.0)
