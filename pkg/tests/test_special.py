import math

import mpmath as mp
import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import special as sps

from wgnlab import special as S


def _besselk_kernel(nu, r, d, pref):
    # int_0^inf s^(nu-1) exp(-s - pi^2 r^2/s) ds = 2 (pi r)^nu K_nu(2 pi r)
    return complex(pref * 2 * (mp.pi * r) ** nu * mp.besselk(nu, 2 * mp.pi * r))


@settings(max_examples=60, deadline=None)
@given(x=st.floats(-30, 30), y=st.floats(-30, 30))
def test_loggamma_matches_scipy(x, y):
    z = complex(x, y)
    if min(abs(z + k) for k in range(0, 40)) < 1e-3:
        return
    ref = complex(sps.gamma(z))
    ours = complex(S.gamma(z))
    if not np.isfinite(ref) or abs(ref) < 1e-250 or abs(ref) > 1e250:
        return
    assert abs(ours - ref) <= 1e-10 * abs(ref)


def test_riesz_constant_examples():
    for d in (1, 2, 3):
        assert S.riesz_constant(d / 2, d) == pytest.approx(1.0, rel=1e-13)
    ref = math.pi ** (1 / 3 - 1 / 2) * sps.gamma(1 / 3) / sps.gamma(1 / 6)
    assert S.riesz_constant(1 / 3, 1) == pytest.approx(ref, rel=1e-12)
    assert S.riesz_constant(2.0, 3) == pytest.approx(math.pi, rel=1e-13)


@pytest.mark.parametrize("alpha,d", [(0.0, 1), (1.0, 1), (2.5, 2), (-0.1, 3)])
def test_riesz_constant_range(alpha, d):
    with pytest.raises(ValueError):
        S.riesz_constant(alpha, d)


@settings(max_examples=40, deadline=None)
@given(u=st.floats(0.01, 0.99), d=st.sampled_from([1, 2, 3]))
def test_riesz_constant_reflection(u, d):
    # c_{alpha,d} c_{d-alpha,d} = 1
    a = u * d
    assert S.riesz_constant(a, d) * S.riesz_constant(d - a, d) == pytest.approx(1.0, rel=1e-12)


def test_gamma_modulus_examples():
    assert S.gamma_modulus_sq("pure_imaginary", 1.0) == pytest.approx(math.pi / math.sinh(math.pi))
    for y in (0.3, 2.0):
        assert S.gamma_modulus_sq("integer_shift", y, 1) == pytest.approx(math.pi * y / math.sinh(math.pi * y))
    assert S.gamma_modulus_sq("half_integer_shift", 2.0, 1) == pytest.approx(math.pi / math.cosh(2 * math.pi))


def test_gamma_modulus_errors():
    with pytest.raises(ValueError):
        S.gamma_modulus_sq("pure_imaginary", 0.0)
    with pytest.raises(ValueError):
        S.gamma_modulus_sq("integer_shift", 1.0, 0)
    with pytest.raises(ValueError):
        S.gamma_modulus_sq("shifted", 1.0)


@settings(max_examples=50, deadline=None)
@given(kind=st.sampled_from(S.GAMMA_KINDS), y=st.floats(0.05, 20).map(lambda v: v) | st.floats(-20, -0.05),
       m=st.integers(1, 6))
def test_gamma_modulus_against_mpmath(kind, y, m):
    s = {"pure_imaginary": 0, "integer_shift": m, "half_integer_shift": m - 0.5}[kind]
    ref = float(abs(mp.gamma(mp.mpc(s, y))) ** 2)
    assert S.gamma_modulus_sq(kind, y, m) == pytest.approx(ref, rel=1e-10)


def test_multiplier_constants_bound_and_beta():
    for d in (1, 2, 3):
        for tau in (0.1, 1.0, 10.0, 50.0, -3.0):
            mc = S.multiplier_constants(tau, d)
            assert abs(mc.alpha) <= mc.p_bound
            lhs = abs(mc.beta) * abs(tau)
            assert lhs == pytest.approx(d * S.unit_ball_volume(d) * abs(mc.alpha), rel=1e-14)


def test_multiplier_constants_d2_tau2():
    mc = S.multiplier_constants(2.0, 2)
    via_identities = math.sqrt(S.gamma_modulus_sq("integer_shift", 1.0, 1)
                               / S.gamma_modulus_sq("pure_imaginary", -1.0)) / math.pi
    assert abs(mc.alpha) == pytest.approx(via_identities, rel=1e-12)
    assert abs(mc.alpha) == pytest.approx(1 / math.pi, rel=1e-12)


def test_multiplier_constants_against_mpmath():
    for d in (1, 2, 3):
        for tau in (0.3, 7.0):
            ref = mp.pi ** (-d / 2 - 1j * tau) * mp.gamma((d + 1j * tau) / 2) / mp.gamma(-1j * tau / 2)
            assert abs(S.multiplier_constants(tau, d).alpha - complex(ref)) <= 1e-12 * abs(complex(ref))


def test_multiplier_constants_rejects_zero():
    with pytest.raises(ValueError):
        S.multiplier_constants(0.0, 2)


def test_polynomial_bound_degree():
    for d in (1, 2, 3, 4):
        big = S.polynomial_bound(1e6, d) / S.polynomial_bound(1e5, d)
        assert big == pytest.approx(10 ** math.ceil(d / 2), rel=1e-3)


def test_weak_type_polynomial_dominates():
    for d in (1, 2, 3):
        for t in np.geomspace(0.01, 100, 30):
            mc = S.multiplier_constants(t, d)
            assert S.weak_type_polynomial(t, d) >= abs(mc.alpha) * (1 + t) + 2 * abs(mc.beta)
        assert np.isfinite(S.weak_type_polynomial(0.0, d))


@pytest.mark.parametrize("k", [-2, -1, 1, 2])
def test_a_function_zeros(k):
    z = S.a_function_zero(k)
    assert z == pytest.approx(2j * math.pi * k / math.log(4))
    assert abs(S.a_function(z)) <= 1e-10


def test_bessel_kernel_closed_form_d1_alpha2():
    for r in (0.1, 0.5, 1.0):
        assert S.bessel_kernel(2.0, r, 1) == pytest.approx(math.pi * math.exp(-2 * math.pi * r), rel=1e-6)


@pytest.mark.parametrize("alpha,d", [(0.5, 1), (1.0, 2), (2.5, 2), (1.5, 3)])
def test_bessel_kernel_against_besselk(alpha, d):
    pref = mp.pi ** (d / 2) / mp.gamma(alpha / 2)
    for r in (0.05, 0.4, 2.0):
        ref = _besselk_kernel((alpha - d) / 2, r, d, pref).real
        assert S.bessel_kernel(alpha, r, d) == pytest.approx(ref, rel=1e-8)


def test_bessel_kernel_fourier_transform_d1():
    # int G_alpha(x) cos(2 pi x xi) dx = (1 + xi^2)^(-alpha/2)
    from scipy import integrate
    alpha, xi = 2.5, 0.7
    val = 2 * integrate.quad(lambda x: S.bessel_kernel(alpha, x, 1) * math.cos(2 * math.pi * x * xi), 0, 12,
                             limit=200)[0]
    assert val == pytest.approx((1 + xi**2) ** (-alpha / 2), rel=1e-7)


@pytest.mark.parametrize("alpha", [0.5, 1.0, 2.5])
@pytest.mark.parametrize("d", [1, 2])
def test_bessel_normalization(alpha, d):
    assert abs(S.bessel_normalization(alpha, d) - 1) <= 1e-4


def test_bessel_kernel_origin():
    with pytest.raises(ValueError, match="singular at origin"):
        S.bessel_kernel(1.0, 0.0, 1)
    assert S.bessel_kernel(2.5, 0.0, 2) > 0


@pytest.mark.parametrize("alpha", [0.5, 1.0, 2.5])
def test_bessel_kernel_positive_and_decreasing(alpha):
    for d in (1, 2):
        vals = [S.bessel_kernel(alpha, r, d) for r in np.geomspace(0.01, 5, 25)]
        assert all(v > 0 for v in vals)
        assert all(a > b for a, b in zip(vals, vals[1:]))


def test_bessel_decay_constant_finite():
    radii = [1 / math.pi, 0.5, 1, 2, 4, 8]
    for alpha in (0.5, 1.0, 2.5):
        c = S.bessel_decay_constant(alpha, 2, radii)
        assert np.isfinite(c) and c > 0


def test_kernel_quadrature_self_consistency(monkeypatch):
    k = S.KernelEval("bessel_real", 0.7, 2)
    v1, e1 = k.value(0.3)
    monkeypatch.setattr(S, "QUAD_RTOL", S.QUAD_RTOL / 2)
    v2, _ = k.value(0.3)
    assert abs(v1 - v2) <= max(e1, 1e-15 * abs(v1))


def test_oscillatory_kernel_against_besselk():
    for d in (1, 2, 3):
        for tau in (1.0, -2.5):
            nu = -d / 2 - 1j * tau / 2
            pref = mp.pi ** (d / 2) / mp.gamma(-1j * tau / 2)
            for r in (0.2, 1.0):
                ref = _besselk_kernel(nu, r, d, pref)
                assert abs(S.oscillatory_bessel_kernel(tau, r, d) - ref) <= 1e-9 * abs(ref)


def test_oscillatory_kernel_errors():
    with pytest.raises(ValueError):
        S.oscillatory_bessel_kernel(1.0, 0.0, 1)
    with pytest.raises(ValueError):
        S.oscillatory_bessel_kernel(0.0, 1.0, 1)


def test_oscillatory_kernel_size_bound():
    for d in (1, 2, 3):
        cs = [abs(S.oscillatory_bessel_kernel(tau, r, d)) / (math.sqrt(tau) * math.exp(math.pi * tau / 4) * r**-d)
              for tau in (1, 2, 4) for r in (0.2, 1.0)]
        assert max(cs) < 1.0


def test_oscillatory_kernel_exponential_tail():
    for d in (1, 2):
        for tau in (1.0, 3.0):
            g = abs(complex(S.gamma(-1j * tau / 2)))
            cs = [abs(S.oscillatory_bessel_kernel(tau, r, d)) * g * math.exp(math.pi * r) for r in (0.4, 1, 2, 4, 8)]
            assert max(cs) < 2.0


def test_oscillatory_kernel_gradient_scaling():
    d, tau = 2, 1.5
    qs = []
    for r in (1.0, 2.0, 4.0):
        y = r / 4
        diff = abs(S.oscillatory_bessel_kernel(tau, r + y, d) - S.oscillatory_bessel_kernel(tau, r, d))
        qs.append(diff / (y / r ** (d + 1)))
    assert max(qs) < 10


def test_holder_line_quotient():
    rng = np.random.default_rng(1)
    pairs = [((a,), (b,)) for a, b in rng.uniform(-2, 2, size=(200, 2))]
    assert S.holder_quotient_scan((0,), 1.0, pairs) <= 1 + 1e-12


def test_holder_scan_stable_and_adversarial():
    rng = np.random.default_rng(2)
    def scan(n):
        pts = rng.uniform(-1, 1, size=(n, 2, 2))
        return S.holder_quotient_scan((1, 0), 0.5, [(p[0], p[1]) for p in pts])
    a, b = scan(10_000), scan(20_000)
    assert np.isfinite(a) and abs(b - a) <= 0.05 * a
    adv = [(x, -x) for x in rng.uniform(-1, 1, size=(500, 2))]
    assert S.holder_quotient_scan((1, 0), 0.5, adv) <= max(a, b) * 1.05


def test_holder_scan_errors():
    with pytest.raises(ValueError):
        S.holder_quotient_scan((0,), 0.5, [])
    with pytest.raises(ValueError):
        S.holder_quotient_scan((0,), 1.5, [((0.0,), (1.0,))])


@pytest.mark.parametrize("e", [-0.5, -0.3, 0.4, 1.5])
def test_lattice_constant_1d_zeta(e):
    assert S.lattice_constant(e, (0,)) == pytest.approx(-2 * float(mp.zeta(-e)), rel=1e-10)


def test_lattice_constant_1d_moment():
    assert S.lattice_constant(-0.7, (2,)) == pytest.approx(-2 * float(mp.zeta(-1.3)), rel=1e-10)


def test_lattice_constant_2d_epstein():
    # sum' |j|^(-2s) over Z^2 is 4 zeta(s) beta(s)
    s = 0.5
    ref = 4 * mp.zeta(s) * mp.dirichlet(s, [0, 1, 0, -1])
    assert S.lattice_constant(-2 * s, (0, 0)) == pytest.approx(-float(ref), rel=1e-9)


def test_lattice_constant_diverges():
    with pytest.raises(ValueError):
        S.lattice_constant(-1.0, (0,))
