"""Bessel/Hankel/digamma routines against series, identities and scipy/mpmath."""

import math

import numpy as np
import pytest
from scipy import special

from lowscat import specfun as sf
from lowscat.errors import BesselOverflow, DomainError, OrderOverflow
from lowscat.logseries import LogPoint

GAMMA = 0.5772156649015329
K0_AT_1 = 0.42102443824070833       # mpmath besselk(0, 1), 40 digits
J0_FIRST_ZERO = 2.4048255576957728  # mpmath findroot on besselj(0, .)
Y5_AT_10 = 0.13540304768936230      # mpmath bessely(5, 10)


def series_h0(x, terms=80):
    """Plain-float H0 series, summed independently of the package."""
    total = 0j
    psi = -GAMMA
    t = 1.0
    for m in range(terms):
        total += ((2j / math.pi) * (math.log(x / 2) - psi) + 1.0) * t
        t *= -(x * x / 4) / ((m + 1) ** 2)
        psi += 1.0 / (m + 1)
    return total


# -- digamma ----------------------------------------------------------------

def test_digamma_small_values():
    assert sf.digamma_nat(1) == pytest.approx(-0.5772156649015329, abs=1e-15)
    assert sf.digamma_nat(2) == pytest.approx(0.4227843350984671, abs=1e-15)
    assert sf.digamma_nat(4) == pytest.approx(11 / 6 - GAMMA, abs=1e-15)


@pytest.mark.parametrize("m", [5, 31, 32, 33, 100, 10_000])
def test_digamma_matches_scipy(m):
    assert sf.digamma_nat(m) == pytest.approx(special.digamma(m), rel=1e-14)


def test_digamma_recurrence_across_switch():
    for m in range(20, 50):
        assert sf.digamma_nat(m + 1) - sf.digamma_nat(m) == pytest.approx(1 / m, rel=1e-12)


# -- J, Y -------------------------------------------------------------------

def test_j_small_argument_limits():
    assert sf.bessel_j(0, 1e-12) == pytest.approx(1.0, abs=1e-15)
    assert abs(sf.bessel_j(1, 1e-12)) < 1e-12


def test_j0_first_zero():
    assert abs(sf.bessel_j(0, 2.404825557695773)) < 1e-12
    # bisection on the package value lands on the mpmath root
    lo, hi = 2.3, 2.5
    for _ in range(60):
        mid = 0.5 * (lo + hi)
        if sf.bessel_j(0, lo) * sf.bessel_j(0, mid) <= 0:
            hi = mid
        else:
            lo = mid
    assert lo == pytest.approx(J0_FIRST_ZERO, abs=1e-13)


def test_y0_small_argument_log_law():
    for x in [1e-3, 1e-5]:
        lead = (2 / math.pi) * (math.log(x / 2) + GAMMA)
        assert abs(sf.bessel_y(0, x) - lead) < 2 * x * x * abs(math.log(x))


def test_wronskian_at_one():
    w = sf.bessel_j(0, 1.0) * sf.bessel_y(1, 1.0) - sf.bessel_j(1, 1.0) * sf.bessel_y(0, 1.0)
    assert w == pytest.approx(-2 / math.pi, abs=1e-10)


def test_y5_upward_recurrence_and_oracle():
    y0, y1 = sf.bessel_y(0, 10.0), sf.bessel_y(1, 10.0)
    ys = [y0, y1]
    for n in range(1, 5):
        ys.append(2 * n / 10.0 * ys[-1] - ys[-2])
    assert sf.bessel_y(5, 10.0) == pytest.approx(ys[5], abs=1e-10)
    assert sf.bessel_y(5, 10.0) == pytest.approx(Y5_AT_10, abs=1e-13)


@pytest.mark.parametrize("x", [1e-4, 0.05, 0.7, 1.9, 2.0, 2.1, 5.0, 19.9, 20.1, 55.0, 400.0])
def test_jy_all_against_scipy(x):
    n = 60
    j, y = sf.bessel_jy_all(n, x)
    ref_j = special.jv(np.arange(n + 1), x)
    ref_y = special.yv(np.arange(n + 1), x)
    normal = np.abs(ref_j) > 1e-280  # scipy flushes deeper values to zero
    assert np.allclose(j[normal], ref_j[normal], rtol=1e-11, atol=0)
    finite = np.isfinite(ref_y)
    assert np.allclose(y[finite], ref_y[finite], rtol=1e-11)


def test_three_paths_agree_in_overlap():
    # series vs Miller+Neumann at x <= 2, Miller+Neumann vs Hankel at large x
    for x in [0.3, 1.0, 1.99]:
        assert np.allclose(sf._jy01_series(x), sf._jy01_miller(x), rtol=1e-13, atol=1e-13)
    for x in [22.0, 35.0, 60.0]:
        assert np.allclose(sf._jy01_asymptotic(x), sf._jy01_miller(x), rtol=1e-12, atol=1e-13)


def test_order_overflow():
    with pytest.raises(OrderOverflow):
        sf.bessel_j(sf.MAX_ORDER + 1, 1.0)


def test_nonpositive_argument_rejected():
    with pytest.raises(DomainError):
        sf.bessel_j(0, 0.0)
    with pytest.raises(DomainError):
        sf.bessel_y(1, -1.0)


def test_y_overflow_is_a_signed_error():
    with pytest.raises(BesselOverflow) as info:
        sf.bessel_y(400, 0.01)
    assert info.value.sign == -1
    _, y = sf.bessel_jy_all(400, 0.01)
    assert y[-1] == -np.inf


# -- Hankel -----------------------------------------------------------------

@pytest.mark.parametrize("x", [1e-6, 0.01, 0.5, 1.0, 2.0])
def test_hankel1_order0_matches_series(x):
    assert abs(sf.hankel1(0, x) - series_h0(x)) < 1e-10
    assert abs(sf.h0_series(x) - series_h0(x)) < 1e-12


def test_hankel1_at_one_parts():
    h = sf.hankel1(0, 1.0)
    assert h.real == pytest.approx(special.j0(1.0), abs=1e-14)
    assert h.imag == pytest.approx(special.y0(1.0), abs=1e-14)


@pytest.mark.parametrize("n,x", [(0, 0.5), (3, 2.5), (17, 40.0), (120, 3.0)])
def test_hankel2_is_conjugate(n, x):
    assert sf.hankel2(n, x) == sf.hankel1(n, x).conjugate()


def test_hankel2_series_and_blowup():
    assert abs(sf.hankel2(0, 0.5) - series_h0(0.5).conjugate()) < 1e-12
    mags = [abs(sf.hankel2(0, x)) for x in (1e-2, 1e-4, 1e-8)]
    assert mags[0] < mags[1] < mags[2]


def test_h0_series_stops_early_for_small_argument():
    # with x tiny a handful of terms reach the 1e-16 floor
    assert sf.h0_series(1e-3) == pytest.approx(series_h0(1e-3, terms=5), abs=1e-15)


# -- K, I -------------------------------------------------------------------

def test_k0_values():
    assert sf.bessel_k(0, 1.0) == pytest.approx(K0_AT_1, rel=1e-14)
    x = 1e-4
    assert sf.bessel_k(0, x) == pytest.approx(-math.log(x / 2) - GAMMA, abs=x * x * abs(math.log(x)))


def test_k1_small_argument():
    x = 1e-5
    assert abs(sf.bessel_k(1, x) - 1 / x) < 10 * x * abs(math.log(x))


@pytest.mark.parametrize("x", [0.01, 0.5, 1.99, 2.01, 7.0, 30.0, 300.0])
def test_k_against_scipy(x):
    assert sf.bessel_k(0, x) == pytest.approx(special.k0(x), rel=1e-13)
    assert sf.bessel_k(1, x) == pytest.approx(special.k1(x), rel=1e-13)
    assert sf.bessel_k(0, x, scaled=True) == pytest.approx(special.k0e(x), rel=1e-13)


def test_k_positive_decreasing():
    xs = np.geomspace(1e-3, 50, 200)
    for order in (0, 1):
        vals = np.array([sf.bessel_k(order, x) for x in xs])
        assert np.all(vals > 0)
        assert np.all(np.diff(vals) < 0)


def test_k_only_integer_orders_0_1():
    with pytest.raises(DomainError):
        sf.bessel_k(2, 1.0)


@pytest.mark.parametrize("x", [0.0, 0.3, 4.0, 25.0])
def test_i0_against_scipy(x):
    assert sf.bessel_i0(x) == pytest.approx(special.i0(x), rel=1e-14)


# -- free resolvent kernel ----------------------------------------------------

def test_kernel_imaginary_axis_is_k0():
    v = sf.free_resolvent_kernel(1j, 1.0)
    assert v.real == pytest.approx(K0_AT_1 / (2 * math.pi), rel=1e-12)
    assert abs(v.imag) < 1e-14
    for r in [0.01, 1.0, 3.0, 5.0]:
        v = sf.free_resolvent_kernel(LogPoint(1.0, math.pi / 2), r)
        assert abs(v - sf.bessel_k(0, r) / (2 * math.pi)) < 1e-10


def test_kernel_real_axis():
    for mod in [0.3, 1.5, 4.0, 30.0]:
        v = sf.free_resolvent_kernel(LogPoint(mod, 0.0), 1.0)
        assert abs(v - 0.25j * complex(special.j0(mod), special.y0(mod))) < 1e-12


def _continued_oracle(mod, arg):
    m = 0
    a = arg
    while a > math.pi:
        a -= math.pi
        m += 1
    while a < -math.pi / 2:
        a += math.pi
        m -= 1
    z = mod * complex(math.cos(a), math.sin(a))
    return 0.25j * (special.hankel1(0, z) - 2 * m * special.jv(0, z))


@pytest.mark.parametrize("mod", [0.01, 0.9, 1.99, 3.0, 6.0, 12.0, 40.0])
@pytest.mark.parametrize("arg", [-0.4, 0.7, math.pi, 3.0, 1.5 * math.pi, 2 * math.pi, 2.5 * math.pi, -math.pi / 2])
def test_kernel_on_log_surface(mod, arg):
    ref = _continued_oracle(mod, arg)
    got = sf.free_resolvent_kernel(LogPoint(mod, arg), 1.0)
    assert abs(got - ref) <= 1e-8 * abs(ref)


def test_kernel_rejects_nonpositive_distance():
    with pytest.raises(DomainError):
        sf.free_resolvent_kernel(1j, 0.0)
