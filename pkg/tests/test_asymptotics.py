"""Closed-form low-frequency formulas."""

import cmath
import math

import numpy as np
import pytest

from lowscat import asymptotics as asym
from lowscat import diskref as dr
from lowscat.asymptotics import AsymParams
from lowscat.errors import AtanPole, DomainError

GAMMA = 0.5772156649015329
P0 = AsymParams(0.0)


def test_params_consistent():
    for C in (-2.0, 0.0, 0.7):
        p = AsymParams(C)
        assert p.b == pytest.approx(math.log(4) - 2 * C - 2 * GAMMA, abs=1e-14)
        assert p.a == pytest.approx(complex(math.log(2) - GAMMA - C, math.pi / 2), abs=1e-14)
        # b = 2 Re(a)
        assert p.b == pytest.approx(2 * p.a.real, abs=1e-14)
    d = AsymParams.for_disk(3.0)
    assert d.C == math.log(3.0) and d.boundary_length == pytest.approx(6 * math.pi)
    with pytest.raises(DomainError):
        AsymParams(0.0, boundary_length=-1.0)


# -- sigma ----------------------------------------------------------------------

def test_sigma_small_frequency():
    vals = [asym.sigma_leading(P0, lam) for lam in (1e-2, 1e-5, 1e-10, 1e-100)]
    assert all(-0.5 < v < 0 for v in vals)
    assert np.all(np.diff(vals) > 0) and vals[-1] > -3e-3


def test_sigma_pole_side():
    for C in (0.0, 1.3):
        p = AsymParams(C)
        for t in (1e-3, 1e-5):
            lam = 2 * math.exp(-C - GAMMA) * math.exp(-t)
            v = asym.sigma_leading(p, lam)
            assert v == pytest.approx(math.atan(-math.pi / (2 * t)) / math.pi, rel=1e-8)
            assert abs(v + 0.5) < t


def test_sigma_pole_raises():
    with pytest.raises(AtanPole):
        asym.sigma_leading(AsymParams(math.log(2) - GAMMA), 1.0)


def test_sigma_against_disk():
    lam = 1e-6
    assert abs(asym.sigma_leading(P0, lam) - dr.phase_disk(1.0, lam)) <= 10 * lam ** 2 * abs(math.log(lam))


def test_sigma_prime_sign():
    for C in (-1.0, 0.0, 2.0):
        for lam in (1e-8, 1e-2, 1.0):
            assert asym.sigma_prime_leading(AsymParams(C), lam) < 0


def test_sigma_prime_finite_difference():
    lam, h = 1e-4, 1e-9
    fd = (asym.sigma_leading(P0, lam + h) - asym.sigma_leading(P0, lam - h)) / (2 * h)
    assert asym.sigma_prime_leading(P0, lam) == pytest.approx(fd, rel=1e-6)


def test_sigma_prime_scaling_form():
    # lam * sigma' depends only on log(lam/2) + C + gamma
    v1 = 1e-3 * asym.sigma_prime_leading(AsymParams(0.0), 1e-3)
    v2 = 1e-2 * asym.sigma_prime_leading(AsymParams(-math.log(10)), 1e-2)
    assert v1 == pytest.approx(v2, rel=1e-13)


def test_sigma_prime_complex_form():
    for C in (0.0, 0.5):
        p = AsymParams(C)
        for lam in (1e-6, 1e-2, 0.3):
            assert asym.sigma_prime_complex_form(p, lam) == pytest.approx(
                asym.sigma_prime_leading(p, lam), rel=1e-12)


# -- spectral shift approximations ---------------------------------------------------

@pytest.mark.parametrize("C", [-1.0, 0.0, math.log(2), 3.0])
def test_birman_krein_identity(C):
    p = AsymParams(C)
    worst = 0.0
    for mu in np.geomspace(1e-12, 1e-1, 1000):
        worst = max(worst, abs(asym.xi_arctan(p, mu) + asym.sigma_leading(p, math.sqrt(mu))))
    assert worst < 1e-14


def test_xi_arctan_examples():
    mu = 1e-8
    assert abs(asym.xi_arctan(P0, mu) - dr.ssf_disk(1.0, mu)[0]) <= mu * abs(math.log(mu))
    vals = [asym.xi_arctan(P0, m) for m in (1e-10, 1e-50, 1e-300)]
    assert all(v > 0 for v in vals) and vals[0] > vals[1] > vals[2]


def test_xi_mcg_examples():
    assert asym.xi_mcg(P0, math.exp(-20), 1) == pytest.approx(1 / 20, rel=1e-15)
    pb = AsymParams(math.log(2) - GAMMA)  # b = 0
    assert abs(pb.b) < 1e-15
    assert asym.xi_mcg(pb, math.exp(-10), 3) == pytest.approx(0.1 - math.pi ** 2 / 3000, rel=1e-13)
    for bad in (1.0, 2.0, 0.0):
        with pytest.raises(DomainError):
            asym.xi_mcg(P0, bad, 3)
    with pytest.raises(DomainError):
        asym.xi_mcg(P0, 0.5, 4)


@pytest.mark.parametrize("C", [0.0, math.log(2), 1.0])
def test_mcg_fourth_order_remainder(C):
    p = AsymParams(C)
    Ls = [20.0, 40.0, 80.0, 160.0]
    err = [asym.xi_mcg(p, math.exp(-L), 3) - asym.xi_arctan(p, math.exp(-L)) for L in Ls]
    for e0, e1 in zip(err, err[1:]):
        assert 0.05 <= e1 / e0 <= 0.2


@pytest.mark.parametrize("C", [0.0, math.log(2)])
def test_mcg_coefficients_with_nuisance_terms(C):
    # the three-term expansion is the start of the 1/L series of xi_arctan;
    # with the next two orders as extra columns the fit recovers it closely
    p = AsymParams(C)
    Ls = np.array([20.0, 40.0, 80.0, 160.0, 320.0])
    y = np.array([asym.xi_arctan(p, math.exp(-L)) for L in Ls])
    A = np.stack([Ls ** -k for k in range(1, 6)], axis=1)
    c = np.linalg.lstsq(A, y, rcond=None)[0]
    expect = [1.0, -p.b, p.b ** 2 - math.pi ** 2 / 3]
    assert np.allclose(c[:3], expect, rtol=1e-2, atol=1e-3)


def test_scaling_invariance():
    s, mu = 3.0, 1e-6
    base = AsymParams(0.2)
    moved = AsymParams(0.2 + math.log(s))
    assert asym.xi_arctan(moved, mu / s ** 2) == pytest.approx(asym.xi_arctan(base, mu), abs=1e-15)
    assert abs(asym.xi_mcg(moved, mu / s ** 2, 3) - asym.xi_mcg(base, mu, 3)) > 1e-4


# -- DtN and S-matrix ----------------------------------------------------------------

def test_dtn_examples():
    p = AsymParams.for_disk(1.0)
    k = 1e-4
    assert asym.dtn_lowest_asym(p, k) == pytest.approx(-1 / (math.log(k / 2) + GAMMA), rel=1e-14)
    for rho in (0.5, 2.0):
        pr = AsymParams.for_disk(rho)
        for k in (1e-3, 1e-5):
            assert asym.dtn_lowest_asym(pr, k) == pytest.approx(asym.dtn_lowest_asym(p, k * rho) / rho, rel=1e-13)
    with pytest.raises(DomainError):
        asym.dtn_lowest_asym(AsymParams(0.0), 1e-3)
    with pytest.raises(DomainError):
        asym.dtn_lowest_asym(p, 5.0)


def test_smatrix_leading():
    # unimodular on the real axis, tending to 1 as lam -> 0
    vals = [asym.smatrix_leading(P0, lam) for lam in (1e-2, 1e-8, 1e-50)]
    assert all(abs(abs(v) - 1) < 1e-15 for v in vals)
    assert abs(vals[2] - 1) < abs(vals[1] - 1) < abs(vals[0] - 1)
    for lam in (1e-4, 1e-6):
        diff = abs(asym.smatrix_leading(P0, lam) - dr.smatrix_entry(0, lam))
        assert diff <= 10 / math.log(lam) ** 2


def test_log_arctan_identity():
    for C in (0.0, 1.0, -0.5):
        p = AsymParams(C)
        for lam in np.geomspace(1e-12, 1e-2, 200):
            assert abs(asym.phase_from_smatrix(p, lam) - asym.sigma_leading(p, lam)) < 1e-14
            # (1/2 pi i) log of the entry is the same number
            lg = cmath.log(asym.smatrix_leading(p, lam)) / (2j * math.pi)
            assert abs(lg.real - asym.sigma_leading(p, lam)) < 1e-14
