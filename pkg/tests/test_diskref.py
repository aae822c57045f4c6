"""Exact disk scattering quantities."""

import math

import numpy as np
import pytest

from lowscat import asymptotics as asym
from lowscat import diskref as dr
from lowscat.errors import DomainError, NonConvergentSum

GAMMA = 0.5772156649015329
# mpmath, 30 digits: (1/pi)(phi_0 + 2 sum phi_l) with phi_l the continuous
# phase of i H1_l, summed to l = 60
SSF_1_1 = 0.90956278299894802952
SSF_1_300 = 83.638715294455378018   # mu = 17.3**2
SSF_1_001 = 0.18843004493827419413  # mu = 0.01
K_RATIO_10 = 10.488587228891769387  # 10 K1(10) / K0(10), mpmath


# -- S-matrix entries ----------------------------------------------------------

@pytest.mark.parametrize("ell", [0, 1, 2, 7, 40, 300])
@pytest.mark.parametrize("x", [1e-6, 0.01, 0.5, 3.0, 45.0, 400.0])
def test_smatrix_unit_modulus(ell, x):
    assert abs(abs(dr.smatrix_entry(ell, x)) - 1) < 1e-12


@pytest.mark.parametrize("ell", [1, 2, 5, 33])
def test_smatrix_even_in_order(ell):
    for x in (0.1, 2.0, 30.0):
        assert dr.smatrix_entry(-ell, x) == dr.smatrix_entry(ell, x)


def test_smatrix_matches_hankel_ratio():
    from scipy import special
    for ell in (0, 3, 12):
        for x in (0.2, 4.0, 25.0):
            ref = -special.hankel2(ell, x) / special.hankel1(ell, x)
            assert abs(dr.smatrix_entry(ell, x) - ref) < 1e-12


def test_smatrix_small_argument():
    errs = []
    for x in (1e-4, 1e-6):
        lead = 1 + 1j * math.pi / (math.log(x / 2) + GAMMA)
        err = abs(dr.smatrix_entry(0, x) - lead)
        assert err < 10 / math.log(x) ** 2
        errs.append(err * math.log(x) ** 2)
    # O(1/log^2 x): the scaled error is roughly constant
    assert 0.5 < errs[1] / errs[0] < 2


# -- spectral shift --------------------------------------------------------------

def test_frozen_values():
    assert dr.ssf_disk(1.0, 1.0)[0] == pytest.approx(SSF_1_1, abs=1e-12)
    assert dr.ssf_disk(1.0, 17.3 ** 2)[0] == pytest.approx(SSF_1_300, abs=1e-10)
    assert dr.ssf_disk(1.0, 0.01)[0] == pytest.approx(SSF_1_001, abs=1e-12)


def test_terms_used_and_truncation():
    val, used = dr.ssf_disk(1.0, 1.0)
    assert used >= dr._truncation(1.0) + 1
    val2, _ = dr.ssf_disk(1.0, 1.0, tol=1e-30)
    assert val2 == pytest.approx(val, abs=1e-15)


def test_phases_continuous_in_x():
    xs = np.linspace(0.05, 60, 3000)
    prev = dr.hankel_phases(80, xs[0])
    for x in xs[1:]:
        cur = dr.hankel_phases(80, x)
        assert np.all(np.abs(cur - prev) < 0.5)
        prev = cur


def test_ssf_grid_continuity():
    vals = [dr.ssf_disk(1.0, x * x)[0] for x in np.linspace(1e-3, 20.0, 2000)]
    assert np.max(np.abs(np.diff(vals))) < 0.5
    assert np.all(np.diff(vals) > 0)


@pytest.mark.parametrize("rho,mu", [(0.15, 4.0), (15.0, 1e-3)])
def test_scaling_examples(rho, mu):
    assert dr.ssf_disk(rho, mu)[0] == pytest.approx(dr.ssf_disk(1.0, rho * rho * mu)[0], abs=1e-10)


@pytest.mark.parametrize("rho", [0.15, 1.5, 15.0, 150.0])
def test_scaling_collapse(rho):
    mus = np.geomspace(1e-4, 64.0, 64) / rho ** 2
    diff = [abs(dr.ssf_disk(rho, m)[0] - dr.ssf_disk(1.0, rho * rho * m)[0]) for m in mus]
    assert max(diff) < 1e-9


def test_small_energy_limit():
    p = asym.AsymParams(0.0)
    mus = np.geomspace(1e-8, 1e-2, 25)
    vals = np.array([dr.ssf_disk(1.0, m)[0] for m in mus])
    # tends to zero from above, like the arctan approximation
    assert np.all(vals > 0) and np.all(np.diff(vals) > 0)
    ratio = [abs(v - asym.xi_arctan(p, m)) / (m * abs(math.log(m))) for v, m in zip(vals, mus)]
    assert max(ratio) < 1.0


def test_error_order():
    p = asym.AsymParams(0.0)
    mus = np.geomspace(1e-8, 1e-3, 12)
    err = lambda m: abs(dr.ssf_disk(1.0, m)[0] - asym.xi_arctan(p, m))
    for m in mus:
        assert err(m / 4) / err(m) <= 0.6


def test_phase_sign():
    for lam in (1e-3, 0.5, 4.0):
        assert dr.phase_disk(2.0, lam) == -dr.ssf_disk(2.0, lam * lam)[0]
    assert dr.phase_disk(0.15, 2.0) == pytest.approx(dr.phase_disk(1.0, 0.3), abs=1e-10)
    assert dr.phase_disk(1.0, 1.0) == pytest.approx(-SSF_1_1, abs=1e-12)


def test_bad_inputs():
    for args in ((0.0, 1.0), (1.0, -1.0), (1.0, math.nan)):
        with pytest.raises(DomainError):
            dr.ssf_disk(*args)
    with pytest.raises(NonConvergentSum):
        dr.ssf_disk(1.0, 1e9)


# -- DtN eigenvalue ------------------------------------------------------------------

def test_dtn_positive():
    for rho in (0.1, 1.0, 7.0):
        for kappa in (1e-6, 1e-2, 1.0, 50.0, 900.0):
            assert dr.dtn_disk_lowest(rho, kappa) > 0


def test_dtn_large_kappa():
    v = dr.dtn_disk_lowest(1.0, 10.0)
    assert v == pytest.approx(K_RATIO_10, rel=1e-13)
    assert v == pytest.approx(10 * (1 + 1 / 20), rel=1e-2)


def test_dtn_matches_asymptotic_within_log_square():
    p = asym.AsymParams.for_disk(1.0)
    for kappa in (1e-3, 1e-4, 1e-5):
        res = abs(dr.dtn_disk_lowest(1.0, kappa) - asym.dtn_lowest_asym(p, kappa))
        assert res <= 1.0 / math.log(kappa) ** 2


# -- table ---------------------------------------------------------------------------

def test_ssf_table():
    mus = np.geomspace(1e-4, 4.0, 20)
    t = dr.ssf_table(1.0, mus)
    assert np.all(t.column("terms_used") >= 1)
    assert np.array_equal(t.column("mu"), mus)
    mcg = t.column("xi_mcg3")
    assert np.all(np.isnan(mcg[mus >= 1])) and np.all(np.isfinite(mcg[mus < 1]))
    with pytest.raises(DomainError):
        dr.SsfTable(1.0, tuple(reversed(t.rows)))
