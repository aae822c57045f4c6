"""Exact reference quantities for a Dirichlet disk of radius rho.

The building block is the continuous Hankel phase

    phi_l(x) = arg(i H^(1)_l(x)),   phi_l(0+) = 0,

which increases monotonically in x (its derivative is 2 / (pi x |H_l|^2)).
In terms of it the diagonal scattering-matrix entries are

    S_l = -H^(2)_l / H^(1)_l = exp(-2 i phi_l(lambda rho)),

and the spectral shift function of the disk is

    xi(mu) = (1/pi) * (phi_0 + 2 * sum_{l >= 1} phi_l),   x = rho sqrt(mu),

which tends to 0 from above as mu -> 0.
"""

import math
from dataclasses import dataclass, field

import numpy as np

from . import asymptotics as asym
from .errors import DomainError, NonConvergentSum
from .specfun import MAX_ORDER, bessel_jy_all, bessel_k

DEFAULT_TOL = 1e-14


def _positive(name, v):
    if not (v > 0) or not math.isfinite(v):
        raise DomainError(f"{name} must be finite and > 0, got {v!r}")


def _principal_phases(nmax, x):
    """arg(i H_l(x)) reduced to [0, pi) for l = 0..nmax."""
    j, y = bessel_jy_all(nmax, x)
    r = np.arctan2(j, -y)
    return np.mod(r, np.pi)


def _debye_phase(ell, x):
    """Large-argument phase approximation, valid to well within pi/2 for x > l."""
    s = math.sqrt(x * x - ell * ell)
    return s - ell * math.acos(ell / x) + 0.25 * math.pi


def hankel_phases(nmax, x):
    """Continuous phases ``phi_l(x)`` for ``l = 0..nmax``.

    The principal value is lifted by the multiple of pi nearest to the
    Debye approximation; below the turning point (x <= l) the phase stays
    under pi/6 and no lift is needed.
    """
    _positive("x", x)
    r = _principal_phases(nmax, x)
    out = r.copy()
    for ell in range(min(nmax, int(math.floor(x))) + 1):
        if x > ell:
            n = round((_debye_phase(ell, x) - r[ell]) / math.pi)
            out[ell] = r[ell] + n * math.pi
    return out


def smatrix_entry(ell, lambda_rho):
    """Diagonal scattering-matrix entry ``-H2_l(x) / H1_l(x)`` (unit modulus)."""
    _positive("lambda_rho", lambda_rho)
    ell = abs(int(ell))
    if ell > MAX_ORDER:
        # exp(-2 i phi) with phi below the smallest double
        return 1.0 + 0j
    r = _principal_phases(ell, lambda_rho)[ell]
    return complex(math.cos(2 * r), -math.sin(2 * r))


def _truncation(x):
    return int(math.ceil(x + 8.0 * (1.0 + x ** (1.0 / 3.0))))


def ssf_disk(rho, mu, tol=DEFAULT_TOL):
    """Spectral shift function of the disk of radius ``rho`` at energy ``mu``.

    Returns
    -------
    (float, int)
        The value and the number of angular orders ``l >= 0`` summed.

    Raises
    ------
    NonConvergentSum
        If the last included term still exceeds ``tol`` at the order cap.
    """
    _positive("rho", rho)
    _positive("mu", mu)
    x = rho * math.sqrt(mu)
    nmax = _truncation(x)
    while True:
        if nmax > MAX_ORDER:
            raise NonConvergentSum(f"angular sum not converged by order {MAX_ORDER}")
        phi = hankel_phases(nmax, x)
        if 2.0 * phi[-1] / math.pi <= tol:
            break
        nmax *= 2
    total = phi[0] + 2.0 * math.fsum(phi[1:])
    return total / math.pi, nmax + 1


def phase_disk(rho, lam, tol=DEFAULT_TOL):
    """Scattering phase at frequency ``lam``: minus the spectral shift at ``lam**2``."""
    _positive("lambda", lam)
    return -ssf_disk(rho, lam * lam, tol)[0]


def dtn_disk_lowest(rho, kappa):
    """Lowest Dirichlet-to-Neumann eigenvalue at ``i kappa``: ``kappa K1(kappa rho) / K0(kappa rho)``."""
    _positive("rho", rho)
    _positive("kappa", kappa)
    x = kappa * rho
    return kappa * bessel_k(1, x, scaled=True) / bessel_k(0, x, scaled=True)


@dataclass(frozen=True)
class SsfRow:
    mu: float
    xi_exact: float
    xi_arctan: float
    xi_mcg1: float
    xi_mcg3: float
    terms_used: int


@dataclass(frozen=True)
class SsfTable:
    """Exact and approximate spectral shift values on an increasing grid."""

    rho: float
    rows: tuple = field(default_factory=tuple)

    def __post_init__(self):
        mus = [r.mu for r in self.rows]
        if any(b <= a for a, b in zip(mus, mus[1:])):
            raise DomainError("mu grid must be strictly increasing")

    def column(self, name):
        return np.array([getattr(r, name) for r in self.rows], dtype=float)


def ssf_table(rho, mus, tol=DEFAULT_TOL):
    """Tabulate :func:`ssf_disk` with the three closed-form approximations.

    The expansion columns are NaN where ``mu >= 1`` (outside their domain)
    and the arctan column is NaN at its pole.
    """
    p = asym.AsymParams.for_disk(rho)
    rows = []
    for mu in mus:
        mu = float(mu)
        exact, used = ssf_disk(rho, mu, tol)
        try:
            xa = asym.xi_arctan(p, mu)
        except asym.AtanPole:
            xa = math.nan
        if mu < 1.0:
            m1, m3 = asym.xi_mcg(p, mu, 1), asym.xi_mcg(p, mu, 3)
        else:
            m1 = m3 = math.nan
        rows.append(SsfRow(mu, exact, xa, m1, m3, used))
    return SsfTable(rho, tuple(rows))
