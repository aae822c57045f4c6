"""Closed-form low-frequency approximations parameterised by the log-capacity C.

Everything here takes ``C`` explicitly (bundled in :class:`AsymParams`) so the
formulas can be evaluated for any obstacle once its capacity is known.  The
real reduced forms are evaluated directly; the complex shift ``a`` is carried
for the scattering-matrix entry and for consistency checks.
"""

import cmath
import math
from dataclasses import dataclass

from .errors import AtanPole, DomainError, PoleAtShift
from .specfun import EULER_GAMMA

POLE_TOL = 1e-14
LOG4 = math.log(4.0)


@dataclass(frozen=True)
class AsymParams:
    """Constants derived from the log-capacity ``C``.

    Attributes
    ----------
    C : float
        Log-capacity of the obstacle (minus its Robin constant).
    boundary_length : float, optional
        Perimeter of the obstacle; only the Dirichlet-to-Neumann formula
        needs it.
    """

    C: float
    boundary_length: float = None

    def __post_init__(self):
        if not math.isfinite(self.C):
            raise DomainError("C must be finite")
        if self.boundary_length is not None and not self.boundary_length > 0:
            raise DomainError("boundary_length must be > 0")

    @property
    def gamma(self):
        return EULER_GAMMA

    @property
    def b(self):
        return LOG4 - 2.0 * self.C - 2.0 * EULER_GAMMA

    @property
    def a(self):
        return complex(math.log(2.0) - EULER_GAMMA - self.C, 0.5 * math.pi)

    @classmethod
    def for_disk(cls, rho):
        """Disk of radius ``rho``: capacity ``rho`` and perimeter ``2 pi rho``."""
        if not rho > 0:
            raise DomainError("rho must be > 0")
        return cls(math.log(rho), 2.0 * math.pi * rho)


def _positive(name, v):
    if not (v > 0) or not math.isfinite(v):
        raise DomainError(f"{name} must be finite and > 0, got {v!r}")


def sigma_leading(p, lam):
    """Leading scattering phase ``(1/pi) arctan(pi / (2 log(lam/2) + 2C + 2 gamma))``.

    Raises
    ------
    AtanPole
        When the denominator is within 1e-14 of zero.
    """
    _positive("lambda", lam)
    den = 2.0 * math.log(0.5 * lam) + 2.0 * p.C + 2.0 * EULER_GAMMA
    if abs(den) < POLE_TOL:
        raise AtanPole(f"arctan denominator vanishes at lambda={lam!r}")
    return math.atan(math.pi / den) / math.pi


def sigma_prime_leading(p, lam):
    """Derivative of the leading phase, ``-(2/lam) / (4 D^2 + pi^2)``, D = log(lam/2)+C+gamma."""
    _positive("lambda", lam)
    d = math.log(0.5 * lam) + p.C + EULER_GAMMA
    return -(2.0 / lam) / (4.0 * d * d + math.pi ** 2)


def sigma_prime_complex_form(p, lam):
    """The same derivative written as ``-1 / (2 lam (log lam - a)(log lam - conj(a)))``."""
    _positive("lambda", lam)
    L = math.log(lam)
    a = p.a
    return (-1.0 / (2.0 * lam * (L - a) * (L - a.conjugate()))).real


def xi_arctan(p, mu):
    """Spectral shift approximation ``(1/pi) arctan(pi / (b - log mu))``.

    Computed directly and checked against ``-sigma_leading(p, sqrt(mu))``;
    the two must agree to 1e-14.
    """
    _positive("mu", mu)
    den = p.b - math.log(mu)
    if abs(den) < POLE_TOL:
        raise AtanPole(f"arctan denominator vanishes at mu={mu!r}")
    direct = math.atan(math.pi / den) / math.pi
    via_phase = -sigma_leading(p, math.sqrt(mu))
    if abs(direct - via_phase) > 1e-14:
        raise AssertionError(f"spectral shift / phase identity broken at mu={mu!r}")
    return direct


def xi_mcg(p, mu, order=3):
    """Partial sums of ``1/L - b/L^2 + (b^2 - pi^2/3)/L^3`` with ``L = -log mu``.

    Parameters
    ----------
    order : {1, 2, 3}
        Number of terms kept.

    Raises
    ------
    DomainError
        If ``mu`` is not in (0, 1).
    """
    if not (0.0 < mu < 1.0):
        raise DomainError(f"expansion needs 0 < mu < 1, got {mu!r}")
    if order not in (1, 2, 3):
        raise DomainError("order must be 1, 2 or 3")
    L = -math.log(mu)
    b = p.b
    coeffs = (1.0, -b, b * b - math.pi ** 2 / 3.0)
    return sum(c / L ** (k + 1) for k, c in enumerate(coeffs[:order]))


def dtn_lowest_asym(p, kappa):
    """Lowest Dirichlet-to-Neumann eigenvalue at ``i kappa``: ``-(2 pi / l) / (log(kappa/2) + gamma + C)``."""
    if p.boundary_length is None:
        raise DomainError("boundary_length is required for the DtN eigenvalue")
    _positive("kappa", kappa)
    d = math.log(0.5 * kappa) + EULER_GAMMA + p.C
    if d >= 0:
        raise DomainError(f"kappa={kappa!r} too large: log(kappa/2) + gamma + C >= 0")
    return -(2.0 * math.pi / p.boundary_length) / d


def smatrix_leading(p, lam):
    """Leading constant-mode scattering-matrix entry ``1 + i pi / (log lam - a)``."""
    _positive("lambda", lam)
    d = math.log(lam) - p.a
    if abs(d) < POLE_TOL:
        raise PoleAtShift("log(lambda) coincides with the shift a")
    return 1.0 + 1j * math.pi / d


def phase_from_smatrix(p, lam):
    """``(1/2 pi) arg`` of :func:`smatrix_leading`, principal branch."""
    return cmath.phase(smatrix_leading(p, lam)) / (2.0 * math.pi)
