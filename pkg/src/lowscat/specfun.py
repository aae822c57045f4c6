"""Integer-order cylinder functions of real positive argument.

Regimes (each cross-checked against its neighbours in the tests):

* ``x <= 2``, orders 0 and 1: ascending power series.
* ``x <= max(20, 2n)``: Miller backward recurrence for J, normalised with
  ``J_0 + 2 sum J_2k = 1``; Y_0 and Y_1 from Neumann series in those J values.
* ``x > max(20, 2n)``: Hankel large-argument expansions for orders 0 and 1.
* Y_n for n >= 2: upward recurrence from Y_0, Y_1 (always stable for Y).

K_0 and K_1 use their ascending series for ``x <= 2`` and a trapezoidal
rule on ``K_nu(x) = int_0^inf exp(-x cosh t) cosh(nu t) dt`` above that.
"""

import cmath
import math

import numpy as np

from .errors import BesselOverflow, DomainError, OrderOverflow
from .logseries import LogPoint

EULER_GAMMA = 0.57721566490153286061
MAX_ORDER = 10_000

SERIES_LIMIT = 2.0
_TINY = 1e-300
_RESCALE = 1e250
_H10SER_MAX_TERMS = 60
_H10SER_RTOL = 1e-16


def digamma_nat(m):
    """psi(m) for a positive integer m, via psi(1) = -gamma, psi(m+1) = psi(m) + 1/m."""
    if int(m) != m or m < 1:
        raise DomainError(f"digamma_nat needs a positive integer, got {m!r}")
    m = int(m)
    if m <= 32:
        return -EULER_GAMMA + math.fsum(1.0 / i for i in range(1, m))
    # asymptotic (Bernoulli) tail; error below 1e-19 for m > 32
    x2 = 1.0 / (m * m)
    tail = x2 * (1 / 12 - x2 * (1 / 120 - x2 * (1 / 252 - x2 * (1 / 240 - x2 / 132))))
    return math.log(m) - 0.5 / m - tail


def _check(order, x):
    if int(order) != order or order < 0:
        raise DomainError(f"order must be a nonnegative integer, got {order!r}")
    if order > MAX_ORDER:
        raise OrderOverflow(f"order {order} exceeds maximum {MAX_ORDER}")
    if not (x > 0) or not math.isfinite(x):
        raise DomainError(f"argument must be finite and > 0, got {x!r}")
    return int(order), float(x)


# ---------------------------------------------------------------------------
# orders 0, 1: three independent evaluation paths
# ---------------------------------------------------------------------------

def _jy01_series(x):
    """(J0, J1, Y0, Y1) from the ascending series; intended for x <= 2."""
    q = -0.25 * x * x
    lg = math.log(0.5 * x)
    # order 0
    t = 1.0
    j0 = 0.0
    s0 = 0.0          # sum psi(k+1) t_k
    # order 1: u_k = (x/2) q^k / (k! (k+1)!)
    u = 0.5 * x
    j1 = 0.0
    s1 = 0.0          # sum (psi(k+1) + psi(k+2)) u_k
    psi_k1 = -EULER_GAMMA
    for k in range(60):
        psi_k2 = psi_k1 + 1.0 / (k + 1)
        j0 += t
        s0 += psi_k1 * t
        j1 += u
        s1 += (psi_k1 + psi_k2) * u
        if abs(t) < 1e-18 * abs(j0) and abs(u) < 1e-18 * abs(j1):
            break
        t *= q / ((k + 1) * (k + 1))
        u *= q / ((k + 1) * (k + 2))
        psi_k1 = psi_k2
    y0 = (2.0 / math.pi) * (lg * j0 - s0)
    y1 = -2.0 / (math.pi * x) + (2.0 / math.pi) * lg * j1 - s1 / math.pi
    return j0, j1, y0, y1


def _miller_start(n, x):
    m = int(max(n, x) + 25 + 12 * x ** (1.0 / 3.0))
    return m + (m & 1)


def _j_miller(nmax, x):
    """J_0 .. J_nmax (and the top of the recurrence) by backward recurrence.

    Returns ``(values, m)`` where ``values[k] = J_k(x)`` for ``k <= m``.
    """
    m = _miller_start(nmax, x)
    vals = np.zeros(m + 2)
    jp1, jk = 0.0, _TINY
    vals[m] = jk
    norm = 0.0
    two_over_x = 2.0 / x
    for k in range(m, 0, -1):
        jm1 = k * two_over_x * jk - jp1
        jp1, jk = jk, jm1
        vals[k - 1] = jk
        if (k - 1) % 2 == 0 and k - 1 > 0:
            norm += jk
        if abs(jk) > _RESCALE:
            vals[k - 1:] /= _RESCALE
            jk /= _RESCALE
            jp1 /= _RESCALE
            norm /= _RESCALE
    norm = vals[0] + 2.0 * norm
    vals /= norm
    return vals, m


def _y01_neumann(jvals, x):
    """Y0, Y1 from Neumann series over already-normalised J values."""
    lg = math.log(0.5 * x) + EULER_GAMMA
    m = len(jvals) - 2
    s0 = 0.0
    s1 = 0.0
    sign = -1.0
    for k in range(1, m // 2):
        s0 += sign * jvals[2 * k] / k
        s1 += sign * (jvals[2 * k - 1] - jvals[2 * k + 1]) / k
        sign = -sign
    y0 = (2.0 / math.pi) * lg * jvals[0] - (4.0 / math.pi) * s0
    # derivative of the Y0 Neumann series, using Y0' = -Y1
    y1 = (-(2.0 / (math.pi * x)) * jvals[0] + (2.0 / math.pi) * lg * jvals[1]
          + (2.0 / math.pi) * s1)
    return y0, y1


def _jy01_miller(x):
    """(J0, J1, Y0, Y1) via backward recurrence and Neumann series."""
    jvals, _ = _j_miller(1, x)
    y0, y1 = _y01_neumann(jvals, x)
    return jvals[0], jvals[1], y0, y1


def _hankel_pq(nu, x):
    """Asymptotic P, Q of order nu, summed until the terms stop decreasing."""
    mu = 4.0 * nu * nu
    p = 1.0
    q = 0.0
    term = 1.0
    prev = math.inf
    for k in range(1, 200):
        term *= (mu - (2 * k - 1) ** 2) / (k * 8.0 * x)
        mag = abs(term)
        if mag >= prev or mag < 1e-17 * abs(p):
            break
        prev = mag
        # i^k pattern: k odd -> Q, k even -> P, signs alternate in pairs
        if k % 2 == 1:
            q += term if (k // 2) % 2 == 0 else -term
        else:
            p += -term if (k // 2) % 2 == 1 else term
    return p, q


def _jy01_asymptotic(x):
    """(J0, J1, Y0, Y1) from the Hankel expansions; accurate for x >= 20."""
    amp = math.sqrt(2.0 / (math.pi * x))
    out = []
    for nu in (0, 1):
        p, q = _hankel_pq(nu, x)
        chi = x - (0.5 * nu + 0.25) * math.pi
        c, s = math.cos(chi), math.sin(chi)
        out.append((amp * (p * c - q * s), amp * (p * s + q * c)))
    (j0, y0), (j1, y1) = out
    return j0, j1, y0, y1


def _upward(f0, f1, nmax, x):
    vals = np.empty(nmax + 1)
    vals[0] = f0
    if nmax >= 1:
        vals[1] = f1
    for k in range(1, nmax):
        vals[k + 1] = (2.0 * k / x) * vals[k] - vals[k - 1]
    return vals


def bessel_jy_all(nmax, x):
    """Arrays ``J[0..nmax]`` and ``Y[0..nmax]`` at real ``x > 0``.

    Y entries that overflow come back as ``-inf``; use :func:`bessel_y`
    for a checked single value.
    """
    nmax, x = _check(nmax, x)
    if x > max(20.0, 2.0 * nmax):
        j0, j1, y0, y1 = _jy01_asymptotic(x)
        jv = _upward(j0, j1, nmax, x)
    else:
        jvals, _ = _j_miller(nmax, x)
        jv = jvals[:nmax + 1].copy()
        if x <= SERIES_LIMIT:
            _, _, y0, y1 = _jy01_series(x)
        else:
            y0, y1 = _y01_neumann(jvals, x)
    with np.errstate(over="ignore", invalid="ignore"):
        yv = _upward(y0, y1, nmax, x)
    yv[~np.isfinite(yv)] = -np.inf
    return jv, yv


def bessel_j(order, x):
    """J_order(x) for integer order >= 0 and real x > 0."""
    order, x = _check(order, x)
    if order <= 1 and x <= SERIES_LIMIT:
        return _jy01_series(x)[order]
    if order <= 1 and x > 20.0:
        return _jy01_asymptotic(x)[order]
    return float(bessel_jy_all(order, x)[0][order])


def bessel_y(order, x):
    """Y_order(x); raises :class:`BesselOverflow` instead of returning inf."""
    order, x = _check(order, x)
    if order <= 1 and x <= SERIES_LIMIT:
        return _jy01_series(x)[2 + order]
    if order <= 1 and x > 20.0:
        return _jy01_asymptotic(x)[2 + order]
    _, yv = bessel_jy_all(order, x)
    val = float(yv[order])
    if not math.isfinite(val):
        raise BesselOverflow(f"Y_{order}({x}) overflows double precision", sign=-1)
    return val


def hankel1(order, x):
    """H^(1)_order(x) = J + iY for real x > 0."""
    return complex(bessel_j(order, x), bessel_y(order, x))


def hankel2(order, x):
    """H^(2)_order(x); the exact conjugate of :func:`hankel1` on x > 0."""
    return hankel1(order, x).conjugate()


def h0_series(modulus, argument=0.0):
    """H^(1)_0 at z = modulus * exp(i*argument) from its psi-weighted series.

    Sums ((2i/pi) log(z/2) - (2i/pi) psi(m+1) + 1) (-z^2/4)^m / (m!)^2 with
    log z continued along the logarithmic surface.  Stops when a term falls
    below 1e-16 of the running sum, or after 60 terms.
    """
    if not modulus > 0:
        raise DomainError("modulus must be > 0")
    logz2 = complex(math.log(0.5 * modulus), argument)
    q = -0.25 * modulus * modulus * cmath.exp(2j * argument)
    c = 2j / math.pi
    t = 1.0 + 0j
    psi = -EULER_GAMMA
    total = 0j
    for m in range(_H10SER_MAX_TERMS):
        term = (c * logz2 - c * psi + 1.0) * t
        total += term
        if m > 0 and abs(term) < _H10SER_RTOL * abs(total):
            break
        t *= q / ((m + 1) * (m + 1))
        psi += 1.0 / (m + 1)
    return total


# ---------------------------------------------------------------------------
# modified Bessel functions
# ---------------------------------------------------------------------------

def _k01_series(x):
    q = 0.25 * x * x
    lg = math.log(0.5 * x)
    t = 1.0
    u = 0.5 * x
    i0 = i1 = s0 = s1 = 0.0
    psi_k1 = -EULER_GAMMA
    for k in range(60):
        psi_k2 = psi_k1 + 1.0 / (k + 1)
        i0 += t
        s0 += psi_k1 * t
        i1 += u
        s1 += (psi_k1 + psi_k2) * u
        if t < 1e-18 * i0 and u < 1e-18 * i1:
            break
        t *= q / ((k + 1) * (k + 1))
        u *= q / ((k + 1) * (k + 2))
        psi_k1 = psi_k2
    k0 = -lg * i0 + s0
    k1 = 1.0 / x + lg * i1 - 0.5 * s1
    return k0, k1


def _k01_integral(x):
    # trapezoid on exp(-x (cosh t - 1)); strip of analyticity |Im t| < pi/2
    h = 0.9 * math.pi ** 2 / (x + 45.0)
    t_max = math.acosh(1.0 + 45.0 / x)
    t = np.arange(0.0, t_max + h, h)
    f = np.exp(-x * (np.cosh(t) - 1.0))
    w = np.full_like(t, h)
    w[0] = 0.5 * h
    return float(w @ f), float(w @ (f * np.cosh(t)))


def bessel_k(order, x, scaled=False):
    """K_0(x) or K_1(x) for real x > 0; ``scaled=True`` returns exp(x) K(x)."""
    if order not in (0, 1):
        raise DomainError("bessel_k supports orders 0 and 1 only")
    if not (x > 0) or not math.isfinite(x):
        raise DomainError(f"argument must be finite and > 0, got {x!r}")
    if x <= SERIES_LIMIT:
        val = _k01_series(x)[order]
        return val * math.exp(x) if scaled else val
    val = _k01_integral(x)[order]
    return val if scaled else val * math.exp(-x)


def bessel_i0(x):
    """I_0(x) via the periodic trapezoid on (1/pi) int_0^pi exp(x cos t) dt."""
    n = 16 + int(2 * abs(x))
    t = np.pi * (np.arange(n) + 0.5) / n
    return float(np.mean(np.exp(x * np.cos(t))))


# ---------------------------------------------------------------------------
# free resolvent kernel on the logarithmic surface
# ---------------------------------------------------------------------------

def _h1_asymptotic(z):
    """Hankel expansion of H^(1)_0(z) for complex z, -pi < arg z < 2pi."""
    total = 1.0 + 0j
    term = 1.0 + 0j
    prev = math.inf
    for k in range(1, 200):
        term *= 1j * (-(2 * k - 1) ** 2) / (k * 8.0 * z)
        if abs(term) >= prev or abs(term) < 1e-17:
            break
        prev = abs(term)
        total += term
    return cmath.sqrt(2.0 / (math.pi * z)) * cmath.exp(1j * (z - math.pi / 4)) * total


def _h2_asymptotic(z):
    total = 1.0 + 0j
    term = 1.0 + 0j
    prev = math.inf
    for k in range(1, 200):
        term *= -1j * (-(2 * k - 1) ** 2) / (k * 8.0 * z)
        if abs(term) >= prev or abs(term) < 1e-17:
            break
        prev = abs(term)
        total += term
    return cmath.sqrt(2.0 / (math.pi * z)) * cmath.exp(-1j * (z - math.pi / 4)) * total


def free_resolvent_kernel(lam, r):
    """(i/4) H^(1)_0(lam * r), continued in arg(lam) over the log surface.

    ``lam`` is a :class:`~lowscat.logseries.LogPoint` (or a complex number,
    read on the principal sheet).  For ``|lam| r <= 2`` the psi-weighted
    series is used for every argument.  Beyond that, arguments on the real
    and imaginary axes go through the real J/Y and K/I routines (with the
    sheet-change rule H0(z e^{i m pi}) = H0(z) - 2m J0(z)).  Other arguments
    use whichever of the series and the large-|z| Hankel expansion has the
    smaller error estimate; the worst case, near |z| = 10 off the axes, is
    about 1e-8 relative.
    """
    if not r > 0:
        raise DomainError(f"distance must be > 0, got {r!r}")
    if not isinstance(lam, LogPoint):
        lam = LogPoint.from_complex(complex(lam))
    mod = lam.modulus * r
    arg = lam.argument
    if mod <= SERIES_LIMIT:
        return 0.25j * h0_series(mod, arg)
    half_turns = arg / math.pi
    m_real = round(half_turns)
    if abs(half_turns - m_real) < 1e-15:
        m = int(m_real)
        j0 = bessel_j(0, mod)
        h = complex(j0, bessel_y(0, mod)) - 2 * m * j0
        return 0.25j * h
    m_imag = math.floor(half_turns)
    if abs(half_turns - m_imag - 0.5) < 1e-15:
        m = int(m_imag)
        return complex(bessel_k(0, mod) / (2 * math.pi), -0.5 * m * bessel_i0(mod))
    # reduce to arg in (-pi/2, pi/2]
    m = math.ceil(half_turns - 0.5)
    z0 = cmath.rect(mod, arg - m * math.pi)
    # the series loses about exp(|z| + max(Im z, 0)) to cancellation, the
    # asymptotic expansion is good to about exp(-2|z|); take the better one
    series_digits = (mod + max(z0.imag, 0.0)) / math.log(10.0) - 16.0
    asym_digits = -2.0 * mod / math.log(10.0)
    if series_digits < asym_digits:
        return 0.25j * h0_series(mod, arg)
    # H1 - 2m J0 = (1 - m) H1 - m H2 avoids cancelling the growing parts
    h1 = _h1_asymptotic(z0) if m != 1 else 0.0
    h2 = _h2_asymptotic(z0) if m != 0 else 0.0
    return 0.25j * ((1 - m) * h1 - m * h2)
