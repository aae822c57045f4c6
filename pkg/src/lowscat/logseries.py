"""Truncated series in lambda^j (log lambda - a)^k on the logarithmic surface.

Coefficients are complex scalars stored sparsely by ``(j, k)``; an absent key
is a zero coefficient.  All operations return new objects.
"""

import cmath
import json
import math
from dataclasses import dataclass
from math import comb
from types import MappingProxyType

import numpy as np

from .errors import (
    DomainError,
    InputError,
    NegativePowersPresent,
    NotAUnit,
    PoleAtShift,
    RebaseRequired,
    SingularAlpha,
)

DEFAULT_J_CUT = 8
POLE_TOL = 1e-14
SINGULAR_ALPHA_TOL = 1e-14
SECTOR_SAMPLES = 64


@dataclass(frozen=True)
class LogPoint:
    """A point of the logarithmic surface: modulus plus unbounded argument."""

    modulus: float
    argument: float = 0.0

    def __post_init__(self):
        if not (self.modulus > 0) or not math.isfinite(self.modulus):
            raise DomainError(f"LogPoint modulus must be finite and > 0, got {self.modulus!r}")
        if not math.isfinite(self.argument):
            raise DomainError("LogPoint argument must be finite")

    @classmethod
    def from_complex(cls, z, sheet=0):
        """Principal-sheet point for ``z``, moved ``sheet`` full turns."""
        if z == 0:
            raise DomainError("0 is not on the logarithmic surface")
        return cls(abs(z), cmath.phase(z) + 2 * math.pi * sheet)

    @property
    def log(self):
        return complex(math.log(self.modulus), self.argument)

    def power(self, j):
        """lambda**j for integer j (single valued)."""
        return cmath.rect(self.modulus ** j, j * self.argument)

    def conj(self):
        return LogPoint(self.modulus, -self.argument)


class LogPowSeries:
    """Sum of ``c[j, k] * lambda**j * (log lambda - shift)**k``.

    Parameters
    ----------
    terms : mapping ``(j, k) -> complex``
        Nonzero coefficients.  ``j >= 0``; ``k`` any integer.
    shift : complex
        The constant ``a`` in ``log lambda - a``.
    j_max : int, optional
        Truncation order (largest admissible ``j``).  Defaults to the largest
        stored ``j``.
    k_bounds : mapping ``j -> (k_lower, k_upper)``, optional
        Declared index range per ``j``; widened to cover the stored terms.
    """

    __slots__ = ("_terms", "_shift", "_j_max", "_k_bounds")

    def __init__(self, terms=None, shift=0j, j_max=None, k_bounds=None):
        clean = {}
        for (j, k), c in dict(terms or {}).items():
            if int(j) != j or int(k) != k or j < 0:
                raise DomainError(f"bad index ({j}, {k})")
            c = complex(c)
            if not (math.isfinite(c.real) and math.isfinite(c.imag)):
                raise DomainError(f"non-finite coefficient at ({j}, {k})")
            if c != 0:
                clean[(int(j), int(k))] = c
        top = max((j for j, _ in clean), default=0)
        if j_max is None:
            j_max = top
        elif top > j_max:
            raise DomainError(f"term with j={top} exceeds truncation order {j_max}")
        bounds = {int(j): (int(lo), int(hi)) for j, (lo, hi) in dict(k_bounds or {}).items()}
        for (j, k) in clean:
            lo, hi = bounds.get(j, (k, k))
            bounds[j] = (min(lo, k), max(hi, k))
        self._terms = MappingProxyType(clean)
        self._shift = complex(shift)
        self._j_max = int(j_max)
        self._k_bounds = MappingProxyType(bounds)

    # -- accessors ---------------------------------------------------------

    @property
    def terms(self):
        return self._terms

    @property
    def shift(self):
        return self._shift

    @property
    def j_max(self):
        return self._j_max

    @property
    def k_bounds(self):
        return self._k_bounds

    def k_lower(self, j):
        return self._k_bounds.get(j, (0, 0))[0]

    def k_upper(self, j):
        return self._k_bounds.get(j, (0, 0))[1]

    def __getitem__(self, key):
        return self._terms.get(key, 0j)

    def __len__(self):
        return len(self._terms)

    def __repr__(self):
        body = ", ".join(f"({j},{k}): {c:.6g}" for (j, k), c in sorted(self._terms.items()))
        return f"LogPowSeries({{{body}}}, shift={self._shift:.6g}, j_max={self._j_max})"

    @classmethod
    def one(cls, shift=0j):
        return cls({(0, 0): 1.0}, shift=shift)

    def min_k(self):
        return min((k for _, k in self._terms), default=0)

    def truncated(self, j_cut):
        """Drop every term with ``j > j_cut``."""
        keep = {jk: c for jk, c in self._terms.items() if jk[0] <= j_cut}
        bounds = {j: b for j, b in self._k_bounds.items() if j <= j_cut}
        return LogPowSeries(keep, self._shift, min(self._j_max, j_cut), bounds)

    # -- serialisation ---------------------------------------------------------

    def to_json_obj(self):
        return {
            "shift": [self._shift.real, self._shift.imag],
            "terms": [
                {"j": j, "k": k, "c": [c.real, c.imag]}
                for (j, k), c in sorted(self._terms.items())
            ],
        }

    @classmethod
    def from_json_obj(cls, obj):
        try:
            sre, sim = obj.get("shift", [0.0, 0.0])
            terms = {}
            for t in obj["terms"]:
                key = (int(t["j"]), int(t["k"]))
                cre, cim = t["c"]
                terms[key] = terms.get(key, 0j) + complex(cre, cim)
        except (KeyError, TypeError, ValueError) as exc:
            raise InputError(f"malformed series JSON: {exc}") from exc
        try:
            return cls(terms, shift=complex(sre, sim))
        except DomainError as exc:
            raise InputError(str(exc)) from exc

    def dumps(self):
        return json.dumps(self.to_json_obj(), indent=2)


# ---------------------------------------------------------------------------
# operations
# ---------------------------------------------------------------------------

def evaluate(s, lam):
    """Value of ``s`` at the LogPoint ``lam`` (requires ``lam.modulus < 1``)."""
    if lam.modulus >= 1:
        raise DomainError("series are evaluated only for |lambda| < 1")
    d = lam.log - s.shift
    if s.min_k() < 0 and abs(d) < POLE_TOL:
        raise PoleAtShift("log(lambda) coincides with the series shift")
    total = 0j
    for (j, k), c in s.terms.items():
        total += c * lam.power(j) * d ** k
    return total


def _same_shift(s1, s2):
    if s1.shift != s2.shift:
        raise RebaseRequired(f"shifts differ: {s1.shift} vs {s2.shift}")


def _merge_bounds(b1, b2):
    out = dict(b1)
    for j, (lo, hi) in b2.items():
        if j in out:
            out[j] = (min(out[j][0], lo), max(out[j][1], hi))
        else:
            out[j] = (lo, hi)
    return out


def add(s1, s2):
    _same_shift(s1, s2)
    terms = dict(s1.terms)
    for jk, c in s2.terms.items():
        terms[jk] = terms.get(jk, 0j) + c
    return LogPowSeries(terms, s1.shift, max(s1.j_max, s2.j_max),
                        _merge_bounds(s1.k_bounds, s2.k_bounds))


def scale(s, c):
    c = complex(c)
    return LogPowSeries({jk: v * c for jk, v in s.terms.items()}, s.shift, s.j_max,
                        s.k_bounds)


def sub(s1, s2):
    return add(s1, scale(s2, -1.0))


def mul(s1, s2, j_cut=DEFAULT_J_CUT):
    """Cauchy product truncated at ``lambda**j_cut``."""
    _same_shift(s1, s2)
    terms = {}
    for (j1, k1), c1 in s1.terms.items():
        for (j2, k2), c2 in s2.terms.items():
            j = j1 + j2
            if j > j_cut:
                continue
            key = (j, k1 + k2)
            terms[key] = terms.get(key, 0j) + c1 * c2
    bounds = {}
    for j1, (lo1, hi1) in s1.k_bounds.items():
        for j2, (lo2, hi2) in s2.k_bounds.items():
            j = j1 + j2
            if j > j_cut:
                continue
            lo, hi = lo1 + lo2, hi1 + hi2
            if j in bounds:
                bounds[j] = (min(bounds[j][0], lo), max(bounds[j][1], hi))
            else:
                bounds[j] = (lo, hi)
    return LogPowSeries(terms, s1.shift, min(j_cut, s1.j_max + s2.j_max), bounds)


def invert_unit(s, j_cut=DEFAULT_J_CUT):
    """Reciprocal of a series whose j = 0 part is the nonzero constant c00."""
    c00 = s[(0, 0)]
    if c00 == 0:
        raise NotAUnit("constant coefficient is zero")
    if any(j == 0 and k != 0 for (j, k) in s.terms):
        raise NotAUnit("j = 0 stratum contains log terms")
    inv0 = 1.0 / c00
    # s = c00 (1 - t) with t free of j = 0 terms
    t = LogPowSeries({jk: -c * inv0 for jk, c in s.terms.items() if jk[0] > 0},
                     s.shift, s.j_max)
    one = LogPowSeries.one(s.shift)
    acc = one
    power = one
    while True:
        power = mul(power, t, j_cut)
        if len(power) == 0:
            break
        acc = add(acc, power)
    return scale(acc, inv0).truncated(j_cut)


def rebase_shift(s, new_shift):
    """Re-expand ``(L - a)^k`` as a polynomial in ``(L - a')`` (k >= 0 only)."""
    if s.min_k() < 0:
        raise NegativePowersPresent("negative powers of (log - a) do not rebase finitely")
    new_shift = complex(new_shift)
    delta = new_shift - s.shift
    terms = {}
    bounds = {}
    for (j, k), c in s.terms.items():
        for i in range(k + 1):
            coef = c * comb(k, i) * delta ** (k - i)
            terms[(j, i)] = terms.get((j, i), 0j) + coef
        lo, hi = bounds.get(j, (0, k))
        bounds[j] = (0, max(hi, k))
    return LogPowSeries(terms, new_shift, s.j_max, bounds)


def differentiate(s, drop_j0=False):
    """Term-by-term d/dlambda: lambda^(j-1) (j (L-a)^k + k (L-a)^(k-1)).

    A ``j = 0`` log term differentiates to a ``lambda^-1`` term, which is
    outside the series class: it raises :class:`DomainError` unless
    ``drop_j0`` is set, in which case the ``j = 0`` stratum is omitted
    (the result is then the derivative of the ``j >= 1`` part).
    """
    terms = {}
    for (j, k), c in s.terms.items():
        if j == 0:
            if k != 0 and not drop_j0:
                raise DomainError("derivative of a j = 0 log term leaves the series class")
            continue
        terms[(j - 1, k)] = terms.get((j - 1, k), 0j) + j * c
        if k != 0:
            terms[(j - 1, k - 1)] = terms.get((j - 1, k - 1), 0j) + k * c
    return LogPowSeries(terms, s.shift, max(s.j_max - 1, 0))


# ---------------------------------------------------------------------------
# mixed-basis inversion
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SplitLogSeries:
    """``plain`` in powers of log(lambda) (shift 0) plus ``shifted`` in
    powers of (log lambda - a)."""

    plain: LogPowSeries
    shifted: LogPowSeries

    @property
    def shift(self):
        return self.shifted.shift

    def evaluate(self, lam):
        return evaluate(self.plain, lam) + evaluate(self.shifted, lam)

    def to_single(self):
        """Everything on the shifted basis (plain k >= 0 rebases exactly)."""
        return add(rebase_shift(self.plain, self.shift), self.shifted)

    def mul_by(self, s, j_cut):
        """Product with a k >= 0 series ``s``, returned as a SplitLogSeries."""
        left = mul(rebase_shift(s, self.plain.shift), self.plain, j_cut)
        right = mul(rebase_shift(s, self.shifted.shift), self.shifted, j_cut)
        return SplitLogSeries(left, right)

    def to_json_obj(self):
        return {
            "shift_a": [self.shift.real, self.shift.imag],
            "plain": self.plain.to_json_obj(),
            "shifted": self.shifted.to_json_obj(),
        }


def _to_split(s):
    """Move the k >= 1 part of a shifted series onto plain log powers."""
    a = s.shift
    pos = LogPowSeries({jk: c for jk, c in s.terms.items() if jk[1] >= 1}, a, s.j_max)
    rest = {jk: c for jk, c in s.terms.items() if jk[1] < 1}
    plain_full = rebase_shift(pos, 0j)
    plain = {}
    for (j, k), c in plain_full.terms.items():
        if k == 0:
            rest[(j, 0)] = rest.get((j, 0), 0j) + c
        else:
            plain[(j, k)] = c
    return SplitLogSeries(LogPowSeries(plain, 0j, s.j_max), LogPowSeries(rest, a, s.j_max))


def geometric_log_invert(alpha, log_z, j_cut=DEFAULT_J_CUT):
    """Expand ``1 / (1 - (log lambda - log z) alpha(lambda))`` near lambda = 0.

    ``alpha`` carries only nonnegative powers of the logarithm.  Writing
    ``a = log z + 1/alpha00`` the denominator is ``-alpha00 (L - a)`` at
    leading order; the remainder is summed as a geometric series.  The result
    keeps ``lambda**(2j)`` for ``j <= j_cut`` and is split into plain
    ``(log lambda)^k`` terms (k >= 1) and ``(log lambda - a)^(-k)`` terms
    (k >= 0), so each ``lambda**(2j)`` stratum has at most ``j - 1`` plain
    and ``j + 1`` inverse powers when alpha has k <= j.
    """
    if alpha.min_k() < 0:
        raise NegativePowersPresent("alpha must contain only k >= 0")
    a00 = alpha[(0, 0)]
    if abs(a00) < SINGULAR_ALPHA_TOL:
        raise SingularAlpha("alpha00 vanishes")
    if any(j == 0 and k != 0 for (j, k) in alpha.terms):
        raise NotAUnit("alpha's j = 0 stratum must be the constant alpha00")
    log_z = complex(log_z)
    a = log_z + 1.0 / a00
    cut = 2 * j_cut
    # beta = alpha - alpha00 on the (L - a) basis
    beta = rebase_shift(
        LogPowSeries({jk: c for jk, c in alpha.terms.items() if jk != (0, 0)},
                     alpha.shift, alpha.j_max),
        a,
    )
    u = LogPowSeries({(0, -1): 1.0}, a)                       # (L - a)^-1
    # r = -(beta / alpha00) (1 + u / alpha00)
    factor = add(LogPowSeries.one(a), scale(u, 1.0 / a00))
    r = scale(mul(beta, factor, cut), -1.0 / a00)
    acc = LogPowSeries.one(a)
    power = LogPowSeries.one(a)
    while True:
        power = mul(power, r, cut)
        if len(power) == 0:
            break
        acc = add(acc, power)
    result = mul(scale(u, -1.0 / a00), acc, cut)
    return _to_split(result)


def log_invert_denominator(alpha, log_z, shift):
    """The series ``1 - (log lambda - log z) alpha`` on the given shift."""
    alpha_s = rebase_shift(alpha, shift)
    lin = LogPowSeries({(0, 1): 1.0, (0, 0): shift - complex(log_z)}, shift)
    return sub(LogPowSeries.one(shift), mul(lin, alpha_s, alpha_s.j_max))


# ---------------------------------------------------------------------------
# tail bound on sectors
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SectorSpec:
    """``{nu : 0 < |nu| < radius, |arg nu| < half_angle}`` with nu = lambda e^{-a}."""

    half_angle: float
    radius: float

    def __post_init__(self):
        if not self.half_angle > 0:
            raise DomainError("sector half angle must be > 0")
        if not 0 < self.radius < 1:
            raise DomainError("sector radius must lie in (0, 1)")

    def boundary_samples(self, n=SECTOR_SAMPLES):
        """``n`` points on the sector boundary: the arc plus both rays."""
        n_arc = n // 2
        n_ray = (n - n_arc) // 2
        angles = np.linspace(-self.half_angle, self.half_angle, n_arc)
        radii = self.radius * np.logspace(-8, 0, n_ray, endpoint=False)
        # (modulus, argument) pairs; the argument may exceed pi
        pts = [(self.radius, float(t)) for t in angles]
        pts += [(float(r), self.half_angle) for r in radii]
        pts += [(float(r), -self.half_angle) for r in radii]
        return pts


def sector_tail_bound(s, j_cut, sector, nu0):
    """Majorant for the dropped tail ``j > j_cut`` of ``s`` on the sector.

    Coefficients are moved to the coordinate nu = lambda e^{-shift}
    (``V[j,k] = c[j,k] e^{shift j}``); the bound is
    ``sum |V[j,k]| |log nu0|^k nu0^j`` once the sample check
    ``|log nu|^N |nu| <= |log nu0|^N nu0`` and ``|log nu| >= |log nu0|``
    passes on the boundary, where ``N`` is the least integer with
    ``k_upper(j) <= N j`` over the tail.  Returns ``math.inf`` if the check
    fails.
    """
    if not 0 < nu0 < 1:
        raise DomainError("nu0 must lie in (0, 1)")
    tail = [(j, k, c) for (j, k), c in s.terms.items() if j > j_cut]
    if not tail:
        return 0.0
    n = 0
    for j in {j for j, _, _ in tail}:
        n = max(n, math.ceil(s.k_upper(j) / j))
    lg0 = -math.log(nu0)
    ref = lg0 ** n * nu0
    for mod, arg in sector.boundary_samples():
        lg = abs(complex(math.log(mod), arg))
        if lg ** n * mod > ref * (1 + 1e-12) or lg < lg0:
            return math.inf
    a = s.shift
    total = 0.0
    for j, k, c in tail:
        total += abs(c) * math.exp(a.real * j) * lg0 ** k * nu0 ** j
    return total
