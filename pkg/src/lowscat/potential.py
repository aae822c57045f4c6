"""Obstacle geometry, boundary panels and the logarithmic equilibrium problem.

The discrete equilibrium measure is piecewise constant in arc length on each
panel.  The kernel matrix

    K[i, j] = (1 / L_j) * integral over panel j of log(1 / |x_i - y|) ds(y)

is collocated at panel midpoints ``x_i``.  The self term is computed by
subtracting the ``-log|s - s_i|`` singularity in arc length and integrating
it exactly; for a straight panel this gives ``1 - log(L / 2)``.  The solve
minimises the discrete energy ``w^T K w`` over ``sum(w) = 1``, i.e. the
bordered KKT system with the symmetric part of ``K``.
"""

import json
import logging
import math
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np
from numpy.polynomial.legendre import leggauss
from scipy import linalg

from .errors import (
    DimensionMismatch,
    InvalidGeometry,
    NonConvergent,
    NotResolved,
    SingularSystem,
    TooCloseToBoundary,
)
from .specfun import EULER_GAMMA

log = logging.getLogger(__name__)

MAX_PANELS = 8192
MIN_CLOSED_PANELS = 8
FAR_NODES = 4
NEAR_NODES = 32
NEAR_FACTOR = 3.0
SELF_NODES = 24
NEGATIVE_WEIGHT_TOL = -1e-8
RESIDUAL_TOL = 1e-6
CAPACITY_FLOOR = 1e-12

_GL_CACHE = {}


def _gauss(n):
    if n not in _GL_CACHE:
        _GL_CACHE[n] = leggauss(n)
    return _GL_CACHE[n]


def _chebyshev_breaks(n):
    k = np.arange(n + 1)
    return 0.5 * (1.0 - np.cos(np.pi * k / n))


# ---------------------------------------------------------------------------
# primitives; each is parameterised by t in [0, 1]
# ---------------------------------------------------------------------------

def _as_point(p, what):
    try:
        arr = np.asarray(p, dtype=float).reshape(2)
    except (TypeError, ValueError) as exc:
        raise InvalidGeometry(f"{what} must be a 2-vector") from exc
    if not np.all(np.isfinite(arr)):
        raise InvalidGeometry(f"{what} must be finite")
    return arr


class Primitive:
    closed = True

    def point(self, t):
        raise NotImplementedError

    def speed(self, t):
        raise NotImplementedError

    def breakpoints(self, n):
        return np.linspace(0.0, 1.0, n + 1)

    def min_panels(self):
        return MIN_CLOSED_PANELS

    def length(self):
        x, w = _gauss(64)
        bps = self.breakpoints(max(self.min_panels(), 16))
        total = 0.0
        for a, b in zip(bps[:-1], bps[1:]):
            t = 0.5 * (b - a) * x + 0.5 * (a + b)
            total += 0.5 * (b - a) * float(w @ self.speed(t))
        return total

    def samples(self, m=256):
        return self.point(np.linspace(0.0, 1.0, m))

    def bbox(self):
        pts = self.samples(512)
        return pts.min(axis=0), pts.max(axis=0)

    def scaled(self, s):
        raise NotImplementedError

    def moved(self, rotation, offset):
        raise NotImplementedError


def _rot(theta):
    c, s = math.cos(theta), math.sin(theta)
    return np.array([[c, -s], [s, c]])


@dataclass(frozen=True)
class Circle(Primitive):
    center: tuple
    radius: float

    def __post_init__(self):
        object.__setattr__(self, "center", tuple(_as_point(self.center, "circle center")))
        if not (self.radius > 0) or not math.isfinite(self.radius):
            raise InvalidGeometry("circle radius must be > 0")

    def point(self, t):
        t = np.asarray(t, dtype=float)
        ang = 2 * np.pi * t
        return np.stack([self.center[0] + self.radius * np.cos(ang),
                         self.center[1] + self.radius * np.sin(ang)], axis=-1)

    def speed(self, t):
        return np.full(np.shape(t), 2 * np.pi * self.radius)

    def length(self):
        return 2 * np.pi * self.radius

    def bbox(self):
        c = np.asarray(self.center)
        return c - self.radius, c + self.radius

    def scaled(self, s):
        return Circle(tuple(s * np.asarray(self.center)), s * self.radius)

    def moved(self, rotation, offset):
        return Circle(tuple(_rot(rotation) @ np.asarray(self.center) + offset), self.radius)


@dataclass(frozen=True)
class Ellipse(Primitive):
    center: tuple
    semi_axes: tuple
    rotation: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "center", tuple(_as_point(self.center, "ellipse center")))
        a, b = _as_point(self.semi_axes, "semi_axes")
        if not (a >= b > 0):
            raise InvalidGeometry("ellipse semi-axes must satisfy a >= b > 0")
        object.__setattr__(self, "semi_axes", (float(a), float(b)))

    def point(self, t):
        t = np.asarray(t, dtype=float)
        a, b = self.semi_axes
        ang = 2 * np.pi * t
        local = np.stack([a * np.cos(ang), b * np.sin(ang)], axis=-1)
        return local @ _rot(self.rotation).T + np.asarray(self.center)

    def speed(self, t):
        a, b = self.semi_axes
        ang = 2 * np.pi * np.asarray(t, dtype=float)
        return 2 * np.pi * np.hypot(a * np.sin(ang), b * np.cos(ang))

    def scaled(self, s):
        return Ellipse(tuple(s * np.asarray(self.center)),
                       (s * self.semi_axes[0], s * self.semi_axes[1]), self.rotation)

    def moved(self, rotation, offset):
        return Ellipse(tuple(_rot(rotation) @ np.asarray(self.center) + offset),
                       self.semi_axes, self.rotation + rotation)


@dataclass(frozen=True)
class Segment(Primitive):
    """Open straight arc; panels are Chebyshev graded toward both ends."""

    p0: tuple
    p1: tuple
    closed = False

    def __post_init__(self):
        p0 = _as_point(self.p0, "segment p0")
        p1 = _as_point(self.p1, "segment p1")
        if np.linalg.norm(p1 - p0) == 0:
            raise InvalidGeometry("segment endpoints coincide")
        object.__setattr__(self, "p0", tuple(p0))
        object.__setattr__(self, "p1", tuple(p1))

    def point(self, t):
        t = np.asarray(t, dtype=float)[..., None]
        return (1 - t) * np.asarray(self.p0) + t * np.asarray(self.p1)

    def speed(self, t):
        return np.full(np.shape(t), self.length())

    def length(self):
        return float(np.linalg.norm(np.subtract(self.p1, self.p0)))

    def breakpoints(self, n):
        return _chebyshev_breaks(n)

    def min_panels(self):
        return 2

    def bbox(self):
        pts = np.array([self.p0, self.p1])
        return pts.min(axis=0), pts.max(axis=0)

    def scaled(self, s):
        return Segment(tuple(s * np.asarray(self.p0)), tuple(s * np.asarray(self.p1)))

    def moved(self, rotation, offset):
        r = _rot(rotation)
        return Segment(tuple(r @ np.asarray(self.p0) + offset),
                       tuple(r @ np.asarray(self.p1) + offset))


def _segments_cross(p, q, r, s):
    def orient(a, b, c):
        return np.sign((b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0]))
    return (orient(p, q, r) * orient(p, q, s) < 0) and (orient(r, s, p) * orient(r, s, q) < 0)


@dataclass(frozen=True)
class Polygon(Primitive):
    """Closed simple polygon; each edge is Chebyshev graded toward its corners."""

    vertices: tuple

    def __post_init__(self):
        try:
            v = np.asarray(self.vertices, dtype=float)
        except (TypeError, ValueError) as exc:
            raise InvalidGeometry("polygon vertices must be 2-vectors") from exc
        if v.ndim != 2 or v.shape[1] != 2 or len(v) < 3:
            raise InvalidGeometry("polygon needs at least 3 vertices")
        if not np.all(np.isfinite(v)):
            raise InvalidGeometry("polygon vertices must be finite")
        edges = np.roll(v, -1, axis=0) - v
        if np.any(np.linalg.norm(edges, axis=1) == 0):
            raise InvalidGeometry("polygon has a zero-length edge")
        n = len(v)
        for i in range(n):
            for j in range(i + 1, n):
                if j == i + 1 or (i == 0 and j == n - 1):
                    continue
                if _segments_cross(v[i], v[(i + 1) % n], v[j], v[(j + 1) % n]):
                    raise InvalidGeometry("polygon is self-intersecting")
        area = 0.5 * np.sum(v[:, 0] * np.roll(v[:, 1], -1) - np.roll(v[:, 0], -1) * v[:, 1])
        if abs(area) == 0:
            raise InvalidGeometry("polygon is degenerate")
        object.__setattr__(self, "vertices", tuple(map(tuple, v)))

    @cached_property
    def _v(self):
        return np.asarray(self.vertices)

    @cached_property
    def _edge_lengths(self):
        return np.linalg.norm(np.roll(self._v, -1, axis=0) - self._v, axis=1)

    def _locate(self, t):
        ne = len(self._v)
        u = np.asarray(t, dtype=float) * ne
        idx = np.clip(np.floor(u).astype(int), 0, ne - 1)
        return idx, u - idx

    def point(self, t):
        idx, f = self._locate(t)
        v = self._v
        a = v[idx]
        b = v[(idx + 1) % len(v)]
        return a + f[..., None] * (b - a)

    def speed(self, t):
        idx, _ = self._locate(t)
        return len(self._v) * self._edge_lengths[idx]

    def length(self):
        return float(self._edge_lengths.sum())

    def breakpoints(self, n):
        ne = len(self._v)
        share = self._edge_lengths / self._edge_lengths.sum()
        per_edge = np.maximum(2, np.round(n * share).astype(int))
        parts = [(e + _chebyshev_breaks(m)[:-1]) / ne for e, m in enumerate(per_edge)]
        return np.concatenate(parts + [np.array([1.0])])

    def min_panels(self):
        return max(MIN_CLOSED_PANELS, 2 * len(self._v))

    def bbox(self):
        return self._v.min(axis=0), self._v.max(axis=0)

    def scaled(self, s):
        return Polygon(tuple(map(tuple, s * self._v)))

    def moved(self, rotation, offset):
        return Polygon(tuple(map(tuple, self._v @ _rot(rotation).T + offset)))


@dataclass(frozen=True)
class Geometry:
    primitives: tuple

    def __post_init__(self):
        prims = tuple(self.primitives)
        if not prims:
            raise InvalidGeometry("geometry needs at least one primitive")
        object.__setattr__(self, "primitives", prims)
        _check_disjoint(prims)

    def scaled(self, s):
        return Geometry(tuple(p.scaled(s) for p in self.primitives))

    def moved(self, rotation=0.0, offset=(0.0, 0.0)):
        off = np.asarray(offset, dtype=float)
        return Geometry(tuple(p.moved(rotation, off) for p in self.primitives))

    @classmethod
    def from_json_obj(cls, obj):
        if not isinstance(obj, dict) or "primitives" not in obj:
            raise InvalidGeometry("geometry JSON needs a 'primitives' list")
        prims = []
        for item in obj["primitives"]:
            try:
                kind = item["type"]
                if kind == "circle":
                    prims.append(Circle(item["center"], float(item["radius"])))
                elif kind == "ellipse":
                    prims.append(Ellipse(item["center"], item["semi_axes"],
                                         float(item.get("rotation", 0.0))))
                elif kind == "segment":
                    prims.append(Segment(item["p0"], item["p1"]))
                elif kind == "polygon":
                    prims.append(Polygon(item["vertices"]))
                else:
                    raise InvalidGeometry(f"unknown primitive type {kind!r}")
            except (KeyError, TypeError, ValueError) as exc:
                if isinstance(exc, InvalidGeometry):
                    raise
                raise InvalidGeometry(f"malformed primitive {item!r}: {exc}") from exc
        return cls(tuple(prims))

    @classmethod
    def load(cls, path):
        with open(path) as fh:
            try:
                obj = json.load(fh)
            except json.JSONDecodeError as exc:
                raise InvalidGeometry(f"{path}: invalid JSON ({exc})") from exc
        return cls.from_json_obj(obj)


def _check_disjoint(prims):
    boxes = [p.bbox() for p in prims]
    for i in range(len(prims)):
        for j in range(i + 1, len(prims)):
            (lo1, hi1), (lo2, hi2) = boxes[i], boxes[j]
            if np.any(hi1 < lo2) or np.any(hi2 < lo1):
                continue
            a = prims[i].samples(400)
            b = prims[j].samples(400)
            d = np.min(np.linalg.norm(a[:, None, :] - b[None, :, :], axis=-1))
            scale = max(prims[i].length(), prims[j].length()) / 400
            if d <= scale:
                raise InvalidGeometry(f"primitives {i} and {j} intersect or touch")
            if _crosses(prims[i], prims[j]):
                raise InvalidGeometry(f"primitives {i} and {j} intersect")


def _crosses(p, q):
    a = p.samples(200)
    b = q.samples(200)
    for k in range(len(a) - 1):
        for m in range(len(b) - 1):
            if _segments_cross(a[k], a[k + 1], b[m], b[m + 1]):
                return True
    return False


# ---------------------------------------------------------------------------
# mesh
# ---------------------------------------------------------------------------

@dataclass(eq=False)
class BoundaryMesh:
    """Panels covering every primitive's parameter range exactly once."""

    geometry: Geometry
    prim_index: np.ndarray
    t0: np.ndarray
    t1: np.ndarray
    midpoints: np.ndarray = field(init=False)
    endpoints: np.ndarray = field(init=False)
    lengths: np.ndarray = field(init=False)
    total_length: float = field(init=False)

    def __post_init__(self):
        n = len(self.t0)
        self.midpoints = np.empty((n, 2))
        self.endpoints = np.empty((n, 2, 2))
        self.lengths = np.empty(n)
        x, w = _gauss(16)
        for pi, prim in enumerate(self.geometry.primitives):
            sel = self.prim_index == pi
            a, b = self.t0[sel], self.t1[sel]
            self.midpoints[sel] = prim.point(0.5 * (a + b))
            self.endpoints[sel, 0] = prim.point(a)
            self.endpoints[sel, 1] = prim.point(b)
            t = 0.5 * (b - a)[:, None] * x + 0.5 * (a + b)[:, None]
            self.lengths[sel] = 0.5 * (b - a) * (prim.speed(t) @ w)
        if np.any(self.lengths <= 0):
            raise InvalidGeometry("mesh produced a zero-length panel")
        self.total_length = float(self.lengths.sum())

    @property
    def n_panels(self):
        return len(self.t0)

    def nodes(self, q, panels=None):
        """Gauss nodes (.., q, 2) and arc-length weights (.., q) on panels."""
        if panels is None:
            panels = np.arange(self.n_panels)
        x, w = _gauss(q)
        pts = np.empty((len(panels), q, 2))
        wts = np.empty((len(panels), q))
        for pi, prim in enumerate(self.geometry.primitives):
            sel = self.prim_index[panels] == pi
            if not np.any(sel):
                continue
            a, b = self.t0[panels][sel], self.t1[panels][sel]
            t = 0.5 * (b - a)[:, None] * x + 0.5 * (a + b)[:, None]
            pts[sel] = prim.point(t)
            wts[sel] = 0.5 * (b - a)[:, None] * w * prim.speed(t)
        return pts, wts

    def self_terms(self):
        """Exact-in-arc-length K[i, i] with the log singularity subtracted."""
        out = np.empty(self.n_panels)
        x, w = _gauss(SELF_NODES)
        xs, ws = _gauss(8)
        for pi, prim in enumerate(self.geometry.primitives):
            sel = np.flatnonzero(self.prim_index == pi)
            if sel.size == 0:
                continue
            a, b = self.t0[sel], self.t1[sel]
            tm = 0.5 * (a + b)
            xc = prim.point(tm)
            t = 0.5 * (b - a)[:, None] * x + tm[:, None]
            y = prim.point(t)
            dsdt = prim.speed(t)
            wt = 0.5 * (b - a)[:, None] * w * dsdt
            # signed arc length from the midpoint to each node
            span = t - tm[:, None]
            tt = tm[:, None, None] + 0.5 * span[..., None] * (xs + 1.0)
            s_rel = 0.5 * span * (prim.speed(tt) @ ws)
            dist = np.linalg.norm(y - xc[:, None, :], axis=-1)
            smooth = (wt * np.log(np.abs(s_rel) / dist)).sum(axis=1)
            lo = 0.5 * (tm - a)
            hi = 0.5 * (b - tm)
            tl = tm[:, None] - lo[:, None] * (xs + 1.0)
            th = tm[:, None] + hi[:, None] * (xs + 1.0)
            left = lo * (prim.speed(tl) @ ws)
            right = hi * (prim.speed(th) @ ws)
            sing = left * (1 - np.log(left)) + right * (1 - np.log(right))
            out[sel] = (smooth + sing) / self.lengths[sel]
        return out

    def potential_matrix(self, targets, self_panels=None):
        """``M[i, j] = (1/L_j) int_panel_j log(1/|x_i - y|) ds`` for targets x_i.

        ``self_panels[i] = j`` marks target i as the collocation point of
        panel j (handled by :meth:`self_terms`); use -1 for none.
        """
        targets = np.atleast_2d(np.asarray(targets, dtype=float))
        m, n = len(targets), self.n_panels
        out = np.empty((m, n))
        pts, wts = self.nodes(FAR_NODES)
        flat = pts.reshape(-1, 2)
        chunk = max(1, 2_000_000 // (n * FAR_NODES))
        for s in range(0, m, chunk):
            tg = targets[s:s + chunk]
            d = np.linalg.norm(tg[:, None, :] - flat[None, :, :], axis=-1)
            out[s:s + chunk] = -(np.log(d).reshape(len(tg), n, FAR_NODES) * wts).sum(-1)
        out /= self.lengths
        # near field
        rows, cols = [], []
        for s in range(0, m, chunk):
            tg = targets[s:s + chunk]
            d = np.linalg.norm(tg[:, None, :] - self.midpoints[None, :, :], axis=-1)
            r, c = np.nonzero(d < NEAR_FACTOR * self.lengths)
            rows.append(r + s)
            cols.append(c)
        rows = np.concatenate(rows)
        cols = np.concatenate(cols)
        if self_panels is not None:
            keep = np.asarray(self_panels)[rows] != cols
            rows, cols = rows[keep], cols[keep]
        if rows.size:
            npts, nwts = self.nodes(NEAR_NODES, cols)
            d = np.linalg.norm(targets[rows][:, None, :] - npts, axis=-1)
            out[rows, cols] = -(np.log(d) * nwts).sum(-1) / self.lengths[cols]
        if self_panels is not None:
            sp = np.asarray(self_panels)
            idx = np.flatnonzero(sp >= 0)
            if idx.size:
                out[idx, sp[idx]] = self.self_terms()[sp[idx]]
        return out

    @cached_property
    def kernel(self):
        """Collocation matrix K (read-only)."""
        k = self.potential_matrix(self.midpoints, np.arange(self.n_panels))
        k.setflags(write=False)
        return k

    @cached_property
    def energy_matrix(self):
        """Symmetric part of K; the discrete energy is ``w @ energy_matrix @ w``."""
        k = 0.5 * (self.kernel + self.kernel.T)
        k.setflags(write=False)
        return k


def build_mesh(geometry, n_panels=None, per_unit=None):
    """Panelise ``geometry`` with ``n_panels`` in total (or ``per_unit`` per length).

    Panels are split between primitives in proportion to boundary length;
    with several primitives each closed one gets at least 8.  A single
    primitive receives exactly ``n_panels`` (polygons add panels so that
    every edge has at least two); the equilibrium solve itself needs 8.
    """
    prims = geometry.primitives
    lengths = np.array([p.length() for p in prims])
    if (n_panels is None) == (per_unit is None):
        raise InvalidGeometry("give exactly one of n_panels or per_unit")
    if per_unit is not None:
        counts = np.ceil(per_unit * lengths).astype(int)
    else:
        counts = np.round(n_panels * lengths / lengths.sum()).astype(int)
    counts = np.maximum(counts, [p.min_panels() for p in prims])
    if n_panels is not None and len(prims) == 1:
        counts[0] = max(int(n_panels), 1)
    if counts.sum() > MAX_PANELS:
        raise InvalidGeometry(f"{counts.sum()} panels exceeds the cap of {MAX_PANELS}")
    idx, t0, t1 = [], [], []
    for i, (p, c) in enumerate(zip(prims, counts)):
        bps = p.breakpoints(int(c))
        idx.append(np.full(len(bps) - 1, i))
        t0.append(bps[:-1])
        t1.append(bps[1:])
    return BoundaryMesh(geometry, np.concatenate(idx), np.concatenate(t0), np.concatenate(t1))


# ---------------------------------------------------------------------------
# equilibrium problem
# ---------------------------------------------------------------------------

def mutual_energy(mesh, w1, w2):
    """Discrete ``J_1(mu, nu) = sum_ij w1_i w2_j log(1/|x - y|)`` (symmetric)."""
    w1 = np.asarray(w1, dtype=float)
    w2 = np.asarray(w2, dtype=float)
    n = mesh.n_panels
    if w1.shape != (n,) or w2.shape != (n,):
        raise DimensionMismatch(f"weights must have shape ({n},)")
    return float(w1 @ mesh.energy_matrix @ w2)


def shift_a(log_capacity):
    """The resolvent shift ``log 2 - gamma - C + i pi/2``."""
    return complex(math.log(2.0) - EULER_GAMMA - log_capacity, 0.5 * math.pi)


@dataclass(frozen=True)
class EquilibriumSolution:
    weights: np.ndarray
    robin_constant: float
    log_capacity: float
    capacity: float
    shift_a: complex
    residual: float
    panels: int
    potential_spread: float = 0.0
    negative_weights: bool = False
    richardson_log_capacity: float = None

    @property
    def richardson_capacity(self):
        if self.richardson_log_capacity is None:
            return None
        return math.exp(self.richardson_log_capacity)

    def report(self):
        out = {
            "robin_constant": self.robin_constant,
            "log_capacity": self.log_capacity,
            "capacity": self.capacity,
            "shift_a": [self.shift_a.real, self.shift_a.imag],
            "panels": self.panels,
            "residual": self.residual,
            "potential_spread": self.potential_spread,
        }
        if self.richardson_log_capacity is not None:
            out["richardson_log_capacity"] = self.richardson_log_capacity
            out["richardson_capacity"] = self.richardson_capacity
        return out


def _solve_kkt(mesh):
    n = mesh.n_panels
    a = np.zeros((n + 1, n + 1))
    a[:n, :n] = mesh.energy_matrix
    a[:n, n] = -1.0
    a[n, :n] = 1.0
    rhs = np.zeros(n + 1)
    rhs[n] = 1.0
    try:
        sol = linalg.solve(a, rhs, check_finite=True)
    except linalg.LinAlgError as exc:
        raise SingularSystem(f"equilibrium system is singular: {exc}") from exc
    if not np.all(np.isfinite(sol)):
        raise SingularSystem("equilibrium system produced non-finite values")
    return sol[:n], float(sol[n])


def solve_equilibrium(mesh, richardson=False, richardson_order=1, _refined=False):
    """Discrete equilibrium measure of the meshed obstacle.

    Minimises ``w @ K_sym @ w`` subject to ``sum(w) = 1``.  The Lagrange
    multiplier is the Robin constant ``V`` (the constant value of the
    potential), so ``C = -V`` and the capacity is ``exp(C)``.

    ``residual`` is the largest defect ``|K_sym w - V|`` of the solved
    symmetric system; above 1e-6 the mesh is refined once and then
    :class:`NonConvergent` is raised.  ``potential_spread`` is the
    max-minus-min of the pointwise potential at the panel midpoints, a
    discretisation diagnostic (it is O(h^2) on smooth boundaries but larger
    next to endpoints and corners).

    With ``richardson=True`` the same geometry is also solved with half the
    panels and ``C_N + (C_N - C_{N/2}) / (2**p - 1)`` is reported alongside
    the raw value, ``p = richardson_order`` (1 gives ``2 C_N - C_{N/2}``).
    The panel error is observed to be second order on smooth boundaries and
    graded segments, so ``richardson_order=2`` is usually the sharper choice.
    """
    if mesh.n_panels < MIN_CLOSED_PANELS:
        raise InvalidGeometry("equilibrium solve needs at least 8 panels")
    w, v = _solve_kkt(mesh)
    can_refine = not _refined and 2 * mesh.n_panels <= MAX_PANELS
    negative = bool(w.min() < NEGATIVE_WEIGHT_TOL)
    if negative:
        log.warning("negative panel weight %.3g on %d panels", w.min(), mesh.n_panels)
        if can_refine:
            fine = build_mesh(mesh.geometry, 2 * mesh.n_panels)
            return solve_equilibrium(fine, richardson, richardson_order, _refined=True)
    residual = float(np.max(np.abs(mesh.energy_matrix @ w - v)))
    if residual > RESIDUAL_TOL:
        if can_refine:
            fine = build_mesh(mesh.geometry, 2 * mesh.n_panels)
            return solve_equilibrium(fine, richardson, richardson_order, _refined=True)
        raise NonConvergent(f"equilibrium residual {residual:.3g} above {RESIDUAL_TOL}")
    c = -v
    if not math.isfinite(c) or c < math.log(CAPACITY_FLOOR):
        raise NotResolved("capacity numerically zero; polarity is not decided here")
    rich = None
    if richardson:
        coarse = build_mesh(mesh.geometry, max(mesh.n_panels // 2, MIN_CLOSED_PANELS))
        _, vc = _solve_kkt(coarse)
        rich = c + (c + vc) / (2.0 ** richardson_order - 1.0)
    w.setflags(write=False)
    return EquilibriumSolution(
        weights=w,
        robin_constant=v,
        log_capacity=c,
        capacity=math.exp(c),
        shift_a=shift_a(c),
        residual=residual,
        panels=mesh.n_panels,
        potential_spread=float(np.ptp(mesh.kernel @ w)),
        negative_weights=negative,
        richardson_log_capacity=rich,
    )


def equilibrium_potential(sol, mesh, points):
    """``sum_j w_j (1/L_j) int log(1/|x - y|) ds`` at arbitrary points."""
    m = mesh.potential_matrix(points)
    return m @ sol.weights


def green_G(sol, mesh, x):
    """Exterior harmonic function vanishing on the obstacle, ~ log|x| - C at infinity."""
    pts = np.atleast_2d(np.asarray(x, dtype=float))
    # distance to the panel polyline (midpoints + endpoints as a proxy)
    cand = np.concatenate([mesh.midpoints, mesh.endpoints.reshape(-1, 2)])
    d = np.min(np.linalg.norm(pts[:, None, :] - cand[None, :, :], axis=-1), axis=1)
    near = np.argmin(np.linalg.norm(pts[:, None, :] - mesh.midpoints[None, :, :], axis=-1), axis=1)
    if np.any(d <= mesh.lengths[near]):
        raise TooCloseToBoundary("evaluation point within one panel length of the boundary")
    g = sol.robin_constant - equilibrium_potential(sol, mesh, pts)
    return g if np.ndim(x) > 1 else float(g[0])


def green_flux(sol, mesh, n_samples=512):
    """Integral over the boundary of the normal derivative of G (normal into the obstacle).

    Evaluated as minus the outward flux through a circle enclosing the mesh,
    which equals the boundary integral by harmonicity of G outside.
    """
    centre = mesh.midpoints.mean(axis=0)
    radius = 2.0 * np.max(np.linalg.norm(mesh.endpoints.reshape(-1, 2) - centre, axis=1)) + 1.0
    th = 2 * np.pi * np.arange(n_samples) / n_samples
    normal = np.stack([np.cos(th), np.sin(th)], axis=1)
    x = centre + radius * normal
    pts, wts = mesh.nodes(FAR_NODES)
    dens = (wts * (sol.weights / mesh.lengths)[:, None]).reshape(-1)
    diff = x[:, None, :] - pts.reshape(-1, 2)[None, :, :]
    grad = (diff / (diff ** 2).sum(-1, keepdims=True) * dens[None, :, None]).sum(1)
    flux = float(np.mean((grad * normal).sum(-1)) * 2 * np.pi * radius)
    return -flux


def capacity(geometry, n_panels=512, richardson=False, richardson_order=1):
    """Convenience wrapper: mesh, solve, return the solution."""
    return solve_equilibrium(build_mesh(geometry, n_panels), richardson, richardson_order)
