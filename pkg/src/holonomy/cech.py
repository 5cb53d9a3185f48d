"""Open covers and the local Cech data of U(1) bundles and gerbes.

Points of the target manifold are given by ambient coordinates. Fields are
vectorized: a point argument has shape (m, ambient_dim), tangent vectors the
same shape, and every callable returns one value per row. Forms are real;
the connection of a bundle is ``i * A``.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

from .errors import EmptyOverlapSamples, NonUnitTransition, PointOutsideChart
from .numerics import angle_of, unit_normalize
from .phase import wrap_angle

DEFAULT_STEP = 1e-4
DEFAULT_TOL = 1e-6
UNIT_TOL = 1e-6


@dataclass(frozen=True)
class Chart:
    """One open set U_i: a signed margin (> 0 inside) and interior samples."""

    membership: Callable[[np.ndarray], np.ndarray]
    sample_points: np.ndarray
    name: str = ""

    def margin(self, points) -> np.ndarray:
        return np.asarray(self.membership(np.atleast_2d(points)), dtype=float)


@dataclass(frozen=True)
class ChartCover:
    ambient_dim: int
    manifold_dim: int
    charts: tuple
    projection: Callable[[np.ndarray], np.ndarray] = lambda y: y
    tangent_frame: Optional[Callable[[np.ndarray], np.ndarray]] = None
    declared_overlaps: Optional[frozenset] = None

    def __post_init__(self):
        object.__setattr__(self, "charts", tuple(self.charts))
        for i, ch in enumerate(self.charts):
            pts = np.atleast_2d(ch.sample_points)
            if pts.size and pts.shape[1] != self.ambient_dim:
                raise ValueError(f"chart {i}: sample points must have {self.ambient_dim} columns")
            if pts.size and not np.all(ch.margin(pts) > 0):
                raise ValueError(f"chart {i}: every sample point must have positive margin")

    @property
    def labels(self) -> range:
        return range(len(self.charts))

    def margins(self, points) -> np.ndarray:
        """Margins of every chart, shape (m, |J|)."""
        points = np.atleast_2d(points)
        return np.stack([ch.margin(points) for ch in self.charts], axis=1)

    def all_samples(self) -> np.ndarray:
        pts = [np.atleast_2d(ch.sample_points) for ch in self.charts if len(ch.sample_points)]
        if not pts:
            return np.zeros((0, self.ambient_dim))
        return np.unique(np.concatenate(pts), axis=0)

    def overlap_samples(self, labels: Sequence[int]) -> np.ndarray:
        pts = self.all_samples()
        if not len(pts):
            return pts
        m = self.margins(pts)[:, sorted(set(labels))]
        return pts[np.all(m > 0, axis=1)]

    def frame(self, points) -> np.ndarray:
        """Tangent frame (m, manifold_dim, ambient_dim) at points of M."""
        points = np.atleast_2d(points)
        if self.tangent_frame is None:
            eye = np.eye(self.ambient_dim)[: self.manifold_dim]
            return np.broadcast_to(eye, (len(points),) + eye.shape).copy()
        return np.asarray(self.tangent_frame(points))

    def is_declared(self, labels) -> bool:
        if self.declared_overlaps is None:
            return False
        return frozenset(labels) in self.declared_overlaps


def _as_points(y):
    return np.atleast_2d(np.asarray(y, dtype=float))


@dataclass(frozen=True)
class BundleData:
    """Transition functions g_ij and real connection 1-forms A_j.

    ``g(i, j, points)`` returns unit complex values, ``A(j, points, vectors)``
    real values. ``curvature(points, u, v)`` is an optional analytic F used
    in place of finite differences.
    """

    cover: ChartCover
    g: Callable
    A: Callable
    curvature: Optional[Callable] = None
    name: str = ""

    def transition(self, i: int, j: int, y) -> np.ndarray:
        """g_ij(y) renormalized to the unit circle."""
        y = _as_points(y)
        if i == j:
            return np.ones(len(y), dtype=complex)
        z, dev = unit_normalize(self.g(i, j, y))
        if dev > UNIT_TOL:
            raise NonUnitTransition(f"|g_{i}{j}| deviates from 1 by {dev:.3e}")
        return z

    def transition_angle(self, i: int, j: int, y) -> np.ndarray:
        if i == j:
            return np.zeros(len(_as_points(y)))
        return angle_of(self.transition(i, j, y))

    def connection(self, j: int, y, v) -> np.ndarray:
        return np.asarray(self.A(j, _as_points(y), _as_points(v)), dtype=float)


@dataclass(frozen=True)
class GerbeData:
    """Transition functions g_ijk, 1-forms A_jk and curving 2-forms F_k."""

    cover: ChartCover
    g3: Callable
    A2: Callable
    F: Callable
    curvature: Optional[Callable] = None
    name: str = ""

    def transition(self, i: int, j: int, k: int, y) -> np.ndarray:
        y = _as_points(y)
        if i == j or j == k or i == k:
            return np.ones(len(y), dtype=complex)
        z, dev = unit_normalize(self.g3(i, j, k, y))
        if dev > UNIT_TOL:
            raise NonUnitTransition(f"|g_{i}{j}{k}| deviates from 1 by {dev:.3e}")
        return z

    def transition_angle(self, i, j, k, y) -> np.ndarray:
        if i == j or j == k or i == k:
            return np.zeros(len(_as_points(y)))
        return angle_of(self.transition(i, j, k, y))

    def connection(self, j: int, k: int, y, v) -> np.ndarray:
        if j == k:
            return np.zeros(len(_as_points(y)))
        return np.asarray(self.A2(j, k, _as_points(y), _as_points(v)), dtype=float)

    def curving(self, k: int, y, a, b) -> np.ndarray:
        return np.asarray(self.F(k, _as_points(y), _as_points(a), _as_points(b)), dtype=float)


@dataclass
class CocycleReport:
    """Per-axiom maximal residuals of a cocycle check."""

    residuals: dict = field(default_factory=dict)
    tol: float = DEFAULT_TOL
    counts: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return all(r <= self.tol for r in self.residuals.values())

    def to_dict(self) -> dict:
        return {
            "residuals": dict(self.residuals),
            "sample_counts": dict(self.counts),
            "tol": self.tol,
            "pass": self.passed,
        }


# ---------------------------------------------------------------------------
# finite-difference helpers on ambient fields


def _darg(fn, y, v, h):
    """d(arg fn)(v) at y, differencing the angle along the stencil with unwrapping."""
    plus = angle_of(fn(y + h * v))
    minus = angle_of(fn(y - h * v))
    return wrap_angle(plus - minus) / (2.0 * h)


def _dform1(form, y, a, b, h):
    """dA(a, b) for a real 1-form on ambient space (constant vector fields)."""
    da_b = (form(y + h * a, b) - form(y - h * a, b)) / (2.0 * h)
    db_a = (form(y + h * b, a) - form(y - h * b, a)) / (2.0 * h)
    return da_b - db_a


def _dform2(form, y, a, b, c, h):
    """dF(a, b, c) for a real 2-form on ambient space."""
    t1 = (form(y + h * a, b, c) - form(y - h * a, b, c)) / (2.0 * h)
    t2 = (form(y + h * b, a, c) - form(y - h * b, a, c)) / (2.0 * h)
    t3 = (form(y + h * c, a, b) - form(y - h * c, a, b)) / (2.0 * h)
    return t1 - t2 + t3


def _samples_or_raise(cover: ChartCover, labels, where: str):
    pts = cover.overlap_samples(labels)
    if len(pts) == 0 and cover.is_declared(labels):
        raise EmptyOverlapSamples(f"{where}: declared overlap {tuple(labels)} has no sample point")
    return pts


def _frame_vectors(cover: ChartCover, pts):
    """Tangent vectors (list of (m, n) arrays) at sample points."""
    fr = cover.frame(pts)
    return [fr[:, a, :] for a in range(fr.shape[1])]


def check_bundle_cocycle(data: BundleData, tol: float = DEFAULT_TOL, h: float = DEFAULT_STEP
                         ) -> CocycleReport:
    """Residuals of B1 (g_ij g_jk = g_ik) and B2 (i(A_k - A_j) = d log g_jk).

    Transition functions are evaluated raw, so repeated-index factors are
    checked rather than assumed. Also reports ``unit`` (g_ii = 1) and
    ``inverse`` (g_ji = g_ij^-1).
    """
    cover = data.cover
    n = len(cover.charts)
    raw = _raw_bundle(data)
    res = {"B1": 0.0, "B2": 0.0, "unit": 0.0, "inverse": 0.0}
    counts = {"B1": 0, "B2": 0}
    for i, j in itertools.product(range(n), repeat=2):
        pts = _samples_or_raise(cover, (i, j), "B2")
        if not len(pts):
            continue
        gij = raw(i, j, pts)
        if i == j:
            res["unit"] = max(res["unit"], float(np.max(np.abs(gij - 1.0))))
        else:
            gji = raw(j, i, pts)
            res["inverse"] = max(res["inverse"], float(np.max(np.abs(gij * gji - 1.0))))
        for v in _frame_vectors(cover, pts):
            lhs = data.connection(j, pts, v) - data.connection(i, pts, v)
            rhs = _darg(lambda z: raw(i, j, z), pts, v, h)
            res["B2"] = max(res["B2"], float(np.max(np.abs(lhs - rhs))))
        counts["B2"] += len(pts)
    for i, j, k in itertools.product(range(n), repeat=3):
        pts = _samples_or_raise(cover, (i, j, k), "B1")
        if not len(pts):
            continue
        r = np.abs(raw(i, j, pts) * raw(j, k, pts) - raw(i, k, pts))
        res["B1"] = max(res["B1"], float(np.max(r)))
        counts["B1"] += len(pts)
    return CocycleReport(res, tol, counts)


def _raw_bundle(data: BundleData):
    def raw(i, j, y):
        z, dev = unit_normalize(data.g(i, j, _as_points(y)))
        if dev > UNIT_TOL:
            raise NonUnitTransition(f"|g_{i}{j}| deviates from 1 by {dev:.3e}")
        return z

    return raw


def _raw_gerbe(data: GerbeData):
    def raw(i, j, k, y):
        z, dev = unit_normalize(data.g3(i, j, k, _as_points(y)))
        if dev > UNIT_TOL:
            raise NonUnitTransition(f"|g_{i}{j}{k}| deviates from 1 by {dev:.3e}")
        return z

    return raw


def check_gerbe_cocycle(data: GerbeData, tol: float = DEFAULT_TOL, h: float = DEFAULT_STEP
                        ) -> CocycleReport:
    """Residuals of the gerbe axioms G1-G4 on overlap samples.

    G1: g_ijk = 1 whenever two indices agree. G2: g_ijk g_ikl = g_jkl g_ijl.
    G3: i(A_jk + A_kl + A_lj) = -d log g_jkl. G4: F_k - F_j = dA_jk.
    ``antisymmetry`` reports |A_jk + A_kj| separately.
    """
    cover = data.cover
    n = len(cover.charts)
    raw = _raw_gerbe(data)
    A = lambda j, k, y, v: np.asarray(data.A2(j, k, y, v), dtype=float)  # noqa: E731
    res = {"G1": 0.0, "G2": 0.0, "G3": 0.0, "G4": 0.0, "antisymmetry": 0.0}
    counts = {"G1": 0, "G2": 0, "G3": 0, "G4": 0}
    for j, k in itertools.product(range(n), repeat=2):
        pts = _samples_or_raise(cover, (j, k), "G4")
        if not len(pts):
            continue
        vecs = _frame_vectors(cover, pts)
        for v in vecs:
            res["antisymmetry"] = max(
                res["antisymmetry"], float(np.max(np.abs(A(j, k, pts, v) + A(k, j, pts, v))))
            )
        for a, b in itertools.combinations(range(len(vecs)), 2):
            u, w = vecs[a], vecs[b]
            lhs = data.curving(k, pts, u, w) - data.curving(j, pts, u, w)
            rhs = _dform1(lambda y, x: A(j, k, y, x), pts, u, w, h)
            res["G4"] = max(res["G4"], float(np.max(np.abs(lhs - rhs))))
        counts["G4"] += len(pts)
    for i, j, k in itertools.product(range(n), repeat=3):
        pts = _samples_or_raise(cover, (i, j, k), "G3")
        if not len(pts):
            continue
        if len({i, j, k}) < 3:
            res["G1"] = max(res["G1"], float(np.max(np.abs(raw(i, j, k, pts) - 1.0))))
            counts["G1"] += len(pts)
        for v in _frame_vectors(cover, pts):
            lhs = A(i, j, pts, v) + A(j, k, pts, v) + A(k, i, pts, v)
            rhs = -_darg(lambda z: raw(i, j, k, z), pts, v, h)
            res["G3"] = max(res["G3"], float(np.max(np.abs(lhs - rhs))))
        counts["G3"] += len(pts)
    for i, j, k, l in itertools.product(range(n), repeat=4):
        pts = _samples_or_raise(cover, (i, j, k, l), "G2")
        if not len(pts):
            continue
        r = np.abs(raw(i, j, k, pts) * raw(i, k, l, pts) - raw(j, k, l, pts) * raw(i, j, l, pts))
        res["G2"] = max(res["G2"], float(np.max(r)))
        counts["G2"] += len(pts)
    return CocycleReport(res, tol, counts)


def _require_inside(cover: ChartCover, chart: int, point, vectors, h):
    point = _as_points(point)
    reach = h * max(float(np.linalg.norm(v)) for v in vectors)
    margin = float(cover.charts[chart].margin(point)[0])
    if margin <= reach:
        raise PointOutsideChart(f"margin {margin:.3e} of chart {chart} does not exceed {reach:.3e}")
    return point


def bundle_curvature(data: BundleData, chart: int, point, frame, h: float = DEFAULT_STEP) -> float:
    """F(u, v) = dA_chart(u, v) at ``point`` by central differences."""
    u, v = (np.atleast_2d(np.asarray(x, dtype=float)) for x in frame)
    y = _require_inside(data.cover, chart, point, (u, v), h)
    return float(_dform1(lambda p, x: data.connection(chart, p, x), y, u, v, h)[0])


def gerbe_curvature(data: GerbeData, chart: int, point, frame, h: float = DEFAULT_STEP) -> float:
    """G(a, b, c) = dF_chart(a, b, c) at ``point`` by central differences."""
    a, b, c = (np.atleast_2d(np.asarray(x, dtype=float)) for x in frame)
    y = _require_inside(data.cover, chart, point, (a, b, c), h)
    return float(_dform2(lambda p, x, z: data.curving(chart, p, x, z), y, a, b, c, h)[0])


def curvature_2form(data: BundleData, chart: Optional[int] = None, h: float = DEFAULT_STEP):
    """Vectorized F as ``(points, u, v) -> values``.

    Uses the analytic curvature when the data carries one, otherwise finite
    differences of A_chart.
    """
    if data.curvature is not None:
        return data.curvature
    if chart is None:
        raise ValueError("a chart is needed when no analytic curvature is available")
    return lambda y, u, v: _dform1(lambda p, x: data.connection(chart, p, x), y, u, v, h)


def curvature_3form(data: GerbeData, chart: Optional[int] = None, h: float = DEFAULT_STEP):
    if data.curvature is not None:
        return data.curvature
    if chart is None:
        raise ValueError("a chart is needed when no analytic curvature is available")
    return lambda y, a, b, c: _dform2(lambda p, x, z: data.curving(chart, p, x, z), y, a, b, c, h)
