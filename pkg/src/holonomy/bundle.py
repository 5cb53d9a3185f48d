"""Parallel transport of U(1) bundles as state sums over labeled path partitions."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .cech import BundleData, ChartCover, curvature_2form
from .errors import EndpointMismatch, PointOutsideChart, PointOutsideOverlap, StepTooLarge
from .numerics import DEFAULT_QUAD, QuadConfig, bilinear, integrate_cells
from .partitions.paths import (LabeledLoopPartition, LabeledPathPartition, constant_partition,
                               require_valid_path, split_partition)
from .phase import Phase, wrap_angle

GLUE_ATOL = 1e-9


def _point(y) -> np.ndarray:
    return np.atleast_2d(np.asarray(y, dtype=float))


def z_point_from_bundle(data: BundleData, y, orientation: int, i: int, j: int) -> Phase:
    """Z'(y+, i, j) = arg g_ij(y); the - orientation conjugates."""
    y = _point(y)
    if i == j:
        return Phase(0.0)
    m = data.cover.margins(y)[0]
    if m[i] <= 0 or m[j] <= 0:
        raise PointOutsideOverlap(f"point is not in the overlap of charts {i} and {j}")
    angle = float(data.transition_angle(i, j, y)[0])
    return Phase(angle if orientation >= 0 else -angle)


def segment_integrals(data: BundleData, p, starts, ends, labels, quad: QuadConfig = DEFAULT_QUAD):
    """Integrals of p^*A_label over [start, end] for a batch of segments."""
    starts = np.asarray(starts, dtype=float)
    span = np.asarray(ends, dtype=float) - starts

    def map_fn(idx, x):
        return p(starts[idx] + span[idx] * x[:, 0])

    def form(label, y, v):
        return data.connection(label, y, v)

    return integrate_cells(map_fn, form, list(labels), 1, quad)


def z_path_from_bundle(data: BundleData, p, T: LabeledPathPartition, quad: QuadConfig = DEFAULT_QUAD,
                       check: bool = True) -> Phase:
    """Sum of segment integrals of A and transition angles at interior breakpoints."""
    if check:
        require_valid_path(p, T, data.cover)
    seg = T.segments()
    vals, errs = segment_integrals(data, p, [s[0] for s in seg], [s[1] for s in seg], T.labels, quad)
    total = float(vals.sum())
    for x, i, j in zip(T.breakpoints[1:-1], T.labels[:-1], T.labels[1:]):
        if i != j:
            total += float(data.transition_angle(i, j, p(np.array([x])))[0])
    return Phase(total, float(errs.sum()))


def z_loop_from_bundle(data: BundleData, loop, T: LabeledLoopPartition, quad: QuadConfig = DEFAULT_QUAD
                       ) -> Phase:
    """Holonomy around a closed loop a -> loop(a), a in [0, 2 pi)."""
    arcs = T.arcs()
    vals, errs = segment_integrals(data, loop, [a[0] for a in arcs], [a[1] for a in arcs], T.labels, quad)
    total = float(vals.sum())
    n = len(arcs)
    for k in range(n):
        i, j = T.labels[k], T.labels[(k + 1) % n]
        if i != j:
            total += float(data.transition_angle(i, j, loop(np.array([T.angles[k]])))[0])
    return Phase(total, float(errs.sum()))


@dataclass(frozen=True)
class TransportFunctor:
    """A pair of assignments: z_point(y, orientation, i, j) and z_path(p, T).

    ``cover`` supplies the projection used by reconstruction.
    """

    z_point: Callable
    z_path: Callable
    cover: Optional[ChartCover] = None
    name: str = ""


def bundle_functor(data: BundleData, quad: QuadConfig = DEFAULT_QUAD) -> TransportFunctor:
    return TransportFunctor(
        z_point=lambda y, o, i, j: z_point_from_bundle(data, y, o, i, j),
        z_path=lambda p, T: z_path_from_bundle(data, p, T, quad),
        cover=data.cover,
        name=f"bundle:{data.name}",
    )


def broken_bundle_functor(data: BundleData, quad: QuadConfig = DEFAULT_QUAD) -> TransportFunctor:
    """Mutant functor that drops the first nontrivial transition factor of every path."""

    def z_path(p, T):
        full = z_path_from_bundle(data, p, T, quad)
        for x, i, j in zip(T.breakpoints[1:-1], T.labels[:-1], T.labels[1:]):
            if i != j:
                return Phase(full.angle - float(data.transition_angle(i, j, p(np.array([x])))[0]), full.error)
        return full

    return TransportFunctor(lambda y, o, i, j: z_point_from_bundle(data, y, o, i, j), z_path,
                            data.cover, f"broken:{data.name}")


def glue_z_path(data: BundleData, p, T: LabeledPathPartition, p2, T2: LabeledPathPartition,
                quad: QuadConfig = DEFAULT_QUAD) -> Phase:
    """Z(p, T) Z'(p(b)+, i_N, i'_1) Z(p', T') for p on [a, b] and p' on [b, c]."""
    yb = p(np.array([T.b]))
    yb2 = p2(np.array([T2.a]))
    if float(np.max(np.abs(yb - yb2))) > GLUE_ATOL:
        raise EndpointMismatch(f"paths do not meet: |p(b) - p'(b)| = {float(np.max(np.abs(yb - yb2))):.3e}")
    return z_path_from_bundle(data, p, T, quad) * z_point_from_bundle(data, yb, +1, T.labels[-1], T2.labels[0]) \
        * z_path_from_bundle(data, p2, T2, quad)


def concatenate_paths(p, b: float, p2):
    """p on [a, b] followed by p2 on [b, c]."""
    def q(t):
        t = np.asarray(t, dtype=float)
        return np.where((t <= b)[:, None], p(np.minimum(t, b)), p2(np.maximum(t, b)))
    return q


# ---------------------------------------------------------------------------
# 1-D Stokes lemma


@dataclass
class StokesReport:
    boundary_phase: Phase
    curvature_phase: Phase
    defect: float
    details: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {"boundary_phase": self.boundary_phase.to_dict(), "curvature_phase": self.curvature_phase.to_dict(),
                "defect": self.defect, **self.details}


def _edge_map(X, starts, span):
    def map_fn(idx, x):
        return X(starts[idx] + x[:, :1] * span[idx])
    return map_fn


def boundary_phase_bundle(data: BundleData, X, T, quad: QuadConfig = DEFAULT_QUAD) -> Phase:
    """Bundle state sum along the induced boundary of a labeled surface partition."""
    he = T.halfedges
    cycles = T.boundary_cycles()
    hs = [h for c in cycles for h in c]
    if not hs:
        return Phase(0.0)
    starts, ends = he["start"][hs], he["end"][hs]
    labels = [T.labels[he["face"][h]] for h in hs]
    vals, errs = integrate_cells(_edge_map(X, starts, ends - starts),
                                 lambda label, y, v: data.connection(label, y, v), labels, 1, quad)
    total = float(vals.sum())
    for cyc in cycles:
        n = len(cyc)
        for k in range(n):
            h, h2 = cyc[k], cyc[(k + 1) % n]
            i, j = T.labels[he["face"][h]], T.labels[he["face"][h2]]
            if i != j:
                total += float(data.transition_angle(i, j, X(he["end"][h][None]))[0])
    return Phase(T.orientation * total, float(errs.sum()))


def face_integrals(form_by_label, X, T, quad: QuadConfig = DEFAULT_QUAD):
    """Integrals of X^*form_label over every face of T (sum over its cells)."""
    cells, owners, labels = [], [], []
    for f, cl in enumerate(T.cells):
        for c in cl:
            cells.append(c)
            owners.append(f)
            labels.append(T.labels[f])
    cells = np.array(cells)

    def map_fn(idx, x):
        return X(bilinear(cells[idx], x[:, 0], x[:, 1]))

    vals, errs = integrate_cells(map_fn, form_by_label, labels, 2, quad)
    out = np.zeros(T.n_faces)
    err = np.zeros(T.n_faces)
    np.add.at(out, owners, vals)
    np.add.at(err, owners, errs)
    return out, err


def stokes_check_1d(data: BundleData, X, T, quad: QuadConfig = DEFAULT_QUAD) -> StokesReport:
    """Compare the boundary state sum of (X, T) with the curvature integral over it."""
    bnd = boundary_phase_bundle(data, X, T, quad)
    forms = {}

    def F(label, y, a, b):
        if label not in forms:
            forms[label] = curvature_2form(data, label)
        return forms[label](y, a, b)

    vals, errs = face_integrals(F, X, T, quad)
    curv = Phase(T.orientation * float(vals.sum()), float(errs.sum()))
    defect = abs(wrap_angle(bnd.angle - curv.angle))
    return StokesReport(bnd, curv, defect, {"n_faces": T.n_faces,
                                            "n_boundary_cycles": len(T.boundary_cycles())})


# ---------------------------------------------------------------------------
# reconstruction


def reconstruct_g(Z: TransportFunctor, y, i: int, j: int) -> Phase:
    """g_ij(y) as Z of the constant path on [0, 1] labeled i then j."""
    y = _point(y)
    return Z.z_path(lambda t: np.repeat(y, len(np.atleast_1d(t)), axis=0), split_partition(i, j))


def _short_path(cover: ChartCover, y, v, t):
    y, v = _point(y), _point(v)
    return lambda s: cover.projection(y + (t * np.asarray(s, dtype=float))[:, None] * v)


def reconstruct_A(Z: TransportFunctor, j: int, y, v, h: float = 1e-4) -> float:
    """A_j(v) at y as the central difference in t of Z(q_t, j), q_t a short projected path."""
    cover = Z.cover
    y, v = _point(y), _point(v)
    chart = cover.charts[j]
    if float(chart.margin(y)[0]) <= 0:
        raise PointOutsideChart(f"point is not in chart {j}")
    ends = cover.projection(np.vstack([y + h * v, y - h * v]))
    if np.any(chart.margin(ends) <= 0):
        raise StepTooLarge(f"step {h} leaves chart {j}")
    T = constant_partition(0.0, 1.0, j)
    plus = Z.z_path(_short_path(cover, y, v, h), T).angle
    minus = Z.z_path(_short_path(cover, y, v, -h), T).angle
    return (plus - minus) / (2.0 * h)


def reconstruct_bundle(Z: TransportFunctor, h: float = 1e-4, name: str = "reconstructed") -> BundleData:
    """Bundle data (g, A) read back from a transport functor, pointwise."""
    def g(i, j, pts):
        return np.exp(1j * np.array([reconstruct_g(Z, y, i, j).angle for y in pts]))

    def A(j, pts, vecs):
        return np.array([reconstruct_A(Z, j, y, v, h) for y, v in zip(pts, vecs)])

    return BundleData(Z.cover, g, A, name=name)
