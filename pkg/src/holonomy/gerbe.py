"""Surface transport of gerbes as state sums over labeled surface partitions."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .bundle import StokesReport
from .cech import ChartCover, GerbeData, curvature_3form
from .errors import ArcOutsideOverlap, CutGeometryInvalid, GeneralPositionFailure, PointOutsideChart, PointOutsideOverlap, SeamMismatch, StepTooLarge
from .numerics import DEFAULT_QUAD, QuadConfig, bilinear, integrate_cells
from .partitions.moves import cut_along, join_surfaces, line_halfedges
from .partitions.paths import LabeledLoopPartition, LabeledPathPartition
from .partitions.surface import LabeledSurfacePartition, SurfaceDomain, polygon_partition
from .partitions.volume import LabeledVolumePartition
from .phase import Phase, wrap_angle

TWO_PI = 2.0 * math.pi
GENERAL_POSITION_EPS = 1e-9
SEAM_ATOL = 1e-9


@dataclass(frozen=True)
class LoopTransition:
    """A loop a -> loop(a), a in [0, 2 pi), with two labeled partitions.

    ``T`` labels the side on the left of the loop direction (the inner side
    of an annulus), ``T2`` the right side.
    """

    loop: Callable
    T: LabeledLoopPartition
    T2: LabeledLoopPartition
    orientation: int = 1


@dataclass(frozen=True)
class SurfaceObject:
    """A map X of a partitioned parameter surface into the ambient space.

    ``X`` is one callable, or a tuple of callables indexed by the partition's
    ``face_piece`` (used after joining two objects along a seam).
    """

    X: object
    T: LabeledSurfacePartition

    def maps(self) -> tuple:
        return self.X if isinstance(self.X, tuple) else (self.X,)

    def evaluate(self, faces, params) -> np.ndarray:
        """Points X(params) where row k of ``params`` lies on face ``faces[k]``."""
        maps = self.maps()
        if len(maps) == 1:
            return maps[0](params)
        piece = np.asarray(self.T.face_piece)[np.asarray(faces)]
        out = None
        for p in np.unique(piece):
            m = piece == p
            val = maps[p](params[m])
            if out is None:
                out = np.empty((len(params), val.shape[1]))
            out[m] = val
        return out


# ---------------------------------------------------------------------------
# transitions along a curve between two labelings


class _Side:
    """Labels along a curve parametrized by [lo, hi] (periodic when closed).

    Change points may be shifted (for general position); the label on
    (original, shifted] then stays the label from before the change.
    """

    def __init__(self, breakpoints, labels, lo, hi, closed):
        self.bp = np.asarray(breakpoints, dtype=float)
        self.labels = list(labels)
        self.lo, self.hi, self.closed = lo, hi, closed
        self.shift = {}

    @classmethod
    def from_loop(cls, T: LabeledLoopPartition):
        return cls(T.angles, T.labels, 0.0, TWO_PI, True)

    @classmethod
    def from_path(cls, T: LabeledPathPartition):
        return cls(T.breakpoints[1:-1], T.labels, T.a, T.b, False)

    def around(self, t: float):
        """Labels just before and just after breakpoint t."""
        k = int(np.searchsorted(self.bp, t, side="left"))
        if self.closed:
            k %= len(self.bp)
            return self.labels[k], self.labels[(k + 1) % len(self.labels)]
        return self.labels[k], self.labels[k + 1]

    def label(self, t: float) -> int:
        for orig, moved in self.shift.items():
            if orig < t <= moved:
                return self.around(orig)[0]
        if self.closed:
            t = self.lo + (t - self.lo) % (self.hi - self.lo)
            return self.labels[int(np.searchsorted(self.bp, t, side="left")) % len(self.bp)]
        return self.labels[int(np.searchsorted(self.bp, t, side="right"))]

    def changes(self) -> list:
        return [float(t) for t in self.bp if self.around(t)[0] != self.around(t)[1]]


def _transition_sum(data: GerbeData, curve, left: _Side, right: _Side, quad: QuadConfig,
                    splits=(), check: bool = True):
    """Phase of the relabeling between ``left`` and ``right`` along ``curve``.

    Arcs between consecutive change points of either side contribute the
    integral of A2(left label, right label); a change point of the left side
    contributes arg g(before, right label, after), one of the right side
    arg g(left label, before, after).  Right-side change points that
    coincide with left-side ones are moved forward by a relative 1e-9.
    ``splits`` are extra points where arc integrals are split (kinks).
    Returns (angle, error estimate, number of moved breakpoints).
    """
    lo, hi, closed = left.lo, left.hi, left.closed
    eps = GENERAL_POSITION_EPS * (hi - lo)
    lc = left.changes()
    events = [(t, "L", t) for t in lc]
    right.shift = {}
    for t in right.changes():
        s = t
        while any(abs(s - u) < 0.5 * eps for u in lc):
            s += eps
            if s - t > 10 * eps:
                raise GeneralPositionFailure(f"could not separate breakpoints near {t}")
        if s != t:
            right.shift[t] = s
        events.append((s, "R", t))
    events.sort()
    extra = [float(x) for x in splits] + [float(x) for x in left.bp] + [float(x) for x in right.bp]
    if not closed:
        extra = [x for x in extra if lo < x < hi]
    cut_pts = sorted(set([e[0] for e in events] + extra))
    if closed:
        cut_pts = cut_pts or [lo]
        pieces = list(zip(cut_pts, cut_pts[1:] + [cut_pts[0] + (hi - lo)]))
    else:
        bounds = [lo] + [t for t in cut_pts if lo < t < hi] + [hi]
        pieces = list(zip(bounds[:-1], bounds[1:]))
    pieces = [(a, b) for a, b in pieces if b > a]
    keys = [(left.label(0.5 * (a + b)), right.label(0.5 * (a + b))) for a, b in pieces]

    if check:
        cover = data.cover
        for (a, b), (i, j) in zip(pieces, keys):
            m = cover.margins(curve(np.linspace(a, b, 9)))
            if np.any(m[:, i] <= 0) or np.any(m[:, j] <= 0):
                raise ArcOutsideOverlap(f"arc [{a:.6g}, {b:.6g}] leaves the overlap of charts {i} and {j}")

    total, err = 0.0, 0.0
    active = [k for k, (i, j) in enumerate(keys) if i != j]
    if active:
        starts = np.array([pieces[k][0] for k in active])
        spans = np.array([pieces[k][1] - pieces[k][0] for k in active])
        vals, errs = integrate_cells(lambda idx, x: curve(starts[idx] + spans[idx] * x[:, 0]),
                                     lambda key, y, v: data.connection(key[0], key[1], y, v),
                                     [keys[k] for k in active], 1, quad)
        total += float(vals.sum())
        err += float(errs.sum())
    for s, kind, t in events:
        y = curve(np.array([s]))
        if kind == "L":
            before, after = left.around(t)
            total += float(data.transition_angle(before, right.label(s), after, y)[0])
        else:
            before, after = right.around(t)
            total += float(data.transition_angle(left.label(s), before, after, y)[0])
    return total, err, len(right.shift)


def z_loop_transition(data: GerbeData, lt: LoopTransition, quad: QuadConfig = DEFAULT_QUAD) -> Phase:
    """Z'(loop, T, T'): relabeling phase between two partitions of a loop; - negates."""
    angle, err, _ = _transition_sum(data, lt.loop, _Side.from_loop(lt.T), _Side.from_loop(lt.T2), quad)
    return Phase(angle if lt.orientation >= 0 else -angle, err)


def loop_transition_details(data: GerbeData, lt: LoopTransition, quad: QuadConfig = DEFAULT_QUAD) -> dict:
    angle, err, moved = _transition_sum(data, lt.loop, _Side.from_loop(lt.T), _Side.from_loop(lt.T2), quad)
    return {"phase": Phase(angle if lt.orientation >= 0 else -angle, err), "perturbed_breakpoints": moved,
            "epsilon": GENERAL_POSITION_EPS}


# ---------------------------------------------------------------------------
# surface state sum


def vertex_triples(T: LabeledSurfacePartition) -> list:
    """(vertex, (a, b, c)) for every g3 factor of the internal vertices.

    Labels are read anticlockwise starting at the smallest; vertices with
    more than three faces are split into a fan of triples.
    """
    out = []
    for v in T.internal_vertices():
        labels = [T.labels[f] for f in T.faces_around(v)]
        if len(labels) < 3:
            continue
        k0 = int(np.argmin(labels))
        labels = labels[k0:] + labels[:k0]
        for k in range(1, len(labels) - 1):
            out.append((v, (labels[0], labels[k], labels[k + 1])))
    return out


def _vertex_points(so: SurfaceObject, vertices) -> np.ndarray:
    T = so.T
    he = T.halfedges
    faces, params = [], []
    for v in vertices:
        h = int(np.where(he["origin"] == v)[0][0])
        faces.append(int(he["face"][h]))
        params.append(he["start"][h])
    return so.evaluate(np.array(faces), np.array(params))


def surface_terms(data: GerbeData, so: SurfaceObject, quad: QuadConfig = DEFAULT_QUAD,
                  flip_edges: bool = False) -> dict:
    """The vertex, edge and face sums of the surface state sum (orientation +)."""
    T = so.T
    he = T.halfedges
    # vertices
    vt = [(v, key) for v, key in vertex_triples(T) if len(set(key)) == 3]
    vsum = 0.0
    if vt:
        pts = _vertex_points(so, [v for v, _ in vt])
        for key in sorted(set(k for _, k in vt)):
            m = np.array([k == key for _, k in vt])
            vsum += float(data.transition_angle(*key, pts[m]).sum())
    # edges: face of the half-edge on the left
    edges = [int(h) for h in T.internal_edges() if T.labels[he["face"][h]] != T.labels[he["face"][he["twin"][h]]]]
    esum, eerr = 0.0, 0.0
    if edges:
        starts, ends = he["start"][edges], he["end"][edges]
        spans = ends - starts
        efaces = he["face"][edges]
        keys = []
        for h in edges:
            a, b = T.labels[he["face"][h]], T.labels[he["face"][he["twin"][h]]]
            keys.append((b, a) if flip_edges else (a, b))
        vals, errs = integrate_cells(
            lambda idx, x: so.evaluate(efaces[idx], starts[idx] + x[:, :1] * spans[idx]),
            lambda key, y, v: data.connection(key[0], key[1], y, v), keys, 1, quad)
        esum, eerr = float(vals.sum()), float(errs.sum())
    # faces
    cells, owners = [], []
    for f, cl in enumerate(T.cells):
        for c in cl:
            cells.append(c)
            owners.append(f)
    cells, owners = np.array(cells), np.array(owners)
    labels = [T.labels[f] for f in owners]
    vals, errs = integrate_cells(
        lambda idx, x: so.evaluate(owners[idx], bilinear(cells[idx], x[:, 0], x[:, 1])),
        lambda label, y, a, b: data.curving(label, y, a, b), labels, 2, quad)
    return {"vertices": vsum, "edges": esum, "faces": float(vals.sum()),
            "error": eerr + float(errs.sum()), "n_vertex_factors": len(vt), "n_edge_factors": len(edges)}


def z_surface(data: GerbeData, so: SurfaceObject, quad: QuadConfig = DEFAULT_QUAD) -> Phase:
    """Sum over internal vertices (g3), internal edges (A2) and faces (F)."""
    t = surface_terms(data, so, quad)
    return Phase(so.T.orientation * (t["vertices"] + t["edges"] + t["faces"]), t["error"])


# ---------------------------------------------------------------------------
# gluing


def cut_partitions(so: SurfaceObject, axis: int, value: float):
    """Curve and left / right label partitions along the line {axis = value}.

    Returns (curve, left, right, closed).  When the line closes up (the other
    coordinate is periodic and the line runs all the way round) the curve is
    a loop over [0, 2 pi) and the partitions are loop partitions; otherwise
    the curve is parametrized by the other coordinate and they are path
    partitions.  Left is the side on the left of the curve direction.
    """
    T = so.T
    he = T.halfedges
    other = 1 - axis
    hs = line_halfedges(T, axis, value)
    if not hs:
        raise CutGeometryInvalid("no edges lie on the cut line")
    P = T.periods[other]
    left, right = [], []
    for h in hs:
        a, b = he["start"][h][other], he["end"][h][other]
        label = T.labels[he["face"][h]]
        (left if b > a else right).append((min(a, b), max(a, b), label, int(he["face"][h])))
    coverage = sum(b - a for a, b, _, _ in left)
    closed = bool(P) and abs(coverage - P) < 1e-9 * P
    face0 = left[0][3]
    # a point on the line, in face0's unwrapped coordinates
    base = he["start"][[h for h in hs if he["face"][h] == face0][0]].copy()

    def curve(t):
        t = np.asarray(t, dtype=float)
        w = T.origin[other] + t * P / TWO_PI if closed else t
        pts = np.repeat(base[None], len(t), axis=0)
        pts[:, other] = w
        return so.evaluate(np.full(len(t), face0), pts)

    def side(arcs):
        arcs = sorted(arcs)
        labels = [lab for _, _, lab, _ in arcs]
        if closed:
            return LabeledLoopPartition([((b - T.origin[other]) * TWO_PI / P) % TWO_PI
                                         for _, b, _, _ in arcs], labels)
        return LabeledPathPartition([arcs[0][0]] + [b for _, b, _, _ in arcs], labels)

    return curve, side(left), side(right), closed


def _side(T):
    return _Side.from_loop(T) if isinstance(T, LabeledLoopPartition) else _Side.from_path(T)


def cut_transition(data: GerbeData, so: SurfaceObject, axis: int, value: float,
                   quad: QuadConfig = DEFAULT_QUAD) -> Phase:
    """Z'(X|_C, T_L, T_R) for the coordinate line C = {axis = value} of so."""
    curve, left, right, _ = cut_partitions(so, axis, value)
    angle, err, _ = _transition_sum(data, curve, _side(left), _side(right), quad)
    return Phase(so.T.orientation * angle, err)


def glue_z_surface(data: GerbeData, so: SurfaceObject, axis: int, value: float,
                   quad: QuadConfig = DEFAULT_QUAD) -> Phase:
    """Z of ``so`` computed by cutting along {axis = value} and gluing back.

    The cut surface (a single object even when both sides of the cut belong
    to the same connected piece) is evaluated directly and multiplied by the
    relabeling phase of the two sides along the cut.
    """
    cut = SurfaceObject(so.X, cut_along(so.T, axis, value))
    return cut_transition(data, so, axis, value, quad) * z_surface(data, cut, quad)


def join_objects(so1: SurfaceObject, so2: SurfaceObject) -> SurfaceObject:
    """The surface object obtained by gluing so1 and so2 along their shared boundary."""
    J = join_surfaces(so1.T, so2.T)
    maps1, maps2 = so1.maps(), so2.maps()
    shift = max(so1.T.face_piece) + 1
    X = tuple(maps1) + tuple([None] * (shift - len(maps1))) + tuple(maps2)
    return SurfaceObject(X if len(X) > 1 else X[0], J)


def partial_glue_z_surface(data: GerbeData, so1: SurfaceObject, so2: SurfaceObject,
                           quad: QuadConfig = DEFAULT_QUAD) -> Phase:
    """Z(X1, T1) Z(X2, T2) for two objects sharing a boundary-to-boundary seam.

    Labels across the seam must be identical and the maps must agree on it.
    """
    joined = join_objects(so1, so2)
    J = joined.T
    he = J.halfedges
    n1 = so1.T.n_faces
    seam_vertices = {int(he["origin"][h]) for h in range(len(he["origin"]))
                     if he["twin"][h] >= 0 and he["face"][h] < n1 <= he["face"][he["twin"][h]]}
    for v in seam_vertices & set(J.internal_vertices()):
        if len({J.labels[f] for f in J.faces_around(v)}) > 2:
            raise SeamMismatch(f"three charts meet at seam vertex {v}; the partitions are not aligned")
    for h in range(len(he["origin"])):
        t = he["twin"][h]
        if t < 0 or not (he["face"][h] < n1 <= he["face"][t]):
            continue
        for s in (0.0, 0.5, 1.0):
            p1 = he["start"][h] + s * (he["end"][h] - he["start"][h])
            p2 = he["end"][t] + s * (he["start"][t] - he["end"][t])
            y1 = joined.evaluate(np.array([he["face"][h]]), p1[None])
            y2 = joined.evaluate(np.array([he["face"][t]]), p2[None])
            if float(np.max(np.abs(y1 - y2))) > SEAM_ATOL:
                raise SeamMismatch("the two maps disagree along the seam")
    return z_surface(data, so1, quad) * z_surface(data, so2, quad)


# ---------------------------------------------------------------------------
# 2-D Stokes lemma


def stokes_check_2d(data: GerbeData, H, V: LabeledVolumePartition, quad: QuadConfig = DEFAULT_QUAD
                    ) -> StokesReport:
    """Compare z_surface on the boundary of (H, V) with the integral of G over V."""
    boundary = z_surface(data, SurfaceObject(H, V.boundary()), quad)
    lower, span = V.lower, V.upper - V.lower
    forms = {}

    def G(label, y, a, b, c):
        if label not in forms:
            forms[label] = curvature_3form(data, label)
        return forms[label](y, a, b, c)

    vals, errs = integrate_cells(lambda idx, x: H(lower[idx] + x * span[idx]), G, list(V.labels), 3, quad)
    curv = Phase(float(vals.sum()), float(errs.sum()))
    defect = abs(wrap_angle(boundary.angle - curv.angle))
    return StokesReport(boundary, curv, defect, {"n_regions": V.n_regions})


# ---------------------------------------------------------------------------
# functors and reconstruction


@dataclass(frozen=True)
class GerbeFunctor:
    """A pair of assignments: z_loop(loop, T, T2, orientation) and z_surface(X, T)."""

    z_loop: Callable
    z_surface: Callable
    cover: Optional[ChartCover] = None
    name: str = ""


def gerbe_functor(data: GerbeData, quad: QuadConfig = DEFAULT_QUAD) -> GerbeFunctor:
    return GerbeFunctor(
        z_loop=lambda loop, T, T2, o=1: z_loop_transition(data, LoopTransition(loop, T, T2, o), quad),
        z_surface=lambda X, T: z_surface(data, SurfaceObject(X, T), quad),
        cover=data.cover, name=f"gerbe:{data.name}")


def broken_gerbe_functor(data: GerbeData, quad: QuadConfig = DEFAULT_QUAD) -> GerbeFunctor:
    """Mutant functor whose surface sum reads every internal edge with the wrong orientation."""
    def zs(X, T):
        t = surface_terms(data, SurfaceObject(X, T), quad, flip_edges=True)
        return Phase(T.orientation * (t["vertices"] + t["edges"] + t["faces"]), t["error"])

    return GerbeFunctor(
        z_loop=lambda loop, T, T2, o=1: z_loop_transition(data, LoopTransition(loop, T, T2, o), quad),
        z_surface=zs, cover=data.cover, name=f"broken:{data.name}")


def _constant_map(y):
    y = np.atleast_2d(np.asarray(y, dtype=float))
    return lambda x: np.repeat(y, len(x), axis=0)


def simplex_partition(i: int, j: int, k: int) -> LabeledSurfacePartition:
    """Standard triangle cut into three faces meeting at its centre, labeled i, j, k."""
    V = [(0, 0), (1, 0), (0, 1), (0.5, 0), (0.5, 0.5), (0, 0.5), (1 / 3, 1 / 3)]
    faces = [(0, 3, 6, 5), (1, 4, 6, 3), (2, 5, 6, 4)]
    cells = [[np.array(V)[list(f)]] for f in faces]
    return polygon_partition(V, faces, [i, j, k], cells=cells)


def strip_partition(j: int, k: int) -> LabeledSurfacePartition:
    """[0,1] x [0,1] split at u = 1/2: j on the left half, k on the right."""
    V = [(0, 0), (0.5, 0), (0.5, 1), (0, 1), (1, 0), (1, 1)]
    faces = [(0, 1, 2, 3), (1, 4, 5, 2)]
    cells = [[np.array(V)[list(f)]] for f in faces]
    return polygon_partition(V, faces, [j, k], cells=cells)


def square_partition(j: int) -> LabeledSurfacePartition:
    V = [(0, 0), (1, 0), (1, 1), (0, 1)]
    return polygon_partition(V, [(0, 1, 2, 3)], [j], cells=[[np.array(V)]])


def reconstruct_g3(Z: GerbeFunctor, y, i: int, j: int, k: int) -> Phase:
    """g_ijk(y) as Z of the constant map on the three-face simplex partition."""
    return Z.z_surface(_constant_map(y), simplex_partition(i, j, k))


def _check_point(cover: ChartCover, charts, y, ends):
    m = cover.margins(y)[0]
    if any(m[c] <= 0 for c in charts):
        if len(charts) == 1:
            raise PointOutsideChart(f"point is not in chart {charts[0]}")
        raise PointOutsideOverlap(f"point is not in the overlap of charts {tuple(charts)}")
    me = cover.margins(ends)
    if np.any(me[:, list(charts)] <= 0):
        raise StepTooLarge("finite-difference step leaves the chart")


def reconstruct_A2(Z: GerbeFunctor, j: int, k: int, y, v, h: float = 1e-4) -> float:
    """A_jk(v) at y from the u-independent strip Q_t(u, s) = proj(y + t s v)."""
    cover = Z.cover
    y, v = np.atleast_2d(y).astype(float), np.atleast_2d(v).astype(float)
    _check_point(cover, sorted({j, k}), y, cover.projection(np.vstack([y + h * v, y - h * v])))
    T = strip_partition(j, k)

    def Q(t):
        return lambda x: cover.projection(y + (t * x[:, 1])[:, None] * v)

    return (Z.z_surface(Q(h), T).angle - Z.z_surface(Q(-h), T).angle) / (2.0 * h)


def reconstruct_F(Z: GerbeFunctor, j: int, y, v, w, h: float = 1e-4) -> float:
    """F_j(v, w) at y as the mixed difference of Z on Q_{t,u}(r, s) = proj(y + r t v + s u w)."""
    cover = Z.cover
    y = np.atleast_2d(y).astype(float)
    v, w = np.atleast_2d(v).astype(float), np.atleast_2d(w).astype(float)
    corners = np.vstack([y + a * h * v + b * h * w for a in (-1, 1) for b in (-1, 1)])
    _check_point(cover, [j], y, cover.projection(corners))
    T = square_partition(j)

    def Zq(t, u):
        X = lambda x: cover.projection(y + (t * x[:, 0])[:, None] * v + (u * x[:, 1])[:, None] * w)
        return Z.z_surface(X, T).angle

    return (Zq(h, h) - Zq(h, -h) - Zq(-h, h) + Zq(-h, -h)) / (4.0 * h * h)


def reconstruct_gerbe(Z: GerbeFunctor, h: float = 1e-4, name: str = "reconstructed") -> GerbeData:
    """Gerbe data (g3, A2, F) read back from a surface transport functor, pointwise."""
    def g3(i, j, k, pts):
        return np.exp(1j * np.array([reconstruct_g3(Z, y, i, j, k).angle for y in pts]))

    def A2(j, k, pts, vecs):
        if j == k:
            return np.zeros(len(pts))
        return np.array([reconstruct_A2(Z, j, k, y, v, h) for y, v in zip(pts, vecs)])

    def F(k, pts, a, b):
        return np.array([reconstruct_F(Z, k, y, u, w, h) for y, u, w in zip(pts, a, b)])

    return GerbeData(Z.cover, g3, A2, F, name=name)


# ---------------------------------------------------------------------------
# boundary relabeling and annuli


def _unwrap_near(p, ref, T: LabeledSurfacePartition):
    d = np.asarray(p, dtype=float) - ref
    for a, P in enumerate(T.periods):
        if P:
            d[a] -= P * np.round(d[a] / P)
    return ref + d


def boundary_loops(so: SurfaceObject, T2: LabeledSurfacePartition) -> list:
    """(curve, left, right) loop data for each boundary cycle of so.T.

    Each cycle is parametrized over [0, 2 pi) with vertex k at 2 pi k / n,
    following the induced orientation (interior on the left).  ``left``
    carries the labels of so.T and ``right`` those of T2 along the cycle.
    """
    T = so.T
    he, he2 = T.halfedges, T2.halfedges
    out = []
    for cycle in T.boundary_cycles():
        n = len(cycle)
        step = TWO_PI / n
        faces = np.array([he["face"][h] for h in cycle])
        starts = np.array([he["start"][h] for h in cycle])
        disps = np.array([he["end"][h] - he["start"][h] for h in cycle])

        def locate(p, starts=starts, disps=disps):
            best = None
            for k in range(len(starts)):
                q = _unwrap_near(p, starts[k], T)
                lam = float(np.dot(q - starts[k], disps[k]) / np.dot(disps[k], disps[k]))
                lam = min(max(lam, 0.0), 1.0)
                res = float(np.linalg.norm(starts[k] + lam * disps[k] - q))
                if best is None or res < best[0]:
                    best = (res, k, lam)
            return best

        ends, labels2 = [], []
        for h in T2.boundary_halfedges():
            if locate(0.5 * (he2["start"][h] + he2["end"][h]))[0] > 1e-7:
                continue
            _, k, lam = locate(he2["end"][h])
            ends.append(((k + lam) * step) % TWO_PI)
            labels2.append(T2.labels[he2["face"][h]])
        if not ends:
            raise SeamMismatch("the two partitions do not share a boundary cycle")

        def curve(t, faces=faces, starts=starts, disps=disps, n=n, step=step):
            t = np.mod(np.asarray(t, dtype=float), TWO_PI)
            k = np.minimum((t // step).astype(int), n - 1)
            lam = (t - k * step) / step
            return so.evaluate(faces[k], starts[k] + lam[:, None] * disps[k])

        left = LabeledLoopPartition([((k + 1) * step) % TWO_PI for k in range(n)],
                                    [T.labels[f] for f in faces])
        out.append((curve, left, LabeledLoopPartition(ends, labels2)))
    return out


def boundary_transition(data: GerbeData, so: SurfaceObject, T2: LabeledSurfacePartition,
                        quad: QuadConfig = DEFAULT_QUAD) -> Phase:
    """Product over boundary cycles of the relabeling phase from so.T to T2.

    Each cycle carries the induced orientation (interior on the left); the
    labels of so.T sit on the left side and those of T2 on the right.
    """
    total = Phase()
    for curve, left, right in boundary_loops(so, T2):
        total = total * z_loop_transition(data, LoopTransition(curve, left, right, so.T.orientation), quad)
    return total


def annulus_partition(T_inner: LabeledLoopPartition, T_outer: LabeledLoopPartition,
                      u_range=(0.0, 1.0)) -> LabeledSurfacePartition:
    """Partition of [u0, u1] x S^1 labeled by T_inner below the middle circle and T_outer above.

    Breakpoints of both loop partitions become vertices on the middle circle,
    so the labels along that circle change exactly where the loop labels do.
    """
    u0, u1 = u_range
    um = 0.5 * (u0 + u1)
    a_in = list(T_inner.angles)
    a_out = list(T_outer.angles)
    middle = []
    for a in sorted(a_in + a_out):
        if not middle or a - middle[-1] > 1e-12:
            middle.append(a)
    verts = [(u0, a) for a in a_in] + [(um, a) for a in middle] + [(u1, a) for a in a_out]
    vid_in = {a: k for k, a in enumerate(a_in)}
    vid_mid = {a: len(a_in) + k for k, a in enumerate(middle)}
    vid_out = {a: len(a_in) + len(middle) + k for k, a in enumerate(a_out)}
    faces, segs, cells, labels = [], [], [], []

    def arcs(angles):
        n = len(angles)
        return [(angles[k - 1] - (TWO_PI if k == 0 else 0.0), angles[k], k) for k in range(n)]

    def mids_between(a, b):
        out = []
        for m in middle:
            for w in (m - TWO_PI, m, m + TWO_PI):
                if a + 1e-12 < w < b - 1e-12:
                    out.append(w)
        return sorted(out)

    def mid_id(w):
        d = [abs((w - m + math.pi) % TWO_PI - math.pi) for m in middle]
        return vid_mid[middle[int(np.argmin(d))]]
    for a, b, k in arcs(a_in):
        if len(a_in) == 1:
            a, b = a_in[0] - TWO_PI, a_in[0]
        pts = [(u0, a), (um, a)] + [(um, w) for w in mids_between(a, b)] + [(um, b), (u0, b)]
        ids = [vid_in[a_in[k - 1] if len(a_in) > 1 else a_in[0]], mid_id(a)] + \
              [mid_id(w) for w in mids_between(a, b)] + [mid_id(b), vid_in[a_in[k]]]
        faces.append(ids)
        P = np.array(pts)
        segs.append(np.stack([P, np.roll(P, -1, axis=0)], axis=1))
        cells.append([[(u0, a), (um, a), (um, b), (u0, b)]])
        labels.append(T_inner.labels[k])
    for a, b, k in arcs(a_out):
        if len(a_out) == 1:
            a, b = a_out[0] - TWO_PI, a_out[0]
        ws = mids_between(a, b)
        pts = [(um, a), (u1, a), (u1, b), (um, b)] + [(um, w) for w in reversed(ws)]
        ids = [mid_id(a), vid_out[a_out[k - 1] if len(a_out) > 1 else a_out[0]],
               vid_out[a_out[k]], mid_id(b)] + [mid_id(w) for w in reversed(ws)]
        faces.append(ids)
        P = np.array(pts)
        segs.append(np.stack([P, np.roll(P, -1, axis=0)], axis=1))
        cells.append([[(um, a), (u1, a), (u1, b), (um, b)]])
        labels.append(T_outer.labels[k])
    return LabeledSurfacePartition(np.array(verts), faces, segs, cells, labels,
                                   periods=(0.0, TWO_PI), origin=(u0, 0.0),
                                   domain=SurfaceDomain("cylinder", tuple(u_range), (0.0, TWO_PI)))


def thin_annulus(loop) -> Callable:
    """The map (u, v) -> loop(v), constant across the annulus."""
    return lambda x: loop(np.asarray(x)[:, 1])
