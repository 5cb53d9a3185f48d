"""Labeled polygonal partitions of surfaces with a derived half-edge structure.

A partition is stored as a polygon soup in parameter coordinates: vertex
positions (canonical, i.e. reduced mod any periods), face vertex cycles in
anticlockwise order, the unwrapped edge segments of each face, and a list of
bilinear cells per face used for integration.  Half-edge connectivity is
derived by matching each directed edge with its reverse.
"""

from __future__ import annotations

import math
from collections import defaultdict
from dataclasses import dataclass, field

import numpy as np

from ..errors import InvalidPartition

TWO_PI = 2.0 * math.pi


@dataclass(frozen=True)
class SurfaceDomain:
    """Parameter domain of a surface map.

    ``kind`` is one of rectangle, cylinder, torus, disk, sphere, polygon.
    u runs across, v around; v is periodic on cylinder, disk and sphere,
    both are periodic on the torus.  Disks carry a cap at u = u_min and
    spheres at both ends of the u range.
    """

    kind: str = "rectangle"
    u_range: tuple = (0.0, 1.0)
    v_range: tuple = (0.0, TWO_PI)

    KINDS = ("rectangle", "cylinder", "torus", "disk", "sphere", "polygon")

    def __post_init__(self):
        if self.kind not in self.KINDS:
            raise ValueError(f"unknown domain kind {self.kind!r}")

    @property
    def periods(self) -> tuple:
        du = self.u_range[1] - self.u_range[0]
        dv = self.v_range[1] - self.v_range[0]
        if self.kind == "torus":
            return (du, dv)
        if self.kind in ("cylinder", "disk", "sphere"):
            return (0.0, dv)
        return (0.0, 0.0)

    def to_dict(self) -> dict:
        return {"kind": self.kind, "u_range": list(self.u_range), "v_range": list(self.v_range)}


def _reduce(x: np.ndarray, periods, origin) -> np.ndarray:
    x = np.array(x, dtype=float)
    for a, P in enumerate(periods):
        if P:
            x[..., a] = origin[a] + np.mod(x[..., a] - origin[a], P)
            # a point a hair below the top of the period belongs at the start
            x[..., a] = np.where(np.abs(x[..., a] - origin[a] - P) < 1e-9 * max(P, 1.0),
                                 origin[a], x[..., a])
    return x


@dataclass(frozen=True, eq=False)
class LabeledSurfacePartition:
    """Polygonal partition of a surface domain, each face labeled by a chart."""

    vertices: np.ndarray
    faces: tuple
    segments: tuple
    cells: tuple
    labels: tuple
    orientation: int = 1
    periods: tuple = ()
    origin: tuple = ()
    domain: SurfaceDomain = None
    face_piece: tuple = None
    _he: dict = field(default=None, repr=False)

    def __post_init__(self):
        V = np.atleast_2d(np.asarray(self.vertices, dtype=float))
        k = V.shape[1]
        set_ = lambda name, val: object.__setattr__(self, name, val)
        set_("vertices", V)
        set_("faces", tuple(tuple(int(v) for v in f) for f in self.faces))
        set_("labels", tuple(int(i) for i in self.labels))
        set_("segments", tuple(np.asarray(s, dtype=float).reshape(-1, 2, k) for s in self.segments))
        set_("cells", tuple(np.asarray(c, dtype=float).reshape(-1, 4, k) for c in self.cells))
        set_("periods", tuple(float(p) for p in self.periods) if self.periods else (0.0,) * k)
        set_("origin", tuple(float(p) for p in self.origin) if self.origin else (0.0,) * k)
        if self.face_piece is None:
            set_("face_piece", (0,) * len(self.faces))
        if self.orientation not in (1, -1):
            raise InvalidPartition("orientation must be +1 or -1")
        nf = len(self.faces)
        if not (len(self.labels) == len(self.segments) == len(self.cells) == len(self.face_piece) == nf):
            raise InvalidPartition("faces, labels, segments, cells must have equal length")
        for f, (cyc, seg) in enumerate(zip(self.faces, self.segments)):
            if len(cyc) < 2 or len(seg) != len(cyc):
                raise InvalidPartition(f"face {f} needs one segment per boundary vertex")
        set_("_he", self._build_halfedges())

    # half-edge structure -------------------------------------------------

    def _build_halfedges(self) -> dict:
        origin, dest, face, pos, start, end = [], [], [], [], [], []
        first = []
        for f, (cyc, seg) in enumerate(zip(self.faces, self.segments)):
            first.append(len(origin))
            n = len(cyc)
            for q in range(n):
                origin.append(cyc[q])
                dest.append(cyc[(q + 1) % n])
                face.append(f)
                pos.append(q)
                start.append(seg[q, 0])
                end.append(seg[q, 1])
        nh = len(origin)
        start = np.array(start).reshape(nh, -1)
        end = np.array(end).reshape(nh, -1)
        nxt = np.empty(nh, dtype=int)
        prv = np.empty(nh, dtype=int)
        for f, cyc in enumerate(self.faces):
            n = len(cyc)
            for q in range(n):
                h = first[f] + q
                nxt[h] = first[f] + (q + 1) % n
                prv[h] = first[f] + (q - 1) % n
        keyed = {}
        disp = np.round(end - start, 8) + 0.0
        for h in range(nh):
            key = (origin[h], dest[h], tuple(disp[h]))
            if key in keyed:
                raise InvalidPartition(f"edge {key[:2]} is used twice in the same direction")
            keyed[key] = h
        twin = np.full(nh, -1, dtype=int)
        for h in range(nh):
            rev = (dest[h], origin[h], tuple(np.round(-(end[h] - start[h]), 8) + 0.0))
            twin[h] = keyed.get(rev, -1)
        return {"origin": np.array(origin, dtype=int), "dest": np.array(dest, dtype=int),
                "face": np.array(face, dtype=int), "pos": np.array(pos, dtype=int),
                "start": start, "end": end, "next": nxt, "prev": prv, "twin": twin,
                "first": np.array(first, dtype=int)}

    @property
    def halfedges(self) -> dict:
        return self._he

    @property
    def n_faces(self) -> int:
        return len(self.faces)

    @property
    def dim(self) -> int:
        return self.vertices.shape[1]

    def used_vertices(self) -> np.ndarray:
        return np.unique(self._he["origin"])

    def boundary_halfedges(self) -> np.ndarray:
        return np.where(self._he["twin"] < 0)[0]

    def internal_edges(self) -> np.ndarray:
        """One half-edge per internal edge (the one with the smaller index)."""
        tw = self._he["twin"]
        return np.where(tw > np.arange(len(tw)))[0]

    def boundary_vertices(self) -> set:
        he = self._he
        b = self.boundary_halfedges()
        return set(he["origin"][b].tolist()) | set(he["dest"][b].tolist())

    def internal_vertices(self) -> list:
        bv = self.boundary_vertices()
        return [int(v) for v in self.used_vertices() if int(v) not in bv]

    def is_closed(self) -> bool:
        return len(self.boundary_halfedges()) == 0

    def outgoing(self, v: int) -> np.ndarray:
        return np.where(self._he["origin"] == v)[0]

    def ring(self, v: int) -> list:
        """Half-edges leaving internal vertex v, in anticlockwise order."""
        he = self._he
        out = self.outgoing(v)
        h0 = int(out[0])
        ring = [h0]
        h = h0
        for _ in range(len(out) + 1):
            t = he["twin"][he["prev"][h]]
            if t < 0:
                raise InvalidPartition(f"vertex {v} is on the boundary")
            h = int(t)
            if h == h0:
                break
            ring.append(h)
        else:
            raise InvalidPartition(f"half-edge ring around vertex {v} does not close")
        if len(ring) != len(out):
            raise InvalidPartition(f"vertex {v} is not a manifold vertex")
        return ring

    def faces_around(self, v: int) -> list:
        """Faces incident to internal vertex v, anticlockwise, repeats collapsed."""
        fs = [int(self._he["face"][h]) for h in self.ring(v)]
        out = []
        for f in fs:
            if not out or out[-1] != f:
                out.append(f)
        while len(out) > 1 and out[0] == out[-1]:
            out.pop()
        return out

    def vertex_valence(self, v: int) -> int:
        return len(self.faces_around(v))

    def max_valence(self) -> int:
        return max((self.vertex_valence(v) for v in self.internal_vertices()), default=0)

    def boundary_cycles(self) -> list:
        """Boundary half-edges chained into closed cycles (induced orientation)."""
        he = self._he
        b = [int(h) for h in self.boundary_halfedges()]
        by_origin = defaultdict(list)
        for h in b:
            by_origin[int(he["origin"][h])].append(h)
        seen, cycles = set(), []
        for h0 in b:
            if h0 in seen:
                continue
            cyc, h = [], h0
            while h not in seen:
                seen.add(h)
                cyc.append(h)
                nxts = [c for c in by_origin[int(he["dest"][h])] if c not in seen]
                if not nxts:
                    break
                h = nxts[0]
            cycles.append(cyc)
        return cycles

    def euler_characteristic(self) -> int:
        nv = len(self.used_vertices())
        ne = len(self.internal_edges()) + len(self.boundary_halfedges())
        return nv - ne + self.n_faces

    # derived partitions -------------------------------------------------

    def replace(self, **kw) -> "LabeledSurfacePartition":
        args = dict(vertices=self.vertices, faces=self.faces, segments=self.segments,
                    cells=self.cells, labels=self.labels, orientation=self.orientation,
                    periods=self.periods, origin=self.origin, domain=self.domain,
                    face_piece=self.face_piece)
        args.update(kw)
        return LabeledSurfacePartition(**args)

    def with_labels(self, labels) -> "LabeledSurfacePartition":
        if callable(labels):
            labels = [labels(f) for f in range(self.n_faces)]
        elif np.ndim(labels) == 0:
            labels = [int(labels)] * self.n_faces
        return self.replace(labels=tuple(labels))

    def reoriented(self) -> "LabeledSurfacePartition":
        return self.replace(orientation=-self.orientation)

    def face_centroid(self, f: int) -> np.ndarray:
        c = self.cells[f]
        return c.reshape(-1, self.dim).mean(axis=0)

    def face_centroids(self) -> np.ndarray:
        return np.array([self.face_centroid(f) for f in range(self.n_faces)])

    def to_dict(self) -> dict:
        return {"n_faces": self.n_faces, "n_vertices": int(len(self.used_vertices())),
                "labels": list(self.labels), "orientation": self.orientation,
                "domain": self.domain.to_dict() if self.domain else None,
                "max_valence": self.max_valence()}


def polygon_partition(vertices, faces, labels, orientation: int = 1, cells=None,
                      domain: SurfaceDomain = None) -> LabeledSurfacePartition:
    """Partition of a planar (non-periodic) region from explicit polygons.

    Faces must be convex when ``cells`` is omitted: each face is split into
    triangles fanned from its first vertex, stored as collapsed quads.
    """
    V = np.asarray(vertices, dtype=float)
    segs, cls = [], []
    for f, cyc in enumerate(faces):
        P = V[list(cyc)]
        segs.append(np.stack([P, np.roll(P, -1, axis=0)], axis=1))
        if cells is None:
            tri = [np.stack([P[0], P[q], P[q + 1], P[q + 1]]) for q in range(1, len(cyc) - 1)]
            cls.append(np.array(tri))
        else:
            cls.append(np.asarray(cells[f], dtype=float))
    return LabeledSurfacePartition(V, faces, segs, cls, labels, orientation=orientation,
                                   domain=domain or SurfaceDomain("polygon"))
