"""Brick-wall partitions with at most three regions meeting at any vertex.

Faces are built on an integer lattice so that hanging vertices (a corner of
one brick lying inside the side of its neighbour) can be matched exactly.
"""

from __future__ import annotations

import math
from collections import defaultdict

import numpy as np

from ..errors import InvalidPartition, NoCoveringChart, ResolutionTooCoarse
from .surface import LabeledSurfacePartition, SurfaceDomain

TWO_PI = 2.0 * math.pi


def _canon(p, periods):
    return tuple(int(x % P) if P else int(x) for x, P in zip(p, periods))


def conforming_polygons(polys, periods):
    """Insert hanging vertices into axis-aligned integer polygons.

    ``polys`` is a list of integer corner cycles (each side parallel to a
    lattice axis).  ``periods`` gives the integer period of each axis (0 if
    the axis is not periodic).  Returns canonical vertex coordinates, vertex
    cycles, and unwrapped integer segments per face.
    """
    k = len(periods)
    vid = {}
    for poly in polys:
        for c in poly:
            key = _canon(c, periods)
            if key not in vid:
                vid[key] = len(vid)
    lines = defaultdict(list)
    for key in vid:
        for a in range(k):
            lines[(a, key[:a] + key[a + 1:])].append(key[a])
    lines = {key: np.array(sorted(vals)) for key, vals in lines.items()}

    faces, segments = [], []
    for poly in polys:
        poly = [np.array(c, dtype=np.int64) for c in poly]
        pts = []
        n = len(poly)
        for q in range(n):
            c0, c1 = poly[q], poly[(q + 1) % n]
            diff = np.nonzero(c1 != c0)[0]
            if len(diff) != 1:
                raise InvalidPartition(f"polygon side {c0}->{c1} is not axis aligned")
            a = int(diff[0])
            lo, hi = sorted((int(c0[a]), int(c1[a])))
            other = _canon(np.delete(c0, a), periods[:a] + periods[a + 1:])
            vals = lines.get((a, other), np.array([], dtype=np.int64))
            P = periods[a]
            inner = []
            for x in vals:
                if P:
                    m0 = (lo - x) // P
                    for m in range(m0, m0 + (hi - lo) // P + 2):
                        y = x + m * P
                        if lo < y < hi:
                            inner.append(y)
                elif lo < x < hi:
                    inner.append(int(x))
            inner = sorted(set(inner), reverse=bool(c1[a] < c0[a]))
            pts.append(c0)
            for y in inner:
                c = c0.copy()
                c[a] = y
                pts.append(c)
        cyc = [vid[_canon(c, periods)] for c in pts]
        seg = np.array([[pts[q], pts[(q + 1) % len(pts)]] for q in range(len(pts))], dtype=float)
        faces.append(cyc)
        segments.append(seg)
    canon = np.zeros((len(vid), k))
    for key, i in vid.items():
        canon[i] = key
    return canon, faces, segments


def _rect_cycle(u0, u1, v0, v1):
    return [(u0, v0), (u1, v0), (u1, v1), (u0, v1)]


def brick_wall_2d(domain: SurfaceDomain, nu: int, nv: int, stagger: bool = True) -> LabeledSurfacePartition:
    """Brick-wall partition of a 2D parameter domain, labels all zero.

    ``nu`` rows of bricks stack along u; each row holds ``nv`` bricks along v,
    alternate rows shifted by half a brick.  On a torus ``nu`` is rounded up
    to an even number so the shift pattern closes.  Disks get one cap face at
    the u_min end and spheres one at each end, each a full-width row.
    With ``stagger=False`` the rows are aligned into a plain grid, whose
    vertices have four faces but whose v = const lines run straight through.
    """
    if nu < 1 or nv < 1:
        raise ValueError("resolution must be positive")
    kind = domain.kind
    if kind == "torus" and nu % 2:
        nu += 1
    v_periodic = kind in ("cylinder", "torus", "disk", "sphere")
    if v_periodic and nv < 2:
        nv = 2
    if kind == "torus" and nu < 2:
        nu = 2
    caps_lo = kind in ("disk", "sphere")
    caps_hi = kind == "sphere"
    n_rows_total = nu + caps_lo + caps_hi
    u_lo, u_hi = domain.u_range
    v_lo, v_hi = domain.v_range
    du = (u_hi - u_lo) / n_rows_total
    dv = (v_hi - v_lo) / (2 * nv)
    periods = (n_rows_total if kind == "torus" else 0, 2 * nv if v_periodic else 0)

    rows = range(int(caps_lo), int(caps_lo) + nu)
    polys = []
    for r in rows:
        off = (r - int(caps_lo)) % 2 if stagger else 0
        if v_periodic:
            for j in range(nv):
                polys.append(_rect_cycle(r, r + 1, off + 2 * j, off + 2 * j + 2))
        else:
            edges = sorted({0, 2 * nv} | {x for x in range(off, 2 * nv, 2)})
            for v0, v1 in zip(edges, edges[1:]):
                polys.append(_rect_cycle(r, r + 1, v0, v1))
    canon, faces, segments = conforming_polygons(polys, periods)

    origin = np.array([u_lo, v_lo])
    scale = np.array([du, dv])
    to_real = lambda x: origin + np.asarray(x) * scale
    cells = []
    for seg in segments:
        lo, hi = seg[:, 0].min(axis=0), seg[:, 0].max(axis=0)
        quad = [[lo[0], lo[1]], [hi[0], lo[1]], [hi[0], hi[1]], [lo[0], hi[1]]]
        cells.append(to_real(np.array(quad))[None])

    caps = []
    if caps_lo:
        caps.append((1, True))
    if caps_hi:
        caps.append((n_rows_total - 1, False))
    cap_faces, cap_segments = [], []
    for line, upward in caps:
        # the cap lies below (upward) or above the line; its boundary runs
        # along the line in +v or -v so that the face is anticlockwise
        ids = sorted((i for i in range(len(canon)) if canon[i, 0] == line), key=lambda i: canon[i, 1])
        if not upward:
            ids = ids[::-1]
        cyc, seg = [], []
        for q, i in enumerate(ids):
            a, b = canon[i].copy(), canon[ids[(q + 1) % len(ids)]].copy()
            if upward and b[1] <= a[1]:
                b[1] += periods[1]
            if not upward and b[1] >= a[1]:
                b[1] -= periods[1]
            cyc.append(i)
            seg.append([a, b])
        cap_faces.append(cyc)
        cap_segments.append(np.array(seg))
        u_line = u_lo + line * du
        u0, u1 = (u_lo, u_line) if upward else (u_line, u_hi)
        cells.append(np.array([[[u0, v_lo], [u1, v_lo], [u1, v_hi], [u0, v_hi]]]))

    faces = faces + cap_faces
    segments = [to_real(s) for s in segments + cap_segments]
    real_periods = tuple(p * s for p, s in zip(periods, scale))
    return LabeledSurfacePartition(to_real(canon), faces, segments, cells, [0] * len(faces),
                                   periods=real_periods, origin=tuple(origin), domain=domain)


def _face_audit_points(T: LabeledSurfacePartition, f: int, n: int = 9) -> np.ndarray:
    s = np.linspace(0.0, 1.0, n)
    S, Tt = np.meshgrid(s, s, indexing="ij")
    S, Tt = S.ravel()[:, None], Tt.ravel()[:, None]
    out = []
    for c in T.cells[f]:
        out.append((1 - S) * (1 - Tt) * c[0] + S * (1 - Tt) * c[1] + S * Tt * c[2] + (1 - S) * Tt * c[3])
    return np.concatenate(out)


def face_margins(X, T: LabeledSurfacePartition, cover, n: int = 9) -> np.ndarray:
    """(faces, charts) minimum margin of each chart over each face's image."""
    out = np.empty((T.n_faces, len(cover.charts)))
    for f in range(T.n_faces):
        out[f] = cover.margins(X(_face_audit_points(T, f, n))).min(axis=0)
    return out


def label_faces(X, T: LabeledSurfacePartition, cover, labels=None) -> LabeledSurfacePartition:
    """Assign each face the chart with the largest margin over its image.

    ``labels`` may instead fix the labels: an int for all faces, a sequence,
    or a callable of the face centroid.  Raises if any face is not contained
    in its chart.
    """
    M = face_margins(X, T, cover)
    if labels is None:
        chosen = np.argmax(M, axis=1)
    elif callable(labels):
        chosen = np.array([int(labels(c)) for c in T.face_centroids()])
    elif np.ndim(labels) == 0:
        chosen = np.full(T.n_faces, int(labels))
    else:
        chosen = np.asarray(labels, dtype=int)
    margin = M[np.arange(T.n_faces), chosen]
    if np.any(margin <= 0):
        f = int(np.argmin(margin))
        pts = X(_face_audit_points(T, f))
        if np.any(cover.margins(pts).max(axis=1) <= 0):
            raise NoCoveringChart(T.face_centroid(f).tolist())
        raise ResolutionTooCoarse(f"face {f} is not contained in chart {int(chosen[f])}; raise the resolution")
    return T.with_labels([int(c) for c in chosen])


def build_surface_partition(X, domain: SurfaceDomain, cover, resolution=(8, 8), labels=None,
                            orientation: int = 1, stagger: bool = True) -> LabeledSurfacePartition:
    if np.ndim(resolution) == 0:
        resolution = (int(resolution), int(resolution))
    T = brick_wall_2d(domain, int(resolution[0]), int(resolution[1]), stagger)
    T = label_faces(X, T, cover, labels)
    return T if orientation == 1 else T.reoriented()
