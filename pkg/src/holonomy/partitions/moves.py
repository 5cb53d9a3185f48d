"""Local moves on surface partitions, cutting along a coordinate line, joining."""

from __future__ import annotations

import numpy as np

from ..errors import CutGeometryInvalid, InvalidMove, InvalidRelabel, SeamMismatch
from .builders import _face_audit_points
from .surface import LabeledSurfacePartition, SurfaceDomain, _reduce

ATOL = 1e-9


def _lists(T: LabeledSurfacePartition):
    return ([list(f) for f in T.faces], [s.copy() for s in T.segments],
            [c.copy() for c in T.cells], list(T.labels), list(T.face_piece))


def _rebuild(T, vertices, faces, segments, cells, labels, pieces, domain=None):
    return T.replace(vertices=vertices, faces=tuple(tuple(f) for f in faces), segments=tuple(segments),
                     cells=tuple(cells), labels=tuple(labels), face_piece=tuple(pieces),
                     domain=domain if domain is not None else T.domain)


def _compact(T: LabeledSurfacePartition) -> LabeledSurfacePartition:
    used = sorted({v for f in T.faces for v in f})
    if len(used) == len(T.vertices):
        return T
    remap = {v: n for n, v in enumerate(used)}
    faces = [[remap[v] for v in f] for f in T.faces]
    return T.replace(vertices=T.vertices[used], faces=tuple(tuple(f) for f in faces))


def _on_segment(p, a, b):
    """Parameter of p on segment a-b if it lies strictly inside, else None."""
    d = b - a
    L2 = float(d @ d)
    lam = float((p - a) @ d) / L2
    if not 1e-9 < lam < 1 - 1e-9:
        return None
    if np.linalg.norm(a + lam * d - p) > ATOL * max(1.0, np.sqrt(L2)):
        return None
    return lam


def _insert_point(faces, segments, f, point, vid):
    for q in range(len(faces[f])):
        a, b = segments[f][q]
        if _on_segment(point, a, b) is not None:
            faces[f].insert(q + 1, vid)
            segments[f] = np.insert(segments[f], q + 1, [point, b], axis=0)
            segments[f][q, 1] = point
            return
    raise InvalidMove(f"point {point} is not inside an edge of face {f}")


def _split_edge(T, faces, segments, f, point, new):
    """Insert a vertex at ``point`` (face f's unwrapped coordinates).

    The vertex goes into face f and into the face across the edge; its
    reduced coordinates are appended to ``new``.
    """
    he = T.halfedges
    for q in range(len(T.faces[f])):
        a, b = T.segments[f][q]
        if _on_segment(point, a, b) is None:
            continue
        vid = len(T.vertices) + len(new)
        new.append(_reduce(point, T.periods, T.origin))
        _insert_point(faces, segments, f, point, vid)
        t = he["twin"][he["first"][f] + q]
        if t >= 0:
            g, r = int(he["face"][t]), int(he["pos"][t])
            _insert_point(faces, segments, g, T.segments[g][r][1] + (point - a), vid)
        return vid
    raise InvalidMove(f"point {point} is not inside an edge of face {f}")


def _vertex_position(segments_f, point):
    for q, s in enumerate(segments_f):
        if np.linalg.norm(s[0] - point) < ATOL:
            return q
    return None


def refine_face(T: LabeledSurfacePartition, f: int, axis: int = None, at: float = 0.5
                ) -> LabeledSurfacePartition:
    """Split a single-cell face by a chord across its cell (both halves keep the label)."""
    if len(T.cells[f]) != 1:
        raise InvalidMove(f"face {f} is not a single quadrilateral cell")
    c = T.cells[f][0]
    for corner in c:
        if _vertex_position(T.segments[f], corner) is None:
            raise InvalidMove(f"face {f} corners are not all vertices")
    if axis is None:
        axis = 0 if np.linalg.norm(c[1] - c[0]) >= np.linalg.norm(c[3] - c[0]) else 1
    for s in (at, 0.4, 0.6, 0.45, 0.55, 0.35, 0.65, 0.3, 0.7):
        if axis == 0:
            A, B = c[0] + s * (c[1] - c[0]), c[3] + s * (c[2] - c[3])
            halves = ([A, c[1], c[2], B], [c[0], A, B, c[3]])
        else:
            A, B = c[1] + s * (c[2] - c[1]), c[0] + s * (c[3] - c[0])
            halves = ([B, A, c[2], c[3]], [c[0], c[1], A, B])
        if _vertex_position(T.segments[f], A) is None and _vertex_position(T.segments[f], B) is None:
            break
    else:
        raise InvalidMove(f"no admissible chord position in face {f}")
    faces, segments, cells, labels, pieces = _lists(T)
    new = []
    _split_edge(T, faces, segments, f, A, new)
    _split_edge(T, faces, segments, f, B, new)
    vertices = np.vstack([T.vertices] + [np.atleast_2d(v) for v in new])
    pa, pb = _vertex_position(segments[f], A), _vertex_position(segments[f], B)
    cyc, seg = faces[f], segments[f]
    n = len(cyc)
    idx1 = [(pa + k) % n for k in range((pb - pa) % n + 1)]
    idx2 = [(pb + k) % n for k in range((pa - pb) % n + 1)]
    face1 = [cyc[k] for k in idx1]
    seg1 = np.concatenate([seg[idx1[:-1]], [[B, A]]])
    face2 = [cyc[k] for k in idx2]
    seg2 = np.concatenate([seg[idx2[:-1]], [[A, B]]])
    faces[f], segments[f], cells[f] = face1, seg1, np.array([halves[0]])
    faces.append(face2)
    segments.append(seg2)
    cells.append(np.array([halves[1]]))
    labels.append(labels[f])
    pieces.append(pieces[f])
    return _rebuild(T, vertices, faces, segments, cells, labels, pieces)


def _coalesce_cells(cells: np.ndarray) -> np.ndarray:
    cells = [c for c in cells]
    merged = True
    while merged:
        merged = False
        for i in range(len(cells)):
            for j in range(len(cells)):
                if i == j:
                    continue
                a, b = cells[i], cells[j]
                new = None
                if np.allclose(a[1], b[0], atol=ATOL) and np.allclose(a[2], b[3], atol=ATOL):
                    new = np.array([a[0], b[1], b[2], a[3]])
                elif np.allclose(a[3], b[0], atol=ATOL) and np.allclose(a[2], b[1], atol=ATOL):
                    new = np.array([a[0], a[1], b[2], b[3]])
                if new is not None and np.allclose(new[0] + new[2], new[1] + new[3], atol=ATOL):
                    cells = [c for k, c in enumerate(cells) if k not in (i, j)] + [new]
                    merged = True
                    break
            if merged:
                break
    return np.array(cells)


def _dissolve(T: LabeledSurfacePartition, v: int) -> LabeledSurfacePartition:
    """Remove vertex v if it has two neighbours and its edges are collinear."""
    he = T.halfedges
    incident = np.where((he["origin"] == v) | (he["dest"] == v))[0]
    nbrs = set(he["origin"][incident].tolist()) | set(he["dest"][incident].tolist())
    nbrs.discard(v)
    if len(nbrs) != 2:
        return T
    faces, segments, cells, labels, pieces = _lists(T)
    for f in range(len(faces)):
        if v not in faces[f]:
            continue
        q = faces[f].index(v)
        n = len(faces[f])
        s_in, s_out = segments[f][(q - 1) % n], segments[f][q]
        d0, d1 = s_in[1] - s_in[0], s_out[1] - s_out[0]
        cross = d0[0] * d1[1] - d0[1] * d1[0] if len(d0) == 2 else np.linalg.norm(np.cross(d0, d1))
        if abs(cross) > ATOL or float(d0 @ d1) <= 0:
            return T
    for f in range(len(faces)):
        if v not in faces[f]:
            continue
        q = faces[f].index(v)
        n = len(faces[f])
        # segment chains may jump by a period, so add displacements
        segments[f][(q - 1) % n, 1] += segments[f][q, 1] - segments[f][q, 0]
        segments[f] = np.delete(segments[f], q, axis=0)
        del faces[f][q]
    return _rebuild(T, T.vertices, faces, segments, cells, labels, pieces)


def merge_faces(T: LabeledSurfacePartition, f1: int, f2: int) -> LabeledSurfacePartition:
    """Merge two equally labeled faces sharing exactly one edge."""
    if f1 == f2:
        raise InvalidMove("cannot merge a face with itself")
    if T.labels[f1] != T.labels[f2]:
        raise InvalidMove("only faces with equal labels can be merged")
    he = T.halfedges
    shared = [h for h in range(he["first"][f1], he["first"][f1] + len(T.faces[f1]))
              if he["twin"][h] >= 0 and he["face"][he["twin"][h]] == f2]
    if len(shared) != 1:
        raise InvalidMove(f"faces {f1} and {f2} share {len(shared)} edges, need exactly one")
    h = shared[0]
    t = int(he["twin"][h])
    q1, q2 = int(he["pos"][h]), int(he["pos"][t])
    a, b = int(he["origin"][h]), int(he["dest"][h])
    faces, segments, cells, labels, pieces = _lists(T)
    offset = T.segments[f1][q1][0] - T.segments[f2][q2][1]
    n1, n2 = len(faces[f1]), len(faces[f2])
    idx1 = [(q1 + 1 + k) % n1 for k in range(n1 - 1)]
    idx2 = [(q2 + 1 + k) % n2 for k in range(n2 - 1)]
    cyc = [faces[f1][k] for k in idx1] + [faces[f2][k] for k in idx2]
    if len(set(cyc)) != len(cyc):
        raise InvalidMove(f"merging faces {f1} and {f2} would pinch the boundary")
    seg = np.concatenate([segments[f1][idx1], segments[f2][idx2] + offset])
    cl = _coalesce_cells(np.concatenate([cells[f1], cells[f2] + offset]))
    faces[f1], segments[f1], cells[f1] = cyc, seg, cl
    for lst in (faces, segments, cells, labels, pieces):
        del lst[f2]
    T2 = _rebuild(T, T.vertices, faces, segments, cells, labels, pieces)
    for v in (a, b):
        T2 = _dissolve(T2, v)
    return _compact(T2)


def relabel_face(T: LabeledSurfacePartition, f: int, label: int, X, cover) -> LabeledSurfacePartition:
    """Change one face's label; the new chart must contain the face's image."""
    if float(cover.charts[label].margin(X(_face_audit_points(T, f))).min()) <= 0:
        raise InvalidRelabel(f"face {f} is not contained in chart {label}")
    labels = list(T.labels)
    labels[f] = int(label)
    return T.with_labels(labels)


def sub_partition(T: LabeledSurfacePartition, faces) -> LabeledSurfacePartition:
    """The partition made of the listed faces only (vertices renumbered)."""
    keep = sorted(int(f) for f in faces)
    F, S, C, L, P = _lists(T)
    sub = _rebuild(T, T.vertices, [F[f] for f in keep], [S[f] for f in keep], [C[f] for f in keep],
                   [L[f] for f in keep], [P[f] for f in keep], domain=SurfaceDomain("polygon"))
    return _compact(sub)


def random_surface_moves(T: LabeledSurfacePartition, X, cover, rng, n: int = 5,
                         keep_boundary: bool = True) -> LabeledSurfacePartition:
    """Apply ``n`` random valid refine / merge / relabel moves.

    With ``keep_boundary`` only faces away from the boundary are relabeled.
    """
    done = 0
    for _ in range(50 * n):
        if done == n:
            break
        kind = rng.integers(3)
        f = int(rng.integers(T.n_faces))
        try:
            if kind == 0:
                T = refine_face(T, f, axis=int(rng.integers(2)), at=float(rng.uniform(0.3, 0.7)))
            elif kind == 1:
                he = T.halfedges
                hs = [h for h in range(he["first"][f], he["first"][f] + len(T.faces[f])) if he["twin"][h] >= 0]
                if not hs:
                    continue
                g = int(he["face"][he["twin"][hs[int(rng.integers(len(hs)))]]])
                T = merge_faces(T, f, g)
            else:
                if keep_boundary and f in set(T.halfedges["face"][T.boundary_halfedges()].tolist()):
                    continue
                T = relabel_face(T, f, int(rng.integers(len(cover.charts))), X, cover)
        except (InvalidMove, InvalidRelabel):
            continue
        done += 1
    return T


def _line_side(T, axis, value):
    """For each face: -1 below the line, +1 above, 0 not touching; checks no face straddles it."""
    P = T.periods[axis]
    out = []
    for f, seg in enumerate(T.segments):
        x = seg[:, :, axis].ravel()
        c = float(T.cells[f][..., axis].mean())
        lines = value + P * np.arange(np.floor((x.min() - value) / P) - 1, np.ceil((x.max() - value) / P) + 2) \
            if P else np.array([value])
        for L in lines:
            if x.min() < L - ATOL and x.max() > L + ATOL:
                raise CutGeometryInvalid(f"face {f} straddles the cut line")
        if not np.any(np.abs(x[:, None] - lines[None]) < ATOL):
            out.append(0)
            continue
        L = lines[np.argmin(np.abs(lines - c))]
        out.append(1 if c > L else -1)
    return out


def _on_line(x, axis, value, T):
    P = T.periods[axis]
    d = x[..., axis] - value
    if P:
        d = (d + 0.5 * P) % P - 0.5 * P
    return np.abs(d) < ATOL


def line_halfedges(T: LabeledSurfacePartition, axis: int, value: float) -> list:
    """Half-edges whose segment lies on the line {coordinate axis = value}."""
    he = T.halfedges
    on = _on_line(he["start"], axis, value, T) & _on_line(he["end"], axis, value, T)
    return [int(h) for h in np.where(on)[0]]


def cut_along(T: LabeledSurfacePartition, axis: int, value: float) -> LabeledSurfacePartition:
    """Cut the surface along the coordinate line {axis = value}.

    Vertices on the line are duplicated for the faces above it, so the
    edges along the line become boundary edges on both sides.
    """
    hs = line_halfedges(T, axis, value)
    if not hs:
        raise CutGeometryInvalid("no edges of the partition lie on the cut line")
    side = _line_side(T, axis, value)
    faces, segments, cells, labels, pieces = _lists(T)
    on_line = {int(v) for h in hs for v in (T.halfedges["origin"][h], T.halfedges["dest"][h])}
    dup = {}
    for f, cyc in enumerate(faces):
        if side[f] <= 0:
            continue
        for q, v in enumerate(cyc):
            if v in on_line and _on_line(segments[f][q, 0], axis, value, T):
                if v not in dup:
                    dup[v] = len(T.vertices) + len(dup)
                cyc[q] = dup[v]
    extra = np.array([T.vertices[v] for v in sorted(dup, key=dup.get)]).reshape(-1, T.dim)
    vertices = np.vstack([T.vertices, extra])
    return _rebuild(T, vertices, faces, segments, cells, labels, pieces, domain=SurfaceDomain("polygon"))


def join_surfaces(T1: LabeledSurfacePartition, T2: LabeledSurfacePartition) -> LabeledSurfacePartition:
    """Glue two partitions along the boundary edges they share in parameter space.

    Raises ``SeamMismatch`` if they share no boundary edge, if a shared
    boundary vertex has no partner edge, or if labels disagree across the seam.
    """
    if T1.dim != T2.dim or T1.orientation != T2.orientation:
        raise SeamMismatch("partitions differ in dimension or orientation")
    if tuple(T1.periods) != tuple(T2.periods):
        raise SeamMismatch("partitions live on different parameter domains")
    b1 = sorted(T1.boundary_vertices())
    remap = {}
    for v in sorted(T2.boundary_vertices()):
        for w in b1:
            d = T1.vertices[w] - T2.vertices[v]
            if np.linalg.norm(d) < ATOL:
                remap[v] = w
                break
    if not remap:
        raise SeamMismatch("the partitions have no common boundary vertex")
    n1 = len(T1.vertices)
    new_id, extra = {}, []
    for v in range(len(T2.vertices)):
        if v in remap:
            new_id[v] = remap[v]
        else:
            new_id[v] = n1 + len(extra)
            extra.append(T2.vertices[v])
    vertices = np.vstack([T1.vertices] + ([np.array(extra)] if extra else []))
    faces = list(T1.faces) + [[new_id[v] for v in f] for f in T2.faces]
    shift = max(T1.face_piece) + 1
    J = T1.replace(vertices=vertices, faces=tuple(tuple(f) for f in faces),
                   segments=T1.segments + T2.segments, cells=T1.cells + T2.cells,
                   labels=T1.labels + T2.labels, face_piece=T1.face_piece + tuple(p + shift for p in T2.face_piece),
                   domain=SurfaceDomain("polygon"))
    he = J.halfedges
    nf1 = T1.n_faces
    seam = [h for h in range(len(he["origin"])) if he["face"][h] < nf1 <= he["face"][max(he["twin"][h], 0)]
            and he["twin"][h] >= 0]
    if not seam:
        raise SeamMismatch("the partitions share no boundary edge")
    for h in seam:
        if J.labels[he["face"][h]] != J.labels[he["face"][he["twin"][h]]]:
            raise SeamMismatch("labels differ across the seam")
    seam_vertices = set(remap.values())
    for h in J.boundary_halfedges():
        if int(he["origin"][h]) in seam_vertices and int(he["dest"][h]) in seam_vertices \
                and he["face"][h] < nf1:
            a, b = J.segments[he["face"][h]][he["pos"][h]]
            mid = 0.5 * (a + b)
            if any(np.linalg.norm(T2.vertices[v] - mid) < ATOL for v in range(len(T2.vertices))):
                raise SeamMismatch("seam vertices do not match on both sides")
    return J
