"""Labeled brick partitions of a box in R^3 and their boundary surfaces."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import InvalidPartition, NoCoveringChart, ResolutionTooCoarse
from .builders import conforming_polygons
from .surface import LabeledSurfacePartition, SurfaceDomain


def _cuts(offset: int, step: int, total: int) -> list:
    return sorted({0, total} | {x for x in range(offset % step, total, step) if 0 < x < total})


def brick_lattice(n: int):
    """Integer bricks (lo, hi) tiling [0, 4n]^3 with at most four bricks per vertex.

    Layers along x have thickness 4.  Within a layer, rows along z are shifted
    by 2 on odd layers, and bricks along y alternate their offset by row and
    by layer, so no two cut planes line up across neighbours.
    """
    total = 4 * n
    bricks = []
    for a in range(n):
        x0, x1 = 4 * a, 4 * a + 4
        zc = _cuts(2 * (a % 2), 4, total)
        for r, (z0, z1) in enumerate(zip(zc, zc[1:])):
            yc = _cuts(2 * (r % 2) + (a % 2), 4, total)
            for y0, y1 in zip(yc, yc[1:]):
                bricks.append(((x0, y0, z0), (x1, y1, z1)))
    return bricks


@dataclass(frozen=True, eq=False)
class LabeledVolumePartition:
    """Axis-aligned bricks in a box, each labeled by a chart."""

    lower: np.ndarray
    upper: np.ndarray
    labels: tuple
    box_lower: tuple = (0.0, 0.0, 0.0)
    box_upper: tuple = (1.0, 1.0, 1.0)
    lattice: tuple = None
    scale: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, "lower", np.asarray(self.lower, dtype=float).reshape(-1, 3))
        object.__setattr__(self, "upper", np.asarray(self.upper, dtype=float).reshape(-1, 3))
        object.__setattr__(self, "labels", tuple(int(i) for i in self.labels))
        if len(self.labels) != len(self.lower) or np.any(self.upper <= self.lower):
            raise InvalidPartition("bad brick list")

    @property
    def n_regions(self) -> int:
        return len(self.labels)

    def with_labels(self, labels) -> "LabeledVolumePartition":
        return LabeledVolumePartition(self.lower, self.upper, labels, self.box_lower, self.box_upper,
                                      self.lattice, self.scale)

    def max_regions_at_vertex(self) -> int:
        corners = {}
        for lo, hi in self.lattice:
            for cx in (lo[0], hi[0]):
                for cy in (lo[1], hi[1]):
                    for cz in (lo[2], hi[2]):
                        corners[(cx, cy, cz)] = 0
        for lo, hi in self.lattice:
            for c in corners:
                if all(lo[k] <= c[k] <= hi[k] for k in range(3)):
                    corners[c] += 1
        return max(corners.values())

    def boundary(self) -> LabeledSurfacePartition:
        """The boundary of the box as a surface partition with outward normals."""
        total = max(hi[0] for _, hi in self.lattice)
        polys, labels = [], []
        normal_sign = {(0, 1): 1, (0, 2): -1, (1, 2): 1}
        for (lo, hi), label in zip(self.lattice, self.labels):
            for axis in range(3):
                for value, outward in ((lo[axis], -1), (hi[axis], 1)):
                    if value not in (0, total) or (value == 0) != (outward == -1):
                        continue
                    a, b = [k for k in range(3) if k != axis]
                    def pt(ua, ub):
                        p = [0, 0, 0]
                        p[axis], p[a], p[b] = value, ua, ub
                        return tuple(p)
                    quad = [pt(lo[a], lo[b]), pt(hi[a], lo[b]), pt(hi[a], hi[b]), pt(lo[a], hi[b])]
                    # e_a x e_b points along +/- the face axis; flip to make it outward
                    if normal_sign[(a, b)] != outward:
                        quad = quad[::-1]
                    polys.append(quad)
                    labels.append(label)
        canon, faces, segments = conforming_polygons(polys, (0, 0, 0))
        origin = np.asarray(self.box_lower, dtype=float)
        s = (np.asarray(self.box_upper, dtype=float) - origin) / total
        cells = [(origin + np.array(q, dtype=float) * s)[None] for q in polys]
        return LabeledSurfacePartition(origin + canon * s, faces, [origin + g * s for g in segments], cells,
                                       labels, domain=SurfaceDomain("polygon"))

    def to_dict(self) -> dict:
        return {"n_regions": self.n_regions, "labels": list(self.labels),
                "box_lower": list(self.box_lower), "box_upper": list(self.box_upper)}


def _brick_audit(lo, hi, n=5):
    s = np.linspace(0.0, 1.0, n)
    g = np.stack(np.meshgrid(s, s, s, indexing="ij"), axis=-1).reshape(-1, 3)
    return lo + g * (hi - lo)


def build_volume_partition(H, cover, n: int = 2, lower=(0.0, 0.0, 0.0), upper=(1.0, 1.0, 1.0),
                           labels=None) -> LabeledVolumePartition:
    """Brick partition of the box [lower, upper] labeled by the best chart per brick."""
    lat = brick_lattice(int(n))
    lo_box = np.asarray(lower, dtype=float)
    s = (np.asarray(upper, dtype=float) - lo_box) / (4 * n)
    L = np.array([lo_box + np.array(lo) * s for lo, _ in lat])
    U = np.array([lo_box + np.array(hi) * s for _, hi in lat])
    M = np.array([cover.margins(H(_brick_audit(l, u))).min(axis=0) for l, u in zip(L, U)])
    if labels is None:
        chosen = np.argmax(M, axis=1)
    elif np.ndim(labels) == 0:
        chosen = np.full(len(lat), int(labels))
    else:
        chosen = np.asarray(labels, dtype=int)
    margin = M[np.arange(len(lat)), chosen]
    if np.any(margin <= 0):
        k = int(np.argmin(margin))
        if np.any(cover.margins(H(_brick_audit(L[k], U[k]))).max(axis=1) <= 0):
            raise NoCoveringChart((0.5 * (L[k] + U[k])).tolist())
        raise ResolutionTooCoarse(f"brick {k} is not contained in chart {int(chosen[k])}")
    return LabeledVolumePartition(L, U, [int(c) for c in chosen], tuple(lower), tuple(upper), tuple(lat))
