"""Labeled partitions of parameter intervals and circles."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ..errors import InvalidMove, InvalidPartition, InvalidRelabel, NoCoveringChart, ResolutionTooCoarse
from ..numerics import gauss_legendre_rule

TWO_PI = 2.0 * math.pi
AUDIT_POINTS = 64


@dataclass(frozen=True)
class LabeledPathPartition:
    """Breakpoints a = x_0 < ... < x_N = b and a chart label per segment."""

    breakpoints: tuple
    labels: tuple

    def __post_init__(self):
        bp = tuple(float(x) for x in self.breakpoints)
        labels = tuple(int(i) for i in self.labels)
        object.__setattr__(self, "breakpoints", bp)
        object.__setattr__(self, "labels", labels)
        if len(labels) < 1 or len(bp) != len(labels) + 1:
            raise InvalidPartition("need N >= 1 segments and N + 1 breakpoints")
        if any(b <= a for a, b in zip(bp, bp[1:])):
            raise InvalidPartition(f"breakpoints must be strictly increasing: {bp}")

    @property
    def a(self) -> float:
        return self.breakpoints[0]

    @property
    def b(self) -> float:
        return self.breakpoints[-1]

    def __len__(self) -> int:
        return len(self.labels)

    def segments(self):
        return list(zip(self.breakpoints[:-1], self.breakpoints[1:], self.labels))

    def reversed(self) -> "LabeledPathPartition":
        """The partition of the reversed path x -> a + b - x."""
        a, b = self.a, self.b
        return LabeledPathPartition([a + b - x for x in reversed(self.breakpoints)], self.labels[::-1])

    def pulled_back(self, sigma_inv) -> "LabeledPathPartition":
        """Breakpoints mapped through an increasing bijection (for p o sigma)."""
        return LabeledPathPartition([float(sigma_inv(x)) for x in self.breakpoints], self.labels)

    def to_dict(self) -> dict:
        return {"breakpoints": list(self.breakpoints), "labels": list(self.labels)}


def constant_partition(a: float, b: float, label: int) -> LabeledPathPartition:
    return LabeledPathPartition([a, b], [label])


def split_partition(i: int, j: int) -> LabeledPathPartition:
    """[0, 1/2] labeled i and [1/2, 1] labeled j."""
    return LabeledPathPartition([0.0, 0.5, 1.0], [i, j])


def _audit_params(x0: float, x1: float) -> np.ndarray:
    nodes, _ = gauss_legendre_rule(16, 1)
    uniform = np.linspace(0.0, 1.0, AUDIT_POINTS + 1)
    s = np.concatenate([uniform, nodes[:, 0]])
    return x0 + s * (x1 - x0)


def segment_margins(p, T: LabeledPathPartition, cover) -> np.ndarray:
    """Minimum margin of each segment's labeled chart over its audit points."""
    out = np.empty(len(T))
    for n, (x0, x1, label) in enumerate(T.segments()):
        pts = p(_audit_params(x0, x1))
        out[n] = float(np.min(cover.charts[label].margin(pts)))
    return out


def is_valid_path(p, T: LabeledPathPartition, cover) -> bool:
    return bool(np.all(segment_margins(p, T, cover) > 0))


def require_valid_path(p, T, cover):
    m = segment_margins(p, T, cover)
    if not np.all(m > 0):
        bad = int(np.argmin(m))
        raise InvalidPartition(f"segment {bad} leaves chart {T.labels[bad]} (margin {m[bad]:.3e})")


def _best_label(margins_row) -> int:
    # argmax returns the first maximum: ties go to the smallest chart index
    return int(np.argmax(margins_row))


def build_path_partition(p, cover, n_samples: int = 200, a: float = 0.0, b: float = 1.0
                         ) -> LabeledPathPartition:
    """Greedy labeled partition of [a, b] for the path ``p``.

    The current label is kept while its margin stays above half of the
    smallest best-available margin along the path; at a crossing the label
    switches to the chart with the largest margin there and the breakpoint
    goes halfway between the last good and the first bad sample.
    """
    if n_samples < 2:
        raise ValueError("n_samples must be at least 2")
    t = np.linspace(a, b, n_samples)
    M = cover.margins(p(t))
    best = M.max(axis=1)
    if np.any(best <= 0):
        k = int(np.argmin(best))
        raise NoCoveringChart(float(t[k]))
    threshold = 0.5 * float(best.min())

    breakpoints = [a]
    labels = [_best_label(M[0])]
    for k in range(1, n_samples):
        cur = labels[-1]
        if M[k, cur] >= threshold:
            continue
        candidates = np.where((M[k - 1] > 0) & (M[k] >= threshold))[0]
        if not len(candidates):
            raise ResolutionTooCoarse(f"no chart contains samples {k - 1} and {k}; raise n_samples")
        nxt = int(candidates[np.argmax(M[k, candidates])])
        breakpoints.append(0.5 * (t[k - 1] + t[k]))
        labels.append(nxt)
    breakpoints.append(b)
    T = LabeledPathPartition(breakpoints, labels)
    if not is_valid_path(p, T, cover):
        raise ResolutionTooCoarse("partition fails its validity audit; raise n_samples")
    return T


def refine_path(T: LabeledPathPartition, index: int, at: float = None) -> LabeledPathPartition:
    """Split segment ``index`` in two (at its midpoint by default), same label."""
    x0, x1 = T.breakpoints[index], T.breakpoints[index + 1]
    at = 0.5 * (x0 + x1) if at is None else float(at)
    if not x0 < at < x1:
        raise InvalidMove(f"split point {at} is not inside segment {index}")
    bp = list(T.breakpoints)
    bp.insert(index + 1, at)
    labels = list(T.labels)
    labels.insert(index, labels[index])
    return LabeledPathPartition(bp, labels)


def merge_path(T: LabeledPathPartition, index: int) -> LabeledPathPartition:
    """Merge segments ``index`` and ``index + 1``; their labels must agree."""
    if not 0 <= index < len(T) - 1:
        raise InvalidMove(f"no segment after {index}")
    if T.labels[index] != T.labels[index + 1]:
        raise InvalidMove("only segments with equal labels can be merged")
    bp = list(T.breakpoints)
    del bp[index + 1]
    labels = list(T.labels)
    del labels[index]
    return LabeledPathPartition(bp, labels)


def relabel_path(T: LabeledPathPartition, index: int, label: int, p, cover) -> LabeledPathPartition:
    """Change the label of one segment; the new chart must contain its image."""
    labels = list(T.labels)
    labels[index] = int(label)
    T2 = LabeledPathPartition(T.breakpoints, labels)
    x0, x1 = T.breakpoints[index], T.breakpoints[index + 1]
    if float(np.min(cover.charts[label].margin(p(_audit_params(x0, x1))))) <= 0:
        raise InvalidRelabel(f"segment {index} is not contained in chart {label}")
    return T2


def concat_partitions(T: LabeledPathPartition, T2: LabeledPathPartition) -> LabeledPathPartition:
    """T o T': the natural partition of [a, c] from partitions of [a, b] and [b, c]."""
    if abs(T.b - T2.a) > 1e-12:
        raise InvalidPartition(f"domains do not abut: {T.b} vs {T2.a}")
    return LabeledPathPartition(T.breakpoints + T2.breakpoints[1:], T.labels + T2.labels)


def random_path_moves(T: LabeledPathPartition, p, cover, rng, n: int = 5, keep_ends: bool = True
                      ) -> LabeledPathPartition:
    """Apply ``n`` random valid refine / merge / relabel moves.

    With ``keep_ends`` the first and last labels are never changed, so the
    phase of (p, T) is unchanged by every move.
    """
    done = 0
    for _ in range(50 * n):
        if done == n:
            break
        kind = rng.integers(3)
        k = int(rng.integers(len(T)))
        try:
            if kind == 0:
                x0, x1 = T.breakpoints[k], T.breakpoints[k + 1]
                T = refine_path(T, k, x0 + rng.uniform(0.2, 0.8) * (x1 - x0))
            elif kind == 1:
                T = merge_path(T, k)
            else:
                if keep_ends and k in (0, len(T) - 1):
                    continue
                T = relabel_path(T, k, int(rng.integers(len(cover.charts))), p, cover)
        except (InvalidMove, InvalidRelabel):
            continue
        done += 1
    return T


@dataclass(frozen=True)
class LabeledLoopPartition:
    """Cyclically ordered angles a_1 < ... < a_N in [0, 2 pi) with arc labels.

    ``labels[k]`` labels the arc that ends at ``angles[k]`` (the arc for
    k = 0 starts at ``angles[-1] - 2 pi``).
    """

    angles: tuple
    labels: tuple

    def __post_init__(self):
        ang = [float(np.mod(a, TWO_PI)) for a in self.angles]
        order = np.argsort(ang, kind="stable")
        ang = [ang[k] for k in order]
        labels = [int(self.labels[k]) for k in order]
        if not ang or len(ang) != len(labels):
            raise InvalidPartition("need N >= 1 angles, one label per arc")
        gaps = np.diff(ang + [ang[0] + TWO_PI])
        if len(ang) > 1 and np.any(gaps <= 0):
            raise InvalidPartition("loop breakpoints must be distinct mod 2 pi")
        object.__setattr__(self, "angles", tuple(ang))
        object.__setattr__(self, "labels", tuple(labels))

    def __len__(self) -> int:
        return len(self.labels)

    def arcs(self):
        """(start, end, label) with end > start, end in [0, 2 pi)."""
        ang = self.angles
        return [((ang[k - 1] - TWO_PI) if k == 0 else ang[k - 1], ang[k], self.labels[k])
                for k in range(len(ang))]

    def label_at(self, angle: float) -> int:
        a = float(np.mod(angle, TWO_PI))
        k = int(np.searchsorted(self.angles, a, side="left")) % len(self.angles)
        return self.labels[k]

    def shifted(self, k: int, eps: float) -> "LabeledLoopPartition":
        ang = list(self.angles)
        ang[k] += eps
        return LabeledLoopPartition(ang, self.labels)

    def to_dict(self) -> dict:
        return {"angles": list(self.angles), "labels": list(self.labels)}


def loop_from_path_partition(T: LabeledPathPartition) -> LabeledLoopPartition:
    """Read a partition of [0, 2 pi] as a partition of the circle."""
    if abs(T.a) > 1e-12 or abs(T.b - TWO_PI) > 1e-9:
        raise InvalidPartition("a loop partition needs a path partition of [0, 2 pi]")
    inner = list(T.breakpoints[1:-1])
    labels = list(T.labels)
    if labels[0] == labels[-1]:
        if not inner:
            return LabeledLoopPartition([0.0], [labels[0]])
        return LabeledLoopPartition(inner, labels[:-1])
    return LabeledLoopPartition([0.0] + inner, [labels[-1]] + labels[:-1])


def loop_segment_margins(loop, T: LabeledLoopPartition, cover) -> np.ndarray:
    out = np.empty(len(T))
    for n, (x0, x1, label) in enumerate(T.arcs()):
        out[n] = float(np.min(cover.charts[label].margin(loop(_audit_params(x0, x1)))))
    return out


def build_loop_partition(loop, cover, n_samples: int = 200) -> LabeledLoopPartition:
    T = build_path_partition(loop, cover, n_samples, 0.0, TWO_PI)
    L = loop_from_path_partition(T)
    if not np.all(loop_segment_margins(loop, L, cover) > 0):
        raise ResolutionTooCoarse("loop partition fails its validity audit")
    return L


def random_loop_partition(loop, cover, rng, extra: int = 3, n_samples: int = 200) -> LabeledLoopPartition:
    """A valid loop partition with random extra breakpoints and random valid labels."""
    L = build_loop_partition(loop, cover, n_samples)
    angles = list(L.angles) + list(rng.uniform(0.0, TWO_PI, size=extra))
    labels = [L.label_at(a) for a in angles]
    L = LabeledLoopPartition(angles, labels)
    labels = list(L.labels)
    for k, (x0, x1, _) in enumerate(L.arcs()):
        if rng.random() < 0.5:
            c = int(rng.integers(len(cover.charts)))
            if float(np.min(cover.charts[c].margin(loop(_audit_params(x0, x1))))) > 0:
                labels[k] = c
    return LabeledLoopPartition(L.angles, labels)
