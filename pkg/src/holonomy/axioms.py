"""Randomized checks of the transport axioms for path and surface functors.

Each suite draws random objects from seeded generators, evaluates both sides
of every axiom through the functor interface only, and records the largest
phase defect per axiom.  Exceptions raised while evaluating a trial count as
failures of that axiom rather than aborting the suite.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .bundle import TransportFunctor
from .errors import CutGeometryInvalid, HolonomyError
from .gerbe import (GerbeFunctor, SurfaceObject, annulus_partition, boundary_loops, cut_partitions,
                    thin_annulus)
from .partitions.builders import build_surface_partition, face_margins
from .partitions.moves import (cut_along, join_surfaces, line_halfedges, random_surface_moves,
                               relabel_face, sub_partition)
from .partitions.paths import (LabeledPathPartition, build_path_partition, constant_partition,
                               random_loop_partition, random_path_moves, split_partition)
from .partitions.surface import SurfaceDomain
from .phase import Phase, wrap_angle

TWO_PI = 2.0 * math.pi


@dataclass
class AxiomReport:
    """Largest defect per axiom over all trials, with the failing trial numbers."""

    suite: str
    trials: int
    tol: float
    seed: int
    defects: dict = field(default_factory=dict)
    failures: dict = field(default_factory=dict)
    errors: dict = field(default_factory=dict)
    counts: dict = field(default_factory=dict)

    def record(self, axiom: str, trial: int, defect: float):
        self.counts[axiom] = self.counts.get(axiom, 0) + 1
        self.defects[axiom] = max(self.defects.get(axiom, 0.0), float(defect))
        if not defect <= self.tol:
            self.failures.setdefault(axiom, []).append(trial)

    def record_error(self, axiom: str, trial: int, exc: Exception):
        self.counts[axiom] = self.counts.get(axiom, 0) + 1
        self.defects[axiom] = math.pi
        self.failures.setdefault(axiom, []).append(trial)
        self.errors.setdefault(axiom, f"{type(exc).__name__}: {exc}")

    @property
    def passed(self) -> bool:
        return not self.failures

    @property
    def max_defect(self) -> float:
        return max(self.defects.values(), default=0.0)

    def to_dict(self) -> dict:
        return {"suite": self.suite, "trials": self.trials, "tol": self.tol, "seed": self.seed,
                "passed": self.passed, "max_defect": self.max_defect,
                "defects": dict(sorted(self.defects.items())),
                "checks": dict(sorted(self.counts.items())),
                "failures": {k: v for k, v in sorted(self.failures.items())},
                "errors": dict(sorted(self.errors.items()))}


def _defect(a: Phase, b: Phase) -> float:
    return abs(wrap_angle(a.angle - b.angle))


def _check(report: AxiomReport, axiom: str, trial: int, fn):
    try:
        lhs, rhs = fn()
    except HolonomyError as exc:
        report.record_error(axiom, trial, exc)
        return
    report.record(axiom, trial, _defect(lhs, rhs))


def _charts_at(cover, y) -> list:
    m = cover.margins(np.atleast_2d(y))[0]
    return [int(c) for c in np.where(m > 0)[0]]


def _overlap_point(cover, rng, random_point, need: int = 2):
    """A random point lying in at least ``need`` charts (sample fallback)."""
    for _ in range(200):
        y = random_point(rng)
        if len(_charts_at(cover, y)) >= need:
            return np.asarray(y, dtype=float)
    pts = cover.all_samples()
    ok = np.where((cover.margins(pts) > 0).sum(axis=1) >= need)[0]
    if len(ok) == 0:
        y = random_point(rng)
        return np.asarray(y, dtype=float)
    return pts[int(rng.choice(ok))]


def warp(a: float, b: float, k: float):
    """Increasing bijection of [a, b] fixing the ends, with its inverse."""
    span = b - a
    c = math.expm1(k)

    def sigma(x):
        return a + span * np.expm1(k * (np.asarray(x, dtype=float) - a) / span) / c

    def sigma_inv(x):
        return a + span * np.log1p(c * (np.asarray(x, dtype=float) - a) / span) / k

    return sigma, sigma_inv


# ---------------------------------------------------------------------------
# paths


def axiom_suite_1d(Z: TransportFunctor, cover, trials: int = 50, tol: float = 1e-5, seed: int = 0,
                   random_path=None, random_point=None, n_samples: int = 200) -> AxiomReport:
    """Check the path axioms, their consequences and reparametrization invariance.

    ``random_path(rng)`` returns (p, a, b); ``random_point(rng)`` an ambient
    point on the manifold.  Checks, per trial:

    def_i     Z'(y+, i, j) Z'(y+, j, k) = Z'(y+, i, k)
    def_ii    Z(p, T') = Z'(p(a)-, i_1, i'_1) Z(p, T) Z'(p(b)+, i_N, i'_N')
    def_iii   Z(p o p', T o T') = Z(p, T) Z'(p(b)+, i_N, i'_1) Z(p', T')
    prop_a    Z'(y, i, i) = 1
    prop_b    Z(constant path, single label) = 1
    prop_c    Z(constant path, split i | j) = Z'(y+, i, j)
    prop_d    Z'(y-, i, j) = Z'(y+, i, j)^-1
    inverse   Z(p, T) Z(p^-1, T^-1) = 1
    reparam   Z(p o sigma, sigma^* T) = Z(p, T)
    """
    rng = np.random.default_rng(seed)
    report = AxiomReport("axioms_1d", trials, tol, seed)
    zero = Phase(0.0)
    for trial in range(trials):
        y = _overlap_point(cover, rng, random_point, need=2)
        here = _charts_at(cover, y)
        i, j, k = (int(rng.choice(here)) for _ in range(3))
        _check(report, "def_i", trial,
               lambda: (Z.z_point(y, +1, i, j) * Z.z_point(y, +1, j, k), Z.z_point(y, +1, i, k)))
        _check(report, "prop_a", trial, lambda: (Z.z_point(y, int(rng.choice([-1, 1])), i, i), zero))
        _check(report, "prop_d", trial, lambda: (Z.z_point(y, -1, i, j), Z.z_point(y, +1, i, j).inverse()))
        const = lambda t: np.repeat(np.atleast_2d(y), len(np.atleast_1d(t)), axis=0)
        _check(report, "prop_b", trial, lambda: (Z.z_path(const, constant_partition(0.0, 1.0, i)), zero))
        _check(report, "prop_c", trial, lambda: (Z.z_path(const, split_partition(i, j)), Z.z_point(y, +1, i, j)))

        try:
            p, a, b = random_path(rng)
            T = build_path_partition(p, cover, n_samples, a, b)
        except HolonomyError as exc:
            for ax in ("def_ii", "def_iii", "inverse", "reparam"):
                report.record_error(ax, trial, exc)
            continue
        base = Z.z_path(p, T)

        def def_ii():
            T2 = random_path_moves(T, p, cover, rng, 5, keep_ends=False)
            ya, yb = p(np.array([a])), p(np.array([b]))
            rhs = Z.z_point(ya, -1, T.labels[0], T2.labels[0]) * base \
                * Z.z_point(yb, +1, T.labels[-1], T2.labels[-1])
            return Z.z_path(p, T2), rhs
        _check(report, "def_ii", trial, def_ii)

        def def_iii():
            inner = T.breakpoints[1:-1]
            if inner and rng.random() < 0.5:
                c = float(rng.choice(inner))
            else:
                c = float(rng.uniform(a + 0.1 * (b - a), b - 0.1 * (b - a)))
            bp = T.breakpoints
            n_left = sum(1 for x in bp[1:] if x <= c)
            left_bp = [x for x in bp if x < c] + [c]
            right_bp = [c] + [x for x in bp if x > c]
            T1 = LabeledPathPartition(left_bp, T.labels[:len(left_bp) - 1])
            T2 = LabeledPathPartition(right_bp, T.labels[n_left:])
            yc = p(np.array([c]))
            return base, Z.z_path(p, T1) * Z.z_point(yc, +1, T1.labels[-1], T2.labels[0]) * Z.z_path(p, T2)
        _check(report, "def_iii", trial, def_iii)

        def inverse():
            q = lambda t: p(a + b - np.asarray(t, dtype=float))
            return base * Z.z_path(q, T.reversed()), zero
        _check(report, "inverse", trial, inverse)

        def reparam():
            kk = float(rng.uniform(0.5, 2.0)) * float(rng.choice([-1, 1]))
            sigma, sigma_inv = warp(a, b, kk)
            return Z.z_path(lambda t: p(sigma(t)), T.pulled_back(sigma_inv)), base
        _check(report, "reparam", trial, reparam)
    return report


# ---------------------------------------------------------------------------
# surfaces


def grid_partition(X, domain: SurfaceDomain, cover, resolution):
    """Aligned grid partition (straight coordinate lines), refined until valid."""
    nu, nv = resolution
    for _ in range(3):
        try:
            return build_surface_partition(X, domain, cover, (nu, nv), stagger=False), (nu, nv)
        except HolonomyError:
            nu, nv = 2 * nu, 2 * nv
    return build_surface_partition(X, domain, cover, (nu, nv), stagger=False), (nu, nv)


def _shuffle_labels(X, T, cover, rng, internal_only: bool):
    """Randomly relabel faces with other valid charts."""
    M = face_margins(X, T, cover)
    he = T.halfedges
    boundary = set(he["face"][T.boundary_halfedges()].tolist())
    labels = list(T.labels)
    for f in range(T.n_faces):
        if internal_only and f in boundary:
            continue
        ok = np.where(M[f] > 0)[0]
        if rng.random() < 0.5 and len(ok):
            labels[f] = int(rng.choice(ok))
    return T.with_labels(labels)


def _lattice_warp(x0: float, spacing: float, c: float):
    """Increasing map of the line fixing every lattice point x0 + k spacing."""
    w = TWO_PI / spacing
    return lambda x: x + c * np.sin(w * (x - x0)) / w


def axiom_suite_2d(Z: GerbeFunctor, cover, trials: int = 30, tol: float = 1e-5, seed: int = 0,
                   random_surface=None, random_loop=None, resolution=(8, 8)) -> AxiomReport:
    """Check the surface axioms, their consequences and reparametrization invariance.

    ``random_surface(rng)`` returns (X, SurfaceDomain); ``random_loop(rng)``
    a loop over [0, 2 pi).  Checks, per trial:

    def_i        Z'(l, T, T') Z'(l, T', T'') = Z'(l, T, T'')
    def_ii       Z(X, T') = prod_C Z'(C, T|C, T'|C) Z(X, T) over boundary cycles C
    def_iii      Z(X', T') = Z'(X'|C, T'_L, T'_R) Z(X, T) for a closed cut C
    def_iv       Z(X1 u X2, T1 u T2) = Z(X1, T1) Z(X2, T2) for an open seam
    prop_a       Z'(l, T, T) = 1
    prop_b       Z(L_I, T x I) = 1 for the thin annulus over l
    prop_c       Z(L, T u T') = Z'(l+, T, T')
    prop_d       Z'(l-, T, T') = Z'(l+, T, T')^-1
    moves        refine / merge / interior relabel leave Z unchanged
    orientation  reversing the surface negates Z
    reparam      Z(X o phi, T) = Z(X, T) for phi fixing the lattice lines
    """
    rng = np.random.default_rng(seed)
    report = AxiomReport("axioms_2d", trials, tol, seed)
    zero = Phase(0.0)
    for trial in range(trials):
        # loops
        try:
            loop = random_loop(rng)
            T1, T2, T3 = (random_loop_partition(loop, cover, rng) for _ in range(3))
        except HolonomyError as exc:
            for ax in ("def_i", "prop_a", "prop_b", "prop_c", "prop_d"):
                report.record_error(ax, trial, exc)
        else:
            _check(report, "def_i", trial, lambda: (Z.z_loop(loop, T1, T2, 1) * Z.z_loop(loop, T2, T3, 1),
                                                    Z.z_loop(loop, T1, T3, 1)))
            _check(report, "prop_a", trial, lambda: (Z.z_loop(loop, T1, T1, int(rng.choice([-1, 1]))), zero))
            _check(report, "prop_d", trial, lambda: (Z.z_loop(loop, T1, T2, -1), Z.z_loop(loop, T1, T2, 1).inverse()))
            L = thin_annulus(loop)
            _check(report, "prop_b", trial, lambda: (Z.z_surface(L, annulus_partition(T1, T1)), zero))
            _check(report, "prop_c", trial, lambda: (Z.z_surface(L, annulus_partition(T1, T2)),
                                                     Z.z_loop(loop, T1, T2, 1)))

        # surfaces
        try:
            X, domain = random_surface(rng)
            T, (nu, nv) = grid_partition(X, domain, cover, resolution)
        except HolonomyError as exc:
            for ax in ("def_ii", "moves", "orientation", "reparam"):
                report.record_error(ax, trial, exc)
            continue
        base = Z.z_surface(X, T)

        def moves():
            T2 = random_surface_moves(_shuffle_labels(X, T, cover, rng, True), X, cover, rng, 5)
            return Z.z_surface(X, T2), base
        _check(report, "moves", trial, moves)
        _check(report, "orientation", trial, lambda: (Z.z_surface(X, T.reoriented()), base.inverse()))

        def reparam():
            (u0, u1), (v0, v1) = domain.u_range, domain.v_range
            fu = _lattice_warp(u0, (u1 - u0) / nu, float(rng.uniform(-0.3, 0.3)))
            fv = _lattice_warp(v0, (v1 - v0) / (2 * nv), float(rng.uniform(-0.3, 0.3)))
            Xw = lambda x: X(np.stack([fu(x[:, 0]), fv(x[:, 1])], axis=1))
            return Z.z_surface(Xw, T), base
        _check(report, "reparam", trial, reparam)

        def def_ii():
            T2 = random_surface_moves(_shuffle_labels(X, T, cover, rng, False), X, cover, rng, 3,
                                      keep_boundary=False)
            rhs = base
            for curve, left, right in boundary_loops(SurfaceObject(X, T), T2):
                rhs = rhs * Z.z_loop(curve, left, right, T.orientation)
            return Z.z_surface(X, T2), rhs
        _check(report, "def_ii", trial, def_ii)

        if domain.kind == "torus":
            def def_iii():
                axis = int(rng.integers(2))
                value = float(rng.choice(_lattice_lines(T, axis)))
                so = SurfaceObject(X, T)
                curve, left, right, _ = cut_partitions(so, axis, value)
                return base, Z.z_loop(curve, left, right, T.orientation) * Z.z_surface(X, cut_along(T, axis, value))
            _check(report, "def_iii", trial, def_iii)
        else:
            def def_iv():
                Ta, Tb = aligned_halves(T, X, cover, rng)
                joined = join_surfaces(Ta, Tb)
                return Z.z_surface(X, joined), Z.z_surface(X, Ta) * Z.z_surface(X, Tb)
            _check(report, "def_iv", trial, def_iv)
    return report


def _lattice_lines(T, axis: int) -> list:
    """Coordinates of the straight grid lines {axis = c} crossing the whole domain."""
    values = np.unique(np.round(T.vertices[:, axis], 9))
    lines = []
    for c in values:
        hs = line_halfedges(T, axis, float(c))
        d = np.array([T.halfedges["end"][h][1 - axis] - T.halfedges["start"][h][1 - axis] for h in hs])
        span = max(d[d > 0].sum(), -d[d < 0].sum()) if len(d) else 0.0
        full = T.periods[1 - axis] or np.ptp(T.vertices[:, 1 - axis])
        if abs(span - full) < 1e-9 * max(full, 1.0):
            lines.append(float(c))
    return lines


def aligned_halves(T, X, cover, rng):
    """Split (X, T) along an interior u-line into two aligned partitions.

    Faces just above the seam are relabeled to match the faces below it
    where their charts allow; lines that still carry differing labels or a
    triple point are skipped.
    """
    lo, hi = T.vertices[:, 0].min(), T.vertices[:, 0].max()
    lines = [c for c in _lattice_lines(T, 0) if lo + 1e-9 < c < hi - 1e-9]
    rng.shuffle(lines)
    for c in lines:
        he = T.halfedges
        try:
            for h in line_halfedges(T, 0, c):
                f, g = int(he["face"][h]), int(he["face"][he["twin"][h]])
                if T.face_centroid(g)[0] > c and T.labels[g] != T.labels[f]:
                    T = relabel_face(T, g, T.labels[f], X, cover)
        except HolonomyError:
            continue
        he = T.halfedges
        seam = {int(he["origin"][h]) for h in line_halfedges(T, 0, c)}
        internal = set(T.internal_vertices())
        if any(len({T.labels[f] for f in T.faces_around(v)}) > 2 for v in seam & internal):
            continue
        below = [f for f in range(T.n_faces) if T.face_centroid(f)[0] < c]
        above = [f for f in range(T.n_faces) if T.face_centroid(f)[0] > c]
        return sub_partition(T, below), sub_partition(T, above)
    raise CutGeometryInvalid("no seam line admits aligned labels")


def relabel_all(T, labels, X, cover):
    """T with new labels, each checked against the face's image."""
    for f, lab in enumerate(labels):
        if lab != T.labels[f]:
            T = relabel_face(T, f, lab, X, cover)
    return T
