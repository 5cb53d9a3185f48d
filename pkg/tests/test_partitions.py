import math

import numpy as np
import pytest
from hypothesis import HealthCheck, given, settings
from hypothesis import strategies as st

from conftest import TWO_PI
from holonomy import get_entry
from holonomy.errors import InvalidMove, InvalidPartition, InvalidRelabel, ResolutionTooCoarse
from holonomy.partitions import (LabeledLoopPartition, LabeledPathPartition, SurfaceDomain, brick_lattice,
                                 brick_wall_2d, build_loop_partition, build_path_partition,
                                 build_surface_partition, build_volume_partition, concat_partitions,
                                 cut_along, is_valid_path, join_surfaces, loop_from_path_partition, merge_faces,
                                 merge_path, random_path_moves, random_surface_moves, refine_face, refine_path,
                                 relabel_path, sub_partition)

# ---------------------------------------------------------------------------
# paths


@pytest.mark.parametrize("bp, labels", [
    ([0.0, 1.0], []),
    ([0.0, 0.5, 0.5, 1.0], [0, 1, 0]),
    ([0.0, 1.0, 0.5], [0, 1]),
])
def test_path_partition_rejects_malformed(bp, labels):
    with pytest.raises(InvalidPartition):
        LabeledPathPartition(bp, labels)


def test_refine_merge_roundtrip():
    T = LabeledPathPartition([0.0, 0.4, 1.0], [0, 1])
    R = refine_path(T, 1, 0.7)
    assert R.breakpoints == (0.0, 0.4, 0.7, 1.0) and R.labels == (0, 1, 1)
    assert merge_path(R, 1) == T
    with pytest.raises(InvalidMove):
        merge_path(T, 0)
    with pytest.raises(InvalidMove):
        refine_path(T, 0, 0.9)


def test_reversed_and_pulled_back():
    T = LabeledPathPartition([0.0, 0.25, 1.0], [0, 1])
    R = T.reversed()
    assert R.breakpoints == (0.0, 0.75, 1.0) and R.labels == (1, 0)
    P = T.pulled_back(lambda x: x ** 2)
    assert P.breakpoints == (0.0, 0.0625, 1.0)


def test_concat_requires_abutting_domains():
    T1 = LabeledPathPartition([0.0, 1.0], [0])
    T2 = LabeledPathPartition([1.0, 2.0], [1])
    assert concat_partitions(T1, T2).breakpoints == (0.0, 1.0, 2.0)
    with pytest.raises(InvalidPartition):
        concat_partitions(T2, T1)


def test_relabel_checks_chart_containment():
    e = get_entry("circle_flat")
    p = e.map("arc", a=-0.2, b=0.2).fn
    T = LabeledPathPartition([0.0, 1.0], [0])
    assert relabel_path(T, 0, 1, p, e.cover).labels == (1,)
    q = e.map("arc", a=0.0, b=math.pi).fn
    with pytest.raises(InvalidRelabel):
        relabel_path(T, 0, 0, q, e.cover)


@pytest.mark.parametrize("name", ["circle_flat", "sphere_monopole"])
def test_built_path_partitions_are_valid(name):
    e = get_entry(name)
    rng = np.random.default_rng(3)
    for _ in range(5):
        p, a, b = e.random_path(rng)
        T = build_path_partition(p, e.cover, 200, a, b)
        assert is_valid_path(p, T, e.cover)
        assert T.a == a and T.b == b


@settings(max_examples=25, deadline=None)
@given(st.integers(min_value=0, max_value=10_000), st.integers(min_value=1, max_value=8))
def test_random_path_moves_stay_valid_and_keep_ends(seed, n):
    e = get_entry("sphere_monopole")
    rng = np.random.default_rng(seed)
    p, a, b = e.random_path(rng)
    T = build_path_partition(p, e.cover, 200, a, b)
    T2 = random_path_moves(T, p, e.cover, rng, n=n)
    assert is_valid_path(p, T2, e.cover)
    assert (T2.a, T2.b) == (T.a, T.b)
    assert T2.labels[0] == T.labels[0] and T2.labels[-1] == T.labels[-1]


# ---------------------------------------------------------------------------
# loops


def test_loop_partition_sorts_and_wraps():
    L = LabeledLoopPartition([TWO_PI + 1.0, 0.5], [3, 4])
    assert L.angles == pytest.approx((0.5, 1.0))
    assert L.labels == (4, 3)
    arcs = L.arcs()
    assert arcs[0][0] == pytest.approx(1.0 - TWO_PI)
    assert L.label_at(0.7) == 3 and L.label_at(2.0) == 4
    with pytest.raises(InvalidPartition):
        LabeledLoopPartition([0.5, 0.5 + TWO_PI], [0, 1])


def test_loop_from_path_partition_on_full_circle():
    T = LabeledPathPartition([0.0, 2.0, TWO_PI], [0, 1])
    L = loop_from_path_partition(T)
    assert sorted(L.labels) == [0, 1]


def test_build_loop_partition_covers_equator():
    e = get_entry("sphere_monopole")
    loop = e.map("equator").fn
    L = build_loop_partition(loop, e.cover)
    for start, end, label in L.arcs():
        t = np.linspace(start, end, 11)
        assert np.all(e.cover.charts[label].margin(loop(t)) > 0)


# ---------------------------------------------------------------------------
# surfaces


@pytest.mark.parametrize("kind, chi, cycles", [
    ("rectangle", 1, 1), ("cylinder", 0, 2), ("torus", 0, 0), ("disk", 1, 1), ("sphere", 2, 0),
])
@pytest.mark.parametrize("stagger", [True, False])
def test_brick_wall_topology(kind, chi, cycles, stagger):
    u_range = (0.0, math.pi) if kind == "sphere" else (0.0, 1.0)
    dom = SurfaceDomain(kind, u_range, (0.0, TWO_PI))
    T = brick_wall_2d(dom, 4, 6, stagger)
    assert T.euler_characteristic() == chi
    assert len(T.boundary_cycles()) == cycles


def test_staggered_grid_has_valence_three():
    T = brick_wall_2d(SurfaceDomain("torus", (0.0, 1.0), (0.0, 1.0)), 6, 6, True)
    assert max(T.vertex_valence(v) for v in T.internal_vertices()) == 3
    A = brick_wall_2d(SurfaceDomain("torus", (0.0, 1.0), (0.0, 1.0)), 6, 6, False)
    assert A.max_valence() == 4


def test_labels_respect_charts():
    e = get_entry("torus_flat_gerbe")
    m = e.map("identity")
    T = build_surface_partition(m.fn, m.domain, e.cover, (12, 12))
    for f in range(T.n_faces):
        c = T.face_centroid(f)
        assert e.cover.charts[T.labels[f]].margin(m.fn(c[None]))[0] > 0


def test_too_coarse_resolution_is_reported():
    e = get_entry("torus_flat_gerbe")
    m = e.map("identity")
    with pytest.raises(ResolutionTooCoarse):
        build_surface_partition(m.fn, m.domain, e.cover, (2, 2))


def test_refine_and_merge_face():
    T = brick_wall_2d(SurfaceDomain("rectangle", (0.0, 1.0), (0.0, 1.0)), 2, 2, False).with_labels(0)
    R = refine_face(T, 0, axis=0)
    assert R.n_faces == T.n_faces + 1
    assert R.euler_characteristic() == 1
    M = merge_faces(R, 0, R.n_faces - 1)
    assert M.n_faces == T.n_faces
    assert M.euler_characteristic() == 1
    assert len(M.internal_edges()) == len(T.internal_edges())


@settings(max_examples=15, deadline=None, suppress_health_check=[HealthCheck.too_slow])
@given(st.integers(min_value=0, max_value=10_000))
def test_random_surface_moves_preserve_euler_characteristic(seed):
    e = get_entry("torus_gauge_gerbe")
    rng = np.random.default_rng(seed)
    X, dom = e.random_surface(rng)
    for res in ((6, 6), (12, 12), (24, 24)):
        try:
            T = build_surface_partition(X, dom, e.cover, res, stagger=False)
            break
        except ResolutionTooCoarse:
            continue
    T2 = random_surface_moves(T, X, e.cover, rng, n=5)
    assert T2.euler_characteristic() == T.euler_characteristic()
    assert len(T2.boundary_cycles()) == len(T.boundary_cycles())


def test_cut_torus_along_u_line_gives_cylinder():
    T = brick_wall_2d(SurfaceDomain("torus", (0.0, TWO_PI), (0.0, TWO_PI)), 4, 4, False).with_labels(0)
    C = cut_along(T, 0, math.pi / 2)
    assert C.euler_characteristic() == 0
    assert len(C.boundary_cycles()) == 2
    assert C.n_faces == T.n_faces


def test_sub_partitions_join_back():
    T = brick_wall_2d(SurfaceDomain("rectangle", (0.0, 1.0), (0.0, 1.0)), 4, 3, False).with_labels(0)
    below = [f for f in range(T.n_faces) if T.face_centroid(f)[0] < 0.5]
    above = [f for f in range(T.n_faces) if T.face_centroid(f)[0] > 0.5]
    A, B = sub_partition(T, below), sub_partition(T, above)
    assert A.euler_characteristic() == B.euler_characteristic() == 1
    J = join_surfaces(A, B)
    assert J.n_faces == T.n_faces
    assert J.euler_characteristic() == 1
    assert len(J.internal_edges()) == len(T.internal_edges())


# ---------------------------------------------------------------------------
# volumes


@pytest.mark.parametrize("n", [2, 4, 6])
def test_brick_lattice_boundary_is_a_sphere(n):
    e = get_entry("box_gerbe")
    m = e.map("cube")
    V = build_volume_partition(m.fn, e.cover, n, *m.interval)
    B = V.boundary()
    assert B.euler_characteristic() == 2
    assert B.is_closed()
    assert V.max_regions_at_vertex() <= 4


@pytest.mark.parametrize("n", [1, 2, 3])
def test_brick_lattice_fills_the_box(n):
    bricks = np.array(brick_lattice(n), dtype=float)
    assert np.prod(bricks[:, 1] - bricks[:, 0], axis=1).sum() == pytest.approx((4 * n) ** 3)
