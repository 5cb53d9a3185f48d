import math

import numpy as np
import pytest
from hypothesis import HealthCheck, given, settings
from hypothesis import strategies as st

from conftest import TWO_PI, phase_gap
from holonomy import (LoopTransition, SurfaceObject, broken_gerbe_functor, gerbe_functor, get_entry,
                      glue_z_surface, partial_glue_z_surface, reconstruct_A2, reconstruct_F, reconstruct_g3,
                      stokes_check_2d, z_loop_transition, z_surface)
from holonomy.axioms import grid_partition
from holonomy.errors import SeamMismatch
from holonomy.gerbe import (annulus_partition, boundary_transition, cut_partitions, simplex_partition,
                            surface_terms, thin_annulus, vertex_triples)
from holonomy.partitions import (LabeledLoopPartition, build_surface_partition, build_volume_partition,
                                 random_loop_partition, random_surface_moves, sub_partition)

GAUGE = get_entry("torus_gauge_gerbe")
FLAT = get_entry("torus_flat_gerbe")
TRIPLE_POINT = np.array([0.0, 1.0, 1.0, 0.0])  # u = pi/2, v = 0


def identity_object(entry, res=(16, 16)):
    m = entry.map("identity")
    return SurfaceObject(m.fn, build_surface_partition(m.fn, m.domain, entry.cover, res))


@pytest.mark.parametrize("theta", [0.3, 1.0, 2.5])
def test_global_curving_on_torus_gives_theta(theta):
    e = get_entry("torus_global_B", theta=theta)
    assert phase_gap(z_surface(e.gerbe, identity_object(e, (4, 4))), theta) < 1e-10


@pytest.mark.parametrize("theta", [0.3, 1.0])
def test_gauge_transformed_gerbe_agrees_on_closed_torus(theta):
    e = get_entry("torus_gauge_gerbe", theta=theta, omega=0.7)
    so = identity_object(e)
    terms = surface_terms(e.gerbe, so)
    assert terms["n_vertex_factors"] > 0 and terms["n_edge_factors"] > 0
    assert phase_gap(z_surface(e.gerbe, so), theta) < 1e-8


def test_constant_cocycle_cancels_on_closed_torus():
    so = identity_object(FLAT)
    triples = [k for _, k in vertex_triples(so.T) if len(set(k)) == 3]
    assert len(triples) >= 2
    assert phase_gap(z_surface(FLAT.gerbe, so), 0.0) < 1e-12


def test_vertex_triples_read_anticlockwise_from_smallest():
    T = simplex_partition(2, 0, 1)
    assert [k for _, k in vertex_triples(T)] == [(0, 1, 2)]
    T = simplex_partition(1, 0, 2)
    assert [k for _, k in vertex_triples(T)] == [(0, 2, 1)]


def test_reorientation_inverts():
    so = identity_object(GAUGE)
    flipped = SurfaceObject(so.X, so.T.reoriented())
    assert phase_gap(z_surface(GAUGE.gerbe, flipped), z_surface(GAUGE.gerbe, so).inverse()) < 1e-12


def random_loop_data(seed):
    rng = np.random.default_rng(seed)
    loop = GAUGE.random_loop(rng)
    return loop, [random_loop_partition(loop, GAUGE.cover, rng) for _ in range(3)]


@settings(max_examples=10, deadline=None, suppress_health_check=[HealthCheck.too_slow])
@given(st.integers(min_value=0, max_value=100_000))
def test_loop_transitions_compose(seed):
    loop, (T1, T2, T3) = random_loop_data(seed)
    z = lambda a, b, o=1: z_loop_transition(GAUGE.gerbe, LoopTransition(loop, a, b, o))
    # shared breakpoints are separated by a relative 1e-9, which costs O(1e-9) per shift
    assert phase_gap(z(T1, T2) * z(T2, T3), z(T1, T3)) < 1e-8
    assert phase_gap(z(T1, T1), 0.0) < 1e-8
    assert phase_gap(z(T1, T2, -1), z(T1, T2).inverse()) < 1e-12


@settings(max_examples=8, deadline=None, suppress_health_check=[HealthCheck.too_slow])
@given(st.integers(min_value=0, max_value=100_000))
def test_thin_annulus_equals_loop_transition(seed):
    loop, (T1, T2, _) = random_loop_data(seed)
    L = thin_annulus(loop)
    annulus = z_surface(GAUGE.gerbe, SurfaceObject(L, annulus_partition(T1, T2)))
    # see the shift note above
    assert phase_gap(annulus, z_loop_transition(GAUGE.gerbe, LoopTransition(loop, T1, T2))) < 1e-8
    assert phase_gap(z_surface(GAUGE.gerbe, SurfaceObject(L, annulus_partition(T1, T1))), 0.0) < 1e-9


def test_single_arc_loop_partitions():
    loop = GAUGE.map("meridian_loop", u0=0.0).fn
    T = LabeledLoopPartition([1.0], [0])
    T2 = LabeledLoopPartition([2.0], [0])
    assert phase_gap(z_loop_transition(GAUGE.gerbe, LoopTransition(loop, T, T2)), 0.0) < 1e-12


@pytest.mark.parametrize("axis", [0, 1])
def test_cut_and_glue_closed_torus(axis):
    m = GAUGE.map("identity")
    T, _ = grid_partition(m.fn, m.domain, GAUGE.cover, (12, 12))
    so = SurfaceObject(m.fn, T)
    value = float(np.unique(np.round(T.vertices[:, axis], 12))[3])
    _, _, _, closed = cut_partitions(so, axis, value)
    assert closed
    assert phase_gap(glue_z_surface(GAUGE.gerbe, so, axis, value), z_surface(GAUGE.gerbe, so)) < 1e-9


def test_partial_glue_detects_mismatched_maps():
    m = GAUGE.map("half_torus", lower=0.0, upper=math.pi)
    T, _ = grid_partition(m.fn, m.domain, GAUGE.cover, (8, 12))
    below = [f for f in range(T.n_faces) if T.face_centroid(f)[0] < math.pi / 2]
    above = [f for f in range(T.n_faces) if T.face_centroid(f)[0] > math.pi / 2]
    Ta, Tb = sub_partition(T, below), sub_partition(T, above)
    shifted = lambda x: m.fn(x + np.array([0.0, 0.1]))
    with pytest.raises(SeamMismatch):
        partial_glue_z_surface(GAUGE.gerbe, SurfaceObject(m.fn, Ta), SurfaceObject(shifted, Tb))


@settings(max_examples=6, deadline=None, suppress_health_check=[HealthCheck.too_slow])
@given(st.integers(min_value=0, max_value=100_000))
def test_surface_moves_and_boundary_relabeling(seed):
    rng = np.random.default_rng(seed)
    X, dom = GAUGE.random_surface(rng)
    T, _ = grid_partition(X, dom, GAUGE.cover, (6, 6))
    base = z_surface(GAUGE.gerbe, SurfaceObject(X, T))
    T2 = random_surface_moves(T, X, GAUGE.cover, rng, n=5)
    assert phase_gap(z_surface(GAUGE.gerbe, SurfaceObject(X, T2)), base) < 1e-8
    T3 = random_surface_moves(T, X, GAUGE.cover, rng, n=4, keep_boundary=False)
    rhs = boundary_transition(GAUGE.gerbe, SurfaceObject(X, T), T3) * base
    assert phase_gap(z_surface(GAUGE.gerbe, SurfaceObject(X, T3)), rhs) < 1e-8


@pytest.mark.parametrize("charts", [1, 2])
def test_box_stokes(charts):
    e = get_entry("box_gerbe", charts=charts)
    m = e.map("cube")
    V = build_volume_partition(m.fn, e.cover, 2, *m.interval)
    rep = stokes_check_2d(e.gerbe, m.fn, V)
    assert rep.defect < 1e-9
    assert rep.curvature_phase.angle == pytest.approx(1.0, abs=1e-10)


@pytest.mark.parametrize("ijk", [(0, 1, 2), (2, 1, 0), (1, 2, 0)])
def test_reconstruct_g3(ijk):
    Z = gerbe_functor(GAUGE.gerbe)
    assert phase_gap(reconstruct_g3(Z, TRIPLE_POINT, *ijk), GAUGE.gerbe.transition_angle(*ijk, TRIPLE_POINT)[0]) \
        < 1e-12


def test_reconstruct_A2_and_F():
    Z = gerbe_functor(GAUGE.gerbe)
    u, v = GAUGE.cover.frame(TRIPLE_POINT[None])[0]
    w = (u + 2 * v) / math.sqrt(5)
    for j, k in ((0, 1), (2, 0)):
        assert reconstruct_A2(Z, j, k, TRIPLE_POINT, w) == pytest.approx(
            GAUGE.gerbe.connection(j, k, TRIPLE_POINT, w)[0], abs=1e-6)
    for k in range(3):
        assert reconstruct_F(Z, k, TRIPLE_POINT, u, v) == pytest.approx(
            GAUGE.gerbe.curving(k, TRIPLE_POINT, u, v)[0], abs=1e-6)


def test_flipped_edge_mutant_changes_surface_sum():
    so = identity_object(GAUGE)
    good, bad = gerbe_functor(GAUGE.gerbe), broken_gerbe_functor(GAUGE.gerbe)
    assert phase_gap(bad.z_surface(so.X, so.T), good.z_surface(so.X, so.T)) > 1e-2
    # with A2 = 0 the mutant is indistinguishable
    so = identity_object(FLAT)
    assert phase_gap(broken_gerbe_functor(FLAT.gerbe).z_surface(so.X, so.T),
                     gerbe_functor(FLAT.gerbe).z_surface(so.X, so.T)) == 0.0


def test_loop_transition_of_longitude_is_finite():
    loop = GAUGE.map("longitude_loop").fn
    rng = np.random.default_rng(1)
    T1, T2 = (random_loop_partition(loop, GAUGE.cover, rng) for _ in range(2))
    ph = z_loop_transition(GAUGE.gerbe, LoopTransition(loop, T1, T2))
    assert math.isfinite(ph.angle) and abs(ph.angle) < 10 * TWO_PI
