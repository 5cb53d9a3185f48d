import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import TWO_PI, leggauss_integral, phase_gap
from holonomy import (Phase, broken_bundle_functor, bundle_functor, get_entry, glue_z_path, reconstruct_A,
                      reconstruct_g, stokes_check_1d, z_loop_from_bundle, z_path_from_bundle, z_point_from_bundle)
from holonomy.axioms import warp
from holonomy.catalog import sphere_point
from holonomy.errors import EndpointMismatch, InvalidPartition, PointOutsideOverlap, StepTooLarge
from holonomy.partitions import (LabeledPathPartition, build_loop_partition, build_path_partition,
                                 build_surface_partition, random_path_moves, split_partition)

MONOPOLE = get_entry("sphere_monopole", n=1)
CIRCLE = get_entry("circle_flat")


@pytest.mark.parametrize("right, left", [(math.pi / 3, 0.0), (1.0, 0.25), (-2.0, 0.5)])
def test_flat_circle_holonomy_is_transition_mismatch(right, left):
    e = get_entry("circle_flat", alpha_right=right, alpha_left=left)
    loop = e.map("loop").fn
    ph = z_loop_from_bundle(e.bundle, loop, build_loop_partition(loop, e.cover))
    # counter-clockwise: enter the upper arc chart at (1, 0), leave it at (-1, 0)
    assert phase_gap(ph, right - left) < 1e-12


def test_single_chart_path_matches_line_integral_oracle():
    p = MONOPOLE.map("latitude", theta0=0.8).fn
    T = LabeledPathPartition([0.0, 2.0], [0])
    ph = z_path_from_bundle(MONOPOLE.bundle, p, T)

    def integrand(t):
        y = p(t)
        v = np.stack([-np.sin(t), np.cos(t), np.zeros_like(t)], axis=1) * math.sin(0.8)
        return MONOPOLE.bundle.connection(0, y, v)

    assert ph.angle == pytest.approx(leggauss_integral(integrand, 0.0, 2.0), abs=1e-12)


def test_point_factor_orientation_and_overlap():
    y = np.array(sphere_point(math.pi / 2, 0.7))
    plus = z_point_from_bundle(MONOPOLE.bundle, y, +1, 0, 1)
    minus = z_point_from_bundle(MONOPOLE.bundle, y, -1, 0, 1)
    assert plus.angle == pytest.approx(-0.7)
    assert minus.angle == pytest.approx(0.7)
    assert z_point_from_bundle(MONOPOLE.bundle, y, +1, 1, 1).angle == 0.0
    with pytest.raises(PointOutsideOverlap):
        z_point_from_bundle(MONOPOLE.bundle, np.array([0.0, 0.0, 1.0]), +1, 0, 1)


def test_invalid_labels_are_rejected():
    p = MONOPOLE.map("meridian").fn
    with pytest.raises(InvalidPartition):
        z_path_from_bundle(MONOPOLE.bundle, p, LabeledPathPartition([0.0, math.pi], [0]))


def test_glue_requires_matching_endpoints():
    p = MONOPOLE.map("meridian").fn
    T1 = build_path_partition(p, MONOPOLE.cover, 200, 0.0, 1.0)
    T2 = build_path_partition(p, MONOPOLE.cover, 200, 1.5, 2.0)
    with pytest.raises(EndpointMismatch):
        glue_z_path(MONOPOLE.bundle, p, T1, p, T2)


@settings(max_examples=25, deadline=None)
@given(st.integers(min_value=0, max_value=100_000))
def test_moves_do_not_change_transport(seed):
    rng = np.random.default_rng(seed)
    p, a, b = MONOPOLE.random_path(rng)
    T = build_path_partition(p, MONOPOLE.cover, 200, a, b)
    T2 = random_path_moves(T, p, MONOPOLE.cover, rng, n=5)
    assert phase_gap(z_path_from_bundle(MONOPOLE.bundle, p, T2), z_path_from_bundle(MONOPOLE.bundle, p, T)) < 1e-9


@settings(max_examples=25, deadline=None)
@given(st.integers(min_value=0, max_value=100_000), st.floats(min_value=0.3, max_value=2.5),
       st.sampled_from([-1.0, 1.0]))
def test_reparametrization_invariance(seed, k, sign):
    rng = np.random.default_rng(seed)
    p, a, b = MONOPOLE.random_path(rng)
    T = build_path_partition(p, MONOPOLE.cover, 200, a, b)
    sigma, sigma_inv = warp(a, b, sign * k)
    moved = z_path_from_bundle(MONOPOLE.bundle, lambda t: p(sigma(t)), T.pulled_back(sigma_inv))
    assert phase_gap(moved, z_path_from_bundle(MONOPOLE.bundle, p, T)) < 1e-9


@settings(max_examples=20, deadline=None)
@given(st.integers(min_value=0, max_value=100_000))
def test_reversed_path_inverts_phase(seed):
    rng = np.random.default_rng(seed)
    p, a, b = CIRCLE.random_path(rng)
    T = build_path_partition(p, CIRCLE.cover, 200, a, b)
    q = lambda t: p(a + b - np.asarray(t, dtype=float))
    total = z_path_from_bundle(CIRCLE.bundle, p, T) * z_path_from_bundle(CIRCLE.bundle, q, T.reversed())
    assert phase_gap(total, 0.0) < 1e-12


@pytest.mark.parametrize("theta0", [0.5, 1.3, 2.6])
def test_cap_stokes(theta0):
    m = MONOPOLE.map("cap", theta0=theta0)
    T = build_surface_partition(m.fn, m.domain, MONOPOLE.cover, (6, 8))
    rep = stokes_check_1d(MONOPOLE.bundle, m.fn, T)
    assert rep.defect < 1e-9
    assert rep.curvature_phase.angle == pytest.approx(math.pi * (1 - math.cos(theta0)), abs=1e-9)
    assert rep.details["n_boundary_cycles"] == 1


def test_reoriented_surface_flips_both_sides():
    m = MONOPOLE.map("annulus")
    T = build_surface_partition(m.fn, m.domain, MONOPOLE.cover, (6, 8))
    a = stokes_check_1d(MONOPOLE.bundle, m.fn, T)
    b = stokes_check_1d(MONOPOLE.bundle, m.fn, T.reoriented())
    assert b.curvature_phase.angle == pytest.approx(-a.curvature_phase.angle)
    assert phase_gap(b.boundary_phase, a.boundary_phase.inverse()) < 1e-12


def test_reconstruction_of_transition_and_connection():
    Z = bundle_functor(MONOPOLE.bundle)
    y = np.array(sphere_point(1.4, 2.2))
    assert phase_gap(reconstruct_g(Z, y, 1, 0), MONOPOLE.bundle.transition_angle(1, 0, y)[0]) < 1e-12
    v = MONOPOLE.cover.frame(y[None])[0][1]
    assert reconstruct_A(Z, 0, y, v) == pytest.approx(MONOPOLE.bundle.connection(0, y, v)[0], abs=1e-7)
    with pytest.raises(StepTooLarge):
        reconstruct_A(Z, 0, np.array(sphere_point(2 * math.pi / 3 - 1e-6, 0.0)), v, h=1e-2)


def test_broken_functor_differs_only_with_transitions():
    Z, B = bundle_functor(MONOPOLE.bundle), broken_bundle_functor(MONOPOLE.bundle)
    y = np.array(sphere_point(math.pi / 2, 1.0))
    const = lambda t: np.repeat(y[None], len(np.atleast_1d(t)), axis=0)
    assert phase_gap(B.z_path(const, split_partition(0, 1)), Z.z_path(const, split_partition(0, 1))) > 0.5
    p = MONOPOLE.map("latitude", theta0=0.5).fn
    T = LabeledPathPartition([0.0, TWO_PI], [0])
    assert phase_gap(B.z_path(p, T), Z.z_path(p, T)) == 0.0
    assert isinstance(Z.z_path(p, T), Phase)
