import math
from dataclasses import replace

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from holonomy import (BundleData, Chart, ChartCover, GerbeData, bundle_curvature, check_bundle_cocycle,
                      check_gerbe_cocycle, gerbe_curvature, get_entry)
from holonomy.catalog import sphere_point
from holonomy.errors import EmptyOverlapSamples, NonUnitTransition, PointOutsideChart
from holonomy.numerics import solid_angle_form


def line_cover(declared=None, samples=True):
    """Two overlapping intervals of the real line."""
    pts = np.linspace(-1.0, 1.0, 21)[:, None]
    left = lambda y: 0.3 - y[:, 0]
    right = lambda y: y[:, 0] + 0.3
    charts = (Chart(left, pts[left(pts) > 0] if samples else np.zeros((0, 1))),
              Chart(right, pts[right(pts) > 0] if samples else np.zeros((0, 1))))
    return ChartCover(1, 1, charts, declared_overlaps=declared)


def test_cover_margins_and_overlap_samples():
    cover = line_cover()
    m = cover.margins(np.array([[0.0], [0.5]]))
    assert m.shape == (2, 2)
    assert np.all(m[0] > 0) and m[1, 0] < 0
    both = cover.overlap_samples((0, 1))
    assert np.all(np.abs(both[:, 0]) < 0.3)


def test_cover_rejects_sample_outside_chart():
    with pytest.raises(ValueError):
        ChartCover(1, 1, (Chart(lambda y: -y[:, 0], np.array([[1.0]])),))


def test_default_frame_is_coordinate_basis():
    cover = ChartCover(3, 2, (Chart(lambda y: np.ones(len(y)), np.zeros((1, 3))),))
    f = cover.frame(np.zeros((2, 3)))
    assert f.shape == (2, 2, 3)
    assert np.allclose(f[0], np.eye(3)[:2])


def test_declared_overlap_without_samples_raises():
    cover = line_cover(declared=frozenset([frozenset((0, 1))]), samples=False)
    data = BundleData(cover, lambda i, j, y: np.ones(len(y), complex), lambda j, y, v: np.zeros(len(y)))
    with pytest.raises(EmptyOverlapSamples):
        check_bundle_cocycle(data)


def test_non_unit_transition_is_rejected():
    data = BundleData(line_cover(), lambda i, j, y: np.full(len(y), 1.1 + 0j), lambda j, y, v: np.zeros(len(y)))
    with pytest.raises(NonUnitTransition):
        data.transition(0, 1, np.zeros((1, 1)))
    with pytest.raises(NonUnitTransition):
        check_bundle_cocycle(data)


def test_gauge_bundle_on_line_passes():
    # A_1 - A_0 = d(lambda) with g_01 = exp(i lambda), lambda = y^2
    lam = lambda y: y[:, 0] ** 2
    g = lambda i, j, y: np.exp(1j * lam(y) * {(0, 1): 1, (1, 0): -1}.get((i, j), 0))
    A = lambda j, y, v: (2 * y[:, 0] * v[:, 0]) * j + np.sin(y[:, 0]) * v[:, 0]
    rep = check_bundle_cocycle(BundleData(line_cover(), g, A))
    assert rep.passed, rep.residuals
    assert rep.counts["B1"] > 0 and rep.counts["B2"] > 0


@pytest.mark.parametrize("n", [1, 2, -3])
def test_monopole_curvature_matches_half_solid_angle(n):
    e = get_entry("sphere_monopole", n=n)
    y = np.array(sphere_point(0.7, 1.3))
    u, v = e.cover.frame(y[None])[0]
    expect = 0.5 * n * solid_angle_form(y[None], u[None], v[None])[0]
    assert bundle_curvature(e.bundle, 0, y, (u, v)) == pytest.approx(expect, abs=1e-7)


def test_curvature_needs_point_well_inside():
    e = get_entry("sphere_monopole")
    y = np.array(sphere_point(2 * math.pi / 3 - 1e-6, 0.0))
    u, v = e.cover.frame(y[None])[0]
    with pytest.raises(PointOutsideChart):
        bundle_curvature(e.bundle, 0, y, (u, v))


def test_box_gerbe_three_form_is_volume():
    e = get_entry("box_gerbe")
    eye = np.eye(3)
    for chart, y in ((0, [0.2, 0.5, 0.5]), (1, [0.8, 0.3, 0.7])):
        assert gerbe_curvature(e.gerbe, chart, np.array(y), eye) == pytest.approx(1.0, abs=1e-6)


@settings(max_examples=20, deadline=None)
@given(st.floats(min_value=-0.5, max_value=0.5))
def test_constant_phase_shift_of_one_transition_breaks_b1_only(kick):
    e = get_entry("sphere_monopole")
    g = e.bundle.g
    bad = replace(e.bundle, g=lambda i, j, y: g(i, j, y) * (np.exp(1j * kick) if (i, j) == (0, 1) else 1.0))
    rep = check_bundle_cocycle(bad)
    assert rep.residuals["B1"] == pytest.approx(abs(2 * math.sin(kick / 2)), abs=1e-9)
    assert rep.residuals["B2"] < 1e-6


def test_gerbe_check_reports_antisymmetry():
    e = get_entry("torus_gauge_gerbe")
    A2 = e.gerbe.A2
    bad = replace(e.gerbe, A2=lambda j, k, y, v: A2(j, k, y, v) + (0.2 * v[:, 0] if (j, k) == (0, 1) else 0.0))
    rep = check_gerbe_cocycle(bad)
    assert rep.residuals["antisymmetry"] > 1e-2
    assert not rep.passed


def test_gerbe_data_identities():
    e = get_entry("torus_flat_gerbe", omega=0.4)
    y = np.array([[0.0, 1.0, 1.0, 0.0]])
    assert e.gerbe.transition_angle(0, 1, 2, y)[0] == pytest.approx(0.4)
    assert e.gerbe.transition_angle(1, 0, 2, y)[0] == pytest.approx(-0.4)
    assert e.gerbe.transition_angle(0, 0, 2, y)[0] == 0.0
    assert e.gerbe.connection(1, 1, y, y)[0] == 0.0
    assert isinstance(e.gerbe, GerbeData)
