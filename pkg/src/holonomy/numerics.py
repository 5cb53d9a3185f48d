"""Quadrature, finite differences and pullbacks of forms along parametrized maps.

All integrators work on batches of axis-aligned boxes so that the state-sum
evaluators can push every segment, face cell or brick of a partition through
one adaptive pass. Integrands receive ``(idx, x)`` where ``idx`` is the box
index of each node and ``x`` the node coordinates, and return one real value
per node.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .errors import QuadratureNotConverged

EPS = np.finfo(float).eps
FD_STEP = 1e-5
# nodes evaluated per integrand call; bounds the memory of 3-D passes
CHUNK = 120_000


@dataclass(frozen=True)
class QuadConfig:
    """Gauss-Legendre settings shared by every integrator.

    ``order_1d``, ``order_2d`` and ``order_3d`` are points per axis of the
    base rule on a cell. When ``adaptive`` is false the base rule is used
    once per cell and the bisection estimate is only reported.
    """

    order_1d: int = 16
    order_2d: int = 8
    order_3d: int = 5
    tol: float = 1e-10
    max_depth: int = 12
    adaptive: bool = True

    def __post_init__(self):
        for o in (self.order_1d, self.order_2d, self.order_3d):
            if int(o) < 2:
                raise ValueError(f"quadrature order must be >= 2, got {o}")
        if not self.tol > 0:
            raise ValueError(f"quadrature tolerance must be positive, got {self.tol}")
        if self.max_depth < 0:
            raise ValueError("max_depth must be non-negative")

    def order(self, dim: int) -> int:
        return {1: self.order_1d, 2: self.order_2d, 3: self.order_3d}[dim]

    def with_(self, **changes) -> "QuadConfig":
        fields = dict(self.__dict__)
        fields.update(changes)
        return QuadConfig(**fields)

    def to_dict(self) -> dict:
        return dict(self.__dict__)


DEFAULT_QUAD = QuadConfig()


@lru_cache(maxsize=None)
def gauss_legendre_rule(order: int, dim: int):
    """Tensor Gauss-Legendre nodes on [0, 1]^dim with weights summing to 1."""
    x, w = np.polynomial.legendre.leggauss(order)
    x = 0.5 * (x + 1.0)
    w = 0.5 * w
    grids = np.meshgrid(*([x] * dim), indexing="ij")
    wgrids = np.meshgrid(*([w] * dim), indexing="ij")
    nodes = np.stack([g.ravel() for g in grids], axis=1)
    weights = np.prod(np.stack([g.ravel() for g in wgrids], axis=1), axis=1)
    nodes.setflags(write=False)
    weights.setflags(write=False)
    return nodes, weights


def _apply_rule(f, owner, lo, hi, nodes, weights):
    """Integrate f over the sub-boxes [lo, hi] (owner gives the parent box)."""
    m, d = lo.shape
    q = len(weights)
    width = hi - lo
    vol = np.prod(width, axis=1)
    values = np.empty(m)
    mags = np.empty(m)
    per_chunk = max(1, CHUNK // q)
    for start in range(0, m, per_chunk):
        sl = slice(start, min(m, start + per_chunk))
        x = lo[sl, None, :] + width[sl, None, :] * nodes[None, :, :]
        idx = np.repeat(owner[sl], q)
        fx = np.asarray(f(idx, x.reshape(-1, d)), dtype=float).reshape(-1, q)
        values[sl] = (fx @ weights) * vol[sl]
        mags[sl] = (np.abs(fx) @ weights) * np.abs(vol[sl])
    return values, mags


def _children(lo, hi):
    """Split every box into its 2^d halves (children grouped per parent)."""
    m, d = lo.shape
    mid = 0.5 * (lo + hi)
    corners = np.array(np.meshgrid(*([[0, 1]] * d), indexing="ij")).reshape(d, -1).T
    c_lo = np.where(corners[None, :, :] == 0, lo[:, None, :], mid[:, None, :])
    c_hi = np.where(corners[None, :, :] == 0, mid[:, None, :], hi[:, None, :])
    return c_lo.reshape(-1, d), c_hi.reshape(-1, d), len(corners)


def integrate_boxes(f, lo, hi, order: int, quad: QuadConfig = DEFAULT_QUAD):
    """Adaptive tensor Gauss-Legendre integration over a batch of boxes.

    Each box is compared against the sum over its 2^d halves; a sub-box is
    accepted once the two agree to its volume share of ``quad.tol`` (or to
    round-off). Returns ``(values, error_estimates)``, one entry per box.

    Raises
    ------
    QuadratureNotConverged
        If some sub-box still disagrees at ``quad.max_depth`` bisections.
    """
    lo = np.atleast_2d(np.asarray(lo, dtype=float))
    hi = np.atleast_2d(np.asarray(hi, dtype=float))
    nbox, d = lo.shape
    nodes, weights = gauss_legendre_rule(order, d)
    result = np.zeros(nbox)
    errors = np.zeros(nbox)
    if nbox == 0:
        return result, errors
    full_vol = np.abs(np.prod(hi - lo, axis=1))
    full_vol = np.where(full_vol > 0, full_vol, 1.0)

    owner = np.arange(nbox)
    coarse, _ = _apply_rule(f, owner, lo, hi, nodes, weights)
    depth = 0
    while len(owner):
        c_lo, c_hi, nc = _children(lo, hi)
        c_owner = np.repeat(owner, nc)
        c_val, c_mag = _apply_rule(f, c_owner, c_lo, c_hi, nodes, weights)
        fine = c_val.reshape(-1, nc).sum(axis=1)
        mag = c_mag.reshape(-1, nc).sum(axis=1)
        diff = np.abs(fine - coarse)
        if not quad.adaptive:
            np.add.at(result, owner, coarse)
            np.add.at(errors, owner, diff)
            break
        share = np.abs(np.prod(hi - lo, axis=1)) / full_vol[owner]
        ok = diff <= np.maximum(quad.tol * share, 64.0 * EPS * mag)
        np.add.at(result, owner[ok], fine[ok])
        np.add.at(errors, owner[ok], diff[ok])
        if ok.all():
            break
        if depth >= quad.max_depth:
            bad = np.unique(owner[~ok])
            raise QuadratureNotConverged(
                f"{len(bad)} cell(s) not converged after {depth} bisections "
                f"(worst estimate {diff[~ok].max():.3e})"
            )
        keep = np.repeat(~ok, nc)
        lo, hi, owner = c_lo[keep], c_hi[keep], c_owner[keep]
        coarse = c_val[keep]
        depth += 1
    return result, errors


def gauss_legendre_levels(f, a: float, b: float, order: int = 16, depth: int = 6):
    """Composite Gauss-Legendre estimates on 1, 2, 4, ... uniform cells.

    ``f`` maps an array of points to values. Returns the list of estimates,
    one per level, which is what the refinement monotonicity checks use.
    """
    nodes, weights = gauss_legendre_rule(order, 1)
    out = []
    for level in range(depth + 1):
        n = 2 ** level
        edges = np.linspace(a, b, n + 1)
        x = edges[:-1, None] + (edges[1:] - edges[:-1])[:, None] * nodes[None, :, 0]
        fx = np.asarray(f(x.ravel()), dtype=float).reshape(n, -1)
        out.append(float(((fx @ weights) * (edges[1:] - edges[:-1])).sum()))
    return out


# ---------------------------------------------------------------------------
# finite differences


def central_diff(f, t0: float, h: float) -> float:
    """Second-order central difference (f(t0+h) - f(t0-h)) / 2h."""
    return (f(t0 + h) - f(t0 - h)) / (2.0 * h)


def mixed_diff(f, t0: float, u0: float, h: float) -> float:
    """Four-point central estimate of the mixed partial d^2 f / dt du."""
    return (f(t0 + h, u0 + h) - f(t0 + h, u0 - h) - f(t0 - h, u0 + h) + f(t0 - h, u0 - h)) / (
        4.0 * h * h
    )


def diff4(fmap, x, direction, step):
    """Fourth-order central derivative of a vectorized map along ``direction``.

    ``x`` has shape (m, k); ``direction`` is a length-k unit vector and
    ``step`` a scalar or (m,) array of steps.
    """
    step = np.asarray(step, dtype=float)
    if step.ndim == 1:
        step = step[:, None]
    dx = step * np.asarray(direction, dtype=float)[None, :]
    y1 = fmap(x + dx)
    y_1 = fmap(x - dx)
    y2 = fmap(x + 2 * dx)
    y_2 = fmap(x - 2 * dx)
    return (8.0 * (y1 - y_1) - (y2 - y_2)) / (12.0 * step)


def pullback_integrand(map_fn, form_fn, dim: int, step: float = FD_STEP):
    """Integrand ``(idx, x) -> form(y)(d_1 y, ..., d_dim y)`` with y = map(idx, x).

    Partial derivatives of the map come from fourth-order central differences
    with a fixed parameter step.
    """
    eye = np.eye(dim)

    def integrand(idx, x):
        y = map_fn(idx, x)
        vecs = [diff4(lambda z: map_fn(idx, z), x, eye[a], step) for a in range(dim)]
        return form_fn(idx, y, *vecs)

    return integrand


# ---------------------------------------------------------------------------
# single-map conveniences


def _single(form):
    return lambda idx, y, *vecs: form(y, *vecs)


def integrate_pullback_1form(form, curve, t0: float, t1: float, quad: QuadConfig = DEFAULT_QUAD,
                             with_error: bool = False):
    """Integral of the pullback of a 1-form along ``curve`` over [t0, t1].

    ``form(y, v)`` and ``curve(t)`` are vectorized: ``y`` and ``v`` have shape
    (m, n) and ``t`` shape (m,).
    """
    span = t1 - t0
    step = FD_STEP * abs(span) if span else FD_STEP
    f = pullback_integrand(lambda idx, x: curve(x[:, 0]), _single(form), 1, step)
    val, err = integrate_boxes(f, [[t0]], [[t1]], quad.order(1), quad)
    return (float(val[0]), float(err[0])) if with_error else float(val[0])


def integrate_pullback_2form(form, patch, lower, upper, quad: QuadConfig = DEFAULT_QUAD,
                             with_error: bool = False):
    """Integral of ``patch^* form`` over the rectangle [lower, upper] of the patch domain.

    Orientation is that of (d/du, d/dv); swapping the corners of one axis
    negates the result.
    """
    lower = np.asarray(lower, dtype=float)
    upper = np.asarray(upper, dtype=float)
    span = upper - lower

    def unit_map(idx, x):
        return patch(lower[None, :] + x * span[None, :])

    def scaled(idx, y, a, b):
        return form(y, a, b)

    f = pullback_integrand(unit_map, scaled, 2)
    val, err = integrate_boxes(f, [[0.0, 0.0]], [[1.0, 1.0]], quad.order(2), quad)
    return (float(val[0]), float(err[0])) if with_error else float(val[0])


def integrate_pullback_3form(form, block, lower, upper, quad: QuadConfig = DEFAULT_QUAD,
                             with_error: bool = False):
    """Integral of ``block^* form`` over the box [lower, upper]."""
    lower = np.asarray(lower, dtype=float)
    upper = np.asarray(upper, dtype=float)
    span = upper - lower

    def unit_map(idx, x):
        return block(lower[None, :] + x * span[None, :])

    f = pullback_integrand(unit_map, _single(form), 3)
    val, err = integrate_boxes(f, [[0.0] * 3], [[1.0] * 3], quad.order(3), quad)
    return (float(val[0]), float(err[0])) if with_error else float(val[0])


def bilinear(corners, s, t):
    """Bilinear interpolation of cell corners (c00, c10, c11, c01).

    ``corners`` has shape (m, 4, k); a triangle (A, B, C) is stored as the
    collapsed quad (A, B, C, C).
    """
    s = s[:, None]
    t = t[:, None]
    c0, c1, c2, c3 = corners[:, 0], corners[:, 1], corners[:, 2], corners[:, 3]
    return (1 - s) * (1 - t) * c0 + s * (1 - t) * c1 + s * t * c2 + (1 - s) * t * c3


def angle_of(z):
    return np.arctan2(np.imag(z), np.real(z))


def unit_normalize(z, tol: float = 1e-6):
    """Return z / |z| and the maximal deviation of |z| from 1."""
    z = np.asarray(z, dtype=complex)
    mod = np.abs(z)
    dev = float(np.max(np.abs(mod - 1.0))) if mod.size else 0.0
    return z / np.where(mod > 0, mod, 1.0), dev


def solid_angle_form(y, a, b):
    """The area form of the unit sphere, extended to R^3 minus the origin."""
    r = np.linalg.norm(y, axis=1)
    return np.einsum("ij,ij->i", y, np.cross(a, b)) / r**3


__all__ = [
    "QuadConfig",
    "DEFAULT_QUAD",
    "gauss_legendre_rule",
    "integrate_boxes",
    "integrate_cells",
    "gauss_legendre_levels",
    "central_diff",
    "mixed_diff",
    "diff4",
    "pullback_integrand",
    "integrate_pullback_1form",
    "integrate_pullback_2form",
    "integrate_pullback_3form",
    "bilinear",
]


def integrate_cells(map_fn, form_fn, keys, dim: int, quad: QuadConfig = DEFAULT_QUAD, step: float = FD_STEP):
    """Integrals of keyed forms pulled back over a batch of unit cells.

    ``map_fn(idx, x)`` sends unit coordinates ``x`` of cells ``idx`` to
    ambient points; ``form_fn(key, y, *vectors)`` evaluates the form attached
    to ``keys[cell]``. Cells sharing a key are evaluated together. Returns
    ``(values, errors)`` with one entry per cell.
    """
    keys = list(keys)
    if not keys:
        return np.zeros(0), np.zeros(0)
    uniq = sorted(set(keys))
    key_id = np.array([uniq.index(k) for k in keys])

    def form(idx, y, *vecs):
        out = np.empty(len(y))
        kid = key_id[idx]
        for u in np.unique(kid):
            m = kid == u
            out[m] = form_fn(uniq[u], y[m], *[v[m] for v in vecs])
        return out

    f = pullback_integrand(map_fn, form, dim, step)
    n = len(keys)
    return integrate_boxes(f, np.zeros((n, dim)), np.ones((n, dim)), quad.order(dim), quad)
