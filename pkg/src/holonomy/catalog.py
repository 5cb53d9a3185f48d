"""Built-in target manifolds with covers, bundle/gerbe data and standard maps."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .cech import BundleData, Chart, ChartCover, GerbeData, check_bundle_cocycle, check_gerbe_cocycle
from .errors import BadParameter, GeometryError
from .numerics import solid_angle_form
from .partitions.surface import SurfaceDomain

TWO_PI = 2.0 * math.pi
CHECK_TOL = 1e-6


@dataclass(frozen=True)
class MapSpec:
    """A standard map: ``kind`` is point, path, loop, surface or volume.

    Paths carry their parameter interval in ``interval``, loops are
    parametrized by [0, 2 pi), surfaces by ``domain``, volumes by the box
    ``interval = (lower, upper)``.
    """

    kind: str
    fn: Callable
    interval: tuple = (0.0, 1.0)
    domain: Optional[SurfaceDomain] = None


@dataclass(frozen=True)
class CatalogEntry:
    name: str
    params: dict
    cover: ChartCover
    bundle: Optional[BundleData] = None
    gerbe: Optional[GerbeData] = None
    maps: dict = field(default_factory=dict)
    random_path: Optional[Callable] = None
    random_surface: Optional[Callable] = None
    random_point: Optional[Callable] = None
    random_loop: Optional[Callable] = None

    @property
    def projection(self):
        return self.cover.projection

    def map(self, name: str, **params) -> MapSpec:
        if name not in self.maps:
            raise GeometryError(f"{self.name} has no map {name!r}; choose from {sorted(self.maps)}")
        return self.maps[name](**params)


def _rows(fn):
    """Wrap a scalar-parameter formula returning a tuple of coordinate arrays."""
    def wrapped(t):
        t = np.asarray(t, dtype=float)
        return np.stack(np.broadcast_arrays(*fn(t)), axis=-1)
    return wrapped


def _rows2(fn):
    def wrapped(x):
        x = np.atleast_2d(np.asarray(x, dtype=float))
        return np.stack(np.broadcast_arrays(*fn(x[:, 0], x[:, 1])), axis=-1)
    return wrapped


def _constant(point):
    point = np.asarray(point, dtype=float)
    return lambda t: np.repeat(point[None], len(np.atleast_1d(np.asarray(t))), axis=0)


def _verify(entry: CatalogEntry) -> CatalogEntry:
    if entry.bundle is not None:
        rep = check_bundle_cocycle(entry.bundle, CHECK_TOL)
        if not rep.passed:
            raise GeometryError(f"{entry.name}: bundle data fail the cocycle check: {rep.residuals}")
    if entry.gerbe is not None:
        rep = check_gerbe_cocycle(entry.gerbe, CHECK_TOL)
        if not rep.passed:
            raise GeometryError(f"{entry.name}: gerbe data fail the cocycle check: {rep.residuals}")
    return entry


# ---------------------------------------------------------------------------
# circle


def circle_flat(alpha_right: float = math.pi / 3, alpha_left: float = 0.0, verify: bool = True) -> CatalogEntry:
    """Unit circle in R^2 with a lower and an upper arc chart and a flat connection.

    The charts overlap in two arcs around (1, 0) and (-1, 0); g_01 equals
    exp(i alpha_right) on the right arc and exp(i alpha_left) on the left.
    """
    s = math.sin(0.3)

    def height(y):
        return y[:, 1] / np.linalg.norm(y, axis=1)

    a = np.linspace(0.0, TWO_PI, 96, endpoint=False)
    pts = np.stack([np.cos(a), np.sin(a)], axis=1)
    lower = lambda y: s - height(y)
    upper = lambda y: height(y) + s
    charts = (Chart(lower, pts[lower(pts) > 0], "lower"), Chart(upper, pts[upper(pts) > 0], "upper"))
    cover = ChartCover(2, 1, charts, projection=lambda y: y / np.linalg.norm(y, axis=1, keepdims=True),
                       tangent_frame=lambda y: np.stack([-y[:, 1], y[:, 0]], axis=1)[:, None, :]
                       / np.linalg.norm(y, axis=1)[:, None, None])

    def g(i, j, y):
        ang = np.where(y[:, 0] > 0, alpha_right, alpha_left)
        return np.exp(1j * ang * {(0, 1): 1, (1, 0): -1}.get((i, j), 0))

    bundle = BundleData(cover, g, lambda j, y, v: np.zeros(len(y)), curvature=lambda y, u, v: np.zeros(len(y)),
                        name="circle_flat")
    maps = {
        "loop": lambda: MapSpec("loop", _rows(lambda t: (np.cos(t), np.sin(t)))),
        "arc": lambda a=0.0, b=math.pi: MapSpec("path", _rows(lambda t: (np.cos(t), np.sin(t))), (a, b)),
        "constant": lambda angle=0.0: MapSpec("point", _constant([math.cos(angle), math.sin(angle)])),
    }

    def random_path(rng):
        t0 = rng.uniform(0, TWO_PI)
        span = rng.uniform(-TWO_PI, TWO_PI)
        w = rng.uniform(-0.15, 0.15)
        return _rows(lambda t: (np.cos(t0 + span * t + w * np.sin(TWO_PI * t)),
                                np.sin(t0 + span * t + w * np.sin(TWO_PI * t)))), 0.0, 1.0

    def random_point(rng):
        t = rng.uniform(0, TWO_PI)
        return np.array([math.cos(t), math.sin(t)])

    entry = CatalogEntry("circle_flat", {"alpha_right": alpha_right, "alpha_left": alpha_left}, cover,
                         bundle=bundle, maps=maps, random_path=random_path, random_point=random_point)
    return _verify(entry) if verify else entry


# ---------------------------------------------------------------------------
# sphere


def fibonacci_sphere(n: int) -> np.ndarray:
    k = np.arange(n) + 0.5
    z = 1.0 - 2.0 * k / n
    phi = k * math.pi * (3.0 - math.sqrt(5.0))
    r = np.sqrt(1.0 - z * z)
    return np.stack([r * np.cos(phi), r * np.sin(phi), z], axis=1)


def _sphere_frame(y):
    n = y / np.linalg.norm(y, axis=1, keepdims=True)
    ref = np.where(np.abs(n[:, 2:3]) < 0.9, np.array([[0.0, 0.0, 1.0]]), np.array([[1.0, 0.0, 0.0]]))
    e1 = np.cross(ref, n)
    e1 /= np.linalg.norm(e1, axis=1, keepdims=True)
    e2 = np.cross(n, e1)
    return np.stack([e1, e2], axis=1)


def sphere_point(theta, phi):
    return (np.sin(theta) * np.cos(phi), np.sin(theta) * np.sin(phi), np.cos(theta))


def sphere_monopole(n: int = 1, verify: bool = True) -> CatalogEntry:
    """Unit sphere with north/south charts and the charge-n monopole bundle.

    Chart N is {z > -1/2}, chart S is {z < 1/2}; their overlap is the band
    of colatitudes (pi/3, 2 pi/3).  The potentials are regular on their
    charts and the total flux is 2 pi n, which with i(A_S - A_N) = d log g_NS
    fixes g_NS = exp(-i n phi) and g_SN = exp(i n phi).
    """
    if not float(n).is_integer():
        raise BadParameter(f"monopole charge must be an integer, got {n}")
    n = int(n)

    def zr(y):
        return y[:, 2] / np.linalg.norm(y, axis=1)

    north = lambda y: zr(y) + 0.5
    south = lambda y: 0.5 - zr(y)
    pts = fibonacci_sphere(400)
    charts = (Chart(north, pts[north(pts) > 0], "N"), Chart(south, pts[south(pts) > 0], "S"))
    cover = ChartCover(3, 2, charts, projection=lambda y: y / np.linalg.norm(y, axis=1, keepdims=True),
                       tangent_frame=_sphere_frame)

    def g(i, j, y):
        phi = np.arctan2(y[:, 1], y[:, 0])
        return np.exp(1j * n * phi * {(1, 0): 1, (0, 1): -1}.get((i, j), 0))

    def A(j, y, v):
        r = np.linalg.norm(y, axis=1)
        twist = y[:, 0] * v[:, 1] - y[:, 1] * v[:, 0]
        if j == 0:
            return 0.5 * n * twist / (r * (r + y[:, 2]))
        return -0.5 * n * twist / (r * (r - y[:, 2]))

    curvature = lambda y, a, b: 0.5 * n * solid_angle_form(y, a, b)
    bundle = BundleData(cover, g, A, curvature=curvature, name=f"sphere_monopole(n={n})")

    def latitude(theta0=math.pi / 2):
        return MapSpec("loop", _rows(lambda t: sphere_point(theta0, t)))

    def cap(theta0=math.pi / 2):
        return MapSpec("surface", _rows2(lambda u, v: sphere_point(u * theta0, v)),
                       domain=SurfaceDomain("disk", (0.0, 1.0), (0.0, TWO_PI)))

    def south_cap(theta0=math.pi / 2):
        # rotation by pi about the x axis keeps the outward orientation
        def f(u, v):
            x, y, z = sphere_point(u * theta0, v)
            return x, -y, -z
        return MapSpec("surface", _rows2(f), domain=SurfaceDomain("disk", (0.0, 1.0), (0.0, TWO_PI)))

    def annulus(theta1=math.pi / 4, theta2=3 * math.pi / 4):
        return MapSpec("surface", _rows2(lambda u, v: sphere_point(theta1 + u * (theta2 - theta1), v)),
                       domain=SurfaceDomain("cylinder", (0.0, 1.0), (0.0, TWO_PI)))

    maps = {
        "equator": lambda: latitude(math.pi / 2),
        "latitude": latitude,
        "equator_path": lambda: MapSpec("path", _rows(lambda t: sphere_point(math.pi / 2, t)), (0.0, TWO_PI)),
        "meridian": lambda phi0=0.0: MapSpec("path", _rows(lambda t: sphere_point(t, phi0)), (0.0, math.pi)),
        "cap": cap,
        "south_cap": south_cap,
        "annulus": annulus,
        "sphere": lambda: MapSpec("surface", _rows2(lambda u, v: sphere_point(u, v)),
                                  domain=SurfaceDomain("sphere", (0.0, math.pi), (0.0, TWO_PI))),
        "constant": lambda theta=math.pi / 2, phi=0.0: MapSpec("point", _constant(sphere_point(theta, phi))),
    }

    def random_path(rng):
        # a smooth random curve pushed onto the sphere
        c = rng.normal(size=(4, 3))
        c[0] /= np.linalg.norm(c[0])
        c[1:] *= np.array([[1.2], [0.8], [0.5]])
        def p(t):
            t = np.asarray(t, dtype=float)[:, None]
            y = c[0] + c[1] * t + c[2] * np.sin(math.pi * t) + c[3] * t * t
            return y / np.linalg.norm(y, axis=1, keepdims=True)
        return p, 0.0, 1.0

    def random_surface(rng):
        # random cap or annulus about a random axis
        axis = rng.normal(size=3)
        axis /= np.linalg.norm(axis)
        e1 = np.cross(axis, [0.3, -0.5, 0.8])
        e1 /= np.linalg.norm(e1)
        e2 = np.cross(axis, e1)
        R = np.stack([e1, e2, axis], axis=1)
        if rng.random() < 0.5:
            th = rng.uniform(0.3, 2.8)
            f = lambda u, v: sphere_point(u * th, v)
            dom = SurfaceDomain("disk", (0.0, 1.0), (0.0, TWO_PI))
        else:
            t1 = rng.uniform(0.2, 1.4)
            t2 = rng.uniform(t1 + 0.3, 2.9)
            f = lambda u, v: sphere_point(t1 + u * (t2 - t1), v)
            dom = SurfaceDomain("cylinder", (0.0, 1.0), (0.0, TWO_PI))
        base = _rows2(f)
        return (lambda x: base(x) @ R.T), dom

    def random_point(rng):
        y = rng.normal(size=3)
        return y / np.linalg.norm(y)

    entry = CatalogEntry("sphere_monopole", {"n": n}, cover, bundle=bundle, maps=maps,
                         random_path=random_path, random_surface=random_surface, random_point=random_point)
    return _verify(entry) if verify else entry


# ---------------------------------------------------------------------------
# torus in R^4: (cos u, sin u, cos v, sin v)


def torus_point(u, v):
    return (np.cos(u), np.sin(u), np.cos(v), np.sin(v))


def _torus_angles(y):
    return np.arctan2(y[:, 1], y[:, 0]), np.arctan2(y[:, 3], y[:, 2])


def _du(y, a):
    return (y[:, 0] * a[:, 1] - y[:, 1] * a[:, 0]) / (y[:, 0] ** 2 + y[:, 1] ** 2)


def _dv(y, a):
    return (y[:, 2] * a[:, 3] - y[:, 3] * a[:, 2]) / (y[:, 2] ** 2 + y[:, 3] ** 2)


def _dudv(y, a, b):
    return _du(y, a) * _dv(y, b) - _du(y, b) * _dv(y, a)


def _torus_project(y):
    y = np.array(y, dtype=float)
    y[:, :2] /= np.linalg.norm(y[:, :2], axis=1, keepdims=True)
    y[:, 2:] /= np.linalg.norm(y[:, 2:], axis=1, keepdims=True)
    return y


def _torus_frame(y):
    z = np.zeros(len(y))
    r1 = np.hypot(y[:, 0], y[:, 1])
    r2 = np.hypot(y[:, 2], y[:, 3])
    eu = np.stack([-y[:, 1] / r1, y[:, 0] / r1, z, z], axis=1)
    ev = np.stack([z, z, -y[:, 3] / r2, y[:, 2] / r2], axis=1)
    return np.stack([eu, ev], axis=1)


def _torus_samples(k: int = 24) -> np.ndarray:
    a = (np.arange(k) + 0.37) * TWO_PI / k
    U, V = np.meshgrid(a, a + 0.11, indexing="ij")
    return np.stack(torus_point(U.ravel(), V.ravel()), axis=1)


def _torus_maps():
    def identity(shift_u=0.0, shift_v=0.0):
        return MapSpec("surface", _rows2(lambda u, v: torus_point(u + shift_u, v + shift_v)),
                       domain=SurfaceDomain("torus", (0.0, TWO_PI), (0.0, TWO_PI)))

    return {
        "identity": identity,
        "meridian_loop": lambda u0=0.0: MapSpec("loop", _rows(lambda t: torus_point(u0, t))),
        "longitude_loop": lambda v0=0.0: MapSpec("loop", _rows(lambda t: torus_point(t, v0))),
        "half_torus": lambda lower=0.0, upper=math.pi: MapSpec(
            "surface", _rows2(lambda u, v: torus_point(u, v)),
            domain=SurfaceDomain("cylinder", (lower, upper), (0.0, TWO_PI))),
        "constant": lambda u=0.3, v=0.2: MapSpec("point", _constant(torus_point(u, v))),
    }


def _torus_random_surface(rng):
    """A random smooth map into the torus: either a patch or a wrapped degree-one map."""
    if rng.random() < 0.5:
        u0, v0 = rng.uniform(0, TWO_PI, size=2)
        a, b, c, d = rng.uniform(0.5, 2.5), rng.uniform(-0.4, 0.4), rng.uniform(-0.4, 0.4), rng.uniform(0.5, 2.5)
        w = rng.uniform(-0.3, 0.3)
        f = lambda s, t: torus_point(u0 + a * s + b * t + w * np.sin(3 * t), v0 + c * s + d * t + w * s * t)
        return _rows2(f), SurfaceDomain("rectangle", (0.0, 1.0), (0.0, 1.0))
    u0, v0 = rng.uniform(0, TWO_PI, size=2)
    a1, a2 = rng.uniform(-0.3, 0.3, size=2)
    f = lambda s, t: torus_point(s + u0 + a1 * np.sin(t), t + v0 + a2 * np.sin(s))
    return _rows2(f), SurfaceDomain("torus", (0.0, TWO_PI), (0.0, TWO_PI))


def _torus_random_loop(rng):
    """A random smooth loop winding once around the torus in a random direction."""
    u0, v0 = rng.uniform(0, TWO_PI, size=2)
    k1, k2 = [(1, 0), (0, 1), (1, 1)][int(rng.integers(3))]
    w1, w2 = rng.uniform(-0.3, 0.3, size=2)
    return _rows(lambda t: torus_point(u0 + k1 * t + w1 * np.sin(t), v0 + k2 * t + w2 * np.sin(2 * t)))


def _torus_random_point(rng):
    u, v = rng.uniform(0, TWO_PI, size=2)
    return np.array(torus_point(u, v))


def torus_global_B(theta: float = 1.0, verify: bool = True) -> CatalogEntry:
    """Flat torus with a single chart and the gerbe F = (theta / 4 pi^2) du ^ dv."""
    pts = _torus_samples(12)
    charts = (Chart(lambda y: np.ones(len(y)), pts, "T2"),)
    cover = ChartCover(4, 2, charts, projection=_torus_project, tangent_frame=_torus_frame)
    c = theta / (4 * math.pi ** 2)
    gerbe = GerbeData(cover, lambda i, j, k, y: np.ones(len(y), dtype=complex),
                      lambda j, k, y, v: np.zeros(len(y)), lambda k, y, a, b: c * _dudv(y, a, b),
                      curvature=lambda y, a, b, cc: np.zeros(len(y)), name=f"torus_global_B(theta={theta})")
    entry = CatalogEntry("torus_global_B", {"theta": theta}, cover, gerbe=gerbe, maps=_torus_maps(),
                         random_surface=_torus_random_surface, random_point=_torus_random_point,
                         random_loop=_torus_random_loop)
    return _verify(entry) if verify else entry


def _three_chart_torus_cover() -> ChartCover:
    """U0 = {cos u > -s}, U1 = {cos u < s}, U2 = {sin u > c, cos v > c}.

    The triple overlap is the single rectangle |u - pi/2| < 0.3, |v| < 0.9.
    """
    s, c = math.sin(0.3), math.cos(0.9)

    def cu(y):
        return y[:, 0] / np.hypot(y[:, 0], y[:, 1])

    m0 = lambda y: cu(y) + s
    m1 = lambda y: s - cu(y)
    m2 = lambda y: np.minimum(y[:, 1] / np.hypot(y[:, 0], y[:, 1]) - c, y[:, 2] / np.hypot(y[:, 2], y[:, 3]) - c)
    pts = _torus_samples(24)
    # extra samples concentrated on the triple overlap
    a = np.linspace(math.pi / 2 - 0.27, math.pi / 2 + 0.27, 7)
    b = np.linspace(-0.85, 0.85, 9)
    U, V = np.meshgrid(a, b, indexing="ij")
    pts = np.concatenate([pts, np.stack(torus_point(U.ravel(), V.ravel()), axis=1)])
    charts = tuple(Chart(m, pts[m(pts) > 0], name) for m, name in ((m0, "U0"), (m1, "U1"), (m2, "U2")))
    return ChartCover(4, 2, charts, projection=_torus_project, tangent_frame=_torus_frame,
                      declared_overlaps=frozenset(map(frozenset, [(0, 1), (0, 2), (1, 2), (0, 1, 2)])))


def _parity(i, j, k) -> int:
    """+1 for even permutations of three distinct indices, -1 for odd, 0 otherwise."""
    if len({i, j, k}) < 3:
        return 0
    return 1 if (i, j, k) in ((0, 1, 2), (1, 2, 0), (2, 0, 1)) else -1


def torus_flat_gerbe(omega: float = 1.0, verify: bool = True) -> CatalogEntry:
    """Flat torus, 3-chart cover, constant cocycle g_012 = exp(i omega), A2 = F = 0."""
    cover = _three_chart_torus_cover()
    gerbe = GerbeData(cover, lambda i, j, k, y: np.full(len(y), np.exp(1j * omega * _parity(i, j, k))),
                      lambda j, k, y, v: np.zeros(len(y)), lambda k, y, a, b: np.zeros(len(y)),
                      curvature=lambda y, a, b, c: np.zeros(len(y)), name=f"torus_flat_gerbe(omega={omega})")
    entry = CatalogEntry("torus_flat_gerbe", {"omega": omega}, cover, gerbe=gerbe, maps=_torus_maps(),
                         random_surface=_torus_random_surface, random_point=_torus_random_point,
                         random_loop=_torus_random_loop)
    return _verify(entry) if verify else entry


# gauge functions lambda_ij(u, v) with partials, and 1-forms eta_k = p du + q dv
_LAMBDA = {
    (0, 1): (lambda u, v: 0.7 * np.sin(u) + 0.3 * np.cos(2 * v),
             lambda u, v: 0.7 * np.cos(u), lambda u, v: -0.6 * np.sin(2 * v)),
    (0, 2): (lambda u, v: 0.5 * np.cos(v) + 0.2 * np.sin(u + v),
             lambda u, v: 0.2 * np.cos(u + v), lambda u, v: -0.5 * np.sin(v) + 0.2 * np.cos(u + v)),
    (1, 2): (lambda u, v: 0.4 * np.sin(u - v),
             lambda u, v: 0.4 * np.cos(u - v), lambda u, v: -0.4 * np.cos(u - v)),
}
_ETA = {
    0: (lambda u, v: 0.3 * np.sin(v), lambda u, v: 0.1 * np.cos(u), lambda u, v: -0.1 * np.sin(u) - 0.3 * np.cos(v)),
    1: (lambda u, v: 0.0 * u, lambda u, v: 0.2 * np.cos(u), lambda u, v: -0.2 * np.sin(u)),
    2: (lambda u, v: 0.25 * np.sin(u) * np.cos(v), lambda u, v: -0.15 * np.sin(v),
        lambda u, v: 0.25 * np.sin(u) * np.sin(v)),
}


def _lam(i, j, u, v, part):
    if i == j:
        return 0.0 * u
    if (i, j) in _LAMBDA:
        return _LAMBDA[(i, j)][part](u, v)
    return -_LAMBDA[(j, i)][part](u, v)


def torus_gauge_gerbe(theta: float = 1.0, omega: float = 1.0, verify: bool = True) -> CatalogEntry:
    """Three-chart torus gerbe with nonzero A2 and chart-dependent F.

    Obtained from the global gerbe F = (theta / 4 pi^2) du ^ dv and the
    constant cocycle exp(i omega) by a gauge transformation with functions
    lambda_ij and 1-forms eta_k:  g_ijk -> g_ijk exp(i(l_ij + l_jk + l_ki)),
    A_jk -> -d l_jk + eta_k - eta_j,  F_k -> F + d eta_k.
    """
    cover = _three_chart_torus_cover()
    c = theta / (4 * math.pi ** 2)

    def g3(i, j, k, y):
        u, v = _torus_angles(y)
        return np.exp(1j * (omega * _parity(i, j, k) + _lam(i, j, u, v, 0) + _lam(j, k, u, v, 0)
                            + _lam(k, i, u, v, 0)))

    def A2(j, k, y, a):
        u, v = _torus_angles(y)
        du, dv = _du(y, a), _dv(y, a)
        out = -(_lam(j, k, u, v, 1) * du + _lam(j, k, u, v, 2) * dv)
        if j != k:
            pk, qk, _ = _ETA[k]
            pj, qj, _ = _ETA[j]
            out = out + (pk(u, v) - pj(u, v)) * du + (qk(u, v) - qj(u, v)) * dv
        return out

    def F(k, y, a, b):
        u, v = _torus_angles(y)
        return (c + _ETA[k][2](u, v)) * _dudv(y, a, b)

    gerbe = GerbeData(cover, g3, A2, F, curvature=lambda y, a, b, cc: np.zeros(len(y)),
                      name=f"torus_gauge_gerbe(theta={theta}, omega={omega})")
    entry = CatalogEntry("torus_gauge_gerbe", {"theta": theta, "omega": omega}, cover, gerbe=gerbe,
                         maps=_torus_maps(), random_surface=_torus_random_surface,
                         random_point=_torus_random_point, random_loop=_torus_random_loop)
    return _verify(entry) if verify else entry


# ---------------------------------------------------------------------------
# box in R^3


def box_gerbe(charts: int = 2, verify: bool = True) -> CatalogEntry:
    """Unit box with F_0 = x dy ^ dz, so G = dx ^ dy ^ dz.

    With two charts ({x < 0.6} and {x > 0.4}) the second chart carries
    F_1 = F_0 + dA_01 with A_01 = (z sin y / 2) dx.
    """
    if charts not in (1, 2):
        raise BadParameter(f"box_gerbe supports 1 or 2 charts, got {charts}")
    g = np.linspace(-0.05, 1.05, 7)
    pts = np.stack(np.meshgrid(g, g, g, indexing="ij"), axis=-1).reshape(-1, 3)
    if charts == 1:
        ms = (lambda y: np.ones(len(y)),)
    else:
        ms = (lambda y: 0.6 - y[:, 0], lambda y: y[:, 0] - 0.4)
    cover = ChartCover(3, 3, tuple(Chart(m, pts[m(pts) > 0], f"B{k}") for k, m in enumerate(ms)))

    def a01(y, a):
        return 0.5 * y[:, 2] * np.sin(y[:, 1]) * a[:, 0]

    def A2(j, k, y, a):
        if j == k:
            return np.zeros(len(y))
        return a01(y, a) if (j, k) == (0, 1) else -a01(y, a)

    def F(k, y, a, b):
        base = y[:, 0] * (a[:, 1] * b[:, 2] - a[:, 2] * b[:, 1])
        if k == 0:
            return base
        # d(z sin y / 2) ^ dx
        dyx = a[:, 1] * b[:, 0] - a[:, 0] * b[:, 1]
        dzx = a[:, 2] * b[:, 0] - a[:, 0] * b[:, 2]
        return base + 0.5 * (y[:, 2] * np.cos(y[:, 1]) * dyx + np.sin(y[:, 1]) * dzx)

    def G(y, a, b, c):
        return np.einsum("ij,ij->i", a, np.cross(b, c))

    gerbe = GerbeData(cover, lambda i, j, k, y: np.ones(len(y), dtype=complex), A2, F, curvature=G,
                      name=f"box_gerbe(charts={charts})")
    maps = {
        "cube": lambda: MapSpec("volume", lambda x: np.atleast_2d(x), ((0.0, 0.0, 0.0), (1.0, 1.0, 1.0))),
        "constant": lambda x=0.5, y=0.5, z=0.5: MapSpec("point", _constant([x, y, z])),
    }

    def random_point(rng):
        return rng.uniform(0.0, 1.0, size=3)

    entry = CatalogEntry("box_gerbe", {"charts": charts}, cover, gerbe=gerbe, maps=maps, random_point=random_point)
    return _verify(entry) if verify else entry


CATALOG = {
    "circle_flat": circle_flat,
    "sphere_monopole": sphere_monopole,
    "torus_global_B": torus_global_B,
    "torus_flat_gerbe": torus_flat_gerbe,
    "torus_gauge_gerbe": torus_gauge_gerbe,
    "box_gerbe": box_gerbe,
}


def get_entry(name: str, **params) -> CatalogEntry:
    if name not in CATALOG:
        raise BadParameter(f"unknown geometry {name!r}; choose from {sorted(CATALOG)}")
    try:
        return CATALOG[name](**params)
    except TypeError as exc:
        raise BadParameter(f"bad parameters for {name}: {exc}") from exc
