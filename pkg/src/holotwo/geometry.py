"""Parametrized paths, algebra-valued forms and curvature evaluation.

Points and tangents are complex arrays of shape ``(..., d)``; real manifolds
simply use real-valued entries.  Every evaluator is vectorized over leading
axes.

Derivatives take a ``side`` argument: ``+1`` and ``-1`` select one-sided
limits at breakpoints, ``0`` averages both limits there.  Away from
breakpoints ``side`` is ignored.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
from scipy.optimize import brentq

FD_STEP = 1e-5
BOUNDARY_SAMPLES = 32
BOUNDARY_TOL = 1e-10


class GeometryError(ValueError):
    pass


class PoleProximityError(GeometryError):
    """A form was evaluated too close to one of its poles."""


class EndpointError(GeometryError):
    """A 2-path or 3-path violates its boundary conditions."""


def _arr(t) -> np.ndarray:
    return np.asarray(t, dtype=float)


def _near(t: np.ndarray, b: float, tol: float = 1e-12) -> np.ndarray:
    return np.abs(t - b) <= tol


def fd_derivative(f: Callable, t, breaks: Sequence[float], side: int = 0, delta: float = FD_STEP) -> np.ndarray:
    """Second-order finite difference of ``f`` at ``t`` respecting breakpoints.

    Central differences are used unless a breakpoint lies within ``delta``;
    then a one-sided three-point rule is used on the requested side.
    """
    t = _arr(t)
    central = (f(t + delta) - f(t - delta)) / (2 * delta)
    fwd = (-3 * f(t) + 4 * f(t + delta) - f(t + 2 * delta)) / (2 * delta)
    bwd = (3 * f(t) - 4 * f(t - delta) + f(t - 2 * delta)) / (2 * delta)
    ext = (slice(None),) * t.ndim + (None,)
    out = central
    lo = t - 2 * delta <= 0.0
    hi = t + 2 * delta >= 1.0
    out = np.where(lo[ext], fwd, out)
    out = np.where(hi[ext], bwd, out)
    for b in breaks:
        close = np.abs(t - b) < 2 * delta
        if not close.any():
            continue
        left = t < b - 1e-14
        right = t > b + 1e-14
        on = ~left & ~right
        if side > 0:
            pick = np.where((right | on)[ext], fwd, bwd)
        elif side < 0:
            pick = np.where((left | on)[ext], bwd, fwd)
        else:
            pick = np.where(on[ext], 0.5 * (fwd + bwd), np.where(left[ext], bwd, fwd))
        out = np.where(close[ext], pick, out)
    return out


def _split(t: np.ndarray, at: float):
    """Masks for the left and right piece of a path split at ``at``; ``on`` marks ``t == at``."""
    on = _near(t, at)
    left = (t < at) & ~on
    right = (t > at) & ~on
    return left, right, on


# ---------------------------------------------------------------------------
# 1-paths


@dataclass(eq=False)
class Path1:
    """A piecewise smooth path ``[0, 1] -> R^d`` (or ``C^d``)."""

    fn: Callable[[np.ndarray], np.ndarray]
    deriv: Callable[[np.ndarray, int], np.ndarray] | None = None
    breakpoints: tuple[float, ...] = ()
    name: str = "path"

    def __call__(self, t) -> np.ndarray:
        return np.asarray(self.fn(_arr(t)))

    def velocity(self, t, side: int = 0) -> np.ndarray:
        t = _arr(t)
        if self.deriv is not None:
            return np.asarray(self.deriv(t, side))
        return fd_derivative(self.fn, t, self.breakpoints, side)

    @property
    def dim(self) -> int:
        return int(np.shape(self(0.0))[-1])

    @property
    def start(self) -> np.ndarray:
        return self(0.0)

    @property
    def end(self) -> np.ndarray:
        return self(1.0)

    def concat(self, other: "Path1", tol: float = BOUNDARY_TOL) -> "Path1":
        """``self`` then ``other``, each at double speed."""
        if np.max(np.abs(self.end - other.start)) > tol:
            raise EndpointError(f"cannot concatenate {self.name} and {other.name}: endpoints differ")
        a, b = self, other

        def fn(t):
            t = _arr(t)
            ext = (slice(None),) * t.ndim + (None,)
            return np.where((t <= 0.5)[ext], a(np.clip(2 * t, 0, 1)), b(np.clip(2 * t - 1, 0, 1)))

        def deriv(t, side):
            t = _arr(t)
            ext = (slice(None),) * t.ndim + (None,)
            left, _, on = _split(t, 0.5)
            t0, t1 = np.clip(2 * t, 0, 1), np.clip(2 * t - 1, 0, 1)
            va, vb = 2 * a.velocity(t0, side), 2 * b.velocity(t1, side)
            va_e, vb_e = 2 * a.velocity(t0, -1), 2 * b.velocity(t1, 1)
            at = vb_e if side > 0 else va_e if side < 0 else 0.5 * (va_e + vb_e)
            return np.where(on[ext], at, np.where(left[ext], va, vb))

        bps = tuple(x / 2 for x in a.breakpoints) + (0.5,) + tuple(0.5 + x / 2 for x in b.breakpoints)
        return Path1(fn, deriv, bps, f"{a.name}*{b.name}")

    def reverse(self) -> "Path1":
        g = self
        return Path1(lambda t: g(1 - _arr(t)), lambda t, side: -g.velocity(1 - _arr(t), -side),
                     tuple(sorted(1 - x for x in g.breakpoints)), f"{g.name}^-1")

    def reparametrize(self, phi: Callable, dphi: Callable) -> "Path1":
        """``t -> self(phi(t))`` for a smooth increasing bijection ``phi`` of ``[0, 1]``."""
        g = self
        bps = tuple(brentq(lambda x, b=b: phi(x) - b, 0.0, 1.0) for b in g.breakpoints)

        def deriv(t, side):
            t = _arr(t)
            return g.velocity(phi(t), side) * np.asarray(dphi(t))[..., None]

        return Path1(lambda t: g(phi(_arr(t))), deriv, bps, f"{g.name}.phi")


def segment(a, b, name: str = "segment") -> Path1:
    a = np.asarray(a, dtype=complex)
    b = np.asarray(b, dtype=complex)
    return Path1(lambda t: a + _arr(t)[..., None] * (b - a),
                 lambda t, side: np.broadcast_to(b - a, _arr(t).shape + a.shape).copy(), (), name)


def constant_path(p, name: str = "const") -> Path1:
    p = np.asarray(p, dtype=complex)
    return Path1(lambda t: np.broadcast_to(p, _arr(t).shape + p.shape).copy(),
                 lambda t, side: np.zeros(_arr(t).shape + p.shape, dtype=complex), (), name)


def polyline(points: Sequence[Sequence[complex]], name: str = "polyline") -> Path1:
    """Uniform-time polyline through ``points``; corners are breakpoints."""
    pts = np.asarray(points, dtype=complex)
    k = len(pts) - 1
    if k < 1:
        raise GeometryError("a polyline needs at least two points")

    def piece(t):
        t = _arr(t)
        i = np.clip(np.floor(t * k).astype(int), 0, k - 1)
        return i, t * k - i

    def fn(t):
        i, r = piece(t)
        return pts[i] + r[..., None] * (pts[i + 1] - pts[i])

    def deriv(t, side):
        t = _arr(t)
        i, _ = piece(t)
        raw = t * k
        on = np.abs(raw - np.round(raw)) <= 1e-12
        j = np.round(raw).astype(int)
        right = np.clip(j, 0, k - 1)
        left = np.clip(j - 1, 0, k - 1)
        vr = k * (pts[right + 1] - pts[right])
        vl = k * (pts[left + 1] - pts[left])
        at = vr if side > 0 else vl if side < 0 else 0.5 * (vr + vl)
        at = np.where((j <= 0)[..., None], vr, np.where((j >= k)[..., None], vl, at))
        v = k * (pts[i + 1] - pts[i])
        return np.where(on[..., None], at, v)

    return Path1(fn, deriv, tuple(j / k for j in range(1, k)), name)


def bezier(control: Sequence[Sequence[complex]], name: str = "bezier") -> Path1:
    """Bezier curve with the given control points (Bernstein form)."""
    c = np.asarray(control, dtype=complex)
    n = len(c) - 1

    def bern(t, deg, coeffs):
        t = _arr(t)[..., None]
        j = np.arange(deg + 1)
        b = np.array([math.comb(deg, i) for i in range(deg + 1)], dtype=float)
        w = b * t ** j * (1 - t) ** (deg - j)
        return w @ coeffs

    def deriv(t, side):
        if n == 0:
            return np.zeros(_arr(t).shape + c.shape[1:], dtype=complex)
        return n * bern(t, n - 1, c[1:] - c[:-1])

    return Path1(lambda t: bern(t, n, c), deriv, (), name)


def circle_arc(center, radius: float, theta0: float, theta1: float) -> Path1:
    """A planar arc in ``C``: ``center + radius e^{i theta}``."""
    c = complex(center)
    dth = theta1 - theta0

    def fn(t):
        return (c + radius * np.exp(1j * (theta0 + dth * _arr(t))))[..., None]

    def deriv(t, side):
        return (1j * dth * radius * np.exp(1j * (theta0 + dth * _arr(t))))[..., None]

    return Path1(fn, deriv, (), "arc")


def config_point(n: int) -> np.ndarray:
    """Base point of the configuration space ``C(n)``: strands at ``0, 1, ..., n-1``."""
    return np.arange(n, dtype=complex)


def braid_generator(n: int, i: int, inverse: bool = False, base: np.ndarray | None = None,
                    eccentricity: float = 1.0) -> Path1:
    """Half-turn exchange of strands ``i`` and ``i+1`` (1-based).

    Both strands move on the ellipse through them, centered at their
    midpoint, with the given ratio of minor to major axis (1 is the
    circle); the others stay fixed.  ``inverse`` turns the other way.
    Exchanges with different positive eccentricities are homotopic rel
    endpoints through exchanges.
    """
    if not 1 <= i < n:
        raise GeometryError(f"no braid generator sigma_{i} on {n} strands")
    if eccentricity <= 0:
        raise GeometryError("eccentricity must be positive")
    z = config_point(n) if base is None else np.asarray(base, dtype=complex)
    a, b = i - 1, i
    mid = 0.5 * (z[a] + z[b])
    rad = 0.5 * (z[b] - z[a])
    sign = -1.0 if inverse else 1.0
    k = eccentricity

    def fn(t):
        t = _arr(t)
        out = np.broadcast_to(z, t.shape + z.shape).copy()
        rot = np.cos(np.pi * t) + 1j * sign * k * np.sin(np.pi * t)
        out[..., a] = mid - rad * rot
        out[..., b] = mid + rad * rot
        return out

    def deriv(t, side):
        t = _arr(t)
        out = np.zeros(t.shape + z.shape, dtype=complex)
        drot = np.pi * (-np.sin(np.pi * t) + 1j * sign * k * np.cos(np.pi * t))
        out[..., a] = -rad * drot
        out[..., b] = rad * drot
        return out

    return Path1(fn, deriv, (), f"sigma{i}" + ("^-1" if inverse else ""))


def strand_loop(n: int, i: int, j: int, radius: float = 0.25, base: np.ndarray | None = None) -> Path1:
    """Strand ``i`` travels once counterclockwise around strand ``j`` (1-based)."""
    z = config_point(n) if base is None else np.asarray(base, dtype=complex)
    a, b = i - 1, j - 1
    center = z[b]
    offset = z[a] - center
    if abs(abs(offset) - radius) > 1e-12:
        z = z.copy()
        z[a] = center + radius
        offset = radius
    theta0 = np.angle(offset)

    def fn(t):
        t = _arr(t)
        out = np.broadcast_to(z, t.shape + z.shape).copy()
        out[..., a] = center + radius * np.exp(1j * (theta0 + 2 * np.pi * t))
        return out

    def deriv(t, side):
        t = _arr(t)
        out = np.zeros(t.shape + z.shape, dtype=complex)
        out[..., a] = 2j * np.pi * radius * np.exp(1j * (theta0 + 2 * np.pi * t))
        return out

    return Path1(fn, deriv, (), f"loop{i}{j}")


# ---------------------------------------------------------------------------
# 2-paths


@dataclass(eq=False)
class Path2:
    """A 2-path ``Gamma(t, s)``: ``t`` runs along 1-paths, ``s`` across them.

    ``Gamma(0, s)`` and ``Gamma(1, s)`` are constant in ``s``.  The source
    1-path is ``Gamma(., 0)`` and the target is ``Gamma(., 1)``.
    """

    fn: Callable[[np.ndarray, np.ndarray], np.ndarray]
    d_t: Callable | None = None
    d_s: Callable | None = None
    t_breaks: tuple[float, ...] = ()
    s_breaks: tuple[float, ...] = ()
    name: str = "2-path"

    def __call__(self, t, s) -> np.ndarray:
        t, s = np.broadcast_arrays(_arr(t), _arr(s))
        return np.asarray(self.fn(t, s))

    def partial_t(self, t, s, side: int = 0) -> np.ndarray:
        t, s = np.broadcast_arrays(_arr(t), _arr(s))
        if self.d_t is not None:
            return np.asarray(self.d_t(t, s, side))
        return fd_derivative(lambda x: self.fn(x, s), t, self.t_breaks, side)

    def partial_s(self, t, s, side: int = 0) -> np.ndarray:
        t, s = np.broadcast_arrays(_arr(t), _arr(s))
        if self.d_s is not None:
            return np.asarray(self.d_s(t, s, side))
        return fd_derivative(lambda x: self.fn(t, x), s, self.s_breaks, side)

    def gamma(self, s: float) -> Path1:
        """The 1-path ``t -> Gamma(t, s)``."""
        G = self
        return Path1(lambda t: G(t, np.full_like(_arr(t), s)),
                     lambda t, side: G.partial_t(t, np.full_like(_arr(t), s), side),
                     self.t_breaks, f"{self.name}[s={s}]")

    @property
    def source(self) -> Path1:
        return self.gamma(0.0)

    @property
    def target(self) -> Path1:
        return self.gamma(1.0)

    def check_endpoints(self, samples: int = BOUNDARY_SAMPLES, tol: float = BOUNDARY_TOL) -> float:
        s = np.linspace(0.0, 1.0, samples)
        worst = 0.0
        for t in (0.0, 1.0):
            pts = self(np.full_like(s, t), s)
            worst = max(worst, float(np.max(np.abs(pts - pts[0]))))
        if worst > tol:
            raise EndpointError(f"{self.name}: endpoints move by {worst:.3g} along s")
        return worst

    # compositions
    def hcomp(self, other: "Path2") -> "Path2":
        """``self`` followed by ``other`` in the ``t`` direction."""
        if np.max(np.abs(self(1.0, 0.0) - other(0.0, 0.0))) > BOUNDARY_TOL:
            raise EndpointError("horizontal composition needs matching endpoints")
        a, b = self, other
        return _glue(a, b, "t")

    def vcomp(self, other: "Path2") -> "Path2":
        """``self`` then ``other`` in the ``s`` direction."""
        t = np.linspace(0.0, 1.0, BOUNDARY_SAMPLES)
        if np.max(np.abs(self(t, np.ones_like(t)) - other(t, np.zeros_like(t)))) > 1e-9:
            raise EndpointError("vertical composition needs target of the first = source of the second")
        return _glue(self, other, "s")

    def whisker_l(self, g: Path1) -> "Path2":
        """``g`` followed by this 2-path."""
        return thin_2path(g).hcomp(self)

    def whisker_r(self, g: Path1) -> "Path2":
        """This 2-path followed by ``g``."""
        return self.hcomp(thin_2path(g))

    def vreverse(self) -> "Path2":
        G = self
        return Path2(lambda t, s: G(t, 1 - s), lambda t, s, side: G.partial_t(t, 1 - s, side),
                     lambda t, s, side: -G.partial_s(t, 1 - s, -side), G.t_breaks,
                     tuple(sorted(1 - x for x in G.s_breaks)), f"{G.name}^v")

    def hreverse(self) -> "Path2":
        G = self
        return Path2(lambda t, s: G(1 - t, s), lambda t, s, side: -G.partial_t(1 - t, s, -side),
                     lambda t, s, side: G.partial_s(1 - t, s, side),
                     tuple(sorted(1 - x for x in G.t_breaks)), G.s_breaks, f"{G.name}^h")

    def reparametrize(self, phi: Callable | None = None, dphi: Callable | None = None,
                      psi: Callable | None = None, dpsi: Callable | None = None) -> "Path2":
        """Precompose with ``(t, s) -> (phi(t), psi(s))``."""
        G = self
        phi = phi or (lambda x: x)
        dphi = dphi or (lambda x: np.ones_like(x))
        psi = psi or (lambda x: x)
        dpsi = dpsi or (lambda x: np.ones_like(x))
        tb = tuple(brentq(lambda x, b=b: phi(x) - b, 0.0, 1.0) for b in G.t_breaks)
        sb = tuple(brentq(lambda x, b=b: psi(x) - b, 0.0, 1.0) for b in G.s_breaks)
        return Path2(
            lambda t, s: G(phi(t), psi(s)),
            lambda t, s, side: G.partial_t(phi(t), psi(s), side) * np.asarray(dphi(t))[..., None],
            lambda t, s, side: G.partial_s(phi(t), psi(s), side) * np.asarray(dpsi(s))[..., None],
            tb, sb, f"{G.name}.phi",
        )


def _glue(a: Path2, b: Path2, axis: str) -> Path2:
    """Concatenate two 2-paths along ``t`` or ``s`` at double speed."""

    def pick(x, y, fa, fb):
        x = _arr(x)
        ext = (slice(None),) * x.ndim + (None,)
        return np.where((x <= 0.5)[ext], fa, fb)

    def halves(x):
        x = _arr(x)
        return np.clip(2 * x, 0, 1), np.clip(2 * x - 1, 0, 1)

    if axis == "t":
        def fn(t, s):
            t0, t1 = halves(t)
            return pick(t, s, a(t0, s), b(t1, s))

        def d_t(t, s, side):
            t0, t1 = halves(t)
            left, right, on = _split(_arr(t), 0.5)
            va, vb = 2 * a.partial_t(t0, s, side), 2 * b.partial_t(t1, s, side)
            va_e, vb_e = 2 * a.partial_t(t0, s, -1), 2 * b.partial_t(t1, s, 1)
            at = vb_e if side > 0 else va_e if side < 0 else 0.5 * (va_e + vb_e)
            ext = (slice(None),) * _arr(t).ndim + (None,)
            return np.where(on[ext], at, np.where(left[ext], va, vb))

        def d_s(t, s, side):
            t0, t1 = halves(t)
            va, vb = a.partial_s(t0, s, side), b.partial_s(t1, s, side)
            left, right, on = _split(_arr(t), 0.5)
            ext = (slice(None),) * _arr(t).ndim + (None,)
            return np.where(on[ext], 0.5 * (va + vb), np.where(left[ext], va, vb))

        tb = tuple(x / 2 for x in a.t_breaks) + (0.5,) + tuple(0.5 + x / 2 for x in b.t_breaks)
        sb = tuple(sorted(set(a.s_breaks) | set(b.s_breaks)))
        return Path2(fn, d_t, d_s, tb, sb, f"{a.name}|{b.name}")

    def fn(t, s):
        s0, s1 = halves(s)
        return pick(s, t, a(t, s0), b(t, s1))

    def d_t(t, s, side):
        s0, s1 = halves(s)
        va, vb = a.partial_t(t, s0, side), b.partial_t(t, s1, side)
        left, right, on = _split(_arr(s), 0.5)
        ext = (slice(None),) * _arr(s).ndim + (None,)
        return np.where(on[ext], 0.5 * (va + vb), np.where(left[ext], va, vb))

    def d_s(t, s, side):
        s0, s1 = halves(s)
        left, right, on = _split(_arr(s), 0.5)
        va, vb = 2 * a.partial_s(t, s0, side), 2 * b.partial_s(t, s1, side)
        va_e, vb_e = 2 * a.partial_s(t, s0, -1), 2 * b.partial_s(t, s1, 1)
        at = vb_e if side > 0 else va_e if side < 0 else 0.5 * (va_e + vb_e)
        ext = (slice(None),) * _arr(s).ndim + (None,)
        return np.where(on[ext], at, np.where(left[ext], va, vb))

    tb = tuple(sorted(set(a.t_breaks) | set(b.t_breaks)))
    sb = tuple(x / 2 for x in a.s_breaks) + (0.5,) + tuple(0.5 + x / 2 for x in b.s_breaks)
    return Path2(fn, d_t, d_s, tb, sb, f"{a.name}/{b.name}")


def thin_2path(g: Path1) -> Path2:
    """The identity 2-path ``Gamma(t, s) = g(t)``."""
    return Path2(lambda t, s: g(t), lambda t, s, side: g.velocity(t, side),
                 lambda t, s, side: np.zeros(np.shape(t) + (g.dim,), dtype=complex),
                 g.breakpoints, (), f"id({g.name})")


def homotopy(g0: Path1, g1: Path1, ease: bool = True) -> Path2:
    """Straight-line homotopy ``(1 - c(s)) g0(t) + c(s) g1(t)`` with ``c`` smoothstep when ``ease``."""
    if np.max(np.abs(g0.start - g1.start)) > BOUNDARY_TOL or np.max(np.abs(g0.end - g1.end)) > BOUNDARY_TOL:
        raise EndpointError("a homotopy needs paths with common endpoints")
    if ease:
        c = lambda s: s * s * (3 - 2 * s)
        dc = lambda s: 6 * s * (1 - s)
    else:
        c = lambda s: s
        dc = lambda s: np.ones_like(s)
    tb = tuple(sorted(set(g0.breakpoints) | set(g1.breakpoints)))

    def fn(t, s):
        w = c(_arr(s))[..., None]
        return (1 - w) * g0(t) + w * g1(t)

    def d_t(t, s, side):
        w = c(_arr(s))[..., None]
        return (1 - w) * g0.velocity(t, side) + w * g1.velocity(t, side)

    def d_s(t, s, side):
        return dc(_arr(s))[..., None] * (g1(t) - g0(t))

    return Path2(fn, d_t, d_s, tb, (), f"H({g0.name},{g1.name})")


def map_2path(fn: Callable, d_t: Callable | None = None, d_s: Callable | None = None, name: str = "2-path") -> Path2:
    return Path2(fn, d_t, d_s, (), (), name)


@dataclass(eq=False)
class Path3:
    """A 3-path ``J(t, s, x)`` between the 2-paths ``J(., ., 0)`` and ``J(., ., 1)``."""

    fn: Callable[[np.ndarray, np.ndarray, np.ndarray], np.ndarray]
    name: str = "3-path"

    def __call__(self, t, s, x) -> np.ndarray:
        t, s, x = np.broadcast_arrays(_arr(t), _arr(s), _arr(x))
        return np.asarray(self.fn(t, s, x))

    def slice(self, x: float) -> Path2:
        J = self
        return Path2(lambda t, s: J(t, s, np.full_like(_arr(t), x)), None, None, (), (), f"{self.name}[x={x}]")

    @property
    def bottom(self) -> Path2:
        return self.slice(0.0)

    @property
    def top(self) -> Path2:
        return self.slice(1.0)

    def check_faces(self, samples: int = 8, tol: float = BOUNDARY_TOL) -> float:
        """Faces ``t = 0`` and ``t = 1`` are points; ``s = 0`` and ``s = 1`` are fixed in ``x``."""
        g = np.linspace(0.0, 1.0, samples)
        S, X = np.meshgrid(g, g, indexing="ij")
        worst = 0.0
        for t in (0.0, 1.0):
            pts = self(np.full_like(S, t), S, X)
            worst = max(worst, float(np.max(np.abs(pts - pts[0, 0]))))
        T, X2 = np.meshgrid(g, g, indexing="ij")
        for s in (0.0, 1.0):
            pts = self(T, np.full_like(T, s), X2)
            worst = max(worst, float(np.max(np.abs(pts - pts[:, :1]))))
        if worst > tol:
            raise EndpointError(f"{self.name}: face conditions violated by {worst:.3g}")
        return worst


def straight_3path(G0: Path2, G1: Path2) -> Path3:
    """Linear interpolation between two 2-paths with the same boundary."""
    return Path3(lambda t, s, x: (1 - x[..., None]) * G0(t, s) + x[..., None] * G1(t, s), f"H({G0.name},{G1.name})")


# ---------------------------------------------------------------------------
# JSON path specs


def path_from_spec(spec: dict) -> Path1:
    """``{"kind": "polyline"|"bezier"|"builtin", ...}``.

    Points are lists of coordinates; a coordinate is a number or ``[re, im]``.
    Builtins: ``segment`` (a, b), ``braid`` (n, i, inverse), ``loop``
    (n, i, j, radius), ``constant`` (point).
    """
    kind = spec.get("kind")
    if kind == "polyline":
        return polyline([_point(p) for p in spec["points"]])
    if kind == "bezier":
        return bezier([_point(p) for p in spec["points"]])
    if kind == "builtin":
        name = spec["name"]
        if name == "segment":
            return segment(_point(spec["a"]), _point(spec["b"]))
        if name == "braid":
            return braid_generator(int(spec["n"]), int(spec["i"]), bool(spec.get("inverse", False)))
        if name == "loop":
            return strand_loop(int(spec["n"]), int(spec["i"]), int(spec["j"]), float(spec.get("radius", 0.25)))
        if name == "constant":
            return constant_path(_point(spec["point"]))
        raise GeometryError(f"unknown builtin path {name!r}")
    if kind == "concat":
        parts = [path_from_spec(p) for p in spec["parts"]]
        out = parts[0]
        for p in parts[1:]:
            out = out.concat(p)
        return out
    raise GeometryError(f"unknown path kind {kind!r}")


def _point(p) -> np.ndarray:
    return np.array([complex(c[0], c[1]) if isinstance(c, (list, tuple)) else complex(c) for c in p])


# ---------------------------------------------------------------------------
# forms


@dataclass(eq=False)
class ConnectionForm:
    """A 1-form with values in a carrier: ``fn(points, tangents) -> (..., dim)``."""

    dim: int
    fn: Callable[[np.ndarray, np.ndarray], np.ndarray]
    name: str = "omega"

    def __call__(self, p, X) -> np.ndarray:
        return np.asarray(self.fn(np.asarray(p, dtype=complex), np.asarray(X, dtype=complex)), dtype=complex)


@dataclass(eq=False)
class TwoForm:
    """A 2-form with values in a carrier: ``fn(points, X, Y) -> (..., dim)``."""

    dim: int
    fn: Callable[[np.ndarray, np.ndarray, np.ndarray], np.ndarray]
    name: str = "m"

    def __call__(self, p, X, Y) -> np.ndarray:
        p, X, Y = (np.asarray(v, dtype=complex) for v in (p, X, Y))
        return np.asarray(self.fn(p, X, Y), dtype=complex)

    @classmethod
    def zero(cls, dim: int) -> "TwoForm":
        return cls(dim, lambda p, X, Y: np.zeros(p.shape[:-1] + (dim,), dtype=complex), "0")


def _step(p: np.ndarray, delta: float) -> float:
    return delta * max(1.0, float(np.max(np.abs(p))))


def _directional(f: Callable, p: np.ndarray, V: np.ndarray, h: float) -> np.ndarray:
    """Richardson-extrapolated central difference of ``f`` at ``p`` along ``V`` (fourth order)."""
    c1 = (f(p + h * V) - f(p - h * V)) / (2 * h)
    c2 = (f(p + 0.5 * h * V) - f(p - 0.5 * h * V)) / h
    return (4 * c2 - c1) / 3


def d_one_form(omega: ConnectionForm, p, X, Y, delta: float = FD_STEP) -> np.ndarray:
    """``d omega (X, Y)`` for constant vector fields, by extrapolated central differences."""
    p, X, Y = (np.asarray(v, dtype=complex) for v in (p, X, Y))
    h = _step(p, delta)
    return _directional(lambda q: omega(q, Y), p, X, h) - _directional(lambda q: omega(q, X), p, Y, h)


def d_two_form(m: TwoForm, p, X, Y, Z, delta: float = FD_STEP) -> np.ndarray:
    """``d m (X, Y, Z)`` for constant vector fields, by extrapolated central differences."""
    p, X, Y, Z = (np.asarray(v, dtype=complex) for v in (p, X, Y, Z))
    h = _step(p, delta)

    def D(V, A, B):
        return _directional(lambda q: m(q, A, B), p, V, h)

    return D(X, Y, Z) + D(Y, Z, X) + D(Z, X, Y)


@dataclass(eq=False)
class TwoConnection:
    """``(omega, m1, m2)`` over a crossed module, with ``xmod`` a BareXMod or HopfXMod."""

    xmod: object
    omega: ConnectionForm
    m1: TwoForm
    m2: TwoForm
    name: str = "2-connection"
    meta: dict = field(default_factory=dict)

    @property
    def is_hopf(self) -> bool:
        return hasattr(self.xmod, "rho")

    @property
    def bottom(self):
        return self.xmod.H if self.is_hopf else self.xmod.B

    @property
    def top(self):
        return self.xmod.I if self.is_hopf else self.xmod.A

    def boundary_matrix(self) -> np.ndarray:
        return self.xmod.boundary_numeric

    def action(self, b: np.ndarray, a: np.ndarray) -> np.ndarray:
        """``b |> a`` (Hopf action, or ``b |> a - a <| b`` for bare modules), batched."""
        if self.is_hopf:
            return np.einsum("...i,ijk,...k->...j", b, self.xmod.rho_tensor, a)
        X = self.xmod
        return np.einsum("...i,ijk,...k->...j", b, X.left_tensor, a) - np.einsum("...i,ijk,...k->...j", b, X.right_tensor, a)


def bracket(carrier, x: np.ndarray, y: np.ndarray) -> np.ndarray:
    """Batched commutator in a carrier."""
    L = carrier.left_matrices
    xy = np.einsum("...i,ijk,...k->...j", x, L, y)
    yx = np.einsum("...i,ijk,...k->...j", y, L, x)
    return xy - yx


def curvature_at(omega: ConnectionForm, carrier, p, X, Y, N: int = 2, delta: float = FD_STEP) -> np.ndarray:
    """Graded curvature ``h d omega - h^2 [omega(X), omega(Y)]`` as an ``(N+1, dim)`` array."""
    out = np.zeros((N + 1, carrier.dim), dtype=complex)
    if N >= 1:
        out[1] = d_one_form(omega, p, X, Y, delta)
    if N >= 2:
        out[2] = -bracket(carrier, omega(p, X), omega(p, Y))
    return out


@dataclass
class FakeCurvatureReport:
    residuals: list[dict[str, float]]

    @property
    def max_residual(self) -> float:
        return max((max(r.values()) for r in self.residuals), default=0.0)

    def passed(self, tol: float = 1e-6) -> bool:
        return self.max_residual <= tol


def check_fake_curvature(conn: TwoConnection, points: Sequence, tangent_pairs: Sequence | None = None,
                         delta: float = FD_STEP) -> FakeCurvatureReport:
    """Residuals of ``d(m1) = d omega`` and ``d(m2) = -[omega(X), omega(Y)]`` at each point."""
    bmat = conn.boundary_matrix()
    B = conn.bottom
    out = []
    for k, p in enumerate(points):
        p = np.asarray(p, dtype=complex)
        if tangent_pairs is None:
            d = p.shape[-1]
            pairs = [(np.eye(d)[i], np.eye(d)[j]) for i in range(d) for j in range(i + 1, d)]
        else:
            pairs = tangent_pairs[k] if isinstance(tangent_pairs[k], list) else [tangent_pairs[k]]
        r1 = r2 = 0.0
        for X, Y in pairs:
            dw = d_one_form(conn.omega, p, X, Y, delta)
            r1 = max(r1, float(np.max(np.abs(bmat @ conn.m1(p, X, Y) - dw), initial=0.0)))
            br = bracket(B, conn.omega(p, X), conn.omega(p, Y))
            r2 = max(r2, float(np.max(np.abs(bmat @ conn.m2(p, X, Y) + br), initial=0.0)))
        out.append({"d m1 = d omega": r1, "d m2 = -[omega, omega]": r2})
    return FakeCurvatureReport(out)


def wedge_action(conn: TwoConnection, m: TwoForm, p, X, Y, Z) -> np.ndarray:
    """``omega(X) |> m(Y, Z) + omega(Y) |> m(Z, X) + omega(Z) |> m(X, Y)``."""
    w = conn.omega
    return (conn.action(w(p, X), m(p, Y, Z)) + conn.action(w(p, Y), m(p, Z, X))
            + conn.action(w(p, Z), m(p, X, Y)))


def two_curvature_at(conn: TwoConnection, p, X, Y, Z, N: int = 3, delta: float = FD_STEP) -> np.ndarray:
    """Graded 2-curvature ``h dm1 + h^2 (dm2 - omega ^|> m1) - h^3 omega ^|> m2`` as ``(N+1, dim)``."""
    out = np.zeros((N + 1, conn.top.dim), dtype=complex)
    if N >= 1:
        out[1] = d_two_form(conn.m1, p, X, Y, Z, delta)
    if N >= 2:
        out[2] = d_two_form(conn.m2, p, X, Y, Z, delta) - wedge_action(conn, conn.m1, p, X, Y, Z)
    if N >= 3:
        out[3] = -wedge_action(conn, conn.m2, p, X, Y, Z)
    return out
