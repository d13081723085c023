"""One- and two-dimensional holonomy of algebra-valued connections.

All integrals are truncated power series in ``h``: ``omega_bar = h omega``
and ``m_bar = h m1 + h^2 m2``.  Series values are ``(N+1, dim)`` complex
arrays internally and :class:`TruncatedSeries` at the API boundary.

Integration scheme:

* transport along ``t`` by classical RK4 (``ode_steps`` per unit length),
  split at breakpoints, one-sided derivatives at segment ends;
* inner ``u`` integrals by composite Simpson on the transport nodes
  (``grid_t`` panels per unit length);
* the ``s``-ordered equation for ``Q`` by RK4 with ``grid_s`` steps, whose
  stage nodes also serve as Simpson nodes for ``R``.
"""
from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field, replace
from functools import cached_property
from typing import Callable, Sequence

import numpy as np
from scipy import sparse

from .carriers import Carrier
from .geometry import ConnectionForm, Path1, Path2, TwoConnection, TwoForm
from .groups import (
    BareGroupXMod,
    Counits,
    HopfGroupXMod,
    PlusCell,
    TimesCell,
    build_inc,
    map_T,
    plus_distance,
    plus_hcomp,
    plus_vcomp,
    plus_whisker_l,
    plus_whisker_r,
    times_hcomp,
    times_vcomp,
    times_whisker_l,
    times_whisker_r,
)
from .series import TruncatedSeries, series_invert, series_mul
from .xmod import BAResult, BareXMod, HopfXMod, build_ba


class HolonomyError(RuntimeError):
    """Non-finite values or an unusable configuration."""


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class QuadratureConfig:
    """Discretization of the holonomy integrals."""

    grid_t: int = 64
    grid_s: int = 64
    ode_steps: int = 256

    def __post_init__(self) -> None:
        for name in ("grid_t", "grid_s", "ode_steps"):
            if getattr(self, name) < 1:
                raise ConfigError(f"{name} must be positive")
        if self.grid_t % 2:
            raise ConfigError("grid_t must be even (composite Simpson)")

    def coarsened(self) -> "QuadratureConfig":
        """Every step doubled; used for Richardson estimates."""
        return QuadratureConfig(max(2, 2 * (self.grid_t // 4)), max(1, self.grid_s // 2), max(1, self.ode_steps // 2))

    def refined(self) -> "QuadratureConfig":
        return QuadratureConfig(2 * self.grid_t, 2 * self.grid_s, 2 * self.ode_steps)

    def to_json(self) -> dict:
        return asdict(self)


RK4_ORDER = 4


@dataclass
class HolonomyResult:
    """A holonomy value with an optional Richardson error estimate (``None`` when not computed)."""

    value: TruncatedSeries
    error_estimate: float | None = None
    config: QuadratureConfig = field(default_factory=QuadratureConfig)

    def to_json(self) -> dict:
        return {
            "value": self.value.to_json(),
            "error_estimate": self.error_estimate,
            "config": self.config.to_json(),
        }


def _richardson(fine: TruncatedSeries, coarse: TruncatedSeries) -> float:
    return (fine - coarse).max_abs() / (2 ** RK4_ORDER - 1)


def _threads() -> int:
    try:
        return max(1, int(os.environ.get("HOLOTWO_THREADS", "1")))
    except ValueError:
        return 1


# ---------------------------------------------------------------------------
# numeric series helpers (arrays of shape (..., N+1, dim))


def _support(W: np.ndarray, tol: float = 0.0) -> np.ndarray:
    flat = np.abs(W.reshape(-1, W.shape[-1]))
    return np.nonzero(np.max(flat, axis=0) > tol)[0] if flat.size else np.array([], dtype=int)


def _left_mul_shift(car: Carrier, W: np.ndarray, P: np.ndarray) -> np.ndarray:
    """``h W P`` for ``W`` of shape ``(S, dim)`` and series ``P`` of shape ``(S, N+1, dim)``."""
    out = np.zeros_like(P)
    L = car.left_matrices
    for a in _support(W):
        out[:, 1:] += W[:, a, None, None] * (P[:, :-1] @ L[a].T)
    return out


def _right_mul_shift(car: Carrier, P: np.ndarray, W: np.ndarray) -> np.ndarray:
    """``h P W``."""
    out = np.zeros_like(P)
    R = car.right_matrices
    for a in _support(W):
        out[:, 1:] += W[:, a, None, None] * (P[:, :-1] @ R[a].T)
    return out


def series_product(car: Carrier, A: np.ndarray, B: np.ndarray) -> np.ndarray:
    """Batched truncated product of ``(..., N+1, dim)`` arrays."""
    N = A.shape[-2] - 1
    L = car.left_matrices
    out = np.zeros(np.broadcast_shapes(A.shape, B.shape), dtype=complex)
    for i in range(N + 1):
        Ai = A[..., i, :]
        sup = _support(Ai)
        if not len(sup):
            continue
        Mi = np.einsum("...a,ajk->...jk", Ai[..., sup], L[sup])
        for j in range(N + 1 - i):
            out[..., i + j, :] += np.einsum("...jk,...k->...j", Mi, B[..., j, :])
    return out


def series_bilinear(T: np.ndarray, A: np.ndarray, B: np.ndarray) -> np.ndarray:
    """``sum_{i+j=n} T(A_i, B_j)`` with ``T[b] @ v`` the bilinear map on basis element ``b``."""
    N = A.shape[-2] - 1
    nb, nk, nl = T.shape
    flat_t = sparse.csr_matrix(T.transpose(0, 1, 2).reshape(nb * nk, nl))
    shape = np.broadcast_shapes(A.shape[:-2], B.shape[:-2])
    out = np.zeros(shape + (N + 1, nk), dtype=complex)
    for j in range(N + 1):
        Bj = B[..., j, :]
        if not np.any(Bj):
            continue
        rows = Bj.reshape(-1, nl)
        TB = (flat_t @ rows.T).T.reshape(Bj.shape[:-1] + (nb, nk))
        for i in range(N + 1 - j):
            Ai = A[..., i, :]
            if np.any(Ai):
                out[..., i + j, :] += (Ai[..., None, :] @ TB)[..., 0, :]
    return out


def _identity_series(car: Carrier, shape: tuple, N: int) -> np.ndarray:
    out = np.zeros(shape + (N + 1, car.dim), dtype=complex)
    out[..., 0, :] = np.asarray(car.unit, dtype=complex)
    return out


def _check_finite(arr: np.ndarray, what: str) -> None:
    if not np.all(np.isfinite(arr)):
        raise HolonomyError(f"non-finite values in {what}")


# ---------------------------------------------------------------------------
# meshes


@dataclass(frozen=True)
class Mesh:
    """Nodes with one-sided derivative flags, grouped by smooth segment."""

    nodes: np.ndarray
    sides: np.ndarray
    segments: tuple[tuple[int, int], ...]  # (first, last) node index per segment
    weights: np.ndarray  # composite Simpson weights (signed by direction)


def _segments(a: float, b: float, breaks: Sequence[float]) -> list[tuple[float, float]]:
    lo, hi = min(a, b), max(a, b)
    cuts = [lo] + [x for x in sorted(breaks) if lo + 1e-12 < x < hi - 1e-12] + [hi]
    segs = list(zip(cuts[:-1], cuts[1:]))
    if b < a:
        segs = [(y, x) for x, y in reversed(segs)]
    return segs


def simpson_mesh(a: float, b: float, panels_per_unit: int, breaks: Sequence[float] = ()) -> Mesh:
    """Composite Simpson nodes on ``[a, b]`` (either direction), restarted at breakpoints."""
    nodes, sides, segs, weights = [], [], [], []
    direction = 1 if b >= a else -1
    for x, y in _segments(a, b, breaks):
        m = max(2, 2 * math.ceil(panels_per_unit * abs(y - x) / 2))
        pts = np.linspace(x, y, m + 1)
        w = np.ones(m + 1)
        w[1:-1:2] = 4
        w[2:-1:2] = 2
        w *= (y - x) / (3 * m)
        sd = np.zeros(m + 1, dtype=int)
        sd[0], sd[-1] = direction, -direction
        first = len(nodes)
        nodes.extend(pts)
        sides.extend(sd)
        weights.extend(w)
        segs.append((first, len(nodes) - 1))
    return Mesh(np.array(nodes), np.array(sides), tuple(segs), np.array(weights))


def rk4_mesh(a: float, b: float, steps_per_unit: int, breaks: Sequence[float] = ()) -> Mesh:
    """RK4 stage nodes ``s, s + ds/2, s + ds`` per step, restarted at breakpoints.

    Consecutive steps share endpoints, so the nodes of a segment are an
    even Simpson grid as well.
    """
    nodes, sides, segs, weights = [], [], [], []
    direction = 1 if b >= a else -1
    for x, y in _segments(a, b, breaks):
        n = max(1, math.ceil(steps_per_unit * abs(y - x) - 1e-9))
        m = 2 * n
        pts = np.linspace(x, y, m + 1)
        w = np.ones(m + 1)
        w[1:-1:2] = 4
        w[2:-1:2] = 2
        w *= (y - x) / (3 * m)
        sd = np.zeros(m + 1, dtype=int)
        sd[0], sd[-1] = direction, -direction
        first = len(nodes)
        nodes.extend(pts)
        sides.extend(sd)
        weights.extend(w)
        segs.append((first, len(nodes) - 1))
    return Mesh(np.array(nodes), np.array(sides), tuple(segs), np.array(weights))


# ---------------------------------------------------------------------------
# 1-dimensional holonomy


def _omega_along(omega: ConnectionForm, points: np.ndarray, tangents: np.ndarray) -> np.ndarray:
    W = omega(points, tangents)
    _check_finite(W, "the connection form")
    return W


def transport(car: Carrier, omega: ConnectionForm, path_at: Callable, vel_at: Callable,
              mesh: Mesh, N: int, batch: tuple, right: bool = False) -> np.ndarray:
    """Solve ``f' = omega_bar(gamma') f`` (or ``f' = -f omega_bar(gamma')`` when ``right``).

    ``path_at(t)`` and ``vel_at(t, side)`` return ``batch + (d,)`` arrays.
    The result has shape ``(len(mesh.nodes),) + batch + (N+1, dim)``, values
    at every mesh node, with ``f = 1`` at the first node.  RK4 steps span
    two mesh intervals (a Simpson panel pair is one step).
    """
    nodes = mesh.nodes
    out = np.zeros((len(nodes),) + batch + (N + 1, car.dim), dtype=complex)
    S = int(np.prod(batch)) if batch else 1
    f = _identity_series(car, (S,), N)

    def rhs(t, side, F):
        W = _omega_along(omega, path_at(t), vel_at(t, side)).reshape(S, car.dim)
        if right:
            return -_right_mul_shift(car, F, W)
        return _left_mul_shift(car, W, F)

    def store(k, F):
        out[k] = F.reshape(batch + (N + 1, car.dim))

    for first, last in mesh.segments:
        store(first, f)
        for k in range(first, last, 1):
            t0, t1 = nodes[k], nodes[k + 1]
            dt = t1 - t0
            s0 = mesh.sides[k] if k == first else 0
            s1 = mesh.sides[k + 1] if k + 1 == last else 0
            k1 = rhs(t0, s0 if s0 else int(np.sign(dt)), f)
            k2 = rhs(t0 + dt / 2, 0, f + dt / 2 * k1)
            k3 = rhs(t0 + dt / 2, 0, f + dt / 2 * k2)
            k4 = rhs(t1, s1 if s1 else -int(np.sign(dt)), f + dt * k3)
            f = f + dt / 6 * (k1 + 2 * k2 + 2 * k3 + k4)
            store(k + 1, f)
    _check_finite(out, "parallel transport")
    return out


def _transport_mesh(a: float, b: float, config: QuadratureConfig, breaks: Sequence[float]) -> Mesh:
    """Transport nodes: ``ode_steps`` RK4 steps per unit length."""
    return simpson_mesh(a, b, config.ode_steps, breaks)


def holonomy_P(omega: ConnectionForm, carrier: Carrier, gamma: Path1, N: int, t0: float = 0.0, t1: float = 1.0,
               config: QuadratureConfig = QuadratureConfig(), estimate_error: bool = True) -> HolonomyResult:
    """``P(gamma, [t1, t0])``: the solution of ``f' = omega_bar(gamma') f`` with ``f(t0) = 1``."""

    def run(cfg):
        mesh = _transport_mesh(t0, t1, cfg, gamma.breakpoints)
        vals = transport(carrier, omega, lambda t: gamma(np.array([t])), lambda t, sd: gamma.velocity(np.array([t]), sd),
                         mesh, N, (1,))
        return TruncatedSeries.from_array(carrier, vals[-1, 0])

    value = run(config)
    err = _richardson(value, run(config.coarsened())) if estimate_error else None
    return HolonomyResult(value, err, config)


# ---------------------------------------------------------------------------
# iterated integrals


def iterated_integral(fs: Sequence[Callable], a: float, b: float, N: int | None = None,
                      panels: int = 256) -> complex:
    """``int_{b >= u1 >= ... >= un >= a} f1(u1) ... fn(un)`` by nested cumulative Simpson.

    Scalar-valued functions; the innermost integral is over ``fn``.
    """
    n = len(fs)
    if N is not None and n > N:
        raise HolonomyError(f"iterated integral of length {n} exceeds the truncation order {N}")
    if n == 0:
        return 1.0
    t = np.linspace(a, b, 2 * panels + 1)
    g = np.ones_like(t, dtype=complex)
    for f in reversed(fs):
        g = _cumulative_simpson(np.asarray(f(t), dtype=complex) * g, t)
    return complex(g[-1])


def iterated_integral_reversed(fs: Sequence[Callable], a: float, b: float, panels: int = 256) -> complex:
    """The same simplex integral with the order of integration inverted (outermost over ``fn``)."""
    n = len(fs)
    if n == 0:
        return 1.0
    t = np.linspace(a, b, 2 * panels + 1)
    g = np.ones_like(t, dtype=complex)
    for f in fs:
        vals = np.asarray(f(t), dtype=complex) * g
        total = _cumulative_simpson(vals, t)
        g = total[-1] - total
    return complex(g[0])


def _cumulative_simpson(y: np.ndarray, t: np.ndarray) -> np.ndarray:
    """Cumulative integral from ``t[0]`` on an odd number of equispaced nodes.

    Even nodes get composite Simpson; odd nodes add one three-point step.
    """
    h = t[1] - t[0]
    out = np.zeros_like(y)
    out[2::2] = np.cumsum(h / 3 * (y[0:-2:2] + 4 * y[1:-1:2] + y[2::2]))
    out[1::2] = out[0:-1:2] + h * (5 * y[0:-1:2] + 8 * y[1::2] - y[2::2]) / 12
    return out


# ---------------------------------------------------------------------------
# surface transport cache


class SurfaceTransport:
    """Transport data over a 2-path at every ``(s, u)`` node, shared by Q, R and blur.

    ``X[s, u] = P(gamma_s, [0, u])`` (from ``u`` back to 0),
    ``Y[s, u] = P(gamma_s, [u, 0])`` and ``Z[s, u] = P(gamma_s, [u, 1])``.
    ``mbar[s, u]`` is ``m_bar(d_s Gamma, d_u Gamma)`` as a series.
    """

    def __init__(self, conn: TwoConnection, Gamma: Path2, N: int, config: QuadratureConfig,
                 s0: float = 0.0, s1: float = 1.0):
        self.conn = conn
        self.Gamma = Gamma
        self.N = N
        self.config = config
        self.s0, self.s1 = s0, s1
        self.smesh = rk4_mesh(s0, s1, config.grid_s, Gamma.s_breaks)
        self.umesh = _transport_mesh(0.0, 1.0, config, Gamma.t_breaks)
        stride = max(1, config.ode_steps // config.grid_t)
        self.stride = stride
        self.qmesh = self._quadrature_submesh(stride)

    def _quadrature_submesh(self, stride: int) -> Mesh:
        """Simpson nodes for the ``u`` integrals: every ``stride``-th transport node per segment."""
        idx, sides, weights, segs = [], [], [], []
        um = self.umesh
        for first, last in um.segments:
            m = last - first
            st = stride if m % (2 * stride) == 0 else 1
            sel = list(range(first, last + 1, st))
            k = len(sel) - 1
            h = (um.nodes[last] - um.nodes[first]) / k
            w = np.ones(k + 1)
            w[1:-1:2] = 4
            w[2:-1:2] = 2
            w *= h / 3
            sd = np.zeros(k + 1, dtype=int)
            sd[0], sd[-1] = 1, -1
            start = len(idx)
            idx.extend(sel)
            sides.extend(sd)
            weights.extend(w)
            segs.append((start, len(idx) - 1))
        self.qidx = np.array(idx)
        return Mesh(um.nodes[self.qidx], np.array(sides), tuple(segs), np.array(weights))

    @property
    def bottom(self) -> Carrier:
        return self.conn.bottom

    @property
    def top(self) -> Carrier:
        return self.conn.top

    def _paths(self):
        G = self.Gamma
        s = self.smesh.nodes
        return (lambda t: G(np.full_like(s, t), s),
                lambda t, side: G.partial_t(np.full_like(s, t), s, side))

    @cached_property
    def Y(self) -> np.ndarray:
        path_at, vel_at = self._paths()
        vals = transport(self.bottom, self.conn.omega, path_at, vel_at, self.umesh, self.N, (len(self.smesh.nodes),))
        return np.swapaxes(vals, 0, 1)[:, self.qidx]

    @cached_property
    def X(self) -> np.ndarray:
        path_at, vel_at = self._paths()
        vals = transport(self.bottom, self.conn.omega, path_at, vel_at, self.umesh, self.N,
                         (len(self.smesh.nodes),), right=True)
        return np.swapaxes(vals, 0, 1)[:, self.qidx]

    @cached_property
    def Z(self) -> np.ndarray:
        """``P(gamma_s, [u, 1]) = P(gamma_s, [u, 0]) P(gamma_s, [0, 1])``."""
        Xend = self.X[:, -1:]
        return series_product(self.bottom, self.Y, Xend)

    @cached_property
    def P_end(self) -> np.ndarray:
        """``P(gamma_s) = P(gamma_s, [1, 0])`` per s-node."""
        return self.Y[:, -1]

    @cached_property
    def P_end_inv(self) -> np.ndarray:
        return self.X[:, -1]

    @cached_property
    def mbar(self) -> np.ndarray:
        G = self.Gamma
        S, U = len(self.smesh.nodes), len(self.qmesh.nodes)
        s = np.repeat(self.smesh.nodes[:, None], U, axis=1)
        u = np.repeat(self.qmesh.nodes[None, :], S, axis=0)
        ssides = np.repeat(self.smesh.sides[:, None], U, axis=1)
        usides = np.repeat(self.qmesh.sides[None, :], S, axis=0)
        p = G(u, s)
        ds = np.zeros_like(p)
        du = np.zeros_like(p)
        for sd in (-1, 0, 1):
            mask = ssides == sd
            if mask.any():
                ds[mask] = G.partial_s(u[mask], s[mask], sd)
            mask = usides == sd
            if mask.any():
                du[mask] = G.partial_t(u[mask], s[mask], sd)
        out = np.zeros((S, U, self.N + 1, self.top.dim), dtype=complex)
        if self.N >= 1:
            out[:, :, 1] = self.conn.m1(p, ds, du)
        if self.N >= 2:
            out[:, :, 2] = self.conn.m2(p, ds, du)
        _check_finite(out, "the 2-form")
        return out

    def u_integral(self, integrand: np.ndarray) -> np.ndarray:
        """Simpson in ``u`` of an ``(S, U, ...)`` array."""
        return np.einsum("u,su...->s...", self.qmesh.weights, integrand)

    def s_integral(self, values: np.ndarray) -> np.ndarray:
        return np.einsum("s,s...->...", self.smesh.weights, values)


# ---------------------------------------------------------------------------
# exact 2-holonomy


def _action_integrand(conn: TwoConnection, st: SurfaceTransport) -> np.ndarray:
    """``P(gamma_s, [0, u]) |> m_bar`` at every node."""
    Hx: HopfXMod = conn.xmod
    return series_bilinear(Hx.rho_tensor, st.X, st.mbar)


def holonomy_Q(conn: TwoConnection, Gamma: Path2, N: int, s0: float = 0.0, s1: float = 1.0,
               config: QuadratureConfig = QuadratureConfig(), estimate_error: bool = False,
               transport_cache: SurfaceTransport | None = None) -> HolonomyResult:
    """``Q(Gamma, [s1, s0])`` from ``dQ/ds = -a(s) Q``, ``a(s) = int_0^1 P(gamma_s,[0,u]) |> m_bar du``."""
    if not conn.is_hopf:
        raise HolonomyError("the exact holonomy needs a Hopf crossed module")

    def run(cfg, cache=None):
        st = cache or SurfaceTransport(conn, Gamma, N, cfg, s0, s1)
        a = st.u_integral(_action_integrand(conn, st))
        I = conn.top
        q = _identity_series(I, (), N)
        mesh = st.smesh
        for first, last in mesh.segments:
            for k in range(first, last, 2):
                ds = mesh.nodes[k + 2] - mesh.nodes[k]

                def f(j, Q):
                    return -series_product(I, a[j], Q)

                k1 = f(k, q)
                k2 = f(k + 1, q + ds / 2 * k1)
                k3 = f(k + 1, q + ds / 2 * k2)
                k4 = f(k + 2, q + ds * k3)
                q = q + ds / 6 * (k1 + 2 * k2 + 2 * k3 + k4)
        _check_finite(q, "the exact holonomy")
        return TruncatedSeries.from_array(I, q)

    value = run(config, transport_cache)
    err = _richardson(value, run(config.coarsened())) if estimate_error else None
    return HolonomyResult(value, err, config)


# ---------------------------------------------------------------------------
# bare 2-holonomy


def _bare_integrand(X: BareXMod, st: SurfaceTransport, mbar: np.ndarray | None = None) -> np.ndarray:
    """``P(gamma_s, [0, u]) |> m_bar <| P(gamma_s, [u, 1])``."""
    m = st.mbar if mbar is None else mbar
    left = series_bilinear(X.left_tensor, st.X, m)
    return series_bilinear(X.right_tensor, st.Z, left)


def holonomy_R(conn: TwoConnection, Gamma: Path2, N: int, s0: float = 0.0, s1: float = 1.0,
               config: QuadratureConfig = QuadratureConfig(), estimate_error: bool = False,
               transport_cache: SurfaceTransport | None = None) -> HolonomyResult:
    """``R(Gamma, [s1, s0]) = -int int P[0,u] |> m_bar <| P[u,1] du ds`` for a bare 2-connection."""
    if conn.is_hopf:
        raise HolonomyError("the bare holonomy needs a bare crossed module")

    def run(cfg, cache=None):
        st = cache or SurfaceTransport(conn, Gamma, N, cfg, s0, s1)
        r = -st.s_integral(st.u_integral(_bare_integrand(conn.xmod, st)))
        _check_finite(r, "the bare holonomy")
        return TruncatedSeries.from_array(conn.top, r)

    value = run(config, transport_cache)
    err = _richardson(value, run(config.coarsened())) if estimate_error else None
    return HolonomyResult(value, err, config)


# ---------------------------------------------------------------------------
# blur and fuzzy holonomies


@dataclass
class FuzzyResult:
    blur: TruncatedSeries
    fuzzy: TruncatedSeries
    blur_smash_form: TruncatedSeries
    config: QuadratureConfig

    def to_json(self) -> dict:
        return {"blur": self.blur.to_json(), "fuzzy": self.fuzzy.to_json(),
                "config": self.config.to_json()}


def include_connection(conn: TwoConnection, ba: BAResult) -> TwoConnection:
    """``(omega, i_I m1, i_I m2)`` as a bare 2-connection over ``BA^(H)``."""
    emb = _inclusion_matrix(ba)
    dim = emb.shape[0]
    return TwoConnection(ba.pre, conn.omega, TwoForm(dim, lambda p, X, Y: conn.m1(p, X, Y) @ emb.T),
                         TwoForm(dim, lambda p, X, Y: conn.m2(p, X, Y) @ emb.T), name=f"i({conn.name})")


def holonomy_fuzzy(conn: TwoConnection, ba: BAResult, Gamma: Path2, N: int,
                   config: QuadratureConfig = QuadratureConfig(),
                   transport_cache: SurfaceTransport | None = None) -> FuzzyResult:
    """Blur holonomy in ``I^0 (x) H`` and its Peiffer projection.

    The blur value is computed as the bare holonomy of the included
    connection; ``blur_smash_form`` recomputes it from
    ``-int int (P[0,u] |> m_bar) (x) P(gamma_s, [0, 1])`` as an independent route.
    """
    if not conn.is_hopf:
        raise HolonomyError("blur and fuzzy holonomies need a Hopf 2-connection")
    st = transport_cache or SurfaceTransport(conn, Gamma, N, config)
    A = ba.pre.A
    sm = ba.smash
    # route 1: bare holonomy over BA^ with the shared transport data
    emb = _inclusion_matrix(ba)
    mb = st.mbar @ emb.T
    r1 = -st.s_integral(st.u_integral(_bare_integrand(ba.pre, st, mb)))
    # route 2: smash form
    act = _action_integrand(conn, st)
    Pinv = st.P_end_inv[:, None]
    tens = np.zeros(act.shape[:2] + (N + 1, A.dim), dtype=complex)
    for i in range(N + 1):
        for j in range(N + 1 - i):
            tens[:, :, i + j] += sm.outer_batch(act[:, :, i], np.broadcast_to(Pinv[:, :, j], act[:, :, i].shape[:-1] + (sm.H.dim,)))
    r2 = -st.s_integral(st.u_integral(tens))
    blur = TruncatedSeries.from_array(A, r1)
    blur2 = TruncatedSeries.from_array(A, r2)
    fuzzy = project_fuzzy(ba, blur)
    return FuzzyResult(blur, fuzzy, blur2, config)


def _inclusion_matrix(ba: BAResult) -> np.ndarray:
    sm = ba.smash
    H = sm.H
    unit_H = int(np.nonzero(np.asarray(H.unit, dtype=complex))[0][0])
    emb = np.zeros((len(sm.augmented_pairs), sm.I.dim), dtype=complex)
    for k, (v, x) in enumerate(sm.augmented_pairs):
        if x == unit_H:
            emb[k, v] = 1.0
    return emb


def project_fuzzy(ba: BAResult, blur: TruncatedSeries) -> TruncatedSeries:
    """Reduce each coefficient modulo the Peiffer ideal of its slot."""
    X = ba.crossed
    return TruncatedSeries(blur.carrier, tuple(np.asarray(X.reduce(c, k), dtype=complex) for k, c in enumerate(blur.coeffs)))


# ---------------------------------------------------------------------------
# cells


def holonomy_P_inverse(conn: TwoConnection, gamma: Path1, N: int, config: QuadratureConfig) -> TruncatedSeries:
    """``P(gamma)^-1 = P(gamma, [0, 1])``, the 1-morphism attached to ``gamma``."""
    return holonomy_P(conn.omega, conn.bottom, gamma, N, 1.0, 0.0, config, estimate_error=False).value


def exact_cell(conn: TwoConnection, Gamma: Path2, N: int, config: QuadratureConfig = QuadratureConfig(),
               group: HopfGroupXMod | None = None, transport_cache: SurfaceTransport | None = None) -> TimesCell:
    """``(P(gamma_0)^-1, Q(Gamma)^-1)``."""
    group = group or HopfGroupXMod(conn.xmod)
    st = transport_cache or SurfaceTransport(conn, Gamma, N, config)
    Q = holonomy_Q(conn, Gamma, N, config=config, transport_cache=st).value
    g = TruncatedSeries.from_array(conn.bottom, st.P_end_inv[0])
    return TimesCell(group, g, series_invert(Q))


def bare_cell(conn: TwoConnection, Gamma: Path2, N: int, config: QuadratureConfig = QuadratureConfig(),
              transport_cache: SurfaceTransport | None = None) -> PlusCell:
    """``(P(gamma_0)^-1, R(Gamma))``."""
    st = transport_cache or SurfaceTransport(conn, Gamma, N, config)
    R = holonomy_R(conn, Gamma, N, config=config, transport_cache=st).value
    return PlusCell(conn.xmod, TruncatedSeries.from_array(conn.bottom, st.P_end_inv[0]), R)


def fuzzy_cell(conn: TwoConnection, ba: BAResult, Gamma: Path2, N: int,
               config: QuadratureConfig = QuadratureConfig(),
               transport_cache: SurfaceTransport | None = None) -> PlusCell:
    """``(P(gamma_0)^-1, fuzzy holonomy)`` in ``BA(I -> H)``."""
    st = transport_cache or SurfaceTransport(conn, Gamma, N, config)
    fz = holonomy_fuzzy(conn, ba, Gamma, N, config, transport_cache=st)
    return PlusCell(ba.crossed, TruncatedSeries.from_array(conn.bottom, st.P_end_inv[0]), fz.fuzzy)


# ---------------------------------------------------------------------------
# compatibility of the four holonomies


def comp0_residuals(conn: TwoConnection, Gamma: Path2, N: int, config: QuadratureConfig = QuadratureConfig(),
                    ba: BAResult | None = None) -> dict[str, float]:
    """Fuzzy holonomy against ``T`` applied to the included exact holonomy."""
    ba = ba or build_ba(conn.xmod)
    st = SurfaceTransport(conn, Gamma, N, config)
    exact = exact_cell(conn, Gamma, N, config, transport_cache=st)
    inc = build_inc(exact.xm, ba.crossed)
    via_exact = map_T(inc.cell(exact))
    fz = holonomy_fuzzy(conn, ba, Gamma, N, config, transport_cache=st)
    fuzzy = PlusCell(ba.crossed, exact.g, fz.fuzzy)
    return {
        "fuzzy = T(Inc(exact))": plus_distance(fuzzy, via_exact),
        "blur: bare route = smash route": (fz.blur - fz.blur_smash_form).max_abs(),
    }


def polygon_residuals(bare_conn: TwoConnection, lifted_conn: TwoConnection, Gamma: Path2, N: int,
                      config: QuadratureConfig = QuadratureConfig(), ba: BAResult | None = None) -> dict[str, float]:
    """Three routes to a cell of ``C^+(X)`` for a bare crossed module ``X``.

    ``lifted_conn`` carries the same forms as letters of ``U(Lie(X))``.
    Routes: ``T(Proj(exact))``, ``K(fuzzy)`` and the bare holonomy of ``bare_conn``.
    """
    X: BareXMod = bare_conn.xmod
    Hx: HopfXMod = lifted_conn.xmod
    ba = ba or build_ba(Hx)
    counits = Counits(X, Hx)
    bg = BareGroupXMod(X, order=N)
    st = SurfaceTransport(lifted_conn, Gamma, N, config)
    exact = exact_cell(lifted_conn, Gamma, N, config, transport_cache=st)
    route_exact = map_T(counits.proj_cell(bg, exact))
    fz = holonomy_fuzzy(lifted_conn, ba, Gamma, N, config, transport_cache=st)
    route_fuzzy = counits.K_cell(PlusCell(ba.crossed, exact.g, fz.fuzzy))
    route_bare = bare_cell(bare_conn, Gamma, N, config)
    return {
        "T(Proj(exact)) = K(fuzzy)": plus_distance(route_exact, route_fuzzy),
        "K(fuzzy) = bare": plus_distance(route_fuzzy, route_bare),
        "T(Proj(exact)) = bare": plus_distance(route_exact, route_bare),
    }


# ---------------------------------------------------------------------------
# composition laws


@dataclass
class CompositionReport:
    residuals: dict[str, float]

    def passed(self, tol: float) -> bool:
        return all(v <= tol for v in self.residuals.values())

    def to_json(self) -> dict:
        return dict(sorted(self.residuals.items()))


def _dist(a: TruncatedSeries, b: TruncatedSeries) -> float:
    return (a - b).max_abs()


def boundary_residuals(conn: TwoConnection, Gamma: Path2, N: int, config: QuadratureConfig,
                       s_values: Sequence[float] = (0.5, 1.0)) -> dict[str, float]:
    """``d Q(Gamma,[s,0]) = P(gamma_s)^-1 P(gamma_0)`` (Hopf) or ``P(gamma_s)^-1 = P(gamma_0)^-1 + d R`` (bare)."""
    out = {}
    B = conn.bottom
    bmat = conn.boundary_matrix()
    for s in s_values:
        st = SurfaceTransport(conn, Gamma, N, config, 0.0, s)
        P0 = TruncatedSeries.from_array(B, st.P_end[0])
        Ps_inv = TruncatedSeries.from_array(B, st.P_end_inv[-1])
        if conn.is_hopf:
            Q = holonomy_Q(conn, Gamma, N, 0.0, s, config, transport_cache=st).value
            lhs = Q.map(lambda v: bmat @ v, B)
            out[f"boundary of Q at s={s}"] = _dist(lhs, series_mul(Ps_inv, P0))
        else:
            R = holonomy_R(conn, Gamma, N, 0.0, s, config, transport_cache=st).value
            P0_inv = TruncatedSeries.from_array(B, st.P_end_inv[0])
            out[f"boundary of R at s={s}"] = _dist(Ps_inv, P0_inv + R.map(lambda v: bmat @ v, B))
    return out


def verify_composition_laws(conn: TwoConnection, G1: Path2, N: int, config: QuadratureConfig = QuadratureConfig(),
                            G2: Path2 | None = None, G3: Path2 | None = None, left_whisker: Path1 | None = None,
                            right_whisker: Path1 | None = None,
                            phi: tuple[Callable, Callable] | None = None) -> CompositionReport:
    """Residual table for the functoriality of the holonomy.

    ``G2`` is horizontally composable after ``G1``; ``G3`` is vertically
    composable after ``G1``; ``left_whisker`` ends where ``G1`` starts and
    ``right_whisker`` starts where it ends.
    """
    res: dict[str, float] = {}
    B = conn.bottom
    hopf = conn.is_hopf
    cell = (lambda G: exact_cell(conn, G, N, config)) if hopf else (lambda G: bare_cell(conn, G, N, config))
    same = (lambda a, b: max(_dist(a.g, b.g), _dist(a.e, b.e))) if hopf else plus_distance

    def P(g):
        return holonomy_P(conn.omega, B, g, N, config=config, estimate_error=False).value

    c1 = cell(G1)
    res.update(boundary_residuals(conn, G1, N, config))
    if G2 is not None:
        g1, g2 = G1.source, G2.source
        res["1-path concatenation"] = _dist(P(g1.concat(g2)), series_mul(P(g2), P(g1)))
        c2 = cell(G2)
        c12 = cell(G1.hcomp(G2))
        ref = times_hcomp(c1, c2) if hopf else plus_hcomp(c1, c2, allow_precrossed=True)
        res["horizontal composition"] = same(c12, ref)
    if G3 is not None:
        c3 = cell(G3)
        c13 = cell(G1.vcomp(G3))
        ref = times_vcomp(c1, c3, tol=1e-6) if hopf else plus_vcomp(c1, c3, tol=1e-6)
        res["vertical composition"] = same(c13, ref)
    if right_whisker is not None:
        h = series_invert(P(right_whisker))
        ref = times_whisker_r(c1, h) if hopf else plus_whisker_r(c1, h)
        res["right whiskering"] = same(cell(G1.whisker_r(right_whisker)), ref)
    if left_whisker is not None:
        h = series_invert(P(left_whisker))
        ref = times_whisker_l(h, c1) if hopf else plus_whisker_l(h, c1)
        res["left whiskering"] = same(cell(G1.whisker_l(left_whisker)), ref)
    if phi is not None:
        f, df = phi
        res["reparametrization of P"] = _dist(P(G1.source.reparametrize(f, df)), P(G1.source))
        cp = cell(G1.reparametrize(f, df, f, df))
        res["reparametrization of the 2-holonomy"] = same(cp, c1)
    return CompositionReport(res)


def convergence_orders(values: Sequence[TruncatedSeries], exact: TruncatedSeries | None = None) -> list[float]:
    """Observed orders from successive refinements (halving steps each time)."""
    if exact is not None:
        errs = [(v - exact).max_abs() for v in values]
    else:
        errs = [(values[k] - values[k + 1]).max_abs() for k in range(len(values) - 1)]
    return [math.log2(errs[k] / errs[k + 1]) if errs[k + 1] > 0 else float("inf") for k in range(len(errs) - 1)]


def parallel_map(fn: Callable, items: Sequence) -> list:
    """Map honoring ``HOLOTWO_THREADS``; results keep input order."""
    n = _threads()
    if n <= 1 or len(items) <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=n) as ex:
        return list(ex.map(fn, items))
