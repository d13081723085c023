"""Shipped instances: the KZ connection and 2-connection, and synthetic 2-connections over HOM(V)."""
from __future__ import annotations

import itertools
import random
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Mapping

import numpy as np

from .carriers import WordAlgebra, chord_algebra, chord_name
from .geometry import (
    ConnectionForm,
    Path1,
    Path2,
    PoleProximityError,
    TwoConnection,
    TwoForm,
    bezier,
    braid_generator,
    config_point,
    homotopy,
    strand_loop,
)
from .linalg import ONE, ZERO, nullspace, to_complex, zeros
from .xmod import (
    BareXMod,
    ChainComplex,
    ChordXMod,
    HomComplex,
    HopfXMod,
    build_hom_complex,
    categorified_chord_xmod,
    enveloping_xmod,
    lie_of,
    triples,
)

POLE_TOL = 1e-6


class InstanceError(ValueError):
    pass


# ---------------------------------------------------------------------------
# KZ


def _pairs(n: int) -> list[tuple[int, int]]:
    return list(itertools.combinations(range(1, n + 1), 2))


def kz_omega(p: np.ndarray, X: np.ndarray, a: int, b: int) -> np.ndarray:
    """``omega_ab(X) = (X_a - X_b) / (z_a - z_b)`` (1-based strands), batched."""
    diff = p[..., a - 1] - p[..., b - 1]
    if np.any(np.abs(diff) < POLE_TOL):
        raise PoleProximityError(f"strands {a} and {b} are closer than {POLE_TOL}")
    return (X[..., a - 1] - X[..., b - 1]) / diff


def _wedge(p, X, Y, ab, cd) -> np.ndarray:
    """``(omega_ab ^ omega_cd)(X, Y) = omega_ab(X) omega_cd(Y) - omega_ab(Y) omega_cd(X)``."""
    return kz_omega(p, X, *ab) * kz_omega(p, Y, *cd) - kz_omega(p, Y, *ab) * kz_omega(p, X, *cd)


@dataclass(eq=False)
class KZInstance:
    """KZ data on ``n`` strands truncated at degree ``N``.

    ``carrier`` carries the 1-connection: ``ch_n`` for :func:`kz_connection`
    and ``ch_n^+`` (the bottom of ``2ch_n``) for :func:`kz_two_connection`.
    """

    n: int
    N: int
    carrier: WordAlgebra
    omega: ConnectionForm
    chord: ChordXMod | None = None
    connection: TwoConnection | None = None
    B: TwoForm | None = None

    def generator(self, a: int, b: int) -> np.ndarray:
        return to_complex(self.carrier.generator(chord_name(a, b, self.n)))

    def base_point(self) -> np.ndarray:
        return config_point(self.n)


def _kz_form(carrier: WordAlgebra, n: int) -> ConnectionForm:
    pairs = _pairs(n)
    gens = np.array([to_complex(carrier.generator(chord_name(a, b, n))) for a, b in pairs])

    def fn(p, X):
        coeffs = np.stack([kz_omega(p, X, a, b) for a, b in pairs], axis=-1)
        return coeffs @ gens

    return ConnectionForm(carrier.dim, fn, f"KZ{n}")


def kz_connection(n: int, N: int, plus: bool = False) -> KZInstance:
    """``A = sum_{a<b} omega_ab r_ab`` over ``ch_n`` (or ``ch_n^+`` when ``plus``)."""
    if n < 2:
        raise InstanceError("the KZ connection needs at least two strands")
    H = chord_algebra(n, N, plus=plus)
    return KZInstance(n, N, H, _kz_form(H, n))


def _module_to_I(Hx: HopfXMod, v: np.ndarray) -> np.ndarray:
    letters = Hx.meta["e_in_I"]
    out = np.zeros(Hx.I.dim, dtype=complex)
    for j, c in enumerate(v):
        if c != 0:
            out += complex(c) * to_complex(letters[j])
    return out


def kz_two_form_B(chord: ChordXMod) -> TwoForm:
    """``B = 2 sum omega_bc ^ omega_ca P_abc - 2 sum omega_ca ^ omega_ab Q_abc`` valued in ``U(2ch_n)``."""
    Hx = chord.hopf
    n = chord.n
    terms = []
    for a, b, c in triples(n):
        name = "".join(map(str, (a, b, c))) if n < 10 else "_".join(map(str, (a, b, c)))
        Pv = _module_to_I(Hx, chord.e_vector("P" + name))
        Qv = _module_to_I(Hx, chord.e_vector("Q" + name))
        terms.append(((b, c), (c, a), 2 * Pv))
        terms.append(((c, a), (a, b), -2 * Qv))

    def fn(p, X, Y):
        out = np.zeros(p.shape[:-1] + (Hx.I.dim,), dtype=complex)
        for ab, cd, vec in terms:
            out += _wedge(p, X, Y, ab, cd)[..., None] * vec
        return out

    return TwoForm(Hx.I.dim, fn, f"B{n}")


def kz_two_connection(n: int, N: int) -> KZInstance:
    """``(A, 0, -B/2)`` over ``U(2ch_n) -> U(ch_n^+)``; satisfies the fake-curvature condition."""
    chord = categorified_chord_xmod(n, N)
    Hx = chord.hopf
    H = Hx.H
    omega = _kz_form(H, n)
    B = kz_two_form_B(chord)
    m2 = TwoForm(B.dim, lambda p, X, Y: -0.5 * B(p, X, Y), f"-B{n}/2")
    conn = TwoConnection(Hx, omega, TwoForm.zero(Hx.I.dim), m2, name=f"KZ2({n})", meta={"n": n})
    return KZInstance(n, N, H, omega, chord, conn, B)


# builtin KZ paths


def kz_braid(n: int, word: list[int]) -> Path1:
    """Concatenated braid generators; ``-i`` is the inverse of ``sigma_i``."""
    if not word:
        raise InstanceError("empty braid word")
    z = config_point(n)
    path = None
    for letter in word:
        i = abs(letter)
        g = braid_generator(n, i, inverse=letter < 0, base=z)
        z = g.end
        path = g if path is None else path.concat(g)
    return path


def kz_loop(n: int, i: int, j: int, radius: float = 0.25) -> Path1:
    return strand_loop(n, i, j, radius)


def _bumped(g: Path1, strands: list[int], amplitude: float) -> Path1:
    """``g`` with the given (0-based) strands pushed by ``i * amplitude * sin(pi t)``."""
    mask = np.zeros(g.dim)
    mask[strands] = 1.0

    def fn(t):
        t = np.asarray(t, dtype=float)
        return g(t) + 1j * amplitude * np.sin(np.pi * t)[..., None] * mask

    def deriv(t, side):
        t = np.asarray(t, dtype=float)
        return g.velocity(t, side) + 1j * amplitude * np.pi * np.cos(np.pi * t)[..., None] * mask

    return Path1(fn, deriv, g.breakpoints, f"{g.name}+bump")


def kz_braid_homotopy(n: int, i: int = 1, ecc0: float = 1.0, ecc1: float = 0.5, inverse: bool = False,
                      bump0: float = 0.0, bump1: float = 0.3) -> Path2:
    """Straight-line 2-path between two exchanges of strands ``i, i+1`` (smoothstep in ``s``).

    The other strands make an excursion of height ``bump0`` (resp. ``bump1``)
    in the source (resp. target) path, so the surface is not contained in
    a complex line and the 2-form does not vanish on it.
    """
    others = [k for k in range(n) if k not in (i - 1, i)]
    g0 = _bumped(braid_generator(n, i, inverse, eccentricity=ecc0), others, bump0)
    g1 = _bumped(braid_generator(n, i, inverse, eccentricity=ecc1), others, bump1)
    return homotopy(g0, g1)


def kz_homotopic_pair(n: int, i: int = 1) -> tuple[Path2, Path2]:
    """Two 2-paths with common boundary: a direct homotopy, and one through an intermediate exchange."""
    direct = kz_braid_homotopy(n, i, 1.0, 0.7, bump0=0.0, bump1=0.3)
    via = kz_braid_homotopy(n, i, 1.0, 0.4, bump0=0.0, bump1=-0.2).vcomp(
        kz_braid_homotopy(n, i, 0.4, 0.7, bump0=-0.2, bump1=0.3))
    return direct, via


# ---------------------------------------------------------------------------
# chain complexes


STANDARD_COMPLEXES: dict[str, dict] = {
    "C->C": {"dims": [1, 1], "boundaries": [[[1]]]},
    "C2->C": {"dims": [1, 2], "boundaries": [[[1, 0]]]},
    "C->C2->C": {"dims": [1, 2, 1], "boundaries": [[[0, 1]], [[1], [0]]]},
}


def chain_complex(spec: str | Mapping | ChainComplex) -> ChainComplex:
    if isinstance(spec, ChainComplex):
        return spec
    if isinstance(spec, str):
        if spec not in STANDARD_COMPLEXES:
            raise InstanceError(f"unknown complex {spec!r}; known: {sorted(STANDARD_COMPLEXES)}")
        spec = STANDARD_COMPLEXES[spec]
    return ChainComplex.from_json(spec)


# polynomials in (x, y) with exact vector coefficients: {(i, j): vector}

Poly = dict


def _padd(*ps: Poly) -> Poly:
    out: Poly = {}
    for p in ps:
        for k, v in p.items():
            out[k] = out[k] + v if k in out else v.copy()
    return {k: v for k, v in out.items() if any(c != 0 for c in v)}


def _pscale(p: Poly, c) -> Poly:
    return {k: c * v for k, v in p.items()}


def _pderiv(p: Poly, var: int) -> Poly:
    out: Poly = {}
    for (i, j), v in p.items():
        e = (i, j)[var]
        if e:
            key = (i - 1, j) if var == 0 else (i, j - 1)
            out[key] = out[key] + e * v if key in out else e * v
    return out


def _pmap(p: Poly, f: Callable) -> Poly:
    return _padd({k: np.asarray(f(v), dtype=object) for k, v in p.items()})


def _pscalar_times(s: dict, p: Poly) -> Poly:
    out: Poly = {}
    for (i, j), c in s.items():
        for (k, l), v in p.items():
            key = (i + k, j + l)
            out[key] = out[key] + c * v if key in out else c * v
    return _padd(out)


def _pbilinear(f: Callable, p: Poly, q: Poly) -> Poly:
    out: Poly = {}
    for (i, j), u in p.items():
        for (k, l), v in q.items():
            key = (i + k, j + l)
            w = np.asarray(f(u, v), dtype=object)
            out[key] = out[key] + w if key in out else w
    return _padd(out)


def _pconst(v: np.ndarray) -> Poly:
    return _padd({(0, 0): np.asarray(v, dtype=object)})


def _scalar_deriv(s: dict, var: int) -> dict:
    out: dict = {}
    for (i, j), c in s.items():
        e = (i, j)[var]
        if e:
            key = (i - 1, j) if var == 0 else (i, j - 1)
            out[key] = out.get(key, ZERO) + e * c
    return out


def _compile(p: Poly, dim: int) -> Callable[[np.ndarray], np.ndarray]:
    """Numeric evaluator ``points (..., 2) -> (..., dim)``."""
    if not p:
        return lambda pts: np.zeros(np.shape(pts)[:-1] + (dim,), dtype=complex)
    exps = np.array(list(p.keys()))
    coef = np.array([to_complex(v) for v in p.values()])

    def ev(pts):
        pts = np.asarray(pts, dtype=complex)
        mon = pts[..., 0, None] ** exps[:, 0] * pts[..., 1, None] ** exps[:, 1]
        return mon @ coef

    return ev


def _monomials(degree: int) -> list[tuple[int, int]]:
    return [(i, j) for i in range(degree + 1) for j in range(degree + 1 - i)]


@dataclass(eq=False)
class ChainInstance:
    """A 2-connection on the plane over ``HOM(V)`` with exact polynomial coefficients.

    ``omega = f1 dx + f2 dy`` and ``m_i = g_i dx ^ dy``.  ``certificate``
    holds the exact fake-curvature residuals (all zero by construction).
    """

    V: ChainComplex
    hom: HomComplex
    f1: Poly
    f2: Poly
    g1: Poly
    g2: Poly
    certificate: dict[str, Fraction]
    seed: int | None = None
    connection: TwoConnection = field(init=False)

    def __post_init__(self) -> None:
        X = self.xmod
        F1, F2 = _compile(self.f1, X.B.dim), _compile(self.f2, X.B.dim)
        G1, G2 = _compile(self.g1, X.A.dim), _compile(self.g2, X.A.dim)
        omega = ConnectionForm(X.B.dim, lambda p, V: F1(p) * V[..., :1] + F2(p) * V[..., 1:2], "omega")

        def area(V, W):
            return (V[..., 0] * W[..., 1] - V[..., 1] * W[..., 0])[..., None]

        m1 = TwoForm(X.A.dim, lambda p, V, W: G1(p) * area(V, W), "m1")
        m2 = TwoForm(X.A.dim, lambda p, V, W: G2(p) * area(V, W), "m2")
        self.connection = TwoConnection(X, omega, m1, m2, name="chain", meta={"seed": self.seed})

    @property
    def xmod(self) -> BareXMod:
        return self.hom.xmod

    def lift(self, N: int) -> "LiftedChainInstance":
        """The same forms as primitive letters over ``U(Lie(HOM(V)))`` truncated at ``N``."""
        Hx = enveloping_xmod(lie_of(self.xmod), N)
        H, I = Hx.H, Hx.I
        LB = np.zeros((H.dim, self.xmod.B.dim), dtype=complex)
        for j in range(self.xmod.B.dim):
            LB[H.words.index((j,)), j] = 1.0
        LA = np.zeros((I.dim, self.xmod.A.dim), dtype=complex)
        for j in range(self.xmod.A.dim):
            LA[I.words.index((j,)), j] = 1.0
        c = self.connection
        omega = ConnectionForm(H.dim, lambda p, V: c.omega(p, V) @ LB.T, "omega")
        m1 = TwoForm(I.dim, lambda p, V, W: c.m1(p, V, W) @ LA.T, "m1")
        m2 = TwoForm(I.dim, lambda p, V, W: c.m2(p, V, W) @ LA.T, "m2")
        conn = TwoConnection(Hx, omega, m1, m2, name="U(chain)", meta={"seed": self.seed})
        return LiftedChainInstance(self, Hx, conn, N)


@dataclass(eq=False)
class LiftedChainInstance:
    base: ChainInstance
    hopf: HopfXMod
    connection: TwoConnection
    N: int


def _fake_curvature_certificate(X: BareXMod, f1: Poly, f2: Poly, g1: Poly, g2: Poly) -> dict[str, Fraction]:
    d_omega = _padd(_pderiv(f2, 0), _pscale(_pderiv(f1, 1), -ONE))
    r1 = _padd(_pmap(g1, X.d), _pscale(d_omega, -ONE))
    br = _padd(_pbilinear(X.B.mul, f1, f2), _pscale(_pbilinear(X.B.mul, f2, f1), -ONE))
    r2 = _padd(_pmap(g2, X.d), br)

    def size(p):
        return max((abs(c) for v in p.values() for c in v), default=Fraction(0))

    return {"d m1 = d omega": size(r1), "d m2 = -[omega, omega]": size(r2)}


def chain_two_connection(V: str | Mapping | ChainComplex = "C->C", seed: int | None = 0, degree: int = 1,
                         scale: Fraction = Fraction(1, 2), zero: bool = False) -> ChainInstance:
    """Seeded synthetic 2-connection over ``HOM(V)`` on the plane.

    ``f_i = c_i b0 + d(alpha_i)`` with ``(c1, c2)`` a gradient,
    ``m1 = d_x alpha2 - d_y alpha1 + k1`` and
    ``m2 = -(c1 (b0 |> alpha2 - alpha2 <| b0) - c2 (b0 |> alpha1 - alpha1 <| b0)
    + alpha1 <| d(alpha2) - alpha2 <| d(alpha1)) + k2`` with ``k_i`` in the kernel of ``d``.
    """
    V = chain_complex(V)
    hom = build_hom_complex(V)
    X = hom.xmod
    A, B = X.A, X.B
    if zero:
        return ChainInstance(V, hom, {}, {}, {}, {}, _fake_curvature_certificate(X, {}, {}, {}, {}), seed)
    rng = random.Random(seed)

    def rnum():
        return Fraction(rng.randint(-3, 3), rng.choice((2, 3, 4))) * scale

    def rvec(dim):
        v = zeros(dim)
        for i in range(dim):
            v[i] = rnum()
        return v

    def rpoly(dim, deg):
        return _padd({m: rvec(dim) for m in _monomials(deg)})

    phi = {m: rnum() for m in _monomials(degree + 1)}
    c1, c2 = _scalar_deriv(phi, 0), _scalar_deriv(phi, 1)
    b0 = _pconst(rvec(B.dim))
    alpha1, alpha2 = rpoly(A.dim, degree), rpoly(A.dim, degree)
    dmat = np.empty((B.dim, A.dim), dtype=object)
    for j in range(A.dim):
        dmat[:, j] = X.d(A.basis_vector(j))
    kernel = nullspace(dmat)

    def kernel_poly():
        out: Poly = {}
        for v in kernel:
            s = {m: rnum() for m in _monomials(degree)}
            out = _padd(out, _pscalar_times(s, _pconst(np.asarray(v, dtype=object))))
        return out

    def conj(p):
        return _padd(_pbilinear(X.act_left, b0, p), _pscale(_pbilinear(lambda a, b: X.act_right(a, b), p, b0), -ONE))

    f1 = _padd(_pscalar_times(c1, b0), _pmap(alpha1, X.d))
    f2 = _padd(_pscalar_times(c2, b0), _pmap(alpha2, X.d))
    g1 = _padd(_pderiv(alpha2, 0), _pscale(_pderiv(alpha1, 1), -ONE), kernel_poly())
    inner = _padd(
        _pscalar_times(c1, conj(alpha2)),
        _pscale(_pscalar_times(c2, conj(alpha1)), -ONE),
        _pbilinear(X.act_right, alpha1, _pmap(alpha2, X.d)),
        _pscale(_pbilinear(X.act_right, alpha2, _pmap(alpha1, X.d)), -ONE),
    )
    g2 = _padd(_pscale(inner, -ONE), kernel_poly())
    cert = _fake_curvature_certificate(X, f1, f2, g1, g2)
    if any(v != 0 for v in cert.values()):
        raise InstanceError(f"fake-curvature certificate failed: {cert}")
    return ChainInstance(V, hom, f1, f2, g1, g2, cert, seed)


# builtin planar paths for chain instances


def planar_square(start: tuple[float, float] = (0.0, 0.0), scale: float = 0.5, bend: float = 0.3) -> Path2:
    """A non-thin 2-path in the plane between two bent curves from ``start`` to ``start + (scale, 0)``."""
    x0, y0 = start

    def pt(u, v):
        return [x0 + u * scale, y0 + v * scale]

    g0 = bezier([pt(0, 0), pt(1 / 3, -bend), pt(2 / 3, bend), pt(1, 0)])
    g1 = bezier([pt(0, 0), pt(1 / 3, bend), pt(2 / 3, 1.5 * bend), pt(1, 0)])
    return homotopy(g0, g1)
