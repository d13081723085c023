"""Power-series crossed modules of groups and their 2-cell calculi.

Two crossed modules of groups are modeled:

* :class:`HopfGroupXMod`: group-like series of a Hopf crossed module, with
  the action extended degree by degree.
* :class:`BareGroupXMod`: series ``1 + sum h^n a_n`` in ``A`` with a unit
  adjoined, acting by ``b |> (1, a) = (1, b |> a <| b^-1)``.

Cells store a source 1-morphism and a filler; targets are derived.
"""
from __future__ import annotations

import json
from dataclasses import dataclass
from functools import cached_property
from typing import Sequence

import numpy as np

from .carriers import Carrier, SmashProduct, is_exact, unitization
from .linalg import ZERO, is_zero, to_complex, zeros
from .series import (
    SeriesError,
    TruncatedSeries,
    is_grouplike,
    series_invert,
    series_mul,
)
from .xmod import BareXMod, HopfXMod


class CellError(ValueError):
    """Incompatible cells."""


class BoundaryMismatchError(CellError):
    pass


class NotCrossedError(CellError):
    """Horizontal composition needs a crossed module."""


# ---------------------------------------------------------------------------
# series-level actions


def _cauchy(N: int, f, a: TruncatedSeries, b: TruncatedSeries, carrier: Carrier) -> TruncatedSeries:
    exact = a.exact and b.exact
    out = []
    for n in range(N + 1):
        acc = carrier.zero(exact)
        for i in range(n + 1):
            x, y = a.coeffs[i], b.coeffs[n - i]
            if any(c != 0 for c in x) and any(c != 0 for c in y):
                acc = acc + f(x, y)
        out.append(acc)
    return TruncatedSeries(carrier, tuple(out))


def series_act_left(X: BareXMod, b: TruncatedSeries, a: TruncatedSeries) -> TruncatedSeries:
    return _cauchy(a.N, X.act_left, b, a, X.A)


def series_act_right(X: BareXMod, a: TruncatedSeries, b: TruncatedSeries) -> TruncatedSeries:
    return _cauchy(a.N, lambda x, y: X.act_right(y, x), b, a, X.A)


def series_rho(Hx: HopfXMod, x: TruncatedSeries, v: TruncatedSeries) -> TruncatedSeries:
    return _cauchy(v.N, Hx.act, x, v, Hx.I)


def series_map(s: TruncatedSeries, f, carrier: Carrier) -> TruncatedSeries:
    return s.map(f, carrier)


def _close(a: TruncatedSeries, b: TruncatedSeries, tol: float) -> bool:
    return (a - b).is_zero(tol)


# ---------------------------------------------------------------------------
# crossed modules of groups


class GroupXMod:
    """Interface: ``d: E -> G`` and ``G`` acting on ``E`` by automorphisms."""

    top: Carrier
    bottom: Carrier
    N: int
    kind: str = "crossed"
    name: str = "group"

    def d(self, e: TruncatedSeries) -> TruncatedSeries:
        raise NotImplementedError

    def act(self, g: TruncatedSeries, e: TruncatedSeries) -> TruncatedSeries:
        raise NotImplementedError

    def canonical(self, e: TruncatedSeries) -> TruncatedSeries:
        """Canonical representative of a top element."""
        return e

    def top_one(self, exact: bool = True) -> TruncatedSeries:
        return TruncatedSeries.one(self.top, self.N, exact)

    def bottom_one(self, exact: bool = True) -> TruncatedSeries:
        return TruncatedSeries.one(self.bottom, self.N, exact)

    def same_top(self, e: TruncatedSeries, f: TruncatedSeries, tol: float = 0.0) -> bool:
        return _close(self.canonical(e), self.canonical(f), tol)

    def peiffer_residuals(
        self, gs: Sequence[TruncatedSeries], es: Sequence[TruncatedSeries]
    ) -> dict[str, float]:
        """Largest residuals of both group Peiffer relations and the action laws on samples."""
        first = second = hom = act = 0.0
        for g in gs:
            for e in es:
                lhs = self.d(self.act(g, e))
                rhs = series_mul(series_mul(g, self.d(e)), series_invert(g))
                first = max(first, (lhs - rhs).max_abs())
            for g2 in gs:
                for e in es:
                    r = self.canonical(self.act(series_mul(g, g2), e)) - self.canonical(self.act(g, self.act(g2, e)))
                    act = max(act, r.max_abs())
        for e in es:
            for f in es:
                lhs = self.act(self.d(e), f)
                rhs = series_mul(series_mul(e, f), series_invert(e))
                second = max(second, (self.canonical(lhs) - self.canonical(rhs)).max_abs())
                r = self.d(series_mul(e, f)) - series_mul(self.d(e), self.d(f))
                hom = max(hom, r.max_abs())
        return {"first Peiffer": first, "second Peiffer": second, "boundary is a group map": hom, "action law": act}


@dataclass(eq=False)
class HopfGroupXMod(GroupXMod):
    """Group-like series of a Hopf crossed module."""

    hopf: HopfXMod

    def __post_init__(self) -> None:
        self.top = self.hopf.I
        self.bottom = self.hopf.H
        self.N = self.hopf.N
        self.kind = self.hopf.kind
        self.name = f"{self.hopf.name}*gl"

    def d(self, e: TruncatedSeries) -> TruncatedSeries:
        return e.map(self.hopf.d, self.bottom)

    def act(self, g: TruncatedSeries, e: TruncatedSeries) -> TruncatedSeries:
        return series_rho(self.hopf, g, e)

    def is_member(self, e: TruncatedSeries, tol: float = 0.0) -> bool:
        return e.constant_is_unit() and is_grouplike(e, tol)

    def is_extended_member(self, e: TruncatedSeries, tol: float = 0.0) -> bool:
        """Membership in the pre-crossed extension: unit constant term and group-like boundary."""
        return e.constant_is_unit() and is_grouplike(self.d(e), tol)


@dataclass(eq=False)
class BareGroupXMod(GroupXMod):
    """``d: A_.^* -> B^*`` for a unital bare crossed module."""

    bare: BareXMod
    order: int | None = None

    def __post_init__(self) -> None:
        if self.bare.weighted:
            self.N = self.bare.N
        elif self.order is None:
            raise CellError("an unweighted crossed module needs an explicit series order")
        else:
            self.N = self.order
        self.top = unitization(self.bare.A)
        self.bottom = self.bare.B
        self.kind = self.bare.kind
        self.name = f"{self.bare.name}.*"

    # conversions between A-series and A_.-series
    def part(self, e: TruncatedSeries) -> TruncatedSeries:
        """The ``A``-component of an element of ``A_.[[h]]``."""
        return TruncatedSeries(self.bare.A, tuple(np.asarray(c[1:]) for c in e.coeffs))

    def scalar(self, e: TruncatedSeries) -> list:
        return [c[0] for c in e.coeffs]

    def element(self, a: TruncatedSeries, scalars: Sequence | None = None) -> TruncatedSeries:
        """``(1, a)`` or ``(scalars, a)`` in ``A_.[[h]]``."""
        exact = a.exact
        coeffs = []
        for k, c in enumerate(a.coeffs):
            v = zeros(self.top.dim) if exact else np.zeros(self.top.dim, dtype=complex)
            v[1:] = c
            if scalars is not None:
                v[0] = scalars[k]
            elif k == 0:
                v[0] = 1 if exact else 1.0
            coeffs.append(v)
        return TruncatedSeries(self.top, tuple(coeffs))

    def d(self, e: TruncatedSeries) -> TruncatedSeries:
        B = self.bottom
        u = B.unit_vector(e.exact)
        return TruncatedSeries(B, tuple(c[0] * u + self.bare.d(np.asarray(c[1:])) for c in e.coeffs))

    def act(self, g: TruncatedSeries, e: TruncatedSeries) -> TruncatedSeries:
        a = self.part(e)
        moved = series_act_right(self.bare, series_act_left(self.bare, g, a), series_invert(g))
        return self.element(moved, self.scalar(e))

    def canonical(self, e: TruncatedSeries) -> TruncatedSeries:
        if self.bare.ideal is None:
            return e
        a = self.part(e)
        red = TruncatedSeries(a.carrier, tuple(self.bare.reduce(c, k) for k, c in enumerate(a.coeffs)))
        return self.element(red, self.scalar(e))

    def canonical_A(self, a: TruncatedSeries) -> TruncatedSeries:
        if self.bare.ideal is None:
            return a
        return TruncatedSeries(a.carrier, tuple(self.bare.reduce(c, k) for k, c in enumerate(a.coeffs)))


# ---------------------------------------------------------------------------
# C^x cells


@dataclass(frozen=True, eq=False)
class TimesCell:
    """A 2-cell ``g => d(e)^-1 g`` of a crossed module of groups."""

    xm: GroupXMod
    g: TruncatedSeries
    e: TruncatedSeries

    @property
    def source(self) -> TruncatedSeries:
        return self.g

    @cached_property
    def target(self) -> TruncatedSeries:
        return series_mul(series_invert(self.xm.d(self.e)), self.g)

    def to_json(self) -> dict:
        return {
            "source": self.g.to_json(),
            "filler": self.e.to_json(),
            "carrier_id": [self.xm.bottom.name, self.xm.top.name],
            "N": self.g.N,
        }


def _require_match(a: TruncatedSeries, b: TruncatedSeries, tol: float, what: str) -> None:
    if not (a - b).is_zero(tol):
        raise BoundaryMismatchError(f"{what}: boundaries differ by {(a - b).max_abs():.3g}")


def times_vcomp(c1: TimesCell, c2: TimesCell, tol: float = 1e-9) -> TimesCell:
    """``c1`` then ``c2``; the source of ``c2`` must be the target of ``c1``."""
    _require_match(c1.target, c2.source, tol, "vertical composition")
    return TimesCell(c1.xm, c1.g, series_mul(c1.e, c2.e))


def times_vinv(c: TimesCell) -> TimesCell:
    return TimesCell(c.xm, c.target, series_invert(c.e))


def times_whisker_r(c: TimesCell, h: TruncatedSeries) -> TimesCell:
    """Precompose with the 1-morphism ``h``: ``gh => d(e)^-1 gh``."""
    return TimesCell(c.xm, series_mul(c.g, h), c.e)


def times_whisker_l(h: TruncatedSeries, c: TimesCell) -> TimesCell:
    """Postcompose with the 1-morphism ``h``: ``hg => h d(e)^-1 g``."""
    return TimesCell(c.xm, series_mul(h, c.g), c.xm.act(h, c.e))


def times_hcomp(c1: TimesCell, c2: TimesCell) -> TimesCell:
    """Horizontal composite with source ``g g'`` and filler ``(g |> e') e``."""
    xm = c1.xm
    return TimesCell(xm, series_mul(c1.g, c2.g), series_mul(xm.act(c1.g, c2.e), c1.e))


def times_hcomp_alt(c1: TimesCell, c2: TimesCell) -> TimesCell:
    """The other bracketing: filler ``e ((d(e)^-1 g) |> e')``."""
    xm = c1.xm
    return TimesCell(xm, series_mul(c1.g, c2.g), series_mul(c1.e, xm.act(c1.target, c2.e)))


def times_hinv(c: TimesCell) -> TimesCell:
    gi = series_invert(c.g)
    return TimesCell(c.xm, gi, c.xm.act(gi, series_invert(c.e)))


def times_equal(c1: TimesCell, c2: TimesCell, tol: float = 0.0) -> bool:
    return (c1.g - c2.g).is_zero(tol) and c1.xm.same_top(c1.e, c2.e, tol)


# ---------------------------------------------------------------------------
# C^+ cells


@dataclass(frozen=True, eq=False)
class PlusCell:
    """A 2-cell ``b => b + d(a)`` of a bare crossed module."""

    xm: BareXMod
    b: TruncatedSeries
    a: TruncatedSeries

    @property
    def source(self) -> TruncatedSeries:
        return self.b

    @cached_property
    def target(self) -> TruncatedSeries:
        return self.b + self.a.map(self.xm.d, self.xm.B)

    def canonical_filler(self) -> TruncatedSeries:
        if self.xm.ideal is None:
            return self.a
        return TruncatedSeries(self.a.carrier, tuple(self.xm.reduce(c, k) for k, c in enumerate(self.a.coeffs)))

    def to_json(self) -> dict:
        return {
            "source": self.b.to_json(),
            "filler": self.a.to_json(),
            "carrier_id": [self.xm.B.name, self.xm.A.name],
            "N": self.b.N,
        }


def plus_vcomp(c1: PlusCell, c2: PlusCell, tol: float = 1e-9) -> PlusCell:
    _require_match(c1.target, c2.source, tol, "vertical composition")
    return PlusCell(c1.xm, c1.b, c1.a + c2.a)


def plus_vinv(c: PlusCell) -> PlusCell:
    return PlusCell(c.xm, c.target, -c.a)


def plus_whisker_l(b: TruncatedSeries, c: PlusCell) -> PlusCell:
    return PlusCell(c.xm, series_mul(b, c.b), series_act_left(c.xm, b, c.a))


def plus_whisker_r(c: PlusCell, b: TruncatedSeries) -> PlusCell:
    return PlusCell(c.xm, series_mul(c.b, b), series_act_right(c.xm, c.a, b))


def plus_hcomp(c1: PlusCell, c2: PlusCell, allow_precrossed: bool = False) -> PlusCell:
    """Source ``b b'`` and filler ``b |> a' + a <| b' + a a'``.

    Only a crossed module gives a well-defined (interchange-respecting)
    composite; ``allow_precrossed`` evaluates the formula anyway, which is
    how interchange failures are exhibited.
    """
    X = c1.xm
    if X.kind != "crossed" and not allow_precrossed:
        raise NotCrossedError("horizontal composition of C+ cells needs a crossed module")
    a = series_act_left(X, c1.b, c2.a) + series_act_right(X, c1.a, c2.b) + series_mul(c1.a, c2.a)
    return PlusCell(X, series_mul(c1.b, c2.b), a)


def plus_hinv(c: PlusCell) -> PlusCell:
    try:
        bi = series_invert(c.b)
        ti = series_invert(c.target)
    except SeriesError as exc:
        raise CellError(f"horizontal inverse needs invertible boundaries: {exc}") from None
    return PlusCell(c.xm, bi, -series_act_right(c.xm, series_act_left(c.xm, ti, c.a), bi))


def plus_equal(c1: PlusCell, c2: PlusCell, tol: float = 0.0) -> bool:
    return (c1.b - c2.b).is_zero(tol) and (c1.canonical_filler() - c2.canonical_filler()).is_zero(tol)


def plus_distance(c1: PlusCell, c2: PlusCell) -> float:
    return max((c1.b - c2.b).max_abs(), (c1.canonical_filler() - c2.canonical_filler()).max_abs())


# ---------------------------------------------------------------------------
# structural maps


def map_T(cell: TimesCell) -> PlusCell:
    """``(g, e) -> (g, (e^-1 - 1) <| g)`` from ``C^x(A_.^*)`` to ``C^+(A)``."""
    xm = cell.xm
    if not isinstance(xm, BareGroupXMod):
        raise CellError("T applies to cells of a bare group crossed module")
    inv = xm.part(series_invert(cell.e))
    return PlusCell(xm.bare, cell.g, series_act_right(xm.bare, inv, cell.g))


@dataclass(eq=False)
class Inc:
    """Group-like series of ``I -> H`` into ``BA(I -> H)`` with a unit adjoined."""

    hopf_group: HopfGroupXMod
    bare_group: BareGroupXMod
    smash: SmashProduct

    def J(self, e: TruncatedSeries) -> TruncatedSeries:
        sm = self.smash
        H = sm.H
        one = H.unit_vector(e.exact)
        coeffs = []
        for k, c in enumerate(e.coeffs):
            v = c.copy()
            if k == 0:
                v = v - sm.I.unit_vector(e.exact)
            coeffs.append(sm.to_augmented(sm.tensor(v, one)))
        a = TruncatedSeries(sm.augmented, tuple(coeffs))
        return self.bare_group.canonical(self.bare_group.element(a))

    def iota(self, g: TruncatedSeries) -> TruncatedSeries:
        return g

    def cell(self, c: TimesCell) -> TimesCell:
        return TimesCell(self.bare_group, self.iota(c.g), self.J(c.e))


def build_inc(hopf_group: HopfGroupXMod, ba_crossed: BareXMod) -> Inc:
    bg = BareGroupXMod(ba_crossed)
    return Inc(hopf_group, bg, ba_crossed.meta["smash"])


@dataclass(eq=False)
class Counits:
    """Counit maps for a bare crossed module ``X`` and ``U(Lie(X))``.

    ``xi_B`` and ``xi_flat`` send PBW monomials to ordered products in ``B``
    and ``A``; ``kappa(v (x) x) = xi_flat(v) <| xi_B(x)``.
    """

    bare: BareXMod
    hopf: HopfXMod

    @cached_property
    def xi_B_matrix(self) -> np.ndarray:
        H, B = self.hopf.H, self.bare.B
        m = np.empty((B.dim, H.dim), dtype=object)
        for k, word in enumerate(H.words):
            acc = B.unit_vector()
            for j in word:
                acc = B.mul(acc, B.basis_vector(j))
            m[:, k] = acc
        return m

    @cached_property
    def xi_flat_matrix(self) -> np.ndarray:
        I, A = self.hopf.I, self.bare.A
        m = np.empty((A.dim, I.dim), dtype=object)
        m[:] = ZERO
        for k, word in enumerate(I.words):
            if not word:
                continue
            acc = A.basis_vector(word[0])
            for j in word[1:]:
                acc = A.mul(acc, A.basis_vector(j))
            m[:, k] = acc
        return m

    def xi_B(self, x: np.ndarray) -> np.ndarray:
        return self.xi_B_matrix.dot(x) if is_exact(x) else to_complex(self.xi_B_matrix) @ x

    def xi_flat(self, v: np.ndarray) -> np.ndarray:
        return self.xi_flat_matrix.dot(v) if is_exact(v) else to_complex(self.xi_flat_matrix) @ v

    @cached_property
    def kappa_matrix(self) -> np.ndarray:
        """``kappa`` on the basis of ``I^0 (x) H``."""
        sm = self.hopf.smash
        A = self.bare.A
        m = np.empty((A.dim, len(sm.augmented_pairs)), dtype=object)
        for k, (v, x) in enumerate(sm.augmented_pairs):
            fv = self.xi_flat_matrix[:, v].copy()
            m[:, k] = self.bare.act_right(fv, self.xi_B_matrix[:, x].copy())
        return m

    def kappa(self, a: np.ndarray) -> np.ndarray:
        return self.kappa_matrix.dot(a) if is_exact(a) else to_complex(self.kappa_matrix) @ a

    # group-level maps
    def proj(self, bare_group: BareGroupXMod, e: TruncatedSeries) -> TruncatedSeries:
        """``xi_sharp``: ``e -> (1, xi_flat(e - 1))``."""
        one = TruncatedSeries.one(e.carrier, e.N, e.exact)
        return bare_group.element((e - one).map(self.xi_flat, self.bare.A))

    def proj_cell(self, bare_group: BareGroupXMod, c: TimesCell) -> TimesCell:
        return TimesCell(bare_group, c.g.map(self.xi_B, self.bare.B), self.proj(bare_group, c.e))

    def K_cell(self, c: PlusCell) -> PlusCell:
        return PlusCell(self.bare, c.b.map(self.xi_B, self.bare.B), c.a.map(self.kappa, self.bare.A))

    def K_group(self, bare_group: BareGroupXMod, ba_group: BareGroupXMod, e: TruncatedSeries) -> TruncatedSeries:
        """``K`` with a unit adjoined: ``(1, a) -> (1, kappa(a))``."""
        return bare_group.element(ba_group.part(e).map(self.kappa, self.bare.A), ba_group.scalar(e))


def cell_from_json(xm, data: dict, kind: str) -> TimesCell | PlusCell:
    if kind == "times":
        return TimesCell(xm, TruncatedSeries.from_json(xm.bottom, data["source"]),
                         TruncatedSeries.from_json(xm.top, data["filler"]))
    return PlusCell(xm, TruncatedSeries.from_json(xm.B, data["source"]),
                    TruncatedSeries.from_json(xm.A, data["filler"]))


def dumps_cell(cell: TimesCell | PlusCell) -> str:
    return json.dumps(cell.to_json(), sort_keys=True)
