"""Crossed and pre-crossed modules of bare, Hopf and Lie algebras.

All structure maps are stored as exact tables on basis elements; numeric
(complex) tensors are derived lazily for the holonomy engine.

Truncation follows the slot convention of :mod:`holotwo.carriers`: an
operation on basis elements of weights ``w1, w2`` lands in slot
``w1 + w2`` and is discarded when that exceeds the truncation order.  Axiom
checks only visit tuples whose total weight fits.
"""
from __future__ import annotations

import itertools
import json
from collections import defaultdict
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from pathlib import Path
from typing import Callable, Iterable, Mapping, Sequence

import numpy as np

from .carriers import (
    Carrier,
    CarrierError,
    FreeModuleCarrier,
    LieAlgebra,
    SmashProduct,
    WordAlgebra,
    adjoint_action,
    build_free_module,
    build_smash_product,
    carrier_from_matrices,
    chord_algebra,
    chord_name,
    enveloping_algebra,
    lie_from_carrier,
    is_exact,
    sparse_to_vector,
    vector_to_sparse,
)
from .linalg import ONE, ZERO, Basis, Subspace, exact_matrix, frac, is_zero, nullspace, to_complex, zeros

Sparse = dict[int, Fraction]


class XModError(ValueError):
    """Invalid crossed-module data."""


class NotAChainComplexError(XModError):
    """The boundary of a chain complex does not square to zero."""


# ---------------------------------------------------------------------------
# reports


@dataclass
class CheckOutcome:
    name: str
    checked: int = 0
    violations: int = 0
    max_residual: float = 0.0
    witnesses: list[str] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return self.violations == 0

    def record(self, residual: np.ndarray, witness: Callable[[], str]) -> None:
        self.checked += 1
        r = float(np.max(np.abs(to_complex(residual)), initial=0.0)) if len(residual) else 0.0
        self.max_residual = max(self.max_residual, r)
        if r > 0:
            self.violations += 1
            if len(self.witnesses) < 5:
                self.witnesses.append(witness())


@dataclass
class AxiomReport:
    subject: str
    checks: dict[str, CheckOutcome] = field(default_factory=dict)

    def outcome(self, name: str) -> CheckOutcome:
        return self.checks.setdefault(name, CheckOutcome(name))

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks.values())

    def failed(self) -> list[str]:
        return sorted(n for n, c in self.checks.items() if not c.passed)

    def __getitem__(self, name: str) -> CheckOutcome:
        return self.checks[name]

    def to_json(self) -> dict:
        return {
            "subject": self.subject,
            "passed": self.passed,
            "checks": {
                n: {
                    "checked": c.checked,
                    "violations": c.violations,
                    "max_residual": c.max_residual,
                    "passed": c.passed,
                    "witnesses": c.witnesses,
                }
                for n, c in sorted(self.checks.items())
            },
        }


# ---------------------------------------------------------------------------
# bare algebra crossed modules


def _sparse_apply(table: Mapping, key_a: int, vec: np.ndarray, n: int, left: bool) -> np.ndarray:
    out = zeros(n)
    for j, c in enumerate(vec):
        if c != 0:
            for k, ck in table.get((key_a, j) if left else (j, key_a), {}).items():
                out[k] += c * ck
    return out


@dataclass(eq=False)
class BareXMod:
    """``(d: A -> B, |>, <|)`` with ``A`` possibly non-unital and ``B`` unital.

    ``left[(b, a)]`` is ``e_b |> e_a`` and ``right[(a, b)]`` is ``e_a <| e_b``.
    ``ideal`` optionally holds a Peiffer ideal per slot; every identity is
    then read modulo the ideal of the slot it lives in.
    """

    A: Carrier
    B: Carrier
    boundary: np.ndarray
    left: dict[tuple[int, int], Sparse]
    right: dict[tuple[int, int], Sparse]
    kind: str = "crossed"
    name: str = "bare"
    ideal: list[Subspace] | None = None
    meta: dict = field(default_factory=dict)

    def __post_init__(self) -> None:
        if self.kind not in ("crossed", "pre-crossed"):
            raise XModError(f"unknown kind {self.kind!r}")
        if self.boundary.shape != (self.B.dim, self.A.dim):
            raise XModError("boundary has the wrong shape")
        if self.B.unit is None:
            raise XModError("the bottom algebra must be unital")

    @property
    def N(self) -> int:
        return self.A.max_weight if self.A.max_weight is not None else 0

    @property
    def weighted(self) -> bool:
        return self.A.max_weight is not None

    def fits(self, *weights: int) -> bool:
        return not self.weighted or sum(weights) <= self.N

    # exact operations
    def d(self, a: np.ndarray) -> np.ndarray:
        if is_exact(a):
            return self.boundary.dot(a)
        return self.boundary_numeric @ np.asarray(a, dtype=complex)

    def act_left(self, b: np.ndarray, a: np.ndarray) -> np.ndarray:
        if is_exact(a) and is_exact(b):
            out = zeros(self.A.dim)
            for i, c in enumerate(b):
                if c != 0:
                    out = out + c * _sparse_apply(self.left, i, a, self.A.dim, True)
            return out
        return np.einsum("i,ijk,k->j", to_complex(b), self.left_tensor, to_complex(a))

    def act_right(self, a: np.ndarray, b: np.ndarray) -> np.ndarray:
        if is_exact(a) and is_exact(b):
            out = zeros(self.A.dim)
            for i, c in enumerate(b):
                if c != 0:
                    out = out + c * _sparse_apply(self.right, i, a, self.A.dim, False)
            return out
        return np.einsum("i,ijk,k->j", to_complex(b), self.right_tensor, to_complex(a))

    def peiffer_bracket(self, a: np.ndarray, a2: np.ndarray) -> np.ndarray:
        """``{a, a'} = d(a) |> a' - a <| d(a')``."""
        return self.act_left(self.d(a), a2) - self.act_right(a, self.d(a2))

    def peiffer_defects(self, a: np.ndarray, a2: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        """``d(a) |> a' - a a'`` and ``a <| d(a') - a a'``."""
        aa = self.A.mul(a, a2)
        return self.act_left(self.d(a), a2) - aa, self.act_right(a, self.d(a2)) - aa

    # numeric tensors
    @cached_property
    def boundary_numeric(self) -> np.ndarray:
        return to_complex(self.boundary)

    @cached_property
    def left_tensor(self) -> np.ndarray:
        """``T[b] @ a`` is ``e_b |> a``."""
        t = np.zeros((self.B.dim, self.A.dim, self.A.dim), dtype=complex)
        for (b, a), entry in self.left.items():
            for k, c in entry.items():
                t[b, k, a] += complex(c)
        return t

    @cached_property
    def right_tensor(self) -> np.ndarray:
        """``T[b] @ a`` is ``a <| e_b``."""
        t = np.zeros((self.B.dim, self.A.dim, self.A.dim), dtype=complex)
        for (a, b), entry in self.right.items():
            for k, c in entry.items():
                t[b, k, a] += complex(c)
        return t

    # Peiffer quotient
    def reduce(self, v: np.ndarray, slot: int = 0) -> np.ndarray:
        if self.ideal is None:
            return v
        sub = self.ideal[min(slot, len(self.ideal) - 1)]
        if is_exact(v):
            return sub.reduce(v)
        rows, piv = self._numeric_ideal[min(slot, len(self.ideal) - 1)]
        v = np.asarray(v, dtype=complex)
        if not len(piv):
            return v
        return v - v[..., piv] @ rows

    @cached_property
    def _numeric_ideal(self) -> list[tuple[np.ndarray, np.ndarray]]:
        return [(to_complex(s.rows).reshape(s.dim, self.A.dim), np.array(s.pivots, dtype=int)) for s in self.ideal]

    def quotient_dims(self) -> list[int]:
        """Dimension of the weight-``<= k`` slice of ``A`` modulo the ideal, per slot."""
        out = []
        for k in range(self.N + 1):
            size = sum(1 for w in self.A.weights if w <= k) if self.weighted else self.A.dim
            out.append(size - (self.ideal[k].dim if self.ideal is not None else 0))
        return out

    def slice_dims(self) -> list[int]:
        return [sum(1 for w in self.A.weights if w <= k) for k in range(self.N + 1)] if self.weighted else [self.A.dim]


def _basis(car: Carrier) -> list[np.ndarray]:
    return [car.basis_vector(i) for i in range(car.dim)]


def check_bare_xmod_axioms(X: BareXMod) -> AxiomReport:
    """Exhaustive check of the bare crossed-module axioms on basis tuples."""
    A, B = X.A, X.B
    rep = AxiomReport(X.name)
    a_basis, b_basis = _basis(A), _basis(B)
    wa, wb = A.weights, B.weights
    one = B.unit_vector()

    def rec(name, slot, residual, witness):
        rep.outcome(name).record(X.reduce(residual, slot) if residual.shape == (A.dim,) else residual, witness)

    la, lb = A.labels, B.labels
    for i, a in enumerate(a_basis):
        rec("unital action", wa[i], X.act_left(one, a) - a, lambda: f"1 |> {la[i]}")
        rec("unital action", wa[i], X.act_right(a, one) - a, lambda: f"{la[i]} <| 1")
        for j, a2 in enumerate(a_basis):
            if not X.fits(wa[i], wa[j]):
                continue
            s = wa[i] + wa[j]
            aa = A.mul(a, a2)
            da, da2 = X.d(a), X.d(a2)
            rep.outcome("boundary is an algebra map").record(
                X.d(X.reduce(aa, s)) - B.mul(da, da2), lambda: f"d({la[i]}*{la[j]})"
            )
            second = X.act_left(da, a2) - aa
            second_r = X.act_right(a, da2) - aa
            rec("second Peiffer (left)", s, second, lambda: f"d({la[i]}) |> {la[j]} != {la[i]}*{la[j]}")
            rec("second Peiffer (right)", s, second_r, lambda: f"{la[i]} <| d({la[j]}) != {la[i]}*{la[j]}")
            if X.kind == "crossed":
                rec("Peiffer exchange", s, X.peiffer_bracket(a, a2), lambda: f"{{{la[i]},{la[j]}}}")
    for i, b in enumerate(b_basis):
        for j, a in enumerate(a_basis):
            if not X.fits(wb[i], wa[j]):
                continue
            s = wb[i] + wa[j]
            db = X.d(X.reduce(X.act_left(b, a), s)) - B.mul(b, X.d(a))
            rep.outcome("first Peiffer (left)").record(db, lambda: f"d({lb[i]} |> {la[j]})")
            db = X.d(X.reduce(X.act_right(a, b), s)) - B.mul(X.d(a), b)
            rep.outcome("first Peiffer (right)").record(db, lambda: f"d({la[j]} <| {lb[i]})")
    for i, b in enumerate(b_basis):
        for j, b2 in enumerate(b_basis):
            bb = B.mul(b, b2)
            for k, a in enumerate(a_basis):
                if not X.fits(wb[i], wb[j], wa[k]):
                    continue
                s = wb[i] + wb[j] + wa[k]
                rec("left action law", s, X.act_left(bb, a) - X.act_left(b, X.act_left(b2, a)),
                    lambda: f"({lb[i]}{lb[j]}) |> {la[k]}")
                rec("right action law", s, X.act_right(a, bb) - X.act_right(X.act_right(a, b), b2),
                    lambda: f"{la[k]} <| ({lb[i]}{lb[j]})")
                rec("actions commute", s,
                    X.act_left(b, X.act_right(a, b2)) - X.act_right(X.act_left(b, a), b2),
                    lambda: f"{lb[i]} |> ({la[k]} <| {lb[j]})")
    for i, b in enumerate(b_basis):
        for j, a in enumerate(a_basis):
            for k, a2 in enumerate(a_basis):
                if not X.fits(wb[i], wa[j], wa[k]):
                    continue
                s = wb[i] + wa[j] + wa[k]
                aa = A.mul(a, a2)
                rec("left multiplier", s, X.act_left(b, aa) - A.mul(X.act_left(b, a), a2),
                    lambda: f"{lb[i]} |> ({la[j]}*{la[k]})")
                rec("right multiplier", s, X.act_right(aa, b) - A.mul(a, X.act_right(a2, b)),
                    lambda: f"({la[j]}*{la[k]}) <| {lb[i]}")
    for i, b in enumerate(b_basis):
        for i2, b2 in enumerate(b_basis):
            bb = B.mul(b, b2)
            for j, a in enumerate(a_basis):
                for k, a2 in enumerate(a_basis):
                    if not X.fits(wb[i], wb[i2], wa[j], wa[k]):
                        continue
                    s = wb[i] + wb[i2] + wa[j] + wa[k]
                    lhs = A.mul(X.act_right(a, b), X.act_left(b2, a2))
                    mid = A.mul(a, X.act_left(bb, a2))
                    rhs = A.mul(X.act_right(a, bb), a2)
                    rec("fully interchangeable", s, lhs - mid, lambda: f"({la[j]}<|{lb[i]})({lb[i2]}|>{la[k]})")
                    rec("fully interchangeable", s, mid - rhs, lambda: f"{la[j]}(({lb[i]}{lb[i2]})|>{la[k]})")
    return rep


def build_bare_xmod(
    A: Carrier,
    B: Carrier,
    boundary: Callable[[np.ndarray], np.ndarray],
    left: Callable[[np.ndarray, np.ndarray], np.ndarray],
    right: Callable[[np.ndarray, np.ndarray], np.ndarray],
    kind: str = "crossed",
    name: str = "bare",
) -> BareXMod:
    """Tabulate a bare crossed module from exact callables on basis vectors."""
    bmat = np.empty((B.dim, A.dim), dtype=object)
    for j in range(A.dim):
        bmat[:, j] = boundary(A.basis_vector(j))
    N = A.max_weight

    def fits(w):
        return N is None or w <= N

    lt, rt = {}, {}
    for b in range(B.dim):
        for a in range(A.dim):
            if not fits(B.weights[b] + A.weights[a]):
                continue
            v = vector_to_sparse(left(B.basis_vector(b), A.basis_vector(a)))
            if v:
                lt[(b, a)] = v
            v = vector_to_sparse(right(A.basis_vector(a), B.basis_vector(b)))
            if v:
                rt[(a, b)] = v
    return BareXMod(A, B, bmat, lt, rt, kind=kind, name=name)


# ---------------------------------------------------------------------------
# reflection


def peiffer_ideal(X: BareXMod) -> list[Subspace]:
    """Per-slot ideal generated by the second Peiffer defects.

    The defects ``d(a) |> a' - aa'`` and ``a <| d(a') - aa'`` are closed under
    products with ``A`` and both actions of ``B``.  Their difference is the
    bracket ``{a, a'}``, so the bracket dies in the quotient too.
    """
    A, B = X.A, X.B
    wa, wb = A.weights, B.weights
    a_basis, b_basis = _basis(A), _basis(B)
    unit = B.unit_vector()
    multipliers = [(wa[i], a, True) for i, a in enumerate(a_basis)]
    multipliers += [(wb[i], b, False) for i, b in enumerate(b_basis) if not is_zero(b - unit)]

    def slot(w: int) -> int:
        return w if X.weighted else 0

    def products(row: np.ndarray, w: int) -> list[np.ndarray]:
        out = []
        for wm, m, in_a in multipliers:
            if slot(wm) != w:
                continue
            pair = (A.mul(m, row), A.mul(row, m)) if in_a else (X.act_left(m, row), X.act_right(row, m))
            out.extend(v for v in pair if not is_zero(v))
        return out

    slots: list[Subspace] = []
    for k in range(X.N + 1):
        gens: list[np.ndarray] = list(slots[k - 1].rows) if k else []
        for i, a in enumerate(a_basis):
            for j, a2 in enumerate(a_basis):
                if slot(wa[i] + wa[j]) == k:
                    gens.extend(v for v in X.peiffer_defects(a, a2) if not is_zero(v))
        for j in range(k):
            for row in slots[j].rows:
                gens.extend(products(row, k - j))
        sub = Subspace(A.dim, gens)
        while True:
            more = [v for row in sub.rows for v in products(row, 0) if not sub.contains(v)]
            if not more:
                break
            sub = Subspace(A.dim, list(sub.rows) + more)
        slots.append(sub)
    return slots


def reflect(X: BareXMod) -> BareXMod:
    """Quotient by the Peiffer ideal; the result is a crossed module."""
    ideal = peiffer_ideal(X)
    if X.ideal is not None:
        ideal = [Subspace(X.A.dim, list(old.rows) + list(new.rows)) for old, new in zip(X.ideal, ideal)]
    Y = BareXMod(X.A, X.B, X.boundary, X.left, X.right, kind="crossed", name=f"R({X.name})", ideal=ideal,
                 meta=dict(X.meta, reflected_from=X))
    for k, sub in enumerate(ideal):
        for row in sub.rows:
            if not is_zero(X.d(row)):
                raise XModError(f"Peiffer ideal at slot {k} is not killed by the boundary")
    return Y


# ---------------------------------------------------------------------------
# chain complexes: HOM(V)


@dataclass(eq=False)
class ChainComplex:
    """``V_n -> V_{n-1} -> ... -> V_0``; ``boundaries[i]`` maps ``V_{i+1} -> V_i``."""

    dims: tuple[int, ...]
    boundaries: tuple[np.ndarray, ...]

    def __post_init__(self) -> None:
        if len(self.boundaries) != max(len(self.dims) - 1, 0):
            raise XModError("need one boundary matrix per consecutive pair of degrees")
        for i, m in enumerate(self.boundaries):
            if m.shape != (self.dims[i], self.dims[i + 1]):
                raise XModError(f"boundary {i} has shape {m.shape}, expected {(self.dims[i], self.dims[i + 1])}")
        beta = self.beta
        if not is_zero(beta.dot(beta)):
            raise NotAChainComplexError("the boundary does not square to zero")

    @classmethod
    def from_json(cls, data: Mapping | str | Path) -> "ChainComplex":
        if isinstance(data, (str, Path)):
            data = json.loads(Path(data).read_text())
        dims = tuple(int(d) for d in data["dims"])
        mats = []
        for i, m in enumerate(data.get("boundaries", [])):
            if i + 1 >= len(dims):
                raise XModError("more boundary matrices than consecutive degree pairs")
            if dims[i] and (len(m) != dims[i] or any(len(r) != dims[i + 1] for r in m)):
                raise XModError(f"boundary {i} must be a {dims[i]}x{dims[i + 1]} matrix")
            mats.append(exact_matrix(m, dims[i + 1]) if dims[i] else np.empty((0, dims[i + 1]), dtype=object))
        return cls(dims, tuple(mats))

    @property
    def total(self) -> int:
        return sum(self.dims)

    @cached_property
    def offsets(self) -> tuple[int, ...]:
        return tuple(int(x) for x in np.cumsum((0,) + self.dims[:-1]))

    @cached_property
    def beta(self) -> np.ndarray:
        D = self.total
        b = np.empty((D, D), dtype=object)
        b[:] = ZERO
        for i, m in enumerate(self.boundaries):
            r, c = self.offsets[i], self.offsets[i + 1]
            b[r : r + self.dims[i], c : c + self.dims[i + 1]] = m
        return b

    def positions(self, k: int) -> list[tuple[int, int]]:
        """Matrix entries of maps raising the degree by ``k``."""
        out = []
        for src in range(len(self.dims)):
            dst = src + k
            if 0 <= dst < len(self.dims):
                for r in range(self.dims[dst]):
                    for c in range(self.dims[src]):
                        out.append((self.offsets[dst] + r, self.offsets[src] + c))
        return out

    def to_matrix(self, k: int, coords: np.ndarray) -> np.ndarray:
        D = self.total
        m = np.empty((D, D), dtype=object)
        m[:] = ZERO
        for (r, c), x in zip(self.positions(k), coords):
            m[r, c] = x
        return m

    def to_coords(self, k: int, m: np.ndarray) -> np.ndarray:
        return np.array([m[r, c] for r, c in self.positions(k)], dtype=object)

    def graded_commutator(self, k: int, f: np.ndarray) -> np.ndarray:
        """``beta f - (-1)^k f beta``."""
        sign = -1 if k % 2 else 1
        return self.beta.dot(f) - sign * f.dot(self.beta)


@dataclass(eq=False)
class HomComplex:
    """The crossed module ``d: gl1(V) -> gl0(V)`` with its matrix models."""

    V: ChainComplex
    xmod: BareXMod
    gl0_matrices: list[np.ndarray]
    gl1_representatives: list[np.ndarray]
    image: Subspace

    def gl1_class(self, m: np.ndarray) -> np.ndarray:
        """Coordinates in ``gl1`` of a degree-one map."""
        return self.image.quotient_coords(self.V.to_coords(1, m))

    def gl1_matrix(self, v: np.ndarray) -> np.ndarray:
        out = self.V.to_matrix(1, zeros(len(self.V.positions(1))))
        for c, m in zip(v, self.gl1_representatives):
            if c != 0:
                out = out + c * m
        return out

    def gl0_coords(self, m: np.ndarray) -> np.ndarray:
        return self.xmod.B.meta["basis"].coordinates(np.asarray(m, dtype=object).ravel())

    def gl0_matrix(self, v: np.ndarray) -> np.ndarray:
        out = np.empty((self.V.total,) * 2, dtype=object)
        out[:] = ZERO
        for c, m in zip(v, self.gl0_matrices):
            if c != 0:
                out = out + c * m
        return out

    def d_prime(self, k: int, m: np.ndarray) -> np.ndarray:
        return self.V.graded_commutator(k, m)


def build_hom_complex(V: ChainComplex | Mapping) -> HomComplex:
    """Chain maps ``gl0`` and homotopy classes ``gl1`` with composition actions."""
    if not isinstance(V, ChainComplex):
        V = ChainComplex.from_json(V)
    D = V.total
    pos0 = V.positions(0)
    # chain maps: beta f - f beta = 0 on degree-0 maps
    cols = []
    for j in range(len(pos0)):
        e = zeros(len(pos0))
        e[j] = ONE
        f = V.to_matrix(0, e)
        cols.append(V.graded_commutator(0, f).ravel())
    mat = np.array(cols, dtype=object).T if cols else np.empty((D * D, 0), dtype=object)
    kernel = nullspace(mat)
    gl0 = [V.to_matrix(0, row) for row in kernel]
    ident = np.empty((D, D), dtype=object)
    ident[:] = ZERO
    for i in range(D):
        ident[i, i] = ONE
    B = carrier_from_matrices(gl0, [f"f{i}" for i in range(len(gl0))], "gl0", unit=ident)

    pos1, pos2 = V.positions(1), V.positions(2)
    image = []
    for j in range(len(pos2)):
        e = zeros(len(pos2))
        e[j] = ONE
        image.append(V.to_coords(1, V.graded_commutator(2, V.to_matrix(2, e))))
    W = Subspace(len(pos1), image)
    section = W.section_matrix()
    reps = [V.to_matrix(1, section[:, k]) for k in range(len(W.complement))]

    def cls(m):
        return W.quotient_coords(V.to_coords(1, m))

    def bd(m):
        return V.graded_commutator(1, m)

    table = {}
    for i, s in enumerate(reps):
        for j, t in enumerate(reps):
            v = vector_to_sparse(cls(s.dot(bd(t))))
            if v:
                table[(i, j)] = v
    A = Carrier(name="gl1", labels=tuple(f"s{i}" for i in range(len(reps))), weights=(0,) * len(reps), table=table)
    basis0 = B.meta["basis"]

    def boundary(a):
        m = sum((c * r for c, r in zip(a, reps) if c != 0), V.to_matrix(1, zeros(len(pos1))))
        return basis0.coordinates(bd(m).ravel())

    def mat_of_b(b):
        out = np.empty((D, D), dtype=object)
        out[:] = ZERO
        for c, f in zip(b, gl0):
            if c != 0:
                out = out + c * f
        return out

    def mat_of_a(a):
        return sum((c * r for c, r in zip(a, reps) if c != 0), V.to_matrix(1, zeros(len(pos1))))

    X = build_bare_xmod(
        A,
        B,
        boundary,
        lambda b, a: cls(mat_of_b(b).dot(mat_of_a(a))),
        lambda a, b: cls(mat_of_a(a).dot(mat_of_b(b))),
        kind="crossed",
        name=f"HOM{V.dims}",
    )
    hc = HomComplex(V, X, gl0, reps, W)
    X.meta["hom"] = hc
    return hc


# ---------------------------------------------------------------------------
# Hopf crossed modules


@dataclass(eq=False)
class HopfXMod:
    """``(d: I -> H, rho)`` for cocommutative Hopf carriers ``I`` and ``H``."""

    I: Carrier
    H: Carrier
    boundary: np.ndarray
    rho: dict[tuple[int, int], Sparse]
    kind: str = "crossed"
    name: str = "hopf"
    meta: dict = field(default_factory=dict)

    @property
    def N(self) -> int:
        return self.I.max_weight

    def d(self, v: np.ndarray) -> np.ndarray:
        if is_exact(v):
            return self.boundary.dot(v)
        return self.boundary_numeric @ np.asarray(v, dtype=complex)

    def act(self, x: np.ndarray, v: np.ndarray) -> np.ndarray:
        if is_exact(x) and is_exact(v):
            out = zeros(self.I.dim)
            for i, c in enumerate(x):
                if c != 0:
                    out = out + c * _sparse_apply(self.rho, i, v, self.I.dim, True)
            return out
        return np.einsum("i,ijk,k->j", to_complex(x), self.rho_tensor, to_complex(v))

    def rho_basis(self, b: int, i: int) -> Sparse:
        return self.rho.get((b, i), {})

    @cached_property
    def boundary_numeric(self) -> np.ndarray:
        return to_complex(self.boundary)

    @cached_property
    def rho_tensor(self) -> np.ndarray:
        t = np.zeros((self.H.dim, self.I.dim, self.I.dim), dtype=complex)
        for (b, a), entry in self.rho.items():
            for k, c in entry.items():
                t[b, k, a] += complex(c)
        return t

    @cached_property
    def smash(self) -> SmashProduct:
        return build_smash_product(self.I, self.H, self.rho_basis, max_weight=self.N)


def check_hopf_xmod_axioms(Hx: HopfXMod) -> AxiomReport:
    """Exhaustive check of the Hopf crossed-module axioms on basis tuples."""
    I, H = Hx.I, Hx.H
    N = Hx.N
    wi, wh = I.weights, H.weights
    li, lh = I.labels, H.labels
    rep = AxiomReport(Hx.name)
    nI, nH = I.dim, H.dim
    ib, hb = _basis(I), _basis(H)

    for x in range(nH):
        xv = hb[x]
        dx = H.coproduct_table[x]
        rep.outcome("action fixes the unit").record(
            Hx.act(xv, I.unit_vector()) - H.counit[x] * I.unit_vector(), lambda: f"{lh[x]} |> 1"
        )
        for u in range(nI):
            if wh[x] + wi[u] > N:
                continue
            xu = Hx.act(xv, ib[u])
            # module coalgebra: Delta(x |> u) = sum (x' |> u') (x) (x'' |> u'')
            lhs = I.coproduct(xu)
            rhs = zeros(nI * nI)
            for (p, q), c in dx.items():
                for (s, t), c2 in I.coproduct_table[u].items():
                    rhs = rhs + c * c2 * I.tensor(Hx.act(hb[p], ib[s]), Hx.act(hb[q], ib[t]))
            rep.outcome("module coalgebra").record(lhs - rhs, lambda: f"Delta({lh[x]} |> {li[u]})")
            rep.outcome("module coalgebra (counit)").record(
                np.array([I.counit.dot(xu) - H.counit[x] * I.counit[u]], dtype=object), lambda: f"eps({lh[x]} |> {li[u]})"
            )
            # first Peiffer: d(x |> u) = x |>ad d(u)
            rep.outcome("first Peiffer").record(
                Hx.d(xu) - adjoint_action(H, xv, Hx.d(ib[u])), lambda: f"d({lh[x]} |> {li[u]})"
            )
            # compatibility: sum x' (x) (x'' |> u) = sum x'' (x) (x' |> u)
            lhs = zeros(nH * nI)
            rhs = zeros(nH * nI)
            for (p, q), c in dx.items():
                lhs = lhs + c * np.outer(hb[p], Hx.act(hb[q], ib[u])).ravel()
                rhs = rhs + c * np.outer(hb[q], Hx.act(hb[p], ib[u])).ravel()
            rep.outcome("compatibility").record(lhs - rhs, lambda: f"{lh[x]} on {li[u]}")
            for y in range(nH):
                if wh[x] + wh[y] + wi[u] > N:
                    continue
                rep.outcome("action law").record(
                    Hx.act(H.mul(xv, hb[y]), ib[u]) - Hx.act(xv, Hx.act(hb[y], ib[u])),
                    lambda: f"({lh[x]}{lh[y]}) |> {li[u]}",
                )
            for v in range(nI):
                if wh[x] + wi[u] + wi[v] > N:
                    continue
                lhs = Hx.act(xv, I.mul(ib[u], ib[v]))
                rhs = zeros(nI)
                for (p, q), c in dx.items():
                    rhs = rhs + c * I.mul(Hx.act(hb[p], ib[u]), Hx.act(hb[q], ib[v]))
                rep.outcome("module algebra").record(lhs - rhs, lambda: f"{lh[x]} |> ({li[u]}{li[v]})")
    for u in range(nI):
        du = Hx.d(ib[u])
        rep.outcome("boundary is a coalgebra map").record(
            H.coproduct(du) - _tensor_map(Hx, I.coproduct(ib[u])), lambda: f"Delta(d {li[u]})"
        )
        rep.outcome("boundary preserves the counit").record(
            np.array([H.counit.dot(du) - I.counit[u]], dtype=object), lambda: f"eps(d {li[u]})"
        )
        for v in range(nI):
            if wi[u] + wi[v] > N:
                continue
            rep.outcome("boundary is an algebra map").record(
                Hx.d(I.mul(ib[u], ib[v])) - H.mul(du, Hx.d(ib[v])), lambda: f"d({li[u]}{li[v]})"
            )
            if Hx.kind == "crossed":
                rep.outcome("second Peiffer").record(
                    Hx.act(du, ib[v]) - adjoint_action(I, ib[u], ib[v]), lambda: f"d({li[u]}) |> {li[v]}"
                )
    return rep


def _tensor_map(Hx: HopfXMod, t: np.ndarray) -> np.ndarray:
    nI, nH = Hx.I.dim, Hx.H.dim
    out = zeros(nH * nH)
    for idx, c in enumerate(t):
        if c != 0:
            a, b = divmod(idx, nI)
            out = out + c * np.outer(Hx.d(Hx.I.basis_vector(a)), Hx.d(Hx.I.basis_vector(b))).ravel()
    return out


# ---------------------------------------------------------------------------
# differential crossed modules


@dataclass(eq=False)
class GEnvelope:
    """A Hopf carrier ``H`` whose primitives contain ``g``.

    ``embed[:, i]`` is the image of the ``i``-th basis element of ``g`` in
    ``H``; ``letter_map[l]`` gives the ``g``-coordinates of letter ``l`` of
    the words of ``H``.
    """

    H: Carrier
    embed: np.ndarray
    letter_map: list[np.ndarray]
    basis: Basis | None = None

    def to_H(self, x: np.ndarray) -> np.ndarray:
        return self.embed.dot(x)

    def to_g(self, y: np.ndarray) -> np.ndarray:
        if self.basis is None:
            raise XModError("no coordinate solver for this envelope")
        return self.basis.coordinates(y)


@dataclass(eq=False)
class DiffXMod:
    """``(d: e -> g, |>)`` with ``g`` acting on ``e`` by derivations."""

    e: LieAlgebra
    g: LieAlgebra
    boundary: np.ndarray
    action: dict[tuple[int, int], Sparse]
    kind: str = "crossed"
    name: str = "diff"
    envelope: GEnvelope | None = None
    meta: dict = field(default_factory=dict)

    def d(self, u: np.ndarray) -> np.ndarray:
        return self.boundary.dot(u)

    def act(self, X: np.ndarray, u: np.ndarray) -> np.ndarray:
        out = zeros(self.e.dim)
        for i, c in enumerate(X):
            if c != 0:
                out = out + c * _sparse_apply(self.action, i, u, self.e.dim, True)
        return out


def _lie_fits(lie: LieAlgebra, *ws: int) -> bool:
    return lie.max_weight is None or sum(ws) <= lie.max_weight


def check_diff_xmod_axioms(D: DiffXMod) -> AxiomReport:
    e, g = D.e, D.g
    rep = AxiomReport(D.name)
    eb = [e.basis_vector(i) for i in range(e.dim)]
    gb = [g.basis_vector(i) for i in range(g.dim)]
    le, lg = e.labels, g.labels
    top = e.max_weight

    def fits(*ws):
        return top is None or sum(ws) <= top

    for i, u in enumerate(eb):
        for j, v in enumerate(eb):
            if not fits(e.weights[i], e.weights[j]):
                continue
            rep.outcome("boundary is a Lie map").record(
                D.d(e.bracket(u, v)) - g.bracket(D.d(u), D.d(v)), lambda: f"d[{le[i]},{le[j]}]"
            )
            if D.kind == "crossed":
                rep.outcome("second Peiffer").record(
                    D.act(D.d(u), v) - e.bracket(u, v), lambda: f"d({le[i]}) |> {le[j]}"
                )
    for a, X in enumerate(gb):
        for i, u in enumerate(eb):
            if not fits(g.weights[a], e.weights[i]):
                continue
            rep.outcome("first Peiffer").record(
                D.d(D.act(X, u)) - g.bracket(X, D.d(u)), lambda: f"d({lg[a]} |> {le[i]})"
            )
            for b, Y in enumerate(gb):
                if fits(g.weights[a], g.weights[b], e.weights[i]):
                    rep.outcome("Lie action").record(
                        D.act(g.bracket(X, Y), u) - D.act(X, D.act(Y, u)) + D.act(Y, D.act(X, u)),
                        lambda: f"[{lg[a]},{lg[b]}] |> {le[i]}",
                    )
            for j, v in enumerate(eb):
                if fits(g.weights[a], e.weights[i], e.weights[j]):
                    rep.outcome("derivation").record(
                        D.act(X, e.bracket(u, v)) - e.bracket(D.act(X, u), v) - e.bracket(u, D.act(X, v)),
                        lambda: f"{lg[a]} |> [{le[i]},{le[j]}]",
                    )
    return rep


def lie_of(X: BareXMod, weight: int = 1) -> DiffXMod:
    """Commutator Lie algebras with ``b |> a = b |> a - a <| b``.

    Only unweighted (untruncated) bare crossed modules are supported; each
    basis element gets ``weight`` for later PBW truncation by length.
    """
    if X.weighted:
        raise XModError("the Lie functor is applied to untruncated bare crossed modules only")
    e = lie_from_carrier(X.A, weight, name=f"Lie({X.A.name})")
    g = lie_from_carrier(X.B, weight, name=f"Lie({X.B.name})")
    action: dict[tuple[int, int], Sparse] = {}
    for b in range(X.B.dim):
        for a in range(X.A.dim):
            bv, av = X.B.basis_vector(b), X.A.basis_vector(a)
            v = vector_to_sparse(X.act_left(bv, av) - X.act_right(av, bv))
            if v:
                action[(b, a)] = v
    D = DiffXMod(e, g, X.boundary.copy(), action, kind=X.kind, name=f"Lie({X.name})", meta={"bare": X})
    return D


# ---------------------------------------------------------------------------
# universal enveloping crossed module


def _pbw_letter_vector(I: Carrier, j: int) -> np.ndarray:
    v = zeros(I.dim)
    v[I.words.index((j,))] = ONE
    return v


def enveloping_xmod(D: DiffXMod, N: int) -> HopfXMod:
    """``U(e) -> U(g)`` with the action extended by the derivation rule.

    When ``D.envelope`` is set its carrier is used for ``U(g)``; otherwise a
    PBW model of ``U(g)`` is built.
    """
    I = enveloping_algebra(D.e, N, name=f"U({D.e.name})")
    if D.envelope is not None:
        env = D.envelope
        H = env.H
    else:
        H = enveloping_algebra(D.g, N, name=f"U({D.g.name})")
        embed = np.empty((H.dim, D.g.dim), dtype=object)
        embed[:] = ZERO
        for i in range(D.g.dim):
            embed[H.words.index((i,)), i] = ONE
        letters = [D.g.basis_vector(i) for i in range(D.g.dim)]
        env = GEnvelope(H, embed, letters)
    if H.words is None:
        raise XModError("the bottom Hopf carrier needs word data for the action")

    e_in_I = [_pbw_letter_vector(I, j) for j in range(D.e.dim)]
    I_words = I.words

    def derivation(X: np.ndarray, v: np.ndarray) -> np.ndarray:
        out = zeros(I.dim)
        for m, c in enumerate(v):
            if c == 0:
                continue
            word = I_words[m]
            for p in range(len(word)):
                ax = D.act(X, D.e.basis_vector(word[p]))
                if is_zero(ax):
                    continue
                mid = sum((cc * e_in_I[k] for k, cc in enumerate(ax) if cc != 0), zeros(I.dim))
                left = _word_product(I, word[:p], e_in_I)
                right = _word_product(I, word[p + 1:], e_in_I)
                out = out + c * I.mul(I.mul(left, mid), right)
        return out

    rho: dict[tuple[int, int], Sparse] = {}
    for b in range(H.dim):
        letters = H.words[b]
        for i in range(I.dim):
            if H.weights[b] + I.weights[i] > N:
                continue
            v = I.basis_vector(i)
            for l in reversed(letters):
                v = derivation(env.letter_map[l], v)
            s = vector_to_sparse(v)
            if s:
                rho[(b, i)] = s

    d_letters = [env.to_H(D.d(D.e.basis_vector(j))) for j in range(D.e.dim)]
    bmat = np.empty((H.dim, I.dim), dtype=object)
    for m in range(I.dim):
        acc = H.unit_vector()
        for j in I_words[m]:
            acc = H.mul(acc, d_letters[j])
        bmat[:, m] = acc
    return HopfXMod(I, H, bmat, rho, kind=D.kind, name=f"U({D.name})",
                    meta={"diff": D, "envelope": env, "e_in_I": e_in_I})


def _word_product(I: Carrier, word: Sequence[int], letters: Sequence[np.ndarray]) -> np.ndarray:
    acc = I.unit_vector()
    for j in word:
        acc = I.mul(acc, letters[j])
    return acc


# ---------------------------------------------------------------------------
# primitives


def _homogeneous_weight(car: Carrier, v: np.ndarray) -> int:
    return max((car.weights[i] for i, c in enumerate(v) if c != 0), default=0)


def _prim_lie(car: Carrier, vectors: list[np.ndarray], name: str, labels: Sequence[str] | None = None) -> tuple[LieAlgebra, Basis]:
    basis = Basis(vectors, car.dim)
    weights = tuple(_homogeneous_weight(car, v) for v in vectors)
    table: dict[tuple[int, int], Sparse] = {}
    for i, x in enumerate(vectors):
        for j, y in enumerate(vectors):
            if i != j and (car.max_weight is None or weights[i] + weights[j] <= car.max_weight):
                c = car.commutator(x, y)
                if not is_zero(c):
                    table[(i, j)] = vector_to_sparse(basis.coordinates(c))
    labels = tuple(labels) if labels else tuple(f"{name}{weights[i]}_{i}" for i in range(len(vectors)))
    return LieAlgebra(labels, weights, table, car.max_weight, name), basis


def prim_of(Hx: HopfXMod) -> DiffXMod:
    """Restrict a Hopf crossed module to primitive elements."""
    pi = Hx.I.primitive_basis()
    ph = Hx.H.primitive_basis()
    e, be = _prim_lie(Hx.I, pi, "u")
    g, bg = _prim_lie(Hx.H, ph, "x")
    bmat = np.empty((g.dim, e.dim), dtype=object)
    for j, v in enumerate(pi):
        bmat[:, j] = bg.coordinates(Hx.d(v))
    action: dict[tuple[int, int], Sparse] = {}
    for a, x in enumerate(ph):
        for i, v in enumerate(pi):
            if g.weights[a] + e.weights[i] > Hx.N:
                continue
            s = vector_to_sparse(be.coordinates(Hx.act(x, v)))
            if s:
                action[(a, i)] = s
    embed = np.array(ph, dtype=object).T.reshape(Hx.H.dim, len(ph))
    D = DiffXMod(e, g, bmat, action, kind=Hx.kind, name=f"Prim({Hx.name})",
                 envelope=GEnvelope(Hx.H, embed, [], bg), meta={"I_embed": pi, "I_basis": be, "hopf": Hx})
    return D


def peiffer_pairing(Hx: HopfXMod, u: np.ndarray, v: np.ndarray) -> np.ndarray:
    """``<u, v> = [u, v] - d(u) |> v`` for elements of ``I``."""
    return Hx.I.commutator(u, v) - Hx.act(Hx.d(u), v)


# ---------------------------------------------------------------------------
# bare algebra of a Hopf crossed module


@dataclass(eq=False)
class BAResult:
    pre: BareXMod
    crossed: BareXMod
    smash: SmashProduct
    hopf: HopfXMod


def build_ba(Hx: HopfXMod) -> BAResult:
    """``t: I^0 (x) H -> H``, ``t(v (x) x) = d(v) x``, with actions by multiplication."""
    sm = Hx.smash
    A = sm.augmented
    H = Hx.H
    full = sm.full
    bmat = np.empty((H.dim, A.dim), dtype=object)
    for k, (v, x) in enumerate(sm.augmented_pairs):
        bmat[:, k] = H.mul(Hx.d(Hx.I.basis_vector(v)), H.basis_vector(x))
    left, right = {}, {}
    N = Hx.N
    for b in range(H.dim):
        hb = sm.include_H(H.basis_vector(b))
        for k in range(A.dim):
            if H.weights[b] + A.weights[k] > N:
                continue
            ak = sm.from_augmented(A.basis_vector(k))
            lv = vector_to_sparse(sm.to_augmented(full.mul(hb, ak)))
            rv = vector_to_sparse(sm.to_augmented(full.mul(ak, hb)))
            if lv:
                left[(b, k)] = lv
            if rv:
                right[(k, b)] = rv
    pre = BareXMod(A, H, bmat, left, right, kind="pre-crossed", name=f"BA^({Hx.name})",
                   meta={"smash": sm, "hopf": Hx})
    crossed = reflect(pre)
    crossed.name = f"BA({Hx.name})"
    return BAResult(pre, crossed, sm, Hx)


# ---------------------------------------------------------------------------
# categorified chord diagrams


@dataclass(eq=False)
class ChordXMod:
    """The differential crossed module of categorified chord diagrams.

    ``H`` is the word model of ``U(ch_n^+)``, ``g`` its primitives, ``module``
    the Peiffer-quotiented free module carrying ``e``.
    """

    n: int
    N: int
    H: WordAlgebra
    g: LieAlgebra
    g_basis: Basis
    module: FreeModuleCarrier
    generator_boundaries: dict[str, np.ndarray]
    diff: DiffXMod

    @cached_property
    def hopf(self) -> HopfXMod:
        return enveloping_xmod(self.diff, self.N)

    def e_vector(self, name: str) -> np.ndarray:
        return self.module.generator(name)


def triples(n: int) -> list[tuple[int, int, int]]:
    return list(itertools.combinations(range(1, n + 1), 3))


def _sym(prefix: str, idx: Sequence[int]) -> str:
    return prefix + ("".join(map(str, idx)) if max(idx) < 10 else "_".join(map(str, idx)))


def generator_boundary(H: WordAlgebra, kind: str, a: int, b: int, c: int, n: int) -> np.ndarray:
    """``d P_abc = [r_bc, r_ab + r_ac]`` and ``d Q_abc = [r_ab, r_ac + r_bc]``."""
    ab, ac, bc = chord_name(a, b, n), chord_name(a, c, n), chord_name(b, c, n)
    if kind == "P":
        x, y = H.generator(bc), H.generator(ab) + H.generator(ac)
    else:
        x, y = H.generator(ab), H.generator(ac) + H.generator(bc)
    return H.commutator(x, y)


def _chord_module_relations(n: int) -> list[dict]:
    rels: list[dict] = []

    def r(a, b):
        return chord_name(a, b, n)

    def term(acc, chords, sym, coef=1):
        for ch in chords:
            acc[((ch,), sym)] = acc.get(((ch,), sym), 0) + coef

    for (a, b) in itertools.combinations(range(1, n + 1), 2):
        for t in triples(n):
            if {a, b}.isdisjoint(t):
                rels.append({((r(a, b),), _sym("P", t)): 1})
                rels.append({((r(a, b),), _sym("Q", t)): 1})
    for a, b, c, d in itertools.combinations(range(1, n + 1), 4):
        P = lambda *i: _sym("P", i)  # noqa: E731
        Q = lambda *i: _sym("Q", i)  # noqa: E731
        rel: dict = {}
        term(rel, [r(a, d), r(b, d), r(c, d)], P(a, b, c))
        term(rel, [r(a, b), r(a, c)], Q(b, c, d), -1)
        term(rel, [r(b, c)], Q(a, b, d))
        term(rel, [r(b, c)], Q(a, c, d))
        rels.append(rel)
        rel = {}
        term(rel, [r(a, b), r(a, c), r(a, d)], P(b, c, d))
        term(rel, [r(c, d)], P(a, b, c))
        term(rel, [r(c, d)], P(a, b, d))
        term(rel, [r(b, c), r(b, d)], P(a, c, d), -1)
        rels.append(rel)
        rel = {}
        term(rel, [r(a, d), r(b, d), r(c, d)], Q(a, b, c))
        term(rel, [r(a, b)], Q(a, c, d))
        term(rel, [r(a, b)], Q(b, c, d))
        term(rel, [r(a, c), r(b, c)], Q(a, b, d), -1)
        rels.append(rel)
        rel = {}
        term(rel, [r(a, b), r(a, c), r(a, d)], Q(b, c, d))
        term(rel, [r(b, c)], P(a, b, d))
        term(rel, [r(b, c)], P(a, c, d))
        term(rel, [r(b, d), r(c, d)], P(a, b, c), -1)
        rels.append(rel)
        rel = {}
        term(rel, [r(a, b)], P(a, c, d))
        term(rel, [r(a, b)], P(b, c, d))
        term(rel, [r(c, d)], Q(a, b, c), -1)
        term(rel, [r(c, d)], Q(a, b, d), -1)
        rels.append(rel)
        rel = {}
        term(rel, [r(a, c)], P(a, b, d))
        term(rel, [r(a, c)], P(b, c, d), -1)
        term(rel, [r(a, c)], Q(b, c, d), -1)
        term(rel, [r(b, d)], Q(a, b, c))
        term(rel, [r(b, d)], P(a, b, c))
        term(rel, [r(b, d)], Q(a, c, d), -1)
        rels.append(rel)
    return [{k: v for k, v in rel.items() if v != 0} for rel in rels]


def categorified_chord_xmod(n: int, N: int = 3) -> ChordXMod:
    """Build ``d: 2ch_n -> ch_n^+`` truncated at degree ``N``."""
    if n < 3:
        raise XModError("categorified chord diagrams need at least three strands")
    H = chord_algebra(n, N, plus=True)
    prims = H.primitive_basis()
    # generators first so that degree-one primitives keep their names
    gens = [H.generator(x) for x in H.generators]
    others = [v for v in prims if _homogeneous_weight(H, v) > 1]
    vectors = gens + others
    labels = list(H.generators) + [f"x{_homogeneous_weight(H, v)}_{i}" for i, v in enumerate(others)]
    g, gb = _prim_lie(H, vectors, "ch+", labels)

    syms: dict[str, int] = {}
    bounds: dict[str, np.ndarray] = {}
    for t in triples(n):
        for kind in ("P", "Q"):
            s = _sym(kind, t)
            syms[s] = 2
            bounds[s] = generator_boundary(H, kind, *t, n)

    def boundary_pairs(module: FreeModuleCarrier, pv: np.ndarray) -> np.ndarray:
        out = zeros(H.dim)
        for k, c in enumerate(pv):
            if c != 0:
                w, e = module.pairs[k]
                out = out + c * adjoint_action(H, H.basis_vector(w), bounds[module.generator_names[e]])
        return out

    def peiffer(module: FreeModuleCarrier):
        for i in range(module.dim):
            for j in range(i, module.dim):
                if module.degrees[i] + module.degrees[j] > N:
                    continue
                u, v = module.lift(module.basis_vector(i)), module.lift(module.basis_vector(j))
                yield module.act_pairs(boundary_pairs(module, u), v) + module.act_pairs(boundary_pairs(module, v), u)

    module = build_free_module(H, syms, N, _chord_module_relations(n), extra=peiffer)
    for row in module.submodule.rows:
        if not is_zero(boundary_pairs(module, row)):
            raise XModError("a module relation has nonzero boundary")

    def d_module(v: np.ndarray) -> np.ndarray:
        return boundary_pairs(module, module.lift(v))

    e_labels = module.labels
    e_weights = module.degrees
    e_basis = [module.basis_vector(i) for i in range(module.dim)]
    bracket: dict[tuple[int, int], Sparse] = {}
    for i, u in enumerate(e_basis):
        for j, v in enumerate(e_basis):
            if i != j and e_weights[i] + e_weights[j] <= N:
                s = vector_to_sparse(module.act(d_module(u), v))
                if s:
                    bracket[(i, j)] = s
    e = LieAlgebra(e_labels, e_weights, bracket, N, f"2ch{n}")
    bmat = np.empty((g.dim, e.dim), dtype=object)
    for j, u in enumerate(e_basis):
        bmat[:, j] = gb.coordinates(d_module(u))
    action: dict[tuple[int, int], Sparse] = {}
    for a, x in enumerate(vectors):
        for i, u in enumerate(e_basis):
            if g.weights[a] + e_weights[i] <= N:
                s = vector_to_sparse(module.act(x, u))
                if s:
                    action[(a, i)] = s
    embed = np.array(vectors, dtype=object).T.reshape(H.dim, len(vectors))
    letter_map = [gb.coordinates(H.generator(x)) for x in H.generators]
    env = GEnvelope(H, embed, letter_map, gb)
    D = DiffXMod(e, g, bmat, action, kind="crossed", name=f"2ch{n}", envelope=env)
    return ChordXMod(n, N, H, g, gb, module, bounds, D)
