"""Finite-dimensional algebra carriers.

A :class:`Carrier` is a vector space with a basis, an integer weight per
basis element and exact (rational) structure constants.  Weighted carriers
are truncated at ``max_weight``: a product of basis elements whose weights
add up to more than ``max_weight`` is discarded.  For graded algebras the
weight is the internal degree; for enveloping algebras of ungraded Lie
algebras it is the PBW word length, so the weight of a product can drop.
Either way a power series whose ``h^k`` coefficient has weight at most ``k``
multiplies without ever touching a discarded product.

Vectors are numpy arrays: object arrays of Fractions in exact mode, complex
arrays in numeric mode.  Every product works in both.
"""
from __future__ import annotations

import itertools
import json
from collections import defaultdict
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property, lru_cache
from pathlib import Path
from typing import Callable, Iterable, Mapping, Sequence

import numpy as np
import scipy.sparse as sp

from .linalg import ONE, ZERO, Basis, Subspace, frac, is_zero, nullspace, zeros

Sparse = dict[int, Fraction]
Table = dict[tuple[int, int], Sparse]


class CarrierError(ValueError):
    """Invalid carrier data."""


class IdealClosureError(CarrierError):
    """The imposed relations do not span a two-sided ideal."""


class NoHopfStructureError(CarrierError):
    """A Hopf operation was requested on a carrier without coproduct."""


def is_exact(v: np.ndarray) -> bool:
    return np.asarray(v).dtype == object


def _accumulate(out: defaultdict, sparse: Mapping[int, Fraction], scale: Fraction) -> None:
    for k, c in sparse.items():
        out[k] += scale * c


def _clean(d: Mapping) -> dict:
    return {k: v for k, v in d.items() if v != 0}


def sparse_to_vector(d: Mapping[int, Fraction], n: int) -> np.ndarray:
    out = zeros(n)
    for k, c in d.items():
        out[k] += c
    return out


def vector_to_sparse(v: np.ndarray) -> dict[int, Fraction]:
    return {i: c for i, c in enumerate(v) if c != 0}


@dataclass(eq=False)
class Carrier:
    """Algebra with a finite weighted basis and exact structure constants."""

    name: str
    labels: tuple[str, ...]
    weights: tuple[int, ...]
    table: Table
    max_weight: int | None = None
    unit: np.ndarray | None = None
    coproduct_table: dict[int, dict[tuple[int, int], Fraction]] | None = None
    counit: np.ndarray | None = None
    antipode_table: dict[int, Sparse] | None = None
    words: tuple[tuple[int, ...], ...] | None = None
    letters: tuple[str, ...] | None = None
    meta: dict = field(default_factory=dict)

    def __post_init__(self) -> None:
        if len(self.labels) != len(self.weights):
            raise CarrierError("labels and weights differ in length")
        self._index = {lab: i for i, lab in enumerate(self.labels)}

    # -- basic data -----------------------------------------------------
    @property
    def dim(self) -> int:
        return len(self.labels)

    @property
    def has_hopf(self) -> bool:
        return self.coproduct_table is not None

    def index(self, label: str) -> int:
        try:
            return self._index[label]
        except KeyError:
            raise CarrierError(f"{self.name}: no basis element {label!r}") from None

    def zero(self, exact: bool = True) -> np.ndarray:
        return zeros(self.dim) if exact else np.zeros(self.dim, dtype=complex)

    def basis_vector(self, i: int, exact: bool = True) -> np.ndarray:
        v = self.zero(exact)
        v[i] = ONE if exact else 1.0
        return v

    def vector(self, coeffs: Mapping[str, object], exact: bool = True) -> np.ndarray:
        v = self.zero(exact)
        for lab, c in coeffs.items():
            v[self.index(lab)] += frac(c) if exact else complex(c)
        return v

    def unit_vector(self, exact: bool = True) -> np.ndarray:
        if self.unit is None:
            raise CarrierError(f"{self.name} has no unit")
        return self.unit.copy() if exact else self.unit.astype(complex)

    def degree_dims(self) -> list[int]:
        top = max(self.weights, default=0)
        return [sum(1 for w in self.weights if w == k) for k in range(top + 1)]

    def weight_mask(self, k: int) -> np.ndarray:
        return np.array([w <= k for w in self.weights], dtype=bool)

    def in_slice(self, v: np.ndarray, k: int) -> bool:
        """True when ``v`` is supported on basis elements of weight at most ``k``."""
        if self.max_weight is None:
            return True
        mask = ~self.weight_mask(k)
        return all(c == 0 for c in np.asarray(v)[mask])

    def product_defined(self, i: int, j: int) -> bool:
        return self.max_weight is None or self.weights[i] + self.weights[j] <= self.max_weight

    # -- products -------------------------------------------------------
    def mul(self, x: np.ndarray, y: np.ndarray) -> np.ndarray:
        if is_exact(x) and is_exact(y):
            out: defaultdict = defaultdict(Fraction)
            ys = [(j, b) for j, b in enumerate(y) if b != 0]
            for i, a in enumerate(x):
                if a == 0:
                    continue
                for j, b in ys:
                    entry = self.table.get((i, j))
                    if entry:
                        _accumulate(out, entry, a * b)
            return sparse_to_vector(out, self.dim)
        x = np.asarray(x, dtype=complex)
        y = np.asarray(y, dtype=complex)
        return self.structure_sparse.T @ np.outer(x, y).ravel()

    def mul_batch(self, x: np.ndarray, y: np.ndarray) -> np.ndarray:
        """Row-wise numeric product of two ``(m, dim)`` arrays."""
        outer = (x[:, :, None] * y[:, None, :]).reshape(len(x), -1)
        return np.asarray(outer @ self.structure_sparse)

    def commutator(self, x: np.ndarray, y: np.ndarray) -> np.ndarray:
        return self.mul(x, y) - self.mul(y, x)

    def power(self, x: np.ndarray, k: int) -> np.ndarray:
        out = self.unit_vector(is_exact(x))
        for _ in range(k):
            out = self.mul(out, x)
        return out

    @cached_property
    def structure_sparse(self) -> sp.csr_matrix:
        """Numeric structure constants as a ``(dim*dim, dim)`` sparse matrix."""
        rows, cols, vals = [], [], []
        n = self.dim
        for (i, j), entry in self.table.items():
            for k, c in entry.items():
                rows.append(i * n + j)
                cols.append(k)
                vals.append(complex(c))
        return sp.csr_matrix((vals, (rows, cols)), shape=(n * n, n), dtype=complex)

    @cached_property
    def left_matrices(self) -> np.ndarray:
        """``L[i] @ y`` is ``e_i * y``."""
        n = self.dim
        out = np.zeros((n, n, n), dtype=complex)
        for (i, j), entry in self.table.items():
            for k, c in entry.items():
                out[i, k, j] += complex(c)
        return out

    @cached_property
    def right_matrices(self) -> np.ndarray:
        """``R[j] @ x`` is ``x * e_j``."""
        n = self.dim
        out = np.zeros((n, n, n), dtype=complex)
        for (i, j), entry in self.table.items():
            for k, c in entry.items():
                out[j, k, i] += complex(c)
        return out

    # -- Hopf structure ---------------------------------------------------
    def _require_hopf(self) -> None:
        if not self.has_hopf:
            raise NoHopfStructureError(f"{self.name} carries no coproduct")

    def coproduct(self, x: np.ndarray) -> np.ndarray:
        """Coproduct as a ``dim*dim`` vector (index ``i*dim + j`` for e_i (x) e_j)."""
        self._require_hopf()
        n = self.dim
        if is_exact(x):
            out = zeros(n * n)
            for i, a in enumerate(x):
                if a == 0:
                    continue
                for (j, k), c in self.coproduct_table[i].items():
                    out[j * n + k] += a * c
            return out
        return self.coproduct_sparse @ np.asarray(x, dtype=complex)

    @cached_property
    def coproduct_sparse(self) -> sp.csr_matrix:
        self._require_hopf()
        n = self.dim
        rows, cols, vals = [], [], []
        for i, entry in self.coproduct_table.items():
            for (j, k), c in entry.items():
                rows.append(j * n + k)
                cols.append(i)
                vals.append(complex(c))
        return sp.csr_matrix((vals, (rows, cols)), shape=(n * n, n), dtype=complex)

    def tensor(self, x: np.ndarray, y: np.ndarray) -> np.ndarray:
        return np.outer(x, y).ravel()

    def counit_of(self, x: np.ndarray):
        self._require_hopf()
        return x.dot(self.counit) if is_exact(x) else np.asarray(x, complex).dot(self.counit.astype(complex))

    def antipode(self, x: np.ndarray) -> np.ndarray:
        self._require_hopf()
        out: defaultdict = defaultdict(Fraction)
        if is_exact(x):
            for i, a in enumerate(x):
                if a != 0:
                    _accumulate(out, self.antipode_table[i], a)
            return sparse_to_vector(out, self.dim)
        return self.antipode_matrix @ np.asarray(x, dtype=complex)

    @cached_property
    def antipode_matrix(self) -> np.ndarray:
        self._require_hopf()
        m = np.zeros((self.dim, self.dim), dtype=complex)
        for i, entry in self.antipode_table.items():
            for k, c in entry.items():
                m[k, i] += complex(c)
        return m

    def is_primitive(self, x: np.ndarray, tol: float = 0.0) -> bool:
        u = self.unit_vector(is_exact(x))
        residual = self.coproduct(x) - self.tensor(x, u) - self.tensor(u, x)
        if is_exact(residual):
            return is_zero(residual)
        return float(np.max(np.abs(residual), initial=0.0)) <= tol

    def primitive_basis(self, max_weight: int | None = None) -> list[np.ndarray]:
        """Exact basis of the primitive elements of weight at most ``max_weight``."""
        self._require_hopf()
        top = self.max_weight if max_weight is None else max_weight
        idx = [i for i, w in enumerate(self.weights) if 1 <= w <= (top if top is not None else w)]
        n = self.dim
        u = self.unit_vector()
        cols = []
        for i in idx:
            e = self.basis_vector(i)
            cols.append(self.coproduct(e) - self.tensor(e, u) - self.tensor(u, e))
        if not cols:
            return []
        mat = np.array(cols, dtype=object).T
        kernel = nullspace(mat)
        out = []
        for row in kernel:
            v = zeros(n)
            for c, i in zip(row, idx):
                v[i] = c
            out.append(v)
        return out

    # -- sub-carriers -------------------------------------------------------
    def restrict(self, indices: Sequence[int], name: str | None = None) -> "Carrier":
        """Sub-carrier spanned by ``indices``; the span must be closed under products."""
        pos = {old: new for new, old in enumerate(indices)}
        table: Table = {}
        for (i, j), entry in self.table.items():
            if i in pos and j in pos:
                new = {}
                for k, c in entry.items():
                    if k not in pos:
                        raise CarrierError(f"{self.labels[i]}*{self.labels[j]} leaves the span")
                    new[pos[k]] = c
                table[(pos[i], pos[j])] = new
        unit = None
        if self.unit is not None and all(c == 0 or k in pos for k, c in enumerate(self.unit)):
            unit = np.array([self.unit[k] for k in indices], dtype=object)
        return Carrier(
            name=name or f"{self.name}|sub",
            labels=tuple(self.labels[i] for i in indices),
            weights=tuple(self.weights[i] for i in indices),
            table=table,
            max_weight=self.max_weight,
            unit=unit,
            meta={"parent": self.name, "indices": tuple(indices)},
        )


# ---------------------------------------------------------------------------
# matrix algebras


def matrix_carrier(d: int, name: str | None = None) -> Carrier:
    """The algebra of ``d x d`` matrices with elementary-matrix basis."""
    labels = tuple(f"E{i}{j}" for i in range(d) for j in range(d))
    table: Table = {}
    for i, j, k in itertools.product(range(d), repeat=3):
        table[(i * d + j, j * d + k)] = {i * d + k: ONE}
    unit = zeros(d * d)
    for i in range(d):
        unit[i * d + i] = ONE
    return Carrier(name=name or f"mat{d}", labels=labels, weights=(0,) * (d * d), table=table, unit=unit)


def carrier_from_matrices(
    matrices: Sequence[np.ndarray], labels: Sequence[str], name: str, unit: np.ndarray | None = None
) -> Carrier:
    """Algebra spanned by exact square matrices closed under composition."""
    basis = Basis([np.asarray(m, dtype=object).ravel() for m in matrices], int(np.asarray(matrices[0]).size))
    table: Table = {}
    for i, a in enumerate(matrices):
        for j, b in enumerate(matrices):
            prod = np.asarray(a, dtype=object).dot(np.asarray(b, dtype=object))
            table[(i, j)] = vector_to_sparse(basis.coordinates(prod.ravel()))
    unit_vec = basis.coordinates(np.asarray(unit, dtype=object).ravel()) if unit is not None else None
    car = Carrier(name=name, labels=tuple(labels), weights=(0,) * len(labels), table=table, unit=unit_vec)
    car.meta["matrices"] = [np.asarray(m, dtype=object) for m in matrices]
    car.meta["basis"] = basis
    return car


# ---------------------------------------------------------------------------
# word algebras


Word = tuple[int, ...]


def _word_label(word: Sequence[int], names: Sequence[str]) -> str:
    return "*".join(names[i] for i in word) if word else "1"


@dataclass(eq=False)
class WordAlgebra(Carrier):
    """Free algebra on degree-one generators modulo homogeneous relations."""

    generators: tuple[str, ...] = ()
    relation_dims: tuple[int, ...] = ()
    word_order: str = "deglex"
    _reducers: dict = field(default_factory=dict, repr=False)

    def reduce_word(self, word: Sequence[int]) -> np.ndarray:
        """Normal form of a word as an exact vector in the quotient basis."""
        k = len(word)
        if self.max_weight is not None and k > self.max_weight:
            return zeros(self.dim)
        cols, q, offset = self._reducers[k]
        v = zeros(self.dim)
        col = cols[tuple(word)]
        for r, c in enumerate(q[:, col]):
            if c != 0:
                v[offset + r] = c
        return v

    def element(self, combination: Mapping[Sequence[str] | str, object]) -> np.ndarray:
        """Reduce a linear combination of words given by generator names."""
        gi = {g: i for i, g in enumerate(self.generators)}
        v = zeros(self.dim)
        for word, c in combination.items():
            letters = (word,) if isinstance(word, str) else tuple(word)
            v = v + frac(c) * self.reduce_word(tuple(gi[x] for x in letters))
        return v

    def generator(self, name: str) -> np.ndarray:
        return self.element({(name,): 1})


def _ordered_words(n_gens: int, k: int, order: str) -> list[Word]:
    words = list(itertools.product(range(n_gens), repeat=k))
    if order == "deglex":
        return words
    if order == "revlex":
        return words[::-1]
    raise CarrierError(f"unknown word order {order!r}")


def _relation_vector(rel: Mapping[Word, Fraction], cols: Mapping[Word, int], n: int) -> np.ndarray:
    v = zeros(n)
    for w, c in rel.items():
        v[cols[w]] += c
    return v


def build_word_algebra(
    generators: Sequence[str],
    relations: Sequence[Mapping[Sequence[str], object]],
    max_degree: int,
    *,
    order: str = "deglex",
    close_ideal: bool = True,
    name: str = "words",
) -> WordAlgebra:
    """Quotient of the free algebra by homogeneous relations, degree by degree.

    With ``close_ideal`` the two-sided ideal generated by the relations is
    imposed.  Otherwise only the listed relations are imposed and the
    constructor certifies that their span is already an ideal up to
    ``max_degree`` (raising :class:`IdealClosureError` with the offending
    product when it is not).
    """
    gens = tuple(generators)
    gi = {g: i for i, g in enumerate(gens)}
    rels: list[tuple[int, dict[Word, Fraction]]] = []
    for rel in relations:
        parsed: dict[Word, Fraction] = defaultdict(Fraction)
        for word, c in rel.items():
            letters = (word,) if isinstance(word, str) else tuple(word)
            try:
                parsed[tuple(gi[x] for x in letters)] += frac(c)
            except KeyError as exc:
                raise CarrierError(f"relation uses unknown generator {exc.args[0]!r}") from None
        parsed = _clean(parsed)
        if not parsed:
            continue
        lengths = {len(w) for w in parsed}
        if len(lengths) != 1:
            raise CarrierError(f"relation is not homogeneous: word lengths {sorted(lengths)}")
        rels.append((lengths.pop(), parsed))

    ng = len(gens)
    labels: list[str] = []
    weights: list[int] = []
    basis_words: list[Word] = []
    reducers: dict[int, tuple[dict[Word, int], np.ndarray, int]] = {}
    rel_dims: list[int] = []
    subspaces: dict[int, Subspace] = {}
    for k in range(max_degree + 1):
        words = _ordered_words(ng, k, order)
        cols = {w: c for c, w in enumerate(words)}
        n = len(words)
        spanning = []
        for d, rel in rels:
            if d > k:
                continue
            if close_ideal:
                for a in range(k - d + 1):
                    for u in itertools.product(range(ng), repeat=a):
                        for v in itertools.product(range(ng), repeat=k - d - a):
                            spanning.append(_relation_vector({u + w + v: c for w, c in rel.items()}, cols, n))
            elif d == k:
                spanning.append(_relation_vector(rel, cols, n))
        sub = Subspace(n, spanning)
        subspaces[k] = sub
        rel_dims.append(sub.dim)
        offset = len(labels)
        for c in sub.complement:
            basis_words.append(words[c])
            labels.append(_word_label(words[c], gens))
            weights.append(k)
        reducers[k] = (cols, sub.quotient_matrix(), offset)

    if not close_ideal:
        for k in range(max_degree):
            cols_next = reducers[k + 1][0]
            sub_next = subspaces[k + 1]
            words_k = _ordered_words(ng, k, order)
            for row in subspaces[k].rows:
                for g in range(ng):
                    for side in ("left", "right"):
                        v = zeros(len(cols_next))
                        for c, coef in enumerate(row):
                            if coef != 0:
                                w = (g,) + words_k[c] if side == "left" else words_k[c] + (g,)
                                v[cols_next[w]] += coef
                        if not sub_next.contains(v):
                            rel_words = {_word_label(words_k[c], gens): str(coef) for c, coef in enumerate(row) if coef != 0}
                            raise IdealClosureError(
                                f"{side} product of generator {gens[g]} with relation {rel_words} "
                                f"is not in the relation span at degree {k + 1}"
                            )

    dim = len(labels)
    alg = WordAlgebra(
        name=name,
        labels=tuple(labels),
        weights=tuple(weights),
        table={},
        max_weight=max_degree,
        words=tuple(basis_words),
        letters=gens,
        generators=gens,
        relation_dims=tuple(rel_dims),
        word_order=order,
    )
    alg._reducers = reducers
    reduce_cache = lru_cache(maxsize=None)(lambda w: vector_to_sparse(alg.reduce_word(w)))

    table: Table = {}
    for i, u in enumerate(basis_words):
        for j, v in enumerate(basis_words):
            if len(u) + len(v) <= max_degree:
                entry = reduce_cache(u + v)
                if entry:
                    table[(i, j)] = entry
    alg.table = table

    unit = zeros(dim)
    unit[0] = ONE
    alg.unit = unit
    counit = zeros(dim)
    counit[0] = ONE
    alg.counit = counit

    coproduct: dict[int, dict[tuple[int, int], Fraction]] = {}
    antipode: dict[int, Sparse] = {}
    for i, u in enumerate(basis_words):
        acc: defaultdict = defaultdict(Fraction)
        k = len(u)
        for mask in range(1 << k):
            left = tuple(u[p] for p in range(k) if mask >> p & 1)
            right = tuple(u[p] for p in range(k) if not mask >> p & 1)
            for a, ca in reduce_cache(left).items():
                for b, cb in reduce_cache(right).items():
                    acc[(a, b)] += ca * cb
        coproduct[i] = _clean(acc)
        sign = -1 if k % 2 else 1
        antipode[i] = {a: sign * c for a, c in reduce_cache(tuple(reversed(u))).items()}
    alg.coproduct_table = coproduct
    alg.antipode_table = antipode
    return alg


def chord_generators(n: int) -> list[str]:
    sep = "" if n < 10 else "_"
    return [f"r{a}{sep}{b}" for a in range(1, n + 1) for b in range(a + 1, n + 1)]


def chord_name(a: int, b: int, n: int) -> str:
    a, b = min(a, b), max(a, b)
    return f"r{a}{'' if n < 10 else '_'}{b}"


def commutator_relation(x: Mapping[str, int], y: Mapping[str, int]) -> dict[tuple[str, str], int]:
    """Words of ``[x, y]`` for linear combinations of generators."""
    rel: dict[tuple[str, str], int] = defaultdict(int)
    for a, ca in x.items():
        for b, cb in y.items():
            rel[(a, b)] += ca * cb
            rel[(b, a)] -= ca * cb
    return {w: c for w, c in rel.items() if c != 0}


def locality_relations(n: int) -> list[dict]:
    """Commutation of chords with disjoint endpoints."""
    rels = []
    pairs = list(itertools.combinations(range(1, n + 1), 2))
    for (a, b), (c, d) in itertools.combinations(pairs, 2):
        if {a, b}.isdisjoint({c, d}):
            rels.append(commutator_relation({chord_name(a, b, n): 1}, {chord_name(c, d, n): 1}))
    return rels


def four_term_relations(n: int) -> list[dict]:
    """``[r_ab + r_ac, r_bc]`` and ``[r_ab, r_ac + r_bc]`` for a < b < c."""
    rels = []
    for a, b, c in itertools.combinations(range(1, n + 1), 3):
        ab, ac, bc = chord_name(a, b, n), chord_name(a, c, n), chord_name(b, c, n)
        rels.append(commutator_relation({ab: 1, ac: 1}, {bc: 1}))
        rels.append(commutator_relation({ab: 1}, {ac: 1, bc: 1}))
    return rels


def chord_algebra(n: int, max_degree: int, *, plus: bool = False, order: str = "deglex") -> WordAlgebra:
    """Enveloping algebra of horizontal chord diagrams on ``n`` strands.

    ``plus=True`` drops the four-term relations and keeps only locality.
    """
    if n < 2:
        raise CarrierError("chord diagrams need at least two strands")
    rels = locality_relations(n) + ([] if plus else four_term_relations(n))
    name = f"ch{n}{'+' if plus else ''}"
    return build_word_algebra(chord_generators(n), rels, max_degree, order=order, name=name)


# ---------------------------------------------------------------------------
# Lie algebras and PBW envelopes


@dataclass(eq=False)
class LieAlgebra:
    """Finite Lie algebra with weighted basis and exact bracket table.

    Brackets whose weights add up to more than ``max_weight`` are dropped,
    which keeps nilpotent truncations honest.
    """

    labels: tuple[str, ...]
    weights: tuple[int, ...]
    bracket_table: dict[tuple[int, int], Sparse]
    max_weight: int | None = None
    name: str = "lie"

    @property
    def dim(self) -> int:
        return len(self.labels)

    def bracket(self, x: np.ndarray, y: np.ndarray) -> np.ndarray:
        exact = is_exact(x) and is_exact(y)
        out = zeros(self.dim) if exact else np.zeros(self.dim, dtype=complex)
        for (i, j), entry in self.bracket_table.items():
            a, b = x[i], y[j]
            if a != 0 and b != 0:
                for k, c in entry.items():
                    out[k] += a * b * (c if exact else complex(c))
        return out

    def basis_vector(self, i: int) -> np.ndarray:
        v = zeros(self.dim)
        v[i] = ONE
        return v


def lie_from_carrier(car: Carrier, weight: int = 1, name: str | None = None) -> LieAlgebra:
    """Commutator Lie algebra of an (ungraded) carrier, every element of weight ``weight``."""
    table: dict[tuple[int, int], Sparse] = {}
    for i in range(car.dim):
        for j in range(car.dim):
            if i == j:
                continue
            c = car.commutator(car.basis_vector(i), car.basis_vector(j))
            if not is_zero(c):
                table[(i, j)] = vector_to_sparse(c)
    return LieAlgebra(car.labels, (weight,) * car.dim, table, None, name or f"Lie({car.name})")


def enveloping_algebra(lie: LieAlgebra, max_weight: int, name: str | None = None) -> Carrier:
    """PBW model of the universal enveloping algebra, truncated by weight.

    Basis: nondecreasing monomials in the Lie basis.  Products are computed
    by straightening with ``yx = xy + [y, x]``.
    """
    if any(w < 1 for w in lie.weights):
        raise CarrierError("PBW truncation needs Lie basis weights >= 1")
    wts = lie.weights

    def weight(word: Word) -> int:
        return sum(wts[i] for i in word)

    @lru_cache(maxsize=None)
    def normal(word: Word) -> tuple[tuple[Word, Fraction], ...]:
        if weight(word) > max_weight:
            return ()
        for p in range(len(word) - 1):
            x, y = word[p], word[p + 1]
            if x > y:
                acc: defaultdict = defaultdict(Fraction)
                for m, c in normal(word[:p] + (y, x) + word[p + 2:]):
                    acc[m] += c
                for k, c in lie.bracket_table.get((x, y), {}).items():
                    if lie.max_weight is not None and wts[x] + wts[y] > lie.max_weight:
                        continue
                    for m, c2 in normal(word[:p] + (k,) + word[p + 2:]):
                        acc[m] += c * c2
                return tuple((m, c) for m, c in acc.items() if c != 0)
        return ((word, ONE),)

    monomials: list[Word] = []
    for length in range(max_weight + 1):
        for combo in itertools.combinations_with_replacement(range(lie.dim), length):
            if weight(combo) <= max_weight:
                monomials.append(combo)
    monomials.sort(key=lambda m: (weight(m), len(m), m))
    pos = {m: i for i, m in enumerate(monomials)}

    def to_sparse(word: Word) -> Sparse:
        return {pos[m]: c for m, c in normal(word)}

    table: Table = {}
    for i, u in enumerate(monomials):
        for j, v in enumerate(monomials):
            if weight(u) + weight(v) <= max_weight:
                entry = to_sparse(u + v)
                if entry:
                    table[(i, j)] = entry
    dim = len(monomials)
    coproduct: dict[int, dict[tuple[int, int], Fraction]] = {}
    antipode: dict[int, Sparse] = {}
    for i, u in enumerate(monomials):
        acc: defaultdict = defaultdict(Fraction)
        k = len(u)
        for mask in range(1 << k):
            left = tuple(u[p] for p in range(k) if mask >> p & 1)
            right = tuple(u[p] for p in range(k) if not mask >> p & 1)
            acc[(pos[left], pos[right])] += ONE
        coproduct[i] = dict(acc)
        sign = -1 if k % 2 else 1
        antipode[i] = {a: sign * c for a, c in to_sparse(tuple(reversed(u))).items()}
    unit = zeros(dim)
    unit[0] = ONE
    return Carrier(
        name=name or f"U({lie.name})",
        labels=tuple(_word_label(m, lie.labels) for m in monomials),
        weights=tuple(weight(m) for m in monomials),
        table=table,
        max_weight=max_weight,
        unit=unit,
        coproduct_table=coproduct,
        counit=unit.copy(),
        antipode_table=antipode,
        words=tuple(monomials),
        letters=lie.labels,
    )


# ---------------------------------------------------------------------------
# adjoining a unit


def unitization(car: Carrier, name: str | None = None) -> Carrier:
    """``C (+) A`` with product ``(p, a)(q, b) = (pq, pb + qa + ab)``."""
    n = car.dim
    table: Table = {(0, 0): {0: ONE}}
    for i in range(n):
        table[(0, i + 1)] = {i + 1: ONE}
        table[(i + 1, 0)] = {i + 1: ONE}
    for (i, j), entry in car.table.items():
        table[(i + 1, j + 1)] = {k + 1: c for k, c in entry.items()}
    unit = zeros(n + 1)
    unit[0] = ONE
    return Carrier(
        name=name or f"{car.name}.",
        labels=("1.",) + car.labels,
        weights=(0,) + car.weights,
        table=table,
        max_weight=car.max_weight,
        unit=unit,
        meta={"unitization_of": car},
    )


def adjoin(car_bullet: Carrier, a: np.ndarray, scalar=ONE) -> np.ndarray:
    """The element ``(scalar, a)`` of a unitization."""
    exact = is_exact(a)
    out = zeros(len(a) + 1) if exact else np.zeros(len(a) + 1, dtype=complex)
    out[0] = scalar if exact else complex(scalar)
    out[1:] = a
    return out


# ---------------------------------------------------------------------------
# adjoint action


def adjoint_action(car: Carrier, x: np.ndarray, y: np.ndarray) -> np.ndarray:
    """``x |> y = sum x' y S(x'')`` in a Hopf carrier."""
    car._require_hopf()
    n = car.dim
    delta = car.coproduct(x)
    exact = is_exact(delta) and is_exact(y)
    out = car.zero(exact)
    for idx, c in enumerate(delta):
        if c == 0:
            continue
        a, b = divmod(idx, n)
        left = car.mul(car.basis_vector(a, exact), y)
        out = out + c * car.mul(left, car.antipode(car.basis_vector(b, exact)))
    return out


# ---------------------------------------------------------------------------
# smash products


@dataclass(eq=False)
class SmashProduct:
    """The algebra ``I (x)_rho H`` truncated by total weight.

    Basis elements are pairs ``(u, x)`` of basis elements of ``I`` and ``H``.
    ``full`` is the unital algebra on all pairs; ``augmented`` is the
    subalgebra ``I^0 (x) H`` with ``u`` in the augmentation ideal.
    """

    I: Carrier
    H: Carrier
    full: Carrier
    pairs: tuple[tuple[int, int], ...]
    augmented_indices: tuple[int, ...]
    augmented: Carrier

    def pair_index(self, u: int, x: int) -> int | None:
        return self._pos.get((u, x))

    def __post_init__(self) -> None:
        self._pos = {p: i for i, p in enumerate(self.pairs)}

    def tensor(self, v: np.ndarray, x: np.ndarray) -> np.ndarray:
        """``v (x) x`` in the full smash carrier (truncated by weight)."""
        exact = is_exact(v) and is_exact(x)
        out = self.full.zero(exact)
        for k, (a, b) in enumerate(self.pairs):
            out[k] = v[a] * x[b]
        return out

    def include_I(self, v: np.ndarray) -> np.ndarray:
        return self.tensor(v, self.H.unit_vector(is_exact(v)))

    def include_H(self, x: np.ndarray) -> np.ndarray:
        return self.tensor(self.I.unit_vector(is_exact(x)), x)

    def to_augmented(self, w: np.ndarray) -> np.ndarray:
        return np.array([w[i] for i in self.augmented_indices], dtype=w.dtype)

    def from_augmented(self, a: np.ndarray) -> np.ndarray:
        out = self.full.zero(is_exact(a))
        for k, i in enumerate(self.augmented_indices):
            out[i] = a[k]
        return out

    @cached_property
    def augmented_pairs(self) -> tuple[tuple[int, int], ...]:
        return tuple(self.pairs[i] for i in self.augmented_indices)

    def outer_batch(self, v: np.ndarray, x: np.ndarray) -> np.ndarray:
        """Numeric ``v (x) x`` restricted to ``I^0 (x) H`` for stacked rows."""
        ia = np.array([p[0] for p in self.augmented_pairs], dtype=int)
        ib = np.array([p[1] for p in self.augmented_pairs], dtype=int)
        return v[..., ia] * x[..., ib]


def build_smash_product(
    I: Carrier,
    H: Carrier,
    rho: Callable[[int, int], Sparse],
    max_weight: int | None = None,
    name: str | None = None,
    check: bool = True,
) -> SmashProduct:
    """Smash product with ``(u (x) x)(v (x) y) = sum u (x' |> v) (x) x'' y``.

    ``rho(b, i)`` returns ``e_b |> e_i`` as a sparse vector of ``I``.  With
    ``check`` the module-algebra identity is verified on basis pairs.
    """
    I._require_hopf()
    H._require_hopf()
    top = max_weight if max_weight is not None else min(
        w for w in (I.max_weight, H.max_weight) if w is not None
    )
    pairs = [
        (u, x) for u in range(I.dim) for x in range(H.dim) if I.weights[u] + H.weights[x] <= top
    ]
    pos = {p: i for i, p in enumerate(pairs)}
    nH = H.dim

    if check:
        for b in range(H.dim):
            delta = H.coproduct_table[b]
            for u in range(I.dim):
                for v in range(I.dim):
                    if H.weights[b] + I.weights[u] + I.weights[v] > top:
                        continue
                    uv = I.mul(I.basis_vector(u), I.basis_vector(v))
                    lhs = sparse_to_vector(_act_vec(rho, b, uv), I.dim)
                    rhs = zeros(I.dim)
                    for (p, q), c in delta.items():
                        rhs = rhs + c * I.mul(
                            sparse_to_vector(rho(p, u), I.dim), sparse_to_vector(rho(q, v), I.dim)
                        )
                    if not is_zero(lhs - rhs):
                        raise CarrierError(
                            f"module-algebra axiom fails for {H.labels[b]} acting on {I.labels[u]}*{I.labels[v]}"
                        )

    table: Table = {}
    for (u, x) in pairs:
        delta = H.coproduct_table[x]
        for (v, y) in pairs:
            if I.weights[u] + H.weights[x] + I.weights[v] + H.weights[y] > top:
                continue
            acc: defaultdict = defaultdict(Fraction)
            for (p, q), c in delta.items():
                act = rho(p, v)
                if not act:
                    continue
                left = zeros(I.dim)
                for k, ck in act.items():
                    left[k] = ck
                uv = I.mul(I.basis_vector(u), left)
                qy = H.mul(H.basis_vector(q), H.basis_vector(y))
                for a, ca in enumerate(uv):
                    if ca == 0:
                        continue
                    for bb, cb in enumerate(qy):
                        if cb != 0:
                            k = pos.get((a, bb))
                            if k is not None:
                                acc[k] += c * ca * cb
            entry = _clean(acc)
            if entry:
                table[(pos[(u, x)], pos[(v, y)])] = entry
    unit = zeros(len(pairs))
    unit[pos[(0, 0)]] = ONE
    full = Carrier(
        name=name or f"{I.name}#{H.name}",
        labels=tuple(f"{I.labels[u]}|{H.labels[x]}" for u, x in pairs),
        weights=tuple(I.weights[u] + H.weights[x] for u, x in pairs),
        table=table,
        max_weight=top,
        unit=unit,
    )
    aug_idx = tuple(i for i, (u, _) in enumerate(pairs) if I.counit[u] == 0)
    augmented = full.restrict(aug_idx, name=f"{full.name}^0")
    return SmashProduct(I=I, H=H, full=full, pairs=tuple(pairs), augmented_indices=aug_idx, augmented=augmented)


def _act_vec(rho: Callable[[int, int], Sparse], b: int, v: np.ndarray) -> Sparse:
    acc: defaultdict = defaultdict(Fraction)
    for i, c in enumerate(v):
        if c != 0:
            _accumulate(acc, rho(b, i), c)
    return _clean(acc)


# ---------------------------------------------------------------------------
# free modules over a word algebra (models of free crossed modules)


@dataclass(eq=False)
class FreeModuleCarrier:
    """Graded module ``(+)_e H.e`` over a word algebra ``H`` modulo a submodule.

    Elements are combinations of pairs ``(w, e)`` with ``w`` a basis word of
    ``H``.  The submodule is generated by ``module_relations`` together with
    any ``extra`` vectors supplied per degree; it is closed under the left
    action of ``H`` inside the degree bound.
    """

    base: WordAlgebra
    generator_names: tuple[str, ...]
    generator_degrees: tuple[int, ...]
    max_degree: int
    pairs: tuple[tuple[int, int], ...]
    submodule: Subspace

    def __post_init__(self) -> None:
        self._pos = {p: i for i, p in enumerate(self.pairs)}
        comp = self.submodule.complement
        self.basis_pairs = tuple(self.pairs[c] for c in comp)
        self.labels = tuple(
            f"{self.base.labels[w]}.{self.generator_names[e]}" if self.base.words[w] else self.generator_names[e]
            for w, e in self.basis_pairs
        )
        self.degrees = tuple(self.base.weights[w] + self.generator_degrees[e] for w, e in self.basis_pairs)
        self._quotient = self.submodule.quotient_matrix()

    @property
    def dim(self) -> int:
        return len(self.basis_pairs)

    @property
    def n_pairs(self) -> int:
        return len(self.pairs)

    def pair_vector(self, w: int, e: int) -> np.ndarray:
        v = zeros(len(self.pairs))
        k = self._pos.get((w, e))
        if k is not None:
            v[k] = ONE
        return v

    def project(self, pv: np.ndarray) -> np.ndarray:
        """Pair-coordinates to quotient-basis coordinates."""
        return self._quotient.dot(pv)

    def lift(self, v: np.ndarray) -> np.ndarray:
        pv = zeros(len(self.pairs))
        for k, c in zip(self.submodule.complement, v):
            pv[k] = c
        return pv

    def act_pairs(self, x: np.ndarray, pv: np.ndarray) -> np.ndarray:
        """Left action of an ``H`` element on pair coordinates."""
        out = zeros(len(self.pairs))
        H = self.base
        for k, c in enumerate(pv):
            if c == 0:
                continue
            w, e = self.pairs[k]
            prod = H.mul(x, H.basis_vector(w))
            for w2, c2 in enumerate(prod):
                if c2 != 0:
                    k2 = self._pos.get((w2, e))
                    if k2 is not None:
                        out[k2] += c * c2
        return out

    def act(self, x: np.ndarray, v: np.ndarray) -> np.ndarray:
        return self.project(self.act_pairs(x, self.lift(v)))

    def basis_vector(self, i: int) -> np.ndarray:
        v = zeros(self.dim)
        v[i] = ONE
        return v

    def generator(self, name: str) -> np.ndarray:
        e = self.generator_names.index(name)
        return self.project(self.pair_vector(0, e))


def _module_pairs(base: WordAlgebra, degrees: Sequence[int], max_degree: int) -> list[tuple[int, int]]:
    pairs = []
    for e, d in enumerate(degrees):
        for w in range(base.dim):
            if base.weights[w] + d <= max_degree:
                pairs.append((w, e))
    pairs.sort(key=lambda p: (base.weights[p[0]] + degrees[p[1]], p[1], p[0]))
    return pairs


def build_free_module(
    base: WordAlgebra,
    generators: Mapping[str, int],
    max_degree: int,
    module_relations: Sequence[Mapping[tuple[Sequence[str], str], object]] = (),
    extra: Callable[[FreeModuleCarrier], Iterable[np.ndarray]] | None = None,
) -> FreeModuleCarrier:
    """Free graded ``base``-module on named generators modulo a submodule.

    Each module relation maps ``(word, generator)`` (word as generator names
    of ``base``) to a coefficient.  ``extra`` may return further pair
    vectors computed from a provisional module (used for Peiffer elements);
    the submodule is recomputed until it stabilises.
    """
    names = tuple(generators)
    degrees = tuple(generators[g] for g in names)
    pairs = _module_pairs(base, degrees, max_degree)
    pos = {p: i for i, p in enumerate(pairs)}

    seeds = []
    for rel in module_relations:
        pv = zeros(len(pairs))
        for (word, gen), c in rel.items():
            letters = (word,) if isinstance(word, str) else tuple(word)
            wv = base.element({letters: 1}) if letters else base.unit_vector()
            e = names.index(gen)
            for w, cw in enumerate(wv):
                if cw != 0 and (w, e) in pos:
                    pv[pos[(w, e)]] += frac(c) * cw
        seeds.append(pv)

    def close(vectors: list[np.ndarray]) -> Subspace:
        sub = Subspace(len(pairs), vectors)
        gens = [base.basis_vector(i) for i in range(base.dim) if base.weights[i] == 1]
        while True:
            new = []
            for row in sub.rows:
                for g in gens:
                    prod = zeros(len(pairs))
                    for k, c in enumerate(row):
                        if c == 0:
                            continue
                        w, e = pairs[k]
                        for w2, c2 in enumerate(base.mul(g, base.basis_vector(w))):
                            if c2 != 0 and (w2, e) in pos:
                                prod[pos[(w2, e)]] += c * c2
                    if not sub.contains(prod):
                        new.append(prod)
            if not new:
                return sub
            sub = Subspace(len(pairs), list(sub.rows) + new)

    sub = close(seeds)
    module = FreeModuleCarrier(base, names, degrees, max_degree, tuple(pairs), sub)
    if extra is None:
        return module
    while True:
        more = [v for v in extra(module) if not module.submodule.contains(v)]
        if not more:
            return module
        sub = close(list(module.submodule.rows) + more)
        module = FreeModuleCarrier(base, names, degrees, max_degree, tuple(pairs), sub)


# ---------------------------------------------------------------------------
# JSON carrier specs


def load_carrier_spec(spec: Mapping | str | Path) -> WordAlgebra:
    """Build a word algebra from a JSON description.

    Accepted forms::

        {"kind": "chord", "n": 3, "plus": false, "max_degree": 3}
        {"kind": "words", "generators": ["x", "y"], "max_degree": 3,
         "relations": [[[1, ["x", "y"]], [-1, ["y", "x"]]]]}
    """
    if isinstance(spec, (str, Path)):
        spec = json.loads(Path(spec).read_text())
    kind = spec.get("kind", "words")
    max_degree = int(spec["max_degree"])
    order = spec.get("order", "deglex")
    if kind == "chord":
        return chord_algebra(int(spec["n"]), max_degree, plus=bool(spec.get("plus", False)), order=order)
    if kind == "words":
        rels = []
        for rel in spec.get("relations", []):
            combo: dict[tuple[str, ...], int] = defaultdict(int)
            try:
                for coef, word in rel:
                    combo[tuple(word)] += int(coef)
            except (TypeError, ValueError):
                raise CarrierError(f"relation {rel!r} is not a list of [coefficient, word] pairs") from None
            rels.append(dict(combo))
        return build_word_algebra(
            spec["generators"],
            rels,
            max_degree,
            order=order,
            close_ideal=bool(spec.get("close_ideal", True)),
            name=spec.get("name", "words"),
        )
    raise CarrierError(f"unknown carrier kind {kind!r}")
