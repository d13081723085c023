"""Exact rational linear algebra used to build carriers.

Vectors are numpy object arrays of :class:`fractions.Fraction`.  Row
reduction is delegated to sympy's ``DomainMatrix`` over ``QQ``.
"""
from __future__ import annotations

from fractions import Fraction
from typing import Iterable, Sequence

import numpy as np
from sympy import QQ
from sympy.polys.matrices import DomainMatrix

ZERO = Fraction(0)
ONE = Fraction(1)


def frac(x) -> Fraction:
    """Convert ints, Fractions and gmpy/sympy rationals to Fraction."""
    if isinstance(x, Fraction):
        return x
    if isinstance(x, int):
        return Fraction(x)
    num = getattr(x, "numerator", None)
    den = getattr(x, "denominator", None)
    if num is not None and den is not None:
        return Fraction(int(num), int(den))
    return Fraction(x)


def zeros(n: int) -> np.ndarray:
    out = np.empty(n, dtype=object)
    out[:] = ZERO
    return out


def unit_vector(n: int, i: int) -> np.ndarray:
    out = zeros(n)
    out[i] = ONE
    return out


def exact_array(values: Iterable) -> np.ndarray:
    vals = [frac(v) for v in values]
    out = np.empty(len(vals), dtype=object)
    out[:] = vals
    return out


def exact_matrix(rows: Sequence[Sequence], ncols: int | None = None) -> np.ndarray:
    rows = [list(r) for r in rows]
    if ncols is None:
        ncols = len(rows[0]) if rows else 0
    out = np.empty((len(rows), ncols), dtype=object)
    out[:] = ZERO
    for i, r in enumerate(rows):
        for j, v in enumerate(r):
            out[i, j] = frac(v)
    return out


def is_zero(v: np.ndarray) -> bool:
    return all(x == 0 for x in np.asarray(v).ravel())


def to_complex(v: np.ndarray) -> np.ndarray:
    return np.asarray(v, dtype=complex) if np.asarray(v).dtype != object else np.array(
        [complex(x) for x in np.asarray(v).ravel()], dtype=complex
    ).reshape(np.shape(v))


def _dm(rows: np.ndarray) -> DomainMatrix:
    m, n = rows.shape
    data = [[QQ(int(x.numerator), int(x.denominator)) for x in row] for row in rows]
    return DomainMatrix(data, (m, n), QQ)


def rref(rows: np.ndarray) -> tuple[np.ndarray, tuple[int, ...]]:
    """Reduced row echelon form with zero rows removed."""
    rows = np.asarray(rows, dtype=object)
    m, n = rows.shape
    if m == 0:
        return np.empty((0, n), dtype=object), ()
    red, pivots = _dm(rows).rref()
    data = red.to_list()[: len(pivots)]
    out = exact_matrix(data, n) if data else np.empty((0, n), dtype=object)
    return out, tuple(int(p) for p in pivots)


def nullspace(matrix: np.ndarray) -> np.ndarray:
    """Basis (as rows) of the right kernel of an exact matrix."""
    matrix = np.asarray(matrix, dtype=object)
    m, n = matrix.shape
    if n == 0:
        return np.empty((0, 0), dtype=object)
    if m == 0:
        return exact_matrix(np.eye(n, dtype=int).tolist(), n)
    red, pivots = rref(matrix)
    free = [j for j in range(n) if j not in pivots]
    basis = []
    for f in free:
        v = zeros(n)
        v[f] = ONE
        for row, p in zip(red, pivots):
            v[p] = -row[f]
        basis.append(v)
    if not basis:
        return np.empty((0, n), dtype=object)
    return np.array(basis, dtype=object)


class Subspace:
    """An exact subspace of Q^n kept in reduced echelon form.

    ``reduce`` returns the canonical representative of a vector modulo the
    subspace (pivot coordinates cleared).  The non-pivot coordinates give a
    basis of the quotient.
    """

    def __init__(self, n: int, spanning: Iterable[np.ndarray] = ()):
        self.n = n
        vecs = [np.asarray(v, dtype=object) for v in spanning]
        if vecs:
            self.rows, self.pivots = rref(np.array(vecs, dtype=object).reshape(len(vecs), n))
        else:
            self.rows, self.pivots = np.empty((0, n), dtype=object), ()
        self.complement = tuple(j for j in range(n) if j not in set(self.pivots))

    @property
    def dim(self) -> int:
        return len(self.pivots)

    def reduce(self, v: np.ndarray) -> np.ndarray:
        out = np.array(v, dtype=object, copy=True)
        for row, p in zip(self.rows, self.pivots):
            c = out[p]
            if c != 0:
                out = out - c * row
        return out

    def contains(self, v: np.ndarray) -> bool:
        return is_zero(self.reduce(v))

    def quotient_coords(self, v: np.ndarray) -> np.ndarray:
        r = self.reduce(v)
        return np.array([r[j] for j in self.complement], dtype=object)

    def quotient_matrix(self) -> np.ndarray:
        """Matrix sending a vector to its quotient coordinates."""
        q = np.empty((len(self.complement), self.n), dtype=object)
        q[:] = ZERO
        for j in range(self.n):
            col = self.quotient_coords(_unit(self.n, j))
            q[:, j] = col
        return q

    def section_matrix(self) -> np.ndarray:
        """Lift quotient coordinates to the representative supported off pivots."""
        s = np.empty((self.n, len(self.complement)), dtype=object)
        s[:] = ZERO
        for k, j in enumerate(self.complement):
            s[j, k] = ONE
        return s


def _unit(n: int, j: int) -> np.ndarray:
    return unit_vector(n, j)


class Basis:
    """An independent family of exact vectors with a coordinate solver."""

    def __init__(self, vectors: Sequence[np.ndarray], n: int):
        self.n = n
        self.vectors = np.array([np.asarray(v, dtype=object) for v in vectors], dtype=object).reshape(
            len(vectors), n
        )
        k = len(vectors)
        aug = np.empty((k, n + k), dtype=object)
        aug[:] = ZERO
        aug[:, :n] = self.vectors
        for i in range(k):
            aug[i, n + i] = ONE
        red, pivots = rref(aug) if k else (np.empty((0, n + k), dtype=object), ())
        if any(p >= n for p in pivots):
            raise ValueError("vectors are linearly dependent")
        self._pivots = pivots
        self._transform = red[:, n:]
        self._echelon = red[:, :n]

    def __len__(self) -> int:
        return len(self.vectors)

    def coordinates(self, v: np.ndarray, check: bool = True) -> np.ndarray:
        v = np.asarray(v, dtype=object)
        d = np.array([v[p] for p in self._pivots], dtype=object)
        if check:
            recon = d.dot(self._echelon) if len(d) else zeros(self.n)
            if not is_zero(v - recon):
                raise ValueError("vector is not in the span")
        return d.dot(self._transform) if len(d) else np.empty(0, dtype=object)
