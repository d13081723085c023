"""Truncated formal power series in ``h`` with coefficients in a carrier.

Coefficient ``k`` must lie in the weight-``<= k`` slice of a weighted
carrier; for an unweighted carrier every slice is the whole space.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import factorial
from typing import Callable, Mapping, Sequence

import numpy as np

from .carriers import Carrier, NoHopfStructureError, is_exact
from .linalg import frac, is_zero, to_complex


class SeriesError(ValueError):
    """Invalid series operation."""


class CarrierMismatchError(SeriesError):
    pass


class TruncationMismatchError(SeriesError):
    pass


class NotInvertibleError(SeriesError):
    """The constant term is not the unit."""


@dataclass(frozen=True, eq=False)
class TruncatedSeries:
    carrier: Carrier
    coeffs: tuple[np.ndarray, ...]

    def __post_init__(self) -> None:
        if not self.coeffs:
            raise SeriesError("a series needs at least the constant coefficient")
        for k, c in enumerate(self.coeffs):
            if np.shape(c) != (self.carrier.dim,):
                raise SeriesError(f"coefficient {k} has shape {np.shape(c)}, expected ({self.carrier.dim},)")

    # -- construction -------------------------------------------------------
    @classmethod
    def from_coeffs(cls, carrier: Carrier, coeffs: Sequence[np.ndarray], check_slices: bool = True) -> "TruncatedSeries":
        s = cls(carrier, tuple(np.asarray(c) for c in coeffs))
        if check_slices:
            for k, c in enumerate(s.coeffs):
                if not carrier.in_slice(c, k):
                    raise SeriesError(f"coefficient {k} leaves the weight-{k} slice of {carrier.name}")
        return s

    @classmethod
    def zero(cls, carrier: Carrier, N: int, exact: bool = True) -> "TruncatedSeries":
        return cls(carrier, tuple(carrier.zero(exact) for _ in range(N + 1)))

    @classmethod
    def one(cls, carrier: Carrier, N: int, exact: bool = True) -> "TruncatedSeries":
        z = cls.zero(carrier, N, exact)
        return z.replace(0, carrier.unit_vector(exact))

    @classmethod
    def monomial(cls, carrier: Carrier, N: int, k: int, x: np.ndarray) -> "TruncatedSeries":
        """``h^k x`` (zero when ``k > N``)."""
        z = cls.zero(carrier, N, is_exact(x))
        return z.replace(k, x) if k <= N else z

    def replace(self, k: int, value: np.ndarray) -> "TruncatedSeries":
        coeffs = list(self.coeffs)
        coeffs[k] = np.asarray(value)
        return TruncatedSeries(self.carrier, tuple(coeffs))

    # -- basic data -----------------------------------------------------------
    @property
    def N(self) -> int:
        return len(self.coeffs) - 1

    @property
    def exact(self) -> bool:
        return all(is_exact(c) for c in self.coeffs)

    def __getitem__(self, k: int) -> np.ndarray:
        return self.coeffs[k]

    def numeric(self) -> "TruncatedSeries":
        return TruncatedSeries(self.carrier, tuple(to_complex(c) for c in self.coeffs))

    def as_array(self) -> np.ndarray:
        """Coefficients stacked into a complex ``(N+1, dim)`` array."""
        return np.array([to_complex(c) for c in self.coeffs])

    @classmethod
    def from_array(cls, carrier: Carrier, arr: np.ndarray) -> "TruncatedSeries":
        return cls(carrier, tuple(np.asarray(row, dtype=complex) for row in arr))

    def max_abs(self) -> float:
        return float(max((np.max(np.abs(to_complex(c)), initial=0.0) for c in self.coeffs), default=0.0))

    def is_zero(self, tol: float = 0.0) -> bool:
        if self.exact and tol == 0.0:
            return all(is_zero(c) for c in self.coeffs)
        return self.max_abs() <= tol

    def constant_is_unit(self) -> bool:
        u = self.carrier.unit
        if u is None:
            return False
        c0 = self.coeffs[0]
        if is_exact(c0):
            return is_zero(c0 - u)
        return float(np.max(np.abs(c0 - to_complex(u)), initial=0.0)) <= 1e-12

    # -- arithmetic -----------------------------------------------------------
    def _check(self, other: "TruncatedSeries") -> None:
        if other.carrier is not self.carrier:
            raise CarrierMismatchError(f"carriers differ: {self.carrier.name} vs {other.carrier.name}")
        if other.N != self.N:
            raise TruncationMismatchError(f"truncation orders differ: {self.N} vs {other.N}")

    def __add__(self, other: "TruncatedSeries") -> "TruncatedSeries":
        self._check(other)
        return TruncatedSeries(self.carrier, tuple(a + b for a, b in zip(self.coeffs, other.coeffs)))

    def __sub__(self, other: "TruncatedSeries") -> "TruncatedSeries":
        self._check(other)
        return TruncatedSeries(self.carrier, tuple(a - b for a, b in zip(self.coeffs, other.coeffs)))

    def __neg__(self) -> "TruncatedSeries":
        return TruncatedSeries(self.carrier, tuple(-a for a in self.coeffs))

    def scale(self, c) -> "TruncatedSeries":
        if self.exact and isinstance(c, (int, Fraction)):
            c = frac(c)
        return TruncatedSeries(self.carrier, tuple(c * a for a in self.coeffs))

    def __mul__(self, other):
        if isinstance(other, TruncatedSeries):
            return series_mul(self, other)
        return self.scale(other)

    def __rmul__(self, other):
        return self.scale(other)

    def map(self, f: Callable[[np.ndarray], np.ndarray], carrier: Carrier) -> "TruncatedSeries":
        """Apply a linear map coefficientwise."""
        return TruncatedSeries(carrier, tuple(np.asarray(f(c)) for c in self.coeffs))

    def truncate(self, M: int) -> "TruncatedSeries":
        return truncate(self, M)

    def to_json(self) -> list[dict[str, list[float]]]:
        out = []
        for c in self.coeffs:
            cc = to_complex(c)
            out.append({self.carrier.labels[i]: [float(v.real), float(v.imag)] for i, v in enumerate(cc) if v != 0})
        return out

    @classmethod
    def from_json(cls, carrier: Carrier, data: Sequence[Mapping[str, Sequence[float]]]) -> "TruncatedSeries":
        coeffs = []
        for entry in data:
            v = carrier.zero(False)
            for lab, (re, im) in entry.items():
                v[carrier.index(lab)] = complex(re, im)
            coeffs.append(v)
        return cls(carrier, tuple(coeffs))


def series_mul(a: TruncatedSeries, b: TruncatedSeries) -> TruncatedSeries:
    """Cauchy product ``c_n = sum_{i+j=n} a_i b_j``."""
    a._check(b)
    car = a.carrier
    out = []
    for n in range(a.N + 1):
        acc = car.zero(a.exact and b.exact)
        for i in range(n + 1):
            ai, bj = a.coeffs[i], b.coeffs[n - i]
            if _nonzero(ai) and _nonzero(bj):
                acc = acc + car.mul(ai, bj)
        out.append(acc)
    return TruncatedSeries(car, tuple(out))


def _nonzero(v: np.ndarray) -> bool:
    return any(x != 0 for x in v)


def series_invert(g: TruncatedSeries) -> TruncatedSeries:
    """Inverse of a series with unit constant term, by the geometric series."""
    if not g.constant_is_unit():
        raise NotInvertibleError("constant term is not the unit")
    car = g.carrier
    exact = g.exact
    inv = [car.unit_vector(exact)]
    for n in range(1, g.N + 1):
        acc = car.zero(exact)
        for i in range(1, n + 1):
            if _nonzero(g.coeffs[i]) and _nonzero(inv[n - i]):
                acc = acc - car.mul(g.coeffs[i], inv[n - i])
        inv.append(acc)
    return TruncatedSeries(car, tuple(inv))


def _powers(x: TruncatedSeries) -> list[TruncatedSeries]:
    """``x^0, ..., x^N`` for ``x`` with vanishing constant term."""
    pw = [TruncatedSeries.one(x.carrier, x.N, x.exact)]
    for _ in range(x.N):
        pw.append(series_mul(pw[-1], x))
    return pw


def exp_primitive(x: TruncatedSeries) -> TruncatedSeries:
    if _nonzero(x.coeffs[0]):
        raise SeriesError("exp needs a vanishing constant term")
    out = TruncatedSeries.zero(x.carrier, x.N, x.exact)
    for k, p in enumerate(_powers(x)):
        c = Fraction(1, factorial(k)) if x.exact else 1.0 / factorial(k)
        out = out + p.scale(c)
    return out


def log_grouplike(g: TruncatedSeries) -> TruncatedSeries:
    if not g.constant_is_unit():
        raise NotInvertibleError("log needs unit constant term")
    y = g - TruncatedSeries.one(g.carrier, g.N, g.exact)
    out = TruncatedSeries.zero(g.carrier, g.N, g.exact)
    for k, p in enumerate(_powers(y)):
        if k == 0:
            continue
        c = Fraction((-1) ** (k + 1), k) if g.exact else (-1) ** (k + 1) / k
        out = out + p.scale(c)
    return out


def coproduct_residual(g: TruncatedSeries) -> list[np.ndarray]:
    """``Delta(g_n) - sum_{i+j=n} g_i (x) g_j`` for each degree ``n``."""
    car = g.carrier
    if not car.has_hopf:
        raise NoHopfStructureError(f"{car.name} carries no coproduct")
    out = []
    for n in range(g.N + 1):
        r = car.coproduct(g.coeffs[n])
        for i in range(n + 1):
            r = r - car.tensor(g.coeffs[i], g.coeffs[n - i])
        out.append(r)
    return out


def is_grouplike(g: TruncatedSeries, tol: float = 0.0) -> bool:
    res = coproduct_residual(g)
    if g.exact and tol == 0.0:
        return all(is_zero(r) for r in res)
    return max(float(np.max(np.abs(to_complex(r)), initial=0.0)) for r in res) <= tol


def grouplike_residual(g: TruncatedSeries) -> float:
    return max(float(np.max(np.abs(to_complex(r)), initial=0.0)) for r in coproduct_residual(g))


def is_primitive_series(x: TruncatedSeries, tol: float = 0.0) -> bool:
    car = x.carrier
    if _nonzero(x.coeffs[0]):
        return False
    return all(car.is_primitive(c, tol) for c in x.coeffs)


def truncate(s: TruncatedSeries, M: int) -> TruncatedSeries:
    if M > s.N:
        raise TruncationMismatchError(f"cannot truncate order {s.N} to {M}")
    return TruncatedSeries(s.carrier, s.coeffs[: M + 1])
