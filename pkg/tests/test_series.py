import random
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import random_exact_series
from holotwo.linalg import zeros
from holotwo.series import (
    CarrierMismatchError,
    NotInvertibleError,
    SeriesError,
    TruncatedSeries,
    TruncationMismatchError,
    exp_primitive,
    grouplike_residual,
    is_grouplike,
    log_grouplike,
    series_invert,
    series_mul,
    truncate,
)


def _r12_series(ch2, coeffs):
    r = ch2.generator("r12")
    vals = []
    for k, c in enumerate(coeffs):
        vals.append(ch2.unit_vector() * Fraction(c) if k == 0 else ch2.power(r, k) * Fraction(c))
    return TruncatedSeries(ch2, tuple(vals))


def test_unit_is_left_and_right_identity(ch3):
    x = random_exact_series(ch3, 3, random.Random(0), zero_constant=False)
    one = TruncatedSeries.one(ch3, 3)
    assert (series_mul(one, x) - x).is_zero()
    assert (series_mul(x, one) - x).is_zero()


def test_square_of_one_plus_h_r12(ch2):
    r = ch2.generator("r12")
    a = TruncatedSeries(ch2, (ch2.unit_vector(), r, ch2.zero()))
    sq = series_mul(a, a)
    assert (sq[0] == ch2.unit_vector()).all()
    assert (sq[1] == 2 * r).all()
    assert (sq[2] == ch2.mul(r, r)).all()


def test_truncation_drops_overflow_terms(mat3):
    x = mat3.basis_vector(1)
    y = mat3.basis_vector(3)
    N = 2
    a = TruncatedSeries.monomial(mat3, N, N, x)
    b = TruncatedSeries.monomial(mat3, N, 1, y)
    assert series_mul(a, b).is_zero()


def test_mismatches_raise(ch2, ch3):
    a = TruncatedSeries.one(ch2, 2)
    with pytest.raises(CarrierMismatchError):
        series_mul(a, TruncatedSeries.one(ch3, 2))
    with pytest.raises(TruncationMismatchError):
        series_mul(a, TruncatedSeries.one(ch2, 3))


def test_coefficient_outside_slice_rejected(ch2):
    r = ch2.generator("r12")
    with pytest.raises(SeriesError):
        TruncatedSeries.from_coeffs(ch2, [ch2.unit_vector(), ch2.mul(r, r)])


def test_invert_one(ch3):
    one = TruncatedSeries.one(ch3, 3)
    assert (series_invert(one) - one).is_zero()


def test_invert_geometric_series(ch2):
    N = 3
    g = _r12_series(ch2, [1, 1, 0, 0])
    expected = _r12_series(ch2, [1, -1, 1, -1])
    assert (series_invert(g) - expected).is_zero()


def test_invert_requires_unit_constant(ch3):
    with pytest.raises(NotInvertibleError):
        series_invert(TruncatedSeries.zero(ch3, 2))


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 10_000), st.integers(1, 4))
def test_inverse_round_trip_matrix(mat3, seed, N):
    g = random_exact_series(mat3, N, random.Random(seed), unit=True)
    inv = series_invert(g)
    one = TruncatedSeries.one(mat3, N)
    assert (series_mul(g, inv) - one).is_zero()
    assert (series_mul(inv, g) - one).is_zero()
    assert (series_invert(inv) - g).is_zero()


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 10_000))
def test_associativity_and_distributivity_exact(mat3, seed):
    rnd = random.Random(seed)
    a, b, c = (random_exact_series(mat3, 3, rnd, zero_constant=False) for _ in range(3))
    assert (series_mul(series_mul(a, b), c) - series_mul(a, series_mul(b, c))).is_zero()
    assert (series_mul(a, b + c) - (series_mul(a, b) + series_mul(a, c))).is_zero()


def test_associativity_numeric(mat3, rng):
    def rand():
        return TruncatedSeries.from_array(mat3, rng.normal(size=(4, 9)) + 1j * rng.normal(size=(4, 9)))

    a, b, c = rand(), rand(), rand()
    lhs = series_mul(series_mul(a, b), c)
    rhs = series_mul(a, series_mul(b, c))
    assert (lhs - rhs).max_abs() <= 1e-12 * max(1.0, lhs.max_abs())


@settings(max_examples=20, deadline=None)
@given(st.integers(0, 10_000), st.integers(0, 3))
def test_truncation_consistency(ch3, seed, M):
    rnd = random.Random(seed)
    a = random_exact_series(ch3, 3, rnd, unit=True)
    b = random_exact_series(ch3, 3, rnd, unit=True)
    assert (truncate(series_mul(a, b), M) - series_mul(truncate(a, M), truncate(b, M))).is_zero()
    assert (truncate(series_invert(a), M) - series_invert(truncate(a, M))).is_zero()


def test_exp_zero_is_one(ch3):
    assert (exp_primitive(TruncatedSeries.zero(ch3, 3)) - TruncatedSeries.one(ch3, 3)).is_zero()


def test_exp_of_h_r12(ch2):
    x = _r12_series(ch2, [0, 1, 0, 0])
    expected = _r12_series(ch2, [1, 1, Fraction(1, 2), Fraction(1, 6)])
    assert (exp_primitive(x) - expected).is_zero()


def test_exp_requires_zero_constant(ch3):
    with pytest.raises(SeriesError):
        exp_primitive(TruncatedSeries.one(ch3, 3))
    with pytest.raises(NotInvertibleError):
        log_grouplike(TruncatedSeries.zero(ch3, 3))


@settings(max_examples=20, deadline=None)
@given(st.integers(0, 10_000))
def test_log_exp_round_trip(ch3, seed):
    x = random_exact_series(ch3, 3, random.Random(seed))
    assert (log_grouplike(exp_primitive(x)) - x).is_zero()
    g = random_exact_series(ch3, 3, random.Random(seed + 1), unit=True)
    assert (exp_primitive(log_grouplike(g)) - g).is_zero()


def test_unit_is_grouplike(ch3):
    assert is_grouplike(TruncatedSeries.one(ch3, 3))


def test_exp_h_r12_is_grouplike(ch3):
    r = ch3.generator("r12")
    x = TruncatedSeries.monomial(ch3, 3, 1, r)
    g = exp_primitive(x).numeric()
    assert is_grouplike(g, 1e-12)
    assert is_grouplike(exp_primitive(x))


def test_non_grouplike_detected_at_degree_two(ch3):
    r = ch3.generator("r12")
    g = TruncatedSeries(ch3, (ch3.unit_vector(), r, ch3.mul(r, r), zeros(ch3.dim)))
    assert not is_grouplike(g)
    # Delta(r^2) - (1(x)r^2 + r(x)r + r^2(x)1) = r(x)r at degree 2
    assert grouplike_residual(g) == pytest.approx(1.0)


@settings(max_examples=15, deadline=None)
@given(st.integers(0, 10_000))
def test_exp_of_random_primitive_is_grouplike(ch3, seed):
    rnd = random.Random(seed)
    gens = [ch3.generator(g) for g in ("r12", "r13", "r23")]
    coeffs = [zeros(ch3.dim)]
    for _ in range(3):
        coeffs.append(sum((Fraction(rnd.randint(-3, 3)) * g for g in gens), zeros(ch3.dim)))
    assert is_grouplike(exp_primitive(TruncatedSeries(ch3, tuple(coeffs))))


def test_json_round_trip(ch3, rng):
    s = TruncatedSeries.from_array(ch3, rng.normal(size=(4, ch3.dim)) + 1j * rng.normal(size=(4, ch3.dim)))
    back = TruncatedSeries.from_json(ch3, s.to_json())
    assert (back - s).max_abs() == 0.0
    assert isinstance(np.asarray(back.as_array()), np.ndarray)
