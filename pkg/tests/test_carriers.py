import itertools
import json
from fractions import Fraction

import numpy as np
import pytest
import sympy

from holotwo.carriers import (
    CarrierError,
    IdealClosureError,
    NoHopfStructureError,
    adjoint_action,
    build_word_algebra,
    chord_algebra,
    chord_generators,
    four_term_relations,
    load_carrier_spec,
)
from holotwo.linalg import is_zero, zeros
from holotwo.series import TruncatedSeries, exp_primitive, series_invert, series_mul


def _word_index(gens, k):
    return {w: i for i, w in enumerate(itertools.product(gens, repeat=k))}


def _ideal_rank(gens, relations, k):
    """Rank of the degree-k part of the two-sided ideal generated by degree-2 relations."""
    cols = _word_index(gens, k)
    rows = []
    for rel in relations:
        for left in range(k - 1):
            for pre in itertools.product(gens, repeat=left):
                for post in itertools.product(gens, repeat=k - 2 - left):
                    row = [0] * len(cols)
                    for w, c in rel.items():
                        row[cols[pre + tuple(w) + post]] += c
                    rows.append(row)
    return sympy.Matrix(rows).rank() if rows else 0


def test_ch2_is_polynomial(ch2):
    assert ch2.degree_dims() == [1, 1, 1, 1]


@pytest.mark.parametrize("k", [2, 3])
def test_ch3_dimension_matches_rank_oracle(ch3, k):
    gens = chord_generators(3)
    expected = len(gens) ** k - _ideal_rank(gens, four_term_relations(3), k)
    assert ch3.degree_dims()[k] == expected


def test_free_algebra_counts():
    alg = build_word_algebra(["a", "b", "c"], [], 3)
    assert alg.degree_dims() == [1, 3, 9, 27]


def test_dims_stable_across_orderings():
    a = chord_algebra(3, 3, order="deglex")
    b = chord_algebra(3, 3, order="revlex")
    assert a.degree_dims() == b.degree_dims()


def test_four_term_representatives_vanish(ch3):
    for rel in four_term_relations(3):
        assert is_zero(ch3.element(rel))


def test_dimension_monotonicity():
    for n in (3, 4):
        ch = chord_algebra(n, 3).degree_dims()
        plus = chord_algebra(n, 3, plus=True).degree_dims()
        free = [len(chord_generators(n)) ** k for k in range(4)]
        assert all(a <= b <= c for a, b, c in zip(ch, plus, free))


def test_non_ideal_relation_span_is_reported():
    with pytest.raises(IdealClosureError):
        build_word_algebra(["a", "b"], [{("a", "b"): 1}], 3, close_ideal=False)


def test_inhomogeneous_relation_rejected():
    with pytest.raises(CarrierError):
        build_word_algebra(["a", "b"], [{("a", "b"): 1, ("a",): 1}], 3)


def test_unknown_generator_rejected():
    with pytest.raises(CarrierError):
        build_word_algebra(["a"], [{("a", "z"): 1}], 2)


def test_product_associative_on_basis(ch3):
    for i, j, k in itertools.product(range(ch3.dim), repeat=3):
        if ch3.weights[i] + ch3.weights[j] + ch3.weights[k] > 3:
            continue
        x, y, z = (ch3.basis_vector(t) for t in (i, j, k))
        assert is_zero(ch3.mul(ch3.mul(x, y), z) - ch3.mul(x, ch3.mul(y, z)))


def test_coproduct_examples(ch3):
    one = ch3.unit_vector()
    r = ch3.generator("r12")
    assert is_zero(ch3.coproduct(one) - ch3.tensor(one, one))
    assert is_zero(ch3.coproduct(r) - ch3.tensor(r, one) - ch3.tensor(one, r))
    r2 = ch3.mul(r, r)
    expected = ch3.tensor(r2, one) + 2 * ch3.tensor(r, r) + ch3.tensor(one, r2)
    assert is_zero(ch3.coproduct(r2) - expected)


def _tensor_mul(car, s, t):
    n = car.dim
    out = zeros(n * n)
    for a, ca in enumerate(s):
        if ca == 0:
            continue
        for b, cb in enumerate(t):
            if cb == 0:
                continue
            i, j = divmod(a, n)
            k, l = divmod(b, n)
            out = out + ca * cb * car.tensor(car.mul(car.basis_vector(i), car.basis_vector(k)),
                                             car.mul(car.basis_vector(j), car.basis_vector(l)))
    return out


def test_coproduct_is_algebra_map(ch3):
    for i, j in itertools.product(range(ch3.dim), repeat=2):
        if ch3.weights[i] + ch3.weights[j] > 3:
            continue
        x, y = ch3.basis_vector(i), ch3.basis_vector(j)
        lhs = ch3.coproduct(ch3.mul(x, y))
        rhs = _tensor_mul(ch3, ch3.coproduct(x), ch3.coproduct(y))
        assert is_zero(lhs - rhs)


def test_counit_and_antipode_axioms(ch3):
    n = ch3.dim
    for i in range(n):
        delta = ch3.coproduct(ch3.basis_vector(i))
        left, right, conv = zeros(n), zeros(n), zeros(n)
        for idx, c in enumerate(delta):
            if c == 0:
                continue
            a, b = divmod(idx, n)
            left = left + c * ch3.counit[a] * ch3.basis_vector(b)
            right = right + c * ch3.counit[b] * ch3.basis_vector(a)
            conv = conv + c * ch3.mul(ch3.antipode(ch3.basis_vector(a)), ch3.basis_vector(b))
        assert is_zero(left - ch3.basis_vector(i))
        assert is_zero(right - ch3.basis_vector(i))
        assert is_zero(conv - ch3.counit[i] * ch3.unit_vector())
    for i, j in itertools.product(range(n), repeat=2):
        if ch3.weights[i] + ch3.weights[j] <= 3:
            prod = ch3.mul(ch3.basis_vector(i), ch3.basis_vector(j))
            assert ch3.counit_of(prod) == ch3.counit[i] * ch3.counit[j]


def test_matrix_carrier_has_no_hopf(mat3):
    with pytest.raises(NoHopfStructureError):
        mat3.coproduct(mat3.unit_vector())
    with pytest.raises(NoHopfStructureError):
        adjoint_action(mat3, mat3.unit_vector(), mat3.unit_vector())


def test_adjoint_action_examples(ch3):
    one = ch3.unit_vector()
    r12, r13 = ch3.generator("r12"), ch3.generator("r13")
    for i in range(ch3.dim):
        x = ch3.basis_vector(i)
        assert is_zero(adjoint_action(ch3, x, one) - ch3.counit[i] * one)
    assert is_zero(adjoint_action(ch3, r12, r13) - ch3.commutator(r12, r13))


def test_adjoint_action_of_grouplike_series(ch3):
    N = 3
    r12, r13 = ch3.generator("r12"), ch3.generator("r13")
    g = exp_primitive(TruncatedSeries.monomial(ch3, N, 1, r12))
    y = TruncatedSeries(ch3, (r13,) + tuple(zeros(ch3.dim) for _ in range(N)))
    lhs = TruncatedSeries(ch3, tuple(adjoint_action(ch3, c, r13) for c in g.coeffs))
    rhs = series_mul(series_mul(g, y), series_invert(g))
    assert (lhs - rhs).is_zero()


def test_smash_product_formulas(hopf_id):
    _, Hx = hopf_id
    sm = Hx.smash
    I, H, full = sm.I, sm.H, sm.full
    v = I.basis_vector(I.words.index((0,)))
    x = H.basis_vector(H.words.index((0,)))
    y = H.basis_vector(H.words.index((1,))) if (1,) in H.words else x
    one_H = H.unit_vector()
    # (v (x) 1)(v (x) 1) = v v (x) 1
    assert is_zero(full.mul(sm.include_I(v), sm.include_I(v)) - sm.tensor(I.mul(v, v), one_H))
    # (1 (x) x)(v (x) 1) = (x |> v) (x) 1 + v (x) x
    lhs = full.mul(sm.include_H(x), sm.include_I(v))
    rhs = sm.tensor(Hx.act(x, v), one_H) + sm.tensor(v, x)
    assert is_zero(lhs - rhs)
    # (v (x) x)(1 (x) y) = v (x) xy
    assert is_zero(full.mul(sm.tensor(v, x), sm.include_H(y)) - sm.tensor(v, H.mul(x, y)))


def test_smash_product_associative(hopf_id):
    _, Hx = hopf_id
    full = Hx.smash.full
    for i, j, k in itertools.product(range(full.dim), repeat=3):
        if full.weights[i] + full.weights[j] + full.weights[k] > full.max_weight:
            continue
        a, b, c = (full.basis_vector(t) for t in (i, j, k))
        assert is_zero(full.mul(full.mul(a, b), c) - full.mul(a, full.mul(b, c)))


def test_smash_inclusion_of_H_is_algebra_map(hopf_id):
    _, Hx = hopf_id
    sm = Hx.smash
    H = sm.H
    for i, j in itertools.product(range(H.dim), repeat=2):
        if H.weights[i] + H.weights[j] > sm.full.max_weight:
            continue
        x, y = H.basis_vector(i), H.basis_vector(j)
        assert is_zero(sm.full.mul(sm.include_H(x), sm.include_H(y)) - sm.include_H(H.mul(x, y)))


def test_load_carrier_spec(tmp_path):
    spec = {"kind": "words", "generators": ["a", "b"], "max_degree": 3,
            "relations": [[[1, ["a", "b"]], [-1, ["b", "a"]]]]}
    path = tmp_path / "spec.json"
    path.write_text(json.dumps(spec))
    alg = load_carrier_spec(path)
    assert alg.degree_dims() == [1, 2, 3, 4]
    chord = load_carrier_spec({"kind": "chord", "n": 3, "max_degree": 3})
    assert chord.degree_dims() == chord_algebra(3, 3).degree_dims()


def test_malformed_spec_relation_rejected():
    with pytest.raises(CarrierError):
        load_carrier_spec({"generators": ["a"], "max_degree": 2, "relations": [{"a*a": 1}]})
    with pytest.raises(CarrierError):
        load_carrier_spec({"kind": "nope", "max_degree": 2})
