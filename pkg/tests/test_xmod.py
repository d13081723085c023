import itertools
import random
from fractions import Fraction

import numpy as np
import pytest

from conftest import COMPLEXES
from holotwo.carriers import Carrier, matrix_carrier
from holotwo.linalg import is_zero, zeros
from holotwo.xmod import (
    ChainComplex,
    NotAChainComplexError,
    XModError,
    build_ba,
    build_bare_xmod,
    build_hom_complex,
    check_bare_xmod_axioms,
    check_diff_xmod_axioms,
    check_hopf_xmod_axioms,
    lie_of,
    peiffer_pairing,
    prim_of,
    reflect,
)


@pytest.fixture(scope="module")
def ba_id(hopf_id):
    return build_ba(hopf_id[1])


def _abelian_scalar_xmod():
    A = Carrier(name="A", labels=("a0", "a1"), weights=(0, 0), table={})
    B = matrix_carrier(1, name="C")
    return build_bare_xmod(
        A, B, lambda a: zeros(1), lambda b, a: b[0] * a, lambda a, b: b[0] * a, name="abelian"
    )


@pytest.mark.parametrize("name", list(COMPLEXES))
def test_hom_complex_passes_all_axioms(hom_complexes, name):
    rep = check_bare_xmod_axioms(hom_complexes[name].xmod)
    assert rep.passed, rep.failed()
    for key in ("fully interchangeable", "second Peiffer (left)", "first Peiffer (left)", "Peiffer exchange"):
        assert rep.checks[key].checked > 0


def test_abelian_with_trivial_structure_passes():
    rep = check_bare_xmod_axioms(_abelian_scalar_xmod())
    assert rep.passed, rep.failed()


def test_hom_identity_complex_spelled_out(hom_complexes):
    hc = hom_complexes["C->C"]
    X = hc.xmod
    assert (X.A.dim, X.B.dim) == (1, 1)
    s = X.A.basis_vector(0)
    S = hc.gl1_matrix(s)
    c = next(x for x in S.ravel() if x != 0)
    ident = np.identity(2, dtype=object) * c
    # d(s) is the chain map (c, c) and s*t = s o d(t)
    assert is_zero((hc.gl0_matrix(X.d(s)) - ident).ravel())
    assert is_zero((hc.gl1_matrix(X.A.mul(s, s)) - c * S).ravel())


def test_hom_zero_differential():
    hc = build_hom_complex({"dims": [1, 1], "boundaries": [[[0]]]})
    X = hc.xmod
    assert all(x == 0 for x in X.boundary.ravel())
    for i, j in itertools.product(range(X.A.dim), repeat=2):
        assert is_zero(X.A.mul(X.A.basis_vector(i), X.A.basis_vector(j)))
    assert check_bare_xmod_axioms(X).passed


def test_hom_rejects_non_complex():
    with pytest.raises(NotAChainComplexError):
        build_hom_complex({"dims": [1, 1, 1], "boundaries": [[[1]], [[1]]]})
    with pytest.raises(XModError):
        ChainComplex.from_json({"dims": [1, 2], "boundaries": [[[1]]]})


def test_graded_leibniz_for_degree_one_maps(hom_complexes):
    V = hom_complexes["C->C2->C"].V
    rnd = random.Random(5)
    n1 = len(V.positions(1))
    for _ in range(10):
        s = V.to_matrix(1, np.array([Fraction(rnd.randint(-4, 4)) for _ in range(n1)], dtype=object))
        t = V.to_matrix(1, np.array([Fraction(rnd.randint(-4, 4)) for _ in range(n1)], dtype=object))
        lhs = V.graded_commutator(2, s.dot(t))
        rhs = V.graded_commutator(1, s).dot(t) - s.dot(V.graded_commutator(1, t))
        assert is_zero((lhs - rhs).ravel())


def test_reflect_of_crossed_is_identity(hom_complexes):
    X = hom_complexes["C->C2->C"].xmod
    Y = reflect(X)
    assert Y.quotient_dims() == X.quotient_dims()


def test_ba_pre_fails_second_peiffer_and_reflection_fixes_it(ba_id):
    pre_rep = check_bare_xmod_axioms(ba_id.pre)
    assert not pre_rep.outcome("second Peiffer (left)").passed
    crossed_rep = check_bare_xmod_axioms(ba_id.crossed)
    assert crossed_rep.passed, crossed_rep.failed()
    assert crossed_rep.outcome("Peiffer exchange").passed


def test_reflection_shrinks_degree_two(ba_id):
    assert ba_id.crossed.quotient_dims()[2] < ba_id.pre.quotient_dims()[2]


def test_reflection_idempotent(ba_id):
    again = reflect(ba_id.crossed)
    assert again.quotient_dims() == ba_id.crossed.quotient_dims()


def test_peiffer_brackets_are_killed_by_boundary(ba_id):
    X = ba_id.pre
    A = X.A
    for i, j in itertools.product(range(A.dim), repeat=2):
        if X.fits(A.weights[i], A.weights[j]):
            assert is_zero(X.d(X.peiffer_bracket(A.basis_vector(i), A.basis_vector(j))))


def test_ba_boundary_and_left_action(hopf_id, ba_id):
    Hx = hopf_id[1]
    sm = ba_id.smash
    X = ba_id.pre
    one = Hx.H.unit_vector()
    x = Hx.H.basis_vector(Hx.H.words.index((0,)))
    for i in range(Hx.I.dim):
        if Hx.I.counit[i] != 0 or Hx.I.weights[i] > 2:
            continue
        v = Hx.I.basis_vector(i)
        a = sm.to_augmented(sm.tensor(v, one))
        assert is_zero(X.d(a) - Hx.d(v))
        expected = sm.to_augmented(sm.tensor(Hx.act(x, v), one) + sm.tensor(v, x))
        assert is_zero(X.act_left(x, a) - expected)


def test_ba_first_peiffer(ba_id):
    rep = check_bare_xmod_axioms(ba_id.pre)
    assert rep.outcome("first Peiffer (left)").passed
    assert rep.outcome("first Peiffer (right)").passed


def test_lie_of_abelian_is_trivial():
    D = lie_of(_abelian_scalar_xmod())
    assert not D.action
    for i, j in itertools.product(range(D.e.dim), repeat=2):
        assert is_zero(D.e.bracket(D.e.basis_vector(i), D.e.basis_vector(j)))


@pytest.mark.parametrize("name", list(COMPLEXES))
def test_lie_of_hom_axioms(hom_complexes, name):
    rep = check_diff_xmod_axioms(lie_of(hom_complexes[name].xmod))
    assert rep.passed, rep.failed()


def test_lie_of_hom_matrix_oracle(hom_complexes):
    hc = hom_complexes["C->C2->C"]
    X, V = hc.xmod, hc.V
    D = lie_of(X)
    for i, j in itertools.product(range(X.A.dim), repeat=2):
        s, t = X.A.basis_vector(i), X.A.basis_vector(j)
        S, T = hc.gl1_matrix(s), hc.gl1_matrix(t)
        dS, dT = V.graded_commutator(1, S), V.graded_commutator(1, T)
        bracket = hc.gl1_class(S.dot(dT) - T.dot(dS))
        action = hc.gl1_class(dS.dot(T) - T.dot(dS))
        assert is_zero(D.e.bracket(s, t) - bracket)
        assert is_zero(D.act(D.d(s), t) - action)
        assert is_zero(action - bracket)


def test_enveloping_boundary_and_derivation(hopf_21):
    hc, Hx = hopf_21
    D = Hx.meta["diff"]
    I, H = Hx.I, Hx.H
    e_in_I = Hx.meta["e_in_I"]
    for j in range(D.e.dim):
        dj = D.d(D.e.basis_vector(j))
        expected = zeros(H.dim)
        for i, c in enumerate(dj):
            expected[H.words.index((i,))] += c
        assert is_zero(Hx.d(e_in_I[j]) - expected)
    for b in range(D.g.dim):
        x = H.basis_vector(H.words.index((b,)))
        for j, k in itertools.product(range(D.e.dim), repeat=2):
            v1, v2 = e_in_I[j], e_in_I[k]
            lhs = Hx.act(x, I.mul(v1, v2))
            rhs = I.mul(Hx.act(x, v1), v2) + I.mul(v1, Hx.act(x, v2))
            assert is_zero(lhs - rhs)


@pytest.mark.parametrize("fixture", ["hopf_id", "hopf_21"])
def test_enveloping_hopf_axioms(request, fixture):
    _, Hx = request.getfixturevalue(fixture)
    rep = check_hopf_xmod_axioms(Hx)
    assert rep.passed, rep.failed()
    assert rep.outcome("second Peiffer").passed


def test_prim_degree_one_slice_and_axioms(hopf_21):
    _, Hx = hopf_21
    D = Hx.meta["diff"]
    P = prim_of(Hx)
    assert sum(1 for w in P.g.weights if w == 1) == D.g.dim
    assert sum(1 for w in P.e.weights if w == 1) == D.e.dim
    assert check_diff_xmod_axioms(P).passed


def test_peiffer_pairing_vanishes_on_primitives(hopf_21):
    _, Hx = hopf_21
    prims = Hx.I.primitive_basis()
    for u, v in itertools.product(prims, repeat=2):
        wu = max(Hx.I.weights[i] for i, c in enumerate(u) if c != 0)
        wv = max(Hx.I.weights[i] for i, c in enumerate(v) if c != 0)
        if wu + wv <= Hx.N:
            assert is_zero(peiffer_pairing(Hx, u, v))


def test_square_of_generator_not_primitive(ch2):
    r = ch2.generator("r12")
    assert ch2.is_primitive(r)
    assert not ch2.is_primitive(ch2.mul(r, r))


def test_axiom_report_json(hom_complexes):
    data = check_bare_xmod_axioms(hom_complexes["C->C"].xmod).to_json()
    assert data["passed"] is True
