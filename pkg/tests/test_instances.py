import itertools
from fractions import Fraction

import numpy as np
import pytest

from conftest import random_tangent, sample_configurations
from holotwo.geometry import GeometryError, braid_generator, check_fake_curvature, curvature_at
from holotwo.holonomy import QuadratureConfig, holonomy_P
from holotwo.instances import (
    STANDARD_COMPLEXES,
    InstanceError,
    _module_to_I,
    chain_complex,
    chain_two_connection,
    kz_braid,
    kz_connection,
    kz_homotopic_pair,
    kz_two_connection,
    planar_square,
)
from holotwo.linalg import to_complex
from holotwo.series import series_mul
from holotwo.xmod import XModError


def test_kz_generators_and_base_point():
    kz = kz_connection(3, 2)
    assert kz.carrier.degree_dims()[1] == 3
    r = kz.generator(1, 3)
    assert np.count_nonzero(r) == 1 and kz.carrier.weights[int(np.flatnonzero(r)[0])] == 1
    p = kz.base_point()
    assert len({complex(z) for z in p}) == 3


def test_kz_connection_values():
    kz = kz_connection(3, 2)
    p = np.array([0.0, 1.0, 3.0j])
    X = np.array([1.0, 0.0, 0.0])
    # omega_12(X) = 1 / (0 - 1), omega_13(X) = 1 / (0 - 3i), omega_23(X) = 0
    expected = -kz.generator(1, 2) + (1 / (-3j)) * kz.generator(1, 3)
    assert np.allclose(kz.omega(p, X), expected)


def test_kz_four_strands_flat():
    kz = kz_connection(4, 2)
    rng = np.random.default_rng(21)
    for p in sample_configurations(rng, 4, 8):
        F = curvature_at(kz.omega, kz.carrier, p, random_tangent(rng, 4), random_tangent(rng, 4), 2)
        assert np.max(np.abs(F)) <= 1e-8


def test_generator_boundaries_in_enveloping_algebra(kz3_two):
    Hx = kz3_two.connection.xmod
    H = Hx.H
    r = {ab: H.generator(f"r{ab[0]}{ab[1]}") for ab in itertools.combinations((1, 2, 3), 2)}

    def comm(x, y):
        return H.mul(x, y) - H.mul(y, x)

    P = _module_to_I(Hx, kz3_two.chord.e_vector("P123"))
    Q = _module_to_I(Hx, kz3_two.chord.e_vector("Q123"))
    dP = Hx.boundary_numeric @ P
    dQ = Hx.boundary_numeric @ Q
    assert np.allclose(dP, to_complex(comm(r[(2, 3)], r[(1, 2)] + r[(1, 3)])))
    assert np.allclose(dQ, to_complex(comm(r[(1, 2)], r[(1, 3)] + r[(2, 3)])))
    assert np.max(np.abs(dP)) > 0 and np.max(np.abs(dQ)) > 0


def test_kz_two_form_is_minus_half_b(kz3_two):
    rng = np.random.default_rng(22)
    p = sample_configurations(rng, 3, 1)[0]
    X, Y = random_tangent(rng, 3), random_tangent(rng, 3)
    conn = kz3_two.connection
    assert np.allclose(conn.m2(p, X, Y), -0.5 * kz3_two.B(p, X, Y))
    assert np.max(np.abs(conn.m1(p, X, Y))) == 0.0


def test_kz_two_connection_needs_three_strands():
    with pytest.raises(XModError):
        kz_two_connection(2, 2)


def test_kz_instance_errors():
    with pytest.raises(InstanceError):
        kz_connection(1, 2)
    with pytest.raises(InstanceError):
        kz_braid(3, [])
    with pytest.raises(GeometryError):
        kz_braid(3, [3])


def test_braid_word_permutes_strands():
    z = kz_braid(3, [1, 2]).start
    end = kz_braid(3, [1, 2]).end
    # sigma1 then sigma2 sends the strand at position 1 to position 3
    assert np.allclose(end, [z[1], z[2], z[0]])


def test_braid_word_holonomy_factorizes(kz3):
    cfg = QuadratureConfig(ode_steps=512)
    w = kz_braid(3, [1, -2])
    s1 = kz_braid(3, [1])
    s2inv = braid_generator(3, 2, inverse=True, base=s1.end)
    P = lambda g: holonomy_P(kz3.omega, kz3.carrier, g, 3, config=cfg).value
    assert (P(w) - series_mul(P(s2inv), P(s1))).max_abs() <= 1e-7


def test_homotopic_pair_shares_boundary():
    a, b = kz_homotopic_pair(3)
    for G in (a, b):
        assert G.check_endpoints() <= 1e-12
    t = np.linspace(0, 1, 7)
    assert np.allclose(a.source(t), b.source(t))
    assert np.allclose(a.target(t), b.target(t))


@pytest.mark.parametrize("name", list(STANDARD_COMPLEXES))
def test_chain_certificates_vanish(name):
    for seed in range(4):
        inst = chain_two_connection(name, seed=seed)
        assert inst.certificate and all(v == 0 for v in inst.certificate.values())


def test_chain_fake_curvature_numerically():
    for name in STANDARD_COMPLEXES:
        conn = chain_two_connection(name, seed=5, degree=2).connection
        pts = [np.array(q) for q in np.random.default_rng(23).normal(size=(4, 2))]
        assert check_fake_curvature(conn, pts).max_residual <= 1e-7


def test_chain_zero_instance():
    inst = chain_two_connection("C->C2->C", zero=True)
    c = inst.connection
    p, X, Y = np.array([0.3, -0.2]), np.array([1.0, 0.5]), np.array([-0.2, 1.0])
    assert np.max(np.abs(c.omega(p, X))) == 0.0
    assert np.max(np.abs(c.m1(p, X, Y))) == 0.0 and np.max(np.abs(c.m2(p, X, Y))) == 0.0


def test_chain_forms_are_area_multiples():
    c = chain_two_connection("C->C", seed=2).connection
    p = np.array([0.1, 0.7])
    e0, e1 = np.array([1.0, 0.0]), np.array([0.0, 1.0])
    X, Y = np.array([2.0, 1.0]), np.array([0.5, 3.0])
    area = 2.0 * 3.0 - 1.0 * 0.5
    for m in (c.m1, c.m2):
        assert np.allclose(m(p, X, Y), area * m(p, e0, e1))
        assert np.allclose(m(p, X, X), 0.0)


def test_chain_lift_is_fake_flat():
    inst = chain_two_connection("C2->C", seed=4)
    lifted = inst.lift(2)
    pts = [np.array([0.2, 0.1]), np.array([-0.4, 0.6])]
    assert check_fake_curvature(lifted.connection, pts).max_residual <= 1e-7
    H = lifted.hopf.H
    p, X = pts[0], np.array([0.3, -1.1])
    lifted_val = lifted.connection.omega(p, X)
    base_val = inst.connection.omega(p, X)
    for j, c in enumerate(base_val):
        assert lifted_val[H.words.index((j,))] == pytest.approx(c)


def test_chain_complex_lookup():
    assert chain_complex("C->C2->C").dims == (1, 2, 1)
    with pytest.raises(InstanceError):
        chain_complex("C->C->C->C")
    seeded = chain_two_connection("C->C", seed=7, scale=Fraction(1, 3))
    again = chain_two_connection("C->C", seed=7, scale=Fraction(1, 3))
    assert seeded.f1 == again.f1 and seeded.g2 == again.g2


def test_planar_square_endpoints():
    G = planar_square(start=(1.0, 2.0), scale=0.5)
    assert np.allclose(G.source.start, [1.0, 2.0])
    assert np.allclose(G.source.end, [1.5, 2.0])
    assert G.check_endpoints() <= 1e-12
    assert np.max(np.abs(G(0.5, 0.0) - G(0.5, 1.0))) > 0.1
