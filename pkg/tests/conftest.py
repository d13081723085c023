import random
from fractions import Fraction

import numpy as np
import pytest

from holotwo.carriers import chord_algebra, matrix_carrier
from holotwo.linalg import zeros
from holotwo.series import TruncatedSeries
from holotwo.xmod import build_hom_complex, enveloping_xmod, lie_of

COMPLEXES = {
    "C->C": {"dims": [1, 1], "boundaries": [[[1]]]},
    "C2->C": {"dims": [1, 2], "boundaries": [[[1, 0]]]},
    "C->C2->C": {"dims": [1, 2, 1], "boundaries": [[[0, 1]], [[1], [0]]]},
}


def random_exact_series(car, N, rng: random.Random, unit=False, zero_constant=True, skip=()):
    """Integer-coefficient series; constant term is the unit, zero, or random."""
    coeffs = []
    for k in range(N + 1):
        v = zeros(car.dim)
        if k == 0 and unit:
            v = car.unit_vector()
        elif k > 0 or not zero_constant:
            for i in range(car.dim):
                if i not in skip and car.in_slice(car.basis_vector(i), k):
                    v[i] = Fraction(rng.randint(-3, 3))
        coeffs.append(v)
    return TruncatedSeries(car, tuple(coeffs))


@pytest.fixture(scope="session")
def ch2():
    return chord_algebra(2, 3)


@pytest.fixture(scope="session")
def ch3():
    return chord_algebra(3, 3)


@pytest.fixture(scope="session")
def mat3():
    return matrix_carrier(3)


@pytest.fixture(scope="session")
def hom_complexes():
    return {name: build_hom_complex(V) for name, V in COMPLEXES.items()}


@pytest.fixture(scope="session")
def hopf_id():
    """U(Lie(HOM(C->C))) truncated at N = 3."""
    hc = build_hom_complex(COMPLEXES["C->C"])
    return hc, enveloping_xmod(lie_of(hc.xmod), 3)


@pytest.fixture(scope="session")
def hopf_21():
    hc = build_hom_complex(COMPLEXES["C2->C"])
    return hc, enveloping_xmod(lie_of(hc.xmod), 3)


@pytest.fixture(scope="session")
def rng():
    return np.random.default_rng(20261016)


def sample_configurations(rng, n, count, min_dist=0.1, scale=1.5):
    """Random points of the configuration space C(n) at least ``min_dist`` from every diagonal."""
    out = []
    while len(out) < count:
        z = scale * (rng.normal(size=n) + 1j * rng.normal(size=n))
        if min(abs(z[a] - z[b]) for a in range(n) for b in range(a + 1, n)) >= min_dist:
            out.append(z)
    return out


def random_tangent(rng, n):
    return rng.normal(size=n) + 1j * rng.normal(size=n)


@pytest.fixture(scope="session")
def kz3():
    from holotwo.instances import kz_connection

    return kz_connection(3, 3)


@pytest.fixture(scope="session")
def kz3_two():
    from holotwo.instances import kz_two_connection

    return kz_two_connection(3, 3)
