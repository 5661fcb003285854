import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from formgames.algebra import HHAT, one_param
from formgames.errors import InvalidLatticeError, ResourceLimitError
from formgames.lattice import (
    FAR,
    Lattice,
    contains_primitive,
    dist_X,
    enumerate_vectors,
    orbit_min_systole,
    reduce,
    systole,
)


def random_unimodular(rng, spread=1.5):
    """Product of bounded one-parameter elements: exactly unimodular."""
    g = (
        one_param("diagonal", rng.uniform(-spread, spread))
        @ one_param("upper", rng.uniform(-2, 2))
        @ one_param("lower", rng.uniform(-2, 2))
    )
    return g


def brute_force_systole(x: Lattice) -> float:
    """Independent oracle: naive double loop with dual-norm box bounds."""
    b = x.basis
    r = min(math.hypot(*b[:, 0]), math.hypot(*b[:, 1]))  # valid upper bound
    binv = np.linalg.inv(b)
    m_max = int(math.ceil(r * np.linalg.norm(binv[0]))) + 1
    n_max = int(math.ceil(r * np.linalg.norm(binv[1]))) + 1
    best = math.inf
    for m in range(-m_max, m_max + 1):
        for n in range(-n_max, n_max + 1):
            if m == 0 and n == 0:
                continue
            v = b @ (m, n)
            best = min(best, math.hypot(v[0], v[1]))
    return best


def test_reduce_identity():
    x = Lattice.standard()
    assert np.allclose(reduce(x).basis, np.eye(2))


def test_reduce_shear_example():
    # columns (1,0),(5,1): same lattice as Z^2, shortest vector length 1
    x = Lattice([[1.0, 5.0], [0.0, 1.0]])
    red = reduce(x)
    assert systole(x) == pytest.approx(1.0, abs=1e-12)
    assert np.allclose(np.abs(np.linalg.det(red.basis)), 1.0)
    assert systole(x) == pytest.approx(brute_force_systole(x), abs=1e-12)


def test_reduce_flowed_lattice():
    x = Lattice.standard().flowed(3.0)
    assert systole(x) == pytest.approx(math.exp(-3.0), rel=1e-12)
    assert systole(x) == pytest.approx(brute_force_systole(x), rel=1e-12)


def test_reduce_rejects_degenerate():
    with pytest.raises(InvalidLatticeError):
        Lattice([[1.0, 1.0], [1.0, 1.0]])


def test_reduced_invariants_hold():
    rng = np.random.default_rng(0)
    for _ in range(200):
        x = Lattice.standard().transformed(random_unimodular(rng))
        b = reduce(x).basis
        n1 = b[0, 0] ** 2 + b[1, 0] ** 2
        n2 = b[0, 1] ** 2 + b[1, 1] ** 2
        inner = abs(b[0, 0] * b[0, 1] + b[1, 0] * b[1, 1])
        assert n1 <= n2 + 1e-12
        assert inner <= 0.5 * n1 + 1e-12


def test_systole_oracle_equivalence():
    rng = np.random.default_rng(1)
    for _ in range(200):
        x = Lattice.standard().transformed(random_unimodular(rng))
        assert systole(x) == pytest.approx(brute_force_systole(x), abs=1e-9)


def test_systole_invariant_under_integer_basis_change():
    rng = np.random.default_rng(2)
    gammas = [
        np.array([[1, 1], [0, 1]]),
        np.array([[1, 0], [1, 1]]),
        np.array([[0, -1], [1, 0]]),
        np.array([[2, 1], [1, 1]]),
    ]
    for _ in range(50):
        x = Lattice.standard().transformed(random_unimodular(rng))
        s0 = systole(x)
        for g in gammas:
            y = Lattice(x.basis @ g)
            assert abs(systole(y) - s0) < 1e-12


def test_enumerate_z2():
    x = Lattice.standard()
    vs = enumerate_vectors(x, 1.0)
    assert sorted(v.coords for v in vs) == [(-1, 0), (0, -1), (0, 1), (1, 0)]
    vs = enumerate_vectors(x, 1.5)
    assert len(vs) == 8


def test_enumerate_flowed():
    x = Lattice.standard().flowed(1.0)
    vs = enumerate_vectors(x, 0.5)
    assert sorted(v.coords for v in vs) == [(0, -1), (0, 1)]
    assert vs[0].norm == pytest.approx(math.exp(-1.0))


def test_enumerate_guard():
    with pytest.raises(ResourceLimitError):
        enumerate_vectors(Lattice.standard(), 2e4)


def test_enumerate_against_naive_oracle():
    rng = np.random.default_rng(3)
    for _ in range(50):
        x = Lattice.standard().transformed(random_unimodular(rng, spread=1.0))
        r = 1.8
        got = {v.coords for v in enumerate_vectors(x, r)}
        # naive double loop over a generous box
        binv = np.linalg.inv(x.basis)
        m_max = int(math.ceil(r * np.linalg.norm(binv[0]))) + 2
        n_max = int(math.ceil(r * np.linalg.norm(binv[1]))) + 2
        want = set()
        for m in range(-m_max, m_max + 1):
            for n in range(-n_max, n_max + 1):
                if (m, n) == (0, 0):
                    continue
                v = x.basis @ (m, n)
                if math.hypot(v[0], v[1]) <= r:
                    want.add((m, n))
        assert got == want


def test_orbit_min_systole_z2():
    val, arg = orbit_min_systole(Lattice.standard(), 5.0, 0.5)
    assert arg == pytest.approx(5.0)
    assert val == pytest.approx(math.exp(-5.0), rel=1e-9)


def test_orbit_min_systole_axis_vector_decays():
    # a lattice containing (0, 1): the flow contracts it without bound
    x = Lattice.standard()
    val, _ = orbit_min_systole(x, 12.0, 0.25)
    assert val < 1e-4


def test_contains_primitive():
    x = Lattice.standard()
    assert contains_primitive(x, (1.0, 0.0), 1e-9)
    assert not contains_primitive(x, (2.0, 0.0), 1e-9)
    assert not contains_primitive(x, (0.5, 0.5), 1e-9)


def test_dist_X_zero_on_equal():
    x = Lattice.standard()
    y = Lattice([[1.0, 7.0], [0.0, 1.0]])  # same lattice, different basis
    assert dist_X(x, x) == 0.0
    assert dist_X(x, y) < 1e-12


def test_dist_X_small_flow():
    x = Lattice.standard()
    y = x.flowed(0.01)
    assert dist_X(x, y) == pytest.approx(0.01 * HHAT.norm(), abs=1e-6)


def test_dist_X_far_sentinel():
    x = Lattice.standard()
    y = x.flowed(3.0)
    assert dist_X(x, y) == FAR


def test_dist_X_symmetry():
    rng = np.random.default_rng(4)
    for _ in range(100):
        x = Lattice.standard().transformed(random_unimodular(rng, spread=0.8))
        g = random_unimodular(rng, spread=0.05)
        y = x.transformed(g)
        dxy, dyx = dist_X(x, y), dist_X(y, x)
        if dxy is not FAR:
            assert dxy == pytest.approx(dyx, abs=1e-9)


def test_dist_X_triangle_inequality_nearby():
    rng = np.random.default_rng(5)
    bad = 0
    for _ in range(1000):
        x = Lattice.standard().transformed(random_unimodular(rng, spread=0.6))
        y = x.transformed(random_unimodular(rng, spread=0.03))
        z = y.transformed(random_unimodular(rng, spread=0.03))
        dxz, dxy, dyz = dist_X(x, z), dist_X(x, y), dist_X(y, z)
        if math.isinf(dxz) or math.isinf(dxy) or math.isinf(dyz):
            continue
        if dxz > dxy + dyz + 1e-6:
            bad += 1
    assert bad == 0


def test_flow_lipschitz_bound():
    # dist(g_t x, g_t y) <= 2 dist(x, y) for 0 <= t <= tau with e^{2 tau} <= 2
    rng = np.random.default_rng(6)
    tau = 0.5 * math.log(2.0)
    for _ in range(1000):
        x = Lattice.standard().transformed(random_unimodular(rng, spread=0.5))
        y = x.transformed(random_unimodular(rng, spread=0.02))
        t = rng.uniform(0.0, tau)
        d0 = dist_X(x, y)
        d1 = dist_X(x.flowed(t), y.flowed(t))
        if math.isinf(d0) or math.isinf(d1):
            continue
        assert d1 <= 2.0 * d0 + 1e-9


@given(t=st.floats(-1.0, 1.0, allow_nan=False))
@settings(max_examples=40, deadline=None)
def test_systole_of_flow_is_exponential(t):
    x = Lattice.standard().flowed(t)
    assert systole(x) == pytest.approx(math.exp(-abs(t)), rel=1e-9)
