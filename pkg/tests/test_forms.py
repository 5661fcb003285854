import math

import numpy as np
import pytest

from formgames.algebra import v_of_a
from formgames.errors import InvalidParameterError, ResourceLimitError
from formgames.forms import (
    accumulation_points,
    cf_diagnostics,
    cf_expand,
    gap_at,
    gap_witness,
    lattice_of_lambda,
    q0,
    q_lambda,
    value_spectrum,
)
from formgames.lattice import Lattice, orbit_min_systole, systole

SQRT2 = math.sqrt(2.0)
PHI = (1.0 + math.sqrt(5.0)) / 2.0


def cf_value(quotients):
    """Evaluate [a0; a1, a2, ...] from the back (test helper)."""
    x = float(quotients[-1])
    for a in reversed(quotients[:-1]):
        x = a + 1.0 / x
    return x


def test_q0_examples():
    assert q0(2.0, 2.0) == 4.0
    for a in (1.0, 4.0, -9.0):
        v = v_of_a(a)
        assert q0(v[0], v[1]) == pytest.approx(a, rel=1e-12)
    for t in (0.7, -1.3):
        assert q0(math.exp(t) * 0.3, math.exp(-t) * 1.7) == pytest.approx(
            q0(0.3, 1.7), rel=1e-12
        )


def test_q_lambda_examples():
    assert q_lambda(1, 1, SQRT2) == pytest.approx(-1.0, abs=1e-12)
    assert q_lambda(0, 0, 3.7) == 0.0
    assert q_lambda(3, 2, SQRT2) == pytest.approx(1.0, abs=1e-12)


def test_lattice_of_lambda_unimodular():
    for lam in (SQRT2, PHI, 5.0):
        x = lattice_of_lambda(lam)
        assert abs(np.linalg.det(x.basis)) == pytest.approx(1.0, abs=1e-12)
    with pytest.raises(InvalidParameterError):
        lattice_of_lambda(-1.0)


def test_lattice_of_lambda_value_dictionary():
    lam = SQRT2
    x = lattice_of_lambda(lam)
    rng = np.random.default_rng(0)
    for _ in range(100):
        p, q = int(rng.integers(-40, 41)), int(rng.integers(-40, 41))
        pt = x.basis @ (p, q)
        assert q0(pt[0], pt[1]) == pytest.approx(
            q_lambda(p, q, lam) / (2 * lam), abs=1e-9
        )


def test_lattice_of_lambda_systole():
    assert systole(lattice_of_lambda(SQRT2)) > 0.3


def test_value_spectrum_z2():
    sp = value_spectrum(Lattice.standard(), 1)
    vals = {round(v, 12) for v, _ in sp}
    assert {-1.0, 0.0, 1.0} <= vals
    assert len(sp) == 8  # all nonzero points in the 3x3 box


def test_value_spectrum_min_abs_is_scaled_pell():
    x = lattice_of_lambda(SQRT2)
    sp = value_spectrum(x, 50)
    m = min(abs(v) for v, _ in sp)
    assert m == pytest.approx(1.0 / (2.0 * SQRT2), abs=1e-9)
    # brute-force oracle directly on the integer form
    brute = min(
        abs(q_lambda(p, q, SQRT2))
        for p in range(-50, 51)
        for q in range(-50, 51)
        if (p, q) != (0, 0)
    )
    assert m == pytest.approx(brute / (2.0 * SQRT2), abs=1e-12)


def test_value_spectrum_symmetry():
    sp = value_spectrum(lattice_of_lambda(PHI), 6)
    from collections import Counter

    counts = Counter(round(v, 9) for v, _ in sp)
    assert all(c % 2 == 0 for c in counts.values())


def test_value_spectrum_guard():
    with pytest.raises(ResourceLimitError):
        value_spectrum(Lattice.standard(), 200000)


def test_scaling_covariance():
    lam = SQRT2
    x = lattice_of_lambda(lam)
    N = 30
    sp = sorted(2 * lam * v for v, _ in value_spectrum(x, N))
    direct = sorted(
        q_lambda(p, q, lam)
        for p in range(-N, N + 1)
        for q in range(-N, N + 1)
        if (p, q) != (0, 0)
    )
    assert np.max(np.abs(np.array(sp) - np.array(direct))) < 1e-9


def test_gap_at_zero_pell():
    x = lattice_of_lambda(SQRT2)
    g, (p, q) = gap_witness(x, 0.0, 100)
    assert g == pytest.approx(1.0 / (2.0 * SQRT2), abs=1e-9)
    assert abs(p * p - 2 * q * q) == 1


def test_gap_at_attained_value_is_zero():
    x = lattice_of_lambda(PHI)
    sp = value_spectrum(x, 5)
    a = sp[len(sp) // 3][0]
    assert gap_at(x, a, 5) == 0.0


def test_gap_zero_for_axis_lattice():
    assert gap_at(Lattice.standard(), 0.0, 5) == 0.0


def test_accumulation_points_golden():
    centers = accumulation_points(np.longdouble(1) / 2 + np.sqrt(np.longdouble(5)) / 2, 10000, 1e-4)
    target = 2.0 * PHI / math.sqrt(5.0)
    assert np.min(np.abs(centers - target)) < 1e-3
    assert np.min(np.abs(centers + target)) < 1e-3


def test_accumulation_points_pell():
    centers = accumulation_points(np.sqrt(np.longdouble(2)), 10000, 1e-4)
    assert np.min(np.abs(centers - 1.0)) < 1e-6
    assert np.min(np.abs(centers + 1.0)) < 1e-6


def test_accumulation_nondiscreteness_signal():
    lo = accumulation_points(math.pi, 1000, 0.01)
    hi = accumulation_points(math.pi, 20000, 0.01)
    assert len(hi) > len(lo)


def test_cf_expand_golden():
    e = cf_expand(PHI, 20)
    assert e.a0 == 1
    assert all(a == 1 for a in e.partial_quotients)
    assert e.depth == 20


def test_cf_expand_sqrt2():
    e = cf_expand(SQRT2, 12)
    assert e.a0 == 1
    assert all(a == 2 for a in e.partial_quotients)


def test_cf_expand_rational_exhausts():
    e = cf_expand(7.0 / 3.0, 10)
    assert e.a0 == 2
    assert e.partial_quotients == (3,)
    assert e.exhausted


def test_cf_convergents_reconstruct():
    for x in (PHI, SQRT2, math.pi):
        e = cf_expand(x, 15)
        for p, q in e.convergents()[1:]:
            assert abs(x - p / q) < 1.0 / (q * q)


def test_cf_diagnostics():
    d = cf_diagnostics(cf_expand(PHI, 20))
    assert d.max_quotient == 1
    assert d.period_guess == 1
    d = cf_diagnostics(cf_expand(SQRT2, 12))
    assert d.max_quotient == 2
    assert d.period_guess == 1
    d = cf_diagnostics(cf_expand(math.pi, 20))
    assert d.period_guess is None


def test_dictionary_positive_and_negative_control():
    # badly approximable lambdas: gap at 0 and bounded orbit simultaneously
    for lam in (SQRT2, PHI):
        x = lattice_of_lambda(lam)
        assert gap_at(x, 0.0, 60) > 0.05
        val, _ = orbit_min_systole(x, 8.0, 0.05)
        assert val > 0.1
    # a huge partial quotient forces a deep systole dip
    lam_bad = cf_value([1, 1, 2500] + [1] * 20)
    e = cf_expand(lam_bad, 20)
    assert max(e.partial_quotients) >= 50
    val, _ = orbit_min_systole(lattice_of_lambda(lam_bad), 25.0, 0.01)
    assert val < 0.05
