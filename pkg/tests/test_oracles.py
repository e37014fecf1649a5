import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from cubic_lab.char_core import enumerate_cubic_primitive, primitive_characters
from cubic_lab.oracles import (
    CostGuardError,
    RangeError,
    cubic_family_sieve_check,
    d_k,
    family_character_sum,
    g_coefficients,
    is_cube_pair,
    large_sieve_ratio,
    prime_tuple_cube_sum,
    rough_cube_divisor_sum,
    smooth_cube_divisor_sum,
)
from cubic_lab.random_model import x_moment_vs_divisor_sum


def icbrt_cube(v: int) -> bool:
    r = round(v ** (1 / 3))
    return any((r + d) ** 3 == v for d in (-1, 0, 1))


def test_d_k_examples():
    assert d_k(6, 2) == 4 and d_k(1, 9) == 1 and d_k(4, 3) == 6


@given(st.integers(1, 400), st.integers(1, 4))
def test_d_k_counts_tuples(n, k):
    def count(n, k):
        if k == 1:
            return 1
        return sum(count(n // d, k - 1) for d in range(1, n + 1) if n % d == 0)

    assert d_k(n, k) == count(n, k)


def test_cube_pair_examples():
    assert is_cube_pair(2, 2) and not is_cube_pair(2, 3)


def test_cube_pair_exhaustive():
    for n in range(1, 201):
        for m in range(1, 201):
            assert is_cube_pair(n, m) == icbrt_cube(n * m * m)


def _naive_rough(k, y, N):
    rough = [n for n in range(2, N + 1) if min(p for p in range(2, n + 1) if n % p == 0) > y]
    arr = np.array(rough, dtype=np.int64)
    dk = np.array([d_k(int(n), k) for n in arr], dtype=float)
    total = 0.0
    for n, dn in zip(arr, dk):
        v = n * arr * arr
        r = np.rint(np.cbrt(v.astype(float))).astype(np.int64)
        cube = (r**3 == v) | ((r + 1) ** 3 == v) | ((r - 1) ** 3 == v)
        total += dn * float(np.sum(dk[cube] / arr[cube])) / n
    return total


def test_rough_sum_empty():
    assert rough_cube_divisor_sum(2, 100, 50) == 0


def test_rough_sum_matches_naive():
    assert rough_cube_divisor_sum(2, 5, 10**4) == pytest.approx(_naive_rough(2, 5, 10**4), rel=1e-12)


def test_rough_sum_monotone():
    vals = [rough_cube_divisor_sum(3, 7, N) for N in (100, 1000, 10**4)]
    assert vals == sorted(vals)


def test_rough_constant_sweep():
    for k in (2, 3):
        for y in (11, 31):
            c = rough_cube_divisor_sum(k, y, 10**5) ** (1 / k) * y * math.log(y) / k
            assert c <= 50


def test_smooth_sum_two_factor():
    w = [complex(math.cos(2 * math.pi * a / 3), math.sin(2 * math.pi * a / 3)) for a in range(3)]
    want = math.prod(sum(abs(1 - z / p) ** -4 for z in w) / 3 for p in (2, 3))
    assert smooth_cube_divisor_sum(2, 0.0, 3) == pytest.approx(want, rel=1e-14)


def test_smooth_sum_equals_divisor_identity():
    rep = x_moment_vs_divisor_sum(2, 1.0, None, 7)
    assert smooth_cube_divisor_sum(2, 0.0, 7) == pytest.approx(rep["lhs"], rel=1e-8)


def test_smooth_sum_growth():
    for k in (8, 16, 32):
        v = smooth_cube_divisor_sum(k, 1 / math.log(k), 10**4)
        assert math.log(v) / (k * math.log(math.log(k))) <= 20


def test_smooth_sum_warns_outside_range():
    with pytest.warns(UserWarning):
        smooth_cube_divisor_sum(4, 0.9, 50)


def test_g_examples():
    g = g_coefficients(2, 3, 2, 0.0)
    assert (g.values[4], g.values[6], g.values[9]) == (1, 2, 1)
    g1 = g_coefficients(3, 9, 1, 0.25)
    n = np.arange(3, 10)
    assert np.allclose(g1.values[3:10], np.exp(2j * np.pi * n * 0.25))


def test_g_range_guard():
    with pytest.raises(RangeError):
        g_coefficients(2, 1000, 4, 0.1)


@settings(max_examples=20, deadline=None)
@given(st.integers(2, 6), st.integers(1, 8), st.integers(1, 4), st.floats(0, 1))
def test_g_bound(N1, width, k, alpha):
    N2 = N1 + width
    if N2**k > 10**6:
        k = 2
    assert g_coefficients(N1, N2, k, alpha).bound_violations() == []


def test_prime_tuple():
    rep = prime_tuple_cube_sum(1, 5, 50)
    direct = sum(1 / p**2 for p in (7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47))
    assert rep["value"] == pytest.approx(direct, rel=1e-14)
    assert rep["holds_exponent_l"] and not rep["holds_exponent_2l"]


def test_prime_tuple_ell2_brute():
    rep = prime_tuple_cube_sum(2, 5, 40)
    ps = [p for p in range(7, 41) if all(p % d for d in range(2, p))]
    want = 0.0
    for a in ps:
        for b in ps:
            for c in ps:
                for d in ps:
                    if icbrt_cube(a * b * (c * d) ** 2):
                        want += 1 / (a * b * c * d)
    assert rep["value"] == pytest.approx(want, rel=1e-12)


def test_prime_tuple_cost_guard():
    with pytest.raises(CostGuardError):
        prime_tuple_cube_sum(3, 5, 50)


def test_large_sieve_single_coefficient():
    Q, M, m = 30, 40, 1
    a = np.zeros(M)
    a[m - 1] = 2.0
    rep = large_sieve_ratio(Q, M, a=a)
    n_prim = sum(len(primitive_characters(q)) for q in range(1, Q + 1))
    assert rep["max"] == pytest.approx(n_prim * 4 / ((Q * Q + M) * 4))


def test_large_sieve_scale_invariant():
    rng = np.random.default_rng(0)
    a = rng.standard_normal((60, 3))
    r1 = large_sieve_ratio(20, 60, a=a)["ratios"]
    r2 = large_sieve_ratio(20, 60, a=7.5 * a)["ratios"]
    assert np.allclose(r1, r2)


def test_cubic_family_on_cubes():
    # m = 1 and m = 8: cubes coprime to every odd conductor
    M = 8
    a = np.zeros(M, dtype=complex)
    a[0], a[7] = 1.0, 0.5 - 0.25j
    rep = cubic_family_sieve_check(100, M, a=a)
    assert rep["total"][0] == pytest.approx(rep["family_size"] * abs(a.sum()) ** 2)
    assert rep["diagonal"][0] == pytest.approx(rep["total"][0])


def test_family_character_sum_direct():
    direct = 0j
    for c in enumerate_cubic_primitive(100):
        ang, k = c.angle_table()
        a = ang[2 % c.modulus]
        direct += 0 if a < 0 else complex(math.cos(2 * math.pi * a / k), math.sin(2 * math.pi * a / k))
    assert abs(family_character_sum(100, 2) - direct) < 1e-12
