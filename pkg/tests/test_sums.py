import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cuspzeros import arith, forms, mollifier, sums

SUPPORTED = sums.supported_up_to(100_000)


def test_supported_count():
    assert len(SUPPORTED) == 9668
    assert SUPPORTED[:3] == [1, 257, 263]
    with pytest.raises(sums.SupportError):
        sums.check_supported(2 * 257)


def test_k_single_prime_by_hand(delta_table):
    # K(p, s) as a ratio of the two local series, summed naively far past the truncation
    p, s = 257, 0.8 + 2j
    num = sum(np.conj(delta_table.r_of(p ** (j + 1))) * delta_table.r_of(p ** j) * p ** (-j * s)
              for j in range(12))
    den = sum(abs(delta_table.r_of(p ** j)) ** 2 * p ** (-j * s) for j in range(12))
    assert sums.k_factor_a(p, s, delta_table) == pytest.approx(num / den, rel=1e-14)


def test_k_methods_agree_sample(delta_table, f23_table):
    for table in (delta_table, f23_table):
        for m in SUPPORTED[::250]:
            for s in (0.5, 0.75 + 3j, 1.0):
                kv = sums.k_factor(m, s, table)
                assert kv.discrepancy <= 1e-10 * max(1, abs(kv.method_a))
                assert kv.tail_bound < 1e-15


def test_k_cache_complex_exponent(delta_table):
    s = complex(0.6, 10.0)
    K = sums.KCache(delta_table, s)
    for m in (257, 263 * 269, 257 ** 2):
        assert K(m) == pytest.approx(sums.k_factor_a(m, s, delta_table), rel=1e-12)


def test_k_rejects_left_of_half(delta_table):
    with pytest.raises(sums.SupportError):
        sums.k_factor(257, 0.4, delta_table)


@settings(max_examples=60, deadline=None)
@given(st.sampled_from(SUPPORTED[1:]), st.floats(0.5, 2.0), st.floats(-20, 20))
def test_k_tau6_bound_property(f23_table, m, sig, t):
    assert abs(sums.k_factor_a(m, complex(sig, t), f23_table)) <= sums.tau6(m)


@settings(max_examples=40, deadline=None)
@given(st.sampled_from([p for p in SUPPORTED[1:200] if arith.factorize(p) == {p: 1}]),
       st.sampled_from([p for p in SUPPORTED[1:200] if arith.factorize(p) == {p: 1}]))
def test_k_multiplicative_property(delta_table, p, q):
    if p != q:
        s = 0.9
        both = sums.k_factor_a(p * q, s, delta_table)
        assert both == pytest.approx(sums.k_factor_a(p, s, delta_table) * sums.k_factor_a(q, s, delta_table),
                                     rel=1e-14)


def _brute_selberg(vartheta, table, m):
    s = 1 - vartheta
    items = list(m.as_dict().items())
    kb = {}

    def K(n):
        if n not in kb:
            kb[n] = sums.k_factor_b(n, s, table)
        return kb[n]

    total = []
    for (n1, b1), (n2, b2), (n3, b3), (n4, b4) in itertools.product(items, repeat=4):
        A, B = n1 * n4, n2 * n3
        g = math.gcd(A, B)
        w = b1 * b4 * np.conj(b2 * b3) / (n1 ** s * n4 * n2 ** s * n3)
        total.append(w * g ** s * K(A // g) * np.conj(K(B // g)))
    return sums.fsum_complex(total)


@pytest.mark.parametrize("vartheta", [0.0, 0.25])
def test_selberg_against_quadruple_loop(delta_table, delta_mollifier, vartheta):
    direct = sums.selberg_sum(vartheta, delta_table, delta_mollifier).value
    assert direct == pytest.approx(_brute_selberg(vartheta, delta_table, delta_mollifier), rel=1e-12)


def test_selberg_decomposition_f23(f23_table):
    m = mollifier.build_mollifier(f23_table, 400.0)
    rep = sums.selberg_pair(0.1, f23_table, m)
    assert rep.relative_discrepancy < 1e-10


def test_selberg_support_cap(delta_table):
    m = mollifier.build_mollifier(delta_table, 30000.0)
    with pytest.raises(sums.SupportError):
        sums.selberg_sum(0.1, delta_table, m)


@settings(max_examples=100, deadline=None)
@given(st.integers(1, 3000), st.integers(-5, 5), st.integers(0, 9))
def test_mobius_identity_property(q, a, b):
    lhs, rhs = sums.mobius_identity(lambda x: a * x * x + b, q)
    assert lhs == rhs


def test_b_function(delta_table):
    assert sums.b_function(1, delta_table) == 1
    assert sums.b_function(257, delta_table) == pytest.approx(abs(delta_table.r[257]), rel=1e-15)
    assert sums.b_function(2 * 257, delta_table) == 0
    n = 257 * 263
    want = 2 * abs(sums.alpha_full(n, delta_table)) + 2 * abs(sums.alpha_full(257, delta_table)
                                                              * sums.alpha_full(263, delta_table))
    assert sums.b_function(n, delta_table) == pytest.approx(want, rel=1e-14)


def test_coprime_alpha_sum_methods(delta_table):
    a = sums.coprime_alpha_sum(5000.0, 0.5, 0.1, 1, delta_table, "a")
    b = sums.coprime_alpha_sum(5000.0, 0.5, 0.1, 1, delta_table, "b")
    assert a.value == pytest.approx(b.value, rel=1e-12)
    c = sums.coprime_alpha_sum(5000.0, 0.5, 0.1, 257, delta_table)
    assert c.extra["terms"] == a.extra["terms"] - sum(1 for x in SUPPORTED if x <= 5000 and x % 257 == 0)


def test_rankin(delta_table):
    assert sums.rankin_mean(100_000, delta_table) == pytest.approx(0.38403, abs=5e-5)
    rep = sums.rankin_series(2.0, delta_table)
    assert rep.value.real > 1 and math.isfinite(rep.tail_bound)
    with pytest.raises(ValueError):
        sums.rankin_series(1.0, delta_table)
    with pytest.raises(ValueError):
        sums.rankin_mean(200_000, delta_table)


def test_shifted_bucketed_equals_forward(f23_table):
    rep = sums.shifted_convolution(5000, 3, 7, 2, f23_table)
    assert rep.value == rep.oracle
    assert rep.extra["terms"] == len(sums.shifted_terms_bucketed(5000, 3, 7, 2, f23_table))


@settings(max_examples=30, deadline=None)
@given(st.integers(10, 3000), st.integers(1, 9), st.integers(1, 9), st.integers(0, 20))
def test_shifted_property(delta_table, N, m1, m2, l):
    if math.gcd(m1, m2) == 1:
        fwd = sums.shifted_terms_forward(N, m1, m2, l, delta_table)
        bkt = sums.shifted_terms_bucketed(N, m1, m2, l, delta_table)
        assert sorted(fwd, key=lambda z: (z.real, z.imag)) == sorted(bkt, key=lambda z: (z.real, z.imag))


def test_shifted_validation(delta_table):
    with pytest.raises(ValueError):
        sums.shifted_convolution(100, 2, 4, 1, delta_table)
    with pytest.raises(ValueError):
        sums.shifted_convolution(200_000, 1, 1, 1, delta_table)


def test_shifted_dirichlet_diagonal(delta_table):
    a = sums.shifted_dirichlet(2.0, 0, 1, 1, delta_table)
    b = sums.rankin_series(2.0, delta_table)
    assert a.value == pytest.approx(b.value, rel=1e-14)
    assert a.extra["status"] == "certified"
    assert sums.shifted_dirichlet(0.9, 1, 1, 1, delta_table, N=100).extra["status"] == "partial_only"


def test_shifted_splitting(delta_table):
    rep = sums.shifted_splitting(2.0, 257, 1, delta_table)
    assert rep.discrepancy <= rep.tail_bound + 1e-12


def test_tau6():
    assert sums.tau6(1) == 1
    assert sums.tau6(257) == 6
    assert sums.tau6(257 * 263) == 36
    assert sums.tau6(257 ** 2) == 21


def test_sum_report_csv(tmp_path, delta_table):
    reps = [sums.shifted_convolution(1000, 1, 1, 1, delta_table), sums.rankin_series(2.0, delta_table)]
    path = tmp_path / "s.csv"
    sums.write_sum_reports(reps, path)
    lines = path.read_text().splitlines()
    assert lines[0] == ",".join(sums.SUM_HEADER)
    assert lines[2].split(",")[4] == ""  # no oracle for a plain series
    assert "np." not in path.read_text()
