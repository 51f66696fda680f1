import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cuspzeros import arith, forms, mollifier


def test_support_at_300(delta_mollifier):
    assert delta_mollifier.nus.tolist() == [1, 257, 263, 269, 271, 277, 281, 283, 293]
    assert delta_mollifier.beta_of(1) == 1
    assert delta_mollifier.alpha_of(2) == 0


def test_trivial_below_floor(delta_table):
    m = mollifier.build_mollifier(delta_table, 250.0)
    assert m.is_trivial
    assert mollifier.phi(0.5 + 3j, m) == 1


def test_alpha_values(delta_table, delta_mollifier):
    r257 = delta_table.r[257].real
    assert delta_mollifier.alpha_of(257) == pytest.approx(-r257 / 2, rel=1e-15)
    w = 1 - math.log(257) / math.log(300)
    assert delta_mollifier.beta_of(257) == pytest.approx(-r257 / 2 * w, rel=1e-14)


def test_squarefree_products(delta_table):
    m = mollifier.build_mollifier(delta_table, 70000.0)
    assert 257 * 263 in m.nus.tolist()
    assert 257 * 257 not in m.nus.tolist()
    assert m.alpha_of(257 * 263) == pytest.approx(m.alpha_of(257) * m.alpha_of(263), rel=1e-14)
    assert all(n == 1 or min(arith.factorize(int(n))) > 256 for n in m.nus)


def test_euler_product_coefficients(f23_table):
    # alpha agrees with the expansion of prod (1 - r(p) p^{-s} / 2) over 256 < p < X
    X = 1200.0
    m = mollifier.build_mollifier(f23_table, X)
    primes = [p for p in arith.primes_up_to(1199).tolist() if p > 256]
    poly = {1: 1.0 + 0j}
    for p in primes:
        new = dict(poly)
        for n, c in poly.items():
            if n * p < X:
                new[n * p] = new.get(n * p, 0) - c * f23_table.r[p] / 2
        poly = new
    assert sorted(poly) == m.nus.tolist()
    for n, c in poly.items():
        assert m.alpha_of(n) == pytest.approx(c, rel=1e-13, abs=1e-15)


def test_phi_direct(delta_mollifier):
    s = 0.5 + 7.3j
    direct = sum(b * n ** (-s) for n, b in delta_mollifier.as_dict().items())
    assert mollifier.phi(s, delta_mollifier) == pytest.approx(direct, rel=1e-14)


@settings(max_examples=40, deadline=None)
@given(st.floats(0.1, 2.0), st.floats(-100, 100))
def test_phi_conjugate_symmetry(delta_mollifier, sig, t):
    a = mollifier.phi(complex(sig, t), delta_mollifier)
    b = mollifier.phi(complex(sig, -t), delta_mollifier)
    assert abs(a - b.conjugate()) <= 1e-14 * max(1, abs(a))


@settings(max_examples=12, deadline=None)
@given(st.floats(0.5, 35.0))
def test_detector_function_real(delta_table, delta_mollifier, detector_params, t):
    assert mollifier.frak_f(t, delta_table, delta_mollifier, detector_params).imag_residual < 1e-8


def test_params_validation():
    with pytest.raises(ValueError):
        mollifier.DetectorParams(0.1, 0.3, 300)
    with pytest.raises(ValueError):
        mollifier.DetectorParams(0.05, 1.0, 300)
    with pytest.raises(ValueError):
        mollifier.DetectorParams(0.05, 0.3, 2.5)
    p = mollifier.DetectorParams(0.05, 0.3, 300)
    assert p.regime_flag
    assert p.H == pytest.approx(math.exp(1 / 0.3))


def test_x_beyond_table():
    small = forms.build_coeff_table(forms.DELTA, 280)
    with pytest.raises(ValueError):
        mollifier.build_mollifier(small, 300.0)


def test_advisory_schedule():
    s = mollifier.advisory_schedule(1e6)
    assert s["delta"] == pytest.approx(1e-6)
    assert s["X"] == pytest.approx(10 ** 0.06)
    assert s["h1"] == pytest.approx(10 / math.log(10 ** 0.06))
    assert s["trivial_mollifier"]
    with pytest.raises(ValueError):
        mollifier.advisory_schedule(1.0)


def test_write_mollifier(tmp_path, delta_mollifier):
    path = tmp_path / "m.csv"
    mollifier.write_mollifier(delta_mollifier, path)
    rows = path.read_text().splitlines()
    assert rows[0] == ",".join(mollifier.MOLLIFIER_HEADER)
    assert len(rows) == 10
    assert rows[1] == "1,1.0,0.0,1.0,0.0"
    back = np.array([float(r.split(",")[3]) for r in rows[1:]])
    assert np.array_equal(back, delta_mollifier.beta.real)
