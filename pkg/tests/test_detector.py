import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cuspzeros import detector, forms, mollifier

# |F(y (sin d + i cos d))|^2 at d = 0.05 from a 40-digit q-product
G_ORACLE = {
    "delta": {1: 1.2544053593985015832e-78, 2: 2.7378010257512952702e-31,
              5: 4.2174699775630548321e-8, 20: 3.2071049986917668241e-6},
    "f23": {1: 3.9917603803787580238, 2: 3.4313392341493684266, 5: 0.016695867331582546785,
            20: 0.065277840200793542816},
}


@pytest.fixture(scope="module")
def trivial_params():
    return mollifier.DetectorParams(0.05, 0.3, 250.0)


def test_g_trivial_mollifier_f23(f23_table, trivial_params):
    m = mollifier.build_mollifier(f23_table, 250.0)
    for corrected in (False, True):  # identical for weight one
        ev = detector.GEvaluator(f23_table, m, trivial_params, corrected=corrected)
        for y, ref in G_ORACLE["f23"].items():
            assert ev(y) == pytest.approx(ref, rel=1e-12)


def test_g_corrected_weight12(delta_table, trivial_params):
    # with the weight factor, r(n) n^{11/2} = tau(n): G = y^11 |F|^2
    m = mollifier.build_mollifier(delta_table, 250.0)
    ev = detector.GEvaluator(delta_table, m, trivial_params, corrected=True)
    for y, ref in G_ORACLE["delta"].items():
        v = ev.value(y)
        want = ref * y ** 11
        assert abs(math.sqrt(v.G) - math.sqrt(want)) <= 1e-13 * math.sqrt(v.majorant)


def test_g_majorant_and_profile(delta_table, delta_mollifier, detector_params):
    vals = detector.g_profile([1.0, 3.0, 10.0, 40.0], delta_table, delta_mollifier, detector_params)
    for v in vals:
        assert 0 <= v.G <= v.majorant
        assert v.tail_bound < 1e-10


def test_g_direct_double_loop(f23_table, detector_params):
    m = mollifier.build_mollifier(f23_table, 300.0)
    y = 7.0
    w = complex(math.sin(0.05), math.cos(0.05))
    n = np.arange(1, 100_000)
    total = 0j
    for n1, b1 in m.as_dict().items():
        for n2, b2 in m.as_dict().items():
            e = np.exp(-2 * math.pi * n * n1 * y * w / (n2 * math.sqrt(23)))
            total += b1 * b2.conjugate() / n2 * np.dot(f23_table.r[1:100_000], e)
    ev = detector.GEvaluator(f23_table, m, detector_params)
    assert ev(y) == pytest.approx(abs(total) ** 2, rel=1e-11)


def test_g_requires_y_at_least_one(delta_table, delta_mollifier, detector_params):
    with pytest.raises(detector.DetectorError):
        detector.g_of_y(0.5, delta_table, delta_mollifier, detector_params)


def test_truncation_error():
    small = forms.build_coeff_table(forms.F23, 300)
    p = mollifier.DetectorParams(0.05, 0.3, 250.0)
    ev = detector.GEvaluator(small, mollifier.build_mollifier(small, 250.0), p)
    with pytest.raises(detector.TruncationError) as info:
        ev(0.01)
    assert info.value.required_cutoff > 300


def test_aligned_step():
    step, k = detector.aligned_step(0.3, 0.075)
    assert k == 4 and step == pytest.approx(0.075)
    step, k = detector.aligned_step(0.3, 0.07)
    assert k == 5 and step == pytest.approx(0.06)
    with pytest.raises(detector.DetectorError):
        detector.aligned_step(0.3, 0.1)


def test_classify_margin():
    assert detector.classify(2.0, 1.0, 0.0) == "E1"
    assert detector.classify(1.0, 1.0, 0.0) == "E2"
    assert detector.classify(1.0 + 1e-7, 1.0, 0.0) == "E2"  # inside the safety margin
    assert detector.classify(1.5, 1.0, 0.6) == "E2"


def test_integrate_panel_sign_change():
    pan = detector.integrate_panel(math.sin, 2.0, 4.0, math.sin(2.0), math.sin(4.0))
    assert pan.ok and len(pan.roots) == 1
    assert pan.roots[0] == pytest.approx(math.pi, abs=1e-12)
    assert pan.signed == pytest.approx(math.cos(2) - math.cos(4), abs=1e-10)
    assert pan.absolute == pytest.approx((1 + math.cos(2)) + (1 + math.cos(4)), abs=1e-10)


@settings(max_examples=50, deadline=None)
@given(st.floats(-3, 3), st.floats(0.05, 1.0), st.floats(0.5, 4.0))
def test_panel_triangle_property(a, width, freq):
    f = lambda t: math.cos(freq * t)
    pan = detector.integrate_panel(f, a, a + width, f(a), f(a + width))
    assert pan.absolute >= abs(pan.signed) - pan.err


def test_j_integral_validation(delta_table, delta_mollifier, detector_params):
    with pytest.raises(detector.DetectorError):
        detector.j_integral(1.0, 0.3, delta_table, delta_mollifier, detector_params)
    with pytest.raises(detector.DetectorError):
        detector.j_integral(0.5, 0.1, delta_table, delta_mollifier, detector_params)


def test_j_integral_monotone(delta_table, delta_mollifier, detector_params):
    rows = detector.j_scaling(0.1, delta_table, delta_mollifier, detector_params, xs=(1, 4))
    assert rows[0][1] > rows[1][1] > 0


@pytest.fixture(scope="module")
def short_detection(delta_table, delta_mollifier, detector_params):
    return detector.detect_intervals(delta_table, delta_mollifier, detector_params, 15.0)


def test_short_detection_invariants(short_detection):
    rep = short_detection
    assert rep.step == pytest.approx(0.075)
    assert rep.triangle_ok
    assert rep.all_confirmed
    assert rep.n0_bound <= rep.sign_change_count == 2
    for pt in rep.e1_points:
        assert detector.window_has_sign_change(rep, pt.t)


def test_detection_csv(tmp_path, short_detection):
    path = tmp_path / "d.csv"
    detector.write_detection(short_detection, path)
    lines = path.read_text().splitlines()
    assert lines[0] == ",".join(detector.DETECTION_HEADER)
    assert len(lines) == 1 + len(short_detection.points)
    budget = detector.budget_report(short_detection)
    assert budget["n0_bound"] == pytest.approx(short_detection.n0_bound)
