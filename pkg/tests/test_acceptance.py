"""The twelve acceptance criteria at their stated tolerances.

Each test records one ``criterion N: PASS|FAIL`` line; the lines are collected into
a summary section at the end of the pytest run.
"""

import math
import time

import numpy as np
import pytest

from cuspzeros import arith, cli, detector, forms, lfunc, mollifier, sums, voronoi

# Delta zeros 0 < t < 40 from an independent 60-digit Mellin-integral oracle
DELTA_ZEROS_ORACLE = [9.222379399921103, 13.90754986139213, 17.44277697823447, 19.65651314195496,
                      22.33610363720987, 25.27463654811237, 26.8043911583504, 28.83168262418688,
                      31.17820949836026, 32.77487538223121, 35.19699584121007, 36.74146297671031,
                      37.75391597562427]

DELTA_P, H1, X_MOL, T_DET, T0 = 0.05, 0.3, 300.0, 40.0, 20.0
WMS_STEP = H1 / 16


def record(record_property, n, ok, detail):
    line = f"criterion {n}: {'PASS' if ok else 'FAIL'} ({detail})"
    print(line)
    record_property("acceptance", line)
    return ok


@pytest.fixture(scope="module")
def params():
    return mollifier.DetectorParams(DELTA_P, H1, X_MOL)


# ----------------------------------------------------------------------------
# 1. coefficient exactness
# ----------------------------------------------------------------------------


def test_criterion_01_coefficients(record_property):
    t0 = time.perf_counter()
    ok = True
    details = []
    tau = np.zeros(100_001, dtype=np.int64)
    for d in range(1, 100_001):
        tau[d::d] += 1
    for form in (forms.DELTA, forms.F23):
        table = forms.build_coeff_table(form, 100_000)  # validates Hecke relations and the bound
        rebuilt = forms.reconstruct_from_primes(forms.prime_values_of(table), form, 100_000)
        exact = rebuilt.a_exact == table.a_exact
        bound = bool(np.all(np.abs(table.r[1:]) <= tau[1:] * (1 + 1e-12)))
        ok &= exact and bound
        details.append(f"{form.name} exact={exact} bound={bound}")
    elapsed = time.perf_counter() - t0
    ok &= elapsed < 30
    record(record_property, 1, ok, f"{'; '.join(details)}; {elapsed:.1f}s")
    assert ok


# ----------------------------------------------------------------------------
# 2. functional equation, 3. critical-line reality
# ----------------------------------------------------------------------------


def test_criterion_02_functional_equation(record_property, delta_table, f23_table):
    t0 = time.perf_counter()
    worst = {}
    for table in (delta_table, f23_table):
        worst[table.form.name] = max(lfunc.fe_residual(complex(sig, t), table)
                                     for sig in (0.3, 0.5, 0.7) for t in range(31))
    elapsed = time.perf_counter() - t0
    ok = max(worst.values()) < 1e-8 and elapsed < 120
    record(record_property, 2, ok, ", ".join(f"{k} max {v:.2e}" for k, v in worst.items())
           + f"; {elapsed:.1f}s")
    assert ok


def test_criterion_03_critical_line_reality(record_property, delta_table, f23_table):
    worst = {t.form.name: max(lfunc.hardy_z(x, t).eval_error for x in range(31))
             for t in (delta_table, f23_table)}
    ok = max(worst.values()) <= 1e-8
    record(record_property, 3, ok, ", ".join(f"{k} max |Im|/|.| {v:.2e}" for k, v in worst.items()))
    assert ok


# ----------------------------------------------------------------------------
# 4. zero accounting
# ----------------------------------------------------------------------------


def test_criterion_04_zero_accounting(record_property, delta_table):
    t0 = time.perf_counter()
    rep = lfunc.count_zeros(T_DET, delta_table)
    z_dir = lambda t: lfunc.hardy_z(t, delta_table, method="dirichlet").z
    second = [lfunc.refine_zero(z_dir, r.refined - 1e-3, r.refined + 1e-3, tol=1e-10)[0]
              for r in rep.records]
    gap = max(abs(a - b) for a, b in zip(rep.ordinates, second))
    oracle_gap = max(abs(a - b) for a, b in zip(rep.ordinates, DELTA_ZEROS_ORACLE))
    elapsed = time.perf_counter() - t0
    ok = (rep.count_signs == rep.count_argument == len(DELTA_ZEROS_ORACLE)
          and gap < 1e-6 and oracle_gap < 1e-6 and elapsed < 300)
    record(record_property, 4, ok,
           f"sign changes {rep.count_signs}, argument {rep.count_argument}, two-method gap {gap:.1e}, "
           f"oracle gap {oracle_gap:.1e}; {elapsed:.0f}s")
    assert ok


# ----------------------------------------------------------------------------
# 5. detector soundness
# ----------------------------------------------------------------------------


@pytest.fixture(scope="module")
def detection(delta_table, delta_mollifier, params):
    return detector.detect_intervals(delta_table, delta_mollifier, params, T_DET, step=H1 / 4)


def test_criterion_05_detector(record_property, detection):
    rep = detection
    e1 = rep.e1_points
    verified = all(detector.window_has_sign_change(rep, pt.t) for pt in e1)
    triangle = sum(1 for pt in rep.points if pt.I1 >= pt.I2 - pt.err)
    ok = (verified and rep.all_confirmed and rep.n0_bound <= rep.sign_change_count
          and triangle == len(rep.points) and all(pt.flag != "indeterminate" for pt in rep.points))
    record(record_property, 5, ok,
           f"{len(e1)}/{len(rep.points)} E1 points all sign-verified={verified}, "
           f"n0 {rep.n0_bound:.3f} <= {rep.sign_change_count}, triangle {triangle}/{len(rep.points)}")
    assert ok


# ----------------------------------------------------------------------------
# 6. truncated window mean-square inequalities
# ----------------------------------------------------------------------------


@pytest.fixture(scope="module")
def wms_delta(delta_table, delta_mollifier, params):
    cache = detector.detector_cache(delta_table, delta_mollifier, params, WMS_STEP)
    printed = detector.window_mean_square_check(delta_table, delta_mollifier, params, T0, cache=cache)
    corrected = detector.window_mean_square_check(delta_table, delta_mollifier, params, T0,
                                                  cache=cache, corrected=True)
    return printed, corrected


@pytest.fixture(scope="module")
def wms_f23(params):
    # X = 300 with level 23 needs coefficients past 10^5 for G near y = 1
    table = lfunc.attach_root_number(forms.build_coeff_table(forms.F23, 300_000))
    m = mollifier.build_mollifier(table, X_MOL)
    return detector.window_mean_square_check(table, m, params, T0, step=WMS_STEP)


def _fmt_wms(r):
    return (f"lhs1 <= {r.lhs1_upper:.4g} vs rhs1 {r.rhs1:.4g}, lhs2 <= {r.lhs2_upper:.4g} vs rhs2 "
            f"{r.rhs2:.4g}, tail cert {r.rhs_tail_bound:.1e}")


@pytest.mark.xfail(strict=True, reason="weight-12 right side lacks the (n y)^((k-1)/2) factor; see ledger")
def test_criterion_06_window_mean_square_delta_as_printed(record_property, wms_delta, wms_f23):
    printed, corrected = wms_delta
    record(record_property, 6, printed.holds and wms_f23.holds,
           f"delta as printed: {_fmt_wms(printed)}; f23: {_fmt_wms(wms_f23)} holds={wms_f23.holds}; "
           f"delta with weight factor holds={corrected.holds}")
    assert printed.holds1 and printed.holds2


def test_criterion_06_window_mean_square_weight_one(wms_f23):
    assert wms_f23.holds1 and wms_f23.holds2
    assert wms_f23.rhs_tail_bound < 1e-6 * wms_f23.rhs1


def test_criterion_06_window_mean_square_delta_weight_factor(wms_delta):
    _, corrected = wms_delta
    assert corrected.holds1 and corrected.holds2


# ----------------------------------------------------------------------------
# 7. Selberg sums, 8. K factors
# ----------------------------------------------------------------------------


def test_criterion_07_selberg(record_property, delta_table):
    worst = 0.0
    for X in (300.0, 600.0):
        m = mollifier.build_mollifier(delta_table, X)
        for v in (0.0, 0.1, 0.25):
            worst = max(worst, sums.selberg_pair(v, delta_table, m).relative_discrepancy)
    moebius = all(sums.mobius_identity(lambda x: x ** 3 - 5 * x + 11, q)[0]
                  == sums.mobius_identity(lambda x: x ** 3 - 5 * x + 11, q)[1] for q in range(1, 2001))
    ok = worst < 1e-10 and moebius
    record(record_property, 7, ok, f"max relative discrepancy {worst:.1e}, Moebius exact for q <= 2000: {moebius}")
    assert ok


def test_criterion_08_k_factor(record_property, delta_table):
    ms = sums.supported_up_to(100_000)
    worst = 0.0
    for v in (0.0, 0.1, 0.25):
        for m in ms:
            worst = max(worst, sums.k_factor(m, 1 - v, delta_table).discrepancy)
    grid = [complex(sig, t) for sig in (0.5, 0.6, 1.0, 2.0) for t in (0.0, 1.0, 10.0)]
    ratio = 0.0
    for s in grid:
        K = sums.KCache(delta_table, s)
        ratio = max(ratio, max(abs(K(m)) / sums.tau6(m) for m in ms))
    ok = worst <= 1e-10 and ratio <= 1
    record(record_property, 8, ok,
           f"{len(ms)} supported m, max |A-B| {worst:.1e}, max |K|/tau6 {ratio:.3f} on {len(grid)} points")
    assert ok


# ----------------------------------------------------------------------------
# 9. Rankin stability
# ----------------------------------------------------------------------------


def test_criterion_09_rankin(record_property, delta_table):
    a, b = sums.rankin_mean(50_000, delta_table), sums.rankin_mean(100_000, delta_table)
    drift = abs(a - b) / b
    ok = b > 0 and drift < 0.05
    record(record_property, 9, ok, f"mean(5e4) {a:.5f}, mean(1e5) {b:.5f}, drift {drift:.2e}")
    assert ok


# ----------------------------------------------------------------------------
# 10. Voronoi and Bessel-Mellin
# ----------------------------------------------------------------------------


def test_criterion_10_voronoi(record_property, delta_table, f23_table):
    res = []
    for table, qs in ((delta_table, (1, 2, 4)), (f23_table, (23, 46))):
        for q in qs:
            r = voronoi.twisted_identity_check(1, q, None, table)
            res.append((table.form.name, q, r.relative_residual))
    bm = [voronoi.bessel_mellin_check(a, b, k).relative_residual
          for a, b, k in ((1.0, 1.0, 1), (4.0, 1.0, 2), (2.0, 3.0, 12))]
    ok = all(x < 1e-6 for *_, x in res) and all(x < 1e-6 for x in bm)
    record(record_property, 10, ok, ", ".join(f"{f} q={q} {x:.1e}" for f, q, x in res)
           + f"; Bessel-Mellin max {max(bm):.1e}")
    assert ok


# ----------------------------------------------------------------------------
# 11. shifted convolution
# ----------------------------------------------------------------------------


def test_criterion_11_shifted(record_property, delta_table):
    reps = [sums.shifted_convolution(N, m1, m2, l, delta_table) for N, m1, m2, l in cli.SHIFT_CONFIGS]
    exact = all(r.value == r.oracle for r in reps)
    canc = max(r.extra["cancellation"] for r in reps)
    sweep = sums.shifted_sweep(delta_table)
    ratios = ", ".join(f"N={r.params['N']}: {r.extra['exponent_ratio']:.3g}" for r in sweep)
    print("N^(10/11) ratio sweep:", ratios)
    ok = exact and canc < 1 and len(reps) == 10
    record(record_property, 11, ok, f"10 configs exact={exact}, max |S|/sum|terms| {canc:.3f}; sweep {ratios}")
    assert ok


# ----------------------------------------------------------------------------
# 12. determinism
# ----------------------------------------------------------------------------


def test_criterion_12_determinism(record_property, tmp_path, monkeypatch):
    monkeypatch.setenv(cli.CACHE_ENV, str(tmp_path / "cache"))
    codes = []
    for run in ("run1", "run2"):
        codes.append(cli.main(["verify", "--out-dir", str(tmp_path / run)]))
    names = sorted(p.name for p in (tmp_path / "run1").glob("*.csv"))
    same = [n for n in names if (tmp_path / "run1" / n).read_bytes() == (tmp_path / "run2" / n).read_bytes()]
    ok = len(names) == len(cli.VERIFY_TARGETS) and len(same) == len(names) and codes[0] == codes[1]
    record(record_property, 12, ok, f"{len(same)}/{len(names)} CSVs byte-identical, exit codes {codes}")
    assert ok
