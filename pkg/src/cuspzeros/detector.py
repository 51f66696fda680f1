"""Window-integral sign-change detection (I1/I2) and the G(y) apparatus."""

from __future__ import annotations

import csv
import logging
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy.optimize import brentq

from .forms import CoeffTable
from .lfunc import completed_ray, find_zeros
from .mollifier import DetectorParams, MollifierTable, phi
from .specfun import gauss_legendre_panels

log = logging.getLogger(__name__)

EPS_DET = 1e-6
PANEL_ORDER = 8
CHECK_ORDER = 5


class DetectorError(ValueError):
    pass


class TruncationError(DetectorError):
    def __init__(self, msg: str, required_cutoff: int):
        super().__init__(msg)
        self.required_cutoff = required_cutoff


# ----------------------------------------------------------------------------
# the rotated detector function sampled on aligned panels
# ----------------------------------------------------------------------------


def rotated_frak_f(t: float, table: CoeffTable, m: MollifierTable, p: DetectorParams) -> float:
    """Real part of theta^{-1/2} frak F(t)."""
    lam = completed_ray(0.5 + 1j * t, table)
    ph = abs(phi(0.5 + 1j * t, m)) ** 2
    if ph == 0 or lam.logmod == -math.inf:
        return 0.0
    logmod = lam.logmod + math.log(ph) + (math.pi / 2 - p.delta) * t - 0.5 * math.log(2 * math.pi)
    ang = lam.phase - 0.5 * np.angle(table.theta)
    return math.exp(logmod) * math.cos(ang)


@dataclass
class Panel:
    a: float
    b: float
    signed: float = math.nan
    absolute: float = math.nan
    err: float = math.inf
    roots: list[float] = field(default_factory=list)
    ok: bool = False


def _gl(f, a: float, b: float, order: int) -> tuple[float, float, np.ndarray]:
    x, w = np.polynomial.legendre.leggauss(order)
    ts = 0.5 * (b - a) * x + 0.5 * (a + b)
    vals = np.array([f(t) for t in ts])
    return 0.5 * (b - a) * float(np.dot(w, vals)), 0.5 * (b - a) * float(np.dot(w, np.abs(vals))), vals


def integrate_panel(f, a: float, b: float, fa: float, fb: float) -> Panel:
    """Signed and absolute integral of f over [a, b]; sign changes are split at their roots."""
    pan = Panel(a, b)
    try:
        s_hi, a_hi, vals = _gl(f, a, b, PANEL_ORDER)
        s_lo, _, _ = _gl(f, a, b, CHECK_ORDER)
    except Exception as exc:  # evaluation failure marks the panel indeterminate
        log.warning("panel [%g, %g] failed: %s", a, b, exc)
        return pan
    x, _ = np.polynomial.legendre.leggauss(PANEL_ORDER)
    pts = np.concatenate([[a], 0.5 * (b - a) * x + 0.5 * (a + b), [b]])
    sv = np.concatenate([[fa], vals, [fb]])
    roots = []
    for i in range(len(pts) - 1):
        if sv[i] == 0 and i > 0:
            roots.append(float(pts[i]))
        elif sv[i] * sv[i + 1] < 0:
            roots.append(brentq(f, pts[i], pts[i + 1], xtol=1e-13))
    err = abs(s_hi - s_lo) + 1e-15 * a_hi
    if roots:
        edges = [a] + roots + [b]
        s_tot = a_tot = 0.0
        for lo, hi in zip(edges[:-1], edges[1:]):
            if hi <= lo:
                continue
            s1, _, _ = _gl(f, lo, hi, PANEL_ORDER)
            s2, _, _ = _gl(f, lo, hi, CHECK_ORDER)
            s_tot += s1
            a_tot += abs(s1)
            err += abs(s1 - s2)
        pan.signed, pan.absolute = s_tot, a_tot
    else:
        pan.signed, pan.absolute = s_hi, abs(s_hi)
    pan.err, pan.roots, pan.ok = err, roots, True
    return pan


class PanelCache:
    """Panels [origin + i*width, origin + (i+1)*width] integrated once and shared."""

    def __init__(self, f, origin: float, width: float):
        self.f, self.origin, self.width = f, origin, width
        self._edge: dict[int, float] = {}
        self._panel: dict[int, Panel] = {}

    def edge(self, i: int) -> float:
        return self.origin + self.width * i

    def index_of(self, t: float) -> int:
        return int(math.floor((t - self.origin) / self.width + 1e-9))

    def _fval(self, i: int) -> float:
        if i not in self._edge:
            self._edge[i] = self.f(self.edge(i))
        return self._edge[i]

    def panel(self, i: int) -> Panel:
        if i not in self._panel:
            self._panel[i] = integrate_panel(self.f, self.edge(i), self.edge(i + 1),
                                             self._fval(i), self._fval(i + 1))
        return self._panel[i]

    def panels(self, lo: int, hi: int) -> list[Panel]:
        return [self.panel(i) for i in range(lo, hi)]

    @property
    def all_panels(self) -> list[Panel]:
        return [self._panel[i] for i in sorted(self._panel)]


# ----------------------------------------------------------------------------
# detection
# ----------------------------------------------------------------------------


@dataclass(frozen=True)
class DetectionPoint:
    t: float
    I1: float
    I2: float
    err: float
    flag: str  # "E1", "E2" or "indeterminate"
    confirmations: int = 0


@dataclass
class DetectionReport:
    params: DetectorParams
    T: float
    step: float
    points: list[DetectionPoint]
    mu_E1: float
    n0_bound: float
    zeros: list[float]
    sign_change_count: int
    panels: list[Panel] = field(default_factory=list, repr=False)

    @property
    def grid(self) -> np.ndarray:
        return np.array([pt.t for pt in self.points])

    @property
    def e1_points(self) -> list[DetectionPoint]:
        return [pt for pt in self.points if pt.flag == "E1"]

    @property
    def all_confirmed(self) -> bool:
        return all(pt.confirmations >= 1 for pt in self.e1_points)

    @property
    def triangle_ok(self) -> bool:
        return all(pt.I1 >= pt.I2 - pt.err for pt in self.points if pt.flag != "indeterminate")


def aligned_step(h1: float, step: float) -> tuple[float, int]:
    """Largest step <= requested that divides h1; also the panels per half-window."""
    if step <= 0:
        raise DetectorError("step must be positive")
    if step > h1 / 4 * (1 + 1e-12):
        raise DetectorError("step must not exceed h1/4")
    k = int(math.ceil(h1 / step - 1e-9))
    return h1 / k, k


def window_sums(panels: list[Panel], start: int, k: int) -> tuple[float, float, float, bool]:
    win = panels[start:start + 2 * k]
    ok = all(pn.ok for pn in win)
    if not ok:
        return math.nan, math.nan, math.inf, False
    i1 = math.fsum(pn.absolute for pn in win)
    i2 = abs(math.fsum(pn.signed for pn in win))
    err = 2 * math.fsum(pn.err for pn in win)
    return i1, i2, err, True


def classify(i1: float, i2: float, err: float, eps: float = EPS_DET) -> str:
    return "E1" if i1 > i2 * (1 + eps) + err else "E2"


def detector_cache(table: CoeffTable, m: MollifierTable, p: DetectorParams,
                   step: float | None = None) -> PanelCache:
    step, _ = aligned_step(p.h1, p.h1 / 4 if step is None else step)

    def f(t):
        return rotated_frak_f(t, table, m, p)

    return PanelCache(f, 1 - p.h1, step)


def detect_intervals(table: CoeffTable, m: MollifierTable, p: DetectorParams, T: float,
                     step: float | None = None, eps: float = EPS_DET,
                     zero_step: float = 0.05, cache: PanelCache | None = None) -> DetectionReport:
    """Classify the grid t in (1, T) into E1 / E2 and derive the lower bound on zeros."""
    if T <= 1:
        raise DetectorError("T must exceed 1")
    h1 = p.h1
    step, k = aligned_step(h1, h1 / 4 if step is None else step)
    n_grid = int(math.floor((T - 1) / step - 1e-9))
    ts = 1 + step * np.arange(1, n_grid + 1)
    ts = ts[ts < T]

    if cache is None or abs(cache.width - step) > 1e-15 or abs(cache.origin - (1 - h1)) > 1e-12:
        cache = detector_cache(table, m, p, step)
    panels = cache.panels(0, n_grid + 2 * k)

    zeros = [z.refined for z in find_zeros(table, T + h1, step=zero_step)]
    zarr = np.array(zeros)
    points = []
    for j, t in enumerate(ts):
        i1, i2, err, ok = window_sums(panels, j + 1, k)
        if not ok:
            points.append(DetectionPoint(float(t), i1, i2, err, "indeterminate"))
            continue
        flag = classify(i1, i2, err, eps)
        conf = 0
        if flag == "E1":
            conf = int(np.sum((zarr > t - h1) & (zarr < t + h1))) if len(zarr) else 0
        points.append(DetectionPoint(float(t), i1, i2, err, flag, conf))
    mu = step * sum(1 for pt in points if pt.flag == "E1")
    n_in = sum(1 for z in zeros if 0 < z < T)
    return DetectionReport(p, float(T), step, points, mu, mu / (2 * h1) - 1, zeros, n_in, panels)


def window_has_sign_change(report: DetectionReport, t: float) -> bool:
    """Sign change of the rotated detector function among panel data in (t-h1, t+h1)."""
    h1 = report.params.h1
    for pn in report.panels:
        if pn.b <= t - h1 or pn.a >= t + h1:
            continue
        if any(t - h1 < r < t + h1 for r in pn.roots):
            return True
    return False


def budget_report(report: DetectionReport) -> dict[str, float]:
    """Truncated quantities of the E1/E2 chain with the Cauchy-Schwarz bounds."""
    pts = [pt for pt in report.points if pt.flag != "indeterminate"]
    st = report.step
    I3 = st * math.fsum(pt.I1 for pt in pts)
    I1_E1 = st * math.fsum(pt.I1 for pt in pts if pt.flag == "E1")
    I2_E2 = st * math.fsum(pt.I2 for pt in pts if pt.flag == "E2")
    I2_all = st * math.fsum(pt.I2 for pt in pts)
    int_I1sq = st * math.fsum(pt.I1 ** 2 for pt in pts)
    int_I2sq = st * math.fsum(pt.I2 ** 2 for pt in pts)
    cs1 = math.sqrt(report.mu_E1 * int_I1sq)
    cs2 = math.sqrt(report.T * int_I2sq)
    return {
        "I3": I3,
        "I1_over_E1": I1_E1,
        "I2_over_E2": I2_E2,
        "I2_total": I2_all,
        "chain_slack": I1_E1 + I2_all - I3,
        "int_I1_squared": int_I1sq,
        "int_I2_squared": int_I2sq,
        "cauchy_schwarz_I1": cs1,
        "cauchy_schwarz_I2": cs2,
        "mu_E1": report.mu_E1,
        "n0_bound": report.n0_bound,
        "sign_changes": float(report.sign_change_count),
    }


DETECTION_HEADER = ["t", "I1", "I2", "flag", "confirmations"]


def write_detection(report: DetectionReport, path: str | Path) -> None:
    with Path(path).open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(DETECTION_HEADER)
        for pt in report.points:
            nums = [repr(float(x)) for x in (pt.t, pt.I1, pt.I2)]
            w.writerow(nums + [pt.flag, pt.confirmations])


# ----------------------------------------------------------------------------
# G(y): the modulus squared of the rotated triple sum
# ----------------------------------------------------------------------------

CHUNK = 4096


@dataclass(frozen=True)
class GTerm:
    rho: float  # nu1 / nu2
    coeff: complex  # beta(nu1) conj(beta(nu2)) / nu2


@dataclass(frozen=True)
class GValue:
    y: float
    G: float
    majorant: float
    tail_bound: float
    cutoffs: tuple[int, ...]


class GEvaluator:
    """Evaluates G(y) and its tau-majorant.

    ``corrected`` inserts the factor (n nu1 y / nu2)^{(k-1)/2} that a Mellin-Plancherel
    derivation produces for weight k > 1; it is the identity for weight 1.
    """

    def __init__(self, table: CoeffTable, m: MollifierTable, p: DetectorParams,
                 tol: float = 1e-13, corrected: bool = False):
        self.table, self.m, self.p, self.tol = table, m, p, tol
        self.power = (table.form.weight - 1) / 2 if corrected else 0.0
        self.sqrt_d = math.sqrt(table.form.level)
        self.w = complex(math.sin(p.delta), math.cos(p.delta))
        terms: dict[float, complex] = {}
        for n1, b1 in zip(m.nus.tolist(), m.beta):
            for n2, b2 in zip(m.nus.tolist(), m.beta):
                c = complex(b1 * np.conj(b2)) / n2
                if c == 0:
                    continue
                rho = n1 / n2
                terms[rho] = terms.get(rho, 0j) + c
        self.terms = [GTerm(r, c) for r, c in sorted(terms.items())]
        self.coeff_abs = sum(abs(t.coeff) for t in self.terms)
        n = np.arange(1, table.n_max + 1, dtype=np.float64)
        self._r = table.r[1:]
        self._tau = _tau_table(table.n_max)
        self._logn = np.log(n)

    def lam(self, rho: float, y: float) -> float:
        return 2 * math.pi * rho * y * self.w.real / self.sqrt_d

    def _tail(self, lam: float, scale: float, N: int) -> float:
        e = self.power + 0.5
        rate = lam - e / N
        if rate <= 0:
            return math.inf
        log_den = rate + math.log1p(-math.exp(-rate)) if rate > 1 else math.log(math.expm1(rate))
        return 2 * scale * math.exp(e * math.log(N) - lam * N - log_den)

    def cutoff(self, term: GTerm, y: float) -> tuple[int, float]:
        """Smallest N with |coeff| * tail(N) below tol / #terms."""
        lam = self.lam(term.rho, y)
        scale = (term.rho * y) ** self.power
        target = self.tol / len(self.terms)
        e = self.power + 0.5
        N = max(2, int(math.ceil(2 * e / lam)))
        if N > self.table.n_max:
            raise TruncationError(f"G({y}) needs {N} coefficients, table has {self.table.n_max}", N)
        while abs(term.coeff) * self._tail(lam, scale, N) > target:
            N = int(N * 1.25) + 1
            if N > self.table.n_max:
                raise TruncationError(
                    f"G({y}) needs {N} coefficients, table has {self.table.n_max}", N)
        return N, abs(term.coeff) * self._tail(lam, scale, N)

    def _partial(self, term: GTerm, y: float, N: int) -> tuple[complex, float]:
        a = 2 * math.pi * term.rho * y / self.sqrt_d
        s = 0j
        maj = 0.0
        log_ry = math.log(term.rho * y)
        for lo in range(0, N, CHUNK):
            hi = min(N, lo + CHUNK)
            ln = self._logn[lo:hi]
            n = np.arange(lo + 1, hi + 1, dtype=np.float64)
            expo = self.power * (ln + log_ry) - a * n * self.w
            s += np.dot(self._r[lo:hi], np.exp(expo))
            maj += float(np.dot(self._tau[lo:hi], np.exp(expo.real)))
        return s, maj

    def value(self, y: float) -> GValue:
        if y <= 0:
            raise DetectorError("y must be positive")
        total = 0j
        maj = 0.0
        tail = 0.0
        cuts = []
        for term in self.terms:
            N, tb = self.cutoff(term, y)
            s, mj = self._partial(term, y, N)
            total += term.coeff * s
            maj += abs(term.coeff) * mj
            tail += tb
            cuts.append(N)
        G = abs(total) ** 2
        gtail = 2 * abs(total) * tail + tail ** 2
        return GValue(float(y), G, (maj + tail) ** 2, gtail, tuple(cuts))

    def __call__(self, y: float) -> float:
        return self.value(y).G

    def majorant_tail_integral(self, Y: float, weight_power: float = 0.0) -> float:
        """Bound on int_Y^inf M(y)^2 y^{-weight_power} dy via exponential decay from Y."""
        lam_min = min(self.lam(t.rho, 1.0) for t in self.terms)
        rate = 2 * (lam_min - self.power / Y)
        if rate <= 0:
            return math.inf
        return self.value(Y).majorant * Y ** (-weight_power) / rate


def _tau_table(n_max: int) -> np.ndarray:
    tau = np.zeros(n_max + 1, dtype=np.float64)
    for d in range(1, n_max + 1):
        tau[d::d] += 1
    return tau[1:]


def g_of_y(y: float, table: CoeffTable, m: MollifierTable, p: DetectorParams,
           tol: float = 1e-13, corrected: bool = False) -> GValue:
    if y < 1:
        raise DetectorError("y must be >= 1")
    return GEvaluator(table, m, p, tol, corrected).value(y)


def g_profile(ys, table, m, p, tol: float = 1e-13, corrected: bool = False) -> list[GValue]:
    ev = GEvaluator(table, m, p, tol, corrected)
    return [ev.value(float(y)) for y in ys]


GPROFILE_HEADER = ["y", "G", "majorant", "tail_bound"]


def write_gprofile(values: list[GValue], path: str | Path) -> None:
    with Path(path).open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(GPROFILE_HEADER)
        for v in values:
            w.writerow([repr(float(x)) for x in (v.y, v.G, v.majorant, v.tail_bound)])


# ----------------------------------------------------------------------------
# integrals of G
# ----------------------------------------------------------------------------


@dataclass(frozen=True)
class GIntegral:
    a: float
    b: float
    value: float
    quad_error: float
    tail_bound: float  # bound on the part beyond b (0 when b is finite by request)
    truncation_error: float  # accumulated pointwise tail bounds of G times length


def integrate_g(ev: GEvaluator, a: float, b: float, weight=None, seg_ratio: float = 1.5,
                limit: int = 400) -> GIntegral:
    """int_a^b G(y) w(y) dy by adaptive quadrature on geometric segments."""
    from scipy.integrate import quad

    if weight is None:
        def f(y):
            return ev(y)
    else:
        def f(y):
            return ev(y) * weight(y)
    edges = [a]
    while edges[-1] * seg_ratio < b:
        edges.append(edges[-1] * seg_ratio)
    edges.append(b)
    vals, errs = [], []
    for lo, hi in zip(edges[:-1], edges[1:]):
        v, e = quad(f, lo, hi, limit=limit, epsabs=0.0, epsrel=1e-10)
        vals.append(v)
        errs.append(e)
    gv = ev.value(a)
    trunc = gv.tail_bound * (b - a)
    return GIntegral(a, b, math.fsum(vals), math.fsum(errs), 0.0, trunc)


def choose_y_limit(ev: GEvaluator, start: float, rel: float = 1e-10,
                   weight_power: float = 0.0, y_cap: float = 1e7) -> tuple[float, float]:
    """Double Y from ``start`` until the majorant tail beyond Y is below rel * G-scale."""
    scale = max(max(ev.value(start * 2 ** j).G for j in range(8)), 1e-300)
    Y = max(start, 2.0)
    while True:
        tb = ev.majorant_tail_integral(Y, weight_power)
        if tb < rel * scale or Y >= y_cap:
            return Y, tb
        Y *= 2


@dataclass(frozen=True)
class JValue:
    x: float
    exponent: float
    value: float
    quad_error: float
    upper_limit: float
    tail_bound: float


def j_integral(x: float, exponent: float, table: CoeffTable, m: MollifierTable,
               p: DetectorParams, tol: float = 1e-13, corrected: bool = False,
               evaluator: GEvaluator | None = None) -> JValue:
    """J(x, v) = int_x^inf G(u) u^{-v} du with a certified truncation."""
    if not 0 < exponent <= 0.25:
        raise DetectorError("exponent must lie in (0, 1/4]")
    if not 1 <= x <= p.H * (1 + 1e-12):
        raise DetectorError("x must lie in [1, exp(1/h1)]")
    ev = evaluator or GEvaluator(table, m, p, tol, corrected)
    U, tb = choose_y_limit(ev, x, weight_power=exponent)
    gi = integrate_g(ev, x, U, weight=lambda u: u ** (-exponent))
    return JValue(x, exponent, gi.value, gi.quad_error + gi.truncation_error, U, tb)


def j_scaling(exponent: float, table, m, p, xs=(1, 2, 4, 8), **kw) -> list[tuple[float, float, float]]:
    """(x, J(x), J(x) x^v) across x for the shape of the J bound; reported, not asserted."""
    ev = GEvaluator(table, m, p, kw.get("tol", 1e-13), kw.get("corrected", False))
    out = []
    for x in xs:
        if x > p.H:
            continue
        jv = j_integral(x, exponent, table, m, p, evaluator=ev)
        out.append((float(x), jv.value, jv.value * x ** exponent))
    return out


# ----------------------------------------------------------------------------
# truncated check of the two mean-square window inequalities
# ----------------------------------------------------------------------------


@dataclass(frozen=True)
class WindowMeanSquareReport:
    T0: float
    Y: float
    H: float
    corrected: bool
    lhs1_upper: float
    lhs1_estimate: float
    rhs1: float
    rhs1_error: float
    lhs2_upper: float
    lhs2_estimate: float
    rhs2: float
    rhs2_error: float
    rhs_tail_bound: float
    lhs_quad_error: float

    @property
    def holds1(self) -> bool:
        return self.lhs1_upper <= self.rhs1 - self.rhs1_error

    @property
    def holds2(self) -> bool:
        return self.lhs2_upper <= self.rhs2 - self.rhs2_error

    @property
    def holds(self) -> bool:
        return self.holds1 and self.holds2

    def rows(self) -> list[tuple[str, float, float]]:
        return [("first", self.lhs1_upper, self.rhs1), ("second", self.lhs2_upper, self.rhs2)]


def window_bounds(cache: PanelCache, t_j: float, k: int) -> tuple[float, float, float, float, float]:
    """I1(t_j), I2(t_j) and bounds valid for every t in [t_j, t_j + width]."""
    i0 = cache.index_of(t_j - cache.width * k + 1e-12 * cache.width)
    win = cache.panels(i0, i0 + 2 * k + 1)
    inner, extra = win[:-1], win[-1]
    err = 2 * math.fsum(pn.err for pn in win)
    i1 = math.fsum(pn.absolute for pn in inner)
    i2 = abs(math.fsum(pn.signed for pn in inner))
    u1 = i1 + extra.absolute + err
    u2 = i2 + inner[0].absolute + extra.absolute + err
    return i1, i2, u1, u2, err


def window_mean_square_check(table: CoeffTable, m: MollifierTable, p: DetectorParams,
                           T0: float, Y: float | None = None, corrected: bool = False,
                           cache: PanelCache | None = None, step: float | None = None,
                           tol: float = 1e-13) -> WindowMeanSquareReport:
    """Both mean-square window inequalities with the t-integrals truncated to |t| <= T0.

    The left sides are bounded from above cell by cell; the right sides are integrated
    to Y only, which lowers them, so the comparison is conservative on both ends.
    """
    if T0 <= 0:
        raise DetectorError("T0 must be positive")
    h1 = p.h1
    if cache is None:
        cache = detector_cache(table, m, p, step)
    w = cache.width
    k = int(round(h1 / w))
    j_lo = int(math.floor((-T0 - cache.origin - h1) / w))
    j_hi = int(math.ceil((T0 - cache.origin - h1) / w))
    s1u = []
    s2u = []
    s1e = []
    s2e = []
    qerr = 0.0
    for j in range(j_lo, j_hi):
        t_j = cache.origin + h1 + j * w
        i1, i2, u1, u2, err = window_bounds(cache, t_j, k)
        s1u.append(u1 * u1)
        s2u.append(u2 * u2)
        s1e.append(i1 * i1)
        s2e.append(i2 * i2)
        qerr += err
    ev = GEvaluator(table, m, p, tol, corrected)
    H = p.H
    if Y is None:
        Y, tail = choose_y_limit(ev, 1.0)
        Y = max(Y, 2 * H)
    tail = ev.majorant_tail_integral(Y)
    g1 = integrate_g(ev, 1.0, Y)
    gH = integrate_g(ev, 1.0, H)
    gL = integrate_g(ev, H, Y, weight=lambda y: 1.0 / math.log(y) ** 2)
    c = 8 * h1 * h1
    return WindowMeanSquareReport(
        T0=float(T0), Y=float(Y), H=H, corrected=corrected,
        lhs1_upper=w * math.fsum(s1u), lhs1_estimate=w * math.fsum(s1e),
        rhs1=c * g1.value, rhs1_error=c * (g1.quad_error + g1.truncation_error),
        lhs2_upper=w * math.fsum(s2u), lhs2_estimate=w * math.fsum(s2e),
        rhs2=c * gH.value + 8 * gL.value,
        rhs2_error=c * (gH.quad_error + gH.truncation_error) + 8 * (gL.quad_error + gL.truncation_error),
        rhs_tail_bound=c * tail, lhs_quad_error=qerr,
    )
