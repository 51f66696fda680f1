"""L(s), the completed function Lambda(s), the rotated critical-line function, zeros.

Two independent evaluators are provided.

``ray``        Mellin integral of the q-expansion along a ray arg y = psi,
               split at |y| = rho0 and folded with the modular relation
               F(y) = theta y^{-k} conj-F(1/y). Turning psi towards pi/2 removes
               the exp(-pi|t|/2) cancellation, so the integrand is O(1) where
               the result is O(exp(-c)) with a small fixed c.
``dirichlet``  Smoothed Dirichlet series sum r(n) n^{-s} W(n/N) with
               W(x) = Gamma(m+1, x)/m!, whose Mellin transform has no poles at
               -1..-m; gives L(s) with an explicit truncation majorant.

All Lambda values are returned as (log-modulus, phase) pairs.
"""

from __future__ import annotations

import cmath
import csv
import logging
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy import special as sp

from .forms import CoeffTable
from .specfun import gauss_legendre_panels, log_gamma

log = logging.getLogger(__name__)

TWO_PI = 2 * math.pi
# dynamic range (natural log) kept by the ray integrator
_RANGE = 42.0
_GL_ORDER = 16


class InsufficientCoefficients(ValueError):
    def __init__(self, needed: int, have: int):
        super().__init__(f"need coefficients up to n={needed}, table has n_max={have}")
        self.needed = needed


class PhaseTrackingError(RuntimeError):
    pass


@dataclass(frozen=True)
class LogValue:
    """A complex number exp(logmod + i phase)."""

    logmod: float
    phase: float

    @classmethod
    def from_complex(cls, z: complex) -> "LogValue":
        if z == 0:
            return cls(-math.inf, 0.0)
        return cls(math.log(abs(z)), cmath.phase(z))

    def to_complex(self, log_scale: float = 0.0) -> complex:
        if self.logmod == -math.inf:
            return 0j
        return cmath.exp(complex(self.logmod + log_scale, self.phase))

    def __mul__(self, other: "LogValue") -> "LogValue":
        return LogValue(self.logmod + other.logmod, self.phase + other.phase)


def log_gamma_factor(s: complex, table: CoeffTable) -> complex:
    """log of (2 pi / sqrt D)^{-s-(k-1)/2} Gamma(s + (k-1)/2)."""
    kappa = 0.5 * (table.weight - 1)
    out = (s + kappa) * math.log(math.sqrt(table.level) / TWO_PI) + log_gamma(s + kappa)
    return complex(out) if np.ndim(out) == 0 else out


# ----------------------------------------------------------------------------
# ray evaluator
# ----------------------------------------------------------------------------


def ray_angle(t: float, cancel: float = 6.0) -> float:
    """Rotation angle: cancellation in the ray integral is about exp(cancel)."""
    if t == 0:
        return 0.0
    return math.copysign(max(0.0, math.pi / 2 - cancel / abs(t)), t)


def _term_cutoff(u_lo: float, cospsi: float, sqrt_d: float, kappa: float) -> int:
    rate = TWO_PI * u_lo * cospsi / sqrt_d
    n = max(1.0, _RANGE / rate)
    for _ in range(30):
        n = (_RANGE + (kappa + 1) * math.log(n + 1)) / rate
    return int(math.ceil(n)) + 1


def _ray_integral(
    coeffs: np.ndarray,
    expo: complex,
    psi: float,
    u_lo: float,
    sqrt_d: float,
    kappa: float,
    t_abs: float,
    order: int = _GL_ORDER,
) -> complex:
    """int_{u_lo}^inf F_c(u e^{i psi}) u^{expo-1} du with F_c(y) = sum_n c(n) exp(-2 pi n y / sqrt D)."""
    cospsi = math.cos(psi)
    p = max(expo.real, 0.0) + 1.0
    upper = sqrt_d * _RANGE / (TWO_PI * cospsi)
    for _ in range(30):
        upper = sqrt_d * (_RANGE + p * math.log(max(upper, 1.0))) / (TWO_PI * cospsi)
    upper = max(upper, u_lo * 1.5)
    v_lo, v_hi = math.log(u_lo), math.log(upper)
    omega = t_abs + _RANGE * (1.0 + abs(math.tan(psi))) + abs(expo.imag) + 1.0
    n_panels = max(4, int(math.ceil((v_hi - v_lo) * omega / (1.5 * TWO_PI))))
    edges = np.linspace(v_lo, v_hi, n_panels + 1)
    n_need = _term_cutoff(u_lo, cospsi, sqrt_d, kappa)
    if n_need >= len(coeffs):
        raise InsufficientCoefficients(n_need, len(coeffs) - 1)
    total = 0j
    rot = cmath.exp(1j * psi)
    block = 32
    for start in range(0, n_panels, block):
        sub = edges[start : min(start + block, n_panels) + 1]
        v, wts = gauss_legendre_panels(sub, order)
        u_min = math.exp(sub[0])
        n_cut = min(n_need, _term_cutoff(u_min, cospsi, sqrt_d, kappa))
        n = np.arange(1, n_cut + 1, dtype=np.float64)
        y = np.exp(v) * rot
        mat = np.exp(np.outer(y * (-TWO_PI / sqrt_d), n))
        fvals = mat @ coeffs[1 : n_cut + 1]
        total += np.sum(wts * fvals * np.exp(v * expo))
    return complex(total)


def completed_ray(
    s: complex, table: CoeffTable, rho0: float = 1.0, cancel: float = 6.0, order: int = _GL_ORDER
) -> LogValue:
    """Lambda(s) by the split ray integral (needs the root number)."""
    s = complex(s)
    k, theta = table.weight, table.theta
    kappa = 0.5 * (k - 1)
    w = s + kappa
    psi = ray_angle(s.imag, cancel)
    sqd = math.sqrt(table.level)
    a = table.a
    i1 = _ray_integral(a, w, psi, rho0, sqd, kappa, abs(s.imag), order)
    i2 = _ray_integral(np.conj(a), k - w, -psi, 1.0 / rho0, sqd, kappa, abs(s.imag), order)
    bracket = i1 + theta * cmath.exp(-1j * psi * k) * i2
    pre = 1j * psi * w
    if bracket == 0:
        return LogValue(-math.inf, 0.0)
    return LogValue(pre.real + math.log(abs(bracket)), pre.imag + cmath.phase(bracket))


def completed_direct(s: complex, table: CoeffTable) -> LogValue:
    """Lambda(s) = int_0^inf F(y) y^{s+(k-1)/2-1} dy on the real axis; no root number used.

    Accurate only for small |Im s| (cancellation ~ exp(pi |t| / 2)).
    """
    s = complex(s)
    k = table.weight
    kappa = 0.5 * (k - 1)
    w = s + kappa
    sqd = math.sqrt(table.level)
    # below y_lo, F(y) ~ y^{-k} exp(-2 pi / (sqrt(D) y)) is beyond the kept range
    y_lo = 1.0
    for _ in range(40):
        y_lo = TWO_PI / (sqd * (_RANGE + (k + abs(w.real) + 1) * abs(math.log(y_lo))))
    val = _ray_integral(table.a, w, 0.0, y_lo, sqd, kappa, abs(s.imag))
    return LogValue.from_complex(val)


# ----------------------------------------------------------------------------
# smoothed Dirichlet series evaluator
# ----------------------------------------------------------------------------


@dataclass(frozen=True)
class DirichletPlan:
    m: int
    scale: float
    n_cut: int
    error_bound: float


def _smoothing_error(s: complex, table: CoeffTable, m: int, scale: float) -> float:
    """Majorant of |sum r(n) n^-s W(n/N) - L(s)| from shifting to Re z = -(m + 1/2)."""
    c = m + 0.5
    sigma = s.real
    zeta_bound = float(sp.zeta(1 - sigma + c)) ** 2
    # offset grid: never lands on a pole of the gamma factor
    y = np.linspace(-60, 60, 1201) + 1e-3 * math.pi
    z = -c + 1j * y
    sz = s + z
    ratio = (log_gamma_factor(1 - sz, table) - log_gamma_factor(sz, table)).real
    wt = (sp.loggamma(z + m + 1)).real - np.log(np.abs(z)) - math.lgamma(m + 1)
    integrand = np.exp(wt + ratio - c * math.log(scale))
    return float(np.trapezoid(integrand, y) / TWO_PI * zeta_bound)


def _tail_bound(sigma: float, m: int, scale: float, n_cut: int) -> float:
    # tau(n) <= 2 sqrt(n); W decreasing
    x0 = n_cut / scale
    xs = x0 + np.linspace(0, 80 + m, 4001)
    f = 2 * (xs * scale) ** (0.5 - sigma) * sp.gammaincc(m + 1, xs)
    return float(np.trapezoid(f, xs) * scale)


_PLAN_SHAPES: dict[tuple, tuple[int, float]] = {}


def plan_dirichlet(s: complex, table: CoeffTable, tol: float = 1e-11) -> DirichletPlan:
    """Smoothing order and scale for s. The search runs once per (sigma, ceil|t|) block;
    the error bound is always evaluated at s itself."""
    s = complex(s)
    key = (table.form.name, table.n_max, round(s.real, 9), math.ceil(abs(s.imag)))
    shape = _PLAN_SHAPES.get(key)
    if shape is None:
        block = complex(s.real, math.copysign(math.ceil(abs(s.imag)), s.imag or 1.0))
        p = _search_plan(block, table)
        shape = _PLAN_SHAPES[key] = (p.m, p.scale)
    m, scale = shape
    err = _smoothing_error(s, table, m, scale) + _tail_bound(s.real, m, scale, table.n_max)
    if err > tol:
        log.debug("dirichlet plan at s=%s reaches only %.3g", s, err)
    return DirichletPlan(m, scale, table.n_max, err)


def _search_plan(s: complex, table: CoeffTable) -> DirichletPlan:
    best = None
    for m in range(4, 17):
        for frac in (25.0, 35.0, 45.0, 55.0):
            scale = table.n_max / frac
            n_cut = table.n_max
            err = _smoothing_error(s, table, m, scale) + _tail_bound(s.real, m, scale, n_cut)
            if best is None or err < best.error_bound:
                best = DirichletPlan(m, scale, n_cut, err)
    return best


def l_dirichlet(s: complex, table: CoeffTable, plan: DirichletPlan | None = None) -> tuple[complex, float]:
    """Smoothed series value of L(s) and its error majorant."""
    s = complex(s)
    plan = plan or plan_dirichlet(s, table)
    n = np.arange(1, plan.n_cut + 1, dtype=np.float64)
    wts = sp.gammaincc(plan.m + 1, n / plan.scale)
    terms = table.r[1 : plan.n_cut + 1] * wts * np.exp(-s * np.log(n))
    return complex(math.fsum(terms.real), math.fsum(terms.imag)), plan.error_bound


def l_series(s: complex, table: CoeffTable, n_terms: int | None = None) -> tuple[complex, float]:
    """Plain partial sum for Re s > 1 with a tau(n)-majorized tail bound."""
    s = complex(s)
    if s.real <= 1:
        raise ValueError("plain series needs Re s > 1")
    n_terms = n_terms or table.n_max
    if n_terms > table.n_max:
        raise InsufficientCoefficients(n_terms, table.n_max)
    n = np.arange(1, n_terms + 1, dtype=np.float64)
    terms = table.r[1 : n_terms + 1] * np.exp(-s * np.log(n))
    # sum_{n>N} tau(n) n^{-sigma} <= sum 2 sqrt(n) n^{-sigma} <= 2 N^{3/2-sigma} / (sigma - 3/2) for sigma > 3/2
    sigma = s.real
    if sigma > 1.5:
        tail = 2 * n_terms ** (1.5 - sigma) / (sigma - 1.5)
    else:
        # tau(n) <= C_eps n^eps with eps=(sigma-1)/2, C_eps from the standard bound prod over p<2^{1/eps}
        eps = (sigma - 1) / 2
        c_eps = _tau_eps_constant(eps)
        tail = c_eps * n_terms ** (1 + eps - sigma) / (sigma - 1 - eps)
    return complex(math.fsum(terms.real), math.fsum(terms.imag)), tail


def _tau_eps_constant(eps: float) -> float:
    """C with tau(n) <= C n^eps for all n (product over primes p < 2^{1/eps})."""
    from .arith import primes_up_to

    bound = 1.0
    for p in primes_up_to(int(2 ** (1 / eps)) + 1).tolist():
        best = 1.0
        for e in range(1, 200):
            best = max(best, (e + 1) / p ** (e * eps))
        bound *= best
    return bound


def l_value(s: complex, table: CoeffTable, method: str = "ray", **kw) -> tuple[complex, float]:
    """L(s) with an error estimate.

    ``series``: Re s > 1 partial sum. ``dirichlet``: smoothed series (any s).
    ``ray``: Lambda(s) / gamma factor (needs the root number).
    """
    s = complex(s)
    if method == "series":
        return l_series(s, table, **kw)
    if method == "dirichlet":
        return l_dirichlet(s, table, **kw)
    if method == "ray":
        lam = completed_ray(s, table, **kw)
        lg = log_gamma_factor(s, table)
        val = cmath.exp(complex(lam.logmod - lg.real, lam.phase - lg.imag))
        lam2 = completed_ray(s, table, order=_GL_ORDER + 8, **kw)
        val2 = cmath.exp(complex(lam2.logmod - lg.real, lam2.phase - lg.imag))
        return val, abs(val - val2) + 1e-15 * abs(val)
    raise ValueError(f"unknown method {method!r}")


def completed(s: complex, table: CoeffTable, method: str = "ray", **kw) -> LogValue:
    """Lambda(s) in log form, by the ray integral, the direct integral, or the smoothed series."""
    s = complex(s)
    if method == "ray":
        return completed_ray(s, table, **kw)
    if method == "direct":
        return completed_direct(s, table)
    if method == "dirichlet":
        val, _ = l_dirichlet(s, table, **kw)
        lg = log_gamma_factor(s, table)
        lv = LogValue.from_complex(val)
        return LogValue(lv.logmod + lg.real, lv.phase + lg.imag)
    raise ValueError(f"unknown method {method!r}")


def completed_naive(s: complex, table: CoeffTable) -> complex:
    """Direct product (2pi/sqrt D)^{-s-kappa} Gamma(s+kappa) L(s), Re s > 1, small |s|."""
    kappa = 0.5 * (table.weight - 1)
    lval, _ = l_series(s, table)
    return (TWO_PI / math.sqrt(table.level)) ** (-s - kappa) * complex(sp.gamma(s + kappa)) * lval


# ----------------------------------------------------------------------------
# root number
# ----------------------------------------------------------------------------


class RootNumberError(RuntimeError):
    pass


def root_number(table: CoeffTable, probe: complex = 0.7 + 0.25j, tol: float = 1e-8) -> complex:
    """theta = Lambda(s0) / conj(Lambda(1 - conj s0)) from root-number-free evaluations.

    Checked for stability across three probes s0, s0 + i, s0 + 2i.
    """
    for shift in (0.0, 0.37, 0.81):
        probes = [probe + shift + 1j * j for j in range(3)]
        thetas = []
        for s0 in probes:
            num = completed_direct(s0, table)
            den = completed_direct(1 - s0.conjugate(), table)
            if num.logmod < math.log(1e-6) or den.logmod < math.log(1e-6):
                break
            thetas.append(cmath.exp(complex(num.logmod - den.logmod, num.phase + den.phase)))
        if len(thetas) < 3:
            continue
        spread = max(abs(x - thetas[0]) for x in thetas)
        if spread <= tol and abs(abs(thetas[0]) - 1) <= tol:
            return thetas[0]
    raise RootNumberError("no stable root number found at the probe points")


def attach_root_number(table: CoeffTable) -> CoeffTable:
    """Return a table whose form carries the computed root number."""
    if table.form.root_number is not None:
        return table
    theta = root_number(table)
    return table.with_form(table.form.with_root_number(theta))


def fe_residual(s: complex, table: CoeffTable, rho_a: float = 1.0, rho_b: float = 1.25) -> float:
    """|Lambda(s) - theta conj Lambda(1 - conj s)| / max(|Lambda(s)|, 1e-30).

    The two sides use different contour splits so the check is not an identity
    of the evaluator.
    """
    s = complex(s)
    lhs = completed_ray(s, table, rho0=rho_a)
    rhs = completed_ray(1 - s.conjugate(), table, rho0=rho_b)
    # compare at a common scale
    scale = -lhs.logmod if math.isfinite(lhs.logmod) else 0.0
    a = lhs.to_complex(scale)
    b = table.theta * rhs.to_complex(scale).conjugate()
    return abs(a - b) / max(abs(a), 1e-30 * math.exp(scale))


# ----------------------------------------------------------------------------
# Hardy-type function on the critical line
# ----------------------------------------------------------------------------


@dataclass(frozen=True)
class LineSample:
    t: float
    lambda_log: LogValue
    z: float
    eval_error: float


def rotated(lam: LogValue, theta: complex, log_scale: float) -> complex:
    """theta^{-1/2} Lambda scaled by exp(log_scale)."""
    rot = -0.5 * cmath.phase(theta)
    return cmath.exp(complex(lam.logmod + log_scale, lam.phase + rot))


def hardy_z(t: float, table: CoeffTable, method: str = "ray") -> LineSample:
    """Z(t) = Re(theta^{-1/2} Lambda(1/2+it)) e^{pi|t|/2}; Im part kept as evidence."""
    t = float(t)
    lam = completed(0.5 + 1j * t, table, method=method)
    val = rotated(lam, table.theta, math.pi * abs(t) / 2)
    mod = abs(val)
    err = abs(val.imag) / mod if mod > 0 else 0.0
    return LineSample(t, lam, val.real, err)


def hardy_z_values(ts, table: CoeffTable, method: str = "ray") -> np.ndarray:
    return np.array([hardy_z(t, table, method).z for t in ts])


# ----------------------------------------------------------------------------
# zeros
# ----------------------------------------------------------------------------


@dataclass
class ZeroRecord:
    t: float
    z_left: float
    z_right: float
    refined: float
    err: float


@dataclass
class ZeroReport:
    T: float
    ordinates: list[float]
    count_argument: int
    count_signs: int
    records: list[ZeroRecord] = field(default_factory=list)


def _bisect(f, lo: float, hi: float, flo: float, fhi: float, tol: float) -> tuple[float, float, float]:
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        fm = f(mid)
        if fm == 0:
            return mid, mid, 0.0
        if (fm > 0) == (flo > 0):
            lo, flo = mid, fm
        else:
            hi, fhi = mid, fm
    return lo, hi, 0.5 * (lo + hi)


def refine_zero(f, lo: float, hi: float, tol: float = 1e-9) -> tuple[float, float]:
    """Bisection to ``tol`` then one Newton polish with a centred difference."""
    flo, fhi = f(lo), f(hi)
    if flo * fhi > 0:
        raise ValueError("interval does not bracket a sign change")
    lo, hi, mid = _bisect(f, lo, hi, flo, fhi, tol)
    h = max(tol, 1e-7)
    d = (f(mid + h) - f(mid - h)) / (2 * h)
    if d != 0:
        cand = mid - f(mid) / d
        if lo - tol <= cand <= hi + tol:
            mid = cand
    return mid, hi - lo


def scan_sign_changes(f, a: float, b: float, step: float = 0.05, min_step: float = 1e-4):
    """Sign-change brackets of f on (a, b]; zero-valued samples are stepped around."""
    n = max(1, int(math.ceil((b - a) / step)))
    ts = np.linspace(a, b, n + 1)
    vals = []
    for t in ts:
        v = f(t)
        h = step / 8
        while v == 0 and h >= min_step:
            v = f(t + h)
            h /= 2
        vals.append(v)
    brackets = []
    for i in range(n):
        if vals[i] * vals[i + 1] < 0:
            brackets.append((float(ts[i]), float(ts[i + 1]), vals[i], vals[i + 1]))
    return brackets


def find_zeros(table: CoeffTable, T: float, step: float = 0.05, start: float = 0.0,
               method: str = "ray", tol: float = 1e-9) -> list[ZeroRecord]:
    def f(t):
        return hardy_z(t, table, method).z

    out = []
    for lo, hi, flo, fhi in scan_sign_changes(f, max(start, 1e-9), T, step):
        root, width = refine_zero(f, lo, hi, tol)
        out.append(ZeroRecord(root, flo, fhi, root, width))
    return out


def argument_count(table: CoeffTable, T: float, sigma_lo: float = -0.5, sigma_hi: float = 1.5,
                   step: float = 0.1, min_step: float = 1e-5) -> int:
    """Winding number of Lambda around the rectangle [sigma_lo, sigma_hi] x [0, T]."""
    corners = [complex(sigma_lo, 0), complex(sigma_hi, 0), complex(sigma_hi, T),
               complex(sigma_lo, T), complex(sigma_lo, 0)]

    def phase(s):
        return completed_ray(s, table).phase

    total = 0.0
    for z0, z1 in zip(corners[:-1], corners[1:]):
        length = abs(z1 - z0)
        pos = 0.0
        ph = phase(z0)
        h = min(step, length)
        while pos < length - 1e-15:
            h = min(h, length - pos)
            nxt = phase(z0 + (z1 - z0) * (pos + h) / length)
            d = (nxt - ph + math.pi) % (2 * math.pi) - math.pi
            if abs(d) > math.pi / 2:
                h /= 2
                if h < min_step:
                    raise PhaseTrackingError(f"phase jump at {z0 + (z1 - z0) * pos / length}")
                continue
            total += d
            ph = nxt
            pos += h
            h = min(step, 2 * h)
    count = total / (2 * math.pi)
    if abs(count - round(count)) > 1e-3:
        raise PhaseTrackingError(f"non-integral winding {count}")
    return int(round(count))


def count_zeros(T: float, table: CoeffTable, step: float = 0.05) -> ZeroReport:
    """Zero count by argument principle and by sign changes of Z on (0, T]."""
    # nudge T away from a zero ordinate
    for _ in range(20):
        if abs(hardy_z(T, table).z) > 0 and not _near_zero(T, table):
            break
        T += 2e-3
    zeros = find_zeros(table, T, step)
    n_arg = argument_count(table, T)
    return ZeroReport(T, [z.refined for z in zeros], n_arg, len(zeros), zeros)


def _near_zero(T: float, table: CoeffTable) -> bool:
    a, b = hardy_z(T - 1e-3, table).z, hardy_z(T + 1e-3, table).z
    return a * b <= 0


ZERO_HEADER = ["t", "z_left", "z_right", "refined", "err"]


def write_zeros(report: ZeroReport, path: str | Path) -> None:
    with Path(path).open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(ZERO_HEADER)
        for r in report.records:
            w.writerow([repr(float(x)) for x in (r.t, r.z_left, r.z_right, r.refined, r.err)])
