"""Twisted (Voronoi-type) summation identity and the Bessel-Mellin contour identity."""

from __future__ import annotations

import cmath
import csv
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from scipy.integrate import quad
from scipy.special import jv

from .arith import mod_inverse
from .forms import CoeffTable
from .specfun import bessel_j
from .sums import SumReport, fsum_complex

KERNELS = ("raised_cosine", "exp_bump")


class VoronoiError(ValueError):
    pass


@dataclass(frozen=True)
class TestKernel:
    """Compactly supported non-negative test function on [u0, u1]."""

    __test__ = False  # not a pytest class

    u0: float
    u1: float
    kind: str = "exp_bump"
    scale: float = 1.0

    def __post_init__(self):
        if not 0 < self.u0 < self.u1:
            raise VoronoiError("kernel support needs 0 < u0 < u1")
        if self.kind not in KERNELS:
            raise VoronoiError(f"unknown kernel {self.kind!r}")

    @property
    def width(self) -> float:
        return self.u1 - self.u0

    def _y(self, t):
        return (2 * np.asarray(t, dtype=np.float64) - self.u0 - self.u1) / self.width

    def __call__(self, t) -> np.ndarray:
        return self.derivative(t, 0)

    def derivative(self, t, order: int = 0) -> np.ndarray:
        """k, k' or k'' evaluated on an array; zero outside the open support."""
        t = np.asarray(t, dtype=np.float64)
        out = np.zeros_like(t)
        inside = (t > self.u0) & (t < self.u1)
        if self.kind == "raised_cosine":
            x = math.pi * (t[inside] - self.u0) / self.width
            c = math.pi / self.width
            vals = [np.sin(x) ** 2, c * np.sin(2 * x), 2 * c * c * np.cos(2 * x)][order]
        else:
            y = self._y(t[inside])
            d = 2 / self.width  # dy/dt
            g = 1 - y * y
            base = np.exp(1 - 1 / g)
            # derivatives of exp(1 - 1/(1-y^2)) in y
            h1 = -2 * y / g ** 2
            h2 = (-2 * g ** 2 - 8 * y * y * g) / g ** 4
            vals = [base, base * h1 * d, base * (h2 + h1 * h1) * d * d][order]
        out[inside] = self.scale * vals
        return out

    def scaled(self, c: float) -> "TestKernel":
        return TestKernel(self.u0, self.u1, self.kind, self.scale * c)


def default_kernel(q: int, kind: str = "exp_bump") -> TestKernel:
    """Support q^2 [1, 30]: k~(n) then decays like the q = 1 transform."""
    return TestKernel(float(q * q), 30.0 * q * q, kind)


# ----------------------------------------------------------------------------
# Bessel transform of the kernel
# ----------------------------------------------------------------------------


@dataclass(frozen=True)
class KTilde:
    n: np.ndarray
    value: np.ndarray
    error: np.ndarray


def _panels_for(n_max: float, q: int, kernel: TestKernel) -> np.ndarray:
    """Panel edges in sqrt(t), each no longer than half a Bessel oscillation at n_max."""
    x0, x1 = math.sqrt(kernel.u0), math.sqrt(kernel.u1)
    omega = 4 * math.pi * math.sqrt(max(n_max, 1.0)) / q
    # the bump is flat to all orders at its ends; keep a floor so those regions are resolved
    count = max(64, int(math.ceil((x1 - x0) * omega / math.pi)))
    return np.linspace(x0, x1, count + 1)


def _bessel_gl(ns: np.ndarray, q: int, weight: int, kernel: TestKernel, edges: np.ndarray,
               order: int) -> np.ndarray:
    x, w = np.polynomial.legendre.leggauss(order)
    h = np.diff(edges)
    xs = (edges[:-1, None] + 0.5 * h[:, None] * (x[None, :] + 1)).ravel()
    ws = (0.5 * h[:, None] * w[None, :]).ravel()
    kvals = kernel(xs * xs) * 2 * xs * ws  # dt = 2x dx
    keep = kvals != 0
    xs, kvals = xs[keep], kvals[keep]
    out = np.empty(len(ns), dtype=np.float64)
    for i, n in enumerate(ns):
        out[i] = np.dot(kvals, jv(weight - 1, 4 * math.pi * math.sqrt(n) * xs / q))
    return out


def k_tilde(ns, q: int, kernel: TestKernel, weight: int, order: int = 16,
            check_order: int = 10) -> KTilde:
    """k~(n) = (2 pi i^k / q) int k(t) J_{k-1}(4 pi sqrt(n t)/q) dt, oscillation-resolved."""
    ns = np.atleast_1d(np.asarray(ns, dtype=np.float64))
    if q < 1 or np.any(ns < 1):
        raise VoronoiError("need n, q >= 1")
    values = np.empty(len(ns))
    errors = np.empty(len(ns))
    # group n in blocks sharing one panel layout
    order_idx = np.argsort(ns)
    block = 256
    for b in range(0, len(ns), block):
        idx = order_idx[b:b + block]
        edges = _panels_for(float(ns[idx].max()), q, kernel)
        hi = _bessel_gl(ns[idx], q, weight, kernel, edges, order)
        lo = _bessel_gl(ns[idx], q, weight, kernel, edges, check_order)
        values[idx] = hi
        errors[idx] = np.abs(hi - lo)
    pref = 2 * math.pi * (1j ** weight) / q
    return KTilde(ns, pref * values, abs(pref) * errors)


# ----------------------------------------------------------------------------
# the twisted identity
# ----------------------------------------------------------------------------


@dataclass(frozen=True)
class VoronoiResult:
    form: str
    a: int
    q: int
    kernel: TestKernel
    lhs: complex
    rhs: complex
    rhs_terms: int
    tail_estimate: float
    quad_error: float

    @property
    def residual(self) -> float:
        return abs(self.lhs - self.rhs)

    @property
    def relative_residual(self) -> float:
        scale = max(abs(self.lhs), abs(self.rhs))
        return self.residual / scale if scale else 0.0

    @property
    def phase_ratio(self) -> complex:
        """rhs / lhs; a unit-modulus value away from 1 points at a phase convention."""
        return self.rhs / self.lhs if self.lhs else complex("nan")

    def report(self) -> SumReport:
        return SumReport("voronoi", {"form": self.form, "a": self.a, "q": self.q,
                                     "kernel": self.kernel.kind},
                         self.lhs, self.rhs, tail_bound=self.tail_estimate)


def _twist(n: np.ndarray, a: int, q: int) -> np.ndarray:
    frac = (a * n.astype(np.int64)) % q
    return np.exp(2j * math.pi * frac / q)


def twisted_identity_check(a: int, q: int, kernel: TestKernel | None, table: CoeffTable,
                           tol: float = 1e-9, n_start: int = 256) -> VoronoiResult:
    """Both sides of sum r(n) k(n) e(an/q) = conj chi(a) sum r(n) e(-a* n/q) k~(n)."""
    D = table.form.level
    if q % D:
        raise VoronoiError(f"q={q} must be divisible by the level {D}")
    if math.gcd(a, q) != 1:
        raise VoronoiError(f"gcd(a, q) must be 1, got a={a}, q={q}")
    kernel = kernel or default_kernel(q)
    if kernel.u1 >= table.n_max:
        raise VoronoiError("coefficient table does not cover the kernel support")
    astar = mod_inverse(a % q, q) if q > 1 else 0
    chi_bar = np.conj(table.form.chi(a % D if D > 1 else 1))

    n = np.arange(int(math.ceil(kernel.u0)), int(math.floor(kernel.u1)) + 1)
    lhs_terms = table.r[n] * kernel(n.astype(np.float64)) * _twist(n, a, q)
    lhs = fsum_complex(lhs_terms)

    terms: list[np.ndarray] = []
    qerr = 0.0
    lo, hi = 1, n_start
    total = 0j
    while True:
        if hi > table.n_max:
            raise VoronoiError(f"dual side needs more than {table.n_max} coefficients")
        m = np.arange(lo, hi + 1)
        kt = k_tilde(m, q, kernel, table.form.weight)
        chunk = table.r[m] * _twist(m, -astar, q) * kt.value
        terms.append(chunk)
        qerr += float(np.sum(np.abs(table.r[m]) * kt.error))
        block = float(np.sum(np.abs(chunk)))
        total = fsum_complex(np.concatenate(terms))
        if block < tol * max(abs(total), abs(lhs), 1e-300) and lo > 1:
            break
        lo, hi = hi + 1, 2 * hi
    rhs = chi_bar * total
    return VoronoiResult(table.form.name, a, q, kernel, lhs, complex(rhs), hi, block, qerr)


VORONOI_HEADER = ["form", "a", "q", "kernel", "u0", "u1", "lhs_re", "lhs_im", "rhs_re", "rhs_im",
                  "residual"]


def write_voronoi(results: list[VoronoiResult], path: str | Path) -> None:
    with Path(path).open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(VORONOI_HEADER)
        for r in results:
            nums = (r.kernel.u0, r.kernel.u1, r.lhs.real, r.lhs.imag, r.rhs.real, r.rhs.imag,
                    r.relative_residual)
            w.writerow([r.form, r.a, r.q, r.kernel.kind] + [repr(float(x)) for x in nums])


# ----------------------------------------------------------------------------
# Bessel-Mellin contour identity
# ----------------------------------------------------------------------------


@dataclass(frozen=True)
class BesselMellinResult:
    a: float
    b: float
    k: int
    c: float
    height: float
    contour: complex
    closed_form: float
    quad_error: float
    tail_error: float

    @property
    def residual(self) -> float:
        return abs(self.contour - self.closed_form)

    @property
    def relative_residual(self) -> float:
        return self.residual / abs(self.closed_form) if self.closed_form else self.residual

    def report(self) -> SumReport:
        return SumReport("bessel_mellin", {"a": self.a, "b": self.b, "k": self.k, "c": self.c},
                         self.contour, complex(self.closed_form),
                         tail_bound=self.tail_error + self.quad_error)


def _g_derivs(s: complex, b: float, k: int, count: int) -> list[complex]:
    """g, g', g'', ... for g(s) = exp(-b/s) s^{-k} by the recursion on h = -b/s - k ln s."""
    # h^{(j)}(s): h' = b/s^2 - k/s, h^{(j)} = (-1)^{j+1} (j! b / s^{j+1}) ... closed forms
    hd = [0j]
    for j in range(1, count + 1):
        hb = (-1) ** (j + 1) * math.factorial(j) * b / s ** (j + 1)
        hk = (-1) ** j * math.factorial(j - 1) * k / s ** j
        hd.append(hb + hk)
    # complete Bell polynomials via g^{(j+1)} = sum_i C(j,i) h^{(i+1)} g^{(j-i)}
    g = [cmath.exp(-b / s) * s ** (-k)]
    for j in range(count):
        g.append(sum(math.comb(j, i) * hd[i + 1] * g[j - i] for i in range(j + 1)))
    return g


def _antiderivative(a: float, b: float, k: int, s: complex, terms: int = 6) -> tuple[complex, float]:
    """Asymptotic antiderivative e^{as} sum_j (-1)^j g^{(j)}(s)/a^{j+1} of e^{as} g(s), with
    the first omitted term (doubled) as its error."""
    g = _g_derivs(s, b, k, terms)
    e = cmath.exp(a * s)
    acc = sum((-1) ** j * g[j] / a ** (j + 1) for j in range(terms))
    return e * acc, 2 * abs(e * g[terms] / a ** (terms + 1))


def bessel_mellin_check(a: float, b: float, k: int, c: float = 1.0, height: float = 400.0,
                        tol: float = 1e-12) -> BesselMellinResult:
    """(1/2 pi i) int_{(c)} e^{a s - b/s} s^{-k} ds against (a/b)^{(k-1)/2} J_{k-1}(2 sqrt(ab))."""
    if a <= 0 or b <= 0 or c <= 0 or k < 1:
        raise VoronoiError("need a, b, c > 0 and k >= 1")
    ec = math.exp(a * c)

    def g(y):
        s = complex(c, y)
        return cmath.exp(-b / s) * s ** (-k) * ec

    core = min(20.0, height)
    errs = []

    def piece(fn, lo, hi, **kw):
        val, err = quad(fn, lo, hi, limit=2000, epsabs=tol, **kw)
        errs.append(err)
        return val

    def full(y):
        return g(y) * cmath.exp(1j * a * y)

    # the peak near y = 0 with plain quadrature, the oscillatory wings with cos/sin weights
    central = complex(piece(lambda y: full(y).real, -core, core, points=[0.0]),
                      piece(lambda y: full(y).imag, -core, core, points=[0.0]))
    for lo, hi in ((-height, -core), (core, height)):
        if hi <= lo:
            continue
        rc = piece(lambda y: g(y).real, lo, hi, weight="cos", wvar=a)
        rs = piece(lambda y: g(y).real, lo, hi, weight="sin", wvar=a)
        ic = piece(lambda y: g(y).imag, lo, hi, weight="cos", wvar=a)
        is_ = piece(lambda y: g(y).imag, lo, hi, weight="sin", wvar=a)
        central += complex(rc - is_, rs + ic)
    top, top_err = _antiderivative(a, b, k, complex(c, height))
    bottom, bottom_err = _antiderivative(a, b, k, complex(c, -height))
    # the two infinite pieces are A(c - iH) - A(-i inf) and A(i inf) - A(c + iH), A -> 0
    total = central / (2 * math.pi) + (bottom - top) / (2j * math.pi)
    tail_err = (top_err + bottom_err) / (2 * math.pi)
    if tail_err > tol:
        raise VoronoiError(f"contour height {height} too small: tail error {tail_err:.1e}")
    closed = (a / b) ** ((k - 1) / 2) * bessel_j(k - 1, 2 * math.sqrt(a * b))
    return BesselMellinResult(a, b, k, c, height, complex(total), float(closed),
                              sum(errs) / (2 * math.pi), tail_err)
