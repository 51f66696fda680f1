"""Special functions and quadrature shared by the numeric modules."""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy import integrate as _sci_integrate
from scipy import special as _sci_special

LOG_SQRT_2PI = 0.5 * math.log(2 * math.pi)

# Lanczos coefficients, g = 7, n = 9 (Godfrey).
_LANCZOS_G = 7.0
_LANCZOS_COEF = np.array(
    [
        0.99999999999980993,
        676.5203681218851,
        -1259.1392167224028,
        771.32342877765313,
        -176.61502916214059,
        12.507343278686905,
        -0.13857109526572012,
        9.9843695780195716e-6,
        1.5056327351493116e-7,
    ]
)


class IntegrationError(RuntimeError):
    """Adaptive quadrature failed to reach the requested tolerance."""

    def __init__(self, message: str, partial: complex, error: float):
        super().__init__(message)
        self.partial = partial
        self.error = error


def _check_pole(s: np.ndarray) -> None:
    bad = (s.imag == 0) & (s.real <= 0) & (s.real == np.round(s.real))
    if np.any(bad):
        raise ValueError(f"log_gamma has a pole at s={s[bad][0].real:g}")


def _lanczos_log_gamma(z: np.ndarray) -> np.ndarray:
    """log Gamma(z) for Re z >= 1/2, continuous branch (real on the positive axis)."""
    zm = z - 1
    acc = np.full(z.shape, _LANCZOS_COEF[0], dtype=np.complex128)
    for i in range(1, len(_LANCZOS_COEF)):
        acc = acc + _LANCZOS_COEF[i] / (zm + i)
    t = zm + _LANCZOS_G + 0.5
    return LOG_SQRT_2PI + (zm + 0.5) * np.log(t) - t + np.log(acc)


def _log_sin_pi(z: np.ndarray) -> np.ndarray:
    """log sin(pi z), continuous in Im z away from the real axis; overflow-safe."""
    out = np.empty(z.shape, dtype=np.complex128)
    big = np.abs(z.imag) > 10
    zb = z[big]
    # sin(pi z) = (e^{i pi z} - e^{-i pi z}) / 2i, keep only the dominant exponential
    sgn = np.sign(zb.imag)
    lead = -1j * np.pi * zb * sgn  # log of the dominant exponential
    rest = np.log1p(-np.exp(2j * np.pi * zb * sgn))
    out[big] = lead + rest - np.log(-2j * sgn)
    out[~big] = np.log(np.sin(np.pi * z[~big]))
    return out


def log_gamma(s):
    """log Gamma(s) for complex s, with reflection for Re s < 1/2.

    The branch is the analytic continuation from the positive real axis along
    vertical lines (differs from log(Gamma) principal value by 2 pi i k).
    Accepts scalars or arrays.
    """
    scalar = np.ndim(s) == 0
    z = np.atleast_1d(np.asarray(s, dtype=np.complex128))
    _check_pole(z)
    out = np.empty(z.shape, dtype=np.complex128)
    right = z.real >= 0.5
    out[right] = _lanczos_log_gamma(z[right])
    if np.any(~right):
        zl = z[~right]
        # Gamma(z) Gamma(1-z) = pi / sin(pi z)
        val = math.log(math.pi) - _log_sin_pi(zl) - _lanczos_log_gamma(1 - zl)
        # pick the branch matching the recurrence continuation: log G(z) = log G(z+n) - sum log(z+j)
        n = np.ceil(0.5 - zl.real).astype(int)
        ref = np.empty(zl.shape, dtype=np.complex128)
        for i, (zi, ni) in enumerate(zip(zl, n)):
            ref[i] = _lanczos_log_gamma(np.array([zi + ni]))[0] - np.sum(np.log(zi + np.arange(ni)))
        val = val + 2j * np.pi * np.round((ref.imag - val.imag) / (2 * np.pi))
        out[~right] = val
    return out[0] if scalar else out


def log_gamma_stirling(s: complex) -> complex:
    """Independent log Gamma: upward recursion to |z| >= 20 then Stirling series."""
    z = complex(s)
    if z.imag == 0 and z.real <= 0 and z.real == round(z.real):
        raise ValueError("pole")
    shift = 0.0 + 0j
    while abs(z) < 20 or z.real < 10:
        shift += cmath.log(z)
        z += 1
    # Bernoulli terms B_{2j} / (2j (2j-1) z^{2j-1})
    bern = [1 / 6, -1 / 30, 1 / 42, -1 / 30, 5 / 66, -691 / 2730, 7 / 6, -3617 / 510]
    series = 0j
    for j, b in enumerate(bern, start=1):
        series += b / (2 * j * (2 * j - 1) * z ** (2 * j - 1))
    return (z - 0.5) * cmath.log(z) - z + LOG_SQRT_2PI + series - shift


def bessel_j(m: int, x):
    """J_m(x) for integer order m >= 0 and x >= 0 (scipy's Amos/Cephes backend)."""
    if m < 0:
        raise ValueError("order must be non-negative")
    x = np.asarray(x, dtype=np.float64)
    if np.any(x < 0):
        raise ValueError("argument must be non-negative")
    out = _sci_special.jv(m, x)
    return float(out) if out.ndim == 0 else out


@dataclass(frozen=True)
class QuadratureSpec:
    abs_tol: float = 1e-12
    rel_tol: float = 1e-10
    max_subdivisions: int = 500

    def __post_init__(self):
        if self.abs_tol <= 0 or self.rel_tol <= 0:
            raise ValueError("tolerances must be positive")
        if self.max_subdivisions < 1:
            raise ValueError("max_subdivisions must be >= 1")


@dataclass(frozen=True)
class QuadResult:
    value: complex
    error: float
    tail_bound: float = 0.0
    upper: float | None = None  # finite truncation point used for an infinite range


def integrate(
    f: Callable[[float], complex],
    a: float,
    b: float,
    spec: QuadratureSpec = QuadratureSpec(),
    decay: tuple[float, float] | None = None,
    points: list[float] | None = None,
) -> QuadResult:
    """Adaptive quadrature of a real or complex integrand on [a, b].

    For ``b = inf`` the caller supplies ``decay = (rate, amplitude)`` certifying
    |f(u)| <= amplitude * exp(-rate (u - a)); the range is cut where that tail
    drops below tolerance/10 and the bound is returned as ``tail_bound``.
    """
    tail = 0.0
    upper = None
    if math.isinf(b):
        if decay is None:
            raise ValueError("infinite range needs a decay certificate (rate, amplitude)")
        rate, amp = decay
        if rate <= 0:
            raise ValueError("decay rate must be positive")
        target = spec.abs_tol / 10
        length = max(0.0, math.log(max(amp / (rate * target), 1.0)) / rate)
        b = a + length
        upper = b
        tail = amp * math.exp(-rate * length) / rate
    if b == a:
        return QuadResult(0.0, 0.0, tail, upper)

    def part(fn):
        val, err, *rest = _sci_integrate.quad(
            fn,
            a,
            b,
            epsabs=spec.abs_tol / 2,
            epsrel=spec.rel_tol,
            limit=spec.max_subdivisions,
            points=points,
            full_output=1,
        )
        if len(rest) >= 2 and rest[0].get("last", 0) >= spec.max_subdivisions or err > max(
            spec.abs_tol, spec.rel_tol * abs(val)
        ):
            raise IntegrationError(
                f"quadrature did not converge on [{a}, {b}] (err {err:.3g})", val, err
            )
        return val, err

    probe = complex(f(0.5 * (a + b)))
    re, re_err = part(lambda u: complex(f(u)).real)
    if probe.imag != 0 or _has_imag(f, a, b):
        im, im_err = part(lambda u: complex(f(u)).imag)
    else:
        im, im_err = 0.0, 0.0
    value = complex(re, im) if (im or probe.imag) else re
    return QuadResult(value, math.hypot(re_err, im_err), tail, upper)


def _has_imag(f, a, b) -> bool:
    for x in np.linspace(a, b, 7):
        if complex(f(float(x))).imag != 0:
            return True
    return False


def gauss_legendre_panels(edges: np.ndarray, order: int) -> tuple[np.ndarray, np.ndarray]:
    """Nodes and weights of composite Gauss-Legendre on consecutive panels ``edges``."""
    x, w = np.polynomial.legendre.leggauss(order)
    lo, hi = edges[:-1, None], edges[1:, None]
    half = 0.5 * (hi - lo)
    nodes = (lo + hi) * 0.5 + half * x[None, :]
    weights = half * w[None, :]
    return nodes.ravel(), weights.ravel()
