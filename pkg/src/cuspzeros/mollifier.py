"""Selberg's mollifier and the mollified critical-line detector function."""

from __future__ import annotations

import cmath
import csv
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .arith import primes_up_to
from .forms import CoeffTable
from .lfunc import LogValue, completed_ray

# mollifier support: squarefree integers with all prime factors above this bound
SUPPORT_PRIME_FLOOR = 256
DELTA0 = 0.1


@dataclass(frozen=True)
class MollifierTable:
    """alpha(nu) and beta(nu) = alpha(nu) (1 - ln nu / ln X)^+ on the support nu < X."""

    X: float
    nus: np.ndarray  # ascending support, int64
    alpha: np.ndarray  # complex128
    beta: np.ndarray  # complex128

    def __post_init__(self):
        if self.X < 3:
            raise ValueError("X must be >= 3")

    def alpha_of(self, nu: int) -> complex:
        i = np.searchsorted(self.nus, nu)
        if i < len(self.nus) and self.nus[i] == nu:
            return complex(self.alpha[i])
        return 0j

    def beta_of(self, nu: int) -> complex:
        i = np.searchsorted(self.nus, nu)
        if i < len(self.nus) and self.nus[i] == nu:
            return complex(self.beta[i])
        return 0j

    @property
    def is_trivial(self) -> bool:
        return len(self.nus) == 1

    def as_dict(self) -> dict[int, complex]:
        return {int(n): complex(b) for n, b in zip(self.nus, self.beta)}


@dataclass(frozen=True)
class DetectorParams:
    delta: float
    h1: float
    X: float
    regime_flag: bool = field(init=False)

    def __post_init__(self):
        if not 0 < self.delta < DELTA0:
            raise ValueError(f"delta must lie in (0, {DELTA0})")
        if not 0 < self.h1 < 1:
            raise ValueError("h1 must lie in (0, 1)")
        if self.X < 3:
            raise ValueError("X must be >= 3")
        # advisory: outside the regime delta X^86 e^{1/h1} <= 1 (permitted)
        log_lhs = math.log(self.delta) + 86 * math.log(self.X) + 1 / self.h1
        object.__setattr__(self, "regime_flag", log_lhs > 0)

    @property
    def H(self) -> float:
        return math.exp(1 / self.h1)


def alpha_support(X: float, n_max: int | None = None) -> list[tuple[int, tuple[int, ...]]]:
    """Squarefree nu < X built from primes in (256, X), depth-first, with their prime sets."""
    primes = [p for p in primes_up_to(int(math.ceil(X))).tolist() if p > SUPPORT_PRIME_FLOOR and p < X]
    if n_max is not None and primes and primes[-1] > n_max:
        raise ValueError(f"X={X} exceeds the coefficient coverage n_max={n_max}")
    out = [(1, ())]

    def extend(start: int, value: int, factors: tuple[int, ...]):
        for i in range(start, len(primes)):
            nv = value * primes[i]
            if nv >= X:
                break
            out.append((nv, factors + (primes[i],)))
            extend(i + 1, nv, factors + (primes[i],))

    extend(0, 1, ())
    out.sort()
    return out


def alpha_value(factors: tuple[int, ...], table: CoeffTable) -> complex:
    val = 1.0 + 0j
    for p in factors:
        val *= -table.r[p] / 2
    return val


def build_mollifier(table: CoeffTable, X: float) -> MollifierTable:
    """Coefficients of prod_{p>256} (1 - r(p) p^{-s} / 2) cut to nu < X, and the weights beta."""
    if X < 3:
        raise ValueError("X must be >= 3")
    support = alpha_support(X, table.n_max)
    nus = np.array([n for n, _ in support], dtype=np.int64)
    alpha = np.array([alpha_value(f, table) for _, f in support], dtype=np.complex128)
    weight = np.maximum(0.0, 1 - np.log(nus.astype(np.float64)) / math.log(X))
    return MollifierTable(float(X), nus, alpha, alpha * weight)


def phi(s: complex, m: MollifierTable) -> complex:
    """phi(s) = sum_{nu <= X} beta(nu) nu^{-s}."""
    s = complex(s)
    terms = m.beta * np.exp(-s * np.log(m.nus.astype(np.float64)))
    return complex(math.fsum(terms.real), math.fsum(terms.imag))


@dataclass(frozen=True)
class DetectorSample:
    t: float
    value: LogValue  # frak F(t) in log form
    rotated: float  # theta^{-1/2} frak F(t), real up to evaluation error
    imag_residual: float  # |Im| / |value| of the rotated value


def frak_f(t: float, table: CoeffTable, m: MollifierTable, p: DetectorParams) -> DetectorSample:
    """(2 pi)^{-1/2} Lambda(1/2+it) |phi(1/2+it)|^2 exp((pi/2 - delta) t), in log space."""
    t = float(t)
    lam = completed_ray(0.5 + 1j * t, table)
    ph = abs(phi(0.5 + 1j * t, m)) ** 2
    if ph == 0 or lam.logmod == -math.inf:
        return DetectorSample(t, LogValue(-math.inf, 0.0), 0.0, 0.0)
    logmod = lam.logmod + math.log(ph) + (math.pi / 2 - p.delta) * t - 0.5 * math.log(2 * math.pi)
    value = LogValue(logmod, lam.phase)
    rot = cmath.exp(complex(logmod, lam.phase - 0.5 * cmath.phase(table.theta)))
    return DetectorSample(t, value, rot.real, abs(rot.imag) / abs(rot))


MOLLIFIER_HEADER = ["nu", "alpha_re", "alpha_im", "beta_re", "beta_im"]


def write_mollifier(m: MollifierTable, path: str | Path) -> None:
    with Path(path).open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(MOLLIFIER_HEADER)
        for nu, a, b in zip(m.nus.tolist(), m.alpha, m.beta):
            w.writerow([nu] + [repr(float(x)) for x in (a.real, a.imag, b.real, b.imag)])


def advisory_schedule(T: float, A: float = 10.0) -> dict[str, float | bool]:
    """delta = 1/T, X = T^{1/100}, h1 = A / ln X, with regime warnings."""
    if T <= 1:
        raise ValueError("T must exceed 1")
    X = T ** 0.01
    h1 = A / math.log(X)
    return {
        "T": T,
        "A": A,
        "delta": 1 / T,
        "X": X,
        "h1": h1,
        "trivial_mollifier": X < SUPPORT_PRIME_FLOOR + 1,
        "h1_out_of_range": not 0 < h1 < 1,
        "X_below_3": X < 3,
    }
