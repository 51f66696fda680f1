"""Selberg sums with the multiplicative weights K(m, s), Rankin-Selberg means and
shifted convolution sums, each with an independent recomputation."""

from __future__ import annotations

import csv
import itertools
import math
from dataclasses import dataclass, field
from functools import lru_cache
from pathlib import Path

import numpy as np

from .arith import divisors, factorize, mobius, mod_inverse, primes_up_to, tau_t
from .forms import CoeffTable
from .lfunc import _tau_eps_constant
from .mollifier import SUPPORT_PRIME_FLOOR, MollifierTable

K_TAIL_TOL = 1e-16
SUPPORT_CAP = 200


class SupportError(ValueError):
    pass


def fsum_complex(values) -> complex:
    arr = np.asarray(values, dtype=np.complex128)
    return complex(math.fsum(arr.real), math.fsum(arr.imag))


def _plain(v):
    if isinstance(v, (bool, np.bool_)):
        return bool(v)
    if isinstance(v, (int, np.integer)):
        return int(v)
    if isinstance(v, (float, np.floating)):
        return float(v)
    return v


@dataclass(frozen=True)
class SumReport:
    name: str
    params: dict
    value: complex
    oracle: complex | None = None
    tail_bound: float = 0.0
    extra: dict = field(default_factory=dict)

    @property
    def discrepancy(self) -> float | None:
        if self.oracle is None:
            return None
        return abs(self.value - self.oracle)

    @property
    def relative_discrepancy(self) -> float | None:
        if self.oracle is None:
            return None
        scale = max(abs(self.oracle), abs(self.value))
        return self.discrepancy / scale if scale > 0 else 0.0

    def params_text(self) -> str:
        return ";".join(f"{k}={_plain(self.params[k])}" for k in sorted(self.params))

    def row(self) -> list[str]:
        o = self.oracle
        return [self.name, self.params_text(),
                repr(float(self.value.real)), repr(float(self.value.imag)),
                "" if o is None else repr(float(o.real)), "" if o is None else repr(float(o.imag)),
                "" if o is None else repr(float(self.discrepancy)), repr(float(self.tail_bound))]


SUM_HEADER = ["name", "params", "value_re", "value_im", "oracle_re", "oracle_im",
              "discrepancy", "tail_bound"]


def write_sum_reports(reports: list[SumReport], path: str | Path) -> None:
    with Path(path).open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(SUM_HEADER)
        for r in reports:
            w.writerow(r.row())


# ----------------------------------------------------------------------------
# K(m, s)
# ----------------------------------------------------------------------------


def check_supported(m: int) -> dict[int, int]:
    if m < 1:
        raise SupportError("m must be positive")
    fac = factorize(m)
    small = [p for p in fac if p <= SUPPORT_PRIME_FLOOR]
    if small:
        raise SupportError(f"m={m} has prime factors <= {SUPPORT_PRIME_FLOOR}: {small}")
    return fac


def k_terms(p: int, alpha: int, sigma: float, tol: float = K_TAIL_TOL) -> int:
    """Series length J with the tail bound sum_{j>J} (alpha+j+1)(j+1) p^{-j sigma} < tol."""
    x = p ** (-sigma)
    if x >= 0.5:
        raise SupportError("K series does not converge fast enough for this prime")
    J = 1
    while True:
        head = (alpha + J + 2) * (J + 2) * x ** (J + 1)
        # ratio of successive bound terms is at most 2x for J >= 1
        if head / (1 - 2 * x) < tol:
            return J
        J += 1


def k_tail_bound(p: int, alpha: int, sigma: float, J: int) -> float:
    x = p ** (-sigma)
    return (alpha + J + 2) * (J + 2) * x ** (J + 1) / (1 - 2 * x)


def _k_prime_factor(table: CoeffTable, p: int, alpha: int, s: complex, J: int) -> complex:
    num = []
    den = []
    for j in range(J + 1):
        w = p ** (-j * s)
        rj = table.r_prime_power(p, j) if j else 1.0 + 0j
        den.append(abs(rj) ** 2 * w)
        num.append(np.conj(table.r_prime_power(p, alpha + j)) * rj * w)
    d = fsum_complex(den)
    if d == 0:
        raise ArithmeticError(f"vanishing K denominator at p={p}")
    return fsum_complex(num) / d


def k_factor_a(m: int, s: complex, table: CoeffTable, J: int | None = None) -> complex:
    """Per-prime closed form: product of quotients of the two local series."""
    fac = check_supported(m)
    out = 1.0 + 0j
    for p, a in sorted(fac.items()):
        Jp = J if J is not None else k_terms(p, a, complex(s).real)
        out *= _k_prime_factor(table, p, a, complex(s), Jp)
    return out


def m1_set(primes: list[int], J: int) -> list[int]:
    """k with every prime factor in ``primes``, each exponent <= J (the truncated M1(m))."""
    out = [1]
    for p in primes:
        out = [k * p ** e for k in out for e in range(J + 1)]
    return sorted(out)


def k_factor_b(m: int, s: complex, table: CoeffTable, J: int | None = None) -> complex:
    """Ratio of the truncated sums over M1(m) of conj(r(mk)) r(k) k^{-s} and |r(k)|^2 k^{-s}."""
    fac = check_supported(m)
    if m == 1:
        return 1.0 + 0j
    sigma = complex(s).real
    if J is None:
        J = max(k_terms(p, a, sigma) for p, a in fac.items())
    ks = m1_set(sorted(fac), J)
    num, den = _k_b_terms(m, tuple(ks), table)
    w = np.array([complex(k) ** (-complex(s)) for k in ks])
    return fsum_complex(num * w) / fsum_complex(den * w)


def _k_b_terms(m: int, ks: tuple[int, ...], table: CoeffTable) -> tuple[np.ndarray, np.ndarray]:
    num = np.array([np.conj(table.r_of(m * k)) * table.r_of(k) for k in ks])
    den = np.array([abs(table.r_of(k)) ** 2 for k in ks])
    return num, den


@dataclass(frozen=True)
class KValue:
    m: int
    s: complex
    method_a: complex
    method_b: complex
    tail_bound: float

    @property
    def discrepancy(self) -> float:
        return abs(self.method_a - self.method_b)


def k_factor(m: int, s: complex, table: CoeffTable, trunc: int | None = None) -> KValue:
    fac = check_supported(m)
    sigma = complex(s).real
    if sigma < 0.5:
        raise SupportError("K is only defined here for Re s >= 1/2")
    J = trunc if trunc is not None else max([k_terms(p, a, sigma) for p, a in fac.items()] or [1])
    tail = sum(k_tail_bound(p, a, sigma, J) for p, a in fac.items())
    return KValue(m, complex(s), k_factor_a(m, s, table, J), k_factor_b(m, s, table, J), tail)


class KCache:
    """Memoized method-A K values at one exponent s (Re s > 1/2 sets the series length)."""

    def __init__(self, table: CoeffTable, s: complex):
        self.table, self.s = table, complex(s)
        self._local: dict[tuple[int, int], complex] = {}
        self._vals: dict[int, complex] = {1: 1.0 + 0j}

    def __call__(self, m: int) -> complex:
        m = int(m)
        if m not in self._vals:
            out = 1.0 + 0j
            for p, a in sorted(check_supported(m).items()):
                key = (p, a)
                if key not in self._local:
                    self._local[key] = _k_prime_factor(self.table, p, a, self.s,
                                                       k_terms(p, a, self.s.real))
                out *= self._local[key]
            self._vals[m] = out
        return self._vals[m]


def supported_up_to(limit: int) -> list[int]:
    """All m <= limit whose prime factors exceed the support floor."""
    primes = [p for p in primes_up_to(limit).tolist() if p > SUPPORT_PRIME_FLOOR]
    out = {1}
    frontier = [1]
    while frontier:
        nxt = []
        for v in frontier:
            for p in primes:
                if v * p > limit:
                    break
                if v * p not in out:
                    out.add(v * p)
                    nxt.append(v * p)
        frontier = nxt
    return sorted(out)


# ----------------------------------------------------------------------------
# Selberg sums
# ----------------------------------------------------------------------------


def _support(m: MollifierTable) -> tuple[np.ndarray, np.ndarray]:
    keep = m.beta != 0
    nus, beta = m.nus[keep], m.beta[keep]
    if len(nus) > SUPPORT_CAP:
        raise SupportError(f"mollifier support {len(nus)} exceeds the cap {SUPPORT_CAP}")
    return nus, beta


def _pair_weights(m: MollifierTable, vartheta: float) -> dict[int, complex]:
    """w(A) = sum over nu1 nu4 = A of beta(nu1) beta(nu4) / (nu1^{1-v} nu4)."""
    nus, beta = _support(m)
    acc: dict[int, list[complex]] = {}
    for (n1, b1), (n4, b4) in itertools.product(zip(nus.tolist(), beta), repeat=2):
        acc.setdefault(n1 * n4, []).append(b1 * b4 / (n1 ** (1 - vartheta) * n4))
    return {A: fsum_complex(v) for A, v in acc.items()}


def selberg_sum(vartheta: float, table: CoeffTable, m: MollifierTable) -> SumReport:
    """Quadruple sum over nu1..nu4, grouped by the products nu1 nu4 and nu2 nu3."""
    if not 0 <= vartheta <= 0.25:
        raise ValueError("exponent must lie in [0, 1/4]")
    s = 1 - vartheta
    K = KCache(table, s)
    w = _pair_weights(m, vartheta)
    A = np.array(sorted(w), dtype=np.int64)
    wa = np.array([w[a] for a in A.tolist()])
    parts = []
    for i in range(len(A)):
        g = np.gcd(A[i], A)
        a = A[i] // g
        b = A // g
        ka = np.array([K(int(x)) for x in a.tolist()])
        kb = np.array([K(int(x)) for x in b.tolist()])
        parts.append(wa[i] * np.conj(wa) * g.astype(np.float64) ** s * ka * np.conj(kb))
    value = fsum_complex(np.concatenate(parts)) if parts else 0j
    return SumReport("selberg_direct", {"vartheta": vartheta, "X": m.X}, value)


def selberg_sum_decomposed(vartheta: float, table: CoeffTable, m: MollifierTable) -> SumReport:
    """sum_d sum_{m|d} mu(m) (d/m)^{1-v} |g(d, m)|^2."""
    if not 0 <= vartheta <= 0.25:
        raise ValueError("exponent must lie in [0, 1/4]")
    s = 1 - vartheta
    K = KCache(table, s)
    nus, beta = _support(m)
    ds = set()
    for n1, n4 in itertools.product(nus.tolist(), repeat=2):
        ds.update(divisors(n1 * n4))
    terms = []
    for d in sorted(ds):
        pairs = [(n1, b1, n4, b4) for (n1, b1), (n4, b4)
                 in itertools.product(zip(nus.tolist(), beta), repeat=2) if (n1 * n4) % d == 0]
        for mm in divisors(d):
            mu = mobius(mm)
            if mu == 0:
                continue
            g = fsum_complex([b1 * b4 / (n1 ** s * n4) * K(n1 * n4 * mm // d)
                              for n1, b1, n4, b4 in pairs])
            terms.append(mu * (d / mm) ** s * abs(g) ** 2)
    value = fsum_complex(terms)
    return SumReport("selberg_decomposed", {"vartheta": vartheta, "X": m.X}, value)


def selberg_pair(vartheta: float, table: CoeffTable, m: MollifierTable) -> SumReport:
    direct = selberg_sum(vartheta, table, m)
    dec = selberg_sum_decomposed(vartheta, table, m)
    return SumReport("selberg", direct.params, direct.value, dec.value,
                     extra={"bound_shape": direct.value.real * math.log(m.X) / m.X ** (2 * vartheta)})


def mobius_identity(f, q: int) -> tuple[object, object]:
    """Both sides of f(q) = sum_{d|q} sum_{m|d} mu(m) f(d/m)."""
    rhs = 0
    for d in divisors(q):
        for mm in divisors(d):
            rhs += mobius(mm) * f(d // mm)
    return f(q), rhs


# ----------------------------------------------------------------------------
# alpha over its full support and b(n)
# ----------------------------------------------------------------------------


def alpha_full(n: int, table: CoeffTable) -> complex:
    """Coefficient of n^{-s} in prod_{p > 256} (1 - r(p) p^{-s} / 2)."""
    if n == 1:
        return 1.0 + 0j
    fac = factorize(n)
    if any(e > 1 or p <= SUPPORT_PRIME_FLOOR for p, e in fac.items()):
        return 0j
    out = 1.0 + 0j
    for p in fac:
        out *= -table.r_of(p) / 2
    return out


def b_function(n: int, table: CoeffTable) -> float:
    """b(n) = sum_{n1 n2 = n} |alpha(n1) alpha(n2)|."""
    return math.fsum(abs(alpha_full(d, table) * alpha_full(n // d, table)) for d in divisors(n))


# ----------------------------------------------------------------------------
# alpha-weighted sum over coprime lambda
# ----------------------------------------------------------------------------


def coprime_alpha_sum(X1: float, gamma: float, vartheta: float, N: int, table: CoeffTable,
                   k_method: str = "a") -> SumReport:
    """sum over lambda <= X1, (lambda, N) = 1 of alpha(lambda) K(lambda, 1-v) lambda^{g-1} ln(X1/lambda)."""
    if X1 < 1:
        raise ValueError("X1 must be >= 1")
    s = 1 - vartheta
    lams = [lam for lam in supported_up_to(int(math.floor(X1)))
            if math.gcd(lam, N) == 1 and alpha_full(lam, table) != 0]
    kfun = (lambda lam: k_factor_a(lam, s, table)) if k_method == "a" else \
        (lambda lam: k_factor_b(lam, s, table))
    terms = [alpha_full(lam, table) * kfun(lam) * lam ** (gamma - 1) * math.log(X1 / lam)
             for lam in lams]
    value = fsum_complex(terms)
    shape = X1 ** gamma * math.sqrt(math.log(X1 + 2))
    for p in factorize(N) if N > 1 else {}:
        shape *= (1 + 1 / p) ** 2
    return SumReport("coprime_alpha_sum", {"X1": X1, "gamma": gamma, "vartheta": vartheta, "N": N},
                     value, extra={"terms": len(lams), "bound_shape": shape,
                                   "ratio": abs(value) / shape})


# ----------------------------------------------------------------------------
# Rankin-Selberg
# ----------------------------------------------------------------------------


def rankin_series(s: complex, table: CoeffTable, N: int | None = None) -> SumReport:
    """Partial sum of sum |r(n)|^2 n^{-s} with a tail bound from tau(n) <= C n^eps."""
    s = complex(s)
    if s.real <= 1:
        raise ValueError("Re s must exceed 1")
    N = table.n_max if N is None else N
    if N > table.n_max:
        raise ValueError("cutoff exceeds the coefficient table")
    n = np.arange(1, N + 1, dtype=np.float64)
    terms = np.abs(table.r[1:N + 1]) ** 2 * np.exp(-s * np.log(n))
    eps = (s.real - 1) / 4
    c = _tau_eps_constant(eps)
    tail = c * c * N ** (1 + 2 * eps - s.real) / (s.real - 1 - 2 * eps)
    return SumReport("rankin_series", {"s": s, "N": N}, fsum_complex(terms), tail_bound=tail)


def rankin_mean(x: int, table: CoeffTable) -> float:
    """(1/x) sum_{n <= x} |r(n)|^2."""
    x = int(x)
    if not 1 <= x <= table.n_max:
        raise ValueError("x outside the coefficient table")
    return math.fsum(np.abs(table.r[1:x + 1]) ** 2) / x


def rankin_drift(table: CoeffTable, xs=None) -> list[tuple[int, float]]:
    if xs is None:
        xs = []
        x = table.n_max
        while x >= 100:
            xs.append(x)
            x //= 2
        xs.reverse()
    return [(int(x), rankin_mean(x, table)) for x in xs]


# ----------------------------------------------------------------------------
# shifted convolution sums
# ----------------------------------------------------------------------------


def _shift_check(N: int, m1: int, m2: int, l: int, table: CoeffTable) -> None:
    if min(N, m1, m2) < 1 or l < 0:
        raise ValueError("N, m1, m2 must be positive and l non-negative")
    if math.gcd(m1, m2) != 1:
        raise ValueError("m1 and m2 must be coprime")
    if (m1 * (N - 1) + l) // m2 > table.n_max:
        raise ValueError("coefficient table does not cover the shifted range")


def _shift_term(table: CoeffTable, n: int, j: int) -> complex:
    return complex(table.r[n] * np.conj(table.r[j]))


def shifted_terms_forward(N: int, m1: int, m2: int, l: int, table: CoeffTable) -> list[complex]:
    out = []
    for n in range(1, N):
        v = m1 * n + l
        if v % m2 == 0 and v > 0:
            out.append(_shift_term(table, n, v // m2))
    return out


def shifted_terms_bucketed(N: int, m1: int, m2: int, l: int, table: CoeffTable) -> list[complex]:
    """Only n = n0 (mod m2) with m1 n0 + l = 0 (mod m2) contribute; walk that class."""
    n0 = (-l * mod_inverse(m1 % m2, m2)) % m2 if m2 > 1 else 0
    if n0 == 0:
        n0 = m2
    out = []
    for n in range(n0, N, m2):
        j = (m1 * n + l) // m2
        if j > 0:
            out.append(_shift_term(table, n, j))
    out.reverse()
    return out


def shifted_convolution(N: int, m1: int, m2: int, l: int, table: CoeffTable) -> SumReport:
    _shift_check(N, m1, m2, l, table)
    fwd = shifted_terms_forward(N, m1, m2, l, table)
    bkt = shifted_terms_bucketed(N, m1, m2, l, table)
    v1, v2 = fsum_complex(fwd), fsum_complex(bkt)
    mass = math.fsum(abs(t) for t in fwd)
    return SumReport("shifted_convolution", {"N": N, "m1": m1, "m2": m2, "l": l}, v1, v2,
                     extra={"terms": len(fwd), "abs_mass": mass,
                            "cancellation": abs(v1) / mass if mass else 0.0,
                            "exponent_ratio": abs(v1) / N ** (10 / 11)})


def shifted_sweep(table: CoeffTable, Ns=(1000, 2000, 5000, 10000, 20000, 50000), m1: int = 1,
                  m2: int = 1, l: int = 1) -> list[SumReport]:
    return [shifted_convolution(N, m1, m2, l, table) for N in Ns]


def shifted_dirichlet(s: complex, l: int, m1: int, m2: int, table: CoeffTable,
                      N: int | None = None) -> SumReport:
    """Partial sum of r(n) conj r((m1 n + l)/m2) / (m1 n + l/2)^s over n <= N."""
    s = complex(s)
    if m2 == 1 and l == 0:
        # r(m1 n) only needs n's factors to be covered, via the Hecke relation
        N = table.n_max if N is None else N
        terms = [table.r[n] * np.conj(_r_times(table, m1, n)) / (m1 * n) ** s for n in range(1, N + 1)]
    else:
        if N is None:
            N = (table.n_max * m2 - l) // m1
        _shift_check(N + 1, m1, m2, l, table)
        terms = []
        for n in range(1, N + 1):
            v = m1 * n + l
            if v % m2 == 0:
                terms.append(table.r[n] * np.conj(table.r[v // m2]) / (m1 * n + l / 2) ** s)
    tail = math.inf
    if s.real > 1:
        # |r(n) r(j)| <= tau(n) tau(j) <= C^2 (n j)^eps, j <= (m1 n + l)/m2
        eps = (s.real - 1) / 4
        c = _tau_eps_constant(eps)
        scale = ((m1 + l) / m2) ** eps
        tail = c * c * scale * m1 ** (-s.real) * N ** (1 + 2 * eps - s.real) / (s.real - 1 - 2 * eps)
    label = "certified" if s.real > 1 else "partial_only"
    return SumReport("shifted_dirichlet", {"s": s, "l": l, "m1": m1, "m2": m2, "N": N},
                     fsum_complex(terms), tail_bound=tail, extra={"status": label})


def _r_times(table: CoeffTable, p_or_m: int, n: int) -> complex:
    """r(m n) from r(n) by the Hecke relation, one prime of m at a time."""
    fac = factorize(p_or_m)
    # exponents of each prime of m in n
    out = 1.0 + 0j
    rest = n
    for p, a in fac.items():
        e = 0
        while rest % p == 0:
            rest //= p
            e += 1
        out *= table.r_prime_power(p, a + e)
    return out * table.r_of(rest)


def shifted_splitting(s: complex, m1: int, m2: int, table: CoeffTable, N: int | None = None) -> SumReport:
    """D_{m1,m2}(s, 0) against (m1 m2)^{-s} K(m1,s) conj K(m2,conj s) D(s) at matched cutoff."""
    if math.gcd(m1, m2) != 1:
        raise ValueError("m1 and m2 must be coprime")
    N = table.n_max if N is None else N
    s = complex(s)
    terms = []
    for n in range(1, N + 1):
        terms.append(_r_times(table, m2, n) * np.conj(_r_times(table, m1, n)) / n ** s)
    lhs = fsum_complex(terms) / (m1 * m2) ** s
    d = rankin_series(s, table, N)
    rhs = (m1 * m2) ** (-s) * k_factor_a(m1, s, table) * np.conj(k_factor_a(m2, s.conjugate(), table)) * d.value
    return SumReport("shifted_splitting", {"s": s, "m1": m1, "m2": m2, "N": N}, lhs, complex(rhs),
                     tail_bound=d.tail_bound * (m1 * m2) ** (-s.real) * 4)


@lru_cache(maxsize=None)
def tau6(n: int) -> int:
    return tau_t(n, 6)
