"""Elementary arithmetic tables: sieves, Moebius, divisor functions."""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache
from math import gcd

import numpy as np


def primes_up_to(n: int) -> np.ndarray:
    """Primes <= n as an int64 array."""
    if n < 2:
        return np.zeros(0, dtype=np.int64)
    sieve = np.ones(n + 1, dtype=bool)
    sieve[:2] = False
    for p in range(2, int(n**0.5) + 1):
        if sieve[p]:
            sieve[p * p :: p] = False
    return np.flatnonzero(sieve).astype(np.int64)


def smallest_prime_factor(n: int) -> np.ndarray:
    spf = np.zeros(n + 1, dtype=np.int64)
    if n >= 1:
        spf[1] = 1
    for p in range(2, n + 1):
        if spf[p] == 0:
            spf[p] = p
            if p * p <= n:
                block = spf[p * p :: p]
                block[block == 0] = p
    return spf


def factorize(n: int, spf: np.ndarray | None = None) -> dict[int, int]:
    """Prime factorization as {p: exponent}. Uses the spf table when it covers n."""
    if n < 1:
        raise ValueError(f"cannot factor {n}")
    out: dict[int, int] = {}
    if spf is not None and n < len(spf):
        while n > 1:
            p = int(spf[n])
            e = 0
            while n % p == 0:
                n //= p
                e += 1
            out[p] = e
        return out
    p = 2
    while p * p <= n:
        while n % p == 0:
            out[p] = out.get(p, 0) + 1
            n //= p
        p += 1 if p == 2 else 2
    if n > 1:
        out[n] = out.get(n, 0) + 1
    return out


def divisors(n: int) -> list[int]:
    divs = [1]
    for p, e in factorize(n).items():
        divs = [d * p**j for d in divs for j in range(e + 1)]
    return sorted(divs)


def mobius(n: int) -> int:
    f = factorize(n)
    if any(e > 1 for e in f.values()):
        return 0
    return -1 if len(f) % 2 else 1


def tau_t(n: int, t: int) -> int:
    """Number of ordered factorizations n = n_1 ... n_t."""
    out = 1
    for e in factorize(n).values():
        out *= _binom(e + t - 1, t - 1)
    return out


def tau(n: int) -> int:
    return tau_t(n, 2)


@lru_cache(maxsize=None)
def _binom(a: int, b: int) -> int:
    from math import comb

    return comb(a, b)


def mod_inverse(a: int, q: int) -> int:
    """a* in [0, q) with a a* = 1 (mod q), by the extended Euclid algorithm."""
    if q == 1:
        return 0
    old_r, r = a % q, q
    old_s, s = 1, 0
    while r:
        quo = old_r // r
        old_r, r = r, old_r - quo * r
        old_s, s = s, old_s - quo * s
    if old_r != 1:
        raise ValueError(f"gcd({a}, {q}) = {old_r} != 1")
    return old_s % q


def legendre(a: int, p: int) -> int:
    a %= p
    if a == 0:
        return 0
    return 1 if pow(a, (p - 1) // 2, p) == 1 else -1


@dataclass
class ArithCache:
    """Tables of mu, tau, tau_t (t <= 6) and smallest prime factor up to ``limit``."""

    limit: int
    spf: np.ndarray = field(init=False, repr=False)
    mu: np.ndarray = field(init=False, repr=False)
    tau_t: dict[int, np.ndarray] = field(init=False, repr=False)

    def __post_init__(self):
        n = self.limit
        if n < 1:
            raise ValueError("cache limit must be >= 1")
        self.spf = smallest_prime_factor(n)
        mu = np.zeros(n + 1, dtype=np.int64)
        mu[1] = 1
        tables = {t: np.zeros(n + 1, dtype=np.int64) for t in range(1, 7)}
        for t in tables:
            tables[t][1] = 1
        for m in range(2, n + 1):
            p = int(self.spf[m])
            rest, e = m, 0
            while rest % p == 0:
                rest //= p
                e += 1
            mu[m] = 0 if e > 1 else -mu[rest]
            for t, arr in tables.items():
                arr[m] = arr[rest] * _binom(e + t - 1, t - 1)
        self.mu = mu
        self.tau_t = tables

    @property
    def tau(self) -> np.ndarray:
        return self.tau_t[2]


def coprime(a: int, b: int) -> bool:
    return gcd(a, b) == 1
