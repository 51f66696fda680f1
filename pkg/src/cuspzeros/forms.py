"""Fourier coefficients of Hecke-eigen cusp forms given as eta products.

Coefficients a(n) are produced in exact integer arithmetic. The fast path
multiplies sparse Euler/Jacobi series modulo several word-sized primes and
recombines by the Chinese remainder theorem; the number of primes is chosen
from a floating-point majorant of the coefficients, so the recombination is
exact. ``expand_eta_product_naive`` is the dense big-integer fallback used as
an oracle.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Callable, Mapping, Sequence

import numpy as np

from .arith import legendre, smallest_prime_factor

# Word-sized primes for the modular expansion (all < 2**31).
_MODULI = (
    2147483647,
    2147483629,
    2147483587,
    2147483579,
    2147483563,
    2147483549,
    2147483543,
    2147483497,
    2147483489,
    2147483477,
)


class CoefficientError(ValueError):
    """A coefficient source violates a Hecke relation or the Deligne bound."""


@dataclass(frozen=True)
class FormSpec:
    """Arithmetic identity of a cusp form: weight, level, character, source."""

    name: str
    weight: int
    level: int
    chi_values: tuple[complex, ...]  # chi(n mod level), indexed by residue
    eta: tuple[tuple[int, int], ...] | None = None
    root_number: complex | None = None

    def __post_init__(self):
        if self.weight < 1 or self.level < 1:
            raise ValueError("weight and level must be positive")
        if len(self.chi_values) != self.level:
            raise ValueError("character table must have one value per residue")

    def chi(self, n: int) -> complex:
        return self.chi_values[n % self.level]

    @property
    def real_character(self) -> bool:
        return all(complex(c).imag == 0 for c in self.chi_values)

    def with_root_number(self, theta: complex) -> "FormSpec":
        return replace(self, root_number=complex(theta))


def trivial_character(level: int) -> tuple[complex, ...]:
    return tuple(1.0 + 0j if math.gcd(n, level) == 1 else 0j for n in range(level))


def legendre_character(p: int) -> tuple[complex, ...]:
    return tuple(complex(legendre(n, p)) for n in range(p))


DELTA = FormSpec("delta", 12, 1, trivial_character(1), eta=((1, 24),))
F23 = FormSpec("f23", 1, 23, legendre_character(23), eta=((1, 1), (23, 1)))
BUILTIN_FORMS = {"delta": DELTA, "f23": F23}


def get_form(name: str) -> FormSpec:
    try:
        return BUILTIN_FORMS[name]
    except KeyError:
        raise KeyError(f"unknown form {name!r}; built-ins are {sorted(BUILTIN_FORMS)}") from None


# ----------------------------------------------------------------------------
# eta-product expansion
# ----------------------------------------------------------------------------


def _euler_sparse(n_max: int, scale: int) -> list[tuple[int, int]]:
    """prod_{m>=1} (1 - q^{scale m}) as sparse (exponent, coefficient) pairs."""
    terms = [(0, 1)]
    k = 1
    while True:
        g1 = scale * k * (3 * k - 1) // 2
        if g1 > n_max:
            break
        sign = -1 if k % 2 else 1
        terms.append((g1, sign))
        g2 = scale * k * (3 * k + 1) // 2
        if g2 <= n_max:
            terms.append((g2, sign))
        k += 1
    return terms


def _jacobi_sparse(n_max: int, scale: int) -> list[tuple[int, int]]:
    """prod_{m>=1} (1 - q^{scale m})^3 = sum_k (-1)^k (2k+1) q^{scale k(k+1)/2}."""
    terms = []
    k = 0
    while scale * k * (k + 1) // 2 <= n_max:
        terms.append((scale * k * (k + 1) // 2, (-1) ** k * (2 * k + 1)))
        k += 1
    return terms


def _sparse_factors(source: Sequence[tuple[int, int]], n_max: int) -> list[list[tuple[int, int]]]:
    factors = []
    for scale, exponent in source:
        if scale < 1:
            raise ValueError(f"eta scale must be positive, got {scale}")
        if exponent < 0:
            raise ValueError("negative eta exponents (eta quotients) are not supported")
        cubes, rest = divmod(exponent, 3)
        factors += [_jacobi_sparse(n_max, scale)] * cubes
        factors += [_euler_sparse(n_max, scale)] * rest
    return factors


def _leading_power(source: Sequence[tuple[int, int]]) -> int:
    total = sum(m * e for m, e in source)
    if total % 24:
        raise ValueError(f"eta product has non-integral leading power {total}/24")
    return total // 24


def _multiply_sparse(dense: np.ndarray, sparse: list[tuple[int, int]], modulus: int | None) -> np.ndarray:
    out = np.zeros_like(dense)
    length = len(dense)
    for shift, coeff in sparse:
        if shift >= length:
            continue
        if modulus is None:
            out[shift:] += abs(coeff) * dense[: length - shift]
        else:
            # |coeff| * dense < 2**41 per term; the sum of a few thousand terms stays in int64
            out[shift:] += coeff * dense[: length - shift]
    if modulus is not None:
        out %= modulus
    return out


def expand_eta_product(source: Sequence[tuple[int, int]], n_max: int) -> list[int]:
    """Exact q-expansion coefficients a(1..n_max) of q^w prod_i prod_m (1-q^{m_i m})^{e_i}.

    The expansion is shifted so that the leading q^w term becomes a(1).
    """
    if n_max < 1:
        raise ValueError("n_max must be >= 1")
    w = _leading_power(source)
    if w < 1:
        raise ValueError("leading q-power must be positive for a cusp form")
    if w > n_max:
        raise ValueError(f"leading q-power {w} exceeds n_max={n_max}")
    # coefficient of q^{w + j} for j = 0..n_max-1
    length = n_max
    factors = _sparse_factors(source, length - 1)

    majorant = np.zeros(length, dtype=np.float64)
    majorant[0] = 1.0
    for sp in factors:
        majorant = _multiply_sparse(majorant, sp, None)
    bound = float(majorant.max())
    if not math.isfinite(bound):
        raise OverflowError("coefficient majorant overflowed float64")

    needed, product = 0, 1
    while product <= 2 * bound * (1 + 1e-6) + 2:
        if needed == len(_MODULI):
            raise OverflowError("coefficients too large for the available moduli")
        product *= _MODULI[needed]
        needed += 1
    moduli = _MODULI[:needed]

    residues = []
    for p in moduli:
        acc = np.zeros(length, dtype=np.int64)
        acc[0] = 1
        for sp in factors:
            acc = _multiply_sparse(acc, sp, p)
        residues.append(acc)
    return _crt_symmetric(residues, moduli)


def _crt_symmetric(residues: list[np.ndarray], moduli: Sequence[int]) -> list[int]:
    big = math.prod(moduli)
    weights = []
    for p in moduli:
        cofactor = big // p
        weights.append(cofactor * pow(cofactor, -1, p))
    half = big // 2
    out = []
    cols = [r.tolist() for r in residues]
    for values in zip(*cols):
        x = sum(v * wt for v, wt in zip(values, weights)) % big
        out.append(x - big if x > half else x)
    return out


def expand_eta_product_naive(source: Sequence[tuple[int, int]], n_max: int) -> list[int]:
    """Dense big-integer expansion, factor (1 - q^{m j}) at a time. Oracle only."""
    if n_max < 1:
        raise ValueError("n_max must be >= 1")
    w = _leading_power(source)
    if w > n_max:
        raise ValueError(f"leading q-power {w} exceeds n_max={n_max}")
    length = n_max
    series = [0] * length
    series[0] = 1
    for scale, exponent in source:
        for _ in range(exponent):
            j = 1
            while scale * j < length:
                step = scale * j
                for i in range(length - 1, step - 1, -1):
                    series[i] -= series[i - step]
                j += 1
    return series


# ----------------------------------------------------------------------------
# coefficient tables
# ----------------------------------------------------------------------------


@dataclass(frozen=True)
class CoeffTable:
    """a(n) and r(n) = a(n) n^{(1-k)/2} for 1 <= n <= n_max (index 0 unused)."""

    form: FormSpec
    n_max: int
    a: np.ndarray  # complex128, a[0] = 0
    r: np.ndarray  # complex128, r[0] = 0
    a_exact: tuple[int, ...] | None = field(default=None, repr=False)

    @property
    def weight(self) -> int:
        return self.form.weight

    @property
    def level(self) -> int:
        return self.form.level

    @property
    def theta(self) -> complex:
        if self.form.root_number is None:
            raise ValueError("root number not computed; call lfunc.attach_root_number first")
        return self.form.root_number

    @property
    def is_real(self) -> bool:
        return bool(np.all(self.r.imag == 0))

    def with_form(self, form: FormSpec) -> "CoeffTable":
        return replace(self, form=form)

    def r_of(self, n: int) -> complex:
        """r(n) for any n whose prime factors are all <= n_max (multiplicativity)."""
        if n <= self.n_max:
            return complex(self.r[n])
        from .arith import factorize

        out = 1.0 + 0j
        for p, e in factorize(n).items():
            out *= self.r_prime_power(p, e)
        return out

    def r_prime_power(self, p: int, e: int) -> complex:
        if p > self.n_max:
            raise ValueError(f"table does not cover the prime {p}")
        if p**e <= self.n_max:
            return complex(self.r[p**e])
        rp = complex(self.r[p])
        chi = self.form.chi(p)
        prev, cur = 1.0 + 0j, rp
        for _ in range(1, e):
            prev, cur = cur, rp * cur - chi * prev
        return cur


def _normalize(a: np.ndarray, weight: int) -> np.ndarray:
    n = np.arange(len(a), dtype=np.float64)
    n[0] = 1.0
    r = a * n ** ((1 - weight) / 2)
    r[0] = 0
    return r


def _table_from_ints(form: FormSpec, a_int: Sequence[int]) -> CoeffTable:
    n_max = len(a_int)
    a = np.zeros(n_max + 1, dtype=np.complex128)
    a[1:] = [float(v) for v in a_int]
    return CoeffTable(form, n_max, a, _normalize(a, form.weight), tuple(int(v) for v in a_int))


def build_coeff_table(form: FormSpec, n_max: int, validate: bool = True) -> CoeffTable:
    """Build the coefficient table of ``form`` from its eta-product source."""
    if n_max < 1:
        raise ValueError("n_max must be >= 1")
    if form.eta is None:
        raise ValueError(f"form {form.name!r} has no eta-product source")
    table = _table_from_ints(form, expand_eta_product(form.eta, n_max))
    if validate:
        validate_table(table)
    return table


def _integral_chi(form: FormSpec) -> list[int] | None:
    vals = []
    for c in form.chi_values:
        c = complex(c)
        if c.imag != 0 or c.real != round(c.real):
            return None
        vals.append(int(round(c.real)))
    return vals


def validate_table(table: CoeffTable, rel_tol: float = 1e-12) -> None:
    """Check a(1)=1, the Hecke relations and |r(n)| <= tau(n); raise on the first violation."""
    form, n_max = table.form, table.n_max
    spf = smallest_prime_factor(n_max)
    if abs(table.a[1] - 1) > 0:
        raise CoefficientError("a(1) != 1")
    chi_int = _integral_chi(form)
    exact = table.a_exact is not None and chi_int is not None
    k = form.weight
    a_ex = (0,) + table.a_exact if exact else None
    a, r = table.a, table.r
    div_count = np.ones(n_max + 1, dtype=np.int64)
    for n in range(2, n_max + 1):
        p = int(spf[n])
        m, e = n, 0
        while m % p == 0:
            m //= p
            e += 1
        pe = n // m
        div_count[n] = div_count[m] * (e + 1)
        if m > 1:
            if exact:
                ok = a_ex[n] == a_ex[pe] * a_ex[m]
            else:
                ok = abs(r[n] - r[pe] * r[m]) <= rel_tol * max(1.0, abs(r[pe] * r[m]))
            if not ok:
                raise CoefficientError(f"multiplicativity fails at n={n} = {pe}*{m}")
        elif e >= 2:
            q1, q2 = n // p, n // (p * p)
            if exact:
                ok = a_ex[n] == a_ex[p] * a_ex[q1] - chi_int[p % form.level] * p ** (k - 1) * a_ex[q2]
            else:
                want = r[p] * r[q1] - form.chi(p) * r[q2]
                ok = abs(r[n] - want) <= rel_tol * max(1.0, abs(want))
            if not ok:
                raise CoefficientError(f"Hecke recurrence fails at n={n}={p}^{e}")
    bad = np.flatnonzero(np.abs(r[1:]) > div_count[1:] * (1 + 1e-9))
    if bad.size:
        n = int(bad[0]) + 1
        raise CoefficientError(f"Deligne bound |r(n)| <= tau(n) fails at n={n}: |r|={abs(r[n]):.6g}")


def reconstruct_from_primes(
    prime_values: Mapping[int, complex | int],
    form: FormSpec,
    n_max: int,
    normalized: bool = False,
) -> CoeffTable:
    """Fill a(n) (or r(n)) for n <= n_max from prime values via the Hecke recurrence.

    With integer a(p) and an integral character the arithmetic is exact.
    ``normalized=True`` means the values are r(p) rather than a(p).
    """
    if n_max < 1:
        raise ValueError("n_max must be >= 1")
    spf = smallest_prime_factor(n_max)
    k = form.weight
    chi_int = _integral_chi(form)
    exact = not normalized and chi_int is not None and all(
        isinstance(v, (int, np.integer)) for v in prime_values.values()
    )
    vals: list = [0] * (n_max + 1)
    vals[1] = 1
    for n in range(2, n_max + 1):
        p = int(spf[n])
        m, e = n, 0
        while m % p == 0:
            m //= p
            e += 1
        if m > 1:
            vals[n] = vals[n // m] * vals[m]
            continue
        if p not in prime_values:
            raise KeyError(f"missing prime value for p={p}")
        vp = prime_values[p]
        vp = int(vp) if exact else complex(vp)
        if e == 1:
            vals[n] = vp
            continue
        if exact:
            vals[n] = vp * vals[n // p] - chi_int[p % form.level] * p ** (k - 1) * vals[n // (p * p)]
        elif normalized:
            vals[n] = vp * vals[n // p] - form.chi(p) * vals[n // (p * p)]
        else:
            vals[n] = vp * vals[n // p] - form.chi(p) * p ** (k - 1) * vals[n // (p * p)]
    if exact:
        return _table_from_ints(form, vals[1:])
    arr = np.array(vals, dtype=np.complex128)
    arr[0] = 0
    if normalized:
        n = np.arange(n_max + 1, dtype=np.float64)
        n[0] = 1.0
        a = arr * n ** ((k - 1) / 2)
        a[0] = 0
        return CoeffTable(form, n_max, a, arr)
    return CoeffTable(form, n_max, arr, _normalize(arr, k))


def prime_values_of(table: CoeffTable, limit: int | None = None) -> dict[int, int | complex]:
    from .arith import primes_up_to

    limit = table.n_max if limit is None else limit
    out: dict[int, int | complex] = {}
    for p in primes_up_to(limit).tolist():
        out[p] = table.a_exact[p - 1] if table.a_exact is not None else complex(table.a[p])
    return out


# ----------------------------------------------------------------------------
# cache file
# ----------------------------------------------------------------------------

CACHE_HEADER = ["form_id", "k", "D", "n", "a_re", "a_im"]


def _fmt_exact(v) -> str:
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    return repr(float(v))


def write_cache(table: CoeffTable, path: str | Path) -> None:
    path = Path(path)
    with path.open("w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(CACHE_HEADER)
        f = table.form
        for n in range(1, table.n_max + 1):
            if table.a_exact is not None:
                re, im = table.a_exact[n - 1], 0
            else:
                re, im = table.a[n].real, table.a[n].imag
            writer.writerow([f.name, f.weight, f.level, n, _fmt_exact(re), _fmt_exact(im)])


def _parse_num(s: str):
    try:
        return int(s)
    except ValueError:
        return float(s)


def read_cache(path: str | Path, form: FormSpec | None = None, validate: bool = True) -> CoeffTable:
    """Read a coefficient cache (or a prime-only custom table) back into a CoeffTable."""
    rows = []
    with Path(path).open(newline="") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames != CACHE_HEADER:
            raise ValueError(f"bad cache header {reader.fieldnames}, expected {CACHE_HEADER}")
        for row in reader:
            rows.append(row)
    if not rows:
        raise ValueError("empty coefficient file")
    form_id, k, level = rows[0]["form_id"], int(rows[0]["k"]), int(rows[0]["D"])
    if form is None:
        if form_id in BUILTIN_FORMS:
            form = BUILTIN_FORMS[form_id]
        else:
            chi = trivial_character(level)
            form = FormSpec(form_id, k, level, chi)
    if (form.weight, form.level) != (k, level):
        raise ValueError("cache weight/level do not match the form")
    values = {int(r["n"]): (_parse_num(r["a_re"]), _parse_num(r["a_im"])) for r in rows}
    n_max = max(values)
    dense = len(values) == n_max
    all_int = all(isinstance(re, int) and im == 0 for re, im in values.values())
    if dense:
        if all_int:
            table = _table_from_ints(form, [values[n][0] for n in range(1, n_max + 1)])
        else:
            a = np.zeros(n_max + 1, dtype=np.complex128)
            for n, (re, im) in values.items():
                a[n] = complex(re, im)
            table = CoeffTable(form, n_max, a, _normalize(a, form.weight))
    else:
        pv = {n: (re if all_int else complex(re, im)) for n, (re, im) in values.items()}
        table = reconstruct_from_primes(pv, form, n_max)
    if validate:
        validate_table(table)
    return table
