"""Normalized Kloosterman sums Kl_{p^n}(a, b) = p^{-n/2} S(a, b; p^n).

Two independent routes are provided: direct summation over the units
(``kloosterman_naive``) and the stationary-phase closed form valid for
n >= 2 (``kloosterman_closed``).  Both have batch versions that evaluate every
product c = ab at once.
"""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from .errors import NotAUnit, UnsupportedDepth, UsageError
from .modring import PrimePowerModulus, SqrtBranch, pow_array

TWO_PI = 2.0 * math.pi
_CHUNK = 1 << 20


@lru_cache(maxsize=64)
def default_branch(m: PrimePowerModulus) -> SqrtBranch:
    return SqrtBranch(m)


def e_q(phase, q: int):
    """e(phase/q) for integer phases; phases are reduced mod q first."""
    return np.exp(1j * TWO_PI * (np.asarray(phase, dtype=np.int64) % q) / q)


def epsilon(m: PrimePowerModulus) -> complex:
    """1 if n is even or p = 1 mod 4, else i."""
    return 1.0 if (m.n % 2 == 0 or m.p % 4 == 1) else 1j


@dataclass(frozen=True)
class KloostermanValue:
    value: float
    method: str  # "naive" or "closed"

    def __post_init__(self):
        if abs(self.value) > 2 + 1e-9:
            raise ArithmeticError(f"|Kl| = {abs(self.value)} exceeds 2")


def _units_chunks(q: int, p: int, stop: int | None = None):
    stop = q if stop is None else stop
    for lo in range(1, stop + 1, _CHUNK):
        x = np.arange(lo, min(lo + _CHUNK, stop + 1), dtype=np.int64)
        yield x[x % p != 0]


def kloosterman_naive(m: PrimePowerModulus, a: int, b: int) -> complex:
    """Direct O(p^n) summation of p^{-n/2} sum_x e((a x + b xbar)/p^n).

    The result is returned as a complex number; its imaginary part is
    rounding noise since the sum is real.  Summation is sequential, in the
    same order as the path vertices.
    """
    if b % m.p == 0:
        raise NotAUnit(f"b = {b} must be a unit mod {m}")
    total = 0j
    for _, part in _running_sums(m, a, b):
        total = part[-1]
    return total


def _running_sums(m: PrimePowerModulus, a: int, b: int):
    """Chunks of the running partial sums p^{-n/2} sum_{x' <= x} e((a x' + b x'bar)/p^n).

    Shared by the direct sum and the path builder so that the last vertex
    of a path is bitwise equal to the direct sum.
    """
    q = m.q
    a %= q
    b %= q
    scale = 1.0 / math.sqrt(q)
    carry = 0j
    for x in _units_chunks(q, m.p):
        terms = np.exp(1j * TWO_PI * ((a * x + b * pow_array(x, m.phi - 1, q)) % q) / q) * scale
        part = np.cumsum(terms) + carry
        carry = part[-1]
        yield x, part


def naive_table(m: PrimePowerModulus) -> np.ndarray:
    """Kl_{p^n}(c, 1) for every c in Z/p^nZ, as a complex array indexed by c.

    One FFT of the sequence x -> e(xbar/p^n) (zero off the units) performs all
    q direct sums at once.  Kl(a, b) = Kl(ab, 1) for units b.
    """
    q = m.q
    g = np.zeros(q, dtype=complex)
    x = m.units()
    g[x] = e_q(m.inv_array(x), q)
    # sum_x g[x] e(cx/q) = q * ifft(g)[c]
    return np.fft.ifft(g) * (q / math.sqrt(q))


def kloosterman_closed(m: PrimePowerModulus, a: int, b: int,
                       branch: SqrtBranch | None = None) -> float:
    """Closed-form Kl_{p^n}(a, b) for n >= 2.

    Zero unless ab is a unit square; otherwise
    2 * (u/p^n) * Re[eps * e(2u/p^n)] with u = (ab)_{1/2}.
    """
    if m.n < 2:
        raise UnsupportedDepth("closed form needs n >= 2; use kloosterman_naive for n = 1")
    if b % m.p == 0:
        raise NotAUnit(f"b = {b} must be a unit mod {m}")
    branch = branch or default_branch(m)
    c = a * b % m.q
    if not m.is_unit_square(c):
        return 0.0
    u = branch.sqrt(c)
    z = epsilon(m) * np.exp(1j * TWO_PI * (2 * u % m.q) / m.q)
    return 2.0 * m.jacobi(u) * float(np.real(z))


def kloosterman_closed_array(m: PrimePowerModulus, c, branch: SqrtBranch | None = None) -> np.ndarray:
    """Closed-form Kl_{p^n}(c, 1) = Kl_{p^n}(a, b) for every entry c = ab."""
    if m.n < 2:
        raise UnsupportedDepth("closed form needs n >= 2")
    branch = branch or default_branch(m)
    c = np.asarray(c, dtype=np.int64) % m.q
    out = np.zeros(c.shape, dtype=float)
    good = m.legendre_array(c) == 1
    if np.any(good):
        u = branch.sqrt_array(c[good])
        z = epsilon(m) * e_q(2 * u, m.q)
        out[good] = 2.0 * m.jacobi_array(u) * z.real
    return out


def evaluate(m: PrimePowerModulus, a: int, b: int, method: str = "auto",
             branch: SqrtBranch | None = None) -> KloostermanValue:
    """Kl_{p^n}(a, b) as a checked :class:`KloostermanValue`.

    ``method="auto"`` uses the closed form for n >= 2 and direct summation
    for n = 1 (no closed form exists there).
    """
    if method == "auto":
        method = "naive" if m.n == 1 else "closed"
    if method == "naive":
        return KloostermanValue(kloosterman_naive(m, a, b).real, "naive")
    if method == "closed":
        return KloostermanValue(kloosterman_closed(m, a, b, branch), "closed")
    raise UsageError(f"unknown method {method!r}")


@dataclass
class SummandCensus:
    counts: dict[int, int]
    distinct: int = field(init=False)

    def __post_init__(self):
        self.distinct = sum(1 for c in self.counts.values() if c)


def summand_phases(m: PrimePowerModulus, a: int, b: int) -> np.ndarray:
    """u(x) = a x + b xbar mod p^n over the units x, ascending in x."""
    x = m.units()
    return (a % m.q * x + b % m.q * m.inv_array(x)) % m.q


def summand_census(m: PrimePowerModulus, a: int, b: int) -> SummandCensus:
    """Multiplicities of the phases a x + b xbar over the units x."""
    if a % m.p == 0 or b % m.p == 0:
        raise NotAUnit("summand census needs unit a and b")
    u, c = np.unique(summand_phases(m, a, b), return_counts=True)
    return SummandCensus(dict(zip(u.tolist(), c.tolist())))


@dataclass
class MultiplicityReport:
    """Outcome of :func:`multiplicity_check`.

    ``counterexamples`` lists ``(u, observed, expected)`` triples.
    """

    modulus: PrimePowerModulus
    kappa: int
    refined: bool
    checked: int
    counterexamples: list[tuple[int, int, int]]

    @property
    def passed(self) -> bool:
        return not self.counterexamples and self.checked > 0


def multiplicity_check(m: PrimePowerModulus, kappa: int, refined: bool = False) -> MultiplicityReport:
    """Count unit solutions of x + xbar = u (mod p^n) for u = +-2 + p^(2 kappa) u0.

    With ``refined=False`` every unit u0 mod p^(n - 2 kappa) is expected to
    give exactly 2 p^kappa solutions.  That only holds for half of them: the
    discriminant u^2 - 4 equals p^(2 kappa) u0 (+-4 + p^(2 kappa) u0), so a
    solution exists iff +-u0 is a square mod p.  ``refined=True`` expects
    2 p^kappa solutions in that case and none otherwise.
    """
    if not (1 <= kappa and 2 * kappa < m.n):
        raise UsageError(f"need 1 <= kappa < n/2, got kappa={kappa}, n={m.n}")
    counts = Counter(summand_phases(m, 1, 1).tolist())
    step = m.p ** (2 * kappa)
    full = 2 * m.p**kappa
    bad = []
    checked = 0
    for sign in (1, -1):
        for u0 in range(1, m.p ** (m.n - 2 * kappa)):
            if u0 % m.p == 0:
                continue
            u = (2 * sign + step * u0) % m.q
            expected = full
            if refined and m.legendre(sign * u0) != 1:
                expected = 0
            checked += 1
            got = counts.get(u, 0)
            if got != expected:
                bad.append((u, got, expected))
    return MultiplicityReport(m, kappa, refined, checked, bad)
