"""Moments of Kloosterman path ensembles, sums of products and equidistribution.

The ensemble attached to a class a1 mod p consists of all a = a1 (mod p),
weighted uniformly; it has p^(n-1) members.
"""

from __future__ import annotations

import enum
import itertools
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import UsageError
from .klooster import default_branch, epsilon, kloosterman_closed_array
from .modring import PrimePowerModulus, SqrtBranch
from .paths import path_values_all_a
from .statphase import ShiftPhase, shifted_exp_sum

MAX_MOMENT_ORDER = 12


class Ensemble(str, enum.Enum):
    CLASS_A1 = "class"
    ALL_UNITS = "all"
    REARRANGED_SQUARES = "rearranged"


@dataclass
class MomentSpec:
    """E prod_i conj(K(t_i))^{m_i} K(t_i)^{n_i} over an ensemble of paths K.

    ``n_exp`` holds the plain exponents (``n`` is the modulus depth).
    """

    modulus: PrimePowerModulus
    t: list[float]
    m: list[int]
    n_exp: list[int]
    a1: int = 1
    b0: int = 1
    ensemble: Ensemble = Ensemble.CLASS_A1
    variant: str = "standard"

    def __post_init__(self):
        self.ensemble = Ensemble(self.ensemble)
        if not (len(self.t) == len(self.m) == len(self.n_exp)):
            raise UsageError("t, m and n_exp must have equal lengths")
        if any(v < 0 for v in self.m + self.n_exp):
            raise UsageError("exponents must be non-negative")
        if self.order > MAX_MOMENT_ORDER:
            raise UsageError(f"total order {self.order} exceeds {MAX_MOMENT_ORDER}")
        if any(not 0 <= t <= 1 for t in self.t):
            raise UsageError("times must lie in [0, 1]")
        p = self.modulus.p
        if self.b0 % p == 0 or (self.ensemble != Ensemble.ALL_UNITS and self.a1 % p == 0):
            raise UsageError("a1 and b0 must be units mod p")

    @property
    def order(self) -> int:
        return sum(self.m) + sum(self.n_exp)


def _product(values: list[np.ndarray], m, n_exp) -> np.ndarray:
    out = np.ones(len(values[0]) if values else 1, dtype=complex)
    for v, mi, ni in zip(values, m, n_exp):
        if mi:
            out *= np.conj(v) ** mi
        if ni:
            out *= v**ni
    return out


def empirical_moment(spec: MomentSpec) -> complex:
    """Exact ensemble average; all a are handled at once per time t."""
    m = spec.modulus
    q, p = m.q, m.p
    if spec.order == 0:
        return 1 + 0j
    a = np.arange(q, dtype=np.int64)
    if spec.ensemble == Ensemble.CLASS_A1:
        sel = a % p == spec.a1 % p
        vals = [path_values_all_a(m, spec.b0, t, spec.variant)[sel] for t in spec.t]
        return complex(_product(vals, spec.m, spec.n_exp).mean())
    if spec.ensemble == Ensemble.ALL_UNITS:
        sel = a % p != 0
        vals = [path_values_all_a(m, spec.b0, t, spec.variant)[sel] for t in spec.t]
        return complex(_product(vals, spec.m, spec.n_exp).mean())
    # rearranged paths over a in b0 * squares, one class mod p at a time
    total, count = 0j, 0
    for a1 in range(1, p):
        if m.legendre(a1 * spec.b0) != 1:
            continue
        sel = a % p == a1
        vals = [path_values_all_a(m, spec.b0, t, "rearranged", a1=a1)[sel] for t in spec.t]
        prod = _product(vals, spec.m, spec.n_exp)
        total += prod.sum()
        count += len(prod)
    return total / count


# -- sums of products ---------------------------------------------------------

@dataclass
class ShiftMultiset:
    """A map tau -> multiplicity on Z/p^n Z."""

    modulus: PrimePowerModulus
    mu: dict[int, int]

    def __post_init__(self):
        q = self.modulus.q
        merged: dict[int, int] = {}
        for tau, k in self.mu.items():
            if k < 0:
                raise UsageError("multiplicities must be non-negative")
            if k:
                merged[int(tau) % q] = merged.get(int(tau) % q, 0) + int(k)
        self.mu = dict(sorted(merged.items()))

    @property
    def support(self) -> tuple[int, ...]:
        return tuple(self.mu)

    @property
    def norm1(self) -> int:
        return sum(self.mu.values())

    @property
    def delta(self) -> float:
        """min ||tau - tau'||_p over distinct support pairs (inf if fewer than two)."""
        T = self.support
        ords = [self.modulus.ord_p(s - t) for i, s in enumerate(T) for t in T[i + 1:]]
        if not ords:
            return math.inf
        return float(self.modulus.p) ** (-min(ords))

    def main_term(self) -> float:
        """prod_tau [2 | mu] 2^{-mu} binom(mu, mu/2)."""
        out = 1.0
        for k in self.mu.values():
            if k % 2:
                return 0.0
            out *= math.comb(k, k // 2) / 2**k
        return out


def _class_qr(m: PrimePowerModulus, mu: ShiftMultiset, a1: int, b0: int) -> bool:
    return all(m.legendre((a1 - tau) * b0) == 1 for tau in mu.support)


def sum_of_products(mu: ShiftMultiset, a1: int, b0: int, half_normalized: bool = True,
                    branch: SqrtBranch | None = None) -> float:
    """Class average of prod_tau K(a - tau)^{mu(tau)} over a = a1 (mod p).

    K is Kl/2 when ``half_normalized`` (the normalization in which the limit
    is ``mu.main_term()``) and Kl itself otherwise.
    """
    m = mu.modulus
    p, q = m.p, m.q
    if mu.norm1 == 0:
        return 1.0
    if not _class_qr(m, mu, a1, b0):
        return 0.0
    a = (a1 % p) + p * np.arange(p ** (m.n - 1), dtype=np.int64)
    out = np.ones(len(a))
    scale = 0.5 if half_normalized else 1.0
    for tau, k in mu.mu.items():
        kl = kloosterman_closed_array(m, (a - tau) % q * (b0 % q) % q, branch)
        out *= (scale * kl) ** k
    return float(out.mean())


def sop_decompose(mu: ShiftMultiset, a1: int, b0: int,
                  branch: SqrtBranch | None = None) -> list[tuple[complex, ShiftPhase]]:
    """Expand the half-normalized sum of products into exponential sums.

    Each factor Kl/2 = J Re[eps e(2 u/p^n)] with u = ((a - tau) b0)_{1/2}
    contributes 2^{-mu} sum_u binom(mu, u) eps^{mu - 2u} e(2 (mu - 2u) u/p^n),
    so the phase weights are 2 (mu - 2u).  The Jacobi symbol of u only
    depends on a1, so it moves into the coefficient.
    """
    m = mu.modulus
    branch = branch or default_branch(m)
    if not _class_qr(m, mu, a1, b0):
        raise UsageError("(a1 - tau) b0 must be a square mod p for every shift")
    T = mu.support
    eps_n = epsilon(m)
    jac = {tau: m.jacobi(branch.root_mod_p((a1 - tau) * b0)) for tau in T}
    terms = []
    for u in itertools.product(*(range(mu.mu[tau] + 1) for tau in T)):
        c = 2.0 ** (-mu.norm1)
        for tau, ut in zip(T, u):
            k = mu.mu[tau]
            c = c * jac[tau] ** k * math.comb(k, ut) * eps_n ** (k - 2 * ut)
        weights = tuple(2 * (mu.mu[tau] - 2 * ut) for tau, ut in zip(T, u))
        terms.append((complex(c), ShiftPhase(m, T, weights, b0, branch)))
    return terms


def sop_reconstruct(mu: ShiftMultiset, a1: int, b0: int, method: str = "direct",
                    branch: SqrtBranch | None = None) -> complex:
    return sum(c * shifted_exp_sum(sp, a1, method) for c, sp in sop_decompose(mu, a1, b0, branch))


# -- equidistribution -------------------------------------------------------------

def mu_cdf(x):
    """CDF of the arcsine-type law on [-2, 2]: 1/2 + arcsin(x/2)/pi."""
    x = np.clip(np.asarray(x, dtype=float), -2.0, 2.0)
    return 0.5 + np.arcsin(x / 2) / np.pi


def ks_distance(samples, cdf) -> float:
    """One-sample Kolmogorov-Smirnov distance sup |F_N - F|.

    Exact for a continuous reference CDF ``F``; ties in the sample are fine.
    """
    x = np.sort(np.asarray(samples, dtype=float))
    n = len(x)
    if n == 0:
        raise UsageError("empty sample")
    f = cdf(x)
    i = np.arange(1, n + 1)
    return float(max(np.max(i / n - f), np.max(f - (i - 1) / n)))


@dataclass
class EquidistResult:
    ks: float
    count: int
    degenerate: bool


def class_values(m: PrimePowerModulus, a1: int, b0: int) -> np.ndarray:
    """Kl(a, b0) for all a = a1 (mod p), ascending in a."""
    a = (a1 % m.p) + m.p * np.arange(m.p ** (m.n - 1), dtype=np.int64)
    return kloosterman_closed_array(m, a * (b0 % m.q) % m.q)


def equidist_stat(p: int, n: int, a1: int, b0: int) -> EquidistResult:
    """KS distance between the class values Kl(a, b0) and the arcsine-type law."""
    m = PrimePowerModulus(p, n)
    if n < 2:
        raise UsageError("equidistribution statistics need n >= 2")
    vals = class_values(m, a1, b0)
    return EquidistResult(ks_distance(vals, mu_cdf), len(vals), m.legendre(a1 * b0) != 1)


# -- domain sizes -------------------------------------------------------------

@dataclass
class DomainCount:
    exact: int
    predicted: float
    classes: int


def domain_count(T, b0: int, m: PrimePowerModulus) -> DomainCount:
    """Number of units a with (a - tau) b0 a square mod p for all tau in T.

    The condition only depends on a mod p, so the count is the number of
    good unit classes mod p times p^(n-1).  The prediction is
    phi(p^n) / 2^{|T mod p|}.
    """
    p = m.p
    classes = sum(1 for a in range(1, p) if all(m.legendre((a - t) * b0) == 1 for t in T))
    tbar = len({t % p for t in T})
    return DomainCount(classes * p ** (m.n - 1), m.phi / 2**tbar, classes)


def domain_count_bruteforce(T, b0: int, m: PrimePowerModulus) -> int:
    a = m.units()
    ok = np.ones(len(a), dtype=bool)
    for t in T:
        ok &= m.legendre_array((a - t) * b0) == 1
    return int(ok.sum())
