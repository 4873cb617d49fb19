"""The p-adic method of stationary phase.

Phases are plain callables on int64 arrays of residues together with a
domain predicate; no polynomial representation is required.  The module
provides the linear and quadratic sum reductions, Hensel lifting through
singular roots, the shifted square-root phases

    f_{T,eps}(a) = sum_tau eps_tau ((a - tau) b0)_{1/2}

with their derivative system, singular loci, and an emptiness criterion for
deeply singular points based on a Vandermonde determinant.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Sequence

import numpy as np

from .errors import (InvalidPhase, PreconditionFailed, SingularQuadratic,
                     UsageError)
from .klooster import default_branch, e_q
from .modring import PrimePowerModulus, SqrtBranch, pow_array

ArrayFn = Callable[[np.ndarray], np.ndarray]

SCAN_LIMIT = 10**6


def _fsum(z: np.ndarray) -> complex:
    # np.sum uses pairwise summation, so the result is independent of threading
    return complex(np.sum(z))


@dataclass
class DifferentiablePhase:
    """A phase f with discrete derivative f1 (and optionally f2) on X.

    ``f(x + p^k t) = f(x) + f1(x) p^k t (mod p^{2k})`` must hold for
    ``k >= kappa0``; when ``f2`` is given the quadratic refinement
    ``f(x + p^k t) = f(x) + f1(x) p^k t + f2(x) p^{2k} t^2 / 2 (mod p^{2k+1})``
    must hold as well.  All callables act elementwise on int64 arrays and
    return residues mod p^n.  ``domain`` returns a boolean mask (``None``
    means every residue) and must be invariant under ``p^kappa0`` shifts.
    """

    modulus: PrimePowerModulus
    f: ArrayFn
    f1: ArrayFn
    f2: ArrayFn | None = None
    domain: ArrayFn | None = None
    kappa0: int = 1

    def mask(self, x: np.ndarray) -> np.ndarray:
        if self.domain is None:
            return np.ones(np.shape(x), dtype=bool)
        return np.asarray(self.domain(x), dtype=bool)

    def points(self, modulus_power: int | None = None) -> np.ndarray:
        """Domain representatives in [0, p^k) (k = n by default)."""
        k = self.modulus.n if modulus_power is None else modulus_power
        x = np.arange(self.modulus.p**k, dtype=np.int64)
        return x[self.mask(x)]

    def check(self, samples: int = 1000, seed: int = 0, quadratic: bool | None = None) -> None:
        """Property-test the differentiability congruences on random triples.

        Raises :class:`InvalidPhase` on the first violation.
        """
        m = self.modulus
        q, p = m.q, m.p
        quadratic = self.f2 is not None if quadratic is None else quadratic
        rng = np.random.default_rng(seed)
        pts = self.points() if q <= SCAN_LIMIT else None
        for _ in range(8):
            if pts is not None:
                if len(pts) == 0:
                    return
                x = rng.choice(pts, size=samples)
            else:
                x = rng.integers(0, q, size=4 * samples, dtype=np.int64)
                x = x[self.mask(x)][:samples]
                if len(x) == 0:
                    continue
            break
        else:
            return
        k = rng.integers(self.kappa0, max(self.kappa0, m.n) + 1, size=len(x))
        t = rng.integers(0, q, size=len(x), dtype=np.int64)
        pk = np.array([p**int(v) for v in k], dtype=np.int64)
        y = (x + pk * t % q) % q
        fx, fy, f1x = self.f(x), self.f(y), self.f1(x)
        lin = (fx + f1x * (pk * t % q) % q) % q
        mod1 = np.array([p ** min(2 * int(v), m.n) for v in k], dtype=np.int64)
        bad = (fy - lin) % mod1 != 0
        if np.any(bad):
            i = int(np.argmax(bad))
            raise InvalidPhase(f"first-order congruence fails at x={x[i]}, kappa={k[i]}, t={t[i]}")
        if quadratic:
            if self.f2 is None:
                raise InvalidPhase("quadratic check requested but f2 is missing")
            inv2 = (q + 1) // 2
            pk2 = pk * pk % q
            quad = (lin + self.f2(x) * inv2 % q * (pk2 * (t * t % q) % q) % q) % q
            mod2 = np.array([p ** min(2 * int(v) + 1, m.n) for v in k], dtype=np.int64)
            bad = (fy - quad) % mod2 != 0
            if np.any(bad):
                i = int(np.argmax(bad))
                raise InvalidPhase(f"second-order congruence fails at x={x[i]}, kappa={k[i]}, t={t[i]}")


def direct_sum(phase: DifferentiablePhase) -> complex:
    """sum_{x in X} e(f(x)/p^n) by brute force."""
    m = phase.modulus
    total = 0j
    step = 1 << 20
    for lo in range(0, m.q, step):
        x = np.arange(lo, min(lo + step, m.q), dtype=np.int64)
        x = x[phase.mask(x)]
        if len(x):
            total += _fsum(e_q(phase.f(x), m.q))
    return total


def reduce_sum_linear(phase: DifferentiablePhase, kappa: int, validate: bool = True) -> complex:
    """p^{n-k} times the sum over classes x mod p^k in X with
    f1(x) = 0 (mod p^{n-k}) of e(f(x)/p^n); equals the full sum over X."""
    m = phase.modulus
    if not (max(phase.kappa0, math.ceil(m.n / 2)) <= kappa <= m.n):
        raise UsageError(f"need max(kappa0, n/2) <= kappa <= n, got kappa={kappa}")
    if validate:
        phase.check(quadratic=False)
    x = phase.points(kappa)
    if len(x) == 0:
        return 0j
    crit = x[phase.f1(x) % m.p ** (m.n - kappa) == 0]
    return m.p ** (m.n - kappa) * _fsum(e_q(phase.f(crit), m.q))


def gauss_epsilon(c: int, p: int, rho: int) -> complex:
    """eps(c, p^rho): 1 for rho = 0; (c/p) or i (c/p) for p = 1 or 3 mod 4."""
    if rho == 0:
        return 1.0
    leg = pow(c % p, (p - 1) // 2, p)
    leg = 1 if leg == 1 else -1
    return leg * (1.0 if p % 4 == 1 else 1j)


def reduce_sum_quadratic(phase: DifferentiablePhase, validate: bool = True) -> complex:
    """Stationary-phase evaluation with a unit second derivative.

    Writing n = 2k + rho with rho in {0, 1}, returns
    p^{n/2} sum_{x0 mod p^k, f1(x0) = 0 mod p^k}
        eps(2 f2(x0), p^rho) e((f(x0) - (2 f2(x0))^{-1} f1(x0)^2)/p^n).
    """
    m = phase.modulus
    if phase.f2 is None:
        raise SingularQuadratic("quadratic reduction needs f2")
    kappa, rho = divmod(m.n, 2)
    if kappa < phase.kappa0:
        raise UsageError(f"n = {m.n} is too small for kappa0 = {phase.kappa0}")
    if validate:
        phase.check(quadratic=True)
    q, p = m.q, m.p
    reps = phase.points(kappa)
    if len(reps) == 0:
        return 0j
    probe = phase.points() if q <= SCAN_LIMIT else reps
    if np.any(phase.f2(probe) % p == 0):
        raise SingularQuadratic("f2 is not a unit on the whole domain")
    crit = reps[phase.f1(reps) % p**kappa == 0]
    if len(crit) == 0:
        return 0j
    two_f2 = 2 * phase.f2(crit) % q
    inv = pow_array(two_f2, m.phi - 1, q)
    f1 = phase.f1(crit) % q
    arg = (phase.f(crit) - inv * (f1 * f1 % q) % q) % q
    eps = np.array([gauss_epsilon(int(c), p, rho) for c in two_f2])
    return p ** (m.n / 2) * _fsum(eps * e_q(arg, q))


def kloosterman_phase(m: PrimePowerModulus, a: int, b: int) -> DifferentiablePhase:
    """f(x) = a x + b xbar on the units, with f1 = a - b xbar^2 and f2 = 2 b xbar^3."""
    q = m.q

    def inv(x):
        return pow_array(x, m.phi - 1, q)

    return DifferentiablePhase(
        m,
        f=lambda x: (a * x % q + b * inv(x)) % q,
        f1=lambda x: (a - b * pow_array(inv(x), 2, q)) % q,
        f2=lambda x: 2 * b * pow_array(inv(x), 3, q) % q,
        domain=lambda x: np.asarray(x) % m.p != 0,
        kappa0=1,
    )


# -- singular Hensel lifting ------------------------------------------------

@dataclass
class HenselReport:
    root: int
    t: int
    step: int  # the root is a + t * p^step with t unique mod p^(n - j)
    stable_checked: int
    stable: bool


def hensel_lift_singular(m: PrimePowerModulus, f: Callable[[int], int], f1: Callable[[int], int],
                         a: int, j: int, rho: int, kappa0: int = 1,
                         domain: Callable[[int], bool] | None = None,
                         verify_limit: int = 20000) -> HenselReport:
    """Lift a root of f mod p^j with p^rho || f1(a) to a root mod p^n.

    Each step solves the linear congruence f(x + s p^{j'-rho}) = 0 mod
    p^{j'+1} for the unique digit s mod p.  The report also checks (on up
    to ``verify_limit`` points) that every b = a mod p^{j-rho} in the domain
    keeps f(b) = 0 mod p^j and p^rho || f1(b).
    """
    q, p = m.q, m.p
    a %= q
    inside = domain or (lambda x: True)
    if not inside(a):
        raise PreconditionFailed(f"{a} is not in the domain")
    if not 0 <= rho < m.n or f(a) % p**j != 0 or m.ord_p(f1(a)) != rho:
        raise PreconditionFailed(f"need f(a) = 0 mod p^{j} and p^{rho} || f1(a)")
    if j < min(2 * rho + 1, rho + kappa0):
        raise PreconditionFailed(f"need j >= min(2 rho + 1, rho + kappa0), got j={j}")
    if j > m.n:
        raise PreconditionFailed(f"j = {j} exceeds n = {m.n}")

    step = j - rho
    x = a
    for level in range(j, m.n):
        shift = p ** (level - rho)
        digits = [s for s in range(p) if f((x + s * shift) % q) % p ** (level + 1) == 0]
        if len(digits) != 1:
            raise PreconditionFailed(f"lifting is not unique at level {level}: {digits}")
        x = (x + digits[0] * shift) % q
    t = (x - a) % q // p**step % p ** (m.n - j) if step < m.n else 0

    count = p ** (m.n - step)
    stable = True
    checked = 0
    stride = max(1, count // verify_limit)
    for k in range(0, count, stride):
        b = (a + k * p**step) % q
        if not inside(b):
            continue
        checked += 1
        if f(b) % p**j != 0 or m.ord_p(f1(b)) != rho:
            stable = False
            break
    return HenselReport(x, t, step, checked, stable)


# -- shifted square-root phases ------------------------------------------------

def half_binomial(j: int) -> Fraction:
    """binom(1/2, j) as an exact rational."""
    out = Fraction(1)
    for i in range(j):
        out *= Fraction(1, 2) - i
    return out / math.factorial(j)


def ord_p_fraction(x: Fraction, p: int) -> float:
    if x == 0:
        return math.inf
    v = 0
    num, den = x.numerator, x.denominator
    while num % p == 0:
        num //= p
        v += 1
    while den % p == 0:
        den //= p
        v -= 1
    return v


def fraction_mod(x: Fraction, q: int, p: int) -> int:
    if x.denominator % p == 0:
        raise ArithmeticError(f"{x} is not p-integral")
    return x.numerator * pow(x.denominator, -1, q) % q


@dataclass
class ShiftPhase:
    """f_{T,eps}(a) = sum_tau eps_tau ((a - tau) b0)_{1/2} and its derivatives.

    The domain consists of all a with (a - tau) b0 a unit square for every
    tau in T.  ``derivative(j, a)`` is
    ``sum_tau eps_tau binom(1/2, j) ((a - tau) b0)_{1/2}^{1 - 2j}``;
    the actual Taylor coefficient of f in a is ``b0^j`` times that.
    """

    modulus: PrimePowerModulus
    T: tuple[int, ...]
    eps: tuple[int, ...]
    b0: int
    branch: SqrtBranch | None = None

    def __post_init__(self):
        m = self.modulus
        self.T = tuple(int(t) % m.q for t in self.T)
        self.eps = tuple(int(e) for e in self.eps)
        if len(self.T) != len(self.eps):
            raise UsageError("T and eps must have the same length")
        if len(set(self.T)) != len(self.T):
            raise UsageError("shifts must be distinct")
        if self.b0 % m.p == 0:
            raise UsageError("b0 must be a unit")
        if self.branch is None:
            self.branch = default_branch(m)

    @property
    def support(self) -> tuple[tuple[int, int], ...]:
        return tuple((t, e) for t, e in zip(self.T, self.eps) if e != 0)

    def in_domain(self, a) -> np.ndarray:
        a = np.asarray(a, dtype=np.int64)
        ok = np.ones(a.shape, dtype=bool)
        for tau in self.T:
            ok &= self.modulus.legendre_array((a - tau) * self.b0) == 1
        return ok

    def class_in_domain(self, a1: int) -> bool:
        return bool(self.in_domain(np.array([a1]))[0])

    def _roots(self, a, tau):
        q = self.modulus.q
        return self.branch.sqrt_array((np.asarray(a, dtype=np.int64) - tau) % q * (self.b0 % q) % q)

    def value(self, a) -> np.ndarray:
        q = self.modulus.q
        a = np.asarray(a, dtype=np.int64)
        out = np.zeros(a.shape, dtype=np.int64)
        for tau, e in self.support:
            out = (out + e % q * self._roots(a, tau)) % q
        return out

    def derivative(self, j: int, a) -> np.ndarray:
        m = self.modulus
        q = m.q
        a = np.asarray(a, dtype=np.int64)
        if j == 0:
            return self.value(a)
        c = fraction_mod(half_binomial(j), q, m.p)
        out = np.zeros(a.shape, dtype=np.int64)
        for tau, e in self.support:
            uinv = pow_array(self._roots(a, tau), m.phi - 1, q)
            out = (out + e % q * c % q * pow_array(uinv, 2 * j - 1, q)) % q
        return out

    def taylor_coeff(self, j: int, a) -> np.ndarray:
        """b0^j f^{(j)}(a): the coefficient of h^j in f(a + h)."""
        q = self.modulus.q
        return pow(self.b0 % q, j, q) * self.derivative(j, a) % q

    def to_phase(self, a1: int | None = None) -> DifferentiablePhase:
        """The phase as a :class:`DifferentiablePhase`, optionally restricted
        to the class a = a1 (mod p)."""
        m = self.modulus

        def dom(x):
            ok = self.in_domain(x)
            if a1 is not None:
                ok &= np.asarray(x) % m.p == a1 % m.p
            return ok

        return DifferentiablePhase(
            m,
            f=self.value,
            f1=lambda x: self.taylor_coeff(1, x),
            f2=lambda x: 2 * self.taylor_coeff(2, x) % m.q,
            domain=dom,
            kappa0=1,
        )


def _points_mod(sp: ShiftPhase, r: int) -> np.ndarray:
    x = np.arange(sp.modulus.p**r, dtype=np.int64)
    return x[sp.in_domain(x)]


def _singular_mask(sp: ShiftPhase, x: np.ndarray, J: int, r: int) -> np.ndarray:
    pr = sp.modulus.p**r
    ok = np.ones(len(x), dtype=bool)
    for j in range(1, J + 1):
        if not np.any(ok):
            break
        ok[ok] &= sp.derivative(j, x[ok]) % pr == 0
    return ok


def singular_locus(sp: ShiftPhase, J: int, r: int, method: str = "auto",
                   max_size: int = 10**7) -> frozenset[int]:
    """Classes a mod p^r in the domain with f^{(j)}(a) = 0 mod p^r for 1 <= j <= J.

    For p^r up to ``SCAN_LIMIT`` every class is tested; beyond that the
    locus is built level by level, keeping at each level only the lifts of
    classes that already satisfy the congruences modulo the lower power.
    """
    m = sp.modulus
    if not 0 <= r <= m.n:
        raise UsageError(f"need 0 <= r <= n, got r={r}")
    if r == 0:
        return frozenset([0]) if np.any(sp.in_domain(np.arange(m.p))) else frozenset()
    if method == "auto":
        method = "scan" if m.p**r <= SCAN_LIMIT else "lift"
    if method == "scan":
        x = _points_mod(sp, r)
        return frozenset(x[_singular_mask(sp, x, J, r)].tolist())
    if method != "lift":
        raise UsageError(f"unknown method {method!r}")
    cur = _points_mod(sp, 1)
    cur = cur[_singular_mask(sp, cur, J, 1)]
    for level in range(2, r + 1):
        step = m.p ** (level - 1)
        cand = (cur[:, None] + step * np.arange(m.p)[None, :]).ravel()
        if len(cand) > max_size:
            raise UsageError(f"singular locus exceeds {max_size} classes at level {level}")
        cur = cand[_singular_mask(sp, cand, J, level)]
    return frozenset(cur.tolist())


def flat_sharp_split(sp: ShiftPhase, J: int, r: int) -> tuple[frozenset[int], frozenset[int]]:
    """Split the order-J locus mod p^r by the valuation of f^{(J+1)}.

    With r' = floor((r - 1)/2), the sharp part has p^{r'+1} | f^{(J+1)}(a)
    and the flat part is the rest.  Returns ``(flat, sharp)``.
    """
    rp = (r - 1) // 2
    loc = np.array(sorted(singular_locus(sp, J, r)), dtype=np.int64)
    if len(loc) == 0:
        return frozenset(), frozenset()
    deep = sp.derivative(J + 1, loc) % sp.modulus.p ** (rp + 1) == 0
    return frozenset(loc[~deep].tolist()), frozenset(loc[deep].tolist())


class Emptiness(enum.Enum):
    PROVED_EMPTY = "ProvedEmpty"
    INCONCLUSIVE = "Inconclusive"


@dataclass
class EmptinessReport:
    verdict: Emptiness
    varrho1: int
    varrho2: int
    threshold: int
    min_ord: float


def vandermonde_emptiness(sp: ShiftPhase, r: int) -> EmptinessReport:
    """Decide whether the order-|T| singular locus mod p^r is provably empty.

    A point of the locus forces p^r | det A v for a Vandermonde matrix A in
    the ((a - tau) b0)^{-1} and a vector v with a unit entry, hence
    p^{ceil((r - varrho)/binom(|T|, 2))} divides some difference tau - tau'.
    The locus is therefore empty when every difference has p-adic order
    strictly below that threshold.  T is taken to be the support of eps.
    """
    m = sp.modulus
    supp = sp.support
    if len(supp) < 2:
        raise PreconditionFailed("need at least two shifts with nonzero weight")
    k = len(supp)
    rho1 = max(ord_p_fraction(half_binomial(j), m.p) for j in range(1, k + 1))
    rho2 = min(ord_p_fraction(Fraction(e), m.p) for _, e in supp)
    varrho = int(rho1 + rho2)
    threshold = math.ceil(Fraction(r - varrho, math.comb(k, 2)))
    min_ord = min(m.ord_p(t1 - t2) for i, (t1, _) in enumerate(supp) for t2, _ in supp[i + 1:])
    verdict = Emptiness.INCONCLUSIVE
    if threshold > 0 and min_ord < threshold:
        verdict = Emptiness.PROVED_EMPTY
    return EmptinessReport(verdict, int(rho1), int(rho2), threshold, min_ord)


def shifted_exp_sum(sp: ShiftPhase, a1: int, method: str = "direct") -> complex:
    """(1/p^{n-1}) sum over a = a1 (mod p) in the domain of e(f_{T,eps}(a)/p^n).

    ``method="stationary"`` evaluates the same sum through
    :func:`reduce_sum_linear` at kappa = ceil(n/2).
    """
    m = sp.modulus
    if not sp.class_in_domain(a1):
        return 0j
    if method == "direct":
        a = (a1 % m.p) + m.p * np.arange(m.p ** (m.n - 1), dtype=np.int64)
        total = _fsum(e_q(sp.value(a), m.q))
    elif method == "stationary":
        phase = sp.to_phase(a1)
        total = reduce_sum_linear(phase, max(1, math.ceil(m.n / 2)), validate=False)
    else:
        raise UsageError(f"unknown method {method!r}")
    return total / m.p ** (m.n - 1)
