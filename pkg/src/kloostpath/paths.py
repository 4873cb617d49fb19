"""Kloosterman paths and the completion method.

A Kloosterman path joins the partial sums

    Kl_{j;p^n}(a, b) = p^{-n/2} sum_{1 <= x <= j, p !| x} e((a x + b xbar)/p^n)

for j running through the units in ascending order, parametrized linearly
over [0, 1] with one equal parameter interval per segment.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .errors import NotAUnit, UnsupportedDepth, UsageError
from .klooster import (TWO_PI, _running_sums, default_branch, e_q,
                       kloosterman_closed_array)
from .modring import PrimePowerModulus, SqrtBranch

VARIANTS = ("standard", "renormalized", "rearranged")


@dataclass
class KloostermanPath:
    """Vertices of a Kloosterman path.

    Attributes
    ----------
    modulus : PrimePowerModulus
    a, b : int
    vertices : complex ndarray
        Consecutive partial sums, one per index.
    indices : int64 ndarray
        The unit x at which each partial sum stops.
    variant : str
        ``"standard"`` or ``"rearranged"``.  Renormalized values are step
        functions of t and are evaluated by :func:`renormalized_eval`.
    """

    modulus: PrimePowerModulus
    a: int
    b: int
    vertices: np.ndarray
    indices: np.ndarray = field(repr=False)
    variant: str = "standard"

    def __len__(self):
        return len(self.vertices)

    @property
    def endpoint(self) -> complex:
        return complex(self.vertices[-1])


def _check_units(m: PrimePowerModulus, a: int, b: int):
    if a % m.p == 0 or b % m.p == 0:
        raise NotAUnit(f"a = {a} and b = {b} must both be units mod {m}")


def path_vertices(m: PrimePowerModulus, a: int, b: int) -> KloostermanPath:
    """Running partial sums over the units x = 1, 2, ... < p^n (single pass)."""
    _check_units(m, a, b)
    q = m.q
    out = np.empty(m.phi, dtype=complex)
    idx = np.empty(m.phi, dtype=np.int64)
    pos = 0
    for x, part in _running_sums(m, a, b):
        out[pos:pos + len(x)] = part
        idx[pos:pos + len(x)] = x
        pos += len(x)
    a, b = a % q, b % q
    return KloostermanPath(m, a, b, out, idx, "standard")


def path_eval(path: KloostermanPath, t: float) -> complex:
    """Point of the piecewise-linear path at parameter t in [0, 1]."""
    if not 0.0 <= t <= 1.0:
        raise UsageError(f"t = {t} is outside [0, 1]")
    v = path.vertices
    if len(v) == 1:
        return complex(v[0])
    s = t * (len(v) - 1)
    j = min(int(math.floor(s)), len(v) - 2)
    frac = s - j
    return complex((1 - frac) * v[j] + frac * v[j + 1])


def renormalized_cutoff(m: PrimePowerModulus, t) -> int:
    """floor(x_k(t)) with x_k(t) = phi(p^n) t + k - 1 and k = ceil(t p^(n-1)).

    Evaluated in exact rational arithmetic; ``t`` may be a float or a
    :class:`fractions.Fraction`.  Returns 0 for t = 0 (empty sum).
    """
    t = Fraction(t)
    if not 0 <= t <= 1:
        raise UsageError(f"t = {t} is outside [0, 1]")
    if t == 0:
        return 0
    k = math.ceil(t * m.p ** (m.n - 1))
    return math.floor(m.phi * t + k - 1)


def _count_units_upto(p: int, x: int) -> int:
    return x - x // p


def renormalized_eval(m: PrimePowerModulus, a: int, b: int, t,
                      path: KloostermanPath | None = None) -> complex:
    """Renormalized path value: p^{-n/2} sum over units x <= x_k(t).

    Passing a precomputed standard ``path`` turns this into a lookup.
    """
    _check_units(m, a, b)
    X = renormalized_cutoff(m, t)
    count = _count_units_upto(m.p, X)
    if count == 0:
        return 0j
    if path is not None:
        if path.variant != "standard" or path.modulus != m:
            raise UsageError("renormalized lookup needs the standard path for the same modulus")
        return complex(path.vertices[count - 1])
    x = np.arange(1, X + 1, dtype=np.int64)
    x = x[x % m.p != 0]
    return complex(e_q(a * x + b % m.q * m.inv_array(x), m.q).sum() / math.sqrt(m.q))


# -- rearranged paths -------------------------------------------------------

def grouped_terms(m: PrimePowerModulus, a: int, b: int) -> np.ndarray:
    """f(x; (a, b)) for units x <= p^(n-1): the sum of the p summands at
    x + k p^(n-1), k mod p, evaluated directly."""
    _check_units(m, a, b)
    q, r = m.q, m.p ** (m.n - 1)
    x = np.arange(1, r + 1, dtype=np.int64)
    x = x[x % m.p != 0]
    y = (x[:, None] + r * np.arange(m.p)[None, :]) % q
    return e_q(a * y + b % q * m.inv_array(y), q).sum(axis=1)


def rearranged_vertices(m: PrimePowerModulus, a: int, b: int) -> KloostermanPath:
    """Partial sums of the grouped terms f(x; (a, b)) / p^{n/2}."""
    if m.n < 2:
        raise UnsupportedDepth("rearranged paths need n >= 2")
    r = m.p ** (m.n - 1)
    x = np.arange(1, r + 1, dtype=np.int64)
    x = x[x % m.p != 0]
    v = np.cumsum(grouped_terms(m, a, b)) / math.sqrt(m.q)
    return KloostermanPath(m, a % m.q, b % m.q, v, x, "rearranged")


def rearranged_vertices_restricted(m: PrimePowerModulus, a: int, b: int) -> KloostermanPath:
    """Same path via p/p^{n/2} times partial sums restricted to x^2 = abar b (mod p)."""
    if m.n < 2:
        raise UnsupportedDepth("rearranged paths need n >= 2")
    _check_units(m, a, b)
    q, p = m.q, m.p
    x = np.arange(1, p ** (m.n - 1) + 1, dtype=np.int64)
    x = x[x % p != 0]
    target = pow(a, -1, p) * b % p
    keep = (x * x % p) == target
    terms = np.zeros(len(x), dtype=complex)
    xs = x[keep]
    terms[keep] = p * e_q(a * xs + b % q * m.inv_array(xs), q)
    return KloostermanPath(m, a % q, b % q, np.cumsum(terms) / math.sqrt(q), x, "rearranged")


# -- completion ---------------------------------------------------------------

@dataclass(frozen=True)
class CompletionCoefficient:
    """alpha(h; t) = p^{-n/2} sum_{1 <= x <= x_k(t)} e(h x / p^n) and its
    continuous counterpart beta(h; t) = (e(h t) - 1) / (2 pi i h), beta(0; t) = t."""

    h: int
    t: float
    alpha: complex
    beta: complex


def beta_coeff(h, t):
    """beta(h; t), vectorized over integer h."""
    h = np.asarray(h)
    safe = np.where(h == 0, 1, h)
    val = (np.exp(1j * TWO_PI * h * t) - 1) / (1j * TWO_PI * safe)
    return np.where(h == 0, t + 0j, val)


def alpha_coeffs(m: PrimePowerModulus, t, h) -> np.ndarray:
    """alpha(h; t) for an array of frequencies by the geometric series."""
    q = m.q
    X = renormalized_cutoff(m, t)
    h = np.asarray(h, dtype=np.int64)
    hr = h % q
    zero = hr == 0
    w = np.exp(1j * TWO_PI * np.where(zero, 1, hr) / q)
    wX = np.exp(1j * TWO_PI * (np.where(zero, 1, hr) * X % q) / q)
    geo = w * (wX - 1) / (w - 1)
    return np.where(zero, X + 0j, geo) / math.sqrt(q)


def completion_coeffs(m: PrimePowerModulus, t, h_range) -> list[CompletionCoefficient]:
    t = float(t)
    if not 0.0 < t <= 1.0:
        raise UsageError(f"t = {t} must lie in (0, 1]")
    hs = np.asarray(list(h_range), dtype=np.int64)
    al = alpha_coeffs(m, t, hs)
    be = beta_coeff(hs, t)
    return [CompletionCoefficient(int(h), t, complex(x), complex(y)) for h, x, y in zip(hs, al, be)]


def completion_expansion(m: PrimePowerModulus, a: int, b: int, t,
                         branch: SqrtBranch | None = None) -> complex:
    """p^{-n/2} sum_h alpha(h; t) Kl(a - h, b), over the h with (a - h) b a
    square mod p (the other complete sums vanish)."""
    if m.n < 2:
        raise UnsupportedDepth("completion with closed-form sums needs n >= 2")
    _check_units(m, a, b)
    q = m.q
    h = np.arange(q, dtype=np.int64)
    c = (a - h) % q * (b % q) % q
    keep = m.legendre_array(c) == 1
    kl = kloosterman_closed_array(m, c[keep], branch or default_branch(m))
    return complex((alpha_coeffs(m, t, h[keep]) * kl).sum() / math.sqrt(q))


def completion_identity_check(m: PrimePowerModulus, a: int, b: int, t,
                              branch: SqrtBranch | None = None) -> float:
    """|renormalized value - completed expansion|; zero up to rounding."""
    return abs(renormalized_eval(m, a, b, t) - completion_expansion(m, a, b, t, branch))


# -- batch evaluation over all a ---------------------------------------------

def path_values_all_a(m: PrimePowerModulus, b: int, t: float, variant: str = "standard",
                      a1: int | None = None) -> np.ndarray:
    """Path values at time t for every a mod p^n at once (index = a).

    One inverse FFT computes all partial sums sum_{x <= X} e((a x + b xbar)/q).
    ``"standard"`` interpolates linearly between two consecutive vertices,
    ``"renormalized"`` uses the cutoff x_k(t), and ``"rearranged"`` needs the
    class ``a1`` mod p (only entries a = a1 mod p are meaningful).
    """
    q, p = m.q, m.p
    b %= q
    if variant == "rearranged":
        if a1 is None or a1 % p == 0:
            raise UsageError("rearranged values need a unit class a1 mod p")
        x = np.arange(1, p ** (m.n - 1) + 1, dtype=np.int64)
        x = x[x % p != 0]
        weight = np.where(x * x % p == pow(a1, -1, p) * b % p, float(p), 0.0)
    elif variant in ("standard", "renormalized"):
        x = m.units()
        weight = np.ones(len(x))
    else:
        raise UsageError(f"unknown variant {variant!r}")
    nv = len(x)
    if variant == "renormalized":
        cnt, frac = _count_units_upto(p, renormalized_cutoff(m, t)), 0.0
    else:
        s = t * (nv - 1)
        j = min(int(math.floor(s)), nv - 2) if nv > 1 else 0
        cnt, frac = j + 1, s - j
    g = np.zeros(q, dtype=complex)
    xs = x[:cnt]
    g[xs] = weight[:cnt] * e_q(b * m.inv_array(xs), q)
    vals = np.fft.ifft(g) * q
    if frac > 0 and cnt < nv:
        xn = int(x[cnt])
        amp = frac * weight[cnt] * np.exp(1j * TWO_PI * (b * pow(xn, -1, q) % q) / q)
        vals = vals + amp * e_q(np.arange(q, dtype=np.int64) * xn, q)
    return vals / math.sqrt(q)


# -- incomplete sums ----------------------------------------------------------

def inverse_table(m: PrimePowerModulus) -> np.ndarray:
    """xbar for every x mod p^n (0 at the non-units)."""
    out = np.zeros(m.q, dtype=np.int64)
    x = m.units()
    out[x] = m.inv_array(x)
    return out


def incomplete_sum(m: PrimePowerModulus, a: int, b: int, start: int, length: int,
                   inv: np.ndarray | None = None) -> complex:
    """p^{-n/2} sum over units x in [start, start + length) of e((a x + b xbar)/p^n)."""
    inv = inverse_table(m) if inv is None else inv
    x = np.arange(start, start + length, dtype=np.int64) % m.q
    x = x[x % m.p != 0]
    return complex(e_q(a % m.q * x + b % m.q * inv[x], m.q).sum() / math.sqrt(m.q))


def incomplete_cancellation(p: int, n_values, lam: float = 0.1, samples: int = 100,
                            seed: int = 0) -> dict[int, float]:
    """max over random (a, b, interval) of |normalized sum over an interval of
    length p^{(1-lam) n}| for each n; the sums should shrink as n grows."""
    out = {}
    for n in n_values:
        m = PrimePowerModulus(p, n)
        inv = inverse_table(m)
        rng = np.random.default_rng([seed, p, n])
        length = int(round(m.q ** (1 - lam)))
        worst = 0.0
        for _ in range(samples):
            a, b = (int(v) for v in rng.integers(1, m.q, size=2))
            a += a % p == 0
            b += b % p == 0
            start = int(rng.integers(0, m.q))
            worst = max(worst, abs(incomplete_sum(m, a, b, start, length, inv)))
        out[n] = worst
    return out
