"""Limit laws on [-2, 2] and the random Fourier series built from them.

The series is

    K(t) = sum_h beta(h; t) U_h,    beta(h; t) = (e(h t) - 1)/(2 pi i h),  beta(0; t) = t,

with independent draws U_h from one of the laws below, summed over a
frequency set that is either all integers or the h with (a1 - h) b0 a
square mod p.
"""

from __future__ import annotations

import enum
import itertools
import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Mapping, Sequence

import numpy as np

from .errors import UsageError
from .paths import beta_coeff

DEFAULT_H = 1000


class Law(str, enum.Enum):
    MU = "mu"          # density 1/(pi sqrt(4 - x^2))
    MU_U = "mu_u"      # (delta_0 + mu)/2
    MU_ST = "mu_st"    # semicircle, density sqrt(1 - x^2/4)/pi

    def density(self, x):
        x = np.asarray(x, dtype=float)
        inside = np.abs(x) < 2
        xs = np.where(inside, x, 0.0)
        if self is Law.MU_ST:
            return np.where(inside, np.sqrt(1 - xs**2 / 4) / np.pi, 0.0)
        d = np.where(inside, 1 / (np.pi * np.sqrt(4 - xs**2)), 0.0)
        # MU_U has an atom at 0; only its continuous part has a density
        return d if self is Law.MU else d / 2

    def cdf(self, x):
        x = np.clip(np.asarray(x, dtype=float), -2.0, 2.0)
        arc = 0.5 + np.arcsin(x / 2) / np.pi
        if self is Law.MU:
            return arc
        if self is Law.MU_U:
            return 0.5 * arc + 0.5 * (x >= 0)
        return 0.5 + (x * np.sqrt(4 - x**2) / 2 + 2 * np.arcsin(x / 2)) / (2 * np.pi)

    def moment(self, k: int) -> float:
        """E X^k exactly."""
        if k % 2:
            return 0.0
        if self is Law.MU:
            return float(math.comb(k, k // 2))
        if self is Law.MU_U:
            return 1.0 if k == 0 else 0.5 * math.comb(k, k // 2)
        return float(math.comb(k, k // 2) // (k // 2 + 1))  # Catalan numbers

    def sample(self, rng: np.random.Generator, size=None):
        if self is Law.MU:
            return 2 * np.cos(np.pi * rng.random(size))
        if self is Law.MU_U:
            coin = rng.random(size) < 0.5
            return np.where(coin, 0.0, 2 * np.cos(np.pi * rng.random(size)))
        return 2 * np.cos(_st_angle(rng.random(size)))


def _st_angle(u):
    """Invert G(theta) = (2 theta - sin 2 theta)/(2 pi) on [0, pi] by 64 bisection steps."""
    u = np.asarray(u, dtype=float)
    lo = np.zeros_like(u)
    hi = np.full_like(u, np.pi)
    for _ in range(64):
        mid = (lo + hi) / 2
        below = (2 * mid - np.sin(2 * mid)) / (2 * np.pi) < u
        lo = np.where(below, mid, lo)
        hi = np.where(below, hi, mid)
    return (lo + hi) / 2


@lru_cache(maxsize=None)
def cumulant(law: Law, k: int) -> float:
    """k-th cumulant from the moments: kappa_n = m_n - sum C(n-1, j-1) kappa_j m_{n-j}."""
    if k == 0:
        return 0.0
    return law.moment(k) - sum(math.comb(k - 1, j - 1) * cumulant(law, j) * law.moment(k - j)
                               for j in range(1, k))


def sample_law(law: Law, rng: np.random.Generator, size=None):
    return Law(law).sample(rng, size)


@dataclass(frozen=True)
class SeriesSpec:
    """Truncated random series over |h| <= H.

    ``filter="qr"`` keeps h with (a1 - h) b0 a square mod p; ``"all"`` keeps
    every integer frequency.
    """

    law: Law = Law.MU
    H: int = DEFAULT_H
    filter: str = "qr"
    p: int | None = None
    a1: int = 1
    b0: int = 1
    seed: int = 0

    def __post_init__(self):
        object.__setattr__(self, "law", Law(self.law))
        if self.H < 1:
            raise UsageError("H must be >= 1")
        if self.filter not in ("qr", "all"):
            raise UsageError(f"unknown frequency filter {self.filter!r}")
        if self.filter == "qr":
            if self.p is None or self.p < 3:
                raise UsageError("the QR filter needs an odd prime p")
            if self.a1 % self.p == 0 or self.b0 % self.p == 0:
                raise UsageError("a1 and b0 must be units mod p")


def _is_qr(x: np.ndarray, p: int) -> np.ndarray:
    squares = np.zeros(p, dtype=bool)
    squares[[r * r % p for r in range(1, p)]] = True
    return squares[np.asarray(x) % p]


def frequencies(spec: SeriesSpec) -> np.ndarray:
    h = np.arange(-spec.H, spec.H + 1, dtype=np.int64)
    if spec.filter == "all":
        return h
    return h[_is_qr((spec.a1 - h) * spec.b0, spec.p)]


def frequency_rng(seed: int, h: int) -> np.random.Generator:
    """Independent stream for frequency h, so draws do not depend on evaluation order."""
    return np.random.default_rng(np.random.SeedSequence(entropy=seed, spawn_key=(int(h) + 2**31,)))


def draws(spec: SeriesSpec, size: int | None = None) -> dict[int, np.ndarray]:
    return {int(h): spec.law.sample(frequency_rng(spec.seed, h), size) for h in frequencies(spec)}


def series_eval(spec: SeriesSpec, t: float, draws: Mapping[int, float]) -> complex:
    """sum_h beta(h; t) U_h over the frequency set of ``spec``."""
    hs = frequencies(spec)
    missing = [int(h) for h in hs if int(h) not in draws]
    if missing:
        raise UsageError(f"no draw for frequencies {missing[:5]}{'...' if len(missing) > 5 else ''}")
    u = np.array([draws[int(h)] for h in hs], dtype=float)
    return complex((beta_coeff(hs, t) * u).sum())


def sample_series(spec: SeriesSpec, ts: Sequence[float], size: int) -> np.ndarray:
    """``size`` independent realizations of K_H(t) for each t; shape (len(ts), size)."""
    ts = np.asarray(ts, dtype=float)
    out = np.zeros((len(ts), size), dtype=complex)
    for h in frequencies(spec):
        u = spec.law.sample(frequency_rng(spec.seed, h), size)
        out += beta_coeff(np.full(len(ts), h), ts)[:, None] * u[None, :]
    return out


# -- exact moments ------------------------------------------------------------

def set_partitions(items: Sequence[int]):
    """All set partitions of ``items`` as lists of blocks."""
    items = list(items)
    if not items:
        yield []
        return
    first, rest = items[0], items[1:]
    for part in set_partitions(rest):
        yield [[first]] + part
        for i in range(len(part)):
            yield part[:i] + [[first] + part[i]] + part[i + 1:]


MAX_EXACT_ORDER = 8


@dataclass
class SeriesMoment:
    value: complex
    tail_bound: float


def exact_series_moment(spec: SeriesSpec, ts: Sequence[float], ms: Sequence[int],
                        ns: Sequence[int]) -> SeriesMoment:
    """E prod_i conj(K_H(t_i))^{m_i} K_H(t_i)^{n_i} for the truncated series.

    The U_h are independent, so the joint cumulant of the linear forms
    X_k = sum_h c_k(h) U_h is kappa_r(U) sum_h prod c_k(h); the moment is the
    sum over set partitions of the slots of the product of block cumulants.
    Odd cumulants vanish for the symmetric laws here, which leaves only
    partitions into even blocks.  ``tail_bound`` is a crude estimate
    C / sqrt(H) of the truncation error.
    """
    if not (len(ts) == len(ms) == len(ns)):
        raise UsageError("ts, ms and ns must have equal lengths")
    order = sum(ms) + sum(ns)
    if order > MAX_EXACT_ORDER:
        raise UsageError(f"order {order} exceeds {MAX_EXACT_ORDER}")
    hs = frequencies(spec)
    slots = []
    for t, mi, ni in zip(ts, ms, ns):
        b = beta_coeff(hs, t)
        slots += [np.conj(b)] * mi + [b] * ni
    if not slots:
        return SeriesMoment(1 + 0j, 0.0)
    total = 0j
    for part in set_partitions(range(len(slots))):
        if any(len(B) % 2 for B in part):
            continue
        term = 1 + 0j
        for B in part:
            term *= cumulant(spec.law, len(B)) * np.prod([slots[k] for k in B], axis=0).sum()
        total += term
    scale = max(abs(spec.law.moment(2)), 1.0) ** (order / 2)
    return SeriesMoment(complex(total), order * scale / math.sqrt(spec.H))


def brute_force_series_moment(spec: SeriesSpec, ts, ms, ns) -> complex:
    """Same moment by summing over all h-tuples (small H and order only)."""
    hs = frequencies(spec)
    slots = []
    for t, mi, ni in zip(ts, ms, ns):
        b = beta_coeff(hs, t)
        slots += [np.conj(b)] * mi + [b] * ni
    total = 0j
    for tup in itertools.product(range(len(hs)), repeat=len(slots)):
        counts: dict[int, int] = {}
        for i in tup:
            counts[i] = counts.get(i, 0) + 1
        e = 1.0
        for c in counts.values():
            e *= spec.law.moment(c)
        if e:
            total += e * np.prod([slots[k][i] for k, i in enumerate(tup)])
    return total


def _overlap(t: float, s: float, y: float) -> float:
    """Length of [0, t] intersected with [0, s] + y on the circle R/Z."""
    y %= 1.0
    total = 0.0
    for lo in (y - 1.0, y):
        total += max(0.0, min(t, lo + s) - max(0.0, lo))
    return total


def beta_gram(t: float, s: float, residues: Sequence[int], p: int) -> complex:
    """sum over all integers h = c (mod p), c in ``residues``, of conj(beta(h; t)) beta(h; s).

    beta(., t) are the Fourier coefficients of the indicator of [0, t], so
    Parseval turns the infinite sum into interval overlaps.
    """
    total = 0j
    for c in residues:
        for j in range(p):
            total += np.exp(-2j * np.pi * c * j / p) * _overlap(t, s, j / p)
    return total / p


def qr_residues(a1: int, b0: int, p: int) -> list[int]:
    return [h for h in range(p) if _is_qr(np.array([(a1 - h) * b0]), p)[0]]


def limit_second_moment(t: float, a1: int, b0: int, p: int, law: Law = Law.MU) -> float:
    """E|K(t)|^2 for the untruncated series over the QR frequency class."""
    return float(Law(law).moment(2) * beta_gram(t, t, qr_residues(a1, b0, p), p).real)


# -- glued series -------------------------------------------------------------

def sample_glued(p: int, b0: int, t: float, rng: np.random.Generator, H: int = DEFAULT_H,
                 size: int = 1) -> tuple[np.ndarray, np.ndarray]:
    """Draw a1 uniformly from the units mod p, then K_H(t; p; (a1, b0)) with fresh mu draws.

    Returns ``(a1, values)`` arrays of length ``size``.
    """
    a1 = rng.integers(1, p, size=size)
    h = np.arange(-H, H + 1, dtype=np.int64)
    beta = beta_coeff(h, t)
    vals = np.empty(size, dtype=complex)
    for c in range(1, p):
        idx = np.flatnonzero(a1 == c)
        if len(idx) == 0:
            continue
        keep = _is_qr((c - h) * b0, p)
        u = Law.MU.sample(rng, (len(idx), int(keep.sum())))
        vals[idx] = u @ beta[keep]
    return a1, vals


def glued_second_moment(p: int, b0: int, t: float) -> float:
    """E|K.(t; p)|^2 exactly: the class moments averaged over a1."""
    return float(np.mean([limit_second_moment(t, a1, b0, p) for a1 in range(1, p)]))


def mu_u_second_moment(t: float) -> float:
    """E|K(t)|^2 for the series with mu_U draws over all frequencies (equals t)."""
    return float(Law.MU_U.moment(2) * _overlap(t, t, 0.0))
