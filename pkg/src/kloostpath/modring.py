"""Exact arithmetic in Z/p^nZ for an odd prime p.

Residues are plain Python integers in ``[0, q)`` on the hot paths and int64
numpy arrays for batch sweeps.  The :class:`Residue` wrapper exists for
callers that want the modulus carried along and checked.
"""

from __future__ import annotations

import math
import threading
from dataclasses import dataclass, field
from typing import Callable, Mapping

import numpy as np

from .errors import ModulusError, NotASquare, NotAUnit, UsageError

# Largest modulus q with q*q representable as a signed 64-bit integer.
MAX_MODULUS = math.isqrt(2**63 - 1)


def is_prime(p: int) -> bool:
    if p < 2:
        return False
    if p % 2 == 0:
        return p == 2
    return all(p % d for d in range(3, math.isqrt(p) + 1, 2))


@dataclass(frozen=True)
class PrimePowerModulus:
    """The modulus q = p**n for an odd prime p and n >= 1."""

    p: int
    n: int
    q: int = field(init=False, repr=False)
    phi: int = field(init=False, repr=False)

    def __post_init__(self):
        p, n = int(self.p), int(self.n)
        if n < 1:
            raise ModulusError(f"exponent must be >= 1, got n={n}")
        if p == 2 or not is_prime(p):
            raise ModulusError(f"p must be an odd prime, got p={p}")
        # Guard before exponentiating so absurd n fails fast.
        if n * math.log(p) > math.log(MAX_MODULUS) + 1e-9:
            raise ModulusError(f"{p}^{n} exceeds the supported width (q*q must fit in 63 bits)")
        q = p**n
        if q > MAX_MODULUS:
            raise ModulusError(f"{p}^{n} exceeds the supported width (q*q must fit in 63 bits)")
        object.__setattr__(self, "p", p)
        object.__setattr__(self, "n", n)
        object.__setattr__(self, "q", q)
        object.__setattr__(self, "phi", p ** (n - 1) * (p - 1))

    def __str__(self):
        return f"{self.p}^{self.n}"

    # -- scalar ring operations -------------------------------------------

    def residue(self, x: int) -> "Residue":
        return Residue(int(x) % self.q, self)

    def is_unit(self, x: int) -> bool:
        return x % self.p != 0

    def mul(self, a: int, b: int) -> int:
        return a * b % self.q

    def inv(self, x: int) -> int:
        if x % self.p == 0:
            raise NotAUnit(f"{x} is not invertible mod {self}")
        return pow(x, -1, self.q)

    def legendre(self, x: int) -> int:
        """Legendre symbol (x/p)."""
        r = x % self.p
        if r == 0:
            return 0
        return 1 if pow(r, (self.p - 1) // 2, self.p) == 1 else -1

    def jacobi(self, x: int) -> int:
        """Jacobi symbol (x/p^n) = (x/p)^n."""
        return self.legendre(x) ** self.n

    def is_unit_square(self, x: int) -> bool:
        """Whether x lies in (Z/p^nZ)^x2, i.e. x is a unit and a QR mod p."""
        return self.legendre(x) == 1

    def ord_p(self, x: int) -> float:
        """Largest tau <= n with p^tau | x; ``math.inf`` for the zero class."""
        x %= self.q
        if x == 0:
            return math.inf
        tau = 0
        while x % self.p == 0:
            x //= self.p
            tau += 1
        return tau

    # -- batch helpers ------------------------------------------------------

    def units(self) -> np.ndarray:
        """Units 1 <= x < q in ascending order."""
        x = np.arange(1, self.q, dtype=np.int64)
        return x[x % self.p != 0]

    def inv_array(self, x: np.ndarray) -> np.ndarray:
        """Elementwise inverses via Euler: x^(phi-1) mod q."""
        x = np.asarray(x, dtype=np.int64) % self.q
        if np.any(x % self.p == 0):
            raise NotAUnit(f"non-unit in batch inversion mod {self}")
        return pow_array(x, self.phi - 1, self.q)

    def legendre_array(self, x: np.ndarray) -> np.ndarray:
        table = np.zeros(self.p, dtype=np.int64)
        table[[r * r % self.p for r in range(1, self.p)]] = 1
        table[1:][table[1:] == 0] = -1
        return table[np.asarray(x, dtype=np.int64) % self.p]

    def jacobi_array(self, x: np.ndarray) -> np.ndarray:
        return self.legendre_array(x) ** self.n


def pow_array(base: np.ndarray, e: int, q: int) -> np.ndarray:
    """Elementwise base**e mod q by square-and-multiply; needs q*q < 2**63."""
    base = np.asarray(base, dtype=np.int64) % q
    out = np.ones_like(base)
    while e:
        if e & 1:
            out = out * base % q
        base = base * base % q
        e >>= 1
    return out


@dataclass(frozen=True)
class Residue:
    value: int
    modulus: PrimePowerModulus

    def __post_init__(self):
        if not 0 <= self.value < self.modulus.q:
            raise UsageError(f"{self.value} is not reduced mod {self.modulus}")

    def __int__(self):
        return self.value

    def __index__(self):
        return self.value

    def __mul__(self, other):
        if isinstance(other, Residue):
            return mul_mod(self, other)
        return NotImplemented


def _check_same(a: Residue, b: Residue) -> PrimePowerModulus:
    if a.modulus != b.modulus:
        raise UsageError(f"modulus mismatch: {a.modulus} vs {b.modulus}")
    return a.modulus


def mul_mod(a: Residue, b: Residue) -> Residue:
    m = _check_same(a, b)
    return Residue(m.mul(a.value, b.value), m)


def inv_mod(x: Residue) -> Residue:
    return Residue(x.modulus.inv(x.value), x.modulus)


def ord_p(x: int, m: PrimePowerModulus) -> float:
    return m.ord_p(int(x))


def jacobi(x: Residue, m: PrimePowerModulus | None = None) -> int:
    m = m or x.modulus
    return m.jacobi(int(x))


class SqrtBranch:
    """A fixed branch x -> x_{1/2} of the square root on (Z/p^nZ)^x2.

    The branch is determined by a choice function ``s`` on the quadratic
    residues mod p; every unit square x mod p^n then has a unique root
    congruent to ``s(x mod p)``, obtained by Newton/Hensel doubling.

    Parameters
    ----------
    modulus : PrimePowerModulus
    choice : mapping or callable, optional
        ``r -> s(r)`` for the nonzero squares r mod p.  Defaults to the root
        lying in ``[1, (p-1)/2]``.
    """

    def __init__(self, modulus: PrimePowerModulus,
                 choice: Mapping[int, int] | Callable[[int], int] | None = None):
        self.modulus = modulus
        p = modulus.p
        squares = sorted({x * x % p for x in range(1, p)})
        if choice is None:
            table = {r: next(s for s in range(1, (p - 1) // 2 + 1) if s * s % p == r)
                     for r in squares}
        elif callable(choice):
            table = {r: choice(r) % p for r in squares}
        else:
            table = {r: choice[r] % p for r in squares}
        for r, s in table.items():
            if s * s % p != r:
                raise UsageError(f"s({r}) = {s} is not a square root of {r} mod {p}")
        self.s = table
        self._s_array = np.zeros(p, dtype=np.int64)
        for r, s in table.items():
            self._s_array[r] = s
        self._lifted: dict[int, int] = {}
        self._lock = threading.Lock()

    def flipped(self, residues=None) -> "SqrtBranch":
        """The branch with s(r) replaced by -s(r) for r in ``residues`` (default: all)."""
        p = self.modulus.p
        flip = set(self.s) if residues is None else {r % p for r in residues}
        return SqrtBranch(self.modulus, {r: (p - s if r in flip else s) for r, s in self.s.items()})

    def __eq__(self, other):
        return (isinstance(other, SqrtBranch) and self.modulus == other.modulus
                and self.s == other.s)

    def __hash__(self):
        return hash((self.modulus, tuple(sorted(self.s.items()))))

    def root_mod_p(self, r: int) -> int:
        r %= self.modulus.p
        if r == 0:
            raise NotAUnit(f"0 has no unit square root mod {self.modulus.p}")
        try:
            return self.s[r]
        except KeyError:
            raise NotASquare(f"{r} is not a square mod {self.modulus.p}") from None

    def sqrt(self, x: int) -> int:
        """x_{1/2}: the root of x mod p^n congruent to s(x mod p)."""
        m = self.modulus
        x %= m.q
        cached = self._lifted.get(x)
        if cached is not None:
            return cached
        u = self.root_mod_p(x)
        k = 1
        while k < m.n:
            k = min(2 * k, m.n)
            mod = m.p**k
            u = (u - (u * u - x) * pow(2 * u, -1, mod)) % mod
        with self._lock:
            self._lifted[x] = u
        return u

    def sqrt_array(self, x: np.ndarray) -> np.ndarray:
        """Vectorized x_{1/2} via the division-free iteration y <- y(3 - x y^2)/2
        for x^(-1/2), then x_{1/2} = x * x^(-1/2)."""
        m = self.modulus
        q = m.q
        x = np.asarray(x, dtype=np.int64) % q
        r = x % m.p
        if np.any(r == 0):
            raise NotAUnit(f"non-unit in batch square root mod {m}")
        s = self._s_array[r]
        if np.any(s == 0):
            raise NotASquare(f"non-residue in batch square root mod {m}")
        y = pow_array(s, m.phi - 1, q)  # s^{-1}, correct mod p
        inv2 = (q + 1) // 2
        k = 1
        while k < m.n:
            t = x * y % q * y % q
            y = y * ((3 - t) % q) % q * inv2 % q
            k *= 2
        return x * y % q


def sqrt_branch(x: Residue, br: SqrtBranch) -> Residue:
    if x.modulus != br.modulus:
        raise UsageError(f"modulus mismatch: {x.modulus} vs {br.modulus}")
    return Residue(br.sqrt(x.value), x.modulus)
