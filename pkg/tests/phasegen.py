"""Random phases shared by the stationary-phase tests and the acceptance run."""

import numpy as np

from kloostpath.klooster import default_branch
from kloostpath.modring import PrimePowerModulus
from kloostpath.statphase import (DifferentiablePhase, ShiftPhase,
                                  kloosterman_phase)


def poly_phase(m, c):
    """c0 + c1 x + c2 x^2 + c3 x^3 with f2 = 2 c2 + 6 c3 x, restricted to where f2 is a unit."""
    q, p = m.q, m.p
    c0, c1, c2, c3 = (int(v) % q for v in c)

    def f(x):
        x = np.asarray(x, dtype=np.int64) % q
        x2 = x * x % q
        return (c0 + c1 * x % q + c2 * x2 % q + c3 * (x2 * x % q) % q) % q

    def f1(x):
        x = np.asarray(x, dtype=np.int64) % q
        return (c1 + 2 * c2 * x % q + 3 * c3 * (x * x % q) % q) % q

    def f2(x):
        x = np.asarray(x, dtype=np.int64) % q
        return (2 * c2 + 6 * c3 * x % q) % q

    return DifferentiablePhase(m, f, f1, f2, domain=lambda x: f2(x) % p != 0, kappa0=1)


def random_phase(rng, p, n, kind):
    """One random phase; returns (phase, shift_phase_or_None)."""
    m = PrimePowerModulus(p, n)
    q = m.q
    if kind == "kloosterman":
        a, b = (int(v) * p + int(rng.integers(1, p)) for v in rng.integers(0, q // p, 2))
        return kloosterman_phase(m, a, b), None
    if kind == "poly":
        c = rng.integers(0, q, 4)
        c[2] = c[2] - c[2] % p + int(rng.integers(1, p))
        return poly_phase(m, c), None
    # shifted square-root phase with |T| <= 3 on one admissible class
    b0 = int(rng.integers(1, p))
    size = int(rng.integers(1, 4))
    while True:
        a1 = int(rng.integers(1, p))
        T = list({int(v) for v in rng.integers(0, q, size)})
        T = [t - t % p + (a1 - b0 * r) % p for t, r in zip(T, _square_reps(rng, p, len(T)))]
        if len(set(x % q for x in T)) == len(T):
            break
    eps = [int(rng.integers(-3, 4)) for _ in T]
    sp = ShiftPhase(m, tuple(T), tuple(eps), b0, default_branch(m))
    assert sp.class_in_domain(a1)
    return sp.to_phase(a1), sp


def _square_reps(rng, p, k):
    """k random nonzero squares mod p; tau = a1 - b0 s makes (a1 - tau) b0 = b0^2 s a square."""
    squares = sorted({x * x % p for x in range(1, p)})
    return [squares[int(rng.integers(0, len(squares)))] for _ in range(k)]
