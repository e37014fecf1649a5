"""Elementary arithmetic shared by every module (sieves and factorization)."""

from __future__ import annotations

from functools import lru_cache
from math import gcd

import numpy as np


def primes_up_to(n: int) -> np.ndarray:
    """All primes ``p <= n`` as an int64 array (Eratosthenes)."""
    if n < 2:
        return np.zeros(0, dtype=np.int64)
    is_p = np.ones(n + 1, dtype=bool)
    is_p[:2] = False
    for p in range(2, int(n**0.5) + 1):
        if is_p[p]:
            is_p[p * p :: p] = False
    return np.flatnonzero(is_p).astype(np.int64)


def smallest_prime_factors(n: int) -> np.ndarray:
    """spf[k] for 0 <= k <= n, with spf[0] = 0 and spf[1] = 1."""
    spf = np.zeros(n + 1, dtype=np.int64)
    if n >= 1:
        spf[1] = 1
    for p in primes_up_to(int(n**0.5) + 1):
        if p > n:
            break
        block = spf[p::p]
        block[block == 0] = p
    # untouched entries above 1 are primes larger than sqrt(n)
    rest = np.flatnonzero(spf == 0)
    rest = rest[rest >= 2]
    spf[rest] = rest
    return spf


def largest_prime_factors(n: int) -> np.ndarray:
    """gpf[k] for 0 <= k <= n, with gpf[0] = 0 and gpf[1] = 1.

    Primes are visited in increasing order, so the last prime to touch a
    multiple is its largest prime factor.
    """
    gpf = np.zeros(n + 1, dtype=np.int64)
    if n >= 1:
        gpf[1] = 1
    for p in primes_up_to(n):
        gpf[p::p] = p
    return gpf


def factorize(n: int) -> list[tuple[int, int]]:
    """Prime factorization of ``n >= 1`` as sorted (p, e) pairs."""
    if n < 1:
        raise ValueError(f"cannot factor {n}")
    out = []
    d = 2
    while d * d <= n:
        if n % d == 0:
            e = 0
            while n % d == 0:
                n //= d
                e += 1
            out.append((d, e))
        d += 1 if d == 2 else 2
    if n > 1:
        out.append((n, 1))
    return out


def factor_with_spf(n: int, spf: np.ndarray) -> dict[int, int]:
    out: dict[int, int] = {}
    while n > 1:
        p = int(spf[n])
        out[p] = out.get(p, 0) + 1
        n //= p
    return out


def euler_phi(n: int) -> int:
    result = n
    for p, _ in factorize(n):
        result -= result // p
    return result


def lcm(a: int, b: int) -> int:
    return a // gcd(a, b) * b


def divisors(n: int) -> list[int]:
    divs = [1]
    for p, e in factorize(n):
        divs = [d * p**j for d in divs for j in range(e + 1)]
    return sorted(divs)


def is_squarefree(n: int) -> bool:
    return all(e == 1 for _, e in factorize(n))


@lru_cache(maxsize=32)
def cached_primes(n: int) -> np.ndarray:
    """Read-only memoized ``primes_up_to``."""
    arr = primes_up_to(n)
    arr.setflags(write=False)
    return arr


class SmoothnessSieve:
    """Largest and smallest prime factor of every ``n <= bound``.

    ``P+(1) = 1`` and ``P-(1)`` is reported as ``0`` (standing in for infinity
    in integer arrays; callers treat n = 1 separately).
    """

    def __init__(self, bound: int):
        if bound < 1:
            raise ValueError("sieve bound must be >= 1")
        self.bound = int(bound)
        self.largest = largest_prime_factors(self.bound)
        spf = smallest_prime_factors(self.bound)
        spf[1] = 0
        self.smallest = spf

    def smooth_mask(self, y: float) -> np.ndarray:
        """Boolean mask over 0..bound of y-smooth integers (P+(n) <= y); index 0 is False."""
        mask = self.largest <= y
        mask[0] = False
        return mask

    def rough_mask(self, y: float) -> np.ndarray:
        """Mask of n >= 2 with smallest prime factor > y."""
        mask = self.smallest > y
        mask[:2] = False
        return mask


@lru_cache(maxsize=16)
def smoothness_sieve(bound: int) -> SmoothnessSieve:
    return SmoothnessSieve(bound)
