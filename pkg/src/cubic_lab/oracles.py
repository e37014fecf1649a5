"""Brute-force reference computations that the faster code paths are checked against."""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .arith import cached_primes, factorize, smallest_prime_factors
from .char_core import enumerate_cubic_primitive, primitive_characters
from .random_model import x_moment_product

MAX_G_INDEX = 10**7


class CostGuardError(ValueError):
    pass


class RangeError(ValueError):
    pass


def d_k(n: int, k: int) -> int:
    """Number of ordered k-tuples of positive integers with product n."""
    if n < 1 or k < 1:
        raise ValueError("d_k needs n >= 1 and k >= 1")
    out = 1
    for _, e in factorize(n) if n > 1 else []:
        out *= math.comb(e + k - 1, k - 1)
    return out


@lru_cache(maxsize=1 << 16)
def _exps(n: int) -> tuple[tuple[int, int], ...]:
    return tuple(factorize(n)) if n > 1 else ()


def is_cube_pair(n: int, m: int) -> bool:
    """n m^2 is a perfect cube, via v_p(n) + 2 v_p(m) = 0 mod 3 at every prime."""
    if n < 1 or m < 1:
        raise ValueError("is_cube_pair needs positive integers")
    v: dict[int, int] = {}
    for p, e in _exps(n):
        v[p] = v.get(p, 0) + e
    for p, e in _exps(m):
        v[p] = v.get(p, 0) + 2 * e
    return all(e % 3 == 0 for e in v.values())


def multiplicative_table(N: int, k: int) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Arrays over n = 0..N: d_k(n) (float), cube class kernel prod p^(v_p mod 3), smallest prime factor.

    nm^2 is a cube exactly when n and m share the kernel.
    """
    spf = smallest_prime_factors(N)
    n = np.arange(N + 1, dtype=np.int64)
    dk = np.ones(N + 1)
    kernel = np.ones(N + 1, dtype=np.int64)
    rem = n.copy()
    rem[0] = 1
    active = np.flatnonzero(rem > 1)
    while active.size:
        p = spf[rem[active]]
        e = np.zeros(active.size, dtype=np.int64)
        r = rem[active]
        while True:
            div = (r % p == 0) & (r > 1)
            if not div.any():
                break
            r = np.where(div, r // p, r)
            e += div
        rem[active] = r
        comb = np.array([math.comb(int(x) + k - 1, k - 1) for x in range(int(e.max()) + 1)], dtype=float)
        dk[active] *= comb[e]
        kernel[active] *= p ** (e % 3)
        active = active[r > 1]
    dk[0] = 0
    kernel[0] = 0
    return dk, kernel, spf


def rough_cube_divisor_sum(k: int, y: float, N: int) -> float:
    """sum over cube pairs 1 < n, m <= N with P-(nm) > y of d_k(n) d_k(m) / (nm)."""
    if y < 2:
        raise ValueError("y must be >= 2")
    if y >= N:
        return 0.0
    dk, kernel, spf = multiplicative_table(N, k)
    idx = np.arange(2, N + 1)
    idx = idx[spf[idx] > y]
    if idx.size == 0:
        return 0.0
    w = dk[idx] / idx
    # sort so that each class sum is accumulated in a fixed order
    order = np.lexsort((idx, kernel[idx]))
    keys, w = kernel[idx][order], w[order]
    starts = np.flatnonzero(np.r_[True, keys[1:] != keys[:-1]])
    class_sums = np.add.reduceat(w, starts)
    return math.fsum(class_sums**2)


def rough_constant(k: int, y: float, N: int) -> float:
    """Effective constant (truncated sum)^(1/k) y log y / k."""
    return rough_cube_divisor_sum(k, y, N) ** (1 / k) * y * math.log(y) / k


def smooth_cube_divisor_sum(k: int, eta: float, P: int) -> float:
    """Cube-pair sum of d_k(n) d_k(m)/(nm)^(1-eta) over P-smooth n, m, as its Euler product."""
    if k < 2:
        raise ValueError("k must be >= 2")
    if eta > 1 / math.log(k):
        warnings.warn(f"eta={eta} exceeds 1/log k = {1 / math.log(k):.4g}", stacklevel=2)
    return x_moment_product(k, 1 - eta, P)


@dataclass
class GCoefficient:
    N1: int
    N2: int
    k: int
    alpha: float
    values: np.ndarray  # index n = 0..N2**k, zero outside [N1**k, N2**k]

    def support(self) -> np.ndarray:
        return np.flatnonzero(self.values)

    def bound_violations(self) -> list[int]:
        """Indices where |g(n, alpha)| > d_k(n) (beyond float slack)."""
        dk, _, _ = multiplicative_table(self.values.size - 1, self.k)
        bad = np.abs(self.values) > dk * (1 + 1e-12) + 1e-12
        return [int(i) for i in np.flatnonzero(bad)]


def g_coefficients(N1: int, N2: int, k: int, alpha: float, a=None) -> GCoefficient:
    """k-fold multiplicative self-convolution of a_n e(n alpha) supported on N1 <= n <= N2.

    ``a`` maps an integer array to coefficients; None means a_n = 1.
    """
    if not 2 <= N1 < N2:
        raise ValueError("need 2 <= N1 < N2")
    if k < 1:
        raise ValueError("k must be >= 1")
    if N2**k > MAX_G_INDEX:
        raise RangeError(f"N2^k = {N2**k} exceeds the index limit {MAX_G_INDEX}")
    base_n = np.arange(N1, N2 + 1, dtype=np.int64)
    base = np.exp(2j * np.pi * ((base_n * alpha) % 1.0))
    if a is not None:
        base = base * np.asarray(a(base_n), dtype=complex)
    cur = np.zeros(N2 + 1, dtype=complex)
    cur[base_n] = base
    for j in range(2, k + 1):
        nxt = np.zeros(N2**j + 1, dtype=complex)
        sup = np.flatnonzero(cur)
        for n, c in zip(base_n, base):
            np.add.at(nxt, sup * n, c * cur[sup])
        cur = nxt
    return GCoefficient(N1, N2, k, alpha, cur)


def prime_tuple_cube_sum(ell: int, y: float, P: int) -> dict:
    """Sum of 1/(p_1...p_2l) over primes in (y, P] with p_1..p_l (p_l+1..p_2l)^2 a cube.

    Compared with 2^l l! S^l and 2^l l! S^(2l), S the truncated sum of 1/p^2.
    """
    if ell >= 3:
        raise CostGuardError("ell >= 3 is combinatorially too expensive for exhaustive enumeration")
    if ell < 1:
        raise ValueError("ell must be 1 or 2")
    primes = [int(p) for p in cached_primes(P) if p > y]
    S = math.fsum(1.0 / p**2 for p in primes)
    # ordered ell-tuples grouped by cube class; a pair of tuples counts when classes agree
    classes: dict[tuple, list[float]] = {}
    if ell == 1:
        for p in primes:
            classes.setdefault((p,), []).append(1.0 / p)
    else:
        for p in primes:
            for q in primes:
                key = (p, p) if p == q else tuple(sorted((p, q)))
                classes.setdefault(key, []).append(1.0 / (p * q))
    value = math.fsum(math.fsum(v) ** 2 for v in classes.values())
    pref = 2**ell * math.factorial(ell)
    b_l, b_2l = pref * S**ell, pref * S ** (2 * ell)
    return {
        "ell": ell,
        "y": y,
        "P": P,
        "value": value,
        "prime_square_sum": S,
        "bound_exponent_l": b_l,
        "bound_exponent_2l": b_2l,
        "holds_exponent_l": value <= b_l,
        "holds_exponent_2l": value <= b_2l,
    }


def _coeff_matrix(M: int, trials: int, seed: int) -> np.ndarray:
    rng = np.random.default_rng(seed)
    return rng.standard_normal((M, trials)) + 1j * rng.standard_normal((M, trials))


def _summary(ratios: np.ndarray) -> dict:
    return {
        "ratios": ratios.tolist(),
        "max": float(ratios.max()),
        "median": float(np.median(ratios)),
        "quantiles": {str(q): float(np.quantile(ratios, q)) for q in (0.1, 0.5, 0.9)},
    }


def large_sieve_lhs(Q: int, a: np.ndarray) -> np.ndarray:
    """sum_{q<=Q} sum over primitive chi mod q of |sum_m a_m chi(m)|^2, per column of a."""
    M = a.shape[0]
    m = np.arange(1, M + 1)
    out = np.zeros(a.shape[1])
    for q in range(1, Q + 1):
        chars = primitive_characters(q)
        if not chars:
            continue
        V = np.stack([c.values(m) for c in chars])
        out += np.sum(np.abs(V @ a) ** 2, axis=0)
    return out


def large_sieve_ratio(Q: int, M: int, coeff_seed: int = 0, trials: int = 100, a: np.ndarray | None = None) -> dict:
    """Ratio of the primitive-character mean square to (Q^2 + M) sum |a_m|^2."""
    if a is None:
        a = _coeff_matrix(M, trials, coeff_seed)
    a = np.asarray(a, dtype=complex).reshape(M, -1)
    ratios = large_sieve_lhs(Q, a) / ((Q * Q + M) * np.sum(np.abs(a) ** 2, axis=0))
    return {"Q": Q, "M": M, "seed": coeff_seed, **_summary(ratios)}


def _cube_kernels(M: int) -> np.ndarray:
    return multiplicative_table(M, 1)[1]


def cubic_family_sieve_check(Q: int, M: int, coeff_seed: int = 0, trials: int = 50, a: np.ndarray | None = None) -> dict:
    """Mean square over F3(Q), its cube-pair diagonal and the normalized off-diagonal remainder."""
    if a is None:
        a = _coeff_matrix(M, trials, coeff_seed)
    a = np.asarray(a, dtype=complex).reshape(M, -1)
    fam = enumerate_cubic_primitive(Q)
    m = np.arange(1, M + 1)
    V = np.stack([c.values(m) for c in fam])
    total = np.sum(np.abs(V @ a) ** 2, axis=0)
    # for a cube pair chi(m1) conj(chi(m2)) = 1 when both are coprime to q, else 0
    kernel = _cube_kernels(M)[1:]
    moduli = np.array([c.modulus for c in fam])
    coprime = np.array([[math.gcd(int(x), int(q)) == 1 for q in moduli] for x in m])
    diag = np.zeros(a.shape[1], dtype=complex)
    for key in np.unique(kernel):
        idx = np.flatnonzero(kernel == key)
        # number of family members coprime to both m1 and m2
        both = coprime[idx][:, None, :] & coprime[idx][None, :, :]
        counts = both.sum(axis=2).astype(float)
        diag += np.einsum("it,ij,jt->t", a[idx], counts, np.conj(a[idx]))
    remainder = total - diag.real
    scale = math.sqrt(Q) * math.log(Q) * M * math.log(M) ** 1.5 * np.sum(np.abs(a), axis=0) ** 2
    ratios = np.abs(remainder) / scale
    return {
        "Q": Q,
        "M": M,
        "seed": coeff_seed,
        "family_size": len(fam),
        "total": total.tolist(),
        "diagonal": diag.real.tolist(),
        "max_diag_imag": float(np.abs(diag.imag).max()),
        **_summary(ratios),
    }


def family_character_sum(Q: int, n: int) -> complex:
    """sum over chi in F3(Q) of chi(n)."""
    return complex(sum(complex(c(n)) for c in enumerate_cubic_primitive(Q)))
