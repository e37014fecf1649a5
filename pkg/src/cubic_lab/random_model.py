"""Random completely multiplicative models X and Y and moments of their Euler products.

Prime values are encoded as integer codes: ``0, 1, 2`` for omega^code and
``ZERO`` for the zero atom.  Atom weights are exact fractions; floats enter
only when products are evaluated.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .arith import cached_primes, factorize
from .char_core import DirichletCharacter

ZERO = 3
_ROOT_COS = np.array([1.0, -0.5, -0.5, 0.0])


class DivergenceError(ValueError):
    pass


@dataclass(frozen=True)
class RandomMultSpec:
    kind: str  # "X" or "Y"
    P: int

    def __post_init__(self):
        if self.kind not in ("X", "Y"):
            raise ValueError(f"kind must be 'X' or 'Y', got {self.kind!r}")
        if self.P < 2:
            raise ValueError("prime cutoff P must be >= 2")

    @property
    def id(self) -> str:
        return f"{self.kind}[P={self.P}]"


def atoms(kind: str, p: int) -> list[tuple[int, Fraction]]:
    """(code, probability) atoms of the value at the prime p."""
    third = Fraction(1, 3)
    if kind == "X" or p == 3 or p % 3 == 2:
        return [(0, third), (1, third), (2, third)]
    z = Fraction(2, p + 2)
    w = Fraction(p, 3 * (p + 2))
    return [(ZERO, z), (0, w), (1, w), (2, w)]


def mean_is_zero(atom_list: list[tuple[int, Fraction]]) -> bool:
    """Exact E[value] = 0: the three cube roots carry equal mass (1 + w + w^2 = 0)."""
    root_w = {code: w for code, w in atom_list if code != ZERO}
    return len(root_w) == 3 and len(set(root_w.values())) == 1 and sum(w for _, w in atom_list) == 1


def _zero_prob(kind: str, primes: np.ndarray) -> np.ndarray:
    if kind == "X":
        return np.zeros(primes.size)
    split = (primes % 3 == 1)
    return np.where(split, 2.0 / (primes + 2), 0.0)


def replicate_rng(seed: int, replicate: int) -> np.random.Generator:
    """Independent stream for one replicate, keyed by (master seed, replicate index)."""
    return np.random.default_rng(np.random.SeedSequence([int(seed), int(replicate)]))


def _draw_codes(kind: str, primes: np.ndarray, zprob: np.ndarray, rng: np.random.Generator) -> np.ndarray:
    u = rng.random(primes.size)
    is_zero = u < zprob
    scaled = (u - zprob) / (1.0 - zprob)
    codes = np.minimum((3.0 * scaled).astype(np.int64), 2)
    codes[is_zero] = ZERO
    return codes


@dataclass
class RandomMultSample:
    spec: RandomMultSpec
    seed: int
    replicate: int
    primes: np.ndarray
    codes: np.ndarray

    def values(self) -> np.ndarray:
        out = np.exp(2j * np.pi * np.where(self.codes == ZERO, 0, self.codes) / 3)
        out[self.codes == ZERO] = 0
        return out

    def as_dict(self) -> dict[int, complex]:
        return dict(zip(map(int, self.primes), self.values()))


def sample(spec: RandomMultSpec, seed: int, replicate: int = 0) -> RandomMultSample:
    primes = cached_primes(spec.P)
    codes = _draw_codes(spec.kind, primes, _zero_prob(spec.kind, primes), replicate_rng(seed, replicate))
    return RandomMultSample(spec, int(seed), int(replicate), primes, codes)


def sample_matrix(spec: RandomMultSpec, seed: int, start: int, count: int) -> np.ndarray:
    """Codes for replicates start..start+count-1, one row per replicate stream."""
    primes = cached_primes(spec.P)
    zprob = _zero_prob(spec.kind, primes)
    return np.stack([_draw_codes(spec.kind, primes, zprob, replicate_rng(seed, start + i)) for i in range(count)])


def euler_product_at_one(smp: RandomMultSample, psi: DirichletCharacter) -> complex:
    """prod_{p<=P} (1 - v(p) conj(psi(p)) / p)^{-1}; the tail beyond P is not included."""
    w = smp.values() * np.conj(psi.values(smp.primes)) / smp.primes
    factors = 1.0 - w
    assert np.all(np.abs(factors) > 0), "a factor 1 - v/p cannot vanish for |v| <= 1 < p"
    return complex(np.exp(-np.sum(np.log(factors))))


def _log_abs_sq_factors(codes: np.ndarray, psi: DirichletCharacter, primes: np.ndarray) -> np.ndarray:
    """log |1 - v conj(psi(p)) / p|^2 for a code matrix (rows = replicates)."""
    ang, k = psi.angles(primes), psi.order
    psi_zero = ang < 0
    # angle of v * conj(psi(p)) in turns, per prime
    turns = np.where(codes == ZERO, 0.0, codes / 3.0) - np.where(psi_zero, 0, ang) / k
    re = np.cos(2 * np.pi * turns)
    mod_sq = np.where((codes == ZERO) | psi_zero, 0.0, 1.0)
    return np.log1p(-2.0 * re * mod_sq / primes + mod_sq / primes**2)


@dataclass
class MomentEstimate:
    target: str
    estimate: float
    stderr: float
    replicates: int
    method: str  # "monte-carlo" | "exact-product"
    log_estimate: float | None = None
    meta: dict = field(default_factory=dict)


def mc_moment(spec: RandomMultSpec, psi: DirichletCharacter, r: float, replicates: int, seed: int, block: int = 512) -> MomentEstimate:
    """Monte Carlo mean of |L(1, V conj(psi))|^{2r} over independent replicates."""
    target = f"E|L(1,{spec.kind}~psi)|^{2 * r:g} psi={psi.id} P={spec.P}"
    if r == 0:
        return MomentEstimate(target, 1.0, 0.0, replicates, "monte-carlo")
    if replicates < 100:
        raise ValueError("mc_moment needs at least 100 replicates")
    primes = cached_primes(spec.P)
    samples = []
    for start in range(0, replicates, block):
        codes = sample_matrix(spec, seed, start, min(block, replicates - start))
        log_abs_sq = _log_abs_sq_factors(codes, psi, primes).sum(axis=1)
        samples.append(np.exp(-r * log_abs_sq))
    x = np.concatenate(samples)
    mean = math.fsum(x) / x.size
    var = math.fsum((x - mean) ** 2) / (x.size - 1)
    return MomentEstimate(target, mean, math.sqrt(var / x.size), x.size, "monte-carlo", math.log(mean), {"seed": seed})


def per_prime_expectations(spec: RandomMultSpec, psi: DirichletCharacter, r: float) -> tuple[np.ndarray, np.ndarray]:
    """(primes, E|1 - V(p) conj(psi(p))/p|^{-2r}) averaged exactly over the atoms."""
    primes = cached_primes(spec.P)
    zprob = _zero_prob(spec.kind, primes)
    total = zprob * 1.0  # the zero atom contributes |1|^{-2r} = 1
    root_w = (1.0 - zprob) / 3.0
    for code in range(3):
        codes = np.full((1, primes.size), code)
        total = total + root_w * np.exp(-r * _log_abs_sq_factors(codes, psi, primes)[0])
    return primes, total


def exact_moment(spec: RandomMultSpec, psi: DirichletCharacter, r: float) -> MomentEstimate:
    """prod_{p<=P} E|1 - V(p) conj(psi(p))/p|^{-2r}, with no sampling error."""
    _, factors = per_prime_expectations(spec, psi, r)
    log_est = math.fsum(np.log(factors))
    target = f"E|L(1,{spec.kind}~psi)|^{2 * r:g} psi={psi.id} P={spec.P}"
    return MomentEstimate(target, math.exp(log_est) if log_est < 700 else math.inf, 0.0, 0, "exact-product", log_est)


def x_orthogonality_exact(n: int, m: int) -> tuple[Fraction, Fraction]:
    """E[X(n) conj(X(m))] by enumerating all atom assignments on the primes dividing nm.

    Returned as (A, B) with E = A + B*omega.
    """
    fn = dict(factorize(n)) if n > 1 else {}
    fm = dict(factorize(m)) if m > 1 else {}
    ps = sorted(set(fn) | set(fm))
    counts = [0, 0, 0]
    for assign in itertools.product(range(3), repeat=len(ps)):
        turn = sum(a * (fn.get(p, 0) - fm.get(p, 0)) for a, p in zip(assign, ps)) % 3
        counts[turn] += 1
    total = 3 ** len(ps)
    # c0 + c1 w + c2 w^2 with w^2 = -1 - w
    return Fraction(counts[0] - counts[2], total), Fraction(counts[1] - counts[2], total)


def smooth_numbers(P: int, N: float) -> list[tuple[int, tuple[int, ...]]]:
    """All P-smooth n <= N with their exponent vectors over the primes <= P."""
    primes = [int(p) for p in cached_primes(P)]
    out = [(1, ())]
    for p in primes:
        nxt = []
        for n, exps in out:
            e, v = 0, n
            while v <= N:
                nxt.append((v, exps + (e,)))
                v *= p
                e += 1
        out = nxt
    return sorted(out)


def _dk_from_exponents(exps, k: int) -> int:
    out = 1
    for e in exps:
        out *= math.comb(e + k - 1, k - 1)
    return out


def _rankin_tail(P: int, k: int, s: float, N: float) -> float:
    """Upper bound for sum_{n > N, P-smooth} d_k(n)/n^s, optimized over the Rankin shift."""
    primes = np.asarray(cached_primes(P), dtype=float)
    best = math.inf
    for delta in np.linspace(0.02, 0.98, 49) * s:
        sd = s - delta
        log_b = -delta * math.log(N) - k * float(np.sum(np.log1p(-primes ** (-sd))))
        best = min(best, math.exp(log_b))
    return best


def cube_class_divisor_sum(k: int, s: float, P: int, N: float) -> float:
    """sum over P-smooth n, m <= N with nm^2 a cube of d_k(n) d_k(m) / (nm)^s.

    nm^2 is a cube exactly when the exponent vectors of n and m agree mod 3, so
    the double sum is a sum of squares of class sums.
    """
    classes: dict[tuple[int, ...], list[float]] = {}
    for n, exps in smooth_numbers(P, N):
        key = tuple(e % 3 for e in exps)
        classes.setdefault(key, []).append(_dk_from_exponents(exps, k) / n**s)
    return math.fsum(math.fsum(v) ** 2 for v in classes.values())


def x_moment_product(k: int, s: float, P: int) -> float:
    """prod_{p<=P} E|1 - X(p)/p^s|^{-2k} averaged over the three atoms."""
    total = 0.0
    for p in cached_primes(P):
        x = float(p) ** (-s)
        avg = sum(abs(1 - complex(math.cos(2 * math.pi * a / 3), math.sin(2 * math.pi * a / 3)) * x) ** (-2 * k) for a in range(3)) / 3
        total += math.log(avg)
    return math.exp(total)


def x_moment_vs_divisor_sum(k: int, s: float, N: float | None, P: int, rel_target: float = 1e-11) -> dict:
    """Compare the cube-pair divisor sum over P-smooth n, m with the per-prime expectation product.

    ``N=None`` grows the truncation until the Rankin tail bound falls below
    ``rel_target`` relative to the sum.
    """
    if s <= 0.5:
        raise DivergenceError("the divisor-sum identity needs s > 1/2")
    rhs = x_moment_product(k, s, P)
    full_linear = math.prod((1 - float(p) ** (-s)) ** (-k) for p in cached_primes(P))
    if N is None:
        N = 1e6
        while 2 * _rankin_tail(P, k, s, N) * full_linear > rel_target * rhs and N < 1e300:
            N *= 1e3
    lhs = cube_class_divisor_sum(k, s, P, N)
    tail = 2 * _rankin_tail(P, k, s, N) * full_linear
    rel = abs(lhs - rhs) / rhs
    return {"k": k, "s": s, "P": P, "N": N, "lhs": lhs, "rhs": rhs, "tail_bound": tail, "rel_diff": rel, "agree": abs(lhs - rhs) <= tail + 1e-12 * rhs}
