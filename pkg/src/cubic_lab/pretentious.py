"""Pretentious distance between multiplicative functions and best-twist search."""

from __future__ import annotations

from collections.abc import Mapping
from dataclasses import dataclass
from math import log, pi, sqrt

import numpy as np

from .arith import cached_primes
from .char_core import DirichletCharacter, DomainError, build_group, primitive_characters

BETA = 3 * sqrt(3) / (2 * pi)

# relative slack under which two objective values count as tied
TIE_RTOL = 1e-12


class IncompleteInputError(ValueError):
    pass


def prime_values(f, primes: np.ndarray) -> np.ndarray:
    """Values of ``f`` at ``primes``; f is a prime-keyed mapping or a vectorized callable (characters qualify)."""
    if isinstance(f, Mapping):
        missing = [int(p) for p in primes if int(p) not in f]
        if missing:
            raise IncompleteInputError(f"no value supplied for primes {missing[:5]}{'...' if len(missing) > 5 else ''}")
        return np.array([complex(f[int(p)]) for p in primes])
    if callable(f):
        out = np.asarray(f(primes), dtype=complex)
        if out.shape != primes.shape:
            raise IncompleteInputError("callable returned the wrong number of prime values")
        return out
    raise TypeError(f"unsupported prime-indexed values: {type(f).__name__}")


def distance_sq(f, g, y: float) -> float:
    """D(f, g; y)^2 = sum_{p<=y} (1 - Re f(p) conj(g(p))) / p."""
    if y < 2:
        raise DomainError("distance needs y >= 2")
    primes = cached_primes(int(y))
    fv, gv = prime_values(f, primes), prime_values(g, primes)
    return float(np.sum((1.0 - (fv * np.conj(gv)).real) / primes))


def t_grid(T: float, t_steps: int) -> np.ndarray:
    return -T + 2.0 * T * np.arange(t_steps + 1) / t_steps


def _twisted_objective(fv: np.ndarray, primes: np.ndarray, ts: np.ndarray) -> np.ndarray:
    """sum_p (1 - Re f(p) p^{-it}) / p for each t, evaluated in row blocks."""
    logp = np.log(primes)
    inv_p = 1.0 / primes
    base = float(np.sum(inv_p))
    out = np.empty(ts.size)
    block = max(1, (1 << 22) // max(1, primes.size))
    for i in range(0, ts.size, block):
        tb = ts[i : i + block, None]
        out[i : i + block] = base - (np.cos(tb * logp) * fv.real + np.sin(tb * logp) * fv.imag) @ inv_p
    return out


def _pick(values: np.ndarray, keys: list[tuple]) -> int:
    """Index of the minimum, breaking near-ties by the supplied keys."""
    vmin = values.min()
    tied = np.flatnonzero(values <= vmin + TIE_RTOL * max(1.0, abs(vmin)))
    return int(min(tied, key=lambda i: keys[i]))


def m_distance(f, x: float, T: float, t_steps: int = 100) -> tuple[float, float]:
    """min over the grid |t| <= T of D(f, n^{it}; x)^2, as (t_star, value).

    Ties go to the smallest |t|, then the smaller t.
    """
    if x < 2 or T <= 0 or t_steps < 3:
        raise DomainError("m_distance needs x >= 2, T > 0, t_steps >= 3")
    primes = cached_primes(int(x))
    fv = prime_values(f, primes)
    ts = t_grid(T, t_steps)
    vals = _twisted_objective(fv, primes, ts)
    i = _pick(vals, [(abs(t), t) for t in ts])
    return float(ts[i]), float(vals[i])


@dataclass
class PretentiousFit:
    xi: DirichletCharacter
    m: int
    t: float
    value: float
    y: float
    t_grid_step: float
    T: float
    conductor_bound: float
    candidates: int
    tie_break: str = "value, then smaller m, smaller |t|, lexicographic xi exponents"

    @property
    def xi_parity(self) -> int:
        return self.xi.parity


def twist_window(y: float) -> tuple[float, float]:
    """(T, conductor bound) = ((log y)^(-7/11), (log y)^(4/11))."""
    ly = log(y)
    return ly ** (-7 / 11), ly ** (4 / 11)


def twist_candidates(bound: float) -> list[DirichletCharacter]:
    """Primitive characters of conductor m < bound, the trivial character first."""
    out = [DirichletCharacter(build_group(1), ())]
    m = 2
    while m < bound:
        out.extend(primitive_characters(m))
        m += 1
    return out


def best_twist(chi, y: float, max_conductor: float | None = None, t_steps: int = 100, T: float | None = None) -> PretentiousFit:
    """Minimize D(chi conj(xi), n^{it}; y)^2 over primitive xi of small conductor and a t-grid.

    Defaults follow the windows |t| <= (log y)^(-7/11), conductor < (log y)^(4/11);
    ``max_conductor`` and ``T`` override them.
    """
    if y < 100:
        raise DomainError("best_twist needs y >= 100")
    T_default, bound_default = twist_window(y)
    T = T_default if T is None else T
    bound = bound_default if max_conductor is None else max_conductor
    primes = cached_primes(int(y))
    chi_p = prime_values(chi, primes)
    ts = t_grid(T, t_steps)
    cands = twist_candidates(bound)
    best = None
    all_vals, all_keys, where = [], [], []
    for xi in cands:
        vals = _twisted_objective(chi_p * np.conj(xi.values(primes)), primes, ts)
        for j, t in enumerate(ts):
            all_vals.append(vals[j])
            all_keys.append((xi.modulus, abs(t), xi.exponents, t))
            where.append((xi, float(t)))
    i = _pick(np.array(all_vals), all_keys)
    xi, t = where[i]
    best = PretentiousFit(
        xi=xi,
        m=xi.modulus,
        t=t,
        value=float(all_vals[i]),
        y=y,
        t_grid_step=2 * T / t_steps,
        T=T,
        conductor_bound=bound,
        candidates=len(cands),
    )
    return best


def fit_objective(chi, fit: PretentiousFit) -> float:
    """Recompute the fitted objective as D(chi conj(xi), n^{it}; y)^2."""
    primes = cached_primes(int(fit.y))
    twist = np.exp(1j * fit.t * np.log(primes))
    return distance_sq(lambda p: prime_values(chi, p) * np.conj(fit.xi.values(p)), lambda p: twist, fit.y)


def major2_diagnostic(chi, xi: DirichletCharacter, y: float, alpha: float = 7 / 11, t_steps: int = 100) -> dict:
    """Gap between the twisted distance and the lower-bound shape (1 - b + a pi^2 b / (36 k^2)) loglog y.

    Purely a report: the bound carries an unknown O(log log m) term.
    """
    T = log(y) ** (-alpha)
    t_star, value = m_distance(lambda p: prime_values(chi, p) * np.conj(xi.values(p)), y, T, t_steps)
    k = xi.order
    shape = (1 - BETA + alpha * pi**2 * BETA / (36 * k * k)) * log(log(y))
    return {
        "xi": xi.id,
        "order": k,
        "odd": xi.parity == -1,
        "t_star": t_star,
        "value": value,
        "shape": shape,
        "gap": value - shape,
        "asserted": False,
    }
