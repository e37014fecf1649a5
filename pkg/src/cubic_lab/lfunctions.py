"""L(s, chi) near s = 1 by accelerated truncated Dirichlet series and by Euler products."""

from __future__ import annotations

from dataclasses import dataclass, field
from math import log, sqrt

import numpy as np

from .arith import cached_primes, divisors, factorize
from .char_core import CharacterProduct, DirichletCharacter, DomainError, find_characters, primitive_characters

DEFAULT_EXCEPTIONAL_C = 0.1
EPS = np.finfo(float).eps


class PoleError(DomainError):
    """L(s, chi) at s = 1 for a principal character."""


@dataclass
class LValue:
    s: complex
    character: str
    value: complex
    method: str  # "truncated-sum" | "euler-smooth"
    truncation: float
    error_estimate: float
    raw_partial: complex | None = None
    notes: list[str] = field(default_factory=list)


def _is_principal(char) -> bool:
    return char.is_principal


def _period_data(char) -> tuple[np.ndarray, complex, float]:
    """(S, mean of S, max |F|) where S(j) is the j-th partial sum and F(j) = sum_{i<j} (S(i) - mean)."""
    q = char.modulus
    vals = char.value_table()
    S = np.concatenate(([0j], np.cumsum(vals[1:q])))
    mean = S.mean()
    F = np.concatenate(([0j], np.cumsum(S - mean)))
    return S, complex(mean), float(np.abs(F).max())


def dirichlet_series(char, s: complex, Z: int) -> tuple[complex, float, complex]:
    """sum_{n>=1} chi(n) n^{-s} for Re s > 0 and non-principal chi.

    Returns (value, error_bound, raw partial sum to Z).  The tail beyond Z is
    replaced by (mean(S) - S(Z)) Z^{-s}, S the periodic partial sum; the
    remaining error is at most |s||s+1| 2 max|F| / ((Re s + 1) Z^{Re s + 1}).
    """
    if _is_principal(char):
        raise PoleError("principal character: the Dirichlet series has a pole at s = 1")
    sigma = s.real
    if sigma <= 0:
        raise DomainError("needs Re s > 0")
    q = char.modulus
    raw = 0j
    mass = 0.0
    chunk = 1 << 21
    table = char.value_table()
    for start in range(1, Z + 1, chunk):
        n = np.arange(start, min(Z, start + chunk - 1) + 1, dtype=np.int64)
        terms = table[n % q] * np.exp(-s * np.log(n))
        raw += complex(np.sum(terms))
        mass += float(np.sum(np.abs(terms)))
    S, mean, fmax = _period_data(char)
    tail = (mean - S[Z % q]) * Z ** (-s)
    bound = abs(s) * abs(s + 1) * 2 * fmax / ((sigma + 1) * Z ** (sigma + 1))
    roundoff = 16 * EPS * mass
    return raw + tail, bound + roundoff, raw


def l_one_truncated(char, t: float = 0.0, Z: int | None = None) -> LValue:
    """L(1 + it, chi) from sum_{n<=Z} chi(n)/n^{1+it} plus the periodic tail correction."""
    q = char.modulus
    if Z is None:
        Z = 64 * q
    if Z < q:
        raise ValueError(f"Z={Z} must be at least the modulus {q}")
    s = complex(1.0, t)
    value, err, raw = dirichlet_series(char, s, Z)
    return LValue(s, char.id, value, "truncated-sum", Z, err, raw)


def euler_smooth(char, t: float = 0.0, y: float = 2.0) -> LValue:
    """prod_{p<=y} (1 - chi(p)/p^{1+it})^{-1}.

    The attached error estimate is a heuristic |value| sqrt(q) log(qy)/sqrt(y),
    the shape of the conditional prime-sum tail; it is not a proof bound.
    """
    s = complex(1.0, t)
    q = char.modulus
    if y < 2:
        return LValue(s, char.id, 1 + 0j, "euler-smooth", y, 0.0, notes=["empty product"])
    primes = cached_primes(int(y))
    vals = char.values(primes) * np.exp(-s * np.log(primes))
    value = complex(np.exp(-np.sum(np.log1p(-vals))))
    err = abs(value) * sqrt(q) * log(q * y + 2) / sqrt(y)
    return LValue(s, char.id, value, "euler-smooth", y, err, notes=["heuristic error estimate"])


def twist(chi: DirichletCharacter, psi: DirichletCharacter) -> CharacterProduct:
    """chi * conj(psi) on the lcm of the moduli."""
    return CharacterProduct((chi, False), (psi, True))


def real_primitive_characters(d: int) -> list[DirichletCharacter]:
    return [c for c in primitive_characters(d) if c.order == 2]


def exceptional_screen(m: int, c: float = DEFAULT_EXCEPTIONAL_C, sigma_points: int = 25, Z: int | None = None) -> dict:
    """Heuristic real-zero scan of L(sigma, chi) on [1 - c/log(2m), 1].

    Covers every real primitive character whose conductor divides m.  A sign
    change, or a value not separated from zero by its error bound, flags m.
    This is a screen, not a verified zero-free region.
    """
    if m < 1:
        raise DomainError("m must be >= 1")
    detail: dict = {"heuristic": True, "c": c, "characters": [], "sigma_range": None}
    flagged = False
    if m > 1:
        lo = 1 - c / log(2 * m)
        sigmas = np.linspace(max(lo, 0.05), 1.0, sigma_points)
        detail["sigma_range"] = [float(sigmas[0]), 1.0]
        for d in divisors(m):
            for chi in real_primitive_characters(d):
                Zd = Z or 256 * d
                vals, errs = [], []
                for sig in sigmas:
                    v, e, _ = dirichlet_series(chi, complex(sig, 0.0), Zd)
                    vals.append(v.real)
                    errs.append(e)
                vals, errs = np.array(vals), np.array(errs)
                sign_change = bool(np.any(np.sign(vals[:-1]) != np.sign(vals[1:])))
                unresolved = bool(np.any(np.abs(vals) <= errs))
                flagged |= sign_change or unresolved
                detail["characters"].append(
                    {
                        "character": chi.id,
                        "min_L": float(vals.min()),
                        "L_at_1": float(vals[-1]),
                        "sign_change": sign_change,
                        "unresolved": unresolved,
                    }
                )
        if len(factorize(m)) == 1 and factorize(m)[0][1] == 1 and m > 2:
            full = find_characters(m, order=m - 1)
            if full:
                detail["order_m_minus_1_character"] = full[0].id
    return {"m": m, "is_flagged": flagged, "detail": detail}
