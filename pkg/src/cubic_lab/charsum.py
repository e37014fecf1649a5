"""Character-sum maxima and their Fourier-side approximations.

Partial sums of characters of order dividing 6 are tracked exactly in Z[omega]
(omega = e(1/3)), so the maximizing point is found without floating-point ties.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from math import gcd, pi, sqrt

import numpy as np

from .arith import smoothness_sieve
from .char_core import DirichletCharacter, DomainError, build_group, find_characters, gauss_sum

# e(j/6) = X + Y*omega for j = 0..5
_HEX_COORDS = np.array([(1, 0), (1, 1), (0, 1), (-1, 0), (-1, -1), (0, -1)], dtype=np.int64)

POLYA_CONVENTIONS = ("conj", "plain")


class InvalidGridError(ValueError):
    pass


@dataclass
class CharSumProfile:
    character_id: str
    modulus: int
    M: float
    N_max: int
    alpha: float
    exact_norm: int | None = None  # |S(N_max)|^2 as an integer when tracked in Z[omega]
    trajectory_digest: list[float] = field(default_factory=list)


def zomega_coords(chi) -> tuple[np.ndarray, np.ndarray] | None:
    """Integer coordinates (X, Y) of chi(n) = X + Y*omega over one period, or None.

    Only characters whose order divides 6 have values in Z[omega].
    """
    ang, den = chi.angle_table()
    if 6 % den:
        return None
    idx = np.where(ang < 0, 0, ang * (6 // den))
    xy = _HEX_COORDS[idx]
    xy[ang < 0] = 0
    return xy[:, 0], xy[:, 1]


def msum_exact(chi: DirichletCharacter, digest_points: int = 0) -> CharSumProfile:
    """M(chi) = max_{t<=q} |sum_{n<=t} chi(n)| / sqrt(q), ties to the smallest t."""
    if chi.is_principal:
        raise DomainError("M(chi) is defined for non-principal characters only")
    q = chi.modulus
    coords = zomega_coords(chi)
    if coords is not None:
        X = np.cumsum(coords[0][1:])
        X = np.append(X, X[-1] + coords[0][0])  # n = q contributes chi(0) = 0
        Y = np.cumsum(coords[1][1:])
        Y = np.append(Y, Y[-1] + coords[1][0])
        norm = X * X - X * Y + Y * Y
        k = int(np.argmax(norm))
        best = int(norm[k])
        M = sqrt(best / q)
        running = np.sqrt(np.maximum.accumulate(norm) / q)
    else:
        vals = chi.values(np.arange(1, q + 1))
        mags = np.abs(np.cumsum(vals))
        top = mags.max()
        k = int(np.flatnonzero(mags >= top - 1e-9 * max(1.0, top))[0])
        best = None
        M = float(mags[k]) / sqrt(q)
        running = np.maximum.accumulate(mags) / sqrt(q)
    digest = []
    if digest_points > 0:
        picks = np.unique(np.linspace(0, q - 1, digest_points).round().astype(int))
        digest = [float(running[i]) for i in picks]
    N = k + 1
    return CharSumProfile(chi.id, q, M, N, N / q, best, digest)


def partial_sums(chi, upto: int) -> np.ndarray:
    """Complex partial sums S(t) for t = 1..upto."""
    return np.cumsum(chi.values(np.arange(1, upto + 1)))


@lru_cache(maxsize=64)
def _residue_harmonics(q: int, Z: int) -> np.ndarray:
    """H_r = sum_{1<=m<=Z, m = r mod q} 1/m for r = 0..q-1."""
    out = np.zeros(q)
    chunk = 1 << 22
    for start in range(1, Z + 1, chunk):
        m = np.arange(start, min(Z, start + chunk - 1) + 1, dtype=np.int64)
        out += np.bincount(m % q, weights=1.0 / m, minlength=q)
    out.setflags(write=False)
    return out


def _polya_coeffs(chi: DirichletCharacter, convention: str) -> np.ndarray:
    if convention not in POLYA_CONVENTIONS:
        raise ValueError(f"unknown convention {convention!r}")
    table = chi.value_table()
    return np.conj(table) if convention == "conj" else table


def polya_truncated(chi: DirichletCharacter, t: float, Z: int, convention: str | None = None) -> complex:
    """(tau/(2 pi i)) sum_{1<=|n|<=Z} c(n)/n (1 - e(-n t/q)), c = conj(chi) or chi.

    When ``t`` is rational with denominator d <= 64, e(-n t/q) is periodic in n
    with period d*q and the sum collapses onto residue-class harmonic sums
    (an O(Z) table shared by every character of the modulus); other ``t`` is
    summed directly.
    """
    if not chi.is_primitive:
        raise DomainError("the Polya expansion requires a primitive character")
    if Z < 1:
        raise ValueError("Z must be >= 1")
    if convention is None:
        convention = calibrated_convention()
    q = chi.modulus
    c = _polya_coeffs(chi, convention)
    tau = gauss_sum(chi)
    frac = Fraction(t).limit_denominator(64)
    if frac == t:
        period = frac.denominator * q
        H = _residue_harmonics(period, Z)
        r = np.arange(period, dtype=np.int64)
        # phase e(-r t / q) = e(-(r * num mod period) / period)
        phase = np.exp(-2j * np.pi * ((r * frac.numerator) % period) / period)
        S = np.sum(H * (c[r % q] * (1 - phase) - c[(-r) % q] * (1 - np.conj(phase))))
    else:
        S = 0j
        chunk = 1 << 21
        for start in range(1, Z + 1, chunk):
            m = np.arange(start, min(Z, start + chunk - 1) + 1, dtype=np.int64)
            cm, cneg = c[m % q], c[(-m) % q]
            phase = np.exp(-2j * np.pi * ((m * t) % q) / q)
            S += np.sum((cm * (1 - phase) - cneg * (1 - np.conj(phase))) / m)
    return complex(tau / (2j * pi) * S)


def polya_residuals(chi: DirichletCharacter, ts, Z: int, convention: str | None = None) -> np.ndarray:
    """|sum_{n<=t} chi(n) - polya_truncated(chi, t, Z)| at each t."""
    ts = list(ts)
    S = partial_sums(chi, chi.modulus)
    out = []
    for t in ts:
        direct = S[int(np.floor(t)) - 1] if t >= 1 else 0
        out.append(abs(direct - polya_truncated(chi, t, Z, convention)))
    return np.array(out)


@lru_cache(maxsize=1)
def polya_calibration() -> dict:
    """Pick the coefficient convention by residual size on the cubic characters mod 7 and 13."""
    residuals = {conv: 0.0 for conv in POLYA_CONVENTIONS}
    for q in (7, 13):
        for chi in find_characters(q, order=3, primitive=True):
            ts = polya_t_grid(q)
            for conv in POLYA_CONVENTIONS:
                res = polya_residuals(chi, ts, q * q, conv).max()
                residuals[conv] = max(residuals[conv], float(res))
    choice = min(POLYA_CONVENTIONS, key=lambda c: residuals[c])
    return {"convention": choice, "residuals": residuals, "moduli": [7, 13]}


def calibrated_convention() -> str:
    return polya_calibration()["convention"]


def polya_t_grid(q: int, points: int = 64) -> list[float]:
    """Half-integer evaluation points floor(q j / points) + 1/2, j = 1..points.

    Partial sums jump at integers, where a Fourier series converges to the
    midpoint of the jump; half-integers keep the comparison away from jumps.
    """
    return sorted({min(q * j // points, q - 1) + 0.5 for j in range(1, points + 1)})


def _coefficients(chi, Z: int, weight: str, y: float, t_twist: float, h=None) -> tuple[np.ndarray, np.ndarray]:
    """Positive-n coefficients chi(n) h(n) / n^{1+it} for n = 1..Z with the weight mask applied."""
    if weight not in ("all", "smooth", "rough"):
        raise ValueError(f"weight must be all|smooth|rough, got {weight!r}")
    n = np.arange(1, Z + 1, dtype=np.int64)
    coef = chi.values(n) / n
    if t_twist:
        coef = coef * np.exp(-1j * t_twist * np.log(n))
    if h is not None:
        coef = coef * h(n)
    if weight != "all":
        gpf = smoothness_sieve(Z).largest[1 : Z + 1]
        keep = gpf <= y if weight == "smooth" else gpf > y
        coef = np.where(keep, coef, 0)
    return n, coef


def grid_max(
    chi,
    Z: int,
    R: int,
    weight: str = "all",
    y: float = 0.0,
    t_twist: float = 0.0,
    symmetric: bool = True,
    h=None,
) -> tuple[float, float]:
    """max_b |sum coef(n) e(n b/R)| over the grid b = 0..R-1, via one length-R FFT.

    With ``symmetric`` the sum runs over 1 <= |n| <= Z, the term at -n being
    chi(-n) h(n) / (-n * n^{it}); otherwise over 1 <= n <= Z.  Returns the
    maximum and the smallest maximizing grid point b/R.
    """
    if R < 8:
        raise InvalidGridError(f"grid size R={R} is below the minimum of 8")
    if R < 2 * Z:
        warnings.warn(f"R={R} < 2Z={2 * Z}: grid may be too coarse to resolve the maximum", stacklevel=2)
    vals = grid_values(chi, Z, R, weight, y, t_twist, symmetric, h)
    mags = np.abs(vals)
    b = int(np.argmax(mags))
    return float(mags[b]), b / R


def grid_values(chi, Z, R, weight="all", y=0.0, t_twist=0.0, symmetric=True, h=None) -> np.ndarray:
    n, coef = _coefficients(chi, Z, weight, y, t_twist, h)
    idx = n % R
    A = np.bincount(idx, weights=coef.real, minlength=R) + 1j * np.bincount(idx, weights=coef.imag, minlength=R)
    if symmetric:
        parity = chi.values(np.array([-1]))[0]
        neg = -parity * coef  # chi(-n) = chi(-1) chi(n); 1/(-n) flips the sign
        nidx = (-n) % R
        A += np.bincount(nidx, weights=neg.real, minlength=R) + 1j * np.bincount(nidx, weights=neg.imag, minlength=R)
    return R * np.fft.ifft(A)


def split_coefficients(chi, Z: int, y: float) -> dict[str, np.ndarray]:
    """Coefficient arrays (n = 1..Z) keyed by weight name."""
    return {w: _coefficients(chi, Z, w, y, 0.0)[1] for w in ("smooth", "rough", "all")}


def rough_tail(chi, y: float, z: float, t: float, alpha: float, h=None) -> complex:
    """sum_{1<n<=z, P-(n)>y} chi(n) h(n) e(n alpha) / n^{1+it}."""
    if y >= z:
        return 0j
    zi = int(np.floor(z))
    if zi < 2:
        return 0j
    sieve = smoothness_sieve(zi)
    n = np.flatnonzero(sieve.rough_mask(y)).astype(np.int64)
    if n.size == 0:
        return 0j
    terms = chi.values(n) * np.exp(2j * np.pi * ((n * alpha) % 1.0)) / n
    if t:
        terms = terms * np.exp(-1j * t * np.log(n))
    if h is not None:
        terms = terms * h(n)
    return complex(np.sum(terms))


def even_vanishing_exact(chi: DirichletCharacter, Z: int) -> tuple[int, int]:
    """Exact value of sum_{1<=|n|<=Z} chi(n)/n in Q(omega).

    Returned as integer numerators (X, Y) over the common denominator
    lcm(1..Z): the sum equals (X + Y omega) / lcm(1..Z).  Needs order | 6.
    """
    coords = zomega_coords(chi)
    if coords is None:
        raise DomainError("exact evaluation needs a character of order dividing 6")
    q = chi.modulus
    L = 1
    for k in range(2, Z + 1):
        L = L * k // gcd(L, k)
    X = Y = 0
    cx, cy = coords
    for n in range(1, Z + 1):
        r, s = n % q, (-n) % q
        dx = int(cx[r]) - int(cx[s])
        dy = int(cy[r]) - int(cy[s])
        if dx or dy:
            w = L // n
            X += dx * w
            Y += dy * w
    return X, Y


def principal_mod_one() -> DirichletCharacter:
    return DirichletCharacter(build_group(1), ())
