"""Family-level pipelines over F3(Q) with deterministic CSV/JSON emission."""

from __future__ import annotations

import io
import json
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from fractions import Fraction
from functools import lru_cache

import numpy as np

from . import __version__
from .arith import smoothness_sieve
from .char_core import DirichletCharacter, enumerate_cubic_primitive
from .charsum import CharSumProfile, calibrated_convention, msum_exact
from .lfunctions import l_one_truncated, twist
from .pretentious import BETA, best_twist

DESK_MAX_Q = 200_000
DEFAULT_EPSILON = 0.1
MIN_Y = 100.0
MIN_B = 2.0


def default_threads() -> int:
    env = os.environ.get("CUBIC_LAB_THREADS")
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            pass
    return 1


def _pmap(fn, items, threads: int | None = None) -> list:
    """Order-preserving map; results are reassembled by position, so output never depends on scheduling."""
    threads = threads or default_threads()
    if threads <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, items))


def family_Z(Q: int) -> int:
    """Truncation Q^(21/40), rounded up."""
    return max(2, math.ceil(Q ** (21 / 40)))


@lru_cache(maxsize=8)
def _family(Q: int) -> tuple[DirichletCharacter, ...]:
    if Q > DESK_MAX_Q:
        raise ValueError(f"Q={Q} exceeds the desk ceiling {DESK_MAX_Q}")
    return tuple(sorted(enumerate_cubic_primitive(Q), key=lambda c: c.sort_key()))


def family_profiles(Q: int, threads: int | None = None) -> list[tuple[DirichletCharacter, CharSumProfile]]:
    fam = _family(Q)
    return list(zip(fam, _pmap(msum_exact, fam, threads)))


# ---------------------------------------------------------------- distribution


@dataclass
class DistributionTable:
    Q: int
    filter: str
    total: int
    rows: list[tuple[float, int, float]]
    empty: bool = False


def parse_vgrid(spec: str) -> list[float]:
    """'start:stop:step' with stop included when it lies on the grid."""
    try:
        start, stop, step = (float(x) for x in spec.split(":"))
    except ValueError as exc:
        raise ValueError(f"V-grid must look like start:stop:step, got {spec!r}") from exc
    if step <= 0 or stop < start:
        raise ValueError("V-grid needs step > 0 and stop >= start")
    count = int(math.floor((stop - start) / step + 1e-9)) + 1
    return [round(start + i * step, 12) for i in range(count)]


def dist_table(Q: int, V_grid, threads: int | None = None) -> DistributionTable:
    """Counts and proportions of #{chi in F3(Q) : M(chi) > V} on a V-grid."""
    Ms = np.array([p.M for _, p in family_profiles(Q, threads)])
    total = Ms.size
    rows = []
    for V in sorted(V_grid):
        count = int(np.count_nonzero(Ms > V))
        rows.append((float(V), count, count / total if total else 0.0))
    return DistributionTable(Q, "primitive cubic, conductor <= Q, coprime to 3", total, rows, empty=total == 0)


# ---------------------------------------------------------------- tails


def tail_grid(Z: int, R: int) -> np.ndarray:
    """t-grid {l/T : 0 <= l <= T} with T = R (log Z)^2 / Z rounded up."""
    T = max(1, math.ceil(R * math.log(Z) ** 2 / Z))
    return np.arange(T + 1) / T


def twisted_rough_max(chi: DirichletCharacter, Z: int, R: int, y: float, ts: np.ndarray, h=None) -> float:
    """max over t in ts and alpha in {b/R} of |sum_{n<=Z, P+(n)>y} chi(n) h(n) e(n alpha) / n^(1+it)|."""
    n = np.arange(1, Z + 1, dtype=np.int64)
    keep = smoothness_sieve(Z).largest[1 : Z + 1] > y
    n = n[keep]
    if n.size == 0:
        return 0.0
    base = chi.values(n) / n
    if h is not None:
        base = base * h(n)
    coef = base[None, :] * np.exp(-1j * np.outer(ts, np.log(n)))
    A = np.zeros((ts.size, R), dtype=complex)
    np.add.at(A, (slice(None), n % R), coef)
    return float(np.abs(R * np.fft.ifft(A, axis=1)).max())


def tail_event_rate(Q: int, y: float, h_spec=None, threshold: float = 1.0, Z: int | None = None, R: int | None = None, threads: int | None = None) -> dict:
    """Fraction of F3(Q) whose twisted rough-tail maximum exceeds ``threshold``."""
    if y < 2:
        raise ValueError("y must be >= 2")
    fam = _family(Q)
    Z = Z or family_Z(Q)
    R = R or 4 * Z
    ts = tail_grid(Z, R)
    maxima = np.array(_pmap(lambda c: twisted_rough_max(c, Z, R, y, ts, h_spec), fam, threads)) if fam else np.zeros(0)
    exceed = int(np.count_nonzero(maxima > threshold))
    return {
        "Q": Q,
        "y": y,
        "Z": Z,
        "R": R,
        "t_points": int(ts.size),
        "threshold": threshold,
        "family_size": len(fam),
        "exceed": exceed,
        "rate": exceed / len(fam) if fam else 0.0,
        "max_tail": float(maxima.max()) if maxima.size else 0.0,
    }


# ---------------------------------------------------------------- structure


def rational_approx(alpha, B: float) -> tuple[int, int]:
    """Reduced a/b with b <= B and |alpha - a/b| <= 1/(bB).

    Returns the smallest b with ||b alpha|| < 1/B strictly (always attainable:
    some b <= floor(B) has ||b alpha|| < 1/(floor(B) + 1)), so boundary ties go
    to the larger denominator.  Such a b is a record minimum of ||b alpha||,
    hence a continued-fraction convergent denominator.
    """
    if B < 1:
        raise ValueError("B must be >= 1")
    x = Fraction(alpha)
    Bf = Fraction(B)
    h0, h1, k0, k1 = 0, 1, 1, 0
    rest = x
    while True:
        a_i = math.floor(rest)
        h0, h1 = h1, a_i * h1 + h0
        k0, k1 = k1, a_i * k1 + k0
        if k1 > B:
            break
        if abs(x - Fraction(h1, k1)) * k1 * Bf < 1:
            return h1, k1
        frac = rest - a_i
        if frac == 0:
            break
        rest = 1 / frac
    raise AssertionError("no approximation found; Dirichlet's theorem guarantees one")


def y_of_V(V: float, epsilon: float = DEFAULT_EPSILON) -> float | None:
    """exp(V^(1/beta) (log V)^(1/(4 beta) + epsilon/2)); None when log V <= 0."""
    if V <= 1:
        return None
    expo = V ** (1 / BETA) * math.log(V) ** (1 / (4 * BETA) + epsilon / 2)
    return math.exp(expo) if expo < 700 else math.inf


def B_of_V(V: float) -> float | None:
    if V <= 1:
        return None
    return math.exp(V / math.log(V))


@dataclass
class StructureRecord:
    character: str
    modulus: int
    M: float
    N: int
    alpha: float
    V: float
    a: int
    b: int
    B: float
    y: float
    y_clamped: bool
    B_clamped: bool
    degenerate: bool
    xi: str
    m: int
    t: float
    fit_value: float
    xi_odd: bool
    m_divides_b: bool
    lvalue: float
    lvalue_error: float
    ratio: float
    smooth_proxy: float
    regime_flag: str = "outside stated range"
    notes: list[str] = field(default_factory=list)


def smooth_proxy(chi: DirichletCharacter, alpha: float, y: float, Z: int) -> float:
    """(1/2pi) |sum_{1<=|n|<=Z, P+(n)<=y} chi(n) e(n alpha)/n|."""
    n = np.arange(1, Z + 1, dtype=np.int64)
    keep = smoothness_sieve(Z).largest[1 : Z + 1] <= y
    n = n[keep]
    ph = np.exp(2j * np.pi * ((n * alpha) % 1.0))
    vals = chi.values(n) / n
    s = np.sum(vals * ph) - chi.parity * np.sum(vals * np.conj(ph))
    return float(abs(s) / (2 * math.pi))


def _structure_one(chi: DirichletCharacter, prof: CharSumProfile, epsilon: float, Z_proxy: int) -> StructureRecord:
    V = prof.M
    notes = []
    y_raw = y_of_V(V, epsilon)
    B_raw = B_of_V(V)
    degenerate = y_raw is None or V <= math.e
    y = max(MIN_Y, y_raw) if y_raw is not None else MIN_Y
    B = max(MIN_B, B_raw) if B_raw is not None and V > math.e else MIN_B
    alpha = Fraction(prof.N_max, prof.modulus)
    a, b = rational_approx(alpha, B)
    fit = best_twist(chi, y)
    lv = l_one_truncated(twist(chi, fit.xi), fit.t)
    lmod = float(abs(lv.value))
    ratio = V * math.sqrt(fit.m) / lmod if lmod > 0 else math.inf
    if y_raw is None or y_raw < MIN_Y:
        notes.append("y clamped")
    if degenerate:
        notes.append("degenerate V")
    return StructureRecord(
        character=chi.id,
        modulus=chi.modulus,
        M=V,
        N=prof.N_max,
        alpha=float(alpha),
        V=V,
        a=a,
        b=b,
        B=B,
        y=y,
        y_clamped=y_raw is None or y_raw < MIN_Y,
        B_clamped=B_raw is None or V <= math.e or B_raw < MIN_B,
        degenerate=degenerate,
        xi=fit.xi.id,
        m=fit.m,
        t=fit.t,
        fit_value=fit.value,
        xi_odd=fit.xi.parity == -1,
        m_divides_b=b % fit.m == 0,
        lvalue=lmod,
        lvalue_error=float(lv.error_estimate),
        ratio=ratio,
        smooth_proxy=smooth_proxy(chi, float(alpha), y, Z_proxy),
        notes=notes,
    )


def structure_report(Q: int, top_fraction: float, epsilon: float = DEFAULT_EPSILON, threads: int | None = None) -> list[StructureRecord]:
    """Diagnostics for the top ``top_fraction`` of F3(Q) by M, ordered by decreasing M then id."""
    if not 0 < top_fraction <= 1:
        raise ValueError("top_fraction must lie in (0, 1]")
    profs = family_profiles(Q, threads)
    if not profs:
        return []
    ranked = sorted(profs, key=lambda cp: (-cp[1].M, cp[0].sort_key()))
    keep = ranked[: max(1, math.ceil(top_fraction * len(ranked)))]
    Zp = family_Z(Q)
    return _pmap(lambda cp: _structure_one(cp[0], cp[1], epsilon, Zp), keep, threads)


def ratio_summary(records: list[StructureRecord]) -> dict:
    r = np.array([x.ratio for x in records if math.isfinite(x.ratio)])
    if r.size == 0:
        return {"count": 0}
    return {"count": int(r.size), **{f"q{int(100 * q)}": float(np.quantile(r, q)) for q in (0.0, 0.25, 0.5, 0.75, 1.0)}}


# ---------------------------------------------------------------- family moments


def family_l_values(Q: int, psi: DirichletCharacter, threads: int | None = None) -> np.ndarray:
    fam = _family(Q)
    return np.array(_pmap(lambda c: abs(l_one_truncated(twist(c, psi)).value), fam, threads))


def family_l_moment(Q: int, psi: DirichletCharacter, r: float, threads: int | None = None) -> float:
    """(1/#F3(Q)) sum |L(1, chi conj(psi))|^(2r), summed with math.fsum."""
    if r == 0:
        return 1.0
    vals = family_l_values(Q, psi, threads)
    return math.fsum(vals ** (2 * r)) / vals.size


# ---------------------------------------------------------------- emission


def _fmt(v) -> str:
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        return format(v, ".12g")
    if isinstance(v, (list, tuple)):
        return ";".join(_fmt(x) for x in v)
    return str(v)


def run_meta(**params) -> dict:
    return {"version": __version__, "polya_convention": calibrated_convention(), **params}


def to_csv(header: list[str], rows: list, meta: dict) -> str:
    buf = io.StringIO()
    buf.write("# " + " ".join(f"{k}={_fmt(v)}" for k, v in sorted(meta.items())) + "\n")
    buf.write(",".join(header) + "\n")
    for row in rows:
        buf.write(",".join(_fmt(v) for v in row) + "\n")
    return buf.getvalue()


def _jsonable(v):
    if isinstance(v, float) and not math.isfinite(v):
        return str(v)
    if isinstance(v, dict):
        return {k: _jsonable(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [_jsonable(x) for x in v]
    if isinstance(v, np.generic):
        return v.item()
    return v


def to_json(rows: list[dict], meta: dict) -> str:
    return json.dumps(_jsonable({"meta": meta, "rows": rows}), indent=2, sort_keys=True) + "\n"


def records_as_rows(records: list[StructureRecord]) -> tuple[list[str], list[list]]:
    dicts = [asdict(r) for r in records]
    header = [f for f in StructureRecord.__dataclass_fields__]
    return header, [[d[h] for h in header] for d in dicts]


def read_config(path: str) -> dict[str, str]:
    """Plain key=value lines; '#' starts a comment."""
    out = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ValueError(f"{path}:{lineno}: expected key=value")
            k, v = line.split("=", 1)
            out[k.strip().replace("-", "_")] = v.strip()
    return out
