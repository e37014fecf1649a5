"""Acceptance criteria 1-13. Each test records one PASS/FAIL line shown in the terminal summary."""

import math
import subprocess
import sys
import time
from fractions import Fraction

import numpy as np
from cubic_lab.arith import factorize
from cubic_lab.char_core import all_characters, enumerate_cubic_primitive, find_characters, gauss_sum
from cubic_lab.charsum import even_vanishing_exact, grid_max, grid_values, msum_exact, polya_residuals, polya_t_grid
from cubic_lab.experiments import structure_report, tail_event_rate
from cubic_lab.oracles import cubic_family_sieve_check, g_coefficients, is_cube_pair, large_sieve_ratio
from cubic_lab.pretentious import BETA
from cubic_lab.random_model import RandomMultSpec, exact_moment, mc_moment, x_moment_vs_divisor_sum, x_orthogonality_exact

# pinned tolerances
C1_Q, C1_SECONDS = 500, 60
C2_Q, C2_RTOL = 500, 1e-9
C3_Q, C3_RESIDUAL, C3_FRACTION, C3_POINTS, C3_SECONDS = 200, 5.0, 0.90, 64, 300
C4_Q, C4_GAP, C4_DFT_TOL, C4_INSTANCES = 200, 1.0, 1e-8, 10
C5_CHARS, C5_Z = 20, (10**2, 10**4)
C6_N, C6_RTOL, C6_CASES = 50, 1e-8, ((1, 3), (2, 5), (2, 7))
C7_P, C7_REPS, C7_SIGMAS, C7_SECONDS = 10**4, 10**4, 3.0, 120
C8_P, C8_RS, C8_BAND, C8_BETA = 10**6, (4, 8, 16), (0.5, 2.0), 0.826993
C9_LS, C9_CF = dict(Q=100, M=2000, trials=100, limit=3.0), dict(Q=200, M=50, trials=50, limit=1.0)
C10_INSTANCES, C10_TOL = 20, 1e-10
C11_Q, C11_YS = 2000, (5, 11, 23)
C12_Q, C12_TOP, C12_MTOL, C12_SECONDS = 5000, 0.05, 1e-9, 600


def psi_odd3():
    return find_characters(3, order=2, primitive=True)[0]


def _is_primitive_direct(chi) -> bool:
    q = chi.modulus
    vals = chi.value_table()
    units = [n for n in range(1, q) if math.gcd(n, q) == 1]
    for p in {p for p in range(2, q + 1) if q % p == 0 and all(p % d for d in range(2, p))}:
        d = q // p
        if all(abs(vals[n] - 1) < 1e-9 for n in units if n % d == 1 % d):
            return False
    return True


def test_criterion_01_enumeration(report):
    t0 = time.perf_counter()
    brute = []
    for q in range(2, C1_Q + 1):
        if q % 3 == 0:
            continue
        for chi in all_characters(q):
            vals = chi.value_table()
            units = np.array([math.gcd(n, q) == 1 for n in range(q)])
            u = vals[units]
            if np.allclose(u**3, 1) and not np.allclose(u, 1) and _is_primitive_direct(chi):
                brute.append(chi.id)
    fam = enumerate_cubic_primitive(C1_Q)
    same = sorted(brute) == sorted(c.id for c in fam)
    props = all(
        c.order == 3
        and c.parity == 1
        and c.conductor == c.modulus
        and math.gcd(c.modulus, 3) == 1
        and all(e == 1 and p % 3 == 1 for p, e in factorize(c.modulus))
        for c in fam
    )
    prefix = all(
        sorted(c.id for c in enumerate_cubic_primitive(Q)) == sorted(c.id for c in fam if c.modulus <= Q) for Q in (7, 50, 91, 200, 333)
    )
    dt = time.perf_counter() - t0
    ok = same and props and prefix and dt < C1_SECONDS
    report(1, ok, f"|F3({C1_Q})|={len(fam)} brute={len(brute)} properties={props} time={dt:.1f}s")
    assert ok


def test_criterion_02_gauss_sums(report):
    worst = max(abs(abs(gauss_sum(c)) - math.sqrt(c.modulus)) / math.sqrt(c.modulus) for c in enumerate_cubic_primitive(C2_Q))
    ok = worst <= C2_RTOL
    report(2, ok, f"max relative deviation {worst:.2e} (limit {C2_RTOL:g})")
    assert ok


def test_criterion_03_polya(report):
    t0 = time.perf_counter()
    worst, better, total = 0.0, 0, 0
    for chi in enumerate_cubic_primitive(C3_Q):
        q = chi.modulus
        ts = polya_t_grid(q, C3_POINTS)
        r2 = polya_residuals(chi, ts, q * q)
        r1 = polya_residuals(chi, ts, q)
        r3 = polya_residuals(chi, ts, q**3)
        worst = max(worst, float(r2.max()))
        better += int(np.sum(r3 <= r1))
        total += len(ts)
    frac = better / total
    dt = time.perf_counter() - t0
    ok = worst <= C3_RESIDUAL and frac >= C3_FRACTION and dt < C3_SECONDS
    report(3, ok, f"max residual at Z=q^2 {worst:.3f} (limit {C3_RESIDUAL:g}); q^3<=q in {frac:.1%}; time={dt:.1f}s")
    assert ok


def test_criterion_04_grid_max(report):
    worst = 0.0
    for chi in enumerate_cubic_primitive(C4_Q):
        q = chi.modulus
        Z = q * q
        val, _ = grid_max(chi, Z, 4 * Z)
        worst = max(worst, abs(val / (2 * math.pi) - msum_exact(chi).M))
    rng = np.random.default_rng(4)
    fam = enumerate_cubic_primitive(C4_Q)
    dft_err = 0.0
    for _ in range(C4_INSTANCES):
        chi = fam[int(rng.integers(len(fam)))]
        Z = int(rng.integers(2, 51))
        R = int(rng.integers(max(8, 2 * Z), 257))
        fast = grid_values(chi, Z, R)
        n = np.arange(1, Z + 1)
        c = chi.values(n) / n
        b = np.arange(R)[:, None] / R
        naive = (c * np.exp(2j * np.pi * n * b)).sum(1) - (chi.values(-n) / n * np.exp(-2j * np.pi * n * b)).sum(1)
        dft_err = max(dft_err, float(np.abs(fast - naive).max()))
    ok = worst <= C4_GAP and dft_err <= C4_DFT_TOL
    report(4, ok, f"max |grid/2pi - M| {worst:.4f} (limit {C4_GAP:g}); DFT vs naive {dft_err:.1e}")
    assert ok


def test_criterion_05_even_vanishing(report):
    fam = enumerate_cubic_primitive(500)
    rng = np.random.default_rng(5)
    picks = rng.choice(len(fam), C5_CHARS, replace=False)
    nonzero = [(fam[i].id, Z) for i in picks for Z in C5_Z if even_vanishing_exact(fam[i], Z) != (0, 0)]
    ok = not nonzero
    report(5, ok, f"{C5_CHARS} characters x Z in {C5_Z}: exact nonzero sums {len(nonzero)}")
    assert ok


def test_criterion_06_random_identities(report):
    bad = 0
    for n in range(1, C6_N + 1):
        for m in range(1, C6_N + 1):
            want = (Fraction(1), Fraction(0)) if is_cube_pair(n, m) else (Fraction(0), Fraction(0))
            bad += x_orthogonality_exact(n, m) != want
    rels = {case: x_moment_vs_divisor_sum(case[0], 1.0, None, case[1])["rel_diff"] for case in C6_CASES}
    ok = bad == 0 and all(r <= C6_RTOL for r in rels.values())
    report(6, ok, f"orthogonality mismatches {bad}; divisor-sum rel diffs " + ", ".join(f"{k}:{v:.1e}" for k, v in rels.items()))
    assert ok


def test_criterion_07_moment_crosscheck(report):
    t0 = time.perf_counter()
    spec = RandomMultSpec("Y", C7_P)
    mc = mc_moment(spec, psi_odd3(), 1, C7_REPS, seed=2024)
    ex = exact_moment(spec, psi_odd3(), 1)
    zero = mc_moment(spec, psi_odd3(), 0, C7_REPS, seed=2024)
    dt = time.perf_counter() - t0
    z = abs(mc.estimate - ex.estimate) / mc.stderr
    ok = z <= C7_SIGMAS and zero.estimate == 1 and zero.stderr == 0 and dt < C7_SECONDS
    report(7, ok, f"MC {mc.estimate:.5f}+-{mc.stderr:.5f} vs exact {ex.estimate:.5f} ({z:.2f} stderr); r=0 -> {zero.estimate}; time={dt:.1f}s")
    assert ok


def test_criterion_08_growth_shape(report):
    spec = RandomMultSpec("Y", C8_P)
    ratios = {r: exact_moment(spec, psi_odd3(), r).log_estimate / (2 * r * BETA * math.log(math.log(r))) for r in C8_RS}
    lo, hi = C8_BAND
    ok = all(lo <= v <= hi for v in ratios.values()) and round(BETA, 6) == C8_BETA
    report(8, ok, "log-moment / leading term: " + ", ".join(f"r={r}:{v:.3f}" for r, v in ratios.items()) + f"; beta={BETA:.6f}")
    assert ok


def test_criterion_09_large_sieve(report):
    ls = large_sieve_ratio(C9_LS["Q"], C9_LS["M"], coeff_seed=9, trials=C9_LS["trials"])
    cf = cubic_family_sieve_check(C9_CF["Q"], C9_CF["M"], coeff_seed=9, trials=C9_CF["trials"])
    ok = ls["max"] <= C9_LS["limit"] and cf["max"] <= C9_CF["limit"]
    report(9, ok, f"large-sieve max ratio {ls['max']:.4f} (limit 3); cubic remainder max ratio {cf['max']:.2e} (limit 1)")
    assert ok


def test_criterion_10_g_coefficients(report):
    rng = np.random.default_rng(10)
    violations, worst = 0, 0.0
    fam = enumerate_cubic_primitive(300)
    for _ in range(C10_INSTANCES):
        N1 = int(rng.integers(2, 8))
        N2 = N1 + int(rng.integers(1, 10))
        k = int(rng.integers(1, 5))
        while N2**k > 10**6:
            k -= 1
        alpha, t = float(rng.random()), float(rng.uniform(-3, 3))
        coeff = lambda n, s=int(rng.integers(1 << 30)): np.exp(2j * np.pi * np.random.default_rng(s).random(n.size))  # noqa: E731
        g = g_coefficients(N1, N2, k, alpha, coeff)
        violations += len(g.bound_violations())
        chi = fam[int(rng.integers(len(fam)))]
        n = np.arange(N1, N2 + 1)
        inner = np.sum(chi.values(n) * coeff(n) * np.exp(2j * np.pi * n * alpha) / n ** complex(1, t))
        sup = g.support()
        outer = np.sum(chi.values(sup) * g.values[sup] / sup.astype(float) ** complex(1, t))
        lhs, rhs = abs(inner) ** (2 * k), abs(outer) ** 2
        worst = max(worst, abs(lhs - rhs) / max(1.0, rhs))
    ok = violations == 0 and worst <= C10_TOL
    report(10, ok, f"bound violations {violations}; 2k-power identity max rel err {worst:.1e}")
    assert ok


def test_criterion_11_tail_monotone(report):
    from cubic_lab.cli import tail_rates_ok

    reps = [tail_event_rate(C11_Q, y) for y in C11_YS]
    rates = [r["rate"] for r in reps]
    size = reps[0]["family_size"]
    ok = tail_rates_ok(rates, size)
    report(11, ok, "rates " + ", ".join(f"y={y}:{r:.4f}" for y, r in zip(C11_YS, rates)) + f" over |F3|={size}; max tails " + ", ".join(f"{r['max_tail']:.3f}" for r in reps))
    assert ok


def test_criterion_12_structure(report):
    t0 = time.perf_counter()
    recs = structure_report(C12_Q, C12_TOP)
    fam = {c.id: c for c in enumerate_cubic_primitive(C12_Q)}
    ok = bool(recs)
    for r in recs:
        alpha = Fraction(r.N, r.modulus)
        ok &= math.gcd(r.a, r.b) == 1 and r.b <= r.B
        ok &= abs(alpha - Fraction(r.a, r.b)) * r.b * Fraction(r.B) <= 1
        ok &= abs(msum_exact(fam[r.character]).M - r.M) <= C12_MTOL
        ok &= r.ratio > 0 and math.isfinite(r.ratio)
    dt = time.perf_counter() - t0
    ok &= dt < C12_SECONDS
    q = np.quantile([r.ratio for r in recs], [0.0, 0.25, 0.5, 0.75, 1.0])
    report(12, ok, f"{len(recs)} records; ratio quantiles " + "/".join(f"{x:.3f}" for x in q) + f"; time={dt:.1f}s")
    assert ok


def _run(args, out):
    cmd = [sys.executable, "-m", "cubic_lab", *args, "--output", str(out)]
    subprocess.run(cmd, check=True)
    return out.read_bytes()


def test_criterion_13_determinism(report, tmp_path):
    same = []
    for name, args in (
        ("structure", ["structure", "--Q", "5000", "--top", "0.05", "--seed", "1"]),
        ("dist", ["dist", "--Q", "500", "--vgrid", "0.5:3.0:0.1", "--seed", "1"]),
    ):
        for fmt in ("csv", "json"):
            a = _run([*args, "--format", fmt, "--threads", "1"], tmp_path / f"{name}1.{fmt}")
            b = _run([*args, "--format", fmt, "--threads", "4"], tmp_path / f"{name}4.{fmt}")
            same.append(a == b)
    ok = all(same)
    report(13, ok, f"byte-identical outputs across thread counts: {sum(same)}/{len(same)}")
    assert ok
