"""Command-line entry point: ``cubic-lab <subcommand> [flags]``.

Exit codes: 0 success, 2 usage or configuration error, 3 failed numeric check
under ``--check``.
"""

from __future__ import annotations

import argparse
import math
import sys
from fractions import Fraction

import numpy as np

from . import experiments as ex
from . import oracles as orc
from .char_core import DirichletCharacter, InvalidModulusError
from .random_model import RandomMultSpec, exact_moment, mc_moment, x_moment_vs_divisor_sum, x_orthogonality_exact

EXIT_OK, EXIT_CONFIG, EXIT_CHECK = 0, 2, 3

# flag name -> (type, default)
GLOBAL_FLAGS = {
    "Q": (int, 500),
    "y": (str, "5,11,23"),
    "Z": (int, None),
    "R": (int, None),
    "seed": (int, 0),
    "output": (str, None),
    "format": (str, "csv"),
    "threads": (int, None),
    "vgrid": (str, "0.0:2.0:0.1"),
    "top": (float, 0.05),
    "epsilon": (float, ex.DEFAULT_EPSILON),
    "threshold": (float, 1.0),
    "kind": (str, "Y"),
    "P": (int, 10_000),
    "r": (float, 1.0),
    "replicates": (int, 10_000),
    "psi": (str, "3:1"),
    "M": (int, 50),
    "trials": (int, 50),
}


class ConfigError(Exception):
    pass


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    for name, (typ, _) in GLOBAL_FLAGS.items():
        kw = {"type": typ, "default": None}
        if name == "format":
            kw["choices"] = ("csv", "json")
        if name == "kind":
            kw["choices"] = ("X", "Y")
        common.add_argument(f"--{name}", **kw)
    common.add_argument("--config", default=None, help="key=value file; explicit flags win")
    common.add_argument("--check", action="store_true", help="exit 3 if the run's numeric checks fail")
    parser = argparse.ArgumentParser(prog="cubic-lab", description="Numerical experiments on primitive cubic characters.")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, help_ in [
        ("enumerate", "list F3(Q)"),
        ("msum", "M(chi), N and alpha for every chi in F3(Q)"),
        ("dist", "counts of M(chi) > V over a V-grid"),
        ("tails", "rough-tail event rates for each y"),
        ("structure", "structure diagnostics for the top fraction by M"),
        ("random-moments", "exact and Monte Carlo moments of the random Euler product"),
        ("oracles", "run the brute-force oracle suite"),
        ("sieve-check", "large-sieve and cubic-family mean-square ratios"),
    ]:
        sub.add_parser(name, parents=[common], help=help_)
    return parser


def resolve(args: argparse.Namespace) -> argparse.Namespace:
    """Fill unset flags from the config file, then from CUBIC_LAB_THREADS, then defaults."""
    cfg = {}
    if args.config:
        try:
            cfg = ex.read_config(args.config)
        except (OSError, ValueError) as exc:
            raise ConfigError(str(exc)) from exc
        unknown = set(cfg) - set(GLOBAL_FLAGS)
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
    for name, (typ, default) in GLOBAL_FLAGS.items():
        if getattr(args, name) is not None:
            continue
        if name in cfg:
            try:
                setattr(args, name, typ(cfg[name]))
            except ValueError as exc:
                raise ConfigError(f"config key {name}: {exc}") from exc
        elif name == "threads":
            args.threads = ex.default_threads()
        else:
            setattr(args, name, default)
    if args.format not in ("csv", "json"):
        raise ConfigError(f"format must be csv or json, got {args.format!r}")
    if args.threads < 1:
        raise ConfigError("threads must be >= 1")
    return args


def _emit(args, header: list[str], rows: list[list], meta: dict) -> None:
    if args.format == "csv":
        text = ex.to_csv(header, rows, meta)
    else:
        text = ex.to_json([dict(zip(header, r)) for r in rows], meta)
    if args.output:
        with open(args.output, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _y_list(spec: str) -> list[float]:
    try:
        return [float(v) for v in str(spec).split(",") if v.strip()]
    except ValueError as exc:
        raise ConfigError(f"--y must be a comma-separated list of numbers, got {spec!r}") from exc


def cmd_enumerate(args):
    fam = ex._family(args.Q)
    rows = [[c.id, c.modulus, c.conductor, c.order, c.parity] for c in fam]
    return ["id", "modulus", "conductor", "order", "parity"], rows, ex.run_meta(command="enumerate", Q=args.Q), True


def cmd_msum(args):
    profs = ex.family_profiles(args.Q, args.threads)
    rows = [[c.id, p.modulus, p.M, p.N_max, p.alpha] for c, p in profs]
    return ["id", "modulus", "M", "N", "alpha"], rows, ex.run_meta(command="msum", Q=args.Q), True


def cmd_dist(args):
    try:
        grid = ex.parse_vgrid(args.vgrid)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    table = ex.dist_table(args.Q, grid, args.threads)
    props = [r[2] for r in table.rows]
    ok = all(a >= b for a, b in zip(props, props[1:]))
    meta = ex.run_meta(command="dist", Q=args.Q, vgrid=args.vgrid, family_size=table.total, empty=table.empty)
    return ["V", "count", "proportion"], [list(r) for r in table.rows], meta, ok


def tail_rates_ok(rates: list[float], family_size: int) -> bool:
    """Nonincreasing in y, allowing one rise of at most 2 characters' worth."""
    rises = [b - a for a, b in zip(rates, rates[1:]) if b > a]
    if not rises:
        return True
    return len(rises) == 1 and rises[0] <= 2 / max(1, family_size) + 1e-15


def cmd_tails(args):
    ys = sorted(_y_list(args.y))
    reps = [ex.tail_event_rate(args.Q, y, None, args.threshold, args.Z, args.R, args.threads) for y in ys]
    header = ["y", "exceed", "family_size", "rate", "max_tail", "Z", "R", "t_points"]
    rows = [[r[h] for h in header] for r in reps]
    ok = tail_rates_ok([r["rate"] for r in reps], reps[0]["family_size"] if reps else 0)
    return header, rows, ex.run_meta(command="tails", Q=args.Q, threshold=args.threshold, Z=args.Z, R=args.R), ok


def structure_checks(records) -> bool:
    for r in records:
        alpha = Fraction(r.N, r.modulus)
        if math.gcd(r.a, r.b) != 1 or r.b > r.B:
            return False
        if abs(alpha - Fraction(r.a, r.b)) * r.b * Fraction(r.B) > 1:
            return False
        if not (r.ratio > 0 and math.isfinite(r.ratio)):
            return False
    return True


def cmd_structure(args):
    recs = ex.structure_report(args.Q, args.top, args.epsilon, args.threads)
    header, rows = ex.records_as_rows(recs)
    meta = ex.run_meta(
        command="structure",
        Q=args.Q,
        top=args.top,
        epsilon=args.epsilon,
        clamps=f"y>={ex.MIN_Y:g};B>={ex.MIN_B:g}",
        ratio_summary=ex.ratio_summary(recs),
    )
    return header, rows, meta, structure_checks(recs)


def cmd_random_moments(args):
    try:
        psi = DirichletCharacter.from_id(args.psi)
    except (ValueError, InvalidModulusError) as exc:
        raise ConfigError(f"bad --psi: {exc}") from exc
    spec = RandomMultSpec(args.kind, args.P)
    exact = exact_moment(spec, psi, args.r)
    mc = mc_moment(spec, psi, args.r, args.replicates, args.seed)
    header = ["method", "estimate", "stderr", "replicates", "log_estimate"]
    rows = [[e.method, e.estimate, e.stderr, e.replicates, e.log_estimate] for e in (exact, mc)]
    ok = abs(mc.estimate - exact.estimate) <= 3 * mc.stderr if mc.stderr > 0 else mc.estimate == exact.estimate
    meta = ex.run_meta(command="random-moments", kind=args.kind, P=args.P, r=args.r, psi=psi.id, seed=args.seed, replicates=args.replicates)
    return header, rows, meta, ok


def _icbrt_is_cube(v: int) -> bool:
    r = round(v ** (1 / 3))
    return any((r + d) ** 3 == v for d in (-1, 0, 1))


def run_oracle_suite(seed: int = 0) -> list[tuple[str, float, float, bool]]:
    """(name, observed, limit, passed) for each quick oracle comparison."""
    out = []
    rng = np.random.default_rng(seed)
    out.append(("d_k examples", 0.0, 0.0, (orc.d_k(6, 2), orc.d_k(1, 7), orc.d_k(4, 3)) == (4, 1, 6)))
    bad = sum(orc.is_cube_pair(n, m) != _icbrt_is_cube(n * m * m) for n in range(1, 201) for m in range(1, 201))
    out.append(("cube pair vs cube root n,m<=200", float(bad), 0.0, bad == 0))
    bad = 0
    for n in range(1, 51):
        for m in range(1, 51):
            want = (Fraction(1), Fraction(0)) if orc.is_cube_pair(n, m) else (Fraction(0), Fraction(0))
            bad += x_orthogonality_exact(n, m) != want
    out.append(("random-model orthogonality n,m<=50", float(bad), 0.0, bad == 0))
    for k, P in ((1, 3), (2, 5), (2, 7)):
        rep = x_moment_vs_divisor_sum(k, 1.0, None, P)
        out.append((f"divisor-sum identity k={k} P={P}", rep["rel_diff"], 1e-8, rep["rel_diff"] <= 1e-8))
    worst = 0.0
    for _ in range(20):
        N1 = int(rng.integers(2, 6))
        N2 = int(rng.integers(N1 + 1, N1 + 8))
        k = int(rng.integers(1, 5))
        while N2**k > orc.MAX_G_INDEX:
            k -= 1
        g = orc.g_coefficients(N1, N2, k, float(rng.random()))
        worst = max(worst, float(len(g.bound_violations())))
    out.append(("g-coefficient divisor bound", worst, 0.0, worst == 0))
    pt = orc.prime_tuple_cube_sum(1, 5, 50)
    direct = math.fsum(1 / p**2 for p in (7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47))
    out.append(("prime-tuple sum l=1", abs(pt["value"] - direct), 1e-15, abs(pt["value"] - direct) <= 1e-15))
    bad = 0
    for _ in range(200):
        alpha = Fraction(int(rng.integers(1, 10**6)), 10**6)
        a, b = ex.rational_approx(alpha, 1000)
        best = next(bb for bb in range(1, 1001) if abs(alpha * bb - round(alpha * bb)) * 1000 < 1)
        bad += b != best or math.gcd(a, b) != 1
    out.append(("rational approximation vs exhaustive scan", float(bad), 0.0, bad == 0))
    return out


def cmd_oracles(args):
    res = run_oracle_suite(args.seed)
    rows = [list(r) for r in res]
    return ["check", "observed", "limit", "passed"], rows, ex.run_meta(command="oracles", seed=args.seed), all(r[3] for r in res)


def cmd_sieve_check(args):
    ls = orc.large_sieve_ratio(args.Q, args.M, args.seed, args.trials)
    cf = orc.cubic_family_sieve_check(args.Q, args.M, args.seed, args.trials)
    rows = [["large_sieve", ls["max"], ls["median"], 3.0, ls["max"] <= 3.0], ["cubic_family_remainder", cf["max"], cf["median"], 1.0, cf["max"] <= 1.0]]
    meta = ex.run_meta(command="sieve-check", Q=args.Q, M=args.M, seed=args.seed, trials=args.trials)
    return ["statistic", "max_ratio", "median_ratio", "limit", "passed"], rows, meta, rows[0][4] and rows[1][4]


COMMANDS = {
    "enumerate": cmd_enumerate,
    "msum": cmd_msum,
    "dist": cmd_dist,
    "tails": cmd_tails,
    "structure": cmd_structure,
    "random-moments": cmd_random_moments,
    "oracles": cmd_oracles,
    "sieve-check": cmd_sieve_check,
}


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_CONFIG if exc.code not in (0, None) else EXIT_OK
    try:
        args = resolve(args)
        header, rows, meta, ok = COMMANDS[args.command](args)
    except ConfigError as exc:
        print(f"cubic-lab: config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    _emit(args, header, rows, meta)
    if args.check and not ok:
        print(f"cubic-lab: {args.command} check failed", file=sys.stderr)
        return EXIT_CHECK
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
