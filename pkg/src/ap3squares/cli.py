"""Command-line front end: configuration, sieve caching, CSV/JSON emission,
and reproducible run manifests.

Exit codes: 0 success, 2 validation error, 3 budget error.
"""

import argparse
import hashlib
import json
import math
import os
import sys
import time
from pathlib import Path

from . import __version__, products
from .engine import (
    BudgetError,
    RunConfig,
    Tables,
    build_j_family,
    bv3_aggregate,
    bv_aggregate,
    decompose,
    delta_record,
    full_interval,
    gamma_partial,
    hooley_sum,
    hooley_window,
    linnik_sum,
    main_term_ratio,
    r_of_x,
    tolev_count,
)
from .local import Progression, ProgressionPair
from .sieve import CacheError, FactorTable, PrimeTable

SCHEMA_COMMENT = "# ap3squares-schema v1"

DEFAULTS = {
    "x": 1000,
    "c": 1.0,
    "cutoff": products.DEFAULT_CUTOFF,
    "dmax": 10,
    "threads": None,
    "seed": 0,
    "out": "ap3-out",
    "format": "csv",
    "degenerate": True,
    "force": False,
    "jfamily": "full+halves+quarters",
    "omega": 1.0,
    "power": 1,
    "n": None,
    "d": 1,
    "l": 1,
    "variant": 2,
    "equation": "goldbach",
    "pair_budget": 4_000_000_000,
}


def fmt(x: float) -> str:
    return f"{x:.17g}"


def _load_config_file(path: str) -> dict:
    out = {}
    with open(path) as fh:
        for line in fh:
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            if "=" not in line:
                raise ValueError(f"bad config line: {line!r}")
            key, val = (s.strip() for s in line.split("=", 1))
            out[key] = val
    return out


def _coerce(key: str, val):
    if val is None or not isinstance(val, str):
        return val
    base = DEFAULTS.get(key)
    if isinstance(base, bool):
        return val.lower() in ("1", "true", "yes")
    if isinstance(base, int):
        return int(val)
    if isinstance(base, float):
        return float(val)
    return val


class Settings:
    """Flag resolution: CLI values beat the config file, which beats defaults."""

    def __init__(self, args: argparse.Namespace):
        self._cli = vars(args)
        self._file = _load_config_file(args.config) if args.config else {}

    def __getattr__(self, key):
        cli_val = self._cli.get(key)
        if cli_val is not None:
            return cli_val
        if key in self._file:
            return _coerce(key, self._file[key])
        return DEFAULTS.get(key)


def _cache_path(limit: int):
    cache_dir = os.environ.get("AP3_CACHE_DIR")
    if not cache_dir:
        return None
    return Path(cache_dir) / f"sieve_{limit}.bin"


def get_prime_table(limit: int) -> tuple[PrimeTable, str]:
    """Build or load the prime table; returns the table and its content hash."""
    path = _cache_path(limit)
    if path is not None and path.exists():
        try:
            pt = PrimeTable.load(path, limit)
            return pt, hashlib.sha256(path.read_bytes()).hexdigest()
        except CacheError as exc:
            print(f"sieve cache rejected ({exc}); rebuilding", file=sys.stderr)
    pt = PrimeTable.build(limit)
    if path is not None:
        path.parent.mkdir(parents=True, exist_ok=True)
        pt.save(path)
        return pt, hashlib.sha256(path.read_bytes()).hexdigest()
    return pt, hashlib.sha256(pt.is_prime.tobytes()).hexdigest()


def build_tables(prime_limit: int, factor_limit: int | None = None) -> tuple[Tables, str]:
    pt, digest = get_prime_table(prime_limit)
    return Tables(pt, FactorTable.build(factor_limit or min(prime_limit, 10**8))), digest


class Emitter:
    def __init__(self, settings: Settings, command: str):
        self.settings = settings
        self.command = command
        self.outdir = Path(settings.out)
        self.outdir.mkdir(parents=True, exist_ok=True)
        self.outputs: list[str] = []
        self.t0 = time.perf_counter()
        self.cache_hash = None

    def write_rows(self, name: str, header: list[str], rows: list[list]) -> None:
        if self.settings.format == "json":
            path = self.outdir / f"{name}.json"
            payload = [dict(zip(header, row)) for row in rows]
            path.write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n")
        else:
            path = self.outdir / f"{name}.csv"
            lines = [SCHEMA_COMMENT, ",".join(header)]
            for row in rows:
                lines.append(",".join(fmt(v) if isinstance(v, float) else str(v) for v in row))
            path.write_text("\n".join(lines) + "\n")
        self.outputs.append(str(path))
        print(path.read_text(), end="")

    def write_json(self, name: str, payload: dict) -> None:
        path = self.outdir / f"{name}.json"
        path.write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n")
        self.outputs.append(str(path))
        print(path.read_text(), end="")

    def manifest(self, config_echo: dict, error: str | None = None) -> None:
        payload = {
            "tool_version": __version__,
            "command": self.command,
            "config": config_echo,
            "sieve_cache_sha256": self.cache_hash,
            "outputs": self.outputs,
            "elapsed_seconds": round(time.perf_counter() - self.t0, 6),
            "error": error,
        }
        (self.outdir / "manifest.json").write_text(
            json.dumps(payload, indent=2, sort_keys=True) + "\n"
        )


def _config_echo(s: Settings, keys: list[str]) -> dict:
    return {k: getattr(s, k) for k in keys}


# ---------------------------------------------------------------------------
# commands


def cmd_constants(s: Settings, em: Emitter) -> int:
    P = s.cutoff
    s0 = products.sigma0(P)
    xi = products.xi_constant(P)
    sr = products.triple_series(P)
    g0 = products.g_limit(P)
    em.write_json(
        "constants",
        {
            "sigma0": s0.value,
            "xi": xi.value,
            "SR": sr.value,
            "G0": g0.value,
            "theta0": products.THETA0,
            "cutoff": P,
            "tail_bounds": {
                "sigma0": s0.tail_bound,
                "xi": xi.tail_bound,
                "SR": sr.tail_bound,
                "G0": g0.tail_bound,
            },
        },
    )
    return 0


def cmd_linnik(s: Settings, em: Emitter) -> int:
    tables, em.cache_hash = build_tables(s.x)
    res = linnik_sum(s.x, tables, cutoff=min(s.cutoff, 10**7))
    em.write_rows(
        "linnik",
        ["x", "sum", "main_term", "ratio"],
        [[s.x, res.total, res.main_term, res.ratio]],
    )
    return 0


def _run_config(s: Settings) -> RunConfig:
    return RunConfig(
        x=s.x,
        c=s.c,
        euler_cutoff=s.cutoff,
        threads=s.threads,
        j_descriptor=s.jfamily,
        seed=s.seed,
        pair_budget=s.pair_budget,
        force=s.force,
    )


def cmd_rx(s: Settings, em: Emitter) -> int:
    cfg = _run_config(s)
    tables, em.cache_hash = build_tables(s.x)
    res = r_of_x(cfg, s.degenerate, tables)
    # timing lives in the manifest; data files stay byte-identical across runs
    em.write_rows(
        "rx",
        ["x", "c", "degenerate", "value", "term_count"],
        [[s.x, float(s.c), int(s.degenerate), res.value, res.term_count]],
    )
    return 0


def cmd_decompose(s: Settings, em: Emitter) -> int:
    cfg = _run_config(s)
    tables, em.cache_hash = build_tables(s.x)
    res = decompose(cfg, tables)
    rows = [[s.x, float(s.c), i, j, res.parts[(i, j)]] for i in (1, 2, 3) for j in (1, 2, 3)]
    rows.append([s.x, float(s.c), 0, 0, res.total])
    em.write_rows("decompose", ["x", "c", "i", "j", "value"], rows)
    em.write_rows(
        "decompose_residual",
        ["x", "c", "float_residual_rel", "int_residual"],
        [[s.x, float(s.c), res.float_residual_rel, res.int_residual]],
    )
    return 0


def cmd_gamma(s: Settings, em: Emitter) -> int:
    ft = FactorTable.build(max(s.dmax, 16))
    s0 = products.sigma0(s.cutoff).value
    value = gamma_partial(s.dmax, ft, s0, force=s.force)
    target = products.triple_series(s.cutoff).value / 16.0
    em.write_rows(
        "gamma",
        ["D", "value", "sixteenth_series", "rel_error"],
        [[s.dmax, value, target, abs(value - target) / target]],
    )
    return 0


def cmd_discrepancy(s: Settings, em: Emitter) -> int:
    X = s.x
    tables, em.cache_hash = build_tables(2 * X)
    s0 = products.sigma0(min(s.cutoff, 10**7)).value
    rows = []
    header = ["variant", "d", "l", "n", "j_lo", "j_hi", "I", "Phi", "S_local", "Delta"]
    if s.variant == 3:
        pair = ProgressionPair(s.d, s.l, s.d, s.l)
        j = (full_interval(X), full_interval(X))
        rec = delta_record(3, X, j, tables, s0, pair=pair)
        rows.append(
            [3, f"{s.d};{s.d}", f"{s.l};{s.l}", "", X / 2, float(X),
             rec.i_value, rec.phi_value, rec.local_value, rec.delta]
        )
    else:
        prog = Progression(s.d, s.l)
        j = full_interval(X)
        ns = [s.n] if s.n is not None else list(range(1, 2 * X + 1))
        for n in ns:
            rec = delta_record(s.variant, X, j, tables, s0, n=n, prog=prog)
            rows.append(
                [s.variant, s.d, s.l, n, X / 2, float(X),
                 rec.i_value, rec.phi_value, rec.local_value, rec.delta]
            )
    em.write_rows("discrepancy", header, rows)
    return 0


def cmd_bv(s: Settings, em: Emitter) -> int:
    tables, em.cache_hash = build_tables(2 * s.x)
    s0 = products.sigma0(min(s.cutoff, 10**7)).value
    if s.variant == 3:
        res = bv3_aggregate(s.x, s.dmax, tables, s0, j_descriptor=s.jfamily, seed=s.seed)
    else:
        res = bv_aggregate(s.variant, s.x, s.dmax, tables, s0, j_descriptor=s.jfamily, seed=s.seed)
    em.write_rows(
        "bv",
        ["variant", "x", "dmax", "j_count", "lemma_normalized", "natural_normalized"],
        [[s.variant, s.x, s.dmax, res.j_count, res.lemma_value, res.natural_value]],
    )
    return 0


def cmd_hooley(s: Settings, em: Emitter) -> int:
    tables, em.cache_hash = build_tables(s.x)
    w = hooley_window(s.x, s.omega)
    value = hooley_sum(s.x, w, s.power, tables)
    em.write_rows(
        "hooley",
        ["x", "omega", "power", "window_lo", "window_hi", "value", "value_over_x"],
        [[s.x, float(s.omega), s.power, w.lo, w.hi, value, value / s.x]],
    )
    return 0


def cmd_tolev(s: Settings, em: Emitter) -> int:
    if s.n is None:
        raise ValueError("tolev requires --n")
    tables, em.cache_hash = build_tables(2 * s.x)
    w = hooley_window(s.x, s.omega)
    value = tolev_count(s.n, s.x, w, s.equation, tables)
    em.write_rows(
        "tolev",
        ["n", "x", "omega", "equation", "count"],
        [[s.n, s.x, float(s.omega), s.equation, value]],
    )
    return 0


def cmd_selftest(s: Settings, em: Emitter) -> int:
    from fractions import Fraction

    from .local import lemma3_invariant, sigma3
    from .sieve import Window, chi4, r2

    tables, em.cache_hash = build_tables(10**4)
    ft = tables.ft
    suites = {}

    def lattice(m):
        cnt = 0
        r = math.isqrt(m)
        for a in range(-r, r + 1):
            b2 = m - a * a
            b = math.isqrt(b2)
            if b * b == b2:
                cnt += 1 if b == 0 else 2
        return cnt

    suites["r2"] = all(r2(m, ft) == lattice(m) for m in range(1, 2001))
    suites["lemma3"] = all(
        lemma3_invariant(d, m, 1, n, ft)
        for d in (1, 3, 5)
        for m in (2, 4, 6, 8)
        for n in range(1, 50)
    )
    suites["factor-identity"] = all(
        products.factor_identity_holds(int(p)) for p in tables.pt.primes_in(2, 10**4)
    )

    def partition_ok():
        D, X = 7.0, 1000
        for m in range(1, 1001):
            w1, w2, w3 = (
                Window.up_to(D),
                Window.between(D, X / D),
                Window.at_least(X / D),
            )
            from .sieve import r2_windowed

            total = sum(r2_windowed(m, w, ft) for w in (w1, w2, w3))
            if 4 * total != r2(m, ft):
                return False
        return True

    suites["partition"] = partition_ok()

    rows = [[name, "pass" if ok else "FAIL"] for name, ok in suites.items()]
    em.write_rows("selftest", ["suite", "status"], rows)
    return 0 if all(suites.values()) else 1


COMMANDS = {
    "constants": cmd_constants,
    "linnik": cmd_linnik,
    "rx": cmd_rx,
    "decompose": cmd_decompose,
    "gamma": cmd_gamma,
    "discrepancy": cmd_discrepancy,
    "bv": cmd_bv,
    "hooley": cmd_hooley,
    "tolev": cmd_tolev,
    "selftest": cmd_selftest,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="ap3squares")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--config", default=None, help="flat key=value config file")
        p.add_argument("--out", default=None, help="output directory")
        p.add_argument("--format", choices=("csv", "json"), default=None)
        p.add_argument("--seed", type=int, default=None)
        p.add_argument("--threads", type=int, default=None)
        p.add_argument("--cutoff", type=int, default=None, help="Euler product cutoff")
        p.add_argument("--force", action="store_true", default=None)

    p = sub.add_parser("constants")
    common(p)

    for name in ("linnik", "rx", "decompose"):
        p = sub.add_parser(name)
        common(p)
        p.add_argument("--x", type=int, default=None)
        p.add_argument("--c", type=float, default=None, help="divisor threshold exponent")
        p.add_argument("--pair-budget", dest="pair_budget", type=int, default=None)
        if name == "rx":
            p.add_argument(
                "--degenerate", dest="degenerate", action="store_true", default=None
            )
            p.add_argument("--no-degenerate", dest="degenerate", action="store_false")

    p = sub.add_parser("gamma")
    common(p)
    p.add_argument("--dmax", type=int, default=None, help="modulus bound for the double sum")

    p = sub.add_parser("discrepancy")
    common(p)
    p.add_argument("--x", type=int, default=None)
    p.add_argument("--variant", type=int, choices=(1, 2, 3), default=None)
    p.add_argument("--d", type=int, default=None)
    p.add_argument("--l", type=int, default=None)
    p.add_argument("--n", type=int, default=None)

    p = sub.add_parser("bv")
    common(p)
    p.add_argument("--x", type=int, default=None)
    p.add_argument("--variant", type=int, choices=(1, 2, 3), default=None)
    p.add_argument("--dmax", type=int, default=None)
    p.add_argument("--jfamily", type=str, default=None)

    p = sub.add_parser("hooley")
    common(p)
    p.add_argument("--x", type=int, default=None)
    p.add_argument("--omega", type=float, default=None)
    p.add_argument("--power", type=int, choices=(1, 2), default=None)

    p = sub.add_parser("tolev")
    common(p)
    p.add_argument("--x", type=int, default=None)
    p.add_argument("--n", type=int, default=None)
    p.add_argument("--omega", type=float, default=None)
    p.add_argument(
        "--equation", choices=("goldbach", "ap"), default=None
    )

    p = sub.add_parser("selftest")
    common(p)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        settings = Settings(args)
    except (OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    em = Emitter(settings, args.command)
    echo = {
        k: v for k, v in sorted(vars(args).items()) if k not in ("command",) and v is not None
    }
    try:
        code = COMMANDS[args.command](settings, em)
        em.manifest(echo)
        return code
    except BudgetError as exc:
        print(f"budget error: {exc}", file=sys.stderr)
        em.manifest(echo, error=str(exc))
        return 3
    except (ValueError, CacheError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        em.manifest(echo, error=str(exc))
        return 2


if __name__ == "__main__":
    sys.exit(main())
