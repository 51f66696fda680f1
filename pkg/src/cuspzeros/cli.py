"""Command-line interface: ``cuspzeros <subcommand> [options]``."""

from __future__ import annotations

import argparse
import contextlib
import csv
import dataclasses
import fcntl
import logging
import math
import os
import sys
from dataclasses import dataclass
from pathlib import Path

from . import detector, forms, lfunc, mollifier, sums, voronoi

log = logging.getLogger("cuspzeros")

CACHE_ENV = "CUSPZEROS_CACHE"
EXIT_OK, EXIT_FAIL, EXIT_USAGE, EXIT_NUMERIC = 0, 1, 2, 3
VERIFY_TARGETS = ("voronoi", "kform", "moebius", "selberg", "rankin", "lemma1",
                  "bessel-mellin", "shifted")


@dataclass
class RunConfig:
    form: str = "delta"
    table: str = ""
    n_max: int = 100000
    X: float = 300.0
    delta: float = 0.05
    h1: float = 0.3
    T: float = 40.0
    step: float = 0.075
    tol: float = 1e-10
    out_dir: str = "."
    schedule: bool = False
    A: float = 10.0
    T0: float = 20.0
    k_limit: int = 100000

    def validate(self) -> None:
        if self.n_max < 10:
            raise ValueError("n_max must be at least 10")
        if self.X < 3:
            raise ValueError("X must be >= 3")
        if not 0 < self.delta < mollifier.DELTA0:
            raise ValueError("delta must lie in (0, 1/10)")
        if not 0 < self.h1 < 1:
            raise ValueError("h1 must lie in (0, 1)")
        if self.T <= 1 or self.step <= 0 or self.tol <= 0 or self.T0 <= 0:
            raise ValueError("T > 1, step > 0, tol > 0 and T0 > 0 are required")

    def to_text(self) -> str:
        return "".join(f"{f.name} = {getattr(self, f.name)}\n" for f in dataclasses.fields(self))


def _coerce(field: dataclasses.Field, text: str):
    kind = field.type if isinstance(field.type, str) else field.type.__name__
    if kind == "bool":
        low = text.strip().lower()
        if low not in ("true", "false", "1", "0", "yes", "no"):
            raise ValueError(f"{field.name}: not a boolean: {text!r}")
        return low in ("true", "1", "yes")
    if kind == "int":
        return int(float(text)) if "e" in text.lower() else int(text)
    if kind == "float":
        return float(text)
    return text.strip()


def parse_config_text(text: str, base: RunConfig | None = None) -> RunConfig:
    """Flat ``key = value`` lines; '#' starts a comment."""
    cfg = dataclasses.replace(base) if base else RunConfig()
    fields = {f.name: f for f in dataclasses.fields(RunConfig)}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValueError(f"config line {lineno}: expected key = value")
        key, value = (p.strip() for p in line.split("=", 1))
        if key not in fields:
            raise ValueError(f"config line {lineno}: unknown key {key!r}")
        setattr(cfg, key, _coerce(fields[key], value))
    return cfg


def cache_dir() -> Path:
    return Path(os.environ.get(CACHE_ENV, Path.home() / ".cache" / "cuspzeros"))


@contextlib.contextmanager
def cache_lock(directory: Path):
    directory.mkdir(parents=True, exist_ok=True)
    with open(directory / ".lock", "w") as fh:
        fcntl.flock(fh, fcntl.LOCK_EX)
        try:
            yield
        finally:
            fcntl.flock(fh, fcntl.LOCK_UN)


def cache_path(form: str, n_max: int) -> Path:
    return cache_dir() / f"{form}_{n_max}.csv"


def load_table(cfg: RunConfig, with_theta: bool = True) -> forms.CoeffTable:
    """Coefficient table from a custom file, the cache directory, or a fresh expansion."""
    if cfg.table:
        table = forms.read_cache(cfg.table)
    else:
        form = forms.get_form(cfg.form)
        path = cache_path(form.name, cfg.n_max)
        table = None
        if path.exists():
            with cache_lock(path.parent):
                try:
                    table = forms.read_cache(path, form, validate=False)
                except ValueError as exc:
                    log.warning("ignoring unreadable cache %s: %s", path, exc)
        if table is None:
            table = forms.build_coeff_table(form, cfg.n_max)
    if with_theta:
        table = lfunc.attach_root_number(table)
    return table


def out_path(cfg: RunConfig, name: str) -> Path:
    d = Path(cfg.out_dir)
    d.mkdir(parents=True, exist_ok=True)
    return d / name


def write_plot_data(path: Path, xs, ys, header: tuple[str, str]) -> None:
    """Two-column CSV for an external plotter."""
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for x, y in zip(xs, ys):
            w.writerow([repr(float(x)), repr(float(y))])


def _params(cfg: RunConfig) -> mollifier.DetectorParams:
    p = mollifier.DetectorParams(cfg.delta, cfg.h1, cfg.X)
    if p.regime_flag:
        log.warning("delta X^86 e^(1/h1) > 1: outside the regime of the window bounds (allowed)")
    return p


# ----------------------------------------------------------------------------
# subcommands
# ----------------------------------------------------------------------------


def cmd_coeffs(cfg: RunConfig, args) -> int:
    form = forms.get_form(cfg.form)
    table = forms.build_coeff_table(form, cfg.n_max)
    path = Path(args.out) if args.out else cache_path(form.name, cfg.n_max)
    with cache_lock(path.parent):
        forms.write_cache(table, path)
    print(f"wrote {cfg.n_max} coefficients of {form.name} to {path}")
    return EXIT_OK


def cmd_zeros(cfg: RunConfig, args) -> int:
    table = load_table(cfg)
    rep = lfunc.count_zeros(cfg.T, table)
    path = out_path(cfg, f"zeros_{table.form.name}.csv")
    lfunc.write_zeros(rep, path)
    print(f"T={rep.T:g}: sign changes {rep.count_signs}, argument principle {rep.count_argument}")
    return EXIT_OK if rep.count_signs == rep.count_argument else EXIT_FAIL


def cmd_mollifier(cfg: RunConfig, args) -> int:
    table = load_table(cfg, with_theta=False)
    m = mollifier.build_mollifier(table, cfg.X)
    path = out_path(cfg, f"mollifier_{table.form.name}.csv")
    mollifier.write_mollifier(m, path)
    print(f"mollifier support {len(m.nus)} entries below X={cfg.X:g}")
    return EXIT_OK


def cmd_detect(cfg: RunConfig, args) -> int:
    table = load_table(cfg)
    p = _params(cfg)
    m = mollifier.build_mollifier(table, cfg.X)
    rep = detector.detect_intervals(table, m, p, cfg.T, cfg.step)
    detector.write_detection(rep, out_path(cfg, f"detect_{table.form.name}.csv"))
    if args.emit_plot_data:
        write_plot_data(out_path(cfg, f"plot_detect_{table.form.name}.csv"),
                        [pt.t for pt in rep.points], [pt.I1 - pt.I2 for pt in rep.points],
                        ("t", "I1_minus_I2"))
    budget = detector.budget_report(rep)
    for key in sorted(budget):
        print(f"{key} = {budget[key]!r}")
    ok = rep.all_confirmed and rep.triangle_ok and rep.n0_bound <= rep.sign_change_count
    return EXIT_OK if ok else EXIT_FAIL


def cmd_gprofile(cfg: RunConfig, args) -> int:
    table = load_table(cfg, with_theta=False)
    p = _params(cfg)
    m = mollifier.build_mollifier(table, cfg.X)
    n = max(2, args.points)
    ratio = (args.y_max / args.y_min) ** (1 / (n - 1))
    ys = [args.y_min * ratio ** i for i in range(n)]
    vals = detector.g_profile(ys, table, m, p, corrected=args.corrected)
    detector.write_gprofile(vals, out_path(cfg, f"gprofile_{table.form.name}.csv"))
    if args.emit_plot_data:
        write_plot_data(out_path(cfg, f"plot_gprofile_{table.form.name}.csv"),
                        [v.y for v in vals], [v.G for v in vals], ("y", "G"))
    bad = [v.y for v in vals if not 0 <= v.G <= v.majorant * (1 + 1e-12)]
    print(f"{len(vals)} points, majorant violations: {len(bad)}")
    return EXIT_OK if not bad else EXIT_FAIL


def cmd_schedule(cfg: RunConfig, args) -> int:
    s = mollifier.advisory_schedule(cfg.T, cfg.A)
    for key in ("T", "A", "delta", "X", "h1"):
        print(f"{key} = {s[key]:.6g}")
    if s["trivial_mollifier"]:
        print("warning: X < 257, the mollifier is trivial in this regime")
    if s["h1_out_of_range"]:
        print("warning: h1 is outside (0, 1)")
    if s["X_below_3"]:
        print("warning: X < 3 violates the mollifier precondition")
    return EXIT_OK


# ----------------------------------------------------------------------------
# verify
# ----------------------------------------------------------------------------


@dataclass
class Check:
    report: sums.SumReport
    passed: bool


def _verify_voronoi(cfg: RunConfig) -> tuple[list[Check], list]:
    results = []
    checks = []
    for name, configs in (("delta", ((1, 1), (1, 2), (1, 4))), ("f23", ((1, 23), (1, 46)))):
        table = load_table(dataclasses.replace(cfg, form=name, table=""), with_theta=False)
        for a, q in configs:
            r = voronoi.twisted_identity_check(a, q, None, table)
            results.append(r)
            checks.append(Check(r.report(), r.relative_residual < 1e-6))
    return checks, results


def _verify_kform(cfg: RunConfig) -> list[Check]:
    table = load_table(cfg, with_theta=False)
    limit = min(cfg.k_limit, table.n_max)
    ms = sums.supported_up_to(limit)
    checks = []
    for v in (0.0, 0.1, 0.25):
        worst, worst_m = 0.0, 1
        for m in ms:
            kv = sums.k_factor(m, 1 - v, table)
            if kv.discrepancy > worst:
                worst, worst_m = kv.discrepancy, m
        rep = sums.SumReport("kform_max_discrepancy", {"vartheta": v, "limit": limit, "count": len(ms),
                                                        "worst_m": worst_m}, complex(worst), 0j)
        checks.append(Check(rep, worst <= 1e-10))
    grid = [complex(sig, t) for sig in (0.5, 0.75, 1.0, 1.5) for t in (0.0, 1.0, 5.0)]
    sample = [m for m in ms if m > 1][:: max(1, len(ms) // 200)]
    worst_ratio = 0.0
    for m in sample:
        bound = sums.tau6(m)
        for s in grid:
            worst_ratio = max(worst_ratio, abs(sums.k_factor_a(m, s, table)) / bound)
    rep = sums.SumReport("kform_tau6_ratio", {"count": len(sample), "grid": len(grid)},
                         complex(worst_ratio), 1.0 + 0j)
    checks.append(Check(rep, worst_ratio <= 1.0))
    return checks


def _verify_moebius(cfg: RunConfig) -> list[Check]:
    checks = []
    for q in range(1, 61):
        lhs, rhs = sums.mobius_identity(lambda x: x * x * x + 7 * x + 1, q)
        checks.append(Check(sums.SumReport("moebius", {"q": q}, complex(lhs), complex(rhs)), lhs == rhs))
    return checks


def _verify_selberg(cfg: RunConfig) -> list[Check]:
    table = load_table(cfg, with_theta=False)
    checks = []
    for X in (300.0, 600.0):
        m = mollifier.build_mollifier(table, X)
        for v in (0.0, 0.1, 0.25):
            rep = sums.selberg_pair(v, table, m)
            checks.append(Check(rep, rep.relative_discrepancy <= 1e-10))
    return checks


def _verify_rankin(cfg: RunConfig) -> list[Check]:
    table = load_table(cfg, with_theta=False)
    n = table.n_max
    full = sums.rankin_mean(n, table)
    half = sums.rankin_mean(n // 2, table)
    rep = sums.SumReport("rankin_mean", {"x": n, "x_half": n // 2}, complex(half), complex(full))
    checks = [Check(rep, full > 0 and abs(half - full) / full < 0.05)]
    ser = sums.rankin_series(2.0, table)
    checks.append(Check(ser, math.isfinite(ser.value.real) and ser.value.real >= 1))
    return checks


def _verify_window_mean_square(cfg: RunConfig) -> list[Check]:
    table = load_table(cfg)
    p = _params(cfg)
    m = mollifier.build_mollifier(table, cfg.X)
    r = detector.window_mean_square_check(table, m, p, cfg.T0, step=cfg.step)
    params = {"T0": cfg.T0, "Y": r.Y, "H": r.H, "delta": cfg.delta, "h1": cfg.h1, "X": cfg.X,
              "step": cfg.step}
    return [
        Check(sums.SumReport("window_mean_square_first", params, complex(r.lhs1_upper), complex(r.rhs1),
                             tail_bound=r.rhs_tail_bound), r.holds1),
        Check(sums.SumReport("window_mean_square_second", params, complex(r.lhs2_upper), complex(r.rhs2),
                             tail_bound=r.rhs_tail_bound), r.holds2),
    ]


BESSEL_TRIPLES = ((1.0, 1.0, 1), (4.0, 1.0, 2), (1.0, 4.0, 1), (2.0, 3.0, 12), (0.5, 2.0, 5))


def _verify_bessel(cfg: RunConfig) -> list[Check]:
    out = []
    for a, b, k in BESSEL_TRIPLES:
        r = voronoi.bessel_mellin_check(a, b, k)
        out.append(Check(r.report(), r.relative_residual < 1e-6))
    return out


SHIFT_CONFIGS = ((10000, 1, 1, 1), (10000, 1, 1, 2), (10000, 1, 2, 1), (10000, 2, 1, 3),
                 (5000, 3, 2, 1), (5000, 1, 3, 1), (20000, 1, 1, 7), (8000, 5, 3, 2),
                 (3000, 7, 11, 4), (50000, 1, 1, 1))


def _verify_shifted(cfg: RunConfig) -> list[Check]:
    table = load_table(cfg, with_theta=False)
    out = []
    for N, m1, m2, l in SHIFT_CONFIGS:
        rep = sums.shifted_convolution(N, m1, m2, l, table)
        out.append(Check(rep, rep.value == rep.oracle and rep.extra["cancellation"] < 1))
    for rep in sums.shifted_sweep(table):
        sweep = sums.SumReport("shifted_sweep", rep.params, rep.value,
                               complex(rep.extra["exponent_ratio"]))
        out.append(Check(sweep, True))
    return out


def run_verify(cfg: RunConfig, targets: list[str]) -> int:
    failed = 0
    for target in targets:
        if target == "voronoi":
            checks, results = _verify_voronoi(cfg)
            voronoi.write_voronoi(results, out_path(cfg, "verify_voronoi.csv"))
        else:
            fn = {"kform": _verify_kform, "moebius": _verify_moebius, "selberg": _verify_selberg,
                  "rankin": _verify_rankin, "lemma1": _verify_window_mean_square,
                  "bessel-mellin": _verify_bessel, "shifted": _verify_shifted}[target]
            checks = fn(cfg)
            sums.write_sum_reports([c.report for c in checks],
                                   out_path(cfg, f"verify_{target.replace('-', '_')}.csv"))
        bad = sum(1 for c in checks if not c.passed)
        failed += bad
        print(f"{target}: {'PASS' if not bad else 'FAIL'} ({len(checks) - bad}/{len(checks)})")
    return EXIT_OK if failed == 0 else EXIT_FAIL


def cmd_verify(cfg: RunConfig, args) -> int:
    targets = args.targets or list(VERIFY_TARGETS)
    return run_verify(cfg, targets)


# ----------------------------------------------------------------------------
# argument parsing
# ----------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="key = value configuration file")
    common.add_argument("--form", help="built-in form: delta or f23")
    common.add_argument("--table", help="custom coefficient table (cache CSV format)")
    common.add_argument("--n-max", type=int, dest="n_max")
    common.add_argument("--X", type=float, dest="X")
    common.add_argument("--delta", type=float)
    common.add_argument("--h1", type=float)
    common.add_argument("--T", type=float, dest="T")
    common.add_argument("--T0", type=float, dest="T0")
    common.add_argument("--step", type=float)
    common.add_argument("--tol", type=float)
    common.add_argument("--A", type=float, dest="A")
    common.add_argument("--k-limit", type=int, dest="k_limit")
    common.add_argument("--out-dir", dest="out_dir")
    common.add_argument("--emit-plot-data", action="store_true", dest="emit_plot_data",
                        help="also write two-column CSVs for plotting (detect, gprofile)")
    common.add_argument("-v", "--verbose", action="store_true")

    parser = argparse.ArgumentParser(prog="cuspzeros", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)
    c = sub.add_parser("coeffs", parents=[common], help="build and cache a coefficient table")
    c.add_argument("--out", help="write here instead of the cache directory")
    sub.add_parser("zeros", parents=[common], help="count and list critical-line zeros")
    sub.add_parser("mollifier", parents=[common], help="dump the mollifier coefficients")
    sub.add_parser("detect", parents=[common], help="window-integral detection on (1, T)")
    g = sub.add_parser("gprofile", parents=[common], help="G(y) with its majorant")
    g.add_argument("--y-min", type=float, default=1.0)
    g.add_argument("--y-max", type=float, default=100.0)
    g.add_argument("--points", type=int, default=25)
    g.add_argument("--corrected", action="store_true",
                   help="include the (n nu1 y / nu2)^((k-1)/2) weight factor")
    v = sub.add_parser("verify", parents=[common], help="run verification targets")
    v.add_argument("targets", nargs="*", metavar="target",
                   help=f"any of {', '.join(VERIFY_TARGETS)} (default: all)")
    sub.add_parser("schedule", parents=[common], help="advisory parameters for a given T")
    return parser


def resolve_config(args) -> RunConfig:
    cfg = RunConfig()
    if args.config:
        cfg = parse_config_text(Path(args.config).read_text(), cfg)
    for f in dataclasses.fields(RunConfig):
        val = getattr(args, f.name, None)
        if val is not None and f.name != "schedule":
            setattr(cfg, f.name, val)
    cfg.validate()
    return cfg


COMMANDS = {"coeffs": cmd_coeffs, "zeros": cmd_zeros, "mollifier": cmd_mollifier,
            "detect": cmd_detect, "gprofile": cmd_gprofile, "verify": cmd_verify,
            "schedule": cmd_schedule}


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else EXIT_OK
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    if args.command == "verify":
        unknown = [t for t in args.targets if t not in VERIFY_TARGETS]
        if unknown:
            parser.print_usage(sys.stderr)
            print(f"unknown verify target(s): {', '.join(unknown)}", file=sys.stderr)
            return EXIT_USAGE
    try:
        cfg = resolve_config(args)
    except (ValueError, OSError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    try:
        return COMMANDS[args.command](cfg, args)
    except (ValueError, ArithmeticError, RuntimeError) as exc:
        module = type(exc).__module__.rsplit(".", 1)[-1]
        print(f"{module} contract violated: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
