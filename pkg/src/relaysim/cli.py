"""Command-line front end: run simulations, evaluate bounds, verify invariants.

Subcommands:

* ``simulate`` - Monte Carlo outage sweep for the requested schemes.
* ``analytic`` - closed-form bounds and asymptotes on the same grid.
* ``compare``  - both, plus diversity-slope estimates (and rank
  frequencies with ``--ranks``); prints an array-gain summary for
  two-user runs.
* ``verify``   - selection-oracle equivalence, rank-table enumeration,
  comparison-count, and worked-example checks; exits 2 on failure.

Output is a single flat table (CSV or JSON) with columns
``p_db,scheme,series,user,value,std_err,trials,flag`` where ``series`` is
one of sim_user, sim_min, bound_exact, bound_asymptotic, slope,
rank_freq. For rank_freq rows the ``user`` column holds the rank. All
values are emitted with shortest round-trip float formatting, so a given
spec and seed produce byte-identical files.

Powers are read in dB and converted to linear scale exactly once, here.
A flat ``key = value`` spec file can supply any option; explicit flags
override the file.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path

import numpy as np

from . import analytics, montecarlo, selection
from .channel import NetworkConfig, db_to_linear
from .rng import derive_stream

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_VERIFY = 2
EXIT_IO = 3

COLUMNS = ("p_db", "scheme", "series", "user", "value", "std_err", "trials", "flag")

_DEFAULTS = {
    "users": 2,
    "relays": 4,
    "threshold_db": 5.0,
    "p_db": "0:25:2.5",
    "q_db": None,
    "trials": 100000,
    "seed": 1,
    "schemes": "ors,srs,naive",
    "out": None,
    "format": "csv",
    "slope_window": None,
    "workers": 1,
    "ranks": False,
}


class UsageError(Exception):
    pass


@dataclass(frozen=True)
class ExperimentSpec:
    mode: str
    config: NetworkConfig
    schemes: tuple[str, ...]
    grid_db: tuple[float, ...]
    trials: int
    seed: int
    slope_window: tuple[float, float] | None
    out: str | None
    fmt: str
    workers: int
    ranks: bool


# ---------------------------------------------------------------------------
# spec assembly
# ---------------------------------------------------------------------------


def parse_grid(text: str) -> tuple[float, ...]:
    try:
        start, stop, step = (float(v) for v in text.split(":"))
    except ValueError as exc:
        raise UsageError(f"bad grid {text!r}; expected start:stop:step") from exc
    if not (start < stop and step > 0):
        raise UsageError(f"grid needs start < stop and step > 0, got {text!r}")
    count = int(math.floor((stop - start) / step + 1e-9)) + 1
    return tuple(start + i * step for i in range(count))


def parse_spec_file(path: str) -> dict:
    values = {}
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise UsageError(f"cannot read spec file {path}: {exc}") from exc
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise UsageError(f"{path}:{lineno}: expected key = value, got {raw!r}")
        key, _, value = line.partition("=")
        values[key.strip()] = value.strip()
    return values


def _merged_option(name, args, file_values):
    flag = getattr(args, name, None)
    if flag is not None:
        return flag
    if name in file_values:
        return file_values[name]
    return _DEFAULTS[name]


def build_spec(mode: str, args: argparse.Namespace) -> ExperimentSpec:
    file_values = parse_spec_file(args.spec) if args.spec else {}
    unknown = set(file_values) - set(_DEFAULTS) - {"mode"}
    if unknown:
        raise UsageError(f"unknown spec file keys: {sorted(unknown)}")
    if "mode" in file_values and getattr(args, "mode_from_cli", None) is None:
        mode = file_values["mode"]
    if mode not in ("simulate", "analytic", "compare", "verify"):
        raise UsageError(f"unknown mode {mode!r}")

    def opt(name, cast):
        v = _merged_option(name, args, file_values)
        if v is None:
            return None
        try:
            return cast(v)
        except (TypeError, ValueError) as exc:
            raise UsageError(f"bad value for {name}: {v!r}") from exc

    users = opt("users", int)
    relays = opt("relays", int)
    threshold_db = opt("threshold_db", float)
    trials = opt("trials", int)
    seed = opt("seed", int)
    workers = opt("workers", int)
    fmt = opt("format", str)
    out = opt("out", str)
    ranks = opt("ranks", lambda v: v if isinstance(v, bool) else v.lower() in ("1", "true", "yes"))
    grid = parse_grid(opt("p_db", str))
    schemes_text = opt("schemes", str)
    schemes = tuple(s.strip() for s in schemes_text.split(",") if s.strip())
    if not schemes:
        raise UsageError("schemes must be nonempty")
    for s in schemes:
        if s not in selection.SCHEMES:
            raise UsageError(f"unknown scheme {s!r}; expected one of {selection.SCHEMES}")
    if fmt not in ("csv", "json"):
        raise UsageError(f"format must be csv or json, got {fmt!r}")
    if users < 1 or relays < users:
        raise UsageError(f"need relays >= users >= 1, got users={users}, relays={relays}")
    if mode in ("simulate", "compare") and trials < 1:
        raise UsageError("trials must be >= 1 for simulation")
    if workers < 1:
        raise UsageError("workers must be >= 1")

    window_text = _merged_option("slope_window", args, file_values)
    slope_window = None
    if window_text:
        try:
            lo, hi = (float(v) for v in str(window_text).split(":"))
        except ValueError as exc:
            raise UsageError(f"bad slope window {window_text!r}; expected lo:hi") from exc
        if lo >= hi:
            raise UsageError("slope window needs lo < hi")
        slope_window = (lo, hi)

    q_db = opt("q_db", float)
    p0 = db_to_linear(grid[0])
    relay_power = db_to_linear(q_db) if q_db is not None else p0
    config = NetworkConfig(
        num_users=users,
        num_relays=relays,
        user_power=p0,
        relay_power=relay_power,
        snr_threshold=db_to_linear(threshold_db),
    )
    return ExperimentSpec(
        mode=mode,
        config=config,
        schemes=schemes,
        grid_db=grid,
        trials=trials,
        seed=seed,
        slope_window=slope_window,
        out=out,
        fmt=fmt,
        workers=workers,
        ranks=bool(ranks),
    )


# ---------------------------------------------------------------------------
# row builders
# ---------------------------------------------------------------------------


def _fmt(value) -> str:
    if value is None or value == "":
        return ""
    if isinstance(value, float):
        return repr(value)
    return str(value)


def _row(p_db, scheme, series, user, value, std_err, trials, flag) -> dict:
    return {
        "p_db": _fmt(p_db),
        "scheme": scheme,
        "series": series,
        "user": _fmt(user),
        "value": _fmt(value),
        "std_err": _fmt(std_err),
        "trials": _fmt(trials),
        "flag": flag,
    }


def _q_over_p(spec: ExperimentSpec) -> float:
    return spec.config.relay_power / spec.config.user_power


def simulate_rows(spec: ExperimentSpec) -> tuple[list[dict], dict[str, montecarlo.ExperimentResult]]:
    rows = []
    results = {}
    for scheme in spec.schemes:
        result = montecarlo.run_outage_sweep(
            spec.config, scheme, spec.grid_db, spec.trials, spec.seed, workers=spec.workers
        )
        results[scheme] = result
        for gi, p_db in enumerate(spec.grid_db):
            est = result.min_snr_outage[gi]
            rows.append(
                _row(p_db, scheme, "sim_min", "", est.p_hat, est.std_err, est.trials,
                     "ok" if est.reliable else "unreliable")
            )
            for u in range(spec.config.num_users):
                est = result.per_user_outage[u][gi]
                rows.append(
                    _row(p_db, scheme, "sim_user", u + 1, est.p_hat, est.std_err, est.trials,
                         "ok" if est.reliable else "unreliable")
                )
        if spec.ranks:
            freqs = montecarlo.rank_frequency(
                spec.config, scheme, spec.trials, spec.seed, workers=spec.workers
            )
            for rank in sorted(freqs):
                rows.append(_row("", scheme, "rank_freq", rank, freqs[rank], "", spec.trials, "ok"))
    return rows, results


def analytic_rows(spec: ExperimentSpec, strict: bool) -> list[dict]:
    """Bound and asymptote rows. With ``strict`` (pure analytic mode) a
    scheme lacking any closed form raises; in compare mode it is skipped."""
    rows = []
    cfg = spec.config
    ratio = _q_over_p(spec)
    p_lin = [db_to_linear(p) for p in spec.grid_db]
    for scheme in spec.schemes:
        have_bound = scheme == "naive" or (scheme in ("ors", "srs") and cfg.num_users == 2)
        if scheme == "random" or not have_bound:
            if strict:
                raise UsageError(
                    f"no closed-form bound for scheme {scheme!r} with {cfg.num_users} users; "
                    "drop it from --schemes or use simulate/compare"
                )
        else:
            curve = analytics.bound_curve(
                scheme, cfg.num_users, cfg.num_relays, cfg.snr_threshold, p_lin, q_over_p=ratio
            )
            for p_db, v in zip(spec.grid_db, curve.values):
                rows.append(_row(p_db, scheme, "bound_exact", "", v, "", "", "ok"))
            if scheme == "naive":
                for u in range(1, cfg.num_users + 1):
                    for p_db, p in zip(spec.grid_db, p_lin):
                        v = analytics.outage_naive_user(
                            cfg.snr_threshold, p, p * ratio, u, cfg.num_users, cfg.num_relays
                        )
                        rows.append(_row(p_db, scheme, "bound_exact", u, v, "", "", "ok"))
        try:
            asym = analytics.asymptote_curve(
                scheme, cfg.num_users, cfg.num_relays, cfg.snr_threshold, p_lin
            )
        except ValueError:
            continue
        for p_db, v in zip(spec.grid_db, asym.values):
            rows.append(_row(p_db, scheme, "bound_asymptotic", "", v, "", "", "ok"))
    return rows


def slope_rows(spec: ExperimentSpec, results: dict[str, montecarlo.ExperimentResult]) -> list[dict]:
    rows = []
    for scheme in spec.schemes:
        result = results[scheme]
        curves = [("", [e.p_hat for e in result.min_snr_outage])]
        curves += [
            (u + 1, [e.p_hat for e in result.per_user_outage[u]])
            for u in range(spec.config.num_users)
        ]
        for user, values in curves:
            try:
                d = montecarlo.estimate_diversity_slope(spec.grid_db, values, spec.slope_window)
            except ValueError as exc:
                print(f"note: no slope for {scheme} user={user or 'min'}: {exc}", file=sys.stderr)
                continue
            rows.append(_row("", scheme, "slope", user, d, "", spec.trials, "ok"))
    return rows


def print_two_user_summary(spec: ExperimentSpec) -> None:
    cfg = spec.config
    if cfg.num_users != 2:
        return
    c_single, d_db = analytics.array_gain_ratios(cfg.num_relays)
    print(
        f"array gain: optimal-vs-single-user ratio {c_single:g} "
        f"({10*math.log10(c_single):.2f} dB); naive-vs-suboptimal advantage {d_db:.2f} dB"
    )
    dev = analytics.polynomial_form_deviation(
        cfg.snr_threshold, cfg.user_power, cfg.relay_power, cfg.num_relays
    )
    print(
        f"rewritten-form cross-check at grid start: optimal dev {dev['ors']:.2e}, "
        f"suboptimal dev {dev['srs']:.2e} (nonzero: known misprint in the printed form)"
    )


# ---------------------------------------------------------------------------
# verification mode
# ---------------------------------------------------------------------------


def _verify_ors_oracle(matrices: int, seed: int) -> list[tuple[str, bool, str]]:
    checks = []
    for idx, (n, nr) in enumerate([(2, 2), (2, 4), (3, 4), (3, 5)]):
        rng = derive_stream(seed, 9000, idx)
        mismatches = 0
        for _ in range(matrices):
            m = rng.random((n, nr))
            a = selection.select_ors(m)
            b = selection.brute_force_lex_optimal(m)
            if a.assignment != b.assignment or a.sorted_snrs != b.sorted_snrs:
                mismatches += 1
        checks.append(
            (
                f"optimal-selection oracle {n}x{nr} ({matrices} matrices)",
                mismatches == 0,
                f"{mismatches} mismatches",
            )
        )
    return checks


def _verify_rank_tables() -> list[tuple[str, bool, str]]:
    checks = []
    for scheme in ("ors", "srs"):
        for nr in (2, 3):
            table = analytics._rank_fractions(scheme, nr)
            enum = analytics.enumerate_rank_probs_two_user(scheme, nr)
            ok = table == enum and sum(table.values()) == Fraction(1)
            checks.append(
                (
                    f"rank table {scheme} N_r={nr} vs exhaustive placement",
                    ok,
                    "exact match" if ok else f"table={table} enum={enum}",
                )
            )
    return checks


def _verify_op_counts(seed: int) -> list[tuple[str, bool, str]]:
    rng = derive_stream(seed, 9100)
    bad = []
    for nr in range(1, 13):
        for n in range(1, nr + 1):
            m = rng.random((n, nr))
            if selection.select_srs(m).op_count != selection.srs_complexity(n, nr):
                bad.append(("srs", n, nr))
            if selection.select_naive(m).op_count != selection.naive_complexity(n, nr):
                bad.append(("naive", n, nr))
    return [
        (
            "comparison counts match formulas for 1 <= N <= N_r <= 12",
            not bad,
            "all match" if not bad else f"failures: {bad[:5]}",
        )
    ]


def _verify_worked_example() -> list[tuple[str, bool, str]]:
    m = np.array([[1.08, 0.14, 0.09, 0.05], [1.07, 0.15, 0.50, 0.04]])
    ors = selection.select_ors(m)
    srs = selection.select_srs(m)
    ok_ors = ors.assignment.relay_of == (0, 2) and ors.user_snrs == (1.08, 0.50)
    ok_srs = srs.assignment.relay_of == (1, 0) and srs.user_snrs == (0.14, 1.07)
    return [
        ("two-user four-relay worked example, optimal", ok_ors, str(ors.assignment.relay_of)),
        ("two-user four-relay worked example, suboptimal", ok_srs, str(srs.assignment.relay_of)),
    ]


def _verify_polynomial_form() -> list[tuple[str, bool, str]]:
    worst = 0.0
    for nr in (2, 3, 4, 6):
        for p in (10.0, 100.0, 1000.0):
            dev = analytics.polynomial_form_deviation(3.1623, p, p, nr)["ors"]
            worst = max(worst, dev)
    return [
        (
            "optimal rewritten polynomial form agrees with mixture form",
            worst < 1e-9,
            f"max relative deviation {worst:.2e}",
        )
    ]


def run_verify(spec: ExperimentSpec) -> int:
    checks = []
    checks += _verify_ors_oracle(spec.trials, spec.seed)
    checks += _verify_rank_tables()
    checks += _verify_op_counts(spec.seed)
    checks += _verify_worked_example()
    checks += _verify_polynomial_form()
    failed = 0
    for name, ok, detail in checks:
        status = "PASS" if ok else "FAIL"
        failed += 0 if ok else 1
        print(f"{status}  {name}: {detail}")
    dev = analytics.polynomial_form_deviation(3.1623, 100.0, 100.0, 4)["srs"]
    print(f"NOTE  printed suboptimal rewritten form deviates from mixture by {dev:.2e} (expected)")
    return EXIT_OK if failed == 0 else EXIT_VERIFY


# ---------------------------------------------------------------------------
# output
# ---------------------------------------------------------------------------


def render_csv(rows: list[dict]) -> str:
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=COLUMNS, lineterminator="\n")
    writer.writeheader()
    writer.writerows(rows)
    return buf.getvalue()


def render_json(rows: list[dict]) -> str:
    return json.dumps(rows, indent=2) + "\n"


def emit(rows: list[dict], spec: ExperimentSpec) -> None:
    text = render_csv(rows) if spec.fmt == "csv" else render_json(rows)
    if spec.out is None:
        sys.stdout.write(text)
        return
    try:
        Path(spec.out).write_text(text)
    except OSError as exc:
        raise IOError(f"cannot write {spec.out}: {exc}") from exc


# ---------------------------------------------------------------------------
# entry points
# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--users", type=int, help="number of users N")
    common.add_argument("--relays", type=int, help="number of relays N_r (>= N)")
    common.add_argument("--threshold-db", dest="threshold_db", type=float,
                        help="outage SNR threshold in dB (default 5)")
    common.add_argument("--p-db", dest="p_db", help="power grid start:stop:step in dB")
    common.add_argument("--q-db", dest="q_db", type=float,
                        help="relay power in dB at the first grid point; it keeps this "
                             "offset from the user power across the sweep (default: equal)")
    common.add_argument("--trials", type=int, help="Monte Carlo trials per grid point")
    common.add_argument("--seed", type=int, help="experiment seed")
    common.add_argument("--schemes", help="comma list from: ors,srs,naive,random")
    common.add_argument("--out", help="output file (default: stdout)")
    common.add_argument("--format", choices=("csv", "json"), help="output format")
    common.add_argument("--spec", help="key=value spec file; flags override it")
    common.add_argument("--slope-window", dest="slope_window", help="slope fit window lo:hi in dB")
    common.add_argument("--workers", type=int, help="parallel workers (default 1)")
    common.add_argument("--ranks", action="store_const", const=True, default=None,
                        help="also tally min-SNR rank frequencies")

    parser = argparse.ArgumentParser(
        prog="relaysim",
        description="Relay-selection outage simulation and analysis for multi-user AF networks",
    )
    sub = parser.add_subparsers(dest="mode_from_cli", required=True)
    sub.add_parser("simulate", parents=[common], help="Monte Carlo outage sweep")
    sub.add_parser("analytic", parents=[common], help="closed-form bounds and asymptotes")
    sub.add_parser("compare", parents=[common], help="simulation, bounds, and slopes together")
    sub.add_parser("verify", parents=[common], help="run self-verification checks")
    return parser


def run(spec: ExperimentSpec) -> int:
    if spec.mode == "verify":
        return run_verify(spec)
    if spec.mode == "simulate":
        rows, _ = simulate_rows(spec)
    elif spec.mode == "analytic":
        rows = analytic_rows(spec, strict=True)
        if spec.out is not None:
            print_two_user_summary(spec)
    else:  # compare
        rows = analytic_rows(spec, strict=False)
        sim, results = simulate_rows(spec)
        rows += sim
        rows += slope_rows(spec, results)
        print_two_user_summary(spec)
    emit(rows, spec)
    return EXIT_OK


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code not in (0, None) else EXIT_OK
    try:
        spec = build_spec(args.mode_from_cli, args)
        return run(spec)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (IOError, OSError) as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return EXIT_IO


def entry() -> None:
    sys.exit(main())


if __name__ == "__main__":
    entry()
