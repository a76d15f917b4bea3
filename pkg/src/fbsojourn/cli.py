"""Command-line front end: ``fbsojourn <command> [flags]``.

Commands are dist, mean, asymp, tail, simulate and scan.  Values can also be
given in a ``--config`` file of key=value lines; explicit flags win over the
file, which wins over built-in defaults.

Exit codes: 0 ok, 2 usage or parse error, 3 unsupported regime, 4 numerical
failure.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys

import numpy as np

from . import analytic, asymptotics, sim, tail
from .dist import parse_dist
from .errors import (BracketError, DomainError, FBError, InfiniteMomentError, QuadratureError,
                     SimulationError, UnsupportedRegimeError)

EXIT_OK, EXIT_USAGE, EXIT_UNSUPPORTED, EXIT_NUMERIC = 0, 2, 3, 4

DEFAULTS = {
    "seed": 1,
    "jobs": 1_000_000,
    "warmup": 100_000,
    "reps": 1,
    "workers": 1,
}
DEFAULT_SCAN_N = (10, 100, 1000, 10000)
SCAN_HEADER = ("rho", "exact_mean", "asymptotic_mean", "ratio", "growth_functional", "log_bench")


class UsageError(Exception):
    pass


def fmt(v) -> str:
    """Shortest round-trip decimal; integers stay integral."""
    if v is None:
        return ""
    if isinstance(v, (bool, np.bool_)):
        return str(bool(v)).lower()
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    v = float(v)
    if math.isnan(v):
        return "nan"
    if math.isinf(v):
        return "inf" if v > 0 else "-inf"
    return repr(v)


def _json_num(v):
    if isinstance(v, (int, np.integer)) and not isinstance(v, bool):
        return int(v)
    if isinstance(v, (float, np.floating)):
        v = float(v)
        return v if math.isfinite(v) else fmt(v)
    return v


def _jsonable(obj):
    if isinstance(obj, dict):
        return {k: _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    return _json_num(obj)


# ---------------------------------------------------------------------------
# option handling


def read_config(path: str) -> dict:
    out = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise UsageError(f"{path}:{lineno}: expected key=value, got {line!r}")
            key, _, val = (s.strip() for s in line.partition("="))
            key = key.replace("-", "_")
            out["lambda_" if key == "lambda" else key] = val
    return out


def resolve(args: argparse.Namespace) -> dict:
    """Merge flags over config over defaults."""
    opts = dict(DEFAULTS)
    # simulation results are nested, so they default to JSON
    opts["format"] = "json" if getattr(args, "command", None) == "simulate" else "csv"
    flags = {k: v for k, v in vars(args).items() if v is not None and k not in ("config", "command")}
    if getattr(args, "config", None):
        layer = read_config(args.config)
        if "rho" in flags or "lambda_" in flags:
            # a load given on the command line replaces either load from the file
            layer.pop("rho", None)
            layer.pop("lambda_", None)
        opts.update(layer)
    opts.update(flags)
    return opts


def _count(v, name) -> int:
    try:
        f = float(v)
    except (TypeError, ValueError):
        raise UsageError(f"--{name} expects a number, got {v!r}") from None
    if f != int(f) or f < 0:
        raise UsageError(f"--{name} expects a non-negative integer, got {v!r}")
    return int(f)


def _floats(text, name):
    if isinstance(text, (list, tuple)):
        return [float(t) for t in text]
    try:
        return [float(t) for t in str(text).split(",") if t.strip()]
    except ValueError:
        raise UsageError(f"--{name} expects comma-separated numbers, got {text!r}") from None


def _dist(opts):
    if not opts.get("dist"):
        raise UsageError("--dist is required")
    return parse_dist(str(opts["dist"]))


def _traffic(opts, d) -> analytic.TrafficPoint:
    has_rho = opts.get("rho") is not None
    has_lam = opts.get("lambda_") is not None
    if has_rho and has_lam:
        raise UsageError("give exactly one of --rho and --lambda")
    if not (has_rho or has_lam):
        raise UsageError("one of --rho or --lambda is required")
    if has_rho:
        rho = float(opts["rho"])
        if not 0 <= rho < 1:
            raise DomainError(f"load must lie in [0, 1), got {rho!r}")
        return analytic.TrafficPoint.from_rho(d, rho)
    return analytic.TrafficPoint.from_lambda(d, float(opts["lambda_"]))


def _emit(opts, text: str):
    out = opts.get("out")
    if out:
        with open(out, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _table(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for r in rows:
        w.writerow([fmt(v) if not isinstance(v, str) else v for v in r])
    return buf.getvalue()


def _render(opts, record: dict) -> str:
    if opts["format"] == "json":
        return json.dumps(_jsonable(record), indent=2) + "\n"
    return _table(list(record), [list(record.values())])


def _safe(fn):
    try:
        return fn()
    except (UnsupportedRegimeError, InfiniteMomentError):
        return math.nan


# ---------------------------------------------------------------------------
# commands


def cmd_dist(opts) -> int:
    d = _dist(opts)
    H = d.mda_info()
    record = {
        "dist": d.spec_string(),
        "mean": d.mean,
        "second_moment": d.second_moment,
        "eq_mean": _safe(lambda: d.eq_mean),
        "x_right": d.x_right,
        "mda": H.label,
        "p_H": math.nan if H.p_H is None else H.p_H,
        "r_H": math.nan if H.r_H is None else H.r_H,
    }
    _emit(opts, _render(opts, record))
    return EXIT_OK


def cmd_mean(opts) -> int:
    d = _dist(opts)
    tp = _traffic(opts, d)
    record = {
        "rho": tp.rho,
        "lambda": tp.lam,
        "fb_mean": analytic.mean_sojourn_fb(tp),
        "fb_mean_alt": analytic.mean_sojourn_fb_alt(tp),
        "srpt_mean": analytic.mean_sojourn_srpt(tp),
    }
    _emit(opts, _render(opts, record))
    return EXIT_OK


def cmd_asymp(opts) -> int:
    d = _dist(opts)
    tp = _traffic(opts, d)
    reg = asymptotics.regime_of(d)
    record = {
        "rho": tp.rho,
        "regime": reg.kind,
        "leading_constant": reg.leading_constant,
        "rate": reg.rate_description,
        "asymptotic_mean": asymptotics.asymptotic_mean_fb(tp),
        "growth_functional": asymptotics.growth_functional(tp) if tp.rho > 0 else math.nan,
    }
    _emit(opts, _render(opts, record))
    return EXIT_OK


def scan_rows(d, rhos):
    """One ScanRow tuple per load; failed quadratures leave nan and flag the run."""
    rows, failed = [], False
    for rho in rhos:
        if not 0 < rho < 1:
            raise DomainError(f"scan loads must lie in (0, 1), got {rho!r}")
        tp = analytic.TrafficPoint.from_rho(d, rho)
        try:
            exact = analytic.mean_sojourn_fb(tp)
        except (QuadratureError, BracketError):
            exact, failed = math.nan, True
        asym = asymptotics.asymptotic_mean_fb(tp)
        growth = _safe(lambda: asymptotics.growth_functional(tp))
        ratio = exact / asym if math.isfinite(exact) and math.isfinite(asym) and asym else math.nan
        rows.append((rho, exact, asym, ratio, growth, -math.log1p(-rho)))
    return rows, failed


def cmd_scan(opts) -> int:
    d = _dist(opts)
    if opts.get("grid") is not None:
        rhos = _floats(opts["grid"], "grid")
    elif opts.get("n") is not None:
        rhos = [1.0 - 1.0 / n for n in _floats(opts["n"], "n")]
    else:
        rhos = [1.0 - 1.0 / n for n in DEFAULT_SCAN_N]
    rows, failed = scan_rows(d, rhos)
    if opts["format"] == "json":
        text = json.dumps(_jsonable([dict(zip(SCAN_HEADER, r)) for r in rows]), indent=2) + "\n"
    else:
        text = _table(SCAN_HEADER, rows)
    _emit(opts, text)
    return EXIT_NUMERIC if failed else EXIT_OK


def default_t_grid(prm: "tail.TailParams", per_decade: int = 60) -> list:
    """0, then a log grid from t1 to T* = 4c log 2000.

    g* ~ C t^{-p/2} near 0, so the mass below t1 is about t1 g*(t1)/(1 - p/2);
    t1 is put where that is 2e-3.  Past T* less than 1e-3 of the mass remains.
    """
    c, p = prm.eq_mean, prm.p_H
    top = 4.0 * c * math.log(2000.0)
    head = lambda u: math.exp(u) * tail.g_star(math.exp(u), prm) / (1.0 - p / 2.0)
    lo_u, hi_u = math.log(1e-250), math.log(c)
    for _ in range(60):
        mid = 0.5 * (lo_u + hi_u)
        lo_u, hi_u = (mid, hi_u) if head(mid) < 2e-3 else (lo_u, mid)
    t1 = math.exp(lo_u)
    n = int(math.ceil(per_decade * math.log10(top / t1))) + 1
    return [0.0] + list(np.geomspace(t1, top, n))


def cmd_tail(opts) -> int:
    d = _dist(opts)
    prm = tail.TailParams.from_dist(d)
    ts = _floats(opts["t_grid"], "t-grid") if opts.get("t_grid") else default_t_grid(prm)
    qs = _floats(opts["q_grid"], "q-grid") if opts.get("q_grid") else [0.0, 0.25, 0.5, 1.0, 2.0, 4.0]
    gs = [tail.g_star(t, prm) for t in ts]
    ls = [tail.laplace_residual(q, prm) for q in qs]
    if opts["format"] == "json":
        text = json.dumps(_jsonable({"p_H": prm.p_H, "eq_mean": prm.eq_mean, "r_H": prm.r_H,
                                     "g_star": list(zip(ts, gs)),
                                     "laplace_residual": list(zip(qs, ls))}), indent=2) + "\n"
    else:
        rows = [("g_star", t, g) for t, g in zip(ts, gs)] + [("laplace_residual", q, v) for q, v in zip(qs, ls)]
        text = _table(("series", "arg", "value"), rows)
    _emit(opts, text)
    return EXIT_OK


def cmd_simulate(opts) -> int:
    d = _dist(opts)
    tp = _traffic(opts, d)
    cfg = sim.SimConfig(
        warmup_jobs=_count(opts["warmup"], "warmup"),
        measured_jobs=max(_count(opts["jobs"], "jobs"), 1),
        replications=max(_count(opts["reps"], "reps"), 1),
        seed=_count(opts["seed"], "seed"),
        workers=max(_count(opts["workers"], "workers"), 1),
    )
    exact = _safe(lambda: analytic.mean_sojourn_fb(tp))
    thresholds = [exact] if math.isfinite(exact) else []
    prm = None
    ys = _floats(opts["y_grid"], "y-grid") if opts.get("y_grid") else None
    if tp.rho > 0:
        try:
            prm = tail.TailParams.from_dist(d)
        except (UnsupportedRegimeError, InfiniteMomentError):
            prm = None
    if prm is not None:
        ys = ys or [prm.eq_mean * k for k in (0.25, 0.5, 1.0, 2.0, 4.0)]
        thresholds += [y / (1.0 - tp.rho) ** 2 for y in ys]
    st = sim.simulate_fb(tp, cfg, thresholds=thresholds)
    grid, frac = st.empirical_ccdf
    keep = (frac > 0) & (frac < 1)
    record = {
        "dist": d.spec_string(), "rho": tp.rho, "lambda": tp.lam, "seed": cfg.seed,
        "warmup": cfg.warmup_jobs, "jobs": cfg.measured_jobs, "reps": cfg.replications,
        "n": st.n, "mean": st.mean, "std_error": st.std_error, "variance": st.variance,
        "n_busy_periods": st.n_busy_periods, "exact_mean": exact,
    }
    if math.isfinite(exact):
        p, se = st.exceedance[min(st.exceedance, key=lambda k: abs(k - exact))]
        record["p_exceed_mean"] = p
        record["p_exceed_mean_se"] = se
    record["ccdf"] = [[y, f] for y, f in zip(grid[keep], frac[keep])]
    if prm is not None:
        sc = sim.scaled_tail(st, tp, ys, prm.r_H)
        record["scaled_tail"] = [
            {"y": y, "empirical": sc[y][0], "std_error": sc[y][1], "g_star": tail.g_star(y, prm)}
            for y in ys
        ]
    if opts["format"] == "csv":
        rows = [(y, f, "") for y, f in record["ccdf"]]
        text = _table(("y", "ccdf", "g_star"), rows)
        if prm is not None:
            text += _table(("y_scaled", "empirical", "g_star"),
                           [(r["y"], r["empirical"], r["g_star"]) for r in record["scaled_tail"]])
    else:
        text = json.dumps(_jsonable(record), indent=2) + "\n"
    _emit(opts, text)
    return EXIT_OK


COMMANDS = {
    "dist": cmd_dist, "mean": cmd_mean, "asymp": cmd_asymp,
    "tail": cmd_tail, "simulate": cmd_simulate, "scan": cmd_scan,
}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--dist", help="service law, e.g. 'pareto(alpha=3,xl=1)'")
    load = common.add_mutually_exclusive_group()
    load.add_argument("--rho", type=float)
    load.add_argument("--lambda", dest="lambda_", type=float)
    common.add_argument("--out")
    common.add_argument("--format", choices=("csv", "json"))
    common.add_argument("--seed", type=int)
    common.add_argument("--jobs", help="measured jobs per replication (accepts 1e6)")
    common.add_argument("--warmup", help="warm-up jobs per replication")
    common.add_argument("--reps", help="replications")
    common.add_argument("--workers", help="threads running replications")
    common.add_argument("--config", help="file of key=value lines")
    p = argparse.ArgumentParser(prog="fbsojourn", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)
    sub.add_parser("dist", parents=[common], help="moments and extreme-value class")
    sub.add_parser("mean", parents=[common], help="exact FB and SRPT mean sojourn times")
    sub.add_parser("asymp", parents=[common], help="heavy-traffic regime and asymptotic mean")
    t = sub.add_parser("tail", parents=[common], help="limiting tail density and Laplace transform")
    t.add_argument("--t-grid", dest="t_grid")
    t.add_argument("--q-grid", dest="q_grid")
    s = sub.add_parser("simulate", parents=[common], help="event-driven FB simulation")
    s.add_argument("--y-grid", dest="y_grid", help="scaled tail thresholds")
    sc = sub.add_parser("scan", parents=[common], help="exact vs asymptotic mean over a load grid")
    grid = sc.add_mutually_exclusive_group()
    grid.add_argument("--grid", help="comma-separated loads")
    grid.add_argument("--n", help="comma-separated n, giving loads 1 - 1/n")
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        opts = resolve(args)
        if opts["format"] not in ("csv", "json"):
            raise UsageError(f"unknown format {opts['format']!r}")
        return COMMANDS[args.command](opts)
    except UsageError as e:
        print(f"fbsojourn: error: {e}", file=sys.stderr)
        return EXIT_USAGE
    except (UnsupportedRegimeError, InfiniteMomentError) as e:
        print(f"fbsojourn: unsupported: {e}", file=sys.stderr)
        return EXIT_UNSUPPORTED
    except (QuadratureError, BracketError, SimulationError) as e:
        print(f"fbsojourn: numerical failure: {e}", file=sys.stderr)
        return EXIT_NUMERIC
    except (DomainError, ValueError, OSError) as e:
        print(f"fbsojourn: error: {e}", file=sys.stderr)
        return EXIT_USAGE
    except FBError as e:
        print(f"fbsojourn: numerical failure: {e}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
