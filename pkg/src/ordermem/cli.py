"""Command line front end.

Subcommands:

    signs      trades file -> per-trade -1/+1 signs
    memory     signs -> per-window memory metrics table
    activity   ownership panel -> r/R/S ratios with quantile groups
    classify   memory + activity tables -> AUC per group cut
    simulate   meta-order splitting model -> signs / meta-order log
    panel      fully synthetic panel -> AUC per metric and cut

Exit codes: 0 success, 1 usage error, 2 data/contract error, 3 internal
error.  Outputs are deterministic: identical inputs, flags, and seed
produce byte-identical files.  The seed defaults to the ORDERMEM_SEED
environment variable, then 0.
"""

from __future__ import annotations

import argparse
import json
import logging
import math
import os
import sys
import traceback
from contextlib import contextmanager
from pathlib import Path

import numpy as np

from . import __version__, classify, ingest, pipeline
from .errors import DataError
from .simulator import SimConfig, simulate
from .signs import extract_signs
from .validation import as_sign_array

log = logging.getLogger("ordermem")


class UsageError(Exception):
    """Bad flag combination detected after argparse."""


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # usage problems exit 1, not argparse's 2
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


@contextmanager
def _stage(name: str):
    """Prefix DataErrors with the pipeline stage that raised them."""
    try:
        yield
    except DataError as e:
        raise DataError(f"{name}: {e}") from None


# --------------------------------------------------------------------------
# output plumbing
# --------------------------------------------------------------------------

def _cell(v) -> str:
    if isinstance(v, bool):
        return "1" if v else "0"
    if isinstance(v, float):
        return repr(v)
    return str(v)


def _json_ready(v):
    if isinstance(v, float) and not math.isfinite(v):
        return None
    return v


def _write_table(out, header, rows, as_json: bool) -> None:
    if as_json:
        payload = [{h: _json_ready(c) for h, c in zip(header, row)} for row in rows]
        text = json.dumps(payload, indent=2) + "\n"
    else:
        lines = [",".join(header)]
        lines.extend(",".join(_cell(c) for c in row) for row in rows)
        text = "\n".join(lines) + "\n"
    if out in (None, "-"):
        sys.stdout.write(text)
    else:
        Path(out).write_text(text, encoding="utf-8")


def _resolve_seed(value) -> int:
    if value is not None:
        return int(value)
    env = os.environ.get("ORDERMEM_SEED", "")
    if not env:
        return 0
    try:
        return int(env)
    except ValueError:
        raise UsageError(f"ORDERMEM_SEED must be an integer, got {env!r}") from None


# --------------------------------------------------------------------------
# signs
# --------------------------------------------------------------------------

def cmd_signs(args) -> int:
    with _stage("parse-trades"):
        parsed = ingest.parse_trades(args.trades)
    if parsed.rejected:
        log.warning("rejected %d malformed trade rows", parsed.rejected_count)
        for rr in parsed.rejected[:20]:
            log.info("  line %d: %s", rr.line, rr.reason)
    events = parsed.events
    if args.min_days is not None or args.min_trades_per_day is not None:
        with _stage("filter-assets"):
            events = ingest.filter_assets(
                events,
                min_days=args.min_days if args.min_days is not None else 200,
                min_trades_per_day=(
                    args.min_trades_per_day if args.min_trades_per_day is not None else 200
                ),
            )
    rows = []
    with _stage("extract-signs"):
        for asset in sorted(events):
            series = extract_signs(events[asset])
            log.info("%s: %d signs, %d dropped at mid", asset, len(series), series.dropped_count)
            rows.extend((asset, int(q), int(s)) for q, s in zip(series.seq, series.signs))
    _write_table(args.out, ("asset", "seq", "sign"), rows, args.json)
    return 0


# --------------------------------------------------------------------------
# memory
# --------------------------------------------------------------------------

def _read_signs_csv(path):
    """Read an asset,seq,sign[,week] table into per-asset arrays."""
    series: dict[str, list[int]] = {}
    weeks: dict[str, list[int]] = {}
    has_week = False
    with open(path, "r", encoding="utf-8") as fh:
        header = fh.readline().strip().split(",")
        if header[:3] != ["asset", "seq", "sign"] or header[3:] not in ([], ["week"]):
            raise DataError(f"signs header must be asset,seq,sign[,week], got {','.join(header)!r}")
        has_week = header[3:] == ["week"]
        for line_no, line in enumerate(fh, start=2):
            line = line.strip()
            if not line:
                continue
            parts = line.split(",")
            if len(parts) != len(header):
                raise DataError(f"signs line {line_no}: expected {len(header)} fields")
            try:
                sign = int(parts[2])
                week = int(parts[3]) if has_week else 0
            except ValueError as e:
                raise DataError(f"signs line {line_no}: {e}") from None
            if sign not in (-1, 1):
                raise DataError(f"signs line {line_no}: sign must be -1 or +1, got {parts[2]}")
            series.setdefault(parts[0], []).append(sign)
            if has_week:
                weeks.setdefault(parts[0], []).append(week)
    out = {a: np.asarray(v, dtype=np.int8) for a, v in series.items()}
    wk = {a: np.asarray(v, dtype=np.int64) for a, v in weeks.items()} if has_week else None
    return out, wk


def _load_signs(args):
    path = str(args.signs)
    if path.endswith(".npy"):
        arr = as_sign_array(np.load(path))
        asset = args.asset_id or Path(path).stem
        return {asset: arr}, None
    return _read_signs_csv(path)


def cmd_memory(args) -> int:
    with _stage("read-signs"):
        series, weeks = _load_signs(args)
    if args.window == "week-column":
        if weeks is None:
            raise UsageError("--window week-column needs a signs file with a week column")
    else:
        weeks = None
    with _stage("memory-metrics"):
        rows = pipeline.memory_table(
            series,
            kappa_max=args.kappa_max,
            tau_max=args.tau_max,
            fit_min=args.fit_min,
            fit_max=args.fit_max,
            window_size=args.window_size,
            weeks=weeks,
            plus_one=args.pi_plus_one,
            threads=args.threads,
        )
    header = (
        ["asset", "window"]
        + [f"pi_neg{k}" for k in range(2, args.kappa_max + 1)]
        + [f"pi_pos{k}" for k in range(2, args.kappa_max + 1)]
        + ["a", "b", "tau_star", "tau_star_scaled", "n"]
    )
    table = []
    for wm in rows:
        m = wm.metrics
        rec = [wm.asset_id, wm.window]
        rec += [m.pi[(-1, k)] for k in range(2, args.kappa_max + 1)]
        rec += [m.pi[(1, k)] for k in range(2, args.kappa_max + 1)]
        rec += [m.a, m.b, m.tau_star, m.tau_star_scaled, m.n]
        table.append(rec)
    _write_table(args.out, header, table, args.json)
    return 0


# --------------------------------------------------------------------------
# activity
# --------------------------------------------------------------------------

def cmd_activity(args) -> int:
    from .activity import activity_ratios, quantile_groups

    with _stage("parse-ownership"):
        panel = ingest.parse_ownership(args.positions, args.volumes)
    if args.min_fund_usd is not None:
        with _stage("filter-funds"):
            panel = ingest.filter_small_funds(panel, args.min_fund_usd, scope=args.fund_scope)
    quarters = panel.quarters
    records: dict[tuple[str, int], object] = {}
    with _stage("activity-ratios"):
        for q in quarters[1:]:
            for asset in sorted({a for (a, qq) in panel.volumes if qq == q}):
                records[(asset, q)] = activity_ratios(panel, asset, q)
    with _stage("quantile-groups"):
        group_r: dict[tuple[str, int], int] = {}
        group_s: dict[tuple[str, int], int] = {}
        for q in quarters[1:]:
            here = {a: rec for (a, qq), rec in records.items() if qq == q}
            if not here:
                continue
            gr = quantile_groups({a: rec.R for a, rec in here.items()}, args.groups, quarter=q)
            gs = quantile_groups({a: rec.S for a, rec in here.items()}, args.groups, quarter=q)
            for a in here:
                group_r[(a, q)] = gr.groups[a]
                group_s[(a, q)] = gs.groups[a]
    header = ("asset", "quarter", "r", "R", "S", "group_R", "group_S")
    rows = [
        (a, q, rec.r, rec.R, rec.S, group_r[(a, q)], group_s[(a, q)])
        for (a, q), rec in sorted(records.items())
    ]
    _write_table(args.out, header, rows, args.json)
    return 0


# --------------------------------------------------------------------------
# classify
# --------------------------------------------------------------------------

_METRIC_COLUMNS = {
    "a": ("a",),
    "b": ("b",),
    "tau": ("tau_star",),
    "tau_scaled": ("tau_star_scaled",),
    "pi10": ("pi_neg10", "pi_pos10"),
}


def _read_metric(path, metric: str) -> list[tuple[str, int, float]]:
    """Pull (asset, window, value) for one metric out of a memory table."""
    needed = _METRIC_COLUMNS[metric]
    out = []
    dropped = 0
    with open(path, "r", encoding="utf-8") as fh:
        header = fh.readline().strip().split(",")
        try:
            cols = [header.index(c) for c in needed]
            asset_c, window_c = header.index("asset"), header.index("window")
        except ValueError:
            raise DataError(
                f"memory table lacks columns {needed} (header: {','.join(header)})"
            ) from None
        for line_no, line in enumerate(fh, start=2):
            line = line.strip()
            if not line:
                continue
            parts = line.split(",")
            if len(parts) != len(header):
                raise DataError(f"memory table line {line_no}: field count mismatch")
            try:
                vals = [float(parts[c]) for c in cols]
                window = int(parts[window_c])
            except ValueError as e:
                raise DataError(f"memory table line {line_no}: {e}") from None
            value = float(np.mean(vals))
            if not math.isfinite(value):
                dropped += 1
                continue
            out.append((parts[asset_c], window, value))
    if dropped:
        log.warning("dropped %d windows with non-finite %s", dropped, metric)
    if not out:
        raise DataError(f"no usable {metric} values in {path}")
    return out


def _read_groups(path, target: str, n_groups: int):
    """Recover per-quarter GroupAssignments from an activity table."""
    from .activity import GroupAssignment

    col = {"R": "group_R", "S": "group_S"}[target]
    per_quarter: dict[int, dict[str, int]] = {}
    with open(path, "r", encoding="utf-8") as fh:
        header = fh.readline().strip().split(",")
        try:
            gc = header.index(col)
            asset_c, quarter_c = header.index("asset"), header.index("quarter")
        except ValueError:
            raise DataError(f"activity table lacks column {col}") from None
        for line_no, line in enumerate(fh, start=2):
            line = line.strip()
            if not line:
                continue
            parts = line.split(",")
            try:
                q = int(parts[quarter_c])
                g = int(parts[gc])
            except (ValueError, IndexError) as e:
                raise DataError(f"activity table line {line_no}: {e}") from None
            per_quarter.setdefault(q, {})[parts[asset_c]] = g
    if not per_quarter:
        raise DataError(f"no group rows in {path}")
    return {
        q: GroupAssignment(quarter=q, groups=groups, n_groups=n_groups)
        for q, groups in per_quarter.items()
    }


def cmd_classify(args) -> int:
    with _stage("read-memory-table"):
        metric_rows = _read_metric(args.memory, args.metric)
    with _stage("read-activity-table"):
        assignments = _read_groups(args.activity, args.target, args.groups)
    with _stage("aggregate-windows"):
        per_quarter = pipeline.windows_to_quarters(metric_rows, args.windows_per_quarter)
    common = sorted(set(per_quarter) & set(assignments))
    if not common:
        raise DataError(
            f"no overlapping quarters: metrics cover {sorted(per_quarter)}, "
            f"activity covers {sorted(assignments)}"
        )
    scores = {q: per_quarter[q] for q in common}
    asg = {q: assignments[q] for q in common}
    with _stage("roc-auc"):
        oriented = {q: classify.oriented_scores(args.metric, s) for q, s in scores.items()}
        table = classify.auc_by_cut(oriented, asg)
        raw = classify.auc_by_cut(scores, asg)
    k_cuts = sorted(table) if args.k_cut is None else [args.k_cut]
    if args.k_cut is not None and args.k_cut not in table:
        raise DataError(f"k_cut {args.k_cut} outside 1..{args.groups - 1}")
    header = ["metric", "target", "k_cut", "auc_mean", "auc_raw_mean"]
    header += [f"auc_q{q}" for q in common]
    rows = []
    for k in k_cuts:
        cell = table[k]
        rows.append(
            [args.metric, args.target, k, cell.mean, raw[k].mean]
            + [cell.by_quarter[q] for q in common]
        )
    _write_table(args.out, header, rows, args.json)
    return 0


# --------------------------------------------------------------------------
# simulate
# --------------------------------------------------------------------------

def cmd_simulate(args) -> int:
    seed = _resolve_seed(args.seed)
    with _stage("simulate"):
        config = SimConfig(m=args.m, beta=args.beta, n=args.n, seed=seed, l_min=args.l_min)
        sim = simulate(config, asset_id=args.asset_id, include_log=args.emit != "signs")

    def write_signs(path):
        if str(path).endswith(".npy"):
            if args.json:
                raise UsageError("--json cannot apply to a .npy output")
            np.save(path, sim.signs.signs)
            return
        rows = [
            (args.asset_id, i + 1, int(s)) for i, s in enumerate(sim.signs.signs)
        ]
        _write_table(path, ("asset", "seq", "sign"), rows, args.json)

    def write_meta(path):
        logm = sim.metaorders
        rows = [
            (int(logm.start[i]), int(logm.length[i]), int(logm.sign[i]),
             int(logm.slot[i]), bool(logm.truncated[i]))
            for i in range(len(logm))
        ]
        _write_table(path, ("start", "length", "sign", "slot", "truncated"), rows, args.json)

    out = args.out
    if args.emit == "signs":
        write_signs(out)
    elif args.emit == "metaorders":
        write_meta(out)
    else:
        write_signs(out)
        meta_path = args.meta_out or str(Path(str(out)).with_suffix("")) + ".metaorders.csv"
        write_meta(meta_path)

    if out not in (None, "-"):
        sidecar = {
            "m": config.m,
            "beta": config.beta,
            "n": config.n,
            "seed": config.seed,
            "l_min": config.l_min,
            "rng": sim.rng_name,
        }
        Path(str(out) + ".meta.json").write_text(
            json.dumps(sidecar, sort_keys=True, indent=2) + "\n", encoding="utf-8"
        )
    return 0


# --------------------------------------------------------------------------
# panel
# --------------------------------------------------------------------------

def cmd_panel(args) -> int:
    seed = _resolve_seed(args.seed)
    try:
        levels = [int(x) for x in args.m_levels.split(",") if x.strip()]
    except ValueError:
        raise UsageError(f"--m-levels must be a comma-separated integer list, got {args.m_levels!r}") from None
    with _stage("synthetic-panel"):
        result = pipeline.synthetic_panel(
            args.assets,
            levels,
            args.beta,
            args.n,
            seed,
            n_groups=args.groups,
            kappa_max=args.kappa_max,
            tau_max=args.tau_max,
            threads=args.threads,
        )
    rows = [
        (metric, k_cut, result.auc[(metric, k_cut)], result.auc_raw[(metric, k_cut)])
        for metric in pipeline.METRIC_NAMES
        for k_cut in range(1, args.groups)
    ]
    _write_table(args.out, ("metric", "k_cut", "auc", "auc_raw"), rows, args.json)
    return 0


# --------------------------------------------------------------------------
# parser
# --------------------------------------------------------------------------

def _add_common(p) -> None:
    p.add_argument("--out", default=None, help="output file (default stdout)")
    p.add_argument("--json", action="store_true", help="emit JSON instead of a CSV table")
    p.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")


def build_parser() -> argparse.ArgumentParser:
    top = _Parser(prog="ordermem", description=__doc__,
                  formatter_class=argparse.RawDescriptionHelpFormatter)
    top.add_argument("--version", action="version", version=f"ordermem {__version__}")
    sub = top.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("signs", help="extract -1/+1 trade signs from a trades file")
    p.add_argument("--trades", required=True, help="trades CSV (asset,seq,price,bid,ask)")
    p.add_argument("--min-days", type=int, default=None,
                   help="asset filter: minimum trading days (needs day counts; "
                        "without them the two thresholds bound total trades)")
    p.add_argument("--min-trades-per-day", type=int, default=None,
                   help="asset filter: minimum average trades per day")
    _add_common(p)
    p.set_defaults(func=cmd_signs)

    p = sub.add_parser("memory", help="per-window memory metrics from a signs file")
    p.add_argument("--signs", required=True,
                   help="signs CSV (asset,seq,sign[,week]) or .npy array of -1/+1")
    p.add_argument("--asset-id", default=None, help="asset name for .npy input (default: file stem)")
    p.add_argument("--kappa-max", type=int, default=10, help="largest run window (default 10)")
    p.add_argument("--tau-max", type=int, default=1000, help="largest lag measured (default 1000)")
    p.add_argument("--fit-min", type=int, default=1, help="first lag of the power-law fit")
    p.add_argument("--fit-max", type=int, default=None,
                   help="last lag of the fit (default: min(tau_star, 1000))")
    p.add_argument("--window", choices=("trades", "week-column"), default="trades",
                   help="windowing policy (default: trades)")
    p.add_argument("--window-size", type=int, default=0,
                   help="signs per window; 0 = whole series (default 0)")
    p.add_argument("--pi-plus-one", action="store_true",
                   help="count kappa+1 signs per run window (alternative reading)")
    p.add_argument("--threads", type=int, default=1, help="worker threads (default 1)")
    _add_common(p)
    p.set_defaults(func=cmd_memory)

    p = sub.add_parser("activity", help="fund activity ratios and quantile groups")
    p.add_argument("--positions", required=True, help="positions CSV (fund,asset,quarter,position_usd)")
    p.add_argument("--volumes", required=True, help="volumes CSV (asset,quarter,volume_usd)")
    p.add_argument("--groups", type=int, default=20, help="number of quantile groups (default 20)")
    p.add_argument("--min-fund-usd", type=float, default=None,
                   help="drop funds below this invested-dollar threshold")
    p.add_argument("--fund-scope", choices=("portfolio", "per_security"), default="portfolio",
                   help="how the fund threshold applies (default portfolio)")
    _add_common(p)
    p.set_defaults(func=cmd_activity)

    p = sub.add_parser("classify", help="AUC of a memory metric against activity groups")
    p.add_argument("--memory", required=True, help="memory metrics table from the memory subcommand")
    p.add_argument("--activity", required=True, help="activity table from the activity subcommand")
    p.add_argument("--metric", choices=sorted(_METRIC_COLUMNS), required=True)
    p.add_argument("--target", choices=("R", "S"), default="R",
                   help="activity grouping to classify against (default R)")
    p.add_argument("--groups", type=int, default=20, help="group count used in the activity table")
    p.add_argument("--k-cut", type=int, default=None, help="single cut (default: all 1..G-1)")
    p.add_argument("--kcut-all", action="store_true", help="score every cut (the default)")
    p.add_argument("--windows-per-quarter", type=int, default=13,
                   help="memory windows per ownership quarter (default 13; 1 = identity)")
    _add_common(p)
    p.set_defaults(func=cmd_classify)

    p = sub.add_parser("simulate", help="meta-order splitting model ground truth")
    p.add_argument("--m", type=int, required=True, help="concurrent meta-order slots")
    p.add_argument("--beta", type=float, required=True, help="size-tail exponent (>1)")
    p.add_argument("--n", type=int, required=True, help="number of emitted signs")
    p.add_argument("--l-min", type=int, default=1, help="minimum meta-order size (default 1)")
    p.add_argument("--seed", type=int, default=None, help="rng seed (default ORDERMEM_SEED, then 0)")
    p.add_argument("--emit", choices=("signs", "metaorders", "both"), default="signs")
    p.add_argument("--asset-id", default="sim", help="asset name in the signs output (default sim)")
    p.add_argument("--meta-out", default=None,
                   help="meta-order log path for --emit both (default <out>.metaorders.csv)")
    _add_common(p)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("panel", help="synthetic asset panel scored at every group cut")
    p.add_argument("--assets", type=int, default=200, help="number of simulated assets (default 200)")
    p.add_argument("--m-levels", default="2,50",
                   help="comma list of participation levels, one block of assets each (default 2,50)")
    p.add_argument("--beta", type=float, default=1.5, help="size-tail exponent (default 1.5)")
    p.add_argument("--n", type=int, default=200_000, help="signs per asset (default 200000)")
    p.add_argument("--seed", type=int, default=None, help="rng seed (default ORDERMEM_SEED, then 0)")
    p.add_argument("--groups", type=int, default=20, help="quantile groups (default 20)")
    p.add_argument("--kappa-max", type=int, default=10)
    p.add_argument("--tau-max", type=int, default=2000)
    p.add_argument("--threads", type=int, default=1, help="worker threads (default 1)")
    _add_common(p)
    p.set_defaults(func=cmd_panel)

    return top


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
    except SystemExit as e:
        return int(e.code or 0)
    logging.basicConfig(
        stream=sys.stderr,
        level=logging.INFO if getattr(args, "verbose", False) else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s",
    )
    try:
        return int(args.func(args) or 0)
    except UsageError as e:
        print(f"ordermem {args.command}: usage error: {e}", file=sys.stderr)
        return 1
    except DataError as e:
        print(f"ordermem {args.command}: error: {e}", file=sys.stderr)
        return 2
    except Exception:
        traceback.print_exc()
        print(f"ordermem {args.command}: internal error", file=sys.stderr)
        return 3


def entry() -> None:
    sys.exit(main())


if __name__ == "__main__":
    entry()
