"""Command line interface: reproducible experiments and the verification gate.

Subcommands: codebook, sweep, simulate, example, verify.  Every output file
echoes its full configuration (and the tool version) so a run can be
reproduced from the file alone.  Defaults: slots=1000000, seed=42,
epsilon=1e-10, max-minislots=64.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys

from . import __version__
from .channels import make_channel
from .codebook import DEFAULT_MAX_ENTRIES, build_codebook
from .engine import DEFAULT_MAX_MINISLOTS, BatchStats, run_batch
from .oracles import discrete_exact_delay
from .strategies import STRATEGY_NAMES, make_strategy
from .verification import DEFAULT_SEED, DEFAULT_SLOTS, run_all, run_criterion

__all__ = ["main"]


def _config_lines(config: dict) -> list[str]:
    return [f"# {k}={v}" for k, v in config.items()]


def _emit(text: str, out: str | None) -> None:
    if out:
        with open(out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _csv_text(config: dict, fieldnames: list[str], rows: list[list]) -> str:
    buf = io.StringIO()
    for line in _config_lines(config):
        buf.write(line + "\n")
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(fieldnames)
    writer.writerows(rows)
    return buf.getvalue()


def _json_text(config: dict, payload: dict) -> str:
    return json.dumps({"config": config, **payload}, indent=2) + "\n"


def _base_config(args, command: str) -> dict:
    cfg = {"tool": "osplit", "version": __version__, "command": command}
    for key in ("n_users", "epsilon", "slots", "seed", "max_minislots", "strategy",
                "channel", "channel_eps", "name", "n_min", "n_max", "max_entries"):
        if hasattr(args, key):
            cfg[key] = getattr(args, key)
    return cfg


def cmd_codebook(args) -> int:
    cb = build_codebook(
        args.n_users,
        args.epsilon,
        max_entries=args.max_entries,
        split_fraction=args.split_fraction,
    )
    config = _base_config(args, "codebook")
    data = cb.to_dict()
    if args.format == "json":
        entries = data.pop("entries")
        text = _json_text(config, {"header": data, "entries": entries})
    else:
        config.update({k: v for k, v in data.items() if k != "entries"})
        rows = [
            [e["threshold"], e["codeword"], e["probability"], e["depth"]]
            for e in data["entries"]
        ]
        text = _csv_text(config, ["threshold", "codeword", "probability", "depth"], rows)
    _emit(text, args.out)
    print(
        f"codebook N={args.n_users}: {len(cb.entries)} entries, "
        f"entropy {cb.entropy():.6f} bits, expected delay {cb.expected_delay():.6f} "
        f"(residual {cb.spectrum_residual:.2e})",
        file=sys.stderr,
    )
    return 0


def cmd_sweep(args) -> int:
    if not (2 <= args.n_min <= args.n_max):
        raise SystemExit("need 2 <= n-min <= n-max")
    rows = []
    for n in range(args.n_min, args.n_max + 1):
        ch = make_channel("iid", n)
        osa = run_batch(ch, "osa", args.slots, args.max_minislots, args.seed)
        mpa = run_batch(ch, "mpa", args.slots, args.max_minislots, args.seed)
        cb = build_codebook(n, args.epsilon)
        rows.append(
            {
                "n_users": n,
                "osa_delay_sim": osa.mean_delay_charged,
                "mpa_delay_sim": mpa.mean_delay_charged,
                "mpa_delay_exact": cb.expected_delay(),
                "mpa_entropy_bits": cb.entropy(),
            }
        )
        print(
            f"N={n}: splitter {osa.mean_delay_charged:.4f}  greedy {mpa.mean_delay_charged:.4f}"
            f"  exact {cb.expected_delay():.4f}  entropy {cb.entropy():.4f}",
            file=sys.stderr,
        )
    config = _base_config(args, "sweep")
    fieldnames = ["n_users", "osa_delay_sim", "mpa_delay_sim", "mpa_delay_exact", "mpa_entropy_bits"]
    text = _csv_text(config, fieldnames, [[r[k] for k in fieldnames] for r in rows])
    _emit(text, args.out)
    if args.plot:
        from .plots import render_sweep_figure

        render_sweep_figure(rows, args.plot)
        print(f"figure written to {args.plot}", file=sys.stderr)
    return 0


def cmd_simulate(args) -> int:
    ch = make_channel(args.channel, args.n_users, args.channel_eps)
    if args.trace_out:
        stats, traces = run_batch(
            ch, args.strategy, args.slots, args.max_minislots, args.seed,
            collect_traces=True,
        )
        with open(args.trace_out, "w") as fh:
            for t in traces:
                fh.write(json.dumps(t.to_dict()) + "\n")
        print(f"{len(traces)} traces written to {args.trace_out}", file=sys.stderr)
    else:
        stats = run_batch(ch, args.strategy, args.slots, args.max_minislots, args.seed)
    config = _base_config(args, "simulate")
    row = stats.csv_row(ch.n_users, ch.describe(), args.strategy, args.max_minislots)
    text = _csv_text(config, list(BatchStats.CSV_FIELDS), [row])
    _emit(text, args.out)
    print(
        f"{ch.describe()} / {args.strategy}: delay {stats.mean_delay_charged:.4f} "
        f"(conditional {stats.mean_delay_conditional:.4f}), success {stats.success_rate:.4f}, "
        f"entropy {stats.empirical_entropy_bits:.4f} bits",
        file=sys.stderr,
    )
    return 0


def cmd_example(args) -> int:
    config = _base_config(args, "example")
    violations = 0
    if args.name == "constant3":
        ch = make_channel("constant", 3)
        stats = {
            name: run_batch(ch, name, args.slots, args.max_minislots, args.seed)
            for name in ("osa", "two-sided")
        }
        ordered = (
            stats["two-sided"].empirical_entropy_bits < stats["osa"].empirical_entropy_bits
        )
        if not ordered:
            violations += 1
        payload = {
            name: {
                "mean_delay_conditional": s.mean_delay_conditional,
                "mean_delay_charged": s.mean_delay_charged,
                "success_rate": s.success_rate,
                "empirical_entropy_bits": s.empirical_entropy_bits,
            }
            for name, s in stats.items()
        }
        if args.format == "json":
            text = _json_text(config, {"stats": payload, "entropy_strictly_smaller": ordered})
        else:
            rows = [
                [name, s.mean_delay_conditional, s.mean_delay_charged, s.success_rate,
                 s.empirical_entropy_bits]
                for name, s in stats.items()
            ]
            text = _csv_text(
                config,
                ["strategy", "mean_delay_conditional", "mean_delay_charged",
                 "success_rate", "empirical_entropy_bits"],
                rows,
            )
        _emit(text, args.out)
        print(
            f"one-sided delay {stats['osa'].mean_delay_charged:.4f} "
            f"(entropy {stats['osa'].empirical_entropy_bits:.4f}); "
            f"two-sided delay {stats['two-sided'].mean_delay_charged:.4f} "
            f"(entropy {stats['two-sided'].empirical_entropy_bits:.4f}); "
            f"entropy strictly smaller: {'OK' if ordered else 'VIOLATION'}",
            file=sys.stderr,
        )
        if args.plot:
            from .plots import render_example_figure

            render_example_figure("constant3", payload, args.plot)
            print(f"figure written to {args.plot}", file=sys.stderr)
    else:
        ch = make_channel("correlated", eps=args.channel_eps)
        reports = {
            name: discrete_exact_delay(ch, make_strategy(name, channel=ch))
            for name in ("discrete-mpa", "discrete-bisect")
        }
        ref = 27.0 / 7.0
        better = reports["discrete-bisect"].expected_delay < reports["discrete-mpa"].expected_delay
        if not better:
            violations += 1
        depth_payload = {
            name: rep.depths_by_state_desc() for name, rep in reports.items()
        }
        if args.format == "json":
            text = _json_text(
                config,
                {
                    "expected_delay": {k: r.expected_delay for k, r in reports.items()},
                    "per_state_depth": {
                        k: [[list(s), d] for s, d in v] for k, v in depth_payload.items()
                    },
                    "reference_27_over_7": ref,
                    "reference_log2_states": math.log2(len(ch.states)),
                },
            )
        else:
            rows = []
            for name, rep in reports.items():
                for state, depth in rep.depths_by_state_desc():
                    rows.append([name, state, depth, rep.expected_delay])
            text = _csv_text(
                config, ["strategy", "state", "depth", "expected_delay"], rows
            )
        _emit(text, args.out)
        print(
            f"greedy expected delay {reports['discrete-mpa'].expected_delay:.6f} "
            f"(27/7 = {ref:.6f}); bisection {reports['discrete-bisect'].expected_delay:.6f} "
            f"(log2(7) = {math.log2(7):.6f}); bisection better: {'OK' if better else 'VIOLATION'}",
            file=sys.stderr,
        )
        if args.plot:
            from .plots import render_example_figure

            render_example_figure("correlated", depth_payload, args.plot)
            print(f"figure written to {args.plot}", file=sys.stderr)
    return 1 if violations else 0


def cmd_verify(args) -> int:
    if args.criteria:
        numbers = sorted(int(c) for c in args.criteria.split(","))
        results = [run_criterion(n, seed=args.seed, slots=args.slots) for n in numbers]
    else:
        results = run_all(seed=args.seed, slots=args.slots)
    failures = 0
    for r in results:
        print(r.summary_line())
        for line in r.failure_lines():
            print(line)
        if not r.passed:
            failures += 1
    print(f"{len(results) - failures}/{len(results)} criteria passed")
    return 1 if failures else 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="osplit",
        description=__doc__,
        formatter_class=argparse.ArgumentDefaultsHelpFormatter,
    )
    parser.add_argument("--version", action="version", version=f"osplit {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, slots=True):
        if slots:
            p.add_argument("--slots", type=int, default=DEFAULT_SLOTS, help="slots per batch")
        p.add_argument("--seed", type=int, default=DEFAULT_SEED, help="master RNG seed")
        p.add_argument("--max-minislots", dest="max_minislots", type=int,
                       default=DEFAULT_MAX_MINISLOTS, help="minislot budget K per slot")
        p.add_argument("--out", help="output file (stdout when omitted)")
        p.add_argument("--format", choices=("csv", "json"), default="csv", help="output format")

    p = sub.add_parser("codebook", help="build and export a threshold codebook",
                       formatter_class=argparse.ArgumentDefaultsHelpFormatter)
    p.add_argument("--n-users", dest="n_users", type=int, default=2)
    p.add_argument("--epsilon", type=float, default=1e-10, help="residual-mass cutoff")
    p.add_argument("--max-entries", dest="max_entries", type=int, default=DEFAULT_MAX_ENTRIES,
                   help="cap on materialized entries")
    p.add_argument("--split-fraction", dest="split_fraction", type=float, default=None,
                   help="fixed relative split position (2 users; 0.5 = greedy)")
    p.add_argument("--out", help="output file (stdout when omitted)")
    p.add_argument("--format", choices=("csv", "json"), default="json")
    p.set_defaults(func=cmd_codebook)

    p = sub.add_parser("sweep", help="delay/entropy versus number of users",
                       formatter_class=argparse.ArgumentDefaultsHelpFormatter)
    p.add_argument("--n-min", dest="n_min", type=int, default=2)
    p.add_argument("--n-max", dest="n_max", type=int, default=16)
    p.add_argument("--epsilon", type=float, default=1e-10)
    p.add_argument("--plot", help="also render the curves to this image file")
    common(p)
    p.set_defaults(func=cmd_sweep, format="csv")

    p = sub.add_parser("simulate", help="run one channel/strategy batch",
                       formatter_class=argparse.ArgumentDefaultsHelpFormatter)
    p.add_argument("--channel", choices=("iid", "constant", "correlated"), default="iid")
    p.add_argument("--n-users", dest="n_users", type=int, default=2)
    p.add_argument("--channel-eps", dest="channel_eps", type=float, default=0.0,
                   help="state-probability tilt for the correlated channel")
    p.add_argument("--strategy", choices=STRATEGY_NAMES, default="osa")
    p.add_argument("--trace-out", dest="trace_out",
                   help="write per-slot traces as JSON lines (forces the generic loop)")
    common(p)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("example", help="run a named worked example",
                       formatter_class=argparse.ArgumentDefaultsHelpFormatter)
    p.add_argument("name", choices=("constant3", "correlated"))
    p.add_argument("--channel-eps", dest="channel_eps", type=float, default=1e-6)
    p.add_argument("--plot", help="also render a figure to this image file")
    common(p)
    p.set_defaults(func=cmd_example)

    p = sub.add_parser("verify", help="run the acceptance-criteria suite",
                       formatter_class=argparse.ArgumentDefaultsHelpFormatter)
    p.add_argument("--slots", type=int, default=DEFAULT_SLOTS)
    p.add_argument("--seed", type=int, default=DEFAULT_SEED)
    p.add_argument("--criteria", help="comma-separated criterion numbers (default: all)")
    p.set_defaults(func=cmd_verify)

    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
