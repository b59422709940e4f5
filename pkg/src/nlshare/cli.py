"""Command-line front end: sweep, optimize, simulate, circuit."""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass
from pathlib import Path

from .montecarlo import estimate_chsh, run_trials
from .optimizer import optimize
from .photonic import full_network, verify
from .protocol import CLASSICAL_BOUND, ProtocolConfig, Scheme, chsh_pair

SWEEP_HEADER = ("G", "gamma", "delta", "I1", "I2", "min")


class CliError(Exception):
    pass


@dataclass(frozen=True)
class SweepRow:
    g: float
    gamma: float
    delta: float
    i1: float
    i2: float

    @property
    def min_value(self) -> float:
        return min(self.i1, self.i2)

    def csv_fields(self) -> list[str]:
        vals = (self.g, self.gamma, self.delta, self.i1, self.i2, self.min_value)
        return [f"{v:.10g}" for v in vals]


def grid(g_min: float, g_max: float, steps: int) -> list[float]:
    """Evenly spaced points with both endpoints hit exactly (no accumulated sums)."""
    if not (0.0 <= g_min < g_max <= 1.0):
        raise CliError(f"need 0 <= g-min < g-max <= 1, got {g_min} and {g_max}")
    if steps < 2:
        raise CliError(f"need steps >= 2, got {steps}")
    n = steps - 1
    return [g_min if i == 0 else g_max if i == n else (g_min * (n - i) + g_max * i) / n for i in range(steps)]


def sweep_row(g: float, scheme: str) -> SweepRow:
    if Scheme(scheme) is Scheme.ORIGINAL:
        cfg = ProtocolConfig.original(g)
        pair = chsh_pair(cfg)
        return SweepRow(g, cfg.gamma, cfg.delta, pair.i1, pair.i2)
    opt = optimize(g)
    return SweepRow(g, opt.gamma_star, opt.delta_star, opt.i1, opt.i2)


def sweep_rows(gs: list[float], scheme: str, jobs: int = 1) -> list[SweepRow]:
    gs = sorted(gs)
    if jobs > 1:
        with ProcessPoolExecutor(jobs) as pool:
            return list(pool.map(sweep_row, gs, [scheme] * len(gs)))
    return [sweep_row(g, scheme) for g in gs]


def write_sweep_csv(rows: list[SweepRow], fh) -> None:
    w = csv.writer(fh, lineterminator="\n")
    w.writerow(SWEEP_HEADER)
    for row in rows:
        w.writerow(row.csv_fields())


def read_sweep_csv(fh) -> list[dict[str, float]]:
    reader = csv.DictReader(fh)
    if tuple(reader.fieldnames or ()) != SWEEP_HEADER:
        raise ValueError(f"unexpected sweep header {reader.fieldnames}")
    return [{k: float(v) for k, v in row.items()} for row in reader]


def _check_g(g: float) -> float:
    if not (0.0 <= g <= 1.0) or math.isnan(g):
        raise CliError(f"G must lie in [0, 1], got {g}")
    return g


def _emit(text: str, out: str | None) -> None:
    if out is None or out == "-":
        sys.stdout.write(text)
        return
    try:
        Path(out).write_text(text)
    except OSError as exc:
        raise CliError(f"cannot write {out}: {exc}") from exc


def cmd_sweep(args) -> int:
    gs = [_check_g(g) for g in args.g] if args.g else grid(args.g_min, args.g_max, args.steps)
    rows = sweep_rows(gs, args.scheme, args.jobs)
    if args.format == "json":
        text = json.dumps([{**asdict(r), "min_value": r.min_value} for r in rows], indent=2) + "\n"
    else:
        buf = io.StringIO()
        write_sweep_csv(rows, buf)
        text = buf.getvalue()
    _emit(text, args.out)
    return 0


def cmd_optimize(args) -> int:
    opt = optimize(_check_g(args.g))
    report = opt.as_dict()
    if args.format == "json":
        text = json.dumps(report, indent=2) + "\n"
    else:
        text = "".join(f"{k:>12}: {v}\n" for k, v in report.items())
    _emit(text, args.out)
    return 0


def simulation_summary(g: float, scheme: str, shots: int, seed: int) -> tuple[dict, object]:
    if Scheme(scheme) is Scheme.ORIGINAL:
        cfg = ProtocolConfig.original(g)
    else:
        opt = optimize(g)
        cfg = ProtocolConfig(g, opt.gamma_star, opt.delta_star, Scheme.OPTIMAL)
    theory = chsh_pair(cfg)
    batch = run_trials(cfg, shots, seed)
    est = estimate_chsh(batch)
    s1, s2 = est.sigmas_above(CLASSICAL_BOUND)
    summary = {
        "g": g,
        "scheme": cfg.scheme.value,
        "gamma": cfg.gamma,
        "delta": cfg.delta,
        "i1_theory": theory.i1,
        "i2_theory": theory.i2,
        "i1_hat": est.i1_hat,
        "i1_se": est.i1_se,
        "i2_hat": est.i2_hat,
        "i2_se": est.i2_se,
        "i1_sigmas_above_bound": s1,
        "i2_sigmas_above_bound": s2,
        "classical_bound": CLASSICAL_BOUND,
        **batch.metadata(),
    }
    return summary, batch


def cmd_simulate(args) -> int:
    if args.shots < 1:
        raise CliError(f"shots must be >= 1, got {args.shots}")
    summary, batch = simulation_summary(_check_g(args.g), args.scheme, args.shots, args.seed)
    text = json.dumps(summary, indent=2) + "\n"
    if args.out and args.out != "-":
        out = Path(args.out)
        try:
            batch.to_csv(out)
            out.with_suffix(".summary.json").write_text(text)
        except OSError as exc:
            raise CliError(f"cannot write {out}: {exc}") from exc
    sys.stdout.write(text)
    return 0


def cmd_circuit(args) -> int:
    report = verify(args.theta, args.phi)
    if args.out:
        _emit(full_network(args.theta, args.phi).to_json() + "\n", args.out)
    if args.format == "json":
        sys.stdout.write(json.dumps(report, indent=2) + "\n")
    else:
        status = "PASS" if report["passed"] else "FAIL"
        sys.stdout.write(
            f"{status} theta={report['theta']:.6g} phi={report['phi']:.6g} "
            f"G={report['G']:.6g} max_distance={report['max_distance']:.3g} "
            f"swap={'ok' if report['swap']['passed'] else 'broken'}\n"
        )
    return 0 if report["passed"] else 1


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="nlshare", description=__doc__)
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("sweep", help="CHSH parameters over a grid of precision factors")
    s.add_argument("--g", type=float, action="append", help="explicit G value (repeatable)")
    s.add_argument("--g-min", type=float, default=0.0)
    s.add_argument("--g-max", type=float, default=1.0)
    s.add_argument("--steps", type=int, default=101)
    s.add_argument("--scheme", choices=[m.value for m in Scheme], default="optimal")
    s.add_argument("--format", choices=["csv", "json"], default="csv")
    s.add_argument("--jobs", type=int, default=1)
    s.add_argument("--out")
    s.set_defaults(func=cmd_sweep)

    o = sub.add_parser("optimize", help="max-min angles for one G")
    o.add_argument("--g", type=float, required=True)
    o.add_argument("--format", choices=["json", "text"], default="json")
    o.add_argument("--out")
    o.set_defaults(func=cmd_optimize)

    m = sub.add_parser("simulate", help="Monte Carlo run of the three-observer experiment")
    m.add_argument("--g", type=float, required=True)
    m.add_argument("--shots", type=int, default=1_000_000)
    m.add_argument("--seed", type=int, default=0)
    m.add_argument("--scheme", choices=[m_.value for m_ in Scheme], default="optimal")
    m.add_argument("--out", help="counts CSV; the summary goes next to it as .summary.json")
    m.set_defaults(func=cmd_simulate)

    c = sub.add_parser("circuit", help="verify the optical weak-measurement network")
    c.add_argument("--theta", type=float, required=True)
    c.add_argument("--phi", type=float, default=0.0)
    c.add_argument("--format", choices=["json", "text"], default="text")
    c.add_argument("--out", help="write the element list as JSON")
    c.set_defaults(func=cmd_circuit)
    return p


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (CliError, ValueError) as exc:
        print(f"nlshare {args.command}: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
