"""Command-line front end.

    fasura simulate --config setup.json --sweep-ebn0 -5:20:2.5 --trials 200 --out sweep.csv
    fasura gap-select --gamma 1 --draws 1000 --out gaps.csv
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
from datetime import datetime, timezone
from typing import Sequence

import numpy as np

from . import __version__
from .config import ConfigError, SystemConfig
from .ppce import gap_objective_curve
from .sim import ResultRow, run_monte_carlo

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_RUNTIME = 3

SEED_ENV = "FASURA_SEED"
GAP_COLUMNS = ("gap", "mean_objective", "selected")


class CliError(Exception):
    def __init__(self, message: str, code: int):
        super().__init__(message)
        self.code = code


def parse_sweep(text: str) -> list[float]:
    """``start:stop:step`` (inclusive), a comma list, or a single value."""
    text = text.strip()
    if ":" in text:
        parts = text.split(":")
        if len(parts) != 3:
            raise ConfigError("sweep-ebn0", f"expected start:stop:step, got {text!r}")
        start, stop, step = (float(p) for p in parts)
        if step == 0 or (stop - start) * step < 0:
            raise ConfigError("sweep-ebn0", f"step {step} never reaches {stop}")
        count = int(math.floor((stop - start) / step + 1e-9)) + 1
        return [round(start + i * step, 12) for i in range(count)]
    try:
        return [float(p) for p in text.split(",") if p.strip()]
    except ValueError:
        raise ConfigError("sweep-ebn0", f"cannot parse {text!r}") from None


def parse_overrides(pairs: Sequence[str]) -> dict[str, str]:
    out = {}
    for pair in pairs:
        key, sep, value = pair.partition("=")
        if not sep or not key.strip():
            raise ConfigError(pair, "override must look like key=value")
        out[key.strip()] = value.strip()
    return out


def load_config(path: str | None, overrides: dict[str, object]) -> SystemConfig:
    data: dict[str, object] = {}
    env_seed = os.environ.get(SEED_ENV)
    if env_seed is not None and env_seed.strip():
        data["seed"] = env_seed
    if path is not None:
        try:
            with open(path) as fh:
                loaded = json.load(fh)
        except FileNotFoundError:
            raise CliError(f"config file not found: {path}", EXIT_CONFIG) from None
        except (OSError, json.JSONDecodeError) as exc:
            raise CliError(f"cannot read config {path}: {exc}", EXIT_CONFIG) from None
        if not isinstance(loaded, dict):
            raise CliError(f"config {path} must hold a JSON object", EXIT_CONFIG)
        data.update(loaded)
    data.update(overrides)
    return SystemConfig.from_dict(data)


def _fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, bool):
        return str(int(value))
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return "nan" if math.isnan(value) else f"{float(value):.12g}"
    return str(value)


def manifest_lines(command: str, cfg: SystemConfig, extra: dict[str, object], stamp: bool) -> list[str]:
    lines = [
        f"# fasura {__version__}",
        f"# command: {command}",
        f"# seed: {cfg.seed}",
        "# config: " + json.dumps(cfg.to_dict(), sort_keys=True),
    ]
    for key, value in extra.items():
        lines.append(f"# {key}: {value}")
    if stamp:
        lines.append("# timestamp: " + datetime.now(timezone.utc).isoformat(timespec="seconds"))
    return lines


def render_csv(header: Sequence[str], rows: Sequence[Sequence], manifest: Sequence[str]) -> str:
    buf = io.StringIO()
    for line in manifest:
        buf.write(line + "\n")
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([_fmt(v) for v in row])
    return buf.getvalue()


def _emit(text: str, out: str | None) -> None:
    if out in (None, "-"):
        sys.stdout.write(text)
        return
    try:
        with open(out, "w", newline="") as fh:
            fh.write(text)
    except OSError as exc:
        raise CliError(f"cannot write {out}: {exc}", EXIT_RUNTIME) from None


def _flag_overrides(args: argparse.Namespace, names: Sequence[str]) -> dict[str, object]:
    out = {}
    for name in names:
        value = getattr(args, name, None)
        if value is not None:
            out[name] = value
    return out


def cmd_simulate(args: argparse.Namespace) -> int:
    overrides = parse_overrides(args.set or [])
    overrides.update(_flag_overrides(args, ("mode", "gap", "gamma", "seed", "ebn0_db")))
    if args.ka_known:
        overrides["ka_known"] = True
    cfg = load_config(args.config, overrides)
    if args.dump_config:
        _emit(json.dumps(cfg.to_dict(), indent=2, sort_keys=True) + "\n", args.out)
        return EXIT_OK
    sweep = parse_sweep(args.sweep_ebn0) if args.sweep_ebn0 else [cfg.ebn0_db]
    if args.trials < 1:
        raise ConfigError("trials", "must be >= 1")
    if args.jobs < 1:
        raise ConfigError("jobs", "must be >= 1")

    rows: list[ResultRow] = run_monte_carlo(cfg, sweep, args.trials, args.jobs)
    for r in rows:
        print(
            f"[{r.mode}] Eb/N0={r.ebn0_db:g} dB  sigma2={r.sigma2:.4g}  MD={r.ad_md_rate:.4f}  "
            f"FA={r.ad_fa_rate:.4f}  NMSE={r.ch_nmse:.4g}  refined={r.ch_nmse_refined:.4g}  "
            f"AoA={r.aoa_nmse:.4g}  excluded={r.excluded_trials}",
            file=sys.stderr,
        )
    extra = {
        "overrides": " ".join(f"{k}={v}" for k, v in overrides.items()) or "none",
        "sweep_ebn0": json.dumps(sweep),
        "trials": args.trials,
        "output": args.out or "-",
    }
    manifest = manifest_lines("simulate", cfg, extra, args.timestamp)
    _emit(render_csv(ResultRow.CSV_COLUMNS, [r.csv_values() for r in rows], manifest), args.out)
    return EXIT_OK


def cmd_gap_select(args: argparse.Namespace) -> int:
    overrides = parse_overrides(args.set or [])
    overrides.update(_flag_overrides(args, ("gamma", "seed")))
    overrides.setdefault("mode", "ppce")
    cfg = load_config(args.config, overrides)
    if args.draws < 1:
        raise ConfigError("draws", "must be >= 1")
    rng = np.random.default_rng(np.random.SeedSequence(cfg.seed))
    gaps, means = gap_objective_curve(cfg, cfg.gamma, args.draws, rng)
    best = gaps[int(np.argmin(means))]
    print(f"selected gap {best} over {gaps[0]}..{gaps[-1]} (gamma={cfg.gamma:g})", file=sys.stderr)
    extra = {
        "overrides": " ".join(f"{k}={v}" for k, v in overrides.items()) or "none",
        "draws": args.draws,
        "selected_gap": best,
        "output": args.out or "-",
    }
    manifest = manifest_lines("gap-select", cfg, extra, args.timestamp)
    rows = [(g, m, int(g == best)) for g, m in zip(gaps, means)]
    _emit(render_csv(GAP_COLUMNS, rows, manifest), args.out)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="fasura", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p: argparse.ArgumentParser):
        p.add_argument("--config", help="JSON file with SystemConfig fields")
        p.add_argument("--set", action="append", metavar="KEY=VALUE", help="override one config field")
        p.add_argument("--seed", type=int)
        p.add_argument("--gamma", type=float)
        p.add_argument("--out", help="output CSV path (default stdout)")
        p.add_argument("--timestamp", action="store_true", help="record wall-clock time in the manifest")

    sim = sub.add_parser("simulate", help="Monte Carlo sweep over Eb/N0")
    common(sim)
    sim.add_argument("--mode", choices=("apce", "ppce", "ula"))
    sim.add_argument("--gap", type=int)
    sim.add_argument("--ebn0", dest="ebn0_db", type=float, help="single operating point")
    sim.add_argument("--ka-known", action="store_true")
    sim.add_argument("--sweep-ebn0", help="start:stop:step, comma list, or value (dB)")
    sim.add_argument("--trials", type=int, default=200)
    sim.add_argument("--jobs", type=int, default=1)
    sim.add_argument("--dump-config", action="store_true", help="print the resolved config and exit")
    sim.set_defaults(func=cmd_simulate)

    gap = sub.add_parser("gap-select", help="exhaustive index-gap search for PP-CE")
    common(gap)
    gap.add_argument("--draws", type=int, default=1000)
    gap.set_defaults(func=cmd_gap_select)
    return parser


def _glue_negative_values(argv: list[str]) -> list[str]:
    # argparse would read "-5:20:2.5" as an option flag.
    out: list[str] = []
    i = 0
    while i < len(argv):
        arg = argv[i]
        if arg in ("--sweep-ebn0", "--ebn0", "--gamma") and i + 1 < len(argv) and argv[i + 1].startswith("-"):
            out.append(f"{arg}={argv[i + 1]}")
            i += 2
            continue
        out.append(arg)
        i += 1
    return out


def main(argv: Sequence[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        args = parser.parse_args(_glue_negative_values(argv))
    except SystemExit as exc:
        return int(exc.code) if isinstance(exc.code, int) else EXIT_CONFIG
    try:
        return args.func(args)
    except CliError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.code
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except Exception as exc:  # noqa: BLE001
        print(f"runtime error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
