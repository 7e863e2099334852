"""Command-line front end: figure data as CSV, measures and self-checks.

Examples::

    weylchan spectrum --d 3 --alpha 0.5 --p-base 0.3 --grid 0.3:1:0.01
    weylchan rates --alpha 0.8 --format table
    weylchan measures --d 3 --measure all --grid 0:1:0.1 --out measures.csv
    weylchan distance --alpha 0.4 --pair 1:0:1
    weylchan verify
"""

from __future__ import annotations

import argparse
import configparser
import io
import math
import sys
import warnings
from dataclasses import dataclass, fields
from typing import Sequence

import numpy as np

from . import __version__, linalg, measures, mubs, reps, verify
from .channel import SINGULAR_TOL, ChannelParams, SingularPointError, g_func
from .reps import ConditioningWarning, IntermediateSpec

COMMANDS = ("spectrum", "rates", "measures", "distance", "verify")
DEFAULT_GRIDS = {
    "spectrum": None,  # p_base:1:0.01
    "rates": "0:1:0.01",
    "measures": "0:1:0.1",
    "distance": "0:1:0.01",
    "verify": None,
}
CONFIG_KEYS = {
    "d": int,
    "alpha": float,
    "p_base": float,
    "grid": str,
    "pair": str,
    "measure": str,
    "out": str,
    "format": str,
}
MEASURES = ("hcla", "blp", "rhp", "all")
FORMATS = ("csv", "table")


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class RunConfig:
    command: str
    d: int = 3
    alpha: float = 0.5
    p_base: float = 0.0
    grid: str | None = None
    pair: str = "1:0:1"
    measure: str = "all"
    out: str | None = None
    format: str = "csv"

    def echo(self) -> str:
        parts = [f"{f.name}={getattr(self, f.name)}" for f in fields(self) if f.name != "out"]
        return " ".join(parts)


def parse_grid(text: str) -> np.ndarray:
    """``start:end:step`` inside [0, 1] to an inclusive array of points."""
    try:
        start, end, step = (float(x) for x in text.split(":"))
    except ValueError:
        raise ConfigError(f"grid must look like start:end:step, got {text!r}") from None
    if step <= 0.0:
        raise ConfigError(f"grid step must be positive, got {step}")
    if not 0.0 <= start <= end <= 1.0:
        raise ConfigError(f"grid must satisfy 0 <= start <= end <= 1, got {text!r}")
    n = int(math.floor((end - start) / step + 1e-9))
    pts = start + step * np.arange(n + 1)
    # snap away float noise so 0:1:0.1 ends exactly on 1
    return np.round(np.minimum(pts, end), 12)


def read_config_file(path: str) -> dict:
    """``key = value`` lines (``#`` comments) into typed config values."""
    parser = configparser.ConfigParser(inline_comment_prefixes=("#",))
    with open(path, encoding="utf-8") as fh:
        parser.read_string("[run]\n" + fh.read())
    out = {}
    for key, raw in parser["run"].items():
        name = key.replace("-", "_")
        if name not in CONFIG_KEYS:
            raise ConfigError(f"unknown config key {key!r} in {path}")
        try:
            out[name] = CONFIG_KEYS[name](raw)
        except ValueError:
            raise ConfigError(f"bad value {raw!r} for {key!r} in {path}") from None
    return out


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="weylchan", description="Perturbed Weyl channel toolkit: figure data and checks."
    )
    parser.add_argument("--version", action="version", version=f"weylchan {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    helps = {
        "spectrum": "intermediate Choi eigenvalues along p*",
        "rates": "decoherence rate and its normalized form along p",
        "measures": "HCLA, BLP and RHP measures along an alpha grid",
        "distance": "trace distance of an evolved MUB pair along p",
        "verify": "run the self-check suites",
    }
    for name in COMMANDS:
        p = sub.add_parser(name, help=helps[name])
        p.add_argument("--config", help="key=value file; flags override it")
        p.add_argument("--d", type=int, help="dimension (default 3; max random dimension for verify)")
        p.add_argument("--alpha", type=float, help="perturbation strength in [0, 1] (default 0.5)")
        p.add_argument("--p-base", dest="p_base", type=float, help="base point p of the intermediate map")
        p.add_argument("--grid", help="start:end:step (p grid, or alpha grid for measures)")
        p.add_argument("--pair", help="MUB pair BASIS:I:J (default 1:0:1)")
        p.add_argument("--measure", choices=MEASURES, help="which measures to compute")
        p.add_argument("--out", help="output path (default stdout)")
        p.add_argument("--format", choices=FORMATS, help="csv (default) or table")
    return parser


def resolve_config(args: argparse.Namespace) -> RunConfig:
    values = read_config_file(args.config) if args.config else {}
    for key in CONFIG_KEYS:
        flag = getattr(args, key, None)
        if flag is not None:
            values[key] = flag
    cfg = RunConfig(command=args.command, **values)
    if cfg.command == "verify":
        if "d" not in values:
            cfg = RunConfig(**{**cfg.__dict__, "d": 6})
        if cfg.d < 2:
            raise ConfigError(f"dimension must be >= 2, got {cfg.d}")
        return cfg
    try:
        ChannelParams(cfg.d, cfg.alpha)
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    if cfg.measure not in MEASURES:
        raise ConfigError(f"measure must be one of {MEASURES}, got {cfg.measure!r}")
    if cfg.format not in FORMATS:
        raise ConfigError(f"format must be one of {FORMATS}, got {cfg.format!r}")
    if not 0.0 <= cfg.p_base <= 1.0:
        raise ConfigError(f"p-base must lie in [0, 1], got {cfg.p_base}")
    if cfg.grid is None:
        default = DEFAULT_GRIDS[cfg.command] or f"{cfg.p_base}:1:0.01"
        cfg = RunConfig(**{**cfg.__dict__, "grid": default})
    parse_grid(cfg.grid)
    return cfg


# -- row producers -------------------------------------------------------------


def fmt(x) -> str:
    if isinstance(x, (bool, np.bool_)):
        return "1" if x else "0"
    if isinstance(x, str):
        return x
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    x = float(x)
    if math.isnan(x):
        return "nan"
    return format(x, ".17g")


def cmd_spectrum(cfg: RunConfig) -> tuple[list[str], list[list]]:
    params = ChannelParams(cfg.d, cfg.alpha)
    grid = parse_grid(cfg.grid)
    if grid[0] < cfg.p_base:
        raise ConfigError(f"spectrum grid must start at or after p-base={cfg.p_base}")
    header = ["p_star"] + [f"lambda_{j}" for j in range(cfg.d)] + ["min_eig", "oracle_dev", "singular_base"]
    singular = abs(g_func(params, cfg.p_base)) <= SINGULAR_TOL
    rows = []
    for p_star in grid:
        if singular:
            rows.append([p_star] + [math.nan] * (cfg.d + 2) + [True])
            continue
        spec = IntermediateSpec(params, cfg.p_base, float(p_star))
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", ConditioningWarning)
            lam = reps.intermediate_eigenvalues(spec)
            full = reps.intermediate_eigs(spec).eigenvalues
            oracle = reps.intermediate_choi_superop(spec).spectrum().eigenvalues
        dev = float(np.max(np.abs(full - oracle)))
        rows.append([p_star, *lam, float(np.min(full)), dev, False])
    return header, rows


def _gamma_oracle(params: ChannelParams, p: float, h: float = 1e-6) -> float:
    """γ = d/dp[-(1/d) ln|G|], by finite differences (one-sided at the ends)."""

    def f(x):
        return -math.log(abs(g_func(params, x))) / params.d

    if p - h < 0.0:
        return (-3.0 * f(p) + 4.0 * f(p + h) - f(p + 2 * h)) / (2.0 * h)
    if p + h > 1.0:
        return (3.0 * f(p) - 4.0 * f(p - h) + f(p - 2 * h)) / (2.0 * h)
    return (f(p + h) - f(p - h)) / (2.0 * h)


def cmd_rates(cfg: RunConfig) -> tuple[list[str], list[list]]:
    params = ChannelParams(cfg.d, cfg.alpha)
    header = ["p", "gamma", "gamma_normalized", "gamma_oracle", "singular"]
    rows = []
    for p in parse_grid(cfg.grid):
        p = float(p)
        try:
            norm = measures.gamma_normalized(params, p)
        except SingularPointError:
            norm = math.nan
        # the stencil must not straddle the singular point
        near = abs(g_func(params, p)) <= 1e-5
        if near:
            rows.append([p, math.nan, norm, math.nan, True])
            continue
        rows.append([p, measures.decoherence_rate(params, p), norm, _gamma_oracle(params, p), False])
    return header, rows


def cmd_measures(cfg: RunConfig) -> tuple[list[str], list[list]]:
    want = {"hcla", "blp", "rhp"} if cfg.measure == "all" else {cfg.measure}
    header = ["alpha"]
    if "hcla" in want:
        header += ["hcla_closed", "hcla_numeric"]
    if "blp" in want:
        header += ["blp_closed", "blp_numeric", "blp_pair"]
    if "rhp" in want:
        header += ["rhp", "rhp_delta_sensitivity"]
    rows = []
    for alpha in parse_grid(cfg.grid):
        params = ChannelParams(cfg.d, float(alpha))
        row = [alpha]
        if "hcla" in want:
            res = measures.hcla_measure(params)
            row += [res.closed_form, res.numeric]
        if "blp" in want:
            res = measures.blp_measure(params)
            row += [res.closed_form, res.numeric, res.basis_pair_id]
        if "rhp" in want:
            res = reps.rhp_integral(params)
            row += [res.value, res.delta_sensitivity]
        rows.append(row)
    return header, rows


def cmd_distance(cfg: RunConfig) -> tuple[list[str], list[list]]:
    params = ChannelParams(cfg.d, cfg.alpha)
    fam = mubs.mub_family(cfg.d)
    try:
        pair = mubs.check_pair(fam, mubs.parse_pair(cfg.pair))
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    b, i, j = pair
    rho1 = linalg.pure_state(fam.vector(b, i))
    rho2 = linalg.pure_state(fam.vector(b, j))
    grid = parse_grid(cfg.grid)
    numeric = measures.evolved_distances(
        params, np.repeat(rho1[None], len(grid), 0), np.repeat(rho2[None], len(grid), 0), grid
    )
    header = ["p", "D_closed", "D_numeric", "abs_dev"]
    rows = []
    for p, dn in zip(grid, numeric):
        dc = measures.blp_trace_distance(params, float(p), pair, fam)
        rows.append([p, dc, dn, abs(dc - dn)])
    return header, rows


PRODUCERS = {
    "spectrum": cmd_spectrum,
    "rates": cmd_rates,
    "measures": cmd_measures,
    "distance": cmd_distance,
}


def render(
    cfg: RunConfig, header: Sequence[str], rows: Sequence[Sequence], notes: Sequence[str] = ()
) -> str:
    cells = [[fmt(x) for x in row] for row in rows]
    buf = io.StringIO()
    if cfg.format == "csv":
        buf.write(f"# weylchan {__version__} {cfg.echo()}\n")
        for note in notes:
            buf.write(f"# {note}\n")
        buf.write(",".join(header) + "\n")
        for row in cells:
            buf.write(",".join(row) + "\n")
        return buf.getvalue()
    widths = [max(len(h), *(len(r[k]) for r in cells)) if cells else len(h) for k, h in enumerate(header)]
    buf.write("  ".join(h.rjust(w) for h, w in zip(header, widths)) + "\n")
    for row in cells:
        buf.write("  ".join(c.rjust(w) for c, w in zip(row, widths)) + "\n")
    return buf.getvalue()


def emit(cfg: RunConfig, text: str) -> None:
    if cfg.out:
        with open(cfg.out, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def run_verify(cfg: RunConfig) -> int:
    results = verify.run_all(max_d=cfg.d)
    header = ["suite", "status", "worst", "detail"]
    rows = [[r.name, "pass" if r.passed else "FAIL", r.worst, r.detail] for r in results]
    emit(cfg, render(cfg, header, rows))
    # timings vary run to run, so they stay out of the (deterministic) output
    for r in results:
        print(f"{r.name}: {r.seconds:.2f} s", file=sys.stderr)
    return 0 if all(r.passed for r in results) else 1


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = resolve_config(args)
        if cfg.command == "verify":
            return run_verify(cfg)
        header, rows = PRODUCERS[cfg.command](cfg)
    except (ConfigError, OSError) as exc:
        print(f"weylchan: error: {exc}", file=sys.stderr)
        return 2
    notes = []
    if "rhp" in header:
        notes.append(f"rhp: {reps.RhpResult.note}, delta={reps.RHP_DELTA:g}")
    emit(cfg, render(cfg, header, rows, notes))
    return 0


if __name__ == "__main__":
    sys.exit(main())
