"""Command-line front end: config parsing, scenario presets, report files.

Usage::

    twosolve solve --config run.cfg [--preset NAME] [--out DIR] [--seed N]
                   [--theta X] [--p X] [--lambda X] [--mu-scan LO:HI:N]

The config is plain ``key = value`` text with ``#`` comments; see
``CONFIG_KEYS`` for the accepted keys and their defaults.
"""

from __future__ import annotations

import argparse
import csv
import io
import logging
import sys
from dataclasses import dataclass, fields, replace
from pathlib import Path

import numpy as np

from . import spectral
from .errors import ConfigError, RegimeError, TwoSolveError
from .functional import ProblemSpec
from .grid import Grid, build_grid, norm_h10, read_field, write_field
from .solvers import SolveOptions, SolveReport, solve_two

log = logging.getLogger(__name__)

__all__ = [
    "RunConfig",
    "parse_config",
    "preset",
    "run_scenario",
    "report_rows",
    "read_report_csv",
    "mu_scan",
    "main",
    "PRESETS",
]

PRESETS = ("paper-regime", "coercive", "czero", "gate-fail", "custom")


# --- configuration ----------------------------------------------------------

@dataclass(frozen=True)
class RunConfig:
    preset: str
    dimension: int = 2
    nodes: tuple = (64, 64)
    extent: tuple = (1.0, 1.0)
    amplitude: float = 20.0
    mu: float | None = None
    mu_factor: float | None = None
    c_file: str | None = None
    f_file: str | None = None
    theta: float = 0.5
    p: float = 1.5
    lam: float | None = None
    lam_start: float = 1.0
    lam_cap: float = 1e12
    probes: int = 64
    seed: int = 0
    maxiter: int = 20_000
    restarts: int = 10
    out: str = "out"


def _positive(conv):
    def check(text):
        value = conv(text)
        if not value > 0:
            raise ValueError(f"must be positive, got {text}")
        return value
    return check


def _optional(conv):
    def check(text):
        return None if text.lower() in ("auto", "none") else conv(text)
    return check


def _tuple_of(conv):
    def check(text):
        return tuple(conv(tok) for tok in text.replace(",", " ").split())
    return check


def _choice(text):
    if text not in PRESETS:
        raise ValueError(f"unknown preset {text!r}; choose from {', '.join(PRESETS)}")
    return text


# config key -> (RunConfig field, parser)
CONFIG_KEYS = {
    "preset": ("preset", _choice),
    "dimension": ("dimension", int),
    "nodes": ("nodes", _tuple_of(int)),
    "extent": ("extent", _tuple_of(float)),
    "amplitude": ("amplitude", _positive(float)),
    "mu": ("mu", _optional(_positive(float))),
    "mu_factor": ("mu_factor", _optional(_positive(float))),
    "c_file": ("c_file", str),
    "f_file": ("f_file", str),
    "theta": ("theta", float),
    "p": ("p", float),
    "lambda": ("lam", _optional(_positive(float))),
    "lambda_start": ("lam_start", _positive(float)),
    "lambda_cap": ("lam_cap", _positive(float)),
    "probes": ("probes", int),
    "seed": ("seed", int),
    "maxiter": ("maxiter", _positive(int)),
    "restarts": ("restarts", int),
    "out": ("out", str),
}
_FIELD_TO_KEY = {name: key for key, (name, _) in CONFIG_KEYS.items()}


def parse_config(text: str, overrides: dict | None = None) -> RunConfig:
    """Parse ``key = value`` lines into a validated :class:`RunConfig`.

    ``overrides`` maps config keys to already-typed values (from command-line
    flags); they win over the file. Unknown, duplicate and malformed keys are
    errors carrying the line number.
    """
    values = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"expected 'key = value', got {raw.strip()!r}", line=lineno)
        key, value = (part.strip() for part in line.split("=", 1))
        if key not in CONFIG_KEYS:
            raise ConfigError(f"unknown key {key!r}", line=lineno)
        if key in values:
            raise ConfigError(f"duplicate key {key!r} (first set on line {values[key][1]})",
                              line=lineno)
        if not value:
            raise ConfigError(f"empty value for {key!r}", line=lineno)
        name, conv = CONFIG_KEYS[key]
        try:
            values[key] = (conv(value), lineno)
        except ValueError as exc:
            raise ConfigError(f"bad value for {key!r}: {exc}", line=lineno) from None
    kwargs = {CONFIG_KEYS[k][0]: v for k, (v, _) in values.items()}
    for key, value in (overrides or {}).items():
        if key not in CONFIG_KEYS:
            raise ConfigError(f"unknown override {key!r}")
        if value is not None:
            kwargs[CONFIG_KEYS[key][0]] = value

    missing = []
    if "preset" not in kwargs:
        missing.append("preset")
    elif kwargs["preset"] == "custom":
        missing += [k for k in ("c_file", "f_file", "mu") if kwargs.get(CONFIG_KEYS[k][0]) is None]
    if missing:
        raise ConfigError(f"missing required keys: {', '.join(missing)}")
    return _validated(RunConfig(**kwargs))


def _validated(cfg: RunConfig) -> RunConfig:
    if cfg.dimension not in (2, 3):
        raise ConfigError(f"dimension must be 2 or 3, got {cfg.dimension}")
    nodes, extent = tuple(cfg.nodes), tuple(cfg.extent)
    if len(nodes) == 1:
        nodes = nodes * cfg.dimension
    if len(extent) == 1:
        extent = extent * cfg.dimension
    if len(nodes) != cfg.dimension or len(extent) != cfg.dimension:
        raise ConfigError(f"nodes and extent need 1 or {cfg.dimension} entries")
    if not 0 < cfg.theta < 1:
        raise ConfigError(f"theta must lie in (0, 1), got {cfg.theta}")
    if not cfg.p > 1:
        raise ConfigError(f"p must exceed 1, got {cfg.p}")
    if cfg.probes < 1 or cfg.restarts < 0:
        raise ConfigError("probes must be >= 1 and restarts >= 0")
    return replace(cfg, nodes=nodes, extent=extent)


def config_echo(cfg: RunConfig) -> dict:
    """Config as key -> canonical string; the output directory is left out."""
    out = {}
    for f in fields(cfg):
        if f.name == "out":
            continue
        value = getattr(cfg, f.name)
        if isinstance(value, tuple):
            text = " ".join(_fmt(x) for x in value)
        else:
            text = _fmt(value) if value is not None else (
                "none" if f.name.endswith("_file") else "auto")
        out[_FIELD_TO_KEY[f.name]] = text
    return out


# --- presets ----------------------------------------------------------------

def _smoothstep(t):
    """C-infinity step: 0 for t <= 0, 1 for t >= 1."""
    t = np.clip(t, 0.0, 1.0)
    with np.errstate(divide="ignore"):
        a = np.where(t > 0, np.exp(-1.0 / np.where(t > 0, t, 1.0)), 0.0)
        b = np.where(t < 1, np.exp(-1.0 / np.where(t < 1, 1.0 - t, 1.0)), 0.0)
    return a / (a + b)


def plateau(grid: Grid, centre, r_in: float, r_out: float) -> np.ndarray:
    """Smooth bump equal to 1 within ``r_in`` of ``centre`` and 0 beyond ``r_out``.

    ``centre`` and radii are fractions of the box: centres scale per axis,
    radii by the shortest extent.
    """
    scale = min(grid.extents)
    centre = list(centre) + [0.5] * (grid.dimension - len(centre))
    dist2 = sum((x - c * e) ** 2 for x, c, e in zip(grid.coordinates, centre, grid.extents))
    r = np.sqrt(dist2) / scale
    return _smoothstep((r_out - r) / (r_out - r_in))


def _source(grid):
    return plateau(grid, (0.5, 0.5), 0.05, 0.15)


def preset(name: str, grid: Grid, *, amplitude: float = 20.0, mu: float | None = None,
           mu_factor: float | None = None):
    """Coefficients ``(c, f, mu, notes)`` of a named scenario.

    ``mu`` defaults to ``mu_factor * gamma1(-c, f)``, with ``mu_factor`` 0.5,
    or 2.0 for ``gate-fail``. Regime checks run here, so a preset that
    cannot meet its own design fails before any solve.
    """
    notes = []
    f = _source(grid)
    if name == "paper-regime":
        c = amplitude * (plateau(grid, (0.25, 0.5), 0.12, 0.2)
                         - plateau(grid, (0.75, 0.5), 0.12, 0.2))
    elif name == "gate-fail":
        c = amplitude * plateau(grid, (0.25, 0.5), 0.12, 0.2)
    elif name == "coercive":
        c = -np.ones(grid.size)
    elif name == "czero":
        c = np.zeros(grid.size)
    elif name == "custom":
        raise ConfigError("the custom preset reads c_file and f_file; use load_custom")
    else:
        raise ConfigError(f"unknown preset {name!r}; choose from {', '.join(PRESETS)}")

    lam1 = spectral.principal_eigen(-c, grid).value
    if name == "paper-regime" and lam1 <= 0:
        raise RegimeError(f"amplitude {amplitude:g} too large: lambda1(-c) = {lam1:.6g} <= 0",
                          condition="lambda1(-c) > 0", stage="preset")
    if mu is None:
        if lam1 <= 0:
            raise RegimeError(f"lambda1(-c) = {lam1:.6g} <= 0: gamma1(-c,f) undefined, set mu",
                              condition="lambda1(-c) > 0", stage="preset")
        factor = mu_factor if mu_factor is not None else (2.0 if name == "gate-fail" else 0.5)
        gamma1 = spectral.weighted_eigen(c, f, grid).value
        mu = factor * gamma1
        notes.append(f"mu = {factor:g} * gamma1(-c,f) = {mu:.10g}")
    return c, f, float(mu), notes


def load_custom(cfg: RunConfig):
    grid_c, c = read_field(cfg.c_file)
    grid_f, f = read_field(cfg.f_file)
    if grid_c != grid_f:
        raise ConfigError(f"c_file and f_file live on different grids: {grid_c} vs {grid_f}")
    return grid_c, c, f, float(cfg.mu)


def build_problem(cfg: RunConfig):
    """Grid, ProblemSpec and notes for a config."""
    if cfg.preset == "custom":
        grid, c, f, mu = load_custom(cfg)
        notes = []
    else:
        grid = build_grid(cfg.dimension, cfg.extent, cfg.nodes)
        c, f, mu, notes = preset(cfg.preset, grid, amplitude=cfg.amplitude, mu=cfg.mu,
                                 mu_factor=cfg.mu_factor)
    try:
        spec = ProblemSpec(grid, c, f, mu)
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    return spec, notes


def solve_options(cfg: RunConfig) -> SolveOptions:
    return SolveOptions(theta=cfg.theta, p=cfg.p, lam=cfg.lam, lam_start=cfg.lam_start,
                        lam_cap=cfg.lam_cap, probes=cfg.probes, seed=cfg.seed,
                        maxiter=cfg.maxiter, restarts=cfg.restarts)


# --- reports ----------------------------------------------------------------

def _fmt(value) -> str:
    if isinstance(value, (bool, np.bool_)):
        return "true" if value else "false"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return repr(float(value))
    return str(value)


def _parse_value(text: str):
    if text in ("true", "false"):
        return text == "true"
    for conv in (int, float):
        try:
            return conv(text)
        except ValueError:
            pass
    return text


def report_rows(report: SolveReport, cfg: RunConfig, spec: ProblemSpec,
                notes=()) -> dict:
    """Flat, ordered key -> value view of a report (no timings: they vary run to run)."""
    rows = {"status": "ok", "mode": report.mode, "mu": spec.mu}
    rows.update({f"config.{k}": _parse_value(v) for k, v in config_echo(cfg).items()})
    rows.update({f"spectral.{k}": v for k, v in report.spectral.items()})
    g = report.geometry
    rows.update({"geometry.lambda": g.lam, "geometry.theta": g.theta, "geometry.p": g.p,
                 "geometry.R": g.radius, "geometry.M": g.sphere_min,
                 "geometry.probes": g.probes})
    for block in report.solutions:
        for k, v in block.summary.items():
            rows[f"solution{block.name}.{k}"] = v
        rows[f"solution{block.name}.v_h1"] = norm_h10(spec.grid, block.pair.v)
        rows[f"solution{block.name}.u_h1"] = norm_h10(spec.grid, block.pair.u)
        rows[f"solution{block.name}.ok"] = block.pair.ok
    if report.solutions[1:]:
        rows["mountain_pass.level"] = report.solutions[1].point.level
    rows.update({f"distinct.{k}": v for k, v in report.distinctness.items()})
    if report.mode == "single-solution":
        rows["uniqueness.restarts"] = cfg.restarts
        rows["uniqueness.spread"] = report.uniqueness_spread
    for k, note in enumerate(list(notes) + list(report.notes)):
        rows[f"note.{k}"] = note
    return rows


def write_report_csv(path, rows: dict) -> None:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["key", "value"])
    for k, v in rows.items():
        writer.writerow([k, _fmt(v)])
    Path(path).write_text(buf.getvalue())


def read_report_csv(path) -> dict:
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        if header != ["key", "value"]:
            raise ValueError(f"{path}: not a report file")
        return {k: _parse_value(v) for k, v in reader}


def _report_text(rows: dict, timings: dict) -> str:
    width = max(len(k) for k in rows)
    lines = ["twosolve report", "=" * 15]
    section = None
    for k, v in rows.items():
        head = k.split(".", 1)[0] if "." in k else ""
        if head != section:
            lines.append("")
            section = head
        lines.append(f"{k:<{width}}  {_fmt(v)}")
    if timings:
        lines += ["", "wall-clock seconds per stage (not reproducible, not in report.csv)"]
        lines += [f"  {k:<18} {v:.3f}" for k, v in timings.items()]
    return "\n".join(lines) + "\n"


def _write_columns(path, header: str, *columns) -> None:
    data = np.column_stack(columns)
    np.savetxt(path, data, header=header, fmt="%.17g")


def _midline(grid: Grid, values: np.ndarray):
    """Values along axis 0 through the middle interior node of the other axes."""
    arr = grid.to_array(values)
    idx = tuple([slice(None)] + [(m - 1) // 2 for m in grid.interior_shape[1:]])
    x = grid.spacing[0] * np.arange(1, grid.nodes[0] - 1)
    others = [grid.spacing[a] * (1 + (grid.interior_shape[a] - 1) // 2)
              for a in range(1, grid.dimension)]
    return x, arr[idx], others


def write_artifacts(out: Path, report: SolveReport, spec: ProblemSpec) -> list:
    grid = spec.grid
    written = []
    for block in report.solutions:
        for var, values in (("u", block.pair.u), ("v", block.pair.v)):
            path = out / f"{var}{block.name}.txt"
            write_field(path, grid, values)
            written.append(path)
            x, line, others = _midline(grid, values)
            where = ", ".join(f"x{a}={c:.6g}" for a, c in enumerate(others, start=1))
            prof = out / f"profile_{var}{block.name}.txt"
            _write_columns(prof, f"x0 {var}{block.name}  (midline {where})", x, line)
            written.append(prof)
        if block.point.trace is not None:
            path = out / f"path_energy{block.name}.txt"
            _write_columns(path, "t I(t w)  (ray through the mountain-pass point)",
                           block.point.trace[:, 0], block.point.trace[:, 1])
            written.append(path)
        hist = np.array([h[1] if isinstance(h, tuple) else h for h in block.point.history])
        if hist.size:
            path = out / f"history{block.name}.txt"
            _write_columns(path, "iteration gradient_norm", np.arange(hist.size), hist)
            written.append(path)
    return written


def run_scenario(cfg: RunConfig):
    """Solve the configured scenario and write every artifact to ``cfg.out``.

    Returns ``(report, rows)``. Stage errors propagate after a failure
    report has been written.
    """
    out = Path(cfg.out)
    out.mkdir(parents=True, exist_ok=True)
    try:
        spec, notes = build_problem(cfg)
        report = solve_two(spec, solve_options(cfg))
    except TwoSolveError as exc:
        _write_failure(out, cfg, exc)
        raise
    rows = report_rows(report, cfg, spec, notes)
    write_report_csv(out / "report.csv", rows)
    (out / "report.txt").write_text(_report_text(rows, report.timings))
    write_artifacts(out, report, spec)
    return report, rows


def _write_failure(out: Path, cfg: RunConfig, exc: TwoSolveError) -> None:
    rows = {"status": "failed", "exit_code": exc.exit_code, "stage": exc.stage or "",
            "error": str(exc)}
    condition = getattr(exc, "condition", None)
    if condition:
        rows["violated_condition"] = condition
        if condition == "lambda1(-c - mu f) > 0":
            rows["note"] = ("lambda1(-c - mu f) > 0 is necessary for a nonnegative "
                            "solution when c >= 0")
    rows.update({f"config.{k}": v for k, v in config_echo(cfg).items()})
    write_report_csv(out / "report.csv", rows)
    (out / "report.txt").write_text(_report_text(rows, {}))


# --- mu scan ----------------------------------------------------------------

def mu_scan(spec: ProblemSpec, mus) -> np.ndarray:
    """Two columns: mu and lambda1(-c - mu f)."""
    mus = np.asarray(mus, dtype=float)
    return np.column_stack([mus, spectral.lambda1_scan(spec.c, spec.f, mus, spec.grid)])


def _parse_scan(text: str):
    try:
        lo, hi, n = text.split(":")
        lo, hi, n = float(lo), float(hi), int(n)
    except ValueError:
        raise ConfigError(f"--mu-scan expects LO:HI:N, got {text!r}") from None
    if n < 1 or not lo <= hi:
        raise ConfigError(f"--mu-scan needs N >= 1 and LO <= HI, got {text!r}")
    return np.linspace(lo, hi, n)


# --- entry point --------------------------------------------------------------

def _build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="twosolve",
                                 description="Two positive solutions of "
                                             "-Lap u = c u + mu |grad u|^2 + f")
    sub = ap.add_subparsers(dest="command", required=True)
    s = sub.add_parser("solve", help="run a scenario from a config file")
    s.add_argument("--config", help="key = value config file (optional with --preset)")
    s.add_argument("--preset", choices=PRESETS)
    s.add_argument("--out", help="output directory")
    s.add_argument("--seed", type=int)
    s.add_argument("--theta", type=float)
    s.add_argument("--p", type=float)
    s.add_argument("--lambda", dest="lam", type=float)
    s.add_argument("--mu-scan", metavar="LO:HI:N",
                   help="tabulate lambda1(-c - mu f) over mu instead of solving")
    s.add_argument("-v", "--verbose", action="store_true")
    return ap


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    overrides = {"preset": args.preset, "out": args.out, "seed": args.seed,
                 "theta": args.theta, "p": args.p, "lambda": args.lam}
    try:
        text = Path(args.config).read_text(encoding="utf-8") if args.config else ""
    except OSError as exc:
        print(f"error: cannot read config: {exc}", file=sys.stderr)
        return ConfigError.exit_code
    try:
        cfg = parse_config(text, overrides)
        if args.mu_scan:
            mus = _parse_scan(args.mu_scan)
            spec, _ = build_problem(cfg)
            table = mu_scan(spec, mus)
            out = Path(cfg.out)
            out.mkdir(parents=True, exist_ok=True)
            _write_columns(out / "mu_scan.txt", "mu lambda1(-c-mu f)", table[:, 0], table[:, 1])
            for mu, lam1 in table:
                print(f"{mu:.10g}\t{lam1:.10g}")
            return 0
        report, rows = run_scenario(cfg)
    except TwoSolveError as exc:
        print(f"error: {exc}", file=sys.stderr)
        if getattr(exc, "condition", None):
            print(f"violated condition: {exc.condition}", file=sys.stderr)
        return exc.exit_code
    n = len(report.solutions)
    print(f"{report.mode}: {n} solution{'s' if n > 1 else ''} written to {cfg.out}")
    for block in report.solutions:
        s = block.summary
        print(f"  {block.name} {s['kind']:<16} I={s['energy']:.6g} |I'|={s['gradient_norm']:.2e} "
              f"res_P={s['residual_P']:.2e} max u={s['u_max']:.6g}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
