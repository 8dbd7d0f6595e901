"""Command-line front end: ``pdm-squeeze {spectrum,state,observables,density,validate}``.

Settings come from flags, then a flat ``key = value`` config file (``--config``
or ``$PDM_SQUEEZE_CONFIG``), then built-in defaults. Output is CSV (``#``
metadata lines, one header row, ``%.17g`` floats) or JSON.

Exit codes: 0 ok, 1 validation failure, 2 bad input, 3 truncation did not converge.
"""

from __future__ import annotations

import argparse
import io
import json
import math
import os
import sys
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import __version__
from . import observables as ob
from . import pdm_model as pm
from . import squeezed_state as ss
from . import validation
from .pdm_model import ModelParams
from .squeezed_state import Method, StateSpec

FORMAT_VERSION = 1
CONFIG_ENV = "PDM_SQUEEZE_CONFIG"

EXIT_OK = 0
EXIT_VALIDATION = 1
EXIT_INPUT = 2
EXIT_NONCONVERGED = 3

DEFAULTS = {
    "m0": 1.0, "omega": 1.0, "hbar": 1.0, "alpha": 0.1,
    "z_re": 0.8, "z_im": 0.0, "gamma": 0.2,
    "nmax": None, "method": "recurrence",
    "scan": None, "t_list": "0", "x_grid": "-5:5:101",
    "format": "csv", "out": None,
}
FLOAT_KEYS = ("m0", "omega", "hbar", "alpha", "z_re", "z_im", "gamma")
METHODS = {"recurrence": Method.RECURRENCE, "closed": Method.CLOSED_FORM,
           "hermite": Method.HERMITE_LIMIT}
SCAN_VARS = ("z_re", "z_im", "gamma", "alpha", "t")
SPECTRUM_DEFAULT_NMAX = 20


class InputError(ValueError):
    """Bad flags, config or parameter values (exit code 2)."""


class NonConvergence(RuntimeError):
    """Adaptive truncation reached its cap (exit code 3)."""


@dataclass(frozen=True)
class Scan:
    variable: str
    start: float
    stop: float
    steps: int

    def values(self) -> list[float]:
        return [float(v) for v in np.linspace(self.start, self.stop, self.steps)]


@dataclass(frozen=True)
class RunConfig:
    params: ModelParams
    spec: StateSpec
    scan: Scan | None = None
    t_list: tuple = (0.0,)
    x_grid: tuple = (-5.0, 5.0, 101)
    format: str = "csv"
    out: str | None = None


@dataclass
class Table:
    """Command result: metadata, column names and rows."""

    command: str
    metadata: dict
    columns: list
    rows: list
    extra: dict = field(default_factory=dict)


# -- config -------------------------------------------------------------------

def read_config_file(path) -> dict:
    """Parse ``key = value`` lines; ``#`` starts a comment; keys may use ``-`` or ``_``."""
    out = {}
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise InputError(f"cannot read config file {path}: {exc}") from exc
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise InputError(f"{path}:{lineno}: expected 'key = value'")
        key, value = (s.strip() for s in line.split("=", 1))
        key = key.replace("-", "_")
        if key == "adaptive":
            if value.lower() in ("1", "true", "yes", "on"):
                out["nmax"] = None
            continue
        if key not in DEFAULTS:
            raise InputError(f"{path}:{lineno}: unknown key '{key}'")
        out[key] = value
    return out


def _parse_scan(text: str) -> Scan:
    parts = text.split(":")
    if len(parts) != 4:
        raise InputError(f"--scan expects VAR:START:STOP:STEPS, got '{text}'")
    var = parts[0].replace("-", "_")
    if var not in SCAN_VARS:
        raise InputError(f"scan variable must be one of {', '.join(SCAN_VARS)}, got '{parts[0]}'")
    try:
        start, stop, steps = float(parts[1]), float(parts[2]), int(parts[3])
    except ValueError as exc:
        raise InputError(f"bad --scan '{text}': {exc}") from exc
    if steps < 2 or not start < stop:
        raise InputError("--scan needs STEPS >= 2 and START < STOP")
    return Scan(var, start, stop, steps)


def _parse_x_grid(text: str):
    parts = text.split(":")
    try:
        lo, hi, n = float(parts[0]), float(parts[1]), int(parts[2])
    except (ValueError, IndexError) as exc:
        raise InputError(f"--x-grid expects MIN:MAX:POINTS, got '{text}'") from exc
    if len(parts) != 3 or n < 2 or not lo < hi:
        raise InputError("--x-grid needs POINTS >= 2 and MIN < MAX")
    return lo, hi, n


def _parse_t_list(text: str):
    try:
        ts = tuple(float(t) for t in text.split(",") if t.strip())
    except ValueError as exc:
        raise InputError(f"--t-list expects comma-separated numbers, got '{text}'") from exc
    if not ts or not all(math.isfinite(t) for t in ts):
        raise InputError("--t-list is empty or not finite")
    return ts


def resolve_config(args: argparse.Namespace, environ=None) -> RunConfig:
    """Merge flags > config file > defaults into a :class:`RunConfig`."""
    environ = os.environ if environ is None else environ
    merged = dict(DEFAULTS)
    cfg_path = args.config or environ.get(CONFIG_ENV)
    if cfg_path:
        merged.update(read_config_file(cfg_path))
    for key in DEFAULTS:
        v = getattr(args, key, None)
        if v is not None:
            merged[key] = v
    if getattr(args, "adaptive", False):
        merged["nmax"] = None
    try:
        for key in FLOAT_KEYS:
            if merged[key] is not None:
                merged[key] = float(merged[key])
        nmax = merged["nmax"]
        if isinstance(nmax, str):
            nmax = None if nmax.lower() in ("", "none", "adaptive") else int(nmax)
        method = METHODS.get(str(merged["method"]))
        if method is None:
            raise InputError(f"method must be one of {', '.join(METHODS)}, got '{merged['method']}'")
        fmt = str(merged["format"])
        if fmt not in ("csv", "json"):
            raise InputError(f"format must be csv or json, got '{fmt}'")
        params = ModelParams(m0=merged["m0"], omega=merged["omega"],
                             hbar=merged["hbar"], alpha=merged["alpha"])
        spec = StateSpec(z=complex(merged["z_re"], merged["z_im"]), gamma=merged["gamma"],
                         n_max=nmax, method=method)
        scan = _parse_scan(str(merged["scan"])) if merged["scan"] else None
        return RunConfig(params=params, spec=spec, scan=scan,
                         t_list=_parse_t_list(str(merged["t_list"])),
                         x_grid=_parse_x_grid(str(merged["x_grid"])),
                         format=fmt, out=merged["out"])
    except InputError:
        raise
    except ValueError as exc:
        raise InputError(str(exc)) from exc


# -- commands -----------------------------------------------------------------

def _config_metadata(cfg: RunConfig) -> dict:
    p, s = cfg.params, cfg.spec
    return {
        "m0": p.m0, "omega": p.omega, "hbar": p.hbar, "alpha": p.alpha,
        "z_re": s.z.real, "z_im": s.z.imag, "gamma": s.gamma,
        "nmax": "adaptive" if s.n_max is None else s.n_max,
        "method": s.method.value,
    }


def _build(params: ModelParams, spec: StateSpec):
    consts = pm.derive_constants(params)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", ss.TruncationWarning)
        state = ss.build_state(consts, spec)
    if spec.adaptive and not state.converged:
        raise NonConvergence(f"adaptive truncation reached n_max={state.n_max} with tail "
                             f"weight {state.tail_weight:.3e}")
    return state


def cmd_spectrum(cfg: RunConfig) -> Table:
    p = cfg.params
    n_max = cfg.spec.n_max or SPECTRUM_DEFAULT_NMAX
    c = pm.derive_constants(p)
    energies = pm.energy_table(p, n_max)
    e = pm.dimensionless_energy_table(c, n_max)
    rho = pm.rho_log_table(c, n_max)
    rows = [[n, float(energies[n]), float(e[n]), float(rho[n])] for n in range(n_max + 1)]
    meta = {k: v for k, v in _config_metadata(cfg).items() if k in ("m0", "omega", "hbar", "alpha")}
    meta.update({"nmax": n_max, "a": c.a, "b": c.b})
    return Table("spectrum", meta, ["n", "E_n", "e_n", "rho_log_n"], rows)


def cmd_state(cfg: RunConfig) -> Table:
    s = _build(cfg.params, cfg.spec)
    meta = _config_metadata(cfg)
    meta.update({"n_max_used": s.n_max, "log_norm": s.norm_factor_log,
                 "tail_weight": s.tail_weight, "converged": s.converged})
    p_n = ob.photon_distribution(s)
    rows = [[n, float(c.real), float(c.imag), float(p_n[n])] for n, c in enumerate(s.amplitudes)]
    return Table("state", meta, ["n", "re_c", "im_c", "p_n"], rows)


OBS_COLUMNS = ["mean_x", "mean_p", "delta_x", "delta_p", "dxdp", "dxdp_factored",
               "A", "B", "mean_n", "mandel_q"]


def _observable_row(cfg: RunConfig, var: str | None, value: float | None):
    p, spec, t = cfg.params, cfg.spec, 0.0
    if var == "alpha":
        p = ModelParams(m0=p.m0, omega=p.omega, hbar=p.hbar, alpha=value)
    elif var == "gamma":
        spec = StateSpec(z=spec.z, gamma=value, n_max=spec.n_max, method=spec.method)
    elif var == "z_re":
        spec = StateSpec(z=complex(value, spec.z.imag), gamma=spec.gamma, n_max=spec.n_max,
                         method=spec.method)
    elif var == "z_im":
        spec = StateSpec(z=complex(spec.z.real, value), gamma=spec.gamma, n_max=spec.n_max,
                         method=spec.method)
    elif var == "t":
        t = value
    s = _build(p, spec)
    if t:
        s = ss.evolve(s, t)
    r = ob.observable_report(s, p)
    row = [r.mean_x, r.mean_p, math.sqrt(max(r.var_x, 0.0)), math.sqrt(max(r.var_p, 0.0)),
           r.uncertainty_product, r.uncertainty_product_factored, r.A, r.B, r.mean_n, r.mandel_q]
    return ([] if var is None else [value]) + [float(v) for v in row] + [s.n_max]


def cmd_observables(cfg: RunConfig) -> Table:
    meta = _config_metadata(cfg)
    if cfg.scan is None:
        rows = [_observable_row(cfg, None, None)]
        columns = OBS_COLUMNS + ["n_max"]
    else:
        sc = cfg.scan
        meta["scan"] = f"{sc.variable}:{sc.start!r}:{sc.stop!r}:{sc.steps}"
        # points run concurrently; map() keeps input order
        with ThreadPoolExecutor() as pool:
            rows = list(pool.map(lambda v: _observable_row(cfg, sc.variable, v), sc.values()))
        columns = [sc.variable] + OBS_COLUMNS + ["n_max"]
    return Table("observables", meta, columns, rows)


def cmd_density(cfg: RunConfig) -> Table:
    p = cfg.params
    if not p.alpha > 0:
        raise InputError("density needs alpha > 0 (x-space eigenfunctions)")
    s = _build(p, cfg.spec)
    lo, hi, npts = cfg.x_grid
    x = np.linspace(lo, hi, npts)
    cols = [ob.position_density(s, p, t, x) for t in cfg.t_list]
    integrals = [ob.density_integral(s, p, t) for t in cfg.t_list]
    meta = _config_metadata(cfg)
    meta.update({"n_max_used": s.n_max, "x_grid": f"{lo!r}:{hi!r}:{npts}"})
    for t, v in zip(cfg.t_list, integrals):
        meta[f"integral_t={t!r}"] = v
    rows = [[float(x[i])] + [float(c[i]) for c in cols] for i in range(npts)]
    columns = ["x"] + [f"density_t={t!r}" for t in cfg.t_list]
    return Table("density", meta, columns, rows, extra={"integrals": integrals})


# fixtures re-run by the determinism check
DETERMINISM_FIXTURES = (
    ["spectrum", "--alpha", "0.1", "--nmax", "20"],
    ["state", "--alpha", "0.1", "--z-re", "0.8", "--gamma", "0.2"],
    ["observables", "--scan", "alpha:0.01:0.3:6"],
    ["density", "--t-list", "0,1,5", "--x-grid", "-6:6:61"],
    ["spectrum", "--format", "json"],
)


def run_to_bytes(argv: list[str]) -> bytes:
    """Run one non-validate command in-process and return its formatted output."""
    args = build_parser().parse_args(_glue_values(argv))
    cfg = resolve_config(args, environ={})
    return format_table(COMMANDS[args.command](cfg), cfg.format).encode()


def cmd_validate(cfg: RunConfig, inject_fault: bool = False):
    results = validation.run_all(cfg.params, cfg.spec, runner=run_to_bytes,
                                 fixtures=DETERMINISM_FIXTURES, corrupt=inject_fault)
    return results


COMMANDS = {"spectrum": cmd_spectrum, "state": cmd_state,
            "observables": cmd_observables, "density": cmd_density}


# -- output -------------------------------------------------------------------

def _fmt(v) -> str:
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, float):
        return "%.17g" % v
    return str(v)


def _json_value(v):
    if isinstance(v, float) and not math.isfinite(v):
        return None
    if isinstance(v, np.integer):
        return int(v)
    return v


def format_table(table: Table, fmt: str) -> str:
    if fmt == "json":
        doc = {
            "format_version": FORMAT_VERSION,
            "command": table.command,
            "metadata": {k: _json_value(v) for k, v in table.metadata.items()},
            "columns": table.columns,
            "rows": [[_json_value(v) for v in row] for row in table.rows],
        }
        return json.dumps(doc, indent=1, allow_nan=False) + "\n"
    buf = io.StringIO()
    buf.write(f"# pdm-squeeze output format {FORMAT_VERSION}\n")
    buf.write(f"# command: {table.command}\n")
    for k, v in table.metadata.items():
        buf.write(f"# {k}: {_fmt(v)}\n")
    buf.write(",".join(table.columns) + "\n")
    for row in table.rows:
        buf.write(",".join(_fmt(v) for v in row) + "\n")
    return buf.getvalue()


def format_validation(results, cfg: RunConfig) -> tuple[str, str]:
    """Human-readable report and its JSON twin."""
    lines = [r.line() for r in results]
    cmp = next((r for r in results if r.name == "closed_form_comparison"), None)
    if cmp is not None:
        lines.append("")
        lines.append("closed form vs recurrence (informational)")
        lines.append(f"{'z':>8s} {'gamma':>6s} {'max_dev':>12s} {'first_n>1e-8':>13s}")
        for rep in cmp.data["reports"]:
            first = rep["first_index_exceeding"]
            lines.append(f"{rep['z_re']:8.3f} {rep['gamma']:6.2f} {rep['max_deviation']:12.4e} "
                         f"{'-' if first is None else first:>13}")
    hard_fail = [r.name for r in results if r.hard and not r.passed]
    lines.append("")
    lines.append("validate: " + ("all hard invariants PASS" if not hard_fail
                                 else f"FAIL ({', '.join(hard_fail)})"))
    doc = {
        "format_version": FORMAT_VERSION,
        "command": "validate",
        "metadata": _config_metadata(cfg),
        "passed": not hard_fail,
        "checks": [r.to_dict() for r in results],
    }
    return "\n".join(lines) + "\n", json.dumps(doc, indent=1, default=_json_value) + "\n"


# -- entry point --------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    g = common.add_argument_group("model and state")
    for name in ("m0", "omega", "hbar", "alpha"):
        g.add_argument(f"--{name}", type=float)
    g.add_argument("--z-re", dest="z_re", type=float)
    g.add_argument("--z-im", dest="z_im", type=float)
    g.add_argument("--gamma", type=float)
    trunc = g.add_mutually_exclusive_group()
    trunc.add_argument("--nmax", type=int, help="fixed Fock truncation")
    trunc.add_argument("--adaptive", action="store_true", help="adaptive truncation (default)")
    g.add_argument("--method", choices=sorted(METHODS))
    o = common.add_argument_group("scans and output")
    o.add_argument("--scan", metavar="VAR:START:STOP:STEPS",
                   help=f"VAR in {{{','.join(SCAN_VARS)}}} (observables only)")
    o.add_argument("--t-list", dest="t_list", metavar="T1,T2,...")
    o.add_argument("--x-grid", dest="x_grid", metavar="MIN:MAX:POINTS")
    o.add_argument("--format", choices=("csv", "json"))
    o.add_argument("--out", metavar="PATH", help="output file (default stdout)")
    o.add_argument("--config", metavar="PATH", help=f"key = value file (or ${CONFIG_ENV})")

    parser = argparse.ArgumentParser(prog="pdm-squeeze",
                                     description="Squeezed coherent states of a position-dependent-mass oscillator.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("spectrum", parents=[common], help="energies, e_n and ln rho_n")
    sub.add_parser("state", parents=[common], help="normalized Fock amplitudes")
    sub.add_parser("observables", parents=[common], help="quadratures, uncertainty, photon statistics")
    sub.add_parser("density", parents=[common], help="position density on an x grid")
    v = sub.add_parser("validate", parents=[common], help="run all invariant checks")
    v.add_argument("--inject-fault", action="store_true", help=argparse.SUPPRESS)
    return parser


def _emit(text: str, out: str | None):
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


_DASH_VALUE_FLAGS = ("--x-grid", "--t-list", "--scan")


def _glue_values(argv):
    """Let ``--x-grid -5:5:101`` through; argparse would read ``-5:5:101`` as a flag."""
    out = []
    it = iter(argv)
    for tok in it:
        if tok in _DASH_VALUE_FLAGS:
            nxt = next(it, None)
            out.append(tok if nxt is None else f"{tok}={nxt}")
        else:
            out.append(tok)
    return out


def main(argv=None) -> int:
    parser = build_parser()
    argv = _glue_values(sys.argv[1:] if argv is None else list(argv))
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        cfg = resolve_config(args)
        if cfg.scan is not None and args.command != "observables":
            raise InputError("--scan is only supported by the observables command")
        if args.command == "validate":
            results = cmd_validate(cfg, inject_fault=args.inject_fault)
            text, doc = format_validation(results, cfg)
            sys.stdout.write(text)
            if cfg.out:
                Path(cfg.out).write_text(doc)
            elif cfg.format == "json":
                sys.stdout.write(doc)
            ok = all(r.passed for r in results if r.hard)
            return EXIT_OK if ok else EXIT_VALIDATION
        table = COMMANDS[args.command](cfg)
        _emit(format_table(table, cfg.format), cfg.out)
        return EXIT_OK
    except InputError as exc:
        print(f"pdm-squeeze: error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except NonConvergence as exc:
        print(f"pdm-squeeze: {exc}", file=sys.stderr)
        return EXIT_NONCONVERGED
    except ValueError as exc:
        print(f"pdm-squeeze: error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
