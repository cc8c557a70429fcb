"""``bosetopo`` command-line front end.

Every subcommand reads a YAML config (``--config``), prints a short summary
on stdout and writes a CSV table to ``--output`` (or to stdout after the
summary). Exit codes: 1 parse error, 2 validation error, 3 numerical failure.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import replace
from typing import Any, List, Optional, Sequence, Tuple

import numpy as np

from . import __version__
from .config import ConfigParseError, RunConfig, SweepSpec, TASKS, load, set_path
from .errors import NumericalError, ValidationError
from .models import BlochSymbol, ModelSpec, bloch_symbol, build_model
from .scattering import chain_setup, s_parameters
from .spectral import band_structure, diagonalize, sort_spectrum, zero_modes
from .topology import (InvariantResult, bulk_boundary_check, bulk_gap, detect_symmetry_class,
                       symbol_invariant)

Table = Tuple[List[str], List[List[Any]]]


class _Exit(Exception):
    def __init__(self, code: int, message: str):
        super().__init__(message)
        self.code = code


class _Parser(argparse.ArgumentParser):
    def error(self, message: str) -> None:  # argparse would exit with 2
        raise ConfigParseError(message)


# ---------------------------------------------------------------- CSV output

def _cell(x: Any) -> str:
    if isinstance(x, (bool, np.bool_)):
        return str(int(x))
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, (float, np.floating)):
        return format(float(x), ".16e")
    return str(x)


def write_csv(fh, config: RunConfig, header: Sequence[str], rows: Sequence[Sequence[Any]]) -> None:
    resolved = json.dumps(config.to_dict(), separators=(",", ":"))
    fh.write(f"# bosetopo {__version__} config: {resolved}\n")
    w = csv.writer(fh, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        if len(row) != len(header):
            raise AssertionError("row width does not match header")
        w.writerow([_cell(x) for x in row])


# ---------------------------------------------------------------- helpers

def _symbol(spec: ModelSpec) -> Optional[BlochSymbol]:
    try:
        return bloch_symbol(spec)
    except ValidationError:
        return None


def _zero_tol(config: RunConfig, sym: Optional[BlochSymbol]) -> Optional[float]:
    """User tolerance, else 1e-2 of the bulk gap, else the spectral default."""
    if config.tol is not None:
        return config.tol
    if sym is not None:
        gap = bulk_gap(sym, config.grid)
        if gap > 0:
            return 1e-2 * gap
    return None


def _invariant_row(inv: InvariantResult) -> List[Any]:
    defined = inv.value is not None
    margin = inv.gap_margin
    return [inv.kind, inv.value if defined else 0, int(defined),
            margin if not math.isnan(margin) else 0.0, int(not math.isnan(margin)), inv.grid_size]


INVARIANT_HEADER = ["kind", "value", "value_defined", "gap_margin", "gap_margin_defined", "grid_size"]


# ---------------------------------------------------------------- tasks

def task_spectrum(config: RunConfig) -> Tuple[List[str], Table]:
    h = build_model(config.model, pbc=config.pbc)
    res = diagonalize(h.dynamical_matrix())
    order = np.lexsort((res.eigenvalues.imag, res.eigenvalues.real))
    rows = [[int(i), res.eigenvalues[i].real, res.eigenvalues[i].imag, res.residuals[i],
             res.ipr[i], res.tau3_norms[i]] for i in order]
    summary = [f"eigenvalues: {len(rows)}", "flags: " + (" ".join(res.flags) if res.flags else "none")]
    return summary, (["index", "eigenvalue_re", "eigenvalue_im", "residual", "ipr", "tau3_norm"], rows)


def task_bands(config: RunConfig) -> Tuple[List[str], Table]:
    sym = bloch_symbol(config.model)
    points = int(config.bands.get("points", config.grid))
    if points < 2:
        raise ValidationError("bands.points must be at least 2")
    k = -np.pi + 2 * np.pi * np.arange(points) / points
    w = sort_spectrum(band_structure(sym, k))
    header = ["k"]
    for b in range(w.shape[1]):
        header += [f"band{b}_re", f"band{b}_im"]
    rows = []
    for i in range(points):
        row: List[Any] = [k[i]]
        for z in w[i]:
            row += [z.real, z.imag]
        rows.append(row)
    return [f"bands: {w.shape[1]} on {points} points"], (header, rows)


def task_classify(config: RunConfig) -> Tuple[List[str], Table]:
    h = build_model(config.model, pbc=config.pbc)
    rep = detect_symmetry_class(h, tol=config.tol or 1e-8, search_dressing=True)
    n1, n2 = rep.squeezing if rep.squeezing is not None else (0.0, 0.0)
    dressing = ""
    if rep.local_dressing is not None:
        names = {1: "1", 1j: "i", -1: "-1", -1j: "-i"}
        dressing = ";".join(names.get(complex(np.round(z.real) + 1j * np.round(z.imag)), repr(z))
                            for z in rep.local_dressing)
    row = [rep.class_label, rep.time_reversal, rep.number, rep.squeezing is not None, n1, n2, dressing]
    header = ["class_label", "time_reversal", "number", "squeezing", "squeeze_n1", "squeeze_n2", "dressing"]
    return [f"class: {rep.class_label}"], (header, [row])


def task_invariant(config: RunConfig) -> Tuple[List[str], Table]:
    sym = bloch_symbol(config.model)
    inv = symbol_invariant(sym, grid=config.grid, tol=config.tol or 1e-8)
    return [str(inv)], (INVARIANT_HEADER, [_invariant_row(inv)])


def task_zeromodes(config: RunConfig) -> Tuple[List[str], Table]:
    h = build_model(config.model, pbc=config.pbc)
    tol = _zero_tol(config, None if config.pbc else _symbol(config.model))
    rep = zero_modes(h, tol)
    header = ["index", "eigenvalue_re", "eigenvalue_im", "side", "edge_weight_left", "edge_weight_right",
              "left_fraction", "localization_length", "delocalized", "ipr", "disconnected"]
    rows = [[i, m.eigenvalue.real, m.eigenvalue.imag, m.side, m.edge_weight_left, m.edge_weight_right,
             m.left_fraction, m.localization_length, m.delocalized, m.ipr, m.disconnected]
            for i, m in enumerate(rep.modes)]
    summary = [f"zero modes: {rep.count} (left {rep.count_on('left')}, right {rep.count_on('right')}, "
               f"tol {rep.tol:.3e})"]
    return summary, (header, rows)


def _default_window(h, damping: float) -> Tuple[float, float]:
    w = np.linalg.eigvals(h.dynamical_matrix()).real
    w = w[w > 0]
    if w.size == 0:
        raise ValidationError("no positive-frequency modes; give sparams.start and sparams.stop")
    pad = max(10 * damping, 0.05 * (w.max() - w.min()), 1e-6 * w.max())
    return max(w.min() - pad, 1e-9 * w.max()), w.max() + pad


def task_sparams(config: RunConfig) -> Tuple[List[str], Table]:
    h = build_model(config.model, pbc=config.pbc)
    opts = config.sparams
    setup = chain_setup(h, kappa_c=opts.get("kappa_c", 0.5e6), kappa_m=opts.get("kappa_m", 10e6))
    points = int(opts.get("points", 2001))
    if points < 2:
        raise ValidationError("sparams.points must be at least 2")
    if "start" in opts and "stop" in opts:
        start, stop = opts["start"], opts["stop"]
    else:
        start, stop = _default_window(h, float(setup.damping.max()))
    if not stop > start:
        raise ValidationError("sparams.stop must exceed sparams.start")
    freqs = np.linspace(start, stop, points)
    resp = s_parameters(setup, freqs)
    P = setup.n_ports
    pairs = [(i, i) for i in range(P)] + [(i, j) for j in range(P) for i in range(P) if i != j]
    header = ["frequency"] + [f"abs_S{i + 1}{j + 1}" for i, j in pairs]
    for i, j in pairs:
        header += [f"S{i + 1}{j + 1}_re", f"S{i + 1}{j + 1}_im"]
    header.append("singular")
    rows = []
    for f in range(points):
        S = np.nan_to_num(resp.s_matrix[f], nan=0.0)
        row: List[Any] = [freqs[f]] + [abs(S[i, j]) for i, j in pairs]
        for i, j in pairs:
            row += [S[i, j].real, S[i, j].imag]
        row.append(bool(resp.singular[f]))
        rows.append(row)
    summary = [f"ports: {P} on modes {[h.labels[m] for m in setup.port_modes]}",
               f"singular points: {int(resp.singular.sum())}"]
    return summary, (header, rows)


def task_bulkboundary(config: RunConfig) -> Tuple[List[str], Table]:
    rep = bulk_boundary_check(config.model, tol=config.tol, grid=config.grid)
    header = INVARIANT_HEADER + ["left_count", "right_count", "tol", "decoupled", "holds"]
    row = _invariant_row(rep.invariant) + [rep.left_count, rep.right_count, rep.tol, rep.decoupled, rep.holds]
    summary = [f"invariant: {rep.invariant}",
               f"left zero modes: {rep.left_count}, right: {rep.right_count}, holds: {'yes' if rep.holds else 'no'}"]
    if rep.invariant.gap_closed:
        raise _Exit(3, "GapClosed: the bulk gap closes, no invariant is defined")
    return summary, (header, [row])


SWEEP_HEADER = ["value", "ok", "invariant_kind", "invariant_value", "value_defined", "gap", "zero_mode_count",
                "left_count", "right_count", "error"]


def sweep_point(spec: ModelSpec, path: str, value: float, grid: int, tol: Optional[float],
                pbc: bool) -> List[Any]:
    """One sweep row; failures become a row with ``ok = 0`` and the message."""
    try:
        s = set_path(spec, path, value)
        h = build_model(s, pbc=pbc)
        sym = _symbol(s)
        if sym is not None:
            inv = symbol_invariant(sym, grid=grid)
            gap = bulk_gap(sym, grid)
        else:
            inv = InvariantResult("Trivial", None, float("nan"), grid)
            gap = float(np.min(np.abs(np.linalg.eigvals(h.dynamical_matrix()))))
        ztol = tol if tol is not None else (1e-2 * gap if gap > 0 else None)
        rep = zero_modes(h, ztol)
        return [value, True, inv.kind, inv.value if inv.value is not None else 0, inv.value is not None,
                gap, rep.count, rep.count_on("left"), rep.count_on("right"), ""]
    except (ValidationError, NumericalError, np.linalg.LinAlgError) as exc:
        msg = " ".join(str(exc).split()) or type(exc).__name__
        return [value, False, "", 0, False, 0.0, 0, 0, 0, msg]


def _sweep_star(args):
    return sweep_point(*args)


def task_sweep(config: RunConfig) -> Tuple[List[str], Table]:
    if config.sweep is None:
        raise ValidationError("sweep needs --param, --start, --stop and --steps (or a sweep section)")
    sw = config.sweep
    values = np.linspace(sw.start, sw.stop, sw.steps)
    jobs = [(config.model, sw.param, float(v), config.grid, config.tol, config.pbc) for v in values]
    if config.jobs > 1:
        with ProcessPoolExecutor(max_workers=config.jobs) as pool:
            rows = list(pool.map(_sweep_star, jobs))
    else:
        rows = [_sweep_star(a) for a in jobs]
    failed = sum(1 for r in rows if not r[1])
    return [f"sweep {sw.param}: {len(rows)} points, {failed} failed"], (SWEEP_HEADER, rows)


TASK_FUNCS = {
    "spectrum": task_spectrum,
    "bands": task_bands,
    "classify": task_classify,
    "invariant": task_invariant,
    "zeromodes": task_zeromodes,
    "sparams": task_sparams,
    "sweep": task_sweep,
    "bulkboundary": task_bulkboundary,
}


def run(config: RunConfig, stdout=None) -> int:
    """Execute ``config.task``; returns the exit status."""
    stdout = sys.stdout if stdout is None else stdout
    summary, (header, rows) = TASK_FUNCS[config.task](config)
    buf = io.StringIO()
    write_csv(buf, config, header, rows)
    for line in summary:
        print(line, file=stdout)
    if config.output:
        with open(config.output, "w", encoding="utf-8", newline="") as fh:
            fh.write(buf.getvalue())
    else:
        stdout.write(buf.getvalue())
    if config.task == "invariant" and summary[0] == "GapClosed":
        raise _Exit(3, "GapClosed: the bulk gap closes, no invariant is defined")
    return 0


# ---------------------------------------------------------------- argument parsing

def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--config", required=True, metavar="PATH", help="YAML run configuration")
    common.add_argument("--output", metavar="PATH", help="CSV destination (default: stdout)")
    common.add_argument("--tol", type=float, help="zero-mode or symmetry tolerance")
    common.add_argument("--grid", type=int, help="Brillouin-zone grid size")
    common.add_argument("--jobs", type=int, help="parallel workers for sweeps")
    common.add_argument("--pbc", action="store_true", default=None, help="periodic boundary conditions")

    parser = _Parser(prog="bosetopo", description="Topology and scattering of quadratic bosonic chains.")
    parser.add_argument("--version", action="version", version=f"bosetopo {__version__}")
    sub = parser.add_subparsers(dest="task", metavar="TASK", parser_class=_Parser)
    sub.required = True
    for name in TASKS:
        p = sub.add_parser(name, parents=[common])
        if name == "sweep":
            p.add_argument("--param", help="parameter path, e.g. perturbations[0].strength")
            p.add_argument("--start", type=float)
            p.add_argument("--stop", type=float)
            p.add_argument("--steps", type=int)
        elif name == "sparams":
            p.add_argument("--start", type=float, help="first frequency (Hz)")
            p.add_argument("--stop", type=float, help="last frequency (Hz)")
            p.add_argument("--points", type=int)
            p.add_argument("--kappa-c", dest="kappa_c", type=float, help="port coupling (Hz)")
            p.add_argument("--kappa-m", dest="kappa_m", type=float, help="magnon loss (Hz)")
        elif name == "bands":
            p.add_argument("--points", type=int)
    return parser


def resolve_config(args: argparse.Namespace) -> RunConfig:
    cfg = load(args.config)
    updates: dict = {"task": args.task}
    for key in ("output", "tol", "grid", "jobs", "pbc"):
        v = getattr(args, key)
        if v is not None:
            updates[key] = v
    if args.task == "sweep":
        old = cfg.sweep
        fields = {k: getattr(args, k) for k in ("param", "start", "stop", "steps")}
        if old is not None:
            fields = {k: (v if v is not None else getattr(old, k)) for k, v in fields.items()}
        missing = [k for k, v in fields.items() if v is None]
        if missing:
            raise ValidationError(f"sweep is missing {', '.join(missing)}")
        updates["sweep"] = SweepSpec(**fields)
    elif args.task == "sparams":
        opts = dict(cfg.sparams)
        for k in ("start", "stop", "points", "kappa_c", "kappa_m"):
            if getattr(args, k) is not None:
                opts[k] = float(getattr(args, k))
        updates["sparams"] = opts
    elif args.task == "bands" and args.points is not None:
        updates["bands"] = dict(cfg.bands, points=float(args.points))
    return replace(cfg, **updates)


def main(argv: Optional[Sequence[str]] = None) -> int:
    try:
        args = build_parser().parse_args(argv)
        config = resolve_config(args)
        return run(config)
    except _Exit as exc:
        code, msg = exc.code, str(exc)
    except ConfigParseError as exc:
        code, msg = 1, f"parse error: {exc}"
    except ValidationError as exc:
        code, msg = 2, f"invalid input: {exc}"
    except (NumericalError, np.linalg.LinAlgError) as exc:
        code, msg = 3, f"numerical failure: {exc}"
    print(" ".join(msg.split()), file=sys.stderr)
    return code


if __name__ == "__main__":
    sys.exit(main())
