"""``contdiag`` command line.

Subcommands::

    contdiag diagonalize --f EXPR --g EXPR --h-re EXPR --h-im EXPR --a A --b B --n N --mode distinct|c1|check
    contdiag check ...            # pointwise-oracle obstruction diagnostics
    contdiag oracle-compare ...   # constructed track versus the aligned pointwise oracle
    contdiag gallery list | run ID | run-all [--n N]

Fields come from four expressions, a ``--input`` CSV (header
``t,f,g,h_re,h_im``) or ``--gallery ID``. Settings resolve as command-line
flag, then ``CONTDIAG_<NAME>`` environment variable, then default. Files are
written to ``--out DIR`` only when an output directory is configured.

Exit codes: 0 ok, 1 other failure, 2 parse/config error, 3 eigenvalue gap
too small, 4 obstruction (repeated eigenvalue of ``A'`` at a coalescence
point), 5 derivative discontinuous at a coalescence point, 6 coalescence on
a whole sub-interval.
"""

from __future__ import annotations

import argparse
import os
import sys
import time
from dataclasses import dataclass

import numpy as np

from . import __version__, gallery
from . import _kernels
from .errors import ConfigError, ContDiagError
from .oracle import aligned_oracle, column_alignment
from .pipeline import PipelineOptions, check_obstruction, diagonalize_c1, diagonalize_distinct
from .serialize import atomic_write, csv_text, json_text, read_samples, track_csv
from .spectral import spectrum
from .tracks import Grid, HermitianField
from .walk import WalkOptions, count_match_events

MODES = ("distinct", "c1", "check")
ENV_PREFIX = "CONTDIAG_"

# name -> (type, default); resolved flag > environment > default
SETTINGS = {
    "a": (float, None),
    "b": (float, None),
    "n": (int, 1001),
    "mode": (str, "distinct"),
    "tol_disc": (float, 1e-20),
    "tol_match": (float, 1e-12),
    "tol_resid": (float, 1e-10),
    "tol_offdiag": (float, 1e-8),
    "eps_switch": (float, 1e-6),
    "out": (str, None),
    "seed": (int, 0),
}


@dataclass(frozen=True)
class RunConfig:
    source: dict
    a: float
    b: float
    n: int
    mode: str
    tol_disc: float
    tol_match: float
    tol_resid: float
    tol_offdiag: float
    eps_switch: float
    out: str | None
    seed: int

    def __post_init__(self):
        if self.n < 2:
            raise ConfigError("n must be at least 2")
        if not self.a < self.b:
            raise ConfigError("need a < b")
        if self.mode not in MODES:
            raise ConfigError(f"mode must be one of {', '.join(MODES)}")
        for name in ("tol_disc", "tol_match", "tol_resid", "tol_offdiag", "eps_switch"):
            if not getattr(self, name) > 0:
                raise ConfigError(f"{name} must be positive")

    @property
    def grid(self) -> Grid:
        return Grid(self.a, self.b, self.n)

    def options(self) -> PipelineOptions:
        return PipelineOptions(
            tol_disc=self.tol_disc, tol_offdiag=self.tol_offdiag, eps_switch=self.eps_switch,
            walk=WalkOptions(tol_match=self.tol_match, tol_resid=self.tol_resid),
        )

    def to_dict(self):
        return {k: getattr(self, k) for k in
                ("source", "a", "b", "n", "mode", "tol_disc", "tol_match", "tol_resid",
                 "tol_offdiag", "eps_switch", "seed")}


def _resolve(args, name, environ):
    kind, default = SETTINGS[name]
    value = getattr(args, name, None)
    if value is not None:
        return value
    raw = environ.get(ENV_PREFIX + name.upper())
    if raw is not None and raw != "":
        try:
            return kind(raw)
        except ValueError:
            raise ConfigError(f"{ENV_PREFIX}{name.upper()}={raw!r} is not a valid {kind.__name__}") from None
    return default


def build_config(args, environ=None, mode=None):
    """``(RunConfig, HermitianField)`` from parsed arguments."""
    environ = os.environ if environ is None else environ
    vals = {name: _resolve(args, name, environ) for name in SETTINGS}
    if mode is not None:
        vals["mode"] = mode
    exprs = [getattr(args, k, None) for k in ("f", "g", "h_re", "h_im")]
    given = sum(x is not None for x in (getattr(args, "input", None), getattr(args, "gallery", None)))
    if any(e is not None for e in exprs):
        given += 1
    if given != 1:
        raise ConfigError("give exactly one field source: --f/--g/--h-re/--h-im, --input or --gallery")

    if getattr(args, "gallery", None) is not None:
        entry = gallery.get(args.gallery)
        source = {"gallery": entry.id}
        exprs = [entry.f, entry.g, entry.h_re, entry.h_im]
        vals["a"] = entry.a if vals["a"] is None else vals["a"]
        vals["b"] = entry.b if vals["b"] is None else vals["b"]
        if getattr(args, "mode", None) is None and mode is None and not environ.get(ENV_PREFIX + "MODE"):
            vals["mode"] = entry.mode
    if getattr(args, "input", None) is not None:
        field = read_samples(args.input)
        source = {"input": os.path.basename(args.input)}
        vals["a"] = field.a if vals["a"] is None else vals["a"]
        vals["b"] = field.b if vals["b"] is None else vals["b"]
        if (vals["a"], vals["b"]) != (field.a, field.b):
            raise ConfigError("--a/--b must match the sample range of --input")
    else:
        exprs = [e if e is not None else "0" for e in exprs]
        if getattr(args, "gallery", None) is None:
            source = dict(zip(("f", "g", "h_re", "h_im"), exprs))
        if vals["a"] is None or vals["b"] is None:
            raise ConfigError("--a and --b are required for expression fields")
    cfg = RunConfig(source=source, **vals)
    if getattr(args, "input", None) is None:
        field = HermitianField.from_exprs(*exprs, cfg.a, cfg.b)
    return cfg, field


# -- running ----------------------------------------------------------------------

def run_mode(field: HermitianField, grid: Grid, mode: str, opts: PipelineOptions):
    """Run one pipeline; returns ``(track_or_report, summary)``."""
    if mode == "distinct":
        track = diagonalize_distinct(field, grid, opts)
    elif mode == "c1":
        track = diagonalize_c1(field, grid, opts)
    else:
        rep = check_obstruction(field, grid, opts)
        return rep, rep.summary()
    summary = track.summary()
    # switch counts against the number of places where f - lam vanishes
    if mode == "distinct" or track.decomposition is not None:
        walked = field if mode == "distinct" else track.decomposition.C
        summary["termination"] = [
            {"branch": w.branch.value, "switches": w.switch_count,
             "f_match_events": count_match_events(walked, w.branch, grid)}
            for w in track.walks
        ]
    return track, summary


def _error_report(cfg, exc):
    return {
        "status": "error",
        "exit_code": getattr(exc, "exit_code", 1),
        "error": {"type": type(exc).__name__, "message": str(exc)},
        "config": cfg.to_dict() if cfg is not None else None,
    }


def _emit(args, cfg, report, files, stream):
    out = cfg.out if cfg is not None else None
    if out:
        for name, text in files.items():
            atomic_write(os.path.join(out, name), text)
        atomic_write(os.path.join(out, f"{args.command}.json"), json_text(report))
    if args.json:
        stream.write(json_text(report))
    else:
        status = report["status"]
        line = f"{args.command}: {status} (exit {report['exit_code']})"
        if status == "error":
            line += f": {report['error']['type']}: {report['error']['message']}"
        stream.write(line + "\n")


def _oracle_compare(field, cfg, grid, opts, rng):
    ts = grid.points
    orc = aligned_oracle(field, ts)
    body = {"oracle_max_jump": orc.max_jump, "oracle_max_jump_at": orc.max_jump_at}
    rows = [ts, orc.eigenvalues[:, 0], orc.eigenvalues[:, 1]]
    header = ["t", "oracle_lambda1", "oracle_lambda2"]
    if cfg.mode != "check":
        track, summary = run_mode(field, grid, cfg.mode, opts)
        align = column_alignment(track.U, orc.frames, match_order=cfg.mode == "distinct")
        lp, lm, _, _, gap = spectrum(*field.components(ts))
        a_norm = np.sqrt(np.sum(np.abs(field.matrices(ts)) ** 2, axis=(1, 2)))
        # at a coalescence point every unit vector is an eigenvector; skip those
        usable = gap > 1e-8 * (1.0 + a_norm)
        body.update({
            "min_alignment": float(align[usable].min()) if usable.any() else None,
            "min_alignment_per_column": [float(align[usable, 0].min()), float(align[usable, 1].min())]
            if usable.any() else None,
            "excluded_degenerate_points": int((~usable).sum()),
            "column_pairing": "eigenvalue order" if cfg.mode == "distinct" else "best overlap per point",
            "track": summary,
        })
        rows += [align[:, 0], align[:, 1]]
        header += ["align1", "align2"]
    # trace and determinant identities at random points
    tr = rng.uniform(cfg.a, cfg.b, 1000)
    f, g, hr, hc = field.components(tr)
    lp, lm, _, _, _ = spectrum(f, g, hr, hc)
    scale = 1.0 + np.abs(f) + np.abs(g) + np.hypot(hr, hc)
    body["identities"] = {
        "points": int(tr.size),
        "max_trace_defect": float((np.abs(lp + lm - (f + g)) / scale).max()),
        "max_det_defect": float((np.abs(lp * lm - (f * g - hr * hr - hc * hc)) / scale ** 2).max()),
    }
    return body, {"oracle-compare.csv": csv_text(header, np.stack(rows, axis=-1))}


def cmd_run(args, stream=sys.stdout, environ=None):
    cfg = None
    t0 = time.perf_counter()
    files = {}
    try:
        cfg, field = build_config(args, environ, mode="check" if args.command == "check" else None)
        grid, opts = cfg.grid, cfg.options()
        body = {}
        if args.command == "oracle-compare":
            body, files = _oracle_compare(field, cfg, grid, opts, np.random.default_rng(cfg.seed))
        else:
            result, summary = run_mode(field, grid, cfg.mode, opts)
            body = summary
            if cfg.mode == "check":
                mid = 0.5 * (result.t[1:] + result.t[:-1])
                files["check.csv"] = csv_text(["t_mid", "oracle_jump"], np.stack([mid, result.jumps], -1))
            else:
                files[f"{args.command}.csv"] = track_csv(result)
        report = {"status": "ok", "exit_code": 0, "config": cfg.to_dict(), "result": body,
                  "backend": _kernels.BACKEND}
    except ContDiagError as exc:
        report = _error_report(cfg, exc)
        files = {}
    if args.timings:
        report["timings"] = {"total_seconds": time.perf_counter() - t0}
    _emit(args, cfg, report, files, stream)
    return report["exit_code"]


def _run_gallery_entry(entry, n, opts_overrides=None):
    t0 = time.perf_counter()
    try:
        field = entry.field()
        grid = Grid(entry.a, entry.b, n)
        _, summary = run_mode(field, grid, entry.mode, PipelineOptions())
        observed, message = 0, "ok"
    except ContDiagError as exc:
        observed, message, summary = exc.exit_code, f"{type(exc).__name__}: {exc}", None
    return {
        "id": entry.id, "mode": entry.mode, "tag": entry.tag,
        "expected_exit": entry.expected_exit, "observed_exit": observed,
        "passed": observed == entry.expected_exit, "message": message, "summary": summary,
        "seconds": time.perf_counter() - t0,
    }


def cmd_gallery(args, stream=sys.stdout, environ=None):
    environ = os.environ if environ is None else environ
    if args.action == "list":
        items = [e.to_dict() for e in gallery.entries()]
        if args.json:
            stream.write(json_text({"entries": items}))
        else:
            for e in gallery.entries():
                stream.write(f"{e.id:22s} {e.mode:9s} expect exit {e.expected_exit}  [{e.tag}] {e.description}\n")
        return 0
    try:
        n = _resolve(args, "n", environ)
        if n < 2:
            raise ConfigError("n must be at least 2")
        if args.action == "run":
            if not args.id:
                raise ConfigError("gallery run needs an entry id")
            chosen = [gallery.get(args.id)]
        else:
            chosen = gallery.entries()
        out = _resolve(args, "out", environ)
    except ContDiagError as exc:
        stream.write(f"gallery: error (exit {exc.exit_code}): {exc}\n")
        return exc.exit_code
    results = [_run_gallery_entry(e, n) for e in chosen]
    if not args.timings:
        for r in results:
            r.pop("seconds")
    report = {"n": n, "results": results, "all_passed": all(r["passed"] for r in results)}
    if out:
        atomic_write(os.path.join(out, "gallery.json"), json_text(report))
    if args.json:
        stream.write(json_text(report))
    else:
        for r in results:
            mark = "PASS" if r["passed"] else "FAIL"
            stream.write(f"{mark} {r['id']}: expected exit {r['expected_exit']}, observed {r['observed_exit']}"
                         f" ({r['message']})\n")
        stream.write(f"{sum(r['passed'] for r in results)}/{len(results)} gallery expectations met\n")
    return 0 if report["all_passed"] else 1


# -- argument parsing -------------------------------------------------------------

class _Parser(argparse.ArgumentParser):
    """Argument errors exit with the config error code."""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(ConfigError.exit_code, f"{self.prog}: error: {message}\n")


def _common(p):
    p.add_argument("--json", action="store_true", help="print the report as JSON on stdout")
    p.add_argument("--timings", action="store_true", help="include wall-clock timings (non-deterministic)")
    p.add_argument("--out", default=None, help="output directory (env CONTDIAG_OUT)")


def _run_parser(p, with_mode=True):
    src = p.add_argument_group("field")
    src.add_argument("--f", default=None, help="expression in t for A11")
    src.add_argument("--g", default=None, help="expression in t for A22")
    src.add_argument("--h-re", dest="h_re", default=None, help="expression for Re A12")
    src.add_argument("--h-im", dest="h_im", default=None, help="expression for Im A12")
    src.add_argument("--input", default=None, help="CSV with header t,f,g,h_re,h_im")
    src.add_argument("--gallery", default=None, help="use a built-in gallery field")
    grid = p.add_argument_group("grid and tolerances")
    grid.add_argument("--a", type=float, default=None)
    grid.add_argument("--b", type=float, default=None)
    grid.add_argument("--n", type=int, default=None, help="number of grid points (default 1001)")
    if with_mode:
        grid.add_argument("--mode", choices=MODES, default=None)
    grid.add_argument("--tol-disc", dest="tol_disc", type=float, default=None)
    grid.add_argument("--tol-match", dest="tol_match", type=float, default=None)
    grid.add_argument("--tol-resid", dest="tol_resid", type=float, default=None)
    grid.add_argument("--tol-offdiag", dest="tol_offdiag", type=float, default=None)
    grid.add_argument("--tol-switch", "--eps-switch", dest="eps_switch", type=float, default=None,
                      help="relative |tau| window for the l'Hopital formula")
    grid.add_argument("--seed", type=int, default=None)
    _common(p)


def build_parser():
    parser = _Parser(prog="contdiag", description="Continuous unitary diagonalization of 2x2 hermitian fields.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    _run_parser(sub.add_parser("diagonalize", help="construct U(t) and write the track"))
    _run_parser(sub.add_parser("check", help="oracle jump and hypothesis diagnostics"), with_mode=False)
    _run_parser(sub.add_parser("oracle-compare", help="compare against the aligned pointwise oracle"))
    g = sub.add_parser("gallery", help="list or run the built-in fields")
    g.add_argument("action", choices=("list", "run", "run-all"))
    g.add_argument("id", nargs="?", default=None)
    g.add_argument("--n", type=int, default=None)
    _common(g)
    return parser


def main(argv=None, stream=None, environ=None) -> int:
    stream = sys.stdout if stream is None else stream
    args = build_parser().parse_args(argv)
    if args.command == "gallery":
        return cmd_gallery(args, stream, environ)
    return cmd_run(args, stream, environ)


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
