"""Command-line entry point: ``pt-spectra <subcommand> ...``.

Subcommands
    wedges    Stokes-wedge geometry and planned contour (optional SVG diagram)
    shoot     eigenvalues by complex-contour shooting
    truncate  oscillator-basis truncation eigenvalues, optionally a stabilization trace
    compare   shooting vs truncation report
    wkbfit    growth-exponent fit from a spectrum CSV

Exit status: 0 success, 1 domain error, 2 usage error.
"""
from __future__ import annotations

import argparse
import contextlib
import csv
import io
import json
import math
import sys
from dataclasses import dataclass
from typing import Iterable, Optional

from . import analysis, eig, hobasis, ode, shooting, wedges
from .errors import DomainError, EigenSolverError, IntegrationError

SPECTRUM_COLUMNS = ("method", "epsilon", "branch", "index", "re_E", "im_E", "residual", "N")


def fmt(x) -> str:
    """12 significant digits; empty string for None."""
    if x is None:
        return ""
    if isinstance(x, (int,)) and not isinstance(x, bool):
        return str(x)
    return format(float(x), ".12g")


def _num(x):
    if x is None:
        return None
    x = float(x)
    if not math.isfinite(x):
        return None
    return float(format(x, ".12g"))


@dataclass(frozen=True)
class SpectrumRow:
    method: str
    epsilon: float
    branch: Optional[int]
    index: int
    E: complex
    residual: Optional[float] = None
    N: Optional[int] = None

    def cells(self) -> list[str]:
        return [self.method, fmt(self.epsilon), "" if self.branch is None else str(self.branch),
                str(self.index), fmt(self.E.real), fmt(self.E.imag), fmt(self.residual),
                "" if self.N is None else str(self.N)]

    def as_json(self) -> dict:
        return {"method": self.method, "epsilon": _num(self.epsilon), "branch": self.branch,
                "index": self.index, "re_E": _num(self.E.real), "im_E": _num(self.E.imag),
                "residual": _num(self.residual), "N": self.N}


def shooting_rows(results, epsilon, branch) -> list[SpectrumRow]:
    return [SpectrumRow("shooting", epsilon, branch, i, r.E, abs(r.residual))
            for i, r in enumerate(results)]


def truncation_rows(spec_set: eig.SpectrumSet, epsilon, N) -> list[SpectrumRow]:
    return [SpectrumRow("truncation", epsilon, None, i, complex(v), None, N)
            for i, v in enumerate(spec_set.values)]


def _writer(sink):
    return csv.writer(sink, lineterminator="\n")


def emit_spectrum_csv(rows: Iterable[SpectrumRow], sink) -> None:
    """Header plus one row per eigenvalue, in ascending index order."""
    w = _writer(sink)
    w.writerow(SPECTRUM_COLUMNS)
    for row in sorted(rows, key=lambda r: r.index):
        w.writerow(row.cells())


def emit_json(payload: dict, sink) -> None:
    json.dump(payload, sink, indent=2, sort_keys=False)
    sink.write("\n")


# --- SVG -----------------------------------------------------------------

def _deg(theta: float) -> str:
    d = math.degrees(theta)
    s = f"{d:.1f}"
    return "0.0" if s == "-0.0" else s


def emit_wedge_svg(pair: wedges.WedgePair, contour: wedges.Contour, sink, size: int = 400) -> None:
    """Unit-circle frame with shaded wedge sectors, the contour, and angle labels in degrees."""
    c = size / 2.0
    rad = 0.4 * size  # unit circle radius in pixels; contour radius maps onto it

    def pt(z: complex) -> tuple[float, float]:
        return c + rad * z.real, c - rad * z.imag

    def sector(w: wedges.StokesWedge) -> str:
        a0, a1 = w.center - w.half_opening, w.center + w.half_opening
        x0, y0 = pt(complex(math.cos(a0), math.sin(a0)))
        x1, y1 = pt(complex(math.cos(a1), math.sin(a1)))
        return (f'<path d="M {c:.2f} {c:.2f} L {x0:.2f} {y0:.2f} '
                f'A {rad:.2f} {rad:.2f} 0 0 1 {x1:.2f} {y1:.2f} Z" '
                f'fill="#9ecae1" fill-opacity="0.5" stroke="#3182bd"/>')

    def label(w: wedges.StokesWedge, name: str) -> str:
        x, y = pt(1.12 * complex(math.cos(w.center), math.sin(w.center)))
        return (f'<text x="{x:.2f}" y="{y:.2f}" font-size="12" text-anchor="middle" '
                f'class="{name}">{_deg(w.center)}°</text>')

    scale = 1.0 / contour.radius
    poly = " ".join("{:.2f},{:.2f}".format(*pt(v * scale)) for v in contour.vertices)
    lines = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{size}" height="{size}" '
        f'viewBox="0 0 {size} {size}">',
        f'<title>Stokes wedges, epsilon={fmt(pair.epsilon)}, branch={pair.branch}</title>',
        f'<circle cx="{c:.2f}" cy="{c:.2f}" r="{rad:.2f}" fill="none" stroke="#888"/>',
        f'<line x1="{c - rad:.2f}" y1="{c:.2f}" x2="{c + rad:.2f}" y2="{c:.2f}" stroke="#ccc"/>',
        f'<line x1="{c:.2f}" y1="{c - rad:.2f}" x2="{c:.2f}" y2="{c + rad:.2f}" stroke="#ccc"/>',
        sector(pair.left),
        sector(pair.right),
        f'<polyline points="{poly}" fill="none" stroke="#d62728" stroke-width="2"/>',
        label(pair.left, "left-center"),
        label(pair.right, "right-center"),
        f'<text x="10" y="20" font-size="12" class="opening">opening {_deg(pair.right.opening)}°</text>',
        f'<text x="10" y="36" font-size="12">contour radius {contour.radius:.4g}</text>',
        "</svg>",
    ]
    sink.write("\n".join(lines) + "\n")


# --- argument parsing ----------------------------------------------------

class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_help(sys.stderr)
        sys.stderr.write(f"{self.prog}: error: {message}\n")
        raise SystemExit(2)


def _add_output(p):
    p.add_argument("--out", default="-", help="output path (default stdout)")
    p.add_argument("--format", choices=("csv", "json"), default="csv")


def _add_control(p):
    p.add_argument("--mode", choices=("fixed", "adaptive"), default="adaptive")
    p.add_argument("--step", type=float, default=1e-3, help="fixed-mode arclength step")
    p.add_argument("--rtol", type=float, default=1e-10)
    p.add_argument("--atol", type=float, default=1e-12)
    p.add_argument("--max-steps", type=int, default=10**6)
    p.add_argument("--decay-target", type=float, default=wedges.DEFAULT_DECAY_TARGET)


def _int_list(text: str) -> list[int]:
    try:
        return [int(t) for t in text.split(",") if t.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="pt-spectra", description=__doc__.split("\n")[0])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    parser.set_defaults(_subparsers=sub.choices)

    p = sub.add_parser("wedges", help="wedge geometry and contour")
    p.add_argument("--epsilon", type=float, required=True)
    p.add_argument("--branch", type=int, default=0)
    p.add_argument("--energy-hint", type=float, default=1.0)
    p.add_argument("--decay-target", type=float, default=wedges.DEFAULT_DECAY_TARGET)
    p.add_argument("--svg", help="write an SVG wedge diagram to this path")
    _add_output(p)

    p = sub.add_parser("shoot", help="eigenvalues by contour shooting")
    p.add_argument("--epsilon", type=float, required=True)
    p.add_argument("--branch", type=int, default=0)
    p.add_argument("--emin", type=float, default=0.0)
    p.add_argument("--emax", type=float, default=12.0)
    p.add_argument("--grid", type=int, default=161)
    _add_control(p)
    _add_output(p)

    p = sub.add_parser("truncate", help="oscillator-basis truncation eigenvalues")
    p.add_argument("--epsilon", type=int, required=True)
    p.add_argument("--n", type=int, default=100, help="matrix dimension")
    p.add_argument("--trace", type=_int_list, help="comma-separated N values for a stabilization trace")
    p.add_argument("--k", type=int, default=10, help="levels per trace row")
    p.add_argument("--tol", type=float, default=analysis.DEFAULT_SETTLE_TOL, help="settle tolerance")
    p.add_argument("--matrix", help="also write the N x N matrix as CSV (row,col,re,im)")
    _add_output(p)

    p = sub.add_parser("compare", help="shooting vs truncation")
    p.add_argument("--epsilon", type=int, required=True)
    p.add_argument("--levels", type=int, default=6)
    p.add_argument("--nmax", type=int, default=100)
    p.add_argument("--tol", type=float, default=analysis.DEFAULT_SETTLE_TOL)
    _add_output(p)

    p = sub.add_parser("wkbfit", help="fit ln E_n against ln(n + 1/2)")
    p.add_argument("--input", required=True, help="spectrum CSV (as written by shoot/truncate)")
    p.add_argument("--from", dest="n_from", type=int, required=True)
    p.add_argument("--to", dest="n_to", type=int, required=True)
    p.add_argument("--method", default=None, help="only use rows with this method")
    _add_output(p)
    return parser


# --- subcommands -----------------------------------------------------------

def _control(args) -> ode.StepControl:
    try:
        return ode.StepControl(args.mode, args.step, args.rtol, args.atol, args.max_steps)
    except ValueError as exc:
        raise DomainError(str(exc))


def _table(sink, header, rows):
    w = _writer(sink)
    w.writerow(header)
    for r in rows:
        w.writerow([fmt(v) if isinstance(v, float) else ("" if v is None else str(v)) for v in r])


def cmd_wedges(args, sink):
    pair = wedges.wedge_geometry(args.epsilon, args.branch)
    contour = wedges.plan_contour(pair, args.energy_hint, args.decay_target)
    ends = {"left": contour.vertices[0], "right": contour.vertices[-1]}
    rows = []
    for name, w in (("left", pair.left), ("right", pair.right)):
        rows.append([name, math.degrees(w.center), math.degrees(w.half_opening),
                     math.degrees(w.opening), ends[name].real, ends[name].imag])
    if args.format == "json":
        emit_json({
            "meta": {"epsilon": _num(args.epsilon), "branch": args.branch,
                     "energy_hint": _num(args.energy_hint), "decay_target": _num(args.decay_target),
                     "contour_radius": _num(contour.radius)},
            "rows": [dict(zip(("wedge", "center_deg", "half_opening_deg", "opening_deg",
                                "endpoint_re", "endpoint_im"),
                               [r[0]] + [_num(v) for v in r[1:]])) for r in rows],
        }, sink)
    else:
        _table(sink, ("wedge", "center_deg", "half_opening_deg", "opening_deg",
                      "endpoint_re", "endpoint_im"), rows)
    if args.svg:
        with open(args.svg, "w", encoding="utf-8", newline="\n") as fh:
            emit_wedge_svg(pair, contour, fh)


def cmd_shoot(args, sink):
    ctl = _control(args)
    spec = shooting.ProblemSpec(args.epsilon, args.branch, ctl, args.decay_target,
                                args.emin, args.emax, args.grid)
    report = shooting.spectrum_report(spec)
    rows = shooting_rows(report.results, args.epsilon, args.branch)
    if args.format == "json":
        hint = max(abs(args.emin), abs(args.emax))
        emit_json({
            "meta": {"step_mode": ctl.mode, "step": _num(ctl.step), "rel_tol": _num(ctl.rel_tol),
                     "abs_tol": _num(ctl.abs_tol), "decay_target": _num(args.decay_target),
                     "contour_radius": _num(spec.contour(hint).radius),
                     "window": [_num(args.emin), _num(args.emax)], "grid": args.grid,
                     "spurious_brackets": [[_num(b.lo), _num(b.hi)] for b, _ in report.spurious]},
            "rows": [r.as_json() for r in rows],
        }, sink)
    else:
        emit_spectrum_csv(rows, sink)


def _write_matrix(path, h: hobasis.TruncatedHamiltonian):
    with open(path, "w", encoding="utf-8", newline="") as fh:
        w = _writer(fh)
        w.writerow(("row", "col", "re", "im"))
        for m in range(h.N):
            for n in range(h.N):
                z = h.entries[m, n]
                w.writerow((m, n, fmt(z.real), fmt(z.imag)))


def cmd_truncate(args, sink):
    if args.trace:
        trace = analysis.stabilization_trace(args.epsilon, args.trace, args.k, args.tol)
        settled = analysis.settled_count(trace, args.tol) if len(trace.n_values) >= 3 else None
        rows = [(n, j, z.real, z.imag) for n, row in trace.rows() for j, z in enumerate(row)]
        if args.format == "json":
            emit_json({
                "meta": {"epsilon": args.epsilon, "k": args.k, "settle_tol": _num(args.tol),
                         "settled_count": settled, "ordering": "modulus"},
                "rows": [{"N": n, "level": j, "re_E": _num(a), "im_E": _num(b)} for n, j, a, b in rows],
            }, sink)
        else:
            _table(sink, ("N", "level", "re_E", "im_E"), rows)
    else:
        h = hobasis.build(args.epsilon, args.n)
        s = eig.eigenvalues(h)
        rows = truncation_rows(s, args.epsilon, args.n)
        if args.format == "json":
            real, pairs, unpaired = eig.conjugate_pair_audit(s)
            emit_json({
                "meta": {"epsilon": args.epsilon, "N": args.n, "real_count": real,
                         "pair_count": pairs, "unpaired": len(unpaired),
                         "pt_signature": hobasis.pt_signature_check(h)},
                "rows": [r.as_json() for r in rows],
            }, sink)
        else:
            emit_spectrum_csv(rows, sink)
    if args.matrix:
        _write_matrix(args.matrix, hobasis.build(args.epsilon, args.n))


def cmd_compare(args, sink):
    rep = analysis.compare_methods(args.epsilon, args.levels, args.nmax, args.tol)
    if args.format == "json":
        d = rep.to_dict()
        d["shooting"] = [[_num(a), _num(b)] for a, b in d["shooting"]]
        for lv in d["levels"]:
            for key in ("re_E", "im_E", "abs_deviation", "rel_deviation"):
                lv[key] = _num(lv[key])
        d["settle_tol"] = _num(d["settle_tol"])
        emit_json({"meta": {"ordering": "modulus", "shooting_branch": 0}, **d}, sink)
    else:
        rows = []
        for j, t in enumerate(rep.truncation):
            m = rep.matched_level[j]
            s = rep.shooting[m] if m >= 0 else None
            rows.append((j, t.real, t.imag, m, None if s is None else s.real,
                         rep.abs_deviation[j], rep.rel_deviation[j], rep.verdicts[j]))
        _table(sink, ("index", "re_E", "im_E", "matched_shooting_level", "shooting_re_E",
                      "abs_deviation", "rel_deviation", "verdict"), rows)


def read_spectrum_csv(path, method=None) -> list[tuple[int, float]]:
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        missing = {"index", "re_E"} - set(reader.fieldnames or ())
        if missing:
            raise DomainError(f"{path}: missing columns {sorted(missing)}")
        out = []
        for row in reader:
            if method and row.get("method") != method:
                continue
            out.append((int(row["index"]), float(row["re_E"])))
    return out


def cmd_wkbfit(args, sink):
    levels = read_spectrum_csv(args.input, args.method)
    slope, stderr = analysis.wkb_growth_fit(levels, args.n_from, args.n_to)
    count = sum(1 for n, _ in levels if args.n_from <= n <= args.n_to)
    if args.format == "json":
        emit_json({"meta": {"input": str(args.input)},
                   "rows": [{"slope": _num(slope), "stderr": _num(stderr), "n_from": args.n_from,
                             "n_to": args.n_to, "count": count}]}, sink)
    else:
        _table(sink, ("slope", "stderr", "n_from", "n_to", "count"),
               [(slope, stderr, args.n_from, args.n_to, count)])


COMMANDS = {"wedges": cmd_wedges, "shoot": cmd_shoot, "truncate": cmd_truncate,
            "compare": cmd_compare, "wkbfit": cmd_wkbfit}


@contextlib.contextmanager
def _open_sink(path):
    if path in (None, "-"):
        yield sys.stdout
    else:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            yield fh


def run(argv=None) -> int:
    parser = build_parser()
    try:
        args, extra = parser.parse_known_args(argv)
        if extra:
            # report against the subcommand so its flags appear in the help text
            args._subparsers[args.command].error(f"unrecognized arguments: {' '.join(extra)}")
    except SystemExit as exc:
        return int(exc.code or 0)
    buf = io.StringIO()
    try:
        COMMANDS[args.command](args, buf)
    except (DomainError, IntegrationError, EigenSolverError) as exc:
        sys.stderr.write(f"pt-spectra: error: {exc}\n")
        return 1
    try:
        with _open_sink(args.out) as sink:
            sink.write(buf.getvalue())
    except OSError as exc:
        sys.stderr.write(f"pt-spectra: cannot write output: {exc}\n")
        return 1
    return 0


def main():
    sys.exit(run())


if __name__ == "__main__":
    main()
