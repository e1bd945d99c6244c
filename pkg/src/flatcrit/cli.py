"""Command-line interface: ``flatcrit <command> [options]``.

Every command prints a short human summary and then a JSON report (to
stdout, or to ``--report FILE``).  Exit codes: 0 success, 1 internal
error, 2 bad input file, 3 precondition failure.  ``FLATCRIT_LOG`` sets the
log level (DEBUG, INFO, WARNING, ...).
"""

from __future__ import annotations

import argparse
import hashlib
import logging
import math
import os
import sys
from fractions import Fraction
from importlib import resources
from pathlib import Path

from . import io as fio
from .exactnum import FieldMismatch, QuadNum, format_number, parse_number
from .surface import Mat2, SurfaceError

log = logging.getLogger("flatcrit")

EXIT_OK, EXIT_INTERNAL, EXIT_INPUT, EXIT_PRECONDITION = 0, 1, 2, 3


class InputError(Exception):
    """Unreadable or malformed input; maps to exit code 2."""


# -- argument helpers -----------------------------------------------------------

def _data_path(name: str) -> Path:
    p = Path(name)
    if p.exists():
        return p
    packaged = resources.files("flatcrit") / "data" / name
    if packaged.is_file():
        return Path(str(packaged))
    raise InputError(f"no such file: {name}")


def _read_text(name: str) -> tuple[str, str]:
    path = _data_path(name)
    try:
        text = path.read_text()
    except OSError as exc:
        raise InputError(f"cannot read {name}: {exc}") from None
    return text, hashlib.sha256(text.encode()).hexdigest()


def _load_surface(name: str, ctx):
    text, digest = _read_text(name)
    ctx.digest.update(digest.encode())
    try:
        return fio.parse_surface(text)
    except (SurfaceError, fio.FormatError) as exc:
        raise InputError(str(exc)) from None


def _exact(text: str):
    q = parse_number(text)
    return q.a if q.b == 0 else q


def _vector(text: str):
    parts = text.split(",")
    if len(parts) != 2:
        raise argparse.ArgumentTypeError("expected 'x,y'")
    try:
        return tuple(_exact(p) for p in parts)
    except (ValueError, FieldMismatch) as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def _matrix(text: str) -> Mat2:
    parts = text.split(",")
    if len(parts) != 4:
        raise argparse.ArgumentTypeError("expected 'a,b,c,d'")
    try:
        return Mat2.exact(*(_exact(p) for p in parts))
    except (ValueError, FieldMismatch) as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def _times(text: str):
    """'a:b:n' (n evenly spaced points) or a comma list."""
    try:
        if ":" in text:
            a, b, n = text.split(":")
            a, b, n = float(a), float(b), int(n)
            if n < 1:
                raise ValueError
            return [a] if n == 1 else [a + (b - a) * k / (n - 1) for k in range(n)]
        return [float(x) for x in text.split(",")]
    except ValueError:
        raise argparse.ArgumentTypeError("expected 'start:stop:count' or a comma list") from None


def _bins(text: str):
    try:
        nx, ny = (int(x) for x in text.lower().split("x"))
        if nx < 1 or ny < 1:
            raise ValueError
        return nx, ny
    except ValueError:
        raise argparse.ArgumentTypeError("expected 'NXxNY', e.g. 10x10") from None


def _num_out(x):
    if isinstance(x, (Fraction, QuadNum)):
        return {"exact": format_number(x), "value": float(x)}
    return x


def _write(path, text: str, ctx) -> None:
    Path(path).write_text(text)
    ctx.files.append(str(path))


class _Ctx:
    def __init__(self, args, argv):
        self.args = args
        self.digest = hashlib.sha256("\0".join(argv).encode())
        self.outputs: dict = {}
        self.units: dict = {}
        self.params: dict = {}
        self.warnings: list = []
        self.files: list = []
        self.lines: list = []

    def out(self, key, value, unit="", text=None):
        self.outputs[key] = _num_out(value)
        if unit:
            self.units[key] = unit
        shown = text if text is not None else (format(float(value), ".10g") if isinstance(value, (float, Fraction, QuadNum)) else value)
        self.lines.append(f"{key.replace('_', ' ')} = {shown}" + (f" {unit}" if unit and unit != "1" else ""))


# -- commands ---------------------------------------------------------------------

def cmd_validate(a, ctx):
    from .surface import cone_angles, genus

    s = _load_surface(a.surface, ctx)
    cones = cone_angles(s)
    ctx.out("valid", True, text="yes")
    ctx.out("polygons", len(s.polygons))
    ctx.out("kind", s.kind)
    ctx.out("genus", genus(s))
    ctx.out("cone_angles_over_2pi", [c.multiplicity for c in cones], text=", ".join(str(c.multiplicity) for c in cones))
    if s.boundary:
        ctx.warnings.append(f"{len(s.boundary)} marked boundary edge(s)")


def cmd_area(a, ctx):
    from .surface import area

    s = _load_surface(a.surface, ctx)
    A = area(s)
    ctx.out("area", A, "length^2", text=f"{format_number(A)} ({float(A):.17g})" if s.is_exact else None)


def cmd_saddle(a, ctx):
    from .saddle import connections_to_csv, enumerate_saddle_connections, shortest_saddle_connection

    s = _load_surface(a.surface, ctx)
    ctx.params["L"] = a.L
    scs = enumerate_saddle_connections(s, a.L)
    ctx.warnings.extend(scs.warnings)
    ctx.out("count", len(scs))
    length, w = shortest_saddle_connection(s)
    ctx.out("shortest_length", float(length), "length")
    ctx.out("shortest_holonomy", [_num_out(c) for c in w.holonomy], text=", ".join(format_number(c) for c in w.holonomy))
    if a.out:
        _write(a.out, connections_to_csv(scs), ctx)


def _envelope(a, ctx):
    from .teich import systole_envelope

    s = _load_surface(a.surface, ctx)
    ctx.params.update(T=a.T, direction=[_num_out(c) for c in a.direction] if a.direction else "horizontal")
    return systole_envelope(s, a.T, direction=a.direction)


def cmd_systole_curve(a, ctx):
    from .teich import criterion_integral, envelope_to_csv

    env = _envelope(a, ctx)
    ctx.out("pieces", len(env.pieces))
    ctx.out("min_delta_prime", env.min_value(), "length")
    ctx.out("integral", criterion_integral(env), "length^2*time")
    if a.out:
        _write(a.out, envelope_to_csv(env), ctx)


def cmd_criterion(a, ctx):
    from .teich import criterion_integral, growth_verdict

    env = _envelope(a, ctx)
    full = criterion_integral(env)
    half = criterion_integral(env, a.T / 2)
    ctx.out("integral", full, "length^2*time")
    ctx.out("integral_half_horizon", half, "length^2*time")
    ctx.out("increment", full - half, "length^2*time")
    ctx.out("min_delta_prime", env.min_value(), "length")
    ctx.out("growth", growth_verdict([a.T / 2, a.T], [half, full], a.rel_tol))
    ctx.params["rel_tol"] = a.rel_tol


def cmd_cheung_eskin(a, ctx):
    from .teich import cheung_eskin_C, log_law_stat

    env = _envelope(a, ctx)
    ctx.params.update(t0=a.t0, log_t0=a.log_t0)
    C, bounded = cheung_eskin_C(env, a.t0)
    ctx.out("C", C, "1")
    ctx.out("bounded", bounded, text="yes" if bounded else "no (sup at the horizon)")
    if env.T > a.log_t0:
        ctx.out("log_law_stat", log_law_stat(env, a.log_t0), "1")


def cmd_thm12(a, ctx):
    from .teich import read_profile_csv, thm12_growth

    text, digest = _read_text(a.profile)
    ctx.digest.update(digest.encode())
    try:
        prof = read_profile_csv(text)
    except (ValueError, KeyError) as exc:
        raise InputError(f"profile: {exc}") from None
    val, verdict = thm12_growth(prof, a.rel_tol)
    ctx.params.update(horizon=float(prof.t[-1]), rel_tol=a.rel_tol)
    ctx.out("integral", val, "1")
    ctx.out("growth", verdict)


def cmd_veech_verify(a, ctx):
    from .veech import verify_affine_automorphism

    s = _load_surface(a.surface, ctx)
    text, digest = _read_text(a.cert)
    ctx.digest.update(digest.encode())
    try:
        cert = fio.parse_certificate(text, s)
    except (fio.FormatError, ValueError, FieldMismatch) as exc:
        raise InputError(f"certificate: {exc}") from None
    rep = verify_affine_automorphism(s, cert)
    ctx.out("passed", rep.passed, text="yes" if rep.passed else "no")
    ctx.out("pieces", len(cert.pieces))
    ctx.out("checked_segments", rep.checked_segments)
    ctx.out("truncated_segments", len(rep.truncated))
    ctx.outputs["failures"] = list(rep.failures)
    ctx.lines.extend(f"  failure: {f}" for f in rep.failures[:20])
    if rep.truncated:
        ctx.warnings.append(f"{len(rep.truncated)} segment(s) touch the marked boundary and were not checked")


def cmd_recurrence(a, ctx):
    from .veech import is_periodic, recurrence_profile

    gens = a.gen or []
    ctx.params.update(word_bound=a.word_bound, generators=[[_num_out(x) for x in g.entries()] for g in gens])
    samples = recurrence_profile(gens, a.times, a.word_bound)
    ctx.out("samples", len(samples))
    ctx.out("max_epsilon", max(r.epsilon for r in samples), "hyperbolic distance")
    period = is_periodic(gens, a.word_bound)
    ctx.out("period", period, "time", text="none found" if period is None else f"{period:.17g}")
    ctx.outputs["profile"] = [{"t": r.t, "epsilon": r.epsilon, "word": list(r.word)} for r in samples]
    if a.out:
        _write(a.out, fio.recurrence_to_csv(samples), ctx)


def _start(text: str, s):
    name, colon, rest = text.rpartition(":")
    if not colon or name not in s.names:
        raise InputError(f"start must be 'POLYGON:x,y' with a polygon of the surface, got {text!r}")
    try:
        pt = _vector(rest)
    except argparse.ArgumentTypeError as exc:
        raise InputError(f"start: {exc}") from None
    return (s.names.index(name), pt)


def cmd_flow(a, ctx):
    from .flow import trace

    s = _load_surface(a.surface, ctx)
    st = _start(a.start, s)
    ctx.params.update(length=a.length, direction=[_num_out(c) for c in a.direction])
    traj = trace(s, st, a.direction, a.length)
    ctx.out("status", traj.status)
    ctx.out("length", traj.length, "length")
    ctx.out("segments", len(traj.segments))
    p, x = traj.end
    ctx.out("end_polygon", s.names[p])
    ctx.out("end_point", [float(c) for c in x], text=", ".join(f"{float(c):.17g}" for c in x))
    if traj.escape_time is not None:
        ctx.out("escape_time", traj.escape_time, "length")
    if a.out:
        _write(a.out, fio.trajectory_to_csv(traj, s), ctx)


def cmd_birkhoff(a, ctx):
    from .flow import birkhoff_average, random_starts

    s = _load_surface(a.surface, ctx)
    ctx.params.update(T=a.T, observable=a.observable, starts=a.starts, seed=a.seed)
    starts = random_starts(s, a.starts, a.seed)
    res = birkhoff_average(s, a.direction, a.observable, a.T, starts, threads=a.threads)
    ctx.outputs["averages"] = res.averages
    ctx.lines.append("averages = " + ", ".join("flagged" if v is None else f"{v:.6f}" for v in res.averages))
    ctx.out("dispersion", res.dispersion, "1")
    flagged = sum(1 for f in res.flags if f)
    if flagged:
        ctx.warnings.append(f"{flagged} start(s) flagged (hit a cone point or escaped)")


def cmd_equidist(a, ctx):
    from .flow import equidistribution_test

    s = _load_surface(a.surface, ctx)
    ctx.params.update(T=a.T, bins=list(a.bins), seed=a.seed)
    h = equidistribution_test(s, a.direction, a.T, bins=a.bins, seed=a.seed)
    ctx.out("discrepancy", h.discrepancy, "1")
    ctx.out("status", h.status)
    if a.out:
        _write(a.out, fio.histogram_to_json(h), ctx)
    if a.csv:
        _write(a.csv, fio.histogram_to_csv(h), ctx)


def cmd_chamanara(a, ctx):
    from .flow import chamanara_baker_certificate, chamanara_surface
    from .surface import area

    s = chamanara_surface(a.level)
    ctx.params["level"] = a.level
    ctx.out("area", area(s), "length^2", text=format_number(area(s)))
    ctx.out("boundary_edges", len(s.boundary))
    if a.out:
        _write(a.out, fio.format_surface(s), ctx)
    if a.cert_out:
        _write(a.cert_out, fio.format_certificate(chamanara_baker_certificate(a.level), s), ctx)


def cmd_escape(a, ctx):
    from .flow import chamanara_surface, escape_mass_estimate

    if (a.surface is None) == (a.level is None):
        raise ValueError("give exactly one of --surface and --level")
    s = _load_surface(a.surface, ctx) if a.surface else chamanara_surface(a.level)
    ctx.params.update(T=a.T, samples=a.samples, seed=a.seed, level=a.level)
    frac = escape_mass_estimate(s, a.direction, a.T, a.samples, a.seed, threads=a.threads)
    ctx.out("escape_fraction", frac, "1")
    ctx.out("standard_error", math.sqrt(frac * (1 - frac) / a.samples), "1")


def cmd_plot(a, ctx):
    from .plot import PlotError, plot_csv

    text, digest = _read_text(a.csv)
    ctx.digest.update(digest.encode())
    try:
        svg = plot_csv(text, a.kind)
    except PlotError as exc:
        raise InputError(str(exc)) from None
    _write(a.out, svg, ctx)
    ctx.out("svg", str(a.out))


# -- parser ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--report", default="-", help="JSON report path ('-' for stdout)")
    common.add_argument("--threads", type=int, default=1, help="worker processes for sampling commands")

    p = argparse.ArgumentParser(prog="flatcrit", description="Translation-surface toolkit.")
    sub = p.add_subparsers(dest="command", required=True)

    def add(name, fn, help_):
        sp = sub.add_parser(name, parents=[common], help=help_)
        sp.set_defaults(fn=fn)
        return sp

    def surf(sp):
        sp.add_argument("--surface", required=True, help=".tsf file (shipped fixtures resolve by name)")

    def env_args(sp):
        surf(sp)
        sp.add_argument("--T", type=float, required=True, help="horizon of the geodesic")
        sp.add_argument("--direction", type=_vector, default=None, help="flow direction 'x,y' (exact syntax)")

    sp = add("validate", cmd_validate, "check a surface file")
    surf(sp)
    sp = add("area", cmd_area, "exact area")
    surf(sp)
    sp = add("saddle", cmd_saddle, "enumerate saddle connections up to length L")
    surf(sp)
    sp.add_argument("--L", type=float, required=True)
    sp.add_argument("--out", help="CSV of connections")
    sp = add("systole-curve", cmd_systole_curve, "shortest saddle connection along g_t")
    env_args(sp)
    sp.add_argument("--out", help="CSV: t,delta_prime,d_prime,integral_to_t")
    sp = add("criterion", cmd_criterion, "integral of delta'_t^2 up to T")
    env_args(sp)
    sp.add_argument("--rel-tol", type=float, default=1e-3)
    sp = add("cheung-eskin", cmd_cheung_eskin, "sup of d'(t) - log(t)/2 and the log-law statistic")
    env_args(sp)
    sp.add_argument("--t0", type=float, default=1.0)
    sp.add_argument("--log-t0", type=float, default=math.e)
    sp = add("thm12", cmd_thm12, "thick-part profile integral")
    sp.add_argument("--profile", required=True, help="CSV: t,eps,C,sumD,delta")
    sp.add_argument("--rel-tol", type=float, default=1e-3)
    sp = add("veech-verify", cmd_veech_verify, "verify an affine automorphism certificate")
    surf(sp)
    sp.add_argument("--cert", required=True)
    sp = add("recurrence", cmd_recurrence, "distance from g_t to a word ball")
    sp.add_argument("--gen", type=_matrix, action="append", help="generator 'a,b,c,d' (repeatable)")
    sp.add_argument("--times", type=_times, required=True)
    sp.add_argument("--word-bound", type=int, default=4)
    sp.add_argument("--out", help="CSV: t,epsilon,word")
    sp = add("flow", cmd_flow, "trace one trajectory")
    surf(sp)
    sp.add_argument("--start", required=True, help="'POLYGON:x,y'")
    sp.add_argument("--direction", type=_vector, required=True)
    sp.add_argument("--length", type=float, required=True)
    sp.add_argument("--out", help="CSV of segments")
    sp = add("birkhoff", cmd_birkhoff, "Birkhoff averages from random starts")
    surf(sp)
    sp.add_argument("--direction", type=_vector, required=True)
    sp.add_argument("--observable", default="strip-x:0:0.5")
    sp.add_argument("--T", type=float, required=True)
    sp.add_argument("--starts", type=int, default=10)
    sp.add_argument("--seed", type=int, required=True)
    sp = add("equidist", cmd_equidist, "occupation-time histogram and discrepancy")
    surf(sp)
    sp.add_argument("--direction", type=_vector, required=True)
    sp.add_argument("--T", type=float, required=True)
    sp.add_argument("--bins", type=_bins, default=(10, 10))
    sp.add_argument("--seed", type=int, required=True)
    sp.add_argument("--out", help="histogram JSON")
    sp.add_argument("--csv", help="histogram CSV")
    sp = add("chamanara", cmd_chamanara, "write a truncated infinite-genus surface")
    sp.add_argument("--level", type=int, required=True)
    sp.add_argument("--out", help=".tsf output")
    sp.add_argument("--cert-out", help="diag(2, 1/2) certificate output")
    sp = add("escape", cmd_escape, "fraction of starts crossing the marked boundary")
    sp.add_argument("--surface")
    sp.add_argument("--level", type=int, help="Chamanara truncation level instead of a file")
    sp.add_argument("--direction", type=_vector, default=(1, 1))
    sp.add_argument("--T", type=float, required=True)
    sp.add_argument("--samples", type=int, default=1000)
    sp.add_argument("--seed", type=int, required=True)
    sp = add("plot", cmd_plot, "deterministic SVG of a CSV dump")
    sp.add_argument("--csv", required=True)
    sp.add_argument("--kind", choices=["systole", "recurrence", "histogram"], required=True)
    sp.add_argument("--out", required=True)
    return p


def _setup_logging() -> None:
    level = os.environ.get("FLATCRIT_LOG", "WARNING").upper()
    logging.basicConfig(
        level=int(level) if level.isdigit() else getattr(logging, level, logging.WARNING),
        format="%(levelname)s %(name)s: %(message)s",
        stream=sys.stderr,
    )


def _emit(ctx, command: str, code: int, error: str | None = None) -> None:
    report = {
        "command": command,
        "exit_code": code,
        "inputs_digest": ctx.digest.hexdigest(),
        "parameters": ctx.params,
        "outputs": ctx.outputs,
        "units": ctx.units,
        "warnings": ctx.warnings,
        "files": ctx.files,
    }
    if error is not None:
        report["error"] = error
    text = fio.to_json(report)
    dest = getattr(ctx.args, "report", "-")
    if dest == "-":
        print(text)
    else:
        Path(dest).write_text(text + "\n")


def main(argv=None) -> int:
    _setup_logging()
    parser = build_parser()
    argv = list(sys.argv[1:] if argv is None else argv)
    args = parser.parse_args(argv)
    if args.threads < 1:
        parser.error("--threads must be >= 1")
    ctx = _Ctx(args, argv)
    code, error = EXIT_OK, None
    try:
        args.fn(args, ctx)
    except InputError as exc:
        code, error = EXIT_INPUT, str(exc)
    except (ValueError, ZeroDivisionError, FieldMismatch) as exc:
        code, error = EXIT_PRECONDITION, str(exc)
    except Exception as exc:  # noqa: BLE001 - reported, not swallowed
        log.debug("internal error", exc_info=True)
        code, error = EXIT_INTERNAL, f"{type(exc).__name__}: {exc}"
    for line in ctx.lines:
        print(line)
    for w in ctx.warnings:
        print(f"warning: {w}", file=sys.stderr)
    if error is not None:
        print(f"error: {error}", file=sys.stderr)
    _emit(ctx, args.command, code, error)
    return code


if __name__ == "__main__":
    sys.exit(main())
