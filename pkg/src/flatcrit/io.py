"""Text formats: surfaces (.tsf), certificates (.cert), CSV and JSON dumps.

A surface file looks like::

    # unit torus
    [field]
    D = 0
    label = torus
    [polygon T]
    0, 0
    1, 0
    1, 1
    0, 1
    [gluing]
    T.0 <-> T.2
    T.1 <-> T.3
    [boundary]

Numbers use the exact syntax of :func:`flatcrit.exactnum.parse_number`
(``1/2``, ``1 + 1/2*sqrt(2)``).  ``kind = approximate`` under ``[field]``
reads coordinates as binary64 floats instead.
"""

from __future__ import annotations

import csv
import io
import json
import math
from fractions import Fraction
from pathlib import Path

from .exactnum import FieldMismatch, QuadNum, format_number, parse_number
from .surface import Mat2, SurfaceError, TranslationSurface, build_surface

__all__ = [
    "FormatError",
    "parse_surface",
    "read_surface",
    "format_surface",
    "write_surface",
    "parse_certificate",
    "read_certificate",
    "format_certificate",
    "write_certificate",
    "recurrence_to_csv",
    "trajectory_to_csv",
    "histogram_to_json",
    "histogram_to_csv",
    "to_json",
]


class FormatError(ValueError):
    """Malformed input file; the message names the line."""


def _sections(text: str):
    """Yield (section header, [(line number, content)])."""
    head, body = None, []
    out = []
    for n, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if line.startswith("[") and line.endswith("]"):
            if head is not None:
                out.append((head, body))
            head, body = (line[1:-1].strip(), n), []
        elif head is None:
            raise FormatError(f"line {n}: content before first section")
        else:
            body.append((n, line))
    if head is not None:
        out.append((head, body))
    return out


def _keyvals(body):
    kv = {}
    for n, line in body:
        if "=" not in line:
            raise FormatError(f"line {n}: expected key = value")
        k, v = line.split("=", 1)
        kv[k.strip()] = (n, v.strip())
    return kv


def _num(text: str, n: int, D: int, approx: bool):
    try:
        if approx:
            return float(text)
        return parse_number(text, D)
    except (ValueError, FieldMismatch) as exc:
        raise FormatError(f"line {n}: bad number {text!r} ({exc})") from None


def _pair(text: str, n: int, D: int, approx: bool):
    parts = text.split(",")
    if len(parts) != 2:
        raise FormatError(f"line {n}: expected 'x, y'")
    return tuple(_num(p.strip(), n, D, approx) for p in parts)


def _edge_ref(text: str, n: int):
    name, dot, idx = text.strip().rpartition(".")
    if not dot or not name or not idx.isdigit():
        raise FormatError(f"line {n}: bad edge reference {text.strip()!r}")
    return (name, int(idx))


def parse_surface(text: str) -> TranslationSurface:
    """Parse and validate a surface; invalid geometry raises SurfaceError."""
    secs = _sections(text)
    D, label, approx = 0, "", False
    polygons, gluings, boundary = [], [], []
    for (head, hn), body in secs:
        if head == "field":
            kv = _keyvals(body)
            if "D" in kv:
                n, v = kv["D"]
                try:
                    D = int(v)
                except ValueError:
                    raise FormatError(f"line {n}: D must be an integer") from None
                if D < 0:
                    raise FormatError(f"line {n}: D must be nonnegative")
            label = kv.get("label", (0, ""))[1]
            approx = kv.get("kind", (0, "exact"))[1] == "approximate"
    for (head, hn), body in secs:
        if head == "field":
            continue
        if head.startswith("polygon"):
            name = head[len("polygon"):].strip()
            if not name:
                raise FormatError(f"line {hn}: polygon needs a name")
            polygons.append((name, [_pair(line, n, D, approx) for n, line in body]))
        elif head == "gluing":
            for n, line in body:
                flip = line.endswith(" flip")
                if flip:
                    line = line[: -len(" flip")]
                if "<->" not in line:
                    raise FormatError(f"line {n}: expected 'P.i <-> Q.j'")
                a, b = line.split("<->")
                entry = (_edge_ref(a, n), _edge_ref(b, n))
                gluings.append(entry + ("flip",) if flip else entry)
        elif head == "boundary":
            boundary.extend(_edge_ref(line, n) for n, line in body)
        else:
            raise FormatError(f"line {hn}: unknown section [{head}]")
    if not polygons:
        raise FormatError("no polygons")
    return build_surface({"D": D, "label": label, "polygons": polygons, "gluings": gluings, "boundary": boundary})


def read_surface(path) -> TranslationSurface:
    return parse_surface(Path(path).read_text())


def format_surface(s: TranslationSurface) -> str:
    lines = ["[field]", f"D = {s.field_D}"]
    if s.label:
        lines.append(f"label = {s.label}")
    if not s.is_exact:
        lines.append("kind = approximate")
    for name, poly in zip(s.names, s.polygons):
        lines.append(f"[polygon {name}]")
        lines.extend(f"{_fmt(x)}, {_fmt(y)}" for x, y in poly)
    lines.append("[gluing]")
    done = set()
    for e, f in sorted(s.gluings.items()):
        if f in done or e in done:
            continue
        done.update((e, f))
        tail = " flip" if (e, f) in s.flipped else ""
        lines.append(f"{s.edge_name(e)} <-> {s.edge_name(f)}{tail}")
    if s.boundary:
        lines.append("[boundary]")
        lines.extend(s.edge_name(e) for e in sorted(s.boundary))
    return "\n".join(lines) + "\n"


def _fmt(x) -> str:
    if isinstance(x, float):
        return repr(x)
    if isinstance(x, QuadNum) and x.b == 0:
        return str(x.a)
    return format_number(x)


def write_surface(s: TranslationSurface, path) -> None:
    Path(path).write_text(format_surface(s))


# -- certificates -------------------------------------------------------------

def parse_certificate(text: str, s: TranslationSurface):
    """Parse a certificate for surface ``s``; polygon names refer to ``s``."""
    from .veech import AutomorphismCertificate, Piece

    D = s.field_D
    index = {nm: k for k, nm in enumerate(s.names)}
    matrix = None
    pieces = []
    for (head, hn), body in _sections(text):
        if head == "field":
            kv = _keyvals(body)
            if "D" in kv and int(kv["D"][1]) not in (0, D):
                raise FormatError(f"line {kv['D'][0]}: certificate field differs from surface field")
        elif head == "matrix":
            if len(body) != 2:
                raise FormatError(f"line {hn}: matrix needs two rows")
            rows = [_pair(line, n, D, False) for n, line in body]
            matrix = Mat2.exact(rows[0][0], rows[0][1], rows[1][0], rows[1][1])
        elif head == "piece":
            src = tgt = trans = None
            verts = []
            for n, line in body:
                if "=" not in line:
                    raise FormatError(f"line {n}: expected key = value")
                k, v = (x.strip() for x in line.split("=", 1))
                if k in ("source", "target"):
                    if v not in index:
                        raise FormatError(f"line {n}: unknown polygon {v}")
                    if k == "source":
                        src = index[v]
                    else:
                        tgt = index[v]
                elif k == "translation":
                    trans = _pair(v, n, D, False)
                elif k == "vertex":
                    verts.append(_pair(v, n, D, False))
                else:
                    raise FormatError(f"line {n}: unknown key {k}")
            if src is None or tgt is None or trans is None or len(verts) < 3:
                raise FormatError(f"line {hn}: piece needs source, target, translation and 3+ vertices")
            pieces.append(Piece(src, tuple(verts), trans, tgt))
        else:
            raise FormatError(f"line {hn}: unknown section [{head}]")
    if matrix is None:
        raise FormatError("missing [matrix] section")
    return AutomorphismCertificate(matrix, tuple(pieces))


def read_certificate(path, s: TranslationSurface):
    return parse_certificate(Path(path).read_text(), s)


def format_certificate(cert, s: TranslationSurface) -> str:
    a, b, c, d = cert.matrix.entries()
    lines = ["[field]", f"D = {s.field_D}", "[matrix]", f"{_fmt(a)}, {_fmt(b)}", f"{_fmt(c)}, {_fmt(d)}"]
    for p in cert.pieces:
        lines += ["[piece]", f"source = {s.names[p.source]}", f"target = {s.names[p.target]}"]
        lines.append(f"translation = {_fmt(p.translation[0])}, {_fmt(p.translation[1])}")
        lines.extend(f"vertex = {_fmt(x)}, {_fmt(y)}" for x, y in p.vertices)
    return "\n".join(lines) + "\n"


def write_certificate(cert, s: TranslationSurface, path) -> None:
    Path(path).write_text(format_certificate(cert, s))


# -- tabular dumps ------------------------------------------------------------

def _g17(x) -> str:
    return format(float(x), ".17g")


def recurrence_to_csv(samples) -> str:
    out = io.StringIO()
    w = csv.writer(out, lineterminator="\n")
    w.writerow(["t", "epsilon", "word"])
    for r in samples:
        w.writerow([_g17(r.t), _g17(r.epsilon), " ".join(str(x) for x in r.word)])
    return out.getvalue()


def trajectory_to_csv(traj, s: TranslationSurface) -> str:
    out = io.StringIO()
    w = csv.writer(out, lineterminator="\n")
    w.writerow(["segment", "polygon", "entry_x", "entry_y", "exit_x", "exit_y"])
    for k, (p, a, b) in enumerate(traj.segments):
        w.writerow([k, s.names[p], _g17(a[0]), _g17(a[1]), _g17(b[0]), _g17(b[1])])
    return out.getvalue()


def _jsonable(x):
    if isinstance(x, dict):
        return {str(k): _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if hasattr(x, "tolist"):
        return _jsonable(x.tolist())
    if isinstance(x, bool) or x is None or isinstance(x, (int, str)):
        return x
    if isinstance(x, (float, Fraction, QuadNum)):
        return _Float17(float(x))
    return str(x)


class _Float17(float):
    def __repr__(self):
        if math.isnan(self) or math.isinf(self):
            return "null"
        return format(float(self), ".17g")


class _Encoder(json.JSONEncoder):
    def iterencode(self, o, _one_shot=False):
        # route floats through the 17-digit repr
        return json.encoder._make_iterencode(
            {}, self.default, json.encoder.encode_basestring, self.indent, _Float17.__repr__,
            self.key_separator, self.item_separator, self.sort_keys, self.skipkeys, _one_shot,
        )(o, 0)


def to_json(obj) -> str:
    """JSON text with every float written to 17 significant digits."""
    return json.dumps(_jsonable(obj), cls=_Encoder, indent=2, sort_keys=True)


def histogram_to_json(hist) -> str:
    return to_json(
        {
            "bins": list(hist.bins),
            "occupancy": [o.tolist() for o in hist.occupancy],
            "area": [a.tolist() for a in hist.area],
            "discrepancy": hist.discrepancy,
            "status": hist.status,
        }
    )


def histogram_to_csv(hist) -> str:
    """One row per bin: running index, polygon, grid cell, time and area."""
    out = io.StringIO()
    w = csv.writer(out, lineterminator="\n")
    w.writerow(["bin", "polygon", "i", "j", "occupancy", "area"])
    k = 0
    for p, (occ, area) in enumerate(zip(hist.occupancy, hist.area)):
        nx, ny = occ.shape
        for i in range(nx):
            for j in range(ny):
                w.writerow([k, p, i, j, _g17(occ[i, j]), _g17(area[i, j])])
                k += 1
    return out.getvalue()
