"""Straight-line flow on translation surfaces.

Trajectories are followed polygon by polygon.  With exact surface, start
and direction every crossing decision is exact; otherwise floats are used
with a 1e-12 guard band around polygon vertices.  Consecutive collinear
edges are grouped into sides so that polygons with many short edges (the
Chamanara truncations) stay cheap.
"""

from __future__ import annotations

import bisect
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import numpy as np

from . import geometry as geo
from .exactnum import QuadNum, FieldMismatch, sign
from .surface import TranslationSurface, build_surface

__all__ = [
    "Trajectory",
    "IET",
    "trace",
    "trace_back",
    "first_return_iet",
    "birkhoff_average",
    "BirkhoffResult",
    "equidistribution_test",
    "Histogram",
    "chamanara_surface",
    "chamanara_baker_certificate",
    "escape_mass_estimate",
    "random_starts",
    "parse_observable",
]

GUARD = 1e-12

COMPLETED = "completed"
HIT = "hitSingularity"
ESCAPED = "escaped"


@dataclass
class Trajectory:
    start: tuple  # (polygon, point)
    direction: tuple
    segments: list = field(default_factory=list)  # (polygon, entry, exit)
    status: str = COMPLETED
    length: float = 0.0
    escape_time: float | None = None

    @property
    def end(self):
        if not self.segments:
            return self.start
        p, _, b = self.segments[-1]
        return (p, b)


class _Sides:
    """Maximal runs of collinear edges of one polygon."""

    def __init__(self, poly, exact):
        n = len(poly)
        self.poly = poly
        self.fpoly = [geo.to_float(v) for v in poly]
        # first edge of a run: not collinear with the previous edge
        starts = [
            i for i in range(n)
            if sign(geo.cross(geo.sub(poly[i], poly[i - 1]), geo.sub(poly[(i + 1) % n], poly[i]))) != 0
        ]
        self.sides = []
        for k, i0 in enumerate(starts):
            i1 = starts[(k + 1) % len(starts)]
            edges = []
            i = i0
            while True:
                edges.append(i)
                i = (i + 1) % n
                if i == i1:
                    break
            A, B = poly[i0], poly[i1]
            e = geo.sub(B, A)
            ee = geo.dot(e, e)
            # parameters of the interior vertices along the side
            us = [geo.dot(geo.sub(poly[j], A), e) / ee for j in edges[1:]]
            fA, fe = geo.to_float(A), geo.to_float(e)
            self.sides.append((edges, A, e, us, fA, fe, [float(u) for u in us], math.hypot(*fe)))


class _Flow:
    def __init__(self, s: TranslationSurface):
        self.s = s
        self.sides = [_Sides(P, s.is_exact) for P in s.polygons]
        # corners on the truncation boundary: reaching one counts as escaping
        classes = s.vertex_classes()
        bcls = {classes[(q, i)] for q, i in s.boundary} | {
            classes[(q, (i + 1) % len(s.polygons[q]))] for q, i in s.boundary
        }
        self.boundary_corners = {v for v, c in classes.items() if c in bcls}

    def on_boundary_corner(self, p, y, exact) -> bool:
        if not self.boundary_corners:
            return False
        for i, v in enumerate(self.s.polygons[p]):
            if (p, i) not in self.boundary_corners:
                continue
            if exact:
                if geo.is_zero(geo.sub(y, v)):
                    return True
            elif math.hypot(float(y[0]) - float(v[0]), float(y[1]) - float(v[1])) <= 1e-9:
                return True
        return False

    def exit(self, p, x, d, exact):
        """(s, edge, point, singular) for the first boundary hit of x + s d, s >= 0."""
        best = None
        for edges, A, e, us, fA, fe, fus, flen in self.sides[p].sides:
            if exact:
                den = geo.cross(e, d)
                if sign(den) >= 0:
                    continue
                t = geo.cross(e, geo.sub(A, x)) / den
                if sign(t) < 0:
                    continue
                if best is None or sign(t - best[0]) < 0:
                    best = (t, (edges, A, e, us))
                elif sign(t - best[0]) == 0:
                    best = (t, None)  # two sides at once: a corner
            else:
                den = fe[0] * d[1] - fe[1] * d[0]
                if den >= 0:
                    continue
                t = (fe[0] * (fA[1] - x[1]) - fe[1] * (fA[0] - x[0])) / den
                if t < -GUARD:
                    continue
                if best is None or t < best[0]:
                    best = (max(t, 0.0), (edges, fA, fe, fus, flen))
        if best is None:
            raise RuntimeError("no exit from polygon")
        t, side = best
        if side is None:
            return t, None, geo.add(x, geo.scale(t, d)), True
        y = geo.add(x, geo.scale(t, d))
        if exact:
            edges, A, e, us = side
            u = geo.dot(geo.sub(y, A), e) / geo.dot(e, e)
            if sign(u) == 0 or sign(u - 1) == 0 or any(sign(u - v) == 0 for v in us):
                return t, None, y, True
            k = 0
            while k < len(us) and sign(u - us[k]) > 0:
                k += 1
            return t, edges[k], y, False
        edges, fA, fe, fus, flen = side
        u = ((y[0] - fA[0]) * fe[0] + (y[1] - fA[1]) * fe[1]) / (flen * flen)
        k = bisect.bisect_left(fus, u)
        near = [0.0, 1.0] + fus[max(0, k - 1):k + 1]
        if min(abs(u - v) for v in near) * flen <= GUARD * max(1.0, flen):
            if self.s.is_exact:
                # escalate: decide exactly for the (binary-exact) float data
                tx, edge, yx, singular = self.exit(p, tuple(map(Fraction, x)), tuple(map(Fraction, d)), True)
                return float(tx), edge, geo.to_float(yx), singular
            return t, None, y, True
        return t, edges[k], y, False


def _is_exact_value(v) -> bool:
    return isinstance(v, (int, Fraction, QuadNum))


def _prepare(s, start, direction, exact):
    p, x = start
    if exact is None:
        exact = s.is_exact and all(_is_exact_value(c) for c in (*x, *direction))
    if exact:
        try:
            x = tuple(c if isinstance(c, QuadNum) else Fraction(c) for c in x)
            d = tuple(c if isinstance(c, QuadNum) else Fraction(c) for c in direction)
            # detect incompatible fields early
            geo.cross(d, s.polygons[p][0])
            geo.cross(x, s.polygons[p][0])
        except FieldMismatch:
            exact = False
    if not exact:
        x = geo.to_float(x)
        d = geo.to_float(direction)
    return p, x, d, exact


def _at_vertex(s, p, x, exact) -> bool:
    for v in s.polygons[p]:
        if exact:
            if geo.is_zero(geo.sub(x, v)):
                return True
        else:
            fv = geo.to_float(v)
            if math.hypot(x[0] - fv[0], x[1] - fv[1]) <= GUARD:
                return True
    return False


_FLOWS: dict = {}


def _flow_for(s):
    f = _FLOWS.get(id(s))
    if f is None or f.s is not s:
        if len(_FLOWS) > 64:
            _FLOWS.clear()
        f = _Flow(s)
        _FLOWS[id(s)] = f
    return f


def trace(s: TranslationSurface, start, direction, length: float, *, exact: bool | None = None,
          record: bool = True) -> Trajectory:
    """Follow the straight line from ``start = (polygon, point)`` for the
    given length."""
    if geo.is_zero(direction):
        raise ValueError("zero direction")
    p, x, d, exact = _prepare(s, start, direction, exact)
    if _at_vertex(s, p, x, exact):
        raise ValueError("starts at singularity")
    fl = _flow_for(s)
    nd = geo.norm(d)
    traj = Trajectory((p, x), d)
    remaining = float(length)
    travelled = 0.0
    guard_steps = 0
    while True:
        t, edge, y, singular = fl.exit(p, x, d, exact)
        seg = float(t) * nd
        # reaching a vertex exactly at the end of the budget still counts as a hit
        hit_now = singular and seg <= remaining + GUARD * max(1.0, remaining)
        if seg >= remaining and not hit_now:
            tt = remaining / nd
            if exact:
                tt = _exact_time(remaining, nd, d)
            end = geo.add(x, geo.scale(tt, d))
            if record and remaining > 0:
                traj.segments.append((p, x, end))
            elif not record:
                traj.segments[:] = [(p, x, end)]
            travelled += remaining
            traj.status = COMPLETED
            break
        if record:
            traj.segments.append((p, x, y))
        else:
            traj.segments[:] = [(p, x, y)]
        travelled += seg
        remaining -= seg
        if singular:
            if fl.on_boundary_corner(p, y, exact):
                traj.status = ESCAPED
                traj.escape_time = travelled
            else:
                traj.status = HIT
            break
        if (p, edge) in s.boundary or (p, edge) not in s.gluings:
            traj.status = ESCAPED
            traj.escape_time = travelled
            break
        q, j = s.gluings[(p, edge)]
        P, Q = s.polygons[p], s.polygons[q]
        if exact:
            x = geo.add(geo.sub(y, P[edge]), Q[(j + 1) % len(Q)])
        else:
            a, b = fl.sides[p].fpoly[edge], fl.sides[q].fpoly[(j + 1) % len(Q)]
            x = (y[0] - a[0] + b[0], y[1] - a[1] + b[1])
        p = q
        guard_steps += 1
        if guard_steps > 50_000_000:
            raise RuntimeError("trajectory step limit")
    traj.length = travelled
    return traj


def _exact_time(remaining: float, nd: float, d):
    # exact when |d| is rational and the length is a float value, else the
    # nearest binary fraction
    dd = d[0] * d[0] + d[1] * d[1]
    if not isinstance(dd, QuadNum) or dd.b == 0:
        r = Fraction(dd.a if isinstance(dd, QuadNum) else dd)
        a, b = math.isqrt(r.numerator), math.isqrt(r.denominator)
        if a * a == r.numerator and b * b == r.denominator:
            return Fraction(remaining) / Fraction(a, b)
    return Fraction(remaining / nd)


def trace_back(s, traj: Trajectory, **kw) -> Trajectory:
    """Trace from the end of ``traj`` in the opposite direction."""
    return trace(s, traj.end, geo.neg(traj.direction), traj.length, **kw)


# -- interval exchange --------------------------------------------------------

@dataclass(frozen=True)
class IET:
    lengths: tuple
    permutation: tuple  # permutation[i] = position (0-based) of interval i after the map
    translations: tuple = ()

    def __post_init__(self):
        if any(not l > 0 for l in self.lengths):
            raise ValueError("interval lengths must be positive")
        if sorted(self.permutation) != list(range(len(self.lengths))):
            raise ValueError("permutation is not a bijection")

    @property
    def total(self) -> float:
        return float(sum(self.lengths))

    def __call__(self, x):
        """Apply the map to points (array-like) of [0, total)."""
        x = np.asarray(x, dtype=float)
        cuts = np.cumsum([0.0] + [float(l) for l in self.lengths])
        idx = np.clip(np.searchsorted(cuts, x, side="right") - 1, 0, len(self.lengths) - 1)
        return x + np.asarray([float(t) for t in self.translations])[idx]


def _edge_param(P, i, y):
    a, b = P[i], P[(i + 1) % len(P)]
    e = geo.sub(b, a)
    return geo.dot(geo.sub(y, a), e) / geo.dot(e, e)


def first_return_iet(s: TranslationSurface, transversal, direction, max_length: float) -> IET:
    """First return map of the flow to the edge ``transversal = (polygon,
    edge)``, as an IET in the arclength parameter of that edge."""
    p0, i0 = transversal
    P0 = s.polygons[p0]
    n0 = len(P0)
    e0 = geo.sub(P0[(i0 + 1) % n0], P0[i0])
    p, x, d, exact = _prepare(s, (p0, P0[i0]), direction, None)
    cr = geo.cross(e0, d)
    if sign(cr) == 0:
        raise ValueError("transversal not transverse to direction")
    if sign(cr) < 0:
        raise ValueError("direction must enter the polygon through the transversal")
    if (p0, i0) not in s.gluings:
        raise ValueError("transversal must be a glued edge")
    q0, j0 = s.gluings[(p0, i0)]
    edge_len = geo.norm(e0)
    fl = _flow_for(s)
    nd = geo.norm(d)
    back = geo.neg(d)

    def cast(v):
        return v if exact else geo.to_float(v)

    # backward separatrices from every corner whose interior holds -d
    breaks = {Fraction(0), Fraction(1)} if exact else {0.0, 1.0}
    for p, P in enumerate(s.polygons):
        n = len(P)
        for k in range(n):
            out = geo.sub(P[(k + 1) % n], P[k])
            inn = geo.sub(P[k - 1], P[k])
            if not (sign(geo.cross(out, back)) > 0 and sign(geo.cross(back, inn)) > 0):
                continue
            if not exact:
                out, inn = geo.to_float(out), geo.to_float(inn)
                if not (out[0] * d[1] - out[1] * d[0] < 0 and d[0] * inn[1] - d[1] * inn[0] < 0):
                    continue
            x = cast(P[k])
            q = p
            travelled = 0.0
            while True:
                t, edge, y, singular = fl.exit(q, x, back, exact)
                travelled += float(t) * nd
                if travelled > max_length:
                    raise ValueError(f"separatrix from polygon {p} vertex {k} does not reach the transversal")
                if singular:
                    break
                if (q, edge) == (p0, i0):
                    breaks.add(_edge_param(cast_poly(s, p0, exact), i0, y))
                    break
                if (q, edge) in s.boundary or (q, edge) not in s.gluings:
                    raise ValueError("separatrix escapes through the boundary")
                qq, jj = s.gluings[(q, edge)]
                Pq, Qq = cast_poly(s, q, exact), cast_poly(s, qq, exact)
                x = geo.add(geo.sub(y, Pq[edge]), Qq[(jj + 1) % len(Qq)])
                q = qq
    cuts = sorted(breaks, key=float)
    lengths, shifts, images = [], [], []
    P0c = cast_poly(s, p0, exact)
    half = Fraction(1, 2) if exact else 0.5
    for a, b in zip(cuts, cuts[1:]):
        if sign(b - a) <= 0 or (not exact and b - a < 1e-12):
            continue
        m = (a + b) * half
        x = geo.add(P0c[i0], geo.scale(m, geo.sub(P0c[(i0 + 1) % n0], P0c[i0])))
        q = p0
        travelled = 0.0
        while True:
            t, edge, y, singular = fl.exit(q, x, d, exact)
            travelled += float(t) * nd
            if travelled > max_length or singular:
                raise ValueError(
                    f"no return within max_length for subinterval [{float(a) * edge_len:.6g}, {float(b) * edge_len:.6g}]"
                )
            if (q, edge) in s.boundary or (q, edge) not in s.gluings:
                raise ValueError("trajectory escapes through the boundary")
            qq, jj = s.gluings[(q, edge)]
            Pq, Qq = cast_poly(s, q, exact), cast_poly(s, qq, exact)
            x = geo.add(geo.sub(y, Pq[edge]), Qq[(jj + 1) % len(Qq)])
            q = qq
            if (q, jj) == (p0, i0):
                u = _edge_param(P0c, i0, x)
                break
        lengths.append(float(b - a) * edge_len)
        shifts.append(float(u - m) * edge_len)
        images.append(float(u - m + a))
    order = sorted(range(len(images)), key=lambda k: images[k])
    perm = [0] * len(order)
    for pos, k in enumerate(order):
        perm[k] = pos
    return IET(tuple(lengths), tuple(perm), tuple(shifts))


def cast_poly(s, p, exact):
    P = s.polygons[p]
    return P if exact else [geo.to_float(v) for v in P]


# -- observables and averages ---------------------------------------------------

def parse_observable(name: str):
    """Built-in observables in polygon coordinates.

    ``const``; ``strip-x:lo:hi`` / ``strip-y:lo:hi`` (indicator of
    lo <= coordinate < hi); ``cos-x:k``, ``sin-x:k`` (and ``-y``) for
    cos(2 pi k coordinate).
    """
    if name == "const":
        return ("const",)
    try:
        head, *args = name.split(":")
        kind, axis = head.split("-")
        ax = {"x": 0, "y": 1}[axis]
        if kind == "strip":
            lo, hi = float(args[0]), float(args[1])
            if not lo < hi:
                raise ValueError
            return ("strip", ax, lo, hi)
        if kind in ("cos", "sin"):
            return (kind, ax, float(args[0]))
    except (ValueError, KeyError, IndexError):
        pass
    raise ValueError(f"unknown observable {name!r}")


def _obs_bounds(obs):
    return (1.0, 1.0) if obs[0] == "const" else ((0.0, 1.0) if obs[0] == "strip" else (-1.0, 1.0))


def _segment_integral(obs, a, b, seg_len: float) -> float:
    """Integral of the observable along the segment a -> b (closed form)."""
    if obs[0] == "const":
        return seg_len
    ax = obs[1]
    c0, c1 = float(a[ax]), float(b[ax])
    if obs[0] == "strip":
        lo, hi = obs[2], obs[3]
        if c1 == c0:
            return seg_len if lo <= c0 < hi else 0.0
        u0, u1 = sorted(((lo - c0) / (c1 - c0), (hi - c0) / (c1 - c0)))
        return seg_len * max(0.0, min(1.0, u1) - max(0.0, u0))
    w = 2 * math.pi * obs[2]
    if w == 0 or abs(c1 - c0) * abs(w) < 1e-9:
        f = math.cos if obs[0] == "cos" else math.sin
        return seg_len * f(w * 0.5 * (c0 + c1))
    if obs[0] == "cos":
        return seg_len * (math.sin(w * c1) - math.sin(w * c0)) / (w * (c1 - c0))
    return seg_len * (math.cos(w * c0) - math.cos(w * c1)) / (w * (c1 - c0))


@dataclass
class BirkhoffResult:
    averages: list  # None where the start was flagged
    flags: list  # '' or the trajectory status
    dispersion: float


def _birkhoff_one(s, direction, observable, T, st):
    obs = parse_observable(observable) if isinstance(observable, str) else observable
    traj = trace(s, st, direction, T, exact=False)
    if traj.status != COMPLETED:
        return None, traj.status
    total = 0.0
    for p, a, b in traj.segments:
        seg = math.hypot(float(b[0]) - float(a[0]), float(b[1]) - float(a[1]))
        total += _segment_integral(obs, a, b, seg)
    lo, hi = _obs_bounds(obs)
    return min(hi, max(lo, total / T)), ""


def birkhoff_average(s: TranslationSurface, direction, observable, T: float, starts: Sequence,
                     threads: int = 1) -> BirkhoffResult:
    """Time averages (1/T) int_0^T f(phi_t x) dt per start.

    Starts whose trajectory hits a cone point or escapes are flagged and
    left out of the dispersion.  ``threads`` > 1 needs a named observable.
    """
    if not T > 0:
        raise ValueError("T must be positive")
    if not isinstance(observable, str):
        threads = 1
    else:
        parse_observable(observable)  # fail early on a bad name
    res = _pmap(_birkhoff_one, [(s, direction, observable, T, st) for st in starts], threads)
    avgs = [a for a, _ in res]
    flags = [f for _, f in res]
    good = [v for v in avgs if v is not None]
    disp = max(good) - min(good) if good else math.nan
    return BirkhoffResult(avgs, flags, disp)


# -- equidistribution ---------------------------------------------------------------

@dataclass
class Histogram:
    bins: tuple
    occupancy: list  # per polygon: nx * ny array (fraction of time)
    area: list  # per polygon: nx * ny array (fraction of area)
    discrepancy: float
    status: str = COMPLETED


def _bin_areas(P, box, nx, ny):
    x0, y0, x1, y1 = box
    out = np.zeros((nx, ny))
    fP = [geo.to_float(v) for v in P]
    for i in range(nx):
        for j in range(ny):
            a, b = x0 + (x1 - x0) * i / nx, x0 + (x1 - x0) * (i + 1) / nx
            c, d = y0 + (y1 - y0) * j / ny, y0 + (y1 - y0) * (j + 1) / ny
            cell = [(a, c), (b, c), (b, d), (a, d)]
            out[i, j] = float(geo.intersection_area(cell, fP))
    return out


def equidistribution_test(s: TranslationSurface, direction, T: float, bins=(10, 10), start=None,
                          seed: int = 0) -> Histogram:
    """Occupancy-time histogram on a grid over each polygon's bounding box.

    The discrepancy is the total-variation distance between occupation
    time and area, i.e. the largest |time - area| over unions of bins.
    """
    if not T > 0:
        raise ValueError("T must be positive")
    nx, ny = bins
    rng = np.random.default_rng(seed)
    if start is None:
        start = _random_point(s, rng)
    boxes = []
    areas = []
    for P in s.polygons:
        xs = [float(v[0]) for v in P]
        ys = [float(v[1]) for v in P]
        box = (min(xs), min(ys), max(xs), max(ys))
        boxes.append(box)
        areas.append(_bin_areas(P, box, nx, ny))
    tot_area = sum(a.sum() for a in areas)
    areas = [a / tot_area for a in areas]
    occ = [np.zeros((nx, ny)) for _ in s.polygons]
    traj = trace(s, start, direction, T, exact=False)
    for p, a, b in traj.segments:
        x0, y0, x1, y1 = boxes[p]
        ax, ay = (float(a[0]) - x0) / (x1 - x0) * nx, (float(a[1]) - y0) / (y1 - y0) * ny
        bx, by = (float(b[0]) - x0) / (x1 - x0) * nx, (float(b[1]) - y0) / (y1 - y0) * ny
        seg = math.hypot(float(b[0]) - float(a[0]), float(b[1]) - float(a[1]))
        us = {0.0, 1.0}
        for c0, c1, n in ((ax, bx, nx), (ay, by, ny)):
            if c1 != c0:
                lo, hi = sorted((c0, c1))
                for k in range(math.ceil(lo), math.floor(hi) + 1):
                    u = (k - c0) / (c1 - c0)
                    if 0 < u < 1:
                        us.add(u)
        us = sorted(us)
        for u0, u1 in zip(us, us[1:]):
            um = 0.5 * (u0 + u1)
            i = min(nx - 1, max(0, int(math.floor(ax + um * (bx - ax)))))
            j = min(ny - 1, max(0, int(math.floor(ay + um * (by - ay)))))
            occ[p][i, j] += (u1 - u0) * seg
    total_time = sum(o.sum() for o in occ)
    if total_time > 0:
        occ = [o / total_time for o in occ]
    disc = 0.5 * sum(float(np.abs(o - a).sum()) for o, a in zip(occ, areas))
    return Histogram((nx, ny), occ, areas, disc, traj.status)


_TABLES: dict = {}


def _sample_table(s):
    hit = _TABLES.get(id(s))
    if hit is not None and hit[0] is s:
        return hit[1], hit[2]
    tris = []
    for p, P in enumerate(s.polygons):
        for i, j, k in geo.triangulate(P):
            a, b, c = (geo.to_float(P[m]) for m in (i, j, k))
            tris.append((p, a, b, c, abs(geo.cross(geo.sub(b, a), geo.sub(c, a))) / 2))
    w = np.array([t[4] for t in tris])
    w = w / w.sum()
    if len(_TABLES) > 64:
        _TABLES.clear()
    _TABLES[id(s)] = (s, tris, w)
    return tris, w


def _random_point(s: TranslationSurface, rng):
    """Area-uniform random point (polygon, (x, y)) in float coordinates."""
    tris, w = _sample_table(s)
    k = int(rng.choice(len(tris), p=w))
    p, a, b, c, _ = tris[k]
    u, v = (float(r) for r in rng.random(2))
    if u + v > 1:
        u, v = 1 - u, 1 - v
    return (p, (a[0] + u * (b[0] - a[0]) + v * (c[0] - a[0]), a[1] + u * (b[1] - a[1]) + v * (c[1] - a[1])))


# -- infinite-genus examples --------------------------------------------------------

def chamanara_surface(N: int) -> TranslationSurface:
    """Unit square with geometric-series side identifications through level N.

    Bottom segment n is [2^-n, 2^(1-n)], top segment n is
    [1 - 2^(1-n), 1 - 2^-n]; right segment n (from the bottom) is
    [1 - 2^(1-n), 1 - 2^-n] and left segment n (from the top) is
    [2^-n, 2^(1-n)].  Segments of equal index are glued by translation;
    the remainders of length 2^-N are marked boundary.
    """
    if N < 1:
        raise ValueError("level must be >= 1")
    h = [Fraction(1, 2**n) for n in range(N + 1)]
    verts = []
    bottom = [(0, 0)] + [(h[n], 0) for n in range(N, 0, -1)]  # remainder, then n = N..1
    right = [(1, 0)] + [(1, 1 - h[n]) for n in range(1, N + 1)]  # n = 1..N, then remainder
    top = [(1, 1)] + [(1 - h[n], 1) for n in range(N, 0, -1)]  # remainder, then n = N..1
    left = [(0, 1)] + [(0, h[n]) for n in range(1, N + 1)]  # n = 1..N, then remainder
    verts = bottom + right + top + left
    B = 0
    R = len(bottom)
    T_ = R + len(right)
    L = T_ + len(top)
    gl = []
    for n in range(1, N + 1):
        b_edge = B + (N - n + 1)  # from h[n] to h[n-1]
        t_edge = T_ + (N - n + 1)  # from 1 - h[n] ... going left
        r_edge = R + (n - 1)
        l_edge = L + (n - 1)
        gl.append((("Q", b_edge), ("Q", t_edge)))
        gl.append((("Q", r_edge), ("Q", l_edge)))
    boundary = [("Q", B), ("Q", R + N), ("Q", T_), ("Q", L + N)]
    return build_surface(
        {"D": 0, "polygons": [("Q", verts)], "gluings": gl, "boundary": boundary, "label": f"chamanara-{N}"}
    )


def chamanara_baker_certificate(N: int):
    """Certificate for diag(2, 1/2) on the level-N truncation."""
    from .surface import Mat2
    from .veech import build_certificate

    return build_certificate(chamanara_surface(N), Mat2.exact(2, 0, 0, Fraction(1, 2)))


def _escapes(s, direction, T, st) -> bool:
    return trace(s, st, direction, T, exact=False, record=False).status == ESCAPED


def _pmap(fn, args, threads: int):
    """Ordered map, in worker processes when threads > 1."""
    if threads <= 1 or len(args) < 2:
        return [fn(*a) for a in args]
    from concurrent.futures import ProcessPoolExecutor

    with ProcessPoolExecutor(max_workers=threads) as ex:
        return list(ex.map(fn, *zip(*args), chunksize=max(1, len(args) // (4 * threads))))


def escape_mass_estimate(s: TranslationSurface, direction, T: float, sample_count: int, seed: int,
                         threads: int = 1) -> float:
    """Fraction of area-uniform starts whose trajectory crosses the marked
    boundary before time T.  Surfaces without boundary give 0.

    Starts are drawn before any tracing, so the result does not depend on
    ``threads``.
    """
    if sample_count < 1:
        raise ValueError("sample_count must be >= 1")
    if T <= 0 or not s.boundary:
        return 0.0
    rng = np.random.default_rng(seed)
    starts = [_random_point(s, rng) for _ in range(sample_count)]
    hits = _pmap(_escapes, [(s, direction, T, st) for st in starts], threads)
    return sum(hits) / sample_count


def random_starts(s: TranslationSurface, count: int, seed: int) -> list:
    """``count`` area-uniform float starts drawn from ``seed``."""
    rng = np.random.default_rng(seed)
    return [_random_point(s, rng) for _ in range(count)]
