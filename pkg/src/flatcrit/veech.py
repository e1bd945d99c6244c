"""Affine automorphism certificates and Teichmueller-disk geometry.

A certificate for a matrix M cuts every polygon of M.s into convex pieces
and moves each piece by a translation into a polygon of s.  Verification
is exact: areas are compared in the coordinate field and gluings are
checked at the midpoints of every boundary sub-segment.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

from . import geometry as geo
from .exactnum import QuadNum, sign, to_exact
from .surface import Mat2, TranslationSurface, apply_matrix

__all__ = [
    "Piece",
    "AutomorphismCertificate",
    "VerificationReport",
    "RecurrenceSample",
    "hyp_distance",
    "law_of_sines_bound",
    "verify_affine_automorphism",
    "build_certificate",
    "cylinder_parabolic",
    "recurrence_profile",
    "is_periodic",
    "cylinder_obstruction_check",
]


# -- hyperbolic geometry -----------------------------------------------------

def _act_on_i(A: Mat2) -> complex:
    a, b, c, d = (float(x) for x in A.entries())
    return (a * 1j + b) / (c * 1j + d)


def hyp_distance(A: Mat2, B: Mat2) -> float:
    """Distance between A.i and B.i, normalized so that dist(I, g_t) = |t|
    (curvature -4)."""
    for m in (A, B):
        if abs(float(m.det()) - 1.0) > 1e-9:
            raise ValueError("matrix determinant is not 1")
    z, w = _act_on_i(A), _act_on_i(B)
    # 1/2 arccosh(1 + |z-w|^2 / (2 Im z Im w)) written stably via asinh
    return math.asinh(abs(z - w) / (2 * math.sqrt(z.imag * w.imag)))


def law_of_sines_bound(epsilon: float, t: float) -> float:
    """Bound sinh(2 eps) / sinh(2 t) on |sin theta|, clamped to [0, 1]."""
    if not t > 0:
        raise ValueError("t must be positive")
    if epsilon < 0:
        raise ValueError("epsilon must be nonnegative")
    if 2 * t > 700:
        val = math.exp(2 * epsilon - 2 * t) if epsilon < 350 else 1.0
    else:
        val = math.sinh(2 * epsilon) / math.sinh(2 * t)
    return min(1.0, max(0.0, val))


@dataclass(frozen=True)
class RecurrenceSample:
    t: float
    epsilon: float
    word: tuple  # generator indices, 1-based; negative = inverse


def _word_ball(gens, bound):
    inv = [g.inverse() for g in gens]
    exact = all(gm.kind == "exact" for gm in gens)
    base = Mat2.identity() if exact else Mat2.approx(1, 0, 0, 1)
    out = [((), base)]
    frontier = [((), base)]
    letters = [i for k in range(1, len(gens) + 1) for i in (k, -k)]
    for _ in range(bound):
        nxt = []
        for w, m in frontier:
            for x in letters:
                if w and w[-1] == -x:
                    continue
                nxt.append((w + (x,), m @ (gens[x - 1] if x > 0 else inv[-x - 1])))
        out.extend(nxt)
        frontier = nxt
    return out


def recurrence_profile(generators: Sequence[Mat2], times: Sequence[float], word_bound: int):
    """Distance from g_t to the nearest element of the word ball, per t."""
    if word_bound < 0:
        raise ValueError("word_bound must be >= 0")
    for gm in generators:
        if not gm.is_unimodular(1e-9):
            raise ValueError("generator determinant is not 1")
    ball = _word_ball(list(generators), word_bound)
    pts = [(w, _act_on_i(m)) for w, m in ball]
    out = []
    for t in times:
        z = 1j * math.exp(-2 * t)
        best, best_w = math.inf, ()
        for w, p in pts:
            d = math.asinh(abs(z - p) / (2 * math.sqrt(z.imag * p.imag)))
            if d < best - 1e-15:
                best, best_w = d, w
        out.append(RecurrenceSample(float(t), best, best_w))
    return out


def is_periodic(generators: Sequence[Mat2], word_bound: int, tol: float = 1e-10):
    """Smallest s > 0 with g_s in the word ball (diagonal element with
    positive entries), or None."""
    best = None
    for w, m in _word_ball(list(generators), word_bound):
        if not w:
            continue
        a, b, c, d = m.entries()
        if m.kind == "exact":
            if sign(b) != 0 or sign(c) != 0 or sign(a) <= 0 or sign(a - 1) == 0:
                continue
        else:
            if abs(b) > tol or abs(c) > tol or a <= 0 or abs(a - 1) <= tol:
                continue
        s = -math.log(float(a))
        if s > 0 and (best is None or s < best):
            best = s
    return best


# -- certificates -----------------------------------------------------------

@dataclass(frozen=True)
class Piece:
    source: int  # polygon of M.s
    vertices: tuple  # convex ccw polygon inside the source polygon
    translation: tuple  # vertices + translation lie in the target polygon
    target: int  # polygon of s


@dataclass(frozen=True)
class AutomorphismCertificate:
    matrix: Mat2
    pieces: tuple


@dataclass
class VerificationReport:
    passed: bool
    failures: list = field(default_factory=list)
    truncated: list = field(default_factory=list)
    checked_segments: int = 0

    def __bool__(self):
        return self.passed


def _shift(poly, v):
    return [geo.add(p, v) for p in poly]


def _glue_point(s: TranslationSurface, poly_idx: int, edge: int, x):
    """Partner polygon and position of point ``x`` on edge (poly_idx, edge)."""
    q, j = s.gluings[(poly_idx, edge)]
    P, Q = s.polygons[poly_idx], s.polygons[q]
    # start of this edge corresponds to the end of the partner edge
    return q, geo.add(geo.sub(x, P[edge]), Q[(j + 1) % len(Q)])


def _edge_containing(poly, x):
    for i in range(len(poly)):
        if geo.on_segment(x, poly[i], poly[(i + 1) % len(poly)]):
            return i
    return None


def _same_surface_point(s, q1, x1, q2, x2) -> bool:
    if q1 == q2 and geo.is_zero(geo.sub(x1, x2)):
        return True
    e = _edge_containing(s.polygons[q1], x1)
    if e is None or (q1, e) in s.boundary or (q1, e) not in s.gluings:
        return False
    q, y = _glue_point(s, q1, e, x1)
    if q == q2 and geo.is_zero(geo.sub(y, x2)):
        return True
    # x1 may be a vertex lying on two edges; try the other one too
    P = s.polygons[q1]
    e2 = (e + 1) % len(P)
    if geo.on_segment(x1, P[e2], P[(e2 + 1) % len(P)]) and (q1, e2) in s.gluings and (q1, e2) not in s.boundary:
        q, y = _glue_point(s, q1, e2, x1)
        return q == q2 and geo.is_zero(geo.sub(y, x2))
    return False


def _on_boundary(s, q, x) -> bool:
    P = s.polygons[q]
    for i in range(len(P)):
        if (q, i) in s.boundary and geo.on_segment(x, P[i], P[(i + 1) % len(P)]):
            return True
    return False


def _cast(v, D):
    return tuple(to_exact(c, D) for c in v)


def verify_affine_automorphism(s: TranslationSurface, cert: AutomorphismCertificate) -> VerificationReport:
    """Exact check that ``cert`` describes an affine automorphism of ``s``.

    Checks (a) det M = 1, (b) the pieces tile M.s, (c) the translated pieces
    tile s, (d) the piecewise translation respects the gluings.  Segments
    that touch a marked boundary cannot be checked and are listed in
    ``truncated`` instead of ``failures``.
    """
    rep = VerificationReport(False)
    M = cert.matrix
    if M.kind != "exact" or not s.is_exact:
        rep.failures.append("exact surface and matrix required")
        return rep
    if M.det() != 1:
        rep.failures.append("not area-preserving")
        return rep
    try:
        ms = apply_matrix(s, M)
    except ValueError as exc:
        rep.failures.append(str(exc))
        return rep
    D = ms.field_D
    pieces = [
        Piece(p.source, tuple(_cast(v, D) for v in p.vertices), _cast(p.translation, D), p.target) for p in cert.pieces
    ]
    n_src, n_tgt = len(ms.polygons), len(s.polygons)
    for k, p in enumerate(pieces):
        if not (0 <= p.source < n_src and 0 <= p.target < n_tgt):
            rep.failures.append(f"piece {k}: polygon index out of range")
        elif len(p.vertices) < 3 or not geo.is_convex(list(p.vertices)):
            rep.failures.append(f"piece {k}: not a convex ccw polygon")
    if rep.failures:
        return rep

    # (b) and (c): containment, pairwise disjointness, area bookkeeping
    for side, polys, key, move in (
        ("source", ms.polygons, "source", False),
        ("target", s.polygons, "target", True),
    ):
        groups: dict = {}
        for k, p in enumerate(pieces):
            poly = _shift(p.vertices, p.translation) if move else list(p.vertices)
            groups.setdefault(getattr(p, key), []).append((k, poly))
        for idx, P in enumerate(polys):
            members = groups.get(idx, [])
            total = 0
            for k, poly in members:
                a = geo.polygon_area(poly)
                inside = geo.intersection_area(poly, list(P))
                if sign(inside - a) != 0:
                    rep.failures.append(f"piece {k} not inside {side} polygon {idx}")
                total = total + a
            for (k1, p1), (k2, p2) in itertools.combinations(members, 2):
                if sign(geo.intersection_area(p1, p2)) != 0:
                    rep.failures.append(f"pieces {k1} and {k2} overlap in {side} polygon {idx}")
            if sign(total - geo.polygon_area(list(P))) != 0:
                rep.failures.append(f"pieces do not tile {side} polygon {idx}")
    if rep.failures:
        return rep

    # (d) gluing consistency along every piece edge
    by_src: dict = {}
    for k, p in enumerate(pieces):
        by_src.setdefault(p.source, []).append(k)

    def raw_points(src):
        pts = list(ms.polygons[src])
        for k in by_src.get(src, []):
            pts.extend(pieces[k].vertices)
            pts.extend(geo.sub(v, pieces[k].translation) for v in s.polygons[pieces[k].target])
        return pts

    def breakpoints(src, a, b):
        pts = [x for x in raw_points(src) if geo.on_segment(x, a, b)]
        P = ms.polygons[src]
        e = _edge_containing(P, geo.scale(Fraction(1, 2), geo.add(a, b)))
        if e is not None and (src, e) in ms.gluings and (src, e) not in s.boundary:
            # breakpoints of the pieces on the other side of the gluing
            q, j = ms.gluings[(src, e)]
            Q = ms.polygons[q]
            for y in raw_points(q):
                if geo.on_segment(y, Q[j], Q[(j + 1) % len(Q)]):
                    _, x = _glue_point(ms, q, j, y)
                    if geo.on_segment(x, a, b):
                        pts.append(x)
        return pts

    def piece_across(src, x, direction):
        # piece with an edge through x running in ``direction`` (parallel)
        for k in by_src.get(src, []):
            V = pieces[k].vertices
            for i in range(len(V)):
                c, d = V[i], V[(i + 1) % len(V)]
                if sign(geo.cross(geo.sub(d, c), direction)) == 0 and sign(geo.dot(geo.sub(d, c), direction)) > 0:
                    if geo.on_segment(x, c, d) and not geo.is_zero(geo.sub(x, c)) and not geo.is_zero(geo.sub(x, d)):
                        return k
        return None

    half = Fraction(1, 2)
    for k, p in enumerate(pieces):
        V = p.vertices
        for i in range(len(V)):
            a, b = V[i], V[(i + 1) % len(V)]
            pts = breakpoints(p.source, a, b) + [a, b]
            d = geo.sub(b, a)
            ts = sorted({_param(x, a, d) for x in pts}, key=float)
            for t0, t1 in zip(ts, ts[1:]):
                m = geo.add(a, geo.scale((t0 + t1) * half, d))
                rep.checked_segments += 1
                loc = f"piece {k} edge {i} at ({float(m[0]):.6g}, {float(m[1]):.6g})"
                src_edge = _edge_containing(ms.polygons[p.source], m)
                if src_edge is not None:
                    if (p.source, src_edge) in s.boundary or (p.source, src_edge) not in s.gluings:
                        rep.truncated.append(loc)
                        continue
                    src2, m2 = _glue_point(ms, p.source, src_edge, m)
                    other = piece_across(src2, m2, geo.neg(d))
                else:
                    src2, m2 = p.source, m
                    other = piece_across(src2, m2, geo.neg(d))
                if other is None:
                    rep.failures.append(f"gap next to {loc}")
                    continue
                x1 = geo.add(m, p.translation)
                x2 = geo.add(m2, pieces[other].translation)
                if _on_boundary(s, p.target, x1) or _on_boundary(s, pieces[other].target, x2):
                    rep.truncated.append(loc)
                    continue
                if not _same_surface_point(s, p.target, x1, pieces[other].target, x2):
                    rep.failures.append(f"gluing mismatch at {loc}")
    rep.passed = not rep.failures
    return rep


def _param(x, a, d):
    # parameter of x on the line a + t d
    if sign(d[0]) != 0:
        return (x[0] - a[0]) / d[0]
    return (x[1] - a[1]) / d[1]


def build_certificate(s: TranslationSurface, M: Mat2, anchor=(0, 0), anchor_polygon: int = 0) -> AutomorphismCertificate:
    """Certificate for x -> M x (then translated by -anchor) by developing
    copies of the polygons of s over the polygons of M.s.

    The copy of polygon ``anchor_polygon`` of s placed at offset ``anchor``
    in the coordinates of polygon ``anchor_polygon`` of M.s is the seed;
    further copies are reached across gluings.  All polygons of s must be
    convex.  The result still has to pass :func:`verify_affine_automorphism`.
    """
    if M.kind != "exact" or M.det() != 1:
        raise ValueError("exact area-preserving matrix required")
    ms = apply_matrix(s, M)
    D = ms.field_D
    if not all(geo.is_convex(list(P)) for P in s.polygons):
        raise ValueError("certificate builder needs convex polygons")
    tgt = [tuple(_cast(v, D) for v in P) for P in s.polygons]
    src = ms.polygons
    start = (anchor_polygon, anchor_polygon, _cast(anchor, D))
    seen = {start}
    queue = [start]
    pieces = []
    while queue:
        p, q, off = queue.pop(0)
        R = list(src[p])
        copy = _shift(tgt[q], off)
        Q = geo.clip_convex(copy, R)
        if not Q:
            continue
        pieces.append(Piece(p, tuple(Q), geo.neg(off), q))
        for i in range(len(Q)):
            a, b = Q[i], Q[(i + 1) % len(Q)]
            mid = geo.scale(Fraction(1, 2), geo.add(a, b))
            ce = _edge_containing(copy, mid)
            re = _edge_containing(R, mid)
            if ce is None and re is None:
                continue
            p2, q2, off2 = p, q, off
            if ce is not None:
                if (q, ce) in s.boundary or (q, ce) not in s.gluings:
                    continue
                qq, jj = s.gluings[(q, ce)]
                # partner copy shares this edge
                off2 = geo.add(off, geo.sub(tgt[q][ce], tgt[qq][(jj + 1) % len(tgt[qq])]))
                q2 = qq
            if re is not None:
                if (p, re) in s.boundary or (p, re) not in s.gluings:
                    continue
                pp, ii = ms.gluings[(p, re)]
                sigma = geo.sub(src[p][re], src[pp][(ii + 1) % len(src[pp])])
                p2 = pp
                off2 = geo.sub(off2, sigma)
            state = (p2, q2, tuple(off2))
            if state not in seen:
                seen.add(state)
                queue.append(state)
        if len(pieces) > 10000:
            raise RuntimeError("certificate development did not close up")
    return AutomorphismCertificate(M, tuple(pieces))


def cylinder_parabolic(s: TranslationSurface, length_bound: float = 100.0) -> Mat2:
    """Parabolic [[1, t], [0, 1]] that twists every horizontal cylinder an
    integer number of times; t is the least common multiple of the inverse
    moduli (which must be commensurable)."""
    from .cylinders import cylinder_decomposition

    cyls, residual = cylinder_decomposition(s, (1, 0), length_bound)
    if residual or not cyls:
        raise ValueError("horizontal direction is not a complete cylinder decomposition")
    mus = [c.waist[0] / c.height for c in cyls]
    base = mus[0]
    m = 1
    for mu in mus[1:]:
        r = base / mu
        if isinstance(r, QuadNum):
            if r.b != 0:
                raise ValueError("cylinder moduli are not commensurable")
            r = r.a
        r = Fraction(r)
        m = m * r.denominator // math.gcd(m, r.denominator)
    return Mat2.exact(1, base * m, 0, 1)


def cylinder_obstruction_check(s: TranslationSurface, cert: AutomorphismCertificate, waist_bound: float):
    """Joint consistency of a verified diagonal automorphism and the
    horizontal cylinder search.

    Returns (consistent, report, cylinders).  A surface with a verified
    hyperbolic diagonal automorphism cannot have a horizontal cylinder.
    """
    from .cylinders import cylinder_decomposition

    rep = verify_affine_automorphism(s, cert)
    a, b, c, d = cert.matrix.entries()
    diagonal = sign(b) == 0 and sign(c) == 0 and sign(a - 1) != 0
    cyls, _ = cylinder_decomposition(s, (1, 0), waist_bound)
    consistent = not (rep.passed and diagonal and cyls)
    return consistent, rep, cyls
