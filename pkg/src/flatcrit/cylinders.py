"""Cylinder decompositions in a given direction.

The surface is turned so that the direction becomes horizontal (by the
exact similarity [[p, q], [-q, p]]), then horizontal saddle connections are
chained into cylinder bottoms: the bottom continues at each cone point with
the rightward separatrix reached by turning clockwise through an angle pi
from the incoming edge.  The height is the smallest vertical displacement
of a saddle connection leaving the bottom into the cylinder.
"""

from __future__ import annotations

import dataclasses
import math
from fractions import Fraction

from . import geometry as geo
from .exactnum import QuadNum, is_exact, sign
from .saddle import SaddleConnection, _explore_corner
from .surface import Cylinder, TranslationSurface, area as surface_area
from .triangulation import Triangulation

_RIGHT = (1, 0)


def _exact_direction(direction, exact):
    p, q = direction
    if exact:
        p = p if isinstance(p, QuadNum) else Fraction(p)
        q = q if isinstance(q, QuadNum) else Fraction(q)
    if sign(p) == 0 and sign(q) == 0:
        raise ValueError("zero direction")
    return p, q


def _turned(s: TranslationSurface, p, q) -> TranslationSurface:
    polys = tuple(tuple((p * x + q * y, -q * x + p * y) for x, y in poly) for poly in s.polygons)
    return dataclasses.replace(s, polygons=polys)


def _sweep(tri, c):
    k, i = c
    e = tri.edges[k]
    return e[i], geo.neg(e[(i + 2) % 3])


def _cw(tri, c):
    nb = tri.adj[c[0]][c[1]]
    if nb is None:
        return None
    return (nb[0], (nb[1] + 1) % 3)


def _rightward_corner(tri, c):
    """First corner clockwise from ``c`` whose sweep holds direction (1, 0)."""
    for _ in range(3 * len(tri) + 1):
        c = _cw(tri, c)
        if c is None:
            return None
        a, b = _sweep(tri, c)
        if geo.sweep_contains(a, b, _RIGHT):
            return c
    return None


def _horizontal_from(tri, c, L):
    """The rightward horizontal saddle connection leaving corner ``c``, if
    it is no longer than L."""
    k, i = c
    e = tri.edges[k][i]
    if sign(e[1]) == 0 and sign(e[0]) > 0:
        if tri.adj[k][i] is None:
            return None
        if float(e[0]) > L * (1 + 1e-12):
            return None
        return SaddleConnection(e, tri.verts[k][i], tri.verts[k][(i + 1) % 3], c, (c,), tri.adj[k][i])
    found: list = []
    flags = {"truncated": False}
    eps = Fraction(1, 10**9)
    _explore_corner(tri, k, i, L, None, found, flags, wedge=((1, -eps), (1, eps)))
    for sc in found:
        if sign(sc.holonomy[1]) == 0 and sign(sc.holonomy[0]) > 0:
            return sc
    return None


def _height(tri, c, waist: float, limit: float):
    """Exact height of the cylinder whose bottom leaves corner ``c``."""
    k, i = c
    _, b = _sweep(tri, c)
    bx, by = float(b[0]), float(b[1])
    cot_b = bx / by
    L = 2 * waist
    while L <= limit:
        found: list = []
        _explore_corner(tri, k, i, L, None, found, {"truncated": False}, wedge=(_RIGHT, b))
        if found:
            h = min((sc.holonomy[1] for sc in found), key=float)
            hf = float(h)
            need = math.hypot(hf, hf * cot_b + waist)
            if L >= need:
                return h
            L = need * (1 + 1e-9)
        else:
            L *= 2
    return None


def cylinder_decomposition(s: TranslationSurface, direction, length_bound: float):
    """Cylinders in ``direction`` with waist length <= ``length_bound``.

    Returns ``(cylinders, residual)``.  ``residual`` is true when the
    cylinders found do not fill the surface: some separatrix did not close
    up within the bound, reached a marked boundary, or the direction is
    minimal.  Waists and boundary saddle connections are holonomies in the
    original coordinates.
    """
    if length_bound <= 0:
        raise ValueError("length_bound must be positive")
    exact = s.is_exact
    p, q = _exact_direction(direction, exact)
    n2 = p * p + q * q
    nd = math.sqrt(float(n2))
    turned = _turned(s, p, q)
    tri = Triangulation(turned)
    tri.make_delaunay()
    L = float(length_bound) * nd

    corners = [c for c in tri.corners() if geo.sweep_contains(*_sweep(tri, c), _RIGHT)]
    horiz = {}
    for c in corners:
        sc = _horizontal_from(tri, c, L)
        if sc is not None:
            horiz[c] = sc
    nxt = {c: _rightward_corner(tri, sc.end_sector) for c, sc in horiz.items()}

    cycles = []
    seen = set()
    for c0 in sorted(horiz):
        if c0 in seen:
            continue
        chain = []
        c = c0
        ok = True
        while c not in seen:
            if c not in horiz:
                ok = False
                break
            seen.add(c)
            chain.append(c)
            c = nxt[c]
            if c is None:
                ok = False
                break
        if ok and c == c0:
            cycles.append(chain)

    def back(v):
        # inverse of the turning similarity
        x, y = v
        return ((p * x - q * y) / n2, (q * x + p * y) / n2)

    exact_scale = None
    if exact and sign(q) == 0:
        exact_scale = abs(p)
    elif exact and not isinstance(n2, QuadNum):
        fr = Fraction(n2)
        rn, rd = math.isqrt(fr.numerator), math.isqrt(fr.denominator)
        if rn * rn == fr.numerator and rd * rd == fr.denominator:
            exact_scale = Fraction(rn, rd)

    cylinders = []
    total = 0
    resolved = True
    for chain in cycles:
        w = 0
        for c in chain:
            w = w + horiz[c].holonomy[0]
        wf = float(w)
        if wf > L * (1 + 1e-12):
            continue
        h = _height(tri, chain[0], wf, max(1e6, 1e3 * L))
        if h is None:
            resolved = False
            continue
        total = total + w * h
        height = h / exact_scale if exact_scale is not None else float(h) / nd
        bsc = tuple(
            dataclasses.replace(horiz[c], holonomy=back(horiz[c].holonomy), path=(), start_sector=(), end_sector=())
            for c in chain
        )
        cylinders.append(Cylinder(back((w, 0)), height, bsc))
    cylinders.sort(key=lambda cy: (float(cy.height), cy.circumference))
    full = surface_area(turned)
    if exact:
        residual = sign(full - total) != 0
    else:
        residual = abs(float(full) - float(total)) > 1e-9 * max(1.0, float(full))
    return cylinders, residual or not resolved
