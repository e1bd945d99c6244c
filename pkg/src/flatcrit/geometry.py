"""Planar primitives shared by the surface, saddle and veech modules.

Points and vectors are plain 2-tuples whose entries are either exact
numbers (QuadNum / Fraction / int) or floats.  Every predicate goes through
:func:`flatcrit.exactnum.sign`, so it is exact whenever the inputs are.
"""

from __future__ import annotations

from .exactnum import sign

Vec = tuple


def add(u, v):
    return (u[0] + v[0], u[1] + v[1])


def sub(u, v):
    return (u[0] - v[0], u[1] - v[1])


def neg(u):
    return (-u[0], -u[1])


def scale(c, u):
    return (c * u[0], c * u[1])


def cross(u, v):
    return u[0] * v[1] - u[1] * v[0]


def dot(u, v):
    return u[0] * v[0] + u[1] * v[1]


def orient(a, b, c) -> int:
    """Sign of the turn a -> b -> c (1 = counterclockwise)."""
    return sign(cross(sub(b, a), sub(c, a)))


def is_zero(u) -> bool:
    return sign(u[0]) == 0 and sign(u[1]) == 0


def to_float(u):
    return (float(u[0]), float(u[1]))


def norm(u) -> float:
    x, y = float(u[0]), float(u[1])
    return (x * x + y * y) ** 0.5


def _half(v) -> int:
    # 0 for directions in [0, pi), 1 for [pi, 2 pi)
    sy = sign(v[1])
    if sy > 0 or (sy == 0 and sign(v[0]) > 0):
        return 0
    return 1


def angle_less(u, v) -> bool:
    """Exact comparison of the polar angles of u and v in [0, 2 pi)."""
    hu, hv = _half(u), _half(v)
    if hu != hv:
        return hu < hv
    return sign(cross(u, v)) > 0


def same_direction(u, v) -> bool:
    return sign(cross(u, v)) == 0 and sign(dot(u, v)) > 0


def sweep_contains(a, b, r) -> bool:
    """Does the counterclockwise sweep from ``a`` (inclusive) to ``b``
    (exclusive) contain the direction ``r``?  The sweep has angle in (0, 2 pi).
    """
    if same_direction(a, r):
        return True
    if same_direction(b, r):
        return False
    a_lt_r = angle_less(a, r)
    r_lt_b = angle_less(r, b)
    if angle_less(a, b):
        return a_lt_r and r_lt_b
    return a_lt_r or r_lt_b


# -- polygons ---------------------------------------------------------------

def signed_area2(poly):
    """Twice the signed shoelace area."""
    n = len(poly)
    total = 0
    for i in range(n):
        total = total + cross(poly[i], poly[(i + 1) % n])
    return total


def polygon_area(poly):
    return signed_area2(poly) / 2


def edge_vectors(poly):
    n = len(poly)
    return [sub(poly[(i + 1) % n], poly[i]) for i in range(n)]


def on_segment(p, a, b) -> bool:
    """Is p on the closed segment ab?"""
    if orient(a, b, p) != 0:
        return False
    return sign(dot(sub(p, a), sub(p, b))) <= 0


def segments_cross(a, b, c, d) -> bool:
    """Do closed segments ab and cd share a point?"""
    o1, o2 = orient(a, b, c), orient(a, b, d)
    o3, o4 = orient(c, d, a), orient(c, d, b)
    if o1 * o2 < 0 and o3 * o4 < 0:
        return True
    return (
        (o1 == 0 and on_segment(c, a, b))
        or (o2 == 0 and on_segment(d, a, b))
        or (o3 == 0 and on_segment(a, c, d))
        or (o4 == 0 and on_segment(b, c, d))
    )


def simple_polygon_problems(poly) -> list[str]:
    """Reasons why ``poly`` is not a simple, positively oriented polygon."""
    n = len(poly)
    problems = []
    if n < 3:
        return ["fewer than 3 vertices"]
    for i in range(n):
        if is_zero(sub(poly[(i + 1) % n], poly[i])):
            problems.append(f"repeated vertex {i}")
    if problems:
        return problems
    for i in range(n):
        a, b = poly[i], poly[(i + 1) % n]
        for j in range(i + 1, n):
            if j == i or (j + 1) % n == i or j == (i + 1) % n:
                continue
            c, d = poly[j], poly[(j + 1) % n]
            if segments_cross(a, b, c, d):
                problems.append(f"edges {i} and {j} intersect")
    # adjacent edges folding back onto each other
    for i in range(n):
        u = sub(poly[i], poly[i - 1])
        v = sub(poly[(i + 1) % n], poly[i])
        if sign(cross(u, v)) == 0 and sign(dot(u, v)) < 0:
            problems.append(f"edges {i - 1 if i else n - 1} and {i} overlap")
    s = sign(signed_area2(poly))
    if s == 0:
        problems.append("zero area")
    elif s < 0:
        problems.append("clockwise orientation")
    return problems


def point_in_triangle(p, a, b, c, strict=False) -> bool:
    o1, o2, o3 = orient(a, b, p), orient(b, c, p), orient(c, a, p)
    if strict:
        return o1 > 0 and o2 > 0 and o3 > 0
    return o1 >= 0 and o2 >= 0 and o3 >= 0


def triangulate(poly) -> list[tuple[int, int, int]]:
    """Ear-clipping triangulation of a simple ccw polygon.

    Returns index triples (ccw).  Straight-angle vertices are never used as
    ear tips, so no triangle is degenerate.
    """
    idx = list(range(len(poly)))
    tris = []
    guard = 0
    while len(idx) > 3:
        m = len(idx)
        found = False
        for k in range(m):
            i0, i1, i2 = idx[k - 1], idx[k], idx[(k + 1) % m]
            a, b, c = poly[i0], poly[i1], poly[i2]
            if orient(a, b, c) <= 0:
                continue
            blocked = False
            for j in idx:
                if j in (i0, i1, i2):
                    continue
                if point_in_triangle(poly[j], a, b, c):
                    blocked = True
                    break
            if blocked:
                continue
            tris.append((i0, i1, i2))
            del idx[k]
            found = True
            break
        guard += 1
        if not found or guard > 10 * len(poly):
            raise ValueError("polygon cannot be triangulated (not simple?)")
    a, b, c = (poly[i] for i in idx)
    if orient(a, b, c) <= 0:
        raise ValueError("degenerate final triangle")
    tris.append(tuple(idx))
    return tris


def is_convex(poly) -> bool:
    n = len(poly)
    for i in range(n):
        if orient(poly[i - 1], poly[i], poly[(i + 1) % n]) < 0:
            return False
    return sign(signed_area2(poly)) > 0


def _line_intersection(p, q, a, b):
    # intersection of segment pq with the line through a, b
    d1 = cross(sub(b, a), sub(p, a))
    d2 = cross(sub(b, a), sub(q, a))
    t = d1 / (d1 - d2)
    return add(p, scale(t, sub(q, p)))


def clip_convex(subject, clip):
    """Intersection of polygon ``subject`` with convex ccw polygon ``clip``.

    Sutherland-Hodgman; exact for exact inputs.  Collinear and repeated
    vertices are removed from the output; an empty list means the
    intersection has no interior.
    """
    out = list(subject)
    n = len(clip)
    for i in range(n):
        a, b = clip[i], clip[(i + 1) % n]
        if not out:
            break
        inp, out = out, []
        m = len(inp)
        for j in range(m):
            p, q = inp[j], inp[(j + 1) % m]
            sp = orient(a, b, p)
            sq = orient(a, b, q)
            if sp >= 0:
                out.append(p)
                if sq < 0 and sp > 0:
                    out.append(_line_intersection(p, q, a, b))
            elif sq > 0:
                out.append(_line_intersection(p, q, a, b))
    return cleanup(out)


def cleanup(poly):
    """Drop repeated and collinear vertices; empty if no area remains."""
    pts = []
    for p in poly:
        if not pts or not is_zero(sub(p, pts[-1])):
            pts.append(p)
    while len(pts) > 1 and is_zero(sub(pts[0], pts[-1])):
        pts.pop()
    changed = True
    while changed and len(pts) >= 3:
        changed = False
        for i in range(len(pts)):
            if orient(pts[i - 1], pts[i], pts[(i + 1) % len(pts)]) == 0:
                del pts[i]
                changed = True
                break
    if len(pts) < 3 or sign(signed_area2(pts)) <= 0:
        return []
    return pts


def intersection_area(p, q):
    """Area of the intersection of convex polygon ``p`` with polygon ``q``.

    ``q`` may be non-convex; it is triangulated.
    """
    if is_convex(q):
        r = clip_convex(p, q)
        return polygon_area(r) if r else 0
    total = 0
    for i, j, k in triangulate(q):
        r = clip_convex(p, [q[i], q[j], q[k]])
        if r:
            total = total + polygon_area(r)
    return total


def apply(m, v):
    """Apply the 2x2 matrix ``m = ((a, b), (c, d))`` to vector v."""
    return (m[0][0] * v[0] + m[0][1] * v[1], m[1][0] * v[0] + m[1][1] * v[1])
