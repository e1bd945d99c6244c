"""Saddle connections by planar unfolding, systole proxies and diameters.

The search starts at every triangle corner (a sector of some cone point)
and develops neighbouring triangles into the plane through a shrinking
visibility wedge.  A vertex strictly inside the wedge is the endpoint of a
saddle connection.  Wedge tests are exact on exact surfaces; only the
pruning radius is measured in floating point (with slack).
"""

from __future__ import annotations

import heapq
import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from . import geometry as geo
from .exactnum import sign
from .surface import TranslationSurface, area as surface_area
from .triangulation import Triangulation

__all__ = [
    "SaddleConnection",
    "SaddleConnectionList",
    "DiameterEstimate",
    "enumerate_saddle_connections",
    "shortest_saddle_connection",
    "systole_estimate",
    "diameter_estimate",
    "connections_to_csv",
]


@dataclass(frozen=True)
class SaddleConnection:
    holonomy: tuple
    start: int
    end: int
    start_sector: tuple = field(default=(), compare=False)
    path: tuple = field(default=(), compare=False, repr=False)
    # triangulation corner whose sweep holds the reversed holonomy at the end
    end_sector: tuple = field(default=(), compare=False, repr=False)

    @property
    def length(self) -> float:
        return geo.norm(self.holonomy)

    @property
    def horizontal(self) -> float:
        return abs(float(self.holonomy[0]))

    @property
    def vertical(self) -> float:
        return abs(float(self.holonomy[1]))

    def reversed(self) -> "SaddleConnection":
        return SaddleConnection(
            geo.neg(self.holonomy), self.end, self.start, self.end_sector, tuple(reversed(self.path)), self.start_sector
        )

    def sort_key(self):
        x, y = float(self.holonomy[0]), float(self.holonomy[1])
        return (self.length, abs(x), self.start, self.end, x, y)


class SaddleConnectionList(list):
    """List of connections plus search metadata."""

    def __init__(self, items=(), radius=0.0, warnings=()):
        super().__init__(items)
        self.radius = radius
        self.warnings = list(warnings)


def _seg_dist2(ax, ay, bx, by) -> float:
    # squared distance from the origin to segment ab
    dx, dy = bx - ax, by - ay
    den = dx * dx + dy * dy
    if den == 0:
        return ax * ax + ay * ay
    t = -(ax * dx + ay * dy) / den
    if t <= 0:
        return ax * ax + ay * ay
    if t >= 1:
        return bx * bx + by * by
    px, py = ax + t * dx, ay + t * dy
    return px * px + py * py


def _view_vec(view, v):
    if view is None:
        return v
    a, b, c, d = view
    return (a * v[0] + b * v[1], c * v[0] + d * v[1])


def _explore_corner(tri: Triangulation, k0: int, i0: int, L: float, view, found: list, flags: dict, wedge=None):
    """Saddle connections leaving corner (k0, i0) with view-length <= L."""
    exact = tri.exact
    L2 = L * L
    L2_slack = L2 * (1 + 1e-9) + 1e-300
    L2_exact = Fraction(L) ** 2 if exact and view is None else None
    start_cls = tri.verts[k0][i0]
    e = tri.edges[k0]
    fe = tri._view_edges(k0, view)

    def inside_radius(P, fP):
        if L2_exact is not None:
            return sign(P[0] * P[0] + P[1] * P[1] - L2_exact) <= 0
        return fP[0] * fP[0] + fP[1] * fP[1] <= L2 * (1 + 1e-12)

    A = e[i0]
    B = geo.add(A, e[(i0 + 1) % 3])
    fA = fe[i0]
    fB = (fA[0] + fe[(i0 + 1) % 3][0], fA[1] + fe[(i0 + 1) % 3][1])
    if wedge is None:
        wa, wb = A, B
        if tri.adj[k0][i0] is not None and inside_radius(A, fA):
            found.append(
                SaddleConnection(
                    A, start_cls, tri.verts[k0][(i0 + 1) % 3], (k0, i0), ((k0, i0),), tri.adj[k0][i0]
                )
            )
    else:
        wa, wb = wedge
        if sign(geo.cross(wa, A)) > 0:
            wa = A
        if sign(geo.cross(B, wb)) > 0:
            wb = B
        if sign(geo.cross(wa, wb)) <= 0:
            return
    # state: triangle, edge index, A, B, float A, float B, wedge, path node
    stack = [(k0, (i0 + 1) % 3, A, B, fA, fB, wa, wb, None)]
    adj = tri.adj
    edges = tri.edges
    while stack:
        k, j, A, B, fA, fB, wa, wb, node = stack.pop()
        if _seg_dist2(fA[0], fA[1], fB[0], fB[1]) > L2_slack:
            continue
        nb = adj[k][j]
        if nb is None:
            flags["truncated"] = True
            continue
        k2, j2 = nb
        node = (k2, j2, node)
        f = edges[k2]
        ff = tri._view_edges(k2, view)
        C = geo.add(A, f[(j2 + 1) % 3])
        g = ff[(j2 + 1) % 3]
        fC = (fA[0] + g[0], fA[1] + g[1])
        ca = sign(geo.cross(wa, C))
        cb = sign(geo.cross(C, wb))
        if ca > 0 and cb > 0 and inside_radius(C, fC):
            path = []
            n = node
            while n is not None:
                path.append((n[0], n[1]))
                n = n[2]
            found.append(
                SaddleConnection(
                    C, start_cls, tri.verts[k2][(j2 + 2) % 3], (k0, i0), tuple(reversed(path)), (k2, (j2 + 2) % 3)
                )
            )
        # sub-edge A -> C
        if ca > 0:
            na = wa if sign(geo.cross(wa, A)) <= 0 else A
            if sign(geo.cross(na, C)) > 0:
                stack.append((k2, (j2 + 1) % 3, A, C, fA, fC, na, C if cb > 0 else wb, node))
        # sub-edge C -> B
        if cb > 0:
            nb_ = wb if sign(geo.cross(B, wb)) <= 0 else B
            if sign(geo.cross(C, nb_)) > 0:
                stack.append((k2, (j2 + 2) % 3, C, B, fC, fB, C if ca > 0 else wa, nb_, node))


def _enumerate_tri(tri: Triangulation, L: float, view=None) -> SaddleConnectionList:
    found: list = []
    flags = {"truncated": False}
    for k, i in tri.corners():
        _explore_corner(tri, k, i, L, view, found, flags)
    warnings = ["truncation: boundary reached within search radius"] if flags["truncated"] else []
    if view is None:
        found.sort(key=SaddleConnection.sort_key)
    else:
        found.sort(key=lambda sc: (_view_len(sc, view),) + sc.sort_key())
    return SaddleConnectionList(found, radius=L, warnings=warnings)


def _view_len(sc, view) -> float:
    v = _view_vec(view, (float(sc.holonomy[0]), float(sc.holonomy[1])))
    return math.hypot(v[0], v[1])


def enumerate_saddle_connections(s: TranslationSurface, L: float, triangulation: Triangulation | None = None):
    """All oriented saddle connections of length <= L, shortest first.

    Each connection is reported once per outgoing sector of its start
    cone point.  On surfaces with a marked boundary, connections would
    have to cross the boundary are absent and ``warnings`` says so.
    """
    if L <= 0:
        raise ValueError("L must be positive")
    tri = triangulation or Triangulation(s)
    tri.make_delaunay()
    return _enumerate_tri(tri, float(L))


def _seed_radius(s) -> float:
    return math.sqrt(2 * float(surface_area(s)) / math.pi)


def shortest_saddle_connection(s: TranslationSurface, triangulation: Triangulation | None = None):
    """(length, witness) of a shortest saddle connection."""
    tri = triangulation or Triangulation(s)
    tri.make_delaunay()
    L = _seed_radius(s)
    while True:
        scs = _enumerate_tri(tri, L)
        if scs:
            best = scs[0]
            return best.length, best
        L *= 2
        if L > 1e12:
            raise RuntimeError("no saddle connection found")


def _shortest_in_view(tri: Triangulation, view, seed: float):
    L = seed
    while True:
        scs = _enumerate_tri(tri, L, view)
        if scs:
            return _view_len(scs[0], view), scs[0]
        L *= 2
        if L > 1e12:
            raise RuntimeError("no saddle connection found")


def systole_estimate(s: TranslationSurface, search_bound: float):
    """(lower proxy, closed-curve upper bound) for the systole.

    The lower proxy is the shortest saddle connection.  The upper bound is
    the shortest closed curve found among saddle-connection loops and
    cylinder waists in saddle-connection directions, up to ``search_bound``.
    """
    tri = Triangulation(s)
    tri.make_delaunay()
    shortest, _ = shortest_saddle_connection(s, tri)
    L = max(float(search_bound), shortest)
    scs = _enumerate_tri(tri, L)
    upper = math.inf
    for sc in scs:
        if sc.start == sc.end:
            upper = min(upper, sc.length)
    if not s.boundary:
        from .cylinders import cylinder_decomposition

        seen = []
        for sc in scs:
            if sc.start == sc.end or sc.length >= upper:
                continue
            h = sc.holonomy
            if any(sign(geo.cross(h, d)) == 0 for d in seen):
                continue
            seen.append(h)
            cyls, _ = cylinder_decomposition(s, h, min(upper, L))
            for c in cyls:
                upper = min(upper, c.circumference)
    return shortest, upper


# -- connections CSV ----------------------------------------------------------

def connections_to_csv(scs) -> str:
    from .exactnum import format_number

    lines = ["start,end,x,y,length"]
    for sc in scs:
        x, y = sc.holonomy
        lines.append(f"{sc.start},{sc.end},{format_number(x)},{format_number(y)},{sc.length!r}")
    return "\n".join(lines) + "\n"


# -- distances and diameter ---------------------------------------------------

@dataclass(frozen=True)
class DiameterEstimate:
    lower: float
    upper: float | None

    def __post_init__(self):
        if not self.lower > 0:
            raise ValueError("lower bound must be positive")
        if self.upper is not None and self.upper < self.lower - 1e-12:
            raise ValueError("upper bound below lower bound")


class _FloatSurface:
    """Float copy of a Delaunay triangulation for metric queries."""

    def __init__(self, tri: Triangulation):
        self.n = len(tri)
        self.edges = [tri.float_edges(k) for k in range(self.n)]
        self.verts = tri.verts
        self.adj = tri.adj
        # vertex positions relative to vertex 0
        self.pos = []
        for e in self.edges:
            self.pos.append(((0.0, 0.0), e[0], (e[0][0] + e[1][0], e[0][1] + e[1][1])))
        self.classes = sorted({c for vs in tri.verts for c in vs})


def _explore_float(fs: _FloatSurface, start_tri: int, p, R: float, on_vertex, on_triangle):
    """Visibility exploration from point ``p`` (local coords of start_tri).

    ``on_vertex(cls, dist)`` is called for every visible vertex copy;
    ``on_triangle(k, offset, wa, wb)`` for every developed triangle, where
    ``offset`` is the developed position of its vertex 0 relative to p and
    (wa, wb) the visibility wedge (None for the start triangle).
    """
    pos = fs.pos[start_tri]
    rel = [(q[0] - p[0], q[1] - p[1]) for q in pos]
    R2 = R * R
    on_triangle(start_tri, rel[0], None, None)
    for m in range(3):
        d = math.hypot(*rel[m])
        if d <= R:
            on_vertex(fs.verts[start_tri][m], d)
    stack = []
    for m in range(3):
        A, B = rel[m], rel[(m + 1) % 3]
        if geo.cross(A, B) > 0:
            stack.append((start_tri, m, A, B, A, B))
    _run_float_stack(fs, stack, R2, on_vertex, on_triangle)


def _explore_float_corner(fs: _FloatSurface, k0: int, i0: int, R: float, on_vertex, on_triangle=None):
    e = fs.edges[k0]
    A = e[i0]
    B = (A[0] + e[(i0 + 1) % 3][0], A[1] + e[(i0 + 1) % 3][1])
    d = math.hypot(*A)
    if fs.adj[k0][i0] is not None and d <= R:
        on_vertex(fs.verts[k0][(i0 + 1) % 3], d)
    _run_float_stack(fs, [(k0, (i0 + 1) % 3, A, B, A, B)], R * R, on_vertex, on_triangle)


def _run_float_stack(fs, stack, R2, on_vertex, on_triangle):
    R2s = R2 * (1 + 1e-9)
    while stack:
        k, j, A, B, wa, wb = stack.pop()
        if _seg_dist2(A[0], A[1], B[0], B[1]) > R2s:
            continue
        nb = fs.adj[k][j]
        if nb is None:
            continue
        k2, j2 = nb
        g = fs.edges[k2][(j2 + 1) % 3]
        C = (A[0] + g[0], A[1] + g[1])
        if on_triangle is not None:
            # position of vertex 0 of k2
            if j2 == 0:
                off = B
            elif j2 == 1:
                off = C
            else:
                off = A
            on_triangle(k2, off, wa, wb)
        ca = geo.cross(wa, C)
        cb = geo.cross(C, wb)
        if ca > 0 and cb > 0:
            d2 = C[0] * C[0] + C[1] * C[1]
            if d2 <= R2:
                on_vertex(fs.verts[k2][(j2 + 2) % 3], math.sqrt(d2))
        if ca > 0:
            na = A if geo.cross(wa, A) > 0 else wa
            nbw = C if cb > 0 else wb
            if geo.cross(na, nbw) > 0 and geo.cross(na, C) > 0:
                stack.append((k2, (j2 + 1) % 3, A, C, na, C if cb > 0 else wb))
        if cb > 0:
            nbw = B if geo.cross(B, wb) > 0 else wb
            naw = C if ca > 0 else wa
            if geo.cross(naw, nbw) > 0 and geo.cross(C, nbw) > 0:
                stack.append((k2, (j2 + 2) % 3, C, B, C if ca > 0 else wa, nbw))


class _PointSet:
    """Points on the surface grouped by triangle, local coordinates."""

    def __init__(self, fs: _FloatSurface, points):
        self.points = list(points)  # (k, (x, y))
        self.by_tri: dict[int, tuple[np.ndarray, np.ndarray]] = {}
        groups: dict[int, list] = {}
        for idx, (k, xy) in enumerate(self.points):
            groups.setdefault(k, []).append((idx, xy))
        for k, items in groups.items():
            ids = np.array([i for i, _ in items], dtype=int)
            xy = np.array([xy for _, xy in items], dtype=float)
            self.by_tri[k] = (ids, xy)

    def __len__(self):
        return len(self.points)


def _distances_from(fs, ps: _PointSet, src_k, src_p, R, ncls):
    """Direct (straight, visible) distances from one source to all points,
    and distances to every cone-point class."""
    direct = np.full(len(ps), np.inf)
    to_cone = np.full(ncls, np.inf)

    def on_vertex(cls, d):
        if d < to_cone[cls]:
            to_cone[cls] = d

    # developed copies are buffered and checked in one pass per triangle
    copies: dict[int, list] = {}

    def on_triangle(k, off, wa, wb):
        if k in ps.by_tri:
            if wa is None:
                copies.setdefault(k, []).append((off[0], off[1], 0.0, 0.0, 0.0, 0.0, 1.0))
            else:
                copies.setdefault(k, []).append((off[0], off[1], wa[0], wa[1], wb[0], wb[1], 0.0))

    _explore_float(fs, src_k, src_p, R, on_vertex, on_triangle)
    for k, rows in copies.items():
        ids, xy = ps.by_tri[k]
        c = np.array(rows)
        X = xy[None, :, 0] + c[:, 0:1]
        Y = xy[None, :, 1] + c[:, 1:2]
        ok = c[:, 6:7] > 0
        ok = ok | ((c[:, 2:3] * Y - c[:, 3:4] * X >= -1e-15) & (X * c[:, 5:6] - Y * c[:, 4:5] >= -1e-15))
        d = np.where(ok, np.hypot(X, Y), np.inf)
        d = d.min(axis=0)
        d[d > R] = np.inf
        np.minimum.at(direct, ids, d)
    return direct, to_cone


def _cone_graph(fs: _FloatSurface, R: float, ncls: int):
    """All-pairs shortest distances between cone points along saddle
    connections of length <= R."""
    C = np.full((ncls, ncls), np.inf)
    np.fill_diagonal(C, 0.0)
    for k in range(fs.n):
        for i in range(3):
            c0 = fs.verts[k][i]

            def on_vertex(cls, d, c0=c0):
                if d < C[c0, cls]:
                    C[c0, cls] = d
                    C[cls, c0] = d

            _explore_float_corner(fs, k, i, R, on_vertex)
    for m in range(ncls):
        C = np.minimum(C, C[:, m:m + 1] + C[m:m + 1, :])
    return C


def _pairwise(fs, ps, R, ncls):
    """Distance matrix between points of ``ps`` (paths through cone points
    included) plus point-to-cone distances."""
    n = len(ps)
    D = np.empty((n, n))
    P2C = np.empty((n, ncls))
    for a, (k, p) in enumerate(ps.points):
        D[a], P2C[a] = _distances_from(fs, ps, k, p, R, ncls)
    C = _cone_graph(fs, R, ncls)
    via = P2C @ np.zeros((ncls, 0)) if ncls == 0 else None
    if ncls:
        # min over c, c' of P2C[a, c] + C[c, c'] + P2C[b, c']
        left = np.min(P2C[:, :, None] + C[None, :, :], axis=1)  # n x ncls
        via = np.min(left[:, None, :] + P2C[None, :, :], axis=2)
        D = np.minimum(D, via)
    D = np.minimum(D, D.T)
    np.fill_diagonal(D, 0.0)
    return D, P2C, C


def _sample_points(fs: _FloatSurface, count: int, rng) -> list:
    """Circumcentres (pulled slightly inside) plus area-uniform random points."""
    pts = []
    areas = []
    for k in range(fs.n):
        a, b, c = fs.pos[k]
        ar = 0.5 * geo.cross(b, c)
        areas.append(ar)
        d = 2 * (b[0] * c[1] - b[1] * c[0])
        ux = (c[1] * (b[0] ** 2 + b[1] ** 2) - b[1] * (c[0] ** 2 + c[1] ** 2)) / d
        uy = (b[0] * (c[0] ** 2 + c[1] ** 2) - c[0] * (b[0] ** 2 + b[1] ** 2)) / d
        cx, cy = (b[0] + c[0]) / 3, (b[1] + c[1]) / 3
        lam = _barycentric((ux, uy), b, c)
        if min(lam) >= -1e-12:
            eps = 1e-9
            pts.append((k, (ux + eps * (cx - ux), uy + eps * (cy - uy))))
        else:
            pts.append((k, (cx, cy)))
    areas = np.array(areas)
    probs = areas / areas.sum()
    for _ in range(count):
        k = int(rng.choice(fs.n, p=probs))
        u, v = rng.random(2)
        if u + v > 1:
            u, v = 1 - u, 1 - v
        b, c = fs.pos[k][1], fs.pos[k][2]
        pts.append((k, (u * b[0] + v * c[0], u * b[1] + v * c[1])))
    return pts


def _barycentric(p, b, c):
    det = b[0] * c[1] - b[1] * c[0]
    u = (p[0] * c[1] - p[1] * c[0]) / det
    v = (b[0] * p[1] - b[1] * p[0]) / det
    return (1 - u - v, u, v)


def _mesh_points(fs: _FloatSurface, h: float):
    """Centroids of a uniform refinement of every triangle, and the largest
    distance from any point of a sub-triangle to its centroid."""
    pts = []
    cover = 0.0
    for k in range(fs.n):
        a, b, c = fs.pos[k]
        longest = max(math.hypot(*e) for e in fs.edges[k])
        n = max(1, math.ceil(longest / h))
        ub = (b[0] / n, b[1] / n)
        uc = (c[0] / n, c[1] / n)
        # up-triangles (i, j), (i+1, j), (i, j+1); down-triangles shifted
        for i in range(n):
            for j in range(n - i):
                base = (i * ub[0] + j * uc[0], i * ub[1] + j * uc[1])
                pts.append((k, (base[0] + (ub[0] + uc[0]) / 3, base[1] + (ub[1] + uc[1]) / 3)))
                if i + j < n - 1:
                    pts.append((k, (base[0] + 2 * (ub[0] + uc[0]) / 3, base[1] + 2 * (ub[1] + uc[1]) / 3)))
        corners = [(0.0, 0.0), ub, uc]
        cen = ((ub[0] + uc[0]) / 3, (ub[1] + uc[1]) / 3)
        cover = max(cover, max(math.hypot(q[0] - cen[0], q[1] - cen[1]) for q in corners))
    return pts, cover


def diameter_estimate(
    s: TranslationSurface,
    sample_count: int,
    *,
    seed: int = 0,
    mesh: float | None = None,
    with_upper: bool = True,
) -> DiameterEstimate:
    """Bracket the flat diameter of ``s``.

    ``lower`` is the largest certified distance between sampled points
    (Delaunay circumcentres plus ``sample_count`` area-uniform points) and
    cone points; distances are exact shortest paths made of visible
    straight segments.  ``upper`` is the largest distance between the
    centroids of a refinement with mesh size ``mesh`` plus twice the
    largest centroid-to-corner distance.  Surfaces with a marked boundary
    get no upper bound.
    """
    if sample_count < 2:
        raise ValueError("sample_count must be >= 2")
    tri = Triangulation(s)
    tri.make_delaunay()
    fs = _FloatSurface(tri)
    ncls = max(fs.classes) + 1
    rng = np.random.default_rng(seed)
    samples = _PointSet(fs, _sample_points(fs, sample_count, rng))
    R = 2.5 * tri.max_circumradius()
    for _ in range(12):
        D, P2C, C = _pairwise(fs, samples, R, ncls)
        vals = np.concatenate([D[np.isfinite(D)], P2C[np.isfinite(P2C)]])
        vals = vals[vals <= R]
        if np.isfinite(D).all() and np.isfinite(P2C).all() and D.max() <= R and P2C.max() <= R:
            break
        R *= 2
    lower = float(vals.max())
    upper = None
    if with_upper and not s.boundary:
        h = mesh if mesh is not None else math.sqrt(float(surface_area(s))) / 36
        pts, cover = _mesh_points(fs, h)
        nodes = _PointSet(fs, pts)
        # any pair distance <= R2 is exact, so start just above the lower bound
        R2 = 1.05 * lower + 2 * cover
        for _ in range(12):
            Dn, _, _ = _pairwise(fs, nodes, R2, ncls)
            if np.isfinite(Dn).all():
                break
            R2 *= 2
        upper = float(Dn.max()) + 2 * cover
        upper = max(upper, lower)
    return DiameterEstimate(lower, upper)


def point_distance_to_singularities(s: TranslationSurface, polygon_point=None, *, triangle_point=None) -> float:
    """Flat distance from a point to the nearest cone point (float)."""
    tri = Triangulation(s)
    fs = _FloatSurface(tri)
    if triangle_point is None:
        raise ValueError("triangle_point=(k, (x, y)) required")
    best = [math.inf]

    def on_vertex(cls, d):
        best[0] = min(best[0], d)

    R = 2 * tri.max_circumradius() + 1e-12
    k, p = triangle_point
    _explore_float(fs, k, p, R, on_vertex, lambda *a: None)
    return best[0]
