"""Triangulated view of a translation surface.

Triangles are stored by their three edge holonomies (exact or float) and
vertex classes; adjacency is an involution on (triangle, edge) pairs with
``None`` for marked-boundary edges.  Edge flips change the combinatorics
but never the surface, which lets the saddle-connection search keep a
well-shaped triangulation while the metric is deformed by g_t.
"""

from __future__ import annotations

import math

from . import geometry as geo
from .exactnum import sign


class Triangulation:
    def __init__(self, surface):
        self.surface = surface
        self.exact = surface.is_exact
        classes = surface.vertex_classes()
        self.edges = []  # [(e0, e1, e2)]
        self.verts = []  # [(c0, c1, c2)]
        self.adj = []  # [[(k, j) | None] * 3]
        self.origin = []  # (polygon, anchor position of vertex 0) or None after a flip
        self._fcache = {}
        poly_edge = {}
        diag = {}
        for p, poly in enumerate(surface.polygons):
            n = len(poly)
            for (i0, i1, i2) in geo.triangulate(poly):
                k = len(self.edges)
                ids = (i0, i1, i2)
                self.edges.append(tuple(geo.sub(poly[ids[(m + 1) % 3]], poly[ids[m]]) for m in range(3)))
                self.verts.append(tuple(classes[(p, i)] for i in ids))
                self.adj.append([None, None, None])
                self.origin.append((p, poly[i0]))
                for m in range(3):
                    a, b = ids[m], ids[(m + 1) % 3]
                    if b == (a + 1) % n:
                        poly_edge[(p, a)] = (k, m)
                    else:
                        other = diag.pop((p, b, a), None)
                        if other is None:
                            diag[(p, a, b)] = (k, m)
                        else:
                            self.adj[k][m] = other
                            self.adj[other[0]][other[1]] = (k, m)
        if diag:
            raise ValueError("inconsistent polygon triangulation")
        for e, (k, m) in poly_edge.items():
            f = surface.gluings.get(e)
            if f is None or e in surface.boundary:
                continue
            self.adj[k][m] = poly_edge[f]
        self.boundary_classes = {
            classes[(p, i)] for (p, i) in surface.boundary
        } | {classes[(p, (i + 1) % len(surface.polygons[p]))] for (p, i) in surface.boundary}

    def __len__(self):
        return len(self.edges)

    def float_edges(self, k):
        fe = self._fcache.get(k)
        if fe is None:
            fe = tuple((float(e[0]), float(e[1])) for e in self.edges[k])
            self._fcache[k] = fe
        return fe

    def corners(self):
        for k in range(len(self.edges)):
            for i in range(3):
                yield (k, i)

    # -- flips --------------------------------------------------------
    def can_flip(self, k, i) -> bool:
        nb = self.adj[k][i]
        if nb is None:
            return False
        k2, j = nb
        if k2 == k:
            return False
        e = self.edges[k]
        f = self.edges[k2]
        A = (0, 0)
        B = e[i]
        C = geo.add(B, e[(i + 1) % 3])
        D = f[(j + 1) % 3]
        return geo.orient(A, D, C) > 0 and geo.orient(D, B, C) > 0

    def flip(self, k, i):
        k2, j = self.adj[k][i]
        e, f = self.edges[k], self.edges[k2]
        vk, vk2 = self.verts[k], self.verts[k2]
        A = (0, 0)
        B = e[i]
        C = geo.add(B, e[(i + 1) % 3])
        D = f[(j + 1) % 3]
        vA, vB, vC, vD = vk[i], vk[(i + 1) % 3], vk[(i + 2) % 3], vk2[(j + 2) % 3]
        t1 = (f[(j + 1) % 3], geo.sub(C, D), e[(i + 2) % 3])
        t2 = (f[(j + 2) % 3], e[(i + 1) % 3], geo.sub(D, C))
        remap = {
            (k2, (j + 1) % 3): (k, 0),
            (k, (i + 2) % 3): (k, 2),
            (k2, (j + 2) % 3): (k2, 0),
            (k, (i + 1) % 3): (k2, 1),
        }
        old_adj = {oe: self.adj[oe[0]][oe[1]] for oe in remap}
        self.edges[k] = t1
        self.edges[k2] = t2
        self.verts[k] = (vA, vD, vC)
        self.verts[k2] = (vD, vB, vC)
        self.origin[k] = None
        self.origin[k2] = None
        self._fcache.pop(k, None)
        self._fcache.pop(k2, None)
        self.adj[k] = [None, (k2, 2), None]
        self.adj[k2] = [None, None, (k, 1)]
        for oe, ne in remap.items():
            partner = old_adj[oe]
            if partner is None:
                self.adj[ne[0]][ne[1]] = None
                continue
            partner = remap.get(partner, partner)
            self.adj[ne[0]][ne[1]] = partner
            self.adj[partner[0]][partner[1]] = ne

    # -- Delaunay -----------------------------------------------------
    def _view_edges(self, k, view):
        fe = self.float_edges(k)
        if view is None:
            return fe
        a, b, c, d = view
        return tuple((a * x + b * y, c * x + d * y) for x, y in fe)

    def cot_sum(self, k, i, view=None) -> float:
        """cot of the two angles opposite edge (k, i), in the view metric."""
        k2, j = self.adj[k][i]
        e = self._view_edges(k, view)
        f = self._view_edges(k2, view)
        ca = e[(i + 2) % 3]
        cb = (-e[(i + 1) % 3][0], -e[(i + 1) % 3][1])
        db = f[(j + 2) % 3]
        db = (-db[0], -db[1])
        da = f[(j + 1) % 3]
        cot_c = geo.dot(ca, cb) / geo.cross(ca, cb)
        cot_d = geo.dot(db, da) / geo.cross(db, da)
        return cot_c + cot_d

    def make_delaunay(self, view=None, tol: float = 1e-9, max_flips: int = 1_000_000) -> int:
        """Flip edges until every edge is Delaunay in ``view`` metric.

        ``view`` is a float 4-tuple (a, b, c, d) for the linear map applied
        before measuring.  Returns the number of flips performed.
        """
        flips = 0
        stack = [(k, i) for k in range(len(self.edges)) for i in range(3)]
        while stack:
            k, i = stack.pop()
            nb = self.adj[k][i]
            if nb is None or nb[0] == k:
                continue
            try:
                cs = self.cot_sum(k, i, view)
            except ZeroDivisionError:
                continue
            if cs < -tol and self.can_flip(k, i):
                k2 = nb[0]
                self.flip(k, i)
                flips += 1
                if flips > max_flips:
                    raise RuntimeError("Delaunay flipping did not terminate")
                stack.extend((k, m) for m in range(3))
                stack.extend((k2, m) for m in range(3))
        return flips

    def is_delaunay(self, view=None, tol: float = 1e-9) -> bool:
        for k in range(len(self.edges)):
            for i in range(3):
                nb = self.adj[k][i]
                if nb is not None and self.cot_sum(k, i, view) < -tol:
                    return False
        return True

    def max_circumradius(self, view=None) -> float:
        best = 0.0
        for k in range(len(self.edges)):
            e = self._view_edges(k, view)
            la, lb, lc = (math.hypot(*v) for v in e)
            area2 = abs(geo.cross(e[0], e[1]))
            best = max(best, la * lb * lc / (2 * area2))
        return best

    def check(self):
        """Internal consistency (used in tests)."""
        for k, e in enumerate(self.edges):
            s = geo.add(geo.add(e[0], e[1]), e[2])
            if self.exact:
                assert geo.is_zero(s), k
            assert sign(geo.cross(e[0], e[1])) > 0, k
            for i in range(3):
                nb = self.adj[k][i]
                if nb is None:
                    continue
                k2, j = nb
                assert self.adj[k2][j] == (k, i)
                if self.exact:
                    assert geo.is_zero(geo.add(e[i], self.edges[k2][j]))
                assert self.verts[k][i] == self.verts[k2][(j + 1) % 3]
                assert self.verts[k][(i + 1) % 3] == self.verts[k2][j]
