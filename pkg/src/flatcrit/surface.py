"""Translation surfaces given as polygons glued edge-to-edge by translations.

A surface is immutable.  Vertex coordinates are either exact (QuadNum in
a single field Q(sqrt(D))) or floats; the latter arise from rotations and
Teichmueller deformations, which are transcendental.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

from . import geometry as geo
from .exactnum import FieldMismatch, Fraction, QuadNum, sign, to_exact

__all__ = [
    "Mat2",
    "ConePoint",
    "Cylinder",
    "TranslationSurface",
    "SurfaceError",
    "build_surface",
    "validate",
    "area",
    "cone_angles",
    "apply_matrix",
    "geodesic_deform",
    "rotate",
    "cylinder_decomposition",
    "torus",
    "regular_octagon",
]


class SurfaceError(ValueError):
    """Construction failure; ``problems`` lists every violation found."""

    def __init__(self, problems: Sequence[str]):
        self.problems = list(problems)
        super().__init__("; ".join(self.problems))


@dataclass(frozen=True)
class Mat2:
    """2x2 matrix ((a, b), (c, d)).  ``kind`` is 'exact' or 'approximate'."""

    a: object
    b: object
    c: object
    d: object
    kind: str = "exact"

    @classmethod
    def exact(cls, a, b, c, d) -> "Mat2":
        return cls(*(x if isinstance(x, QuadNum) else QuadNum(Fraction(x)) for x in (a, b, c, d)), kind="exact")

    @classmethod
    def approx(cls, a, b, c, d) -> "Mat2":
        return cls(float(a), float(b), float(c), float(d), kind="approximate")

    @classmethod
    def identity(cls) -> "Mat2":
        return cls.exact(1, 0, 0, 1)

    def det(self):
        return self.a * self.d - self.b * self.c

    def is_unimodular(self, tol: float = 1e-12) -> bool:
        if self.kind == "exact":
            return self.det() == 1
        return abs(float(self.det()) - 1.0) <= tol

    def __matmul__(self, other: "Mat2") -> "Mat2":
        kind = "exact" if self.kind == other.kind == "exact" else "approximate"
        m = Mat2(
            self.a * other.a + self.b * other.c,
            self.a * other.b + self.b * other.d,
            self.c * other.a + self.d * other.c,
            self.c * other.b + self.d * other.d,
            kind=kind,
        )
        return m if kind == "exact" else m.to_float()

    def inverse(self) -> "Mat2":
        det = self.det()
        m = Mat2(self.d / det, -self.b / det, -self.c / det, self.a / det, kind=self.kind)
        return m if self.kind == "exact" else m.to_float()

    def to_float(self) -> "Mat2":
        return Mat2(float(self.a), float(self.b), float(self.c), float(self.d), kind="approximate")

    def rows(self):
        return ((self.a, self.b), (self.c, self.d))

    def apply(self, v):
        return (self.a * v[0] + self.b * v[1], self.c * v[0] + self.d * v[1])

    def entries(self):
        return (self.a, self.b, self.c, self.d)


def g(t: float) -> Mat2:
    """Teichmueller geodesic flow diag(e^{-t}, e^{t})."""
    return Mat2.approx(math.exp(-t), 0.0, 0.0, math.exp(t))


def h_upper(t) -> Mat2:
    """Upper parabolic [[1, t], [0, 1]] (exact if t is exact)."""
    if isinstance(t, float):
        return Mat2.approx(1, t, 0, 1)
    return Mat2.exact(1, t, 0, 1)


def h_lower(s) -> Mat2:
    if isinstance(s, float):
        return Mat2.approx(1, 0, s, 1)
    return Mat2.exact(1, 0, s, 1)


def rotation(theta: float) -> Mat2:
    c, s = math.cos(theta), math.sin(theta)
    return Mat2.approx(c, -s, s, c)


@dataclass(frozen=True)
class ConePoint:
    id: int
    vertices: frozenset
    multiplicity: int | None  # cone angle = 2*pi*multiplicity; None on the boundary
    boundary: bool = False

    @property
    def angle(self) -> float | None:
        return None if self.multiplicity is None else 2 * math.pi * self.multiplicity


@dataclass(frozen=True)
class Cylinder:
    waist: tuple  # holonomy of the core curve
    height: float
    boundary_saddle_connections: tuple = ()

    @property
    def circumference(self) -> float:
        return geo.norm(self.waist)

    @property
    def area(self) -> float:
        return self.circumference * self.height


@dataclass(frozen=True, eq=True)
class TranslationSurface:
    """Polygons (ccw vertex tuples) plus an involution on their edges.

    ``gluings`` maps every glued edge ``(polygon, edge)`` to its partner;
    edge ``i`` runs from vertex ``i`` to vertex ``i + 1``.  ``flipped``
    holds pairs glued by a half-turn (z -> -z + c) rather than a
    translation; such surfaces fail :func:`validate`.
    """

    polygons: tuple
    gluings: Mapping = field(compare=False, hash=False)
    boundary: frozenset = frozenset()
    field_D: int = 0
    label: str = ""
    names: tuple = ()
    flipped: frozenset = frozenset()

    def __post_init__(self):
        if not self.names:
            object.__setattr__(self, "names", tuple(f"P{i}" for i in range(len(self.polygons))))
        object.__setattr__(self, "_gluing_key", tuple(sorted(self.gluings.items())))

    def __eq__(self, other):
        if not isinstance(other, TranslationSurface):
            return NotImplemented
        return (
            self.polygons == other.polygons
            and self._gluing_key == other._gluing_key
            and self.boundary == other.boundary
            and self.field_D == other.field_D
            and self.names == other.names
            and self.flipped == other.flipped
        )

    def __hash__(self):
        return hash((self.polygons, self._gluing_key, self.boundary))

    @property
    def is_exact(self) -> bool:
        return all(isinstance(c, QuadNum) for poly in self.polygons for v in poly for c in v)

    @property
    def kind(self) -> str:
        return "exact" if self.is_exact else "approximate"

    def edge(self, p: int, i: int):
        poly = self.polygons[p]
        return geo.sub(poly[(i + 1) % len(poly)], poly[i])

    def edges(self) -> Iterable[tuple[int, int]]:
        for p, poly in enumerate(self.polygons):
            for i in range(len(poly)):
                yield (p, i)

    def edge_name(self, e) -> str:
        return f"{self.names[e[0]]}.{e[1]}"

    @property
    def has_boundary(self) -> bool:
        return bool(self.boundary)

    def vertex_classes(self) -> dict:
        """Map (polygon, vertex) -> class id; ids ordered by smallest member."""
        parent = {}

        def find(x):
            while parent[x] != x:
                parent[x] = parent[parent[x]]
                x = parent[x]
            return x

        def union(x, y):
            rx, ry = find(x), find(y)
            if rx != ry:
                if ry < rx:
                    rx, ry = ry, rx
                parent[ry] = rx

        for p, poly in enumerate(self.polygons):
            for i in range(len(poly)):
                parent[(p, i)] = (p, i)
        for (p, i), (q, j) in self.gluings.items():
            n, m = len(self.polygons[p]), len(self.polygons[q])
            if ((p, i), (q, j)) in self.flipped or ((q, j), (p, i)) in self.flipped:
                union((p, i), (q, j))
                union((p, (i + 1) % n), (q, (j + 1) % m))
            else:
                union((p, i), (q, (j + 1) % m))
                union((p, (i + 1) % n), (q, j))
        roots = sorted({find(x) for x in parent})
        ids = {r: k for k, r in enumerate(roots)}
        return {x: ids[find(x)] for x in parent}

    def area(self):
        return area(self)

    def transform_point(self, m: Mat2, p):
        return m.apply(p)


def _to_field(x, D):
    if isinstance(x, float):
        return x
    return to_exact(x, D)


def build_surface(spec: Mapping) -> TranslationSurface:
    """Construct and validate a surface from parsed file data.

    ``spec`` has keys ``D`` (int), ``polygons`` (list of (name, vertex
    list)), ``gluings`` (list of ((name, i), (name, j)[, 'flip'])), and
    optionally ``boundary`` (list of (name, i)) and ``label``.
    """
    D = int(spec.get("D", 0))
    names = []
    polys = []
    for name, verts in spec["polygons"]:
        if name in names:
            raise SurfaceError([f"duplicate polygon name {name}"])
        names.append(name)
        polys.append(tuple((_to_field(x, D), _to_field(y, D)) for x, y in verts))
    index = {n: k for k, n in enumerate(names)}

    def edge_id(ref):
        name, i = ref
        if name not in index:
            raise SurfaceError([f"unknown polygon {name}"])
        if not 0 <= i < len(polys[index[name]]):
            raise SurfaceError([f"edge {name}.{i} out of range"])
        return (index[name], int(i))

    gluings = {}
    flipped = set()
    problems = []
    for entry in spec.get("gluings", []):
        e, f = edge_id(entry[0]), edge_id(entry[1])
        for x in (e, f):
            if x in gluings:
                problems.append(f"edge {names[x[0]]}.{x[1]} glued twice")
        gluings[e] = f
        gluings[f] = e
        if len(entry) > 2 and entry[2] == "flip":
            flipped.add((e, f))
            flipped.add((f, e))
    boundary = frozenset(edge_id(b) for b in spec.get("boundary", []))
    if problems:
        raise SurfaceError(problems)
    s = TranslationSurface(
        polygons=tuple(polys),
        gluings=gluings,
        boundary=boundary,
        field_D=D,
        label=spec.get("label", ""),
        names=tuple(names),
        flipped=frozenset(flipped),
    )
    report = validate(s)
    if report:
        raise SurfaceError(report)
    return s


def validate(s: TranslationSurface) -> list[str]:
    """All invariant violations of ``s``; empty iff it is a valid surface."""
    report = []
    for p, poly in enumerate(s.polygons):
        for msg in geo.simple_polygon_problems(poly):
            report.append(f"non-simple polygon {s.names[p]}: {msg}")
        if s.is_exact:
            for v in poly:
                for c in v:
                    if c.D != s.field_D and c.b:
                        report.append(f"polygon {s.names[p]}: coordinate outside field sqrt({s.field_D})")
    for e in s.edges():
        if e in s.boundary:
            if e in s.gluings:
                report.append(f"edge {s.edge_name(e)} is both glued and boundary")
            continue
        f = s.gluings.get(e)
        if f is None:
            report.append(f"unglued edge {s.edge_name(e)}")
            continue
        if s.gluings.get(f) != e:
            report.append(f"gluing of {s.edge_name(e)} is not an involution")
            continue
        if e > f:
            continue
        he, hf = s.edge(*e), s.edge(*f)
        if (e, f) in s.flipped:
            report.append(f"gluing not a translation: {s.edge_name(e)} <-> {s.edge_name(f)}")
            continue
        if not _vec_equal(geo.add(he, hf), (0, 0), s.is_exact):
            if _vec_equal(he, hf, s.is_exact):
                report.append(f"gluing not a translation: {s.edge_name(e)} <-> {s.edge_name(f)}")
            else:
                report.append(
                    f"holonomy mismatch polygon {s.names[f[0]]} edge {f[1]} "
                    f"(glued to {s.edge_name(e)})"
                )
    if report:
        return report
    for cp in cone_angles(s):
        if not cp.boundary and (cp.multiplicity is None or cp.multiplicity < 1):
            report.append(f"cone point {cp.id} has invalid angle")
    return report


def _vec_equal(u, v, exact: bool, tol: float = 1e-9) -> bool:
    if exact:
        return u[0] == v[0] and u[1] == v[1]
    return abs(float(u[0]) - float(v[0])) <= tol and abs(float(u[1]) - float(v[1])) <= tol


def area(s: TranslationSurface):
    """Exact shoelace area (QuadNum for exact surfaces)."""
    total = 0
    for poly in s.polygons:
        total = total + geo.polygon_area(poly)
    return total


def _corner_directions(s: TranslationSurface, p: int, i: int):
    poly = s.polygons[p]
    n = len(poly)
    out = geo.sub(poly[(i + 1) % n], poly[i])
    back = geo.sub(poly[i - 1], poly[i])
    return out, back


def cone_angles(s: TranslationSurface) -> list[ConePoint]:
    """One ConePoint per vertex class.

    The multiplicity k (angle 2*pi*k) is the number of corners whose
    half-open angular sweep contains the positive horizontal direction:
    the corners around a cone point cover every direction exactly k times.
    """
    classes = s.vertex_classes()
    members: dict[int, list] = {}
    for v, c in classes.items():
        members.setdefault(c, []).append(v)
    on_boundary = set()
    for p, i in s.boundary:
        n = len(s.polygons[p])
        on_boundary.add(classes[(p, i)])
        on_boundary.add(classes[(p, (i + 1) % n)])
    result = []
    for cid in sorted(members):
        verts = frozenset(members[cid])
        if cid in on_boundary:
            result.append(ConePoint(cid, verts, None, boundary=True))
            continue
        count_h = count_v = 0
        for p, i in verts:
            out, back = _corner_directions(s, p, i)
            count_h += geo.sweep_contains(out, back, (1, 0))
            count_v += geo.sweep_contains(out, back, (0, 1))
        k = count_h if count_h == count_v else None
        result.append(ConePoint(cid, verts, k))
    return result


def genus(s: TranslationSurface) -> int | None:
    """Genus of a closed surface from the cone angles (Gauss-Bonnet)."""
    if s.boundary:
        return None
    total = sum(cp.multiplicity - 1 for cp in cone_angles(s))
    return total // 2 + 1


def apply_matrix(s: TranslationSurface, m: Mat2) -> TranslationSurface:
    """Post-compose the charts of ``s`` with ``m`` (det 1)."""
    if not m.is_unimodular():
        raise ValueError("not area-preserving")
    D = s.field_D
    if m.kind == "exact" and s.is_exact:
        for x in m.entries():
            if isinstance(x, QuadNum) and x.b and x.D != D:
                if D == 0 and all(not isinstance(v, QuadNum) or not v.b or v.D == x.D for v in m.entries()):
                    # a rational surface may be lifted into the matrix field
                    continue
                raise FieldMismatch(D, x.D)
        Dm = max((x.D for x in m.entries() if isinstance(x, QuadNum) and x.b), default=D)
        D = D or Dm
        polys = tuple(tuple(tuple(to_exact(c, D) for c in m.apply(v)) for v in poly) for poly in s.polygons)
    else:
        mf = m.to_float()
        polys = tuple(
            tuple(mf.apply((float(v[0]), float(v[1]))) for v in poly) for poly in s.polygons
        )
    return TranslationSurface(
        polygons=polys,
        gluings=dict(s.gluings),
        boundary=s.boundary,
        field_D=D,
        label=s.label,
        names=s.names,
        flipped=s.flipped,
    )


def geodesic_deform(s: TranslationSurface, t: float) -> TranslationSurface:
    """The surface g_t . s with g_t = diag(e^{-t}, e^{t})."""
    return apply_matrix(s, g(t))


def rotate(s: TranslationSurface, theta: float) -> TranslationSurface:
    return apply_matrix(s, rotation(theta))


def rotate_to_horizontal(s: TranslationSurface, direction) -> TranslationSurface:
    """Rotate so that ``direction`` becomes the positive horizontal."""
    x, y = float(direction[0]), float(direction[1])
    return rotate(s, -math.atan2(y, x))


def cylinder_decomposition(s: TranslationSurface, direction, length_bound: float):
    """Cylinders in ``direction`` with waist <= ``length_bound``.

    Returns ``(cylinders, residual)``; see :mod:`flatcrit.cylinders`.
    """
    from .cylinders import cylinder_decomposition as _cd

    return _cd(s, direction, length_bound)


# -- fixtures ---------------------------------------------------------------

def torus(width=1, height=1) -> TranslationSurface:
    """Rectangle torus with opposite sides glued."""
    w, h = Fraction(width), Fraction(height)
    verts = [(0, 0), (w, 0), (w, h), (0, h)]
    return build_surface(
        {
            "D": 0,
            "label": "torus",
            "polygons": [("T", verts)],
            "gluings": [(("T", 0), ("T", 2)), (("T", 1), ("T", 3))],
        }
    )


def regular_octagon() -> TranslationSurface:
    """Unit-side regular octagon, opposite sides glued (genus 2, D = 2)."""
    s = QuadNum(0, Fraction(1, 2), 2)  # sqrt(2)/2
    one = QuadNum(1, 0, 2)
    zero = QuadNum(0, 0, 2)
    verts = [
        (zero, zero),
        (one, zero),
        (one + s, s),
        (one + s, one + s),
        (one, one + 2 * s),
        (zero, one + 2 * s),
        (-s, one + s),
        (-s, s),
    ]
    return build_surface(
        {
            "D": 2,
            "label": "regular octagon",
            "polygons": [("O", verts)],
            "gluings": [(("O", i), ("O", i + 4)) for i in range(4)],
        }
    )
