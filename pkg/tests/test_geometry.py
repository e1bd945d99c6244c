from fractions import Fraction

from hypothesis import given, settings
from hypothesis import strategies as st

from flatcrit import geometry as geo
from flatcrit.surface import apply_matrix, h_upper, torus
from flatcrit.flow import chamanara_surface
from flatcrit.triangulation import Triangulation

L_SHAPE = [(0, 0), (2, 0), (2, 1), (1, 1), (1, 2), (0, 2)]


def test_triangulate_nonconvex_area():
    tris = geo.triangulate(L_SHAPE)
    assert len(tris) == len(L_SHAPE) - 2
    total = sum(geo.polygon_area([L_SHAPE[i] for i in t]) for t in tris)
    assert total == geo.polygon_area(L_SHAPE) == 3


def test_sweep_contains_half_open():
    assert geo.sweep_contains((1, 0), (0, 1), (1, 0))
    assert not geo.sweep_contains((1, 0), (0, 1), (0, 1))
    assert geo.sweep_contains((1, 0), (-1, 0), (0, 1))
    assert not geo.sweep_contains((1, 0), (-1, 0), (0, -1))
    # reflex sweep
    assert geo.sweep_contains((1, 0), (0, -1), (-1, 0))


def test_clip_and_intersection_area():
    sq = [(0, 0), (2, 0), (2, 2), (0, 2)]
    shifted = [(1, 1), (3, 1), (3, 3), (1, 3)]
    assert geo.polygon_area(geo.clip_convex(shifted, sq)) == 1
    assert geo.intersection_area(sq, L_SHAPE) == 3
    assert geo.clip_convex([(5, 5), (6, 5), (6, 6)], sq) == []


coords = st.fractions(min_value=-10, max_value=10, max_denominator=50)


@given(st.tuples(coords, coords), st.tuples(coords, coords), st.tuples(coords, coords))
def test_orient_antisymmetric(a, b, c):
    assert geo.orient(a, b, c) == -geo.orient(b, a, c)
    assert geo.orient(a, b, c) == geo.orient(b, c, a)


def _total_area(tri):
    return sum(geo.cross(tri.edges[k][0], geo.neg(tri.edges[k][2])) for k in range(len(tri))) / 2


def test_delaunay_keeps_area_and_structure():
    for s in (torus(), apply_matrix(torus(), h_upper(5)), chamanara_surface(3)):
        tri = Triangulation(s)
        before = _total_area(tri)
        tri.make_delaunay()
        tri.check()
        assert tri.is_delaunay()
        assert _total_area(tri) == before


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 1000))
def test_random_flips_stay_consistent(seed):
    import random

    rnd = random.Random(seed)
    tri = Triangulation(apply_matrix(torus(), h_upper(Fraction(1, 3))))
    area0 = _total_area(tri)
    for _ in range(20):
        k, i = rnd.randrange(len(tri)), rnd.randrange(3)
        if tri.can_flip(k, i):
            tri.flip(k, i)
    tri.check()
    assert _total_area(tri) == area0
