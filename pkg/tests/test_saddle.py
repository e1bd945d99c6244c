import math
from collections import Counter
from fractions import Fraction

import pytest

from flatcrit.exactnum import QuadNum
from flatcrit.saddle import (
    connections_to_csv,
    diameter_estimate,
    enumerate_saddle_connections,
    shortest_saddle_connection,
    systole_estimate,
)
from flatcrit.surface import Mat2, apply_matrix, g, h_upper, torus
from flatcrit.flow import chamanara_surface


def primitive_count(L):
    """Brute-force oracle: primitive integer vectors in the closed L-disk."""
    n = int(L) + 1
    return sum(
        1
        for p in range(-n, n + 1)
        for q in range(-n, n + 1)
        if (p or q) and math.gcd(p, q) == 1 and p * p + q * q <= L * L
    )


@pytest.mark.parametrize("L", [0.5, 1.5, 5, 10])
def test_torus_counts_match_lattice(unit_torus, L):
    scs = enumerate_saddle_connections(unit_torus, L)
    assert len(scs) == primitive_count(L)
    assert Counter(sc.holonomy for sc in scs).most_common(1)[0][1] == 1 if scs else True


def test_torus_l15_holonomies(unit_torus):
    got = {tuple(round(float(c)) for c in sc.holonomy) for sc in enumerate_saddle_connections(unit_torus, 1.5)}
    assert got == {(1, 0), (-1, 0), (0, 1), (0, -1), (1, 1), (-1, -1), (1, -1), (-1, 1)}


def test_octagon_short_connections(octagon):
    scs = enumerate_saddle_connections(octagon, 1.01)
    assert len(scs) == 8
    assert all(math.isclose(sc.length, 1.0) for sc in scs)
    # nothing between 1 and sqrt(2 + sqrt 2)
    scs = enumerate_saddle_connections(octagon, 1.84)
    assert len(scs) == 8
    assert len(enumerate_saddle_connections(octagon, 1.85)) > 8


@pytest.mark.parametrize("which", ["torus", "octagon"])
def test_doubling_prefix(unit_torus, octagon, which):
    s = unit_torus if which == "torus" else octagon
    small = enumerate_saddle_connections(s, 3)
    big = enumerate_saddle_connections(s, 6)
    assert [sc.holonomy for sc in big[: len(small)]] == [sc.holonomy for sc in small]
    assert all(sc.length > 3 for sc in big[len(small):])


@pytest.mark.parametrize("which", ["torus", "octagon"])
def test_orientation_pairing(unit_torus, octagon, which):
    s = unit_torus if which == "torus" else octagon
    scs = enumerate_saddle_connections(s, 4)
    fwd = Counter((sc.holonomy, sc.start, sc.end) for sc in scs)
    back = Counter((tuple(-c for c in sc.holonomy), sc.end, sc.start) for sc in scs)
    assert fwd == back


def test_equivariance_under_shear(unit_torus):
    M = h_upper(1)
    L = 5
    sheared = {sc.holonomy for sc in enumerate_saddle_connections(apply_matrix(unit_torus, M), L)}
    # ||M^{-1}|| < 2 so radius 2L covers every preimage
    pulled = {M.apply(sc.holonomy) for sc in enumerate_saddle_connections(unit_torus, 2 * L)}
    pulled = {v for v in pulled if float(v[0]) ** 2 + float(v[1]) ** 2 <= L * L}
    assert sheared == pulled


def test_shortest(unit_torus, octagon):
    length, w = shortest_saddle_connection(unit_torus)
    assert length == 1 and w.holonomy in {(1, 0), (0, 1), (-1, 0), (0, -1)}
    length, w = shortest_saddle_connection(apply_matrix(unit_torus, g(math.log(2))))
    assert math.isclose(length, 0.5, rel_tol=1e-12)
    assert math.isclose(abs(float(w.holonomy[0])), 0.5, rel_tol=1e-12) and abs(float(w.holonomy[1])) < 1e-12
    length, _ = shortest_saddle_connection(octagon)
    assert math.isclose(length, 1.0, rel_tol=1e-12)


def test_systole_estimate(unit_torus, octagon):
    assert systole_estimate(unit_torus, 2) == (1, 1)
    lo, hi = systole_estimate(apply_matrix(unit_torus, g(math.log(2))), 2)
    assert math.isclose(lo, 0.5) and math.isclose(hi, 0.5)
    lo, hi = systole_estimate(octagon, 2)
    assert math.isclose(lo, 1.0) and hi <= 1.0 + 1e-12 and lo <= hi


def test_boundary_truncation_warning():
    scs = enumerate_saddle_connections(chamanara_surface(3), 2)
    assert scs.warnings


def test_csv_columns(unit_torus):
    text = connections_to_csv(enumerate_saddle_connections(unit_torus, 1.5))
    lines = text.splitlines()
    assert lines[0] == "start,end,x,y,length" and len(lines) == 9


def test_torus_diameter_bracket(unit_torus):
    # grid oracle: the farthest point from a corner is the centre, at sqrt(2)/2
    d = diameter_estimate(unit_torus, 50, seed=1)
    assert 0.70 <= d.lower <= math.sqrt(2) / 2 + 1e-12
    assert math.sqrt(2) / 2 <= d.upper <= 0.75


def test_deformed_torus_diameter_bracket(unit_torus):
    s = apply_matrix(unit_torus, g(math.log(2)))
    d = diameter_estimate(s, 30, seed=1, mesh=0.05)
    oracle = math.hypot(0.25, 1.0)  # half-diagonal of the 0.5 x 2 rectangle
    assert 1.0 <= d.lower <= oracle + 1e-12
    assert oracle <= d.upper <= 1.2


def test_diameter_two_samples_still_lower_bound(unit_torus):
    d = diameter_estimate(unit_torus, 2, seed=3, with_upper=False)
    assert 0 < d.lower <= math.sqrt(2) / 2 + 1e-12


def test_diameter_refuses_upper_with_boundary():
    d = diameter_estimate(chamanara_surface(2), 5, seed=0)
    assert d.upper is None and d.lower > 0
