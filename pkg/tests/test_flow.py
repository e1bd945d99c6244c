import math
from fractions import Fraction

import numpy as np
import pytest

from flatcrit.exactnum import QuadNum
from flatcrit.flow import (
    ESCAPED,
    HIT,
    birkhoff_average,
    chamanara_surface,
    equidistribution_test,
    escape_mass_estimate,
    first_return_iet,
    parse_observable,
    random_starts,
    trace,
    trace_back,
)

PHI = (1 + math.sqrt(5)) / 2
GOLDEN = (1, QuadNum(Fraction(1, 2), Fraction(1, 2), 5))


def test_exact_trace_on_torus(unit_torus):
    tr = trace(unit_torus, (0, (Fraction(1, 4), Fraction(1, 2))), (1, 0), 3)
    assert tr.status == "completed"
    assert tr.end == (0, (Fraction(1, 4), Fraction(1, 2)))
    assert math.isclose(tr.length, 3)
    assert len(tr.segments) == 4


def test_corner_hit_at_end_of_budget(unit_torus):
    tr = trace(unit_torus, (0, (Fraction(1, 2), Fraction(1, 2))), (1, 1), math.sqrt(2) / 2)
    assert tr.status == HIT
    tr = trace(unit_torus, (0, (0.5, 0.5)), (1.0, 1.0), 10.0)
    assert tr.status == HIT and math.isclose(tr.length, math.sqrt(2) / 2)


def test_start_on_vertex_rejected(unit_torus):
    with pytest.raises(ValueError):
        trace(unit_torus, (0, (0, 0)), (1, 2), 1)


def test_segments_respect_gluings(octagon):
    tr = trace(octagon, (0, (0.5, 0.7)), (0.3, 1.0), 30.0)
    assert tr.status == "completed"
    total = sum(math.dist(a, b) for _, a, b in tr.segments)
    assert math.isclose(total, tr.length, rel_tol=1e-12)
    assert math.isclose(tr.length, 30.0, rel_tol=1e-12)


@pytest.mark.parametrize("which", ["torus", "octagon"])
def test_reversibility_sample(unit_torus, octagon, which):
    s = unit_torus if which == "torus" else octagon
    rng = np.random.default_rng(2)
    for st in random_starts(s, 100, 9):
        th = rng.uniform(0, 2 * math.pi)
        d = (math.cos(th), math.sin(th))
        fwd = trace(s, st, d, rng.uniform(0, 20))
        if fwd.status != "completed":
            continue
        back = trace_back(s, fwd)
        assert back.status == "completed"
        assert back.end[0] == st[0]
        assert math.dist(back.end[1], st[1]) < 1e-9


def test_golden_iet(unit_torus):
    iet = first_return_iet(unit_torus, (0, 0), GOLDEN, 10)
    # oracle: rotation by -phi mod 1 on the bottom edge, lengths {2 - phi, phi - 1}
    assert sorted(float(l) for l in iet.lengths) == pytest.approx([2 - PHI, PHI - 1], abs=1e-9)
    assert iet.permutation == (1, 0)
    x = np.linspace(0.01, 0.99, 50)
    assert np.allclose(np.mod(iet(x), 1.0), np.mod(x + PHI, 1.0))


def test_rational_iets(unit_torus):
    iet = first_return_iet(unit_torus, (0, 0), (0, 1), 10)
    assert iet.permutation == (0,)
    iet = first_return_iet(unit_torus, (0, 0), (1, 2), 10)
    assert [float(l) for l in iet.lengths] == [0.5, 0.5] and iet.permutation == (1, 0)


def test_iet_rejects_parallel_direction(unit_torus):
    with pytest.raises(ValueError):
        first_return_iet(unit_torus, (0, 0), (1, 0), 10)


def test_birkhoff_golden(unit_torus):
    res = birkhoff_average(unit_torus, (1.0, PHI), "strip-x:0:0.5", 1e4, random_starts(unit_torus, 10, 4))
    assert all(abs(v - 0.5) < 0.02 for v in res.averages)
    assert res.dispersion < 0.02


def test_birkhoff_closed_orbit_and_const(unit_torus):
    # slope-1 orbit through (0, 1/4) spends exactly half of each period sqrt 2 in x < 1/2
    T = 10 * math.sqrt(2)
    res = birkhoff_average(unit_torus, (1, 1), "strip-x:0:0.5", T, [(0, (0.0, 0.25))])
    assert abs(res.averages[0] - 0.5) < 1e-12
    res = birkhoff_average(unit_torus, (1, 1), "const", 3.0, [(0, (0.3, 0.25))])
    assert res.averages == [1.0]


def test_birkhoff_flags_singular_start(unit_torus):
    res = birkhoff_average(unit_torus, (1, 1), "const", 5.0, [(0, (0.5, 0.5)), (0, (0.2, 0.3))])
    assert res.averages[0] is None and res.flags[0] == HIT
    assert res.averages[1] == 1.0


def test_observable_names():
    assert parse_observable("const") == ("const",)
    with pytest.raises(ValueError):
        parse_observable("strip-x:1:0")
    with pytest.raises(ValueError):
        parse_observable("bogus")


def test_equidistribution(unit_torus):
    assert equidistribution_test(unit_torus, (1.0, PHI), 1e4, seed=1).discrepancy <= 0.05
    assert equidistribution_test(unit_torus, (1, 1), 1e4, seed=1).discrepancy >= 0.3
    tiny = equidistribution_test(unit_torus, (1.0, PHI), 1e-6, seed=1)
    assert tiny.discrepancy == pytest.approx(0.99, abs=1e-6)


def test_chamanara_trace_escapes():
    s = chamanara_surface(3)
    # from the centre with slope 1 the orbit runs into the corner (1, 1),
    # an endpoint of the marked truncation boundary
    tr = trace(s, (0, (Fraction(1, 2), Fraction(1, 2))), (1, 1), 100)
    assert tr.status == ESCAPED and math.isclose(tr.escape_time, math.sqrt(2) / 2)


def test_escape_monotonicity():
    s3, s5 = chamanara_surface(3), chamanara_surface(5)
    a = escape_mass_estimate(s3, (1, 1), 20, 400, seed=2)
    b = escape_mass_estimate(s3, (1, 1), 60, 400, seed=2)
    c = escape_mass_estimate(s5, (1, 1), 60, 400, seed=2)
    assert a <= b and c <= b
    assert b <= 8 * 2.0**-3


def test_escape_zero_without_boundary(unit_torus):
    assert escape_mass_estimate(unit_torus, (1, 1), 50, 10, seed=0) == 0.0


def test_threads_do_not_change_results():
    s = chamanara_surface(4)
    assert escape_mass_estimate(s, (1, 1), 50, 200, 5) == escape_mass_estimate(s, (1, 1), 50, 200, 5, threads=2)
