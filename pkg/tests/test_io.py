import json
from importlib import resources

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from flatcrit.exactnum import QuadNum
from flatcrit.flow import chamanara_surface, equidistribution_test
from flatcrit.io import (
    FormatError,
    format_certificate,
    format_surface,
    histogram_to_csv,
    histogram_to_json,
    parse_certificate,
    parse_surface,
    recurrence_to_csv,
    to_json,
)
from flatcrit.surface import SurfaceError, apply_matrix, g, h_upper, torus
from flatcrit.veech import recurrence_profile, verify_affine_automorphism

DATA = resources.files("flatcrit") / "data"


@pytest.mark.parametrize("name", ["torus.tsf", "octagon.tsf", "chamanara-5.tsf"])
def test_fixture_round_trip(name):
    s = parse_surface((DATA / name).read_text())
    again = parse_surface(format_surface(s))
    assert again == s
    assert format_surface(again) == format_surface(s)


def test_approximate_surface_round_trip():
    s = apply_matrix(torus(), g(0.37))
    again = parse_surface(format_surface(s))
    assert again == s and again.kind == "approximate"


@settings(max_examples=20, deadline=None)
@given(st.fractions(min_value=-5, max_value=5, max_denominator=30))
def test_sheared_torus_round_trip(t):
    s = apply_matrix(torus(), h_upper(t))
    assert parse_surface(format_surface(s)) == s


@pytest.mark.parametrize(
    "surface,cert", [("torus.tsf", "torus-shear.cert"), ("octagon.tsf", "octagon-shear.cert"),
                     ("chamanara-5.tsf", "chamanara-baker.cert")]
)
def test_shipped_certificates_verify(surface, cert):
    s = parse_surface((DATA / surface).read_text())
    c = parse_certificate((DATA / cert).read_text(), s)
    assert verify_affine_automorphism(s, c).passed
    assert parse_certificate(format_certificate(c, s), s) == c


def test_octagon_fixture_field():
    s = parse_surface((DATA / "octagon.tsf").read_text())
    assert s.field_D == 2
    assert any(isinstance(c, QuadNum) and c.b for v in s.polygons[0] for c in v)


@pytest.mark.parametrize(
    "text,err",
    [
        ("[polygon P]\n0, 0\n", SurfaceError),
        ("0, 0\n", FormatError),
        ("[field]\nD = x\n", FormatError),
        ("[field]\nD = 0\n[polygon P]\n0 0\n", FormatError),
        ("[field]\nD = 0\n[polygon P]\n0, 0\n1, 0\n1, 1\n0, 1\n[gluing]\nP.0 - P.2\n", FormatError),
        ("[field]\nD = 0\n[wat]\n", FormatError),
        ("[field]\nD = 0\n[polygon P]\n0, 0\n1, 0\n1, 1\n0, 1\n[gluing]\nP.0 <-> P.2\n", SurfaceError),
        ("[field]\nD = 2\n[polygon P]\n0, 0\n1, 0\n1, sqrt(3)\n", FormatError),
    ],
)
def test_malformed_surfaces(text, err):
    with pytest.raises(err):
        parse_surface(text)


def test_json_seventeen_digits():
    text = to_json({"x": 0.1, "y": [1 / 3], "n": 2, "bad": float("nan")})
    data = json.loads(text)
    assert "0.10000000000000001" in text and "0.33333333333333331" in text
    assert data["n"] == 2 and data["bad"] is None


def test_recurrence_csv():
    text = recurrence_to_csv(recurrence_profile([], [0.0, 1.0], 1))
    assert text.splitlines()[0] == "t,epsilon,word"


def test_histogram_dumps():
    h = equidistribution_test(torus(), (1, 1), 5.0, bins=(2, 3), seed=0)
    data = json.loads(histogram_to_json(h))
    assert data["bins"] == [2, 3] and len(data["occupancy"][0]) == 2
    rows = histogram_to_csv(h).splitlines()
    assert rows[0] == "bin,polygon,i,j,occupancy,area" and len(rows) == 7


def test_chamanara_fixture_matches_generator():
    assert parse_surface((DATA / "chamanara-5.tsf").read_text()) == chamanara_surface(5)
