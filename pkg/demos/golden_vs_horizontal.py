"""Horizontal versus golden-slope flow on the square torus.

The horizontal flow is periodic: the systole of g_t(S) shrinks like e^{-t}
and the criterion integral converges.  The golden slope is badly
approximable, so the systole stays bounded below and the integral grows
linearly.
"""

import math
from fractions import Fraction

from flatcrit import QuadNum, cheung_eskin_C, criterion_integral, systole_envelope, torus

T = 20
GOLDEN = (1, QuadNum(Fraction(1, 2), Fraction(1, 2), 5))


def report(name, env):
    C, bounded = cheung_eskin_C(env, 1)
    print(f"{name}:")
    print(f"  envelope pieces        {len(env.pieces)}")
    print(f"  min systole            {env.min_value():.6g}")
    for t in (5, 10, 20):
        print(f"  integral to t={t:<2d}      {criterion_integral(env, t):.6f}")
    print(f"  Cheung-Eskin constant  {C:.6f} ({'bounded' if bounded else 'growing'})")


def main():
    s = torus()
    report("horizontal", systole_envelope(s, T))
    print(f"  closed form to t=20    {(1 - math.exp(-2 * T)) / 2:.6f}")
    report("golden slope", systole_envelope(s, T, direction=GOLDEN))


if __name__ == "__main__":
    main()
