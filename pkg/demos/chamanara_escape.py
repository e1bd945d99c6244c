"""Escape of mass on truncated Chamanara-type surfaces.

Level N keeps the first N generations of strips; the rest is a marked
boundary.  Orbits of slope 1 that reach the boundary have escaped.  The
escaping fraction roughly halves with every level, which is what one
expects if the cross cuts of the full surface carry no mass.
"""

import sys

from flatcrit import escape_mass_estimate
from flatcrit.flow import chamanara_surface


def main(samples=2000, seed=7):
    prev = None
    for N in range(3, 9):
        f = escape_mass_estimate(chamanara_surface(N), (1, 1), 100, samples, seed)
        ratio = f"   ratio {prev / f:.3f}" if prev and f else ""
        print(f"level {N}: escaped {f:.5f}{ratio}")
        prev = f


if __name__ == "__main__":
    main(int(sys.argv[1]) if len(sys.argv) > 1 else 2000)
