"""The regular octagon: short saddle connections, the horizontal cylinder
shear and an exactly verified affine automorphism."""

from flatcrit import (
    build_certificate,
    cone_angles,
    enumerate_saddle_connections,
    genus,
    regular_octagon,
    verify_affine_automorphism,
)
from flatcrit.exactnum import format_number
from flatcrit.veech import cylinder_parabolic


def main():
    s = regular_octagon()
    cones = cone_angles(s)
    print(f"genus {genus(s)}, cone angles {[round(c.angle, 6) for c in cones]}")

    scs = enumerate_saddle_connections(s, 2.7)
    lengths = sorted({round(sc.length, 6) for sc in scs})
    print(f"{len(scs)} oriented saddle connections up to length 2.7, lengths {lengths}")

    M = cylinder_parabolic(s)
    a, b, c, d = M.entries()
    print(f"parabolic from the cylinder moduli: [[{a}, {format_number(b)}], [{c}, {d}]]")
    cert = build_certificate(s, M)
    rep = verify_affine_automorphism(s, cert)
    print(f"certificate with {len(cert.pieces)} pieces: passed={rep.passed}, "
          f"{rep.checked_segments} boundary segments checked")


if __name__ == "__main__":
    main()
