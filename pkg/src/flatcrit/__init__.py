"""Translation surfaces: exact geometry, saddle connections, Teichmueller
geodesics, Veech certificates and translation-flow diagnostics."""

from .exactnum import FieldMismatch, QuadNum, parse_number
from .surface import (
    Cylinder,
    Mat2,
    SurfaceError,
    TranslationSurface,
    apply_matrix,
    area,
    build_surface,
    cone_angles,
    cylinder_decomposition,
    g,
    genus,
    geodesic_deform,
    h_upper,
    regular_octagon,
    torus,
    validate,
)
from .saddle import (
    SaddleConnection,
    diameter_estimate,
    enumerate_saddle_connections,
    shortest_saddle_connection,
    systole_estimate,
)
from .teich import (
    SystoleEnvelope,
    ThicknessProfile,
    cheung_eskin_C,
    criterion_integral,
    log_law_stat,
    masur_smillie_check,
    systole_envelope,
    thm12_criterion,
)
from .veech import (
    AutomorphismCertificate,
    build_certificate,
    hyp_distance,
    is_periodic,
    law_of_sines_bound,
    recurrence_profile,
    verify_affine_automorphism,
)
from .flow import (
    birkhoff_average,
    chamanara_surface,
    equidistribution_test,
    escape_mass_estimate,
    first_return_iet,
    trace,
)
from .io import read_surface, write_surface

__version__ = "0.1.0"
