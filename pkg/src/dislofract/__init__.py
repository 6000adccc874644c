"""Common attractors of Hutchinson operator pairs in dislocated metric spaces.

The pipeline: declare a dislocated metric (``metric``), represent compact
sets as finite point clouds and measure them with the Hausdorff dislocated
distance (``hausdorff``), iterate a pair of Hutchinson operators to their
common attractor with certified geometric convergence (``gifs``), bound
reconstruction error through the collage inequality (``collage``), and test
well-posedness against perturbed attractor sequences (``wellposed``).  The
``cli`` module exposes all of it on the command line.
"""

from .errors import (
    CertificateError,
    ContractionError,
    ConvergenceError,
    DocumentError,
    InputError,
)
from .metric import (
    ABS_MAX,
    EUCLIDEAN,
    TABLE,
    AxiomReport,
    DislocatedMetricSpec,
    default_tolerance,
    delta,
    delta_matrix,
    delta_pairs,
    verify_axioms,
)
from .hausdorff import (
    FiniteCompact,
    SpatialIndex,
    default_snap,
    hausdorff_accelerated,
    hausdorff_auto,
    hausdorff_distance,
    point_to_set,
    sigma,
    snap_points,
)
from .gifs import (
    AffineMapSpec,
    ContractionReport,
    GifsSystem,
    IterationStep,
    IterationTrace,
    apply_map,
    check_pair_contraction,
    check_rational_contraction,
    hutchinson_S,
    hutchinson_T,
    iterate_to_attractor,
    rational_functional,
    uniqueness_probe,
)
from .collage import (
    CollageCertificate,
    CollageFamily,
    MapTemplate,
    collage_certificate,
    collage_distance,
    collage_fit,
)
from .wellposed import (
    WellposednessReport,
    default_seed_set,
    halving_scales,
    wellposedness_check,
)
from .document import SystemDocument, load_document, parse_document

__version__ = "0.1.0"

__all__ = [
    "ABS_MAX",
    "EUCLIDEAN",
    "TABLE",
    "AffineMapSpec",
    "AxiomReport",
    "CertificateError",
    "CollageCertificate",
    "CollageFamily",
    "ContractionError",
    "ContractionReport",
    "ConvergenceError",
    "DislocatedMetricSpec",
    "DocumentError",
    "FiniteCompact",
    "GifsSystem",
    "InputError",
    "IterationStep",
    "IterationTrace",
    "MapTemplate",
    "SpatialIndex",
    "SystemDocument",
    "WellposednessReport",
    "apply_map",
    "check_pair_contraction",
    "check_rational_contraction",
    "collage_certificate",
    "collage_distance",
    "collage_fit",
    "default_seed_set",
    "default_snap",
    "default_tolerance",
    "delta",
    "delta_matrix",
    "delta_pairs",
    "halving_scales",
    "hausdorff_accelerated",
    "hausdorff_auto",
    "hausdorff_distance",
    "hutchinson_S",
    "hutchinson_T",
    "iterate_to_attractor",
    "load_document",
    "parse_document",
    "point_to_set",
    "rational_functional",
    "sigma",
    "snap_points",
    "uniqueness_probe",
    "verify_axioms",
    "wellposedness_check",
]
