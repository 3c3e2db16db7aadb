"""Certified spectral bounds for transfer operators on spaces of
square-integrable holomorphic functions.

Three layers:

* a priori — explicit singular-value and eigenvalue tail bounds from the
  geometry of the system (relative covers, scaling embeddings);
* determinant — certified traces by fixed-point summation, determinant
  Taylor coefficients, and tail control;
* a posteriori — disks certified (by truncation-error comparison on circles)
  to contain leading eigenvalues, cross-checked against a non-rigorous
  Galerkin oracle.
"""

from .apriori import (
    EigenvalueTailBound,
    ExpClassBound,
    class_compose,
    class_sum,
    eigenvalue_bound,
    embedding_class,
    embedding_singular_value,
    identification_class,
    pipeline_class,
    taylor_coeff_bound,
    tilde_domain,
    transfer_class,
    transfer_norm_bound,
    zero_count_bound,
)
from .certify import (
    CertifiedEigenvalue,
    certify_leading,
    cluster_roots,
    min_modulus_on_circle,
    poly_roots,
    rouche_certify,
)
from .determinant import (
    DeterminantExpansion,
    TraceValue,
    det_coefficients,
    det_coefficients_reference,
    det_eval,
    ruelle_trace,
    tail_sum,
)
from .disks import Cdisk
from .geometry import (
    ComplexDisk,
    EfficiencySummary,
    EuclideanBall,
    FiniteUnion,
    Polydisc,
    RelativeCover,
    auto_cover,
    cover_efficiency,
    cover_validate,
    dist_lower_bound,
    scale_domain,
)
from .oracle import (
    GalerkinMatrix,
    embedding_matrix,
    galerkin_matrix,
    oracle_eigenvalues,
    oracle_traces,
)
from .systems import (
    Affine1D,
    CertifiedFixedPoint,
    Composite,
    DiskEnclosure,
    MapWeightSystem,
    Mobius,
    Polynomial,
    ProductMap,
    RationalWeight,
    TruncationTail,
    branch_image_hull,
    fixed_point,
    image_enclosure,
    map_derivative,
    map_eval,
    weight_sup_bound,
)

__version__ = "0.1.0"
