"""Einstein cubic forms: harmonic cubics whose Hessian has squared norm kappa |x|^2."""
from .analysis import (
    Classification,
    CriticalLine,
    Fingerprint,
    SearchOptions,
    ass_tensor,
    cass_norm,
    cass_tensor,
    classify_low_dim,
    coefficient_residuals,
    compare,
    critical_lines,
    decomposability_witness,
    extreme_set,
    fingerprint,
    mkc,
    reflection_automorphism,
)
from .combinatorics import (
    Frame,
    FrameReport,
    TripleSystem,
    frame_catalog,
    frame_polynomial,
    group_orbit_frame,
    triple_system_polynomial,
    ts_catalog,
    validate_frame,
    validate_triple_system,
)
from .constructors import (
    CatalogEntry,
    affine_extension,
    cartan_isoparametric,
    catalog,
    extend,
    parahurwitzification,
    pfaffian_form,
    simplicial,
    tensor_product,
    triple,
)
from .tensor_core import (
    CubicForm,
    VerificationReport,
    act_orthogonal,
    direct_sum,
    evaluate,
    gradient,
    hessian,
    hessian_gram,
    laplacian_coefficients,
    normalize_kappa,
    rescale,
    verify_einstein,
)

__version__ = "0.1.0"
