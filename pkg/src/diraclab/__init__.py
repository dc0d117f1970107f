"""diraclab: a numerical spectral laboratory for 1D Dirac operators.

Periodic, antiperiodic, and general strictly regular boundary conditions;
two independent backends (Fourier-Galerkin matrices and ODE characteristic
functions); deviation tables, Feshbach 2x2 reductions, proof-apparatus
diagnostics, and Riesz-basis criteria at desk scale.
"""
from .bc import (
    BCKind,
    BoundaryCondition,
    adjoint_bc,
    boundary_functionals,
    boundary_minors,
    dirichlet_minus,
    dirichlet_plus,
    free_eigvec_coeffs,
    free_nullvector,
    general_bc,
    per_minus,
    per_plus,
    random_general_bc,
    strict_regularity,
)
from .errors import (
    BadParams,
    ComplementSingular,
    ConfigError,
    ConstraintViolation,
    ContourHitsSpectrum,
    DegenerateBC,
    DiracLabError,
    GridTooCoarse,
    NonIntegerWinding,
    PartialFailure,
    RankDeficientProjection,
    TooFewPoints,
    TruncationTooSmall,
    WrongRootCount,
    ZeroOnContour,
)
from .potential import (
    DecayFit,
    FourierPotential,
    Weight,
    check_submultiplicative,
    decay_fit,
    fourier_coeffs_from_samples,
    generate_potential,
    h_omega_norm,
    make_weight,
)
from .galerkin import GalerkinMatrix, assemble_galerkin, riesz_projection_numeric
from .shooting import (
    FundamentalSolution,
    characteristic_value,
    characteristic_values,
    count_zeros_in_disc,
    fundamental_solution,
)
from .spectral import (
    SpectralTable,
    SpectralTriple,
    build_spectral_table,
    galerkin_pair_map,
    locate_general,
    locate_pair,
)
from .feshbach import SMatrix, Theorem3Row, feshbach_reduce, vacuous_floor
from .prooflab import (
    InequalityRow,
    JordanPair,
    PairingReport,
    SuiteReport,
    c_target,
    coeff_traces,
    default_M,
    evaluate_row,
    m_threshold,
    suite_constants,
    synthesize,
)
from .riesz import BetaRatioResult, RieszReport, beta_ratio_test, riesz_criterion
from .config import RunConfig, load_config, load_config_file, parse_bc, parse_potential
from .reporting import canonical_json, write_csv, write_json

# The package-level names below take the catalogue signatures (potential
# first); the per-row (matrix, row) variants stay importable from their
# home modules.
from .pipeline import (
    LabRun,
    basic_equation_residual,
    inequality_suite,
    jordan_pair,
    pairing_report,
    theorem3_ratio,
)

__version__ = "0.1.0"
